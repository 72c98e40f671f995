//! Command-line front end: covering construction and verification,
//! Banach-Mazur approximation, approximate CVP / IP, the eps-scaling
//! experiment and the lemma property suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error. All
//! randomness comes from --seed; identical seeds produce byte-identical
//! JSON artifacts.

use clap::{Parser, Subcommand};
use cvxcover::bodies::{body_from_json, BodySpec, OracleConfig};
use cvxcover::enumerate::{enumerate_cover, scaling_experiment, EnumeratorConfig};
use cvxcover::lattice::{
    approx_cvp, approx_ip, CvpInstanceJson, IpAnswer, Lattice, OffsetBodyJson,
};
use cvxcover::macbeath::{covering_from_json, covering_to_json, verify_covering};
use cvxcover::{Error, Result};
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "cvxcover", version, about = "Convex coverings from Macbeath regions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a (c, eps)-covering of a body and verify it.
    Cover {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Verification samples.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.999)]
        coverage_target: f64,
        /// Also write the verification report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify a covering JSON against its own ambient/eps metadata.
    Verify {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.999)]
        coverage_target: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Banach-Mazur polytope approximation with sandwich certificate.
    Approx {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
    },
    /// Approximate closest vector for an instance JSON.
    Cvp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximate integer programming: a lattice point in (1+eps)K or Empty.
    Ip {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Covering-size scaling experiment over an eps list.
    Scale {
        #[arg(long)]
        body: PathBuf,
        /// Comma-separated decreasing eps values.
        #[arg(long)]
        eps_list: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.999)]
        coverage_target: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suites and print a pass/fail table.
    Lemmas {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::VerificationFailed(_) => 1,
                _ => 2,
            }
        }
    };
    std::process::exit(code);
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::input(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Cover {
            body,
            eps,
            c,
            seed,
            out,
            svg,
            samples,
            coverage_target,
            report,
        } => {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::input("eps must lie in (0, 1]"));
            }
            if c < 2.0 {
                return Err(Error::input("c must be at least 2"));
            }
            let body = body_from_json(&read(&body)?)?;
            let mut config = EnumeratorConfig::default().with_seed(seed);
            config.c = c;
            let covering = enumerate_cover(&body, eps, &config)?;
            emit(&out, &covering_to_json(&covering)?)?;
            if let Some(svg_path) = svg {
                let svg_text = cvxcover::svg::render_covering(&covering)?;
                fs::write(&svg_path, svg_text)
                    .map_err(|e| Error::input(format!("{}: {e}", svg_path.display())))?;
            }
            let mut rng = cvxcover::rng::derive(seed, &[0x7665]);
            let rep = verify_covering(&covering, &mut rng, samples, coverage_target)?;
            if let Some(report_path) = report {
                fs::write(&report_path, serde_json::to_string_pretty(&rep)?)
                    .map_err(|e| Error::input(format!("{}: {e}", report_path.display())))?;
            }
            if rep.pass() {
                eprintln!(
                    "covering: {} elements, coverage {:.5}",
                    rep.element_count, rep.coverage_rate
                );
                Ok(0)
            } else {
                eprintln!("verification failed: {rep:?}");
                Ok(1)
            }
        }
        Command::Verify {
            cover,
            samples,
            seed,
            coverage_target,
            out,
        } => {
            let covering = covering_from_json(&read(&cover)?)?;
            let mut rng = cvxcover::rng::derive(seed, &[0x7665]);
            let rep = verify_covering(&covering, &mut rng, samples, coverage_target)?;
            emit(&out, &serde_json::to_string_pretty(&rep)?)?;
            if rep.pass() {
                Ok(0)
            } else {
                let mut failed = Vec::new();
                if !rep.coverage_pass {
                    failed.push("coverage");
                }
                if !rep.buffering_pass {
                    failed.push("buffering");
                }
                if rep.packing_pass == Some(false) {
                    failed.push("packing");
                }
                eprintln!("verification failed: {}", failed.join(", "));
                Ok(1)
            }
        }
        Command::Approx {
            body,
            eps,
            seed,
            out,
            svg,
            samples,
        } => {
            let body = body_from_json(&read(&body)?)?;
            let config = EnumeratorConfig::default().with_seed(seed);
            let result =
                cvxcover::approx::banach_mazur_polytope(&body, eps, &config, samples, 0.999)?;
            let mut rng = cvxcover::rng::derive(seed, &[0x7361]);
            let report =
                cvxcover::approx::verify_sandwich(&body, &result.polytope, eps, &mut rng, 10_000)?;
            #[derive(serde::Serialize)]
            struct ApproxOutput {
                polytope: BodySpec,
                vertex_count: usize,
                covering_size: usize,
                certificate: cvxcover::approx::SandwichReport,
            }
            let output = ApproxOutput {
                polytope: BodySpec::from_body(&result.polytope)?,
                vertex_count: result.vertex_count,
                covering_size: result.covering_size,
                certificate: report.clone(),
            };
            emit(&out, &serde_json::to_string_pretty(&output)?)?;
            if let Some(svg_path) = svg {
                let svg_text = cvxcover::svg::render_sandwich(&body, &result.polytope, eps)?;
                fs::write(&svg_path, svg_text)
                    .map_err(|e| Error::input(format!("{}: {e}", svg_path.display())))?;
            }
            Ok(if report.pass() { 0 } else { 1 })
        }
        Command::Cvp {
            instance,
            seed,
            samples,
            out,
        } => {
            let spec: CvpInstanceJson = serde_json::from_str(&read(&instance)?)?;
            let inst = spec.to_instance(OracleConfig::default())?;
            let config = EnumeratorConfig::default().with_seed(seed);
            let outcome = approx_cvp(&inst, &config, samples, 0.999)?;
            emit(&out, &serde_json::to_string_pretty(&outcome)?)?;
            Ok(0)
        }
        Command::Ip {
            body,
            basis,
            eps,
            seed,
            samples,
            out,
        } => {
            let body_text = read(&body)?;
            let region = match serde_json::from_str::<OffsetBodyJson>(&body_text) {
                Ok(spec) => spec.to_region(OracleConfig::default())?,
                Err(_) => cvxcover::lattice::OffsetBody::centered(body_from_json(&body_text)?),
            };
            #[derive(serde::Deserialize)]
            struct BasisJson {
                basis: Vec<Vec<cvxcover::bodies::Real>>,
            }
            let basis: BasisJson = serde_json::from_str(&read(&basis)?)?;
            let rows: Vec<Vec<f64>> = basis
                .basis
                .iter()
                .map(|row| row.iter().map(|r| r.0).collect())
                .collect();
            let lattice = Lattice::from_rows(&rows)?;
            let config = EnumeratorConfig::default().with_seed(seed);
            let answer = approx_ip(&region, &lattice, eps, &config, samples, samples, 0.999)?;
            emit(&out, &serde_json::to_string_pretty(&answer)?)?;
            match answer {
                IpAnswer::Found { .. } | IpAnswer::Empty => Ok(0),
            }
        }
        Command::Scale {
            body,
            eps_list,
            seed,
            samples,
            coverage_target,
            out,
        } => {
            let body = body_from_json(&read(&body)?)?;
            let eps: Vec<f64> = eps_list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::input(format!("bad eps '{s}': {e}")))
                })
                .collect::<Result<_>>()?;
            let config = EnumeratorConfig::default().with_seed(seed);
            let experiment = scaling_experiment(&body, &eps, &config, samples, coverage_target)?;
            emit(&out, &serde_json::to_string_pretty(&experiment)?)?;
            Ok(0)
        }
        Command::Lemmas { suite, trials, seed } => {
            let reports = match suite.as_str() {
                "all" => cvxcover::lemmas::all_suites(trials, seed),
                "caps" => cvxcover::lemmas::caps_suite(trials, seed),
                "macbeath" => cvxcover::lemmas::macbeath_suite(trials, seed),
                "mahler" => cvxcover::lemmas::mahler_suite(trials, seed),
                other => return Err(Error::input(format!("unknown suite '{other}'"))),
            };
            let mut all_pass = true;
            println!("{:<72} {:>7} {:>6} {:>12}  status", "check", "trials", "viol", "worst");
            for r in &reports {
                all_pass &= r.pass;
                println!(
                    "{:<72} {:>7} {:>6} {:>12.3e}  {}",
                    r.name,
                    r.trials,
                    r.violations,
                    r.worst_margin,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
            if all_pass {
                Ok(0)
            } else {
                Err(Error::VerificationFailed("lemma suite failures".into()))
            }
        }
    }
}

