//! Layered randomized covering enumerator.
//!
//! The body is split into layers by the relative ray distance in the
//! expanded body `K_eps`: layer `i <= k0` holds points of depth
//! `[2^{i-1} eps, 2^i eps)`, the wide layer everything deeper. Each narrow
//! layer is hit through two channels: direct shell samples (large Macbeath
//! regions) and cap samples of 32-expanded representative caps found
//! through the polar (small regions). Wide-layer regions all have constant
//! relative volume, so plain uniform samples of the target hit them. Every
//! sampled point becomes the center of a covering element `M^{1/c}` via the
//! hitting-set route.
//!
//! Layering uses the ray distance instead of the minimum-volume-cap width:
//! the minimum-width cap of `x` has width exactly `ray(x)` and every cap
//! containing `x` is at least that wide, so the layer constants shift by at
//! most the cap-width comparability factor, and coverage is verified
//! empirically regardless.
//!
//! All randomness is drawn from streams derived from `config.seed`, one per
//! (layer, channel), so the output is reproducible element by element no
//! matter how phases are scheduled.

use crate::bodies::ConvexBody;
use crate::caps::{cap_sample, expand_cap, representative_cap, shell_sample_scaled, Expanded};
use crate::macbeath::{hitting_to_cover, verify_covering, Covering, CoveringReport};
use crate::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Layer structure for accuracy `eps` and wide-cap threshold `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredDecomposition {
    pub eps: f64,
    pub beta: f64,
    pub k0: usize,
}

impl LayeredDecomposition {
    pub fn new(eps: f64, beta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::input("layered decomposition needs 0 < eps <= 1"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::input("beta must lie in (0,1)"));
        }
        let k0 = (beta / eps).log2().ceil().max(0.0) as usize;
        Ok(LayeredDecomposition { eps, beta, k0 })
    }

    /// Phase width `eps_i = 2^{i-1} eps`.
    pub fn phase_eps(&self, layer: usize) -> f64 {
        2.0f64.powi(layer as i32 - 1) * self.eps
    }

    /// Layer index of a depth value: `[2^{i-1} eps, 2^i eps)` for narrow
    /// layers, `k0 + 1` beyond.
    pub fn layer_of_width(&self, w: f64) -> usize {
        if w < self.eps {
            return 0;
        }
        let i = (w / self.eps).log2().floor() as usize + 1;
        if i > self.k0 {
            self.k0 + 1
        } else {
            i
        }
    }

    pub fn wide_layer(&self) -> usize {
        self.k0 + 1
    }
}

/// Knobs of the randomized enumerator. The per-layer channel count is
/// `ceil(sample_factor 2^n eps_i^{-(n-1)/2} L)` with `L = ln(1/eps)` when
/// `log_factor` is set and 1 otherwise; the wide layer draws
/// `ceil(sample_factor 2^n * 2^n)` uniform points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumeratorConfig {
    pub c: f64,
    /// Base of the `2^{O(n)}` sampling constant: `A = sample_factor * 2^n`.
    pub sample_factor: f64,
    pub log_factor: bool,
    pub polar_channel: bool,
    pub seed: u64,
    /// Wide-cap threshold of the decomposition.
    pub beta: f64,
    /// Base of the small-region volume threshold `t' = (vol_factor)^n *
    /// eps^{(n+1)/2}`; classification metadata only.
    pub vol_threshold_base: f64,
    /// Well-centered certificate `kb_ratio >= factor * 2^-n`.
    pub well_centered_factor: f64,
    pub well_centered_samples: usize,
}

impl Default for EnumeratorConfig {
    fn default() -> Self {
        EnumeratorConfig {
            c: 2.0,
            sample_factor: 8.0,
            log_factor: false,
            polar_channel: true,
            seed: 0,
            beta: 0.125,
            vol_threshold_base: 0.25,
            well_centered_factor: 2.0 / 3.0,
            well_centered_samples: 2_000,
        }
    }
}

impl EnumeratorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn multiplier(&self, dim: usize) -> f64 {
        self.sample_factor * 2.0f64.powi(dim as i32)
    }

    /// Large-region volume threshold `t = eps^{(n+1)/2}`.
    pub fn large_threshold(&self, eps: f64, dim: usize) -> f64 {
        eps.powf((dim as f64 + 1.0) / 2.0)
    }

    /// Small-region threshold `t'`.
    pub fn small_threshold(&self, eps: f64, dim: usize) -> f64 {
        self.vol_threshold_base.powi(dim as i32) * self.large_threshold(eps, dim)
    }

    /// Per-channel draw count of a narrow layer.
    pub fn layer_count(&self, dim: usize, eps: f64, phase_eps: f64) -> usize {
        let len_factor = if self.log_factor { (1.0 / eps).ln() } else { 1.0 };
        if len_factor <= 0.0 {
            return 0;
        }
        let a = self.multiplier(dim);
        (a * phase_eps.powf(-(dim as f64 - 1.0) / 2.0) * len_factor).ceil() as usize
    }

    /// Uniform draw count of the wide layer.
    pub fn wide_count(&self, dim: usize) -> usize {
        (self.multiplier(dim) * 2.0f64.powi(dim as i32)).ceil() as usize
    }

    /// Deterministic upper bound on the emitted covering size.
    pub fn size_bound(&self, dim: usize, eps: f64) -> usize {
        let decomp = LayeredDecomposition::new(eps, self.beta).expect("valid eps");
        let mut total = self.wide_count(dim);
        for i in 0..=decomp.k0 {
            let per = self.layer_count(dim, eps, decomp.phase_eps(i));
            total += if self.polar_channel { 2 * per } else { per };
        }
        total
    }
}

/// Layer index of a point of the target body, keyed by the ray distance in
/// the expanded body.
pub fn layer_of(body: &ConvexBody, eps: f64, beta: f64, x: &DVector<f64>) -> Result<usize> {
    let g = body.gauge(x);
    if g > 1.0 + 1e-9 {
        return Err(Error::input("layer_of: point lies outside the body"));
    }
    let decomp = LayeredDecomposition::new(eps, beta)?;
    let width = 1.0 - g / (1.0 + eps);
    Ok(decomp.layer_of_width(width))
}

/// Runs the layered enumerator and returns the covering (unverified; call
/// [`verify_covering`] or [`enumerate_cover_verified`]).
pub fn enumerate_cover(body: &ConvexBody, eps: f64, config: &EnumeratorConfig) -> Result<Covering> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::input("enumerator needs 0 < eps <= 1"));
    }
    if config.c < 2.0 {
        return Err(Error::precondition("enumerator needs c >= 2"));
    }
    let n = body.dim();
    let mut kb_rng = crate::rng::derive(config.seed, &[0x6b62]);
    let (ratio, ok) = body.certify_well_centered(
        &mut kb_rng,
        config.well_centered_samples,
        config.well_centered_factor,
    )?;
    if !ok {
        return Err(Error::precondition(format!(
            "body is not well-centered: kb ratio {ratio:.4} below threshold"
        )));
    }

    let ambient = body.scale(1.0 + eps);
    let polar_ambient = if config.polar_channel {
        Some(ambient.polar()?)
    } else {
        None
    };
    let decomp = LayeredDecomposition::new(eps, config.beta)?;

    let mut hits: Vec<(DVector<f64>, usize)> = Vec::new();
    for layer in 0..=decomp.k0 {
        let eps_i = decomp.phase_eps(layer);
        let count = config.layer_count(n, eps, eps_i);
        if count == 0 {
            continue;
        }
        // channel 1: shell samples of Lambda_{K_eps}(eps_i)
        let mut rng1 = crate::rng::derive(config.seed, &[1, layer as u64]);
        let inner_scale = (1.0 - 4.0 * eps_i).max(0.0);
        for _ in 0..count {
            let x = shell_sample_scaled(&ambient, inner_scale, &mut rng1)?;
            hits.push((x, layer));
        }
        // channel 2: polar shell -> representative cap -> 32-expansion
        if let Some(polar) = &polar_ambient {
            let mut rng2 = crate::rng::derive(config.seed, &[2, layer as u64]);
            let polar_inner = (1.0 - 2.0 * eps_i).max(0.0);
            let rep_eps = eps_i.min(0.49);
            for _ in 0..count {
                let p = shell_sample_scaled(polar, polar_inner, &mut rng2)?;
                let rep = representative_cap(&ambient, polar, &p, rep_eps)?;
                let x = match expand_cap(&rep.cap, 32.0)? {
                    Expanded::Cap(c) => cap_sample(&ambient, &c, &mut rng2)?,
                    Expanded::FullBody => ambient.uniform_sample(&mut rng2)?,
                };
                hits.push((x, layer));
            }
        }
    }
    // wide layer: uniform samples of the target body itself
    let mut rng_wide = crate::rng::derive(config.seed, &[3]);
    for _ in 0..config.wide_count(n) {
        let x = body.uniform_sample(&mut rng_wide)?;
        hits.push((x, decomp.wide_layer()));
    }

    let (covering, _rejected) = hitting_to_cover(&ambient, &hits, config.c, eps)?;
    Ok(covering)
}

/// Enumerates and verifies in one step; fails when verification fails.
pub fn enumerate_cover_verified(
    body: &ConvexBody,
    eps: f64,
    config: &EnumeratorConfig,
    verify_samples: usize,
    coverage_target: f64,
) -> Result<(Covering, CoveringReport)> {
    let covering = enumerate_cover(body, eps, config)?;
    let mut rng = crate::rng::derive(config.seed, &[0x7665]);
    let report = verify_covering(&covering, &mut rng, verify_samples, coverage_target)?;
    if !report.pass() {
        return Err(Error::VerificationFailed(format!(
            "coverage {:.5} (target {}), buffering {}, packing {:?}",
            report.coverage_rate, report.coverage_target, report.buffering_pass, report.packing_pass
        )));
    }
    Ok((covering, report))
}

/// One row of the eps-scaling experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub size: usize,
    pub coverage_rate: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingExperiment {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of log(size) against log(1/eps); None with
    /// fewer than two rows.
    pub slope: Option<f64>,
}

/// Runs verified coverings over a decreasing eps list and fits the size
/// exponent. Aborts with the failing eps if any covering fails.
pub fn scaling_experiment(
    body: &ConvexBody,
    eps_list: &[f64],
    config: &EnumeratorConfig,
    verify_samples: usize,
    coverage_target: f64,
) -> Result<ScalingExperiment> {
    if eps_list.is_empty() {
        return Err(Error::input("scaling experiment needs at least one eps"));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for (i, &eps) in eps_list.iter().enumerate() {
        let cfg = config.clone().with_seed(config.seed.wrapping_add(i as u64));
        let (covering, report) =
            enumerate_cover_verified(body, eps, &cfg, verify_samples, coverage_target).map_err(
                |e| match e {
                    Error::VerificationFailed(msg) => {
                        Error::VerificationFailed(format!("eps {eps}: {msg}"))
                    }
                    other => other,
                },
            )?;
        rows.push(ScalingRow {
            eps,
            size: covering.elements.len(),
            coverage_rate: report.coverage_rate,
            verified: true,
        });
    }
    let slope = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.eps).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| (r.size as f64).ln()).collect();
        let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
        let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
        let den: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        Some(num / den)
    } else {
        None
    };
    Ok(ScalingExperiment { rows, slope })
}
