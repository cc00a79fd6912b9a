//! Ergodic spectral efficiency over random antenna placements.
//!
//! Trial `t` of a run with master seed `s` samples its geometry from
//! [`trial_rng(s, t)`](crate::geometry::trial_rng) (ChaCha8, key from `s`,
//! stream `t`). Trials run in parallel but are gathered and reduced in trial
//! order, so results are bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_channel_matrix, capacity_lower_bound, capacity_upper_bound, full_multiplexing_approx,
    spectral_efficiency,
};
use crate::error::{Error, Result};
use crate::geometry::{sample_with_rng, trial_rng};
use crate::linkmodel::ApertureRegion;
use crate::numfmt::sig12;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

pub const DEFAULT_TRIALS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub m: usize,
    pub region: ApertureRegion,
    pub gamma: f64,
    pub g: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m", "antenna count must be >= 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be finite and > 0, got {}", self.gamma),
            ));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::invalid(
                "g",
                format!("must be finite and > 0, got {}", self.g),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub m: usize,
    /// Electrical size `|S|/(λd)` of the region.
    pub c: f64,
    pub dof: usize,
    pub mean_xi: f64,
    pub std_error: f64,
    pub ci99_lo: f64,
    pub ci99_hi: f64,
    pub trials: u64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub full_mux_approx: f64,
    pub max_xi: f64,
    /// Trials whose `ξ` exceeded the pointwise upper bound.
    pub upper_violations: u64,
}

/// `ξ_M(H)` for every trial, in trial order.
pub fn trial_values(cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let wrap = |e: Error| Error::Trial {
                trial: t,
                source: Box::new(e),
            };
            let geom = sample_with_rng(&cfg.region, cfg.m, &mut trial_rng(cfg.master_seed, t))
                .map_err(wrap)?;
            let h = build_channel_matrix(&geom);
            spectral_efficiency(&h, cfg.gamma, cfg.g)
                .map(|r| r.xi_bits_per_s_per_hz)
                .map_err(wrap)
        })
        .collect()
}

/// Sample mean and standard error, shifted by the first value so constant
/// samples give an exactly zero error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let x0 = xs[0];
    let mean_d = xs.iter().map(|x| x - x0).sum::<f64>() / n as f64;
    let mean = x0 + mean_d;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - x0 - mean_d).powi(2)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

pub fn ergodic_estimate(cfg: &McConfig) -> Result<McSummary> {
    let xs = trial_values(cfg)?;
    let (mean, se) = mean_and_se(&xs);
    let dof = cfg.region.dof_count();
    let c = cfg.region.ratio();
    let upper = capacity_upper_bound(cfg.m, dof, cfg.gamma, cfg.g);
    Ok(McSummary {
        m: cfg.m,
        c,
        dof,
        mean_xi: mean,
        std_error: se,
        ci99_lo: mean - Z99 * se,
        ci99_hi: mean + Z99 * se,
        trials: cfg.trials,
        lower_bound: capacity_lower_bound(cfg.m, c, cfg.gamma, cfg.g),
        upper_bound: upper,
        full_mux_approx: full_multiplexing_approx(cfg.m, cfg.gamma, cfg.g),
        max_xi: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        upper_violations: xs.iter().filter(|&&x| x > upper * (1.0 + 1e-12)).count() as u64,
    })
}

/// One row of a convergence sweep over the electrical size `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub mean_xi: f64,
    pub se: f64,
    pub approx: f64,
    /// `mean_xi / approx`.
    pub ratio: f64,
    pub lb: f64,
    pub ub: f64,
}

/// Ergodic estimate at each electrical size in `ratios` (ascending, `≥ 1`).
///
/// Every row reuses `seed`, so rows differ only through `c` (common random
/// numbers). Only `c` matters physically; the region is built at `λ = d = 1`.
pub fn convergence_sweep(
    m: usize,
    gamma: f64,
    g: f64,
    ratios: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if ratios.is_empty() {
        return Err(Error::invalid("ratios", "need at least one value"));
    }
    if ratios.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(
            "ratios",
            "values must be strictly ascending",
        ));
    }
    ratios
        .iter()
        .map(|&c| {
            if !(c >= 1.0) {
                return Err(Error::invalid(
                    "ratios",
                    format!("each value must be >= 1, got {c}"),
                ));
            }
            let region = ApertureRegion::from_ratio(c, 1.0, 1.0)?;
            let s = ergodic_estimate(&McConfig {
                m,
                region,
                gamma,
                g,
                trials,
                master_seed: seed,
            })?;
            Ok(SweepRow {
                c,
                mean_xi: s.mean_xi,
                se: s.std_error,
                approx: s.full_mux_approx,
                ratio: s.mean_xi / s.full_mux_approx,
                lb: s.lower_bound,
                ub: s.upper_bound,
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "c,mean_xi,se,approx,ratio,lb,ub";

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sig12(r.c),
            sig12(r.mean_xi),
            sig12(r.se),
            sig12(r.approx),
            sig12(r.ratio),
            sig12(r.lb),
            sig12(r.ub)
        ));
    }
    out
}
