//! Spectral efficiency versus normalised energy per bit.
//!
//! Under the full-multiplexing approximation the pair `(η, ξ)` satisfies
//! `ξ = M log₂(1 + η ξ g / M²)` for `η ≥ η₀ = M ln2 / g` and `ξ = 0` below.
//! Optionally the number of usable spatial channels can be capped at `𝓜`,
//! in which case `ξ = k log₂(1 + η ξ g / (M k))` with `k = min{M, 𝓜}`; the
//! onset `η₀` is the same in both forms.

use std::f64::consts::{LN_2, LOG2_10};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkmodel::{db_to_linear, linear_to_db};
use crate::numfmt::sig12;

/// Default residual tolerance `|F(ξ)|` for [`solve_xi`].
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default upper end of the antenna-count scan.
pub const DEFAULT_M_MAX: usize = 1024;

const MAX_BISECTIONS: usize = 400;
const MAX_DOUBLINGS: usize = 2000;

/// One point of the trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub eta: f64,
    pub eta_db: f64,
    pub xi: f64,
    pub m: usize,
    pub g: f64,
}

/// Shannon limit `η₀ = M / (g log₂ e) = M ln2 / g`.
pub fn shannon_limit(m: usize, g: f64) -> f64 {
    // scaled from the single-antenna value so η₀(M) = M · η₀(1) holds bit-exactly
    m as f64 * (LN_2 / g)
}

/// Wide-band slope `ω₀ = M log₂e · ln10 / 5` in b/s/Hz per dB.
pub fn wideband_slope(m: usize) -> f64 {
    m as f64 * LOG2_10 / 5.0
}

fn check(eta: f64, m: usize, g: f64, tol: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(
            "eta",
            format!("must be finite and > 0, got {eta}"),
        ));
    }
    if m == 0 {
        return Err(Error::invalid("m", "antenna count must be >= 1"));
    }
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::invalid(
            "g",
            format!("must be finite and > 0, got {g}"),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    Ok(())
}

/// `(k, b)` such that the relation reads `ξ = k log₂(1 + b ξ)`.
fn shape(eta: f64, m: usize, g: f64, dof: Option<usize>) -> (f64, f64) {
    let k = dof.map_or(m, |d| m.min(d.max(1))) as f64;
    (k, eta * g / (m as f64 * k))
}

/// Largest root of `ξ = M log₂(1 + η ξ g / M²)`; zero at or below the
/// Shannon limit.
pub fn solve_xi(eta: f64, m: usize, g: f64, tol: f64) -> Result<TradeoffPoint> {
    solve_xi_capped(eta, m, g, None, tol)
}

/// [`solve_xi`] with the number of spatial channels optionally capped at
/// `dof`.
///
/// For `η > η₀` the positive root is unique: `F(ξ)/ξ = 1 − k log₂(1+bξ)/ξ`
/// is strictly increasing, negative near zero and positive for large `ξ`.
/// It is bracketed by doubling, bisected on `F(ξ)/ξ` (well conditioned near
/// the onset) to floating-point resolution and polished with Newton steps.
pub fn solve_xi_capped(
    eta: f64,
    m: usize,
    g: f64,
    dof: Option<usize>,
    tol: f64,
) -> Result<TradeoffPoint> {
    check(eta, m, g, tol)?;
    let point = |xi| TradeoffPoint {
        eta,
        eta_db: linear_to_db(eta),
        xi,
        m,
        g,
    };
    if eta <= shannon_limit(m, g) {
        return Ok(point(0.0));
    }
    let (k, b) = shape(eta, m, g, dof);
    if k * b <= LN_2 {
        return Ok(point(0.0));
    }
    // G(ξ) = F(ξ)/ξ, increasing, G(0⁺) < 0.
    let ratio = |xi: f64| 1.0 - k * (b * xi).ln_1p() / (xi * LN_2);
    let residual = |xi: f64| xi - k * (b * xi).ln_1p() / LN_2;

    let mut hi = 1.0;
    let mut doublings = 0;
    while ratio(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::NoConvergence {
                iterations: doublings,
                residual: residual(hi),
            });
        }
    }
    let mut lo = hi / 2.0;
    while ratio(lo) > 0.0 {
        hi = lo;
        lo /= 2.0;
        if lo == 0.0 {
            return Err(Error::NoConvergence {
                iterations: doublings,
                residual: residual(hi),
            });
        }
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ratio(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let mut xi = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = 1.0 - k * b / ((1.0 + b * xi) * LN_2);
        if d == 0.0 {
            break;
        }
        let next = xi - residual(xi) / d;
        // keep the polish inside the bracket
        if next.is_finite()
            && next >= lo
            && next <= hi
            && residual(next).abs() <= residual(xi).abs()
        {
            xi = next;
        }
    }
    let res = residual(xi);
    if res.abs() > tol {
        return Err(Error::NoConvergence {
            iterations,
            residual: res,
        });
    }
    Ok(point(xi))
}

/// Exact inverse `η = (2^{ξ/M} − 1) M² / (g ξ)` of the relation for `ξ > 0`.
pub fn inverse_eta(xi: f64, m: usize, g: f64) -> f64 {
    inverse_eta_capped(xi, m, g, None)
}

pub fn inverse_eta_capped(xi: f64, m: usize, g: f64, dof: Option<usize>) -> f64 {
    let k = dof.map_or(m, |d| m.min(d.max(1))) as f64;
    (xi * LN_2 / k).exp_m1() * m as f64 * k / (g * xi)
}

/// Antenna count in `1..=m_max` maximising `ξ` at fixed `η`; ties resolve to
/// the smallest count. Returns `(1, 0)` when no count is above its limit.
pub fn optimal_antenna_count(eta: f64, g: f64, m_max: usize, tol: f64) -> Result<(usize, f64)> {
    optimal_antenna_count_capped(eta, g, m_max, None, tol)
}

pub fn optimal_antenna_count_capped(
    eta: f64,
    g: f64,
    m_max: usize,
    dof: Option<usize>,
    tol: f64,
) -> Result<(usize, f64)> {
    if m_max == 0 {
        return Err(Error::invalid("m_max", "must be >= 1"));
    }
    check(eta, 1, g, tol)?;
    let mut best = (1, 0.0);
    for m in 1..=m_max {
        // η₀ grows linearly in M, so every larger count is below its limit too
        if eta <= shannon_limit(m, g) {
            break;
        }
        let xi = solve_xi_capped(eta, m, g, dof, tol)?.xi;
        if xi > best.1 {
            best = (m, xi);
        }
    }
    Ok(best)
}

/// Inclusive uniform grid `lo:hi:steps` in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl DbGrid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "eta_db",
                format!("need lo < hi, got {lo}:{hi}"),
            ));
        }
        if steps < 2 {
            return Err(Error::invalid(
                "eta_db",
                format!("need steps >= 2, got {steps}"),
            ));
        }
        Ok(DbGrid { lo, hi, steps })
    }

    /// `i`-th grid value; the last one is exactly `hi`.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

impl FromStr for DbGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("eta_db", format!("expected lo:hi:steps, got `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
        let hi = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
        let steps = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        DbGrid::new(lo, hi, steps)
    }
}

impl fmt::Display for DbGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

/// `ξ` on a uniform `η̃ = 10 log₁₀ η` grid. Points at or below `η̃₀` carry `ξ = 0`.
pub fn tradeoff_curve(
    m: usize,
    g: f64,
    grid: &DbGrid,
    dof: Option<usize>,
    tol: f64,
) -> Result<Vec<TradeoffPoint>> {
    grid.values()
        .into_par_iter()
        .map(|db| {
            let mut p = solve_xi_capped(db_to_linear(db), m, g, dof, tol)?;
            p.eta_db = db;
            Ok(p)
        })
        .collect()
}

pub const CURVE_CSV_HEADER: &str = "eta_db,eta,xi,m,g";

pub fn curve_to_csv(points: &[TradeoffPoint], with_header: bool) -> String {
    let mut out = String::new();
    if with_header {
        out.push_str(CURVE_CSV_HEADER);
        out.push('\n');
    }
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            sig12(p.eta_db),
            sig12(p.eta),
            sig12(p.xi),
            p.m,
            sig12(p.g)
        ));
    }
    out
}

/// Best antenna count at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    pub eta_db: f64,
    pub m_star: usize,
    pub xi_star: f64,
}

pub fn optimal_curve(
    g: f64,
    grid: &DbGrid,
    m_max: usize,
    dof: Option<usize>,
    tol: f64,
) -> Result<Vec<OptimalPoint>> {
    grid.values()
        .into_par_iter()
        .map(|db| {
            let (m_star, xi_star) =
                optimal_antenna_count_capped(db_to_linear(db), g, m_max, dof, tol)?;
            Ok(OptimalPoint {
                eta_db: db,
                m_star,
                xi_star,
            })
        })
        .collect()
}

pub const OPTIMAL_CSV_HEADER: &str = "eta_db,m_star,xi_star";

pub fn optimal_to_csv(points: &[OptimalPoint]) -> String {
    let mut out = format!("{OPTIMAL_CSV_HEADER}\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            sig12(p.eta_db),
            p.m_star,
            sig12(p.xi_star)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    #[allow(clippy::approx_constant)] // independent literal oracle
    fn shannon_limit_values() {
        assert!(rel(shannon_limit(1, 1.0), 0.693_147_180_559_945_3) < 1e-15);
        assert!((linear_to_db(shannon_limit(1, 1.0)) + 1.591_745_389_548_6).abs() < 1e-9);
        assert!(rel(shannon_limit(4, 1.0), 2.772_588_722_239_781) < 1e-15);
        assert!((linear_to_db(shannon_limit(4, 1.0)) - 4.428_854_523_731_008).abs() < 1e-9);
        for m in 1..=64 {
            assert_eq!(shannon_limit(m, 0.37), m as f64 * shannon_limit(1, 0.37));
        }
    }

    #[test]
    fn wideband_slope_values() {
        assert!((wideband_slope(1) - 0.664_385_618_977_472_4).abs() < 1e-15);
        assert!((wideband_slope(10) - 6.643_856_189_774_724).abs() < 1e-14);
        assert_eq!(wideband_slope(7) / wideband_slope(1), 7.0);
    }

    #[test]
    fn solve_examples() {
        assert!((solve_xi(1.0, 1, 1.0, 1e-12).unwrap().xi - 1.0).abs() < 1e-12);
        assert!((solve_xi(2.0, 2, 1.0, 1e-12).unwrap().xi - 2.0).abs() < 1e-12);
        assert_eq!(solve_xi(0.5, 1, 1.0, 1e-12).unwrap().xi, 0.0);
        assert_eq!(
            solve_xi(shannon_limit(3, 1.0), 3, 1.0, 1e-12).unwrap().xi,
            0.0
        );
    }

    #[test]
    fn inverse_examples() {
        assert!((inverse_eta(1.0, 1, 1.0) - 1.0).abs() < 1e-15);
        assert!((inverse_eta(2.0, 2, 1.0) - 2.0).abs() < 1e-15);
        for m in [1, 5, 64] {
            assert!(rel(inverse_eta(1e-10, m, 2.0), shannon_limit(m, 2.0)) < 1e-9);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(solve_xi(-1.0, 1, 1.0, 1e-9).is_err());
        assert!(solve_xi(1.0, 0, 1.0, 1e-9).is_err());
        assert!(solve_xi(1.0, 1, 0.0, 1e-9).is_err());
        assert!(solve_xi(1.0, 1, 1.0, 0.0).is_err());
        assert!(optimal_antenna_count(1.0, 1.0, 0, 1e-9).is_err());
    }

    #[test]
    fn optimal_count_edges() {
        assert_eq!(optimal_antenna_count(0.5, 1.0, 64, 1e-9).unwrap(), (1, 0.0));
        let eta = shannon_limit(1, 1.0) * 1.01;
        let (m, xi) = optimal_antenna_count(eta, 1.0, 64, 1e-9).unwrap();
        assert_eq!(m, 1);
        assert!(xi > 0.0);
        // exhaustive scan as oracle
        let (m, xi) = optimal_antenna_count(100.0, 1.0, 64, 1e-9).unwrap();
        let scan: Vec<f64> = (1..=64)
            .map(|k| solve_xi(100.0, k, 1.0, 1e-9).unwrap().xi)
            .collect();
        let best = scan.iter().cloned().fold(0.0, f64::max);
        assert_eq!(xi, best);
        assert_eq!(scan.iter().position(|&v| v == best).unwrap() + 1, m);
        assert!(xi > scan[0]);
    }

    #[test]
    fn cap_limits_rate_but_not_onset() {
        let free = solve_xi_capped(50.0, 8, 1.0, None, 1e-10).unwrap().xi;
        let capped = solve_xi_capped(50.0, 8, 1.0, Some(2), 1e-10).unwrap().xi;
        assert!(capped < free);
        let eta = shannon_limit(8, 1.0);
        assert_eq!(
            solve_xi_capped(eta * 0.999, 8, 1.0, Some(2), 1e-10)
                .unwrap()
                .xi,
            0.0
        );
        assert!(
            solve_xi_capped(eta * 1.001, 8, 1.0, Some(2), 1e-10)
                .unwrap()
                .xi
                > 0.0
        );
        let xi = 3.3;
        let back = solve_xi_capped(
            inverse_eta_capped(xi, 8, 1.0, Some(2)),
            8,
            1.0,
            Some(2),
            1e-10,
        )
        .unwrap();
        assert!(rel(back.xi, xi) < 1e-9);
    }

    #[test]
    fn grid_parsing() {
        let g: DbGrid = "-2:20:221".parse().unwrap();
        assert_eq!(g.values().len(), 221);
        assert_eq!(g.value(0), -2.0);
        assert_eq!(g.value(220), 20.0);
        assert!((g.value(1) + 1.9).abs() < 1e-12);
        assert!("1:0:5".parse::<DbGrid>().is_err());
        assert!("0:1:1".parse::<DbGrid>().is_err());
        assert!("0:1".parse::<DbGrid>().is_err());
        assert!("a:1:3".parse::<DbGrid>().is_err());
    }

    #[test]
    fn curve_monotone_and_onset() {
        let grid: DbGrid = "-2:20:221".parse().unwrap();
        let pts = tradeoff_curve(1, 1.0, &grid, None, 1e-10).unwrap();
        assert!(pts.windows(2).all(|w| w[1].xi >= w[0].xi));
        let onset = linear_to_db(shannon_limit(1, 1.0));
        for p in &pts {
            assert_eq!(p.xi > 0.0, p.eta_db > onset, "{p:?}");
        }
        let two = tradeoff_curve(1, 1.0, &DbGrid::new(0.0, 1.0, 2).unwrap(), None, 1e-10).unwrap();
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn csv_header_and_rows() {
        let pts = [TradeoffPoint {
            eta: 1.0,
            eta_db: 0.0,
            xi: 1.0,
            m: 1,
            g: 1.0,
        }];
        assert_eq!(
            curve_to_csv(&pts, true),
            "eta_db,eta,xi,m,g\n0.00000000000e0,1.00000000000e0,1.00000000000e0,1,1.00000000000e0\n"
        );
    }

    proptest::proptest! {
        #[test]
        fn positive_roots_satisfy_relation(eta_db in -1.5f64..45.0, m in 1usize..40) {
            let eta = db_to_linear(eta_db);
            let p = solve_xi(eta, m, 1.0, 1e-9).unwrap();
            if p.xi > 0.0 {
                let r = p.xi - m as f64 * (1.0 + eta * p.xi / (m * m) as f64).log2();
                proptest::prop_assert!(r.abs() <= 1e-9);
            } else {
                proptest::prop_assert!(eta <= shannon_limit(m, 1.0));
            }
        }
    }
}
