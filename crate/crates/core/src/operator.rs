//! Singular-value spectrum of the continuous LOS kernel operator on the disc.
//!
//! The kernel `H(v,u) = √(L/λ²d²) · exp(i (2π/λd) ⟨v,u⟩)` is discretised with
//! a symmetric quadrature, `K_ab = √w_a · H(v_a, u_b) · √w_b`, whose singular
//! values approximate the moduli `|ν_n|` of the operator's eigenvalues.
//!
//! The disc rule is a polar tensor grid (Gauss–Legendre in `r²`, uniform in
//! angle). Because the kernel phase only depends on `r_a r_b cos(θ_a − θ_b)`
//! and the angular nodes are equispaced, `K` is block-circulant in the angular
//! index. A DFT over the angular offset splits it exactly into
//! `angular_order` independent `radial_order x radial_order` blocks whose
//! singular values, taken together, are those of `K`. [`kernel_spectrum`]
//! uses that split; [`kernel_spectrum_dense`] decomposes the full matrix and
//! is kept for cross-checking on small grids.

use std::f64::consts::{LN_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linkmodel::ApertureRegion;
use crate::numfmt::sig12;

const SVD_MAX_ITER: usize = 10_000;

/// Nodes and weights of `[-1, 1]` Gauss–Legendre rule of order `n`,
/// by Newton iteration on `P_n` from Chebyshev initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n(z) and P_{n-1}(z)
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let kf = k as f64;
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * kf + 1.0) * z * p1 - kf * p2) / (kf + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() <= 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Polar tensor-product quadrature on a disc.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    radius_m: f64,
    radial_order: usize,
    angular_order: usize,
    /// Radial node radii (m), increasing.
    radii: Vec<f64>,
    /// Radial weights including the `r dr` measure; `Σ = R²/2`.
    radial_weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn radius(&self) -> f64 {
        self.radius_m
    }

    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    /// Total node count `N_q`.
    pub fn order(&self) -> usize {
        self.radial_order * self.angular_order
    }

    fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.angular_order as f64
    }

    fn angular_weight(&self) -> f64 {
        TAU / self.angular_order as f64
    }

    /// Nodes in radial-major order (`index = i * angular_order + k`).
    pub fn nodes(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.order());
        for &r in &self.radii {
            for k in 0..self.angular_order {
                let t = self.angle(k);
                out.push([r * t.cos(), r * t.sin()]);
            }
        }
        out
    }

    /// Weights in the same order as [`nodes`](Self::nodes); `Σ = πR²`.
    pub fn weights(&self) -> Vec<f64> {
        let dt = self.angular_weight();
        self.radial_weights
            .iter()
            .flat_map(|&a| std::iter::repeat_n(a * dt, self.angular_order))
            .collect()
    }

    /// `∫_S f(u) du` under this rule.
    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> f64 {
        self.nodes()
            .into_iter()
            .zip(self.weights())
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Gauss–Legendre in `s = r²/R²` (so the `2r dr` measure is exact) times the
/// trapezoidal rule in angle.
pub fn build_disc_quadrature(
    region: &ApertureRegion,
    radial_order: usize,
    angular_order: usize,
) -> Result<QuadratureGrid> {
    if radial_order == 0 {
        return Err(Error::invalid("radial_order", "must be >= 1"));
    }
    if angular_order == 0 {
        return Err(Error::invalid("angular_order", "must be >= 1"));
    }
    let radius = region.radius_m;
    let (x, w) = gauss_legendre(radial_order);
    // s = (x + 1)/2 ∈ (0, 1), ds = dx/2, and r dr = (R²/2) ds.
    let radii = x
        .iter()
        .map(|&xi| radius * ((xi + 1.0) / 2.0).sqrt())
        .collect();
    let radial_weights = w
        .iter()
        .map(|&wi| radius * radius / 2.0 * wi / 2.0)
        .collect();
    Ok(QuadratureGrid {
        radius_m: radius,
        radial_order,
        angular_order,
        radii,
        radial_weights,
    })
}

/// Orders that resolve the kernel oscillation scale `2πc` on the disc:
/// radial `max(16, 4⌈c⌉)`, angular `max(32, 8⌈c⌉)`.
pub fn default_orders(region: &ApertureRegion) -> (usize, usize) {
    let c = region.ratio().ceil() as usize;
    (16.max(4 * c), 32.max(8 * c))
}

/// Decreasing singular values of the discretised kernel operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpectrum {
    pub singular_values: Vec<f64>,
    pub region: ApertureRegion,
    pub loss_factor: f64,
    pub grid_order: usize,
    pub radial_order: usize,
    pub angular_order: usize,
}

impl KernelSpectrum {
    /// `Σ |ν_n|²`.
    pub fn energy(&self) -> f64 {
        self.singular_values.iter().map(|s| s * s).sum()
    }

    /// Closed-form `‖H‖² = (L/λ²d²) |S|²`.
    pub fn expected_energy(&self) -> f64 {
        kernel_energy(&self.region, self.loss_factor)
    }

    /// Rows `index,singular_value,squared_value,cumulative_energy_fraction`,
    /// 1-based index, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let total = self.energy();
        let mut out =
            String::from("index,singular_value,squared_value,cumulative_energy_fraction\n");
        let mut acc = 0.0;
        for (n, s) in self.singular_values.iter().enumerate() {
            let sq = s * s;
            acc += sq;
            out.push_str(&format!(
                "{},{},{},{}\n",
                n + 1,
                sig12(*s),
                sig12(sq),
                sig12(acc / total)
            ));
        }
        out
    }
}

/// `(L/λ²d²) |S|²`.
pub fn kernel_energy(region: &ApertureRegion, loss_factor: f64) -> f64 {
    let ld = region.wavelength_m * region.range_m;
    loss_factor / (ld * ld) * region.area() * region.area()
}

fn check_inputs(region: &ApertureRegion, loss_factor: f64, grid: &QuadratureGrid) -> Result<()> {
    if !(loss_factor > 0.0 && loss_factor <= 1.0) {
        return Err(Error::invalid(
            "loss_factor",
            format!("must lie in (0, 1], got {loss_factor}"),
        ));
    }
    if (grid.radius() - region.radius_m).abs() > 1e-12 * region.radius_m {
        return Err(Error::invalid(
            "grid",
            format!(
                "grid radius {} does not match region radius {}",
                grid.radius(),
                region.radius_m
            ),
        ));
    }
    Ok(())
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn singular_values(m: DMatrix<Complex64>) -> Result<Vec<f64>> {
    let dim = m.nrows();
    let svd = m
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::SvdFailure { dim })?;
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailure { dim });
    }
    Ok(s)
}

/// Singular values of the discretised kernel through the exact angular
/// block decomposition.
pub fn kernel_spectrum(
    region: &ApertureRegion,
    loss_factor: f64,
    grid: &QuadratureGrid,
) -> Result<KernelSpectrum> {
    check_inputs(region, loss_factor, grid)?;
    let nr = grid.radial_order;
    let na = grid.angular_order;
    let amp = (loss_factor).sqrt() / (region.wavelength_m * region.range_m);
    let kappa = region.phase_scale();
    let dt = grid.angular_weight();
    let cos_d: Vec<f64> = (0..na).map(|d| grid.angle(d).cos()).collect();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(na);
    // blocks[p][(i, j)]
    let mut blocks = vec![DMatrix::<Complex64>::zeros(nr, nr); na];
    let mut buf = vec![Complex64::new(0.0, 0.0); na];
    for i in 0..nr {
        for j in 0..nr {
            let beta = kappa * grid.radii[i] * grid.radii[j];
            let scale = amp * dt * (grid.radial_weights[i] * grid.radial_weights[j]).sqrt();
            for (b, c) in buf.iter_mut().zip(&cos_d) {
                *b = Complex64::cis(beta * c);
            }
            fft.process(&mut buf);
            for (p, z) in buf.iter().enumerate() {
                blocks[p][(i, j)] = z * scale;
            }
        }
    }
    let mut values = Vec::with_capacity(nr * na);
    for block in blocks {
        values.extend(singular_values(block)?);
    }
    Ok(KernelSpectrum {
        singular_values: sorted_desc(values),
        region: *region,
        loss_factor,
        grid_order: grid.order(),
        radial_order: nr,
        angular_order: na,
    })
}

/// The full `N_q x N_q` symmetric-quadrature kernel matrix.
pub fn kernel_matrix(
    region: &ApertureRegion,
    loss_factor: f64,
    grid: &QuadratureGrid,
) -> DMatrix<Complex64> {
    let nodes = grid.nodes();
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let amp = loss_factor.sqrt() / (region.wavelength_m * region.range_m);
    let kappa = region.phase_scale();
    let n = nodes.len();
    DMatrix::from_fn(n, n, |a, b| {
        let (v, u) = (nodes[a], nodes[b]);
        Complex64::from_polar(sw[a] * amp * sw[b], kappa * (v[0] * u[0] + v[1] * u[1]))
    })
}

/// Singular values of [`kernel_matrix`] by a dense SVD. `O(N_q³)`.
pub fn kernel_spectrum_dense(
    region: &ApertureRegion,
    loss_factor: f64,
    grid: &QuadratureGrid,
) -> Result<KernelSpectrum> {
    check_inputs(region, loss_factor, grid)?;
    let values = singular_values(kernel_matrix(region, loss_factor, grid))?;
    Ok(KernelSpectrum {
        singular_values: sorted_desc(values),
        region: *region,
        loss_factor,
        grid_order: grid.order(),
        radial_order: grid.radial_order,
        angular_order: grid.angular_order,
    })
}

/// Achievable-rate lower bound for `M` streams over distributed apertures of
/// areas `A_T`, `A_R` inside the disc:
/// `Σ_{m≤M} log₂(1 + (γ/M) (A_T A_R/|S|²) |ν_m|²)`.
///
/// Indices beyond the computed spectrum contribute nothing.
pub fn operator_lower_bound(
    spec: &KernelSpectrum,
    m: usize,
    gamma: f64,
    tx_aperture_m2: f64,
    rx_aperture_m2: f64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("m", "antenna count must be >= 1"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(
            "gamma",
            format!("must be finite and > 0, got {gamma}"),
        ));
    }
    let area = spec.region.area();
    let slack = 1.0 + 1e-12;
    for (field, a) in [
        ("tx_aperture_m2", tx_aperture_m2),
        ("rx_aperture_m2", rx_aperture_m2),
    ] {
        if !(a > 0.0 && a <= area * slack) {
            return Err(Error::invalid(
                field,
                format!("must lie in (0, |S| = {area}], got {a}"),
            ));
        }
    }
    let scale = gamma / m as f64 * tx_aperture_m2 * rx_aperture_m2 / (area * area);
    Ok(spec
        .singular_values
        .iter()
        .take(m)
        .map(|s| (scale * s * s).ln_1p())
        .sum::<f64>()
        / LN_2)
}

/// `min{M,𝓜} log₂(1 + γg/(M · min{M,𝓜}))`, the approximation for the
/// distributed-aperture spectral efficiency. Same form as
/// [`crate::channel::capacity_upper_bound`], but a different claim.
pub fn distributed_aperture_approx(m: usize, dof: usize, gamma: f64, g: f64) -> f64 {
    let k = m.min(dof) as f64;
    k * (gamma * g / (m as f64 * k)).ln_1p() / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            assert!(rel(w.iter().sum::<f64>(), 2.0) < 1e-13, "n={n}");
            // exact for degree 2n-1
            let deg = 2 * n - 2;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!(rel(q, 2.0 / (deg as f64 + 1.0)) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn disc_rule_area_and_moment() {
        let region = ApertureRegion::new(2.5, 1.0, 1.0).unwrap();
        let grid = build_disc_quadrature(&region, 7, 13).unwrap();
        let area = PI * 2.5 * 2.5;
        assert!(rel(grid.weights().iter().sum(), area) < 1e-12);
        assert!(rel(grid.integrate(|_| 1.0), area) < 1e-12);
        let r4 = PI * 2.5f64.powi(4) / 2.0;
        assert!(rel(grid.integrate(|p| p[0] * p[0] + p[1] * p[1]), r4) < 1e-12);
        assert!(grid.nodes().iter().all(|p| p[0].hypot(p[1]) < 2.5));
        assert!(grid.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn rejects_zero_orders() {
        let region = ApertureRegion::new(1.0, 1.0, 1.0).unwrap();
        assert!(build_disc_quadrature(&region, 0, 4).is_err());
        assert!(build_disc_quadrature(&region, 4, 0).is_err());
    }

    #[test]
    fn block_split_matches_dense_svd() {
        for c in [1.0, 2.5] {
            let region = ApertureRegion::from_ratio(c, 0.5, 3.0).unwrap();
            let grid = build_disc_quadrature(&region, 6, 10).unwrap();
            let fast = kernel_spectrum(&region, 0.7, &grid).unwrap();
            let dense = kernel_spectrum_dense(&region, 0.7, &grid).unwrap();
            assert_eq!(fast.singular_values.len(), dense.singular_values.len());
            let top = dense.singular_values[0];
            for (a, b) in fast.singular_values.iter().zip(&dense.singular_values) {
                assert!((a - b).abs() <= 1e-10 * top, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn trace_identity() {
        let region = ApertureRegion::from_ratio(3.0, 0.1, 50.0).unwrap();
        let (nr, na) = default_orders(&region);
        let grid = build_disc_quadrature(&region, nr, na).unwrap();
        let spec = kernel_spectrum(&region, 0.5, &grid).unwrap();
        assert!(rel(spec.energy(), spec.expected_energy()) < 1e-6);
        assert!(spec.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn constant_kernel_limit_is_rank_one() {
        // only the c ≥ 1 check stops us from taking λd ≫ |S|; build the
        // region directly at c = 1 and shrink the phase with a long range.
        let region = ApertureRegion {
            radius_m: 1e-3,
            wavelength_m: 1.0,
            range_m: 1.0,
        };
        let grid = build_disc_quadrature(&region, 8, 16).unwrap();
        let spec = kernel_spectrum(&region, 1.0, &grid).unwrap();
        let e = kernel_energy(&region, 1.0);
        assert!(rel(spec.singular_values[0].powi(2), e) < 1e-6);
        assert!(spec.singular_values[1].powi(2) < 1e-6 * e);
    }

    #[test]
    fn operator_bound_single_term_and_siso_limit() {
        let region = ApertureRegion {
            radius_m: 1e-3,
            wavelength_m: 1.0,
            range_m: 1.0,
        };
        let grid = build_disc_quadrature(&region, 8, 16).unwrap();
        let spec = kernel_spectrum(&region, 1.0, &grid).unwrap();
        let area = region.area();
        let (at, ar) = (0.5 * area, 0.25 * area);
        let gamma = 3e12;
        let nu1 = spec.singular_values[0];
        let lb = operator_lower_bound(&spec, 1, gamma, at, ar).unwrap();
        let expect = (1.0 + gamma * at * ar / (area * area) * nu1 * nu1).log2();
        assert!(rel(lb, expect) < 1e-12);
        let g = at * ar; // L = 1, λd = 1
        assert!(rel(lb, (1.0 + gamma * g).log2()) < 1e-6);
        // indices past the computed spectrum are zero-padded
        let n = spec.singular_values.len();
        let full = operator_lower_bound(&spec, n, gamma, at, ar).unwrap();
        let scale = gamma / (n + 50) as f64 * at * ar / (area * area);
        let padded: f64 = spec
            .singular_values
            .iter()
            .map(|s| (1.0 + scale * s * s).log2())
            .sum();
        assert!(
            rel(
                operator_lower_bound(&spec, n + 50, gamma, at, ar).unwrap(),
                padded
            ) < 1e-12
        );
        assert!(full > 0.0);
        assert!(operator_lower_bound(&spec, 1, gamma, 2.0 * area, ar).is_err());
        assert!(operator_lower_bound(&spec, 0, gamma, at, ar).is_err());
    }

    #[test]
    fn corollary_examples() {
        assert!(
            rel(
                distributed_aperture_approx(3, 9, 5.0, 2.0),
                3.234_007_536_003_819
            ) < 1e-14
        );
        assert!(rel(distributed_aperture_approx(8, 4, 32.0, 1.0), 4.0) < 1e-15);
        for dof in 1..20 {
            let a = distributed_aperture_approx(dof, dof, 1e3, 1.0);
            let b = dof as f64 * (1.0 + 1e3 / (dof * dof) as f64).log2();
            assert!(rel(a, b) < 1e-14);
        }
    }

    #[test]
    fn csv_layout() {
        let region = ApertureRegion::new(1.0, 1.0, 1.0).unwrap();
        let spec = KernelSpectrum {
            singular_values: vec![2.0, 1.0],
            region,
            loss_factor: 1.0,
            grid_order: 2,
            radial_order: 1,
            angular_order: 2,
        };
        assert_eq!(
            spec.to_csv(),
            "index,singular_value,squared_value,cumulative_energy_fraction\n\
             1,2.00000000000e0,4.00000000000e0,8.00000000000e-1\n\
             2,1.00000000000e0,1.00000000000e0,1.00000000000e0\n"
        );
    }
}
