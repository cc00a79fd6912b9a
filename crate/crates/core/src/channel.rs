//! Discrete line-of-sight channel matrices and their uniform spectral
//! efficiency, together with the closed-form capacity bounds for randomly
//! placed arrays.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

/// Eigenvalues below this fraction of the largest are treated as exact zeros.
pub const EIGEN_CLAMP_REL: f64 = 1e-12;

const EIGEN_MAX_ITER: usize = 10_000;

/// `M x M` matrix of unit-modulus phase couplings `h_ij` (receive `i`,
/// transmit `j`). The common amplitude is carried separately as `g / M²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
}

impl ChannelMatrix {
    /// Wraps an arbitrary square matrix; every entry must have unit modulus.
    pub fn from_entries(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::invalid(
                "h",
                "channel matrix must be square and non-empty",
            ));
        }
        if let Some(z) = entries.iter().find(|z| (z.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::invalid(
                "h",
                format!("entry {z} does not have unit modulus"),
            ));
        }
        Ok(ChannelMatrix { entries })
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `H H*`. The diagonal is exactly `M` since every row has `M` unit-modulus
    /// entries; it is set explicitly so the trace identity holds bit-exactly.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let h = &self.entries;
        let mut g = h * h.adjoint();
        let m = self.m() as f64;
        for i in 0..self.m() {
            g[(i, i)] = Complex64::new(m, 0.0);
        }
        g
    }
}

/// `h_ij = exp(i (2π/λd) ⟨v_i, u_j⟩)` for receive `v_i` and transmit `u_j`.
///
/// Only the transverse far-field phase is kept; the common range phase is a
/// global unit scalar that cancels in `H H*`.
pub fn build_channel_matrix(geom: &ArrayGeometry) -> ChannelMatrix {
    let m = geom.m();
    let k = geom.region().phase_scale();
    let (tx, rx) = (geom.tx(), geom.rx());
    let entries = DMatrix::from_fn(m, m, |i, j| {
        let phase = k * (rx[i][0] * tx[j][0] + rx[i][1] * tx[j][1]);
        Complex64::cis(phase)
    });
    ChannelMatrix { entries }
}

/// Uniform spectral efficiency of one channel realisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    #[serde(rename = "xi")]
    pub xi_bits_per_s_per_hz: f64,
    /// Eigenvalues of `H H*`, decreasing.
    pub eigenvalues: Vec<f64>,
    pub m: usize,
}

impl CapacityResult {
    /// `Σᵢ log₂(1 + (γg/M³) |vᵢ|²)` evaluated on the stored eigenvalues.
    pub fn xi_from_eigenvalues(&self, gamma: f64, g: f64) -> f64 {
        eigen_sum_xi(&self.eigenvalues, self.m, gamma, g)
    }
}

/// Per-stream SNR scale `γ g / M³`.
fn stream_scale(m: usize, gamma: f64, g: f64) -> f64 {
    gamma * g / (m as f64).powi(3)
}

fn eigen_sum_xi(eigenvalues: &[f64], m: usize, gamma: f64, g: f64) -> f64 {
    let a = stream_scale(m, gamma, g);
    eigenvalues
        .iter()
        .map(|&lam| (a * lam).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Sorted, clamped eigenvalues of `H H*`.
pub fn gram_eigenvalues(h: &ChannelMatrix) -> Result<Vec<f64>> {
    let m = h.m();
    let eig = SymmetricEigen::try_new(h.gram(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure { dim: m })?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { dim: m });
    }
    vals.sort_by(|a, b| b.total_cmp(a));
    let floor = EIGEN_CLAMP_REL * vals[0].max(0.0);
    for v in vals.iter_mut() {
        if *v < floor {
            *v = 0.0;
        }
    }
    Ok(vals)
}

/// `ξ_M(H) = log₂ det(I + (γg/M³) H H*)`, evaluated through the eigenvalues of
/// `H H*`.
pub fn spectral_efficiency(h: &ChannelMatrix, gamma: f64, g: f64) -> Result<CapacityResult> {
    check_snr(gamma, g)?;
    let eigenvalues = gram_eigenvalues(h)?;
    let m = h.m();
    Ok(CapacityResult {
        xi_bits_per_s_per_hz: eigen_sum_xi(&eigenvalues, m, gamma, g),
        eigenvalues,
        m,
    })
}

/// The same quantity via a Cholesky factorisation of `I + (γg/M³) H H*`.
/// Independent of the eigen route; used to cross-check it.
pub fn log_det_xi(h: &ChannelMatrix, gamma: f64, g: f64) -> Result<f64> {
    check_snr(gamma, g)?;
    let m = h.m();
    let a = stream_scale(m, gamma, g);
    let mut mat = h.gram() * Complex64::new(a, 0.0);
    for i in 0..m {
        mat[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let chol = Cholesky::new(mat).ok_or(Error::EigenFailure { dim: m })?;
    let l = chol.l_dirty();
    let ln_det: f64 = (0..m).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
    Ok(ln_det / std::f64::consts::LN_2)
}

fn check_snr(gamma: f64, g: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(
            "gamma",
            format!("must be finite and > 0, got {gamma}"),
        ));
    }
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::invalid(
            "g",
            format!("must be finite and > 0, got {g}"),
        ));
    }
    Ok(())
}

/// Pointwise upper bound, valid for every channel matrix:
/// `min{M,𝓜} · log₂(1 + γg / (M · min{M,𝓜}))`.
pub fn capacity_upper_bound(m: usize, dof: usize, gamma: f64, g: f64) -> f64 {
    debug_assert!(m >= 1 && dof >= 1);
    let k = m.min(dof) as f64;
    k * (gamma * g / (m as f64 * k)).log2_1p()
}

/// Lower bound on the ergodic spectral efficiency when both ends are
/// i.i.d. uniform over the disc, with electrical size `c = |S|/(λd)`:
///
/// `(M/4) log₂(1 + γg/(2M²)) / [(2 − 1/M) + (32/9π)(M − 2 + 1/M)/c]`.
///
/// The SNR factor in the numerator is `γ g` (the printed form shows `λ g`,
/// which is dimensionally inconsistent with the rest of the bound).
pub fn capacity_lower_bound(m: usize, c: f64, gamma: f64, g: f64) -> f64 {
    debug_assert!(m >= 1 && c > 0.0);
    let mf = m as f64;
    let num = mf / 4.0 * (gamma * g / (2.0 * mf * mf)).log2_1p();
    // (M − 2 + 1/M) = (M − 1)²/M, written so M = 1 gives an exact zero.
    let spread = (mf - 1.0) * (mf - 1.0) / mf;
    let den = (2.0 - 1.0 / mf) + 32.0 / (9.0 * std::f64::consts::PI) * spread / c;
    num / den
}

/// Full-multiplexing approximation `M log₂(1 + γg/M²)`.
pub fn full_multiplexing_approx(m: usize, gamma: f64, g: f64) -> f64 {
    let mf = m as f64;
    mf * (gamma * g / (mf * mf)).log2_1p()
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}
