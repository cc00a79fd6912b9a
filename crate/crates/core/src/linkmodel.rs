//! Physical link parameters and the scalar quantities derived from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when checking `|S|/(λd) ≥ 1` and when snapping
/// `(|S|/λd)²` to an integer before taking the ceiling.
const RATIO_REL_TOL: f64 = 1e-9;

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

/// Free-space link between a transmit and a receive aperture.
///
/// Strict SI units throughout; `loss_factor` is a linear factor in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLinkBudget")]
pub struct LinkBudget {
    pub power_watts: f64,
    pub bandwidth_hz: f64,
    pub tx_aperture_m2: f64,
    pub rx_aperture_m2: f64,
    pub range_m: f64,
    pub wavelength_m: f64,
    pub loss_factor: f64,
    pub noise_psd_w_per_hz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinkBudget {
    power_watts: f64,
    bandwidth_hz: f64,
    tx_aperture_m2: f64,
    rx_aperture_m2: f64,
    range_m: f64,
    wavelength_m: f64,
    loss_factor: f64,
    noise_psd_w_per_hz: f64,
}

impl TryFrom<RawLinkBudget> for LinkBudget {
    type Error = Error;

    fn try_from(r: RawLinkBudget) -> Result<Self> {
        LinkBudget::new(
            r.power_watts,
            r.bandwidth_hz,
            r.tx_aperture_m2,
            r.rx_aperture_m2,
            r.range_m,
            r.wavelength_m,
            r.loss_factor,
            r.noise_psd_w_per_hz,
        )
    }
}

impl LinkBudget {
    /// Validates and builds a link budget.
    ///
    /// A channel gain of one or more is accepted (the normalised `g = 1`
    /// setting is common) but logged as a warning, since real space links
    /// have `g ≪ 1`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        power_watts: f64,
        bandwidth_hz: f64,
        tx_aperture_m2: f64,
        rx_aperture_m2: f64,
        range_m: f64,
        wavelength_m: f64,
        loss_factor: f64,
        noise_psd_w_per_hz: f64,
    ) -> Result<Self> {
        require_positive("power_watts", power_watts)?;
        require_positive("bandwidth_hz", bandwidth_hz)?;
        require_positive("tx_aperture_m2", tx_aperture_m2)?;
        require_positive("rx_aperture_m2", rx_aperture_m2)?;
        require_positive("range_m", range_m)?;
        require_positive("wavelength_m", wavelength_m)?;
        require_positive("loss_factor", loss_factor)?;
        require_positive("noise_psd_w_per_hz", noise_psd_w_per_hz)?;
        if loss_factor > 1.0 {
            return Err(Error::invalid(
                "loss_factor",
                format!("must not exceed 1 (linear scale), got {loss_factor}"),
            ));
        }
        let lb = LinkBudget {
            power_watts,
            bandwidth_hz,
            tx_aperture_m2,
            rx_aperture_m2,
            range_m,
            wavelength_m,
            loss_factor,
            noise_psd_w_per_hz,
        };
        let g = lb.channel_gain();
        if g >= 1.0 {
            log::warn!("channel gain g = {g} is not much smaller than 1; not a typical space link");
        }
        Ok(lb)
    }

    /// `g = A_T A_R L / (λ² d²)`.
    pub fn channel_gain(&self) -> f64 {
        channel_gain(self)
    }

    /// `γ = P / (B N₀)`.
    pub fn input_snr(&self) -> f64 {
        input_snr(self)
    }
}

/// End-to-end power gain of the free-space link.
pub fn channel_gain(lb: &LinkBudget) -> f64 {
    let ld = lb.wavelength_m * lb.range_m;
    lb.tx_aperture_m2 * lb.rx_aperture_m2 * lb.loss_factor / (ld * ld)
}

/// Transmit power over noise power in the signal bandwidth.
pub fn input_snr(lb: &LinkBudget) -> f64 {
    lb.power_watts / (lb.bandwidth_hz * lb.noise_psd_w_per_hz)
}

/// Converts a loss expressed in dB (positive = attenuation) to a linear factor.
pub fn loss_factor_from_db(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `ξ₁ = log₂(1 + γ g)` in b/s/Hz.
pub fn siso_spectral_efficiency(g: f64, gamma: f64) -> f64 {
    (gamma * g).ln_1p() / std::f64::consts::LN_2
}

/// Planar disc shared by both ends of the link, together with the carrier
/// wavelength and link range that set its electrical size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawApertureRegion")]
pub struct ApertureRegion {
    pub radius_m: f64,
    pub wavelength_m: f64,
    pub range_m: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawApertureRegion {
    radius_m: f64,
    wavelength_m: f64,
    range_m: f64,
}

impl TryFrom<RawApertureRegion> for ApertureRegion {
    type Error = Error;

    fn try_from(r: RawApertureRegion) -> Result<Self> {
        ApertureRegion::new(r.radius_m, r.wavelength_m, r.range_m)
    }
}

impl ApertureRegion {
    /// Rejects regions whose area is below one `λd` (electrically small).
    pub fn new(radius_m: f64, wavelength_m: f64, range_m: f64) -> Result<Self> {
        require_positive("radius_m", radius_m)?;
        require_positive("wavelength_m", wavelength_m)?;
        require_positive("range_m", range_m)?;
        let region = ApertureRegion {
            radius_m,
            wavelength_m,
            range_m,
        };
        let c = region.ratio();
        if c < 1.0 - RATIO_REL_TOL {
            return Err(Error::invalid(
                "radius_m",
                format!("area/(wavelength*range) must be >= 1, got {c}"),
            ));
        }
        Ok(region)
    }

    /// Region whose area equals `ratio · λd`.
    pub fn from_ratio(ratio: f64, wavelength_m: f64, range_m: f64) -> Result<Self> {
        require_positive("ratio", ratio)?;
        require_positive("wavelength_m", wavelength_m)?;
        require_positive("range_m", range_m)?;
        let radius = (ratio * wavelength_m * range_m / PI).sqrt();
        Self::new(radius, wavelength_m, range_m)
    }

    /// `|S| = π R²`.
    pub fn area(&self) -> f64 {
        PI * self.radius_m * self.radius_m
    }

    /// Electrical size `c = |S| / (λ d)`.
    pub fn ratio(&self) -> f64 {
        self.area() / (self.wavelength_m * self.range_m)
    }

    /// Kernel phase scale `2π / (λ d)` in rad/m².
    pub fn phase_scale(&self) -> f64 {
        2.0 * PI / (self.wavelength_m * self.range_m)
    }

    pub fn dof_count(&self) -> usize {
        dof_count(self)
    }
}

/// Spatial degrees of freedom `⌈|S|² / (λ² d²)⌉`.
///
/// Values within a relative `1e-9` of an integer are snapped to it first, so
/// a region built from `c = 5` yields 25 rather than 26 after round-off.
pub fn dof_count(region: &ApertureRegion) -> usize {
    let c = region.ratio();
    let sq = c * c;
    let nearest = sq.round();
    let v = if (sq - nearest).abs() <= RATIO_REL_TOL * nearest.max(1.0) {
        nearest
    } else {
        sq.ceil()
    };
    (v as usize).max(1)
}
