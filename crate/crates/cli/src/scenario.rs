//! Scenario files and flag merging.
//!
//! A scenario is a JSON document whose keys match the library's field names.
//! Every value may also be given as a flag; flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use spacemimo_core::linkmodel::{db_to_linear, loss_factor_from_db, ApertureRegion, LinkBudget};

use crate::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFields {
    pub power_watts: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub tx_aperture_m2: Option<f64>,
    pub rx_aperture_m2: Option<f64>,
    pub range_m: Option<f64>,
    pub wavelength_m: Option<f64>,
    pub loss_factor: Option<f64>,
    pub loss_db: Option<f64>,
    pub noise_psd_w_per_hz: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFields {
    pub radius_m: Option<f64>,
    pub wavelength_m: Option<f64>,
    pub range_m: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub link: LinkFields,
    #[serde(default)]
    pub region: RegionFields,
    /// Electrical size `|S|/(λd)`; alternative to `region.radius_m`.
    pub c: Option<f64>,
    pub m: Option<usize>,
    pub all_m: Option<Vec<usize>>,
    pub g: Option<f64>,
    pub gamma: Option<f64>,
    pub snr_db: Option<f64>,
    pub eta_db: Option<String>,
    pub m_max: Option<usize>,
    pub dof: Option<usize>,
    pub tol: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub ratios: Option<Vec<f64>>,
    pub radial_order: Option<usize>,
    pub angular_order: Option<usize>,
    pub geometry: Option<PathBuf>,
}

impl Scenario {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Scenario::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read scenario {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("scenario {}: {e}", path.display())))
    }

    /// Overlays `flags` on top of `self`; any value present in `flags` wins.
    pub fn merge(self, flags: Scenario) -> Scenario {
        let l = flags.link;
        let fl = self.link;
        // a loss given on the command line in either form overrides both file forms
        let (loss_factor, loss_db) = if l.loss_factor.is_some() || l.loss_db.is_some() {
            (l.loss_factor, l.loss_db)
        } else {
            (fl.loss_factor, fl.loss_db)
        };
        let r = flags.region;
        let fr = self.region;
        // same for the region size
        let (radius_m, c) = if r.radius_m.is_some() || flags.c.is_some() {
            (r.radius_m, flags.c)
        } else {
            (fr.radius_m, self.c)
        };
        let (gamma, snr_db) = if flags.gamma.is_some() || flags.snr_db.is_some() {
            (flags.gamma, flags.snr_db)
        } else {
            (self.gamma, self.snr_db)
        };
        Scenario {
            link: LinkFields {
                power_watts: l.power_watts.or(fl.power_watts),
                bandwidth_hz: l.bandwidth_hz.or(fl.bandwidth_hz),
                tx_aperture_m2: l.tx_aperture_m2.or(fl.tx_aperture_m2),
                rx_aperture_m2: l.rx_aperture_m2.or(fl.rx_aperture_m2),
                range_m: l.range_m.or(fl.range_m),
                wavelength_m: l.wavelength_m.or(fl.wavelength_m),
                loss_factor,
                loss_db,
                noise_psd_w_per_hz: l.noise_psd_w_per_hz.or(fl.noise_psd_w_per_hz),
            },
            region: RegionFields {
                radius_m,
                wavelength_m: r.wavelength_m.or(fr.wavelength_m),
                range_m: r.range_m.or(fr.range_m),
            },
            c,
            m: flags.m.or(self.m),
            all_m: flags.all_m.or(self.all_m),
            g: flags.g.or(self.g),
            gamma,
            snr_db,
            eta_db: flags.eta_db.or(self.eta_db),
            m_max: flags.m_max.or(self.m_max),
            dof: flags.dof.or(self.dof),
            tol: flags.tol.or(self.tol),
            trials: flags.trials.or(self.trials),
            seed: flags.seed.or(self.seed),
            ratios: flags.ratios.or(self.ratios),
            radial_order: flags.radial_order.or(self.radial_order),
            angular_order: flags.angular_order.or(self.angular_order),
            geometry: flags.geometry.or(self.geometry),
        }
    }

    pub fn loss_factor(&self) -> Result<f64, CliError> {
        match (self.link.loss_factor, self.link.loss_db) {
            (Some(_), Some(_)) => Err(CliError::Validation(
                "give either `loss_factor` or `loss_db`, not both".into(),
            )),
            (Some(l), None) => Ok(l),
            (None, Some(db)) => Ok(loss_factor_from_db(db)),
            (None, None) => Ok(1.0),
        }
    }

    pub fn link_budget(&self) -> Result<LinkBudget, CliError> {
        let l = &self.link;
        let req = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Validation(format!("missing required field `{name}`")))
        };
        Ok(LinkBudget::new(
            req(l.power_watts, "power_watts")?,
            req(l.bandwidth_hz, "bandwidth_hz")?,
            req(l.tx_aperture_m2, "tx_aperture_m2")?,
            req(l.rx_aperture_m2, "rx_aperture_m2")?,
            req(l.range_m, "range_m")?,
            req(l.wavelength_m, "wavelength_m")?,
            self.loss_factor()?,
            req(l.noise_psd_w_per_hz, "noise_psd_w_per_hz")?,
        )?)
    }

    fn has_link(&self) -> bool {
        let l = &self.link;
        l.power_watts.is_some()
            || l.bandwidth_hz.is_some()
            || l.tx_aperture_m2.is_some()
            || l.rx_aperture_m2.is_some()
            || l.noise_psd_w_per_hz.is_some()
    }

    /// `g` flag, else derived from a link budget, else the normalised 1.
    pub fn gain(&self) -> Result<f64, CliError> {
        if let Some(g) = self.g {
            return Ok(g);
        }
        if self.has_link() {
            return Ok(self.link_budget()?.channel_gain());
        }
        Ok(1.0)
    }

    /// `gamma`, else `snr_db`, else derived from a link budget.
    pub fn gamma(&self) -> Result<f64, CliError> {
        match (self.gamma, self.snr_db) {
            (Some(_), Some(_)) => Err(CliError::Validation(
                "give either `gamma` or `snr_db`, not both".into(),
            )),
            (Some(g), None) => Ok(g),
            (None, Some(db)) => Ok(db_to_linear(db)),
            (None, None) if self.has_link() => Ok(self.link_budget()?.input_snr()),
            (None, None) => Err(CliError::Validation(
                "missing required field `gamma` (or `snr_db`)".into(),
            )),
        }
    }

    /// Region from `radius_m` or `c`. Wavelength and range fall back to the
    /// link block, then (for `c` only) to 1.
    pub fn region(&self) -> Result<ApertureRegion, CliError> {
        let wavelength = self.region.wavelength_m.or(self.link.wavelength_m);
        let range = self.region.range_m.or(self.link.range_m);
        match (self.region.radius_m, self.c) {
            (Some(_), Some(_)) => Err(CliError::Validation(
                "give either `radius_m` or `c`, not both".into(),
            )),
            (Some(r), None) => {
                let w = wavelength.ok_or_else(|| {
                    CliError::Validation("missing required field `wavelength_m`".into())
                })?;
                let d = range.ok_or_else(|| {
                    CliError::Validation("missing required field `range_m`".into())
                })?;
                Ok(ApertureRegion::new(r, w, d)?)
            }
            (None, Some(c)) => Ok(ApertureRegion::from_ratio(
                c,
                wavelength.unwrap_or(1.0),
                range.unwrap_or(1.0),
            )?),
            (None, None) => Err(CliError::Validation(
                "missing required field `radius_m` (or `c`)".into(),
            )),
        }
    }

    pub fn m(&self) -> Result<usize, CliError> {
        self.m
            .ok_or_else(|| CliError::Validation("missing required field `m`".into()))
    }
}
