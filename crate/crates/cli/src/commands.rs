use serde::Serialize;
use spacemimo_core::channel::{build_channel_matrix, spectral_efficiency};
use spacemimo_core::geometry::ArrayGeometry;
use spacemimo_core::linkmodel::{linear_to_db, siso_spectral_efficiency};
use spacemimo_core::montecarlo::{self, McConfig};
use spacemimo_core::operator::{build_disc_quadrature, default_orders, kernel_spectrum};
use spacemimo_core::tradeoff::{self, DbGrid};

use crate::scenario::Scenario;
use crate::{CliError, Format};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Link,
    Tradeoff,
    OptimalM,
    Mc,
    Eigen,
    Capacity,
}

pub fn execute(kind: Kind, s: &Scenario, format: Format) -> Result<String, CliError> {
    match kind {
        Kind::Link => link(s),
        Kind::Tradeoff => tradeoff_cmd(s, format),
        Kind::OptimalM => optimal_m(s, format),
        Kind::Mc => mc(s, format),
        Kind::Eigen => eigen(s, format),
        Kind::Capacity => capacity(s),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct LinkReport {
    g: f64,
    gamma: f64,
    gamma_db: f64,
    xi_siso: f64,
}

fn link(s: &Scenario) -> Result<String, CliError> {
    let lb = s.link_budget()?;
    let g = lb.channel_gain();
    let gamma = lb.input_snr();
    json(&LinkReport {
        g,
        gamma,
        gamma_db: linear_to_db(gamma),
        xi_siso: siso_spectral_efficiency(g, gamma),
    })
}

fn grid(s: &Scenario) -> Result<DbGrid, CliError> {
    let text = s.eta_db.as_deref().ok_or_else(|| {
        CliError::Validation("missing required field `eta_db` (lo:hi:steps)".into())
    })?;
    Ok(text.parse()?)
}

fn tol(s: &Scenario) -> f64 {
    s.tol.unwrap_or(tradeoff::DEFAULT_TOL)
}

fn tradeoff_cmd(s: &Scenario, format: Format) -> Result<String, CliError> {
    let counts = match (&s.all_m, s.m) {
        (Some(all), _) if !all.is_empty() => all.clone(),
        (_, Some(m)) => vec![m],
        _ => {
            return Err(CliError::Validation(
                "missing required field `m` (or `all_m`)".into(),
            ))
        }
    };
    let g = s.gain()?;
    let grid = grid(s)?;
    let mut points = Vec::new();
    for m in counts {
        points.extend(tradeoff::tradeoff_curve(m, g, &grid, s.dof, tol(s))?);
    }
    match format {
        Format::Csv => Ok(tradeoff::curve_to_csv(&points, true)),
        Format::Json => json(&points),
    }
}

fn optimal_m(s: &Scenario, format: Format) -> Result<String, CliError> {
    let g = s.gain()?;
    let grid = grid(s)?;
    let m_max = s.m_max.unwrap_or(tradeoff::DEFAULT_M_MAX);
    let points = tradeoff::optimal_curve(g, &grid, m_max, s.dof, tol(s))?;
    match format {
        Format::Csv => Ok(tradeoff::optimal_to_csv(&points)),
        Format::Json => json(&points),
    }
}

fn mc(s: &Scenario, format: Format) -> Result<String, CliError> {
    let m = s.m()?;
    let gamma = s.gamma()?;
    let g = s.gain()?;
    let trials = s.trials.unwrap_or(montecarlo::DEFAULT_TRIALS);
    let seed = s.seed.unwrap_or(0);
    if let Some(ratios) = &s.ratios {
        let rows = montecarlo::convergence_sweep(m, gamma, g, ratios, trials, seed)?;
        return match format {
            Format::Csv => Ok(montecarlo::sweep_to_csv(&rows)),
            Format::Json => json(&rows),
        };
    }
    let cfg = McConfig {
        m,
        region: s.region()?,
        gamma,
        g,
        trials,
        master_seed: seed,
    };
    json(&montecarlo::ergodic_estimate(&cfg)?)
}

fn eigen(s: &Scenario, format: Format) -> Result<String, CliError> {
    let region = s.region()?;
    let (nr, na) = default_orders(&region);
    let grid = build_disc_quadrature(
        &region,
        s.radial_order.unwrap_or(nr),
        s.angular_order.unwrap_or(na),
    )?;
    let spec = kernel_spectrum(&region, s.loss_factor()?, &grid)?;
    match format {
        Format::Csv => Ok(spec.to_csv()),
        Format::Json => json(&spec),
    }
}

fn capacity(s: &Scenario) -> Result<String, CliError> {
    let path = s
        .geometry
        .as_ref()
        .ok_or_else(|| CliError::Validation("missing required field `geometry`".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read geometry {}: {e}", path.display()))
    })?;
    let geom: ArrayGeometry = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("geometry {}: {e}", path.display())))?;
    let h = build_channel_matrix(&geom);
    json(&spectral_efficiency(&h, s.gamma()?, s.gain()?)?)
}
