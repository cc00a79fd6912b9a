//! Antenna placements over the planar aperture disc.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a counter-based
//! stream cipher generator. A geometry seed selects the 256-bit key through
//! `SeedableRng::seed_from_u64`; independent substreams (one per Monte Carlo
//! trial) are selected with the 64-bit stream id, so trial `t` of master seed
//! `s` draws from key `s`, stream `t` regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkmodel::ApertureRegion;

/// 2-D position in meters, `[x, y]`.
pub type Point = [f64; 2];

/// Transmit and receive positions of an `M x M` array, each inside its disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry")]
pub struct ArrayGeometry {
    region: ApertureRegion,
    tx: Vec<Point>,
    rx: Vec<Point>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    region: ApertureRegion,
    tx: Vec<Point>,
    rx: Vec<Point>,
}

impl TryFrom<RawGeometry> for ArrayGeometry {
    type Error = Error;

    fn try_from(r: RawGeometry) -> Result<Self> {
        ArrayGeometry::from_positions(r.tx, r.rx, r.region)
    }
}

/// Containment slack for user-supplied points, relative to the radius.
const EDGE_TOL: f64 = 1e-12;

impl ArrayGeometry {
    /// Wraps user-supplied positions after checking lengths and containment.
    pub fn from_positions(tx: Vec<Point>, rx: Vec<Point>, region: ApertureRegion) -> Result<Self> {
        if tx.len() != rx.len() {
            return Err(Error::LengthMismatch {
                tx: tx.len(),
                rx: rx.len(),
            });
        }
        if tx.is_empty() {
            return Err(Error::invalid(
                "m",
                "geometry needs at least one antenna per end",
            ));
        }
        let limit = region.radius_m * (1.0 + EDGE_TOL);
        for (side, pts) in [("tx", &tx), ("rx", &rx)] {
            for (index, p) in pts.iter().enumerate() {
                let r = p[0].hypot(p[1]);
                if !(r <= limit) {
                    return Err(Error::PointOutsideDisc {
                        side,
                        index,
                        x: p[0],
                        y: p[1],
                        radius: region.radius_m,
                    });
                }
            }
        }
        Ok(ArrayGeometry { region, tx, rx })
    }

    pub fn m(&self) -> usize {
        self.tx.len()
    }

    pub fn region(&self) -> &ApertureRegion {
        &self.region
    }

    pub fn tx(&self) -> &[Point] {
        &self.tx
    }

    pub fn rx(&self) -> &[Point] {
        &self.rx
    }
}

/// Generator used for a stand-alone geometry seed.
pub fn geometry_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `trial` under `master_seed`: same key, distinct stream.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// One point uniform over the disc of radius `radius` (`r = R√U₁`, `θ = 2πU₂`).
pub fn sample_disc_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let r = radius * u1.sqrt();
    let theta = std::f64::consts::TAU * u2;
    [r * theta.cos(), r * theta.sin()]
}

/// Draws `m` transmit then `m` receive positions from `rng`.
pub fn sample_with_rng<R: Rng + ?Sized>(
    region: &ApertureRegion,
    m: usize,
    rng: &mut R,
) -> Result<ArrayGeometry> {
    if m == 0 {
        return Err(Error::invalid("m", "antenna count must be >= 1"));
    }
    let radius = region.radius_m;
    let tx = (0..m).map(|_| sample_disc_point(rng, radius)).collect();
    let rx = (0..m).map(|_| sample_disc_point(rng, radius)).collect();
    Ok(ArrayGeometry {
        region: *region,
        tx,
        rx,
    })
}

/// `2m` i.i.d. area-uniform points, deterministic in `seed`.
pub fn sample_uniform_disc(region: &ApertureRegion, m: usize, seed: u64) -> Result<ArrayGeometry> {
    sample_with_rng(region, m, &mut geometry_rng(seed))
}
