//! Seeded synthetic sectors.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::SectorRecord;
use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Exponential mean (degrees) putting 65% of the mass below one degree.
pub const DEFAULT_ANGLE_MEAN_DEG: f64 = 0.952;
pub const DEFAULT_ANGLE_MAX_DEG: f64 = 10.0;

/// Default apex region: 10 km × 10 km centered on the origin.
pub fn default_region() -> Rect {
    Rect {
        min_x: -5000.0,
        min_y: -5000.0,
        max_x: 5000.0,
        max_y: 5000.0,
    }
}

/// One histogram bin of a table-driven angle distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleBin {
    pub lower_deg: f64,
    pub upper_deg: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AngleDistribution {
    /// Exponential with the given mean, conditioned on being below `max_deg`.
    TruncatedExponential {
        mean_deg: f64,
        max_deg: f64,
    },
    Fixed {
        deg: f64,
    },
    /// Bin picked by weight, angle uniform inside the bin.
    Table {
        bins: Vec<AngleBin>,
    },
}

impl Default for AngleDistribution {
    fn default() -> Self {
        AngleDistribution::TruncatedExponential {
            mean_deg: DEFAULT_ANGLE_MEAN_DEG,
            max_deg: DEFAULT_ANGLE_MAX_DEG,
        }
    }
}

impl AngleDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        match self {
            AngleDistribution::TruncatedExponential { mean_deg, max_deg } => {
                if !(*mean_deg > 0.0 && mean_deg.is_finite()) {
                    return bad(format!("angle mean must be positive, got {mean_deg}"));
                }
                if !(*max_deg > 0.0 && *max_deg <= 180.0) {
                    return bad(format!("angle max must be in (0, 180], got {max_deg}"));
                }
            }
            AngleDistribution::Fixed { deg } => {
                if !(*deg > 0.0 && *deg < 180.0) {
                    return bad(format!("fixed angle must be in (0, 180), got {deg}"));
                }
            }
            AngleDistribution::Table { bins } => {
                if bins.is_empty() {
                    return bad("angle table is empty".into());
                }
                for b in bins {
                    if !(b.lower_deg >= 0.0 && b.lower_deg < b.upper_deg && b.upper_deg <= 180.0) {
                        return bad(format!("bad angle bin {b:?}"));
                    }
                    if !(b.weight >= 0.0 && b.weight.is_finite()) {
                        return bad(format!("bad bin weight {b:?}"));
                    }
                }
                if bins.iter().map(|b| b.weight).sum::<f64>() <= 0.0 {
                    return bad("angle table has zero total weight".into());
                }
            }
        }
        Ok(())
    }

    /// Mean angle in degrees.
    pub fn mean_deg(&self) -> f64 {
        match self {
            AngleDistribution::TruncatedExponential { mean_deg, max_deg } => {
                let z = (-max_deg / mean_deg).exp();
                mean_deg - max_deg * z / (1.0 - z)
            }
            AngleDistribution::Fixed { deg } => *deg,
            AngleDistribution::Table { bins } => {
                let w: f64 = bins.iter().map(|b| b.weight).sum();
                bins.iter()
                    .map(|b| b.weight * 0.5 * (b.lower_deg + b.upper_deg))
                    .sum::<f64>()
                    / w
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        // angles must stay strictly inside (0, 180)
        let clamp = |a: f64| a.clamp(f64::MIN_POSITIVE, 180.0 * (1.0 - 1e-12));
        match self {
            AngleDistribution::TruncatedExponential { mean_deg, max_deg } => {
                let mass = -(-max_deg / mean_deg).exp_m1();
                let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                clamp(-mean_deg * (-u * mass).ln_1p())
            }
            AngleDistribution::Fixed { deg } => *deg,
            AngleDistribution::Table { bins } => {
                let total: f64 = bins.iter().map(|b| b.weight).sum();
                let mut pick = rng.random::<f64>() * total;
                let mut bin = bins.last().expect("validated");
                for b in bins {
                    if pick < b.weight {
                        bin = b;
                        break;
                    }
                    pick -= b.weight;
                }
                let t: f64 = rng.random();
                clamp(bin.lower_deg + t * (bin.upper_deg - bin.lower_deg))
            }
        }
    }
}

/// Reads `lower_deg,upper_deg,weight` rows.
pub fn load_angle_table(path: &Path) -> Result<Vec<AngleBin>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut bins = Vec::new();
    for row in rdr.deserialize() {
        bins.push(row?);
    }
    Ok(bins)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenConfig {
    pub n: usize,
    pub region: Rect,
    pub angle: AngleDistribution,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 0,
            region: default_region(),
            angle: AngleDistribution::default(),
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.region.is_valid()
            && self.region.min_x.is_finite()
            && self.region.min_y.is_finite()
            && self.region.max_x.is_finite()
            && self.region.max_y.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "bad region {:?}",
                self.region
            )));
        }
        self.angle.validate()
    }
}

/// `n` sectors with apices uniform in the region, directions uniform in
/// `[0, 360)` and angles from the configured distribution. The draw order
/// per sector is fixed (x, y, direction, angle), so output depends only on
/// the configuration.
pub fn generate(cfg: &GenConfig) -> Result<Vec<SectorRecord>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = cfg.region;
    let mut out = Vec::with_capacity(cfg.n);
    for id in 0..cfg.n as u64 {
        let x = r.min_x + rng.random::<f64>() * r.width();
        let y = r.min_y + rng.random::<f64>() * r.height();
        let direction_deg = rng.random::<f64>() * 360.0;
        let angle_deg = cfg.angle.sample(&mut rng);
        out.push(SectorRecord {
            id,
            apex_x: x,
            apex_y: y,
            direction_deg,
            angle_deg,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_generation() {
        let cfg = GenConfig::default();
        assert!(generate(&cfg).unwrap().is_empty());
    }

    #[test]
    fn fixed_angles() {
        let cfg = GenConfig {
            n: 100,
            angle: AngleDistribution::Fixed { deg: 5.0 },
            seed: 3,
            ..GenConfig::default()
        };
        let recs = generate(&cfg).unwrap();
        assert_eq!(recs.len(), 100);
        assert!(recs.iter().all(|r| r.angle_deg == 5.0));
        assert!(recs.iter().all(|r| cfg
            .region
            .contains_point(crate::geometry::Point::new(r.apex_x, r.apex_y))));
        assert!(recs.iter().all(|r| (0.0..360.0).contains(&r.direction_deg)));
    }

    #[test]
    fn default_distribution_below_one_degree() {
        let cfg = GenConfig {
            n: 100_000,
            seed: 11,
            ..GenConfig::default()
        };
        let recs = generate(&cfg).unwrap();
        let below = recs.iter().filter(|r| r.angle_deg < 1.0).count() as f64 / recs.len() as f64;
        assert!((below - 0.65).abs() <= 0.02, "{below}");
        assert!(recs
            .iter()
            .all(|r| r.angle_deg > 0.0 && r.angle_deg <= 10.0));
    }

    #[test]
    fn seeds_are_reproducible() {
        let cfg = GenConfig {
            n: 50,
            seed: 9,
            ..GenConfig::default()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = GenConfig {
            seed: 10,
            ..cfg.clone()
        };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn table_distribution_stays_in_bins() {
        let bins = vec![
            AngleBin {
                lower_deg: 0.0,
                upper_deg: 1.0,
                weight: 3.0,
            },
            AngleBin {
                lower_deg: 5.0,
                upper_deg: 6.0,
                weight: 1.0,
            },
        ];
        let cfg = GenConfig {
            n: 2000,
            seed: 1,
            angle: AngleDistribution::Table { bins },
            ..GenConfig::default()
        };
        let recs = generate(&cfg).unwrap();
        let low = recs.iter().filter(|r| r.angle_deg < 1.0).count();
        assert!(recs
            .iter()
            .all(|r| r.angle_deg < 1.0 || (5.0..6.0).contains(&r.angle_deg)));
        assert!((low as f64 / 2000.0 - 0.75).abs() < 0.05);
    }

    #[test]
    fn invalid_configs() {
        let bad_max = AngleDistribution::TruncatedExponential {
            mean_deg: 1.0,
            max_deg: 200.0,
        };
        assert!(bad_max.validate().is_err());
        assert!(AngleDistribution::Fixed { deg: 0.0 }.validate().is_err());
        assert!(AngleDistribution::Table { bins: vec![] }
            .validate()
            .is_err());
    }

    #[test]
    fn truncated_mean_matches_samples() {
        let dist = AngleDistribution::default();
        let cfg = GenConfig {
            n: 50_000,
            seed: 5,
            angle: dist.clone(),
            ..GenConfig::default()
        };
        let recs = generate(&cfg).unwrap();
        let mean = recs.iter().map(|r| r.angle_deg).sum::<f64>() / recs.len() as f64;
        assert!(
            (mean - dist.mean_deg()).abs() < 0.02,
            "{mean} vs {}",
            dist.mean_deg()
        );
    }
}
