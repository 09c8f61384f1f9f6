//! Cross-method equality check: every indexed method must return exactly
//! the hits of the linear scan.

use serde::Serialize;

use super::generate::{generate, GenConfig};
use super::io::to_sectors;
use super::runner::{default_query_region, random_points, BuiltIndex, Method};
use crate::baselines::DEFAULT_TRUNCATION_RADIUS;
use crate::error::Result;
use crate::geometry::Point;
use crate::index::{BuildOptions, SectorId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub queries: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Test hook: the dual-polar method reports its raw candidates as hits.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n: 1000,
            queries: 1000,
            seed: 1,
            methods: vec![Method::DualPolar, Method::DualAffine, Method::Regular],
            inject_fault: false,
        }
    }
}

/// A sector on which a method and the linear scan disagree for a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub method: Method,
    pub query: usize,
    pub point: Point,
    pub sector: SectorId,
    /// Whether the sector really contains the point.
    pub expected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub queries: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub discrepancies: usize,
    pub counterexample: Option<Discrepancy>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.discrepancies == 0
    }
}

/// Sorted symmetric difference of two sorted id lists, tagged with which
/// side each id came from.
fn diff(expected: &[SectorId], got: &[SectorId]) -> Vec<(SectorId, bool)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < expected.len() || j < got.len() {
        match (expected.get(i), got.get(j)) {
            (Some(a), Some(b)) if a == b => {
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a < b => {
                out.push((*a, true));
                i += 1;
            }
            (Some(a), None) => {
                out.push((*a, true));
                i += 1;
            }
            (_, Some(b)) => {
                out.push((*b, false));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Generates `n` default sectors from `seed`, queries `queries` random
/// points in the default query region and compares every method with the
/// linear scan.
pub fn verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let gen = GenConfig {
        n: cfg.n,
        seed: cfg.seed,
        ..GenConfig::default()
    };
    let sectors = to_sectors(&generate(&gen)?)?;
    let points = random_points(
        &default_query_region(&sectors),
        cfg.queries,
        cfg.seed ^ 0x9e37_79b9,
    );
    let opts = BuildOptions::default();
    let oracle = BuiltIndex::build(
        Method::Linear,
        sectors.clone(),
        DEFAULT_TRUNCATION_RADIUS,
        opts,
    )?;
    let built = cfg
        .methods
        .iter()
        .map(|&m| {
            Ok((
                m,
                BuiltIndex::build(m, sectors.clone(), DEFAULT_TRUNCATION_RADIUS, opts)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut discrepancies = 0;
    let mut counterexample = None;
    for (qi, &p) in points.iter().enumerate() {
        let expected = oracle.as_index().query_point(p).hits;
        for (method, idx) in &built {
            let q = idx.as_index().query_point(p);
            let got = if cfg.inject_fault && *method == Method::DualPolar {
                let mut c = q.candidates;
                c.sort_unstable();
                c.dedup();
                c
            } else {
                q.hits
            };
            let d = diff(&expected, &got);
            discrepancies += d.len();
            if counterexample.is_none() {
                if let Some(&(sector, expected)) = d.first() {
                    counterexample = Some(Discrepancy {
                        method: *method,
                        query: qi,
                        point: p,
                        sector,
                        expected,
                    });
                }
            }
        }
    }
    Ok(VerifyReport {
        n: cfg.n,
        queries: cfg.queries,
        seed: cfg.seed,
        methods: cfg.methods.clone(),
        discrepancies,
        counterexample,
    })
}
