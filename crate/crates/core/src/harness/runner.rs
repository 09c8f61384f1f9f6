//! Timed experiments over the four query methods.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate::{generate, GenConfig};
use super::io::to_sectors;
use crate::baselines::{LinearScan, RegularIndex, DEFAULT_TRUNCATION_RADIUS};
use crate::error::{Error, Result};
use crate::geometry::{AngularSector, Point, Rect};
use crate::index::{AffineDualIndex, BuildOptions, Loading, PolarDualIndex, SectorIndex};
use crate::rtree::{AreaVariant, RTree, DEFAULT_BRANCHING};

/// Side of the square query region, in meters.
pub const QUERY_REGION_SIDE: f64 = 5000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Linear,
    Regular,
    DualPolar,
    DualAffine,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Linear,
        Method::Regular,
        Method::DualPolar,
        Method::DualAffine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::Regular => "regular",
            Method::DualPolar => "dual-polar",
            Method::DualAffine => "dual-affine",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// A built index of any method.
pub enum BuiltIndex {
    Linear(LinearScan),
    Regular(RegularIndex),
    DualPolar(PolarDualIndex),
    DualAffine(AffineDualIndex),
}

impl BuiltIndex {
    pub fn build(
        method: Method,
        sectors: Vec<AngularSector>,
        radius: f64,
        opts: BuildOptions,
    ) -> Result<Self> {
        Ok(match method {
            Method::Linear => BuiltIndex::Linear(LinearScan::new(sectors)?),
            Method::Regular => {
                BuiltIndex::Regular(RegularIndex::build_with(sectors, radius, opts)?)
            }
            Method::DualPolar => BuiltIndex::DualPolar(PolarDualIndex::build_with(sectors, opts)?),
            Method::DualAffine => {
                BuiltIndex::DualAffine(AffineDualIndex::build_with(sectors, opts)?)
            }
        })
    }

    pub fn as_index(&self) -> &dyn SectorIndex {
        match self {
            BuiltIndex::Linear(i) => i,
            BuiltIndex::Regular(i) => i,
            BuiltIndex::DualPolar(i) => i,
            BuiltIndex::DualAffine(i) => i,
        }
    }

    /// The trees behind the index; none for the linear scan.
    pub fn trees(&self) -> Vec<&RTree<crate::index::SectorId>> {
        use crate::dual::AffineSpace;
        match self {
            BuiltIndex::Linear(_) => vec![],
            BuiltIndex::Regular(i) => vec![i.tree()],
            BuiltIndex::DualPolar(i) => vec![i.tree()],
            BuiltIndex::DualAffine(i) => vec![i.tree(AffineSpace::H), i.tree(AffineSpace::V)],
        }
    }

    /// Coverage and overlap of the index's trees. With two trees the
    /// per-node means are pooled over both.
    pub fn stats(&self) -> Option<IndexStats> {
        let trees: Vec<_> = self.trees().into_iter().filter(|t| !t.is_empty()).collect();
        if trees.is_empty() {
            return None;
        }
        let pooled = |variant| {
            let mut cov = 0.0;
            let mut ovl = 0.0;
            let mut n = 0usize;
            for t in &trees {
                let s = t.stats(variant).expect("non-empty");
                cov += s.mean_coverage * s.measured_nodes as f64;
                ovl += s.mean_overlap * s.measured_nodes as f64;
                n += s.measured_nodes;
            }
            let n = n.max(1) as f64;
            (cov / n, ovl / n)
        };
        let (coverage_sum, overlap_sum) = pooled(AreaVariant::Sum);
        let (coverage_union, overlap_union) = pooled(AreaVariant::Union);
        Some(IndexStats {
            coverage_sum,
            overlap_sum,
            coverage_union,
            overlap_union,
            height: trees.iter().map(|t| t.height()).max().unwrap_or(0),
            node_count: trees.iter().map(|t| t.node_count()).sum(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndexStats {
    pub coverage_sum: f64,
    pub overlap_sum: f64,
    pub coverage_union: f64,
    pub overlap_union: f64,
    pub height: usize,
    pub node_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub queries: usize,
    /// `None` means a 5 km square centered on the mean apex.
    pub query_region: Option<Rect>,
    pub query_seed: u64,
    /// Timed passes over the query set; the median pass is reported.
    pub repetitions: usize,
    /// Timed builds; the median is reported.
    pub build_repetitions: usize,
    pub branching: usize,
    pub loading: Loading,
    pub radius: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: Method::ALL.to_vec(),
            queries: 1000,
            query_region: None,
            query_seed: 0x5eed,
            repetitions: 5,
            build_repetitions: 1,
            branching: DEFAULT_BRANCHING,
            loading: Loading::Insert,
            radius: DEFAULT_TRUNCATION_RADIUS,
        }
    }
}

impl BenchConfig {
    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            branching: self.branching,
            loading: self.loading,
        }
    }
}

/// One row of results: a method on one dataset and configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub method: Method,
    /// Swept parameter value, if this row belongs to a sweep.
    pub sweep_value: Option<f64>,
    pub n: usize,
    pub radius: f64,
    pub queries: usize,
    pub build_time_ms: Option<f64>,
    pub avg_search_time_ms: f64,
    pub avg_candidates: f64,
    pub avg_hits: f64,
    pub avg_node_visits: f64,
    pub coverage_sum: Option<f64>,
    pub coverage_union: Option<f64>,
    pub overlap_sum: Option<f64>,
    pub overlap_union: Option<f64>,
    pub tree_height: Option<usize>,
    pub tree_nodes: Option<usize>,
}

impl BenchReport {
    /// The row with its timing fields zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> BenchReport {
        BenchReport {
            build_time_ms: self.build_time_ms.map(|_| 0.0),
            avg_search_time_ms: 0.0,
            ..self.clone()
        }
    }
}

/// A `side`-meter square centered on the mean apex.
pub fn default_query_region(sectors: &[AngularSector]) -> Rect {
    let n = sectors.len().max(1) as f64;
    let cx = sectors.iter().map(|s| s.apex().x).sum::<f64>() / n;
    let cy = sectors.iter().map(|s| s.apex().y).sum::<f64>() / n;
    let h = 0.5 * QUERY_REGION_SIDE;
    Rect {
        min_x: cx - h,
        min_y: cy - h,
        max_x: cx + h,
        max_y: cy + h,
    }
}

/// `count` points uniform in `region`.
pub fn random_points(region: &Rect, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = region.min_x + rng.random::<f64>() * region.width();
            let y = region.min_y + rng.random::<f64>() * region.height();
            Point::new(x, y)
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Builds every requested method over `sectors` and runs the same random
/// point queries against each.
///
/// A first untimed pass over the queries collects candidate and hit counts
/// and warms caches; the reported search time is the median over
/// `repetitions` timed passes of the mean per-query time.
pub fn run_bench(sectors: &[AngularSector], cfg: &BenchConfig) -> Result<Vec<BenchReport>> {
    if cfg.queries == 0 {
        return Err(Error::InvalidConfig(
            "at least one query is required".into(),
        ));
    }
    if cfg.repetitions == 0 || cfg.build_repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be positive".into()));
    }
    let region = cfg
        .query_region
        .unwrap_or_else(|| default_query_region(sectors));
    let points = random_points(&region, cfg.queries, cfg.query_seed);
    let opts = cfg.build_options();

    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let mut build_times = Vec::with_capacity(cfg.build_repetitions);
        let mut built = None;
        for _ in 0..cfg.build_repetitions {
            let data = sectors.to_vec();
            let start = Instant::now();
            let idx = BuiltIndex::build(method, data, cfg.radius, opts)?;
            build_times.push(ms(start));
            built = Some(idx);
        }
        let built = built.expect("at least one build");
        let index = built.as_index();

        let mut candidates = 0usize;
        let mut hits = 0usize;
        let mut visits = 0usize;
        for &p in &points {
            let q = index.query_point(p);
            candidates += if method == Method::Linear {
                sectors.len()
            } else {
                q.candidate_count()
            };
            hits += q.hits.len();
            visits += q.node_visits;
        }

        let mut passes = Vec::with_capacity(cfg.repetitions);
        for _ in 0..cfg.repetitions {
            let start = Instant::now();
            let mut sink = 0usize;
            for &p in &points {
                sink += std::hint::black_box(index.query_point(p)).hits.len();
            }
            std::hint::black_box(sink);
            passes.push(ms(start) / points.len() as f64);
        }

        let stats = built.stats();
        let q = points.len() as f64;
        rows.push(BenchReport {
            method,
            sweep_value: None,
            n: sectors.len(),
            radius: cfg.radius,
            queries: points.len(),
            build_time_ms: (method != Method::Linear).then(|| median(build_times)),
            avg_search_time_ms: median(passes),
            avg_candidates: candidates as f64 / q,
            avg_hits: hits as f64 / q,
            avg_node_visits: visits as f64 / q,
            coverage_sum: stats.map(|s| s.coverage_sum),
            coverage_union: stats.map(|s| s.coverage_union),
            overlap_sum: stats.map(|s| s.overlap_sum),
            overlap_union: stats.map(|s| s.overlap_union),
            tree_height: stats.map(|s| s.height),
            tree_nodes: stats.map(|s| s.node_count),
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Number of generated sectors.
    N,
    /// Truncation radius of the regular index.
    Radius,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepAxis::N),
            "radius" => Ok(SweepAxis::Radius),
            _ => Err(Error::InvalidConfig(format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// One [`run_bench`] per value. Along `n`, a fresh dataset is generated per
/// value from `gen` (same seed). Along `radius`, one dataset is generated
/// and only the regular index's truncation changes; the dual indexes and
/// the linear scan do not depend on it.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    gen: &GenConfig,
    bench: &BenchConfig,
) -> Result<Vec<BenchReport>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one value".into(),
        ));
    }
    if values.iter().any(|v| v.is_nan()) || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "sweep values must be ascending".into(),
        ));
    }
    let mut rows = Vec::new();
    match axis {
        SweepAxis::N => {
            for &v in values {
                if !(v >= 0.0 && v.fract() == 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "sector count {v} is not an integer"
                    )));
                }
                let cfg = GenConfig {
                    n: v as usize,
                    ..gen.clone()
                };
                let sectors = to_sectors(&generate(&cfg)?)?;
                for mut row in run_bench(&sectors, bench)? {
                    row.sweep_value = Some(v);
                    rows.push(row);
                }
            }
        }
        SweepAxis::Radius => {
            let sectors = to_sectors(&generate(gen)?)?;
            for &v in values {
                let cfg = BenchConfig {
                    radius: v,
                    ..bench.clone()
                };
                for mut row in run_bench(&sectors, &cfg)? {
                    row.sweep_value = Some(v);
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

/// First swept value at which `fast` beats `slow` on search time, provided
/// `slow` wins (or ties) at every smaller value and `fast` keeps winning
/// at every larger one.
pub fn crossover(rows: &[BenchReport], slow: Method, fast: Method) -> Option<f64> {
    let mut pairs: Vec<(f64, f64, f64)> = Vec::new();
    for r in rows.iter().filter(|r| r.method == slow) {
        let v = r.sweep_value?;
        let other = rows
            .iter()
            .find(|o| o.method == fast && o.sweep_value == Some(v))?;
        pairs.push((v, r.avg_search_time_ms, other.avg_search_time_ms));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = pairs.iter().position(|&(_, s, f)| f < s)?;
    let consistent = pairs[..first].iter().all(|&(_, s, f)| f >= s)
        && pairs[first..].iter().all(|&(_, s, f)| f < s);
    consistent.then_some(pairs[first].0)
}

pub fn write_reports_csv<W: Write>(writer: W, rows: &[BenchReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports_json<W: Write>(writer: W, rows: &[BenchReport]) -> Result<()> {
    serde_json::to_writer_pretty(writer, rows)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::AngleDistribution;

    fn small_cfg() -> BenchConfig {
        BenchConfig {
            queries: 50,
            repetitions: 1,
            ..BenchConfig::default()
        }
    }

    fn data(n: usize, seed: u64) -> Vec<AngularSector> {
        let cfg = GenConfig {
            n,
            seed,
            ..GenConfig::default()
        };
        to_sectors(&generate(&cfg).unwrap()).unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("rtree".parse::<Method>().is_err());
    }

    #[test]
    fn linear_has_no_tree_metrics() {
        let cfg = BenchConfig {
            methods: vec![Method::Linear],
            ..small_cfg()
        };
        let rows = run_bench(&data(200, 1), &cfg).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert!(r.coverage_sum.is_none() && r.overlap_union.is_none() && r.build_time_ms.is_none());
        assert_eq!(r.avg_candidates, 200.0);
    }

    #[test]
    fn methods_agree_on_hits() {
        let rows = run_bench(&data(500, 2), &small_cfg()).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.avg_hits, rows[0].avg_hits, "{}", r.method);
            assert!(r.avg_hits <= r.avg_candidates);
            assert!(r.avg_search_time_ms >= 0.0);
        }
    }

    #[test]
    fn hit_model_fixed_angle() {
        let gen = GenConfig {
            n: 10_000,
            seed: 4,
            angle: AngleDistribution::Fixed { deg: 0.36 },
            ..GenConfig::default()
        };
        let sectors = to_sectors(&generate(&gen).unwrap()).unwrap();
        let cfg = BenchConfig {
            methods: vec![Method::DualPolar],
            queries: 500,
            ..small_cfg()
        };
        let r = &run_bench(&sectors, &cfg).unwrap()[0];
        assert!((r.avg_hits - 10.0).abs() <= 5.0, "{}", r.avg_hits);
    }

    #[test]
    fn non_timing_fields_are_reproducible() {
        let sectors = data(300, 8);
        let a: Vec<_> = run_bench(&sectors, &small_cfg())
            .unwrap()
            .iter()
            .map(BenchReport::without_timings)
            .collect();
        let b: Vec<_> = run_bench(&sectors, &small_cfg())
            .unwrap()
            .iter()
            .map(BenchReport::without_timings)
            .collect();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_reports_csv(&mut ca, &a).unwrap();
        write_reports_csv(&mut cb, &b).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn single_value_sweep() {
        let gen = GenConfig {
            n: 100,
            seed: 1,
            ..GenConfig::default()
        };
        let cfg = BenchConfig {
            methods: vec![Method::Regular, Method::DualPolar],
            ..small_cfg()
        };
        let rows = sweep(SweepAxis::Radius, &[1000.0], &gen, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows
            .iter()
            .all(|r| r.sweep_value == Some(1000.0) && r.radius == 1000.0));
        assert!(sweep(SweepAxis::N, &[], &gen, &cfg).is_err());
        assert!(sweep(SweepAxis::N, &[10.0, 5.0], &gen, &cfg).is_err());
    }

    #[test]
    fn hits_per_sector_constant_over_n() {
        let gen = GenConfig {
            seed: 21,
            ..GenConfig::default()
        };
        let cfg = BenchConfig {
            methods: vec![Method::DualPolar],
            queries: 400,
            ..small_cfg()
        };
        let rows = sweep(SweepAxis::N, &[1000.0, 10_000.0, 100_000.0], &gen, &cfg).unwrap();
        let ratios: Vec<f64> = rows.iter().map(|r| r.avg_hits / r.n as f64).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        for r in &ratios {
            assert!((r / mean - 1.0).abs() <= 0.25, "{ratios:?}");
        }
    }

    fn row(method: Method, v: f64, t: f64) -> BenchReport {
        BenchReport {
            method,
            sweep_value: Some(v),
            n: 0,
            radius: v,
            queries: 1,
            build_time_ms: None,
            avg_search_time_ms: t,
            avg_candidates: 0.0,
            avg_hits: 0.0,
            avg_node_visits: 0.0,
            coverage_sum: None,
            coverage_union: None,
            overlap_sum: None,
            overlap_union: None,
            tree_height: None,
            tree_nodes: None,
        }
    }

    #[test]
    fn crossover_detection() {
        let rows = vec![
            row(Method::Regular, 10.0, 1.0),
            row(Method::DualPolar, 10.0, 2.0),
            row(Method::Regular, 100.0, 3.0),
            row(Method::DualPolar, 100.0, 2.0),
            row(Method::Regular, 1000.0, 5.0),
            row(Method::DualPolar, 1000.0, 2.0),
        ];
        assert_eq!(
            crossover(&rows, Method::Regular, Method::DualPolar),
            Some(100.0)
        );
        let mut flipped = rows.clone();
        flipped[5].avg_search_time_ms = 9.0;
        assert_eq!(
            crossover(&flipped, Method::Regular, Method::DualPolar),
            None
        );
    }
}
