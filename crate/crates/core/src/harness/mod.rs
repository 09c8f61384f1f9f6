//! Data generation, sector files, benchmarks and cross-method verification.

pub mod generate;
pub mod io;
pub mod runner;
pub mod verify;

pub use generate::{generate, load_angle_table, AngleBin, AngleDistribution, GenConfig};
pub use io::{load_sectors, read_sectors, save_sectors, to_sectors, write_sectors, SectorRecord};
pub use runner::{
    crossover, default_query_region, random_points, run_bench, sweep, write_reports_csv,
    write_reports_json, BenchConfig, BenchReport, BuiltIndex, IndexStats, Method, SweepAxis,
};
pub use verify::{verify, Discrepancy, VerifyConfig, VerifyReport};
