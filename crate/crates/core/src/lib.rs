//! Point and direction queries over angular sectors, indexed through dual
//! transforms in an R-tree.
//!
//! An angular sector is the unbounded wedge between two rays from a common
//! apex. Indexing such wedges directly needs a bounding box of unbounded
//! size; mapping each sector to its dual (a short curve or segment whose
//! points are the lines through the apex inside the sector) keeps the
//! rectangles small.
//!
//! ```
//! use dual_rtree::{AngularSector, Point, PolarDualIndex, SectorIndex};
//!
//! let s = AngularSector::from_pose(Point::new(0.0, 0.0), 0.0, 0.5).unwrap();
//! let index = PolarDualIndex::build(vec![s]).unwrap();
//! assert_eq!(index.query_point(Point::new(10.0, 1.0)).hits.len(), 1);
//! assert!(index.query_point(Point::new(-10.0, 1.0)).hits.is_empty());
//! ```

pub mod baselines;
pub mod dual;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod index;
pub mod rtree;

pub use baselines::{exhaustive_query, LinearScan, RegularIndex, DEFAULT_TRUNCATION_RADIUS};
pub use error::{Error, Result};
pub use geometry::{AngularSector, NormalLine, Point, Rect};
pub use index::{
    AffineDualIndex, BuildOptions, Loading, PolarDualIndex, QueryResult, SectorId, SectorIndex,
};
pub use rtree::{AreaVariant, RTree, TreeStats, DEFAULT_BRANCHING};
