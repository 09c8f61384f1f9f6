//! Dual R-trees over angular sectors.
//!
//! Each sector's dual piece (a sinusoid arc in polar space, a segment in
//! one of the two affine spaces) is bounded by rectangles that go into an
//! R-tree with the sector's id as payload. A point query converts the point
//! to its dual curve, collects every sector whose rectangle the curve
//! meets, and then keeps the sectors that really contain the point. The
//! tree works at bi-sector level, so the refinement step is what removes
//! the mirrored half of each sector.

use serde::Serialize;

use crate::dual::{
    affine_dual_point, affine_sector_choice, dual_plane_line, polar_dual_line, polar_dual_point,
    polar_sector_footprint, AffineSpace,
};
use crate::error::{Error, Result};
use crate::geometry::{AngularSector, NormalLine, Orientation, Point, Rect};
use crate::rtree::{RTree, DEFAULT_BRANCHING};

/// Position of a sector in an index's arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SectorId(pub u32);

impl SectorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How an index fills its trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Loading {
    /// One insertion per rectangle.
    #[default]
    Insert,
    /// Sort-tile-recursive packing.
    Bulk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub branching: usize,
    pub loading: Loading,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            branching: DEFAULT_BRANCHING,
            loading: Loading::Insert,
        }
    }
}

pub(crate) fn build_tree(
    entries: Vec<(Rect, SectorId)>,
    opts: BuildOptions,
) -> Result<RTree<SectorId>> {
    match opts.loading {
        Loading::Bulk => RTree::bulk_load(opts.branching, entries),
        Loading::Insert => {
            let mut tree = RTree::new(opts.branching)?;
            for (r, id) in entries {
                tree.insert(r, id);
            }
            Ok(tree)
        }
    }
}

pub(crate) fn sector_ids(n: usize) -> Result<impl Iterator<Item = SectorId>> {
    if n > u32::MAX as usize {
        return Err(Error::InvalidConfig(format!(
            "{n} sectors exceed the id space"
        )));
    }
    Ok((0..n as u32).map(SectorId))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    /// Tree survivors, one per matching rectangle (a wrapped sector can
    /// appear twice).
    pub candidates: Vec<SectorId>,
    /// Exact answer, sorted and unique.
    pub hits: Vec<SectorId>,
    pub node_visits: usize,
}

impl QueryResult {
    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }
}

/// Keeps the candidates whose mono sector contains `p`, sorted by id and
/// without duplicates.
pub fn post_filter(sectors: &[AngularSector], candidates: &[SectorId], p: Point) -> Vec<SectorId> {
    let mut hits: Vec<SectorId> = candidates
        .iter()
        .copied()
        .filter(|id| sectors[id.index()].contains(p))
        .collect();
    hits.sort_unstable();
    hits.dedup();
    hits
}

/// Keeps the candidates whose apex lies on `l` with `l` inside their span
/// of directions.
pub fn post_filter_line(
    sectors: &[AngularSector],
    candidates: &[SectorId],
    l: &NormalLine,
) -> Vec<SectorId> {
    let mut hits: Vec<SectorId> = candidates
        .iter()
        .copied()
        .filter(|id| sectors[id.index()].contains_line(l))
        .collect();
    hits.sort_unstable();
    hits.dedup();
    hits
}

/// Common query surface of every method.
pub trait SectorIndex: Sync {
    fn sectors(&self) -> &[AngularSector];

    /// Sectors containing `p`.
    fn query_point(&self, p: Point) -> QueryResult;

    /// Sectors whose apex lies on `l` with `l` inside their span of
    /// directions.
    fn query_direction(&self, l: &NormalLine) -> QueryResult;
}

/// R-tree over polar footprints.
#[derive(Clone, Debug)]
pub struct PolarDualIndex {
    tree: RTree<SectorId>,
    sectors: Vec<AngularSector>,
}

impl PolarDualIndex {
    pub fn build(sectors: Vec<AngularSector>) -> Result<Self> {
        Self::build_with(sectors, BuildOptions::default())
    }

    pub fn build_with(sectors: Vec<AngularSector>, opts: BuildOptions) -> Result<Self> {
        let mut entries = Vec::with_capacity(sectors.len());
        for (s, id) in sectors.iter().zip(sector_ids(sectors.len())?) {
            for r in polar_sector_footprint(s).rects {
                entries.push((r, id));
            }
        }
        Ok(PolarDualIndex {
            tree: build_tree(entries, opts)?,
            sectors,
        })
    }

    pub fn tree(&self) -> &RTree<SectorId> {
        &self.tree
    }
}

impl SectorIndex for PolarDualIndex {
    fn sectors(&self) -> &[AngularSector] {
        &self.sectors
    }

    fn query_point(&self, p: Point) -> QueryResult {
        let curve = polar_dual_point(p);
        let mut candidates = Vec::new();
        let node_visits = self
            .tree
            .search_into(|r| curve.intersects_rect_unchecked(r), &mut candidates);
        let hits = post_filter(&self.sectors, &candidates, p);
        QueryResult {
            candidates,
            hits,
            node_visits,
        }
    }

    fn query_direction(&self, l: &NormalLine) -> QueryResult {
        let d = polar_dual_line(l).as_point();
        let mut candidates = Vec::new();
        let node_visits = self
            .tree
            .search_into(|r| r.contains_point(d), &mut candidates);
        let hits = post_filter_line(&self.sectors, &candidates, l);
        QueryResult {
            candidates,
            hits,
            node_visits,
        }
    }
}

/// Pair of R-trees over affine dual segments, one per affine space.
#[derive(Clone, Debug)]
pub struct AffineDualIndex {
    tree_h: RTree<SectorId>,
    tree_v: RTree<SectorId>,
    sectors: Vec<AngularSector>,
}

impl AffineDualIndex {
    pub fn build(sectors: Vec<AngularSector>) -> Result<Self> {
        Self::build_with(sectors, BuildOptions::default())
    }

    /// Routes each sector's shorter dual segment to its tree. A sector too
    /// wide for either space (its lines run through both the horizontal and
    /// the vertical direction) is cut along its bisector first, and each
    /// half is routed on its own.
    pub fn build_with(sectors: Vec<AngularSector>, opts: BuildOptions) -> Result<Self> {
        let mut h = Vec::new();
        let mut v = Vec::new();
        for (s, id) in sectors.iter().zip(sector_ids(sectors.len())?) {
            let choices = match affine_sector_choice(s) {
                Ok(c) => vec![c],
                Err(Error::NoAffineSegment) => {
                    let (a, b) = s.halves();
                    vec![affine_sector_choice(&a)?, affine_sector_choice(&b)?]
                }
                Err(e) => return Err(e),
            };
            for c in choices {
                match c.space {
                    AffineSpace::H => h.push((c.rect, id)),
                    AffineSpace::V => v.push((c.rect, id)),
                }
            }
        }
        Ok(AffineDualIndex {
            tree_h: build_tree(h, opts)?,
            tree_v: build_tree(v, opts)?,
            sectors,
        })
    }

    pub fn tree(&self, space: AffineSpace) -> &RTree<SectorId> {
        match space {
            AffineSpace::H => &self.tree_h,
            AffineSpace::V => &self.tree_v,
        }
    }
}

impl SectorIndex for AffineDualIndex {
    fn sectors(&self) -> &[AngularSector] {
        &self.sectors
    }

    fn query_point(&self, p: Point) -> QueryResult {
        let line_h = dual_plane_line(&affine_dual_point(p, AffineSpace::H));
        let line_v = dual_plane_line(&affine_dual_point(p, AffineSpace::V));
        let mut candidates = Vec::new();
        let mut node_visits = self
            .tree_h
            .search_into(|r| r.intersects_line(&line_h), &mut candidates);
        node_visits += self
            .tree_v
            .search_into(|r| r.intersects_line(&line_v), &mut candidates);
        let hits = post_filter(&self.sectors, &candidates, p);
        QueryResult {
            candidates,
            hits,
            node_visits,
        }
    }

    fn query_direction(&self, l: &NormalLine) -> QueryResult {
        let mut candidates = Vec::new();
        let mut node_visits = 0;
        if let Some(s) = l.to_slope_line(Orientation::YOfX) {
            let d = crate::dual::affine_dual_line(&s).as_point();
            node_visits += self
                .tree_h
                .search_into(|r| r.contains_point(d), &mut candidates);
        }
        if let Some(s) = l.to_slope_line(Orientation::XOfY) {
            let d = crate::dual::affine_dual_line(&s).as_point();
            node_visits += self
                .tree_v
                .search_into(|r| r.contains_point(d), &mut candidates);
        }
        let hits = post_filter_line(&self.sectors, &candidates, l);
        QueryResult {
            candidates,
            hits,
            node_visits,
        }
    }
}
