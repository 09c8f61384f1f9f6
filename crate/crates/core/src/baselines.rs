//! Comparison methods: a linear scan over the sectors, and a regular
//! R-tree over the bounding boxes of sectors cut at a finite radius.

use crate::error::{Error, Result};
use crate::geometry::{eps_geom, AngularSector, NormalLine, Point, Rect};
use crate::index::{
    build_tree, post_filter, post_filter_line, sector_ids, BuildOptions, QueryResult, SectorId,
    SectorIndex,
};
use crate::rtree::RTree;

/// Truncation radius standing in for "infinitely long", in meters.
pub const DEFAULT_TRUNCATION_RADIUS: f64 = 1e8;

/// Ids of all sectors containing `p`, by linear scan.
pub fn exhaustive_query(sectors: &[AngularSector], p: Point) -> Vec<SectorId> {
    sectors
        .iter()
        .enumerate()
        .filter(|(_, s)| s.contains(p))
        .map(|(i, _)| SectorId(i as u32))
        .collect()
}

#[derive(Clone, Debug)]
pub struct LinearScan {
    sectors: Vec<AngularSector>,
}

impl LinearScan {
    pub fn new(sectors: Vec<AngularSector>) -> Result<Self> {
        let _ = sector_ids(sectors.len())?;
        Ok(LinearScan { sectors })
    }
}

impl SectorIndex for LinearScan {
    fn sectors(&self) -> &[AngularSector] {
        &self.sectors
    }

    /// Candidates are left empty: every sector is examined.
    fn query_point(&self, p: Point) -> QueryResult {
        QueryResult {
            candidates: Vec::new(),
            hits: exhaustive_query(&self.sectors, p),
            node_visits: 0,
        }
    }

    fn query_direction(&self, l: &NormalLine) -> QueryResult {
        QueryResult {
            candidates: Vec::new(),
            hits: self
                .sectors
                .iter()
                .enumerate()
                .filter(|(_, s)| s.contains_line(l))
                .map(|(i, _)| SectorId(i as u32))
                .collect(),
            node_visits: 0,
        }
    }
}

/// R-tree over the bounding boxes of the sectors truncated at `radius`.
#[derive(Clone, Debug)]
pub struct RegularIndex {
    tree: RTree<SectorId>,
    sectors: Vec<AngularSector>,
    radius: f64,
}

/// Bounding box of the truncated sector, padded by the sector tolerance so
/// that points on an axis-aligned edge are kept.
pub fn truncated_mbr(s: &AngularSector, radius: f64) -> Rect {
    let mbr = Rect::bounding(s.truncated_polygon(radius)).expect("polygon has vertices");
    let pad = 2.0 * s.eps().max(eps_geom(radius));
    mbr.padded(pad, pad)
}

impl RegularIndex {
    pub fn build(sectors: Vec<AngularSector>, radius: f64) -> Result<Self> {
        Self::build_with(sectors, radius, BuildOptions::default())
    }

    pub fn build_with(
        sectors: Vec<AngularSector>,
        radius: f64,
        opts: BuildOptions,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        let entries = sectors
            .iter()
            .zip(sector_ids(sectors.len())?)
            .map(|(s, id)| (truncated_mbr(s, radius), id))
            .collect();
        Ok(RegularIndex {
            tree: build_tree(entries, opts)?,
            sectors,
            radius,
        })
    }

    pub fn tree(&self) -> &RTree<SectorId> {
        &self.tree
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl SectorIndex for RegularIndex {
    fn sectors(&self) -> &[AngularSector] {
        &self.sectors
    }

    /// Candidates are the boxes containing `p`; hits are refined with the
    /// sector itself rather than the polygon.
    fn query_point(&self, p: Point) -> QueryResult {
        let mut candidates = Vec::new();
        let node_visits = self
            .tree
            .search_into(|r| r.contains_point(p), &mut candidates);
        let hits = post_filter(&self.sectors, &candidates, p);
        QueryResult {
            candidates,
            hits,
            node_visits,
        }
    }

    fn query_direction(&self, l: &NormalLine) -> QueryResult {
        let mut candidates = Vec::new();
        let node_visits = self
            .tree
            .search_into(|r| r.intersects_line(l), &mut candidates);
        let hits = post_filter_line(&self.sectors, &candidates, l);
        QueryResult {
            candidates,
            hits,
            node_visits,
        }
    }
}
