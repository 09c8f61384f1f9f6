//! A 2D R-tree over rectangle keys with opaque payloads.
//!
//! Nodes live in an arena and refer to each other by index. Insertion
//! follows the classic scheme: descend by least enlargement, append to the
//! leaf, split overflowing nodes with the quadratic algorithm and propagate
//! bounding rectangles back to the root. [`RTree::bulk_load`] packs a static
//! set with sort-tile-recursive instead.
//!
//! Search is breadth-first and driven by an arbitrary rectangle predicate.
//! The predicate must be monotone with respect to containment (if a child
//! rectangle passes, so does its parent's), otherwise results are
//! incomplete.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    area_covered_at_least, pairwise_intersection_area, rect_area_sum, rect_union_area, Rect,
};

/// Branching factor used throughout the benchmarks.
pub const DEFAULT_BRANCHING: usize = 7;

#[derive(Clone, Debug)]
enum Content<T> {
    Leaf(Vec<(Rect, T)>),
    Internal(Vec<usize>),
}

#[derive(Clone, Debug)]
struct Node<T> {
    mbr: Rect,
    /// 0 for leaves.
    level: usize,
    content: Content<T>,
}

impl<T> Node<T> {
    fn len(&self) -> usize {
        match &self.content {
            Content::Leaf(e) => e.len(),
            Content::Internal(c) => c.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RTree<T> {
    max_entries: usize,
    min_entries: usize,
    nodes: Vec<Node<T>>,
    root: usize,
    height: usize,
    len: usize,
}

/// How [`TreeStats`] measures the area taken by a node's children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaVariant {
    /// Areas are added; overlaps count several times.
    Sum,
    /// Exact union; overlap is the area covered at least twice.
    Union,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TreeStats {
    pub variant: AreaVariant,
    pub mean_coverage: f64,
    pub mean_overlap: f64,
    pub node_count: usize,
    /// Nodes with a non-degenerate rectangle, over which the means are taken.
    pub measured_nodes: usize,
    pub height: usize,
}

impl<T: Copy> RTree<T> {
    pub fn new(branching: usize) -> Result<Self> {
        if branching < 2 {
            return Err(Error::InvalidConfig(format!(
                "branching factor must be at least 2, got {branching}"
            )));
        }
        Ok(RTree {
            max_entries: branching,
            min_entries: branching.div_ceil(2),
            nodes: Vec::new(),
            root: 0,
            height: 0,
            len: 0,
        })
    }

    pub fn branching(&self) -> usize {
        self.max_entries
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of levels; 0 for an empty tree.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Bounding rectangle of everything stored.
    pub fn bounds(&self) -> Option<Rect> {
        (self.height > 0).then(|| self.nodes[self.root].mbr)
    }

    pub fn insert(&mut self, rect: Rect, payload: T) {
        debug_assert!(rect.is_valid());
        self.len += 1;
        if self.height == 0 {
            self.nodes.push(Node {
                mbr: rect,
                level: 0,
                content: Content::Leaf(vec![(rect, payload)]),
            });
            self.root = self.nodes.len() - 1;
            self.height = 1;
            return;
        }

        let mut path = Vec::with_capacity(self.height);
        let mut idx = self.root;
        loop {
            path.push(idx);
            match &self.nodes[idx].content {
                Content::Leaf(_) => break,
                Content::Internal(children) => idx = self.choose_subtree(children, &rect),
            }
        }

        if let Content::Leaf(entries) = &mut self.nodes[idx].content {
            entries.push((rect, payload));
        }

        // walk back up, splitting and refreshing bounding rectangles
        let mut sibling: Option<usize> = None;
        for &node in path.iter().rev() {
            if let Some(s) = sibling.take() {
                if let Content::Internal(children) = &mut self.nodes[node].content {
                    children.push(s);
                }
            }
            if self.nodes[node].len() > self.max_entries {
                sibling = Some(self.split(node));
            }
            self.refresh_mbr(node);
        }

        if let Some(s) = sibling {
            let old_root = self.root;
            let level = self.nodes[old_root].level + 1;
            let mbr = self.nodes[old_root].mbr.union(&self.nodes[s].mbr);
            self.nodes.push(Node {
                mbr,
                level,
                content: Content::Internal(vec![old_root, s]),
            });
            self.root = self.nodes.len() - 1;
            self.height += 1;
        }
    }

    fn choose_subtree(&self, children: &[usize], rect: &Rect) -> usize {
        let mut best = children[0];
        let mut best_key = (f64::INFINITY, f64::INFINITY);
        for &c in children {
            let mbr = &self.nodes[c].mbr;
            let key = (mbr.enlargement(rect), mbr.area());
            if key.0 < best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
                best = c;
                best_key = key;
            }
        }
        best
    }

    fn child_rects(&self, node: usize) -> Vec<Rect> {
        match &self.nodes[node].content {
            Content::Leaf(e) => e.iter().map(|(r, _)| *r).collect(),
            Content::Internal(c) => c.iter().map(|&i| self.nodes[i].mbr).collect(),
        }
    }

    fn refresh_mbr(&mut self, node: usize) {
        let rects = self.child_rects(node);
        if let Some(mbr) = rects.iter().copied().reduce(|a, b| a.union(&b)) {
            self.nodes[node].mbr = mbr;
        }
    }

    /// Splits an overflowing node in place and returns the new sibling.
    fn split(&mut self, node: usize) -> usize {
        let rects = self.child_rects(node);
        let (_, second) = quadratic_split(&rects, self.min_entries);
        let mut take = vec![false; rects.len()];
        for &i in &second {
            take[i] = true;
        }
        let level = self.nodes[node].level;
        let content = match &mut self.nodes[node].content {
            Content::Leaf(entries) => {
                let all = std::mem::take(entries);
                let (moved, kept): (Vec<_>, Vec<_>) =
                    all.into_iter().enumerate().partition(|(i, _)| take[*i]);
                *entries = kept.into_iter().map(|(_, e)| e).collect();
                Content::Leaf(moved.into_iter().map(|(_, e)| e).collect())
            }
            Content::Internal(children) => {
                let all = std::mem::take(children);
                let (moved, kept): (Vec<_>, Vec<_>) =
                    all.into_iter().enumerate().partition(|(i, _)| take[*i]);
                *children = kept.into_iter().map(|(_, c)| c).collect();
                Content::Internal(moved.into_iter().map(|(_, c)| c).collect())
            }
        };
        self.nodes.push(Node {
            mbr: rects[second[0]],
            level,
            content,
        });
        let id = self.nodes.len() - 1;
        self.refresh_mbr(id);
        id
    }

    /// Sort-tile-recursive packing of a static entry set.
    pub fn bulk_load(branching: usize, entries: Vec<(Rect, T)>) -> Result<Self> {
        let mut tree = RTree::new(branching)?;
        if entries.is_empty() {
            return Ok(tree);
        }
        tree.len = entries.len();
        let b = tree.max_entries;

        let mut level_nodes: Vec<usize> = Vec::new();
        for group in str_groups(entries, b, |(r, _)| r.center()) {
            let mbr = group
                .iter()
                .map(|(r, _)| *r)
                .reduce(|a, c| a.union(&c))
                .expect("non-empty group");
            tree.nodes.push(Node {
                mbr,
                level: 0,
                content: Content::Leaf(group),
            });
            level_nodes.push(tree.nodes.len() - 1);
        }
        let mut level = 0;
        while level_nodes.len() > 1 {
            level += 1;
            let keyed: Vec<(Rect, usize)> = level_nodes
                .iter()
                .map(|&i| (tree.nodes[i].mbr, i))
                .collect();
            level_nodes.clear();
            for group in str_groups(keyed, b, |(r, _)| r.center()) {
                let mbr = group
                    .iter()
                    .map(|(r, _)| *r)
                    .reduce(|a, c| a.union(&c))
                    .expect("non-empty group");
                tree.nodes.push(Node {
                    mbr,
                    level,
                    content: Content::Internal(group.into_iter().map(|(_, i)| i).collect()),
                });
                level_nodes.push(tree.nodes.len() - 1);
            }
        }
        tree.root = level_nodes[0];
        tree.height = level + 1;
        Ok(tree)
    }

    /// Payloads of all entries whose rectangle satisfies `pred`.
    pub fn search<F: Fn(&Rect) -> bool>(&self, pred: F) -> Vec<T> {
        let mut out = Vec::new();
        self.search_into(pred, &mut out);
        out
    }

    /// Breadth-first search appending matches to `out`; returns the number
    /// of nodes visited. Nodes whose rectangle fails `pred` are pruned
    /// together with their subtree.
    pub fn search_into<F: Fn(&Rect) -> bool>(&self, pred: F, out: &mut Vec<T>) -> usize {
        if self.height == 0 {
            return 0;
        }
        let mut visits = 0;
        let mut queue = VecDeque::with_capacity(64);
        queue.push_back(self.root);
        while let Some(i) = queue.pop_front() {
            visits += 1;
            let node = &self.nodes[i];
            if !pred(&node.mbr) {
                continue;
            }
            match &node.content {
                Content::Leaf(entries) => {
                    out.extend(entries.iter().filter(|(r, _)| pred(r)).map(|(_, t)| *t));
                }
                Content::Internal(children) => queue.extend(children.iter().copied()),
            }
        }
        visits
    }

    /// All entries, in storage order.
    pub fn entries(&self) -> Vec<(Rect, T)> {
        let mut out = Vec::with_capacity(self.len);
        for n in &self.nodes {
            if let Content::Leaf(e) = &n.content {
                out.extend(e.iter().copied());
            }
        }
        out
    }

    /// Per-node coverage and overlap averaged over all nodes whose
    /// rectangle has positive area. A node's children are its child nodes,
    /// or its entries for a leaf.
    pub fn stats(&self, variant: AreaVariant) -> Result<TreeStats> {
        if self.is_empty() {
            return Err(Error::EmptyTree);
        }
        let mut coverage = 0.0;
        let mut overlap = 0.0;
        let mut measured = 0usize;
        for i in 0..self.nodes.len() {
            let area = self.nodes[i].mbr.area();
            if area.is_nan() || area <= 0.0 {
                continue;
            }
            let rects = self.child_rects(i);
            let (c, o) = match variant {
                AreaVariant::Sum => (rect_area_sum(&rects), pairwise_intersection_area(&rects)),
                AreaVariant::Union => (rect_union_area(&rects), area_covered_at_least(&rects, 2)),
            };
            coverage += c / area;
            overlap += o / area;
            measured += 1;
        }
        let n = measured.max(1) as f64;
        Ok(TreeStats {
            variant,
            mean_coverage: coverage / n,
            mean_overlap: overlap / n,
            node_count: self.nodes.len(),
            measured_nodes: measured,
            height: self.height,
        })
    }

    /// Checks the structural invariants: fan-out, exact bounding rectangles,
    /// uniform leaf depth and entry count.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.height == 0 {
            return if self.nodes.is_empty() && self.len == 0 {
                Ok(())
            } else {
                Err("empty tree with nodes".into())
            };
        }
        let mut count = 0;
        let mut stack = vec![(self.root, self.height - 1)];
        while let Some((i, depth_left)) = stack.pop() {
            let node = &self.nodes[i];
            if node.level != depth_left {
                return Err(format!(
                    "node {i} at level {} expected {depth_left}",
                    node.level
                ));
            }
            let n = node.len();
            if n == 0 || n > self.max_entries {
                return Err(format!("node {i} has {n} children"));
            }
            let rects = self.child_rects(i);
            let mbr = rects.iter().copied().reduce(|a, b| a.union(&b)).unwrap();
            if mbr != node.mbr {
                return Err(format!("node {i} mbr {:?} != children {:?}", node.mbr, mbr));
            }
            match &node.content {
                Content::Leaf(e) => {
                    if depth_left != 0 {
                        return Err(format!("leaf {i} above the bottom level"));
                    }
                    count += e.len();
                }
                Content::Internal(c) => {
                    if depth_left == 0 {
                        return Err(format!("internal node {i} at the bottom level"));
                    }
                    stack.extend(c.iter().map(|&ch| (ch, depth_left - 1)));
                }
            }
        }
        if count != self.len {
            return Err(format!("{count} reachable entries, {} recorded", self.len));
        }
        Ok(())
    }
}

/// Quadratic split: returns the two groups as indices into `rects`, each
/// holding at least `min` items.
pub fn quadratic_split(rects: &[Rect], min: usize) -> (Vec<usize>, Vec<usize>) {
    let n = rects.len();
    debug_assert!(n >= 2 && 2 * min <= n);

    let (mut s1, mut s2, mut worst) = (0, 1, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let waste = rects[i].union(&rects[j]).area() - rects[i].area() - rects[j].area();
            if waste > worst {
                (s1, s2, worst) = (i, j, waste);
            }
        }
    }

    let mut g1 = vec![s1];
    let mut g2 = vec![s2];
    let mut m1 = rects[s1];
    let mut m2 = rects[s2];
    let mut rest: Vec<usize> = (0..n).filter(|&i| i != s1 && i != s2).collect();

    while !rest.is_empty() {
        if g1.len() + rest.len() == min {
            g1.append(&mut rest);
            break;
        }
        if g2.len() + rest.len() == min {
            g2.append(&mut rest);
            break;
        }
        let (pos, _) = rest
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                (
                    pos,
                    (m1.enlargement(&rects[i]) - m2.enlargement(&rects[i])).abs(),
                )
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        let i = rest.remove(pos);
        let d1 = m1.enlargement(&rects[i]);
        let d2 = m2.enlargement(&rects[i]);
        let to_first = if d1 != d2 {
            d1 < d2
        } else if m1.area() != m2.area() {
            m1.area() < m2.area()
        } else {
            g1.len() <= g2.len()
        };
        if to_first {
            g1.push(i);
            m1 = m1.union(&rects[i]);
        } else {
            g2.push(i);
            m2 = m2.union(&rects[i]);
        }
    }
    (g1, g2)
}

/// Sort-tile-recursive grouping into runs of at most `b` items.
fn str_groups<E, F>(mut items: Vec<E>, b: usize, center: F) -> Vec<Vec<E>>
where
    F: Fn(&E) -> crate::geometry::Point,
{
    let n = items.len();
    let pages = n.div_ceil(b);
    let slices = (pages as f64).sqrt().ceil() as usize;
    let slice_len = b * pages.div_ceil(slices);

    items.sort_by(|a, c| center(a).x.total_cmp(&center(c).x));
    let mut groups = Vec::with_capacity(pages);
    let mut rest = items;
    while !rest.is_empty() {
        let tail = rest.split_off(slice_len.min(rest.len()));
        let mut slice = rest;
        rest = tail;
        slice.sort_by(|a, c| center(a).y.total_cmp(&center(c).y));
        while !slice.is_empty() {
            let tail = slice.split_off(b.min(slice.len()));
            groups.push(slice);
            slice = tail;
        }
    }
    groups
}
