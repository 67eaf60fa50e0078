//! Admissible rooted trees with prescribed growth at the root.
//!
//! The tree has a single infinite path (the trunk). Levels listed in a
//! [`LevelSet`] give the trunk a single child; everywhere else children are
//! handed out greedily, two at a time, in level order, until the level
//! budget `c(n+1) = v(n+1) - v(n)` is used up.

use std::collections::BTreeMap;

use num_rational::Ratio;
use thiserror::Error;

use crate::growth::{CanonicalGrowthFunction, GrowthFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("level budget cannot be met when attaching level {}", .0 + 1)]
    InfeasibleLevel(usize),
    #[error("level {level} lies outside 1..={horizon}")]
    LevelOutOfRange { level: usize, horizon: usize },
    #[error("the table must start at v(0) = 1, got {0}")]
    InvalidRoot(u64),
    #[error("interval {index} has zero length")]
    EmptyInterval { index: usize },
    #[error("interval {index} starting at {start} overlaps or touches the previous one")]
    Overlap { index: usize, start: usize },
}

/// The thin trunk levels `S = ⋃ [n_j, n_j + t_j - 1]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelSet {
    intervals: Vec<(usize, usize)>,
}

impl LevelSet {
    /// Intervals as `(n_j, t_j)`; requires `t_j ≥ 1` and `n_{j+1} > n_j + t_j`.
    pub fn new(intervals: Vec<(usize, usize)>) -> Result<Self, TreeError> {
        for (index, &(start, len)) in intervals.iter().enumerate() {
            if len == 0 {
                return Err(TreeError::EmptyInterval { index });
            }
            if index > 0 {
                let (prev_start, prev_len) = intervals[index - 1];
                if start <= prev_start + prev_len {
                    return Err(TreeError::Overlap { index, start });
                }
            }
        }
        Ok(Self { intervals })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// The interval index containing `level`.
    pub fn interval_of(&self, level: usize) -> Option<usize> {
        let idx = self.intervals.partition_point(|&(start, _)| start <= level);
        if idx == 0 {
            return None;
        }
        let (start, len) = self.intervals[idx - 1];
        (level < start + len).then_some(idx - 1)
    }

    pub fn contains(&self, level: usize) -> bool {
        self.interval_of(level).is_some()
    }

    pub fn levels(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals.iter().flat_map(|&(s, t)| s..s + t)
    }

    pub fn max_level(&self) -> Option<usize> {
        self.intervals.last().map(|&(s, t)| s + t - 1)
    }

    /// Indices `j` with `n_j + t_j + 1 = n_{j+1}`.
    ///
    /// Such schedules are legal but leave a single sphere level between two
    /// blocks; callers may want to flag them.
    pub fn adjacency_warnings(&self) -> Vec<usize> {
        self.intervals.windows(2).enumerate().filter(|(_, w)| w[0].0 + w[0].1 + 1 == w[1].0).map(|(j, _)| j).collect()
    }

    /// `|S ∩ {0, …, k}|`.
    pub fn count_upto(&self, k: usize) -> usize {
        self.intervals.iter().take_while(|&&(s, _)| s <= k).map(|&(s, t)| (s + t - 1).min(k) - s + 1).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub id: usize,
    pub level: usize,
    /// Position within the level; the trunk vertex always has order 0.
    pub order: usize,
    pub parent: Option<usize>,
    pub trunk: bool,
}

/// A finite-horizon admissible tree. Vertices are stored level by level in
/// order, so `id` is also the breadth-first index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    vertices: Vec<Vertex>,
    children: Vec<Vec<usize>>,
    level_start: Vec<usize>,
}

impl RootedTree {
    pub fn horizon(&self) -> usize {
        self.level_start.len() - 2
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    pub fn level(&self, n: usize) -> &[Vertex] {
        &self.vertices[self.level_start[n]..self.level_start[n + 1]]
    }

    /// The trunk vertex at level `n`.
    pub fn trunk(&self, n: usize) -> usize {
        self.level_start[n]
    }

    /// Vertices at levels `0..=n`: the ball of radius `n` about the root.
    pub fn growth(&self, n: usize) -> u64 {
        self.level_start[n.min(self.horizon()) + 1] as u64
    }

    /// Rebuilds a tree from a vertex table, checking every structural invariant.
    pub fn from_vertices(vertices: Vec<Vertex>) -> Result<Self, String> {
        let mut level_start = vec![0usize];
        let mut children = vec![Vec::new(); vertices.len()];
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(format!("vertex {i} carries id {}", v.id));
            }
            match (v.level, v.parent) {
                (0, None) if i == 0 => {}
                (0, _) | (_, None) => return Err(format!("vertex {i}: bad root structure")),
                (level, Some(p)) => {
                    let pv = vertices.get(p).ok_or(format!("vertex {i}: unknown parent {p}"))?;
                    if pv.level + 1 != level {
                        return Err(format!("vertex {i}: parent {p} not one level below"));
                    }
                    children[p].push(i);
                }
            }
            if v.level == level_start.len() {
                level_start.push(i);
            } else if v.level + 1 != level_start.len() {
                return Err(format!("vertex {i}: levels are not contiguous"));
            }
            let expected_order = i - level_start[v.level];
            if v.order != expected_order {
                return Err(format!("vertex {i}: order {} expected {expected_order}", v.order));
            }
            if v.trunk != (v.order == 0) {
                return Err(format!("vertex {i}: trunk flag must mark exactly order 0"));
            }
            if v.trunk && v.level > 0 && !vertices[v.parent.unwrap()].trunk {
                return Err(format!("vertex {i}: trunk parent is off the trunk"));
            }
        }
        level_start.push(vertices.len());
        if children.iter().any(|c| c.len() > 2) {
            return Err("a vertex has more than two children".into());
        }
        Ok(Self { vertices, children, level_start })
    }
}

/// Builds `T_{S,v}` for a canonical table.
pub fn build_tree(v: &CanonicalGrowthFunction, s: &LevelSet) -> Result<RootedTree, TreeError> {
    build_tree_from_counts(&v.level_counts(), s)
}

/// Same construction on an arbitrary table with `v(0) = 1` (no canonical-form check).
pub fn build_tree_raw(v: &GrowthFunction, s: &LevelSet) -> Result<RootedTree, TreeError> {
    if v.value(0) != 1 {
        return Err(TreeError::InvalidRoot(v.value(0)));
    }
    let mut counts = vec![1];
    counts.extend(v.increments());
    build_tree_from_counts(&counts, s)
}

/// Builds the tree from per-level counts `c(0) = 1, c(1), …, c(N)`.
pub fn build_tree_from_counts(counts: &[u64], s: &LevelSet) -> Result<RootedTree, TreeError> {
    let horizon = counts.len() - 1;
    if counts[0] != 1 {
        return Err(TreeError::InvalidRoot(counts[0]));
    }
    if let Some(level) = s.levels().find(|&l| l == 0 || l > horizon) {
        return Err(TreeError::LevelOutOfRange { level, horizon });
    }

    let total: u64 = counts.iter().sum();
    let mut vertices = Vec::with_capacity(total as usize);
    let mut children = Vec::with_capacity(total as usize);
    let mut level_start = vec![0usize, 1];
    vertices.push(Vertex { id: 0, level: 0, order: 0, parent: None, trunk: true });
    children.push(Vec::new());

    for n in 0..horizon {
        let thin = s.contains(n + 1) as u64;
        let (cur, budget) = (counts[n], counts[n + 1]);
        if budget < 1 || budget + thin > 2 * cur {
            return Err(TreeError::InfeasibleLevel(n));
        }
        let mut remaining = budget;
        let mut order = 0;
        for parent in level_start[n]..level_start[n + 1] {
            let cap = if parent == level_start[n] && thin == 1 { 1 } else { 2 };
            let take = remaining.min(cap);
            for _ in 0..take {
                let id = vertices.len();
                vertices.push(Vertex { id, level: n + 1, order, parent: Some(parent), trunk: order == 0 });
                children.push(Vec::new());
                children[parent].push(id);
                order += 1;
            }
            remaining -= take;
        }
        debug_assert_eq!(remaining, 0);
        level_start.push(vertices.len());
    }

    Ok(RootedTree { vertices, children, level_start })
}

/// `|{vertices at level ≤ n}|`.
pub fn tree_growth(t: &RootedTree, n: usize) -> u64 {
    t.growth(n)
}

/// The sequence `k ↦ |S ∩ {0,…,k}| / k` for `k = 1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityProfile {
    /// `density[k-1]` is the density at `k`.
    pub density: Vec<Ratio<u64>>,
    /// Running minimum of the density, taken from the first level of `S` on.
    /// Before `S` starts it equals the density itself (zero).
    pub running_min: Vec<Ratio<u64>>,
}

impl DensityProfile {
    pub fn at(&self, k: usize) -> Ratio<u64> {
        self.density[k - 1]
    }

    pub fn running_min_at(&self, k: usize) -> Ratio<u64> {
        self.running_min[k - 1]
    }

    /// `true` when the running minimum never increases and ends below `threshold`.
    ///
    /// A finite prefix cannot decide a liminf; this is a diagnostic only.
    pub fn looks_vanishing(&self, threshold: Ratio<u64>) -> bool {
        self.running_min.last().is_some_and(|&m| m < threshold)
    }
}

pub fn lower_density_profile(s: &LevelSet, n: usize) -> DensityProfile {
    let start = s.intervals().first().map(|&(a, _)| a.max(1));
    let mut density = Vec::with_capacity(n);
    let mut running_min = Vec::with_capacity(n);
    let mut current: Option<Ratio<u64>> = None;
    for k in 1..=n {
        let d = Ratio::new(s.count_upto(k) as u64, k as u64);
        density.push(d);
        match start {
            Some(st) if k >= st => {
                let m = current.map_or(d, |c| c.min(d));
                current = Some(m);
                running_min.push(m);
            }
            _ => running_min.push(d),
        }
    }
    DensityProfile { density, running_min }
}

/// Depth of every finite subtree hanging off the trunk, keyed by its root.
pub fn branch_lengths(t: &RootedTree) -> BTreeMap<usize, usize> {
    // heights bottom-up: ids are breadth-first, so children come after parents
    let mut height = vec![0usize; t.len()];
    for id in (0..t.len()).rev() {
        height[id] = t.children(id).iter().map(|&c| height[c] + 1).max().unwrap_or(0);
    }
    t.vertices()
        .iter()
        .filter(|v| !v.trunk && v.parent.is_some_and(|p| t.vertex(p).trunk))
        .map(|v| (v.id, height[v.id]))
        .collect()
}
