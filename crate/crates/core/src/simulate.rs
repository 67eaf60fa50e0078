//! Metric-graph discretization of the assembled model, ball volumes `w(α)`
//! about the basepoint, and the sandwich checks between `w`, `r` and `z`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_integer::Integer;
use num_rational::{Ratio, Rational64};
use thiserror::Error;

use crate::assembly::{discrete_growth_table, level_growth, DiscreteGrowth, ManifoldModel};
use crate::growth::{same_growth_type, GrowthClassWitness, GrowthError, GrowthFunction};
use crate::tree::{lower_density_profile, DensityProfile};

/// Where a graph node sits in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeTag {
    pub instance: usize,
    pub unit: usize,
    /// Distance from the unit's `∂⁻` node, in ticks of `1/resolution`.
    pub depth_ticks: u64,
}

/// One edge of length `1/resolution` carrying `density` volume per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub shell_volume: u64,
    /// Number of legs sharing the shell.
    pub legs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    pub resolution: u64,
    pub tags: Vec<NodeTag>,
    pub edges: Vec<Edge>,
    pub basepoint: usize,
    adjacency: Vec<Vec<usize>>,
    /// `lcm` of all leg counts, so `volume_denominator = resolution · lcm`.
    leg_lcm: u64,
}

impl MetricGraph {
    pub fn node_count(&self) -> usize {
        self.tags.len()
    }

    pub fn edge_length(&self) -> Rational64 {
        Rational64::new(1, self.resolution as i64)
    }

    /// Volume per unit length, `v'(k) / legs`.
    pub fn density(&self, e: &Edge) -> Rational64 {
        Rational64::new(e.shell_volume as i64, e.legs as i64)
    }

    pub fn edge_volume(&self, e: &Edge) -> Rational64 {
        self.density(e) * self.edge_length()
    }

    /// Common denominator of all edge volumes.
    pub fn volume_denominator(&self) -> u64 {
        self.resolution * self.leg_lcm
    }

    fn edge_numerator(&self, e: &Edge) -> u64 {
        e.shell_volume * (self.leg_lcm / e.legs)
    }

    pub fn total_volume(&self) -> Ratio<u64> {
        Ratio::new(self.edges.iter().map(|e| self.edge_numerator(e)).sum(), self.volume_denominator())
    }

    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[node].iter().map(move |&e| {
            let edge = &self.edges[e];
            if edge.u == node {
                edge.v
            } else {
                edge.u
            }
        })
    }

    /// Nodes belonging to an instance (its `∂⁻` nodes included only for the root).
    pub fn instance_nodes(&self, instance: usize) -> Vec<usize> {
        (0..self.tags.len()).filter(|&n| self.tags[n].instance == instance).collect()
    }

    pub fn with_basepoint(&self, basepoint: usize) -> Self {
        Self { basepoint, ..self.clone() }
    }
}

/// Each unit becomes a chain of `⌈T_P⌉·resolution` edges from its `∂⁻` node;
/// with two or more outgoing boundaries the chain forks at depth `⌊⌈T_P⌉/2⌋`
/// into one leg per boundary. Shell `k` spreads its volume `v'(k)` over the
/// stem, or evenly over the legs past the fork. Glued boundaries share a node.
pub fn to_metric_graph(model: &ManifoldModel, resolution: u64) -> MetricGraph {
    assert!(resolution >= 1, "resolution must be positive");
    let mut incoming = vec![Vec::new(); model.instances.len()];
    for a in &model.attachments {
        incoming[a.child].push(*a);
    }

    let mut tags: Vec<NodeTag> = Vec::new();
    let mut edges = Vec::new();
    // (instance, unit) → slot end nodes
    let mut slot_ends: Vec<Vec<Vec<usize>>> = Vec::with_capacity(model.instances.len());
    let mut leg_lcm = 1u64;

    let new_node = |tags: &mut Vec<NodeTag>, tag: NodeTag| {
        tags.push(tag);
        tags.len() - 1
    };

    for inst in &model.instances {
        let mut ends = Vec::new();
        for u in 0..model.unit_count(inst) {
            let comp = model.unit(inst, u);
            let legs = model.unit_slots(inst, u).len().max(1) as u64;
            leg_lcm = leg_lcm.lcm(&legs);
            let minus = match incoming[inst.id].iter().find(|a| a.child_unit == u) {
                Some(a) => slot_ends[a.parent][a.parent_unit][a.slot],
                None => new_node(&mut tags, NodeTag { instance: inst.id, unit: u, depth_ticks: 0 }),
            };
            let shells = comp.shells() as u64;
            let derivs: Vec<u64> = comp.derivatives().collect();
            let fork = if legs >= 2 { shells / 2 } else { shells };
            let mut cursor = minus;
            let mut tick = 0;
            for k in 0..fork {
                for _ in 0..resolution {
                    tick += 1;
                    let next = new_node(&mut tags, NodeTag { instance: inst.id, unit: u, depth_ticks: tick });
                    edges.push(Edge { u: cursor, v: next, shell_volume: derivs[k as usize], legs: 1 });
                    cursor = next;
                }
            }
            let mut unit_ends = Vec::new();
            if legs >= 2 {
                let fork_node = cursor;
                for _ in 0..legs {
                    let mut c = fork_node;
                    let mut t = tick;
                    for k in fork..shells {
                        for _ in 0..resolution {
                            t += 1;
                            let next = new_node(&mut tags, NodeTag { instance: inst.id, unit: u, depth_ticks: t });
                            edges.push(Edge { u: c, v: next, shell_volume: derivs[k as usize], legs });
                            c = next;
                        }
                    }
                    unit_ends.push(c);
                }
            } else {
                unit_ends.push(cursor);
            }
            ends.push(unit_ends);
        }
        slot_ends.push(ends);
    }

    let mut adjacency = vec![Vec::new(); tags.len()];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.u].push(i);
        adjacency[e.v].push(i);
    }
    MetricGraph { resolution, tags, edges, basepoint: 0, adjacency, leg_lcm }
}

/// Single-source distances in ticks; unreachable nodes get `u64::MAX`.
pub fn distances(g: &MetricGraph, source: usize) -> Vec<u64> {
    let mut dist = vec![u64::MAX; g.node_count()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0;
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for y in g.neighbours(x) {
            let nd = d + 1;
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse((nd, y)));
            }
        }
    }
    dist
}

/// `vol B(o, α)`: each edge contributes the part of its length within `α`
/// of `o`, times its density.
pub fn ball_volume(g: &MetricGraph, dist: &[u64], alpha: Rational64) -> Rational64 {
    let zero = Rational64::from_integer(0);
    if alpha <= zero {
        return zero;
    }
    let a = alpha * Rational64::from_integer(g.resolution as i64);
    let one = Rational64::from_integer(1);
    g.edges
        .iter()
        .filter(|e| dist[e.u] != u64::MAX)
        .map(|e| {
            let du = Rational64::from_integer(dist[e.u] as i64);
            let dv = Rational64::from_integer(dist[e.v] as i64);
            let covered = ((a - du).max(zero) + (a - dv).max(zero)).min(one);
            g.density(e) * covered / Rational64::from_integer(g.resolution as i64)
        })
        .sum()
}

/// `w(α)` for integer `α = 0..=alpha_max`, as numerators over a common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallVolumeTable {
    pub numerators: Vec<u64>,
    pub denominator: u64,
    /// Distance from the basepoint, in ticks.
    pub dist: Vec<u64>,
}

impl BallVolumeTable {
    pub fn at(&self, alpha: usize) -> Ratio<u64> {
        Ratio::new(self.numerators[alpha.min(self.numerators.len() - 1)], self.denominator)
    }

    pub fn ceil_at(&self, alpha: usize) -> u64 {
        self.numerators[alpha.min(self.numerators.len() - 1)].div_ceil(self.denominator)
    }

    pub fn horizon(&self) -> usize {
        self.numerators.len() - 1
    }

    /// `α ↦ ⌈w(α)⌉` as a growth table.
    pub fn ceiled(&self) -> GrowthFunction {
        GrowthFunction::new((0..=self.horizon()).map(|a| self.ceil_at(a)).collect()).expect("w is non-decreasing")
    }
}

/// Every edge has length one tick, so for integer `α` an edge lies in the
/// ball exactly when its nearer end is closer than `α`.
pub fn ball_volume_table(g: &MetricGraph, alpha_max: usize) -> BallVolumeTable {
    let dist = distances(g, g.basepoint);
    let res = g.resolution;
    let mut hist = vec![0u64; alpha_max + 2];
    for e in &g.edges {
        let near = dist[e.u].min(dist[e.v]);
        if near == u64::MAX {
            continue;
        }
        // smallest integer α with α·res > near
        let alpha = (near / res + 1) as usize;
        if alpha <= alpha_max {
            hist[alpha] += g.edge_numerator(e);
        }
    }
    let mut acc = 0;
    let numerators = hist[..=alpha_max]
        .iter()
        .map(|h| {
            acc += h;
            acc
        })
        .collect();
    BallVolumeTable { numerators, denominator: g.volume_denominator(), dist }
}

/// `r` at a graph node.
pub fn node_radius(model: &ManifoldModel, g: &MetricGraph, node: usize) -> u64 {
    let tag = g.tags[node];
    model.instances[tag.instance].base + tag.depth_ticks / g.resolution
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandwichViolation {
    pub alpha: usize,
    pub z: u64,
    pub w: Ratio<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointViolation {
    pub node: usize,
    pub distance: Ratio<u64>,
    pub radius: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandwichReport {
    pub alpha_max: usize,
    pub epsilon_shell: u64,
    /// `z(⌊α/3⌋) > w(α) + ε`.
    pub lower: Vec<SandwichViolation>,
    /// `w(α) > z(3α) + ε`.
    pub upper: Vec<SandwichViolation>,
    /// Smallest `w(α) / z(⌊α/3⌋)` and where it occurs.
    pub tightest_lower: Option<(usize, Ratio<u64>)>,
    pub c0: u64,
    pub sample_size: usize,
    pub point: Vec<PointViolation>,
    pub triangle: Vec<(usize, usize)>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.lower.is_empty() && self.upper.is_empty() && self.point.is_empty() && self.triangle.is_empty()
    }
}

impl fmt::Display for SandwichReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alpha_max={}", self.alpha_max)?;
        writeln!(f, "epsilon_shell={}", self.epsilon_shell)?;
        writeln!(f, "lower_violations={}", self.lower.len())?;
        writeln!(f, "upper_violations={}", self.upper.len())?;
        if let Some((alpha, ratio)) = self.tightest_lower {
            writeln!(f, "tightest_lower_alpha={alpha}")?;
            writeln!(f, "tightest_lower_ratio={ratio}")?;
        }
        writeln!(f, "c0={}", self.c0)?;
        writeln!(f, "sample_size={}", self.sample_size)?;
        writeln!(f, "point_violations={}", self.point.len())?;
        writeln!(f, "triangle_violations={}", self.triangle.len())?;
        for v in self.lower.iter().take(10) {
            writeln!(f, "lower alpha={} z={} w={}", v.alpha, v.z, v.w)?;
        }
        for v in self.upper.iter().take(10) {
            writeln!(f, "upper alpha={} z={} w={}", v.alpha, v.z, v.w)?;
        }
        for v in self.point.iter().take(10) {
            writeln!(f, "point node={} d={} r={}", v.node, v.distance, v.radius)?;
        }
        Ok(())
    }
}

/// `count` node ids spread evenly over the graph.
pub fn sample_nodes(g: &MetricGraph, count: usize) -> Vec<usize> {
    let n = g.node_count();
    if n <= count {
        return (0..n).collect();
    }
    let mut out: Vec<usize> = (0..count).map(|i| i * (n - 1) / (count - 1)).collect();
    out.dedup();
    out
}

/// Checks `z(⌊α/3⌋) ≤ w(α) + ε` and `w(α) ≤ z(3α) + ε` for `α = 0..=alpha_max`,
/// with `ε` the largest single shell volume, then
/// `r/3 − c₀ ≤ d(o, x) ≤ 3r + c₀` (`c₀ = l + 1`) on 500 sampled nodes and
/// the triangle inequality between sampled pairs.
pub fn verify_sandwich(model: &ManifoldModel, g: &MetricGraph, alpha_max: usize) -> SandwichReport {
    let z = discrete_growth_table(model);
    let w = ball_volume_table(g, alpha_max);
    sandwich_with(model, g, &z, &w, alpha_max)
}

fn sandwich_with(
    model: &ManifoldModel,
    g: &MetricGraph,
    z: &DiscreteGrowth,
    w: &BallVolumeTable,
    alpha_max: usize,
) -> SandwichReport {
    let eps = model.max_shell_volume();
    let den = w.denominator;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut tightest: Option<(usize, Ratio<u64>)> = None;
    for alpha in 0..=alpha_max.min(w.horizon()) {
        let num = w.numerators[alpha];
        let lo = z.at((alpha / 3) as i64);
        let hi = z.at(3 * alpha as i64);
        if lo * den > num + eps * den {
            lower.push(SandwichViolation { alpha, z: lo, w: w.at(alpha) });
        }
        if num > (hi + eps) * den {
            upper.push(SandwichViolation { alpha, z: hi, w: w.at(alpha) });
        }
        if lo > 0 {
            let ratio = Ratio::new(num, den * lo);
            if tightest.is_none_or(|(_, r)| ratio < r) {
                tightest = Some((alpha, ratio));
            }
        }
    }

    let res = g.resolution;
    let c0 = model.l() + 1;
    let sample = sample_nodes(g, 500);
    let mut point = Vec::new();
    for &x in &sample {
        let d = w.dist[x];
        if d == u64::MAX {
            continue;
        }
        let r = node_radius(model, g, x);
        // d/res ≤ 3r + c0  and  d/res ≥ r/3 − c0
        let too_far = d > (3 * r + c0) * res;
        let too_near = 3 * d + 3 * c0 * res < r * res;
        if too_far || too_near {
            point.push(PointViolation { node: x, distance: Ratio::new(d, res), radius: r });
        }
    }

    let mut triangle = Vec::new();
    let sources: Vec<usize> = sample.iter().step_by((sample.len() / 8).max(1)).copied().take(8).collect();
    for &x in &sources {
        let dx = distances(g, x);
        for &y in &sample {
            let (a, b) = (w.dist[x], w.dist[y]);
            if a != u64::MAX && b != u64::MAX && a.abs_diff(b) > dx[y] {
                triangle.push((x, y));
            }
        }
    }

    SandwichReport {
        alpha_max,
        epsilon_shell: eps,
        lower,
        upper,
        tightest_lower: tightest,
        c0,
        sample_size: sample.len(),
        point,
        triangle,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    VersusZ,
    ZVersusW,
    Sandwich,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::VersusZ => "(v,z)",
            Self::ZVersusW => "(z,w)",
            Self::Sandwich => "sandwich",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateStatus {
    Valid,
    /// The sandwich range stopped short of one length unit `l`.
    Incomplete,
    Failed(Component),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub status: CertificateStatus,
    pub a1: Option<GrowthClassWitness>,
    pub a2: Option<GrowthClassWitness>,
    pub sandwich: SandwichReport,
    pub density: DensityProfile,
    pub a_max: u64,
    pub resolution: u64,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.status == CertificateStatus::Valid
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match &self.status {
            CertificateStatus::Valid => "VALID".to_string(),
            CertificateStatus::Incomplete => "INCOMPLETE".to_string(),
            CertificateStatus::Failed(c) => format!("FAILED {c}"),
        };
        writeln!(f, "status={status}")?;
        writeln!(f, "a_max={}", self.a_max)?;
        writeln!(f, "resolution={}", self.resolution)?;
        let witness = |w: &Option<GrowthClassWitness>| match w {
            Some(w) => format!("{} checked_range={}", w.a, w.checked_range),
            None => "not-found".to_string(),
        };
        writeln!(f, "A1={}", witness(&self.a1))?;
        writeln!(f, "A2={}", witness(&self.a2))?;
        if let Some(&last) = self.density.running_min.last() {
            writeln!(f, "density_running_min={last}")?;
        }
        write!(f, "{}", self.sandwich)
    }
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("certificate failed at {component}")]
    Failed { component: Component, certificate: Box<Certificate> },
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

/// Bundles `A₁` for `(v, n ↦ z(n·l))`, `A₂` for `(z, ⌈w⌉)` on the length
/// index, the sandwich report on `0..=alpha_max`, and the density profile of `S`.
///
/// `Ok` carries a valid or incomplete certificate; the first failing
/// component is returned as an error.
pub fn growth_certificate(
    v: &GrowthFunction,
    model: &ManifoldModel,
    g: &MetricGraph,
    a_max: u64,
    alpha_max: usize,
) -> Result<Certificate, CertificateError> {
    let z = discrete_growth_table(model);
    let w = ball_volume_table(g, alpha_max.max(z.horizon()));
    let zl = level_growth(model);
    let a1 = same_growth_type(v, &zl, a_max)?;
    let zw_range = z.horizon();
    let w_table = GrowthFunction::new((0..=zw_range).map(|a| w.ceil_at(a)).collect())?;
    let a2 = same_growth_type(&z.as_growth_function(), &w_table, a_max)?;
    let sandwich = sandwich_with(model, g, &z, &w, alpha_max);
    let horizon = model.tree.horizon().max(1);
    let density = lower_density_profile(&model.schedule, horizon);

    let status = if a1.is_none() {
        CertificateStatus::Failed(Component::VersusZ)
    } else if a2.is_none() {
        CertificateStatus::Failed(Component::ZVersusW)
    } else if !sandwich.passed() {
        CertificateStatus::Failed(Component::Sandwich)
    } else if (alpha_max as u64) < model.l() {
        CertificateStatus::Incomplete
    } else {
        CertificateStatus::Valid
    };
    let cert = Certificate { status: status.clone(), a1, a2, sandwich, density, a_max, resolution: g.resolution };
    match status {
        CertificateStatus::Failed(component) => {
            Err(CertificateError::Failed { component, certificate: Box::new(cert) })
        }
        _ => Ok(cert),
    }
}

/// Effect of moving the basepoint to another node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasepointShift {
    pub node: usize,
    /// `d(o, o')`, in length units.
    pub delta: Ratio<u64>,
    /// `max_α |w'(α) − w(α)|`.
    pub max_deviation: Ratio<u64>,
    /// `w(α − δ) ≤ w'(α) ≤ w(α + δ)` held for every α.
    pub shifted_sandwich: bool,
    pub a2: Option<u64>,
    pub a2_shifted: Option<u64>,
}

/// Recomputes `w` and the `(z, w)` witness from `new_o` and compares.
pub fn basepoint_shift(
    model: &ManifoldModel,
    g: &MetricGraph,
    new_o: usize,
    a_max: u64,
) -> Result<BasepointShift, GrowthError> {
    let z = discrete_growth_table(model);
    let top = z.horizon();
    let w = ball_volume_table(g, top);
    let shifted = ball_volume_table(&g.with_basepoint(new_o), top);
    let delta_ticks = w.dist[new_o];
    let res = g.resolution as usize;
    // δ rounded up to whole length units
    let delta_up = (delta_ticks as usize).div_ceil(res);

    let mut max_dev = 0u64;
    let mut ok = true;
    for alpha in 0..=top {
        let (a, b) = (w.numerators[alpha], shifted.numerators[alpha]);
        max_dev = max_dev.max(a.abs_diff(b));
        let below = w.numerators[alpha.saturating_sub(delta_up)];
        let above = w.numerators[(alpha + delta_up).min(top)];
        if alpha + delta_up <= top && !(below <= b && b <= above) {
            ok = false;
        }
    }
    let zg = z.as_growth_function();
    let a2 = same_growth_type(&zg, &w.ceiled(), a_max)?.map(|w| w.a);
    let a2_shifted = same_growth_type(&zg, &shifted.ceiled(), a_max)?.map(|w| w.a);
    Ok(BasepointShift {
        node: new_o,
        delta: Ratio::new(delta_ticks, g.resolution),
        max_deviation: Ratio::new(max_dev, w.denominator),
        shifted_sandwich: ok,
        a2,
        a2_shifted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, Mode};
    use crate::catalog::Catalog;
    use crate::growth::{default_lambda, CanonicalGrowthFunction};
    use crate::tree::{build_tree, LevelSet};

    fn odd(n: usize) -> CanonicalGrowthFunction {
        CanonicalGrowthFunction::new((0..=n as u64).map(|k| 2 * k + 1).collect(), default_lambda()).unwrap()
    }

    fn model(n: usize, s: Vec<(usize, usize)>) -> ManifoldModel {
        let v = odd(n);
        let s = LevelSet::new(s).unwrap();
        let tree = build_tree(&v, &s).unwrap();
        assemble(v.table(), &s, &tree, &Catalog::default_catalog(), Mode::ConnectedSum).unwrap()
    }

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn single_sphere_is_a_path() {
        let m = model(0, vec![]);
        let g = to_metric_graph(&m, 1);
        assert_eq!(g.edges.len(), 5);
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.total_volume(), Ratio::from_integer(10));
    }

    #[test]
    fn sphere3_forks_into_two_legs() {
        let m = model(1, vec![]);
        let g = to_metric_graph(&m, 1);
        let root_nodes = g.instance_nodes(0);
        // stem of 2 edges then two legs of 3
        assert_eq!(root_nodes.len(), 1 + 2 + 2 * 3);
        let fork = root_nodes[2];
        assert_eq!(g.neighbours(fork).count(), 3);
        assert_eq!(g.total_volume(), Ratio::from_integer(30));
        let dist = distances(&g, 0);
        // past the fork at depth 2, both legs count: 2+2 on the stem, 1+1 per leg-unit
        assert_eq!(ball_volume(&g, &dist, r(3)), r(6));
        assert_eq!(ball_volume(&g, &dist, Rational64::new(5, 2)), r(5));
        assert_eq!(ball_volume(&g, &dist, r(0)), r(0));
    }

    #[test]
    fn unit_path_volume() {
        let m = model(0, vec![]);
        let g = to_metric_graph(&m, 1);
        let dist = distances(&g, 0);
        assert_eq!(ball_volume(&g, &dist, r(5)), r(10));
    }

    #[test]
    fn table_matches_pointwise_ball_volume() {
        let m = model(10, vec![(2, 1), (6, 1)]);
        for res in [1, 2, 3] {
            let g = to_metric_graph(&m, res);
            let t = ball_volume_table(&g, 80);
            for alpha in 0..=80 {
                let b = ball_volume(&g, &t.dist, r(alpha as i64));
                assert_eq!(Ratio::new(*b.numer() as u64, *b.denom() as u64), t.at(alpha), "res={res} alpha={alpha}");
            }
        }
    }

    #[test]
    fn volume_is_conserved() {
        let m = model(12, vec![(2, 1), (6, 1)]);
        for res in [1, 2] {
            let g = to_metric_graph(&m, res);
            assert_eq!(g.total_volume(), Ratio::from_integer(m.total_volume()));
            let t = ball_volume_table(&g, 13 * 6);
            assert_eq!(t.at(13 * 6), Ratio::from_integer(m.total_volume()));
        }
    }

    #[test]
    fn sandwich_holds_on_small_models() {
        for s in [vec![], vec![(2, 1)], vec![(2, 1), (6, 1)]] {
            let m = model(20, s);
            let g = to_metric_graph(&m, 1);
            let rep = verify_sandwich(&m, &g, 20 * 6);
            assert!(rep.passed(), "{rep}");
            assert!(rep.epsilon_shell <= 8);
        }
    }

    #[test]
    fn certificate_on_linear_model() {
        let m = model(20, vec![(2, 1), (6, 1)]);
        let g = to_metric_graph(&m, 1);
        let cert = growth_certificate(odd(20).table(), &m, &g, 64, 120).unwrap();
        assert!(cert.is_valid(), "{cert}");
        assert!(cert.a2.unwrap().a <= 3);
    }

    #[test]
    fn short_range_is_incomplete() {
        let m = model(20, vec![]);
        let g = to_metric_graph(&m, 1);
        let cert = growth_certificate(odd(20).table(), &m, &g, 64, 5).unwrap();
        assert_eq!(cert.status, CertificateStatus::Incomplete);
        assert!(!cert.is_valid());
    }

    #[test]
    fn exponential_target_fails_at_v_z() {
        let m = model(20, vec![]);
        let g = to_metric_graph(&m, 1);
        let v = GrowthFunction::from_fn(20, |n| 1 << n).unwrap();
        match growth_certificate(&v, &m, &g, 64, 120) {
            Err(CertificateError::Failed { component, .. }) => assert_eq!(component, Component::VersusZ),
            other => panic!("{other:?}"),
        }
    }
}
