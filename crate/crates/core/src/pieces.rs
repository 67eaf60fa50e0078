//! Abstract pieces of the connected sum.
//!
//! A piece is described only by what the gluing argument needs: the
//! minimum and maximum distance `t_P ≤ T_P` from its `∂⁻` boundary to its
//! `∂⁺` boundaries, the volumes `v_P(k)` of the `k`-neighbourhoods of `∂⁻`,
//! a marked point on `∂⁻`, and the topology of each boundary component.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::growth::ceil_u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PieceError {
    #[error("block {index}: {reason}")]
    InvalidTopology { index: usize, reason: &'static str },
    #[error("torus-cylinder needs codimension q ≥ 3, got q={0}")]
    InvalidCodimension(u32),
    #[error("torus-cylinder needs p ≥ 1")]
    InvalidSphereDimension,
    #[error("invalid bounds: {0}")]
    InvalidBounds(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    Sphere1,
    Sphere2,
    Sphere3,
    Block,
    TorusCylinder,
}

impl PieceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sphere1 => "sphere1",
            Self::Sphere2 => "sphere2",
            Self::Sphere3 => "sphere3",
            Self::Block => "block",
            Self::TorusCylinder => "torus-cylinder",
        }
    }

    pub fn is_sphere(self) -> bool {
        matches!(self, Self::Sphere1 | Self::Sphere2 | Self::Sphere3)
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereKind {
    One,
    Two,
    Three,
}

impl SphereKind {
    /// The sphere piece with `children` outgoing boundaries.
    pub fn with_children(children: usize) -> Self {
        match children {
            0 => Self::One,
            1 => Self::Two,
            _ => Self::Three,
        }
    }

    pub fn piece_kind(self) -> PieceKind {
        match self {
            Self::One => PieceKind::Sphere1,
            Self::Two => PieceKind::Sphere2,
            Self::Three => PieceKind::Sphere3,
        }
    }

    fn plus_count(self) -> usize {
        match self {
            Self::One => 0,
            Self::Two => 1,
            Self::Three => 2,
        }
    }
}

/// Topology of a boundary component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Sphere,
    /// `S^p × S^{q-1}`.
    Torus,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sphere => "sphere",
            Self::Torus => "torus",
        })
    }
}

/// Where the distance to `∂⁻` attains its maximum on a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarPoint {
    /// On `∂⁺`, at distance `T_P`.
    PlusBoundary,
    /// No `∂⁺` at all: the component is a cap.
    Cap,
    /// Somewhere in the interior.
    Interior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileShape {
    /// Constant derivative `⌊(lo + hi)/2⌋`.
    Flat,
    /// `lo, lo+1, …`, capped at `hi`.
    Ramp,
    /// `lo` on the first and last shell, `hi` in between.
    Plateau,
    /// Explicit derivatives; the last one repeats if the list is short.
    Explicit(Vec<u64>),
}

impl ProfileShape {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::Ramp => "ramp",
            Self::Plateau => "plateau",
            Self::Explicit(_) => "explicit",
        }
    }

    /// Volume profile `v(0) = 0, v(1), …, v(shells)`.
    pub fn profile(&self, shells: usize, lo: u64, hi: u64) -> Vec<u64> {
        let derivative = |k: usize| -> u64 {
            match self {
                Self::Flat => (lo + hi) / 2,
                Self::Ramp => (lo + k as u64 - 1).min(hi),
                Self::Plateau if k == 1 || k == shells => lo,
                Self::Plateau => hi,
                Self::Explicit(d) => d.get(k - 1).or(d.last()).copied().unwrap_or(lo),
            }
        };
        let mut out = Vec::with_capacity(shells + 1);
        out.push(0);
        for k in 1..=shells {
            out.push(out[k - 1] + derivative(k));
        }
        out
    }
}

/// One connected component of a piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSpec {
    /// Minimum distance from `∂⁻` to `∂⁺`.
    pub t_min: Rational64,
    /// Maximum distance from `∂⁻` to `∂⁺` (`T_P`).
    pub t_max: Rational64,
    /// `v_P(k)` for `k = 0..=⌈T_P⌉`, with `v_P(0) = 0`.
    pub volume_profile: Vec<u64>,
    /// Offset of the marked point `y_P` on `∂⁻`.
    pub marked_point_offset: Rational64,
    pub far_point: FarPoint,
    pub minus: Topology,
    /// Outgoing boundary components, in gluing order.
    pub plus: Vec<Topology>,
}

impl ComponentSpec {
    /// Number of unit shells, `⌈T_P⌉`.
    pub fn shells(&self) -> usize {
        self.volume_profile.len() - 1
    }

    /// `v'_P(k) = v_P(k) - v_P(k-1)` for `k = 1..=shells`.
    pub fn derivatives(&self) -> impl Iterator<Item = u64> + '_ {
        self.volume_profile.windows(2).map(|w| w[1].saturating_sub(w[0]))
    }

    pub fn total_volume(&self) -> u64 {
        *self.volume_profile.last().unwrap()
    }

    /// `v_P(min(k, shells))`.
    pub fn volume_within(&self, k: usize) -> u64 {
        self.volume_profile[k.min(self.shells())]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceSpec {
    pub kind: PieceKind,
    pub components: Vec<ComponentSpec>,
    /// Height in levels: 1 for sphere and torus pieces, `t_j` for blocks.
    pub t_units: u64,
    /// Global length unit `l`.
    pub l: u64,
    pub boundary_minus_diameter: Rational64,
    /// Position `j` of a block in the block sequence.
    pub block_index: Option<usize>,
    /// Recorded bound `U_j` on the block derivative.
    pub u_bound: Option<u64>,
    /// `(p, q)` of a torus-cylinder.
    pub dims: Option<(u32, u32)>,
}

impl PieceSpec {
    /// Height window `[l·t/3, l·t]`.
    pub fn height_window(&self) -> (Rational64, Rational64) {
        let top = Rational64::from_integer((self.l * self.t_units) as i64);
        (top / 3, top)
    }

    /// `v_P(k) = Σ_i v_{P_i}(k)` over the components.
    pub fn volume_within(&self, k: usize) -> u64 {
        self.components.iter().map(|c| c.volume_within(k)).sum()
    }

    pub fn shells(&self) -> usize {
        self.components.iter().map(ComponentSpec::shells).max().unwrap_or(0)
    }

    /// `v'_P(k)` for `k = 1..=shells`.
    pub fn derivatives(&self) -> Vec<u64> {
        (1..=self.shells()).map(|k| self.volume_within(k) - self.volume_within(k - 1)).collect()
    }

    pub fn max_derivative(&self) -> u64 {
        self.derivatives().into_iter().max().unwrap_or(0)
    }

    pub fn min_derivative(&self) -> u64 {
        self.derivatives().into_iter().min().unwrap_or(0)
    }

    pub fn total_volume(&self) -> u64 {
        self.components.iter().map(ComponentSpec::total_volume).sum()
    }

    /// Outgoing boundaries across all components, in order.
    pub fn plus_count(&self) -> usize {
        self.components.iter().map(|c| c.plus.len()).sum()
    }

    /// The topology glued along the trunk.
    pub fn trunk_topology(&self) -> Topology {
        self.components[0].minus
    }
}

/// Global constants shared by the whole catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogBounds {
    pub l: u64,
    pub h: u64,
    pub big_h: u64,
    pub d: u64,
    /// Optional per-block bounds `U_j`.
    pub u: Vec<u64>,
}

impl CatalogBounds {
    pub fn new(l: u64, h: u64, big_h: u64, d: u64) -> Result<Self, PieceError> {
        let b = Self { l, h, big_h, d, u: Vec::new() };
        b.validate()?;
        Ok(b)
    }

    pub fn with_block_bounds(mut self, u: Vec<u64>) -> Self {
        self.u = u;
        self
    }

    pub fn validate(&self) -> Result<(), PieceError> {
        if self.l < 2 {
            return Err(PieceError::InvalidBounds("l must be at least 2"));
        }
        if self.h == 0 || self.d == 0 {
            return Err(PieceError::InvalidBounds("h and d must be positive"));
        }
        if self.h > self.big_h {
            return Err(PieceError::InvalidBounds("h must not exceed H"));
        }
        if self.u.contains(&0) {
            return Err(PieceError::InvalidBounds("U_j must be positive"));
        }
        Ok(())
    }

    /// Cylinder length `T` with `l = 6T`.
    pub fn cylinder_length(&self) -> Rational64 {
        Rational64::new(self.l as i64, 6)
    }

    /// Default `(t_P, T_P)` for a piece of height `t`: `⌈l·t/3⌉` and `⌊5·l·t/6⌋`.
    pub fn default_heights(&self, t: u64) -> (Rational64, Rational64) {
        let lt = (self.l * t) as i64;
        let lo = Rational64::new(lt, 3).ceil();
        let hi = Rational64::new(5 * lt, 6).floor();
        (lo, hi)
    }
}

fn component(
    heights: (Rational64, Rational64),
    shape: &ProfileShape,
    range: (u64, u64),
    minus: Topology,
    plus: Vec<Topology>,
) -> ComponentSpec {
    let shells = ceil_u64(heights.1) as usize;
    let far_point = if plus.is_empty() { FarPoint::Cap } else { FarPoint::PlusBoundary };
    ComponentSpec {
        t_min: heights.0,
        t_max: heights.1,
        volume_profile: shape.profile(shells, range.0, range.1),
        marked_point_offset: Rational64::from_integer(0),
        far_point,
        minus,
        plus,
    }
}

/// A sphere with one, two or three boundary spheres.
///
/// Heights sit at `t_P = ⌈l/3⌉` and `T_P = ⌊5l/6⌋`; the profile derivative
/// ranges over `[h, H]`.
pub fn make_sphere_piece(kind: SphereKind, bounds: &CatalogBounds, shape: &ProfileShape) -> PieceSpec {
    let plus = vec![Topology::Sphere; kind.plus_count()];
    let comp = component(bounds.default_heights(1), shape, (bounds.h, bounds.big_h), Topology::Sphere, plus);
    PieceSpec {
        kind: kind.piece_kind(),
        components: vec![comp],
        t_units: 1,
        l: bounds.l,
        boundary_minus_diameter: Rational64::from_integer(bounds.d as i64),
        block_index: None,
        u_bound: None,
        dims: None,
    }
}

/// The block `Q_j` of height `t_j`, one component per entry of
/// `boundary_plus_counts` (each with a single `∂⁻`).
///
/// Per-component derivatives range over `[h, U_j / components]` when `U_j`
/// is given in the bounds, else `[h, H]`. The recorded `U_j` is the bound
/// from `bounds`, or the realized maximum derivative otherwise.
pub fn make_block(
    j: usize,
    t_j: u64,
    boundary_plus_counts: &[usize],
    shape: &ProfileShape,
    topology: Topology,
    bounds: &CatalogBounds,
) -> Result<PieceSpec, PieceError> {
    if boundary_plus_counts.is_empty() {
        return Err(PieceError::InvalidTopology { index: j, reason: "a block needs at least one component" });
    }
    if boundary_plus_counts.iter().sum::<usize>() == 0 {
        return Err(PieceError::InvalidTopology {
            index: j,
            reason: "no outgoing boundary: the trunk cannot continue past a closed block",
        });
    }
    if t_j == 0 {
        return Err(PieceError::InvalidTopology { index: j, reason: "block height must be positive" });
    }
    let k = boundary_plus_counts.len() as u64;
    let hi = match bounds.u.get(j) {
        Some(&u) => (u / k).max(bounds.h),
        None => bounds.big_h,
    };
    let heights = bounds.default_heights(t_j);
    let components = boundary_plus_counts
        .iter()
        .map(|&b| component(heights, shape, (bounds.h, hi), topology, vec![topology; b]))
        .collect();
    let mut spec = PieceSpec {
        kind: PieceKind::Block,
        components,
        t_units: t_j,
        l: bounds.l,
        boundary_minus_diameter: Rational64::from_integer(bounds.d as i64),
        block_index: Some(j),
        u_bound: None,
        dims: None,
    };
    spec.u_bound = Some(bounds.u.get(j).copied().unwrap_or_else(|| spec.max_derivative()));
    Ok(spec)
}

/// The trunk piece `S^p × S^{q-1} × [0, l/3]` with a disc removed: a torus
/// on `∂⁻` and on `∂⁺`, plus the sphere left by the removed disc.
pub fn make_torus_cylinder(
    bounds: &CatalogBounds,
    p: u32,
    q: u32,
    shape: &ProfileShape,
) -> Result<PieceSpec, PieceError> {
    if q < 3 {
        return Err(PieceError::InvalidCodimension(q));
    }
    if p < 1 {
        return Err(PieceError::InvalidSphereDimension);
    }
    let comp = component(
        bounds.default_heights(1),
        shape,
        (bounds.h, bounds.big_h),
        Topology::Torus,
        vec![Topology::Torus, Topology::Sphere],
    );
    Ok(PieceSpec {
        kind: PieceKind::TorusCylinder,
        components: vec![comp],
        t_units: 1,
        l: bounds.l,
        boundary_minus_diameter: Rational64::from_integer(bounds.d as i64),
        block_index: None,
        u_bound: None,
        dims: Some((p, q)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
    Skipped(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub piece: usize,
    pub kind: PieceKind,
    pub item: u8,
    pub verdict: Verdict,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = format!("piece {} ({}) item {}", self.piece, self.kind, self.item);
        match &self.verdict {
            Verdict::Pass => write!(f, "{head}: PASS"),
            Verdict::Fail(why) => write!(f, "{head}: FAIL {why}"),
            Verdict::Skipped(why) => write!(f, "{head}: SKIPPED {why}"),
        }
    }
}

/// One line per numbered condition per piece.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PieceReport {
    pub lines: Vec<CheckLine>,
}

impl PieceReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| !matches!(l.verdict, Verdict::Fail(_)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| matches!(l.verdict, Verdict::Fail(_)))
    }

    pub fn failed_items(&self, piece: usize) -> BTreeSet<u8> {
        self.failures().filter(|l| l.piece == piece).map(|l| l.item).collect()
    }
}

impl fmt::Display for PieceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn verdict(failures: Vec<String>) -> Verdict {
    if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail(failures.join("; "))
    }
}

/// Checks every numbered condition on every piece.
///
/// Item 9 (curvature, bounded geometry, product collars) has no
/// combinatorial content and is always reported as skipped.
pub fn verify_pieces(pieces: &[PieceSpec], bounds: &CatalogBounds) -> PieceReport {
    let mut report = PieceReport::default();
    let l = Rational64::from_integer(bounds.l as i64);
    let d = Rational64::from_integer(bounds.d as i64);

    for (i, p) in pieces.iter().enumerate() {
        let mut push =
            |item: u8, verdict: Verdict| report.lines.push(CheckLine { piece: i, kind: p.kind, item, verdict });
        let is_block = p.kind == PieceKind::Block;
        let (lo, hi) = p.height_window();
        let unit = if is_block { hi } else { l };

        // 1: the farthest point from ∂⁻ lies on ∂⁺
        push(
            1,
            verdict(
                p.components
                    .iter()
                    .enumerate()
                    .filter_map(|(c, comp)| {
                        let expected = if comp.plus.is_empty() { FarPoint::Cap } else { FarPoint::PlusBoundary };
                        (comp.far_point != expected)
                            .then(|| format!("component {c}: maximum distance attained at {:?}", comp.far_point))
                    })
                    .collect(),
            ),
        );

        // 2 and 3: height windows
        let window_failures: Vec<String> = p
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !(lo <= c.t_min && c.t_min <= c.t_max && c.t_max <= hi))
            .map(|(c, comp)| format!("component {c}: need {lo} ≤ {} ≤ {} ≤ {hi}", comp.t_min, comp.t_max))
            .collect();
        let (window_item, other_item) = if is_block { (2, 3) } else { (3, 2) };
        push(window_item, verdict(window_failures));
        push(other_item, Verdict::Skipped(if is_block { "applies to non-block pieces" } else { "applies to blocks" }));

        // 4: diameter of ∂⁻
        push(
            4,
            verdict(if p.boundary_minus_diameter > d {
                vec![format!("diam ∂⁻ = {} > d = {d}", p.boundary_minus_diameter)]
            } else {
                vec![]
            }),
        );

        // 5: marked points within gluing distance
        push(
            5,
            verdict(
                p.components
                    .iter()
                    .enumerate()
                    .filter_map(|(c, comp)| {
                        let off = comp.marked_point_offset;
                        if off < Rational64::from_integer(0) || off > p.boundary_minus_diameter {
                            Some(format!("component {c}: marked point offset {off} outside ∂⁻"))
                        } else if comp.t_min + off > unit {
                            Some(format!("component {c}: gluing distance {} > {unit}", comp.t_min + off))
                        } else {
                            None
                        }
                    })
                    .collect(),
            ),
        );

        // 6 and 7: profile bounds; the profile must increase strictly everywhere
        let derivs = p.derivatives();
        let flat_shell = derivs.iter().position(|&x| x == 0);
        if is_block {
            push(6, Verdict::Skipped("applies to non-block pieces"));
            let mut fails = Vec::new();
            let recorded = p.u_bound.or_else(|| p.block_index.and_then(|j| bounds.u.get(j).copied()));
            match recorded {
                None => fails.push("no U_j recorded".to_string()),
                Some(u) => {
                    let global = p.block_index.and_then(|j| bounds.u.get(j).copied()).unwrap_or(u);
                    let cap = u.min(global);
                    if p.max_derivative() > cap {
                        fails.push(format!("max v' = {} > U_j = {cap}", p.max_derivative()));
                    }
                }
            }
            if let Some(k) = flat_shell {
                fails.push(format!("v' = 0 at shell {}", k + 1));
            }
            push(7, verdict(fails));
        } else {
            let (min, max) = (p.min_derivative(), p.max_derivative());
            let mut fails = Vec::new();
            if min < bounds.h || max > bounds.big_h {
                fails.push(format!("need {} ≤ min v' = {min} ≤ max v' = {max} ≤ {}", bounds.h, bounds.big_h));
            }
            if let Some(k) = flat_shell {
                fails.push(format!("v' = 0 at shell {}", k + 1));
            }
            push(6, verdict(fails));
            push(7, Verdict::Skipped("applies to blocks"));
        }

        // 8: boundary interfaces
        push(8, verdict(interface_failures(p, pieces)));

        push(9, Verdict::Skipped("curvature and collar conditions are metric data"));
    }
    report
}

fn interface_failures(p: &PieceSpec, all: &[PieceSpec]) -> Vec<String> {
    let mut fails = Vec::new();
    match p.kind {
        PieceKind::Sphere1 | PieceKind::Sphere2 | PieceKind::Sphere3 => {
            let expected = match p.kind {
                PieceKind::Sphere1 => 0,
                PieceKind::Sphere2 => 1,
                _ => 2,
            };
            for comp in &p.components {
                if comp.minus != Topology::Sphere || comp.plus.iter().any(|&t| t != Topology::Sphere) {
                    fails.push("sphere piece with a non-sphere boundary".to_string());
                }
                if comp.plus.len() != expected {
                    fails.push(format!("{} has {} outgoing boundaries", p.kind, comp.plus.len()));
                }
            }
        }
        PieceKind::TorusCylinder => {
            for comp in &p.components {
                if comp.minus != Topology::Torus || comp.plus != [Topology::Torus, Topology::Sphere] {
                    fails.push("torus-cylinder must have torus ∂⁻, torus ∂⁺ and one sphere".to_string());
                }
            }
        }
        PieceKind::Block => {
            let topo = p.components[0].minus;
            if p.components.iter().any(|c| c.minus != topo || c.plus.iter().any(|&t| t != topo)) {
                fails.push("∂⁻ and ∂⁺ of the block disagree in topology".to_string());
            }
            // ∂⁺Q_j must match ∂⁻Q_{j+1}
            if let Some(j) = p.block_index {
                let next = all.iter().find(|q| q.kind == PieceKind::Block && q.block_index == Some(j + 1));
                if let Some(next) = next {
                    if next.components.len() != p.plus_count() {
                        fails.push(format!(
                            "∂⁺Q_{j} has {} components but Q_{} has {} incoming",
                            p.plus_count(),
                            j + 1,
                            next.components.len()
                        ));
                    }
                    if next.components[0].minus != topo {
                        fails.push(format!("∂⁺Q_{j} and ∂⁻Q_{} differ in topology", j + 1));
                    }
                }
            }
        }
    }
    fails
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(l: u64, h: u64, big_h: u64) -> CatalogBounds {
        CatalogBounds::new(l, h, big_h, 2).unwrap()
    }

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn flat_sphere_at_l6() {
        let p = make_sphere_piece(SphereKind::Two, &bounds(6, 1, 4), &ProfileShape::Flat);
        let c = &p.components[0];
        assert_eq!((c.t_min, c.t_max), (r(2), r(5)));
        assert!(p.derivatives().iter().all(|&d| d == 2));
        assert!(verify_pieces(&[p], &bounds(6, 1, 4)).passed());
    }

    #[test]
    fn unit_bounds_force_the_identity_profile() {
        let p = make_sphere_piece(SphereKind::One, &bounds(6, 1, 1), &ProfileShape::Ramp);
        assert_eq!(p.components[0].volume_profile, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn ramp_is_capped() {
        let b = bounds(12, 2, 8);
        let p = make_sphere_piece(SphereKind::Three, &b, &ProfileShape::Ramp);
        assert_eq!(p.derivatives(), vec![2, 3, 4, 5, 6, 7, 8, 8, 8, 8]);
        assert!(verify_pieces(&[p], &b).passed());
    }

    #[test]
    fn plateau_profile() {
        let p = make_sphere_piece(SphereKind::Two, &bounds(6, 1, 4), &ProfileShape::Plateau);
        assert_eq!(p.derivatives(), vec![1, 4, 4, 4, 1]);
    }

    #[test]
    fn block_records_realized_bound() {
        let b = bounds(6, 1, 4);
        let q = make_block(0, 2, &[1], &ProfileShape::Explicit(vec![3, 7, 5]), Topology::Sphere, &b).unwrap();
        assert_eq!(q.u_bound, Some(7));
        let c = &q.components[0];
        assert_eq!((c.t_min, c.t_max), (r(4), r(10)));
        assert!(q.height_window() == (r(4), r(12)));
        assert!(verify_pieces(&[q], &b).passed());
    }

    #[test]
    fn unit_block_has_sphere_window() {
        let q = make_block(0, 1, &[1], &ProfileShape::Flat, Topology::Sphere, &bounds(6, 1, 4)).unwrap();
        assert_eq!(q.height_window(), (r(2), r(6)));
    }

    #[test]
    fn block_profile_adds_components() {
        let b = bounds(6, 1, 9);
        let q = make_block(0, 1, &[1, 0], &ProfileShape::Ramp, Topology::Sphere, &b).unwrap();
        let single = make_block(0, 1, &[1], &ProfileShape::Ramp, Topology::Sphere, &b).unwrap();
        for k in 0..=5 {
            assert_eq!(q.volume_within(k), 2 * single.volume_within(k));
        }
    }

    #[test]
    fn closed_blocks_are_rejected() {
        let b = bounds(6, 1, 4);
        assert!(matches!(
            make_block(3, 1, &[], &ProfileShape::Flat, Topology::Sphere, &b),
            Err(PieceError::InvalidTopology { index: 3, .. })
        ));
        assert!(make_block(3, 1, &[0, 0], &ProfileShape::Flat, Topology::Sphere, &b).is_err());
    }

    #[test]
    fn torus_cylinder_windows() {
        let b = bounds(6, 1, 4);
        let t = make_torus_cylinder(&b, 1, 3, &ProfileShape::Flat).unwrap();
        assert_eq!(t.components[0].t_min, r(2));
        assert!(t.components[0].t_max <= r(6));
        assert!(verify_pieces(&[t], &b).passed());
        assert_eq!(make_torus_cylinder(&b, 1, 2, &ProfileShape::Flat), Err(PieceError::InvalidCodimension(2)));
        let t9 = make_torus_cylinder(&bounds(9, 1, 4), 2, 3, &ProfileShape::Flat).unwrap();
        assert_eq!(t9.components[0].t_min, r(3));
    }

    #[test]
    fn tall_sphere_fails_only_the_height_window() {
        let b = bounds(6, 1, 4);
        let mut p = make_sphere_piece(SphereKind::Two, &b, &ProfileShape::Flat);
        let c = &mut p.components[0];
        c.t_max = r(7);
        c.volume_profile.extend([12, 14]);
        let report = verify_pieces(&[p], &b);
        assert_eq!(report.failed_items(0), BTreeSet::from([3]));
    }

    #[test]
    fn block_spike_fails_item_seven() {
        let b = bounds(6, 1, 4);
        let mut q = make_block(0, 1, &[1], &ProfileShape::Flat, Topology::Sphere, &b).unwrap();
        let u = q.u_bound.unwrap();
        let prof = &mut q.components[0].volume_profile;
        for v in prof.iter_mut().skip(3) {
            *v += u + 1;
        }
        assert_eq!(verify_pieces(&[q], &b).failed_items(0), BTreeSet::from([7]));
    }

    #[test]
    fn item_nine_is_always_skipped() {
        let b = bounds(6, 1, 4);
        let p = make_sphere_piece(SphereKind::One, &b, &ProfileShape::Flat);
        let report = verify_pieces(&[p], &b);
        let nine = report.lines.iter().find(|l| l.item == 9).unwrap();
        assert!(matches!(nine.verdict, Verdict::Skipped(_)));
        assert!(report.to_string().contains("item 9: SKIPPED"));
    }

    #[test]
    fn bounds_validation() {
        assert!(CatalogBounds::new(1, 1, 1, 1).is_err());
        assert!(CatalogBounds::new(6, 5, 4, 1).is_err());
        assert_eq!(CatalogBounds::new(6, 1, 4, 1).unwrap().cylinder_length(), r(1));
    }
}
