//! The connected sum `R_{S,v}`: pieces placed on the vertices of the growth
//! tree, the radial function `r`, and the discrete growth function
//! `z(n) = vol{r ≤ n}`.

use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::catalog::Catalog;
use crate::growth::{same_growth_type, CanonicalGrowthFunction, GrowthError, GrowthFunction};
use crate::pieces::{
    verify_pieces, CatalogBounds, ComponentSpec, PieceKind, PieceReport, PieceSpec, SphereKind, Topology,
};
use crate::tree::{build_tree, LevelSet, RootedTree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssemblyError {
    #[error("catalog has no block for interval {0}")]
    MissingPiece(usize),
    #[error("lower-dimensional-sphere mode needs a torus-cylinder in the catalog")]
    MissingTorusCylinder,
    #[error("block {index} has height {block} but interval {index} spans {interval} levels")]
    BlockHeightMismatch { index: usize, block: u64, interval: usize },
    #[error("interface mismatch at vertex {vertex}: {detail}")]
    InterfaceMismatch { vertex: usize, detail: String },
    #[error("tree does not match the growth table: {0}")]
    TreeMismatch(String),
    #[error("no level schedule found: {0}")]
    ScheduleNotFound(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Ordinary connected sums along spheres.
    #[default]
    ConnectedSum,
    /// Connected sums along `S^p`: torus boundaries on the trunk.
    LowerDimSpheres,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::ConnectedSum => "connected-sum",
            Self::LowerDimSpheres => "lower-dim-spheres",
        }
    }

    fn block_topology(self) -> Topology {
        match self {
            Self::ConnectedSum => Topology::Sphere,
            Self::LowerDimSpheres => Topology::Torus,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "connected-sum" => Ok(Self::ConnectedSum),
            "lower-dim-spheres" => Ok(Self::LowerDimSpheres),
            other => Err(format!("unknown mode {other:?} (expected connected-sum or lower-dim-spheres)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A piece placed on the tree.
///
/// Blocks cover the trunk vertices of their interval and have one unit per
/// component. Trunk pieces between blocks carry `strand_multiplicity`
/// parallel strands: strand 0 uses `spec` and holds the side branch, the
/// others use `strand_spec`. Every other instance is a single sphere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceInstance {
    pub id: usize,
    /// Index into [`ManifoldModel::specs`].
    pub spec: usize,
    pub strand_spec: usize,
    pub level: usize,
    pub strand_multiplicity: usize,
    pub block: Option<usize>,
    pub trunk: bool,
    /// Tree vertices covered by this instance.
    pub vertices: Vec<usize>,
    /// Sphere legs added to unit 0 for side children of a block.
    pub extra_side_legs: usize,
    /// `n·l` or `n_j·l`.
    pub base: u64,
}

/// `parent.unit.slot` (a `∂⁺` boundary) glued to the `∂⁻` of `child.unit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attachment {
    pub parent: usize,
    pub parent_unit: usize,
    pub slot: usize,
    pub child: usize,
    pub child_unit: usize,
    pub topology: Topology,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldModel {
    pub tree: RootedTree,
    pub schedule: LevelSet,
    pub mode: Mode,
    pub bounds: CatalogBounds,
    /// Sphere1, Sphere2, Sphere3, the blocks in order, then the torus-cylinder if any.
    pub specs: Vec<PieceSpec>,
    pub instances: Vec<PieceInstance>,
    /// Tree vertex → instance.
    pub placements: Vec<usize>,
    pub attachments: Vec<Attachment>,
}

const BLOCK_OFFSET: usize = 3;

impl ManifoldModel {
    pub fn l(&self) -> u64 {
        self.bounds.l
    }

    pub fn root(&self) -> &PieceInstance {
        &self.instances[self.placements[0]]
    }

    pub fn spec_of(&self, inst: &PieceInstance) -> &PieceSpec {
        &self.specs[inst.spec]
    }

    pub fn unit_count(&self, inst: &PieceInstance) -> usize {
        match inst.block {
            Some(_) => self.specs[inst.spec].components.len(),
            None => inst.strand_multiplicity,
        }
    }

    pub fn unit(&self, inst: &PieceInstance, u: usize) -> &ComponentSpec {
        match (inst.block, u) {
            (Some(_), u) => &self.specs[inst.spec].components[u],
            (None, 0) => &self.specs[inst.spec].components[0],
            (None, _) => &self.specs[inst.strand_spec].components[0],
        }
    }

    /// Outgoing boundaries of a unit, side legs last.
    pub fn unit_slots(&self, inst: &PieceInstance, u: usize) -> Vec<Topology> {
        let mut slots = self.unit(inst, u).plus.clone();
        if u == 0 {
            slots.extend(std::iter::repeat_n(Topology::Sphere, inst.extra_side_legs));
        }
        slots
    }

    pub fn units(&self, inst: &PieceInstance) -> impl Iterator<Item = &ComponentSpec> + '_ {
        let inst = inst.clone();
        (0..self.unit_count(&inst)).map(move |u| self.unit(&inst, u))
    }

    pub fn instance_volume(&self, inst: &PieceInstance) -> u64 {
        self.units(inst).map(ComponentSpec::total_volume).sum()
    }

    pub fn total_volume(&self) -> u64 {
        self.instances.iter().map(|i| self.instance_volume(i)).sum()
    }

    /// Largest single-shell volume of any unit.
    pub fn max_shell_volume(&self) -> u64 {
        self.instances
            .iter()
            .flat_map(|i| self.units(i).flat_map(|c| c.derivatives()).collect::<Vec<_>>())
            .max()
            .unwrap_or(0)
    }

    /// Index range `0..=(N+1)·l` covering every shell.
    pub fn length_horizon(&self) -> u64 {
        let top = self
            .instances
            .iter()
            .flat_map(|i| self.units(i).map(|c| i.base + c.shells() as u64).collect::<Vec<_>>())
            .max()
            .unwrap_or(0);
        ((self.tree.horizon() as u64 + 1) * self.l()).max(top)
    }
}

fn sphere_index(kind: SphereKind) -> usize {
    match kind {
        SphereKind::One => 0,
        SphereKind::Two => 1,
        SphereKind::Three => 2,
    }
}

/// Places pieces on every vertex of `tree`.
pub fn assemble(
    v: &GrowthFunction,
    s: &LevelSet,
    tree: &RootedTree,
    catalog: &Catalog,
    mode: Mode,
) -> Result<ManifoldModel, AssemblyError> {
    let horizon = tree.horizon();
    if v.horizon() != horizon {
        return Err(AssemblyError::TreeMismatch(format!("tree horizon {horizon}, table horizon {}", v.horizon())));
    }
    if let Some(n) = (0..=horizon).find(|&n| tree.growth(n) != v.value(n)) {
        return Err(AssemblyError::TreeMismatch(format!(
            "level {n}: tree has {} vertices, v = {}",
            tree.growth(n),
            v.value(n)
        )));
    }
    for (j, &(n, t)) in s.intervals().iter().enumerate() {
        let block = catalog.blocks.get(j).ok_or(AssemblyError::MissingPiece(j))?;
        if block.t_units as usize != t {
            return Err(AssemblyError::BlockHeightMismatch { index: j, block: block.t_units, interval: t });
        }
        if let Some(level) = (n..n + t).find(|&k| k > 0 && tree.children(tree.trunk(k - 1)).len() != 1) {
            return Err(AssemblyError::TreeMismatch(format!("trunk vertex at level {} is not thin", level - 1)));
        }
    }
    let torus_index = BLOCK_OFFSET + catalog.blocks.len();
    if mode == Mode::LowerDimSpheres && catalog.torus.is_none() {
        return Err(AssemblyError::MissingTorusCylinder);
    }

    let l = catalog.bounds.l;
    let mut specs = vec![catalog.sphere1.clone(), catalog.sphere2.clone(), catalog.sphere3.clone()];
    specs.extend(catalog.blocks.iter().cloned());
    specs.extend(catalog.torus.iter().cloned());

    let mut model = ManifoldModel {
        tree: tree.clone(),
        schedule: s.clone(),
        mode,
        bounds: catalog.bounds.clone(),
        specs,
        instances: Vec::new(),
        placements: vec![usize::MAX; tree.len()],
        attachments: Vec::new(),
    };
    // strands currently running along the trunk
    let mut strands = 1usize;

    for vert in tree.vertices() {
        let id = vert.id;
        let n = vert.level;
        let n_children = tree.children(id).len();

        if vert.trunk {
            if let Some(j) = s.interval_of(n) {
                let (start, t) = s.intervals()[j];
                if n != start {
                    let block = model.placements[tree.trunk(start)];
                    model.placements[id] = block;
                    model.instances[block].vertices.push(id);
                    continue;
                }
                let spec_idx = BLOCK_OFFSET + j;
                let components = model.specs[spec_idx].components.len();
                if components != strands {
                    return Err(AssemblyError::InterfaceMismatch {
                        vertex: id,
                        detail: format!("block {j} has {components} components but {strands} strands arrive"),
                    });
                }
                let last = tree.trunk(start + t - 1);
                let side = tree.children(last).iter().filter(|&&c| !tree.vertex(c).trunk).count();
                let inst = push_instance(
                    &mut model,
                    PieceInstance {
                        id: 0,
                        spec: spec_idx,
                        strand_spec: spec_idx,
                        level: n,
                        strand_multiplicity: 1,
                        block: Some(j),
                        trunk: true,
                        vertices: vec![id],
                        extra_side_legs: side,
                        base: start as u64 * l,
                    },
                );
                model.placements[id] = inst;
                let parent = model.placements[vert.parent.expect("blocks start above the root")];
                for u in 0..strands {
                    attach(&mut model, id, (parent, u, 0), (inst, u))?;
                }
                strands = model.specs[spec_idx].plus_count();
                continue;
            }

            let (spec, strand_spec) = match mode {
                Mode::ConnectedSum => {
                    let rest = if n < horizon { SphereKind::Two } else { SphereKind::One };
                    (sphere_index(SphereKind::with_children(n_children)), sphere_index(rest))
                }
                Mode::LowerDimSpheres => (torus_index, torus_index),
            };
            let inst = push_instance(
                &mut model,
                PieceInstance {
                    id: 0,
                    spec,
                    strand_spec,
                    level: n,
                    strand_multiplicity: strands,
                    block: None,
                    trunk: true,
                    vertices: vec![id],
                    extra_side_legs: 0,
                    base: n as u64 * l,
                },
            );
            model.placements[id] = inst;
            if let Some(p) = vert.parent {
                let parent = model.placements[p];
                if let Some(j) = model.instances[parent].block {
                    // the block's ∂⁺ boundaries, in component order
                    let comps = model.specs[BLOCK_OFFSET + j].components.clone();
                    let mut u = 0;
                    for (c, comp) in comps.iter().enumerate() {
                        for slot in 0..comp.plus.len() {
                            attach(&mut model, id, (parent, c, slot), (inst, u))?;
                            u += 1;
                        }
                    }
                } else {
                    for u in 0..strands {
                        attach(&mut model, id, (parent, u, 0), (inst, u))?;
                    }
                }
            }
            continue;
        }

        let inst = push_instance(
            &mut model,
            PieceInstance {
                id: 0,
                spec: sphere_index(SphereKind::with_children(n_children)),
                strand_spec: sphere_index(SphereKind::with_children(n_children)),
                level: n,
                strand_multiplicity: 1,
                block: None,
                trunk: false,
                vertices: vec![id],
                extra_side_legs: 0,
                base: n as u64 * l,
            },
        );
        model.placements[id] = inst;
        let p = vert.parent.expect("non-root vertex");
        let parent = model.placements[p];
        let pinst = &model.instances[parent];
        let slot = if let Some(j) = pinst.block {
            let side_rank = tree.children(p).iter().filter(|&&c| !tree.vertex(c).trunk).position(|&c| c == id).unwrap();
            model.specs[BLOCK_OFFSET + j].components[0].plus.len() + side_rank
        } else {
            tree.children(p).iter().position(|&c| c == id).unwrap()
        };
        attach(&mut model, id, (parent, 0, slot), (inst, 0))?;
    }
    Ok(model)
}

fn push_instance(model: &mut ManifoldModel, mut inst: PieceInstance) -> usize {
    inst.id = model.instances.len();
    model.instances.push(inst);
    model.instances.len() - 1
}

fn attach(
    model: &mut ManifoldModel,
    vertex: usize,
    (parent, parent_unit, slot): (usize, usize, usize),
    (child, child_unit): (usize, usize),
) -> Result<(), AssemblyError> {
    let slots = model.unit_slots(&model.instances[parent], parent_unit);
    let outer = *slots.get(slot).ok_or_else(|| AssemblyError::InterfaceMismatch {
        vertex,
        detail: format!("instance {parent} unit {parent_unit} has no boundary slot {slot}"),
    })?;
    let inner = model.unit(&model.instances[child], child_unit).minus;
    if outer != inner {
        return Err(AssemblyError::InterfaceMismatch {
            vertex,
            detail: format!("{outer} boundary of instance {parent} glued to {inner} boundary of instance {child}"),
        });
    }
    model.attachments.push(Attachment { parent, parent_unit, slot, child, child_unit, topology: outer });
    Ok(())
}

/// `r(x) = ⌊d(x, ∂⁻P)⌋ + base(P)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadialFunction {
    pub bases: Vec<u64>,
}

impl RadialFunction {
    pub fn eval(&self, instance: usize, depth: Rational64) -> u64 {
        depth.floor().to_integer().max(0) as u64 + self.bases[instance]
    }
}

pub fn radial(model: &ManifoldModel) -> RadialFunction {
    RadialFunction { bases: model.instances.iter().map(|i| i.base).collect() }
}

/// `z` tabulated on `0..=length_horizon`; constant past the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteGrowth {
    pub values: Vec<u64>,
}

impl DiscreteGrowth {
    pub fn at(&self, n: i64) -> u64 {
        if n < 0 {
            0
        } else {
            self.values[(n as usize).min(self.values.len() - 1)]
        }
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn as_growth_function(&self) -> GrowthFunction {
        GrowthFunction::new(self.values.clone()).expect("z is non-decreasing")
    }
}

/// Shell `k` of a unit based at `b` has `r = b + k - 1`.
pub fn discrete_growth_table(model: &ManifoldModel) -> DiscreteGrowth {
    let len = model.length_horizon() as usize + 1;
    let mut hist = vec![0u64; len];
    for inst in &model.instances {
        for comp in model.units(inst) {
            for (k, d) in comp.derivatives().enumerate() {
                hist[inst.base as usize + k] += d;
            }
        }
    }
    let mut acc = 0;
    let values = hist
        .into_iter()
        .map(|h| {
            acc += h;
            acc
        })
        .collect();
    DiscreteGrowth { values }
}

/// `z(n) = Σ_P v_P(clamp(n - base + 1, 0, ⌈T_P⌉))`, evaluated directly.
pub fn discrete_growth(model: &ManifoldModel, n: i64) -> u64 {
    model
        .instances
        .iter()
        .map(|inst| {
            let k = (n - inst.base as i64 + 1).max(0) as usize;
            model.units(inst).map(|c| c.volume_within(k)).sum::<u64>()
        })
        .sum()
}

/// `n ↦ z(n·l)` for `n = 0..=N`.
pub fn level_growth(model: &ManifoldModel) -> GrowthFunction {
    let z = discrete_growth_table(model);
    let l = model.l() as i64;
    GrowthFunction::new((0..=model.tree.horizon() as i64).map(|n| z.at(n * l)).collect()).expect("z is non-decreasing")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelReport {
    pub violations: Vec<String>,
    pub pieces: PieceReport,
}

impl ModelReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.pieces.passed()
    }
}

impl fmt::Display for ModelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "VIOLATION {v}")?;
        }
        write!(f, "{}", self.pieces)
    }
}

/// Checks placements, multiplicities, offsets and interfaces, and runs the
/// piece verifier on every spec in the model.
pub fn validate_model(model: &ManifoldModel) -> ModelReport {
    let mut out = Vec::new();
    let tree = &model.tree;
    let s = &model.schedule;
    let l = model.l();
    let mut strands = 1usize;

    for vert in tree.vertices() {
        let id = vert.id;
        let Some(inst) = model.instances.get(model.placements[id]) else {
            out.push(format!("vertex {id}: not placed"));
            continue;
        };
        let spec = model.spec_of(inst);
        if vert.trunk {
            if let Some(j) = s.interval_of(vert.level) {
                let (start, t) = s.intervals()[j];
                let expected: Vec<usize> = (start..start + t).map(|k| tree.trunk(k)).collect();
                if inst.block != Some(j) || spec.kind != PieceKind::Block {
                    out.push(format!(
                        "vertex {id}: trunk level {} in interval {j} not covered by block {j}",
                        vert.level
                    ));
                } else if inst.vertices != expected {
                    out.push(format!(
                        "vertex {id}: block {j} spans {:?}, interval needs {:?}",
                        inst.vertices, expected
                    ));
                } else if inst.base != start as u64 * l {
                    out.push(format!("vertex {id}: block base {} expected {}", inst.base, start as u64 * l));
                }
                if vert.level == start + t - 1 {
                    strands = spec.plus_count();
                }
                continue;
            }
            if inst.strand_multiplicity != strands {
                out.push(format!("vertex {id}: strand multiplicity {} expected {strands}", inst.strand_multiplicity));
            }
        } else if inst.strand_multiplicity != 1 {
            out.push(format!("vertex {id}: off-trunk multiplicity {}", inst.strand_multiplicity));
        }
        if inst.vertices != [id] {
            out.push(format!("vertex {id}: instance {} covers {:?}", inst.id, inst.vertices));
        }
        let children = tree.children(id).len();
        let expected = match (model.mode, vert.trunk) {
            (Mode::LowerDimSpheres, true) => PieceKind::TorusCylinder,
            _ => SphereKind::with_children(children).piece_kind(),
        };
        if spec.kind != expected {
            out.push(format!("vertex {id}: {} placed, {children} children need {expected}", spec.kind));
        }
        if inst.base != vert.level as u64 * l {
            out.push(format!("vertex {id}: base {} expected {}", inst.base, vert.level as u64 * l));
        }
    }

    for a in &model.attachments {
        let slots = model.unit_slots(&model.instances[a.parent], a.parent_unit);
        let inner = model.unit(&model.instances[a.child], a.child_unit).minus;
        let vertex = model.instances[a.child].vertices.first().copied().unwrap_or(0);
        match slots.get(a.slot) {
            Some(&t) if t == inner && t == a.topology => {}
            Some(&t) => out.push(format!("vertex {vertex}: {t} slot glued to {inner} boundary")),
            None => out.push(format!("vertex {vertex}: missing slot {} on instance {}", a.slot, a.parent)),
        }
        if model.mode == Mode::ConnectedSum && inner != Topology::Sphere {
            out.push(format!("vertex {vertex}: torus interface in connected-sum mode"));
        }
    }

    let block_topology = model.mode.block_topology();
    for (j, _) in s.intervals().iter().enumerate() {
        if model.specs[BLOCK_OFFSET + j].trunk_topology() != block_topology {
            out.push(format!("block {j}: boundary topology does not fit {} mode", model.mode));
        }
    }

    ModelReport { violations: out, pieces: verify_pieces(&model.specs, &model.bounds) }
}

/// Level selection parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleConfig {
    /// Geometric spacing `n_{j+1} ≥ ratio·n_j`.
    pub ratio: usize,
    /// Witness bound for the running corridor check.
    pub corridor: u64,
    /// Witness bound for the final check.
    pub a_max: u64,
    pub mode: Mode,
    /// Place as many catalog blocks as fit instead of requiring all of them.
    pub fit_horizon: bool,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { ratio: 3, corridor: 32, a_max: 64, mode: Mode::ConnectedSum, fit_horizon: true }
    }
}

fn prefix(catalog: &Catalog, blocks: usize) -> Catalog {
    let mut c = catalog.clone();
    c.blocks.truncate(blocks);
    c
}

/// Greedy schedule for the catalog's blocks, in order.
///
/// Block `j` goes at the smallest `n ≥ max(d, ratio·n_{j-1}, n_{j-1}+t_{j-1}+2)`
/// where the tree is feasible (else `n + 1`) and `z` stays within the
/// corridor witness of `v` (else `2n`). The finished schedule must pass the
/// equivalence check with `a_max`.
pub fn choose_levels(
    v: &CanonicalGrowthFunction,
    catalog: &Catalog,
    config: &ScheduleConfig,
) -> Result<LevelSet, AssemblyError> {
    let horizon = v.horizon();
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    let mut n = (catalog.bounds.d as usize).max(1);

    'blocks: for (j, block) in catalog.blocks.iter().enumerate() {
        let t = block.t_units as usize;
        loop {
            if n + t - 1 > horizon {
                if config.fit_horizon {
                    break 'blocks;
                }
                return Err(AssemblyError::ScheduleNotFound(format!(
                    "block {j} (t = {t}) does not fit below horizon {horizon}"
                )));
            }
            let mut candidate = intervals.clone();
            candidate.push((n, t));
            let s = LevelSet::new(candidate.clone())?;
            let tree = match build_tree(v, &s) {
                Ok(tree) => tree,
                Err(TreeError::InfeasibleLevel(_)) => {
                    n += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let model = assemble(v.table(), &s, &tree, &prefix(catalog, j + 1), config.mode)?;
            if same_growth_type(v.table(), &level_growth(&model), config.corridor)?.is_none() {
                n *= 2;
                continue;
            }
            intervals = candidate;
            n = (config.ratio * n).max(n + t + 2);
            break;
        }
    }

    let s = LevelSet::new(intervals)?;
    let tree = build_tree(v, &s)?;
    let model = assemble(v.table(), &s, &tree, &prefix(catalog, s.intervals().len()), config.mode)?;
    if same_growth_type(v.table(), &level_growth(&model), config.a_max)?.is_none() {
        return Err(AssemblyError::ScheduleNotFound(format!("z is not within A ≤ {} of v", config.a_max)));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::default_lambda;
    use crate::pieces::{make_block, ProfileShape};

    fn odd(n: usize) -> CanonicalGrowthFunction {
        CanonicalGrowthFunction::new((0..=n as u64).map(|k| 2 * k + 1).collect(), default_lambda()).unwrap()
    }

    fn one_block_catalog() -> Catalog {
        let cat = Catalog::default_catalog();
        let b = make_block(0, 1, &[1], &ProfileShape::Flat, Topology::Sphere, &cat.bounds).unwrap();
        cat.with_blocks(vec![b])
    }

    fn build(v: &CanonicalGrowthFunction, s: &LevelSet, cat: &Catalog, mode: Mode) -> ManifoldModel {
        let tree = build_tree(v, s).unwrap();
        assemble(v.table(), s, &tree, cat, mode).unwrap()
    }

    #[test]
    fn single_block_trunk_walk() {
        let v = odd(8);
        let s = LevelSet::new(vec![(2, 1)]).unwrap();
        let m = build(&v, &s, &one_block_catalog(), Mode::ConnectedSum);
        let kinds: Vec<PieceKind> =
            (0..=8).map(|n| m.spec_of(&m.instances[m.placements[m.tree.trunk(n)]]).kind).collect();
        assert_eq!(kinds[0], PieceKind::Sphere3);
        assert_eq!(kinds[1], PieceKind::Sphere2);
        assert_eq!(kinds[2], PieceKind::Block);
        assert_eq!(kinds[3], PieceKind::Sphere3);
        assert_eq!(kinds[8], PieceKind::Sphere1);
        for vert in m.tree.vertices().iter().filter(|v| !v.trunk && m.tree.children(v.id).is_empty()) {
            assert_eq!(m.spec_of(&m.instances[m.placements[vert.id]]).kind, PieceKind::Sphere1);
        }
        let report = validate_model(&m);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn empty_schedule_is_all_spheres() {
        let m = build(&odd(10), &LevelSet::empty(), &Catalog::default_catalog(), Mode::ConnectedSum);
        assert!(m.instances.iter().all(|i| m.spec_of(i).kind.is_sphere()));
        assert_eq!(m.instances.len(), 21);
        assert!(validate_model(&m).passed());
    }

    #[test]
    fn torus_mode_matches_torus_interfaces() {
        let v = odd(12);
        let cat = Catalog::default_torus_catalog();
        let s = LevelSet::new(vec![(2, 1), (6, 1)]).unwrap();
        let m = build(&v, &s, &cat, Mode::LowerDimSpheres);
        let report = validate_model(&m);
        assert!(report.passed(), "{report}");
        assert!(m.attachments.iter().any(|a| a.topology == Topology::Torus));
        assert!(m.attachments.iter().any(|a| a.topology == Topology::Sphere));
        let tree = build_tree(&v, &s).unwrap();
        let err = assemble(v.table(), &s, &tree, &Catalog::default_catalog(), Mode::LowerDimSpheres).unwrap_err();
        assert!(matches!(err, AssemblyError::InterfaceMismatch { .. }), "{err}");
    }

    #[test]
    fn strands_follow_the_previous_block() {
        let v = odd(12);
        let s = LevelSet::new(vec![(2, 1), (6, 1)]).unwrap();
        let m = build(&v, &s, &Catalog::default_catalog(), Mode::ConnectedSum);
        assert_eq!(m.instances[m.placements[m.tree.trunk(1)]].strand_multiplicity, 1);
        for n in 3..6 {
            assert_eq!(m.instances[m.placements[m.tree.trunk(n)]].strand_multiplicity, 2);
        }
        for n in 7..=12 {
            assert_eq!(m.instances[m.placements[m.tree.trunk(n)]].strand_multiplicity, 2);
        }
    }

    #[test]
    fn missing_block_and_height_mismatch() {
        let v = odd(12);
        let s = LevelSet::new(vec![(2, 1), (6, 1)]).unwrap();
        let tree = build_tree(&v, &s).unwrap();
        let err = assemble(v.table(), &s, &tree, &one_block_catalog(), Mode::ConnectedSum).unwrap_err();
        assert_eq!(err, AssemblyError::MissingPiece(1));
        let s = LevelSet::new(vec![(2, 2)]).unwrap();
        let tree = build_tree(&v, &s).unwrap();
        let err = assemble(v.table(), &s, &tree, &one_block_catalog(), Mode::ConnectedSum).unwrap_err();
        assert!(matches!(err, AssemblyError::BlockHeightMismatch { index: 0, .. }));
    }

    #[test]
    fn radial_examples() {
        let r = RadialFunction { bases: vec![0, 24, 30] };
        assert_eq!(r.eval(1, Rational64::new(27, 10)), 26);
        assert_eq!(r.eval(2, Rational64::new(119, 10)), 41);
        assert_eq!(r.eval(0, Rational64::from_integer(0)), 0);
    }

    #[test]
    fn z_matches_direct_sum_and_total() {
        let v = odd(12);
        let s = LevelSet::new(vec![(2, 1), (6, 1)]).unwrap();
        let m = build(&v, &s, &Catalog::default_catalog(), Mode::ConnectedSum);
        let z = discrete_growth_table(&m);
        for n in -3..=z.horizon() as i64 + 5 {
            assert_eq!(z.at(n), discrete_growth(&m, n), "n={n}");
        }
        assert_eq!(z.at(-1), 0);
        assert_eq!(z.at(((12 + 1) * 6) as i64), m.total_volume());
        assert!(z.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sphere_strand_example() {
        // Sphere2 with v' ≡ 2 and t_P = T_P = 4, base 0, n = 3 gives v_P(4) = 8.
        let comp = ComponentSpec {
            t_min: Rational64::from_integer(4),
            t_max: Rational64::from_integer(4),
            volume_profile: vec![0, 2, 4, 6, 8],
            marked_point_offset: Rational64::from_integer(0),
            far_point: crate::pieces::FarPoint::PlusBoundary,
            minus: Topology::Sphere,
            plus: vec![Topology::Sphere],
        };
        // clamp(n - base + 1) = 4
        assert_eq!(comp.volume_within(4), 8);
    }

    #[test]
    fn corrupted_multiplicity_is_reported_with_vertex() {
        let v = odd(12);
        let s = LevelSet::new(vec![(2, 1), (6, 1)]).unwrap();
        let mut m = build(&v, &s, &Catalog::default_catalog(), Mode::ConnectedSum);
        let vid = m.tree.trunk(4);
        let inst = m.placements[vid];
        m.instances[inst].strand_multiplicity = 3;
        let report = validate_model(&m);
        assert!(report
            .violations
            .iter()
            .any(|l| l.starts_with(&format!("vertex {vid}:")) && l.contains("multiplicity")));
    }

    #[test]
    fn block_on_wrong_interval_is_reported() {
        let v = odd(12);
        let s = LevelSet::new(vec![(2, 1)]).unwrap();
        let mut m = build(&v, &s, &one_block_catalog(), Mode::ConnectedSum);
        m.schedule = LevelSet::new(vec![(3, 1)]).unwrap();
        let report = validate_model(&m);
        assert!(!report.passed());
        assert!(report.violations.iter().any(|l| l.contains("not covered by block")), "{report}");
    }

    #[test]
    fn schedule_all_unit_blocks() {
        let cat = Catalog::default_catalog();
        let b = |j| make_block(j, 1, &[1], &ProfileShape::Flat, Topology::Sphere, &cat.bounds).unwrap();
        let cat = cat.clone().with_blocks((0..6).map(b).collect());
        let s = choose_levels(&odd(200), &cat, &ScheduleConfig::default()).unwrap();
        let starts: Vec<usize> = s.intervals().iter().map(|&(n, _)| n).collect();
        assert_eq!(starts, vec![2, 6, 18, 54, 162]);
    }

    #[test]
    fn single_block_goes_at_d() {
        let s = choose_levels(&odd(30), &one_block_catalog(), &ScheduleConfig::default()).unwrap();
        assert_eq!(s.intervals(), &[(2, 1)]);
    }

    #[test]
    fn growing_blocks_need_a_long_horizon() {
        let cat = Catalog::default_catalog();
        let b =
            |j: usize| make_block(j, j as u64 + 1, &[1], &ProfileShape::Flat, Topology::Sphere, &cat.bounds).unwrap();
        let cat = cat.clone().with_blocks((0..5).map(b).collect());
        let strict = ScheduleConfig { fit_horizon: false, ..ScheduleConfig::default() };
        let v = |n: usize| {
            CanonicalGrowthFunction::new((0..=n as u64).map(|k| 2 * k + 1).collect(), default_lambda()).unwrap()
        };
        assert!(matches!(choose_levels(&v(32), &cat, &strict), Err(AssemblyError::ScheduleNotFound(_))));
        let s = choose_levels(&v(256), &cat, &strict).unwrap();
        assert_eq!(s.intervals().len(), 5);
    }
}
