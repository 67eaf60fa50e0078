//! Piece catalogs: the bounds plus one spec per sphere kind, the block
//! sequence `Q_0, Q_1, …` and an optional torus-cylinder.

use std::path::Path;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::growth::ceil_u64;
use crate::pieces::{
    make_block, make_sphere_piece, make_torus_cylinder, CatalogBounds, PieceError, PieceKind, PieceSpec, ProfileShape,
    SphereKind, Topology,
};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{0}")]
    Parse(String),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KindRecord {
    Sphere1,
    Sphere2,
    Sphere3,
    Block,
    TorusCylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ShapeRecord {
    Flat,
    Ramp,
    Plateau,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TopologyRecord {
    Sphere,
    Torus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsRecord {
    l: u64,
    h: u64,
    #[serde(rename = "H")]
    big_h: u64,
    d: u64,
    #[serde(rename = "U", default)]
    u: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceRecord {
    kind: KindRecord,
    #[serde(default)]
    t_units: Option<u64>,
    /// `[t_P, T_P]` override.
    #[serde(default)]
    heights: Option<[u64; 2]>,
    #[serde(default)]
    profile: Option<ShapeRecord>,
    #[serde(default)]
    params: Vec<u64>,
    #[serde(default)]
    boundary_plus: Option<Vec<usize>>,
    #[serde(default)]
    topology: Option<TopologyRecord>,
    #[serde(default)]
    p: Option<u32>,
    #[serde(default)]
    q: Option<u32>,
    #[serde(default)]
    diameter: Option<u64>,
    #[serde(default)]
    offset: Option<u64>,
    #[serde(rename = "U", default)]
    u: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    bounds: BoundsRecord,
    #[serde(default)]
    piece: Vec<Spanned<PieceRecord>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub bounds: CatalogBounds,
    pub sphere1: PieceSpec,
    pub sphere2: PieceSpec,
    pub sphere3: PieceSpec,
    pub blocks: Vec<PieceSpec>,
    pub torus: Option<PieceSpec>,
}

impl Catalog {
    /// Flat spheres only; blocks are added with [`Catalog::with_blocks`].
    pub fn spheres_only(bounds: CatalogBounds) -> Self {
        let sphere = |k| make_sphere_piece(k, &bounds, &ProfileShape::Flat);
        Self {
            sphere1: sphere(SphereKind::One),
            sphere2: sphere(SphereKind::Two),
            sphere3: sphere(SphereKind::Three),
            blocks: Vec::new(),
            torus: None,
            bounds,
        }
    }

    pub fn with_blocks(mut self, blocks: Vec<PieceSpec>) -> Self {
        self.blocks = blocks;
        self
    }

    pub fn with_torus(mut self, torus: PieceSpec) -> Self {
        self.torus = Some(torus);
        self
    }

    pub fn sphere(&self, kind: SphereKind) -> &PieceSpec {
        match kind {
            SphereKind::One => &self.sphere1,
            SphereKind::Two => &self.sphere2,
            SphereKind::Three => &self.sphere3,
        }
    }

    pub fn block_heights(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.t_units).collect()
    }

    /// Every spec in verification order: spheres, blocks, torus-cylinder.
    pub fn all_specs(&self) -> Vec<PieceSpec> {
        let mut out = vec![self.sphere1.clone(), self.sphere2.clone(), self.sphere3.clone()];
        out.extend(self.blocks.iter().cloned());
        out.extend(self.torus.iter().cloned());
        out
    }

    /// The shipped catalog: `l = 6, h = 1, H = 4, d = 2`, flat spheres
    /// (`v' ≡ 2`), a torus-cylinder `(p, q) = (1, 3)`, and five sphere blocks
    /// whose ∂⁺ counts exercise parallel strands.
    pub fn default_catalog() -> Self {
        Self::from_toml_str(DEFAULT_CATALOG).expect("shipped catalog parses")
    }

    /// Same shape as the default catalog but with torus boundaries on the blocks.
    pub fn default_torus_catalog() -> Self {
        Self::from_toml_str(DEFAULT_TORUS_CATALOG).expect("shipped catalog parses")
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CatalogError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
        let b = &file.bounds;
        let bounds = CatalogBounds { l: b.l, h: b.h, big_h: b.big_h, d: b.d, u: b.u.clone() };
        bounds
            .validate()
            .map_err(|e| CatalogError::Schema { line: line_of(text, "[bounds]"), message: e.to_string() })?;

        let mut catalog = Self::spheres_only(bounds.clone());
        let mut seen = [false; 3];
        for record in &file.piece {
            let line = line_at(text, record.span().start);
            let err = |message: String| CatalogError::Schema { line, message };
            let rec = record.get_ref();
            let shape = shape_of(rec).map_err(err)?;
            let mut spec = match rec.kind {
                KindRecord::Sphere1 | KindRecord::Sphere2 | KindRecord::Sphere3 => {
                    let (kind, slot) = match rec.kind {
                        KindRecord::Sphere1 => (SphereKind::One, 0),
                        KindRecord::Sphere2 => (SphereKind::Two, 1),
                        _ => (SphereKind::Three, 2),
                    };
                    if std::mem::replace(&mut seen[slot], true) {
                        return Err(err(format!("duplicate {} record", kind.piece_kind())));
                    }
                    reject(rec.t_units.is_some_and(|t| t != 1), "sphere pieces have t_units = 1").map_err(err)?;
                    reject(
                        rec.boundary_plus.is_some() || rec.p.is_some() || rec.q.is_some(),
                        "field not valid for sphere pieces",
                    )
                    .map_err(err)?;
                    make_sphere_piece(kind, &bounds, &shape)
                }
                KindRecord::Block => {
                    let j = catalog.blocks.len();
                    let counts = rec.boundary_plus.clone().unwrap_or_else(|| vec![1]);
                    let topology = match rec.topology.unwrap_or(TopologyRecord::Sphere) {
                        TopologyRecord::Sphere => Topology::Sphere,
                        TopologyRecord::Torus => Topology::Torus,
                    };
                    let t = rec.t_units.unwrap_or(1);
                    let mut local = bounds.clone();
                    if let Some(u) = rec.u {
                        local.u.resize(local.u.len().max(j + 1), u);
                        local.u[j] = u;
                    }
                    make_block(j, t, &counts, &shape, topology, &local).map_err(|e| err(piece_error(e)))?
                }
                KindRecord::TorusCylinder => {
                    if catalog.torus.is_some() {
                        return Err(err("duplicate torus-cylinder record".into()));
                    }
                    make_torus_cylinder(&bounds, rec.p.unwrap_or(1), rec.q.unwrap_or(3), &shape)
                        .map_err(|e| err(piece_error(e)))?
                }
            };
            apply_overrides(&mut spec, rec, &shape, &bounds).map_err(err)?;
            match spec.kind {
                PieceKind::Sphere1 => catalog.sphere1 = spec,
                PieceKind::Sphere2 => catalog.sphere2 = spec,
                PieceKind::Sphere3 => catalog.sphere3 = spec,
                PieceKind::Block => catalog.blocks.push(spec),
                PieceKind::TorusCylinder => catalog.torus = Some(spec),
            }
        }
        Ok(catalog)
    }
}

fn reject(cond: bool, message: &str) -> Result<(), String> {
    if cond {
        Err(message.to_string())
    } else {
        Ok(())
    }
}

fn piece_error(e: PieceError) -> String {
    e.to_string()
}

fn shape_of(rec: &PieceRecord) -> Result<ProfileShape, String> {
    let shape = match rec.profile.unwrap_or(match rec.kind {
        KindRecord::Block => ShapeRecord::Ramp,
        _ => ShapeRecord::Flat,
    }) {
        ShapeRecord::Flat => ProfileShape::Flat,
        ShapeRecord::Ramp => ProfileShape::Ramp,
        ShapeRecord::Plateau => ProfileShape::Plateau,
        ShapeRecord::Explicit => {
            if rec.params.is_empty() {
                return Err("explicit profile needs a non-empty params list".into());
            }
            ProfileShape::Explicit(rec.params.clone())
        }
    };
    if !matches!(shape, ProfileShape::Explicit(_)) && !rec.params.is_empty() {
        return Err(format!("params only apply to explicit profiles, not {}", shape.name()));
    }
    Ok(shape)
}

/// Heights, diameter and marked-point overrides. The resulting spec is not
/// checked here: out-of-window values are the verifier's to report.
fn apply_overrides(
    spec: &mut PieceSpec,
    rec: &PieceRecord,
    shape: &ProfileShape,
    bounds: &CatalogBounds,
) -> Result<(), String> {
    if let Some([t, big_t]) = rec.heights {
        if t == 0 || t > big_t {
            return Err(format!("heights must satisfy 0 < t_P ≤ T_P, got [{t}, {big_t}]"));
        }
        let hi = match spec.kind {
            PieceKind::Block => {
                let j = spec.block_index.unwrap_or(0);
                let u = rec.u.or_else(|| bounds.u.get(j).copied());
                let k = spec.components.len() as u64;
                u.map(|u| (u / k).max(bounds.h)).unwrap_or(bounds.big_h)
            }
            _ => bounds.big_h,
        };
        for c in &mut spec.components {
            c.t_min = Rational64::from_integer(t as i64);
            c.t_max = Rational64::from_integer(big_t as i64);
            c.volume_profile = shape.profile(ceil_u64(c.t_max) as usize, bounds.h, hi);
        }
        if spec.kind == PieceKind::Block && rec.u.is_none() && bounds.u.is_empty() {
            spec.u_bound = Some(spec.max_derivative());
        }
    }
    if let Some(d) = rec.diameter {
        if d == 0 {
            return Err("diameter must be positive".into());
        }
        spec.boundary_minus_diameter = Rational64::from_integer(d as i64);
    }
    if let Some(off) = rec.offset {
        for c in &mut spec.components {
            c.marked_point_offset = Rational64::from_integer(off as i64);
        }
    }
    Ok(())
}

fn line_at(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].matches('\n').count() + 1
}

fn line_of(text: &str, needle: &str) -> usize {
    text.find(needle).map_or(1, |i| line_at(text, i))
}

pub const DEFAULT_CATALOG: &str = include_str!("../data/catalog.toml");
pub const DEFAULT_TORUS_CATALOG: &str = include_str!("../data/catalog-torus.toml");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pieces::verify_pieces;

    #[test]
    fn shipped_catalogs_verify() {
        for cat in [Catalog::default_catalog(), Catalog::default_torus_catalog()] {
            let report = verify_pieces(&cat.all_specs(), &cat.bounds);
            assert!(report.passed(), "{report}");
            assert!(!cat.blocks.is_empty());
            assert!(cat.torus.is_some());
        }
    }

    #[test]
    fn default_sphere_volume() {
        let cat = Catalog::default_catalog();
        assert_eq!(cat.sphere2.total_volume(), 10);
    }

    #[test]
    fn unknown_field_is_rejected_with_line() {
        let text = "[bounds]\nl = 6\nh = 1\nH = 4\nd = 2\n\n[[piece]]\nkind = \"block\"\ncolour = 3\n";
        let err = Catalog::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("line 9"), "{err}");
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let text = "[bounds]\nl = 6\nh = 1\nH = 4\nd = 2\n[[piece]]\nkind = \"sphere4\"\n";
        let err = Catalog::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("line 7"), "{err}");
    }

    #[test]
    fn semantic_errors_carry_the_record_line() {
        let text = "[bounds]\nl = 6\nh = 1\nH = 4\nd = 2\n\n[[piece]]\nkind = \"sphere2\"\n\n[[piece]]\nkind = \"block\"\nboundary_plus = []\n";
        match Catalog::from_toml_str(text) {
            Err(CatalogError::Schema { line, .. }) => assert_eq!(line, 10),
            other => panic!("{other:?}"),
        }
        let text = "[bounds]\nl = 6\nh = 1\nH = 4\nd = 2\n[[piece]]\nkind = \"torus-cylinder\"\nq = 2\n";
        assert!(matches!(Catalog::from_toml_str(text), Err(CatalogError::Schema { line: 6, .. })));
    }

    #[test]
    fn height_override_reaches_the_verifier() {
        let text = "[bounds]\nl = 6\nh = 1\nH = 4\nd = 2\n[[piece]]\nkind = \"sphere3\"\nheights = [2, 7]\n";
        let cat = Catalog::from_toml_str(text).unwrap();
        let report = verify_pieces(&cat.all_specs(), &cat.bounds);
        assert_eq!(report.failed_items(2).into_iter().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn invalid_bounds() {
        let text = "[bounds]\nl = 1\nh = 1\nH = 4\nd = 2\n";
        assert!(matches!(Catalog::from_toml_str(text), Err(CatalogError::Schema { line: 1, .. })));
    }
}
