//! CSV and key-value formats for tables, trees, models, graphs and reports.

use std::fs;
use std::path::{Path, PathBuf};

use num_rational::{Ratio, Rational64};
use thiserror::Error;

use crate::assembly::{DiscreteGrowth, ManifoldModel};
use crate::growth::{GrowthClassWitness, GrowthError, GrowthFunction, ScaleWitness};
use crate::simulate::{BallVolumeTable, MetricGraph};
use crate::tree::{LevelSet, RootedTree};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format { path: path.display().to_string(), message: message.into() }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |e| format_err(path, e.to_string())
}

/// Reads a two-column `(n, v(n))` table with a header row; `n` must run
/// `0, 1, 2, …` without gaps.
pub fn read_growth_csv(path: &Path) -> Result<GrowthFunction, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_growth_csv(&text).map_err(|m| format_err(path, m))
}

pub fn parse_growth_csv(text: &str) -> Result<GrowthFunction, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.len() != 2 {
        return Err(format!("expected a two-column header (n, v), found {} columns", headers.len()));
    }
    if headers.iter().any(|h| h.parse::<u64>().is_ok()) {
        return Err("missing header row".into());
    }
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(i + 2, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(format!("line {line}: expected 2 fields, found {}", record.len()));
        }
        let n: usize = record[0].parse().map_err(|_| format!("line {line}: bad index {:?}", &record[0]))?;
        let v: u64 = record[1].parse().map_err(|_| format!("line {line}: bad value {:?}", &record[1]))?;
        if n != values.len() {
            return Err(format!("line {line}: index {n} out of sequence (expected {})", values.len()));
        }
        values.push(v);
    }
    GrowthFunction::new(values).map_err(|e: GrowthError| e.to_string())
}

fn create(path: &Path) -> Result<csv::Writer<fs::File>, IoError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    csv::Writer::from_path(path).map_err(csv_err(path))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_growth_csv(path: &Path, values: &[u64], header: [&str; 2]) -> Result<(), IoError> {
    write_rows(path, &header, values.iter().enumerate().map(|(n, v)| [n.to_string(), v.to_string()]))
}

/// `A`, `checked_range`, `lambda` and `C` as `key=value` lines.
pub fn witness_record(witness: Option<&GrowthClassWitness>, lambda: Rational64, scale: ScaleWitness) -> String {
    let mut s = String::new();
    match witness {
        Some(w) => {
            s += &format!("A={}\n", w.a);
            s += &format!("checked_range={}\n", w.checked_range);
        }
        None => s += "A=not-found\n",
    }
    s += &format!("lambda={lambda}\n");
    s += &format!("C={}\n", scale.scale);
    s += &format!("C_argmax={}\n", scale.argmax);
    s
}

pub fn write_tree_csv(path: &Path, tree: &RootedTree) -> Result<(), IoError> {
    write_rows(
        path,
        &["id", "level", "order", "parent", "trunk"],
        tree.vertices().iter().map(|v| {
            [
                v.id.to_string(),
                v.level.to_string(),
                v.order.to_string(),
                v.parent.map_or(String::new(), |p| p.to_string()),
                v.trunk.to_string(),
            ]
        }),
    )
}

pub fn write_levels_csv(path: &Path, s: &LevelSet) -> Result<(), IoError> {
    write_rows(path, &["n_j", "t_j"], s.intervals().iter().map(|&(n, t)| [n.to_string(), t.to_string()]))
}

pub fn read_levels_csv(path: &Path) -> Result<LevelSet, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    let mut intervals = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<usize, IoError> {
            record
                .get(i)
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| format_err(path, format!("line {line}: expected two non-negative integers")))
        };
        intervals.push((field(0)?, field(1)?));
    }
    LevelSet::new(intervals).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_density_csv(path: &Path, profile: &crate::tree::DensityProfile) -> Result<(), IoError> {
    write_rows(
        path,
        &["k", "density", "running_min"],
        profile
            .density
            .iter()
            .zip(&profile.running_min)
            .enumerate()
            .map(|(i, (d, m))| [(i + 1).to_string(), d.to_string(), m.to_string()]),
    )
}

pub fn write_placements_csv(path: &Path, model: &ManifoldModel) -> Result<(), IoError> {
    write_rows(
        path,
        &["vertex", "instance"],
        model.placements.iter().enumerate().map(|(v, i)| [v.to_string(), i.to_string()]),
    )
}

pub fn write_instances_csv(path: &Path, model: &ManifoldModel) -> Result<(), IoError> {
    write_rows(
        path,
        &["id", "kind", "level", "base", "multiplicity", "block", "trunk", "strand_kind", "side_legs", "volume"],
        model.instances.iter().map(|i| {
            [
                i.id.to_string(),
                model.specs[i.spec].kind.to_string(),
                i.level.to_string(),
                i.base.to_string(),
                i.strand_multiplicity.to_string(),
                i.block.map_or(String::new(), |b| b.to_string()),
                i.trunk.to_string(),
                model.specs[i.strand_spec].kind.to_string(),
                i.extra_side_legs.to_string(),
                model.instance_volume(i).to_string(),
            ]
        }),
    )
}

pub fn write_attachments_csv(path: &Path, model: &ManifoldModel) -> Result<(), IoError> {
    write_rows(
        path,
        &["parent", "parent_unit", "slot", "child", "child_unit", "topology"],
        model.attachments.iter().map(|a| {
            [
                a.parent.to_string(),
                a.parent_unit.to_string(),
                a.slot.to_string(),
                a.child.to_string(),
                a.child_unit.to_string(),
                a.topology.to_string(),
            ]
        }),
    )
}

pub fn write_z_csv(path: &Path, z: &DiscreteGrowth) -> Result<(), IoError> {
    write_growth_csv(path, &z.values, ["n", "z"])
}

pub fn write_graph_csv(path: &Path, g: &MetricGraph) -> Result<(), IoError> {
    write_rows(
        path,
        &["u", "v", "length", "density"],
        g.edges
            .iter()
            .map(|e| [e.u.to_string(), e.v.to_string(), g.edge_length().to_string(), g.density(e).to_string()]),
    )
}

pub fn write_w_csv(path: &Path, w: &BallVolumeTable) -> Result<(), IoError> {
    write_rows(path, &["alpha", "w"], (0..=w.horizon()).map(|a| [a.to_string(), w.at(a).to_string()]))
}

/// Exact decimal rendering with six fractional digits, rounded down.
pub fn decimal(x: Ratio<u64>) -> String {
    let whole = x.to_integer();
    let frac = (x.numer() % x.denom()) as u128 * 1_000_000 / *x.denom() as u128;
    format!("{whole}.{frac:06}")
}

/// Rows `n, n·l, v(n), z(n·l), w(n·l)`; `w` is `NA` when absent.
pub fn write_plot_csv(
    path: &Path,
    v: &[u64],
    l: u64,
    z: &DiscreteGrowth,
    w: Option<&BallVolumeTable>,
) -> Result<(), IoError> {
    write_rows(
        path,
        &["n", "nl", "v", "z", "w"],
        v.iter().enumerate().map(|(n, &vn)| {
            let nl = n as u64 * l;
            let wn = w.map_or("NA".to_string(), |w| decimal(w.at(nl as usize)));
            [n.to_string(), nl.to_string(), vn.to_string(), z.at(nl as i64).to_string(), wn]
        }),
    )
}

/// Resolves `p` against `base` unless it is absolute.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        write_growth_csv(&p, &[1, 3, 5, 7], ["n", "v"]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "n,v\n0,1\n1,3\n2,5\n3,7\n");
        assert_eq!(read_growth_csv(&p).unwrap().values(), &[1, 3, 5, 7]);
    }

    #[test]
    fn growth_csv_rejects_bad_tables() {
        assert!(parse_growth_csv("0,1\n1,2\n").unwrap_err().contains("header"));
        assert!(parse_growth_csv("n,v\n0,1\n2,2\n").unwrap_err().contains("out of sequence"));
        assert!(parse_growth_csv("n,v\n1,1\n").is_err());
        assert!(parse_growth_csv("n,v\n0,3\n1,2\n").is_err());
        assert!(parse_growth_csv("n,v,x\n0,1,1\n").is_err());
        assert!(parse_growth_csv("n,v\n0,x\n").unwrap_err().contains("line 2"));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(decimal(Ratio::new(7, 2)), "3.500000");
        assert_eq!(decimal(Ratio::new(1, 3)), "0.333333");
        assert_eq!(decimal(Ratio::from_integer(12)), "12.000000");
    }

    #[test]
    fn levels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("levels.csv");
        let s = LevelSet::new(vec![(2, 1), (6, 2)]).unwrap();
        write_levels_csv(&p, &s).unwrap();
        assert_eq!(read_levels_csv(&p).unwrap(), s);
    }
}
