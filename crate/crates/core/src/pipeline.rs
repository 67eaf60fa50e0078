//! Run configuration and the staged pipeline behind the command line.

use std::path::{Path, PathBuf};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{
    assemble, choose_levels, discrete_growth_table, validate_model, AssemblyError, DiscreteGrowth, ManifoldModel, Mode,
    ModelReport, ScheduleConfig,
};
use crate::catalog::{Catalog, CatalogError};
use crate::growth::{default_lambda, normalize, CanonicalGrowthFunction, GrowthError, GrowthFunction, NormalizeConfig};
use crate::io::{self, IoError};
use crate::simulate::{
    ball_volume_table, growth_certificate, to_metric_graph, verify_sandwich, BallVolumeTable, Certificate,
    CertificateError, MetricGraph, SandwichReport,
};
use crate::tree::{build_tree, LevelSet, RootedTree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleMode {
    Auto,
    Explicit(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub input: PathBuf,
    /// `None` uses the shipped catalog for the mode.
    pub catalog: Option<PathBuf>,
    /// Truncates the input table when set.
    pub horizon: Option<usize>,
    pub lambda: Rational64,
    pub a_max: u64,
    pub schedule: ScheduleMode,
    pub resolution: u64,
    pub mode: Mode,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::from("growth.csv"),
            catalog: None,
            horizon: None,
            lambda: default_lambda(),
            a_max: 64,
            schedule: ScheduleMode::Auto,
            resolution: 1,
            mode: Mode::ConnectedSum,
            out: PathBuf::from("out"),
        }
    }
}

/// On-disk form of [`RunConfig`]; every field optional so a file can
/// override any subset of the flags.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub horizon: Option<usize>,
    pub lambda: Option<String>,
    pub a_max: Option<u64>,
    /// `auto` or `explicit`.
    pub schedule: Option<String>,
    /// Level schedule CSV for `schedule = "explicit"`.
    pub levels: Option<PathBuf>,
    pub resolution: Option<u64>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    /// Always true; accepted for completeness.
    pub deterministic: Option<bool>,
}

pub fn parse_lambda(s: &str) -> Result<Rational64, String> {
    let bad = || format!("bad lambda {s:?}: expected p/q or a decimal like 1.9");
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q <= 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let whole: i64 = whole.trim().parse().map_err(|_| bad())?;
    let scale = 10i64.pow(frac.len() as u32);
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Rational64::new(whole * scale + frac, scale))
}

impl RunConfig {
    /// Applies the fields present in `file`, resolving paths against `base`.
    pub fn apply(&mut self, file: &ConfigFile, base: &Path) -> Result<(), String> {
        if let Some(p) = &file.input {
            self.input = io::resolve(base, p);
        }
        if let Some(p) = &file.catalog {
            self.catalog = Some(io::resolve(base, p));
        }
        if let Some(h) = file.horizon {
            self.horizon = Some(h);
        }
        if let Some(l) = &file.lambda {
            self.lambda = parse_lambda(l)?;
        }
        if let Some(a) = file.a_max {
            self.a_max = a;
        }
        if let Some(r) = file.resolution {
            self.resolution = r;
        }
        if let Some(m) = &file.mode {
            self.mode = m.parse()?;
        }
        if let Some(o) = &file.out {
            self.out = io::resolve(base, o);
        }
        match (file.schedule.as_deref(), &file.levels) {
            (None, None) => {}
            (Some("auto"), None) => self.schedule = ScheduleMode::Auto,
            (Some("explicit") | None, Some(p)) => self.schedule = ScheduleMode::Explicit(io::resolve(base, p)),
            (Some("explicit"), None) => return Err("schedule = \"explicit\" needs a levels file".into()),
            (Some("auto"), Some(_)) => return Err("levels given with schedule = \"auto\"".into()),
            (Some(other), _) => return Err(format!("unknown schedule {other:?} (expected auto or explicit)")),
        }
        if file.deterministic == Some(false) {
            return Err("deterministic = false is not supported: every run is deterministic".into());
        }
        Ok(())
    }

    pub fn to_file(&self) -> ConfigFile {
        let (schedule, levels) = match &self.schedule {
            ScheduleMode::Auto => ("auto", None),
            ScheduleMode::Explicit(p) => ("explicit", Some(p.clone())),
        };
        ConfigFile {
            input: Some(self.input.clone()),
            catalog: self.catalog.clone(),
            horizon: self.horizon,
            lambda: Some(self.lambda.to_string()),
            a_max: Some(self.a_max),
            schedule: Some(schedule.into()),
            levels,
            resolution: Some(self.resolution),
            mode: Some(self.mode.name().into()),
            out: Some(self.out.clone()),
            deterministic: Some(true),
        }
    }

    pub fn from_toml_path(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        let file: ConfigFile =
            toml::from_str(&text).map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::default();
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.apply(&file, base).map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.resolution == 0 {
            return Err(PipelineError::Schema("resolution must be positive".into()));
        }
        if self.a_max == 0 {
            return Err(PipelineError::Schema("a-max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Normalization(GrowthError),
    #[error("{0}")]
    Verification(String),
    #[error("certificate failed at {}", match &.0.status { crate::simulate::CertificateStatus::Failed(c) => c.to_string(), _ => "?".into() })]
    Certificate(Box<Certificate>),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Normalization(_) => 2,
            Self::Verification(_) | Self::Certificate(_) => 3,
            Self::Io(_) | Self::Schema(_) => 4,
        }
    }
}

impl From<IoError> for PipelineError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => Self::Io(e.to_string()),
            IoError::Format { .. } => Self::Schema(e.to_string()),
        }
    }
}

impl From<CatalogError> for PipelineError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Schema(e.to_string()),
        }
    }
}

impl From<AssemblyError> for PipelineError {
    fn from(e: AssemblyError) -> Self {
        Self::Verification(e.to_string())
    }
}

impl From<TreeError> for PipelineError {
    fn from(e: TreeError) -> Self {
        Self::Verification(e.to_string())
    }
}

/// Stages in pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Normalize,
    Build,
    Assemble,
    Simulate,
    Certify,
}

/// Everything produced up to the requested stage.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub input: GrowthFunction,
    pub canonical: CanonicalGrowthFunction,
    pub catalog: Option<Catalog>,
    pub schedule: Option<LevelSet>,
    pub tree: Option<RootedTree>,
    pub model: Option<ManifoldModel>,
    pub report: Option<ModelReport>,
    pub z: Option<DiscreteGrowth>,
    pub graph: Option<MetricGraph>,
    pub w: Option<BallVolumeTable>,
    pub sandwich: Option<SandwichReport>,
    pub certificate: Option<Certificate>,
}

impl Run {
    pub fn alpha_max(&self) -> usize {
        self.canonical.horizon() * self.catalog.as_ref().map_or(6, |c| c.bounds.l) as usize
    }
}

pub fn load_catalog(config: &RunConfig) -> Result<Catalog, PipelineError> {
    Ok(match (&config.catalog, config.mode) {
        (Some(p), _) => Catalog::from_path(p)?,
        (None, Mode::ConnectedSum) => Catalog::default_catalog(),
        (None, Mode::LowerDimSpheres) => Catalog::default_torus_catalog(),
    })
}

pub fn load_input(config: &RunConfig) -> Result<GrowthFunction, PipelineError> {
    let v = io::read_growth_csv(&config.input)?;
    match config.horizon {
        Some(h) if h > v.horizon() => Err(PipelineError::Schema(format!(
            "{}: horizon {h} exceeds the table horizon {}",
            config.input.display(),
            v.horizon()
        ))),
        Some(h) => Ok(v.truncated(h)),
        None => Ok(v),
    }
}

/// Runs every stage up to and including `until`.
///
/// A failing verification stops the run; a failed certificate is returned
/// as [`PipelineError::Certificate`] with the full certificate attached.
pub fn run(config: &RunConfig, until: Stage) -> Result<Run, PipelineError> {
    config.validate()?;
    let input = load_input(config)?;
    let canonical =
        normalize(&input, &NormalizeConfig { lambda: config.lambda, a_max: config.a_max, ..Default::default() })
            .map_err(PipelineError::Normalization)?;
    let mut run = Run {
        config: config.clone(),
        input,
        canonical,
        catalog: None,
        schedule: None,
        tree: None,
        model: None,
        report: None,
        z: None,
        graph: None,
        w: None,
        sandwich: None,
        certificate: None,
    };
    if until == Stage::Normalize {
        return Ok(run);
    }

    let catalog = load_catalog(config)?;
    let schedule = match &config.schedule {
        ScheduleMode::Auto => {
            let cfg = ScheduleConfig { a_max: config.a_max, mode: config.mode, ..Default::default() };
            choose_levels(&run.canonical, &catalog, &cfg)?
        }
        ScheduleMode::Explicit(p) => io::read_levels_csv(p)?,
    };
    let tree = build_tree(&run.canonical, &schedule)?;
    run.catalog = Some(catalog);
    run.schedule = Some(schedule);
    run.tree = Some(tree);
    if until == Stage::Build {
        return Ok(run);
    }

    let catalog = run.catalog.as_ref().unwrap();
    let model = assemble(
        run.canonical.table(),
        run.schedule.as_ref().unwrap(),
        run.tree.as_ref().unwrap(),
        catalog,
        config.mode,
    )?;
    let report = validate_model(&model);
    run.z = Some(discrete_growth_table(&model));
    run.model = Some(model);
    let passed = report.passed();
    run.report = Some(report);
    if !passed {
        return Err(PipelineError::Verification(format!("model validation failed:\n{}", run.report.as_ref().unwrap())));
    }
    if until == Stage::Assemble {
        return Ok(run);
    }

    let model = run.model.as_ref().unwrap();
    let graph = to_metric_graph(model, config.resolution);
    let alpha_max = run.alpha_max();
    run.w = Some(ball_volume_table(&graph, alpha_max.max(run.z.as_ref().unwrap().horizon())));
    run.sandwich = Some(verify_sandwich(model, &graph, alpha_max));
    run.graph = Some(graph);
    if until == Stage::Simulate {
        return Ok(run);
    }

    match growth_certificate(run.canonical.table(), model, run.graph.as_ref().unwrap(), config.a_max, alpha_max) {
        Ok(cert) => {
            let valid = cert.is_valid();
            run.certificate = Some(cert);
            if !valid {
                return Err(PipelineError::Verification("certificate incomplete".into()));
            }
            Ok(run)
        }
        Err(CertificateError::Failed { certificate, .. }) => Err(PipelineError::Certificate(certificate)),
        Err(CertificateError::Growth(e)) => Err(PipelineError::Verification(e.to_string())),
    }
}

/// Writes every artifact the run produced into `config.out`.
pub fn write_outputs(run: &Run) -> Result<Vec<PathBuf>, PipelineError> {
    let out = &run.config.out;
    let mut written = Vec::new();
    let mut emit = |name: &str| {
        let p = out.join(name);
        written.push(p.clone());
        p
    };
    io::write_growth_csv(&emit("canonical.csv"), run.canonical.values(), ["n", "v"])?;
    io::write_text(
        &emit("witness.txt"),
        &io::witness_record(run.canonical.witness().as_ref(), run.canonical.lambda(), run.canonical.scale_witness()),
    )?;
    if let (Some(s), Some(t)) = (&run.schedule, &run.tree) {
        io::write_levels_csv(&emit("levels.csv"), s)?;
        io::write_tree_csv(&emit("tree.csv"), t)?;
        io::write_density_csv(&emit("density.csv"), &crate::tree::lower_density_profile(s, t.horizon().max(1)))?;
    }
    if let Some(m) = &run.model {
        io::write_placements_csv(&emit("placements.csv"), m)?;
        io::write_instances_csv(&emit("instances.csv"), m)?;
        io::write_attachments_csv(&emit("attachments.csv"), m)?;
    }
    if let Some(r) = &run.report {
        io::write_text(&emit("pieces.txt"), &r.to_string())?;
    }
    if let Some(z) = &run.z {
        io::write_z_csv(&emit("z.csv"), z)?;
    }
    if let Some(g) = &run.graph {
        io::write_graph_csv(&emit("graph.csv"), g)?;
    }
    if let Some(w) = &run.w {
        io::write_w_csv(&emit("w.csv"), w)?;
    }
    if let Some(s) = &run.sandwich {
        io::write_text(&emit("sandwich.txt"), &s.to_string())?;
    }
    if let Some(c) = &run.certificate {
        io::write_text(&emit("certificate.txt"), &c.to_string())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_parsing() {
        assert_eq!(parse_lambda("19/10").unwrap(), Rational64::new(19, 10));
        assert_eq!(parse_lambda("1.9").unwrap(), Rational64::new(19, 10));
        assert_eq!(parse_lambda("1.25").unwrap(), Rational64::new(5, 4));
        assert!(parse_lambda("abc").is_err());
        assert!(parse_lambda("3/0").is_err());
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            input: "/data/in.csv".into(),
            catalog: Some("/data/cat.toml".into()),
            horizon: Some(40),
            lambda: Rational64::new(3, 2),
            a_max: 32,
            schedule: ScheduleMode::Explicit("/data/levels.csv".into()),
            resolution: 2,
            mode: Mode::LowerDimSpheres,
            out: "/tmp/out".into(),
        };
        let text = toml::to_string(&cfg.to_file()).unwrap();
        let file: ConfigFile = toml::from_str(&text).unwrap();
        let mut back = RunConfig::default();
        back.apply(&file, Path::new("/elsewhere")).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(toml::to_string(&back.to_file()).unwrap(), text);
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let file = ConfigFile { input: Some("v.csv".into()), levels: Some("s.csv".into()), ..Default::default() };
        let mut cfg = RunConfig::default();
        cfg.apply(&file, Path::new("/etc/run")).unwrap();
        assert_eq!(cfg.input, PathBuf::from("/etc/run/v.csv"));
        assert_eq!(cfg.schedule, ScheduleMode::Explicit("/etc/run/s.csv".into()));
    }

    #[test]
    fn bad_config_values() {
        let mut cfg = RunConfig::default();
        let base = Path::new(".");
        assert!(cfg.apply(&ConfigFile { schedule: Some("explicit".into()), ..Default::default() }, base).is_err());
        assert!(cfg.apply(&ConfigFile { mode: Some("surgery".into()), ..Default::default() }, base).is_err());
        assert!(cfg.apply(&ConfigFile { deterministic: Some(false), ..Default::default() }, base).is_err());
    }
}
