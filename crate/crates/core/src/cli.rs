//! The `connsum` command line.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::assembly::Mode;
use crate::io;
use crate::pipeline::{self, parse_lambda, ConfigFile, PipelineError, Run, RunConfig, Stage};

#[derive(Debug, Parser)]
#[command(name = "connsum", version, about = "Synthesize and certify volume growth of infinite connected sums")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Growth table CSV with header `n,v`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Piece catalog (TOML); the shipped catalog when omitted.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Truncate the input table to levels `0..=N`.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Exponential base for the canonical form, as `p/q` or a decimal.
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// Largest growth-type witness searched.
    #[arg(long = "a-max", global = true)]
    pub a_max: Option<u64>,
    /// Graph edges per unit length.
    #[arg(long, global = true)]
    pub resolution: Option<u64>,
    /// `connected-sum` or `lower-dim-spheres`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// `auto` or `explicit` (explicit needs --levels).
    #[arg(long, global = true)]
    pub schedule: Option<String>,
    /// Level schedule CSV with header `n_j,t_j`.
    #[arg(long, global = true)]
    pub levels: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run configuration (TOML); its values override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Canonical form of the input table and its equivalence witness.
    Normalize,
    /// Level schedule, growth tree and density profile.
    Build,
    /// Piece placement, model report and the discrete growth `z`.
    Assemble,
    /// Metric graph, ball volumes `w` and the sandwich report.
    Simulate,
    /// Full pipeline and the growth certificate.
    Certify,
    /// Aligned `n, n·l, v, z, w` table for plotting.
    Plot {
        /// Skip the graph stage and mark `w` as NA.
        #[arg(long)]
        skip_w: bool,
    },
}

impl Flags {
    fn to_file(&self) -> ConfigFile {
        ConfigFile {
            input: self.input.clone(),
            catalog: self.catalog.clone(),
            horizon: self.horizon,
            lambda: self.lambda.clone(),
            a_max: self.a_max,
            schedule: self.schedule.clone(),
            levels: self.levels.clone(),
            resolution: self.resolution,
            mode: self.mode.clone(),
            out: self.out.clone(),
            deterministic: None,
        }
    }
}

/// Flags first, then the config file on top.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig, PipelineError> {
    let mut cfg = RunConfig::default();
    let cwd = std::env::current_dir().map_err(|e| PipelineError::Io(e.to_string()))?;
    cfg.apply(&flags.to_file(), &cwd).map_err(PipelineError::Schema)?;
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        let file: ConfigFile =
            toml::from_str(&text).map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(|p| cwd.join(p)).unwrap_or_else(|| cwd.clone());
        cfg.apply(&file, &base).map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?;
    }
    if let Some(l) = &flags.lambda {
        parse_lambda(l).map_err(PipelineError::Schema)?;
    }
    Ok(cfg)
}

fn summary(run: &Run) {
    let c = &run.canonical;
    match c.witness() {
        Some(w) => println!(
            "normalize: horizon={} A={} checked_range={} C={}",
            c.horizon(),
            w.a,
            w.checked_range,
            c.scale_witness().scale
        ),
        None => println!("normalize: horizon={}", c.horizon()),
    }
    if let (Some(s), Some(t)) = (&run.schedule, &run.tree) {
        println!("build: intervals={:?} vertices={}", s.intervals(), t.len());
        for level in s.adjacency_warnings() {
            println!("warning: interval ending at {level} is followed immediately by the next one");
        }
    }
    if let (Some(m), Some(z)) = (&run.model, &run.z) {
        println!(
            "assemble: instances={} total_volume={} z({})={}",
            m.instances.len(),
            m.total_volume(),
            z.horizon(),
            z.at(z.horizon() as i64)
        );
        if m.mode == Mode::LowerDimSpheres {
            let tori = m.attachments.iter().filter(|a| a.topology == crate::pieces::Topology::Torus).count();
            println!("assemble: torus interfaces={tori} sphere interfaces={}", m.attachments.len() - tori);
        }
    }
    if let (Some(g), Some(s)) = (&run.graph, &run.sandwich) {
        println!(
            "simulate: nodes={} edges={} epsilon_shell={} sandwich={}",
            g.node_count(),
            g.edges.len(),
            s.epsilon_shell,
            if s.passed() { "PASS" } else { "FAIL" }
        );
    }
    if let Some(cert) = &run.certificate {
        println!("certify: {}", cert.to_string().lines().next().unwrap_or(""));
    }
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    let cfg = resolve_config(&cli.flags)?;
    let stage = match cli.command {
        Command::Normalize => Stage::Normalize,
        Command::Build => Stage::Build,
        Command::Assemble => Stage::Assemble,
        Command::Simulate => Stage::Simulate,
        Command::Certify => Stage::Certify,
        Command::Plot { skip_w: true } => Stage::Assemble,
        Command::Plot { skip_w: false } => Stage::Simulate,
    };
    let result = pipeline::run(&cfg, stage);
    let run = match result {
        Ok(run) => run,
        Err(PipelineError::Certificate(cert)) => {
            io::write_text(&cfg.out.join("certificate.txt"), &cert.to_string())?;
            print!("{cert}");
            return Err(PipelineError::Certificate(cert));
        }
        Err(e) => return Err(e),
    };
    summary(&run);
    match cli.command {
        Command::Plot { .. } => {
            let z = run.z.as_ref().expect("assembled");
            let path = cfg.out.join("plot.csv");
            io::write_plot_csv(
                &path,
                run.canonical.values(),
                run.catalog.as_ref().unwrap().bounds.l,
                z,
                run.w.as_ref(),
            )?;
            println!("plot: wrote {} (index bridge nl = n·l)", path.display());
        }
        _ => {
            for p in pipeline::write_outputs(&run)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 4 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let PipelineError::Normalization(_) = &e {
                let a_max = resolve_config(&cli.flags).map_or(0, |c| c.a_max);
                let budget = crate::growth::NormalizeConfig::default().scale_budget;
                eprintln!("normalization budget: a_max={a_max} scale_budget={budget}");
            }
            e.exit_code()
        }
    }
}
