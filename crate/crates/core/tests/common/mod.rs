#![allow(dead_code)]

use connsum::assembly::{assemble, choose_levels, ManifoldModel, Mode, ScheduleConfig};
use connsum::catalog::Catalog;
use connsum::growth::{normalize, CanonicalGrowthFunction, GrowthFunction, NormalizeConfig};
use connsum::simulate::{growth_certificate, to_metric_graph, Certificate, CertificateError, MetricGraph};
use connsum::tree::{build_tree, LevelSet};

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

type Increments = Box<dyn Fn(u64) -> u64>;

/// The ten canonical tables: linear, three quadratic-like, three capped
/// doublings and three slow ramps. Increments `d(n)` start at `n = 0`.
pub fn tables(horizon: usize) -> Vec<(String, GrowthFunction)> {
    let mut out: Vec<(String, Increments)> = vec![("linear 2n+1".into(), Box::new(|_| 2))];
    for cap in [20, 40, u64::MAX] {
        let name = if cap == u64::MAX { "quadratic".to_string() } else { format!("quadratic cap {cap}") };
        out.push((name, Box::new(move |n| (2 * n + 2).min(cap))));
    }
    for cap in [16, 32, 64] {
        out.push((format!("doubling cap {cap}"), Box::new(move |n| (1u64 << (n + 1).min(20)).min(cap))));
    }
    out.push(("ramp n/3".into(), Box::new(|n| 2 + n / 3)));
    out.push(("ramp n/6".into(), Box::new(|n| 2 + n / 6)));
    out.push(("ramp sqrt".into(), Box::new(|n| 2 + isqrt(n))));
    out.into_iter()
        .map(|(name, d)| {
            let incs: Vec<u64> = (0..horizon as u64).map(&d).collect();
            (name, GrowthFunction::from_increments(1, &incs))
        })
        .collect()
}

pub fn canonical(v: &GrowthFunction) -> CanonicalGrowthFunction {
    normalize(v, &NormalizeConfig::default()).expect("table is canonical")
}

pub struct Pipeline {
    pub v: CanonicalGrowthFunction,
    pub schedule: LevelSet,
    pub model: ManifoldModel,
    pub graph: MetricGraph,
}

impl Pipeline {
    pub fn alpha_max(&self) -> usize {
        self.v.horizon() * self.model.l() as usize
    }

    pub fn certificate(&self, a_max: u64) -> Result<Certificate, CertificateError> {
        growth_certificate(self.v.table(), &self.model, &self.graph, a_max, self.alpha_max())
    }
}

/// Auto schedule, assembly and graph at `resolution` with the shipped catalog.
pub fn pipeline(v: &GrowthFunction, mode: Mode, resolution: u64) -> Pipeline {
    let v = canonical(v);
    let catalog = match mode {
        Mode::ConnectedSum => Catalog::default_catalog(),
        Mode::LowerDimSpheres => Catalog::default_torus_catalog(),
    };
    let schedule = choose_levels(&v, &catalog, &ScheduleConfig { mode, ..Default::default() }).expect("schedule");
    let tree = build_tree(&v, &schedule).expect("tree");
    let model = assemble(v.table(), &schedule, &tree, &catalog, mode).expect("assembly");
    let graph = to_metric_graph(&model, resolution);
    Pipeline { v, schedule, model, graph }
}
