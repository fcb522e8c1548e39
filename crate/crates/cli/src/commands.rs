use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use pbn_core::complex::{
    build_lazy_witness, build_vietoris_rips, build_vr_from_graph, PointCloud, SimplicialComplex, SimplicialPair,
    WeightedGraph,
};
use pbn_core::homology::{self, boundary_matrix};
use pbn_core::io::{self, FilteredComplex};
use pbn_core::pipeline::{run_pipeline, EstimationReport, PipelineConfig, Surrogates, MAX_QUANTUM_VERTICES};
use pbn_core::{Error, ErrorCategory};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{check_scales, InputKind, RunConfig, MAX_CLASSICAL_VERTICES};

/// An error tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        match self.error.category() {
            ErrorCategory::Input => 1,
            ErrorCategory::Invariant => 2,
            ErrorCategory::Resource => 3,
        }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.error)
    }
}

type Staged<T> = std::result::Result<T, StageError>;

trait InStage<T> {
    fn stage(self, stage: &'static str) -> Staged<T>;
}

impl<T> InStage<T> for pbn_core::Result<T> {
    fn stage(self, stage: &'static str) -> Staged<T> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Parsed input, ready to be cut at any scale.
pub enum Source {
    Points(PointCloud),
    Graph(WeightedGraph),
    Complex(FilteredComplex),
    Witness(PointCloud, Vec<usize>),
}

fn open(path: &Path) -> pbn_core::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))
}

impl Source {
    pub fn load(config: &RunConfig) -> Staged<Self> {
        let load = || -> pbn_core::Result<Self> {
            let reader = open(config.input()?)?;
            Ok(match config.kind {
                InputKind::Points => Source::Points(io::read_point_cloud(reader)?),
                InputKind::Graph => Source::Graph(io::read_edge_list(reader, config.vertices)?),
                InputKind::Complex => Source::Complex(io::read_complex(reader)?),
                InputKind::Witness => {
                    Source::Witness(io::read_point_cloud(reader)?, config.landmarks.clone().unwrap_or_default())
                }
            })
        };
        load().stage("read input")
    }

    pub fn n_vertices(&self) -> usize {
        match self {
            Source::Points(c) => c.len(),
            Source::Graph(g) => g.n_vertices(),
            Source::Complex(f) => f.n,
            Source::Witness(_, l) => l.len(),
        }
    }

    fn complex(&self, scale: f64, max_dim: usize) -> pbn_core::Result<SimplicialComplex> {
        match self {
            Source::Points(c) => build_vietoris_rips(c, scale, max_dim),
            Source::Graph(g) => build_vr_from_graph(g, scale, max_dim),
            Source::Complex(f) => f.at(scale),
            Source::Witness(c, l) => build_lazy_witness(c, l, scale, max_dim),
        }
    }

    /// `K` at scale `t` and `L` at scale `s`, built up to dimension `q + 1`.
    pub fn pair(&self, t: f64, s: f64, q: usize) -> Staged<SimplicialPair> {
        check_scales(t, s).stage("build complex")?;
        let n = self.n_vertices();
        if n > MAX_CLASSICAL_VERTICES {
            return Err(Error::Resource(format!("{n} vertices exceed the {MAX_CLASSICAL_VERTICES}-vertex cap")))
                .stage("build complex");
        }
        let k = self.complex(t, q + 1).stage("build complex")?;
        let l = self.complex(s, q + 1).stage("build complex")?;
        SimplicialPair::new(k, l).stage("build pair")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalReport {
    pub n_vertices: usize,
    pub q: usize,
    pub t: f64,
    pub s: f64,
    pub n_q_k: usize,
    pub n_q_l: usize,
    /// Persistent Betti number from the persistent Laplacian kernel.
    pub betti: usize,
    pub betti_rank_oracle: usize,
    pub betti_k: usize,
    pub betti_l: usize,
    /// `betti / n_q_k`, absent when `K` has no q-simplices.
    pub normalized: Option<f64>,
    pub spectrum: Vec<f64>,
}

pub fn classical(pair: &SimplicialPair, q: usize, t: f64, s: f64) -> Staged<ClassicalReport> {
    let stage = "classical persistent Betti";
    let lap = homology::persistent_laplacian(pair, q).stage(stage)?;
    let betti = lap.nullity();
    let betti_rank_oracle = homology::persistent_betti_rank(pair, q).stage(stage)?;
    if betti != betti_rank_oracle {
        return Err(Error::invariant(stage, format!("nullity {betti} disagrees with the rank oracle {betti_rank_oracle}")))
            .stage(stage);
    }
    let n_q_k = pair.small().count(q).stage(stage)?;
    Ok(ClassicalReport {
        n_vertices: pair.n_vertices(),
        q,
        t,
        s,
        n_q_k,
        n_q_l: pair.large().count(q).stage(stage)?,
        betti,
        betti_rank_oracle,
        betti_k: homology::betti_number(pair.small(), q).stage(stage)?,
        betti_l: homology::betti_number(pair.large(), q).stage(stage)?,
        normalized: (n_q_k > 0).then(|| betti as f64 / n_q_k as f64),
        spectrum: lap.eigenvalues(),
    })
}

fn pipeline_config(config: &RunConfig) -> PipelineConfig {
    let mut pc = PipelineConfig::new(config.eps, config.eta, config.seed);
    pc.gamma = config.gamma;
    pc.lambda = config.lambda;
    if config.exact {
        pc.surrogates = Surrogates::all();
    }
    pc
}

pub fn quantum(pair: &SimplicialPair, q: usize, config: &RunConfig) -> Staged<EstimationReport> {
    let stage = "quantum simulation";
    let n = pair.n_vertices();
    if n > MAX_QUANTUM_VERTICES {
        return Err(Error::Resource(format!("{n} vertices exceed the {MAX_QUANTUM_VERTICES}-vertex cap for quantum-sim mode")))
            .stage(stage);
    }
    run_pipeline(pair, q, &pipeline_config(config)).stage(stage)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub classical: f64,
    pub simulated: f64,
    pub difference: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub estimate: f64,
    pub estimate_difference: f64,
    pub eps: f64,
    pub estimate_within_eps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub load_seconds: f64,
    pub classical_seconds: Option<f64>,
    pub quantum_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub classical: Option<ClassicalReport>,
    pub quantum: Option<EstimationReport>,
    pub discrepancy: Option<Discrepancy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

fn write_output(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> pbn_core::Result<()>) -> Staged<()> {
    let result = match out {
        Some(path) => File::create(path).map_err(Error::from).and_then(|f| {
            let mut w = std::io::BufWriter::new(f);
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    };
    result.stage("write output")
}

pub fn run(config: RunConfig, timings: bool) -> Staged<RunReport> {
    config.validate().stage("configuration")?;
    let (t, s) = config.scales().stage("configuration")?;
    let q = config.q;

    let clock = Instant::now();
    let source = Source::load(&config)?;
    let pair = source.pair(t, s, q)?;
    let load_seconds = clock.elapsed().as_secs_f64();
    info!("built pair on {} vertices: n_q(K) = {:?}, n_q(L) = {:?}", pair.n_vertices(), pair.small().count(q), pair.large().count(q));

    let clock = Instant::now();
    let classical_report = if config.mode.classical() { Some(classical(&pair, q, t, s)?) } else { None };
    let classical_seconds = config.mode.classical().then(|| clock.elapsed().as_secs_f64());
    if let Some(c) = &classical_report {
        info!("classical persistent Betti {} (K: {}, L: {})", c.betti, c.betti_k, c.betti_l);
    }

    let clock = Instant::now();
    let quantum_report = if config.mode.quantum() { Some(quantum(&pair, q, &config)?) } else { None };
    let quantum_seconds = config.mode.quantum().then(|| clock.elapsed().as_secs_f64());
    if let Some(r) = &quantum_report {
        info!("simulated p1 = {} (exact {}), estimate {}", r.p1_tilde, r.p1_exact, r.estimate.mean);
    }

    let discrepancy = match (&classical_report, &quantum_report) {
        (Some(c), Some(r)) => {
            let classical = c.normalized.unwrap_or(f64::NAN);
            let difference = (r.p1_tilde - classical).abs();
            let estimate_difference = (r.estimate.mean - classical).abs();
            Some(Discrepancy {
                classical,
                simulated: r.p1_tilde,
                difference,
                bound: r.budget.bound,
                within_bound: difference <= r.budget.bound,
                estimate: r.estimate.mean,
                estimate_difference,
                eps: config.eps,
                estimate_within_eps: estimate_difference <= config.eps,
            })
        }
        _ => None,
    };

    let out = config.out.clone();
    let report = RunReport {
        config,
        classical: classical_report,
        quantum: quantum_report,
        discrepancy,
        timings: timings.then_some(Timings { load_seconds, classical_seconds, quantum_seconds }),
    };
    write_output(out.as_deref(), |w| io::write_json(w, &report))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub t: f64,
    pub s: f64,
    pub n_q_k: usize,
    pub n_q_l: usize,
    pub betti: usize,
    pub normalized: Option<f64>,
    pub simulated: Option<f64>,
    pub estimate: Option<f64>,
    /// `ok`, `not-requested`, `undefined` or `resource`.
    pub status: &'static str,
}

fn curve_cell(source: &Source, config: &RunConfig, t: f64, s: f64) -> Staged<CurveRow> {
    let q = config.q;
    let pair = source.pair(t, s, q)?;
    let c = classical(&pair, q, t, s)?;
    // cells past the simulator's reach keep their classical value
    let (sim, status) = if !config.mode.quantum() {
        (None, "not-requested")
    } else if c.n_q_k == 0 {
        (None, "undefined")
    } else {
        match quantum(&pair, q, config) {
            Ok(r) => (Some(r), "ok"),
            Err(e) if e.exit_code() == 3 => {
                warn!("cell t = {t}, s = {s}: {e}");
                (None, "resource")
            }
            Err(e) => return Err(e),
        }
    };
    Ok(CurveRow {
        t,
        s,
        n_q_k: c.n_q_k,
        n_q_l: c.n_q_l,
        betti: c.betti,
        normalized: c.normalized,
        simulated: sim.as_ref().map(|r| r.p1_tilde),
        estimate: sim.as_ref().map(|r| r.estimate.mean),
        status,
    })
}

/// Every `(t, s)` with `t` from `t_grid`, `s` from `s_grid` and `t <= s`.
pub fn grid_cells(t_grid: &[f64], s_grid: &[f64]) -> Vec<(f64, f64)> {
    t_grid.iter().flat_map(|&t| s_grid.iter().filter(move |&&s| t <= s).map(move |&s| (t, s))).collect()
}

pub fn curve(config: RunConfig, t_grid: &[f64], s_grid: &[f64]) -> Staged<Vec<CurveRow>> {
    config.validate().stage("configuration")?;
    if t_grid.iter().chain(s_grid).any(|v| !v.is_finite()) {
        return Err(Error::Input("grid values must be finite".into())).stage("configuration");
    }
    let cells = grid_cells(t_grid, s_grid);
    if cells.is_empty() {
        return Err(Error::Input("grid has no cell with t <= s".into())).stage("configuration");
    }
    let source = Source::load(&config)?;
    info!("evaluating {} grid cells", cells.len());
    let rows = cells.par_iter().map(|&(t, s)| curve_cell(&source, &config, t, s)).collect::<Staged<Vec<_>>>()?;
    write_output(config.out.as_deref(), |w| write_curve(w, &rows))?;
    Ok(rows)
}

fn optional(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_curve(w: &mut dyn Write, rows: &[CurveRow]) -> pbn_core::Result<()> {
    writeln!(w, "t,s,n_q_k,n_q_l,betti,normalized,simulated,estimate,status")?;
    for r in rows {
        writeln!(
            w,
            "{:?},{:?},{},{},{},{},{},{},{}",
            r.t,
            r.s,
            r.n_q_k,
            r.n_q_l,
            r.betti,
            optional(r.normalized),
            optional(r.simulated),
            optional(r.estimate),
            r.status
        )?;
    }
    Ok(())
}

/// Writes the pair's complexes, boundary matrices, persistent Laplacian and
/// its spectrum into `dir`.
pub fn export(config: RunConfig, dir: &Path) -> Staged<Vec<String>> {
    config.validate().stage("configuration")?;
    let (t, s) = config.scales().stage("configuration")?;
    let q = config.q;
    let source = Source::load(&config)?;
    let pair = source.pair(t, s, q)?;
    let stage = "export";
    std::fs::create_dir_all(dir).map_err(Error::from).stage(stage)?;

    let mut written = Vec::new();
    let mut file = |name: String, write: &dyn Fn(&mut dyn Write) -> pbn_core::Result<()>| -> Staged<()> {
        write_output(Some(&dir.join(&name)), |w| write(w))?;
        written.push(name);
        Ok(())
    };
    file("complex_k.json".into(), &|w| io::write_json(w, &pair.small().export()))?;
    file("complex_l.json".into(), &|w| io::write_json(w, &pair.large().export()))?;
    for d in [q, q + 1] {
        let b = boundary_matrix(if d == q { pair.small() } else { pair.large() }, d).stage(stage)?;
        let name = if d == q { format!("boundary_k_{d}.mtx") } else { format!("boundary_l_{d}.mtx") };
        file(name, &|w| io::write_matrix_market(w, &b))?;
    }
    let lap = homology::persistent_laplacian(&pair, q).stage(stage)?;
    file(format!("persistent_laplacian_{q}.csv"), &|w| io::write_dense_csv(w, &lap.matrix))?;
    file(format!("spectrum_{q}.json"), &|w| io::write_json(w, &lap.eigenvalues()))?;
    Ok(written)
}
