//! Scenario runner behind the `exact-dfs` binary.
//!
//! Files written by `run`, per separation `Δm` (negative values print as
//! `dm_-3`):
//!
//! * `dm_<Δm>.csv`: header `t,re_alpha1,im_alpha1,re_alpha2,im_alpha2,population,concurrence`,
//!   lab-frame amplitudes, every value as `{:.15e}`.
//! * `dm_<Δm>.json`: the [`EntrySummary`] of that separation.
//! * `summary.json`: `{version, scenario, entries: [EntrySummary...]}`.
//!
//! `oracle-check` writes `oracle_<Δm>.json` and, when
//! `output.spectrum_csv = true`, `spectrum_<Δm>.csv` plus `bic_<Δm>_<index>.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::bath::BathModel;
use crate::boundstate::{bic_solve_with, DfsReport};
use crate::dynamics::{
    pole_residues, revival_time, simulate, steady_estimate, steady_state_prediction, SimulationSettings, Trajectory,
    WindowStats,
};
use crate::error::Error;
use crate::markovian::{bma_dfs_criterion, markovian_rates, EmitterPair};
use crate::oracle::{build_hamiltonian, evolve_spectrum, find_bic_spectral, write_eigenvector_csv, write_spectrum_csv};
use crate::scenario::{OutputKind, Scenario, ScenarioError};
use crate::sector::BranchSign;

pub const VERSION: &str = concat!("exact-dfs ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(_) => 1,
            RunError::Parse(_) => 2,
            RunError::Validation(_) => 3,
            RunError::Numeric(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Io(_) => "io",
            RunError::Parse(_) => "parse",
            RunError::Validation(_) => "validation",
            RunError::Numeric(_) => "numeric",
        }
    }

    /// Single-line JSON for stderr.
    pub fn reason_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "exit": self.exit_code(), "reason": self.to_string() }).to_string()
    }

    fn numeric(separation: i64, e: Error) -> Self {
        RunError::Numeric(format!("separation {separation}: {e}"))
    }
}

impl From<ScenarioError> for RunError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Read { .. } | ScenarioError::Parse(_) => RunError::Parse(e.to_string()),
            ScenarioError::Invalid(m) => RunError::Validation(m),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
}

/// A validated scenario together with its worker count.
#[derive(Debug, Clone)]
pub struct Job {
    pub scenario: Scenario,
    pub workers: usize,
}

impl Job {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, RunError> {
        Self::new(Scenario::load(path)?, overrides)
    }

    pub fn new(mut scenario: Scenario, overrides: &Overrides) -> Result<Self, RunError> {
        if let Some(out) = &overrides.out {
            scenario.output.directory = out.clone();
        }
        if let Some(h) = overrides.horizon {
            scenario.dynamics.horizon = h;
        }
        if let Some(s) = overrides.step {
            scenario.dynamics.step = s;
        }
        if overrides.workers == Some(0) {
            return Err(RunError::Validation("--workers must be >= 1".into()));
        }
        scenario.validate()?;
        let workers = overrides.workers.unwrap_or_else(|| rayon::current_num_threads().max(1));
        Ok(Self { scenario, workers })
    }

    fn bath(&self) -> Result<BathModel<f64>, RunError> {
        Ok(self.scenario.bath_model()?)
    }

    fn out_dir(&self) -> Result<&Path, RunError> {
        let dir = self.scenario.output.directory.as_path();
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(dir)
    }

    /// Runs `f` over the sweep on a pool of `workers` threads, in sweep order.
    fn sweep<R: Send>(&self, f: impl Fn(i64) -> Result<R, RunError> + Sync + Send) -> Result<Vec<R>, RunError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| RunError::Io(e.to_string()))?;
        pool.install(|| self.scenario.emitters.separations.par_iter().map(|&dm| f(dm)).collect())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BmaVerdict {
    pub exists: bool,
    pub l: Option<i64>,
    pub sign: Option<BranchSign>,
    /// `k Δm x0/π` at every resonant wavevector.
    pub orders: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BicVerdict {
    pub exists: bool,
    pub l: Option<i64>,
    pub sign: Option<BranchSign>,
    pub e0: Option<f64>,
    pub weight_c2: Option<f64>,
    /// `|C|⁴/2`, zero without a bound state.
    pub steady_value: f64,
}

impl From<&DfsReport<f64>> for BicVerdict {
    fn from(r: &DfsReport<f64>) -> Self {
        Self {
            exists: r.exists,
            l: r.l,
            sign: r.branch_sign,
            e0: r.e0,
            weight_c2: r.weight_c2,
            steady_value: r.steady_population,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesSummary {
    pub resonant: bool,
    pub gamma: [[f64; 2]; 2],
    pub omega_shift: [[f64; 2]; 2],
}

fn rows(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleSummary {
    pub energy: f64,
    pub energy_minus_e0: f64,
    pub residue1: [f64; 2],
    pub residue2: [f64; 2],
    /// `|Z₁| − |C|²/2`.
    pub residue_minus_prediction: f64,
    pub refinement_change: f64,
}

/// Predicted and measured values always travel together.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub predicted: f64,
    pub measured: f64,
    pub abs_difference: f64,
    pub window_std: f64,
    pub window_drift: f64,
}

impl Comparison {
    fn new(predicted: f64, w: &WindowStats<f64>) -> Self {
        Self {
            predicted,
            measured: w.mean,
            abs_difference: (w.mean - predicted).abs(),
            window_std: w.std,
            window_drift: w.drift,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsSummary {
    pub horizon: f64,
    pub step: f64,
    pub step_error: f64,
    pub steps: usize,
    pub window_start: f64,
    pub window_end: f64,
    pub revival_time: f64,
    pub revival_risk: bool,
    pub population: Comparison,
    pub concurrence: Comparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntrySummary {
    pub version: String,
    pub scenario: String,
    pub separation: i64,
    pub site1: i64,
    pub site2: i64,
    pub bma: BmaVerdict,
    pub bic: BicVerdict,
    pub markovian: Option<RatesSummary>,
    pub pole: Option<PoleSummary>,
    pub dynamics: DynamicsSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: String,
    pub scenario: String,
    pub entries: Vec<EntrySummary>,
}

fn bma_verdict(job: &Job, bath: &BathModel<f64>, em: &EmitterPair<f64>) -> BmaVerdict {
    let r = bma_dfs_criterion(bath, em, job.scenario.tolerances.integer);
    BmaVerdict { exists: r.exists, l: r.l, sign: r.sign, orders: r.orders }
}

fn rates_summary(bath: &BathModel<f64>, em: &EmitterPair<f64>, dm: i64) -> Result<RatesSummary, RunError> {
    match markovian_rates(bath, em) {
        Ok(r) => Ok(RatesSummary { resonant: r.resonant, gamma: rows(&r.gamma), omega_shift: rows(&r.omega_shift) }),
        Err(e) => Err(RunError::numeric(dm, e)),
    }
}

fn pole_summary(bath: &BathModel<f64>, em: &EmitterPair<f64>, report: &DfsReport<f64>, dm: i64) -> Result<Option<PoleSummary>, RunError> {
    if !report.exists {
        return Ok(None);
    }
    let p = pole_residues(bath, em).map_err(|e| RunError::numeric(dm, e))?;
    let e0 = report.e0.unwrap_or(f64::NAN);
    let half = report.weight_c2.unwrap_or(f64::NAN) * 0.5;
    Ok(Some(PoleSummary {
        energy: p.pole_energy,
        energy_minus_e0: p.pole_energy - e0,
        residue1: [p.residue1.re, p.residue1.im],
        residue2: [p.residue2.re, p.residue2.im],
        residue_minus_prediction: p.residue1.norm() - half,
        refinement_change: p.refinement_change,
    }))
}

pub fn write_trajectory_csv<W: Write>(tr: &Trajectory<f64>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,re_alpha1,im_alpha1,re_alpha2,im_alpha2,population,concurrence")?;
    for i in 0..tr.len() {
        let (a, b) = (tr.alpha1[i], tr.alpha2[i]);
        writeln!(
            out,
            "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            tr.t_grid[i], a.re, a.im, b.re, b.im, tr.population[i], tr.concurrence[i]
        )?;
    }
    out.flush()
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn run_entry(job: &Job, bath: &BathModel<f64>, dir: &Path, dm: i64) -> Result<EntrySummary, RunError> {
    let sc = &job.scenario;
    let em = sc.emitter_pair(dm)?;
    let report = bic_solve_with(bath, &em, sc.tolerances.integer).map_err(|e| RunError::numeric(dm, e))?;
    let markovian = if sc.wants(OutputKind::Markovian) { Some(rates_summary(bath, &em, dm)?) } else { None };
    let pole = if sc.wants(OutputKind::Boundstate) { pole_summary(bath, &em, &report, dm)? } else { None };

    let d = &sc.dynamics;
    let mut settings = SimulationSettings::new(d.horizon, d.step);
    settings.basis = d.basis;
    settings.probe_window = d.probe_window;
    settings.max_halvings = d.max_halvings;
    let sim = simulate(bath, &em, &settings).map_err(|e| RunError::numeric(dm, e))?;
    let tr = &sim.trajectory;
    let est = steady_estimate(&tr.t_grid, &tr.population, &tr.concurrence, sc.tolerances.steady_window)
        .map_err(|e| RunError::numeric(dm, e))?;
    let prediction = steady_state_prediction(&report);

    let csv = dir.join(format!("dm_{dm}.csv"));
    let file = fs::File::create(&csv).map_err(|e| io_err(&csv, e))?;
    // Keep the sampling period fixed in time when the step was halved.
    let every = d.sample_every * (d.step / sim.step).round().max(1.0) as usize;
    write_trajectory_csv(&tr.subsample(every), BufWriter::new(file)).map_err(|e| io_err(&csv, e))?;

    let entry = EntrySummary {
        version: VERSION.into(),
        scenario: sc.name.clone(),
        separation: dm,
        site1: em.site1,
        site2: em.site2,
        bma: bma_verdict(job, bath, &em),
        bic: BicVerdict::from(&report),
        markovian,
        pole,
        dynamics: DynamicsSummary {
            horizon: d.horizon,
            step: sim.step,
            step_error: sim.step_error,
            steps: tr.len() - 1,
            window_start: est.window_start,
            window_end: est.window_end,
            revival_time: revival_time(bath),
            revival_risk: sim.revival_risk,
            population: Comparison::new(prediction.population, &est.population),
            concurrence: Comparison::new(prediction.concurrence, &est.concurrence),
        },
    };
    write_json(&dir.join(format!("dm_{dm}.json")), &entry)?;
    Ok(entry)
}

/// `run`: integrates every separation and writes the CSV/JSON artifacts.
pub fn run(job: &Job) -> Result<RunSummary, RunError> {
    let bath = job.bath()?;
    let dir = job.out_dir()?.to_path_buf();
    let entries = job.sweep(|dm| run_entry(job, &bath, &dir, dm))?;
    let summary = RunSummary { version: VERSION.into(), scenario: job.scenario.name.clone(), entries };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantRow {
    pub separation: i64,
    pub exists: bool,
    pub weight_c2: Option<f64>,
    /// `|C|⁴/2`.
    pub analytic: f64,
    /// Steady values from an earlier `run` in the output directory.
    pub measured_population: Option<f64>,
    pub measured_concurrence: Option<f64>,
    pub population_abs_difference: Option<f64>,
    pub concurrence_abs_difference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    pub version: String,
    pub scenario: String,
    pub omega0: f64,
    pub rows: Vec<ConstantRow>,
}

fn measured(dir: &Path, dm: i64) -> Option<(f64, f64)> {
    let text = fs::read_to_string(dir.join(format!("dm_{dm}.json"))).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    let d = v.get("dynamics")?;
    Some((d["population"]["measured"].as_f64()?, d["concurrence"]["measured"].as_f64()?))
}

/// `constants`: the analytic `|C|⁴/2` curve next to measured steady states.
pub fn constants(job: &Job) -> Result<ConstantsTable, RunError> {
    let bath = job.bath()?;
    let sc = &job.scenario;
    let dir = sc.output.directory.clone();
    let rows = job.sweep(|dm| {
        let em = sc.emitter_pair(dm)?;
        let r = bic_solve_with(&bath, &em, sc.tolerances.integer).map_err(|e| RunError::numeric(dm, e))?;
        let m = measured(&dir, dm);
        Ok(ConstantRow {
            separation: dm,
            exists: r.exists,
            weight_c2: r.weight_c2,
            analytic: r.steady_population,
            measured_population: m.map(|x| x.0),
            measured_concurrence: m.map(|x| x.1),
            population_abs_difference: m.map(|x| (x.0 - r.steady_population).abs()),
            concurrence_abs_difference: m.map(|x| (x.1 - r.steady_concurrence).abs()),
        })
    })?;
    Ok(ConstantsTable { version: VERSION.into(), scenario: sc.name.clone(), omega0: sc.emitters.omega0, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionRow {
    pub separation: i64,
    pub bma: BmaVerdict,
    pub bic: BicVerdict,
    pub markovian: RatesSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionTable {
    pub version: String,
    pub scenario: String,
    pub rows: Vec<CriterionRow>,
}

/// `criterion`: Markovian and exact verdicts plus the collective rates.
pub fn criterion(job: &Job) -> Result<CriterionTable, RunError> {
    let bath = job.bath()?;
    let sc = &job.scenario;
    let rows = job.sweep(|dm| {
        let em = sc.emitter_pair(dm)?;
        let r = bic_solve_with(&bath, &em, sc.tolerances.integer).map_err(|e| RunError::numeric(dm, e))?;
        Ok(CriterionRow {
            separation: dm,
            bma: bma_verdict(job, &bath, &em),
            bic: BicVerdict::from(&r),
            markovian: rates_summary(&bath, &em, dm)?,
        })
    })?;
    Ok(CriterionTable { version: VERSION.into(), scenario: sc.name.clone(), rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralState {
    pub index: usize,
    pub energy: f64,
    pub emitter_weight: f64,
    pub c1: f64,
    pub c2: f64,
    pub far_field_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleEntry {
    pub version: String,
    pub scenario: String,
    pub separation: i64,
    pub n_modes: usize,
    pub bic: BicVerdict,
    pub spectral_states: Vec<SpectralState>,
    /// Samples compared between the integro-differential solver and exact
    /// propagation.
    pub samples: usize,
    pub max_alpha1_difference: f64,
    pub max_alpha2_difference: f64,
    pub max_norm_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub version: String,
    pub scenario: String,
    pub entries: Vec<OracleEntry>,
}

fn oracle_entry(job: &Job, bath: &BathModel<f64>, dir: &Path, dm: i64) -> Result<OracleEntry, RunError> {
    let sc = &job.scenario;
    let em = sc.emitter_pair(dm)?;
    let num = |e| RunError::numeric(dm, e);
    let report = bic_solve_with(bath, &em, sc.tolerances.integer).map_err(num)?;
    let h = build_hamiltonian(bath, &em).map_err(num)?;
    let spectrum = h.eigen().map_err(num)?;
    let threshold = sc.tolerances.bound_weight_factor * 2.0 / bath.n_modes as f64;
    let states = find_bic_spectral(&h, &spectrum, bath, threshold, sc.tolerances.far_field_max);

    let d = &sc.dynamics;
    let mut settings = SimulationSettings::new(d.horizon, d.step);
    settings.basis = d.basis;
    settings.probe_window = d.probe_window;
    settings.max_halvings = d.max_halvings;
    let sim = simulate(bath, &em, &settings).map_err(num)?;
    let every = d.sample_every * (d.step / sim.step).round().max(1.0) as usize;
    let ide = sim.trajectory.subsample(every);
    let exact = evolve_spectrum(&spectrum, &ide.t_grid, false);
    let max_diff = |a: &[crate::scalar::Cplx<f64>], b: &[crate::scalar::Cplx<f64>]| {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };

    if sc.output.spectrum_csv {
        let path = dir.join(format!("spectrum_{dm}.csv"));
        let f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        write_spectrum_csv(&spectrum, BufWriter::new(f)).map_err(|e| io_err(&path, e))?;
        for s in &states {
            let path = dir.join(format!("bic_{dm}_{}.csv", s.index));
            let f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            write_eigenvector_csv(&spectrum, s.index, BufWriter::new(f)).map_err(|e| io_err(&path, e))?;
        }
    }

    let entry = OracleEntry {
        version: VERSION.into(),
        scenario: sc.name.clone(),
        separation: dm,
        n_modes: bath.n_modes,
        bic: BicVerdict::from(&report),
        spectral_states: states
            .iter()
            .map(|s| SpectralState {
                index: s.index,
                energy: s.energy,
                emitter_weight: s.emitter_weight,
                c1: s.c1,
                c2: s.c2,
                far_field_weight: s.far_field_weight,
            })
            .collect(),
        samples: ide.len(),
        max_alpha1_difference: max_diff(&ide.alpha1, &exact.trajectory.alpha1),
        max_alpha2_difference: max_diff(&ide.alpha2, &exact.trajectory.alpha2),
        max_norm_deviation: exact.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max),
    };
    write_json(&dir.join(format!("oracle_{dm}.json")), &entry)?;
    Ok(entry)
}

/// `oracle-check`: exact diagonalization against the reduced solvers.
pub fn oracle_check(job: &Job) -> Result<OracleReport, RunError> {
    let bath = job.bath()?;
    let dir = job.out_dir()?.to_path_buf();
    let entries = job.sweep(|dm| oracle_entry(job, &bath, &dir, dm))?;
    Ok(OracleReport { version: VERSION.into(), scenario: job.scenario.name.clone(), entries })
}

/// Sorted map from separation to summary, for callers that index by `Δm`.
pub fn by_separation(summary: &RunSummary) -> BTreeMap<i64, &EntrySummary> {
    summary.entries.iter().map(|e| (e.separation, e)).collect()
}
