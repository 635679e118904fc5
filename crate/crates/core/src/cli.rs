//! File I/O and the commands behind the `agcd` binary: single runs, noise
//! sweeps, solver traces and the uncontrollability distance.
//!
//! Polynomials are JSON objects `{rows, cols, degree, coeffs}` with `coeffs`
//! a degree-ascending list of row-major 2-D arrays. A pair is either two
//! such files or one file `{"a": …, "b": …}`; a system is `{"p": …, "q": …}`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::control::{distance_to_uncontrollability, is_controllable, ControllabilityReport, IoSystem};
use crate::error::{Error, Result};
use crate::matpoly::{random_with_common_factor, FactorizationTriple, MatPoly, PolyPair};
use crate::odegcd::{agcd_ode, fmt_float, GcdResult, OdeParams, OdeTrace};
use crate::subspace::{subspace_gcd_with, SubspaceDiagnostics, SubspaceOptions};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Offset separating the noise stream of a sweep trial from its instance
/// stream.
const NOISE_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Subspace,
    Ode,
    Both,
}

impl Method {
    fn runs_subspace(self) -> bool {
        matches!(self, Method::Subspace | Method::Both)
    }

    fn runs_ode(self) -> bool {
        matches!(self, Method::Ode | Method::Both)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subspace" => Ok(Method::Subspace),
            "ode" => Ok(Method::Ode),
            "both" => Ok(Method::Both),
            _ => Err(Error::Parse {
                field: "method".into(),
                message: format!("expected subspace, ode or both, got {s:?}"),
            }),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Subspace => "subspace",
            Method::Ode => "ode",
            Method::Both => "both",
        })
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        field: path.display().to_string(),
        message: e.to_string(),
    })
}

fn field<T: for<'de> Deserialize<'de>>(v: Value, name: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse {
        field: name.to_string(),
        message: e.to_string(),
    })
}

fn member(obj: &mut Value, key: &str) -> Result<Value> {
    obj.get_mut(key).map(Value::take).ok_or_else(|| Error::Parse {
        field: key.to_string(),
        message: "missing".into(),
    })
}

/// Reads one polynomial.
pub fn read_poly(path: &Path) -> Result<MatPoly> {
    field(read_json(path)?, &path.display().to_string())
}

/// Reads a pair from two polynomial files or from one `{"a", "b"}` file.
pub fn read_pair(paths: &[PathBuf]) -> Result<PolyPair> {
    match paths {
        [one] => {
            let mut v = read_json(one)?;
            let a = field(member(&mut v, "a")?, "a")?;
            let b = field(member(&mut v, "b")?, "b")?;
            PolyPair::new(a, b)
        }
        [a, b] => PolyPair::new(read_poly(a)?, read_poly(b)?),
        _ => Err(Error::Parameter(format!("expected one or two input files, got {}", paths.len()))),
    }
}

/// Reads a `{"p", "q"}` system file.
pub fn read_system(path: &Path) -> Result<IoSystem> {
    let mut v = read_json(path)?;
    let p: MatPoly = field(member(&mut v, "p")?, "p")?;
    let q: MatPoly = field(member(&mut v, "q")?, "q")?;
    IoSystem::new(p, q)
}

/// Pretty JSON to `path`, or to stdout when `None`.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => writeln!(std::io::stdout().lock(), "{text}")?,
    }
    Ok(())
}

/// Subspace output of [`cmd_run`].
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceRun {
    #[serde(flatten)]
    pub triple: FactorizationTriple,
    /// Coefficient distance between the input and `(C Ā, C B̄)`.
    pub distance: f64,
    pub diagnostics: SubspaceDiagnostics,
}

/// Result file of [`cmd_run`].
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub method: Method,
    pub d: usize,
    pub subspace: Option<SubspaceRun>,
    pub ode: Option<GcdResult>,
}

impl RunReport {
    /// [`EXIT_NOT_CONVERGED`] when the gradient-flow solver did not reach
    /// the zero tolerance.
    pub fn exit_code(&self) -> i32 {
        match &self.ode {
            Some(r) if !r.converged => EXIT_NOT_CONVERGED,
            _ => EXIT_OK,
        }
    }
}

/// Runs the selected methods on one pair; also returns the solver trace
/// when the gradient-flow method ran.
pub fn cmd_run(pair: &PolyPair, method: Method, d: usize, params: &OdeParams) -> Result<(RunReport, Option<OdeTrace>)> {
    let subspace = if method.runs_subspace() {
        let (triple, diagnostics) = subspace_gcd_with(pair, d, SubspaceOptions { ell: params.ell })?;
        Some(SubspaceRun {
            triple,
            distance: diagnostics.recovery_distance,
            diagnostics,
        })
    } else {
        None
    };
    let (ode, trace) = if method.runs_ode() {
        let (r, t) = agcd_ode(pair, d, params)?;
        (Some(r), Some(t))
    } else {
        (None, None)
    };
    Ok((RunReport { method, d, subspace, ode }, trace))
}

/// Solver trace of one gradient-flow run.
pub fn cmd_trace(pair: &PolyPair, d: usize, params: &OdeParams) -> Result<(OdeTrace, GcdResult)> {
    let (r, t) = agcd_ode(pair, d, params)?;
    Ok((t, r))
}

/// Result file of [`cmd_control`].
#[derive(Debug, Clone, Serialize)]
pub struct ControlRun {
    pub input: ControllabilityReport,
    pub distance: f64,
    pub converged: bool,
    pub p_hat: MatPoly,
    pub q_hat: MatPoly,
    pub witness: ControllabilityReport,
    pub monic_witness: Option<IoSystem>,
    pub monic_distance: Option<f64>,
}

/// Controllability test plus distance to uncontrollability. The witness is
/// tested at the solver's own zero tolerance.
pub fn cmd_control(sys: &IoSystem, params: &OdeParams, rank_tol: f64) -> Result<ControlRun> {
    let input = is_controllable(sys, rank_tol)?;
    let rep = distance_to_uncontrollability(sys, params)?;
    let witness = rep.witness_report()?;
    Ok(ControlRun {
        input,
        distance: rep.distance,
        converged: rep.converged,
        p_hat: rep.p_hat,
        q_hat: rep.q_hat,
        witness,
        monic_witness: rep.monic_witness,
        monic_distance: rep.monic_distance,
    })
}

/// Method column of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Subspace,
    Ode,
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMethod::Subspace => "subspace",
            SweepMethod::Ode => "ode",
        })
    }
}

impl From<Method> for Vec<SweepMethod> {
    fn from(m: Method) -> Self {
        match m {
            Method::Subspace => vec![SweepMethod::Subspace],
            Method::Ode => vec![SweepMethod::Ode],
            Method::Both => vec![SweepMethod::Subspace, SweepMethod::Ode],
        }
    }
}

/// Monte Carlo comparison on planted instances: for every noise level and
/// trial, a random pair with an exact common factor of degree `d` receives
/// normal noise of that standard deviation and is handed to each method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<SweepMethod>,
    pub params: OdeParams,
    /// Fill the `runtime_ms` column. Off by default so that reruns produce
    /// identical files.
    pub record_timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            m: 2,
            n: 3,
            d: 1,
            noise_levels: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
            trials: 50,
            seed: 0,
            methods: vec![SweepMethod::Subspace, SweepMethod::Ode],
            params: OdeParams::default(),
            record_timing: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.m == 0 || self.d == 0 || self.d >= self.n {
            return Err(Error::Parameter(format!(
                "need m >= 1 and 0 < d < n, got m = {}, n = {}, d = {}",
                self.m, self.n, self.d
            )));
        }
        if let Some(l) = self.noise_levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(Error::Parameter(format!("noise level {l} outside [0, 1]")));
        }
        if self.methods.is_empty() {
            return Err(Error::Parameter("no methods selected".into()));
        }
        self.params.validate()
    }

    /// Seed of trial `trial` at level index `level`.
    pub fn trial_seed(&self, level: usize, trial: usize) -> u64 {
        self.seed
            .wrapping_add(trial as u64)
            .wrapping_add(1000u64.wrapping_mul(level as u64))
    }

    /// Noisy instance of one trial.
    pub fn instance(&self, level: usize, trial: usize) -> Result<PolyPair> {
        let seed = self.trial_seed(level, trial);
        let (pair, _) = random_with_common_factor(self.m, self.n, self.d, seed)?;
        pair.add_noise(self.noise_levels[level], seed ^ NOISE_STREAM)
    }
}

/// One row of the sweep CSV. `distance` is `None` when the method failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub level_index: usize,
    pub noise_level: f64,
    pub trial_index: usize,
    pub method: SweepMethod,
    pub coeff_distance: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub converged: bool,
}

pub const SWEEP_CSV_HEADER: &str = "noise_level,trial,method,distance,runtime_ms,converged";

fn run_trial(cfg: &SweepConfig, level: usize, trial: usize) -> Vec<SweepRecord> {
    let record = |method, dist: Option<f64>, ms: f64, converged| SweepRecord {
        level_index: level,
        noise_level: cfg.noise_levels[level],
        trial_index: trial,
        method,
        coeff_distance: dist,
        runtime_ms: cfg.record_timing.then_some(ms),
        converged,
    };
    let pair = match cfg.instance(level, trial) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("level {level} trial {trial}: instance generation failed: {e}");
            return cfg.methods.iter().map(|&m| record(m, None, 0.0, false)).collect();
        }
    };
    cfg.methods
        .iter()
        .map(|&m| {
            let t0 = Instant::now();
            let out = match m {
                SweepMethod::Subspace => subspace_gcd_with(&pair, cfg.d, SubspaceOptions { ell: cfg.params.ell })
                    .map(|(_, diag)| (diag.recovery_distance, true)),
                SweepMethod::Ode => agcd_ode(&pair, cfg.d, &cfg.params).map(|(r, _)| (r.coeff_distance, r.converged)),
            };
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            match out {
                Ok((dist, conv)) => record(m, Some(dist), ms, conv),
                Err(e) => {
                    log::warn!("level {level} trial {trial} {m}: {e}");
                    record(m, None, ms, false)
                }
            }
        })
        .collect()
}

/// Runs every trial (in parallel) and returns the records ordered by level,
/// trial and method.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.noise_levels.len())
        .flat_map(|l| (0..cfg.trials).map(move |t| (l, t)))
        .collect();
    let mut records: Vec<SweepRecord> = jobs.par_iter().flat_map_iter(|&(l, t)| run_trial(cfg, l, t)).collect();
    records.sort_by_key(|r| (r.level_index, r.trial_index, r.method));
    Ok(records)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_float(r.noise_level),
            r.trial_index,
            r.method,
            opt(r.coeff_distance),
            opt(r.runtime_ms),
            r.converged
        )?;
    }
    Ok(())
}

/// Average over the trials of one level and method; failed trials are
/// counted but not averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub noise_level: f64,
    pub method: SweepMethod,
    pub mean_distance: Option<f64>,
    pub trials: usize,
    pub failures: usize,
}

pub fn summarize(records: &[SweepRecord]) -> Vec<LevelSummary> {
    let mut out: Vec<LevelSummary> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for r in records {
        let pos = out
            .iter()
            .position(|s| s.noise_level == r.noise_level && s.method == r.method)
            .unwrap_or_else(|| {
                out.push(LevelSummary {
                    noise_level: r.noise_level,
                    method: r.method,
                    mean_distance: None,
                    trials: 0,
                    failures: 0,
                });
                sums.push((0.0, 0));
                out.len() - 1
            });
        out[pos].trials += 1;
        match r.coeff_distance {
            Some(d) => {
                sums[pos].0 += d;
                sums[pos].1 += 1;
            }
            None => out[pos].failures += 1,
        }
    }
    for (s, (total, count)) in out.iter_mut().zip(sums) {
        s.mean_distance = (count > 0).then(|| total / count as f64);
    }
    out
}

pub const SUMMARY_CSV_HEADER: &str = "noise_level,method,mean_distance,trials,failures";

pub fn write_summary_csv<W: Write>(summary: &[LevelSummary], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_CSV_HEADER}")?;
    for s in summary {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(s.noise_level),
            s.method,
            opt(s.mean_distance),
            s.trials,
            s.failures
        )?;
    }
    Ok(())
}

/// Side file describing how a sweep was generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub config: SweepConfig,
    pub instance: String,
    pub seeds: String,
    pub notes: Vec<String>,
}

impl SweepMetadata {
    pub fn for_config(cfg: &SweepConfig) -> Self {
        SweepMetadata {
            config: cfg.clone(),
            instance: "monic common factor and cofactors with independent standard-normal entries; \
                       every coefficient then receives independent normal noise with standard deviation noise_level"
                .into(),
            seeds: "trial seed = seed + trial + 1000 * level_index; noise drawn from a separate stream".into(),
            notes: vec![
                "only the subspace and gradient-flow methods are run; no derivative-free reference minimizer curves are produced"
                    .into(),
                "distance is the coefficient distance between the input and the returned factorable pair".into(),
            ],
        }
    }
}

/// Paths written by [`cmd_sweep`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutputs {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub metadata: PathBuf,
}

impl SweepOutputs {
    /// `out`, plus `<stem>_summary.csv` and `<stem>_meta.json` beside it.
    pub fn beside(out: &Path) -> Self {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
        let dir = out.parent().unwrap_or_else(|| Path::new(""));
        SweepOutputs {
            records: out.to_path_buf(),
            summary: dir.join(format!("{stem}_summary.csv")),
            metadata: dir.join(format!("{stem}_meta.json")),
        }
    }
}

/// Runs the sweep and writes the record CSV, the per-level summary and the
/// metadata file.
pub fn cmd_sweep(cfg: &SweepConfig, out: &Path) -> Result<(Vec<SweepRecord>, SweepOutputs)> {
    let records = run_sweep(cfg)?;
    let paths = SweepOutputs::beside(out);
    write_sweep_csv(&records, fs::File::create(&paths.records)?)?;
    write_summary_csv(&summarize(&records), fs::File::create(&paths.summary)?)?;
    write_json(Some(&paths.metadata), &SweepMetadata::for_config(cfg))?;
    Ok((records, paths))
}

/// Comma-separated list of noise levels.
pub fn parse_levels(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| Error::Parse {
                field: "noise-levels".into(),
                message: format!("{t:?}: {e}"),
            })
        })
        .collect()
}
