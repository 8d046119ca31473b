//! Config-driven experiment runner: the engine behind the CLI.
//!
//! Every experiment is fully described by an [`ExperimentConfig`] (space,
//! spectrum descriptor, numeric parameters, seed, output path), runs
//! deterministically from its seed at any thread count, writes its declared
//! artifacts (CSV for tables, JSON for reports), and returns a JSON summary.
//! Floats in CSV artifacts are printed with 17 significant digits so reruns
//! are byte-identical; JSON uses shortest-round-trip formatting, which is
//! equally deterministic and lossless.
//!
//! The acceptance driver loads a directory of frozen configs with expected
//! bands, runs each, and compares summary entries against the bands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::covariance::{variogram_bound_fit, min_symmetric_eigenvalue, ZonalCovariance};
use crate::fieldsim::{
    cholesky_sample, kl_sample_s2, modulus_experiment, FieldSample, SampleMethod,
};
use crate::jacobi::JacobiParams;
use crate::rng::substream;
use crate::slnd::{bump_verify, slnd_experiment, BumpFunction};
use crate::spaces::{geodesic_points, random_point, Family, Point, PointConfiguration, Space};
use crate::spectra::{
    fit_decay, polynomial_covariance_spectrum, powerlaw_spectrum, sine_power_spectrum,
    AngularPowerSpectrum, PolyCovariance, TailBound,
};
use crate::{Error, Result};

/// 17-significant-digit float formatting; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Space serialization: `{"family": "sphere"|"rp"|"cp"|"hp"|"cayley", "d": n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub family: Family,
    pub d: u32,
}

impl SpaceDescriptor {
    pub fn to_space(self) -> Result<Space> {
        Space::new(self.family, self.d)
    }
}

/// Spectrum model selector, as serialized in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Powerlaw,
    SinePower,
    PolyP0,
    PolyP1,
    File,
}

/// Spectrum descriptor:
/// `{"model": "powerlaw"|"sine_power"|"poly_p0"|"poly_p1"|"file",
///   "nu": …, "L": …, "path": …}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDescriptor {
    pub model: SpectrumKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl SpectrumDescriptor {
    pub fn powerlaw(nu: f64, l: u64) -> Self {
        SpectrumDescriptor { model: SpectrumKind::Powerlaw, nu: Some(nu), l: Some(l), path: None }
    }

    pub fn sine_power(nu: f64, l: u64) -> Self {
        SpectrumDescriptor { model: SpectrumKind::SinePower, nu: Some(nu), l: Some(l), path: None }
    }

    pub fn build(&self, space: Space) -> Result<AngularPowerSpectrum> {
        let l = self.l.unwrap_or(256);
        match self.model {
            SpectrumKind::Powerlaw => {
                let nu = self.nu.ok_or_else(|| Error::parameter("powerlaw requires nu"))?;
                powerlaw_spectrum(nu, l)
            }
            SpectrumKind::SinePower => {
                let nu = self.nu.ok_or_else(|| Error::parameter("sine_power requires nu"))?;
                sine_power_spectrum(space, nu, l)
            }
            SpectrumKind::PolyP0 => polynomial_covariance_spectrum(space, PolyCovariance::P0, l),
            SpectrumKind::PolyP1 => polynomial_covariance_spectrum(space, PolyCovariance::P1, l),
            SpectrumKind::File => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::parameter("file spectrum requires a path"))?;
                let mut spectrum = spectrum_from_csv(path)?;
                if let Some(nu) = self.nu {
                    if let Ok(decay) = fit_decay(&spectrum, nu, 1) {
                        spectrum = spectrum.with_decay(decay);
                    }
                }
                Ok(spectrum)
            }
        }
    }
}

/// Reads a `l,b_l` CSV into a spectrum. File spectra carry no analytic
/// tail; they are wrapped with an exact zero tail, i.e. treated as exactly
/// truncated.
pub fn spectrum_from_csv(path: &Path) -> Result<AngularPowerSpectrum> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with('l')) {
            continue;
        }
        let mut parts = line.split(',');
        let l: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parameter(format!("bad spectrum row {i}: {line}")))?;
        let b: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parameter(format!("bad spectrum row {i}: {line}")))?;
        if l != values.len() {
            return Err(Error::parameter(format!(
                "spectrum rows must be consecutive from l = 0; got l = {l} at row {}",
                values.len()
            )));
        }
        values.push(b);
    }
    AngularPowerSpectrum::from_values(values)?.with_tail(TailBound::exact(0.0))
}

/// The eight experiment kinds the runner dispatches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Spectrum,
    Covariance,
    VariogramBounds,
    PsdCheck,
    Slnd,
    Bump,
    Sample,
    Modulus,
}

/// Where the points of a `sample` experiment come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PointsSpec {
    /// `2^level` equally spaced points on a closed geodesic.
    Geodesic { level: u32 },
    /// Coordinate rows from a CSV file (one point per line).
    File { path: PathBuf },
    /// `count` uniform random points drawn from substream 2^63 of the seed.
    Random { count: usize },
}

fn default_seed() -> u64 {
    0
}

/// A fully reproducible experiment description. Optional fields fall back
/// to the documented defaults; [`ExperimentConfig::resolved`] fills them in
/// so the echoed provenance is complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub space: SpaceDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SpectrumDescriptor>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub out: PathBuf,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<SampleMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PointsSpec>,
    /// Points per random PSD-check configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_points: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, space: SpaceDescriptor, out: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            space,
            model: None,
            seed: 0,
            out: out.into(),
            nu: None,
            tol: None,
            trials: None,
            levels: None,
            replicates: None,
            nmax: None,
            theta_grid: None,
            delta0: None,
            grid: None,
            r: None,
            n0: None,
            eps: None,
            lmax: None,
            method: None,
            points: None,
            config_points: None,
        }
    }

    /// Validates the configuration, reporting every violated field at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.space.to_space().is_err() {
            errors.push(format!(
                "space: ({}, d = {}) is not an admissible family/dimension pair",
                self.space.family.label(),
                self.space.d
            ));
        }
        let needs_model = !matches!(self.experiment, ExperimentKind::Bump);
        if needs_model && self.model.is_none() {
            errors.push("model: required for this experiment".into());
        }
        if let Some(m) = &self.model {
            if matches!(m.model, SpectrumKind::Powerlaw | SpectrumKind::SinePower)
                && m.nu.is_none()
                && self.nu.is_none()
            {
                errors.push("model.nu: required for powerlaw/sine_power spectra".into());
            }
            if m.model == SpectrumKind::File && m.path.is_none() {
                errors.push("model.path: required for file spectra".into());
            }
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0) {
                errors.push(format!("nu: must be positive, got {nu}"));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps <= std::f64::consts::PI) {
                errors.push(format!("eps: must lie in (0, π], got {eps}"));
            }
        }
        if let Some(r) = self.r {
            if !(r > 1.0) {
                errors.push(format!("r: must exceed 1, got {r}"));
            }
        }
        if self.out.as_os_str().is_empty() {
            errors.push("out: output path must not be empty".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    /// The config with every default made explicit — what gets echoed for
    /// provenance.
    pub fn resolved(&self) -> ExperimentConfig {
        let mut c = self.clone();
        if let Some(m) = c.model.as_mut() {
            if m.nu.is_none() {
                m.nu = c.nu;
            }
            m.l.get_or_insert(256);
        }
        c.nu.get_or_insert_with(|| c.model.as_ref().and_then(|m| m.nu).unwrap_or(1.0));
        match c.experiment {
            ExperimentKind::Spectrum | ExperimentKind::Covariance => {
                c.theta_grid.get_or_insert(181);
            }
            ExperimentKind::VariogramBounds => {
                c.delta0.get_or_insert(0.5);
                c.grid.get_or_insert(40);
            }
            ExperimentKind::PsdCheck => {
                c.trials.get_or_insert(50);
                c.config_points.get_or_insert(30);
            }
            ExperimentKind::Slnd => {
                c.trials.get_or_insert(200);
                c.nmax.get_or_insert(16);
            }
            ExperimentKind::Bump => {
                c.r.get_or_insert(2.0);
                c.n0.get_or_insert(4);
                c.eps.get_or_insert(0.5);
                c.nmax.get_or_insert(64);
            }
            ExperimentKind::Sample => {
                c.replicates.get_or_insert(100);
                c.method.get_or_insert(SampleMethod::Cholesky);
                c.points.get_or_insert(PointsSpec::Geodesic { level: 4 });
                c.lmax.get_or_insert(128);
            }
            ExperimentKind::Modulus => {
                c.levels.get_or_insert(6);
                c.replicates.get_or_insert(100);
            }
        }
        c
    }
}

/// Artifacts of one run: the JSON summary (also embedded in reports) and
/// the files written.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn build_model(config: &ExperimentConfig, space: Space) -> Result<ZonalCovariance> {
    let descriptor =
        config.model.clone().ok_or_else(|| Error::parameter("experiment requires a spectrum"))?;
    let mut descriptor = descriptor;
    if descriptor.nu.is_none() {
        descriptor.nu = config.nu;
    }
    let spectrum = descriptor.build(space)?;
    ZonalCovariance::new(space, spectrum)
}

/// Runs one experiment; writes artifacts under `config.out` and returns the
/// summary.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let config = config.resolved();
    let space = config.space.to_space()?;
    match config.experiment {
        ExperimentKind::Spectrum => run_spectrum(&config, space),
        ExperimentKind::Covariance => run_covariance(&config, space),
        ExperimentKind::VariogramBounds => run_variogram_bounds(&config, space),
        ExperimentKind::PsdCheck => run_psd_check(&config, space),
        ExperimentKind::Slnd => run_slnd(&config, space),
        ExperimentKind::Bump => run_bump(&config, space),
        ExperimentKind::Sample => run_sample(&config, space),
        ExperimentKind::Modulus => run_modulus(&config, space),
    }
}

fn run_spectrum(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let descriptor = config.model.as_ref().unwrap();
    let spectrum = descriptor.build(space)?;
    let mut csv = String::from("l,b_l\n");
    for (l, b) in spectrum.values().iter().enumerate() {
        let _ = writeln!(csv, "{l},{}", fmt_f64(*b));
    }
    write_file(&config.out, &csv)?;
    let summary = json!({
        "experiment": "spectrum",
        "L": spectrum.l_max(),
        "b0": spectrum.value(0),
        "partial_mass": spectrum.partial_mass(),
        "total_mass": spectrum.total_mass(),
        "tail": spectrum.tail().map(|t| json!({"lo": t.lo, "hi": t.hi})),
        "decay": spectrum.decay().map(|d| json!({
            "nu": d.nu, "gamma1": d.gamma1, "gamma2": d.gamma2, "l0": d.l0
        })),
    });
    Ok(RunOutput { summary, files: vec![config.out.clone()] })
}

fn run_covariance(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let model = build_model(config, space)?;
    let n = config.theta_grid.unwrap();
    let mut csv = String::from("theta,C,gamma\n");
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        let c = model.eval(theta);
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_f64(theta),
            fmt_f64(c),
            fmt_f64(model.variogram(theta))
        );
    }
    write_file(&config.out, &csv)?;
    let summary = json!({
        "experiment": "covariance",
        "c0": model.c0(),
        "tail_tol": model.tail_tol(),
        "theta_grid": n,
    });
    Ok(RunOutput { summary, files: vec![config.out.clone()] })
}

fn run_variogram_bounds(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let model = build_model(config, space)?;
    let nu = config.nu.unwrap();
    let report =
        variogram_bound_fit(&model, nu, config.delta0.unwrap(), config.grid.unwrap(), None)?;
    let mut csv = String::from("rho,ratio\n");
    for (rho, ratio) in &report.grid {
        let _ = writeln!(csv, "{},{}", fmt_f64(*rho), fmt_f64(*ratio));
    }
    write_file(&config.out, &csv)?;
    let summary = json!({
        "experiment": "variogram_bounds",
        "nu": report.nu,
        "delta0": report.delta0,
        "K1": report.k1,
        "K2": report.k2,
        "fitted_slope": report.fitted_slope,
    });
    let report_path = config.out.with_extension("report.json");
    write_file(&report_path, &format!("{:#}\n", summary))?;
    Ok(RunOutput { summary, files: vec![config.out.clone(), report_path] })
}

fn run_psd_check(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let model = build_model(config, space)?;
    let configs = config.trials.unwrap();
    let n_points = config.config_points.unwrap();
    let mut worst = f64::INFINITY;
    let mut worst_config = 0u64;
    for t in 0..configs {
        let mut rng = substream(config.seed, t);
        let points: Vec<Point> =
            (0..n_points).map(|_| random_point(space, &mut rng)).collect::<Result<_>>()?;
        let pc = PointConfiguration::new(space, points)?;
        let min_eig = min_symmetric_eigenvalue(&model.gram(&pc)?)?;
        if min_eig < worst {
            worst = min_eig;
            worst_config = t;
        }
    }
    let summary = json!({
        "experiment": "psd_check",
        "configs": configs,
        "points_per_config": n_points,
        "min_eigenvalue": worst,
        "relative_min_eigenvalue": worst / model.c0(),
        "worst_config_stream": worst_config,
        "c0": model.c0(),
    });
    write_file(&config.out, &format!("{:#}\n", summary))?;
    Ok(RunOutput { summary, files: vec![config.out.clone()] })
}

fn run_slnd(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let model = build_model(config, space)?;
    let report = slnd_experiment(
        &model,
        config.nu.unwrap(),
        config.trials.unwrap(),
        config.nmax.unwrap() as usize,
        config.seed,
    )?;
    let summary = json!({
        "experiment": "slnd",
        "nu": report.nu,
        "trials": report.trials,
        "gamma_hat": report.gamma_hat,
        "worst_case": {
            "seed": config.seed,
            "stream": report.worst_case.stream,
            "n": report.worst_case.n,
            "epsilon": report.worst_case.epsilon,
            "ratio": report.worst_case.ratio,
        },
    });
    write_file(&config.out, &format!("{:#}\n", summary))?;
    Ok(RunOutput { summary, files: vec![config.out.clone()] })
}

fn run_bump(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let bump =
        BumpFunction::new(space, config.r.unwrap(), config.n0.unwrap(), config.eps.unwrap())?;
    let verification = bump_verify(&bump, config.nmax.unwrap())?;
    let mut csv = String::from("n,b_n,bound\n");
    for (n, (b, bound)) in
        verification.coefficients.iter().zip(&verification.envelope).enumerate()
    {
        let _ = writeln!(csv, "{n},{},{}", fmt_f64(*b), fmt_f64(*bound));
    }
    write_file(&config.out, &csv)?;
    let summary = json!({
        "experiment": "bump",
        "r": bump.r,
        "n0": bump.n0,
        "eps": bump.eps,
        "R": bump.big_r,
        "K": bump.big_k,
        "max_low_coeff": verification.max_low_coeff,
        "mr_hat": verification.mr_hat,
    });
    Ok(RunOutput { summary, files: vec![config.out.clone()] })
}

fn resolve_points(config: &ExperimentConfig, space: Space) -> Result<PointConfiguration> {
    match config.points.as_ref().unwrap() {
        PointsSpec::Geodesic { level } => Ok(geodesic_points(space, *level)?.config),
        PointsSpec::Random { count } => {
            // Stream index 2^63 keeps the configuration draw disjoint from
            // the per-replicate streams 0..replicates.
            let mut rng = substream(config.seed, 1u64 << 63);
            let points: Vec<Point> =
                (0..*count).map(|_| random_point(space, &mut rng)).collect::<Result<_>>()?;
            PointConfiguration::new(space, points)
        }
        PointsSpec::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let mut points = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let coords: std::result::Result<Vec<f64>, _> =
                    line.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let coords = coords
                    .map_err(|e| Error::parameter(format!("bad point row '{line}': {e}")))?;
                points.push(Point::new(space, coords)?);
            }
            PointConfiguration::new(space, points)
        }
    }
}

fn run_sample(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let model = build_model(config, space)?;
    let points = resolve_points(config, space)?;
    let replicates = config.replicates.unwrap();
    let method = config.method.unwrap();
    let samples: Vec<FieldSample> = match method {
        SampleMethod::Cholesky => cholesky_sample(&model, &points, config.seed, replicates)?,
        SampleMethod::KlSphere2 => {
            let lmax = config.lmax.unwrap().min(model.spectrum().l_max());
            kl_sample_s2(model.spectrum(), &points, lmax, config.seed, replicates)?
        }
    };
    let mut csv = String::from("point_index,replicate,value\n");
    for sample in &samples {
        for (i, v) in sample.values.iter().enumerate() {
            let _ = writeln!(csv, "{i},{},{}", sample.replicate, fmt_f64(*v));
        }
    }
    write_file(&config.out, &csv)?;
    let summary = json!({
        "experiment": "sample",
        "method": method,
        "points": points.len(),
        "replicates": replicates,
        "c0": model.c0(),
    });
    Ok(RunOutput { summary, files: vec![config.out.clone()] })
}

fn run_modulus(config: &ExperimentConfig, space: Space) -> Result<RunOutput> {
    let model = build_model(config, space)?;
    let report = modulus_experiment(
        &model,
        config.nu.unwrap(),
        config.levels.unwrap(),
        config.replicates.unwrap(),
        config.seed,
    )?;
    let summary = json!({
        "experiment": "modulus",
        "nu": report.nu,
        "finest_level": report.finest_level,
        "replicates": report.replicates,
        "eps": report.eps,
        "sup_ratio": report.sup_ratio,
        "pair_counts": report.pair_counts,
        "slope": report.slope,
        "band": {"min": report.band_min, "max": report.band_max},
        "jitter": report.jitter,
    });
    write_file(&config.out, &format!("{:#}\n", summary))?;
    Ok(RunOutput { summary, files: vec![config.out.clone()] })
}

// ---------------------------------------------------------------------------
// Acceptance driver
// ---------------------------------------------------------------------------

/// A scalar band check against a dotted path into the run summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Expectation {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

/// One frozen acceptance case: a config plus expected bands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptanceCase {
    pub name: String,
    pub config: ExperimentConfig,
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub path: String,
    pub value: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptanceSummary {
    pub cases: Vec<CaseResult>,
    pub passed: bool,
}

impl AcceptanceSummary {
    /// One pass/fail line per case, plus per-check diffs for failures.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for case in &self.cases {
            let status = if case.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {}", case.name);
            if let Some(err) = &case.error {
                let _ = writeln!(out, "      error: {err}");
            }
            for check in &case.checks {
                if !check.passed {
                    let _ = writeln!(
                        out,
                        "      {}: value {:?} outside [{:?}, {:?}]",
                        check.path, check.value, check.min, check.max
                    );
                }
            }
        }
        out
    }
}

fn lookup(value: &Value, path: &str) -> Option<f64> {
    let mut curr = value;
    for key in path.split('.') {
        curr = match key.parse::<usize>() {
            Ok(idx) => curr.get(idx)?,
            Err(_) => curr.get(key)?,
        };
    }
    curr.as_f64()
}

/// Runs every `*.json` case in `dir`, redirecting outputs under `out_dir`.
/// Unreadable cases are reported as errors while the rest still run.
pub fn run_acceptance_dir(dir: &Path, out_dir: &Path) -> Result<AcceptanceSummary> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(Error::parameter(format!("no acceptance configs found in {}", dir.display())));
    }
    let mut cases = Vec::new();
    for path in entries {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let case: AcceptanceCase = match std::fs::read_to_string(&path)
            .map_err(Error::from)
            .and_then(|text| serde_json::from_str(&text).map_err(Error::from))
        {
            Ok(case) => case,
            Err(e) => {
                cases.push(CaseResult {
                    name,
                    passed: false,
                    error: Some(e.to_string()),
                    checks: vec![],
                });
                continue;
            }
        };
        let mut config = case.config.clone();
        config.out = out_dir.join(config.out.file_name().unwrap_or(config.out.as_os_str()));
        let result = match run(&config) {
            Ok(output) => {
                let checks: Vec<CheckResult> = case
                    .expect
                    .iter()
                    .map(|e| {
                        let value = lookup(&output.summary, &e.path);
                        let passed = value.is_some_and(|v| {
                            e.min.is_none_or(|lo| v >= lo) && e.max.is_none_or(|hi| v <= hi)
                        });
                        CheckResult { path: e.path.clone(), value, min: e.min, max: e.max, passed }
                    })
                    .collect();
                let passed = checks.iter().all(|c| c.passed);
                CaseResult { name: case.name, passed, error: None, checks }
            }
            Err(e) => CaseResult {
                name: case.name,
                passed: false,
                error: Some(e.to_string()),
                checks: vec![],
            },
        };
        cases.push(result);
    }
    let passed = cases.iter().all(|c| c.passed);
    Ok(AcceptanceSummary { cases, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("isofield-test-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn spectrum_config(out: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            ExperimentKind::Spectrum,
            SpaceDescriptor { family: Family::Sphere, d: 2 },
            out,
        );
        c.model = Some(SpectrumDescriptor::sine_power(1.0, 32));
        c
    }

    #[test]
    fn config_round_trips_through_json() {
        let dir = temp_dir("roundtrip");
        let mut config = spectrum_config(&dir.join("s.csv"));
        config.seed = 42;
        config.nu = Some(1.0);
        let json = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
        let json2 = serde_json::to_string(&back).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn validation_lists_all_errors_at_once() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::Slnd,
            SpaceDescriptor { family: Family::ComplexProjective, d: 5 },
            "",
        );
        c.nu = Some(-1.0);
        let err = c.validate().unwrap_err();
        match err {
            Error::Config(errors) => {
                assert!(errors.len() >= 4, "expected several errors, got {errors:?}");
                assert!(errors.iter().any(|e| e.starts_with("space")));
                assert!(errors.iter().any(|e| e.starts_with("model")));
                assert!(errors.iter().any(|e| e.starts_with("nu")));
                assert!(errors.iter().any(|e| e.starts_with("out")));
            }
            other => panic!("expected Config error, got {other}"),
        }
    }

    #[test]
    fn spectrum_run_writes_csv_and_b0() {
        let dir = temp_dir("spectrum");
        let out = dir.join("sine.csv");
        let output = run(&spectrum_config(&out)).unwrap();
        assert_eq!(output.files, vec![out.clone()]);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("l,b_l\n"));
        assert_eq!(text.lines().count(), 34); // header + 33 coefficients
        // b0 = 1 − 2/3
        let b0 = output.summary["b0"].as_f64().unwrap();
        assert!((b0 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reruns_are_byte_identical_across_thread_counts() {
        let dir = temp_dir("determinism");
        for (kind, name) in
            [(ExperimentKind::Sample, "sample.csv"), (ExperimentKind::Modulus, "modulus.json")]
        {
            let mut config = ExperimentConfig::new(
                kind,
                SpaceDescriptor { family: Family::Sphere, d: 2 },
                dir.join(format!("a-{name}")),
            );
            config.model = Some(SpectrumDescriptor::sine_power(1.0, 128));
            config.seed = 7;
            config.replicates = Some(20);
            config.levels = Some(5);
            run(&config).unwrap();
            let first = std::fs::read(&config.out).unwrap();

            let mut config2 = config.clone();
            config2.out = dir.join(format!("b-{name}"));
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap()
                .install(|| run(&config2).unwrap());
            let second = std::fs::read(&config2.out).unwrap();
            assert_eq!(first, second, "thread count changed bytes for {name}");
        }
    }

    #[test]
    fn spectrum_csv_round_trips_via_file_model() {
        let dir = temp_dir("filespec");
        let out = dir.join("spec.csv");
        run(&spectrum_config(&out)).unwrap();
        let loaded = spectrum_from_csv(&out).unwrap();
        assert_eq!(loaded.l_max(), 32);
        assert!((loaded.value(0) - 1.0 / 3.0).abs() < 1e-12);

        let mut config = ExperimentConfig::new(
            ExperimentKind::Covariance,
            SpaceDescriptor { family: Family::Sphere, d: 2 },
            dir.join("cov.csv"),
        );
        config.model = Some(SpectrumDescriptor {
            model: SpectrumKind::File,
            nu: Some(1.0),
            l: None,
            path: Some(out),
        });
        let output = run(&config).unwrap();
        assert!(output.summary["c0"].as_f64().unwrap() > 0.9);
    }

    #[test]
    fn acceptance_driver_reports_tampered_and_missing() {
        let dir = temp_dir("acceptance");
        let case_dir = dir.join("cases");
        std::fs::create_dir_all(&case_dir).unwrap();

        let good = AcceptanceCase {
            name: "spectrum-b0".into(),
            config: spectrum_config(&dir.join("unused.csv")),
            expect: vec![Expectation {
                path: "b0".into(),
                min: Some(0.333),
                max: Some(0.334),
            }],
        };
        std::fs::write(
            case_dir.join("01-good.json"),
            serde_json::to_string_pretty(&good).unwrap(),
        )
        .unwrap();

        let tampered = AcceptanceCase {
            name: "spectrum-b0-tampered".into(),
            expect: vec![Expectation { path: "b0".into(), min: Some(0.9), max: None }],
            ..good.clone()
        };
        std::fs::write(
            case_dir.join("02-tampered.json"),
            serde_json::to_string_pretty(&tampered).unwrap(),
        )
        .unwrap();

        std::fs::write(case_dir.join("03-broken.json"), "{ not json").unwrap();

        let summary = run_acceptance_dir(&case_dir, &dir.join("out")).unwrap();
        assert_eq!(summary.cases.len(), 3);
        assert!(!summary.passed);
        assert!(summary.cases[0].passed);
        assert!(!summary.cases[1].passed);
        assert!(summary.cases[1].checks.iter().any(|c| !c.passed));
        assert!(summary.cases[2].error.is_some());
        let table = summary.table();
        assert!(table.contains("PASS  spectrum-b0"));
        assert!(table.contains("FAIL  spectrum-b0-tampered"));
    }
}
