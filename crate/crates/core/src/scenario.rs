//! End-to-end runs, control-strategy sweeps, comparisons, correlation
//! statistics and the TTS-onset flow-speed search.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{AcousticsConfig, ReceivedSpl, SourceLevels};
use crate::bioimpact::{self, ExposureCriteria, ImpactResult, SpeciesProfile};
use crate::error::{Error, Result};
use crate::flowdata::{self, FlowSeries};
use crate::turbine::{
    self, ControlConfig, DrivetrainConfig, DrivetrainKind, OperatingState, Plant, RotorConfig,
};

/// Complete default scenario; every omitted config key falls back to it.
pub const DEFAULT_SCENARIO_JSON: &str = include_str!("../data/defaults.json");

/// Range at which headline SPL figures are reported, m.
pub const HEADLINE_DISTANCE_M: f64 = 50.0;

/// Flow-speed bracket searched for TTS onset, m/s.
pub const ONSET_BRACKET_MPS: (f64, f64) = (0.5, 4.0);
/// Bisection stops once the bracket is narrower than this, m/s.
pub const ONSET_TOLERANCE_MPS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub u_mean_mps: f64,
    pub u_amp_mps: f64,
    pub ti: f64,
    pub dt_s: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlowSource {
    Csv(PathBuf),
    Synth(SynthSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub flow: FlowSource,
    pub window: Option<(f64, f64)>,
    pub rotor: RotorConfig,
    pub drivetrain: DrivetrainConfig,
    pub control: ControlConfig,
    pub acoustics: AcousticsConfig,
    pub distances_m: Vec<f64>,
    /// Species table; `None` selects the bundled illustrative set.
    pub species: Option<PathBuf>,
    pub exposure: ExposureCriteria,
    pub dt_s: f64,
    /// Reserved for stochastic extensions; no current code path draws from it.
    pub seed: u64,
    /// Leading part of the run excluded from correlation statistics, s.
    pub settle_time_s: f64,
    /// Initial rotor speed; `None` starts at equilibrium for the first sample.
    pub initial_omega_rad_s: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_SCENARIO_JSON).expect("bundled default scenario is valid")
    }
}

impl ScenarioConfig {
    pub fn plant(&self) -> Plant {
        Plant {
            rotor: self.rotor.clone(),
            drivetrain: self.drivetrain.clone(),
            control: self.control.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plant().validate()?;
        self.acoustics.validate()?;
        self.exposure.validate()?;
        if self.distances_m.is_empty() {
            return Err(Error::invalid(
                "distances_m",
                "at least one receiver distance is required",
            ));
        }
        if let Some(r) = self
            .distances_m
            .iter()
            .find(|r| !(**r >= 1.0 && r.is_finite()))
        {
            return Err(Error::invalid(
                "distances_m",
                format!("{r} m must be >= 1 m"),
            ));
        }
        if let Some((t0, t1)) = self.window {
            if !(t0 < t1) {
                return Err(Error::invalid(
                    "window",
                    format!("need t0 < t1 (got [{t0}, {t1}])"),
                ));
            }
        }
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(Error::invalid("dt_s", format!("{} must be > 0", self.dt_s)));
        }
        if !(self.settle_time_s >= 0.0) {
            return Err(Error::invalid(
                "settle_time_s",
                format!("{} must be >= 0", self.settle_time_s),
            ));
        }
        if let FlowSource::Synth(s) = &self.flow {
            if !(0.0..=1.0).contains(&s.ti) {
                return Err(Error::invalid(
                    "flow.ti",
                    format!("{} outside [0, 1]", s.ti),
                ));
            }
        }
        Ok(())
    }

    /// Loads (or synthesises) the flow record and species table and applies
    /// the window.
    pub fn load_inputs(&self) -> Result<ScenarioInputs> {
        self.validate()?;
        let full = match &self.flow {
            FlowSource::Csv(path) => flowdata::load_flow_csv(path)?,
            FlowSource::Synth(s) => flowdata::synthesize_semidiurnal(
                s.u_mean_mps,
                s.u_amp_mps,
                s.ti,
                s.dt_s,
                s.duration_s,
            )?,
        };
        let flow = match self.window {
            Some((t0, t1)) => flowdata::window(&full, t0, t1)?,
            None => full,
        };
        let species = match &self.species {
            Some(path) => bioimpact::load_species_csv(path)?,
            None => bioimpact::bundled_species(),
        };
        Ok(ScenarioInputs { flow, species })
    }
}

/// Loaded data a scenario runs on.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInputs {
    pub flow: FlowSeries,
    pub species: Vec<SpeciesProfile>,
}

impl ScenarioInputs {
    pub fn mean_turbulence_intensity(&self) -> f64 {
        let s = self.flow.samples();
        s.iter().map(|x| x.ti).sum::<f64>() / s.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub distances_m: Vec<f64>,
    pub states: Vec<OperatingState>,
    /// Mean-square turbulent velocity at each state, m²/s².
    pub u2: Vec<f64>,
    pub source_levels: Vec<SourceLevels>,
    /// `received[i][j]`: state `i`, distance `distances_m[j]`.
    pub received: Vec<Vec<ReceivedSpl>>,
    /// Mechanical energy over the run (trapezoid rule), J.
    pub energy_j: f64,
    pub spl_max_50m: Option<f64>,
    /// Index of the state with the highest total SPL at 50 m.
    pub max_index: usize,
    pub impacts: Vec<ImpactResult>,
}

impl RunResult {
    /// Highest total SPL over the run at each configured distance.
    pub fn max_spl_per_distance(&self) -> Vec<Option<f64>> {
        (0..self.distances_m.len())
            .map(|j| {
                self.received
                    .iter()
                    .filter_map(|row| row[j].total)
                    .reduce(f64::max)
            })
            .collect()
    }

    /// States from `settle_time` after the start onwards.
    pub fn settled_range(&self, settle_time: f64) -> std::ops::Range<usize> {
        let t0 = self.states.first().map_or(0.0, |s| s.t);
        let start = self
            .states
            .iter()
            .position(|s| s.t >= t0 + settle_time - 1e-9)
            .unwrap_or(self.states.len());
        start..self.states.len()
    }
}

fn trapezoid(states: &[OperatingState]) -> f64 {
    states
        .windows(2)
        .map(|w| 0.5 * (w[0].p_mech + w[1].p_mech) * (w[1].t - w[0].t))
        .sum()
}

/// Runs one scenario on already-loaded inputs.
pub fn run_with_inputs(cfg: &ScenarioConfig, inputs: &ScenarioInputs) -> Result<RunResult> {
    cfg.validate()?;
    let plant = cfg.plant();
    let states = turbine::simulate(&inputs.flow, &plant, cfg.dt_s, cfg.initial_omega_rad_s)?;

    let u2: Vec<f64> = states
        .iter()
        .map(|s| {
            let ti = inputs.flow.sample_at(s.t).ti;
            let f = ti * s.u;
            f * f
        })
        .collect();

    let source_levels = states
        .iter()
        .zip(&u2)
        .map(|(s, &u2)| crate::acoustics::source_levels(s, u2, &plant, &cfg.acoustics))
        .collect::<Result<Vec<_>>>()?;

    let received = source_levels
        .iter()
        .map(|lv| {
            cfg.distances_m
                .iter()
                .map(|&r| lv.at_distance(r))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut spl_max_50m: Option<f64> = None;
    let mut max_index = 0;
    for (i, lv) in source_levels.iter().enumerate() {
        let total = lv.at_distance(HEADLINE_DISTANCE_M)?.total;
        if let Some(l) = total {
            if spl_max_50m.is_none_or(|m| l > m) {
                spl_max_50m = Some(l);
                max_index = i;
            }
        }
    }

    let impacts = bioimpact::assess(
        source_levels[max_index].total(),
        &inputs.species,
        &cfg.exposure,
    )?;

    Ok(RunResult {
        distances_m: cfg.distances_m.clone(),
        energy_j: trapezoid(&states),
        states,
        u2,
        source_levels,
        received,
        spl_max_50m,
        max_index,
        impacts,
    })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    let inputs = cfg.load_inputs()?;
    run_with_inputs(cfg, &inputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    FS,
    KoptFactor,
    DrivetrainKind,
}

impl SweepParameter {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "f_s" | "f_s_hz" => Some(SweepParameter::FS),
            "kopt_factor" => Some(SweepParameter::KoptFactor),
            "drivetrain_kind" => Some(SweepParameter::DrivetrainKind),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::FS => "f_s",
            SweepParameter::KoptFactor => "kopt_factor",
            SweepParameter::DrivetrainKind => "drivetrain_kind",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Kind(DrivetrainKind),
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v}"),
            SweepValue::Kind(DrivetrainKind::Geared) => f.write_str("geared"),
            SweepValue::Kind(DrivetrainKind::Direct) => f.write_str("direct"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<SweepValue>,
}

impl SweepSpec {
    /// Parses comma-separated values for `parameter`.
    pub fn parse(parameter: SweepParameter, values: &str) -> Result<Self> {
        let values = values
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match parameter {
                SweepParameter::DrivetrainKind => match s {
                    "geared" => Ok(SweepValue::Kind(DrivetrainKind::Geared)),
                    "direct" => Ok(SweepValue::Kind(DrivetrainKind::Direct)),
                    _ => Err(Error::invalid(
                        "sweep.values",
                        format!("`{s}` is not geared or direct"),
                    )),
                },
                _ => s
                    .parse::<f64>()
                    .map(SweepValue::Number)
                    .map_err(|_| Error::invalid("sweep.values", format!("`{s}` is not a number"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = SweepSpec { parameter, values };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep.values", "no values given"));
        }
        for v in &self.values {
            let ok = match (self.parameter, v) {
                (SweepParameter::FS, SweepValue::Number(x)) => {
                    let (lo, hi) = turbine::SWITCHING_FREQUENCY_RANGE;
                    *x >= lo && *x <= hi
                }
                (SweepParameter::KoptFactor, SweepValue::Number(x)) => {
                    let (lo, hi) = turbine::KOPT_FACTOR_RANGE;
                    *x >= lo - 1e-12 && *x <= hi + 1e-12
                }
                (SweepParameter::DrivetrainKind, SweepValue::Kind(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::invalid(
                    "sweep.values",
                    format!("{v} is not a valid {} value", self.parameter.name()),
                ));
            }
        }
        Ok(())
    }

    /// The value the base configuration already holds for this parameter.
    pub fn base_value(&self, base: &ScenarioConfig) -> SweepValue {
        match self.parameter {
            SweepParameter::FS => SweepValue::Number(base.control.f_s_hz),
            SweepParameter::KoptFactor => SweepValue::Number(base.control.kopt_factor),
            SweepParameter::DrivetrainKind => SweepValue::Kind(base.drivetrain.kind),
        }
    }

    /// The base configuration with one sweep value applied.
    pub fn apply(&self, base: &ScenarioConfig, value: SweepValue) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match (self.parameter, value) {
            (SweepParameter::FS, SweepValue::Number(x)) => cfg.control.f_s_hz = x,
            (SweepParameter::KoptFactor, SweepValue::Number(x)) => cfg.control.kopt_factor = x,
            (SweepParameter::DrivetrainKind, SweepValue::Kind(DrivetrainKind::Direct)) => {
                cfg.drivetrain = cfg.drivetrain.to_direct()
            }
            (SweepParameter::DrivetrainKind, SweepValue::Kind(DrivetrainKind::Geared)) => {
                cfg.drivetrain.kind = DrivetrainKind::Geared
            }
            _ => {
                return Err(Error::invalid(
                    "sweep.values",
                    format!("{value} does not apply to {}", self.parameter.name()),
                ))
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn sorted_values(&self) -> Vec<SweepValue> {
        let key = |v: &SweepValue| match v {
            SweepValue::Number(x) => *x,
            SweepValue::Kind(DrivetrainKind::Geared) => 0.0,
            SweepValue::Kind(DrivetrainKind::Direct) => 1.0,
        };
        let mut values = self.values.clone();
        values.sort_by(|a, b| key(a).total_cmp(&key(b)));
        values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: SweepValue,
    pub spl_max_50m: Option<f64>,
    pub energy_j: f64,
    pub impacts: Vec<ImpactResult>,
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::invalid("threads", e.to_string()))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Runs one independent scenario per sweep value, in parallel, returning
/// rows in ascending value order. `threads` caps the worker count.
pub fn sweep(
    base: &ScenarioConfig,
    inputs: &ScenarioInputs,
    spec: &SweepSpec,
    threads: Option<usize>,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let configs = spec
        .sorted_values()
        .into_iter()
        .map(|v| Ok((v, spec.apply(base, v)?)))
        .collect::<Result<Vec<_>>>()?;
    with_pool(threads, || {
        configs
            .par_iter()
            .map(|(value, cfg)| {
                let run = run_with_inputs(cfg, inputs)?;
                Ok(SweepRow {
                    value: *value,
                    spl_max_50m: run.spl_max_50m,
                    energy_j: run.energy_j,
                    impacts: run.impacts,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// Pearson product-moment correlation coefficient.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(
            "correlation",
            format!("length mismatch {} vs {}", x.len(), y.len()),
        ));
    }
    if x.len() < 3 {
        return Err(Error::invalid("correlation", "need at least three samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid(
            "correlation",
            "undefined for a constant series",
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub distance_m: f64,
    pub samples: usize,
    pub spl_vs_omega: f64,
    pub spl_vs_u: f64,
}

/// Correlation of total SPL at `distance` with rotor speed and flow speed
/// over the settled part of a run.
pub fn correlate(run: &RunResult, settle_time: f64, distance: f64) -> Result<CorrelationReport> {
    let range = run.settled_range(settle_time);
    let mut spl = Vec::with_capacity(range.len());
    let mut omega = Vec::with_capacity(range.len());
    let mut u = Vec::with_capacity(range.len());
    for i in range {
        let total = run.source_levels[i].at_distance(distance)?.total;
        if let Some(l) = total {
            spl.push(l);
            omega.push(run.states[i].omega);
            u.push(run.states[i].u);
        }
    }
    Ok(CorrelationReport {
        distance_m: distance,
        samples: spl.len(),
        spl_vs_omega: pearson_correlation(&spl, &omega)?,
        spl_vs_u: pearson_correlation(&spl, &u)?,
    })
}

/// Total SPL at range `r` for the plant settled in a constant flow `u`.
pub fn equilibrium_spl(cfg: &ScenarioConfig, u: f64, ti: f64, r: f64) -> Result<Option<f64>> {
    let plant = cfg.plant();
    let state = turbine::equilibrium_state(0.0, u, &plant);
    let u2 = (ti * u) * (ti * u);
    Ok(crate::acoustics::received_spl(&state, u2, r, &plant, &cfg.acoustics)?.total)
}

/// Lowest constant flow speed in [0.5, 4.0] m/s at which the total SPL at
/// `r` exceeds the species' TTS level, to within 0.01 m/s. `None` when the
/// threshold is not crossed inside the bracket.
pub fn tts_onset_speed(
    cfg: &ScenarioConfig,
    species: &SpeciesProfile,
    ti: f64,
    r: f64,
) -> Result<Option<f64>> {
    cfg.validate()?;
    let threshold = bioimpact::tts_threshold(species.gtv, cfg.exposure.t_exposure_s)?;
    let exceeds = |u: f64| -> Result<bool> {
        Ok(equilibrium_spl(cfg, u, ti, r)?.is_some_and(|l| l > threshold))
    };
    let (mut lo, mut hi) = ONSET_BRACKET_MPS;
    if !exceeds(hi)? {
        return Ok(None);
    }
    if exceeds(lo)? {
        return Ok(Some(lo));
    }
    while hi - lo >= ONSET_TOLERANCE_MPS {
        let mid = 0.5 * (lo + hi);
        if exceeds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnsetRow {
    pub species: String,
    pub tts_level: f64,
    pub onset_speed_mps: Option<f64>,
}

/// TTS onset for every species, evaluated concurrently.
pub fn tts_onset_all(
    cfg: &ScenarioConfig,
    inputs: &ScenarioInputs,
    r: f64,
    threads: Option<usize>,
) -> Result<Vec<OnsetRow>> {
    let ti = inputs.mean_turbulence_intensity();
    with_pool(threads, || {
        inputs
            .species
            .par_iter()
            .map(|sp| {
                Ok(OnsetRow {
                    species: sp.name.clone(),
                    tts_level: bioimpact::tts_threshold(sp.gtv, cfg.exposure.t_exposure_s)?,
                    onset_speed_mps: tts_onset_speed(cfg, sp, ti, r)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactDelta {
    pub species: String,
    pub audible_radius_m: f64,
    pub tts_radius_m: f64,
    pub pts_radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// (distance, Δ max total SPL in dB, b − a).
    pub delta_spl_db: Vec<(f64, Option<f64>)>,
    /// (E_b − E_a)/E_a in percent; `None` when run `a` produced no energy.
    pub delta_energy_pct: Option<f64>,
    pub delta_impacts: Vec<ImpactDelta>,
}

/// Element-wise differences `b − a` between two runs.
pub fn compare(a: &RunResult, b: &RunResult) -> Result<Comparison> {
    if a.distances_m != b.distances_m {
        return Err(Error::invalid(
            "compare",
            "runs use different receiver distances",
        ));
    }
    let names = |r: &RunResult| {
        r.impacts
            .iter()
            .map(|i| i.species.clone())
            .collect::<Vec<_>>()
    };
    if names(a) != names(b) {
        return Err(Error::invalid("compare", "runs use different species sets"));
    }
    let delta_spl_db = a
        .distances_m
        .iter()
        .zip(
            a.max_spl_per_distance()
                .into_iter()
                .zip(b.max_spl_per_distance()),
        )
        .map(|(&r, (la, lb))| (r, la.zip(lb).map(|(x, y)| y - x)))
        .collect();
    let delta_energy_pct = if a.energy_j > 0.0 {
        Some(100.0 * (b.energy_j - a.energy_j) / a.energy_j)
    } else if b.energy_j == 0.0 {
        Some(0.0)
    } else {
        None
    };
    let delta_impacts = a
        .impacts
        .iter()
        .zip(&b.impacts)
        .map(|(x, y)| ImpactDelta {
            species: x.species.clone(),
            audible_radius_m: y.audible_radius - x.audible_radius,
            tts_radius_m: y.tts_radius - x.tts_radius,
            pts_radius_m: y.pts_radius - x.pts_radius,
        })
        .collect();
    Ok(Comparison {
        delta_spl_db,
        delta_energy_pct,
        delta_impacts,
    })
}

/// Resolves relative input paths against `base` (typically the directory of
/// the config file).
pub fn resolve_paths(cfg: &mut ScenarioConfig, base: &Path) {
    if let FlowSource::Csv(p) = &mut cfg.flow {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    if let Some(p) = &mut cfg.species {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(u: f64, seconds: f64) -> ScenarioConfig {
        ScenarioConfig {
            flow: FlowSource::Synth(SynthSpec {
                u_mean_mps: u,
                u_amp_mps: 0.0,
                ti: 0.1,
                dt_s: 1.0,
                duration_s: seconds + 1.0,
            }),
            window: None,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.rotor.lambda_opt, 4.0);
        assert_eq!(cfg.rotor.cp_max, 0.45);
        assert_eq!(cfg.rotor.cp_curve.len(), 11);
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        let r = pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((r - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(pearson_correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_flow_is_silent() {
        let cfg = constant(0.0, 5.0);
        let run = run_scenario(&cfg).unwrap();
        assert_eq!(run.energy_j, 0.0);
        assert_eq!(run.spl_max_50m, None);
        assert!(run.source_levels.iter().all(|l| l.total().is_none()));
        assert!(run
            .impacts
            .iter()
            .all(|i| i.tts_radius == 0.0 && i.audible_radius == 0.0));
    }

    #[test]
    fn compare_self_is_zero() {
        let run = run_scenario(&constant(2.0, 5.0)).unwrap();
        let c = compare(&run, &run).unwrap();
        assert!(c.delta_spl_db.iter().all(|(_, d)| *d == Some(0.0)));
        assert_eq!(c.delta_energy_pct, Some(0.0));
        assert!(c.delta_impacts.iter().all(|d| d.tts_radius_m == 0.0));
    }

    #[test]
    fn compare_rejects_mismatch() {
        let a = run_scenario(&constant(2.0, 5.0)).unwrap();
        let mut cfg = constant(2.0, 5.0);
        cfg.distances_m = vec![20.0];
        let b = run_scenario(&cfg).unwrap();
        assert!(compare(&a, &b).is_err());
    }

    #[test]
    fn sweep_rejects_out_of_range_values() {
        assert!(SweepSpec::parse(SweepParameter::KoptFactor, "0.8,1.5").is_err());
        assert!(SweepSpec::parse(SweepParameter::FS, "500").is_err());
        assert!(SweepSpec::parse(SweepParameter::DrivetrainKind, "hydraulic").is_err());
        assert!(SweepSpec::parse(SweepParameter::FS, "").is_err());
    }

    #[test]
    fn sweep_rows_sorted_by_value() {
        let cfg = constant(2.0, 3.0);
        let inputs = cfg.load_inputs().unwrap();
        let spec = SweepSpec::parse(SweepParameter::KoptFactor, "1.2,0.8,1.0").unwrap();
        let rows = sweep(&cfg, &inputs, &spec, Some(2)).unwrap();
        let values: Vec<String> = rows.iter().map(|r| r.value.to_string()).collect();
        assert_eq!(values, ["0.8", "1", "1.2"]);
    }

    #[test]
    fn config_validation_errors() {
        let mut cfg = ScenarioConfig::default();
        cfg.distances_m = vec![0.5];
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.window = Some((10.0, 10.0));
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.control.kopt_factor = 1.5;
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("kopt_factor"));
    }

    #[test]
    fn onset_none_when_threshold_unreachable() {
        let cfg = ScenarioConfig::default();
        let deaf = SpeciesProfile {
            name: "deaf".into(),
            group: bioimpact::SpeciesGroup::Fish,
            gtv: 200.0,
            audiogram: vec![],
        };
        assert_eq!(tts_onset_speed(&cfg, &deaf, 0.1, 100.0).unwrap(), None);
    }
}
