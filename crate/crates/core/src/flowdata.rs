//! Tidal inflow time series: CSV ingest, semi-diurnal synthesis, windowing
//! and turbulence statistics.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Principal lunar semi-diurnal (M2) period, seconds (12.42 h).
pub const M2_PERIOD_S: f64 = 44_712.0;

/// Turbulence intensity assumed when a flow file carries no `ti` column.
pub const DEFAULT_TURBULENCE_INTENSITY: f64 = 0.10;

/// Largest tolerated deviation from uniform sample spacing, seconds.
pub const SPACING_TOLERANCE_S: f64 = 1e-6;

const HEADER_WITH_TI: [&str; 3] = ["t_s", "u_mps", "ti"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    /// Time, s.
    pub t: f64,
    /// Flow speed, m/s.
    pub u: f64,
    /// Turbulence intensity as a fraction of `u`.
    pub ti: f64,
}

impl FlowSample {
    pub fn new(t: f64, u: f64, ti: f64) -> Result<Self> {
        let sample = FlowSample { t, u, ti };
        sample.validate()?;
        Ok(sample)
    }

    fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::invalid("t_s", format!("non-finite time {}", self.t)));
        }
        if !(self.u.is_finite() && self.u >= 0.0) {
            return Err(Error::invalid(
                "u_mps",
                format!("negative or non-finite speed {} at t = {}", self.u, self.t),
            ));
        }
        if !(0.0..=1.0).contains(&self.ti) {
            return Err(Error::invalid(
                "ti",
                format!(
                    "turbulence intensity {} outside [0, 1] at t = {}",
                    self.ti, self.t
                ),
            ));
        }
        Ok(())
    }
}

/// Mean-square turbulent velocity fluctuation u'² = (ti·u)², m²/s².
pub fn turbulence_msv(sample: &FlowSample) -> f64 {
    let fluct = sample.ti * sample.u;
    fluct * fluct
}

/// Uniformly sampled, strictly increasing, non-empty flow record.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSeries {
    samples: Vec<FlowSample>,
    dt: f64,
}

impl FlowSeries {
    /// Validates ordering and spacing. A single sample is accepted with the
    /// caller-supplied `dt`; otherwise `dt` is taken from the first interval.
    pub fn new(samples: Vec<FlowSample>, dt_hint: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("flow", "series is empty"));
        }
        for s in &samples {
            s.validate()?;
        }
        let dt = if samples.len() > 1 {
            samples[1].t - samples[0].t
        } else {
            dt_hint
        };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(
                "flow",
                format!("sampling interval {dt} must be > 0"),
            ));
        }
        for (i, pair) in samples.windows(2).enumerate() {
            let step = pair[1].t - pair[0].t;
            if (step - dt).abs() > SPACING_TOLERANCE_S {
                return Err(Error::invalid(
                    "flow",
                    format!(
                        "non-uniform spacing: interval {} between samples {} and {} differs from {}",
                        step,
                        i,
                        i + 1,
                        dt
                    ),
                ));
            }
        }
        Ok(FlowSeries { samples, dt })
    }

    pub fn samples(&self) -> &[FlowSample] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    /// Sample in force at time `t` under a zero-order hold.
    pub fn sample_at(&self, t: f64) -> &FlowSample {
        let idx = ((t - self.start()) / self.dt + 1e-9).floor();
        let idx = if idx <= 0.0 { 0 } else { idx as usize };
        &self.samples[idx.min(self.samples.len() - 1)]
    }

    pub fn mean_speed(&self) -> f64 {
        self.samples.iter().map(|s| s.u).sum::<f64>() / self.samples.len() as f64
    }
}

/// Reads a flow record with header `t_s,u_mps[,ti]`.
pub fn load_flow_csv(path: &Path) -> Result<FlowSeries> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_flow_csv(file, path)
}

/// Parses a flow record from any reader; `origin` labels diagnostics.
pub fn read_flow_csv<R: Read>(reader: R, origin: &Path) -> Result<FlowSeries> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let has_ti = match headers.len() {
        2 if headers.iter().eq(HEADER_WITH_TI[..2].iter().copied()) => false,
        3 if headers.iter().eq(HEADER_WITH_TI.iter().copied()) => true,
        _ => {
            return Err(parse_err(
                1,
                format!(
                    "expected header `t_s,u_mps,ti` (ti optional), found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ))
        }
    };

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record
                .get(i)
                .ok_or_else(|| parse_err(line, format!("missing column `{name}`")))?;
            raw.parse::<f64>()
                .map_err(|_| parse_err(line, format!("`{raw}` is not a number in column `{name}`")))
        };
        let t = field(0, "t_s")?;
        let u = field(1, "u_mps")?;
        let ti = if has_ti {
            field(2, "ti")?
        } else {
            DEFAULT_TURBULENCE_INTENSITY
        };
        let sample = FlowSample::new(t, u, ti).map_err(|e| parse_err(line, e.to_string()))?;
        if let Some(prev) = samples.last() {
            let prev: &FlowSample = prev;
            if sample.t <= prev.t {
                return Err(parse_err(
                    line,
                    format!("time {} does not increase", sample.t),
                ));
            }
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(parse_err(1, "no samples".into()));
    }
    FlowSeries::new(samples, 1.0)
}

/// Writes the series with the full three-column header. Values use the
/// shortest representation that round-trips exactly.
pub fn write_flow_csv<W: Write>(series: &FlowSeries, writer: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HEADER_WITH_TI)?;
    for s in series.samples() {
        wtr.write_record(&[s.t.to_string(), s.u.to_string(), s.ti.to_string()])?;
    }
    wtr.flush()
}

/// Semi-diurnal flow U(t) = u_mean + u_amp·sin(2πt/T_M2), sampled every `dt`
/// for `duration` seconds starting at t = 0.
pub fn synthesize_semidiurnal(
    u_mean: f64,
    u_amp: f64,
    ti: f64,
    dt: f64,
    duration: f64,
) -> Result<FlowSeries> {
    if !(u_amp >= 0.0 && u_mean >= u_amp) {
        return Err(Error::invalid(
            "flow.synth",
            format!("need u_mean >= u_amp >= 0 (got u_mean = {u_mean}, u_amp = {u_amp})"),
        ));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("flow.synth.dt", format!("{dt} must be > 0")));
    }
    if !(duration >= dt && duration.is_finite()) {
        return Err(Error::invalid(
            "flow.synth.duration",
            format!("{duration} must be >= dt ({dt})"),
        ));
    }
    let n = (duration / dt + 1e-9).floor() as usize;
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            let u = u_mean + u_amp * (2.0 * PI * t / M2_PERIOD_S).sin();
            FlowSample::new(t, u.max(0.0), ti)
        })
        .collect::<Result<Vec<_>>>()?;
    FlowSeries::new(samples, dt)
}

/// Sub-series with `t0 <= t <= t1`.
pub fn window(series: &FlowSeries, t0: f64, t1: f64) -> Result<FlowSeries> {
    if !(t0 < t1) {
        return Err(Error::invalid(
            "window",
            format!("need t0 < t1 (got {t0}, {t1})"),
        ));
    }
    let eps = SPACING_TOLERANCE_S;
    if t0 < series.start() - eps || t1 > series.end() + eps {
        return Err(Error::invalid(
            "window",
            format!(
                "[{t0}, {t1}] outside series span [{}, {}]",
                series.start(),
                series.end()
            ),
        ));
    }
    let samples: Vec<FlowSample> = series
        .samples()
        .iter()
        .filter(|s| s.t >= t0 - eps && s.t <= t1 + eps)
        .copied()
        .collect();
    if samples.is_empty() {
        return Err(Error::invalid(
            "window",
            format!("no samples in [{t0}, {t1}]"),
        ));
    }
    FlowSeries::new(samples, series.dt())
}
