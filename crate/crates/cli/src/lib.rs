//! Command-line front end: `tccs <subcommand> --config FILE [...]`.
//!
//! Exit codes: 0 success, 1 usage error, 2 config/validation/I/O error,
//! 3 numerical failure. Errors go to stderr prefixed with `error_code:`.

pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tccs_core::bioimpact::{self, BUNDLED_SPECIES_CSV};
use tccs_core::flowdata;
use tccs_core::scenario::{self, FlowSource, SweepParameter, SweepSpec};
use tccs_core::{RunResult, ScenarioConfig, ScenarioInputs};

pub use crate::config::{load_config, LoadedConfig};
pub use crate::error::CliError;
use crate::output::{write_json, Cell, Format, Table};

/// Environment variable capping sweep and onset parallelism.
pub const THREADS_ENV: &str = "TCCS_THREADS";

const STATES_HEADER: &[&str] = &[
    "t_s",
    "u_mps",
    "omega_rad_s",
    "lambda",
    "cp",
    "torque_rotor_nm",
    "torque_gen_nm",
    "p_mech_w",
];
const SPL_HEADER: &[&str] = &[
    "t_s",
    "r_m",
    "spl_turb_db",
    "spl_gear_db",
    "spl_gen_db",
    "spl_total_db",
];
const IMPACTS_HEADER: &[&str] = &[
    "species",
    "tts_db",
    "pts_db",
    "audible_radius_m",
    "tts_radius_m",
    "pts_radius_m",
];

#[derive(Debug, Parser)]
#[command(
    name = "tccs",
    version,
    about = "Tidal current converter noise simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override a config value, e.g. `--set control.f_s=2000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long = "out", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Species table replacing the configured one.
    #[arg(long)]
    pub species: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the scenario and write states, SPL, impacts and a summary.
    Run(Common),
    /// Re-run the scenario for each value of one control parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// f_s, kopt_factor or drivetrain_kind.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
    /// Impact ranges at the loudest time step.
    Assess(Common),
    /// Correlation of SPL with rotor speed and flow speed once settled.
    Correlate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50.0)]
        distance: f64,
    },
    /// Lowest flow speed at which SPL at the given range reaches each species' TTS level.
    Onset {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100.0)]
        distance: f64,
    },
    /// Write a synthetic semi-diurnal flow record.
    SynthFlow {
        #[arg(long = "out", default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1.3)]
        u_mean: f64,
        #[arg(long, default_value_t = 0.82)]
        u_amp: f64,
        #[arg(long, default_value_t = flowdata::DEFAULT_TURBULENCE_INTENSITY)]
        ti: f64,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(long, default_value_t = 10_000.0)]
        duration: f64,
    },
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("error_code: 1 usage");
            eprint!("{}", e.render());
            return 1;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error_code: {} {}: {e}", e.exit_code(), e.kind());
            e.exit_code()
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| {
                CliError::config(format!("{THREADS_ENV}={v} is not a positive integer"))
            }),
        Err(_) => Ok(None),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_hash(path: &Path) -> Result<String, CliError> {
    std::fs::read(path)
        .map(|b| sha256_hex(&b))
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

struct Prepared {
    loaded: LoadedConfig,
    inputs: ScenarioInputs,
    common: Common,
}

impl Prepared {
    fn load(common: Common) -> Result<Self, CliError> {
        let mut loaded = load_config(&common.config, &common.overrides)?;
        if let Some(sp) = &common.species {
            loaded.config.species = Some(sp.clone());
        }
        let inputs = loaded.config.load_inputs()?;
        Ok(Prepared {
            loaded,
            inputs,
            common,
        })
    }

    fn cfg(&self) -> &ScenarioConfig {
        &self.loaded.config
    }

    fn input_hashes(&self) -> Result<Value, CliError> {
        let cfg = self.cfg();
        let flow = match &cfg.flow {
            FlowSource::Csv(p) => Value::String(file_hash(p)?),
            FlowSource::Synth(_) => Value::Null,
        };
        let species = match &cfg.species {
            Some(p) => file_hash(p)?,
            None => sha256_hex(BUNDLED_SPECIES_CSV.as_bytes()),
        };
        Ok(json!({
            "config": sha256_hex(&self.loaded.raw),
            "flow": flow,
            "species": species,
        }))
    }

    fn summary(&self, subcommand: &str, results: Value) -> Result<Value, CliError> {
        Ok(json!({
            "tool": "tccs",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": subcommand,
            "config_path": self.loaded.path.display().to_string(),
            "resolved_config": serde_json::to_value(self.cfg()).map_err(|e| CliError::config(e.to_string()))?,
            "applied_defaults": self.loaded.applied_defaults,
            "overrides": self.loaded.overrides,
            "input_hashes": self.input_hashes()?,
            "results": results,
        }))
    }

    fn finish(&self, subcommand: &str, results: Value) -> Result<(), CliError> {
        write_json(
            &self.common.out,
            "summary.json",
            &self.summary(subcommand, results)?,
        )
    }
}

fn impacts_table(impacts: &[tccs_core::ImpactResult]) -> Table {
    let mut t = Table::new("impacts", IMPACTS_HEADER);
    for i in impacts {
        t.push(vec![
            Cell::Text(i.species.clone()),
            Cell::Num(i.tts_level),
            Cell::Num(i.pts_level),
            Cell::Num(i.audible_radius),
            Cell::Num(i.tts_radius),
            Cell::Num(i.pts_radius),
        ]);
    }
    t
}

fn states_table(run: &RunResult) -> Table {
    let mut t = Table::new("states", STATES_HEADER);
    for s in &run.states {
        t.push(
            [
                s.t,
                s.u,
                s.omega,
                s.lambda,
                s.cp,
                s.torque_rotor,
                s.torque_gen,
                s.p_mech,
            ]
            .into_iter()
            .map(Cell::Num)
            .collect(),
        );
    }
    t
}

fn spl_table(run: &RunResult) -> Table {
    let mut t = Table::new("spl", SPL_HEADER);
    for (state, row) in run.states.iter().zip(&run.received) {
        for rx in row {
            t.push(vec![
                Cell::Num(state.t),
                Cell::Num(rx.r),
                Cell::Opt(rx.turb),
                Cell::Opt(rx.gear),
                Cell::Opt(rx.gen),
                Cell::Opt(rx.total),
            ]);
        }
    }
    t
}

fn run_summary(run: &RunResult) -> Value {
    let at_max = &run.source_levels[run.max_index];
    json!({
        "states": run.states.len(),
        "energy_j": run.energy_j,
        "spl_max_50m_db": run.spl_max_50m,
        "spl_max_time_s": run.states[run.max_index].t,
        "source_levels_at_max_db_1m": {
            "turbulence": at_max.turb,
            "gearbox": at_max.gear,
            "generator": at_max.gen,
            "total": at_max.total(),
        },
        "max_spl_per_distance": run
            .distances_m
            .iter()
            .zip(run.max_spl_per_distance())
            .map(|(r, l)| json!({ "r_m": r, "spl_total_db": l }))
            .collect::<Vec<_>>(),
    })
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(common) => {
            let p = Prepared::load(common)?;
            let run = scenario::run_with_inputs(p.cfg(), &p.inputs)?;
            let fmt = p.common.format;
            states_table(&run).write(&p.common.out, fmt)?;
            spl_table(&run).write(&p.common.out, fmt)?;
            impacts_table(&run.impacts).write(&p.common.out, fmt)?;
            p.finish("run", run_summary(&run))
        }
        Command::Assess(common) => {
            let p = Prepared::load(common)?;
            let run = scenario::run_with_inputs(p.cfg(), &p.inputs)?;
            impacts_table(&run.impacts).write(&p.common.out, p.common.format)?;
            p.finish("assess", run_summary(&run))
        }
        Command::Sweep {
            common,
            param,
            values,
        } => {
            let parameter = SweepParameter::parse(&param).ok_or_else(|| {
                CliError::usage(format!(
                    "--param must be f_s, kopt_factor or drivetrain_kind (got `{param}`)"
                ))
            })?;
            let spec = SweepSpec::parse(parameter, &values)?;
            let p = Prepared::load(common)?;
            let rows = scenario::sweep(p.cfg(), &p.inputs, &spec, threads_from_env()?)?;

            let mut table = Table::new(
                "sweep",
                &[
                    "value",
                    "spl_max_50m_db",
                    "energy_j",
                    "delta_spl_db",
                    "delta_energy_pct",
                ],
            );
            let mut impacts = Table::new(
                "sweep_impacts",
                &[
                    "value",
                    "species",
                    "tts_db",
                    "pts_db",
                    "audible_radius_m",
                    "tts_radius_m",
                    "pts_radius_m",
                ],
            );
            let base_value = spec.base_value(p.cfg());
            let reference = rows
                .iter()
                .find(|r| r.value == base_value)
                .unwrap_or(&rows[0]);
            for row in &rows {
                let d_spl = row
                    .spl_max_50m
                    .zip(reference.spl_max_50m)
                    .map(|(a, b)| a - b);
                let d_energy = (reference.energy_j > 0.0)
                    .then(|| 100.0 * (row.energy_j - reference.energy_j) / reference.energy_j);
                table.push(vec![
                    Cell::Text(row.value.to_string()),
                    Cell::Opt(row.spl_max_50m),
                    Cell::Num(row.energy_j),
                    Cell::Opt(d_spl),
                    Cell::Opt(d_energy),
                ]);
                for i in &row.impacts {
                    impacts.push(vec![
                        Cell::Text(row.value.to_string()),
                        Cell::Text(i.species.clone()),
                        Cell::Num(i.tts_level),
                        Cell::Num(i.pts_level),
                        Cell::Num(i.audible_radius),
                        Cell::Num(i.tts_radius),
                        Cell::Num(i.pts_radius),
                    ]);
                }
            }
            table.write(&p.common.out, p.common.format)?;
            impacts.write(&p.common.out, p.common.format)?;
            p.finish(
                "sweep",
                json!({
                    "parameter": parameter.name(),
                    "reference_value": reference.value.to_string(),
                    "rows": rows,
                }),
            )
        }
        Command::Correlate { common, distance } => {
            let p = Prepared::load(common)?;
            let run = scenario::run_with_inputs(p.cfg(), &p.inputs)?;
            let report = scenario::correlate(&run, p.cfg().settle_time_s, distance)?;
            let mut t = Table::new(
                "correlation",
                &[
                    "distance_m",
                    "settle_time_s",
                    "samples",
                    "spl_vs_omega",
                    "spl_vs_u",
                ],
            );
            t.push(vec![
                Cell::Num(report.distance_m),
                Cell::Num(p.cfg().settle_time_s),
                Cell::Num(report.samples as f64),
                Cell::Num(report.spl_vs_omega),
                Cell::Num(report.spl_vs_u),
            ]);
            t.write(&p.common.out, p.common.format)?;
            p.finish(
                "correlate",
                serde_json::to_value(&report).map_err(|e| CliError::config(e.to_string()))?,
            )
        }
        Command::Onset { common, distance } => {
            let p = Prepared::load(common)?;
            if !(distance >= 1.0) {
                return Err(CliError::config(format!(
                    "--distance {distance} must be >= 1 m"
                )));
            }
            let rows = scenario::tts_onset_all(p.cfg(), &p.inputs, distance, threads_from_env()?)?;
            let mut t = Table::new("onset", &["species", "tts_db", "onset_speed_mps"]);
            for r in &rows {
                t.push(vec![
                    Cell::Text(r.species.clone()),
                    Cell::Num(r.tts_level),
                    Cell::Opt(r.onset_speed_mps),
                ]);
            }
            t.write(&p.common.out, p.common.format)?;
            let results: Vec<Value> = rows
                .iter()
                .map(|r| match r.onset_speed_mps {
                    Some(u) => json!({ "species": r.species, "onset_speed_mps": u }),
                    None => json!({ "species": r.species, "onset_speed_mps": null, "note": "no onset in range" }),
                })
                .collect();
            p.finish(
                "onset",
                json!({ "distance_m": distance, "species": results }),
            )
        }
        Command::SynthFlow {
            out,
            u_mean,
            u_amp,
            ti,
            dt,
            duration,
        } => {
            let series = flowdata::synthesize_semidiurnal(u_mean, u_amp, ti, dt, duration)?;
            let mut bytes = Vec::new();
            flowdata::write_flow_csv(&series, &mut bytes)
                .map_err(|e| CliError::config(e.to_string()))?;
            output::write_atomic(&out, "flow.csv", &bytes)?;
            write_json(
                &out,
                "summary.json",
                &json!({
                    "tool": "tccs",
                    "version": env!("CARGO_PKG_VERSION"),
                    "subcommand": "synth-flow",
                    "parameters": {
                        "u_mean_mps": u_mean, "u_amp_mps": u_amp, "ti": ti, "dt_s": dt, "duration_s": duration,
                        "m2_period_s": flowdata::M2_PERIOD_S,
                    },
                    "samples": series.len(),
                    "output_hash": sha256_hex(&bytes),
                }),
            )
        }
    }
}

/// Species table that a config resolves to (bundled when unset).
pub fn species_for(cfg: &ScenarioConfig) -> Result<Vec<tccs_core::SpeciesProfile>, CliError> {
    Ok(match &cfg.species {
        Some(p) => bioimpact::load_species_csv(p)?,
        None => bioimpact::bundled_species(),
    })
}
