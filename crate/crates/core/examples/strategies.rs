//! Runs the default scenario under each control strategy and prints the
//! headline SPL, energy and TTS-onset figures.

use tccs_core::scenario::{self, SweepParameter, SweepSpec};
use tccs_core::ScenarioConfig;

fn main() -> tccs_core::Result<()> {
    let cfg = ScenarioConfig::default();
    let inputs = cfg.load_inputs()?;
    println!("window mean speed: {:.4} m/s", inputs.flow.mean_speed());

    let base = scenario::run_with_inputs(&cfg, &inputs)?;
    let lv = base.source_levels[base.max_index];
    println!(
        "geared: max SPL@50m {:.3} dB (sources @1m: turb {:?} gear {:?} gen {:?})",
        base.spl_max_50m.unwrap_or(f64::NAN),
        lv.turb,
        lv.gear,
        lv.gen
    );

    let specs = [
        (SweepParameter::DrivetrainKind, "geared,direct"),
        (SweepParameter::KoptFactor, "0.8,0.9,1.0,1.1,1.2"),
        (SweepParameter::FS, "1000,1500,2000,2500,3000"),
    ];
    for (param, values) in specs {
        let spec = SweepSpec::parse(param, values)?;
        for row in scenario::sweep(&cfg, &inputs, &spec, None)? {
            println!(
                "{:>16} = {:<8} SPL@50m {:.4} dB  energy {:.6e} J  ({:+.3} %)",
                param.name(),
                row.value.to_string(),
                row.spl_max_50m.unwrap_or(f64::NAN),
                row.energy_j,
                100.0 * (row.energy_j - base.energy_j) / base.energy_j
            );
        }
    }

    for row in scenario::tts_onset_all(&cfg, &inputs, 100.0, None)? {
        println!(
            "onset {:<32} TTS {:.2} dB -> {:?} m/s",
            row.species, row.tts_level, row.onset_speed_mps
        );
    }
    Ok(())
}
