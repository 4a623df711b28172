use tccs_core::flowdata::{self, read_flow_csv, synthesize_semidiurnal, window, write_flow_csv};
use tccs_core::scenario::{self, FlowSource, SweepParameter, SweepSpec, SynthSpec};
use tccs_core::turbine::{self, simulate};
use tccs_core::{FlowSample, FlowSeries, ScenarioConfig};

fn constant_cfg(u: f64, duration: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.flow = FlowSource::Synth(SynthSpec {
        u_mean_mps: u,
        u_amp_mps: 0.0,
        ti: 0.1,
        dt_s: 1.0,
        duration_s: duration,
    });
    cfg.window = None;
    cfg
}

#[test]
fn flow_csv_round_trip() {
    let series = synthesize_semidiurnal(1.3, 0.82, 0.07, 2.0, 500.0).unwrap();
    let mut buf = Vec::new();
    write_flow_csv(&series, &mut buf).unwrap();
    let back = read_flow_csv(buf.as_slice(), std::path::Path::new("mem.csv")).unwrap();
    assert_eq!(back.len(), series.len());
    for (a, b) in series.samples().iter().zip(back.samples()) {
        assert!((a.t - b.t).abs() < 1e-9 && (a.u - b.u).abs() < 1e-9 && (a.ti - b.ti).abs() < 1e-9);
    }
}

#[test]
fn windows_compose() {
    let series = synthesize_semidiurnal(1.3, 0.82, 0.1, 1.0, 10_000.0).unwrap();
    let outer = window(&series, 7000.0, 7500.0).unwrap();
    let inner = window(&outer, 7300.0, 7340.0).unwrap();
    assert_eq!(inner, window(&series, 7300.0, 7340.0).unwrap());
    assert_eq!(inner.len(), 41);
}

#[test]
fn synthetic_flow_stays_in_bounds() {
    let series = synthesize_semidiurnal(2.0, 0.5, 0.1, 60.0, 100_000.0).unwrap();
    for s in series.samples() {
        assert!(s.u >= 1.5 - 1e-12 && s.u <= 2.5 + 1e-12);
    }
}

#[test]
fn halving_the_step_changes_little() {
    let flow = synthesize_semidiurnal(1.3, 0.82, 0.1, 1.0, 10_000.0).unwrap();
    let flow = window(&flow, 7300.0, 7340.0).unwrap();
    let plant = ScenarioConfig::default().plant();
    let a = simulate(&flow, &plant, 0.01, Some(0.5)).unwrap();
    let b = simulate(&flow, &plant, 0.005, Some(0.5)).unwrap();
    let (oa, ob) = (a.last().unwrap().omega, b.last().unwrap().omega);
    assert!(((oa - ob) / ob).abs() < 1e-3, "{oa} vs {ob}");
}

#[test]
fn start_from_rest_reaches_equilibrium() {
    let flow = FlowSeries::new(
        (0..=400)
            .map(|t| FlowSample::new(t as f64, 2.0, 0.1).unwrap())
            .collect(),
        1.0,
    )
    .unwrap();
    let plant = ScenarioConfig::default().plant();
    let states = simulate(&flow, &plant, 0.01, Some(0.0)).unwrap();
    let want = turbine::equilibrium_omega(2.0, &plant);
    let got = states.last().unwrap().omega;
    assert!(((got - want) / want).abs() < 0.01, "{got} vs {want}");
}

#[test]
fn sweep_rows_match_individual_runs() {
    let base = constant_cfg(2.0, 30.0);
    let inputs = base.load_inputs().unwrap();
    let spec = SweepSpec::parse(SweepParameter::KoptFactor, "1.2,0.8,1.0").unwrap();
    let rows = scenario::sweep(&base, &inputs, &spec, Some(2)).unwrap();
    for row in &rows {
        let cfg = spec.apply(&base, row.value).unwrap();
        let run = scenario::run_with_inputs(&cfg, &inputs).unwrap();
        assert_eq!(run.spl_max_50m, row.spl_max_50m);
        assert_eq!(run.energy_j, row.energy_j);
        assert_eq!(run.impacts, row.impacts);
    }
}

#[test]
fn comparison_of_drivetrains() {
    let geared = constant_cfg(2.0, 30.0);
    let mut direct = geared.clone();
    direct.drivetrain = direct.drivetrain.to_direct();
    let a = scenario::run_scenario(&geared).unwrap();
    let b = scenario::run_scenario(&direct).unwrap();
    let cmp = scenario::compare(&a, &b).unwrap();
    for (_, d) in &cmp.delta_spl_db {
        assert!(d.unwrap() < -5.0);
    }
    assert!(cmp.delta_energy_pct.unwrap().abs() < 1e-9);
    for d in &cmp.delta_impacts {
        assert!(d.tts_radius_m <= 0.0);
    }
}

#[test]
fn bundled_example_flow_loads() {
    let path =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/tidal_flow_example.csv");
    let series = flowdata::load_flow_csv(&path).unwrap();
    assert_eq!(series.len(), 10_001);
    let w = window(&series, 7300.0, 7340.0).unwrap();
    assert!((w.mean_speed() - 2.0).abs() < 0.1);
}
