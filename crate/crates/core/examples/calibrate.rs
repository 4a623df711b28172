//! Prints the turbulence-noise gain A_s that places the default plant's
//! inflow-turbulence source level at 149 dB re 1 µPa @ 1 m when settled in a
//! 2 m/s flow with 10 % turbulence intensity.

use tccs_core::acoustics::calibrate_turbulence_gain;
use tccs_core::turbine::equilibrium_omega;
use tccs_core::ScenarioConfig;

const REFERENCE_SPEED_MPS: f64 = 2.0;
const REFERENCE_TI: f64 = 0.10;
const TARGET_DB: f64 = 149.0;

fn main() {
    let cfg = ScenarioConfig::default();
    let plant = cfg.plant();
    let omega = equilibrium_omega(REFERENCE_SPEED_MPS, &plant);
    let u2 = (REFERENCE_TI * REFERENCE_SPEED_MPS).powi(2);
    let a_s = calibrate_turbulence_gain(
        TARGET_DB,
        omega,
        u2,
        &cfg.acoustics.turbulence,
        &plant.rotor,
    )
    .expect("reference point is turning");
    println!("omega = {omega} rad/s");
    println!("a_s = {a_s:.10e}");
}
