//! Rotor power capture, one-mass drivetrain and optimal-torque MPPT control.
//!
//! The drivetrain is referred to the rotor side: the generator is an ideal
//! torque actuator that applies the MPPT reference `K·ω²` instantly, and the
//! rotor speed obeys `J·dω/dt = T_rotor − T_gen`, integrated with explicit
//! Euler. Flow speed is held constant between flow samples.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowdata::FlowSeries;

/// Betz bound on the power coefficient of an unconfined rotor.
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

/// Below this rotor speed the torque is evaluated from the startup floor.
pub const OMEGA_EPS: f64 = 1e-3;

/// Tip speed ratio at which the startup torque floor is evaluated.
pub const LAMBDA_EPS: f64 = 0.1;

/// Kinetic power of the flow through `area`: ½·ρ·A·U³, W.
pub fn kinetic_power(rho: f64, area: f64, u: f64) -> f64 {
    0.5 * rho * area * u * u * u
}

/// ωD/(2U). `None` when the flow is at a standstill.
pub fn tip_speed_ratio(omega: f64, diameter: f64, u: f64) -> Option<f64> {
    if u > 0.0 {
        Some(omega * diameter / (2.0 * u))
    } else {
        None
    }
}

/// Piecewise-linear interpolation on a (λ, Cp) table, zero outside its domain.
pub fn power_coefficient(lambda: f64, cp_curve: &[(f64, f64)]) -> f64 {
    let (first, last) = match (cp_curve.first(), cp_curve.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return 0.0,
    };
    if !(lambda >= first.0 && lambda <= last.0) {
        return 0.0;
    }
    // first node with λ_i >= lambda
    let hi = cp_curve.partition_point(|&(l, _)| l < lambda);
    if hi == 0 {
        return first.1;
    }
    let (l0, c0) = cp_curve[hi - 1];
    let (l1, c1) = cp_curve[hi];
    c0 + (c1 - c0) * (lambda - l0) / (l1 - l0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RotorConfigRaw", into = "RotorConfigRaw")]
pub struct RotorConfig {
    pub diameter: f64,
    pub rho: f64,
    pub cp_curve: Vec<(f64, f64)>,
    pub lambda_opt: f64,
    pub cp_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RotorConfigRaw {
    diameter_m: f64,
    rho_kg_m3: f64,
    cp_curve: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_opt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cp_max: Option<f64>,
}

impl TryFrom<RotorConfigRaw> for RotorConfig {
    type Error = Error;

    fn try_from(raw: RotorConfigRaw) -> Result<Self> {
        let rotor = RotorConfig::new(raw.diameter_m, raw.rho_kg_m3, raw.cp_curve)?;
        if let Some(l) = raw.lambda_opt {
            if (l - rotor.lambda_opt).abs() > 1e-9 {
                return Err(Error::invalid(
                    "rotor.lambda_opt",
                    format!(
                        "{l} does not match the curve peak at λ = {}",
                        rotor.lambda_opt
                    ),
                ));
            }
        }
        if let Some(c) = raw.cp_max {
            if (c - rotor.cp_max).abs() > 1e-9 {
                return Err(Error::invalid(
                    "rotor.cp_max",
                    format!("{c} does not match the curve peak Cp = {}", rotor.cp_max),
                ));
            }
        }
        Ok(rotor)
    }
}

impl From<RotorConfig> for RotorConfigRaw {
    fn from(r: RotorConfig) -> Self {
        RotorConfigRaw {
            diameter_m: r.diameter,
            rho_kg_m3: r.rho,
            cp_curve: r.cp_curve,
            lambda_opt: Some(r.lambda_opt),
            cp_max: Some(r.cp_max),
        }
    }
}

impl RotorConfig {
    /// Builds a rotor from its Cp–λ table; the optimum is taken at the table peak.
    pub fn new(diameter: f64, rho: f64, cp_curve: Vec<(f64, f64)>) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::invalid(
                "rotor.diameter_m",
                format!("{diameter} must be > 0"),
            ));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(
                "rotor.rho_kg_m3",
                format!("{rho} must be > 0"),
            ));
        }
        if cp_curve.len() < 2 {
            return Err(Error::invalid("rotor.cp_curve", "needs at least two nodes"));
        }
        for (i, &(l, c)) in cp_curve.iter().enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::invalid(
                    "rotor.cp_curve",
                    format!("node {i}: λ = {l} must be >= 0"),
                ));
            }
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::invalid(
                    "rotor.cp_curve",
                    format!("node {i}: Cp = {c} must be >= 0"),
                ));
            }
        }
        if cp_curve.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "rotor.cp_curve",
                "λ values must be strictly increasing",
            ));
        }
        let &(lambda_opt, cp_max) =
            cp_curve.iter().fold(
                &cp_curve[0],
                |best, node| if node.1 > best.1 { node } else { best },
            );
        if !(cp_max > 0.0 && lambda_opt > 0.0) {
            return Err(Error::invalid(
                "rotor.cp_curve",
                "peak must have Cp > 0 at λ > 0",
            ));
        }
        if cp_max >= BETZ_LIMIT {
            log::warn!("Cp–λ curve peaks at {cp_max:.4}, at or above the Betz limit");
        }
        Ok(RotorConfig {
            diameter,
            rho,
            cp_curve,
            lambda_opt,
            cp_max,
        })
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn swept_area(&self) -> f64 {
        0.25 * PI * self.diameter * self.diameter
    }

    pub fn cp(&self, lambda: f64) -> f64 {
        power_coefficient(lambda, &self.cp_curve)
    }

    /// Nominal optimal-torque gain K = ½·ρ·A·R³·Cp_max/λ_opt³, N·m·s².
    pub fn mppt_gain(&self) -> f64 {
        let r = self.radius();
        0.5 * self.rho * self.swept_area() * r.powi(3) * self.cp_max / self.lambda_opt.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivetrainKind {
    Geared,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivetrainConfig {
    pub kind: DrivetrainKind,
    pub gear_ratio: f64,
    pub gear_stages: u32,
    /// Total inertia referred to the rotor shaft, kg·m².
    pub inertia_kg_m2: f64,
    pub rated_power_w: f64,
}

impl DrivetrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.inertia_kg_m2 > 0.0 && self.inertia_kg_m2.is_finite()) {
            return Err(Error::invalid(
                "drivetrain.inertia_kg_m2",
                format!("{} must be > 0", self.inertia_kg_m2),
            ));
        }
        if !(self.rated_power_w > 0.0 && self.rated_power_w.is_finite()) {
            return Err(Error::invalid(
                "drivetrain.rated_power_w",
                format!("{} must be > 0", self.rated_power_w),
            ));
        }
        if self.gear_stages < 1 {
            return Err(Error::invalid("drivetrain.gear_stages", "must be >= 1"));
        }
        match self.kind {
            DrivetrainKind::Geared if !(self.gear_ratio >= 1.0 && self.gear_ratio.is_finite()) => {
                Err(Error::invalid(
                    "drivetrain.gear_ratio",
                    format!("{} must be >= 1", self.gear_ratio),
                ))
            }
            DrivetrainKind::Direct if self.gear_ratio != 1.0 => Err(Error::invalid(
                "drivetrain.gear_ratio",
                format!(
                    "direct drive requires gear_ratio = 1 (got {})",
                    self.gear_ratio
                ),
            )),
            _ => Ok(()),
        }
    }

    /// Same machine with the gearbox removed: the generator turns at rotor speed.
    pub fn to_direct(&self) -> Self {
        DrivetrainConfig {
            kind: DrivetrainKind::Direct,
            gear_ratio: 1.0,
            ..self.clone()
        }
    }

    pub fn has_gearbox(&self) -> bool {
        self.kind == DrivetrainKind::Geared
    }
}

/// Admissible MPPT gain multipliers.
pub const KOPT_FACTOR_RANGE: (f64, f64) = (0.8, 1.2);
/// Admissible converter switching frequencies, Hz.
pub const SWITCHING_FREQUENCY_RANGE: (f64, f64) = (1000.0, 3000.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    /// Multiplier on the nominal MPPT gain.
    pub kopt_factor: f64,
    /// Converter switching frequency, Hz.
    #[serde(rename = "f_s")]
    pub f_s_hz: f64,
    /// Switching-ripple gain k_sw (relative speed ripple = k_sw / f_s).
    pub ripple_gain: f64,
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = KOPT_FACTOR_RANGE;
        if !(self.kopt_factor >= lo - 1e-12 && self.kopt_factor <= hi + 1e-12) {
            return Err(Error::invalid(
                "control.kopt_factor",
                format!(
                    "{} outside the studied MPPT factor range [{lo}, {hi}]",
                    self.kopt_factor
                ),
            ));
        }
        let (lo, hi) = SWITCHING_FREQUENCY_RANGE;
        if !(self.f_s_hz >= lo && self.f_s_hz <= hi) {
            return Err(Error::invalid(
                "control.f_s",
                format!(
                    "{} Hz outside the studied switching range [{lo}, {hi}] Hz",
                    self.f_s_hz
                ),
            ));
        }
        if !(self.ripple_gain >= 0.0 && self.ripple_gain.is_finite()) {
            return Err(Error::invalid(
                "control.ripple_gain",
                format!("{} must be >= 0", self.ripple_gain),
            ));
        }
        Ok(())
    }
}

/// Rotor, drivetrain and controller of one turbine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    pub rotor: RotorConfig,
    pub drivetrain: DrivetrainConfig,
    pub control: ControlConfig,
}

impl Plant {
    pub fn validate(&self) -> Result<()> {
        self.drivetrain.validate()?;
        self.control.validate()
    }

    /// MPPT gain after the control multiplier, N·m·s².
    pub fn torque_gain(&self) -> f64 {
        self.control.kopt_factor * self.rotor.mppt_gain()
    }
}

/// Hydrodynamic torque on the rotor, N·m.
///
/// Near standstill (ω < [`OMEGA_EPS`]) the torque is evaluated at the speed
/// corresponding to [`LAMBDA_EPS`], which keeps it finite.
pub fn rotor_torque(u: f64, omega: f64, rotor: &RotorConfig) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let available = kinetic_power(rotor.rho, rotor.swept_area(), u);
    let omega_eval = if omega < OMEGA_EPS {
        2.0 * LAMBDA_EPS * u / rotor.diameter
    } else {
        omega
    };
    let lambda = omega_eval * rotor.diameter / (2.0 * u);
    rotor.cp(lambda) * available / omega_eval
}

/// Generator torque demanded by the optimal-torque law, N·m (rotor side).
pub fn mppt_reference_torque(omega: f64, rotor: &RotorConfig, control: &ControlConfig) -> f64 {
    control.kopt_factor * rotor.mppt_gain() * omega * omega
}

/// Relative generator-speed ripple caused by converter switching.
pub fn switching_ripple_rms(control: &ControlConfig) -> f64 {
    if control.f_s_hz.is_infinite() {
        return 0.0;
    }
    control.ripple_gain / control.f_s_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingState {
    pub t: f64,
    pub u: f64,
    pub omega: f64,
    pub lambda: f64,
    pub cp: f64,
    pub torque_rotor: f64,
    pub torque_gen: f64,
    pub p_mech: f64,
    pub rpm_rotor: f64,
    pub rpm_hss: f64,
}

impl OperatingState {
    /// Evaluates all derived quantities for the kinematic pair (u, ω).
    pub fn at(t: f64, u: f64, omega: f64, plant: &Plant) -> Self {
        let rotor = &plant.rotor;
        let lambda = tip_speed_ratio(omega, rotor.diameter, u).unwrap_or(0.0);
        let torque_rotor = rotor_torque(u, omega, rotor);
        let rpm_rotor = omega * 60.0 / (2.0 * PI);
        OperatingState {
            t,
            u,
            omega,
            lambda,
            cp: if u > 0.0 { rotor.cp(lambda) } else { 0.0 },
            torque_rotor,
            torque_gen: mppt_reference_torque(omega, rotor, &plant.control),
            p_mech: torque_rotor * omega,
            rpm_rotor,
            rpm_hss: rpm_rotor * plant.drivetrain.gear_ratio,
        }
    }

    /// Generator shaft speed, rev/min.
    pub fn rpm_generator(&self) -> f64 {
        self.rpm_hss
    }

    fn is_finite(&self) -> bool {
        [
            self.omega,
            self.lambda,
            self.cp,
            self.torque_rotor,
            self.torque_gen,
            self.p_mech,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

fn advance(
    state: &OperatingState,
    t_next: f64,
    u_next: f64,
    dt: f64,
    plant: &Plant,
) -> Result<OperatingState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt_s", format!("{dt} must be > 0")));
    }
    let accel = (state.torque_rotor - state.torque_gen) / plant.drivetrain.inertia_kg_m2;
    let omega_next = (state.omega + dt * accel).max(0.0);
    if !omega_next.is_finite() {
        return Err(Error::Numerical {
            t: state.t,
            message: format!(
                "rotor speed became non-finite (ω = {}, T_rotor = {}, T_gen = {})",
                state.omega, state.torque_rotor, state.torque_gen
            ),
        });
    }
    let next = OperatingState::at(t_next, u_next, omega_next, plant);
    if !next.is_finite() {
        return Err(Error::Numerical {
            t: t_next,
            message: format!("non-finite operating state {next:?}"),
        });
    }
    Ok(next)
}

/// One explicit Euler step of the one-mass drivetrain.
pub fn step_dynamics(
    state: &OperatingState,
    u_next: f64,
    dt: f64,
    plant: &Plant,
) -> Result<OperatingState> {
    advance(state, state.t + dt, u_next, dt, plant)
}

/// Settled tip speed ratio under the MPPT law for the plant's gain factor.
///
/// Solves Cp(λ)·λ_opt³ = k·Cp_max·λ³ for the largest root (the stable branch
/// to the right of any stall-side crossing) by bisection on the curve segment
/// that brackets it.
pub fn equilibrium_lambda(plant: &Plant) -> f64 {
    let rotor = &plant.rotor;
    let k = plant.control.kopt_factor;
    let lo3 = rotor.lambda_opt.powi(3);
    let g = |l: f64| rotor.cp(l) * lo3 - k * rotor.cp_max * l * l * l;

    let nodes = &rotor.cp_curve;
    let last = nodes[nodes.len() - 1].0;
    if g(last) >= 0.0 {
        return last;
    }
    let mut hi = last;
    let mut lo = None;
    for &(l, _) in nodes.iter().rev().skip(1) {
        if g(l) >= 0.0 {
            lo = Some(l);
            break;
        }
        hi = l;
    }
    let Some(mut lo) = lo else {
        return 0.0;
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Settled rotor speed for a constant flow speed `u`, rad/s.
pub fn equilibrium_omega(u: f64, plant: &Plant) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    equilibrium_lambda(plant) * u / plant.rotor.radius()
}

/// Steady operating state for a constant flow speed.
pub fn equilibrium_state(t: f64, u: f64, plant: &Plant) -> OperatingState {
    OperatingState::at(t, u, equilibrium_omega(u, plant), plant)
}

/// Integrates the drivetrain over the span of `flow` with step `dt`.
///
/// `dt` must divide the flow sampling interval. The returned trajectory
/// starts at the first flow sample and includes the final sample time.
pub fn simulate(
    flow: &FlowSeries,
    plant: &Plant,
    dt: f64,
    initial_omega: Option<f64>,
) -> Result<Vec<OperatingState>> {
    plant.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt_s", format!("{dt} must be > 0")));
    }
    let ratio = flow.dt() / dt;
    if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-6 {
        return Err(Error::invalid(
            "dt_s",
            format!(
                "{dt} s does not divide the flow sampling interval {} s",
                flow.dt()
            ),
        ));
    }
    let t0 = flow.start();
    let n_steps = ((flow.end() - t0) / dt).round() as usize;

    let u0 = flow.samples()[0].u;
    let omega0 = match initial_omega {
        Some(w) if w >= 0.0 && w.is_finite() => w,
        Some(w) => {
            return Err(Error::invalid(
                "initial_omega_rad_s",
                format!("{w} must be >= 0"),
            ))
        }
        None => equilibrium_omega(u0, plant),
    };

    let mut states = Vec::with_capacity(n_steps + 1);
    let mut state = OperatingState::at(t0, u0, omega0, plant);
    states.push(state);
    for k in 1..=n_steps {
        let t = t0 + k as f64 * dt;
        let u = flow.sample_at(t).u;
        state = advance(&state, t, u, dt, plant)?;
        states.push(state);
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdata::{FlowSample, FlowSeries};

    pub(crate) fn curve() -> Vec<(f64, f64)> {
        vec![
            (0.0, 0.0),
            (0.8, 0.02),
            (1.6, 0.10),
            (2.4, 0.24),
            (3.2, 0.40),
            (4.0, 0.45),
            (4.8, 0.41),
            (5.6, 0.32),
            (6.4, 0.20),
            (7.2, 0.08),
            (8.0, 0.0),
        ]
    }

    fn plant(kopt: f64) -> Plant {
        Plant {
            rotor: RotorConfig::new(20.0, 1025.0, curve()).unwrap(),
            drivetrain: DrivetrainConfig {
                kind: DrivetrainKind::Geared,
                gear_ratio: 40.0,
                gear_stages: 3,
                inertia_kg_m2: 1.0e6,
                rated_power_w: 1.0e6,
            },
            control: ControlConfig {
                kopt_factor: kopt,
                f_s_hz: 2000.0,
                ripple_gain: 2.0,
            },
        }
    }

    fn constant_flow(u: f64, seconds: usize) -> FlowSeries {
        let samples = (0..=seconds)
            .map(|k| FlowSample {
                t: k as f64,
                u,
                ti: 0.1,
            })
            .collect();
        FlowSeries::new(samples, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn kinetic_power_examples() {
        assert!(rel(kinetic_power(1025.0, 314.159, 2.0), 1_288_051.9) < 1e-6);
        assert_eq!(kinetic_power(1025.0, 314.159, 0.0), 0.0);
        assert!(rel(kinetic_power(1025.0, 314.159, 1.93), 1_157_520.0) < 1e-4);
    }

    #[test]
    fn tip_speed_ratio_examples() {
        assert_eq!(tip_speed_ratio(0.8, 20.0, 2.0), Some(4.0));
        assert_eq!(tip_speed_ratio(0.0, 20.0, 2.0), Some(0.0));
        assert!((tip_speed_ratio(1.2, 20.0, 3.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(tip_speed_ratio(1.0, 20.0, 0.0), None);
    }

    #[test]
    fn power_coefficient_interpolation() {
        let c = curve();
        assert_eq!(power_coefficient(4.0, &c), 0.45);
        assert_eq!(power_coefficient(0.0, &c), 0.0);
        assert!((power_coefficient(3.6, &c) - 0.425).abs() < 1e-12);
        assert_eq!(power_coefficient(8.5, &c), 0.0);
        assert_eq!(power_coefficient(-1.0, &c), 0.0);
    }

    #[test]
    fn rotor_rejects_bad_curves() {
        assert!(RotorConfig::new(20.0, 1025.0, vec![(0.0, 0.0), (0.0, 0.1)]).is_err());
        assert!(RotorConfig::new(20.0, 1025.0, vec![(0.0, 0.0), (1.0, -0.1)]).is_err());
        assert!(RotorConfig::new(0.0, 1025.0, curve()).is_err());
        // above Betz is allowed, only warned
        assert!(RotorConfig::new(20.0, 1025.0, vec![(0.0, 0.0), (4.0, 0.7), (8.0, 0.0)]).is_ok());
    }

    #[test]
    fn rotor_torque_examples() {
        let p = plant(1.0);
        let available = kinetic_power(1025.0, p.rotor.swept_area(), 2.0);
        let t = rotor_torque(2.0, 0.8, &p.rotor);
        assert!(rel(t, 0.45 * available / 0.8) < 1e-12);
        assert!(rel(t, 724_530.0) < 1e-4);
        assert_eq!(rotor_torque(0.0, 0.8, &p.rotor), 0.0);
        let start = rotor_torque(2.0, 0.0, &p.rotor);
        assert!(start.is_finite() && start > 0.0);
    }

    #[test]
    fn mppt_reference_examples() {
        let p = plant(1.0);
        assert!(rel(p.rotor.mppt_gain(), 1.13208e6) < 1e-5);
        let t = mppt_reference_torque(0.8, &p.rotor, &p.control);
        assert!(rel(t, rotor_torque(2.0, 0.8, &p.rotor)) < 1e-12);
        assert_eq!(mppt_reference_torque(0.0, &p.rotor, &p.control), 0.0);
        let hi = plant(1.2);
        assert!(rel(mppt_reference_torque(0.8, &hi.rotor, &hi.control), 1.2 * t) < 1e-12);
    }

    #[test]
    fn switching_ripple_examples() {
        let mut c = plant(1.0).control;
        c.f_s_hz = 1000.0;
        assert!((switching_ripple_rms(&c) - 0.002).abs() < 1e-15);
        c.f_s_hz = f64::INFINITY;
        assert_eq!(switching_ripple_rms(&c), 0.0);
        c.f_s_hz = 1000.0;
        c.ripple_gain = 0.0;
        assert_eq!(switching_ripple_rms(&c), 0.0);
    }

    #[test]
    fn step_at_equilibrium_keeps_speed() {
        let p = plant(1.0);
        let s = OperatingState::at(0.0, 2.0, 0.8, &p);
        assert!(rel(s.torque_rotor, s.torque_gen) < 1e-12);
        let n = step_dynamics(&s, 2.0, 0.01, &p).unwrap();
        assert!((n.omega - 0.8).abs() < 1e-12);
        assert_eq!(n.t, 0.01);
    }

    #[test]
    fn step_is_an_euler_update() {
        let p = plant(1.0);
        let s = OperatingState::at(0.0, 2.0, 0.5, &p);
        let n = step_dynamics(&s, 2.0, 0.01, &p).unwrap();
        let expected = 0.5 + 0.01 * (s.torque_rotor - s.torque_gen) / 1.0e6;
        assert!(s.torque_rotor > s.torque_gen);
        assert_eq!(n.omega, expected);
    }

    #[test]
    fn step_detects_non_finite() {
        let p = plant(1.0);
        let mut s = OperatingState::at(0.0, 2.0, 0.5, &p);
        s.torque_rotor = f64::INFINITY;
        let err = step_dynamics(&s, 2.0, 0.01, &p).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn equilibrium_at_nominal_gain_is_optimum() {
        let p = plant(1.0);
        assert!((equilibrium_lambda(&p) - 4.0).abs() < 1e-9);
        assert!((equilibrium_omega(2.0, &p) - 0.8).abs() < 1e-9);
        assert_eq!(equilibrium_omega(0.0, &p), 0.0);
    }

    #[test]
    fn spin_up_from_rest_converges() {
        let p = plant(1.0);
        let states = simulate(&constant_flow(2.0, 120), &p, 0.01, Some(0.0)).unwrap();
        let settled = states.last().unwrap().omega;
        assert!(rel(settled, 0.8) < 0.01, "settled ω = {settled}");
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let p = plant(1.0);
        let states = simulate(&constant_flow(2.0, 10), &p, 0.01, None).unwrap();
        assert_eq!(states.len(), 1001);
        let first = states[0];
        assert!(states.iter().all(|s| (s.omega - first.omega).abs() < 1e-9));
    }

    #[test]
    fn rejects_step_not_dividing_flow_interval() {
        let p = plant(1.0);
        assert!(simulate(&constant_flow(2.0, 10), &p, 0.3, None).is_err());
        assert!(simulate(&constant_flow(2.0, 10), &p, 2.0, None).is_err());
    }

    #[test]
    fn zero_flow_stays_at_rest() {
        let p = plant(1.0);
        let states = simulate(&constant_flow(0.0, 5), &p, 0.01, None).unwrap();
        assert!(states
            .iter()
            .all(|s| s.omega == 0.0 && s.p_mech == 0.0 && s.lambda == 0.0));
    }

    #[test]
    fn direct_drive_conversion() {
        let d = plant(1.0).drivetrain.to_direct();
        assert!(d.validate().is_ok());
        assert!(!d.has_gearbox());
        let mut bad = d.clone();
        bad.gear_ratio = 40.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn control_ranges_validated() {
        let mut c = plant(1.0).control;
        c.kopt_factor = 1.5;
        let err = c.validate().unwrap_err().to_string();
        assert!(
            err.contains("kopt_factor") && err.contains("[0.8, 1.2]"),
            "{err}"
        );
        c.kopt_factor = 1.0;
        c.f_s_hz = 500.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rotor_config_serde_derives_peak() {
        let json = r#"{"diameter_m": 20, "rho_kg_m3": 1025, "cp_curve": [[0,0],[4,0.45],[8,0]]}"#;
        let r: RotorConfig = serde_json::from_str(json).unwrap();
        assert_eq!(r.lambda_opt, 4.0);
        assert_eq!(r.cp_max, 0.45);
        let bad = r#"{"diameter_m": 20, "rho_kg_m3": 1025, "cp_curve": [[0,0],[4,0.45],[8,0]], "cp_max": 0.5}"#;
        assert!(serde_json::from_str::<RotorConfig>(bad).is_err());
    }
}
