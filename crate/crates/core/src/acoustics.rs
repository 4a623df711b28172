//! Source levels of the three noise mechanisms, spherical spreading, and
//! incoherent combination into total received SPL.
//!
//! Levels are `Option<f64>` in dB; `None` marks a silent (or absent) source so
//! that no summation ever touches −∞.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::turbine::{switching_ripple_rms, OperatingState, Plant, RotorConfig};

/// Underwater reference pressure, Pa.
pub const P_REF_WATER: f64 = 1e-6;
/// In-air reference pressure, Pa.
pub const P_REF_AIR: f64 = 20e-6;
/// Characteristic impedance of sea water, rayl.
pub const RHO_C_WATER: f64 = 1.5e6;
/// Characteristic impedance of air, rayl.
pub const RHO_C_AIR: f64 = 415.0;

/// 20·log₁₀(20 µPa / 1 µPa).
pub fn reference_shift_db() -> f64 {
    20.0 * (P_REF_AIR / P_REF_WATER).log10()
}

/// 10·log₁₀((ρc)_water / (ρc)_air).
pub fn impedance_shift_db() -> f64 {
    10.0 * (RHO_C_WATER / RHO_C_AIR).log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbulenceNoiseParams {
    pub sound_speed_m_s: f64,
    pub blade_count: u32,
    /// Representative blade chord C_T, m.
    pub chord_m: f64,
    /// Axial turbulence length scale Λ₁, m.
    pub lambda1_m: f64,
    /// Length scale parameter μ.
    pub mu: f64,
    /// Correlation factor F_Λ.
    pub f_corr: f64,
    /// Empirical calibration factor A_s.
    pub a_s: f64,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
}

impl TurbulenceNoiseParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sound_speed_m_s", self.sound_speed_m_s),
            ("blade_count", self.blade_count as f64),
            ("chord_m", self.chord_m),
            ("lambda1_m", self.lambda1_m),
            ("mu", self.mu),
            ("f_corr", self.f_corr),
            ("a_s", self.a_s),
            ("f_lo_hz", self.f_lo_hz),
            ("f_hi_hz", self.f_hi_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    format!("acoustics.turbulence.{name}"),
                    format!("{v} must be > 0"),
                ));
            }
        }
        if self.f_lo_hz >= self.f_hi_hz {
            return Err(Error::invalid(
                "acoustics.turbulence.f_lo_hz",
                format!("band [{}, {}] Hz is empty", self.f_lo_hz, self.f_hi_hz),
            ));
        }
        Ok(())
    }

    /// Base-10 third-octave centre frequencies within [f_lo, f_hi].
    pub fn band_centres(&self) -> Vec<f64> {
        third_octave_centres(self.f_lo_hz, self.f_hi_hz)
    }
}

/// Base-10 third-octave centres 1000·10^(n/10) Hz lying in [f_lo, f_hi].
pub fn third_octave_centres(f_lo: f64, f_hi: f64) -> Vec<f64> {
    let tol = 1e-9;
    let n_lo = (10.0 * (f_lo / 1000.0).log10() - tol).ceil() as i32;
    let n_hi = (10.0 * (f_hi / 1000.0).log10() + tol).floor() as i32;
    (n_lo..=n_hi)
        .map(|n| 1000.0 * 10f64.powf(n as f64 / 10.0))
        .collect()
}

/// How the empirical in-air levels for gearbox and generator are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanicalLevelKind {
    /// Sound power level re 1 pW, reduced to free-field pressure at 1 m.
    SoundPower,
    /// Sound pressure level re 20 µPa at 1 m.
    SoundPressure,
}

/// Shaft whose speed enters the gearbox level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GearShaft {
    HighSpeed,
    Rotor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcousticsConfig {
    pub turbulence: TurbulenceNoiseParams,
    pub mechanical_levels: MechanicalLevelKind,
    pub gear_rpm_shaft: GearShaft,
}

impl AcousticsConfig {
    pub fn validate(&self) -> Result<()> {
        self.turbulence.validate()
    }
}

/// |S_e(σ)|² ≈ 1/(1 + 2πσ).
pub fn sears_sq(sigma: f64) -> f64 {
    1.0 / (1.0 + 2.0 * PI * sigma)
}

/// Broadband mean-square pressure of inflow-turbulence interaction noise at
/// range `r`, µPa².
///
/// Each third-octave band contributes ½·φ_p·ω at its centre frequency, with
/// φ_p = A_s·F_Λ·B·ρ²·U_T³·C_T·Λ₁·u'² / (8π·r²·c·(1+μ²)) · |S_e(πf·C_T/U_T)|²
/// and tip speed U_T = Ω·D/2.
pub fn turbulence_msp(
    r: f64,
    omega_rot: f64,
    u2: f64,
    params: &TurbulenceNoiseParams,
    rotor: &RotorConfig,
) -> f64 {
    let tip_speed = omega_rot * rotor.diameter / 2.0;
    if !(tip_speed > 0.0) || !(u2 > 0.0) {
        return 0.0;
    }
    let p = params;
    let amplitude = p.a_s
        * p.f_corr
        * (p.blade_count as f64
            * rotor.rho
            * rotor.rho
            * tip_speed.powi(3)
            * p.chord_m
            * p.lambda1_m
            * u2)
        / (8.0 * PI * r * r * p.sound_speed_m_s * (1.0 + p.mu * p.mu));
    let msp_pa2: f64 = p
        .band_centres()
        .into_iter()
        .map(|f| {
            let omega = 2.0 * PI * f;
            let phi = amplitude * sears_sq(PI * f * p.chord_m / tip_speed);
            0.5 * phi * omega
        })
        .sum();
    msp_pa2 / (P_REF_WATER * P_REF_WATER)
}

/// SPL = 10·log₁₀(p̄²/p_ref²) for a mean-square pressure in µPa².
/// `None` when the pressure is zero.
pub fn spl_from_msp(msp_upa2: f64) -> Option<f64> {
    if msp_upa2 > 0.0 {
        Some(10.0 * msp_upa2.log10())
    } else {
        None
    }
}

/// Turbulence-interaction source level, dB re 1 µPa @ 1 m.
pub fn turbulence_source_level(
    state: &OperatingState,
    u2: f64,
    params: &TurbulenceNoiseParams,
    rotor: &RotorConfig,
) -> Option<f64> {
    spl_from_msp(turbulence_msp(1.0, state.omega, u2, params, rotor))
}

/// A_s that places the turbulence source level at `target_db` for the given
/// rotor speed and turbulence, all other parameters held.
pub fn calibrate_turbulence_gain(
    target_db: f64,
    omega_rot: f64,
    u2: f64,
    params: &TurbulenceNoiseParams,
    rotor: &RotorConfig,
) -> Result<f64> {
    let unit = TurbulenceNoiseParams {
        a_s: 1.0,
        ..params.clone()
    };
    let level =
        spl_from_msp(turbulence_msp(1.0, omega_rot, u2, &unit, rotor)).ok_or_else(|| {
            Error::invalid("calibration", "reference point emits no turbulence noise")
        })?;
    Ok(10f64.powf((target_db - level) / 10.0))
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be > 0")))
    }
}

/// Gearbox level in air: 86 + 3·log₁₀(rpm_s) + 4·log₁₀(kW) + 10·log₁₀(S).
pub fn gearbox_source_level(rpm_s: f64, p_kw: f64, stages: u32) -> Result<f64> {
    require_positive("rpm_s", rpm_s)?;
    require_positive("kW", p_kw)?;
    if stages < 1 {
        return Err(Error::invalid("stages", "must be >= 1"));
    }
    Ok(86.0 + 3.0 * rpm_s.log10() + 4.0 * p_kw.log10() + 10.0 * (stages as f64).log10())
}

/// Generator level in air: 80 + 10·log₁₀(MW) + 6.6·log₁₀(rpm).
pub fn generator_source_level(p_mw: f64, rpm: f64) -> Result<f64> {
    require_positive("MW", p_mw)?;
    require_positive("rpm", rpm)?;
    Ok(80.0 + 10.0 * p_mw.log10() + 6.6 * rpm.log10())
}

/// In-air level re 20 µPa to underwater level re 1 µPa (reference and
/// impedance shifts, +61.60 dB in total).
pub fn air_to_water(sl_air: f64) -> f64 {
    sl_air + reference_shift_db() + impedance_shift_db()
}

/// Free-field pressure level at 1 m from a point source of power level `lw`.
pub fn sound_power_to_pressure_1m(lw: f64) -> f64 {
    lw - 10.0 * (4.0 * PI).log10()
}

/// Underwater source level of a mechanical (empirical in-air) level.
pub fn mechanical_to_water(level_air: f64, kind: MechanicalLevelKind) -> f64 {
    match kind {
        MechanicalLevelKind::SoundPower => air_to_water(sound_power_to_pressure_1m(level_air)),
        MechanicalLevelKind::SoundPressure => air_to_water(level_air),
    }
}

/// Spherical spreading from the 1 m reference: sl − 20·log₁₀(r).
pub fn propagate(sl: f64, r: f64) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::invalid("distance", format!("{r} m must be >= 1 m")));
    }
    Ok(sl - 20.0 * r.log10())
}

/// Power sum 10·log₁₀(Σ 10^(Lᵢ/10)), skipping silent entries.
pub fn combine_incoherent(levels: &[Option<f64>]) -> Result<Option<f64>> {
    if levels.is_empty() {
        return Err(Error::invalid("levels", "nothing to combine"));
    }
    let active = levels.iter().flatten().copied();
    let Some(max) = active.clone().reduce(f64::max) else {
        return Ok(None);
    };
    let sum: f64 = active.map(|l| 10f64.powf((l - max) / 10.0)).sum();
    Ok(Some(max + 10.0 * sum.log10()))
}

/// Per-source underwater source levels, dB re 1 µPa @ 1 m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceLevels {
    pub turb: Option<f64>,
    /// `None` for direct drive or a silent gearbox.
    pub gear: Option<f64>,
    pub gen: Option<f64>,
}

impl SourceLevels {
    pub fn as_array(&self) -> [Option<f64>; 3] {
        [self.turb, self.gear, self.gen]
    }

    /// Combined source level at 1 m.
    pub fn total(&self) -> Option<f64> {
        combine_incoherent(&self.as_array()).expect("three entries")
    }

    pub fn at_distance(&self, r: f64) -> Result<ReceivedSpl> {
        let prop = |l: Option<f64>| l.map(|l| propagate(l, r)).transpose();
        let turb = prop(self.turb)?;
        let gear = prop(self.gear)?;
        let gen = prop(self.gen)?;
        Ok(ReceivedSpl {
            r,
            turb,
            gear,
            gen,
            total: combine_incoherent(&[turb, gear, gen])?,
        })
    }
}

/// Received levels at one range, dB re 1 µPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceivedSpl {
    pub r: f64,
    pub turb: Option<f64>,
    pub gear: Option<f64>,
    pub gen: Option<f64>,
    pub total: Option<f64>,
}

/// Evaluates all sources active for the plant at one operating state.
pub fn source_levels(
    state: &OperatingState,
    u2: f64,
    plant: &Plant,
    acoustics: &AcousticsConfig,
) -> Result<SourceLevels> {
    let turb = turbulence_source_level(state, u2, &acoustics.turbulence, &plant.rotor);
    let running = state.p_mech > 0.0 && state.omega > 0.0;
    let kind = acoustics.mechanical_levels;

    let gear = if plant.drivetrain.has_gearbox() && running {
        let rpm_s = match acoustics.gear_rpm_shaft {
            GearShaft::HighSpeed => state.rpm_hss,
            GearShaft::Rotor => state.rpm_rotor,
        };
        let air = gearbox_source_level(rpm_s, state.p_mech / 1e3, plant.drivetrain.gear_stages)?;
        Some(mechanical_to_water(air, kind))
    } else {
        None
    };

    let gen = if running {
        let rpm = state.rpm_generator() * (1.0 + switching_ripple_rms(&plant.control));
        let air = generator_source_level(state.p_mech / 1e6, rpm)?;
        Some(mechanical_to_water(air, kind))
    } else {
        None
    };

    Ok(SourceLevels { turb, gear, gen })
}

/// Received SPL at range `r` for one operating state.
pub fn received_spl(
    state: &OperatingState,
    u2: f64,
    r: f64,
    plant: &Plant,
    acoustics: &AcousticsConfig,
) -> Result<ReceivedSpl> {
    source_levels(state, u2, plant, acoustics)?.at_distance(r)
}
