//! Named scenarios. Frequencies in units of ω₀ unless noted.

use std::f64::consts::PI;

use qfridge_core::spectrum::{ion_mapping, IonPreset};

use crate::config::{
    ConfigError, DriveSection, ReservoirSection, RunConfig, SpectrumSection, SystemSection,
};

pub const NAMES: [&str; 6] = [
    "sideband",
    "doppler",
    "figure67",
    "ca-ion",
    "half-frequency",
    "weak-coupling",
];

fn base(
    gamma: f64,
    a: ReservoirSection,
    b: ReservoirSection,
    amplitude: f64,
    omega_d: Option<f64>,
) -> RunConfig {
    RunConfig {
        system: SystemSection {
            omega0: 1.0,
            gamma,
            time_unit: None,
        },
        drive: DriveSection {
            omega_d,
            v0: None,
            amplitude: Some(amplitude),
            harmonics: Vec::new(),
        },
        reservoir_a: a,
        reservoir_b: b,
        floquet: Default::default(),
        currents: Default::default(),
        limits: Default::default(),
        spectrum: Default::default(),
        validate: Default::default(),
        sweep: Default::default(),
        tolerances: Default::default(),
        output: Default::default(),
    }
}

pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
    let cfg = match name {
        // γ/ω_m = 10⁻², ω_m = 10⁻³ω₀, weak drive.
        "sideband" => base(
            1e-5,
            ReservoirSection::dirac(1e-6, 1e-3, 0.0),
            ReservoirSection::ohmic(50.0, 0.0),
            1e-3,
            None,
        ),
        // γ/ω_m = 20.
        "doppler" => base(
            2e-2,
            ReservoirSection::dirac(1e-6, 1e-3, 0.0),
            ReservoirSection::ohmic(50.0, 0.0),
            1e-3,
            None,
        ),
        // ω_m = 0.1, γ = 10⁻², cubic I_B, motional line of width 10⁻²ω_m.
        "figure67" => {
            let mut c = base(
                1e-2,
                ReservoirSection::dirac(1e-3, 0.1, 0.0),
                ReservoirSection::power_law(4e-2 / PI, 3.0, 1.0, 1e3, 0.0),
                1e-3,
                Some(0.9),
            );
            c.limits.optimize = false;
            c.spectrum.linewidth = Some(1e-3);
            c
        }
        "ca-ion" => {
            let ion =
                ion_mapping(&IonPreset::<f64>::calcium()).expect("calcium parameters are valid");
            let mut c = base(
                ion.sys.gamma,
                ReservoirSection::dirac(ion.i_a_weight, ion.omega_m, 0.0),
                ReservoirSection::power_law(4.0 * ion.sys.gamma / PI, 3.0, 1.0, 1e3, 0.0),
                ion.drive_amplitude,
                Some(ion.omega_d),
            );
            c.system.time_unit = Some(ion.time_unit);
            c.limits.optimize = false;
            c.limits.model = crate::config::ModelKind::Perturbative;
            c.currents.model = crate::config::ModelKind::Perturbative;
            c.spectrum = SpectrumSection::default();
            c
        }
        // ω₀ = 2ω_m driven at ω_m.
        "half-frequency" => {
            let mut c = base(
                1e-2,
                ReservoirSection::dirac(1e-6, 0.5, 0.0),
                ReservoirSection::ohmic(50.0, 0.0),
                1e-3,
                Some(0.5),
            );
            c.limits.optimize = false;
            c
        }
        // Oracle corner: coupling c² = ω_m·Ĩ_A = 2.5·10⁻³, V/V₀ = 0.1.
        "weak-coupling" => base(
            2e-2,
            ReservoirSection::dirac(2.5e-3 / 0.3, 0.3, 0.0),
            ReservoirSection::ohmic(50.0, 0.0),
            0.1,
            None,
        ),
        _ => {
            return Err(ConfigError::new(
                "preset",
                format!("unknown preset `{name}`; known: {}", NAMES.join(", ")),
            ))
        }
    };
    Ok(cfg)
}
