//! Run configuration: a sectioned TOML document mapped onto model types.

use std::fmt;

use serde::{Deserialize, Serialize};

use qfridge_core::crosscheck::CrossCheckConfig;
use qfridge_core::limits::{analytic_optimum, CoefficientModel, DriveSearch};
use qfridge_core::model::{
    DrivePlan, Label, ReservoirSpec, Reservoirs, SpectralDensity, SystemParams,
};
use qfridge_core::spectrum::GridSpec;
use qfridge_core::{Cplx, Error as CoreError};

/// A configuration problem tied to a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn core_err(field: &str, e: CoreError) -> ConfigError {
    match e {
        CoreError::Configuration(m) => ConfigError::new(field, m),
        other => ConfigError::new(field, other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub drive: DriveSection,
    pub reservoir_a: ReservoirSection,
    pub reservoir_b: ReservoirSection,
    #[serde(default)]
    pub floquet: FloquetSection,
    #[serde(default)]
    pub currents: CurrentsSection,
    #[serde(default)]
    pub limits: LimitsSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub omega0: f64,
    pub gamma: f64,
    /// Seconds per model time unit; enables per-second rates in reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_unit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Drive frequency; defaults to the closed-form optimum for the motional
    /// mode of reservoir A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_d: Option<f64>,
    /// Static part V₀; defaults to ω₀².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    /// First harmonic V of V(t) = V₀ + 2V cos ω_d t.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Explicit Fourier table; k and −k must be complex conjugates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<Harmonic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Dirac,
    Ohmic,
    PowerLaw,
    Lorentzian,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSection {
    pub kind: DensityKind,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

impl ReservoirSection {
    fn blank(kind: DensityKind, temperature: f64) -> Self {
        Self {
            kind,
            temperature,
            weight: None,
            frequency: None,
            prefactor: None,
            exponent: None,
            reference: None,
            cutoff: None,
            center: None,
            width: None,
            points: None,
        }
    }

    pub fn dirac(weight: f64, frequency: f64, temperature: f64) -> Self {
        Self {
            weight: Some(weight),
            frequency: Some(frequency),
            ..Self::blank(DensityKind::Dirac, temperature)
        }
    }

    /// Ohmic density whose damping rate at ω₀ matches the system γ.
    pub fn ohmic(cutoff: f64, temperature: f64) -> Self {
        Self {
            cutoff: Some(cutoff),
            ..Self::blank(DensityKind::Ohmic, temperature)
        }
    }

    pub fn power_law(
        prefactor: f64,
        exponent: f64,
        reference: f64,
        cutoff: f64,
        temperature: f64,
    ) -> Self {
        Self {
            prefactor: Some(prefactor),
            exponent: Some(exponent),
            reference: Some(reference),
            cutoff: Some(cutoff),
            ..Self::blank(DensityKind::PowerLaw, temperature)
        }
    }

    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        for (name, set) in [
            ("weight", self.weight.is_some()),
            ("frequency", self.frequency.is_some()),
            ("prefactor", self.prefactor.is_some()),
            ("exponent", self.exponent.is_some()),
            ("reference", self.reference.is_some()),
            ("cutoff", self.cutoff.is_some()),
            ("center", self.center.is_some()),
            ("width", self.width.is_some()),
            ("points", self.points.is_some()),
        ] {
            if set {
                v.push(name);
            }
        }
        v
    }

    fn density(
        &self,
        section: &str,
        sys: &SystemParams<f64>,
    ) -> Result<SpectralDensity<f64>, ConfigError> {
        let (required, optional): (&[&str], &[&str]) = match self.kind {
            DensityKind::Dirac => (&["weight", "frequency"], &[]),
            DensityKind::Ohmic => (&[], &["cutoff"]),
            DensityKind::PowerLaw => (&["prefactor", "exponent"], &["reference", "cutoff"]),
            DensityKind::Lorentzian => (&["weight", "center", "width"], &[]),
            DensityKind::Tabulated => (&["points"], &[]),
        };
        let present = self.present();
        for name in &present {
            if !required.contains(name) && !optional.contains(name) {
                return Err(ConfigError::new(
                    format!("{section}.{name}"),
                    format!("not used by kind = {}", kind_name(self.kind)),
                ));
            }
        }
        for name in required {
            if !present.contains(name) {
                return Err(ConfigError::new(
                    format!("{section}.{name}"),
                    format!("required for kind = {}", kind_name(self.kind)),
                ));
            }
        }
        let field = |name: &str| format!("{section}.{name}");
        let sd = match self.kind {
            DensityKind::Dirac => {
                SpectralDensity::dirac(self.weight.unwrap(), self.frequency.unwrap())
                    .map_err(|e| core_err(&field("weight"), e))?
            }
            DensityKind::Ohmic => sys
                .ohmic_density(self.cutoff.unwrap_or(50.0 * sys.omega0))
                .map_err(|e| core_err(&field("cutoff"), e))?,
            DensityKind::PowerLaw => SpectralDensity::power_law(
                self.prefactor.unwrap(),
                self.exponent.unwrap(),
                self.reference.unwrap_or(sys.omega0),
                self.cutoff.unwrap_or(f64::INFINITY),
            )
            .map_err(|e| core_err(&field("prefactor"), e))?,
            DensityKind::Lorentzian => SpectralDensity::lorentzian(
                self.weight.unwrap(),
                self.center.unwrap(),
                self.width.unwrap(),
            )
            .map_err(|e| core_err(&field("width"), e))?,
            DensityKind::Tabulated => SpectralDensity::tabulated(
                self.points
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|p| (p[0], p[1]))
                    .collect(),
            )
            .map_err(|e| core_err(&field("points"), e))?,
        };
        Ok(sd)
    }
}

fn kind_name(kind: DensityKind) -> &'static str {
    match kind {
        DensityKind::Dirac => "dirac",
        DensityKind::Ohmic => "ohmic",
        DensityKind::PowerLaw => "power_law",
        DensityKind::Lorentzian => "lorentzian",
        DensityKind::Tabulated => "tabulated",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Exact,
    Perturbative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FloquetSection {
    /// Truncation order; absent means escalate until converged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub omega_min: f64,
    /// Upper end of the grid; absent means 2ω₀.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    pub points: usize,
}

impl Default for FloquetSection {
    fn default() -> Self {
        Self {
            k: None,
            omega_min: 0.0,
            omega_max: None,
            points: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurrentsSection {
    pub model: ModelKind,
    pub k: usize,
    /// Upper limit of thermal integrals in units of the largest temperature.
    pub thermal_cutoff: f64,
}

impl Default for CurrentsSection {
    fn default() -> Self {
        Self {
            model: ModelKind::Exact,
            k: 4,
            thermal_cutoff: 40.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsSection {
    pub model: ModelKind,
    pub k: usize,
    /// Search the drive frequency; otherwise evaluate at `drive.omega_d`.
    pub optimize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_upper: Option<f64>,
    pub scan_points: usize,
}

impl Default for LimitsSection {
    fn default() -> Self {
        Self {
            model: ModelKind::Exact,
            k: 4,
            optimize: true,
            search_lower: None,
            search_upper: None,
            scan_points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub model: ModelKind,
    pub k: usize,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub refine: usize,
    /// Refined half-window around each line in units of the linewidth.
    pub window: f64,
    /// Motional linewidth Γ_m; defaults to 10⁻²ω_m for a delta mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linewidth: Option<f64>,
    /// Motional occupation; defaults to the steady state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy: Option<f64>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        let g = GridSpec::<f64>::default();
        Self {
            model: ModelKind::Perturbative,
            k: 4,
            points: g.points,
            upper: None,
            refine: g.refine,
            window: g.window,
            linewidth: None,
            occupancy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub modes: usize,
    pub periods: usize,
    pub window: usize,
    pub cold_excitation: f64,
    pub hot_excitation: f64,
    pub hot_start: usize,
    pub hot_window: usize,
    pub k: usize,
}

impl Default for ValidateSection {
    fn default() -> Self {
        let c = CrossCheckConfig::<f64>::default();
        Self {
            modes: c.modes,
            periods: c.periods,
            window: c.window,
            cold_excitation: c.cold_excitation,
            hot_excitation: c.hot_excitation,
            hot_start: c.hot_start,
            hot_window: c.hot_window,
            k: c.floquet_k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAnalysis {
    #[default]
    Limits,
    Currents,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub analysis: SweepAnalysis,
    /// Axes as `key=start:stop:count`, outermost first.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance of adaptive quadrature.
    pub quadrature: f64,
    /// Relative tolerance of the drive-frequency search.
    pub search: f64,
    pub validate_heat: f64,
    pub validate_occupation: f64,
    pub validate_identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = CrossCheckConfig::<f64>::default();
        Self {
            quadrature: 1e-8,
            search: 1e-6,
            validate_heat: c.heat_tol,
            validate_occupation: c.occupation_tol,
            validate_identity: c.identity_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Model objects built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub sys: SystemParams<f64>,
    pub drive: DrivePlan<f64>,
    pub reservoirs: Reservoirs<f64>,
    /// Motional frequency when reservoir A is a single mode.
    pub omega_m: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string().trim_end().to_string()))
    }

    /// Canonical TOML dump; parsing it yields an equal configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn to_value(&self) -> toml::Value {
        toml::Value::try_from(self).expect("configuration serializes")
    }

    pub fn from_value(value: toml::Value) -> Result<Self, ConfigError> {
        value.try_into().map_err(|e: toml::de::Error| {
            ConfigError::new("", e.to_string().trim_end().to_string())
        })
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let s = &self.system;
        let sys = SystemParams::new(s.omega0, s.gamma).map_err(|e| {
            let field = if s.omega0 > 0.0 && s.omega0.is_finite() {
                "system.gamma"
            } else {
                "system.omega0"
            };
            core_err(field, e)
        })?;
        if let Some(t) = s.time_unit {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::new(
                    "system.time_unit",
                    format!("must be > 0, got {t}"),
                ));
            }
        }
        let a = self.reservoir_a.density("reservoir_a", &sys)?;
        let b = self.reservoir_b.density("reservoir_b", &sys)?;
        if b.is_delta() {
            return Err(ConfigError::new(
                "reservoir_b.kind",
                "reservoir B must be a continuum",
            ));
        }
        let ra = ReservoirSpec::new(Label::A, a, self.reservoir_a.temperature)
            .map_err(|e| core_err("reservoir_a.temperature", e))?;
        let rb = ReservoirSpec::new(Label::B, b, self.reservoir_b.temperature)
            .map_err(|e| core_err("reservoir_b.temperature", e))?;
        let reservoirs = Reservoirs::new(ra, rb).map_err(|e| core_err("reservoir_a", e))?;
        let omega_m = qfridge_core::limits::motional_frequency(&reservoirs).ok();

        let d = &self.drive;
        let omega_d = match (d.omega_d, omega_m) {
            (Some(w), _) => w,
            (None, Some(wm)) => analytic_optimum(&sys, wm),
            (None, None) => {
                return Err(ConfigError::new(
                    "drive.omega_d",
                    "required when reservoir A is not a single motional mode",
                ))
            }
        };
        if !(omega_d > 0.0 && omega_d.is_finite()) {
            return Err(ConfigError::new(
                "drive.omega_d",
                format!("must be > 0, got {omega_d}"),
            ));
        }
        let v0 = d.v0.unwrap_or(s.omega0 * s.omega0);
        let drive = match (d.amplitude, d.harmonics.is_empty()) {
            (Some(_), false) => {
                return Err(ConfigError::new(
                    "drive.harmonics",
                    "give either amplitude or harmonics, not both",
                ))
            }
            (amp, true) => DrivePlan::harmonic(v0, amp.unwrap_or(0.0), omega_d)
                .map_err(|e| core_err("drive.amplitude", e))?,
            (None, false) => {
                let mut table = std::collections::BTreeMap::new();
                table.insert(0, Cplx::new(v0, 0.0));
                for (i, h) in d.harmonics.iter().enumerate() {
                    if h.k == 0 {
                        return Err(ConfigError::new(
                            format!("drive.harmonics[{i}].k"),
                            "k = 0 is the static part; use drive.v0",
                        ));
                    }
                    if table.insert(h.k, Cplx::new(h.re, h.im)).is_some() {
                        return Err(ConfigError::new(
                            format!("drive.harmonics[{i}].k"),
                            "duplicate harmonic",
                        ));
                    }
                }
                DrivePlan::new(table, omega_d).map_err(|e| core_err("drive.harmonics", e))?
            }
        };
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.quadrature", t.quadrature),
            ("tolerances.search", t.search),
            ("tolerances.validate_heat", t.validate_heat),
            ("tolerances.validate_occupation", t.validate_occupation),
            ("tolerances.validate_identity", t.validate_identity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new(name, format!("must be > 0, got {v}")));
            }
        }
        if self.floquet.points < 1 {
            return Err(ConfigError::new("floquet.points", "must be >= 1"));
        }
        Ok(Scenario {
            sys,
            drive,
            reservoirs,
            omega_m,
        })
    }

    pub fn model(kind: ModelKind, k: usize) -> CoefficientModel {
        match kind {
            ModelKind::Exact => CoefficientModel::Exact { k },
            ModelKind::Perturbative => CoefficientModel::Perturbative,
        }
    }

    pub fn drive_search(&self, scenario: &Scenario) -> Result<DriveSearch<f64>, ConfigError> {
        let wm = scenario.omega_m.ok_or_else(|| {
            ConfigError::new(
                "reservoir_a.kind",
                "cooling limits need a single motional mode",
            )
        })?;
        let l = &self.limits;
        let near = DriveSearch::near_carrier(&scenario.sys, wm);
        let mut search = DriveSearch::new(
            l.search_lower.unwrap_or(near.lower),
            l.search_upper.unwrap_or(near.upper),
        )
        .with_model(Self::model(l.model, l.k));
        search.scan_points = l.scan_points;
        search.rel_tol = self.tolerances.search;
        Ok(search)
    }

    /// Oracle comparison parameters; the corner is defined by the system,
    /// the drive amplitude and a delta-mode reservoir A over an ohmic B at
    /// zero temperature.
    pub fn cross_check(&self, scenario: &Scenario) -> Result<CrossCheckConfig<f64>, ConfigError> {
        let a = &self.reservoir_a;
        if a.kind != DensityKind::Dirac {
            return Err(ConfigError::new(
                "reservoir_a.kind",
                "validate needs kind = dirac",
            ));
        }
        if self.reservoir_b.kind != DensityKind::Ohmic {
            return Err(ConfigError::new(
                "reservoir_b.kind",
                "validate needs kind = ohmic",
            ));
        }
        if a.temperature != 0.0 || self.reservoir_b.temperature != 0.0 {
            return Err(ConfigError::new(
                "reservoir_a.temperature",
                "validate runs at zero temperature",
            ));
        }
        let amplitude = scenario.drive.harmonic_amplitude().ok_or_else(|| {
            ConfigError::new("drive.harmonics", "validate needs a harmonic drive")
        })?;
        if self.drive.omega_d.is_some() {
            return Err(ConfigError::new(
                "drive.omega_d",
                "validate drives at the sideband optimum; leave omega_d unset",
            ));
        }
        let wm = a.frequency.unwrap();
        let v = &self.validate;
        let t = &self.tolerances;
        Ok(CrossCheckConfig {
            omega0: self.system.omega0,
            gamma: self.system.gamma,
            omega_m: wm,
            amplitude,
            coupling_sq: wm * a.weight.unwrap(),
            modes: v.modes,
            periods: v.periods,
            window: v.window,
            cold_excitation: v.cold_excitation,
            hot_excitation: v.hot_excitation,
            hot_start: v.hot_start,
            hot_window: v.hot_window,
            floquet_k: v.k,
            heat_tol: t.validate_heat,
            occupation_tol: t.validate_occupation,
            identity_tol: t.validate_identity,
        })
    }
}
