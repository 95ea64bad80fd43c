//! Parametrically driven linear quantum refrigerator: Floquet response,
//! heat-current channels, cooling limits, emission spectra and an explicit
//! finite-bath reference simulation.
//!
//! Units: ħ = k_B = 1 and the system mass is 1.

// `!(x > y)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crosscheck;
pub mod currents;
pub mod error;
pub mod floquet;
pub mod limits;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type SystemParams64 = model::SystemParams<f64>;
pub type SpectralDensity64 = model::SpectralDensity<f64>;
pub type ReservoirSpec64 = model::ReservoirSpec<f64>;
pub type Reservoirs64 = model::Reservoirs<f64>;
pub type DrivePlan64 = model::DrivePlan<f64>;
pub type ExactFloquet64 = floquet::ExactFloquet<f64>;
pub type Perturbative64 = floquet::Perturbative<f64>;
pub type FloquetSolution64 = floquet::FloquetSolution<f64>;
pub type CurrentsConfig64 = currents::CurrentsConfig<f64>;
pub type HeatBreakdown64 = currents::HeatBreakdown<f64>;
pub type CoolingReport64 = limits::CoolingReport<f64>;
pub type DriveSearch64 = limits::DriveSearch<f64>;
pub type SpectrumParams64 = spectrum::SpectrumParams<f64>;
pub type SpectrumTable64 = spectrum::SpectrumTable<f64>;
pub type IonPreset64 = spectrum::IonPreset<f64>;
pub type OracleModel64 = oracle::OracleModel<f64>;
pub type CrossCheckConfig64 = crosscheck::CrossCheckConfig<f64>;
pub type CrossCheckReport64 = crosscheck::CrossCheckReport<f64>;
