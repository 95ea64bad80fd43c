//! Finite-bath simulation against the Floquet formulas in the weak-coupling
//! sideband corner.
//!
//! Three runs share one propagator, all starting from the undriven ground
//! state. Two of them differ only by a small excitation of the motional
//! mode; the difference of their window averages gives the relaxation factor,
//! which removes the unfinished slow transient from the steady occupation.
//! The third starts hot and measures the motional heat current while it is
//! still large compared to switch-on ringing.

use crate::currents::{heat_breakdown, heat_rp_channel, CurrentsConfig};
use crate::error::{Error, Result};
use crate::floquet::ExactFloquet;
use crate::limits::{sideband_optimal_drive, steady_occupation};
use crate::model::{DrivePlan, Label, ReservoirSpec, Reservoirs, SpectralDensity, SystemParams};
use crate::oracle::{
    build_discretized_bath, measure_currents, propagate, window_averages, BathBand, OracleModel,
    PropagateOptions, Propagator,
};
use crate::scalar::{tol_floor, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheckConfig<R> {
    pub omega0: R,
    pub gamma: R,
    pub omega_m: R,
    /// Drive harmonic V with V(t) = V₀ + 2V cos ω_d t and V₀ = ω₀².
    pub amplitude: R,
    /// Squared coupling c² of the motional mode, c² = ω_m·Ĩ_A.
    pub coupling_sq: R,
    pub modes: usize,
    pub periods: usize,
    pub window: usize,
    /// Extra quanta in the second cold run.
    pub cold_excitation: R,
    /// Initial quanta in the hot run.
    pub hot_excitation: R,
    pub hot_start: usize,
    pub hot_window: usize,
    pub floquet_k: usize,
    pub heat_tol: R,
    pub occupation_tol: R,
    pub identity_tol: R,
}

impl<R: Real> Default for CrossCheckConfig<R> {
    fn default() -> Self {
        Self {
            omega0: R::one(),
            gamma: R::of(0.02),
            omega_m: R::of(0.3),
            amplitude: R::of(0.1),
            coupling_sq: R::of(2.5e-3),
            modes: 400,
            periods: 200,
            window: 40,
            cold_excitation: R::of(1e-3),
            hot_excitation: R::of(0.2),
            hot_start: 20,
            hot_window: 20,
            floquet_k: 6,
            heat_tol: R::of(0.1),
            occupation_tol: R::of(0.15),
            identity_tol: R::of(0.05),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check<R> {
    pub name: &'static str,
    pub value: R,
    pub reference: R,
    pub tolerance: R,
    pub pass: bool,
}

impl<R: Real> Check<R> {
    fn relative(name: &'static str, value: R, reference: R, tolerance: R) -> Self {
        let err = (value - reference).abs() / reference.abs();
        Self {
            name,
            value,
            reference,
            tolerance,
            pass: err <= tolerance,
        }
    }

    /// Relative deviation from the reference; absolute for the positivity bound.
    pub fn deviation(&self) -> R {
        if self.reference == R::zero() {
            (self.value - self.reference).abs()
        } else {
            (self.value - self.reference).abs() / self.reference.abs()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheckReport<R> {
    pub checks: Vec<Check<R>>,
    pub omega_d: R,
    /// Steady occupation from the two cold runs and from the ratio formula.
    pub occupation: R,
    pub floquet_occupation: R,
    /// Fraction of the cold excitation left at the end of the window.
    pub relaxation: R,
    pub heat_a: R,
    pub heat_b: R,
    pub v_sigma_xp: R,
    pub work: R,
    pub hot_occupation: R,
    pub hot_heat_a: R,
    /// Floquet Q̇_A at the hot occupation with plain conduction removed.
    pub floquet_hot_heat_a: R,
    pub floquet_conduction_a: R,
    pub min_symplectic: R,
    pub recurrence_time: R,
}

impl<R: Real> CrossCheckReport<R> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Runs the oracle on the configured sideband corner and compares it with
/// the Floquet currents and the steady-occupation formula.
pub fn cross_check<R: Real>(cfg: &CrossCheckConfig<R>) -> Result<CrossCheckReport<R>> {
    if cfg.window == 0 || cfg.hot_window == 0 || cfg.window >= cfg.periods {
        return Err(Error::Configuration(
            "averaging windows must be non-empty and inside the horizon".into(),
        ));
    }
    let sys = SystemParams::new(cfg.omega0, cfg.gamma)?;
    let omega_d = sideband_optimal_drive(&sys, cfg.omega_m);
    let drive = DrivePlan::harmonic(cfg.omega0 * cfg.omega0, cfg.amplitude, omega_d)?;
    let ib = sys.ohmic_density(R::of(50.0))?;
    let ia = SpectralDensity::dirac(cfg.coupling_sq / cfg.omega_m, cfg.omega_m)?;

    let band = BathBand::for_drive(&sys, cfg.omega_m, omega_d);
    let a = build_discretized_bath(Label::A, &ia, cfg.modes, &band, &sys)?;
    let b = build_discretized_bath(Label::B, &ib, cfg.modes, &band, &sys)?;
    let model = OracleModel::new(sys, drive.clone(), vec![a, b])?;
    let modes = model.normal_modes()?;
    let probe = model.mode_probe(&modes, 0)?;
    let ground = model.gibbs_state(&modes, R::zero())?;
    let mut cold = ground.clone();
    probe.excite(&mut cold, cfg.cold_excitation);
    let mut hot = ground.clone();
    probe.excite(&mut hot, cfg.hot_excitation);
    let start = [probe.occupation(&ground), probe.occupation(&cold)];
    let prop = Propagator::new(&model, vec![probe], None);

    let lead = cfg.periods - cfg.window;
    let opts = PropagateOptions::new(lead);
    let traj0 = propagate(&model, &prop, &ground, &opts)?;
    let base = measure_currents(&model, &prop, &traj0, cfg.window)?;
    let traj1 = propagate(&model, &prop, &cold, &opts)?;
    let (excited, _) = window_averages(&prop, &traj1.final_state, cfg.window);
    let relaxation = (excited.occupations[0] - base.occupations[0]) / (start[1] - start[0]);
    let occupation = (base.occupations[0] - start[0] * relaxation) / (R::one() - relaxation);

    let hot_opts = PropagateOptions {
        periods: cfg.hot_start,
        min_periods: cfg.hot_start,
        periodicity_tol: R::zero(),
    };
    let traj2 = propagate(&model, &prop, &hot, &hot_opts)?;
    let (hot_avg, _) = window_averages(&prop, &traj2.final_state, cfg.hot_window);
    let hot_occupation = hot_avg.occupations[0];

    let provider = ExactFloquet::new(&sys, &drive, cfg.floquet_k)?;
    let cold_res = Reservoirs::new(
        ReservoirSpec::new(Label::A, ia.clone(), R::zero())?,
        ReservoirSpec::new(Label::B, ib.clone(), R::zero())?,
    )?;
    let floquet_occupation = steady_occupation(&provider, &cold_res)?;
    let t_hot = cfg.omega_m / (R::one() + R::one() / hot_occupation).ln();
    let hot_res = Reservoirs::new(
        ReservoirSpec::new(Label::A, ia, t_hot)?,
        ReservoirSpec::new(Label::B, ib, R::zero())?,
    )?;
    let ccfg = CurrentsConfig::default();
    let hb = heat_breakdown(&provider, &hot_res, &ccfg)?;
    let conduction = heat_rp_channel(&provider, &hot_res, Label::A, 0, &ccfg)?;
    let floquet_hot_heat_a = hb.a.total - conduction;
    let hot_heat_a = hot_avg.heat[0];

    let min_symplectic = base
        .min_symplectic
        .min(traj1.min_symplectic())
        .min(traj2.min_symplectic());
    let floor = R::half() - tol_floor::<R>(1e-9, 1e3);
    let total = base.total_heat();
    let checks = vec![
        Check::relative("heat_a", hot_heat_a, floquet_hot_heat_a, cfg.heat_tol),
        Check::relative(
            "occupation",
            occupation,
            floquet_occupation,
            cfg.occupation_tol,
        ),
        Check::relative("identity", base.v_sigma_xp, total, cfg.identity_tol),
        Check {
            name: "positivity",
            value: min_symplectic,
            reference: R::half(),
            tolerance: R::half() - floor,
            pass: min_symplectic >= floor,
        },
    ];
    Ok(CrossCheckReport {
        checks,
        omega_d,
        occupation,
        floquet_occupation,
        relaxation,
        heat_a: base.heat_of(Label::A),
        heat_b: base.heat_of(Label::B),
        v_sigma_xp: base.v_sigma_xp,
        work: base.work,
        hot_occupation,
        hot_heat_a,
        floquet_hot_heat_a,
        floquet_conduction_a: conduction,
        min_symplectic,
        recurrence_time: model.recurrence_time(),
    })
}
