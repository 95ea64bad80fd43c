//! Subcommand bodies: configuration in, [`Table`] out.

use qfridge_core::crosscheck::{cross_check, CrossCheckReport};
use qfridge_core::currents::{heat_breakdown, CurrentsConfig};
use qfridge_core::floquet::{
    solve_floquet, solve_floquet_auto, ExactFloquet, FloquetOptions, Perturbative,
};
use qfridge_core::limits::{
    classify_regime, doppler_limit, half_frequency_limit, occupation_at, optimize_drive,
    sideband_limit, CoolingReport, Provenance, Regime,
};
use qfridge_core::model::Label;
use qfridge_core::spectrum::{build_spectrum, GridSpec, SpectrumParams};
use qfridge_core::Error as CoreError;

use crate::config::{ConfigError, ModelKind, RunConfig, Scenario};
use crate::output::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical error: {0}")]
    Numeric(#[from] CoreError),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

/// A core error that stems from the configured values rather than from the
/// numerics is reported as a configuration error.
fn classify(e: CoreError) -> CliError {
    match e {
        CoreError::Configuration(m) => CliError::Config(ConfigError::new("", m)),
        CoreError::UnsupportedDrive(m) => CliError::Config(ConfigError::new("drive", m)),
        other => CliError::Numeric(other),
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Columns ω, k, Re A_k, Im A_k, |A_k|²; undriven plans only have k = 0.
pub fn floquet(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = cfg.scenario()?;
    let f = &cfg.floquet;
    let hi = f.omega_max.unwrap_or(2.0 * s.sys.omega0);
    if !(hi > f.omega_min) {
        return Err(ConfigError::new("floquet.omega_max", "must exceed floquet.omega_min").into());
    }
    let nodes = grid(f.omega_min, hi, f.points);
    let sol = match f.k {
        Some(k) => solve_floquet(&s.sys, &s.drive, &nodes, k),
        None => solve_floquet_auto(&s.sys, &s.drive, &nodes, &FloquetOptions::default()),
    }
    .map_err(classify)?;
    let shown = if s.drive.k_max() == 0 {
        0
    } else {
        sol.k as i64
    };
    let mut t = Table::new(&["omega", "k", "re", "im", "abs2"]);
    for (i, &w) in sol.grid.iter().enumerate() {
        for k in -shown..=shown {
            let a = sol.coefficient(i, k);
            t.push(vec![
                w.into(),
                Cell::Int(k),
                a.re.into(),
                a.im.into(),
                a.norm_sqr().into(),
            ]);
        }
    }
    t.meta("truncation", Cell::Int(sol.k as i64));
    t.meta("residual", sol.residual);
    t.meta("tail", sol.tail);
    Ok(t)
}

fn currents_config(cfg: &RunConfig) -> CurrentsConfig<f64> {
    let mut c = CurrentsConfig::default();
    c.quad.rel_tol = cfg.tolerances.quadrature;
    c.thermal_cutoff = cfg.currents.thermal_cutoff;
    c
}

/// Named values of the six heat channels, the work rate and the closure.
pub fn currents_values(
    cfg: &RunConfig,
    s: &Scenario,
) -> Result<Vec<(&'static str, Cell)>, CliError> {
    let cc = currents_config(cfg);
    let hb = match cfg.currents.model {
        ModelKind::Exact => heat_breakdown(
            &ExactFloquet::new(&s.sys, &s.drive, cfg.currents.k).map_err(classify)?,
            &s.reservoirs,
            &cc,
        ),
        ModelKind::Perturbative => heat_breakdown(
            &Perturbative::new(&s.sys, &s.drive).map_err(classify)?,
            &s.reservoirs,
            &cc,
        ),
    }
    .map_err(classify)?;
    let (a, b) = (hb.get(Label::A), hb.get(Label::B));
    Ok(vec![
        ("omega_d", s.drive.omega_d.into()),
        ("a_rp", a.rp.into()),
        ("a_rh", a.rh.into()),
        ("a_nrh", a.nrh.into()),
        ("a_total", a.total.into()),
        ("b_rp", b.rp.into()),
        ("b_rh", b.rh.into()),
        ("b_nrh", b.nrh.into()),
        ("b_total", b.total.into()),
        ("work", hb.work.into()),
        ("closure_defect", hb.closure_defect.into()),
    ])
}

pub fn currents(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = cfg.scenario()?;
    Ok(Table::record(currents_values(cfg, &s)?))
}

/// Closed-form `(occupancy, ω_d)` of the regime at the drive frequency.
fn closed_form(s: &Scenario, wm: f64, omega_d: f64) -> Option<(f64, f64)> {
    let ib = &s.reservoirs.b.density;
    let report = match classify_regime(&s.sys, wm, omega_d) {
        Regime::HalfFrequency => {
            let v = s.drive.harmonic_amplitude()?;
            return half_frequency_limit(&s.sys, ib, wm, v)
                .ok()
                .map(|h| (h.occupancy, wm));
        }
        _ if s.sys.gamma < wm => sideband_limit(&s.sys, ib, wm),
        _ => doppler_limit(&s.sys, wm),
    };
    report.ok().map(|r| (r.occupancy, r.omega_d_optimal))
}

pub fn limits_values(cfg: &RunConfig, s: &Scenario) -> Result<Vec<(&'static str, Cell)>, CliError> {
    let wm = s.omega_m.ok_or_else(|| {
        ConfigError::new(
            "reservoir_a.kind",
            "cooling limits need a single motional mode",
        )
    })?;
    let l = &cfg.limits;
    let report = if l.optimize {
        let search = cfg.drive_search(s)?;
        optimize_drive(&s.sys, &s.drive, &s.reservoirs, &search).map_err(classify)?
    } else {
        let model = RunConfig::model(l.model, l.k);
        let n = occupation_at(&s.sys, &s.drive, &s.reservoirs, model, s.drive.omega_d)
            .map_err(classify)?;
        CoolingReport {
            occupancy: n,
            omega_d_optimal: s.drive.omega_d,
            regime: classify_regime(&s.sys, wm, s.drive.omega_d),
            feasible: n.is_finite(),
            provenance: match l.model {
                ModelKind::Exact => Provenance::ExactFloquet,
                ModelKind::Perturbative => Provenance::LeadingOrder,
            },
            analytic_omega_d: None,
            analytic_agrees: None,
        }
    };
    let cf = closed_form(s, wm, report.omega_d_optimal);
    Ok(vec![
        ("omega_m", wm.into()),
        ("gamma", s.sys.gamma.into()),
        ("omega_d", report.omega_d_optimal.into()),
        ("occupancy", report.occupancy.into()),
        ("feasible", report.feasible.into()),
        ("regime", report.regime.to_string().into()),
        ("provenance", report.provenance.to_string().into()),
        ("analytic_omega_d", report.analytic_omega_d.into()),
        ("closed_form_occupancy", cf.map(|r| r.0).into()),
        ("closed_form_omega_d", cf.map(|r| r.1).into()),
    ])
}

pub fn limits(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = cfg.scenario()?;
    Ok(Table::record(limits_values(cfg, &s)?))
}

/// Columns ω, f_RP, f_NRH, f′_NRH and the emitted power density; rates in
/// the metadata, per second when the system carries a time unit.
pub fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = cfg.scenario()?;
    let sp = &cfg.spectrum;
    let model = RunConfig::model(sp.model, sp.k);
    let mut params = match sp.occupancy {
        Some(n) => SpectrumParams::new(&s.sys, &s.drive, &s.reservoirs, n),
        None => SpectrumParams::at_steady_state(&s.sys, &s.drive, &s.reservoirs),
    }
    .map_err(classify)?
    .with_model(model);
    if let Some(w) = sp.linewidth {
        if !(w > 0.0) {
            return Err(
                ConfigError::new("spectrum.linewidth", format!("must be > 0, got {w}")).into(),
            );
        }
        params = params.with_linewidth(w);
    }
    let grid_spec = GridSpec {
        points: sp.points,
        upper: sp.upper,
        refine: sp.refine,
        window: sp.window,
    };
    let table = build_spectrum(&params, &grid_spec).map_err(classify)?;
    let mut t = Table::new(&["omega", "f_rp", "f_nrh", "f_pairs", "power"]);
    for i in 0..table.grid.len() {
        t.push(vec![
            table.grid[i].into(),
            table.f_rp[i].into(),
            table.f_nrh[i].into(),
            table.f_pairs[i].into(),
            table.power_density(i).into(),
        ]);
    }
    t.meta("omega_d", table.omega_d);
    t.meta("omega_m", table.omega_m);
    t.meta("linewidth", table.linewidth);
    t.meta("occupancy", table.occupancy);
    t.meta("rate_rp", table.rate_rp);
    t.meta("rate_nrh", table.rate_nrh);
    t.meta("rate_pairs", table.rate_pairs);
    t.meta("casimir_ratio", table.casimir_ratio);
    t.meta("casimir_closed_form", table.casimir_closed_form);
    if let Some(unit) = cfg.system.time_unit {
        t.meta("rate_rp_per_second", table.rate_rp / unit);
        t.meta("rate_nrh_per_second", table.rate_nrh / unit);
        t.meta("rate_pairs_per_second", table.rate_pairs / unit);
        t.meta(
            "rate_transition_per_second",
            (table.rate_rp + table.rate_nrh) / unit,
        );
    }
    Ok(t)
}

/// One row per oracle criterion plus the raw measurements as metadata.
pub fn validate(cfg: &RunConfig) -> Result<(Table, CrossCheckReport<f64>), CliError> {
    let s = cfg.scenario()?;
    let cc = cfg.cross_check(&s)?;
    let report = cross_check(&cc).map_err(classify)?;
    let mut t = Table::new(&[
        "criterion",
        "value",
        "reference",
        "deviation",
        "tolerance",
        "status",
    ]);
    for c in &report.checks {
        t.push(vec![
            c.name.into(),
            c.value.into(),
            c.reference.into(),
            c.deviation().into(),
            c.tolerance.into(),
            if c.pass { "PASS" } else { "FAIL" }.into(),
        ]);
    }
    t.meta("omega_d", report.omega_d);
    t.meta("occupation", report.occupation);
    t.meta("floquet_occupation", report.floquet_occupation);
    t.meta("relaxation", report.relaxation);
    t.meta("heat_a", report.heat_a);
    t.meta("heat_b", report.heat_b);
    t.meta("v_sigma_xp", report.v_sigma_xp);
    t.meta("work", report.work);
    t.meta("hot_occupation", report.hot_occupation);
    t.meta("hot_heat_a", report.hot_heat_a);
    t.meta("floquet_hot_heat_a", report.floquet_hot_heat_a);
    t.meta("floquet_conduction_a", report.floquet_conduction_a);
    t.meta("min_symplectic", report.min_symplectic);
    t.meta("recurrence_time", report.recurrence_time);
    Ok((t, report))
}
