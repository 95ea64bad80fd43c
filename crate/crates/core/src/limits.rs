//! Steady occupation of the motional mode, closed-form cooling limits and
//! drive-frequency optimization. Reservoir B is taken at zero temperature
//! throughout; finite-temperature balances go through [`crate::currents`].

use std::fmt;

use crate::error::{Error, Result};
use crate::floquet::{CoefficientProvider, ExactFloquet, GreenStatic, Perturbative};
use crate::model::{DrivePlan, Reservoirs, SpectralDensity, SystemParams};
use crate::optimize::{bisect, scan_minimize};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    SidebandResolved,
    Doppler,
    Intermediate,
    HalfFrequency,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SidebandResolved => "sideband_resolved",
            Regime::Doppler => "doppler",
            Regime::Intermediate => "intermediate",
            Regime::HalfFrequency => "half_frequency",
        })
    }
}

/// Which formula produced an occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    ExactFloquet,
    LeadingOrder,
    ClosedForm,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::ExactFloquet => "exact_floquet",
            Provenance::LeadingOrder => "leading_order",
            Provenance::ClosedForm => "closed_form",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingReport<R> {
    /// Steady occupation n̄; `+∞` when cooling is infeasible.
    pub occupancy: R,
    pub omega_d_optimal: R,
    pub regime: Regime,
    pub feasible: bool,
    pub provenance: Provenance,
    /// Closed-form optimal drive frequency of the regime, if the report came
    /// from a numerical search.
    pub analytic_omega_d: Option<R>,
    /// `analytic_omega_d` within 5% of `omega_d_optimal`.
    pub analytic_agrees: Option<bool>,
}

impl<R: Real> CoolingReport<R> {
    fn new(occupancy: R, omega_d: R, regime: Regime, provenance: Provenance) -> Self {
        let feasible = occupancy.is_finite();
        Self {
            occupancy: if feasible { occupancy } else { R::infinity() },
            omega_d_optimal: omega_d,
            regime,
            feasible,
            provenance,
            analytic_omega_d: None,
            analytic_agrees: None,
        }
    }
}

/// Thresholds: γ/ω_m < 0.2 resolved, > 5 Doppler; |ω_d − ω_m| < 0.05·ω_m
/// takes precedence as the half-frequency point.
pub fn classify_regime<R: Real>(sys: &SystemParams<R>, omega_m: R, omega_d: R) -> Regime {
    if ((omega_d - omega_m) / omega_m).abs() < R::of(0.05) {
        return Regime::HalfFrequency;
    }
    let r = sys.gamma / omega_m;
    if r < R::of(0.2) {
        Regime::SidebandResolved
    } else if r > R::of(5.0) {
        Regime::Doppler
    } else {
        Regime::Intermediate
    }
}

/// n̄ from 1/n̄; non-positive or undefined inverses mean no cooling.
fn occupancy_from_inverse<R: Real>(inv: R) -> R {
    if inv > R::zero() {
        R::one() / inv
    } else {
        R::infinity()
    }
}

/// Frequency of the motional mode carried by reservoir A.
pub fn motional_frequency<R: Real>(reservoirs: &Reservoirs<R>) -> Result<R> {
    match &reservoirs.a.density {
        SpectralDensity::DiracMode { frequency, .. } => Ok(*frequency),
        SpectralDensity::Lorentzian { center, .. } => Ok(*center),
        _ => Err(Error::Configuration(
            "occupation formulas need reservoir A to be a single (delta or Lorentzian) mode".into(),
        )),
    }
}

/// `(Σ_{k>0} I_B(kω_d+ω_m)|A_k(ω_m)|², Σ_{k>0} I_B(kω_d−ω_m)|A_{−k}(ω_m)|²)`;
/// pair terms whose photon frequency is not positive are dropped.
fn ratio_sums<R: Real, P: CoefficientProvider<R>>(
    provider: &P,
    reservoirs: &Reservoirs<R>,
) -> Result<(R, R)> {
    let wm = motional_frequency(reservoirs)?;
    let wd = provider.drive().omega_d;
    let ib = &reservoirs.b.density;
    let a = provider.coefficients(wm)?;
    let kk = provider.k_range();
    let mut num = R::zero();
    let mut den = R::zero();
    for k in 1..=kk {
        let kw = R::of_usize(k) * wd;
        num = num + ib.eval(kw + wm)? * a[kk + k].norm_sqr();
        let pair = kw - wm;
        if pair > R::zero() {
            den = den + ib.eval(pair)? * a[kk - k].norm_sqr();
        }
    }
    Ok((num, den))
}

/// Ratio of resonant-pumping to pair-creation currents at occupancy `n̄`.
/// Returns `+∞` when no pair channel is open.
pub fn rp_nrh_ratio<R: Real, P: CoefficientProvider<R>>(
    provider: &P,
    reservoirs: &Reservoirs<R>,
    occupancy: R,
) -> Result<R> {
    if !(occupancy >= R::zero()) {
        return Err(Error::Domain(format!(
            "occupancy must be >= 0, got {occupancy}"
        )));
    }
    if occupancy == R::zero() {
        return Ok(R::zero());
    }
    let prefactor = if occupancy.is_infinite() {
        R::one()
    } else {
        occupancy / (R::one() + occupancy)
    };
    let (num, den) = ratio_sums(provider, reservoirs)?;
    if den == R::zero() {
        return Ok(R::infinity());
    }
    Ok(prefactor * num / den)
}

/// Occupation at which pumping and pair creation balance; `+∞` when the
/// balance has no positive solution or no pair channel is open.
pub fn steady_occupation<R: Real, P: CoefficientProvider<R>>(
    provider: &P,
    reservoirs: &Reservoirs<R>,
) -> Result<R> {
    let (num, den) = ratio_sums(provider, reservoirs)?;
    if den == R::zero() {
        return Ok(R::infinity());
    }
    Ok(occupancy_from_inverse(num / den - R::one()))
}

/// First-order occupation from the static Green function alone.
///
/// When the first-order pair photon has no reservoir mode to go to
/// (ω_d ≤ ω_m or I_B(ω_d − ω_m) = 0), falls back to
/// [`half_frequency_limit`] if `v` is given and ω_d ≈ ω_m.
pub fn occupation_leading_order<R: Real>(
    sys: &SystemParams<R>,
    i_b: &SpectralDensity<R>,
    omega_m: R,
    omega_d: R,
    v: Option<R>,
) -> Result<R> {
    if !(omega_m > R::zero()) || !(omega_d > R::zero()) {
        return Err(Error::Domain("frequencies must be > 0".into()));
    }
    let green = GreenStatic::new(sys);
    let lower = omega_d - omega_m;
    let closed = lower <= R::zero() || i_b.eval(lower)? == R::zero();
    if closed {
        return match v {
            Some(v) if classify_regime(sys, omega_m, omega_d) == Regime::HalfFrequency => {
                Ok(half_frequency_limit(sys, i_b, omega_m, v)?.occupancy)
            }
            _ => Err(Error::OutOfRegime(format!(
                "no first-order pair channel at omega_d = {omega_d}, omega_m = {omega_m}"
            ))),
        };
    }
    let upper = omega_d + omega_m;
    let inv = i_b.eval(upper)? / i_b.eval(lower)? * green.norm_sqr(upper) / green.norm_sqr(lower)
        - R::one();
    Ok(occupancy_from_inverse(inv))
}

/// Closed-form limit for resolved sidebands (γ < ω_m).
pub fn sideband_limit<R: Real>(
    sys: &SystemParams<R>,
    i_b: &SpectralDensity<R>,
    omega_m: R,
) -> Result<CoolingReport<R>> {
    let (w0, g) = (sys.omega0, sys.gamma);
    if g >= omega_m {
        return Err(Error::OutOfRegime(format!(
            "gamma = {g} >= omega_m = {omega_m}: sidebands unresolved, use the Doppler limit"
        )));
    }
    let wd = sideband_optimal_drive(sys, omega_m);
    if !(wd > omega_m) {
        return Err(Error::OutOfRegime(format!(
            "omega_m = {omega_m} too large for a sideband drive"
        )));
    }
    let feasible = R::two() * omega_m * wd >= g * g;
    let n = if feasible {
        let lorentz =
            g * g * w0 * w0 / (R::of(4.0) * omega_m * omega_m * wd * wd + w0 * w0 * g * g);
        lorentz * i_b.eval(wd - omega_m)? / i_b.eval(wd + omega_m)?
    } else {
        R::infinity()
    };
    Ok(CoolingReport::new(
        n,
        wd,
        classify_regime(sys, omega_m, wd),
        Provenance::ClosedForm,
    ))
}

/// `sqrt(ω₀² − γ²) − ω_m`.
pub fn sideband_optimal_drive<R: Real>(sys: &SystemParams<R>, omega_m: R) -> R {
    (sys.omega0 * sys.omega0 - sys.gamma * sys.gamma).sqrt() - omega_m
}

/// First-order occupation with I_B(ω_d − ω_m) = I_B(ω_d + ω_m).
pub fn occupation_slow_sd<R: Real>(sys: &SystemParams<R>, omega_m: R, omega_d: R) -> Result<R> {
    if !(omega_m > R::zero()) || !(omega_d > R::zero()) {
        return Err(Error::Domain("frequencies must be > 0".into()));
    }
    let (w0, g) = (sys.omega0, sys.gamma);
    let margin = w0 * w0 - omega_m * omega_m - g * g - omega_d * omega_d;
    if margin <= R::zero() {
        return Ok(R::infinity());
    }
    let s = omega_d + omega_m;
    let num = ((s - w0) * (s - w0) + g * g) * ((s + w0) * (s + w0) + g * g);
    Ok(num / (R::of(8.0) * omega_d * omega_m * margin))
}

/// Closed-form limit for unresolved sidebands (γ > ω_m).
pub fn doppler_limit<R: Real>(sys: &SystemParams<R>, omega_m: R) -> Result<CoolingReport<R>> {
    let g = sys.gamma;
    if g <= omega_m {
        return Err(Error::OutOfRegime(format!(
            "gamma = {g} <= omega_m = {omega_m}: sidebands resolved, use the sideband limit"
        )));
    }
    let wd = sys.omega0 - g;
    let feasible = wd > R::zero() && R::two() * g * wd >= omega_m * omega_m;
    let n = if feasible {
        g / (R::two() * omega_m)
    } else {
        R::infinity()
    };
    Ok(CoolingReport::new(
        n,
        wd,
        classify_regime(sys, omega_m, wd),
        Provenance::ClosedForm,
    ))
}

/// `f = (1 − 2x)^κ / (1 − x)²` for x = ω_m/ω₀ in (0, ½).
pub fn enhancement_factor<R: Real>(kappa: R, x: R) -> R {
    (R::one() - R::two() * x).powf(kappa) / ((R::one() - x) * (R::one() - x))
}

/// Resolved-sideband limit for `I_B ∝ ω^κ` driven at ω₀ − ω_m.
pub fn structured_limit<R: Real>(sys: &SystemParams<R>, kappa: R, omega_m: R) -> Result<R> {
    if !(omega_m > R::zero()) {
        return Err(Error::Domain(format!("omega_m must be > 0, got {omega_m}")));
    }
    if omega_m >= sys.omega0 * R::half() {
        return Err(Error::OutOfRegime(
            "omega_m >= omega0/2: use the half-frequency limit".into(),
        ));
    }
    let r = sys.gamma / omega_m;
    Ok(R::of(0.25) * r * r * enhancement_factor(kappa, omega_m / sys.omega0))
}

/// Interval of ω_m/ω₀ on which the enhancement factor is below one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalBand<R> {
    pub lower: R,
    pub upper: R,
    /// Small-κ asymptote ½(1 − 2^{−2/κ}) of the lower edge.
    pub small_kappa_estimate: R,
}

pub fn critical_ratio<R: Real>(kappa: R) -> Result<CriticalBand<R>> {
    if !(kappa > R::zero()) || !kappa.is_finite() {
        return Err(Error::Domain(format!(
            "kappa must be finite and > 0, got {kappa}"
        )));
    }
    let half = R::half();
    let small_kappa_estimate = half * (R::one() - R::two().powf(-R::two() / kappa));
    if kappa >= R::one() {
        return Ok(CriticalBand {
            lower: R::zero(),
            upper: half,
            small_kappa_estimate,
        });
    }
    // f = 1 in log form with y = 1 − 2x, so edges near ½ stay resolvable
    let h = |t: R| kappa * t - R::two() * ((R::one() + t.exp()) * half).ln();
    let t_lo = R::min_positive_value().ln();
    let t_hi = (R::one() - R::of(2e-6)).ln();
    let lower = match bisect(h, t_lo, t_hi, 200) {
        Some(t) => half * (R::one() - t.exp()),
        None => small_kappa_estimate,
    };
    Ok(CriticalBand {
        lower,
        upper: half,
        small_kappa_estimate,
    })
}

/// Occupation at ω_d = ω_m, where pairs are created by absorbing two drive
/// quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfFrequencyLimit<R> {
    /// Second-order estimate
    /// `[I_B(ω_m)/I_B(2ω_m)]·V²|g(iω_m)|²|g(0)|²/|g(2iω_m)|²`.
    pub occupancy: R,
    /// `(γ²/ω_m²)·[I_B(ω_m)/I_B(2ω_m)]·64V²/(9ω_m⁴)`, the form quoted in the
    /// literature for ω₀ = 2ω_m.
    pub published: R,
}

pub fn half_frequency_limit<R: Real>(
    sys: &SystemParams<R>,
    i_b: &SpectralDensity<R>,
    omega_m: R,
    v: R,
) -> Result<HalfFrequencyLimit<R>> {
    if !(omega_m > R::zero()) {
        return Err(Error::Domain(format!("omega_m must be > 0, got {omega_m}")));
    }
    let green = GreenStatic::new(sys);
    let density_ratio = i_b.eval(omega_m)? / i_b.eval(R::two() * omega_m)?;
    let occupancy = density_ratio * v * v * green.norm_sqr(omega_m) * green.norm_sqr(R::zero())
        / green.norm_sqr(R::two() * omega_m);
    let r = sys.gamma / omega_m;
    let w4 = omega_m.powi(4);
    let published = r * r * density_ratio * R::of(64.0) * v * v / (R::of(9.0) * w4);
    Ok(HalfFrequencyLimit {
        occupancy,
        published,
    })
}

/// How Floquet coefficients are produced during a drive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientModel {
    Exact { k: usize },
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSearch<R> {
    pub lower: R,
    pub upper: R,
    pub model: CoefficientModel,
    pub scan_points: usize,
    pub rel_tol: R,
}

impl<R: Real> DriveSearch<R> {
    pub fn new(lower: R, upper: R) -> Self {
        Self {
            lower,
            upper,
            model: CoefficientModel::Exact { k: 4 },
            scan_points: 64,
            rel_tol: R::of(1e-6),
        }
    }

    /// `(ω₀/2, ω₀ + ω_m)`: drives near the carrier. Lower drive frequencies
    /// approach ω_m, where a density vanishing at zero frequency suppresses
    /// first-order pair creation and the occupancy collapses spuriously.
    pub fn near_carrier(sys: &SystemParams<R>, omega_m: R) -> Self {
        Self::new(sys.omega0 * R::half(), sys.omega0 + omega_m)
    }

    pub fn with_model(mut self, model: CoefficientModel) -> Self {
        self.model = model;
        self
    }
}

/// Steady occupation with the drive retuned to `omega_d`.
pub fn occupation_at<R: Real>(
    sys: &SystemParams<R>,
    drive: &DrivePlan<R>,
    reservoirs: &Reservoirs<R>,
    model: CoefficientModel,
    omega_d: R,
) -> Result<R> {
    let d = drive.with_frequency(omega_d)?;
    match model {
        CoefficientModel::Exact { k } => {
            steady_occupation(&ExactFloquet::new(sys, &d, k)?, reservoirs)
        }
        CoefficientModel::Perturbative => {
            steady_occupation(&Perturbative::new(sys, &d)?, reservoirs)
        }
    }
}

/// Closed-form optimal drive of the regime set by γ/ω_m.
pub fn analytic_optimum<R: Real>(sys: &SystemParams<R>, omega_m: R) -> R {
    if sys.gamma < omega_m {
        sideband_optimal_drive(sys, omega_m)
    } else {
        sys.omega0 - sys.gamma
    }
}

/// Minimizes [`steady_occupation`] over the drive frequency.
pub fn optimize_drive<R: Real>(
    sys: &SystemParams<R>,
    drive: &DrivePlan<R>,
    reservoirs: &Reservoirs<R>,
    search: &DriveSearch<R>,
) -> Result<CoolingReport<R>> {
    let wm = motional_frequency(reservoirs)?;
    if !(search.lower > R::zero()) || !(search.upper > search.lower) {
        return Err(Error::Configuration(format!(
            "invalid drive bracket ({}, {})",
            search.lower, search.upper
        )));
    }
    let (w0, g) = (sys.omega0, sys.gamma);
    let mut seeds = Vec::new();
    for centre in [
        sideband_optimal_drive(sys, wm),
        w0 - g,
        w0 - wm,
        w0 - (g * g + wm * wm).sqrt(),
    ] {
        for step in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            seeds.push(centre + R::of(step) * g);
        }
    }
    let mut failure = None;
    let objective = |wd: R| match occupation_at(sys, drive, reservoirs, search.model, wd) {
        Ok(n) => n,
        Err(e) => {
            failure.get_or_insert(e);
            R::infinity()
        }
    };
    let best = scan_minimize(
        objective,
        search.lower,
        search.upper,
        search.scan_points,
        &seeds,
        search.rel_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let provenance = match search.model {
        CoefficientModel::Exact { .. } => Provenance::ExactFloquet,
        CoefficientModel::Perturbative => Provenance::LeadingOrder,
    };
    let mut report = CoolingReport::new(
        best.value,
        best.x,
        classify_regime(sys, wm, best.x),
        provenance,
    );
    let analytic = analytic_optimum(sys, wm);
    report.analytic_omega_d = Some(analytic);
    report.analytic_agrees = Some(((analytic - best.x) / best.x).abs() <= R::of(0.05));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::solve_floquet;
    use crate::model::{Label, ReservoirSpec};
    use proptest::prelude::*;

    fn setup(gamma: f64, omega_m: f64) -> (SystemParams<f64>, Reservoirs<f64>) {
        let sys = SystemParams::new(1.0, gamma).unwrap();
        let a = ReservoirSpec::new(
            Label::A,
            SpectralDensity::dirac(1e-4, omega_m).unwrap(),
            0.0,
        )
        .unwrap();
        let b = ReservoirSpec::new(Label::B, sys.ohmic_density(50.0).unwrap(), 0.0).unwrap();
        (sys, Reservoirs::new(a, b).unwrap())
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ratio_limits_and_self_consistency() {
        let (sys, res) = setup(1e-3, 1e-2);
        let wd = sideband_optimal_drive(&sys, 1e-2);
        let drive = DrivePlan::harmonic(1.0, 1e-3, wd).unwrap();
        let p = ExactFloquet::new(&sys, &drive, 4).unwrap();
        assert_eq!(rp_nrh_ratio(&p, &res, 0.0).unwrap(), 0.0);
        let (num, den) = ratio_sums(&p, &res).unwrap();
        assert!(rel(rp_nrh_ratio(&p, &res, f64::INFINITY).unwrap(), num / den) < 1e-15);
        let n = steady_occupation(&p, &res).unwrap();
        assert!(n.is_finite() && n > 0.0);
        assert!((rp_nrh_ratio(&p, &res, n).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn far_detuned_drive_heats() {
        let (sys, res) = setup(1e-3, 1e-2);
        let drive = DrivePlan::harmonic(1.0, 1e-3, 1.0 + 1e-2).unwrap();
        let p = Perturbative::new(&sys, &drive).unwrap();
        assert!(steady_occupation(&p, &res).unwrap().is_infinite());
    }

    #[test]
    fn leading_order_matches_perturbative_ratio() {
        let (sys, res) = setup(1e-3, 2e-2);
        for wd in [0.5, 0.9, 0.97, 0.979, 0.99] {
            let drive = DrivePlan::harmonic(1.0, 1e-3, wd).unwrap();
            let p = Perturbative::new(&sys, &drive).unwrap();
            let n_ratio = steady_occupation(&p, &res).unwrap();
            let n_lo = occupation_leading_order(&sys, &res.b.density, 2e-2, wd, None).unwrap();
            assert!(rel(n_lo, n_ratio) < 1e-6, "{wd}: {n_lo} vs {n_ratio}");
        }
    }

    #[test]
    fn exact_floquet_reduces_to_leading_order() {
        let (sys, res) = setup(1e-5, 1e-3);
        let wd = sideband_optimal_drive(&sys, 1e-3);
        let drive = DrivePlan::harmonic(1.0, 1e-3, wd).unwrap();
        let exact = steady_occupation(&ExactFloquet::new(&sys, &drive, 4).unwrap(), &res).unwrap();
        let lo = occupation_leading_order(&sys, &res.b.density, 1e-3, wd, None).unwrap();
        assert!(rel(exact, lo) < 1e-2, "{exact} vs {lo}");
    }

    #[test]
    fn leading_order_sideband_benchmark() {
        let (sys, res) = setup(1e-5, 1e-3);
        let n = occupation_leading_order(&sys, &res.b.density, 1e-3, 1.0 - 1e-3, None).unwrap();
        assert!(rel(n, 2.5e-5) < 0.05, "{n}");
    }

    #[test]
    fn leading_order_without_pair_channel() {
        let (sys, res) = setup(1e-2, 0.5);
        let err = occupation_leading_order(&sys, &res.b.density, 0.5, 0.3, None);
        assert!(matches!(err, Err(Error::OutOfRegime(_))));
        let n = occupation_leading_order(&sys, &res.b.density, 0.5, 0.5, Some(1e-3)).unwrap();
        let hf = half_frequency_limit(&sys, &res.b.density, 0.5, 1e-3).unwrap();
        assert_eq!(n, hf.occupancy);
    }

    #[test]
    fn sideband_limit_values() {
        let (sys, res) = setup(1e-5, 1e-3);
        let r = sideband_limit(&sys, &res.b.density, 1e-3).unwrap();
        assert!(rel(r.occupancy, 2.5e-5) < 0.05);
        assert_eq!(r.regime, Regime::SidebandResolved);
        assert!(r.feasible);
        assert!((r.omega_d_optimal - ((1.0f64 - 1e-10).sqrt() - 1e-3)).abs() < 1e-15);

        let (tiny, res) = setup(1e-12, 1e-3);
        assert!(
            sideband_limit(&tiny, &res.b.density, 1e-3)
                .unwrap()
                .occupancy
                < 1e-15
        );

        let (wide, res) = setup(2e-3, 1e-3);
        assert!(matches!(
            sideband_limit(&wide, &res.b.density, 1e-3),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn sideband_limit_tracks_leading_order() {
        let wm = 1e-2;
        for ratio in [1e-3, 1e-2, 3e-2, 1e-1] {
            let (sys, res) = setup(ratio * wm, wm);
            let r = sideband_limit(&sys, &res.b.density, wm).unwrap();
            let lo = occupation_leading_order(&sys, &res.b.density, wm, r.omega_d_optimal, None)
                .unwrap();
            assert!(
                rel(r.occupancy, lo) < 0.02,
                "{ratio}: {} vs {lo}",
                r.occupancy
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sideband_limit_monotone(g in 1e-5f64..1e-3, wm in 2e-3f64..0.3, s in 1.001f64..1.5) {
            let sys = SystemParams::new(1.0, g).unwrap();
            let ib = sys.ohmic_density(50.0).unwrap();
            let base = sideband_limit(&sys, &ib, wm).unwrap().occupancy;
            let hotter = SystemParams::new(1.0, g * s).unwrap();
            prop_assert!(sideband_limit(&hotter, &ib, wm).unwrap().occupancy > base);
            if wm * s < 0.45 {
                prop_assert!(sideband_limit(&sys, &ib, wm * s).unwrap().occupancy < base);
            }
        }

        #[test]
        fn slow_sd_infeasible_exactly_outside_condition(
            g in 1e-4f64..0.1, wm in 1e-4f64..0.3, wd in 1e-3f64..1.5
        ) {
            let sys = SystemParams::new(1.0, g).unwrap();
            let n = occupation_slow_sd(&sys, wm, wd).unwrap();
            let allowed = 1.0 > wm * wm + g * g + wd * wd;
            prop_assert_eq!(n.is_finite(), allowed);
            prop_assert!(n >= 0.0);
        }

        #[test]
        fn occupancy_invariant_under_density_rescaling(wd in 0.6f64..1.0, scale in 1e-3f64..1e3) {
            let (sys, res) = setup(1e-3, 2e-2);
            let mut scaled = res.clone();
            scaled.b.density = res.b.density.scaled(scale);
            let drive = DrivePlan::harmonic(1.0, 1e-3, wd).unwrap();
            let p = ExactFloquet::new(&sys, &drive, 4).unwrap();
            let n1 = steady_occupation(&p, &res).unwrap();
            let n2 = steady_occupation(&p, &scaled).unwrap();
            prop_assert!(rel(n2, n1) < 1e-12);
        }
    }

    #[test]
    fn slow_sd_doppler_values() {
        let sys = SystemParams::new(1.0, 2e-2).unwrap();
        let n = occupation_slow_sd(&sys, 1e-3, 1.0 - 2e-2).unwrap();
        assert!(rel(n, 10.0) < 0.1, "{n}");
        let edge = (1.0f64 - 1e-6 - 4e-4).sqrt();
        assert!(occupation_slow_sd(&sys, 1e-3, edge * (1.0 + 1e-12))
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn doppler_limit_values() {
        let sys = SystemParams::new(1.0, 2e-2).unwrap();
        let r = doppler_limit(&sys, 1e-3).unwrap();
        assert_eq!(r.occupancy, 10.0);
        assert_eq!(r.regime, Regime::Doppler);
        assert!(r.feasible);
        assert!(matches!(
            doppler_limit(&sys, 0.05),
            Err(Error::OutOfRegime(_))
        ));

        // feasibility boundary 2γω_d = ω_m²
        let g: f64 = 0.8;
        let wm = (2.0 * g * (1.0 - g)).sqrt();
        let at = SystemParams::new(1.0, g).unwrap();
        assert!(doppler_limit(&at, wm * (1.0 - 1e-9)).unwrap().feasible);
        assert!(!doppler_limit(&at, wm * (1.0 + 1e-9)).unwrap().feasible);
    }

    #[test]
    fn slow_sd_minimum_sits_at_doppler_drive() {
        for (g, wm) in [(2e-2, 1e-3), (5e-2, 1e-3), (2e-2, 5e-4)] {
            let sys = SystemParams::new(1.0, g).unwrap();
            let m = scan_minimize(
                |wd| occupation_slow_sd(&sys, wm, wd).unwrap(),
                1e-3,
                1.0 + wm,
                64,
                &[],
                1e-6,
            );
            assert!(rel(m.x, 1.0 - g) < 0.05);
            assert!(rel(m.value, g / (2.0 * wm)) < 0.1, "{}", m.value);
        }
    }

    #[test]
    fn structured_enhancement() {
        let sys = SystemParams::new(1.0, 1e-4).unwrap();
        let plain = 0.25 * (1e-4f64 / 1e-3).powi(2);
        assert!(rel(structured_limit(&sys, 0.5, 1e-3).unwrap(), plain) < 2e-3);
        assert!((enhancement_factor(3.0, 0.3) - 0.4f64.powi(3) / 0.49).abs() < 1e-15);
        assert!((enhancement_factor(3.0f64, 0.3) - 0.1306).abs() < 1e-4);
        assert!(enhancement_factor(0.5, 0.47) < 1.0);
        assert!(enhancement_factor(0.5, 0.45) > 1.0);
        for kappa in [1.0, 1.5, 3.0] {
            for i in 1..1000 {
                let x = 0.5 * i as f64 / 1000.0;
                assert!(enhancement_factor(kappa, x) < 1.0);
            }
        }
        assert!(matches!(
            structured_limit(&sys, 1.0, 0.5),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn critical_band_edges() {
        let half = critical_ratio(0.5f64).unwrap();
        assert!((half.lower - 0.457).abs() < 2e-3, "{}", half.lower);
        assert_eq!(half.upper, 0.5);
        assert!((enhancement_factor(0.5, half.lower) - 1.0).abs() < 1e-12);

        let one = critical_ratio(1.0f64).unwrap();
        assert_eq!((one.lower, one.upper), (0.0, 0.5));

        let small = critical_ratio(0.1f64).unwrap();
        assert!((small.lower - small.small_kappa_estimate).abs() < 1e-6);
        assert!((small.small_kappa_estimate - 0.5 * (1.0 - 2f64.powi(-20))).abs() < 1e-15);

        assert!(matches!(critical_ratio(0.0f64), Err(Error::Domain(_))));
        assert!(matches!(critical_ratio(-1.0f64), Err(Error::Domain(_))));
    }

    #[test]
    fn half_frequency_estimate() {
        let (sys, res) = setup(1e-2, 0.5);
        let ib = &res.b.density;
        let a = half_frequency_limit(&sys, ib, 0.5, 1e-3).unwrap();
        let b = half_frequency_limit(&sys, ib, 0.5, 2e-3).unwrap();
        assert!(rel(b.occupancy / a.occupancy, 4.0) < 1e-12);
        assert!(rel(b.published / a.published, 4.0) < 1e-12);
        assert!(rel(ib.eval(0.5).unwrap() / ib.eval(1.0).unwrap(), 0.5) < 1e-15);
        assert!(half_frequency_limit(&sys, ib, 0.5, 0.0).unwrap().occupancy == 0.0);
    }

    #[test]
    fn half_frequency_estimate_against_exact_floquet() {
        let (sys, res) = setup(1e-2, 0.5);
        let drive = DrivePlan::harmonic(1.0, 1e-3, 0.5).unwrap();
        let sol = solve_floquet(&sys, &drive, &[0.5], 4).unwrap();
        let exact = steady_occupation(&sol.provider(), &res).unwrap();
        let est = half_frequency_limit(&sys, &res.b.density, 0.5, 1e-3).unwrap();
        let r = est.occupancy / exact;
        assert!(r > 0.5 && r < 2.0, "{r}");
        // the quoted closed form overshoots the solver by the stray factor 64
        assert!(rel(est.published / exact, 64.0) < 0.02);
    }

    #[test]
    fn optimizer_finds_sideband_drive() {
        let (sys, res) = setup(1e-5, 1e-3);
        let drive = DrivePlan::harmonic(1.0, 1e-3, 1.0).unwrap();
        let search = DriveSearch::near_carrier(&sys, 1e-3);
        let r = optimize_drive(&sys, &drive, &res, &search).unwrap();
        let target = sideband_optimal_drive(&sys, 1e-3);
        assert!(rel(r.omega_d_optimal, target) < 1e-3);
        assert!(rel(r.occupancy, 2.5e-5) < 0.05, "{}", r.occupancy);
        assert_eq!(r.provenance, Provenance::ExactFloquet);
        assert_eq!(r.analytic_agrees, Some(true));

        // no scan point beats the refined minimum
        for i in 1..=64 {
            let wd = search.lower + (search.upper - search.lower) * i as f64 / 65.0;
            let n = occupation_at(&sys, &drive, &res, search.model, wd).unwrap();
            assert!(n >= r.occupancy);
        }
    }

    #[test]
    fn optimizer_finds_doppler_drive() {
        let (sys, res) = setup(2e-2, 1e-3);
        let drive = DrivePlan::harmonic(1.0, 1e-3, 1.0).unwrap();
        let search = DriveSearch::near_carrier(&sys, 1e-3);
        let r = optimize_drive(&sys, &drive, &res, &search).unwrap();
        assert!(rel(r.omega_d_optimal, 1.0 - 2e-2) < 0.05);
        assert_eq!(r.regime, Regime::Doppler);
        assert_eq!(r.analytic_agrees, Some(true));
    }

    #[test]
    fn regime_thresholds() {
        let sys = SystemParams::new(1.0, 1e-3).unwrap();
        assert_eq!(classify_regime(&sys, 1e-2, 0.9), Regime::SidebandResolved);
        assert_eq!(classify_regime(&sys, 1e-3, 0.9), Regime::Intermediate);
        assert_eq!(classify_regime(&sys, 1e-4, 0.9), Regime::Doppler);
        assert_eq!(classify_regime(&sys, 0.5, 0.51), Regime::HalfFrequency);
    }
}
