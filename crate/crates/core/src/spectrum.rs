//! Photon emission into reservoir B: the cooling line at ω_d + ω_m, the
//! heating line at ω_d − ω_m and the broad continuum of photon pairs created
//! directly by the drive. Also maps trapped-ion parameters onto the model.

use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::floquet::{CoefficientProvider, ExactFloquet, Perturbative};
use crate::limits::{motional_frequency, steady_occupation, CoefficientModel};
use crate::model::{DrivePlan, Label, ReservoirSpec, Reservoirs, SpectralDensity, SystemParams};
use crate::quadrature::{integrate, integrate_to_infinity, QuadConfig};
use crate::scalar::Real;

/// Inputs of the three emission channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumParams<R> {
    pub sys: SystemParams<R>,
    pub drive: DrivePlan<R>,
    pub omega_m: R,
    /// Area of the motional line in I_A.
    pub motional_weight: R,
    /// Full width Γ_m of the Lorentzian that replaces the motional delta.
    pub linewidth: R,
    pub i_b: SpectralDensity<R>,
    /// Motional occupation N_A, taken at the line centre.
    pub occupancy: R,
    pub model: CoefficientModel,
}

impl<R: Real> SpectrumParams<R> {
    /// A delta-mode reservoir A is smoothed to width 10⁻²·ω_m; a Lorentzian
    /// one keeps its own width.
    pub fn new(
        sys: &SystemParams<R>,
        drive: &DrivePlan<R>,
        reservoirs: &Reservoirs<R>,
        occupancy: R,
    ) -> Result<Self> {
        let (weight, width) = match &reservoirs.a.density {
            SpectralDensity::DiracMode { weight, frequency } => (*weight, *frequency * R::of(1e-2)),
            SpectralDensity::Lorentzian { weight, width, .. } => (*weight, *width),
            _ => {
                return Err(Error::Configuration(
                    "emission spectrum needs reservoir A to be a single motional mode".into(),
                ))
            }
        };
        if !(occupancy >= R::zero()) || !occupancy.is_finite() {
            return Err(Error::Domain(format!(
                "occupancy must be finite and >= 0, got {occupancy}"
            )));
        }
        Ok(Self {
            sys: *sys,
            drive: drive.clone(),
            omega_m: motional_frequency(reservoirs)?,
            motional_weight: weight,
            linewidth: width,
            i_b: reservoirs.b.density.clone(),
            occupancy,
            model: CoefficientModel::Perturbative,
        })
    }

    /// As [`SpectrumParams::new`] with N_A set to the steady occupation.
    pub fn at_steady_state(
        sys: &SystemParams<R>,
        drive: &DrivePlan<R>,
        reservoirs: &Reservoirs<R>,
    ) -> Result<Self> {
        let n = steady_occupation(&Perturbative::new(sys, drive)?, reservoirs)?;
        if !n.is_finite() {
            return Err(Error::OutOfRegime(
                "drive does not cool: no steady occupation".into(),
            ));
        }
        Self::new(sys, drive, reservoirs, n)
    }

    pub fn with_linewidth(mut self, width: R) -> Self {
        self.linewidth = width;
        self
    }

    pub fn with_model(mut self, model: CoefficientModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_occupancy(mut self, occupancy: R) -> Self {
        self.occupancy = occupancy;
        self
    }

    fn channels(&self) -> Result<Channels<'_, R>> {
        let coeffs: Box<dyn CoefficientProvider<R>> = match self.model {
            CoefficientModel::Perturbative => Box::new(Perturbative::new(&self.sys, &self.drive)?),
            CoefficientModel::Exact { k } => {
                Box::new(ExactFloquet::new(&self.sys, &self.drive, k)?)
            }
        };
        Ok(Channels {
            p: self,
            i_a: SpectralDensity::lorentzian(self.motional_weight, self.omega_m, self.linewidth)?,
            coeffs,
        })
    }
}

struct Channels<'a, R> {
    p: &'a SpectrumParams<R>,
    i_a: SpectralDensity<R>,
    coeffs: Box<dyn CoefficientProvider<R> + 'a>,
}

impl<R: Real> Channels<'_, R> {
    fn wd(&self) -> R {
        self.p.drive.omega_d
    }

    fn rp(&self, w: R) -> Result<R> {
        let wd = self.wd();
        if !(w > wd) {
            return Ok(R::zero());
        }
        self.rp_offset(w - wd)
    }

    /// f_RP at ω = ω_d + x; the narrow line is resolved in x without
    /// cancellation.
    fn rp_offset(&self, x: R) -> Result<R> {
        if !(x > R::zero()) {
            return Ok(R::zero());
        }
        let a1 = self.coeffs.coefficient(x, 1)?.norm_sqr();
        Ok(R::FRAC_PI_2()
            * self.p.i_b.eval(self.wd() + x)?
            * self.i_a.eval(x)?
            * a1
            * self.p.occupancy)
    }

    fn nrh(&self, w: R) -> Result<R> {
        let wd = self.wd();
        if !(w > R::zero() && w < wd) {
            return Ok(R::zero());
        }
        self.nrh_offset(wd - w)
    }

    /// f_NRH at ω = ω_d − y.
    fn nrh_offset(&self, y: R) -> Result<R> {
        let wd = self.wd();
        if !(y > R::zero() && y < wd) {
            return Ok(R::zero());
        }
        let w = wd - y;
        let am1 = self.coeffs.coefficient(w, -1)?.norm_sqr();
        Ok(R::FRAC_PI_2()
            * self.p.i_b.eval(w)?
            * self.i_a.eval(y)?
            * am1
            * (self.p.occupancy + R::one()))
    }

    fn pairs(&self, w: R) -> Result<R> {
        let wd = self.wd();
        if !(w > R::zero() && w < wd) {
            return Ok(R::zero());
        }
        let am1 = self.coeffs.coefficient(w, -1)?.norm_sqr();
        Ok(R::FRAC_PI_4() * self.p.i_b.eval(w)? * self.p.i_b.eval(wd - w)? * am1)
    }

    /// Resonances of the coefficients and of both densities inside `[lo, hi]`.
    fn breakpoints(&self, lo: R, hi: R) -> Vec<R> {
        let (w0, g, wd) = (self.p.sys.omega0, self.p.sys.gamma, self.wd());
        let (wm, gm) = (self.p.omega_m, self.p.linewidth);
        let mut pts = vec![wd * R::half()];
        for j in -2..=2 {
            for s in [w0, -w0] {
                let r = s + R::of_i64(j) * wd;
                pts.push(r);
                for m in [1.0, 10.0] {
                    pts.push(r - g * R::of(m));
                    pts.push(r + g * R::of(m));
                }
            }
        }
        for c in [wd + wm, wd - wm] {
            pts.push(c);
            for m in [0.5, 5.0, 50.0, 500.0] {
                pts.push(c - gm * R::of(m));
                pts.push(c + gm * R::of(m));
            }
        }
        pts.extend(self.p.i_b.features());
        let mirrored: Vec<R> = pts.iter().map(|&x| wd - x).collect();
        pts.extend(mirrored);
        pts.retain(|x| x.is_finite() && *x > lo && *x < hi);
        pts
    }
}

fn quad_config<R: Real>() -> QuadConfig<R> {
    QuadConfig::default().with_rel_tol(crate::scalar::tol_floor(1e-10, 100.0))
}

/// Runs a fallible integrand through an infallible integrator.
fn integrate_checked<R: Real>(
    f: impl Fn(R) -> Result<R>,
    run: impl FnOnce(&mut dyn FnMut(R) -> R) -> crate::quadrature::Estimate<R>,
) -> Result<R> {
    let failure = Mutex::new(None);
    let est = run(&mut |w| match f(w) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().expect("unpoisoned").get_or_insert(e);
            R::zero()
        }
    });
    if let Some(e) = failure.into_inner().expect("unpoisoned") {
        return Err(e);
    }
    est.into_result()
}

/// f_RP(ω): cooling-transition photons per unit time and frequency.
pub fn photon_rate_rp<R: Real>(params: &SpectrumParams<R>, omega: R) -> Result<R> {
    params.channels()?.rp(omega)
}

/// f_NRH(ω): heating-transition photons, paired with a phonon.
pub fn photon_rate_nrh<R: Real>(params: &SpectrumParams<R>, omega: R) -> Result<R> {
    params.channels()?.nrh(omega)
}

/// f′_NRH(ω): photons created in pairs directly from the drive.
pub fn photon_rate_pairs<R: Real>(params: &SpectrumParams<R>, omega: R) -> Result<R> {
    params.channels()?.pairs(omega)
}

/// Integrated photon rates `[RP, NRH, pairs]`.
fn channel_rates<R: Real>(ch: &Channels<'_, R>) -> Result<[R; 3]> {
    let cfg = quad_config();
    let (w0, wd, wm) = (ch.p.sys.omega0, ch.wd(), ch.p.omega_m);
    let reach = R::two() * w0 + R::of(4.0) * wm;
    let bp_rp: Vec<R> = ch
        .breakpoints(wd, wd + reach)
        .into_iter()
        .map(|b| b - wd)
        .collect();
    let rp_near = integrate_checked(
        |x| ch.rp_offset(x),
        |f| integrate(f, R::zero(), reach, &bp_rp, &cfg),
    )?;
    let tail_cfg = cfg.with_abs_tol(cfg.rel_tol * rp_near.abs());
    let rp_tail = integrate_checked(
        |x| ch.rp_offset(x),
        |f| integrate_to_infinity(f, reach, w0, &tail_cfg),
    )?;
    let bp = ch.breakpoints(R::zero(), wd);
    let bp_nrh: Vec<R> = bp.iter().map(|&b| wd - b).collect();
    let nrh = integrate_checked(
        |y| ch.nrh_offset(y),
        |f| integrate(f, R::zero(), wd, &bp_nrh, &cfg),
    )?;
    let pairs = integrate_checked(|w| ch.pairs(w), |f| integrate(f, R::zero(), wd, &bp, &cfg))?;
    Ok([rp_near + rp_tail, nrh, pairs])
}

/// Ratio of pair-continuum photons to heating-line photons, by quadrature.
pub fn casimir_ratio<R: Real>(params: &SpectrumParams<R>) -> Result<R> {
    let [_, nrh, pairs] = channel_rates(&params.channels()?)?;
    if nrh == R::zero() {
        return Err(Error::UndefinedRatio(
            "heating-line photon rate is zero".into(),
        ));
    }
    Ok(pairs / nrh)
}

/// `(1/4)(ω_m/ω₀)(Ĩ_B/Ĩ_A)γ` for a cubic I_B = Ĩ_B(ω/ω₀)³; `None` for other
/// densities.
pub fn casimir_ratio_closed_form<R: Real>(params: &SpectrumParams<R>) -> Option<R> {
    match params.i_b {
        SpectralDensity::PowerLaw {
            prefactor,
            exponent,
            reference,
            ..
        } if exponent == R::of(3.0) => {
            let w0 = params.sys.omega0;
            let ib_tilde = prefactor * (w0 / reference).powi(3);
            Some(
                R::of(0.25)
                    * (params.omega_m / w0)
                    * (ib_tilde / params.motional_weight)
                    * params.sys.gamma,
            )
        }
        _ => None,
    }
}

/// Grid layout for tabulated spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<R> {
    pub points: usize,
    /// Upper end; `None` means ω_d + 4ω_m.
    pub upper: Option<R>,
    /// Density multiplier near the two lines.
    pub refine: usize,
    /// Half-width of the refined windows in units of Γ_m.
    pub window: R,
}

impl<R: Real> Default for GridSpec<R> {
    fn default() -> Self {
        Self {
            points: 4001,
            upper: None,
            refine: 16,
            window: R::of(5.0),
        }
    }
}

impl<R: Real> GridSpec<R> {
    /// Uniform base grid plus windows around ω_d ± ω_m whose spacing is
    /// `min(base, Γ_m)/refine`.
    pub fn build(&self, omega_d: R, omega_m: R, linewidth: R) -> Result<Vec<R>> {
        if self.points < 2 || self.refine == 0 {
            return Err(Error::Configuration(
                "grid needs >= 2 points and refine >= 1".into(),
            ));
        }
        let hi = self.upper.unwrap_or(omega_d + R::of(4.0) * omega_m);
        if !(hi > R::zero()) {
            return Err(Error::Configuration(format!(
                "grid upper end {hi} must be > 0"
            )));
        }
        let n = self.points - 1;
        let base = hi / R::of_usize(n);
        let mut grid: Vec<R> = (0..=n)
            .map(|i| hi * R::of_usize(i) / R::of_usize(n))
            .collect();
        let fine = base.min(linewidth) / R::of_usize(self.refine);
        let half = self.window * linewidth;
        let steps = (R::two() * half / fine).ceil().to_usize().unwrap_or(0);
        for c in [omega_d - omega_m, omega_d + omega_m] {
            let start = c - half;
            for i in 0..=steps {
                let w = start + fine * R::of_usize(i);
                if w > R::zero() && w < hi {
                    grid.push(w);
                }
            }
        }
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        grid.dedup();
        Ok(grid)
    }
}

/// Tabulated emission spectrum and its integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable<R> {
    pub grid: Vec<R>,
    pub f_rp: Vec<R>,
    pub f_nrh: Vec<R>,
    pub f_pairs: Vec<R>,
    /// Integrated photon rates by adaptive quadrature.
    pub rate_rp: R,
    pub rate_nrh: R,
    pub rate_pairs: R,
    pub linewidth: R,
    pub omega_d: R,
    pub omega_m: R,
    pub occupancy: R,
    /// Pair photons per heating-line photon; `None` when the heating line is
    /// empty.
    pub casimir_ratio: Option<R>,
    pub casimir_closed_form: Option<R>,
}

impl<R: Real> SpectrumTable<R> {
    /// Trapezoid integrals of the tabulated densities, `[RP, NRH, pairs]`.
    pub fn grid_rates(&self) -> [R; 3] {
        let trap = |f: &[R]| -> R {
            self.grid
                .windows(2)
                .zip(f.windows(2))
                .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * R::half())
                .sum()
        };
        [trap(&self.f_rp), trap(&self.f_nrh), trap(&self.f_pairs)]
    }

    /// Total emitted power density ω·(f_RP + f_NRH + f′_NRH) at grid point `i`.
    pub fn power_density(&self, i: usize) -> R {
        self.grid[i] * (self.f_rp[i] + self.f_nrh[i] + self.f_pairs[i])
    }
}

pub fn build_spectrum<R: Real>(
    params: &SpectrumParams<R>,
    grid: &GridSpec<R>,
) -> Result<SpectrumTable<R>> {
    let ch = params.channels()?;
    let wd = params.drive.omega_d;
    let nodes = grid.build(wd, params.omega_m, params.linewidth)?;
    let rows: Vec<Result<[R; 3]>> = nodes
        .par_iter()
        .map(|&w| Ok([ch.rp(w)?, ch.nrh(w)?, ch.pairs(w)?]))
        .collect();
    let mut f_rp = Vec::with_capacity(nodes.len());
    let mut f_nrh = Vec::with_capacity(nodes.len());
    let mut f_pairs = Vec::with_capacity(nodes.len());
    for r in rows {
        let [a, b, c] = r?;
        f_rp.push(a);
        f_nrh.push(b);
        f_pairs.push(c);
    }
    let [rate_rp, rate_nrh, rate_pairs] = channel_rates(&ch)?;
    Ok(SpectrumTable {
        grid: nodes,
        f_rp,
        f_nrh,
        f_pairs,
        rate_rp,
        rate_nrh,
        rate_pairs,
        linewidth: params.linewidth,
        omega_d: wd,
        omega_m: params.omega_m,
        occupancy: params.occupancy,
        casimir_ratio: (rate_nrh > R::zero()).then(|| rate_pairs / rate_nrh),
        casimir_closed_form: casimir_ratio_closed_form(params),
    })
}

/// Trapped-ion parameters, all frequencies angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonPreset<R> {
    pub omega_m: R,
    pub omega0: R,
    pub gamma: R,
    pub rabi: R,
    pub lamb_dicke: R,
}

impl<R: Real> IonPreset<R> {
    /// ⁴⁰Ca⁺ cooled on the 397 nm S₁/₂ → P₁/₂ line.
    pub fn calcium() -> Self {
        let tau = R::two() * R::PI();
        Self {
            omega_m: tau * R::of(5e6),
            omega0: tau * R::of(755e12),
            gamma: tau * R::of(20e6),
            rabi: tau * R::of(1e6),
            lamb_dicke: R::of(0.078),
        }
    }
}

/// Ion parameters in model units (ω₀ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct IonModel<R> {
    pub sys: SystemParams<R>,
    pub omega_m: R,
    /// Doppler drive ω₀ − γ.
    pub omega_d: R,
    pub drive_amplitude: R,
    /// Ĩ_A, area of the motional line.
    pub i_a_weight: R,
    /// `I_B(ω) = Ĩ_B(ω/ω₀)³` with Ĩ_B fixed by the decay rate γ.
    pub i_b: SpectralDensity<R>,
    /// Ĩ_B/Ĩ_A = γ/(Ω²η²) in seconds.
    pub density_ratio: R,
    /// Seconds per model time unit, 1/ω₀.
    pub time_unit: R,
}

impl<R: Real> IonModel<R> {
    pub fn drive(&self) -> Result<DrivePlan<R>> {
        DrivePlan::harmonic(R::one(), self.drive_amplitude, self.omega_d)
    }

    pub fn reservoirs(&self) -> Result<Reservoirs<R>> {
        Reservoirs::new(
            ReservoirSpec::new(
                Label::A,
                SpectralDensity::dirac(self.i_a_weight, self.omega_m)?,
                R::zero(),
            )?,
            ReservoirSpec::new(Label::B, self.i_b.clone(), R::zero())?,
        )
    }

    /// Emission parameters at the steady occupation of this ion.
    pub fn spectrum_params(&self) -> Result<SpectrumParams<R>> {
        SpectrumParams::at_steady_state(&self.sys, &self.drive()?, &self.reservoirs()?)
    }

    /// Converts a model rate to events per second.
    pub fn per_second(&self, rate: R) -> R {
        rate / self.time_unit
    }
}

/// Maps ion parameters onto the two-reservoir model with ω₀ = 1.
///
/// Ĩ_B = 4γω₀/π reproduces the decay rate γ; Ĩ_A = (4/π)η²Ω² keeps
/// Ĩ_B/Ĩ_A = γ/(Ω²η²); the drive amplitude V = (√π/2)ω₀² makes the
/// first-order sideband rates equal η²Ω²Γ/(4Δ² + Γ²) with Γ = 2γ. Only
/// first-order coefficients are meaningful for this mapping.
pub fn ion_mapping<R: Real>(preset: &IonPreset<R>) -> Result<IonModel<R>> {
    let p = preset;
    for (name, v) in [
        ("omega_m", p.omega_m),
        ("omega0", p.omega0),
        ("gamma", p.gamma),
        ("rabi", p.rabi),
        ("lamb_dicke", p.lamb_dicke),
    ] {
        if !(v > R::zero()) || !v.is_finite() {
            return Err(Error::Configuration(format!(
                "ion parameter {name} must be > 0, got {v}"
            )));
        }
    }
    if p.lamb_dicke >= R::one() {
        log::warn!(
            "Lamb-Dicke parameter {} >= 1: ion mapping unreliable",
            p.lamb_dicke
        );
    }
    let w0 = p.omega0;
    let gamma = p.gamma / w0;
    let rabi = p.rabi / w0;
    let sys = SystemParams::new(R::one(), gamma)?;
    let four_over_pi = R::of(4.0) / R::PI();
    let i_b = SpectralDensity::power_law(four_over_pi * gamma, R::of(3.0), R::one(), R::of(1e3))?;
    Ok(IonModel {
        sys,
        omega_m: p.omega_m / w0,
        omega_d: R::one() - gamma,
        drive_amplitude: R::PI().sqrt() * R::half(),
        i_a_weight: four_over_pi * p.lamb_dicke * p.lamb_dicke * rabi * rabi,
        i_b,
        density_ratio: p.gamma / (p.rabi * p.rabi * p.lamb_dicke * p.lamb_dicke),
        time_unit: R::one() / w0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{sideband_optimal_drive, steady_occupation};
    use proptest::prelude::*;

    /// ω_m = 0.1, γ = 10⁻², ω_d = ω₀ − ω_m, I_B ∝ ω³.
    fn figure(v: f64, width_ratio: f64) -> SpectrumParams<f64> {
        let sys = SystemParams::new(1.0, 1e-2).unwrap();
        let drive = DrivePlan::harmonic(1.0, v, 0.9).unwrap();
        let ib = SpectralDensity::power_law(4e-2 / std::f64::consts::PI, 3.0, 1.0, 1e3).unwrap();
        let res = Reservoirs::new(
            ReservoirSpec::new(Label::A, SpectralDensity::dirac(1e-3, 0.1).unwrap(), 0.0).unwrap(),
            ReservoirSpec::new(Label::B, ib, 0.0).unwrap(),
        )
        .unwrap();
        SpectrumParams::at_steady_state(&sys, &drive, &res)
            .unwrap()
            .with_linewidth(width_ratio * 0.1)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_occupancy_silences_cooling_line_only() {
        let p = figure(1e-3, 1e-2).with_occupancy(0.0);
        assert_eq!(photon_rate_rp(&p, 1.0).unwrap(), 0.0);
        assert!(photon_rate_nrh(&p, 0.8).unwrap() > 0.0);
        assert_eq!(photon_rate_rp(&p, 0.5).unwrap(), 0.0);
        assert_eq!(photon_rate_nrh(&p, 0.95).unwrap(), 0.0);
    }

    #[test]
    fn cooling_rate_linear_in_occupancy() {
        let p = figure(1e-3, 1e-2);
        let r1 = channel_rates(&p.clone().with_occupancy(0.5).channels().unwrap()).unwrap()[0];
        let r2 = channel_rates(&p.with_occupancy(1.5).channels().unwrap()).unwrap()[0];
        assert!(rel(r2, 3.0 * r1) < 1e-12);
    }

    #[test]
    fn undriven_spectrum_is_empty() {
        let p = figure(1e-3, 1e-2);
        let mut q = p.clone().with_occupancy(0.0);
        q.drive = DrivePlan::undriven(1.0, 0.9).unwrap();
        let t = build_spectrum(&q, &GridSpec::default()).unwrap();
        assert!(t
            .f_rp
            .iter()
            .chain(&t.f_nrh)
            .chain(&t.f_pairs)
            .all(|&x| x == 0.0));
        assert_eq!(t.casimir_ratio, None);
        assert!(matches!(casimir_ratio(&q), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn figure_spectrum_has_two_lines_over_pair_floor() {
        let p = figure(1e-3, 1e-2);
        let t = build_spectrum(&p, &GridSpec::default()).unwrap();
        let n = t.grid.len();
        assert!(n > 4001);
        for i in 0..n {
            assert!(t.f_rp[i] >= 0.0 && t.f_nrh[i] >= 0.0 && t.f_pairs[i] >= 0.0);
        }
        let argmax = |f: &[f64]| {
            (0..n)
                .max_by(|&i, &j| f[i].partial_cmp(&f[j]).unwrap())
                .unwrap()
        };
        let i_rp = argmax(&t.f_rp);
        let i_nrh = argmax(&t.f_nrh);
        assert!((t.grid[i_rp] - 1.0).abs() < p.linewidth);
        assert!((t.grid[i_nrh] - 0.8).abs() < p.linewidth);
        assert!(t.f_rp[i_rp] > 1e3 * t.f_pairs[i_rp].max(t.f_pairs[i_nrh]));
        assert!(t.f_nrh[i_nrh] > 1e3 * t.f_pairs[i_nrh]);
        // pair floor is broad: non-zero across the whole band below ω_d
        assert!(t
            .grid
            .iter()
            .zip(&t.f_pairs)
            .filter(|(w, _)| **w > 0.01 && **w < 0.89)
            .all(|(_, f)| *f > 0.0));
    }

    #[test]
    fn grid_refinement_converges() {
        let p = figure(1e-3, 1e-2);
        let coarse = build_spectrum(&p, &GridSpec::default())
            .unwrap()
            .grid_rates();
        let fine = build_spectrum(
            &p,
            &GridSpec {
                points: 8001,
                ..GridSpec::default()
            },
        )
        .unwrap();
        let fr = fine.grid_rates();
        for c in 0..3 {
            assert!(
                rel(coarse[c], fr[c]) < 5e-3,
                "channel {c}: {} vs {}",
                coarse[c],
                fr[c]
            );
        }
        // the grid integral tracks the quadrature value
        assert!(rel(fr[2], fine.rate_pairs) < 5e-3);
    }

    #[test]
    fn lines_balance_at_steady_occupation() {
        // narrow motional line so the smoothing error O(Γ_m/γ) stays small
        let p = figure(1e-3, 1e-4);
        let ch = p.channels().unwrap();
        let [rp, nrh, _] = channel_rates(&ch).unwrap();
        assert!(rel(rp, nrh) < 0.02, "{rp} vs {nrh}");
    }

    #[test]
    fn line_deficit_is_the_smoothing_convolution() {
        // the cooling line sits on the system resonance, so a Lorentzian of
        // full width Γ_m lowers it by Γ_m/(2γ + Γ_m)
        for ratio in [1e-2, 1e-3] {
            let p = figure(1e-3, ratio);
            let [rp, nrh, _] = channel_rates(&p.channels().unwrap()).unwrap();
            let w = ratio * 0.1;
            let expected = w / (2.0 * 1e-2 + w);
            assert!(
                rel(1.0 - rp / nrh, expected) < 0.05,
                "{ratio}: {rp} vs {nrh}"
            );
        }
    }

    #[test]
    fn pair_continuum_symmetry_and_mean() {
        let p = figure(1e-3, 1e-2);
        let ch = p.channels().unwrap();
        let cfg = quad_config();
        let bp = ch.breakpoints(0.0, 0.9);
        let total = integrate(|w| ch.pairs(w).unwrap(), 0.0, 0.9, &bp, &cfg).value;
        let first = integrate(|w| w * ch.pairs(w).unwrap(), 0.0, 0.9, &bp, &cfg).value;
        assert!(((first / total) - 0.45).abs() / 0.45 < 1e-8);
    }

    proptest! {
        #[test]
        fn pair_density_reflects(u in 1e-4f64..0.9999) {
            let p = figure(1e-3, 1e-2);
            let w = 0.9 * u;
            let a = photon_rate_pairs(&p, w).unwrap();
            let b = photon_rate_pairs(&p, 0.9 - w).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn pair_continuum_vanishes_without_drive() {
        let mut p = figure(1e-3, 1e-2);
        p.drive = DrivePlan::harmonic(1.0, 0.0, 0.9).unwrap();
        assert_eq!(photon_rate_pairs(&p, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn casimir_ratio_scales_with_ib() {
        let p = figure(1e-3, 1e-2);
        let mut q = p.clone();
        q.i_b = p.i_b.scaled(2.0);
        let r1 = casimir_ratio(&p).unwrap();
        let r2 = casimir_ratio(&q).unwrap();
        assert!(rel(r2, 2.0 * r1) < 1e-8);
        let c1 = casimir_ratio_closed_form(&p).unwrap();
        let c2 = casimir_ratio_closed_form(&q).unwrap();
        assert!(rel(c2, 2.0 * c1) < 1e-15);
    }

    #[test]
    fn ion_mapping_ratio() {
        let preset = IonPreset::<f64>::calcium();
        let m = ion_mapping(&preset).unwrap();
        let expected = preset.gamma / (preset.rabi * preset.rabi * 0.078 * 0.078);
        assert!(rel(m.density_ratio, expected) < 1e-15);
        // the same ratio in model units, from the mapped densities
        let ib_tilde = match m.i_b {
            SpectralDensity::PowerLaw { prefactor, .. } => prefactor,
            _ => unreachable!(),
        };
        assert!(rel(ib_tilde / m.i_a_weight, expected * preset.omega0) < 1e-12);

        let weak = IonPreset {
            lamb_dicke: 1e-9,
            ..preset
        };
        assert!(ion_mapping(&weak).unwrap().density_ratio > 1e10);
    }

    #[test]
    fn calcium_rates() {
        let m = ion_mapping(&IonPreset::<f64>::calcium()).unwrap();
        let p = m.spectrum_params().unwrap();
        let ch = p.channels().unwrap();
        let [rp, nrh, pairs] = channel_rates(&ch).unwrap();
        let transitions = m.per_second(rp + nrh);
        let pair_rate = m.per_second(pairs);
        let r = pairs / nrh;
        let closed = casimir_ratio_closed_form(&p).unwrap();
        assert!(transitions > 1.5e3 && transitions < 6e3, "{transitions}");
        assert!(pair_rate < 1.0, "{pair_rate}");
        assert!(r > 0.3e-4 && r < 3e-4, "{r}");
        assert!(r / closed > 0.5 && r / closed < 2.0, "{r} vs {closed}");
    }

    #[test]
    fn steady_occupation_consistent_with_sideband_drive() {
        let p = figure(1e-3, 1e-2);
        assert!(rel(p.drive.omega_d, sideband_optimal_drive(&p.sys, 0.1)) < 1e-3);
        let res = Reservoirs::new(
            ReservoirSpec::new(Label::A, SpectralDensity::dirac(1e-3, 0.1).unwrap(), 0.0).unwrap(),
            ReservoirSpec::new(Label::B, p.i_b.clone(), 0.0).unwrap(),
        )
        .unwrap();
        let n = steady_occupation(&Perturbative::new(&p.sys, &p.drive).unwrap(), &res).unwrap();
        assert_eq!(n, p.occupancy);
    }
}
