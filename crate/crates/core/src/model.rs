//! Physical configuration: spectral densities, reservoirs, system parameters,
//! drive protocols and the elementary thermal and response kernels.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_sqrt_lower, integrate_to_infinity, QuadConfig};
use crate::scalar::{Cplx, Real};

/// Coupling profile I(ω) of a reservoir, defined for ω ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity<R> {
    /// `I(ω) = prefactor·(ω/reference)^exponent` on `[0, cutoff]`, zero above.
    PowerLaw {
        prefactor: R,
        exponent: R,
        reference: R,
        cutoff: R,
    },
    /// `I(ω) = weight·δ(ω − frequency)`; never sampled pointwise.
    DiracMode { weight: R, frequency: R },
    /// Lorentzian line of full width `width` and area `weight` at `center`,
    /// minus its mirror image at `−center`.
    Lorentzian { weight: R, center: R, width: R },
    /// Linear interpolation through sorted `(ω, I)` nodes, zero outside.
    Tabulated { points: Vec<(R, R)> },
}

impl<R: Real> SpectralDensity<R> {
    pub fn power_law(prefactor: R, exponent: R, reference: R, cutoff: R) -> Result<Self> {
        if !(prefactor >= R::zero()) || !prefactor.is_finite() {
            return Err(Error::Configuration(format!(
                "power-law prefactor {prefactor} must be >= 0"
            )));
        }
        if !exponent.is_finite() {
            return Err(Error::Configuration(
                "power-law exponent must be finite".into(),
            ));
        }
        if !(reference > R::zero()) || !reference.is_finite() {
            return Err(Error::Configuration(format!(
                "reference frequency {reference} must be > 0"
            )));
        }
        if !(cutoff > R::zero()) {
            return Err(Error::Configuration(format!("cutoff {cutoff} must be > 0")));
        }
        Ok(Self::PowerLaw {
            prefactor,
            exponent,
            reference,
            cutoff,
        })
    }

    /// Ohmic density whose dissipation kernel has real part `rate` at every
    /// in-band frequency: prefactor = 2·rate·reference/π.
    pub fn ohmic_with_rate(rate: R, reference: R, cutoff: R) -> Result<Self> {
        Self::power_law(
            R::two() * rate * reference / R::PI(),
            R::one(),
            reference,
            cutoff,
        )
    }

    pub fn dirac(weight: R, frequency: R) -> Result<Self> {
        if !(weight >= R::zero()) || !(frequency > R::zero()) {
            return Err(Error::Configuration(format!(
                "delta mode needs weight >= 0 and frequency > 0, got ({weight}, {frequency})"
            )));
        }
        Ok(Self::DiracMode { weight, frequency })
    }

    pub fn lorentzian(weight: R, center: R, width: R) -> Result<Self> {
        if !(weight >= R::zero()) || !(center > R::zero()) || !(width > R::zero()) {
            return Err(Error::Configuration(format!(
                "lorentzian needs weight >= 0, center > 0, width > 0, got ({weight}, {center}, {width})"
            )));
        }
        Ok(Self::Lorentzian {
            weight,
            center,
            width,
        })
    }

    pub fn tabulated(points: Vec<(R, R)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Configuration(
                "tabulated density needs at least two nodes".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Configuration(
                    "tabulated nodes must be strictly increasing".into(),
                ));
            }
        }
        if points
            .iter()
            .any(|&(x, y)| x < R::zero() || !(y >= R::zero()) || !y.is_finite())
        {
            return Err(Error::Configuration(
                "tabulated density needs non-negative frequencies and finite values >= 0".into(),
            ));
        }
        Ok(Self::Tabulated { points })
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Self::DiracMode { .. })
    }

    /// Same shape with every value multiplied by `factor`.
    pub fn scaled(&self, factor: R) -> Self {
        match self.clone() {
            Self::PowerLaw {
                prefactor,
                exponent,
                reference,
                cutoff,
            } => Self::PowerLaw {
                prefactor: prefactor * factor,
                exponent,
                reference,
                cutoff,
            },
            Self::DiracMode { weight, frequency } => Self::DiracMode {
                weight: weight * factor,
                frequency,
            },
            Self::Lorentzian {
                weight,
                center,
                width,
            } => Self::Lorentzian {
                weight: weight * factor,
                center,
                width,
            },
            Self::Tabulated { points } => Self::Tabulated {
                points: points.into_iter().map(|(x, y)| (x, y * factor)).collect(),
            },
        }
    }

    /// Largest frequency with non-zero weight, `None` if unbounded.
    pub fn support_end(&self) -> Option<R> {
        match self {
            Self::PowerLaw { cutoff, .. } => Some(*cutoff),
            Self::DiracMode { frequency, .. } => Some(*frequency),
            Self::Lorentzian { .. } => None,
            Self::Tabulated { points } => points.last().map(|p| p.0),
        }
    }

    /// Frequencies where the density has kinks or narrow structure.
    pub fn features(&self) -> Vec<R> {
        match self {
            Self::PowerLaw { cutoff, .. } => vec![*cutoff],
            Self::DiracMode { frequency, .. } => vec![*frequency],
            Self::Lorentzian { center, width, .. } => {
                let mut v = vec![*center];
                for m in [1.0, 10.0, 100.0, 1000.0] {
                    v.push(*center - *width * R::of(m));
                    v.push(*center + *width * R::of(m));
                }
                v.retain(|x| *x > R::zero());
                v
            }
            Self::Tabulated { points } => points.iter().map(|p| p.0).collect(),
        }
    }

    /// I(ω) for ω ≥ 0.
    pub fn eval(&self, omega: R) -> Result<R> {
        if !(omega >= R::zero()) {
            return Err(Error::Domain(format!(
                "spectral density evaluated at ω = {omega} < 0"
            )));
        }
        Ok(match self {
            Self::PowerLaw {
                prefactor,
                exponent,
                reference,
                cutoff,
            } => {
                if omega > *cutoff {
                    R::zero()
                } else if omega == R::zero() {
                    if *exponent > R::zero() {
                        R::zero()
                    } else if *exponent == R::zero() {
                        *prefactor
                    } else {
                        R::infinity()
                    }
                } else {
                    *prefactor * (omega / *reference).powf(*exponent)
                }
            }
            Self::DiracMode { .. } => return Err(Error::SymbolicDensity),
            Self::Lorentzian {
                weight,
                center,
                width,
            } => {
                // odd extension keeps I(0) = 0 and I(ω)/ω integrable
                let hw2 = *width * *width * R::of(0.25);
                let dm = omega - *center;
                let dp = omega + *center;
                let shape = R::one() / (dm * dm + hw2) - R::one() / (dp * dp + hw2);
                *weight * (*width / (R::two() * R::PI())) * shape
            }
            Self::Tabulated { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if omega < first.0 || omega > last.0 {
                    R::zero()
                } else {
                    let idx = points
                        .partition_point(|p| p.0 <= omega)
                        .clamp(1, points.len() - 1);
                    let (x0, y0) = points[idx - 1];
                    let (x1, y1) = points[idx];
                    y0 + (y1 - y0) * (omega - x0) / (x1 - x0)
                }
            }
        })
    }
}

/// Free-function form of [`SpectralDensity::eval`].
pub fn eval_spectral_density<R: Real>(sd: &SpectralDensity<R>, omega: R) -> Result<R> {
    sd.eval(omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub fn other(self) -> Self {
        match self {
            Label::A => Label::B,
            Label::B => Label::A,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::A => "A",
            Label::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpec<R> {
    pub label: Label,
    pub density: SpectralDensity<R>,
    pub temperature: R,
}

impl<R: Real> ReservoirSpec<R> {
    pub fn new(label: Label, density: SpectralDensity<R>, temperature: R) -> Result<Self> {
        if !(temperature >= R::zero()) || !temperature.is_finite() {
            return Err(Error::Configuration(format!(
                "temperature of reservoir {label} must be finite and >= 0, got {temperature}"
            )));
        }
        Ok(Self {
            label,
            density,
            temperature,
        })
    }

    pub fn occupation(&self, omega: R) -> Result<R> {
        planck_occupation(omega, self.temperature)
    }
}

/// The two reservoirs; holding them in named slots enforces one per label.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoirs<R> {
    pub a: ReservoirSpec<R>,
    pub b: ReservoirSpec<R>,
}

impl<R: Real> Reservoirs<R> {
    pub fn new(a: ReservoirSpec<R>, b: ReservoirSpec<R>) -> Result<Self> {
        if a.label != Label::A || b.label != Label::B {
            return Err(Error::Configuration(
                "reservoirs must be labelled A and B".into(),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn get(&self, label: Label) -> &ReservoirSpec<R> {
        match label {
            Label::A => &self.a,
            Label::B => &self.b,
        }
    }

    pub fn densities(&self) -> [&SpectralDensity<R>; 2] {
        [&self.a.density, &self.b.density]
    }
}

/// Renormalized frequency and amplitude decay rate of the central oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<R> {
    pub omega0: R,
    pub gamma: R,
}

impl<R: Real> SystemParams<R> {
    pub fn new(omega0: R, gamma: R) -> Result<Self> {
        if !(omega0 > R::zero()) || !omega0.is_finite() {
            return Err(Error::Configuration(format!(
                "omega0 must be > 0, got {omega0}"
            )));
        }
        if !(gamma > R::zero()) || !gamma.is_finite() {
            return Err(Error::Configuration(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        Ok(Self { omega0, gamma })
    }

    /// Static stiffness `V_R = ω₀² + γ²` implied by the adopted Green function.
    pub fn v_r(&self) -> R {
        self.omega0 * self.omega0 + self.gamma * self.gamma
    }

    pub fn underdamped(&self) -> bool {
        self.gamma < self.omega0
    }

    /// Ohmic density that by itself produces this decay rate (kernel = 2γ).
    pub fn ohmic_density(&self, cutoff: R) -> Result<SpectralDensity<R>> {
        SpectralDensity::ohmic_with_rate(R::two() * self.gamma, self.omega0, cutoff)
    }
}

/// Periodic modulation `V(t) = Σ_k V_k e^{ikω_d t}` of the stiffness.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivePlan<R> {
    components: BTreeMap<i64, Cplx<R>>,
    pub omega_d: R,
}

impl<R: Real> DrivePlan<R> {
    pub fn new(components: BTreeMap<i64, Cplx<R>>, omega_d: R) -> Result<Self> {
        if !(omega_d > R::zero()) || !omega_d.is_finite() {
            return Err(Error::Configuration(format!(
                "drive frequency must be > 0, got {omega_d}"
            )));
        }
        let scale = components
            .values()
            .map(|v| v.norm())
            .fold(R::zero(), R::max);
        let tol = scale * R::epsilon() * R::of(16.0);
        for (&k, v) in &components {
            let mirror = components.get(&-k).copied().unwrap_or_else(Cplx::zero);
            if (mirror - v.conj()).norm() > tol {
                return Err(Error::Configuration(format!(
                    "drive components are not Hermitian at k = {k}: V_-k must equal conj(V_k)"
                )));
            }
        }
        Ok(Self {
            components,
            omega_d,
        })
    }

    /// `V(t) = V₀ + V(e^{iω_d t} + e^{−iω_d t})`.
    pub fn harmonic(v0: R, v: R, omega_d: R) -> Result<Self> {
        let mut c = BTreeMap::new();
        c.insert(-1, Cplx::new(v, R::zero()));
        c.insert(0, Cplx::new(v0, R::zero()));
        c.insert(1, Cplx::new(v, R::zero()));
        Self::new(c, omega_d)
    }

    pub fn undriven(v0: R, omega_d: R) -> Result<Self> {
        Self::harmonic(v0, R::zero(), omega_d)
    }

    pub fn component(&self, k: i64) -> Cplx<R> {
        self.components.get(&k).copied().unwrap_or_else(Cplx::zero)
    }

    pub fn components(&self) -> &BTreeMap<i64, Cplx<R>> {
        &self.components
    }

    pub fn v0(&self) -> R {
        self.component(0).re
    }

    /// Largest |k| ≠ 0 with a non-zero component, 0 for an undriven plan.
    pub fn k_max(&self) -> usize {
        self.components
            .iter()
            .filter(|(k, v)| **k != 0 && !v.is_zero())
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Real amplitude V of a harmonic plan, `None` otherwise.
    pub fn harmonic_amplitude(&self) -> Option<R> {
        if self
            .components
            .iter()
            .any(|(k, v)| k.abs() > 1 && !v.is_zero())
        {
            return None;
        }
        let v = self.component(1);
        if v.im != R::zero() {
            return None;
        }
        Some(v.re)
    }

    /// True when |V|/V₀ is below `threshold`.
    pub fn is_perturbative(&self, threshold: R) -> bool {
        let v0 = self.v0().abs();
        let amp = self
            .components
            .iter()
            .filter(|(k, _)| **k != 0)
            .map(|(_, v)| v.norm())
            .fold(R::zero(), R::max);
        v0 > R::zero() && amp / v0 < threshold
    }

    /// Copy with every oscillating component multiplied by `lambda`.
    pub fn scaled(&self, lambda: R) -> Self {
        let components = self
            .components
            .iter()
            .map(|(&k, &v)| (k, if k == 0 { v } else { v * lambda }))
            .collect();
        Self {
            components,
            omega_d: self.omega_d,
        }
    }

    pub fn with_frequency(&self, omega_d: R) -> Result<Self> {
        Self::new(self.components.clone(), omega_d)
    }

    /// Reconstructs V(t); the imaginary part vanishes for a Hermitian plan.
    pub fn eval(&self, t: R) -> Cplx<R> {
        self.components.iter().fold(Cplx::zero(), |acc, (&k, &v)| {
            let phase = R::of_i64(k) * self.omega_d * t;
            acc + v * Cplx::new(phase.cos(), phase.sin())
        })
    }

    /// Time derivative of V(t), real part.
    pub fn eval_derivative(&self, t: R) -> R {
        self.components
            .iter()
            .fold(Cplx::zero(), |acc, (&k, &v)| {
                let w = R::of_i64(k) * self.omega_d;
                let phase = w * t;
                acc + v * Cplx::new(R::zero(), w) * Cplx::new(phase.cos(), phase.sin())
            })
            .re
    }
}

/// Bose–Einstein occupation `1/(e^{ω/T} − 1)`; zero at `T = 0`.
pub fn planck_occupation<R: Real>(omega: R, temperature: R) -> Result<R> {
    if !(omega > R::zero()) {
        return Err(Error::Domain(format!(
            "Planck factor needs ω > 0, got {omega}"
        )));
    }
    if !(temperature >= R::zero()) {
        return Err(Error::Domain(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    if temperature == R::zero() {
        return Ok(R::zero());
    }
    let x = omega / temperature;
    if x < R::of(1e-4) {
        // 1/x − 1/2 + x/12 − x³/720
        let x2 = x * x;
        return Ok(R::one() / x - R::half() + x / R::of(12.0) - x * x2 / R::of(720.0));
    }
    let d = x.exp_m1();
    Ok(if d.is_finite() {
        R::one() / d
    } else {
        R::zero()
    })
}

/// Laplace-domain dissipation kernel γ̂(iω) summed over `densities`.
pub fn dissipation_kernel_laplace<R: Real>(
    densities: &[&SpectralDensity<R>],
    omega: R,
    cfg: &QuadConfig<R>,
) -> Result<Cplx<R>> {
    let mut total = Cplx::zero();
    for sd in densities {
        total = total + kernel_single(sd, omega, cfg)?;
    }
    Ok(total)
}

fn kernel_single<R: Real>(
    sd: &SpectralDensity<R>,
    omega: R,
    cfg: &QuadConfig<R>,
) -> Result<Cplx<R>> {
    if !omega.is_finite() {
        return Err(Error::Domain("kernel frequency must be finite".into()));
    }
    if omega < R::zero() {
        return kernel_single(sd, -omega, cfg).map(|z| z.conj());
    }
    match sd {
        SpectralDensity::DiracMode { weight, frequency } => {
            let wm = *frequency;
            let den = wm * (wm * wm - omega * omega);
            if den == R::zero() {
                return Err(Error::Domain(
                    "kernel evaluated exactly on the delta-mode frequency".into(),
                ));
            }
            Ok(Cplx::new(R::zero(), omega * *weight / den))
        }
        SpectralDensity::PowerLaw {
            exponent,
            prefactor,
            ..
        } => {
            if !(*exponent > R::zero()) {
                return Err(Error::Configuration(format!(
                    "power-law exponent {exponent} gives a non-integrable kernel at the origin"
                )));
            }
            if *prefactor == R::zero() {
                return Ok(Cplx::zero());
            }
            kernel_evaluable(sd, omega, cfg)
        }
        _ => kernel_evaluable(sd, omega, cfg),
    }
}

fn kernel_evaluable<R: Real>(
    sd: &SpectralDensity<R>,
    omega: R,
    cfg: &QuadConfig<R>,
) -> Result<Cplx<R>> {
    let h = |w: R| -> R {
        if w <= R::zero() {
            return R::zero();
        }
        sd.eval(w).map(|i| i / w).unwrap_or(R::zero())
    };
    if omega == R::zero() {
        // Re part is the ω → 0 limit of (π/2)·I(ω)/ω, imaginary part vanishes
        let re = match sd {
            SpectralDensity::PowerLaw {
                prefactor,
                exponent,
                reference,
                ..
            } => {
                if *exponent > R::one() {
                    R::zero()
                } else if *exponent == R::one() {
                    R::PI() * R::half() * *prefactor / *reference
                } else {
                    return Err(Error::Domain("sub-ohmic kernel diverges at ω = 0".into()));
                }
            }
            _ => R::zero(),
        };
        return Ok(Cplx::new(re, R::zero()));
    }
    let re = R::PI() * R::half() * h(omega);
    let im = omega * pv_integral(sd, &h, omega, cfg)?;
    Ok(Cplx::new(re, im))
}

/// `PV ∫₀^∞ h(ω′)/(ω′² − ω²) dω′` with the pole folded symmetrically.
fn pv_integral<R: Real, H: Fn(R) -> R>(
    sd: &SpectralDensity<R>,
    h: &H,
    omega: R,
    cfg: &QuadConfig<R>,
) -> Result<R> {
    let end = sd.support_end();
    let mut feats = sd.features();
    let mut delta = omega * R::half();
    for f in &feats {
        let d = (*f - omega).abs();
        if d > R::zero() && d < delta {
            delta = d;
        }
    }
    if let SpectralDensity::Lorentzian { width, .. } = sd {
        delta = delta.min(*width);
    }
    if let Some(e) = end {
        let d = e - omega;
        if d > R::zero() {
            delta = delta.min(d);
        } else {
            // pole outside the support: ordinary integral
            feats.push(R::zero());
            let est = integrate_sqrt_lower(
                |w: R| h(w) / (w * w - omega * omega),
                R::zero(),
                e,
                &feats,
                cfg,
            );
            return est.into_result();
        }
    }
    let g = |w: R| h(w) / (w + omega);
    let lo = omega - delta;
    let hi = omega + delta;
    let fold = integrate(
        |u: R| {
            if u == R::zero() {
                return R::zero();
            }
            (g(omega + u) - g(omega - u)) / u
        },
        R::zero(),
        delta,
        &[],
        cfg,
    )
    .into_result()?;
    let left = integrate_sqrt_lower(
        |w: R| h(w) / (w * w - omega * omega),
        R::zero(),
        lo,
        &feats,
        cfg,
    )
    .into_result()?;
    let right = match end {
        Some(e) => {
            integrate(|w: R| h(w) / (w * w - omega * omega), hi, e, &feats, cfg).into_result()?
        }
        None => {
            let mid = feats.iter().copied().fold(hi * R::two(), R::max) * R::two();
            let near = integrate(|w: R| h(w) / (w * w - omega * omega), hi, mid, &feats, cfg)
                .into_result()?;
            let tail = integrate_to_infinity(|w: R| h(w) / (w * w - omega * omega), mid, mid, cfg)
                .into_result()?;
            near + tail
        }
    };
    Ok(left + fold + right)
}
