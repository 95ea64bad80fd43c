//! Adaptive Gauss–Kronrod (7/15) quadrature with user breakpoints.
//!
//! Panels are refined by bisecting the one with the largest error estimate.
//! The final value is summed over panels in left-to-right order so that the
//! result does not depend on the refinement history beyond the panel set.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig<R> {
    pub rel_tol: R,
    pub abs_tol: R,
    /// Absolute floor relative to ∫|f|, for integrals that cancel.
    pub l1_tol: R,
    pub max_panels: usize,
}

impl<R: Real> Default for QuadConfig<R> {
    fn default() -> Self {
        Self {
            rel_tol: crate::scalar::tol_floor(1e-8, 50.0),
            abs_tol: R::of(1e-300).max(R::min_positive_value()),
            l1_tol: R::zero(),
            max_panels: 4000,
        }
    }
}

impl<R: Real> QuadConfig<R> {
    pub fn with_rel_tol(mut self, tol: R) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_abs_tol(mut self, tol: R) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_l1_tol(mut self, tol: R) -> Self {
        self.l1_tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<R> {
    pub value: R,
    pub error: R,
    pub evaluations: usize,
    pub converged: bool,
}

impl<R: Real> Estimate<R> {
    /// Converts a non-converged estimate into an accuracy error.
    pub fn into_result(self) -> Result<R> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Accuracy {
                estimate: self.value.as_f64(),
                error_bound: self.error.as_f64(),
            })
        }
    }

    pub fn zero() -> Self {
        Self {
            value: R::zero(),
            error: R::zero(),
            evaluations: 0,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<R> {
    a: R,
    b: R,
    value: R,
    error: R,
    l1: R,
}

fn gk15<R: Real, F: FnMut(R) -> R>(f: &mut F, a: R, b: R) -> Panel<R> {
    let center = (a + b) * R::half();
    let half = (b - a) * R::half();
    let fc = f(center);
    let mut kronrod = fc * R::of(WGK[7]);
    let mut gauss = fc * R::of(WG[3]);
    let mut abs_k = kronrod.abs();
    let mut fv = [R::zero(); 14];
    for j in 0..7 {
        let dx = half * R::of(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod = kronrod + R::of(WGK[j]) * (f1 + f2);
        abs_k = abs_k + R::of(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss = gauss + R::of(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = kronrod * R::half();
    let mut asc = R::of(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        asc = asc + R::of(WGK[j]) * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_k * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != R::zero() && error != R::zero() {
        let scale = (R::of(200.0) * error / res_asc).powf(R::of(1.5));
        error = res_asc * scale.min(R::one());
    }
    let round = R::of(50.0) * R::epsilon() * res_abs;
    if res_abs > R::min_positive_value() / (R::of(50.0) * R::epsilon()) && round > error {
        error = round;
    }
    Panel {
        a,
        b,
        value,
        error,
        l1: res_abs,
    }
}

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint strictly
/// inside the interval.
pub fn integrate<R, F>(mut f: F, a: R, b: R, breakpoints: &[R], cfg: &QuadConfig<R>) -> Estimate<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    if a == b {
        return Estimate::zero();
    }
    if b < a {
        let mut e = integrate(f, b, a, breakpoints, cfg);
        e.value = -e.value;
        return e;
    }
    let mut cuts: Vec<R> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut panels: Vec<Panel<R>> = edges.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    let mut evaluations = 15 * panels.len();
    let max_panels = cfg.max_panels.max(panels.len() + 1);

    loop {
        let total: R = panels.iter().map(|p| p.value).sum();
        let err: R = panels.iter().map(|p| p.error).sum();
        let l1: R = panels.iter().map(|p| p.l1).sum();
        let target = cfg
            .abs_tol
            .max(cfg.rel_tol * total.abs())
            .max(cfg.l1_tol * l1);
        if err <= target {
            return finish(panels, evaluations, true);
        }
        if panels.len() >= max_panels {
            return finish(panels, evaluations, false);
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, R::neg_infinity()), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let worst = panels[idx];
        let mid = (worst.a + worst.b) * R::half();
        if !(mid > worst.a && mid < worst.b) {
            // panel cannot be split further in this precision
            return finish(panels, evaluations, false);
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        panels[idx] = left;
        panels.push(right);
    }
}

fn finish<R: Real>(mut panels: Vec<Panel<R>>, evaluations: usize, converged: bool) -> Estimate<R> {
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).expect("finite panel edges"));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Estimate {
        value,
        error,
        evaluations,
        converged,
    }
}

/// Integrates over `[a, b]` with the substitution `x = a + u²`, which removes
/// an integrable `(x - a)^(-1/2)`-type singularity at the lower endpoint.
pub fn integrate_sqrt_lower<R, F>(
    mut f: F,
    a: R,
    b: R,
    breakpoints: &[R],
    cfg: &QuadConfig<R>,
) -> Estimate<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    if b <= a {
        return integrate(f, a, b, breakpoints, cfg);
    }
    let ub = (b - a).sqrt();
    let mapped: Vec<R> = breakpoints
        .iter()
        .filter(|&&x| x > a && x < b)
        .map(|&x| (x - a).sqrt())
        .collect();
    integrate(
        |u: R| {
            let x = a + u * u;
            R::two() * u * f(x)
        },
        R::zero(),
        ub,
        &mapped,
        cfg,
    )
}

/// Integrates over `[a, ∞)` by mapping `x = a + s·t/(1-t)`, `t ∈ [0, 1)`.
pub fn integrate_to_infinity<R, F>(mut f: F, a: R, scale: R, cfg: &QuadConfig<R>) -> Estimate<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    integrate(
        |t: R| {
            if t >= R::one() {
                return R::zero();
            }
            let d = R::one() - t;
            let x = a + scale * t / d;
            let v = f(x) * scale / (d * d);
            if v.is_finite() {
                v
            } else {
                R::zero()
            }
        },
        R::zero(),
        R::one(),
        &[R::half(), R::of(0.9), R::of(0.99)],
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(
            |x: f64| x.powi(5) - 3.0 * x * x,
            0.0,
            2.0,
            &[],
            &QuadConfig::default(),
        );
        assert!(e.converged);
        assert!((e.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn narrow_lorentzian_with_breakpoints() {
        let w = 1e-6;
        let f = |x: f64| (w / PI) / ((x - 0.3).powi(2) + w * w);
        let bp = [0.3 - w, 0.3, 0.3 + w];
        let e = integrate(f, 0.0, 1.0, &bp, &QuadConfig::default());
        let exact = ((0.7f64) / w).atan() / PI + (0.3f64 / w).atan() / PI;
        assert!(e.converged);
        assert!((e.value - exact).abs() < 1e-9, "{} vs {}", e.value, exact);
    }

    #[test]
    fn sqrt_substitution_handles_inverse_sqrt() {
        let e = integrate_sqrt_lower(
            |x: f64| 1.0 / x.sqrt(),
            0.0,
            4.0,
            &[],
            &QuadConfig::default(),
        );
        assert!((e.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_decay() {
        let e = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1.0, &QuadConfig::default());
        assert!((e.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let e = integrate(|x: f64| x, 1.0, 0.0, &[], &QuadConfig::default());
        assert!((e.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let cfg = QuadConfig::default().with_rel_tol(1e-15).with_abs_tol(0.0);
        let cfg = QuadConfig {
            max_panels: 3,
            ..cfg
        };
        let e = integrate(|x: f64| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, &[], &cfg);
        assert!(!e.converged);
        assert!(matches!(e.into_result(), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn cancelling_integral_meets_l1_floor() {
        let cfg = QuadConfig::default().with_l1_tol(1e-13);
        let e = integrate(|x: f64| (x * 7.0).sin(), -1.0, 1.0, &[], &cfg);
        assert!(e.converged);
        assert!(e.value.abs() < 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let e = integrate(|x: f32| x.cos(), 0.0, 1.0, &[], &QuadConfig::default());
        assert!((e.value - 1f32.sin()).abs() < 1e-5);
    }
}
