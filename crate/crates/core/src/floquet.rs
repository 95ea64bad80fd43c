//! Static Green function and the Floquet coefficients A_k(ω) of the driven
//! oscillator, from a truncated linear solve or from first-order perturbation.

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{solve_refined, CMatrix};
use crate::model::{DrivePlan, SystemParams};
use crate::scalar::{Cplx, Real};

/// Which width enters the static Green function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreenConvention {
    /// `g(iω) = 1/(ω₀² − (ω − iγ)²)`.
    #[default]
    FullRate,
    /// `g(iω) = 1/(ω₀² − (ω − iγ/2)²)`, for sensitivity studies.
    HalfRate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenStatic<R> {
    pub omega0: R,
    pub gamma: R,
    pub convention: GreenConvention,
}

impl<R: Real> GreenStatic<R> {
    pub fn new(sys: &SystemParams<R>) -> Self {
        Self {
            omega0: sys.omega0,
            gamma: sys.gamma,
            convention: GreenConvention::FullRate,
        }
    }

    pub fn with_convention(mut self, convention: GreenConvention) -> Self {
        self.convention = convention;
        self
    }

    fn width(&self) -> R {
        match self.convention {
            GreenConvention::FullRate => self.gamma,
            GreenConvention::HalfRate => self.gamma * R::half(),
        }
    }

    /// g(iω).
    pub fn eval(&self, omega: R) -> Cplx<R> {
        let z = Cplx::new(omega, -self.width());
        let den = Cplx::new(self.omega0 * self.omega0, R::zero()) - z * z;
        den.inv()
    }

    /// |g(iω)|² in factored form, free of cancellation near resonance.
    pub fn norm_sqr(&self, omega: R) -> R {
        let w = self.width();
        let a = omega - self.omega0;
        let b = omega + self.omega0;
        R::one() / ((a * a + w * w) * (b * b + w * w))
    }

    /// Poles of g(iω) in the complex ω plane; both lie at Im ω = +width,
    /// i.e. at s = iω with Re s < 0.
    pub fn poles(&self) -> [Cplx<R>; 2] {
        [
            Cplx::new(self.omega0, self.width()),
            Cplx::new(-self.omega0, self.width()),
        ]
    }
}

/// g(iω) for the given system.
pub fn static_green<R: Real>(gs: &GreenStatic<R>, omega: R) -> Cplx<R> {
    gs.eval(omega)
}

/// Anything that returns the Floquet coefficients at an arbitrary frequency.
pub trait CoefficientProvider<R: Real>: Sync {
    fn drive(&self) -> &DrivePlan<R>;
    fn green(&self) -> &GreenStatic<R>;
    /// Largest |k| carried; coefficients beyond are zero.
    fn k_range(&self) -> usize;
    /// `[A_{−K}, …, A_K]` at ω.
    fn coefficients(&self, omega: R) -> Result<Vec<Cplx<R>>>;

    fn coefficient(&self, omega: R, k: i64) -> Result<Cplx<R>> {
        let kk = self.k_range() as i64;
        if k.abs() > kk {
            return Ok(Cplx::zero());
        }
        Ok(self.coefficients(omega)?[(k + kk) as usize])
    }
}

/// Exact coefficients from the (2K+1)-dimensional truncated system.
#[derive(Debug, Clone)]
pub struct ExactFloquet<R> {
    pub green: GreenStatic<R>,
    pub drive: DrivePlan<R>,
    pub k: usize,
}

impl<R: Real> ExactFloquet<R> {
    pub fn new(sys: &SystemParams<R>, drive: &DrivePlan<R>, k: usize) -> Result<Self> {
        if k < drive.k_max().max(1) {
            return Err(Error::Configuration(format!(
                "truncation K = {k} below drive harmonic order {}",
                drive.k_max()
            )));
        }
        Ok(Self {
            green: GreenStatic::new(sys),
            drive: drive.clone(),
            k,
        })
    }

    pub fn with_green(mut self, green: GreenStatic<R>) -> Self {
        self.green = green;
        self
    }
}

impl<R: Real> CoefficientProvider<R> for ExactFloquet<R> {
    fn drive(&self) -> &DrivePlan<R> {
        &self.drive
    }
    fn green(&self) -> &GreenStatic<R> {
        &self.green
    }
    fn k_range(&self) -> usize {
        self.k
    }
    fn coefficients(&self, omega: R) -> Result<Vec<Cplx<R>>> {
        solve_point(&self.green, &self.drive, omega, self.k)
    }
}

/// Leading-order coefficients: A₀ = g(iω), A_{±1} = −g(i(ω±ω_d))·V·g(iω).
#[derive(Debug, Clone)]
pub struct Perturbative<R> {
    pub green: GreenStatic<R>,
    pub drive: DrivePlan<R>,
    amplitude: R,
}

impl<R: Real> Perturbative<R> {
    pub fn new(sys: &SystemParams<R>, drive: &DrivePlan<R>) -> Result<Self> {
        let amplitude = drive.harmonic_amplitude().ok_or_else(|| {
            Error::UnsupportedDrive("perturbative coefficients need a harmonic drive".into())
        })?;
        Ok(Self {
            green: GreenStatic::new(sys),
            drive: drive.clone(),
            amplitude,
        })
    }

    pub fn with_green(mut self, green: GreenStatic<R>) -> Self {
        self.green = green;
        self
    }
}

impl<R: Real> CoefficientProvider<R> for Perturbative<R> {
    fn drive(&self) -> &DrivePlan<R> {
        &self.drive
    }
    fn green(&self) -> &GreenStatic<R> {
        &self.green
    }
    fn k_range(&self) -> usize {
        1
    }
    fn coefficients(&self, omega: R) -> Result<Vec<Cplx<R>>> {
        let g0 = self.green.eval(omega);
        let wd = self.drive.omega_d;
        let v = self.amplitude;
        Ok(vec![
            -self.green.eval(omega - wd) * v * g0,
            g0,
            -self.green.eval(omega + wd) * v * g0,
        ])
    }
}

/// `(A_{+1}, A_{−1})` at first order in the drive amplitude.
pub fn perturbative_a1<R: Real>(
    sys: &SystemParams<R>,
    drive: &DrivePlan<R>,
    omega: R,
) -> Result<(Cplx<R>, Cplx<R>)> {
    let p = Perturbative::new(sys, drive)?;
    if !drive.is_perturbative(R::of(0.05)) && p.amplitude != R::zero() {
        log::warn!("perturbative coefficients used outside |V|/V0 < 0.05");
    }
    let c = p.coefficients(omega)?;
    Ok((c[2], c[0]))
}

fn assemble<R: Real>(
    green: &GreenStatic<R>,
    drive: &DrivePlan<R>,
    omega: R,
    k: usize,
) -> CMatrix<R> {
    let n = 2 * k + 1;
    let kk = k as i64;
    let mut m = CMatrix::zeros(n);
    for row in 0..n {
        let kr = row as i64 - kk;
        let gk = green.eval(omega + R::of_i64(kr) * drive.omega_d);
        m.set(row, row, Cplx::new(R::one(), R::zero()));
        for (&j, &vj) in drive.components() {
            if j == 0 || vj.is_zero() {
                continue;
            }
            let col = kr - j + kk;
            if (0..n as i64).contains(&col) {
                let c = col as usize;
                let v = m.get(row, c) + gk * vj;
                m.set(row, c, v);
            }
        }
    }
    m
}

fn solve_point<R: Real>(
    green: &GreenStatic<R>,
    drive: &DrivePlan<R>,
    omega: R,
    k: usize,
) -> Result<Vec<Cplx<R>>> {
    let n = 2 * k + 1;
    let m = assemble(green, drive, omega, k);
    let mut rhs = vec![Cplx::zero(); n];
    rhs[k] = green.eval(omega);
    solve_refined(&m, &rhs)
}

/// Componentwise backward error of the truncated defining system at one
/// frequency: each row's residual over the magnitude of its terms.
fn point_residual<R: Real>(
    green: &GreenStatic<R>,
    drive: &DrivePlan<R>,
    omega: R,
    a: &[Cplx<R>],
) -> R {
    let n = a.len();
    let kk = (n / 2) as i64;
    let floor = R::of(1e-30).max(R::min_positive_value());
    let mut worst = R::zero();
    for row in 0..n {
        let kr = row as i64 - kk;
        let gk = green.eval(omega + R::of_i64(kr) * drive.omega_d);
        let mut rhs = if kr == 0 {
            green.eval(omega)
        } else {
            Cplx::zero()
        };
        let mut scale = a[row].norm() + rhs.norm();
        for (&j, &vj) in drive.components() {
            if j == 0 {
                continue;
            }
            let col = kr - j + kk;
            if (0..n as i64).contains(&col) {
                let term = gk * vj * a[col as usize];
                rhs = rhs - term;
                scale = scale + term.norm();
            }
        }
        let r = (a[row] - rhs).norm() / scale.max(floor);
        if r > worst {
            worst = r;
        }
    }
    worst
}

/// Size of the neglected coupling to |k| = K+1, relative to the largest
/// stored coefficient.
fn tail_estimate<R: Real>(
    green: &GreenStatic<R>,
    drive: &DrivePlan<R>,
    omega: R,
    a: &[Cplx<R>],
) -> R {
    let n = a.len();
    let kk = (n / 2) as i64;
    let at = |k: i64| -> Cplx<R> {
        if k.abs() > kk {
            Cplx::zero()
        } else {
            a[(k + kk) as usize]
        }
    };
    let scale = a.iter().map(|z| z.norm()).fold(R::zero(), R::max);
    if scale == R::zero() {
        return R::zero();
    }
    let mut worst = R::zero();
    for edge in [kk + 1, -kk - 1] {
        // A_{edge} implied by its own equation with the stored coefficients
        let g_edge = green.eval(omega + R::of_i64(edge) * drive.omega_d);
        let mut a_edge: Cplx<R> = Cplx::zero();
        for (&j, &vj) in drive.components() {
            if j != 0 {
                a_edge = a_edge - g_edge * vj * at(edge - j);
            }
        }
        let leak = a_edge.norm() / scale;
        if leak > worst {
            worst = leak;
        }
    }
    worst
}

/// Table of A_k(ω) on a frequency grid.
#[derive(Debug, Clone)]
pub struct FloquetSolution<R> {
    pub grid: Vec<R>,
    pub k: usize,
    /// `coefficients[i][k + K]` is A_k at `grid[i]`.
    pub coefficients: Vec<Vec<Cplx<R>>>,
    pub drive: DrivePlan<R>,
    pub green: GreenStatic<R>,
    pub residual: R,
    /// Neglected coupling beyond |k| = K relative to the coefficient norm.
    pub tail: R,
}

impl<R: Real> FloquetSolution<R> {
    pub fn coefficient(&self, index: usize, k: i64) -> Cplx<R> {
        let kk = self.k as i64;
        if k.abs() > kk {
            return Cplx::zero();
        }
        self.coefficients[index][(k + kk) as usize]
    }

    /// Provider that re-solves at arbitrary ω with the same truncation.
    pub fn provider(&self) -> ExactFloquet<R> {
        ExactFloquet {
            green: self.green,
            drive: self.drive.clone(),
            k: self.k,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FloquetOptions<R> {
    pub residual_tol: R,
    pub convergence_tol: R,
    /// Bound on the neglected |k| = K+1 coupling for a fixed-K solve.
    pub tail_tol: R,
    pub k_cap: usize,
    pub convention: GreenConvention,
}

impl<R: Real> Default for FloquetOptions<R> {
    fn default() -> Self {
        Self {
            residual_tol: crate::scalar::tol_floor(1e-10, 1e3),
            convergence_tol: crate::scalar::tol_floor(1e-10, 1e3),
            tail_tol: crate::scalar::tol_floor(1e-6, 1e3),
            k_cap: 32,
            convention: GreenConvention::FullRate,
        }
    }
}

/// Coefficient rows with the worst residual and tail.
type GridSolve<R> = (Vec<Vec<Cplx<R>>>, R, R);

fn solve_grid<R: Real>(
    green: &GreenStatic<R>,
    drive: &DrivePlan<R>,
    grid: &[R],
    k: usize,
) -> Result<GridSolve<R>> {
    let rows: Vec<Result<_>> = grid
        .par_iter()
        .map(|&w| {
            if !w.is_finite() {
                return Err(Error::Domain("grid frequency must be finite".into()));
            }
            let a = solve_point(green, drive, w, k)?;
            let r = point_residual(green, drive, w, &a);
            let t = tail_estimate(green, drive, w, &a);
            Ok((a, r, t))
        })
        .collect();
    let mut coeffs = Vec::with_capacity(grid.len());
    let mut residual = R::zero();
    let mut tail = R::zero();
    for row in rows {
        let (a, r, t) = row?;
        residual = residual.max(r);
        tail = tail.max(t);
        coeffs.push(a);
    }
    Ok((coeffs, residual, tail))
}

/// Solves the truncated Floquet system at fixed K on every grid point.
pub fn solve_floquet<R: Real>(
    sys: &SystemParams<R>,
    drive: &DrivePlan<R>,
    grid: &[R],
    k: usize,
) -> Result<FloquetSolution<R>> {
    solve_floquet_with(sys, drive, grid, k, &FloquetOptions::default())
}

pub fn solve_floquet_with<R: Real>(
    sys: &SystemParams<R>,
    drive: &DrivePlan<R>,
    grid: &[R],
    k: usize,
    opts: &FloquetOptions<R>,
) -> Result<FloquetSolution<R>> {
    if k < drive.k_max().max(1) {
        return Err(Error::Configuration(format!(
            "truncation K = {k} below drive harmonic order {}",
            drive.k_max()
        )));
    }
    let green = GreenStatic::new(sys).with_convention(opts.convention);
    let (coefficients, residual, tail) = solve_grid(&green, drive, grid, k)?;
    if residual > opts.residual_tol || tail > opts.tail_tol {
        return Err(Error::TruncationTooSmall {
            k,
            residual: residual.max(tail).as_f64(),
            suggested_k: k + 2,
        });
    }
    Ok(FloquetSolution {
        grid: grid.to_vec(),
        k,
        coefficients,
        drive: drive.clone(),
        green,
        residual,
        tail,
    })
}

/// Default truncation `max(4, 2·k_max)` escalated by 2 until the residual
/// and the K → K+2 change both pass, capped at `opts.k_cap`.
pub fn solve_floquet_auto<R: Real>(
    sys: &SystemParams<R>,
    drive: &DrivePlan<R>,
    grid: &[R],
    opts: &FloquetOptions<R>,
) -> Result<FloquetSolution<R>> {
    let green = GreenStatic::new(sys).with_convention(opts.convention);
    let mut k = 4.max(2 * drive.k_max());
    let (mut coeffs, mut residual, mut tail) = solve_grid(&green, drive, grid, k)?;
    loop {
        let next = k + 2;
        if next > opts.k_cap.max(k) {
            return Err(Error::TruncationTooSmall {
                k,
                residual: residual.max(tail).as_f64(),
                suggested_k: next,
            });
        }
        let (c2, r2, t2) = solve_grid(&green, drive, grid, next)?;
        let change = truncation_change(&coeffs, &c2);
        if residual <= opts.residual_tol && change <= opts.convergence_tol {
            return Ok(FloquetSolution {
                grid: grid.to_vec(),
                k,
                coefficients: coeffs,
                drive: drive.clone(),
                green,
                residual,
                tail,
            });
        }
        k = next;
        coeffs = c2;
        residual = r2;
        tail = t2;
    }
}

/// Largest change of the shared coefficients between two truncations,
/// relative to the largest coefficient at the same frequency.
pub fn truncation_change<R: Real>(low: &[Vec<Cplx<R>>], high: &[Vec<Cplx<R>>]) -> R {
    let mut worst = R::zero();
    for (a, b) in low.iter().zip(high) {
        let ka = a.len() / 2;
        let kb = b.len() / 2;
        let scale = b.iter().map(|z| z.norm()).fold(R::zero(), R::max);
        if scale == R::zero() {
            continue;
        }
        for (i, za) in a.iter().enumerate() {
            let zb = b[i + kb - ka];
            let d = (*za - zb).norm() / scale;
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Residual of a stored solution against its defining system.
pub fn floquet_residual<R: Real>(sol: &FloquetSolution<R>) -> R {
    sol.grid
        .iter()
        .zip(&sol.coefficients)
        .map(|(&w, a)| point_residual(&sol.green, &sol.drive, w, a))
        .fold(R::zero(), R::max)
}
