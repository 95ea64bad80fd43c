//! Finite-bath reference simulation. Each reservoir is replaced by explicit
//! oscillators and the Gaussian state of the closed system is propagated
//! through the drive with no Floquet machinery.
//!
//! Phase-space ordering: `(x, p, q_0, p_0, q_1, p_1, …)` with bath modes
//! numbered consecutively across baths.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::floquet::GreenStatic;
use crate::linalg::symmetric_eigen;
use crate::model::{planck_occupation, DrivePlan, Label, SpectralDensity, SystemParams};
use crate::scalar::{tol_floor, Cplx, Real};

/// Frequency band and mode-density profile used to discretize a reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct BathBand<R> {
    pub lower: R,
    pub upper: R,
    /// Centres of windows where the mode density is multiplied by `boost`.
    pub focus: Vec<R>,
    pub focus_half_width: R,
    pub boost: R,
    /// Frequencies snapped onto cell edges so that no mode sits on them.
    pub avoid: Vec<R>,
}

impl<R: Real> BathBand<R> {
    pub fn new(lower: R, upper: R) -> Self {
        Self {
            lower,
            upper,
            focus: Vec::new(),
            focus_half_width: R::zero(),
            boost: R::one(),
            avoid: Vec::new(),
        }
    }

    /// `[0, 1.5·max(ω₀ + 10γ, ω_d)]`, eight times denser within 5γ of ω₀ and
    /// of ω_d − ω_m; ω_m lies on a cell edge.
    pub fn for_drive(sys: &SystemParams<R>, omega_m: R, omega_d: R) -> Self {
        let ten = R::of(10.0);
        let top = (sys.omega0 + ten * sys.gamma).max(omega_d) * R::of(1.5);
        let mut focus = vec![sys.omega0];
        if omega_d > omega_m {
            focus.push(omega_d - omega_m);
        }
        Self {
            lower: R::zero(),
            upper: top,
            focus,
            focus_half_width: R::of(5.0) * sys.gamma,
            boost: R::of(8.0),
            avoid: vec![omega_m],
        }
    }

    fn in_focus(&self, w: R) -> bool {
        self.focus
            .iter()
            .any(|&c| (w - c).abs() <= self.focus_half_width)
    }

    /// Piecewise-constant relative mode density as `(start, end, density)`.
    fn segments(&self) -> Vec<(R, R, R)> {
        let mut cuts = vec![self.lower, self.upper];
        for &c in &self.focus {
            for e in [c - self.focus_half_width, c + self.focus_half_width] {
                if e > self.lower && e < self.upper {
                    cuts.push(e);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let mid = (w[0] + w[1]) * R::half();
                let d = if self.in_focus(mid) {
                    self.boost
                } else {
                    R::one()
                };
                (w[0], w[1], d)
            })
            .collect()
    }
}

/// A reservoir represented by explicit oscillators of unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath<R> {
    pub label: Label,
    /// Mode frequencies, sorted.
    pub frequencies: Vec<R>,
    /// Couplings with `c_j² = ω_j·I(ω_j)·Δω_j`.
    pub couplings: Vec<R>,
    /// Cell widths Δω_j.
    pub widths: Vec<R>,
    /// `2π/Δω` with Δω the spacing at the first focus centre (the coarsest
    /// spacing without focus windows); infinite for a single mode.
    pub recurrence_time: R,
}

impl<R: Real> DiscretizedBath<R> {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn is_single_mode(&self) -> bool {
        self.frequencies.len() == 1
    }

    /// Discrete density `Σ_j (c_j²/ω_j)·G_σ(ω − ω_j)` smoothed with a
    /// normalized Gaussian of width `sigma`.
    pub fn smoothed_density(&self, omega: R, sigma: R) -> R {
        let norm = R::one() / (sigma * (R::two() * R::PI()).sqrt());
        self.frequencies
            .iter()
            .zip(&self.couplings)
            .map(|(&w, &c)| {
                let u = (omega - w) / sigma;
                c * c / w * norm * (-(u * u) * R::half()).exp()
            })
            .sum()
    }

    /// Damping rate `π·I(ω)/(2ω)` reconstructed from the modes.
    pub fn damping_rate(&self, omega: R, sigma: R) -> R {
        R::PI() * self.smoothed_density(omega, sigma) / (R::two() * omega)
    }

    /// `Σ_{ω_j ≤ ω} c_j²/ω_j`, the discrete counterpart of `∫₀^ω I`.
    pub fn cumulative_density(&self, omega: R) -> R {
        self.frequencies
            .iter()
            .zip(&self.couplings)
            .take_while(|(&w, _)| w <= omega)
            .map(|(&w, &c)| c * c / w)
            .sum()
    }
}

/// Discretizes `sd` into `n` modes on `band`. A delta density becomes one
/// mode with `c² = ω_m·Ĩ`.
pub fn build_discretized_bath<R: Real>(
    label: Label,
    sd: &SpectralDensity<R>,
    n: usize,
    band: &BathBand<R>,
    sys: &SystemParams<R>,
) -> Result<DiscretizedBath<R>> {
    if let SpectralDensity::DiracMode { weight, frequency } = *sd {
        return Ok(DiscretizedBath {
            label,
            frequencies: vec![frequency],
            couplings: vec![(frequency * weight).sqrt()],
            widths: vec![R::zero()],
            recurrence_time: R::infinity(),
        });
    }
    if n < 50 {
        return Err(Error::Configuration(format!(
            "a discretized bath needs at least 50 modes, got {n}"
        )));
    }
    let ten = R::of(10.0);
    let lo_need = (sys.omega0 - ten * sys.gamma).max(R::zero());
    let hi_need = sys.omega0 + ten * sys.gamma;
    if !(band.lower >= R::zero() && band.lower <= lo_need && band.upper >= hi_need) {
        return Err(Error::Configuration(format!(
            "bath band [{}, {}] must cover [{}, {}] around omega0",
            band.lower, band.upper, lo_need, hi_need
        )));
    }
    if !(band.boost >= R::one()) {
        return Err(Error::Configuration("band boost must be >= 1".into()));
    }

    let segs = band.segments();
    let total: R = segs.iter().map(|&(a, b, d)| (b - a) * d).sum();
    // Edge i sits where the cumulative mode density reaches i/n of the total.
    let mut edges = Vec::with_capacity(n + 1);
    let mut seg = 0;
    let mut mass_before = R::zero();
    for i in 0..=n {
        let target = total * R::of_usize(i) / R::of_usize(n);
        loop {
            let (a, b, d) = segs[seg];
            let m = (b - a) * d;
            if target <= mass_before + m || seg + 1 == segs.len() {
                let w = a + (target - mass_before) / d;
                edges.push(w.min(b).max(a));
                break;
            }
            mass_before = mass_before + m;
            seg += 1;
        }
    }
    edges[0] = band.lower;
    edges[n] = band.upper;
    for &a in &band.avoid {
        let k = edges.partition_point(|&e| e < a);
        if k == 0 || k > n {
            continue;
        }
        let j = if a - edges[k - 1] < edges[k] - a {
            k - 1
        } else {
            k
        };
        if j > 0 && j < n {
            edges[j] = a;
        }
    }

    let mut frequencies = Vec::with_capacity(n);
    let mut couplings = Vec::with_capacity(n);
    let mut widths = Vec::with_capacity(n);
    let mut centre_width = R::zero();
    let mut max_width = R::zero();
    for e in edges.windows(2) {
        let w = (e[0] + e[1]) * R::half();
        let dw = e[1] - e[0];
        let i = sd.eval(w)?;
        frequencies.push(w);
        couplings.push((w * i.max(R::zero()) * dw).sqrt());
        widths.push(dw);
        max_width = max_width.max(dw);
        if band.focus.first().is_some_and(|&c| c >= e[0] && c < e[1]) {
            centre_width = dw;
        }
    }
    let spacing = if centre_width > R::zero() {
        centre_width
    } else {
        max_width
    };
    Ok(DiscretizedBath {
        label,
        frequencies,
        couplings,
        widths,
        recurrence_time: R::two() * R::PI() / spacing,
    })
}

/// Symmetrized second moments of the full phase-space vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState<R> {
    pub matrix: Array2<R>,
    pub time: R,
    pub period: usize,
}

/// Normal modes of the undriven quadratic Hamiltonian over `(x, q_0, q_1, …)`.
#[derive(Debug, Clone)]
pub struct NormalModes<R> {
    pub frequencies: Vec<R>,
    /// Column k is the k-th mode shape.
    pub vectors: Array2<R>,
}

/// Linear functionals picking out the normal modes that carry a single-mode
/// bath, weighted by their overlap with it.
#[derive(Debug, Clone)]
pub struct ModeProbe<R> {
    pub bath: usize,
    pub frequencies: Vec<R>,
    pub weights: Vec<R>,
    q_rows: Vec<Array1<R>>,
    p_rows: Vec<Array1<R>>,
}

impl<R: Real> ModeProbe<R> {
    /// Overlap-weighted occupation of the probed normal modes.
    pub fn occupation(&self, sigma: &Array2<R>) -> R {
        let mut n = R::zero();
        for k in 0..self.weights.len() {
            let qq = quad_form(sigma, &self.q_rows[k]);
            let pp = quad_form(sigma, &self.p_rows[k]);
            let w = self.frequencies[k];
            n = n + self.weights[k] * ((pp / w + w * qq) * R::half() - R::half());
        }
        n
    }

    /// Spreads `n` quanta over the probed normal modes in proportion to their
    /// weights, so weakly mixed modes are barely populated.
    pub fn excite(&self, sigma: &mut Array2<R>, n: R) {
        for k in 0..self.weights.len() {
            let w = self.frequencies[k];
            let nk = n * self.weights[k];
            rank1(sigma, nk / w, self.q_rows[k].view(), self.q_rows[k].view());
            rank1(sigma, nk * w, self.p_rows[k].view(), self.p_rows[k].view());
        }
    }
}

fn quad_form<R: Real>(m: &Array2<R>, v: &Array1<R>) -> R {
    v.dot(&m.dot(v))
}

fn rank1<R: Real>(m: &mut Array2<R>, alpha: R, a: ArrayView1<R>, b: ArrayView1<R>) {
    for (i, mut row) in m.axis_iter_mut(Axis(0)).enumerate() {
        let s = alpha * a[i];
        if s != R::zero() {
            row.scaled_add(s, &b);
        }
    }
}

fn frob_dot<R: Real>(a: &Array2<R>, b: &Array2<R>) -> R {
    a.iter()
        .zip(b.iter())
        .fold(R::zero(), |acc, (&x, &y)| acc + x * y)
}

/// System, drive and discretized baths with counterterms applied.
#[derive(Debug, Clone)]
pub struct OracleModel<R> {
    pub sys: SystemParams<R>,
    pub drive: DrivePlan<R>,
    pub baths: Vec<DiscretizedBath<R>>,
    /// Bare system stiffness.
    pub omega_x_sq: R,
    freq_sq: Vec<R>,
    coupling: Vec<R>,
    owner: Vec<usize>,
}

impl<R: Real> OracleModel<R> {
    /// Shifts the bare stiffnesses so that the dressed system pole sits at
    /// `ω₀ + iγ` and each single-mode bath oscillates at its nominal
    /// frequency.
    pub fn new(
        sys: SystemParams<R>,
        drive: DrivePlan<R>,
        baths: Vec<DiscretizedBath<R>>,
    ) -> Result<Self> {
        if baths.is_empty() {
            return Err(Error::Configuration(
                "oracle needs at least one bath".into(),
            ));
        }
        let green = GreenStatic::new(&sys);
        let mut freq_sq = Vec::new();
        let mut coupling = Vec::new();
        let mut owner = Vec::new();
        for (b, bath) in baths.iter().enumerate() {
            for (&w, &c) in bath.frequencies.iter().zip(&bath.couplings) {
                let mut w2 = w * w;
                if bath.is_single_mode() {
                    w2 = w2 + c * c * green.eval(w).re;
                }
                freq_sq.push(w2);
                coupling.push(c);
                owner.push(b);
            }
        }
        let z = Cplx::new(sys.omega0, sys.gamma);
        let z2 = z * z;
        let self_energy = freq_sq
            .iter()
            .zip(&coupling)
            .fold(Cplx::new(R::zero(), R::zero()), |acc, (&w2, &c)| {
                acc + (Cplx::new(w2, R::zero()) - z2).inv() * (c * c)
            });
        let omega_x_sq = (z2 + self_energy).re;
        if !(omega_x_sq > R::zero()) {
            return Err(Error::Configuration(
                "counterterm leaves a non-positive bare stiffness".into(),
            ));
        }
        Ok(Self {
            sys,
            drive,
            baths,
            omega_x_sq,
            freq_sq,
            coupling,
            owner,
        })
    }

    pub fn modes(&self) -> usize {
        self.coupling.len()
    }

    pub fn dim(&self) -> usize {
        2 + 2 * self.modes()
    }

    pub fn period(&self) -> R {
        R::two() * R::PI() / self.drive.omega_d
    }

    /// Bare frequency of global mode `j`.
    pub fn bare_frequency(&self, j: usize) -> R {
        self.freq_sq[j].sqrt()
    }

    /// Global mode indices of bath `b`.
    pub fn bath_modes(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.owner
            .iter()
            .enumerate()
            .filter(move |(_, &o)| o == b)
            .map(|(j, _)| j)
    }

    /// Shortest recurrence time over the multimode baths.
    pub fn recurrence_time(&self) -> R {
        self.baths
            .iter()
            .map(|b| b.recurrence_time)
            .fold(R::infinity(), R::min)
    }

    fn dv(&self, t: R) -> R {
        self.drive.eval(t).re - self.drive.v0()
    }

    fn omega_max(&self) -> R {
        let amp: R = self
            .drive
            .components()
            .iter()
            .filter(|(k, _)| **k != 0)
            .map(|(_, v)| v.norm())
            .sum();
        self.freq_sq
            .iter()
            .fold(self.omega_x_sq + amp, |m, &w2| m.max(w2))
            .sqrt()
    }

    /// `out = F(t)·m` for the linear equations of motion.
    fn apply(&self, t: R, m: &Array2<R>, out: &mut Array2<R>) {
        let kx = self.omega_x_sq + self.dv(t);
        out.row_mut(0).assign(&m.row(1));
        {
            let mut r = out.row_mut(1);
            r.assign(&m.row(0));
            r.mapv_inplace(|v| -kx * v);
            for (j, &c) in self.coupling.iter().enumerate() {
                if c != R::zero() {
                    r.scaled_add(c, &m.row(2 + 2 * j));
                }
            }
        }
        for (j, (&w2, &c)) in self.freq_sq.iter().zip(&self.coupling).enumerate() {
            out.row_mut(2 + 2 * j).assign(&m.row(3 + 2 * j));
            let mut r = out.row_mut(3 + 2 * j);
            r.assign(&m.row(2 + 2 * j));
            r.mapv_inplace(|v| -w2 * v);
            if c != R::zero() {
                r.scaled_add(c, &m.row(0));
            }
        }
    }

    /// Uncorrelated thermal state: the bare system at `t_sys` and bath `b`
    /// at `temps[b]`.
    pub fn thermal_product(&self, t_sys: R, temps: &[R]) -> Result<Array2<R>> {
        if temps.len() != self.baths.len() {
            return Err(Error::Configuration(
                "one temperature per bath required".into(),
            ));
        }
        let n = self.dim();
        let mut s = Array2::zeros((n, n));
        let w0 = self.omega_x_sq.sqrt();
        let nx = planck_occupation(w0, t_sys)? + R::half();
        s[[0, 0]] = nx / w0;
        s[[1, 1]] = nx * w0;
        for j in 0..self.modes() {
            let w = self.bare_frequency(j);
            let nj = planck_occupation(w, temps[self.owner[j]])? + R::half();
            s[[2 + 2 * j, 2 + 2 * j]] = nj / w;
            s[[3 + 2 * j, 3 + 2 * j]] = nj * w;
        }
        Ok(s)
    }

    /// Normal modes of the undriven Hamiltonian.
    pub fn normal_modes(&self) -> Result<NormalModes<R>> {
        let nq = 1 + self.modes();
        let mut k = vec![R::zero(); nq * nq];
        k[0] = self.omega_x_sq;
        for j in 0..self.modes() {
            k[(1 + j) * nq + 1 + j] = self.freq_sq[j];
            k[1 + j] = -self.coupling[j];
            k[(1 + j) * nq] = -self.coupling[j];
        }
        let (evals, vecs) = symmetric_eigen(&k, nq);
        if evals.iter().any(|&l| !(l > R::zero())) {
            return Err(Error::Configuration(
                "undriven Hamiltonian is not positive definite".into(),
            ));
        }
        Ok(NormalModes {
            frequencies: evals.iter().map(|l| l.sqrt()).collect(),
            vectors: Array2::from_shape_vec((nq, nq), vecs).expect("square"),
        })
    }

    /// Gibbs covariance of the undriven Hamiltonian at `temperature`.
    pub fn gibbs_state(&self, modes: &NormalModes<R>, temperature: R) -> Result<Array2<R>> {
        let nq = 1 + self.modes();
        let u = &modes.vectors;
        let mut dq = Array2::zeros((nq, nq));
        let mut dp = Array2::zeros((nq, nq));
        for (k, &w) in modes.frequencies.iter().enumerate() {
            let c = planck_occupation(w, temperature)? + R::half();
            dq[[k, k]] = c / w;
            dp[[k, k]] = c * w;
        }
        let sq = u.dot(&dq).dot(&u.t());
        let sp = u.dot(&dp).dot(&u.t());
        let n = self.dim();
        let mut s = Array2::zeros((n, n));
        for i in 0..nq {
            for j in 0..nq {
                s[[2 * i, 2 * j]] = sq[[i, j]];
                s[[2 * i + 1, 2 * j + 1]] = sp[[i, j]];
            }
        }
        Ok(s)
    }

    /// Probe for single-mode bath `bath`: the normal modes holding at least
    /// 1% of its weight.
    pub fn mode_probe(&self, modes: &NormalModes<R>, bath: usize) -> Result<ModeProbe<R>> {
        if !self.baths.get(bath).is_some_and(|b| b.is_single_mode()) {
            return Err(Error::Configuration(format!(
                "bath {bath} is not a single mode"
            )));
        }
        let j = self.bath_modes(bath).next().expect("one mode");
        let nq = 1 + self.modes();
        let n = self.dim();
        let mut picked: Vec<(usize, R)> = (0..nq)
            .map(|k| (k, modes.vectors[[1 + j, k]].powi(2)))
            .filter(|&(_, w)| w >= R::of(1e-2))
            .collect();
        picked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let total: R = picked.iter().map(|p| p.1).sum();
        let mut probe = ModeProbe {
            bath,
            frequencies: Vec::new(),
            weights: Vec::new(),
            q_rows: Vec::new(),
            p_rows: Vec::new(),
        };
        for (k, w) in picked {
            let mut q = Array1::zeros(n);
            let mut p = Array1::zeros(n);
            for i in 0..nq {
                q[2 * i] = modes.vectors[[i, k]];
                p[2 * i + 1] = modes.vectors[[i, k]];
            }
            probe.frequencies.push(modes.frequencies[k]);
            probe.weights.push(w / total);
            probe.q_rows.push(q);
            probe.p_rows.push(p);
        }
        Ok(probe)
    }

    /// Total energy matrix: `⟨H⟩ = Σ H_kl Σ_kl` at time `t`.
    pub fn energy_matrix(&self, t: R) -> Array2<R> {
        let n = self.dim();
        let mut h = Array2::zeros((n, n));
        h[[0, 0]] = (self.omega_x_sq + self.dv(t)) * R::half();
        h[[1, 1]] = R::half();
        for j in 0..self.modes() {
            h[[2 + 2 * j, 2 + 2 * j]] = self.freq_sq[j] * R::half();
            h[[3 + 2 * j, 3 + 2 * j]] = R::half();
            h[[0, 2 + 2 * j]] = -self.coupling[j] * R::half();
            h[[2 + 2 * j, 0]] = -self.coupling[j] * R::half();
        }
        h
    }
}

/// Period-averaged observables of a state taken at a period boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodAverages<R> {
    /// Heat current out of each bath into the system, `−d⟨H_α⟩/dt`.
    pub heat: Vec<R>,
    /// `⟨(V(t) − V₀)·σ_xp(t)⟩`.
    pub v_sigma_xp: R,
    /// `⟨½V̇(t)⟨x²⟩⟩`, the power delivered by the drive.
    pub work: R,
    /// Probe occupations in probe order.
    pub occupations: Vec<R>,
}

/// One-period propagator `Φ_T` plus matrices whose Frobenius product with a
/// boundary covariance yields period averages.
#[derive(Debug, Clone)]
pub struct Propagator<R> {
    pub period: R,
    pub steps: usize,
    pub phi: Array2<R>,
    flux: Vec<Array2<R>>,
    v_sigma: Array2<R>,
    work: Array2<R>,
    occupation: Vec<Array2<R>>,
    probes: Vec<ModeProbe<R>>,
}

impl<R: Real> Propagator<R> {
    /// Integrates `dΦ/dt = F(t)Φ` over one period with classical RK4.
    /// The default step keeps `h·ω_max ≤ 0.04`, well inside `(2π/ω_max)/20`.
    pub fn new(model: &OracleModel<R>, probes: Vec<ModeProbe<R>>, steps: Option<usize>) -> Self {
        let period = model.period();
        let wmax = model.omega_max();
        let auto = (period * wmax / R::of(0.04))
            .ceil()
            .to_usize()
            .unwrap_or(1000);
        let steps = steps.unwrap_or(auto).max(20);
        let n = model.dim();
        let h = period / R::of_usize(steps);
        let wgt = R::one() / R::of_usize(steps);

        let mut phi = Array2::eye(n);
        let mut acc = Array2::zeros((n, n));
        let mut y = Array2::zeros((n, n));
        let mut k = Array2::zeros((n, n));
        let mut flux = vec![Array2::zeros((n, n)); model.baths.len()];
        let mut v_sigma = Array2::zeros((n, n));
        let mut work = Array2::zeros((n, n));
        let mut occupation = vec![Array2::zeros((n, n)); probes.len()];
        let sixth = h / R::of(6.0);
        let third = h / R::of(3.0);
        let half = h * R::half();

        // Trapezoid weights: exact for the periodic steady state and second
        // order for transients.
        for i in 0..=steps {
            let t = h * R::of_usize(i);
            let wgt = if i == 0 || i == steps {
                wgt * R::half()
            } else {
                wgt
            };
            let a = phi.row(0).to_owned();
            let b = phi.row(1).to_owned();
            for (bi, m) in flux.iter_mut().enumerate() {
                let mut f = Array1::zeros(n);
                for j in model.bath_modes(bi) {
                    f.scaled_add(model.coupling[j], &phi.row(3 + 2 * j));
                }
                rank1(m, wgt, a.view(), f.view());
            }
            rank1(&mut v_sigma, wgt * model.dv(t), a.view(), b.view());
            rank1(
                &mut work,
                wgt * R::half() * model.drive.eval_derivative(t),
                a.view(),
                a.view(),
            );
            for (probe, m) in probes.iter().zip(occupation.iter_mut()) {
                for kk in 0..probe.weights.len() {
                    let w = probe.frequencies[kk];
                    let c = wgt * probe.weights[kk] * R::half();
                    let rq = phi.t().dot(&probe.q_rows[kk]);
                    let rp = phi.t().dot(&probe.p_rows[kk]);
                    rank1(m, c * w, rq.view(), rq.view());
                    rank1(m, c / w, rp.view(), rp.view());
                }
            }
            if i == steps {
                break;
            }

            model.apply(t, &phi, &mut k);
            acc.assign(&phi);
            acc.scaled_add(sixth, &k);
            y.assign(&phi);
            y.scaled_add(half, &k);
            model.apply(t + half, &y, &mut k);
            acc.scaled_add(third, &k);
            y.assign(&phi);
            y.scaled_add(half, &k);
            model.apply(t + half, &y, &mut k);
            acc.scaled_add(third, &k);
            y.assign(&phi);
            y.scaled_add(h, &k);
            model.apply(t + h, &y, &mut k);
            acc.scaled_add(sixth, &k);
            std::mem::swap(&mut phi, &mut acc);
        }
        Self {
            period,
            steps,
            phi,
            flux,
            v_sigma,
            work,
            occupation,
            probes,
        }
    }

    pub fn probes(&self) -> &[ModeProbe<R>] {
        &self.probes
    }

    /// `Φ_T Σ Φ_Tᵀ`.
    pub fn advance(&self, state: &CovarianceState<R>) -> CovarianceState<R> {
        CovarianceState {
            matrix: self.phi.dot(&state.matrix).dot(&self.phi.t()),
            time: state.time + self.period,
            period: state.period + 1,
        }
    }

    /// Averages over the period that starts at `state`.
    pub fn averages(&self, state: &CovarianceState<R>) -> PeriodAverages<R> {
        let s = &state.matrix;
        PeriodAverages {
            heat: self.flux.iter().map(|m| -frob_dot(m, s)).collect(),
            v_sigma_xp: frob_dot(&self.v_sigma, s),
            work: frob_dot(&self.work, s),
            occupations: self
                .occupation
                .iter()
                .map(|m| frob_dot(m, s) - R::half())
                .collect(),
        }
    }

    /// `Φ_T^n` by repeated squaring.
    pub fn power(&self, mut n: usize) -> Array2<R> {
        let dim = self.phi.nrows();
        let mut result: Array2<R> = Array2::eye(dim);
        let mut base = self.phi.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.dot(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.dot(&base);
            }
        }
        result
    }
}

/// Stroboscopic summary at the end of one period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord<R> {
    pub period: usize,
    /// `(⟨x²⟩, σ_xp, ⟨p²⟩)`.
    pub system: [R; 3],
    /// Stroboscopic probe occupations.
    pub occupations: Vec<R>,
    /// Smallest symplectic eigenvalue over the checked reduced states.
    pub min_symplectic: R,
    /// `‖Σ_S(n) − Σ_S(n−1)‖/‖Σ_S(n)‖` for the system block.
    pub distance: R,
}

#[derive(Debug, Clone)]
pub struct Trajectory<R> {
    pub records: Vec<PeriodRecord<R>>,
    pub final_state: CovarianceState<R>,
    /// First period (≥ the minimum) whose distance fell below the tolerance.
    pub transient_end: Option<usize>,
    pub tolerance: R,
}

impl<R: Real> Trajectory<R> {
    pub fn is_periodic(&self) -> bool {
        self.records
            .last()
            .is_some_and(|r| r.distance < self.tolerance)
            && self.transient_end.is_some()
    }

    pub fn min_symplectic(&self) -> R {
        self.records
            .iter()
            .map(|r| r.min_symplectic)
            .fold(R::infinity(), R::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions<R> {
    pub periods: usize,
    pub min_periods: usize,
    pub periodicity_tol: R,
}

impl<R: Real> PropagateOptions<R> {
    pub fn new(periods: usize) -> Self {
        Self {
            periods,
            min_periods: 20,
            periodicity_tol: R::of(1e-4),
        }
    }
}

fn det2<R: Real>(a: R, b: R, c: R, d: R) -> R {
    a * d - b * c
}

fn det4<R: Real>(m: &[[R; 4]; 4]) -> R {
    let mut a = *m;
    let mut det = R::one();
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col] == R::zero() {
            return R::zero();
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det = det * a[col][col];
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            let pivot_row = a[col];
            for (x, &p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                *x = *x - f * p;
            }
        }
    }
    det
}

/// Symplectic eigenvalues of a two-mode covariance ordered `(x₁, p₁, x₂, p₂)`.
fn two_mode_symplectic<R: Real>(m: &[[R; 4]; 4]) -> (R, R) {
    let da = det2(m[0][0], m[0][1], m[1][0], m[1][1]);
    let db = det2(m[2][2], m[2][3], m[3][2], m[3][3]);
    let dc = det2(m[0][2], m[0][3], m[1][2], m[1][3]);
    let delta = da + db + R::two() * dc;
    let det = det4(m);
    let disc = (delta * delta - R::of(4.0) * det).max(R::zero()).sqrt();
    let lo = ((delta - disc) * R::half()).max(R::zero()).sqrt();
    let hi = ((delta + disc) * R::half()).max(R::zero()).sqrt();
    (lo, hi)
}

/// Propagates `initial` for `opts.periods` drive periods. Stroboscopic
/// records track the system block, the probes and the bare single-mode
/// baths; the full covariance is formed only at the end.
pub fn propagate<R: Real>(
    model: &OracleModel<R>,
    prop: &Propagator<R>,
    initial: &Array2<R>,
    opts: &PropagateOptions<R>,
) -> Result<Trajectory<R>> {
    let horizon = prop.period * R::of_usize(opts.periods);
    let guard = model.recurrence_time() * R::half();
    if horizon > guard {
        let n = model.baths.iter().map(|b| b.len()).max().unwrap_or(0);
        let required = (R::of_usize(n) * horizon / guard)
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX);
        return Err(Error::Recurrence {
            horizon: horizon.as_f64(),
            guard: guard.as_f64(),
            required_modes: required,
        });
    }
    let n = model.dim();
    if initial.dim() != (n, n) {
        return Err(Error::Configuration(format!(
            "initial covariance must be {n}x{n}"
        )));
    }

    // Observables tracked each period: x, p, then bare (q, p) of each
    // single-mode bath, then the probe functionals.
    let mut rows: Vec<Array1<R>> = Vec::new();
    let unit = |i: usize| {
        let mut v = Array1::zeros(n);
        v[i] = R::one();
        v
    };
    rows.push(unit(0));
    rows.push(unit(1));
    let singles: Vec<usize> = (0..model.modes())
        .filter(|&j| model.baths[model.owner[j]].is_single_mode())
        .collect();
    for &j in &singles {
        rows.push(unit(2 + 2 * j));
        rows.push(unit(3 + 2 * j));
    }
    let mut probe_slices = Vec::new();
    for p in &prop.probes {
        let start = rows.len();
        for k in 0..p.weights.len() {
            rows.push(p.q_rows[k].clone());
            rows.push(p.p_rows[k].clone());
        }
        probe_slices.push(start);
    }
    let s = rows.len();
    let mut r = Array2::zeros((s, n));
    for (i, v) in rows.iter().enumerate() {
        r.row_mut(i).assign(v);
    }

    let floor = R::half() - tol_floor::<R>(1e-9, 1e3);
    let mut records = Vec::with_capacity(opts.periods);
    let mut prev_sys: Option<[R; 3]> = None;
    let mut transient_end = None;
    for period in 1..=opts.periods {
        r = r.dot(&prop.phi);
        let c = r.dot(initial).dot(&r.t());
        let sys = [c[[0, 0]], c[[0, 1]], c[[1, 1]]];
        let mut nu = det2(sys[0], sys[1], sys[1], sys[2]).max(R::zero()).sqrt();
        for (i, _) in singles.iter().enumerate() {
            let q = 2 + 2 * i;
            let single = det2(c[[q, q]], c[[q, q + 1]], c[[q + 1, q]], c[[q + 1, q + 1]]);
            nu = nu.min(single.max(R::zero()).sqrt());
            let idx = [0, 1, q, q + 1];
            let mut m = [[R::zero(); 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] = c[[idx[a], idx[b]]];
                }
            }
            nu = nu.min(two_mode_symplectic(&m).0);
        }
        if !(nu >= floor) {
            return Err(Error::Positivity {
                time: (prop.period * R::of_usize(period)).as_f64(),
                nu: nu.as_f64(),
            });
        }
        let mut occupations = Vec::with_capacity(prop.probes.len());
        for (p, &start) in prop.probes.iter().zip(&probe_slices) {
            let mut occ = R::zero();
            for k in 0..p.weights.len() {
                let iq = start + 2 * k;
                let w = p.frequencies[k];
                occ = occ
                    + p.weights[k]
                        * ((c[[iq + 1, iq + 1]] / w + w * c[[iq, iq]]) * R::half() - R::half());
            }
            occupations.push(occ);
        }
        let norm = (sys[0] * sys[0] + R::two() * sys[1] * sys[1] + sys[2] * sys[2]).sqrt();
        let distance = match prev_sys {
            Some(p) => {
                let d0 = sys[0] - p[0];
                let d1 = sys[1] - p[1];
                let d2 = sys[2] - p[2];
                (d0 * d0 + R::two() * d1 * d1 + d2 * d2).sqrt() / norm
            }
            None => R::infinity(),
        };
        if transient_end.is_none() && period >= opts.min_periods && distance < opts.periodicity_tol
        {
            transient_end = Some(period);
        }
        prev_sys = Some(sys);
        records.push(PeriodRecord {
            period,
            system: sys,
            occupations,
            min_symplectic: nu,
            distance,
        });
    }

    let p = prop.power(opts.periods);
    let matrix = p.dot(initial).dot(&p.t());
    Ok(Trajectory {
        records,
        final_state: CovarianceState {
            matrix,
            time: horizon,
            period: opts.periods,
        },
        transient_end,
        tolerance: opts.periodicity_tol,
    })
}

/// Oracle measurement in the shape of the Floquet heat breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCurrents<R> {
    /// Heat current into the system per bath label.
    pub heat: Vec<(Label, R)>,
    pub v_sigma_xp: R,
    pub work: R,
    /// Window-averaged probe occupations.
    pub occupations: Vec<R>,
    /// `|⟨V σ_xp⟩ − Σ_α Q̇_α| / max(|⟨V σ_xp⟩|, |Σ_α Q̇_α|)`.
    pub identity_defect: R,
    pub min_symplectic: R,
    /// First period of the averaging window and its length.
    pub start: usize,
    pub window: usize,
    /// State after the window.
    pub final_state: CovarianceState<R>,
}

impl<R: Real> OracleCurrents<R> {
    pub fn heat_of(&self, label: Label) -> R {
        self.heat
            .iter()
            .filter(|(l, _)| *l == label)
            .map(|(_, q)| *q)
            .sum()
    }

    pub fn total_heat(&self) -> R {
        self.heat.iter().map(|(_, q)| *q).sum()
    }
}

/// Averages of the per-period currents over `window` periods from `state`.
pub fn window_averages<R: Real>(
    prop: &Propagator<R>,
    state: &CovarianceState<R>,
    window: usize,
) -> (PeriodAverages<R>, CovarianceState<R>) {
    let mut st = state.clone();
    let mut sum: Option<PeriodAverages<R>> = None;
    for _ in 0..window {
        let avg = prop.averages(&st);
        sum = Some(match sum {
            None => avg,
            Some(mut s) => {
                s.heat
                    .iter_mut()
                    .zip(&avg.heat)
                    .for_each(|(a, b)| *a = *a + *b);
                s.occupations
                    .iter_mut()
                    .zip(&avg.occupations)
                    .for_each(|(a, b)| *a = *a + *b);
                s.v_sigma_xp = s.v_sigma_xp + avg.v_sigma_xp;
                s.work = s.work + avg.work;
                s
            }
        });
        st = prop.advance(&st);
    }
    let mut s = sum.unwrap_or_else(|| prop.averages(state));
    let k = R::of_usize(window.max(1));
    s.heat.iter_mut().for_each(|q| *q = *q / k);
    s.occupations.iter_mut().for_each(|n| *n = *n / k);
    s.v_sigma_xp = s.v_sigma_xp / k;
    s.work = s.work / k;
    (s, st)
}

/// Currents averaged over `window` periods following a periodic trajectory.
pub fn measure_currents<R: Real>(
    model: &OracleModel<R>,
    prop: &Propagator<R>,
    traj: &Trajectory<R>,
    window: usize,
) -> Result<OracleCurrents<R>> {
    if !traj.is_periodic() {
        let last = traj
            .records
            .last()
            .map(|r| r.distance.as_f64())
            .unwrap_or(f64::NAN);
        return Err(Error::NotConverged(format!(
            "trajectory not periodic after {} periods: distance {last:e}",
            traj.records.len()
        )));
    }
    let (avg, final_state) = window_averages(prop, &traj.final_state, window);
    let heat: Vec<(Label, R)> = model
        .baths
        .iter()
        .zip(&avg.heat)
        .map(|(b, &q)| (b.label, q))
        .collect();
    let total: R = avg.heat.iter().copied().sum();
    let scale = avg.v_sigma_xp.abs().max(total.abs());
    let identity_defect = if scale > R::zero() {
        (avg.v_sigma_xp - total).abs() / scale
    } else {
        R::zero()
    };
    Ok(OracleCurrents {
        heat,
        v_sigma_xp: avg.v_sigma_xp,
        work: avg.work,
        occupations: avg.occupations,
        identity_defect,
        min_symplectic: traj.min_symplectic(),
        start: traj.final_state.period,
        window: window.max(1),
        final_state,
    })
}
