//! One-dimensional minimization and root bracketing.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<R> {
    pub x: R,
    pub value: R,
    pub evaluations: usize,
}

/// Golden-section search on `[a, b]` to relative tolerance `rel_tol` in `x`,
/// followed by one parabolic step through the final bracket.
pub fn golden_section<R, F>(mut f: F, a: R, b: R, rel_tol: R) -> Minimum<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    let inv_phi = (R::of(5.0).sqrt() - R::one()) * R::half();
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    let scale = lo.abs().max(hi.abs()).max(R::min_positive_value());
    while hi - lo > rel_tol * scale && evaluations < 400 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        evaluations += 1;
    }
    let (mut best_x, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };

    // parabolic refinement through (lo, x1, x2) or (x1, x2, hi)
    let (p, q, r) = (x1, best_x, x2);
    if p < r {
        let (fp, fq, fr) = (f1, best_f, f2);
        let num = (q - p) * (q - p) * (fq - fr) - (q - r) * (q - r) * (fq - fp);
        let den = (q - p) * (fq - fr) - (q - r) * (fq - fp);
        if den != R::zero() {
            let xp = q - R::half() * num / den;
            if xp > lo && xp < hi && xp.is_finite() {
                let fpv = f(xp);
                evaluations += 1;
                if fpv < best_f {
                    best_x = xp;
                    best_f = fpv;
                }
            }
        }
    }
    Minimum {
        x: best_x,
        value: best_f,
        evaluations,
    }
}

/// Global-then-local minimization on `[a, b]`: evaluates `scan` uniform
/// interior points plus any `seeds` inside the interval, then runs
/// [`golden_section`] between the neighbours of the best candidate.
pub fn scan_minimize<R, F>(mut f: F, a: R, b: R, scan: usize, seeds: &[R], rel_tol: R) -> Minimum<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut xs: Vec<R> = (0..scan)
        .map(|i| lo + (hi - lo) * R::of_usize(i + 1) / R::of_usize(scan + 1))
        .collect();
    xs.extend(seeds.iter().copied().filter(|s| *s > lo && *s < hi));
    xs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    xs.dedup();
    let fs: Vec<R> = xs.iter().map(|&x| f(x)).collect();
    let mut evaluations = xs.len();
    let Some(best) = (0..xs.len()).min_by(|&i, &j| {
        fs[i]
            .partial_cmp(&fs[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    }) else {
        return golden_section(&mut f, lo, hi, rel_tol);
    };
    if !fs[best].is_finite() {
        return Minimum {
            x: xs[best],
            value: fs[best],
            evaluations,
        };
    }
    let left = if best == 0 { lo } else { xs[best - 1] };
    let right = if best + 1 == xs.len() {
        hi
    } else {
        xs[best + 1]
    };
    let m = golden_section(&mut f, left, right, rel_tol);
    evaluations += m.evaluations;
    if m.value <= fs[best] {
        Minimum { evaluations, ..m }
    } else {
        Minimum {
            x: xs[best],
            value: fs[best],
            evaluations,
        }
    }
}

/// Plain bisection for a sign change of `f` on `[a, b]`; fixed iteration count.
pub fn bisect<R, F>(mut f: F, a: R, b: R, iterations: usize) -> Option<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == R::zero() {
        return Some(lo);
    }
    if fhi == R::zero() {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..iterations {
        let mid = (lo + hi) * R::half();
        let fm = f(mid);
        if fm == R::zero() {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * R::half())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|x: f64| (x - 0.7).powi(2) + 3.0, 0.0, 2.0, 1e-10);
        assert!((m.x - 0.7).abs() < 5e-8);
        assert!((m.value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn golden_on_asymmetric_function() {
        let m = golden_section(|x: f64| x.exp() - 2.0 * x, -3.0, 3.0, 1e-9);
        assert!((m.x - 2f64.ln()).abs() < 1e-7);
    }

    #[test]
    fn scan_finds_narrow_well_from_seed() {
        // a well far narrower than the scan spacing is only reachable via a seed
        let f = |x: f64| 1.0 - 1.0 / (1.0 + ((x - 0.61234) / 1e-6).powi(2));
        let m = scan_minimize(f, 0.0, 1.0, 64, &[0.612345], 1e-9);
        assert!((m.x - 0.61234).abs() < 1e-8);
        let wide = scan_minimize(|x: f64| (x - 0.3).powi(2), 0.0, 1.0, 64, &[], 1e-10);
        assert!((wide.x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 80).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect(|x: f64| x * x + 1.0, 0.0, 2.0, 10).is_none());
    }
}
