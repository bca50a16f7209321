//! Scalar root bracketing and bounded minimisation.

/// Bisects a sign change of `f` on `[a, b]` until the bracket is narrower
/// than `tol`. Returns the final bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut fa = f(a);
    if fa == 0.0 {
        return (a, a);
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return (m, m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a.min(b), a.max(b))
}

/// Golden-section search for the minimum of `f` on `[a, b]`; returns
/// `(argmin, min)` including the endpoints as candidates.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo).abs() > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let (a, b) = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-13);
        assert!((0.5 * (a + b) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-10);
        // the minimum is only resolvable to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
