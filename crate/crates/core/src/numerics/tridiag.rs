//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues and inverse iteration for the eigenvectors.

/// Symmetric tridiagonal matrix with diagonal `diag` and a constant
/// off-diagonal entry `off`.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `sigma` (negative pivots of the
    /// LDLᵀ factorisation of `A - sigma I`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let e2 = self.off * self.off;
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + self.off.abs());
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 {
                d - sigma
            } else {
                d - sigma - e2 / q
            };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |a, &d| a.min(d - r));
        let hi = self
            .diag
            .iter()
            .fold(f64::NEG_INFINITY, |a, &d| a.max(d + r));
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected until the bracket is
    /// below `tol` or stops shrinking in floating point.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> Option<f64> {
        if k >= self.len() {
            return None;
        }
        let (mut lo, mut hi) = self.gershgorin();
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off * x[i - 1];
            }
            if i + 1 < n {
                v += self.off * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// Solves `(A - sigma I) x = b` by Gaussian elimination with partial
    /// pivoting; exactly singular pivots are nudged so inverse iteration can
    /// proceed.
    pub fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        // Rows after pivoting have up to three nonzeros: u0 (diag), u1, u2.
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let eps = f64::EPSILON * (self.off.abs() + 1.0);
        // current row i has entries (a_ii, a_i,i+1) = (d, e) plus fill
        let mut cur_d = self.diag[0] - sigma;
        let mut cur_e = if n > 1 { self.off } else { 0.0 };
        let mut cur_f = 0.0;
        for i in 0..n {
            if i + 1 < n {
                let below_sub = self.off;
                let below_d = self.diag[i + 1] - sigma;
                let below_e = if i + 2 < n { self.off } else { 0.0 };
                if below_sub.abs() > cur_d.abs() {
                    // swap rows i and i+1
                    let m = cur_d / below_sub;
                    u0[i] = below_sub;
                    u1[i] = below_d;
                    u2[i] = below_e;
                    rhs.swap(i, i + 1);
                    let r = rhs[i + 1] - m * rhs[i];
                    rhs[i + 1] = r;
                    cur_d = cur_e - m * below_d;
                    cur_e = cur_f - m * below_e;
                    cur_f = 0.0;
                } else {
                    let piv = if cur_d == 0.0 { eps } else { cur_d };
                    let m = below_sub / piv;
                    u0[i] = piv;
                    u1[i] = cur_e;
                    u2[i] = cur_f;
                    rhs[i + 1] -= m * rhs[i];
                    cur_d = below_d - m * cur_e;
                    cur_e = below_e - m * cur_f;
                    cur_f = 0.0;
                }
            } else {
                u0[i] = if cur_d == 0.0 { eps } else { cur_d };
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= u2[i] * x[i + 2];
            }
            x[i] = v / u0[i];
        }
        x
    }

    /// Eigenvector for the eigenvalue `lambda` by inverse iteration,
    /// normalised to unit Euclidean length with a positive largest entry.
    pub fn eigenvector(&self, lambda: f64, iterations: usize) -> Vec<f64> {
        let n = self.len();
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i as f64) * 0.618_033_988_7).fract())
            .collect();
        normalize(&mut v);
        for _ in 0..iterations {
            let mut w = self.solve_shifted(lambda, &v);
            if w.iter().any(|x| !x.is_finite()) {
                break;
            }
            normalize(&mut w);
            v = w;
        }
        let imax = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[imax] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    }

    /// `‖(A - lambda) v‖₂ / ‖v‖₂`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let av = self.apply(v);
        let num: f64 = av
            .iter()
            .zip(v)
            .map(|(a, x)| (a - lambda * x).powi(2))
            .sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        (num / den).sqrt()
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
