//! Potentials of the form `W(φ) = s · Π_j ((φ − r_j)/ρ_j)²`.
//!
//! Every polynomial family of the crate (φ⁴, φ⁶, φ⁸, φ¹⁰, W₄ₙ, W₄ₙ₊₂ and the
//! truncated sine-Gordon products) is a product of squared linear factors.
//! Evaluating W, its derivatives and the transformed potential through
//! logarithmic derivatives taken relative to the nearest root removes every
//! cancellation at the wells: with `d = φ − r₀` for the nearest root `r₀`,
//! `Q = W/d²` and the sums `Sₖ = Σ_{j≠0} (φ − r_j)^{-k}`,
//!
//! * `W   = Q d²`
//! * `W'  = 2Q d (1 + S₁ d)`
//! * `W'' = Q (4S₁²d² + 8S₁d + 2 − 2S₂d²)`
//! * `W'''= Q (8S₁³d² + 24S₁²d + 12S₁ − 12S₁S₂d² − 12S₂d + 4S₃d²)`
//! * `V   = (W')²/W − W'' = 2Q (1 + S₂d²)`
//! * `V'  = 4Q (S₁ + S₁S₂d² + S₂d − S₃d²)`

use super::Jet;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductForm {
    scale: f64,
    roots: Vec<f64>,
    rho: Vec<f64>,
}

struct Sums {
    q: f64,
    d: f64,
    s1: f64,
    s2: f64,
    s3: f64,
}

const BIG: f64 = 1e150;
const SMALL: f64 = 1e-150;

impl ProductForm {
    /// `roots` must be sorted and distinct; `rho` gives the per-factor
    /// normalisation (use 1 for monic factors).
    pub fn new(scale: f64, roots: Vec<f64>, rho: Vec<f64>) -> Self {
        debug_assert_eq!(roots.len(), rho.len());
        debug_assert!(roots.windows(2).all(|w| w[0] < w[1]));
        Self { scale, roots, rho }
    }

    /// Monic factors: `W = s Π (φ − r_j)²`.
    pub fn monic(scale: f64, mut roots: Vec<f64>) -> Self {
        roots.sort_by(f64::total_cmp);
        let rho = vec![1.0; roots.len()];
        Self::new(scale, roots, rho)
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn nearest(&self, phi: f64) -> usize {
        let idx = self.roots.partition_point(|&r| r < phi);
        if idx == 0 {
            0
        } else if idx == self.roots.len() || (phi - self.roots[idx - 1]) <= (self.roots[idx] - phi)
        {
            idx - 1
        } else {
            idx
        }
    }

    fn sums(&self, phi: f64) -> Sums {
        let i0 = self.nearest(phi);
        let d = phi - self.roots[i0];
        let mut mant = self.scale / (self.rho[i0] * self.rho[i0]);
        let mut exp2: i32 = 0;
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for (j, (&r, &rho)) in self.roots.iter().zip(&self.rho).enumerate() {
            if j == i0 {
                continue;
            }
            let t = phi - r;
            let f = t / rho;
            mant *= f * f;
            if mant.abs() > BIG {
                mant *= 2f64.powi(-498);
                exp2 += 498;
            } else if mant.abs() < SMALL && mant != 0.0 {
                mant *= 2f64.powi(498);
                exp2 -= 498;
            }
            let inv = 1.0 / t;
            let inv2 = inv * inv;
            s1 += inv;
            s2 += inv2;
            s3 += inv2 * inv;
        }
        let q = mant * 2f64.powi(exp2);
        Sums { q, d, s1, s2, s3 }
    }

    pub fn jet(&self, phi: f64) -> Jet {
        let Sums { q, d, s1, s2, s3 } = self.sums(phi);
        let d2 = d * d;
        Jet {
            w: q * d2,
            d1: 2.0 * q * d * (1.0 + s1 * d),
            d2: q * (4.0 * s1 * s1 * d2 + 8.0 * s1 * d + 2.0 - 2.0 * s2 * d2),
            d3: q
                * (8.0 * s1 * s1 * s1 * d2 + 24.0 * s1 * s1 * d + 12.0 * s1
                    - 12.0 * s1 * s2 * d2
                    - 12.0 * s2 * d
                    + 4.0 * s3 * d2),
        }
    }

    /// `W'` alone (used in the time-stepping hot loop).
    pub fn first_derivative(&self, phi: f64) -> f64 {
        let Sums { q, d, s1, .. } = self.sums(phi);
        2.0 * q * d * (1.0 + s1 * d)
    }

    /// Transformed potential `V` and its derivative `V'`.
    pub fn transformed(&self, phi: f64) -> (f64, f64) {
        let Sums { q, d, s1, s2, s3 } = self.sums(phi);
        let d2 = d * d;
        let v = 2.0 * q * (1.0 + s2 * d2);
        let vp = 4.0 * q * (s1 + s1 * s2 * d2 + s2 * d - s3 * d2);
        (v, vp)
    }
}
