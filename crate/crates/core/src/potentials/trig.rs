//! Trigonometric families: sine-Gordon and the two double sine-Gordon models.
//!
//! Values near the wells are evaluated through half-angle factorisations so
//! that W and W' keep full relative accuracy there.

use std::f64::consts::PI;

use super::Jet;

/// `W = 1 − cos φ = 2 sin²(φ/2)`, evaluated at the offset from the nearest
/// well so that `W` vanishes exactly at the floating-point wells `2πk`.
pub fn sine_gordon(phi: f64) -> Jet {
    let t = offset_from_lattice(phi, 0.0, 2.0 * PI);
    let s = (0.5 * t).sin();
    let (st, ct) = t.sin_cos();
    Jet {
        w: 2.0 * s * s,
        d1: st,
        d2: ct,
        d3: -st,
    }
}

/// `W` alone for sine-Gordon.
pub fn sine_gordon_value(phi: f64) -> f64 {
    let s = (0.5 * offset_from_lattice(phi, 0.0, 2.0 * PI)).sin();
    2.0 * s * s
}

/// `W'` alone for sine-Gordon.
pub fn sine_gordon_slope(phi: f64) -> f64 {
    offset_from_lattice(phi, 0.0, 2.0 * PI).sin()
}

/// `φ − w` for the nearest lattice point `w = offset + k·period`.
fn offset_from_lattice(phi: f64, offset: f64, period: f64) -> f64 {
    let k = ((phi - offset) / period).round();
    phi - (offset + period * k)
}

/// Wells of sine-Gordon inside `[lo, hi]`: `2πk`.
pub fn sine_gordon_wells(lo: f64, hi: f64) -> Vec<f64> {
    lattice(0.0, 2.0 * PI, lo, hi)
}

fn lattice(offset: f64, period: f64, lo: f64, hi: f64) -> Vec<f64> {
    let kmin = ((lo - offset) / period).ceil() as i64;
    let kmax = ((hi - offset) / period).floor() as i64;
    (kmin..=kmax).map(|k| offset + period * k as f64).collect()
}

/// Double sine-Gordon, branch `η > −1/4`:
/// `W = 4/(1+4|η|) [η(1 − cos φ) + 1 + cos(φ/2)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsgOne {
    pub eta: f64,
}

impl DsgOne {
    fn amp(&self) -> f64 {
        4.0 / (1.0 + 4.0 * self.eta.abs())
    }

    pub fn jet(&self, phi: f64) -> Jet {
        let a = self.amp();
        let eta = self.eta;
        // with t = φ − (2π + 4πk): cos²(φ/4) = sin²(t/4), sin²(φ/4) = cos²(t/4)
        // and cos(φ/4) sin(φ/4) = −sin(t/4) cos(t/4)
        let t = offset_from_lattice(phi, 2.0 * PI, 4.0 * PI);
        let (st, ct) = (0.25 * t).sin_cos();
        let c2 = (0.5 * phi).cos();
        let s2 = (0.5 * phi).sin();
        Jet {
            // (1 + cos(φ/2)) = 2cos²(φ/4), (1 − cos(φ/2)) = 2sin²(φ/4)
            w: a * 2.0 * st * st * (1.0 + 4.0 * eta * ct * ct),
            d1: -a * st * ct * (4.0 * eta * c2 - 1.0),
            d2: a * (eta * phi.cos() - 0.25 * c2),
            d3: a * (-eta * phi.sin() + 0.125 * s2),
        }
    }

    /// Closed-form `V` and `V'`.
    pub fn transformed(&self, phi: f64) -> (f64, f64) {
        let eta = self.eta;
        let norm = 1.0 + 4.0 * eta.abs();
        let c2 = (0.5 * phi).cos();
        let s2 = (0.5 * phi).sin();
        let c4 = (0.25 * phi).cos();
        let one_plus = 2.0 * c4 * c4;
        let den = 1.0 + 2.0 * eta * (1.0 - c2);
        let v = (1.0 + 4.0 * eta) / norm - (2.0 * eta / norm) * one_plus * one_plus / den;
        let vp = (2.0 * eta / norm) * one_plus * s2 * (1.0 + 3.0 * eta - eta * c2) / (den * den);
        (v, vp)
    }

    /// Wells `2π + 4πk` inside `[lo, hi]`.
    pub fn wells(lo: f64, hi: f64) -> Vec<f64> {
        lattice(2.0 * PI, 4.0 * PI, lo, hi)
    }
}

/// Double sine-Gordon, branch `η < −1/4`:
/// `W = 8|η|/(1+4|η|) [cos(φ/2) − 1/(4η)]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsgTwo {
    pub eta: f64,
    /// `ζ_η = 2 arccos(1/(4η))`.
    pub zeta: f64,
}

impl DsgTwo {
    pub fn new(eta: f64) -> Self {
        Self {
            eta,
            zeta: 2.0 * (1.0 / (4.0 * eta)).acos(),
        }
    }

    fn amp(&self) -> f64 {
        8.0 * self.eta.abs() / (1.0 + 4.0 * self.eta.abs())
    }

    fn nearest_well(&self, phi: f64) -> f64 {
        let period = 4.0 * PI;
        let k = (phi / period).round();
        let base = k * period;
        let candidates = [
            base - self.zeta,
            base + self.zeta,
            base + period - self.zeta,
            base - period + self.zeta,
        ];
        candidates
            .into_iter()
            .min_by(|a, b| (a - phi).abs().total_cmp(&(b - phi).abs()))
            .unwrap_or(base)
    }

    pub fn jet(&self, phi: f64) -> Jet {
        let b = self.amp();
        let zw = self.nearest_well(phi);
        // cos(φ/2) − cos(ζ/2) = −2 sin((φ+ζ)/4) sin((φ−ζ)/4)
        let g = -2.0 * (0.25 * (phi + zw)).sin() * (0.25 * (phi - zw)).sin();
        let s2 = (0.5 * phi).sin();
        let c2 = (0.5 * phi).cos();
        let g1 = -0.5 * s2;
        let g2 = -0.25 * c2;
        let g3 = 0.125 * s2;
        Jet {
            w: b * g * g,
            d1: 2.0 * b * g * g1,
            d2: 2.0 * b * (g1 * g1 + g * g2),
            d3: 2.0 * b * (3.0 * g1 * g2 + g * g3),
        }
    }

    pub fn transformed(&self, phi: f64) -> (f64, f64) {
        let ae = self.eta.abs();
        let norm = 1.0 + 4.0 * ae;
        let v = (4.0 * ae / norm) * (1.0 - (0.5 * phi).cos() / (4.0 * self.eta));
        let vp = -(0.5 * phi).sin() / (2.0 * norm);
        (v, vp)
    }

    /// Wells `±ζ_η + 4πk` inside `[lo, hi]`.
    pub fn wells(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut w = lattice(self.zeta, 4.0 * PI, lo, hi);
        w.extend(lattice(-self.zeta, 4.0 * PI, lo, hi));
        w.sort_by(f64::total_cmp);
        w
    }
}
