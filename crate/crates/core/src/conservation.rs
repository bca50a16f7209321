//! Discrete energy, momentum and the Lorentz invariant `M = E² − P²` on a
//! uniform grid.
//!
//! `E = ½∫(φ₂² + (∂ₓφ₁)² + 2W(φ₁))` uses forward differences for the
//! gradient term and the trapezoid rule for the rest; `P = ∫φ₂∂ₓφ₁` uses
//! centred differences. The same discretisation provides the first and
//! second variations used by the expansion checks.

use serde::Serialize;

use crate::numerics::centered_diff;
use crate::potentials::Potential;

/// `(E, P, M)` with `M = E² − P²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedTriple {
    pub energy: f64,
    pub momentum: f64,
    pub invariant: f64,
}

impl ConservedTriple {
    pub fn new(energy: f64, momentum: f64) -> Self {
        Self {
            energy,
            momentum,
            invariant: energy * energy - momentum * momentum,
        }
    }
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Discrete energy.
pub fn energy(potential: &Potential, phi1: &[f64], phi2: &[f64], dx: f64) -> f64 {
    let n = phi1.len();
    let mut local = 0.0;
    for i in 0..n {
        local += trapezoid_weight(i, n) * (0.5 * phi2[i] * phi2[i] + potential.value(phi1[i]));
    }
    let mut grad = 0.0;
    for i in 0..n.saturating_sub(1) {
        let d = phi1[i + 1] - phi1[i];
        grad += d * d;
    }
    local * dx + 0.5 * grad / dx
}

/// `∫a₂ ∂ₓb₁` with trapezoid weights and centred differences.
pub fn momentum_form(a2: &[f64], b1: &[f64], dx: f64) -> f64 {
    let d = centered_diff(b1, dx);
    let n = a2.len();
    (0..n)
        .map(|i| trapezoid_weight(i, n) * a2[i] * d[i])
        .sum::<f64>()
        * dx
}

/// Discrete momentum `P = ∫φ₂∂ₓφ₁`.
pub fn momentum(phi1: &[f64], phi2: &[f64], dx: f64) -> f64 {
    momentum_form(phi2, phi1, dx)
}

/// `(E, P, M)` of a state.
pub fn conserved(potential: &Potential, phi1: &[f64], phi2: &[f64], dx: f64) -> ConservedTriple {
    ConservedTriple::new(energy(potential, phi1, phi2, dx), momentum(phi1, phi2, dx))
}

/// First variation `δE[φ](u)` of the discrete energy.
pub fn energy_variation(
    potential: &Potential,
    phi: (&[f64], &[f64]),
    u: (&[f64], &[f64]),
    dx: f64,
) -> f64 {
    let (p1, p2) = phi;
    let (u1, u2) = u;
    let n = p1.len();
    let mut local = 0.0;
    for i in 0..n {
        local +=
            trapezoid_weight(i, n) * (p2[i] * u2[i] + potential.first_derivative(p1[i]) * u1[i]);
    }
    let mut grad = 0.0;
    for i in 0..n.saturating_sub(1) {
        grad += (p1[i + 1] - p1[i]) * (u1[i + 1] - u1[i]);
    }
    local * dx + grad / dx
}

/// Second variation `½δ²E[φ](u, u)` of the discrete energy.
pub fn energy_hessian_half(
    potential: &Potential,
    phi1: &[f64],
    u: (&[f64], &[f64]),
    dx: f64,
) -> f64 {
    let (u1, u2) = u;
    let n = phi1.len();
    let mut local = 0.0;
    for i in 0..n {
        local +=
            trapezoid_weight(i, n) * (u2[i] * u2[i] + potential.jet(phi1[i]).d2 * u1[i] * u1[i]);
    }
    let mut grad = 0.0;
    for i in 0..n.saturating_sub(1) {
        let d = u1[i + 1] - u1[i];
        grad += d * d;
    }
    0.5 * (local * dx + grad / dx)
}

/// First variation `δP[φ](u)` of the discrete momentum.
pub fn momentum_variation(phi: (&[f64], &[f64]), u: (&[f64], &[f64]), dx: f64) -> f64 {
    momentum_form(phi.1, u.0, dx) + momentum_form(u.1, phi.0, dx)
}
