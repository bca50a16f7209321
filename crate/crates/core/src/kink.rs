//! Static kink profiles `H'' = W'(H)` connecting two adjacent wells, their
//! Lorentz boosts, and the repulsivity profile `P(x) = V(H(x))`.
//!
//! The profile is the inverse of
//! `G(h) = ∫_{ζ₀}^{h} ds / √(2W(s))`, `ζ₀ = (ζ₋ + ζ₊)/2`, so `H(0) = ζ₀`.
//! The logarithmic endpoint singularities of the integrand are subtracted
//! analytically: with `r(s) = 1/√(2W(s)) − 1/(ω₊(ζ₊ − s)) − 1/(ω₋(s − ζ₋))`,
//! which is bounded on `[ζ₋, ζ₊]`,
//! `G(h) = ∫_{ζ₀}^{h} r + (1/ω₊) log((ζ₊−ζ₀)/(ζ₊−h)) + (1/ω₋) log((h−ζ₋)/(ζ₀−ζ₋))`.
//! Where the profile is within `1e−8` of a well it is continued by the
//! two-term tail series `H − ζ₊ = −λ₊e^{−ω₊x} + b₊e^{−2ω₊x}`,
//! `H − ζ₋ = λ₋e^{ω₋x} + b₋e^{2ω₋x}`, `b± = W'''(ζ±) λ±² / (6ω±²)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::interp::{apply4, lagrange4_weights};
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::{linear_fit, trapezoid};
use crate::potentials::{Potential, TransformedPotential, WellPair};

/// Distance to the well below which the tail series replaces inversion.
pub const TAIL_HANDOFF: f64 = 1e-8;

/// Grid request for [`build_kink`]; the half-width defaults to `20/ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkGrid {
    pub dx: f64,
    pub half_width: Option<f64>,
}

impl KinkGrid {
    pub fn new(dx: f64) -> Self {
        Self {
            dx,
            half_width: None,
        }
    }

    pub fn with_half_width(dx: f64, r: f64) -> Self {
        Self {
            dx,
            half_width: Some(r),
        }
    }
}

/// Exponential tail constants on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailConstants {
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub b_minus: f64,
    pub b_plus: f64,
}

impl TailConstants {
    /// `(H, H', H'', H''')` and the distance to the nearer well from the
    /// tail series at `x` (left series for `x < 0`).
    pub fn series(&self, left: f64, right: f64, x: f64) -> ([f64; 4], f64) {
        if x < 0.0 {
            let w = self.omega_minus;
            let e = (w * x).exp();
            let a = self.lambda_minus * e;
            let b = self.b_minus * e * e;
            let gap = a + b;
            (
                [
                    left + gap,
                    w * (a + 2.0 * b),
                    w * w * (a + 4.0 * b),
                    w * w * w * (a + 8.0 * b),
                ],
                gap,
            )
        } else {
            let w = self.omega_plus;
            let e = (-w * x).exp();
            let a = self.lambda_plus * e;
            let b = self.b_plus * e * e;
            let gap = a - b;
            (
                [
                    right - gap,
                    w * (a - 2.0 * b),
                    -w * w * (a - 4.0 * b),
                    w * w * w * (a - 8.0 * b),
                ],
                gap,
            )
        }
    }

    fn leading_gap(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.lambda_minus * (self.omega_minus * x).exp()
        } else {
            self.lambda_plus * (-self.omega_plus * x).exp()
        }
    }
}

/// Sampled kink profile on `x_i = −R + i·dx`, `i = 0..n`, with `x = 0` on
/// the grid.
#[derive(Debug, Clone)]
pub struct KinkProfile {
    potential: Potential,
    pair: WellPair,
    pub dx: f64,
    pub r: f64,
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub hp: Vec<f64>,
    pub hpp: Vec<f64>,
    pub hppp: Vec<f64>,
    /// Distance to the nearer well (`H − ζ₋` for `x < 0`, `ζ₊ − H` for
    /// `x ≥ 0`), accurate in the tails where `H` itself rounds to the well.
    pub gap: Vec<f64>,
    pub tails: TailConstants,
    /// `‖H'‖²` by the trapezoid rule on the grid.
    pub norm_sq: f64,
}

struct Inverter<'a> {
    potential: &'a Potential,
    left: f64,
    right: f64,
    zeta0: f64,
    wm: f64,
    wp: f64,
}

impl Inverter<'_> {
    fn regular_part(&self, s: f64) -> f64 {
        let w = self.potential.value(s);
        1.0 / (2.0 * w).sqrt()
            - 1.0 / (self.wp * (self.right - s))
            - 1.0 / (self.wm * (s - self.left))
    }

    fn integral(&self, a: f64, b: f64) -> Result<f64> {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-14,
            max_panels: 2000,
        };
        Ok(integrate(|s| self.regular_part(s), a, b, opts)?.value)
    }

    fn log_part(&self, h: f64) -> f64 {
        ((self.right - self.zeta0) / (self.right - h)).ln() / self.wp
            + ((h - self.left) / (self.zeta0 - self.left)).ln() / self.wm
    }
}

/// Builds the kink connecting `pair.left` (as `x → −∞`) to `pair.right`.
pub fn build_kink(potential: &Potential, pair: &WellPair, grid: KinkGrid) -> Result<KinkProfile> {
    let (left, right) = (pair.left, pair.right);
    let (wm, wp) = (pair.omega_minus, pair.omega_plus);
    if !(grid.dx > 0.0 && grid.dx.is_finite()) {
        return Err(Error::invalid(format!(
            "dx must be positive, got {}",
            grid.dx
        )));
    }
    let omega_max = wm.max(wp);
    if grid.dx * omega_max > 0.5 {
        return Err(Error::GridTooCoarse(format!(
            "dx = {} exceeds 0.5/ω_max = {}",
            grid.dx,
            0.5 / omega_max
        )));
    }
    let r_req = grid.half_width.unwrap_or(20.0 / pair.omega());
    if !(r_req > 0.0) {
        return Err(Error::invalid(format!(
            "half-width must be positive, got {r_req}"
        )));
    }
    let n_half = (r_req / grid.dx).ceil() as usize;
    let r = n_half as f64 * grid.dx;
    let n = 2 * n_half + 1;

    let inv = Inverter {
        potential,
        left,
        right,
        zeta0: pair.midpoint(),
        wm,
        wp,
    };
    let zeta0 = inv.zeta0;

    // Tail constants from the full regular integrals.
    let i_plus = inv.integral(zeta0, right)?;
    let i_minus = inv.integral(zeta0, left)?;
    let c_plus = i_plus + (right - zeta0).ln() / wp + ((right - left) / (zeta0 - left)).ln() / wm;
    let c_minus = i_minus + ((right - zeta0) / (right - left)).ln() / wp - (zeta0 - left).ln() / wm;
    let lambda_plus = (wp * c_plus).exp();
    let lambda_minus = (-wm * c_minus).exp();
    let jl = potential.jet(left);
    let jr = potential.jet(right);
    let tails = TailConstants {
        omega_minus: wm,
        omega_plus: wp,
        lambda_minus,
        lambda_plus,
        b_minus: jl.d3 * lambda_minus * lambda_minus / (6.0 * wm * wm),
        b_plus: jr.d3 * lambda_plus * lambda_plus / (6.0 * wp * wp),
    };

    let x: Vec<f64> = (0..n)
        .map(|i| (i as f64 - n_half as f64) * grid.dx)
        .collect();
    let mut h = vec![0.0; n];
    let mut gap = vec![0.0; n];
    let mut tail_mask = vec![false; n];
    h[n_half] = zeta0;
    gap[n_half] = right - zeta0;

    for dir in [1isize, -1] {
        let mut h_prev = zeta0;
        let mut i_prev = 0.0; // ∫_{ζ₀}^{h_prev} r
        let mut in_tail = false;
        let mut k = 1usize;
        while k <= n_half {
            let idx = (n_half as isize + dir * k as isize) as usize;
            let xi = x[idx];
            if in_tail || tails.leading_gap(xi) < TAIL_HANDOFF {
                in_tail = true;
                let (vals, g) = tails.series(left, right, xi);
                h[idx] = vals[0];
                gap[idx] = g;
                tail_mask[idx] = true;
                k += 1;
                continue;
            }
            let (hi_new, ii_new) = invert_step(&inv, xi, h_prev, i_prev, dir)?;
            h[idx] = hi_new;
            gap[idx] = if dir > 0 {
                right - hi_new
            } else {
                hi_new - left
            };
            h_prev = hi_new;
            i_prev = ii_new;
            k += 1;
        }
    }

    let mut hp = vec![0.0; n];
    let mut hpp = vec![0.0; n];
    let mut hppp = vec![0.0; n];
    for i in 0..n {
        if tail_mask[i] {
            let (vals, _) = tails.series(left, right, x[i]);
            hp[i] = vals[1];
            hpp[i] = vals[2];
            hppp[i] = vals[3];
        } else {
            let j = potential.jet(h[i]);
            let y = (2.0 * j.w).max(0.0).sqrt();
            hp[i] = y;
            hpp[i] = j.d1;
            hppp[i] = y * j.d2;
        }
    }

    let g_left = gap[0];
    let g_right = gap[n - 1];
    if g_left.max(g_right) > 0.1 * pair.width() {
        return Err(Error::DomainTooSmall(format!(
            "|H(±R) − ζ±| = {:.3e} exceeds 0.1·(ζ₊−ζ₋) at R = {r}",
            g_left.max(g_right)
        )));
    }

    let sq: Vec<f64> = hp.iter().map(|v| v * v).collect();
    let norm_sq = trapezoid(&sq, grid.dx);
    Ok(KinkProfile {
        potential: potential.clone(),
        pair: *pair,
        dx: grid.dx,
        r,
        x,
        h,
        hp,
        hpp,
        hppp,
        gap,
        tails,
        norm_sq,
    })
}

/// Safeguarded Newton solve of `G(h) = x`, integrating the regular part
/// incrementally from the previous node. Returns `(h, ∫_{ζ₀}^{h} r)`.
fn invert_step(inv: &Inverter, x: f64, h_prev: f64, i_prev: f64, dir: isize) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = if dir > 0 {
        (h_prev, inv.right)
    } else {
        (inv.left, h_prev)
    };
    let g_of = |h: f64| -> Result<(f64, f64)> {
        let inc = inv.integral(h_prev, h)?;
        Ok((i_prev + inc + inv.log_part(h), i_prev + inc))
    };
    // first guess: linear extrapolation using G' = 1/√(2W)
    let y_prev = (2.0 * inv.potential.value(h_prev)).sqrt();
    let g_prev = i_prev + inv.log_part(h_prev);
    let mut h = h_prev + (x - g_prev) * y_prev;
    if !(h > lo && h < hi) {
        h = 0.5 * (lo + hi);
    }
    let tol = 4.0 * f64::EPSILON * (inv.right - inv.left);
    for _ in 0..100 {
        let (g, ii) = g_of(h)?;
        let resid = g - x;
        if resid > 0.0 {
            hi = h;
        } else {
            lo = h;
        }
        let y = (2.0 * inv.potential.value(h)).sqrt();
        let step = resid * y;
        if step.abs() <= tol || hi - lo <= tol {
            return Ok((h, ii));
        }
        let mut next = h - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        h = next;
    }
    Err(Error::InversionFailure {
        x,
        reason: "Newton iteration did not converge".into(),
    })
}

/// Independent route to `‖H'‖² = ∫_{ζ₋}^{ζ₊} √(2W(s)) ds`.
pub fn energy_integral(potential: &Potential, pair: &WellPair) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        max_panels: 2000,
    };
    Ok(integrate(
        |s| (2.0 * potential.value(s)).max(0.0).sqrt(),
        pair.left,
        pair.right,
        opts,
    )?
    .value)
}

impl KinkProfile {
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn pair(&self) -> &WellPair {
        &self.pair
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `(H, H', H'', H''')` at any `ξ`: cubic interpolation on the grid, the
    /// tail series outside it.
    pub fn eval(&self, xi: f64) -> [f64; 4] {
        let x0 = self.x[0];
        if xi < x0 || xi > self.r {
            return self.tails.series(self.pair.left, self.pair.right, xi).0;
        }
        let (s, w) = lagrange4_weights(x0, self.dx, self.len(), xi);
        [
            apply4(&self.h, s, &w),
            apply4(&self.hp, s, &w),
            apply4(&self.hpp, s, &w),
            apply4(&self.hppp, s, &w),
        ]
    }

    /// `x = G(h)`: the position where the profile takes the value `h`.
    pub fn position_of(&self, h: f64) -> Result<f64> {
        if !(h > self.pair.left && h < self.pair.right) {
            return Err(Error::invalid(format!(
                "{h} is outside ({}, {})",
                self.pair.left, self.pair.right
            )));
        }
        let inv = Inverter {
            potential: &self.potential,
            left: self.pair.left,
            right: self.pair.right,
            zeta0: self.pair.midpoint(),
            wm: self.pair.omega_minus,
            wp: self.pair.omega_plus,
        };
        Ok(inv.integral(inv.zeta0, h)? + inv.log_part(h))
    }
}

/// Least-squares fits of `log|H − ζ±|` on the outer 20% of each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub omega_minus: f64,
    pub lambda_minus: f64,
    pub omega_plus: f64,
    pub lambda_plus: f64,
    /// Largest deviation of `log gap` from the fitted line.
    pub residual: f64,
}

/// Largest accepted deviation of `log gap` from a straight line.
pub const TAIL_FIT_MAX_RESIDUAL: f64 = 1e-2;

pub fn tail_fit(profile: &KinkProfile) -> Result<TailFit> {
    let fit = fit_tails(profile);
    if !(fit.residual <= TAIL_FIT_MAX_RESIDUAL)
        || !(fit.lambda_minus > 0.0 && fit.lambda_plus > 0.0)
    {
        return Err(Error::DomainTooSmall(format!(
            "outer 20% of the grid is not exponential (log residual {:.3e})",
            fit.residual
        )));
    }
    Ok(fit)
}

fn fit_tails(profile: &KinkProfile) -> TailFit {
    let n = profile.len();
    let cut = 0.8 * profile.r;
    let mut out = [(0.0, 0.0); 2];
    let mut residual: f64 = 0.0;
    for (side, sign) in [(0usize, -1.0), (1, 1.0)] {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n)
            .filter(|&i| sign * profile.x[i] >= cut && profile.gap[i] > 0.0)
            .map(|i| (profile.x[i].abs(), profile.gap[i].ln()))
            .unzip();
        if xs.len() < 2 {
            return TailFit {
                omega_minus: f64::NAN,
                lambda_minus: f64::NAN,
                omega_plus: f64::NAN,
                lambda_plus: f64::NAN,
                residual: f64::INFINITY,
            };
        }
        let (a, b) = linear_fit(&xs, &ys);
        for (x, y) in xs.iter().zip(&ys) {
            residual = residual.max((y - a - b * x).abs());
        }
        out[side] = (-b, a.exp());
    }
    TailFit {
        omega_minus: out[0].0,
        lambda_minus: out[0].1,
        omega_plus: out[1].0,
        lambda_plus: out[1].1,
        residual,
    }
}

/// Residual diagnostics of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KinkResiduals {
    /// `max|H' − √(2W(H))| / max|H'|`.
    pub first_integral: f64,
    /// `max|H'' − W'(H)|` for the stored second derivative.
    pub second_derivative: f64,
    /// `max|D²H − W'(H)|` with the three-point second difference.
    pub second_difference: f64,
    /// Largest deviation of `log|H − ζ±|` from the tail fit.
    pub asymptotic_fit: f64,
}

pub fn residuals(profile: &KinkProfile) -> KinkResiduals {
    let n = profile.len();
    let pot = &profile.potential;
    let ymax = profile.hp.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut fi: f64 = 0.0;
    let mut d2: f64 = 0.0;
    let mut dd: f64 = 0.0;
    let h2 = profile.dx * profile.dx;
    for i in 0..n {
        let j = pot.jet(profile.h[i]);
        let y = (2.0 * j.w).max(0.0).sqrt();
        fi = fi.max((profile.hp[i] - y).abs());
        d2 = d2.max((profile.hpp[i] - j.d1).abs());
        if i > 0 && i + 1 < n {
            let lap = (profile.h[i + 1] - 2.0 * profile.h[i] + profile.h[i - 1]) / h2;
            dd = dd.max((lap - j.d1).abs());
        }
    }
    KinkResiduals {
        first_integral: fi / ymax,
        second_derivative: d2,
        second_difference: dd,
        asymptotic_fit: fit_tails(profile).residual,
    }
}

/// Lorentz-boosted kink `H_{c,y}(x) = H(γ(x − y))`, `γ = 1/√(1 − c²)`.
#[derive(Debug, Clone)]
pub struct BoostedKink {
    pub profile: Arc<KinkProfile>,
    pub c: f64,
    pub gamma: f64,
    pub y: f64,
}

/// Boosts a profile to speed `c`, `|c| < 1`, centred at `y = 0`.
pub fn boost(profile: Arc<KinkProfile>, c: f64) -> Result<BoostedKink> {
    if !(c.abs() < 1.0) {
        return Err(Error::invalid(format!(
            "speed must satisfy |c| < 1, got {c}"
        )));
    }
    Ok(BoostedKink {
        profile,
        c,
        gamma: lorentz_gamma(c),
        y: 0.0,
    })
}

/// `γ = 1/√(1 − c²)`.
pub fn lorentz_gamma(c: f64) -> f64 {
    1.0 / (1.0 - c * c).sqrt()
}

impl BoostedKink {
    pub fn at(&self, y: f64) -> Self {
        Self { y, ..self.clone() }
    }

    /// `(H_{c,y}, ∂ₓH_{c,y}, ∂ₓ²H_{c,y}, ∂ₓ³H_{c,y})` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        let g = self.gamma;
        let v = self.profile.eval(g * (x - self.y));
        [v[0], g * v[1], g * g * v[2], g * g * g * v[3]]
    }

    /// The travelling-wave state `(H_c, −c ∂ₓH_c)` at `x`.
    pub fn state(&self, x: f64) -> (f64, f64) {
        let v = self.eval(x);
        (v[0], -self.c * v[1])
    }
}

/// `P = V(H)`, `P' = H' V'(H)` and `Q = (log H')'' = (W''(H) − P)/2` on the
/// profile grid.
#[derive(Debug, Clone, Serialize)]
pub struct RepulsivityProfile {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub p_prime: Vec<f64>,
    pub q: Vec<f64>,
    /// Continuum edge `ω² = min(W''(ζ₋), W''(ζ₊))`.
    pub omega_sq_floor: f64,
}

pub fn repulsivity_profile(profile: &KinkProfile, tp: &TransformedPotential) -> RepulsivityProfile {
    let n = profile.len();
    let mut p = vec![0.0; n];
    let mut pp = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        let h = profile.h[i];
        p[i] = tp.value(h);
        pp[i] = profile.hp[i] * tp.derivative(h);
        q[i] = 0.5 * (profile.potential.jet(h).d2 - p[i]);
    }
    let omega = profile.pair.omega();
    RepulsivityProfile {
        x: profile.x.clone(),
        p,
        p_prime: pp,
        q,
        omega_sq_floor: omega * omega,
    }
}
