//! Time evolution of `φ_tt − φ_xx + W'(φ) = 0` written as the first-order
//! system `∂ₜφ₁ = φ₂`, `∂ₜφ₂ = ∂ₓ²φ₁ − W'(φ₁)`, with kink modulation.
//!
//! The integrator is Störmer–Verlet on a uniform grid with clamped ends and
//! an optional damping layer. At sample times the state is decomposed as
//! `p = 𝐇_{c,y} + u` with `⟨u, F_{c,y}⟩ = ⟨u, G_{c,y}⟩ = 0`, where
//! `T = ∂ₓ𝐇`, `D = ∂_c𝐇`, `G = JT`, `F = JD` and `J = [[0,1],[−1,0]]`.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;

use crate::conservation::{conserved, ConservedTriple};
use crate::error::{Error, Result};
use crate::io::Snapshot;
use crate::kink::{boost, build_kink, lorentz_gamma, BoostedKink, KinkGrid, KinkProfile};
use crate::numerics::interp::{apply4, lagrange4_weights};
use crate::numerics::roots::golden_min;
use crate::numerics::{centered_diff, trapezoid, trapezoid_dot};
use crate::potentials::custom::{parse_list, parse_number};
use crate::potentials::{make_family, Family, FamilyArgs, Potential, WellPair};
use crate::spectral::norm_c_parts;

/// Largest admissible `dt/dx`.
pub const CFL_LIMIT: f64 = 0.9;

/// Fraction of the domain (on each side) covered by the damping layer.
pub const SPONGE_FRACTION: f64 = 0.15;

/// Boundary treatment of the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// Endpoint values held fixed.
    Clamped,
    /// Clamped ends plus `−σ(x)φ₂` damping on the outer layer.
    Sponge,
}

impl Boundary {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "clamped" => Ok(Boundary::Clamped),
            "sponge" | "clamped+sponge" => Ok(Boundary::Sponge),
            other => Err(Error::Config(format!(
                "unknown boundary '{other}' (expected clamped or sponge)"
            ))),
        }
    }
}

/// Uniform simulation grid `x_i = −R + i·dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid {
    pub dx: f64,
    pub half_width: f64,
    pub boundary: Boundary,
    /// Peak damping rate `σ_max` of the cubic ramp.
    pub sponge_strength: f64,
}

impl SimGrid {
    fn nodes(&self) -> usize {
        2 * (self.half_width / self.dx).round() as usize + 1
    }
}

/// Discrete field `(φ₁, φ₂)` at time `t`.
#[derive(Debug, Clone)]
pub struct FieldState {
    potential: Potential,
    pub x0: f64,
    pub dx: f64,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub t: f64,
    pub step: u64,
    pub boundary: Boundary,
    sigma: Vec<f64>,
}

impl FieldState {
    /// Builds a state from samples; the ends of `phi1` become the clamped
    /// values.
    pub fn new(
        potential: Potential,
        grid: SimGrid,
        phi1: Vec<f64>,
        phi2: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.nodes();
        if phi1.len() != n || phi2.len() != n {
            return Err(Error::invalid(format!(
                "state has {}/{} samples, grid has {n}",
                phi1.len(),
                phi2.len()
            )));
        }
        let r = (n - 1) as f64 * grid.dx / 2.0;
        let sigma = (0..n)
            .map(|i| {
                let x = (-r + i as f64 * grid.dx).abs();
                let start = (1.0 - SPONGE_FRACTION) * r;
                if grid.boundary == Boundary::Sponge && x > start {
                    grid.sponge_strength * ((x - start) / (r - start)).powi(3)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            potential,
            x0: -r,
            dx: grid.dx,
            phi1,
            phi2,
            t: 0.0,
            step: 0,
            boundary: grid.boundary,
            sigma,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn len(&self) -> usize {
        self.phi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi1.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn half_width(&self) -> f64 {
        -self.x0
    }

    /// Damping profile `σ(x)`.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// Initial perturbation `u` added to the kink.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    None,
    /// `a·exp(−((x − x₀)/w)²)` on component 1 or 2.
    Gaussian {
        amplitude: f64,
        width: f64,
        center: f64,
        component: usize,
    },
    /// `a·(1 − ((x − x₀)/w)²)³` on `|x − x₀| < w`, velocity component.
    VelocityBump {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// Samples `(x, u₁, u₂)` on the simulation grid, read from CSV.
    File {
        path: PathBuf,
    },
}

impl Perturbation {
    /// Size parameter `δ` of the perturbation (its amplitude).
    pub fn amplitude(&self) -> f64 {
        match self {
            Perturbation::None | Perturbation::File { .. } => 0.0,
            Perturbation::Gaussian { amplitude, .. }
            | Perturbation::VelocityBump { amplitude, .. } => *amplitude,
        }
    }

    fn sample(&self, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = xs.len();
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        match self {
            Perturbation::None => {}
            Perturbation::Gaussian {
                amplitude,
                width,
                center,
                component,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::invalid("gaussian width must be positive"));
                }
                let target = match component {
                    1 => &mut u1,
                    2 => &mut u2,
                    other => {
                        return Err(Error::invalid(format!(
                            "component must be 1 or 2, got {other}"
                        )))
                    }
                };
                for (t, x) in target.iter_mut().zip(xs) {
                    let s = (x - center) / width;
                    *t = amplitude * (-s * s).exp();
                }
            }
            Perturbation::VelocityBump {
                amplitude,
                width,
                center,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::invalid("bump width must be positive"));
                }
                for (t, x) in u2.iter_mut().zip(xs) {
                    let s = (x - center) / width;
                    if s.abs() < 1.0 {
                        *t = amplitude * (1.0 - s * s).powi(3);
                    }
                }
            }
            Perturbation::File { path } => {
                let (x, a, b) = crate::io::read_perturbation(path)?;
                if x.len() != n
                    || x.iter()
                        .zip(xs)
                        .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs()))
                {
                    return Err(Error::invalid(format!(
                        "perturbation file {} does not match the simulation grid",
                        path.display()
                    )));
                }
                u1 = a;
                u2 = b;
            }
        }
        Ok((u1, u2))
    }
}

/// Kink `𝐇_c(x − y₀)` plus the perturbation, sampled on the grid.
pub fn make_state(
    bk: &BoostedKink,
    y0: f64,
    perturbation: &Perturbation,
    grid: SimGrid,
) -> Result<FieldState> {
    if !(grid.dx > 0.0 && grid.half_width > 4.0 * grid.dx) {
        return Err(Error::invalid(format!(
            "grid needs dx > 0 and half-width > 4 dx (dx = {}, R = {})",
            grid.dx, grid.half_width
        )));
    }
    let n = grid.nodes();
    let r = (n - 1) as f64 * grid.dx / 2.0;
    let xs: Vec<f64> = (0..n).map(|i| -r + i as f64 * grid.dx).collect();
    let (u1, u2) = perturbation.sample(&xs)?;
    let pair = bk.profile.pair();
    let sup = u1.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if sup >= pair.width() {
        return Err(Error::invalid(format!(
            "perturbation amplitude {sup} exceeds the well separation {}",
            pair.width()
        )));
    }
    let outside = xs
        .iter()
        .zip(u1.iter().zip(&u2))
        .filter(|(x, _)| x.abs() >= 0.5 * r)
        .fold(0.0f64, |a, (_, (p, q))| a.max(p.abs()).max(q.abs()));
    if outside > 1e-12 {
        return Err(Error::invalid(format!(
            "perturbation reaches {outside:e} outside |x| < R/2; move it inwards or enlarge the domain"
        )));
    }
    let k = bk.at(y0);
    let mut phi1 = Vec::with_capacity(n);
    let mut phi2 = Vec::with_capacity(n);
    for (i, x) in xs.iter().enumerate() {
        let (h1, h2) = k.state(*x);
        phi1.push(h1 + u1[i]);
        phi2.push(h2 + u2[i]);
    }
    phi2[0] = 0.0;
    phi2[n - 1] = 0.0;
    FieldState::new(bk.profile.potential().clone(), grid, phi1, phi2)
}

fn check_cfl(s: &FieldState, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= CFL_LIMIT * s.dx) {
        return Err(Error::CflViolation { dt, dx: s.dx });
    }
    Ok(())
}

fn kick(s: &mut FieldState, h: f64) {
    let n = s.len();
    let inv = 1.0 / (s.dx * s.dx);
    let damped = s.boundary == Boundary::Sponge;
    for i in 1..n - 1 {
        let p = s.phi1[i];
        let mut force =
            (s.phi1[i - 1] - 2.0 * p + s.phi1[i + 1]) * inv - s.potential.first_derivative(p);
        if damped {
            force -= s.sigma[i] * s.phi2[i];
        }
        s.phi2[i] += h * force;
    }
}

/// One Störmer–Verlet step: half kick, drift, half kick.
pub fn step(s: &mut FieldState, dt: f64) -> Result<()> {
    check_cfl(s, dt)?;
    kick(s, 0.5 * dt);
    let n = s.len();
    for i in 1..n - 1 {
        s.phi1[i] += dt * s.phi2[i];
    }
    kick(s, 0.5 * dt);
    s.step += 1;
    s.t = s.step as f64 * dt;
    if !s.phi1.iter().chain(&s.phi2).all(|v| v.is_finite()) {
        return Err(Error::BlowUp { t: s.t });
    }
    Ok(())
}

/// Advances `steps` steps.
pub fn evolve(s: &mut FieldState, dt: f64, steps: u64) -> Result<()> {
    for _ in 0..steps {
        step(s, dt)?;
    }
    Ok(())
}

/// `(E, P, M)` of the state.
pub fn state_conserved(s: &FieldState) -> ConservedTriple {
    conserved(&s.potential, &s.phi1, &s.phi2, s.dx)
}

/// Samples of `𝐇_{c,y}` and its generalised kernel on the simulation grid.
struct KinkFrame {
    c: f64,
    gamma: f64,
    /// `s = x − y`.
    s: Vec<f64>,
    h: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
    a3: Vec<f64>,
}

impl KinkFrame {
    fn new(profile: &KinkProfile, xs: &[f64], c: f64, y: f64) -> Self {
        let g = lorentz_gamma(c);
        let n = xs.len();
        let mut f = KinkFrame {
            c,
            gamma: g,
            s: Vec::with_capacity(n),
            h: Vec::with_capacity(n),
            a1: Vec::with_capacity(n),
            a2: Vec::with_capacity(n),
            a3: Vec::with_capacity(n),
        };
        for &x in xs {
            let v = profile.eval(g * (x - y));
            f.s.push(x - y);
            f.h.push(v[0]);
            f.a1.push(g * v[1]);
            f.a2.push(g * g * v[2]);
            f.a3.push(g * g * g * v[3]);
        }
        f
    }

    /// `u = p − 𝐇_{c,y}`.
    fn residual(&self, s: &FieldState) -> (Vec<f64>, Vec<f64>) {
        let u1 = s.phi1.iter().zip(&self.h).map(|(p, h)| p - h).collect();
        let u2 = s
            .phi2
            .iter()
            .zip(&self.a1)
            .map(|(p, a)| p + self.c * a)
            .collect();
        (u1, u2)
    }
}

/// Output of [`modulate`].
#[derive(Debug, Clone, Serialize)]
pub struct Modulation {
    pub c: f64,
    pub y: f64,
    /// `(⟨u, F_{c,y}⟩, ⟨u, G_{c,y}⟩)` at the solution.
    pub residuals: [f64; 2],
    /// `γ³‖H'‖²`, the scale of the leading Jacobian.
    pub scale: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub u1: Vec<f64>,
    #[serde(skip)]
    pub u2: Vec<f64>,
}

/// Orthogonality functionals and their Jacobian with respect to `(c, y)`.
fn modulation_system(s: &FieldState, f: &KinkFrame) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = s.len();
    let (c, g) = (f.c, f.gamma);
    let g2 = g * g;
    let g4 = g2 * g2;
    let (u1, u2) = f.residual(s);
    let w = |i: usize| {
        if i == 0 || i + 1 == n {
            0.5 * s.dx
        } else {
            s.dx
        }
    };
    let mut fv = [0.0; 2];
    let mut jac = [[0.0; 2]; 2];
    for i in 0..n {
        let (x, a1, a2, a3) = (f.s[i], f.a1[i], f.a2[i], f.a3[i]);
        let t = [a1, -c * a2];
        let d = [c * g2 * x * a1, -g2 * a1 - c * c * g2 * x * a2];
        let gg = [-c * a2, -a1];
        let ff = [d[1], -d[0]];
        let ca1 = c * g2 * a1 + c * g2 * x * a2;
        let ca2 = 2.0 * c * g2 * a2 + c * g2 * x * a3;
        let dc_d1 = (g2 + 2.0 * c * c * g4) * x * a1 + c * g2 * x * ca1;
        let dc_d2 = -2.0 * c * g4 * a1
            - g2 * ca1
            - (2.0 * c * g2 + 2.0 * c * c * c * g4) * x * a2
            - c * c * g2 * x * ca2;
        let dy_d1 = -c * g2 * (a1 + x * a2);
        let dy_d2 = g2 * a2 + c * c * g2 * (a2 + x * a3);
        let dc_f = [dc_d2, -dc_d1];
        let dy_f = [dy_d2, -dy_d1];
        let dc_g = [-a2 - c * ca2, -ca1];
        let dy_g = [c * a3, a2];
        let wi = w(i);
        let u = [u1[i], u2[i]];
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        fv[0] += wi * dot(u, ff);
        fv[1] += wi * dot(u, gg);
        // ∂u/∂c = −D, ∂u/∂y = T
        jac[0][0] += wi * (-dot(d, ff) + dot(u, dc_f));
        jac[0][1] += wi * (dot(t, ff) + dot(u, dy_f));
        jac[1][0] += wi * (-dot(d, gg) + dot(u, dc_g));
        jac[1][1] += wi * (dot(t, gg) + dot(u, dy_g));
    }
    (fv, jac)
}

/// Relative tolerance on the orthogonality residuals, in units of `γ³‖H'‖²`.
pub const MODULATION_TOL: f64 = 1e-12;

/// Newton iteration for `(c, y)` starting from `guess`. If that iteration
/// fails, it is restarted once from [`initial_guess`].
pub fn modulate(s: &FieldState, profile: &KinkProfile, guess: (f64, f64)) -> Result<Modulation> {
    newton(s, profile, guess).or_else(|first| {
        let cold = initial_guess(s, profile);
        if cold == guess {
            return Err(first);
        }
        newton(s, profile, cold)
    })
}

fn newton(s: &FieldState, profile: &KinkProfile, guess: (f64, f64)) -> Result<Modulation> {
    let xs = s.xs();
    let (mut c, mut y) = guess;
    if !(c.abs() < 1.0) {
        return Err(Error::ModulationFailure(format!(
            "initial speed {c} is not below 1"
        )));
    }
    let norm = profile.norm_sq;
    for it in 0..40 {
        let frame = KinkFrame::new(profile, &xs, c, y);
        let scale = frame.gamma.powi(3) * norm;
        let (fv, j) = modulation_system(s, &frame);
        if fv[0].abs() <= MODULATION_TOL * scale && fv[1].abs() <= MODULATION_TOL * scale {
            let (u1, u2) = frame.residual(s);
            return Ok(Modulation {
                c,
                y,
                residuals: fv,
                scale,
                iterations: it,
                u1,
                u2,
            });
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            return Err(Error::ModulationFailure(format!(
                "singular Jacobian at c = {c}, y = {y}"
            )));
        }
        let dc = (fv[0] * j[1][1] - fv[1] * j[0][1]) / det;
        let dy = (fv[1] * j[0][0] - fv[0] * j[1][0]) / det;
        let mut lambda = (1.0 / dy.abs()).min(1.0);
        while (c - lambda * dc).abs() >= 1.0 {
            lambda *= 0.5;
        }
        c -= lambda * dc;
        y -= lambda * dy;
        if !(c.is_finite() && y.is_finite()) || (y - guess.1).abs() > s.half_width() {
            return Err(Error::ModulationFailure(format!(
                "Newton left the kink family (c = {c}, y = {y}); the state is not near a kink"
            )));
        }
    }
    Err(Error::ModulationFailure(format!(
        "Newton did not converge from guess {guess:?}"
    )))
}

/// Starting point for [`modulate`] when no earlier sample exists: `y` where
/// `φ₁` crosses the midpoint of the wells, and `c = −P/E`, which is exact
/// for a boosted kink.
pub fn initial_guess(s: &FieldState, profile: &KinkProfile) -> (f64, f64) {
    let mid = profile.pair().midpoint();
    let t = state_conserved(s);
    let c = if t.energy > 0.0 {
        (-t.momentum / t.energy).clamp(-0.99, 0.99)
    } else {
        0.0
    };
    let centre = s.len() / 2;
    let y = (0..s.len() - 1)
        .filter(|&i| (s.phi1[i] - mid) * (s.phi1[i + 1] - mid) <= 0.0 && s.phi1[i] != s.phi1[i + 1])
        .min_by_key(|&i| i.abs_diff(centre))
        .map_or(0.0, |i| {
            s.x(i) + s.dx * (mid - s.phi1[i]) / (s.phi1[i + 1] - s.phi1[i])
        });
    (c, y)
}

/// `‖p(·+y) − 𝐇_c‖_{c,R}`: the norm of `u = p − 𝐇_{c,y}` over the nodes
/// with `|x − y| < R`.
pub fn local_distance(
    s: &FieldState,
    profile: &KinkProfile,
    c: f64,
    y: f64,
    r: f64,
) -> Result<f64> {
    if y - r < s.x0 || y + r > -s.x0 {
        return Err(Error::invalid(format!(
            "radius {r} around y = {y} exceeds the grid half-width {}",
            s.half_width()
        )));
    }
    Ok(distance_on(s, profile, c, y, Some(r)))
}

fn distance_on(s: &FieldState, profile: &KinkProfile, c: f64, y: f64, r: Option<f64>) -> f64 {
    let xs = s.xs();
    let frame = KinkFrame::new(profile, &xs, c, y);
    let (u1, u2) = frame.residual(s);
    let (lo, hi) = match r {
        Some(r) => {
            let lo = xs.iter().position(|&x| x - y > -r).unwrap_or(xs.len());
            let hi = xs.iter().rposition(|&x| x - y < r).map_or(lo, |i| i + 1);
            (lo, hi.max(lo))
        }
        None => (0, xs.len()),
    };
    norm_c_parts(&u1, &u2, c, frame.gamma, s.dx, lo..hi)
        .max(0.0)
        .sqrt()
}

/// `inf_y ‖p − 𝐇_{c,y}‖_c` by golden-section search within one unit of
/// `y_guess`. Returns `(distance, argmin)`.
pub fn orbital_distance(s: &FieldState, profile: &KinkProfile, c: f64, y_guess: f64) -> (f64, f64) {
    let (y, d) = golden_min(
        |y| distance_on(s, profile, c, y, None),
        y_guess - 1.0,
        y_guess + 1.0,
        1e-6,
    );
    (d, y)
}

/// `𝓛 = ∫[(∂ₓz₁)² + z₁² + z₂²]ρ²` with `z₁(x) = u₁(x/γ + y)`,
/// `z₂(x) = (u₂ + c∂ₓu₁)(x/γ + y)` and `ρ = sech(ωx/10)`.
pub fn rho_functional(s: &FieldState, u1: &[f64], u2: &[f64], c: f64, y: f64, omega: f64) -> f64 {
    let g = lorentz_gamma(c);
    let dx = s.dx;
    let du1 = centered_diff(u1, dx);
    let w: Vec<f64> = u2.iter().zip(&du1).map(|(a, b)| a + c * b).collect();
    // rest-frame window whose preimage stays two cells inside the grid
    let reach = (s.half_width() - 2.0 * dx - y.abs()).max(0.0) * g;
    let m = (reach / dx).floor() as i64;
    if m < 2 {
        return 0.0;
    }
    let n = s.len();
    let mut z1 = Vec::with_capacity((2 * m + 1) as usize);
    let mut z2 = Vec::with_capacity((2 * m + 1) as usize);
    let mut rho2 = Vec::with_capacity((2 * m + 1) as usize);
    for k in -m..=m {
        let x = k as f64 * dx;
        let (start, wt) = lagrange4_weights(s.x0, dx, n, x / g + y);
        z1.push(apply4(u1, start, &wt));
        z2.push(apply4(&w, start, &wt));
        let r = 1.0 / (omega * x / 10.0).cosh();
        rho2.push(r * r);
    }
    let dz1 = centered_diff(&z1, dx);
    let density: Vec<f64> = (0..z1.len())
        .map(|i| (dz1[i] * dz1[i] + z1[i] * z1[i] + z2[i] * z2[i]) * rho2[i])
        .collect();
    trapezoid(&density, dx)
}

/// `[model]` section of a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub family: Family,
    /// Explicit well pair; the first pair of the family when absent.
    pub pair: Option<(f64, f64)>,
    pub c0: f64,
    pub y0: f64,
}

/// `[grid]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dx: f64,
    pub dt: f64,
    /// Domain half-width; `40/ω` when absent.
    pub half_width: Option<f64>,
    pub t_end: f64,
    /// Steps between modulation samples.
    pub sample_every: u64,
    pub boundary: Boundary,
    pub sponge_strength: f64,
}

/// `[output]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Time between snapshots; no snapshots when absent.
    pub snapshot_every: Option<f64>,
    pub radii: Vec<f64>,
    /// Samples between evaluations of the orbital distance (0 disables it).
    pub orbital_every: usize,
}

/// A complete simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub perturbation: Perturbation,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig {
                family: Family::Phi6,
                pair: None,
                c0: 0.0,
                y0: 0.0,
            },
            grid: GridConfig {
                dx: 0.02,
                dt: 0.01,
                half_width: None,
                t_end: 200.0,
                sample_every: 10,
                boundary: Boundary::Sponge,
                sponge_strength: 5.0,
            },
            perturbation: Perturbation::Gaussian {
                amplitude: 0.01,
                width: 2.0,
                center: 0.0,
                component: 1,
            },
            output: OutputConfig {
                dir: None,
                snapshot_every: None,
                radii: vec![5.0, 10.0, 20.0],
                orbital_every: 0,
            },
        }
    }
}

impl RunConfig {
    /// Parses a `key = value` file with sections `[model]`, `[grid]`,
    /// `[perturbation]` and `[output]`. Missing keys take the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let ini = ini::Ini::load_from_str(text)
            .map_err(|e| Error::Config(format!("run configuration: {e}")))?;
        let mut cfg = RunConfig::default();
        let known = ["model", "grid", "perturbation", "output"];
        for (sec, _) in ini.iter() {
            if let Some(name) = sec {
                if !known.contains(&name) {
                    return Err(Error::Config(format!("unknown section [{name}]")));
                }
            }
        }
        let get = |sec: &str, key: &str| -> Option<String> {
            ini.section(Some(sec))
                .and_then(|s| s.get(key))
                .map(|v| v.split('#').next().unwrap_or("").trim().to_string())
        };
        let num = |sec: &str, key: &str| -> Result<Option<f64>> {
            get(sec, key).map(|v| parse_number(&v)).transpose()
        };
        let int = |sec: &str, key: &str| -> Result<Option<u64>> {
            get(sec, key)
                .map(|v| {
                    v.parse::<u64>().map_err(|_| {
                        Error::Config(format!("[{sec}] {key}: expected an integer, got '{v}'"))
                    })
                })
                .transpose()
        };

        if let Some(name) = get("model", "family") {
            let args = FamilyArgs {
                m: num("model", "m")?,
                m_list: get("model", "wells").map(|v| parse_list(&v)).transpose()?,
                eta: num("model", "eta")?,
                n: int("model", "n")?.map(|v| v as usize),
            };
            cfg.model.family = Family::from_name(&name, &args)?;
        }
        if let Some(p) = get("model", "pair") {
            let v = parse_list(&p)?;
            if v.len() != 2 {
                return Err(Error::Config(format!(
                    "[model] pair needs two wells, got '{p}'"
                )));
            }
            cfg.model.pair = Some((v[0], v[1]));
        }
        if let Some(v) = num("model", "c0")? {
            cfg.model.c0 = v;
        }
        if let Some(v) = num("model", "y0")? {
            cfg.model.y0 = v;
        }

        let g = &mut cfg.grid;
        if let Some(v) = num("grid", "dx")? {
            g.dx = v;
        }
        if let Some(v) = num("grid", "dt")? {
            g.dt = v;
        }
        g.half_width = num("grid", "half_width")?.or(g.half_width);
        if let Some(v) = num("grid", "t_end")? {
            g.t_end = v;
        }
        if let Some(v) = int("grid", "sample_every")? {
            g.sample_every = v;
        }
        if let Some(v) = get("grid", "boundary") {
            g.boundary = Boundary::parse(&v)?;
        }
        if let Some(v) = num("grid", "sponge_strength")? {
            g.sponge_strength = v;
        }

        if let Some(kind) = get("perturbation", "kind") {
            let amplitude = num("perturbation", "amplitude")?.unwrap_or(0.01);
            let width = num("perturbation", "width")?.unwrap_or(2.0);
            let center = num("perturbation", "center")?.unwrap_or(0.0);
            cfg.perturbation = match kind.as_str() {
                "none" => Perturbation::None,
                "gaussian" => Perturbation::Gaussian {
                    amplitude,
                    width,
                    center,
                    component: int("perturbation", "component")?.unwrap_or(1) as usize,
                },
                "velocity_bump" => Perturbation::VelocityBump {
                    amplitude,
                    width,
                    center,
                },
                "file" => Perturbation::File {
                    path: get("perturbation", "path")
                        .map(PathBuf::from)
                        .ok_or_else(|| Error::Config("[perturbation] kind = file needs a path".into()))?,
                },
                other => {
                    return Err(Error::Config(format!(
                        "unknown perturbation '{other}' (expected none, gaussian, velocity_bump or file)"
                    )))
                }
            };
        }

        let o = &mut cfg.output;
        if let Some(v) = get("output", "dir") {
            o.dir = Some(PathBuf::from(v));
        }
        o.snapshot_every = num("output", "snapshot_every")?.or(o.snapshot_every);
        if let Some(v) = get("output", "radii") {
            o.radii = parse_list(&v)?;
        }
        if let Some(v) = int("output", "orbital_every")? {
            o.orbital_every = v as usize;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a configuration file.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Checks ranges before any computation.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.dx > 0.0) {
            return Err(Error::invalid(format!("dx must be positive, got {}", g.dx)));
        }
        if !(g.dt > 0.0 && g.dt <= CFL_LIMIT * g.dx) {
            return Err(Error::CflViolation { dt: g.dt, dx: g.dx });
        }
        if !(g.t_end >= 0.0) {
            return Err(Error::invalid(format!(
                "t_end must be nonnegative, got {}",
                g.t_end
            )));
        }
        if g.sample_every == 0 {
            return Err(Error::invalid("sample_every must be at least 1"));
        }
        if !(self.model.c0.abs() < 1.0) {
            return Err(Error::invalid(format!(
                "speed must satisfy |c0| < 1, got {}",
                self.model.c0
            )));
        }
        if !(g.sponge_strength >= 0.0) {
            return Err(Error::invalid("sponge_strength must be nonnegative"));
        }
        if self.output.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::invalid("radii must be positive"));
        }
        Ok(())
    }

    /// Potential and well pair of the model.
    pub fn model_pair(&self) -> Result<(Potential, WellPair)> {
        let p = make_family(self.model.family.clone())?;
        let pair = match self.model.pair {
            Some((a, b)) => p.pair(a, b)?,
            None => p.pair_at(0)?,
        };
        Ok((p, pair))
    }
}

/// One modulation sample.
#[derive(Debug, Clone, Serialize)]
pub struct TrackSample {
    pub t: f64,
    pub c: f64,
    pub y: f64,
    pub conserved: ConservedTriple,
    /// Local distances, one per configured radius.
    pub local: Vec<f64>,
    /// `𝓛(t)`.
    pub lfun: f64,
    /// `(⟨u, F⟩, ⟨u, G⟩)`.
    pub residuals: [f64; 2],
    pub iterations: usize,
    /// `inf_y ‖p − 𝐇_{c₀,y}‖_{c₀}` when evaluated at this sample.
    pub orbital: Option<f64>,
}

/// Time series of modulation parameters and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ModulationTrack {
    pub radii: Vec<f64>,
    pub samples: Vec<TrackSample>,
}

/// Scalar summary of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: u64,
    pub t_end: f64,
    /// Mean of `c(t)` over the final 10% of the run.
    pub c_plus: f64,
    /// Standard deviation of `c(t)` over the same window.
    pub c_plus_std: f64,
    pub max_c_deviation: f64,
    /// `∫𝓛 dt`, trapezoid rule over the samples.
    pub l_integral: f64,
    pub l_peak: f64,
    /// Largest `𝓛` over the final 10% of the run.
    pub l_final: f64,
    /// `l_final / l_peak`.
    pub decay_ratio: f64,
    /// `max_t |E(t) − E(0)| / |E(0)|`.
    pub energy_drift: f64,
    /// `max_t |M(t) − M(0)| / |M(0)|`.
    pub invariant_drift: f64,
    pub max_residual: f64,
    /// Largest orbital distance over the evaluated samples.
    pub max_orbital: Option<f64>,
}

/// State, track and summary of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: FieldState,
    pub track: ModulationTrack,
    pub summary: RunSummary,
}

/// Prepared simulation: profile, state and modulation warm start.
pub struct Simulation {
    pub cfg: RunConfig,
    pub profile: Arc<KinkProfile>,
    pub pair: WellPair,
    pub state: FieldState,
    /// Last modulation parameters, used as the next Newton guess.
    pub guess: (f64, f64),
    track: ModulationTrack,
}

impl Simulation {
    /// Builds the kink (at a quarter of the simulation spacing) and the
    /// initial state.
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let (p, pair) = cfg.model_pair()?;
        let grid = sim_grid(&cfg, &pair);
        let profile = Arc::new(build_kink(&p, &pair, KinkGrid::new(0.25 * cfg.grid.dx))?);
        let bk = boost(profile.clone(), cfg.model.c0)?;
        let state = make_state(&bk, cfg.model.y0, &cfg.perturbation, grid)?;
        let guess = (cfg.model.c0, cfg.model.y0);
        Ok(Self::from_parts(cfg, profile, pair, state, guess))
    }

    /// Continues from a snapshot taken with the same grid and time step.
    pub fn resume(cfg: RunConfig, snap: Snapshot) -> Result<Self> {
        cfg.validate()?;
        let (p, pair) = cfg.model_pair()?;
        let grid = sim_grid(&cfg, &pair);
        if snap.phi1.len() != grid.nodes() || (snap.dx - grid.dx).abs() > 1e-12 * grid.dx {
            return Err(Error::invalid(format!(
                "snapshot has {} nodes at dx = {}, configuration needs {} at dx = {}",
                snap.phi1.len(),
                snap.dx,
                grid.nodes(),
                grid.dx
            )));
        }
        if snap.meta.dt != cfg.grid.dt {
            return Err(Error::invalid(format!(
                "snapshot was taken with dt = {}, configuration has dt = {}",
                snap.meta.dt, cfg.grid.dt
            )));
        }
        let profile = Arc::new(build_kink(&p, &pair, KinkGrid::new(0.25 * cfg.grid.dx))?);
        let mut state = FieldState::new(p, grid, snap.phi1, snap.phi2)?;
        state.step = snap.meta.step;
        state.t = snap.meta.t;
        Ok(Self::from_parts(
            cfg,
            profile,
            pair,
            state,
            (snap.meta.c, snap.meta.y),
        ))
    }

    fn from_parts(
        cfg: RunConfig,
        profile: Arc<KinkProfile>,
        pair: WellPair,
        state: FieldState,
        guess: (f64, f64),
    ) -> Self {
        let radii = cfg.output.radii.clone();
        Self {
            cfg,
            profile,
            pair,
            state,
            guess,
            track: ModulationTrack {
                radii,
                samples: Vec::new(),
            },
        }
    }

    /// Modulates the current state and appends a sample.
    pub fn sample(&mut self, with_orbital: bool) -> Result<&TrackSample> {
        let m = modulate(&self.state, &self.profile, self.guess)?;
        self.guess = (m.c, m.y);
        let local = self
            .cfg
            .output
            .radii
            .iter()
            .map(|&r| {
                let r = r.min(self.state.half_width() - m.y.abs() - self.state.dx);
                distance_on(&self.state, &self.profile, m.c, m.y, Some(r))
            })
            .collect();
        let lfun = rho_functional(&self.state, &m.u1, &m.u2, m.c, m.y, self.pair.omega());
        let orbital = with_orbital
            .then(|| orbital_distance(&self.state, &self.profile, self.cfg.model.c0, m.y).0);
        self.track.samples.push(TrackSample {
            t: self.state.t,
            c: m.c,
            y: m.y,
            conserved: state_conserved(&self.state),
            local,
            lfun,
            residuals: m.residuals,
            iterations: m.iterations,
            orbital,
        });
        Ok(self.track.samples.last().expect("sample just pushed"))
    }

    /// Runs to `t_end`, sampling every `sample_every` steps. `on_step` is
    /// called after every step (used for snapshots).
    pub fn run_with<F: FnMut(&FieldState, (f64, f64)) -> Result<()>>(
        mut self,
        mut on_step: F,
    ) -> Result<RunOutput> {
        let dt = self.cfg.grid.dt;
        let total = (self.cfg.grid.t_end / dt).round() as u64;
        let every = self.cfg.grid.sample_every;
        let orbital_every = self.cfg.output.orbital_every as u64;
        let wants_orbital = |k: u64| orbital_every > 0 && (k / every) % orbital_every == 0;
        if self.state.step % every == 0 {
            self.sample(wants_orbital(self.state.step))?;
        }
        while self.state.step < total {
            step(&mut self.state, dt)?;
            if self.state.step % every == 0 || self.state.step == total {
                self.sample(wants_orbital(self.state.step))?;
            }
            on_step(&self.state, self.guess)?;
        }
        let summary = summarize(&self.track, self.cfg.model.c0, self.state.step);
        Ok(RunOutput {
            state: self.state,
            track: self.track,
            summary,
        })
    }

    pub fn track(&self) -> &ModulationTrack {
        &self.track
    }
}

fn sim_grid(cfg: &RunConfig, pair: &WellPair) -> SimGrid {
    SimGrid {
        dx: cfg.grid.dx,
        half_width: cfg.grid.half_width.unwrap_or(40.0 / pair.omega()),
        boundary: cfg.grid.boundary,
        sponge_strength: cfg.grid.sponge_strength,
    }
}

/// Runs a configuration from `t = 0`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    Simulation::new(cfg.clone())?.run_with(|_, _| Ok(()))
}

/// Summary statistics of a track.
pub fn summarize(track: &ModulationTrack, c0: f64, steps: u64) -> RunSummary {
    let s = &track.samples;
    let t_end = s.last().map_or(0.0, |x| x.t);
    let t_start = s.first().map_or(0.0, |x| x.t);
    let cutoff = t_end - 0.1 * (t_end - t_start);
    let window: Vec<&TrackSample> = s.iter().filter(|x| x.t >= cutoff).collect();
    let nw = window.len().max(1) as f64;
    let c_plus = window.iter().map(|x| x.c).sum::<f64>() / nw;
    let c_plus_std = (window.iter().map(|x| (x.c - c_plus).powi(2)).sum::<f64>() / nw).sqrt();
    let ts: Vec<f64> = s.iter().map(|x| x.t).collect();
    let ls: Vec<f64> = s.iter().map(|x| x.lfun).collect();
    let mut l_integral = 0.0;
    for i in 1..s.len() {
        l_integral += 0.5 * (ts[i] - ts[i - 1]) * (ls[i] + ls[i - 1]);
    }
    let l_peak = ls.iter().fold(0.0f64, |a, &b| a.max(b));
    let l_final = window.iter().fold(0.0f64, |a, x| a.max(x.lfun));
    let e0 = s.first().map_or(0.0, |x| x.conserved.energy);
    let m0 = s.first().map_or(0.0, |x| x.conserved.invariant);
    let rel = |a: f64, b: f64| {
        if b != 0.0 {
            (a - b).abs() / b.abs()
        } else {
            (a - b).abs()
        }
    };
    RunSummary {
        steps,
        t_end,
        c_plus,
        c_plus_std,
        max_c_deviation: s.iter().fold(0.0f64, |a, x| a.max((x.c - c0).abs())),
        l_integral,
        l_peak,
        l_final,
        decay_ratio: if l_peak > 0.0 { l_final / l_peak } else { 0.0 },
        energy_drift: s
            .iter()
            .fold(0.0f64, |a, x| a.max(rel(x.conserved.energy, e0))),
        invariant_drift: s
            .iter()
            .fold(0.0f64, |a, x| a.max(rel(x.conserved.invariant, m0))),
        max_residual: s.iter().fold(0.0f64, |a, x| {
            a.max(x.residuals[0].abs()).max(x.residuals[1].abs())
        }),
        max_orbital: s.iter().filter_map(|x| x.orbital).reduce(f64::max),
    }
}

/// `‖u‖²_{H¹×L²} = ‖∂ₓu₁‖² + ‖u₁‖² + ‖u₂‖²` with trapezoid quadrature.
pub fn energy_norm_sq(u1: &[f64], u2: &[f64], dx: f64) -> f64 {
    let d = centered_diff(u1, dx);
    trapezoid_dot(&d, &d, dx) + trapezoid_dot(u1, u1, dx) + trapezoid_dot(u2, u2, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::make_family;

    fn phi6_profile(dx: f64) -> Arc<KinkProfile> {
        let p = make_family(Family::Phi6).unwrap();
        let pr = p.pair(0.0, 1.0).unwrap();
        Arc::new(build_kink(&p, &pr, KinkGrid::new(dx)).unwrap())
    }

    fn grid(dx: f64, r: f64, boundary: Boundary) -> SimGrid {
        SimGrid {
            dx,
            half_width: r,
            boundary,
            sponge_strength: 5.0,
        }
    }

    #[test]
    fn unperturbed_state_is_the_boosted_kink() {
        let k = phi6_profile(0.005);
        let bk = boost(k.clone(), 0.3).unwrap();
        let s = make_state(
            &bk,
            0.0,
            &Perturbation::None,
            grid(0.02, 20.0, Boundary::Clamped),
        )
        .unwrap();
        for i in 1..s.len() - 1 {
            let (h1, h2) = bk.state(s.x(i));
            assert_eq!(s.phi1[i], h1);
            assert_eq!(s.phi2[i], h2);
        }
    }

    #[test]
    fn gaussian_perturbation_has_size_of_its_amplitude() {
        let k = phi6_profile(0.005);
        let bk = boost(k, 0.0).unwrap();
        let g = grid(0.02, 20.0, Boundary::Clamped);
        let pert = Perturbation::Gaussian {
            amplitude: 0.01,
            width: 2.0,
            center: 0.0,
            component: 1,
        };
        let s = make_state(&bk, 0.0, &pert, g).unwrap();
        let base = make_state(&bk, 0.0, &Perturbation::None, g).unwrap();
        let u1: Vec<f64> = s.phi1.iter().zip(&base.phi1).map(|(a, b)| a - b).collect();
        let u2 = vec![0.0; u1.len()];
        // ‖a e^{−x²/w²}‖² = a²w√(π/2), ‖∂ₓ‖² = a²√(π/2)/w
        let w = 2.0;
        let exact = 1e-4 * (std::f64::consts::PI / 2.0).sqrt() * (w + 1.0 / w);
        assert!((energy_norm_sq(&u1, &u2, g.dx) - exact).abs() < 1e-8);
        let far = Perturbation::Gaussian {
            amplitude: 0.01,
            width: 2.0,
            center: 9.0,
            component: 1,
        };
        assert!(make_state(&bk, 0.0, &far, g).is_err());
        let huge = Perturbation::Gaussian {
            amplitude: 2.0,
            width: 1.0,
            center: 0.0,
            component: 1,
        };
        assert!(make_state(&bk, 0.0, &huge, g).is_err());
    }

    #[test]
    fn static_kink_is_preserved_to_second_order() {
        let mut err = Vec::new();
        for dx in [0.04, 0.02] {
            let k = phi6_profile(dx / 4.0);
            let bk = boost(k, 0.0).unwrap();
            let mut s = make_state(
                &bk,
                0.0,
                &Perturbation::None,
                grid(dx, 20.0, Boundary::Clamped),
            )
            .unwrap();
            let h0 = s.phi1.clone();
            evolve(&mut s, 0.5 * dx, (10.0 / (0.5 * dx)) as u64).unwrap();
            err.push(
                s.phi1
                    .iter()
                    .zip(&h0)
                    .fold(0.0f64, |a, (p, h)| a.max((p - h).abs())),
            );
        }
        let order = (err[0] / err[1]).log2();
        assert!(err[1] < 1e-3, "{err:?}");
        assert!((order - 2.0).abs() < 0.15, "{err:?}");
    }

    #[test]
    fn travelling_kink_converges_at_second_order() {
        let c = 0.5;
        let t_end = 4.0;
        let mut err = Vec::new();
        for dx in [0.04, 0.02, 0.01] {
            let k = phi6_profile(dx / 4.0);
            let bk = boost(k, c).unwrap();
            let mut s = make_state(
                &bk,
                -2.0,
                &Perturbation::None,
                grid(dx, 20.0, Boundary::Clamped),
            )
            .unwrap();
            let dt = 0.5 * dx;
            evolve(&mut s, dt, (t_end / dt).round() as u64).unwrap();
            let moved = bk.at(-2.0 + c * t_end);
            err.push((0..s.len()).fold(0.0f64, |a, i| {
                a.max((s.phi1[i] - moved.state(s.x(i)).0).abs())
            }));
        }
        for w in err.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.9..=2.1).contains(&order), "{err:?}");
        }
    }

    #[test]
    fn clamped_stepping_is_reversible() {
        let k = phi6_profile(0.005);
        let bk = boost(k, 0.2).unwrap();
        let pert = Perturbation::VelocityBump {
            amplitude: 0.05,
            width: 3.0,
            center: 1.0,
        };
        let mut s = make_state(&bk, 0.0, &pert, grid(0.02, 20.0, Boundary::Clamped)).unwrap();
        let start = s.clone();
        evolve(&mut s, 0.01, 500).unwrap();
        s.phi2.iter_mut().for_each(|v| *v = -*v);
        evolve(&mut s, 0.01, 500).unwrap();
        s.phi2.iter_mut().for_each(|v| *v = -*v);
        let e1 = s
            .phi1
            .iter()
            .zip(&start.phi1)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        let e2 = s
            .phi2
            .iter()
            .zip(&start.phi2)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(e1 < 1e-11 && e2 < 1e-11, "{e1:e} {e2:e}");
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let k = phi6_profile(0.005);
        let bk = boost(k, 0.0).unwrap();
        let mut s = make_state(
            &bk,
            0.0,
            &Perturbation::None,
            grid(0.02, 20.0, Boundary::Clamped),
        )
        .unwrap();
        assert!(matches!(
            step(&mut s, 0.019),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn boosted_kink_conservation_laws() {
        let k = phi6_profile(0.0025);
        let n = k.norm_sq;
        let mut ms = Vec::new();
        for c in [0.0, 0.6] {
            let bk = boost(k.clone(), c).unwrap();
            let s = make_state(
                &bk,
                0.0,
                &Perturbation::None,
                grid(0.01, 30.0, Boundary::Clamped),
            )
            .unwrap();
            let t = state_conserved(&s);
            let g = lorentz_gamma(c);
            assert!((t.energy - g * n).abs() < 1e-4 * g, "{t:?}");
            assert!((t.momentum + c * g * n).abs() < 1e-4 * g, "{t:?}");
            ms.push(t.invariant);
        }
        assert!((ms[0] - n * n).abs() < 1e-4);
        assert!((ms[1] - ms[0]).abs() < 1e-4 * ms[0], "{ms:?}");
    }

    #[test]
    fn modulation_jacobian_matches_finite_differences() {
        let k = phi6_profile(0.005);
        let bk = boost(k.clone(), 0.4).unwrap();
        let pert = Perturbation::Gaussian {
            amplitude: 0.05,
            width: 1.5,
            center: 0.5,
            component: 2,
        };
        let s = make_state(&bk, 0.7, &pert, grid(0.02, 20.0, Boundary::Clamped)).unwrap();
        let xs = s.xs();
        let (c, y) = (0.35, 0.9);
        let (_, j) = modulation_system(&s, &KinkFrame::new(&k, &xs, c, y));
        let h = 1e-6;
        let f = |c: f64, y: f64| modulation_system(&s, &KinkFrame::new(&k, &xs, c, y)).0;
        let (fcp, fcm) = (f(c + h, y), f(c - h, y));
        let (fyp, fym) = (f(c, y + h), f(c, y - h));
        for r in 0..2 {
            let dc = (fcp[r] - fcm[r]) / (2.0 * h);
            let dy = (fyp[r] - fym[r]) / (2.0 * h);
            assert!(
                (dc - j[r][0]).abs() < 1e-5 * (1.0 + dc.abs()),
                "row {r}: {dc} vs {}",
                j[r][0]
            );
            assert!(
                (dy - j[r][1]).abs() < 1e-5 * (1.0 + dy.abs()),
                "row {r}: {dy} vs {}",
                j[r][1]
            );
        }
    }

    #[test]
    fn modulation_recovers_exact_kink() {
        let k = phi6_profile(0.005);
        let bk = boost(k.clone(), 0.6).unwrap();
        let s = make_state(
            &bk,
            3.7,
            &Perturbation::None,
            grid(0.02, 30.0, Boundary::Clamped),
        )
        .unwrap();
        let guess = initial_guess(&s, &k);
        assert!(
            (guess.0 - 0.6).abs() < 1e-3 && (guess.1 - 3.7).abs() < 1e-3,
            "{guess:?}"
        );
        let m = modulate(&s, &k, (0.0, 0.0)).unwrap();
        assert!(
            (m.c - 0.6).abs() < 1e-10 && (m.y - 3.7).abs() < 1e-10,
            "{} {}",
            m.c,
            m.y
        );
        assert!(m.u1.iter().chain(&m.u2).all(|v| v.abs() < 1e-9));
        assert!(local_distance(&s, &k, m.c, m.y, 10.0).unwrap() < 1e-9);
        assert!(local_distance(&s, &k, m.c, m.y + 1.0, 10.0).unwrap() > 0.1);
        assert!(local_distance(&s, &k, m.c, m.y, 40.0).is_err());
    }

    #[test]
    fn symmetric_perturbation_keeps_odd_kink_centred() {
        let p = make_family(Family::Phi4).unwrap();
        let pr = p.pair(-1.0, 1.0).unwrap();
        let k = Arc::new(build_kink(&p, &pr, KinkGrid::new(0.005)).unwrap());
        let bk = boost(k.clone(), 0.0).unwrap();
        let mut s = make_state(
            &bk,
            0.0,
            &Perturbation::None,
            grid(0.02, 20.0, Boundary::Clamped),
        )
        .unwrap();
        for i in 0..s.len() {
            let x = s.x(i);
            s.phi1[i] += 0.02 * x * (-x * x).exp();
        }
        let m = modulate(&s, &k, (0.1, 0.2)).unwrap();
        assert!(m.y.abs() < 1e-10 && m.c.abs() < 1e-10, "{} {}", m.c, m.y);
        // an even perturbation has a component along the translation mode
        let mut e = make_state(
            &bk,
            0.0,
            &Perturbation::None,
            grid(0.02, 20.0, Boundary::Clamped),
        )
        .unwrap();
        for i in 0..e.len() {
            let x = e.x(i);
            e.phi1[i] += 0.02 * (-x * x).exp();
        }
        let m = modulate(&e, &k, (0.0, 0.0)).unwrap();
        assert!(m.y.abs() > 1e-3 && m.c.abs() < 1e-10, "{} {}", m.c, m.y);
    }

    #[test]
    fn rho_functional_properties() {
        let k = phi6_profile(0.005);
        let bk = boost(k.clone(), 0.0).unwrap();
        let s = make_state(
            &bk,
            0.0,
            &Perturbation::None,
            grid(0.02, 20.0, Boundary::Clamped),
        )
        .unwrap();
        let n = s.len();
        let zero = vec![0.0; n];
        assert_eq!(rho_functional(&s, &zero, &zero, 0.3, 0.5, 2f64.sqrt()), 0.0);
        let u1: Vec<f64> = s
            .xs()
            .iter()
            .map(|x| (-(x - 1.0) * (x - 1.0)).exp())
            .collect();
        let u2: Vec<f64> = s.xs().iter().map(|x| x * (-x * x).exp()).collect();
        let omega = 2f64.sqrt();
        let l = rho_functional(&s, &u1, &u2, 0.0, 0.0, omega);
        let du = centered_diff(&u1, s.dx);
        let dens: Vec<f64> = (0..n)
            .map(|i| {
                let r = 1.0 / (omega * s.x(i) / 10.0).cosh();
                (du[i] * du[i] + u1[i] * u1[i] + u2[i] * u2[i]) * r * r
            })
            .collect();
        assert!((l - trapezoid(&dens, s.dx)).abs() < 1e-12);
        let scaled: (Vec<f64>, Vec<f64>) = (
            u1.iter().map(|v| 3.0 * v).collect(),
            u2.iter().map(|v| 3.0 * v).collect(),
        );
        let l3 = rho_functional(&s, &scaled.0, &scaled.1, 0.4, 0.3, omega);
        let l1 = rho_functional(&s, &u1, &u2, 0.4, 0.3, omega);
        assert!((l3 - 9.0 * l1).abs() < 1e-12 * l3);
    }

    #[test]
    fn unperturbed_run_tracks_the_exact_trajectory() {
        let mut cfg = RunConfig::default();
        cfg.model.c0 = 0.3;
        cfg.grid.t_end = 10.0;
        cfg.grid.boundary = Boundary::Clamped;
        cfg.perturbation = Perturbation::None;
        let out = run(&cfg).unwrap();
        let dx2 = cfg.grid.dx * cfg.grid.dx;
        for smp in &out.track.samples {
            assert!(
                (smp.c - 0.3).abs() <= 10.0 * dx2,
                "t = {}: c = {}",
                smp.t,
                smp.c
            );
            assert!(
                (smp.y - 0.3 * smp.t).abs() <= 10.0 * dx2,
                "t = {}: y = {}",
                smp.t,
                smp.y
            );
            let scale = lorentz_gamma(smp.c).powi(3) * out.track.samples[0].conserved.energy;
            assert!(smp
                .residuals
                .iter()
                .all(|r| r.abs() <= 1e-10 * scale.max(1.0)));
        }
    }

    #[test]
    fn config_round_trip_and_validation() {
        let text = "[model]\nfamily = phi8\nm = 3\npair = 1, 3\nc0 = 0.2\n\n[grid]\ndx = 0.02\ndt = 0.01\nt_end = 5\nboundary = clamped\n\n[perturbation]\nkind = velocity_bump\namplitude = 0.02\nwidth = 3\n\n[output]\nradii = 5, 10\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.model.family, Family::Phi8 { m: 3.0 });
        assert_eq!(cfg.model.pair, Some((1.0, 3.0)));
        assert_eq!(cfg.grid.boundary, Boundary::Clamped);
        assert_eq!(cfg.output.radii, vec![5.0, 10.0]);
        assert!(matches!(
            cfg.perturbation,
            Perturbation::VelocityBump { amplitude, .. } if amplitude == 0.02
        ));
        let bad = "[grid]\ndx = 0.02\ndt = 0.05\n";
        assert!(matches!(
            RunConfig::parse(bad),
            Err(Error::CflViolation { .. })
        ));
        assert!(RunConfig::parse("[nonsense]\na = 1\n").is_err());
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        use crate::io::{read_snapshot, write_snapshot, SnapshotMeta};
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.grid.half_width = Some(20.0);
        cfg.grid.t_end = 2.0;
        cfg.perturbation = Perturbation::VelocityBump {
            amplitude: 0.02,
            width: 2.0,
            center: 0.0,
        };
        let full = run(&cfg).unwrap();

        let mut half = cfg.clone();
        half.grid.t_end = 1.0;
        let first = run(&half).unwrap();
        let path = dir.path().join("snap.csv");
        let last = first.track.samples.last().unwrap();
        let meta = SnapshotMeta {
            t: first.state.t,
            step: first.state.step,
            dt: cfg.grid.dt,
            c: last.c,
            y: last.y,
        };
        write_snapshot(&path, &first.state, meta).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.phi1, first.state.phi1);
        assert_eq!(snap.phi2, first.state.phi2);
        let sim = Simulation::resume(cfg.clone(), snap).unwrap();
        let rest = sim.run_with(|_, _| Ok(())).unwrap();
        assert_eq!(rest.state.phi1, full.state.phi1);
        assert_eq!(rest.state.phi2, full.state.phi2);
        let (a, b) = (
            rest.track.samples.last().unwrap(),
            full.track.samples.last().unwrap(),
        );
        assert!((a.c - b.c).abs() < 1e-13 && (a.y - b.y).abs() < 1e-12);
    }
}
