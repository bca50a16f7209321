//! Discretised linearised operators `L = −∂² + W''(H)` and
//! `L₀ = −∂² + P`, their spectra, the factorisation identities
//! `U*U = L`, `UU* = L₀`, `UL = L₀U`, and the quadratic forms of the
//! vector operator `𝕃` around a travelling kink.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::conservation::{
    energy, energy_hessian_half, energy_variation, momentum, momentum_form, momentum_variation,
    ConservedTriple,
};
use crate::error::{Error, Result};
use crate::kink::{
    build_kink, lorentz_gamma, repulsivity_profile, KinkGrid, KinkProfile, RepulsivityProfile,
};
use crate::numerics::tridiag::SymTridiag;
use crate::numerics::{centered_diff, trapezoid_dot};
use crate::potentials::{TransformedPotential, WellPair};

/// Which scalar operator to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    /// `L = −∂² + W''(H)`.
    L,
    /// `L₀ = −∂² + P`.
    L0,
}

impl OperatorKind {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "l" => Ok(OperatorKind::L),
            "l0" => Ok(OperatorKind::L0),
            other => Err(Error::invalid(format!(
                "unknown operator '{other}' (expected L or L0)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            OperatorKind::L => "L",
            OperatorKind::L0 => "L0",
        }
    }
}

/// `−D² + potential` on the interior nodes of the profile grid with
/// Dirichlet ends.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub kind: OperatorKind,
    pub dx: f64,
    /// Interior nodes.
    pub x: Vec<f64>,
    /// Potential samples on the interior nodes.
    pub potential: Vec<f64>,
    pub matrix: SymTridiag,
    /// Continuum edge `min(ω₋², ω₊²)`.
    pub edge: f64,
}

pub fn discretize(
    kind: OperatorKind,
    k: &KinkProfile,
    rp: &RepulsivityProfile,
) -> DiscreteOperator {
    let n = k.len();
    let dx = k.dx;
    let inv = 1.0 / (dx * dx);
    let potential: Vec<f64> = (1..n - 1)
        .map(|i| match kind {
            OperatorKind::L => k.potential().jet(k.h[i]).d2,
            OperatorKind::L0 => rp.p[i],
        })
        .collect();
    let diag = potential.iter().map(|v| 2.0 * inv + v).collect();
    let pair = k.pair();
    DiscreteOperator {
        kind,
        dx,
        x: k.x[1..n - 1].to_vec(),
        potential,
        matrix: SymTridiag { diag, off: -inv },
        edge: (pair.omega_minus * pair.omega_minus).min(pair.omega_plus * pair.omega_plus),
    }
}

/// Role of a computed eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeKind {
    /// Translation mode of `L` (zero up to discretisation error).
    Zero,
    /// Discrete eigenvalue strictly below the continuum edge.
    Internal,
    /// At or within `5·dx²·max(1, edge)` of the edge: a discretised
    /// continuum state.
    Continuum,
}

/// Lowest eigenpairs of a discrete operator.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub kind: OperatorKind,
    pub dx: f64,
    pub edge: f64,
    pub eigenvalues: Vec<f64>,
    pub modes: Vec<ModeKind>,
    /// `‖(A − λ)v‖₂/‖v‖₂` for each eigenpair.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub x: Vec<f64>,
    /// Eigenvectors on the interior nodes, unit Euclidean norm.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectralReport {
    /// Eigenvalues below the edge that are not continuum artifacts.
    pub fn discrete(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.modes)
            .filter(|(_, m)| **m != ModeKind::Continuum)
            .map(|(v, _)| *v)
            .collect()
    }

    pub fn internal_modes(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.modes)
            .filter(|(_, m)| **m == ModeKind::Internal)
            .map(|(v, _)| *v)
            .collect()
    }
}

/// Band around the edge (and around zero for `L`) inside which an
/// eigenvalue is attributed to the continuum (or to translation).
pub fn edge_margin(dx: f64, edge: f64) -> f64 {
    5.0 * dx * dx * edge.max(1.0)
}

fn classify_mode(kind: OperatorKind, lambda: f64, dx: f64, edge: f64) -> ModeKind {
    let margin = edge_margin(dx, edge);
    if lambda >= edge - margin {
        ModeKind::Continuum
    } else if kind == OperatorKind::L && lambda.abs() <= 2.0 * margin {
        ModeKind::Zero
    } else {
        ModeKind::Internal
    }
}

/// Lowest `kcount` eigenvalues by Sturm bisection and their eigenvectors by
/// inverse iteration.
pub fn eigen_lowest(op: &DiscreteOperator, kcount: usize) -> Result<SpectralReport> {
    if kcount == 0 {
        return Err(Error::invalid("kcount must be at least 1"));
    }
    let m = &op.matrix;
    let kcount = kcount.min(m.len());
    let (lo, hi) = m.gershgorin();
    let scale = lo.abs().max(hi.abs());
    let tol = 8.0 * f64::EPSILON * scale;
    let mut eigenvalues = Vec::with_capacity(kcount);
    let mut residuals = Vec::with_capacity(kcount);
    let mut eigenvectors = Vec::with_capacity(kcount);
    let mut modes = Vec::with_capacity(kcount);
    for k in 0..kcount {
        let lambda = m
            .eigenvalue(k, tol)
            .ok_or_else(|| Error::EigenFailure(format!("eigenvalue {k} out of range")))?;
        let accept = 1e-8 * scale;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for attempt in 0..4 {
            let shift = lambda + attempt as f64 * 1e3 * tol;
            let v = m.eigenvector(shift, 4 + 2 * attempt);
            let res = m.residual(lambda, &v);
            if best.as_ref().is_none_or(|(_, r)| res < *r) {
                best = Some((v, res));
            }
            if res <= accept {
                break;
            }
        }
        let (v, res) = best.expect("at least one inverse-iteration attempt");
        if !(res <= accept) {
            return Err(Error::EigenFailure(format!(
                "inverse iteration stagnated for eigenvalue {lambda}: residual {res:e}"
            )));
        }
        eigenvalues.push(lambda);
        residuals.push(res);
        eigenvectors.push(v);
        modes.push(classify_mode(op.kind, lambda, op.dx, op.edge));
    }
    Ok(SpectralReport {
        kind: op.kind,
        dx: op.dx,
        edge: op.edge,
        eigenvalues,
        modes,
        residuals,
        x: op.x.clone(),
        eigenvectors,
    })
}

/// Eigenvalues on three successively halved grids with Richardson
/// extrapolation.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralConvergence {
    pub kind: OperatorKind,
    pub half_width: f64,
    pub edge: f64,
    /// One report per grid, coarsest first.
    pub levels: Vec<SpectralReport>,
    /// Observed order `log₂((λ_h − λ_{h/2})/(λ_{h/2} − λ_{h/4}))` per index;
    /// `None` when the differences are at roundoff level.
    pub orders: Vec<Option<f64>>,
    /// Extrapolated eigenvalues assuming second-order convergence.
    pub extrapolated: Vec<f64>,
    /// Mode classification on the finest grid.
    pub modes: Vec<ModeKind>,
}

impl SpectralConvergence {
    pub fn finest(&self) -> &SpectralReport {
        self.levels.last().expect("at least one level")
    }
}

/// Builds kinks at `dx`, `dx/2`, `dx/4` on `[−r, r]` and compares the
/// lowest `kcount` eigenvalues of `kind`.
pub fn spectral_convergence(
    tp: &TransformedPotential,
    kind: OperatorKind,
    dx: f64,
    r: f64,
    kcount: usize,
) -> Result<SpectralConvergence> {
    let mut levels = Vec::with_capacity(3);
    for l in 0..3 {
        let h = dx / f64::from(1u32 << l);
        let k = build_kink(tp.potential(), tp.pair(), KinkGrid::with_half_width(h, r))?;
        let rp = repulsivity_profile(&k, tp);
        levels.push(eigen_lowest(&discretize(kind, &k, &rp), kcount)?);
    }
    let count = levels
        .iter()
        .map(|r| r.eigenvalues.len())
        .min()
        .unwrap_or(0);
    let mut orders = Vec::with_capacity(count);
    let mut extrapolated = Vec::with_capacity(count);
    for i in 0..count {
        let (a, b, c) = (
            levels[0].eigenvalues[i],
            levels[1].eigenvalues[i],
            levels[2].eigenvalues[i],
        );
        let (d1, d2) = (a - b, b - c);
        let floor = 1e3 * f64::EPSILON * c.abs().max(1.0);
        orders.push(if d1.abs() > floor && d2.abs() > floor && d1 * d2 > 0.0 {
            Some((d1 / d2).log2())
        } else {
            None
        });
        extrapolated.push(c - d2 / 3.0);
    }
    let edge = levels[2].edge;
    let modes = levels[2].modes[..count].to_vec();
    Ok(SpectralConvergence {
        kind,
        half_width: r,
        edge,
        levels,
        orders,
        extrapolated,
        modes,
    })
}

/// Default half-width `30/ω` for spectral computations.
pub fn default_half_width(pair: &WellPair) -> f64 {
    30.0 / pair.omega()
}

/// `‖L·Y‖∞/‖Y‖∞` over the interior nodes, with `Y = H'`.
pub fn ly_residual(k: &KinkProfile) -> f64 {
    let n = k.len();
    let inv = 1.0 / (k.dx * k.dx);
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 1..n - 1 {
        let y = &k.hp;
        let ly = (2.0 * y[i] - y[i - 1] - y[i + 1]) * inv + k.potential().jet(k.h[i]).d2 * y[i];
        num = num.max(ly.abs());
        den = den.max(y[i].abs());
    }
    num / den
}

/// Sup-norm residuals of the factorisation identities on one test
/// function.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FactorizationResidual {
    pub dx: f64,
    /// `‖(U*U − L)f‖∞`.
    pub u_star_u: f64,
    /// `‖(UU* − L₀)f‖∞`.
    pub u_u_star: f64,
    /// `‖(UL − L₀U)f‖∞`.
    pub intertwining: f64,
    /// `‖(U∂ − ∂U)f − ½(L − L₀)f‖∞`.
    pub commutator: f64,
}

impl FactorizationResidual {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.u_star_u,
            self.u_u_star,
            self.intertwining,
            self.commutator,
        ]
    }
}

/// Names of the four identities, in the order of
/// [`FactorizationResidual::as_array`].
pub const IDENTITY_NAMES: [&str; 4] = ["U*U = L", "UU* = L0", "UL = L0 U", "[U, d] = (L - L0)/2"];

struct Factorization<'a> {
    k: &'a KinkProfile,
    rp: &'a RepulsivityProfile,
}

impl Factorization<'_> {
    fn u(&self, f: &[f64]) -> Vec<f64> {
        let y = &self.k.hp;
        let ratio: Vec<f64> = f.iter().zip(y).map(|(f, y)| f / y).collect();
        centered_diff(&ratio, self.k.dx)
            .iter()
            .zip(y)
            .map(|(d, y)| y * d)
            .collect()
    }

    fn u_star(&self, g: &[f64]) -> Vec<f64> {
        let y = &self.k.hp;
        let prod: Vec<f64> = g.iter().zip(y).map(|(g, y)| g * y).collect();
        centered_diff(&prod, self.k.dx)
            .iter()
            .zip(y)
            .map(|(d, y)| -d / y)
            .collect()
    }

    fn schrodinger(&self, f: &[f64], pot: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = f.len();
        let inv = 1.0 / (self.k.dx * self.k.dx);
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (2.0 * f[i] - f[i - 1] - f[i + 1]) * inv + pot(i) * f[i];
        }
        out
    }

    fn l(&self, f: &[f64]) -> Vec<f64> {
        self.schrodinger(f, |i| self.k.potential().jet(self.k.h[i]).d2)
    }

    fn l0(&self, f: &[f64]) -> Vec<f64> {
        self.schrodinger(f, |i| self.rp.p[i])
    }
}

/// Evaluates the four identities on `f` (sampled on the profile grid).
/// Nodes within four cells of the boundary or where `Y < 10⁻¹⁴·max Y`
/// are excluded.
pub fn factorization_residual(
    k: &KinkProfile,
    rp: &RepulsivityProfile,
    f: &[f64],
) -> Result<FactorizationResidual> {
    let n = k.len();
    if f.len() != n {
        return Err(Error::invalid(format!(
            "test function has {} samples, grid has {n}",
            f.len()
        )));
    }
    let fac = Factorization { k, rp };
    let dx = k.dx;
    let ymax = k.hp.iter().fold(0.0f64, |a, &y| a.max(y.abs()));
    let ok: Vec<bool> = (0..n)
        .map(|i| i >= 4 && i + 4 < n && (i - 4..=i + 4).all(|j| k.hp[j].abs() >= 1e-14 * ymax))
        .collect();
    let sup = |a: &[f64], b: &[f64]| -> f64 {
        (0..n)
            .filter(|&i| ok[i])
            .fold(0.0f64, |m, i| m.max((a[i] - b[i]).abs()))
    };
    let uf = fac.u(f);
    let lf = fac.l(f);
    let l0f = fac.l0(f);
    let u_star_u = sup(&fac.u_star(&uf), &lf);
    let u_u_star = sup(&fac.u(&fac.u_star(f)), &l0f);
    let intertwining = sup(&fac.u(&lf), &fac.l0(&uf));
    let df = centered_diff(f, dx);
    let comm: Vec<f64> = fac
        .u(&df)
        .iter()
        .zip(centered_diff(&uf, dx))
        .map(|(a, b)| a - b)
        .collect();
    let half_diff: Vec<f64> = lf.iter().zip(&l0f).map(|(a, b)| 0.5 * (a - b)).collect();
    let commutator = sup(&comm, &half_diff);
    Ok(FactorizationResidual {
        dx,
        u_star_u,
        u_u_star,
        intertwining,
        commutator,
    })
}

/// Factorisation residuals under grid halving.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationTable {
    pub rows: Vec<FactorizationResidual>,
    /// Observed order between consecutive rows, per identity.
    pub orders: Vec<[f64; 4]>,
}

impl FactorizationTable {
    /// Smallest observed order over all identities and grid pairs.
    pub fn min_order(&self) -> f64 {
        self.orders
            .iter()
            .flatten()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

/// Runs [`factorization_residual`] on `levels` grids starting at `dx`,
/// halving each time, with `f` sampled on each grid.
pub fn factorization_convergence(
    tp: &TransformedPotential,
    dx: f64,
    r: f64,
    levels: usize,
    f: &dyn Fn(f64) -> f64,
) -> Result<FactorizationTable> {
    let mut rows = Vec::with_capacity(levels);
    for l in 0..levels {
        let h = dx / f64::from(1u32 << l);
        let k = build_kink(tp.potential(), tp.pair(), KinkGrid::with_half_width(h, r))?;
        let rp = repulsivity_profile(&k, tp);
        let samples: Vec<f64> = k.x.iter().map(|&x| f(x)).collect();
        rows.push(factorization_residual(&k, &rp, &samples)?);
    }
    let orders = rows
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].as_array(), w[1].as_array());
            std::array::from_fn(|j| (a[j] / b[j]).log2())
        })
        .collect();
    Ok(FactorizationTable { rows, orders })
}

/// Samples of the travelling kink `H_c(x) = H(γx)` and its derivatives on
/// the profile grid, read as lab-frame positions.
fn boosted_samples(k: &KinkProfile, c: f64) -> (f64, Vec<[f64; 4]>) {
    let g = lorentz_gamma(c);
    let s =
        k.x.iter()
            .map(|&x| {
                let v = k.eval(g * x);
                [v[0], g * v[1], g * g * v[2], g * g * g * v[3]]
            })
            .collect();
    (g, s)
}

/// The quadratic form of `𝕃` and the norms `‖u‖_c`, `‖u‖_{c,R}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadraticForms {
    pub c: f64,
    pub gamma: f64,
    /// `⟨𝕃u, u⟩ = ‖u₂‖² + ⟨𝓛u₁, u₁⟩ + 2c𝓟[u]`.
    pub form_ll: f64,
    /// `‖u‖_c²`.
    pub norm_c_sq: f64,
    /// `‖u‖_c²` restricted to `|x| < R`.
    pub norm_c_local_sq: f64,
}

pub(crate) fn norm_c_parts(
    u1: &[f64],
    u2: &[f64],
    c: f64,
    gamma: f64,
    dx: f64,
    range: std::ops::Range<usize>,
) -> f64 {
    let du = centered_diff(u1, dx);
    let (a, b) = (range.start, range.end);
    if b - a < 2 {
        return 0.0;
    }
    let grad: f64 = (a..b - 1).map(|i| (u1[i + 1] - u1[i]).powi(2)).sum::<f64>() / dx;
    let mass = trapezoid_dot(&u1[a..b], &u1[a..b], dx);
    let w: Vec<f64> = (a..b).map(|i| u2[i] + c * du[i]).collect();
    grad / gamma + gamma * mass + gamma * trapezoid_dot(&w, &w, dx)
}

/// Quadratic forms of `u = (u₁, u₂)` around the kink travelling at speed
/// `c`, with `u` sampled on the profile grid.
pub fn quadratic_forms(
    k: &KinkProfile,
    c: f64,
    u1: &[f64],
    u2: &[f64],
    local_r: f64,
) -> Result<QuadraticForms> {
    let n = k.len();
    if u1.len() != n || u2.len() != n {
        return Err(Error::invalid(
            "perturbation must be sampled on the profile grid",
        ));
    }
    if !(c.abs() < 1.0) {
        return Err(Error::invalid(format!(
            "speed must satisfy |c| < 1, got {c}"
        )));
    }
    let (gamma, hc) = boosted_samples(k, c);
    let h1: Vec<f64> = hc.iter().map(|v| v[0]).collect();
    let form_ll = 2.0 * energy_hessian_half(k.potential(), &h1, (u1, u2), k.dx)
        + 2.0 * c * momentum(u1, u2, k.dx);
    let norm_c_sq = norm_c_parts(u1, u2, c, gamma, k.dx, 0..n);
    let lo = k.x.iter().position(|&x| x > -local_r).unwrap_or(n);
    let hi = k.x.iter().rposition(|&x| x < local_r).map_or(lo, |i| i + 1);
    let norm_c_local_sq = norm_c_parts(u1, u2, c, gamma, k.dx, lo..hi.max(lo));
    Ok(QuadraticForms {
        c,
        gamma,
        form_ll,
        norm_c_sq,
        norm_c_local_sq,
    })
}

/// Numerical coercivity constant of `γ⟨𝕃u,u⟩ ≥ μ‖u‖_c²`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityEstimate {
    pub c: f64,
    pub gamma: f64,
    /// Minimal Rayleigh quotient on `{⟨u, F_{c,0}⟩ = 0}`.
    pub mu: f64,
    /// Minimal Rayleigh quotient without the constraint.
    pub mu_unconstrained: f64,
    /// Interior nodes of the coarse grid.
    pub points: usize,
    pub dx: f64,
}

/// Options for [`coercivity_estimate`].
#[derive(Debug, Clone, Copy)]
pub struct CoercivityOptions {
    /// Upper bound on the coarse-grid interior nodes.
    pub max_points: usize,
    /// Half-width of the coarse grid in the rest frame.
    pub half_width: f64,
}

impl Default for CoercivityOptions {
    fn default() -> Self {
        Self {
            max_points: 320,
            half_width: 12.0,
        }
    }
}

/// Minimises `γ⟨𝕃u,u⟩/‖u‖_c²` over grid functions orthogonal to
/// `F_{c,0}`.
///
/// With `u(x) = v(γx)` and `w = v₂ + cγv₁'` the quotient becomes
/// `(‖w‖² + ⟨L v₁, v₁⟩)/(‖w‖² + ‖v₁‖²_{H¹})` in the rest frame, and the
/// constraint reads `⟨v₁, (1+c²)Y + 2c²ξY'⟩ + (c/γ)⟨w, ξY⟩ = 0`. The
/// constraint is removed by a Householder reflection and the remaining
/// symmetric pencil is reduced with a Cholesky factor of its right side.
pub fn coercivity_estimate(
    k: &KinkProfile,
    c: f64,
    opts: CoercivityOptions,
) -> Result<CoercivityEstimate> {
    if !(c.abs() < 1.0) {
        return Err(Error::invalid(format!(
            "speed must satisfy |c| < 1, got {c}"
        )));
    }
    let gamma = lorentz_gamma(c);
    let r = opts.half_width.min(k.r);
    let stride = ((2.0 * r / k.dx) / opts.max_points as f64).ceil().max(1.0) as usize;
    let dx = stride as f64 * k.dx;
    let half = (r / dx).floor() as i64;
    let xi: Vec<f64> = (1 - half..half).map(|i| i as f64 * dx).collect();
    let m = xi.len();
    let samples: Vec<[f64; 4]> = xi.iter().map(|&x| k.eval(x)).collect();
    let inv = 1.0 / (dx * dx);
    let n = 2 * m;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..m {
        let w2 = k.potential().jet(samples[i][0]).d2;
        a[(i, i)] = 2.0 * inv + w2;
        b[(i, i)] = 2.0 * inv + 1.0;
        if i + 1 < m {
            for mat in [&mut a, &mut b] {
                mat[(i, i + 1)] = -inv;
                mat[(i + 1, i)] = -inv;
            }
        }
        a[(m + i, m + i)] = 1.0;
        b[(m + i, m + i)] = 1.0;
    }
    let mu_unconstrained = pencil_minimum(&a, &b)?;
    let mut constraint = DVector::<f64>::zeros(n);
    for i in 0..m {
        let [_, y, yp, _] = samples[i];
        constraint[i] = (1.0 + c * c) * y + 2.0 * c * c * xi[i] * yp;
        constraint[m + i] = c / gamma * xi[i] * y;
    }
    let ap = householder_deflate(&a, &constraint);
    let bp = householder_deflate(&b, &constraint);
    let mu = pencil_minimum(&ap, &bp)?;
    Ok(CoercivityEstimate {
        c,
        gamma,
        mu,
        mu_unconstrained,
        points: m,
        dx,
    })
}

/// `(HAH)[1.., 1..]` for the reflection `H` mapping `v` onto the first
/// axis; its rows and columns span `v^⊥`.
fn householder_deflate(a: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let mut h = v.clone();
    let norm = v.norm();
    h[0] += if v[0] >= 0.0 { norm } else { -norm };
    let tau = 2.0 / h.norm_squared();
    let p = a * &h * tau;
    let kk = 0.5 * tau * h.dot(&p);
    let q = &p - &h * kk;
    let full = a - &h * q.transpose() - &q * h.transpose();
    let n = a.nrows();
    full.view((1, 1), (n - 1, n - 1)).into_owned()
}

/// Smallest `λ` with `A x = λ B x`, `B` symmetric positive definite.
fn pencil_minimum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let chol = Cholesky::new(b.clone()).ok_or_else(|| {
        Error::EigenFailure("projected pencil is indefinite; refine the grid".into())
    })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let sym = (&c + c.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.min())
}

/// Discrete `(E, P, M)` of the kink travelling at speed `c`.
///
/// The lab-frame grid has spacing `dx/γ`, so its nodes are the images of
/// the profile nodes and the samples need no interpolation.
pub fn kink_invariants(k: &KinkProfile, c: f64) -> ConservedTriple {
    let g = lorentz_gamma(c);
    let h2: Vec<f64> = k.hp.iter().map(|d| -c * g * d).collect();
    let dx = k.dx / g;
    ConservedTriple::new(
        energy(k.potential(), &k.h, &h2, dx),
        momentum(&k.h, &h2, dx),
    )
}

/// Residuals of the second-order expansions of `𝓔`, `𝓟` and `𝓜` around
/// the travelling kink.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub c: f64,
    pub gamma: f64,
    /// `(E, P, M)` of the unperturbed kink.
    pub kink: ConservedTriple,
    /// `‖H'‖²` of the profile.
    pub norm_sq: f64,
    /// `E[H_c + u] − E[H_c] − ½(‖u₂‖² + ⟨𝓛u₁,u₁⟩)`; equals `½𝓡`.
    pub energy_residual: f64,
    /// `P[H_c + u] − P[H_c] − 𝓟[u]`; zero up to rounding.
    pub momentum_residual: f64,
    /// `M[H_c + u]` minus its quadratic expansion.
    pub invariant_residual: f64,
    /// `‖u₁‖∞ ‖u₁‖²`, the scale of the cubic remainder.
    pub cubic_scale: f64,
    /// Size of the components of `u` removed to cancel the linear terms.
    pub projected: f64,
}

/// Transpose of [`centered_diff`] applied to `a`.
fn centered_diff_transpose(a: &[f64], dx: f64) -> Vec<f64> {
    let n = a.len();
    let mut g = vec![0.0; n];
    let s = 1.0 / (2.0 * dx);
    for i in 1..n - 1 {
        g[i + 1] += a[i] * s;
        g[i - 1] -= a[i] * s;
    }
    g[0] -= 3.0 * a[0] * s;
    g[1] += 4.0 * a[0] * s;
    g[2] -= a[0] * s;
    g[n - 1] += 3.0 * a[n - 1] * s;
    g[n - 2] -= 4.0 * a[n - 1] * s;
    g[n - 3] += a[n - 1] * s;
    g
}

fn trapezoid_weights(n: usize, dx: f64) -> Vec<f64> {
    (0..n)
        .map(|i| if i == 0 || i + 1 == n { 0.5 * dx } else { dx })
        .collect()
}

/// Expands the conservation laws around `H_c` in the direction `u`.
///
/// `u` is first made orthogonal to the gradients of the discrete `E` and `P`
/// at the kink, the discrete form of `⟨u, G_{c,0}⟩ = 0`, so that the
/// linear terms vanish exactly.
pub fn expansion_check(k: &KinkProfile, c: f64, u1: &[f64], u2: &[f64]) -> Result<ExpansionReport> {
    let n = k.len();
    if u1.len() != n || u2.len() != n {
        return Err(Error::invalid(
            "perturbation must be sampled on the profile grid",
        ));
    }
    if !(c.abs() < 1.0) {
        return Err(Error::invalid(format!(
            "speed must satisfy |c| < 1, got {c}"
        )));
    }
    let dx = k.dx;
    let pot = k.potential();
    let (gamma, hc) = boosted_samples(k, c);
    let h1: Vec<f64> = hc.iter().map(|v| v[0]).collect();
    let h2: Vec<f64> = hc.iter().map(|v| -c * v[1]).collect();
    let wt = trapezoid_weights(n, dx);

    // gradients of δE and δP with respect to (u₁, u₂)
    let mut ge = vec![0.0; 2 * n];
    for i in 0..n {
        ge[i] = wt[i] * pot.first_derivative(h1[i]);
        ge[n + i] = wt[i] * h2[i];
    }
    for i in 0..n - 1 {
        let d = (h1[i + 1] - h1[i]) / dx;
        ge[i] -= d;
        ge[i + 1] += d;
    }
    let wh2: Vec<f64> = h2.iter().zip(&wt).map(|(h, w)| h * w).collect();
    let dh1 = centered_diff(&h1, dx);
    let mut gp = centered_diff_transpose(&wh2, dx);
    gp.extend(dh1.iter().zip(&wt).map(|(d, w)| d * w));

    let mut u: Vec<f64> = u1.iter().chain(u2).copied().collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (ee, ep, pp) = (dot(&ge, &ge), dot(&ge, &gp), dot(&gp, &gp));
    let (re, rp) = (dot(&ge, &u), dot(&gp, &u));
    let det = ee * pp - ep * ep;
    let (alpha, beta) = if det.abs() > 1e-12 * ee * pp {
        ((re * pp - rp * ep) / det, (rp * ee - re * ep) / det)
    } else {
        (re / ee, 0.0)
    };
    for i in 0..2 * n {
        u[i] -= alpha * ge[i] + beta * gp[i];
    }
    let projected = (alpha * alpha * ee + 2.0 * alpha * beta * ep + beta * beta * pp).sqrt();
    let (v1, v2) = u.split_at(n);

    let kink = ConservedTriple::new(energy(pot, &h1, &h2, dx), momentum(&h1, &h2, dx));
    let s1: Vec<f64> = h1.iter().zip(v1).map(|(a, b)| a + b).collect();
    let s2: Vec<f64> = h2.iter().zip(v2).map(|(a, b)| a + b).collect();
    let e_pert = energy(pot, &s1, &s2, dx);
    let p_pert = momentum(&s1, &s2, dx);
    let e_lin = energy_variation(pot, (&h1, &h2), (v1, v2), dx);
    let p_lin = momentum_variation((&h1, &h2), (v1, v2), dx);
    let e2 = energy_hessian_half(pot, &h1, (v1, v2), dx);
    let p2 = momentum_form(v2, v1, dx);
    let energy_residual = e_pert - kink.energy - e_lin - e2;
    let momentum_residual = p_pert - kink.momentum - p_lin - p2;
    let m_pert = e_pert * e_pert - p_pert * p_pert;
    let m_quad = kink.invariant + 2.0 * kink.energy * (e_lin + e2)
        - 2.0 * kink.momentum * (p_lin + p2)
        + (e_lin + e2).powi(2)
        - (p_lin + p2).powi(2);
    let sup = v1.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    Ok(ExpansionReport {
        c,
        gamma,
        kink,
        norm_sq: k.norm_sq,
        energy_residual,
        momentum_residual,
        invariant_residual: m_pert - m_quad,
        cubic_scale: sup * trapezoid_dot(v1, v1, dx),
        projected,
    })
}

/// Convenience: profile, repulsivity profile and both operators for a well
/// pair.
pub fn operators_for(
    tp: &TransformedPotential,
    dx: f64,
    r: f64,
) -> Result<(
    Arc<KinkProfile>,
    RepulsivityProfile,
    DiscreteOperator,
    DiscreteOperator,
)> {
    let k = build_kink(tp.potential(), tp.pair(), KinkGrid::with_half_width(dx, r))?;
    let rp = repulsivity_profile(&k, tp);
    let l = discretize(OperatorKind::L, &k, &rp);
    let l0 = discretize(OperatorKind::L0, &k, &rp);
    Ok((Arc::new(k), rp, l, l0))
}
