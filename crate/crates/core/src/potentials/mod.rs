//! Scalar potentials `W`, their wells, the transformed potential
//! `V = (W')²/W − W''`, normalisation and smooth perturbations.

pub mod custom;
pub mod product;
mod transformed;
pub mod trig;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use custom::{Alpha, Callback, Definition, Polynomial, TrigPoly};
use product::ProductForm;
pub use transformed::{transformed, TransformedPotential};
use trig::{DsgOne, DsgTwo};

/// Value and first three derivatives of a potential at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Jet {
    pub w: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet {
    /// Derivative of order `k ≤ 3`.
    pub fn get(&self, k: usize) -> f64 {
        match k {
            0 => self.w,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3,
        }
    }
}

/// Built-in families and their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `1 − cos φ`.
    SineGordon,
    /// `(φ² − 1)²`.
    Phi4,
    /// `φ²(φ² − 1)²`.
    Phi6,
    /// `(φ² − 1)²(φ² − m²)²`, `m > 1`.
    Phi8 { m: f64 },
    /// `φ²(φ² − 1)²(φ² − m²)²`, `m > 1`.
    Phi10 { m: f64 },
    /// `Π_k (φ² − m_k²)²` with `1 = m₁ < … < mₙ`.
    W4n { m: Vec<f64> },
    /// `φ² Π_k (φ² − m_k²)²` with `1 = m₁ < … < mₙ`.
    W4nPlus2 { m: Vec<f64> },
    /// `2 Π_{k=1}^{n} (1 − φ²/(π(2k−1))²)²`, wells `±π(2k−1)`.
    SgLimitEven { n: usize },
    /// `½ φ² Π_{k=1}^{n} (1 − φ²/(2πk)²)²`, wells `2πk`, `|k| ≤ n`.
    SgLimitOdd { n: usize },
    /// Double sine-Gordon with `η > −1/4`.
    DsgOne { eta: f64 },
    /// Double sine-Gordon with `η < −1/4`.
    DsgTwo { eta: f64 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |m: &[f64]| {
            m.iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Family::SineGordon => write!(f, "sine-gordon"),
            Family::Phi4 => write!(f, "phi4"),
            Family::Phi6 => write!(f, "phi6"),
            Family::Phi8 { m } => write!(f, "phi8(m={m})"),
            Family::Phi10 { m } => write!(f, "phi10(m={m})"),
            Family::W4n { m } => write!(f, "w4n(m=[{}])", list(m)),
            Family::W4nPlus2 { m } => write!(f, "w4n+2(m=[{}])", list(m)),
            Family::SgLimitEven { n } => write!(f, "sg-limit-4n(n={n})"),
            Family::SgLimitOdd { n } => write!(f, "sg-limit-4n+2(n={n})"),
            Family::DsgOne { eta } => write!(f, "dsg1(eta={eta})"),
            Family::DsgTwo { eta } => write!(f, "dsg2(eta={eta})"),
        }
    }
}

/// Parameters accompanying a family name in configuration files and on
/// the command line.
#[derive(Debug, Clone, Default)]
pub struct FamilyArgs {
    pub m: Option<f64>,
    pub m_list: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub n: Option<usize>,
}

impl Family {
    /// Builds a family from its short name: `sg`, `phi4`, `phi6`, `phi8`,
    /// `phi10`, `w4n`, `w4n2`, `sg4n`, `sg4n2`, `dsg1`, `dsg2`.
    pub fn from_name(name: &str, args: &FamilyArgs) -> Result<Family> {
        let need_m = || {
            args.m
                .ok_or_else(|| Error::invalid(format!("family {name} needs m")))
        };
        let need_eta = || {
            args.eta
                .ok_or_else(|| Error::invalid(format!("family {name} needs eta")))
        };
        let need_n = || {
            args.n
                .ok_or_else(|| Error::invalid(format!("family {name} needs n")))
        };
        let need_list = || {
            args.m_list
                .clone()
                .ok_or_else(|| Error::invalid(format!("family {name} needs a well list")))
        };
        Ok(match name.to_ascii_lowercase().as_str() {
            "sg" | "sine-gordon" | "sine_gordon" => Family::SineGordon,
            "phi4" => Family::Phi4,
            "phi6" => Family::Phi6,
            "phi8" => Family::Phi8 { m: need_m()? },
            "phi10" => Family::Phi10 { m: need_m()? },
            "w4n" => Family::W4n { m: need_list()? },
            "w4n2" | "w4n+2" => Family::W4nPlus2 { m: need_list()? },
            "sg4n" | "sg-limit-4n" => Family::SgLimitEven { n: need_n()? },
            "sg4n2" | "sg-limit-4n+2" => Family::SgLimitOdd { n: need_n()? },
            "dsg1" => Family::DsgOne { eta: need_eta()? },
            "dsg2" => Family::DsgTwo { eta: need_eta()? },
            other => return Err(Error::invalid(format!("unknown family '{other}'"))),
        })
    }
}

/// Affine change of field variable `φ̃ = λ·(rφ) + a` with `r = −1` when the
/// map reflects, together with the amplitude factor `μ`:
/// `W̃(φ̃) = λ²μ² W(φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    /// `λ`.
    pub scale: f64,
    /// Offset `a` in the target variable.
    pub shift: f64,
    /// `μ`.
    pub mu: f64,
    pub reflected: bool,
}

impl AffineMap {
    fn sign(&self) -> f64 {
        if self.reflected {
            -1.0
        } else {
            1.0
        }
    }

    /// Original field value to normalised field value.
    pub fn forward(&self, phi: f64) -> f64 {
        self.scale * self.sign() * phi + self.shift
    }

    /// Normalised field value to original field value.
    pub fn inverse(&self, phi_tilde: f64) -> f64 {
        self.sign() * (phi_tilde - self.shift) / self.scale
    }
}

#[derive(Debug, Clone)]
enum Form {
    Product(ProductForm),
    SineGordon,
    DsgOne(DsgOne),
    DsgTwo(DsgTwo),
    Polynomial(Polynomial),
    TrigPoly(TrigPoly),
    Callback(Callback),
    Perturbed {
        base: Box<Potential>,
        alpha: Alpha,
    },
    Affine {
        base: Box<Potential>,
        map: AffineMap,
    },
}

/// Window used to enumerate wells of periodic potentials by default.
pub const DEFAULT_WINDOW: (f64, f64) = (-4.0 * PI, 4.0 * PI);

/// A potential `W` of class 𝒞³ with its list of (nondegenerate) wells.
#[derive(Debug, Clone)]
pub struct Potential {
    label: String,
    family: Option<Family>,
    form: Form,
    wells: Vec<f64>,
    window: (f64, f64),
}

/// Two adjacent wells `ζ₋ < ζ₊` with decay rates `ω± = √W''(ζ±)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellPair {
    pub left: f64,
    pub right: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
}

impl WellPair {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left + self.right)
    }

    /// `ω = min(ω₋, ω₊)`.
    pub fn omega(&self) -> f64 {
        self.omega_minus.min(self.omega_plus)
    }

    /// Working interval `[ζ₋ − w/2, ζ₊ + w/2]` on which W is sampled.
    pub fn working_interval(&self) -> (f64, f64) {
        let margin = 0.5 * self.width();
        (self.left - margin, self.right + margin)
    }
}

fn product_roots_symmetric(m: &[f64], with_zero: bool) -> Vec<f64> {
    let mut roots: Vec<f64> = m.iter().flat_map(|&v| [-v, v]).collect();
    if with_zero {
        roots.push(0.0);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn check_m_list(m: &[f64]) -> Result<()> {
    if m.is_empty() {
        return Err(Error::invalid("well list m must be nonempty"));
    }
    if m[0] != 1.0 {
        return Err(Error::invalid(format!("m₁ must equal 1, got {}", m[0])));
    }
    if !m.iter().all(|v| v.is_finite()) || !m.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid(format!(
            "m must be finite and strictly increasing, got {m:?}"
        )));
    }
    Ok(())
}

/// Builds a built-in family after checking its parameters.
pub fn make_family(family: Family) -> Result<Potential> {
    let form = match &family {
        Family::SineGordon => Form::SineGordon,
        Family::Phi4 => Form::Product(ProductForm::monic(1.0, vec![-1.0, 1.0])),
        Family::Phi6 => Form::Product(ProductForm::monic(1.0, vec![-1.0, 0.0, 1.0])),
        Family::Phi8 { m } | Family::Phi10 { m } => {
            if !(m.is_finite() && *m > 1.0) {
                return Err(Error::invalid(format!("m must exceed 1, got {m}")));
            }
            let zero = matches!(family, Family::Phi10 { .. });
            Form::Product(ProductForm::monic(
                1.0,
                product_roots_symmetric(&[1.0, *m], zero),
            ))
        }
        Family::W4n { m } | Family::W4nPlus2 { m } => {
            check_m_list(m)?;
            let zero = matches!(family, Family::W4nPlus2 { .. });
            Form::Product(ProductForm::monic(1.0, product_roots_symmetric(m, zero)))
        }
        Family::SgLimitEven { n } | Family::SgLimitOdd { n } => {
            if *n == 0 {
                return Err(Error::invalid("n must be at least 1"));
            }
            let odd = matches!(family, Family::SgLimitOdd { .. });
            let base: Vec<f64> = (1..=*n)
                .map(|k| {
                    if odd {
                        2.0 * PI * k as f64
                    } else {
                        PI * (2 * k - 1) as f64
                    }
                })
                .collect();
            let roots = product_roots_symmetric(&base, odd);
            let rho: Vec<f64> = roots
                .iter()
                .map(|&r| if r == 0.0 { 1.0 } else { r })
                .collect();
            let scale = if odd { 0.5 } else { 2.0 };
            Form::Product(ProductForm::new(scale, roots, rho))
        }
        Family::DsgOne { eta } => {
            if !(eta.is_finite() && *eta > -0.25) {
                return Err(Error::invalid(format!("dsg1 needs eta > -1/4, got {eta}")));
            }
            Form::DsgOne(DsgOne { eta: *eta })
        }
        Family::DsgTwo { eta } => {
            if !(eta.is_finite() && *eta < -0.25) {
                return Err(Error::invalid(format!("dsg2 needs eta < -1/4, got {eta}")));
            }
            Form::DsgTwo(DsgTwo::new(*eta))
        }
    };
    let mut p = Potential {
        label: family.to_string(),
        family: Some(family),
        form,
        wells: Vec::new(),
        window: DEFAULT_WINDOW,
    };
    p.wells = p.enumerate_wells(DEFAULT_WINDOW);
    Ok(p)
}

impl Potential {
    /// Potential from a parsed definition file; the declared wells are checked.
    pub fn from_definition(label: impl Into<String>, def: Definition) -> Result<Self> {
        let (form, wells) = match def {
            Definition::Polynomial {
                coefficients,
                wells,
            } => (Form::Polynomial(Polynomial { coefficients }), wells),
            Definition::TrigPoly { poly, wells } => (Form::TrigPoly(poly), wells),
            Definition::Product {
                scale,
                roots,
                wells,
            } => {
                let mut sorted = roots.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::invalid("product roots must be distinct"));
                }
                if !(scale > 0.0) {
                    return Err(Error::invalid("product scale must be positive"));
                }
                (Form::Product(ProductForm::monic(scale, sorted)), wells)
            }
        };
        Self::custom(label.into(), form, wells)
    }

    /// Potential backed by closures; wells are checked.
    pub fn from_callback(
        label: impl Into<String>,
        callback: Callback,
        wells: Vec<f64>,
    ) -> Result<Self> {
        Self::custom(label.into(), Form::Callback(callback), wells)
    }

    fn custom(label: String, form: Form, mut wells: Vec<f64>) -> Result<Self> {
        wells.sort_by(f64::total_cmp);
        if wells.len() < 2 {
            return Err(Error::invalid("at least two wells are required"));
        }
        let lo = wells[0];
        let hi = wells[wells.len() - 1];
        let p = Potential {
            label,
            family: None,
            form,
            wells,
            window: (lo, hi),
        };
        validate_wells(&p, (lo, hi))?;
        Ok(p)
    }

    fn enumerate_wells(&self, window: (f64, f64)) -> Vec<f64> {
        let (lo, hi) = window;
        match &self.form {
            Form::SineGordon => trig::sine_gordon_wells(lo, hi),
            Form::DsgOne(_) => DsgOne::wells(lo, hi),
            Form::DsgTwo(d) => d.wells(lo, hi),
            Form::Product(p) => p.roots().to_vec(),
            _ => self.wells.clone(),
        }
    }

    /// Re-enumerates the wells of a periodic potential inside `[lo, hi]`.
    pub fn with_window(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid(format!("empty window [{lo}, {hi}]")));
        }
        self.window = (lo, hi);
        self.wells = self.enumerate_wells((lo, hi));
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn wells(&self) -> &[f64] {
        &self.wells
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Highest derivative order available from [`Potential::eval`].
    pub fn eval_order_max(&self) -> usize {
        3
    }

    /// `W^{(k)}(φ)` for `k ≤ 3`.
    pub fn eval(&self, phi: f64, k: usize) -> Result<f64> {
        if k > self.eval_order_max() {
            return Err(Error::DerivativeUnavailable {
                order: k,
                max: self.eval_order_max(),
            });
        }
        Ok(self.jet(phi).get(k))
    }

    /// `W(φ)`.
    pub fn value(&self, phi: f64) -> f64 {
        match &self.form {
            Form::SineGordon => trig::sine_gordon_value(phi),
            _ => self.jet(phi).w,
        }
    }

    /// `W'(φ)`, with a fast path for the families used in time stepping.
    pub fn first_derivative(&self, phi: f64) -> f64 {
        match &self.form {
            Form::Product(p) => p.first_derivative(phi),
            Form::SineGordon => trig::sine_gordon_slope(phi),
            _ => self.jet(phi).d1,
        }
    }

    /// `W`, `W'`, `W''`, `W'''` at `φ`.
    pub fn jet(&self, phi: f64) -> Jet {
        match &self.form {
            Form::Product(p) => p.jet(phi),
            Form::SineGordon => trig::sine_gordon(phi),
            Form::DsgOne(d) => d.jet(phi),
            Form::DsgTwo(d) => d.jet(phi),
            Form::Polynomial(p) => p.jet(phi),
            Form::TrigPoly(p) => p.jet(phi),
            Form::Callback(c) => c.jet(phi),
            Form::Perturbed { base, alpha } => {
                let j = perturbed_jet(base, alpha, phi);
                if j.w.is_finite() && j.d3.is_finite() {
                    return j;
                }
                // removable singularity of α (e.g. a ratio at a shared root):
                // average the two neighbouring jets
                let h = 1e-7 * (1.0 + phi.abs());
                let a = perturbed_jet(base, alpha, phi - h);
                let b = perturbed_jet(base, alpha, phi + h);
                Jet {
                    w: 0.5 * (a.w + b.w),
                    d1: 0.5 * (a.d1 + b.d1),
                    d2: 0.5 * (a.d2 + b.d2),
                    d3: 0.5 * (a.d3 + b.d3),
                }
            }
            Form::Affine { base, map } => {
                let j = base.jet(map.inverse(phi));
                let amp = map.scale * map.scale * map.mu * map.mu;
                let r = map.sign() / map.scale;
                Jet {
                    w: amp * j.w,
                    d1: amp * r * j.d1,
                    d2: amp * r * r * j.d2,
                    d3: amp * r * r * r * j.d3,
                }
            }
        }
    }

    /// True when all derivatives come from exact formulas rather than
    /// finite differences.
    pub fn has_exact_derivatives(&self) -> bool {
        match &self.form {
            Form::Callback(c) => c.derivatives.len() >= 3,
            Form::Perturbed { base, alpha } => {
                base.has_exact_derivatives() && !matches!(alpha, Alpha::Callback(_))
            }
            Form::Affine { base, .. } => base.has_exact_derivatives(),
            _ => true,
        }
    }

    /// Closed-form `(V, V')` when the family provides one.
    pub fn closed_form_transformed(&self, phi: f64) -> Option<(f64, f64)> {
        match &self.form {
            Form::Product(p) => Some(p.transformed(phi)),
            Form::SineGordon => Some((1.0, 0.0)),
            Form::DsgOne(d) => Some(d.transformed(phi)),
            Form::DsgTwo(d) => Some(d.transformed(phi)),
            Form::Affine { base, map } => {
                base.closed_form_transformed(map.inverse(phi))
                    .map(|(v, vp)| {
                        let mu2 = map.mu * map.mu;
                        (mu2 * v, mu2 * map.sign() / map.scale * vp)
                    })
            }
            _ => None,
        }
    }

    /// Looks up the adjacent pair `(left, right)`; both values must match
    /// listed wells to within `1e-9·(1 + |ζ|)`.
    pub fn pair(&self, left: f64, right: f64) -> Result<WellPair> {
        let find = |z: f64| {
            self.wells
                .iter()
                .position(|&w| (w - z).abs() <= 1e-9 * (1.0 + z.abs()))
                .ok_or_else(|| Error::WellNotFound(format!("{z} is not a well of {}", self.label)))
        };
        let i = find(left)?;
        let j = find(right)?;
        if j != i + 1 {
            return Err(Error::NotAdjacentWells { left, right });
        }
        self.pair_at(i)
    }

    /// The `i`-th adjacent pair `(ζ_i, ζ_{i+1})` of the sorted well list.
    pub fn pair_at(&self, i: usize) -> Result<WellPair> {
        if i + 1 >= self.wells.len() {
            return Err(Error::WellNotFound(format!(
                "pair index {i} out of range for {} wells",
                self.wells.len()
            )));
        }
        let (left, right) = (self.wells[i], self.wells[i + 1]);
        let wl = self.jet(left).d2;
        let wr = self.jet(right).d2;
        for (z, d2) in [(left, wl), (right, wr)] {
            if !(d2 > 0.0) {
                return Err(Error::DegenerateWell {
                    phi: z,
                    second_derivative: d2,
                });
            }
        }
        Ok(WellPair {
            left,
            right,
            omega_minus: wl.sqrt(),
            omega_plus: wr.sqrt(),
        })
    }

    /// Pair whose left well is the listed well closest to `left`.
    pub fn pair_starting_at(&self, left: f64) -> Result<WellPair> {
        let i = nearest_index(&self.wells, left)
            .ok_or_else(|| Error::WellNotFound(format!("no wells near {left}")))?;
        self.pair_at(i)
    }

    /// Pair whose right well is the listed well closest to `right`.
    pub fn pair_ending_at(&self, right: f64) -> Result<WellPair> {
        let i = nearest_index(&self.wells, right)
            .ok_or_else(|| Error::WellNotFound(format!("no wells near {right}")))?;
        if i == 0 {
            return Err(Error::WellNotFound(format!("no well left of {right}")));
        }
        self.pair_at(i - 1)
    }

    /// All adjacent pairs.
    pub fn pairs(&self) -> Result<Vec<WellPair>> {
        (0..self.wells.len().saturating_sub(1))
            .map(|i| self.pair_at(i))
            .collect()
    }
}

fn perturbed_jet(base: &Potential, alpha: &Alpha, phi: f64) -> Jet {
    let w = base.jet(phi);
    let a = alpha.jet(phi);
    let a0 = 1.0 + a.w;
    Jet {
        w: a0 * w.w,
        d1: a.d1 * w.w + a0 * w.d1,
        d2: a.d2 * w.w + 2.0 * a.d1 * w.d1 + a0 * w.d2,
        d3: a.d3 * w.w + 3.0 * a.d2 * w.d1 + 3.0 * a.d1 * w.d2 + a0 * w.d3,
    }
}

fn nearest_index(values: &[f64], x: f64) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
}

/// Checks every listed well inside `window`: `W(ζ) = 0`, `W'(ζ) = 0`,
/// `W''(ζ) > 0`, and `W > 0` strictly between consecutive wells.
pub fn validate_wells(potential: &Potential, window: (f64, f64)) -> Result<Vec<f64>> {
    let wells: Vec<f64> = potential
        .wells()
        .iter()
        .copied()
        .filter(|&z| z >= window.0 && z <= window.1)
        .collect();
    for &z in &wells {
        let j = potential.jet(z);
        let scale = j.d2.abs().max(1.0);
        if !(j.w.abs() <= 1e-10 * scale) {
            return Err(Error::NotAWell {
                phi: z,
                reason: format!("W = {:e}", j.w),
            });
        }
        if !(j.d1.abs() <= 1e-8 * scale) {
            return Err(Error::NotAWell {
                phi: z,
                reason: format!("W' = {:e}", j.d1),
            });
        }
        if !(j.d2 > 0.0) {
            return Err(Error::DegenerateWell {
                phi: z,
                second_derivative: j.d2,
            });
        }
    }
    for w in wells.windows(2) {
        for k in 1..64 {
            let phi = w[0] + (w[1] - w[0]) * k as f64 / 64.0;
            let v = potential.value(phi);
            if !(v > 0.0) {
                return Err(Error::invalid(format!(
                    "W({phi}) = {v:e} is not positive between wells {} and {}",
                    w[0], w[1]
                )));
            }
        }
    }
    Ok(wells)
}

/// Affine normalisation sending the pair to `(0, 1)` with `W̃''(0) = 1`;
/// the field is reflected first when `W''(ζ₋) > W''(ζ₊)`.
pub fn normalize(potential: &Potential, pair: &WellPair) -> Result<(Potential, AffineMap)> {
    let wl = pair.omega_minus * pair.omega_minus;
    let wr = pair.omega_plus * pair.omega_plus;
    if !(wl > 0.0 && wr > 0.0) {
        return Err(Error::InvalidMap("wells must be nondegenerate".into()));
    }
    let reflected = wl > wr;
    let r = if reflected { -1.0 } else { 1.0 };
    let (u_lo, u_hi) = if reflected {
        (-pair.right, -pair.left)
    } else {
        (pair.left, pair.right)
    };
    let scale = 1.0 / (u_hi - u_lo);
    let shift = -scale * u_lo;
    let origin = r * u_lo;
    let mu = 1.0 / potential.jet(origin).d2.sqrt();
    let map = AffineMap {
        scale,
        shift,
        mu,
        reflected,
    };
    let mut wells: Vec<f64> = potential.wells().iter().map(|&z| map.forward(z)).collect();
    wells.sort_by(f64::total_cmp);
    // the pair lands on 0 and 1 up to rounding; snap it exactly
    for w in wells.iter_mut() {
        if w.abs() < 1e-12 {
            *w = 0.0;
        } else if (*w - 1.0).abs() < 1e-12 {
            *w = 1.0;
        }
    }
    let window = (
        map.forward(potential.window.0),
        map.forward(potential.window.1),
    );
    let out = Potential {
        label: format!("normalized({})", potential.label),
        family: None,
        form: Form::Affine {
            base: Box::new(potential.clone()),
            map,
        },
        wells,
        window: (window.0.min(window.1), window.0.max(window.1)),
    };
    Ok((out, map))
}

/// `W_α = (1 + α) W`. Wells of `W` where `1 + α` is finite and positive are
/// kept; at least two must survive.
pub fn perturb(potential: &Potential, alpha: Alpha) -> Result<Potential> {
    let wells: Vec<f64> = potential
        .wells()
        .iter()
        .copied()
        .filter(|&z| {
            // probe both sides so removable singularities at the well pass
            let h = 1e-7 * (1.0 + z.abs());
            [z - h, z + h].iter().all(|&x| {
                let a = 1.0 + alpha.jet(x).w;
                a.is_finite() && a > 0.0
            })
        })
        .collect();
    let mut out = Potential {
        label: format!("perturbed({})", potential.label),
        family: None,
        form: Form::Perturbed {
            base: Box::new(potential.clone()),
            alpha,
        },
        wells,
        window: potential.window,
    };
    // a pole of α can cancel a zero of W; such points are no longer wells
    let kept: Vec<f64> = out
        .wells
        .iter()
        .copied()
        .filter(|&z| {
            let j = out.jet(z);
            j.w.abs() <= 1e-10 * j.d2.abs().max(1.0) && j.d2 > 0.0
        })
        .collect();
    out.wells = kept;
    if out.wells.len() < 2 {
        return Err(Error::invalid(
            "1 + α must be finite and positive on at least two wells",
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(f: Family) -> Potential {
        make_family(f).unwrap()
    }

    #[test]
    fn built_in_wells_validate() {
        let fams = [
            Family::SineGordon,
            Family::Phi4,
            Family::Phi6,
            Family::Phi8 { m: 1.5 },
            Family::Phi10 { m: 2.0 },
            Family::W4n {
                m: vec![1.0, 3.0, 7.0],
            },
            Family::W4nPlus2 { m: vec![1.0, 2.5] },
            Family::SgLimitEven { n: 3 },
            Family::SgLimitOdd { n: 3 },
            Family::DsgOne { eta: -0.1 },
            Family::DsgOne { eta: 1.0 },
            Family::DsgTwo { eta: -1.0 },
        ];
        for f in fams {
            let p = family(f.clone());
            let w = validate_wells(&p, (-1e9, 1e9)).unwrap();
            assert!(w.len() >= 2, "{f}");
            p.pairs().unwrap();
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(make_family(Family::Phi8 { m: 1.0 }).is_err());
        assert!(make_family(Family::Phi10 { m: 0.5 }).is_err());
        assert!(make_family(Family::W4n { m: vec![1.0, 0.5] }).is_err());
        assert!(make_family(Family::W4n { m: vec![2.0, 3.0] }).is_err());
        assert!(make_family(Family::DsgOne { eta: -0.3 }).is_err());
        assert!(make_family(Family::DsgTwo { eta: 0.0 }).is_err());
        assert!(make_family(Family::SgLimitOdd { n: 0 }).is_err());
    }

    #[test]
    fn eval_order_limit() {
        let p = family(Family::Phi4);
        assert!(matches!(
            p.eval(0.3, 4),
            Err(Error::DerivativeUnavailable { order: 4, max: 3 })
        ));
        assert!((p.eval(0.3, 2).unwrap() - (12.0 * 0.09 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn pair_lookup() {
        let p = family(Family::Phi8 { m: 3.0 });
        let pr = p.pair(1.0, 3.0).unwrap();
        assert_eq!((pr.left, pr.right), (1.0, 3.0));
        assert!(matches!(
            p.pair(-1.0, 3.0),
            Err(Error::NotAdjacentWells { .. })
        ));
        assert!(matches!(p.pair(0.0, 1.0), Err(Error::WellNotFound(_))));
        let q = family(Family::Phi4);
        let pr = q.pair(-1.0, 1.0).unwrap();
        assert!((pr.omega_minus - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn normalization_of_phi8_pair() {
        let p = family(Family::Phi8 { m: 3.0 });
        let pr = p.pair(1.0, 3.0).unwrap();
        let (n, map) = normalize(&p, &pr).unwrap();
        assert!(!map.reflected);
        assert!((map.scale - 0.5).abs() < 1e-15);
        assert!((map.shift + 0.5).abs() < 1e-15);
        let np = n.pair(0.0, 1.0).unwrap();
        assert!((np.omega_minus - 1.0).abs() < 1e-12);
        assert!(np.omega_plus >= np.omega_minus);
    }

    #[test]
    fn normalization_reflects_when_needed() {
        let p = family(Family::Phi6);
        let pr = p.pair(-1.0, 0.0).unwrap();
        let (n, map) = normalize(&p, &pr).unwrap();
        assert!(map.reflected);
        let np = n.pair(0.0, 1.0).unwrap();
        assert!((np.omega_minus - 1.0).abs() < 1e-12);
        assert!((np.omega_plus - 2.0).abs() < 1e-12);
    }

    #[test]
    fn perturbation_reproduces_phi8() {
        let k1 = (2.0 + 3f64.sqrt()).sqrt();
        let m = 1.7;
        let base = family(Family::Phi8 { m: k1 });
        let alpha = Alpha::RatioMinusOne {
            numerator: Box::new(family(Family::Phi8 { m })),
            denominator: Box::new(base.clone()),
        };
        let w = perturb(&base, alpha).unwrap();
        assert_eq!(w.wells(), &[-1.0, 1.0]);
        let target = family(Family::Phi8 { m });
        for x in [-0.9, -0.3, 0.2, 0.8] {
            let a = w.jet(x);
            let b = target.jet(x);
            for k in 0..4 {
                assert!(
                    (a.get(k) - b.get(k)).abs() < 1e-9 * (1.0 + b.get(k).abs()),
                    "k={k} x={x}"
                );
            }
        }
    }
}
