//! Sign structure of `V'` on a kink range, parameter thresholds, the
//! level sets of `V'` for the φ⁸/φ¹⁰ families, well-spacing certificates for
//! the φ⁴ⁿ family and the sine-Gordon limit families.
//!
//! A kink is *repulsive at ζ₀* when `(φ − ζ₀) V'(φ) ≤ 0` on `(ζ₋, ζ₊)`.
//! The classifier samples `V'` on Chebyshev points, refines every sign
//! change by bisection, probes local minima of `|V'|` for hidden pairs of
//! crossings and clusters extra samples geometrically around everything it
//! finds, so that close pairs of zeros near a threshold are resolved.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::chebyshev_points;
use crate::numerics::roots::{bisect, golden_min};
use crate::potentials::{
    make_family, transformed, Family, Potential, TransformedPotential, WellPair,
};

/// Outcome of the repulsivity test on one kink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "zeta0", rename_all = "kebab-case")]
pub enum Classification {
    /// `V` is constant on the range (sine-Gordon).
    ConstantTransformedPotential,
    /// `(φ − ζ₀)V' ≤ 0` with an interior `ζ₀`.
    SatisfiedAtPoint(f64),
    /// `V' ≤ 0` throughout: repulsive at `ζ₀ = ζ₋`.
    SatisfiedAtLeftEnd,
    /// `V' ≥ 0` throughout: repulsive at `ζ₀ = ζ₊`.
    SatisfiedAtRightEnd,
    Inconclusive,
}

impl Classification {
    /// True for the three repulsive verdicts.
    pub fn is_satisfied(&self) -> bool {
        matches!(
            self,
            Classification::SatisfiedAtPoint(_)
                | Classification::SatisfiedAtLeftEnd
                | Classification::SatisfiedAtRightEnd
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            Classification::ConstantTransformedPotential => "constant",
            Classification::SatisfiedAtPoint(_) => "satisfied-at-point",
            Classification::SatisfiedAtLeftEnd => "satisfied-at-left-end",
            Classification::SatisfiedAtRightEnd => "satisfied-at-right-end",
            Classification::Inconclusive => "inconclusive",
        }
    }

    /// The same verdict after the reflection `φ → −φ`, which exchanges the
    /// two ends of the range.
    pub fn reflected(&self) -> Self {
        match *self {
            Classification::SatisfiedAtLeftEnd => Classification::SatisfiedAtRightEnd,
            Classification::SatisfiedAtRightEnd => Classification::SatisfiedAtLeftEnd,
            Classification::SatisfiedAtPoint(z) => Classification::SatisfiedAtPoint(-z),
            other => other,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::SatisfiedAtPoint(z) => write!(f, "satisfied-at-point({z:.10})"),
            other => f.write_str(other.label()),
        }
    }
}

/// A refined sign change of `V'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignChange {
    pub location: f64,
    pub bracket: (f64, f64),
    /// Sign of `V'` to the left of the zero.
    pub from_positive: bool,
}

/// Tolerances for [`classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Chebyshev samples on the interior window, at least 256.
    pub n_samples: usize,
    /// Constancy test `sup|V'|·(ζ₊−ζ₋) ≤ constant_tol·sup|V|`.
    pub constant_tol: f64,
    /// `|V'| ≤ sign_tol·sup|V'|` counts as zero.
    pub sign_tol: f64,
    /// Sampling window `[ζ₋ + e·w, ζ₊ − e·w]`, `w = ζ₊ − ζ₋`.
    pub end_margin: f64,
    /// Zero refinement width relative to `w`.
    pub zero_tol: f64,
    /// Flag distance from the satisfied/inconclusive boundary.
    pub near_threshold: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            n_samples: 1024,
            constant_tol: 1e-9,
            sign_tol: 1e-12,
            end_margin: 1e-4,
            zero_tol: 1e-10,
            near_threshold: 1e-6,
        }
    }
}

/// Result of [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub pair: WellPair,
    pub classification: Classification,
    pub vprime_zeros: Vec<SignChange>,
    /// `min −sgn(φ − ζ₀) V'(φ) / sup|V'|` over the samples for the best
    /// available `ζ₀`; non-negative up to the sign tolerance iff satisfied.
    pub margin: f64,
    /// True when the verdict is within `near_threshold` of flipping.
    pub near_threshold: bool,
    /// `sup|V'|·(ζ₊−ζ₋)/sup|V|`, compared with `constant_tol`.
    pub constancy: f64,
    pub constant_tol_used: f64,
    /// Absolute zero tolerance `sign_tol·sup|V'|`.
    pub sign_tol_used: f64,
    pub samples: usize,
    pub warnings: Vec<String>,
}

struct Samples {
    x: Vec<f64>,
    v: Vec<f64>,
}

fn sign_of(v: f64, tol: f64) -> i8 {
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

/// Classifies the kink of `tp.pair()`.
pub fn classify(tp: &TransformedPotential, opts: &ClassifyOptions) -> Result<CriterionReport> {
    if opts.n_samples < 256 {
        return Err(Error::invalid(format!(
            "classification needs at least 256 samples, got {}",
            opts.n_samples
        )));
    }
    let pair = *tp.pair();
    let w = pair.width();
    let a = pair.left + opts.end_margin * w;
    let b = pair.right - opts.end_margin * w;
    let mut warnings = Vec::new();

    let vp = |x: f64| tp.derivative(x);
    let mut xs = chebyshev_points(a, b, opts.n_samples);
    xs.extend(geometric_cluster(a, 1.0, 1e-8 * (b - a), 0.5 * (b - a)));
    xs.extend(geometric_cluster(b, -1.0, 1e-8 * (b - a), 0.5 * (b - a)));
    let mut s = Samples {
        x: Vec::new(),
        v: Vec::new(),
    };
    add_points(&mut s, xs, &vp, a, b, &mut warnings);
    if s.x.len() < 2 {
        return Err(Error::invalid(
            "V' could not be evaluated on the kink range",
        ));
    }

    let sup_v =
        s.x.iter()
            .map(|&x| tp.value(x).abs())
            .fold(0.0f64, f64::max);
    let scale = s.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let constancy = if sup_v > 0.0 {
        scale * w / sup_v
    } else {
        f64::INFINITY
    };
    if constancy <= opts.constant_tol {
        return Ok(CriterionReport {
            pair,
            classification: Classification::ConstantTransformedPotential,
            vprime_zeros: Vec::new(),
            margin: 0.0,
            near_threshold: false,
            constancy,
            constant_tol_used: opts.constant_tol,
            sign_tol_used: opts.sign_tol * scale,
            samples: s.x.len(),
            warnings,
        });
    }
    let tol = opts.sign_tol * scale;
    let ztol = opts.zero_tol * w;

    // Refinement passes: bisect sign changes, probe |V'| minima, cluster.
    let mut zeros = Vec::new();
    for _pass in 0..6 {
        zeros = refine_zeros(&s, &vp, tol, ztol);
        let mut extra = Vec::new();
        for z in &zeros {
            extra.extend(geometric_cluster(z.location, 1.0, 1e-12 * w, 1e-2 * w));
            extra.extend(geometric_cluster(z.location, -1.0, 1e-12 * w, 1e-2 * w));
            extra.push(z.bracket.0);
            extra.push(z.bracket.1);
        }
        let mut hidden = false;
        for (xm, vm) in probe_minima(&s, &vp, tol, ztol) {
            if sign_of(vm, tol) == 0 || extra.contains(&xm) {
                continue;
            }
            hidden |= true;
            extra.push(xm);
            extra.extend(geometric_cluster(xm, 1.0, 1e-12 * w, 1e-2 * w));
            extra.extend(geometric_cluster(xm, -1.0, 1e-12 * w, 1e-2 * w));
        }
        let before = s.x.len();
        add_points(&mut s, extra, &vp, a, b, &mut warnings);
        let again = refine_zeros(&s, &vp, tol, ztol);
        if again.len() == zeros.len() && (!hidden || s.x.len() == before) {
            zeros = again;
            break;
        }
    }

    // Signs including the limits at the wells.
    let left_limit = sign_of(vp(pair.left), tol);
    let right_limit = sign_of(vp(pair.right), tol);
    let mut signs: Vec<i8> = s.v.iter().map(|&v| sign_of(v, tol)).collect();
    signs.insert(0, left_limit);
    signs.push(right_limit);
    // An end limit that disagrees with the adjacent samples is one more
    // sign change inside the excluded margin.
    let mut end_changes = 0;
    if let Some(first) = signs[1..].iter().copied().find(|&g| g != 0) {
        if left_limit != 0 && left_limit != first {
            end_changes += 1;
        }
    }
    if let Some(last) = signs[..signs.len() - 1]
        .iter()
        .rev()
        .copied()
        .find(|&g| g != 0)
    {
        if right_limit != 0 && right_limit != last {
            end_changes += 1;
        }
    }
    let nonzero: Vec<i8> = signs.iter().copied().filter(|&g| g != 0).collect();

    let classification = if end_changes > 0 {
        Classification::Inconclusive
    } else if zeros.is_empty() {
        if nonzero.iter().all(|&g| g > 0) {
            Classification::SatisfiedAtRightEnd
        } else if nonzero.iter().all(|&g| g < 0) {
            Classification::SatisfiedAtLeftEnd
        } else {
            Classification::Inconclusive
        }
    } else if zeros.len() == 1 && zeros[0].from_positive {
        Classification::SatisfiedAtPoint(zeros[0].location)
    } else {
        Classification::Inconclusive
    };

    // Margin for the best candidate ζ₀.
    let mut candidates = vec![pair.left, pair.right];
    candidates.extend(zeros.iter().map(|z| z.location));
    let (margin, interior_min) = candidates
        .iter()
        .map(|&z0| margin_at(&s, z0, scale, ztol))
        .fold((f64::NEG_INFINITY, f64::INFINITY), |best, m| {
            if m.0 > best.0 {
                m
            } else {
                best
            }
        });
    let near_threshold = if classification.is_satisfied() {
        interior_min < opts.near_threshold
    } else {
        margin > -opts.near_threshold
    };

    Ok(CriterionReport {
        pair,
        classification,
        vprime_zeros: zeros,
        margin,
        near_threshold,
        constancy,
        constant_tol_used: opts.constant_tol,
        sign_tol_used: tol,
        samples: s.x.len(),
        warnings,
    })
}

/// Points `c + dir·h₀·2^k` for `k ≥ 0` while the offset stays below `limit`.
fn geometric_cluster(c: f64, dir: f64, h0: f64, limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut h = h0;
    while h <= limit {
        out.push(c + dir * h);
        h *= 2.0;
    }
    out
}

fn add_points<F: Fn(f64) -> f64>(
    s: &mut Samples,
    pts: Vec<f64>,
    f: &F,
    a: f64,
    b: f64,
    warnings: &mut Vec<String>,
) {
    let mut merged: Vec<(f64, f64)> = s.x.iter().copied().zip(s.v.iter().copied()).collect();
    for x in pts {
        if !(x >= a && x <= b) {
            continue;
        }
        let v = f(x);
        if v.is_finite() {
            merged.push((x, v));
        } else if warnings.len() < 8 {
            warnings.push(format!("V' is not finite at {x}; sample dropped"));
        }
    }
    merged.sort_by(|p, q| p.0.total_cmp(&q.0));
    merged.dedup_by(|p, q| p.0 == q.0);
    s.x = merged.iter().map(|p| p.0).collect();
    s.v = merged.iter().map(|p| p.1).collect();
}

/// Sign changes between consecutive samples with a definite sign.
fn refine_zeros<F: Fn(f64) -> f64>(s: &Samples, f: &F, tol: f64, ztol: f64) -> Vec<SignChange> {
    let mut out = Vec::new();
    let mut last: Option<(usize, i8)> = None;
    for i in 0..s.x.len() {
        let g = sign_of(s.v[i], tol);
        if g == 0 {
            continue;
        }
        if let Some((j, gj)) = last {
            if gj != g {
                let (lo, hi) = bisect(f, s.x[j], s.x[i], ztol);
                out.push(SignChange {
                    location: 0.5 * (lo + hi),
                    bracket: (lo, hi),
                    from_positive: gj > 0,
                });
            }
        }
        last = Some((i, g));
    }
    out
}

/// Local minima of `|V'|` between samples of one sign; returns the minimiser
/// of `sgn·V'` on the neighbouring bracket whenever its sign differs.
fn probe_minima<F: Fn(f64) -> f64>(s: &Samples, f: &F, tol: f64, ztol: f64) -> Vec<(f64, f64)> {
    let n = s.x.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let (g0, g1, g2) = (
            sign_of(s.v[i - 1], tol),
            sign_of(s.v[i], tol),
            sign_of(s.v[i + 1], tol),
        );
        if g1 == 0 || g0 != g1 || g2 != g1 {
            continue;
        }
        let m = s.v[i].abs();
        if m > s.v[i - 1].abs() || m > s.v[i + 1].abs() {
            continue;
        }
        let sg = g1 as f64;
        let (xm, vm) = golden_min(|x| sg * f(x), s.x[i - 1], s.x[i + 1], ztol);
        if vm < -tol {
            out.push((xm, sg * vm));
        }
    }
    out
}

/// `(min −sgn(φ−ζ₀)V'/scale, smallest such value at samples that are
/// local minima away from ζ₀ and the window ends)`.
fn margin_at(s: &Samples, z0: f64, scale: f64, ztol: f64) -> (f64, f64) {
    let n = s.x.len();
    let q: Vec<f64> = (0..n)
        .map(|i| {
            let d = s.x[i] - z0;
            if d.abs() <= ztol {
                0.0
            } else {
                -d.signum() * s.v[i] / scale
            }
        })
        .collect();
    let min = q.iter().copied().fold(f64::INFINITY, f64::min);
    let mut interior = f64::INFINITY;
    for i in 1..n.saturating_sub(1) {
        if (s.x[i] - z0).abs() <= 1e-6 * (s.x[n - 1] - s.x[0]) {
            continue;
        }
        if q[i] <= q[i - 1] && q[i] <= q[i + 1] {
            interior = interior.min(q[i]);
        }
    }
    (min, interior)
}

/// Selects the kink of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PairSelector {
    /// The `i`-th pair of consecutive wells (from the left).
    Index(usize),
    /// The pair whose left well is the given value.
    StartingAt(f64),
    /// The pair whose right well is the given value.
    EndingAt(f64),
}

impl PairSelector {
    pub fn select(&self, p: &Potential) -> Result<WellPair> {
        match *self {
            PairSelector::Index(i) => p.pair_at(i),
            PairSelector::StartingAt(v) => p.pair_starting_at(v),
            PairSelector::EndingAt(v) => p.pair_ending_at(v),
        }
    }
}

/// One-parameter families that threshold scans and level sets act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParamFamily {
    Phi8,
    Phi10,
    DsgOne,
    DsgTwo,
}

impl ParamFamily {
    pub fn build(&self, value: f64) -> Family {
        match self {
            ParamFamily::Phi8 => Family::Phi8 { m: value },
            ParamFamily::Phi10 => Family::Phi10 { m: value },
            ParamFamily::DsgOne => Family::DsgOne { eta: value },
            ParamFamily::DsgTwo => Family::DsgTwo { eta: value },
        }
    }

    pub fn parameter_name(&self) -> &'static str {
        match self {
            ParamFamily::Phi8 | ParamFamily::Phi10 => "m",
            ParamFamily::DsgOne | ParamFamily::DsgTwo => "eta",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "phi8" => Ok(ParamFamily::Phi8),
            "phi10" => Ok(ParamFamily::Phi10),
            "dsg1" => Ok(ParamFamily::DsgOne),
            "dsg2" => Ok(ParamFamily::DsgTwo),
            other => Err(Error::invalid(format!(
                "unknown one-parameter family '{other}' (expected phi8, phi10, dsg1 or dsg2)"
            ))),
        }
    }
}

/// Classifies the selected kink of `family`.
pub fn classify_family(
    family: &Family,
    selector: PairSelector,
    opts: &ClassifyOptions,
) -> Result<CriterionReport> {
    let p = make_family(family.clone())?;
    let pair = selector.select(&p)?;
    classify(&transformed(&p, &pair), opts)
}

/// Bracket of a satisfied/inconclusive transition in a family parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub class_lo: Classification,
    pub class_hi: Classification,
    pub classifications: usize,
}

/// Bisects on the satisfied verdict of the selected kink until the bracket
/// is narrower than `tol`.
pub fn threshold_scan(
    family: ParamFamily,
    range: (f64, f64),
    selector: PairSelector,
    tol: f64,
    opts: &ClassifyOptions,
) -> Result<ThresholdResult> {
    let run = |v: f64| -> Result<Classification> {
        Ok(classify_family(&family.build(v), selector, opts)?.classification)
    };
    let (mut lo, mut hi) = (range.0.min(range.1), range.0.max(range.1));
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut c_lo = run(lo)?;
    let mut c_hi = run(hi)?;
    let mut count = 2;
    if c_lo.is_satisfied() == c_hi.is_satisfied() {
        return Err(Error::BracketInvalid(format!(
            "{} is {} at {lo} and {} at {hi}",
            family.parameter_name(),
            c_lo,
            c_hi
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let c = run(mid)?;
        count += 1;
        if c.is_satisfied() == c_lo.is_satisfied() {
            lo = mid;
            c_lo = c;
        } else {
            hi = mid;
            c_hi = c;
        }
    }
    Ok(ThresholdResult {
        parameter: family.parameter_name().to_string(),
        lo,
        hi,
        estimate: 0.5 * (lo + hi),
        class_lo: c_lo,
        class_hi: c_hi,
        classifications: count,
    })
}

/// Sign grid of `V'(φ; m)` with its zero contour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSet {
    pub family: ParamFamily,
    pub phi: Vec<f64>,
    pub m: Vec<f64>,
    /// `vprime[i][j] = V'(phi[j]; m[i])`.
    pub vprime: Vec<Vec<f64>>,
    /// Sign of `V'`, with 0 where it vanishes exactly.
    pub sign: Vec<Vec<i8>>,
    /// Marching-squares segments `((φ₁, m₁), (φ₂, m₂))` of `V'/φ = 0`.
    pub contour: Vec<((f64, f64), (f64, f64))>,
}

/// `V'(φ; m) / φ` of the φ⁸ or φ¹⁰ family, whose zero set is the
/// non-trivial part of `V' = 0`. With `W = f²` and `f` the monic polynomial
/// `(φ² − 1)(φ² − m²)` (times `φ` for φ¹⁰), `V = 2f'² − 2ff''` and
/// `V' = 2(f'f'' − ff''')`; the factor `φ` is divided out by hand. Unlike the
/// potential objects this stays valid for `m ≤ 1`, where the wells merge or
/// swap.
pub fn family_reduced_vprime(family: ParamFamily, phi: f64, m: f64) -> f64 {
    let a = 1.0 + m * m;
    let b = m * m;
    let x2 = phi * phi;
    let g = x2 * x2 - a * x2 + b;
    match family {
        // f = g, f' = φ(4φ² − 2a), f'' = 12φ² − 2a, f''' = 24φ
        ParamFamily::Phi8 => 2.0 * ((4.0 * x2 - 2.0 * a) * (12.0 * x2 - 2.0 * a) - 24.0 * g),
        // f = φg, f' = 5φ⁴ − 3aφ² + b, f'' = φ(20φ² − 6a), f''' = 60φ² − 6a
        _ => {
            2.0 * ((5.0 * x2 * x2 - 3.0 * a * x2 + b) * (20.0 * x2 - 6.0 * a)
                - g * (60.0 * x2 - 6.0 * a))
        }
    }
}

/// `V'(φ; m)` of the φ⁸ or φ¹⁰ family; see [`family_reduced_vprime`].
pub fn family_vprime(family: ParamFamily, phi: f64, m: f64) -> f64 {
    // `+ 0.0` turns −0 into +0
    phi * family_reduced_vprime(family, phi, m) + 0.0
}

/// Evaluates `V'` of the φ⁸ or φ¹⁰ family on `phi_grid × m_grid`.
pub fn level_set(family: ParamFamily, phi_grid: &[f64], m_grid: &[f64]) -> Result<LevelSet> {
    if !matches!(family, ParamFamily::Phi8 | ParamFamily::Phi10) {
        return Err(Error::invalid("level sets are defined for phi8 and phi10"));
    }
    if phi_grid.len() < 2 || m_grid.len() < 2 {
        return Err(Error::invalid(
            "level-set grids need at least two points each",
        ));
    }
    let reduced: Vec<Vec<f64>> = m_grid
        .par_iter()
        .map(|&m| {
            phi_grid
                .iter()
                .map(|&x| family_reduced_vprime(family, x, m))
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = reduced
        .iter()
        .map(|r| r.iter().zip(phi_grid).map(|(&u, &x)| x * u + 0.0).collect())
        .collect();
    let sign = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| {
                    if v > 0.0 {
                        1
                    } else if v < 0.0 {
                        -1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let contour = marching_squares(phi_grid, m_grid, &reduced);
    Ok(LevelSet {
        family,
        phi: phi_grid.to_vec(),
        m: m_grid.to_vec(),
        vprime: rows,
        sign,
        contour,
    })
}

fn marching_squares(xs: &[f64], ys: &[f64], f: &[Vec<f64>]) -> Vec<((f64, f64), (f64, f64))> {
    let mut segs = Vec::new();
    let cross = |p: (f64, f64, f64), q: (f64, f64, f64)| -> Option<(f64, f64)> {
        let (a, b) = (p.2, q.2);
        if (a >= 0.0) == (b >= 0.0) {
            return None;
        }
        let t = a / (a - b);
        Some((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)))
    };
    for i in 0..ys.len() - 1 {
        for j in 0..xs.len() - 1 {
            let c = [
                (xs[j], ys[i], f[i][j]),
                (xs[j + 1], ys[i], f[i][j + 1]),
                (xs[j + 1], ys[i + 1], f[i + 1][j + 1]),
                (xs[j], ys[i + 1], f[i + 1][j]),
            ];
            if c.iter().any(|p| !p.2.is_finite()) {
                continue;
            }
            let pts: Vec<(f64, f64)> = (0..4).filter_map(|k| cross(c[k], c[(k + 1) % 4])).collect();
            match pts.len() {
                2 if pts[0] != pts[1] => segs.push((pts[0], pts[1])),
                4 => {
                    // saddle: pair edges according to the sign of the centre
                    let centre = 0.25 * c.iter().map(|p| p.2).sum::<f64>();
                    if (centre >= 0.0) == (c[0].2 >= 0.0) {
                        segs.push((pts[0], pts[3]));
                        segs.push((pts[1], pts[2]));
                    } else {
                        segs.push((pts[0], pts[1]));
                        segs.push((pts[2], pts[3]));
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

/// Branches `m = M±(φ)` of the non-trivial zero set of `V'` (`U(φ; m) = 0`)
/// for φ⁸ and φ¹⁰, where real and positive.
pub fn analytic_branches(family: ParamFamily, phi: f64) -> Vec<f64> {
    let x2 = phi * phi;
    let (b, disc) = match family {
        // U₈ = m⁴ − 2m²(φ²+2) + 6φ⁴ − 2φ² + 1
        ParamFamily::Phi8 => (x2 + 2.0, -5.0 * x2 * x2 + 6.0 * x2 + 3.0),
        // U₁₀ = m⁴ − 2(φ² + 2/3)m² + (10/3)φ⁴ − 2φ² + 1
        ParamFamily::Phi10 => (
            x2 + 2.0 / 3.0,
            -7.0 / 3.0 * x2 * x2 + 10.0 / 3.0 * x2 - 5.0 / 9.0,
        ),
        _ => return Vec::new(),
    };
    if disc < 0.0 {
        return Vec::new();
    }
    let r = disc.sqrt();
    [b - r, b + r]
        .into_iter()
        .filter(|&m2| m2 > 0.0)
        .map(f64::sqrt)
        .collect()
}

/// Largest distance in `m` from a contour segment midpoint with
/// `|φ| > phi_min` to the nearest analytic branch.
pub fn contour_branch_deviation(ls: &LevelSet, phi_min: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for &((x1, m1), (x2, m2)) in &ls.contour {
        let (x, m) = (0.5 * (x1 + x2), 0.5 * (m1 + m2));
        if x.abs() <= phi_min {
            continue;
        }
        let d = analytic_branches(ls.family, x)
            .into_iter()
            .map(|b| (b - m).abs())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    worst
}

/// `U₄ₙ(φ; m)` from the explicit double sum, with `V'₄ₙ = 8φU₄ₙ`.
pub fn u4n(phi: f64, m: &[f64]) -> f64 {
    let x2 = phi * phi;
    let f: Vec<f64> = m.iter().map(|&mk| x2 - mk * mk).collect();
    let mut total = r4n(phi, m);
    for (k, &mk) in m.iter().enumerate() {
        for (j, &fj) in f.iter().enumerate() {
            if j == k {
                continue;
            }
            let mut prod = (x2 + mk * mk) * fj;
            for (l, fl) in f.iter().enumerate() {
                if l != k && l != j {
                    prod *= fl * fl;
                }
            }
            total += 2.0 * prod;
        }
    }
    total
}

/// `R₄ₙ(φ; m) = Σ_k Π_{j≠k} (φ² − m_j²)²`.
pub fn r4n(phi: f64, m: &[f64]) -> f64 {
    let x2 = phi * phi;
    (0..m.len())
        .map(|k| {
            m.iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, &mj)| (x2 - mj * mj).powi(2))
                .product::<f64>()
        })
        .sum()
}

/// `c₂(λ₁) = inf_{m ≥ λ₁, φ ≥ 0} U₈/R₈` from the completed-square form
/// `6U₈ = (6φ² − 1 − m²)² + (m² − 5)(5m² − 1)`, evaluated on `m ∈ [λ₁, 50λ₁]`
/// and `φ = t·m`, `t ∈ [0, 3]`, and reduced by `0.1%` for the sampling.
pub fn c2_for_lambda1(lambda1: f64) -> Result<f64> {
    if !(lambda1 > 5f64.sqrt()) {
        return Err(Error::invalid(format!("λ₁ must exceed √5, got {lambda1}")));
    }
    let mut best = f64::INFINITY;
    let nm = 400;
    let nt = 3000;
    for i in 0..=nm {
        let m = lambda1 * 50f64.powf(i as f64 / nm as f64);
        let m2 = m * m;
        for k in 0..=nt {
            let x = 3.0 * m * k as f64 / nt as f64;
            let x2 = x * x;
            let u = ((6.0 * x2 - 1.0 - m2).powi(2) + (m2 - 5.0) * (5.0 * m2 - 1.0)) / 6.0;
            let r = (x2 - 1.0).powi(2) + (x2 - m2).powi(2);
            best = best.min(u / r);
        }
    }
    Ok(0.999 * best)
}

/// `(c₂, …, cₙ)` and `(λ₁, …, λ_{n−1})` from `c_{k+1} = min(1, c_k/2)` and
/// `λ_k = √((c_k + 8)/c_k)` for `k ≥ 2`.
pub fn lambda_schedule(lambda1: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::invalid("the schedule needs n ≥ 2"));
    }
    let mut cs = vec![c2_for_lambda1(lambda1)?];
    let mut lambdas = vec![lambda1];
    for _ in 2..n {
        let c = *cs.last().unwrap_or(&1.0);
        lambdas.push(((c + 8.0) / c).sqrt());
        cs.push(1f64.min(0.5 * c));
    }
    Ok((cs, lambdas))
}

/// Wells `m₁ = 1`, `m_{k+1} = λ_k m_k` generated from the schedule.
pub fn schedule_wells(lambda1: f64, n: usize) -> Result<Vec<f64>> {
    let (_, lambdas) = lambda_schedule(lambda1, n)?;
    let mut m = vec![1.0];
    for l in lambdas {
        let last = *m.last().unwrap_or(&1.0);
        m.push(l * last);
    }
    Ok(m)
}

/// Numeric and schedule verdicts for a well configuration of the φ⁴ⁿ family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityCertificate {
    pub m: Vec<f64>,
    /// `min U₄ₙ/R₄ₙ` over the sampled `φ ≥ 0`.
    pub min_ratio: f64,
    pub argmin_phi: f64,
    /// `min_ratio > 0`.
    pub numeric_positive: bool,
    pub lambda1: f64,
    pub c: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `m_{k+1} ≥ λ_k m_k` for all `k`.
    pub schedule_satisfied: bool,
    /// `min_ratio ≥ cₙ`.
    pub meets_bound: bool,
    /// Largest relative gap between `U₄ₙ` and `V'/(8φ)` of the built family.
    pub cross_check: f64,
}

/// Checks `U₄ₙ ≥ 0` on a dense grid of `φ ≥ 0` and the spacing schedule.
pub fn wells_positivity(m: &[f64], lambda1: f64) -> Result<PositivityCertificate> {
    if m.len() < 2 {
        return Err(Error::invalid("wells_positivity needs at least two wells"));
    }
    if m.windows(2).any(|w| !(w[1] > w[0])) || !(m[0] > 0.0) {
        return Err(Error::invalid(format!(
            "wells must be positive and increasing, got {m:?}"
        )));
    }
    let n = m.len();
    let mut knots = vec![0.0];
    knots.extend_from_slice(m);
    knots.push(2.0 * m[n - 1]);
    let per = 4000;
    let mut min_ratio = f64::INFINITY;
    let mut argmin = 0.0;
    for seg in knots.windows(2) {
        for k in 0..=per {
            let x = seg[0] + (seg[1] - seg[0]) * k as f64 / per as f64;
            let r = r4n(x, m);
            if r <= 0.0 {
                continue;
            }
            let q = u4n(x, m) / r;
            if q < min_ratio {
                min_ratio = q;
                argmin = x;
            }
        }
    }
    // cross-check against the transformed potential of the built family
    let scaled: Vec<f64> = m.iter().map(|v| v / m[0]).collect();
    let fam = make_family(Family::W4n { m: scaled.clone() })?;
    let mut cross: f64 = 0.0;
    for k in 1..200 {
        let x = 1.7 * scaled[n - 1] * k as f64 / 200.0;
        if let Some((_, vp)) = fam.closed_form_transformed(x) {
            let u = u4n(x, &scaled);
            let denom = u.abs().max(r4n(x, &scaled));
            cross = cross.max((vp / (8.0 * x) - u).abs() / denom);
        }
    }
    let (c, lambdas) = lambda_schedule(lambda1, n)?;
    let schedule_satisfied = m.windows(2).zip(&lambdas).all(|(w, l)| w[1] >= l * w[0]);
    let cn = *c.last().unwrap_or(&0.0);
    Ok(PositivityCertificate {
        m: m.to_vec(),
        min_ratio,
        argmin_phi: argmin,
        numeric_positive: min_ratio > 0.0,
        lambda1,
        c,
        lambdas,
        schedule_satisfied,
        meets_bound: min_ratio >= cn,
        cross_check: cross,
    })
}

/// Verdict for one kink of a sine-Gordon limit family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinkVerdict {
    pub j: i64,
    pub left: f64,
    pub right: f64,
    pub classification: Classification,
}

/// Classifications for the kinks of `W̃₄ₙ₊₂` (`SgLimitOdd`, ranges
/// `(2πj, 2π(j+1))`) and `W̃₄ₙ` (`SgLimitEven`, ranges `(π(2j−1), π(2j+1))`)
/// with `|j| ≤ J`, plus the smallest `n` in `1..=n_max` for which all
/// targeted kinks are satisfied (the odd kink of `W̃₄ₙ` is excluded).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgLimitReport {
    pub n: usize,
    pub j_max: usize,
    pub odd_family: Vec<KinkVerdict>,
    pub even_family: Vec<KinkVerdict>,
    pub n_of_j_odd: Option<usize>,
    pub n_of_j_even: Option<usize>,
}

fn sg_limit_kinks(
    n: usize,
    j_max: usize,
    odd: bool,
    opts: &ClassifyOptions,
) -> Result<Vec<KinkVerdict>> {
    use std::f64::consts::PI;
    let fam = if odd {
        Family::SgLimitOdd { n }
    } else {
        Family::SgLimitEven { n }
    };
    let p = make_family(fam)?;
    let jm = j_max as i64;
    let ni = n as i64;
    let mut out = Vec::new();
    for j in -jm..=jm {
        let (left, right) = if odd {
            if j < -ni || j + 1 > ni {
                continue;
            }
            (2.0 * PI * j as f64, 2.0 * PI * (j + 1) as f64)
        } else {
            if 2 * j.abs() + 1 > 2 * ni - 1 {
                continue;
            }
            (PI * (2 * j - 1) as f64, PI * (2 * j + 1) as f64)
        };
        let pair = p.pair(left, right)?;
        let rep = classify(&transformed(&p, &pair), opts)?;
        out.push(KinkVerdict {
            j,
            left: pair.left,
            right: pair.right,
            classification: rep.classification,
        });
    }
    Ok(out)
}

pub fn sg_limit_report(
    n: usize,
    j_max: usize,
    n_max: usize,
    opts: &ClassifyOptions,
) -> Result<SgLimitReport> {
    if n == 0 || j_max == 0 || j_max > n {
        return Err(Error::invalid(format!(
            "need 1 ≤ J ≤ n, got n = {n}, J = {j_max}"
        )));
    }
    let odd_family = sg_limit_kinks(n, j_max, true, opts)?;
    let even_family = sg_limit_kinks(n, j_max, false, opts)?;
    let first_n = |odd: bool| -> Result<Option<usize>> {
        for k in 1..=n_max {
            let v = sg_limit_kinks(k, j_max, odd, opts)?;
            let all = v
                .iter()
                .filter(|kv| odd || kv.j != 0)
                .all(|kv| kv.classification.is_satisfied());
            let complete = v.len() >= if odd { 2 * j_max } else { 2 * j_max + 1 };
            if all && complete {
                return Ok(Some(k));
            }
        }
        Ok(None)
    };
    Ok(SgLimitReport {
        n,
        j_max,
        n_of_j_odd: first_n(true)?,
        n_of_j_even: first_n(false)?,
        odd_family,
        even_family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn run(f: Family, left: f64, right: f64) -> CriterionReport {
        let p = make_family(f).unwrap();
        let pr = p.pair(left, right).unwrap();
        classify(&transformed(&p, &pr), &ClassifyOptions::default()).unwrap()
    }

    #[test]
    fn reference_classifications() {
        assert_eq!(
            run(Family::SineGordon, 0.0, 2.0 * PI).classification,
            Classification::ConstantTransformedPotential
        );
        assert_eq!(
            run(Family::Phi4, -1.0, 1.0).classification,
            Classification::Inconclusive
        );
        assert_eq!(
            run(Family::Phi6, 0.0, 1.0).classification,
            Classification::SatisfiedAtRightEnd
        );
        match run(Family::Phi8 { m: 1.5 }, -1.0, 1.0).classification {
            Classification::SatisfiedAtPoint(z) => assert!(z.abs() < 1e-10),
            other => panic!("{other}"),
        }
        assert_eq!(
            run(Family::Phi8 { m: 1.5 }, 1.0, 1.5).classification,
            Classification::Inconclusive
        );
        assert!(run(Family::Phi8 { m: 3.0 }, 1.0, 3.0)
            .classification
            .is_satisfied());
        assert_eq!(
            run(Family::Phi8 { m: 3.0 }, -1.0, 1.0).classification,
            Classification::Inconclusive
        );
    }

    #[test]
    fn phi4_zero_is_reported_with_wrong_orientation() {
        let r = run(Family::Phi4, -1.0, 1.0);
        assert_eq!(r.vprime_zeros.len(), 1);
        assert!(!r.vprime_zeros[0].from_positive);
        assert!(r.vprime_zeros[0].location.abs() < 1e-10);
        assert!(r.margin < -0.1);
    }

    #[test]
    fn u4n_matches_closed_form_u8() {
        for &(x, m) in &[(0.0, 1.5), (0.7, 3.0), (2.0, 2.2), (5.0, 10.0)] {
            let x2: f64 = x * x;
            let m2 = m * m;
            let u8 = m2 * m2 - 2.0 * m2 * (x2 + 2.0) + 6.0 * x2 * x2 - 2.0 * x2 + 1.0;
            assert!((u4n(x, &[1.0, m]) - u8).abs() < 1e-10 * (1.0 + u8.abs()));
        }
    }

    #[test]
    fn analytic_branch_at_origin_is_k1() {
        let b = analytic_branches(ParamFamily::Phi8, 0.0);
        assert!(b
            .iter()
            .any(|m| (m - (2.0 + 3f64.sqrt()).sqrt()).abs() < 1e-14));
    }

    #[test]
    fn reflected_labels_swap_ends() {
        assert_eq!(
            Classification::SatisfiedAtLeftEnd.reflected(),
            Classification::SatisfiedAtRightEnd
        );
    }

    #[test]
    fn trigonometric_and_phi10_classifications() {
        match run(Family::DsgOne { eta: -0.1 }, -2.0 * PI, 2.0 * PI).classification {
            Classification::SatisfiedAtPoint(z) => assert!(z.abs() < 1e-9),
            other => panic!("{other}"),
        }
        assert_eq!(
            run(Family::DsgOne { eta: 1.0 }, -2.0 * PI, 2.0 * PI).classification,
            Classification::Inconclusive
        );
        let p = make_family(Family::DsgTwo { eta: -1.0 }).unwrap();
        let wells = p.wells().to_vec();
        let z = wells
            .iter()
            .copied()
            .find(|w| *w > 0.0 && *w < 4.0)
            .unwrap();
        assert!((z - 3.646_953_3).abs() < 1e-6);
        assert!(run(Family::DsgTwo { eta: -1.0 }, -z, z)
            .classification
            .is_satisfied());
        assert_eq!(
            run(Family::DsgTwo { eta: -1.0 }, z, 4.0 * PI - z).classification,
            Classification::Inconclusive
        );
        for (l, r) in [(0.0, 1.0), (1.0, 2.0)] {
            assert_eq!(
                run(Family::Phi10 { m: 2.0 }, l, r).classification,
                Classification::SatisfiedAtRightEnd
            );
        }
        for n in [2, 5, 10] {
            assert_eq!(
                run(Family::SgLimitEven { n }, -PI, PI).classification,
                Classification::Inconclusive
            );
        }
    }

    #[test]
    fn thresholds_bracket_closed_forms() {
        let opts = ClassifyOptions::default();
        let cases = [
            (
                ParamFamily::Phi8,
                (1.1, 3.0),
                PairSelector::StartingAt(-1.0),
                (2.0 + 3f64.sqrt()).sqrt(),
            ),
            (
                ParamFamily::Phi8,
                (1.1, 4.0),
                PairSelector::StartingAt(1.0),
                5f64.sqrt(),
            ),
            (
                ParamFamily::Phi10,
                (1.1, 3.0),
                PairSelector::StartingAt(1.0),
                21f64.sqrt() / 3.0,
            ),
        ];
        for (fam, range, sel, exact) in cases {
            let t = threshold_scan(fam, range, sel, 1e-7, &opts).unwrap();
            assert!(t.hi - t.lo <= 1e-7);
            assert!(
                (t.estimate - exact).abs() < 1e-6,
                "{fam:?}: {} vs {exact}",
                t.estimate
            );
            assert_ne!(t.class_lo.is_satisfied(), t.class_hi.is_satisfied());
        }
    }

    #[test]
    fn threshold_scan_rejects_unbracketed_range() {
        let r = threshold_scan(
            ParamFamily::Phi8,
            (3.0, 4.0),
            PairSelector::StartingAt(1.0),
            1e-6,
            &ClassifyOptions::default(),
        );
        assert!(matches!(r, Err(Error::BracketInvalid(_))));
    }

    #[test]
    fn level_set_contour_follows_analytic_branches() {
        let phi: Vec<f64> = (0..=240).map(|k| -0.2 + 2.4 * k as f64 / 240.0).collect();
        let m: Vec<f64> = (0..=240).map(|k| 1.01 + 2.5 * k as f64 / 240.0).collect();
        let ls = level_set(ParamFamily::Phi8, &phi, &m).unwrap();
        assert!(contour_branch_deviation(&ls, 0.05) < 0.02);
        // the contour meets φ = 0 near m = √(2+√3)
        let k1 = (2.0 + 3f64.sqrt()).sqrt();
        assert!(ls.contour.iter().any(|&((x1, m1), (x2, m2))| {
            x1.abs().max(x2.abs()) < 0.02 && (0.5 * (m1 + m2) - k1).abs() < 0.02
        }));
        // V' is odd in φ
        let sym: Vec<f64> = vec![-0.9, -0.4, 0.4, 0.9];
        let ls = level_set(ParamFamily::Phi10, &sym, &m).unwrap();
        for row in &ls.sign {
            assert_eq!(row[0], -row[3]);
            assert_eq!(row[1], -row[2]);
        }
        let ls10 = level_set(ParamFamily::Phi10, &phi, &m).unwrap();
        assert!(contour_branch_deviation(&ls10, 0.05) < 0.02);
    }

    #[test]
    fn family_vprime_matches_the_product_form() {
        for (fam, m) in [
            (ParamFamily::Phi8, 1.5),
            (ParamFamily::Phi8, 3.0),
            (ParamFamily::Phi10, 2.0),
        ] {
            let p = make_family(fam.build(m)).unwrap();
            for x in [-2.2, -0.7, 0.0, 0.3, 1.1, 1.9] {
                let want = p.closed_form_transformed(x).unwrap().1;
                let got = family_vprime(fam, x, m);
                assert!(
                    (got - want).abs() <= 1e-11 * (1.0 + want.abs()),
                    "{fam:?} m={m} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn phi10_branch_domain_endpoints() {
        let d = (40.0f64 / 147.0).sqrt();
        let (p1, p2) = ((5.0 / 7.0 - d).sqrt(), (5.0 / 7.0 + d).sqrt());
        // the two branches merge at m² = φ² + 2/3 on the domain ends
        for x in [p1 * (1.0 + 1e-12), p2 * (1.0 - 1e-12)] {
            let b = analytic_branches(ParamFamily::Phi10, x);
            assert_eq!(b.len(), 2);
            assert!((b[0] - b[1]).abs() < 1e-4);
            assert!((b[0] - (x * x + 2.0 / 3.0).sqrt()).abs() < 1e-4);
        }
        assert!(analytic_branches(ParamFamily::Phi10, 1.01 * p2).is_empty());
        assert!(analytic_branches(ParamFamily::Phi10, 0.5 * p1).is_empty());
    }

    #[test]
    fn wells_positivity_certificates() {
        let good = wells_positivity(&[1.0, 3.0], 2.3).unwrap();
        assert!(good.numeric_positive);
        assert!(good.cross_check < 1e-10);
        let bad = wells_positivity(&[1.0, 1.5], 2.3).unwrap();
        assert!(!bad.numeric_positive);
        // U₈(0; 1.5) = 5.0625 − 9 + 1 < 0, so the minimum ratio is negative
        assert!(bad.min_ratio < 0.0);
        assert!(wells_positivity(&[1.0, 0.5], 2.3).is_err());

        let m = schedule_wells(2.3, 4).unwrap();
        let cert = wells_positivity(&m, 2.3).unwrap();
        assert!(cert.schedule_satisfied);
        assert!(cert.numeric_positive);
        assert!(cert.meets_bound);
        assert!(cert.lambdas.iter().all(|&l| l > 1.0));
    }

    #[test]
    fn c2_and_schedule() {
        let c2 = c2_for_lambda1(2.3).unwrap();
        // 6U₈ at φ² = (1+m²)/6, m = λ₁ gives the infimum candidate
        let m2: f64 = 2.3 * 2.3;
        let x2 = (1.0 + m2) / 6.0;
        let cand = (m2 - 5.0) * (5.0 * m2 - 1.0) / 6.0 / ((x2 - 1.0).powi(2) + (x2 - m2).powi(2));
        assert!(c2 <= cand && c2 > 0.0);
        let (c, l) = lambda_schedule(2.3, 4).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(l.len(), 3);
        assert!((l[1] - ((c[0] + 8.0) / c[0]).sqrt()).abs() < 1e-12);
        assert!((c[1] - 0.5 * c[0]).abs() < 1e-15);
        assert!(c2_for_lambda1(2.0).is_err());
    }

    #[test]
    fn sg_limit_families() {
        let r = sg_limit_report(3, 1, 12, &ClassifyOptions::default()).unwrap();
        let odd = r.even_family.iter().find(|k| k.j == 0).unwrap();
        assert_eq!(odd.classification, Classification::Inconclusive);
        let centre = r.odd_family.iter().find(|k| k.j == 0).unwrap();
        assert_eq!(centre.classification, Classification::SatisfiedAtRightEnd);
        assert!(r.odd_family.iter().all(|k| k.classification.is_satisfied()));
        assert_eq!(r.n_of_j_odd, Some(1));
        assert_eq!(r.n_of_j_even, Some(2));
    }

    #[test]
    fn classification_survives_normalization() {
        let p = make_family(Family::Phi8 { m: 3.0 }).unwrap();
        for pr in p.pairs().unwrap() {
            let c = classify(&transformed(&p, &pr), &ClassifyOptions::default()).unwrap();
            let (np, map) = crate::potentials::normalize(&p, &pr).unwrap();
            let (l, r) = (map.forward(pr.left), map.forward(pr.right));
            let npr = np.pair(l.min(r), l.max(r)).unwrap();
            let cn = classify(&transformed(&np, &npr), &ClassifyOptions::default()).unwrap();
            let expected = if map.reflected {
                c.classification.reflected()
            } else {
                c.classification
            };
            match (expected, cn.classification) {
                (Classification::SatisfiedAtPoint(z), Classification::SatisfiedAtPoint(zn)) => {
                    let zm = if map.reflected {
                        map.forward(-z)
                    } else {
                        map.forward(z)
                    };
                    assert!((zm - zn).abs() < 1e-8);
                }
                (a, b) => assert_eq!(a.label(), b.label()),
            }
        }
    }

    #[test]
    fn satisfied_sign_pattern_holds_at_random_points() {
        use proptest::test_runner::{RngAlgorithm, TestRng};
        use rand::RngExt;
        let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
        let cases = [
            (Family::Phi6, 0.0, 1.0),
            (Family::Phi8 { m: 1.5 }, -1.0, 1.0),
            (Family::Phi8 { m: 3.0 }, 1.0, 3.0),
            (Family::Phi10 { m: 2.0 }, 1.0, 2.0),
            (Family::DsgOne { eta: -0.1 }, -2.0 * PI, 2.0 * PI),
        ];
        for (f, l, r) in cases {
            let p = make_family(f).unwrap();
            let pr = p.pair(l, r).unwrap();
            let tp = transformed(&p, &pr);
            let rep = classify(&tp, &ClassifyOptions::default()).unwrap();
            let z0 = match rep.classification {
                Classification::SatisfiedAtPoint(z) => z,
                Classification::SatisfiedAtLeftEnd => pr.left,
                Classification::SatisfiedAtRightEnd => pr.right,
                other => panic!("{other}"),
            };
            for _ in 0..100_000 {
                let x = l + (r - l) * rng.random::<f64>();
                assert!((x - z0) * tp.derivative(x) <= rep.sign_tol_used * (r - l));
            }
        }
    }
}
