//! User-defined potentials: explicit polynomials, trigonometric polynomials,
//! closures, the perturbation factors `α`, and the definition-file reader.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use super::{Jet, Potential};
use crate::error::{Error, Result};

/// Shared scalar function used for closure-backed potentials.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `W(φ) = Σ_k a_k φ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn jet(&self, phi: f64) -> Jet {
        // Horner with simultaneous derivatives.
        let (mut p, mut d1, mut d2, mut d3) = (0.0, 0.0, 0.0, 0.0);
        for &a in self.coefficients.iter().rev() {
            d3 = d3 * phi + 3.0 * d2;
            d2 = d2 * phi + 2.0 * d1;
            d1 = d1 * phi + p;
            p = p * phi + a;
        }
        Jet { w: p, d1, d2, d3 }
    }
}

/// `W(φ) = a₀ + Σ_{k≥1} [a_k cos(kνφ) + b_k sin(kνφ)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub frequency: f64,
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn jet(&self, phi: f64) -> Jet {
        let mut j = Jet {
            w: self.constant,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
        };
        let n = self.cos.len().max(self.sin.len());
        for k in 1..=n {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let w = k as f64 * self.frequency;
            let (s, c) = (w * phi).sin_cos();
            j.w += a * c + b * s;
            j.d1 += w * (-a * s + b * c);
            j.d2 += w * w * (-a * c - b * s);
            j.d3 += w * w * w * (a * s - b * c);
        }
        j
    }
}

/// Closure-backed potential. Missing derivatives are obtained by five-point
/// central differences.
#[derive(Clone)]
pub struct Callback {
    pub value: ScalarFn,
    /// Exact derivatives of orders 1, 2, 3 when available.
    pub derivatives: Vec<ScalarFn>,
}

impl fmt::Debug for Callback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Callback")
            .field("exact_derivatives", &self.derivatives.len())
            .finish()
    }
}

impl Callback {
    pub fn derivative(&self, phi: f64, order: usize) -> f64 {
        if order == 0 {
            return (self.value)(phi);
        }
        if let Some(d) = self.derivatives.get(order - 1) {
            return d(phi);
        }
        five_point(|x| (self.value)(x), phi, order)
    }

    pub fn jet(&self, phi: f64) -> Jet {
        Jet {
            w: self.derivative(phi, 0),
            d1: self.derivative(phi, 1),
            d2: self.derivative(phi, 2),
            d3: self.derivative(phi, 3),
        }
    }
}

/// Five-point central difference of order 1, 2 or 3.
///
/// The first derivative uses `h = ε^{1/3}·scale`; higher orders use
/// `ε^{1/4}` and `ε^{1/5}` so that round-off stays below truncation error.
pub fn five_point<F: Fn(f64) -> f64>(f: F, x: f64, order: usize) -> f64 {
    let scale = x.abs().max(1.0);
    let eps = f64::EPSILON;
    match order {
        1 => {
            let h = eps.cbrt() * scale;
            (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
        }
        2 => {
            let h = eps.powf(0.25) * scale;
            (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
                / (12.0 * h * h)
        }
        3 => {
            let h = eps.powf(0.2) * scale;
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
        }
        _ => f(x),
    }
}

/// Smooth factor `α` in `W_α = (1 + α) W`.
#[derive(Clone, Debug)]
pub enum Alpha {
    /// `α(φ) = Σ_k a_k φ^k`.
    Polynomial(Vec<f64>),
    /// `α = N/D − 1` for two potentials `N`, `D`.
    RatioMinusOne {
        numerator: Box<Potential>,
        denominator: Box<Potential>,
    },
    /// Closure; derivatives by five-point differences.
    Callback(Callback),
}

impl Alpha {
    /// Jet of `α` itself.
    pub fn jet(&self, phi: f64) -> Jet {
        match self {
            Alpha::Polynomial(c) => Polynomial {
                coefficients: c.clone(),
            }
            .jet(phi),
            Alpha::RatioMinusOne {
                numerator,
                denominator,
            } => {
                let n = numerator.jet(phi);
                let d = denominator.jet(phi);
                let q = n.w / d.w;
                let q1 = (n.d1 - q * d.d1) / d.w;
                let q2 = (n.d2 - 2.0 * q1 * d.d1 - q * d.d2) / d.w;
                let q3 = (n.d3 - 3.0 * q2 * d.d1 - 3.0 * q1 * d.d2 - q * d.d3) / d.w;
                Jet {
                    w: q - 1.0,
                    d1: q1,
                    d2: q2,
                    d3: q3,
                }
            }
            Alpha::Callback(c) => c.jet(phi),
        }
    }
}

/// Parsed definition file (`kind = polynomial|trigpoly|product`).
#[derive(Debug, Clone, PartialEq)]
pub enum Definition {
    Polynomial {
        coefficients: Vec<f64>,
        wells: Vec<f64>,
    },
    TrigPoly {
        poly: TrigPoly,
        wells: Vec<f64>,
    },
    Product {
        scale: f64,
        roots: Vec<f64>,
        wells: Vec<f64>,
    },
}

/// Parses a number, accepting a trailing `pi` factor (`pi`, `-pi`, `2pi`,
/// `0.5*pi`).
pub fn parse_number(token: &str) -> Result<f64> {
    let t = token.trim();
    let bad = || Error::Config(format!("cannot parse number '{t}'"));
    if let Some(prefix) = t.strip_suffix("pi") {
        let prefix = prefix.trim().trim_end_matches('*').trim();
        let factor = match prefix {
            "" | "+" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(factor * std::f64::consts::PI);
    }
    t.parse::<f64>().map_err(|_| bad())
}

/// Parses a comma-separated list of numbers; an empty string is an empty list.
pub fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_number)
        .collect()
}

fn strip_comment(v: &str) -> &str {
    v.split('#').next().unwrap_or("").trim()
}

impl Definition {
    /// Parses the text of a definition file.
    pub fn parse(text: &str) -> Result<Self> {
        let ini = ini::Ini::load_from_str(text)
            .map_err(|e| Error::Config(format!("definition file: {e}")))?;
        let sec = ini.general_section();
        let get = |k: &str| sec.get(k).map(strip_comment);
        let need = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing key '{k}'")));
        let kind = need("kind")?;
        let wells = get("wells").map(parse_list).transpose()?;
        match kind {
            "polynomial" => {
                let coefficients = parse_list(need("coefficients")?)?;
                let wells = wells.ok_or_else(|| Error::Config("missing key 'wells'".into()))?;
                Ok(Definition::Polynomial {
                    coefficients,
                    wells,
                })
            }
            "trigpoly" => {
                let poly = TrigPoly {
                    frequency: get("frequency")
                        .map(parse_number)
                        .transpose()?
                        .unwrap_or(1.0),
                    constant: get("constant")
                        .map(parse_number)
                        .transpose()?
                        .unwrap_or(0.0),
                    cos: get("cos").map(parse_list).transpose()?.unwrap_or_default(),
                    sin: get("sin").map(parse_list).transpose()?.unwrap_or_default(),
                };
                let wells = wells.ok_or_else(|| Error::Config("missing key 'wells'".into()))?;
                Ok(Definition::TrigPoly { poly, wells })
            }
            "product" => {
                let scale = get("scale").map(parse_number).transpose()?.unwrap_or(1.0);
                let roots = parse_list(need("roots")?)?;
                let wells = wells.unwrap_or_else(|| roots.clone());
                Ok(Definition::Product {
                    scale,
                    roots,
                    wells,
                })
            }
            other => Err(Error::Config(format!(
                "unknown kind '{other}' (expected polynomial, trigpoly or product)"
            ))),
        }
    }

    /// Reads and parses a definition file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_jet() {
        let p = Polynomial {
            coefficients: vec![1.0, 0.0, -2.0, 0.0, 1.0],
        };
        let j = p.jet(1.5);
        assert!((j.w - (1.5f64 * 1.5 - 1.0).powi(2)).abs() < 1e-14);
        assert!((j.d1 - 4.0 * 1.5 * (1.5 * 1.5 - 1.0)).abs() < 1e-13);
        assert!((j.d2 - (12.0 * 2.25 - 4.0)).abs() < 1e-13);
        assert!((j.d3 - 36.0).abs() < 1e-13);
    }

    #[test]
    fn trigpoly_jet() {
        let p = TrigPoly {
            frequency: 1.0,
            constant: 1.0,
            cos: vec![-1.0],
            sin: vec![],
        };
        let j = p.jet(0.7);
        assert!((j.w - (1.0 - 0.7f64.cos())).abs() < 1e-15);
        assert!((j.d1 - 0.7f64.sin()).abs() < 1e-15);
        assert!((j.d2 - 0.7f64.cos()).abs() < 1e-15);
        assert!((j.d3 + 0.7f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn five_point_derivatives() {
        let f = |x: f64| x.sin();
        assert!((five_point(f, 0.3, 1) - 0.3f64.cos()).abs() < 1e-10);
        assert!((five_point(f, 0.3, 2) + 0.3f64.sin()).abs() < 1e-7);
        assert!((five_point(f, 0.3, 3) + 0.3f64.cos()).abs() < 1e-5);
    }

    #[test]
    fn parses_definitions() {
        let d = Definition::parse(
            "# sine-Gordon as a trigonometric polynomial\nkind = trigpoly\nconstant = 1\ncos = -1\nwells = 0, 2pi\n",
        )
        .unwrap();
        match d {
            Definition::TrigPoly { poly, wells } => {
                assert_eq!(poly.cos, vec![-1.0]);
                assert!((wells[1] - 2.0 * std::f64::consts::PI).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let d = Definition::parse("kind = product\nroots = -1, 1\n").unwrap();
        assert_eq!(
            d,
            Definition::Product {
                scale: 1.0,
                roots: vec![-1.0, 1.0],
                wells: vec![-1.0, 1.0]
            }
        );
        assert!(Definition::parse("kind = spline\n").is_err());
        assert!(Definition::parse("kind = polynomial\nwells = 1\n").is_err());
    }
}
