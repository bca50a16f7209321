//! The transformed potential `V = (W')²/W − W''` on a well pair.

use super::custom::five_point;
use super::{Potential, WellPair};

/// `V` restricted to a well pair.
///
/// Closed forms are used when the family provides them. Otherwise `V` comes
/// from the jet of `W`; inside the end zone `|φ − ζ±| < η_end` it is replaced
/// by its Taylor expansion `V(ζ + s) ≈ W''(ζ) + W'''(ζ) s / 3`.
#[derive(Debug, Clone)]
pub struct TransformedPotential {
    potential: Potential,
    pair: WellPair,
    eta_end: f64,
}

/// Builds the transformed potential for `pair`, with the end-zone width
/// `η_end = 1e−6·(ζ₊ − ζ₋)`.
pub fn transformed(potential: &Potential, pair: &WellPair) -> TransformedPotential {
    TransformedPotential {
        potential: potential.clone(),
        pair: *pair,
        eta_end: 1e-6 * pair.width(),
    }
}

impl TransformedPotential {
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn pair(&self) -> &WellPair {
        &self.pair
    }

    pub fn eta_end(&self) -> f64 {
        self.eta_end
    }

    /// True when the closed form is not available and `φ` lies in the
    /// Taylor-regularised end zone.
    pub fn in_end_zone(&self, phi: f64) -> bool {
        self.end_well(phi).is_some() && self.potential.closed_form_transformed(phi).is_none()
    }

    fn end_well(&self, phi: f64) -> Option<f64> {
        [self.pair.left, self.pair.right]
            .into_iter()
            .find(|z| (phi - z).abs() < self.eta_end)
    }

    /// `V(φ)`.
    pub fn value(&self, phi: f64) -> f64 {
        if let Some((v, _)) = self.potential.closed_form_transformed(phi) {
            return v;
        }
        if let Some(z) = self.end_well(phi) {
            let j = self.potential.jet(z);
            return j.d2 + j.d3 * (phi - z) / 3.0;
        }
        let j = self.potential.jet(phi);
        j.d1 * j.d1 / j.w - j.d2
    }

    /// `V'(φ)`.
    pub fn derivative(&self, phi: f64) -> f64 {
        if let Some((_, vp)) = self.potential.closed_form_transformed(phi) {
            return vp;
        }
        if let Some(z) = self.end_well(phi) {
            return self.potential.jet(z).d3 / 3.0;
        }
        if self.potential.has_exact_derivatives() {
            let j = self.potential.jet(phi);
            let r = j.d1 / j.w;
            r * (2.0 * j.d2 - j.d1 * r) - j.d3
        } else {
            five_point(|x| self.value(x), phi, 1)
        }
    }
}
