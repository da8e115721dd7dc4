//! Axis-aligned box constraints on the decision space.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The search box `[lower[i], upper[i]]` per coordinate, with
/// `lower[i] < upper[i]` everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBounds {
    /// Builds bounds after checking both vectors have equal nonzero length and
    /// every lower bound is strictly below its upper bound.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "bounds need equal nonzero lengths, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "bounds[{i}] must satisfy lower < upper with finite values, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The symmetric box `[-half, half]^dim`.
    pub fn symmetric(half: f64, dim: usize) -> Result<Self> {
        Self::new(vec![-half; dim], vec![half; dim])
    }

    /// The box `[lo, hi]^dim`.
    pub fn uniform(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// True when `x` lies inside the box, bounds inclusive.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, lo), hi)| lo <= v && v <= hi)
    }

    /// Projects `x` componentwise into the box.
    ///
    /// Panics if `x` has the wrong dimension.
    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.clamp_in_place(&mut out);
        out
    }

    /// In-place variant of [`BoxBounds::clamp`].
    pub fn clamp_in_place(&self, x: &mut [f64]) {
        assert_eq!(
            x.len(),
            self.dim(),
            "clamp: point dimension {} does not match bounds dimension {}",
            x.len(),
            self.dim()
        );
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }
}
