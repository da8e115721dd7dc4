//! Latin hypercube sampling for the initial design.

use rand::seq::SliceRandom;

use crate::bounds::BoxBounds;
use crate::rng::RngStream;
use crate::{Error, Result};

/// An `n x d` design on the unit cube where every column hits each of the `n`
/// strata `[k/n, (k+1)/n)` exactly once.
#[derive(Debug, Clone)]
pub struct LhsPlan {
    n: usize,
    d: usize,
    /// Row-major `n x d` values in `[0, 1)`.
    matrix: Vec<f64>,
}

impl LhsPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.d..(i + 1) * self.d]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.d + j]
    }
}

/// Classic Latin hypercube: per column an independent random permutation of
/// the strata, with a uniform offset inside each stratum.
pub fn lhs_sample(n: usize, d: usize, rng: &mut RngStream) -> Result<LhsPlan> {
    if n == 0 || d == 0 {
        return Err(Error::invalid(format!(
            "lhs_sample: need n >= 1 and d >= 1, got n={n}, d={d}"
        )));
    }
    let mut matrix = vec![0.0; n * d];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(rng);
        for (i, &s) in strata.iter().enumerate() {
            matrix[i * d + j] = (s as f64 + rng.unit()) / n as f64;
        }
    }
    Ok(LhsPlan { n, d, matrix })
}

/// Maps a unit-cube plan into `bounds`, coordinate by coordinate.
pub fn scale_plan(plan: &LhsPlan, bounds: &BoxBounds) -> Result<Vec<Vec<f64>>> {
    if plan.dim() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: plan.dim(),
        });
    }
    let lo = bounds.lower();
    let hi = bounds.upper();
    Ok((0..plan.n())
        .map(|i| {
            plan.row(i)
                .iter()
                .enumerate()
                .map(|(j, v)| lo[j] + v * (hi[j] - lo[j]))
                .collect()
        })
        .collect())
}
