//! Radial basis function interpolation with a small kernel family.
//!
//! Plain interpolation, no polynomial tail: weights solve `(Φ + λI) w = f`
//! with `Φ_ij = φ(‖X_i − X_j‖₂)` and `λ = 0` whenever the geometry allows.
//! When the plain solve fails its residual check, a short Tikhonov ladder is
//! escalated until the system becomes solvable; the applied level is recorded
//! on the model.

use std::fmt;
use std::str::FromStr;

use faer::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::{euclidean, EvaluatedPoint, DUP_TOL};
use crate::{Error, Result};

/// Relative residual bound `‖Φw − f‖∞ <= RESIDUAL_RTOL · (1 + ‖f‖∞)` a fit
/// must meet to be accepted.
pub const RESIDUAL_RTOL: f64 = 1e-6;

/// Tikhonov levels tried, in order, after the plain `λ = 0` solve fails.
pub const TIKHONOV_LADDER: [f64; 4] = [1e-12, 1e-10, 1e-8, 1e-6];

/// The supported kernel shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Multiquadric,
    Cubic,
    ThinPlateSpline,
    Linear,
    Gaussian,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            KernelKind::Multiquadric => "multiquadric",
            KernelKind::Cubic => "cubic",
            KernelKind::ThinPlateSpline => "thin_plate_spline",
            KernelKind::Linear => "linear",
            KernelKind::Gaussian => "gaussian",
        };
        f.write_str(name)
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mq" | "multiquadric" => Ok(KernelKind::Multiquadric),
            "cubic" => Ok(KernelKind::Cubic),
            "tps" | "thin_plate_spline" | "thin-plate-spline" => Ok(KernelKind::ThinPlateSpline),
            "linear" => Ok(KernelKind::Linear),
            "gaussian" => Ok(KernelKind::Gaussian),
            other => Err(Error::invalid(format!(
                "unknown kernel '{other}' (expected mq, cubic, tps, linear, or gaussian)"
            ))),
        }
    }
}

/// A kernel plus its shape parameter `c` (used by the multiquadric and
/// Gaussian kernels, ignored by the rest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfKernel {
    pub kind: KernelKind,
    pub c: f64,
}

impl RbfKernel {
    pub fn new(kind: KernelKind, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!(
                "kernel shape parameter must be positive, got {c}"
            )));
        }
        Ok(Self { kind, c })
    }

    /// Multiquadric with the conventional `c = 1`.
    pub fn multiquadric() -> Self {
        Self {
            kind: KernelKind::Multiquadric,
            c: 1.0,
        }
    }

    /// Kernel value at radius `r >= 0`; negative radii are a caller bug.
    pub fn phi(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "kernel radius must be nonnegative, got {r}");
        match self.kind {
            KernelKind::Multiquadric => (r * r + self.c * self.c).sqrt(),
            KernelKind::Cubic => r * r * r,
            // r² ln r extended by its limit 0 at r = 0.
            KernelKind::ThinPlateSpline => {
                if r == 0.0 {
                    0.0
                } else {
                    r * r * r.ln()
                }
            }
            KernelKind::Linear => r,
            KernelKind::Gaussian => (-(r * r) / (self.c * self.c)).exp(),
        }
    }
}

/// A fitted interpolant `s(x) = Σ_j w_j φ(‖x − X_j‖₂)`.
#[derive(Debug, Clone)]
pub struct RbfModel {
    kernel: RbfKernel,
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    regularization: f64,
}

/// Interpolates the given points, escalating through the Tikhonov ladder when
/// the plain solve misses the residual bound. Errors on fewer than two
/// points, coincident centers, or geometry no ladder level can rescue.
pub fn fit(points: &[EvaluatedPoint], kernel: RbfKernel) -> Result<RbfModel> {
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "rbf fit needs at least 2 points, got {n}"
        )));
    }
    let dim = points[0].x.len();
    for p in points {
        if p.x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.x.len(),
            });
        }
    }

    // Assemble Φ once; the ladder only perturbs the diagonal.
    let mut phi = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..i {
            let r = euclidean(&points[i].x, &points[j].x);
            if r < DUP_TOL {
                return Err(Error::SurrogateFit(format!(
                    "centers {j} and {i} coincide within {DUP_TOL:e}"
                )));
            }
            let v = kernel.phi(r);
            phi[i * n + j] = v;
            phi[j * n + i] = v;
        }
        phi[i * n + i] = kernel.phi(0.0);
    }

    let f: Vec<f64> = points.iter().map(|p| p.f).collect();
    let f_norm = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = RESIDUAL_RTOL * (1.0 + f_norm);
    let rhs = Mat::from_fn(n, 1, |i, _| f[i]);

    for lambda in std::iter::once(0.0).chain(TIKHONOV_LADDER) {
        let a = Mat::from_fn(n, n, |i, j| {
            phi[i * n + j] + if i == j { lambda } else { 0.0 }
        });
        let w = a.partial_piv_lu().solve(&rhs);
        let weights: Vec<f64> = (0..n).map(|i| w[(i, 0)]).collect();
        if !weights.iter().all(|v| v.is_finite()) {
            continue;
        }
        // Check interpolation quality against the unregularized system.
        let mut residual = 0.0f64;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += phi[i * n + j] * weights[j];
            }
            residual = residual.max((s - f[i]).abs());
        }
        if residual <= tol {
            return Ok(RbfModel {
                kernel,
                centers: points.iter().map(|p| p.x.clone()).collect(),
                weights,
                regularization: lambda,
            });
        }
    }

    Err(Error::SurrogateFit(format!(
        "interpolation residual above {tol:e} at every regularization level \
         (degenerate geometry, n = {n})"
    )))
}

impl RbfModel {
    pub fn kernel(&self) -> RbfKernel {
        self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The Tikhonov level the accepted solve used (0 for plain interpolation).
    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    /// Evaluates the interpolant; panics on dimension mismatch.
    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(
            x.len(),
            self.dim(),
            "rbf value: point dimension {} does not match model dimension {}",
            x.len(),
            self.dim()
        );
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * self.kernel.phi(euclidean(c, x)))
            .sum()
    }

    /// Index of the candidate with the smallest interpolant value; ties go to
    /// the lowest index. Panics on an empty candidate list.
    pub fn select_min(&self, candidates: &[Vec<f64>]) -> usize {
        assert!(!candidates.is_empty(), "select_min: empty candidate list");
        let mut best = 0;
        let mut best_v = self.value(&candidates[0]);
        for (i, c) in candidates.iter().enumerate().skip(1) {
            let v = self.value(c);
            if v < best_v {
                best = i;
                best_v = v;
            }
        }
        best
    }
}
