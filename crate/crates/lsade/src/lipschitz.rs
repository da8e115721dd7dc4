//! Lipschitz-constant estimation and the cone underestimator surrogate.
//!
//! From the archive's maximal pairwise slope `max |Δf| / ‖Δx‖₂` the constant
//! is rounded up onto the grid `(1+α)^i`, giving a nondecreasing sequence of
//! estimates as points accumulate. The surrogate is the pointwise maximum of
//! the cones `f(X_i) − k̂·‖x − X_i‖₂`, a guaranteed underestimator whenever
//! `k̂` dominates the true Lipschitz constant.

use crate::archive::{euclidean, Archive, EvaluatedPoint};

/// Running maximum of the pairwise slopes, updated incrementally as the
/// archive grows: appending one point only scans its pairs with the existing
/// points. The maximum never decreases, so carrying it forward is exact
/// (`max_slope_scan` is the brute-force reference).
#[derive(Debug, Clone, Default)]
pub struct SlopeCache {
    max_slope: f64,
    seen: usize,
}

impl SlopeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn max_slope(&self) -> f64 {
        self.max_slope
    }

    /// Folds in all pairs involving points appended since the last call.
    pub fn update(&mut self, archive: &Archive) {
        let pts = archive.points();
        for j in self.seen..pts.len() {
            for i in 0..j {
                let s = pair_slope(&pts[i], &pts[j]);
                if s > self.max_slope {
                    self.max_slope = s;
                }
            }
        }
        self.seen = pts.len();
    }
}

/// Full O(n²) rescan of the maximal pairwise slope; 0.0 when fewer than two
/// points exist.
pub fn max_slope_scan(archive: &Archive) -> f64 {
    let pts = archive.points();
    let mut best = 0.0f64;
    for j in 1..pts.len() {
        for i in 0..j {
            best = best.max(pair_slope(&pts[i], &pts[j]));
        }
    }
    best
}

fn pair_slope(a: &EvaluatedPoint, b: &EvaluatedPoint) -> f64 {
    // The archive rejects coincident points, so the distance is never zero.
    (a.f - b.f).abs() / euclidean(&a.x, &b.x)
}

/// The fitted underestimator: `k̂` on the `(1+α)^i` grid plus a snapshot of
/// the archive it was fitted on.
#[derive(Debug, Clone)]
pub struct LipschitzModel {
    k_hat: f64,
    alpha: f64,
    max_slope: f64,
    centers: Vec<EvaluatedPoint>,
}

/// Estimates the Lipschitz constant from all archive pairs. Degenerate
/// archives (fewer than two points, or all values equal) yield `k̂ = 0`, the
/// flat model.
pub fn estimate_k(archive: &Archive, alpha: f64) -> LipschitzModel {
    estimate_k_with_slope(archive, alpha, max_slope_scan(archive))
}

/// Same as [`estimate_k`] but reuses a precomputed maximal slope (see
/// [`SlopeCache`]).
pub fn estimate_k_with_slope(archive: &Archive, alpha: f64, max_slope: f64) -> LipschitzModel {
    assert!(alpha > 0.0, "estimate_k: alpha must be positive");
    assert!(!archive.is_empty(), "estimate_k: archive must be nonempty");
    let k_hat = if max_slope > 0.0 {
        grid_round_up(max_slope, alpha)
    } else {
        0.0
    };
    LipschitzModel {
        k_hat,
        alpha,
        max_slope,
        centers: archive.points().to_vec(),
    }
}

/// Smallest `(1+alpha)^i` (integer `i`) that is >= `s`, computed via
/// logarithms and then nudged so the bracketing
/// `(1+alpha)^(i-1) < s <= (1+alpha)^i` holds exactly in floating point.
fn grid_round_up(s: f64, alpha: f64) -> f64 {
    let base = 1.0 + alpha;
    let mut i = (s.ln() / base.ln()).ceil() as i32;
    while base.powi(i) < s {
        i += 1;
    }
    while base.powi(i - 1) >= s {
        i -= 1;
    }
    base.powi(i)
}

impl LipschitzModel {
    pub fn k_hat(&self) -> f64 {
        self.k_hat
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn max_slope(&self) -> f64 {
        self.max_slope
    }

    pub fn centers(&self) -> &[EvaluatedPoint] {
        &self.centers
    }

    /// The underestimator `max_i f(X_i) − k̂·‖x − X_i‖₂`. With `k̂ = 0` this
    /// is the constant `max_i f(X_i)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        assert!(
            !self.centers.is_empty(),
            "lipschitz value: no centers to evaluate against"
        );
        self.centers
            .iter()
            .map(|p| p.f - self.k_hat * euclidean(&p.x, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the candidate with the smallest surrogate value; ties go to
    /// the lowest index. Panics on an empty candidate list.
    pub fn select_min(&self, candidates: &[Vec<f64>]) -> usize {
        assert!(
            !candidates.is_empty(),
            "select_min: empty candidate list"
        );
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
