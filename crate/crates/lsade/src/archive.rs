//! The evaluation archive: every exactly evaluated point in insertion order.
//!
//! The archive doubles as the training set for all surrogates, the parent
//! pool for differential evolution, and the source of the incumbent best.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Euclidean distance below which two decision vectors count as the same
/// point. Duplicates are rejected so surrogate fits never see coincident
/// centers and slope estimates never divide by zero.
pub const DUP_TOL: f64 = 1e-6;

/// A decision vector paired with its exact objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedPoint {
    pub x: Vec<f64>,
    pub f: f64,
}

/// Result of an insertion attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Appended at this index.
    Inserted(usize),
    /// Within [`DUP_TOL`] of an existing point; archive unchanged.
    Duplicate,
}

/// Ordered, duplicate-free collection of evaluated points.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    points: Vec<EvaluatedPoint>,
    best: usize,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[EvaluatedPoint] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &EvaluatedPoint {
        &self.points[i]
    }

    /// The minimal-`f` point; ties go to the earliest inserted.
    pub fn best(&self) -> Option<&EvaluatedPoint> {
        self.points.get(self.best)
    }

    pub fn best_index(&self) -> Option<usize> {
        if self.points.is_empty() {
            None
        } else {
            Some(self.best)
        }
    }

    /// True when `x` is within [`DUP_TOL`] of any archived point.
    pub fn is_duplicate(&self, x: &[f64]) -> bool {
        self.points
            .iter()
            .any(|p| euclidean(&p.x, x) < DUP_TOL)
    }

    /// Appends `p` unless it duplicates an existing point, keeping the best
    /// index current. Non-finite objective values signal a broken objective
    /// and are a hard error.
    pub fn insert(&mut self, p: EvaluatedPoint) -> Result<InsertOutcome> {
        if !p.f.is_finite() {
            return Err(Error::NonFiniteObjective { value: p.f, x: p.x });
        }
        if self.is_duplicate(&p.x) {
            return Ok(InsertOutcome::Duplicate);
        }
        let idx = self.points.len();
        // Strict comparison keeps the earliest point on ties.
        if self.points.is_empty() || p.f < self.points[self.best].f {
            self.best = idx;
        }
        self.points.push(p);
        Ok(InsertOutcome::Inserted(idx))
    }

    /// The `min(c, len)` best points, ascending in `f`, ties by insertion
    /// order. `c = 0` is a hard error.
    pub fn best_c(&self, c: usize) -> Result<Vec<&EvaluatedPoint>> {
        if c == 0 {
            return Err(Error::invalid("best_c: c must be at least 1"));
        }
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        // Stable sort on f preserves insertion order among equal values.
        idx.sort_by(|&a, &b| self.points[a].f.total_cmp(&self.points[b].f));
        Ok(idx
            .into_iter()
            .take(c)
            .map(|i| &self.points[i])
            .collect())
    }
}

/// Plain Euclidean distance; panics on mismatched dimensions.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "euclidean: dimension mismatch");
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], f: f64) -> EvaluatedPoint {
        EvaluatedPoint { x: x.to_vec(), f }
    }

    #[test]
    fn insert_tracks_best_and_rejects_duplicates() {
        let mut a = Archive::new();
        assert_eq!(
            a.insert(pt(&[0.0, 0.0], 5.0)).unwrap(),
            InsertOutcome::Inserted(0)
        );
        assert_eq!(a.best_index(), Some(0));

        // Zero distance is below the tolerance.
        assert_eq!(
            a.insert(pt(&[0.0, 0.0], 5.0)).unwrap(),
            InsertOutcome::Duplicate
        );
        assert_eq!(a.len(), 1);

        assert_eq!(
            a.insert(pt(&[1.0, 1.0], 3.0)).unwrap(),
            InsertOutcome::Inserted(1)
        );
        assert_eq!(a.len(), 2);
        assert_eq!(a.best_index(), Some(1));
        assert_eq!(a.best().unwrap().f, 3.0);
    }

    #[test]
    fn near_coincident_points_are_duplicates() {
        let mut a = Archive::new();
        a.insert(pt(&[0.0], 1.0)).unwrap();
        assert_eq!(
            a.insert(pt(&[DUP_TOL * 0.5], 2.0)).unwrap(),
            InsertOutcome::Duplicate
        );
        assert_eq!(
            a.insert(pt(&[DUP_TOL * 2.0], 2.0)).unwrap(),
            InsertOutcome::Inserted(1)
        );
    }

    #[test]
    fn non_finite_objective_is_a_hard_error() {
        let mut a = Archive::new();
        assert!(a.insert(pt(&[0.0], f64::NAN)).is_err());
        assert!(a.insert(pt(&[0.0], f64::INFINITY)).is_err());
        assert!(a.is_empty());
    }

    #[test]
    fn best_ties_go_to_earliest_insertion() {
        let mut a = Archive::new();
        a.insert(pt(&[0.0], 1.0)).unwrap();
        a.insert(pt(&[1.0], 1.0)).unwrap();
        a.insert(pt(&[2.0], 2.0)).unwrap();
        assert_eq!(a.best_index(), Some(0));
    }

    #[test]
    fn best_c_sorts_and_truncates() {
        let mut a = Archive::new();
        a.insert(pt(&[0.0], 3.0)).unwrap();
        a.insert(pt(&[1.0], 1.0)).unwrap();
        a.insert(pt(&[2.0], 2.0)).unwrap();

        let two = a.best_c(2).unwrap();
        assert_eq!(two.iter().map(|p| p.f).collect::<Vec<_>>(), vec![1.0, 2.0]);

        // Fewer available than requested: return what exists.
        let mut single = Archive::new();
        single.insert(pt(&[0.0], 1.0)).unwrap();
        assert_eq!(single.best_c(5).unwrap().len(), 1);

        assert!(a.best_c(0).is_err());
    }

    #[test]
    fn best_c_breaks_ties_by_insertion_order() {
        let mut a = Archive::new();
        a.insert(pt(&[0.0], 1.0)).unwrap();
        a.insert(pt(&[1.0], 1.0)).unwrap();
        a.insert(pt(&[2.0], 2.0)).unwrap();
        let top = a.best_c(1).unwrap();
        assert_eq!(top[0].x, vec![0.0]);
    }

    #[test]
    fn best_always_matches_linear_scan() {
        let mut a = Archive::new();
        let fs = [4.0, 2.0, 7.0, 2.0, -1.0, 3.0, -1.0];
        for (i, f) in fs.iter().enumerate() {
            a.insert(pt(&[i as f64], *f)).unwrap();
        }
        let scan = fs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.total_cmp(b))
            .unwrap()
            .0;
        assert_eq!(a.best_index(), Some(scan));
    }
}
