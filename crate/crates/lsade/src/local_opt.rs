//! Local refinement: fit a surrogate over the current elite and minimize it
//! inside the elite's bounding box.
//!
//! The minimizer is a projected quasi-Newton descent: spectral
//! (Barzilai-Borwein) step lengths on forward-difference gradients, gradient
//! projection onto the box, and a halving backtracking line search under an
//! Armijo condition. Monotone descent and feasibility hold by construction.

use serde::{Deserialize, Serialize};

use crate::archive::{Archive, EvaluatedPoint};
use crate::rbf::{self, RbfKernel, RbfModel};
use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const SPECTRAL_MIN: f64 = 1e-10;
const SPECTRAL_MAX: f64 = 1e10;
const MIN_BACKTRACK: f64 = 1e-12;

/// Tuning for the local search step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    /// Elite size multiplier: the local model uses the best `c_factor * D`
    /// points (or fewer while the archive is small).
    pub c_factor: usize,
    /// Iteration cap for the inner minimization.
    pub max_inner_iterations: usize,
    /// Relative forward-difference step: `h_i = gradient_step * (1 + |x_i|)`.
    pub gradient_step: f64,
    /// Convergence threshold on the projected-gradient infinity norm.
    pub convergence_tol: f64,
}

impl LocalSearchConfig {
    /// Conventional settings for dimension `d`.
    pub fn for_dimension(d: usize) -> Self {
        Self {
            c_factor: 3,
            max_inner_iterations: 100 * d.max(1),
            gradient_step: 1e-7,
            convergence_tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_factor == 0 {
            return Err(Error::invalid("c_factor must be at least 1"));
        }
        if self.max_inner_iterations == 0 {
            return Err(Error::invalid("max_inner_iterations must be at least 1"));
        }
        if !(self.gradient_step > 0.0 && self.convergence_tol > 0.0) {
            return Err(Error::invalid(
                "gradient_step and convergence_tol must be positive",
            ));
        }
        Ok(())
    }
}

/// Componentwise bounding box of a point set; may be degenerate (`lb == ub`)
/// in coordinates the set does not spread across.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBox {
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

impl LocalBox {
    pub fn dim(&self) -> usize {
        self.lb.len()
    }

    /// Inclusive membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lb)
                .zip(&self.ub)
                .all(|((v, lo), hi)| lo <= v && v <= hi)
    }

    /// Componentwise projection into the box.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "project: dimension mismatch");
        x.iter()
            .zip(&self.lb)
            .zip(&self.ub)
            .map(|((v, lo), hi)| v.clamp(*lo, *hi))
            .collect()
    }
}

/// Componentwise min/max box over a nonempty point set.
pub fn local_bounds(points: &[&[f64]]) -> Result<LocalBox> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("local_bounds: empty point set"))?;
    let d = first.len();
    let mut lb = first.to_vec();
    let mut ub = first.to_vec();
    for p in &points[1..] {
        assert_eq!(p.len(), d, "local_bounds: mixed dimensions");
        for i in 0..d {
            lb[i] = lb[i].min(p[i]);
            ub[i] = ub[i].max(p[i]);
        }
    }
    Ok(LocalBox { lb, ub })
}

/// Minimizes the surrogate inside `lbox` starting from `start` (which must be
/// feasible). Degenerate coordinates are held fixed. The returned point is
/// feasible and never worse than the start under the model.
pub fn minimize_local(
    model: &RbfModel,
    lbox: &LocalBox,
    start: &[f64],
    cfg: &LocalSearchConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !lbox.contains(start) {
        return Err(Error::invalid(format!(
            "minimize_local: start {start:?} outside the local box"
        )));
    }
    let d = start.len();
    let frozen: Vec<bool> = lbox
        .lb
        .iter()
        .zip(&lbox.ub)
        .map(|(lo, hi)| lo == hi)
        .collect();

    let gradient = |x: &[f64], fx: f64| -> Vec<f64> {
        let mut g = vec![0.0; d];
        let mut xh = x.to_vec();
        for i in 0..d {
            if frozen[i] {
                continue;
            }
            let h = cfg.gradient_step * (1.0 + x[i].abs());
            xh[i] = x[i] + h;
            g[i] = (model.value(&xh) - fx) / h;
            xh[i] = x[i];
        }
        g
    };

    let mut x = start.to_vec();
    let mut fx = model.value(&x);
    let mut g = gradient(&x, fx);

    let projected_step = |x: &[f64], g: &[f64], lam: f64| -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - lam * gi).collect();
        let proj = lbox.project(&shifted);
        proj.iter().zip(x).map(|(p, xi)| p - xi).collect()
    };
    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();

    let mut lam = {
        let pg = projected_step(&x, &g, 1.0);
        let norm = inf_norm(&pg);
        if norm > 0.0 {
            (1.0 / norm).clamp(SPECTRAL_MIN, SPECTRAL_MAX)
        } else {
            return Ok(x);
        }
    };

    for _ in 0..cfg.max_inner_iterations {
        if inf_norm(&projected_step(&x, &g, 1.0)) < cfg.convergence_tol {
            break;
        }
        let mut dir = projected_step(&x, &g, lam);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            // The spectral step produced no descent direction; fall back to
            // the plain projected gradient.
            dir = projected_step(&x, &g, 1.0);
            slope = dot(&g, &dir);
            if !(slope < 0.0) {
                break;
            }
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= MIN_BACKTRACK {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + alpha * di).collect();
            let fn_ = model.value(&xn);
            if fn_ <= fx + ARMIJO * alpha * slope {
                accepted = Some((xn, fn_));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            break; // no improving step at any scale: numerically stationary
        };

        let gn = gradient(&xn, fn_);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        lam = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(SPECTRAL_MIN, SPECTRAL_MAX)
        } else {
            SPECTRAL_MAX
        };
        x = xn;
        fx = fn_;
        g = gn;
    }
    Ok(x)
}

/// One local-search proposal: fit a model over the best `c_factor * dim`
/// points, minimize it inside their bounding box from the incumbent best, and
/// return the minimizer unless it duplicates an archived point.
pub fn local_step(
    archive: &Archive,
    kernel: RbfKernel,
    cfg: &LocalSearchConfig,
    dim: usize,
) -> Result<Option<Vec<f64>>> {
    if archive.len() < 2 {
        return Err(Error::invalid(
            "local_step: need at least 2 archived points",
        ));
    }
    // At least two points so the model fit is well-posed.
    let c = (cfg.c_factor * dim).max(2).min(archive.len());
    let elite: Vec<EvaluatedPoint> = archive
        .best_c(c)?
        .into_iter()
        .cloned()
        .collect();
    let model = rbf::fit(&elite, kernel)?;
    let xs: Vec<&[f64]> = elite.iter().map(|p| p.x.as_slice()).collect();
    let lbox = local_bounds(&xs)?;
    // The incumbent best is among the elite, so the projection is a no-op in
    // exact arithmetic; it guards the feasibility precondition regardless.
    let start = lbox.project(&archive.best().expect("nonempty archive").x);
    let minimizer = minimize_local(&model, &lbox, &start, cfg)?;
    if archive.is_duplicate(&minimizer) {
        Ok(None)
    } else {
        Ok(Some(minimizer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    #[test]
    fn bounding_box_is_the_componentwise_extrema() {
        let pts: Vec<&[f64]> = vec![&[0.0, 1.0], &[2.0, -1.0], &[1.0, 0.0]];
        let b = local_bounds(&pts).unwrap();
        assert_eq!(b.lb, vec![0.0, -1.0]);
        assert_eq!(b.ub, vec![2.0, 1.0]);

        let single: Vec<&[f64]> = vec![&[3.0, 4.0]];
        let s = local_bounds(&single).unwrap();
        assert_eq!(s.lb, s.ub);

        let shared: Vec<&[f64]> = vec![&[0.0, 1.0], &[0.0, 2.0]];
        let sh = local_bounds(&shared).unwrap();
        assert_eq!(sh.lb[0], 0.0);
        assert_eq!(sh.ub[0], 0.0);

        assert!(local_bounds(&[]).is_err());
    }

    #[test]
    fn box_always_contains_its_generating_points() {
        let mut rng = RngStream::new(8);
        for _ in 0..50 {
            let pts: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| rng.uniform(-5.0, 5.0)).collect())
                .collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let b = local_bounds(&refs).unwrap();
            for p in &pts {
                assert!(b.contains(p));
            }
        }
    }

    fn two_center_model() -> RbfModel {
        let pts = vec![
            EvaluatedPoint {
                x: vec![0.0],
                f: 0.0,
            },
            EvaluatedPoint {
                x: vec![1.0],
                f: 1.0,
            },
        ];
        rbf::fit(&pts, RbfKernel::multiquadric()).unwrap()
    }

    #[test]
    fn one_dimensional_minimizer_matches_a_dense_grid() {
        let model = two_center_model();
        let lbox = LocalBox {
            lb: vec![0.0],
            ub: vec![1.0],
        };
        let cfg = LocalSearchConfig::for_dimension(1);
        let x = minimize_local(&model, &lbox, &[0.5], &cfg).unwrap();
        assert!(model.value(&x) <= model.value(&[0.5]));

        let grid_min = (0..=10_000)
            .map(|i| model.value(&[i as f64 / 10_000.0]))
            .fold(f64::INFINITY, f64::min);
        assert!(
            model.value(&x) <= grid_min + 1e-4,
            "solver value {} vs grid minimum {grid_min}",
            model.value(&x)
        );
    }

    #[test]
    fn two_dimensional_minimizer_matches_a_dense_grid() {
        // Bowl-shaped data with the minimum at the origin.
        let pts = vec![
            EvaluatedPoint {
                x: vec![0.0, 0.0],
                f: 0.0,
            },
            EvaluatedPoint {
                x: vec![1.0, 0.0],
                f: 1.0,
            },
            EvaluatedPoint {
                x: vec![-1.0, 0.0],
                f: 1.0,
            },
            EvaluatedPoint {
                x: vec![0.0, 1.0],
                f: 1.0,
            },
            EvaluatedPoint {
                x: vec![0.0, -1.0],
                f: 1.0,
            },
        ];
        let model = rbf::fit(&pts, RbfKernel::multiquadric()).unwrap();
        let lbox = LocalBox {
            lb: vec![-1.0, -1.0],
            ub: vec![1.0, 1.0],
        };
        let cfg = LocalSearchConfig::for_dimension(2);
        let x = minimize_local(&model, &lbox, &[0.9, 0.8], &cfg).unwrap();

        let mut grid_min = f64::INFINITY;
        for i in 0..=100 {
            for j in 0..=100 {
                let p = [-1.0 + i as f64 / 50.0, -1.0 + j as f64 / 50.0];
                grid_min = grid_min.min(model.value(&p));
            }
        }
        assert!(model.value(&x) <= grid_min + 1e-3);
    }

    #[test]
    fn collapsed_box_returns_the_start() {
        let model = two_center_model();
        let lbox = LocalBox {
            lb: vec![0.25],
            ub: vec![0.25],
        };
        let cfg = LocalSearchConfig::for_dimension(1);
        let x = minimize_local(&model, &lbox, &[0.25], &cfg).unwrap();
        assert_eq!(x, vec![0.25]);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let model = two_center_model();
        let lbox = LocalBox {
            lb: vec![0.0],
            ub: vec![1.0],
        };
        let cfg = LocalSearchConfig::for_dimension(1);
        assert!(minimize_local(&model, &lbox, &[2.0], &cfg).is_err());
    }

    fn random_archive(rng: &mut RngStream, n: usize, d: usize) -> Archive {
        let mut a = Archive::new();
        while a.len() < n {
            let x: Vec<f64> = (0..d).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let f = x.iter().map(|v| v * v).sum::<f64>() + rng.uniform(-0.1, 0.1);
            a.insert(EvaluatedPoint { x, f }).unwrap();
        }
        a
    }

    #[test]
    fn local_step_skips_when_the_minimizer_is_already_archived() {
        // Symmetric 1-D data: the surrogate minimum coincides with the best
        // archived point, so the step must report a skip.
        let mut a = Archive::new();
        for (x, f) in [(-1.0, 1.0), (0.0, 0.0), (1.0, 1.0)] {
            a.insert(EvaluatedPoint { x: vec![x], f }).unwrap();
        }
        let cfg = LocalSearchConfig::for_dimension(1);
        let out = local_step(&a, RbfKernel::multiquadric(), &cfg, 1).unwrap();
        assert_eq!(out, None);
    }

    #[test]
    fn local_step_works_with_fewer_points_than_the_elite_target() {
        let mut a = Archive::new();
        a.insert(EvaluatedPoint {
            x: vec![0.0, 0.0],
            f: 1.0,
        })
        .unwrap();
        a.insert(EvaluatedPoint {
            x: vec![1.0, 1.0],
            f: 0.0,
        })
        .unwrap();
        // Elite target is 3·D = 6 but only 2 points exist.
        let cfg = LocalSearchConfig::for_dimension(2);
        let out = local_step(&a, RbfKernel::multiquadric(), &cfg, 2);
        assert!(out.is_ok());
    }

    #[test]
    fn local_step_is_deterministic() {
        let mut rng = RngStream::new(21);
        let a = random_archive(&mut rng, 25, 3);
        let cfg = LocalSearchConfig::for_dimension(3);
        let u = local_step(&a, RbfKernel::multiquadric(), &cfg, 3).unwrap();
        let v = local_step(&a, RbfKernel::multiquadric(), &cfg, 3).unwrap();
        assert_eq!(u, v);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Monotone descent and feasibility on random archives.
        #[test]
        fn descent_and_feasibility(seed in 0u64..500) {
            let mut rng = RngStream::new(seed);
            let a = random_archive(&mut rng, 20, 3);
            let cfg = LocalSearchConfig::for_dimension(3);
            let elite: Vec<EvaluatedPoint> =
                a.best_c(9).unwrap().into_iter().cloned().collect();
            let model = rbf::fit(&elite, RbfKernel::multiquadric()).unwrap();
            let xs: Vec<&[f64]> = elite.iter().map(|p| p.x.as_slice()).collect();
            let lbox = local_bounds(&xs).unwrap();
            let start = lbox.project(&a.best().unwrap().x);
            let x = minimize_local(&model, &lbox, &start, &cfg).unwrap();
            prop_assert!(lbox.contains(&x));
            prop_assert!(model.value(&x) <= model.value(&start) + 1e-12);
        }
    }
}
