//! Differential evolution: best/1 mutation with binomial crossover.

use serde::{Deserialize, Serialize};

use crate::archive::Archive;
use crate::bounds::BoxBounds;
use crate::rng::RngStream;
use crate::{Error, Result};

/// DE control parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    /// Scale factor F applied to the difference vector.
    pub f_weight: f64,
    /// Crossover probability.
    pub cr: f64,
    /// Children generated per iteration.
    pub n_children: usize,
    /// Upper bound on the parent pool sampled from the archive.
    pub n_parents: usize,
}

impl DeConfig {
    /// The conventional setup for dimension `d`: F = 0.5, Cr = 0.5, `d`
    /// children, parents drawn from the whole archive capped at 100.
    pub fn for_dimension(d: usize) -> Self {
        Self {
            f_weight: 0.5,
            cr: 0.5,
            n_children: d.max(1),
            n_parents: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_weight.is_finite() && self.f_weight > 0.0) {
            return Err(Error::invalid(format!(
                "DE scale factor must be positive, got {}",
                self.f_weight
            )));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::invalid(format!(
                "DE crossover rate must lie in [0, 1], got {}",
                self.cr
            )));
        }
        if self.n_children == 0 {
            return Err(Error::invalid("DE needs at least one child"));
        }
        if self.n_parents < 3 {
            return Err(Error::invalid(
                "DE needs a parent pool of at least 3 (best plus two distinct others)",
            ));
        }
        Ok(())
    }
}

/// best/1 mutant: `v = best + F (x1 − x2)`. No clamping here; feasibility is
/// restored after crossover.
pub fn mutate(best: &[f64], x1: &[f64], x2: &[f64], f_weight: f64) -> Vec<f64> {
    assert!(
        best.len() == x1.len() && x1.len() == x2.len(),
        "mutate: mismatched dimensions {} / {} / {}",
        best.len(),
        x1.len(),
        x2.len()
    );
    best.iter()
        .zip(x1)
        .zip(x2)
        .map(|((b, a), c)| b + f_weight * (a - c))
        .collect()
}

/// Binomial crossover: each component comes from the mutant with probability
/// `cr`, and one uniformly chosen component is forced from the mutant so the
/// child never equals the parent purely by chance.
pub fn crossover(parent: &[f64], mutant: &[f64], cr: f64, rng: &mut RngStream) -> Vec<f64> {
    assert_eq!(
        parent.len(),
        mutant.len(),
        "crossover: mismatched dimensions"
    );
    let d = parent.len();
    let j_rand = rng.below(d);
    // One uniform draw per component, including the forced one, keeps the
    // stream advance independent of j_rand.
    (0..d)
        .map(|j| {
            let u = rng.unit();
            if u <= cr || j == j_rand {
                mutant[j]
            } else {
                parent[j]
            }
        })
        .collect()
}

/// Samples a parent pool and produces `cfg.n_children` clamped children, each
/// mutated around the archive best. The pool size is `min(cfg.n_parents,
/// archive len)`; children cycle through the pool as their crossover parents.
pub fn generate_children(
    archive: &Archive,
    cfg: &DeConfig,
    bounds: &BoxBounds,
    rng: &mut RngStream,
) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    if archive.len() < 3 {
        return Err(Error::invalid(format!(
            "DE needs at least 3 archived points, got {}",
            archive.len()
        )));
    }
    let p = cfg.n_parents.min(archive.len());
    let pool = rand::seq::index::sample(rng, archive.len(), p).into_vec();
    let best = archive.best().expect("nonempty archive").x.clone();

    let mut children = Vec::with_capacity(cfg.n_children);
    for k in 0..cfg.n_children {
        let parent_pos = k % p;
        // Two distinct pool members, both different from the parent when the
        // pool is large enough to allow it.
        let i1 = loop {
            let i = rng.below(p);
            if p < 2 || i != parent_pos {
                break i;
            }
        };
        let i2 = loop {
            let i = rng.below(p);
            if i != i1 && (p < 3 || i != parent_pos) {
                break i;
            }
        };
        let mutant = mutate(
            &best,
            &archive.get(pool[i1]).x,
            &archive.get(pool[i2]).x,
            cfg.f_weight,
        );
        let mut child = crossover(&archive.get(pool[parent_pos]).x, &mutant, cfg.cr, rng);
        bounds.clamp_in_place(&mut child);
        children.push(child);
    }
    Ok(children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::EvaluatedPoint;
    use proptest::prelude::*;

    #[test]
    fn mutation_is_plain_arithmetic() {
        let v = mutate(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], 0.5);
        assert_eq!(v, vec![0.5, -0.5]);

        // Vanishing difference vector and vanishing scale both reduce to best.
        assert_eq!(mutate(&[2.0], &[5.0], &[5.0], 0.7), vec![2.0]);
        assert_eq!(mutate(&[2.0], &[1.0], &[9.0], 0.0), vec![2.0]);
    }

    #[test]
    fn crossover_extremes() {
        let parent = vec![0.0; 6];
        let mutant = vec![1.0; 6];
        let mut rng = RngStream::new(5);

        // cr = 1: every component from the mutant.
        assert_eq!(crossover(&parent, &mutant, 1.0, &mut rng), mutant);

        // cr = 0: exactly the forced component differs.
        for _ in 0..50 {
            let child = crossover(&parent, &mutant, 0.0, &mut rng);
            let diff = child.iter().filter(|&&v| v == 1.0).count();
            assert_eq!(diff, 1);
        }

        // Identical parent and mutant: the child is that same vector.
        assert_eq!(crossover(&parent, &parent, 0.5, &mut rng), parent);
    }

    #[test]
    fn crossover_inherits_about_half_plus_the_forced_component() {
        let d = 10;
        let parent = vec![0.0; d];
        let mutant = vec![1.0; d];
        let mut rng = RngStream::new(11);
        let mut total = 0usize;
        let n = 10_000;
        for _ in 0..n {
            total += crossover(&parent, &mutant, 0.5, &mut rng)
                .iter()
                .filter(|&&v| v == 1.0)
                .count();
        }
        // Expected count is 0.5·9 + 1 = 5.5 of 10 components.
        let mean = total as f64 / n as f64;
        assert!((5.0..=6.0).contains(&mean), "mean mutant share {mean}");
    }

    fn seeded_archive(n: usize, d: usize, seed: u64) -> Archive {
        let mut rng = RngStream::new(seed);
        let mut a = Archive::new();
        while a.len() < n {
            let x: Vec<f64> = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let f = rng.uniform(0.0, 10.0);
            a.insert(EvaluatedPoint { x, f }).unwrap();
        }
        a
    }

    #[test]
    fn children_are_deterministic_under_a_fixed_seed() {
        let archive = seeded_archive(20, 4, 3);
        let bounds = BoxBounds::symmetric(1.0, 4).unwrap();
        let cfg = DeConfig::for_dimension(4);
        let a = generate_children(&archive, &cfg, &bounds, &mut RngStream::new(7)).unwrap();
        let b = generate_children(&archive, &cfg, &bounds, &mut RngStream::new(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn tiny_archives_are_rejected() {
        let archive = seeded_archive(2, 2, 1);
        let bounds = BoxBounds::symmetric(1.0, 2).unwrap();
        let cfg = DeConfig::for_dimension(2);
        assert!(generate_children(&archive, &cfg, &bounds, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn config_validation_catches_bad_parameters() {
        let mut cfg = DeConfig::for_dimension(3);
        cfg.cr = 1.5;
        assert!(cfg.validate().is_err());
        cfg = DeConfig::for_dimension(3);
        cfg.f_weight = 0.0;
        assert!(cfg.validate().is_err());
        cfg = DeConfig::for_dimension(3);
        cfg.n_parents = 2;
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Every emitted child lies inside the bounds, whatever the seed.
        #[test]
        fn children_stay_in_bounds(seed in 0u64..1000, n in 3usize..25) {
            let archive = seeded_archive(n, 3, seed);
            // Bounds tighter than the archive spread force real clamping.
            let bounds = BoxBounds::symmetric(0.5, 3).unwrap();
            let cfg = DeConfig::for_dimension(3);
            let children =
                generate_children(&archive, &cfg, &bounds, &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(children.len(), 3);
            for c in children {
                prop_assert!(bounds.contains(&c));
            }
        }
    }
}
