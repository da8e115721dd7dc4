//! Firing rules deciding, per loop iteration, which of the three
//! budget-spending components run: the global-RBF step, the Lipschitz step,
//! and the local-optimization step.
//!
//! Static rules fire on iteration divisibility. Dynamic rules move the
//! divisor over the run: the Lipschitz divisor grows (front-loaded
//! exploration), the local divisor shrinks toward one (back-loaded
//! exploitation).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The three scheduled components, in the order they spend budget within an
/// iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Rbf,
    Lipschitz,
    Local,
}

/// One component's firing rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ComponentRule {
    /// Fires when `iter` is divisible by `period`; period 0 never fires.
    Every { period: usize },
    /// Divisor `max(1, ceil(mult * iter / 1000))`: fires every iteration
    /// early on, then progressively thins out.
    Thinning { mult: usize },
    /// Divisor `max(1, ceil((base - slope * iter) / 1000))`, clamped to 1
    /// once the expression turns nonpositive: sparse early, every iteration
    /// late.
    Ramping { base: usize, slope: usize },
}

impl ComponentRule {
    /// Evaluates the rule at a 1-based iteration count.
    pub fn fires(&self, iter: usize) -> bool {
        debug_assert!(iter >= 1, "rules are evaluated from iteration 1");
        match *self {
            ComponentRule::Every { period } => period != 0 && iter % period == 0,
            ComponentRule::Thinning { mult } => {
                let divisor = div_ceil_pos((mult * iter) as i64).max(1);
                iter % divisor == 0
            }
            ComponentRule::Ramping { base, slope } => {
                let expr = base as i64 - (slope * iter) as i64;
                let divisor = if expr <= 0 { 1 } else { div_ceil_pos(expr) };
                iter % divisor == 0
            }
        }
    }

    /// False only for `Every { period: 0 }`, which can never consume budget.
    pub fn can_fire(&self) -> bool {
        !matches!(self, ComponentRule::Every { period: 0 })
    }
}

/// `ceil(x / 1000)` for nonnegative `x`, as a usize.
fn div_ceil_pos(x: i64) -> usize {
    debug_assert!(x >= 0);
    ((x + 999) / 1000) as usize
}

/// The nine named dynamic variants: `(name, lipschitz mult, local base,
/// local slope)`. The RBF component runs every iteration in all of them.
pub const DYNAMIC_VARIANTS: [(&str, usize, usize, usize); 9] = [
    ("1-4|8-1", 8, 8000, 15),
    ("1-6|8-1", 10, 8000, 15),
    ("1-8|8-1", 14, 8000, 15),
    ("1-4|6-1", 8, 6000, 12),
    ("1-6|6-1", 10, 6000, 10),
    ("1-8|6-1", 14, 6000, 10),
    ("1-4|4-1", 8, 4000, 8),
    ("1-6|4-1", 12, 4000, 8),
    ("1-8|4-1", 15, 4000, 8),
];

/// Per-component rules for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulePolicy {
    pub rbf: ComponentRule,
    pub lipschitz: ComponentRule,
    pub local: ComponentRule,
}

impl SchedulePolicy {
    /// Static periods for all three components. Allowed periods are 0 (never)
    /// and the divisors 1, 2, 4, 8.
    pub fn static_periods(rbf: usize, lipschitz: usize, local: usize) -> Result<Self> {
        for p in [rbf, lipschitz, local] {
            if ![0, 1, 2, 4, 8].contains(&p) {
                return Err(Error::invalid(format!(
                    "static period must be one of 0, 1, 2, 4, 8; got {p}"
                )));
            }
        }
        Ok(Self {
            rbf: ComponentRule::Every { period: rbf },
            lipschitz: ComponentRule::Every { period: lipschitz },
            local: ComponentRule::Every { period: local },
        })
    }

    /// Looks up one of the nine named dynamic variants, e.g. `"1-4|8-1"`.
    pub fn dynamic_variant(name: &str) -> Result<Self> {
        DYNAMIC_VARIANTS
            .iter()
            .find(|(n, _, _, _)| *n == name)
            .map(|&(_, mult, base, slope)| Self {
                rbf: ComponentRule::Every { period: 1 },
                lipschitz: ComponentRule::Thinning { mult },
                local: ComponentRule::Ramping { base, slope },
            })
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown dynamic variant '{name}' (expected one of {})",
                    DYNAMIC_VARIANTS
                        .iter()
                        .map(|(n, _, _, _)| *n)
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }

    /// Parses the CLI rule grammar: `static:R1,Li2,Lo4` or `dynamic:1-4|8-1`.
    pub fn parse(rule: &str) -> Result<Self> {
        if let Some(spec) = rule.strip_prefix("static:") {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::invalid(format!(
                    "static rule must be 'static:R<p>,Li<p>,Lo<p>', got '{rule}'"
                )));
            }
            let period = |part: &str, prefix: &str| -> Result<usize> {
                part.strip_prefix(prefix)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| {
                        Error::invalid(format!(
                            "bad static component '{part}' (expected '{prefix}<period>')"
                        ))
                    })
            };
            Self::static_periods(
                period(parts[0], "R")?,
                period(parts[1], "Li")?,
                period(parts[2], "Lo")?,
            )
        } else if let Some(name) = rule.strip_prefix("dynamic:") {
            Self::dynamic_variant(name)
        } else {
            Err(Error::invalid(format!(
                "rule must start with 'static:' or 'dynamic:', got '{rule}'"
            )))
        }
    }

    pub fn fires(&self, component: Component, iter: usize) -> bool {
        match component {
            Component::Rbf => self.rbf.fires(iter),
            Component::Lipschitz => self.lipschitz.fires(iter),
            Component::Local => self.local.fires(iter),
        }
    }

    /// Whether the component's rule can ever fire.
    pub fn can_fire(&self, component: Component) -> bool {
        match component {
            Component::Rbf => self.rbf.can_fire(),
            Component::Lipschitz => self.lipschitz.can_fire(),
            Component::Local => self.local.can_fire(),
        }
    }

    /// Simulates the budget loop without objective calls, assuming every
    /// fired component spends exactly one evaluation, and returns the
    /// per-component totals `(rbf, lipschitz, local)`. Evaluation stops the
    /// instant the budget is exhausted, components attempted in
    /// RBF/Lipschitz/Local order.
    pub fn dry_run_counts(
        &self,
        initial_points: usize,
        nfe_max: usize,
    ) -> Result<(usize, usize, usize)> {
        if nfe_max <= initial_points {
            return Err(Error::invalid(format!(
                "dry run needs nfe_max > initial_points, got {nfe_max} <= {initial_points}"
            )));
        }
        if !(self.rbf.can_fire() || self.lipschitz.can_fire() || self.local.can_fire()) {
            return Err(Error::invalid(
                "schedule never fires any component; the budget cannot be consumed",
            ));
        }
        let mut nfe = initial_points;
        let mut iter = 0usize;
        let mut counts = (0usize, 0usize, 0usize);
        while nfe < nfe_max {
            iter += 1;
            // A thinning rule can leave arbitrarily long gaps; cap the
            // simulation rather than spin forever on adversarial inputs.
            if iter > 100_000_000 {
                return Err(Error::invalid(
                    "dry run exceeded 1e8 iterations without exhausting the budget",
                ));
            }
            if self.rbf.fires(iter) {
                nfe += 1;
                counts.0 += 1;
                if nfe >= nfe_max {
                    break;
                }
            }
            if self.lipschitz.fires(iter) {
                nfe += 1;
                counts.1 += 1;
                if nfe >= nfe_max {
                    break;
                }
            }
            if self.local.fires(iter) {
                nfe += 1;
                counts.2 += 1;
                if nfe >= nfe_max {
                    break;
                }
            }
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Component counts for the nine dynamic variants at the standard
    /// initial-100 / budget-1000 setting.
    pub const EXPECTED_COUNTS: [(&str, (usize, usize, usize)); 9] = [
        ("1-4|8-1", (495, 260, 145)),
        ("1-6|8-1", (510, 231, 159)),
        ("1-8|8-1", (531, 189, 180)),
        ("1-4|6-1", (471, 254, 175)),
        ("1-6|6-1", (512, 231, 157)),
        ("1-8|6-1", (533, 189, 178)),
        ("1-4|4-1", (445, 248, 207)),
        ("1-6|4-1", (469, 200, 231)),
        ("1-8|4-1", (483, 172, 245)),
    ];

    #[test]
    fn static_divisibility() {
        let p = SchedulePolicy::static_periods(1, 2, 0).unwrap();
        assert!(p.fires(Component::Lipschitz, 4));
        assert!(!p.fires(Component::Lipschitz, 3));
        // Period 1 fires always, period 0 never.
        for iter in 1..=20 {
            assert!(p.fires(Component::Rbf, iter));
            assert!(!p.fires(Component::Local, iter));
        }
    }

    #[test]
    fn static_periods_outside_the_menu_are_rejected() {
        assert!(SchedulePolicy::static_periods(3, 1, 1).is_err());
        assert!(SchedulePolicy::static_periods(1, 16, 1).is_err());
    }

    #[test]
    fn dynamic_divisors_by_hand() {
        let p = SchedulePolicy::dynamic_variant("1-4|8-1").unwrap();
        // Lipschitz at iter 100: ceil(8*100/1000) = 1, so it fires.
        assert!(p.fires(Component::Lipschitz, 100));
        // Local at iter 100: ceil((8000-1500)/1000) = 7 and 100 % 7 = 2.
        assert!(!p.fires(Component::Local, 100));
        // Local at iter 98: 98 % 7 = 0.
        assert!(p.fires(Component::Local, 98));
        // Late in the run the ramping divisor clamps to 1.
        assert!(p.fires(Component::Local, 533));
        assert!(p.fires(Component::Local, 534));
    }

    #[test]
    fn unknown_variants_and_bad_grammar_are_rejected() {
        assert!(SchedulePolicy::dynamic_variant("2-4|8-1").is_err());
        assert!(SchedulePolicy::parse("dynamic:nope").is_err());
        assert!(SchedulePolicy::parse("static:R1,Li2").is_err());
        assert!(SchedulePolicy::parse("static:R1,Lo2,Li4").is_err());
        assert!(SchedulePolicy::parse("hourly:1").is_err());
    }

    #[test]
    fn parse_round_trips_both_forms() {
        assert_eq!(
            SchedulePolicy::parse("static:R1,Li2,Lo4").unwrap(),
            SchedulePolicy::static_periods(1, 2, 4).unwrap()
        );
        assert_eq!(
            SchedulePolicy::parse("dynamic:1-6|4-1").unwrap(),
            SchedulePolicy::dynamic_variant("1-6|4-1").unwrap()
        );
    }

    #[test]
    fn dry_run_reproduces_all_nine_reference_triples() {
        for (name, expected) in EXPECTED_COUNTS {
            let p = SchedulePolicy::dynamic_variant(name).unwrap();
            let got = p.dry_run_counts(100, 1000).unwrap();
            assert_eq!(got, expected, "variant {name}");
        }
    }

    #[test]
    fn dry_run_rejects_impossible_inputs() {
        let p = SchedulePolicy::dynamic_variant("1-4|8-1").unwrap();
        assert!(p.dry_run_counts(1000, 1000).is_err());
        let never = SchedulePolicy::static_periods(0, 0, 0).unwrap();
        assert!(never.dry_run_counts(100, 1000).is_err());
    }

    proptest! {
        /// Dry-run counts always account for exactly the post-initialization
        /// budget.
        #[test]
        fn budget_conservation(
            variant_idx in 0usize..9,
            initial in 1usize..300,
            extra in 1usize..900,
        ) {
            let (name, _, _, _) = DYNAMIC_VARIANTS[variant_idx];
            let p = SchedulePolicy::dynamic_variant(name).unwrap();
            let nfe_max = initial + extra;
            let (r, li, lo) = p.dry_run_counts(initial, nfe_max).unwrap();
            prop_assert_eq!(r + li + lo, nfe_max - initial);
        }

        /// The same conservation holds for static rules that can fire.
        #[test]
        fn budget_conservation_static(
            r in prop::sample::select(vec![0usize, 1, 2, 4, 8]),
            li in prop::sample::select(vec![0usize, 1, 2, 4, 8]),
            lo in prop::sample::select(vec![0usize, 1, 2, 4, 8]),
            extra in 1usize..500,
        ) {
            prop_assume!(r + li + lo > 0);
            let p = SchedulePolicy::static_periods(r, li, lo).unwrap();
            let (cr, cli, clo) = p.dry_run_counts(50, 50 + extra).unwrap();
            prop_assert_eq!(cr + cli + clo, extra);
        }
    }
}
