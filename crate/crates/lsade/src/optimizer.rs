//! The top-level driver: a space-filling initial design followed by a loop
//! that proposes points through three scheduled components (global surrogate
//! minimization over fresh children, Lipschitz-underestimator minimization
//! over the same children, and a local surrogate search around the incumbent)
//! until the evaluation budget is gone.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::archive::{Archive, EvaluatedPoint};
use crate::bounds::BoxBounds;
use crate::budget::BudgetCounter;
use crate::de::{self, DeConfig};
use crate::lipschitz::{self, SlopeCache};
use crate::local_opt::{self, LocalSearchConfig};
use crate::rbf::{self, RbfKernel};
use crate::rng::RngStream;
use crate::sampling;
use crate::schedule::{Component, ComponentRule, SchedulePolicy};
use crate::{Error, Result};

/// Substream labels, one per independent source of randomness, so adding
/// draws to one consumer never perturbs the others.
const STREAM_INIT: u64 = 1;
const STREAM_DE: u64 = 2;
const STREAM_FALLBACK: u64 = 3;
const STREAM_RANDOM: u64 = 4;

/// Consecutive loop iterations without a single objective call before the
/// driver forces one plain random evaluation. Duplicate proposals do not
/// spend budget, so without this valve a degenerate run could spin forever.
const STALL_LIMIT: usize = 128;

/// Everything one run needs besides the objective itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsadeConfig {
    pub bounds: BoxBounds,
    /// Total objective-call budget, initial design included.
    pub nfe_max: usize,
    /// Size of the Latin hypercube initial design.
    pub initial_points: usize,
    pub de: DeConfig,
    pub kernel: RbfKernel,
    /// Growth factor of the Lipschitz-constant estimation grid.
    pub alpha: f64,
    pub local: LocalSearchConfig,
    pub policy: SchedulePolicy,
    pub seed: u64,
    /// When true, proposals that duplicate an archived point are still sent
    /// to the objective and spend budget (the archive keeps the original);
    /// by default duplicates are skipped for free.
    #[serde(default)]
    pub strict_budget: bool,
}

impl LsadeConfig {
    /// Conventional defaults: 100 initial points, budget 1000, multiquadric
    /// kernel, alpha 0.01, dimension-derived DE and local-search settings,
    /// every component firing every iteration.
    pub fn for_bounds(bounds: BoxBounds, seed: u64) -> Self {
        let d = bounds.dim();
        Self {
            bounds,
            nfe_max: 1000,
            initial_points: 100,
            de: DeConfig::for_dimension(d),
            kernel: RbfKernel::multiquadric(),
            alpha: 0.01,
            local: LocalSearchConfig::for_dimension(d),
            policy: SchedulePolicy::static_periods(1, 1, 1).expect("valid periods"),
            seed,
            strict_budget: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_points < 3 {
            return Err(Error::invalid(
                "need at least 3 initial points (mutation uses a base and two donors)",
            ));
        }
        if self.initial_points >= self.nfe_max {
            return Err(Error::invalid(format!(
                "initial design ({} points) must leave budget for the loop (nfe_max {})",
                self.initial_points, self.nfe_max
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha must be positive and finite"));
        }
        self.de.validate()?;
        self.local.validate()?;
        Ok(())
    }
}

/// Objective calls attributed to each component. Initial-design and
/// stall-fallback evaluations are not attributed to any component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub rbf: usize,
    pub lipschitz: usize,
    pub local: usize,
}

impl ComponentCounts {
    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (self.rbf, self.lipschitz, self.local)
    }

    fn bump(&mut self, component: Component) {
        match component {
            Component::Rbf => self.rbf += 1,
            Component::Lipschitz => self.lipschitz += 1,
            Component::Local => self.local += 1,
        }
    }
}

/// Everything observable about one finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// `(nfe, best objective so far)`, one entry per objective call.
    pub history: Vec<(usize, f64)>,
    /// Best archived point at termination.
    pub final_best: EvaluatedPoint,
    pub component_counts: ComponentCounts,
    /// Wall-clock seconds for the whole run.
    pub wall_time: f64,
    /// Total objective calls made; always equals `history.len()`.
    pub nfe: usize,
}

/// Ablation switches: which components are allowed to run at all. Enabled
/// components fire every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantTriplet {
    pub rbf: bool,
    pub lipschitz: bool,
    pub local: bool,
}

impl VariantTriplet {
    pub fn new(rbf: bool, lipschitz: bool, local: bool) -> Self {
        Self {
            rbf,
            lipschitz,
            local,
        }
    }

    fn policy(&self) -> SchedulePolicy {
        let rule = |on: bool| ComponentRule::Every {
            period: usize::from(on),
        };
        SchedulePolicy {
            rbf: rule(self.rbf),
            lipschitz: rule(self.lipschitz),
            local: rule(self.local),
        }
    }
}

impl fmt::Display for VariantTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "R{}|Li{}|Lo{}",
            u8::from(self.rbf),
            u8::from(self.lipschitz),
            u8::from(self.local)
        )
    }
}

impl FromStr for VariantTriplet {
    type Err = Error;

    /// Accepts `R#|Li#|Lo#` with `|` or `,` separators and 0/1 flags.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace(',', "|");
        let parts: Vec<&str> = norm.split('|').collect();
        let bad = || {
            Error::invalid(format!(
                "variant must look like 'R1|Li1|Lo0' (or comma-separated), got '{s}'"
            ))
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let flag = |part: &str, prefix: &str| -> Result<bool> {
            match part.strip_prefix(prefix) {
                Some("0") => Ok(false),
                Some("1") => Ok(true),
                _ => Err(bad()),
            }
        };
        Ok(Self {
            rbf: flag(parts[0], "R")?,
            lipschitz: flag(parts[1], "Li")?,
            local: flag(parts[2], "Lo")?,
        })
    }
}

/// Run state shared by every code path that calls the objective.
struct Driver<'a, F> {
    objective: F,
    cfg: &'a LsadeConfig,
    archive: Archive,
    budget: BudgetCounter,
    history: Vec<(usize, f64)>,
    counts: ComponentCounts,
}

impl<'a, F> Driver<'a, F>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    fn new(objective: F, cfg: &'a LsadeConfig) -> Self {
        Self {
            objective,
            cfg,
            archive: Archive::new(),
            budget: BudgetCounter::new(cfg.nfe_max),
            history: Vec::with_capacity(cfg.nfe_max),
            counts: ComponentCounts::default(),
        }
    }

    /// One unconditional objective call: spends budget, archives the result
    /// (the archive may refuse a duplicate; the call still counts), and
    /// extends the history.
    fn evaluate(&mut self, x: Vec<f64>) -> Result<()> {
        let f = (self.objective)(&x)?;
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective { value: f, x });
        }
        self.budget.spend();
        self.archive.insert(EvaluatedPoint { x, f })?;
        self.history.push((
            self.budget.nfe(),
            self.archive.best().expect("archive nonempty after insert").f,
        ));
        Ok(())
    }

    /// A component proposal. Duplicates of archived points are skipped
    /// without spending budget unless `strict_budget` is set. Returns
    /// whether an objective call was made.
    fn propose(&mut self, x: Vec<f64>, component: Component) -> Result<bool> {
        if self.archive.is_duplicate(&x) && !self.cfg.strict_budget {
            return Ok(false);
        }
        self.evaluate(x)?;
        self.counts.bump(component);
        Ok(true)
    }

    fn finish(self, started: Instant) -> RunTrace {
        RunTrace {
            final_best: self
                .archive
                .best()
                .expect("a finished run has archived points")
                .clone(),
            nfe: self.budget.nfe(),
            history: self.history,
            component_counts: self.counts,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }
}

/// Runs the full optimizer against `objective`, which must be deterministic
/// per point. Non-finite objective values are hard errors, as is a schedule
/// under which no component can ever fire.
pub fn run_lsade<F>(objective: F, cfg: &LsadeConfig) -> Result<RunTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let any_fires = [Component::Rbf, Component::Lipschitz, Component::Local]
        .iter()
        .any(|&c| cfg.policy.can_fire(c));
    if !any_fires {
        return Err(Error::invalid(
            "no component can ever fire under this schedule; run the all-off variant for pure random search",
        ));
    }

    let started = Instant::now();
    let dim = cfg.bounds.dim();
    let base = RngStream::new(cfg.seed);
    let mut init_rng = base.substream(STREAM_INIT);
    let mut de_rng = base.substream(STREAM_DE);
    let mut fallback_rng = base.substream(STREAM_FALLBACK);

    let mut driver = Driver::new(objective, cfg);

    let plan = sampling::lhs_sample(cfg.initial_points, dim, &mut init_rng)?;
    for x in sampling::scale_plan(&plan, &cfg.bounds)? {
        driver.evaluate(x)?;
    }

    let mut slope_cache = SlopeCache::new();
    let mut stalled_loops = 0usize;

    while !driver.budget.exhausted() {
        let iter = driver.budget.next_iter();
        let fires_rbf = cfg.policy.fires(Component::Rbf, iter);
        let fires_lipschitz = cfg.policy.fires(Component::Lipschitz, iter);
        let fires_local = cfg.policy.fires(Component::Local, iter);

        // Model snapshots for this iteration, taken before any step extends
        // the archive, so the three steps see one consistent state.
        let rbf_model = if fires_rbf {
            Some(rbf::fit(driver.archive.points(), cfg.kernel)?)
        } else {
            None
        };
        let lipschitz_model = if fires_lipschitz {
            slope_cache.update(&driver.archive);
            Some(lipschitz::estimate_k_with_slope(
                &driver.archive,
                cfg.alpha,
                slope_cache.max_slope(),
            ))
        } else {
            None
        };

        let children = de::generate_children(&driver.archive, &cfg.de, &cfg.bounds, &mut de_rng)?;

        let spent_before = driver.budget.nfe();

        if let Some(model) = &rbf_model {
            let pick = model.select_min(&children);
            driver.propose(children[pick].clone(), Component::Rbf)?;
            if driver.budget.exhausted() {
                break;
            }
        }
        if let Some(model) = &lipschitz_model {
            let pick = model.select_min(&children);
            driver.propose(children[pick].clone(), Component::Lipschitz)?;
            if driver.budget.exhausted() {
                break;
            }
        }
        if fires_local {
            // The local step carries its own duplicate check: a minimizer
            // that matches an archived point yields no proposal at all.
            if let Some(x) =
                local_opt::local_step(&driver.archive, cfg.kernel, &cfg.local, dim)?
            {
                driver.propose(x, Component::Local)?;
                if driver.budget.exhausted() {
                    break;
                }
            }
        }

        // Long runs of duplicate-only iterations spend nothing; one plain
        // random evaluation breaks the cycle so the budget always drains.
        if driver.budget.nfe() == spent_before {
            stalled_loops += 1;
            if stalled_loops >= STALL_LIMIT {
                let x: Vec<f64> = cfg
                    .bounds
                    .lower()
                    .iter()
                    .zip(cfg.bounds.upper())
                    .map(|(lo, hi)| fallback_rng.uniform(*lo, *hi))
                    .collect();
                driver.evaluate(x)?;
                stalled_loops = 0;
            }
        } else {
            stalled_loops = 0;
        }
    }

    Ok(driver.finish(started))
}

/// Runs an ablation variant: enabled components fire every iteration,
/// disabled ones never. With all three disabled the run degenerates to
/// uniform random sampling of the whole budget (no initial design either).
pub fn run_variant<F>(objective: F, cfg: &LsadeConfig, variant: VariantTriplet) -> Result<RunTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(variant.rbf || variant.lipschitz || variant.local) {
        return run_random_search(objective, cfg);
    }
    let mut cfg = cfg.clone();
    cfg.policy = variant.policy();
    run_lsade(objective, &cfg)
}

/// Uniform random search: the whole budget on independent draws from the
/// box. Every draw is evaluated, duplicates included.
fn run_random_search<F>(objective: F, cfg: &LsadeConfig) -> Result<RunTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let started = Instant::now();
    let mut rng = RngStream::new(cfg.seed).substream(STREAM_RANDOM);
    let mut driver = Driver::new(objective, cfg);
    while !driver.budget.exhausted() {
        let x: Vec<f64> = cfg
            .bounds
            .lower()
            .iter()
            .zip(cfg.bounds.upper())
            .map(|(lo, hi)| rng.uniform(*lo, *hi))
            .collect();
        driver.evaluate(x)?;
    }
    Ok(driver.finish(started))
}
