//! Evaluation-budget accounting.

/// Tracks spent evaluations against a hard cap, plus the loop iteration
/// counter. `nfe <= nfe_max` is enforced; overspending panics.
#[derive(Debug, Clone)]
pub struct BudgetCounter {
    nfe: usize,
    nfe_max: usize,
    iter: usize,
}

impl BudgetCounter {
    pub fn new(nfe_max: usize) -> Self {
        Self {
            nfe: 0,
            nfe_max,
            iter: 0,
        }
    }

    pub fn nfe(&self) -> usize {
        self.nfe
    }

    pub fn nfe_max(&self) -> usize {
        self.nfe_max
    }

    pub fn iter(&self) -> usize {
        self.iter
    }

    pub fn remaining(&self) -> usize {
        self.nfe_max - self.nfe
    }

    pub fn exhausted(&self) -> bool {
        self.nfe >= self.nfe_max
    }

    /// Records one evaluation. Panics when the budget is already exhausted;
    /// callers must check first.
    pub fn spend(&mut self) {
        assert!(
            self.nfe < self.nfe_max,
            "budget overspend: nfe = nfe_max = {}",
            self.nfe_max
        );
        self.nfe += 1;
    }

    /// Advances to the next loop iteration and returns its number (1-based).
    pub fn next_iter(&mut self) -> usize {
        self.iter += 1;
        self.iter
    }
}
