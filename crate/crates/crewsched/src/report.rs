//! Solve reports: the machine-readable record of a run shared by the
//! Benders engine, the benchmark, the extensive oracle, and the evaluator.

use serde::{Deserialize, Serialize};

use crate::model::{DutyKey, ScenarioId, TemplateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    One,
    Two,
}

/// One iteration of the bounds trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub iteration: usize,
    pub phase: Phase,
    /// Best lower bound so far; phase I only, carried forward afterwards.
    pub lb: f64,
    /// Best upper bound so far; none until a bound exists for the phase.
    pub ub: Option<f64>,
    pub cuts_added: usize,
    pub master_objective: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioEntry {
    pub template: TemplateId,
    pub count: u32,
    pub active: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub entries: Vec<PortfolioEntry>,
    pub template_cost: f64,
}

impl Portfolio {
    pub fn total_templates(&self) -> u32 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn count_of(&self, template: &TemplateId) -> u32 {
        self.entries
            .iter()
            .find(|e| &e.template == template)
            .map(|e| e.count)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario: ScenarioId,
    /// Excess duties required in the final (integral, when phase II ran)
    /// subproblem solution.
    pub excess: f64,
    /// Number of scheduled duties.
    pub duties: usize,
    /// Final duty selection, canonical keys.
    pub chosen: Vec<DutyKey>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: u64,
    pub master_ms: u64,
    pub subproblem_ms: u64,
    /// Wall time per iteration, aligned with the bounds trajectory.
    pub per_iteration_ms: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CutStats {
    pub regular: usize,
    pub pareto: usize,
    pub valid_inequalities: usize,
}

/// Full record of one solve, serializable as the reporting artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    pub lb: f64,
    pub ub: f64,
    /// (ub - lb) / ub, clamped below at zero; zero when both are zero.
    pub gap: f64,
    pub phase1_iterations: usize,
    pub phase2_iterations: usize,
    pub bounds: Vec<BoundsRecord>,
    pub portfolio: Portfolio,
    pub scenarios: Vec<ScenarioOutcome>,
    pub cut_stats: CutStats,
    /// Wall-clock figures; excluded from determinism comparisons.
    pub timings: Timings,
}

impl SolveReport {
    pub fn objective_gap(lb: f64, ub: f64) -> f64 {
        if ub.abs() < 1e-12 {
            if lb.abs() < 1e-9 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            ((ub - lb) / ub.abs()).max(0.0)
        }
    }

    /// Copy with wall-clock fields zeroed, for byte-stable comparisons.
    pub fn normalized(&self) -> SolveReport {
        let mut r = self.clone();
        r.timings = Timings::default();
        r
    }
}
