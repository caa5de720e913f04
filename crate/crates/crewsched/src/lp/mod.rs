//! Linear and mixed-integer programming: a small abstract contract plus a
//! reference implementation (bounded-variable revised simplex and best-first
//! branch-and-bound) sized for tactical planning instances.
//!
//! Every optimal LP solve returns a primal/dual pair verified for strong
//! duality; solvers never report a status they cannot certify.

mod milp;
mod simplex;
mod text;

use serde::{Deserialize, Serialize};

use crate::error::LpError;

pub use milp::solve_milp;
pub use text::to_lp_text;

pub const TOL_FEAS: f64 = 1e-6;
pub const TOL_INT: f64 = 1e-6;
pub const TOL_DUALITY: f64 = 1e-6;

pub const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub objective: f64,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    /// Sparse (variable index, coefficient) pairs.
    pub coefficients: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A linear (or mixed-integer, via variable flags) program in row form.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: ObjSense,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(sense: ObjSense) -> Self {
        LinearProgram {
            sense,
            variables: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn minimize() -> Self {
        Self::new(ObjSense::Minimize)
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        objective: f64,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            objective,
            lower,
            upper,
            integer,
        });
        self.variables.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coefficients: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coefficients,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integer)
    }

    fn check_finite(&self) -> Result<(), LpError> {
        for v in &self.variables {
            if !v.objective.is_finite() {
                return Err(LpError::BadModel(format!(
                    "objective coefficient of {} is not finite",
                    v.name
                )));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(LpError::BadModel(format!("bounds of {} inconsistent", v.name)));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(LpError::BadModel(format!("rhs of {} is not finite", r.name)));
            }
            for &(j, c) in &r.coefficients {
                if j >= self.variables.len() {
                    return Err(LpError::BadModel(format!(
                        "row {} references variable index {}",
                        r.name, j
                    )));
                }
                if !c.is_finite() {
                    return Err(LpError::BadModel(format!("coefficient in {} not finite", r.name)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    /// Feasible incumbent returned, search stopped on the time limit.
    TimeLimitFeasible,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Row duals (LP solves only; empty for MILPs).
    pub duals: Vec<f64>,
    /// Per-variable reduced costs (LP solves only).
    pub reduced_costs: Vec<f64>,
    /// Per-variable basis membership (LP solves only).
    pub basic: Vec<bool>,
    /// Best proven bound (equals `objective` on optimal solves).
    pub best_bound: f64,
    /// Relative optimality gap; zero on optimal solves.
    pub gap: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves a pure LP to proven optimality with duals, or reports an
/// infeasibility/unboundedness certificate status.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check_finite()?;
    if lp.has_integers() {
        return Err(LpError::BadModel(
            "solve_lp called on a model with integrality flags".into(),
        ));
    }
    simplex::solve(lp)
}
