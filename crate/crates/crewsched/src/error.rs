use thiserror::Error;

use crate::model::{Minutes, ScenarioId, TaskId, TemplateId};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown task id {0}")]
    UnknownTask(TaskId),
    #[error("unknown template id {0}")]
    UnknownTemplate(TemplateId),
    #[error("duty has no tasks")]
    EmptyDuty,
    #[error("task {task} time order: start {start} >= end {end}")]
    TaskTimeOrder {
        task: TaskId,
        start: Minutes,
        end: Minutes,
    },
    #[error("duplicate id {task} in scenario {scenario}")]
    DuplicateTaskId { scenario: ScenarioId, task: TaskId },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, field {field}: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("unsupported format version {0}")]
    Version(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("inconsistent model: {0}")]
    BadModel(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("column generation did not converge after {iterations} iterations (objective {objective}, last added {last_added})")]
    ColgenDiverged {
        iterations: usize,
        objective: f64,
        last_added: usize,
    },
    #[error("task {task} in scenario {scenario} cannot be covered by any feasible duty")]
    UncoverableTask { scenario: ScenarioId, task: TaskId },
    #[error("master problem infeasible; binding constraint families: {0}")]
    MasterInfeasible(String),
    #[error("fixing did not reach an integral solution within {0} rounds")]
    FixingDiverged(usize),
    #[error("instance unsupported by benchmark: {0}")]
    UnsupportedByBenchmark(String),
    #[error("generator configuration infeasible: {0}")]
    BadGeneratorConfig(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
