//! Robust tactical crew scheduling.
//!
//! Selects a portfolio of duty templates that minimises template cost plus
//! the worst-case recovery (excess-duty) cost over a finite set of task
//! scenarios. The main solver is a two-phase accelerated Benders
//! decomposition with column-generation subproblems; a column-generation
//! benchmark and an operational-phase evaluator are included for comparison
//! studies, together with an extensive-form enumeration oracle for small
//! instances.

pub mod benchmark;
pub mod benders;
pub mod colgen;
pub mod enumerate;
pub mod error;
pub mod evaluate;
pub mod graph;
pub mod io;
pub mod lp;
pub mod model;
pub mod pricing;
pub mod report;

pub use error::Error;
