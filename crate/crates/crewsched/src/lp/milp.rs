//! Best-first branch-and-bound over LP relaxations. Branches on the most
//! fractional integer variable, ties broken by lowest index; node order is
//! deterministic, so results are reproducible whenever no time limit is hit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::LpError;
use crate::lp::{simplex, LinearProgram, LpSolution, LpStatus, ObjSense, TOL_INT};

struct Node {
    bound: f64,
    id: u64,
    lowers: Vec<f64>,
    uppers: Vec<f64>,
    relaxation: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; reverse so the smallest bound pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn most_fractional(lp: &LinearProgram, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in lp.variables.iter().enumerate() {
        if !v.integer {
            continue;
        }
        let frac = (x[j] - x[j].round()).abs();
        if frac > TOL_INT {
            let distance = (x[j] - x[j].floor() - 0.5).abs();
            match best {
                Some((_, d)) if d <= distance => {}
                _ => best = Some((j, distance)),
            }
        }
    }
    best.map(|(j, _)| j)
}

/// Solves a mixed-integer program. Pure LPs fall through to the simplex.
/// Stops early once the relative gap drops below `gap_tolerance` or the
/// time limit expires, returning the best incumbent with its proven gap.
pub fn solve_milp(
    lp: &LinearProgram,
    time_limit: Option<Duration>,
    gap_tolerance: f64,
) -> Result<LpSolution, LpError> {
    if !lp.has_integers() {
        return simplex::solve(lp);
    }
    if lp.sense == ObjSense::Maximize {
        return Err(LpError::BadModel(
            "MILP solver expects minimization; negate the objective".into(),
        ));
    }
    let start = Instant::now();
    let mut relaxed = lp.clone();
    for v in &mut relaxed.variables {
        v.integer = false;
    }

    let root = simplex::solve(&relaxed)?;
    match root.status {
        LpStatus::Infeasible => return Ok(root),
        LpStatus::Unbounded => return Ok(root),
        _ => {}
    }

    let mut heap = BinaryHeap::new();
    // Until a first incumbent exists, children go onto a depth-first stack;
    // best-first alone may never reach an integral leaf within the limit.
    let mut dive_stack: Vec<Node> = Vec::new();
    let mut next_id = 0u64;
    let base_lowers: Vec<f64> = relaxed.variables.iter().map(|v| v.lower).collect();
    let base_uppers: Vec<f64> = relaxed.variables.iter().map(|v| v.upper).collect();

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if most_fractional(lp, &root.primal).is_none() {
        incumbent = Some((root.objective, root.primal.clone()));
    } else {
        dive_stack.push(Node {
            bound: root.objective,
            id: next_id,
            lowers: base_lowers,
            uppers: base_uppers,
            relaxation: root.primal,
        });
        next_id += 1;
    }
    let mut timed_out = false;
    let mut proven = false;

    loop {
        if incumbent.is_some() && !dive_stack.is_empty() {
            heap.extend(dive_stack.drain(..));
        }
        let node = if incumbent.is_none() {
            match dive_stack.pop() {
                Some(n) => n,
                None => match heap.pop() {
                    Some(n) => n,
                    None => break,
                },
            }
        } else {
            match heap.pop() {
                Some(n) => n,
                None => break,
            }
        };
        let inc_obj = incumbent.as_ref().map(|(o, _)| *o).unwrap_or(f64::INFINITY);
        if node.bound >= inc_obj - 1e-9 * (1.0 + inc_obj.abs()) {
            if dive_stack.is_empty() && (heap.is_empty() || incumbent.is_some()) {
                proven = true; // best-first: every open node is dominated
                break;
            }
            continue;
        }
        if gap_tolerance > 0.0 && rel_gap(inc_obj, node.bound) <= gap_tolerance {
            heap.push(node);
            break;
        }
        if let Some(limit) = time_limit {
            if start.elapsed() >= limit {
                heap.push(node);
                timed_out = true;
                break;
            }
        }
        let branch_var = match most_fractional(lp, &node.relaxation) {
            Some(j) => j,
            None => continue,
        };
        let value = node.relaxation[branch_var];
        // Floor child first so a dive pops the ceil (capacity-raising) child.
        for (child_lo, child_hi) in [
            (node.lowers[branch_var], value.floor()),
            (value.floor() + 1.0, node.uppers[branch_var]),
        ] {
            if child_lo > child_hi {
                continue;
            }
            let mut child = relaxed.clone();
            for j in 0..child.variables.len() {
                child.variables[j].lower = node.lowers[j];
                child.variables[j].upper = node.uppers[j];
            }
            child.variables[branch_var].lower = child_lo;
            child.variables[branch_var].upper = child_hi;
            let sol = simplex::solve(&child)?;
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let inc_obj = incumbent.as_ref().map(|(o, _)| *o).unwrap_or(f64::INFINITY);
            if sol.objective >= inc_obj - 1e-9 * (1.0 + inc_obj.abs()) {
                continue;
            }
            if most_fractional(lp, &sol.primal).is_none() {
                incumbent = Some((sol.objective, sol.primal));
            } else {
                let mut lowers = node.lowers.clone();
                let mut uppers = node.uppers.clone();
                lowers[branch_var] = child_lo;
                uppers[branch_var] = child_hi;
                let child_node = Node {
                    bound: sol.objective,
                    id: next_id,
                    lowers,
                    uppers,
                    relaxation: sol.primal,
                };
                next_id += 1;
                if incumbent.is_none() {
                    dive_stack.push(child_node);
                } else {
                    heap.push(child_node);
                }
            }
        }
    }

    if heap.is_empty() && dive_stack.is_empty() {
        proven = true;
    }
    match incumbent {
        Some((objective, primal)) => {
            let best_bound = if proven {
                objective
            } else {
                heap.peek().map(|n| n.bound.min(objective)).unwrap_or(objective)
            };
            let gap = if proven { 0.0 } else { rel_gap(objective, best_bound) };
            let status = if proven || (!timed_out && gap <= gap_tolerance) {
                LpStatus::Optimal
            } else {
                LpStatus::TimeLimitFeasible
            };
            Ok(LpSolution {
                status,
                objective,
                primal,
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                basic: Vec::new(),
                best_bound,
                gap,
            })
        }
        None => {
            if proven {
                Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    objective: f64::INFINITY,
                    primal: Vec::new(),
                    duals: Vec::new(),
                    reduced_costs: Vec::new(),
                    basic: Vec::new(),
                    best_bound: f64::INFINITY,
                    gap: 0.0,
                })
            } else {
                Err(LpError::Numerical(
                    "branch-and-bound stopped before finding any feasible solution".into(),
                ))
            }
        }
    }
}

fn rel_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    ((incumbent - bound).max(0.0)) / incumbent.abs().max(1e-9)
}
