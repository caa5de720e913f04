//! Exhaustive duty enumeration and the extensive-form model built from it.
//!
//! This is the reference path for small instances: it leans only on the
//! `duty_feasible` predicate, never on the pricing networks or labelling
//! code it is used to cross-check. Exponential in the task count by design.

use std::time::Duration;

use crate::error::SolveError;
use crate::lp::{solve_lp, solve_milp, LinearProgram, LpSolution, LpStatus, RowSense, INF};
use crate::model::{duty_feasible, Duty, Instance, Scenario, Task, TemplateType};

/// All rule-feasible duties of one template in one scenario, in canonical
/// (task-id sequence) order.
pub fn enumerate_duties(
    instance: &Instance,
    template: &TemplateType,
    scenario: &Scenario,
) -> Vec<Duty> {
    let mut tasks: Vec<&Task> = scenario.tasks.iter().collect();
    tasks.sort_by(|a, b| (a.start_time, &a.id).cmp(&(b.start_time, &b.id)));
    let mut out = Vec::new();
    let mut chain: Vec<&Task> = Vec::new();
    for (i, t) in tasks.iter().enumerate() {
        if t.from_station != instance.crew_base {
            continue;
        }
        chain.push(t);
        extend(instance, template, scenario, &tasks, i, &mut chain, &mut out);
        chain.pop();
    }
    out.sort_by(|a, b| a.tasks.cmp(&b.tasks));
    out
}

fn extend<'a>(
    instance: &Instance,
    template: &TemplateType,
    scenario: &Scenario,
    tasks: &[&'a Task],
    last: usize,
    chain: &mut Vec<&'a Task>,
    out: &mut Vec<Duty>,
) {
    // A chain ending back at the base is a candidate duty.
    if chain.last().unwrap().to_station == instance.crew_base {
        if let Ok(duty) = Duty::from_tasks(template, chain, instance.check_in, instance.check_out) {
            if let Ok(violations) = duty_feasible(instance, scenario, &duty) {
                if violations.is_empty() {
                    out.push(duty);
                }
            }
        }
    }
    for (j, t) in tasks.iter().enumerate().skip(last + 1) {
        // Only prune on conditions no suffix can repair.
        if t.start_time < chain.last().unwrap().end_time {
            continue;
        }
        if t.from_station != chain.last().unwrap().to_station {
            continue;
        }
        chain.push(t);
        extend(instance, template, scenario, tasks, j, chain, out);
        chain.pop();
    }
}

/// All feasible duties of a scenario across every template.
pub fn enumerate_all(instance: &Instance, scenario: &Scenario) -> Vec<Duty> {
    let mut out = Vec::new();
    for template in &instance.templates {
        out.extend(enumerate_duties(instance, template, scenario));
    }
    out
}

/// The extensive form of the tactical problem over enumerated duties.
pub struct ExtensiveModel {
    pub lp: LinearProgram,
    /// (scenario index, duty, variable index) per duty column.
    pub duty_vars: Vec<(usize, Duty, usize)>,
    pub y_vars: Vec<usize>,
    pub z_vars: Vec<usize>,
    pub v_vars: Vec<Vec<usize>>,
    pub eta_var: usize,
}

/// Builds the model over all enumerated duties; `integral` toggles the MILP
/// against its LP relaxation.
pub fn build_extensive(instance: &Instance, integral: bool) -> Result<ExtensiveModel, SolveError> {
    let mut lp = LinearProgram::minimize();
    let n_templates = instance.templates.len();

    let y_vars: Vec<usize> = instance
        .templates
        .iter()
        .map(|t| {
            lp.add_var(
                format!("y_{}", t.id),
                t.cost,
                0.0,
                instance.capacity_bound as f64,
                integral,
            )
        })
        .collect();
    let z_vars: Vec<usize> = instance
        .templates
        .iter()
        .map(|t| lp.add_var(format!("z_{}", t.id), 0.0, 0.0, 1.0, integral))
        .collect();
    let eta_var = lp.add_var("eta", 1.0, 0.0, INF, false);

    for (p, t) in instance.templates.iter().enumerate() {
        lp.add_row(
            format!("link_{}", t.id),
            vec![(y_vars[p], 1.0), (z_vars[p], -(instance.capacity_bound as f64))],
            RowSense::Le,
            0.0,
        );
    }
    lp.add_row(
        "gamma",
        z_vars.iter().map(|&z| (z, 1.0)).collect(),
        RowSense::Le,
        instance.gamma as f64,
    );
    for (m, rc) in instance.rostering_constraints.iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = instance
            .templates
            .iter()
            .enumerate()
            .map(|(p, t)| (y_vars[p], rc.coefficient(&t.id)))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        lp.add_row(format!("roster_{m}_{}", rc.label), coeffs, RowSense::Le, rc.rhs);
    }

    let mut duty_vars = Vec::new();
    let mut v_vars = Vec::new();
    for (s, scenario) in instance.scenarios.iter().enumerate() {
        let v_s: Vec<usize> = instance
            .templates
            .iter()
            .map(|t| lp.add_var(format!("v_{}_{}", scenario.id, t.id), 0.0, 0.0, INF, false))
            .collect();
        let mut recovery: Vec<(usize, f64)> =
            v_s.iter().map(|&v| (v, instance.excess_cost)).collect();
        recovery.push((eta_var, -1.0));
        lp.add_row(format!("recovery_{}", scenario.id), recovery, RowSense::Le, 0.0);

        let mut capacity_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_templates];
        let mut cover_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); scenario.tasks.len()];
        for (p, template) in instance.templates.iter().enumerate() {
            for duty in enumerate_duties(instance, template, scenario) {
                let x = lp.add_var(
                    format!("x_{}_{}_{}", scenario.id, template.id, duty_vars.len()),
                    0.0,
                    0.0,
                    1.0,
                    integral,
                );
                capacity_terms[p].push((x, 1.0));
                for (k, task) in scenario.tasks.iter().enumerate() {
                    if duty.covers(&task.id) {
                        cover_terms[k].push((x, 1.0));
                    }
                }
                duty_vars.push((s, duty, x));
            }
        }
        for (p, template) in instance.templates.iter().enumerate() {
            let mut coeffs = capacity_terms[p].clone();
            coeffs.push((y_vars[p], -1.0));
            coeffs.push((v_s[p], -1.0));
            lp.add_row(
                format!("cap_{}_{}", scenario.id, template.id),
                coeffs,
                RowSense::Le,
                0.0,
            );
        }
        for (k, task) in scenario.tasks.iter().enumerate() {
            if cover_terms[k].is_empty() {
                return Err(SolveError::UncoverableTask {
                    scenario: scenario.id.clone(),
                    task: task.id.clone(),
                });
            }
            lp.add_row(
                format!("cover_{}_{}", scenario.id, task.id),
                cover_terms[k].clone(),
                RowSense::Ge,
                1.0,
            );
        }
        v_vars.push(v_s);
    }

    Ok(ExtensiveModel {
        lp,
        duty_vars,
        y_vars,
        z_vars,
        v_vars,
        eta_var,
    })
}

#[derive(Debug, Clone)]
pub struct ExtensiveSolution {
    pub objective: f64,
    pub y: Vec<f64>,
    pub eta: f64,
    /// Excess duty count per scenario.
    pub excess: Vec<f64>,
    pub chosen_duties: Vec<(usize, Duty)>,
    pub status: LpStatus,
    pub gap: f64,
}

fn extract(model: &ExtensiveModel, sol: &LpSolution) -> ExtensiveSolution {
    ExtensiveSolution {
        objective: sol.objective,
        y: model.y_vars.iter().map(|&j| sol.primal[j]).collect(),
        eta: sol.primal[model.eta_var],
        excess: model
            .v_vars
            .iter()
            .map(|vs| vs.iter().map(|&j| sol.primal[j]).sum())
            .collect(),
        chosen_duties: model
            .duty_vars
            .iter()
            .filter(|(_, _, x)| sol.primal[*x] > 0.5)
            .map(|(s, d, _)| (*s, d.clone()))
            .collect(),
        status: sol.status,
        gap: sol.gap,
    }
}

/// Solves the extensive-form MILP to proven optimality (subject to the time
/// limit). The oracle route for small instances.
pub fn solve_extensive(
    instance: &Instance,
    time_limit: Option<Duration>,
) -> Result<ExtensiveSolution, SolveError> {
    let model = build_extensive(instance, true)?;
    let sol = solve_milp(&model.lp, time_limit, 0.0).map_err(SolveError::Lp)?;
    if sol.status == LpStatus::Infeasible {
        return Err(SolveError::MasterInfeasible("extensive form".into()));
    }
    Ok(extract(&model, &sol))
}

/// Solves the LP relaxation of the extensive form.
pub fn solve_extensive_lp(instance: &Instance) -> Result<ExtensiveSolution, SolveError> {
    let model = build_extensive(instance, false)?;
    let sol = solve_lp(&model.lp).map_err(SolveError::Lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolveError::MasterInfeasible(format!(
            "extensive LP relaxation: {:?}",
            sol.status
        )));
    }
    Ok(extract(&model, &sol))
}
