//! Operational-phase evaluation of a fixed template portfolio against
//! held-out task realisations: a restricted-master heuristic that first
//! solves the workload LP by column generation, then re-solves the incumbent
//! columns as a MILP.

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colgen::{BspMode, BspSolver, ColgenConfig};
use crate::error::SolveError;
use crate::lp::{solve_milp, LinearProgram, LpStatus, RowSense, INF};
use crate::model::{Duty, Instance, Scenario, ScenarioId};
use crate::report::Portfolio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub day: ScenarioId,
    pub duties: Vec<Duty>,
    /// Excess duty count.
    pub excess: f64,
    /// Total templates in the portfolio.
    pub templates: u32,
    /// Templates left without a duty: templates + excess - duties.
    pub empty_templates: f64,
    pub avg_workload_hours: f64,
    /// Seconds worked plus excess penalties.
    pub objective: f64,
    pub lp_bound: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct EvaluateConfig {
    pub colgen: ColgenConfig,
    pub milp_time_limit: Duration,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            colgen: ColgenConfig::default(),
            milp_time_limit: Duration::from_secs(30),
        }
    }
}

/// Solves one operational day for a fixed portfolio.
pub fn evaluate_day(
    instance: &Instance,
    day: &Scenario,
    portfolio: &Portfolio,
    config: &EvaluateConfig,
) -> Result<EvaluationResult, SolveError> {
    let mut eval_instance = instance.clone();
    eval_instance.scenarios = vec![day.clone()];
    let capacities: Vec<f64> = eval_instance
        .templates
        .iter()
        .map(|t| portfolio.count_of(&t.id) as f64)
        .collect();

    // LP phase: workload objective to optimality by column generation.
    let mut solver = BspSolver::new(&eval_instance, 0, config.colgen.clone());
    let lp = solver.solve(&eval_instance, &capacities, BspMode::Workload)?;

    // MILP phase over the incumbent columns.
    let mut milp = LinearProgram::minimize();
    let columns: Vec<(&crate::model::DutyKey, &crate::colgen::PooledColumn)> =
        solver.pool.columns.iter().collect();
    let x_vars: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, (_, col))| milp.add_var(format!("x{i}"), col.duty.length_cost, 0.0, 1.0, true))
        .collect();
    let v_vars: Vec<usize> = (0..eval_instance.templates.len())
        .map(|p| milp.add_var(format!("v{p}"), eval_instance.excess_cost, 0.0, INF, false))
        .collect();
    for (p, _) in eval_instance.templates.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (_, col))| col.template_idx == p)
            .map(|(i, _)| (x_vars[i], 1.0))
            .collect();
        coeffs.push((v_vars[p], -1.0));
        milp.add_row(format!("cap{p}"), coeffs, RowSense::Le, capacities[p]);
    }
    for (k, task) in day.tasks.iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (_, col))| col.duty.covers(&task.id))
            .map(|(i, _)| (x_vars[i], 1.0))
            .collect();
        milp.add_row(format!("cov{k}"), coeffs, RowSense::Ge, 1.0);
    }
    let sol = solve_milp(&milp, Some(config.milp_time_limit), 0.0).map_err(SolveError::Lp)?;
    if sol.status == LpStatus::Infeasible {
        return Err(SolveError::Lp(crate::error::LpError::Numerical(
            "evaluation MILP infeasible despite excess variables".into(),
        )));
    }

    let duties: Vec<Duty> = columns
        .iter()
        .enumerate()
        .filter(|(i, _)| sol.primal[x_vars[*i]] > 0.5)
        .map(|(_, (_, col))| col.duty.clone())
        .collect();
    let excess: f64 = v_vars.iter().map(|&v| sol.primal[v]).sum();
    let templates = portfolio.total_templates();
    let n_duties = duties.len() as f64;
    let avg_workload_hours = if duties.is_empty() {
        0.0
    } else {
        duties.iter().map(|d| d.length() as f64 / 60.0).sum::<f64>() / n_duties
    };
    Ok(EvaluationResult {
        day: day.id.clone(),
        empty_templates: templates as f64 + excess - n_duties,
        duties,
        excess,
        templates,
        avg_workload_hours,
        objective: sol.objective,
        lp_bound: lp.objective,
        gap: if sol.objective.abs() < 1e-12 {
            0.0
        } else {
            ((sol.objective - lp.objective) / sol.objective.abs()).max(0.0)
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTable {
    pub rows: Vec<EvaluationResult>,
    pub mean_excess: f64,
    pub mean_duties: f64,
    pub mean_workload_hours: f64,
    pub mean_empty_templates: f64,
}

/// Evaluates a batch of held-out days concurrently.
pub fn evaluate_period(
    instance: &Instance,
    portfolio: &Portfolio,
    days: &[Scenario],
    config: &EvaluateConfig,
) -> Result<EvaluationTable, SolveError> {
    let rows: Vec<EvaluationResult> = days
        .par_iter()
        .map(|day| evaluate_day(instance, day, portfolio, config))
        .collect::<Result<_, _>>()?;
    let n = rows.len().max(1) as f64;
    Ok(EvaluationTable {
        mean_excess: rows.iter().map(|r| r.excess).sum::<f64>() / n,
        mean_duties: rows.iter().map(|r| r.duties.len() as f64).sum::<f64>() / n,
        mean_workload_hours: rows.iter().map(|r| r.avg_workload_hours).sum::<f64>() / n,
        mean_empty_templates: rows.iter().map(|r| r.empty_templates).sum::<f64>() / n,
        rows,
    })
}

/// Metrics table in the same CSV dialect as the solve reports.
pub fn write_metrics_csv(table: &EvaluationTable, path: &std::path::Path) -> std::io::Result<()> {
    let mut out = String::from("day,templates,duties,excess,empty,avg_workload_h,objective,lp_bound,gap\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.day,
            r.templates,
            r.duties.len(),
            r.excess,
            r.empty_templates,
            r.avg_workload_hours,
            r.objective,
            r.lp_bound,
            r.gap
        ));
    }
    out.push_str(&format!(
        "average,,{},{},{},{},,,\n",
        table.mean_duties, table.mean_excess, table.mean_empty_templates, table.mean_workload_hours
    ));
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benders::flow::{build_flow_network, compute_flow_bound};
    use crate::model::testutil::*;
    use crate::report::{Portfolio, PortfolioEntry};

    fn portfolio(counts: &[(&str, u32)]) -> Portfolio {
        Portfolio {
            entries: counts
                .iter()
                .map(|(id, c)| PortfolioEntry {
                    template: tid(id),
                    count: *c,
                    active: *c > 0,
                })
                .collect(),
            template_cost: 0.0,
        }
    }

    #[test]
    fn ample_reserve_capacity_covers_without_excess() {
        let inst = golden_instance();
        let day = inst.scenarios[0].clone();
        // Certificate: total capacity dominates the flow bound everywhere.
        let net = build_flow_network(&inst, &day).unwrap();
        let mut worst: f64 = 0.0;
        let (lo, hi) = day.span().unwrap();
        let mut t = lo;
        while t < hi {
            worst = worst.max(compute_flow_bound(&net, t).unwrap());
            t += 5;
        }
        let counts = worst.ceil() as u32 + 1;
        let pf = portfolio(&[("R", counts)]);
        let result = evaluate_day(&inst, &day, &pf, &EvaluateConfig::default()).unwrap();
        assert_eq!(result.excess, 0.0);
        assert!(!result.duties.is_empty());
        // Cover invariant.
        for task in &day.tasks {
            assert!(result.duties.iter().any(|d| d.covers(&task.id)));
        }
    }

    #[test]
    fn empty_portfolio_pays_excess_for_every_duty() {
        let inst = golden_instance();
        let day = inst.scenarios[0].clone();
        let pf = portfolio(&[]);
        let result = evaluate_day(&inst, &day, &pf, &EvaluateConfig::default()).unwrap();
        assert!(result.excess >= 1.0 - 1e-9);
        assert!((result.excess - result.duties.len() as f64).abs() < 1e-9);
        assert!(result.objective >= inst.excess_cost);
        // Identity: templates + excess - duties = empty.
        assert!((result.empty_templates - (0.0 + result.excess - result.duties.len() as f64)).abs() < 1e-9);
    }

    #[test]
    fn restricted_master_upper_bound_respects_lp() {
        let inst = golden_instance();
        let day = inst.scenarios[1].clone();
        let pf = portfolio(&[("T1", 1)]);
        let result = evaluate_day(&inst, &day, &pf, &EvaluateConfig::default()).unwrap();
        assert!(result.objective >= result.lp_bound - 1e-6);
        assert!(result.gap >= 0.0);
    }

    #[test]
    fn training_day_is_no_worse_than_tactical_excess() {
        use crate::benders::{run_two_phase, BendersConfig};
        let inst = golden_instance();
        let outcome = run_two_phase(&inst, BendersConfig::default()).unwrap();
        for (s, scenario) in inst.scenarios.iter().enumerate() {
            let result = evaluate_day(
                &inst,
                scenario,
                &outcome.report.portfolio,
                &EvaluateConfig::default(),
            )
            .unwrap();
            assert!(
                result.excess <= outcome.report.scenarios[s].excess + 1e-6,
                "day {s}: eval excess {} vs tactical {}",
                result.excess,
                outcome.report.scenarios[s].excess
            );
        }
    }

    #[test]
    fn evaluate_period_aggregates() {
        let inst = golden_instance();
        let pf = portfolio(&[("R", 3)]);
        let empty = evaluate_period(&inst, &pf, &[], &EvaluateConfig::default()).unwrap();
        assert!(empty.rows.is_empty());

        let days: Vec<_> = (0..4)
            .map(|i| {
                let mut d = inst.scenarios[i % 2].clone();
                d.id = ScenarioId(format!("d{i}"));
                d
            })
            .collect();
        let table = evaluate_period(&inst, &pf, &days, &EvaluateConfig::default()).unwrap();
        assert_eq!(table.rows.len(), 4);
        let dir = std::env::temp_dir().join(format!("crewsched-eval-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("metrics.csv");
        write_metrics_csv(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 + 1, "header, rows, average");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn empty_template_identity_holds_exactly() {
        let inst = golden_instance();
        let day = inst.scenarios[0].clone();
        let pf = portfolio(&[("T1", 2), ("R", 1)]);
        let r = evaluate_day(&inst, &day, &pf, &EvaluateConfig::default()).unwrap();
        let identity = r.templates as f64 + r.excess - r.duties.len() as f64;
        assert_eq!(r.empty_templates, identity);
        assert!(r.empty_templates >= -1e-9);
    }
}
