//! Two-phase accelerated Benders decomposition.
//!
//! Phase I relaxes duty integrality in the subproblems and iterates master
//! solves against per-scenario column-generation subproblems, separating one
//! optimality cut per violated scenario (Pareto-selected against a moving
//! core point when enabled) on top of min-cost-flow valid inequalities.
//! Phase II repairs integrality by alternating duty-fixing rounds with
//! bounded resolving rounds until every subproblem solution is integral.

pub mod flow;
mod master;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colgen::{BspMode, BspSolver, ColgenConfig, ColgenResult};
use crate::error::SolveError;
use crate::model::{DutyKey, Instance};
use crate::report::{
    BoundsRecord, CutStats, Phase, Portfolio, PortfolioEntry, ScenarioOutcome, SolveReport,
    Timings,
};

pub use flow::{
    build_flow_network, compute_flow_bound, valid_inequalities_for_scenario, FlowNetwork,
    ValidInequality,
};
pub use master::{BendersMaster, CutProvenance, MasterSolution, OptimalityCut};

#[derive(Debug, Clone)]
pub struct BendersConfig {
    /// Separate Pareto-efficient cuts via the auxiliary subproblem.
    pub use_pareto: bool,
    /// Add flow-bound valid inequalities to the master up front.
    pub use_valid_inequalities: bool,
    pub master_time_limit: Duration,
    /// Times the master limit may double when separation stalls unproven.
    pub master_escalations: u32,
    pub phase1_time_limit: Duration,
    pub phase1_iteration_cap: usize,
    /// Master/separation rounds allowed between fixing rounds in phase II.
    pub resolve_rounds: usize,
    pub fixing_round_cap: usize,
    /// Absolute tolerance on eta violation before a cut is separated.
    pub tol_cut: f64,
    /// Grid spacing (minutes) of the valid-inequality sweep.
    pub vi_grid: i64,
    pub colgen: ColgenConfig,
    /// Retain per-cut audit data for validity checking.
    pub record_cut_audit: bool,
}

impl Default for BendersConfig {
    fn default() -> Self {
        BendersConfig {
            use_pareto: true,
            use_valid_inequalities: true,
            master_time_limit: Duration::from_secs(10),
            master_escalations: 4,
            phase1_time_limit: Duration::from_secs(3600),
            phase1_iteration_cap: 10_000,
            resolve_rounds: 5,
            fixing_round_cap: 500,
            tol_cut: 1e-6,
            vi_grid: 5,
            colgen: ColgenConfig::default(),
            record_cut_audit: false,
        }
    }
}

/// Everything needed to re-check one separated cut after the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutAudit {
    pub scenario_idx: usize,
    pub phase: Phase,
    /// Capacities that generated the cut.
    pub capacities: Vec<f64>,
    pub eta_hat: f64,
    pub bsp_objective: f64,
    pub core_point: Vec<f64>,
    /// Duties fixed in this scenario's subproblem at separation time.
    pub fixed_context: Vec<DutyKey>,
    pub regular: OptimalityCut,
    pub pareto: Option<OptimalityCut>,
}

pub struct BendersOutcome {
    pub report: SolveReport,
    pub audit: Vec<CutAudit>,
}

struct SeparationResult {
    objective: f64,
    cut: Option<OptimalityCut>,
    audit: Option<CutAudit>,
    colgen: ColgenResult,
}

pub struct BendersEngine<'a> {
    instance: &'a Instance,
    config: BendersConfig,
    master: BendersMaster,
    solvers: Vec<BspSolver>,
    core_point: Vec<f64>,
    audit: Vec<CutAudit>,
    cut_stats: CutStats,
}

impl<'a> BendersEngine<'a> {
    pub fn new(instance: &'a Instance, config: BendersConfig) -> Self {
        let solvers = (0..instance.scenarios.len())
            .map(|s| BspSolver::new(instance, s, config.colgen.clone()))
            .collect();
        let core_point = vec![1.0; instance.templates.len()];
        BendersEngine {
            instance,
            config,
            master: BendersMaster::new(),
            solvers,
            core_point,
            audit: Vec::new(),
            cut_stats: CutStats::default(),
        }
    }

    /// Rows currently installed in the master.
    pub fn valid_inequality_rows(&self) -> &[ValidInequality] {
        &self.master.valid_inequalities
    }

    /// Builds the flow relaxation per scenario and adds one row per
    /// (scenario, grid point) with a positive bound. Returns rows added.
    pub fn add_valid_inequalities(&mut self) -> Result<usize, SolveError> {
        let grid = self.config.vi_grid;
        let instance = self.instance;
        let rows: Vec<Vec<ValidInequality>> = (0..instance.scenarios.len())
            .into_par_iter()
            .map(|s| {
                let net = build_flow_network(instance, &instance.scenarios[s])?;
                valid_inequalities_for_scenario(instance, s, &net, grid)
            })
            .collect::<Result<_, _>>()?;
        let mut added = 0;
        for scenario_rows in rows {
            added += scenario_rows.len();
            self.master.valid_inequalities.extend(scenario_rows);
        }
        self.cut_stats.valid_inequalities = added;
        Ok(added)
    }

    fn separate_scenario(
        instance: &Instance,
        config: &BendersConfig,
        solver: &mut BspSolver,
        y: &[f64],
        eta_hat: f64,
        core_point: &[f64],
        phase: Phase,
    ) -> Result<SeparationResult, SolveError> {
        let regular = solver.solve(instance, y, BspMode::Excess)?;
        let objective = regular.objective;
        if objective <= eta_hat + config.tol_cut {
            return Ok(SeparationResult {
                objective,
                cut: None,
                audit: None,
                colgen: regular,
            });
        }
        let regular_cut = OptimalityCut {
            scenario_idx: solver.scenario_idx,
            theta: regular.theta.clone(),
            lambda_sum: regular.lambda.iter().sum::<f64>() + regular.fixed_dual_offset,
            provenance: CutProvenance::Regular,
            phase,
        };
        let pareto_cut = if config.use_pareto {
            let aux = solver.solve(
                instance,
                y,
                BspMode::Pareto {
                    core_point: core_point.to_vec(),
                    gamma_bar: objective,
                },
            )?;
            Some(OptimalityCut {
                scenario_idx: solver.scenario_idx,
                theta: aux.theta.clone(),
                lambda_sum: aux.lambda.iter().sum::<f64>() + aux.fixed_dual_offset,
                provenance: CutProvenance::Pareto,
                phase,
            })
        } else {
            None
        };
        let chosen = pareto_cut.clone().unwrap_or_else(|| regular_cut.clone());
        let audit = if config.record_cut_audit {
            let fixed_context: Vec<DutyKey> = solver
                .pool
                .columns
                .iter()
                .filter(|(_, c)| c.fixed)
                .map(|(k, _)| k.clone())
                .collect();
            Some(CutAudit {
                scenario_idx: solver.scenario_idx,
                phase,
                capacities: y.to_vec(),
                eta_hat,
                bsp_objective: objective,
                core_point: core_point.to_vec(),
                fixed_context,
                regular: regular_cut,
                pareto: pareto_cut,
            })
        } else {
            None
        };
        Ok(SeparationResult {
            objective,
            cut: Some(chosen),
            audit,
            colgen: regular,
        })
    }

    /// Runs the full two-phase algorithm.
    pub fn run(mut self) -> Result<BendersOutcome, SolveError> {
        let start = Instant::now();
        self.instance.validate()?;
        self.instance.validate_reserve_windows()?;

        if self.config.use_valid_inequalities {
            self.add_valid_inequalities()?;
        }

        let template_costs: Vec<f64> = self.instance.templates.iter().map(|t| t.cost).collect();
        let n_scenarios = self.instance.scenarios.len();

        let mut phase = Phase::One;
        let mut lb = f64::NEG_INFINITY;
        let mut ub_phase1: Option<f64> = None;
        let mut best_integral: Option<(f64, MasterSolution, Vec<ColgenResult>)> = None;
        let mut bounds = Vec::new();
        let mut timings = Timings::default();
        let mut phase1_iters = 0usize;
        let mut phase2_iters = 0usize;
        let mut escalations_left = self.config.master_escalations;
        let mut master_limit = self.config.master_time_limit;
        let mut rounds_since_fixing = 0usize;
        let mut fixing_rounds = 0usize;
        let mut iteration = 0usize;

        loop {
            iteration += 1;
            let iter_start = Instant::now();

            let master_start = Instant::now();
            let master_sol = self.master.solve(self.instance, master_limit)?;
            timings.master_ms += master_start.elapsed().as_millis() as u64;

            if phase == Phase::One {
                let candidate = if master_sol.proven_optimal {
                    master_sol.objective
                } else {
                    master_sol.best_bound
                };
                lb = lb.max(candidate);
            }

            let sub_start = Instant::now();
            let instance = self.instance;
            let config = &self.config;
            let y = &master_sol.y;
            let eta_hat = master_sol.eta;
            let core = self.core_point.clone();
            let results: Vec<SeparationResult> = self
                .solvers
                .par_iter_mut()
                .map(|solver| {
                    Self::separate_scenario(instance, config, solver, y, eta_hat, &core, phase)
                })
                .collect::<Result<_, _>>()?;
            timings.subproblem_ms += sub_start.elapsed().as_millis() as u64;

            let mut cuts_added = 0usize;
            let mut worst_recovery: f64 = 0.0;
            for res in &results {
                worst_recovery = worst_recovery.max(res.objective);
                if let Some(cut) = &res.cut {
                    match cut.provenance {
                        CutProvenance::Regular => self.cut_stats.regular += 1,
                        CutProvenance::Pareto => self.cut_stats.pareto += 1,
                    }
                    self.master.add_cut(cut.clone());
                    cuts_added += 1;
                }
                if let Some(audit) = &res.audit {
                    self.audit.push(audit.clone());
                }
            }

            let template_cost: f64 = template_costs
                .iter()
                .zip(&master_sol.y)
                .map(|(c, y)| c * y)
                .sum();
            let ub_candidate = template_cost + worst_recovery;
            let all_integral = results.iter().all(|r| r.colgen.is_integral());

            match phase {
                Phase::One => {
                    phase1_iters += 1;
                    ub_phase1 = Some(ub_phase1.map_or(ub_candidate, |u: f64| u.min(ub_candidate)));
                }
                Phase::Two => phase2_iters += 1,
            }

            bounds.push(BoundsRecord {
                iteration,
                phase,
                lb: if lb.is_finite() { lb } else { 0.0 },
                ub: match phase {
                    Phase::One => ub_phase1,
                    Phase::Two => best_integral.as_ref().map(|(u, _, _)| *u),
                },
                cuts_added,
                master_objective: master_sol.objective,
                eta: master_sol.eta,
            });
            timings
                .per_iteration_ms
                .push(iter_start.elapsed().as_millis() as u64);

            // Phase transitions and fixing, following the algorithm order.
            if phase == Phase::One {
                let time_up = start.elapsed() >= self.config.phase1_time_limit
                    || phase1_iters >= self.config.phase1_iteration_cap;
                if cuts_added == 0 && !master_sol.proven_optimal && escalations_left > 0 && !time_up
                {
                    // Optimality is now required: escalate the master limit.
                    escalations_left -= 1;
                    master_limit *= 2;
                    self.update_core_point(&master_sol.y);
                    continue;
                }
                if cuts_added == 0 || time_up {
                    phase = Phase::Two;
                    rounds_since_fixing = 0;
                }
            }
            if phase == Phase::Two {
                if all_integral {
                    let better = best_integral
                        .as_ref()
                        .map(|(u, _, _)| ub_candidate < *u - 1e-9)
                        .unwrap_or(true);
                    if better {
                        best_integral = Some((
                            ub_candidate,
                            master_sol.clone(),
                            results.iter().map(|r| r.colgen.clone()).collect(),
                        ));
                    }
                    self.update_core_point(&master_sol.y);
                    break;
                }
                rounds_since_fixing += 1;
                if cuts_added == 0 || rounds_since_fixing > self.config.resolve_rounds {
                    fixing_rounds += 1;
                    if fixing_rounds > self.config.fixing_round_cap {
                        let report = self.partial_report(
                            lb,
                            ub_phase1,
                            &best_integral,
                            bounds,
                            timings,
                            phase1_iters,
                            phase2_iters,
                            start,
                        );
                        return Err(SolveError::FixingDiverged(report.phase2_iterations));
                    }
                    self.fix_duties(&results);
                    rounds_since_fixing = 0;
                }
            }
            self.update_core_point(&master_sol.y);

            if iteration > self.config.phase1_iteration_cap * 4 + 4 * self.config.fixing_round_cap
            {
                return Err(SolveError::FixingDiverged(iteration));
            }
        }

        let (ub, final_master, final_results) =
            best_integral.expect("loop exits only with an integral solution");
        timings.total_ms = start.elapsed().as_millis() as u64;
        let lb_final = if lb.is_finite() { lb } else { 0.0 };

        let portfolio = Portfolio {
            entries: self
                .instance
                .templates
                .iter()
                .enumerate()
                .map(|(p, t)| PortfolioEntry {
                    template: t.id.clone(),
                    count: final_master.y[p].round() as u32,
                    active: final_master.z[p] > 0.5,
                })
                .collect(),
            template_cost: template_costs
                .iter()
                .zip(&final_master.y)
                .map(|(c, y)| c * y)
                .sum(),
        };
        let scenarios: Vec<ScenarioOutcome> = (0..n_scenarios)
            .map(|s| {
                let res = &final_results[s];
                let chosen: Vec<DutyKey> = res
                    .column_values
                    .iter()
                    .filter(|(_, v)| *v > 0.5)
                    .map(|(k, _)| k.clone())
                    .collect();
                ScenarioOutcome {
                    scenario: self.instance.scenarios[s].id.clone(),
                    excess: res.total_excess(),
                    duties: chosen.len(),
                    chosen,
                }
            })
            .collect();

        let report = SolveReport {
            method: "benders".into(),
            lb: lb_final,
            ub,
            gap: SolveReport::objective_gap(lb_final, ub),
            phase1_iterations: phase1_iters,
            phase2_iterations: phase2_iters,
            bounds,
            portfolio,
            scenarios,
            cut_stats: self.cut_stats,
            timings,
        };
        Ok(BendersOutcome {
            report,
            audit: self.audit,
        })
    }

    fn update_core_point(&mut self, y: &[f64]) {
        for (w, yv) in self.core_point.iter_mut().zip(y) {
            *w = 0.5 * yv + 0.5 * *w;
            debug_assert!(*w > 0.0, "core point left the strict interior");
        }
    }

    /// One fixing round: in every scenario with a fractional solution, pin
    /// the highest-valued fractional duty to one and raise the master's
    /// fixed-capacity requirement for its template.
    fn fix_duties(&mut self, results: &[SeparationResult]) {
        for (s, res) in results.iter().enumerate() {
            if res.colgen.is_integral() {
                continue;
            }
            let mut best: Option<(&DutyKey, f64)> = None;
            for (key, value) in &res.colgen.column_values {
                if (value - value.round()).abs() <= crate::lp::TOL_INT {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bk, bv)) => {
                        *value > bv + 1e-12 || ((*value - bv).abs() <= 1e-12 && key < bk)
                    }
                };
                if better {
                    best = Some((key, *value));
                }
            }
            if let Some((key, _)) = best {
                let key = key.clone();
                self.solvers[s].pool.fix(&key);
                let counts = self
                    .solvers[s]
                    .pool
                    .fixed_count_by_template(self.instance.templates.len());
                for (p, count) in counts.iter().enumerate() {
                    if *count > 0 {
                        self.master.require_capacity(s, p, *count as f64);
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn partial_report(
        &self,
        lb: f64,
        ub_phase1: Option<f64>,
        best_integral: &Option<(f64, MasterSolution, Vec<ColgenResult>)>,
        bounds: Vec<BoundsRecord>,
        mut timings: Timings,
        phase1_iters: usize,
        phase2_iters: usize,
        start: Instant,
    ) -> SolveReport {
        timings.total_ms = start.elapsed().as_millis() as u64;
        let lb_final = if lb.is_finite() { lb } else { 0.0 };
        let ub = best_integral
            .as_ref()
            .map(|(u, _, _)| *u)
            .or(ub_phase1)
            .unwrap_or(f64::MAX);
        SolveReport {
            method: "benders".into(),
            lb: lb_final,
            ub,
            gap: SolveReport::objective_gap(lb_final, ub),
            phase1_iterations: phase1_iters,
            phase2_iterations: phase2_iters,
            bounds,
            portfolio: Portfolio::default(),
            scenarios: Vec::new(),
            cut_stats: self.cut_stats,
            timings,
        }
    }
}

/// Convenience entry point with the default configuration.
pub fn run_two_phase(
    instance: &Instance,
    config: BendersConfig,
) -> Result<BendersOutcome, SolveError> {
    BendersEngine::new(instance, config).run()
}
