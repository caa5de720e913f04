//! Column generation for the per-scenario subproblems: the capacitated crew
//! scheduling LP (excess objective), its Pareto auxiliary variant, and the
//! operational workload LP used in evaluation.
//!
//! The restricted master starts column-free; excess variables keep capacity
//! rows slack and a bootstrap pricing pass under synthetic duals restores
//! cover feasibility before the first LP solve. Columns persist per scenario
//! across calls, so consecutive solves warm-start from the same pool.

use std::collections::HashSet;
use std::sync::Arc;

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::error::SolveError;
use crate::graph::{DutyNetwork, NetworkCache};
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowSense, INF};
use crate::model::{Duty, DutyKey, Instance, Scenario};
use crate::pricing::{
    filter_columns, price_exact, price_heuristic, PricedColumn, PricingDuals, TOL_RC,
};

#[derive(Debug, Clone)]
pub struct ColgenConfig {
    /// Columns returned per pricing problem.
    pub max_columns_per_pricing: usize,
    /// Required task-disjointness between columns added in one round.
    pub theta_disjoint: f64,
    /// Consecutive positive-reduced-cost solves before a column is dropped.
    pub removal_streak: u32,
    pub iteration_cap: usize,
    pub parallel_pricing: bool,
}

impl Default for ColgenConfig {
    fn default() -> Self {
        ColgenConfig {
            max_columns_per_pricing: 50,
            theta_disjoint: 0.5,
            removal_streak: 15,
            iteration_cap: 10_000,
            parallel_pricing: true,
        }
    }
}

/// How the restricted master is shaped for one solve call.
#[derive(Debug, Clone)]
pub enum BspMode {
    /// Minimum excess-duty cost given template capacities.
    Excess,
    /// Pareto auxiliary problem: capacity rhs at the core point, plus an
    /// unrestricted variable priced at the regular objective.
    Pareto { core_point: Vec<f64>, gamma_bar: f64 },
    /// Operational objective: seconds worked plus excess penalties.
    Workload,
}

impl BspMode {
    fn length_weight(&self) -> f64 {
        match self {
            BspMode::Workload => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PooledColumn {
    pub duty: Duty,
    pub template_idx: usize,
    positive_streak: u32,
    /// Fixed duties are pinned to one and never removed.
    pub fixed: bool,
}

/// Duty columns of one scenario, keyed canonically; iteration order is
/// insertion order, which is deterministic.
#[derive(Debug, Default, Clone)]
pub struct ColumnPool {
    pub columns: IndexMap<DutyKey, PooledColumn>,
}

impl ColumnPool {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn insert(&mut self, template_idx: usize, duty: Duty) -> bool {
        let key = duty.key();
        if self.columns.contains_key(&key) {
            return false;
        }
        self.columns.insert(
            key,
            PooledColumn {
                duty,
                template_idx,
                positive_streak: 0,
                fixed: false,
            },
        );
        true
    }

    pub fn fix(&mut self, key: &DutyKey) -> bool {
        match self.columns.get_mut(key) {
            Some(c) => {
                c.fixed = true;
                true
            }
            None => false,
        }
    }

    pub fn fixed_count_by_template(&self, n_templates: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n_templates];
        for c in self.columns.values() {
            if c.fixed {
                counts[c.template_idx] += 1;
            }
        }
        counts
    }
}

/// Removes nonbasic, non-fixed columns whose reduced cost stayed positive
/// for `streak_limit` consecutive master solves. Returns the removal count.
pub fn manage_columns(pool: &mut ColumnPool, basic: &HashSet<DutyKey>, streak_limit: u32) -> usize {
    let before = pool.columns.len();
    pool.columns
        .retain(|key, col| col.fixed || col.positive_streak < streak_limit || basic.contains(key));
    before - pool.columns.len()
}

#[derive(Debug, Clone)]
pub struct ColgenResult {
    pub objective: f64,
    /// Capacity-row duals per template, in instance template order.
    pub theta: Vec<f64>,
    /// Cover-row duals per task, in scenario task order.
    pub lambda: Vec<f64>,
    /// Reduced-cost mass of duties fixed to one; part of the dual objective
    /// and of the constant term of cuts derived from these duals.
    pub fixed_dual_offset: f64,
    pub column_values: Vec<(DutyKey, f64)>,
    pub excess_by_template: Vec<f64>,
    /// Set only when a final exact pricing sweep found no improving column.
    pub optimal: bool,
    pub iterations: usize,
    pub pool_size: usize,
    pub columns_added: usize,
    pub columns_removed: usize,
}

impl ColgenResult {
    pub fn total_excess(&self) -> f64 {
        self.excess_by_template.iter().sum()
    }

    /// All duty variables within integrality tolerance of {0, 1}.
    pub fn is_integral(&self) -> bool {
        self.column_values
            .iter()
            .all(|(_, v)| (v - v.round()).abs() <= crate::lp::TOL_INT)
    }
}

/// Column-generation solver for one scenario, owning its pool and networks.
pub struct BspSolver {
    pub scenario_idx: usize,
    networks: Vec<Arc<DutyNetwork>>,
    /// Per template: scenario task index for each network node.
    node_to_task: Vec<Vec<usize>>,
    pub pool: ColumnPool,
    config: ColgenConfig,
}

impl BspSolver {
    pub fn new(instance: &Instance, scenario_idx: usize, config: ColgenConfig) -> Self {
        let scenario = &instance.scenarios[scenario_idx];
        let mut cache = NetworkCache::new();
        let networks: Vec<Arc<DutyNetwork>> = instance
            .templates
            .iter()
            .map(|t| cache.get(instance, t, scenario))
            .collect();
        let node_to_task = networks
            .iter()
            .map(|net| {
                net.tasks
                    .iter()
                    .map(|t| {
                        scenario
                            .tasks
                            .iter()
                            .position(|s| s.id == t.id)
                            .expect("network task comes from the scenario")
                    })
                    .collect()
            })
            .collect();
        BspSolver {
            scenario_idx,
            networks,
            node_to_task,
            pool: ColumnPool::default(),
            config,
        }
    }

    fn scenario<'a>(&self, instance: &'a Instance) -> &'a Scenario {
        &instance.scenarios[self.scenario_idx]
    }

    fn duals_for_template(
        &self,
        template_idx: usize,
        theta: &[f64],
        lambda: &[f64],
        length_weight: f64,
    ) -> PricingDuals {
        PricingDuals {
            theta: theta[template_idx],
            lambda: self.node_to_task[template_idx]
                .iter()
                .map(|&k| lambda[k])
                .collect(),
            length_weight,
        }
    }

    /// Guarantees every task is covered by at least one pool column, pricing
    /// under synthetic duals until coverage closes or proves impossible.
    fn bootstrap_coverage(&mut self, instance: &Instance) -> Result<(), SolveError> {
        let scenario = self.scenario(instance);
        let n_tasks = scenario.tasks.len();
        loop {
            let mut covered = vec![false; n_tasks];
            for col in self.pool.columns.values() {
                for (k, task) in scenario.tasks.iter().enumerate() {
                    if !covered[k] && col.duty.covers(&task.id) {
                        covered[k] = true;
                    }
                }
            }
            let uncovered: Vec<usize> =
                (0..n_tasks).filter(|&k| !covered[k]).collect();
            if uncovered.is_empty() {
                return Ok(());
            }
            let lambda: Vec<f64> = (0..n_tasks)
                .map(|k| if covered[k] { 0.0 } else { instance.excess_cost })
                .collect();
            let theta = vec![0.0; instance.templates.len()];
            let mut added = 0;
            for (p, template) in instance.templates.iter().enumerate() {
                let duals = self.duals_for_template(p, &theta, &lambda, 0.0);
                if let Some(col) = price_exact(instance, template, &self.networks[p], &duals) {
                    if self.pool.insert(p, col.duty) {
                        added += 1;
                    }
                }
            }
            if added == 0 {
                let k = uncovered[0];
                return Err(SolveError::UncoverableTask {
                    scenario: scenario.id.clone(),
                    task: scenario.tasks[k].id.clone(),
                });
            }
        }
    }

    /// Builds and solves the restricted master for the current pool.
    fn solve_rmp(
        &self,
        instance: &Instance,
        capacities: &[f64],
        mode: &BspMode,
    ) -> Result<RmpSolution, SolveError> {
        let scenario = self.scenario(instance);
        let n_templates = instance.templates.len();
        let n_tasks = scenario.tasks.len();
        let mut lp = LinearProgram::minimize();

        let mut capacity_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_templates];
        let mut cover_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_tasks];

        let mut col_vars = Vec::with_capacity(self.pool.columns.len());
        for (key, col) in &self.pool.columns {
            let cost = mode.length_weight() * col.duty.length_cost;
            let (lb, ub) = if col.fixed { (1.0, 1.0) } else { (0.0, INF) };
            let x = lp.add_var(format!("x{}", col_vars.len()), cost, lb, ub, false);
            capacity_terms[col.template_idx].push((x, 1.0));
            for (k, task) in scenario.tasks.iter().enumerate() {
                if col.duty.covers(&task.id) {
                    cover_terms[k].push((x, 1.0));
                }
            }
            col_vars.push((key.clone(), x));
        }
        let v_vars: Vec<usize> = (0..n_templates)
            .map(|p| lp.add_var(format!("v{p}"), instance.excess_cost, 0.0, INF, false))
            .collect();
        let u_var = match mode {
            BspMode::Pareto { gamma_bar, .. } => {
                Some(lp.add_var("u", *gamma_bar, -INF, INF, false))
            }
            _ => None,
        };

        // Duties fixed to one shift the strong-duality identity of the
        // subproblem; the auxiliary u column must carry the net coefficients
        // or its optimality row becomes dual-infeasible.
        let fixed_per_template = self.pool.fixed_count_by_template(n_templates);
        let mut fixed_cover = vec![0.0f64; n_tasks];
        for col in self.pool.columns.values() {
            if col.fixed {
                for (k, task) in scenario.tasks.iter().enumerate() {
                    if col.duty.covers(&task.id) {
                        fixed_cover[k] += 1.0;
                    }
                }
            }
        }

        let mut capacity_rows = Vec::with_capacity(n_templates);
        for p in 0..n_templates {
            let mut coeffs = capacity_terms[p].clone();
            coeffs.push((v_vars[p], -1.0));
            let rhs = match mode {
                BspMode::Pareto { core_point, .. } => {
                    if let Some(u) = u_var {
                        coeffs.push((u, capacities[p] - fixed_per_template[p] as f64));
                    }
                    core_point[p]
                }
                _ => capacities[p],
            };
            capacity_rows.push(lp.add_row(format!("cap{p}"), coeffs, RowSense::Le, rhs));
        }
        let mut cover_rows = Vec::with_capacity(n_tasks);
        for k in 0..n_tasks {
            let mut coeffs = cover_terms[k].clone();
            if let Some(u) = u_var {
                coeffs.push((u, 1.0 - fixed_cover[k]));
            }
            cover_rows.push(lp.add_row(format!("cov{k}"), coeffs, RowSense::Ge, 1.0));
        }

        let sol = solve_lp(&lp).map_err(SolveError::Lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(SolveError::Lp(crate::error::LpError::Numerical(format!(
                "restricted master ended {:?}",
                sol.status
            ))));
        }
        let theta: Vec<f64> = capacity_rows
            .iter()
            .map(|&r| sol.duals[r].clamp(-instance.excess_cost, 0.0))
            .collect();
        let lambda: Vec<f64> = cover_rows.iter().map(|&r| sol.duals[r].max(0.0)).collect();
        // Reduced costs of the fixed columns enter the dual objective, and
        // with it the constant of any optimality cut built from these duals.
        let mut fixed_dual_offset = 0.0;
        for col in self.pool.columns.values() {
            if col.fixed {
                let coverage: f64 = scenario
                    .tasks
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| col.duty.covers(&t.id))
                    .map(|(k, _)| lambda[k])
                    .sum();
                fixed_dual_offset +=
                    mode.length_weight() * col.duty.length_cost - theta[col.template_idx] - coverage;
            }
        }
        Ok(RmpSolution {
            objective: sol.objective,
            theta,
            lambda,
            column_values: col_vars
                .iter()
                .map(|(key, x)| (key.clone(), sol.primal[*x]))
                .collect(),
            column_basic: col_vars
                .iter()
                .filter(|(_, x)| sol.basic[*x])
                .map(|(key, _)| key.clone())
                .collect(),
            excess: v_vars.iter().map(|&v| sol.primal[v]).collect(),
            fixed_dual_offset,
        })
    }

    fn price_round(
        &self,
        instance: &Instance,
        theta: &[f64],
        lambda: &[f64],
        length_weight: f64,
        exact: bool,
    ) -> Vec<(usize, PricedColumn)> {
        let price_one = |p: usize| -> Vec<(usize, PricedColumn)> {
            let template = &instance.templates[p];
            let duals = self.duals_for_template(p, theta, lambda, length_weight);
            if exact {
                price_exact(instance, template, &self.networks[p], &duals)
                    .into_iter()
                    .map(|c| (p, c))
                    .collect()
            } else {
                price_heuristic(
                    instance,
                    template,
                    &self.networks[p],
                    &duals,
                    self.config.max_columns_per_pricing,
                )
                .into_iter()
                .map(|c| (p, c))
                .collect()
            }
        };
        let mut results: Vec<(usize, PricedColumn)> = if self.config.parallel_pricing {
            (0..instance.templates.len())
                .into_par_iter()
                .flat_map_iter(price_one)
                .collect()
        } else {
            (0..instance.templates.len()).flat_map(price_one).collect()
        };
        // Deterministic merge independent of thread scheduling.
        results.sort_by(|a, b| {
            a.1.reduced_cost
                .total_cmp(&b.1.reduced_cost)
                .then_with(|| a.1.duty.key().cmp(&b.1.duty.key()))
        });
        results
    }

    /// Solves the scenario subproblem to LP optimality by column generation.
    pub fn solve(
        &mut self,
        instance: &Instance,
        capacities: &[f64],
        mode: BspMode,
    ) -> Result<ColgenResult, SolveError> {
        assert_eq!(capacities.len(), instance.templates.len());
        self.bootstrap_coverage(instance)?;

        let length_weight = mode.length_weight();
        let mut heuristic_exhausted = false;
        let mut columns_added = 0usize;
        let mut columns_removed = 0usize;
        let mut last_objective = f64::INFINITY;

        for iteration in 0..self.config.iteration_cap {
            let rmp = self.solve_rmp(instance, capacities, &mode)?;
            debug_assert!(
                rmp.objective <= last_objective + 1e-6 * (1.0 + last_objective.abs()),
                "master objective regressed: {} -> {}",
                last_objective,
                rmp.objective
            );
            last_objective = rmp.objective;

            // Reduced-cost bookkeeping for column management.
            let basic: HashSet<DutyKey> = rmp.column_basic.iter().cloned().collect();
            for (key, col) in self.pool.columns.iter_mut() {
                let net = &self.networks[col.template_idx];
                let duals = PricingDuals {
                    theta: rmp.theta[col.template_idx],
                    lambda: self.node_to_task[col.template_idx]
                        .iter()
                        .map(|&k| rmp.lambda[k])
                        .collect(),
                    length_weight,
                };
                let rc = duals.reduced_cost_of(net, &col.duty);
                if rc > TOL_RC && !basic.contains(key) {
                    col.positive_streak += 1;
                } else {
                    col.positive_streak = 0;
                }
            }
            columns_removed += manage_columns(&mut self.pool, &basic, self.config.removal_streak);

            // Price new columns: heuristic first, exact once it dries up.
            let mut new_cols = Vec::new();
            if !heuristic_exhausted {
                let batch =
                    self.price_round(instance, &rmp.theta, &rmp.lambda, length_weight, false);
                new_cols = self.novel(batch);
                if new_cols.is_empty() {
                    heuristic_exhausted = true;
                }
            }
            if heuristic_exhausted {
                let batch =
                    self.price_round(instance, &rmp.theta, &rmp.lambda, length_weight, true);
                new_cols = self.novel(batch);
                if new_cols.is_empty() {
                    // Exact sweep found nothing: duals price every duty of
                    // every template nonnegatively.
                    return Ok(self.finish(rmp, iteration + 1, columns_added, columns_removed, true));
                }
            }

            let filtered = filter_columns(
                new_cols.into_iter().map(|(_, c)| c).collect(),
                self.config.theta_disjoint,
                usize::MAX,
            );
            for col in filtered {
                let p = instance
                    .templates
                    .iter()
                    .position(|t| t.id == col.duty.template)
                    .expect("column template exists");
                if self.pool.insert(p, col.duty) {
                    columns_added += 1;
                }
            }
        }
        Err(SolveError::ColgenDiverged {
            iterations: self.config.iteration_cap,
            objective: last_objective,
            last_added: columns_added,
        })
    }

    /// Drops candidates already present in the pool.
    fn novel(&self, batch: Vec<(usize, PricedColumn)>) -> Vec<(usize, PricedColumn)> {
        batch
            .into_iter()
            .filter(|(_, c)| !self.pool.columns.contains_key(&c.duty.key()))
            .collect()
    }

    fn finish(
        &self,
        rmp: RmpSolution,
        iterations: usize,
        columns_added: usize,
        columns_removed: usize,
        optimal: bool,
    ) -> ColgenResult {
        ColgenResult {
            objective: rmp.objective,
            theta: rmp.theta,
            lambda: rmp.lambda,
            fixed_dual_offset: rmp.fixed_dual_offset,
            column_values: rmp.column_values,
            excess_by_template: rmp.excess,
            optimal,
            iterations,
            pool_size: self.pool.columns.len(),
            columns_added,
            columns_removed,
        }
    }
}

struct RmpSolution {
    objective: f64,
    theta: Vec<f64>,
    lambda: Vec<f64>,
    column_values: Vec<(DutyKey, f64)>,
    column_basic: Vec<DutyKey>,
    excess: Vec<f64>,
    fixed_dual_offset: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_duties;
    use crate::model::testutil::*;

    /// Independent oracle: the same subproblem LP built over every
    /// enumerated duty at once, no column generation involved.
    fn full_enumeration_lp(instance: &Instance, scenario_idx: usize, capacities: &[f64]) -> f64 {
        let scenario = &instance.scenarios[scenario_idx];
        let mut lp = LinearProgram::minimize();
        let mut capacity_terms: Vec<Vec<(usize, f64)>> =
            vec![Vec::new(); instance.templates.len()];
        let mut cover_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); scenario.tasks.len()];
        for (p, template) in instance.templates.iter().enumerate() {
            for duty in enumerate_duties(instance, template, scenario) {
                let x = lp.add_var("x", 0.0, 0.0, INF, false);
                capacity_terms[p].push((x, 1.0));
                for (k, task) in scenario.tasks.iter().enumerate() {
                    if duty.covers(&task.id) {
                        cover_terms[k].push((x, 1.0));
                    }
                }
            }
        }
        for (p, terms) in capacity_terms.into_iter().enumerate() {
            let v = lp.add_var("v", instance.excess_cost, 0.0, INF, false);
            let mut coeffs = terms;
            coeffs.push((v, -1.0));
            lp.add_row("cap", coeffs, RowSense::Le, capacities[p]);
        }
        for terms in cover_terms {
            lp.add_row("cov", terms, RowSense::Ge, 1.0);
        }
        solve_lp(&lp).unwrap().objective
    }

    #[test]
    fn ample_capacity_gives_zero_excess() {
        let inst = golden_instance();
        let mut solver = BspSolver::new(&inst, 0, ColgenConfig::default());
        let caps = vec![8.0; inst.templates.len()];
        let res = solver.solve(&inst, &caps, BspMode::Excess).unwrap();
        assert!(res.optimal);
        assert!(res.objective.abs() < 1e-6, "objective {}", res.objective);
        assert!(res.total_excess() < 1e-6);
    }

    #[test]
    fn zero_capacity_matches_full_enumeration_lp() {
        let inst = golden_instance();
        for s in 0..inst.scenarios.len() {
            let caps = vec![0.0; inst.templates.len()];
            let mut solver = BspSolver::new(&inst, s, ColgenConfig::default());
            let res = solver.solve(&inst, &caps, BspMode::Excess).unwrap();
            let oracle = full_enumeration_lp(&inst, s, &caps);
            assert!(
                (res.objective - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()),
                "colgen {} vs oracle {}",
                res.objective,
                oracle
            );
            // One duty covers everything, so one excess duty suffices.
            assert!((res.objective - inst.excess_cost).abs() < 1e-6);
        }
    }

    #[test]
    fn fractional_capacity_matches_oracle() {
        let inst = golden_instance();
        let mut caps = vec![0.0; inst.templates.len()];
        caps[0] = 1.0; // one T1 slot only
        let mut solver = BspSolver::new(&inst, 0, ColgenConfig::default());
        let res = solver.solve(&inst, &caps, BspMode::Excess).unwrap();
        let oracle = full_enumeration_lp(&inst, 0, &caps);
        assert!((res.objective - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()));
        assert!(res.objective.abs() < 1e-6);
    }

    #[test]
    fn returned_duals_price_every_enumerated_duty() {
        let inst = golden_instance();
        let caps = vec![0.0; inst.templates.len()];
        let mut solver = BspSolver::new(&inst, 0, ColgenConfig::default());
        let res = solver.solve(&inst, &caps, BspMode::Excess).unwrap();
        assert!(res.optimal);
        let scenario = &inst.scenarios[0];
        for (p, template) in inst.templates.iter().enumerate() {
            assert!(res.theta[p] <= 1e-9 && res.theta[p] >= -inst.excess_cost - 1e-9);
            for duty in enumerate_duties(&inst, template, scenario) {
                let coverage: f64 = scenario
                    .tasks
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| duty.covers(&t.id))
                    .map(|(k, _)| res.lambda[k])
                    .sum();
                assert!(
                    res.theta[p] + coverage <= TOL_RC,
                    "dual constraint violated for {:?}: {}",
                    duty.key(),
                    res.theta[p] + coverage
                );
            }
        }
        for l in &res.lambda {
            assert!(*l >= -1e-9);
        }
    }

    #[test]
    fn pareto_mode_at_incumbent_reproduces_regular_objective() {
        let inst = golden_instance();
        let caps = vec![0.0; inst.templates.len()];
        let mut solver = BspSolver::new(&inst, 0, ColgenConfig::default());
        let regular = solver.solve(&inst, &caps, BspMode::Excess).unwrap();

        let mode = BspMode::Pareto {
            core_point: caps.clone(),
            gamma_bar: regular.objective,
        };
        let pareto = solver.solve(&inst, &caps, mode).unwrap();
        // Constraint forcing optimality at the incumbent: with w = y-hat the
        // auxiliary objective collapses to the regular one.
        let cut_at_caps: f64 = caps
            .iter()
            .zip(&pareto.theta)
            .map(|(y, t)| y * t)
            .sum::<f64>()
            + pareto.lambda.iter().sum::<f64>();
        assert!(
            (cut_at_caps - regular.objective).abs() <= 1e-6 * (1.0 + regular.objective.abs()),
            "cut value {} vs gamma_bar {}",
            cut_at_caps,
            regular.objective
        );
    }

    #[test]
    fn pareto_duals_satisfy_incumbent_optimality_row() {
        let inst = golden_instance();
        let caps = vec![1.0, 0.0, 0.0];
        let mut solver = BspSolver::new(&inst, 1, ColgenConfig::default());
        let regular = solver.solve(&inst, &caps, BspMode::Excess).unwrap();
        let core = vec![0.7, 0.3, 0.5];
        let mode = BspMode::Pareto {
            core_point: core,
            gamma_bar: regular.objective,
        };
        let pareto = solver.solve(&inst, &caps, mode).unwrap();
        let lhs: f64 = caps
            .iter()
            .zip(&pareto.theta)
            .map(|(y, t)| y * t)
            .sum::<f64>()
            + pareto.lambda.iter().sum::<f64>();
        assert!(
            (lhs - regular.objective).abs() <= 1e-6 * (1.0 + regular.objective.abs()),
            "(7c) violated: {} vs {}",
            lhs,
            regular.objective
        );
    }

    #[test]
    fn column_management_rules() {
        let inst = golden_instance();
        let scenario = &inst.scenarios[0];
        let mut pool = ColumnPool::default();
        pool.insert(0, duty_of(&inst, scenario, "T1", &["A", "B"]));
        pool.insert(0, duty_of(&inst, scenario, "T1", &["C", "D"]));
        pool.insert(0, duty_of(&inst, scenario, "T1", &["E", "F"]));
        let keys: Vec<DutyKey> = pool.columns.keys().cloned().collect();

        // 14 positive solves: retained.
        for col in pool.columns.values_mut() {
            col.positive_streak = 14;
        }
        assert_eq!(manage_columns(&mut pool, &HashSet::new(), 15), 0);
        assert_eq!(pool.len(), 3);

        // 15 straight: removed unless basic or fixed.
        for col in pool.columns.values_mut() {
            col.positive_streak = 15;
        }
        let mut basic = HashSet::new();
        basic.insert(keys[0].clone());
        pool.fix(&keys[1]);
        assert_eq!(manage_columns(&mut pool, &basic, 15), 1);
        assert_eq!(pool.len(), 2);
        assert!(pool.columns.contains_key(&keys[0]));
        assert!(pool.columns.contains_key(&keys[1]));
    }

    #[test]
    fn fixed_duty_forces_capacity_consumption() {
        let inst = golden_instance();
        let caps = vec![0.0; inst.templates.len()];
        let mut solver = BspSolver::new(&inst, 0, ColgenConfig::default());
        let before = solver.solve(&inst, &caps, BspMode::Excess).unwrap();
        // Fix a two-task duty; the remaining four tasks still need cover.
        let key = duty_of(&inst, &inst.scenarios[0], "T1", &["A", "B"]).key();
        assert!(solver.pool.columns.contains_key(&key) || {
            solver
                .pool
                .insert(0, duty_of(&inst, &inst.scenarios[0], "T1", &["A", "B"]));
            true
        });
        solver.pool.fix(&key);
        let after = solver.solve(&inst, &caps, BspMode::Excess).unwrap();
        // Zero capacity: the fixed duty itself becomes an excess duty and the
        // other tasks need at least one more.
        assert!(after.objective >= before.objective - 1e-6);
        assert!((after.objective - 2.0 * inst.excess_cost).abs() < 1e-6);
    }

    #[test]
    fn workload_mode_minimizes_seconds_with_cover() {
        let inst = golden_instance();
        let caps = vec![8.0, 8.0, 8.0];
        let mut solver = BspSolver::new(&inst, 0, ColgenConfig::default());
        let res = solver.solve(&inst, &caps, BspMode::Workload).unwrap();
        assert!(res.optimal);
        assert!(res.total_excess() < 1e-6);
        // Cheapest cover by workload: compare against enumeration LP with
        // length costs.
        let scenario = &inst.scenarios[0];
        let mut lp = LinearProgram::minimize();
        let mut cover_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); scenario.tasks.len()];
        for template in &inst.templates {
            for duty in enumerate_duties(&inst, template, scenario) {
                let x = lp.add_var("x", duty.length_cost, 0.0, INF, false);
                for (k, task) in scenario.tasks.iter().enumerate() {
                    if duty.covers(&task.id) {
                        cover_terms[k].push((x, 1.0));
                    }
                }
            }
        }
        for terms in cover_terms {
            lp.add_row("cov", terms, RowSense::Ge, 1.0);
        }
        let oracle = solve_lp(&lp).unwrap().objective;
        assert!(
            (res.objective - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()),
            "workload {} vs oracle {}",
            res.objective,
            oracle
        );
    }
}
