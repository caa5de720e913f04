//! The literature benchmark: column generation over cross-scenario template
//! columns with a two-layer pricing structure.
//!
//! A template column bundles one duty per scenario inside a shared window
//! whose start snaps to the allowed template starting times. The first
//! pricing layer finds negative-reduced-cost source-sink paths in a tailored
//! multi-partition network over the current duty pool; when it dries up, a
//! second layer generates promising duties per scenario and grows the
//! network, pruned back to a node budget by reduced cost.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use crate::colgen::{BspMode, BspSolver, ColgenConfig};
use crate::error::SolveError;
use crate::graph::build_network;
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowSense, INF};
use crate::model::{Duty, DutyKey, Instance, Minutes, TemplateId};
use crate::pricing::{filter_columns, price_exact, PricedColumn, PricingDuals, TOL_RC};
use crate::report::{
    BoundsRecord, CutStats, Phase, Portfolio, PortfolioEntry, ScenarioOutcome, SolveReport,
    Timings,
};

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Cap on total duty nodes across partitions.
    pub node_budget: usize,
    pub columns_per_pricing: usize,
    pub theta_disjoint: f64,
    pub iteration_cap: usize,
    pub time_limit: Duration,
    /// Connect the source only to the first partition; the cross-checked
    /// variant admits paths over any contiguous scenario range.
    pub restrict_source_to_first: bool,
    pub colgen: ColgenConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            node_budget: 5000,
            columns_per_pricing: 50,
            theta_disjoint: 0.5,
            iteration_cap: 10_000,
            time_limit: Duration::from_secs(600),
            restrict_source_to_first: true,
            colgen: ColgenConfig::default(),
        }
    }
}

/// One duty node of the tailored network.
#[derive(Debug, Clone)]
pub struct DutyNode {
    pub duty: Duty,
    /// Node survives budget pruning when part of the initial solution.
    pub initial: bool,
    /// Reduced-cost score from the latest second-layer pricing round.
    pub score: f64,
}

/// Multi-partition pricing network: one partition per scenario.
pub struct TailoredNetwork {
    pub partitions: Vec<Vec<DutyNode>>,
    /// Arcs between consecutive partitions: (partition, from node, to node),
    /// present when both duties can share a template window.
    pub arcs: Vec<(usize, usize, usize)>,
    pub node_budget: usize,
}

impl TailoredNetwork {
    pub fn node_count(&self) -> usize {
        self.partitions.iter().map(Vec::len).sum()
    }
}

/// A compatible bundle of one duty per covered scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateColumn {
    /// (scenario index, duty), contiguous in the scenario order.
    pub duties: Vec<(usize, Duty)>,
    /// Snapped window.
    pub window_start: Minutes,
    pub window_end: Minutes,
    pub template: TemplateId,
    pub cost: f64,
}

impl TemplateColumn {
    fn key(&self) -> (Minutes, Vec<(usize, DutyKey)>) {
        (
            self.window_start,
            self.duties.iter().map(|(s, d)| (*s, d.key())).collect(),
        )
    }
}

pub struct WindowCatalogue {
    /// Sorted allowed starts with the owning template id and cost.
    starts: Vec<(Minutes, TemplateId, f64)>,
    length: Minutes,
}

impl WindowCatalogue {
    fn build(instance: &Instance) -> Result<WindowCatalogue, SolveError> {
        let mut starts = Vec::new();
        let mut length = None;
        for t in &instance.templates {
            let l = t.latest_end - t.earliest_start;
            match length {
                None => length = Some(l),
                Some(cur) if cur != l => {
                    return Err(SolveError::UnsupportedByBenchmark(format!(
                        "templates of mixed window lengths ({cur} and {l} minutes)"
                    )))
                }
                _ => {}
            }
            starts.push((t.earliest_start, t.id.clone(), t.cost));
        }
        starts.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        Ok(WindowCatalogue {
            starts,
            length: length.unwrap_or(0),
        })
    }

    /// Allowed snapped starts admitting a duty spanning [start, end].
    fn fitting(&self, start: Minutes, end: Minutes) -> impl Iterator<Item = &(Minutes, TemplateId, f64)> {
        let length = self.length;
        self.starts
            .iter()
            .filter(move |(g, _, _)| *g <= start && end <= *g + length)
    }
}

fn duties_window_compatible(length: Minutes, a: &Duty, b: &Duty) -> bool {
    let lo = a.start_time.min(b.start_time);
    let hi = a.end_time.max(b.end_time);
    hi - lo <= length
}

/// First-layer pricing: negative reduced-cost source-sink paths under the
/// master duals. `lambda[s][k]` are cover duals per scenario task.
pub fn price_templates(
    network: &TailoredNetwork,
    catalogue: &WindowCatalogue,
    coverage_value: &[Vec<f64>],
    limit: usize,
    restrict_source_to_first: bool,
) -> Vec<TemplateColumn> {
    let n_scenarios = network.partitions.len();
    // Label per (partition, node, window start): best accumulated coverage.
    // Window start fully determines future compatibility.
    type LabelKey = (usize, usize, Minutes);
    let mut best: HashMap<LabelKey, (f64, Option<LabelKey>)> = HashMap::new();

    let source_partitions: Vec<usize> = if restrict_source_to_first {
        vec![0]
    } else {
        (0..n_scenarios).collect()
    };
    for &s in &source_partitions {
        for (i, node) in network.partitions[s].iter().enumerate() {
            for (g, _, _) in catalogue.fitting(node.duty.start_time, node.duty.end_time) {
                let key = (s, i, *g);
                let value = coverage_value[s][i];
                match best.get(&key) {
                    Some((v, _)) if *v >= value => {}
                    _ => {
                        best.insert(key, (value, None));
                    }
                }
            }
        }
    }

    // Forward sweep over consecutive partitions.
    for s in 0..n_scenarios.saturating_sub(1) {
        let keys: Vec<(LabelKey, f64)> = best
            .iter()
            .filter(|((ls, _, _), _)| *ls == s)
            .map(|(k, (v, _))| (*k, *v))
            .collect();
        for ((_, i, g), value) in keys {
            for &(ps, from, to) in &network.arcs {
                if ps != s || from != i {
                    continue;
                }
                let duty = &network.partitions[s + 1][to].duty;
                if duty.start_time < g || duty.end_time > g + catalogue.length {
                    continue;
                }
                let key = (s + 1, to, g);
                let cand = value + coverage_value[s + 1][to];
                match best.get(&key) {
                    Some((v, _)) if *v >= cand => {}
                    _ => {
                        best.insert(key, (cand, Some((s, i, g))));
                    }
                }
            }
        }
    }

    // Sink: with the source restriction, paths must span every scenario.
    let mut candidates: Vec<(f64, LabelKey)> = best
        .iter()
        .filter(|((s, _, _), _)| {
            if restrict_source_to_first {
                *s == n_scenarios - 1
            } else {
                true
            }
        })
        .map(|(k, (v, _))| {
            let (g, _, cost) = catalogue
                .starts
                .iter()
                .find(|(g, _, _)| *g == k.2)
                .expect("window start from catalogue");
            let _ = g;
            (cost - v, *k)
        })
        .filter(|(rc, _)| *rc < -TOL_RC)
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    candidates.truncate(limit);

    candidates
        .into_iter()
        .map(|(_, mut key)| {
            let mut duties = Vec::new();
            loop {
                let (s, i, _) = key;
                duties.push((s, network.partitions[s][i].duty.clone()));
                match best[&key].1 {
                    Some(prev) => key = prev,
                    None => break,
                }
            }
            duties.reverse();
            let g = key.2;
            let (_, template, cost) = catalogue
                .starts
                .iter()
                .find(|(start, _, _)| *start == g)
                .expect("window start from catalogue")
                .clone();
            TemplateColumn {
                duties,
                window_start: g,
                window_end: g + catalogue.length,
                template,
                cost,
            }
        })
        .collect()
}

struct MasterSolution {
    objective: f64,
    /// Cover duals per (scenario, task).
    lambda: Vec<Vec<f64>>,
    /// Recovery-row duals per scenario.
    mu: Vec<f64>,
    template_values: Vec<f64>,
    excess_values: Vec<f64>,
}

struct BenchmarkMaster {
    columns: Vec<TemplateColumn>,
    column_keys: HashSet<(Minutes, Vec<(usize, DutyKey)>)>,
    /// (scenario, duty) excess columns.
    excess: Vec<(usize, Duty)>,
    excess_keys: HashSet<(usize, DutyKey)>,
    /// Fixed-to-one flags from the integerisation phase.
    fixed_templates: Vec<bool>,
    fixed_excess: Vec<bool>,
}

impl BenchmarkMaster {
    fn new() -> Self {
        BenchmarkMaster {
            columns: Vec::new(),
            column_keys: HashSet::new(),
            excess: Vec::new(),
            excess_keys: HashSet::new(),
            fixed_templates: Vec::new(),
            fixed_excess: Vec::new(),
        }
    }

    fn add_template(&mut self, col: TemplateColumn) -> bool {
        if self.column_keys.insert(col.key()) {
            self.columns.push(col);
            self.fixed_templates.push(false);
            true
        } else {
            false
        }
    }

    fn add_excess(&mut self, scenario: usize, duty: Duty) -> bool {
        if self.excess_keys.insert((scenario, duty.key())) {
            self.excess.push((scenario, duty));
            self.fixed_excess.push(false);
            true
        } else {
            false
        }
    }

    fn solve(&self, instance: &Instance) -> Result<MasterSolution, SolveError> {
        let mut lp = LinearProgram::minimize();
        let chi: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let lb = if self.fixed_templates[i] { 1.0 } else { 0.0 };
                lp.add_var(format!("chi{i}"), c.cost, lb, INF, false)
            })
            .collect();
        let ex: Vec<usize> = self
            .excess
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let lb = if self.fixed_excess[i] { 1.0 } else { 0.0 };
                lp.add_var(format!("ex{i}"), 0.0, lb, INF, false)
            })
            .collect();
        let eta = lp.add_var("eta", 1.0, 0.0, INF, false);

        let mut recovery_rows = Vec::new();
        for (s, _) in instance.scenarios.iter().enumerate() {
            let mut coeffs: Vec<(usize, f64)> = self
                .excess
                .iter()
                .enumerate()
                .filter(|(_, (es, _))| *es == s)
                .map(|(i, _)| (ex[i], instance.excess_cost))
                .collect();
            coeffs.push((eta, -1.0));
            recovery_rows.push(lp.add_row(format!("rec{s}"), coeffs, RowSense::Le, 0.0));
        }
        let mut cover_rows = Vec::new();
        for (s, scenario) in instance.scenarios.iter().enumerate() {
            let mut rows_s = Vec::new();
            for (k, task) in scenario.tasks.iter().enumerate() {
                let mut coeffs: Vec<(usize, f64)> = Vec::new();
                for (i, col) in self.columns.iter().enumerate() {
                    if col
                        .duties
                        .iter()
                        .any(|(cs, d)| *cs == s && d.covers(&task.id))
                    {
                        coeffs.push((chi[i], 1.0));
                    }
                }
                for (i, (es, duty)) in self.excess.iter().enumerate() {
                    if *es == s && duty.covers(&task.id) {
                        coeffs.push((ex[i], 1.0));
                    }
                }
                rows_s.push(lp.add_row(format!("cov{s}_{k}"), coeffs, RowSense::Ge, 1.0));
            }
            cover_rows.push(rows_s);
        }

        let sol = solve_lp(&lp).map_err(SolveError::Lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(SolveError::Lp(crate::error::LpError::Numerical(format!(
                "benchmark master ended {:?}",
                sol.status
            ))));
        }
        Ok(MasterSolution {
            objective: sol.objective,
            lambda: cover_rows
                .iter()
                .map(|rows| rows.iter().map(|&r| sol.duals[r].max(0.0)).collect())
                .collect(),
            mu: recovery_rows
                .iter()
                .map(|&r| sol.duals[r].min(0.0))
                .collect(),
            template_values: chi.iter().map(|&x| sol.primal[x]).collect(),
            excess_values: ex.iter().map(|&x| sol.primal[x]).collect(),
        })
    }
}

pub struct BenchmarkOutcome {
    pub report: SolveReport,
    pub lp_bound: f64,
}

fn check_preconditions(instance: &Instance) -> Result<(), SolveError> {
    if !instance.rostering_constraints.is_empty() {
        return Err(SolveError::UnsupportedByBenchmark(
            "rostering constraints present".into(),
        ));
    }
    if instance.templates.iter().any(|t| t.is_reserve) {
        return Err(SolveError::UnsupportedByBenchmark(
            "reserve templates present".into(),
        ));
    }
    if (instance.gamma as usize) < instance.templates.len() {
        return Err(SolveError::UnsupportedByBenchmark(format!(
            "template-type limit {} below the catalogue size {}",
            instance.gamma,
            instance.templates.len()
        )));
    }
    Ok(())
}

/// Runs the benchmark heuristic: column-generation LP phase plus an
/// iterated-rounding fixing rule for integrality.
pub fn solve_benchmark(
    instance: &Instance,
    config: &BenchmarkConfig,
) -> Result<BenchmarkOutcome, SolveError> {
    let start = Instant::now();
    instance.validate()?;
    check_preconditions(instance)?;
    let catalogue = WindowCatalogue::build(instance)?;
    let n_scenarios = instance.scenarios.len();

    // Initial node set: an ordinary crew scheduling solution per scenario.
    let mut network = TailoredNetwork {
        partitions: vec![Vec::new(); n_scenarios],
        arcs: Vec::new(),
        node_budget: config.node_budget,
    };
    let mut master = BenchmarkMaster::new();
    let ample = vec![instance.capacity_bound as f64; instance.templates.len()];
    for s in 0..n_scenarios {
        let mut solver = BspSolver::new(instance, s, config.colgen.clone());
        let res = solver.solve(instance, &ample, BspMode::Excess)?;
        let mut seen = HashSet::new();
        for (key, value) in &res.column_values {
            if *value > 1e-6 && seen.insert(key.clone()) {
                let col = &solver.pool.columns[key];
                network.partitions[s].push(DutyNode {
                    duty: col.duty.clone(),
                    initial: true,
                    score: 0.0,
                });
                master.add_excess(s, col.duty.clone());
            }
        }
    }
    rebuild_arcs(&mut network, &catalogue, config.restrict_source_to_first);

    // Per-template pricing networks for the second layer.
    let duty_networks: Vec<Vec<_>> = (0..n_scenarios)
        .map(|s| {
            instance
                .templates
                .iter()
                .map(|t| build_network(instance, t, &instance.scenarios[s]))
                .collect()
        })
        .collect();

    let mut bounds = Vec::new();
    let mut lp_bound = f64::NAN;
    let mut iterations = 0usize;
    for iteration in 0..config.iteration_cap {
        iterations = iteration + 1;
        if start.elapsed() > config.time_limit {
            break;
        }
        let sol = master.solve(instance)?;
        bounds.push(BoundsRecord {
            iteration: iterations,
            phase: Phase::One,
            lb: 0.0,
            ub: Some(sol.objective),
            cuts_added: 0,
            master_objective: sol.objective,
            eta: 0.0,
        });
        lp_bound = sol.objective;

        // Coverage value of each node under the cover duals.
        let coverage_value: Vec<Vec<f64>> = (0..n_scenarios)
            .map(|s| {
                network.partitions[s]
                    .iter()
                    .map(|node| coverage_of(&node.duty, instance, s, &sol.lambda[s]))
                    .collect()
            })
            .collect();
        let new_templates = price_templates(
            &network,
            &catalogue,
            &coverage_value,
            config.columns_per_pricing,
            config.restrict_source_to_first,
        );
        let mut added = 0;
        for col in new_templates {
            if master.add_template(col) {
                added += 1;
            }
        }
        if added > 0 {
            continue;
        }

        // Second layer: grow the duty pool per scenario.
        let mut grew = false;
        for s in 0..n_scenarios {
            let grew_s = price_duties_for_network(
                instance,
                s,
                &duty_networks[s],
                &sol,
                &catalogue,
                &mut network,
                &mut master,
                config,
            )?;
            grew = grew || grew_s;
        }
        if grew {
            rebuild_arcs(&mut network, &catalogue, config.restrict_source_to_first);
            enforce_node_budget(&mut network, &catalogue, config);
            continue;
        }
        break;
    }

    // Fixing rule: iterated rounding of the largest fractional variable.
    let ub_report = integerise(instance, &mut master, config, &catalogue, &network)?;
    let (final_sol, _rounds) = ub_report;
    let ub = final_sol.objective;

    let mut counts: HashMap<TemplateId, u32> = HashMap::new();
    for (i, col) in master.columns.iter().enumerate() {
        let v = final_sol.template_values[i];
        if v > 0.5 {
            *counts.entry(col.template.clone()).or_insert(0) += v.round() as u32;
        }
    }
    let portfolio = Portfolio {
        entries: instance
            .templates
            .iter()
            .map(|t| PortfolioEntry {
                template: t.id.clone(),
                count: counts.get(&t.id).copied().unwrap_or(0),
                active: counts.get(&t.id).copied().unwrap_or(0) > 0,
            })
            .collect(),
        template_cost: master
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| c.cost * final_sol.template_values[i].round())
            .sum(),
    };
    let scenarios: Vec<ScenarioOutcome> = (0..n_scenarios)
        .map(|s| {
            let mut chosen: Vec<DutyKey> = Vec::new();
            for (i, col) in master.columns.iter().enumerate() {
                if final_sol.template_values[i] > 0.5 {
                    for (cs, duty) in &col.duties {
                        if *cs == s {
                            chosen.push(duty.key());
                        }
                    }
                }
            }
            let mut excess = 0.0;
            for (i, (es, duty)) in master.excess.iter().enumerate() {
                if *es == s && final_sol.excess_values[i] > 0.5 {
                    excess += final_sol.excess_values[i].round();
                    chosen.push(duty.key());
                }
            }
            ScenarioOutcome {
                scenario: instance.scenarios[s].id.clone(),
                excess,
                duties: chosen.len(),
                chosen,
            }
        })
        .collect();

    let report = SolveReport {
        method: "benchmark".into(),
        lb: lp_bound,
        ub,
        gap: SolveReport::objective_gap(lp_bound, ub),
        phase1_iterations: iterations,
        phase2_iterations: 0,
        bounds,
        portfolio,
        scenarios,
        cut_stats: CutStats::default(),
        timings: Timings {
            total_ms: start.elapsed().as_millis() as u64,
            ..Timings::default()
        },
    };
    Ok(BenchmarkOutcome {
        report,
        lp_bound,
    })
}

fn coverage_of(duty: &Duty, instance: &Instance, s: usize, lambda: &[f64]) -> f64 {
    instance.scenarios[s]
        .tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| duty.covers(&t.id))
        .map(|(k, _)| lambda[k])
        .sum()
}

fn rebuild_arcs(
    network: &mut TailoredNetwork,
    catalogue: &WindowCatalogue,
    _restrict_source_to_first: bool,
) {
    network.arcs.clear();
    for s in 0..network.partitions.len().saturating_sub(1) {
        for (i, a) in network.partitions[s].iter().enumerate() {
            for (j, b) in network.partitions[s + 1].iter().enumerate() {
                if duties_window_compatible(catalogue.length, &a.duty, &b.duty) {
                    network.arcs.push((s, i, j));
                }
            }
        }
    }
}

/// Second-layer pricing for one scenario. Returns whether anything grew.
#[allow(clippy::too_many_arguments)]
fn price_duties_for_network(
    instance: &Instance,
    s: usize,
    duty_networks: &[crate::graph::DutyNetwork],
    sol: &MasterSolution,
    catalogue: &WindowCatalogue,
    network: &mut TailoredNetwork,
    master: &mut BenchmarkMaster,
    config: &BenchmarkConfig,
) -> Result<bool, SolveError> {
    let n_scenarios = instance.scenarios.len() as f64;
    let mut candidates: Vec<PricedColumn> = Vec::new();
    let mut excess_candidates: Vec<PricedColumn> = Vec::new();
    for (p, template) in instance.templates.iter().enumerate() {
        let net = &duty_networks[p];
        let lambda_nodes: Vec<f64> = net
            .tasks
            .iter()
            .map(|t| {
                instance.scenarios[s]
                    .tasks
                    .iter()
                    .position(|st| st.id == t.id)
                    .map(|k| sol.lambda[s][k])
                    .unwrap_or(0.0)
            })
            .collect();
        // Aggregation-aware score: a duty carries a per-scenario share of
        // its template cost.
        let share_duals = PricingDuals {
            theta: -template.cost / n_scenarios,
            lambda: lambda_nodes.clone(),
            length_weight: 0.0,
        };
        if let Some(col) = price_exact(instance, template, net, &share_duals) {
            candidates.push(col);
        }
        // Excess candidates price against the recovery dual.
        let excess_duals = PricingDuals {
            theta: sol.mu[s] * instance.excess_cost,
            lambda: lambda_nodes,
            length_weight: 0.0,
        };
        if let Some(col) = price_exact(instance, template, net, &excess_duals) {
            excess_candidates.push(col);
        }
    }
    candidates.sort_by(|a, b| {
        a.reduced_cost
            .total_cmp(&b.reduced_cost)
            .then_with(|| a.duty.key().cmp(&b.duty.key()))
    });
    let filtered = filter_columns(candidates, config.theta_disjoint, config.columns_per_pricing);

    let mut grew = false;
    for col in filtered {
        let exists = network.partitions[s]
            .iter()
            .any(|n| n.duty.key() == col.duty.key());
        if !exists {
            network.partitions[s].push(DutyNode {
                duty: col.duty.clone(),
                initial: false,
                score: col.reduced_cost,
            });
            grew = true;
        }
    }
    excess_candidates.sort_by(|a, b| {
        a.reduced_cost
            .total_cmp(&b.reduced_cost)
            .then_with(|| a.duty.key().cmp(&b.duty.key()))
    });
    for col in excess_candidates {
        if master.add_excess(s, col.duty.clone()) {
            grew = true;
        }
    }
    let _ = catalogue;
    Ok(grew)
}

/// Drops the worst non-initial duty nodes when the budget is exceeded.
fn enforce_node_budget(
    network: &mut TailoredNetwork,
    catalogue: &WindowCatalogue,
    config: &BenchmarkConfig,
) {
    let total = network.node_count();
    if total <= config.node_budget {
        return;
    }
    let mut removable: Vec<(f64, usize, usize)> = Vec::new();
    for (s, part) in network.partitions.iter().enumerate() {
        for (i, node) in part.iter().enumerate() {
            if !node.initial {
                removable.push((node.score, s, i));
            }
        }
    }
    // Worst reduced cost first.
    removable.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| (b.1, b.2).cmp(&(a.1, a.2))));
    let excess_nodes = total - config.node_budget;
    let mut to_drop: Vec<(usize, usize)> = removable
        .into_iter()
        .take(excess_nodes)
        .map(|(_, s, i)| (s, i))
        .collect();
    to_drop.sort_by(|a, b| b.cmp(a));
    for (s, i) in to_drop {
        network.partitions[s].remove(i);
    }
    rebuild_arcs(network, catalogue, config.restrict_source_to_first);
}

/// Iterated rounding: fix the largest fractional variable to one and
/// re-solve until the master solution is integral.
fn integerise(
    instance: &Instance,
    master: &mut BenchmarkMaster,
    config: &BenchmarkConfig,
    _catalogue: &WindowCatalogue,
    _network: &TailoredNetwork,
) -> Result<(MasterSolution, usize), SolveError> {
    let mut rounds = 0usize;
    loop {
        let sol = master.solve(instance)?;
        let frac = |v: f64| (v - v.round()).abs() > crate::lp::TOL_INT;
        let mut best: Option<(f64, usize, bool)> = None; // (value, index, is_template)
        for (i, v) in sol.template_values.iter().enumerate() {
            if frac(*v) && best.map(|(bv, _, _)| *v > bv).unwrap_or(true) {
                best = Some((*v, i, true));
            }
        }
        for (i, v) in sol.excess_values.iter().enumerate() {
            if frac(*v) && best.map(|(bv, _, _)| *v > bv).unwrap_or(true) {
                best = Some((*v, i, false));
            }
        }
        match best {
            None => return Ok((sol, rounds)),
            Some((_, i, true)) => master.fixed_templates[i] = true,
            Some((_, i, false)) => master.fixed_excess[i] = true,
        }
        rounds += 1;
        if rounds > 10 * (master.columns.len() + master.excess.len() + config.iteration_cap) {
            return Err(SolveError::FixingDiverged(rounds));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::solve_extensive_lp;
    use crate::model::testutil::*;

    /// Golden instance restricted to the benchmark's solution space: no
    /// reserve, equal-length windows, unrestricted type count.
    fn benchmark_instance(single: bool) -> crate::model::Instance {
        let mut inst = golden_instance();
        inst.templates.retain(|t| !t.is_reserve);
        inst.gamma = inst.templates.len() as u32;
        if single {
            inst.scenarios.truncate(1);
        }
        inst
    }

    #[test]
    fn rejects_rostering_constraints_and_reserves() {
        let mut inst = benchmark_instance(true);
        inst.rostering_constraints.push(crate::model::RosteringConstraint {
            label: "x".into(),
            coefficients: vec![],
            rhs: 0.0,
        });
        assert!(matches!(
            solve_benchmark(&inst, &BenchmarkConfig::default()),
            Err(SolveError::UnsupportedByBenchmark(_))
        ));

        let inst = golden_instance(); // contains the reserve
        assert!(matches!(
            solve_benchmark(&inst, &BenchmarkConfig::default()),
            Err(SolveError::UnsupportedByBenchmark(_))
        ));

        let mut inst = benchmark_instance(true);
        inst.gamma = 1;
        assert!(matches!(
            solve_benchmark(&inst, &BenchmarkConfig::default()),
            Err(SolveError::UnsupportedByBenchmark(_))
        ));
    }

    #[test]
    fn single_scenario_lp_matches_extensive_relaxation() {
        let inst = benchmark_instance(true);
        let outcome = solve_benchmark(&inst, &BenchmarkConfig::default()).unwrap();
        let lp = solve_extensive_lp(&inst).unwrap();
        assert!(
            (outcome.lp_bound - lp.objective).abs() <= 1e-6 * (1.0 + lp.objective.abs()),
            "benchmark LP {} vs extensive LP {}",
            outcome.lp_bound,
            lp.objective
        );
        assert!(outcome.report.ub >= outcome.lp_bound - 1e-6);
    }

    #[test]
    fn two_scenarios_produce_feasible_bundles() {
        let inst = benchmark_instance(false);
        let outcome = solve_benchmark(&inst, &BenchmarkConfig::default()).unwrap();
        // Every task of every scenario is covered.
        for (s, scenario) in inst.scenarios.iter().enumerate() {
            let chosen = &outcome.report.scenarios[s].chosen;
            for task in &scenario.tasks {
                assert!(
                    chosen.iter().any(|(_, tasks)| tasks.contains(&task.id)),
                    "task {} uncovered in scenario {s}",
                    task.id
                );
            }
        }
        assert!(outcome.report.ub.is_finite());
    }

    #[test]
    fn source_restriction_preserves_lp_value() {
        let inst = benchmark_instance(false);
        let restricted = solve_benchmark(&inst, &BenchmarkConfig::default()).unwrap();
        let free = solve_benchmark(
            &inst,
            &BenchmarkConfig {
                restrict_source_to_first: false,
                ..BenchmarkConfig::default()
            },
        )
        .unwrap();
        assert!(
            (restricted.lp_bound - free.lp_bound).abs()
                <= 1e-6 * (1.0 + free.lp_bound.abs()),
            "restricted {} vs free {}",
            restricted.lp_bound,
            free.lp_bound
        );
    }

    #[test]
    fn zero_task_scenarios_cost_nothing() {
        let mut inst = benchmark_instance(true);
        inst.scenarios[0].tasks.clear();
        let outcome = solve_benchmark(&inst, &BenchmarkConfig::default()).unwrap();
        assert_eq!(outcome.report.ub, 0.0);
        assert_eq!(outcome.report.portfolio.total_templates(), 0);
    }

    #[test]
    fn window_compatibility_rejects_overlong_bundles() {
        let inst = benchmark_instance(false);
        let cat = WindowCatalogue::build(&inst).unwrap();
        let s0 = &inst.scenarios[0];
        let early = duty_of(&inst, s0, "T1", &["A", "B"]);
        let late = duty_of(&inst, s0, "T2", &["E", "F"]);
        assert!(duties_window_compatible(cat.length, &early, &late));
        let mut too_late = late.clone();
        too_late.start_time += 400;
        too_late.end_time += 400;
        assert!(!duties_window_compatible(cat.length, &early, &too_late));
    }
}
