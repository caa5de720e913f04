//! Column pricing per (template, scenario): a labelling algorithm over the
//! duty network, run either as a fast heuristic (beam caps plus completion
//! bounds) or exactly (full dominance, no bounds) when optimality must be
//! certified.

use std::collections::HashSet;

use crate::graph::DutyNetwork;
use crate::model::{Duty, Instance, Minutes, Task, TemplateType};

/// Reduced-cost threshold below which a column counts as improving.
pub const TOL_RC: f64 = 1e-6;

/// Arc-decomposable pricing data for one (template, scenario) problem.
#[derive(Debug, Clone)]
pub struct PricingDuals {
    /// Dual of the template capacity row.
    pub theta: f64,
    /// Cover-row duals aligned with `DutyNetwork::tasks`.
    pub lambda: Vec<f64>,
    /// Weight on seconds worked; zero prices pure excess objectives,
    /// one prices the operational workload objective.
    pub length_weight: f64,
}

impl PricingDuals {
    pub fn excess(theta: f64, lambda: Vec<f64>) -> Self {
        PricingDuals {
            theta,
            lambda,
            length_weight: 0.0,
        }
    }

    /// Reduced cost of a finished duty under these duals.
    pub fn reduced_cost_of(&self, network: &DutyNetwork, duty: &Duty) -> f64 {
        let mut rc = self.length_weight * duty.length_cost - self.theta;
        for (i, task) in network.tasks.iter().enumerate() {
            if duty.covers(&task.id) {
                rc -= self.lambda[i];
            }
        }
        rc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedColumn {
    pub duty: Duty,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone)]
struct Label {
    node: usize,
    cost: f64,
    /// Duty start time (first departure minus check-in); fixes the length cap.
    start: Minutes,
    /// Start of the current work stretch.
    stretch_start: Minutes,
    pred: Option<usize>,
}

impl Label {
    fn stretch_at(&self, end: Minutes) -> Minutes {
        end - self.stretch_start
    }
    /// Larger is better: slack of the length cap with the checkout counted.
    fn length_slack_key(&self, max_len: Minutes) -> Minutes {
        max_len + self.start
    }
}

struct Labelling<'a> {
    instance: &'a Instance,
    network: &'a DutyNetwork,
    duals: &'a PricingDuals,
    arena: Vec<Label>,
    /// Arena indices per node, dominance-filtered.
    per_node: Vec<Vec<usize>>,
    /// Heuristic-mode beam width per node; `usize::MAX` disables the cap.
    beam: usize,
    /// Minimal completion cost to the sink (heuristic mode only).
    cost_to_sink: Option<Vec<f64>>,
    /// Minimal achievable final task end from each node.
    final_end: Option<Vec<Minutes>>,
}

impl<'a> Labelling<'a> {
    fn new(
        instance: &'a Instance,
        network: &'a DutyNetwork,
        duals: &'a PricingDuals,
        heuristic: bool,
        beam: usize,
    ) -> Self {
        let (cost_to_sink, final_end) = if heuristic {
            (
                Some(min_cost_to_sink(network, duals)),
                Some(min_final_end(network)),
            )
        } else {
            (None, None)
        };
        Labelling {
            instance,
            network,
            duals,
            arena: Vec::new(),
            per_node: vec![Vec::new(); network.tasks.len()],
            beam: if heuristic { beam } else { usize::MAX },
            cost_to_sink,
            final_end,
        }
    }

    fn node_cost(&self, node: usize) -> f64 {
        let task = &self.network.tasks[node];
        self.duals.length_weight * task.duration() as f64 * 60.0 - self.duals.lambda[node]
    }

    fn try_insert(&mut self, label: Label) {
        let task = &self.network.tasks[label.node];
        let end = task.end_time;
        if label.stretch_at(end) > self.instance.max_stretch_without_break {
            return;
        }
        let max_len = self.instance.max_duty_length.at(label.start);
        if end + self.instance.check_out - label.start > max_len {
            return;
        }
        if let Some(final_end) = &self.final_end {
            let reachable_end = final_end[label.node];
            if reachable_end == Minutes::MAX
                || reachable_end + self.instance.check_out - label.start > max_len
            {
                return;
            }
        }
        if let Some(cost_to_sink) = &self.cost_to_sink {
            if label.cost + cost_to_sink[label.node] >= -TOL_RC {
                return;
            }
        }

        // Dominance against resident labels at the node.
        let key = (
            label.cost,
            label.length_slack_key(max_len),
            label.stretch_at(end),
        );
        let node = label.node;
        let mut keep = true;
        self.per_node[node].retain(|&idx| {
            let other = &self.arena[idx];
            let other_key = (
                other.cost,
                other.length_slack_key(self.instance.max_duty_length.at(other.start)),
                other.stretch_at(end),
            );
            if other_key.0 <= key.0 + 1e-12 && other_key.1 >= key.1 && other_key.2 <= key.2 {
                keep = false; // resident dominates (or equals) the candidate
            }
            // Candidate strictly dominates the resident.
            !(keep
                && key.0 <= other_key.0 + 1e-12
                && key.1 >= other_key.1
                && key.2 <= other_key.2)
        });
        if !keep {
            return;
        }
        let idx = self.arena.len();
        self.arena.push(label);
        self.per_node[node].push(idx);
    }

    fn run(&mut self) -> Vec<(usize, f64)> {
        // Source labels.
        for &k in &self.network.source_arcs {
            let task = &self.network.tasks[k];
            let start = task.start_time - self.instance.check_in;
            let cost = self.duals.length_weight
                * (self.instance.check_in + self.instance.check_out) as f64
                * 60.0
                - self.duals.theta
                + self.node_cost(k);
            self.try_insert(Label {
                node: k,
                cost,
                start,
                stretch_start: start,
                pred: None,
            });
        }

        let sink_nodes: HashSet<usize> = self.network.sink_arcs.iter().copied().collect();
        let mut completions: Vec<(usize, f64)> = Vec::new();

        for node in 0..self.network.tasks.len() {
            // Finalize this node's labels before extending them.
            if self.beam != usize::MAX && self.per_node[node].len() > self.beam {
                let arena = &self.arena;
                self.per_node[node].sort_by(|&a, &b| arena[a].cost.total_cmp(&arena[b].cost));
                self.per_node[node].truncate(self.beam);
            }
            let labels = self.per_node[node].clone();
            let arcs = self.network.arcs_out[node].clone();
            let task_end = self.network.tasks[node].end_time;

            for idx in labels {
                let label = self.arena[idx].clone();
                if sink_nodes.contains(&node)
                    && label.stretch_at(task_end) + self.instance.check_out
                        <= self.instance.max_stretch_without_break
                {
                    completions.push((idx, label.cost));
                }
                for arc in &arcs {
                    let next = &self.network.tasks[arc.to];
                    let stretch_start = if arc.break_eligible {
                        next.start_time
                    } else {
                        label.stretch_start
                    };
                    let cost = label.cost
                        + self.duals.length_weight * arc.idle as f64 * 60.0
                        + self.node_cost(arc.to);
                    self.try_insert(Label {
                        node: arc.to,
                        cost,
                        start: label.start,
                        stretch_start,
                        pred: Some(idx),
                    });
                }
            }
        }
        completions
    }

    fn rebuild_duty(&self, idx: usize, template: &TemplateType) -> Duty {
        let mut nodes = Vec::new();
        let mut cur = Some(idx);
        while let Some(i) = cur {
            nodes.push(self.arena[i].node);
            cur = self.arena[i].pred;
        }
        nodes.reverse();
        let tasks: Vec<&Task> = nodes.iter().map(|&n| &self.network.tasks[n]).collect();
        Duty::from_tasks(template, &tasks, self.instance.check_in, self.instance.check_out)
            .expect("labelling paths are nonempty")
    }
}

/// Backward DAG sweep: cheapest possible completion cost from each node to
/// the sink, ignoring resources. Admissible for pruning.
fn min_cost_to_sink(network: &DutyNetwork, duals: &PricingDuals) -> Vec<f64> {
    let n = network.tasks.len();
    let mut best = vec![f64::INFINITY; n];
    for &k in &network.sink_arcs {
        best[k] = 0.0;
    }
    for node in (0..n).rev() {
        for arc in &network.arcs_out[node] {
            if best[arc.to].is_finite() {
                let to_cost = duals.length_weight
                    * (arc.idle + network.tasks[arc.to].duration()) as f64
                    * 60.0
                    - duals.lambda[arc.to];
                best[node] = best[node].min(to_cost + best[arc.to]);
            }
        }
    }
    best
}

/// Earliest achievable final-task end time from each node, `Minutes::MAX`
/// when the sink is unreachable.
fn min_final_end(network: &DutyNetwork) -> Vec<Minutes> {
    let n = network.tasks.len();
    let mut best = vec![Minutes::MAX; n];
    for &k in &network.sink_arcs {
        best[k] = network.tasks[k].end_time;
    }
    for node in (0..n).rev() {
        for arc in &network.arcs_out[node] {
            best[node] = best[node].min(best[arc.to]);
        }
    }
    best
}

/// Default cap on labels kept per node in heuristic mode.
const HEURISTIC_BEAM: usize = 12;

/// Fast labelling pass; may miss the optimum. Returns at most `limit`
/// distinct columns with reduced cost below `-TOL_RC`, sorted ascending by
/// (reduced cost, canonical duty key).
pub fn price_heuristic(
    instance: &Instance,
    template: &TemplateType,
    network: &DutyNetwork,
    duals: &PricingDuals,
    limit: usize,
) -> Vec<PricedColumn> {
    let mut labelling = Labelling::new(instance, network, duals, true, HEURISTIC_BEAM);
    let completions = labelling.run();
    let mut columns: Vec<PricedColumn> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, cost) in completions {
        if cost < -TOL_RC {
            let duty = labelling.rebuild_duty(idx, template);
            if seen.insert(duty.key()) {
                columns.push(PricedColumn {
                    duty,
                    reduced_cost: cost,
                });
            }
        }
    }
    columns.sort_by(|a, b| {
        a.reduced_cost
            .total_cmp(&b.reduced_cost)
            .then_with(|| a.duty.key().cmp(&b.duty.key()))
    });
    columns.truncate(limit);
    columns
}

/// Exact pricing: full dominance labelling with no bound pruning. Returns
/// the minimum reduced-cost duty, or None when no duty prices below
/// `-TOL_RC`. The guarantee higher layers rely on for cut validity.
pub fn price_exact(
    instance: &Instance,
    template: &TemplateType,
    network: &DutyNetwork,
    duals: &PricingDuals,
) -> Option<PricedColumn> {
    let mut labelling = Labelling::new(instance, network, duals, false, usize::MAX);
    let completions = labelling.run();
    let best = completions
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))?;
    if best.1 >= -TOL_RC {
        return None;
    }
    Some(PricedColumn {
        duty: labelling.rebuild_duty(best.0, template),
        reduced_cost: best.1,
    })
}

/// Greedy task-disjointness filter. `columns` must arrive sorted ascending
/// by reduced cost with ties broken by canonical duty key; a candidate is
/// kept iff its task overlap with every kept column stays within
/// `(1 - theta_dis)` of its own task count.
pub fn filter_columns(
    columns: Vec<PricedColumn>,
    theta_dis: f64,
    limit: usize,
) -> Vec<PricedColumn> {
    let mut kept: Vec<PricedColumn> = Vec::new();
    let mut kept_sets: Vec<HashSet<&str>> = Vec::new();
    for col in &columns {
        if kept.len() >= limit {
            break;
        }
        let tasks: HashSet<&str> = col.duty.tasks.iter().map(|t| t.0.as_str()).collect();
        let allowed = (1.0 - theta_dis) * tasks.len() as f64;
        let ok = kept_sets
            .iter()
            .all(|k| tasks.iter().filter(|t| k.contains(*t)).count() as f64 <= allowed + 1e-12);
        if ok {
            kept_sets.push(tasks.clone());
            kept.push(col.clone());
        }
    }
    // kept_sets borrows from `columns`; drop before returning the clones.
    drop(kept_sets);
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_duties;
    use crate::graph::build_network;
    use crate::model::testutil::*;

    fn golden_net() -> (crate::model::Instance, TemplateType, DutyNetwork) {
        let inst = golden_instance();
        let template = inst.template(&tid("T1")).unwrap().clone();
        let net = build_network(&inst, &template, &inst.scenarios[0]);
        (inst, template, net)
    }

    fn enumerator_min(
        inst: &crate::model::Instance,
        template: &TemplateType,
        net: &DutyNetwork,
        duals: &PricingDuals,
    ) -> Option<(f64, Duty)> {
        enumerate_duties(inst, template, &inst.scenarios[0])
            .into_iter()
            .map(|d| (duals.reduced_cost_of(net, &d), d))
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.key().cmp(&b.1.key())))
    }

    #[test]
    fn zero_duals_price_nothing() {
        let (inst, template, net) = golden_net();
        let duals = PricingDuals::excess(0.0, vec![0.0; net.tasks.len()]);
        assert!(price_heuristic(&inst, &template, &net, &duals, 50).is_empty());
        assert!(price_exact(&inst, &template, &net, &duals).is_none());
    }

    #[test]
    fn exact_matches_enumerator_on_uniform_duals() {
        let (inst, template, net) = golden_net();
        let duals = PricingDuals::excess(0.0, vec![inst.excess_cost; net.tasks.len()]);
        let best = price_exact(&inst, &template, &net, &duals).unwrap();
        let oracle = enumerator_min(&inst, &template, &net, &duals).unwrap();
        assert!((best.reduced_cost - oracle.0).abs() < 1e-9);
        // Max-coverage duty: all six tasks.
        assert_eq!(best.duty.tasks.len(), 6);
    }

    #[test]
    fn exact_matches_enumerator_on_random_duals() {
        let (inst, template, net) = golden_net();
        // Deterministic pseudo-random fixtures.
        let mut state = 0x2545F4914F6CDD1Du64;
        for _ in 0..60 {
            let mut lambda = Vec::with_capacity(net.tasks.len());
            for _ in 0..net.tasks.len() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                lambda.push(((state >> 33) % 50_000) as f64);
            }
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let theta = -(((state >> 33) % 40_000) as f64);
            let duals = PricingDuals::excess(theta, lambda);
            let got = price_exact(&inst, &template, &net, &duals);
            let oracle = enumerator_min(&inst, &template, &net, &duals).unwrap();
            match got {
                Some(col) => {
                    assert!(
                        (col.reduced_cost - oracle.0).abs() < 1e-9,
                        "exact {} vs oracle {}",
                        col.reduced_cost,
                        oracle.0
                    );
                    let recomputed = duals.reduced_cost_of(&net, &col.duty);
                    assert!((recomputed - col.reduced_cost).abs() < 1e-9);
                }
                None => assert!(oracle.0 >= -TOL_RC, "missed column at {}", oracle.0),
            }
        }
    }

    #[test]
    fn huge_lambda_on_one_task_forces_coverage() {
        let (inst, template, net) = golden_net();
        let mut lambda = vec![0.0; net.tasks.len()];
        let target = net.tasks.iter().position(|t| t.id == kid("D")).unwrap();
        lambda[target] = 1e6;
        let duals = PricingDuals::excess(0.0, lambda);
        let best = price_exact(&inst, &template, &net, &duals).unwrap();
        assert!(best.duty.covers(&kid("D")));
    }

    #[test]
    fn heuristic_respects_limit_and_negativity() {
        let (inst, template, net) = golden_net();
        let duals = PricingDuals::excess(0.0, vec![inst.excess_cost; net.tasks.len()]);
        let cols = price_heuristic(&inst, &template, &net, &duals, 1);
        assert_eq!(cols.len(), 1);
        let all = price_heuristic(&inst, &template, &net, &duals, 50);
        assert!(all.iter().all(|c| c.reduced_cost < -TOL_RC));
        // Heuristic output contains the enumerator's best duty here.
        let oracle = enumerator_min(&inst, &template, &net, &duals).unwrap();
        assert!(all.iter().any(|c| (c.reduced_cost - oracle.0).abs() < 1e-9));
    }

    #[test]
    fn all_emitted_duties_are_rule_feasible() {
        let (inst, template, net) = golden_net();
        let duals = PricingDuals::excess(-5_000.0, vec![20_000.0; net.tasks.len()]);
        for col in price_heuristic(&inst, &template, &net, &duals, 50) {
            let v = crate::model::duty_feasible(&inst, &inst.scenarios[0], &col.duty).unwrap();
            assert!(v.is_empty(), "{v:?}");
        }
    }

    #[test]
    fn dominance_is_only_an_optimization() {
        // With beam width forced to MAX and dominance disabled there is no
        // separate code path, so approximate the A/B check by comparing the
        // exact labelling against raw enumeration across dual fixtures.
        let (inst, template, net) = golden_net();
        for seed in 0..20u64 {
            let mut lambda = Vec::new();
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
            for _ in 0..net.tasks.len() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                lambda.push(((state >> 34) % 30_000) as f64);
            }
            let duals = PricingDuals::excess(-1_000.0, lambda);
            let got = price_exact(&inst, &template, &net, &duals).map(|c| c.reduced_cost);
            let oracle = enumerator_min(&inst, &template, &net, &duals).unwrap().0;
            match got {
                Some(rc) => assert!((rc - oracle).abs() < 1e-9),
                None => assert!(oracle >= -TOL_RC),
            }
        }
    }

    #[test]
    fn filter_keeps_one_of_identical_columns() {
        let (inst, _, net) = golden_net();
        let template = inst.template(&tid("T1")).unwrap();
        let duals = PricingDuals::excess(0.0, vec![inst.excess_cost; net.tasks.len()]);
        let col = price_heuristic(&inst, template, &net, &duals, 1).remove(0);
        let cols = vec![col.clone(), col.clone(), col.clone()];
        assert_eq!(filter_columns(cols, 0.5, 10).len(), 1);
    }

    #[test]
    fn filter_disjoint_columns_all_kept_within_limit() {
        let inst = golden_instance();
        let scenario = &inst.scenarios[0];
        let legs = [["A", "B"], ["C", "D"], ["E", "F"]];
        let cols: Vec<PricedColumn> = legs
            .iter()
            .map(|leg| PricedColumn {
                duty: duty_of(&inst, scenario, "T1", leg),
                reduced_cost: -1.0,
            })
            .collect();
        assert_eq!(filter_columns(cols.clone(), 0.5, 10).len(), 3);
        assert_eq!(filter_columns(cols, 0.5, 2).len(), 2);
    }

    #[test]
    fn filter_rejects_sixty_percent_overlap_at_half_disjointness() {
        let inst = golden_instance();
        let scenario = &inst.scenarios[0];
        let kept = PricedColumn {
            duty: duty_of(&inst, scenario, "T1", &["A", "B", "C", "D", "E", "F"]),
            reduced_cost: -2.0,
        };
        // Candidate sharing 3 of its 5 task ids: overlap 0.6 > 0.5.
        let mut cand = duty_of(&inst, scenario, "T1", &["A", "B", "C", "D"]);
        cand.tasks = vec![kid("A"), kid("B"), kid("C"), kid("G"), kid("H")];
        let cols = vec![
            kept,
            PricedColumn {
                duty: cand,
                reduced_cost: -1.0,
            },
        ];
        assert_eq!(filter_columns(cols, 0.5, 10).len(), 1);
    }
}
