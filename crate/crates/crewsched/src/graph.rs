//! Per (template, scenario) pricing networks: a DAG over the tasks that fit
//! the template window, with arcs for every feasible connection and
//! source/sink nodes modelling departure from and arrival at the crew base.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::model::{Instance, Minutes, Scenario, Task, TemplateType};

/// Index into `DutyNetwork::tasks`.
pub type NodeIdx = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub from: NodeIdx,
    pub to: NodeIdx,
    pub idle: Minutes,
    /// Idle gap long enough, at a canteen station: taking this arc ends a
    /// work stretch.
    pub break_eligible: bool,
    pub canteen: bool,
}

/// Directed acyclic pricing network for one template window in one scenario.
/// Nodes are tasks ordered by start time; arcs are feasible connections.
#[derive(Debug, Clone)]
pub struct DutyNetwork {
    /// Tasks inside the template window, sorted by (start, id).
    pub tasks: Vec<Task>,
    /// Connection arcs between task nodes, grouped by source node.
    pub arcs_out: Vec<Vec<Arc>>,
    /// Task nodes reachable directly from the crew base.
    pub source_arcs: Vec<NodeIdx>,
    /// Task nodes that can return directly to the crew base.
    pub sink_arcs: Vec<NodeIdx>,
    pub earliest_start: Minutes,
    pub latest_end: Minutes,
}

/// True iff task `b` can directly follow task `a` in one duty.
pub fn connectable(instance: &Instance, a: &Task, b: &Task) -> bool {
    if a.to_station != b.from_station || b.start_time < a.end_time {
        return false;
    }
    if a.rolling_stock != b.rolling_stock && b.start_time - a.end_time < instance.min_transition {
        return false;
    }
    true
}

/// Builds the pricing network for one template in one scenario. Only window
/// placement depends on the template, so networks can be cached per window.
pub fn build_network(instance: &Instance, template: &TemplateType, scenario: &Scenario) -> DutyNetwork {
    build_for_window(instance, template.earliest_start, template.latest_end, scenario)
}

fn build_for_window(
    instance: &Instance,
    earliest_start: Minutes,
    latest_end: Minutes,
    scenario: &Scenario,
) -> DutyNetwork {
    let mut tasks: Vec<Task> = scenario
        .tasks
        .iter()
        .filter(|t| {
            t.start_time - instance.check_in >= earliest_start
                && t.end_time + instance.check_out <= latest_end
        })
        .cloned()
        .collect();
    tasks.sort_by(|a, b| (a.start_time, &a.id).cmp(&(b.start_time, &b.id)));

    let mut arcs_out: Vec<Vec<Arc>> = vec![Vec::new(); tasks.len()];
    for i in 0..tasks.len() {
        for j in 0..tasks.len() {
            if i == j {
                continue;
            }
            let (a, b) = (&tasks[i], &tasks[j]);
            if connectable(instance, a, b) {
                let idle = b.start_time - a.end_time;
                let canteen = instance
                    .station(&a.to_station)
                    .map(|s| s.has_canteen)
                    .unwrap_or(false);
                arcs_out[i].push(Arc {
                    from: i,
                    to: j,
                    idle,
                    break_eligible: canteen && idle >= instance.meal_break_min,
                    canteen,
                });
            }
        }
    }
    let source_arcs = tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.from_station == instance.crew_base)
        .map(|(i, _)| i)
        .collect();
    let sink_arcs = tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.to_station == instance.crew_base)
        .map(|(i, _)| i)
        .collect();
    DutyNetwork {
        tasks,
        arcs_out,
        source_arcs,
        sink_arcs,
        earliest_start,
        latest_end,
    }
}

impl DutyNetwork {
    pub fn n_arcs(&self) -> usize {
        self.arcs_out.iter().map(Vec::len).sum()
    }

    /// Graphviz dump for debugging.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph duty_network {\n  source; sink;\n");
        for (i, t) in self.tasks.iter().enumerate() {
            let _ = writeln!(
                out,
                "  n{i} [label=\"{} {}->{} {}..{}\"];",
                t.id, t.from_station, t.to_station, t.start_time, t.end_time
            );
        }
        for &i in &self.source_arcs {
            let _ = writeln!(out, "  source -> n{i};");
        }
        for arcs in &self.arcs_out {
            for a in arcs {
                let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", a.from, a.to, a.idle);
            }
        }
        for &i in &self.sink_arcs {
            let _ = writeln!(out, "  n{i} -> sink;");
        }
        out.push_str("}\n");
        out
    }
}

/// An element of the working set at time t: either a task in execution or an
/// idle connection being waited out. Task nodes count as arcs of their own
/// duration; source/sink legs contribute no working time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActiveArc {
    TaskNode(NodeIdx),
    Connection { from: NodeIdx, to: NodeIdx },
}

/// All arcs whose traversal requires a crew member to work during [t, t+1].
pub fn arcs_active_at(network: &DutyNetwork, t: Minutes) -> Vec<ActiveArc> {
    let mut active = Vec::new();
    for (i, task) in network.tasks.iter().enumerate() {
        if task.start_time <= t && t + 1 <= task.end_time {
            active.push(ActiveArc::TaskNode(i));
        }
    }
    for arcs in &network.arcs_out {
        for a in arcs {
            let gap_start = network.tasks[a.from].end_time;
            let gap_end = network.tasks[a.to].start_time;
            if gap_start <= t && t + 1 <= gap_end {
                active.push(ActiveArc::Connection { from: a.from, to: a.to });
            }
        }
    }
    active
}

/// Cache of networks shared across templates with identical windows.
#[derive(Default)]
pub struct NetworkCache {
    by_window: HashMap<(String, Minutes, Minutes), std::sync::Arc<DutyNetwork>>,
}

impl NetworkCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &mut self,
        instance: &Instance,
        template: &TemplateType,
        scenario: &Scenario,
    ) -> std::sync::Arc<DutyNetwork> {
        let key = (
            scenario.id.0.clone(),
            template.earliest_start,
            template.latest_end,
        );
        self.by_window
            .entry(key)
            .or_insert_with(|| std::sync::Arc::new(build_network(instance, template, scenario)))
            .clone()
    }
}
