//! Domain types for tasks, templates, duties and scenarios, plus the rules
//! that decide which task sequences form a feasible day of work.
//!
//! All times are integral minutes from midnight of the operating day; work
//! running past midnight uses values above 1440.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Minutes from midnight of the operating day. Values > 1440 denote the next day.
pub type Minutes = i64;

pub const EARLY_START_CUTOFF: Minutes = 360;
pub const LATE_END_CUTOFF: Minutes = 1440;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StationId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemplateId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScenarioId(pub String);

macro_rules! impl_id_display {
    ($($ty:ty),*) => {$(
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    )*};
}
impl_id_display!(TaskId, StationId, TemplateId, ScenarioId);

/// A scheduled train trip: the atomic unit of work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub start_time: Minutes,
    pub end_time: Minutes,
    pub from_station: StationId,
    pub to_station: StationId,
    pub rolling_stock: String,
}

impl Task {
    pub fn duration(&self) -> Minutes {
        self.end_time - self.start_time
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Station {
    pub id: StationId,
    pub has_canteen: bool,
    pub is_crew_base: bool,
}

/// A placeholder for a duty: a crew base plus the time window during which a
/// crew member of that base can be called upon to work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateType {
    pub id: TemplateId,
    pub crew_base: StationId,
    pub earliest_start: Minutes,
    pub latest_end: Minutes,
    pub is_reserve: bool,
    pub cost: f64,
}

impl TemplateType {
    /// Starts before 06:00.
    pub fn is_early(&self) -> bool {
        self.earliest_start < EARLY_START_CUTOFF
    }

    /// Ends after 24:00.
    pub fn is_late(&self) -> bool {
        self.latest_end > LATE_END_CUTOFF
    }

    pub fn window_contains(&self, start: Minutes, end: Minutes) -> bool {
        self.earliest_start <= start && end <= self.latest_end
    }
}

/// Canonical duty identity: template plus the ordered task sequence.
pub type DutyKey = (TemplateId, Vec<TaskId>);

/// An ordered, rule-feasible sequence of tasks forming one day of work,
/// bound to a template type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duty {
    pub template: TemplateId,
    pub tasks: Vec<TaskId>,
    /// First departure minus check-in allowance.
    pub start_time: Minutes,
    /// Last arrival plus check-out allowance.
    pub end_time: Minutes,
    /// Station where the duty starts and ends.
    pub base: StationId,
    /// Seconds worked; the variable-cost coefficient in the operational phase.
    pub length_cost: f64,
}

impl Duty {
    /// Assembles a duty from resolved tasks; no feasibility checking beyond
    /// requiring a nonempty sequence.
    pub fn from_tasks(
        template: &TemplateType,
        tasks: &[&Task],
        check_in: Minutes,
        check_out: Minutes,
    ) -> Result<Duty, ModelError> {
        let first = tasks.first().ok_or(ModelError::EmptyDuty)?;
        let last = tasks.last().expect("nonempty");
        let start_time = first.start_time - check_in;
        let end_time = last.end_time + check_out;
        Ok(Duty {
            template: template.id.clone(),
            tasks: tasks.iter().map(|t| t.id.clone()).collect(),
            start_time,
            end_time,
            base: first.from_station.clone(),
            length_cost: (end_time - start_time) as f64 * 60.0,
        })
    }

    pub fn key(&self) -> DutyKey {
        (self.template.clone(), self.tasks.clone())
    }

    pub fn length(&self) -> Minutes {
        self.end_time - self.start_time
    }

    pub fn covers(&self, task: &TaskId) -> bool {
        self.tasks.contains(task)
    }
}

/// One possible realisation of the day's task set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub tasks: Vec<Task>,
}

impl Scenario {
    pub fn task(&self, id: &TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| &t.id == id)
    }

    /// Earliest task start and latest task end, or None when empty.
    pub fn span(&self) -> Option<(Minutes, Minutes)> {
        let lo = self.tasks.iter().map(|t| t.start_time).min()?;
        let hi = self.tasks.iter().map(|t| t.end_time).max()?;
        Some((lo, hi))
    }
}

/// One linear template rostering condition `sum_p e_p * y_p <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosteringConstraint {
    pub label: String,
    /// Coefficient per template id; absent templates contribute zero.
    pub coefficients: Vec<(TemplateId, f64)>,
    pub rhs: f64,
}

impl RosteringConstraint {
    pub fn coefficient(&self, template: &TemplateId) -> f64 {
        self.coefficients
            .iter()
            .find(|(id, _)| id == template)
            .map(|(_, c)| *c)
            .unwrap_or(0.0)
    }
}

/// Maximum duty length as a step function of the duty start time: the entry
/// with the largest `from_minute <= start` applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxDutyLength {
    /// Sorted ascending by `from_minute`; first entry must cover minute 0.
    pub steps: Vec<(Minutes, Minutes)>,
}

impl Default for MaxDutyLength {
    fn default() -> Self {
        MaxDutyLength {
            steps: vec![(0, 540)],
        }
    }
}

impl MaxDutyLength {
    pub fn constant(max: Minutes) -> Self {
        MaxDutyLength {
            steps: vec![(0, max)],
        }
    }

    pub fn at(&self, start: Minutes) -> Minutes {
        let mut current = self.steps.first().map(|&(_, m)| m).unwrap_or(540);
        for &(from, max) in &self.steps {
            if from <= start {
                current = max;
            } else {
                break;
            }
        }
        current
    }

    pub fn max_value(&self) -> Minutes {
        self.steps.iter().map(|&(_, m)| m).max().unwrap_or(540)
    }
}

/// A full problem instance for the tactical planning phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub crew_base: StationId,
    pub stations: Vec<Station>,
    pub templates: Vec<TemplateType>,
    pub scenarios: Vec<Scenario>,
    pub rostering_constraints: Vec<RosteringConstraint>,
    /// Maximum number of distinct template types in a portfolio.
    pub gamma: u32,
    /// Upper bound on the count of any single template type.
    pub capacity_bound: u32,
    /// Penalty cost of one excess duty.
    pub excess_cost: f64,
    /// Minimum connection time when consecutive tasks use different rolling stock.
    pub min_transition: Minutes,
    pub max_duty_length: MaxDutyLength,
    pub meal_break_min: Minutes,
    pub max_stretch_without_break: Minutes,
    /// Check-in allowance before the first task.
    pub check_in: Minutes,
    /// Check-out allowance after the last task.
    pub check_out: Minutes,
}

impl Instance {
    pub fn station(&self, id: &StationId) -> Option<&Station> {
        self.stations.iter().find(|s| &s.id == id)
    }

    pub fn template(&self, id: &TemplateId) -> Option<&TemplateType> {
        self.templates.iter().find(|t| &t.id == id)
    }

    pub fn scenario(&self, id: &ScenarioId) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| &s.id == id)
    }

    /// Validates the structural invariants that do not require solving.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.gamma < 1 {
            return Err(ModelError::Invariant("gamma must be at least 1".into()));
        }
        if self.capacity_bound < 1 {
            return Err(ModelError::Invariant("capacity bound must be positive".into()));
        }
        let mut station_ids = HashMap::new();
        for s in &self.stations {
            if station_ids.insert(&s.id, ()).is_some() {
                return Err(ModelError::Invariant(format!("duplicate station id {}", s.id)));
            }
        }
        if self.station(&self.crew_base).map(|s| s.is_crew_base) != Some(true) {
            return Err(ModelError::Invariant(format!(
                "crew base {} missing or not flagged as a base",
                self.crew_base
            )));
        }
        let mut max_cost: f64 = 0.0;
        let mut template_ids = HashMap::new();
        for t in &self.templates {
            if template_ids.insert(&t.id, ()).is_some() {
                return Err(ModelError::Invariant(format!("duplicate template id {}", t.id)));
            }
            if t.earliest_start >= t.latest_end {
                return Err(ModelError::Invariant(format!(
                    "template {} window order: {} >= {}",
                    t.id, t.earliest_start, t.latest_end
                )));
            }
            if self.station(&t.crew_base).is_none() {
                return Err(ModelError::Invariant(format!(
                    "template {} references unknown station {}",
                    t.id, t.crew_base
                )));
            }
            max_cost = max_cost.max(t.cost);
        }
        if !self.templates.is_empty() && self.excess_cost <= max_cost {
            return Err(ModelError::Invariant(format!(
                "excess cost {} must exceed the maximum template cost {}",
                self.excess_cost, max_cost
            )));
        }
        let mut scenario_ids = HashMap::new();
        for s in &self.scenarios {
            if scenario_ids.insert(&s.id, ()).is_some() {
                return Err(ModelError::Invariant(format!("duplicate scenario id {}", s.id)));
            }
            let mut task_ids = HashMap::new();
            for t in &s.tasks {
                if task_ids.insert(&t.id, ()).is_some() {
                    return Err(ModelError::DuplicateTaskId {
                        scenario: s.id.clone(),
                        task: t.id.clone(),
                    });
                }
                if t.start_time >= t.end_time {
                    return Err(ModelError::TaskTimeOrder {
                        task: t.id.clone(),
                        start: t.start_time,
                        end: t.end_time,
                    });
                }
                for st in [&t.from_station, &t.to_station] {
                    if self.station(st).is_none() {
                        return Err(ModelError::Invariant(format!(
                            "task {} references unknown station {}",
                            t.id, st
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reserve-template windows must span the whole operating day: every task
    /// of every scenario fits. Checked separately because it needs scenarios.
    pub fn validate_reserve_windows(&self) -> Result<(), ModelError> {
        let span = self
            .scenarios
            .iter()
            .filter_map(|s| s.span())
            .fold(None, |acc: Option<(Minutes, Minutes)>, (lo, hi)| match acc {
                None => Some((lo, hi)),
                Some((a, b)) => Some((a.min(lo), b.max(hi))),
            });
        if let Some((lo, hi)) = span {
            for t in &self.templates {
                if t.is_reserve && !(t.earliest_start <= lo - self.check_in && hi + self.check_out <= t.latest_end)
                {
                    return Err(ModelError::Invariant(format!(
                        "reserve template {} does not span the operating day",
                        t.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One named way a candidate sequence can break the duty rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// Consecutive tasks do not chain stations, or overlap in time.
    StationChain { position: usize },
    /// Rolling stock changes without the minimum transition time.
    Transition { position: usize },
    /// Sequence does not start and end at the crew base.
    Base,
    /// Duty exceeds the maximum length for its start time.
    Length,
    /// A work stretch exceeds the maximum time without a qualifying meal break.
    Break,
    /// Duty does not fit inside the template window.
    Window,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StationChain { position } => write!(f, "station-chain@{position}"),
            Violation::Transition { position } => write!(f, "transition@{position}"),
            Violation::Base => write!(f, "base"),
            Violation::Length => write!(f, "length"),
            Violation::Break => write!(f, "break"),
            Violation::Window => write!(f, "window"),
        }
    }
}

/// Checks every duty rule for `duty` against one scenario of the instance.
/// Returns the full violation list so callers can report all problems at once.
pub fn duty_feasible(
    instance: &Instance,
    scenario: &Scenario,
    duty: &Duty,
) -> Result<Vec<Violation>, ModelError> {
    let template = instance
        .template(&duty.template)
        .ok_or_else(|| ModelError::UnknownTemplate(duty.template.clone()))?;
    let mut tasks = Vec::with_capacity(duty.tasks.len());
    for id in &duty.tasks {
        let task = scenario
            .task(id)
            .ok_or_else(|| ModelError::UnknownTask(id.clone()))?;
        tasks.push(task);
    }
    if tasks.is_empty() {
        return Err(ModelError::EmptyDuty);
    }

    let mut violations = Vec::new();
    let first = tasks[0];
    let last = tasks[tasks.len() - 1];
    if first.from_station != instance.crew_base || last.to_station != instance.crew_base {
        violations.push(Violation::Base);
    }

    for (pos, pair) in tasks.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if a.to_station != b.from_station || b.start_time < a.end_time {
            violations.push(Violation::StationChain { position: pos });
            continue;
        }
        if a.rolling_stock != b.rolling_stock && b.start_time - a.end_time < instance.min_transition {
            violations.push(Violation::Transition { position: pos });
        }
    }

    let start = first.start_time - instance.check_in;
    let end = last.end_time + instance.check_out;
    if end - start > instance.max_duty_length.at(start) {
        violations.push(Violation::Length);
    }

    // Work stretches run from the duty start (or the end of a qualifying
    // break) to the start of the next qualifying break (or the duty end).
    let mut stretch_start = start;
    let mut stretch_ok = true;
    for pair in tasks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let gap = b.start_time - a.end_time;
        let canteen = instance
            .station(&a.to_station)
            .map(|s| s.has_canteen)
            .unwrap_or(false);
        if gap >= instance.meal_break_min && canteen {
            if a.end_time - stretch_start > instance.max_stretch_without_break {
                stretch_ok = false;
            }
            stretch_start = b.start_time;
        }
    }
    if end - stretch_start > instance.max_stretch_without_break {
        stretch_ok = false;
    }
    if !stretch_ok {
        violations.push(Violation::Break);
    }

    if !(template.crew_base == duty.base && template.window_contains(start, end)) {
        violations.push(Violation::Window);
    }

    Ok(violations)
}

/// True iff the duty sits at the template's base and inside its time window.
pub fn duty_fits_template(duty: &Duty, template: &TemplateType) -> bool {
    template.crew_base == duty.base && template.window_contains(duty.start_time, duty.end_time)
}

/// Average fraction of tasks shared between two scenarios, matching on
/// (start, end, from, to). Symmetrised by averaging both directions; zero
/// when either scenario is empty.
pub fn similarity_ratio(a: &Scenario, b: &Scenario) -> f64 {
    if a.tasks.is_empty() || b.tasks.is_empty() {
        return 0.0;
    }
    let signature = |t: &Task| {
        (
            t.start_time,
            t.end_time,
            t.from_station.clone(),
            t.to_station.clone(),
        )
    };
    let mut counts_b: HashMap<_, i64> = HashMap::new();
    for t in &b.tasks {
        *counts_b.entry(signature(t)).or_insert(0) += 1;
    }
    let mut counts_a: HashMap<_, i64> = HashMap::new();
    for t in &a.tasks {
        *counts_a.entry(signature(t)).or_insert(0) += 1;
    }
    let matched: i64 = counts_a
        .iter()
        .map(|(sig, na)| (*na).min(*counts_b.get(sig).unwrap_or(&0)))
        .sum();
    let ratio_a = matched as f64 / a.tasks.len() as f64;
    let ratio_b = matched as f64 / b.tasks.len() as f64;
    0.5 * (ratio_a + ratio_b)
}

#[cfg(test)]
pub mod testutil {
    //! Hand-built fixtures shared by the unit tests of several modules.

    use super::*;

    pub fn tid(s: &str) -> TemplateId {
        TemplateId(s.to_string())
    }
    pub fn kid(s: &str) -> TaskId {
        TaskId(s.to_string())
    }
    pub fn sid(s: &str) -> StationId {
        StationId(s.to_string())
    }

    pub fn task(
        id: &str,
        start: Minutes,
        end: Minutes,
        from: &str,
        to: &str,
        stock: &str,
    ) -> Task {
        Task {
            id: kid(id),
            start_time: start,
            end_time: end,
            from_station: sid(from),
            to_station: sid(to),
            rolling_stock: stock.to_string(),
        }
    }

    pub fn base_instance(templates: Vec<TemplateType>, scenarios: Vec<Scenario>) -> Instance {
        Instance {
            crew_base: sid("CB"),
            stations: vec![
                Station { id: sid("CB"), has_canteen: true, is_crew_base: true },
                Station { id: sid("X"), has_canteen: true, is_crew_base: false },
                Station { id: sid("Y"), has_canteen: false, is_crew_base: false },
            ],
            templates,
            scenarios,
            rostering_constraints: Vec::new(),
            gamma: 3,
            capacity_bound: 8,
            excess_cost: 40_000.0,
            min_transition: 10,
            max_duty_length: MaxDutyLength::default(),
            meal_break_min: 30,
            max_stretch_without_break: 330,
            check_in: 0,
            check_out: 0,
        }
    }

    /// Two chainable tasks and one wide template.
    pub fn tiny_instance() -> Instance {
        let template = TemplateType {
            id: tid("T"),
            crew_base: sid("CB"),
            earliest_start: 360,
            latest_end: 930,
            is_reserve: false,
            cost: 10_000.0,
        };
        let scenario = Scenario {
            id: ScenarioId("s1".into()),
            tasks: vec![
                task("A", 480, 540, "CB", "X", "u1"),
                task("B", 550, 600, "X", "CB", "u1"),
            ],
        };
        base_instance(vec![template], vec![scenario])
    }

    /// Six tasks (three out-and-back legs), two scenarios, three templates
    /// including a full-day reserve. Small enough to enumerate by hand.
    pub fn golden_instance() -> Instance {
        let templates = vec![
            TemplateType {
                id: tid("T1"),
                crew_base: sid("CB"),
                earliest_start: 450,
                latest_end: 1020,
                is_reserve: false,
                cost: 10_000.0,
            },
            TemplateType {
                id: tid("T2"),
                crew_base: sid("CB"),
                earliest_start: 600,
                latest_end: 1170,
                is_reserve: false,
                cost: 10_000.0,
            },
            TemplateType {
                id: tid("R"),
                crew_base: sid("CB"),
                earliest_start: 0,
                latest_end: 1440,
                is_reserve: true,
                cost: 10_000.0,
            },
        ];
        let s1 = Scenario {
            id: ScenarioId("s1".into()),
            tasks: vec![
                task("A", 480, 540, "CB", "X", "u1"),
                task("B", 550, 610, "X", "CB", "u1"),
                task("C", 620, 680, "CB", "Y", "u2"),
                task("D", 690, 750, "Y", "CB", "u2"),
                task("E", 800, 860, "CB", "X", "u3"),
                task("F", 870, 930, "X", "CB", "u3"),
            ],
        };
        let s2 = Scenario {
            id: ScenarioId("s2".into()),
            tasks: vec![
                task("A", 480, 540, "CB", "X", "u1"),
                task("B", 550, 610, "X", "CB", "u1"),
                task("C", 620, 680, "CB", "Y", "u2"),
                task("D", 690, 750, "Y", "CB", "u2"),
                task("E", 830, 890, "CB", "X", "u3"),
                task("F", 900, 960, "X", "CB", "u3"),
            ],
        };
        base_instance(templates, vec![s1, s2])
    }

    pub fn duty_of(instance: &Instance, scenario: &Scenario, template: &str, ids: &[&str]) -> Duty {
        let template = instance.template(&tid(template)).unwrap();
        let tasks: Vec<&Task> = ids.iter().map(|i| scenario.task(&kid(i)).unwrap()).collect();
        Duty::from_tasks(template, &tasks, instance.check_in, instance.check_out).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn short_duty_with_all_rules_slack_is_feasible() {
        let inst = tiny_instance();
        let scenario = &inst.scenarios[0];
        let duty = duty_of(&inst, scenario, "T", &["A", "B"]);
        let violations = duty_feasible(&inst, scenario, &duty).unwrap();
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn tight_transition_with_different_stock_violates() {
        let mut inst = tiny_instance();
        inst.scenarios[0].tasks[1] = task("B", 541, 600, "X", "CB", "u2");
        let scenario = inst.scenarios[0].clone();
        let duty = duty_of(&inst, &scenario, "T", &["A", "B"]);
        let violations = duty_feasible(&inst, &scenario, &duty).unwrap();
        assert_eq!(violations, vec![Violation::Transition { position: 0 }]);
    }

    #[test]
    fn overlong_duty_violates_length_only() {
        let mut inst = tiny_instance();
        inst.templates[0].latest_end = 1100;
        // 480 to 1050 is 9.5 hours against a 9 hour cap.
        inst.scenarios[0].tasks[1] = task("B", 1020, 1050, "X", "CB", "u1");
        let scenario = inst.scenarios[0].clone();
        let duty = duty_of(&inst, &scenario, "T", &["A", "B"]);
        let violations = duty_feasible(&inst, &scenario, &duty).unwrap();
        assert_eq!(violations, vec![Violation::Length]);
    }

    #[test]
    fn missing_break_reported() {
        let mut inst = tiny_instance();
        // One long stretch: 480..900 with only a short gap at X.
        inst.scenarios[0].tasks = vec![
            task("A", 480, 700, "CB", "X", "u1"),
            task("B", 710, 900, "X", "CB", "u1"),
        ];
        let scenario = inst.scenarios[0].clone();
        let duty = duty_of(&inst, &scenario, "T", &["A", "B"]);
        let violations = duty_feasible(&inst, &scenario, &duty).unwrap();
        assert_eq!(violations, vec![Violation::Break]);
    }

    #[test]
    fn qualifying_break_splits_stretches() {
        let mut inst = tiny_instance();
        inst.templates[0].latest_end = 1100;
        // 480..1010 = 530 total, split by a 40 minute canteen break at X.
        inst.scenarios[0].tasks = vec![
            task("A", 480, 700, "CB", "X", "u1"),
            task("B", 740, 1010, "X", "CB", "u1"),
        ];
        let scenario = inst.scenarios[0].clone();
        let duty = duty_of(&inst, &scenario, "T", &["A", "B"]);
        let violations = duty_feasible(&inst, &scenario, &duty).unwrap();
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn unknown_task_is_an_input_error() {
        let inst = tiny_instance();
        let scenario = &inst.scenarios[0];
        let mut duty = duty_of(&inst, scenario, "T", &["A", "B"]);
        duty.tasks.push(kid("nope"));
        assert!(matches!(
            duty_feasible(&inst, scenario, &duty),
            Err(ModelError::UnknownTask(_))
        ));
    }

    #[test]
    fn fits_template_window_boundaries() {
        let template = TemplateType {
            id: tid("T"),
            crew_base: sid("CB"),
            earliest_start: 450,
            latest_end: 1020,
            is_reserve: false,
            cost: 1.0,
        };
        let mut duty = Duty {
            template: tid("T"),
            tasks: vec![],
            start_time: 480,
            end_time: 1020,
            base: sid("CB"),
            length_cost: 0.0,
        };
        assert!(duty_fits_template(&duty, &template));
        duty.end_time = 1021; // one-minute overrun
        assert!(!duty_fits_template(&duty, &template));
    }

    #[test]
    fn reserve_template_admits_any_feasible_duty_of_its_base() {
        let inst = golden_instance();
        let reserve = inst.template(&tid("R")).unwrap();
        let scenario = &inst.scenarios[0];
        let duty = duty_of(&inst, scenario, "R", &["A", "B", "C", "D", "E", "F"]);
        assert!(duty_fits_template(&duty, reserve));
        assert!(duty_feasible(&inst, scenario, &duty).unwrap().is_empty());
    }

    #[test]
    fn similarity_identical_disjoint_and_half() {
        let inst = golden_instance();
        let s1 = &inst.scenarios[0];
        assert_eq!(similarity_ratio(s1, s1), 1.0);
        let disjoint = Scenario {
            id: ScenarioId("d".into()),
            tasks: vec![task("Z", 100, 200, "CB", "X", "u9")],
        };
        assert_eq!(similarity_ratio(s1, &disjoint), 0.0);

        let a = Scenario {
            id: ScenarioId("a".into()),
            tasks: vec![
                task("t1", 100, 200, "CB", "X", "u1"),
                task("t2", 300, 400, "X", "CB", "u1"),
            ],
        };
        let b = Scenario {
            id: ScenarioId("b".into()),
            tasks: vec![
                task("t2", 300, 400, "X", "CB", "u1"),
                task("t3", 500, 600, "CB", "Y", "u2"),
            ],
        };
        assert_eq!(similarity_ratio(&a, &b), 0.5);
        assert_eq!(similarity_ratio(&b, &a), 0.5);
    }

    #[test]
    fn similarity_empty_is_zero() {
        let empty = Scenario { id: ScenarioId("e".into()), tasks: vec![] };
        let inst = golden_instance();
        assert_eq!(similarity_ratio(&empty, &inst.scenarios[0]), 0.0);
        assert_eq!(similarity_ratio(&empty, &empty), 0.0);
    }

    #[test]
    fn validate_rejects_bad_instances() {
        let mut inst = golden_instance();
        inst.scenarios[0].tasks[0].end_time = 400; // start 480 >= end 400
        assert!(matches!(
            inst.validate(),
            Err(ModelError::TaskTimeOrder { .. })
        ));

        let mut inst = golden_instance();
        let dup = inst.scenarios[0].tasks[0].clone();
        inst.scenarios[0].tasks.push(dup);
        assert!(matches!(
            inst.validate(),
            Err(ModelError::DuplicateTaskId { .. })
        ));

        let mut inst = golden_instance();
        inst.excess_cost = 5_000.0;
        assert!(inst.validate().is_err());

        assert!(golden_instance().validate().is_ok());
        assert!(golden_instance().validate_reserve_windows().is_ok());
    }

    #[test]
    fn max_duty_length_step_function() {
        let steps = MaxDutyLength {
            steps: vec![(0, 540), (840, 480)],
        };
        assert_eq!(steps.at(0), 540);
        assert_eq!(steps.at(839), 540);
        assert_eq!(steps.at(840), 480);
        assert_eq!(steps.at(2000), 480);
        assert_eq!(steps.max_value(), 540);
    }

    #[test]
    fn template_early_late_flags() {
        let mut t = TemplateType {
            id: tid("T"),
            crew_base: sid("CB"),
            earliest_start: 360,
            latest_end: 1440,
            is_reserve: false,
            cost: 1.0,
        };
        assert!(!t.is_early() && !t.is_late());
        t.earliest_start = 359;
        assert!(t.is_early());
        t.latest_end = 1441;
        assert!(t.is_late());
    }
}
