//! Seeded synthetic instances: out-and-back trip patterns from a single crew
//! base, perturbed scenario to scenario, standing in for proprietary
//! historical planning data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benders::flow::build_flow_network;
use crate::error::SolveError;
use crate::model::{
    duty_feasible, Duty, Instance, MaxDutyLength, Minutes, Scenario, ScenarioId, Station,
    StationId, Task, TaskId, TemplateId, TemplateType,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Stations other than the crew base.
    pub n_stations: usize,
    /// Target tasks per scenario; two per out-and-back leg.
    pub n_tasks: usize,
    pub n_scenarios: usize,
    /// Per-leg probability of spawning an extra leg in the next scenario.
    pub add_rate: f64,
    /// Per-leg probability of dropping out of the next scenario.
    pub remove_rate: f64,
    /// Per-task probability of a +/-[5,30] minute shift.
    pub retime_rate: f64,
    pub horizon_start: Minutes,
    pub horizon_end: Minutes,
    pub trip_min: Minutes,
    pub trip_max: Minutes,
    pub turnaround_min: Minutes,
    pub turnaround_max: Minutes,
    /// Regular template window length.
    pub template_length: Minutes,
    /// Allowed template start spacing.
    pub template_grid: Minutes,
    pub include_reserve: bool,
    pub template_cost: f64,
    pub excess_cost: f64,
    pub gamma: u32,
    pub max_duty_length: Minutes,
    pub min_transition: Minutes,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            n_stations: 3,
            n_tasks: 20,
            n_scenarios: 3,
            add_rate: 0.0,
            remove_rate: 0.0,
            retime_rate: 0.0,
            horizon_start: 300,
            horizon_end: 1440,
            trip_min: 40,
            trip_max: 90,
            turnaround_min: 10,
            turnaround_max: 60,
            template_length: 570,
            template_grid: 30,
            include_reserve: true,
            template_cost: 10_000.0,
            excess_cost: 40_000.0,
            gamma: 15,
            max_duty_length: 540,
            min_transition: 10,
        }
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), SolveError> {
        for (name, rate) in [
            ("add_rate", self.add_rate),
            ("remove_rate", self.remove_rate),
            ("retime_rate", self.retime_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(SolveError::BadGeneratorConfig(format!(
                    "{name} = {rate} outside [0, 1]"
                )));
            }
        }
        if self.n_stations == 0 || self.n_tasks == 0 || self.n_scenarios == 0 {
            return Err(SolveError::BadGeneratorConfig(
                "stations, tasks and scenarios must be positive".into(),
            ));
        }
        let leg_max = self.trip_max * 2 + self.turnaround_max;
        if self.horizon_end - self.horizon_start < leg_max {
            return Err(SolveError::BadGeneratorConfig(format!(
                "horizon too short for any out-and-back leg ({leg_max} minutes)"
            )));
        }
        if self.trip_min > self.trip_max || self.turnaround_min > self.turnaround_max {
            return Err(SolveError::BadGeneratorConfig("interval bounds crossed".into()));
        }
        if self.template_length < leg_max {
            return Err(SolveError::BadGeneratorConfig(
                "templates shorter than a single leg".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Leg {
    id: usize,
    station: usize,
    start: Minutes,
    out_dur: Minutes,
    turnaround: Minutes,
    back_dur: Minutes,
    /// Independent retime shifts of the two tasks.
    out_shift: Minutes,
    back_shift: Minutes,
}

impl Leg {
    /// Materialises the two tasks, repairing any drift from retiming so the
    /// leg stays ordered and inside the horizon. The horizon admits a
    /// zero-gap leg by construction, so the cascade below always lands.
    fn tasks(&self, base: &StationId, stations: &[Station], lo: Minutes, hi: Minutes) -> [Task; 2] {
        let station = stations[self.station].id.clone();
        let mut out_start = (self.start + self.out_shift).max(lo);
        let mut out_end = out_start + self.out_dur;
        let mut back_start =
            (self.start + self.out_dur + self.turnaround + self.back_shift).max(out_end);
        let mut back_end = back_start + self.back_dur;
        if back_end > hi {
            back_start -= back_end - hi;
            back_end = hi;
            if back_start < out_end {
                let slide = out_end - back_start;
                out_start -= slide;
                out_end -= slide;
                back_start = out_end;
            }
        }
        debug_assert!(out_start >= lo && back_end <= hi);
        [
            Task {
                id: TaskId(format!("L{}o", self.id)),
                start_time: out_start,
                end_time: out_end,
                from_station: base.clone(),
                to_station: station.clone(),
                rolling_stock: format!("u{}", self.id),
            },
            Task {
                id: TaskId(format!("L{}b", self.id)),
                start_time: back_start,
                end_time: back_end,
                from_station: station,
                to_station: base.clone(),
                rolling_stock: format!("u{}", self.id),
            },
        ]
    }
}

/// Generates a full instance; deterministic in the seed.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, SolveError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let base_id = StationId("CB".to_string());
    let mut stations = vec![Station {
        id: base_id.clone(),
        has_canteen: true,
        is_crew_base: true,
    }];
    for i in 0..config.n_stations {
        stations.push(Station {
            id: StationId(format!("S{}", i + 1)),
            has_canteen: rng.gen_bool(0.5),
            is_crew_base: false,
        });
    }

    let mut next_leg_id = 0usize;
    let mut new_leg = |rng: &mut ChaCha8Rng| -> Leg {
        let out_dur = rng.gen_range(config.trip_min..=config.trip_max);
        let back_dur = rng.gen_range(config.trip_min..=config.trip_max);
        let turnaround = rng.gen_range(config.turnaround_min..=config.turnaround_max);
        let total = out_dur + turnaround + back_dur;
        let start = rng.gen_range(config.horizon_start..=config.horizon_end - total);
        let leg = Leg {
            id: next_leg_id,
            station: rng.gen_range(1..=config.n_stations),
            start,
            out_dur,
            turnaround,
            back_dur,
            out_shift: 0,
            back_shift: 0,
        };
        next_leg_id += 1;
        leg
    };

    let n_legs = (config.n_tasks / 2).max(1);
    let mut legs: Vec<Leg> = (0..n_legs).map(|_| new_leg(&mut rng)).collect();
    legs.sort_by_key(|l| (l.start, l.id));

    let mut scenarios = Vec::with_capacity(config.n_scenarios);
    for s in 0..config.n_scenarios {
        if s > 0 {
            // Perturb the previous scenario's legs.
            let survivors: Vec<Leg> = legs
                .iter()
                .filter(|_| !rng.gen_bool(config.remove_rate))
                .cloned()
                .collect();
            let mut next: Vec<Leg> = if survivors.is_empty() {
                vec![legs[0].clone()]
            } else {
                survivors
            };
            for leg in &mut next {
                for shift in [&mut leg.out_shift, &mut leg.back_shift] {
                    if rng.gen_bool(config.retime_rate) {
                        let delta = rng.gen_range(5..=30);
                        *shift += if rng.gen_bool(0.5) { delta } else { -delta };
                    }
                }
            }
            let additions = legs.len();
            for _ in 0..additions {
                if rng.gen_bool(config.add_rate) {
                    next.push(new_leg(&mut rng));
                }
            }
            next.sort_by_key(|l| (l.start + l.out_shift, l.id));
            legs = next;
        }
        let mut tasks = Vec::with_capacity(legs.len() * 2);
        for leg in &legs {
            tasks.extend(leg.tasks(&base_id, &stations, config.horizon_start, config.horizon_end));
        }
        tasks.sort_by(|a, b| (a.start_time, &a.id).cmp(&(b.start_time, &b.id)));
        scenarios.push(Scenario {
            id: ScenarioId(format!("s{}", s + 1)),
            tasks,
        });
    }

    // Template catalogue on the start grid, plus an optional full-day
    // reserve type.
    let grid = config.template_grid;
    let mut templates = Vec::new();
    let first = ((config.horizon_start - 60).max(0) / grid) * grid;
    let last = config.horizon_end - config.template_length + 60;
    let mut start = first;
    while start <= last {
        templates.push(TemplateType {
            id: TemplateId(format!("T{}", format_start(start))),
            crew_base: base_id.clone(),
            earliest_start: start,
            latest_end: start + config.template_length,
            is_reserve: false,
            cost: config.template_cost,
        });
        start += grid;
    }
    if templates.is_empty() {
        return Err(SolveError::BadGeneratorConfig(
            "no regular template fits the horizon".into(),
        ));
    }
    if config.include_reserve {
        templates.push(TemplateType {
            id: TemplateId("R".to_string()),
            crew_base: base_id.clone(),
            earliest_start: 0,
            latest_end: config.horizon_end.max(1440),
            is_reserve: true,
            cost: config.template_cost,
        });
    }

    let max_duties = scenarios
        .iter()
        .map(|s| s.tasks.len())
        .max()
        .unwrap_or(1) as u32;
    let instance = Instance {
        crew_base: base_id,
        stations,
        templates,
        scenarios,
        rostering_constraints: Vec::new(),
        gamma: config.gamma,
        capacity_bound: max_duties.max(8),
        excess_cost: config.excess_cost,
        min_transition: config.min_transition,
        max_duty_length: MaxDutyLength::constant(config.max_duty_length),
        meal_break_min: 30,
        max_stretch_without_break: 330,
        check_in: 0,
        check_out: 0,
    };
    instance.validate().map_err(SolveError::Model)?;
    instance
        .validate_reserve_windows()
        .map_err(SolveError::Model)?;
    self_check(&instance)?;
    Ok(instance)
}

fn format_start(m: Minutes) -> String {
    format!("{:02}{:02}", m / 60, m % 60)
}

/// A zero-excess cover must exist in every scenario when templates are
/// unrestricted: the relaxed flow network must admit covering flows, and
/// every leg must itself be a feasible duty of a full-day template.
fn self_check(instance: &Instance) -> Result<(), SolveError> {
    let full_day = TemplateType {
        id: TemplateId("selfcheck".to_string()),
        crew_base: instance.crew_base.clone(),
        earliest_start: 0,
        latest_end: instance
            .scenarios
            .iter()
            .filter_map(|s| s.span())
            .map(|(_, hi)| hi)
            .max()
            .unwrap_or(1440)
            + instance.check_out,
        is_reserve: true,
        cost: 0.0,
    };
    let mut probe = instance.clone();
    probe.templates.push(full_day.clone());
    for scenario in &instance.scenarios {
        build_flow_network(instance, scenario)?;
        // Pair tasks back into legs by shared rolling stock.
        let mut by_stock: std::collections::BTreeMap<&str, Vec<&Task>> =
            std::collections::BTreeMap::new();
        for t in &scenario.tasks {
            by_stock.entry(t.rolling_stock.as_str()).or_default().push(t);
        }
        for (_, mut tasks) in by_stock {
            tasks.sort_by_key(|t| t.start_time);
            let duty = Duty::from_tasks(&full_day, &tasks, instance.check_in, instance.check_out)
                .map_err(SolveError::Model)?;
            let violations = duty_feasible(&probe, scenario, &duty).map_err(SolveError::Model)?;
            if !violations.is_empty() {
                return Err(SolveError::BadGeneratorConfig(format!(
                    "generated leg {:?} infeasible: {:?}",
                    duty.tasks, violations
                )));
            }
        }
    }
    Ok(())
}
