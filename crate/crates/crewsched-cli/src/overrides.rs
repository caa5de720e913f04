//! Instance-level parameter overrides shared by generate and solve:
//! day-of-week rostering profiles and template-mix caps.

use clap::ValueEnum;

use crewsched::model::{Instance, RosteringConstraint, TemplateId};

/// Day-of-week presets for the maximum share of early and late templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DayProfile {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl DayProfile {
    /// (early cap, late cap) as fractions of the template count.
    pub fn caps(self) -> (f64, f64) {
        match self {
            DayProfile::Mon | DayProfile::Tue | DayProfile::Wed => (0.30, 0.30),
            DayProfile::Thu | DayProfile::Fri => (0.30, 0.45),
            DayProfile::Sat | DayProfile::Sun => (0.20, 0.55),
        }
    }
}

fn share_constraint(
    instance: &Instance,
    label: &str,
    cap: f64,
    flag: impl Fn(&crewsched::model::TemplateType) -> bool,
) -> RosteringConstraint {
    // sum_{flagged} y_p <= cap * sum_p y_p, written as one <= 0 row.
    let coefficients: Vec<(TemplateId, f64)> = instance
        .templates
        .iter()
        .map(|t| {
            let c = if flag(t) { 1.0 - cap } else { -cap };
            (t.id.clone(), c)
        })
        .collect();
    RosteringConstraint {
        label: label.to_string(),
        coefficients,
        rhs: 0.0,
    }
}

pub fn apply_profile(instance: &mut Instance, profile: DayProfile) {
    let (early, late) = profile.caps();
    let early_row = share_constraint(instance, &format!("max-early-{early}"), early, |t| {
        t.is_early()
    });
    let late_row = share_constraint(instance, &format!("max-late-{late}"), late, |t| t.is_late());
    instance.rostering_constraints.push(early_row);
    instance.rostering_constraints.push(late_row);
}

pub fn apply_reserve_cap(instance: &mut Instance, cap: f64) {
    let row = share_constraint(instance, &format!("max-reserve-{cap}"), cap, |t| {
        t.is_reserve
    });
    instance.rostering_constraints.push(row);
}

pub fn apply_share_caps(instance: &mut Instance, early: Option<f64>, late: Option<f64>) {
    if let Some(cap) = early {
        let row = share_constraint(instance, &format!("max-early-{cap}"), cap, |t| t.is_early());
        instance.rostering_constraints.push(row);
    }
    if let Some(cap) = late {
        let row = share_constraint(instance, &format!("max-late-{cap}"), cap, |t| t.is_late());
        instance.rostering_constraints.push(row);
    }
}
