//! Report persistence: JSON for machine consumption, CSV tables for
//! spreadsheets and plotting.

use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::model::{Instance, Minutes};
use crate::report::{Phase, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub fn write_report(report: &SolveReport, path: &Path, format: ReportFormat) -> Result<(), Error> {
    match format {
        ReportFormat::Json => {
            let file = std::fs::File::create(path)?;
            let mut w = std::io::BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, report).map_err(std::io::Error::other)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        ReportFormat::Csv => {
            write_bounds_csv(report, path)?;
        }
    }
    Ok(())
}

pub fn read_report(path: &Path) -> Result<SolveReport, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text).map_err(std::io::Error::other)?)
}

fn phase_name(phase: Phase) -> &'static str {
    match phase {
        Phase::One => "1",
        Phase::Two => "2",
    }
}

pub fn write_bounds_csv(report: &SolveReport, path: &Path) -> Result<(), Error> {
    let mut out = String::from("iteration,phase,lb,ub,cuts_added,master_objective,eta\n");
    for rec in &report.bounds {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.iteration,
            phase_name(rec.phase),
            rec.lb,
            rec.ub.map(|u| u.to_string()).unwrap_or_default(),
            rec.cuts_added,
            rec.master_objective,
            rec.eta
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_portfolio_csv(report: &SolveReport, path: &Path) -> Result<(), Error> {
    let mut out = String::from("template,count,active\n");
    for e in &report.portfolio.entries {
        out.push_str(&format!("{},{},{}\n", e.template, e.count, e.active));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_excess_csv(report: &SolveReport, path: &Path) -> Result<(), Error> {
    let mut out = String::from("scenario,excess,duties\n");
    for s in &report.scenarios {
        out.push_str(&format!("{},{},{}\n", s.scenario, s.excess, s.duties));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Activity series on a time grid: active tasks per scenario, active
/// template capacity from the final portfolio, and per-scenario excess.
/// Mirrors the structure of the capacity-demand and capacity-supply plots.
pub fn write_plot_data(
    instance: &Instance,
    report: &SolveReport,
    grid: Minutes,
    path: &Path,
) -> Result<(), Error> {
    let mut out = String::from("scenario,t,active_tasks,active_templates,excess\n");
    for scenario in &instance.scenarios {
        let Some((lo, hi)) = scenario.span() else {
            continue;
        };
        let excess = report
            .scenarios
            .iter()
            .find(|s| s.scenario == scenario.id)
            .map(|s| s.excess)
            .unwrap_or(0.0);
        let mut t = (lo / grid) * grid;
        while t < hi {
            let active_tasks = scenario
                .tasks
                .iter()
                .filter(|task| task.start_time <= t && t + 1 <= task.end_time)
                .count();
            let active_templates: u32 = instance
                .templates
                .iter()
                .filter(|tpl| tpl.earliest_start <= t && t + 1 <= tpl.latest_end)
                .map(|tpl| report.portfolio.count_of(&tpl.id))
                .sum();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                scenario.id, t, active_tasks, active_templates, excess
            ));
            t += grid;
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
