//! The instance text format: a single human-diffable document with a
//! versioned header, a parameter block, and one section per entity kind.
//! Times are HH:MM with a `+1` suffix for post-midnight work. The format
//! grammar is documented in `docs/instance-format.md`.

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::model::{
    Instance, MaxDutyLength, Minutes, RosteringConstraint, Scenario, ScenarioId, Station,
    StationId, Task, TaskId, TemplateId, TemplateType,
};

pub const FORMAT_HEADER: &str = "crewsched-instance v1";

pub fn format_time(m: Minutes) -> String {
    let (day, m) = (m.div_euclid(1440), m.rem_euclid(1440));
    let base = format!("{:02}:{:02}", m / 60, m % 60);
    match day {
        0 => base,
        1 => format!("{base}+1"),
        d => format!("{base}+{d}"),
    }
}

pub fn parse_time(s: &str, line: usize) -> Result<Minutes, ParseError> {
    let (clock, day) = match s.split_once('+') {
        Some((c, d)) => (
            c,
            d.parse::<i64>().map_err(|_| ParseError::Field {
                line,
                field: "time".into(),
                message: format!("bad day suffix in {s:?}"),
            })?,
        ),
        None => (s, 0),
    };
    let (h, m) = clock.split_once(':').ok_or_else(|| ParseError::Field {
        line,
        field: "time".into(),
        message: format!("expected HH:MM in {s:?}"),
    })?;
    let h: i64 = h.parse().map_err(|_| ParseError::Field {
        line,
        field: "time".into(),
        message: format!("bad hour in {s:?}"),
    })?;
    let m: i64 = m.parse().map_err(|_| ParseError::Field {
        line,
        field: "time".into(),
        message: format!("bad minute in {s:?}"),
    })?;
    if !(0..24).contains(&h) || !(0..60).contains(&m) {
        return Err(ParseError::Field {
            line,
            field: "time".into(),
            message: format!("clock out of range in {s:?}"),
        });
    }
    Ok(day * 1440 + h * 60 + m)
}

fn format_steps(steps: &MaxDutyLength) -> String {
    steps
        .steps
        .iter()
        .map(|(from, max)| format!("{}->{}", format_time(*from), max))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_steps(s: &str, line: usize) -> Result<MaxDutyLength, ParseError> {
    let mut steps = Vec::new();
    for part in s.split(',') {
        let (from, max) = part.split_once("->").ok_or_else(|| ParseError::Field {
            line,
            field: "max_duty_length".into(),
            message: format!("expected TIME->MINUTES in {part:?}"),
        })?;
        let from = parse_time(from.trim(), line)?;
        let max: Minutes = max.trim().parse().map_err(|_| ParseError::Field {
            line,
            field: "max_duty_length".into(),
            message: format!("bad minutes in {part:?}"),
        })?;
        steps.push((from, max));
    }
    if steps.is_empty() || steps[0].0 != 0 {
        return Err(ParseError::Field {
            line,
            field: "max_duty_length".into(),
            message: "first step must start at 00:00".into(),
        });
    }
    Ok(MaxDutyLength { steps })
}

/// Emits the canonical text form.
pub fn emit_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER}");
    out.push('\n');
    let _ = writeln!(out, "[params]");
    let _ = writeln!(out, "crew_base = {}", instance.crew_base);
    let _ = writeln!(out, "gamma = {}", instance.gamma);
    let _ = writeln!(out, "capacity_bound = {}", instance.capacity_bound);
    let _ = writeln!(out, "excess_cost = {}", instance.excess_cost);
    let _ = writeln!(out, "min_transition = {}", instance.min_transition);
    let _ = writeln!(out, "meal_break_min = {}", instance.meal_break_min);
    let _ = writeln!(
        out,
        "max_stretch_without_break = {}",
        instance.max_stretch_without_break
    );
    let _ = writeln!(out, "check_in = {}", instance.check_in);
    let _ = writeln!(out, "check_out = {}", instance.check_out);
    let _ = writeln!(out, "max_duty_length = {}", format_steps(&instance.max_duty_length));
    out.push('\n');
    let _ = writeln!(out, "[stations]");
    for s in &instance.stations {
        let _ = writeln!(
            out,
            "{} {} {}",
            s.id,
            if s.has_canteen { "canteen" } else { "-" },
            if s.is_crew_base { "base" } else { "-" },
        );
    }
    out.push('\n');
    let _ = writeln!(out, "[templates]");
    for t in &instance.templates {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            t.id,
            t.crew_base,
            format_time(t.earliest_start),
            format_time(t.latest_end),
            if t.is_reserve { "reserve" } else { "regular" },
            t.cost,
        );
    }
    if !instance.rostering_constraints.is_empty() {
        out.push('\n');
        let _ = writeln!(out, "[rostering]");
        for rc in &instance.rostering_constraints {
            let coeffs = rc
                .coefficients
                .iter()
                .map(|(id, c)| format!("{id}={c}"))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(out, "{} ; {} ; {}", rc.label, rc.rhs, coeffs);
        }
    }
    for sc in &instance.scenarios {
        out.push('\n');
        let _ = writeln!(out, "[scenario {}]", sc.id);
        for t in &sc.tasks {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                t.id,
                format_time(t.start_time),
                format_time(t.end_time),
                t.from_station,
                t.to_station,
                t.rolling_stock,
            );
        }
    }
    out
}

enum Section {
    None,
    Params,
    Stations,
    Templates,
    Rostering,
    Scenario(usize),
}

/// Parses the text form and validates all structural invariants.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l.trim().to_string(),
            None => {
                return Err(ParseError::Syntax {
                    line: 0,
                    message: "empty document".into(),
                })
            }
        }
    };
    if header != FORMAT_HEADER {
        return Err(ParseError::Version(header));
    }

    let mut instance = Instance {
        crew_base: StationId(String::new()),
        stations: Vec::new(),
        templates: Vec::new(),
        scenarios: Vec::new(),
        rostering_constraints: Vec::new(),
        gamma: 1,
        capacity_bound: 1,
        excess_cost: f64::MAX,
        min_transition: 0,
        max_duty_length: MaxDutyLength::default(),
        meal_break_min: 30,
        max_stretch_without_break: 330,
        check_in: 0,
        check_out: 0,
    };
    let mut section = Section::None;

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = match name.trim() {
                "params" => Section::Params,
                "stations" => Section::Stations,
                "templates" => Section::Templates,
                "rostering" => Section::Rostering,
                other => {
                    if let Some(id) = other.strip_prefix("scenario ") {
                        instance.scenarios.push(Scenario {
                            id: ScenarioId(id.trim().to_string()),
                            tasks: Vec::new(),
                        });
                        Section::Scenario(instance.scenarios.len() - 1)
                    } else {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            message: format!("unknown section [{other}]"),
                        });
                    }
                }
            };
            continue;
        }
        match section {
            Section::None => {
                return Err(ParseError::Syntax {
                    line: line_no,
                    message: "content before any section".into(),
                })
            }
            Section::Params => parse_param(&mut instance, line, line_no)?,
            Section::Stations => {
                let f = fields(line, 3, "stations", line_no)?;
                instance.stations.push(Station {
                    id: StationId(f[0].to_string()),
                    has_canteen: f[1] == "canteen",
                    is_crew_base: f[2] == "base",
                });
            }
            Section::Templates => {
                let f = fields(line, 6, "templates", line_no)?;
                instance.templates.push(TemplateType {
                    id: TemplateId(f[0].to_string()),
                    crew_base: StationId(f[1].to_string()),
                    earliest_start: parse_time(f[2], line_no)?,
                    latest_end: parse_time(f[3], line_no)?,
                    is_reserve: f[4] == "reserve",
                    cost: parse_f64(f[5], "cost", line_no)?,
                });
            }
            Section::Rostering => {
                let parts: Vec<&str> = line.split(';').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        message: "expected `label ; rhs ; id=coef ...`".into(),
                    });
                }
                let rhs = parse_f64(parts[1], "rhs", line_no)?;
                let mut coefficients = Vec::new();
                for pair in parts[2].split_whitespace() {
                    let (id, c) = pair.split_once('=').ok_or_else(|| ParseError::Field {
                        line: line_no,
                        field: "rostering".into(),
                        message: format!("expected id=coef, got {pair:?}"),
                    })?;
                    coefficients.push((TemplateId(id.to_string()), parse_f64(c, "coef", line_no)?));
                }
                instance.rostering_constraints.push(RosteringConstraint {
                    label: parts[0].to_string(),
                    coefficients,
                    rhs,
                });
            }
            Section::Scenario(s) => {
                let f = fields(line, 6, "scenario", line_no)?;
                instance.scenarios[s].tasks.push(Task {
                    id: TaskId(f[0].to_string()),
                    start_time: parse_time(f[1], line_no)?,
                    end_time: parse_time(f[2], line_no)?,
                    from_station: StationId(f[3].to_string()),
                    to_station: StationId(f[4].to_string()),
                    rolling_stock: f[5].to_string(),
                });
            }
        }
    }
    instance.validate()?;
    instance.validate_reserve_windows()?;
    Ok(instance)
}

fn fields<'a>(
    line: &'a str,
    expect: usize,
    section: &str,
    line_no: usize,
) -> Result<Vec<&'a str>, ParseError> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != expect {
        return Err(ParseError::Syntax {
            line: line_no,
            message: format!("[{section}] row needs {expect} fields, found {}", f.len()),
        });
    }
    Ok(f)
}

fn parse_f64(s: &str, field: &str, line: usize) -> Result<f64, ParseError> {
    s.parse().map_err(|_| ParseError::Field {
        line,
        field: field.into(),
        message: format!("bad number {s:?}"),
    })
}

fn parse_i64(s: &str, field: &str, line: usize) -> Result<i64, ParseError> {
    s.parse().map_err(|_| ParseError::Field {
        line,
        field: field.into(),
        message: format!("bad integer {s:?}"),
    })
}

fn parse_param(instance: &mut Instance, line: &str, line_no: usize) -> Result<(), ParseError> {
    let (key, value) = line.split_once('=').ok_or_else(|| ParseError::Syntax {
        line: line_no,
        message: "expected key = value".into(),
    })?;
    let (key, value) = (key.trim(), value.trim());
    match key {
        "crew_base" => instance.crew_base = StationId(value.to_string()),
        "gamma" => instance.gamma = parse_i64(value, key, line_no)? as u32,
        "capacity_bound" => instance.capacity_bound = parse_i64(value, key, line_no)? as u32,
        "excess_cost" => instance.excess_cost = parse_f64(value, key, line_no)?,
        "min_transition" => instance.min_transition = parse_i64(value, key, line_no)?,
        "meal_break_min" => instance.meal_break_min = parse_i64(value, key, line_no)?,
        "max_stretch_without_break" => {
            instance.max_stretch_without_break = parse_i64(value, key, line_no)?
        }
        "check_in" => instance.check_in = parse_i64(value, key, line_no)?,
        "check_out" => instance.check_out = parse_i64(value, key, line_no)?,
        "max_duty_length" => instance.max_duty_length = parse_steps(value, line_no)?,
        other => {
            return Err(ParseError::Field {
                line: line_no,
                field: other.into(),
                message: "unknown parameter".into(),
            })
        }
    }
    Ok(())
}

pub fn load_instance(path: &std::path::Path) -> Result<Instance, ParseError> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn save_instance(instance: &Instance, path: &std::path::Path) -> Result<(), ParseError> {
    std::fs::write(path, emit_instance(instance))?;
    Ok(())
}
