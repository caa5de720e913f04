//! Export of any model in CPLEX LP text form, for cross-checking against
//! external solvers.

use std::fmt::Write;

use crate::lp::{LinearProgram, ObjSense, RowSense};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn push_terms(out: &mut String, terms: &[(usize, f64)], lp: &LinearProgram) {
    let mut first = true;
    for &(j, c) in terms {
        if c == 0.0 {
            continue;
        }
        let name = sanitize(&lp.variables[j].name);
        if first {
            let _ = write!(out, "{c} {name}");
            first = false;
        } else if c < 0.0 {
            let _ = write!(out, " - {} {name}", -c);
        } else {
            let _ = write!(out, " + {c} {name}");
        }
    }
    if first {
        out.push('0');
    }
}

pub fn to_lp_text(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense {
        ObjSense::Minimize => "Minimize\n obj: ",
        ObjSense::Maximize => "Maximize\n obj: ",
    });
    let obj_terms: Vec<(usize, f64)> = lp
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| (j, v.objective))
        .collect();
    push_terms(&mut out, &obj_terms, lp);
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let name = if row.name.is_empty() {
            format!("c{i}")
        } else {
            sanitize(&row.name)
        };
        let _ = write!(out, " {name}: ");
        push_terms(&mut out, &row.coefficients, lp);
        let op = match row.sense {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for v in &lp.variables {
        let name = sanitize(&v.name);
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", v.lower, v.upper);
            }
            (true, false) => {
                if v.lower != 0.0 {
                    let _ = writeln!(out, " {name} >= {}", v.lower);
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    let integers: Vec<&str> = lp
        .variables
        .iter()
        .filter(|v| v.integer)
        .map(|v| v.name.as_str())
        .collect();
    if !integers.is_empty() {
        out.push_str("General\n");
        for name in integers {
            let _ = writeln!(out, " {}", sanitize(name));
        }
    }
    out.push_str("End\n");
    out
}
