//! CPLEX LP-format export.

use std::fmt::Write as _;

use super::model::{Cmp, LinearModel, Sense, VarKind};

fn clean(name: &str, fallback: &str) -> String {
    let allowed = |c: char| c.is_ascii_alphanumeric() || "_.()!#$%&/,;?@{}~".contains(c);
    let mut out: String = name.chars().map(|c| if allowed(c) { c } else { '_' }).collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out.insert_str(0, fallback);
    }
    out
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn terms(out: &mut String, names: &[String], terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names[0]);
        return;
    }
    for (k, &(v, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 { '-' } else { '+' };
        if k == 0 && c >= 0.0 {
            let _ = write!(out, " {} {}", num(c.abs()), names[v]);
        } else {
            let _ = write!(out, " {sign} {} {}", num(c.abs()), names[v]);
        }
        if (k + 1) % 8 == 0 {
            out.push_str("\n  ");
        }
    }
}

/// Renders the model as LP-format text. Variable names are made unique with their index.
pub fn to_lp_string(model: &LinearModel) -> String {
    let names: Vec<String> = model
        .variables()
        .iter()
        .enumerate()
        .map(|(k, v)| format!("{}#{k}", clean(&v.name, "v")))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    if model.offset != 0.0 {
        let _ = writeln!(out, "\\ objective offset {}", model.offset);
    }
    out.push_str(match model.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let obj: Vec<(usize, f64)> = model
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.objective != 0.0)
        .map(|(k, v)| (k, v.objective))
        .collect();
    if names.is_empty() {
        out.push_str(" 0");
    } else {
        terms(&mut out, &names, &obj);
    }
    out.push_str("\nSubject To\n");
    for (k, c) in model.constraints().iter().enumerate() {
        if names.is_empty() {
            break;
        }
        let _ = write!(out, " {}#{k}:", clean(&c.name, "c"));
        let row: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (v.index(), a)).collect();
        terms(&mut out, &names, &row);
        let op = match c.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (k, v) in model.variables().iter().enumerate() {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {} free", names[k]);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), names[k], num(v.upper));
        }
    }
    let binaries: Vec<&String> = model
        .variables()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for n in binaries {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}
