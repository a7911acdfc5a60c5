//! Minimal MPS reader: NAME, ROWS, COLUMNS (with integer markers), RHS and
//! BOUNDS in free or fixed format. RANGES, SOS and free variables are
//! rejected rather than ignored.

use std::collections::HashMap;

use super::{Instance, RawRow, Sense, DEFAULT_UPPER};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    ObjSense,
}

fn unsupported(feature: impl Into<String>) -> Error {
    Error::Unsupported {
        format: "MPS",
        feature: feature.into(),
    }
}

pub(super) fn parse(text: &str, ctx: &str) -> Result<Instance> {
    let err = |line: usize, message: String| Error::Parse {
        context: format!("{ctx}:{line}"),
        message,
    };
    let number = |line: usize, tok: &str| {
        tok.parse::<f64>()
            .map_err(|_| err(line, format!("expected a number, found '{tok}'")))
    };

    let mut name = String::from("unnamed");
    let mut section = Section::None;
    let mut objective_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<RawRow> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut objective: Vec<f64> = Vec::new();
    let mut integers = Vec::new();
    let mut in_integer_block = false;
    let mut lower: Vec<Option<f64>> = Vec::new();
    let mut upper: Vec<Option<f64>> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match toks[0] {
                "NAME" => {
                    if let Some(n) = toks.get(1) {
                        name = n.to_string();
                    }
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "OBJSENSE" => match toks.get(1) {
                    Some(&"MIN") | Some(&"MINIMIZE") => Section::None,
                    Some(s) => return Err(unsupported(format!("OBJSENSE {s}"))),
                    None => Section::ObjSense,
                },
                "RANGES" => return Err(unsupported("RANGES section")),
                "SOS" => return Err(unsupported("SOS section")),
                "ENDATA" => break,
                other => return Err(err(line, format!("unknown section '{other}'"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(err(line, "data line outside of a section".into())),
            Section::ObjSense => match toks[0] {
                "MIN" | "MINIMIZE" => section = Section::None,
                s => return Err(unsupported(format!("OBJSENSE {s}"))),
            },
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(err(line, "ROWS entry needs a type and a name".into()));
                }
                let sense = match toks[0] {
                    "N" => {
                        if objective_row.is_none() {
                            objective_row = Some(toks[1].to_string());
                        }
                        continue;
                    }
                    "G" => Sense::Ge,
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    t => return Err(err(line, format!("unknown row type '{t}'"))),
                };
                row_index.insert(toks[1].to_string(), rows.len());
                rows.push(RawRow {
                    coeffs: Vec::new(),
                    sense,
                    rhs: 0.0,
                });
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => in_integer_block = true,
                        "'INTEND'" => in_integer_block = false,
                        m => return Err(err(line, format!("unknown marker {m}"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(err(
                        line,
                        "COLUMNS entry needs 1 or 2 (row, value) pairs".into(),
                    ));
                }
                let j = match col_index.get(toks[0]) {
                    Some(&j) => j,
                    None => {
                        let j = objective.len();
                        col_index.insert(toks[0].to_string(), j);
                        objective.push(0.0);
                        lower.push(None);
                        upper.push(None);
                        if in_integer_block {
                            integers.push(j);
                        }
                        j
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = number(line, pair[1])?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        objective[j] += v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        rows[i].coeffs.push((j, v));
                    } else {
                        return Err(err(line, format!("unknown row '{}'", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                // the set name is optional in free format
                let pairs = if toks.len() % 2 == 1 {
                    &toks[1..]
                } else {
                    &toks[..]
                };
                for pair in pairs.chunks(2) {
                    let v = number(line, pair[1])?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        return Err(unsupported("objective constant in RHS"));
                    }
                    match row_index.get(pair[0]) {
                        Some(&i) => rows[i].rhs = v,
                        None => return Err(err(line, format!("unknown row '{}'", pair[0]))),
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0];
                let (col, value) = match kind {
                    "FR" | "MI" => {
                        return Err(unsupported(format!("{kind} bound (free variable)")))
                    }
                    "SC" => return Err(unsupported("semi-continuous bound")),
                    "PL" | "BV" => match toks.len() {
                        3 | 4 => (toks[2], None),
                        _ => (toks[1], None),
                    },
                    "UP" | "LO" | "FX" | "LI" | "UI" => {
                        if toks.len() < 3 {
                            return Err(err(line, format!("{kind} bound needs a value")));
                        }
                        let (c, v) = if toks.len() >= 4 {
                            (toks[2], toks[3])
                        } else {
                            (toks[1], toks[2])
                        };
                        (c, Some(number(line, v)?))
                    }
                    t => return Err(err(line, format!("unknown bound type '{t}'"))),
                };
                let j = *col_index
                    .get(col)
                    .ok_or_else(|| err(line, format!("unknown column '{col}'")))?;
                match (kind, value) {
                    ("UP", Some(v)) | ("UI", Some(v)) => {
                        if v < 0.0 && lower[j].is_none() {
                            return Err(unsupported(
                                "negative upper bound with default lower bound",
                            ));
                        }
                        upper[j] = Some(v);
                    }
                    ("LO", Some(v)) | ("LI", Some(v)) => lower[j] = Some(v),
                    ("FX", Some(v)) => {
                        lower[j] = Some(v);
                        upper[j] = Some(v);
                    }
                    ("BV", _) => {
                        lower[j] = Some(0.0);
                        upper[j] = Some(1.0);
                    }
                    ("PL", _) => upper[j] = Some(DEFAULT_UPPER),
                    _ => unreachable!(),
                }
                if matches!(kind, "BV" | "LI" | "UI") && !integers.contains(&j) {
                    integers.push(j);
                }
            }
        }
    }

    let n = objective.len();
    let bounds: Vec<Option<(f64, f64)>> = (0..n)
        .map(|j| Some((lower[j].unwrap_or(0.0), upper[j].unwrap_or(DEFAULT_UPPER))))
        .collect();
    Instance::standardize(name, n, objective, &rows, &bounds, integers)
}
