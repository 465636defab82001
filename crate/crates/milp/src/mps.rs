//! Free-format MPS writer and reader.
//!
//! The writer emits `NAME`, `ROWS`, `COLUMNS` (binaries wrapped in
//! `INTORG`/`INTEND` markers), `RHS` and `BOUNDS`. Every column appears in
//! `COLUMNS`, even with no nonzeros, so the census survives a round trip.
//! The reader also accepts `RANGES` (ranged rows are split in two) and
//! `OBJSENSE MIN`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::MpsError;
use crate::model::{ModelInstance, Row, Sense, Variable};

const MAX_NAME: usize = 255;

fn check_name(name: &str) -> Result<(), MpsError> {
    if name.is_empty() || name.len() > MAX_NAME || name.chars().any(char::is_whitespace) {
        return Err(MpsError::BadName(name.to_string()));
    }
    Ok(())
}

fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Renders `model` as free-format MPS text.
pub fn to_mps_string(model: &ModelInstance) -> Result<String, MpsError> {
    let mut obj_name = "OBJ".to_string();
    while model.row_position(&obj_name).is_some() {
        obj_name.push('_');
    }
    let name = if model.name.is_empty() {
        "model"
    } else {
        model.name.as_str()
    };
    check_name(name)?;
    for v in model.variables() {
        check_name(&v.name)?;
    }
    for r in model.rows() {
        check_name(&r.name)?;
    }

    let mut out = String::new();
    let _ = writeln!(out, "NAME {name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {obj_name}");
    for r in model.rows() {
        let s = match r.sense {
            Sense::Le => 'L',
            Sense::Eq => 'E',
            Sense::Ge => 'G',
        };
        let _ = writeln!(out, " {s}  {}", r.name);
    }

    out.push_str("COLUMNS\n");
    let cols = model.columns();
    let mut in_marker = false;
    let mut marker_id = 0usize;
    for (j, v) in model.variables().iter().enumerate() {
        if v.is_binary != in_marker {
            let tag = if v.is_binary { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER{marker_id:04}  'MARKER'  {tag}");
            if !v.is_binary {
                marker_id += 1;
            }
            in_marker = v.is_binary;
        }
        let mut wrote = false;
        if v.cost != 0.0 {
            let _ = writeln!(out, "    {}  {obj_name}  {}", v.name, num(v.cost));
            wrote = true;
        }
        for &(i, a) in &cols[j] {
            let _ = writeln!(out, "    {}  {}  {}", v.name, model.rows()[i].name, num(a));
            wrote = true;
        }
        if !wrote {
            let _ = writeln!(out, "    {}  {obj_name}  0", v.name);
        }
    }
    if in_marker {
        let _ = writeln!(out, "    MARKER{marker_id:04}  'MARKER'  'INTEND'");
    }

    out.push_str("RHS\n");
    if model.objective_offset != 0.0 {
        let _ = writeln!(out, "    RHS  {obj_name}  {}", num(-model.objective_offset));
    }
    for r in model.rows() {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    RHS  {}  {}", r.name, num(r.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for v in model.variables() {
        let (lo, hi) = (v.lower, v.upper);
        let n = &v.name;
        if v.is_binary && lo == 0.0 && hi == 1.0 {
            let _ = writeln!(out, " BV BND  {n}");
        } else if lo == hi {
            let _ = writeln!(out, " FX BND  {n}  {}", num(lo));
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " FR BND  {n}");
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(out, " MI BND  {n}");
            } else if lo != 0.0 || v.is_binary {
                let _ = writeln!(out, " LO BND  {n}  {}", num(lo));
            }
            if hi != f64::INFINITY {
                let _ = writeln!(out, " UP BND  {n}  {}", num(hi));
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn write_mps(model: &ModelInstance, path: &Path) -> Result<(), MpsError> {
    let text = to_mps_string(model)?;
    fs::write(path, text).map_err(|source| MpsError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_mps(path: &Path) -> Result<ModelInstance, MpsError> {
    let text = fs::read_to_string(path).map_err(|source| MpsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mps(&text)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    ObjSense,
}

struct RowDef {
    name: String,
    sense: Sense,
    rhs: f64,
    range: Option<f64>,
    coeffs: Vec<(usize, f64)>,
}

pub fn parse_mps(text: &str) -> Result<ModelInstance, MpsError> {
    let mut model_name = String::new();
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<RowDef> = Vec::new();
    let mut row_pos: HashMap<String, usize> = HashMap::new();
    let mut vars: Vec<Variable> = Vec::new();
    let mut var_pos: HashMap<String, usize> = HashMap::new();
    let mut bounded: Vec<bool> = Vec::new();
    let mut integer = false;
    let mut offset = 0.0;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| MpsError::Parse { line: line_no, message };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            section = match toks[0] {
                "NAME" => {
                    model_name = toks.get(1).copied().unwrap_or("").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "OBJSENSE" => {
                    if let Some(&s) = toks.get(1) {
                        if s != "MIN" && s != "MINIMIZE" {
                            return Err(err(format!("unsupported objective sense {s}")));
                        }
                    }
                    Section::ObjSense
                }
                "ENDATA" => break,
                other => return Err(err(format!("unknown section `{other}`"))),
            };
            continue;
        }
        let parse_num =
            |s: &str| -> Result<f64, MpsError> { s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`"))) };
        match section {
            Section::None => return Err(err("data line outside of a section".into())),
            Section::ObjSense => {
                if toks[0] != "MIN" && toks[0] != "MINIMIZE" {
                    return Err(err(format!("unsupported objective sense {}", toks[0])));
                }
            }
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(err("expected `type name`".into()));
                }
                let name = toks[1].to_string();
                let sense = match toks[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(name);
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(err(format!("unknown row type `{t}`"))),
                };
                if row_pos.insert(name.clone(), rows.len()).is_some() {
                    return Err(err(format!("duplicate row `{name}`")));
                }
                rows.push(RowDef {
                    name,
                    sense,
                    rhs: 0.0,
                    range: None,
                    coeffs: Vec::new(),
                });
            }
            Section::Columns => {
                if toks.len() == 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => integer = true,
                        "'INTEND'" => integer = false,
                        t => return Err(err(format!("unknown marker {t}"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(err("expected `column row value [row value]`".into()));
                }
                let col = toks[0];
                let j = match var_pos.get(col) {
                    Some(&j) => j,
                    None => {
                        let j = vars.len();
                        let mut v = if integer {
                            Variable::binary(col, 0.0)
                        } else {
                            Variable::continuous(col, 0.0, f64::INFINITY, 0.0)
                        };
                        v.cost = 0.0;
                        vars.push(v);
                        bounded.push(false);
                        var_pos.insert(col.to_string(), j);
                        j
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let value = parse_num(pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        vars[j].cost += value;
                    } else if let Some(&i) = row_pos.get(pair[0]) {
                        rows[i].coeffs.push((j, value));
                    } else {
                        return Err(err(format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = match toks.len() {
                    2 | 4 => &toks[..],
                    3 | 5 => &toks[1..],
                    _ => return Err(err("expected `[set] row value [row value]`".into())),
                };
                for pair in pairs.chunks(2) {
                    let value = parse_num(pair[1])?;
                    if section == Section::Rhs && Some(pair[0]) == obj_row.as_deref() {
                        offset = -value;
                    } else if let Some(&i) = row_pos.get(pair[0]) {
                        if section == Section::Rhs {
                            rows[i].rhs = value;
                        } else {
                            rows[i].range = Some(value);
                        }
                    } else {
                        return Err(err(format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(err("expected `type set column [value]`".into()));
                }
                let kind = toks[0];
                let col = toks[2];
                let &j = var_pos.get(col).ok_or_else(|| err(format!("unknown column `{col}`")))?;
                let value = match kind {
                    "FR" | "MI" | "PL" | "BV" => None,
                    _ => Some(parse_num(
                        toks.get(3).ok_or_else(|| err(format!("bound {kind} needs a value")))?,
                    )?),
                };
                let v = &mut vars[j];
                if !bounded[j] && v.is_binary && kind != "BV" {
                    // Explicit bounds on a marker column replace the binary default.
                    v.lower = 0.0;
                    v.upper = f64::INFINITY;
                }
                bounded[j] = true;
                match (kind, value) {
                    ("LO", Some(x)) => v.lower = x,
                    ("UP", Some(x)) => v.upper = x,
                    ("FX", Some(x)) => {
                        v.lower = x;
                        v.upper = x;
                    }
                    ("FR", _) => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    ("MI", _) => v.lower = f64::NEG_INFINITY,
                    ("PL", _) => v.upper = f64::INFINITY,
                    ("BV", _) => {
                        v.is_binary = true;
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                    _ => return Err(err(format!("unsupported bound type `{kind}`"))),
                }
            }
        }
    }

    let mut model = ModelInstance::new(model_name);
    model.objective_offset = offset;
    for mut v in vars {
        if v.is_binary && (v.lower < 0.0 || v.upper > 1.0) {
            // General integers are outside this model class; keep them continuous.
            v.is_binary = false;
        }
        model.add_variable(v)?;
    }
    for r in rows {
        match r.range {
            None => {
                model.add_row(Row::new(r.name, r.coeffs, r.sense, r.rhs))?;
            }
            Some(range) => {
                let (lo, hi) = match r.sense {
                    Sense::Le => (r.rhs - range.abs(), r.rhs),
                    Sense::Ge => (r.rhs, r.rhs + range.abs()),
                    Sense::Eq if range >= 0.0 => (r.rhs, r.rhs + range),
                    Sense::Eq => (r.rhs + range, r.rhs),
                };
                let upper_name = format!("{}_range", r.name);
                model.add_row(Row::new(r.name, r.coeffs.clone(), Sense::Ge, lo))?;
                model.add_row(Row::new(upper_name, r.coeffs, Sense::Le, hi))?;
            }
        }
    }
    Ok(model)
}
