use std::io::{self, Write};

use crate::model::{LinearModel, ObjectiveSense, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsFormat {
    /// Column-positioned records; names longer than 8 characters are replaced
    /// by `R<index>` / `C<index>`.
    Fixed,
    /// Whitespace-separated records; spaces in names become underscores.
    Free,
}

fn names(model: &LinearModel, fmt: MpsFormat) -> (Vec<String>, Vec<String>) {
    let clean = |s: &str, fallback: String| match fmt {
        MpsFormat::Free => {
            let t: String = s.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
            if t.is_empty() {
                fallback
            } else {
                t
            }
        }
        MpsFormat::Fixed => {
            if s.is_empty() || s.len() > 8 || s.contains(char::is_whitespace) {
                fallback
            } else {
                s.to_string()
            }
        }
    };
    let mut rows: Vec<String> = model.rows.iter().enumerate().map(|(i, r)| clean(&r.name, format!("R{}", i))).collect();
    let mut cols: Vec<String> = model.vars.iter().enumerate().map(|(j, v)| clean(&v.name, format!("C{}", j))).collect();
    // Names must be unique; fall back to indices when they are not.
    let dedup = |v: &mut Vec<String>, p: &str| {
        let mut seen = std::collections::HashSet::new();
        if !v.iter().all(|s| seen.insert(s.clone())) {
            for (i, s) in v.iter_mut().enumerate() {
                *s = format!("{}{}", p, i);
            }
        }
    };
    dedup(&mut rows, "R");
    dedup(&mut cols, "C");
    (rows, cols)
}

fn num(v: f64) -> String {
    let s = format!("{}", v);
    if s.len() <= 12 {
        s
    } else {
        format!("{:.6e}", v)
    }
}

fn record(w: &mut dyn Write, fmt: MpsFormat, fields: &[&str]) -> io::Result<()> {
    match fmt {
        MpsFormat::Free => writeln!(w, " {}", fields.join(" ")),
        MpsFormat::Fixed => {
            // Fields start at columns 2, 5, 15, 25, 40, 50.
            let starts = [1usize, 4, 14, 24, 39, 49];
            let mut line = String::new();
            for (k, f) in fields.iter().enumerate() {
                let col = starts[k];
                while line.len() < col {
                    line.push(' ');
                }
                line.push_str(f);
            }
            writeln!(w, "{}", line)
        }
    }
}

/// Writes `model` in MPS format. Maximization is emitted through an
/// `OBJSENSE` section.
pub fn write_mps(model: &LinearModel, w: &mut dyn Write, fmt: MpsFormat) -> io::Result<()> {
    let (rows, cols) = names(model, fmt);
    writeln!(w, "NAME          DRTSP")?;
    if model.sense == ObjectiveSense::Maximize {
        writeln!(w, "OBJSENSE")?;
        writeln!(w, "    MAX")?;
    }
    writeln!(w, "ROWS")?;
    record(w, fmt, &["N", "OBJ"])?;
    for (r, row) in model.rows.iter().enumerate() {
        let t = match row.sense {
            Sense::Ge => "G",
            Sense::Le => "L",
            Sense::Eq => "E",
        };
        record(w, fmt, &[t, &rows[r]])?;
    }
    writeln!(w, "COLUMNS")?;
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (r, row) in model.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            by_col[j].push((r, a));
        }
    }
    let mut in_int = false;
    for (j, entries) in by_col.iter().enumerate() {
        let bin = model.vars[j].binary;
        if bin != in_int {
            let tag = if bin { "'INTORG'" } else { "'INTEND'" };
            record(w, fmt, &["", "MARKER", "'MARKER'", "", tag])?;
            in_int = bin;
        }
        let c = model.objective[j];
        record(w, fmt, &["", &cols[j], "OBJ", &num(c)])?;
        for &(r, a) in entries {
            record(w, fmt, &["", &cols[j], &rows[r], &num(a)])?;
        }
    }
    if in_int {
        record(w, fmt, &["", "MARKER", "'MARKER'", "", "'INTEND'"])?;
    }
    writeln!(w, "RHS")?;
    if model.offset != 0.0 {
        record(w, fmt, &["", "RHS", "OBJ", &num(-model.offset)])?;
    }
    for (r, row) in model.rows.iter().enumerate() {
        if row.rhs != 0.0 {
            record(w, fmt, &["", "RHS", &rows[r], &num(row.rhs)])?;
        }
    }
    writeln!(w, "BOUNDS")?;
    for (j, v) in model.vars.iter().enumerate() {
        let (l, u) = (v.lb, v.ub);
        if v.binary && l == 0.0 && u == 1.0 {
            record(w, fmt, &["BV", "BND", &cols[j]])?;
            continue;
        }
        if l == u {
            record(w, fmt, &["FX", "BND", &cols[j], &num(l)])?;
            continue;
        }
        match (l.is_finite(), u.is_finite()) {
            (false, false) => record(w, fmt, &["FR", "BND", &cols[j]])?,
            (false, true) => {
                record(w, fmt, &["MI", "BND", &cols[j]])?;
                record(w, fmt, &["UP", "BND", &cols[j], &num(u)])?;
            }
            (true, fin_u) => {
                if l != 0.0 {
                    record(w, fmt, &["LO", "BND", &cols[j], &num(l)])?;
                }
                if fin_u {
                    record(w, fmt, &["UP", "BND", &cols[j], &num(u)])?;
                }
            }
        }
    }
    writeln!(w, "ENDATA")
}
