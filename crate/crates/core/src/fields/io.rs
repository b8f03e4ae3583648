//! `MAGFLOW-GRID v1` and `MAGFLOW-SPEC v1` text formats.
//!
//! Grid files:
//!
//! ```text
//! MAGFLOW-GRID v1
//! N <n> NX <nx> NY <ny> LX <lx> LY <ly>
//! <2N values: Λ u0 u1 v1 …>     (NX·NY lines, y outer, x inner)
//! ```
//!
//! Spec files:
//!
//! ```text
//! MAGFLOW-SPEC v1
//! N <n>
//! PERIOD <lx> <ly>
//! FIELD LOGLAMBDA
//! <m> <n> <re> <im>
//! FIELD U0
//! …
//! END
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Floats are written
//! with 17 significant digits so files round-trip bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::fourier::field_names;
use super::{FieldGrid, FourierFieldSpec, Mode};
use crate::error::{MagflowError, Result};

const GRID_MAGIC: &str = "MAGFLOW-GRID v1";
const SPEC_MAGIC: &str = "MAGFLOW-SPEC v1";

/// Formats a float with 17 significant digits.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, msg: impl Into<String>) -> MagflowError {
    MagflowError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid integer `{tok}`")))
}

pub fn parse_grid(text: &str) -> Result<FieldGrid> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, GRID_MAGIC)) => {}
        Some((n, other)) => return Err(parse_err(n, format!("expected `{GRID_MAGIC}`, got `{other}`"))),
        None => return Err(parse_err(1, "empty file")),
    }
    let (hline, header) = lines.next().ok_or_else(|| parse_err(2, "missing header line"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let keys = ["N", "NX", "NY", "LX", "LY"];
    if toks.len() != 10 || (0..5).any(|i| toks[2 * i] != keys[i]) {
        return Err(parse_err(
            hline,
            "header must read `N <n> NX <nx> NY <ny> LX <lx> LY <ly>`",
        ));
    }
    let degree = parse_usize(toks[1], hline)?;
    let nx = parse_usize(toks[3], hline)?;
    let ny = parse_usize(toks[5], hline)?;
    let lx = parse_f64(toks[7], hline)?;
    let ly = parse_f64(toks[9], hline)?;
    let width = 2 * degree;
    let mut data = Vec::with_capacity(nx * ny * width);
    let mut rows = 0;
    for (ln, line) in lines {
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != width {
            return Err(parse_err(
                ln,
                format!("expected {width} values for N = {degree}, found {}", vals.len()),
            ));
        }
        for v in vals {
            data.push(parse_f64(v, ln)?);
        }
        rows += 1;
    }
    if rows != nx * ny {
        return Err(MagflowError::Validation(format!(
            "expected {} data rows, found {rows}",
            nx * ny
        )));
    }
    FieldGrid::new(degree, nx, ny, lx, ly, data)
}

pub fn write_grid(grid: &FieldGrid) -> String {
    let (nx, ny) = grid.dims();
    let (lx, ly) = grid.periods();
    let mut out = String::new();
    out.push_str(GRID_MAGIC);
    out.push('\n');
    let _ = writeln!(
        out,
        "N {} NX {nx} NY {ny} LX {} LY {}",
        grid.degree(),
        fmt17(lx),
        fmt17(ly)
    );
    for site in grid.data().chunks(2 * grid.degree()) {
        let row: Vec<String> = site.iter().map(|&v| fmt17(v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<FieldGrid> {
    parse_grid(&fs::read_to_string(path)?)
}

pub fn save_grid(grid: &FieldGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_grid(grid))?;
    Ok(())
}

pub fn parse_spec(text: &str) -> Result<FourierFieldSpec> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, SPEC_MAGIC)) => {}
        Some((n, other)) => return Err(parse_err(n, format!("expected `{SPEC_MAGIC}`, got `{other}`"))),
        None => return Err(parse_err(1, "empty file")),
    }
    let (nline, ntext) = lines.next().ok_or_else(|| parse_err(2, "missing `N <n>` line"))?;
    let degree = match ntext.split_whitespace().collect::<Vec<_>>()[..] {
        ["N", n] => parse_usize(n, nline)?,
        _ => return Err(parse_err(nline, "expected `N <n>`")),
    };
    if degree == 0 {
        return Err(parse_err(nline, "N must be at least 1"));
    }
    let (pline, ptext) = lines
        .next()
        .ok_or_else(|| parse_err(3, "missing `PERIOD <lx> <ly>` line"))?;
    let (lx, ly) = match ptext.split_whitespace().collect::<Vec<_>>()[..] {
        ["PERIOD", a, b] => (parse_f64(a, pline)?, parse_f64(b, pline)?),
        _ => return Err(parse_err(pline, "expected `PERIOD <lx> <ly>`")),
    };
    let names = field_names(degree);
    let mut fields: Vec<Vec<Mode>> = vec![Vec::new(); names.len()];
    let mut current: Option<usize> = None;
    let mut ended = false;
    for (ln, line) in lines {
        if ended {
            return Err(parse_err(ln, "content after END"));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[..] {
            ["END"] => ended = true,
            ["FIELD", name] => {
                let idx = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| parse_err(ln, format!("unknown field `{name}` for N = {degree}")))?;
                current = Some(idx);
            }
            [m, n, re, im] => {
                let idx = current.ok_or_else(|| parse_err(ln, "mode line before any FIELD"))?;
                let m = m
                    .parse::<i32>()
                    .map_err(|_| parse_err(ln, format!("invalid mode index `{m}`")))?;
                let n = n
                    .parse::<i32>()
                    .map_err(|_| parse_err(ln, format!("invalid mode index `{n}`")))?;
                fields[idx].push(Mode::new(m, n, parse_f64(re, ln)?, parse_f64(im, ln)?));
            }
            _ => return Err(parse_err(ln, format!("unrecognized line `{line}`"))),
        }
    }
    if !ended {
        return Err(parse_err(text.lines().count(), "missing END"));
    }
    FourierFieldSpec::new(degree, lx, ly, fields)
}

pub fn write_spec(spec: &FourierFieldSpec) -> String {
    use super::FieldSource;
    let (lx, ly) = spec.periods();
    let mut out = String::new();
    out.push_str(SPEC_MAGIC);
    out.push('\n');
    let _ = writeln!(out, "N {}", spec.degree());
    let _ = writeln!(out, "PERIOD {} {}", fmt17(lx), fmt17(ly));
    for (name, modes) in field_names(spec.degree()).iter().zip(spec.fields()) {
        if modes.is_empty() {
            continue;
        }
        let _ = writeln!(out, "FIELD {name}");
        for m in modes {
            let _ = writeln!(out, "{} {} {} {}", m.m, m.n, fmt17(m.c.re), fmt17(m.c.im));
        }
    }
    out.push_str("END\n");
    out
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<FourierFieldSpec> {
    parse_spec(&fs::read_to_string(path)?)
}

pub fn save_spec(spec: &FourierFieldSpec, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_spec(spec))?;
    Ok(())
}
