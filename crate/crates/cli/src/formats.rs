//! The input file formats.
//!
//! Matrix file:
//!
//! ```text
//! field GF(2)
//! vars 3
//! matrix 3 3
//! 0, x3, x2
//! x3, 0, x1
//! x2, x1, 0
//! ```
//!
//! Map file: the `matrix m n` line becomes `map m` and each following line
//! reads `H<i> = <expr>`. Blank lines and `#` comments are ignored.

use degone::degmat::DegOneMatrix;
use degone::field::FieldSpec;
use degone::jacobian::QuadMap;
use degone::poly::Poly;

#[derive(Debug)]
pub enum Input {
    Matrix(DegOneMatrix),
    Map(QuadMap),
}

impl Input {
    pub fn field(&self) -> FieldSpec {
        match self {
            Input::Matrix(m) => m.field(),
            Input::Map(h) => h.field(),
        }
    }
}

pub fn parse_input(text: &str) -> Result<Input, String> {
    let mut lines = meaningful_lines(text);
    let (ln, field_line) = lines.next().ok_or("empty input file")?;
    let field = field_line
        .strip_prefix("field")
        .ok_or(format!("line {ln}: expected `field Q` or `field GF(p)`"))?
        .trim()
        .parse::<FieldSpec>()
        .map_err(|e| format!("line {ln}: {e}"))?;
    let (ln, vars_line) = lines.next().ok_or("missing `vars` line")?;
    let nvars: usize = vars_line
        .strip_prefix("vars")
        .ok_or(format!("line {ln}: expected `vars n`"))?
        .trim()
        .parse()
        .map_err(|_| format!("line {ln}: bad variable count"))?;
    let (ln, head) = lines.next().ok_or("missing `matrix` or `map` line")?;
    if let Some(dims) = head.strip_prefix("matrix") {
        let parts: Vec<&str> = dims.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(format!("line {ln}: expected `matrix m n`"));
        }
        let rows: usize = parts[0]
            .parse()
            .map_err(|_| format!("line {ln}: bad row count"))?;
        let cols: usize = parts[1]
            .parse()
            .map_err(|_| format!("line {ln}: bad column count"))?;
        if rows == 0 || cols == 0 {
            return Err(format!("line {ln}: matrix dimensions must be positive"));
        }
        let mut entries: Vec<Vec<Poly>> = Vec::with_capacity(rows);
        for i in 0..rows {
            let (ln, row_line) = lines
                .next()
                .ok_or(format!("missing matrix row {}", i + 1))?;
            let cells: Vec<&str> = row_line.split(',').collect();
            if cells.len() != cols {
                return Err(format!(
                    "line {ln}: expected {cols} comma-separated entries, found {}",
                    cells.len()
                ));
            }
            let mut row = Vec::with_capacity(cols);
            for (j, cell) in cells.iter().enumerate() {
                let p = Poly::parse(cell, field, nvars)
                    .map_err(|e| format!("line {ln}, entry {}: {e}", j + 1))?;
                if !p.degree_at_most(1) {
                    return Err(format!(
                        "line {ln}, entry {}: degree exceeds 1 at matrix position ({}, {})",
                        j + 1,
                        i + 1,
                        j + 1
                    ));
                }
                row.push(p);
            }
            entries.push(row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(format!("line {ln}: trailing content after the matrix body"));
        }
        let m = DegOneMatrix::from_entries(field, nvars, &entries).map_err(|e| e.to_string())?;
        Ok(Input::Matrix(m))
    } else if let Some(dim) = head.strip_prefix("map") {
        let count: usize = dim
            .trim()
            .parse()
            .map_err(|_| format!("line {ln}: expected `map m`"))?;
        if count == 0 {
            return Err(format!("line {ln}: a map needs at least one component"));
        }
        let mut comps = Vec::with_capacity(count);
        for i in 0..count {
            let (ln, comp_line) = lines
                .next()
                .ok_or(format!("missing component H{}", i + 1))?;
            let want = format!("H{}", i + 1);
            let rest = comp_line
                .strip_prefix(&want)
                .ok_or(format!("line {ln}: expected `{want} = <expr>`"))?;
            let expr = rest
                .trim_start()
                .strip_prefix('=')
                .ok_or(format!("line {ln}: expected `=` after {want}"))?;
            let p = Poly::parse(expr, field, nvars).map_err(|e| format!("line {ln}: {e}"))?;
            if !p.degree_at_most(2) {
                return Err(format!("line {ln}: component {want} has degree above 2"));
            }
            comps.push(p);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(format!("line {ln}: trailing content after the map body"));
        }
        let map = QuadMap::new(field, nvars, comps).map_err(|e| e.to_string())?;
        Ok(Input::Map(map))
    } else {
        Err(format!("line {ln}: expected `matrix m n` or `map m`"))
    }
}

pub fn expect_matrix(input: Input) -> Result<DegOneMatrix, String> {
    match input {
        Input::Matrix(m) => Ok(m),
        Input::Map(_) => Err("this command needs a matrix file, found a map file".into()),
    }
}

pub fn expect_map(input: Input) -> Result<QuadMap, String> {
    match input {
        Input::Map(h) => Ok(h),
        Input::Matrix(_) => Err("this command needs a map file, found a matrix file".into()),
    }
}

fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn write_matrix_file(m: &DegOneMatrix) -> String {
    format!(
        "field {}\nvars {}\nmatrix {} {}\n{}",
        m.field(),
        m.nvars(),
        m.rows(),
        m.cols(),
        m
    )
}

pub fn write_map_file(h: &QuadMap) -> String {
    format!(
        "field {}\nvars {}\nmap {}\n{}",
        h.field(),
        h.nvars(),
        h.target_dim(),
        h
    )
}
