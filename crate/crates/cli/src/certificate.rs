//! Plain-text transformation certificates.
//!
//! A certificate records the input digest, the claim, and the transformation
//! matrices with exact scalars, e.g.
//!
//! ```text
//! kind classification
//! input-sha256 9f8a...
//! field GF(5)
//! tag R2_Hook
//! S 3 3
//! 1, 0, 0
//! 0, 1, 0
//! 0, 0, 1
//! S_inv 3 3
//! ...
//! T 4 4
//! ...
//! T_inv 4 4
//! ...
//! ```
//!
//! Triangularization and strong-nilpotence certificates carry `U`/`U_inv`
//! and a `claim strictly-lower-triangular` line instead of a tag; the
//! square-product suite carries `claim` lines with the computed answers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use degone::classify::NormalFormTag;
use degone::field::{FieldSpec, Scalar};
use degone::linmat::ConstMatrix;
use degone::poly::Poly;
use degone::triangularize::SquareZeroReport;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CertKind {
    Classification,
    Triangularization,
    StrongNilpotence,
    SquareZeroSuite,
}

impl CertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertKind::Classification => "classification",
            CertKind::Triangularization => "triangularization",
            CertKind::StrongNilpotence => "strong-nilpotence",
            CertKind::SquareZeroSuite => "jh2-suite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "classification" => Some(CertKind::Classification),
            "triangularization" => Some(CertKind::Triangularization),
            "strong-nilpotence" => Some(CertKind::StrongNilpotence),
            "jh2-suite" => Some(CertKind::SquareZeroSuite),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub kind: CertKind,
    pub input_sha256: String,
    pub field: FieldSpec,
    pub tag: Option<NormalFormTag>,
    pub claims: BTreeMap<String, String>,
    pub matrices: BTreeMap<String, ConstMatrix>,
}

pub fn input_digest(bytes: &[u8]) -> String {
    let mut hex = String::new();
    for b in Sha256::digest(bytes) {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

fn write_matrix(out: &mut String, name: &str, m: &ConstMatrix) {
    let _ = writeln!(out, "{} {} {}", name, m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(", "));
    }
}

pub fn classification_certificate(
    digest: &str,
    field: FieldSpec,
    tag: NormalFormTag,
    tf: &degone::linmat::Transform,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind classification");
    let _ = writeln!(out, "input-sha256 {digest}");
    let _ = writeln!(out, "field {field}");
    let _ = writeln!(out, "tag {tag}");
    write_matrix(&mut out, "S", &tf.s);
    write_matrix(&mut out, "S_inv", &tf.s_inv);
    write_matrix(&mut out, "T", &tf.t);
    write_matrix(&mut out, "T_inv", &tf.t_inv);
    out
}

pub fn conjugation_certificate(
    kind: CertKind,
    digest: &str,
    field: FieldSpec,
    u: &ConstMatrix,
    u_inv: &ConstMatrix,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind {}", kind.as_str());
    let _ = writeln!(out, "input-sha256 {digest}");
    let _ = writeln!(out, "field {field}");
    let _ = writeln!(out, "claim strictly-lower-triangular");
    write_matrix(&mut out, "U", u);
    write_matrix(&mut out, "U_inv", u_inv);
    out
}

fn tri_state(v: Option<bool>) -> &'static str {
    match v {
        None => "na",
        Some(true) => "true",
        Some(false) => "false",
    }
}

pub fn suite_certificate(digest: &str, field: FieldSpec, r: &SquareZeroReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind jh2-suite");
    let _ = writeln!(out, "input-sha256 {digest}");
    let _ = writeln!(out, "field {field}");
    let _ = writeln!(out, "claim square-zero {}", r.square_zero);
    let _ = writeln!(out, "claim anticommute {}", tri_state(r.anticommute));
    let _ = writeln!(out, "claim pair-product-zero {}", tri_state(r.pair_product_zero));
    let _ = writeln!(
        out,
        "claim triple-product-zero {}",
        tri_state(r.triple_product_zero)
    );
    out
}

pub fn parse_certificate(text: &str) -> Result<Certificate, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let mut kind = None;
    let mut input_sha256 = None;
    let mut field = None;
    let mut tag = None;
    let mut claims = BTreeMap::new();
    let mut matrices = BTreeMap::new();

    while let Some((ln, line)) = lines.next() {
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "kind" => {
                kind = Some(
                    CertKind::parse(rest.trim())
                        .ok_or(format!("line {ln}: unknown certificate kind"))?,
                );
            }
            "input-sha256" => input_sha256 = Some(rest.trim().to_string()),
            "field" => {
                field = Some(
                    rest.trim()
                        .parse::<FieldSpec>()
                        .map_err(|e| format!("line {ln}: {e}"))?,
                );
            }
            "tag" => {
                tag = Some(
                    rest.trim()
                        .parse::<NormalFormTag>()
                        .map_err(|e| format!("line {ln}: {e}"))?,
                );
            }
            "claim" => {
                let (k, v) = rest
                    .trim()
                    .split_once(' ')
                    .map(|(a, b)| (a.to_string(), b.trim().to_string()))
                    .unwrap_or((rest.trim().to_string(), "true".to_string()));
                claims.insert(k, v);
            }
            "S" | "S_inv" | "T" | "T_inv" | "U" | "U_inv" => {
                let f = field.ok_or(format!("line {ln}: matrix before the field line"))?;
                let dims: Vec<&str> = rest.split_whitespace().collect();
                if dims.len() != 2 {
                    return Err(format!("line {ln}: expected `{key} rows cols`"));
                }
                let rows: usize = dims[0]
                    .parse()
                    .map_err(|_| format!("line {ln}: bad row count"))?;
                let cols: usize = dims[1]
                    .parse()
                    .map_err(|_| format!("line {ln}: bad column count"))?;
                let mut entries = Vec::with_capacity(rows);
                for _ in 0..rows {
                    let (rln, row_line) =
                        lines.next().ok_or(format!("truncated matrix `{key}`"))?;
                    let cells: Vec<&str> = row_line.split(',').collect();
                    if cells.len() != cols {
                        return Err(format!("line {rln}: expected {cols} entries"));
                    }
                    let mut row = Vec::with_capacity(cols);
                    for cell in cells {
                        row.push(parse_scalar(cell.trim(), f).map_err(|e| format!("line {rln}: {e}"))?);
                    }
                    entries.push(row);
                }
                matrices.insert(key.to_string(), ConstMatrix::from_rows(f, entries));
            }
            _ => return Err(format!("line {ln}: unexpected `{key}`")),
        }
    }
    Ok(Certificate {
        kind: kind.ok_or("missing `kind` line")?,
        input_sha256: input_sha256.ok_or("missing `input-sha256` line")?,
        field: field.ok_or("missing `field` line")?,
        tag,
        claims,
        matrices,
    })
}

/// Scalars in certificates use the polynomial grammar restricted to
/// constants: `int` or `int/int`, possibly signed.
fn parse_scalar(text: &str, field: FieldSpec) -> Result<Scalar, String> {
    let p = Poly::parse(text, field, 0).map_err(|e| e.to_string())?;
    if !p.is_constant() {
        return Err(format!("`{text}` is not a constant"));
    }
    Ok(p.constant_coeff())
}
