//! Constructive triangularization of nilpotent degree-one Jacobian matrices
//! of rank at most two, plus the product identities that hold once the
//! square of the Jacobian matrix vanishes.
//!
//! The pipeline classifies J(H), reduces to a small leading block (size 2
//! or 3) whose constant part is brought to one of four patterns, and
//! assembles block conjugators back into a certificate U with U^-1 J(H) U
//! strictly lower triangular. Every certificate is re-verified by plain
//! multiplication before it is returned.
//!
//! For non-Jacobian inputs the reduction can hit a genuinely
//! non-triangularizable tridiagonal family [[0, f+1, 0], [b, 0, f+1],
//! [0, -b, 0]]; reaching it from a Jacobian input is impossible, so the
//! pipeline treats that as an internal contradiction and reports it loudly
//! with a reproduction payload.

use crate::classify::{self, NormalFormTag};
use crate::degmat::{fresh_tuples, DegOneMatrix, StrongNilpotence};
use crate::error::Error;

use crate::jacobian::QuadMap;
use crate::linmat::ConstMatrix;
use crate::poly::Poly;

/// The four small-block constant patterns handled by the reduction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockCase {
    /// 2x2 with zero constant part.
    Zero2,
    /// 2x2 with constant part E_{2,1}.
    Unit2,
    /// 3x3 with constant part E_{1,3}.
    Corner3,
    /// 3x3 with constant part E_{1,2} + E_{2,3}.
    Chain3,
}

impl BlockCase {
    fn expected_constant(self, m: &DegOneMatrix) -> bool {
        let f = m.field();
        let c = m.constant_part();
        let want = match self {
            BlockCase::Zero2 => ConstMatrix::zeros(f, 2, 2),
            BlockCase::Unit2 => ConstMatrix::from_ints(f, &[&[0, 0], &[1, 0]]),
            BlockCase::Corner3 => {
                ConstMatrix::from_ints(f, &[&[0, 0, 1], &[0, 0, 0], &[0, 0, 0]])
            }
            BlockCase::Chain3 => {
                ConstMatrix::from_ints(f, &[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]])
            }
        };
        *c == want
    }

    fn size(self) -> usize {
        match self {
            BlockCase::Zero2 | BlockCase::Unit2 => 2,
            BlockCase::Corner3 | BlockCase::Chain3 => 3,
        }
    }
}

/// Outcome of a small-block reduction.
#[derive(Clone, Debug)]
pub enum BlockOutcome {
    /// `conjugator^-1 * N * conjugator` is strictly lower triangular.
    Triangular {
        case: BlockCase,
        conjugator: ConstMatrix,
    },
    /// `conjugator^-1 * N * conjugator` equals the tridiagonal family
    /// [[0, f+1, 0], [b, 0, f+1], [0, -b, 0]] with b nonzero, which is
    /// nilpotent but not similar over K to a triangular matrix.
    Tridiagonal {
        conjugator: ConstMatrix,
        f: Poly,
        b: Poly,
    },
}

fn precondition(ok: bool, msg: &str) -> Result<(), Error> {
    if ok {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(msg.to_string()))
    }
}

fn repro_matrix(m: &DegOneMatrix) -> String {
    format!(
        "field {}\nvars {}\nmatrix {} {}\n{}",
        m.field(),
        m.nvars(),
        m.rows(),
        m.cols(),
        m
    )
}

fn forced(cond: bool, context: &str, n: &DegOneMatrix) -> Result<(), Error> {
    if cond {
        Ok(())
    } else {
        Err(Error::contradiction(context.to_string(), repro_matrix(n)))
    }
}

/// Reduce a nilpotent 2x2 or 3x3 block whose constant part matches `case`.
pub fn small_block_case(n: &DegOneMatrix, case: BlockCase) -> Result<BlockOutcome, Error> {
    let field = n.field();
    let k = case.size();
    precondition(n.rows() == k && n.cols() == k, "block has the wrong size")?;
    precondition(n.is_nilpotent(), "block is not nilpotent")?;
    precondition(
        case.expected_constant(n),
        "constant part does not match the case",
    )?;
    match case {
        BlockCase::Zero2 => {
            // trace and determinant force N = a * N0 for a constant rank-1
            // N0, so the constant-kernel recursion must succeed
            match n.strongly_nilpotent_triangularize() {
                StrongNilpotence::Triangularizable { u, .. } => Ok(BlockOutcome::Triangular {
                    case,
                    conjugator: u,
                }),
                StrongNilpotence::NotTriangularizable { .. } => Err(Error::contradiction(
                    "nilpotent 2x2 block with zero constant part has no constant kernel",
                    repro_matrix(n),
                )),
            }
        }
        BlockCase::Unit2 => {
            // the determinant condition forces strict lower triangularity
            for (i, j) in [(0usize, 0usize), (0, 1), (1, 1)] {
                forced(
                    n.entry_is_zero(i, j),
                    "unit-constant 2x2 block is not strictly lower triangular",
                    n,
                )?;
            }
            Ok(BlockOutcome::Triangular {
                case,
                conjugator: ConstMatrix::identity(field, 2),
            })
        }
        BlockCase::Corner3 => {
            forced(
                n.entry_is_zero(2, 0),
                "corner case: entry (3, 1) must vanish",
                n,
            )?;
            let b_zero = n.entry_is_zero(1, 0);
            let c_zero = n.entry_is_zero(2, 1);
            forced(
                b_zero || c_zero,
                "corner case: the product of the two subdiagonal entries must vanish",
                n,
            )?;
            if b_zero {
                // block split {1} + {2, 3}
                forced(n.entry_is_zero(0, 0), "corner case: 1x1 block must vanish", n)?;
                let trailing = n.submatrix(1..3, 1..3);
                forced(
                    trailing.is_nilpotent(),
                    "corner case: trailing 2x2 block must be nilpotent",
                    n,
                )?;
                let v = match small_block_case(&trailing, BlockCase::Zero2)? {
                    BlockOutcome::Triangular { conjugator, .. } => conjugator,
                    BlockOutcome::Tridiagonal { .. } => unreachable!("2x2 case"),
                };
                let u1 = ConstMatrix::identity(field, 1).block_diag(&v);
                // reorder (2, 3, 1): the trailing block comes first
                let p = ConstMatrix::permutation(field, &[1, 2, 0]);
                Ok(BlockOutcome::Triangular {
                    case,
                    conjugator: u1.mul(&p),
                })
            } else {
                // block split {1, 2} + {3}
                forced(n.entry_is_zero(2, 2), "corner case: 1x1 block must vanish", n)?;
                let leading = n.submatrix(0..2, 0..2);
                forced(
                    leading.is_nilpotent(),
                    "corner case: leading 2x2 block must be nilpotent",
                    n,
                )?;
                let v = match small_block_case(&leading, BlockCase::Zero2)? {
                    BlockOutcome::Triangular { conjugator, .. } => conjugator,
                    BlockOutcome::Tridiagonal { .. } => unreachable!("2x2 case"),
                };
                let u1 = v.block_diag(&ConstMatrix::identity(field, 1));
                // reorder (3, 1, 2)
                let p = ConstMatrix::permutation(field, &[2, 0, 1]);
                Ok(BlockOutcome::Triangular {
                    case,
                    conjugator: u1.mul(&p),
                })
            }
        }
        BlockCase::Chain3 => {
            let b = n.entry(1, 0);
            forced(
                n.entry_is_zero(2, 0),
                "chain case: entry (3, 1) must vanish",
                n,
            )?;
            forced(
                n.entry(2, 1) == b.neg(),
                "chain case: entry (3, 2) must be the negated subdiagonal",
                n,
            )?;
            if b.is_zero() {
                // upper triangular; the diagonal is forced to vanish
                for i in 0..3 {
                    forced(
                        n.entry_is_zero(i, i),
                        "chain case: upper-triangular block must have zero diagonal",
                        n,
                    )?;
                }
                return Ok(BlockOutcome::Triangular {
                    case,
                    conjugator: ConstMatrix::reversal(field, 3),
                });
            }
            // a = c and b divides a with a constant ratio
            let a = n.entry(0, 0).neg();
            let c = n.entry(2, 2).neg();
            forced(a == c, "chain case: corner diagonal entries must agree", n)?;
            let mu = a.const_ratio_to(&b).ok_or_else(|| {
                Error::contradiction(
                    "chain case: diagonal is not a constant multiple of the subdiagonal",
                    repro_matrix(n),
                )
            })?;
            let mut t = ConstMatrix::identity(field, 3);
            t.set(0, 1, mu.neg());
            t.set(1, 2, mu.neg());
            let t_inv = t.invert().expect("unitriangular");
            let conj = n.conjugate(&t, &t_inv);
            // the conjugate is forced into the tridiagonal family
            forced(
                conj.entry_is_zero(0, 0)
                    && conj.entry_is_zero(1, 1)
                    && conj.entry_is_zero(2, 2)
                    && conj.entry_is_zero(0, 2)
                    && conj.entry_is_zero(2, 0),
                "chain case: cleaned block must be tridiagonal",
                n,
            )?;
            forced(
                conj.entry(0, 1) == conj.entry(1, 2),
                "chain case: the two superdiagonal entries must agree",
                n,
            )?;
            forced(
                conj.entry(1, 0) == b && conj.entry(2, 1) == b.neg(),
                "chain case: the subdiagonal must be preserved",
                n,
            )?;
            let f = conj
                .entry(0, 1)
                .sub(&Poly::one(field, n.nvars()));
            Ok(BlockOutcome::Tridiagonal {
                conjugator: t,
                f,
                b,
            })
        }
    }
}

/// A verified conjugator to strictly lower triangular form.
#[derive(Clone, Debug)]
pub struct TriangularizationCertificate {
    pub u: ConstMatrix,
    pub u_inv: ConstMatrix,
    /// Which reduction steps produced the factors of `u`.
    pub provenance: Vec<String>,
}

/// Conjugate the Jacobian matrix of a nilpotent rank-at-most-2 quadratic
/// map to strictly lower triangular form.
pub fn triangularize_rank_le2(h: &QuadMap) -> Result<TriangularizationCertificate, Error> {
    let m = h.jacobian();
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch);
    }
    if !m.is_nilpotent() {
        return Err(Error::NotNilpotent);
    }
    let rank = m.rank_symbolic();
    if rank > 2 {
        return Err(Error::RankTooHigh(rank));
    }
    let field = m.field();
    let n = m.rows();

    if m.is_strictly_lower() {
        return finish(
            &m,
            ConstMatrix::identity(field, n),
            vec!["already strictly lower triangular".into()],
        );
    }
    if m.is_constant() {
        let (p, _) = m.constant_part().nilpotent_jordan()?;
        let u = p.mul(&ConstMatrix::reversal(field, n));
        return finish(&m, u, vec!["constant matrix: jordan chain basis".into()]);
    }

    let report = classify::classify(&m)?;
    let mut prov = vec![format!("classified as {}", report.tag)];
    match report.tag {
        NormalFormTag::Rank0 => finish(&m, ConstMatrix::identity(field, n), prov),
        NormalFormTag::R1ColumnOnly | NormalFormTag::R1ColumnHalf | NormalFormTag::R2TwoColumns => {
            column_route(&m, &report, &mut prov)
        }
        NormalFormTag::R1RowOnly => {
            let w = m.apply_st(&report.tf.s, &report.tf.s_inv);
            forced(
                (1..n).all(|i| (0..n).all(|j| w.entry_is_zero(i, j))),
                "single-row shape must survive conjugation",
                &m,
            )?;
            forced(
                w.entry_is_zero(0, 0),
                "nilpotent single-row matrix must have zero corner",
                &m,
            )?;
            prov.push("single row: conjugate and reverse".into());
            let u = report.tf.s_inv.mul(&ConstMatrix::reversal(field, n));
            finish(&m, u, prov)
        }
        NormalFormTag::R2TwoRows | NormalFormTag::R2HookHalf => row_route(&m, &report, &mut prov),
        NormalFormTag::R2Hook => Err(Error::contradiction(
            "hook form without the Jacobian refinement for a Jacobian input",
            repro_matrix(&m),
        )),
        NormalFormTag::R2Antisym => Err(Error::contradiction(
            "nilpotent matrix classified into the antisymmetric form",
            repro_matrix(&m),
        )),
    }
}

/// Shapes supported on the first one or two columns: conjugating by T keeps
/// the column support, and the leading block is nilpotent.
fn column_route(
    m: &DegOneMatrix,
    report: &classify::ClassificationReport,
    prov: &mut Vec<String>,
) -> Result<TriangularizationCertificate, Error> {
    let field = m.field();
    let n = m.rows();
    let k = report.tag.expected_rank().max(1);
    let w = m.apply_st(&report.tf.t_inv, &report.tf.t);
    forced(
        (0..n).all(|i| (k..n).all(|j| w.entry_is_zero(i, j))),
        "column support must survive conjugation by T",
        m,
    )?;
    if k == 1 {
        forced(
            w.entry_is_zero(0, 0),
            "nilpotent single-column matrix must have zero corner",
            m,
        )?;
        prov.push("single column: conjugate by T".into());
        return finish(m, report.tf.t.clone(), prov.clone());
    }
    let block = w.submatrix(0..2, 0..2);
    forced(block.is_nilpotent(), "leading 2x2 block must be nilpotent", m)?;
    let v = reduce_block_2(&block, m, prov)?;
    let u = report
        .tf
        .t
        .mul(&v.block_diag(&ConstMatrix::identity(field, n - 2)));
    prov.push("assembled the 2x2 block conjugator".into());
    finish(m, u, prov.clone())
}

fn reduce_block_2(
    block: &DegOneMatrix,
    m: &DegOneMatrix,
    prov: &mut Vec<String>,
) -> Result<ConstMatrix, Error> {
    let field = block.field();
    match block.constant_part().rank() {
        0 => {
            prov.push("2x2 block with zero constant part".into());
            match small_block_case(block, BlockCase::Zero2)? {
                BlockOutcome::Triangular { conjugator, .. } => Ok(conjugator),
                BlockOutcome::Tridiagonal { .. } => unreachable!("2x2 case"),
            }
        }
        1 => {
            let (p, _) = block.constant_part().nilpotent_jordan().map_err(|_| {
                Error::contradiction(
                    "constant part of a nilpotent block is not nilpotent",
                    repro_matrix(m),
                )
            })?;
            let p = p.mul(&ConstMatrix::permutation(field, &[1, 0]));
            let p_inv = p.invert().expect("jordan basis");
            let conj = block.conjugate(&p, &p_inv);
            prov.push("2x2 block normalized to the unit constant".into());
            match small_block_case(&conj, BlockCase::Unit2)? {
                BlockOutcome::Triangular { conjugator, .. } => Ok(p.mul(&conjugator)),
                BlockOutcome::Tridiagonal { .. } => unreachable!("2x2 case"),
            }
        }
        r => Err(Error::contradiction(
            format!("nilpotent 2x2 block with constant rank {r}"),
            repro_matrix(m),
        )),
    }
}

/// Shapes supported on the first at-most-three rows: conjugating by S^-1
/// keeps the row support; the leading block of size min(3, n) is nilpotent
/// and its constant rank drives the case split. A variable shift escapes
/// constant rank zero; shifts commute with everything constant, so the
/// final conjugator is valid for the unshifted input.
fn row_route(
    m: &DegOneMatrix,
    report: &classify::ClassificationReport,
    prov: &mut Vec<String>,
) -> Result<TriangularizationCertificate, Error> {
    let field = m.field();
    let n = m.rows();
    let k = n.min(3);
    let mut w = m.apply_st(&report.tf.s, &report.tf.s_inv);
    forced(
        (k..n).all(|i| (0..n).all(|j| w.entry_is_zero(i, j))),
        "row support must survive conjugation by S",
        m,
    )?;

    // escape constant rank zero of the leading block by shifting a variable
    // that occurs in it
    let mut shifted = 0;
    loop {
        let block = w.submatrix(0..k, 0..k);
        if block.is_zero() || !block.constant_part().is_zero() {
            break;
        }
        let v = (0..m.nvars())
            .find(|&v| !block.coeff(v).is_zero())
            .expect("nonzero block mentions a variable");
        let mut c = vec![field.zero(); m.nvars()];
        c[v] = field.one();
        w = w.shift_vars(&c);
        shifted += 1;
        if shifted > m.nvars() + 1 {
            return Err(Error::contradiction(
                "variable shifts failed to raise the constant rank",
                repro_matrix(m),
            ));
        }
    }
    if shifted > 0 {
        prov.push(format!("shifted {shifted} variable(s) to expose a constant part"));
    }

    let block = w.submatrix(0..k, 0..k);
    let v_conj = if block.is_zero() {
        prov.push("leading block vanishes".into());
        ConstMatrix::identity(field, k)
    } else {
        forced(block.is_nilpotent(), "leading block must be nilpotent", m)?;
        match (k, block.constant_part().rank()) {
            (2, _) => reduce_block_2(&block, m, prov)?,
            (3, 1) => {
                let (p, blocks) = block.constant_part().nilpotent_jordan().unwrap();
                debug_assert_eq!(blocks, vec![2, 1]);
                // jordan puts the unit at (1, 2); move it to the corner (1, 3)
                let p = p.mul(&ConstMatrix::permutation(field, &[0, 2, 1]));
                let p_inv = p.invert().expect("jordan basis");
                let conj = block.conjugate(&p, &p_inv);
                prov.push("3x3 block normalized to the corner constant".into());
                match small_block_case(&conj, BlockCase::Corner3)? {
                    BlockOutcome::Triangular { conjugator, .. } => p.mul(&conjugator),
                    BlockOutcome::Tridiagonal { .. } => unreachable!("corner case"),
                }
            }
            (3, 2) => {
                let (p, blocks) = block.constant_part().nilpotent_jordan().unwrap();
                debug_assert_eq!(blocks, vec![3]);
                let p_inv = p.invert().expect("jordan basis");
                let conj = block.conjugate(&p, &p_inv);
                prov.push("3x3 block normalized to the chain constant".into());
                match small_block_case(&conj, BlockCase::Chain3)? {
                    BlockOutcome::Triangular { case, conjugator } => {
                        debug_assert_eq!(case, BlockCase::Chain3);
                        p.mul(&conjugator)
                    }
                    BlockOutcome::Tridiagonal { .. } => {
                        // impossible for Jacobian inputs; this is the
                        // falsification alarm
                        return Err(Error::contradiction(
                            "Jacobian input reached the non-triangularizable tridiagonal family",
                            repro_matrix(m),
                        ));
                    }
                }
            }
            (kk, r) => {
                return Err(Error::contradiction(
                    format!("unexpected leading block: size {kk}, constant rank {r}"),
                    repro_matrix(m),
                ));
            }
        }
    };

    // assemble: conjugate the block, then move the zero tail in front
    let mut u = report
        .tf
        .s_inv
        .mul(&v_conj.block_diag(&ConstMatrix::identity(field, n - k)));
    if n > k {
        let order: Vec<usize> = (k..n).chain(0..k).collect();
        u = u.mul(&ConstMatrix::permutation(field, &order));
        prov.push("moved the zero tail in front of the block".into());
    }
    finish(m, u, prov.clone())
}

/// Verify the certificate by independent multiplication and package it.
fn finish(
    m: &DegOneMatrix,
    u: ConstMatrix,
    provenance: Vec<String>,
) -> Result<TriangularizationCertificate, Error> {
    let u_inv = u
        .invert()
        .map_err(|_| Error::contradiction("conjugator is singular", repro_matrix(m)))?;
    let conj = m.conjugate(&u, &u_inv);
    if !conj.is_strictly_lower() {
        return Err(Error::contradiction(
            "conjugate is not strictly lower triangular",
            repro_matrix(m),
        ));
    }
    Ok(TriangularizationCertificate {
        u,
        u_inv,
        provenance,
    })
}

/// True iff the product of `m` evaluated at `k` disjoint tuples of fresh
/// indeterminates vanishes identically. This is the symbolic stand-in for
/// evaluating over all points of an infinite extension field.
pub fn generic_product_vanishes(m: &DegOneMatrix, k: usize) -> bool {
    assert!(k >= 1);
    assert_eq!(m.rows(), m.cols());
    let tuples = fresh_tuples(m.field(), m.nvars(), k);
    let mut prod = m.evaluate(&tuples[0]);
    for t in &tuples[1..] {
        if prod.is_zero() {
            return true;
        }
        prod = prod.mul(&m.evaluate(t));
    }
    prod.is_zero()
}

/// Identities satisfied by J(H) once its square vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareZeroReport {
    pub square_zero: bool,
    /// M(y) M(x) = -M(x) M(y) with a fresh tuple y; holds in every
    /// characteristic when the square vanishes.
    pub anticommute: Option<bool>,
    /// M(x) M(y) = 0; requires 1/2 in K and H homogeneous.
    pub pair_product_zero: Option<bool>,
    /// M(x) M(y) M(z) = 0; requires 1/2 in K.
    pub triple_product_zero: Option<bool>,
}

/// Check J(H)^2 = 0 and the product identities within their hypotheses;
/// identities outside their hypotheses are reported as `None`.
pub fn square_zero_suite(h: &QuadMap) -> SquareZeroReport {
    let m = h.jacobian();
    assert_eq!(m.rows(), m.cols(), "the suite needs a square Jacobian matrix");
    let field = h.field();
    let n = h.nvars();
    let pm = m.to_poly_matrix();
    let square_zero = pm.mul(&pm).is_zero();
    if !square_zero {
        return SquareZeroReport {
            square_zero,
            anticommute: None,
            pair_product_zero: None,
            triple_product_zero: None,
        };
    }
    let tuples = fresh_tuples(field, n, 3);
    let mx = m.evaluate(&tuples[0]);
    let my = m.evaluate(&tuples[1]);
    let mz = m.evaluate(&tuples[2]);
    let xy = mx.mul(&my);
    let anticommute = Some(my.mul(&mx) == xy.neg());
    let pair_product_zero = (field.has_half() && h.is_homogeneous()).then(|| xy.is_zero());
    let triple_product_zero = field.has_half().then(|| xy.mul(&mz).is_zero());
    SquareZeroReport {
        square_zero,
        anticommute,
        pair_product_zero,
        triple_product_zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::field::FieldSpec;
    use rand::SeedableRng;

    fn q() -> FieldSpec {
        FieldSpec::Rationals
    }

    fn gf(p: u32) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn obstruction(field: FieldSpec, f: &str, b: &str) -> DegOneMatrix {
        let fp1 = format!("{f} + 1");
        let nb = format!("0 - {b}");
        DegOneMatrix::parse_entries(
            field,
            3,
            &[&["0", &fp1, "0"], &[b, "0", &fp1], &["0", &nb, "0"]],
        )
        .unwrap()
    }

    // Oracle: trace = det = 0 by inspection, so the block is nilpotent by
    // Cayley-Hamilton; its kernel direction is (2, -1).
    #[test]
    fn zero_constant_2x2_case() {
        let n = DegOneMatrix::parse_entries(
            q(),
            1,
            &[&["x1", "2*x1"], &["0 - 1/2*x1", "0 - x1"]],
        )
        .unwrap();
        match small_block_case(&n, BlockCase::Zero2).unwrap() {
            BlockOutcome::Triangular { conjugator, .. } => {
                let inv = conjugator.invert().unwrap();
                assert!(n.conjugate(&conjugator, &inv).is_strictly_lower());
            }
            _ => panic!("expected a conjugator"),
        }
    }

    #[test]
    fn unit_constant_2x2_case() {
        let n = DegOneMatrix::parse_entries(q(), 2, &[&["0", "0"], &["x1 + 1", "0"]]).unwrap();
        match small_block_case(&n, BlockCase::Unit2).unwrap() {
            BlockOutcome::Triangular { conjugator, .. } => assert!(conjugator.is_identity()),
            _ => panic!(),
        }
        // nonzero diagonal violates the case precondition (not nilpotent)
        let bad = DegOneMatrix::parse_entries(q(), 2, &[&["x1", "0"], &["x2 + 1", "0 - x1"]])
            .unwrap();
        assert!(small_block_case(&bad, BlockCase::Unit2).is_err());
    }

    #[test]
    fn chain_case_yields_the_tridiagonal_family() {
        let n = obstruction(q(), "x1", "x2");
        match small_block_case(&n, BlockCase::Chain3).unwrap() {
            BlockOutcome::Tridiagonal { f, b, conjugator } => {
                assert_eq!(f, Poly::parse("x1", q(), 3).unwrap());
                assert_eq!(b, Poly::parse("x2", q(), 3).unwrap());
                assert!(conjugator.is_identity());
            }
            _ => panic!("expected the tridiagonal outcome"),
        }
    }

    #[test]
    fn chain_case_upper_triangular() {
        let n = DegOneMatrix::parse_entries(
            q(),
            1,
            &[&["0", "x1 + 1", "x1"], &["0", "0", "1"], &["0", "0", "0"]],
        )
        .unwrap();
        match small_block_case(&n, BlockCase::Chain3).unwrap() {
            BlockOutcome::Triangular { conjugator, .. } => {
                let inv = conjugator.invert().unwrap();
                assert!(n.conjugate(&conjugator, &inv).is_strictly_lower());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn already_triangular_map_gets_the_identity() {
        let h = QuadMap::parse(q(), 4, &["0", "x1", "x1^2", "x1*x2 - 1/2*x3"]).unwrap();
        let cert = triangularize_rank_le2(&h).unwrap();
        assert!(cert.u.is_identity());
    }

    #[test]
    fn constant_jacobian_reduces_to_jordan() {
        let h = QuadMap::parse(q(), 3, &["x2", "x3", "0"]).unwrap();
        let cert = triangularize_rank_le2(&h).unwrap();
        let m = h.jacobian();
        assert!(m.conjugate(&cert.u, &cert.u_inv).is_strictly_lower());
        assert!(cert.provenance.iter().any(|s| s.contains("jordan")));
    }

    #[test]
    fn non_nilpotent_input_is_rejected() {
        let h = QuadMap::parse(q(), 2, &["x1^2", "x2"]).unwrap();
        assert!(matches!(
            triangularize_rank_le2(&h),
            Err(Error::NotNilpotent)
        ));
    }

    // Two nonzero rows supported entirely in late columns: the leading
    // block of the conjugated matrix vanishes and the tail permutation
    // alone finishes the job.
    #[test]
    fn row_support_in_late_columns() {
        let h = QuadMap::parse(q(), 5, &["x4*x5", "1/2*x4^2", "0", "0", "0"]).unwrap();
        let m = h.jacobian();
        assert_eq!(m.rank_symbolic(), 2);
        let cert = triangularize_rank_le2(&h).unwrap();
        assert!(m.conjugate(&cert.u, &cert.u_inv).is_strictly_lower());
        assert!(!cert.u.is_identity());
    }

    #[test]
    fn conjugated_triangular_maps_triangularize() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        for field in families::TEST_FIELDS {
            for _ in 0..10 {
                let (h, _) = families::conjugated_triangular_jacobian(field, 4, &mut rng);
                let m = h.jacobian();
                let cert = triangularize_rank_le2(&h).unwrap_or_else(|e| {
                    panic!("triangularization failed over {field}: {e}")
                });
                assert!(m.conjugate(&cert.u, &cert.u_inv).is_strictly_lower());
            }
        }
    }

    #[test]
    fn generic_products_of_lower_triangular_rank2() {
        let h = QuadMap::parse(q(), 4, &["0", "x1", "x1^2", "x1*x2 - 1/2*x3"]).unwrap();
        let m = h.jacobian();
        assert_eq!(m.rank_symbolic(), 2);
        assert!(generic_product_vanishes(&m, 3));
    }

    // Oracle: the threefold product of the obstruction family has a nonzero
    // entry, matching its failure to be strongly nilpotent.
    #[test]
    fn generic_products_of_the_obstruction() {
        let n = obstruction(q(), "x1", "x2");
        assert!(n.is_nilpotent());
        assert!(!generic_product_vanishes(&n, 3));
        assert!(!n.strongly_nilpotent_triangularize().is_triangularizable());
    }

    #[test]
    fn strong_nilpotence_matches_generic_products() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        for field in [q(), gf(3)] {
            for _ in 0..15 {
                let m = families::random_degone(field, 3, 3, 2, &mut rng);
                let sn = m.strongly_nilpotent_triangularize().is_triangularizable();
                assert_eq!(sn, generic_product_vanishes(&m, 3));
            }
        }
    }

    #[test]
    fn square_zero_suite_on_the_inhomogeneous_example() {
        let h = QuadMap::parse(q(), 4, &["0", "x1", "x1^2", "x1*x2 - 1/2*x3"]).unwrap();
        let r = square_zero_suite(&h);
        assert!(r.square_zero);
        assert_eq!(r.anticommute, Some(true));
        assert_eq!(r.pair_product_zero, None, "inhomogeneous map");
        assert_eq!(r.triple_product_zero, Some(true));
        // the pair product is genuinely nonzero here
        let m = h.jacobian();
        let t = fresh_tuples(q(), 4, 2);
        assert!(!m.evaluate(&t[0]).mul(&m.evaluate(&t[1])).is_zero());
    }

    #[test]
    fn square_zero_suite_on_the_char2_example() {
        let h = QuadMap::parse(
            gf(2),
            7,
            &[
                "0",
                "0",
                "0",
                "x2*x3",
                "x3*x1",
                "x1*x2",
                "x1*x4 + x2*x5 + x3*x6",
            ],
        )
        .unwrap();
        let r = square_zero_suite(&h);
        assert!(r.square_zero);
        assert_eq!(r.anticommute, Some(true));
        assert_eq!(r.pair_product_zero, None);
        assert_eq!(r.triple_product_zero, None, "no 1/2 in characteristic 2");
        // the pair product is nonzero even though the map is homogeneous,
        // which is exactly what fails without 1/2; every pair product is
        // supported in the first three columns, so triple products vanish
        let m = h.jacobian();
        let t = fresh_tuples(gf(2), 7, 2);
        assert!(!m.evaluate(&t[0]).mul(&m.evaluate(&t[1])).is_zero());
        assert!(generic_product_vanishes(&m, 3));
    }

    #[test]
    fn pair_product_vanishes_for_homogeneous_square_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
        for _ in 0..10 {
            let h = families::conjugated_square_zero_map(q(), 4, true, &mut rng);
            let r = square_zero_suite(&h);
            assert!(r.square_zero);
            assert_eq!(r.anticommute, Some(true));
            assert_eq!(r.pair_product_zero, Some(true));
            assert_eq!(r.triple_product_zero, Some(true));
        }
    }

    // The quadratic part of a square-zero map has vanishing pair products
    // away from characteristic 2, even when the map itself is inhomogeneous.
    #[test]
    fn quadratic_part_pair_products() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        for _ in 0..10 {
            let h = families::conjugated_square_zero_map(gf(5), 4, false, &mut rng);
            assert!(square_zero_suite(&h).square_zero);
            let hbar = h.quadratic_part();
            let m = hbar.jacobian();
            let t = fresh_tuples(gf(5), 4, 2);
            assert!(m.evaluate(&t[0]).mul(&m.evaluate(&t[1])).is_zero());
        }
    }

    #[test]
    fn block_assembly_preserves_zero_blocks() {
        // [[A, 0], [*, B]] conjugated by blockdiag(V, W) keeps the zero
        // block and the block positions
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(67);
        let field = gf(5);
        for _ in 0..10 {
            let m = DegOneMatrix::from_parts(
                ConstMatrix::from_fn(field, 4, 4, |i, j| {
                    if i < 2 && j >= 2 {
                        field.zero()
                    } else {
                        families::random_scalar(field, &mut rng)
                    }
                }),
                vec![ConstMatrix::from_fn(field, 4, 4, |i, j| {
                    if i < 2 && j >= 2 {
                        field.zero()
                    } else {
                        families::random_scalar(field, &mut rng)
                    }
                })],
            );
            let (v, v_inv) = families::random_gl(field, 2, &mut rng);
            let (w, w_inv) = families::random_gl(field, 2, &mut rng);
            let u = v.block_diag(&w);
            let u_inv = v_inv.block_diag(&w_inv);
            let conj = m.conjugate(&u, &u_inv);
            for i in 0..2 {
                for j in 2..4 {
                    assert!(conj.entry_is_zero(i, j));
                }
            }
            // diagonal blocks transform by their own conjugators
            assert_eq!(
                conj.submatrix(0..2, 0..2),
                m.submatrix(0..2, 0..2).conjugate(&v, &v_inv)
            );
            assert_eq!(
                conj.submatrix(2..4, 2..4),
                m.submatrix(2..4, 2..4).conjugate(&w, &w_inv)
            );
        }
    }
}
