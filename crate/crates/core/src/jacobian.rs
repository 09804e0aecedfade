//! Quadratic polynomial maps and the questions around their Jacobian
//! matrices: computing J(H), deciding whether a degree-one matrix is a
//! Jacobian matrix at all (and integrating it back to a map), integrating
//! symmetric matrices to a Hessian, and a brute-force oracle for algebraic
//! relations among components.
//!
//! In positive characteristic the map realizing a given Jacobian matrix is
//! not unique; integration always returns the minimal witness whose terms
//! all have visible derivatives, which keeps certificates deterministic.

use crate::classify::{self, NormalFormTag};
use crate::degmat::DegOneMatrix;
use crate::error::Error;
use crate::field::{FieldSpec, Scalar};
use crate::linmat::Transform;
use crate::poly::{Monomial, Poly};

/// A polynomial map K^n -> K^m with every component of degree at most 2.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadMap {
    field: FieldSpec,
    nvars: usize,
    components: Vec<Poly>,
}

impl QuadMap {
    pub fn new(field: FieldSpec, nvars: usize, components: Vec<Poly>) -> Result<Self, Error> {
        for (i, c) in components.iter().enumerate() {
            assert_eq!(c.field(), field);
            assert_eq!(c.nvars(), nvars);
            if !c.degree_at_most(2) {
                return Err(Error::DegreeTooHigh {
                    limit: 2,
                    row: i,
                    col: 0,
                });
            }
        }
        Ok(QuadMap {
            field,
            nvars,
            components,
        })
    }

    pub fn parse(field: FieldSpec, nvars: usize, exprs: &[&str]) -> Result<Self, Error> {
        let components = exprs
            .iter()
            .map(|s| Poly::parse(s, field, nvars))
            .collect::<Result<Vec<_>, _>>()?;
        QuadMap::new(field, nvars, components)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Poly::is_constant)
    }

    /// Homogeneous in the map sense: all nonzero components homogeneous of
    /// one common degree.
    pub fn is_homogeneous(&self) -> bool {
        let mut degree = None;
        for c in &self.components {
            if c.is_zero() {
                continue;
            }
            if !c.is_homogeneous() {
                return false;
            }
            match degree {
                None => degree = Some(c.total_degree()),
                Some(d) => {
                    if c.total_degree() != d {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The component-wise homogeneous part of degree 2.
    pub fn quadratic_part(&self) -> QuadMap {
        QuadMap {
            field: self.field,
            nvars: self.nvars,
            components: self
                .components
                .iter()
                .map(|c| c.homogeneous_part(2))
                .collect(),
        }
    }

    /// Drop constant terms so that H(0) = 0.
    pub fn normalized_at_origin(&self) -> QuadMap {
        QuadMap {
            field: self.field,
            nvars: self.nvars,
            components: self
                .components
                .iter()
                .map(|c| c.sub(&Poly::constant(self.field, self.nvars, c.constant_coeff())))
                .collect(),
        }
    }

    /// The matrix of partial derivatives, entry (i, j) = dH_i/dx_{j+1}.
    pub fn jacobian(&self) -> DegOneMatrix {
        let entries: Vec<Vec<Poly>> = self
            .components
            .iter()
            .map(|c| (0..self.nvars).map(|j| c.partial_derivative(j)).collect())
            .collect();
        DegOneMatrix::from_entries(self.field, self.nvars, &entries)
            .expect("derivative of a quadratic has degree at most one")
    }

    /// S * H(Tx). The chain rule gives J(S H(Tx)) = (S * J(H) * T)|_{x=Tx}
    /// exactly; see the tests.
    pub fn compose_linear(&self, tf: &Transform) -> QuadMap {
        assert_eq!(
            tf.s.cols(),
            self.target_dim(),
            "S width must match target dimension"
        );
        assert_eq!(tf.t.rows(), self.nvars, "T size must match source dimension");
        assert_eq!(tf.t.cols(), self.nvars);
        let tx: Vec<Poly> = (0..self.nvars)
            .map(|i| {
                let mut v = Poly::zero(self.field, self.nvars);
                for j in 0..self.nvars {
                    let c = tf.t.get(i, j);
                    if !c.is_zero() {
                        v = v.add(&Poly::var(self.field, self.nvars, j).scale(c));
                    }
                }
                v
            })
            .collect();
        let substituted: Vec<Poly> = self.components.iter().map(|c| c.substitute(&tx)).collect();
        let components = (0..tf.s.rows())
            .map(|i| {
                let mut acc = Poly::zero(self.field, self.nvars);
                for (j, s) in substituted.iter().enumerate() {
                    let c = tf.s.get(i, j);
                    if !c.is_zero() {
                        acc = acc.add(&s.scale(c));
                    }
                }
                acc
            })
            .collect();
        QuadMap {
            field: self.field,
            nvars: self.nvars,
            components,
        }
    }
}

impl std::fmt::Display for QuadMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            writeln!(f, "H{} = {}", i + 1, c)?;
        }
        Ok(())
    }
}

/// A successful integration of a degree-one matrix to a quadratic map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JacobianWitness {
    pub map: QuadMap,
}

/// Why a degree-one matrix is not a Jacobian matrix. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotJacobian {
    /// A Jacobian matrix has one column per variable.
    ShapeMismatch { cols: usize, nvars: usize },
    /// Coefficient of x_{k+1} in entry (i, j) differs from the coefficient
    /// of x_{j+1} in entry (i, k); no map has both partial derivatives.
    Asymmetric { i: usize, j: usize, k: usize },
    /// In characteristic 2 the coefficient of x_{j+1} in entry (i, j) has
    /// no antiderivative.
    CharTwoDiagonal { i: usize, j: usize },
}

/// Decide whether `m` is the Jacobian matrix of some quadratic map and
/// return the minimal witness when it is.
pub fn is_jacobian(m: &DegOneMatrix) -> Result<JacobianWitness, NotJacobian> {
    let field = m.field();
    let n = m.nvars();
    if m.cols() != n {
        return Err(NotJacobian::ShapeMismatch {
            cols: m.cols(),
            nvars: n,
        });
    }
    let char_two = !field.has_half();
    // c[i][j][k] = coefficient of x_{k+1} in entry (i, j)
    for i in 0..m.rows() {
        for j in 0..n {
            if char_two && !m.coeff(j).get(i, j).is_zero() {
                return Err(NotJacobian::CharTwoDiagonal { i, j });
            }
            for k in j + 1..n {
                if m.coeff(k).get(i, j) != m.coeff(j).get(i, k) {
                    return Err(NotJacobian::Asymmetric { i, j, k });
                }
            }
        }
    }
    // Build the witness: linear part from the constant coefficient matrix,
    // quadratic part from the symmetric tensor.
    let half = field.half();
    let mut components = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let mut h = Poly::zero(field, n);
        for j in 0..n {
            let lin = m.constant_part().get(i, j);
            if !lin.is_zero() {
                h = h.add(&Poly::var(field, n, j).scale(lin));
            }
            for k in j..n {
                let c = m.coeff(k).get(i, j);
                if c.is_zero() {
                    continue;
                }
                let mut e = vec![0u16; n];
                e[j] += 1;
                e[k] += 1;
                let coeff = if j == k {
                    // only reachable when 1/2 exists
                    c.mul(half.as_ref().expect("square term needs 1/2"))
                } else {
                    c.clone()
                };
                h = h.add(&Poly::from_terms(field, n, [(Monomial(e), coeff)]));
            }
        }
        components.push(h);
    }
    let map = QuadMap::new(field, n, components).expect("witness is quadratic");
    debug_assert_eq!(&map.jacobian(), m, "witness must differentiate back");
    Ok(JacobianWitness { map })
}

/// Why a symmetric degree-one matrix fails to be a Hessian matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotIntegrable {
    NotSymmetric { i: usize, j: usize },
    /// Diagonal entry (i, i) contains a term whose integration factor
    /// vanishes in this characteristic.
    DiagonalEntry { i: usize },
    /// No polynomial of degree at most 3 has this Hessian.
    Unsolvable,
}

/// The Hessian matrix of `h` (entries of degree <= 1 when deg h <= 3).
pub fn hessian(h: &Poly) -> DegOneMatrix {
    let n = h.nvars();
    let entries: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            let di = h.partial_derivative(i);
            (0..n).map(|j| di.partial_derivative(j)).collect()
        })
        .collect();
    DegOneMatrix::from_entries(h.field(), n, &entries)
        .expect("second derivatives have degree <= 1")
}

/// Find h of degree <= 3 with Hessian(h) = m, choosing the witness with no
/// invisible terms (all free coefficients zero).
pub fn hessian_integrate(m: &DegOneMatrix) -> Result<Poly, NotIntegrable> {
    let field = m.field();
    let n = m.nvars();
    assert_eq!(m.rows(), m.cols(), "a Hessian is square");
    assert_eq!(m.cols(), n, "a Hessian has one column per variable");
    for i in 0..n {
        for j in i + 1..n {
            if m.entry(i, j) != m.entry(j, i) {
                return Err(NotIntegrable::NotSymmetric { i, j });
            }
        }
    }
    let p = field.characteristic();
    for i in 0..n {
        let diag = m.entry(i, i);
        let violated = match p {
            2 => !diag.is_zero(),
            3 => !diag.linear_coeff(i).is_zero(),
            _ => false,
        };
        if violated {
            return Err(NotIntegrable::DiagonalEntry { i });
        }
    }

    // Unknowns: coefficients of all monomials of degree 2 and 3. Equations:
    // each coefficient (constant and linear) of each upper-triangle entry.
    let unknowns = monomials_of_degrees(n, &[2, 3]);
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut rhs: Vec<Scalar> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let target = m.entry(i, j);
            // one equation per possible monomial of the entry: 1, x1..xn
            for t in 0..=n {
                let mut row = Vec::with_capacity(unknowns.len());
                for mono in &unknowns {
                    row.push(second_derivative_coeff(field, mono, i, j, t));
                }
                rows.push(row);
                rhs.push(if t == 0 {
                    target.constant_coeff()
                } else {
                    target.linear_coeff(t - 1)
                });
            }
        }
    }
    let a = crate::linmat::ConstMatrix::from_rows(field, rows);
    let x = a.solve(&rhs).ok_or(NotIntegrable::Unsolvable)?;
    let h = Poly::from_terms(field, n, unknowns.into_iter().zip(x));
    debug_assert_eq!(&hessian(&h), m, "integration must differentiate back");
    Ok(h)
}

/// Coefficient of the monomial `1` (t = 0) or `x_t` (t >= 1) in the second
/// derivative d^2(x^mono)/dx_i dx_j.
fn second_derivative_coeff(
    field: FieldSpec,
    mono: &Monomial,
    i: usize,
    j: usize,
    t: usize,
) -> Scalar {
    let mut e = mono.0.clone();
    let fi = e[i];
    if fi == 0 {
        return field.zero();
    }
    e[i] -= 1;
    let fj = e[j];
    if fj == 0 {
        return field.zero();
    }
    e[j] -= 1;
    let matches = if t == 0 {
        e.iter().all(|&v| v == 0)
    } else {
        e.iter()
            .enumerate()
            .all(|(k, &v)| v == if k == t - 1 { 1 } else { 0 })
    };
    if !matches {
        return field.zero();
    }
    Scalar::from_int(field, fi as i64).mul(&Scalar::from_int(field, fj as i64))
}

fn monomials_of_degrees(nvars: usize, degrees: &[usize]) -> Vec<Monomial> {
    let mut out = Vec::new();
    for &d in degrees {
        let mut cur = vec![0u16; nvars];
        gen_monomials(nvars, d, 0, &mut cur, &mut out);
    }
    out
}

fn gen_monomials(
    nvars: usize,
    left: usize,
    at: usize,
    cur: &mut Vec<u16>,
    out: &mut Vec<Monomial>,
) {
    if nvars == 0 {
        if left == 0 {
            out.push(Monomial(cur.clone()));
        }
        return;
    }
    if at + 1 == nvars {
        cur[at] = left as u16;
        out.push(Monomial(cur.clone()));
        cur[at] = 0;
        return;
    }
    for e in 0..=left {
        cur[at] = e as u16;
        gen_monomials(nvars, left - e, at + 1, cur, out);
    }
    cur[at] = 0;
}

/// All monomials of total degree <= d in `nvars` variables, ascending.
pub fn monomials_up_to(nvars: usize, d: usize) -> Vec<Monomial> {
    let degs: Vec<usize> = (0..=d).collect();
    let mut out = monomials_of_degrees(nvars, &degs);
    out.sort();
    out
}

/// Result of the bounded-degree relation search.
#[derive(Clone, Debug)]
pub enum Annihilator {
    /// A nonzero f with f(H_subset) = 0, leading coefficient 1.
    Relation(Poly),
    NoRelationUpTo(usize),
}

/// Look for a nonzero polynomial relation of degree <= `d` among the chosen
/// components (0-based indices), by solving the linear system the monomial
/// expansion induces on coefficients. Among the reduced kernel basis the
/// relation with the fewest terms is returned, ties broken by term order.
pub fn annihilator_search(h: &QuadMap, subset: &[usize], d: usize) -> Annihilator {
    assert!(d >= 1, "degree bound must be positive");
    assert!(!subset.is_empty(), "subset must be nonempty");
    let field = h.field();
    let k = subset.len();
    let y_monos = monomials_up_to(k, d);

    // image of each y-monomial under y_i -> H_{subset[i]}
    let mut powers: Vec<Vec<Poly>> = subset
        .iter()
        .map(|&ci| vec![Poly::one(field, h.nvars()), h.component(ci).clone()])
        .collect();
    let images: Vec<Poly> = y_monos
        .iter()
        .map(|mono| {
            let mut acc = Poly::one(field, h.nvars());
            for (i, &e) in mono.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(h.component(subset[i]));
                    powers[i].push(next);
                }
                if e > 0 {
                    acc = acc.mul(&powers[i][e as usize]);
                }
            }
            acc
        })
        .collect();

    // coefficient matrix: rows indexed by x-monomials, one column per y-monomial
    let mut x_monos: std::collections::BTreeMap<Monomial, usize> = Default::default();
    for img in &images {
        for (m, _) in img.terms() {
            let next = x_monos.len();
            x_monos.entry(m.clone()).or_insert(next);
        }
    }
    let mut a = crate::linmat::ConstMatrix::zeros(field, x_monos.len().max(1), y_monos.len());
    for (col, img) in images.iter().enumerate() {
        for (m, c) in img.terms() {
            a.set(x_monos[m], col, c.clone());
        }
    }
    let kernel = a.kernel_basis();
    if kernel.is_empty() {
        return Annihilator::NoRelationUpTo(d);
    }
    let mut best: Option<Poly> = None;
    for v in kernel {
        let f = Poly::from_terms(
            field,
            k,
            y_monos.iter().cloned().zip(v).filter(|(_, c)| !c.is_zero()),
        );
        let better = match &best {
            None => true,
            Some(b) => {
                f.num_terms() < b.num_terms()
                    || (f.num_terms() == b.num_terms() && term_order_key(&f) < term_order_key(b))
            }
        };
        if better {
            best = Some(f);
        }
    }
    let f = best.unwrap();
    // normalize to leading coefficient 1
    let lead = f
        .terms()
        .next_back()
        .map(|(_, c)| c.clone())
        .expect("kernel vector is nonzero");
    let f = f.scale(&lead.inv().expect("leading coefficient is a unit"));
    let vals: Vec<Poly> = subset.iter().map(|&ci| h.component(ci).clone()).collect();
    assert!(f.substitute(&vals).is_zero(), "relation must annihilate");
    Annihilator::Relation(f)
}

fn term_order_key(p: &Poly) -> Vec<Monomial> {
    p.terms().rev().map(|(m, _)| m.clone()).collect()
}

/// How the transcendence-degree claim is justified.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TrdegNote {
    Constant,
    SingleVariable,
    SingleComponent,
    TwoVariables,
    TwoComponents,
    ComponentAndVariable,
    CharTwoAntisym,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct TrdegReport {
    pub rank: usize,
    pub trdeg_claim: Option<usize>,
    pub note: TrdegNote,
}

/// Report rank of J(H) and, where the rank <= 2 theory applies, the
/// transcendence degree of K(H) over K. When 1/2 is in K the claim equals
/// the rank; in characteristic 2 the antisymmetric normal form forces the
/// strict gap rank 2 < trdeg 3. Outside these cases the claim is withheld
/// rather than guessed.
pub fn trdeg_rank2(h: &QuadMap) -> Result<TrdegReport, Error> {
    let m = h.jacobian();
    let rank = m.rank_symbolic();
    let field = h.field();
    if rank > 2 {
        return Ok(TrdegReport {
            rank,
            trdeg_claim: None,
            note: TrdegNote::Unknown,
        });
    }
    if field.has_half() {
        let note = match rank {
            0 => TrdegNote::Constant,
            1 => match classify::classify(&m)?.tag {
                NormalFormTag::R1ColumnOnly | NormalFormTag::R1ColumnHalf => {
                    TrdegNote::SingleVariable
                }
                NormalFormTag::R1RowOnly => TrdegNote::SingleComponent,
                t => panic!("rank-1 classification produced {t:?}"),
            },
            _ => match classify::classify(&m)?.tag {
                NormalFormTag::R2TwoColumns => TrdegNote::TwoVariables,
                NormalFormTag::R2TwoRows => TrdegNote::TwoComponents,
                NormalFormTag::R2Hook | NormalFormTag::R2HookHalf => {
                    TrdegNote::ComponentAndVariable
                }
                t => panic!("rank-2 classification produced {t:?}"),
            },
        };
        return Ok(TrdegReport {
            rank,
            trdeg_claim: Some(rank),
            note,
        });
    }
    // characteristic 2
    if h.is_constant() {
        return Ok(TrdegReport {
            rank,
            trdeg_claim: Some(0),
            note: TrdegNote::Constant,
        });
    }
    if rank == 2 {
        let report = classify::classify(&m)?;
        if report.tag == NormalFormTag::R2Antisym {
            return Ok(TrdegReport {
                rank,
                trdeg_claim: Some(3),
                note: TrdegNote::CharTwoAntisym,
            });
        }
    }
    Ok(TrdegReport {
        rank,
        trdeg_claim: None,
        note: TrdegNote::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Rationals
    }

    fn gf(p: u32) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn jacobian_of_cross_product_map() {
        let h = QuadMap::parse(gf(2), 3, &["x2*x3", "x3*x1", "x1*x2"]).unwrap();
        let m = h.jacobian();
        let expect = DegOneMatrix::parse_entries(
            gf(2),
            3,
            &[&["0", "x3", "x2"], &["x3", "0", "x1"], &["x2", "x1", "0"]],
        )
        .unwrap();
        assert_eq!(m, expect);
    }

    #[test]
    fn jacobian_of_the_lower_triangular_example() {
        let h = QuadMap::parse(q(), 4, &["0", "x1", "x1^2", "x1*x2 - 1/2*x3"]).unwrap();
        let m = h.jacobian();
        let expect = DegOneMatrix::parse_entries(
            q(),
            4,
            &[
                &["0", "0", "0", "0"],
                &["1", "0", "0", "0"],
                &["2*x1", "0", "0", "0"],
                &["x2", "x1", "0 - 1/2", "0"],
            ],
        )
        .unwrap();
        assert_eq!(m, expect);
        assert!(m.is_strictly_lower());
    }

    #[test]
    fn jacobian_of_linear_map_is_constant() {
        let h = QuadMap::parse(q(), 2, &["x1 + 2*x2", "x2"]).unwrap();
        assert!(h.jacobian().is_constant());
    }

    #[test]
    fn degree_three_components_are_rejected() {
        assert!(matches!(
            QuadMap::parse(q(), 1, &["x1^3"]),
            Err(Error::DegreeTooHigh { .. })
        ));
    }

    #[test]
    fn integrate_cross_matrix_over_gf2() {
        let m = DegOneMatrix::parse_entries(
            gf(2),
            3,
            &[&["0", "x3", "x2"], &["x3", "0", "x1"], &["x2", "x1", "0"]],
        )
        .unwrap();
        let w = is_jacobian(&m).unwrap();
        assert_eq!(
            w.map,
            QuadMap::parse(gf(2), 3, &["x2*x3", "x1*x3", "x1*x2"]).unwrap()
        );
    }

    // d/dx1 of a*x1^2 + ... is 2*a*x1 = 0 in characteristic 2, so x1 in a
    // diagonal position has no antiderivative.
    #[test]
    fn char_two_diagonal_obstruction() {
        let m = DegOneMatrix::parse_entries(gf(2), 2, &[&["x1", "0"], &["0", "0"]]).unwrap();
        assert_eq!(
            is_jacobian(&m),
            Err(NotJacobian::CharTwoDiagonal { i: 0, j: 0 })
        );
    }

    #[test]
    fn constant_matrix_integrates_to_linear_map() {
        let m = DegOneMatrix::parse_entries(q(), 2, &[&["1", "2"], &["3", "4"]]).unwrap();
        let w = is_jacobian(&m).unwrap();
        assert_eq!(
            w.map,
            QuadMap::parse(q(), 2, &["x1 + 2*x2", "3*x1 + 4*x2"]).unwrap()
        );
    }

    #[test]
    fn asymmetric_tensor_is_not_a_jacobian() {
        // entry (1,1) has x2-coefficient 1 but entry (1,2) has x1-coefficient 0
        let m = DegOneMatrix::parse_entries(q(), 2, &[&["x2", "0"], &["0", "0"]]).unwrap();
        assert_eq!(is_jacobian(&m), Err(NotJacobian::Asymmetric { i: 0, j: 0, k: 1 }));
    }

    #[test]
    fn round_trip_witness_on_randoms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for field in [q(), gf(2), gf(3), gf(5)] {
            for _ in 0..40 {
                let n = rng.random_range(1..4);
                let m_dim = rng.random_range(1..4);
                let comps: Vec<Poly> = (0..m_dim)
                    .map(|_| {
                        let monos = monomials_up_to(n, 2);
                        Poly::from_terms(
                            field,
                            n,
                            monos.into_iter().map(|mo| {
                                (mo, Scalar::from_int(field, rng.random_range(-3..4)))
                            }),
                        )
                    })
                    .collect();
                let h = QuadMap::new(field, n, comps).unwrap();
                let m = h.jacobian();
                let w = is_jacobian(&m).expect("a genuine Jacobian integrates");
                // witness components may differ in positive characteristic,
                // but the matrices must agree
                assert_eq!(w.map.jacobian(), m);
            }
        }
    }

    #[test]
    fn hessian_integration_of_cross_matrix() {
        let m = DegOneMatrix::parse_entries(
            gf(2),
            3,
            &[&["0", "x3", "x2"], &["x3", "0", "x1"], &["x2", "x1", "0"]],
        )
        .unwrap();
        let h = hessian_integrate(&m).unwrap();
        assert_eq!(h, Poly::parse("x1*x2*x3", gf(2), 3).unwrap());
    }

    #[test]
    fn hessian_integration_of_zero_and_diagonal() {
        let z = DegOneMatrix::zero(q(), 2, 2, 2);
        assert!(hessian_integrate(&z).unwrap().is_zero());
        // Hessian of x1^2 + x2^2 is diag(2, 2)
        let m = DegOneMatrix::parse_entries(q(), 2, &[&["2", "0"], &["0", "2"]]).unwrap();
        assert_eq!(
            hessian_integrate(&m).unwrap(),
            Poly::parse("x1^2 + x2^2", q(), 2).unwrap()
        );
    }

    #[test]
    fn hessian_integration_failures() {
        let asym = DegOneMatrix::parse_entries(q(), 2, &[&["0", "x1"], &["x2", "0"]]).unwrap();
        assert_eq!(
            hessian_integrate(&asym),
            Err(NotIntegrable::NotSymmetric { i: 0, j: 1 })
        );
        // characteristic 2: nonzero diagonal is never a Hessian
        let m = DegOneMatrix::parse_entries(gf(2), 1, &[&["1"]]).unwrap();
        assert_eq!(hessian_integrate(&m), Err(NotIntegrable::DiagonalEntry { i: 0 }));
        // characteristic 3: x_i on the diagonal needs 6 a x_i, and 6 = 0
        let m = DegOneMatrix::parse_entries(gf(3), 1, &[&["x1"]]).unwrap();
        assert_eq!(hessian_integrate(&m), Err(NotIntegrable::DiagonalEntry { i: 0 }));
    }

    #[test]
    fn hessian_round_trip_on_randoms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for field in [q(), gf(3), gf(5)] {
            for _ in 0..30 {
                let n = rng.random_range(1..4);
                let monos = monomials_up_to(n, 3);
                let h = Poly::from_terms(
                    field,
                    n,
                    monos
                        .into_iter()
                        .map(|m| (m, Scalar::from_int(field, rng.random_range(-2..3)))),
                );
                let m = hessian(&h);
                let h2 = hessian_integrate(&m).expect("a genuine Hessian integrates");
                assert_eq!(hessian(&h2), m);
            }
        }
    }

    #[test]
    fn forced_relation_between_x_and_x_squared() {
        let h = QuadMap::parse(q(), 1, &["x1", "x1^2"]).unwrap();
        match annihilator_search(&h, &[0, 1], 2) {
            Annihilator::Relation(f) => {
                assert_eq!(f, Poly::parse("x1^2 - x2", q(), 2).unwrap());
            }
            _ => panic!("expected the forced relation"),
        }
    }

    #[test]
    fn cross_map_has_no_low_degree_relation_over_gf2() {
        let h = QuadMap::parse(gf(2), 3, &["x2*x3", "x3*x1", "x1*x2"]).unwrap();
        assert!(matches!(
            annihilator_search(&h, &[0, 1, 2], 4),
            Annihilator::NoRelationUpTo(4)
        ));
    }

    #[test]
    fn trdeg_of_cross_map_over_gf2() {
        let h = QuadMap::parse(gf(2), 3, &["x2*x3", "x3*x1", "x1*x2"]).unwrap();
        let r = trdeg_rank2(&h).unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.trdeg_claim, Some(3));
        assert_eq!(r.note, TrdegNote::CharTwoAntisym);
    }

    #[test]
    fn trdeg_of_rank_one_map() {
        let h = QuadMap::parse(q(), 2, &["x1", "x1^2"]).unwrap();
        let r = trdeg_rank2(&h).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.trdeg_claim, Some(1));
    }

    #[test]
    fn trdeg_of_constant_map() {
        let h = QuadMap::parse(q(), 2, &["3", "1/2"]).unwrap();
        let r = trdeg_rank2(&h).unwrap();
        assert_eq!((r.rank, r.trdeg_claim), (0, Some(0)));
        assert_eq!(r.note, TrdegNote::Constant);
    }

    // Away from characteristic 2, an antisymmetric Jacobian matrix forces
    // the quadratic part of the map to vanish: the coefficient tensor of a
    // quadratic map is symmetric in the derivative indices, antisymmetry
    // couples them with a sign, and chasing both relations around gives
    // 2 c = 0. Stated as linear algebra: the combined constraint system has
    // a trivial kernel unless 2 = 0.
    #[test]
    fn antisymmetric_jacobians_force_linear_maps() {
        let n = 3usize;
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        for field in [q(), gf(3), gf(5), gf(2)] {
            let mut rows: Vec<Vec<Scalar>> = Vec::new();
            let mut push = |coeffs: Vec<(usize, i64)>| {
                let mut row = vec![field.zero(); n * n * n];
                for (c, v) in coeffs {
                    row[c] = row[c].add(&Scalar::from_int(field, v));
                }
                rows.push(row);
            };
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        // integrability: c[i][j][k] = c[i][k][j]
                        push(vec![(idx(i, j, k), 1), (idx(i, k, j), -1)]);
                        // antisymmetry of the matrix: c[i][j][k] = -c[j][i][k]
                        push(vec![(idx(i, j, k), 1), (idx(j, i, k), 1)]);
                    }
                }
            }
            let a = crate::linmat::ConstMatrix::from_rows(field, rows);
            let kernel_dim = a.kernel_basis().len();
            if field.has_half() {
                assert_eq!(kernel_dim, 0, "over {field} the quadratic part dies");
            } else {
                assert!(kernel_dim > 0, "characteristic 2 admits nonlinear examples");
            }
        }
    }

    #[test]
    fn chain_rule_identity_on_randoms() {
        use crate::families;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for field in [gf(3), q()] {
            for _ in 0..25 {
                let h = families::random_quad_map(field, 4, 4, &mut rng);
                let (s, s_inv) = families::random_gl(field, 4, &mut rng);
                let (t, t_inv) = families::random_gl(field, 4, &mut rng);
                let tf = Transform::new(s.clone(), s_inv, t.clone(), t_inv);
                let lhs = h.compose_linear(&tf).jacobian();
                let rhs = h.jacobian().apply_st(&s, &t).substitute_linear(&t);
                assert_eq!(lhs, rhs);
            }
        }
    }
}
