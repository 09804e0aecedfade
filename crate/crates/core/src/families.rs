//! Deterministic random instance families for tests and fuzz campaigns:
//! scalars, invertible matrices, degree-one matrices drawn from each normal
//! form shape, triangular quadratic Jacobians and their conjugates, and
//! square-zero map families. Everything is driven by a caller-supplied RNG,
//! so a fixed seed reproduces an instance byte for byte.

use rand::Rng;

use crate::classify::NormalFormTag;
use crate::degmat::DegOneMatrix;
use crate::field::{FieldSpec, Scalar};
use crate::jacobian::QuadMap;
use crate::linmat::{ConstMatrix, Transform};
use crate::poly::{Monomial, Poly};

pub fn random_scalar(field: FieldSpec, rng: &mut impl Rng) -> Scalar {
    match field {
        FieldSpec::Rationals => Scalar::from_int(field, rng.random_range(-4..5)),
        FieldSpec::PrimeField(p) => {
            Scalar::from_int(field, rng.random_range(0..p.min(11)) as i64)
        }
    }
}

pub fn random_nonzero_scalar(field: FieldSpec, rng: &mut impl Rng) -> Scalar {
    loop {
        let s = random_scalar(field, rng);
        if !s.is_zero() {
            return s;
        }
    }
}

/// A random polynomial of degree <= 1.
pub fn random_affine(field: FieldSpec, nvars: usize, rng: &mut impl Rng) -> Poly {
    let mut p = Poly::constant(field, nvars, random_scalar(field, rng));
    for v in 0..nvars {
        p = p.add(&Poly::var(field, nvars, v).scale(&random_scalar(field, rng)));
    }
    p
}

/// A random nonzero homogeneous degree-1 polynomial.
pub fn random_linear_form(field: FieldSpec, nvars: usize, rng: &mut impl Rng) -> Poly {
    loop {
        let mut p = Poly::zero(field, nvars);
        for v in 0..nvars {
            p = p.add(&Poly::var(field, nvars, v).scale(&random_scalar(field, rng)));
        }
        if !p.is_zero() {
            return p;
        }
    }
}

/// A random quadratic polynomial in the first `active` variables.
pub fn random_quadratic(
    field: FieldSpec,
    nvars: usize,
    active: usize,
    rng: &mut impl Rng,
) -> Poly {
    let mut p = Poly::zero(field, nvars);
    for m in crate::jacobian::monomials_up_to(nvars, 2) {
        if m.0.iter().skip(active).any(|&e| e > 0) {
            continue;
        }
        if rng.random_bool(0.6) {
            p = p.add(&Poly::from_terms(
                field,
                nvars,
                [(Monomial(m.0.clone()), random_scalar(field, rng))],
            ));
        }
    }
    p
}

/// A random invertible matrix with its inverse, by rejection sampling.
pub fn random_gl(field: FieldSpec, n: usize, rng: &mut impl Rng) -> (ConstMatrix, ConstMatrix) {
    loop {
        let m = ConstMatrix::from_fn(field, n, n, |_, _| random_scalar(field, rng));
        if let Ok(inv) = m.invert() {
            return (m, inv);
        }
    }
}

pub fn random_transform(field: FieldSpec, m: usize, n: usize, rng: &mut impl Rng) -> Transform {
    let (s, s_inv) = random_gl(field, m, rng);
    let (t, t_inv) = random_gl(field, n, rng);
    Transform::new(s, s_inv, t, t_inv)
}

/// Fully random degree-one matrix.
pub fn random_degone(
    field: FieldSpec,
    rows: usize,
    cols: usize,
    nvars: usize,
    rng: &mut impl Rng,
) -> DegOneMatrix {
    DegOneMatrix::from_parts(
        ConstMatrix::from_fn(field, rows, cols, |_, _| random_scalar(field, rng)),
        (0..nvars)
            .map(|_| ConstMatrix::from_fn(field, rows, cols, |_, _| random_scalar(field, rng)))
            .collect(),
    )
}

/// A random quadratic map K^n -> K^m with no structure imposed.
pub fn random_quad_map(
    field: FieldSpec,
    nvars: usize,
    target: usize,
    rng: &mut impl Rng,
) -> QuadMap {
    let comps = (0..target)
        .map(|_| random_quadratic(field, nvars, nvars, rng))
        .collect();
    QuadMap::new(field, nvars, comps).expect("generated components are quadratic")
}

/// A representative of the given normal-form shape with the exact expected
/// rank, by rejection sampling on the rank.
pub fn normal_form_instance(
    tag: NormalFormTag,
    field: FieldSpec,
    rows: usize,
    cols: usize,
    nvars: usize,
    rng: &mut impl Rng,
) -> DegOneMatrix {
    assert!(
        tag.admissible(field, rows, cols, nvars),
        "shape does not fit"
    );
    loop {
        let mut entries = vec![vec![Poly::zero(field, nvars); cols]; rows];
        match tag {
            NormalFormTag::Rank0 => {}
            NormalFormTag::R1ColumnOnly => {
                for row in entries.iter_mut() {
                    row[0] = random_affine(field, nvars, rng);
                }
            }
            NormalFormTag::R1RowOnly => {
                for e in entries[0].iter_mut() {
                    *e = random_affine(field, nvars, rng);
                }
            }
            NormalFormTag::R1ColumnHalf => {
                entries[0][0] = random_affine(field, nvars, rng);
                entries[1][0] = Poly::constant(field, nvars, field.half().expect("needs 1/2"));
            }
            NormalFormTag::R2TwoColumns => {
                for row in entries.iter_mut() {
                    row[0] = random_affine(field, nvars, rng);
                    row[1] = random_affine(field, nvars, rng);
                }
            }
            NormalFormTag::R2TwoRows => {
                for row in entries.iter_mut().take(2) {
                    for e in row.iter_mut() {
                        *e = random_affine(field, nvars, rng);
                    }
                }
            }
            NormalFormTag::R2Hook => {
                for e in entries[0].iter_mut() {
                    *e = random_affine(field, nvars, rng);
                }
                for (i, row) in entries.iter_mut().enumerate() {
                    if i > 0 {
                        row[0] = random_affine(field, nvars, rng);
                    }
                }
            }
            NormalFormTag::R2HookHalf => {
                for e in entries[0].iter_mut() {
                    *e = random_affine(field, nvars, rng);
                }
                entries[1][0] = random_affine(field, nvars, rng);
                entries[2][0] = Poly::constant(field, nvars, field.half().expect("needs 1/2"));
            }
            NormalFormTag::R2Antisym => {
                // [[0, -g, -a], [g, 0, -b], [a, b, 0]] with g = f + 1 and
                // a, b independent linear forms: always rank 2 with the
                // below-diagonal entries independent over K
                let a = random_linear_form(field, nvars, rng);
                let b = loop {
                    let cand = random_linear_form(field, nvars, rng);
                    if cand.const_ratio_to(&a).is_none() {
                        break cand;
                    }
                };
                let f = {
                    let mut p = Poly::zero(field, nvars);
                    for v in 0..nvars {
                        p = p.add(&Poly::var(field, nvars, v).scale(&random_scalar(field, rng)));
                    }
                    p
                };
                let g = f.add(&Poly::one(field, nvars));
                entries[0][1] = g.neg();
                entries[1][0] = g;
                entries[0][2] = a.neg();
                entries[2][0] = a;
                entries[1][2] = b.neg();
                entries[2][1] = b;
            }
        }
        let m = DegOneMatrix::from_entries(field, nvars, &entries)
            .expect("generated entries have degree <= 1");
        if m.rank_elimination() == tag.expected_rank() {
            return m;
        }
    }
}

/// A normal-form representative scrambled by a random GL pair; returns the
/// scrambled matrix and its rank.
pub fn scrambled_instance(
    tag: NormalFormTag,
    field: FieldSpec,
    rows: usize,
    cols: usize,
    nvars: usize,
    rng: &mut impl Rng,
) -> (DegOneMatrix, usize) {
    let f = normal_form_instance(tag, field, rows, cols, nvars, rng);
    let tf = random_transform(field, rows, cols, rng);
    (f.apply_transform(&tf), tag.expected_rank())
}

/// A quadratic map whose Jacobian matrix is strictly lower triangular of
/// rank <= 2: the first component vanishes, the second uses x1 only, the
/// rest use x1 and x2 only.
pub fn triangular_jacobian_map(field: FieldSpec, n: usize, rng: &mut impl Rng) -> QuadMap {
    assert!(n >= 2);
    let mut comps = vec![Poly::zero(field, n)];
    comps.push(random_quadratic(field, n, 1, rng));
    for _ in 2..n {
        comps.push(random_quadratic(field, n, 2, rng));
    }
    QuadMap::new(field, n, comps).expect("components are quadratic")
}

/// A conjugate U^-1 H(Ux) of a strictly-triangular-Jacobian map; its
/// Jacobian is a nilpotent Jacobian matrix of rank <= 2.
pub fn conjugated_triangular_jacobian(
    field: FieldSpec,
    n: usize,
    rng: &mut impl Rng,
) -> (QuadMap, ConstMatrix) {
    let h = triangular_jacobian_map(field, n, rng);
    let (u, u_inv) = random_gl(field, n, rng);
    let tf = Transform::new(u_inv.clone(), u.clone(), u.clone(), u_inv);
    (h.compose_linear(&tf), u)
}

/// A quadratic map with J(H)^2 = 0: components at indices >= 2 use only
/// x1, x2, the first two components vanish. Optionally homogeneous.
pub fn square_zero_map(
    field: FieldSpec,
    n: usize,
    homogeneous: bool,
    rng: &mut impl Rng,
) -> QuadMap {
    assert!(n >= 3);
    let mut comps = vec![Poly::zero(field, n), Poly::zero(field, n)];
    for _ in 2..n {
        let mut c = random_quadratic(field, n, 2, rng);
        if homogeneous {
            c = c.homogeneous_part(2);
        }
        comps.push(c);
    }
    QuadMap::new(field, n, comps).expect("components are quadratic")
}

/// Conjugated variant of [`square_zero_map`]; the square stays zero and
/// homogeneity survives linear conjugation.
pub fn conjugated_square_zero_map(
    field: FieldSpec,
    n: usize,
    homogeneous: bool,
    rng: &mut impl Rng,
) -> QuadMap {
    let h = square_zero_map(field, n, homogeneous, rng);
    let (u, u_inv) = random_gl(field, n, rng);
    let tf = Transform::new(u_inv.clone(), u.clone(), u, u_inv);
    h.compose_linear(&tf)
}

pub const TEST_FIELDS: [FieldSpec; 4] = [
    FieldSpec::Rationals,
    FieldSpec::PrimeField(2),
    FieldSpec::PrimeField(3),
    FieldSpec::PrimeField(5),
];
