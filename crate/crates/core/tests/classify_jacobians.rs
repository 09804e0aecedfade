//! Classification of Jacobian matrices drawn from rank <= 2 map families,
//! across all fields: the refinements must engage exactly where the theory
//! says they can, and every report must re-verify.

use degone::classify::{classify, shape_predicate, NormalFormTag};
use degone::families;
use degone::field::FieldSpec;
use degone::jacobian::QuadMap;
use degone::linmat::Transform;
use degone::poly::Poly;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A quadratic map whose Jacobian matrix has rank at most 2, drawn from one
/// of three structural families and scrambled by a random (S, T) pair.
fn rank_le2_map(field: FieldSpec, flavor: usize, rng: &mut ChaCha8Rng) -> QuadMap {
    let n = 4;
    let m = 4;
    let base = match flavor % 3 {
        // components inside K[x1, x2]: at most two nonzero columns
        0 => {
            let comps = (0..m)
                .map(|_| families::random_quadratic(field, n, 2, rng))
                .collect();
            QuadMap::new(field, n, comps).unwrap()
        }
        // K-combinations of two fixed quadratics: at most two nonzero rows
        1 => {
            let g1 = families::random_quadratic(field, n, n, rng);
            let g2 = families::random_quadratic(field, n, n, rng);
            let comps = (0..m)
                .map(|_| {
                    let a = families::random_scalar(field, rng);
                    let b = families::random_scalar(field, rng);
                    g1.scale(&a).add(&g2.scale(&b))
                })
                .collect();
            QuadMap::new(field, n, comps).unwrap()
        }
        // one general component, the rest inside K[x1]: a hook
        _ => {
            let mut comps = vec![families::random_quadratic(field, n, n, rng)];
            for _ in 1..m {
                comps.push(families::random_quadratic(field, n, 1, rng));
            }
            QuadMap::new(field, n, comps).unwrap()
        }
    };
    let tf = families::random_transform(field, m, n, rng);
    base.compose_linear(&tf)
}

#[test]
fn jacobian_refinements_engage_where_the_theory_allows() {
    let mut rng = ChaCha8Rng::seed_from_u64(271);
    for field in families::TEST_FIELDS {
        let mut seen_half = 0;
        for round in 0..120 {
            let h = rank_le2_map(field, round, &mut rng);
            let m = h.jacobian();
            let rank = m.rank_symbolic();
            assert!(rank <= 2, "family construction bounds the rank");
            if rank == 0 {
                continue;
            }
            let report = classify(&m)
                .unwrap_or_else(|e| panic!("classification failed over {field}: {e}"));
            assert!(report.jacobian_flags.is_jacobian);
            assert_eq!(m.apply_transform(&report.tf), report.normal_form);
            assert!(shape_predicate(&report.normal_form, report.tag));
            assert_eq!(report.normal_form.rank_elimination(), rank);

            match report.tag {
                NormalFormTag::R1ColumnHalf | NormalFormTag::R2HookHalf => {
                    assert!(field.has_half(), "half forms need 2 invertible");
                    assert!(report.jacobian_flags.refinement_applied);
                    seen_half += 1;
                }
                NormalFormTag::R2Antisym => {
                    assert!(!field.has_half(), "antisymmetric Jacobians force characteristic 2");
                    assert!(report.jacobian_flags.char2_antisym);
                }
                NormalFormTag::R2Hook => {
                    panic!("a Jacobian hook must refine to the half form or to two rows")
                }
                _ => {}
            }
        }
        if field.has_half() {
            assert!(seen_half > 0, "the refined forms appear over {field}");
        }
    }
}

#[test]
fn classification_survives_composition_with_linear_maps() {
    // classify(J(S H(Tx))) and classify(J(H)) land in equivalent shapes:
    // the normal form of one transform also normalizes the other matrix
    let mut rng = ChaCha8Rng::seed_from_u64(272);
    for field in [FieldSpec::Rationals, FieldSpec::PrimeField(3)] {
        for round in 0..20 {
            let h = rank_le2_map(field, round, &mut rng);
            let m = h.jacobian();
            if m.rank_symbolic() == 0 {
                continue;
            }
            let tf = families::random_transform(field, 4, 4, &mut rng);
            let h2 = h.compose_linear(&tf);
            let m2 = h2.jacobian();
            let r2 = classify(&m2).unwrap();
            // J(S H(Tx)) = (S J(H) T)|_{x=Tx}: the two matrices differ by a
            // constant equivalence and a variable substitution, so their
            // ranks agree
            assert_eq!(m.rank_symbolic(), m2.rank_symbolic());
            assert!(shape_predicate(&r2.normal_form, r2.tag));
        }
    }
}

#[test]
fn rectangular_jacobians_classify() {
    // more components than variables and vice versa
    let mut rng = ChaCha8Rng::seed_from_u64(273);
    for field in families::TEST_FIELDS {
        for target in [2usize, 3, 6] {
            let comps: Vec<Poly> = (0..target)
                .map(|_| families::random_quadratic(field, 3, 2, &mut rng))
                .collect();
            let h = QuadMap::new(field, 3, comps).unwrap();
            let (s, s_inv) = families::random_gl(field, target, &mut rng);
            let (t, t_inv) = families::random_gl(field, 3, &mut rng);
            let h = h.compose_linear(&Transform::new(s, s_inv, t, t_inv));
            let m = h.jacobian();
            assert_eq!(m.rows(), target);
            assert_eq!(m.cols(), 3);
            let rank = m.rank_symbolic();
            assert!(rank <= 2);
            if rank == 0 {
                continue;
            }
            let report = classify(&m).unwrap();
            assert!(shape_predicate(&report.normal_form, report.tag));
            assert_eq!(m.apply_transform(&report.tf), report.normal_form);
        }
    }
}
