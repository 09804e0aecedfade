//! Independent certificate verification.
//!
//! The verifier recomputes every claimed identity from the certificate
//! payload and the input file alone: transformation matrices are multiplied
//! out, shape predicates re-evaluated, products re-expanded. It never calls
//! the classification or triangularization search paths, so a certificate
//! that verifies is evidence independent of the code that produced it.

use degone::classify::shape_predicate;
use degone::degmat::{fresh_tuples, DegOneMatrix};

use crate::certificate::{input_digest, CertKind, Certificate};
use crate::formats::Input;

pub fn verify(cert: &Certificate, input_bytes: &[u8], input: &Input) -> Result<(), String> {
    let digest = input_digest(input_bytes);
    if digest != cert.input_sha256 {
        return Err(format!(
            "input digest mismatch: certificate names {}, file is {digest}",
            cert.input_sha256
        ));
    }
    if cert.field != input.field() {
        return Err("certificate field does not match the input".into());
    }
    match cert.kind {
        CertKind::Classification => {
            let m = as_matrix(input)?;
            let tag = cert.tag.ok_or("classification certificate without a tag")?;
            let s = need(cert, "S")?;
            let s_inv = need(cert, "S_inv")?;
            let t = need(cert, "T")?;
            let t_inv = need(cert, "T_inv")?;
            if !s.mul(s_inv).is_identity() {
                return Err("S * S_inv is not the identity".into());
            }
            if !t.mul(t_inv).is_identity() {
                return Err("T * T_inv is not the identity".into());
            }
            if s.cols() != m.rows() || t.rows() != m.cols() {
                return Err("transformation dimensions do not fit the input".into());
            }
            let nf = m.apply_st(s, t);
            if !shape_predicate(&nf, tag) {
                return Err(format!("S * M * T does not match the shape {tag}"));
            }
            if nf.rank_symbolic() != m.rank_symbolic() {
                return Err("rank is not preserved".into());
            }
            Ok(())
        }
        CertKind::Triangularization | CertKind::StrongNilpotence => {
            let m = match (cert.kind, input) {
                (CertKind::StrongNilpotence, _) => as_matrix(input)?.clone(),
                (_, Input::Map(h)) => h.jacobian(),
                (_, Input::Matrix(m)) => m.clone(),
            };
            let u = need(cert, "U")?;
            let u_inv = need(cert, "U_inv")?;
            if !u.mul(u_inv).is_identity() {
                return Err("U * U_inv is not the identity".into());
            }
            if u.rows() != m.rows() || m.rows() != m.cols() {
                return Err("conjugator dimensions do not fit the input".into());
            }
            if !cert.claims.contains_key("strictly-lower-triangular") {
                return Err("missing the strictly-lower-triangular claim".into());
            }
            let conj = m.apply_st(u_inv, u);
            if !conj.is_strictly_lower() {
                return Err("U^-1 * M * U is not strictly lower triangular".into());
            }
            Ok(())
        }
        CertKind::SquareZeroSuite => {
            let h = match input {
                Input::Map(h) => h,
                Input::Matrix(_) => return Err("this certificate needs a map input".into()),
            };
            let m = h.jacobian();
            if m.rows() != m.cols() {
                return Err("the map is not an endomorphism".into());
            }
            let square_zero = generic_pair_zero_with_same_tuple(&m);
            check_claim(cert, "square-zero", Some(square_zero))?;
            if square_zero {
                let t = fresh_tuples(m.field(), m.nvars(), 3);
                let mx = m.evaluate(&t[0]);
                let my = m.evaluate(&t[1]);
                let mz = m.evaluate(&t[2]);
                let xy = mx.mul(&my);
                check_claim(cert, "anticommute", Some(my.mul(&mx) == xy.neg()))?;
                let pair = (m.field().has_half() && h.is_homogeneous()).then(|| xy.is_zero());
                check_claim(cert, "pair-product-zero", pair)?;
                let triple = m.field().has_half().then(|| xy.mul(&mz).is_zero());
                check_claim(cert, "triple-product-zero", triple)?;
            } else {
                for key in ["anticommute", "pair-product-zero", "triple-product-zero"] {
                    check_claim(cert, key, None)?;
                }
            }
            Ok(())
        }
    }
}

/// M^2 = 0 checked by squaring the symbolic matrix itself.
fn generic_pair_zero_with_same_tuple(m: &DegOneMatrix) -> bool {
    let pm = m.to_poly_matrix();
    pm.mul(&pm).is_zero()
}

fn as_matrix(input: &Input) -> Result<&DegOneMatrix, String> {
    match input {
        Input::Matrix(m) => Ok(m),
        Input::Map(_) => Err("this certificate needs a matrix input".into()),
    }
}

fn need<'a>(
    cert: &'a Certificate,
    name: &str,
) -> Result<&'a degone::linmat::ConstMatrix, String> {
    cert.matrices
        .get(name)
        .ok_or_else(|| format!("missing matrix `{name}`"))
}

fn check_claim(cert: &Certificate, key: &str, actual: Option<bool>) -> Result<(), String> {
    let want = match actual {
        None => "na".to_string(),
        Some(v) => v.to_string(),
    };
    let claimed = cert
        .claims
        .get(key)
        .ok_or_else(|| format!("missing claim `{key}`"))?;
    if *claimed != want {
        return Err(format!("claim `{key}`: certificate says {claimed}, recomputed {want}"));
    }
    Ok(())
}
