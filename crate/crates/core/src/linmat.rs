//! Exact linear algebra over the constant field: reduced row echelon form,
//! kernels, inverses, and the Jordan normal form of nilpotent matrices.
//!
//! Pivoting always picks the first nonzero entry; over an exact field there
//! is nothing numerical to stabilize, and a fixed pivot rule keeps every
//! downstream certificate deterministic.

use std::fmt;

use crate::error::Error;
use crate::field::{FieldSpec, Scalar};

/// A dense matrix of scalars, stored row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstMatrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl ConstMatrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        ConstMatrix {
            field,
            rows,
            cols,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = ConstMatrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            for e in row {
                assert_eq!(e.field(), field);
                entries.push(e);
            }
        }
        ConstMatrix {
            field,
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn from_fn(
        field: FieldSpec,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Self {
        let mut m = ConstMatrix::zeros(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(field: FieldSpec, rows: &[&[i64]]) -> Self {
        ConstMatrix::from_rows(
            field,
            rows.iter()
                .map(|r| r.iter().map(|&v| Scalar::from_int(field, v)).collect())
                .collect(),
        )
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        assert_eq!(v.field(), self.field);
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.get(i, j).is_one()
                    } else {
                        self.get(i, j).is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> ConstMatrix {
        ConstMatrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, other: &ConstMatrix) -> ConstMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ConstMatrix::from_fn(self.field, self.rows, self.cols, |i, j| {
            self.get(i, j).add(other.get(i, j))
        })
    }

    pub fn sub(&self, other: &ConstMatrix) -> ConstMatrix {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ConstMatrix {
        ConstMatrix::from_fn(self.field, self.rows, self.cols, |i, j| self.get(i, j).neg())
    }

    pub fn scale(&self, c: &Scalar) -> ConstMatrix {
        ConstMatrix::from_fn(self.field, self.rows, self.cols, |i, j| self.get(i, j).mul(c))
    }

    pub fn mul(&self, other: &ConstMatrix) -> ConstMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        ConstMatrix::from_fn(self.field, self.rows, other.cols, |i, j| {
            let mut acc = self.field.zero();
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for (k, vk) in v.iter().enumerate() {
                    acc = acc.add(&self.get(i, k).mul(vk));
                }
                acc
            })
            .collect()
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> ConstMatrix {
        ConstMatrix::from_fn(
            self.field,
            rows.len(),
            cols.len(),
            |i, j| self.get(rows.start + i, cols.start + j).clone(),
        )
    }

    pub fn hstack(&self, other: &ConstMatrix) -> ConstMatrix {
        assert_eq!(self.rows, other.rows);
        ConstMatrix::from_fn(self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &ConstMatrix) -> ConstMatrix {
        assert_eq!(self.cols, other.cols);
        ConstMatrix::from_fn(self.field, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j).clone()
            } else {
                other.get(i - self.rows, j).clone()
            }
        })
    }

    pub fn block_diag(&self, other: &ConstMatrix) -> ConstMatrix {
        ConstMatrix::from_fn(
            self.field,
            self.rows + other.rows,
            self.cols + other.cols,
            |i, j| {
                if i < self.rows && j < self.cols {
                    self.get(i, j).clone()
                } else if i >= self.rows && j >= self.cols {
                    other.get(i - self.rows, j - self.cols).clone()
                } else {
                    self.field.zero()
                }
            },
        )
    }

    /// Permutation matrix with columns `e_{perm[0]}, ..., e_{perm[n-1]}`,
    /// i.e. it maps basis vector `e_i` to `e_{perm[i]}`.
    pub fn permutation(field: FieldSpec, perm: &[usize]) -> ConstMatrix {
        let n = perm.len();
        let mut m = ConstMatrix::zeros(field, n, n);
        for (i, &p) in perm.iter().enumerate() {
            m.set(p, i, field.one());
        }
        m
    }

    /// The order-reversing permutation, which swaps lower and upper
    /// triangular shapes under conjugation.
    pub fn reversal(field: FieldSpec, n: usize) -> ConstMatrix {
        ConstMatrix::permutation(field, &(0..n).rev().collect::<Vec<_>>())
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Gauss-Jordan reduction, tracking the row operations and their
    /// inverse so `ops * self == reduced` and `ops * ops_inv == I`.
    pub fn rref(&self) -> Rref {
        let mut r = self.clone();
        let mut ops = ConstMatrix::identity(self.field, self.rows);
        let mut ops_inv = ConstMatrix::identity(self.field, self.rows);
        let mut pivots = Vec::new();
        let mut lead = 0usize;
        for col in 0..self.cols {
            let Some(pivot_row) = (lead..self.rows).find(|&i| !r.get(i, col).is_zero()) else {
                continue;
            };
            if pivot_row != lead {
                r.swap_rows(pivot_row, lead);
                ops.swap_rows(pivot_row, lead);
                ops_inv.swap_cols(pivot_row, lead);
            }
            let inv = r.get(lead, col).inv().expect("pivot is nonzero");
            if !r.get(lead, col).is_one() {
                let p = r.get(lead, col).clone();
                r.scale_row(lead, &inv);
                ops.scale_row(lead, &inv);
                ops_inv.scale_col(lead, &p);
            }
            for i in 0..self.rows {
                if i != lead && !r.get(i, col).is_zero() {
                    let factor = r.get(i, col).clone();
                    r.row_sub_scaled(i, lead, &factor);
                    ops.row_sub_scaled(i, lead, &factor);
                    ops_inv.col_add_scaled(i, lead, &factor);
                }
            }
            pivots.push(col);
            lead += 1;
            if lead == self.rows {
                break;
            }
        }
        Rref {
            rank: pivots.len(),
            reduced: r,
            pivots,
            ops,
            ops_inv,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn scale_row(&mut self, i: usize, c: &Scalar) {
        for j in 0..self.cols {
            let v = self.get(i, j).mul(c);
            self.set(i, j, v);
        }
    }

    fn scale_col(&mut self, j: usize, c: &Scalar) {
        for i in 0..self.rows {
            let v = self.get(i, j).mul(c);
            self.set(i, j, v);
        }
    }

    /// row_i -= c * row_j
    fn row_sub_scaled(&mut self, i: usize, j: usize, c: &Scalar) {
        for k in 0..self.cols {
            let v = self.get(i, k).sub(&self.get(j, k).mul(c));
            self.set(i, k, v);
        }
    }

    /// col_j += c * col_i
    fn col_add_scaled(&mut self, i: usize, j: usize, c: &Scalar) {
        for k in 0..self.rows {
            let v = self.get(k, j).add(&self.get(k, i).mul(c));
            self.set(k, j, v);
        }
    }

    /// Basis of the right kernel, in the deterministic order induced by the
    /// free columns of the reduced form.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let rr = self.rref();
        let mut basis = Vec::new();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in rr.pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![self.field.zero(); self.cols];
            vec[free] = self.field.one();
            for (col, &p) in pivot_set.iter().enumerate() {
                if let Some(row) = p {
                    vec[col] = rr.reduced.get(row, free).neg();
                }
            }
            basis.push(vec);
        }
        basis
    }

    pub fn invert(&self) -> Result<ConstMatrix, Error> {
        if self.rows != self.cols {
            return Err(Error::SingularMatrix);
        }
        let rr = self.rref();
        if rr.rank < self.rows {
            return Err(Error::SingularMatrix);
        }
        Ok(rr.ops)
    }

    /// One solution of `self * x = b` with free variables set to zero.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let bmat = ConstMatrix::from_fn(self.field, self.rows, 1, |i, _| b[i].clone());
        let aug = self.hstack(&bmat);
        let rr = aug.rref();
        // inconsistent iff a pivot lands in the last column
        if rr.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (row, &col) in rr.pivots.iter().enumerate() {
            x[col] = rr.reduced.get(row, self.cols).clone();
        }
        Some(x)
    }

    pub fn det(&self) -> Scalar {
        assert_eq!(self.rows, self.cols);
        // expansion via elimination on a copy; fine at these sizes
        let mut m = self.clone();
        let mut det = self.field.one();
        for col in 0..self.cols {
            let Some(p) = (col..self.rows).find(|&i| !m.get(i, col).is_zero()) else {
                return self.field.zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = det.neg();
            }
            let pivot = m.get(col, col).clone();
            det = det.mul(&pivot);
            let inv = pivot.inv().unwrap();
            for i in col + 1..self.rows {
                if !m.get(i, col).is_zero() {
                    let factor = m.get(i, col).mul(&inv);
                    m.row_sub_scaled(i, col, &factor);
                }
            }
        }
        det
    }

    /// Smallest `k >= 1` with `self^k = 0`, or `None` if not nilpotent.
    pub fn nilpotency_index(&self) -> Option<usize> {
        assert_eq!(self.rows, self.cols);
        if self.is_zero() {
            return Some(1);
        }
        let mut p = self.clone();
        for k in 1..=self.rows {
            if p.is_zero() {
                return Some(k);
            }
            p = p.mul(self);
        }
        if p.is_zero() {
            Some(self.rows)
        } else {
            None
        }
    }

    /// Jordan basis of a nilpotent matrix, built from kernel chains. Returns
    /// `(p, block_sizes)` with `p^-1 * self * p` in Jordan form (ones on the
    /// superdiagonal of each block) and block sizes sorted descending.
    pub fn nilpotent_jordan(&self) -> Result<(ConstMatrix, Vec<usize>), Error> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let d = self.nilpotency_index().ok_or(Error::NotNilpotent)?;
        if n == 0 {
            return Ok((ConstMatrix::identity(self.field, 0), vec![]));
        }

        // kernels[k] spans ker(self^k)
        let mut power = ConstMatrix::identity(self.field, n);
        let mut kernels: Vec<Vec<Vec<Scalar>>> = vec![vec![]];
        for _ in 1..=d {
            power = self.mul(&power);
            kernels.push(power.kernel_basis());
        }

        let mut chains: Vec<Vec<Vec<Scalar>>> = Vec::new();
        // tops[h] are the height-h elements of already-built chains
        let mut tops: Vec<Vec<Vec<Scalar>>> = vec![vec![]; d + 2];

        for k in (1..=d).rev() {
            let mut level = IncrementalSpan::new(self.field, n);
            for v in &kernels[k - 1] {
                level.insert(v);
            }
            for t in &tops[k] {
                level.insert(t);
            }
            for cand in &kernels[k] {
                if level.insert(cand) {
                    // a fresh chain of length k hanging off `cand`
                    let mut chain = Vec::with_capacity(k);
                    let mut v = cand.clone();
                    for _ in 0..k {
                        chain.push(v.clone());
                        v = self.mul_vec(&v);
                    }
                    chain.reverse(); // lowest (killed by self) first
                    for (h, w) in chain.iter().enumerate() {
                        tops[h + 1].push(w.clone());
                    }
                    chains.push(chain);
                }
            }
        }

        let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(n);
        let mut blocks = Vec::new();
        for chain in &chains {
            blocks.push(chain.len());
            for v in chain {
                cols.push(v.clone());
            }
        }
        if cols.len() != n {
            // cannot happen for a genuinely nilpotent input
            return Err(Error::contradiction(
                "jordan chains do not span",
                format!("{self}"),
            ));
        }
        let p = ConstMatrix::from_fn(self.field, n, n, |i, j| cols[j][i].clone());
        p.invert()?; // sanity: basis must be invertible
        Ok((p, blocks))
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }
}

impl fmt::Display for ConstMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(", "))?;
        }
        Ok(())
    }
}

/// Result of a Gauss-Jordan reduction.
pub struct Rref {
    pub reduced: ConstMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub ops: ConstMatrix,
    pub ops_inv: ConstMatrix,
}

/// Incremental row space for independence queries.
struct IncrementalSpan {
    dim: usize,
    rows: Vec<Vec<Scalar>>, // kept in echelon form
}

impl IncrementalSpan {
    fn new(_field: FieldSpec, dim: usize) -> Self {
        IncrementalSpan { dim, rows: vec![] }
    }

    /// Insert `v`; returns true when it enlarged the span.
    fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v = v.to_vec();
        for row in &self.rows {
            let lead = row.iter().position(|c| !c.is_zero()).unwrap();
            if !v[lead].is_zero() {
                let factor = v[lead].div(&row[lead]).unwrap();
                for k in 0..self.dim {
                    v[k] = v[k].sub(&row[k].mul(&factor));
                }
            }
        }
        if v.iter().all(Scalar::is_zero) {
            false
        } else {
            self.rows.push(v);
            self.rows.sort_by_key(|r| r.iter().position(|c| !c.is_zero()));
            true
        }
    }
}

/// An invertible pair (S, T) for equivalence transforms, with the inverses
/// checked at construction.
#[derive(Clone, Debug)]
pub struct Transform {
    pub s: ConstMatrix,
    pub s_inv: ConstMatrix,
    pub t: ConstMatrix,
    pub t_inv: ConstMatrix,
}

impl Transform {
    pub fn new(s: ConstMatrix, s_inv: ConstMatrix, t: ConstMatrix, t_inv: ConstMatrix) -> Self {
        assert!(s.mul(&s_inv).is_identity(), "S * S^-1 must be the identity");
        assert!(t.mul(&t_inv).is_identity(), "T * T^-1 must be the identity");
        Transform { s, s_inv, t, t_inv }
    }

    pub fn identity(field: FieldSpec, m: usize, n: usize) -> Self {
        Transform {
            s: ConstMatrix::identity(field, m),
            s_inv: ConstMatrix::identity(field, m),
            t: ConstMatrix::identity(field, n),
            t_inv: ConstMatrix::identity(field, n),
        }
    }

    /// Similarity transform by `u`: S = u^-1, T = u.
    pub fn similarity(u: ConstMatrix) -> Result<Self, Error> {
        let u_inv = u.invert()?;
        Ok(Transform::new(u_inv.clone(), u.clone(), u, u_inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Rationals
    }

    #[test]
    fn rref_of_identity() {
        let rr = ConstMatrix::identity(q(), 3).rref();
        assert_eq!(rr.rank, 3);
        assert!(ConstMatrix::identity(q(), 3).kernel_basis().is_empty());
    }

    #[test]
    fn rref_of_zero_matrix() {
        let z = ConstMatrix::zeros(q(), 2, 2);
        assert_eq!(z.rank(), 0);
        let k = z.kernel_basis();
        assert_eq!(k.len(), 2);
        assert_eq!(k[0], vec![Scalar::from_int(q(), 1), Scalar::from_int(q(), 0)]);
        assert_eq!(k[1], vec![Scalar::from_int(q(), 0), Scalar::from_int(q(), 1)]);
    }

    // Hand oracle: x + y = 0 has kernel spanned by (1, -1).
    #[test]
    fn rank_one_kernel() {
        let m = ConstMatrix::from_ints(q(), &[&[1, 1], &[-1, -1]]);
        assert_eq!(m.rank(), 1);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(m.mul_vec(&k[0]), vec![q().zero(), q().zero()]);
        assert_eq!(k[0][0].mul(&Scalar::from_int(q(), -1)), k[0][1]);
    }

    #[test]
    fn rref_is_idempotent_and_consistent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for field in [q(), FieldSpec::prime(5).unwrap()] {
            for _ in 0..50 {
                let m = ConstMatrix::from_fn(field, 4, 5, |_, _| {
                    Scalar::from_int(field, rng.random_range(-3..4))
                });
                let rr = m.rref();
                assert_eq!(rr.ops.mul(&m), rr.reduced);
                assert!(rr.ops.mul(&rr.ops_inv).is_identity());
                assert_eq!(rr.reduced.rref().reduced, rr.reduced);
                assert_eq!(rr.rank + m.kernel_basis().len(), m.cols());
                for v in m.kernel_basis() {
                    assert!(m.mul_vec(&v).iter().all(Scalar::is_zero));
                }
            }
        }
    }

    #[test]
    fn inverse_of_rotation() {
        let m = ConstMatrix::from_ints(q(), &[&[0, -1], &[1, 0]]);
        let inv = m.invert().unwrap();
        assert_eq!(inv, ConstMatrix::from_ints(q(), &[&[0, 1], &[-1, 0]]));
        assert!(m.mul(&inv).is_identity());
    }

    #[test]
    fn inverse_of_unitriangular() {
        let t = ConstMatrix::from_ints(q(), &[&[1, -1, 0], &[0, 1, -1], &[0, 0, 1]]);
        let t_inv = t.invert().unwrap();
        assert_eq!(
            t_inv,
            ConstMatrix::from_ints(q(), &[&[1, 1, 1], &[0, 1, 1], &[0, 0, 1]])
        );
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = ConstMatrix::from_ints(q(), &[&[1, 2], &[2, 4]]);
        assert!(matches!(m.invert(), Err(Error::SingularMatrix)));
    }

    #[test]
    fn jordan_of_zero_matrix() {
        let z = ConstMatrix::zeros(q(), 3, 3);
        let (p, blocks) = z.nilpotent_jordan().unwrap();
        assert!(p.is_identity());
        assert_eq!(blocks, vec![1, 1, 1]);
    }

    #[test]
    fn jordan_of_single_transposition() {
        let n = ConstMatrix::from_ints(q(), &[&[0, 0], &[1, 0]]);
        let (p, blocks) = n.nilpotent_jordan().unwrap();
        assert_eq!(blocks, vec![2]);
        let j = p.invert().unwrap().mul(&n).mul(&p);
        assert_eq!(j, ConstMatrix::from_ints(q(), &[&[0, 1], &[0, 0]]));
    }

    #[test]
    fn jordan_of_square_zero_rank_one() {
        // u * v^t with v^t u = 0, so n^2 = 0 and rank 1: blocks [2, 1]
        let n = ConstMatrix::from_ints(q(), &[&[1, 1, -1], &[0, 0, 0], &[1, 1, -1]]);
        assert_eq!(n.mul(&n).rank(), 0);
        let (p, blocks) = n.nilpotent_jordan().unwrap();
        assert_eq!(blocks, vec![2, 1]);
        let j = p.invert().unwrap().mul(&n).mul(&p);
        assert_eq!(
            j,
            ConstMatrix::from_ints(q(), &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]])
        );
    }

    #[test]
    fn jordan_full_chain() {
        // rank 2 nilpotent 3x3: a single block of size 3
        let n = ConstMatrix::from_ints(q(), &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]]);
        let (p, blocks) = n.nilpotent_jordan().unwrap();
        assert_eq!(blocks, vec![3]);
        let j = p.invert().unwrap().mul(&n).mul(&p);
        assert_eq!(
            j,
            ConstMatrix::from_ints(q(), &[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]])
        );
    }

    #[test]
    fn non_nilpotent_is_rejected() {
        let m = ConstMatrix::identity(q(), 2);
        assert!(matches!(m.nilpotent_jordan(), Err(Error::NotNilpotent)));
    }

    #[test]
    fn jordan_over_prime_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for field in [q(), FieldSpec::prime(2).unwrap(), FieldSpec::prime(5).unwrap()] {
            for _ in 0..40 {
                let n = rng.random_range(2..6);
                // random strictly lower triangular, hence nilpotent
                let m = ConstMatrix::from_fn(field, n, n, |i, j| {
                    if j < i {
                        Scalar::from_int(field, rng.random_range(-3..4))
                    } else {
                        field.zero()
                    }
                });
                let (p, blocks) = m.nilpotent_jordan().unwrap();
                assert_eq!(blocks.iter().sum::<usize>(), n);
                assert!(blocks.windows(2).all(|w| w[0] >= w[1]));
                let j = p.invert().unwrap().mul(&m).mul(&p);
                // verify the exact Jordan shape
                let mut expect = ConstMatrix::zeros(field, n, n);
                let mut at = 0;
                for &b in &blocks {
                    for k in 0..b - 1 {
                        expect.set(at + k, at + k + 1, field.one());
                    }
                    at += b;
                }
                assert_eq!(j, expect);
            }
        }
    }

    #[test]
    fn solve_particular_solution() {
        let m = ConstMatrix::from_ints(q(), &[&[1, 2, 0], &[0, 0, 1]]);
        let b = vec![Scalar::from_int(q(), 3), Scalar::from_int(q(), 4)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        let b_bad = vec![q().zero(); 2];
        assert!(m.solve(&b_bad).is_some());
        let inconsistent = ConstMatrix::from_ints(q(), &[&[1, 0], &[1, 0]]);
        assert!(inconsistent
            .solve(&[q().zero(), q().one()])
            .is_none());
    }

    #[test]
    fn transform_checks_inverses() {
        let t = Transform::similarity(ConstMatrix::from_ints(q(), &[&[1, 1], &[0, 1]])).unwrap();
        assert!(t.s.mul(&t.s_inv).is_identity());
    }
}
