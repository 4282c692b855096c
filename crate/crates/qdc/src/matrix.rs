//! Sparse exact matrices over ℚ(i): fraction-free elimination, kernels,
//! Gram-based Hermitian adjoints and inertia.

use crate::scalar::{GaussRat, Rat};
use num::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate inner product")]
    DegenerateInnerProduct,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not Hermitian")]
    NotHermitian,
}

/// Row-sparse matrix with exact Gaussian-rational entries.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseMat {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, GaussRat>>,
}

impl SparseMat {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            data: vec![BTreeMap::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMat::new(n, n);
        for i in 0..n {
            m.set(i, i, GaussRat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GaussRat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = SparseMat::new(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        SparseMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| GaussRat::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> GaussRat {
        self.data[i].get(&j).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: GaussRat) {
        if v.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &GaussRat) {
        if v.is_zero() {
            return;
        }
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, GaussRat> {
        &self.data[i]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn scale(&self, c: &GaussRat) -> SparseMat {
        let mut out = SparseMat::new(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in &self.data[i] {
                out.set(i, *j, v * c);
            }
        }
        out
    }

    pub fn add(&self, other: &SparseMat) -> SparseMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..other.rows {
            for (j, v) in &other.data[i] {
                out.add_to(i, *j, v);
            }
        }
        out
    }

    pub fn sub(&self, other: &SparseMat) -> SparseMat {
        self.add(&other.scale(&GaussRat::from_int(-1)))
    }

    pub fn mul(&self, other: &SparseMat) -> SparseMat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = SparseMat::new(self.rows, other.cols);
        for i in 0..self.rows {
            for (k, a) in &self.data[i] {
                for (j, b) in &other.data[*k] {
                    out.add_to(i, *j, &(a * b));
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMat {
        let mut out = SparseMat::new(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, v) in &self.data[i] {
                out.set(*j, i, v.clone());
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> SparseMat {
        let mut out = SparseMat::new(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, v) in &self.data[i] {
                out.set(*j, i, v.conj());
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols && *self == self.conj_transpose()
    }

    pub fn apply(&self, v: &[GaussRat]) -> Vec<GaussRat> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![GaussRat::zero(); self.rows];
        for i in 0..self.rows {
            for (j, a) in &self.data[i] {
                if !v[*j].is_zero() {
                    out[i] += &(a * &v[*j]);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &SparseMat) -> SparseMat {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn anticommutator(&self, other: &SparseMat) -> SparseMat {
        self.mul(other).add(&other.mul(self))
    }

    /// Fraction-free (Bareiss) row echelon form. Returns the reduced rows and
    /// the pivot (row, col) list; entry growth stays bounded by minors.
    fn bareiss_echelon(&self) -> (Vec<BTreeMap<usize, GaussRat>>, Vec<(usize, usize)>) {
        let mut m = self.data.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut prev = GaussRat::one();
        let mut r = 0usize;
        for c in 0..self.cols {
            // pick the sparsest nonzero pivot row to limit fill-in
            let mut best: Option<(usize, usize)> = None;
            for i in r..self.rows {
                if let Some(v) = m[i].get(&c) {
                    if !v.is_zero() {
                        let nnz = m[i].len();
                        if best.map(|(_, bn)| nnz < bn).unwrap_or(true) {
                            best = Some((i, nnz));
                        }
                    }
                }
            }
            let Some((pi, _)) = best else { continue };
            m.swap(r, pi);
            let pivot = m[r].get(&c).unwrap().clone();
            for i in (r + 1)..self.rows {
                if m[i].is_empty() {
                    continue;
                }
                let coef = m[i].get(&c).cloned().unwrap_or_else(GaussRat::zero);
                let mut newrow: BTreeMap<usize, GaussRat> = BTreeMap::new();
                let keys: Vec<usize> = m[i]
                    .keys()
                    .chain(m[r].keys())
                    .cloned()
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                for j in keys {
                    if j <= c {
                        continue;
                    }
                    let a = m[i].get(&j).cloned().unwrap_or_else(GaussRat::zero);
                    let b = m[r].get(&j).cloned().unwrap_or_else(GaussRat::zero);
                    // Bareiss update: (pivot*a − coef*b)/prev is exact
                    let num = (&pivot) * (&a) - (&coef) * (&b);
                    if num.is_zero() {
                        continue;
                    }
                    let val = num / prev.clone();
                    if !val.is_zero() {
                        newrow.insert(j, val);
                    }
                }
                m[i] = newrow;
            }
            pivots.push((r, c));
            prev = pivot;
            r += 1;
            if r == self.rows {
                break;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.bareiss_echelon().1.len()
    }

    /// Exact null-space basis. Every returned vector is annihilated by the
    /// matrix and the count equals cols − rank.
    pub fn kernel(&self) -> Vec<Vec<GaussRat>> {
        let (ech, pivots) = self.bareiss_echelon();
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let is_pivot = |c: usize| pivot_cols.contains(&c);
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot(free) {
                continue;
            }
            let mut v = vec![GaussRat::zero(); self.cols];
            v[free] = GaussRat::one();
            // back-substitute through the echelon rows, bottom-up
            for (ri, ci) in pivots.iter().rev() {
                let row = &ech[*ri];
                let mut s = GaussRat::zero();
                for (j, a) in row {
                    if *j == *ci {
                        continue;
                    }
                    if !v[*j].is_zero() {
                        s += &(a * &v[*j]);
                    }
                }
                let piv = row.get(ci).unwrap().clone();
                v[*ci] = s.neg() / piv;
            }
            basis.push(v);
        }
        basis
    }

    /// Solve A·x = b exactly; None if inconsistent.
    pub fn solve(&self, b: &[GaussRat]) -> Option<Vec<GaussRat>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = SparseMat::new(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for (j, v) in &self.data[i] {
                aug.set(i, *j, v.clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (ech, pivots) = aug.bareiss_echelon();
        // inconsistent iff the augmented column is a pivot
        if pivots.iter().any(|&(_, c)| c == self.cols) {
            return None;
        }
        let mut x = vec![GaussRat::zero(); self.cols];
        for (ri, ci) in pivots.iter().rev() {
            let row = &ech[*ri];
            let mut s = row.get(&self.cols).cloned().unwrap_or_else(GaussRat::zero);
            for (j, a) in row {
                if *j == *ci || *j == self.cols {
                    continue;
                }
                if !x[*j].is_zero() {
                    s = s - (a * &x[*j]);
                }
            }
            let piv = row.get(ci).unwrap().clone();
            x[*ci] = s / piv;
        }
        Some(x)
    }

    /// Solve A·X = B column by column; error if any column is inconsistent.
    pub fn solve_matrix(&self, b: &SparseMat) -> Result<SparseMat, MatError> {
        if b.rows != self.rows {
            return Err(MatError::DimensionMismatch(format!(
                "solve_matrix: {}x{} vs {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut out = SparseMat::new(self.cols, b.cols);
        let bt = b.transpose();
        for j in 0..b.cols {
            let col: Vec<GaussRat> = (0..b.rows).map(|i| bt.get(j, i)).collect();
            let x = self.solve(&col).ok_or(MatError::Singular)?;
            for (i, v) in x.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<SparseMat, MatError> {
        if self.rows != self.cols {
            return Err(MatError::DimensionMismatch("inverse of non-square".into()));
        }
        if self.rank() != self.rows {
            return Err(MatError::Singular);
        }
        self.solve_matrix(&SparseMat::identity(self.rows))
    }

    /// Exact inertia (positives, negatives, zeros) of a Hermitian matrix by
    /// symmetric pivoting. Off-diagonal hyperbolic blocks contribute (1,1).
    pub fn hermitian_inertia(&self) -> Result<(usize, usize, usize), MatError> {
        if !self.is_hermitian() {
            return Err(MatError::NotHermitian);
        }
        let n = self.rows;
        let mut m: Vec<Vec<GaussRat>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect();
        let mut active: Vec<usize> = (0..n).collect();
        let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
        while let Some(&_first) = active.first() {
            // prefer a nonzero diagonal pivot
            let diag = active
                .iter()
                .position(|&i| !m[i][i].is_zero())
                .map(|p| active[p]);
            if let Some(p) = diag {
                let d = m[p][p].clone();
                debug_assert!(d.is_real());
                if d.re.is_positive() {
                    pos += 1;
                } else {
                    neg += 1;
                }
                active.retain(|&i| i != p);
                let others = active.clone();
                for &i in &others {
                    for &j in &others {
                        let upd = (&m[i][p]) * (&m[p][j]);
                        let v = m[i][j].clone() - upd.scale(&(Rat::from_integer(1.into()) / d.re.clone()));
                        m[i][j] = v;
                    }
                }
                continue;
            }
            // all active diagonals are zero; find an off-diagonal coupling
            let mut pair: Option<(usize, usize)> = None;
            'outer: for (ai, &i) in active.iter().enumerate() {
                for &j in active.iter().skip(ai + 1) {
                    if !m[i][j].is_zero() {
                        pair = Some((i, j));
                        break 'outer;
                    }
                }
            }
            match pair {
                None => {
                    zero += active.len();
                    break;
                }
                Some((p, q)) => {
                    // congruence on the 2x2 block [[0,a],[ā,0]]: signature (1,1)
                    pos += 1;
                    neg += 1;
                    let a = m[p][q].clone();
                    active.retain(|&i| i != p && i != q);
                    let others = active.clone();
                    let ainv = a.inv().unwrap();
                    for &i in &others {
                        for &j in &others {
                            // Schur complement of the hyperbolic block
                            let t1 = (&m[i][p]) * &((&ainv.conj()) * (&m[q][j]));
                            let t2 = (&m[i][q]) * &((&ainv) * (&m[p][j]));
                            let v = m[i][j].clone() - t1 - t2;
                            m[i][j] = v;
                        }
                    }
                }
            }
        }
        Ok((pos, neg, zero))
    }

    /// LDL†-style certificate that a Hermitian matrix is positive
    /// semidefinite: returns the pivot list, or None if indefinite.
    pub fn psd_pivots(&self) -> Result<Option<Vec<Rat>>, MatError> {
        if !self.is_hermitian() {
            return Err(MatError::NotHermitian);
        }
        let n = self.rows;
        let mut m: Vec<Vec<GaussRat>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let d = m[k][k].clone();
            debug_assert!(d.is_real());
            if d.is_zero() {
                // PSD forces the whole remaining row to vanish
                if (k + 1..n).any(|j| !m[k][j].is_zero()) {
                    return Ok(None);
                }
                pivots.push(Rat::zero());
                continue;
            }
            if d.re.is_negative() {
                return Ok(None);
            }
            pivots.push(d.re.clone());
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let upd = (&m[i][k]) * (&m[k][j]);
                    let v = m[i][j].clone() - upd.scale(&(Rat::from_integer(1.into()) / d.re.clone()));
                    m[i][j] = v;
                }
            }
        }
        Ok(Some(pivots))
    }
}

impl std::fmt::Debug for SparseMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "SparseMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            let row: Vec<String> = (0..self.cols.min(12)).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Adjoint of a linear map between inner-product spaces given by exact Gram
/// matrices: solves Gram_dom · A = op† · Gram_cod, so ⟨op v, w⟩ = ⟨v, A w⟩.
pub fn gram_adjoint(
    op: &SparseMat,
    gram_dom: &SparseMat,
    gram_cod: &SparseMat,
) -> Result<SparseMat, MatError> {
    if gram_dom.rows() != op.cols() || gram_cod.rows() != op.rows() {
        return Err(MatError::DimensionMismatch(format!(
            "gram_adjoint: op {}x{}, gram_dom {}, gram_cod {}",
            op.rows(),
            op.cols(),
            gram_dom.rows(),
            gram_cod.rows()
        )));
    }
    if !gram_dom.is_hermitian() || !gram_cod.is_hermitian() {
        return Err(MatError::NotHermitian);
    }
    let rhs = op.conj_transpose().mul(gram_cod);
    gram_dom
        .solve_matrix(&rhs)
        .map_err(|_| MatError::DegenerateInnerProduct)
}

/// Echelonized span with exact membership queries.
#[derive(Clone)]
pub struct SpanBasis {
    cols: usize,
    rows: Vec<BTreeMap<usize, GaussRat>>,
    pivots: Vec<usize>,
}

impl SpanBasis {
    pub fn from_vectors(cols: usize, vectors: &[Vec<GaussRat>]) -> Self {
        let mut sb = SpanBasis {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        };
        for v in vectors {
            sb.insert(v.clone());
        }
        sb
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vec<GaussRat>) -> Vec<GaussRat> {
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            if v[p].is_zero() {
                continue;
            }
            let factor = v[p].clone() / row.get(&p).unwrap().clone();
            for (j, a) in row {
                let delta = a * &factor;
                let cur = std::mem::replace(&mut v[*j], GaussRat::zero());
                v[*j] = cur - delta;
            }
        }
        v
    }

    /// Add a vector to the span; returns false if it was already contained.
    pub fn insert(&mut self, v: Vec<GaussRat>) -> bool {
        assert_eq!(v.len(), self.cols);
        let r = self.reduce(v);
        match r.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(p) => {
                let mut row = BTreeMap::new();
                for (j, x) in r.into_iter().enumerate() {
                    if !x.is_zero() {
                        row.insert(j, x);
                    }
                }
                self.rows.push(row);
                self.pivots.push(p);
                true
            }
        }
    }

    pub fn contains(&self, v: &[GaussRat]) -> bool {
        self.reduce(v.to_vec()).iter().all(|x| x.is_zero())
    }

    pub fn equals(&self, other: &SpanBasis) -> bool {
        self.dim() == other.dim()
            && self
                .rows
                .iter()
                .all(|r| other.contains(&sparse_to_dense(self.cols, r)))
    }
}

fn sparse_to_dense(cols: usize, row: &BTreeMap<usize, GaussRat>) -> Vec<GaussRat> {
    let mut v = vec![GaussRat::zero(); cols];
    for (j, a) in row {
        v[*j] = a.clone();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn kernel_of_identity_is_empty() {
        assert!(SparseMat::identity(2).kernel().is_empty());
    }

    #[test]
    fn kernel_of_zero_matrix_is_everything() {
        let m = SparseMat::new(3, 3);
        assert_eq!(m.kernel().len(), 3);
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let m = SparseMat::from_int_rows(&[&[1, 1], &[2, 2]]);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        // basis vector is proportional to (1, −1) and exactly annihilated
        let v = &k[0];
        assert_eq!(v[0], v[1].clone().neg());
        assert!(m.apply(v).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn rank_nullity_holds() {
        let m = SparseMat::from_int_rows(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        let k = m.kernel();
        assert_eq!(m.rank() + k.len(), 3);
        for v in &k {
            assert!(m.apply(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn gram_adjoint_identity_and_orthonormal() {
        let id = SparseMat::identity(3);
        let g = SparseMat::identity(3);
        assert_eq!(gram_adjoint(&id, &g, &g).unwrap(), id);

        let mut m = SparseMat::new(2, 2);
        m.set(0, 1, GaussRat::i());
        let a = gram_adjoint(&m, &SparseMat::identity(2), &SparseMat::identity(2)).unwrap();
        assert_eq!(a, m.conj_transpose());
    }

    #[test]
    fn gram_adjoint_weighted_example() {
        // Gram diag(1,2), op e2 ↦ e1 has adjoint e1 ↦ e2/2
        let mut gram = SparseMat::identity(2);
        gram.set(1, 1, GaussRat::from_int(2));
        let mut op = SparseMat::new(2, 2);
        op.set(0, 1, GaussRat::one());
        let a = gram_adjoint(&op, &gram, &gram).unwrap();
        let mut expect = SparseMat::new(2, 2);
        expect.set(1, 0, GaussRat::from_rat(rat(1, 2)));
        assert_eq!(a, expect);
    }

    #[test]
    fn gram_adjoint_is_involutive() {
        let gram_dom = SparseMat::from_int_rows(&[&[2, 1], &[1, 3]]);
        let gram_cod = SparseMat::from_int_rows(&[&[1, 0], &[0, 5]]);
        let op = SparseMat::from_int_rows(&[&[1, -2], &[0, 4]]);
        let a = gram_adjoint(&op, &gram_dom, &gram_cod).unwrap();
        let back = gram_adjoint(&a, &gram_cod, &gram_dom).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn gram_adjoint_rejects_singular_gram() {
        let gram = SparseMat::from_int_rows(&[&[1, 1], &[1, 1]]);
        let op = SparseMat::identity(2);
        assert_eq!(
            gram_adjoint(&op, &gram, &SparseMat::identity(2)),
            Err(MatError::DegenerateInnerProduct)
        );
    }

    #[test]
    fn inertia_examples() {
        let hyp = SparseMat::from_int_rows(&[&[0, 1], &[1, 0]]);
        assert_eq!(hyp.hermitian_inertia().unwrap(), (1, 1, 0));

        let d = SparseMat::from_int_rows(&[&[2, 0, 0], &[0, -2, 0], &[0, 0, -2]]);
        assert_eq!(d.hermitian_inertia().unwrap(), (1, 2, 0));
    }

    #[test]
    fn inertia_adds_on_direct_sums() {
        let m = SparseMat::from_int_rows(&[
            &[0, 1, 0, 0],
            &[1, 0, 0, 0],
            &[0, 0, 3, 0],
            &[0, 0, 0, -5],
        ]);
        assert_eq!(m.hermitian_inertia().unwrap(), (2, 2, 0));
    }

    #[test]
    fn psd_certificate() {
        let m = SparseMat::from_int_rows(&[&[2, 1], &[1, 1]]);
        assert!(m.psd_pivots().unwrap().is_some());
        let ind = SparseMat::from_int_rows(&[&[1, 0], &[0, -1]]);
        assert!(ind.psd_pivots().unwrap().is_none());
        let singular_psd = SparseMat::from_int_rows(&[&[1, 1], &[1, 1]]);
        assert!(singular_psd.psd_pivots().unwrap().is_some());
    }

    #[test]
    fn span_basis_membership() {
        let one = GaussRat::from_int(1);
        let two = GaussRat::from_int(2);
        let sb = SpanBasis::from_vectors(
            3,
            &[
                vec![one.clone(), two.clone(), GaussRat::zero()],
                vec![GaussRat::zero(), one.clone(), one.clone()],
            ],
        );
        assert_eq!(sb.dim(), 2);
        assert!(sb.contains(&[one.clone(), GaussRat::from_int(3), one.clone()]));
        assert!(!sb.contains(&[one.clone(), GaussRat::zero(), GaussRat::zero()]));
    }
}
