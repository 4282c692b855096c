//! Finite-dimensional su(2)-representation theory over exact scalars.
//!
//! The triple convention is hx = x, hy = −y, gx = y, fy = x on the
//! 2-dimensional fundamental representation, so f raises the h-eigenvalue
//! and g lowers it; brackets are [h,f] = 2f, [h,g] = −2g, [f,g] = h.

use crate::matrix::SparseMat;
use crate::scalar::{rat_int, GaussRat};
use num::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Su2Error {
    #[error("matrices must be square and of equal dimension")]
    DimensionMismatch,
    #[error("bracket relations do not hold")]
    NotATriple,
    #[error("not an algebraic su(2)-representation")]
    NotAlgebraic,
}

/// Matrices (h, f, g) realizing the complexified su(2) on a finite space.
#[derive(Clone, Debug)]
pub struct Sl2Action {
    pub h: SparseMat,
    pub f: SparseMat,
    pub g: SparseMat,
}

/// Weight-k multiplicities together with exact h-eigenspace bases.
#[derive(Clone, Debug)]
pub struct WeightDecomposition {
    pub multiplicity: BTreeMap<u32, usize>,
    pub eigenspaces: BTreeMap<i64, Vec<Vec<GaussRat>>>,
    pub dim: usize,
}

impl WeightDecomposition {
    pub fn top_weight(&self) -> Option<u32> {
        self.multiplicity.keys().next_back().copied()
    }

    /// Σ_k multiplicity(k)·(k+1), which must equal the total dimension.
    pub fn dimension_count(&self) -> usize {
        self.multiplicity
            .iter()
            .map(|(k, m)| (*k as usize + 1) * m)
            .sum()
    }
}

impl Sl2Action {
    pub fn new(h: SparseMat, f: SparseMat, g: SparseMat) -> Result<Self, Su2Error> {
        let d = h.rows();
        if h.cols() != d || f.rows() != d || f.cols() != d || g.rows() != d || g.cols() != d {
            return Err(Su2Error::DimensionMismatch);
        }
        Ok(Sl2Action { h, f, g })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// True iff [h,f] = 2f, [h,g] = −2g and [f,g] = h hold exactly.
    pub fn verify_triple(&self) -> Result<bool, Su2Error> {
        let d = self.h.rows();
        if self.h.cols() != d
            || self.f.rows() != d
            || self.f.cols() != d
            || self.g.rows() != d
            || self.g.cols() != d
        {
            return Err(Su2Error::DimensionMismatch);
        }
        let two = GaussRat::from_int(2);
        let ok = self.h.commutator(&self.f) == self.f.scale(&two)
            && self.h.commutator(&self.g) == self.g.scale(&two).scale(&GaussRat::from_int(-1))
            && self.f.commutator(&self.g) == self.h;
        Ok(ok)
    }

    /// The irreducible weight-k representation on S^k of the fundamental one,
    /// in the monomial basis x^k, x^{k−1}y, …, y^k.
    pub fn irreducible(k: u32) -> Sl2Action {
        let d = k as usize + 1;
        let mut h = SparseMat::new(d, d);
        let mut f = SparseMat::new(d, d);
        let mut g = SparseMat::new(d, d);
        for idx in 0..d {
            // basis vector x^(k−idx) y^idx has h-eigenvalue k − 2·idx
            let a = (k as i64) - idx as i64;
            let b = idx as i64;
            h.set(idx, idx, GaussRat::from_int(a - b));
            if b > 0 {
                // f: y ↦ x as a derivation
                f.set(idx - 1, idx, GaussRat::from_int(b));
            }
            if a > 0 {
                g.set(idx + 1, idx, GaussRat::from_int(a));
            }
        }
        Sl2Action { h, f, g }
    }

    /// Tensor product action (Kronecker sums of the generators).
    pub fn tensor(&self, other: &Sl2Action) -> Sl2Action {
        let kron = |a: &SparseMat, b: &SparseMat| -> SparseMat {
            let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
            let mut out = SparseMat::new(ra * rb, ca * cb);
            for i in 0..ra {
                for (j, av) in a.row(i) {
                    for p in 0..rb {
                        for (q, bv) in b.row(p) {
                            out.set(i * rb + p, j * cb + q, av * bv);
                        }
                    }
                }
            }
            out
        };
        let ia = SparseMat::identity(self.dim());
        let ib = SparseMat::identity(other.dim());
        Sl2Action {
            h: kron(&self.h, &ib).add(&kron(&ia, &other.h)),
            f: kron(&self.f, &ib).add(&kron(&ia, &other.f)),
            g: kron(&self.g, &ib).add(&kron(&ia, &other.g)),
        }
    }

    /// Conjugate the action by an invertible matrix.
    pub fn conjugate(&self, p: &SparseMat) -> Result<Sl2Action, Su2Error> {
        let pinv = p.inverse().map_err(|_| Su2Error::DimensionMismatch)?;
        Ok(Sl2Action {
            h: p.mul(&self.h).mul(&pinv),
            f: p.mul(&self.f).mul(&pinv),
            g: p.mul(&self.g).mul(&pinv),
        })
    }

    fn eigenvalue_bound(&self) -> i64 {
        let mut bound = num::BigRational::zero();
        for i in 0..self.h.rows() {
            let mut s = num::BigRational::zero();
            for (_, v) in self.h.row(i) {
                s += v.re.abs() + v.im.abs();
            }
            if s > bound {
                bound = s;
            }
        }
        bound.ceil().to_integer().to_i64().unwrap_or(i64::MAX / 2)
    }

    /// Decompose by weight: exact h-eigenspaces, multiplicities from their
    /// dimension differences, with the raising property of f verified.
    pub fn weight_decompose(&self) -> Result<WeightDecomposition, Su2Error> {
        let dim = self.dim();
        if dim == 0 {
            return Ok(WeightDecomposition {
                multiplicity: BTreeMap::new(),
                eigenspaces: BTreeMap::new(),
                dim,
            });
        }
        let bound = self.eigenvalue_bound();
        let mut eigenspaces: BTreeMap<i64, Vec<Vec<GaussRat>>> = BTreeMap::new();
        let mut found = 0usize;
        for j in -bound..=bound {
            let shifted = self.h.sub(&SparseMat::identity(dim).scale(&GaussRat::from_int(j)));
            let basis = shifted.kernel();
            if !basis.is_empty() {
                found += basis.len();
                eigenspaces.insert(j, basis);
            }
            if found == dim {
                break;
            }
        }
        if found != dim {
            return Err(Su2Error::NotAlgebraic);
        }
        if !self.verify_triple()? {
            return Err(Su2Error::NotATriple);
        }
        let d = |j: i64| eigenspaces.get(&j).map(|b| b.len()).unwrap_or(0);
        // f maps the eigenvalue-j space into eigenvalue j+2
        for (j, basis) in &eigenspaces {
            for v in basis {
                let fv = self.f.apply(v);
                let hfv = self.h.apply(&fv);
                let scaled: Vec<GaussRat> = fv
                    .iter()
                    .map(|x| x.scale(&rat_int(j + 2)))
                    .collect();
                if hfv != scaled {
                    return Err(Su2Error::NotAlgebraic);
                }
            }
        }
        let mut multiplicity = BTreeMap::new();
        let top = eigenspaces.keys().next_back().copied().unwrap_or(0);
        for k in 0..=top.max(0) {
            if d(-k) != d(k) {
                return Err(Su2Error::NotAlgebraic);
            }
            let m = d(k) as i64 - d(k + 2) as i64;
            if m < 0 {
                return Err(Su2Error::NotAlgebraic);
            }
            if m > 0 {
                multiplicity.insert(k as u32, m as usize);
            }
        }
        let wd = WeightDecomposition {
            multiplicity,
            eigenspaces,
            dim,
        };
        if wd.dimension_count() != dim {
            return Err(Su2Error::NotAlgebraic);
        }
        Ok(wd)
    }
}

/// Clebsch–Gordan weights of V_i ⊗ V_j: [i+j, i+j−2, …, |j−i|].
/// Arguments commute; they are swapped internally if i > j.
pub fn clebsch_gordan(i: u32, j: u32) -> Vec<u32> {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    (0..=i).map(|k| i + j - 2 * k).collect()
}


impl PartialEq for WeightDecomposition {
    fn eq(&self, other: &Self) -> bool {
        self.multiplicity == other.multiplicity && self.dim == other.dim
    }
}
