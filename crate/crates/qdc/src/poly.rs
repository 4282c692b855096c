//! Sparse multivariate polynomials with Gaussian-rational coefficients.
//!
//! Exponent vectors are dense fixed-length arrays of small integers; the
//! variable set is the complexified coordinate frame z_1..z_m, z̄_1..z̄_m
//! (m = 2n), so conjugation is the variable swap k ↔ k+m plus coefficient
//! conjugation.

use crate::scalar::GaussRat;
use std::collections::BTreeMap;
use std::fmt;

pub type Expo = Vec<u8>;

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    pub vars: usize,
    terms: BTreeMap<Expo, GaussRat>,
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: GaussRat) -> Self {
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars], c);
        }
        p
    }

    pub fn one(vars: usize) -> Self {
        Poly::constant(vars, GaussRat::one())
    }

    pub fn var(vars: usize, idx: usize) -> Self {
        assert!(idx < vars);
        let mut e = vec![0u8; vars];
        e[idx] = 1;
        let mut p = Poly::zero(vars);
        p.terms.insert(e, GaussRat::one());
        p
    }

    pub fn monomial(vars: usize, expo: Expo, c: GaussRat) -> Self {
        assert_eq!(expo.len(), vars);
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(expo, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &GaussRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Max total exponent, or None for the zero polynomial.
    pub fn total_degree(&self) -> Option<usize> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
    }

    pub fn add_term(&mut self, expo: Expo, c: &GaussRat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(expo) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.clone().neg());
        }
        out
    }

    pub fn scale(&self, c: &GaussRat) -> Poly {
        let mut out = Poly::zero(self.vars);
        if c.is_zero() {
            return out;
        }
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = Poly::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = ea.clone();
                for (x, y) in e.iter_mut().zip(eb.iter()) {
                    *x += *y;
                }
                out.add_term(e, &(ca * cb));
            }
        }
        out
    }

    /// Exact partial derivative with respect to variable `idx`.
    pub fn derivative(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (e, c) in &self.terms {
            let k = e[idx];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] = k - 1;
            out.add_term(e2, &c.scale(&crate::scalar::rat_int(k as i64)));
        }
        out
    }

    pub fn mul_var(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[idx] += 1;
            out.terms.insert(e2, c.clone());
        }
        out
    }

    /// Complex conjugate: swaps variables k ↔ k+half and conjugates coefficients.
    pub fn conj(&self, half: usize) -> Poly {
        assert_eq!(self.vars, 2 * half);
        let mut out = Poly::zero(self.vars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u8; self.vars];
            for k in 0..half {
                e2[k] = e[k + half];
                e2[k + half] = e[k];
            }
            out.add_term(e2, &c.conj());
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let half = self.vars / 2;
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (idx, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = if idx < half {
                    format!("z{}", idx + 1)
                } else {
                    format!("zb{}", idx - half + 1)
                };
                if k == 1 {
                    write!(f, "*{}", name)?;
                } else {
                    write!(f, "*{}^{}", name, k)?;
                }
            }
        }
        Ok(())
    }
}
