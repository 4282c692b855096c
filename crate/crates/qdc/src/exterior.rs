//! Exterior algebra over the complexified coframe of the flat model.
//!
//! A wedge monomial is a bitmask over the 4n letters dz_1..dz_{2n},
//! dz̄_1..dz̄_{2n} (in that order); antisymmetry is normalized by sorted
//! monomials with sign bookkeeping. Coefficients are either Gaussian
//! rationals (constant forms) or polynomials (the calculus layer).

use crate::poly::Poly;
use crate::scalar::GaussRat;
use std::collections::BTreeMap;
use std::fmt;

pub type Mono = u16;

pub fn popcount(m: Mono) -> usize {
    m.count_ones() as usize
}

fn below(mask: Mono, letter: usize) -> usize {
    (mask & ((1 << letter) - 1)).count_ones() as usize
}

/// Sign of e_a ∧ e_b for disjoint sorted monomials, 0 if they overlap.
pub fn wedge_sign(a: Mono, b: Mono) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut inversions = 0usize;
    let mut bb = b;
    while bb != 0 {
        let l = bb.trailing_zeros() as usize;
        inversions += (a >> (l + 1)).count_ones() as usize;
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Coefficient ring interface shared by GaussRat and Poly.
pub trait Coeff: Clone + PartialEq {
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn scale_gr(&self, c: &GaussRat) -> Self;
}

impl Coeff for GaussRat {
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.clone() + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        self.clone().neg()
    }
    fn scale_gr(&self, c: &GaussRat) -> Self {
        self * c
    }
}

impl Coeff for Poly {
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn scale_gr(&self, c: &GaussRat) -> Self {
        self.scale(c)
    }
}

/// A form: sparse map from wedge monomials to coefficients.
#[derive(Clone, PartialEq)]
pub struct Form<C: Coeff> {
    terms: BTreeMap<Mono, C>,
}

pub type ExteriorForm = Form<GaussRat>;
pub type PolyForm = Form<Poly>;

impl<C: Coeff> Form<C> {
    pub fn zero() -> Self {
        Form {
            terms: BTreeMap::new(),
        }
    }

    pub fn term(mono: Mono, c: C) -> Self {
        let mut f = Form::zero();
        f.add_term(mono, &c);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, mono: Mono) -> Option<&C> {
        self.terms.get(&mono)
    }

    pub fn add_term(&mut self, mono: Mono, c: &C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add_ref(c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Form<C>) -> Form<C> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, other: &Form<C>) -> Form<C> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form<C> {
        let mut out = Form::zero();
        for (m, c) in &self.terms {
            out.terms.insert(*m, c.neg_ref());
        }
        out
    }

    pub fn scale(&self, c: &GaussRat) -> Form<C> {
        let mut out = Form::zero();
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            out.add_term(*m, &v.scale_gr(c));
        }
        out
    }

    /// Graded-commutative wedge product.
    pub fn wedge(&self, other: &Form<C>) -> Form<C> {
        let mut out = Form::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let s = wedge_sign(*ma, *mb);
                if s == 0 {
                    continue;
                }
                let mut c = ca.mul_ref(cb);
                if s < 0 {
                    c = c.neg_ref();
                }
                out.add_term(*ma | *mb, &c);
            }
        }
        out
    }

    /// The degree if homogeneous, None for zero or mixed forms.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys();
        let first = popcount(*it.next()?);
        if it.all(|m| popcount(*m) == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn degree_component(&self, d: usize) -> Form<C> {
        let mut out = Form::zero();
        for (m, c) in &self.terms {
            if popcount(*m) == d {
                out.terms.insert(*m, c.clone());
            }
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|m| popcount(*m)).max().unwrap_or(0)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Form<D> {
        let mut out = Form::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, &f(c));
        }
        out
    }
}

/// Single-term linear images of the coframe letters: letter ↦ coeff·letter.
/// This covers I, J, K and the su(2) generators on the flat model.
#[derive(Clone, Debug)]
pub struct LetterMap {
    pub images: Vec<Option<(usize, GaussRat)>>,
}

impl LetterMap {
    pub fn zero(letters: usize) -> Self {
        LetterMap {
            images: vec![None; letters],
        }
    }

    pub fn letters(&self) -> usize {
        self.images.len()
    }

    /// Composition: apply `self` after `other`.
    pub fn compose(&self, other: &LetterMap) -> LetterMap {
        let mut images = vec![None; other.images.len()];
        for (l, img) in other.images.iter().enumerate() {
            if let Some((m, c)) = img {
                if let Some((m2, c2)) = &self.images[*m] {
                    let prod = c * c2;
                    if !prod.is_zero() {
                        images[l] = Some((*m2, prod));
                    }
                }
            }
        }
        LetterMap { images }
    }

    pub fn scale(&self, s: &GaussRat) -> LetterMap {
        LetterMap {
            images: self
                .images
                .iter()
                .map(|img| {
                    img.as_ref().and_then(|(m, c)| {
                        let p = c * s;
                        if p.is_zero() {
                            None
                        } else {
                            Some((*m, p))
                        }
                    })
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &LetterMap) -> Result<LetterMap, &'static str> {
        // only defined when the images stay single-term
        let mut images = Vec::with_capacity(self.images.len());
        for (a, b) in self.images.iter().zip(other.images.iter()) {
            let img = match (a, b) {
                (None, None) => None,
                (Some(x), None) => Some(x.clone()),
                (None, Some(y)) => Some(y.clone()),
                (Some((m1, c1)), Some((m2, c2))) => {
                    if m1 != m2 {
                        return Err("sum is not single-term");
                    }
                    let s = c1.clone() + c2;
                    if s.is_zero() {
                        None
                    } else {
                        Some((*m1, s))
                    }
                }
            };
            images.push(img);
        }
        Ok(LetterMap { images })
    }

    /// Derivation extension to a form.
    pub fn derivation<C: Coeff>(&self, form: &Form<C>) -> Form<C> {
        let mut out = Form::zero();
        for (mask, c) in form.terms() {
            let mut bb = *mask;
            while bb != 0 {
                let l = bb.trailing_zeros() as usize;
                bb &= bb - 1;
                if let Some((m, coef)) = &self.images[l] {
                    let rest = mask & !(1 << l);
                    if rest & (1 << m) != 0 {
                        continue;
                    }
                    let sign = below(rest, l) + below(rest, *m);
                    let mut v = c.scale_gr(coef);
                    if sign % 2 == 1 {
                        v = v.neg_ref();
                    }
                    out.add_term(rest | (1 << m), &v);
                }
            }
        }
        out
    }

    /// Multiplicative extension to a form (for algebra automorphisms).
    pub fn multiplicative<C: Coeff>(&self, form: &Form<C>) -> Form<C> {
        let mut out = Form::zero();
        'term: for (mask, c) in form.terms() {
            let mut images: Vec<(usize, GaussRat)> = Vec::new();
            let mut bb = *mask;
            while bb != 0 {
                let l = bb.trailing_zeros() as usize;
                bb &= bb - 1;
                match &self.images[l] {
                    None => continue 'term,
                    Some((m, coef)) => images.push((*m, coef.clone())),
                }
            }
            let mut scalar = GaussRat::one();
            let mut outmask: Mono = 0;
            for (m, coef) in &images {
                if outmask & (1 << m) != 0 {
                    continue 'term;
                }
                outmask |= 1 << m;
                scalar = (&scalar) * coef;
            }
            // permutation sign: inversions of the image sequence in input order
            let seq: Vec<usize> = images.iter().map(|(m, _)| *m).collect();
            let mut inv = 0usize;
            for i in 0..seq.len() {
                for j in (i + 1)..seq.len() {
                    if seq[i] > seq[j] {
                        inv += 1;
                    }
                }
            }
            let mut v = c.scale_gr(&scalar);
            if inv % 2 == 1 {
                v = v.neg_ref();
            }
            out.add_term(outmask, &v);
        }
        out
    }
}

/// All wedge monomials of the given degree over `letters` letters, sorted.
pub fn mono_basis(letters: usize, degree: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << letters) {
        let m = mask as Mono;
        if popcount(m) == degree {
            out.push(m);
        }
    }
    out
}

pub fn form_to_vec(basis: &[Mono], f: &ExteriorForm) -> Vec<GaussRat> {
    let mut v = vec![GaussRat::zero(); basis.len()];
    for (m, c) in f.terms() {
        let idx = basis
            .iter()
            .position(|b| b == m)
            .expect("monomial outside basis");
        v[idx] = c.clone();
    }
    v
}

pub fn vec_to_form(basis: &[Mono], v: &[GaussRat]) -> ExteriorForm {
    let mut f = ExteriorForm::zero();
    for (idx, c) in v.iter().enumerate() {
        f.add_term(basis[idx], c);
    }
    f
}

impl fmt::Debug for ExteriorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})·{}", c, mono_name(*m, 4))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{}]·{}", c, mono_name(*m, c.vars / 2))?;
        }
        Ok(())
    }
}

/// Human-readable name of a wedge monomial given 2n (the count of dz letters).
pub fn mono_name(mask: Mono, zletters: usize) -> String {
    if mask == 0 {
        return "1".to_string();
    }
    let mut parts = Vec::new();
    for l in 0..16 {
        if mask & (1 << l) != 0 {
            if l < zletters {
                parts.push(format!("dz{}", l + 1));
            } else {
                parts.push(format!("dzb{}", l - zletters + 1));
            }
        }
    }
    parts.join("^")
}
