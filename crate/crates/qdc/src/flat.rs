//! The flat quaternionic model: I, J, K on the complexified coframe of ℍⁿ,
//! the induced su(2)-action on forms, weight splitting, and the Hodge
//! bigrading for each complex structure.
//!
//! Letter convention: indices 0..2n−1 are dz_1..dz_{2n}, indices 2n..4n−1
//! are dz̄_1..dz̄_{2n}, with I-holomorphic coordinates z_{2a−1} = x⁰_a+√−1x¹_a,
//! z_{2a} = x²_a+√−1x³_a. J sends dz_{2a−1} ↦ dz̄_{2a}, dz_{2a} ↦ −dz̄_{2a−1}
//! and K = I∘J, which makes Ω = Σ dz_{2a−1}∧dz_{2a}.

use crate::exterior::{mono_basis, vec_to_form, Coeff, ExteriorForm, Form, LetterMap, Mono};
use crate::matrix::{SparseMat, SpanBasis};
use crate::scalar::{rat, rat_int, GaussRat};
use crate::su2::{Sl2Action, WeightDecomposition};
use std::collections::BTreeMap;

/// Complex structure label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    I,
    J,
    K,
}

struct DegreeData {
    basis: Vec<Mono>,
    index: BTreeMap<Mono, usize>,
    action: Sl2Action,
    weights: WeightDecomposition,
    plus_projector: SparseMat,
    plus_basis: Vec<ExteriorForm>,
    v_basis: Vec<ExteriorForm>,
    plus_span: SpanBasis,
    v_span: SpanBasis,
}

/// Weight-< i and weight-i parts of Λ^i.
pub struct WeightSplit<'a> {
    pub v_basis: &'a [ExteriorForm],
    pub plus_basis: &'a [ExteriorForm],
    pub projector: &'a SparseMat,
}

pub struct FlatModel {
    pub n: usize,
    i_map: LetterMap,
    j_map: LetterMap,
    k_map: LetterMap,
    h_map: LetterMap,
    f_map: LetterMap,
    g_map: LetterMap,
    pub omega: ExteriorForm,
    pub omega_bar: ExteriorForm,
    pub omega_i: ExteriorForm,
    pub omega_j: ExteriorForm,
    pub omega_k: ExteriorForm,
    degrees: Vec<DegreeData>,
}

impl FlatModel {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && 4 * n <= 16, "letter mask is 16 bits");
        let letters = 4 * n;
        let zl = 2 * n;

        let mut i_map = LetterMap::zero(letters);
        for k in 0..zl {
            i_map.images[k] = Some((k, GaussRat::i()));
            i_map.images[zl + k] = Some((zl + k, GaussRat::i().neg()));
        }
        let mut j_map = LetterMap::zero(letters);
        for a in 0..n {
            let z_odd = 2 * a;
            let z_even = 2 * a + 1;
            j_map.images[z_odd] = Some((zl + z_even, GaussRat::one()));
            j_map.images[z_even] = Some((zl + z_odd, GaussRat::from_int(-1)));
            j_map.images[zl + z_odd] = Some((z_even, GaussRat::one()));
            j_map.images[zl + z_even] = Some((z_odd, GaussRat::from_int(-1)));
        }
        let k_map = i_map.compose(&j_map);

        // sl(2): h is the Hodge grading p−q; f maps a (0,1)-letter to its
        // J-image and kills (1,0); g does the opposite with a sign, so that
        // [h,f]=2f, [h,g]=−2g, [f,g]=h hold on Λ¹ and hence, as derivations,
        // on all of Λ*.
        let mut h_map = LetterMap::zero(letters);
        let mut f_map = LetterMap::zero(letters);
        let mut g_map = LetterMap::zero(letters);
        for k in 0..zl {
            h_map.images[k] = Some((k, GaussRat::one()));
            h_map.images[zl + k] = Some((zl + k, GaussRat::from_int(-1)));
            f_map.images[zl + k] = j_map.images[zl + k].clone();
            g_map.images[k] = j_map.images[k]
                .clone()
                .map(|(m, c)| (m, c.neg()));
        }

        let mut omega = ExteriorForm::zero();
        let mut omega_bar = ExteriorForm::zero();
        for a in 0..n {
            omega.add_term((1 << (2 * a)) | (1 << (2 * a + 1)), &GaussRat::one());
            omega_bar.add_term(
                (1 << (zl + 2 * a)) | (1 << (zl + 2 * a + 1)),
                &GaussRat::one(),
            );
        }
        let mut omega_i = ExteriorForm::zero();
        for k in 0..zl {
            omega_i.add_term(
                (1 << k) | (1 << (zl + k)),
                &GaussRat::new(rat_int(0), rat(1, 2)),
            );
        }
        let half = GaussRat::from_rat(rat(1, 2));
        let omega_j = omega.add(&omega_bar).scale(&half);
        let omega_k = omega
            .sub(&omega_bar)
            .scale(&GaussRat::new(rat_int(0), rat(-1, 2)));

        let mut model = FlatModel {
            n,
            i_map,
            j_map,
            k_map,
            h_map,
            f_map,
            g_map,
            omega,
            omega_bar,
            omega_i,
            omega_j,
            omega_k,
            degrees: Vec::new(),
        };
        for deg in 0..=letters {
            let data = model.build_degree(deg);
            model.degrees.push(data);
        }
        model
    }

    fn build_degree(&self, deg: usize) -> DegreeData {
        let letters = 4 * self.n;
        let basis = mono_basis(letters, deg);
        let index: BTreeMap<Mono, usize> =
            basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let dim = basis.len();
        let matrix_of = |lm: &LetterMap| -> SparseMat {
            let mut m = SparseMat::new(dim, dim);
            for (col, mono) in basis.iter().enumerate() {
                let img = lm.derivation(&ExteriorForm::term(*mono, GaussRat::one()));
                for (out, c) in img.terms() {
                    m.set(index[out], col, c.clone());
                }
            }
            m
        };
        let action = Sl2Action {
            h: matrix_of(&self.h_map),
            f: matrix_of(&self.f_map),
            g: matrix_of(&self.g_map),
        };
        let weights = action
            .weight_decompose()
            .expect("flat model su(2)-action must decompose");

        // Casimir projector onto the weight-deg isotypic part
        let plus_projector = if weights.multiplicity.contains_key(&(deg as u32)) {
            let half = GaussRat::from_rat(rat(1, 2));
            let casimir = action
                .h
                .mul(&action.h)
                .scale(&half)
                .add(&action.f.anticommutator(&action.g));
            let mu = |k: u32| rat_int(k as i64) * rat_int(k as i64 + 2) / rat_int(2);
            let mut p = SparseMat::identity(dim);
            for (&k, _) in &weights.multiplicity {
                if k as usize == deg {
                    continue;
                }
                let shift = casimir.sub(&SparseMat::identity(dim).scale(&GaussRat::from_rat(mu(k))));
                let denom = mu(deg as u32) - mu(k);
                p = p.mul(&shift).scale(&GaussRat::from_rat(rat_int(1) / denom));
            }
            p
        } else {
            SparseMat::new(dim, dim)
        };

        let plus_vectors = plus_projector
            .sub(&SparseMat::identity(dim))
            .kernel();
        let v_vectors = plus_projector.kernel();
        let plus_basis: Vec<ExteriorForm> =
            plus_vectors.iter().map(|v| vec_to_form(&basis, v)).collect();
        let v_basis: Vec<ExteriorForm> =
            v_vectors.iter().map(|v| vec_to_form(&basis, v)).collect();
        let plus_span = SpanBasis::from_vectors(dim, &plus_vectors);
        let v_span = SpanBasis::from_vectors(dim, &v_vectors);
        DegreeData {
            basis,
            index,
            action,
            weights,
            plus_projector,
            plus_basis,
            v_basis,
            plus_span,
            v_span,
        }
    }

    pub fn letters(&self) -> usize {
        4 * self.n
    }

    pub fn z_letters(&self) -> usize {
        2 * self.n
    }

    pub fn structure_map(&self, s: Structure) -> &LetterMap {
        match s {
            Structure::I => &self.i_map,
            Structure::J => &self.j_map,
            Structure::K => &self.k_map,
        }
    }

    pub fn su2_maps(&self) -> (&LetterMap, &LetterMap, &LetterMap) {
        (&self.h_map, &self.f_map, &self.g_map)
    }

    /// I² = J² = K² = IJK = −Id on Λ¹.
    pub fn quaternion_relations_hold(&self) -> bool {
        let letters = self.letters();
        let neg_id: Vec<Option<(usize, GaussRat)>> = (0..letters)
            .map(|l| Some((l, GaussRat::from_int(-1))))
            .collect();
        let eq = |m: &LetterMap| m.images == neg_id;
        eq(&self.i_map.compose(&self.i_map))
            && eq(&self.j_map.compose(&self.j_map))
            && eq(&self.k_map.compose(&self.k_map))
            && eq(&self
                .i_map
                .compose(&self.j_map)
                .compose(&self.k_map))
    }

    pub fn degree_basis(&self, deg: usize) -> &[Mono] {
        &self.degrees[deg].basis
    }

    pub fn mono_index(&self, deg: usize, mono: Mono) -> usize {
        self.degrees[deg].index[&mono]
    }

    /// The su(2)-action matrices (h, f, g) on Λ^deg.
    pub fn su2_on_forms(&self, deg: usize) -> &Sl2Action {
        &self.degrees[deg].action
    }

    pub fn weight_multiplicities(&self, deg: usize) -> &WeightDecomposition {
        &self.degrees[deg].weights
    }

    pub fn weight_split(&self, deg: usize) -> WeightSplit<'_> {
        let d = &self.degrees[deg];
        WeightSplit {
            v_basis: &d.v_basis,
            plus_basis: &d.plus_basis,
            projector: &d.plus_projector,
        }
    }

    pub fn plus_dim(&self, deg: usize) -> usize {
        self.degrees[deg].plus_basis.len()
    }

    pub fn v_dim(&self, deg: usize) -> usize {
        self.degrees[deg].v_basis.len()
    }

    pub fn plus_span(&self, deg: usize) -> &SpanBasis {
        &self.degrees[deg].plus_span
    }

    pub fn v_span(&self, deg: usize) -> &SpanBasis {
        &self.degrees[deg].v_span
    }

    fn apply_degree_matrix<C: Coeff>(&self, mat: &SparseMat, deg: usize, f: &Form<C>) -> Form<C> {
        let d = &self.degrees[deg];
        let mut cols: Vec<(usize, &C)> = Vec::new();
        for (m, c) in f.terms() {
            cols.push((d.index[m], c));
        }
        let mut out = Form::zero();
        for row in 0..mat.rows() {
            let mut acc: Option<C> = None;
            for (col, c) in &cols {
                let entry = mat.get(row, *col);
                if entry.is_zero() {
                    continue;
                }
                let v = c.scale_gr(&entry);
                acc = Some(match acc {
                    None => v,
                    Some(a) => a.add_ref(&v),
                });
            }
            if let Some(a) = acc {
                out.add_term(d.basis[row], &a);
            }
        }
        out
    }

    /// Projection of a (possibly mixed-degree) form onto Λ*₊.
    pub fn project_plus<C: Coeff>(&self, f: &Form<C>) -> Form<C> {
        let mut out = Form::zero();
        for deg in 0..=self.letters() {
            let comp = f.degree_component(deg);
            if comp.is_zero() {
                continue;
            }
            let proj = self.apply_degree_matrix(&self.degrees[deg].plus_projector, deg, &comp);
            out = out.add(&proj);
        }
        out
    }

    /// Wedge by every coframe letter stays inside V*: the ideal property.
    pub fn ideal_check(&self) -> bool {
        let letters = self.letters();
        for deg in 0..letters {
            let next = &self.degrees[deg + 1];
            for v in &self.degrees[deg].v_basis {
                for l in 0..letters {
                    let w = v.wedge(&ExteriorForm::term(1 << l, GaussRat::one()));
                    if w.is_zero() {
                        continue;
                    }
                    let vec = crate::exterior::form_to_vec(&next.basis, &w);
                    if !next.v_span.contains(&vec) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Hodge (p,q)-components of a homogeneous form for the complex
    /// structure `s`. Components sum to the input.
    pub fn hodge_bigrade(
        &self,
        s: Structure,
        form: &ExteriorForm,
    ) -> Option<BTreeMap<(usize, usize), ExteriorForm>> {
        let deg = form.degree()?;
        let zl = self.z_letters();
        let mut out = BTreeMap::new();
        if s == Structure::I {
            // mask-local: p counts dz-letters, q counts dz̄-letters
            for (m, c) in form.terms() {
                let p = (m & ((1 << zl) - 1)).count_ones() as usize;
                let q = popcount_upper(*m, zl);
                out.entry((p, q))
                    .or_insert_with(ExteriorForm::zero)
                    .add_term(*m, c);
            }
            return Some(out);
        }
        // generic route: eigenprojections of the grading operator for s
        let d = &self.degrees[deg];
        let lm = self.structure_map(s).scale(&GaussRat::i().neg());
        let mut grading = SparseMat::new(d.basis.len(), d.basis.len());
        for (col, mono) in d.basis.iter().enumerate() {
            let img = lm.derivation(&ExteriorForm::term(*mono, GaussRat::one()));
            for (outm, c) in img.terms() {
                grading.set(d.index[outm], col, c.clone());
            }
        }
        let eigenvalues: Vec<i64> = (0..=deg).map(|t| deg as i64 - 2 * t as i64).collect();
        for &e in &eigenvalues {
            let mut proj = SparseMat::identity(d.basis.len());
            for &e2 in &eigenvalues {
                if e2 == e {
                    continue;
                }
                let shift = grading.sub(&SparseMat::identity(d.basis.len()).scale(&GaussRat::from_int(e2)));
                proj = proj
                    .mul(&shift)
                    .scale(&GaussRat::from_rat(rat_int(1) / rat_int(e - e2)));
            }
            let comp = self.apply_degree_matrix(&proj, deg, form);
            if !comp.is_zero() {
                let p = ((deg as i64 + e) / 2) as usize;
                out.insert((p, deg - p), comp);
            }
        }
        Some(out)
    }

    /// Basis monomials of Λ^{0,p}(I): wedge monomials using only dz̄-letters.
    pub fn antiholo_basis(&self, p: usize) -> Vec<Mono> {
        let zl = self.z_letters();
        mono_basis(zl, p)
            .into_iter()
            .map(|m| (m as Mono) << zl)
            .collect()
    }

    /// Λ^{0,p}(I) is pure of weight p: its plus-projection is the identity.
    pub fn purity_check(&self, p: usize) -> bool {
        if p > 2 * self.n {
            return true;
        }
        for m in self.antiholo_basis(p) {
            let f = ExteriorForm::term(m, GaussRat::one());
            if self.project_plus(&f) != f {
                return false;
            }
        }
        true
    }

    /// Λ^{0,p}(I) equals the h-eigenvalue −p part of Λ^p₊ as a span.
    pub fn antiholo_component_matches(&self, p: usize) -> bool {
        let d = &self.degrees[p];
        let dim = d.basis.len();
        // vectors in Λ^p₊ with h-eigenvalue −p: kernel of [P−I; h+pI] stacked
        let shifted = d
            .action
            .h
            .add(&SparseMat::identity(dim).scale(&GaussRat::from_int(p as i64)));
        let proj_minus = d.plus_projector.sub(&SparseMat::identity(dim));
        let mut stacked = SparseMat::new(2 * dim, dim);
        for i in 0..dim {
            for (j, v) in proj_minus.row(i) {
                stacked.set(i, *j, v.clone());
            }
            for (j, v) in shifted.row(i) {
                stacked.set(dim + i, *j, v.clone());
            }
        }
        let comp = SpanBasis::from_vectors(dim, &stacked.kernel());
        let antih = SpanBasis::from_vectors(
            dim,
            &self
                .antiholo_basis(p)
                .iter()
                .map(|m| {
                    crate::exterior::form_to_vec(
                        &d.basis,
                        &ExteriorForm::term(*m, GaussRat::one()),
                    )
                })
                .collect::<Vec<_>>(),
        );
        comp.equals(&antih)
    }

    pub fn apply_h<C: Coeff>(&self, f: &Form<C>) -> Form<C> {
        self.h_map.derivation(f)
    }

    pub fn apply_f<C: Coeff>(&self, f: &Form<C>) -> Form<C> {
        self.f_map.derivation(f)
    }

    pub fn apply_g<C: Coeff>(&self, f: &Form<C>) -> Form<C> {
        self.g_map.derivation(f)
    }

    /// Multiplicative action of I, J or K on a form.
    pub fn apply_structure<C: Coeff>(&self, s: Structure, f: &Form<C>) -> Form<C> {
        self.structure_map(s).multiplicative(f)
    }
}

fn popcount_upper(m: Mono, zl: usize) -> usize {
    (m >> zl).count_ones() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::form_to_vec;

    #[test]
    fn quaternion_relations() {
        for n in 1..=2 {
            assert!(FlatModel::new(n).quaternion_relations_hold());
        }
    }

    #[test]
    fn omega_types() {
        let m = FlatModel::new(1);
        // Ω is (2,0) and Ω̄ is (0,2) for I
        let b = m.hodge_bigrade(Structure::I, &m.omega).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.contains_key(&(2, 0)));
        let bb = m.hodge_bigrade(Structure::I, &m.omega_bar).unwrap();
        assert!(bb.contains_key(&(0, 2)));
        // ω_I is pure (1,1)
        let bi = m.hodge_bigrade(Structure::I, &m.omega_i).unwrap();
        assert_eq!(bi.len(), 1);
        assert!(bi.contains_key(&(1, 1)));
        // Ω = ω_J + i·ω_K
        assert_eq!(
            m.omega,
            m.omega_j.add(&m.omega_k.scale(&GaussRat::i()))
        );
    }

    #[test]
    fn su2_triples_hold_per_degree() {
        for n in 1..=2usize {
            let m = FlatModel::new(n);
            for deg in 0..=4 * n {
                assert!(m.su2_on_forms(deg).verify_triple().unwrap(), "degree {deg}");
            }
        }
    }

    #[test]
    fn degree_zero_action_is_trivial() {
        let m = FlatModel::new(1);
        let a = m.su2_on_forms(0);
        assert!(a.h.is_zero() && a.f.is_zero() && a.g.is_zero());
    }

    #[test]
    fn h_eigenvalue_of_omega_is_two() {
        let m = FlatModel::new(1);
        assert_eq!(m.apply_h(&m.omega), m.omega.scale(&GaussRat::from_int(2)));
        // f kills the highest-weight vector Ω; g² reaches Ω̄
        assert!(m.apply_f(&m.omega).is_zero());
        let gg = m.apply_g(&m.apply_g(&m.omega));
        assert_eq!(gg, m.omega_bar.scale(&GaussRat::from_int(2)));
    }

    #[test]
    fn one_forms_have_weight_one() {
        let m = FlatModel::new(1);
        let wd = m.weight_multiplicities(1);
        assert_eq!(wd.multiplicity, std::collections::BTreeMap::from([(1, 2)]));
    }

    #[test]
    fn two_forms_decompose() {
        let m = FlatModel::new(1);
        let wd = m.weight_multiplicities(2);
        assert_eq!(
            wd.multiplicity,
            std::collections::BTreeMap::from([(0, 3), (2, 1)])
        );
        assert_eq!(m.plus_dim(2), 3);
        assert_eq!(m.v_dim(2), 3);
    }

    #[test]
    fn plus_dimension_formula() {
        for n in 1..=2usize {
            let m = FlatModel::new(n);
            for i in 0..=4 * n {
                let expect = if i <= 2 * n {
                    (i + 1) * binom(2 * n, i)
                } else {
                    0
                };
                assert_eq!(m.plus_dim(i), expect, "n={n} i={i}");
            }
        }
    }

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut r = 1usize;
        for j in 0..k {
            r = r * (n - j) / (j + 1);
        }
        r
    }

    #[test]
    fn ideal_property() {
        assert!(FlatModel::new(1).ideal_check());
        assert!(FlatModel::new(2).ideal_check());
    }

    #[test]
    fn perturbed_v2_is_not_an_ideal() {
        // adjoin one Λ²₊ vector to V² at n=2; some wedge then escapes V³,
        // so the perturbed family fails the differential-ideal property
        let m = FlatModel::new(2);
        let split = m.weight_split(2);
        let mut vectors: Vec<Vec<GaussRat>> = split
            .v_basis
            .iter()
            .map(|f| form_to_vec(m.degree_basis(2), f))
            .collect();
        vectors.push(form_to_vec(m.degree_basis(2), &m.omega));
        let enlarged = crate::matrix::SpanBasis::from_vectors(m.degree_basis(2).len(), &vectors);
        assert_eq!(enlarged.dim(), m.v_dim(2) + 1);
        let next_v = m.v_span(3);
        let mut escaped = false;
        for f in split.v_basis.iter().chain(std::iter::once(&m.omega)) {
            for l in 0..m.letters() {
                let w = f.wedge(&ExteriorForm::term(1 << l, GaussRat::one()));
                if w.is_zero() {
                    continue;
                }
                let vec = form_to_vec(m.degree_basis(3), &w);
                if !next_v.contains(&vec) {
                    escaped = true;
                }
            }
        }
        assert!(escaped);
    }

    #[test]
    fn purity_and_span_equality() {
        for n in 1..=2usize {
            let m = FlatModel::new(n);
            for p in 0..=2 * n {
                assert!(m.purity_check(p), "n={n} p={p}");
                assert!(m.antiholo_component_matches(p), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn lambda_11_is_not_pure_of_weight_two() {
        // the (1,1)-part of Λ² contains weight-0 vectors
        let m = FlatModel::new(1);
        let mixed = ExteriorForm::term((1 << 0) | (1 << 2), GaussRat::one()); // dz1∧dz̄1
        assert_ne!(m.project_plus(&mixed), mixed);
    }

    #[test]
    fn omega_under_j_splits() {
        let m = FlatModel::new(1);
        let b = m.hodge_bigrade(Structure::J, &m.omega).unwrap();
        let sum = b.values().fold(ExteriorForm::zero(), |acc, c| acc.add(c));
        assert_eq!(sum, m.omega);
        assert!(b.contains_key(&(1, 1)), "J-bigrading of Ω has a (1,1) part");
    }

    #[test]
    fn max_weight_is_min_of_degree_and_codegree() {
        for n in 1..=2usize {
            let m = FlatModel::new(n);
            for i in 0..=4 * n {
                let top = m.weight_multiplicities(i).top_weight().unwrap_or(0) as usize;
                assert_eq!(top, i.min(4 * n - i), "n={n} i={i}");
                if i <= 2 * n {
                    let mult = m.weight_multiplicities(i).multiplicity[&(i as u32)];
                    assert_eq!(mult, binom(2 * n, i));
                }
            }
        }
    }
}
