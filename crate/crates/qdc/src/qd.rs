//! The symmetric-power model of Λ*₊: S^pℛ ⊗ Λ^{0,p}(M,I) with the structure
//! map x⊗η ↦ J(η), y⊗η ↦ η, extended multiplicatively into the quotient
//! algebra. Blockwise (per p and per x-degree) the map is a bijection onto
//! the weight-top part, which gives an exact inverse.

use crate::exterior::{form_to_vec, Coeff, ExteriorForm, Form, Mono};
use crate::flat::FlatModel;
use crate::matrix::SparseMat;
use crate::scalar::GaussRat;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QdError {
    #[error("form is not in the weight-top subspace")]
    NotInPlusPart,
    #[error("degree out of range")]
    DegreeOutOfRange,
}

struct Block {
    /// Columns are images of the antiholomorphic basis monomials in Λ^p.
    forward: SparseMat,
}

/// Structure map of ⊕_p S^pℛ ⊗ Λ^{0,p} onto Λ*₊ and its inverse.
pub struct SymModel {
    n: usize,
    antiholo: Vec<Vec<Mono>>,
    blocks: Vec<Vec<Block>>, // blocks[p][a], a = x-degree
}

impl SymModel {
    pub fn new(model: &FlatModel) -> Self {
        let n = model.n;
        let mut antiholo = Vec::new();
        let mut blocks = Vec::new();
        for p in 0..=2 * n {
            let ah = model.antiholo_basis(p);
            let dim = model.degree_basis(p).len();
            let mut row = Vec::new();
            for a in 0..=p {
                let mut forward = SparseMat::new(dim, ah.len());
                for (col, t) in ah.iter().enumerate() {
                    let img = phi_term(model, a, *t);
                    for (m, c) in img.terms() {
                        forward.set(model.mono_index(p, *m), col, c.clone());
                    }
                }
                row.push(Block { forward });
            }
            antiholo.push(ah);
            blocks.push(row);
        }
        SymModel { n, antiholo, blocks }
    }

    pub fn antiholo_basis(&self, p: usize) -> &[Mono] {
        &self.antiholo[p]
    }

    /// Φ(x^a y^{p−a} ⊗ η) for η a constant (0,p)-form.
    pub fn apply(&self, model: &FlatModel, p: usize, a: usize, eta: &ExteriorForm) -> ExteriorForm {
        assert!(p <= 2 * self.n && a <= p);
        let mut out = ExteriorForm::zero();
        for (m, c) in eta.terms() {
            let col = self
                .antiholo[p]
            .iter()
            .position(|b| b == m)
            .expect("not an antiholomorphic monomial");
            let block = &self.blocks[p][a];
            for rowi in 0..block.forward.rows() {
                let v = block.forward.get(rowi, col);
                if !v.is_zero() {
                    out.add_term(model.degree_basis(p)[rowi], &((&v) * c));
                }
            }
        }
        out
    }

    /// Coefficient-wise extension of Φ to forms with arbitrary coefficients.
    pub fn apply_linear<C: Coeff>(
        &self,
        model: &FlatModel,
        p: usize,
        a: usize,
        eta: &Form<C>,
    ) -> Form<C> {
        let mut out = Form::zero();
        for (m, c) in eta.terms() {
            let img = self.apply(model, p, a, &ExteriorForm::term(*m, GaussRat::one()));
            for (im, ic) in img.terms() {
                out.add_term(*im, &c.scale_gr(ic));
            }
        }
        out
    }

    /// Invert the structure map on Λ^p₊: returns the x-degree components.
    pub fn invert(
        &self,
        model: &FlatModel,
        form: &ExteriorForm,
    ) -> Result<Vec<(usize, ExteriorForm)>, QdError> {
        let Some(p) = form.degree() else {
            return Ok(Vec::new());
        };
        if p > 2 * self.n {
            return Err(QdError::DegreeOutOfRange);
        }
        let zl = 2 * self.n;
        let mut out = Vec::new();
        for a in 0..=p {
            // the x-degree-a block sits at h-eigenvalue 2a−p: z-count a
            let mut comp = ExteriorForm::zero();
            for (m, c) in form.terms() {
                if (m & ((1 << zl) - 1)).count_ones() as usize == a {
                    comp.add_term(*m, c);
                }
            }
            if comp.is_zero() {
                continue;
            }
            let vec = form_to_vec(model.degree_basis(p), &comp);
            let sol = self.blocks[p][a]
                .forward
                .solve(&vec)
                .ok_or(QdError::NotInPlusPart)?;
            let mut eta = ExteriorForm::zero();
            for (idx, v) in sol.into_iter().enumerate() {
                eta.add_term(self.antiholo[p][idx], &v);
            }
            out.push((a, eta));
        }
        Ok(out)
    }

    /// Every block has full column rank and the blocks jointly span Λ^p₊.
    pub fn bijective(&self, model: &FlatModel) -> bool {
        for p in 0..=2 * self.n {
            let cols = self.antiholo[p].len();
            let mut total_rank = 0;
            for a in 0..=p {
                let r = self.blocks[p][a].forward.rank();
                if r != cols {
                    return false;
                }
                total_rank += r;
            }
            if total_rank != model.plus_dim(p) {
                return false;
            }
            // images must be independent across blocks: stack horizontally
            let dim = model.degree_basis(p).len();
            let mut stacked = SparseMat::new(dim, (p + 1) * cols);
            for a in 0..=p {
                for i in 0..dim {
                    for (j, v) in self.blocks[p][a].forward.row(i) {
                        stacked.set(i, a * cols + *j, v.clone());
                    }
                }
            }
            if stacked.rank() != (p + 1) * cols {
                return false;
            }
        }
        true
    }

    /// Φ(ξ·ζ) = proj₊(Φξ ∧ Φζ) on all generator pairs within degree range.
    pub fn multiplicative(&self, model: &FlatModel) -> bool {
        let n2 = 2 * self.n;
        for p in 0..=n2 {
            for q in 0..=(n2 - p) {
                for a in 0..=p {
                    for c in 0..=q {
                        for &t in &self.antiholo[p] {
                            for &u in &self.antiholo[q] {
                                let ft = ExteriorForm::term(t, GaussRat::one());
                                let fu = ExteriorForm::term(u, GaussRat::one());
                                let prod = ft.wedge(&fu);
                                let lhs = if prod.is_zero() {
                                    ExteriorForm::zero()
                                } else {
                                    self.apply_linear(model, p + q, a + c, &prod)
                                };
                                let rhs = model.project_plus(
                                    &self
                                        .apply(model, p, a, &ft)
                                        .wedge(&self.apply(model, q, c, &fu)),
                                );
                                if lhs != rhs {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// The su(2)-action on S^pℛ (trivial on the form factor) intertwines
    /// with the action on Λ^p₊ under Φ.
    pub fn equivariant(&self, model: &FlatModel) -> bool {
        for p in 0..=2 * self.n {
            for a in 0..=p {
                let b = p - a;
                for &t in &self.antiholo[p] {
                    let eta = ExteriorForm::term(t, GaussRat::one());
                    let img = self.apply(model, p, a, &eta);
                    // h: eigenvalue a − b
                    let h_lhs = model.apply_h(&img);
                    if h_lhs != img.scale(&GaussRat::from_int(a as i64 - b as i64)) {
                        return false;
                    }
                    // f(x^a y^b) = b x^{a+1} y^{b−1}
                    let f_lhs = model.apply_f(&img);
                    let f_rhs = if b > 0 {
                        self.apply(model, p, a + 1, &eta)
                            .scale(&GaussRat::from_int(b as i64))
                    } else {
                        ExteriorForm::zero()
                    };
                    if f_lhs != f_rhs {
                        return false;
                    }
                    // g(x^a y^b) = a x^{a−1} y^{b+1}
                    let g_lhs = model.apply_g(&img);
                    let g_rhs = if a > 0 {
                        self.apply(model, p, a - 1, &eta)
                            .scale(&GaussRat::from_int(a as i64))
                    } else {
                        ExteriorForm::zero()
                    };
                    if g_lhs != g_rhs {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Φ on a single generator monomial: apply J to the first `a` letters of the
/// antiholomorphic wedge monomial, keep the rest, project to the weight-top
/// part. Well-definedness of the slot choice is the multiplicativity check.
fn phi_term(model: &FlatModel, a: usize, t: Mono) -> ExteriorForm {
    let j = model.structure_map(crate::flat::Structure::J);
    let mut letters: Vec<usize> = Vec::new();
    let mut bb = t;
    while bb != 0 {
        letters.push(bb.trailing_zeros() as usize);
        bb &= bb - 1;
    }
    let mut acc = ExteriorForm::term(0, GaussRat::one());
    for (idx, &l) in letters.iter().enumerate() {
        let factor = if idx < a {
            let (m, c) = j.images[l].clone().expect("J is defined on all letters");
            ExteriorForm::term(1 << m, c)
        } else {
            ExteriorForm::term(1 << l, GaussRat::one())
        };
        acc = acc.wedge(&factor);
    }
    model.project_plus(&acc)
}
