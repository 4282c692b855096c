//! Differential operators on polynomial-coefficient forms over the flat
//! model, with a Gaussian-weighted exact inner product realizing a line
//! bundle of constant curvature.
//!
//! The bundle with weight e^{−φ}, φ = λ·Σ|z_k|², keeps all data polynomial:
//! normalized Gaussian moments are exact rationals, so adjoints, Laplacians
//! and kernels are exact. Identity checks quantify over every basis form of
//! a coefficient-degree truncation; the operators shift degrees by at most
//! one, so exact agreement on the truncation is conclusive for it.

use crate::exterior::{wedge_sign, ExteriorForm, Mono, PolyForm};
use crate::flat::FlatModel;
use crate::matrix::SparseMat;
use crate::poly::{Expo, Poly};
use crate::scalar::{factorial, rat_int, GaussRat, Rat};
use num::{One, Signed};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CalcError {
    #[error("forms must be homogeneous of the same degree")]
    DegreeMismatch,
    #[error("curvature scale must be positive (the measure degenerates)")]
    NonPositiveWeight,
    #[error("model violates the curvature proportionality: {0}")]
    NotProportional(String),
    #[error("unknown operator {0}")]
    UnknownOperator(String),
}

/// Weighted line bundle data: weight function φ = λ·Σ(all coordinates)²,
/// connection ∇^{1,0} = ∂ − (∂φ)∧ on the trivialized bundle.
#[derive(Clone, Debug)]
pub struct WeightedBundle {
    pub n: usize,
    pub lambda: Rat,
}

impl WeightedBundle {
    pub fn new(n: usize, lambda: Rat) -> Result<Self, CalcError> {
        if !lambda.is_positive() {
            return Err(CalcError::NonPositiveWeight);
        }
        Ok(WeightedBundle { n, lambda })
    }
}

/// Normalized Gaussian expectation of a polynomial in z, z̄ against the
/// weight e^{−λ|z|²}: E[z^a z̄^b] = δ_{ab}·a!/λ^a per coordinate.
pub fn expectation(lambda: &Rat, p: &Poly) -> GaussRat {
    let half = p.vars / 2;
    let mut acc = GaussRat::zero();
    'term: for (e, c) in p.terms() {
        let mut moment = Rat::one();
        for k in 0..half {
            let a = e[k] as usize;
            let b = e[half + k] as usize;
            if a != b {
                continue 'term;
            }
            if a > 0 {
                moment *= Rat::from_integer(factorial(a));
                let mut lam_pow = Rat::one();
                for _ in 0..a {
                    lam_pow *= lambda;
                }
                moment /= lam_pow;
            }
        }
        acc += &c.scale(&moment);
    }
    acc
}

/// Pointwise Hermitian pairing in the orthonormal coframe: Σ_M a_M·conj(b_M).
pub fn pointwise_pairing(a: &PolyForm, b: &PolyForm) -> Poly {
    let mut vars = 0;
    for (_, c) in a.terms().chain(b.terms()) {
        vars = c.vars;
        break;
    }
    let mut out = Poly::zero(vars.max(2));
    for (m, ca) in a.terms() {
        if let Some(cb) = b.coeff(*m) {
            out = out.add(&ca.mul(&cb.conj(cb.vars / 2)));
        }
    }
    out
}

/// Exact weighted L² inner product of two homogeneous forms of equal degree.
pub fn weighted_inner_product(
    bundle: &WeightedBundle,
    a: &PolyForm,
    b: &PolyForm,
) -> Result<GaussRat, CalcError> {
    if !a.is_zero() && !b.is_zero() {
        match (a.degree(), b.degree()) {
            (Some(da), Some(db)) if da == db => {}
            _ => return Err(CalcError::DegreeMismatch),
        }
    }
    Ok(expectation(&bundle.lambda, &pointwise_pairing(a, b)))
}

type Rule = Rc<dyn Fn(&PolyForm) -> PolyForm>;

/// Named exact operator on polynomial-coefficient forms.
#[derive(Clone)]
pub struct OpHandle {
    pub name: String,
    rule: Rule,
}

impl OpHandle {
    pub fn new(name: impl Into<String>, rule: Rule) -> Self {
        OpHandle {
            name: name.into(),
            rule,
        }
    }

    pub fn apply(&self, f: &PolyForm) -> PolyForm {
        (self.rule)(f)
    }

    pub fn compose(name: impl Into<String>, outer: &OpHandle, inner: &OpHandle) -> OpHandle {
        let (o, i) = (outer.rule.clone(), inner.rule.clone());
        OpHandle::new(name, Rc::new(move |f| o(&i(f))))
    }

    pub fn add(name: impl Into<String>, a: &OpHandle, b: &OpHandle) -> OpHandle {
        let (ra, rb) = (a.rule.clone(), b.rule.clone());
        OpHandle::new(name, Rc::new(move |f| ra(f).add(&rb(f))))
    }

    pub fn sub(name: impl Into<String>, a: &OpHandle, b: &OpHandle) -> OpHandle {
        let (ra, rb) = (a.rule.clone(), b.rule.clone());
        OpHandle::new(name, Rc::new(move |f| ra(f).sub(&rb(f))))
    }

    pub fn scale(name: impl Into<String>, a: &OpHandle, c: GaussRat) -> OpHandle {
        let ra = a.rule.clone();
        OpHandle::new(name, Rc::new(move |f| ra(f).scale(&c)))
    }

    pub fn commutator(name: impl Into<String>, a: &OpHandle, b: &OpHandle) -> OpHandle {
        let (ra, rb) = (a.rule.clone(), b.rule.clone());
        OpHandle::new(name, Rc::new(move |f| ra(&rb(f)).sub(&rb(&ra(f)))))
    }

    pub fn anticommutator(name: impl Into<String>, a: &OpHandle, b: &OpHandle) -> OpHandle {
        let (ra, rb) = (a.rule.clone(), b.rule.clone());
        OpHandle::new(name, Rc::new(move |f| ra(&rb(f)).add(&rb(&ra(f)))))
    }

    pub fn zero(name: impl Into<String>) -> OpHandle {
        OpHandle::new(name, Rc::new(|_| PolyForm::zero()))
    }
}

/// First-order operator Σ_v ∂_v ⊗ (image of letter v)∧ — this covers d, ∂,
/// ∂̄ and every rotated variant d_L, ∂̄_J.
fn d_rotated_rule(_vars: usize, images: Vec<Option<(usize, GaussRat)>>) -> Rule {
    Rc::new(move |f: &PolyForm| {
        let mut out = PolyForm::zero();
        for (mask, poly) in f.terms() {
            for (v, img) in images.iter().enumerate() {
                let Some((letter, coef)) = img else { continue };
                let dp = poly.derivative(v);
                if dp.is_zero() {
                    continue;
                }
                let bit: Mono = 1 << letter;
                let s = wedge_sign(bit, *mask);
                if s == 0 {
                    continue;
                }
                let mut c = dp.scale(coef);
                if s < 0 {
                    c = c.neg();
                }
                out.add_term(bit | mask, &c);
            }
        }
        out
    })
}

/// Left exterior multiplication by a fixed polynomial-coefficient form.
fn wedge_rule(theta: PolyForm) -> Rule {
    Rc::new(move |f: &PolyForm| theta.wedge(f))
}

/// Pointwise metric adjoint of wedging by a constant form (orthonormal
/// coframe): contraction with conjugated coefficients.
fn contraction_rule(theta: ExteriorForm) -> Rule {
    let terms: Vec<(Mono, GaussRat)> = theta
        .terms()
        .map(|(m, c)| (*m, c.conj()))
        .collect();
    Rc::new(move |f: &PolyForm| {
        let mut out = PolyForm::zero();
        for (mask, poly) in f.terms() {
            for (tm, tc) in &terms {
                if mask & tm != *tm {
                    continue;
                }
                let rest = mask & !tm;
                let s = wedge_sign(*tm, rest);
                if s == 0 {
                    continue;
                }
                let mut c = poly.scale(tc);
                if s < 0 {
                    c = c.neg();
                }
                out.add_term(rest, &c);
            }
        }
        out
    })
}

pub fn const_polyform(vars: usize, f: &ExteriorForm) -> PolyForm {
    f.map_coeffs(|c| Poly::constant(vars, c.clone()))
}

/// x⁰_a, x¹_a, x²_a, x³_a as polynomials in z, z̄.
pub fn coordinate_poly(n: usize, axis: usize, a: usize) -> Poly {
    assert!(axis < 4 && a >= 1 && a <= n);
    let vars = 4 * n;
    let zl = 2 * n;
    let v = if axis < 2 { 2 * a - 2 } else { 2 * a - 1 };
    let z = Poly::var(vars, v);
    let zb = Poly::var(vars, zl + v);
    if axis % 2 == 0 {
        // (z + z̄)/2
        z.add(&zb).scale(&GaussRat::from_rat(crate::scalar::rat(1, 2)))
    } else {
        // (z − z̄)/(2i)
        z.sub(&zb)
            .scale(&GaussRat::new(rat_int(0), crate::scalar::rat(-1, 2)))
    }
}

/// dx⁰_a, dx¹_a, dx²_a, dx³_a in the complex coframe.
pub fn coordinate_differential(n: usize, axis: usize, a: usize) -> ExteriorForm {
    assert!(axis < 4 && a >= 1 && a <= n);
    let zl = 2 * n;
    let v = if axis < 2 { 2 * a - 2 } else { 2 * a - 1 };
    let mut f = ExteriorForm::zero();
    if axis % 2 == 0 {
        let half = GaussRat::from_rat(crate::scalar::rat(1, 2));
        f.add_term(1 << v, &half);
        f.add_term(1 << (zl + v), &half);
    } else {
        let c = GaussRat::new(rat_int(0), crate::scalar::rat(-1, 2));
        f.add_term(1 << v, &c);
        f.add_term(1 << (zl + v), &c.neg());
    }
    f
}

type GradeKey = (Vec<i16>, usize);

struct GramBlock {
    monos: Vec<Expo>,
    inverse: Option<SparseMat>,
}

/// Gram-solve engine for weighted adjoints. The weighted inner product is
/// block-orthogonal in (coframe monomial, per-variable z-minus-z̄ exponent
/// grade); adjoints of first-order operators are computed exactly by solving
/// the defining equations on the finitely many blocks they can reach.
struct AdjointEngine {
    vars: usize,
    lambda: Rat,
    grams: RefCell<HashMap<GradeKey, Rc<GramBlock>>>,
    columns: RefCell<HashMap<(u8, Mono, Expo), PolyForm>>,
}

impl AdjointEngine {
    fn new(vars: usize, lambda: Rat) -> Self {
        AdjointEngine {
            vars,
            lambda,
            grams: RefCell::new(HashMap::new()),
            columns: RefCell::new(HashMap::new()),
        }
    }

    fn grade(&self, e: &Expo) -> Vec<i16> {
        let half = self.vars / 2;
        (0..half)
            .map(|k| e[k] as i16 - e[half + k] as i16)
            .collect()
    }

    fn gram_block(&self, grade: &[i16], cap: usize) -> Rc<GramBlock> {
        let key = (grade.to_vec(), cap);
        if let Some(b) = self.grams.borrow().get(&key) {
            return b.clone();
        }
        let half = self.vars / 2;
        let base_beta: Vec<usize> = grade.iter().map(|&g| (-g).max(0) as usize).collect();
        let base_deg: usize = grade
            .iter()
            .zip(base_beta.iter())
            .map(|(&g, &b)| (2 * b as i64 + g as i64) as usize)
            .sum();
        let mut monos: Vec<Expo> = Vec::new();
        if base_deg <= cap {
            let budget = (cap - base_deg) / 2;
            for extra in monomials_up_to(half, budget) {
                let mut e = vec![0u8; self.vars];
                for k in 0..half {
                    let beta = base_beta[k] + extra[k] as usize;
                    let alpha = (beta as i64 + grade[k] as i64) as usize;
                    e[k] = alpha as u8;
                    e[half + k] = beta as u8;
                }
                monos.push(e);
            }
        }
        let dim = monos.len();
        let inverse = if dim == 0 {
            None
        } else {
            let mut g = SparseMat::new(dim, dim);
            for (nu, en) in monos.iter().enumerate() {
                for (mu, em) in monos.iter().enumerate() {
                    // G[ν][μ] = ⟨μ, ν⟩ = E[ z^{α_μ+β_ν} z̄^{β_μ+α_ν} ]
                    let mut prod = vec![0u8; self.vars];
                    let half = self.vars / 2;
                    for k in 0..half {
                        prod[k] = em[k] + en[half + k];
                        prod[half + k] = em[half + k] + en[k];
                    }
                    let val = expectation(
                        &self.lambda,
                        &Poly::monomial(self.vars, prod, GaussRat::one()),
                    );
                    g.set(nu, mu, val);
                }
            }
            Some(g.inverse().expect("Gaussian Gram blocks are positive-definite"))
        };
        let block = Rc::new(GramBlock { monos, inverse });
        self.grams.borrow_mut().insert(key, block.clone());
        block
    }

    /// op*(mono·mask) for a first-order operator that adds one dz̄-letter and
    /// shifts one exponent. Exact: the true adjoint image lies inside the
    /// candidate blocks, and each block Gram is positive-definite.
    fn column(&self, opid: u8, rule: &Rule, mask: Mono, mono: &Expo) -> PolyForm {
        let key = (opid, mask, mono.clone());
        if let Some(c) = self.columns.borrow().get(&key) {
            return c.clone();
        }
        let half = self.vars / 2;
        let deg: usize = mono.iter().map(|&x| x as usize).sum();
        let cap = deg + 1;
        let grade = self.grade(mono);
        let input = PolyForm::term(mask, Poly::monomial(self.vars, mono.clone(), GaussRat::one()));
        let bundle = WeightedBundle {
            n: half / 2,
            lambda: self.lambda.clone(),
        };

        let mut candidates: BTreeSet<(Mono, Vec<i16>)> = BTreeSet::new();
        let mut bb = mask >> half; // dz̄-letters only
        while bb != 0 {
            let l = (bb.trailing_zeros() as usize) + half;
            bb &= bb - 1;
            let rest = mask & !(1 << l);
            for k in 0..half {
                for s in [1i16, -1i16] {
                    let mut g = grade.clone();
                    g[k] += s;
                    candidates.insert((rest, g));
                }
            }
        }

        let mut out = PolyForm::zero();
        for (rest, g) in candidates {
            let block = self.gram_block(&g, cap);
            let Some(inv) = &block.inverse else { continue };
            let mut rhs = vec![GaussRat::zero(); block.monos.len()];
            let mut any = false;
            for (idx, nu_mono) in block.monos.iter().enumerate() {
                let nu = PolyForm::term(
                    rest,
                    Poly::monomial(self.vars, nu_mono.clone(), GaussRat::one()),
                );
                let op_nu = rule(&nu);
                let v = weighted_inner_product(&bundle, &input, &op_nu)
                    .expect("op output is homogeneous");
                if !v.is_zero() {
                    any = true;
                }
                rhs[idx] = v;
            }
            if !any {
                continue;
            }
            let coeffs = inv.apply(&rhs);
            let mut poly = Poly::zero(self.vars);
            for (idx, c) in coeffs.into_iter().enumerate() {
                if !c.is_zero() {
                    poly.add_term(block.monos[idx].clone(), &c);
                }
            }
            if !poly.is_zero() {
                out.add_term(rest, &poly);
            }
        }
        self.columns.borrow_mut().insert(key, out.clone());
        out
    }
}

fn adjoint_rule(engine: Rc<AdjointEngine>, opid: u8, rule: Rule) -> Rule {
    Rc::new(move |f: &PolyForm| {
        let mut out = PolyForm::zero();
        for (mask, poly) in f.terms() {
            for (expo, coef) in poly.terms() {
                let col = engine.column(opid, &rule, *mask, expo);
                out = out.add(&col.scale(coef));
            }
        }
        out
    })
}

/// The named operator set on the flat model, untwisted or weighted.
pub struct Operators {
    pub model: Rc<FlatModel>,
    pub lambda: Option<Rat>,
    named: BTreeMap<String, OpHandle>,
}

impl Operators {
    pub fn untwisted(model: Rc<FlatModel>) -> Operators {
        Self::build(model, None, false)
    }

    pub fn weighted(model: Rc<FlatModel>, lambda: Rat) -> Result<Operators, CalcError> {
        if !lambda.is_positive() {
            return Err(CalcError::NonPositiveWeight);
        }
        Ok(Self::build(model, Some(lambda), false))
    }

    /// Test hook: builds the set with the sign of ∂̄_J flipped, which breaks
    /// the bicomplex and curvature identities on purpose.
    pub fn weighted_sabotaged(model: Rc<FlatModel>, lambda: Rat) -> Result<Operators, CalcError> {
        if !lambda.is_positive() {
            return Err(CalcError::NonPositiveWeight);
        }
        Ok(Self::build(model, Some(lambda), true))
    }

    pub fn untwisted_sabotaged(model: Rc<FlatModel>) -> Operators {
        Self::build(model, None, true)
    }

    fn build(model: Rc<FlatModel>, lambda: Option<Rat>, flip_dbar_j: bool) -> Operators {
        let vars = 4 * model.n;
        let zl = 2 * model.n;
        let mut named = BTreeMap::new();

        let identity_images: Vec<Option<(usize, GaussRat)>> =
            (0..vars).map(|v| Some((v, GaussRat::one()))).collect();
        let holo_images: Vec<Option<(usize, GaussRat)>> = (0..vars)
            .map(|v| if v < zl { Some((v, GaussRat::one())) } else { None })
            .collect();
        let anti_images: Vec<Option<(usize, GaussRat)>> = (0..vars)
            .map(|v| if v >= zl { Some((v, GaussRat::one())) } else { None })
            .collect();

        fn ins(map: &mut BTreeMap<String, OpHandle>, name: &str, rule: Rule) {
            map.insert(name.to_string(), OpHandle::new(name, rule));
        }

        ins(&mut named, "d", d_rotated_rule(vars, identity_images));
        ins(&mut named, "del", d_rotated_rule(vars, holo_images));
        ins(&mut named, "dbar", d_rotated_rule(vars, anti_images.clone()));
        for (s, name) in [
            (crate::flat::Structure::I, "d_I"),
            (crate::flat::Structure::J, "d_J"),
            (crate::flat::Structure::K, "d_K"),
        ] {
            ins(&mut named, name, d_rotated_rule(vars, model.structure_map(s).images.clone()));
        }

        // ∂̄_J: the odd derivation with ∂̄_J f = J⁻¹(∂f) = −J(∂f) on functions
        let j = model.structure_map(crate::flat::Structure::J);
        let sign = if flip_dbar_j { GaussRat::one() } else { GaussRat::from_int(-1) };
        let dbar_j_images: Vec<Option<(usize, GaussRat)>> = (0..vars)
            .map(|v| {
                if v < zl {
                    j.images[v].clone().map(|(m, c)| (m, (&c) * (&sign)))
                } else {
                    None
                }
            })
            .collect();
        let dbar_j_untw = d_rotated_rule(vars, dbar_j_images);

        let dbar_j_rule: Rule = match &lambda {
            None => dbar_j_untw,
            Some(lam) => {
                // twisted: J⁻¹∘∇^{1,0} on sections with ∇^{1,0} = ∂ − (∂φ)∧
                // gives ∂̄_J f = −J(∂f) + f·J(∂φ), ∂φ = λ·Σ z̄_k dz_k
                let mut twist = PolyForm::zero();
                for k in 0..zl {
                    let (m, c) = j.images[k].clone().expect("J defined on z-letters");
                    let coef = (&c) * &sign.neg();
                    let poly = Poly::var(vars, zl + k).scale(&coef.scale(lam));
                    twist.add_term(1 << m, &poly);
                }
                let w = wedge_rule(twist);
                let u = dbar_j_untw;
                Rc::new(move |f| u(f).add(&w(f)))
            }
        };
        named.insert("dbar_J".into(), OpHandle::new("dbar_J", dbar_j_rule));

        // Lefschetz pair for Ω̄ and the weight operator H = [Λ, L]
        let omega_bar_pf = const_polyform(vars, &model.omega_bar);
        ins(&mut named, "L_omega_bar", wedge_rule(omega_bar_pf));
        ins(&mut named, "lambda_omega_bar", contraction_rule(model.omega_bar.clone()));
        let h = OpHandle::commutator(
            "h_omega_bar",
            named.get("lambda_omega_bar").unwrap(),
            named.get("L_omega_bar").unwrap(),
        );
        named.insert(h.name.clone(), h);

        // d₊ = proj₊ ∘ d
        let md = model.clone();
        let drule = named.get("d").unwrap().rule.clone();
        ins(
            &mut named,
            "d_plus",
            Rc::new(move |f| md.project_plus(&drule(f))),
        );

        // scalar (q-degree − n), the shift appearing in the Laplacian gap
        let nn = model.n as i64;
        ins(
            &mut named,
            "qdeg_shift",
            Rc::new(move |f: &PolyForm| {
                let mut out = PolyForm::zero();
                for (mask, poly) in f.terms() {
                    let q = (mask >> zl).count_ones() as i64;
                    let c = GaussRat::from_int(q - nn);
                    let scaled = poly.scale(&c);
                    out.add_term(*mask, &scaled);
                }
                out
            }),
        );

        let theta = OpHandle::anticommutator(
            "theta_plus",
            named.get("dbar").unwrap(),
            named.get("dbar_J").unwrap(),
        );
        named.insert(theta.name.clone(), theta);

        if let Some(lam) = &lambda {
            let engine = Rc::new(AdjointEngine::new(vars, lam.clone()));
            let dbar_rule = named.get("dbar").unwrap().rule.clone();
            let dbar_j_rule = named.get("dbar_J").unwrap().rule.clone();
            named.insert(
                "dbar_adj".into(),
                OpHandle::new("dbar_adj", adjoint_rule(engine.clone(), 0, dbar_rule)),
            );
            named.insert(
                "dbar_J_adj".into(),
                OpHandle::new("dbar_J_adj", adjoint_rule(engine, 1, dbar_j_rule)),
            );
            let delta = OpHandle::anticommutator(
                "delta_dbar",
                named.get("dbar").unwrap(),
                named.get("dbar_adj").unwrap(),
            );
            named.insert(delta.name.clone(), delta);
            let delta_j = OpHandle::anticommutator(
                "delta_dbar_J",
                named.get("dbar_J").unwrap(),
                named.get("dbar_J_adj").unwrap(),
            );
            named.insert(delta_j.name.clone(), delta_j);
        }

        Operators {
            model,
            lambda,
            named,
        }
    }

    pub fn op(&self, name: &str) -> Result<&OpHandle, CalcError> {
        self.named
            .get(name)
            .ok_or_else(|| CalcError::UnknownOperator(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.named.keys().map(|s| s.as_str())
    }

    pub fn vars(&self) -> usize {
        4 * self.model.n
    }

    /// Exterior multiplication by a constant (0,1)-form.
    pub fn wedge_by(&self, name: &str, theta: &ExteriorForm) -> OpHandle {
        OpHandle::new(name, wedge_rule(const_polyform(self.vars(), theta)))
    }

    /// Pointwise metric adjoint of `wedge_by`.
    pub fn contract_by(&self, name: &str, theta: &ExteriorForm) -> OpHandle {
        OpHandle::new(name, contraction_rule(theta.clone()))
    }

    /// The anticommutator {∂̄, ∂̄_J} verified to be exterior multiplication by
    /// a constant multiple of Ω̄; returns (operator, multiplier).
    pub fn theta_plus(&self) -> Result<(OpHandle, GaussRat), CalcError> {
        self.theta_plus_checked(2)
    }

    pub fn theta_plus_checked(&self, coeff_bound: usize) -> Result<(OpHandle, GaussRat), CalcError> {
        let t = self.op("theta_plus")?.clone();
        let vars = self.vars();
        let one = PolyForm::term(0, Poly::one(vars));
        let t1 = t.apply(&one);
        let omega_bar = const_polyform(vars, &self.model.omega_bar);
        let multiplier = if t1.is_zero() {
            GaussRat::zero()
        } else {
            let first_mask = *self
                .model
                .omega_bar
                .terms()
                .next()
                .expect("omega_bar is nonzero")
                .0;
            let c = t1
                .coeff(first_mask)
                .cloned()
                .unwrap_or_else(|| Poly::zero(vars));
            let mut it = c.terms();
            let Some((e, v)) = it.next() else {
                return Err(CalcError::NotProportional(
                    "anticommutator misses the expected component".into(),
                ));
            };
            if e.iter().any(|&x| x != 0) || it.next().is_some() {
                return Err(CalcError::NotProportional(
                    "anticommutator has non-constant coefficients".into(),
                ));
            }
            v.clone()
        };
        // exact proportionality on the truncated grid
        let scaled_wedge = OpHandle::new(
            "lambda'·L",
            wedge_rule(omega_bar.scale(&multiplier)),
        );
        for p in 0..=2 * self.model.n {
            for mask in self.model.antiholo_basis(p) {
                for mono in monomials_up_to(vars, coeff_bound) {
                    let input = PolyForm::term(mask, Poly::monomial(vars, mono, GaussRat::one()));
                    if t.apply(&input) != scaled_wedge.apply(&input) {
                        return Err(CalcError::NotProportional(format!(
                            "mismatch on {:?}",
                            input
                        )));
                    }
                }
            }
        }
        if self.lambda.is_some() && !(multiplier.is_real() && multiplier.re.is_positive()) {
            return Err(CalcError::NotProportional(format!(
                "multiplier {} is not positive",
                multiplier
            )));
        }
        Ok((t, multiplier))
    }

    fn antiholo_poly_basis(&self, i: usize, coeff_bound: usize) -> Vec<(Mono, Expo)> {
        let vars = self.vars();
        let mut out = Vec::new();
        for mask in self.model.antiholo_basis(i) {
            for mono in monomials_up_to(vars, coeff_bound) {
                out.push((mask, mono));
            }
        }
        out
    }

    /// Exact kernel of Δ_∂̄ on (0,i)-forms with coefficient degree ≤ bound.
    pub fn laplacian_kernel(
        &self,
        i: usize,
        coeff_bound: usize,
    ) -> Result<(usize, Vec<PolyForm>), CalcError> {
        let delta = self.op("delta_dbar")?;
        let vars = self.vars();
        let basis = self.antiholo_poly_basis(i, coeff_bound);
        let index: HashMap<(Mono, Expo), usize> = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(idx, k)| (k, idx))
            .collect();
        let mut m = SparseMat::new(basis.len(), basis.len());
        for (col, (mask, mono)) in basis.iter().enumerate() {
            let out = delta.apply(&PolyForm::term(
                *mask,
                Poly::monomial(vars, mono.clone(), GaussRat::one()),
            ));
            for (omask, poly) in out.terms() {
                for (e, c) in poly.terms() {
                    let row = index
                        .get(&(*omask, e.clone()))
                        .expect("Laplacian preserves the degree filtration");
                    m.set(*row, col, c.clone());
                }
            }
        }
        let kernel = m.kernel();
        let forms = kernel
            .iter()
            .map(|v| {
                let mut f = PolyForm::zero();
                for (idx, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        let (mask, mono) = &basis[idx];
                        f.add_term(*mask, &Poly::monomial(vars, mono.clone(), c.clone()));
                    }
                }
                f
            })
            .collect();
        Ok((kernel.len(), forms))
    }

    /// Certificate that Δ_∂̄ − Δ_∂̄_J is the scalar λ′(i−n) on the truncation
    /// and that Δ_∂̄_J is Gram-positive-semidefinite there.
    pub fn positivity_report(
        &self,
        i: usize,
        coeff_bound: usize,
    ) -> Result<PositivityReport, CalcError> {
        let (_, lambda_prime) = self.theta_plus()?;
        let delta = self.op("delta_dbar")?;
        let delta_j = self.op("delta_dbar_J")?;
        let vars = self.vars();
        let n = self.model.n as i64;
        let shift = lambda_prime.scale(&rat_int(i as i64 - n));
        let bundle = WeightedBundle::new(self.model.n, self.lambda.clone().unwrap())?;
        let basis = self.antiholo_poly_basis(i, coeff_bound);
        let mut shift_holds = true;
        let forms: Vec<PolyForm> = basis
            .iter()
            .map(|(mask, mono)| {
                PolyForm::term(*mask, Poly::monomial(vars, mono.clone(), GaussRat::one()))
            })
            .collect();
        let mut delta_j_images = Vec::with_capacity(forms.len());
        for f in &forms {
            let gap = delta.apply(f).sub(&delta_j.apply(f));
            if gap != f.scale(&shift) {
                shift_holds = false;
            }
            delta_j_images.push(delta_j.apply(f));
        }
        // Hermitian quadratic form of Δ_∂̄_J on the truncation basis
        let dim = forms.len();
        let mut q = SparseMat::new(dim, dim);
        for (u, fu) in forms.iter().enumerate() {
            for (v, img_v) in delta_j_images.iter().enumerate() {
                q.set(u, v, weighted_inner_product(&bundle, img_v, fu)?);
            }
        }
        let pivots = q
            .psd_pivots()
            .map_err(|_| CalcError::NotProportional("laplacian form is not hermitian".into()))?;
        Ok(PositivityReport {
            degree: i,
            coeff_bound,
            lambda_prime,
            shift,
            shift_holds,
            psd: pivots.is_some(),
            pivots: pivots.unwrap_or_default(),
            space_dim: dim,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PositivityReport {
    pub degree: usize,
    pub coeff_bound: usize,
    pub lambda_prime: GaussRat,
    pub shift: GaussRat,
    pub shift_holds: bool,
    pub psd: bool,
    pub pivots: Vec<Rat>,
    pub space_dim: usize,
}

/// All exponent vectors of total degree ≤ bound, in deterministic order.
pub fn monomials_up_to(vars: usize, bound: usize) -> Vec<Expo> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; vars];
    gen_monos(&mut out, &mut cur, 0, bound);
    out
}

fn gen_monos(out: &mut Vec<Expo>, cur: &mut Expo, pos: usize, left: usize) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for d in 0..=left {
        cur[pos] = d as u8;
        gen_monos(out, cur, pos + 1, left - d);
    }
    cur[pos] = 0;
}

/// Domain over which an identity is checked.
#[derive(Clone, Copy, Debug)]
pub enum Domain {
    /// (0,p)-forms for p in the inclusive range.
    Antiholo(usize, usize),
    /// all form degrees in the inclusive range, every bidegree.
    Full(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub input: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone)]
pub struct IdentityOutcome {
    pub name: String,
    pub pass: bool,
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

/// Evaluate two operator expressions on every basis form of the truncation;
/// pass iff exactly equal everywhere, else report the first violation.
pub fn verify_identity(
    model: &FlatModel,
    name: &str,
    lhs: &OpHandle,
    rhs: &OpHandle,
    domain: Domain,
    coeff_bound: usize,
) -> IdentityOutcome {
    let vars = 4 * model.n;
    let masks: Vec<Mono> = match domain {
        Domain::Antiholo(lo, hi) => (lo..=hi.min(2 * model.n))
            .flat_map(|p| model.antiholo_basis(p))
            .collect(),
        Domain::Full(lo, hi) => (lo..=hi.min(4 * model.n))
            .flat_map(|d| model.degree_basis(d).to_vec())
            .collect(),
    };
    let monos = monomials_up_to(vars, coeff_bound);
    let mut checked = 0;
    for mask in &masks {
        for mono in &monos {
            let input = PolyForm::term(*mask, Poly::monomial(vars, mono.clone(), GaussRat::one()));
            let l = lhs.apply(&input);
            let r = rhs.apply(&input);
            checked += 1;
            if l != r {
                return IdentityOutcome {
                    name: name.to_string(),
                    pass: false,
                    checked,
                    counterexample: Some(Counterexample {
                        input: format!("{:?}", input),
                        lhs: format!("{:?}", l),
                        rhs: format!("{:?}", r),
                    }),
                };
            }
        }
    }
    IdentityOutcome {
        name: name.to_string(),
        pass: true,
        checked,
        counterexample: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn model1() -> Rc<FlatModel> {
        Rc::new(FlatModel::new(1))
    }

    #[test]
    fn gaussian_moments() {
        let lam = rat_int(1);
        // E[z z̄] = 1/λ
        let p = Poly::var(4, 0).mul(&Poly::var(4, 2));
        assert_eq!(expectation(&lam, &p), GaussRat::from_int(1));
        let lam2 = rat_int(2);
        assert_eq!(
            expectation(&lam2, &p),
            GaussRat::from_rat(rat(1, 2))
        );
        // odd moments vanish
        assert_eq!(expectation(&lam, &Poly::var(4, 0)), GaussRat::zero());
    }

    #[test]
    fn real_coordinate_moment_matches_double_factorial() {
        // ⟨x⁰₁, x⁰₁⟩ = 1/(2λ), and E[x^{2k}] = (2k−1)!!/(2λ)^k for k ≤ 3
        for (num, den) in [(1i64, 1i64), (1, 2), (2, 1)] {
            let lam = rat(num, den);
            let x = coordinate_poly(1, 0, 1);
            let b = WeightedBundle::new(1, lam.clone()).unwrap();
            let x_form = PolyForm::term(0, x.clone());
            let ip = weighted_inner_product(&b, &x_form, &x_form).unwrap();
            assert_eq!(
                ip,
                GaussRat::from_rat(Rat::one() / (rat_int(2) * lam.clone()))
            );
            for k in 1..=3usize {
                let mut pow = Poly::one(4);
                for _ in 0..2 * k {
                    pow = pow.mul(&x);
                }
                let expect = crate::scalar::odd_double_factorial(k)
                    / num::pow::pow(rat_int(2) * lam.clone(), k);
                assert_eq!(expectation(&lam, &pow), GaussRat::from_rat(expect));
            }
        }
    }

    #[test]
    fn inner_product_normalization_and_orthogonality() {
        let b = WeightedBundle::new(1, rat_int(1)).unwrap();
        let one = PolyForm::term(0, Poly::one(4));
        assert_eq!(weighted_inner_product(&b, &one, &one).unwrap(), GaussRat::one());
        let dzb1 = PolyForm::term(1 << 2, Poly::one(4));
        let dzb2 = PolyForm::term(1 << 3, Poly::one(4));
        assert_eq!(
            weighted_inner_product(&b, &dzb1, &dzb2).unwrap(),
            GaussRat::zero()
        );
        assert_eq!(
            weighted_inner_product(&b, &dzb1, &dzb1).unwrap(),
            GaussRat::one()
        );
        assert_eq!(
            weighted_inner_product(&b, &one, &dzb1),
            Err(CalcError::DegreeMismatch)
        );
    }

    #[test]
    fn d_of_real_coordinate() {
        let m = model1();
        let ops = Operators::untwisted(m.clone());
        let x = PolyForm::term(0, coordinate_poly(1, 0, 1));
        let dx = ops.op("d").unwrap().apply(&x);
        assert_eq!(dx, const_polyform(4, &coordinate_differential(1, 0, 1)));
    }

    #[test]
    fn d_splits_into_del_and_dbar_and_lowers_degree() {
        let m = model1();
        let ops = Operators::untwisted(m.clone());
        let d = ops.op("d").unwrap();
        let del = ops.op("del").unwrap();
        let dbar = ops.op("dbar").unwrap();
        for mask in [0u16, 1 << 0, (1 << 0) | (1 << 2)] {
            for mono in monomials_up_to(4, 3) {
                let deg: usize = mono.iter().map(|&x| x as usize).sum();
                let input = PolyForm::term(mask, Poly::monomial(4, mono, GaussRat::one()));
                let out = d.apply(&input);
                assert_eq!(out, del.apply(&input).add(&dbar.apply(&input)));
                // each output term drops the coefficient degree by exactly one
                for (_, poly) in out.terms() {
                    for (e, _) in poly.terms() {
                        let odeg: usize = e.iter().map(|&x| x as usize).sum();
                        assert_eq!(odeg + 1, deg);
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_weight_is_rejected() {
        let m = model1();
        assert_eq!(
            Operators::weighted(m.clone(), rat_int(0)).err(),
            Some(CalcError::NonPositiveWeight)
        );
        assert_eq!(
            WeightedBundle::new(1, rat_int(-2)).err(),
            Some(CalcError::NonPositiveWeight)
        );
    }

    #[test]
    fn dbar_j_of_functions_lands_in_01() {
        let m = model1();
        let ops = Operators::untwisted(m.clone());
        let dbar_j = ops.op("dbar_J").unwrap();
        // purely antiholomorphic functions are killed
        assert!(dbar_j.apply(&PolyForm::term(0, Poly::var(4, 2))).is_zero());
        // functions with a holomorphic part map into Λ^{0,1}
        for f in [
            PolyForm::term(0, Poly::var(4, 0)),
            PolyForm::term(0, coordinate_poly(1, 0, 1)),
            PolyForm::term(0, Poly::var(4, 0).mul(&Poly::var(4, 3))),
        ] {
            let out = dbar_j.apply(&f);
            assert!(!out.is_zero());
            for (mask, _) in out.terms() {
                assert!(*mask >> 2 != 0 && popcount_is_one(*mask));
            }
        }
    }

    fn popcount_is_one(m: Mono) -> bool {
        m.count_ones() == 1
    }

    #[test]
    fn adjoint_property_on_truncation() {
        let m = model1();
        let ops = Operators::weighted(m.clone(), rat_int(1)).unwrap();
        let b = WeightedBundle::new(1, rat_int(1)).unwrap();
        let dbar = ops.op("dbar").unwrap();
        let dbar_adj = ops.op("dbar_adj").unwrap();
        let monos = monomials_up_to(4, 2);
        for p in 0..=1usize {
            for mu in m.antiholo_basis(p) {
                for em in &monos {
                    let u = PolyForm::term(mu, Poly::monomial(4, em.clone(), GaussRat::one()));
                    for nu in m.antiholo_basis(p + 1) {
                        for en in &monos {
                            let v =
                                PolyForm::term(nu, Poly::monomial(4, en.clone(), GaussRat::one()));
                            let lhs = weighted_inner_product(&b, &dbar.apply(&u), &v).unwrap();
                            let rhs = weighted_inner_product(&b, &u, &dbar_adj.apply(&v)).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    /// Adjoint matrix of ∂̄ over the whole truncated space, computed through
    /// the generic Gram-solve routine.
    fn global_adjoint_matrix(
        m: &Rc<FlatModel>,
        lam: &Rat,
        bound: usize,
    ) -> (Vec<(Mono, Expo)>, SparseMat) {
        let ops = Operators::weighted(m.clone(), lam.clone()).unwrap();
        let b = WeightedBundle::new(m.n, lam.clone()).unwrap();
        let vars = 4 * m.n;
        let mut basis: Vec<(Mono, Expo)> = Vec::new();
        for p in 0..=2 * m.n {
            for mask in m.antiholo_basis(p) {
                for mono in monomials_up_to(vars, bound) {
                    basis.push((mask, mono));
                }
            }
        }
        let to_form = |(mask, mono): &(Mono, Expo)| {
            PolyForm::term(*mask, Poly::monomial(vars, mono.clone(), GaussRat::one()))
        };
        let dim = basis.len();
        let mut gram = SparseMat::new(dim, dim);
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let fu = to_form(u);
                let fv = to_form(v);
                if fu.degree() == fv.degree() {
                    gram.set(i, j, weighted_inner_product(&b, &fu, &fv).unwrap());
                }
            }
        }
        let dbar = ops.op("dbar").unwrap();
        let mut opmat = SparseMat::new(dim, dim);
        let index: HashMap<(Mono, Expo), usize> = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        for (col, u) in basis.iter().enumerate() {
            let img = dbar.apply(&to_form(u));
            for (mask, poly) in img.terms() {
                for (e, c) in poly.terms() {
                    opmat.set(index[&(*mask, e.clone())], col, c.clone());
                }
            }
        }
        let adj = crate::matrix::gram_adjoint(&opmat, &gram, &gram).unwrap();
        (basis, adj)
    }

    #[test]
    fn adjoint_stabilizes_with_degree() {
        // the adjoint of the first-order ∂̄ is first-order; the Gram-solved
        // adjoint at bound D+1, restricted to inputs of degree ≤ D, matches
        // both the bound-D computation and the blockwise engine
        let m = model1();
        let lam = rat_int(1);
        let (basis2, adj2) = global_adjoint_matrix(&m, &lam, 2);
        let (basis3, adj3) = global_adjoint_matrix(&m, &lam, 3);
        let ops = Operators::weighted(m.clone(), lam).unwrap();
        let dbar_adj = ops.op("dbar_adj").unwrap();
        let index3: HashMap<(Mono, Expo), usize> = basis3
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        for (col2, key) in basis2.iter().enumerate() {
            let deg: usize = key.1.iter().map(|&x| x as usize).sum();
            if deg >= 2 {
                continue; // inside the boundary layer of the bound-2 window
            }
            let col3 = index3[key];
            // engine column for the same input
            let input = PolyForm::term(key.0, Poly::monomial(4, key.1.clone(), GaussRat::one()));
            let engine_out = dbar_adj.apply(&input);
            for (row2, rkey) in basis2.iter().enumerate() {
                let v2 = adj2.get(row2, col2);
                let v3 = adj3.get(index3[rkey], col3);
                assert_eq!(v2, v3, "bound-2 vs bound-3 at {:?} → {:?}", key, rkey);
                let ve = engine_out
                    .coeff(rkey.0)
                    .and_then(|p| {
                        p.terms()
                            .find(|(e, _)| **e == rkey.1)
                            .map(|(_, c)| c.clone())
                    })
                    .unwrap_or_else(GaussRat::zero);
                assert_eq!(v2, ve, "global vs engine at {:?} → {:?}", key, rkey);
            }
        }
    }

    #[test]
    fn theta_plus_is_twice_lambda_times_lefschetz() {
        let m = model1();
        for (num, den) in [(1i64, 2i64), (1, 1), (2, 1)] {
            let lam = rat(num, den);
            let ops = Operators::weighted(m.clone(), lam.clone()).unwrap();
            let (_, mult) = ops.theta_plus().unwrap();
            assert_eq!(mult, GaussRat::from_rat(rat_int(2) * lam));
        }
        // untwisted: zero operator
        let ops = Operators::untwisted(m.clone());
        let (_, mult) = ops.theta_plus().unwrap();
        assert!(mult.is_zero());
    }

    #[test]
    fn h_omega_bar_eigenvalue() {
        let m = model1();
        let ops = Operators::untwisted(m.clone());
        let h = ops.op("h_omega_bar").unwrap();
        for p in 0..=2usize {
            for mask in m.antiholo_basis(p) {
                let f = PolyForm::term(mask, Poly::one(4));
                let expect = f.scale(&GaussRat::from_int(1 - p as i64));
                assert_eq!(h.apply(&f), expect, "p={p}");
            }
        }
    }

    #[test]
    fn laplacian_kernel_counts_n1() {
        let m = model1();
        let ops = Operators::weighted(m.clone(), rat_int(1)).unwrap();
        // i = 2 > n = 1: empty kernel
        let (dim, _) = ops.laplacian_kernel(2, 2).unwrap();
        assert_eq!(dim, 0);
        // i = 0: holomorphic monomials of degree ≤ 2 in two variables
        let (dim0, basis) = ops.laplacian_kernel(0, 2).unwrap();
        assert_eq!(dim0, 6);
        for f in basis {
            for (_, poly) in f.terms() {
                for (e, _) in poly.terms() {
                    assert!(e[2] == 0 && e[3] == 0, "kernel must be holomorphic");
                }
            }
        }
    }

    #[test]
    fn positivity_shift_signs() {
        let m = model1();
        let ops = Operators::weighted(m.clone(), rat_int(1)).unwrap();
        for (i, expect) in [(0usize, -2i64), (1, 0), (2, 2)] {
            let rep = ops.positivity_report(i, 1).unwrap();
            assert!(rep.shift_holds, "i={i}");
            assert!(rep.psd, "i={i}");
            assert_eq!(rep.shift, GaussRat::from_int(expect));
        }
    }
}
