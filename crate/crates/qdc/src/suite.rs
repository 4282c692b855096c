//! Named verification checks over the flat model: structural facts about
//! the weight decomposition, and the operator identities on truncations.
//! Shared by the command-line runner and the acceptance tests.

use crate::calculus::{
    verify_identity, Counterexample, Domain, IdentityOutcome, OpHandle, Operators,
};
use crate::exterior::ExteriorForm;
use crate::flat::FlatModel;
use crate::poly::Poly;
use crate::qd::SymModel;
use crate::scalar::{rat_int, GaussRat, Rat};
use crate::su2::{clebsch_gordan, Sl2Action};
use num::Signed;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuiteError {
    #[error("unknown check name: {0}")]
    UnknownCheck(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub n: usize,
    pub coeff_bound: usize,
    pub lambdas: Vec<Rat>,
    /// None runs everything.
    pub checks: Option<Vec<String>>,
    /// Test hook: flip the sign convention of ∂̄_J to watch checks fail.
    pub sabotage: bool,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.n < 1 || self.n > 2 {
            return Err(SuiteError::InvalidConfig("n must be 1 or 2".into()));
        }
        if self.coeff_bound > 4 {
            return Err(SuiteError::InvalidConfig(
                "coefficient degree bound must be at most 4".into(),
            ));
        }
        for l in &self.lambdas {
            if !l.is_positive() {
                return Err(SuiteError::InvalidConfig(format!(
                    "curvature scale {} must be positive",
                    l
                )));
            }
        }
        if let Some(list) = &self.checks {
            for c in list {
                if !ALL_CHECKS.contains(&c.as_str()) {
                    return Err(SuiteError::UnknownCheck(c.clone()));
                }
            }
        }
        Ok(())
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n: 1,
            coeff_bound: 2,
            lambdas: vec![rat_int(1)],
            checks: None,
            sabotage: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub counterexample: Option<Counterexample>,
}

impl SuiteCheck {
    fn ok(name: &str, detail: impl Into<String>) -> Self {
        SuiteCheck {
            name: name.into(),
            pass: true,
            detail: detail.into(),
            counterexample: None,
        }
    }

    fn fail(name: &str, detail: impl Into<String>) -> Self {
        SuiteCheck {
            name: name.into(),
            pass: false,
            detail: detail.into(),
            counterexample: None,
        }
    }

    fn from_identity(outcome: IdentityOutcome) -> Self {
        SuiteCheck {
            name: outcome.name.clone(),
            pass: outcome.pass,
            detail: format!("{} basis forms checked", outcome.checked),
            counterexample: outcome.counterexample,
        }
    }
}

pub const ALL_CHECKS: &[&str] = &[
    "quaternion-relations",
    "representation-dimensions",
    "clebsch-gordan",
    "weight-ideal",
    "antiholomorphic-purity",
    "antiholomorphic-span",
    "sym-model",
    "d-squared",
    "rotations-anticommute",
    "qd-anticommute",
    "bicomplex-correspondence",
    "lefschetz-sl2",
    "curvature-multiplier",
    "kodaira-commutators",
    "kodaira-nakano",
    "theta-proportionality",
    "laplacian-shift",
    "harmonic-vanishing",
];

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

/// Run the configured checks; the result order follows ALL_CHECKS.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCheck>, SuiteError> {
    cfg.validate()?;
    let wanted = |name: &str| -> bool {
        cfg.checks
            .as_ref()
            .map(|list| list.iter().any(|c| c == name))
            .unwrap_or(true)
    };
    let model = Rc::new(FlatModel::new(cfg.n));
    let untwisted = if cfg.sabotage {
        Operators::untwisted_sabotaged(model.clone())
    } else {
        Operators::untwisted(model.clone())
    };
    let d = cfg.coeff_bound;
    let mut out = Vec::new();

    for &name in ALL_CHECKS {
        if !wanted(name) {
            continue;
        }
        match name {
            "quaternion-relations" => out.push(check_quaternions(&model)),
            "representation-dimensions" => out.push(check_rep_dimensions(&model)),
            "clebsch-gordan" => out.push(check_clebsch_gordan()),
            "weight-ideal" => out.push(if model.ideal_check() {
                SuiteCheck::ok(name, "wedges by 1-forms stay inside the weight ideal")
            } else {
                SuiteCheck::fail(name, "a wedge escaped the weight ideal")
            }),
            "antiholomorphic-purity" => {
                let bad: Vec<usize> =
                    (0..=2 * cfg.n).filter(|&p| !model.purity_check(p)).collect();
                out.push(if bad.is_empty() {
                    SuiteCheck::ok(name, "antiholomorphic forms are pure of top weight")
                } else {
                    SuiteCheck::fail(name, format!("purity fails at p = {:?}", bad))
                });
            }
            "antiholomorphic-span" => {
                let bad: Vec<usize> = (0..=2 * cfg.n)
                    .filter(|&p| !model.antiholo_component_matches(p))
                    .collect();
                out.push(if bad.is_empty() {
                    SuiteCheck::ok(name, "span equality of the (0,p) component holds")
                } else {
                    SuiteCheck::fail(name, format!("span mismatch at p = {:?}", bad))
                });
            }
            "sym-model" => out.push(check_sym_model(&model)),
            "d-squared" => {
                out.push(merge_identities(
                    name,
                    ["d", "del", "dbar"].iter().map(|op| {
                        let h = untwisted.op(op).unwrap();
                        verify_identity(
                            &model,
                            &format!("{op} squared"),
                            &OpHandle::compose("sq", h, h),
                            &OpHandle::zero("0"),
                            Domain::Full(0, 4 * cfg.n),
                            d,
                        )
                    }),
                ));
            }
            "rotations-anticommute" => {
                let ops = ["d", "d_I", "d_J", "d_K"];
                let mut items = Vec::new();
                for i in 0..ops.len() {
                    for j in i..ops.len() {
                        let a = untwisted.op(ops[i]).unwrap();
                        let b = untwisted.op(ops[j]).unwrap();
                        items.push(verify_identity(
                            &model,
                            &format!("{{{}, {}}}", ops[i], ops[j]),
                            &OpHandle::anticommutator("ac", a, b),
                            &OpHandle::zero("0"),
                            Domain::Full(0, 4 * cfg.n),
                            d,
                        ));
                    }
                }
                out.push(merge_identities(name, items.into_iter()));
            }
            "qd-anticommute" => {
                let dbar = untwisted.op("dbar").unwrap();
                let dbar_j = untwisted.op("dbar_J").unwrap();
                out.push(merge_identities(
                    name,
                    [
                        verify_identity(
                            &model,
                            "{dbar_J, dbar_J}",
                            &OpHandle::anticommutator("ac", dbar_j, dbar_j),
                            &OpHandle::zero("0"),
                            Domain::Full(0, 4 * cfg.n),
                            d,
                        ),
                        verify_identity(
                            &model,
                            "{dbar, dbar_J}",
                            &OpHandle::anticommutator("ac", dbar, dbar_j),
                            &OpHandle::zero("0"),
                            Domain::Full(0, 4 * cfg.n),
                            d,
                        ),
                    ]
                    .into_iter(),
                ));
            }
            "bicomplex-correspondence" => out.push(check_bicomplex(&model, &untwisted, d)),
            "lefschetz-sl2" => out.push(check_lefschetz(&model, &untwisted, d)),
            "curvature-multiplier" => out.push(check_curvature_multiplier(&model, &untwisted, d)),
            "kodaira-commutators" | "kodaira-nakano" | "theta-proportionality"
            | "laplacian-shift" | "harmonic-vanishing" => {
                for lam in &cfg.lambdas {
                    let ops = if cfg.sabotage {
                        Operators::weighted_sabotaged(model.clone(), lam.clone())
                    } else {
                        Operators::weighted(model.clone(), lam.clone())
                    }
                    .map_err(|e| SuiteError::InvalidConfig(e.to_string()))?;
                    out.push(match name {
                        "kodaira-commutators" => check_kodaira(&model, &ops, lam, d),
                        "kodaira-nakano" => check_kodaira_nakano(&model, &ops, lam, d),
                        "theta-proportionality" => check_theta(&ops, lam),
                        "laplacian-shift" => check_laplacian_shift(&model, &ops, lam, d),
                        "harmonic-vanishing" => check_harmonic_vanishing(&ops, lam, d),
                        _ => unreachable!(),
                    });
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(out)
}

fn merge_identities(name: &str, items: impl Iterator<Item = IdentityOutcome>) -> SuiteCheck {
    let mut total = 0usize;
    for item in items {
        total += item.checked;
        if !item.pass {
            let mut c = SuiteCheck::from_identity(item);
            c.name = name.to_string();
            return c;
        }
    }
    SuiteCheck::ok(name, format!("{total} basis forms checked"))
}

fn check_quaternions(model: &FlatModel) -> SuiteCheck {
    let name = "quaternion-relations";
    if !model.quaternion_relations_hold() {
        return SuiteCheck::fail(name, "I,J,K do not satisfy the quaternion relations");
    }
    // Hodge types of the distinguished forms
    let b = model
        .hodge_bigrade(crate::flat::Structure::I, &model.omega)
        .unwrap();
    if !(b.len() == 1 && b.contains_key(&(2, 0))) {
        return SuiteCheck::fail(name, "holomorphic symplectic form is not of type (2,0)");
    }
    let bb = model
        .hodge_bigrade(crate::flat::Structure::I, &model.omega_bar)
        .unwrap();
    if !(bb.len() == 1 && bb.contains_key(&(0, 2))) {
        return SuiteCheck::fail(name, "conjugate symplectic form is not of type (0,2)");
    }
    if model.omega != model.omega_j.add(&model.omega_k.scale(&GaussRat::i())) {
        return SuiteCheck::fail(name, "symplectic form does not split as ω_J + i·ω_K");
    }
    SuiteCheck::ok(name, "quaternion relations and Hodge types hold")
}

fn check_rep_dimensions(model: &FlatModel) -> SuiteCheck {
    let name = "representation-dimensions";
    let n = model.n;
    for i in 0..=4 * n {
        let action = model.su2_on_forms(i);
        match action.verify_triple() {
            Ok(true) => {}
            _ => return SuiteCheck::fail(name, format!("su(2)-triple fails on degree {i}")),
        }
        let wd = model.weight_multiplicities(i);
        let top = wd.top_weight().unwrap_or(0) as usize;
        if top != i.min(4 * n - i) {
            return SuiteCheck::fail(
                name,
                format!("top weight {top} at degree {i}, expected {}", i.min(4 * n - i)),
            );
        }
        let plus = model.plus_dim(i);
        let expect = if i <= 2 * n { (i + 1) * binom(2 * n, i) } else { 0 };
        if plus != expect {
            return SuiteCheck::fail(
                name,
                format!("weight-top dimension {plus} at degree {i}, expected {expect}"),
            );
        }
        if i <= 2 * n && i > 0 {
            let mult = wd.multiplicity.get(&(i as u32)).copied().unwrap_or(0);
            if mult != binom(2 * n, i) {
                return SuiteCheck::fail(
                    name,
                    format!("top multiplicity {mult} at degree {i}"),
                );
            }
        }
        if wd.dimension_count() != binom(4 * n, i) {
            return SuiteCheck::fail(name, format!("dimension bookkeeping fails at degree {i}"));
        }
    }
    SuiteCheck::ok(name, "weights, multiplicities and dimensions all match")
}

fn check_clebsch_gordan() -> SuiteCheck {
    let name = "clebsch-gordan";
    for i in 0..=6u32 {
        for j in i..=6u32 {
            let t = Sl2Action::irreducible(i).tensor(&Sl2Action::irreducible(j));
            let wd = match t.weight_decompose() {
                Ok(wd) => wd,
                Err(e) => return SuiteCheck::fail(name, format!("tensor {i}⊗{j}: {e}")),
            };
            let expect: std::collections::BTreeMap<u32, usize> =
                clebsch_gordan(i, j).into_iter().map(|k| (k, 1)).collect();
            if wd.multiplicity != expect {
                return SuiteCheck::fail(name, format!("tensor {i}⊗{j} decomposes wrongly"));
            }
            let dims: usize = clebsch_gordan(i, j).iter().map(|&k| k as usize + 1).sum();
            if dims != ((i + 1) * (j + 1)) as usize {
                return SuiteCheck::fail(name, format!("dimension bookkeeping fails at {i},{j}"));
            }
        }
    }
    SuiteCheck::ok(name, "tensor decompositions match the weight list for i,j ≤ 6")
}

fn check_sym_model(model: &FlatModel) -> SuiteCheck {
    let name = "sym-model";
    let sym = SymModel::new(model);
    if !sym.bijective(model) {
        return SuiteCheck::fail(name, "structure map is not bijective per block");
    }
    if !sym.multiplicative(model) {
        return SuiteCheck::fail(name, "structure map is not multiplicative");
    }
    if !sym.equivariant(model) {
        return SuiteCheck::fail(name, "structure map is not equivariant");
    }
    SuiteCheck::ok(name, "structure map is bijective, multiplicative and equivariant")
}

/// d₊ corresponds to x·∂̄_J + y·∂̄ under the symmetric-power model.
fn check_bicomplex(model: &Rc<FlatModel>, ops: &Operators, d: usize) -> SuiteCheck {
    let name = "bicomplex-correspondence";
    let sym = SymModel::new(model);
    let vars = 4 * model.n;
    let d_plus = ops.op("d_plus").unwrap();
    let dbar = ops.op("dbar").unwrap();
    let dbar_j = ops.op("dbar_J").unwrap();
    let monos = crate::calculus::monomials_up_to(vars, d);
    let mut checked = 0usize;
    for p in 0..=2 * model.n {
        for a in 0..=p {
            for &t in sym.antiholo_basis(p) {
                for mono in &monos {
                    let eta = crate::exterior::PolyForm::term(
                        t,
                        Poly::monomial(vars, mono.clone(), GaussRat::one()),
                    );
                    let lhs = d_plus.apply(&sym.apply_linear(model, p, a, &eta));
                    let mut rhs = crate::exterior::PolyForm::zero();
                    if p + 1 <= 2 * model.n {
                        let xj = dbar_j.apply(&eta);
                        rhs = rhs.add(&sym.apply_linear(model, p + 1, a + 1, &xj));
                        let yb = dbar.apply(&eta);
                        rhs = rhs.add(&sym.apply_linear(model, p + 1, a, &yb));
                    }
                    checked += 1;
                    if lhs != rhs {
                        return SuiteCheck {
                            name: name.into(),
                            pass: false,
                            detail: format!("mismatch at p={p}, a={a}"),
                            counterexample: Some(Counterexample {
                                input: format!("x^{}y^{}⊗{:?}", a, p - a, eta),
                                lhs: format!("{:?}", lhs),
                                rhs: format!("{:?}", rhs),
                            }),
                        };
                    }
                }
            }
        }
    }
    SuiteCheck::ok(name, format!("{checked} generators checked"))
}

/// (H_Ω̄, Λ_Ω̄, L_Ω̄) is an sl(2)-triple with H acting as n−p on (q,p).
fn check_lefschetz(model: &FlatModel, ops: &Operators, d: usize) -> SuiteCheck {
    let name = "lefschetz-sl2";
    let l = ops.op("L_omega_bar").unwrap();
    let lam = ops.op("lambda_omega_bar").unwrap();
    let h = ops.op("h_omega_bar").unwrap();
    let full = Domain::Full(0, 4 * model.n);
    let two = GaussRat::from_int(2);
    let items = [
        verify_identity(
            model,
            "[H, Λ] = 2Λ",
            &OpHandle::commutator("c", h, lam),
            &OpHandle::scale("s", lam, two.clone()),
            full,
            d.min(1),
        ),
        verify_identity(
            model,
            "[H, L] = −2L",
            &OpHandle::commutator("c", h, l),
            &OpHandle::scale("s", l, two.neg()),
            full,
            d.min(1),
        ),
        verify_identity(
            model,
            "[Λ, L] = H",
            &OpHandle::commutator("c", lam, l),
            h,
            full,
            d.min(1),
        ),
        // H multiplies a (q,p)-form by n − p
        verify_identity(
            model,
            "H = n − p",
            h,
            &OpHandle::scale("s", ops.op("qdeg_shift").unwrap(), GaussRat::from_int(-1)),
            full,
            d.min(1),
        ),
        verify_identity(
            model,
            "H = n − p on (0,*)",
            h,
            &OpHandle::scale("s", ops.op("qdeg_shift").unwrap(), GaussRat::from_int(-1)),
            Domain::Antiholo(0, 2 * model.n),
            d,
        ),
    ];
    merge_identities(name, items.into_iter())
}

/// Commuting the contraction by a coordinate (0,1)-form through L_Ω̄ yields
/// multiplication by the J-rotated conjugate form.
fn check_curvature_multiplier(model: &FlatModel, ops: &Operators, d: usize) -> SuiteCheck {
    let name = "curvature-multiplier";
    let zl = 2 * model.n;
    let l_omega = ops.op("L_omega_bar").unwrap();
    let j = model.structure_map(crate::flat::Structure::J);
    let mut items = Vec::new();
    for k in 0..zl {
        let theta = ExteriorForm::term(1 << (zl + k), GaussRat::one());
        // θ_J = J(θ̄) with θ̄ = dz_k
        let (m, c) = j.images[k].clone().expect("J defined on z-letters");
        let theta_j = ExteriorForm::term(1 << m, c);
        let lam_theta = ops.contract_by("Λ_θ", &theta);
        let l_theta_j = ops.wedge_by("L_θJ", &theta_j);
        items.push(verify_identity(
            model,
            &format!("[Λ_θ, L_Ω̄] = L_θJ for θ = dz̄{}", k + 1),
            &OpHandle::commutator("c", &lam_theta, l_omega),
            &l_theta_j,
            Domain::Full(0, 4 * model.n),
            d.min(2),
        ));
    }
    merge_identities(name, items.into_iter())
}

/// Twisted commutation relations between the Lefschetz operator and the
/// adjoints: [L_Ω̄, ∂̄*] = −∂̄_J and [L_Ω̄, ∂̄_J*] = ∂̄.
fn check_kodaira(model: &FlatModel, ops: &Operators, lam: &Rat, d: usize) -> SuiteCheck {
    let name = "kodaira-commutators";
    let l = ops.op("L_omega_bar").unwrap();
    let dbar = ops.op("dbar").unwrap();
    let dbar_j = ops.op("dbar_J").unwrap();
    let dbar_adj = ops.op("dbar_adj").unwrap();
    let dbar_j_adj = ops.op("dbar_J_adj").unwrap();
    let dom = Domain::Antiholo(0, 2 * model.n);
    let items = [
        verify_identity(
            model,
            &format!("[L_Ω̄, ∂̄*] = −∂̄_J at λ={lam}"),
            &OpHandle::commutator("c", l, dbar_adj),
            &OpHandle::scale("s", dbar_j, GaussRat::from_int(-1)),
            dom,
            d,
        ),
        verify_identity(
            model,
            &format!("[L_Ω̄, ∂̄_J*] = ∂̄ at λ={lam}"),
            &OpHandle::commutator("c", l, dbar_j_adj),
            dbar,
            dom,
            d,
        ),
    ];
    merge_identities(name, items.into_iter())
}

/// Δ_∂̄ − Δ_∂̄_J = [Θ₊, Λ_Ω̄] with Θ₊ the anticommutator {∂̄, ∂̄_J}.
fn check_kodaira_nakano(model: &FlatModel, ops: &Operators, lam: &Rat, d: usize) -> SuiteCheck {
    let name = "kodaira-nakano";
    let delta = ops.op("delta_dbar").unwrap();
    let delta_j = ops.op("delta_dbar_J").unwrap();
    let theta = ops.op("theta_plus").unwrap();
    let lam_omega = ops.op("lambda_omega_bar").unwrap();
    let outcome = verify_identity(
        model,
        &format!("Δ_∂̄ − Δ_∂̄_J = [Θ₊, Λ_Ω̄] at λ={lam}"),
        &OpHandle::sub("lhs", delta, delta_j),
        &OpHandle::commutator("rhs", theta, lam_omega),
        Domain::Antiholo(0, 2 * model.n),
        d,
    );
    merge_identities(name, [outcome].into_iter())
}

/// Θ₊ is exterior multiplication by λ′·Ω̄ with λ′ = 2λ > 0.
fn check_theta(ops: &Operators, lam: &Rat) -> SuiteCheck {
    let name = "theta-proportionality";
    match ops.theta_plus() {
        Err(e) => SuiteCheck::fail(name, format!("λ={lam}: {e}")),
        Ok((_, mult)) => {
            let expect = GaussRat::from_rat(rat_int(2) * lam);
            if mult != expect {
                return SuiteCheck::fail(
                    name,
                    format!("λ={lam}: multiplier {mult}, expected {expect}"),
                );
            }
            SuiteCheck::ok(name, format!("Θ₊ = {mult}·L_Ω̄ at λ={lam}"))
        }
    }
}

/// The Laplacian gap is the scalar λ′(i−n) on (0,i)-forms.
fn check_laplacian_shift(model: &FlatModel, ops: &Operators, lam: &Rat, d: usize) -> SuiteCheck {
    let name = "laplacian-shift";
    let (_, mult) = match ops.theta_plus() {
        Ok(t) => t,
        Err(e) => return SuiteCheck::fail(name, format!("λ={lam}: {e}")),
    };
    let delta = ops.op("delta_dbar").unwrap();
    let delta_j = ops.op("delta_dbar_J").unwrap();
    let shift = OpHandle::scale("s", ops.op("qdeg_shift").unwrap(), mult);
    let outcome = verify_identity(
        model,
        &format!("Δ_∂̄ − Δ_∂̄_J = λ′(i−n) at λ={lam}"),
        &OpHandle::sub("lhs", delta, delta_j),
        &shift,
        Domain::Antiholo(0, 2 * model.n),
        d,
    );
    merge_identities(name, [outcome].into_iter())
}

/// Kernel vanishing above the middle degree plus the holomorphic count at
/// degree zero, with the positivity certificates.
fn check_harmonic_vanishing(ops: &Operators, lam: &Rat, d: usize) -> SuiteCheck {
    let name = "harmonic-vanishing";
    let n = ops.model.n;
    let bound = d.min(2);
    for i in (n + 1)..=(2 * n) {
        match ops.laplacian_kernel(i, bound) {
            Err(e) => return SuiteCheck::fail(name, format!("λ={lam}: {e}")),
            Ok((dim, _)) => {
                if dim != 0 {
                    return SuiteCheck::fail(
                        name,
                        format!("λ={lam}: kernel at degree {i} has dimension {dim}"),
                    );
                }
            }
        }
    }
    let expect = binom(2 * n + bound, bound);
    match ops.laplacian_kernel(0, bound) {
        Err(e) => return SuiteCheck::fail(name, format!("λ={lam}: {e}")),
        Ok((dim, _)) => {
            if dim != expect {
                return SuiteCheck::fail(
                    name,
                    format!("λ={lam}: holomorphic count {dim}, expected {expect}"),
                );
            }
        }
    }
    for i in 0..=2 * n {
        match ops.positivity_report(i, 1) {
            Err(e) => return SuiteCheck::fail(name, format!("λ={lam}: {e}")),
            Ok(rep) => {
                if !rep.shift_holds || !rep.psd {
                    return SuiteCheck::fail(
                        name,
                        format!("λ={lam}: positivity certificate fails at degree {i}"),
                    );
                }
            }
        }
    }
    SuiteCheck::ok(
        name,
        format!("λ={lam}: kernels vanish above degree {n}, holomorphic count matches"),
    )
}
