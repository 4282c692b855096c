//! The H²-lattice layer: exact bilinear form evaluation, signature, the
//! dual-cone vanishing trichotomy, primitivity witnesses and the nef
//! perturbation argument, all over the rationals.
//!
//! The Kähler cone is represented by finitely many rational generators (an
//! inner approximation); dual-cone membership is then decided by finitely
//! many exact sign checks against the generators.

use crate::matrix::SparseMat;
use crate::scalar::{rat_int, GaussRat, Rat};
use num::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("class length {got} does not match lattice rank {rank}")]
    LengthMismatch { rank: usize, got: usize },
    #[error("gram matrix must be symmetric")]
    NotSymmetric,
    #[error("gram matrix is degenerate")]
    Degenerate,
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("nonzero first Chern class required")]
    ZeroClass,
    #[error("cone not full-dimensional: all pairings vanish on a nonzero class")]
    ConeNotFullDimensional,
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Class = Vec<Rat>;

pub fn class_from_ints(v: &[i64]) -> Class {
    v.iter().map(|&x| rat_int(x)).collect()
}

/// Integral symmetric bilinear form on H² with rational Gram matrix.
#[derive(Clone, Debug)]
pub struct H2Lattice {
    rank: usize,
    gram: Vec<Vec<Rat>>,
}

impl H2Lattice {
    pub fn new(gram: Vec<Vec<Rat>>) -> Result<Self, LatticeError> {
        let rank = gram.len();
        for row in &gram {
            if row.len() != rank {
                return Err(LatticeError::LengthMismatch {
                    rank,
                    got: row.len(),
                });
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric);
                }
            }
        }
        let l = H2Lattice { rank, gram };
        if l.to_mat().rank() != rank {
            return Err(LatticeError::Degenerate);
        }
        Ok(l)
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self, LatticeError> {
        H2Lattice::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat_int(x)).collect())
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &Vec<Vec<Rat>> {
        &self.gram
    }

    fn to_mat(&self) -> SparseMat {
        let mut m = SparseMat::new(self.rank, self.rank);
        for i in 0..self.rank {
            for j in 0..self.rank {
                if !self.gram[i][j].is_zero() {
                    m.set(i, j, GaussRat::from_rat(self.gram[i][j].clone()));
                }
            }
        }
        m
    }

    /// Exact bilinear evaluation against the Gram matrix.
    pub fn q(&self, a: &Class, b: &Class) -> Result<Rat, LatticeError> {
        if a.len() != self.rank {
            return Err(LatticeError::LengthMismatch {
                rank: self.rank,
                got: a.len(),
            });
        }
        if b.len() != self.rank {
            return Err(LatticeError::LengthMismatch {
                rank: self.rank,
                got: b.len(),
            });
        }
        let mut acc = Rat::zero();
        for i in 0..self.rank {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                if !b[j].is_zero() {
                    acc += &a[i] * &self.gram[i][j] * &b[j];
                }
            }
        }
        Ok(acc)
    }

    /// Exact inertia (positives, negatives); degenerate input is an error.
    pub fn signature(&self) -> Result<(usize, usize), LatticeError> {
        let (pos, neg, zero) = self
            .to_mat()
            .hermitian_inertia()
            .map_err(|_| LatticeError::NotSymmetric)?;
        if zero > 0 {
            return Err(LatticeError::Degenerate);
        }
        Ok((pos, neg))
    }

    /// Check supplied top self-intersection numbers against q(η,η)^n.
    pub fn fujiki_check(
        &self,
        n: usize,
        data: &[(Class, Rat)],
    ) -> Result<Vec<FujikiOutcome>, LatticeError> {
        let mut out = Vec::new();
        for (class, top) in data {
            let qv = self.q(class, class)?;
            let mut expect = Rat::one();
            for _ in 0..n {
                expect *= &qv;
            }
            out.push(FujikiOutcome {
                class: class.clone(),
                expected: expect.clone(),
                supplied: top.clone(),
                pass: expect == *top,
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct FujikiOutcome {
    pub class: Class,
    pub expected: Rat,
    pub supplied: Rat,
    pub pass: bool,
}

/// Rational polyhedral inner approximation of the Kähler cone.
#[derive(Clone, Debug)]
pub struct ConeSpec {
    generators: Vec<Class>,
}

impl ConeSpec {
    /// Validates that all pairwise products (including self-products) are
    /// strictly positive, as products of Kähler classes must be.
    pub fn new(lattice: &H2Lattice, generators: Vec<Class>) -> Result<Self, LatticeError> {
        if generators.is_empty() {
            return Err(LatticeError::InvalidCone("no generators".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            for (j, h) in generators.iter().enumerate().skip(i) {
                let v = lattice.q(g, h)?;
                if !v.is_positive() {
                    return Err(LatticeError::InvalidCone(format!(
                        "q(g{}, g{}) = {} is not positive",
                        i + 1,
                        j + 1,
                        v
                    )));
                }
            }
        }
        Ok(ConeSpec { generators })
    }

    pub fn generators(&self) -> &[Class] {
        &self.generators
    }
}

/// Position of a class relative to the closed dual cone and its opposite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrichotomyCase {
    /// all pairings ≥ 0: the closed dual cone.
    DualClosure,
    /// all pairings ≤ 0: the opposite closed dual cone.
    MinusDualClosure,
    /// mixed signs: outside both.
    Neither,
}

impl fmt::Display for TrichotomyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrichotomyCase::DualClosure => write!(f, "dual-closure"),
            TrichotomyCase::MinusDualClosure => write!(f, "minus-dual-closure"),
            TrichotomyCase::Neither => write!(f, "neither"),
        }
    }
}

/// Classification of a line-bundle class with its predicted zero set.
#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub class: Class,
    pub case: TrichotomyCase,
    pub n: usize,
    /// degrees 0 ≤ i ≤ 2n with H^i predicted zero.
    pub zero_degrees: Vec<usize>,
    pub pairings: Vec<Rat>,
}

/// Vanishing trichotomy: signs of q(c1, g_i) against the cone generators
/// decide the position relative to ±(closed dual cone), and the zero set
/// follows: dual closure kills i > n, the opposite kills i < n, and a class
/// outside both kills every i ≠ n.
pub fn classify(
    lattice: &H2Lattice,
    cone: &ConeSpec,
    c1: &Class,
    n: usize,
) -> Result<VanishingReport, LatticeError> {
    if c1.iter().all(|x| x.is_zero()) {
        return Err(LatticeError::ZeroClass);
    }
    let pairings: Vec<Rat> = cone
        .generators
        .iter()
        .map(|g| lattice.q(c1, g))
        .collect::<Result<_, _>>()?;
    let any_pos = pairings.iter().any(|s| s.is_positive());
    let any_neg = pairings.iter().any(|s| s.is_negative());
    let case = match (any_pos, any_neg) {
        (false, false) => return Err(LatticeError::ConeNotFullDimensional),
        (true, false) => TrichotomyCase::DualClosure,
        (false, true) => TrichotomyCase::MinusDualClosure,
        (true, true) => TrichotomyCase::Neither,
    };
    let zero_degrees: Vec<usize> = (0..=2 * n)
        .filter(|&i| match case {
            TrichotomyCase::DualClosure => i > n,
            TrichotomyCase::MinusDualClosure => i < n,
            TrichotomyCase::Neither => i != n,
        })
        .collect();
    Ok(VanishingReport {
        class: c1.clone(),
        case,
        n,
        zero_degrees,
        pairings,
    })
}

#[derive(Clone, Debug)]
pub struct PrimitiveWitness {
    /// convex combination t·g_i + (1−t)·g_j pairing to zero with the class.
    pub omega3: Class,
    pub t: Rat,
    pub gen_negative: usize,
    pub gen_positive: usize,
}

/// For a class outside both dual cones, produce a Kähler-cone vector with
/// q(η, ω₃) = 0 by interpolating between two generators of opposite pairing
/// sign; otherwise None.
pub fn primitive_witness(
    lattice: &H2Lattice,
    cone: &ConeSpec,
    eta: &Class,
    n: usize,
) -> Result<Option<PrimitiveWitness>, LatticeError> {
    let report = classify(lattice, cone, eta, n)?;
    if report.case != TrichotomyCase::Neither {
        return Ok(None);
    }
    let i = report
        .pairings
        .iter()
        .position(|s| s.is_negative())
        .expect("Neither case has a negative pairing");
    let j = report
        .pairings
        .iter()
        .position(|s| s.is_positive())
        .expect("Neither case has a positive pairing");
    let (si, sj) = (&report.pairings[i], &report.pairings[j]);
    // q(η, t·g_i + (1−t)·g_j) = t·s_i + (1−t)·s_j = 0
    let t = sj / (sj - si);
    let one_minus_t = Rat::one() - &t;
    let omega3: Class = cone.generators[i]
        .iter()
        .zip(cone.generators[j].iter())
        .map(|(a, b)| a * &t + b * &one_minus_t)
        .collect();
    debug_assert!(lattice.q(eta, &omega3)? .is_zero());
    let check = lattice.q(eta, &omega3)?;
    if !check.is_zero() {
        return Err(LatticeError::Precondition(format!(
            "witness pairing is {} instead of zero",
            check
        )));
    }
    Ok(Some(PrimitiveWitness {
        omega3,
        t,
        gen_negative: i,
        gen_positive: j,
    }))
}

#[derive(Clone, Debug)]
pub struct NefPerturbation {
    pub lambda: Rat,
    pub delta: Rat,
    pub perturbed: Class,
    /// q(ω, η−εω) — must be positive.
    pub against_omega: Rat,
    /// q(η+δω, η−εω) — must be negative.
    pub against_inner: Rat,
}

/// Perturb an isotropic nef class off both closed dual cones: for
/// 0 < ε < q(η,ω)/q(ω,ω), the class η−εω pairs positively with ω and
/// negatively with η+δω, where δ = λε/(2·q(η,ω)) and λ = q(ω, η−εω).
pub fn nef_perturbation(
    lattice: &H2Lattice,
    eta: &Class,
    omega: &Class,
    epsilon: &Rat,
) -> Result<NefPerturbation, LatticeError> {
    let q_ee = lattice.q(eta, eta)?;
    if !q_ee.is_zero() {
        return Err(LatticeError::Precondition(format!(
            "class is not isotropic: q(eta,eta) = {}",
            q_ee
        )));
    }
    let q_eo = lattice.q(eta, omega)?;
    if !q_eo.is_positive() {
        return Err(LatticeError::Precondition(format!(
            "q(eta,omega) = {} is not positive",
            q_eo
        )));
    }
    let q_oo = lattice.q(omega, omega)?;
    if !q_oo.is_positive() {
        return Err(LatticeError::Precondition(format!(
            "q(omega,omega) = {} is not positive",
            q_oo
        )));
    }
    let bound = &q_eo / &q_oo;
    if !epsilon.is_positive() || *epsilon >= bound {
        return Err(LatticeError::Precondition(format!(
            "epsilon must satisfy 0 < epsilon < {}",
            bound
        )));
    }
    let perturbed: Class = eta
        .iter()
        .zip(omega.iter())
        .map(|(e, o)| e - &(o * epsilon))
        .collect();
    let lambda = lattice.q(omega, &perturbed)?;
    if !lambda.is_positive() {
        return Err(LatticeError::Precondition(
            "lambda = q(omega, eta - eps*omega) must be positive".into(),
        ));
    }
    // half the allowed bound, making the output canonical
    let delta = &lambda * epsilon / (rat_int(2) * &q_eo);
    let inner: Class = eta
        .iter()
        .zip(omega.iter())
        .map(|(e, o)| e + &(o * &delta))
        .collect();
    let against_inner = lattice.q(&inner, &perturbed)?;
    if !against_inner.is_negative() {
        return Err(LatticeError::Precondition(format!(
            "q(eta+delta*omega, eta-eps*omega) = {} is not negative",
            against_inner
        )));
    }
    Ok(NefPerturbation {
        lambda: lambda.clone(),
        delta,
        perturbed,
        against_omega: lambda,
        against_inner,
    })
}

/// The cohomological pairing formula with caller-supplied integrals:
/// a − ((2n−2)/(2n−1)²)·b₁b₂/c. For n = 1 the second coefficient vanishes,
/// so the formula degenerates to the plain top integral.
pub fn beauville_pairing(
    n: usize,
    top_with_classes: &Rat,
    omega_power_e1: &Rat,
    omega_power_e2: &Rat,
    omega_top: &Rat,
) -> Result<Rat, LatticeError> {
    let num = rat_int(2 * n as i64 - 2);
    if num.is_zero() {
        return Ok(top_with_classes.clone());
    }
    if omega_top.is_zero() {
        return Err(LatticeError::Precondition(
            "vanishing normalization integral".into(),
        ));
    }
    let den = rat_int(2 * n as i64 - 1) * rat_int(2 * n as i64 - 1);
    Ok(top_with_classes - &(num / den * omega_power_e1 * omega_power_e2 / omega_top))
}
