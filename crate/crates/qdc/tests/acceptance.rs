//! Acceptance suite: one test per criterion, each printing a pass line.
//! Everything here is exact — zero tolerance on every comparison.

use num::{One, Signed, Zero};
use qdc::bbf::{
    class_from_ints, classify, nef_perturbation, primitive_witness, Class, ConeSpec, H2Lattice,
    TrichotomyCase,
};
use qdc::calculus::Operators;
use qdc::flat::FlatModel;
use qdc::koszul::{
    n0_threshold, surjectivity_verdict, vanishing_grid, Cell, DivisorConfig, KoszulError, Verdict,
};
use qdc::qd::SymModel;
use qdc::scalar::{rat, rat_int, GaussRat, Rat};
use qdc::su2::clebsch_gordan;
use qdc::SparseMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::rc::Rc;

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

/// Independent multiplicity oracle: the weight-k multiplicity equals the
/// dimension of the highest-weight space ker f ∩ ker(h − k), computed as one
/// stacked exact kernel.
fn multiplicity_oracle(action: &qdc::Sl2Action) -> BTreeMap<u32, usize> {
    let dim = action.dim();
    let mut out = BTreeMap::new();
    for k in 0..=dim as i64 {
        let shifted = action
            .h
            .sub(&SparseMat::identity(dim).scale(&GaussRat::from_int(k)));
        let mut stacked = SparseMat::new(2 * dim, dim);
        for i in 0..dim {
            for (j, v) in shifted.row(i) {
                stacked.set(i, *j, v.clone());
            }
            for (j, v) in action.f.row(i) {
                stacked.set(dim + i, *j, v.clone());
            }
        }
        let m = stacked.kernel().len();
        if m > 0 {
            out.insert(k as u32, m);
        }
    }
    out
}

#[test]
fn criterion_1_representation_suite() {
    for n in 1..=2usize {
        let model = FlatModel::new(n);
        for i in 0..=4 * n {
            let action = model.su2_on_forms(i);
            assert!(action.verify_triple().unwrap(), "triple fails at n={n} i={i}");
            let wd = model.weight_multiplicities(i);
            let oracle = multiplicity_oracle(action);
            assert_eq!(wd.multiplicity, oracle, "oracle mismatch at n={n} i={i}");
            if i <= 2 * n {
                if i > 0 {
                    assert_eq!(
                        wd.multiplicity.get(&(i as u32)).copied().unwrap_or(0),
                        binom(2 * n, i),
                        "top multiplicity at n={n} i={i}"
                    );
                }
                assert_eq!(
                    model.plus_dim(i),
                    (i + 1) * binom(2 * n, i),
                    "weight-top dimension at n={n} i={i}"
                );
            } else {
                assert_eq!(model.plus_dim(i), 0);
            }
        }
    }
    for i in 0..=6u32 {
        for j in i..=6u32 {
            let t = qdc::Sl2Action::irreducible(i).tensor(&qdc::Sl2Action::irreducible(j));
            let wd = t.weight_decompose().unwrap();
            let expect: BTreeMap<u32, usize> =
                clebsch_gordan(i, j).into_iter().map(|k| (k, 1)).collect();
            assert_eq!(wd.multiplicity, expect, "tensor {i}⊗{j}");
            let dims: usize = clebsch_gordan(i, j).iter().map(|&k| k as usize + 1).sum();
            assert_eq!(dims, ((i + 1) * (j + 1)) as usize);
        }
    }
    println!("ACCEPTANCE criterion-1 representation suite: PASS");
}

#[test]
fn criterion_2_qd_structure_suite() {
    for n in 1..=2usize {
        let model = FlatModel::new(n);
        assert!(model.ideal_check(), "ideal property at n={n}");
        for p in 0..=2 * n {
            assert!(model.purity_check(p), "purity at n={n} p={p}");
            assert!(
                model.antiholo_component_matches(p),
                "span equality at n={n} p={p}"
            );
        }
        let sym = SymModel::new(&model);
        assert!(sym.bijective(&model), "bijectivity at n={n}");
        assert!(sym.multiplicative(&model), "multiplicativity at n={n}");
        assert!(sym.equivariant(&model), "equivariance at n={n}");
    }
    println!("ACCEPTANCE criterion-2 qD-structure suite: PASS");
}

#[test]
fn criterion_3_operator_identity_suite() {
    use qdc::suite::{run_suite, SuiteConfig};
    let identity_checks: Vec<String> = [
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
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for n in 1..=2usize {
        let cfg = SuiteConfig {
            n,
            coeff_bound: 3,
            lambdas: vec![rat(1, 2), rat_int(1), rat_int(2)],
            checks: Some(identity_checks.clone()),
            sabotage: false,
        };
        let checks = run_suite(&cfg).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.pass, "n={n}: {} failed: {}", c.name, c.detail);
        }
    }
    println!("ACCEPTANCE criterion-3 operator-identity suite (n ≤ 2, D = 3, three scales): PASS");
}

#[test]
fn criterion_4_vanishing_mechanism() {
    for n in 1..=2usize {
        let model = Rc::new(FlatModel::new(n));
        let ops = Operators::weighted(model.clone(), rat_int(1)).unwrap();
        let (_, lambda_prime) = ops.theta_plus().unwrap();
        assert!(lambda_prime.is_real() && lambda_prime.re.is_positive());
        for d in 0..=2usize {
            for i in (n + 1)..=(2 * n) {
                let (dim, _) = ops.laplacian_kernel(i, d).unwrap();
                assert_eq!(dim, 0, "kernel at n={n} i={i} bound={d}");
            }
            let (dim0, _) = ops.laplacian_kernel(0, d).unwrap();
            assert_eq!(dim0, binom(2 * n + d, d), "holomorphic count at n={n} bound={d}");
        }
        for i in 0..=2 * n {
            let rep = ops.positivity_report(i, 1).unwrap();
            assert!(rep.shift_holds, "shift at n={n} i={i}");
            assert!(rep.psd, "positive semidefiniteness at n={n} i={i}");
            assert_eq!(
                rep.shift,
                lambda_prime.scale(&rat_int(i as i64 - n as i64)),
                "shift value at n={n} i={i}"
            );
            assert!(rep.pivots.iter().all(|p| !p.is_negative()));
        }
    }
    println!("ACCEPTANCE criterion-4 vanishing mechanism: PASS");
}

struct RandomLattice {
    lattice: H2Lattice,
    neg_weights: Vec<i64>,
}

/// Hyperbolic block plus a negative-definite diagonal tail: nondegenerate,
/// Lorentzian on the span we sample from, and rich in isotropic vectors.
fn random_lattice(rng: &mut ChaCha8Rng) -> RandomLattice {
    let tail = rng.gen_range(0..=2usize);
    let rank = 2 + tail;
    let mut rows = vec![vec![0i64; rank]; rank];
    rows[0][1] = 1;
    rows[1][0] = 1;
    let mut neg_weights = Vec::new();
    for t in 0..tail {
        let d = rng.gen_range(1..=4i64);
        rows[2 + t][2 + t] = -2 * d;
        neg_weights.push(2 * d);
    }
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    RandomLattice {
        lattice: H2Lattice::from_int_rows(&refs).unwrap(),
        neg_weights,
    }
}

/// Sample a class of positive square pairing positively with (1,1,0,…); in
/// Lorentzian signature such classes automatically pair positively with each
/// other, so any set of them is a valid cone.
fn random_cone_vector(rng: &mut ChaCha8Rng, l: &RandomLattice) -> Class {
    let rank = l.lattice.rank();
    loop {
        let mut v: Vec<i64> = Vec::with_capacity(rank);
        v.push(rng.gen_range(1..=5));
        v.push(rng.gen_range(1..=5));
        for _ in 2..rank {
            v.push(rng.gen_range(-1..=1));
        }
        let c = class_from_ints(&v);
        let qq = l.lattice.q(&c, &c).unwrap();
        let ref_class = {
            let mut r = vec![0i64; rank];
            r[0] = 1;
            r[1] = 1;
            class_from_ints(&r)
        };
        if qq.is_positive() && l.lattice.q(&c, &ref_class).unwrap().is_positive() {
            return c;
        }
    }
}

#[test]
fn criterion_5_lattice_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260810);
    let mut neither_seen = 0usize;
    for trial in 0..1000usize {
        let rl = random_lattice(&mut rng);
        let rank = rl.lattice.rank();
        let gens: Vec<Class> = (0..rng.gen_range(2..=3usize))
            .map(|_| random_cone_vector(&mut rng, &rl))
            .collect();
        let cone = ConeSpec::new(&rl.lattice, gens).expect("sampled cones are valid");
        let n = rng.gen_range(1..=3usize);
        let c1: Class = loop {
            let v: Vec<i64> = (0..rank).map(|_| rng.gen_range(-4..=4i64)).collect();
            if v.iter().any(|&x| x != 0) {
                break class_from_ints(&v);
            }
        };
        match classify(&rl.lattice, &cone, &c1, n) {
            Err(qdc::bbf::LatticeError::ConeNotFullDimensional) => continue,
            Err(e) => panic!("trial {trial}: unexpected error {e}"),
            Ok(rep) => {
                // totality and exclusivity: the case determines the zero set
                let expect: Vec<usize> = (0..=2 * n)
                    .filter(|&i| match rep.case {
                        TrichotomyCase::DualClosure => i > n,
                        TrichotomyCase::MinusDualClosure => i < n,
                        TrichotomyCase::Neither => i != n,
                    })
                    .collect();
                assert_eq!(rep.zero_degrees, expect);

                // Serre mirror: negating the class swaps the closed cones
                let neg: Class = c1.iter().map(|x| -x.clone()).collect();
                let mirror = classify(&rl.lattice, &cone, &neg, n).unwrap();
                let expected_case = match rep.case {
                    TrichotomyCase::DualClosure => TrichotomyCase::MinusDualClosure,
                    TrichotomyCase::MinusDualClosure => TrichotomyCase::DualClosure,
                    TrichotomyCase::Neither => TrichotomyCase::Neither,
                };
                assert_eq!(mirror.case, expected_case, "trial {trial}");
                let mirrored: Vec<usize> = rep
                    .zero_degrees
                    .iter()
                    .rev()
                    .map(|&i| 2 * n - i)
                    .collect();
                assert_eq!(mirror.zero_degrees, mirrored, "trial {trial}");

                // witness exists exactly in the mixed case, and is exact
                let w = primitive_witness(&rl.lattice, &cone, &c1, n).unwrap();
                match rep.case {
                    TrichotomyCase::Neither => {
                        neither_seen += 1;
                        let w = w.expect("mixed case must produce a witness");
                        assert!(rl.lattice.q(&c1, &w.omega3).unwrap().is_zero());
                        assert!(w.t.is_positive() && w.t < Rat::one());
                        assert!(rl.lattice.q(&w.omega3, &w.omega3).unwrap().is_positive());
                    }
                    _ => assert!(w.is_none(), "trial {trial}"),
                }
            }
        }
    }
    assert!(neither_seen > 50, "mixed case must occur in the sample");

    // isotropic perturbation batch: η solves q(η,η) = 0 exactly
    let mut rng = ChaCha8Rng::seed_from_u64(515);
    for trial in 0..1000usize {
        let rl = random_lattice(&mut rng);
        let rank = rl.lattice.rank();
        // pick tail coordinates and a ≠ 0, solve 2ab = Σ w_i c_i² for b
        let a = rat_int(rng.gen_range(1..=4i64));
        let tail: Vec<Rat> = (0..rank - 2)
            .map(|_| rat_int(rng.gen_range(-2..=2i64)))
            .collect();
        let mut s = Rat::zero();
        for (w, c) in rl.neg_weights.iter().zip(tail.iter()) {
            s += rat_int(*w) * c * c;
        }
        let b = s / (rat_int(2) * &a);
        let mut eta: Class = vec![a, b];
        eta.extend(tail);
        assert!(rl.lattice.q(&eta, &eta).unwrap().is_zero(), "quadric solve");

        let omega = loop {
            let v = random_cone_vector(&mut rng, &rl);
            if rl.lattice.q(&eta, &v).unwrap().is_positive() {
                break v;
            }
        };
        let q_eo = rl.lattice.q(&eta, &omega).unwrap();
        let q_oo = rl.lattice.q(&omega, &omega).unwrap();
        let bound = q_eo / q_oo;
        let epsilon = bound * rat(1, rng.gen_range(2..=5i64));
        let p = nef_perturbation(&rl.lattice, &eta, &omega, &epsilon).unwrap();
        assert!(p.against_omega.is_positive(), "trial {trial}");
        assert!(p.against_inner.is_negative(), "trial {trial}");

        // feeding the perturbed class back through the classifier, against a
        // cone containing ω and the inner witness η+δω, lands in the mixed case
        let witness: Class = eta
            .iter()
            .zip(omega.iter())
            .map(|(e, o)| e + &(o * &p.delta))
            .collect();
        let cone = ConeSpec::new(&rl.lattice, vec![omega.clone(), witness])
            .expect("perturbation cone is valid");
        let n = 2;
        let rep = classify(&rl.lattice, &cone, &p.perturbed, n).unwrap();
        assert_eq!(rep.case, TrichotomyCase::Neither, "trial {trial}");
    }
    println!("ACCEPTANCE criterion-5 lattice suite (1000 + 1000 random instances): PASS");
}

fn koszul_fixture(k: usize, n: usize, power: i64) -> DivisorConfig {
    let lattice = H2Lattice::from_int_rows(&[&[0, 1], &[1, 0]]).unwrap();
    let cone = ConeSpec::new(
        &lattice,
        vec![class_from_ints(&[2, 1]), class_from_ints(&[1, 2])],
    )
    .unwrap();
    let nef = class_from_ints(&[1, 0]);
    let amples = match k {
        1 => vec![class_from_ints(&[2, 1])],
        2 => vec![class_from_ints(&[2, 1]), class_from_ints(&[1, 2])],
        _ => vec![],
    };
    DivisorConfig::new(lattice, cone, nef, amples, n, power).unwrap()
}

#[test]
fn criterion_6_koszul_suite() {
    // the documented threshold: q(h,h) = 4, q(l,h) = 1 gives N0 = 4
    let cfg = koszul_fixture(1, 2, 5);
    assert_eq!(n0_threshold(&cfg).unwrap(), rat_int(4));

    for (k, n) in [(1usize, 2usize), (2, 3)] {
        let power = match k {
            1 => 5,
            _ => 7,
        };
        let cfg = koszul_fixture(k, n, power);
        let grid = vanishing_grid(&cfg).unwrap();
        for s in 1..=k {
            for row in 0..=n {
                let cell = grid.cell(s, row);
                if row == n {
                    assert_eq!(cell, Cell::PossiblyNonzero, "k={k} n={n} s={s} row={row}");
                } else {
                    assert_eq!(cell, Cell::Zero, "k={k} n={n} s={s} row={row}");
                }
            }
        }
        // untwisted column: nothing below the middle is forced
        for row in 0..=n {
            assert_eq!(grid.cell(0, row), Cell::PossiblyNonzero);
        }
        let verdict = surjectivity_verdict(&cfg).unwrap();
        assert_eq!(verdict.verdict, Verdict::Surjective, "k={k} n={n}");
    }

    // below or at threshold: hard error
    for power in [3, 4] {
        assert!(matches!(
            vanishing_grid(&koszul_fixture(1, 2, power)),
            Err(KoszulError::BelowThreshold { .. })
        ));
    }
    // dimension hypothesis: k ≥ n is not applicable
    let v = surjectivity_verdict(&koszul_fixture(2, 2, 7)).unwrap();
    assert!(matches!(v.verdict, Verdict::NotApplicable { .. }));
    println!("ACCEPTANCE criterion-6 koszul suite: PASS");
}
