use proptest::prelude::*;
use wslln_core::fields::Stored;
use wslln_core::linalg::PowerCache;
use wslln_core::math::Turn;
use wslln_core::operators::{Fibers, Point};
use wslln_core::schedule::asymptotic_class;
use wslln_core::transforms::weighted_series;
use wslln_core::{CMatrix, Cocycle, LinearOperator, SampleSpace, Schedule, Transformation, VectorField, WeightExpr, WeightSeq};

fn ds_markov() -> CMatrix {
    CMatrix::from_real_rows(&[vec![0.5, 0.25, 0.25], vec![0.25, 0.5, 0.25], vec![0.25, 0.25, 0.5]]).unwrap()
}

fn skew_op(seed: u64) -> LinearOperator {
    let space = SampleSpace::CircleGrid { points: 12 };
    let matrices = (0..12).map(|i| CMatrix::random_with_norm(2, seed + i, 0.95)).collect();
    let c = Cocycle::new(Transformation::Rotation { theta: Turn::Rational { num: 1, den: 6 } }, space, Fibers::PerAtom { matrices }).unwrap();
    LinearOperator::skew(c).unwrap()
}

/// Every operator kind, all flagged as contractions.
fn contractions(seed: u64) -> Vec<LinearOperator> {
    vec![
        LinearOperator::koopman(Transformation::Rotation { theta: Turn::Rational { num: 3, den: 8 } }, SampleSpace::CircleGrid { points: 16 }, 2).unwrap(),
        LinearOperator::koopman(Transformation::Permutation { pi: vec![2, 0, 4, 1, 3] }, SampleSpace::Finite { m: 5 }, 3).unwrap(),
        LinearOperator::matrix(CMatrix::random_with_norm(3, seed, 0.9), SampleSpace::Finite { m: 4 }).unwrap(),
        LinearOperator::markov(ds_markov(), 2).unwrap(),
        skew_op(seed),
    ]
}

fn close(a: &VectorField, b: &VectorField, tol: f64) -> bool {
    a.sub(b).norm2() <= tol * (1.0 + b.norm2())
}

#[test]
fn abel_summation_identity() {
    let space = SampleSpace::Finite { m: 3 };
    let fields = Stored::random(space, 2, 4096, 1234).unwrap();
    for seed in 0..100u64 {
        let a = 0.2 + 0.01 * seed as f64;
        let phase = 0.37 + seed as f64;
        let n0 = 1 + seed % 3;
        let w = WeightSeq::from_fn(format!("w{seed}"), n0, move |n| {
            let x = n as f64;
            x.powf(a) * (2.0 + (phase * x).sin())
        })
        .unwrap();
        for n in [1u64, 2, 17, 256, 4096] {
            if n < n0 {
                continue;
            }
            let (direct, abel) = weighted_series(&fields, &w, n).unwrap();
            let rel = direct.sub(&abel).norm2() / direct.norm2().max(1e-300);
            assert!(rel <= 1e-10, "seed {seed}, n {n}: relative gap {rel:e}");
        }
    }
}

#[test]
fn flagged_operators_contract() {
    for seed in 0..100u64 {
        for op in contractions(seed) {
            assert!(op.flags.contraction);
            let f = VectorField::random(op.space.clone(), op.dim, 10_000 + seed);
            let tf = op.apply(&f).unwrap();
            assert!(tf.norm2() <= f.norm2() * (1.0 + 1e-12), "{:?}", op.kind);
            if op.flags.dunford_schwartz {
                for p in [1.0, f64::INFINITY] {
                    assert!(tf.norm_p(p) <= f.norm_p(p) * (1.0 + 1e-12), "{:?} at p = {p}", op.kind);
                }
            }
        }
    }
}

#[test]
fn non_contractions_are_not_flagged() {
    let op = LinearOperator::matrix(CMatrix::random_with_norm(3, 5, 1.5), SampleSpace::Finite { m: 2 }).unwrap();
    assert!(!op.flags.contraction);
    let op = LinearOperator::koopman(Transformation::Doubling, SampleSpace::CircleGrid { points: 16 }, 1).unwrap();
    assert!(!op.flags.contraction);
}

#[test]
fn skew_flag_matches_the_fibers() {
    let space = SampleSpace::Finite { m: 2 };
    let big = CMatrix::random_with_norm(2, 1, 1.2);
    assert!(Cocycle::new(Transformation::Identity, space, Fibers::Constant { matrix: big }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn koopman_is_an_isometry(num in 0u64..64, seed in any::<u64>(), p in prop::sample::select(vec![1.0, 2.0, 3.5, f64::INFINITY])) {
        let space = SampleSpace::CircleGrid { points: 64 };
        let op = LinearOperator::koopman(Transformation::Rotation { theta: Turn::Rational { num, den: 64 } }, space.clone(), 2).unwrap();
        prop_assert_eq!(op.flags.measure_preserving, Some(true));
        let f = VectorField::random(space, 2, seed);
        let tf = op.apply_power(1 + seed % 50, &f).unwrap();
        prop_assert!((tf.norm_p(p) - f.norm_p(p)).abs() <= 1e-12 * f.norm_p(p));
    }

    #[test]
    fn koopman_permutation_is_an_isometry(perm in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle(), seed in any::<u64>()) {
        let space = SampleSpace::Finite { m: 9 };
        let op = LinearOperator::koopman(Transformation::Permutation { pi: perm }, space.clone(), 1).unwrap();
        let f = VectorField::random(space, 1, seed);
        let tf = op.apply(&f).unwrap();
        prop_assert!((tf.norm2() - f.norm2()).abs() <= 1e-12 * f.norm2());
    }

    #[test]
    fn cached_powers_match_repeated_application(seed in 0u64..1000, n in 0u64..=16) {
        for mut op in contractions(seed) {
            op.prepare(16);
            let f = VectorField::random(op.space.clone(), op.dim, seed);
            let mut g = f.clone();
            for _ in 0..n {
                g = op.apply(&g).unwrap();
            }
            let fast = op.apply_power(n, &f).unwrap();
            prop_assert!(close(&fast, &g, 1e-12), "{:?} n = {}", op.kind, n);
        }
    }

    #[test]
    fn power_cache_matches_products(seed in 0u64..1000, e in 0u64..300) {
        let a = CMatrix::random_with_norm(3, seed, 1.0);
        let mut cache = PowerCache::new(&a);
        let mut slow = CMatrix::identity(3);
        for _ in 0..e {
            slow = slow.mul(&a);
        }
        prop_assert!(cache.power(e).max_abs_diff(&slow) <= 1e-11);
    }

    #[test]
    fn cocycle_products_split(seed in 0u64..1000, m in 0u64..20, n in 0u64..20, start in 0usize..12) {
        let space = SampleSpace::CircleGrid { points: 12 };
        let matrices = (0..12).map(|i| CMatrix::random_with_norm(2, seed * 12 + i, 0.9)).collect();
        let c = Cocycle::new(Transformation::Rotation { theta: Turn::Rational { num: 5, den: 12 } }, space, Fibers::PerAtom { matrices }).unwrap();
        let w = Point::Atom(start);
        let whole = c.product(w, m + n);
        let split = c.product(w, m).mul(&c.product(c.advance(w, m), n));
        prop_assert!(whole.max_abs_diff(&split) <= 1e-13);
        prop_assert!(c.product(w, 0).max_abs_diff(&CMatrix::identity(2)) == 0.0);
    }
}

#[test]
fn cocycle_identity_fibers_give_koopman() {
    let space = SampleSpace::CircleGrid { points: 10 };
    let base = Transformation::Rotation { theta: Turn::Rational { num: 3, den: 10 } };
    let c = Cocycle::new(base.clone(), space.clone(), Fibers::Constant { matrix: CMatrix::identity(2) }).unwrap();
    let skew = LinearOperator::skew(c).unwrap();
    let koop = LinearOperator::koopman(base, space.clone(), 2).unwrap();
    let f = VectorField::random(space, 2, 3);
    for n in [0u64, 1, 7, 23] {
        assert!(close(&skew.apply_power(n, &f).unwrap(), &koop.apply_power(n, &f).unwrap(), 0.0));
    }
}

#[test]
fn asymptotic_class_ratios_tend_to_one() {
    let beta: f64 = 0.5;
    let eps: f64 = 0.25;
    let exprs = [
        WeightExpr::new(1.0, 0.5, beta + 0.5, 0.0),
        WeightExpr::new(1.0, 0.5, beta + 0.5, 1.0),
        WeightExpr::new(1.0, (1.0 + eps) / 2.0, 0.0, 0.0),
        WeightExpr::new(1.0, 0.5, 0.5, 1.0 + eps),
        WeightExpr::new(2.0, 1.0, -1.3, 0.0),
        WeightExpr::new(1.0, 0.0, 1.0, -1.0),
        WeightExpr::new(1.0, 0.25, -0.5, 2.0),
    ];
    for e in &exprs {
        let rs: &[f64] = if e.c() != 0.0 { &[1.0] } else { &[1.0, 1.5, 2.0, 2.5, 3.0] };
        for &r in rs {
            let sched = Schedule::power(r).unwrap();
            let class = asymptotic_class(e, &sched).unwrap();
            let err = |k: u64| {
                let nk = sched.nth(k).unwrap() as f64;
                (e.value_at(nk) / class.value_at(k as f64) - 1.0).abs()
            };
            let (near, far) = (err(1_000), err(1_000_000));
            assert!(far <= near + 1e-12, "{e} r = {r}: {near:e} then {far:e}");
            assert!(far < 1e-2, "{e} r = {r}: ratio error {far:e}");
        }
    }
}

#[test]
fn superexp_class_matches_logarithms() {
    let e = WeightExpr::new(1.0, 0.0, 1.0, 1.0);
    let class = asymptotic_class(&e, &Schedule::Superexp).unwrap();
    assert_eq!(class.exps, [1.0, 2.0, 0.0]);
    assert_eq!(class.superexp, 0.0);
}
