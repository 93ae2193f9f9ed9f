use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

use padic_gas::domain::{self, pair_index, ChargeVector, ExponentAssignment};
use padic_gas::evaluator::{self, EvalOptions};
use padic_gas::filtration::{Catalog, SplittingFiltration};
use padic_gas::oracle::{self, DigitMatrix};
use padic_gas::pairs::{branch_to_level, level_to_branch, LevelPair};
use padic_gas::scalar::{ratio_to_f64, relative_error, Scalar};
use padic_gas::symmetry::{apply_permutation, Permutation};
use padic_gas::{Limits, RhoSpec};

fn lim() -> Limits {
    Limits::default()
}

fn filtration(n: usize, pick: usize) -> SplittingFiltration {
    let cat = Catalog::get(n, &lim()).unwrap();
    cat.records[pick % cat.records.len()].spl.clone()
}

fn ints(n: usize, a: i64, b: i64, s: &[i64]) -> ExponentAssignment {
    ExponentAssignment::from_ints(n, a, b, s).unwrap()
}

/// `s'_{sigma(i) sigma(j)} = s_{ij}`.
fn permute_s(n: usize, s: &[i64], sigma: &[usize]) -> Vec<i64> {
    let mut out = vec![0; s.len()];
    for i in 1..=n {
        for j in i + 1..=n {
            let (x, y) = (sigma[i - 1].min(sigma[j - 1]), sigma[i - 1].max(sigma[j - 1]));
            out[pair_index(n, x, y)] = s[pair_index(n, i, j)];
        }
    }
    out
}

fn case() -> impl Strategy<Value = (usize, usize, Vec<i64>, Vec<usize>)> {
    (2usize..=5).prop_flat_map(|n| {
        (
            Just(n),
            any::<usize>(),
            proptest::collection::vec(-1i64..=3, n * (n - 1) / 2),
            Just((1..=n).collect::<Vec<usize>>()).prop_shuffle(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functions_are_relabelling_equivariant((n, pick, s, sigma) in case(), q in 2u64..=5, b in 0i64..=2) {
        let spl = filtration(n, pick);
        let perm = Permutation::new(sigma.clone()).unwrap();
        let moved = apply_permutation(&spl, &perm).unwrap();
        let e = ints(n, 0, b, &s);
        let e2 = ints(n, 0, b, &permute_s(n, &s, &sigma));
        let lhs = evaluator::level_function(&spl, q, &e);
        let rhs = evaluator::level_function(&moved, q, &e2);
        match (lhs, rhs) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
        prop_assert_eq!(moved.multiplicity(q).unwrap(), spl.multiplicity(q).unwrap());
        prop_assert_eq!(apply_permutation(&spl.reduce(), &perm).unwrap(), moved.reduce());
    }

    #[test]
    fn reduction_laws(n in 2usize..=6, pick in any::<usize>()) {
        let spl = filtration(n, pick);
        let r = spl.reduce();
        prop_assert!(r.is_reduced());
        prop_assert_eq!(r.reduce(), r.clone());
        prop_assert_eq!(r.branches(), spl.branches());
        prop_assert!(r.len() <= spl.len());
        if spl.is_reduced() {
            prop_assert_eq!(r, spl);
        }
    }

    #[test]
    fn level_exponent_is_sum_of_branch_exponents((n, pick, s, _sigma) in case()) {
        let spl = filtration(n, pick);
        let e = ints(n, 0, 0, &s);
        for ell in 0..spl.len() {
            let total = spl
                .level(ell)
                .branches()
                .map(|b| domain::branch_exponent(b, &e).unwrap())
                .fold(Scalar::zero(), |acc, x| acc + x);
            prop_assert_eq!(domain::level_exponent(&spl, ell, &e).unwrap(), total);
        }
    }

    #[test]
    fn branch_polytope_inside_level_polytope((n, pick, s, _sigma) in case()) {
        let spl = filtration(n, pick);
        let e = ints(n, 0, 0, &s);
        if domain::in_branch_polytope(&spl, &e) {
            prop_assert!(domain::in_level_polytope(&spl, &e));
        }
    }

    #[test]
    fn float_regime_tracks_exact((n, _pick, s, _sigma) in case(), q in 2u64..=5, a in -1i64..=2, m in -1i64..=1) {
        let e = ints(n, a, 0, &s);
        prop_assume!(domain::in_omega(n, q, &e, &lim()).unwrap().member);
        let rho = RhoSpec::BallIndicator { m };
        let ex = evaluator::z_full(n, q, &e, &rho, EvalOptions::default(), &lim()).unwrap();
        let fl = evaluator::z_full(n, q, &e, &rho, EvalOptions { force_float: true, ..Default::default() }, &lim()).unwrap();
        prop_assert!(relative_error(&ex.value, &fl.value) < 1e-12);
    }

    #[test]
    fn both_forms_agree((n, _pick, s, _sigma) in case(), q in 2u64..=5, a in -1i64..=2) {
        let e = ints(n, a, 0, &s);
        prop_assume!(domain::in_reduced_region(n, q, &e, &lim()).unwrap().member);
        let rho = RhoSpec::BallIndicator { m: 0 };
        let full = evaluator::z_full(n, q, &e, &rho, EvalOptions::default(), &lim()).unwrap();
        let red = evaluator::z_reduced(n, q, &e, &rho, EvalOptions::default(), &lim()).unwrap();
        prop_assert_eq!(full.value, red.value);
    }

    #[test]
    fn charge_rescaling(charges in proptest::collection::vec(1i64..=4, 2..=5), num in 1i64..=5, den in 1i64..=5, q in 2u64..=5) {
        let n = charges.len();
        let cv = ChargeVector::new(
            charges.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
            Scalar::ratio(3, 2),
        ).unwrap();
        let t = BigRational::new(num.into(), den.into());
        let scaled = cv.rescaled(&t).unwrap();
        let z = Scalar::zero();
        prop_assert_eq!(
            cv.exponents(z.clone(), z.clone()).unwrap(),
            scaled.exponents(z.clone(), z.clone()).unwrap()
        );
        let t1 = domain::beta_threshold(n, q, &cv, &z, &z, true, &lim()).unwrap().value;
        let t2 = domain::beta_threshold(n, q, &scaled, &z, &z, true, &lim()).unwrap().value;
        prop_assert_eq!(t2, t1 / (&t * &t));
    }

    #[test]
    fn threshold_separates_region(charges in proptest::collection::vec(1i64..=3, 2..=5), q in 2u64..=5, num in -12i64..=12, den in 1i64..=6) {
        let n = charges.len();
        let cv = ChargeVector::new(
            charges.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
            Scalar::int(1),
        ).unwrap();
        let z = Scalar::zero();
        let thr = domain::beta_threshold(n, q, &cv, &z, &z, true, &lim()).unwrap();
        let beta = BigRational::new(num.into(), den.into());
        let e = cv.with_beta(Scalar::Exact(beta.clone())).exponents(z.clone(), z).unwrap();
        let inside = domain::in_reduced_region(n, q, &e, &lim()).unwrap().member;
        prop_assert_eq!(inside, beta > thr.value);
    }

    #[test]
    fn bijection_round_trip(n in 2usize..=6, pick in any::<usize>(), gaps in proptest::collection::vec(1u64..=9, 6)) {
        let spl = filtration(n, pick);
        let lp = LevelPair::new(spl.clone(), gaps[..spl.len()].to_vec()).unwrap();
        let bp = level_to_branch(&lp);
        prop_assert_eq!(&bp.chain, &spl.reduce());
        prop_assert_eq!(branch_to_level(&bp).unwrap(), lp.clone());
        let text = serde_json::to_string(&bp).unwrap();
        prop_assert_eq!(serde_json::from_str::<padic_gas::BranchPair>(&text).unwrap(), bp);
        let text = serde_json::to_string(&lp).unwrap();
        prop_assert_eq!(serde_json::from_str::<LevelPair>(&text).unwrap(), lp);
    }

    #[test]
    fn oracle_level_pairs_follow_rows(
        q in 2u64..=4,
        rows in proptest::collection::vec(proptest::collection::vec(0u8..4, 6), 2..=5),
        sigma_seed in any::<u64>(),
        tail in proptest::collection::vec(0u8..4, 3),
    ) {
        let rows: Vec<Vec<u8>> = rows.into_iter().map(|r| r.into_iter().map(|d| d % q as u8).collect()).collect();
        let n = rows.len();
        let dm = DigitMatrix::new(q, rows).unwrap();
        let Ok(lp) = oracle::assign_level_pair(&dm) else { return Ok(()); };
        let mut sigma: Vec<usize> = (1..=n).collect();
        let mut x = sigma_seed;
        for i in (1..n).rev() {
            sigma.swap(i, (x % (i as u64 + 1)) as usize);
            x /= i as u64 + 1;
        }
        let zero_based: Vec<usize> = sigma.iter().map(|s| s - 1).collect();
        let moved = oracle::assign_level_pair(&dm.permuted(&zero_based).unwrap()).unwrap();
        let perm = Permutation::new(sigma).unwrap();
        prop_assert_eq!(moved.chain, apply_permutation(&lp.chain, &perm).unwrap());
        prop_assert_eq!(&moved.n, &lp.n);
        let extra: Vec<Vec<u8>> = (0..n).map(|i| tail.iter().map(|d| (d + i as u8) % q as u8).collect()).collect();
        prop_assert_eq!(oracle::assign_level_pair(&dm.extended(&extra).unwrap()).unwrap(), lp);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn oracle_increases_with_depth_and_brackets_target(n in 2usize..=3, q in 2u64..=3, a in 0i64..=2, b in 0i64..=2, s in proptest::collection::vec(0i64..=2, 3)) {
        let e = ints(n, a, b, &s[..n * (n - 1) / 2]);
        let target = evaluator::z_restricted(n, q, &e, EvalOptions::default(), &lim()).unwrap().value;
        let target = target.as_exact().unwrap().clone();
        let mut prev: Option<BigRational> = None;
        for depth in 1..=5 {
            let t = oracle::exact_truncated_integral(&e, q, depth, &lim()).unwrap();
            let main = t.main.as_exact().unwrap().clone();
            prop_assert!(ratio_to_f64(&(&target - &main).abs()) <= t.tail_bound);
            if let Some(p) = prev {
                prop_assert!(main >= p);
            }
            prev = Some(main);
        }
    }
}
