//! Cross-check battery: each check recomputes one quantity along two routes.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use padic_gas::domain;
use padic_gas::evaluator::{self, EvalOptions};
use padic_gas::oracle;
use padic_gas::pairs::{branch_to_level, level_to_branch};
use padic_gas::scalar::{format_f64, q_pow_int, ratio_to_f64};
use padic_gas::{BranchPair, Catalog, ExponentAssignment, LevelPair, Limits, Scalar};
use serde::Serialize;
use serde_json::json;

use crate::output::{Output, Table};
use crate::params::{CliError, CliResult, Params};

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

type Outcome = std::result::Result<String, String>;

fn exact(x: &Scalar) -> std::result::Result<BigRational, String> {
    x.as_exact().cloned().ok_or_else(|| format!("{x} is not exact"))
}

/// All tuples in `1..=max` of the given length.
fn tuples(len: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=max).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// A fixed spread of integer vectors with entries in `lo..lo + width`.
fn spread(len: usize, k: usize, lo: i64, width: i64) -> Vec<i64> {
    (0..len)
        .map(|i| lo + ((i * 7 + k * 13 + len) as i64 % width))
        .collect()
}

fn reduction_identity(n: usize, q: u64, limits: &Limits) -> Outcome {
    let cat = Catalog::get(n, limits).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (class, rec) in cat.reduced_records().enumerate() {
        if rec.multiplicity(q).map_err(|e| e.to_string())?.is_zero() {
            continue;
        }
        let points = (0..60)
            .map(|k| ExponentAssignment::from_ints(n, 0, 0, &spread(domain::pair_count(n), k, -2, 6)).unwrap())
            .filter(|e| domain::in_branch_polytope(&rec.spl, e))
            .take(5);
        for e in points {
            let mut lhs = BigRational::zero();
            for r in cat.class_members(class) {
                lhs += exact(&evaluator::level_function(&r.spl, q, &e).map_err(|x| x.to_string())?)?;
            }
            let rhs = exact(&evaluator::branch_function(&rec.spl, q, &e).map_err(|x| x.to_string())?)?;
            if lhs != rhs {
                return Err(format!("{} at s = {:?}: {lhs} != {rhs}", rec.spl, e.s()));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} exact identities"))
}

fn bijection(n: usize, limits: &Limits) -> Outcome {
    let cat = Catalog::get(n, limits).map_err(|e| e.to_string())?;
    let (mut forward, mut reverse) = (0, 0);
    for rec in &cat.records {
        for gaps in tuples(rec.spl.len(), 2) {
            let lp = LevelPair::new(rec.spl.clone(), gaps).map_err(|e| e.to_string())?;
            let back = branch_to_level(&level_to_branch(&lp)).map_err(|e| e.to_string())?;
            if back != lp {
                return Err(format!("level pair {lp:?} came back as {back:?}"));
            }
            forward += 1;
        }
        if rec.reduced {
            let branches = rec.spl.branches();
            for ks in tuples(branches.len(), 2) {
                let k: BTreeMap<_, _> = branches.iter().copied().zip(ks).collect();
                let bp = BranchPair::new(rec.spl.clone(), k).map_err(|e| e.to_string())?;
                let lp = branch_to_level(&bp).map_err(|e| e.to_string())?;
                if level_to_branch(&lp) != bp {
                    return Err(format!("branch pair {bp:?} did not come back"));
                }
                reverse += 1;
            }
        }
    }
    Ok(format!("{forward} level pairs, {reverse} branch pairs"))
}

fn oracle_vs_formula(n: usize, q: u64, limits: &Limits) -> Outcome {
    let depth = oracle::max_depth(n, q, limits).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in 0..4 {
        let s = spread(domain::pair_count(n), k, 0, 3);
        let e = ExponentAssignment::from_ints(n, (k % 3) as i64, ((k + 1) % 3) as i64, &s).unwrap();
        let target = evaluator::z_restricted(n, q, &e, EvalOptions::default(), limits).map_err(|x| x.to_string())?;
        let t = oracle::exact_truncated_integral(&e, q, depth, limits).map_err(|x| x.to_string())?;
        let gap = ratio_to_f64(&(exact(&target.value)? - exact(&t.main)?).abs());
        if gap > t.tail_bound {
            return Err(format!("s = {s:?}: gap {gap:e} exceeds tail bound {:e}", t.tail_bound));
        }
        worst = worst.max(t.tail_bound);
    }
    Ok(format!("depth {depth}, largest tail bound {}", format_f64(worst)))
}

fn measure_sums(n: usize, q: u64, limits: &Limits) -> Outcome {
    let cat = Catalog::get(n, limits).map_err(|e| e.to_string())?;
    let mut total = BigRational::zero();
    for rec in &cat.records {
        let mut term = BigRational::from_integer(BigInt::from(rec.multiplicity(q).map_err(|e| e.to_string())?));
        for &(rank, _) in &rec.levels {
            term /= q_pow_int(q, rank as i64) - BigRational::one();
        }
        total += term;
    }
    if !total.is_one() {
        return Err(format!("total measure {total}"));
    }
    let depth = 3;
    let counts = oracle::coset_counts(n, q, depth, limits).map_err(|e| e.to_string())?;
    let scale = q_pow_int(q, (n * depth) as i64);
    for (lp, got) in &counts {
        let want = oracle::measure_of_level_pair(lp, q).map_err(|e| e.to_string())? * &scale;
        if BigRational::from_integer(BigInt::from(got.clone())) != want {
            return Err(format!("{lp:?}: {got} digit matrices, measure predicts {want}"));
        }
    }
    let resolved: BigUint = counts.values().sum();
    Ok(format!("total measure 1; {} level pairs cover {resolved} matrices at depth {depth}", counts.len()))
}

pub fn verify(p: &mut Params, limits: &Limits) -> CliResult<Output> {
    let n_max = *p.n.get_or_insert(4);
    let q = p.q()?;
    if !(2..=5).contains(&n_max) {
        return Err(CliError::Usage(format!("--n {n_max}: verify covers 2 <= n <= 5")));
    }
    let mut checks = Vec::new();
    let mut run = |name: String, outcome: Outcome| {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        checks.push(Check { name, passed, detail });
    };
    for n in 2..=n_max {
        run(format!("reduction_identity n={n} q={q}"), reduction_identity(n, q, limits));
        run(format!("bijection n={n}"), bijection(n, limits));
        if n <= 3 {
            run(format!("oracle_vs_formula n={n} q={q}"), oracle_vs_formula(n, q, limits));
        }
        if n <= 4 {
            run(format!("measure_sums n={n} q={q}"), measure_sums(n, q, limits));
        }
    }
    let mut table = Table::new(&["check", "passed", "detail"]);
    for c in &checks {
        table.push(vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let out = Output::new(json!({ "passed": failed == 0, "failed": failed, "checks": checks }), table)?;
    Ok(out)
}

/// Number of failed checks in a verify result.
pub fn failures(result: &serde_json::Value) -> usize {
    result["failed"].as_u64().unwrap_or(0) as usize
}
