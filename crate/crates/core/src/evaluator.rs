//! Level and branch functions, the two forms of the main sum, and their
//! specializations to charged gases.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Limits;
use crate::domain::{self, ChargeVector, ExponentAssignment};
use crate::error::{Error, Result};
use crate::filtration::{Catalog, FiltrationRecord, SplittingFiltration};
use crate::partition::Block;
use crate::rho::{root_function, RhoSpec};
use crate::scalar::{Field, Scalar};
use crate::symmetry::orbit_representatives;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalOptions {
    /// Evaluate in double precision even at integer exponents.
    pub force_float: bool,
    /// Skip the convergence-region check; the result is then the value of the
    /// finite sum, not of the integral. Implies the float regime.
    pub override_domain: bool,
}

/// A value with, in the float regime, the bound on series truncation error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: Scalar,
    pub tolerance: Option<f64>,
}

impl Evaluation {
    fn exact(value: BigRational) -> Self {
        Evaluation {
            value: Scalar::Exact(value),
            tolerance: None,
        }
    }

    fn float(value: Complex64, tolerance: f64) -> Self {
        Evaluation {
            value: Scalar::Float(value),
            tolerance: Some(tolerance),
        }
    }
}

/// Exponents converted into one arithmetic regime.
struct Exps<T> {
    a: T,
    b: T,
    s: Vec<T>,
}

impl<T: Field> Exps<T> {
    fn from(e: &ExponentAssignment) -> Result<Self> {
        let conv = |x: &Scalar| {
            T::from_scalar(x).ok_or_else(|| Error::domain("value not representable in this regime"))
        };
        Ok(Exps {
            a: conv(e.a())?,
            b: conv(e.b())?,
            s: e.s().iter().map(conv).collect::<Result<_>>()?,
        })
    }

    fn sum_over(&self, idx: &[usize]) -> T {
        idx.iter().fold(T::zero(), |acc, &i| acc + self.s[i].clone())
    }

    fn sum_s(&self) -> T {
        self.s.iter().fold(T::zero(), |acc, x| acc + x.clone())
    }
}

fn exact_regime(e: &ExponentAssignment, rho: Option<&RhoSpec>, opts: EvalOptions) -> bool {
    if opts.force_float || opts.override_domain {
        return false;
    }
    if e.is_exact() && !e.is_integral() {
        log::warn!("non-integer rational exponents: switching to the float regime");
        return false;
    }
    e.is_integral() && rho.is_none_or(|r| r.supports_exact())
}

fn check_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::domain(format!("q = {q} must be at least 2")));
    }
    Ok(())
}

/// `1 / (q^x - 1)`, failing at a pole.
fn recip_q_pow_minus_one<T: Field>(q: u64, x: &T, what: impl FnOnce() -> String) -> Result<T> {
    if x.re_f64() > 0.0 {
        // q^{-x} / (1 - q^{-x}) stays finite for large Re(x).
        let t = T::q_pow(q, &-x.clone())?;
        let d = T::one() - t.clone();
        if d.near_zero() {
            return Err(Error::Pole(what()));
        }
        return Ok(t / d);
    }
    let d = T::q_pow(q, x)? - T::one();
    if d.near_zero() {
        return Err(Error::Pole(what()));
    }
    Ok(T::one() / d)
}

fn prefactor<T: Field>(rec: &FiltrationRecord, q: u64) -> Result<T> {
    let m = T::from_biguint(&rec.multiplicity(q)?);
    Ok(m / T::q_pow(q, &T::from_i64(rec.spl.n() as i64 - 1))?)
}

fn level_fn<T: Field>(rec: &FiltrationRecord, q: u64, x: &Exps<T>) -> Result<T> {
    let mut acc = prefactor::<T>(rec, q)?;
    for (ell, (rank, idx)) in rec.levels.iter().enumerate().skip(1) {
        let e = x.b.clone() + T::from_i64(*rank as i64) + x.sum_over(idx);
        acc = acc * recip_q_pow_minus_one(q, &e, || format!("q^(b + E) = 1 at level {ell} of {}", rec.spl))?;
    }
    Ok(acc)
}

fn branch_fn<T: Field>(rec: &FiltrationRecord, q: u64, x: &Exps<T>) -> Result<T> {
    let mut acc = prefactor::<T>(rec, q)?;
    for (lambda, idx) in &rec.inner_branches {
        let e = T::from_i64(lambda.len() as i64 - 1) + x.sum_over(idx);
        acc = acc * recip_q_pow_minus_one(q, &e, || format!("q^(e) = 1 at branch {lambda} of {}", rec.spl))?;
    }
    Ok(acc)
}

fn positive(records: &[FiltrationRecord], q: u64) -> Result<Vec<&FiltrationRecord>> {
    let mut out = Vec::new();
    for r in records {
        if !r.multiplicity(q)?.is_zero() {
            out.push(r);
        }
    }
    Ok(out)
}

fn level_sum_in<T: Field>(cat: &Catalog, q: u64, x: &Exps<T>) -> Result<T> {
    let terms = positive(&cat.records, q)?
        .par_iter()
        .map(|r| level_fn(r, q, x))
        .collect::<Result<Vec<T>>>()?;
    Ok(T::sum_all(terms))
}

fn branch_sum_in<T: Field>(cat: &Catalog, q: u64, x: &Exps<T>) -> Result<T> {
    let reduced: Vec<FiltrationRecord> = cat.reduced_records().cloned().collect();
    let terms = positive(&reduced, q)?
        .par_iter()
        .map(|r| branch_fn(r, q, x))
        .collect::<Result<Vec<T>>>()?;
    Ok(T::sum_all(terms))
}

fn finish<T: Field>(value: T, tail: f64) -> Evaluation {
    match value.into_scalar() {
        Scalar::Exact(r) => Evaluation::exact(r),
        Scalar::Float(c) => Evaluation::float(c, tail),
    }
}

/// Runs `$body` with `$t` bound to the exact or the float arithmetic type.
macro_rules! in_regime {
    ($exact:expr, $t:ident => $body:expr) => {
        if $exact {
            type $t = BigRational;
            $body
        } else {
            type $t = Complex64;
            $body
        }
    };
}

/// `J_{spl,q}(b, s)`.
pub fn level_function(spl: &SplittingFiltration, q: u64, e: &ExponentAssignment) -> Result<Scalar> {
    check_q(q)?;
    dims(spl.n(), e)?;
    let rec = FiltrationRecord::new(spl.clone(), 0);
    in_regime!(exact_regime(e, None, EvalOptions::default()), T => {
        Ok(level_fn::<T>(&rec, q, &Exps::from(&regime_view(e, T::EXACT))?)?.into_scalar())
    })
}

/// `I_{spl,q}(s)`; only the branch data of `spl` is used.
pub fn branch_function(spl: &SplittingFiltration, q: u64, e: &ExponentAssignment) -> Result<Scalar> {
    check_q(q)?;
    dims(spl.n(), e)?;
    let rec = FiltrationRecord::new(spl.clone(), 0);
    in_regime!(exact_regime(e, None, EvalOptions::default()), T => {
        Ok(branch_fn::<T>(&rec, q, &Exps::from(&regime_view(e, T::EXACT))?)?.into_scalar())
    })
}

fn regime_view(e: &ExponentAssignment, exact: bool) -> ExponentAssignment {
    if exact {
        e.clone()
    } else {
        e.to_float()
    }
}

fn dims(n: usize, e: &ExponentAssignment) -> Result<()> {
    if e.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: e.n(),
        });
    }
    Ok(())
}

/// `sum over M > 0 of J_{spl,q}(b, s)`.
pub fn level_sum(n: usize, q: u64, e: &ExponentAssignment, opts: EvalOptions, limits: &Limits) -> Result<Scalar> {
    check_q(q)?;
    dims(n, e)?;
    let cat = Catalog::get(n, limits)?;
    in_regime!(exact_regime(e, None, opts), T => {
        Ok(level_sum_in::<T>(&cat, q, &Exps::from(&regime_view(e, T::EXACT))?)?.into_scalar())
    })
}

/// `sum over reduced M > 0 of I_{spl*,q}(s)`.
pub fn branch_sum(n: usize, q: u64, e: &ExponentAssignment, opts: EvalOptions, limits: &Limits) -> Result<Scalar> {
    check_q(q)?;
    dims(n, e)?;
    let cat = Catalog::get(n, limits)?;
    in_regime!(exact_regime(e, None, opts), T => {
        Ok(branch_sum_in::<T>(&cat, q, &Exps::from(&regime_view(e, T::EXACT))?)?.into_scalar())
    })
}

/// The integral over `K^n` via the level-function form.
pub fn z_full(
    n: usize,
    q: u64,
    e: &ExponentAssignment,
    rho: &RhoSpec,
    opts: EvalOptions,
    limits: &Limits,
) -> Result<Evaluation> {
    check_q(q)?;
    dims(n, e)?;
    if !opts.override_domain {
        domain::in_omega(n, q, e, limits)?.into_result()?;
    }
    let cat = Catalog::get(n, limits)?;
    in_regime!(exact_regime(e, Some(rho), opts), T => {
        let x = Exps::<T>::from(&regime_view(e, T::EXACT))?;
        let z = T::from_i64(n as i64) + x.a.clone() + x.b.clone() + x.sum_s();
        let h = root_function(q, &z, rho, limits.series_tolerance)?;
        let sum = level_sum_in(&cat, q, &x)?;
        let tail = h.tail_bound * sum.clone().into_scalar().to_complex().norm();
        Ok(finish(h.value * sum, tail))
    })
}

/// The integral over `K^n` at `b = 0` via the branch-function form.
pub fn z_reduced(
    n: usize,
    q: u64,
    e: &ExponentAssignment,
    rho: &RhoSpec,
    opts: EvalOptions,
    limits: &Limits,
) -> Result<Evaluation> {
    check_q(q)?;
    dims(n, e)?;
    if !e.b().is_zero() {
        return Err(Error::domain("the branch-function form needs b = 0"));
    }
    if !opts.override_domain {
        domain::in_reduced_region(n, q, e, limits)?.into_result()?;
    }
    let cat = Catalog::get(n, limits)?;
    in_regime!(exact_regime(e, Some(rho), opts), T => {
        let x = Exps::<T>::from(&regime_view(e, T::EXACT))?;
        let z = T::from_i64(n as i64) + x.a.clone() + x.sum_s();
        let h = root_function(q, &z, rho, limits.series_tolerance)?;
        let sum = branch_sum_in(&cat, q, &x)?;
        let tail = h.tail_bound * sum.clone().into_scalar().to_complex().norm();
        Ok(finish(h.value * sum, tail))
    })
}

/// The integral over `R^n`, the unit-ball case of [`z_full`].
pub fn z_restricted(n: usize, q: u64, e: &ExponentAssignment, opts: EvalOptions, limits: &Limits) -> Result<Evaluation> {
    z_full(n, q, e, &RhoSpec::BallIndicator { m: 0 }, opts, limits)
}

/// Two points, written out directly.
pub fn closed_form_n2(q: u64, e: &ExponentAssignment, rho: &RhoSpec, opts: EvalOptions, limits: &Limits) -> Result<Evaluation> {
    check_q(q)?;
    dims(2, e)?;
    let root = e.a().clone() + e.b().clone() + e.s()[0].clone() + Scalar::int(1);
    if !root.re_positive() && !opts.override_domain {
        return Err(Error::Divergence(format!("needs Re(1 + a + b + s_1_2) > 0, got {}", root.re_f64())));
    }
    in_regime!(exact_regime(e, Some(rho), opts), T => {
        let x = Exps::<T>::from(&regime_view(e, T::EXACT))?;
        let qt = T::from_i64(q as i64);
        let z = T::from_i64(2) + x.a.clone() + x.b.clone() + x.s[0].clone();
        let h = root_function(q, &z, rho, limits.series_tolerance)?;
        let c = (qt.clone() - T::one()) / qt;
        let tail = h.tail_bound * c.clone().into_scalar().to_complex().norm();
        Ok(finish(c * h.value, tail))
    })
}

/// Three points, written out directly.
pub fn closed_form_n3(q: u64, e: &ExponentAssignment, rho: &RhoSpec, opts: EvalOptions, limits: &Limits) -> Result<Evaluation> {
    check_q(q)?;
    dims(3, e)?;
    if !opts.override_domain {
        let root = Scalar::int(2) + e.a().clone() + e.b().clone() + e.sum_s();
        if !root.re_positive() {
            return Err(Error::Divergence("needs Re(2 + a + b + sum s) > 0".into()));
        }
        for (k, s) in e.s().iter().enumerate() {
            if !(Scalar::int(1) + e.b().clone() + s.clone()).re_positive() {
                return Err(Error::Divergence(format!("needs Re(1 + b + s) > 0 for pair {}", k + 1)));
            }
        }
    }
    in_regime!(exact_regime(e, Some(rho), opts), T => {
        let x = Exps::<T>::from(&regime_view(e, T::EXACT))?;
        let qt = T::from_i64(q as i64);
        let q1 = qt.clone() - T::one();
        let z = T::from_i64(3) + x.a.clone() + x.b.clone() + x.sum_s();
        let h = root_function(q, &z, rho, limits.series_tolerance)?;
        let mut pairs = T::zero();
        for s in &x.s {
            let ex = T::one() + x.b.clone() + s.clone();
            pairs = pairs + recip_q_pow_minus_one(q, &ex, || "q^(1 + b + s) = 1".to_string())?;
        }
        let inner = q1.clone() * (q1.clone() - T::one()) + q1.clone() * q1 * pairs;
        let sum = inner / (qt.clone() * qt);
        let tail = h.tail_bound * sum.clone().into_scalar().to_complex().norm();
        Ok(finish(h.value * sum, tail))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MehtaResult {
    pub value: Evaluation,
    /// Weighted sum over orbit representatives, for unit charges.
    pub orbit_form: Option<Evaluation>,
    pub threshold: domain::Threshold,
}

fn unit_charges(cv: &ChargeVector) -> bool {
    cv.charges.iter().all(|c| c.is_one())
}

/// The gas partition function at inverse temperature `beta`.
pub fn mehta_partition(
    n: usize,
    q: u64,
    cv: &ChargeVector,
    rho: &RhoSpec,
    opts: EvalOptions,
    limits: &Limits,
) -> Result<MehtaResult> {
    check_q(q)?;
    let zero = Scalar::zero();
    let threshold = domain::beta_threshold(n, q, cv, &zero, &zero, true, limits)?;
    let above = cv.beta.clone() - Scalar::Exact(threshold.value.clone());
    if !above.re_positive() && !opts.override_domain {
        return Err(Error::Convergence(Box::new(threshold.source)));
    }
    let e = cv.exponents(zero.clone(), zero)?;
    let value = z_reduced(n, q, &e, rho, opts, limits)?;
    let orbit_form = if unit_charges(cv) {
        Some(mehta_orbit_form(n, q, &e, &cv.beta, rho, opts, limits)?)
    } else {
        None
    };
    Ok(MehtaResult {
        value,
        orbit_form,
        threshold,
    })
}

/// Unit charges: each orbit contributes `W M / q^{n-1}` times a product over
/// non-top branches depending only on branch sizes.
fn mehta_orbit_form(
    n: usize,
    q: u64,
    e: &ExponentAssignment,
    beta: &Scalar,
    rho: &RhoSpec,
    opts: EvalOptions,
    limits: &Limits,
) -> Result<Evaluation> {
    let reps = orbit_representatives(n, true, limits)?;
    let binom = |k: usize| (k * (k - 1) / 2) as i64;
    in_regime!(exact_regime(e, Some(rho), opts), T => {
        let bt = T::from_scalar(&if T::EXACT { beta.clone() } else { beta.to_float() })
            .ok_or_else(|| Error::domain("beta not representable"))?;
        let top = Block::full(n);
        let mut terms = Vec::new();
        for (rep, w) in &reps {
            let stats = rep.stats();
            let m = stats.multiplicity(q)?;
            if m.is_zero() {
                continue;
            }
            let mut t = T::from_biguint(&(m * w)) / T::q_pow(q, &T::from_i64(n as i64 - 1))?;
            for info in stats.branches.iter().filter(|i| i.block != top) {
                let k = info.block.len();
                let ex = T::from_i64(binom(k)) * bt.clone() + T::from_i64(k as i64 - 1);
                t = t * recip_q_pow_minus_one(q, &ex, || format!("pole at branch size {k}"))?;
            }
            terms.push(t);
        }
        let z = T::from_i64(n as i64) + T::from_i64(binom(n)) * bt;
        let h = root_function(q, &z, rho, limits.series_tolerance)?;
        let sum = T::sum_all(terms);
        let tail = h.tail_bound * sum.clone().into_scalar().to_complex().norm();
        Ok(finish(h.value * sum, tail))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub value: Scalar,
    /// Ratio of root functions, available when `b = 0`.
    pub root_ratio: Option<Scalar>,
}

/// `E[max^a min^b]` for the gas with density `rho`.
#[allow(clippy::too_many_arguments)]
pub fn expectation(
    n: usize,
    q: u64,
    cv: &ChargeVector,
    a: &Scalar,
    b: &Scalar,
    rho: &RhoSpec,
    opts: EvalOptions,
    limits: &Limits,
) -> Result<ExpectationResult> {
    check_q(q)?;
    if !rho.is_probability_density() {
        return Err(Error::domain("density must be nonnegative and not identically zero"));
    }
    if !(cv.beta.is_real() && cv.beta.re_positive()) {
        return Err(Error::domain("beta must be real and positive"));
    }
    let re = |x: &Scalar| x.re_exact().ok_or_else(|| Error::domain("non-finite exponent"));
    let (ra, rb) = (re(a)?, re(b)?);
    if rb < BigRational::from_integer((-1).into()) {
        return Err(Error::domain("needs Re(b) >= -1"));
    }
    if &ra + &rb < BigRational::from_integer(BigInt::from(1 - n as i64)) {
        return Err(Error::domain(format!("needs Re(a + b) >= {}", 1 - n as i64)));
    }
    let ea = cv.exponents(a.clone(), b.clone())?;
    let e0 = cv.exponents(Scalar::zero(), Scalar::zero())?;
    if !opts.override_domain {
        domain::in_omega(n, q, &ea, limits)?.into_result()?;
        domain::in_omega(n, q, &e0, limits)?.into_result()?;
    }
    let cat = Catalog::get(n, limits)?;
    // Ratio of root functions times ratio of level sums; neither side is
    // formed on its own, which keeps large charges within double range.
    let exact = exact_regime(&ea, Some(rho), opts) && exact_regime(&e0, Some(rho), opts);
    let (value, hr) = in_regime!(exact, T => {
        let xa = Exps::<T>::from(&regime_view(&ea, T::EXACT))?;
        let x0 = Exps::<T>::from(&regime_view(&e0, T::EXACT))?;
        let base = T::from_i64(n as i64) + x0.sum_s();
        let za = base.clone() + xa.a.clone() + xa.b.clone();
        let hr = root_ratio(q, &za, &base, rho, limits.series_tolerance)?;
        let ls = level_sum_in(&cat, q, &xa)? / level_sum_in(&cat, q, &x0)?;
        ((hr.clone() * ls).into_scalar(), hr.into_scalar())
    });
    let root_ratio = b.is_zero().then_some(hr);
    Ok(ExpectationResult { value, root_ratio })
}

/// `H(z1) / H(z0)`, in closed form for ball indicators.
fn root_ratio<T: Field>(q: u64, z1: &T, z0: &T, rho: &RhoSpec, tol: f64) -> Result<T> {
    if let RhoSpec::BallIndicator { m } = rho {
        root_function(q, z1, rho, tol)?;
        root_function(q, z0, &RhoSpec::BallIndicator { m: 0 }, tol)?;
        let shift = T::q_pow(q, &(T::from_i64(*m) * (z1.clone() - z0.clone())))?;
        let d1 = T::one() - T::q_pow(q, &(T::one() - z1.clone()))?;
        let d0 = T::one() - T::q_pow(q, &(T::one() - z0.clone()))?;
        return Ok(shift * d0 / d1);
    }
    let h1 = root_function(q, z1, rho, tol)?;
    let h0 = root_function(q, z0, rho, tol)?;
    Ok(h1.value / h0.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowTempResult {
    pub value: Scalar,
    /// Least total level weight among filtrations with positive multiplicity.
    #[serde(serialize_with = "ser_ratio")]
    pub q_min: BigRational,
    pub minimizers: Vec<SplittingFiltration>,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::scalar::ratio_text(r))
}

/// Limit of `E[max^a min^b]` as `beta -> infinity`.
pub fn low_temp_limit(
    n: usize,
    q: u64,
    cv: &ChargeVector,
    a: &Scalar,
    b: &Scalar,
    rho: &RhoSpec,
    limits: &Limits,
) -> Result<LowTempResult> {
    check_q(q)?;
    if cv.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: cv.n(),
        });
    }
    let m = rho.max_support_index().ok_or_else(|| {
        Error::Unsupported(format!("density {rho} is not compactly supported; no limit is available"))
    })?;
    let cat = Catalog::get(n, limits)?;
    let mut scored = Vec::new();
    for rec in &cat.records {
        let mult = rec.multiplicity(q)?;
        if mult.is_zero() {
            continue;
        }
        let weight = rec.levels[1..]
            .iter()
            .map(|_| ())
            .zip(1..)
            .fold(BigRational::zero(), |acc, (_, ell)| {
                acc + rec
                    .spl
                    .level(ell)
                    .branches()
                    .fold(BigRational::zero(), |w, br| w + cv.eps(br))
            });
        scored.push((weight, rec, mult));
    }
    let q_min = scored
        .iter()
        .map(|(w, _, _)| w.clone())
        .min()
        .expect("some filtration has positive multiplicity");
    let best: Vec<_> = scored.into_iter().filter(|(w, _, _)| *w == q_min).collect();
    let exact = a.is_integer() && b.is_integer();
    let value = in_regime!(exact, T => {
        let conv = |s: &Scalar| T::from_scalar(&if T::EXACT { s.clone() } else { s.to_float() })
            .ok_or_else(|| Error::domain("value not representable"));
        let (at, bt) = (conv(a)?, conv(b)?);
        let mut num = Vec::new();
        let mut den = Vec::new();
        for (_, rec, mult) in &best {
            let levels = rec.levels.len() as i64 - 1;
            let ranks: i64 = rec.levels[1..].iter().map(|(r, _)| *r as i64).sum();
            let mt = T::from_biguint(mult);
            let rank_part = T::q_pow(q, &T::from_i64(-ranks))?;
            let b_part = T::q_pow(q, &-(T::from_i64(levels) * bt.clone()))?;
            num.push(mt.clone() * rank_part.clone() * b_part);
            den.push(mt * rank_part);
        }
        let lead = T::q_pow(q, &(T::from_i64(m) * (at + bt)))?;
        (lead * T::sum_all(num) / T::sum_all(den)).into_scalar()
    });
    Ok(LowTempResult {
        value,
        q_min,
        minimizers: best.iter().map(|(_, r, _)| r.spl.clone()).collect(),
    })
}
