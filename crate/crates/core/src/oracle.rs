//! Brute-force integration over `R^n` from base-`q` digit matrices.
//!
//! Nothing here builds field elements. Distances are read off positionally:
//! `v(x_i - x_j)` is the first column where rows `i` and `j` differ.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::domain::{self, pair_count, pair_index, ExponentAssignment};
use crate::error::{Error, Result};
use crate::filtration::SplittingFiltration;
use crate::pairs::LevelPair;
use crate::partition::{Block, Partition};
use crate::scalar::{q_pow_int, ratio_to_f64, Field, Scalar};

/// Valuation entry meaning "rows agree through the whole depth".
pub const SATURATED: u8 = u8::MAX;

const MAX_DEPTH: usize = 250;

/// `n` rows of `depth` base-`q` digits: a point of `(R / P^depth)^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDigitMatrix")]
pub struct DigitMatrix {
    q: u64,
    depth: usize,
    rows: Vec<Vec<u8>>,
}

#[derive(Deserialize)]
struct RawDigitMatrix {
    q: u64,
    depth: usize,
    rows: Vec<Vec<u8>>,
}

impl TryFrom<RawDigitMatrix> for DigitMatrix {
    type Error = Error;
    fn try_from(raw: RawDigitMatrix) -> Result<Self> {
        if raw.rows.iter().any(|r| r.len() != raw.depth) {
            return Err(Error::domain("every row needs exactly `depth` digits"));
        }
        DigitMatrix::new(raw.q, raw.rows)
    }
}

impl DigitMatrix {
    pub fn new(q: u64, rows: Vec<Vec<u8>>) -> Result<DigitMatrix> {
        if !(2..=255).contains(&q) {
            return Err(Error::domain(format!("q = {q} outside 2..=255")));
        }
        let depth = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || depth == 0 {
            return Err(Error::domain("digit matrix needs at least one row and one column"));
        }
        if depth > MAX_DEPTH {
            return Err(Error::domain(format!("depth {depth} exceeds {MAX_DEPTH}")));
        }
        if rows.iter().any(|r| r.len() != depth) {
            return Err(Error::domain("rows have different lengths"));
        }
        if rows.iter().flatten().any(|&d| d as u64 >= q) {
            return Err(Error::domain(format!("digit outside 0..{q}")));
        }
        Ok(DigitMatrix { q, depth, rows })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// Appends columns of digits to every row.
    pub fn extended(&self, extra: &[Vec<u8>]) -> Result<DigitMatrix> {
        if extra.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                found: extra.len(),
            });
        }
        let rows = self
            .rows
            .iter()
            .zip(extra)
            .map(|(r, e)| r.iter().chain(e).copied().collect())
            .collect();
        DigitMatrix::new(self.q, rows)
    }

    /// Rows reordered so that new row `sigma[i]` is old row `i`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<DigitMatrix> {
        let mut rows = vec![Vec::new(); self.n()];
        for (i, &t) in sigma.iter().enumerate() {
            rows[t] = self.rows[i].clone();
        }
        DigitMatrix::new(self.q, rows)
    }

    /// One line per row: row index (1-based), then the digits.
    pub fn csv_records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                std::iter::once((i + 1).to_string())
                    .chain(r.iter().map(|d| d.to_string()))
                    .collect()
            })
            .collect()
    }

    pub fn random(q: u64, n: usize, depth: usize, rng: &mut impl Rng) -> Result<DigitMatrix> {
        let rows = (0..n)
            .map(|_| (0..depth).map(|_| rng.random_range(0..q) as u8).collect())
            .collect();
        DigitMatrix::new(q, rows)
    }
}

/// Pair index for 0-based rows `i < j`.
fn pidx(n: usize, i: usize, j: usize) -> usize {
    pair_index(n, i + 1, j + 1)
}

/// Pairwise valuations in pair-index order; [`SATURATED`] where two rows
/// agree in every column.
pub fn valuation_matrix(dm: &DigitMatrix) -> Vec<u8> {
    let n = dm.n();
    let mut out = vec![SATURATED; pair_count(n)];
    for i in 0..n {
        for j in i + 1..n {
            if let Some(t) = dm.rows[i].iter().zip(&dm.rows[j]).position(|(x, y)| x != y) {
                out[pidx(n, i, j)] = t as u8;
            }
        }
    }
    out
}

/// Level pair of a point from its pairwise valuations.
pub fn level_pair_from_valuations(n: usize, vals: &[u8], depth: usize) -> Result<LevelPair> {
    if vals.contains(&SATURATED) {
        return Err(Error::Saturated {
            depth,
            detail: "two coordinates agree in every digit".into(),
        });
    }
    let mut marks: Vec<u8> = vals.to_vec();
    marks.sort_unstable();
    marks.dedup();
    let mut chain = Vec::with_capacity(marks.len() + 1);
    for &m in &marks {
        chain.push(classes_at(n, vals, m));
    }
    chain.push(Partition::bottom(n));
    let mut gaps = Vec::with_capacity(marks.len());
    let mut prev = -1i64;
    for &m in &marks {
        gaps.push((m as i64 - prev) as u64);
        prev = m as i64;
    }
    LevelPair::new(SplittingFiltration::new(chain)?, gaps)
}

/// Classes of `i ~ j` iff `v(x_i - x_j) >= m`.
fn classes_at(n: usize, vals: &[u8], m: u8) -> Partition {
    let mut blocks: Vec<Block> = Vec::new();
    'rows: for i in 0..n {
        for b in blocks.iter_mut() {
            let j = b.first() - 1;
            if vals[pidx(n, j, i)] >= m {
                b.0 |= 1 << i;
                continue 'rows;
            }
        }
        blocks.push(Block::singleton(i + 1));
    }
    Partition::new(n, blocks).expect("classes of an equivalence relation")
}

/// The level pair `(spl, n)` with `x` in `T(spl, n)`.
pub fn assign_level_pair(dm: &DigitMatrix) -> Result<LevelPair> {
    level_pair_from_valuations(dm.n(), &valuation_matrix(dm), dm.depth())
}

/// `M_{spl,q} * prod_l q^{-rank(ptn_l) n_l}`.
pub fn measure_of_level_pair(lp: &LevelPair, q: u64) -> Result<BigRational> {
    let m = lp.chain.multiplicity(q)?;
    let mut e = 0i64;
    for (ell, &g) in lp.n.iter().enumerate() {
        e -= lp.chain.level(ell).rank() as i64 * g as i64;
    }
    Ok(BigRational::from_integer(m.into()) * q_pow_int(q, e))
}

/// Count of digit matrices per valuation pattern.
pub type Histogram = BTreeMap<Vec<u8>, BigUint>;

fn budget_check(n: usize, q: u64, depth: usize, limits: &Limits) -> Result<()> {
    if n < 2 {
        return Err(Error::domain("the oracle needs n >= 2"));
    }
    if !(2..=255).contains(&q) {
        return Err(Error::domain(format!("q = {q} outside 2..=255")));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::domain(format!("depth must lie in 1..={MAX_DEPTH}")));
    }
    let bits = ((n - 1) * depth) as f64 * (q as f64).log2();
    if bits > limits.enumeration_budget_bits as f64 + 1e-9 {
        return Err(Error::SizeLimit {
            what: "oracle enumeration bits",
            requested: bits.ceil() as u64,
            bound: limits.enumeration_budget_bits as u64,
        });
    }
    Ok(())
}

/// Largest depth whose enumeration fits the budget.
pub fn max_depth(n: usize, q: u64, limits: &Limits) -> Result<usize> {
    let mut d = 0;
    while d < MAX_DEPTH && budget_check(n, q, d + 1, limits).is_ok() {
        d += 1;
    }
    if d == 0 {
        budget_check(n, q, 1, limits)?;
    }
    Ok(d)
}

struct Walk {
    n: usize,
    q: u64,
    depth: usize,
    pinned: bool,
    hist: BTreeMap<Vec<u8>, u128>,
}

impl Walk {
    /// Rows whose digits are still enumerated: those sharing all digits so
    /// far with another row. Every other row is free and only multiplies the
    /// count by `q` per column (by 1 for the pinned row).
    fn visit(&mut self, col: usize, groups: &[Vec<usize>], vals: &mut Vec<u8>, weight: u128) {
        let free_rows = |groups: &[Vec<usize>]| {
            let grouped: Vec<usize> = groups.iter().flatten().copied().collect();
            (0..self.n)
                .filter(|i| !grouped.contains(i) && !(self.pinned && *i == 0))
                .count() as u32
        };
        if groups.is_empty() {
            let w = weight * (self.q as u128).pow(free_rows(groups) * (self.depth - col) as u32);
            *self.hist.entry(vals.clone()).or_default() += w;
            return;
        }
        if col == self.depth {
            *self.hist.entry(vals.clone()).or_default() += weight;
            return;
        }
        let w = weight * (self.q as u128).pow(free_rows(groups));
        let choosers: Vec<usize> = groups
            .iter()
            .flatten()
            .copied()
            .filter(|&i| !(self.pinned && i == 0))
            .collect();
        let combos = (self.q as usize).pow(choosers.len() as u32);
        for code in 0..combos {
            self.step(col, groups, &choosers, code, vals, w);
        }
    }

    fn step(&mut self, col: usize, groups: &[Vec<usize>], choosers: &[usize], code: usize, vals: &mut Vec<u8>, w: u128) {
        let mut digit = vec![0u8; self.n];
        let mut c = code;
        for &i in choosers {
            digit[i] = (c % self.q as usize) as u8;
            c /= self.q as usize;
        }
        let mut touched = Vec::new();
        let mut next = Vec::new();
        for g in groups {
            let mut sub: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
            for &i in g {
                sub.entry(digit[i]).or_default().push(i);
            }
            for (x, &i) in g.iter().enumerate() {
                for &j in &g[x + 1..] {
                    if digit[i] != digit[j] {
                        let k = pidx(self.n, i.min(j), i.max(j));
                        vals[k] = col as u8;
                        touched.push(k);
                    }
                }
            }
            next.extend(sub.into_values().filter(|s| s.len() > 1));
        }
        self.visit(col + 1, &next, vals, w);
        for k in touched {
            vals[k] = SATURATED;
        }
    }
}

/// Histogram of valuation patterns over all `q^{n depth}` digit matrices.
///
/// With `pinned`, row 1 is held at zero and counts are scaled by `q^depth`;
/// translating every row by the same vector preserves all valuations, so the
/// two modes agree. The first column is split across workers.
pub fn coset_histogram(n: usize, q: u64, depth: usize, pinned: bool, limits: &Limits) -> Result<Histogram> {
    budget_check(n, q, depth, limits)?;
    if (n * depth) as f64 * (q as f64).log2() > 120.0 {
        return Err(Error::SizeLimit {
            what: "oracle count bits",
            requested: ((n * depth) as f64 * (q as f64).log2()).ceil() as u64,
            bound: 120,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let choosers: Vec<usize> = all.iter().copied().filter(|&i| !(pinned && i == 0)).collect();
    let combos = (q as usize).pow(choosers.len() as u32);
    let parts: Vec<BTreeMap<Vec<u8>, u128>> = (0..combos)
        .into_par_iter()
        .map(|code| {
            let mut walk = Walk {
                n,
                q,
                depth,
                pinned,
                hist: BTreeMap::new(),
            };
            let mut vals = vec![SATURATED; pair_count(n)];
            walk.step(0, std::slice::from_ref(&all), &choosers, code, &mut vals, 1);
            walk.hist
        })
        .collect();
    let scale = if pinned {
        BigUint::from(q).pow(depth as u32)
    } else {
        BigUint::from(1u32)
    };
    let mut out = Histogram::new();
    for part in parts {
        for (k, c) in part {
            *out.entry(k).or_default() += BigUint::from(c) * &scale;
        }
    }
    Ok(out)
}

/// Number of digit matrices at `depth` lying in each resolved level pair.
pub fn coset_counts(n: usize, q: u64, depth: usize, limits: &Limits) -> Result<BTreeMap<LevelPair, BigUint>> {
    let hist = coset_histogram(n, q, depth, true, limits)?;
    let mut out = BTreeMap::new();
    for (vals, c) in hist {
        if vals.contains(&SATURATED) {
            continue;
        }
        let lp = level_pair_from_valuations(n, &vals, depth)?;
        *out.entry(lp).or_insert_with(BigUint::zero) += c;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedResult {
    pub main: Scalar,
    pub tail_bound: f64,
    pub depth: usize,
}

/// Integrand exponent `a min v + b max v + sum s v` on an unsaturated coset.
fn log_integrand<T: Field>(vals: &[u8], a: &T, b: &T, s: &[T]) -> T {
    let lo = *vals.iter().min().unwrap() as i64;
    let hi = *vals.iter().max().unwrap() as i64;
    let mut e = a.clone() * T::from_i64(lo) + b.clone() * T::from_i64(hi);
    for (v, sk) in vals.iter().zip(s) {
        e = e + sk.clone() * T::from_i64(*v as i64);
    }
    e
}

fn main_part<T: Field>(hist: &Histogram, n: usize, q: u64, depth: usize, e: &ExponentAssignment) -> Result<T> {
    let conv = |x: &Scalar| T::from_scalar(x).ok_or_else(|| Error::domain("value not representable"));
    let a = conv(e.a())?;
    let b = conv(e.b())?;
    let s = e.s().iter().map(conv).collect::<Result<Vec<T>>>()?;
    let total = T::q_pow(q, &T::from_i64((n * depth) as i64))?;
    let mut terms = Vec::new();
    for (vals, c) in hist {
        if vals.contains(&SATURATED) {
            continue;
        }
        let f = T::q_pow(q, &-log_integrand(vals, &a, &b, &s))?;
        terms.push(T::from_biguint(c) * f / total.clone());
    }
    Ok(T::sum_all(terms))
}

fn re_parts(e: &ExponentAssignment) -> (f64, f64, Vec<f64>) {
    (e.a().re_f64(), e.b().re_f64(), e.s().iter().map(Scalar::re_f64).collect())
}

/// Upper bound for `|f|` summed over saturated cosets, when every real part
/// is nonnegative. Exact when all exponents are integers.
fn saturated_cap_bound(hist: &Histogram, n: usize, q: u64, depth: usize, e: &ExponentAssignment) -> f64 {
    let d = depth as i64;
    if e.is_integral() {
        let int = |x: &Scalar| x.as_exact().unwrap().to_integer().to_i64().unwrap();
        let (a, b) = (int(e.a()), int(e.b()));
        let s: Vec<i64> = e.s().iter().map(int).collect();
        let mut total = BigRational::zero();
        for (vals, c) in hist.iter().filter(|(v, _)| v.contains(&SATURATED)) {
            let mut k = 0i64;
            let unsat: Vec<u8> = vals.iter().copied().filter(|&v| v != SATURATED).collect();
            for (v, sk) in vals.iter().zip(&s) {
                k += sk * if *v == SATURATED { d } else { *v as i64 };
            }
            k += a * unsat.iter().min().map_or(d, |&v| v as i64);
            k += b * d;
            total += BigRational::from_integer(c.clone().into()) * q_pow_int(q, -k - (n as i64) * d);
        }
        return round_up(&total);
    }
    let (a, b, s) = re_parts(e);
    let qf = q as f64;
    let mut total = 0.0;
    for (vals, c) in hist.iter().filter(|(v, _)| v.contains(&SATURATED)) {
        let mut k = 0.0;
        let unsat: Vec<u8> = vals.iter().copied().filter(|&v| v != SATURATED).collect();
        for (v, sk) in vals.iter().zip(&s) {
            k += sk * if *v == SATURATED { depth as f64 } else { *v as f64 };
        }
        k += a * unsat.iter().min().map_or(depth as f64, |&v| v as f64);
        k += b * depth as f64;
        total += c.to_f64().unwrap() * qf.powf(-k - (n * depth) as f64);
    }
    total * (1.0 + 1e-12)
}

/// Smallest double not below `r`.
fn round_up(r: &BigRational) -> f64 {
    let f = ratio_to_f64(r);
    match BigRational::from_float(f) {
        Some(back) if &back >= r => f,
        _ => f.next_up(),
    }
}

/// Union bound over level pairs with last mark at least `depth`, summing the
/// geometric series of each level in closed form.
fn analytic_tail_bound(n: usize, q: u64, depth: usize, e: &ExponentAssignment, limits: &Limits) -> Result<f64> {
    let cat = crate::filtration::Catalog::get(n, limits)?;
    let (a, b, s) = re_parts(e);
    let qf = q as f64;
    let sum_s: f64 = s.iter().sum();
    let x0 = qf.powf(-((n - 1) as f64 + a + b + sum_s));
    let mut total = 0.0;
    for rec in &cat.records {
        let m = rec.multiplicity(q)?;
        if m.is_zero() {
            continue;
        }
        let ell_count = rec.levels.len();
        let t = (depth + 1).div_ceil(ell_count) as i32;
        let mut full = vec![1.0 / (1.0 - x0)];
        let mut tail = vec![x0.powi(t - 1) / (1.0 - x0)];
        for (rank, idx) in &rec.levels[1..] {
            let x = qf.powf(-(b + *rank as f64 + idx.iter().map(|&k| s[k]).sum::<f64>()));
            full.push(x / (1.0 - x));
            tail.push(x.powi(t) / (1.0 - x));
        }
        let mut acc = 0.0;
        for ell in 0..ell_count {
            let mut p = tail[ell];
            for (k, f) in full.iter().enumerate() {
                if k != ell {
                    p *= f;
                }
            }
            acc += p;
        }
        total += m.to_f64().unwrap() / qf.powi(n as i32 - 1) * acc;
    }
    Ok(total * (1.0 + 1e-12))
}

/// `int_{R^n} max^a min^b prod |x_i - x_j|^{s_ij}` over cosets mod `P^depth`.
///
/// Unsaturated cosets carry a constant integrand and are summed exactly;
/// saturated ones are bounded in `tail_bound`.
pub fn exact_truncated_integral(e: &ExponentAssignment, q: u64, depth: usize, limits: &Limits) -> Result<TruncatedResult> {
    let n = e.n();
    budget_check(n, q, depth, limits)?;
    domain::in_omega(n, q, e, limits)?.into_result().map_err(|err| match err {
        Error::Convergence(c) => Error::Divergence(format!("integral diverges; violated constraint: {c}")),
        other => other,
    })?;
    let hist = coset_histogram(n, q, depth, true, limits)?;
    let main = if e.is_integral() {
        main_part::<BigRational>(&hist, n, q, depth, e)?.into_scalar()
    } else {
        main_part::<Complex64>(&hist, n, q, depth, &e.to_float())?.into_scalar()
    };
    let (a, b, s) = re_parts(e);
    let nonneg = a >= 0.0 && b >= 0.0 && s.iter().all(|&x| x >= 0.0);
    let tail_bound = if nonneg {
        saturated_cap_bound(&hist, n, q, depth, e)
    } else {
        analytic_tail_bound(n, q, depth, e, limits)?
    };
    Ok(TruncatedResult {
        main,
        tail_bound,
        depth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub estimate: Scalar,
    pub stderr: f64,
    pub samples: u64,
    pub saturated: u64,
    pub saturation_rate: f64,
    pub seed: u64,
}

const CHUNK: u64 = 4096;

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunks(samples: u64) -> Vec<(u64, u64)> {
    (0..samples.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(samples - c * CHUNK)))
        .collect()
}

/// Mean of the integrand over uniform digit matrices, saturated draws
/// excluded. Chunk `c` draws from stream `c` of the seeded generator.
pub fn monte_carlo_integral(e: &ExponentAssignment, q: u64, depth: usize, samples: u64, seed: u64, limits: &Limits) -> Result<MonteCarloResult> {
    let n = e.n();
    if samples < 100 {
        return Err(Error::domain(format!("need at least 100 samples, got {samples}")));
    }
    if n < 2 || !(2..=255).contains(&q) || depth == 0 || depth > MAX_DEPTH {
        return Err(Error::domain("needs n >= 2, q in 2..=255 and depth in 1..=250"));
    }
    domain::in_omega(n, q, e, limits)?.into_result()?;
    let f = e.to_float();
    let a = f.a().to_complex();
    let b = f.b().to_complex();
    let s: Vec<Complex64> = f.s().iter().map(Scalar::to_complex).collect();
    let parts: Vec<(Complex64, f64, u64)> = chunks(samples)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            let mut sum = Vec::with_capacity(len as usize);
            let mut sq = 0.0;
            let mut sat = 0;
            for _ in 0..len {
                let dm = DigitMatrix::random(q, n, depth, &mut rng).expect("valid shape");
                let vals = valuation_matrix(&dm);
                if vals.contains(&SATURATED) {
                    sat += 1;
                    continue;
                }
                let v = <Complex64 as Field>::q_pow(q, &-log_integrand(&vals, &a, &b, &s)).unwrap_or(Complex64::new(f64::INFINITY, 0.0));
                sq += v.norm_sqr();
                sum.push(v);
            }
            (Complex64::sum_all(sum), sq, sat)
        })
        .collect();
    let saturated: u64 = parts.iter().map(|p| p.2).sum();
    let rate = saturated as f64 / samples as f64;
    if rate > 0.5 {
        return Err(Error::Saturated {
            depth,
            detail: format!("{:.1}% of samples saturated; increase the depth", 100.0 * rate),
        });
    }
    let kept = (samples - saturated) as f64;
    let total = Complex64::sum_all(parts.iter().map(|p| p.0).collect());
    let sq: f64 = parts.iter().map(|p| p.1).sum();
    let mean = total / kept;
    let var = ((sq - kept * mean.norm_sqr()) / (kept - 1.0).max(1.0)).max(0.0);
    Ok(MonteCarloResult {
        estimate: Scalar::Float(mean),
        stderr: (var / kept).sqrt(),
        samples,
        saturated,
        saturation_rate: rate,
        seed,
    })
}

/// Empirical counts of level pairs among uniform digit matrices, plus the
/// number of saturated draws.
pub fn level_pair_frequencies(n: usize, q: u64, depth: usize, samples: u64, seed: u64) -> Result<(BTreeMap<LevelPair, u64>, u64)> {
    if n < 2 || !(2..=255).contains(&q) || depth == 0 || depth > MAX_DEPTH {
        return Err(Error::domain("needs n >= 2, q in 2..=255 and depth in 1..=250"));
    }
    let parts: Vec<(BTreeMap<LevelPair, u64>, u64)> = chunks(samples)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            let mut counts = BTreeMap::new();
            let mut sat = 0;
            for _ in 0..len {
                let dm = DigitMatrix::random(q, n, depth, &mut rng).expect("valid shape");
                match assign_level_pair(&dm) {
                    Ok(lp) => *counts.entry(lp).or_insert(0) += 1,
                    Err(_) => sat += 1,
                }
            }
            (counts, sat)
        })
        .collect();
    let mut out = BTreeMap::new();
    let mut sat = 0;
    for (counts, s) in parts {
        sat += s;
        for (lp, c) in counts {
            *out.entry(lp).or_insert(0) += c;
        }
    }
    Ok((out, sat))
}
