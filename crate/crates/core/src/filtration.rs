//! Splitting filtrations: strictly refining chains from top to bottom.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::partition::{enumerate_partitions, Block, Partition};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplittingFiltration {
    chain: Vec<Partition>,
}

impl SplittingFiltration {
    pub fn new(chain: Vec<Partition>) -> Result<SplittingFiltration> {
        let first = chain
            .first()
            .ok_or_else(|| Error::domain("empty chain"))?;
        let n = first.n();
        if n < 2 {
            return Err(Error::domain("filtrations need n >= 2"));
        }
        for p in &chain {
            if p.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.n(),
                });
            }
        }
        if !first.is_top() {
            return Err(Error::domain("chain must start at the one-block partition"));
        }
        if !chain.last().unwrap().is_bottom() {
            return Err(Error::domain("chain must end at the all-singletons partition"));
        }
        for w in chain.windows(2) {
            if !w[1].strictly_refines(&w[0])? {
                return Err(Error::domain(format!(
                    "{} does not strictly refine {}",
                    w[1], w[0]
                )));
            }
        }
        Ok(SplittingFiltration { chain })
    }

    /// Builds from nested element lists, one entry per level.
    pub fn from_lists(levels: &[Vec<Vec<usize>>]) -> Result<SplittingFiltration> {
        let n = levels
            .iter()
            .flatten()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0);
        let chain = levels
            .iter()
            .map(|l| Partition::from_lists(n, l))
            .collect::<Result<Vec<_>>>()?;
        SplittingFiltration::new(chain)
    }

    pub fn n(&self) -> usize {
        self.chain[0].n()
    }

    /// Number of steps `L`; the chain holds `L + 1` partitions.
    pub fn len(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn chain(&self) -> &[Partition] {
        &self.chain
    }

    pub fn level(&self, ell: usize) -> &Partition {
        &self.chain[ell]
    }

    /// `B(spl)`: non-singleton blocks of levels `0..L`, in block order.
    pub fn branches(&self) -> Vec<Block> {
        let mut out: Vec<Block> = self.chain[..self.len()]
            .iter()
            .flat_map(|p| p.branches())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Each branch occurs in exactly one of the levels `0..L`.
    pub fn is_reduced(&self) -> bool {
        let mut seen = Vec::new();
        for p in &self.chain[..self.len()] {
            for b in p.branches() {
                if seen.contains(&b) {
                    return false;
                }
                seen.push(b);
            }
        }
        true
    }

    pub fn stats(&self) -> BranchStats {
        let l = self.len();
        let branches = self
            .branches()
            .into_iter()
            .map(|block| {
                let depth = (0..l)
                    .rev()
                    .find(|&ell| self.chain[ell].contains_block(block))
                    .expect("branch occurs in some level");
                let degree = self.chain[depth + 1]
                    .blocks()
                    .iter()
                    .filter(|c| c.is_subset_of(block))
                    .count();
                BranchInfo {
                    block,
                    depth,
                    degree,
                }
            })
            .collect();
        BranchStats { branches }
    }

    pub fn multiplicity(&self, q: u64) -> Result<BigUint> {
        self.stats().multiplicity(q)
    }

    /// The unique reduced filtration with the same branch set.
    pub fn reduce(&self) -> SplittingFiltration {
        reduce_branch_set(self.n(), &self.branches())
    }

    pub fn to_lists(&self) -> Vec<Vec<Vec<usize>>> {
        self.chain.iter().map(|p| p.to_lists()).collect()
    }

    pub fn encode(&self) -> String {
        let parts: Vec<String> = self.chain.iter().map(|p| p.encode()).collect();
        format!("[{}]", parts.join(","))
    }

    pub fn decode(text: &str) -> Result<SplittingFiltration> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("filtration: {e}")))
    }
}

/// Greedy levels from a branch set: each new level takes the maximal unused
/// branches and fills in singletons.
pub(crate) fn reduce_branch_set(n: usize, branches: &[Block]) -> SplittingFiltration {
    let top = Block::full(n);
    let mut remaining: Vec<Block> = branches.iter().copied().filter(|&b| b != top).collect();
    let mut chain = vec![Partition::top(n)];
    while !remaining.is_empty() {
        let maximal: Vec<Block> = remaining
            .iter()
            .copied()
            .filter(|&b| !remaining.iter().any(|&c| c != b && b.is_subset_of(c)))
            .collect();
        remaining.retain(|b| !maximal.contains(b));
        let covered = maximal.iter().fold(0u32, |acc, b| acc | b.0);
        let mut blocks = maximal;
        blocks.extend((1..=n).filter(|&i| covered & (1 << (i - 1)) == 0).map(Block::singleton));
        chain.push(Partition::new(n, blocks).expect("maximal branches are disjoint"));
    }
    chain.push(Partition::bottom(n));
    SplittingFiltration { chain }
}

impl fmt::Debug for SplittingFiltration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.chain.iter().map(|p| p.encode()).collect();
        f.write_str(&parts.join(" > "))
    }
}

impl fmt::Display for SplittingFiltration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for SplittingFiltration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.chain.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SplittingFiltration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let chain = Vec::<Partition>::deserialize(d)?;
        let n = chain.iter().map(|p| p.n()).max().unwrap_or(0);
        if chain.iter().any(|p| p.n() != n) {
            return Err(serde::de::Error::custom("levels cover different sets"));
        }
        SplittingFiltration::new(chain).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BranchInfo {
    pub block: Block,
    pub depth: usize,
    pub degree: usize,
}

impl Serialize for Block {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.encode())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchStats {
    pub branches: Vec<BranchInfo>,
}

impl BranchStats {
    pub fn get(&self, block: Block) -> Option<&BranchInfo> {
        self.branches.iter().find(|b| b.block == block)
    }

    /// Multiset of `degree - 1` values, sorted.
    pub fn degree_offsets(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.branches.iter().map(|b| b.degree - 1).collect();
        v.sort_unstable();
        v
    }

    /// Product of falling factorials `(q-1)_{deg-1}` over branches.
    pub fn multiplicity(&self, q: u64) -> Result<BigUint> {
        if q < 2 {
            return Err(Error::domain(format!("q = {q} must be at least 2")));
        }
        let mut m = BigUint::one();
        for k in self.degree_offsets() {
            let f = falling_factorial(q - 1, k as u64);
            if f.is_zero() {
                return Ok(BigUint::zero());
            }
            m *= f;
        }
        Ok(m)
    }
}

pub fn falling_factorial(x: u64, k: u64) -> BigUint {
    if k > x {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(x - i))
}

/// All filtrations of `[n]`, depth first from the top, refinements taken in
/// partition enumeration order.
pub fn enumerate_filtrations(n: usize, limits: &Limits) -> Result<Vec<SplittingFiltration>> {
    Limits::check("filtration enumeration n", n, limits.max_filtration_n)?;
    if n < 2 {
        return Err(Error::domain("filtrations need n >= 2"));
    }
    let graph = RefinementGraph::new(n, limits)?;
    let mut out = Vec::new();
    let mut path = vec![graph.top];
    graph.walk(&mut path, &mut out);
    Ok(out)
}

/// Strict-refinement adjacency over all partitions of `[n]`, built once.
struct RefinementGraph {
    parts: Vec<Partition>,
    below: Vec<Vec<usize>>,
    top: usize,
    bottom: usize,
}

impl RefinementGraph {
    fn new(n: usize, limits: &Limits) -> Result<Self> {
        let parts: Vec<Partition> = enumerate_partitions(n, limits)?.collect();
        let below = parts
            .iter()
            .map(|p| {
                parts
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.num_blocks() > p.num_blocks() && c.refines_unchecked(p))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let top = parts.iter().position(|p| p.is_top()).unwrap();
        let bottom = parts.iter().position(|p| p.is_bottom()).unwrap();
        Ok(RefinementGraph {
            parts,
            below,
            top,
            bottom,
        })
    }

    fn walk(&self, path: &mut Vec<usize>, out: &mut Vec<SplittingFiltration>) {
        let last = *path.last().unwrap();
        if last == self.bottom {
            out.push(SplittingFiltration {
                chain: path.iter().map(|&i| self.parts[i].clone()).collect(),
            });
            return;
        }
        for &next in &self.below[last] {
            path.push(next);
            self.walk(path, out);
            path.pop();
        }
    }
}

/// A filtration together with data reused by every evaluation.
#[derive(Debug, Clone)]
pub struct FiltrationRecord {
    pub spl: SplittingFiltration,
    pub stats: BranchStats,
    pub reduced: bool,
    /// Index of `spl.reduce()` among the reduced records of the catalog.
    pub class: usize,
    /// Per level `0..L`: rank and the pair indices inside its branches.
    pub levels: Vec<(usize, Vec<usize>)>,
    /// Per non-top branch: the branch and its pair indices.
    pub inner_branches: Vec<(Block, Vec<usize>)>,
}

impl FiltrationRecord {
    pub fn new(spl: SplittingFiltration, class: usize) -> FiltrationRecord {
        let n = spl.n();
        let idx = |b: Block| -> Vec<usize> {
            b.pairs().map(|(i, j)| crate::domain::pair_index(n, i, j)).collect()
        };
        let levels = (0..spl.len())
            .map(|ell| {
                let p = spl.level(ell);
                let mut v: Vec<usize> = p.branches().flat_map(idx).collect();
                v.sort_unstable();
                (p.rank(), v)
            })
            .collect();
        let top = Block::full(n);
        let inner_branches = spl
            .branches()
            .into_iter()
            .filter(|&b| b != top)
            .map(|b| (b, idx(b)))
            .collect();
        FiltrationRecord {
            stats: spl.stats(),
            reduced: spl.is_reduced(),
            class,
            levels,
            inner_branches,
            spl,
        }
    }

    pub fn multiplicity(&self, q: u64) -> Result<BigUint> {
        self.stats.multiplicity(q)
    }
}

/// Every filtration of `[n]` with its statistics, grouped by reduction.
#[derive(Debug)]
pub struct Catalog {
    pub n: usize,
    pub records: Vec<FiltrationRecord>,
    /// Indices into `records` of the reduced filtrations.
    pub reduced: Vec<usize>,
}

impl Catalog {
    pub fn build(n: usize, limits: &Limits) -> Result<Catalog> {
        let all = enumerate_filtrations(n, limits)?;
        let mut class_of: BTreeMap<SplittingFiltration, usize> = BTreeMap::new();
        let mut reduced = Vec::new();
        for (i, spl) in all.iter().enumerate() {
            if spl.is_reduced() {
                class_of.insert(spl.clone(), reduced.len());
                reduced.push(i);
            }
        }
        let records = all
            .into_iter()
            .map(|spl| {
                let class = class_of[&spl.reduce()];
                FiltrationRecord::new(spl, class)
            })
            .collect();
        Ok(Catalog {
            n,
            records,
            reduced,
        })
    }

    /// Shared catalog for `n`, built on first use.
    pub fn get(n: usize, limits: &Limits) -> Result<std::sync::Arc<Catalog>> {
        use std::collections::HashMap;
        use std::sync::{Arc, Mutex, OnceLock};
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Catalog>>>> = OnceLock::new();
        Limits::check("filtration enumeration n", n, limits.max_filtration_n)?;
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = cache.lock().unwrap().get(&n) {
            return Ok(c.clone());
        }
        let built = Arc::new(Catalog::build(n, limits)?);
        let mut guard = cache.lock().unwrap();
        Ok(guard.entry(n).or_insert(built).clone())
    }

    pub fn reduced_records(&self) -> impl Iterator<Item = &FiltrationRecord> {
        self.reduced.iter().map(|&i| &self.records[i])
    }

    /// Members of the reduction class of the `class`-th reduced filtration.
    pub fn class_members(&self, class: usize) -> impl Iterator<Item = &FiltrationRecord> {
        self.records.iter().filter(move |r| r.class == class)
    }
}
