//! Level pairs `(spl, n)` and branch pairs `[spl*, k]`, and the bijection
//! between them.

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::filtration::{reduce_branch_set, SplittingFiltration};
use crate::partition::{Block, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawLevelPair")]
pub struct LevelPair {
    pub chain: SplittingFiltration,
    pub n: Vec<u64>,
}

#[derive(Deserialize)]
struct RawLevelPair {
    chain: SplittingFiltration,
    n: Vec<u64>,
}

impl TryFrom<RawLevelPair> for LevelPair {
    type Error = Error;
    fn try_from(raw: RawLevelPair) -> Result<Self> {
        LevelPair::new(raw.chain, raw.n)
    }
}

impl LevelPair {
    pub fn new(chain: SplittingFiltration, n: Vec<u64>) -> Result<LevelPair> {
        if n.len() != chain.len() {
            return Err(Error::domain(format!(
                "level pair needs {} gaps, got {}",
                chain.len(),
                n.len()
            )));
        }
        if n.iter().any(|&x| x == 0) {
            return Err(Error::domain("level gaps must be positive"));
        }
        Ok(LevelPair { chain, n })
    }

    /// Marks `m_0 = -1, m_{l+1} = m_l + n_l`.
    pub fn marks(&self) -> Vec<i64> {
        let mut m = vec![-1i64];
        for &x in &self.n {
            let last = *m.last().unwrap();
            m.push(last + x as i64);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawBranchPair")]
pub struct BranchPair {
    pub chain: SplittingFiltration,
    pub k: BTreeMap<Block, u64>,
}

#[derive(Deserialize)]
struct RawBranchPair {
    chain: SplittingFiltration,
    k: BTreeMap<String, u64>,
}

impl TryFrom<RawBranchPair> for BranchPair {
    type Error = Error;
    fn try_from(raw: RawBranchPair) -> Result<Self> {
        let k = raw
            .k
            .into_iter()
            .map(|(key, v)| Ok((Block::decode(&key)?, v)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        BranchPair::new(raw.chain, k)
    }
}

impl Serialize for BranchPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct KMap<'a>(&'a BTreeMap<Block, u64>);
        impl Serialize for KMap<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (b, v) in self.0 {
                    m.serialize_entry(&b.encode(), v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("chain", &self.chain)?;
        m.serialize_entry("k", &KMap(&self.k))?;
        m.end()
    }
}

impl BranchPair {
    pub fn new(chain: SplittingFiltration, k: BTreeMap<Block, u64>) -> Result<BranchPair> {
        if !chain.is_reduced() {
            return Err(Error::Precondition(format!(
                "branch pair needs a reduced filtration, got {chain}"
            )));
        }
        let branches = chain.branches();
        if k.keys().copied().collect::<Vec<_>>() != branches {
            return Err(Error::domain("k must have exactly one entry per branch"));
        }
        if k.values().any(|&v| v == 0) {
            return Err(Error::domain("k entries must be positive"));
        }
        Ok(BranchPair { chain, k })
    }
}

/// Smallest branch of `branches` properly containing `lambda`.
fn parent(branches: &[Block], lambda: Block) -> Option<Block> {
    branches
        .iter()
        .copied()
        .filter(|&b| b != lambda && lambda.is_subset_of(b))
        .min_by_key(|b| b.len())
}

pub fn level_to_branch(lp: &LevelPair) -> BranchPair {
    let spl = &lp.chain;
    let stats = spl.stats();
    let branches = spl.branches();
    let top = Block::full(spl.n());
    let k = branches
        .iter()
        .map(|&lambda| {
            let v = if lambda == top {
                lp.n[0]
            } else {
                let up = parent(&branches, lambda).expect("top contains every branch");
                let from = stats.get(up).unwrap().depth + 1;
                let to = stats.get(lambda).unwrap().depth;
                lp.n[from..=to].iter().sum()
            };
            (lambda, v)
        })
        .collect();
    BranchPair {
        chain: spl.reduce(),
        k,
    }
}

pub fn branch_to_level(bp: &BranchPair) -> Result<LevelPair> {
    if !bp.chain.is_reduced() {
        return Err(Error::Precondition(format!(
            "branch pair needs a reduced filtration, got {}",
            bp.chain
        )));
    }
    let n = bp.chain.n();
    let branches = bp.chain.branches();
    // Partial sums of k along the chain of branches containing each branch.
    let sums: BTreeMap<Block, u64> = branches
        .iter()
        .map(|&lambda| {
            let s = branches
                .iter()
                .filter(|&&b| lambda.is_subset_of(b))
                .map(|b| bp.k[b])
                .sum();
            (lambda, s)
        })
        .collect();
    let mut marks: Vec<i64> = sums.values().map(|&s| s as i64 - 1).collect();
    marks.sort_unstable();
    marks.dedup();
    let l = marks.len();
    // marks[i] is m_{i+1}; depth(lambda) = l where sum = m_{l+1} + 1.
    let depth: BTreeMap<Block, usize> = sums
        .iter()
        .map(|(&b, &s)| (b, marks.binary_search(&(s as i64 - 1)).unwrap()))
        .collect();
    let mut chain = vec![Partition::top(n)];
    for ell in 1..l {
        let mut blocks: Vec<Block> = branches
            .iter()
            .copied()
            .filter(|&b| {
                depth[&b] >= ell && parent(&branches, b).is_some_and(|p| depth[&p] < ell)
            })
            .collect();
        let covered = blocks.iter().fold(0u32, |acc, b| acc | b.0);
        blocks.extend((1..=n).filter(|&i| covered & (1 << (i - 1)) == 0).map(Block::singleton));
        chain.push(Partition::new(n, blocks)?);
    }
    chain.push(Partition::bottom(n));
    let mut gaps = Vec::with_capacity(l);
    let mut prev = -1i64;
    for &m in &marks {
        gaps.push((m - prev) as u64);
        prev = m;
    }
    LevelPair::new(SplittingFiltration::new(chain)?, gaps)
}

/// The reduced filtration with a given branch set.
pub fn reduced_from_branches(n: usize, branches: &[Block]) -> SplittingFiltration {
    reduce_branch_set(n, branches)
}
