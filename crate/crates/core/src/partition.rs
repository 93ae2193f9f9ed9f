//! Set partitions of `[n] = {1..n}` under refinement.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Limits;
use crate::error::{Error, Result};

/// Hard ceiling imposed by the bitmask representation.
pub const MAX_N: usize = 32;

/// A nonempty subset of `[n]`, bit `i - 1` standing for element `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block(pub u32);

impl Block {
    pub fn from_elements(elements: &[usize]) -> Result<Block> {
        let mut bits = 0u32;
        for &e in elements {
            if e == 0 || e > MAX_N {
                return Err(Error::parse(format!("element {e} outside 1..={MAX_N}")));
            }
            let bit = 1u32 << (e - 1);
            if bits & bit != 0 {
                return Err(Error::parse(format!("element {e} repeated")));
            }
            bits |= bit;
        }
        if bits == 0 {
            return Err(Error::parse("empty block"));
        }
        Ok(Block(bits))
    }

    /// `{1..n}`.
    pub fn full(n: usize) -> Block {
        if n == 32 {
            Block(u32::MAX)
        } else {
            Block((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Block {
        Block(1u32 << (i - 1))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    pub fn first(self) -> usize {
        self.0.trailing_zeros() as usize + 1
    }

    pub fn contains(self, i: usize) -> bool {
        i >= 1 && i <= MAX_N && self.0 & (1u32 << (i - 1)) != 0
    }

    pub fn is_subset_of(self, other: Block) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in ascending order.
    pub fn elements(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i + 1)
            }
        })
    }

    /// Pairs `(i, j)` with `i < j`, both in the block.
    pub fn pairs(self) -> impl Iterator<Item = (usize, usize)> {
        let elems: Vec<usize> = self.elements().collect();
        let mut out = Vec::with_capacity(elems.len() * elems.len().saturating_sub(1) / 2);
        for (x, &i) in elems.iter().enumerate() {
            for &j in &elems[x + 1..] {
                out.push((i, j));
            }
        }
        out.into_iter()
    }

    /// Text form `[1,2,3]`.
    pub fn encode(self) -> String {
        let parts: Vec<String> = self.elements().map(|e| e.to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    pub fn decode(text: &str) -> Result<Block> {
        let t = text.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::parse(format!("block {t:?} must be bracketed")))?;
        let elems = inner
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(format!("bad element {s:?} in block {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parse(format!("block {t:?} is not strictly ascending")));
        }
        Block::from_elements(&elems)
    }
}

/// Lexicographic order on the ascending element lists.
impl Ord for Block {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let low = diff & diff.wrapping_neg();
        let above = !(low | (low - 1));
        // The smaller list holds the first differing element, unless the other
        // list simply ends there.
        if self.0 & low != 0 {
            if other.0 & above == 0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        } else if self.0 & above == 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for Block {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// A partition of `[n]` with blocks sorted by minimum element.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    blocks: Vec<Block>,
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<Block>) -> Result<Partition> {
        if n == 0 || n > MAX_N {
            return Err(Error::domain(format!("n = {n} outside 1..={MAX_N}")));
        }
        let mut seen = 0u32;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::domain("empty block"));
            }
            if seen & b.0 != 0 {
                return Err(Error::domain("blocks overlap"));
            }
            seen |= b.0;
        }
        if seen != Block::full(n).0 {
            return Err(Error::domain(format!("blocks do not cover exactly 1..={n}")));
        }
        blocks.sort_by_key(|b| b.first());
        Ok(Partition { n, blocks })
    }

    pub fn from_lists(n: usize, lists: &[Vec<usize>]) -> Result<Partition> {
        let blocks = lists
            .iter()
            .map(|l| Block::from_elements(l))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(n, blocks)
    }

    pub fn top(n: usize) -> Partition {
        Partition {
            n,
            blocks: vec![Block::full(n)],
        }
    }

    pub fn bottom(n: usize) -> Partition {
        Partition {
            n,
            blocks: (1..=n).map(Block::singleton).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn rank(&self) -> usize {
        self.n - self.blocks.len()
    }

    pub fn is_top(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_bottom(&self) -> bool {
        self.blocks.len() == self.n
    }

    pub fn contains_block(&self, b: Block) -> bool {
        self.blocks.contains(&b)
    }

    /// Non-singleton blocks.
    pub fn branches(&self) -> impl Iterator<Item = Block> + '_ {
        self.blocks.iter().copied().filter(|b| !b.is_singleton())
    }

    /// Block containing element `i`.
    pub fn block_of(&self, i: usize) -> Block {
        *self
            .blocks
            .iter()
            .find(|b| b.contains(i))
            .expect("partition covers every element")
    }

    /// Whether `self` refines `coarser`.
    pub fn refines(&self, coarser: &Partition) -> Result<bool> {
        if self.n != coarser.n {
            return Err(Error::Dimension {
                expected: coarser.n,
                found: self.n,
            });
        }
        Ok(self.refines_unchecked(coarser))
    }

    pub fn strictly_refines(&self, coarser: &Partition) -> Result<bool> {
        Ok(self.refines(coarser)? && self != coarser)
    }

    pub(crate) fn refines_unchecked(&self, coarser: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| coarser.blocks.iter().any(|c| b.is_subset_of(*c)))
    }

    /// Image under the relabelling `i -> perm[i-1]`.
    pub(crate) fn relabel(&self, perm: &[usize]) -> Partition {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut bits = 0u32;
                for e in b.elements() {
                    bits |= 1u32 << (perm[e - 1] - 1);
                }
                Block(bits)
            })
            .collect();
        let mut p = Partition { n: self.n, blocks };
        p.blocks.sort_by_key(|b| b.first());
        p
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.elements().collect()).collect()
    }

    /// Text form `[[1,2],[3]]`.
    pub fn encode(&self) -> String {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.encode()).collect();
        format!("[{}]", parts.join(","))
    }

    /// Parses the text form; `n` is the largest element present.
    pub fn decode(text: &str) -> Result<Partition> {
        let lists: Vec<Vec<usize>> = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("partition {text:?}: {e}")))?;
        Partition::from_nested(lists)
    }

    fn from_nested(lists: Vec<Vec<usize>>) -> Result<Partition> {
        let n = lists.iter().flatten().copied().max().unwrap_or(0);
        for l in &lists {
            if l.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse("block elements must be strictly ascending"));
            }
        }
        let p = Partition::from_lists(n, &lists)?;
        if p.to_lists() != lists {
            return Err(Error::parse("blocks must be sorted by minimum element"));
        }
        Ok(p)
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.blocks.cmp(&other.blocks))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_lists().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lists = Vec::<Vec<usize>>::deserialize(d)?;
        Partition::from_nested(lists).map_err(serde::de::Error::custom)
    }
}

/// Partitions of `[n]` in restricted-growth order; `n = 0` yields the empty
/// partition.
pub fn enumerate_partitions(n: usize, limits: &Limits) -> Result<PartitionIter> {
    Limits::check("partition enumeration n", n, limits.max_partition_n.min(MAX_N))?;
    Ok(PartitionIter {
        n,
        rgs: vec![0; n],
        maxes: vec![0; n],
        done: false,
    })
}

pub struct PartitionIter {
    n: usize,
    rgs: Vec<usize>,
    /// `maxes[i]` = max of `rgs[0..i]`.
    maxes: Vec<usize>,
    done: bool,
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let count = self.rgs.iter().max().map_or(0, |m| m + 1);
        let mut bits = vec![0u32; count];
        for (i, &r) in self.rgs.iter().enumerate() {
            bits[r] |= 1 << i;
        }
        let out = Partition {
            n: self.n,
            blocks: bits.into_iter().map(Block).collect(),
        };

        if self.n == 0 {
            self.done = true;
            return Some(out);
        }
        let mut i = self.n - 1;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            if self.rgs[i] <= self.maxes[i] {
                self.rgs[i] += 1;
                for j in i + 1..self.n {
                    self.rgs[j] = 0;
                    self.maxes[j] = self.maxes[j - 1].max(self.rgs[j - 1]);
                }
                break;
            }
            i -= 1;
        }
        Some(out)
    }
}
