//! The symmetric group acting on filtrations by relabelling.

use std::collections::{BTreeSet, HashSet};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::filtration::{Catalog, SplittingFiltration};

/// A bijection of `{1..n}`, stored as the image list `[s(1), .., s(n)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Permutation> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &i in &images {
            if i == 0 || i > n || seen[i] {
                return Err(Error::domain(format!("{images:?} is not a permutation of 1..={n}")));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation((1..=n).collect())
    }

    /// The transposition of `i` and `j`.
    pub fn swap(n: usize, i: usize, j: usize) -> Result<Permutation> {
        let mut v: Vec<usize> = (1..=n).collect();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::domain("transposition outside 1..=n"));
        }
        v.swap(i - 1, j - 1);
        Ok(Permutation(v))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn parse(text: &str) -> Result<Permutation> {
        let images = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(format!("bad permutation entry {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(images)
    }
}

pub fn apply_permutation(spl: &SplittingFiltration, sigma: &Permutation) -> Result<SplittingFiltration> {
    if sigma.n() != spl.n() {
        return Err(Error::Dimension {
            expected: spl.n(),
            found: sigma.n(),
        });
    }
    SplittingFiltration::new(spl.chain().iter().map(|p| p.relabel(sigma.images())).collect())
}

/// Every permutation of `1..=n` in lexicographic order.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = Some((1..=n).collect());
    std::iter::from_fn(move || {
        let out = cur.take()?;
        let mut next = out.clone();
        if let Some(i) = (1..next.len()).rev().find(|&i| next[i - 1] < next[i]) {
            let j = (i..next.len()).rev().find(|&j| next[j] > next[i - 1]).unwrap();
            next.swap(i - 1, j);
            next[i..].reverse();
            cur = Some(next);
        }
        Some(out)
    })
}

fn check_orbit_budget(n: usize, limits: &Limits) -> Result<()> {
    Limits::check("orbit computation n", n, limits.max_orbit_n)
}

fn images(spl: &SplittingFiltration) -> impl Iterator<Item = SplittingFiltration> + '_ {
    all_permutations(spl.n()).map(move |perm| {
        SplittingFiltration::new(spl.chain().iter().map(|p| p.relabel(&perm)).collect())
            .expect("relabelling preserves validity")
    })
}

/// Least element of the orbit.
pub fn canonical_form(spl: &SplittingFiltration, limits: &Limits) -> Result<SplittingFiltration> {
    check_orbit_budget(spl.n(), limits)?;
    Ok(images(spl).min().expect("orbit is nonempty"))
}

/// Size of the orbit of `spl`.
pub fn orbit_weight(spl: &SplittingFiltration, limits: &Limits) -> Result<u64> {
    check_orbit_budget(spl.n(), limits)?;
    Ok(images(spl).collect::<HashSet<_>>().len() as u64)
}

/// One least representative per orbit with its weight, in increasing order.
pub fn orbit_representatives(
    n: usize,
    reduced_only: bool,
    limits: &Limits,
) -> Result<Vec<(SplittingFiltration, u64)>> {
    check_orbit_budget(n, limits)?;
    let catalog = Catalog::get(n, limits)?;
    let mut seen: HashSet<SplittingFiltration> = HashSet::new();
    let mut reps: BTreeSet<(SplittingFiltration, u64)> = BTreeSet::new();
    for rec in &catalog.records {
        if (reduced_only && !rec.reduced) || seen.contains(&rec.spl) {
            continue;
        }
        let orbit: HashSet<SplittingFiltration> = images(&rec.spl).collect();
        let rep = orbit.iter().min().unwrap().clone();
        reps.insert((rep, orbit.len() as u64));
        seen.extend(orbit);
    }
    Ok(reps.into_iter().collect())
}
