//! Exact evaluation of integrals of products of distances over powers of a
//! nonarchimedean local field, organized by chains in the partition lattice.
//!
//! Every integer `q >= 2` is accepted as a residue field size; the formulas
//! depend on the field only through `q`.

pub mod config;
pub mod domain;
pub mod error;
pub mod evaluator;
pub mod filtration;
pub mod oracle;
pub mod pairs;
pub mod partition;
pub mod rho;
pub mod scalar;
pub mod symmetry;

pub use config::Limits;
pub use domain::{AffineForm, ChargeVector, Constraint, ExponentAssignment, FormKind, Membership};
pub use error::{Error, Result};
pub use evaluator::{EvalOptions, Evaluation};
pub use filtration::{Catalog, SplittingFiltration};
pub use pairs::{BranchPair, LevelPair};
pub use partition::{Block, Partition};
pub use rho::RhoSpec;
pub use scalar::Scalar;

/// Caps the global worker pool at `PADIC_GAS_THREADS` when that is set.
/// Call once, before any parallel work.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("PADIC_GAS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse(format!("PADIC_GAS_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}
