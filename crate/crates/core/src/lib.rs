//! Desk-scale truncated-Fock-space simulator for the generation of
//! approximate entangled coherent states (ECS) by mixing coherent and
//! squeezed vacuum light on a beam splitter.
//!
//! The pipeline covers state construction ([`states`]), the linear-optical
//! mixing transform and joint photon-number statistics ([`optics`]), fidelity
//! and distribution-similarity measures ([`metrics`]), a Bell-type
//! phase-space nonlocality functional with a seeded multi-start extremizer
//! ([`nonlocality`]), and the lossy multiplexed click-detection chain
//! ([`detection`]).
//!
//! All heavy inner loops are data parallel. The default `parallel` feature
//! runs them on rayon; disabling it (`--no-default-features`) falls back to
//! equivalent sequential iteration with bit-identical results.

pub mod detection;
mod error;
pub mod fock;
pub mod metrics;
pub mod nonlocality;
pub mod optics;
pub mod states;

pub use error::SimError;
pub use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map over owned items, parallel when the `parallel`
/// feature is enabled. Callers keep determinism by making every item's
/// computation independent of scheduling.
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
