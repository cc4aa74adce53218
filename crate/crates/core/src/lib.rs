//! Sum-decomposition of permutation-invariant functions on sets.
//!
//! Exact codecs for finite sets of reals (power sums, with and without a
//! size bound), exact encodings for countable universes, tools that probe
//! candidate decompositions for collisions, the pathological continuous
//! encoding Ψ, and a small Deep Sets trainer for studying how the latent
//! width needed to regress a set median scales with set size.

pub mod countable;
pub mod error;
pub mod experiment;
pub mod lab;
pub mod multiset;
pub mod plot;
pub mod power_sum;
pub mod psi;
mod roots;
pub mod varsize;

pub use countable::{base4_sum, divergence_witness, CountableUniverse, DivergenceWitness, ExactRational};
pub use error::{Error, Result};
pub use lab::{
    check_sum_decomposition, collision_check, max_collision_adversary, max_decompose_eval, AdversaryReport,
    CollisionReport, CollisionSearch, DecompositionReport, ElementMap,
};
pub use multiset::{
    format_real, join_reals, max_elementwise_error, multiset_equal, parse_reals, DomainInterval, LatentVector,
    Multiset, Seed,
};
pub use plot::{LineChart, Series};
pub use power_sum::{power_to_elementary, roots_from_elementary, Frame, PowerSumCodec};
pub use psi::{binary_digit, midpoint, psi_tilde, terms_for_tolerance, PsiConfig};
pub use varsize::VarSizeCodec;
