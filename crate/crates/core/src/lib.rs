//! # nwkernel
//!
//! Positive definite kernels between integral histograms built from the
//! polytope of contingency tables with prescribed margins.
//!
//! | Item | What it computes | Cost |
//! |------|------------------|------|
//! | [`weighted_volume`] | `T(r, c; K) = Σ_X Π k_ij^{x_ij}` over all tables | exponential |
//! | [`generating_function`] | `V(r, c; M) = Σ_X exp(-⟨X, M⟩)` | exponential |
//! | [`nw_kernel`] | sum over Northwestern corner vertices indexed by `R × R` | `O(d · |R|²)` |
//! | [`pseudo_kernel`] | `exp(-d_M(r, c))`, indefinite in general | enumeration or Monge fast path |
//! | [`count_tables`] | `|𝕌(r, c)|` exactly | dynamic programming |
//!
//! Both `T` (for a positive definite, entrywise nonnegative `K`) and the
//! Northwestern kernel (for any `R`) are positive definite on histograms of a
//! common mass. [`psd`] builds Gram matrices and certifies that numerically.
//!
//! ```
//! use nwkernel::{nw_table, Histogram};
//!
//! let r = Histogram::new(vec![2, 5, 3]).unwrap();
//! let c = Histogram::new(vec![5, 1, 4]).unwrap();
//! let x = nw_table(&r, &c).unwrap();
//! assert_eq!(x.rows(), vec![vec![2, 0, 0], vec![3, 1, 1], vec![0, 0, 3]]);
//! ```

pub mod error;
pub mod histogram;
pub mod io;
pub mod northwest;
pub mod numeric;
pub mod ot;
pub mod polytope;
pub mod psd;
pub mod testing;
pub mod weights;

pub use error::{Error, Result};
pub use histogram::{
    all_permutations, canonical_sequence, chi, permuted_sequence, ContingencyTable, Histogram,
    IndexSequence, Permutation,
};
pub use northwest::{
    nw_kernel, nw_kernel_eval, nw_permuted, nw_table, sample_permutations, NwEvaluation,
    PermutationSet,
};
pub use numeric::softmin;
pub use ot::{monge_check, ot_cost, pseudo_kernel, TransportSolution};
pub use polytope::{
    count_tables, enumerate_tables, fisher_yates, generating_function, weighted_volume,
    EnumerationBudget, TableStream,
};
pub use psd::{
    build_gram, certify_psd, psd_weight_check, GramMatrix, KernelId, KernelSpec, PsdCertificate,
};
pub use weights::{WeightOrigin, WeightSpec};
