//! Online multidimensional packing in the random-order model.
//!
//! The crate bundles three online packing algorithms (vector generalized
//! assignment, its {0,1} special case, and the vector multiple knapsack),
//! the offline baselines they are measured against (exact optimum by
//! enumeration or branch-and-bound, LP relaxation, maximum-weight bipartite
//! matching), an adversarial instance family generator, and a seeded
//! Monte-Carlo harness that estimates empirical competitive ratios.
//!
//! Trial execution is data-parallel through rayon when the default
//! `parallel` feature is enabled; without it everything runs sequentially
//! behind the same API. Reports are bitwise-reproducible either way.

pub mod acceptance;
mod error;
pub mod hardgen;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod matching;
pub mod online;
pub mod oracle;
mod parallel;

pub use error::{Error, Result};
pub use instance::{
    classify_dense, classify_heavy, is_feasible, profit_of, Density, Heaviness, Instance, Packing,
    PackingOption, SplitCriterion, Variant,
};
pub use lp::{greedy_fractional, sample_tentative, solve_relaxation, FractionalSolution};
pub use matching::{build_graph, max_weight_matching, FeasibilityGraph, Matching};
pub use online::{
    default_params, first_fit, formula_params, run_01_vgap, run_vgap, run_vmkp, Phase, PhaseParams,
    RunTrace, TraceRound,
};
pub use oracle::{lp_upper_bound, opt_branch_bound, opt_enumerate, OptMethod, OptResult};
