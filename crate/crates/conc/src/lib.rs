//! Concentration bounds for suprema of empirical processes with dependent
//! data, and the statistical-learning guarantees they imply.
//!
//! The library evaluates a non-asymptotic deviation inequality for
//! `sup_θ |(1/T) Σ_t g(Z_t, θ) − E g(Z_t, θ)|` when {Z_t} is β-mixing rather
//! than independent. Its ingredients each live in their own module:
//!
//! - [`subweibull`]: ψ_α quasi-norm calculus — norm estimation, tail and
//!   moment bounds, and the explicit deviation constants for sums.
//! - [`chaining`]: covering numbers, admissible partition sequences, and the
//!   Talagrand functionals γ_α (exact, greedy, and entropy-integral routes).
//! - [`mixing`]: finite-state Markov chains with exactly computable β-mixing
//!   coefficients, an AR(1) driver, and analytic decay envelopes.
//! - [`coupling`]: the blocking scheme and maximal-coupling construction of
//!   independent block copies.
//! - [`bounds`]: the main inequality (compact and decomposed forms), the
//!   effective-sample-size rule, and the ERM risk bounds.
//! - [`erm`]: single-layer perceptron regression under empirical risk
//!   minimization, with the condition-constant extraction for this class.
//! - [`harness`]: reproducible experiments and CSV/JSON emission, backing
//!   the `conc` command-line tool.
//!
//! The companion guide under `book/` walks through the same material
//! chapter by chapter; its code listings compile as doctests of this crate.

pub mod bounds;
pub mod chaining;
pub mod coupling;
pub mod erm;
pub mod error;
pub mod harness;
pub mod mixing;
pub mod rng;
pub mod subweibull;

pub use error::{Error, Result};

// Keep the guide's code listings compiling: each chapter is attached as a
// doc comment here, so `cargo test --doc` runs every snippet in book/src.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }

    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(SubWeibull, "../../../book/src/sub-weibull.md");
    chapter!(Chaining, "../../../book/src/chaining.md");
    chapter!(Mixing, "../../../book/src/mixing.md");
    chapter!(BlockingCoupling, "../../../book/src/blocking-coupling.md");
    chapter!(Bounds, "../../../book/src/bounds.md");
    chapter!(Erm, "../../../book/src/erm.md");
    chapter!(Experiments, "../../../book/src/experiments.md");
    chapter!(Readme, "../../../README.md");
}
