//! Projective expected utility.
//!
//! Lotteries are nonnegative unit vectors `x`, with outcome probabilities
//! `x_i²`, and preferences are represented by a quadratic form `x' U x` for
//! a symmetric payoff matrix `U`. A diagonal `U` is classical expected
//! utility; off-diagonal entries price the mixing of outcomes, which is
//! enough to reproduce the Allais and Ellsberg choice patterns.
//!
//! Modules:
//! - [`linalg`]: symmetric matrices and a Jacobi eigensolver.
//! - [`lottery`]: lotteries, bases and Born-rule risk profiles.
//! - [`peu`]: utility, spectral construction, premiums, risk attitudes.
//! - [`subjective`]: states, beliefs, embeddings and acts.
//! - [`equilibrium`]: finite games, best responses and equilibrium search.
//! - [`triangle`]: utility rasters over the probability triangle.

pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod lottery;
pub mod peu;
pub mod subjective;
pub mod triangle;

pub use equilibrium::{
    best_response, expected_payoff_matrix, peu_payoff, solve, solve_from, verify, BestResponse,
    EquilibriumResult, FiniteGame, SolveError, SolveOptions, Strategy, StrategyProfile,
    Verification,
};
pub use error::{PeuError, Result};
pub use linalg::{eigh, inner, reconstruct, SpectralDecomposition, SymMatrix};
pub use lottery::{
    mix_profiles, risk_profile, simplex_to_sphere, sphere_to_simplex, Basis, Lottery, RiskProfile,
};
pub use peu::{
    classify, compare, from_spectrum, is_vnm_equivalent, premium, utility, AllaisScenario,
    Attitude, PayoffMatrix, Preference,
};
pub use subjective::{
    act_profile, act_utility, check_nonconstant_eigenvalues, ellsberg_scenario, mix_acts, Act,
    ActProfile, Belief, EllsbergScenario, Embedding, StateSpace,
};
pub use triangle::{triangle_raster, TrianglePoint};
