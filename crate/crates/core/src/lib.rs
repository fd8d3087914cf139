//! ℓ0-regularized optimization `min f(v) + ρ‖x‖₀  s.t. v ∈ X` through an
//! exact penalty: the counting term is replaced by `Σ p(y_i)` plus the
//! complementarity coupling `α|x|ᵀy`, and `α` is increased until `|x| ∘ y`
//! vanishes.
//!
//! ```no_run
//! use l0pen::{exact_penalty_solve, gen_portfolio, make_quadratic, portfolio_problem};
//! use l0pen::{InnerSolver, OuterOptions, SpgOptions};
//!
//! let inst = gen_portfolio(10, 0).unwrap();
//! let problem = portfolio_problem(&inst).unwrap();
//! let family = make_quadratic(inst.rho).unwrap();
//! let report = exact_penalty_solve(
//!     &problem,
//!     &family,
//!     &inst.start_point(),
//!     InnerSolver::Spg,
//!     &SpgOptions::default(),
//!     &OuterOptions::default(),
//! )
//! .unwrap();
//! println!("{} nonzeros, value {}", report.l0, report.spo_value);
//! ```

pub mod error;
pub mod geometry;
pub mod penalty;
pub mod problems;
pub mod solvers;
pub mod spo;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{
    prox_sp, project_abs_epigraph, project_portfolio, BoxSet, BudgetSet, FreeSet, Projector,
    RowBallSet,
};
pub use penalty::{
    check_axioms, make_huber, make_quadratic, make_shifted_quadratic, CoordinatePenalty,
    FamilySpec, PenaltyFamily,
};
pub use problems::{
    dictionary_problem, gen_dictionary, gen_portfolio, instance_hash, load_instance,
    portfolio_problem, save_instance, DictionaryInstance, Instance, InstanceError,
    PortfolioInstance,
};
pub use solvers::{
    exact_penalty_solve, exact_penalty_solve_observed, threshold_solve, ComplementarityMeasure,
    InnerSolver, OuterOptions, Protocol, SpgOptions, ThresholdKind,
};
pub use spo::{
    l0_norm, penalty_objective, spo_objective, y_star_from_x, FnObjective, PenaltyIterate,
    SmoothObjective, SolveReport, SolveStatus, SpoProblem,
};
pub use verify::{certificate, complementarity, spo_bruteforce, tnlp_stationarity};
