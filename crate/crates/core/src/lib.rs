//! Integer mean-variance portfolio optimization.
//!
//! Maximizes expected return over non-negative integer holdings subject to a
//! budget constraint and a quadratic (covariance) risk cap.  The solver works
//! dually: it computes a Groebner-basis test set for a linear subproblem of
//! the model (budget row, return ceiling, optional tangent cuts on the risk
//! ellipsoid), reduces a corner point to the linear optimum, and then walks
//! the reversal test set down through the fiber tree until a point feasible
//! for the full quadratic problem is reached.
//!
//! Modules:
//! - [`instance`]: problem datum, risk quadratic form, evaluation.
//! - [`convex`]: continuous subproblems (relaxation optimum, bound
//!   tightening, convex-quadratic maximization, tangent cuts, border risk).
//! - [`testset`]: exact lattice kernel, term order, Buchberger completion,
//!   normal-form reduction.
//! - [`search`]: cut loop, best-first reversal tree search, fictitious-bound
//!   restarts, and the top-level driver.
//! - [`oracle`]: brute-force reference implementations for testing.
//! - [`io`]: CSV ingestion of instance and covariance files.
//! - [`report`]: machine-readable solve reports.

pub mod convex;
pub mod fixtures;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod report;
pub mod search;
pub mod testset;

pub use instance::{Instance, Portfolio, QuadraticForm};
pub use report::SolveReport;
pub use search::{discrete_optimum, ApproxHeuristic, SolverConfig};
