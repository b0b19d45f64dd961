//! Greedy best-first search and A* parameterized by an explicit heuristic
//! vector, with executable checks of how their behavior depends on that
//! vector: order invariance, behavior counts, a shatterable lower-bound
//! family, and the inconsistency bound on A*'s suboptimality.
//!
//! Core routines are generic over [`Scalar`]. The aliases below fix the
//! exact rational type used for certificates and file I/O.

pub mod distribution;
pub mod generalization;
pub mod inconsistency;
pub mod instance;
pub mod io;
pub mod lab;
pub mod learn;
pub mod optimal;
pub mod scalar;
pub mod search;
pub mod utility;

pub use inconsistency::{check_suboptimality_bound, inconsistency, verify_appendix_ledger};
pub use distribution::{sample_instance, InstanceDistributionSpec};
pub use instance::{HeuristicVector, InstanceDraft, PathInstance, ValidationReport, VertexId};
pub use learn::{minimize_empirical_inconsistency, LearnerConfig, TrainingSet};
pub use optimal::{dijkstra_opt, CanonicalOptimalPath};
pub use scalar::Scalar;
pub use search::{run_astar, run_gbfs, trace_fingerprint, Algorithm, SearchTrace, TraceDigest};

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

pub type Instance = PathInstance<Rational>;
pub type Heuristic = HeuristicVector<Rational>;
pub type Trace = SearchTrace<Rational>;
pub type OptimalPath = CanonicalOptimalPath<Rational>;
