//! Error type shared by all modules of the crate.

/// Crate-wide error enumeration.
///
/// Variants mirror the failure modes of the library surface: shape mismatches,
/// normalization problems, inputs outside an operation's mathematical domain,
/// and infeasibility of a transportation instance (which would falsify the
/// simulation theorem and is therefore surfaced loudly, never clipped).
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("normalization failure: {0}")]
    Normalization(String),
    #[error("state is not pure: second-largest eigenvalue {0:.3e} exceeds 1e-9")]
    Purity(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("transportation infeasible: unmet demand {unmet:.3e}; violating output set {witness:?} has demand {demand:.12} < supply {supply:.12}")]
    Infeasible {
        unmet: f64,
        /// Hall-condition witness: output indices S (0-based) with a_j(S) < P(S^4).
        witness: Vec<usize>,
        demand: f64,
        supply: f64,
    },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
