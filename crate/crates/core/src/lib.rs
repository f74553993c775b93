//! Grover walks on two infinite graphs built from the 4-cycle.
//!
//! * `TildeC4`: a 4-cycle with semi-infinite lines attached at `0'` and `0`.
//! * `C4Prime`: copies of the 4-cycle joined into a Z-periodic chain.
//!
//! The crate runs the walk exactly on finite windows ([`arc_graph`],
//! [`evolution`]), builds the cycle eigenvectors that trap the walker
//! ([`homology`]), and computes the Bloch bands, velocities and weak-limit
//! densities of the periodic chain ([`spectral`], [`density`]). [`verify`]
//! cross-checks the closed forms against direct simulation.

pub mod arc_graph;
pub mod density;
pub mod evolution;
pub mod homology;
pub mod output;
pub mod presets;
pub mod spectral;
pub mod state_file;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use arc_graph::{
    apply_evolution, Arc, ArcLabel, ArcSpace, GraphKind, Site, VertexId, WalkState,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("window radius must be positive, got {0}")]
    InvalidRadius(usize),
    #[error("window overflow at vertex {vertex}{}", step.map(|s| format!(" (step {s})")).unwrap_or_default())]
    WindowOverflow { step: Option<usize>, vertex: String },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate spectral point at k = {k}: 1 - λ² = {gap:e}")]
    DegeneratePoint { k: f64, gap: f64 },
    #[error("quadrature grid too coarse: mass deficit {deficit:e}")]
    GridTooCoarse { deficit: f64 },
    #[error("state file: {0}")]
    StateFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            Error::WindowOverflow { vertex, .. } => Error::WindowOverflow {
                step: Some(step),
                vertex,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
