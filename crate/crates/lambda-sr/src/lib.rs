//! Collective spontaneous emission of laser-driven Λ-type three-level
//! emitters.
//!
//! Each emitter has two ground levels |1⟩, |2⟩ coupled by a resonant
//! drive of Rabi strength Ω, and one excited level |3⟩ decaying to them
//! at rates γ₁ ≫ γ₂. When N emitters share the radiation field, pair
//! correlations turn the decay collective, and coherence built on the
//! strong |3⟩→|1⟩ channel is rotated onto the ultraweak |3⟩→|2⟩ channel,
//! which then flashes with the full N² enhancement.
//!
//! The crate provides three solvers for this system plus shared
//! infrastructure:
//!
//! - [`meanfield`]: a ten-correlator cumulant closure that scales to
//!   N ∼ 10⁷, the production engine.
//! - [`oracle`]: the exact master equation on the full 3^N space for
//!   N ≤ 4, the ground truth the closure is audited against.
//! - [`analysis`]: closed-form limits (single-atom decay, two-channel
//!   cascade relation, intensity estimates) and pulse metrics.
//!
//! Supporting modules: [`params`] (raw and nondimensionalized
//! parameters), [`coupling`] (pair kernels from geometry or the Dicke
//! idealization), [`state`] (the tracked correlator set), [`ode`]
//! (adaptive integrators), [`trajectory`] (sampled output),
//! [`dressed`] (laser-dressed decomposition of the emission),
//! [`peaks`] (peak and plateau detection), [`linalg`] (the small dense
//! routines the above need).

pub mod analysis;
pub mod coupling;
pub mod dressed;
pub mod error;
pub mod linalg;
pub mod meanfield;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod peaks;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};

/// Version string recorded in trajectory metadata and run manifests.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
