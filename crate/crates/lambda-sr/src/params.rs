//! Physical parameters and their dimensionless scaling.
//!
//! Each emitter is a three-level Λ system: an excited state |3⟩ decaying to
//! a lower doublet |1⟩, |2⟩ with single-atom rates γ₁, γ₂, while a resonant
//! laser drives |1⟩ ↔ |2⟩ at Rabi frequency Ω. Collective emission in
//! channel s is governed by the rate μ_s γ_s N, where μ_s is a geometric
//! fraction; the interesting regime has a hierarchy between the fast
//! channel-1 scale 1/(μ₁γ₁N) and the slow channel-2 scale 1/(μ₂γ₂N).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical inputs for a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of emitters N.
    pub n_atoms: u64,
    /// Spontaneous rate of |3⟩ → |1⟩ (1/time).
    pub gamma1: f64,
    /// Spontaneous rate of |3⟩ → |2⟩ (1/time).
    pub gamma2: f64,
    /// Geometric fraction for channel 1; collective rate is μ₁γ₁N.
    pub mu1: f64,
    /// Geometric fraction for channel 2; collective rate is μ₂γ₂N.
    pub mu2: f64,
    /// Rabi frequency Ω of the |1⟩ ↔ |2⟩ drive (1/time).
    pub rabi: f64,
    /// Initial excited-state population ⟨S₃₃(0)⟩, at most N.
    pub initial_excited: u64,
}

impl SystemParams {
    /// Fully inverted ensemble with the given rates and drive.
    pub fn inverted(n_atoms: u64, gamma1: f64, gamma2: f64, mu1: f64, mu2: f64, rabi: f64) -> Self {
        Self {
            n_atoms,
            gamma1,
            gamma2,
            mu1,
            mu2,
            rabi,
            initial_excited: n_atoms,
        }
    }

    /// Checks the structural invariants on the raw inputs.
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
        }
        if !(self.gamma1 > 0.0) || !self.gamma1.is_finite() {
            return Err(Error::InvalidParams(format!(
                "gamma1 must be positive and finite, got {}",
                self.gamma1
            )));
        }
        if !(self.gamma2 >= 0.0) || !self.gamma2.is_finite() {
            return Err(Error::InvalidParams(format!(
                "gamma2 must be nonnegative and finite, got {}",
                self.gamma2
            )));
        }
        for (name, mu) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in (0, 1], got {mu}"
                )));
            }
        }
        if !(self.rabi >= 0.0) || !self.rabi.is_finite() {
            return Err(Error::InvalidParams(format!(
                "rabi must be nonnegative and finite, got {}",
                self.rabi
            )));
        }
        if self.initial_excited > self.n_atoms {
            return Err(Error::InvalidParams(format!(
                "initial_excited = {} exceeds n_atoms = {}",
                self.initial_excited, self.n_atoms
            )));
        }
        Ok(())
    }

    /// Number of atoms as a float, the form used by all rate formulas.
    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    /// Whether the weak-channel ordering γ₂ < γ₁ of the superradiant
    /// amplification regime holds (informational).
    pub fn weak_channel_ordering(&self) -> bool {
        self.gamma2 < self.gamma1
    }
}

/// Dimensionless groups and the two collective time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    /// γ₂/γ₁.
    pub r_gamma: f64,
    /// μ₂/μ₁.
    pub r_mu: f64,
    /// Ω/(μ₁γ₁N).
    pub omega_bar: f64,
    /// Fast time unit 1/(μ₁γ₁N).
    pub t_fast: f64,
    /// Slow time unit 1/(μ₂γ₂N).
    pub t_slow: f64,
}

/// Extracts the dimensionless groups from physical parameters.
///
/// With γ₂ = 0 (exact two-level reduction) the slow channel has no time
/// scale, so `t_slow` is infinite and slow-scaled times are unusable;
/// callers must then work in fast-scaled time.
pub fn nondimensionalize(params: &SystemParams) -> ScaledParams {
    let n = params.n();
    let fast_rate = params.mu1 * params.gamma1 * n;
    let slow_rate = params.mu2 * params.gamma2 * n;
    ScaledParams {
        r_gamma: params.gamma2 / params.gamma1,
        r_mu: params.mu2 / params.mu1,
        omega_bar: params.rabi / fast_rate,
        t_fast: 1.0 / fast_rate,
        t_slow: 1.0 / slow_rate,
    }
}

/// Reconstructs physical parameters from the dimensionless groups, fixing
/// the free scale (γ₁) and the counts that scaling does not determine.
pub fn denormalize(
    scaled: &ScaledParams,
    gamma1: f64,
    n_atoms: u64,
    initial_excited: u64,
) -> SystemParams {
    let n = n_atoms as f64;
    let mu1 = 1.0 / (scaled.t_fast * gamma1 * n);
    SystemParams {
        n_atoms,
        gamma1,
        gamma2: scaled.r_gamma * gamma1,
        mu1,
        mu2: scaled.r_mu * mu1,
        rabi: scaled.omega_bar * mu1 * gamma1 * n,
        initial_excited,
    }
}
