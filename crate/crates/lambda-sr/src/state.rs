//! Symmetric correlator state for the collective three-level system.
//!
//! The dynamics close on ten real degrees of freedom: three collective
//! populations, the complex ground-doublet coherence, two real same-channel
//! pair correlators, the complex cross-channel pair correlator, and the
//! real doublet pair correlator. All atoms are treated as exchangeable, so
//! single sums scale like N and pair sums like N².

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of real components in the packed state vector.
pub const DIM: usize = 10;

/// Collective expectation values in raw (unscaled) units.
///
/// Populations are sums over atoms, `p_a = Σ_j ⟨S_aa^(j)⟩`, so they add up
/// to the atom number. Pair correlators sum over ordered pairs `j ≠ l`:
/// `q11 = Σ ⟨S_31 S_13⟩`, `q22 = Σ ⟨S_32 S_23⟩`, `q12 = Σ ⟨S_31 S_23⟩`,
/// and `w12 = Σ ⟨S_12 S_21⟩`. The superradiant emission rates into the two
/// channels are proportional to `q11` and `q22`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorState {
    pub n_atoms: u64,
    /// Ground-level population (lower doublet state coupled to channel 1).
    pub p1: f64,
    /// Metastable-level population (coupled to channel 2).
    pub p2: f64,
    /// Excited-level population.
    pub p3: f64,
    /// Collective coherence between the two lower levels, `Σ_j ⟨S_12^(j)⟩`.
    pub c12: Complex64,
    /// Channel-1 pair correlator; `q11/N²` is the scaled channel-1 intensity.
    pub q11: f64,
    /// Channel-2 pair correlator; `q22/N²` is the scaled channel-2 intensity.
    pub q22: f64,
    /// Cross-channel pair correlator `Σ_{j≠l} ⟨S_31^(j) S_23^(l)⟩`.
    pub q12: Complex64,
    /// Doublet pair correlator `Σ_{j≠l} ⟨S_12^(j) S_21^(l)⟩`.
    pub w12: f64,
}

impl CorrelatorState {
    /// State with every atom in the excited level and no correlations.
    pub fn fully_excited(n_atoms: u64) -> Self {
        Self {
            n_atoms,
            p1: 0.0,
            p2: 0.0,
            p3: n_atoms as f64,
            c12: Complex64::new(0.0, 0.0),
            q11: 0.0,
            q22: 0.0,
            q12: Complex64::new(0.0, 0.0),
            w12: 0.0,
        }
    }

    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    /// Packs the state into the normalized real vector used by the
    /// integrator: populations per atom, coherence per atom, pair
    /// correlators per atom pair (N² scaling).
    pub fn to_normalized(&self) -> [f64; DIM] {
        let n = self.n();
        let n2 = n * n;
        [
            self.p1 / n,
            self.p2 / n,
            self.p3 / n,
            self.c12.re / n,
            self.c12.im / n,
            self.q11 / n2,
            self.q22 / n2,
            self.q12.re / n2,
            self.q12.im / n2,
            self.w12 / n2,
        ]
    }

    /// Inverse of [`to_normalized`](Self::to_normalized).
    pub fn from_normalized(n_atoms: u64, y: &[f64]) -> Self {
        assert_eq!(y.len(), DIM);
        let n = n_atoms as f64;
        let n2 = n * n;
        Self {
            n_atoms,
            p1: y[0] * n,
            p2: y[1] * n,
            p3: y[2] * n,
            c12: Complex64::new(y[3] * n, y[4] * n),
            q11: y[5] * n2,
            q22: y[6] * n2,
            q12: Complex64::new(y[7] * n2, y[8] * n2),
            w12: y[9] * n2,
        }
    }

    /// Checks physical plausibility: finite entries, populations summing to
    /// the atom number, and pair correlators above their operator bounds.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.n_atoms == 0 {
            return Err(Error::InvalidState("atom number must be positive".into()));
        }
        let fields = [
            self.p1, self.p2, self.p3, self.c12.re, self.c12.im, self.q11, self.q22,
            self.q12.re, self.q12.im, self.w12,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("state contains non-finite values".into()));
        }
        let slack = 1e-6 * n.max(1.0);
        let total = self.p1 + self.p2 + self.p3;
        if (total - n).abs() > slack {
            return Err(Error::InvalidState(format!(
                "populations sum to {total}, expected {n}"
            )));
        }
        for (label, p) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3)] {
            if p < -slack || p > n + slack {
                return Err(Error::InvalidState(format!(
                    "population {label} = {p} outside [0, {n}]"
                )));
            }
        }
        // Σ_j S_s3^(j) applied twice shows ⟨A†A⟩ = (channel population
        // terms) + q_ss ≥ 0, which bounds the pair sums from below.
        for (label, q) in [("q11", self.q11), ("q22", self.q22)] {
            if q < -self.p3 - slack * n {
                return Err(Error::InvalidState(format!(
                    "pair correlator {label} = {q} below operator bound {}",
                    -self.p3
                )));
            }
        }
        Ok(())
    }
}

/// Scaled emission intensities `(I1, I2) = (q11/N², q22/N²)`.
///
/// Multiplying by `μ_s γ_s N²` restores the dimensional photon emission
/// rate of channel `s`; the scaled form is what the trajectory records.
pub fn intensities(state: &CorrelatorState) -> (f64, f64) {
    let n2 = state.n() * state.n();
    (state.q11 / n2, state.q22 / n2)
}
