//! Pairwise coupling kernels and the per-channel coupling matrices.
//!
//! After orientation averaging, a pair of emitters j, l separated by r_jl
//! couples through channel s with the complex rate
//! γ_jl^(s) = γ_s (ℵ_jl + i Ω_jl), where with x = ω₃ₛ r_jl / c:
//!
//!   ℵ_jl = sin(x)/x,   Ω_jl = −cos(x)/x.
//!
//! The real part drives collective decay, the imaginary part is the
//! collective Lamb shift. On the diagonal x → 0 gives ℵ = 1 while Ω_jl
//! diverges; the divergent single-atom shift is absorbed into the
//! transition frequency, so the diagonal convention is ℵ_jj = 1, Ω_jj = 0.
//! The Dicke limit replaces every pair by ℵ = 1, Ω = 0.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Emitter positions and the two transition wavenumbers ω₃ₛ/c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Emitter positions (length units).
    pub positions: Vec<[f64; 3]>,
    /// Channel-1 wavenumber ω₃₁/c (1/length).
    pub wavenumber1: f64,
    /// Channel-2 wavenumber ω₃₂/c (1/length).
    pub wavenumber2: f64,
}

impl Geometry {
    /// Checks pairwise separations and wavenumber positivity.
    pub fn validate(&self) -> Result<()> {
        if !(self.wavenumber1 > 0.0) || !(self.wavenumber2 > 0.0) {
            return Err(Error::InvalidParams(
                "wavenumbers must be positive".into(),
            ));
        }
        for j in 0..self.positions.len() {
            for l in (j + 1)..self.positions.len() {
                if separation(&self.positions[j], &self.positions[l]) == 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "zero separation between emitters {j} and {l}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn wavenumber(&self, channel: Channel) -> f64 {
        match channel {
            Channel::One => self.wavenumber1,
            Channel::Two => self.wavenumber2,
        }
    }
}

/// Decay channel selector: 1 is |3⟩ → |1⟩, 2 is |3⟩ → |2⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    One,
    Two,
}

/// Result of evaluating the orientation-averaged pair kernel at phase x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairCoupling {
    /// x = 0: same emitter. ℵ = 1; the Lamb part is a modeled divergence
    /// and the caller must substitute the diagonal convention (0).
    Diagonal,
    /// x > 0: finite pair kernel values.
    OffDiagonal {
        /// sin(x)/x.
        aleph: f64,
        /// −cos(x)/x.
        lamb: f64,
    },
}

/// Evaluates the pair kernel (ℵ, Ω_jl) at dimensionless phase x ≥ 0.
pub fn pairwise_coupling(x: f64) -> PairCoupling {
    if x == 0.0 {
        PairCoupling::Diagonal
    } else {
        PairCoupling::OffDiagonal {
            aleph: x.sin() / x,
            lamb: -x.cos() / x,
        }
    }
}

/// How the pair couplings entering a solver are specified.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingModel {
    /// Dicke limit: ℵ_jl = 1 and Ω_jl = 0 for every pair.
    Dicke,
    /// Kernels evaluated from emitter positions.
    FromGeometry(Geometry),
    /// Explicit symmetric kernel matrices per channel, for controlled
    /// tests (for example fully decoupled pairs). Diagonals are ignored
    /// and replaced by the (1, 0) convention.
    Explicit {
        aleph1: Array2<f64>,
        lamb1: Array2<f64>,
        aleph2: Array2<f64>,
        lamb2: Array2<f64>,
    },
}

impl CouplingModel {
    /// Dimensionless kernel matrices (ℵ_jl, Ω_jl) for one channel.
    pub fn kernel(&self, channel: Channel, n_atoms: usize) -> Result<(Array2<f64>, Array2<f64>)> {
        let mut aleph = Array2::<f64>::eye(n_atoms);
        let mut lamb = Array2::<f64>::zeros((n_atoms, n_atoms));
        match self {
            CouplingModel::Dicke => {
                aleph.fill(1.0);
            }
            CouplingModel::FromGeometry(geom) => {
                if geom.positions.len() != n_atoms {
                    return Err(Error::InvalidParams(format!(
                        "geometry holds {} positions but n_atoms = {n_atoms}",
                        geom.positions.len()
                    )));
                }
                geom.validate()?;
                let k = geom.wavenumber(channel);
                for j in 0..n_atoms {
                    for l in (j + 1)..n_atoms {
                        let x = k * separation(&geom.positions[j], &geom.positions[l]);
                        match pairwise_coupling(x) {
                            PairCoupling::OffDiagonal { aleph: a, lamb: om } => {
                                aleph[(j, l)] = a;
                                aleph[(l, j)] = a;
                                lamb[(j, l)] = om;
                                lamb[(l, j)] = om;
                            }
                            PairCoupling::Diagonal => unreachable!("validated r > 0"),
                        }
                    }
                }
            }
            CouplingModel::Explicit {
                aleph1,
                lamb1,
                aleph2,
                lamb2,
            } => {
                let (a, om) = match channel {
                    Channel::One => (aleph1, lamb1),
                    Channel::Two => (aleph2, lamb2),
                };
                if a.dim() != (n_atoms, n_atoms) || om.dim() != (n_atoms, n_atoms) {
                    return Err(Error::InvalidParams(
                        "explicit kernel matrices must be n_atoms x n_atoms".into(),
                    ));
                }
                for j in 0..n_atoms {
                    for l in 0..n_atoms {
                        if j != l {
                            aleph[(j, l)] = a[(j, l)];
                            lamb[(j, l)] = om[(j, l)];
                        }
                    }
                }
            }
        }
        Ok((aleph, lamb))
    }
}

/// Complex coupling matrix γ_jl^(s) = γ_s (ℵ_jl + i Ω_jl) for one channel,
/// with the diagonal set to the bare rate γ_s (zero Lamb part).
pub fn coupling_matrix(
    model: &CouplingModel,
    channel: Channel,
    gamma: f64,
    n_atoms: usize,
) -> Result<Array2<Complex64>> {
    let (aleph, lamb) = model.kernel(channel, n_atoms)?;
    let mut out = Array2::<Complex64>::zeros((n_atoms, n_atoms));
    for j in 0..n_atoms {
        for l in 0..n_atoms {
            out[(j, l)] = Complex64::new(gamma * aleph[(j, l)], gamma * lamb[(j, l)]);
        }
    }
    Ok(out)
}

fn separation(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}
