//! Exact master-equation solver on the full 3^N Hilbert space (N ≤ 4).
//!
//! The density matrix evolves under
//!
//!   ρ̇ = −i[H, ρ] + Σ_s Σ_{jl} 2 γ_s ℵ_jl [S_{s3}^(l) ρ S_{3s}^(j)
//!        − ½{S_{3s}^(j) S_{s3}^(l), ρ}]
//!
//! with H = Ω Σ_j (S₁₂ + S₂₁)^(j) + Σ_s Σ_{j≠l} γ_s Ω_jl S_{3s}^(j) S_{s3}^(l),
//! where ℵ_jl and Ω_jl come from the pair-coupling kernel (Dicke limit:
//! ℵ = 1, Ω_jl = 0). The symmetric kernel ℵ is eigendecomposed into
//! collective jump modes, so one right-hand-side evaluation costs a few
//! dim×dim matrix products instead of N² of them.
//!
//! This solver is the ground truth the mean-field closure is audited
//! against; it prioritizes transparency over scale and refuses N > 4.

use ndarray::Array2;
use num_complex::Complex64;

use crate::coupling::{Channel, CouplingModel};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, hermitian_eigenvalues};
use crate::ode::{integrate, Method, Rhs, Tolerances};
use crate::params::SystemParams;
use crate::state::CorrelatorState;

/// Largest exactly solvable ensemble (dim 81).
pub const MAX_ATOMS: usize = 4;

/// Hilbert-space dimension 3^N.
pub fn hilbert_dim(n_atoms: usize) -> usize {
    3usize.pow(n_atoms as u32)
}

fn check_capacity(n_atoms: usize) -> Result<()> {
    if n_atoms == 0 {
        return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
    }
    if n_atoms > MAX_ATOMS {
        return Err(Error::Capacity {
            what: "exactly solvable atoms",
            max: MAX_ATOMS,
            got: n_atoms,
        });
    }
    Ok(())
}

fn check_level(level: u8) -> Result<usize> {
    if (1..=3).contains(&level) {
        Ok((level - 1) as usize)
    } else {
        Err(Error::InvalidParams(format!(
            "level index must be 1, 2, or 3, got {level}"
        )))
    }
}

/// Level of atom `atom` encoded in basis index `index` (0-based digits;
/// atom 0 is the least significant base-3 digit).
fn digit(index: usize, atom: usize) -> usize {
    index / 3usize.pow(atom as u32) % 3
}

/// Trace-one Hermitian state of the N-atom system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_atoms: usize,
    pub matrix: Array2<Complex64>,
}

impl DensityMatrix {
    /// Pure product state with atom j in `levels[j]` (1-based levels).
    pub fn product_state(levels: &[u8]) -> Result<Self> {
        check_capacity(levels.len())?;
        let mut index = 0usize;
        for (atom, &level) in levels.iter().enumerate() {
            index += check_level(level)? * 3usize.pow(atom as u32);
        }
        let dim = hilbert_dim(levels.len());
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_atoms: levels.len(),
            matrix: m,
        })
    }

    /// Every atom in the excited level |3⟩.
    pub fn all_excited(n_atoms: usize) -> Result<Self> {
        Self::product_state(&vec![3u8; n_atoms])
    }

    /// Pure state from a normalized amplitude vector.
    pub fn from_pure(n_atoms: usize, amplitudes: &[Complex64]) -> Result<Self> {
        check_capacity(n_atoms)?;
        let dim = hilbert_dim(n_atoms);
        if amplitudes.len() != dim {
            return Err(Error::InvalidState(format!(
                "amplitude vector has length {}, expected {dim}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "amplitudes have norm² = {norm}, expected 1"
            )));
        }
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        for i in 0..dim {
            for k in 0..dim {
                m[(i, k)] = amplitudes[i] * amplitudes[k].conj();
            }
        }
        Ok(Self { n_atoms, matrix: m })
    }

    /// The state ρ = I/3^N.
    pub fn maximally_mixed(n_atoms: usize) -> Result<Self> {
        check_capacity(n_atoms)?;
        let dim = hilbert_dim(n_atoms);
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            m[(i, i)] = w;
        }
        Ok(Self { n_atoms, matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Validates trace 1 (1e-10), Hermiticity (1e-12 elementwise), and
    /// positivity (minimum eigenvalue ≥ −1e-8).
    pub fn validate(&self) -> Result<()> {
        if self.dim() != hilbert_dim(self.n_atoms) || self.matrix.ncols() != self.dim() {
            return Err(Error::InvalidState(format!(
                "density matrix shape {:?} does not match {} atoms",
                self.matrix.dim(),
                self.n_atoms
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace = {tr}, expected 1")));
        }
        let mut asym = 0.0_f64;
        for i in 0..self.dim() {
            for k in i..self.dim() {
                asym = asym.max((self.matrix[(i, k)] - self.matrix[(k, i)].conj()).norm());
            }
        }
        if asym > 1e-12 {
            return Err(Error::InvalidState(format!(
                "Hermiticity violated by {asym:.3e}"
            )));
        }
        let min_eig = hermitian_eigenvalues(&self.matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// State with atoms relabeled by `perm` (atom j of the result is atom
    /// perm[j] of the input). Used to test permutation symmetry.
    pub fn permute_atoms(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_atoms {
            return Err(Error::InvalidParams(
                "permutation length must equal n_atoms".into(),
            ));
        }
        let dim = self.dim();
        let map = |i: usize| -> usize {
            (0..self.n_atoms)
                .map(|atom| digit(i, perm[atom]) * 3usize.pow(atom as u32))
                .sum()
        };
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        for i in 0..dim {
            for k in 0..dim {
                m[(map(i), map(k))] = self.matrix[(i, k)];
            }
        }
        Ok(Self {
            n_atoms: self.n_atoms,
            matrix: m,
        })
    }
}

/// Dense single-atom operator |a⟩⟨b| on one atom (1-based levels).
pub fn single_atom_op(n_atoms: usize, atom: usize, a: u8, b: u8) -> Result<Array2<Complex64>> {
    check_capacity(n_atoms)?;
    if atom >= n_atoms {
        return Err(Error::InvalidParams(format!(
            "atom index {atom} out of range for {n_atoms} atoms"
        )));
    }
    let (ia, ib) = (check_level(a)?, check_level(b)?);
    let dim = hilbert_dim(n_atoms);
    let stride = 3usize.pow(atom as u32);
    let mut m = Array2::<Complex64>::zeros((dim, dim));
    for col in 0..dim {
        if digit(col, atom) == ib {
            let row = (col as isize + (ia as isize - ib as isize) * stride as isize) as usize;
            m[(row, col)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(m)
}

/// Collective operator Σ_j S_ab^(j).
pub fn collective_op(n_atoms: usize, a: u8, b: u8) -> Result<Array2<Complex64>> {
    let dim = hilbert_dim(n_atoms);
    let mut acc = Array2::<Complex64>::zeros((dim, dim));
    for atom in 0..n_atoms {
        acc = acc + single_atom_op(n_atoms, atom, a, b)?;
    }
    Ok(acc)
}

/// Generator of the master equation, with the kernel folded into
/// collective jump modes.
#[derive(Debug)]
pub struct Liouvillian {
    n_atoms: usize,
    dim: usize,
    /// Drive plus collective Lamb shifts.
    hamiltonian: Array2<Complex64>,
    /// (rate, J, J†) per collective decay mode; rate = 2 γ_s λ_mode.
    jumps: Vec<(f64, Array2<Complex64>, Array2<Complex64>)>,
    /// K = Σ rate J†J, giving the anticommutator part −½{K, ρ}.
    damping: Array2<Complex64>,
}

/// Builds the exact generator for `params` under the given coupling model.
///
/// The geometric fractions μ₁, μ₂ are a mean-field device (effective
/// kernel weight of the j≠l sums) and do not enter here; sub-Dicke
/// geometry effects enter through the explicit kernel instead.
pub fn build_liouvillian(params: &SystemParams, coupling: &CouplingModel) -> Result<Liouvillian> {
    params.validate()?;
    let n_atoms = params.n_atoms as usize;
    check_capacity(n_atoms)?;
    let dim = hilbert_dim(n_atoms);

    let mut hamiltonian = Array2::<Complex64>::zeros((dim, dim));
    if params.rabi != 0.0 {
        let drive = collective_op(n_atoms, 1, 2)? + collective_op(n_atoms, 2, 1)?;
        hamiltonian = hamiltonian + drive.mapv(|z| z * params.rabi);
    }

    let mut jumps = Vec::new();
    let mut damping = Array2::<Complex64>::zeros((dim, dim));

    for (channel, gamma, upper_to) in [
        (Channel::One, params.gamma1, 1u8),
        (Channel::Two, params.gamma2, 2u8),
    ] {
        if gamma == 0.0 {
            continue;
        }
        let (aleph, lamb) = coupling.kernel(channel, n_atoms)?;

        // Lamb-shift Hamiltonian Σ_{j≠l} γ Ω_jl S_{3s}^(j) S_{s3}^(l).
        for j in 0..n_atoms {
            for l in 0..n_atoms {
                if j == l || lamb[(j, l)] == 0.0 {
                    continue;
                }
                let op = single_atom_op(n_atoms, j, 3, upper_to)?
                    .dot(&single_atom_op(n_atoms, l, upper_to, 3)?);
                hamiltonian = hamiltonian + op.mapv(|z| z * (gamma * lamb[(j, l)]));
            }
        }

        // Collective jump modes from the symmetric kernel ℵ = Σ λ w wᵀ:
        // Σ_{jl} 2γ ℵ_jl S_{s3}^(l) ρ S_{3s}^(j) = Σ_m 2γλ_m J_m ρ J_m†
        // with J_m = Σ_l w_m[l] S_{s3}^(l).
        let aleph_c = aleph.mapv(|x| Complex64::new(x, 0.0));
        let (eigvals, eigvecs) = hermitian_eigensystem(&aleph_c);
        for (m, &lam) in eigvals.iter().enumerate() {
            if lam.abs() < 1e-13 {
                continue;
            }
            let mut jump = Array2::<Complex64>::zeros((dim, dim));
            for l in 0..n_atoms {
                let w = eigvecs[(l, m)];
                if w.norm() < 1e-15 {
                    continue;
                }
                jump = jump + single_atom_op(n_atoms, l, upper_to, 3)?.mapv(|z| z * w);
            }
            let rate = 2.0 * gamma * lam;
            let jump_dag = dagger(&jump);
            damping = damping + jump_dag.dot(&jump).mapv(|z| z * rate);
            jumps.push((rate, jump, jump_dag));
        }
    }

    Ok(Liouvillian {
        n_atoms,
        dim,
        hamiltonian,
        jumps,
        damping,
    })
}

fn dagger(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Applies ρ̇ = L[ρ].
    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let h_rho = self.hamiltonian.dot(rho);
        let rho_h = rho.dot(&self.hamiltonian);
        let k_rho = self.damping.dot(rho);
        let rho_k = rho.dot(&self.damping);
        let mut out = (h_rho - rho_h).mapv(|z| -i * z) - (k_rho + rho_k).mapv(|z| 0.5 * z);
        for (rate, jump, jump_dag) in &self.jumps {
            out = out + jump.dot(rho).dot(jump_dag).mapv(|z| z * *rate);
        }
        out
    }

    /// Dense superoperator matrix acting on row-major vec(ρ). Guarded to
    /// N ≤ 3 (729×729); N = 4 would need a 6561² dense matrix that the
    /// matrix-free [`apply`](Self::apply) path makes unnecessary.
    pub fn to_dense_matrix(&self) -> Result<Array2<Complex64>> {
        if self.n_atoms > 3 {
            return Err(Error::Capacity {
                what: "dense superoperator atoms",
                max: 3,
                got: self.n_atoms,
            });
        }
        let d = self.dim;
        let d2 = d * d;
        let mut sup = Array2::<Complex64>::zeros((d2, d2));
        let mut basis = Array2::<Complex64>::zeros((d, d));
        for col in 0..d2 {
            basis[(col / d, col % d)] = Complex64::new(1.0, 0.0);
            let image = self.apply(&basis);
            for row in 0..d2 {
                sup[(row, col)] = image[(row / d, row % d)];
            }
            basis[(col / d, col % d)] = Complex64::new(0.0, 0.0);
        }
        Ok(sup)
    }
}

struct LiouvilleRhs<'a> {
    l: &'a Liouvillian,
}

fn pack(rho: &Array2<Complex64>, out: &mut [f64]) {
    for (k, z) in rho.iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn unpack(y: &[f64], dim: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((dim, dim), |(i, k)| {
        let idx = 2 * (i * dim + k);
        Complex64::new(y[idx], y[idx + 1])
    })
}

impl Rhs for LiouvilleRhs<'_> {
    fn dim(&self) -> usize {
        2 * self.l.dim * self.l.dim
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        let rho = unpack(y, self.l.dim);
        let drho = self.l.apply(&rho);
        pack(&drho, dydt);
    }
}

/// Evolves `rho0` (the state at `t_grid[0]`) through the master equation,
/// returning the state at every grid time. Every output is validated
/// against the density-matrix invariants; a violation is a hard error
/// because the generator preserves them exactly.
pub fn evolve(
    rho0: &DensityMatrix,
    liouvillian: &Liouvillian,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<Vec<DensityMatrix>> {
    rho0.validate()?;
    if rho0.dim() != liouvillian.dim {
        return Err(Error::InvalidState(format!(
            "state dimension {} does not match generator dimension {}",
            rho0.dim(),
            liouvillian.dim
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidParams("time grid is empty".into()));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParams(
                "time grid must be strictly increasing".into(),
            ));
        }
    }
    let span = (t_grid[0], *t_grid.last().unwrap());
    let mut y0 = vec![0.0; 2 * rho0.dim() * rho0.dim()];
    pack(&rho0.matrix, &mut y0);

    let states = if span.1 > span.0 {
        let rhs = LiouvilleRhs { l: liouvillian };
        let sol = integrate(&rhs, &y0, span, tol, t_grid, Method::Rk45)?;
        sol.states
    } else {
        vec![y0]
    };

    let mut out = Vec::with_capacity(states.len());
    for (y, &t) in states.iter().zip(t_grid) {
        let dm = DensityMatrix {
            n_atoms: liouvillian.n_atoms,
            matrix: unpack(y, liouvillian.dim),
        };
        dm.validate().map_err(|e| {
            Error::Integration {
                t_last: t,
                reason: format!("state invariant violated at output: {e}"),
            }
        })?;
        out.push(dm);
    }
    Ok(out)
}

/// Fixed-step Taylor propagator cross-check: advances `rho0` by `t` in
/// `substeps` equal steps, each summing the exponential series of the
/// (linear) generator to machine precision. Independent of the adaptive
/// integrator; used to harden [`evolve`].
pub fn propagate_fixed(
    rho0: &DensityMatrix,
    liouvillian: &Liouvillian,
    t: f64,
    substeps: usize,
) -> Result<DensityMatrix> {
    rho0.validate()?;
    if substeps == 0 || !(t >= 0.0) {
        return Err(Error::InvalidParams(
            "propagator needs t >= 0 and at least one substep".into(),
        ));
    }
    let h = t / substeps as f64;
    let mut rho = rho0.matrix.clone();
    for _ in 0..substeps {
        let mut term = rho.clone();
        let mut acc = rho.clone();
        let base: f64 = rho.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for k in 1..=60 {
            term = liouvillian.apply(&term).mapv(|z| z * (h / k as f64));
            acc = acc + &term;
            let size: f64 = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if size <= 1e-18 * base.max(1e-300) {
                break;
            }
        }
        rho = acc;
    }
    Ok(DensityMatrix {
        n_atoms: liouvillian.n_atoms,
        matrix: rho,
    })
}

/// Observable request against a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorSpec {
    /// ⟨S_aa^(j)⟩ for one atom, or the collective sum over all atoms.
    Population { level: u8, atom: Option<usize> },
    /// ⟨S_ab^(j)⟩ for one atom, or the collective sum.
    Transition { from: u8, to: u8, atom: Option<usize> },
    /// Two-operator pair sum Σ_{j≠l} ⟨S_{a1 a2}^(j) S_{b1 b2}^(l)⟩.
    PairSum { first: (u8, u8), second: (u8, u8) },
}

/// Evaluates ⟨O⟩ = Tr[ρ O] for the requested operator.
pub fn expectation(rho: &DensityMatrix, spec: OperatorSpec) -> Result<Complex64> {
    let n = rho.n_atoms;
    let op = match spec {
        OperatorSpec::Population { level, atom } => match atom {
            Some(j) => single_atom_op(n, j, level, level)?,
            None => collective_op(n, level, level)?,
        },
        OperatorSpec::Transition { from, to, atom } => match atom {
            Some(j) => single_atom_op(n, j, from, to)?,
            None => collective_op(n, from, to)?,
        },
        OperatorSpec::PairSum { first, second } => {
            // Σ_{j≠l} A^(j) B^(l) = (Σ_j A^(j))(Σ_l B^(l)) − Σ_j A^(j)B^(j),
            // and on one atom S_ab S_cd = δ_bc S_ad.
            let a = collective_op(n, first.0, first.1)?;
            let b = collective_op(n, second.0, second.1)?;
            let mut op = a.dot(&b);
            if first.1 == second.0 {
                op = op - collective_op(n, first.0, second.1)?;
            }
            op
        }
    };
    if op.nrows() != rho.dim() {
        return Err(Error::InvalidState(format!(
            "operator dimension {} does not match state dimension {}",
            op.nrows(),
            rho.dim()
        )));
    }
    // Tr[ρ O] = Σ_{ik} ρ[i,k] O[k,i].
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..rho.dim() {
        for k in 0..rho.dim() {
            tr += rho.matrix[(i, k)] * op[(k, i)];
        }
    }
    Ok(tr)
}

/// Real-valued expectation for Hermitian specs; asserts the imaginary
/// residue is below 1e-10 and truncates it.
pub fn expectation_real(rho: &DensityMatrix, spec: OperatorSpec) -> Result<f64> {
    let z = expectation(rho, spec)?;
    if z.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "expected a real expectation value, got imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// All collective correlators tracked by the mean-field closure, read off
/// the exact state. This is the bridge for mean-field audits.
pub fn collective_correlators(rho: &DensityMatrix) -> Result<CorrelatorState> {
    let pop = |level| expectation_real(rho, OperatorSpec::Population { level, atom: None });
    let pair = |first, second| expectation(rho, OperatorSpec::PairSum { first, second });
    Ok(CorrelatorState {
        n_atoms: rho.n_atoms as u64,
        p1: pop(1)?,
        p2: pop(2)?,
        p3: pop(3)?,
        c12: expectation(
            rho,
            OperatorSpec::Transition {
                from: 1,
                to: 2,
                atom: None,
            },
        )?,
        q11: real_part_checked(pair((3, 1), (1, 3))?)?,
        q22: real_part_checked(pair((3, 2), (2, 3))?)?,
        q12: pair((3, 1), (2, 3))?,
        w12: real_part_checked(pair((1, 2), (2, 1))?)?,
    })
}

fn real_part_checked(z: Complex64) -> Result<f64> {
    if z.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "pair correlator should be real, got imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}
