//! Mean-field dynamics of N laser-driven Λ emitters.
//!
//! The collective master equation is closed at the two-particle level by
//! factorizing three-particle correlators, leaving ten real degrees of
//! freedom (see [`CorrelatorState`]). Internally everything is integrated
//! in normalized form (populations per atom, pair correlators per atom
//! pair) on the fast collective time τ = μ₁γ₁N·t, where all rates are
//! order one and the weak channel enters only through the ratios
//! r_γ = γ₂/γ₁ and g = (μ₂γ₂)/(μ₁γ₁).
//!
//! Structure of the closed system (normalized variables u_α = p_α/N,
//! ĉ = c12/N, v_ss = q_ss/N², v12 = q12/N², ŵ = w12/N²):
//!
//! - Populations exchange via the drive (2Ω̄ terms), single-atom decay
//!   (b_s = 2γ_s in τ units), and collective emission (2v_ss terms).
//! - Pair correlators grow from spontaneous pair sources obtained by
//!   factorizing only the untracked moments of the exact jump expansion,
//!   keeping the tracked ones: the channel-s source is
//!   g_s·[(2f1/N)u3² − (4/N)v_ss] with f1 = (N−1)/N, which is
//!   sign-preserving at v_ss = 0 (the literal fully factorized form
//!   (2f1/N)u3(u3−u_s) can relax to a negative quasi-equilibrium).
//! - Three-particle loop terms (prefactor f2 = max(N−2,0)/N) feed the
//!   correlators back through population differences and through re_vc =
//!   Re(v12·ĉ), the phase-locked product of the cross correlator and the
//!   doublet coherence (invariant under rephasing the doublet levels, as
//!   every dissipator-derived term must be).
//! - The loop rates λ_s = 2u_s·W are weighted by the incoherent fraction
//!   W = [u1u2 − |ĉ|²] / u1u2 (clamped to [0,1]): a coherently driven
//!   doublet (|ĉ|² → u1u2) suppresses the incoherent reabsorption loop,
//!   while the undriven cascade (ĉ = 0) keeps its full damping. The guard
//!   constant below only regularizes the 0/0 limit.
//!
//! Optical coherences ⟨S₁₃⟩, ⟨S₂₃⟩ stay exactly zero from the excited,
//! coherence-free initial states supported here (their equations are
//! homogeneous), so they are not part of the state.

use crate::error::{Error, Result};
use crate::ode::{integrate, Method, Rhs, SolverStats, Tolerances};
use crate::params::{nondimensionalize, SystemParams};
use crate::state::{CorrelatorState, DIM};
use crate::trajectory::{Trajectory, TrajectoryMeta, TimeUnit};
use crate::dressed::dressed_transform;
use num_complex::Complex64;

/// Regularizer for the incoherent-fraction weight at u1·u2 → 0. Far below
/// every physical population product scale; purely a 0/0 guard.
pub const WEIGHT_GUARD: f64 = 1e-12;

/// Default relative seed for the fluctuation policy.
pub const DEFAULT_SEED: f64 = 1e-4;

/// How the initial two-particle correlators are set.
///
/// Deterministic mean-field equations started from a perfectly inverted,
/// correlation-free ensemble still ignite through the spontaneous pair
/// source, but a small seed standing in for quantum fluctuations fixes the
/// burst delay to the ln N scaling of the exact dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedPolicy {
    /// q11(0) = q22(0) = 0.
    None,
    /// q11(0) = q22(0) = epsilon · p3(0).
    Fluctuation { epsilon: f64 },
}

impl Default for SeedPolicy {
    fn default() -> Self {
        SeedPolicy::Fluctuation {
            epsilon: DEFAULT_SEED,
        }
    }
}

impl SeedPolicy {
    /// Stable label recorded in run metadata.
    pub fn label(&self) -> String {
        match self {
            SeedPolicy::None => "none".into(),
            SeedPolicy::Fluctuation { epsilon } => format!("fluctuation({epsilon:e})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SeedPolicy::Fluctuation { epsilon } = self {
            if !(*epsilon >= 0.0) || !epsilon.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "seed epsilon must be nonnegative and finite, got {epsilon}"
                )));
            }
        }
        Ok(())
    }
}

/// Initial collective state: `initial_excited` atoms in |3⟩, the remainder
/// in |1⟩, no coherences, and pair correlators per the seed policy.
pub fn initial_state(params: &SystemParams, seed: SeedPolicy) -> Result<CorrelatorState> {
    params.validate()?;
    seed.validate()?;
    let p3 = params.initial_excited as f64;
    let p1 = params.n() - p3;
    let q_seed = match seed {
        SeedPolicy::None => 0.0,
        SeedPolicy::Fluctuation { epsilon } => epsilon * p3,
    };
    Ok(CorrelatorState {
        n_atoms: params.n_atoms,
        p1,
        p2: 0.0,
        p3,
        c12: Complex64::new(0.0, 0.0),
        q11: q_seed,
        q22: q_seed,
        q12: Complex64::new(0.0, 0.0),
        w12: 0.0,
    })
}

/// The normalized closed system on the fast collective time axis.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedSystem {
    /// 1/(μ₁N): converts collective-rate units back to single-atom rates.
    eps: f64,
    /// γ₂/γ₁.
    r_gamma: f64,
    /// (μ₂γ₂)/(μ₁γ₁): weak-channel collective rate in fast units.
    g: f64,
    /// Ω/(μ₁γ₁N).
    omega_bar: f64,
    /// Atom number as a float.
    n: f64,
}

impl NormalizedSystem {
    pub fn new(params: &SystemParams) -> Self {
        let scaled = nondimensionalize(params);
        Self {
            eps: 1.0 / (params.mu1 * params.n()),
            r_gamma: scaled.r_gamma,
            g: scaled.r_gamma * scaled.r_mu,
            omega_bar: scaled.omega_bar,
            n: params.n(),
        }
    }

    /// Weak-channel collective rate in fast units, g = (μ₂γ₂)/(μ₁γ₁);
    /// also the fast-per-slow time conversion factor.
    pub fn g(&self) -> f64 {
        self.g
    }
}

impl Rhs for NormalizedSystem {
    fn dim(&self) -> usize {
        DIM
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        let (u1, u2, u3) = (y[0], y[1], y[2]);
        let (cr, ci) = (y[3], y[4]);
        let (v11, v22) = (y[5], y[6]);
        let (wr, wi) = (y[7], y[8]);

        let n = self.n;
        let f1 = (n - 1.0) / n;
        let f2 = (n - 2.0).max(0.0) / n;
        let g = self.g;
        let ob = self.omega_bar;
        let kap = 2.0 * self.eps * (1.0 + self.r_gamma);
        let b1 = 2.0 * self.eps;
        let b2 = 2.0 * self.eps * self.r_gamma;

        let re_vc = wr * cr - wi * ci;
        let num = u1 * u2 - (cr * cr + ci * ci);
        let den = (u1 * u2).max(0.0) + WEIGHT_GUARD;
        let w = (num / den).clamp(0.0, 1.0);
        let lam1 = 2.0 * u1 * w;
        let lam2 = 2.0 * g * u2 * w;
        let a = f2 * ((u3 - u1) + g * (u3 - u2)) - 0.5 * (lam1 + lam2);
        let s = f2 * (v11 + g * v22);

        dydt[0] = 2.0 * ob * ci + b1 * u3 + 2.0 * v11;
        dydt[1] = -2.0 * ob * ci + b2 * u3 + 2.0 * g * v22;
        dydt[2] = -(b1 + b2) * u3 - 2.0 * v11 - 2.0 * g * v22;
        dydt[3] = (1.0 + g) * wr;
        dydt[4] = ob * (u2 - u1) - (1.0 + g) * wi;
        dydt[5] = -2.0 * ob * wi - kap * v11 + (2.0 * f1 / n) * u3 * u3 - (4.0 / n) * v11
            + 2.0 * f2 * (u3 - u1) * v11
            - 2.0 * g * f2 * re_vc
            - lam2 * v11;
        dydt[6] = 2.0 * ob * wi - kap * v22
            + g * ((2.0 * f1 / n) * u3 * u3 - (4.0 / n) * v22 + 2.0 * f2 * (u3 - u2) * v22)
            - 2.0 * f2 * re_vc
            - lam1 * v22;
        dydt[7] = -kap * wr - (1.0 + g) * (f1 / n) * u3 * cr + a * wr - s * cr;
        dydt[8] = ob * (v11 - v22) - kap * wi + (1.0 + g) * (f1 / n) * u3 * ci + a * wi + s * ci;
        dydt[9] = -2.0 * ob * f1 * (u1 - u2) * ci + 2.0 * v22 + 2.0 * g * v11
            + 2.0 * (1.0 + g) * f2 * re_vc
            + lam1 * v22
            + lam2 * v11;
    }
}

/// Raw-unit time derivative of every correlator field.
///
/// Thin wrapper over the normalized system for external audits (oracle
/// finite-difference comparisons): derivatives are per unit raw time, in
/// the same raw units as the state fields.
pub fn rhs(state: &CorrelatorState, params: &SystemParams) -> Result<CorrelatorState> {
    params.validate()?;
    if state.n_atoms != params.n_atoms {
        return Err(Error::InvalidState(format!(
            "state has {} atoms but params have {}",
            state.n_atoms, params.n_atoms
        )));
    }
    let sys = NormalizedSystem::new(params);
    let y = state.to_normalized();
    let mut dy = [0.0; DIM];
    sys.eval(0.0, &y, &mut dy);
    // d(raw)/dt = (field scale) · d(normalized)/dτ · dτ/dt.
    let fast_rate = params.mu1 * params.gamma1 * params.n();
    for d in dy.iter_mut() {
        *d *= fast_rate;
    }
    Ok(CorrelatorState::from_normalized(params.n_atoms, &dy))
}

/// End time for a simulation, in a caller-chosen collective unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndTime {
    pub value: f64,
    pub unit: TimeUnit,
}

impl EndTime {
    pub fn slow(value: f64) -> Self {
        Self {
            value,
            unit: TimeUnit::SlowScaled,
        }
    }

    pub fn fast(value: f64) -> Self {
        Self {
            value,
            unit: TimeUnit::FastScaled,
        }
    }
}

/// Simulation controls beyond the physical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub t_end: EndTime,
    /// Number of uniform grid intervals; the grid has `samples + 1` points
    /// including t = 0.
    pub samples: usize,
    pub method: Method,
    pub tol: Tolerances,
    pub seed: SeedPolicy,
}

impl SimOptions {
    pub fn new(t_end: EndTime) -> Self {
        Self {
            t_end,
            samples: 4000,
            method: Method::Auto,
            tol: Tolerances::default(),
            seed: SeedPolicy::default(),
        }
    }
}

/// Runs the mean-field dynamics to `t_end` (in slow collective units
/// μ₂γ₂N·t) with the default grid, method, and seed policy.
pub fn simulate(params: &SystemParams, t_end_slow: f64, tol: &Tolerances) -> Result<Trajectory> {
    let mut opts = SimOptions::new(EndTime::slow(t_end_slow));
    opts.tol = *tol;
    simulate_with(params, &opts)
}

/// Runs the mean-field dynamics with full control over grid, method, and
/// seeding. Rejects N < 2: the closure is a large-N approximation and has
/// no pair correlators for a single atom; use the exact solver instead.
pub fn simulate_with(params: &SystemParams, opts: &SimOptions) -> Result<Trajectory> {
    params.validate()?;
    opts.seed.validate()?;
    opts.tol.validate()?;
    if params.n_atoms < 2 {
        return Err(Error::InvalidParams(
            "mean-field closure requires N >= 2 (and is accurate only for N >> 1); \
             use the exact solver for single atoms"
                .into(),
        ));
    }
    if !(opts.t_end.value > 0.0) || !opts.t_end.value.is_finite() {
        return Err(Error::InvalidParams(format!(
            "t_end must be positive and finite, got {}",
            opts.t_end.value
        )));
    }
    if opts.samples < 2 {
        return Err(Error::InvalidParams(
            "at least 2 grid intervals are required".into(),
        ));
    }

    let scaled = nondimensionalize(params);
    let sys = NormalizedSystem::new(params);
    let tau_end = match opts.t_end.unit {
        TimeUnit::FastScaled => opts.t_end.value,
        TimeUnit::SlowScaled => {
            if sys.g() == 0.0 {
                return Err(Error::InvalidParams(
                    "gamma2 = 0 leaves no slow time unit; express t_end in fast units".into(),
                ));
            }
            opts.t_end.value / sys.g()
        }
        TimeUnit::Physical => opts.t_end.value / scaled.t_fast,
    };
    if !tau_end.is_finite() || tau_end <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "t_end converts to a non-usable fast-unit span {tau_end}"
        )));
    }

    let y0 = initial_state(params, opts.seed)?.to_normalized();
    let grid: Vec<f64> = (0..=opts.samples)
        .map(|i| tau_end * i as f64 / opts.samples as f64)
        .collect();

    let sol = integrate(&sys, &y0, (0.0, tau_end), &opts.tol, &grid, opts.method)?;

    Ok(build_trajectory(params, opts, sol.times, sol.states, sol.stats))
}

fn build_trajectory(
    params: &SystemParams,
    opts: &SimOptions,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    stats: SolverStats,
) -> Trajectory {
    let n = times.len();
    let mut traj = Trajectory {
        time_unit: TimeUnit::FastScaled,
        times,
        p1_over_n: Vec::with_capacity(n),
        p2_over_n: Vec::with_capacity(n),
        p3_over_n: Vec::with_capacity(n),
        re_c12_over_n: Vec::with_capacity(n),
        im_c12_over_n: Vec::with_capacity(n),
        i1: Vec::with_capacity(n),
        i2: Vec::with_capacity(n),
        d_mm: Vec::with_capacity(n),
        d_pp: Vec::with_capacity(n),
        re_cross: Vec::with_capacity(n),
        im_cross: Vec::with_capacity(n),
        meta: TrajectoryMeta {
            params: params.clone(),
            scaled: nondimensionalize(params),
            seed_policy: opts.seed.label(),
            tolerances: opts.tol,
            method: opts.method.name().into(),
            stats: Some(stats),
            engine_version: env!("CARGO_PKG_VERSION").into(),
        },
    };
    let n2 = params.n() * params.n();
    for y in &states {
        traj.p1_over_n.push(y[0]);
        traj.p2_over_n.push(y[1]);
        traj.p3_over_n.push(y[2]);
        traj.re_c12_over_n.push(y[3]);
        traj.im_c12_over_n.push(y[4]);
        // Emission intensities are nonnegative by construction of the
        // underlying operators; the closure can undershoot zero by strictly
        // sub-tolerance amounts in the late tail, which is projected out of
        // the reported samples.
        let i1 = y[5].max(0.0);
        let i2 = y[6].max(0.0);
        traj.i1.push(i1);
        traj.i2.push(i2);
        let q12 = Complex64::new(y[7] * n2, y[8] * n2);
        let dd = dressed_transform(i1 * n2, i2 * n2, q12, params.n_atoms);
        traj.d_mm.push(dd.d_mm);
        traj.d_pp.push(dd.d_pp);
        traj.re_cross.push(dd.cross.re);
        traj.im_cross.push(dd.cross.im);
    }
    traj
}
