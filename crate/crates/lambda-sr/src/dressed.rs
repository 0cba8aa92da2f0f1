//! Laser-dressed decomposition of the two emission channels.
//!
//! The resonant drive dresses the lower doublet into |±⟩ = (|2⟩ ± |1⟩)/√2,
//! so the bare transition operators map to S₃₁ = (R₃₊ − R₃₋)/√2 and
//! S₃₂ = (R₃₊ + R₃₋)/√2 where R₃± = |3⟩⟨±|. Expanding the pair sums behind
//! the channel intensities in this basis splits each intensity into two
//! direct dressed contributions and an interference term:
//!
//!   I1 = d_mm + d_pp − 2·Re(cross)
//!   I2 = d_mm + d_pp + 2·Re(cross)
//!
//! with the cross term entering the two channels with opposite signs, so
//! I1 + I2 = 2(d_mm + d_pp) identically. Components here are normalized to
//! intensity units (pair sums divided by 2N² beyond the bare /2 from the
//! basis change), which makes both identities hold with unit coefficients.

use num_complex::Complex64;

use crate::coupling::Channel;

/// Dressed-basis split of the emission pair correlators, in the same
/// normalization as the channel intensities `I_s = q_ss/N²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedDecomposition {
    /// Direct superradiance into |−⟩: pair sum of ⟨R₃₋ R₋₃⟩ terms.
    pub d_mm: f64,
    /// Direct superradiance into |+⟩: pair sum of ⟨R₃₊ R₊₃⟩ terms.
    pub d_pp: f64,
    /// Interference term: pair sum of ⟨R₃₋ R₊₃⟩ terms.
    pub cross: Complex64,
    /// Signed channel-1 contributions [d_mm, d_pp, −cross, −cross*].
    pub i1_parts: [Complex64; 4],
    /// Signed channel-2 contributions [d_mm, d_pp, +cross, +cross*].
    pub i2_parts: [Complex64; 4],
}

impl DressedDecomposition {
    /// Reassembled channel intensities (sums of the four parts; imaginary
    /// parts cancel exactly).
    pub fn intensities(&self) -> (f64, f64) {
        let i1 = self.d_mm + self.d_pp - 2.0 * self.cross.re;
        let i2 = self.d_mm + self.d_pp + 2.0 * self.cross.re;
        (i1, i2)
    }
}

/// Maps the bare pair correlators `(q11, q22, q12)` into the dressed basis.
///
/// `q12` is the cross-channel pair sum `Σ_{j≠l}⟨S₃₁^(j) S₂₃^(l)⟩`; its
/// conjugate-order sum enters automatically. The map is a linear bijection;
/// [`bare_from_dressed`] inverts it.
pub fn dressed_transform(q11: f64, q22: f64, q12: Complex64, n_atoms: u64) -> DressedDecomposition {
    let n2 = (n_atoms as f64) * (n_atoms as f64);
    let norm = 1.0 / (4.0 * n2);
    let d_mm = (q11 + q22 - 2.0 * q12.re) * norm;
    let d_pp = (q11 + q22 + 2.0 * q12.re) * norm;
    let cross = Complex64::new((q22 - q11) * norm, -2.0 * q12.im * norm);
    DressedDecomposition {
        d_mm,
        d_pp,
        cross,
        i1_parts: [
            Complex64::new(d_mm, 0.0),
            Complex64::new(d_pp, 0.0),
            -cross,
            -cross.conj(),
        ],
        i2_parts: [
            Complex64::new(d_mm, 0.0),
            Complex64::new(d_pp, 0.0),
            cross,
            cross.conj(),
        ],
    }
}

/// Inverse of [`dressed_transform`]: recovers `(q11, q22, q12)`.
pub fn bare_from_dressed(dd: &DressedDecomposition, n_atoms: u64) -> (f64, f64, Complex64) {
    let n2 = (n_atoms as f64) * (n_atoms as f64);
    let (i1, i2) = dd.intensities();
    let q11 = i1 * n2;
    let q22 = i2 * n2;
    let q12 = Complex64::new((dd.d_pp - dd.d_mm) * n2, -2.0 * dd.cross.im * n2);
    (q11, q22, q12)
}

/// Sign of the interference contribution to a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceSign {
    /// The cross term adds to the channel intensity.
    Constructive,
    /// The cross term subtracts from the channel intensity.
    Destructive,
    Neutral,
}

/// Interference share of one channel's intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interference {
    /// |2·Re(cross)| / |I_channel|.
    pub fraction: f64,
    pub sign: InterferenceSign,
}

/// Intensities smaller than this are treated as no emission; the
/// interference share of nothing is undefined.
pub const INTENSITY_FLOOR: f64 = 1e-30;

/// Fraction of the channel intensity carried by the interference term.
///
/// Returns `None` when the channel intensity is below [`INTENSITY_FLOOR`]
/// while a nonzero cross term exists. A cross term that is exactly zero
/// (as for a single atom, where pair sums are empty) reports fraction 0
/// regardless of the total.
pub fn interference_fraction(dd: &DressedDecomposition, channel: Channel) -> Option<Interference> {
    let signed_term = match channel {
        Channel::One => -2.0 * dd.cross.re,
        Channel::Two => 2.0 * dd.cross.re,
    };
    if dd.cross.re == 0.0 {
        return Some(Interference {
            fraction: 0.0,
            sign: InterferenceSign::Neutral,
        });
    }
    let (i1, i2) = dd.intensities();
    let total = match channel {
        Channel::One => i1,
        Channel::Two => i2,
    };
    if total.abs() < INTENSITY_FLOOR {
        return None;
    }
    Some(Interference {
        fraction: (signed_term / total).abs(),
        sign: if signed_term > 0.0 {
            InterferenceSign::Constructive
        } else {
            InterferenceSign::Destructive
        },
    })
}
