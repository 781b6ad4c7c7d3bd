//! The restricted family of states used for decisions: a single qubit, a
//! two-branch entangled pair and a two-branch GHZ state, all with real
//! non-negative amplitudes and therefore stored as a single branch
//! probability.
//!
//! A state `√p·|0⟩ + √(1−p)·|1⟩` is normalized by construction, so the only
//! invariant to police is `p ∈ [0, 1]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::UniformSource;
use crate::scalar::{is_probability, Scalar};

/// Outcome of a computational-basis measurement. `Zero` is the horizontal
/// detector (machine 0), `One` the vertical detector (machine 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn index(self) -> usize {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn is_one(self) -> bool {
        self == Bit::One
    }

    pub(crate) fn from_bool(one: bool) -> Self {
        if one {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl From<Bit> for u8 {
    fn from(b: Bit) -> u8 {
        b.index() as u8
    }
}

impl TryFrom<u8> for Bit {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(format!("bit must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Which basis state an update rotates the polarizer toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Increase the probability of outcome 0 (rotate toward horizontal).
    Toward0,
    /// Decrease the probability of outcome 0 (rotate toward vertical).
    Toward1,
}

impl Direction {
    /// The direction that favours outcome `b`.
    pub fn toward(b: Bit) -> Self {
        match b {
            Bit::Zero => Direction::Toward0,
            Bit::One => Direction::Toward1,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Direction::Toward0 => Direction::Toward1,
            Direction::Toward1 => Direction::Toward0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Toward0 => "toward0",
            Direction::Toward1 => "toward1",
        }
    }
}

fn check_probability<T: Scalar>(name: &'static str, p: T) -> Result<T> {
    if is_probability(p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability {
            name,
            value: p.to_f64_lossless(),
        })
    }
}

/// `√p0·|0⟩ + √(1−p0)·|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qubit<T> {
    p0: T,
}

impl<T: Scalar> Qubit<T> {
    pub fn new(p0: T) -> Result<Self> {
        check_probability("p0", p0).map(|p0| Self { p0 })
    }

    pub(crate) fn unchecked(p0: T) -> Self {
        debug_assert!(is_probability(p0));
        Self { p0 }
    }

    /// `(|0⟩ + |1⟩)/√2`, the state behind a 45° polarizer.
    pub fn plus() -> Self {
        Self {
            p0: T::from_f64_lossy(0.5),
        }
    }

    pub fn from_angle(theta_degrees: T) -> Result<Self> {
        angle_to_p0(theta_degrees).map(|p0| Self { p0 })
    }

    /// `|α|²`.
    pub fn p0(&self) -> T {
        self.p0
    }

    /// `|β|²`.
    pub fn p1(&self) -> T {
        T::one() - self.p0
    }

    pub fn amplitudes(&self) -> (T, T) {
        (self.p0.sqrt(), self.p1().sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    /// `√p·|00⟩ + √(1−p)·|11⟩`
    Correlated,
    /// `√p·|01⟩ + √(1−p)·|10⟩`
    Anticorrelated,
}

/// Two-qubit state with exactly two populated branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntangledPair<T> {
    correlation: Correlation,
    p_first: T,
}

impl<T: Scalar> EntangledPair<T> {
    pub fn new(correlation: Correlation, p_first: T) -> Result<Self> {
        check_probability("p_first", p_first).map(|p_first| Self {
            correlation,
            p_first,
        })
    }

    pub(crate) fn unchecked(correlation: Correlation, p_first: T) -> Self {
        debug_assert!(is_probability(p_first));
        Self {
            correlation,
            p_first,
        }
    }

    /// Maximally entangled state with the given correlation.
    pub fn maximal(correlation: Correlation) -> Self {
        Self {
            correlation,
            p_first: T::from_f64_lossy(0.5),
        }
    }

    pub fn correlation(&self) -> Correlation {
        self.correlation
    }

    pub fn p_first(&self) -> T {
        self.p_first
    }

    pub fn p_second(&self) -> T {
        T::one() - self.p_first
    }
}

/// `√p0·|0…0⟩ + √(1−p0)·|1…1⟩` over `n ≥ 2` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzState<T> {
    n: usize,
    p0: T,
}

impl<T: Scalar> GhzState<T> {
    pub fn new(n: usize, p0: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidUserCount { min: 2, got: n });
        }
        check_probability("p0", p0).map(|p0| Self { n, p0 })
    }

    pub(crate) fn unchecked(n: usize, p0: T) -> Self {
        debug_assert!(n >= 2 && is_probability(p0));
        Self { n, p0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p0(&self) -> T {
        self.p0
    }

    pub fn p1(&self) -> T {
        T::one() - self.p0
    }
}

/// One draw: `Zero` with probability `p0`.
#[inline]
fn sample_branch<T: Scalar, R: UniformSource + ?Sized>(p0: T, rng: &mut R) -> Bit {
    Bit::from_bool(rng.next_uniform() >= p0.to_f64_lossless())
}

/// Measures a qubit in the horizontal/vertical basis. The state itself is
/// left untouched; callers regenerate it for the next round.
pub fn measure_qubit<T: Scalar, R: UniformSource + ?Sized>(state: &Qubit<T>, rng: &mut R) -> Bit {
    sample_branch(state.p0, rng)
}

/// Measures both halves of a pair in the same basis. Returns `(first, second)`.
pub fn measure_pair<T: Scalar, R: UniformSource + ?Sized>(
    state: &EntangledPair<T>,
    rng: &mut R,
) -> (Bit, Bit) {
    let first = sample_branch(state.p_first, rng);
    match state.correlation {
        Correlation::Correlated => (first, first),
        Correlation::Anticorrelated => (first, first.flip()),
    }
}

/// Measures every qubit of a GHZ state in the same basis. All parties see the
/// same bit, so it is returned once.
pub fn measure_ghz<T: Scalar, R: UniformSource + ?Sized>(state: &GhzState<T>, rng: &mut R) -> Bit {
    sample_branch(state.p0, rng)
}

/// Moves `p0` by `c` in `direction`, saturating at 0 and 1.
pub fn shift_probability<T: Scalar>(p0: T, direction: Direction, c: T) -> Result<T> {
    if c.is_nan() || c <= T::zero() {
        return Err(Error::NonPositiveIncrement(c.to_f64_lossless()));
    }
    check_probability("p0", p0)?;
    Ok(shift_unchecked(p0, direction, c))
}

#[inline]
pub(crate) fn shift_unchecked<T: Scalar>(p0: T, direction: Direction, c: T) -> T {
    match direction {
        Direction::Toward0 => (p0 + c).min(T::one()),
        Direction::Toward1 => (p0 - c).max(T::zero()),
    }
}

/// Polarizer angle in degrees, measured from horizontal, to `p0 = cos²θ`.
pub fn angle_to_p0<T: Scalar>(theta_degrees: T) -> Result<T> {
    let ninety = T::from_f64_lossy(90.0);
    if !(theta_degrees >= T::zero() && theta_degrees <= ninety) {
        return Err(Error::AngleOutOfRange(theta_degrees.to_f64_lossless()));
    }
    let c = theta_degrees.to_radians().cos();
    Ok((c * c).min(T::one()).max(T::zero()))
}

/// Inverse of [`angle_to_p0`]: `arccos(√p0)` in degrees.
pub fn p0_to_angle<T: Scalar>(p0: T) -> Result<T> {
    check_probability("p0", p0)?;
    Ok(p0.sqrt().acos().to_degrees())
}
