//! Riccati-Padé quantization.
//!
//! Eigenvalues (bound states and Siegert resonances) of a symmetric potential
//! are the energies at which Hankel determinants built from the Taylor
//! coefficients of the regularized logarithmic derivative vanish. Roots are
//! found by Newton iteration at fixed determinant dimension `D` and followed
//! as `D` grows; the last inter-`D` change is the error estimate.

mod hankel;
mod newton;
mod riccati;
mod scalar;
mod search;
mod seeds;
mod sequence;

use std::fmt;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

pub use hankel::{hankel_determinant, hankel_with_derivative, HankelEvaluation};
pub use riccati::{riccati_coefficients, RiccatiCoeffs};
pub use scalar::Dual;
pub use search::{lowest_states, SearchConfig};
pub use seeds::SearchRegion;

use crate::model::PotentialSpec;
use crate::mp::{to_sci_string, Precision};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RpmError {
    #[error("need Taylor coefficients up to v_{needed}, only {available} available")]
    CoefficientLength { needed: usize, available: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Newton iteration did not converge after {iterations} steps (last iterate {last})")]
    NonConvergence { iterations: usize, last: String },
    #[error("Hankel derivative vanished at eps = {at}")]
    SingularDerivative { at: String },
    #[error("seed polynomial is identically zero")]
    DegeneratePolynomial,
    #[error("root sequence lost at D = {dim}: {reason}")]
    SequenceLost { dim: usize, reason: String },
}

/// Even (`s = 0`) or odd (`s = 1`) eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn s(self) -> u32 {
        match self {
            Self::Even => 0,
            Self::Odd => 1,
        }
    }

    pub fn from_s(s: u32) -> Option<Self> {
        match s {
            0 => Some(Self::Even),
            1 => Some(Self::Odd),
            _ => None,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.s())
    }
}

impl Serialize for Parity {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u32(self.s())
    }
}

impl<'de> Deserialize<'de> for Parity {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = u32::deserialize(deserializer)?;
        Parity::from_s(s).ok_or_else(|| serde::de::Error::custom("parity must be 0 or 1"))
    }
}

/// Dimension `D = N + 1` and displacement `d = M - N` of a Hankel determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HankelSpec {
    pub dim: usize,
    pub displacement: usize,
}

impl HankelSpec {
    pub fn new(dim: usize, displacement: usize) -> Result<Self, RpmError> {
        if dim < 2 {
            return Err(RpmError::InvalidInput(format!("Hankel dimension {dim} < 2")));
        }
        Ok(Self { dim, displacement })
    }

    /// Index of the last coefficient the determinant touches, `d + 2D - 1`.
    pub fn highest_index(self) -> usize {
        self.displacement + 2 * self.dim - 1
    }
}

/// A converged eigenvalue `eps_R + i eps_I` with its convergence record.
#[derive(Clone, Debug)]
pub struct ResonanceResult {
    /// Full-precision eigenvalue, normalized so that `Im <= 0`.
    pub epsilon: Complex,
    pub parity: Parity,
    pub d_final: usize,
    /// Larger of `|dRe|` and `|dIm|` between the last two dimensions.
    pub error_estimate: f64,
    /// Root at each dimension, from `D_min` to `D_final`.
    pub history: Vec<(usize, Complex)>,
}

impl ResonanceResult {
    pub fn epsilon_r(&self) -> Float {
        self.epsilon.real().clone()
    }

    pub fn epsilon_i(&self) -> Float {
        self.epsilon.imag().clone()
    }

    /// `Gamma = -2 eps_I`.
    pub fn gamma(&self) -> Float {
        Float::with_val(self.epsilon.prec().1, self.epsilon.imag() * -2i32)
    }

    pub fn is_bound(&self) -> bool {
        self.epsilon.imag().is_zero()
    }

    /// Error estimate at dimension `dim`, from the stored history.
    pub fn error_at(&self, dim: usize) -> Option<f64> {
        let pos = self.history.iter().position(|(d, _)| *d == dim)?;
        if pos == 0 {
            return None;
        }
        let diff = Complex::with_val(
            self.epsilon.prec(),
            &self.history[pos].1 - &self.history[pos - 1].1,
        );
        Some(crate::mp::max_component(&diff).to_f64())
    }
}

impl fmt::Display for ResonanceResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "s={} eps_R={} eps_I={} (D={}, err={:.1e})",
            self.parity,
            to_sci_string(self.epsilon.real()),
            to_sci_string(self.epsilon.imag()),
            self.d_final,
            self.error_estimate
        )
    }
}

/// RPM problem for one potential and one parity at a fixed working precision.
#[derive(Clone, Debug)]
pub struct RpmSolver {
    v_coeffs: Vec<Float>,
    parity: Parity,
    precision: Precision,
}

impl RpmSolver {
    /// Generates enough Taylor coefficients for determinants up to
    /// `max_dim` with displacement `displacement`.
    pub fn new(
        potential: &PotentialSpec,
        parity: Parity,
        precision: Precision,
        max_dim: usize,
        displacement: usize,
    ) -> Self {
        let n = displacement + 2 * max_dim.max(2) - 1;
        Self {
            v_coeffs: potential.taylor_coefficients(n, precision),
            parity,
            precision,
        }
    }

    pub fn with_coefficients(v_coeffs: Vec<Float>, parity: Parity, precision: Precision) -> Self {
        Self {
            v_coeffs,
            parity,
            precision,
        }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn v_coeffs(&self) -> &[Float] {
        &self.v_coeffs
    }

    pub fn complex(&self, re: f64, im: f64) -> Complex {
        self.precision.complex(re, im)
    }

    pub fn coefficients(&self, epsilon: &Complex, n_max: usize) -> Result<RiccatiCoeffs, RpmError> {
        riccati_coefficients(&self.v_coeffs, self.parity, &self.at_precision(epsilon), n_max)
    }

    pub fn hankel(&self, epsilon: &Complex, spec: HankelSpec) -> Result<Complex, RpmError> {
        let coeffs = self.coefficients(epsilon, spec.highest_index())?;
        hankel_determinant(&coeffs, spec)
    }

    pub fn hankel_with_derivative(
        &self,
        epsilon: &Complex,
        spec: HankelSpec,
    ) -> Result<HankelEvaluation, RpmError> {
        hankel_with_derivative(&self.v_coeffs, self.parity, &self.at_precision(epsilon), spec)
    }

    fn at_precision(&self, z: &Complex) -> Complex {
        Complex::with_val(self.precision.bits(), z)
    }
}
