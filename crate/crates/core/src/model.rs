//! Symmetric one-dimensional potentials in dimensionless form.
//!
//! Every potential satisfies `v(-x) = v(x)` and `v(0) = 0`, and exposes both a
//! closed-form evaluator (used by the scattering integrator) and its Taylor
//! coefficients in `z = x^2` (used by the Riccati-Padé recurrence).

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::mp::{Param, Precision};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid potential parameter: {0}")]
    InvalidParameter(String),
    #[error("custom series evaluated at |x| = {x} beyond its validated radius {radius}")]
    Truncation { x: f64, radius: f64 },
    #[error("potential has no barrier maximum")]
    NoBarrier,
}

/// A symmetric dimensionless potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `v(x) = v0 x^2 exp(-lambda x^2)`.
    #[serde(rename = "gaussian", alias = "gaussian_double_barrier")]
    GaussianDoubleBarrier { v0: Param, lambda: Param },
    /// `v(x) = (x^2/2 - J) exp(-lambda x^2) + J`.
    #[serde(rename = "kg", alias = "kg_well_barrier")]
    KgWellBarrier {
        #[serde(rename = "J", alias = "j")]
        j: Param,
        lambda: Param,
    },
    /// `v(x) = sum_{j>=1} c_j x^{2j}` with `coefficients = [c_1, c_2, ...]`.
    ///
    /// Without an explicit `radius` the series is trusted only where its tail
    /// term is below `1e-30` of the largest lower-order term; a series with a
    /// single nonzero term is an exact monomial and valid everywhere.
    CustomSeries {
        coefficients: Vec<Param>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<Param>,
    },
}

/// Position and height of the barrier maximum at `x = +-b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BarrierGeometry {
    pub b: f64,
    pub v_b: f64,
}

/// Physical-unit parameters of `V(X) = V0 X^2 exp(-alpha X^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub m: f64,
    pub hbar: f64,
    #[serde(rename = "V0")]
    pub v0: f64,
    pub alpha: f64,
    #[serde(rename = "L", default)]
    pub length: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dimensionless {
    pub v0: f64,
    pub lambda: f64,
    pub length: f64,
}

const SERIES_TAIL_RATIO: f64 = 1e-30;

impl PotentialSpec {
    pub fn gaussian(v0: impl Into<Param>, lambda: impl Into<Param>) -> Self {
        Self::GaussianDoubleBarrier {
            v0: v0.into(),
            lambda: lambda.into(),
        }
    }

    pub fn kg(j: impl Into<Param>, lambda: impl Into<Param>) -> Self {
        Self::KgWellBarrier {
            j: j.into(),
            lambda: lambda.into(),
        }
    }

    pub fn series(coefficients: Vec<Param>) -> Self {
        Self::CustomSeries {
            coefficients,
            radius: None,
        }
    }

    /// `v(x) = x^2/2`, the harmonic oscillator.
    pub fn harmonic() -> Self {
        Self::series(vec!["1/2".parse().expect("literal")])
    }

    /// `v(x) = 0`.
    pub fn free() -> Self {
        Self::series(Vec::new())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::GaussianDoubleBarrier { v0, lambda } => {
                if !v0.is_positive() {
                    return Err(ModelError::InvalidParameter(format!("v0 = {v0} must be > 0")));
                }
                if !lambda.is_positive() {
                    return Err(ModelError::InvalidParameter(format!(
                        "lambda = {lambda} must be > 0"
                    )));
                }
            }
            Self::KgWellBarrier { lambda, .. } => {
                if !lambda.is_positive() {
                    return Err(ModelError::InvalidParameter(format!(
                        "lambda = {lambda} must be > 0"
                    )));
                }
            }
            Self::CustomSeries { radius, .. } => {
                if let Some(r) = radius {
                    if !r.is_positive() {
                        return Err(ModelError::InvalidParameter(format!(
                            "radius = {r} must be > 0"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Exponential decay rate `lambda`, if the potential has one.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            Self::GaussianDoubleBarrier { lambda, .. } | Self::KgWellBarrier { lambda, .. } => {
                Some(lambda.to_f64())
            }
            Self::CustomSeries { .. } => None,
        }
    }

    /// Limit of `v(x)` as `|x| -> inf`; `None` for a non-constant series.
    pub fn asymptote(&self) -> Option<f64> {
        match self {
            Self::GaussianDoubleBarrier { .. } => Some(0.0),
            Self::KgWellBarrier { j, .. } => Some(j.to_f64()),
            Self::CustomSeries { coefficients, .. } => {
                coefficients.iter().all(|c| c.rational().cmp0().is_eq()).then_some(0.0)
            }
        }
    }

    /// Radius inside which a custom series is trusted; infinite otherwise.
    pub fn validated_radius(&self) -> f64 {
        let Self::CustomSeries {
            coefficients,
            radius,
        } = self
        else {
            return f64::INFINITY;
        };
        if let Some(r) = radius {
            return r.to_f64();
        }
        let terms: Vec<(usize, f64)> = coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1, c.to_f64().abs()))
            .filter(|(_, c)| *c > 0.0)
            .collect();
        let Some((&(last_j, last_c), lower)) = terms.split_last() else {
            return f64::INFINITY;
        };
        if lower.is_empty() {
            return f64::INFINITY;
        }
        // Tail ratio |c_n| x^{2n} / max_j |c_j| x^{2j} is the smallest of
        // the growing ratios |c_n/c_j| x^{2(n-j)}; the radius is where it
        // reaches the threshold, i.e. the largest single crossing.
        lower
            .iter()
            .map(|&(j, c)| {
                let power = 2.0 * (last_j - j) as f64;
                (SERIES_TAIL_RATIO * c / last_c).powf(1.0 / power)
            })
            .fold(0.0, f64::max)
    }

    /// Closed-form `v(x)` at the precision of `x`.
    pub fn evaluate(&self, x: &Float) -> Result<Float, ModelError> {
        let prec = x.prec();
        let z = Float::with_val(prec, x.square_ref());
        let value = match self {
            Self::GaussianDoubleBarrier { v0, lambda } => {
                let lam = Float::with_val(prec, lambda.rational());
                let decay = (-(lam * &z)).exp();
                Float::with_val(prec, v0.rational()) * z * decay
            }
            Self::KgWellBarrier { j, lambda } => {
                let lam = Float::with_val(prec, lambda.rational());
                let jj = Float::with_val(prec, j.rational());
                let decay = (-(lam * &z)).exp();
                (z / 2u32 - &jj) * decay + jj
            }
            Self::CustomSeries { coefficients, .. } => {
                let radius = self.validated_radius();
                let ax = x.to_f64().abs();
                if ax > radius {
                    return Err(ModelError::Truncation { x: ax, radius });
                }
                let mut acc = Float::new(prec);
                for c in coefficients.iter().rev() {
                    acc = (acc + Float::with_val(prec, c.rational())) * &z;
                }
                acc
            }
        };
        Ok(value)
    }

    /// Double-precision `v(x)` for the ODE integrators.
    ///
    /// Custom series are summed without the radius check; callers that leave
    /// the validated radius must check [`validated_radius`](Self::validated_radius).
    pub fn value(&self, x: f64) -> f64 {
        let z = x * x;
        match self {
            Self::GaussianDoubleBarrier { v0, lambda } => {
                v0.to_f64() * z * (-lambda.to_f64() * z).exp()
            }
            Self::KgWellBarrier { j, lambda } => {
                let j = j.to_f64();
                (z / 2.0 - j) * (-lambda.to_f64() * z).exp() + j
            }
            Self::CustomSeries { coefficients, .. } => coefficients
                .iter()
                .rev()
                .fold(0.0, |acc, c| (acc + c.to_f64()) * z),
        }
    }

    /// Taylor coefficients `[v_1, ..., v_n]` of `v(x) = sum v_j x^{2j}`.
    ///
    /// Custom series are padded with zeros past their last coefficient.
    pub fn taylor_coefficients(&self, n: usize, prec: Precision) -> Vec<Float> {
        let bits = prec.bits();
        match self {
            Self::GaussianDoubleBarrier { v0, lambda } => {
                // v_j = v0 (-lambda)^{j-1} / (j-1)!
                let neg_lam = -Float::with_val(bits, lambda.rational());
                let mut term = Float::with_val(bits, v0.rational());
                (1..=n)
                    .map(|j| {
                        if j > 1 {
                            term *= &neg_lam;
                            term /= (j - 1) as u32;
                        }
                        term.clone()
                    })
                    .collect()
            }
            Self::KgWellBarrier { j, lambda } => {
                // v_k = (-lambda)^{k-1} / (2 (k-1)!) - J (-lambda)^k / k!
                let neg_lam = -Float::with_val(bits, lambda.rational());
                let jj = Float::with_val(bits, j.rational());
                let mut power = Float::with_val(bits, 1); // (-lambda)^{k-1} / (k-1)!
                (1..=n)
                    .map(|k| {
                        if k > 1 {
                            power *= &neg_lam;
                            power /= (k - 1) as u32;
                        }
                        let next = Float::with_val(bits, &power * &neg_lam) / k as u32;
                        Float::with_val(bits, &power / 2u32) - Float::with_val(bits, &jj * &next)
                    })
                    .collect()
            }
            Self::CustomSeries { coefficients, .. } => (0..n)
                .map(|i| match coefficients.get(i) {
                    Some(c) => c.to_float(prec),
                    None => Float::new(bits),
                })
                .collect(),
        }
    }

    /// Location and height of the barrier top.
    pub fn barrier_geometry(&self) -> Result<BarrierGeometry, ModelError> {
        match self {
            Self::GaussianDoubleBarrier { v0, lambda } => {
                let lam = lambda.to_f64();
                Ok(BarrierGeometry {
                    b: 1.0 / lam.sqrt(),
                    v_b: v0.to_f64() / (std::f64::consts::E * lam),
                })
            }
            _ => self.numeric_barrier(),
        }
    }

    /// Barrier top found by maximizing `v` on `x > 0`.
    pub fn numeric_barrier(&self) -> Result<BarrierGeometry, ModelError> {
        let limit = match (self.lambda(), self) {
            (Some(lam), _) => 20.0 / lam.sqrt(),
            (None, Self::CustomSeries { .. }) => self.validated_radius().min(1e3),
            (None, _) => unreachable!(),
        };
        let samples = 4000;
        let step = limit / samples as f64;
        let values: Vec<f64> = (0..=samples).map(|i| self.value(i as f64 * step)).collect();
        let (imax, vmax) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        if imax == 0 || imax == samples || !vmax.is_finite() {
            return Err(ModelError::NoBarrier);
        }
        let b = golden_max(
            |x| self.value(x),
            (imax - 1) as f64 * step,
            (imax + 1) as f64 * step,
            1e-14,
        );
        Ok(BarrierGeometry {
            b,
            v_b: self.value(b),
        })
    }

    /// Smallest `a` with `|v(a) - asymptote| < 1e-12 v_b`, capped at `12/sqrt(lambda)`.
    pub fn matching_radius(&self) -> f64 {
        let Some(asym) = self.asymptote() else {
            return self.validated_radius();
        };
        let (Some(lam), Ok(geom)) = (self.lambda(), self.barrier_geometry()) else {
            // Constant potential: any radius works.
            return 1.0;
        };
        let cap = 12.0 / lam.sqrt();
        let threshold = 1e-12 * (geom.v_b - asym).abs().max(geom.v_b.abs());
        let tail = |x: f64| (self.value(x) - asym).abs();
        if tail(cap) >= threshold {
            return cap;
        }
        let (mut lo, mut hi) = (geom.b, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tail(mid) < threshold {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-12 * hi {
                break;
            }
        }
        hi
    }
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

impl PhysicalParams {
    /// Dimensionless `(v0, lambda)` for `V(X) = V0 X^2 exp(-alpha X^2)`.
    ///
    /// `v0 = m L^4 V0 / hbar^2` and `lambda = alpha L^2`. Without an explicit
    /// length the scale `L^2 = hbar / sqrt(m V0)` is used, which makes `v0 = 1`.
    pub fn nondimensionalize(&self) -> Result<Dimensionless, ModelError> {
        let fields = [
            ("m", self.m),
            ("hbar", self.hbar),
            ("V0", self.v0),
            ("alpha", self.alpha),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParameter(format!("{name} = {value} must be > 0")));
            }
        }
        let length = match self.length {
            Some(l) if l > 0.0 && l.is_finite() => l,
            Some(l) => return Err(ModelError::InvalidParameter(format!("L = {l} must be > 0"))),
            None => (self.hbar / (self.m * self.v0).sqrt()).sqrt(),
        };
        Ok(Dimensionless {
            v0: self.m * length.powi(4) * self.v0 / (self.hbar * self.hbar),
            lambda: self.alpha * length * length,
            length,
        })
    }
}
