//! Transmission and reflection through a symmetric potential.
//!
//! The wave is fixed as `phi = exp(ikx)` at `x = a` (unit transmitted
//! amplitude) and integrated back to `x = -a`, where it is split into incident
//! and reflected plane waves. Transmission peaks are compared with the
//! Breit-Wigner line shape.

mod integrator;

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use ode_solvers::SVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use integrator::GridControl;
pub(crate) use integrator::{propagate, propagate_grid};

use crate::model::{golden_max, PotentialSpec};

/// Largest `|T + R - 1|` accepted from a single integration.
pub const UNITARITY_HARD_LIMIT: f64 = 1e-6;

/// Unitarity required of every point of a finished scan.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Peak height required of a transmission resonance of a symmetric potential.
pub const PEAK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("energy {epsilon} is not above the channel threshold {threshold}")]
    ClosedChannel { epsilon: f64, threshold: f64 },
    #[error("potential has no finite asymptote; scattering is undefined")]
    NoAsymptote,
    #[error("integrator step size collapsed near x = {x}")]
    Stiffness { x: f64 },
    #[error("unitarity residual {residual:e} at eps = {epsilon} exceeds {limit:e}")]
    Unitarity { epsilon: f64, residual: f64, limit: f64 },
    #[error("no interior transmission maximum in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("transmission peak at eps = {epsilon} reaches only T = {t}")]
    PeakBelowUnity { epsilon: f64, t: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A symmetric one-dimensional scattering potential.
pub trait Potential: Sync {
    fn value(&self, x: f64) -> f64;
    /// Limit of `v` at large `|x|`, the channel threshold.
    fn asymptote(&self) -> Option<f64>;
    /// Radius beyond which `v` is treated as its asymptote.
    fn matching_radius(&self) -> f64;
    /// Points where `v` is discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Potential for PotentialSpec {
    fn value(&self, x: f64) -> f64 {
        PotentialSpec::value(self, x)
    }

    fn asymptote(&self) -> Option<f64> {
        PotentialSpec::asymptote(self)
    }

    fn matching_radius(&self) -> f64 {
        PotentialSpec::matching_radius(self)
    }
}

/// `v = height` for `|x| < half_width`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareBarrier {
    pub height: f64,
    pub half_width: f64,
}

impl Potential for SquareBarrier {
    fn value(&self, x: f64) -> f64 {
        if x.abs() < self.half_width {
            self.height
        } else {
            0.0
        }
    }

    fn asymptote(&self) -> Option<f64> {
        Some(0.0)
    }

    fn matching_radius(&self) -> f64 {
        self.half_width + 1.0
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![-self.half_width, self.half_width]
    }
}

/// Plane-wave amplitudes: `phi = a e^{ikx} + b e^{-ikx}` on the left and
/// `phi = c e^{ikx}` on the right.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeSet {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub k: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPoint {
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub unitarity_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransmissionCurve {
    pub points: Vec<TransmissionPoint>,
}

/// Breit-Wigner parameters; `epsilon_i` is the magnitude `|eps_I| = Gamma/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BWParams {
    pub epsilon_r: f64,
    pub epsilon_i: f64,
}

impl BWParams {
    pub fn new(epsilon_r: f64, epsilon_i: f64) -> Self {
        Self {
            epsilon_r,
            epsilon_i: epsilon_i.abs(),
        }
    }

    pub fn gamma(&self) -> f64 {
        2.0 * self.epsilon_i
    }
}

fn threshold(p: &impl Potential) -> Result<f64, ScatteringError> {
    p.asymptote().ok_or(ScatteringError::NoAsymptote)
}

fn wavenumber(p: &impl Potential, epsilon: f64) -> Result<f64, ScatteringError> {
    let asym = threshold(p)?;
    if !(epsilon > asym) {
        return Err(ScatteringError::ClosedChannel {
            epsilon,
            threshold: asym,
        });
    }
    Ok((2.0 * (epsilon - asym)).sqrt())
}

/// `phi(-a)` and `phi'(-a)` for the outgoing solution with `phi(a) = e^{ika}`.
pub fn integrate_outgoing(
    p: &impl Potential,
    epsilon: f64,
    a: f64,
    control: GridControl,
) -> Result<(Complex64, Complex64), ScatteringError> {
    if !(a > 0.0) {
        return Err(ScatteringError::InvalidInput(format!("matching radius {a} must be positive")));
    }
    let k = wavenumber(p, epsilon)?;
    let phi = Complex64::from_polar(1.0, k * a);
    let dphi = Complex64::i() * k * phi;
    let y = SVector::<f64, 4>::new(phi.re, phi.im, dphi.re, dphi.im);
    let v = |x: f64| p.value(x);
    let end = propagate(&v, epsilon, y, a, -a, &p.breakpoints(), control)?;
    Ok((Complex64::new(end[0], end[1]), Complex64::new(end[2], end[3])))
}

/// Split `phi(-a)`, `phi'(-a)` into incident and reflected amplitudes (`c = 1`).
pub fn decompose_amplitudes(phi: Complex64, dphi: Complex64, k: f64, a: f64) -> AmplitudeSet {
    let ik = Complex64::new(0.0, k);
    let ratio = dphi / ik;
    AmplitudeSet {
        a: Complex64::from_polar(1.0, k * a) * (phi + ratio) / 2.0,
        b: Complex64::from_polar(1.0, -k * a) * (phi - ratio) / 2.0,
        c: Complex64::new(1.0, 0.0),
        k,
    }
}

/// Amplitudes at energy `epsilon` using the potential's matching radius.
pub fn amplitudes(p: &impl Potential, epsilon: f64, control: GridControl) -> Result<AmplitudeSet, ScatteringError> {
    let a = p.matching_radius();
    let k = wavenumber(p, epsilon)?;
    let (phi, dphi) = integrate_outgoing(p, epsilon, a, control)?;
    Ok(decompose_amplitudes(phi, dphi, k, a))
}

/// `T = 1/|A|^2`, `R = |B|^2/|A|^2` with the flux residual `|T + R - 1|`.
pub fn transmission(p: &impl Potential, epsilon: f64) -> Result<TransmissionPoint, ScatteringError> {
    let amp = amplitudes(p, epsilon, GridControl::default())?;
    let norm = amp.a.norm_sqr();
    let t = amp.c.norm_sqr() / norm;
    let r = amp.b.norm_sqr() / norm;
    let residual = (t + r - 1.0).abs();
    if !(residual <= UNITARITY_HARD_LIMIT) {
        return Err(ScatteringError::Unitarity {
            epsilon,
            residual,
            limit: UNITARITY_HARD_LIMIT,
        });
    }
    Ok(TransmissionPoint {
        epsilon,
        t,
        r,
        unitarity_residual: residual,
    })
}

/// `T` on `n_points` equally spaced energies from `lo` to `hi`.
pub fn scan_transmission(
    p: &impl Potential,
    range: (f64, f64),
    n_points: usize,
) -> Result<TransmissionCurve, ScatteringError> {
    let (lo, hi) = range;
    if n_points < 2 || !(hi > lo) {
        return Err(ScatteringError::InvalidInput(format!(
            "need lo < hi and at least 2 points, got [{lo}, {hi}] with {n_points}"
        )));
    }
    let asym = threshold(p)?;
    if !(lo > asym) {
        return Err(ScatteringError::ClosedChannel {
            epsilon: lo,
            threshold: asym,
        });
    }
    let step = (hi - lo) / (n_points - 1) as f64;
    let points = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let eps = if i + 1 == n_points { hi } else { lo + i as f64 * step };
            transmission(p, eps)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransmissionCurve { points })
}

impl TransmissionCurve {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.unitarity_residual).fold(0.0, f64::max)
    }

    /// Brackets `(left, right)` around each interior local maximum of `T`.
    pub fn coarse_peaks(&self) -> Vec<(f64, f64)> {
        self.points
            .windows(3)
            .filter(|w| w[1].t >= w[0].t && w[1].t > w[2].t)
            .map(|w| (w[0].epsilon, w[2].epsilon))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,T,R,residual\n");
        for p in &self.points {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                p.epsilon, p.t, p.r, p.unitarity_residual
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Energy of the highest transmission maximum inside `bracket`, refined by
/// golden-section search to `tol`.
///
/// The bracket is sampled first; the largest interior sample maximum is then
/// refined between its neighbours. The potential is symmetric, so the peak
/// must reach `T = 1` within [`PEAK_TOLERANCE`].
pub fn find_transmission_peak(p: &impl Potential, bracket: (f64, f64), tol: f64) -> Result<f64, ScatteringError> {
    const SAMPLES: usize = 65;
    let curve = scan_transmission(p, bracket, SAMPLES)?;
    let best = curve
        .points
        .windows(3)
        .filter(|w| w[1].t >= w[0].t && w[1].t > w[2].t)
        .max_by(|x, y| x[1].t.total_cmp(&y[1].t))
        .map(|w| (w[0].epsilon, w[2].epsilon))
        .ok_or(ScatteringError::Bracket {
            lo: bracket.0,
            hi: bracket.1,
        })?;
    let peak = golden_max(
        |e| transmission(p, e).map_or(f64::NEG_INFINITY, |pt| pt.t),
        best.0,
        best.1,
        tol,
    );
    let point = transmission(p, peak)?;
    if point.t < 1.0 - PEAK_TOLERANCE {
        return Err(ScatteringError::PeakBelowUnity {
            epsilon: peak,
            t: point.t,
        });
    }
    Ok(peak)
}

/// Lorentzian `eps_I^2 / ((eps - eps_R)^2 + eps_I^2)`.
pub fn bw_profile(epsilon: f64, params: &BWParams) -> f64 {
    let gi = params.epsilon_i;
    let d = epsilon - params.epsilon_r;
    gi * gi / (d * d + gi * gi)
}

/// Largest `|T - BW|` over `n_points` energies spanning `eps_R +- window_halfwidth`.
pub fn bw_deviation(
    p: &impl Potential,
    params: &BWParams,
    window_halfwidth: f64,
    n_points: usize,
) -> Result<f64, ScatteringError> {
    let range = (
        params.epsilon_r - window_halfwidth,
        params.epsilon_r + window_halfwidth,
    );
    let curve = scan_transmission(p, range, n_points)?;
    Ok(curve
        .points
        .iter()
        .map(|pt| (pt.t - bw_profile(pt.epsilon, params)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::Param;

    fn p(s: &str) -> Param {
        s.parse().unwrap()
    }

    #[test]
    fn free_particle_is_transparent() {
        let free = PotentialSpec::free();
        let (phi, dphi) = integrate_outgoing(&free, 1.3, 5.0, GridControl::default()).unwrap();
        let k = (2.6f64).sqrt();
        let expected = Complex64::from_polar(1.0, -k * 5.0);
        assert!((phi - expected).norm() < 1e-10);
        assert!((dphi - Complex64::i() * k * expected).norm() < 1e-10);
        let pt = transmission(&free, 1.0).unwrap();
        assert!((pt.t - 1.0).abs() < 1e-12 && pt.r < 1e-20);
    }

    #[test]
    fn decomposition_of_pure_waves() {
        let (k, a) = (1.7, 2.3);
        let ik = Complex64::new(0.0, k);
        let incident = Complex64::from_polar(1.0, -k * a);
        let amp = decompose_amplitudes(incident, ik * incident, k, a);
        assert!((amp.a - 1.0).norm() < 1e-15 && amp.b.norm() < 1e-15);
        let left = Complex64::from_polar(1.0, k * a);
        let amp = decompose_amplitudes(left, -ik * left, k, a);
        assert!(amp.a.norm() < 1e-15 && (amp.b - 1.0).norm() < 1e-15);
    }

    #[test]
    fn closed_channel_is_rejected() {
        let kg = PotentialSpec::kg(p("0.8"), p("0.1"));
        assert!(matches!(
            transmission(&kg, 0.5),
            Err(ScatteringError::ClosedChannel { .. })
        ));
        assert!(matches!(
            transmission(&PotentialSpec::harmonic(), 1.0),
            Err(ScatteringError::NoAsymptote)
        ));
    }

    #[test]
    fn sharp_peak_reaches_unity() {
        let pot = PotentialSpec::gaussian(p("10"), p("1"));
        let (eps_r, half_gamma) = (1.7816763825869113601, 0.023794309337967155927);
        // The true peak sits ~1e-3 above eps_R.
        let pt = transmission(&pot, eps_r).unwrap();
        assert!(pt.t > 0.998, "{pt:?}");
        let peak = find_transmission_peak(&pot, (1.5, 2.1), 1e-10).unwrap();
        assert!((peak - eps_r).abs() < half_gamma);
        let top = transmission(&pot, peak).unwrap();
        assert!(top.t > 1.0 - 1e-9, "{top:?}");
        assert!(top.unitarity_residual < 1e-10);
    }

    #[test]
    fn bw_profile_shape() {
        let params = BWParams::new(2.0, -0.1);
        assert_eq!(params.epsilon_i, 0.1);
        assert_eq!(bw_profile(2.0, &params), 1.0);
        assert!((bw_profile(2.1, &params) - 0.5).abs() < 1e-12);
        assert!((bw_profile(1.9, &params) - 0.5).abs() < 1e-12);
        assert!(bw_profile(1e9, &params) < 1e-15);
    }

    #[test]
    fn free_particle_bw_deviation_is_analytic() {
        let params = BWParams::new(1.0, 0.1);
        let dev = bw_deviation(&PotentialSpec::free(), &params, 0.2, 5).unwrap();
        // Window edges sit two half-widths out: BW = 1/5.
        assert!((dev - 0.8).abs() < 1e-10);
    }

    #[test]
    fn csv_has_header_and_ascending_rows() {
        let curve = scan_transmission(&PotentialSpec::free(), (0.1, 1.0), 10).unwrap();
        let csv = curve.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("epsilon,T,R,residual"));
        let eps: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(eps.len(), 10);
        assert!(eps.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(eps[9], 1.0);
        for (row, pt) in eps.iter().zip(&curve.points) {
            assert_eq!(*row, pt.epsilon);
        }
    }

    #[test]
    fn no_peak_in_monotone_bracket() {
        let barrier = SquareBarrier {
            height: 5.0,
            half_width: 1.0,
        };
        let err = find_transmission_peak(&barrier, (0.5, 1.0), 1e-10).unwrap_err();
        assert!(matches!(err, ScatteringError::Bracket { .. }));
    }
}
