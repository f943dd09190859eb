//! Siegert and transmission-state wavefunctions, and the Siegert-approximation
//! width `Gamma = k_T |phi_T(a)|^2 / int_0^b |phi_T|^2`.

use std::fmt::Write as _;

use num_complex::Complex64;
use ode_solvers::SVector;
use serde::{Deserialize, Serialize};

use crate::model::{ModelError, PotentialSpec};
use crate::mp::Precision;
use crate::rpm::Parity;
use crate::scattering::{
    find_transmission_peak, propagate, propagate_grid, BWParams, GridControl, Potential, ScatteringError,
};

/// Default number of Taylor terms beyond `c_0`.
pub const DEFAULT_TERMS: usize = 24;

/// Tail ratio `|c_M x^{2M}| / max_{j<M} |c_j x^{2j}|` that bounds the validity radius.
pub const RADIUS_RATIO: f64 = 1e-6;

/// Relative tolerance of the Simpson/Richardson norm integral.
pub const QUADRATURE_RTOL: f64 = 1e-8;

const DEFAULT_GRID: usize = 512;
const MAX_GRID: usize = 1 << 16;
const NORM_FLOOR: f64 = 1e-280;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SiegertError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("|x| = {x} is beyond the series validity radius {radius}")]
    Radius { x: f64, radius: f64 },
    #[error("norm integral {norm:e} is degenerate")]
    Degenerate { norm: f64 },
    #[error("norm integral did not reach relative tolerance {QUADRATURE_RTOL:e} (estimate {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Truncated expansion `phi(x) = x^s sum_{j=0}^M c_j x^{2j}` with `c_0 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveSeries {
    pub parity: Parity,
    pub epsilon: Complex64,
    pub c: Vec<Complex64>,
    pub validity_radius: f64,
}

/// A real solution sampled on a uniform grid from the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveSample {
    pub parity: Parity,
    pub epsilon: f64,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SAWidthReport {
    pub gamma_sa: f64,
    pub epsilon_t_used: f64,
    pub a_used: f64,
    pub b_used: f64,
    /// `int_0^b phi_T^2 dx`.
    pub norm_integral: f64,
    /// Squared amplitude of the outgoing wave at `x = a`.
    pub boundary_density: f64,
}

/// Taylor coefficients of the even (`s = 0`) or odd (`s = 1`) solution.
///
/// `v` holds `[v_1, v_2, ...]`; missing entries are zero.
pub fn wavefunction_series(v: &[f64], parity: Parity, epsilon: Complex64, m: usize) -> Result<WaveSeries, SiegertError> {
    if m < 1 {
        return Err(SiegertError::InvalidInput("need at least one term beyond c_0".into()));
    }
    let s = parity.s() as f64;
    let vk = |k: usize| if k == 0 { 0.0 } else { v.get(k - 1).copied().unwrap_or(0.0) };
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for j in 0..m {
        let sum: Complex64 = (1..=j).map(|k| c[j - k] * vk(k)).sum();
        let jf = j as f64;
        let denom = (2.0 * jf + s + 1.0) * (2.0 * jf + s + 2.0);
        c.push((sum - epsilon * c[j]) * (2.0 / denom));
    }
    let validity_radius = validity_radius(&c);
    Ok(WaveSeries {
        parity,
        epsilon,
        c,
        validity_radius,
    })
}

/// Largest `x` where `|c_M x^{2M}| / max_{j<M} |c_j x^{2j}| < RADIUS_RATIO`.
fn validity_radius(c: &[Complex64]) -> f64 {
    let m = c.len() - 1;
    let last = c[m].norm();
    if last == 0.0 {
        return f64::INFINITY;
    }
    // The ratio is the smallest of |c_M/c_j| x^{2(M-j)}, each growing with x,
    // so it stays below the threshold up to the largest crossing.
    c[..m]
        .iter()
        .enumerate()
        .filter(|(_, cj)| cj.norm() > 0.0)
        .map(|(j, cj)| (RADIUS_RATIO * cj.norm() / last).powf(1.0 / (2 * (m - j)) as f64))
        .fold(0.0, f64::max)
}

impl WaveSeries {
    /// Series for `p` using its Taylor coefficients.
    pub fn for_potential(p: &PotentialSpec, parity: Parity, epsilon: Complex64, m: usize) -> Result<Self, SiegertError> {
        let v: Vec<f64> = p
            .taylor_coefficients(m, Precision::new(30))
            .iter()
            .map(|f| f.to_f64())
            .collect();
        wavefunction_series(&v, parity, epsilon, m)
    }

    /// `(x, phi(x))` at `n + 1` evenly spaced points on `[-x_max, x_max]`.
    pub fn sample(&self, x_max: f64, n: usize) -> Result<Vec<(f64, Complex64)>, SiegertError> {
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let x = -x_max + 2.0 * x_max * i as f64 / n as f64;
                evaluate_wave(self, x).map(|phi| (x, phi))
            })
            .collect()
    }
}

/// `x^s sum_j c_j x^{2j}` for `|x|` within the validity radius.
pub fn evaluate_wave(series: &WaveSeries, x: f64) -> Result<Complex64, SiegertError> {
    if x.abs() > series.validity_radius {
        return Err(SiegertError::Radius {
            x: x.abs(),
            radius: series.validity_radius,
        });
    }
    let z = x * x;
    let sum = series.c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, cj| acc * z + cj);
    Ok(match series.parity {
        Parity::Even => sum,
        Parity::Odd => sum * x,
    })
}

/// CSV `x,re_phi,im_phi,abs2` of sampled wavefunction values.
pub fn wave_csv(points: &[(f64, Complex64)]) -> String {
    let mut out = String::from("x,re_phi,im_phi,abs2\n");
    for (x, phi) in points {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", x, phi.re, phi.im, phi.norm_sqr())
            .expect("writing to a String");
    }
    out
}

fn initial_state(parity: Parity) -> SVector<f64, 2> {
    match parity {
        Parity::Even => SVector::<f64, 2>::new(1.0, 0.0),
        Parity::Odd => SVector::<f64, 2>::new(0.0, 1.0),
    }
}

/// Real solution with parity initial data, from `x = 0` to `x = a`.
pub fn transmission_state(
    p: &impl Potential,
    parity: Parity,
    epsilon_t: f64,
    a: f64,
) -> Result<WaveSample, SiegertError> {
    sample_state(p, parity, epsilon_t, a, DEFAULT_GRID)
}

fn sample_state(p: &impl Potential, parity: Parity, epsilon: f64, to: f64, n: usize) -> Result<WaveSample, SiegertError> {
    if !(to > 0.0) || n < 2 {
        return Err(SiegertError::InvalidInput(format!(
            "need a positive end point and at least 2 intervals, got {to} and {n}"
        )));
    }
    let v = |x: f64| p.value(x);
    let grid = propagate_grid(&v, epsilon, initial_state(parity), 0.0, to, n, GridControl::default())?;
    let mut sample = WaveSample {
        parity,
        epsilon,
        x: Vec::with_capacity(n + 1),
        phi: Vec::with_capacity(n + 1),
        dphi: Vec::with_capacity(n + 1),
    };
    for (x, y) in grid {
        sample.x.push(x);
        sample.phi.push(y[0]);
        sample.dphi.push(y[1]);
    }
    Ok(sample)
}

impl WaveSample {
    pub fn points(&self) -> Vec<(f64, Complex64)> {
        self.x
            .iter()
            .zip(&self.phi)
            .map(|(&x, &phi)| (x, Complex64::new(phi, 0.0)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        wave_csv(&self.points())
    }
}

/// Composite Simpson over uniformly spaced samples (even number of intervals).
fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let inner: f64 = values[1..n]
        .iter()
        .enumerate()
        .map(|(i, f)| if i % 2 == 0 { 4.0 * f } else { 2.0 * f })
        .sum();
    h / 3.0 * (values[0] + inner + values[n])
}

/// `int_0^to phi^2` for the solution of `v` starting from `start` at `x = 0`,
/// by Simpson's rule, doubling the grid until the Richardson estimate
/// `|S_2n - S_n| / 15` is below `QUADRATURE_RTOL` relative. Also returns the
/// state at `to`.
fn norm_integral(
    v: &dyn Fn(f64) -> f64,
    start: SVector<f64, 2>,
    epsilon: f64,
    to: f64,
) -> Result<(f64, SVector<f64, 2>), SiegertError> {
    let mut n = 64;
    loop {
        let grid = propagate_grid(v, epsilon, start, 0.0, to, 2 * n, GridControl::default())?;
        let density: Vec<f64> = grid.iter().map(|(_, y)| y[0] * y[0]).collect();
        let h = to / (2 * n) as f64;
        let fine = simpson(&density, h);
        let coarse_values: Vec<f64> = density.iter().step_by(2).copied().collect();
        let coarse = simpson(&coarse_values, 2.0 * h);
        let estimate = (fine - coarse).abs() / 15.0;
        if estimate <= QUADRATURE_RTOL * fine.abs() {
            let end = grid.last().expect("non-empty grid").1;
            return Ok((fine + (fine - coarse) / 15.0, end));
        }
        if 2 * n >= MAX_GRID {
            return Err(SiegertError::Quadrature {
                estimate: estimate / fine.abs(),
            });
        }
        n *= 2;
    }
}

/// Siegert-approximation width at the transmission energy `epsilon_t`.
///
/// The regular solution is real, so outside the potential it is a standing
/// wave `alpha cos(kx + delta)`; its outgoing-wave density is the envelope
/// `alpha^2 = phi(a)^2 + (phi'(a)/k)^2`.
pub fn sa_width(p: &PotentialSpec, parity: Parity, epsilon_t: f64) -> Result<SAWidthReport, SiegertError> {
    let asym = p.asymptote().ok_or(ScatteringError::NoAsymptote)?;
    if !(epsilon_t > asym) {
        return Err(ScatteringError::ClosedChannel {
            epsilon: epsilon_t,
            threshold: asym,
        }
        .into());
    }
    let k = (2.0 * (epsilon_t - asym)).sqrt();
    let a = p.matching_radius();
    let b = p.barrier_geometry()?.b;
    let v = |x: f64| p.value(x);
    let (norm, at_b) = norm_integral(&v, initial_state(parity), epsilon_t, b)?;
    if !(norm > NORM_FLOOR) {
        return Err(SiegertError::Degenerate { norm });
    }
    let at_a = propagate(&v, epsilon_t, at_b, b, a, &[], GridControl::default()).map_err(SiegertError::from)?;
    let boundary_density = at_a[0] * at_a[0] + (at_a[1] / k).powi(2);
    Ok(SAWidthReport {
        gamma_sa: k * boundary_density / norm,
        epsilon_t_used: epsilon_t,
        a_used: a,
        b_used: b,
        norm_integral: norm,
        boundary_density,
    })
}

/// Transmission peak nearest a resonance, or `eps_R` itself when no peak can
/// be bracketed. The flag is `true` when the fallback was used.
pub fn transmission_energy(p: &PotentialSpec, params: &BWParams) -> (f64, bool) {
    let asym = p.asymptote().unwrap_or(0.0);
    let width = params.gamma().max(1e-12);
    let lo = (params.epsilon_r - width).max(asym + 1e-3 * (params.epsilon_r - asym));
    let hi = params.epsilon_r + width;
    match find_transmission_peak(p, (lo, hi), 1e-10) {
        Ok(eps) => (eps, false),
        Err(_) => (params.epsilon_r, true),
    }
}

/// `int_b^a phi^2 / int_0^b phi^2` for the regular solution at `epsilon`.
pub fn localization_ratio(p: &PotentialSpec, parity: Parity, epsilon: f64) -> Result<f64, SiegertError> {
    let a = p.matching_radius();
    let b = p.barrier_geometry()?.b;
    let v = |x: f64| p.value(x);
    let (inner, at_b) = norm_integral(&v, initial_state(parity), epsilon, b)?;
    let beyond = |x: f64| p.value(x + b);
    let (outer, _) = norm_integral(&beyond, at_b, epsilon, a - b)?;
    Ok(outer / inner)
}
