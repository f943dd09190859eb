//! Locating the lowest eigenvalues in an energy window.

use rayon::prelude::*;
use rug::Complex;
use serde::{Deserialize, Serialize};

use super::seeds::SearchRegion;
use super::{HankelSpec, Parity, ResonanceResult, RpmError, RpmSolver};
use crate::model::PotentialSpec;
use crate::mp::{abs, Precision};

/// How to look for the lowest states of one potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub parities: Vec<Parity>,
    /// Hankel displacement `d`.
    pub displacement: usize,
    /// Dimension at which grid seeds are first refined.
    pub d_probe: usize,
    pub d_max: usize,
    /// Larger final dimension for real (bound-state) sequences, which
    /// converge more slowly than the complex ones.
    pub bound_d_max: Option<usize>,
    /// Window in the lower half plane: `(re_lo, re_hi)` and `(im_lo, im_hi)`.
    pub re: (f64, f64),
    pub im: (f64, f64),
    /// Seed grid resolution along the real and imaginary axes.
    pub grid: (usize, usize),
    pub count: usize,
    /// Largest error estimate accepted as a converged sequence.
    pub accept: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            parities: vec![Parity::Even, Parity::Odd],
            displacement: 0,
            d_probe: 8,
            d_max: 20,
            bound_d_max: None,
            re: (0.0, 3.0),
            im: (-2.0, 0.0),
            grid: (8, 4),
            count: 6,
            accept: 1e-8,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<(), RpmError> {
        if self.d_probe < 2 || self.d_max <= self.d_probe {
            return Err(RpmError::InvalidInput(format!(
                "need 2 <= d_probe < d_max, got {} and {}",
                self.d_probe, self.d_max
            )));
        }
        if self.bound_d_max.is_some_and(|d| d < self.d_max) {
            return Err(RpmError::InvalidInput("bound_d_max must not be below d_max".into()));
        }
        if self.parities.is_empty() || self.count == 0 {
            return Err(RpmError::InvalidInput("nothing to search for".into()));
        }
        if !(self.re.0 < self.re.1 && self.im.0 < self.im.1) || self.im.1 > 0.0 {
            return Err(RpmError::InvalidInput(
                "search box must be non-empty and in the lower half plane".into(),
            ));
        }
        Ok(())
    }

    fn inside(&self, z: &Complex) -> bool {
        let (re, im) = (z.real().to_f64(), z.imag().to_f64());
        let pad_re = 0.05 * (self.re.1 - self.re.0);
        let pad_im = 0.05 * (self.im.1 - self.im.0);
        re >= self.re.0 - pad_re && re <= self.re.1 + pad_re && -im.abs() >= self.im.0 - pad_im
    }
}

/// The `count` lowest (by `eps_R`) converged eigenvalues in the search box,
/// over the requested parities.
///
/// Seeds come from a grid over the box, a row of real seeds, and the roots of
/// the `D = 4` Hankel polynomial. Each is refined at `d_probe`, duplicates are
/// merged, and the survivors are followed to `d_max`; only sequences whose
/// final error estimate is below `accept` are kept.
///
/// When the potential has a finite asymptote, states below it must be bound
/// (real) and states above it resonances (complex); converged sequences on
/// the wrong side are Hankel artifacts and are dropped.
pub fn lowest_states(
    potential: &PotentialSpec,
    precision: Precision,
    config: &SearchConfig,
) -> Result<Vec<ResonanceResult>, RpmError> {
    config.validate()?;
    let mut found: Vec<ResonanceResult> = Vec::new();
    for &parity in &config.parities {
        let top = config.bound_d_max.unwrap_or(config.d_max);
        let solver = RpmSolver::new(potential, parity, precision, top, config.displacement);
        for result in states_for_parity(&solver, config)? {
            if let Some(threshold) = potential.asymptote() {
                let below = result.epsilon.real().to_f64() < threshold;
                if below != result.is_bound() {
                    continue;
                }
            }
            merge(&mut found, result, precision);
        }
    }
    found.sort_by(|a, b| a.epsilon.real().partial_cmp(b.epsilon.real()).expect("finite"));
    found.truncate(config.count);
    Ok(found)
}

fn states_for_parity(solver: &RpmSolver, config: &SearchConfig) -> Result<Vec<ResonanceResult>, RpmError> {
    let bits = solver.precision().bits();
    let mut seeds: Vec<Complex> = Vec::new();
    let (nr, ni) = (config.grid.0.max(2), config.grid.1.max(1));
    for i in 0..nr {
        let re = config.re.0 + (config.re.1 - config.re.0) * (i as f64 + 0.5) / nr as f64;
        seeds.push(Complex::with_val(bits, (re, 0)));
        for j in 0..ni {
            let im = config.im.0 + (config.im.1 - config.im.0) * (j as f64 + 0.5) / ni as f64;
            seeds.push(Complex::with_val(bits, (re, im)));
        }
    }
    let region = SearchRegion::ComplexBox {
        re: config.re,
        im: (config.im.0, config.im.1),
    };
    if let Ok(poly_seeds) = solver.seed_roots(4, config.displacement, &region) {
        seeds.extend(poly_seeds);
    }

    let probe = HankelSpec::new(config.d_probe, config.displacement)?;
    let probed: Vec<Complex> = seeds
        .par_iter()
        .filter_map(|s| solver.find_root_default(probe, s).ok())
        .map(|mut z| {
            if z.imag().is_sign_positive() {
                z.conj_mut();
            }
            z
        })
        .filter(|z| config.inside(z))
        .collect();
    let mut unique: Vec<Complex> = Vec::new();
    for z in probed {
        let dup = unique.iter().any(|u| {
            abs(&Complex::with_val(bits, u - &z)).to_f64() < 1e-9 * (1.0 + abs(u).to_f64())
        });
        if !dup {
            unique.push(z);
        }
    }

    let results: Vec<ResonanceResult> = unique
        .par_iter()
        .filter_map(|z| {
            let d_max = if z.imag().is_zero() {
                config.bound_d_max.unwrap_or(config.d_max)
            } else {
                config.d_max
            };
            solver
                .converge_resonance(config.displacement, config.d_probe, d_max, z)
                .ok()
        })
        .filter(|r| r.error_estimate <= config.accept && config.inside(&r.epsilon))
        .collect();
    Ok(results)
}

fn merge(found: &mut Vec<ResonanceResult>, candidate: ResonanceResult, precision: Precision) {
    let bits = precision.bits();
    let tol = |a: &ResonanceResult, b: &ResonanceResult| {
        (a.error_estimate.max(b.error_estimate) * 100.0).max(1e-12)
    };
    if let Some(existing) = found.iter_mut().find(|r| {
        let d = Complex::with_val(bits, &r.epsilon - &candidate.epsilon);
        crate::mp::max_component(&d).to_f64() <= tol(r, &candidate)
    }) {
        // Same state reached twice: a real member wins (bound state), then
        // the better-converged one.
        let prefer = (candidate.is_bound() && !existing.is_bound())
            || (candidate.is_bound() == existing.is_bound()
                && candidate.error_estimate < existing.error_estimate);
        if prefer {
            *existing = candidate;
        }
    } else {
        found.push(candidate);
    }
}
