//! Thin layer over the Dormand-Prince 5(4) integrator for `phi'' = 2 (v(x) - eps) phi`.

use ode_solvers::dop_shared::IntegrationError;
use ode_solvers::{Dopri5, OutputType, SVector, System};
use serde::{Deserialize, Serialize};

use super::ScatteringError;

/// Step-size control for the embedded Runge-Kutta pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridControl {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for GridControl {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

/// State layout: the first `N/2` entries are components of `phi`, the rest
/// the matching components of `phi'`.
struct Schrodinger<'a> {
    potential: &'a (dyn Fn(f64) -> f64 + 'a),
    energy: f64,
}

impl<const N: usize> System<f64, SVector<f64, N>> for Schrodinger<'_> {
    fn system(&self, x: f64, y: &SVector<f64, N>, dy: &mut SVector<f64, N>) {
        let half = N / 2;
        let w = 2.0 * ((self.potential)(x) - self.energy);
        for i in 0..half {
            dy[i] = y[half + i];
            dy[half + i] = w * y[i];
        }
    }
}

fn solver<'a, const N: usize>(
    potential: &'a (dyn Fn(f64) -> f64 + 'a),
    energy: f64,
    y: SVector<f64, N>,
    from: f64,
    to: f64,
    control: GridControl,
) -> Dopri5<f64, SVector<f64, N>, Schrodinger<'a>> {
    let system = Schrodinger { potential, energy };
    Dopri5::from_param(
        system,
        from,
        to,
        0.0,
        y,
        control.rtol,
        control.atol,
        0.9,
        0.04,
        0.2,
        10.0,
        (to - from).abs(),
        0.0,
        1_000_000,
        // The stiffness heuristic misfires on evanescent growth under a barrier.
        u32::MAX,
        OutputType::Sparse,
    )
}

fn map_error(err: IntegrationError) -> ScatteringError {
    match err {
        IntegrationError::StepSizeUnderflow { x } | IntegrationError::StiffnessDetected { x } => {
            ScatteringError::Stiffness { x }
        }
        IntegrationError::MaxNumStepReached { x, .. } => ScatteringError::Stiffness { x },
    }
}

/// State at `to`, integrating segment by segment through `breakpoints`
/// (where `v` may jump) that lie strictly between `from` and `to`.
pub(crate) fn propagate<const N: usize>(
    potential: &dyn Fn(f64) -> f64,
    energy: f64,
    y: SVector<f64, N>,
    from: f64,
    to: f64,
    breakpoints: &[f64],
    control: GridControl,
) -> Result<SVector<f64, N>, ScatteringError> {
    let (lo, hi) = (from.min(to), from.max(to));
    let mut stops: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    if to < from {
        stops.reverse();
    }
    stops.push(to);
    let mut x = from;
    let mut state = y;
    for stop in stops {
        if stop == x {
            continue;
        }
        let mut stepper = solver(potential, energy, state, x, stop, control);
        stepper.integrate().map_err(map_error)?;
        state = *stepper.y_out().last().expect("integrator produced no output");
        x = stop;
    }
    Ok(state)
}

/// States on the uniform grid `from + i (to - from)/n`, `i = 0..=n`, for a
/// forward integration (`to > from >= 0`) through a smooth potential.
///
/// Each grid interval is a separate integration, so every sample is a true
/// step endpoint rather than an interpolant.
pub(crate) fn propagate_grid<const N: usize>(
    potential: &dyn Fn(f64) -> f64,
    energy: f64,
    y: SVector<f64, N>,
    from: f64,
    to: f64,
    n: usize,
    control: GridControl,
) -> Result<Vec<(f64, SVector<f64, N>)>, ScatteringError> {
    let h = (to - from) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push((from, y));
    let mut state = y;
    for i in 1..=n {
        let x0 = from + (i - 1) as f64 * h;
        let x1 = if i == n { to } else { from + i as f64 * h };
        let mut stepper = solver(potential, energy, state, x0, x1, control);
        stepper.integrate().map_err(map_error)?;
        state = *stepper.y_out().last().expect("integrator produced no output");
        out.push((x1, state));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_oscillator_backward_and_forward() {
        let zero = |_: f64| 0.0;
        // eps = 1/2: phi = cos x.
        let y0 = SVector::<f64, 2>::new(1.0, 0.0);
        let y = propagate(&zero, 0.5, y0, 0.0, 7.0, &[], GridControl::default()).unwrap();
        assert!((y[0] - 7f64.cos()).abs() < 1e-11);
        assert!((y[1] + 7f64.sin()).abs() < 1e-11);
        let back = propagate(&zero, 0.5, y, 7.0, -3.0, &[1.0, -1.0], GridControl::default()).unwrap();
        assert!((back[0] - 3f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn grid_samples_are_uniform() {
        let zero = |_: f64| 0.0;
        let y0 = SVector::<f64, 2>::new(0.0, 1.0);
        let samples = propagate_grid(&zero, 0.5, y0, 0.0, 2.0, 8, GridControl::default()).unwrap();
        assert_eq!(samples.len(), 9);
        for (i, (x, y)) in samples.iter().enumerate() {
            assert!((x - 0.25 * i as f64).abs() < 1e-15);
            assert!((y[0] - x.sin()).abs() < 1e-11);
        }
    }
}
