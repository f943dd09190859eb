use rug::{Complex, Float};

use super::{HankelSpec, RpmError, RpmSolver};
use crate::mp::{abs, to_sci_string};

/// Steps below this fraction of the working precision that stop shrinking
/// are treated as having hit the determinant's rounding floor.
const NOISE_FLOOR_DIGITS_FRACTION: f64 = 0.25;

/// Two consecutive Newton steps whose ratio exceeds this are in the linear
/// regime of a (nearly) multiple root and get an Aitken extrapolation.
const LINEAR_RATIO: f64 = 0.2;

impl RpmSolver {
    /// Newton iteration on `H_D^d(eps) = 0` from `seed`.
    ///
    /// At large `D` the physical root sits inside a tight cluster of roots,
    /// where plain Newton only converges linearly. Whenever two consecutive
    /// steps shrink by less than a factor of five the iterate is replaced by
    /// its Aitken extrapolation; the jump is undone if the next step grows.
    ///
    /// Stops once `|d eps| < tol`, or when a step already below
    /// `10^{-digits/4}` grows instead of shrinking, which is where rounding in
    /// the determinant takes over. A real seed stays on the real axis, since the
    /// recurrence has real coefficients.
    pub fn find_root(
        &self,
        spec: HankelSpec,
        seed: &Complex,
        tol: &Float,
        max_iter: usize,
    ) -> Result<Complex, RpmError> {
        if !seed.real().is_finite() || !seed.imag().is_finite() {
            return Err(RpmError::InvalidInput("seed must be finite".into()));
        }
        if *tol <= 0 {
            return Err(RpmError::InvalidInput("tolerance must be positive".into()));
        }
        let bits = self.precision().bits();
        let floor = 10f64.powf(-(self.precision().digits() as f64) * NOISE_FLOOR_DIGITS_FRACTION);
        let mut eps = Complex::with_val(bits, seed);
        // Point and step of the previous plain Newton iteration.
        let mut previous: Option<(Complex, Complex, f64)> = None;
        // Plain iterate and step size to fall back to after an extrapolation.
        let mut fallback: Option<(Complex, f64)> = None;
        for _ in 0..max_iter {
            let eval = self.hankel_with_derivative(&eps, spec)?;
            if eval.value.is_zero() {
                return Ok(eps);
            }
            let step = match eval.newton_step {
                Some(step) if step.real().is_finite() && step.imag().is_finite() => step,
                _ => {
                    return Err(RpmError::SingularDerivative {
                        at: format_complex(&eps),
                    })
                }
            };
            let size_f = abs(&step);
            let size = size_f.to_f64();
            if let Some((plain, plain_size)) = fallback.take() {
                if size > plain_size {
                    if plain_size < floor * (1.0 + abs(&plain).to_f64()) {
                        return Ok(plain);
                    }
                    eps = plain;
                    previous = None;
                    continue;
                }
            }
            let next = Complex::with_val(bits, &eps - &step);
            if size_f < *tol {
                return Ok(next);
            }
            let scale = 1.0 + abs(&next).to_f64();
            match previous.take() {
                Some((_, _, prev_size)) if size < floor * scale && size > prev_size => {
                    return Ok(next);
                }
                Some((prev_eps, prev_step, prev_size)) if size > LINEAR_RATIO * prev_size => {
                    let denom = Complex::with_val(bits, &prev_step - &step);
                    if !denom.is_zero() {
                        let shift = Complex::with_val(bits, prev_step.square_ref()) / denom;
                        let jump = Complex::with_val(bits, &prev_eps - &shift);
                        if jump.real().is_finite() && jump.imag().is_finite() {
                            fallback = Some((next, size));
                            eps = jump;
                            continue;
                        }
                    }
                    previous = Some((eps, step, size));
                    eps = next;
                }
                _ => {
                    previous = Some((eps, step, size));
                    eps = next;
                }
            }
        }
        Err(RpmError::NonConvergence {
            iterations: max_iter,
            last: format_complex(&eps),
        })
    }

    /// [`find_root`](Self::find_root) with the default tolerance
    /// `10^-(digits - 10)` and 80 iterations.
    pub fn find_root_default(&self, spec: HankelSpec, seed: &Complex) -> Result<Complex, RpmError> {
        self.find_root(spec, seed, &self.precision().newton_tolerance(), 80)
    }
}

pub(crate) fn format_complex(z: &Complex) -> String {
    format!("{} {:+e}i", to_sci_string(z.real()), z.imag().to_f64())
}
