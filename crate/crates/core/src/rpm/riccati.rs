use rug::{Complex, Float};

use super::scalar::{Dual, Scalar};
use super::{Parity, RpmError};

/// Taylor coefficients `f_0 .. f_nmax` of the regularized logarithmic
/// derivative `f(x) = s/x - phi'/phi = x sum_j f_j x^{2j}` at a fixed energy.
#[derive(Clone, Debug)]
pub struct RiccatiCoeffs {
    pub epsilon: Complex,
    pub parity: Parity,
    pub f: Vec<Complex>,
}

/// Runs the Riccati recurrence
///
/// ```text
/// f_0 = 2 eps / (2s + 1)
/// f_n = (sum_{j<n} f_j f_{n-1-j} - 2 v_n) / (2n + 2s + 1),   n >= 1
/// ```
///
/// where `v_coeffs[n - 1] = v_n`.
pub fn riccati_coefficients(
    v_coeffs: &[Float],
    parity: Parity,
    epsilon: &Complex,
    n_max: usize,
) -> Result<RiccatiCoeffs, RpmError> {
    check_length(v_coeffs, n_max)?;
    let s = parity.s();
    let f0 = epsilon.mul_real(&Float::with_val(epsilon.prec().0, 2)).div_u32(2 * s + 1);
    let f = recurrence(f0, v_coeffs, s, n_max);
    Ok(RiccatiCoeffs {
        epsilon: epsilon.clone(),
        parity,
        f,
    })
}

/// The same recurrence carried on `(value, d/d eps)` pairs.
pub(crate) fn riccati_dual(
    v_coeffs: &[Float],
    parity: Parity,
    epsilon: &Complex,
    n_max: usize,
) -> Result<Vec<Dual>, RpmError> {
    check_length(v_coeffs, n_max)?;
    let s = parity.s();
    let bits = epsilon.prec().0;
    let two = Float::with_val(bits, 2);
    let value = epsilon.mul_real(&two).div_u32(2 * s + 1);
    let deriv = Complex::with_val(bits, (two, 0)).div_u32(2 * s + 1);
    Ok(recurrence(Dual::new(value, deriv), v_coeffs, s, n_max))
}

fn check_length(v_coeffs: &[Float], n_max: usize) -> Result<(), RpmError> {
    if n_max > v_coeffs.len() {
        return Err(RpmError::CoefficientLength {
            needed: n_max,
            available: v_coeffs.len(),
        });
    }
    Ok(())
}

pub(crate) fn recurrence<S: Scalar>(f0: S, v_coeffs: &[Float], s: u32, n_max: usize) -> Vec<S> {
    let mut f = Vec::with_capacity(n_max + 1);
    f.push(f0);
    for n in 1..=n_max {
        // sum_{j=0}^{n-1} f_j f_{n-1-j}, folded on its symmetry
        let mut conv: Option<S> = None;
        for j in 0..n / 2 {
            let term = f[j].mul(&f[n - 1 - j]);
            conv = Some(match conv {
                Some(acc) => acc.add(&term),
                None => term,
            });
        }
        let mut sum = match conv {
            Some(acc) => acc.add(&acc),
            None => f[0].sub(&f[0]),
        };
        if n % 2 == 1 {
            let mid = &f[(n - 1) / 2];
            sum = sum.add(&mid.mul(mid));
        }
        let two_v = Float::with_val(v_coeffs[n - 1].prec(), &v_coeffs[n - 1] * 2u32);
        f.push(sum.sub_real(&two_v).div_u32((2 * n) as u32 + 2 * s + 1));
    }
    f
}
