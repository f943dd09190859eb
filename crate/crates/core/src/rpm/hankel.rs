use rug::{Complex, Float};

use super::riccati::{riccati_dual, RiccatiCoeffs};
use super::scalar::Scalar;
use super::{HankelSpec, Parity, RpmError};

/// Value and energy derivative of `H_D^d(eps)`.
#[derive(Clone, Debug)]
pub struct HankelEvaluation {
    pub value: Complex,
    pub derivative: Complex,
    /// `value / derivative`, computed before the row scales are multiplied
    /// back in.
    pub(crate) newton_step: Option<Complex>,
}

/// `H_D^d = det[f_{d+i+j-1}]_{i,j=1..D}`.
pub fn hankel_determinant(coeffs: &RiccatiCoeffs, spec: HankelSpec) -> Result<Complex, RpmError> {
    let needed = spec.highest_index();
    if coeffs.f.len() <= needed {
        return Err(RpmError::CoefficientLength {
            needed,
            available: coeffs.f.len().saturating_sub(1),
        });
    }
    let bits = coeffs.epsilon.prec().0;
    let (scaled, scale) = determinant(hankel_matrix(&coeffs.f, spec), bits);
    Ok(Complex::with_val(bits, &scaled * &scale))
}

/// `H_D^d` and `dH/d eps`, propagated exactly through the recurrence and the
/// factorization with first-order dual numbers.
pub fn hankel_with_derivative(
    v_coeffs: &[Float],
    parity: Parity,
    epsilon: &Complex,
    spec: HankelSpec,
) -> Result<HankelEvaluation, RpmError> {
    let bits = epsilon.prec().0;
    let f = riccati_dual(v_coeffs, parity, epsilon, spec.highest_index())?;
    let (scaled, scale) = determinant(hankel_matrix(&f, spec), bits);
    let newton_step = (!scaled.deriv.is_zero()).then(|| scaled.value.div(&scaled.deriv));
    Ok(HankelEvaluation {
        value: scaled.value.mul_real(&scale),
        derivative: scaled.deriv.mul_real(&scale),
        newton_step,
    })
}

fn hankel_matrix<S: Scalar>(f: &[S], spec: HankelSpec) -> Vec<Vec<S>> {
    (0..spec.dim)
        .map(|i| (0..spec.dim).map(|j| f[spec.displacement + i + j + 1].clone()).collect())
        .collect()
}

/// LU determinant with partial pivoting.
///
/// Each row is first divided by its largest entry magnitude; the product of
/// those factors is returned separately so that `det = scaled * scale`. The
/// factors are constants, so the derivative part of a [`Dual`](super::Dual) determinant
/// scales the same way.
pub(crate) fn determinant<S: Scalar>(mut m: Vec<Vec<S>>, bits: u32) -> (S, Float) {
    let n = m.len();
    let mut scale = Float::with_val(bits, 1);
    for row in m.iter_mut() {
        let max = row
            .iter()
            .map(Scalar::magnitude_sqr)
            .max_by(|a, b| a.partial_cmp(b).expect("finite entries"))
            .unwrap_or_else(|| Float::new(bits));
        if max.is_zero() {
            return (S::zero(bits), scale);
        }
        let max = max.sqrt();
        let inv = Float::with_val(bits, 1) / &max;
        scale *= &max;
        for entry in row.iter_mut() {
            *entry = entry.mul_real(&inv);
        }
    }

    let mut det: Option<S> = None;
    let mut negate = false;
    for k in 0..n {
        let (pivot_row, pivot_mag) = (k..n)
            .map(|i| (i, m[i][k].magnitude_sqr()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite entries"))
            .expect("non-empty column");
        if pivot_mag.is_zero() {
            return (S::zero(bits), scale);
        }
        if pivot_row != k {
            m.swap(pivot_row, k);
            negate = !negate;
        }
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_line = &top[k];
        for row in rest.iter_mut() {
            let factor = row[k].div(&pivot_line[k]);
            for j in k + 1..n {
                row[j] = row[j].sub(&factor.mul(&pivot_line[j]));
            }
        }
        det = Some(match det {
            Some(acc) => acc.mul(&pivot_line[k]),
            None => pivot_line[k].clone(),
        });
    }
    let det = det.unwrap_or_else(|| S::zero(bits));
    (if negate { det.neg() } else { det }, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PotentialSpec;
    use crate::mp::{abs, Param, Precision};
    use crate::rpm::riccati::riccati_coefficients;

    fn spec(dim: usize, displacement: usize) -> HankelSpec {
        HankelSpec::new(dim, displacement).unwrap()
    }

    /// Cofactor expansion, an independent determinant route for small matrices.
    fn cofactor(m: &[Vec<Complex>], bits: u32) -> Complex {
        if m.len() == 1 {
            return m[0][0].clone();
        }
        let mut acc = Complex::new(bits);
        for (col, entry) in m[0].iter().enumerate() {
            let minor: Vec<Vec<Complex>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != col)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let term = Complex::with_val(bits, entry * cofactor(&minor, bits));
            if col % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn two_by_two_expansion() {
        let prec = Precision::new(40);
        let v = PotentialSpec::gaussian(2, 1).taylor_coefficients(10, prec);
        let c = riccati_coefficients(&v, Parity::Even, &prec.complex(0.6, -0.1), 10).unwrap();
        let h = hankel_determinant(&c, spec(2, 0)).unwrap();
        let f = &c.f;
        let expected = Complex::with_val(prec.bits(), &f[1] * &f[3])
            - Complex::with_val(prec.bits(), f[2].square_ref());
        let diff = Complex::with_val(prec.bits(), &h - expected);
        assert!(abs(&diff).to_f64() < 1e-35 * abs(&h).to_f64().max(1e-300));
    }

    #[test]
    fn lu_matches_cofactor_expansion() {
        let prec = Precision::new(50);
        let lam: Param = "0.1".parse().unwrap();
        let v = PotentialSpec::gaussian("1/2".parse::<Param>().unwrap(), lam).taylor_coefficients(20, prec);
        for (dim, d) in [(3, 0), (4, 1), (5, 2)] {
            let c = riccati_coefficients(&v, Parity::Odd, &prec.complex(1.3, -0.4), 20).unwrap();
            let m = hankel_matrix(&c.f, spec(dim, d));
            let lu = hankel_determinant(&c, spec(dim, d)).unwrap();
            let exact = cofactor(&m, prec.bits());
            let diff = Complex::with_val(prec.bits(), &lu - &exact);
            assert!(abs(&diff).to_f64() <= 1e-40 * abs(&exact).to_f64(), "D={dim} d={d}");
        }
    }

    #[test]
    fn zero_matrix_has_zero_determinant() {
        let prec = Precision::new(40);
        let v = PotentialSpec::harmonic().taylor_coefficients(20, prec);
        let c = riccati_coefficients(&v, Parity::Even, &prec.complex(0.5, 0.0), 20).unwrap();
        for (dim, d) in [(2, 0), (5, 3), (8, 0)] {
            assert!(hankel_determinant(&c, spec(dim, d)).unwrap().is_zero());
        }
    }

    #[test]
    fn dual_value_matches_plain_determinant() {
        let prec = Precision::new(60);
        let v = PotentialSpec::kg("0.8".parse::<Param>().unwrap(), "0.1".parse::<Param>().unwrap())
            .taylor_coefficients(30, prec);
        let eps = prec.complex(1.42, -6e-5);
        let c = riccati_coefficients(&v, Parity::Odd, &eps, 30).unwrap();
        let plain = hankel_determinant(&c, spec(12, 0)).unwrap();
        let dual = hankel_with_derivative(&v, Parity::Odd, &eps, spec(12, 0)).unwrap();
        let diff = Complex::with_val(prec.bits(), &plain - &dual.value);
        assert!(abs(&diff).to_f64() <= 1e-50 * abs(&plain).to_f64());
    }

    #[test]
    fn short_coefficients_rejected() {
        let prec = Precision::new(30);
        let v = PotentialSpec::gaussian(2, 1).taylor_coefficients(6, prec);
        let c = riccati_coefficients(&v, Parity::Even, &prec.complex(1.0, 0.0), 6).unwrap();
        assert!(hankel_determinant(&c, spec(4, 0)).is_err());
        assert!(hankel_determinant(&c, spec(3, 0)).is_ok());
    }
}
