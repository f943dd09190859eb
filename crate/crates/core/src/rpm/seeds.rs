//! Starting points for root sequences.
//!
//! At small `D` every `f_n` is a polynomial of degree `n + 1` in the energy,
//! so `H_D^d(eps)` is a polynomial too and all of its roots can be had at
//! once from a companion matrix.

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use super::{HankelSpec, RpmError, RpmSolver};

const SEED_BITS: u32 = 256;

/// Where to look for seeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchRegion {
    RealInterval { lo: f64, hi: f64 },
    ComplexBox { re: (f64, f64), im: (f64, f64) },
}

impl SearchRegion {
    pub fn contains(&self, re: f64, im: f64) -> bool {
        match *self {
            Self::RealInterval { lo, hi } => {
                im.abs() <= 1e-6 * (1.0 + re.abs()) && (lo..=hi).contains(&re)
            }
            Self::ComplexBox { re: (r0, r1), im: (i0, i1) } => {
                (r0..=r1).contains(&re) && (i0..=i1).contains(&im)
            }
        }
    }
}

/// Dense polynomial in the energy, lowest degree first.
#[derive(Clone, Debug)]
struct Poly(Vec<Float>);

impl Poly {
    fn zero() -> Self {
        Poly(Vec::new())
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|i| {
                    let mut acc = Float::new(SEED_BITS);
                    if let Some(a) = self.0.get(i) {
                        acc += a;
                    }
                    if let Some(b) = other.0.get(i) {
                        acc += b;
                    }
                    acc
                })
                .collect(),
        )
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| Float::with_val(SEED_BITS, -c)).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Float::new(SEED_BITS); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += Float::with_val(SEED_BITS, a * b);
            }
        }
        Poly(out)
    }

    fn scaled(mut self, factor: &Float) -> Poly {
        for c in self.0.iter_mut() {
            *c *= factor;
        }
        self
    }

    fn trimmed(mut self) -> Poly {
        while self.0.last().is_some_and(Float::is_zero) {
            self.0.pop();
        }
        self
    }

    /// Newton on the polynomial, with Aitken extrapolation across the linear
    /// convergence of multiple roots.
    fn polish(&self, mut root: Complex) -> Complex {
        let mut previous: Option<(Complex, Complex)> = None;
        for _ in 0..60 {
            let (value, deriv) = self.eval(&root);
            if value.is_zero() || deriv.is_zero() {
                break;
            }
            let step = Complex::with_val(SEED_BITS, &value / &deriv);
            let size = crate::mp::abs(&step).to_f64();
            let next = Complex::with_val(SEED_BITS, &root - &step);
            if size < 1e-60 * (1.0 + crate::mp::abs(&root).to_f64()) {
                return next;
            }
            match previous.take() {
                Some((prev_root, prev_step)) if size > 0.2 * crate::mp::abs(&prev_step).to_f64() => {
                    let denom = Complex::with_val(SEED_BITS, &prev_step - &step);
                    let shift = Complex::with_val(SEED_BITS, prev_step.square_ref()) / denom;
                    let jump = Complex::with_val(SEED_BITS, &prev_root - &shift);
                    root = if jump.real().is_finite() && jump.imag().is_finite() { jump } else { next };
                }
                _ => {
                    previous = Some((root, step));
                    root = next;
                }
            }
        }
        root
    }

    fn eval(&self, z: &Complex) -> (Complex, Complex) {
        let mut value = Complex::new(SEED_BITS);
        let mut deriv = Complex::new(SEED_BITS);
        for c in self.0.iter().rev() {
            deriv = Complex::with_val(SEED_BITS, &deriv * z) + &value;
            value = Complex::with_val(SEED_BITS, &value * z) + c;
        }
        (value, deriv)
    }
}

fn determinant(m: &[Vec<Poly>]) -> Poly {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero();
    for (col, entry) in m[0].iter().enumerate() {
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != col)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = entry.mul(&determinant(&minor));
        acc = acc.add(&if col % 2 == 0 { term } else { term.neg() });
    }
    acc
}

impl RpmSolver {
    /// `H_D^d(eps)` as an explicit polynomial, lowest degree first.
    fn hankel_polynomial(&self, spec: HankelSpec) -> Result<Vec<Float>, RpmError> {
        let n_max = spec.highest_index();
        let v = self.v_coeffs();
        if n_max > v.len() {
            return Err(RpmError::CoefficientLength {
                needed: n_max,
                available: v.len(),
            });
        }
        let s = self.parity().s();
        let mut f = vec![Poly(vec![
            Float::new(SEED_BITS),
            Float::with_val(SEED_BITS, 2) / (2 * s + 1),
        ])];
        for n in 1..=n_max {
            let mut sum = Poly::zero();
            for j in 0..n {
                sum = sum.add(&f[j].mul(&f[n - 1 - j]));
            }
            let mut constant = Poly(vec![Float::with_val(SEED_BITS, &v[n - 1] * -2i32)]);
            constant = constant.add(&sum);
            let denom = Float::with_val(SEED_BITS, 1) / ((2 * n) as u32 + 2 * s + 1);
            f.push(constant.scaled(&denom));
        }
        let matrix: Vec<Vec<Poly>> = (0..spec.dim)
            .map(|i| {
                (0..spec.dim)
                    .map(|j| f[spec.displacement + i + j + 1].clone())
                    .collect()
            })
            .collect();
        Ok(determinant(&matrix).trimmed().0)
    }

    /// All roots of the small-`D` Hankel polynomial inside `region`.
    ///
    /// Roots come from companion-matrix eigenvalues in double precision and
    /// are then polished by Newton on the polynomial itself. Real-interval
    /// searches return exactly real seeds.
    pub fn seed_roots(
        &self,
        d_small: usize,
        displacement: usize,
        region: &SearchRegion,
    ) -> Result<Vec<Complex>, RpmError> {
        if !(2..=4).contains(&d_small) {
            return Err(RpmError::InvalidInput(format!(
                "seed dimension {d_small} outside 2..=4"
            )));
        }
        let poly = Poly(self.hankel_polynomial(HankelSpec::new(d_small, displacement)?)?);
        if poly.0.is_empty() {
            return Err(RpmError::DegeneratePolynomial);
        }
        let zero_roots = poly.0.iter().take_while(|c| c.is_zero()).count();
        let reduced = Poly(poly.0[zero_roots..].to_vec());
        let degree = reduced.0.len() - 1;

        let mut roots: Vec<Complex> = Vec::new();
        if zero_roots > 0 {
            roots.push(Complex::new(SEED_BITS));
        }
        if degree > 0 {
            let lead = reduced.0[degree].clone();
            let tail: Vec<f64> = (0..degree)
                .map(|i| -Float::with_val(SEED_BITS, &reduced.0[i] / &lead).to_f64())
                .collect();
            let companion = faer::Mat::<f64>::from_fn(degree, degree, |i, j| {
                if j == degree - 1 {
                    tail[i]
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            // Seeds are optional: a failed eigen-decomposition just yields none.
            let eigenvalues = companion.eigenvalues().unwrap_or_default();
            for z in eigenvalues.iter() {
                let root = reduced.polish(Complex::with_val(SEED_BITS, (z.re, z.im)));
                if root.real().is_finite() && root.imag().is_finite() {
                    roots.push(root);
                }
            }
        }

        let bits = self.precision().bits();
        let mut seeds: Vec<Complex> = Vec::new();
        for root in roots {
            let (re, im) = (root.real().to_f64(), root.imag().to_f64());
            if !region.contains(re, im) {
                continue;
            }
            let seed = match region {
                SearchRegion::RealInterval { .. } => Complex::with_val(bits, (root.real(), 0)),
                SearchRegion::ComplexBox { .. } => Complex::with_val(bits, &root),
            };
            let duplicate = seeds.iter().any(|s| {
                let d = Complex::with_val(bits, s - &seed);
                crate::mp::abs(&d).to_f64() < 1e-12 * (1.0 + re.abs())
            });
            if !duplicate {
                seeds.push(seed);
            }
        }
        seeds.sort_by(|a, b| a.real().partial_cmp(b.real()).expect("finite"));
        Ok(seeds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PotentialSpec;
    use crate::mp::{Param, Precision};
    use crate::rpm::Parity;

    #[test]
    fn harmonic_seed_contains_ground_state() {
        let prec = Precision::new(40);
        let solver = RpmSolver::new(&PotentialSpec::harmonic(), Parity::Even, prec, 4, 0);
        let seeds = solver
            .seed_roots(2, 0, &SearchRegion::RealInterval { lo: 0.0, hi: 3.0 })
            .unwrap();
        assert!(
            seeds.iter().any(|s| (s.real().to_f64() - 0.5).abs() < 1e-12),
            "{:?}",
            seeds.iter().map(|s| s.real().to_f64()).collect::<Vec<_>>()
        );
        assert!(seeds.iter().all(|s| s.imag().is_zero()));
    }

    #[test]
    fn zero_potential_polynomial_is_a_monomial() {
        // v = 0, s = 0: f_n = c_n eps^{n+1}; f_1 = 4/3 eps^2, f_2 = 16/15 eps^3,
        // f_3 = (2 f_0 f_2 + f_1^2)/7 = (64/15 + 16/9)/7 eps^4 = 272/315 eps^4.
        // H_2 = f_1 f_3 - f_2^2 = (4/3 * 272/315 - 256/225) eps^6.
        let prec = Precision::new(40);
        let solver = RpmSolver::new(&PotentialSpec::free(), Parity::Even, prec, 2, 0);
        let poly = solver.hankel_polynomial(HankelSpec::new(2, 0).unwrap()).unwrap();
        assert_eq!(poly.len(), 7);
        assert!(poly[..6].iter().all(Float::is_zero));
        let expected = 4.0 / 3.0 * 272.0 / 315.0 - 256.0 / 225.0;
        assert!((poly[6].to_f64() - expected).abs() < 1e-15);
        let seeds = solver
            .seed_roots(2, 0, &SearchRegion::ComplexBox { re: (-1.0, 1.0), im: (-1.0, 1.0) })
            .unwrap();
        assert_eq!(seeds.len(), 1);
        assert!(seeds[0].is_zero());
    }

    #[test]
    fn gaussian_seeds_land_near_low_resonances() {
        let prec = Precision::new(40);
        let pot = PotentialSpec::gaussian("1/2".parse::<Param>().unwrap(), "0.1".parse::<Param>().unwrap());
        let region = SearchRegion::ComplexBox { re: (0.0, 3.0), im: (-2.0, 0.0) };
        let seeds = RpmSolver::new(&pot, Parity::Even, prec, 4, 0)
            .seed_roots(4, 0, &region)
            .unwrap();
        assert!(!seeds.is_empty());
        assert!(seeds.iter().all(|s| region.contains(s.real().to_f64(), s.imag().to_f64())));
        // The lowest even seed sits within 0.05 of the n = 0 resonance.
        assert!(seeds.iter().any(|s| (s.real().to_f64() - 0.4601).abs() < 0.05));
    }

    #[test]
    fn rejects_large_seed_dimension() {
        let prec = Precision::new(30);
        let solver = RpmSolver::new(&PotentialSpec::harmonic(), Parity::Even, prec, 6, 0);
        assert!(solver
            .seed_roots(5, 0, &SearchRegion::RealInterval { lo: 0.0, hi: 1.0 })
            .is_err());
    }
}
