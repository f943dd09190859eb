use rug::Complex;

use super::newton::format_complex;
use super::{HankelSpec, ResonanceResult, RpmError, RpmSolver};
use crate::mp::{abs, max_component};

/// Consecutive increases of the inter-`D` difference that mark a lost sequence.
const DIVERGENCE_RUN: usize = 3;

/// Dimensions in a row at which no root may be found before giving up.
const MAX_GAP: usize = 3;

impl RpmSolver {
    /// Follows one root of `H_D^d` from `d_min` to `d_max`.
    ///
    /// Each dimension is seeded from the previous root and, once two roots are
    /// known, from their linear extrapolation; the candidate nearest the
    /// previous root wins, ties going to the smaller `|Im|`.
    ///
    /// Real sequences (bound states) converge erratically and at some `D`
    /// the nearby real root pair turns complex. Such a dimension is skipped
    /// and left out of the history; more than a few in a row lose the
    /// sequence, as does a failure at `D_max`.
    pub fn converge_resonance(
        &self,
        displacement: usize,
        d_min: usize,
        d_max: usize,
        seed: &Complex,
    ) -> Result<ResonanceResult, RpmError> {
        if d_min < 2 {
            return Err(RpmError::InvalidInput(format!("D_min = {d_min} < 2")));
        }
        if d_max < d_min + 1 {
            return Err(RpmError::InvalidInput(format!(
                "D_max = {d_max} must exceed D_min = {d_min}"
            )));
        }
        let bits = self.precision().bits();
        let mut history: Vec<(usize, Complex)> = Vec::with_capacity(d_max - d_min + 1);
        let mut diffs: Vec<f64> = Vec::new();
        let mut gap = 0;
        for dim in d_min..=d_max {
            let spec = HankelSpec::new(dim, displacement)?;
            let previous = history.last().map(|(_, z)| z.clone()).unwrap_or_else(|| Complex::with_val(bits, seed));
            let mut seeds = vec![previous.clone()];
            if history.len() >= 2 {
                let before = &history[history.len() - 2].1;
                seeds.push(Complex::with_val(bits, &previous * 2u32) - before);
            }
            let mut last_err = None;
            let mut best: Option<(f64, f64, Complex)> = None;
            for s in &seeds {
                match self.find_root_default(spec, s) {
                    Ok(root) => {
                        let dist = abs(&Complex::with_val(bits, &root - &previous)).to_f64();
                        let im = root.imag().to_f64().abs();
                        let better = match &best {
                            None => true,
                            Some((bd, bim, _)) => {
                                let tie = (dist - bd).abs() <= 1e-12 * dist.max(*bd);
                                if tie {
                                    im < *bim
                                } else {
                                    dist < *bd
                                }
                            }
                        };
                        if better {
                            best = Some((dist, im, root));
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            let Some((_, _, root)) = best else {
                gap += 1;
                if gap > MAX_GAP || dim == d_max || history.is_empty() {
                    let reason = last_err.map(|e| e.to_string()).unwrap_or_default();
                    return Err(RpmError::SequenceLost { dim, reason });
                }
                continue;
            };
            gap = 0;
            if let Some((_, prev)) = history.last() {
                diffs.push(max_component(&Complex::with_val(bits, &root - prev)).to_f64());
            }
            history.push((dim, root));
            if diffs.len() > DIVERGENCE_RUN {
                let tail = &diffs[diffs.len() - DIVERGENCE_RUN - 1..];
                if tail.windows(2).all(|w| w[1] > w[0]) && diverged(tail, &history) {
                    return Err(RpmError::SequenceLost {
                        dim,
                        reason: format!(
                            "inter-D differences grew for {DIVERGENCE_RUN} consecutive D: {:?}, last root {}",
                            tail,
                            format_complex(&history.last().expect("non-empty").1)
                        ),
                    });
                }
            }
        }
        let (d_final, last) = history.last().cloned().expect("root at D_max");
        let Some(&error_estimate) = diffs.last() else {
            return Err(RpmError::SequenceLost {
                dim: d_max,
                reason: "fewer than two dimensions produced a root".into(),
            });
        };
        let mut result = ResonanceResult {
            epsilon: last,
            parity: self.parity(),
            d_final,
            error_estimate,
            history,
        };
        if result.epsilon.imag().is_sign_positive() && !result.epsilon.imag().is_zero() {
            // Roots come in conjugate pairs; report the decaying member.
            result.epsilon.conj_mut();
            for (_, z) in result.history.iter_mut() {
                z.conj_mut();
            }
        }
        Ok(result)
    }
}

/// Growth only counts as divergence once the differences are no longer
/// small against the root itself; slowly converging sequences wobble at the
/// 1e-10 level without leaving their eigenvalue.
fn diverged(tail: &[f64], history: &[(usize, Complex)]) -> bool {
    let scale = 1.0 + abs(&history.last().expect("non-empty").1).to_f64();
    tail.last().copied().unwrap_or(0.0) > 1e-4 * scale
}
