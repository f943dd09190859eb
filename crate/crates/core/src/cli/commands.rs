use std::fmt::Write as _;

use rug::Float;
use serde::Serialize;

use super::config::RunConfig;
use super::CliError;
use crate::model::PotentialSpec;
use crate::mp::{to_sci_string, truncate_to_stable, Precision};
use crate::rpm::{lowest_states, Parity, ResonanceResult};
use crate::scattering::{
    bw_profile, find_transmission_peak, scan_transmission, BWParams, TransmissionCurve, UNITARITY_TOLERANCE,
};
use crate::siegert::{sa_width, transmission_energy, SAWidthReport};

pub const RESONANCE_CSV_HEADER: &str = "label,n,parity,epsilon_r,epsilon_i,gamma,d_final,error_estimate";
pub const OVERLAP_CSV_HEADER: &str = "v0,epsilon_r1,gamma1,epsilon_r2,gamma2,overlap";

#[derive(Clone, Debug)]
pub struct ResonanceRow {
    pub label: String,
    pub n: usize,
    pub result: ResonanceResult,
}

#[derive(Clone, Debug, Default)]
pub struct ResonanceTable {
    pub rows: Vec<ResonanceRow>,
    /// Labels for which fewer states than requested converged.
    pub shortfall: Vec<(String, usize)>,
}

/// The lowest eigenvalues of every configured potential.
pub fn cmd_resonances(config: &RunConfig) -> Result<ResonanceTable, CliError> {
    let precision = config.precision()?;
    let mut table = ResonanceTable::default();
    for (label, potential) in config.potentials()? {
        let states = lowest_states(&potential, precision, &config.search)?;
        if states.len() < config.search.count {
            table.shortfall.push((label.clone(), states.len()));
        }
        table.rows.extend(states.into_iter().enumerate().map(|(n, result)| ResonanceRow {
            label: label.clone(),
            n,
            result,
        }));
    }
    Ok(table)
}

impl ResonanceTable {
    /// Full-precision CSV; the eigenvalue columns parse back to the same
    /// values at the working precision.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{RESONANCE_CSV_HEADER}\n");
        for row in &self.rows {
            let r = &row.result;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:.16e}",
                row.label,
                row.n,
                r.parity,
                to_sci_string(r.epsilon.real()),
                to_sci_string(r.epsilon.imag()),
                to_sci_string(&r.gamma()),
                r.d_final,
                r.error_estimate
            )
            .expect("writing to a String");
        }
        out
    }

    /// Human-readable view, each value cut at its last stable digit.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut current: Option<&str> = None;
        for row in &self.rows {
            if current != Some(row.label.as_str()) {
                if current.is_some() {
                    out.push('\n');
                }
                writeln!(out, "{}", row.label).expect("writing to a String");
                writeln!(out, "{:>3} {:>2}  {:<26} {:<26} {:>3}  {:>9}", "n", "s", "eps_R", "eps_I", "D", "error")
                    .expect("writing to a String");
                current = Some(row.label.as_str());
            }
            let r = &row.result;
            let eps_i = if r.is_bound() {
                "0".to_string()
            } else {
                truncate_to_stable(r.epsilon.imag(), r.error_estimate)
            };
            writeln!(
                out,
                "{:>3} {:>2}  {:<26} {:<26} {:>3}  {:>9.1e}",
                row.n,
                r.parity.s(),
                truncate_to_stable(r.epsilon.real(), r.error_estimate),
                eps_i,
                r.d_final,
                r.error_estimate
            )
            .expect("writing to a String");
        }
        for (label, found) in &self.shortfall {
            writeln!(out, "warning: {label}: only {found} states converged").expect("writing to a String");
        }
        out
    }
}

/// One parsed line of the resonance CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceCsvRow {
    pub label: String,
    pub n: usize,
    pub parity: Parity,
    pub epsilon_r: Float,
    pub epsilon_i: Float,
    pub gamma: Float,
    pub d_final: usize,
    pub error_estimate: f64,
}

pub fn parse_resonance_csv(text: &str, precision: Precision) -> Result<Vec<ResonanceCsvRow>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(RESONANCE_CSV_HEADER) {
        return Err(CliError::Config("missing resonance CSV header".into()));
    }
    let bad = |line: &str| CliError::Config(format!("malformed CSV row {line:?}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(bad(line));
            }
            let float = |s: &str| precision.parse_float(s).map_err(|_| bad(line));
            Ok(ResonanceCsvRow {
                label: fields[0].to_string(),
                n: fields[1].parse().map_err(|_| bad(line))?,
                parity: fields[2]
                    .parse()
                    .ok()
                    .and_then(Parity::from_s)
                    .ok_or_else(|| bad(line))?,
                epsilon_r: float(fields[3])?,
                epsilon_i: float(fields[4])?,
                gamma: float(fields[5])?,
                d_final: fields[6].parse().map_err(|_| bad(line))?,
                error_estimate: fields[7].parse().map_err(|_| bad(line))?,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TransmissionReport {
    pub curve: TransmissionCurve,
    pub bw: Option<BWParams>,
}

impl TransmissionReport {
    /// `epsilon,T,R,residual`, plus a `BW` column when a resonance is given.
    pub fn to_csv(&self) -> String {
        let Some(params) = &self.bw else {
            return self.curve.to_csv();
        };
        let mut out = String::from("epsilon,T,R,residual,BW\n");
        for p in &self.curve.points {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.epsilon,
                p.t,
                p.r,
                p.unitarity_residual,
                bw_profile(p.epsilon, params)
            )
            .expect("writing to a String");
        }
        out
    }
}

fn default_range(p: &PotentialSpec) -> (f64, f64) {
    let asym = p.asymptote().unwrap_or(0.0);
    let top = p.barrier_geometry().map(|g| g.v_b).unwrap_or(asym + 1.0);
    let span = (top - asym).max(1.0);
    (asym + 1e-3 * span, asym + 1.5 * span)
}

/// Transmission curve over the configured window (default: just above the
/// threshold to 1.5 times the barrier height).
pub fn cmd_transmission(config: &RunConfig) -> Result<TransmissionReport, CliError> {
    let (_, potential) = config.single_potential()?;
    let range = match config.transmission.range {
        Some(r) => r,
        None => default_range(&potential),
    };
    let curve = scan_transmission(&potential, range, config.transmission.points)?;
    Ok(TransmissionReport {
        curve,
        bw: config.resonance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaOutput {
    pub label: String,
    pub parity: Parity,
    /// `given`, `peak`, or `epsilon_r` when no peak could be bracketed.
    pub epsilon_t_source: &'static str,
    #[serde(flatten)]
    pub report: SAWidthReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_rpm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

pub fn cmd_sa(config: &RunConfig) -> Result<SaOutput, CliError> {
    let (label, potential) = config.single_potential()?;
    let (epsilon_t, source) = match (config.sa.epsilon_t, &config.resonance, config.sa.bracket) {
        (Some(e), _, _) => (e, "given"),
        (None, Some(params), _) => match transmission_energy(&potential, params) {
            (e, false) => (e, "peak"),
            (e, true) => (e, "epsilon_r"),
        },
        (None, None, Some(bracket)) => (find_transmission_peak(&potential, bracket, 1e-10)?, "peak"),
        (None, None, None) => {
            return Err(CliError::Config(
                "sa needs epsilon_t, a known resonance, or a peak bracket".into(),
            ))
        }
    };
    let report = sa_width(&potential, config.sa.parity, epsilon_t)?;
    let gamma_rpm = config.resonance.map(|p| p.gamma());
    Ok(SaOutput {
        label,
        parity: config.sa.parity,
        epsilon_t_source: source,
        report,
        gamma_rpm,
        ratio: gamma_rpm.map(|g| report.gamma_sa / g),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapRow {
    pub v0: String,
    pub epsilon_r1: f64,
    pub gamma1: f64,
    pub epsilon_r2: f64,
    pub gamma2: f64,
    pub overlap: bool,
}

/// First two resonances for each `v0`; they overlap when their distance is
/// below the mean width.
///
/// The real extent of the search box grows with the barrier height so that
/// the second resonance stays inside it.
pub fn cmd_overlap(config: &RunConfig) -> Result<Vec<OverlapRow>, CliError> {
    if config.search.count < 2 {
        return Err(CliError::Config("overlap needs at least two resonances per v0".into()));
    }
    let precision = config.precision()?;
    let mut rows = Vec::new();
    for (label, potential) in config.potentials()? {
        let mut search = config.search.clone();
        if let Ok(geom) = potential.barrier_geometry() {
            search.re.1 = search.re.1.max(1.2 * geom.v_b + 1.0);
        }
        let states = lowest_states(&potential, precision, &search)?;
        let resonances: Vec<&ResonanceResult> = states.iter().filter(|r| !r.is_bound()).take(2).collect();
        let [first, second] = resonances[..] else {
            return Err(CliError::Convergence(format!(
                "{label}: found {} resonances, need two",
                resonances.len()
            )));
        };
        let (e1, g1) = (first.epsilon_r().to_f64(), first.gamma().to_f64());
        let (e2, g2) = (second.epsilon_r().to_f64(), second.gamma().to_f64());
        let v0 = match &potential {
            PotentialSpec::GaussianDoubleBarrier { v0, .. } => v0.to_string(),
            _ => label.clone(),
        };
        rows.push(OverlapRow {
            v0,
            epsilon_r1: e1,
            gamma1: g1,
            epsilon_r2: e2,
            gamma2: g2,
            overlap: (e2 - e1).abs() < (g1 + g2) / 2.0,
        });
    }
    Ok(rows)
}

pub fn overlap_csv(rows: &[OverlapRow]) -> String {
    let mut out = format!("{OVERLAP_CSV_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.v0, r.epsilon_r1, r.gamma1, r.epsilon_r2, r.gamma2, r.overlap
        )
        .expect("writing to a String");
    }
    out
}

/// Fails if any point of the scan breaks unitarity by more than
/// [`UNITARITY_TOLERANCE`].
pub fn check_unitarity(report: &TransmissionReport) -> Result<(), CliError> {
    let worst = report.curve.max_residual();
    if worst > UNITARITY_TOLERANCE {
        return Err(CliError::Unitarity(format!(
            "max |T + R - 1| = {worst:e} exceeds {UNITARITY_TOLERANCE:e}"
        )));
    }
    Ok(())
}
