//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use resonance::cli::{cmd_overlap, cmd_resonances, cmd_transmission, RunConfig, TransmissionConfig};
use resonance::model::PotentialSpec;
use resonance::mp::{Param, Precision};
use resonance::rpm::{HankelSpec, Parity, ResonanceResult, RpmSolver};
use resonance::scattering::{
    bw_deviation, transmission, BWParams, SquareBarrier, PEAK_TOLERANCE, UNITARITY_TOLERANCE,
};
use resonance::siegert::{localization_ratio, sa_width, transmission_energy};
use rug::Float;

const WEAK_BARRIER: [(&str, &str); 6] = [
    ("0.46014727653933356360", "9.6203883198201929683e-7"),
    ("1.2804203534682821470", "1.6737132594145830404e-3"),
    ("1.8531086351750533910", "6.7240255103872613345e-2"),
    ("2.2323252762455511600", "0.33989855689185650713"),
    ("2.567615869399468602", "0.8194028131702960163"),
    ("2.887957554267041665", "1.409344599863779927"),
];

const BARRIER_SWEEP: [(&str, &str); 4] = [
    ("0.55937118458252732995", "0.15830525114271135525"),
    ("1.1082157629920295074", "0.078972583905329832058"),
    ("1.7816763825869113601", "0.023794309337967155927"),
    ("2.3042519331774868362", "0.007347829662205245864"),
];

const WELL_BARRIER_BOUND: &str = "0.5020403621419";

const WELL_BARRIER: [(&str, &str); 6] = [
    ("1.4209709457146932076", "5.82652808855403e-5"),
    ("2.1271970775224959319", "1.5447312841805183109e-2"),
    ("2.5845828598531001914", "0.17375071916219928095"),
    ("2.9244219292377372486", "0.564794965582576499"),
    ("3.255486140023381540", "1.1115316000246994816"),
    ("3.5572161626513698", "1.7555062346769250"),
];

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        println!("{} {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

fn reference(text: &str, bits: u32) -> Float {
    Float::with_val(bits, Float::parse(text).expect("reference value parses"))
}

/// Relative difference between a computed value and a reference value.
fn rel_diff(value: &Float, reference_text: &str) -> f64 {
    let r = reference(reference_text, value.prec());
    let d = Float::with_val(value.prec(), value - &r).abs();
    (d / r.abs()).to_f64()
}

/// One unit in the last decimal place written in `text`.
fn last_place(text: &str) -> f64 {
    let (mantissa, exp) = match text.split_once('e') {
        Some((m, e)) => (m, e.parse::<i32>().unwrap()),
        None => (text, 0),
    };
    let decimals = mantissa.split_once('.').map_or(0, |(_, f)| f.len()) as i32;
    10f64.powi(exp - decimals)
}

fn abs_diff(value: &Float, reference_text: &str) -> f64 {
    let r = reference(reference_text, value.prec());
    Float::with_val(value.prec(), value - &r).abs().to_f64()
}

fn resonances_of(rows: &[resonance::cli::ResonanceRow], label: &str) -> Vec<ResonanceResult> {
    rows.iter().filter(|r| r.label == label).map(|r| r.result.clone()).collect()
}

fn nearest<'a>(states: &'a [ResonanceResult], eps_r: &str) -> Option<&'a ResonanceResult> {
    let target: f64 = eps_r.parse().unwrap();
    states
        .iter()
        .filter(|s| !s.is_bound())
        .min_by(|a, b| {
            let da = (a.epsilon_r().to_f64() - target).abs();
            let db = (b.epsilon_r().to_f64() - target).abs();
            da.total_cmp(&db)
        })
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Closed-form transmission through `v = u` on `|x| < w`, zero elsewhere.
fn square_barrier_t(u: f64, w: f64, eps: f64) -> f64 {
    let l = 2.0 * w;
    if eps < u {
        let kappa = (2.0 * (u - eps)).sqrt();
        1.0 / (1.0 + u * u * (kappa * l).sinh().powi(2) / (4.0 * eps * (u - eps)))
    } else {
        let q = (2.0 * (eps - u)).sqrt();
        1.0 / (1.0 + u * u * (q * l).sin().powi(2) / (4.0 * eps * (eps - u)))
    }
}

fn gaussian(v0: i32) -> PotentialSpec {
    PotentialSpec::gaussian(v0, 1)
}

fn main() {
    let suite = Instant::now();
    let mut report = Report { failures: 0 };

    // 1. Six lowest states of the weak gaussian barrier (v0 = 1/2, lambda = 0.1).
    let config = RunConfig::preset("weak-barrier").unwrap();
    let prec = config.precision().unwrap();
    let (weak, elapsed) = timed(|| cmd_resonances(&config).unwrap());
    let states = &weak.rows.iter().map(|r| r.result.clone()).collect::<Vec<_>>();
    let mut worst = [0f64; 2];
    let mut ok = states.len() >= 6;
    for (n, (re, im)) in WEAK_BARRIER.iter().enumerate() {
        let Some(s) = states.get(n) else { break };
        let err = rel_diff(&s.epsilon_r(), re).max(rel_diff(&Float::with_val(prec.bits(), -s.epsilon_i()), im));
        let group = if n < 3 { 0 } else { 1 };
        worst[group] = worst[group].max(err);
    }
    ok &= worst[0] <= 1e-15 && worst[1] <= 1e-10 && elapsed < Duration::from_secs(300);
    report.check(
        1,
        "weak barrier spectrum",
        ok,
        format!(
            "{} states, rel err n=0..2 {:.1e}, n=3..5 {:.1e}, {:.1}s",
            states.len(),
            worst[0],
            worst[1],
            elapsed.as_secs_f64()
        ),
    );
    let weak_n0 = states.first().cloned();

    // 2. Lowest resonance along v0 = 2, 5, 10, 15 at lambda = 1.
    let config = RunConfig::preset("barrier-sweep").unwrap();
    let (sweep, elapsed) = timed(|| cmd_resonances(&config).unwrap());
    let mut worst = 0f64;
    let mut ok = elapsed < Duration::from_secs(120);
    let mut sweep_params = Vec::new();
    for (v0, (re, im)) in [2, 5, 10, 15].into_iter().zip(BARRIER_SWEEP) {
        let found = resonances_of(&sweep.rows, &format!("v0={v0}"));
        match found.first() {
            Some(s) => {
                let neg_im = Float::with_val(s.epsilon.prec().1, -s.epsilon_i());
                worst = worst.max(rel_diff(&s.epsilon_r(), re).max(rel_diff(&neg_im, im)));
                sweep_params.push((v0, BWParams::new(s.epsilon_r().to_f64(), s.epsilon_i().to_f64())));
            }
            None => ok = false,
        }
    }
    ok &= worst <= 1e-15;
    report.check(
        2,
        "barrier sweep",
        ok,
        format!("worst rel err {:.1e}, {:.1}s", worst, elapsed.as_secs_f64()),
    );

    // 3. Well-barrier (J = 0.8, lambda = 0.1): the bound state to its 13 reference
    // digits and the first six resonances to within one unit of their
    // second-to-last reference digit.
    let config = RunConfig::preset("well-barrier").unwrap();
    let (well, elapsed) = timed(|| cmd_resonances(&config).unwrap());
    let states: Vec<ResonanceResult> = well.rows.iter().map(|r| r.result.clone()).collect();
    let bound = states.iter().find(|s| s.is_bound());
    let bound_err = bound.map_or(f64::INFINITY, |s| abs_diff(&s.epsilon_r(), WELL_BARRIER_BOUND));
    let mut ok = bound_err < last_place(WELL_BARRIER_BOUND);
    let mut matched = 0;
    for (re, im) in WELL_BARRIER {
        let Some(s) = nearest(&states, re) else { continue };
        let neg_im = Float::with_val(s.epsilon.prec().1, -s.epsilon_i());
        if abs_diff(&s.epsilon_r(), re) <= 10.0 * last_place(re) && abs_diff(&neg_im, im) <= 10.0 * last_place(im) {
            matched += 1;
        }
    }
    ok &= matched == WELL_BARRIER.len();
    report.check(
        3,
        "well-barrier spectrum",
        ok,
        format!(
            "bound state err {:.1e}, {matched}/6 resonances matched, {} states, {:.1}s",
            bound_err,
            states.len(),
            elapsed.as_secs_f64()
        ),
    );

    // 4. Harmonic oscillator. The n-th eigenfunction is a polynomial of
    // degree (n - s)/2 in x^2 times a gaussian, so its log-derivative is a
    // rational function and every determinant with D above that degree
    // vanishes at n + 1/2.
    let prec = Precision::new(64);
    let zero_tol = 10f64.powi(-(prec.digits() as i32 - 15));
    let mut worst_h = 0f64;
    let mut worst_root = 0f64;
    for parity in [Parity::Even, Parity::Odd] {
        let solver = RpmSolver::new(&PotentialSpec::harmonic(), parity, prec, 10, 0);
        for n in (0..6).filter(|n| n % 2 == parity.s() as usize) {
            let exact = n as f64 + 0.5;
            let d_min = ((n - parity.s() as usize) / 2 + 1).max(2);
            for dim in d_min..=10 {
                let h = solver.hankel(&prec.complex(exact, 0.0), HankelSpec::new(dim, 0).unwrap()).unwrap();
                worst_h = worst_h.max(resonance::mp::abs(&h).to_f64());
            }
            let err = match solver.converge_resonance(0, d_min, 10, &prec.complex(exact + 0.2, 0.0)) {
                Ok(r) => {
                    let d = rug::Complex::with_val(prec.bits(), &r.epsilon - &prec.complex(exact, 0.0));
                    resonance::mp::abs(&d).to_f64()
                }
                Err(_) => f64::INFINITY,
            };
            worst_root = worst_root.max(err);
        }
    }
    report.check(
        4,
        "harmonic oscillator",
        worst_h <= zero_tol && worst_root <= zero_tol,
        format!("max |H| {:.1e}, max root err {:.1e} (limit {:.0e})", worst_h, worst_root, zero_tol),
    );

    // 5. Square barrier against the closed form.
    let barrier = SquareBarrier {
        height: 2.0,
        half_width: 0.75,
    };
    let mut worst = 0f64;
    let mut max_residual = 0f64;
    for i in 0..50 {
        // 0.05 .. 4.95, stepping over the barrier top at 2.
        let eps = 0.05 + 0.1 * i as f64;
        match transmission(&barrier, eps) {
            Ok(p) => {
                worst = worst.max((p.t - square_barrier_t(barrier.height, barrier.half_width, eps)).abs());
                max_residual = max_residual.max(p.unitarity_residual);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    report.check(
        5,
        "square barrier",
        worst <= 1e-10,
        format!("max |T - T_exact| {:.1e} on 50 points", worst),
    );

    // 6. Unitarity over every scan in this suite plus full curves of the
    // gaussian family.
    let mut points = 50;
    for v0 in [2, 5, 10, 15] {
        let config = RunConfig {
            potential: Some(gaussian(v0)),
            transmission: TransmissionConfig {
                range: None,
                points: 400,
            },
            ..RunConfig::default()
        };
        match cmd_transmission(&config) {
            Ok(r) => {
                points += r.curve.points.len();
                max_residual = max_residual.max(r.curve.max_residual());
            }
            Err(_) => max_residual = f64::INFINITY,
        }
    }
    report.check(
        6,
        "unitarity",
        max_residual <= UNITARITY_TOLERANCE,
        format!("max |T + R - 1| {:.1e} over {points} points", max_residual),
    );

    // 7-10. Transmission peaks, Breit-Wigner and Siegert widths along v0.
    let mut peaks = Vec::new();
    let mut deviations = Vec::new();
    let mut sa_errors = Vec::new();
    for (v0, params) in &sweep_params {
        let p = gaussian(*v0);
        let (eps_t, fallback) = transmission_energy(&p, params);
        let t = transmission(&p, eps_t).map_or(0.0, |pt| pt.t);
        peaks.push((*v0, eps_t, t, fallback, params));
        deviations.push(bw_deviation(&p, params, params.gamma(), 201).unwrap_or(f64::INFINITY));
        let sa = sa_width(&p, Parity::Even, eps_t).map_or(f64::INFINITY, |r| r.gamma_sa);
        sa_errors.push((sa - params.gamma()).abs() / params.gamma());
    }
    let low = peaks.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    report.check(
        7,
        "peak value",
        peaks.len() == 4 && peaks.iter().all(|p| !p.3) && low >= 1.0 - PEAK_TOLERANCE,
        format!("min T(eps_T) = {low:.12}"),
    );
    let offsets: Vec<f64> = peaks
        .iter()
        .filter(|p| p.0 >= 5)
        .map(|p| (p.1 - p.4.epsilon_r).abs() / (p.4.gamma() / 2.0))
        .collect();
    report.check(
        8,
        "peak/pole agreement",
        offsets.len() == 3 && offsets.iter().all(|&o| o <= 1.0),
        format!("|eps_T - eps_R| / (Gamma/2) = {offsets:.3?} for v0 = 5, 10, 15"),
    );
    let decreasing = deviations.len() == 4 && deviations.windows(2).all(|w| w[1] < w[0]);
    report.check(
        9,
        "Breit-Wigner trend",
        decreasing && deviations[3] * 10.0 <= deviations[0],
        format!("deviations {deviations:.4?} for v0 = 2, 5, 10, 15"),
    );
    let narrow = weak_n0.as_ref().map_or(f64::INFINITY, |s| {
        let params = BWParams::new(s.epsilon_r().to_f64(), s.epsilon_i().to_f64());
        let p = PotentialSpec::gaussian("1/2".parse::<Param>().unwrap(), "0.1".parse::<Param>().unwrap());
        let (eps_t, _) = transmission_energy(&p, &params);
        sa_width(&p, Parity::Even, eps_t).map_or(f64::INFINITY, |r| (r.gamma_sa - params.gamma()).abs() / params.gamma())
    });
    let trend = sa_errors.len() == 4 && sa_errors[1] > sa_errors[2] && sa_errors[2] > sa_errors[3];
    report.check(
        10,
        "Siegert width",
        trend && narrow <= 0.25,
        format!("rel err {:.4?} for v0 = 5, 10, 15; weak barrier n=0 {:.1e}", &sa_errors[1..], narrow),
    );

    // 11. Overlap of the first two resonances.
    let config = RunConfig::preset("overlap").unwrap();
    let (rows, elapsed) = timed(|| cmd_overlap(&config));
    let (ok, detail) = match rows {
        Ok(rows) => {
            let flags: Vec<(String, bool)> = rows.iter().map(|r| (r.v0.clone(), r.overlap)).collect();
            let ok = rows.len() == 5
                && rows.iter().all(|r| r.overlap == (r.v0 == "2" || r.v0 == "3"));
            (ok, format!("{flags:?}, {:.1}s", elapsed.as_secs_f64()))
        }
        Err(e) => (false, e.to_string()),
    };
    report.check(11, "overlap", ok, detail);

    // 12. Localization of the narrowest weak-barrier resonance.
    let ratio = weak_n0.as_ref().map_or(f64::INFINITY, |s| {
        let p = PotentialSpec::gaussian("1/2".parse::<Param>().unwrap(), "0.1".parse::<Param>().unwrap());
        localization_ratio(&p, Parity::Even, s.epsilon_r().to_f64()).unwrap_or(f64::INFINITY)
    });
    report.check(12, "localization", ratio < 1e-3, format!("exterior/interior {:.1e}", ratio));

    let total = suite.elapsed();
    println!(
        "{}/12 criteria passed in {:.1}s",
        12 - report.failures,
        total.as_secs_f64()
    );
    if report.failures > 0 || total > Duration::from_secs(900) {
        std::process::exit(1);
    }
}
