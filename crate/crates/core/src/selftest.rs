//! Invariant and cross-path checks, runnable from the command line.
//!
//! Each check measures one error and compares it with a fixed tolerance
//! multiplied by a caller-chosen scale. Library errors count as failures.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ees::EesParams;
use crate::elliptic::{
    jacobi_system, landen_descend, sncndn, theta_ratio_fixture, transform_negative, transform_reciprocal, ThetaRatioTag,
};
use crate::error::{Error, Result};
use crate::figures::figure_sets;
use crate::mahler4::{
    addition, amg, double_values, half_arg, mahler4_closed, mahler4_direct, mahler4_trajectory, particular_case,
    quarter_period, MahlerParams4, ParticularCase, Sign,
};
use crate::mahler5::{legendre_e, legendre_f, legendre_pi, regularize_omega5, Amg5, Mahler5, MahlerParams5, PnCase};
use crate::ode::{integrate, IntegratorConfig};
use crate::rigidbody::{
    rb_alt_constants, rb_constants, rb_hamiltonian, rb_integrate, rb_mu, rb_rhs, rb_solution, InertiaParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::domain(format!("unknown self-test level '{other}' (expected quick or full)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    /// Measured error; `null` in JSON when the check could not run.
    pub error: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfTestReport {
    pub level: Level,
    pub tolerance_scale: f64,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<CheckOutcome>,
}

impl SelfTestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Check = (&'static str, f64, fn() -> Result<f64>);

const QUICK: [Check; 12] = [
    ("ees.first-integral-drift", 1e-9, figure_drift),
    ("elliptic.identities", 1e-12, jacobi_identities),
    ("elliptic.transforms-vs-ode", 1e-10, transforms_vs_ode),
    ("mahler4.triple-path", 1e-9, mahler4_triple_path),
    ("mahler4.identities", 1e-12, mahler4_identities),
    ("mahler4.unit-parameters", 1e-12, mahler4_unit_parameters),
    ("mahler4.addition", 1e-10, mahler4_addition),
    ("mahler4.half-double", 1e-11, mahler4_half_double),
    ("mahler4.amplitude", 1e-10, mahler4_amplitude),
    ("mahler5.identities", 1e-12, mahler5_identities),
    ("mahler5.p-zero", 1e-10, mahler5_p_zero),
    ("legendre.identities", 1e-12, legendre_identities),
];

const FULL: [Check; 8] = [
    ("elliptic.theta-fixtures", 1e-9, theta_fixtures),
    ("mahler5.omega5-regularization", 1e-8, mahler5_omega5),
    ("mahler5.amplitude-path", 1e-8, mahler5_amplitude_path),
    ("mahler5.pn-case", 1e-8, mahler5_pn_case),
    ("mahler5.pn-legendre-round-trip", 1e-10, mahler5_pn_round_trip),
    ("rigidbody.closed-form-vs-ode", 1e-8, rigidbody_closed_form),
    ("rigidbody.conservation", 1e-10, rigidbody_conservation),
    ("rigidbody.separated-form", 1e-8, rigidbody_separated),
];

/// Runs the checks of `level` with every tolerance multiplied by `scale`.
pub fn run_selftest(level: Level, scale: f64) -> SelfTestReport {
    let start = Instant::now();
    let checks: Vec<&Check> = match level {
        Level::Quick => QUICK.iter().collect(),
        Level::Full => QUICK.iter().chain(FULL.iter()).collect(),
    };
    let outcomes: Vec<CheckOutcome> = checks
        .into_iter()
        .map(|(name, tol, f)| {
            let t0 = Instant::now();
            let tolerance = tol * scale;
            let (error, message) = match f() {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e.to_string())),
            };
            CheckOutcome {
                name,
                error,
                tolerance,
                passed: error.is_some_and(|e| e <= tolerance),
                seconds: t0.elapsed().as_secs_f64(),
                message,
            }
        })
        .collect();
    SelfTestReport {
        level,
        tolerance_scale: scale,
        passed: outcomes.iter().all(|c| c.passed),
        seconds: start.elapsed().as_secs_f64(),
        checks: outcomes,
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

const MAHLER4_SETS: [(f64, f64); 4] = [(0.8, 0.1), (0.5, -2.0), (0.5, 0.5), (0.95, 0.95)];

fn figure_drift() -> Result<f64> {
    let mut worst = 0.0f64;
    for set in figure_sets() {
        worst = worst.max(integrate(&set.params, &IntegratorConfig::new(0.0, 20.0))?.drift());
    }
    Ok(worst)
}

fn jacobi_identities() -> Result<f64> {
    let mut r = rng();
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let t = sncndn(r.gen_range(-50.0..50.0), r.gen_range(-5.0..1.0))?;
        worst = worst.max(t.identity_defect());
    }
    Ok(worst)
}

fn transforms_vs_ode() -> Result<f64> {
    let mut worst = 0.0f64;
    // Negative parameter: α = (1, −1, m) for sn(u; −m).
    let m = 0.75;
    let map = transform_negative(m)?;
    let traj = integrate(&jacobi_system(-m), &IntegratorConfig::new(0.0, 5.0))?;
    for i in 0..=20 {
        let u = 0.25 * i as f64;
        let t = map.apply(u)?;
        worst = worst.max(max_abs(&[t.sn, t.cn, t.dn], &traj.eval(u)?));
    }
    let traj = integrate(&jacobi_system(4.0), &IntegratorConfig::new(0.0, 3.0))?;
    for i in 0..=20 {
        let u = 0.15 * i as f64;
        let t = transform_reciprocal(u, 4.0)?;
        worst = worst.max(max_abs(&[t.sn, t.cn, t.dn], &traj.eval(u)?));
    }
    let traj = integrate(&jacobi_system(0.64), &IntegratorConfig::new(0.0, 5.0))?;
    for i in 0..=20 {
        let u = 0.25 * i as f64;
        let step = landen_descend(u, 0.64)?;
        let y = traj.eval(u)?;
        worst = worst.max(max_abs(&[step.values.sn, step.values.cn, step.values.dn], &y));
        worst = worst.max((step.dn_double - y[2]).abs());
    }
    Ok(worst)
}

fn theta_fixtures() -> Result<f64> {
    let mut worst = 0.0f64;
    for tag in ThetaRatioTag::ALL {
        let params = theta_ratio_fixture(tag, 0.6)?;
        let span = if tag.is_bounded() { 20.0 } else { 0.5 };
        worst = worst.max(integrate(&params, &IntegratorConfig::new(0.0, span))?.drift());
    }
    Ok(worst)
}

fn mahler4_triple_path() -> Result<f64> {
    let mut r = rng();
    let mut worst = 0.0f64;
    for (m, n) in MAHLER4_SETS {
        let p = MahlerParams4::new(m, n)?;
        let traj = mahler4_trajectory(&p, 0.0, 20.0)?;
        for _ in 0..25 {
            let v = r.gen_range(0.0..20.0);
            let a = mahler4_closed(v, &p)?.as_array();
            let b = mahler4_direct(v, &p)?.as_array();
            let c = traj.eval(v)?;
            worst = worst.max(max_abs(&a, &b)).max(max_abs(&a, &c)).max(max_abs(&b, &c));
        }
    }
    Ok(worst)
}

fn mahler4_identities() -> Result<f64> {
    let mut r = rng();
    let mut worst = 0.0f64;
    for (m, n) in MAHLER4_SETS {
        let p = MahlerParams4::new(m, n)?;
        for _ in 0..100 {
            worst = worst.max(mahler4_direct(r.gen_range(-30.0..30.0), &p)?.identity_defect(&p));
        }
    }
    Ok(worst)
}

fn mahler4_unit_parameters() -> Result<f64> {
    let p = MahlerParams4::new(1.0, 1.0)?;
    let mut worst = 0.0f64;
    for i in 0..50 {
        let v = -5.0 + 0.2 * i as f64;
        let expected = v / (1.0 + v * v).sqrt();
        worst = worst.max((mahler4_direct(v, &p)?.sng - expected).abs());
        worst = worst.max((particular_case(v, ParticularCase::MnOne, &p)?.sng - expected).abs());
    }
    Ok(worst)
}

fn mahler4_addition() -> Result<f64> {
    let mut r = rng();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (m, n) = MAHLER4_SETS[r.gen_range(0..MAHLER4_SETS.len())];
        let p = MahlerParams4::new(m, n)?;
        let (x, y) = (r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0));
        let w = addition(x, y, &p, Sign::Plus)?;
        worst = worst.max(w.max_diff(&mahler4_direct(x + y, &p)?));
    }
    Ok(worst)
}

fn mahler4_half_double() -> Result<f64> {
    let mut r = rng();
    let mut worst = 0.0f64;
    for (m, n) in MAHLER4_SETS {
        let p = MahlerParams4::new(m, n)?;
        let quarter = quarter_period(&p)?;
        for _ in 0..50 {
            let x = r.gen_range(-2.0 * quarter..2.0 * quarter);
            let back = double_values(&half_arg(x, &p)?, &p)?;
            worst = worst.max(back.max_diff(&mahler4_direct(x, &p)?));
        }
    }
    Ok(worst)
}

fn mahler4_amplitude() -> Result<f64> {
    let mut worst = 0.0f64;
    for (m, n) in MAHLER4_SETS {
        let p = MahlerParams4::new(m, n)?;
        for i in 0..20 {
            let v = -7.0 + 0.73 * i as f64;
            let phi = amg(v, &p)?;
            let w = mahler4_direct(v, &p)?;
            worst = worst.max((phi.sin() - w.sng).abs()).max((phi.cos() - w.cng).abs());
        }
    }
    Ok(worst)
}

fn mahler5_identities() -> Result<f64> {
    let mut worst = 0.0f64;
    for (p, n, m) in [(0.2, 0.4, 0.7), (-2.0, -1.0, 0.4)] {
        let q = MahlerParams5::new(p, n, m)?;
        let ev = Mahler5::new(&q, -20.0, 20.0)?;
        for i in 0..=80 {
            worst = worst.max(ev.eval(-20.0 + 0.5 * i as f64)?.identity_defect(&q));
        }
    }
    Ok(worst)
}

fn mahler5_p_zero() -> Result<f64> {
    let mut r = rng();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let m = r.gen_range(0.0..1.0);
        let n = r.gen_range(0.0..m);
        let q = MahlerParams5::new(0.0, n, m)?;
        let p4 = q.reduced()?;
        let ev = Mahler5::new(&q, 0.0, 20.0)?;
        for _ in 0..10 {
            let w = r.gen_range(0.0..20.0);
            let a = ev.eval(w)?;
            let b = mahler4_direct(w, &p4)?;
            worst = worst.max(max_abs(&a.as_array()[..4], &b.as_array())).max((a.hng - 1.0).abs());
        }
    }
    Ok(worst)
}

fn legendre_identities() -> Result<f64> {
    let mut worst = 0.0f64;
    for m in [0.2, 0.5, 0.9, -1.5] {
        for phi in [0.3, 1.1, 2.5, -3.7] {
            worst = worst.max((legendre_pi(phi, 0.0, m)? - legendre_f(phi, m)?).abs());
            let identity = (1.0 - m) * legendre_pi(phi, m, m)?
                + m * (2.0 * phi).sin() / (2.0 * (1.0 - m * phi.sin().powi(2)).sqrt());
            worst = worst.max((identity - legendre_e(phi, m)?).abs());
        }
    }
    Ok(worst)
}

fn mahler5_omega5() -> Result<f64> {
    let sys = EesParams::mahler5(0.2, 0.4, 0.7)?;
    let reg = regularize_omega5(&sys)?;
    let path = reg.solve(15.0)?;
    let direct = integrate(&sys, &IntegratorConfig::new(0.0, path.eval(15.0)?.v).with_tolerances(1e-13, 1e-15))?;
    let mut worst = 0.0f64;
    for i in 0..=60 {
        let pt = path.eval(0.25 * i as f64)?;
        worst = worst.max(max_abs(&pt.omega, &direct.eval(pt.v)?));
    }
    Ok(worst)
}

fn mahler5_amplitude_path() -> Result<f64> {
    let q = MahlerParams5::new(0.2, 0.4, 0.7)?;
    let ev = Mahler5::new(&q, -10.0, 10.0)?;
    let amp = Amg5::new(&q)?;
    let mut worst = 0.0f64;
    for i in 0..50 {
        let w = -10.0 + 0.4 * i as f64;
        worst = worst.max(amp.values(w)?.max_diff(&ev.eval(w)?));
    }
    Ok(worst)
}

fn mahler5_pn_case() -> Result<f64> {
    let (n, m) = (0.3, 0.6);
    let case = PnCase::new(n, m)?;
    let ev = Mahler5::new(&MahlerParams5::new(n, n, m)?, 0.0, 15.0)?;
    let mut worst = 0.0f64;
    for i in 0..30 {
        let w = 0.5 * i as f64;
        worst = worst.max(case.eval(w)?.values.max_diff(&ev.eval(w)?));
    }
    Ok(worst)
}

fn mahler5_pn_round_trip() -> Result<f64> {
    let (n, m) = (0.3, 0.6);
    let amp = Amg5::new(&MahlerParams5::new(n, n, m)?)?;
    let mut worst = 0.0f64;
    for i in 0..30 {
        let w = -7.0 + 0.5 * i as f64;
        worst = worst.max((legendre_pi(amp.eval(w)?, n, m)? - w).abs());
    }
    Ok(worst)
}

fn rigid_body() -> Result<(InertiaParams, crate::rigidbody::RBConstants)> {
    let inertia = InertiaParams::new(1.0, 2.0, 3.0)?;
    let d = 0.5 * (1.0 / 3.0 + 0.5);
    let k = rb_constants(&inertia, 1.0, 0.5 * d)?;
    Ok((inertia, k))
}

fn rigidbody_closed_form() -> Result<f64> {
    let (inertia, k) = rigid_body()?;
    let period = k.period()?;
    let traj = rb_integrate(&k.initial_state(), &inertia, period)?;
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let t = period * i as f64 / 40.0;
        let w = rb_solution(t, &k)?;
        let y = traj.eval(t)?;
        worst = worst.max(max_abs(&[w.sin_nu, w.cos_nu, w.big_n], &[y.nu.sin(), y.nu.cos(), y.big_n]));
        worst = worst.max((rb_mu(t, &k, &inertia)? - y.mu).abs());
    }
    Ok(worst)
}

fn rigidbody_conservation() -> Result<f64> {
    let (inertia, k) = rigid_body()?;
    let traj = rb_integrate(&k.initial_state(), &inertia, 5.0 * k.period()?)?;
    let mut worst = 0.0f64;
    for t in traj.node_times() {
        let y = traj.eval(t)?;
        worst = worst.max((rb_hamiltonian(&y, &inertia) - k.h).abs() / k.h.abs());
        worst = worst.max((y.big_m - k.big_m).abs() / k.big_m);
    }
    Ok(worst)
}

fn rigidbody_separated() -> Result<f64> {
    let (inertia, k) = rigid_body()?;
    let alt = rb_alt_constants(&inertia, k.big_m, k.h)?;
    let traj = rb_integrate(&k.initial_state(), &inertia, k.period()?)?;
    let mut worst = 0.0f64;
    for i in 0..30 {
        let t = k.period()? * i as f64 / 30.0;
        let y = traj.eval(t)?;
        worst = worst.max((alt.rate(k.big_m, y.nu) - rb_rhs(&y, &inertia).nu_dot.abs()).abs());
    }
    Ok(worst)
}
