//! The triparametric functions `Sng, Cng, Dng, Fng, Hng`.
//!
//! They solve the 5-EES with `α = (1, −1, −m, −n, −p)` and
//! `ω(0) = (0, 1, 1, 1, 1)`. Values come from dense integration; the
//! generalized amplitude `Amg` inverts the hyperelliptic quadrature, and the
//! `p = n` case reduces to a 4-Mahler system plus a Legendre integral of the
//! third kind.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::ees::{glashier_reduce, rhs_into, EesParams, Trajectory};
use crate::elliptic::complete_k;
use crate::error::{Error, Result};
use crate::mahler4::{mahler4_direct, quarter_period, Amplitude, MahlerParams4};
use crate::ode::{integrate, solve, DenseSolution, IntegratorConfig, OdeReport};
use crate::quad::{integrate as quad_integrate, QuadConfig};

const REL_TOL: f64 = 1e-13;
const ABS_TOL: f64 = 1e-15;
const MAX_NEWTON: usize = 100;

fn config(start: f64, end: f64) -> IntegratorConfig {
    IntegratorConfig::new(start, end).with_tolerances(REL_TOL, ABS_TOL)
}

/// The triple `(p, n, m)`, accepted for `p <= n <= m <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MahlerParams5 {
    p: f64,
    n: f64,
    m: f64,
}

impl MahlerParams5 {
    pub fn new(p: f64, n: f64, m: f64) -> Result<Self> {
        if !(p.is_finite() && n.is_finite() && m.is_finite()) {
            return Err(Error::domain("Mahler parameters must be finite"));
        }
        if m > 1.0 {
            return Err(Error::domain(format!("5-Mahler parameters need m <= 1, got m = {m}")));
        }
        if n > m || p > n {
            return Err(Error::domain(format!(
                "5-Mahler parameters need p <= n <= m, got (p, n, m) = ({p}, {n}, {m})"
            )));
        }
        Ok(MahlerParams5 { p, n, m })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Set when some parameter lies outside `[0, 1]`; values are still
    /// computed and the quadratic identities still hold.
    pub fn outside_unit_cube(&self) -> bool {
        [self.p, self.n, self.m].iter().any(|x| !(0.0..=1.0).contains(x))
    }

    /// The defining 5-EES.
    pub fn system(&self) -> EesParams {
        EesParams::mahler5(self.p, self.n, self.m).expect("finite parameters")
    }

    /// `(m, n)` of the 4-Mahler system reached at `p = 0`.
    pub fn reduced(&self) -> Result<MahlerParams4> {
        MahlerParams4::new(self.m, self.n)
    }
}

/// `(Sng, Cng, Dng, Fng, Hng)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mahler5Values {
    pub sng: f64,
    pub cng: f64,
    pub dng: f64,
    pub fng: f64,
    pub hng: f64,
}

impl Mahler5Values {
    pub const ORIGIN: Mahler5Values = Mahler5Values { sng: 0.0, cng: 1.0, dng: 1.0, fng: 1.0, hng: 1.0 };

    pub fn as_array(&self) -> [f64; 5] {
        [self.sng, self.cng, self.dng, self.fng, self.hng]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Mahler5Values { sng: y[0], cng: y[1], dng: y[2], fng: y[3], hng: y[4] }
    }

    /// Values with `Sng = sin φ`, `Cng = cos φ` for an amplitude `φ`.
    pub fn from_amplitude(phi: f64, q: &MahlerParams5) -> Self {
        let (s, c) = phi.sin_cos();
        let s2 = s * s;
        let root = |k: f64| (1.0 - k * s2).max(0.0).sqrt();
        Mahler5Values { sng: s, cng: c, dng: root(q.m), fng: root(q.n), hng: root(q.p) }
    }

    /// Largest defect of the four quadratic identities.
    pub fn identity_defect(&self, q: &MahlerParams5) -> f64 {
        let s2 = self.sng * self.sng;
        [
            self.cng * self.cng + s2,
            self.dng * self.dng + q.m * s2,
            self.fng * self.fng + q.n * s2,
            self.hng * self.hng + q.p * s2,
        ]
        .iter()
        .map(|x| (x - 1.0).abs())
        .fold(0.0, f64::max)
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &Mahler5Values) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Dense solution of the 5-Mahler system on a span containing 0, reused
/// for many arguments.
#[derive(Debug, Clone)]
pub struct Mahler5 {
    params: MahlerParams5,
    forward: Option<Trajectory>,
    backward: Option<Trajectory>,
}

impl Mahler5 {
    pub fn new(q: &MahlerParams5, start: f64, end: f64) -> Result<Self> {
        let (lo, hi) = (start.min(end), start.max(end));
        if !(lo.is_finite() && hi.is_finite()) || lo == hi {
            return Err(Error::domain("evaluation span must be finite and non-degenerate"));
        }
        if !(lo <= 0.0 && hi >= 0.0) {
            return Err(Error::domain(format!("evaluation span [{lo}, {hi}] must contain 0")));
        }
        let sys = q.system();
        let forward = if hi > 0.0 { Some(integrate(&sys, &config(0.0, hi))?) } else { None };
        let backward = if lo < 0.0 { Some(integrate(&sys, &config(0.0, lo))?) } else { None };
        Ok(Mahler5 { params: *q, forward, backward })
    }

    pub fn params(&self) -> &MahlerParams5 {
        &self.params
    }

    pub fn eval(&self, w: f64) -> Result<Mahler5Values> {
        if w == 0.0 {
            return Ok(Mahler5Values::ORIGIN);
        }
        let side = if w > 0.0 { &self.forward } else { &self.backward };
        match side {
            Some(traj) => Ok(Mahler5Values::from_slice(&traj.eval(w)?)),
            None => {
                let (lo, hi) = self.span();
                Err(Error::OutsideSpan { v: w, start: lo, end: hi })
            }
        }
    }

    /// `(lowest, highest)` argument covered.
    pub fn span(&self) -> (f64, f64) {
        let lo = self.backward.as_ref().map_or(0.0, |t| t.span().1);
        let hi = self.forward.as_ref().map_or(0.0, |t| t.span().1);
        (lo, hi)
    }

    /// Largest first-integral drift over both sides.
    pub fn drift(&self) -> f64 {
        [&self.forward, &self.backward].iter().filter_map(|t| t.as_ref().map(Trajectory::drift)).fold(0.0, f64::max)
    }
}

/// Values at `w` from a fresh integration over `[0, w]`.
pub fn mahler5_eval(w: f64, q: &MahlerParams5) -> Result<Mahler5Values> {
    if !w.is_finite() {
        return Err(Error::domain("argument must be finite"));
    }
    if w == 0.0 {
        return Ok(Mahler5Values::ORIGIN);
    }
    Mahler5::new(q, 0.0, w)?.eval(w)
}

/// Generalized amplitude `Amg(w; p, n, m)`, the inverse of
/// `w = ∫₀^{v*} dθ / √((1 − p sin²θ)(1 − n sin²θ)(1 − m sin²θ))`.
#[derive(Debug, Clone)]
pub struct Amg5 {
    params: MahlerParams5,
    kernel: Amplitude,
}

impl Amg5 {
    pub fn new(q: &MahlerParams5) -> Result<Self> {
        Ok(Amg5 { params: *q, kernel: Amplitude::new(&[q.p, q.n, q.m])? })
    }

    /// `∫₀^{π/2}` of the kernel, the quarter period of `Sng`.
    pub fn quarter_period(&self) -> f64 {
        self.kernel.quarter()
    }

    pub fn eval(&self, w: f64) -> Result<f64> {
        self.kernel.invert(w)
    }

    /// The quadrature at amplitude `v*`.
    pub fn g(&self, vstar: f64) -> Result<f64> {
        self.kernel.integral(vstar)
    }

    /// All five functions through the amplitude.
    pub fn values(&self, w: f64) -> Result<Mahler5Values> {
        Ok(Mahler5Values::from_amplitude(self.eval(w)?, &self.params))
    }
}

#[allow(non_snake_case)]
pub fn Amg(w: f64, q: &MahlerParams5) -> Result<f64> {
    Amg5::new(q)?.eval(w)
}

/// The regularization `dv* = ω₅ dv` of a 5-EES.
///
/// `u_i = ω_i / ω₅` solve the reduced 4-EES in `v*`, and
/// `v = √(α₁/C₁⁵) ∫ √(1 − n₂ u₁²) dv*` with `n₂ = α₅ / α₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct Omega5Regularization {
    pub reduced: EesParams,
    pub alpha1: f64,
    pub alpha5: f64,
    /// `C₁⁵ = α₁ ω₅(0)² − α₅ ω₁(0)²`.
    pub c15: f64,
    pub n2: f64,
    /// `√(α₁ / C₁⁵)`.
    pub scale: f64,
    /// Sign of `ω₅`, constant along the solution.
    pub sign: f64,
}

pub fn regularize_omega5(params: &EesParams) -> Result<Omega5Regularization> {
    if params.dimension() != 5 {
        return Err(Error::DimensionMismatch { expected: 5, found: params.dimension() });
    }
    let reduced = glashier_reduce(params, 4)?;
    let alpha1 = params.alphas()[0];
    let alpha5 = params.alphas()[4];
    let c15 = reduced.alphas()[0];
    if alpha1 == 0.0 {
        return Err(Error::domain("the ω₅ regularization needs α₁ ≠ 0"));
    }
    let ratio = alpha1 / c15;
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::domain(format!(
            "α₁ = {alpha1} and C₁⁵ = {c15} must share a sign for the regularizing quadrature"
        )));
    }
    Ok(Omega5Regularization {
        reduced,
        alpha1,
        alpha5,
        c15,
        n2: alpha5 / alpha1,
        scale: ratio.sqrt(),
        sign: params.ic()[4].signum(),
    })
}

impl Omega5Regularization {
    /// `1 / ω₅² = (α₁ − α₅ u₁²) / C₁⁵`.
    pub fn inverse_omega5_squared(&self, u1: f64) -> f64 {
        (self.alpha1 - self.alpha5 * u1 * u1) / self.c15
    }

    /// `dv / dv*`.
    pub fn speed(&self, u1: f64) -> f64 {
        self.scale * (1.0 - self.n2 * u1 * u1).max(0.0).sqrt()
    }

    /// `ω` recovered from the ratios.
    pub fn omega(&self, u: &[f64]) -> Result<[f64; 5]> {
        let inv = self.inverse_omega5_squared(u[0]);
        if !(inv > 0.0) {
            return Err(Error::VanishingDenominator("α₁ − α₅ u₁²"));
        }
        let w5 = self.sign / inv.sqrt();
        Ok([u[0] * w5, u[1] * w5, u[2] * w5, u[3] * w5, w5])
    }

    /// Integrates the reduced system together with `v(v*)` on `[0, v*_end]`.
    pub fn solve(&self, vstar_end: f64) -> Result<Omega5Path> {
        let alphas = self.reduced.alphas().to_vec();
        let mut y0 = self.reduced.ic().to_vec();
        y0.push(0.0);
        let (solution, report) = solve(
            |_, y, out| {
                rhs_into(&alphas, &y[..4], &mut out[..4]);
                out[4] = self.speed(y[0]);
            },
            &y0,
            &config(0.0, vstar_end),
        )?;
        Ok(Omega5Path { regularization: self.clone(), solution, report })
    }
}

/// A point of the regularized solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega5Point {
    pub vstar: f64,
    pub v: f64,
    pub u: [f64; 4],
    pub omega: [f64; 5],
}

/// Reduced trajectory plus the quadrature for the original variable.
#[derive(Debug, Clone)]
pub struct Omega5Path {
    regularization: Omega5Regularization,
    solution: DenseSolution,
    report: OdeReport,
}

impl Omega5Path {
    pub fn eval(&self, vstar: f64) -> Result<Omega5Point> {
        let y = self.solution.eval(vstar)?;
        let u = [y[0], y[1], y[2], y[3]];
        Ok(Omega5Point { vstar, v: y[4], u, omega: self.regularization.omega(&u)? })
    }

    pub fn regularization(&self) -> &Omega5Regularization {
        &self.regularization
    }

    pub fn report(&self) -> &OdeReport {
        &self.report
    }

    /// Integration nodes in `v*`.
    pub fn node_times(&self) -> Vec<f64> {
        self.solution.node_times()
    }
}

fn quad_cfg() -> QuadConfig {
    QuadConfig { abs_tol: 1e-15, rel_tol: 1e-14, max_intervals: 4000 }
}

/// `∫₀^φ` of a π-periodic even kernel, reduced by whole half periods.
fn periodic_integral<F: Fn(f64) -> f64>(f: F, phi: f64) -> Result<f64> {
    let turns = (phi / PI).round();
    let r = phi - turns * PI;
    let base = if turns == 0.0 { 0.0 } else { 2.0 * turns * quad_integrate(&f, 0.0, FRAC_PI_2, &quad_cfg())?.value };
    let rest = if r == 0.0 { 0.0 } else { quad_integrate(&f, 0.0, r, &quad_cfg())?.value };
    Ok(base + rest)
}

/// Legendre's incomplete integral of the third kind
/// `Π(φ; n, m) = ∫₀^φ dθ / ((1 − n sin²θ) √(1 − m sin²θ))`.
pub fn legendre_pi(phi: f64, n: f64, m: f64) -> Result<f64> {
    if !(phi.is_finite() && n.is_finite() && m.is_finite()) {
        return Err(Error::domain("Legendre integral arguments must be finite"));
    }
    if !(m < 1.0) {
        return Err(Error::domain(format!("Legendre integrals need m < 1, got m = {m}")));
    }
    if n >= 1.0 {
        // 1 − n sin²θ vanishes at θ = asin(1/√n).
        let pole = (1.0 / n.sqrt()).asin();
        if phi.abs() >= pole {
            return Err(Error::domain(format!(
                "Π(φ; n, m) with n = {n} crosses the characteristic singularity at θ = {pole}"
            )));
        }
        return Ok(quad_integrate(|t| pi_kernel(t, n, m), 0.0, phi, &quad_cfg())?.value);
    }
    periodic_integral(|t| pi_kernel(t, n, m), phi)
}

fn pi_kernel(t: f64, n: f64, m: f64) -> f64 {
    let s2 = t.sin().powi(2);
    1.0 / ((1.0 - n * s2) * (1.0 - m * s2).sqrt())
}

/// `F(φ, m) = ∫₀^φ dθ / √(1 − m sin²θ)`.
pub fn legendre_f(phi: f64, m: f64) -> Result<f64> {
    if !phi.is_finite() || !(m < 1.0) {
        return Err(Error::domain(format!("F(φ, m) needs finite φ and m < 1, got φ = {phi}, m = {m}")));
    }
    let turns = (phi / PI).round();
    let r = phi - turns * PI;
    let base = if turns == 0.0 { 0.0 } else { 2.0 * turns * complete_k(m)? };
    let rest = if r == 0.0 {
        0.0
    } else {
        quad_integrate(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, r, &quad_cfg())?.value
    };
    Ok(base + rest)
}

/// `E(φ, m) = ∫₀^φ √(1 − m sin²θ) dθ`.
pub fn legendre_e(phi: f64, m: f64) -> Result<f64> {
    if !phi.is_finite() || !(m <= 1.0) {
        return Err(Error::domain(format!("E(φ, m) needs finite φ and m <= 1, got φ = {phi}, m = {m}")));
    }
    periodic_integral(|t| (1.0 - m * t.sin().powi(2)).max(0.0).sqrt(), phi)
}

/// `0 < m < 1` and `−√m < n < m / (1 + √(1 − m))`, the reduced domain of
/// fast third-kind algorithms.
pub fn in_fukushima_domain(n: f64, m: f64) -> bool {
    0.0 < m && m < 1.0 && -m.sqrt() < n && n < m / (1.0 + (1.0 - m).sqrt())
}

/// The `p = n` case: `Hng ≡ Fng`, and `dṽ/dw = Fng` turns the system into
/// the 4-Mahler system in `ṽ`.
#[derive(Debug, Clone)]
pub struct PnCase {
    params: MahlerParams4,
    /// Quarter period of the 4-Mahler functions in `ṽ`.
    quarter: f64,
    /// `w` reached at `ṽ = quarter`.
    w_quarter: f64,
}

/// Values of the `p = n` case together with the regularized argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnValues {
    pub values: Mahler5Values,
    pub vtilde: f64,
    /// Whether `(n, m)` lies in the reduced domain of fast third-kind
    /// algorithms.
    pub fukushima_domain: bool,
}

impl PnCase {
    pub fn new(n: f64, m: f64) -> Result<Self> {
        if !(n < 1.0 && m < 1.0) {
            return Err(Error::domain(format!("the p = n case needs n < 1 and m < 1, got n = {n}, m = {m}")));
        }
        let params = MahlerParams4::new(m, n)?;
        let quarter = quarter_period(&params)?;
        let mut case = PnCase { params, quarter, w_quarter: 0.0 };
        case.w_quarter = case.w_raw(0.0, quarter)?;
        Ok(case)
    }

    pub fn n(&self) -> f64 {
        self.params.n()
    }

    pub fn m(&self) -> f64 {
        self.params.m()
    }

    fn inverse_fng(&self, vt: f64) -> f64 {
        mahler4_direct(vt, &self.params).map_or(f64::NAN, |w| 1.0 / w.fng)
    }

    fn w_raw(&self, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let r = quad_integrate(|t| self.inverse_fng(t), a, b, &quad_cfg())?.value;
        if !r.is_finite() {
            return Err(Error::NoConvergence("quadrature of 1 / fng"));
        }
        Ok(r)
    }

    /// `w(ṽ) = ∫₀^ṽ dṽ' / fng(ṽ')`.
    pub fn w_of(&self, vtilde: f64) -> Result<f64> {
        if !vtilde.is_finite() {
            return Err(Error::domain("argument must be finite"));
        }
        let turns = (vtilde / (2.0 * self.quarter)).round();
        let r = vtilde - 2.0 * self.quarter * turns;
        Ok(2.0 * turns * self.w_quarter + self.w_raw(0.0, r)?)
    }

    /// `ṽ` with `w(ṽ) = w`.
    pub fn vtilde(&self, w: f64) -> Result<f64> {
        if !w.is_finite() {
            return Err(Error::domain("argument must be finite"));
        }
        let turns = (w / (2.0 * self.w_quarter)).round();
        let target = w - 2.0 * self.w_quarter * turns;
        let shift = 2.0 * self.quarter * turns;
        if target == 0.0 {
            return Ok(shift);
        }
        let (mut lo, mut hi) = (-self.quarter, self.quarter);
        let mut x = (target * self.quarter / self.w_quarter).clamp(lo, hi);
        for _ in 0..MAX_NEWTON {
            let defect = self.w_raw(0.0, x)? - target;
            if defect == 0.0 {
                return Ok(shift + x);
            }
            if defect > 0.0 {
                hi = hi.min(x);
            } else {
                lo = lo.max(x);
            }
            let mut next = x - defect / self.inverse_fng(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                return Ok(shift + next);
            }
            x = next;
        }
        Err(Error::NoConvergence("inversion of w(ṽ)"))
    }

    pub fn eval(&self, w: f64) -> Result<PnValues> {
        let vtilde = self.vtilde(w)?;
        let v4 = mahler4_direct(vtilde, &self.params)?;
        Ok(PnValues {
            values: Mahler5Values { sng: v4.sng, cng: v4.cng, dng: v4.dng, fng: v4.fng, hng: v4.fng },
            vtilde,
            fukushima_domain: in_fukushima_domain(self.n(), self.m()),
        })
    }
}

pub fn pn_case(w: f64, n: f64, m: f64) -> Result<PnValues> {
    PnCase::new(n, m)?.eval(w)
}
