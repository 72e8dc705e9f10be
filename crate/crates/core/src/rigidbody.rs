//! Free rigid body in Andoyer variables `(λ, μ, ν, Λ, M, N)`.
//!
//! `(ν, N)` follow a one-degree-of-freedom Hamiltonian system whose solution
//! is written in Jacobi functions, in Mahler functions, or through the
//! separated quadrature inverted by `amg`; `μ` is a quadrature on top.

use crate::elliptic::{am, sncndn};
use crate::error::{Error, Result};
use crate::mahler4::{mahler4_direct, Amg, MahlerParams4};
use crate::mahler5::legendre_pi;
use crate::ode::{solve, DenseSolution, IntegratorConfig, OdeReport};
use crate::quad::{integrate, QuadConfig};

/// Principal moments `A <= B <= C` with `C <= A + B`; equality is the
/// planar (lamina) limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaParams {
    a: f64,
    b: f64,
    c: f64,
}

impl InertiaParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::domain("moments of inertia must be positive and finite"));
        }
        if !(a <= b && b <= c) {
            return Err(Error::domain(format!("moments must satisfy A <= B <= C, got ({a}, {b}, {c})")));
        }
        if !(c <= a + b) {
            return Err(Error::domain(format!("moments must satisfy C <= A + B, got ({a}, {b}, {c})")));
        }
        Ok(InertiaParams { a, b, c })
    }

    pub fn moments(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    /// `(1/A, 1/B, 1/C)`.
    pub fn inverse(&self) -> (f64, f64, f64) {
        (1.0 / self.a, 1.0 / self.b, 1.0 / self.c)
    }
}

/// Angles `(λ, μ, ν)` and momenta `(Λ, M, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndoyerState {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub big_lambda: f64,
    pub big_m: f64,
    pub big_n: f64,
}

impl AndoyerState {
    pub fn new(lambda: f64, mu: f64, nu: f64, big_lambda: f64, big_m: f64, big_n: f64) -> Result<Self> {
        if ![lambda, mu, nu, big_lambda, big_m, big_n].iter().all(|x| x.is_finite()) {
            return Err(Error::domain("Andoyer variables must be finite"));
        }
        if big_n.abs() > big_m || big_lambda.abs() > big_m {
            return Err(Error::domain(format!(
                "need |N| <= M and |Λ| <= M, got M = {big_m}, N = {big_n}, Λ = {big_lambda}"
            )));
        }
        Ok(AndoyerState { lambda, mu, nu, big_lambda, big_m, big_n })
    }
}

/// `a₁ sin²ν + a₂ cos²ν`.
fn mixed(inertia: &InertiaParams, nu: f64) -> f64 {
    let (a1, a2, _) = inertia.inverse();
    let (s, c) = nu.sin_cos();
    a1 * s * s + a2 * c * c
}

/// `H = ½(a₁ sin²ν + a₂ cos²ν)(M² − N²) + ½ a₃ N²`.
pub fn rb_hamiltonian(state: &AndoyerState, inertia: &InertiaParams) -> f64 {
    let a3 = 1.0 / inertia.c;
    let n2 = state.big_n * state.big_n;
    0.5 * mixed(inertia, state.nu) * (state.big_m * state.big_m - n2) + 0.5 * a3 * n2
}

/// Rates of the non-constant variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbRates {
    pub nu_dot: f64,
    pub n_dot: f64,
    pub mu_dot: f64,
}

pub fn rb_rhs(state: &AndoyerState, inertia: &InertiaParams) -> RbRates {
    rates(inertia, state.big_m, state.nu, state.big_n)
}

fn rates(inertia: &InertiaParams, big_m: f64, nu: f64, big_n: f64) -> RbRates {
    let (a1, a2, a3) = inertia.inverse();
    let (s, c) = nu.sin_cos();
    let g = a1 * s * s + a2 * c * c;
    RbRates { nu_dot: big_n * (a3 - g), n_dot: (a2 - a1) * (big_m * big_m - big_n * big_n) * s * c, mu_dot: big_m * g }
}

/// Constants of the Jacobi-function solution in the circulation regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RBConstants {
    pub big_m: f64,
    pub h: f64,
    /// `2h / M²`.
    pub d: f64,
    pub r: f64,
    pub n_star: f64,
    pub m: f64,
    pub s: f64,
}

pub fn rb_constants(inertia: &InertiaParams, big_m: f64, h: f64) -> Result<RBConstants> {
    if !(big_m > 0.0 && big_m.is_finite() && h.is_finite()) {
        return Err(Error::domain("need M > 0 and finite h"));
    }
    let (a, b, c) = inertia.moments();
    let d = 2.0 * h / (big_m * big_m);
    if c == a || c == b || d * a == 1.0 {
        return Err(Error::domain("the Jacobi solution needs C ≠ A, C ≠ B and dA ≠ 1"));
    }
    let r2 = big_m * big_m * c * (1.0 - d * a) / (c - a);
    let s2 = big_m * big_m * (c - b) * (1.0 - d * a) / (a * b * c);
    let n_star = c * (b - a) / (a * (c - b));
    let m = (b - a) * (d * c - 1.0) / ((c - b) * (1.0 - d * a));
    if !(r2 > 0.0 && s2 > 0.0) {
        return Err(Error::domain(format!("energy d = {d} is outside the admissible range (R² = {r2}, s² = {s2})")));
    }
    if m == 1.0 {
        return Err(Error::domain("separatrix motion (m = 1) has no periodic Jacobi parameterization"));
    }
    if !(0.0..1.0).contains(&m) {
        return Err(Error::domain(format!(
            "only the circulation regime 0 <= m < 1 is parameterized, got m = {m}; integrate the equations directly"
        )));
    }
    Ok(RBConstants { big_m, h, d, r: r2.sqrt(), n_star, m, s: s2.sqrt() })
}

impl RBConstants {
    /// Period of `(ν, N)`, `4K(m) / s`.
    pub fn period(&self) -> Result<f64> {
        Ok(4.0 * crate::elliptic::complete_k(self.m)? / self.s)
    }

    /// The state at `t = 0`: `ν = π/2`, `N = R`, `μ = 0`.
    pub fn initial_state(&self) -> AndoyerState {
        AndoyerState {
            lambda: 0.0,
            mu: 0.0,
            nu: std::f64::consts::FRAC_PI_2,
            big_lambda: 0.0,
            big_m: self.big_m,
            big_n: self.r,
        }
    }
}

/// `sin ν`, `cos ν` and `N` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbSolution {
    pub sin_nu: f64,
    pub cos_nu: f64,
    /// `ν` in `(−π, π]`.
    pub nu: f64,
    pub big_n: f64,
}

/// `sin ν = cn / √(1 + n* sn²)`, `cos ν = √(1 + n*) sn / √(1 + n* sn²)`,
/// `N = R dn`, all at `(s t; m)`.
pub fn rb_solution(t: f64, k: &RBConstants) -> Result<RbSolution> {
    let j = sncndn(k.s * t, k.m)?;
    let den = (1.0 + k.n_star * j.sn * j.sn).sqrt();
    let (x, y) = (j.cn / den, (1.0 + k.n_star).sqrt() * j.sn / den);
    // Renormalize so that sin²ν + cos²ν = 1 holds to rounding.
    let norm = x.hypot(y);
    Ok(RbSolution { sin_nu: x / norm, cos_nu: y / norm, nu: x.atan2(y), big_n: k.r * j.dn })
}

/// `μ(t) = M ∫₀ᵗ (a₁ sin²ν + a₂ cos²ν) dt` by adaptive quadrature.
pub fn rb_mu(t: f64, k: &RBConstants, inertia: &InertiaParams) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let (a1, a2, _) = inertia.inverse();
    let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 4000 };
    let f = |x: f64| rb_solution(x, k).map_or(f64::NAN, |w| a1 * w.sin_nu * w.sin_nu + a2 * w.cos_nu * w.cos_nu);
    let r = integrate(f, 0.0, t, &cfg)?.value;
    if !r.is_finite() {
        return Err(Error::NoConvergence("μ quadrature"));
    }
    Ok(k.big_m * r)
}

/// `μ(t)` through Legendre's third-kind integral:
/// `μ = M a₁ t + M (a₂ − a₁)(1 + n*)/n* · (t − Π(am(s t); −n*, m)/s)`.
pub fn rb_mu_legendre(t: f64, k: &RBConstants, inertia: &InertiaParams) -> Result<f64> {
    let (a1, a2, _) = inertia.inverse();
    let u = k.s * t;
    let cos2_integral = if k.n_star != 0.0 {
        (1.0 + k.n_star) / k.n_star * (t - legendre_pi(am(u, k.m)?, -k.n_star, k.m)? / k.s)
    } else if k.m == 0.0 {
        (u - u.sin() * u.cos()) / (2.0 * k.s)
    } else {
        (u - crate::mahler5::legendre_e(am(u, k.m)?, k.m)?) / (k.m * k.s)
    };
    Ok(k.big_m * (a1 * t + (a2 - a1) * cos2_integral))
}

/// Constants of the separated form `M √Ω dt = dν / √((1 − n₁ sin²ν)(1 − m₁ sin²ν))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RBAltConstants {
    pub n1: f64,
    pub m1: f64,
    /// `(d − a₂)(a₃ − a₂)`.
    pub omega: f64,
}

pub fn rb_alt_constants(inertia: &InertiaParams, big_m: f64, h: f64) -> Result<RBAltConstants> {
    if !(big_m > 0.0 && big_m.is_finite() && h.is_finite()) {
        return Err(Error::domain("need M > 0 and finite h"));
    }
    let (a1, a2, a3) = inertia.inverse();
    let d = 2.0 * h / (big_m * big_m);
    if a3 == a2 {
        return Err(Error::domain("the separated form needs a₃ ≠ a₂ (B = C is treated separately)"));
    }
    if d == a2 {
        return Err(Error::domain("the separated form needs d ≠ a₂ (separatrix energy)"));
    }
    Ok(RBAltConstants { n1: (a1 - a2) / (d - a2), m1: (a1 - a2) / (a3 - a2), omega: (d - a2) * (a3 - a2) })
}

impl RBAltConstants {
    /// `M √|Ω| √|(1 − n₁ sin²ν)(1 − m₁ sin²ν)|`, the predicted `|ν̇|`.
    pub fn rate(&self, big_m: f64, nu: f64) -> f64 {
        let s2 = nu.sin().powi(2);
        big_m * self.omega.abs().sqrt() * ((1.0 - self.n1 * s2) * (1.0 - self.m1 * s2)).abs().sqrt()
    }

    /// `ν(t) = amg(G(ν₀) + σ M √Ω t; n₁, m₁)` with `σ = ±1` the sense of
    /// rotation; needs `Ω > 0` and `n₁, m₁ <= 1`.
    pub fn nu(&self, t: f64, big_m: f64, nu0: f64, sense: f64) -> Result<f64> {
        if !(self.omega > 0.0) {
            return Err(Error::domain("the amplitude form needs Ω > 0"));
        }
        let amp = Amg::new(&MahlerParams4::new(self.n1.max(self.m1), self.n1.min(self.m1))?)?;
        amp.eval(amp.g(nu0)? + sense.signum() * big_m * self.omega.sqrt() * t)
    }
}

/// `sin ν = A₁ cng(w)`, `cos ν = A₂ sng(w)`, `N = A₃ dng(w)/fng(w)` with
/// `w = s √(1 + n*) t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbMahlerForm {
    pub params: MahlerParams4,
    pub w_scale: f64,
    pub amplitudes: [f64; 3],
}

/// Mahler parameters `n' = n*/(1 + n*)`, `m' = n' + m(1 − n')`, with the
/// amplitudes fitted from the values and slopes at `t = 0`.
pub fn rb_mahler_form(k: &RBConstants, inertia: &InertiaParams) -> Result<RbMahlerForm> {
    let n = k.n_star / (1.0 + k.n_star);
    let params = MahlerParams4::new(n + k.m * (1.0 - n), n)?;
    let w_scale = k.s * (1.0 + k.n_star).sqrt();
    let start = rb_solution(0.0, k)?;
    let origin = mahler4_direct(0.0, &params)?;
    let rates = rates(inertia, k.big_m, start.nu, start.big_n);
    // d(cos ν)/dt = −sin ν ν̇ and d(sng)/dt = w_scale at t = 0.
    let a2 = -start.sin_nu * rates.nu_dot / w_scale;
    Ok(RbMahlerForm {
        params,
        w_scale,
        amplitudes: [start.sin_nu / origin.cng, a2, start.big_n * origin.fng / origin.dng],
    })
}

impl RbMahlerForm {
    pub fn eval(&self, t: f64) -> Result<RbSolution> {
        let w = mahler4_direct(self.w_scale * t, &self.params)?;
        let sin_nu = self.amplitudes[0] * w.cng;
        let cos_nu = self.amplitudes[1] * w.sng;
        Ok(RbSolution { sin_nu, cos_nu, nu: sin_nu.atan2(cos_nu), big_n: self.amplitudes[2] * w.dng / w.fng })
    }
}

/// Numerical solution of `(ν, N, μ)` from an arbitrary state.
#[derive(Debug, Clone)]
pub struct RbTrajectory {
    start: AndoyerState,
    solution: DenseSolution,
    report: OdeReport,
}

pub fn rb_integrate(state: &AndoyerState, inertia: &InertiaParams, t_end: f64) -> Result<RbTrajectory> {
    let big_m = state.big_m;
    let cfg = IntegratorConfig::new(0.0, t_end).with_tolerances(1e-13, 1e-15);
    let (solution, report) = solve(
        |_, y, out| {
            let r = rates(inertia, big_m, y[0], y[1]);
            out[0] = r.nu_dot;
            out[1] = r.n_dot;
            out[2] = r.mu_dot;
        },
        &[state.nu, state.big_n, state.mu],
        &cfg,
    )?;
    Ok(RbTrajectory { start: *state, solution, report })
}

impl RbTrajectory {
    pub fn eval(&self, t: f64) -> Result<AndoyerState> {
        let y = self.solution.eval(t)?;
        Ok(AndoyerState { nu: y[0], big_n: y[1], mu: y[2], ..self.start })
    }

    pub fn node_times(&self) -> Vec<f64> {
        self.solution.node_times()
    }

    pub fn report(&self) -> &OdeReport {
        &self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn body() -> InertiaParams {
        InertiaParams::new(1.0, 2.0, 3.0).unwrap()
    }

    fn mid() -> RBConstants {
        // d halfway between a₃ and a₂.
        let d = 0.5 * (1.0 / 3.0 + 0.5);
        rb_constants(&body(), 1.0, 0.5 * d).unwrap()
    }

    #[test]
    fn hamiltonian_values() {
        let i = body();
        let s = AndoyerState::new(0.0, 0.0, 0.7, 0.0, 2.0, 2.0).unwrap();
        assert!((rb_hamiltonian(&s, &i) - 2.0 / 3.0).abs() < 1e-15);
        let s = AndoyerState::new(0.0, 0.0, 0.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(rb_hamiltonian(&s, &i), 1.0);
        let sphere = InertiaParams::new(2.0, 2.0, 2.0).unwrap();
        let s = AndoyerState::new(0.1, 0.2, 1.3, 0.0, 1.5, 0.4).unwrap();
        assert!((rb_hamiltonian(&s, &sphere) - 1.5 * 1.5 / 4.0).abs() < 1e-15);
        assert!(AndoyerState::new(0.0, 0.0, 0.0, 0.0, 1.0, 2.0).is_err());
        assert!(InertiaParams::new(1.0, 2.0, 3.5).is_err());
    }

    #[test]
    fn symmetric_body_rates() {
        let i = InertiaParams::new(1.0, 1.0, 1.5).unwrap();
        let s = AndoyerState::new(0.0, 0.0, 0.4, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(rb_rhs(&s, &i).n_dot, 0.0);
        let k = rb_constants(&i, 1.0, 0.45).unwrap();
        assert_eq!((k.n_star, k.m), (0.0, 0.0));
        assert!((rb_mu(2.0, &k, &i).unwrap() - 2.0).abs() < 1e-13);
        assert!((rb_mu_legendre(2.0, &k, &i).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn constants_regimes() {
        let k = rb_constants(&body(), 1.0, 0.5 / 3.0).unwrap();
        assert!(k.m.abs() < 1e-15);
        let k = mid();
        assert!(k.m > 0.0 && k.m < 1.0);
        assert!(rb_constants(&body(), 1.0, 0.3).is_err());
        assert!(rb_constants(&body(), 1.0, 0.25).is_err());
        let start = rb_solution(0.0, &k).unwrap();
        assert_eq!((start.sin_nu, start.cos_nu, start.big_n), (1.0, 0.0, k.r));
        assert!((rb_hamiltonian(&k.initial_state(), &body()) - k.h).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_integration() {
        let i = body();
        let k = mid();
        let period = k.period().unwrap();
        let traj = rb_integrate(&k.initial_state(), &i, period).unwrap();
        for j in 0..=60 {
            let t = period * j as f64 / 60.0;
            let w = rb_solution(t, &k).unwrap();
            let y = traj.eval(t).unwrap();
            assert!((w.sin_nu - y.nu.sin()).abs() < 1e-9 && (w.cos_nu - y.nu.cos()).abs() < 1e-9);
            assert!((w.big_n - y.big_n).abs() < 1e-9);
            assert!((rb_mu(t, &k, &i).unwrap() - y.mu).abs() < 1e-9);
            assert!((rb_mu_legendre(t, &k, &i).unwrap() - y.mu).abs() < 1e-9, "t={t}");
            assert!((rb_hamiltonian(&y, &i) - k.h).abs() < 1e-12);
        }
    }

    #[test]
    fn mahler_form() {
        let i = body();
        let k = mid();
        let f = rb_mahler_form(&k, &i).unwrap();
        for a in f.amplitudes[..2].iter() {
            assert!((a - 1.0).abs() < 1e-14);
        }
        assert!((f.amplitudes[2] - k.r).abs() < 1e-15);
        for j in 0..30 {
            let t = 0.37 * j as f64;
            let a = f.eval(t).unwrap();
            let b = rb_solution(t, &k).unwrap();
            assert!((a.sin_nu - b.sin_nu).abs() < 1e-12 && (a.cos_nu - b.cos_nu).abs() < 1e-12);
            assert!((a.big_n - b.big_n).abs() < 1e-12);
        }
    }

    #[test]
    fn separated_form() {
        let i = body();
        let k = mid();
        let alt = rb_alt_constants(&i, k.big_m, k.h).unwrap();
        let traj = rb_integrate(&k.initial_state(), &i, 10.0).unwrap();
        for j in 0..30 {
            let t = 10.0 * j as f64 / 29.0;
            let y = traj.eval(t).unwrap();
            let r = rb_rhs(&y, &i);
            assert!((alt.rate(k.big_m, y.nu) - r.nu_dot.abs()).abs() < 1e-10);
            let nu = alt.nu(t, k.big_m, FRAC_PI_2, -1.0).unwrap();
            assert!((nu - y.nu).abs() < 1e-9, "t={t}");
        }
        let sym = InertiaParams::new(1.0, 1.0, 1.5).unwrap();
        let alt = rb_alt_constants(&sym, 1.0, 0.4).unwrap();
        assert_eq!((alt.n1, alt.m1), (0.0, 0.0));
        assert!(rb_alt_constants(&InertiaParams::new(1.0, 2.0, 2.0).unwrap(), 1.0, 0.3).is_err());
    }
}
