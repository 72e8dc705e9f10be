//! The quadrature `G(v*) = ∫₀^{v*} dθ / √∏(1 − β sin²θ)` and its inverse,
//! the generalized amplitude.

use std::f64::consts::{FRAC_PI_2, PI};

use super::MahlerParams4;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};

const MAX_NEWTON: usize = 100;

/// Quadrature kernel and inverse for a list of parameters `β`.
#[derive(Debug, Clone)]
pub(crate) struct Amplitude {
    betas: Vec<f64>,
    /// `G(π/2)`; infinite when some `β = 1`.
    quarter: f64,
    cfg: QuadConfig,
}

impl Amplitude {
    pub(crate) fn new(betas: &[f64]) -> Result<Self> {
        if betas.iter().any(|b| !b.is_finite() || *b > 1.0) {
            return Err(Error::domain(format!("amplitude kernel needs every parameter <= 1, got {betas:?}")));
        }
        let mut amp = Amplitude { betas: betas.to_vec(), quarter: f64::INFINITY, cfg: QuadConfig::default() };
        if betas.iter().all(|b| *b < 1.0) {
            amp.quarter = amp.raw(0.0, FRAC_PI_2)?;
        }
        Ok(amp)
    }

    pub(crate) fn quarter(&self) -> f64 {
        self.quarter
    }

    /// `√∏(1 − β sin²θ)`, the derivative of the amplitude.
    pub(crate) fn radical(&self, theta: f64) -> f64 {
        let s2 = theta.sin().powi(2);
        self.betas.iter().map(|b| 1.0 - b * s2).product::<f64>().sqrt()
    }

    fn raw(&self, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        Ok(integrate(|t| 1.0 / self.radical(t), a, b, &self.cfg)?.value)
    }

    /// `G(φ)`, using `G(φ + kπ) = G(φ) + 2k G(π/2)`.
    pub(crate) fn integral(&self, phi: f64) -> Result<f64> {
        if !phi.is_finite() {
            return Err(Error::domain("amplitude must be finite"));
        }
        let turns = (phi / PI).round();
        let r = phi - turns * PI;
        if turns != 0.0 && self.quarter.is_infinite() {
            return Err(Error::domain("quadrature diverges at π/2 when a parameter equals 1"));
        }
        let base = if turns == 0.0 { 0.0 } else { 2.0 * turns * self.quarter };
        Ok(base + self.raw(0.0, r)?)
    }

    /// The amplitude `φ` with `G(φ) = v`, continuous and unwrapped.
    pub(crate) fn invert(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::domain("argument must be finite"));
        }
        let (turns, r) = if self.quarter.is_finite() {
            let turns = (v / (2.0 * self.quarter)).round();
            (turns, v - 2.0 * self.quarter * turns)
        } else {
            (0.0, v)
        };
        Ok(turns * PI + self.invert_reduced(r)?)
    }

    fn invert_reduced(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
        let mut phi = if self.quarter.is_finite() { r * FRAC_PI_2 / self.quarter } else { r.atan() };
        phi = phi.clamp(lo, hi);
        for _ in 0..MAX_NEWTON {
            let defect = self.raw(0.0, phi)? - r;
            if defect == 0.0 {
                return Ok(phi);
            }
            if defect > 0.0 {
                hi = hi.min(phi);
            } else {
                lo = lo.max(phi);
            }
            let mut next = phi - defect * self.radical(phi);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - phi).abs() <= 1e-16 * (1.0 + phi.abs()) {
                return Ok(next);
            }
            phi = next;
        }
        Err(Error::NoConvergence("generalized amplitude inversion"))
    }
}

/// `G(v*, n, m)` by adaptive quadrature.
pub fn g_quadrature(vstar: f64, p: &MahlerParams4) -> Result<f64> {
    Amplitude::new(&[p.n(), p.m()])?.integral(vstar)
}

/// The double series for `G(π/2, n, m)` through fourth order in each of
/// `m` and `n`. Accurate for small parameters only.
pub fn g_period_series(p: &MahlerParams4) -> f64 {
    let (m, n) = (p.m(), p.n());
    let rows: [(f64, [f64; 5]); 5] = [
        (1.0, [1.0, 1.0 / 4.0, 9.0 / 64.0, 25.0 / 256.0, 1225.0 / 16384.0]),
        (1.0 / 4.0, [1.0, 3.0 / 8.0, 15.0 / 64.0, 175.0 / 1024.0, 2205.0 / 16384.0]),
        (9.0 / 64.0, [1.0, 5.0 / 12.0, 35.0 / 128.0, 105.0 / 512.0, 2695.0 / 16384.0]),
        (25.0 / 256.0, [1.0, 7.0 / 16.0, 189.0 / 640.0, 231.0 / 1024.0, 3003.0 / 16384.0]),
        (1225.0 / 16384.0, [1.0, 9.0 / 20.0, 99.0 / 320.0, 429.0 / 1792.0, 6435.0 / 32768.0]),
    ];
    let mut total = 0.0;
    let mut n_pow = 1.0;
    for (lead, row) in rows {
        let inner = row.iter().rev().fold(0.0, |acc, c| acc * m + c);
        total += lead * n_pow * inner;
        n_pow *= n;
    }
    FRAC_PI_2 * total
}

/// Generalized amplitude `amg(v; n, m)`, the inverse of `G`.
pub fn amg(v: f64, p: &MahlerParams4) -> Result<f64> {
    Amg::new(p)?.eval(v)
}

/// Reusable `amg` evaluator holding the quarter period.
#[derive(Debug, Clone)]
pub struct Amg {
    kernel: Amplitude,
}

impl Amg {
    pub fn new(p: &MahlerParams4) -> Result<Self> {
        Ok(Amg { kernel: Amplitude::new(&[p.n(), p.m()])? })
    }

    /// `G(π/2, n, m)`.
    pub fn quarter_period(&self) -> f64 {
        self.kernel.quarter()
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        self.kernel.invert(v)
    }

    pub fn g(&self, vstar: f64) -> Result<f64> {
        self.kernel.integral(vstar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::am;
    use crate::mahler4::mahler4_closed;

    #[test]
    fn g_basics() {
        let p = MahlerParams4::new(0.0, 0.0).unwrap();
        assert!((g_quadrature(FRAC_PI_2, &p).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(g_quadrature(0.0, &MahlerParams4::new(0.8, 0.1).unwrap()).unwrap(), 0.0);
        assert_eq!(g_period_series(&p), FRAC_PI_2);
    }

    #[test]
    fn series_against_quadrature() {
        let p = MahlerParams4::new(0.05, 0.02).unwrap();
        let g = g_quadrature(FRAC_PI_2, &p).unwrap();
        assert!((g_period_series(&p) - g).abs() < 1e-6 * g);
        let p = MahlerParams4::new(0.1, 0.0).unwrap();
        let m: f64 = 0.1;
        let lead = FRAC_PI_2 * (1.0 + m / 4.0 + 9.0 * m * m / 64.0);
        assert!((g_period_series(&p) - lead).abs() < 1e-3);
    }

    #[test]
    fn amg_basics() {
        let p = MahlerParams4::new(0.8, 0.1).unwrap();
        assert_eq!(amg(0.0, &p).unwrap(), 0.0);
        let q = MahlerParams4::new(0.7, 0.0).unwrap();
        for v in [0.3, 1.7, 5.2, -3.3] {
            assert!((amg(v, &q).unwrap() - am(v, 0.7).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn amg_unwraps() {
        let p = MahlerParams4::new(0.8, 0.1).unwrap();
        let a = Amg::new(&p).unwrap();
        let big = 2.0 * a.quarter_period();
        assert!((a.eval(0.4 + big).unwrap() - a.eval(0.4).unwrap() - PI).abs() < 1e-13);
        for v in [0.5, 3.0, 11.0] {
            let phi = a.eval(v).unwrap();
            assert!((a.g(phi).unwrap() - v).abs() < 1e-13);
            let w = mahler4_closed(v, &p).unwrap();
            assert!((phi.sin() - w.sng).abs() < 1e-12 && (phi.cos() - w.cng).abs() < 1e-12);
        }
    }

    #[test]
    fn amg_with_unit_parameter() {
        let p = MahlerParams4::new(1.0, 0.3).unwrap();
        let a = Amg::new(&p).unwrap();
        assert!(a.quarter_period().is_infinite());
        let phi = a.eval(2.0).unwrap();
        assert!(phi < FRAC_PI_2);
        assert!((a.g(phi).unwrap() - 2.0).abs() < 1e-12);
    }
}
