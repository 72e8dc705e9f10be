//! Parameter pairs where `sng` reduces to elementary or Jacobi functions.

use super::{Mahler4Values, MahlerParams4};
use crate::elliptic::{sncndn, transform_negative};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticularCase {
    /// `n = 0`: Jacobi functions of parameter `m`, `fng ≡ 1`.
    NZero,
    /// `m = 0`: Jacobi functions of the negative parameter `n`, `dng ≡ 1`.
    MZero,
    /// `m = 1`: inversion of a logarithm.
    MOne,
    /// `m = n`: trigonometric form.
    MEqualN,
    /// `m = n = 1`: algebraic form.
    MnOne,
    /// `m = n = 0`: circular functions.
    MnZero,
}

impl ParticularCase {
    pub fn detect(p: &MahlerParams4) -> Option<Self> {
        let (m, n) = (p.m(), p.n());
        if m == 0.0 && n == 0.0 {
            Some(ParticularCase::MnZero)
        } else if m == 1.0 && n == 1.0 {
            Some(ParticularCase::MnOne)
        } else if m == 1.0 {
            Some(ParticularCase::MOne)
        } else if m == n {
            Some(ParticularCase::MEqualN)
        } else if n == 0.0 {
            Some(ParticularCase::NZero)
        } else if m == 0.0 {
            Some(ParticularCase::MZero)
        } else {
            None
        }
    }

    fn admits(self, p: &MahlerParams4) -> bool {
        let (m, n) = (p.m(), p.n());
        match self {
            ParticularCase::NZero => n == 0.0,
            ParticularCase::MZero => m == 0.0,
            ParticularCase::MOne => m == 1.0 && n < 1.0,
            ParticularCase::MEqualN => m == n && m < 1.0,
            ParticularCase::MnOne => m == 1.0 && n == 1.0,
            ParticularCase::MnZero => m == 0.0 && n == 0.0,
        }
    }
}

/// Closed form of one particular case.
pub fn particular_case(v: f64, case: ParticularCase, p: &MahlerParams4) -> Result<Mahler4Values> {
    if !case.admits(p) {
        return Err(Error::domain(format!("parameters (m, n) = ({}, {}) do not fit case {case:?}", p.m(), p.n())));
    }
    let (m, n) = (p.m(), p.n());
    match case {
        ParticularCase::NZero => {
            let t = sncndn(v, m)?;
            Ok(Mahler4Values { sng: t.sn, cng: t.cn, dng: t.dn, fng: 1.0 })
        }
        ParticularCase::MZero => {
            let t = if n == 0.0 { sncndn(v, 0.0)? } else { transform_negative(-n)?.apply(v)? };
            Ok(Mahler4Values { sng: t.sn, cng: t.cn, dng: 1.0, fng: t.dn })
        }
        ParticularCase::MOne => m_one(v, n),
        ParticularCase::MEqualN => {
            let root = (1.0 - m).sqrt();
            let (s, c) = (root * v).sin_cos();
            let den = (1.0 - m * c * c).sqrt();
            let dn = root / den;
            Ok(Mahler4Values { sng: s / den, cng: root * c / den, dng: dn, fng: dn })
        }
        ParticularCase::MnOne => {
            let r = (1.0 + v * v).sqrt();
            Ok(Mahler4Values { sng: v / r, cng: 1.0 / r, dng: 1.0 / r, fng: 1.0 / r })
        }
        ParticularCase::MnZero => {
            let (s, c) = v.sin_cos();
            Ok(Mahler4Values { sng: s, cng: c, dng: 1.0, fng: 1.0 })
        }
    }
}

/// The `m = n` inversion `x = tan(√(1−m) v) / √(1 − m + tan²(√(1−m) v))`,
/// valid while `√(1−m) |v| < π/2`.
pub fn m_eq_n_tangent(v: f64, m: f64) -> Result<f64> {
    if !(m < 1.0) {
        return Err(Error::domain("the m = n formula needs m < 1"));
    }
    let theta = (1.0 - m).sqrt() * v;
    if theta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::domain("the tangent form holds only inside the first quarter period"));
    }
    let t = theta.tan();
    Ok(t / (1.0 - m + t * t).sqrt())
}

/// `m = 1`: with `x = tanh θ` the logarithmic quadrature reads
/// `θ + ½ ln((1 − n x + r)/(1 + n x + r)) = √(1−n) v`, `r = √((1−n)(1−n x²))`.
fn m_one(v: f64, n: f64) -> Result<Mahler4Values> {
    let a = (1.0 - n).sqrt();
    let h = |theta: f64| {
        let x = theta.tanh();
        let r = ((1.0 - n) * (1.0 - n * x * x)).sqrt();
        theta + 0.5 * ((1.0 - n * x + r) / (1.0 + n * x + r)).ln() - a * v
    };
    let slope = |theta: f64| {
        let x = theta.tanh();
        a / (1.0 - n * x * x).sqrt()
    };
    // h is increasing; bracket the root around a·v.
    let target = a * v;
    let mut step = 2.0;
    let (mut lo, mut hi) = (target - step, target + step);
    while h(lo) > 0.0 {
        step *= 2.0;
        lo = target - step;
    }
    while h(hi) < 0.0 {
        step *= 2.0;
        hi = target + step;
    }
    let mut theta = target.clamp(lo, hi);
    let mut converged = false;
    for _ in 0..200 {
        let val = h(theta);
        if val == 0.0 {
            converged = true;
            break;
        }
        if val > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
        let mut next = theta - val / slope(theta);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - theta).abs() <= 4.0 * f64::EPSILON * (1.0 + theta.abs()) {
            theta = next;
            converged = true;
            break;
        }
        theta = next;
    }
    if !converged {
        return Err(Error::NoConvergence("inversion of the m = 1 quadrature"));
    }
    let x = theta.tanh();
    let sech = 1.0 / theta.cosh();
    Ok(Mahler4Values { sng: x, cng: sech, dng: sech, fng: (sech * sech + (1.0 - n) * x * x).sqrt() })
}
