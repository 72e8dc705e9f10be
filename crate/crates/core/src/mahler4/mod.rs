//! The biparametric Mahler functions `sng, cng, dng, fng`.
//!
//! They solve the 4-EES with `α = (1, −1, −m, −n)` and `ω(0) = (0, 1, 1, 1)`.
//! Three independent evaluation paths are provided: the closed form in
//! Jacobi functions of parameter `m₁`, the argument halving / Maclaurin /
//! doubling scheme, and dense numerical integration.

mod algebra;
mod amplitude;
mod series;
mod special;
mod theta;

pub use algebra::{addition, addition_values, double_arg, double_values, half_arg, half_values, Sign};
pub(crate) use amplitude::Amplitude;
pub use amplitude::{amg, g_period_series, g_quadrature, Amg};
pub use series::{mahler4_direct, mahler4_direct_report, mahler4_taylor, series_radius, TaylorSeries};
pub use special::{m_eq_n_tangent, particular_case, ParticularCase};
pub use theta::{
    fit3_constants, ratios_jacobi_fixture, theta_similar, Fit3Constants, RatiosJacobiSystem, ThetaSimilarValues,
};

use crate::ees::{EesParams, Trajectory};
use crate::elliptic::{sncndn_any, JacobiTriple};
use crate::error::{Error, Result};
use crate::ode::{integrate, IntegratorConfig};

/// The pair `(m, n)`, accepted for `n <= m <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MahlerParams4 {
    m: f64,
    n: f64,
}

impl MahlerParams4 {
    pub fn new(m: f64, n: f64) -> Result<Self> {
        if !m.is_finite() || !n.is_finite() {
            return Err(Error::domain("Mahler parameters must be finite"));
        }
        if m > 1.0 {
            return Err(Error::domain(format!("Mahler parameters need m <= 1, got m = {m}")));
        }
        if n > m {
            return Err(Error::domain(format!("Mahler parameters need n <= m, got m = {m}, n = {n}")));
        }
        Ok(MahlerParams4 { m, n })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// The defining 4-EES.
    pub fn system(&self) -> EesParams {
        EesParams::mahler4(self.m, self.n).expect("finite parameters")
    }

    /// `m = 1` or `m = n`: a closed form in elementary functions exists.
    pub fn is_particular(&self) -> bool {
        ParticularCase::detect(self).is_some()
    }
}

/// `a, A, n₁, m₁` of the Jacobi closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop5Constants {
    pub a: f64,
    pub big_a: f64,
    pub n1: f64,
    pub m1: f64,
}

pub fn prop5_constants(p: &MahlerParams4) -> Result<Prop5Constants> {
    let n = p.n;
    if !(n < 1.0) {
        return Err(Error::domain(format!("closed-form constants need n < 1, got n = {n}")));
    }
    let a = (1.0 - n).sqrt();
    Ok(Prop5Constants { a, big_a: 1.0 / a, n1: n / (n - 1.0), m1: (n - p.m) / (n - 1.0) })
}

/// Constants of the closed form for the initial condition
/// `(0, ω₂⁰, ω₃⁰, ω₄⁰)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralIvpConstants {
    pub a: f64,
    pub big_a: f64,
    pub n1: f64,
    pub m1: f64,
    pub ic: [f64; 3],
}

pub fn general_ivp_constants(ic: [f64; 4], p: &MahlerParams4) -> Result<GeneralIvpConstants> {
    let [w1, w2, w3, w4] = ic;
    if w1 != 0.0 {
        return Err(Error::domain("closed form needs ω₁(0) = 0"));
    }
    if w2 == 0.0 || w3 == 0.0 || w4 == 0.0 {
        return Err(Error::domain("closed form needs ω₂(0), ω₃(0), ω₄(0) nonzero"));
    }
    let (m, n) = (p.m, p.n);
    let rad = w4 * w4 - n * w2 * w2;
    if !(rad > 0.0) {
        return Err(Error::NonPositiveRadicand("ω₄(0)² − n ω₂(0)²"));
    }
    let root = rad.sqrt();
    Ok(GeneralIvpConstants {
        a: w3 * root,
        big_a: w2 * w4 / root,
        n1: n * w2 * w2 / (n * w2 * w2 - w4 * w4),
        m1: w2 * w2 * (n * w3 * w3 - m * w4 * w4) / (w3 * w3 * (n * w2 * w2 - w4 * w4)),
        ic: [w2, w3, w4],
    })
}

impl GeneralIvpConstants {
    /// The state `ω(v)` of the Mahler system started at this initial
    /// condition.
    pub fn evaluate(&self, v: f64) -> Result<[f64; 4]> {
        let t = sncndn_any(self.a * v, self.m1)?;
        let den = 1.0 - self.n1 * t.sn * t.sn;
        if !(den > 0.0) {
            return Err(Error::VanishingDenominator("1 − n₁ sn²"));
        }
        let r = 1.0 / den.sqrt();
        Ok([self.big_a * t.sn * r, self.ic[0] * t.cn * r, self.ic[1] * t.dn * r, self.ic[2] * r])
    }
}

/// `(sng, cng, dng, fng)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mahler4Values {
    pub sng: f64,
    pub cng: f64,
    pub dng: f64,
    pub fng: f64,
}

impl Mahler4Values {
    pub const ORIGIN: Mahler4Values = Mahler4Values { sng: 0.0, cng: 1.0, dng: 1.0, fng: 1.0 };

    pub fn as_array(&self) -> [f64; 4] {
        [self.sng, self.cng, self.dng, self.fng]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Mahler4Values { sng: y[0], cng: y[1], dng: y[2], fng: y[3] }
    }

    /// Largest defect of the three quadratic identities.
    pub fn identity_defect(&self, p: &MahlerParams4) -> f64 {
        let s2 = self.sng * self.sng;
        let a = (self.cng * self.cng + s2 - 1.0).abs();
        let b = (self.dng * self.dng + p.m * s2 - 1.0).abs();
        let c = (self.fng * self.fng + p.n * s2 - 1.0).abs();
        a.max(b).max(c)
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &Mahler4Values) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Closed form through Jacobi functions of parameter `m₁` at `a v`.
pub fn mahler4_closed(v: f64, p: &MahlerParams4) -> Result<Mahler4Values> {
    let c = prop5_constants(p)?;
    let t = sncndn_any(c.a * v, c.m1)?;
    let den = 1.0 - c.n1 * t.sn * t.sn;
    if !(den > 0.0) {
        return Err(Error::VanishingDenominator("1 − n₁ sn²"));
    }
    let r = 1.0 / den.sqrt();
    Ok(Mahler4Values { sng: c.big_a * t.sn * r, cng: t.cn * r, dng: t.dn * r, fng: r })
}

/// Jacobi functions at `(a v, m₁)` recovered from Mahler values.
pub fn jacobi_from_mahler(v: f64, p: &MahlerParams4) -> Result<JacobiTriple> {
    let c = prop5_constants(p)?;
    let w = mahler4_direct(v, p)?;
    if w.fng == 0.0 {
        return Err(Error::VanishingDenominator("fng"));
    }
    Ok(JacobiTriple { sn: w.sng / (c.big_a * w.fng), cn: w.cng / w.fng, dn: w.dng / w.fng, u: c.a * v, m: c.m1 })
}

/// Dense numerical solution of the Mahler system on `[start, end]`.
pub fn mahler4_trajectory(p: &MahlerParams4, start: f64, end: f64) -> Result<Trajectory> {
    integrate(&p.system(), &IntegratorConfig::new(start, end))
}

/// Quarter period of `sng`, `K(m₁) / a`, for `n < 1`, `m < 1`.
pub fn quarter_period(p: &MahlerParams4) -> Result<f64> {
    let c = prop5_constants(p)?;
    Ok(crate::elliptic::complete_k(c.m1)? / c.a)
}
