//! Jacobi elliptic functions with parameter `m = k²`.
//!
//! `K(m)` comes from the arithmetic-geometric mean and the amplitude from
//! the descending Landen (AGM) recurrence; `sn`, `cn`, `dn` are read off
//! the amplitude. Negative parameters go through the imaginary-modulus
//! transformation, `m > 1` through the reciprocal-parameter transformation.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::ees::EesParams;
use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 64;

/// `sn`, `cn`, `dn` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    pub u: f64,
    pub m: f64,
}

impl JacobiTriple {
    /// Larger defect of `sn² + cn² = 1` and `dn² + m sn² = 1`.
    pub fn identity_defect(&self) -> f64 {
        let a = (self.sn * self.sn + self.cn * self.cn - 1.0).abs();
        let b = (self.dn * self.dn + self.m * self.sn * self.sn - 1.0).abs();
        a.max(b)
    }
}

/// Complete elliptic integral of the first kind.
pub fn complete_k(m: f64) -> Result<f64> {
    if !(m < 1.0) {
        return Err(Error::domain(format!("K(m) needs m < 1, got m = {m}")));
    }
    if m < 0.0 {
        let t = transform_negative(-m)?;
        return Ok(t.mu1.sqrt() * agm_k(t.mu));
    }
    Ok(agm_k(m))
}

fn agm_k(m: f64) -> f64 {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    PI / (a + b)
}

/// Jacobi amplitude, continuous in `u`: `am(u + 2K) = am(u) + π`.
pub fn am(u: f64, m: f64) -> Result<f64> {
    if !u.is_finite() || !m.is_finite() {
        return Err(Error::domain("am needs finite arguments"));
    }
    if m > 1.0 {
        return Err(Error::domain(format!("am needs m <= 1, got m = {m}")));
    }
    if m == 1.0 {
        return Ok(u.sinh().atan());
    }
    if m < 0.0 {
        let t = transform_negative(-m)?;
        let phi = am_principal(u / t.mu1.sqrt(), t.mu);
        // tan ψ = √μ₁ tan φ, with ψ on the same branch as φ.
        let c = t.mu1.sqrt();
        let (s, co) = phi.sin_cos();
        return Ok(phi + ((c - 1.0) * s * co / (co * co + c * s * s)).atan());
    }
    Ok(am_principal(u, m))
}

fn am_principal(u: f64, m: f64) -> f64 {
    if m == 0.0 {
        return u;
    }
    let k = agm_k(m);
    let turns = (u / (2.0 * k)).round();
    let r = u - 2.0 * k * turns;
    turns * PI + am_reduced(r, m)
}

fn am_reduced(u: f64, m: f64) -> f64 {
    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > 1e-17 * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    phi
}

/// `sn`, `cn`, `dn` for any `m <= 1`.
pub fn sncndn(u: f64, m: f64) -> Result<JacobiTriple> {
    if m > 1.0 {
        return Err(Error::domain(format!("sncndn needs m <= 1, got m = {m}; use transform_reciprocal")));
    }
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple { sn: u.tanh(), cn: sech, dn: sech, u, m });
    }
    let phi = am(u, m)?;
    let (sn, cn) = phi.sin_cos();
    // 1 − m sn² written as a sum of non-negative terms.
    let dn = (cn * cn + (1.0 - m) * sn * sn).sqrt();
    Ok(JacobiTriple { sn, cn, dn, u, m })
}

/// `sn`, `cn`, `dn` for any real `m`, routing `m > 1` through the
/// reciprocal-parameter transformation.
pub fn sncndn_any(u: f64, m: f64) -> Result<JacobiTriple> {
    if m > 1.0 {
        transform_reciprocal(u, m)
    } else {
        sncndn(u, m)
    }
}

/// Imaginary-modulus map: functions of parameter `−m` from parameter `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeParamMap {
    /// The positive input `m`.
    pub m: f64,
    /// `m / (1 + m)`.
    pub mu: f64,
    /// `1 / (1 + m)`.
    pub mu1: f64,
    /// Argument scale: `v = u · arg_scale = u / √μ₁`.
    pub arg_scale: f64,
}

impl NegativeParamMap {
    /// `sn, cn, dn` at `(u, −m)` through the value maps.
    pub fn apply(&self, u: f64) -> Result<JacobiTriple> {
        let t = sncndn(u * self.arg_scale, self.mu)?;
        Ok(JacobiTriple { sn: self.mu1.sqrt() * t.sn / t.dn, cn: t.cn / t.dn, dn: 1.0 / t.dn, u, m: -self.m })
    }
}

pub fn transform_negative(m: f64) -> Result<NegativeParamMap> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("negative-parameter map needs m >= 0, got m = {m}")));
    }
    let mu1 = 1.0 / (1.0 + m);
    Ok(NegativeParamMap { m, mu: m / (1.0 + m), mu1, arg_scale: (1.0 + m).sqrt() })
}

/// `sn, cn, dn` at `(u, m)` with `m >= 1` from parameter `1/m`.
pub fn transform_reciprocal(u: f64, m: f64) -> Result<JacobiTriple> {
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::domain(format!("reciprocal-parameter map needs m >= 1, got m = {m}")));
    }
    let k = m.sqrt();
    let t = sncndn(k * u, 1.0 / m)?;
    Ok(JacobiTriple { sn: t.sn / k, cn: t.dn, dn: t.cn, u, m })
}

/// One descending Landen step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandenStep {
    /// `((1 − √(1−m)) / (1 + √(1−m)))²`.
    pub mu: f64,
    /// `u / (1 + √μ)`.
    pub v: f64,
    /// Values at `(u, m)` from values at `(v, μ)`.
    pub values: JacobiTriple,
    /// `dn(u; m)` from the double-argument variant at `(2v, μ)`.
    pub dn_double: f64,
}

pub fn landen_descend(u: f64, m: f64) -> Result<LandenStep> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::domain(format!("Landen descent needs 0 <= m < 1, got m = {m}")));
    }
    let kp = (1.0 - m).sqrt();
    // (1 − k')/(1 + k') = m / (1 + k')², free of cancellation.
    let root_mu = m / ((1.0 + kp) * (1.0 + kp));
    let mu = root_mu * root_mu;
    let v = u / (1.0 + root_mu);
    let t = sncndn(v, mu)?;
    let den = 1.0 + root_mu * t.sn * t.sn;
    let values = JacobiTriple {
        sn: (1.0 + root_mu) * t.sn / den,
        cn: t.cn * t.dn / den,
        dn: (1.0 - root_mu * t.sn * t.sn) / den,
        u,
        m,
    };
    let t2 = sncndn(2.0 * v, mu)?;
    let dn_double = (root_mu * t2.cn + t2.dn) / (1.0 + root_mu);
    Ok(LandenStep { mu, v, values, dn_double })
}

/// Values at `u + w` by the addition theorem.
pub fn jacobi_add(u: f64, w: f64, m: f64) -> Result<JacobiTriple> {
    let a = sncndn(u, m)?;
    let b = sncndn(w, m)?;
    jacobi_add_values(&a, &b)
}

/// Addition theorem on precomputed triples of the same parameter.
pub fn jacobi_add_values(a: &JacobiTriple, b: &JacobiTriple) -> Result<JacobiTriple> {
    let m = a.m;
    let den = 1.0 - m * a.sn * a.sn * b.sn * b.sn;
    if den.abs() < 1e-300 {
        return Err(Error::VanishingDenominator("Jacobi addition"));
    }
    Ok(JacobiTriple {
        sn: (a.sn * b.cn * b.dn + b.sn * a.cn * a.dn) / den,
        cn: (a.cn * b.cn - a.sn * b.sn * a.dn * b.dn) / den,
        dn: (a.dn * b.dn - m * a.sn * b.sn * a.cn * b.cn) / den,
        u: a.u + b.u,
        m,
    })
}

/// The Jacobi system `α = (1, −1, −m)`, `ω(0) = (0, 1, 1)`, solved by
/// `(sn, cn, dn)`.
pub fn jacobi_system(m: f64) -> EesParams {
    EesParams::new(vec![1.0, -1.0, -m], vec![0.0, 1.0, 1.0]).expect("finite parameter")
}

/// The four 3-EES satisfied by ratios of theta functions, in the rescaled
/// variable `dτ = √(2K/π) dv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaRatioTag {
    /// `θ_j/θ_4`, j = 1, 2, 3.
    Bounded1,
    /// `θ_j/θ_3`, j = 1, 2, 4.
    Bounded2,
    /// `θ_j/θ_2`, j = 1, 3, 4.
    Unbounded1,
    /// `θ_j/θ_1`, j = 2, 3, 4.
    Unbounded2,
}

impl ThetaRatioTag {
    pub const ALL: [ThetaRatioTag; 4] =
        [ThetaRatioTag::Bounded1, ThetaRatioTag::Bounded2, ThetaRatioTag::Unbounded1, ThetaRatioTag::Unbounded2];

    pub fn is_bounded(self) -> bool {
        matches!(self, ThetaRatioTag::Bounded1 | ThetaRatioTag::Bounded2)
    }
}

impl FromStr for ThetaRatioTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded-1" => Ok(ThetaRatioTag::Bounded1),
            "bounded-2" => Ok(ThetaRatioTag::Bounded2),
            "unbounded-1" => Ok(ThetaRatioTag::Unbounded1),
            "unbounded-2" => Ok(ThetaRatioTag::Unbounded2),
            other => Err(Error::domain(format!(
                "unknown theta-ratio system '{other}' (expected bounded-1, bounded-2, unbounded-1, unbounded-2)"
            ))),
        }
    }
}

/// Coefficients and initial condition of a theta-ratio system at modulus `k`.
pub fn theta_ratio_fixture(tag: ThetaRatioTag, k: f64) -> Result<EesParams> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::domain(format!("theta-ratio systems need 0 < k < 1, got k = {k}")));
    }
    let kp = (1.0 - k * k).sqrt();
    let (alphas, ic) = match tag {
        ThetaRatioTag::Bounded1 => (vec![kp, -1.0, -k], vec![0.0, (k / kp).sqrt(), 1.0 / kp.sqrt()]),
        ThetaRatioTag::Bounded2 => (vec![1.0, -kp, k], vec![0.0, k.sqrt(), kp.sqrt()]),
        ThetaRatioTag::Unbounded1 => (vec![k, kp, 1.0], vec![0.0, 1.0 / k.sqrt(), (kp / k).sqrt()]),
        ThetaRatioTag::Unbounded2 => {
            let r = ((kp + 1.0) / k).sqrt();
            (vec![-k, -1.0, -kp], vec![1.0, r, r])
        }
    };
    EesParams::new(alphas, ic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, IntegratorConfig};
    use crate::quad::quad;
    use std::f64::consts::FRAC_PI_2;

    fn k_quad(m: f64) -> f64 {
        quad(|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2).unwrap()
    }

    #[test]
    fn k_values() {
        assert_eq!(complete_k(0.0).unwrap(), FRAC_PI_2);
        for m in [0.1, 0.5, 0.9, 0.999, -0.5, -3.0] {
            let k = complete_k(m).unwrap();
            assert!((k - k_quad(m)).abs() < 1e-14 * k, "m={m}");
        }
        assert!(complete_k(1.0).is_err());
    }

    #[test]
    fn k_negative_parameter_identity() {
        let m: f64 = 0.75;
        let lhs = complete_k(-m).unwrap();
        let rhs = complete_k(m / (1.0 + m)).unwrap() / (1.0 + m).sqrt();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn am_basic() {
        assert_eq!(am(1.234, 0.0).unwrap(), 1.234);
        for m in [0.1, 0.5, 0.99] {
            let k = complete_k(m).unwrap();
            assert!((am(k, m).unwrap() - FRAC_PI_2).abs() < 1e-14);
            assert!((am(2.0 * k + 0.3, m).unwrap() - am(0.3, m).unwrap() - PI).abs() < 1e-13);
            assert_eq!(am(-0.7, m).unwrap(), -am(0.7, m).unwrap());
        }
    }

    #[test]
    fn am_inverts_quadrature() {
        let m = 0.7;
        let phi = am(1.0, m).unwrap();
        let u = quad(|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, phi).unwrap();
        assert!((u - 1.0).abs() < 1e-14);
        // Negative parameter through the same quadrature.
        let phi = am(2.5, -1.5).unwrap();
        let u = quad(|t: f64| 1.0 / (1.0 + 1.5 * t.sin().powi(2)).sqrt(), 0.0, phi).unwrap();
        assert!((u - 2.5).abs() < 1e-13);
    }

    #[test]
    fn sncndn_special_values() {
        let t = sncndn(0.0, 0.5).unwrap();
        assert_eq!((t.sn, t.cn, t.dn), (0.0, 1.0, 1.0));
        let t = sncndn(0.9, 0.0).unwrap();
        assert_eq!((t.sn, t.cn, t.dn), (0.9f64.sin(), 0.9f64.cos(), 1.0));
        assert!(sncndn(0.1, 1.5).is_err());
    }

    #[test]
    fn sncndn_matches_ode() {
        let (u, m) = (0.8, 0.81);
        let traj = integrate(&jacobi_system(m), &IntegratorConfig::new(0.0, 1.0)).unwrap();
        let y = traj.eval(u).unwrap();
        let t = sncndn(u, m).unwrap();
        assert!((t.sn - y[0]).abs() < 1e-11);
        assert!((t.cn - y[1]).abs() < 1e-11);
        assert!((t.dn - y[2]).abs() < 1e-11);
    }

    #[test]
    fn periodicity() {
        for m in [0.2, 0.7, 0.95] {
            let k = complete_k(m).unwrap();
            for u in [0.1, 1.3, -2.2] {
                let a = sncndn(u, m).unwrap();
                let b = sncndn(u + 4.0 * k, m).unwrap();
                let c = sncndn(u + 2.0 * k, m).unwrap();
                assert!((a.sn - b.sn).abs() < 1e-12 && (a.cn - b.cn).abs() < 1e-12);
                assert!((a.dn - c.dn).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn negative_map_identity_and_ode() {
        let t = transform_negative(0.0).unwrap();
        assert_eq!((t.mu, t.mu1, t.arg_scale), (0.0, 1.0, 1.0));
        let t = transform_negative(1.0).unwrap();
        assert_eq!((t.mu, t.mu1), (0.5, 0.5));

        let m = 1.3;
        let map = transform_negative(m).unwrap();
        let sys = EesParams::new(vec![1.0, -1.0, m], vec![0.0, 1.0, 1.0]).unwrap();
        let traj = integrate(&sys, &IntegratorConfig::new(0.0, 4.0)).unwrap();
        for k in 0..=20 {
            let u = 0.2 * k as f64;
            let a = map.apply(u).unwrap();
            let b = sncndn(u, -m).unwrap();
            let y = traj.eval(u).unwrap();
            for (x, z) in [(a.sn, y[0]), (a.cn, y[1]), (a.dn, y[2]), (b.sn, y[0]), (b.cn, y[1]), (b.dn, y[2])] {
                assert!((x - z).abs() < 1e-10, "u={u}");
            }
        }
    }

    #[test]
    fn reciprocal_map() {
        let t = transform_reciprocal(0.4, 1.0).unwrap();
        assert!((t.sn - 0.4f64.tanh()).abs() < 1e-16);
        let m = 4.0;
        let traj = integrate(&jacobi_system(m), &IntegratorConfig::new(0.0, 0.5)).unwrap();
        let y = traj.eval(0.3).unwrap();
        let t = transform_reciprocal(0.3, m).unwrap();
        assert!((t.sn - y[0]).abs() < 1e-12 && (t.cn - y[1]).abs() < 1e-12 && (t.dn - y[2]).abs() < 1e-12);
        assert!(t.identity_defect() < 1e-14);
    }

    #[test]
    fn landen_step() {
        let s = landen_descend(0.9, 0.0).unwrap();
        assert_eq!(s.mu, 0.0);
        assert_eq!(s.v, 0.9);
        let (u, m) = (0.9, 0.64);
        let s = landen_descend(u, m).unwrap();
        let d = sncndn(u, m).unwrap();
        assert!((s.values.sn - d.sn).abs() < 1e-12);
        assert!((s.values.cn - d.cn).abs() < 1e-12);
        assert!((s.values.dn - d.dn).abs() < 1e-12);
        assert!((s.dn_double - s.values.dn).abs() < 1e-12);
    }

    #[test]
    fn addition() {
        let m = 0.6;
        let a = jacobi_add(0.7, 0.0, m).unwrap();
        let b = sncndn(0.7, m).unwrap();
        assert!((a.sn - b.sn).abs() < 1e-16 && (a.cn - b.cn).abs() < 1e-16 && (a.dn - b.dn).abs() < 1e-16);
        let a = jacobi_add(0.55, 0.55, m).unwrap();
        let b = sncndn(1.1, m).unwrap();
        assert!((a.sn - b.sn).abs() < 1e-14 && (a.cn - b.cn).abs() < 1e-14 && (a.dn - b.dn).abs() < 1e-14);
        let k = k_quad(m);
        let a = jacobi_add(0.3 * k, 0.7 * k, m).unwrap();
        assert!((a.sn - 1.0).abs() < 1e-14);
    }

    #[test]
    fn theta_fixtures() {
        let k: f64 = 0.6;
        let kp = 0.8;
        let p = theta_ratio_fixture(ThetaRatioTag::Bounded1, k).unwrap();
        assert_eq!(p.alphas(), &[kp, -1.0, -k]);
        assert_eq!(p.ic(), &[0.0, (k / kp).sqrt(), 1.0 / kp.sqrt()]);
        let p = theta_ratio_fixture(ThetaRatioTag::Unbounded1, k).unwrap();
        assert_eq!(p.alphas(), &[k, kp, 1.0]);
        assert_eq!(p.ic(), &[0.0, 1.0 / k.sqrt(), (kp / k).sqrt()]);
        assert!("sideways".parse::<ThetaRatioTag>().is_err());
        assert!(theta_ratio_fixture(ThetaRatioTag::Bounded2, 1.0).is_err());
    }
}
