//! One-parameter theta-like solutions, the three-function fit for ratio
//! systems, and the Jacobi ratio system.

use crate::ees::EesParams;
use crate::elliptic::{complete_k, sncndn, sncndn_any, JacobiTriple};
use crate::error::{Error, Result};

use super::MahlerParams4;

/// The theta-similar functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSimilarValues {
    pub omega: [f64; 4],
    pub z: f64,
    pub k: f64,
    /// `√(1 − k²)`.
    pub kp: f64,
    /// `2K/π`.
    pub a: f64,
    /// `(0, √(ak), √a, √(ak'))`.
    pub ic: [f64; 4],
    /// `(1, −1, −(1−k')/k, (1−k')/k)`.
    pub coefficients: [f64; 4],
}

impl ThetaSimilarValues {
    pub fn system(&self) -> EesParams {
        EesParams::new(self.coefficients.to_vec(), self.ic.to_vec()).expect("finite constants")
    }

    /// `sn, cn, dn` at `(a z, k²)` read off as ratios of the functions.
    pub fn jacobi_ratios(&self) -> JacobiTriple {
        let [w1, w2, w3, w4] = self.omega;
        let [_, i2, i3, i4] = self.ic;
        JacobiTriple {
            sn: i3 / i2 * w1 / w4,
            cn: i4 / i2 * w2 / w4,
            dn: i4 / i3 * w3 / w4,
            u: self.a * self.z,
            m: self.k * self.k,
        }
    }
}

pub fn theta_similar(z: f64, k: f64) -> Result<ThetaSimilarValues> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::domain(format!("theta-similar functions need 0 < k < 1, got k = {k}")));
    }
    let m = k * k;
    let kp = (1.0 - m).sqrt();
    let a = 2.0 * complete_k(m)? / std::f64::consts::PI;
    let t = sncndn(a * z, m)?;
    let r = 1.0 / (1.0 - (1.0 - kp) * t.sn * t.sn).sqrt();
    let g = (1.0 - kp) / k;
    Ok(ThetaSimilarValues {
        omega: [(a * k * kp).sqrt() * t.sn * r, (a * k).sqrt() * t.cn * r, a.sqrt() * t.dn * r, (a * kp).sqrt() * r],
        z,
        k,
        kp,
        a,
        ic: [0.0, (a * k).sqrt(), a.sqrt(), (a * kp).sqrt()],
        coefficients: [1.0, -1.0, -g, g],
    })
}

/// `u₁ = δ₁ sn(a v | m₁)`, `u₂ = δ₂ cn`, `u₃ = δ₃ dn` for a 3-EES whose
/// first coefficient has the opposite sign of the other two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit3Constants {
    pub delta: [f64; 3],
    pub a: f64,
    pub m1: f64,
}

impl Fit3Constants {
    pub fn evaluate(&self, v: f64) -> Result<[f64; 3]> {
        let t = sncndn_any(self.a * v, self.m1)?;
        Ok([self.delta[0] * t.sn, self.delta[1] * t.cn, self.delta[2] * t.dn])
    }
}

pub fn fit3_constants(params: &EesParams) -> Result<Fit3Constants> {
    if params.dimension() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: params.dimension() });
    }
    let [a1, a2, a3] = [params.alphas()[0], params.alphas()[1], params.alphas()[2]];
    let [u1, u2, u3] = [params.ic()[0], params.ic()[1], params.ic()[2]];
    if !(a1 * a2 < 0.0 && a1 * a3 <= 0.0) {
        return Err(Error::domain(format!(
            "the sn/cn/dn fit needs the first coefficient to differ in sign from the other two, got {:?}",
            params.alphas()
        )));
    }
    if u1 != 0.0 {
        return Err(Error::domain("the sn/cn/dn fit needs u₁(0) = 0"));
    }
    if u2 == 0.0 || u3 == 0.0 {
        return Err(Error::domain("the sn/cn/dn fit needs u₂(0) and u₃(0) nonzero"));
    }
    let d1 = (-a1 / a2).sqrt() * u2;
    Ok(Fit3Constants { delta: [d1, u2, u3], a: a1 * u2 * u3 / d1, m1: a3 * u2 * u2 / (a2 * u3 * u3) })
}

/// The 4-EES `α = (1, −(1+n), −m, −n)`, `ω(0) = (0, 1, 1, 1)` whose ratios
/// to `ω₄` are Jacobi functions of parameter `m − n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatiosJacobiSystem {
    pub params: EesParams,
    pub m: f64,
    pub n: f64,
    /// `[lower, upper]` for each of `ω₁..ω₄`, valid for `0 < n < m < 1`.
    pub bounds: Option<[(f64, f64); 4]>,
}

impl RatiosJacobiSystem {
    /// `ω₂² + (1+n) ω₁²`, `ω₃² + m ω₁²`, `ω₄² + n ω₁²`; all equal 1.
    pub fn integrals(&self, w: &[f64]) -> [f64; 3] {
        let s = w[0] * w[0];
        [w[1] * w[1] + (1.0 + self.n) * s, w[2] * w[2] + self.m * s, w[3] * w[3] + self.n * s]
    }

    /// `(sn, cn, dn)(v | m − n)` as `ω_i / ω₄`.
    pub fn jacobi(&self, w: &[f64]) -> [f64; 3] {
        [w[0] / w[3], w[1] / w[3], w[2] / w[3]]
    }
}

pub fn ratios_jacobi_fixture(p: &MahlerParams4) -> RatiosJacobiSystem {
    let (m, n) = (p.m(), p.n());
    let params = EesParams::new(vec![1.0, -(1.0 + n), -m, -n], vec![0.0, 1.0, 1.0, 1.0]).expect("finite parameters");
    let bounds = (0.0 < n && n < m && m < 1.0).then(|| {
        let w1 = 1.0 / (1.0 + n).sqrt();
        [(-w1, w1), (-1.0, 1.0), ((1.0 - m / (1.0 + n)).sqrt(), 1.0), ((1.0 - n / (1.0 + n)).sqrt(), 1.0)]
    });
    RatiosJacobiSystem { params, m, n, bounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ees::glashier_reduce;
    use crate::mahler4::prop5_constants;
    use crate::ode::{integrate, IntegratorConfig};

    #[test]
    fn theta_initial_values_and_system() {
        let k = 0.6;
        let t = theta_similar(0.0, k).unwrap();
        assert_eq!(t.omega, t.ic);
        let traj = integrate(&t.system(), &IntegratorConfig::new(0.0, 4.0)).unwrap();
        for i in 0..=40 {
            let z = 0.1 * i as f64;
            let w = theta_similar(z, k).unwrap().omega;
            let y = traj.eval(z).unwrap();
            for j in 0..4 {
                assert!((w[j] - y[j]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn theta_ratios_are_jacobi() {
        let k: f64 = 0.8;
        for z in [0.2, 1.0, 2.7] {
            let t = theta_similar(z, k).unwrap();
            let j = t.jacobi_ratios();
            let e = sncndn(t.a * z, k * k).unwrap();
            assert!((j.sn - e.sn).abs() < 1e-14 && (j.cn - e.cn).abs() < 1e-14 && (j.dn - e.dn).abs() < 1e-14);
        }
    }

    #[test]
    fn fit3_jacobi_case() {
        let m = 0.4;
        let f = fit3_constants(&EesParams::new(vec![1.0, -1.0, -m], vec![0.0, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!((f.delta, f.a, f.m1), ([1.0, 1.0, 1.0], 1.0, m));
    }

    #[test]
    fn fit3_mahler_reduction() {
        let p = MahlerParams4::new(0.8, 0.1).unwrap();
        let reduced = glashier_reduce(&p.system(), 3).unwrap();
        let f = fit3_constants(&reduced).unwrap();
        let c = prop5_constants(&p).unwrap();
        assert!((f.a - c.a).abs() < 1e-15);
        assert!((f.m1 - c.m1).abs() < 1e-15);
        assert!((f.delta[0] - c.big_a).abs() < 1e-15);
    }

    #[test]
    fn fit3_reconstruction_matches_ode() {
        let sys = EesParams::new(vec![2.0, -0.5, -1.5], vec![0.0, 1.3, 0.9]).unwrap();
        let f = fit3_constants(&sys).unwrap();
        let traj = integrate(&sys, &IntegratorConfig::new(0.0, 5.0)).unwrap();
        for i in 0..=50 {
            let v = 0.1 * i as f64;
            let u = f.evaluate(v).unwrap();
            let y = traj.eval(v).unwrap();
            for j in 0..3 {
                assert!((u[j] - y[j]).abs() < 1e-10, "v={v} j={j}");
            }
        }
        assert!(fit3_constants(&EesParams::new(vec![1.0, 1.0, -1.0], vec![0.0, 1.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn ratios_jacobi() {
        let p = MahlerParams4::new(0.8, 0.3).unwrap();
        let fx = ratios_jacobi_fixture(&p);
        let bounds = fx.bounds.unwrap();
        let traj = integrate(&fx.params, &IntegratorConfig::new(0.0, 20.0)).unwrap();
        for (v, w) in traj.nodes() {
            for c in fx.integrals(&w) {
                assert!((c - 1.0).abs() < 1e-11);
            }
            for i in 0..4 {
                assert!(w[i] >= bounds[i].0 - 1e-12 && w[i] <= bounds[i].1 + 1e-12);
            }
            let j = fx.jacobi(&w);
            let e = sncndn(v, 0.8 - 0.3).unwrap();
            assert!((j[0] - e.sn).abs() < 1e-10 && (j[1] - e.cn).abs() < 1e-10 && (j[2] - e.dn).abs() < 1e-10);
        }
    }
}
