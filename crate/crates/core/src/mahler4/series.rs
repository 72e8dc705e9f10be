//! Maclaurin series and the halving / doubling evaluation scheme.

use super::algebra::double_values;
use super::{Mahler4Values, MahlerParams4};
use crate::error::{Error, Result};

/// Degree of the series used inside the direct path.
const DIRECT_DEGREE: usize = 17;

/// Maclaurin coefficients of `sng, cng, dng, fng`, generated from the
/// differential system to any degree.
#[derive(Debug, Clone)]
pub struct TaylorSeries {
    pub sng: Vec<f64>,
    pub cng: Vec<f64>,
    pub dng: Vec<f64>,
    pub fng: Vec<f64>,
}

impl TaylorSeries {
    pub fn new(p: &MahlerParams4, degree: usize) -> Self {
        let len = degree + 1;
        let (mut s, mut c, mut d, mut f) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        c[0] = 1.0;
        d[0] = 1.0;
        f[0] = 1.0;
        for k in 0..degree {
            let next = (k + 1) as f64;
            s[k + 1] = triple(&c, &d, &f, k) / next;
            c[k + 1] = -triple(&s, &d, &f, k) / next;
            d[k + 1] = -p.m() * triple(&s, &c, &f, k) / next;
            f[k + 1] = -p.n() * triple(&s, &c, &d, k) / next;
        }
        TaylorSeries { sng: s, cng: c, dng: d, fng: f }
    }

    pub fn degree(&self) -> usize {
        self.sng.len() - 1
    }

    pub fn eval(&self, v: f64) -> Mahler4Values {
        Mahler4Values {
            sng: horner(&self.sng, v),
            cng: horner(&self.cng, v),
            dng: horner(&self.dng, v),
            fng: horner(&self.fng, v),
        }
    }
}

/// Degree-`k` coefficient of the product of three series.
fn triple(x: &[f64], y: &[f64], z: &[f64], k: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..=k {
        for j in 0..=(k - i) {
            sum += x[i] * y[j] * z[k - i - j];
        }
    }
    sum
}

fn horner(coef: &[f64], v: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * v + c)
}

/// Truncated Maclaurin series through degree `order` (1..=7).
///
/// Coefficients through `v⁶` are the closed polynomial expressions in
/// `m, n`; the `v⁷` coefficient of `sng` comes from the series recurrence.
pub fn mahler4_taylor(v: f64, p: &MahlerParams4, order: usize) -> Result<Mahler4Values> {
    if !(1..=7).contains(&order) {
        return Err(Error::domain(format!("series order must be in 1..=7, got {order}")));
    }
    let (m, n) = (p.m(), p.n());
    let s = [
        0.0,
        1.0,
        0.0,
        -(1.0 + m + n) / 6.0,
        0.0,
        (1.0 + 14.0 * (m + n + m * n) + m * m + n * n) / 120.0,
        0.0,
        TaylorSeries::new(p, 7).sng[7],
    ];
    let c = [
        1.0,
        0.0,
        -0.5,
        0.0,
        (1.0 + 4.0 * m + 4.0 * n) / 24.0,
        0.0,
        -(1.0 + 44.0 * (m + n) + 16.0 * m * m + 104.0 * m * n + 16.0 * n * n) / 720.0,
        0.0,
    ];
    let d = [
        1.0,
        0.0,
        -m / 2.0,
        0.0,
        m * (4.0 + m + 4.0 * n) / 24.0,
        0.0,
        -m * (16.0 + 44.0 * m + m * m + 104.0 * n + 44.0 * m * n + 16.0 * n * n) / 720.0,
        0.0,
    ];
    let f = [
        1.0,
        0.0,
        -n / 2.0,
        0.0,
        n * (4.0 + n + 4.0 * m) / 24.0,
        0.0,
        -n * (16.0 + 44.0 * n + n * n + 104.0 * m + 44.0 * m * n + 16.0 * m * m) / 720.0,
        0.0,
    ];
    let k = order + 1;
    Ok(Mahler4Values {
        sng: horner(&s[..k], v),
        cng: horner(&c[..k], v),
        dng: horner(&d[..k], v),
        fng: horner(&f[..k], v),
    })
}

/// Arguments below this radius are evaluated by the series directly.
pub fn series_radius(p: &MahlerParams4) -> f64 {
    0.1 * (1.0f64).min(1.0 / (1.0 + p.m().abs() + p.n().abs()).sqrt())
}

/// Reduce by the period where there is one, halve into the series disc, sum the series, then apply
/// the double-argument formulas as many times as the argument was halved.
pub fn mahler4_direct(v: f64, p: &MahlerParams4) -> Result<Mahler4Values> {
    mahler4_direct_report(v, p).map(|(w, _)| w)
}

/// As [`mahler4_direct`], also returning the number of halvings.
pub fn mahler4_direct_report(v: f64, p: &MahlerParams4) -> Result<(Mahler4Values, usize)> {
    if !v.is_finite() {
        return Err(Error::domain("argument must be finite"));
    }
    // Shift by whole half periods first so the doubling chain stays short.
    let (v, flip) = if p.m() < 1.0 && p.n() < 1.0 {
        let half = 2.0 * super::quarter_period(p)?;
        let k = (v / half).round();
        (v - k * half, k.rem_euclid(2.0) == 1.0)
    } else {
        (v, false)
    };
    let radius = series_radius(p);
    let mut x = v;
    let mut halvings = 0;
    while x.abs() >= radius {
        x *= 0.5;
        halvings += 1;
    }
    let series = TaylorSeries::new(p, DIRECT_DEGREE);
    let mut w = series.eval(x);
    for _ in 0..halvings {
        w = double_values(&w, p)?;
    }
    if flip {
        w.sng = -w.sng;
        w.cng = -w.cng;
    }
    Ok((w, halvings))
}
