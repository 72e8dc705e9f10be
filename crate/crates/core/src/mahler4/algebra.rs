//! Addition, double-argument and half-argument formulas.
//!
//! The building blocks are the Mahler functions at `x` and `y`. With
//! `P = s_x c_y d_y f_x ± s_y c_x d_x f_y` and
//! `Q = f_x² f_y² − (m − n)(1 − n) s_x² s_y²` the common denominator is
//! `√(Q² + n P²)`; at `n = 0` everything collapses to the Jacobi addition
//! theorem.

use super::{mahler4_direct, prop5_constants, quarter_period, Mahler4Values, MahlerParams4};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Values at `x ± y`.
pub fn addition(x: f64, y: f64, p: &MahlerParams4, sign: Sign) -> Result<Mahler4Values> {
    let a = mahler4_direct(x, p)?;
    let b = mahler4_direct(y, p)?;
    addition_values(&a, &b, p, sign)
}

/// Addition formulas on precomputed values at `x` and `y`.
pub fn addition_values(a: &Mahler4Values, b: &Mahler4Values, p: &MahlerParams4, sign: Sign) -> Result<Mahler4Values> {
    let (m, n) = (p.m(), p.n());
    let e = sign.value();
    let big_p = a.sng * b.cng * b.dng * a.fng + e * b.sng * a.cng * a.dng * b.fng;
    let q = a.fng * a.fng * b.fng * b.fng - (m - n) * (1.0 - n) * a.sng * a.sng * b.sng * b.sng;
    let rad = q * q + n * big_p * big_p;
    if !(rad > 0.0) {
        return Err(Error::NonPositiveRadicand("Mahler addition denominator"));
    }
    let den = rad.sqrt();
    let ss = a.sng * b.sng;
    Ok(Mahler4Values {
        sng: big_p / den,
        cng: (a.cng * b.cng * a.fng * b.fng - e * (1.0 - n) * ss * a.dng * b.dng) / den,
        dng: (a.dng * b.dng * a.fng * b.fng - e * (m - n) * ss * a.cng * b.cng) / den,
        fng: q / den,
    })
}

/// Values at `2x`.
pub fn double_arg(x: f64, p: &MahlerParams4) -> Result<Mahler4Values> {
    double_values(&mahler4_direct(x, p)?, p)
}

/// Double-argument formulas on precomputed values at `x`.
pub fn double_values(w: &Mahler4Values, p: &MahlerParams4) -> Result<Mahler4Values> {
    let (m, n) = (p.m(), p.n());
    let (s2, c2, d2, f2) = (w.sng * w.sng, w.cng * w.cng, w.dng * w.dng, w.fng * w.fng);
    let big_p = 2.0 * w.sng * w.cng * w.dng * w.fng;
    let q = f2 * f2 - (m - n) * (1.0 - n) * s2 * s2;
    let rad = q * q + n * big_p * big_p;
    if !(rad > 0.0) {
        return Err(Error::NonPositiveRadicand("Mahler double-argument denominator"));
    }
    let den = rad.sqrt();
    Ok(Mahler4Values {
        sng: big_p / den,
        cng: (c2 * f2 - (1.0 - n) * s2 * d2) / den,
        dng: (d2 * f2 - (m - n) * s2 * c2) / den,
        fng: q / den,
    })
}

/// Values at `x / 2`, for `|x / 2|` within the first quarter period.
pub fn half_arg(x: f64, p: &MahlerParams4) -> Result<Mahler4Values> {
    let quarter = quarter_period(p)?;
    if x.abs() > 2.0 * quarter * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "half-argument formulas need |x/2| <= quarter period {quarter}, got x = {x}"
        )));
    }
    let w = mahler4_direct(x, p)?;
    let mut h = half_values(&w, p)?;
    if x < 0.0 {
        h.sng = -h.sng;
    }
    Ok(h)
}

/// Half-argument formulas on precomputed values at `x`; returns the
/// non-negative branch.
pub fn half_values(w: &Mahler4Values, p: &MahlerParams4) -> Result<Mahler4Values> {
    let (m, n) = (p.m(), p.n());
    let k = prop5_constants(p)?;
    let (s, c, d, f) = (w.sng, w.cng, w.dng, w.fng);
    let s2 = s * s;
    // f² − c² = (1 − n) s² and d² − c² = (1 − m) s²; use them where the
    // plain sum or difference cancels.
    let f_minus_c = if c > 0.0 { (1.0 - n) * s2 / (f + c) } else { f - c };
    let f_plus_c = if c < 0.0 { (1.0 - n) * s2 / (f - c) } else { f + c };
    let c_plus_d = if c < 0.0 { (1.0 - m) * s2 / (d - c) } else { c + d };
    let f_plus_d = f + d;
    let e = f_plus_d - k.n1 * f_minus_c;
    let e2 = f_plus_c * f_plus_d - k.n1 * (1.0 - n) * s2;
    if !(e > 0.0) || !(e2 > 0.0) {
        return Err(Error::NonPositiveRadicand("Mahler half-argument denominator"));
    }
    let root = |x: f64| x.max(0.0).sqrt();
    Ok(Mahler4Values {
        sng: k.big_a * root(f_minus_c / e),
        cng: root(c_plus_d / e),
        dng: root(c_plus_d * f_plus_d / e2),
        fng: root(f_plus_d / e),
    })
}
