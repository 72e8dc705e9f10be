//! The N-extended Euler system `ω_i' = α_i ∏_{j≠i} ω_j`.
//!
//! Holds the parameter set of one initial value problem, its quadratic
//! first integrals `C_ij = α_i ω_j² − α_j ω_i²`, equilibria, the scaling
//! symmetry, the normalized system on the unit sphere, the ratio reduction
//! to dimension N−1, and the square-norm profile `Ω = Σ ω_i²`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::ode::{DenseSolution, OdeReport};

/// Coefficients and initial condition of one N-EES.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EesParams {
    alphas: Vec<f64>,
    ic: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alphas: Vec<f64>,
    ic: Vec<f64>,
}

impl TryFrom<RawParams> for EesParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        EesParams::new(raw.alphas, raw.ic)
    }
}

impl From<EesParams> for RawParams {
    fn from(p: EesParams) -> Self {
        RawParams { alphas: p.alphas, ic: p.ic }
    }
}

impl EesParams {
    pub fn new(alphas: Vec<f64>, ic: Vec<f64>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::domain("an N-EES needs N >= 2"));
        }
        if ic.len() != alphas.len() {
            return Err(Error::DimensionMismatch { expected: alphas.len(), found: ic.len() });
        }
        if alphas.iter().chain(&ic).any(|x| !x.is_finite()) {
            return Err(Error::domain("coefficients and initial conditions must be finite"));
        }
        Ok(EesParams { alphas, ic })
    }

    /// The 4-Mahler system: α = (1, −1, −m, −n), ω(0) = (0, 1, 1, 1).
    pub fn mahler4(m: f64, n: f64) -> Result<Self> {
        EesParams::new(vec![1.0, -1.0, -m, -n], vec![0.0, 1.0, 1.0, 1.0])
    }

    /// The 5-Mahler system: α = (1, −1, −m, −n, −p), ω(0) = (0, 1, 1, 1, 1).
    pub fn mahler5(p: f64, n: f64, m: f64) -> Result<Self> {
        EesParams::new(vec![1.0, -1.0, -m, -n, -p], vec![0.0, 1.0, 1.0, 1.0, 1.0])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::domain(format!("invalid EES JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("EesParams always serializes")
    }

    pub fn dimension(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn ic(&self) -> &[f64] {
        &self.ic
    }

    pub fn with_ic(&self, ic: Vec<f64>) -> Result<Self> {
        EesParams::new(self.alphas.clone(), ic)
    }

    /// Right-hand side of the system at `state`.
    pub fn rhs(&self, state: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dimension(), state.len())?;
        let mut out = vec![0.0; state.len()];
        rhs_into(&self.alphas, state, &mut out);
        Ok(out)
    }

    /// True when every first integral vanishes: the orbit is a straight
    /// line through the origin (or an equilibrium).
    pub fn is_straight_line(&self) -> bool {
        let c = FirstIntegralMatrix::from_state(&self.alphas, &self.ic);
        let scale =
            self.alphas.iter().map(|a| a.abs()).fold(0.0, f64::max) * self.ic.iter().map(|w| w * w).fold(0.0, f64::max);
        c.max_abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Writes `α_i ∏_{j≠i} ω_j` into `out`.
///
/// Uses prefix/suffix products so a zero component does not poison the
/// other entries.
pub(crate) fn rhs_into(alphas: &[f64], state: &[f64], out: &mut [f64]) {
    let n = state.len();
    let mut prefix = 1.0;
    for i in 0..n {
        out[i] = prefix;
        prefix *= state[i];
    }
    let mut suffix = 1.0;
    for i in (0..n).rev() {
        out[i] *= suffix * alphas[i];
        suffix *= state[i];
    }
}

/// The matrix of quadratic integrals `C_ij = α_i ω_j² − α_j ω_i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegralMatrix {
    n: usize,
    values: Vec<f64>,
}

impl FirstIntegralMatrix {
    pub(crate) fn from_state(alphas: &[f64], state: &[f64]) -> Self {
        let n = alphas.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    values[i * n + j] = alphas[i] * state[j] * state[j] - alphas[j] * state[i] * state[i];
                }
            }
        }
        FirstIntegralMatrix { n, values }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `C_ij` with 0-based indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `max_ij |C_ij − C⁰_ij| / (1 + |C⁰_ij|)`.
    pub fn relative_drift(&self, reference: &FirstIntegralMatrix) -> f64 {
        self.values.iter().zip(&reference.values).map(|(c, c0)| (c - c0).abs() / (1.0 + c0.abs())).fold(0.0, f64::max)
    }
}

/// First integrals of `params` evaluated at `state`.
pub fn first_integrals(params: &EesParams, state: &[f64]) -> Result<FirstIntegralMatrix> {
    check_len(params.dimension(), state.len())?;
    Ok(FirstIntegralMatrix::from_state(params.alphas(), state))
}

/// A coordinate subspace of equilibria: the listed coordinates may take any
/// value, all others vanish.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EquilibriumSet {
    pub support: Vec<usize>,
}

impl EquilibriumSet {
    pub fn is_origin(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.iter().enumerate().all(|(i, x)| *x == 0.0 || self.support.contains(&i))
    }
}

/// All equilibrium subspaces: coordinate subspaces with at most N−2 free
/// coordinates, ordered by size then lexicographically.
pub fn equilibria(params: &EesParams) -> Vec<EquilibriumSet> {
    let n = params.dimension();
    let mut sets = vec![EquilibriumSet { support: Vec::new() }];
    for size in 1..=n.saturating_sub(2) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            sets.push(EquilibriumSet { support: combo.clone() });
            // Next combination in lexicographic order.
            let mut i = size;
            while i > 0 && combo[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    sets
}

/// Coefficients of the normalized system on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedParams {
    /// `c_i = α_i |ω(0)|² − (Σα) ω_i(0)²`.
    pub c: Vec<f64>,
    /// `ω(0) / |ω(0)|`.
    pub tilde_ic: Vec<f64>,
    /// `|ω(0)|²`.
    pub norm_sq: f64,
    /// Exponent `N − 4` of the reparametrization `dv* = |ω|^{N−4} dv`.
    pub regularization_exponent: i32,
}

impl NormalizedParams {
    /// The normalized system as an N-EES in the variable `v*`.
    pub fn as_ees(&self) -> Result<EesParams> {
        EesParams::new(self.c.clone(), self.tilde_ic.clone())
    }
}

pub fn normalize(params: &EesParams) -> Result<NormalizedParams> {
    let norm_sq: f64 = params.ic().iter().map(|w| w * w).sum();
    if norm_sq == 0.0 {
        return Err(Error::domain("normalization needs a nonzero initial condition"));
    }
    let sum_alpha: f64 = params.alphas().iter().sum();
    let norm = norm_sq.sqrt();
    let c = params.alphas().iter().zip(params.ic()).map(|(a, w)| a * norm_sq - sum_alpha * w * w).collect();
    let tilde_ic = params.ic().iter().map(|w| w / norm).collect();
    Ok(NormalizedParams { c, tilde_ic, norm_sq, regularization_exponent: params.dimension() as i32 - 4 })
}

/// Ratio reduction with pivot `pivot` (0-based).
///
/// Returns the (N−1)-EES satisfied by `u_i = ω_i / ω_pivot`, with
/// coefficients `C_i^pivot = α_i ω_pivot(0)² − α_pivot ω_i(0)²`. For N = 4 the
/// reduced system holds in the original variable; for other N it holds in
/// `v*` with `dv* = ω_pivot^{N−4} dv`.
pub fn glashier_reduce(params: &EesParams, pivot: usize) -> Result<EesParams> {
    let n = params.dimension();
    if pivot >= n {
        return Err(Error::domain(format!("pivot index {pivot} out of range for N = {n}")));
    }
    if n < 3 {
        return Err(Error::domain("ratio reduction needs N >= 3"));
    }
    let wj = params.ic()[pivot];
    if wj == 0.0 {
        return Err(Error::domain("pivot initial condition is zero"));
    }
    let aj = params.alphas()[pivot];
    let mut alphas = Vec::with_capacity(n - 1);
    let mut ic = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != pivot) {
        let wi = params.ic()[i];
        alphas.push(params.alphas()[i] * wj * wj - aj * wi * wi);
        ic.push(wi / wj);
    }
    EesParams::new(alphas, ic)
}

/// Dense numeric solution of an N-EES.
///
/// Internally a solution of the stored base problem, composed with the
/// scaling map `u(v) = y_scale · ω(v_scale · v)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: EesParams,
    solution: Arc<DenseSolution>,
    v_scale: f64,
    y_scale: f64,
    drift: f64,
    report: OdeReport,
}

impl Trajectory {
    pub(crate) fn from_solution(params: EesParams, solution: DenseSolution, drift: f64, report: OdeReport) -> Self {
        Trajectory { params, solution: Arc::new(solution), v_scale: 1.0, y_scale: 1.0, drift, report }
    }

    pub fn params(&self) -> &EesParams {
        &self.params
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn report(&self) -> &OdeReport {
        &self.report
    }

    #[cfg(test)]
    pub(crate) fn solution(&self) -> &DenseSolution {
        &self.solution
    }

    /// Span `(start, end)` in the trajectory's own variable.
    pub fn span(&self) -> (f64, f64) {
        let (a, b) = self.solution.span();
        (a / self.v_scale, b / self.v_scale)
    }

    /// State at `v`.
    pub fn eval(&self, v: f64) -> Result<Vec<f64>> {
        let base = v * self.v_scale;
        let mut y = self.solution.eval(base).map_err(|e| match e {
            Error::OutsideSpan { .. } => {
                let (a, b) = self.span();
                Error::OutsideSpan { v, start: a.min(b), end: a.max(b) }
            }
            other => other,
        })?;
        if self.y_scale != 1.0 {
            y.iter_mut().for_each(|x| *x *= self.y_scale);
        }
        Ok(y)
    }

    /// Integration nodes `(v, ω(v))`, in integration order.
    pub fn nodes(&self) -> Vec<(f64, Vec<f64>)> {
        self.solution
            .node_times()
            .into_iter()
            .zip(self.solution.node_states())
            .map(|(t, y)| (t / self.v_scale, y.into_iter().map(|x| x * self.y_scale).collect()))
            .collect()
    }

    /// Relative first-integral drift at one state.
    pub fn drift_at(&self, state: &[f64]) -> f64 {
        let reference = FirstIntegralMatrix::from_state(self.params.alphas(), self.params.ic());
        FirstIntegralMatrix::from_state(self.params.alphas(), state).relative_drift(&reference)
    }

    /// CSV with header `v,omega1,...,omegaN,drift`, one row per node.
    pub fn to_csv(&self) -> String {
        let rows: Vec<(f64, Vec<f64>)> = self.nodes();
        self.render_csv(rows)
    }

    /// CSV sampled on a uniform grid of `count` points over the span.
    pub fn to_csv_grid(&self, count: usize) -> Result<String> {
        let (a, b) = self.span();
        let count = count.max(2);
        let mut rows = Vec::with_capacity(count);
        for k in 0..count {
            let v = if k + 1 == count { b } else { a + (b - a) * k as f64 / (count - 1) as f64 };
            rows.push((v, self.eval(v)?));
        }
        Ok(self.render_csv(rows))
    }

    fn render_csv(&self, rows: Vec<(f64, Vec<f64>)>) -> String {
        let n = self.params.dimension();
        let mut out = String::from("v");
        for i in 1..=n {
            let _ = write!(out, ",omega{i}");
        }
        out.push_str(",drift\n");
        for (v, y) in rows {
            out.push_str(&fmt_num(v));
            for x in &y {
                out.push(',');
                out.push_str(&fmt_num(*x));
            }
            out.push(',');
            out.push_str(&fmt_num(self.drift_at(&y)));
            out.push('\n');
        }
        out
    }
}

/// `u_i(v) = c · ω_i(c^{N−2} v)`, which solves the same system with initial
/// condition `c · ω(0)`.
pub fn scale_solution(traj: &Trajectory, c: f64) -> Result<Trajectory> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::domain("scaling factor must be finite and nonzero"));
    }
    let n = traj.params.dimension() as i32;
    let params = traj.params.with_ic(traj.params.ic().iter().map(|w| c * w).collect())?;
    let mut scaled = Trajectory {
        params,
        solution: Arc::clone(&traj.solution),
        v_scale: traj.v_scale * c.powi(n - 2),
        y_scale: traj.y_scale * c,
        drift: 0.0,
        report: traj.report,
    };
    scaled.drift = scaled.nodes().iter().map(|(_, y)| scaled.drift_at(y)).fold(0.0, f64::max);
    scaled.report.max_drift = Some(scaled.drift);
    Ok(scaled)
}

/// The square-norm profile `(Ω')² = 4 κ ∏ (Ω − b_i)` fitted along a
/// trajectory.
#[derive(Debug, Clone)]
pub struct WeierstrassProfile {
    /// Samples `(v, Ω, Ω')`.
    pub samples: Vec<(f64, f64, f64)>,
    /// Constant Ω: no roots were fitted.
    pub degenerate: bool,
    /// Leading coefficient κ (1 in the classical normalization).
    pub kappa: f64,
    /// Fitted roots `b_i`, sorted ascending by real part.
    pub roots: Vec<f64>,
    /// Imaginary parts of the fitted roots; zero for a real factorization.
    pub roots_imag: Vec<f64>,
    /// Mean of the roots; `Ω − shift` has centered roots.
    pub shift: f64,
    /// `b_i − shift`, which sum to zero.
    pub centered_roots: Vec<f64>,
    /// Max relative defect of the fitted identity over the samples.
    pub residual: f64,
}

impl WeierstrassProfile {
    /// Σ of the centered roots.
    pub fn centered_sum(&self) -> f64 {
        self.centered_roots.iter().sum()
    }
}

/// Roots and leading coefficient of the square-norm polynomial implied by
/// the first integrals: `b_i = c_i / α_i`, `κ = (Σα)^{2−N} ∏ α_i`.
pub fn weierstrass_roots_from_integrals(params: &EesParams) -> Result<(f64, Vec<f64>)> {
    let norm = normalize(params)?;
    let sum_alpha: f64 = params.alphas().iter().sum();
    if sum_alpha == 0.0 {
        return Err(Error::domain("Σα = 0: the square norm is constant"));
    }
    if params.alphas().contains(&0.0) {
        return Err(Error::domain("a zero coefficient lowers the degree of the profile"));
    }
    let n = params.dimension() as i32;
    let kappa = sum_alpha.powi(2 - n) * params.alphas().iter().product::<f64>();
    let mut roots: Vec<f64> = norm.c.iter().zip(params.alphas()).map(|(c, a)| c / a).collect();
    roots.sort_by(f64::total_cmp);
    Ok((kappa, roots))
}

/// Samples `Ω = Σ ω_i²` and `Ω' = 2 (Σα) ∏ ω_i` along `traj` and fits the
/// degree-N polynomial `(Ω')² / 4` in Ω by linear least squares.
pub fn weierstrass_profile(traj: &Trajectory) -> Result<WeierstrassProfile> {
    let params = traj.params();
    let n = params.dimension();
    let sum_alpha: f64 = params.alphas().iter().sum();
    let (a, b) = traj.span();
    let count = 64 * (n + 1);
    let mut samples = Vec::with_capacity(count);
    for k in 0..count {
        let v = a + (b - a) * k as f64 / (count - 1) as f64;
        let y = traj.eval(v)?;
        let omega: f64 = y.iter().map(|x| x * x).sum();
        let d_omega = 2.0 * sum_alpha * y.iter().product::<f64>();
        samples.push((v, omega, d_omega));
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)));
    let degenerate = hi - lo <= 1e-10 * (1.0 + hi.abs());
    if degenerate {
        return Ok(WeierstrassProfile {
            samples,
            degenerate,
            kappa: 0.0,
            roots: Vec::new(),
            roots_imag: Vec::new(),
            shift: 0.0,
            centered_roots: Vec::new(),
            residual: 0.0,
        });
    }

    // Fit in the centered, scaled variable t = (Ω − mid) / half.
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let design = DMatrix::from_fn(samples.len(), n + 1, |r, c| ((samples[r].1 - mid) / half).powi(c as i32));
    let rhs = DVector::from_iterator(samples.len(), samples.iter().map(|s| 0.25 * s.2 * s.2));
    let svd = design.svd(true, true);
    let coef_t =
        svd.solve(&rhs, 1e-14).map_err(|_| Error::NoConvergence("least-squares fit of the square-norm profile"))?;

    // Monic polynomial in t: roots t_k, then b_k = mid + half t_k.
    let lead_t = coef_t[n];
    if lead_t == 0.0 {
        return Err(Error::NoConvergence("square-norm profile has vanishing leading coefficient"));
    }
    let monic: Vec<f64> = (0..n).map(|c| coef_t[c] / lead_t).collect();
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for r in 1..n {
        companion[(r, r - 1)] = 1.0;
    }
    for r in 0..n {
        companion[(r, n - 1)] = -monic[r];
    }
    let eig = companion.complex_eigenvalues();
    let mut pairs: Vec<(f64, f64)> = eig.iter().map(|z| (mid + half * z.re, half * z.im)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let roots: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let roots_imag: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let kappa = lead_t / half.powi(n as i32);

    let peak = samples.iter().map(|s| 0.25 * s.2 * s.2).fold(0.0, f64::max);
    let residual = samples
        .iter()
        .map(|s| {
            let t = (s.1 - mid) / half;
            let fit: f64 = (0..=n).map(|c| coef_t[c] * t.powi(c as i32)).sum();
            (fit - 0.25 * s.2 * s.2).abs()
        })
        .fold(0.0, f64::max)
        / peak.max(f64::MIN_POSITIVE);

    let shift = roots.iter().sum::<f64>() / n as f64;
    let centered_roots = roots.iter().map(|r| r - shift).collect();
    Ok(WeierstrassProfile { samples, degenerate, kappa, roots, roots_imag, shift, centered_roots, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, IntegratorConfig};

    #[test]
    fn mahler_first_integrals_at_ic() {
        let (m, n) = (0.3, 0.2);
        let p = EesParams::mahler4(m, n).unwrap();
        let c = first_integrals(&p, &[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(0, 2), 1.0);
        assert_eq!(c.get(0, 3), 1.0);
        assert!((c.get(1, 2) - (m - 1.0)).abs() < 1e-15);
        assert!((c.get(1, 3) - (n - 1.0)).abs() < 1e-15);
        assert!((c.get(2, 3) - (n - m)).abs() < 1e-15);
        for i in 0..4 {
            assert_eq!(c.get(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(c.get(i, j), -c.get(j, i));
            }
        }
    }

    #[test]
    fn zero_state_has_zero_integrals() {
        let p = EesParams::new(vec![1.0, 2.0, -3.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(first_integrals(&p, &[0.0; 3]).unwrap().max_abs(), 0.0);
        assert!(matches!(first_integrals(&p, &[0.0; 2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn integrals_constant_along_trajectory() {
        let p = EesParams::new(vec![1.0, -1.0, 2.0, -0.5], vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 10.0)).unwrap();
        let c0 = first_integrals(&p, p.ic()).unwrap();
        for k in 0..10 {
            let v = 1.0 + k as f64 * 0.9;
            let c = first_integrals(&p, &traj.eval(v).unwrap()).unwrap();
            assert!(c.relative_drift(&c0) < 1e-10);
        }
    }

    #[test]
    fn equilibria_counts() {
        let count = |n: usize| equilibria(&EesParams::new(vec![1.0; n], vec![0.0; n]).unwrap()).len();
        assert_eq!(count(2), 1);
        assert_eq!(count(3), 1 + 3);
        assert_eq!(count(4), 1 + 4 + 6);
        assert_eq!(count(5), 1 + 5 + 10 + 10);
        let sets = equilibria(&EesParams::new(vec![1.0; 4], vec![0.0; 4]).unwrap());
        assert!(sets[0].is_origin());
        assert!(sets.iter().all(|s| s.support.len() <= 2));
    }

    #[test]
    fn equilibrium_points_have_zero_rhs() {
        let p = EesParams::new(vec![1.3, -0.7, 2.0, -0.5, 0.25], vec![0.0; 5]).unwrap();
        for set in equilibria(&p) {
            let point: Vec<f64> =
                (0..5).map(|i| if set.support.contains(&i) { 0.37 + i as f64 } else { 0.0 }).collect();
            assert!(set.contains(&point));
            assert!(p.rhs(&point).unwrap().iter().all(|x| *x == 0.0), "{set:?}");
        }
    }

    #[test]
    fn normalize_example() {
        let p = EesParams::new(vec![1.0, -1.0, -0.5], vec![0.0, 1.0, 1.0]).unwrap();
        let norm = normalize(&p).unwrap();
        assert_eq!(norm.norm_sq, 2.0);
        // Σα = −0.5: c = (2, −2 + 0.5, −1 + 0.5).
        assert_eq!(norm.c, vec![2.0, -1.5, -0.5]);
        assert!(norm.c.iter().sum::<f64>().abs() < 1e-15);
        assert_eq!(norm.regularization_exponent, -1);
        assert!(normalize(&p.with_ic(vec![0.0; 3]).unwrap()).is_err());
    }

    #[test]
    fn normalized_flow_stays_on_sphere() {
        let p = EesParams::new(vec![1.0, -1.0, 2.0, -0.5, 0.7], vec![0.3, 1.0, 0.5, 1.2, 0.8]).unwrap();
        let norm = normalize(&p).unwrap();
        let sys = norm.as_ees().unwrap();
        let traj = integrate(&sys, &IntegratorConfig::new(0.0, 5.0)).unwrap();
        for (_, y) in traj.nodes() {
            let r: f64 = y.iter().map(|x| x * x).sum();
            assert!((r - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn glashier_mahler_pivot_four() {
        let (m, n) = (0.8, 0.1);
        let p = EesParams::mahler4(m, n).unwrap();
        let r = glashier_reduce(&p, 3).unwrap();
        assert_eq!(r.alphas(), &[1.0, n - 1.0, n - m]);
        assert_eq!(r.ic(), &[0.0, 1.0, 1.0]);
        assert!(glashier_reduce(&p, 0).is_err());
    }

    #[test]
    fn glashier_ratios_satisfy_reduced_system() {
        let p = EesParams::new(vec![1.0, -1.0, 2.0, -0.5], vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 4.0)).unwrap();
        let reduced = glashier_reduce(&p, 3).unwrap();
        let h = 1e-4;
        for k in 1..20 {
            let v = 0.2 * k as f64;
            let ratios = |v: f64| {
                let w = traj.eval(v).unwrap();
                [w[0] / w[3], w[1] / w[3], w[2] / w[3]]
            };
            let (up, dn, mid) = (ratios(v + h), ratios(v - h), ratios(v));
            let rhs = reduced.rhs(&mid).unwrap();
            for i in 0..3 {
                let fd = (up[i] - dn[i]) / (2.0 * h);
                assert!((fd - rhs[i]).abs() < 1e-6, "v={v} i={i}");
            }
        }
    }

    #[test]
    fn glashier_reduction_reproduces_ratios() {
        let p = EesParams::new(vec![1.0, -1.0, 2.0, -0.5], vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let parent = integrate(&p, &IntegratorConfig::new(0.0, 5.0)).unwrap();
        let reduced = integrate(&glashier_reduce(&p, 3).unwrap(), &IntegratorConfig::new(0.0, 5.0)).unwrap();
        for k in 0..=50 {
            let v = 0.1 * k as f64;
            let w = parent.eval(v).unwrap();
            if w[3].abs() < 0.1 {
                continue;
            }
            let u = reduced.eval(v).unwrap();
            for i in 0..3 {
                assert!((u[i] - w[i] / w[3]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scaling_identity() {
        let p = EesParams::mahler4(0.8, 0.1).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 3.0)).unwrap();
        let same = scale_solution(&traj, 1.0).unwrap();
        assert_eq!(same.eval(1.3).unwrap(), traj.eval(1.3).unwrap());
        assert!(scale_solution(&traj, 0.0).is_err());

        let scaled = scale_solution(&traj, 2.0).unwrap();
        assert_eq!(scaled.span(), (0.0, 0.75));
        let direct = integrate(scaled.params(), &IntegratorConfig::new(0.0, 0.75)).unwrap();
        for k in 0..=30 {
            let v = 0.025 * k as f64;
            let a = scaled.eval(v).unwrap();
            let b = direct.eval(v).unwrap();
            for i in 0..4 {
                assert!((a[i] - b[i]).abs() < 1e-9);
            }
        }
        let u = scaled.eval(0.5).unwrap();
        let w = traj.eval(2.0).unwrap();
        for i in 0..4 {
            assert!((u[i] - 2.0 * w[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn scaling_by_minus_one_reverses_time_for_n3() {
        let p = EesParams::new(vec![1.0, -1.0, -0.5], vec![0.2, 1.0, 1.0]).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 2.0)).unwrap();
        let flipped = scale_solution(&traj, -1.0).unwrap();
        for k in 0..=20 {
            let v = -0.1 * k as f64;
            let u = flipped.eval(v).unwrap();
            let w = traj.eval(-v).unwrap();
            for i in 0..3 {
                assert_eq!(u[i], -w[i]);
            }
        }
        let direct = integrate(flipped.params(), &IntegratorConfig::new(0.0, -1.5)).unwrap();
        let u = flipped.eval(-1.5).unwrap();
        let d = direct.eval(-1.5).unwrap();
        for i in 0..3 {
            assert!((u[i] - d[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn straight_line_detection() {
        // Equal coefficients with equal components keep all C_ij zero.
        assert!(EesParams::new(vec![1.0, 1.0, 1.0], vec![0.5, 0.5, 0.5]).unwrap().is_straight_line());
        assert!(!EesParams::mahler4(0.5, 0.1).unwrap().is_straight_line());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p = EesParams::from_json(r#"{"alphas":[1,-1,2,-0.5],"ic":[0,1,1,1]}"#).unwrap();
        assert_eq!(p.dimension(), 4);
        assert_eq!(EesParams::from_json(&p.to_json()).unwrap(), p);
        assert!(EesParams::from_json(r#"{"alphas":[1,-1],"ic":[0]}"#).is_err());
        assert!(EesParams::from_json(r#"{"alphas":[1],"ic":[0]}"#).is_err());
    }

    #[test]
    fn csv_export_header() {
        let p = EesParams::new(vec![1.0, -1.0], vec![0.0, 1.0]).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 1.0)).unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("v,omega1,omega2,drift\n"));
        assert_eq!(csv.lines().count(), traj.nodes().len() + 1);
    }

    #[test]
    fn weierstrass_degenerate_on_equilibrium() {
        let p = EesParams::new(vec![1.0, -1.0, -0.5], vec![0.0, 0.0, 1.0]).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 5.0)).unwrap();
        assert!(weierstrass_profile(&traj).unwrap().degenerate);
    }

    #[test]
    fn weierstrass_jacobi_cubic() {
        let m = 0.5;
        let p = EesParams::new(vec![1.0, -1.0, -m], vec![0.0, 1.0, 1.0]).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 8.0)).unwrap();
        let prof = weierstrass_profile(&traj).unwrap();
        assert!(!prof.degenerate);
        assert!(prof.residual < 1e-8, "{}", prof.residual);
        // Ω = 2 − m sn²: (Ω')² = −4 (Ω − 1)(Ω − 2 + m)(Ω − 2).
        let expected = [1.0, 2.0 - m, 2.0];
        for (b, e) in prof.roots.iter().zip(expected) {
            assert!((b - e).abs() < 1e-6, "{:?}", prof.roots);
        }
        assert!((prof.kappa + 1.0).abs() < 1e-6);
        assert!(prof.centered_sum().abs() < 1e-12);
    }

    #[test]
    fn weierstrass_mahler_profile() {
        let p = EesParams::mahler4(0.8, 0.1).unwrap();
        let traj = integrate(&p, &IntegratorConfig::new(0.0, 10.0)).unwrap();
        let prof = weierstrass_profile(&traj).unwrap();
        assert!(prof.residual < 1e-6, "{}", prof.residual);
        assert!(prof.centered_sum().abs() < 1e-6);
        let (kappa, roots) = weierstrass_roots_from_integrals(&p).unwrap();
        assert!((prof.kappa - kappa).abs() < 1e-6 * kappa.abs());
        for (b, e) in prof.roots.iter().zip(&roots) {
            assert!((b - e).abs() < 1e-5 * (1.0 + e.abs()), "{:?} vs {:?}", prof.roots, roots);
        }
    }
}
