//! Adaptive explicit Runge–Kutta integration with dense output.
//!
//! The stepper is the Dormand–Prince 8(5,3) pair with its 7th-order
//! continuous extension. It is the independent reference against which
//! every closed-form evaluation path in the crate is checked.

mod tableau;

use crate::ees::{EesParams, FirstIntegralMatrix, Trajectory};
use crate::error::{Error, Result};

use tableau::{A, B, C, D, E3, E5, INTERPOLATOR_POWER, N_STAGES, N_STAGES_EXTENDED};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const MAX_STEPS: usize = 2_000_000;

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub span: (f64, f64),
}

impl IntegratorConfig {
    pub fn new(v_start: f64, v_end: f64) -> Self {
        IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, max_step: f64::INFINITY, span: (v_start, v_end) }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::domain("integrator tolerances must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::domain("max_step must be positive"));
        }
        let (a, b) = self.span;
        if !(a.is_finite() && b.is_finite()) || a == b {
            return Err(Error::domain("integration span must be finite and non-degenerate"));
        }
        Ok(())
    }
}

/// Bookkeeping from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeReport {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Maximum relative first-integral drift, when the system has any.
    pub max_drift: Option<f64>,
    pub dense_output: bool,
}

#[derive(Debug, Clone)]
struct Step {
    t_old: f64,
    h: f64,
    y_old: Vec<f64>,
    // INTERPOLATOR_POWER rows of length dim, row-major.
    coeffs: Vec<f64>,
}

/// Piecewise-polynomial solution of an initial value problem.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    t0: f64,
    y0: Vec<f64>,
    t_end: f64,
    steps: Vec<Step>,
    y_end: Vec<f64>,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Span `(start, end)` in integration order (end may be below start).
    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t_end)
    }

    /// Node abscissae, including both endpoints.
    pub fn node_times(&self) -> Vec<f64> {
        let mut ts = Vec::with_capacity(self.steps.len() + 1);
        ts.push(self.t0);
        ts.extend(self.steps.iter().map(|s| s.t_old + s.h));
        ts
    }

    /// Node states, aligned with [`node_times`](Self::node_times).
    pub fn node_states(&self) -> Vec<Vec<f64>> {
        let mut ys = Vec::with_capacity(self.steps.len() + 1);
        ys.push(self.y0.clone());
        for w in self.steps.windows(2) {
            ys.push(w[1].y_old.clone());
        }
        if !self.steps.is_empty() {
            ys.push(self.y_end.clone());
        }
        ys
    }

    pub fn final_state(&self) -> &[f64] {
        &self.y_end
    }

    fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t_end { (self.t0, self.t_end) } else { (self.t_end, self.t0) };
        t >= lo && t <= hi
    }

    /// Interpolated state at `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !self.contains(t) {
            let (lo, hi) = if self.t0 <= self.t_end { (self.t0, self.t_end) } else { (self.t_end, self.t0) };
            return Err(Error::OutsideSpan { v: t, start: lo, end: hi });
        }
        if t == self.t0 {
            return Ok(self.y0.clone());
        }
        let forward = self.t_end > self.t0;
        // First step whose right end reaches t.
        let idx = self.steps.partition_point(|s| {
            let right = s.t_old + s.h;
            if forward {
                right < t
            } else {
                right > t
            }
        });
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        if t == step.t_old + step.h {
            return Ok(if idx + 1 < self.steps.len() { self.steps[idx + 1].y_old.clone() } else { self.y_end.clone() });
        }
        let x = (t - step.t_old) / step.h;
        let mut y = vec![0.0; self.dim];
        for (i, row) in step.coeffs.chunks(self.dim).rev().enumerate() {
            let factor = if i % 2 == 0 { x } else { 1.0 - x };
            for (yk, fk) in y.iter_mut().zip(row) {
                *yk = (*yk + fk) * factor;
            }
        }
        for (yk, y0) in y.iter_mut().zip(&step.y_old) {
            *yk += y0;
        }
        Ok(y)
    }
}

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum();
    (s / v.len() as f64).sqrt()
}

fn initial_step<F>(rhs: &mut F, t0: f64, y0: &[f64], f0: &[f64], direction: f64, cfg: &IntegratorConfig) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let scale: Vec<f64> = y0.iter().map(|y| cfg.abs_tol + y.abs() * cfg.rel_tol).collect();
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * direction * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    rhs(t0 + h0 * direction, &y1, &mut f1);
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 8.0) };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

/// Integrates `y' = rhs(t, y)` from `y0` over `cfg.span`.
///
/// `rhs(t, y, out)` writes the derivative into `out`.
pub fn solve<F>(mut rhs: F, y0: &[f64], cfg: &IntegratorConfig) -> Result<(DenseSolution, OdeReport)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    cfg.validate()?;
    let n = y0.len();
    if y0.iter().any(|y| !y.is_finite()) {
        return Err(Error::domain("initial state must be finite"));
    }
    let (t0, t_end) = cfg.span;
    let direction = (t_end - t0).signum();
    let mut report = OdeReport { dense_output: true, ..OdeReport::default() };

    let mut k = vec![vec![0.0; n]; N_STAGES_EXTENDED];
    let mut f = vec![0.0; n];
    rhs(t0, y0, &mut f);
    report.evaluations += 1;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h_abs = initial_step(&mut rhs, t0, y0, &f, direction, cfg);
    report.evaluations += 1;
    let mut steps = Vec::new();
    let mut y_new = vec![0.0; n];
    let mut f_new = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut scale = vec![0.0; n];
    let mut err5 = vec![0.0; n];
    let mut err3 = vec![0.0; n];

    while direction * (t_end - t) > 0.0 {
        if steps.len() >= MAX_STEPS {
            return Err(Error::NoConvergence("ODE integration step budget"));
        }
        let min_step = 10.0 * (next_toward(t, direction) - t).abs();
        h_abs = h_abs.min(cfg.max_step).max(min_step);
        let mut rejected_once = false;
        let h = loop {
            if h_abs < min_step {
                return Err(Error::StepSizeUnderflow { v: t });
            }
            let mut h = h_abs * direction;
            let mut t_new = t + h;
            if direction * (t_new - t_end) > 0.0 {
                t_new = t_end;
            }
            h = t_new - t;
            h_abs = h.abs();

            // Stages.
            k[0].copy_from_slice(&f);
            for s in 1..N_STAGES {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    tmp[i] = y[i] + h * acc;
                }
                let (_, tail) = k.split_at_mut(s);
                rhs(t + C[s] * h, &tmp, &mut tail[0]);
            }
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(N_STAGES) {
                    acc += B[j] * kj[i];
                }
                y_new[i] = y[i] + h * acc;
            }
            rhs(t + h, &y_new, &mut f_new);
            report.evaluations += N_STAGES;
            k[N_STAGES].copy_from_slice(&f_new);

            let finite = y_new.iter().all(|v| v.is_finite()) && f_new.iter().all(|v| v.is_finite());
            let error_norm = if finite {
                for i in 0..n {
                    scale[i] = cfg.abs_tol + y[i].abs().max(y_new[i].abs()) * cfg.rel_tol;
                    let mut e5 = 0.0;
                    let mut e3 = 0.0;
                    for (j, kj) in k.iter().enumerate().take(N_STAGES + 1) {
                        e5 += E5[j] * kj[i];
                        e3 += E3[j] * kj[i];
                    }
                    err5[i] = e5 / scale[i];
                    err3[i] = e3 / scale[i];
                }
                let n5: f64 = err5.iter().map(|e| e * e).sum();
                let n3: f64 = err3.iter().map(|e| e * e).sum();
                if n5 == 0.0 && n3 == 0.0 {
                    0.0
                } else {
                    h_abs * n5 / ((n5 + 0.01 * n3) * n as f64).sqrt()
                }
            } else {
                f64::INFINITY
            };

            if error_norm < 1.0 {
                let mut factor =
                    if error_norm == 0.0 { MAX_FACTOR } else { MAX_FACTOR.min(SAFETY * error_norm.powf(-1.0 / 8.0)) };
                if rejected_once {
                    factor = factor.min(1.0);
                }
                h_abs *= factor;
                break h;
            }
            let factor =
                if error_norm.is_finite() { MIN_FACTOR.max(SAFETY * error_norm.powf(-1.0 / 8.0)) } else { MIN_FACTOR };
            h_abs *= factor;
            rejected_once = true;
            report.rejected += 1;
        };

        // Extra stages for the continuous extension.
        for s in (N_STAGES + 1)..N_STAGES_EXTENDED {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            let (_, tail) = k.split_at_mut(s);
            rhs(t + C[s] * h, &tmp, &mut tail[0]);
        }
        report.evaluations += N_STAGES_EXTENDED - N_STAGES - 1;

        let mut coeffs = vec![0.0; INTERPOLATOR_POWER * n];
        for i in 0..n {
            let dy = y_new[i] - y[i];
            coeffs[i] = dy;
            coeffs[n + i] = h * f[i] - dy;
            coeffs[2 * n + i] = 2.0 * dy - h * (f_new[i] + f[i]);
            for (r, drow) in D.iter().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += drow[j] * kj[i];
                }
                coeffs[(3 + r) * n + i] = h * acc;
            }
        }
        steps.push(Step { t_old: t, h, y_old: y.clone(), coeffs });
        report.steps += 1;

        t += h;
        if direction * (t - t_end) >= 0.0 {
            t = t_end;
        }
        y.copy_from_slice(&y_new);
        f.copy_from_slice(&f_new);
    }

    let solution = DenseSolution { dim: n, t0, y0: y0.to_vec(), t_end, steps, y_end: y };
    Ok((solution, report))
}

fn next_toward(t: f64, direction: f64) -> f64 {
    if direction > 0.0 {
        next_up(t)
    } else {
        -next_up(-t)
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

/// Integrates an N-EES and records its first-integral drift.
pub fn integrate(params: &EesParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let alphas = params.alphas().to_vec();
    let (solution, mut report) = solve(|_, y, out| crate::ees::rhs_into(&alphas, y, out), params.ic(), cfg)?;
    let reference = FirstIntegralMatrix::from_state(params.alphas(), params.ic());
    let drift = solution
        .node_states()
        .iter()
        .map(|state| FirstIntegralMatrix::from_state(params.alphas(), state).relative_drift(&reference))
        .fold(0.0, f64::max);
    report.max_drift = Some(drift);
    Ok(Trajectory::from_solution(params.clone(), solution, drift, report))
}

/// Interpolated state of a trajectory at `v`.
pub fn evaluate_dense(traj: &Trajectory, v: f64) -> Result<Vec<f64>> {
    traj.eval(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> EesParams {
        EesParams::new(vec![1.0, -1.0], vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn harmonic_oscillator_matches_sin_cos() {
        let traj = integrate(&harmonic(), &IntegratorConfig::new(0.0, 10.0)).unwrap();
        for (v, w) in traj.nodes() {
            assert!((w[0] - v.sin()).abs() < 1e-12 && (w[1] - v.cos()).abs() < 1e-12);
        }
        // The interpolant between nodes is slightly less accurate than the steps.
        for i in 0..=200 {
            let v = 10.0 * i as f64 / 200.0;
            let w = traj.eval(v).unwrap();
            assert!((w[0] - v.sin()).abs() < 1e-11, "v={v}");
            assert!((w[1] - v.cos()).abs() < 1e-11, "v={v}");
        }
    }

    #[test]
    fn dense_output_at_nodes_and_midpoints() {
        let traj = integrate(&harmonic(), &IntegratorConfig::new(0.0, 10.0)).unwrap();
        assert_eq!(traj.eval(0.0).unwrap(), vec![0.0, 1.0]);
        let times = traj.solution().node_times();
        let states = traj.solution().node_states();
        for (t, s) in times.iter().zip(&states) {
            assert_eq!(&traj.eval(*t).unwrap(), s);
        }
        for w in times.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let y = traj.eval(mid).unwrap();
            assert!((y[0] - mid.sin()).abs() < 1e-10);
            assert!((y[1] - mid.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn outside_span_is_an_error() {
        let traj = integrate(&harmonic(), &IntegratorConfig::new(0.0, 1.0)).unwrap();
        assert!(matches!(traj.eval(1.5), Err(Error::OutsideSpan { .. })));
        assert!(matches!(traj.eval(-0.1), Err(Error::OutsideSpan { .. })));
    }

    #[test]
    fn backward_integration() {
        let cfg = IntegratorConfig::new(0.0, -3.0);
        let traj = integrate(&harmonic(), &cfg).unwrap();
        let y = traj.eval(-2.0).unwrap();
        assert!((y[0] - (-2f64).sin()).abs() < 1e-12);
    }

    #[test]
    fn blow_up_reports_location() {
        // omega' = omega1 * omega2 with equal positive coefficients blows up at v = 1.
        let p = EesParams::new(vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]).unwrap();
        let err = integrate(&p, &IntegratorConfig::new(0.0, 2.0)).unwrap_err();
        match err {
            Error::StepSizeUnderflow { v } => assert!((v - 1.0).abs() < 1e-3, "v={v}"),
            Error::NoConvergence(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn time_reversal_returns_initial_condition() {
        let p = EesParams::new(vec![1.0, -1.0, 2.0, -0.5], vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let fwd = integrate(&p, &IntegratorConfig::new(0.0, 7.0)).unwrap();
        let end = fwd.solution().final_state().to_vec();
        let back_params = EesParams::new(p.alphas().to_vec(), end).unwrap();
        let back = integrate(&back_params, &IntegratorConfig::new(7.0, 0.0)).unwrap();
        for (a, b) in back.solution().final_state().iter().zip(p.ic()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn tighter_tolerance_does_not_worsen_drift_much() {
        let p = EesParams::new(vec![1.0, -1.0, 2.0, -0.5], vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let mut previous = None;
        for tol in [1e-8, 5e-9, 2.5e-9, 1.25e-9] {
            let cfg = IntegratorConfig::new(0.0, 20.0).with_tolerances(tol, tol * 1e-2);
            let drift = integrate(&p, &cfg).unwrap().drift();
            if let Some(prev) = previous {
                assert!(drift <= 2.0 * prev + 1e-15, "tol={tol} drift={drift} prev={prev}");
            }
            previous = Some(drift);
        }
    }
}
