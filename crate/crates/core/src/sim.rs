//! Trajectory integration with conservation monitoring.
//!
//! Two integrators: classic fixed-step RK4 and the Dormand-Prince 5(4)
//! embedded pair with standard step-size control. Every accepted step is
//! reported as a [`TrajectoryRecord`] carrying the value of each first
//! integral and its relative drift from the initial value.
//!
//! Coordinate hyperplanes are invariant, so a coordinate dropping below the
//! positivity floor can only be numerical error; integration stops there
//! with [`SimError::PositivityBreached`] instead of continuing silently.

use thiserror::Error;

use crate::darboux::{integral_basis, DarbouxError, FirstIntegral, IntegralBasis};
use crate::model::CyclicLVSystem;

pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-12;
const DRIFT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("expected an initial state of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("initial coordinate x_{index} = {value} is not strictly positive")]
    NonPositiveInitialState { index: usize, value: f64 },
    #[error("adaptive step {step:e} fell below the minimum at t = {t}")]
    StepUnderflow { t: f64, step: f64 },
    #[error("coordinate x_{index} fell below the positivity floor at t = {t}")]
    PositivityBreached { t: f64, index: usize },
    #[error("drift not measurable: {0}")]
    NotMeasurable(String),
    #[error(transparent)]
    Integral(#[from] DarbouxError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4Fixed,
    AdaptiveRk45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub step: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_step: f64,
    pub positivity_floor: f64,
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_end: f64) -> Self {
        Self {
            method: Method::Rk4Fixed,
            step,
            t_end,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            min_step: 1e-12,
            positivity_floor: DEFAULT_POSITIVITY_FLOOR,
        }
    }

    pub fn rk45(t_end: f64, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            method: Method::AdaptiveRk45,
            step: 1e-3,
            rel_tol,
            abs_tol,
            ..Self::rk4(1e-3, t_end)
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.step) {
            return Err(SimError::InvalidConfig("step must be positive"));
        }
        if !pos(self.t_end) {
            return Err(SimError::InvalidConfig("t_end must be positive"));
        }
        if !self.positivity_floor.is_finite() || self.positivity_floor < 0.0 {
            return Err(SimError::InvalidConfig(
                "positivity floor must be non-negative",
            ));
        }
        if self.method == Method::AdaptiveRk45
            && !(pos(self.rel_tol) && pos(self.abs_tol) && pos(self.min_step))
        {
            return Err(SimError::InvalidConfig(
                "tolerances and min_step must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub integral_values: Vec<f64>,
    /// `|H(t) - H(0)| / max(|H(0)|, floor)` per integral.
    pub relative_drift: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub accepted_steps: usize,
    pub t_final: f64,
    pub max_drift: Vec<f64>,
}

struct Monitor {
    integrals: Vec<FirstIntegral>,
    initial: Vec<f64>,
    max_drift: Vec<f64>,
}

impl Monitor {
    fn new(basis: &IntegralBasis, x0: &[f64]) -> Result<Self, SimError> {
        let integrals = basis.integrals();
        let initial = integrals
            .iter()
            .map(|h| h.evaluate(x0))
            .collect::<Result<Vec<_>, _>>()?;
        let max_drift = vec![0.0; integrals.len()];
        Ok(Self {
            integrals,
            initial,
            max_drift,
        })
    }

    fn record(&mut self, t: f64, x: &[f64]) -> Result<TrajectoryRecord, SimError> {
        let mut values = Vec::with_capacity(self.integrals.len());
        let mut drift = Vec::with_capacity(self.integrals.len());
        for (j, h) in self.integrals.iter().enumerate() {
            let v = h.evaluate(x)?;
            let d = (v - self.initial[j]).abs() / self.initial[j].abs().max(DRIFT_FLOOR);
            self.max_drift[j] = self.max_drift[j].max(d);
            values.push(v);
            drift.push(d);
        }
        Ok(TrajectoryRecord {
            t,
            x: x.to_vec(),
            integral_values: values,
            relative_drift: drift,
        })
    }
}

/// Runs the integration, handing each record (including `t = 0`) to
/// `on_record` as soon as its step is accepted. On error, every record
/// produced so far has already been delivered.
pub fn integrate_streaming<F>(
    sys: &CyclicLVSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
    basis: &IntegralBasis,
    mut on_record: F,
) -> Result<RunSummary, SimError>
where
    F: FnMut(&TrajectoryRecord),
{
    cfg.validate()?;
    let n = sys.n();
    if x0.len() != n {
        return Err(SimError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if let Some(i) = x0.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(SimError::NonPositiveInitialState {
            index: i + 1,
            value: x0[i],
        });
    }
    let mut monitor = Monitor::new(basis, x0)?;
    on_record(&monitor.record(0.0, x0)?);

    let mut stepper = Stepper::new(sys);
    let mut x = x0.to_vec();
    let mut accepted = 0usize;
    let mut t = 0.0;

    let mut accept = |t: f64, x: &[f64], monitor: &mut Monitor| -> Result<(), SimError> {
        if let Some(i) = x
            .iter()
            .position(|&v| v.is_nan() || v < cfg.positivity_floor || v <= 0.0)
        {
            return Err(SimError::PositivityBreached { t, index: i + 1 });
        }
        on_record(&monitor.record(t, x)?);
        Ok(())
    };

    match cfg.method {
        Method::Rk4Fixed => {
            let steps = ((cfg.t_end / cfg.step) - 1e-9).ceil().max(1.0) as usize;
            let mut next = vec![0.0; n];
            for i in 1..=steps {
                let t_next = if i == steps {
                    cfg.t_end
                } else {
                    i as f64 * cfg.step
                };
                stepper.rk4(&x, t_next - t, &mut next);
                std::mem::swap(&mut x, &mut next);
                t = t_next;
                accept(t, &x, &mut monitor)?;
                accepted += 1;
            }
        }
        Method::AdaptiveRk45 => {
            let mut h = cfg.step.min(cfg.t_end);
            let mut next = vec![0.0; n];
            let mut err = vec![0.0; n];
            while t < cfg.t_end {
                let last = t + h >= cfg.t_end;
                let h_try = if last { cfg.t_end - t } else { h };
                stepper.dopri(&x, h_try, &mut next, &mut err);
                let norm = error_norm(&x, &next, &err, cfg.rel_tol, cfg.abs_tol);
                let factor = if norm == 0.0 {
                    5.0
                } else {
                    (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                if norm <= 1.0 && next.iter().all(|v| v.is_finite()) {
                    t = if last { cfg.t_end } else { t + h_try };
                    std::mem::swap(&mut x, &mut next);
                    accept(t, &x, &mut monitor)?;
                    accepted += 1;
                    // a clipped final step says nothing about the natural step size
                    if !last {
                        h = h_try * factor;
                    }
                } else {
                    h = h_try * factor.min(1.0);
                    if h < cfg.min_step {
                        return Err(SimError::StepUnderflow { t, step: h });
                    }
                }
            }
        }
    }

    Ok(RunSummary {
        accepted_steps: accepted,
        t_final: t,
        max_drift: monitor.max_drift,
    })
}

pub fn integrate(
    sys: &CyclicLVSystem,
    x0: &[f64],
    cfg: &IntegratorConfig,
    basis: &IntegralBasis,
) -> Result<Vec<TrajectoryRecord>, SimError> {
    let mut out = Vec::new();
    integrate_streaming(sys, x0, cfg, basis, |r| out.push(r.clone()))?;
    Ok(out)
}

fn error_norm(x: &[f64], next: &[f64], err: &[f64], rtol: f64, atol: f64) -> f64 {
    let sum: f64 = x
        .iter()
        .zip(next)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / x.len() as f64).sqrt()
}

/// Estimated order of convergence `ln(d(h1)/d(h2)) / ln(h1/h2)` of the
/// maximum relative drift of `H1 = x_1 + ... + x_n`.
pub fn convergence_order(
    sys: &CyclicLVSystem,
    x0: &[f64],
    t_end: f64,
    steps: (f64, f64),
) -> Result<f64, SimError> {
    convergence_order_of(sys, x0, t_end, steps, 0)
}

/// As [`convergence_order`] for the integral at position `which` of the
/// basis (0 is `H1`, then the monomial integrals in order).
pub fn convergence_order_of(
    sys: &CyclicLVSystem,
    x0: &[f64],
    t_end: f64,
    steps: (f64, f64),
    which: usize,
) -> Result<f64, SimError> {
    let (h1, h2) = steps;
    if !(h1 > 0.0 && h2 > 0.0 && h1 != h2) {
        return Err(SimError::InvalidConfig(
            "convergence needs two distinct positive steps",
        ));
    }
    let basis = integral_basis(sys);
    if which >= basis.len() {
        return Err(SimError::NotMeasurable(format!(
            "basis has {} integrals, requested index {which}",
            basis.len()
        )));
    }
    let drift = |h: f64| -> Result<f64, SimError> {
        let cfg = IntegratorConfig::rk4(h, t_end);
        let summary = integrate_streaming(sys, x0, &cfg, &basis, |_| {})?;
        Ok(summary.max_drift[which])
    };
    let (d1, d2) = (drift(h1)?, drift(h2)?);
    let finest = (t_end / h1.min(h2)).ceil();
    let floor = roundoff_drift_floor(finest);
    if !(d1 > floor && d2 > floor) {
        return Err(SimError::NotMeasurable(format!(
            "drifts {d1:e} and {d2:e} are within roundoff (floor {floor:e})"
        )));
    }
    let order = (d1 / d2).ln() / (h1 / h2).ln();
    if !order.is_finite() {
        return Err(SimError::NotMeasurable(format!(
            "ratio of {d1:e} and {d2:e} is not finite"
        )));
    }
    Ok(order)
}

/// Drifts at or below this are treated as roundoff: 100 machine epsilons.
pub const MEASURABLE_DRIFT: f64 = 100.0 * f64::EPSILON;

/// [`MEASURABLE_DRIFT`] grown like a random walk over `steps` roundings.
pub fn roundoff_drift_floor(steps: f64) -> f64 {
    MEASURABLE_DRIFT * steps.max(1.0).sqrt()
}

/// Scratch buffers for the stage evaluations.
struct Stepper<'a> {
    sys: &'a CyclicLVSystem,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

// Dormand-Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl<'a> Stepper<'a> {
    fn new(sys: &'a CyclicLVSystem) -> Self {
        let n = sys.n();
        Self {
            sys,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    fn stage(&mut self, out: usize, x: &[f64], h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..x.len() {
            let mut acc = 0.0;
            for &(s, a) in coeffs {
                acc += a * self.k[s][i];
            }
            self.tmp[i] = x[i] + h * acc;
        }
        let (tmp, k) = (&self.tmp, &mut self.k[out]);
        self.sys.vector_field_into(tmp, k);
    }

    fn rk4(&mut self, x: &[f64], h: f64, out: &mut [f64]) {
        self.sys.vector_field_into(x, &mut self.k[0]);
        self.stage(1, x, h, &[(0, 0.5)]);
        self.stage(2, x, h, &[(1, 0.5)]);
        self.stage(3, x, h, &[(2, 1.0)]);
        let k = &self.k;
        for i in 0..x.len() {
            out[i] = x[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
    }

    fn dopri(&mut self, x: &[f64], h: f64, out: &mut [f64], err: &mut [f64]) {
        self.sys.vector_field_into(x, &mut self.k[0]);
        self.stage(1, x, h, &[(0, A21)]);
        self.stage(2, x, h, &[(0, A31), (1, A32)]);
        self.stage(3, x, h, &[(0, A41), (1, A42), (2, A43)]);
        self.stage(4, x, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        self.stage(5, x, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        let k = &self.k;
        for i in 0..x.len() {
            out[i] = x[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        let (k, out_ref) = (&mut self.k, &*out);
        self.sys.vector_field_into(out_ref, &mut k[6]);
        let k = &self.k;
        for i in 0..x.len() {
            err[i] = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
        }
    }
}
