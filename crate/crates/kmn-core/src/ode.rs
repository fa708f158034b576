//! Adaptive embedded Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! Small fixed-dimension systems only; the PDE time stepping in [`crate::solver`]
//! uses its own classical RK4. Step size is controlled by the usual mixed
//! absolute/relative error norm with PI-free 0.9 safety scaling.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("state became non-finite at x = {0}")]
    NonFinite(f64),
    #[error("step size underflow at x = {0} (stiff or singular right-hand side)")]
    StepUnderflow(f64),
    #[error("exceeded {0} steps")]
    TooManySteps(usize),
    #[error("sample abscissae must be monotone")]
    BadSamples,
    #[error("right-hand side error: {0}")]
    Rhs(String),
}

/// Tolerances and limits for [`integrate_to`] / [`sample_path`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order weights (same as the last A row: FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Right-hand side contract: fill `dydx` from `(x, y)`; `Err(msg)` aborts.
pub trait OdeRhs {
    fn eval(&self, x: f64, y: &[f64], dydx: &mut [f64]) -> Result<(), String>;
}

impl<F: Fn(f64, &[f64], &mut [f64]) -> Result<(), String>> OdeRhs for F {
    fn eval(&self, x: f64, y: &[f64], dydx: &mut [f64]) -> Result<(), String> {
        self(x, y, dydx)
    }
}

struct Stepper<'a, R: OdeRhs> {
    rhs: &'a R,
    k: Vec<Vec<f64>>,
    ytmp: Vec<f64>,
    y4: Vec<f64>,
}

impl<'a, R: OdeRhs> Stepper<'a, R> {
    fn new(rhs: &'a R, dim: usize) -> Self {
        Stepper {
            rhs,
            k: vec![vec![0.0; dim]; 7],
            ytmp: vec![0.0; dim],
            y4: vec![0.0; dim],
        }
    }

    /// One trial step from `(x, y)` with size `h`; on acceptance writes the
    /// 5th-order solution into `y` and returns the scaled error norm.
    fn attempt(&mut self, x: f64, y: &mut [f64], h: f64, opt: &OdeOptions) -> Result<f64, OdeError> {
        let dim = y.len();
        self.rhs
            .eval(x, y, &mut self.k[0])
            .map_err(OdeError::Rhs)?;
        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in self.k.iter().enumerate().take(stage + 1) {
                    acc += A[stage][j] * kj[i];
                }
                self.ytmp[i] = y[i] + h * acc;
            }
            let (head, tail) = self.k.split_at_mut(stage + 1);
            let _ = head;
            self.rhs
                .eval(x + C[stage] * h, &self.ytmp, &mut tail[0])
                .map_err(OdeError::Rhs)?;
        }
        let mut err_norm = 0.0f64;
        for i in 0..dim {
            let mut y5 = 0.0;
            let mut y4 = 0.0;
            for j in 0..7 {
                y5 += B5[j] * self.k[j][i];
                y4 += B4[j] * self.k[j][i];
            }
            let y5 = y[i] + h * y5;
            let y4 = y[i] + h * y4;
            self.y4[i] = y5;
            let scale = opt.atol + opt.rtol * y[i].abs().max(y5.abs());
            let e = (y5 - y4) / scale;
            err_norm += e * e;
        }
        let err_norm = (err_norm / dim as f64).sqrt();
        if err_norm <= 1.0 {
            y.copy_from_slice(&self.y4);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(OdeError::NonFinite(x));
            }
        }
        Ok(err_norm)
    }
}

fn initial_step(span: f64) -> f64 {
    (span.abs() * 1e-3).max(1e-10)
}

/// Integrate from `(x0, y0)` to `x1`, returning the final state.
pub fn integrate_to<R: OdeRhs>(
    rhs: &R,
    x0: f64,
    y0: &[f64],
    x1: f64,
    opt: &OdeOptions,
) -> Result<Vec<f64>, OdeError> {
    let mut y = y0.to_vec();
    drive(rhs, x0, &mut y, x1, opt)?;
    Ok(y)
}

/// Integrate with dense recording: returns the state at each abscissa in
/// `xs`, which must be monotone starting from `x0`'s side.
pub fn sample_path<R: OdeRhs>(
    rhs: &R,
    x0: f64,
    y0: &[f64],
    xs: &[f64],
    opt: &OdeOptions,
) -> Result<Vec<Vec<f64>>, OdeError> {
    let mut y = y0.to_vec();
    let mut x = x0;
    let mut out = Vec::with_capacity(xs.len());
    let dir = if xs.last().copied().unwrap_or(x0) >= x0 { 1.0 } else { -1.0 };
    for w in xs.windows(2) {
        if (w[1] - w[0]) * dir < 0.0 {
            return Err(OdeError::BadSamples);
        }
    }
    for &target in xs {
        if (target - x) * dir < -1e-13 * (1.0 + x.abs()) {
            return Err(OdeError::BadSamples);
        }
        drive(rhs, x, &mut y, target, opt)?;
        x = target;
        out.push(y.clone());
    }
    Ok(out)
}

fn drive<R: OdeRhs>(
    rhs: &R,
    x0: f64,
    y: &mut [f64],
    x1: f64,
    opt: &OdeOptions,
) -> Result<(), OdeError> {
    if x0 == x1 {
        return Ok(());
    }
    let dir = (x1 - x0).signum();
    let mut x = x0;
    let mut h = initial_step(x1 - x0) * dir;
    let mut stepper = Stepper::new(rhs, y.len());
    let h_min = 1e-14 * (x1 - x0).abs().max(1.0);
    for _ in 0..opt.max_steps {
        if (x1 - x) * dir <= 0.0 {
            return Ok(());
        }
        if (h * dir) > (x1 - x) * dir {
            h = x1 - x;
        }
        let err = stepper.attempt(x, y, h, opt)?;
        if err <= 1.0 {
            x += h;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < h_min {
                return Err(OdeError::StepUnderflow(x));
            }
        }
    }
    Err(OdeError::TooManySteps(opt.max_steps))
}
