//! Embedded Dormand–Prince 5(4) integrator with dense output.
//!
//! The right-hand side is fallible: trajectories here can graze surfaces
//! where the field is discontinuous, and a failed stage evaluation is
//! treated like a rejected step (the step is retried at half size until the
//! size underflows). Event localization is left to the caller, who receives
//! every accepted step together with its quartic interpolant.

use crate::error::Error;

/// Integrator tolerances and limits.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Relative tolerance of the embedded error estimate.
    pub rtol: f64,
    /// Absolute tolerance of the embedded error estimate.
    pub atol: f64,
    /// Initial step; estimated automatically when `None`.
    pub h_init: Option<f64>,
    /// Magnitude cap on the step size.
    pub h_max: Option<f64>,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: None,
            max_steps: 50_000_000,
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Dense output at any t inside the step (4th-order interpolant).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let c = &self.cont;
            y[i] =
                c[0][i] + theta * (c[1][i] + th1 * (c[2][i] + theta * (c[3][i] + th1 * c[4][i])));
        }
        y
    }
}

/// Tells the driver whether to keep stepping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Cumulative work counters.
#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub n_rhs: u64,
    pub accepted: u64,
    pub rejected: u64,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
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
// 5th-order weights are row 7 of A (FSAL); the embedded 4th-order weights:
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
// Dense-output weights (Hairer, Nørsett & Wanner, DOPRI5 CONTD5).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate `dy/dt = rhs(t, y)` from `(t0, y0)` to `t_end` (either
/// direction). Every accepted step is handed to `on_step`; returning
/// [`Control::Stop`] ends the run at that step's endpoint.
///
/// Returns the final `(t, y)` reached.
pub fn integrate_ode<const N: usize, F, G>(
    rhs: &mut F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    stats: &mut OdeStats,
    on_step: &mut G,
) -> Result<(f64, [f64; N]), Error>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], Error>,
    G: FnMut(&Step<N>) -> Control,
{
    if t_end == t0 {
        return Ok((t0, y0));
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let h_cap = opts.h_max.unwrap_or(span).abs().min(span);

    let mut t = t0;
    let mut y = y0;
    let mut f0 = rhs(t, &y)?;
    stats.n_rhs += 1;

    let mut h = match opts.h_init {
        Some(h0) => h0.abs().min(h_cap),
        None => initial_step(rhs, t, &y, &f0, dir, opts, stats)?.min(h_cap),
    };

    let mut steps: u64 = 0;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                state: y.to_vec(),
                reason: format!("step budget {} exhausted", opts.max_steps),
            });
        }
        steps += 1;

        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            return Ok((t, y));
        }
        if h > remaining {
            h = remaining;
        }
        let hd = h * dir;
        // progress-based floor: a step the time variable cannot resolve is a
        // genuine failure, while a microscopically cautious first step is
        // fine (the controller grows it geometrically)
        if t + hd == t {
            return Err(Error::IntegrationFailure {
                t,
                state: y.to_vec(),
                reason: "step size underflow (singular field ahead?)".to_string(),
            });
        }

        // stages
        let mut k = [[0.0; N]; 7];
        k[0] = f0;
        let mut failed = false;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += hd * a * kj[i];
                    }
                }
            }
            match rhs(t + C[s] * hd, &ys) {
                Ok(f) => k[s] = f,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
            stats.n_rhs += 1;
        }
        if failed {
            stats.rejected += 1;
            h *= 0.5;
            continue;
        }

        // 5th-order solution is stage 7's abscissa (FSAL): y1 = ys of s=6 loop,
        // i.e. y + h * sum A[6][j] k_j, and k[6] = f(t+h, y1).
        let mut y1 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                for i in 0..N {
                    y1[i] += hd * a * kj[i];
                }
            }
        }
        // k[6] was already computed at (t + h, y1) in the stage loop.

        // scaled error norm of (5th - 4th)
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += (A[6].get(j).copied().unwrap_or(0.0) - B4[j]) * kj[i];
            }
            let e = hd * e;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // dense output coefficients
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = hd * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - hd * k[6][i] - bspl;
                let mut d = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    d += D[j] * kj[i];
                }
                cont[4][i] = hd * d;
            }
            let step = Step {
                t0: t,
                h: hd,
                y0: y,
                y1,
                cont,
            };
            stats.accepted += 1;
            t += hd;
            y = y1;
            f0 = k[6]; // FSAL
            if on_step(&step) == Control::Stop {
                return Ok((t, y));
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * fac).min(h_cap);
        } else {
            stats.rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }
}

/// Hairer's starting-step heuristic (algorithm from II.4 of Solving ODEs I).
fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    opts: &OdeOptions,
    stats: &mut OdeStats,
) -> Result<f64, Error>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], Error>,
{
    let sc = |yi: f64| opts.atol + opts.rtol * yi.abs();
    let d0 = (y.iter().map(|&v| (v / sc(v)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = (y
        .iter()
        .zip(f0)
        .map(|(&v, &f)| (f / sc(v)).powi(2))
        .sum::<f64>()
        / N as f64)
        .sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    for _ in 0..8 {
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += dir * h0 * f0[i];
        }
        match rhs(t + dir * h0, &y1) {
            Ok(f1) => {
                stats.n_rhs += 1;
                let d2 = (y
                    .iter()
                    .zip(f0.iter().zip(&f1))
                    .map(|(&v, (&a, &b))| ((b - a) / sc(v)).powi(2))
                    .sum::<f64>()
                    / N as f64)
                    .sqrt()
                    / h0;
                let h1 = if d1.max(d2) <= 1e-15 {
                    (h0 * 1e-3).max(1e-6)
                } else {
                    (0.01 / d1.max(d2)).powf(0.2)
                };
                return Ok((100.0 * h0).min(h1));
            }
            Err(_) => h0 *= 0.1,
        }
    }
    Ok(h0)
}
