//! Equations of motion, conserved quantities, trajectory integration with
//! event detection, axial dynamics, effective potential and phase portraits.

use crate::bodies::FieldPoint;
use crate::bodies::{AnnulusBody, BodyStack};
use crate::error::Error;
use crate::ode::{integrate_ode, Control, OdeOptions, OdeStats, Step};
use crate::potential::{
    stack_gradient, stack_planar_derivative, stack_planar_potential, stack_potential,
};
use crate::quad::{adaptive, QuadParams};
use std::f64::consts::FRAC_PI_2;

/// Full Cartesian phase-space state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl CartesianState {
    pub fn new(x: f64, y: f64, z: f64, vx: f64, vy: f64, vz: f64) -> Self {
        CartesianState {
            x,
            y,
            z,
            vx,
            vy,
            vz,
        }
    }

    pub fn position(&self) -> FieldPoint {
        FieldPoint::new(self.x, self.y, self.z)
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Conserved specific energy `E = |v|^2 / 2 + U`.
    pub fn energy(&self, stack: &BodyStack) -> Result<f64, Error> {
        let v2 = self.vx * self.vx + self.vy * self.vy + self.vz * self.vz;
        Ok(0.5 * v2 + stack_potential(stack, &self.position())?)
    }

    /// Conserved z angular momentum `x vy - y vx` (axial symmetry).
    pub fn angular_momentum_z(&self) -> f64 {
        self.x * self.vy - self.y * self.vx
    }

    fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.z, self.vx, self.vy, self.vz]
    }

    fn from_array(a: [f64; 6]) -> Self {
        CartesianState::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }
}

/// Cylindrically reduced state at fixed angular momentum `lambda = r^2 d(azimuth)/dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub r: f64,
    pub rdot: f64,
    pub z: f64,
    pub zdot: f64,
    pub lambda: f64,
}

impl ReducedState {
    pub fn new(r: f64, rdot: f64, z: f64, zdot: f64, lambda: f64) -> Self {
        ReducedState {
            r,
            rdot,
            z,
            zdot,
            lambda,
        }
    }

    /// Conserved energy `E = (rdot^2 + lambda^2/r^2 + zdot^2)/2 + U(r, z)`.
    pub fn energy(&self, stack: &BodyStack) -> Result<f64, Error> {
        let kin = 0.5
            * (self.rdot * self.rdot
                + self.lambda * self.lambda / (self.r * self.r)
                + self.zdot * self.zdot);
        Ok(kin + stack_potential(stack, &FieldPoint::new(self.r, 0.0, self.z))?)
    }
}

/// Cartesian equations of motion: `(vx, vy, vz, -Ux, -Uy, -Uz)`.
pub fn cartesian_rhs(stack: &BodyStack, s: &CartesianState) -> Result<[f64; 6], Error> {
    let g = stack_gradient(stack, &s.position())?;
    Ok([s.vx, s.vy, s.vz, -g[0], -g[1], -g[2]])
}

/// Reduced equations of motion:
/// `(rdot, -dU/dr + lambda^2/r^3, zdot, -dU/dz)`.
pub fn reduced_rhs(stack: &BodyStack, s: &ReducedState) -> Result<[f64; 4], Error> {
    if !s.r.is_finite() || s.r <= 0.0 {
        return Err(Error::domain(format!(
            "reduced state needs r > 0, got r = {}",
            s.r
        )));
    }
    let g = stack_gradient(stack, &FieldPoint::new(s.r, 0.0, s.z))?;
    let centrifugal = s.lambda * s.lambda / (s.r * s.r * s.r);
    Ok([s.rdot, -g[0] + centrifugal, s.zdot, -g[2]])
}

/// On-axis potential of a single annulus,
/// `U(0,0,z) = -(2 mu / (a^2 - b^2)) (sqrt(a^2+z^2) - sqrt(b^2+z^2))`.
pub fn axis_potential(body: &AnnulusBody, z: f64) -> f64 {
    let (a, b) = (body.outer(), body.inner());
    -(2.0 * body.mu() / (a * a - b * b)) * ((a * a + z * z).sqrt() - (b * b + z * z).sqrt())
}

/// On-axis potential of a stack (sum of members).
pub fn stack_axis_potential(stack: &BodyStack, z: f64) -> f64 {
    stack.members().iter().map(|a| axis_potential(a, z)).sum()
}

/// On-axis acceleration `zddot = -dU/dz` along the symmetry axis:
///
/// ```text
/// zddot = -(2 mu z / (a^2 - b^2)) (1/sqrt(z^2+b^2) - 1/sqrt(z^2+a^2)).
/// ```
///
/// This is the gradient-consistent coefficient (it equals `-Uz` of the full
/// closed-form gradient on the axis); it is odd in z and restoring.
pub fn axis_accel(body: &AnnulusBody, z: f64) -> f64 {
    let (a, b) = (body.outer(), body.inner());
    -(2.0 * body.mu() * z / (a * a - b * b))
        * (1.0 / (z * z + b * b).sqrt() - 1.0 / (z * z + a * a).sqrt())
}

/// Energy at the origin, `E* = -2 mu / (a + b)`; axial librations exist for
/// `E* < E < 0`.
pub fn axial_energy_floor(body: &AnnulusBody) -> f64 {
    -2.0 * body.mu() / (body.outer() + body.inner())
}

/// Turning point `z_t > 0` of axial motion at energy E, from
/// `U_axis(z_t) = E` by bisection.
pub fn axial_turning_point(body: &AnnulusBody, energy: f64) -> Result<f64, Error> {
    let floor = axial_energy_floor(body);
    if !(floor < energy && energy < 0.0) {
        return Err(Error::domain(format!(
            "axial energy must satisfy E* = {floor} < E < 0, got {energy}"
        )));
    }
    let mut hi = body.outer();
    while axis_potential(body, hi) < energy {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Convergence(
                "axial turning point out of range".to_string(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if axis_potential(body, mid) < energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Axial libration period by quadrature:
///
/// ```text
/// T = 2 int_{-z_t}^{z_t} dz / sqrt(2 (E - U_axis(z)))
///   = 4 int_0^{pi/2} z_t cos(p) dp / sqrt(2 (U(z_t) - U(z_t sin p))),
/// ```
///
/// where the sine substitution removes the inverse-square-root turning-point
/// singularity (the integrand extends continuously to p = pi/2).
pub fn axial_period(body: &AnnulusBody, energy: f64) -> Result<f64, Error> {
    let zt = axial_turning_point(body, energy)?;
    let (a, b) = (body.outer(), body.inner());
    let c = 2.0 * body.mu() / (a * a - b * b);
    // With z = z_t sin(p), the radicand factors exactly:
    //   E - U(z) = C z_t^2 cos^2(p) [ 1/(sqrt(b^2+z^2)+sqrt(b^2+z_t^2))
    //                               - 1/(sqrt(a^2+z^2)+sqrt(a^2+z_t^2)) ],
    // so cos(p) cancels and the integrand 1/sqrt(2 C D(sin p)) is smooth on
    // the whole of [0, pi/2] -- no turning-point singularity, no
    // cancellation.
    // rewritten once more as a product of positive sums so nothing cancels
    // even when z_t dwarfs the plate radii (E -> 0-):
    //   D = (a^2-b^2) (1/S(z) + 1/S(z_t)) / (T_b T_a),
    //   S(z) = sqrt(a^2+z^2)+sqrt(b^2+z^2), T_c = sqrt(c^2+z^2)+sqrt(c^2+z_t^2).
    let d_of = |s: f64| {
        let z2 = zt * zt * s * s;
        let zt2 = zt * zt;
        let ra = (a * a + z2).sqrt();
        let rb = (b * b + z2).sqrt();
        let ta = ra + (a * a + zt2).sqrt();
        let tb = rb + (b * b + zt2).sqrt();
        let s_z = ra + rb;
        let s_zt = (a * a + zt2).sqrt() + (b * b + zt2).sqrt();
        (a * a - b * b) * (1.0 / s_z + 1.0 / s_zt) / (tb * ta)
    };
    let integrand = |p: f64| 1.0 / (2.0 * c * d_of(p.sin())).sqrt();
    let mut evals = 0;
    let val = adaptive(
        &integrand,
        0.0,
        FRAC_PI_2,
        QuadParams {
            abs_tol: 1e-13 * zt.max(1.0),
            max_evals: 20_000_000,
        },
        &mut evals,
    )?;
    Ok(4.0 * val)
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Termination {
    /// Reached the requested final time.
    TimeLimit,
    /// Crossed a plate (or ran into one within the equatorial plane).
    PlateCollision,
    /// Left the sphere `R > escape_radius` with non-negative energy.
    Escape,
    /// Came within `edge_epsilon` of an edge circle, where the field
    /// gradient diverges.
    EdgeProximity,
}

/// Tolerances and event thresholds for trajectory integration.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: u64,
    /// Escape sphere radius as a multiple of the outermost plate radius.
    pub escape_radius_factor: f64,
    /// Radial slack around each plate for collision detection.
    pub collision_epsilon: f64,
    /// Meridian distance to an edge circle that terminates the run.
    pub edge_epsilon: f64,
    /// Emit equally spaced samples at this interval (dense output); when
    /// `None`, accepted step endpoints are emitted.
    pub sample_dt: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 50_000_000,
            escape_radius_factor: 50.0,
            collision_epsilon: 1e-9,
            edge_epsilon: 1e-7,
            sample_dt: None,
        }
    }
}

/// A propagated trajectory with its termination cause.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `(t, state)` samples, strictly increasing in |t - t0|.
    pub samples: Vec<(f64, CartesianState)>,
    pub termination: Termination,
    pub final_time: f64,
    pub final_state: CartesianState,
    pub n_rhs: u64,
}

/// Bisect an event function along a dense-output step to time tolerance.
fn locate_event<const N: usize>(
    step: &Step<N>,
    mut g: impl FnMut(f64, &[f64; N]) -> f64,
) -> Option<f64> {
    let mut lo = step.t0;
    let mut hi = step.t1();
    let mut g_lo = g(lo, &step.y0);
    let g_hi = g(hi, &step.y1);
    if g_lo == 0.0 {
        return Some(lo);
    }
    if g_lo.signum() == g_hi.signum() && g_hi != 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= 1e-10 * mid.abs().max(1.0) || mid == lo || mid == hi {
            break;
        }
        let y = step.eval(mid);
        let gm = g(mid, &y);
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == g_lo.signum() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Propagate a Cartesian state under the stack's field with plate-collision,
/// escape and edge-proximity event detection.
///
/// Trajectories that start with `z = zdot = 0` stay planar exactly: the
/// closed-form `Uz` vanishes identically on the equatorial plane off the
/// plates, so the z components never acquire a nonzero bit.
pub fn integrate(
    stack: &BodyStack,
    state0: CartesianState,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory, Error> {
    let escape_radius = opts.escape_radius_factor * stack.max_outer();
    let energy0 = state0.energy(stack)?;
    let eps = opts.collision_epsilon;

    // signed distance to the (epsilon-expanded) radial bands, positive inside
    let band_signed = |r: f64| -> f64 {
        stack
            .members()
            .iter()
            .map(|a| (r - (a.inner() - eps)).min((a.outer() + eps) - r))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut samples: Vec<(f64, CartesianState)> = vec![(0.0, state0)];
    let mut next_sample = opts.sample_dt;
    let mut termination = Termination::TimeLimit;
    let mut term_time: Option<f64> = None;
    let mut term_state = state0;

    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: None,
        h_max: None,
        max_steps: opts.max_steps,
    };
    let mut stats = OdeStats::default();
    let mut rhs = |_t: f64, y: &[f64; 6]| -> Result<[f64; 6], Error> {
        cartesian_rhs(stack, &CartesianState::from_array(*y))
    };

    let dir = (t_end - 0.0).signum();
    let result = integrate_ode(
        &mut rhs,
        0.0,
        state0.to_array(),
        t_end,
        &ode_opts,
        &mut stats,
        &mut |step: &Step<6>| {
            let s1 = CartesianState::from_array(step.y1);
            let mut stop_at: Option<(f64, Termination)> = None;

            // plate crossing: z changes sign across the step
            let z0 = step.y0[2];
            let z1 = step.y1[2];
            if z0 != 0.0 && (z0.signum() != z1.signum() || z1 == 0.0) {
                if let Some(tc) = locate_event(step, |_t, y| y[2]) {
                    let yc = step.eval(tc);
                    let rc = yc[0].hypot(yc[1]);
                    if band_signed(rc) >= 0.0 {
                        stop_at = Some((tc, Termination::PlateCollision));
                    }
                }
            }
            // planar approach: the orbit lives in z = 0 and enters a band
            if stop_at.is_none() && z0 == 0.0 && z1 == 0.0 {
                let r0 = step.y0[0].hypot(step.y0[1]);
                let r1 = s1.r();
                if band_signed(r0) < 0.0 && band_signed(r1) >= 0.0 {
                    if let Some(tc) = locate_event(step, |_t, y| band_signed(y[0].hypot(y[1]))) {
                        stop_at = Some((tc, Termination::PlateCollision));
                    }
                }
            }
            // edge proximity at the step end; within the equatorial plane an
            // approach to the edge is an approach to the plate itself
            if stop_at.is_none() && stack.edge_clearance(s1.r(), s1.z) < opts.edge_epsilon {
                let why = if s1.z == 0.0 {
                    Termination::PlateCollision
                } else {
                    Termination::EdgeProximity
                };
                stop_at = Some((step.t1(), why));
            }
            // escape
            if stop_at.is_none() && energy0 >= 0.0 {
                let big_r = (s1.x * s1.x + s1.y * s1.y + s1.z * s1.z).sqrt();
                if big_r > escape_radius {
                    stop_at = Some((step.t1(), Termination::Escape));
                }
            }

            let t_stop = stop_at.map(|(t, _)| t);
            // dense sampling up to the stop time (or the step end)
            if let Some(dt) = opts.sample_dt {
                let t_hi = t_stop.unwrap_or(step.t1());
                while let Some(ts) = next_sample {
                    if (t_hi - ts) * dir < 0.0 {
                        break;
                    }
                    samples.push((ts, CartesianState::from_array(step.eval(ts))));
                    next_sample = Some(ts + dt * dir);
                }
            } else {
                let t_hi = t_stop.unwrap_or(step.t1());
                let state = if t_stop.is_some() {
                    CartesianState::from_array(step.eval(t_hi))
                } else {
                    s1
                };
                samples.push((t_hi, state));
            }

            if let Some((tc, why)) = stop_at {
                termination = why;
                term_time = Some(tc);
                term_state = CartesianState::from_array(step.eval(tc));
                Control::Stop
            } else {
                Control::Continue
            }
        },
    );

    let (t_final, y_final) = result?;
    let (final_time, final_state) = match term_time {
        Some(tc) => (tc, term_state),
        None => (t_final, CartesianState::from_array(y_final)),
    };
    if term_time.is_some() || opts.sample_dt.is_some() {
        samples.push((final_time, final_state));
    }
    samples.dedup_by(|a, b| a.0 == b.0);
    Ok(Trajectory {
        samples,
        termination,
        final_time,
        final_state,
        n_rhs: stats.n_rhs,
    })
}

/// Propagate a reduced state (no event detection; used for the
/// reduced/Cartesian equivalence checks and planar studies).
pub fn integrate_reduced(
    stack: &BodyStack,
    state0: ReducedState,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<Vec<(f64, ReducedState)>, Error> {
    let lambda = state0.lambda;
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: None,
        h_max: None,
        max_steps: opts.max_steps,
    };
    let mut stats = OdeStats::default();
    let mut rhs = |_t: f64, y: &[f64; 4]| -> Result<[f64; 4], Error> {
        reduced_rhs(stack, &ReducedState::new(y[0], y[1], y[2], y[3], lambda))
    };
    let mut out = vec![(0.0, state0)];
    let mut next = opts.sample_dt;
    let dir = t_end.signum();
    let (tf, yf) = integrate_ode(
        &mut rhs,
        0.0,
        [state0.r, state0.rdot, state0.z, state0.zdot],
        t_end,
        &ode_opts,
        &mut stats,
        &mut |step: &Step<4>| {
            if let Some(dt) = opts.sample_dt {
                while let Some(ts) = next {
                    if (step.t1() - ts) * dir < 0.0 {
                        break;
                    }
                    let y = step.eval(ts);
                    out.push((ts, ReducedState::new(y[0], y[1], y[2], y[3], lambda)));
                    next = Some(ts + dt * dir);
                }
            } else {
                let y = step.y1;
                out.push((step.t1(), ReducedState::new(y[0], y[1], y[2], y[3], lambda)));
            }
            Control::Continue
        },
    )?;
    out.push((tf, ReducedState::new(yf[0], yf[1], yf[2], yf[3], lambda)));
    out.dedup_by(|a, b| a.0 == b.0);
    Ok(out)
}

/// ODE-measured axial libration period: start at the turning point and time
/// the next two `zdot = 0` crossings. Cross-validates [`axial_period`].
pub fn axial_return_time(
    body: &AnnulusBody,
    energy: f64,
    opts: &IntegrationOptions,
) -> Result<f64, Error> {
    let zt = axial_turning_point(body, energy)?;
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: None,
        h_max: None,
        max_steps: opts.max_steps,
    };
    let mut stats = OdeStats::default();
    let mut rhs =
        |_t: f64, y: &[f64; 2]| -> Result<[f64; 2], Error> { Ok([y[1], axis_accel(body, y[0])]) };
    // generous horizon: a few harmonic periods short of escape this is enough
    let horizon = 1000.0 * (body.outer() / body.mu().max(1e-12)).sqrt().max(1.0);
    let mut half_time: Option<f64> = None;
    integrate_ode(
        &mut rhs,
        0.0,
        [zt, 0.0],
        horizon,
        &ode_opts,
        &mut stats,
        &mut |step: &Step<2>| {
            // zdot starts at 0 and goes negative; next zero is at -z_t, t = T/2
            if step.t0 > 0.0 && step.y0[1] < 0.0 && step.y1[1] >= 0.0 {
                if let Some(tc) = locate_event(step, |_t, y| y[1]) {
                    half_time = Some(tc);
                    return Control::Stop;
                }
            }
            Control::Continue
        },
    )?;
    half_time.map(|t| 2.0 * t).ok_or_else(|| {
        Error::Convergence("no axial return detected within the horizon".to_string())
    })
}

/// ODE-measured circular-orbit period: time between launch and the next
/// upward y = 0 crossing of the orbit started at `(r0, 0, 0)` with
/// `v = (0, lambda/r0, 0)`.
pub fn measured_circular_period(
    stack: &BodyStack,
    r0: f64,
    lambda: f64,
    opts: &IntegrationOptions,
) -> Result<f64, Error> {
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: None,
        h_max: None,
        max_steps: opts.max_steps,
    };
    let mut stats = OdeStats::default();
    let mut rhs = |_t: f64, y: &[f64; 6]| -> Result<[f64; 6], Error> {
        cartesian_rhs(stack, &CartesianState::from_array(*y))
    };
    let nominal = 2.0 * std::f64::consts::PI * r0 * r0 / lambda;
    let mut period: Option<f64> = None;
    integrate_ode(
        &mut rhs,
        0.0,
        [r0, 0.0, 0.0, 0.0, lambda / r0, 0.0],
        3.0 * nominal,
        &ode_opts,
        &mut stats,
        &mut |step: &Step<6>| {
            if step.t0 > 0.5 * nominal && step.y0[1] < 0.0 && step.y1[1] >= 0.0 {
                if let Some(tc) = locate_event(step, |_t, y| y[1]) {
                    period = Some(tc);
                    return Control::Stop;
                }
            }
            Control::Continue
        },
    )?;
    period.ok_or_else(|| Error::Convergence("orbit did not complete a revolution".to_string()))
}

/// Effective potential value `W(r) = lambda^2/(2 r^2) + U(r, z=0)`.
pub fn w_value(stack: &BodyStack, lambda: f64, r: f64) -> Result<f64, Error> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::domain(format!("W(r) needs r > 0, got {r}")));
    }
    Ok(lambda * lambda / (2.0 * r * r) + stack_planar_potential(stack, r)?)
}

/// Effective potential slope `W'(r) = -lambda^2/r^3 + U'(r)`; its zeros are
/// the circular-orbit radii.
pub fn w_prime(stack: &BodyStack, lambda: f64, r: f64) -> Result<f64, Error> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::domain(format!("W'(r) needs r > 0, got {r}")));
    }
    Ok(-lambda * lambda / (r * r * r) + stack_planar_derivative(stack, r)?)
}

/// Sampled effective-potential curve at fixed angular momentum.
#[derive(Debug, Clone)]
pub struct EffectivePotentialCurve {
    pub lambda: f64,
    /// `(r, W, W')` triples; radii landing on an edge circle are nudged off
    /// it by one part in 1e9.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Sample `W` and `W'` on a uniform grid over `[r_min, r_max]`.
pub fn effective_potential(
    stack: &BodyStack,
    lambda: f64,
    r_min: f64,
    r_max: f64,
    n: usize,
) -> Result<EffectivePotentialCurve, Error> {
    if !(r_min > 0.0 && r_max > r_min && n >= 2) {
        return Err(Error::domain(
            "effective potential needs 0 < r_min < r_max and n >= 2".to_string(),
        ));
    }
    let mut samples = Vec::with_capacity(n);
    let edges = stack.edge_radii();
    for i in 0..n {
        let mut r = r_min + (r_max - r_min) * i as f64 / (n - 1) as f64;
        for &c in &edges {
            if (r - c).abs() < 1e-9 * c {
                r = if r <= c {
                    c * (1.0 - 1e-9)
                } else {
                    c * (1.0 + 1e-9)
                };
            }
        }
        samples.push((r, w_value(stack, lambda, r)?, w_prime(stack, lambda, r)?));
    }
    Ok(EffectivePotentialCurve { lambda, samples })
}

/// One constant-energy level curve of a 1-dof phase portrait.
#[derive(Debug, Clone)]
pub struct PortraitLevel {
    pub energy: f64,
    /// Each segment is a closed (or range-clipped) polyline in the
    /// `(coordinate, velocity)` plane: the +v branch swept forward, then the
    /// -v branch swept backward.
    pub segments: Vec<Vec<(f64, f64)>>,
}

fn portrait_levels(
    xs: &[f64],
    potential_at: impl Fn(f64) -> Option<f64>,
    energies: &[f64],
) -> Vec<PortraitLevel> {
    let values: Vec<Option<f64>> = xs.iter().map(|&x| potential_at(x)).collect();
    energies
        .iter()
        .map(|&e| {
            let mut segments = Vec::new();
            let mut run: Vec<(f64, f64)> = Vec::new();
            for (&x, v) in xs.iter().zip(&values) {
                let v2 = v.map(|u| 2.0 * (e - u));
                match v2 {
                    Some(v2) if v2 >= 0.0 => run.push((x, v2.sqrt())),
                    _ => {
                        if !run.is_empty() {
                            segments.push(close_branch(std::mem::take(&mut run)));
                        }
                    }
                }
            }
            if !run.is_empty() {
                segments.push(close_branch(run));
            }
            PortraitLevel {
                energy: e,
                segments,
            }
        })
        .collect()
}

fn close_branch(plus: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut seg = plus.clone();
    for &(x, v) in plus.iter().rev() {
        seg.push((x, -v));
    }
    if let Some(&first) = seg.first() {
        seg.push(first);
    }
    seg
}

/// Planar phase portrait: level curves of
/// `rdot = +-sqrt(2 (E - W(r)))` over `[r_min, r_max]`.
pub fn planar_phase_portrait(
    stack: &BodyStack,
    lambda: f64,
    r_min: f64,
    r_max: f64,
    n: usize,
    energies: &[f64],
) -> Result<Vec<PortraitLevel>, Error> {
    let curve = effective_potential(stack, lambda, r_min, r_max, n)?;
    let xs: Vec<f64> = curve.samples.iter().map(|s| s.0).collect();
    let ws: Vec<f64> = curve.samples.iter().map(|s| s.1).collect();
    Ok(portrait_levels(
        &xs,
        |x| {
            let idx = xs.iter().position(|&xx| xx == x)?;
            Some(ws[idx])
        },
        energies,
    ))
}

/// Axial phase portrait: level curves of `zdot = +-sqrt(2 (E - U_axis(z)))`
/// over `[-z_max, z_max]`.
pub fn axial_phase_portrait(
    stack: &BodyStack,
    z_max: f64,
    n: usize,
    energies: &[f64],
) -> Result<Vec<PortraitLevel>, Error> {
    if !(z_max > 0.0 && n >= 2) {
        return Err(Error::domain(
            "axial portrait needs z_max > 0 and n >= 2".to_string(),
        ));
    }
    let xs: Vec<f64> = (0..n)
        .map(|i| -z_max + 2.0 * z_max * i as f64 / (n - 1) as f64)
        .collect();
    Ok(portrait_levels(
        &xs,
        |z| Some(stack_axis_potential(stack, z)),
        energies,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::AnnulusBody;

    fn stack() -> BodyStack {
        BodyStack::single(AnnulusBody::new(1.0, 0.75, 1.0).unwrap())
    }

    #[test]
    fn rhs_at_rest_at_origin_is_zero_acceleration() {
        let s = stack();
        let rhs = cartesian_rhs(&s, &CartesianState::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(rhs, [0.0; 6]);
    }

    #[test]
    fn axis_accel_matches_gradient_and_is_restoring() {
        let s = stack();
        let ann = s.members()[0];
        assert_eq!(axis_accel(&ann, 0.0), 0.0);
        for z in [0.3, 1.0, 2.5] {
            let a = axis_accel(&ann, z);
            assert!(a < 0.0, "restoring above the plane: {a}");
            assert!((axis_accel(&ann, -z) + a).abs() < 1e-15, "odd in z");
            let g =
                crate::potential::annulus_gradient(&ann, &FieldPoint::new(0.0, 0.0, z)).unwrap();
            assert!(
                (a + g[2]).abs() < 1e-12 * g[2].abs().max(1.0),
                "zddot = -Uz"
            );
        }
    }

    #[test]
    fn axial_floor_and_turning_point() {
        let ann = AnnulusBody::new(1.0, 0.75, 1.0).unwrap();
        assert!((axial_energy_floor(&ann) + 8.0 / 7.0).abs() < 1e-15);
        let zt = axial_turning_point(&ann, -0.8).unwrap();
        assert!((zt - 0.8882039461745258).abs() < 1e-12, "z_t(-0.8) = {zt}");
        assert!(axial_turning_point(&ann, -2.0).is_err());
        assert!(axial_turning_point(&ann, 0.1).is_err());
    }

    #[test]
    fn axial_period_reference_and_monotone_growth() {
        let ann = AnnulusBody::new(1.0, 0.75, 1.0).unwrap();
        let t = axial_period(&ann, -0.8).unwrap();
        assert!((t - 7.801084512009985).abs() < 1e-9, "T(-0.8) = {t}");
        // period grows monotonically toward the escape energy
        let mut prev = 0.0;
        for e in [-1.1, -0.9, -0.6, -0.3, -0.1, -0.02] {
            let t = axial_period(&ann, e).unwrap();
            assert!(t > prev, "period not monotone at E = {e}: {t} <= {prev}");
            prev = t;
        }
    }

    #[test]
    fn axial_period_harmonic_limit() {
        let ann = AnnulusBody::new(1.0, 0.75, 1.0).unwrap();
        let floor = axial_energy_floor(&ann);
        let omega2: f64 = 2.0 / (0.75 * 1.75); // 2 mu / (a b (a+b)) = 32/21
        let t_harm = 2.0 * std::f64::consts::PI / omega2.sqrt();
        let t = axial_period(&ann, floor + 1e-6).unwrap();
        assert!(
            (t - t_harm).abs() / t_harm < 1e-3,
            "harmonic limit: {t} vs {t_harm}"
        );
    }

    #[test]
    fn planar_orbits_stay_exactly_planar() {
        let s = stack();
        let state = CartesianState::new(3.0, 0.0, 0.0, 0.0, 0.7, 0.0);
        let traj = integrate(&s, state, 20.0, &IntegrationOptions::default()).unwrap();
        assert_eq!(traj.termination, Termination::TimeLimit);
        for (_, st) in &traj.samples {
            assert_eq!(st.z, 0.0, "z must stay identically zero");
            assert_eq!(st.vz, 0.0);
        }
    }

    #[test]
    fn hole_release_collides_with_plate() {
        let s = stack();
        // at rest in the hole: U' < 0 pulls outward toward the inner edge
        let state = CartesianState::new(0.5, 0.0, 0.0, 0.0, 0.0, 0.0);
        let traj = integrate(&s, state, 50.0, &IntegrationOptions::default()).unwrap();
        assert_eq!(traj.termination, Termination::PlateCollision);
        let r_end = traj.final_state.r();
        assert!(
            (r_end - 0.75).abs() < 1e-6,
            "collision at the inner edge, got r = {r_end}"
        );
    }

    #[test]
    fn crossing_plate_off_band_continues() {
        let s = stack();
        // drop from above the hole: crosses z = 0 inside the hole, no event
        let state = CartesianState::new(0.2, 0.0, 1.0, 0.0, 0.0, -0.9);
        let traj = integrate(&s, state, 3.0, &IntegrationOptions::default()).unwrap();
        assert_eq!(traj.termination, Termination::TimeLimit);
        assert!(
            traj.final_state.z < 0.0,
            "should have passed through the hole"
        );
    }

    #[test]
    fn escape_detection() {
        let s = stack();
        let state = CartesianState::new(2.0, 0.0, 0.0, 2.0, 0.0, 0.0); // E > 0
        let opts = IntegrationOptions {
            escape_radius_factor: 10.0,
            ..Default::default()
        };
        let traj = integrate(&s, state, 1e4, &opts).unwrap();
        assert_eq!(traj.termination, Termination::Escape);
    }

    #[test]
    fn energy_and_momentum_conservation() {
        let s = stack();
        let state = CartesianState::new(3.0, 0.0, 0.3, 0.0, 0.6, 0.1);
        let e0 = state.energy(&s).unwrap();
        let l0 = state.angular_momentum_z();
        let opts = IntegrationOptions {
            rtol: 1e-11,
            atol: 1e-13,
            ..Default::default()
        };
        let traj = integrate(&s, state, 100.0, &opts).unwrap();
        assert_eq!(traj.termination, Termination::TimeLimit);
        let e1 = traj.final_state.energy(&s).unwrap();
        let l1 = traj.final_state.angular_momentum_z();
        assert!(
            ((e1 - e0) / e0).abs() < 1e-9,
            "energy drift {:e}",
            (e1 - e0) / e0
        );
        assert!(
            ((l1 - l0) / l0).abs() < 1e-10,
            "Lz drift {:e}",
            (l1 - l0) / l0
        );
    }

    #[test]
    fn reversibility() {
        let s = stack();
        let state = CartesianState::new(3.0, 0.0, 0.4, 0.0, 0.6, -0.05);
        let opts = IntegrationOptions {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let fwd = integrate(&s, state, 10.0, &opts).unwrap();
        let mut back_state = fwd.final_state;
        back_state.vx = -back_state.vx;
        back_state.vy = -back_state.vy;
        back_state.vz = -back_state.vz;
        let back = integrate(&s, back_state, 10.0, &opts).unwrap();
        let f = back.final_state;
        for (got, want) in [
            (f.x, state.x),
            (f.y, state.y),
            (f.z, state.z),
            (-f.vx, state.vx),
            (-f.vy, state.vy),
            (-f.vz, state.vz),
        ] {
            assert!((got - want).abs() < 1e-7, "reversibility: {got} vs {want}");
        }
    }

    #[test]
    fn reduced_matches_cartesian_projection() {
        let s = stack();
        let (r0, rdot0, z0, zdot0, lambda) = (3.0, 0.1, 0.3, -0.05, 1.8);
        let opts = IntegrationOptions {
            rtol: 1e-11,
            atol: 1e-13,
            sample_dt: Some(0.5),
            ..Default::default()
        };
        let red = integrate_reduced(
            &s,
            ReducedState::new(r0, rdot0, z0, zdot0, lambda),
            10.0,
            &opts,
        )
        .unwrap();
        // equivalent Cartesian start: along +x with azimuthal velocity lambda/r
        let cart = integrate(
            &s,
            CartesianState::new(r0, 0.0, z0, rdot0, lambda / r0, zdot0),
            10.0,
            &opts,
        )
        .unwrap();
        for ((tr, rs), (tc, cs)) in red.iter().zip(cart.samples.iter()) {
            assert_eq!(tr, tc);
            assert!(
                (rs.r - cs.r()).abs() < 1e-6,
                "r mismatch at t = {tr}: {} vs {}",
                rs.r,
                cs.r()
            );
            assert!(
                (rs.z - cs.z).abs() < 1e-6,
                "z mismatch at t = {tr}: {} vs {}",
                rs.z,
                cs.z
            );
        }
    }

    #[test]
    fn reduced_rhs_signs_and_circularity() {
        let s = stack();
        // at rest in the hole with lambda = 0 the radial acceleration points
        // outward, toward the plate (U' < 0 there)
        let rhs = reduced_rhs(&s, &ReducedState::new(0.5, 0.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(rhs[1] > 0.0, "hole acceleration {}", rhs[1]);
        // with lambda^2 = r0^3 U'(r0) the radial acceleration vanishes
        let r0: f64 = 3.0;
        let lambda = (r0.powi(3) * stack_planar_derivative(&s, r0).unwrap()).sqrt();
        let rhs = reduced_rhs(&s, &ReducedState::new(r0, 0.0, 0.0, 0.0, lambda)).unwrap();
        assert!(rhs[1].abs() < 1e-14, "circular-orbit residual {}", rhs[1]);
        assert!(reduced_rhs(&s, &ReducedState::new(0.0, 0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn w_reduces_to_potential_at_zero_lambda() {
        let s = stack();
        for r in [0.3, 0.9, 2.0] {
            let w = w_value(&s, 0.0, r).unwrap();
            let u = stack_planar_potential(&s, r).unwrap();
            assert_eq!(w, u);
            let wp = w_prime(&s, 0.0, r).unwrap();
            let up = stack_planar_derivative(&s, r).unwrap();
            assert_eq!(wp, up);
        }
    }

    #[test]
    fn effective_curve_slope_consistent_with_values() {
        let s = stack();
        let curve = effective_potential(&s, 1.5, 2.0, 8.0, 400).unwrap();
        for w in curve.samples.windows(3) {
            let (r0, w0, _) = w[0];
            let (r1, _, wp1) = w[1];
            let (r2, w2, _) = w[2];
            let fd = (w2 - w0) / (r2 - r0);
            assert!(
                (fd - wp1).abs() < 1e-3 * wp1.abs().max(1e-3),
                "W' at r = {r1}: sampled {wp1}, finite difference {fd}"
            );
        }
    }

    #[test]
    fn edge_graze_out_of_plane_terminates_with_proximity() {
        let s = stack();
        // fast inbound pass whose closest approach to the outer edge circle
        // (distance ~0.06) happens well before the plane crossing
        let state = CartesianState::new(1.5, 0.0, 0.3, -1.5, 0.0, -0.7);
        let opts = IntegrationOptions {
            edge_epsilon: 0.1,
            ..Default::default()
        };
        let traj = integrate(&s, state, 2.0, &opts).unwrap();
        assert_eq!(traj.termination, Termination::EdgeProximity);
        let f = traj.final_state;
        assert!(f.z != 0.0);
        assert!(s.edge_clearance(f.r(), f.z) < 0.1);
    }

    #[test]
    fn w_far_field_negative_increasing() {
        let s = stack();
        let mut prev = w_value(&s, 1.0, 30.0).unwrap();
        assert!(prev < 0.0);
        for r in [60.0, 120.0, 240.0] {
            let w = w_value(&s, 1.0, r).unwrap();
            assert!(w < 0.0 && w > prev, "W negative increasing: {w} vs {prev}");
            prev = w;
        }
    }

    #[test]
    fn axial_portrait_has_fixed_point_at_floor() {
        let s = stack();
        let floor = axial_energy_floor(&s.members()[0]);
        let levels = axial_phase_portrait(&s, 2.0, 401, &[floor, floor + 0.2, -0.2]).unwrap();
        // at E = E* the accessible set degenerates to the origin
        let seg0 = &levels[0].segments;
        let total0: usize = seg0.iter().map(|s| s.len()).sum();
        assert!(
            total0 <= 4,
            "E* level should be (nearly) a point, got {total0} points"
        );
        // higher levels are closed loops around it
        assert!(!levels[1].segments.is_empty());
        let loop1 = &levels[1].segments[0];
        assert!(loop1.len() > 10);
        assert_eq!(loop1.first(), loop1.last(), "branch closes on itself");
    }
}
