//! Critical points of the effective potential, their classification, the
//! origin's linearization spectrum, the circular-orbit bifurcation threshold,
//! and monodromy-based stability of circular orbits.

use crate::bodies::{AnnulusBody, BodyStack, FieldPoint};
use crate::dynamics::w_prime;
use crate::error::Error;
use crate::ode::{integrate_ode, Control, OdeOptions, OdeStats, Step};
use crate::potential::{stack_gradient, stack_planar_derivative};
use crate::roots::{bisect, scan_sign_changes, Bracket};
use nalgebra::{Matrix3, Matrix6};
use std::f64::consts::PI;

/// Classification of a planar critical point by the sign of `W''`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Kind {
    StableMin,
    UnstableMax,
    Degenerate,
}

/// Radial region of the stack geometry a critical point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Region {
    Hole,
    PlateInterior,
    Gap,
    Exterior,
}

/// How a report's classification was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Classifier {
    /// Richardson-extrapolated central differences of `W'`.
    RichardsonCurvature,
    /// Secant slope of the certifying bracket (used when the root hugs an
    /// edge circle too closely for finite differences to step around it).
    BracketSecant,
    /// Closed-form curvature (origin only).
    ClosedForm,
}

/// A located critical point of the effective potential.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquilibriumReport {
    pub lambda: f64,
    pub r0: f64,
    /// `|W'(r0)|` at the reported point.
    pub residual: f64,
    /// `W''(r0)` estimate.
    pub curvature: f64,
    pub kind: Kind,
    pub region: Region,
    /// Sign-change certificate (absent only for the origin, which is a
    /// critical point by symmetry rather than bisection).
    pub bracket: Option<Bracket>,
    pub classified_by: Classifier,
}

/// Radial region for an in-plane radius.
pub fn region_of(stack: &BodyStack, r: f64) -> Region {
    if r < stack.min_inner() {
        return Region::Hole;
    }
    if r > stack.max_outer() {
        return Region::Exterior;
    }
    if stack.on_any_plate(r) {
        Region::PlateInterior
    } else {
        Region::Gap
    }
}

/// Scan grid over `(lo, hi)`: a logarithmic backbone plus geometric
/// refinement toward every edge radius, where `W'` diverges only
/// logarithmically and equilibria can sit exponentially close to the edge.
fn scan_radii(stack: &BodyStack, lo: f64, hi: f64, base_n: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(base_n + 220);
    let (llo, lhi) = (lo.ln(), hi.ln());
    for i in 0..=base_n {
        pts.push((llo + (lhi - llo) * i as f64 / base_n as f64).exp());
    }
    for c in stack.edge_radii() {
        for j in 1..=51u32 {
            let off = c * (0.5f64).powi(j as i32);
            for x in [c - off, c + off] {
                if lo < x && x < hi && x != c {
                    pts.push(x);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Degeneracy threshold on `|W''|`, scaled by the stack's force curvature.
fn degeneracy_threshold(stack: &BodyStack) -> f64 {
    let a = stack.max_outer();
    1e-8 * stack.total_mu() / (a * a * a)
}

/// Curvature estimate at a bisected root, preferring Richardson-extrapolated
/// central differences and falling back to the bracket secant when the root
/// sits too close to an edge circle to step around.
fn classify_root(
    stack: &BodyStack,
    lambda: f64,
    root: &crate::roots::Root,
) -> (f64, Kind, Classifier) {
    let r0 = root.x;
    let clearance = stack
        .edge_radii()
        .iter()
        .map(|&c| (r0 - c).abs())
        .fold(f64::INFINITY, f64::min);
    let ulp = f64::EPSILON * r0;
    let h = (1e-5 * r0).min(clearance / 8.0);
    let curvature = if h > 16.0 * ulp {
        let diff = |hh: f64| -> Option<f64> {
            let a = w_prime(stack, lambda, r0 + hh).ok()?;
            let b = w_prime(stack, lambda, r0 - hh).ok()?;
            Some((a - b) / (2.0 * hh))
        };
        match (diff(h), diff(0.5 * h)) {
            (Some(d1), Some(d2)) => (4.0 * d2 - d1) / 3.0,
            _ => secant(root),
        }
    } else {
        secant(root)
    };
    let classifier = if h > 16.0 * ulp {
        Classifier::RichardsonCurvature
    } else {
        Classifier::BracketSecant
    };
    let thr = degeneracy_threshold(stack);
    let kind = if curvature.abs() <= thr {
        Kind::Degenerate
    } else if curvature > 0.0 {
        Kind::StableMin
    } else {
        Kind::UnstableMax
    };
    (curvature, kind, classifier)
}

fn secant(root: &crate::roots::Root) -> f64 {
    let b = &root.bracket;
    if b.width() > 0.0 {
        (b.f_hi - b.f_lo) / b.width()
    } else {
        0.0
    }
}

/// Closed-form radial curvature of the potential at the origin,
/// `U_rr(0) = -sum_i mu_i / (a_i b_i (a_i + b_i))` (half of minus the axial
/// curvature, by Laplace's equation).
pub fn origin_radial_curvature(stack: &BodyStack) -> f64 {
    -stack
        .members()
        .iter()
        .map(|m| m.mu() / (m.outer() * m.inner() * (m.outer() + m.inner())))
        .sum::<f64>()
}

/// Locate every critical point of `W(r) = lambda^2/(2 r^2) + U(r)` on
/// `(0, r_max]`, classified and labeled by region.
///
/// For `lambda = 0` the origin is included (it is a critical point by
/// symmetry; for positive angular momentum the centrifugal term expels it).
pub fn find_planar_critical_points(
    stack: &BodyStack,
    lambda: f64,
    r_max: f64,
) -> Result<Vec<EquilibriumReport>, Error> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }
    if !r_max.is_finite() || r_max <= stack.max_outer() {
        return Err(Error::domain(format!(
            "r_max = {r_max} must exceed the outermost radius {}",
            stack.max_outer()
        )));
    }
    let mut reports = Vec::new();
    if lambda == 0.0 {
        let curvature = origin_radial_curvature(stack);
        reports.push(EquilibriumReport {
            lambda,
            r0: 0.0,
            residual: 0.0,
            curvature,
            kind: Kind::UnstableMax,
            region: Region::Hole,
            bracket: None,
            classified_by: Classifier::ClosedForm,
        });
    }
    let lo = 1e-4 * stack.min_inner();
    let grid = scan_radii(stack, lo, r_max, 3000);
    let mut f = |r: f64| w_prime(stack, lambda, r);
    let brackets = scan_sign_changes(&mut f, &grid);
    let mut prev_r = f64::NEG_INFINITY;
    for b in brackets {
        let root = bisect(&mut f, b, 1e-13)?;
        // drop only machine-level duplicates: distinct roots can sit a few
        // dozen ulps apart on opposite sides of a plate edge
        if (root.x - prev_r).abs() <= 4.0 * f64::EPSILON * root.x.abs() {
            continue;
        }
        prev_r = root.x;
        let (curvature, kind, classified_by) = classify_root(stack, lambda, &root);
        reports.push(EquilibriumReport {
            lambda,
            r0: root.x,
            residual: root.f_x.abs(),
            curvature,
            kind,
            region: region_of(stack, root.x),
            bracket: Some(root.bracket),
            classified_by,
        });
    }
    Ok(reports)
}

/// Critical points restricted to the inter-annulus gaps of a stack.
///
/// The facing edge divergences of `W'` (positive at each gap's inner edge,
/// negative at its outer edge) force an odd number of zeros per gap.
pub fn gap_equilibria(stack: &BodyStack, lambda: f64) -> Result<Vec<EquilibriumReport>, Error> {
    if stack.members().len() < 2 {
        return Err(Error::Precondition(
            "gap equilibria need a stack with at least two annuli".to_string(),
        ));
    }
    let all = find_planar_critical_points(stack, lambda, 2.0 * stack.max_outer())?;
    Ok(all
        .into_iter()
        .filter(|r| r.region == Region::Gap)
        .collect())
}

/// Analytic sufficiency bound for exterior circular orbits,
/// `sqrt(8 mu a^3 / (pi (a^2 - b^2)))`; above it at least two exterior
/// critical points exist. It is sufficient, not sharp.
pub fn sufficient_lambda(body: &AnnulusBody) -> f64 {
    let (a, b) = (body.outer(), body.inner());
    (8.0 * body.mu() * a * a * a / (PI * (a * a - b * b))).sqrt()
}

/// Bifurcation-search result: the numerically located threshold and, for a
/// single annulus, the analytic sufficiency bound it must not exceed.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BifurcationResult {
    pub lambda_star: f64,
    pub bracket: (f64, f64),
    pub lambda_sufficient: Option<f64>,
}

/// Exterior critical-point count, with a minimum-refinement fallback that
/// catches a just-born root pair tighter than the scan grid.
fn exterior_count(stack: &BodyStack, lambda: f64, r_max: f64) -> Result<usize, Error> {
    let reports = find_planar_critical_points(stack, lambda, r_max)?;
    let n = reports
        .iter()
        .filter(|r| r.region == Region::Exterior)
        .count();
    if n > 0 {
        return Ok(n);
    }
    // golden-section refine the minimum of W' over the exterior; a negative
    // minimum means a pair exists below grid resolution
    let a_out = stack.max_outer();
    let grid = scan_radii(stack, a_out * (1.0 + 1e-9), r_max, 800);
    let mut best = (f64::INFINITY, a_out * 1.5);
    for &r in &grid {
        if r <= a_out {
            continue;
        }
        if let Ok(v) = w_prime(stack, lambda, r) {
            if v < best.0 {
                best = (v, r);
            }
        }
    }
    let (mut lo, mut hi) = (best.1 * 0.97, best.1 * 1.03);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..200 {
        if hi - lo < 1e-12 * best.1 {
            break;
        }
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        let f1 = w_prime(stack, lambda, m1)?;
        let f2 = w_prime(stack, lambda, m2)?;
        if f1 < f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let vmin = w_prime(stack, lambda, 0.5 * (lo + hi))?;
    Ok(if vmin < 0.0 { 2 } else { 0 })
}

/// Bisect the angular momentum at which the exterior critical-point pair is
/// born. `bracket` must have no exterior critical points at its low end and
/// at least two at its high end.
pub fn bifurcation_lambda(
    stack: &BodyStack,
    bracket: (f64, f64),
    tol: f64,
) -> Result<BifurcationResult, Error> {
    let (mut lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::domain(format!(
            "bad bifurcation bracket ({lo}, {hi})"
        )));
    }
    let r_max = 200.0 * stack.max_outer();
    let c_lo = exterior_count(stack, lo, r_max)?;
    let c_hi = exterior_count(stack, hi, r_max)?;
    if c_lo != 0 || c_hi < 2 {
        return Err(Error::InvalidBracket(format!(
            "need 0 exterior critical points at lambda = {lo} (got {c_lo}) and >= 2 at \
             lambda = {hi} (got {c_hi})"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if exterior_count(stack, mid, r_max)? >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda_sufficient = if stack.members().len() == 1 {
        Some(sufficient_lambda(&stack.members()[0]))
    } else {
        None
    };
    Ok(BifurcationResult {
        lambda_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        lambda_sufficient,
    })
}

/// Six linearization eigenvalues at the origin, with the finite-difference
/// Hessian they came from.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OriginSpectrum {
    pub hessian: [[f64; 3]; 3],
    /// Eigenvalues of the 6x6 linearization as `(re, im)` pairs, in +- pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub trace: f64,
    pub spectrally_stable: bool,
}

/// Hessian of the stack potential by Richardson-extrapolated central
/// differences of the closed-form gradient.
pub fn hessian_fd(stack: &BodyStack, p: &FieldPoint) -> Result<[[f64; 3]; 3], Error> {
    let clearance = stack.edge_clearance(p.r(), p.z);
    let scale = stack.max_outer();
    let mut h = (1e-4 * scale).min(clearance / 4.0);
    let floor = 4.0 * f64::EPSILON * p.dist().max(scale);
    if h < floor {
        h = floor;
    }
    let col = |hh: f64, dir: usize| -> Result<[f64; 3], Error> {
        let mut dp = [p.x, p.y, p.z];
        dp[dir] += hh;
        let gp = stack_gradient(stack, &FieldPoint::new(dp[0], dp[1], dp[2]))?;
        let mut dm = [p.x, p.y, p.z];
        dm[dir] -= hh;
        let gm = stack_gradient(stack, &FieldPoint::new(dm[0], dm[1], dm[2]))?;
        Ok([
            (gp[0] - gm[0]) / (2.0 * hh),
            (gp[1] - gm[1]) / (2.0 * hh),
            (gp[2] - gm[2]) / (2.0 * hh),
        ])
    };
    let mut out = [[0.0; 3]; 3];
    for (dir, row) in out.iter_mut().enumerate() {
        let d1 = col(h, dir)?;
        let d2 = col(0.5 * h, dir)?;
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (4.0 * d2[j] - d1[j]) / 3.0;
        }
    }
    // symmetrize: H is a Hessian, FD noise is not
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let s = 0.5 * (out[i][j] + out[j][i]);
        out[i][j] = s;
        out[j][i] = s;
    }
    Ok(out)
}

/// Linearization spectrum at the origin of a single annulus.
///
/// The Hessian there is diagonal with `U_xx = U_yy = -U_zz/2` (Laplace), so
/// the 6x6 linearization's spectrum is `+-sqrt(-h_i)` over the Hessian
/// eigenvalues: one real pair of multiplicity two in the plane and one
/// imaginary pair along the axis. Real eigenvalues present means the origin
/// is spectrally unstable.
pub fn origin_spectrum(body: &AnnulusBody) -> Result<OriginSpectrum, Error> {
    let stack = BodyStack::single(*body);
    let h = hessian_fd(&stack, &FieldPoint::new(0.0, 0.0, 0.0))?;
    let m = Matrix3::from_fn(|i, j| h[i][j]);
    let eig = m.symmetric_eigen();
    let mut eigenvalues = Vec::with_capacity(6);
    for &hv in eig.eigenvalues.iter() {
        // lambda^2 = -h  =>  real pair for h < 0, imaginary pair for h > 0
        if hv >= 0.0 {
            let w = hv.sqrt();
            eigenvalues.push((0.0, w));
            eigenvalues.push((0.0, -w));
        } else {
            let s = (-hv).sqrt();
            eigenvalues.push((s, 0.0));
            eigenvalues.push((-s, 0.0));
        }
    }
    let trace = h[0][0] + h[1][1] + h[2][2];
    let mag_scale = eigenvalues
        .iter()
        .map(|&(re, im)| re.hypot(im))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let spectrally_stable = eigenvalues
        .iter()
        .all(|&(re, _)| re.abs() <= 1e-8 * mag_scale);
    Ok(OriginSpectrum {
        hessian: h,
        eigenvalues,
        trace,
        spectrally_stable,
    })
}

/// How the monodromy verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum MonodromyMethod {
    /// The variational equations were integrated over the full period.
    FullPeriod,
    /// Variational growth exceeded the representable budget before one
    /// period elapsed; instability is certified by the measured growth.
    GrowthCertified { t_reached: f64, log_growth: f64 },
}

/// Monodromy eigenvalues and the spectral-stability verdict for a circular
/// orbit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MonodromyReport {
    pub r0: f64,
    pub lambda: f64,
    pub period: f64,
    /// Multipliers `(re, im)`; entries saturate to +-inf when the true
    /// magnitude exceeds f64 range (see `log_magnitudes`).
    pub multipliers: Vec<(f64, f64)>,
    /// `ln |multiplier|` for each entry, finite even when the multiplier
    /// itself overflows.
    pub log_magnitudes: Vec<f64>,
    /// `ln` of the scalar factored out of the fundamental matrix during
    /// integration (0 for well-conditioned orbits).
    pub log_scale: f64,
    pub spectrally_stable: bool,
    pub method: MonodromyMethod,
}

const UNIT_CIRCLE_TOL: f64 = 1e-6;
/// Stop certifying once the fundamental matrix has grown by e^250: the
/// multipliers would still be representable, but the orbit is unstable
/// beyond any doubt and the integration only gets stiffer.
const GROWTH_CERT_LN: f64 = 250.0;

fn max_abs(m: &[f64; 36]) -> f64 {
    m.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

/// Monodromy matrix of the circular orbit of radius `r0` at angular momentum
/// `lambda`, by integrating the 6x6 variational equations along the orbit
/// for one period `T = 2 pi r0^2 / lambda`, with the Jacobian of the
/// equations of motion built from finite differences of the closed-form
/// gradient.
///
/// The fundamental matrix is renormalized whenever its entries grow past
/// 1e50 (the factored scale is reported); if the accumulated growth passes
/// `e^250` before one period, the orbit is declared unstable on the strength
/// of that growth rather than ground through an integration whose remaining
/// span would dwarf the floating-point range.
pub fn circular_orbit_monodromy(
    stack: &BodyStack,
    r0: f64,
    lambda: f64,
) -> Result<MonodromyReport, Error> {
    if !(r0 > 0.0 && lambda > 0.0) {
        return Err(Error::domain(
            "monodromy needs r0 > 0 and lambda > 0".to_string(),
        ));
    }
    // circularity precondition: W'(r0) = 0 within tolerance, or certified by
    // a sign change within a few ulps of r0 (edge-hugging roots are steeper
    // than their own bisection residual)
    let centrifugal = lambda * lambda / (r0 * r0 * r0);
    let resid = (stack_planar_derivative(stack, r0)? - centrifugal).abs();
    if resid > 1e-10 * centrifugal.max(1.0) {
        let mut lo = r0;
        let mut hi = r0;
        for _ in 0..4 {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        let w_lo = w_prime(stack, lambda, lo)?;
        let w_hi = w_prime(stack, lambda, hi)?;
        if w_lo.signum() == w_hi.signum() {
            return Err(Error::Precondition(format!(
                "circularity violated at r0 = {r0}: |W'| = {resid:e} with no sign change \
                 within 4 ulps"
            )));
        }
    }

    let omega = lambda / (r0 * r0);
    let period = 2.0 * PI / omega;
    let opts = OdeOptions {
        rtol: 1e-11,
        atol: 1e-13,
        h_init: None,
        h_max: None,
        max_steps: 20_000_000,
    };

    let mut rhs = |t: f64, y: &[f64; 36]| -> Result<[f64; 36], Error> {
        let (s, c) = (omega * t).sin_cos();
        let pos = FieldPoint::new(r0 * c, r0 * s, 0.0);
        let h = hessian_fd(stack, &pos)?;
        let mut dy = [0.0; 36];
        for col in 0..6 {
            for row in 0..3 {
                // d(position rows)/dt = velocity rows
                dy[row * 6 + col] = y[(row + 3) * 6 + col];
                // d(velocity rows)/dt = -H * position rows
                let mut acc = 0.0;
                for k in 0..3 {
                    acc -= h[row][k] * y[k * 6 + col];
                }
                dy[(row + 3) * 6 + col] = acc;
            }
        }
        Ok(dy)
    };

    let mut phi = [0.0; 36];
    for i in 0..6 {
        phi[i * 6 + i] = 1.0;
    }
    let mut t = 0.0;
    let mut log_scale: f64 = 0.0;
    let mut method = MonodromyMethod::FullPeriod;
    let mut stats = OdeStats::default();
    loop {
        let mut tripped = false;
        let (t_got, phi_got) = integrate_ode(
            &mut rhs,
            t,
            phi,
            period,
            &opts,
            &mut stats,
            &mut |step: &Step<36>| {
                if max_abs(&step.y1) > 1e50 {
                    tripped = true;
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )?;
        t = t_got;
        phi = phi_got;
        if !tripped {
            break;
        }
        let mx = max_abs(&phi);
        for v in phi.iter_mut() {
            *v /= mx;
        }
        log_scale += mx.ln();
        if log_scale > GROWTH_CERT_LN {
            method = MonodromyMethod::GrowthCertified {
                t_reached: t,
                log_growth: log_scale,
            };
            break;
        }
    }

    // normalize once more so the eigensolver sees O(1) entries
    let mx = max_abs(&phi).max(f64::MIN_POSITIVE);
    if mx > 1.0 {
        for v in phi.iter_mut() {
            *v /= mx;
        }
        log_scale += mx.ln();
    }
    let m = Matrix6::from_fn(|i, j| phi[i * 6 + j]);
    let eig = m.complex_eigenvalues();
    let mut multipliers = Vec::with_capacity(6);
    let mut log_magnitudes = Vec::with_capacity(6);
    for ev in eig.iter() {
        let scale = log_scale.exp(); // may saturate to inf; logs stay finite
        multipliers.push((ev.re * scale, ev.im * scale));
        log_magnitudes.push(log_scale + ev.norm().max(f64::MIN_POSITIVE).ln());
    }
    let spectrally_stable = method == MonodromyMethod::FullPeriod
        && log_magnitudes
            .iter()
            .all(|&lm| lm.exp_m1().abs() <= UNIT_CIRCLE_TOL);
    Ok(MonodromyReport {
        r0,
        lambda,
        period,
        multipliers,
        log_magnitudes,
        log_scale,
        spectrally_stable,
        method,
    })
}
