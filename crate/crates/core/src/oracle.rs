//! Brute-force quadrature of the defining Newtonian integrals.
//!
//! This module is the ground truth the closed forms are validated against,
//! so it deliberately shares nothing with them: no elliptic integrals, no
//! reformulations, just adaptive quadrature of
//!
//! ```text
//! U(P) = -G sigma  int_b^a int_0^{2pi}  rho dtheta drho
//!                  / sqrt(x^2+y^2+z^2 + rho^2 - 2 rho (x cos theta + y sin theta))
//! ```
//!
//! with the theta integral folded to [0, pi] by symmetry (the point is
//! rotated onto the Oxz half-plane first). The gradient variant
//! differentiates under the integral sign, which is legitimate off the
//! plate where the kernel is smooth.

use crate::bodies::{AnnulusBody, BodyStack, DiskBody, FieldPoint, WireBody};
use crate::error::Error;
use crate::quad::{adaptive, QuadParams};
use std::f64::consts::PI;

fn params(abs_tol: f64, max_evals: u64) -> QuadParams {
    QuadParams { abs_tol, max_evals }
}

/// Wire potential by 1-D quadrature over the ring.
pub fn wire_potential_oracle(
    body: &WireBody,
    point: &FieldPoint,
    abs_tol: f64,
) -> Result<f64, Error> {
    let a = body.radius();
    let r = point.r();
    let z = point.z;
    let q2 = z * z + (r - a) * (r - a);
    let s4 = 4.0 * a * r;
    if q2 == 0.0 {
        return Err(Error::singularity(
            "oracle point lies on the wire".to_string(),
        ));
    }
    let mut evals = 0;
    let integrand = |th: f64| {
        let sh = (0.5 * th).sin();
        1.0 / (q2 + s4 * sh * sh).sqrt()
    };
    let val = adaptive(
        &integrand,
        0.0,
        PI,
        params(abs_tol * PI / body.mu(), 10_000_000),
        &mut evals,
    )?;
    Ok(-body.mu() / PI * val)
}

/// Shared 2-D quadrature over a radial band `[rho_lo, rho_hi]` of surface
/// density `G sigma`, evaluated at cylindrical `(r, z)`.
///
/// The outer integral is split at `rho = r` whenever that radius falls
/// inside the band, so that the on-plate integrable singularity (z = 0) sits
/// at a panel endpoint, where the interior-node rules never sample it.
fn band_potential(
    g_sigma: f64,
    rho_lo: f64,
    rho_hi: f64,
    r: f64,
    z: f64,
    abs_tol: f64,
) -> Result<f64, Error> {
    let mut evals: u64 = 0;
    let budget = 80_000_000;
    // error allocation: inner errors integrate over the band width
    let j_tol = abs_tol / (2.0 * g_sigma) / 2.0;
    let band = rho_hi - rho_lo;
    let inner_tol = (j_tol / (2.0 * band * rho_hi.max(1.0))).max(1e-15);
    let inner = |rho: f64| -> f64 {
        // half-angle form of the chord distance: exact near the seam, where
        // z^2 + r^2 + rho^2 - 2 r rho cos(theta) would cancel catastrophically
        let q2 = z * z + (r - rho) * (r - rho);
        let s4 = 4.0 * rho * r;
        let f = |th: f64| {
            let sh = (0.5 * th).sin();
            1.0 / (q2 + s4 * sh * sh).sqrt()
        };
        // peak sits at theta = 0; an explicit split helps the refinement
        let mut e2 = 0;
        let head = adaptive(&f, 0.0, 0.125, params(inner_tol, budget), &mut e2).unwrap_or(f64::NAN);
        let tail = adaptive(&f, 0.125, PI, params(inner_tol, budget), &mut e2).unwrap_or(f64::NAN);
        rho * (head + tail)
    };
    let mut j = 0.0;
    let mut seams = vec![rho_lo, rho_hi];
    if rho_lo < r && r < rho_hi {
        seams.insert(1, r);
    }
    for w in seams.windows(2) {
        j += adaptive(&inner, w[0], w[1], params(j_tol, budget), &mut evals)?;
    }
    if !j.is_finite() {
        return Err(Error::Convergence(
            "potential oracle quadrature did not converge".to_string(),
        ));
    }
    Ok(-2.0 * g_sigma * j)
}

/// Disk potential by 2-D quadrature of the defining integral.
pub fn disk_potential_oracle(
    body: &DiskBody,
    point: &FieldPoint,
    abs_tol: f64,
) -> Result<f64, Error> {
    let r = point.r();
    if point.z == 0.0 && r == body.radius() {
        return Err(Error::singularity(
            "oracle point on the disk edge".to_string(),
        ));
    }
    band_potential(body.g_sigma(), 0.0, body.radius(), r, point.z, abs_tol)
}

/// Annulus potential by 2-D quadrature of the defining integral.
pub fn annulus_potential_oracle(
    body: &AnnulusBody,
    point: &FieldPoint,
    abs_tol: f64,
) -> Result<f64, Error> {
    let r = point.r();
    if point.z == 0.0 && (r == body.inner() || r == body.outer()) {
        return Err(Error::singularity(
            "oracle point on a plate edge".to_string(),
        ));
    }
    band_potential(
        body.g_sigma(),
        body.inner(),
        body.outer(),
        r,
        point.z,
        abs_tol,
    )
}

/// Stack potential: sum of member oracles, each to `abs_tol / n`.
pub fn stack_potential_oracle(
    stack: &BodyStack,
    point: &FieldPoint,
    abs_tol: f64,
) -> Result<f64, Error> {
    let n = stack.members().len() as f64;
    stack
        .members()
        .iter()
        .map(|a| annulus_potential_oracle(a, point, abs_tol / n))
        .sum()
}

/// Annulus gradient by differentiating under the integral sign (point must
/// be strictly off the plate).
pub fn annulus_gradient_oracle(
    body: &AnnulusBody,
    point: &FieldPoint,
    abs_tol: f64,
) -> Result<[f64; 3], Error> {
    let r = point.r();
    let z = point.z;
    if z == 0.0 && body.covers(r) {
        return Err(Error::FieldDiscontinuity {
            jump: body.normal_jump(),
        });
    }
    let g_sigma = body.g_sigma();
    let (rho_lo, rho_hi) = (body.inner(), body.outer());
    let budget = 80_000_000;
    let j_tol = abs_tol / (2.0 * g_sigma) / 2.0;
    let inner_tol = (j_tol / (2.0 * (rho_hi - rho_lo) * rho_hi.max(1.0))).max(1e-15);

    // poloidal kernels: d/dr and d/dz of -1/d under the integral
    let comp = |radial: bool| -> Result<f64, Error> {
        let inner = |rho: f64| -> f64 {
            let q2 = z * z + (r - rho) * (r - rho);
            let s4 = 4.0 * rho * r;
            let f = |th: f64| {
                let sh = (0.5 * th).sin();
                let d2 = q2 + s4 * sh * sh;
                let d = d2.sqrt();
                // r - rho cos(theta) = (r - rho) + 2 rho sin^2(theta/2)
                let num = if radial {
                    (r - rho) + 2.0 * rho * sh * sh
                } else {
                    z
                };
                num / (d2 * d)
            };
            let mut e2 = 0;
            let head =
                adaptive(&f, 0.0, 0.125, params(inner_tol, budget), &mut e2).unwrap_or(f64::NAN);
            let tail =
                adaptive(&f, 0.125, PI, params(inner_tol, budget), &mut e2).unwrap_or(f64::NAN);
            rho * (head + tail)
        };
        let mut evals = 0;
        let mut seams = vec![rho_lo, rho_hi];
        if rho_lo < r && r < rho_hi {
            seams.insert(1, r);
        }
        let mut val = 0.0;
        for w in seams.windows(2) {
            val += adaptive(&inner, w[0], w[1], params(j_tol, budget), &mut evals)?;
        }
        Ok(2.0 * g_sigma * val)
    };

    let g_r = if r == 0.0 { 0.0 } else { comp(true)? };
    let g_z = comp(false)?;
    if r == 0.0 {
        return Ok([0.0, 0.0, g_z]);
    }
    Ok([g_r * point.x / r, g_r * point.y / r, g_z])
}

/// Stack gradient oracle.
pub fn stack_gradient_oracle(
    stack: &BodyStack,
    point: &FieldPoint,
    abs_tol: f64,
) -> Result<[f64; 3], Error> {
    let n = stack.members().len() as f64;
    let mut g = [0.0; 3];
    for a in stack.members() {
        let ga = annulus_gradient_oracle(a, point, abs_tol / n)?;
        g[0] += ga[0];
        g[1] += ga[1];
        g[2] += ga[2];
    }
    Ok(g)
}
