//! Closed-form potentials and gradients for wires, disks, annuli and stacks.
//!
//! Two disk formulations coexist on purpose. The "naive" closed form carries
//! a third-kind elliptic integral whose characteristic reaches 1 on the whole
//! cylinder r = a (z != 0), where it diverges even though the potential is
//! perfectly finite there. The production form replaces that term with a
//! combination of complete and incomplete integrals (Heuman's lambda) and is
//! valid everywhere except the edge circle itself. The naive form is kept
//! solely as a cross-validation target.
//!
//! Sign conventions: potentials are negative (attractive), gradients are
//! `(dU/dx, dU/dy, dU/dz)`, so accelerations are their negatives. `sign(0)`
//! is defined as 0 throughout; Legendre's relation then makes the reformed
//! expression continuous across r = a, which any +-1 choice would break.

use crate::bodies::{AnnulusBody, BodyStack, DiskBody, FieldPoint, FieldSample, WireBody};
use crate::elliptic::{
    complete_k_from_complement, complete_ke_pair, complete_pi, incomplete_e, incomplete_f,
    radial_kernel,
};
use crate::error::Error;
use std::f64::consts::{FRAC_PI_2, PI};

/// Geometry of one disk edge relative to a cylindrical point (r, z).
struct EdgeGeom {
    /// p = sqrt((c + r)^2 + z^2), the far distance to the edge circle.
    p: f64,
    /// q = sqrt((c - r)^2 + z^2), the near distance to the edge circle.
    q: f64,
    /// Elliptic parameter m = 4 c r / p^2.
    m: f64,
    /// Exact complement mc = q^2 / p^2 = 1 - m (no cancellation near m = 1).
    mc: f64,
    /// sign(c - r) with sign(0) = 0.
    s: f64,
}

fn edge_geom(c: f64, r: f64, z: f64) -> EdgeGeom {
    let p2 = (c + r) * (c + r) + z * z;
    let q2 = (c - r) * (c - r) + z * z;
    let p = p2.sqrt();
    EdgeGeom {
        p,
        q: q2.sqrt(),
        // mathematically <= 1; rounding can push it an ulp over
        m: (4.0 * c * r / p2).min(1.0),
        mc: q2 / p2,
        s: sign0(c - r),
    }
}

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Potential of a circular wire: `U = -(2 mu / (pi p)) K(m)` with
/// `m = 1 - q^2/p^2`, extended off the Oxz plane by axial symmetry.
pub fn wire_potential(body: &WireBody, point: &FieldPoint) -> Result<f64, Error> {
    let r = point.r();
    let z = point.z;
    let g = edge_geom(body.radius(), r, z);
    if g.q == 0.0 {
        return Err(Error::singularity(format!(
            "point lies on the wire of radius {}",
            body.radius()
        )));
    }
    Ok(-(2.0 * body.mu() / (PI * g.p)) * complete_k_from_complement(g.mc))
}

/// Bracket of the reformulated disk expression, without the `2 G sigma`
/// prefactor:
///
/// ```text
/// B = -p E(m) - ((c^2 - r^2)/p) K(m) + |z| (pi/2)(1 + s)
///     - |z| s [ E(m) F(phi|mc) + K(m) (E(phi|mc) - F(phi|mc)) ],
/// phi = arcsin(|z| / q),  s = sign(c - r).
/// ```
///
/// Valid everywhere except the edge circle q = 0. On the plane the incomplete
/// terms vanish (phi = 0), on the cylinder r = c the s = 0 convention equals
/// the two-sided limit which Legendre's relation makes continuous.
fn disk_bracket(c: f64, r: f64, z: f64) -> Result<f64, Error> {
    let g = edge_geom(c, r, z);
    if g.q == 0.0 {
        return Err(Error::singularity(format!(
            "point lies on the plate edge circle r = {c}"
        )));
    }
    let (k, e) = complete_ke_pair(g.m, g.mc);
    let az = z.abs();
    let mut b = -g.p * e - (c - r) * (c + r) / g.p * k + az * FRAC_PI_2 * (1.0 + g.s);
    if g.s != 0.0 && az > 0.0 {
        let phi = (az / g.q).asin();
        let f_inc = incomplete_f(phi, g.mc)?;
        let e_inc = incomplete_e(phi, g.mc)?;
        b -= az * g.s * (e * f_inc + k * (e_inc - f_inc));
    }
    Ok(b)
}

/// Disk potential in the reformulated (singularity-safe) closed form.
///
/// Defined everywhere except the edge circle (r = a, z = 0), including the
/// cylinder r = a with z != 0 where the naive form fails, and the plate
/// interior z = 0, r < a where it returns the on-plate value.
pub fn disk_potential(body: &DiskBody, point: &FieldPoint) -> Result<f64, Error> {
    let two_g_sigma = 2.0 * body.g_sigma();
    Ok(two_g_sigma * disk_bracket(body.radius(), point.r(), point.z)?)
}

/// Disk potential through the third-kind integral (retained only as a
/// cross-validation target):
///
/// ```text
/// U = (2 mu / (pi a^2)) ( |z|(pi/2)(1 + sign(a-r)) - p E(m)
///     - ((a^2-r^2)/p) K(m) - ((a-r)/(a+r)) (z^2/p) Pi(n2, m) ),
/// n2 = 4 a r / (a + r)^2.
/// ```
///
/// Fails on the whole cylinder r = a with z != 0, where n2 = 1.
pub fn disk_potential_naive(body: &DiskBody, point: &FieldPoint) -> Result<f64, Error> {
    let a = body.radius();
    let r = point.r();
    let z = point.z;
    let g = edge_geom(a, r, z);
    if g.q == 0.0 {
        return Err(Error::singularity(format!(
            "point lies on the plate edge circle r = {a}"
        )));
    }
    if r == a {
        return Err(Error::singularity(
            "third-kind characteristic n2 = 1 on the cylinder r = a; \
             use the reformulated disk potential here"
                .to_string(),
        ));
    }
    let (k, e) = complete_ke_pair(g.m, g.mc);
    let n2 = 4.0 * a * r / ((a + r) * (a + r));
    let pi3 = if n2 == 1.0 {
        unreachable!("n2 = 1 only at r = a")
    } else {
        complete_pi(n2, g.m)?
    };
    let az = z.abs();
    let val = az * FRAC_PI_2 * (1.0 + g.s)
        - g.p * e
        - (a - r) * (a + r) / g.p * k
        - (a - r) / (a + r) * z * z / g.p * pi3;
    Ok(2.0 * body.g_sigma() * val)
}

/// Annulus potential as the difference of two coaxial disk brackets sharing
/// the annulus surface density `G sigma = mu / (pi (a^2 - b^2))`.
pub fn annulus_potential(body: &AnnulusBody, point: &FieldPoint) -> Result<f64, Error> {
    let r = point.r();
    let z = point.z;
    let two_g_sigma = 2.0 * body.g_sigma();
    Ok(two_g_sigma * (disk_bracket(body.outer(), r, z)? - disk_bracket(body.inner(), r, z)?))
}

/// z-derivative bracket of one disk term (the part multiplying -G sigma):
///
/// ```text
/// T = (2 z / p) K(m) - 2 sign(z) ( pi/2 + (pi/2) s
///     - s [ (E(m) - K(m)) F(phi|mc) + K(m) E(phi|mc) ] ).
/// ```
fn disk_z_bracket(c: f64, r: f64, z: f64) -> Result<f64, Error> {
    if z == 0.0 {
        // off-plate in-plane points: U_z vanishes identically by symmetry
        return Ok(0.0);
    }
    let g = edge_geom(c, r, z);
    debug_assert!(g.q > 0.0);
    let (k, e) = complete_ke_pair(g.m, g.mc);
    let sz = sign0(z);
    let mut inner = FRAC_PI_2 * (1.0 + g.s);
    if g.s != 0.0 {
        let phi = (z.abs() / g.q).asin();
        let f_inc = incomplete_f(phi, g.mc)?;
        let e_inc = incomplete_e(phi, g.mc)?;
        inner -= g.s * ((e - k) * f_inc + k * e_inc);
    }
    Ok(2.0 * z / g.p * k - 2.0 * sz * inner)
}

/// Gradient `(U_x, U_y, U_z)` of the annulus potential at a point strictly
/// off the plate.
///
/// On the plate (z = 0, b <= r <= a) the normal derivative jumps by
/// `4 pi G sigma`; the error carries that jump so callers can report it.
pub fn annulus_gradient(body: &AnnulusBody, point: &FieldPoint) -> Result<[f64; 3], Error> {
    let r = point.r();
    let z = point.z;
    let (a, b) = (body.outer(), body.inner());
    if z == 0.0 && body.covers(r) {
        if r == a || r == b {
            return Err(Error::singularity(format!(
                "gradient requested on the edge circle r = {r}"
            )));
        }
        return Err(Error::FieldDiscontinuity {
            jump: body.normal_jump(),
        });
    }
    let g_sigma = body.g_sigma();
    if r == 0.0 {
        // on the axis the field is purely axial
        let uz =
            -2.0 * PI * g_sigma * z * (1.0 / (a * a + z * z).sqrt() - 1.0 / (b * b + z * z).sqrt());
        return Ok([0.0, 0.0, uz]);
    }
    let ga = edge_geom(a, r, z);
    let gb = edge_geom(b, r, z);
    if ga.q == 0.0 || gb.q == 0.0 {
        return Err(Error::singularity(
            "gradient requested on an edge circle".to_string(),
        ));
    }
    // radial derivative: U_r = 2 G sigma (p_a k(m_a) - p_b k(m_b)) / r with
    // k(m) = (1 - m/2) K(m) - E(m), summed stably for small m
    let u_r =
        2.0 * g_sigma / r * (ga.p * radial_kernel(ga.m, ga.mc) - gb.p * radial_kernel(gb.m, gb.mc));
    let u_z = -g_sigma * (disk_z_bracket(a, r, z)? - disk_z_bracket(b, r, z)?);
    Ok([u_r * point.x / r, u_r * point.y / r, u_z])
}

/// In-plane annulus potential (z = 0 reduction):
///
/// ```text
/// U(r) = 2 G sigma ( (b+r) E(m_b) + (b-r) K(m_b) - (a+r) E(m_a) - (a-r) K(m_a) ),
/// m_c = 4 c r / (c + r)^2.
/// ```
pub fn planar_potential(body: &AnnulusBody, r: f64) -> Result<f64, Error> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::domain(format!(
            "planar radius must be >= 0, got {r}"
        )));
    }
    let (a, b) = (body.outer(), body.inner());
    if r == a || r == b {
        return Err(Error::singularity(format!("edge circle at r = {r}")));
    }
    let term = |c: f64| -> f64 {
        let p = c + r;
        let mc = ((c - r) / p) * ((c - r) / p);
        let (k, e) = complete_ke_pair((4.0 * c * r / (p * p)).min(1.0), mc);
        p * e + (c - r) * k
    };
    Ok(2.0 * body.g_sigma() * (term(b) - term(a)))
}

/// Radial derivative of the in-plane potential:
///
/// ```text
/// U'(r) = (2 G sigma / r) ( p_a [(1 - m_a/2) K(m_a) - E(m_a)]
///                         - p_b [(1 - m_b/2) K(m_b) - E(m_b)] ),  p_c = c + r,
/// ```
///
/// the same bracket as the full gradient restricted to z = 0. It diverges
/// to +infinity at each outer edge and to -infinity at each inner edge
/// (logarithmically), and tends to 0 linearly as r -> 0.
pub fn planar_radial_derivative(body: &AnnulusBody, r: f64) -> Result<f64, Error> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::domain(format!(
            "planar derivative needs r > 0, got {r}"
        )));
    }
    let (a, b) = (body.outer(), body.inner());
    if r == a || r == b {
        return Err(Error::singularity(format!("edge circle at r = {r}")));
    }
    let term = |c: f64| -> f64 {
        let p = c + r;
        let mc = ((c - r) / p) * ((c - r) / p);
        p * radial_kernel((4.0 * c * r / (p * p)).min(1.0), mc)
    };
    Ok(2.0 * body.g_sigma() / r * (term(a) - term(b)))
}

/// Stack potential: sum of member potentials (error loci are unioned).
pub fn stack_potential(stack: &BodyStack, point: &FieldPoint) -> Result<f64, Error> {
    stack
        .members()
        .iter()
        .map(|a| annulus_potential(a, point))
        .sum()
}

/// Stack gradient: sum of member gradients.
pub fn stack_gradient(stack: &BodyStack, point: &FieldPoint) -> Result<[f64; 3], Error> {
    let mut g = [0.0; 3];
    for a in stack.members() {
        let ga = annulus_gradient(a, point)?;
        g[0] += ga[0];
        g[1] += ga[1];
        g[2] += ga[2];
    }
    Ok(g)
}

/// Stack in-plane potential.
pub fn stack_planar_potential(stack: &BodyStack, r: f64) -> Result<f64, Error> {
    stack.members().iter().map(|a| planar_potential(a, r)).sum()
}

/// Stack in-plane radial derivative.
pub fn stack_planar_derivative(stack: &BodyStack, r: f64) -> Result<f64, Error> {
    stack
        .members()
        .iter()
        .map(|a| planar_radial_derivative(a, r))
        .sum()
}

/// Potential plus gradient with validity flags, for field tables.
pub fn stack_field_sample(stack: &BodyStack, point: &FieldPoint) -> FieldSample {
    let r = point.r();
    let on_edge = point.z == 0.0 && stack.edge_radii().contains(&r);
    if on_edge {
        return FieldSample {
            u: None,
            grad: None,
            on_plate: false,
            on_edge: true,
        };
    }
    let on_plate = point.z == 0.0 && stack.on_any_plate(r);
    let u = stack_potential(stack, point).ok();
    let grad = if on_plate {
        None
    } else {
        stack_gradient(stack, point).ok()
    };
    FieldSample {
        u,
        grad,
        on_plate,
        on_edge: false,
    }
}
