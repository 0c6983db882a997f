//! Complete and incomplete elliptic integrals and Heuman's lambda function.
//!
//! Every public operation takes the *parameter* `m = k^2`, where `k` is the
//! modulus — the same convention as `scipy.special.ellipk(m)` and
//! Mathematica's `EllipticK[m]`. Formulas in the literature mix `k` and
//! `k^2` freely; fixing one convention at this boundary removes the whole
//! bug class.
//!
//! Evaluation reduces everything to Carlson's symmetric forms RF, RD, RJ and
//! RC via the duplication theorem, which holds full double precision over
//! the entire domain, including the logarithmic blow-up of K as m -> 1.

use crate::error::Error;
use std::f64::consts::FRAC_PI_2;

/// Complete elliptic integral of the first kind,
/// `K(m) = integral of 1/sqrt(1 - m sin^2 t) over [0, pi/2]`.
///
/// Accepts any `m < 1` (negative values included; the symmetric form needs
/// no imaginary-modulus transformation). `m >= 1` is a domain error: K has
/// a logarithmic pole at m = 1 and the caller must treat it explicitly.
pub fn complete_k(m: f64) -> Result<f64, Error> {
    if !m.is_finite() || m >= 1.0 {
        return Err(Error::domain(format!("K(m) requires m < 1, got m = {m}")));
    }
    Ok(carlson_rf(0.0, 1.0 - m, 1.0))
}

/// K(m) given the complement `mc = 1 - m` directly.
///
/// Near an edge circle of a plate, `mc = q^2/p^2` is known exactly while
/// `1 - (1 - mc)` would lose every significant digit; the closed-form
/// potentials call this instead of [`complete_k`].
pub(crate) fn complete_k_from_complement(mc: f64) -> f64 {
    debug_assert!(mc > 0.0);
    carlson_rf(0.0, mc, 1.0)
}

/// Complete elliptic integral of the second kind,
/// `E(m) = integral of sqrt(1 - m sin^2 t) over [0, pi/2]`.
///
/// Accepts any `m <= 1`; `E(1) = 1` exactly.
pub fn complete_e(m: f64) -> Result<f64, Error> {
    if !m.is_finite() || m > 1.0 {
        return Err(Error::domain(format!("E(m) requires m <= 1, got m = {m}")));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(complete_e_pair(m, 1.0 - m))
}

/// E(m) from the exact pair `(m, mc)` with `mc = 1 - m`.
///
/// Very close to m = 1 the symmetric-form route computes E as the difference
/// of two ~K-sized values and loses a digit; the complementary expansion
///
/// ```text
/// E(1 - q) = 1 + q (L/2 - 1/4) + q^2 ((3/16) L - 13/64) + O(q^3 L),
/// L = ln(4 / sqrt(q)),
/// ```
///
/// takes over below q = 1e-6 (truncation under 1e-18 there).
pub(crate) fn complete_e_pair(m: f64, mc: f64) -> f64 {
    debug_assert!(mc > 0.0);
    if mc < 1e-6 && m > 0.0 {
        let l = (4.0 / mc.sqrt()).ln();
        return 1.0 + mc * (0.5 * l - 0.25) + mc * mc * (3.0 / 16.0 * l - 13.0 / 64.0);
    }
    carlson_rf(0.0, mc, 1.0) - m / 3.0 * carlson_rd(0.0, mc, 1.0)
}

/// `(K, E)` from the exact complement pair; shares the RF evaluation when
/// the difference route is well conditioned.
pub(crate) fn complete_ke_pair(m: f64, mc: f64) -> (f64, f64) {
    let rf = carlson_rf(0.0, mc, 1.0);
    if mc < 1e-6 && m > 0.0 {
        return (rf, complete_e_pair(m, mc));
    }
    let e = rf - m / 3.0 * carlson_rd(0.0, mc, 1.0);
    (rf, e)
}

/// Complete elliptic integral of the third kind,
/// `Pi(n2, m) = integral of 1/((1 - n2 sin^2 t) sqrt(1 - m sin^2 t))`.
///
/// `n2` is the characteristic. `n2 = 1` is the singular characteristic
/// where the integral diverges; for `n2 > 1` the Cauchy principal value is
/// returned. This divergence at n2 = 1 is exactly what the reformulated
/// disk potential avoids.
pub fn complete_pi(n2: f64, m: f64) -> Result<f64, Error> {
    if !m.is_finite() || !(0.0..1.0).contains(&m) {
        return Err(Error::domain(format!(
            "Pi(n2, m) requires 0 <= m < 1, got m = {m}"
        )));
    }
    if !n2.is_finite() || n2 < 0.0 {
        return Err(Error::domain(format!(
            "Pi(n2, m) requires characteristic n2 >= 0, got n2 = {n2}"
        )));
    }
    if n2 == 1.0 {
        return Err(Error::singularity(
            "Pi diverges at the singular characteristic n2 = 1".to_string(),
        ));
    }
    let mc = 1.0 - m;
    Ok(carlson_rf(0.0, mc, 1.0) + n2 / 3.0 * carlson_rj(0.0, mc, 1.0, 1.0 - n2))
}

/// Incomplete elliptic integral of the first kind `F(phi | m)` on
/// `0 <= phi <= pi/2`, `0 <= m <= 1`, excluding the divergent corner
/// `(phi, m) = (pi/2, 1)`.
pub fn incomplete_f(phi: f64, m: f64) -> Result<f64, Error> {
    check_incomplete_args(phi, m)?;
    if phi == FRAC_PI_2 {
        if m == 1.0 {
            return Err(Error::domain(
                "F(pi/2 | 1) diverges (logarithmic corner)".to_string(),
            ));
        }
        return complete_k(m); // completeness limit, same code path as K
    }
    let s = phi.sin();
    let c = phi.cos();
    Ok(s * carlson_rf(c * c, 1.0 - m * s * s, 1.0))
}

/// Incomplete elliptic integral of the second kind `E(phi | m)` on the same
/// domain as [`incomplete_f`].
pub fn incomplete_e(phi: f64, m: f64) -> Result<f64, Error> {
    check_incomplete_args(phi, m)?;
    if phi == FRAC_PI_2 {
        if m == 1.0 {
            return Err(Error::domain(
                "E(phi | m) rejected at the corner (pi/2, 1)".to_string(),
            ));
        }
        return complete_e(m); // completeness limit, same code path as E
    }
    if m == 1.0 {
        // E(phi | 1) = sin(phi); the RD route hits two zero arguments.
        return Ok(phi.sin());
    }
    let s = phi.sin();
    let c = phi.cos();
    let q = 1.0 - m * s * s;
    Ok(s * (carlson_rf(c * c, q, 1.0) - m * s * s / 3.0 * carlson_rd(c * c, q, 1.0)))
}

fn check_incomplete_args(phi: f64, m: f64) -> Result<(), Error> {
    if !phi.is_finite() || !(0.0..=FRAC_PI_2).contains(&phi) {
        return Err(Error::domain(format!(
            "phi must lie in [0, pi/2], got {phi}"
        )));
    }
    if !m.is_finite() || !(0.0..=1.0).contains(&m) {
        return Err(Error::domain(format!(
            "parameter m must lie in [0, 1], got {m}"
        )));
    }
    Ok(())
}

/// Heuman's lambda function via the incomplete-integral combination
///
/// ```text
/// L0(phi | m) = (2/pi) ( E(m) F(phi | mc) + K(m) E(phi | mc) - K(m) F(phi | mc) )
/// ```
///
/// with `mc = 1 - m` the complementary parameter. This combination — not the
/// third-kind integral it replaces — is what keeps the disk potential finite
/// on the cylinder r = a, so it is the only form implemented.
///
/// `L0(pi/2 | m) = 1` for every m in [0, 1) (Legendre's relation collapses
/// the combination), and `L0(0 | m) = 0`.
pub fn heuman_lambda(phi: f64, m: f64) -> Result<f64, Error> {
    check_incomplete_args(phi, m)?;
    if phi == FRAC_PI_2 {
        // Legendre: E K' + K E' - K K' = pi/2 for m < 1; limit is 1 at m = 1 too.
        return Ok(1.0);
    }
    if m == 1.0 {
        // mc = 0: F and E(.|0) coincide, the K terms cancel, leaving (2/pi) E(1) phi.
        return Ok(2.0 * phi / std::f64::consts::PI);
    }
    let mc = 1.0 - m;
    let (k, e) = complete_ke_pair(m, mc);
    let f_inc = incomplete_f(phi, mc)?;
    let e_inc = incomplete_e(phi, mc)?;
    Ok((2.0 / std::f64::consts::PI) * (e * f_inc + k * (e_inc - f_inc)))
}

/// `(1 - m/2) K(m) - E(m)`, the bracket appearing in every radial-derivative
/// closed form.
///
/// The direct difference cancels catastrophically for small m (the true
/// value is O(m^2) while K and E are O(1)), so below `m = 1/4` it is summed
/// as the hypergeometric-style series
///
/// ```text
/// (pi/2) * sum_{n>=2} c_n m^n,   c_n = k_{n-1} (n-1)/(2n),
/// k_j = ((2j-1)!! / (2j)!!)^2.
/// ```
pub(crate) fn radial_kernel(m: f64, mc: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&m) && mc >= 0.0);
    if m < 0.25 {
        let mut kj = 1.0; // k_{n-1}, starting at k_1 for n = 2
        let mut sum = 0.0;
        let mut mn = m * m;
        for n in 2..80u32 {
            let j = n - 1;
            let odd = 2.0 * j as f64 - 1.0;
            let even = 2.0 * j as f64;
            kj *= (odd / even) * (odd / even);
            let term = kj * (n as f64 - 1.0) / (2.0 * n as f64) * mn;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
            mn *= m;
        }
        FRAC_PI_2 * sum
    } else {
        let (k, e) = complete_ke_pair(m, mc);
        (1.0 - 0.5 * m) * k - e
    }
}

// ---------------------------------------------------------------------------
// Carlson symmetric forms (duplication-theorem reduction, cf. Carlson 1977
// and Numerical Recipes 3rd ed. §6.12). Tolerances are set so the truncation
// error of the final Taylor correction sits below 1e-17 relative.
// ---------------------------------------------------------------------------

const CARLSON_MAX_ITER: usize = 120;

/// RF(x, y, z); x, y, z >= 0, at most one zero.
fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERR_TOL: f64 = 1.0e-3;
    debug_assert!(x >= 0.0 && y >= 0.0 && z >= 0.0);
    debug_assert!(x + y > 0.0 && x + z > 0.0 && y + z > 0.0);
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut ave;
    let (mut dx, mut dy, mut dz);
    let mut iter = 0;
    loop {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        iter += 1;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERR_TOL || iter >= CARLSON_MAX_ITER {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / ave.sqrt()
}

/// RD(x, y, z) = RJ(x, y, z, z); x, y >= 0 at most one zero, z > 0.
fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const ERR_TOL: f64 = 1.0e-3;
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    debug_assert!(x >= 0.0 && y >= 0.0 && z > 0.0 && x + y > 0.0);
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz);
    let mut iter = 0;
    loop {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lam));
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = 0.2 * (xt + yt + 3.0 * zt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        iter += 1;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERR_TOL || iter >= CARLSON_MAX_ITER {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac
            * (1.0
                + ed * (-C1 + C5 * ed - C6 * dz * ee)
                + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (ave * ave.sqrt())
}

/// RJ(x, y, z, p); x, y, z >= 0 at most one zero, p != 0. For p < 0 the
/// Cauchy principal value is returned.
fn carlson_rj(x: f64, y: f64, z: f64, p: f64) -> f64 {
    const ERR_TOL: f64 = 1.0e-3;
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 3.0;
    const C3: f64 = 3.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.75 * C3;
    const C6: f64 = 1.5 * C4;
    const C7: f64 = 0.5 * C2;
    const C8: f64 = C3 + C3;
    debug_assert!(x >= 0.0 && y >= 0.0 && z >= 0.0 && p != 0.0);
    let (mut xt, mut yt, mut zt, mut pt);
    let (mut a, mut b, mut rcx) = (0.0, 0.0, 0.0);
    if p > 0.0 {
        xt = x;
        yt = y;
        zt = z;
        pt = p;
    } else {
        xt = x.min(y).min(z);
        zt = x.max(y).max(z);
        yt = x + y + z - xt - zt;
        a = 1.0 / (yt - p);
        b = a * (zt - yt) * (yt - xt);
        pt = yt + b;
        let rho = xt * zt / yt;
        let tau = p * pt / yt;
        rcx = carlson_rc(rho, tau);
    }
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz, mut dp);
    let mut iter = 0;
    loop {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = (pt * (sx + sy + sz) + sx * sy * sz).powi(2);
        let beta = pt * (pt + lam) * (pt + lam);
        sum += fac * carlson_rc(alpha, beta);
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        pt = 0.25 * (pt + lam);
        ave = 0.2 * (xt + yt + zt + 2.0 * pt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        dp = (ave - pt) / ave;
        iter += 1;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) < ERR_TOL || iter >= CARLSON_MAX_ITER
        {
            break;
        }
    }
    let ea = dx * (dy + dz) + dy * dz;
    let eb = dx * dy * dz;
    let ec = dp * dp;
    let ed = ea - 3.0 * ec;
    let ee = eb + 2.0 * dp * (ea - ec);
    let mut ans = 3.0 * sum
        + fac
            * (1.0
                + ed * (-C1 + C5 * ed - C6 * ee)
                + eb * (C7 + dp * (-C8 + dp * C4))
                + dp * ea * (C2 - dp * C3)
                - C2 * dp * ec)
            / (ave * ave.sqrt());
    if p <= 0.0 {
        ans = a * (b * ans + 3.0 * (rcx - carlson_rf(xt, yt, zt)));
    }
    ans
}

/// Degenerate form RC(x, y) = RF(x, y, y); x >= 0, y != 0.
fn carlson_rc(x: f64, y: f64) -> f64 {
    const ERR_TOL: f64 = 6.0e-4;
    const C1: f64 = 0.3;
    const C2: f64 = 1.0 / 7.0;
    const C3: f64 = 0.375;
    const C4: f64 = 9.0 / 22.0;
    debug_assert!(x >= 0.0 && y != 0.0);
    let (mut xt, mut yt, w) = if y > 0.0 {
        (x, y, 1.0)
    } else {
        (x - y, -y, x.sqrt() / (x - y).sqrt())
    };
    let mut ave;
    let mut s;
    let mut iter = 0;
    loop {
        let lam = 2.0 * xt.sqrt() * yt.sqrt() + yt;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        ave = (xt + yt + yt) / 3.0;
        s = (yt - ave) / ave;
        iter += 1;
        if s.abs() < ERR_TOL || iter >= CARLSON_MAX_ITER {
            break;
        }
    }
    w * (1.0 + s * s * (C1 + s * (C2 + s * (C3 + s * C4)))) / ave.sqrt()
}
