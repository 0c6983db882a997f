//! Bracketed bisection with sign-change certificates.
//!
//! Every root produced here carries the bracket that proves it: the interval
//! endpoints and the opposite-signed function values at them. Downstream
//! reports keep the certificate so a reader can re-check the claim without
//! re-running the scan.

use crate::error::Error;

/// A sign-change interval: `f(lo) * f(hi) < 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// True when the function crosses upward (negative to positive).
    pub fn ascending(&self) -> bool {
        self.f_lo < 0.0
    }
}

/// A bisection result: midpoint, residual, and the final certificate.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub f_x: f64,
    pub bracket: Bracket,
}

/// Evaluate `f` on sorted `points`, collecting every sign-change bracket.
/// Points where `f` fails (edge circles) or returns non-finite values are
/// skipped, which simply splits the scan there.
pub fn scan_sign_changes<F>(f: &mut F, points: &[f64]) -> Vec<Bracket>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    let mut brackets = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in points {
        let v = match f(x) {
            Ok(v) if v.is_finite() => v,
            _ => {
                prev = None;
                continue;
            }
        };
        if let Some((px, pv)) = prev {
            if pv == 0.0 {
                // exact zero at a grid point: synthesize a tight bracket
                brackets.push(Bracket {
                    lo: px,
                    hi: px,
                    f_lo: 0.0,
                    f_hi: 0.0,
                });
            } else if pv.signum() != v.signum() && v != 0.0 {
                brackets.push(Bracket {
                    lo: px,
                    hi: x,
                    f_lo: pv,
                    f_hi: v,
                });
            }
        }
        prev = Some((x, v));
    }
    brackets
}

/// Bisect a certified bracket until its relative width reaches `xtol_rel`
/// (or floating-point resolution, whichever comes first).
pub fn bisect<F>(f: &mut F, bracket: Bracket, xtol_rel: f64) -> Result<Root, Error>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    if lo == hi {
        return Ok(Root {
            x: lo,
            f_x: f_lo,
            bracket,
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidBracket(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= xtol_rel * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let fm = match f(mid) {
            Ok(v) if v.is_finite() => v,
            // an unlucky interior failure: shrink toward the low side
            _ => {
                hi = mid;
                continue;
            }
        };
        if fm == 0.0 {
            return Ok(Root {
                x: mid,
                f_x: 0.0,
                bracket: Bracket { lo, hi, f_lo, f_hi },
            });
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    let x = 0.5 * (lo + hi);
    let f_x = f(x).unwrap_or(0.5 * (f_lo + f_hi));
    Ok(Root {
        x,
        f_x,
        bracket: Bracket { lo, hi, f_lo, f_hi },
    })
}
