//! Adaptive one-dimensional quadrature.
//!
//! Globally adaptive scheme: every panel is evaluated with 15- and 31-point
//! Gauss–Legendre rules, the difference serving as its error estimate, and
//! the worst panel is bisected until the summed error estimate meets the
//! requested tolerance. Global refinement (rather than per-panel tolerance
//! splitting) is what keeps integrable endpoint singularities from blowing
//! up the panel count.
//!
//! Nodes and weights are computed once at startup by Newton iteration on the
//! Legendre recurrence, so there are no hand-copied coefficient tables to
//! transcribe wrong. All nodes are interior, which matters here: the
//! potential oracles have integrable endpoint singularities that must never
//! be evaluated exactly.

use crate::error::Error;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Evaluation budget and tolerance for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadParams {
    /// Absolute tolerance on the integral value.
    pub abs_tol: f64,
    /// Maximum number of integrand evaluations before giving up.
    pub max_evals: u64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            abs_tol: 1e-10,
            max_evals: 50_000_000,
        }
    }
}

struct Panel {
    err: f64,
    lo: f64,
    hi: f64,
    val: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `params.abs_tol`.
///
/// `evals` accumulates the number of integrand calls across nested uses so a
/// single budget can cover a whole 2-D integration.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    params: QuadParams,
    evals: &mut u64,
) -> Result<f64, Error> {
    if a == b {
        return Ok(0.0);
    }
    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    let mut total = 0.0;
    let mut live_err = 0.0;
    // error of panels retired at the refinement floor
    let mut settled_err = 0.0;

    let make = |lo: f64, hi: f64, depth: u32, evals: &mut u64| -> Result<Panel, Error> {
        let coarse = fixed_rule(f, lo, hi, rule_15());
        let fine = fixed_rule(f, lo, hi, rule_31());
        *evals += 46;
        if !fine.is_finite() {
            return Err(Error::Convergence(format!(
                "integrand non-finite on [{lo}, {hi}]"
            )));
        }
        Ok(Panel {
            err: (fine - coarse).abs(),
            lo,
            hi,
            val: fine,
            depth,
        })
    };

    let first = make(a, b, 0, evals)?;
    total += first.val;
    live_err += first.err;
    heap.push(first);

    while live_err + settled_err > params.abs_tol {
        let Some(worst) = heap.pop() else {
            break;
        };
        live_err -= worst.err;
        // refinement floor: depth, float resolution, or pure rounding noise
        let mid = 0.5 * (worst.lo + worst.hi);
        let at_floor = worst.depth >= 100
            || mid <= worst.lo
            || mid >= worst.hi
            || worst.err <= 8.0 * f64::EPSILON * worst.val.abs();
        if at_floor {
            settled_err += worst.err;
            continue;
        }
        if *evals + 92 > params.max_evals {
            return Err(Error::Convergence(format!(
                "quadrature budget of {} evaluations exhausted with error {:.3e} (tol {:.3e})",
                params.max_evals,
                live_err + settled_err + worst.err,
                params.abs_tol
            )));
        }
        let left = make(worst.lo, mid, worst.depth + 1, evals)?;
        let right = make(mid, worst.hi, worst.depth + 1, evals)?;
        total += left.val + right.val - worst.val;
        live_err += left.err + right.err;
        heap.push(left);
        heap.push(right);
    }
    if live_err + settled_err > params.abs_tol {
        return Err(Error::Convergence(format!(
            "quadrature stalled at error {:.3e} (tol {:.3e})",
            live_err + settled_err,
            params.abs_tol
        )));
    }
    Ok(total)
}

fn fixed_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &GaussRule) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * f(c + h * x);
    }
    sum * h
}

struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn rule_15() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

fn rule_31() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(31))
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess, accurate to a few percent.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1e-3) {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_pair(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    GaussRule { nodes, weights }
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
