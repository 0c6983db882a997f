//! Body geometries and field-evaluation records.
//!
//! Every body lives in the z = 0 plane, centered on the origin. Units form a
//! coherent system with G folded into the gravitational parameter mu = G*M,
//! so potentials are specific energies (length^2/time^2).

use crate::error::Error;

/// A massive circular wire of radius `a` in the plane z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireBody {
    a: f64,
    mu: f64,
}

impl WireBody {
    pub fn new(a: f64, mu: f64) -> Result<Self, Error> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!(
                "wire radius must be positive, got {a}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!("wire mu must be positive, got {mu}")));
        }
        Ok(WireBody { a, mu })
    }

    pub fn radius(&self) -> f64 {
        self.a
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// A solid uniform disk of radius `a`, surface density sigma = M/(pi a^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskBody {
    a: f64,
    mu: f64,
}

impl DiskBody {
    pub fn new(a: f64, mu: f64) -> Result<Self, Error> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!(
                "disk radius must be positive, got {a}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!("disk mu must be positive, got {mu}")));
        }
        Ok(DiskBody { a, mu })
    }

    pub fn radius(&self) -> f64 {
        self.a
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// G * sigma = mu / (pi a^2).
    pub fn g_sigma(&self) -> f64 {
        self.mu / (std::f64::consts::PI * self.a * self.a)
    }
}

/// A uniform annular disk with outer radius `a`, inner radius `b` (0 < b < a).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusBody {
    a: f64,
    b: f64,
    mu: f64,
}

impl AnnulusBody {
    pub fn new(a: f64, b: f64, mu: f64) -> Result<Self, Error> {
        if !(a.is_finite() && b.is_finite() && 0.0 < b && b < a) {
            return Err(Error::domain(format!(
                "annulus radii must satisfy 0 < b < a, got a = {a}, b = {b}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!(
                "annulus mu must be positive, got {mu}"
            )));
        }
        Ok(AnnulusBody { a, b, mu })
    }

    pub fn outer(&self) -> f64 {
        self.a
    }

    pub fn inner(&self) -> f64 {
        self.b
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// G * sigma = mu / (pi (a^2 - b^2)).
    pub fn g_sigma(&self) -> f64 {
        self.mu / (std::f64::consts::PI * (self.a * self.a - self.b * self.b))
    }

    /// Magnitude of the normal-derivative jump across the plate, 4 pi G sigma.
    pub fn normal_jump(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.g_sigma()
    }

    /// Whether the in-plane radius r lies on the plate, boundary included.
    pub fn covers(&self, r: f64) -> bool {
        (self.b..=self.a).contains(&r)
    }
}

/// An ordered collection of concentric annuli with pairwise disjoint radial
/// intervals; its potential is the sum of the members' potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyStack {
    annuli: Vec<AnnulusBody>,
}

impl BodyStack {
    /// Builds a stack, sorting members by inner radius and rejecting
    /// overlapping or touching plates.
    pub fn new(mut annuli: Vec<AnnulusBody>) -> Result<Self, Error> {
        if annuli.is_empty() {
            return Err(Error::domain(
                "a body stack needs at least one annulus".to_string(),
            ));
        }
        annuli.sort_by(|x, y| x.inner().total_cmp(&y.inner()));
        for pair in annuli.windows(2) {
            if pair[0].outer() >= pair[1].inner() {
                return Err(Error::domain(format!(
                    "annulus intervals [{}, {}] and [{}, {}] are not disjoint",
                    pair[0].inner(),
                    pair[0].outer(),
                    pair[1].inner(),
                    pair[1].outer()
                )));
            }
        }
        Ok(BodyStack { annuli })
    }

    pub fn single(annulus: AnnulusBody) -> Self {
        BodyStack {
            annuli: vec![annulus],
        }
    }

    pub fn members(&self) -> &[AnnulusBody] {
        &self.annuli
    }

    /// Outermost plate radius.
    pub fn max_outer(&self) -> f64 {
        self.annuli.last().map(|a| a.outer()).unwrap_or(0.0)
    }

    /// Innermost plate radius.
    pub fn min_inner(&self) -> f64 {
        self.annuli.first().map(|a| a.inner()).unwrap_or(0.0)
    }

    /// Total gravitational parameter.
    pub fn total_mu(&self) -> f64 {
        self.annuli.iter().map(|a| a.mu()).sum()
    }

    /// All edge-circle radii, ascending.
    pub fn edge_radii(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(2 * self.annuli.len());
        for a in &self.annuli {
            edges.push(a.inner());
            edges.push(a.outer());
        }
        edges
    }

    /// Inter-annulus gaps as open intervals `(outer_i, inner_{i+1})`.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.annuli
            .windows(2)
            .map(|w| (w[0].outer(), w[1].inner()))
            .collect()
    }

    /// Whether in-plane radius r lies on some plate (boundaries included).
    pub fn on_any_plate(&self, r: f64) -> bool {
        self.annuli.iter().any(|a| a.covers(r))
    }

    /// Distance from (r, z) in the meridian half-plane to the nearest edge
    /// circle.
    pub fn edge_clearance(&self, r: f64, z: f64) -> f64 {
        self.edge_radii()
            .iter()
            .map(|&c| ((r - c) * (r - c) + z * z).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
}

/// A Cartesian evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        FieldPoint { x, y, z }
    }

    /// In-plane (cylindrical) radius.
    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Distance from the origin.
    pub fn dist(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Potential and gradient at one point, with validity flags.
///
/// `grad` is populated only off the plates (a single-layer potential has a
/// normal-derivative jump of 4 pi G sigma across each plate); in-plane points
/// outside every plate keep their gradient, whose z component vanishes by
/// symmetry. On an edge circle the potential value itself is withheld: the
/// closed forms hit a 0 * infinity there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub u: Option<f64>,
    pub grad: Option<[f64; 3]>,
    pub on_plate: bool,
    pub on_edge: bool,
}
