//! Run configuration: body specification plus numerical tolerances.
//!
//! A run is reproducible from its config file and the tool version alone, so
//! every command writes its resolved config next to its output. Execution
//! details that cannot change results (thread count, output paths) are
//! deliberately not part of the config.

use crate::CliError;
use annulus_core::{AnnulusBody, BodyStack, DiskBody, WireBody};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub body: BodyConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            body: BodyConfig::Annulus {
                a: 1.0,
                b: 0.75,
                mu: 1.0,
            },
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodyConfig {
    Wire { a: f64, mu: f64 },
    Disk { a: f64, mu: f64 },
    Annulus { a: f64, b: f64, mu: f64 },
    Stack { annuli: Vec<AnnulusEntry> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusEntry {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the trajectory integrator.
    #[serde(default = "d_ode_rtol")]
    pub ode_rtol: f64,
    /// Absolute tolerance of the trajectory integrator.
    #[serde(default = "d_ode_atol")]
    pub ode_atol: f64,
    /// Absolute tolerance of quadrature (oracle, periods).
    #[serde(default = "d_quad_abs")]
    pub quad_abs: f64,
    /// Bifurcation bracket width target.
    #[serde(default = "d_bif_tol")]
    pub bifurcation_tol: f64,
}

fn d_ode_rtol() -> f64 {
    1e-10
}
fn d_ode_atol() -> f64 {
    1e-12
}
fn d_quad_abs() -> f64 {
    1e-10
}
fn d_bif_tol() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode_rtol: d_ode_rtol(),
            ode_atol: d_ode_atol(),
            quad_abs: d_quad_abs(),
            bifurcation_tol: d_bif_tol(),
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("ode_rtol", self.ode_rtol),
            ("ode_atol", self.ode_atol),
            ("quad_abs", self.quad_abs),
            ("bifurcation_tol", self.bifurcation_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A validated body, ready for field evaluation.
pub enum Body {
    Wire(WireBody),
    Disk(DiskBody),
    Stack(BodyStack),
}

impl RunConfig {
    /// Load from file, apply flag overrides, validate.
    pub fn resolve(
        path: Option<&Path>,
        a: Option<f64>,
        b: Option<f64>,
        mu: Option<f64>,
    ) -> Result<RunConfig, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let actual = locate_config(p)?;
                let text = std::fs::read_to_string(&actual).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", actual.display()))
                })?;
                serde_json::from_str::<RunConfig>(&text).map_err(|e| {
                    CliError::Config(format!("malformed config {}: {e}", actual.display()))
                })?
            }
            None => RunConfig::default(),
        };
        if a.is_some() || b.is_some() || mu.is_some() {
            match &mut cfg.body {
                BodyConfig::Annulus {
                    a: ca,
                    b: cb,
                    mu: cmu,
                } => {
                    if let Some(v) = a {
                        *ca = v;
                    }
                    if let Some(v) = b {
                        *cb = v;
                    }
                    if let Some(v) = mu {
                        *cmu = v;
                    }
                }
                _ => {
                    return Err(CliError::Config(
                        "--a/--b/--mu override only a single-annulus body".to_string(),
                    ))
                }
            }
        }
        cfg.tolerances.validate()?;
        cfg.body()?; // validate geometry eagerly
        Ok(cfg)
    }

    /// The validated body.
    pub fn body(&self) -> Result<Body, CliError> {
        let geom = |e: annulus_core::Error| CliError::Config(format!("invalid body: {e}"));
        Ok(match &self.body {
            BodyConfig::Wire { a, mu } => Body::Wire(WireBody::new(*a, *mu).map_err(geom)?),
            BodyConfig::Disk { a, mu } => Body::Disk(DiskBody::new(*a, *mu).map_err(geom)?),
            BodyConfig::Annulus { a, b, mu } => Body::Stack(BodyStack::single(
                AnnulusBody::new(*a, *b, *mu).map_err(geom)?,
            )),
            BodyConfig::Stack { annuli } => {
                let members = annuli
                    .iter()
                    .map(|e| AnnulusBody::new(e.a, e.b, e.mu))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(geom)?;
                Body::Stack(BodyStack::new(members).map_err(geom)?)
            }
        })
    }

    /// The body as a stack, required by the dynamics commands.
    pub fn stack(&self) -> Result<BodyStack, CliError> {
        match self.body()? {
            Body::Stack(s) => Ok(s),
            _ => Err(CliError::Config(
                "this command needs an annulus or stack body (wire/disk have no \
                 plate dynamics here)"
                    .to_string(),
            )),
        }
    }

    /// Compact one-line JSON for CSV headers.
    pub fn body_json(&self) -> String {
        serde_json::to_string(&self.body).expect("body serializes")
    }

    pub fn tolerances_json(&self) -> String {
        serde_json::to_string(&self.tolerances).expect("tolerances serialize")
    }

    /// Write the resolved config next to an output file or into a directory.
    pub fn write_sidecar(&self, out: &Path, is_dir: bool) -> Result<PathBuf, CliError> {
        let path = if is_dir {
            out.join("config.json")
        } else {
            let mut name = out.file_name().unwrap_or_default().to_os_string();
            name.push(".config.json");
            out.with_file_name(name)
        };
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(&path, text + "\n").map_err(CliError::Io)?;
        Ok(path)
    }
}

/// Resolve a config path: as given, else (for bare file names) inside
/// `$ANNULUS_DYN_CONFIG_DIR`.
fn locate_config(p: &Path) -> Result<PathBuf, CliError> {
    if p.exists() {
        return Ok(p.to_path_buf());
    }
    if p.components().count() == 1 {
        if let Ok(dir) = std::env::var("ANNULUS_DYN_CONFIG_DIR") {
            let candidate = Path::new(&dir).join(p);
            if candidate.exists() {
                return Ok(candidate);
            }
        }
    }
    Err(CliError::Config(format!(
        "config file {} not found",
        p.display()
    )))
}
