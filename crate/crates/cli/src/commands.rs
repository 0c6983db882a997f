//! The five subcommands: field tables, phase portraits, equilibrium scans,
//! bifurcation search and orbit propagation.

use crate::config::{Body, RunConfig};
use crate::grid::{parse_floats, parse_range, resolve_axes};
use crate::output::{fmt_f64, fmt_opt, par_map_indexed, CsvFile};
use crate::CliError;
use annulus_core::dynamics::{
    axial_phase_portrait, effective_potential, integrate, planar_phase_portrait,
    stack_axis_potential, CartesianState, IntegrationOptions, PortraitLevel,
};
use annulus_core::equilibria::{
    bifurcation_lambda, find_planar_critical_points, origin_spectrum, sufficient_lambda,
};
use annulus_core::potential::{disk_potential, stack_field_sample, wire_potential};
use annulus_core::FieldPoint;
use clap::Args;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Grid axes, e.g. --grid x=-2:2:101 y=-2:2:101 z=0
    #[arg(long, num_args = 1.., value_name = "AXIS", conflicts_with = "line")]
    pub grid: Vec<String>,
    /// Line axes (exactly one ranged axis), e.g. --line x=0:3:301 y=0 z=0
    #[arg(long, num_args = 1.., value_name = "AXIS")]
    pub line: Vec<String>,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_eval(cfg: &RunConfig, threads: usize, args: &EvalArgs) -> Result<(), CliError> {
    let (specs, word) = if !args.grid.is_empty() {
        (&args.grid, "--grid")
    } else if !args.line.is_empty() {
        (&args.line, "--line")
    } else {
        return Err(CliError::Config("eval needs --grid or --line".to_string()));
    };
    let [xs, ys, zs] = resolve_axes(specs)?;
    if word == "--line" {
        let ranged = [&xs, &ys, &zs].iter().filter(|v| v.len() > 1).count();
        if ranged > 1 {
            return Err(CliError::Config(format!(
                "--line takes at most one ranged axis, got {ranged}"
            )));
        }
    }
    let command = format!("eval {word} {}", specs.join(" "));
    let body = cfg.body()?;

    let n = xs.len() * ys.len() * zs.len();
    let point = |i: usize| {
        let ix = i % xs.len();
        let iy = (i / xs.len()) % ys.len();
        let iz = i / (xs.len() * ys.len());
        FieldPoint::new(xs[ix], ys[iy], zs[iz])
    };
    let rows: Vec<String> = par_map_indexed(n, threads, |i| {
        let p = point(i);
        let (u, grad, flags) = match &body {
            Body::Stack(stack) => {
                let s = stack_field_sample(stack, &p);
                let flags = if s.on_edge {
                    "on_edge"
                } else if s.on_plate {
                    "on_plate"
                } else {
                    ""
                };
                (s.u, s.grad, flags.to_string())
            }
            Body::Wire(w) => match wire_potential(w, &p) {
                Ok(u) => (Some(u), None, String::new()),
                Err(_) => (None, None, "on_wire".to_string()),
            },
            Body::Disk(d) => match disk_potential(d, &p) {
                Ok(u) => (Some(u), None, String::new()),
                Err(_) => (None, None, "on_edge".to_string()),
            },
        };
        let g = |k: usize| grad.map(|g| g[k]);
        [
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(p.z),
            fmt_opt(u),
            fmt_opt(g(0)),
            fmt_opt(g(1)),
            fmt_opt(g(2)),
            flags,
        ]
        .join(",")
    });

    let mut csv = CsvFile::new("eval", &command, cfg, &[]);
    csv.columns(&["x", "y", "z", "U", "Ux", "Uy", "Uz", "flags"]);
    for r in rows {
        csv.row(&[r]);
    }
    csv.write_to(&args.out)?;
    cfg.write_sidecar(&args.out, false)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct PortraitArgs {
    /// Portrait mode: axial (z, zdot) or planar (r, rdot)
    #[arg(long, value_parser = ["axial", "planar"])]
    pub mode: String,
    /// Angular momentum (planar mode)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Coordinate range lo:hi:count (z for axial, r for planar)
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Energy levels, comma separated; defaults to 8 levels spanning the
    /// accessible energies
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    /// Also write the sampled W and W' curve (planar mode)
    #[arg(long)]
    pub emit_wprime: bool,
    /// Output directory (one CSV per level)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_portrait(cfg: &RunConfig, threads: usize, args: &PortraitArgs) -> Result<(), CliError> {
    let stack = cfg.stack()?;
    std::fs::create_dir_all(&args.out).map_err(CliError::Io)?;

    struct Plan {
        levels: Vec<f64>,
        range: (f64, f64, usize),
        coord: &'static str,
        portraits: Vec<PortraitLevel>,
        lambda: Option<f64>,
    }
    let plan = match args.mode.as_str() {
        "axial" => {
            let a_max = stack.max_outer();
            let range = match &args.range {
                Some(r) => parse_range(r)?,
                None => (-3.0 * a_max, 3.0 * a_max, 801),
            };
            if range.0 != -range.1 {
                return Err(CliError::Config(
                    "axial range must be symmetric (lo = -hi)".to_string(),
                ));
            }
            let floor = stack_axis_potential(&stack, 0.0);
            let levels = match &args.levels {
                Some(l) => parse_floats(l)?,
                None => (1..=8)
                    .map(|k| floor + (0.0 - floor) * k as f64 / 9.0)
                    .collect(),
            };
            let portraits = axial_phase_portrait(&stack, range.1, range.2, &levels)?;
            Plan {
                levels,
                range,
                coord: "z",
                portraits,
                lambda: None,
            }
        }
        "planar" => {
            let lambda = args
                .lambda
                .ok_or_else(|| CliError::Config("planar portraits need --lambda".to_string()))?;
            let range = match &args.range {
                Some(r) => parse_range(r)?,
                None => (0.05 * stack.min_inner(), 10.0 * stack.max_outer(), 1000),
            };
            let curve = effective_potential(&stack, lambda, range.0, range.1, range.2)?;
            let levels = match &args.levels {
                Some(l) => parse_floats(l)?,
                None => {
                    let w_min = curve
                        .samples
                        .iter()
                        .map(|s| s.1)
                        .fold(f64::INFINITY, f64::min);
                    let w_hi = 0.0f64.min(
                        curve
                            .samples
                            .iter()
                            .map(|s| s.1)
                            .fold(f64::NEG_INFINITY, f64::max),
                    );
                    (1..=8)
                        .map(|k| w_min + (w_hi - w_min) * k as f64 / 9.0)
                        .collect()
                }
            };
            let portraits =
                planar_phase_portrait(&stack, lambda, range.0, range.1, range.2, &levels)?;
            Plan {
                levels,
                range,
                coord: "r",
                portraits,
                lambda: Some(lambda),
            }
        }
        _ => unreachable!("clap validates the mode"),
    };
    let Plan {
        levels,
        range,
        coord,
        portraits,
        lambda: header_lambda,
    } = plan;

    let command = format!(
        "portrait --mode {} {}--range {}:{}:{} --levels {}{}",
        args.mode,
        header_lambda
            .map(|l| format!("--lambda {} ", fmt_f64(l)))
            .unwrap_or_default(),
        fmt_f64(range.0),
        fmt_f64(range.1),
        range.2,
        levels
            .iter()
            .map(|&e| fmt_f64(e))
            .collect::<Vec<_>>()
            .join(","),
        if args.emit_wprime {
            " --emit-wprime"
        } else {
            ""
        },
    );

    // levels rendered in parallel, written in order
    let files: Vec<(String, CsvFile)> = par_map_indexed(portraits.len(), threads, |i| {
        let level = &portraits[i];
        let mut extra = vec![
            ("level", fmt_f64(level.energy)),
            ("mode", args.mode.clone()),
        ];
        if let Some(l) = header_lambda {
            extra.push(("lambda", fmt_f64(l)));
        }
        let mut csv = CsvFile::new("portrait", &command, cfg, &extra);
        csv.columns(&["segment", coord, &format!("{coord}dot")]);
        for (si, seg) in level.segments.iter().enumerate() {
            for &(xc, vc) in seg {
                csv.row(&[format!("{si},{},{}", fmt_f64(xc), fmt_f64(vc))]);
            }
        }
        (format!("level_{i:02}.csv"), csv)
    });
    for (name, csv) in files {
        csv.write_to(&args.out.join(name))?;
    }

    if args.emit_wprime {
        let lambda = header_lambda.ok_or_else(|| {
            CliError::Config("--emit-wprime applies to planar portraits".to_string())
        })?;
        let curve = effective_potential(&stack, lambda, range.0, range.1, range.2)?;
        let mut csv = CsvFile::new(
            "portrait",
            &command,
            cfg,
            &[
                ("lambda", fmt_f64(lambda)),
                ("curve", "W and W'".to_string()),
            ],
        );
        csv.columns(&["r", "W", "Wprime"]);
        for (r, w, wp) in &curve.samples {
            csv.row(&[format!("{},{},{}", fmt_f64(*r), fmt_f64(*w), fmt_f64(*wp))]);
        }
        csv.write_to(&args.out.join("wprime.csv"))?;
    }
    cfg.write_sidecar(&args.out, true)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct EquilibriaArgs {
    /// Angular momentum of the effective potential
    #[arg(long)]
    pub lambda: f64,
    /// Outer edge of the scan (default: 50x the outermost radius)
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Also report the origin's linearization spectrum (single annulus)
    #[arg(long)]
    pub origin_spectrum: bool,
    /// Output JSON path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(serde::Serialize)]
struct EquilibriaOutput {
    lambda: f64,
    r_max: f64,
    sufficient_lambda: Option<f64>,
    reports: Vec<annulus_core::equilibria::EquilibriumReport>,
    origin_spectrum: Option<annulus_core::equilibria::OriginSpectrum>,
}

pub fn run_equilibria(cfg: &RunConfig, args: &EquilibriaArgs) -> Result<(), CliError> {
    let stack = cfg.stack()?;
    let r_max = args.rmax.unwrap_or(50.0 * stack.max_outer());
    let reports = find_planar_critical_points(&stack, args.lambda, r_max)?;
    let single = (stack.members().len() == 1).then(|| stack.members()[0]);
    let spectrum = if args.origin_spectrum {
        let body = single.ok_or_else(|| {
            CliError::Config("--origin-spectrum needs a single-annulus body".to_string())
        })?;
        Some(origin_spectrum(&body)?)
    } else {
        None
    };
    let out = EquilibriaOutput {
        lambda: args.lambda,
        r_max,
        sufficient_lambda: single.map(|b| sufficient_lambda(&b)),
        reports,
        origin_spectrum: spectrum,
    };
    write_json(&args.out, &out)?;
    cfg.write_sidecar(&args.out, false)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct BifurcationArgs {
    /// Angular momentum bracket: no exterior critical points at LO, at
    /// least two at HI
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub bracket: Vec<f64>,
    /// Bracket width target (default from config tolerances)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output JSON path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(serde::Serialize)]
struct BifurcationOutput {
    input_bracket: (f64, f64),
    tol: f64,
    result: annulus_core::equilibria::BifurcationResult,
}

pub fn run_bifurcation(cfg: &RunConfig, args: &BifurcationArgs) -> Result<(), CliError> {
    let stack = cfg.stack()?;
    let tol = args.tol.unwrap_or(cfg.tolerances.bifurcation_tol);
    let bracket = (args.bracket[0], args.bracket[1]);
    let result = bifurcation_lambda(&stack, bracket, tol)?;
    let out = BifurcationOutput {
        input_bracket: bracket,
        tol,
        result,
    };
    write_json(&args.out, &out)?;
    cfg.write_sidecar(&args.out, false)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    /// Initial state x,y,z,vx,vy,vz
    #[arg(long, allow_hyphen_values = true)]
    pub state: String,
    /// Integration horizon
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: f64,
    /// Output sampling interval (default tmax/1000)
    #[arg(long)]
    pub sample_dt: Option<f64>,
    /// Step budget for the integrator
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_orbit(cfg: &RunConfig, args: &OrbitArgs) -> Result<(), CliError> {
    let stack = cfg.stack()?;
    let s = parse_floats(&args.state)?;
    if s.len() != 6 {
        return Err(CliError::Config(format!(
            "--state needs 6 components, got {}",
            s.len()
        )));
    }
    if !(args.tmax.is_finite() && args.tmax != 0.0) {
        return Err(CliError::Config(
            "tmax must be finite and nonzero".to_string(),
        ));
    }
    let state0 = CartesianState::new(s[0], s[1], s[2], s[3], s[4], s[5]);
    let sample_dt = args.sample_dt.unwrap_or(args.tmax.abs() / 1000.0);
    let mut opts = IntegrationOptions {
        rtol: cfg.tolerances.ode_rtol,
        atol: cfg.tolerances.ode_atol,
        sample_dt: Some(sample_dt),
        ..Default::default()
    };
    if let Some(ms) = args.max_steps {
        opts.max_steps = ms;
    }
    let traj = integrate(&stack, state0, args.tmax, &opts)?;

    let command = format!(
        "orbit --state {} --tmax {} --sample-dt {}",
        args.state.replace(' ', ""),
        fmt_f64(args.tmax),
        fmt_f64(sample_dt)
    );
    let mut csv = CsvFile::new("orbit", &command, cfg, &[]);
    csv.columns(&["t", "x", "y", "z", "vx", "vy", "vz", "r", "E", "Lz"]);
    for (t, st) in &traj.samples {
        let e = st.energy(&stack).ok();
        csv.row(&[[
            fmt_f64(*t),
            fmt_f64(st.x),
            fmt_f64(st.y),
            fmt_f64(st.z),
            fmt_f64(st.vx),
            fmt_f64(st.vy),
            fmt_f64(st.vz),
            fmt_f64(st.r()),
            fmt_opt(e),
            fmt_f64(st.angular_momentum_z()),
        ]
        .join(",")]);
    }
    csv.comment(&format!("termination: {:?}", traj.termination));
    csv.comment(&format!("final_t: {}", fmt_f64(traj.final_time)));
    csv.write_to(&args.out)?;
    cfg.write_sidecar(&args.out, false)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &std::path::Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n").map_err(CliError::Io)
}
