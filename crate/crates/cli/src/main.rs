//! Command-line front end. All numerics live in the library; this binary
//! parses flags, moves files, and prints line-oriented reports.
//!
//! Exit codes: 0 ok, 1 check failure, 2 usage or malformed input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kfl_core::calculus::{maximal, t_r, SobolevFunction};
use kfl_core::czd::{cz_decompose, verify_cz, CzParams};
use kfl_core::error::Error;
use kfl_core::fields::low_pass_field;
use kfl_core::io;
use kfl_core::kfunc::{equivalence_report, interp_norm, k_curve, SpacePair};
use kfl_core::space::{
    build_cayley_z2, build_grid, doubling_constant, enumerate_balls, MeasureMode, Space,
};
use kfl_core::verify::{suite, Tolerances};
use kfl_core::weights::{
    ap_constant, rh_constant, rh_infinity_constant, rh_power_law_check, rh_exponent_scan, Weight,
    WeightKind,
};

#[derive(Parser)]
#[command(name = "kfl", version, about = "Weighted Sobolev interpolation toolkit on finite metric measure spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or audit finite metric measure spaces.
    Space {
        #[command(subcommand)]
        action: SpaceAction,
    },
    /// Audit reverse-Hölder / Muckenhoupt constants or run refinement scans.
    Weight {
        #[command(subcommand)]
        action: WeightAction,
    },
    /// Run a Calderón-Zygmund decomposition and verify it.
    Czd(CzdArgs),
    /// Emit K-functional curves as CSV.
    Kcurve(KcurveArgs),
    /// Interpolation norm and equivalence harness.
    Interp(InterpArgs),
    /// Run bundled verification suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Counting,
    Cell,
}

#[derive(Subcommand)]
enum SpaceAction {
    /// Build a grid or Cayley-graph space and write it to a file.
    Build(SpaceBuildArgs),
    /// Print the ball census and doubling constant of a space.
    Audit(SpaceAuditArgs),
}

#[derive(Args)]
struct SpaceBuildArgs {
    /// Space kind: "grid" or "cayley".
    #[arg(long, default_value = "grid")]
    kind: String,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Extent per axis as "lo,hi"; repeat for the second axis.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    extent: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, value_enum, default_value_t = MeasureArg::Counting)]
    measure: MeasureArg,
    /// Cayley-graph radius (kind = cayley).
    #[arg(long, default_value_t = 2)]
    radius: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SpaceAuditArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    cap: Option<f64>,
}

#[derive(Subcommand)]
enum WeightAction {
    /// Print RH_q, RH_inf, and A_p constants of a weight.
    Audit(WeightAuditArgs),
    /// Refinement study of the RH constant across dyadic grids.
    Scan(WeightScanArgs),
}

#[derive(Args)]
struct WeightAuditArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long)]
    cap: Option<f64>,
    /// Write the sampled weight values back to a file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WeightScanArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    /// Comma-separated exponent grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.5, 2.0, 3.0])]
    q_grid: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long)]
    cap: Option<f64>,
}

#[derive(Args)]
struct CzdArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    /// Function file; omitted means a seeded low-pass field.
    #[arg(long)]
    function: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    /// Upper exponent; "inf" allowed.
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    q: f64,
    /// Threshold; "median" picks the median of the maximal field.
    #[arg(long, default_value = "median")]
    alpha: String,
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long, default_value_t = false)]
    homogeneous: bool,
    /// Output prefix; writes <prefix>.decomp.json and <prefix>.verify.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KcurveArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    function: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pair kind: "sobolev" or "lebesgue".
    #[arg(long, default_value = "sobolev")]
    pair: String,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    p0: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    p1: f64,
    #[arg(long, default_value_t = 1e-3)]
    tmin: f64,
    #[arg(long, default_value_t = 1e3)]
    tmax: f64,
    #[arg(long, default_value_t = 33)]
    points: usize,
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long, default_value_t = false)]
    homogeneous: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InterpArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    function: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    q: f64,
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long, default_value_t = false)]
    homogeneous: bool,
    /// Run the equivalence harness over this many seeded fields.
    #[arg(long)]
    family: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// all | space | weights | calculus | rearrange | czd | kfunc | acceptance
    #[arg(long, default_value = "all")]
    suite: String,
    /// Widens every pass window by this factor (1.0 is normative).
    #[arg(long, default_value_t = 1.0)]
    tolerance: f64,
    /// Also validate a user-supplied space file (metric axioms included).
    #[arg(long)]
    space: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected \"lo,hi\"".into());
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    if s == "inf" || s == "infinity" {
        Ok(f64::INFINITY)
    } else {
        s.parse::<f64>().map_err(|e| e.to_string())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

fn load_space(path: &PathBuf) -> Result<Space, Error> {
    io::space_from_json(&io::read_to_string(path)?)
}

fn load_weight(space: &Space, path: &PathBuf) -> Result<(Weight, Option<WeightKind>), Error> {
    io::weight_from_json(space, &io::read_to_string(path)?)
}

fn load_function(space: &Space, path: &Option<PathBuf>, seed: u64) -> Result<SobolevFunction, Error> {
    match path {
        Some(p) => io::function_from_json(space, &io::read_to_string(p)?),
        None => Ok(SobolevFunction::from_values(
            space,
            low_pass_field(space, seed, 3),
        )),
    }
}

fn run() -> Result<u8, Error> {
    if let Ok(threads) = std::env::var("KFL_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Space { action } => match action {
            SpaceAction::Build(args) => {
                let space = match args.kind.as_str() {
                    "grid" => {
                        let extents = if args.extent.is_empty() {
                            vec![(0.0, 7.0); args.dim]
                        } else {
                            args.extent.clone()
                        };
                        build_grid(
                            args.dim,
                            &extents,
                            args.spacing,
                            match args.measure {
                                MeasureArg::Counting => MeasureMode::Counting,
                                MeasureArg::Cell => MeasureMode::CellVolume,
                            },
                        )?
                    }
                    "cayley" => build_cayley_z2(args.radius)?,
                    other => return Err(Error::Domain(format!("unknown space kind '{other}'"))),
                };
                io::write_string(&args.out, &io::space_to_json(&space))?;
                println!("wrote space with {} points to {}", space.len(), args.out.display());
                Ok(0)
            }
            SpaceAction::Audit(args) => {
                let space = load_space(&args.space)?;
                let balls = enumerate_balls(&space, args.cap);
                let rep = doubling_constant(&space, args.cap);
                println!("points = {}", space.len());
                println!("total measure = {}", fmt(space.total_measure()));
                println!("distinct balls = {}", balls.len());
                println!("doubling constant = {}", fmt(rep.constant));
                println!("attained at center {} radius {}", rep.center, fmt(rep.radius));
                Ok(0)
            }
        },
        Command::Weight { action } => match action {
            WeightAction::Audit(args) => {
                let space = load_space(&args.space)?;
                let (w, kind) = load_weight(&space, &args.weight)?;
                let rh = rh_constant(&space, &w, args.q, args.cap)?;
                println!("rh[q={}] = {} (center {} radius {})", args.q, fmt(rh.constant), rh.center, fmt(rh.radius));
                let rhi = rh_infinity_constant(&space, &w, args.cap)?;
                println!("rh[inf] = {} (center {} radius {})", fmt(rhi.constant), rhi.center, fmt(rhi.radius));
                let mut best = f64::INFINITY;
                for p in [2.0, 4.0, 8.0] {
                    match ap_constant(&space, &w, p, args.cap) {
                        Ok(c) => {
                            println!("ap[p={p}] = {}", fmt(c));
                            best = best.min(c);
                        }
                        Err(e) => println!("ap[p={p}] unavailable: {e}"),
                    }
                }
                if best.is_finite() {
                    println!("ap best = {}", fmt(best));
                }
                let pl = rh_power_law_check(&space, &w, 0.5, args.cap)?;
                println!(
                    "power-law r=0.5: constant {} -> {}",
                    fmt(pl.rh.constant),
                    if pl.pass { "PASS" } else { "FAIL" }
                );
                if let Some(out) = args.out {
                    io::write_string(&out, &io::weight_to_json(kind.as_ref(), &w))?;
                    println!("wrote sampled weight to {}", out.display());
                }
                Ok(0)
            }
            WeightAction::Scan(args) => {
                let space = load_space(&args.space)?;
                let (_, kind) = load_weight(&space, &args.weight)?;
                let kind = kind.ok_or_else(|| {
                    Error::Unsupported("scan needs a symbolic weight kind (power or polynomial)".into())
                })?;
                let rep = rh_exponent_scan(&space, &kind, &args.q_grid, args.cap, args.levels)?;
                print!("{rep}");
                Ok(0)
            }
        },
        Command::Czd(args) => {
            let space = load_space(&args.space)?;
            let (w, _) = load_weight(&space, &args.weight)?;
            let u = load_function(&space, &args.function, args.seed)?;
            let params = CzParams {
                r: args.r,
                s: args.s,
                p: args.p,
                q: args.q,
                homogeneous: args.homogeneous,
            };
            let alpha = match args.alpha.as_str() {
                "median" => {
                    let ts = t_r(&space, &w, &u, args.s, args.homogeneous);
                    let m = maximal(&space, &ts, args.cap);
                    let mut vals: Vec<f64> = m.values().to_vec();
                    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    vals.dedup();
                    if vals.len() < 2 {
                        vals[0] * 0.9
                    } else {
                        let i = vals.len() / 2;
                        (vals[i - 1] * vals[i]).sqrt().powf(1.0 / args.s)
                    }
                }
                text => text
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("bad --alpha '{text}'")))?,
            };
            let d = cz_decompose(&space, &w, &u, params, alpha, args.cap)?;
            let ver = verify_cz(&space, &w, &d);
            println!("alpha = {}", fmt(alpha));
            println!("omega points = {} (full: {})", d.omega.len(), d.omega_full);
            println!("whitney balls = {}", d.pieces.len());
            println!("reconstruction err = {}", fmt(ver.reconstruction_err));
            println!("partition err = {}", fmt(ver.partition_err));
            if let Some(c2) = ver.c2 {
                println!("c2 = {}", fmt(c2));
            }
            if let Some(ci) = ver.c_inf {
                println!("c_inf = {}", fmt(ci));
            }
            println!("c3[s] = {}", fmt(ver.c3_s));
            println!("c3[r] = {}", fmt(ver.c3_r));
            println!("c4 = {}", fmt(ver.c4));
            println!("overlap N = {}", ver.n_overlap);
            println!("verified: {}", if ver.pass { "PASS" } else { "FAIL" });
            if let Some(prefix) = args.out {
                let decomp_path = prefix.with_extension("decomp.json");
                io::write_string(&decomp_path, &io::decomposition_to_json(&space, &w, &d))?;
                let mut text = String::new();
                text.push_str(&format!("alpha = {}\n", fmt(alpha)));
                text.push_str(&format!("reconstruction_err = {}\n", fmt(ver.reconstruction_err)));
                text.push_str(&format!("support_ok = {}\n", ver.support_ok));
                text.push_str(&format!("partition_err = {}\n", fmt(ver.partition_err)));
                if let Some(c2) = ver.c2 {
                    text.push_str(&format!("c2 = {}\n", fmt(c2)));
                }
                if let Some(ci) = ver.c_inf {
                    text.push_str(&format!("c_inf = {}\n", fmt(ci)));
                }
                text.push_str(&format!("c3_s = {}\n", fmt(ver.c3_s)));
                text.push_str(&format!("c3_r = {}\n", fmt(ver.c3_r)));
                text.push_str(&format!("c4 = {}\n", fmt(ver.c4)));
                text.push_str(&format!("n_overlap = {}\n", ver.n_overlap));
                text.push_str(&format!("pass = {}\n", ver.pass));
                let verify_path = prefix.with_extension("verify.txt");
                io::write_string(&verify_path, &text)?;
                println!(
                    "wrote {} and {}",
                    decomp_path.display(),
                    verify_path.display()
                );
            }
            Ok(if ver.pass { 0 } else { 1 })
        }
        Command::Kcurve(args) => {
            let space = load_space(&args.space)?;
            let (w, _) = load_weight(&space, &args.weight)?;
            let u = load_function(&space, &args.function, args.seed)?;
            let pair = match args.pair.as_str() {
                "sobolev" => SpacePair::Sobolev {
                    r: args.r,
                    q: args.q,
                    homogeneous: args.homogeneous,
                },
                "lebesgue" => SpacePair::Lebesgue {
                    p0: args.p0,
                    p1: args.p1,
                },
                other => return Err(Error::Domain(format!("unknown pair '{other}'"))),
            };
            let curve = k_curve(&space, &w, &u, &pair, args.tmin, args.tmax, args.points, args.cap)?;
            let csv = io::kcurve_to_csv(&curve);
            match args.out {
                Some(path) => {
                    io::write_string(&path, &csv)?;
                    println!("wrote {} curve points to {}", curve.points.len(), path.display());
                }
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Interp(args) => {
            let space = load_space(&args.space)?;
            let (w, _) = load_weight(&space, &args.weight)?;
            match args.family {
                None => {
                    let u = load_function(&space, &args.function, args.seed)?;
                    let value = interp_norm(
                        &space, &w, &u, args.r, args.s, args.q, args.p, args.homogeneous, args.cap,
                    )?;
                    let direct = kfl_core::calculus::sobolev_norm(&space, &w, &u, args.p, args.homogeneous);
                    println!("interp norm = {}", fmt(value));
                    println!("sobolev norm p={} is {}", args.p, fmt(direct));
                    if direct > 0.0 {
                        println!("ratio = {}", fmt(value / direct));
                    }
                    Ok(0)
                }
                Some(count) => {
                    let family: Vec<SobolevFunction> = (0..count as u64)
                        .map(|i| {
                            SobolevFunction::from_values(
                                &space,
                                low_pass_field(&space, args.seed.wrapping_add(i), 3),
                            )
                        })
                        .collect();
                    let rep = equivalence_report(
                        &space, &w, &family, args.r, args.s, args.q, args.p, args.homogeneous,
                        args.cap, 1e2,
                    )?;
                    println!("{rep}");
                    Ok(if rep.pass { 0 } else { 1 })
                }
            }
        }
        Command::Verify(args) => {
            let tol = Tolerances { scale: args.tolerance };
            if args.tolerance != 1.0 {
                println!("# tolerance override: windows widened by {}", args.tolerance);
            }
            let mut reports = suite(&args.suite, &tol)?;
            if let Some(path) = &args.space {
                let mut rep = kfl_core::report::VerificationReport::new("space-file-valid");
                match load_space(path) {
                    Ok(space) => {
                        rep.push_measure("points", space.len() as f64);
                    }
                    Err(e) => rep.set_fail(format!("{e}")),
                }
                reports.push(rep);
            }
            let mut failed = 0;
            for rep in &reports {
                println!("{rep}");
                if !rep.pass {
                    failed += 1;
                }
            }
            println!(
                "summary: {}/{} checks passed",
                reports.len() - failed,
                reports.len()
            );
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
