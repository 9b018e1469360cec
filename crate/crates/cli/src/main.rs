use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use modlab::criteria::{default_epsilons, EtaParams, FmoParams};
use modlab::experiments::{run_boundary_extension_probe, run_lower_q_verification, ExperimentKind};
use modlab::fuchsian::{quotient_distance, DirichletDomain};
use modlab::mappings::{distortion_csv, distortion_grid, finite_distortion_check};
use modlab::modulus::{radial_family, CircleFamilyParams, FamilyKind};
use modlab::report::{disk_plot, heatmap};
use modlab::{
    circle_family_modulus, divergence_check, eta_inequality_check, fmo_check, modulus_discrete, qnorm_profile, ring_modulus_exact,
    run_suite, CurveFamily, DiscretizedDomain, DiskPoint, ExperimentConfig, FuchsianGroup, Metric, RingSpec, SampleMap,
    ScalarField,
};

#[derive(Parser)]
#[command(name = "modlab", version, about = "Moduli of curve families on hyperbolic surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistortionFormat {
    Csv,
    Svg,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirichletFormat {
    Svg,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    LowerQ,
    BoundaryExt,
}

#[derive(Subcommand)]
enum Command {
    /// Discrete modulus of the radial family of a centered ring against 2π/log(R₂/R₁).
    RingModulus {
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        /// Polar grid as NRxNT.
        #[arg(long, default_value = "100x300")]
        grid: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Also write the extremal density as CSV.
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// Weighted circle-family modulus against ∫ dr / ‖Q‖(r).
    CircleFamily {
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long, default_value = "const:1")]
        q: String,
        #[arg(long, default_value_t = 64)]
        n_circles: usize,
    },
    /// Radial profile ‖Q‖(r) about the origin.
    Qnorm {
        #[arg(long)]
        q: String,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: TableFormat,
        #[arg(long, default_value_t = 1024)]
        angular: usize,
    },
    /// Mean oscillation of Q over shrinking balls.
    Fmo {
        #[arg(long)]
        q: String,
        /// Center as `x,y`.
        #[arg(long, default_value = "0,0")]
        center: String,
        #[arg(long, default_value_t = 0.5)]
        eps_start: f64,
        #[arg(long, default_value_t = 20)]
        eps_count: usize,
    },
    /// Growth of ∫ dt / ‖Q‖(t) as the inner radius shrinks.
    Divergence {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0.0)]
        r1: f64,
        #[arg(long, default_value_t = 1.0)]
        r2: f64,
        #[arg(long, default_value_t = 20)]
        n_eps: usize,
    },
    /// Extremal radial weight η₀ and the random-weight inequality.
    Eta {
        #[arg(long, default_value = "const:1")]
        q: String,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long, default_value_t = 500)]
        n_random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dirichlet domain of a group file centered at the origin.
    Dirichlet {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, value_enum, default_value = "svg")]
        out: DirichletFormat,
        /// Rays used to trace the boundary.
        #[arg(long, default_value_t = 720)]
        rays: usize,
    },
    /// Wirtinger derivatives, dilatation and Jacobian on a grid.
    Distortion {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: DistortionFormat,
    },
    /// Run one verification from a config file.
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        #[arg(long)]
        config: PathBuf,
        /// Directory for the record and artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every config in a directory.
    Suite {
        dir: PathBuf,
        #[arg(long, default_value = "suite-out")]
        out: PathBuf,
    },
}

/// Failure class, mapped to the process exit code.
enum Failure {
    /// Exit 1.
    Failed(String),
    /// Exit 2.
    Config(String),
}

type CliResult = Result<bool, Failure>;

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn failed<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Failed(e.to_string())
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn parse_grid(s: &str) -> Result<(usize, usize), Failure> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| config(format!("grid `{s}` must look like NRxNT")))?;
    Ok((a.trim().parse().map_err(config)?, b.trim().parse().map_err(config)?))
}

fn parse_point(s: &str) -> Result<DiskPoint, Failure> {
    let (a, b) = s.split_once(',').ok_or_else(|| config(format!("point `{s}` must look like x,y")))?;
    DiskPoint::new(a.trim().parse().map_err(config)?, b.trim().parse().map_err(config)?).map_err(config)
}

fn field(spec: &str) -> Result<ScalarField, Failure> {
    ScalarField::parse(spec).map_err(config)
}

fn ring(r1: f64, r2: f64) -> Result<RingSpec, Failure> {
    RingSpec::centered(r1, r2).map_err(config)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::RingModulus { r1, r2, grid, tol, density } => {
            let ring = ring(r1, r2)?;
            let exact = ring_modulus_exact(&ring).map_err(config)?;
            let (nr, nt) = parse_grid(&grid)?;
            let dom = DiscretizedDomain::polar(r1, r2, nr, nt).map_err(config)?;
            let curves = radial_family(&dom, 2 * nr + 1).map_err(failed)?;
            let family = CurveFamily::rasterize(FamilyKind::Connecting, &curves, &dom).map_err(failed)?;
            let result = modulus_discrete(&family, &dom, Metric::Hyperbolic, tol).map_err(failed)?;
            if let Some(path) = density {
                std::fs::write(&path, result.density_csv(&dom).map_err(failed)?).map_err(failed)?;
            }
            print_json(&json!({
                "exact": exact,
                "discrete": result.value,
                "relative_error": (result.value - exact).abs() / exact,
                "iterations": result.iterations,
                "duality_gap": result.duality_gap,
                "max_constraint_violation": result.max_constraint_violation,
                "grid": [nr, nt],
            }));
            Ok(true)
        }
        Command::CircleFamily { r1, r2, q, n_circles } => {
            let params = CircleFamilyParams {
                n_circles,
                ..CircleFamilyParams::default()
            };
            let r = circle_family_modulus(&ring(r1, r2)?, &field(&q)?, params).map_err(failed)?;
            print_json(&json!({
                "q": q,
                "modulus": r.value,
                "reciprocal_integral": r.reference,
                "relative_gap": r.relative_gap(),
                "iterations": r.result.iterations,
            }));
            Ok(true)
        }
        Command::Qnorm { q, r1, r2, samples, out, angular } => {
            let profile = qnorm_profile(&field(&q)?, &ring(r1, r2)?, samples, angular).map_err(config)?;
            match out {
                TableFormat::Csv => print!("{}", profile.to_csv().map_err(failed)?),
                TableFormat::Json => println!("{}", profile.to_json().map_err(failed)?),
            }
            Ok(true)
        }
        Command::Fmo { q, center, eps_start, eps_count } => {
            let eps = default_epsilons(eps_start, eps_count);
            let r = fmo_check(&field(&q)?, parse_point(&center)?, &eps, FmoParams::default()).map_err(config)?;
            print_json(&serde_json::to_value(&r).map_err(failed)?);
            Ok(true)
        }
        Command::Divergence { q, r1, r2, n_eps } => {
            let r = divergence_check(&field(&q)?, &ring(r1, r2)?, n_eps).map_err(config)?;
            print_json(&serde_json::to_value(&r).map_err(failed)?);
            Ok(true)
        }
        Command::Eta { q, r1, r2, n_random, seed } => {
            let r = eta_inequality_check(&field(&q)?, &ring(r1, r2)?, n_random, seed, EtaParams::default()).map_err(config)?;
            print_json(&serde_json::to_value(&r).map_err(failed)?);
            Ok(r.pass)
        }
        Command::Dirichlet { group, out, rays } => {
            let g = FuchsianGroup::load(&group).map_err(config)?;
            let enumerated = Arc::new(g.enumerate().map_err(failed)?);
            let dom = DirichletDomain::new(DiskPoint::ORIGIN, &enumerated);
            let rays = rays.max(8);
            let boundary: Vec<Option<f64>> = (0..rays)
                .map(|k| dom.boundary_along(std::f64::consts::TAU * k as f64 / rays as f64, 12.0))
                .collect();
            let polygon: Vec<(f64, f64)> = boundary
                .iter()
                .enumerate()
                .filter_map(|(k, r)| {
                    let r = modlab::euclid_radius((*r)?);
                    let z = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / rays as f64);
                    Some((z.re, z.im))
                })
                .collect();
            let translates: Vec<(f64, f64)> = dom.translates.iter().map(|p| (p.re(), p.im())).collect();
            match out {
                DirichletFormat::Svg => print!(
                    "{}",
                    disk_plot(&format!("Dirichlet domain, {} elements", enumerated.len()), &[polygon], &translates)
                ),
                DirichletFormat::Json => print_json(&json!({
                    "elements": enumerated.len(),
                    "max_word_length": enumerated.max_word_length,
                    "boundary_hyp_radius": boundary,
                    "unbounded_rays": boundary.iter().filter(|b| b.is_none()).count(),
                    "self_distance_check": quotient_distance(DiskPoint::ORIGIN, DiskPoint::ORIGIN, &enumerated),
                })),
            }
            Ok(true)
        }
        Command::Distortion { map, grid, out } => {
            let f = SampleMap::parse(&map).map_err(config)?;
            if grid < 16 {
                return Err(config("grid must be at least 16"));
            }
            let samples = distortion_grid(&f, grid);
            match out {
                DistortionFormat::Csv => print!("{}", distortion_csv(&samples).map_err(failed)?),
                DistortionFormat::Svg => {
                    let cells: Vec<(f64, f64, f64)> = samples.iter().map(|s| (s.x, s.y, s.k.unwrap_or(f64::INFINITY))).collect();
                    print!("{}", heatmap(&format!("K for {f}"), &cells, 1.9 / (grid - 1) as f64));
                }
                DistortionFormat::Json => {
                    let check = finite_distortion_check(&f, grid).map_err(failed)?;
                    print_json(&serde_json::to_value(&check).map_err(failed)?);
                    return Ok(check.pass);
                }
            }
            Ok(true)
        }
        Command::Verify { kind, config: path, out } => {
            let cfg = ExperimentConfig::load(&path).map_err(config)?;
            let expected = match kind {
                VerifyKind::LowerQ => ExperimentKind::LowerQ,
                VerifyKind::BoundaryExt => ExperimentKind::BoundaryExt,
            };
            if cfg.kind != expected {
                return Err(config(format!("{} is not a {:?} config", path.display(), expected)));
            }
            let outcome = match kind {
                VerifyKind::LowerQ => run_lower_q_verification(&cfg),
                VerifyKind::BoundaryExt => run_boundary_extension_probe(&cfg),
            }
            .map_err(|e| if e.is_config() { config(e) } else { failed(e) })?;
            if let Some(dir) = out {
                write_dir(&dir, &outcome)?;
            }
            print!("{}", outcome.record.to_json());
            Ok(outcome.record.pass)
        }
        Command::Suite { dir, out } => {
            if !dir.is_dir() {
                return Err(config(format!("{} is not a directory", dir.display())));
            }
            let report = run_suite(&dir, &out).map_err(failed)?;
            for r in &report.records {
                let status = if r.pass { "PASS" } else { "FAIL" };
                let ratio = r.ratio.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
                eprintln!("{status} {} ratio={ratio}{}", r.id, r.error.as_ref().map(|e| format!(" error={e}")).unwrap_or_default());
            }
            println!("{}", out.join("suite.json").display());
            Ok(report.exit_code == 0)
        }
    }
}

fn write_dir(dir: &Path, outcome: &modlab::experiments::Outcome) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(failed)?;
    std::fs::write(dir.join("record.json"), outcome.record.to_json()).map_err(failed)?;
    for a in &outcome.artifacts {
        std::fs::write(dir.join(&a.name), &a.contents).map_err(failed)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}
