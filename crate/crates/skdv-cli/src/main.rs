//! Batch driver for the skdv numerical laboratory: IBVP solves, linear
//! solves, region classification, operator/estimate verification suites,
//! flux-identity checks and parameter sweeps.
//!
//! Exit codes: 0 success, 1 validation/configuration error, 2 non-contraction
//! or diagnostic failure.

mod config;
mod outputs;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use skdv::bourgain::{
    classify_region, required_estimates, verify_estimate, EstimateKind, RegionTag, RegularityPair,
};
use skdv::forcing::{one_sided_dx_traces, trace_at_zero, trace_identity_suite};
use skdv::grid::{FieldKind, SampledField, Side, SpaceTimeGrid, TimeTrace};
use skdv::propagators::{evolve, PropagatorKind};
use skdv::solver::{flux_identity_check, restrict_field, solve, solve_linear, EquationTag};

use config::{build_data, build_params, build_solver_config, parse_side, RunConfig};
use outputs::{
    ensure_dir, write_field_csv, write_heatmap_svg, write_report, write_text, write_traces_csv,
    write_traces_svg,
};

/// CLI-level error with the process exit code attached.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn validation(msg: String) -> CliError {
        CliError { code: 1, msg }
    }
}

impl From<skdv::Error> for CliError {
    fn from(e: skdv::Error) -> CliError {
        let code = match e {
            skdv::Error::NonContraction(_) => 2,
            _ => 1,
        };
        CliError { code, msg: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "skdv", version, about = "Schrodinger-KdV half-line IBVP laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration (TOML); flags override file values.
    config: Option<PathBuf>,
    /// Output directory (overrides [output].dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one coupled IBVP by Picard iteration.
    Simulate(ConfigArgs),
    /// Solve one linear half-line problem by superposition.
    Linear {
        #[command(flatten)]
        common: ConfigArgs,
        /// Which equation to solve: schrodinger | kdv.
        #[arg(long)]
        equation: String,
    },
    /// Look up the admissibility region of a regularity pair.
    Classify {
        #[arg(long)]
        side: String,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
    },
    /// Run the boundary-forcing trace/jump identity suite at two resolutions.
    VerifyOperators(ConfigArgs),
    /// Monte-Carlo verification of the multilinear estimates.
    VerifyEstimates {
        #[command(flatten)]
        common: ConfigArgs,
        /// Estimate id (e.g. prop-5.1, trilinear-5.1) or "all".
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        side: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        s: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
    },
    /// Check the half-line L2 flux identities under grid refinement.
    Identities(ConfigArgs),
    /// Classify and parameter-check a grid of regularity pairs.
    Sweep(ConfigArgs),
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("SKDV_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => skdv::par::limit_threads(n),
            _ => {
                eprintln!("error: SKDV_THREADS must be a positive integer, got \"{v}\"");
                return ExitCode::from(1);
            }
        }
    }
    // Exit code 2 is reserved for non-contraction diagnostics, so argument
    // parse errors are reported with the validation code 1 instead.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn env_seed() -> u64 {
    std::env::var("SKDV_SEED").ok().and_then(|v| v.parse().ok()).unwrap_or(7)
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Linear { common, equation } => linear(common, &equation),
        Cmd::Classify { side, s, k } => classify(&side, s, k),
        Cmd::VerifyOperators(a) => verify_operators(a),
        Cmd::VerifyEstimates { common, which, trials, seed, side, s, k } => {
            verify_estimates(common, which, trials, seed, side, s, k)
        }
        Cmd::Identities(a) => identities(a),
        Cmd::Sweep(a) => sweep(a),
    }
}

fn half_line_xs(grid: &SpaceTimeGrid, side: Side) -> Vec<f64> {
    let j0 = grid.x0_index();
    match side {
        Side::Right => (j0..grid.nx).map(|j| grid.x_at(j)).collect(),
        Side::Left => (0..=j0).map(|j| grid.x_at(j)).collect(),
    }
}

fn write_solution(
    cfg: &RunConfig,
    args: &ConfigArgs,
    grid: &SpaceTimeGrid,
    side: Side,
    u: Option<&SampledField>,
    v: Option<&SampledField>,
    traces: &[(&str, &TimeTrace)],
    report: &skdv::solver::IterationReport,
) -> Result<(), CliError> {
    let dir = cfg.output_dir(args.out.as_deref());
    ensure_dir(&dir)?;
    let xs = half_line_xs(grid, side);
    if cfg.wants_format("csv") {
        if let Some(u) = u {
            let half = restrict_field(grid, u, side);
            write_field_csv(&dir.join("fields_u.csv"), grid, &xs, &half)?;
        }
        if let Some(v) = v {
            let half = restrict_field(grid, v, side);
            write_field_csv(&dir.join("fields_v.csv"), grid, &xs, &half)?;
        }
        write_traces_csv(&dir.join("traces.csv"), grid, traces)?;
    }
    if cfg.wants_format("json") {
        write_report(&dir, report)?;
    }
    if cfg.wants_format("svg") {
        if let Some(u) = u {
            let half = restrict_field(grid, u, side);
            write_heatmap_svg(&dir.join("fields_u.svg"), grid, &xs, &half, "u (re)")?;
        }
        if let Some(v) = v {
            let half = restrict_field(grid, v, side);
            write_heatmap_svg(&dir.join("fields_v.svg"), grid, &xs, &half, "v (re)")?;
        }
        write_traces_svg(&dir.join("traces.svg"), grid, traces)?;
    }
    Ok(())
}

fn simulate(args: ConfigArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let grid = cfg.grid()?;
    let data = build_data(&cfg, &grid)?;
    let solver_cfg = build_solver_config(&cfg, &grid, data.side, &data.reg)?;
    let (u, v, report) = solve(&data, &solver_cfg)?;
    let ut = trace_at_zero(&grid, &u);
    let vt = trace_at_zero(&grid, &v);
    let mut traces: Vec<(&str, &TimeTrace)> =
        vec![("f", &data.f), ("u-trace", &ut), ("g", &data.g), ("v-trace", &vt)];
    let dv;
    if let Some(h) = &data.h {
        dv = one_sided_dx_traces(&grid, &v, 1).0;
        traces.push(("h", h));
        traces.push(("dv-trace", &dv));
    }
    write_solution(&cfg, &args, &grid, data.side, Some(&u), Some(&v), &traces, &report)?;
    println!(
        "converged = {}, iterates = {}, contraction ratio = {:.4}, trace errors = {:?}",
        report.converged, report.iterates, report.contraction_ratio, report.trace_errors
    );
    Ok(())
}

fn linear(args: ConfigArgs, equation: &str) -> Result<(), CliError> {
    let eq = match equation {
        "schrodinger" => EquationTag::Schrodinger,
        "kdv" => EquationTag::Kdv,
        other => {
            return Err(CliError::validation(format!(
                "equation must be \"schrodinger\" or \"kdv\", got \"{other}\""
            )))
        }
    };
    let cfg = RunConfig::load(args.config.as_deref())?;
    let grid = cfg.grid()?;
    let data = build_data(&cfg, &grid)?;
    let (field, report) = solve_linear(data.side, eq, &data, &grid)?;
    let tr = trace_at_zero(&grid, &field);
    let mut traces: Vec<(&str, &TimeTrace)> = match eq {
        EquationTag::Schrodinger => vec![("f", &data.f), ("u-trace", &tr)],
        EquationTag::Kdv => vec![("g", &data.g), ("v-trace", &tr)],
    };
    let dv;
    if eq == EquationTag::Kdv {
        if let Some(h) = &data.h {
            dv = one_sided_dx_traces(&grid, &field, 1).0;
            traces.push(("h", h));
            traces.push(("dv-trace", &dv));
        }
    }
    let (u, v) = match eq {
        EquationTag::Schrodinger => (Some(&field), None),
        EquationTag::Kdv => (None, Some(&field)),
    };
    write_solution(&cfg, &args, &grid, data.side, u, v, &traces, &report)?;
    println!("linear {equation} solve: trace errors = {:?}", report.trace_errors);
    Ok(())
}

fn classify(side: &str, s: f64, k: f64) -> Result<(), CliError> {
    let side = parse_side(side)?;
    let region = classify_region(side, s, k);
    let yn = |b: bool| if b { "yes" } else { "no" };
    println!(
        "{:?}, smallness: {}, beta-zero: {}",
        region,
        yn(region.smallness_required()),
        yn(region.beta_zero_required())
    );
    if region == RegionTag::None {
        return Err(CliError::validation(format!(
            "(s, k) = ({s}, {k}) lies outside every admissible region of the {side:?} half-line"
        )));
    }
    Ok(())
}

fn verify_operators(args: ConfigArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let grid = match cfg.grid {
        Some(_) => cfg.grid()?,
        None => SpaceTimeGrid::new(128.0, 4096, 2.0, 769)?,
    };
    let fine = grid.refined();
    let trace_on = |g: &SpaceTimeGrid| -> TimeTrace {
        TimeTrace::nonneg(
            g.ts().iter().map(|&t| C64::new(t * t * (-5.0 * t).exp(), 0.0)).collect(),
        )
    };
    let coarse_reports = trace_identity_suite(&grid, &trace_on(&grid))?;
    let fine_reports = trace_identity_suite(&fine, &trace_on(&fine))?;
    let mut csv = String::from("identity,rel_err_coarse,rel_err_fine,improvement\n");
    for (c, f) in coarse_reports.iter().zip(&fine_reports) {
        let improvement = c.rel_err / f.rel_err.max(1e-300);
        writeln!(csv, "{},{:.6e},{:.6e},{:.3}", c.name, c.rel_err, f.rel_err, improvement)
            .unwrap();
        println!(
            "{:<16} coarse {:.3e}  fine {:.3e}  improvement {:.2}x",
            c.name, c.rel_err, f.rel_err, improvement
        );
    }
    let dir = cfg.output_dir(args.out.as_deref());
    ensure_dir(&dir)?;
    write_text(&dir.join("operators.csv"), &csv)
}

fn parse_estimate(which: &str) -> Result<EstimateKind, CliError> {
    let all = [
        EstimateKind::Trilinear51,
        EstimateKind::KdvBilinear52,
        EstimateKind::Prop51,
        EstimateKind::Prop52,
        EstimateKind::Prop53,
        EstimateKind::Prop54a,
        EstimateKind::Prop54b,
    ];
    all.into_iter().find(|k| k.label() == which).ok_or_else(|| {
        let names: Vec<&str> = all.iter().map(|k| k.label()).collect();
        CliError::validation(format!(
            "unknown estimate \"{which}\"; expected one of {names:?} or \"all\""
        ))
    })
}

#[allow(clippy::too_many_arguments)]
fn verify_estimates(
    args: ConfigArgs,
    which: Option<String>,
    trials: Option<usize>,
    seed: Option<u64>,
    side: Option<String>,
    s: Option<f64>,
    k: Option<f64>,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let h = cfg.harness.as_ref();
    let which = which
        .or_else(|| h.and_then(|h| h.which.clone()))
        .unwrap_or_else(|| "all".into());
    let trials = trials.or_else(|| h.and_then(|h| h.trials)).unwrap_or(50);
    let seed = seed.or_else(|| h.and_then(|h| h.seed)).unwrap_or_else(env_seed);
    let side = parse_side(
        &side.or_else(|| h.and_then(|h| h.side.clone())).unwrap_or_else(|| "right".into()),
    )?;
    let s = s.or_else(|| h.and_then(|h| h.s)).unwrap_or(0.3);
    let k = k.or_else(|| h.and_then(|h| h.k)).unwrap_or(0.1);
    let reg = RegularityPair::new(s, k);
    let params = build_params(&cfg, side, &reg)?;
    let kinds: Vec<EstimateKind> = if which == "all" {
        required_estimates(classify_region(side, s, k), &reg)
    } else {
        vec![parse_estimate(&which)?]
    };
    let mut csv = String::from("which,a,b,alpha,trials,max_ratio,cutoff_growth,seed\n");
    for kind in kinds {
        let report = verify_estimate(kind, &reg, &params, trials, seed)?;
        println!(
            "{:<18} max ratio {:.4e}, cutoff growth {:.3}",
            kind.label(),
            report.max_ratio(),
            report.cutoff_growth
        );
        csv.push_str(&report.csv_row(&params));
        csv.push('\n');
    }
    let dir = cfg.output_dir(args.out.as_deref());
    ensure_dir(&dir)?;
    write_text(&dir.join("estimates.csv"), &csv)
}

/// Free Airy evolution of a compactly supported whole-line gaussian, used as
/// a linear KdV solution for the flux-identity checks.
fn airy_gaussian(grid: &SpaceTimeGrid) -> SampledField {
    let phi: Vec<C64> = grid
        .xs()
        .iter()
        .map(|&x| C64::new((-x * x / 2.0).exp(), 0.0))
        .collect();
    let mut field = SampledField::zeros(grid, FieldKind::Kdv);
    for i in 0..grid.nt {
        for (j, z) in evolve(PropagatorKind::Airy, grid, &phi, grid.t_at(i)).into_iter().enumerate()
        {
            field.values[(j, i)] = z;
        }
    }
    field
}

fn identities(args: ConfigArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let base = match cfg.grid {
        Some(_) => cfg.grid()?,
        None => SpaceTimeGrid::new(32.0, 256, 0.25, 129)?,
    };
    let mut csv = String::from("side,level,lhs,rhs,defect\n");
    for side in [Side::Right, Side::Left] {
        let mut defects = Vec::new();
        for (level, g) in [base.clone(), base.refined()].into_iter().enumerate() {
            let v = airy_gaussian(&g);
            let rep = flux_identity_check(&g, &v, side, g.t_max);
            writeln!(
                csv,
                "{},{level},{:.9e},{:.9e},{:.6e}",
                format!("{side:?}").to_lowercase(),
                rep.lhs,
                rep.rhs,
                rep.defect
            )
            .unwrap();
            defects.push(rep.defect);
        }
        let order = (defects[0] / defects[1].max(1e-300)).log2();
        println!(
            "{side:?}: defect {:.3e} -> {:.3e} under refinement (order {:.2})",
            defects[0], defects[1], order
        );
    }
    let dir = cfg.output_dir(args.out.as_deref());
    ensure_dir(&dir)?;
    write_text(&dir.join("identities.csv"), &csv)
}

fn sweep(args: ConfigArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let block = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::validation("config is missing the [sweep] block".into()))?;
    let side = parse_side(&block.side)?;
    let points: Vec<(f64, f64)> = block
        .s
        .iter()
        .flat_map(|&s| block.k.iter().map(move |&k| (s, k)))
        .collect();
    let rows: Vec<String> = skdv::par::map_indexed(points.len(), |i| {
        let (s, k) = points[i];
        let region = classify_region(side, s, k);
        let reg = RegularityPair::new(s, k);
        let feasible = region != RegionTag::None
            && skdv::bourgain::default_params(region, &reg).is_ok();
        format!(
            "{},{s},{k},{:?},{},{},{}",
            format!("{side:?}").to_lowercase(),
            region,
            region.smallness_required(),
            region.beta_zero_required(),
            feasible
        )
    });
    let mut csv = String::from("side,s,k,region,smallness,beta_zero,params_feasible\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    let dir = cfg.output_dir(args.out.as_deref());
    ensure_dir(&dir)?;
    write_text(&dir.join("sweep.csv"), &csv)?;
    println!("swept {} regularity pairs", points.len());
    Ok(())
}
