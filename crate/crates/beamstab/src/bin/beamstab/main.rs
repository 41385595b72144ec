//! Batch front end: spectra, thresholds, table reproduction and modal
//! simulations, emitted as deterministic CSV.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use beamstab::closed_form::{self, TwoStepParams};
use beamstab::density::{Density, PierLayout, TwoStepCenter};
use beamstab::error::Error;
use beamstab::evolution::{self, InitialData, ModalState};
use beamstab::galerkin::{self, WeightedSpectrum};
use beamstab::optimizer;
use beamstab::stability::{self, StabilityReport};
use beamstab::tables::{self, CellStatus, TableId};
use beamstab::waveform::Parity;

/// Exit code for numerical failures.
const EXIT_NUMERICAL: u8 = 1;
/// Exit code for configuration errors.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "beamstab",
    about = "Vibration spectra, instability thresholds and density optimization \
             for a multiply hinged non-homogeneous beam",
    after_help = "A config file given with --config holds `key = value` lines whose \
                  keys match the long option names (dashes or underscores); values \
                  from the file override command-line flags. The environment \
                  variable BEAMSTAB_WORKERS caps the worker thread count. Exit \
                  codes: 0 success, 1 numerical failure, 2 configuration error."
)]
struct Cli {
    /// Key = value configuration file; entries override flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DensityMode {
    Homogeneous,
    TwoStepHeavy,
    TwoStepLight,
    Optimize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    /// Transcendental root finding; homogeneous and two-step densities only.
    ClosedForm,
    /// Expansion in the homogeneous eigenbasis; any bang-bang density.
    Galerkin,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Lower density bound (and value of the light material).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,

    /// Upper density bound (and value of the heavy material).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,

    /// Pier position parameter in (0, 1); piers sit at +/- a*pi.
    #[arg(long, default_value_t = 0.5)]
    a: f64,

    /// Density layout.
    #[arg(long, value_enum, default_value_t = DensityMode::Homogeneous)]
    mode: DensityMode,

    /// Basis order per parity for the expansion solver.
    #[arg(long = "n", default_value_t = galerkin::DEFAULT_BASIS_ORDER)]
    n_basis: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: format!("i/o error: {e}"),
        }
    }
}

#[derive(Subcommand, Clone)]
enum Command {
    /// First eigenvalues of the weighted problem.
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Number of eigenvalues to report.
        #[arg(long, default_value_t = 12)]
        count: usize,
        /// Eigenvalue solver; defaults to closed-form where available.
        #[arg(long, value_enum)]
        solver: Option<Solver>,
    },
    /// Critical energies over consecutive mode pairs and their minimum.
    Threshold {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Regenerate a summary table and compare it against reference values.
    Reproduce {
        /// Table identifier: T1, T2, T3, T4 or T5.
        #[arg(long)]
        table: String,
        /// Basis order per parity for the expansion solver.
        #[arg(long = "n", default_value_t = galerkin::DEFAULT_BASIS_ORDER)]
        n_basis: usize,
    },
    /// Integrate the modal system and record the trajectory.
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Number of retained modes.
        #[arg(long, default_value_t = 2)]
        modes: usize,
        /// 1-based index of the prevailing mode; the residual is the next one.
        #[arg(long, default_value_t = 1)]
        pair: usize,
        /// Initial prevailing amplitude (absolute).
        #[arg(long)]
        zeta: Option<f64>,
        /// Initial prevailing amplitude relative to the critical amplitude D.
        #[arg(long)]
        zeta_rel: Option<f64>,
        /// Initial residual amplitude (absolute).
        #[arg(long)]
        z0: Option<f64>,
        /// Initial residual amplitude relative to zeta.
        #[arg(long)]
        z0_rel: Option<f64>,
        /// Length of the run in prevailing-mode periods.
        #[arg(long, default_value_t = 10.0)]
        periods: f64,
        /// Time step override; defaults to the shortest linear period / 512.
        #[arg(long)]
        dt: Option<f64>,
        /// Record every k-th step.
        #[arg(long, default_value_t = 8)]
        sample_every: usize,
    },
}

/// Twelve significant digits, reproducibly.
fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var("BEAMSTAB_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Parse `key = value` lines; `#` starts a comment.
fn parse_config(path: &Path) -> Result<HashMap<String, String>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::config(format!(
                "config line {} is not `key = value`: {raw:?}",
                lineno + 1
            ))
        })?;
        map.insert(
            key.trim().replace('-', "_").to_ascii_lowercase(),
            value.trim().to_string(),
        );
    }
    Ok(map)
}

fn override_f64(map: &HashMap<String, String>, key: &str, slot: &mut f64) -> Result<(), Failure> {
    if let Some(v) = map.get(key) {
        *slot = v
            .parse()
            .map_err(|_| Failure::config(format!("config key {key}: bad number {v:?}")))?;
    }
    Ok(())
}

fn override_usize(
    map: &HashMap<String, String>,
    key: &str,
    slot: &mut usize,
) -> Result<(), Failure> {
    if let Some(v) = map.get(key) {
        *slot = v
            .parse()
            .map_err(|_| Failure::config(format!("config key {key}: bad integer {v:?}")))?;
    }
    Ok(())
}

fn override_opt_f64(
    map: &HashMap<String, String>,
    key: &str,
    slot: &mut Option<f64>,
) -> Result<(), Failure> {
    if let Some(v) = map.get(key) {
        *slot = Some(
            v.parse()
                .map_err(|_| Failure::config(format!("config key {key}: bad number {v:?}")))?,
        );
    }
    Ok(())
}

fn apply_problem_overrides(
    map: &HashMap<String, String>,
    p: &mut ProblemArgs,
) -> Result<(), Failure> {
    override_f64(map, "alpha", &mut p.alpha)?;
    override_f64(map, "beta", &mut p.beta)?;
    override_f64(map, "a", &mut p.a)?;
    override_usize(map, "n", &mut p.n_basis)?;
    if let Some(v) = map.get("mode") {
        p.mode = match v.replace('_', "-").as_str() {
            "homogeneous" => DensityMode::Homogeneous,
            "two-step-heavy" => DensityMode::TwoStepHeavy,
            "two-step-light" => DensityMode::TwoStepLight,
            "optimize" => DensityMode::Optimize,
            other => {
                return Err(Failure::config(format!("config key mode: unknown {other:?}")))
            }
        };
    }
    Ok(())
}

fn run(mut cli: Cli) -> Result<(), Failure> {
    let overrides = match &cli.config {
        Some(path) => parse_config(path)?,
        None => HashMap::new(),
    };
    if let Some(v) = overrides.get("out") {
        cli.out = PathBuf::from(v);
    }
    fs::create_dir_all(&cli.out)
        .map_err(|e| Failure::config(format!("cannot create output dir: {e}")))?;

    match cli.command {
        Command::Spectrum {
            mut problem,
            mut count,
            solver,
        } => {
            apply_problem_overrides(&overrides, &mut problem)?;
            override_usize(&overrides, "count", &mut count)?;
            cmd_spectrum(&cli.out, &problem, count, solver)
        }
        Command::Threshold { mut problem } => {
            apply_problem_overrides(&overrides, &mut problem)?;
            cmd_threshold(&cli.out, &problem)
        }
        Command::Reproduce {
            mut table,
            mut n_basis,
        } => {
            if let Some(v) = overrides.get("table") {
                table = v.clone();
            }
            override_usize(&overrides, "n", &mut n_basis)?;
            cmd_reproduce(&cli.out, &table, n_basis)
        }
        Command::Simulate {
            mut problem,
            mut modes,
            mut pair,
            mut zeta,
            mut zeta_rel,
            mut z0,
            mut z0_rel,
            mut periods,
            mut dt,
            mut sample_every,
        } => {
            apply_problem_overrides(&overrides, &mut problem)?;
            override_usize(&overrides, "modes", &mut modes)?;
            override_usize(&overrides, "pair", &mut pair)?;
            override_opt_f64(&overrides, "zeta", &mut zeta)?;
            override_opt_f64(&overrides, "zeta_rel", &mut zeta_rel)?;
            override_opt_f64(&overrides, "z0", &mut z0)?;
            override_opt_f64(&overrides, "z0_rel", &mut z0_rel)?;
            override_f64(&overrides, "periods", &mut periods)?;
            override_opt_f64(&overrides, "dt", &mut dt)?;
            override_usize(&overrides, "sample_every", &mut sample_every)?;
            cmd_simulate(
                &cli.out,
                &problem,
                modes,
                pair,
                zeta,
                zeta_rel,
                z0,
                z0_rel,
                periods,
                dt,
                sample_every,
            )
        }
    }
}

/// Resolve the density for a problem; `Optimize` runs the improvement loop.
fn resolve_density(problem: &ProblemArgs, layout: &PierLayout) -> Result<Density, Failure> {
    match problem.mode {
        DensityMode::Homogeneous => {
            if problem.alpha != 1.0 || problem.beta != 1.0 {
                // A constant unit density inside wider bounds is admissible.
                Ok(Density::raw(problem.alpha, problem.beta, Vec::new(), vec![1.0])?)
            } else {
                Ok(Density::homogeneous())
            }
        }
        DensityMode::TwoStepHeavy => Ok(Density::two_step(
            problem.alpha,
            problem.beta,
            TwoStepCenter::Heavy,
        )?),
        DensityMode::TwoStepLight => Ok(Density::two_step(
            problem.alpha,
            problem.beta,
            TwoStepCenter::Light,
        )?),
        DensityMode::Optimize => {
            let res =
                optimizer::optimize_density(layout, problem.alpha, problem.beta, problem.n_basis)?;
            Ok(res.best.density)
        }
    }
}

fn spectrum_with_parities(
    density: &Density,
    layout: &PierLayout,
    problem: &ProblemArgs,
) -> Result<Vec<(f64, Parity)>, Failure> {
    if density.jump_count() <= 1 {
        let roots = closed_form::find_eigenvalues(density, layout, 12)?;
        Ok(roots.iter().map(|r| (r.lambda, r.parity)).collect())
    } else {
        let spec = galerkin::solve_weighted_spectrum(density, layout, problem.n_basis)?;
        Ok(spec.eigenvalues())
    }
}

fn cmd_spectrum(
    out: &Path,
    problem: &ProblemArgs,
    count: usize,
    solver: Option<Solver>,
) -> Result<(), Failure> {
    if count == 0 {
        return Err(Failure::config("count must be at least 1".to_string()));
    }
    let layout = PierLayout::new(problem.a)?;
    let density = resolve_density(problem, &layout)?;
    let solver = solver.unwrap_or(if density.jump_count() <= 1 {
        Solver::ClosedForm
    } else {
        Solver::Galerkin
    });

    let mut lines = vec!["index,parity,mu,lambda,normalization_check".to_string()];
    match solver {
        Solver::ClosedForm => {
            if density.jump_count() > 1 {
                return Err(Failure::config(
                    "closed-form solver requires a homogeneous or two-step density".to_string(),
                ));
            }
            let params = TwoStepParams::new(&density, &layout)?;
            let roots = closed_form::find_eigenvalues_params(&params, count)?;
            for (i, root) in roots.iter().enumerate() {
                let fun = closed_form::eigenfunction_closed_form(root, &params)?;
                let norm = 2.0 * fun.product(&fun).weighted_integral_half(&density);
                lines.push(format!(
                    "{},{},{},{},{}",
                    i + 1,
                    root.parity.label(),
                    fmt12(root.mu),
                    fmt12(root.lambda),
                    fmt12((norm - 1.0).abs())
                ));
            }
        }
        Solver::Galerkin => {
            if count > 12 {
                return Err(Failure::config(
                    "the expansion solver reports at most 12 eigenvalues".to_string(),
                ));
            }
            let spec = galerkin::solve_weighted_spectrum(&density, &layout, problem.n_basis)?;
            for (i, pair) in spec.pairs.iter().take(count).enumerate() {
                let norm = spec.weighted_product_integral(i + 1, i + 1);
                lines.push(format!(
                    "{},{},{},{},{}",
                    i + 1,
                    pair.parity.label(),
                    fmt12(pair.lambda.sqrt().sqrt()),
                    fmt12(pair.lambda),
                    fmt12((norm - 1.0).abs())
                ));
            }
        }
    }
    write_lines(&out.join("spectrum.csv"), &lines)?;
    write_lines(&out.join("density.txt"), &[density.to_record()])?;
    println!(
        "spectrum: {} eigenvalues written to {}",
        lines.len() - 1,
        out.display()
    );
    Ok(())
}

fn report_lines(report: &StabilityReport) -> Vec<String> {
    let mut lines = vec![
        "j,lambda,nu,parity_low,parity_high,d_critical,e_critical,ratio,is_minimum".to_string(),
    ];
    for pair in &report.pairs {
        lines.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            pair.j,
            fmt12(pair.lambda),
            fmt12(pair.nu),
            pair.parities.0.label(),
            pair.parities.1.label(),
            fmt12(pair.d_critical),
            fmt12(pair.e_critical),
            fmt12(pair.ratio),
            (pair.j == report.min_pair().j) as u8
        ));
    }
    lines
}

fn cmd_threshold(out: &Path, problem: &ProblemArgs) -> Result<(), Failure> {
    let layout = PierLayout::new(problem.a)?;
    let density = resolve_density(problem, &layout)?;
    let spectrum = spectrum_with_parities(&density, &layout, problem)?;
    let report = stability::threshold(&spectrum)?;
    write_lines(&out.join("threshold.csv"), &report_lines(&report))?;
    write_lines(&out.join("density.txt"), &[density.to_record()])?;
    println!(
        "threshold {} attained by lambda_{}/lambda_{}",
        fmt12(report.threshold),
        report.min_pair().j + 1,
        report.min_pair().j
    );
    Ok(())
}

fn cmd_reproduce(out: &Path, table: &str, n_basis: usize) -> Result<(), Failure> {
    let id: TableId = table.parse()?;
    let (rows, ok) = tables::reproduce(id, n_basis)?;

    let mut computed = vec!["table,alpha,beta,a,e_over_100,ratio,n_jumps,rho,density".to_string()];
    let mut comparison = vec![
        "alpha,beta,a,e_over_100,e_reference,rel_dev,ratio,ratio_reference,\
         n_jumps,n_jumps_reference,rho,rho_reference,status,note"
            .to_string(),
    ];
    for row in &rows {
        let c = &row.computed;
        let r = &row.reference;
        computed.push(format!(
            "{},{},{},{},{},{}/{},{},{},{}",
            id.name(),
            fmt12(c.alpha),
            fmt12(c.beta),
            fmt12(c.a),
            fmt12(c.e_over_100),
            c.pair_index + 1,
            c.pair_index,
            c.n_jumps,
            c.rho.map(fmt12).unwrap_or_default(),
            c.density.to_record()
        ));
        let (status, note) = match &row.status {
            CellStatus::Ok => ("ok", String::new()),
            CellStatus::MarginalRatio => {
                let (j, e) = c.near_tie.expect("marginal implies tie");
                (
                    "marginal-ratio",
                    format!(
                        "pairs {}/{} and {}/{} within 1% (runner-up E = {})",
                        c.pair_index + 1,
                        c.pair_index,
                        j + 1,
                        j,
                        fmt12(e)
                    ),
                )
            }
            CellStatus::Failed(msg) => ("FAIL", msg.clone()),
        };
        if status == "FAIL" {
            eprintln!(
                "cell (alpha={}, beta={}, a={}): {}",
                c.alpha, c.beta, c.a, note
            );
        }
        comparison.push(format!(
            "{},{},{},{},{},{},{}/{},{},{},{},{},{},{},{}",
            fmt12(c.alpha),
            fmt12(c.beta),
            fmt12(c.a),
            fmt12(c.e_over_100),
            fmt12(r.e_over_100),
            fmt12(row.e_rel_dev),
            c.pair_index + 1,
            c.pair_index,
            r.pair_index
                .map(|j| format!("{}/{}", j + 1, j))
                .unwrap_or_default(),
            c.n_jumps,
            r.n_jumps.map(|n| n.to_string()).unwrap_or_default(),
            c.rho.map(fmt12).unwrap_or_default(),
            r.rho.map(fmt12).unwrap_or_default(),
            status,
            note
        ));
    }
    let name = id.name();
    write_lines(&out.join(format!("{name}_computed.csv")), &computed)?;
    write_lines(&out.join(format!("{name}_comparison.csv")), &comparison)?;
    let marginal = rows
        .iter()
        .filter(|r| r.status == CellStatus::MarginalRatio)
        .count();
    println!(
        "{name}: {} cells, {} marginal ratio ties, {}",
        rows.len(),
        marginal,
        if ok {
            "all within tolerance"
        } else {
            "FAILURES present"
        }
    );
    if ok {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!("{name}: at least one cell outside tolerance"),
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    out: &Path,
    problem: &ProblemArgs,
    modes: usize,
    pair: usize,
    zeta: Option<f64>,
    zeta_rel: Option<f64>,
    z0: Option<f64>,
    z0_rel: Option<f64>,
    periods: f64,
    dt: Option<f64>,
    sample_every: usize,
) -> Result<(), Failure> {
    if let Some(dt) = dt {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Failure::config(format!("dt must be positive, got {dt}")));
        }
    }
    if periods <= 0.0 {
        return Err(Failure::config("periods must be positive".to_string()));
    }
    if modes == 0 || modes > 12 {
        return Err(Failure::config("modes must be in 1..=12".to_string()));
    }
    if pair == 0 || pair >= modes.max(2) {
        return Err(Failure::config(format!(
            "pair must be in 1..modes, got {pair}"
        )));
    }

    let layout = PierLayout::new(problem.a)?;
    let density = resolve_density(problem, &layout)?;
    let spec: WeightedSpectrum =
        galerkin::solve_weighted_spectrum(&density, &layout, problem.n_basis)?;
    let lambdas: Vec<f64> = spec.pairs.iter().take(modes).map(|p| p.lambda).collect();

    let (lam, nu) = (lambdas[pair - 1], lambdas[pair]);
    let d_crit = stability::critical_amplitude(lam, nu)?;
    let zeta = match (zeta, zeta_rel) {
        (Some(z), None) => z,
        (None, Some(r)) => r * d_crit,
        (None, None) => 0.9 * d_crit,
        (Some(_), Some(_)) => {
            return Err(Failure::config(
                "give either zeta or zeta-rel, not both".to_string(),
            ))
        }
    };
    let z0 = match (z0, z0_rel) {
        (Some(z), None) => z,
        (None, Some(r)) => r * zeta,
        (None, None) => 0.0,
        (Some(_), Some(_)) => {
            return Err(Failure::config(
                "give either z0 or z0-rel, not both".to_string(),
            ))
        }
    };
    if zeta <= 0.0 {
        return Err(Failure::config("zeta must resolve positive".to_string()));
    }

    let mut c = vec![0.0; modes];
    c[pair - 1] = zeta;
    c[pair] = z0;
    let state0 = ModalState::new(c, vec![0.0; modes])?;
    let period = stability::duffing_period(lam, zeta)?;
    let lambda_max = lambdas.iter().cloned().fold(0.0_f64, f64::max);
    let dt = dt.unwrap_or_else(|| 2.0 * std::f64::consts::PI / lambda_max.sqrt() / 512.0);
    let traj = evolution::simulate(&state0, &lambdas, periods * period, dt, sample_every)?;

    let mut header = vec!["t".to_string()];
    header.extend((1..=modes).map(|j| format!("c_{j}")));
    header.extend((1..=modes).map(|j| format!("cdot_{j}")));
    header.push("E_total".to_string());
    header.extend((1..=modes).map(|j| format!("E_mode_{j}")));
    let mut lines = vec![header.join(",")];
    for (k, state) in traj.states.iter().enumerate() {
        let mut row = vec![fmt12(state.t)];
        row.extend(state.c.iter().map(|v| fmt12(*v)));
        row.extend(state.cdot.iter().map(|v| fmt12(*v)));
        row.push(fmt12(traj.total[k]));
        row.extend(traj.modal[k].iter().map(|v| fmt12(*v)));
        lines.push(row.join(","));
    }
    write_lines(&out.join("trajectory.csv"), &lines)?;
    write_lines(&out.join("density.txt"), &[density.to_record()])?;
    println!(
        "simulated {} samples over {} periods (energy drift {})",
        traj.states.len(),
        periods,
        fmt12(traj.energy_drift)
    );

    // Projection sanity: the initial data concentrates on the chosen pair.
    let check = evolution::project_initial(
        InitialData::ModeWeights(state0.c.clone()),
        InitialData::ModeWeights(state0.cdot.clone()),
        &spec,
        modes,
    )?;
    debug_assert_eq!(check.c, state0.c);
    Ok(())
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), Failure> {
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
