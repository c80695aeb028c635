//! Command-line front end: kink, kernel, spectrum, evolve, travel, sweep.
//!
//! Exit codes: 0 success with all contracts met, 1 solver failure,
//! 2 contract violation, 64 usage/validation error.

use clap::{Args, Parser, Subcommand};
use fracphi4::asym::ENDPOINT_EXCLUSION;
use fracphi4::error::Error;
use fracphi4::evolve::{self, Perturbation};
use fracphi4::green::{kernel_moment0, kernel_sign_scan, kernel_table, KernelTableSpec};
use fracphi4::io;
use fracphi4::kink::{
    fit_tail, flux_identity, solve_kink, solve_kink_opts, KinkProfile, SolveOptions, TailQuantity,
};
use fracphi4::specops::Grid;
use fracphi4::spectrum::{assemble, low_spectrum, uniqueness_check, wave_stability};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_SOLVER: u8 = 1;
const EXIT_CONTRACT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "fracphi4", version, about = "Kinks of fractional phi^4 field equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Riesz order alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Wave speed (0 = stationary problem).
    #[arg(long)]
    c: Option<f64>,
    /// Domain half-length.
    #[arg(long = "L")]
    half_length: Option<f64>,
    /// Number of grid points (even).
    #[arg(long = "N")]
    n_points: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value configuration file (flags take precedence).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for randomized inputs.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a kink profile and fit its tail.
    Kink {
        #[command(flatten)]
        common: Common,
        /// Preset: alpha = 1.5 sub-Laplacian tail data (loglog columns).
        #[arg(long)]
        figure1: bool,
        /// Preset: alpha = 2.5 super-Laplacian tail data with the overshoot.
        #[arg(long)]
        figure3: bool,
        /// Tail window lower edge.
        #[arg(long)]
        fit_lo: Option<f64>,
        /// Tail window upper edge.
        #[arg(long)]
        fit_hi: Option<f64>,
    },
    /// Tabulate the resolvent kernel with the asymptotic handoff.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Mass shift m of the resolvent (m + D^alpha)^{-1}.
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        r_star: Option<f64>,
        /// Keep quadrature values beyond R* instead of the asymptote.
        #[arg(long)]
        no_far_field: bool,
    },
    /// Low-lying spectrum of the linearized operator at one alpha.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of eigenvalues (<= 10).
        #[arg(long, default_value_t = 8)]
        k: usize,
    },
    /// lambda_1(alpha) sweep; exit 0 iff the uniqueness condition holds throughout.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha_from: Option<f64>,
        #[arg(long)]
        alpha_to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
    /// Parabolic evolution of a perturbed kink.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Perturbation shape: odd | even | random | none.
        #[arg(long, default_value = "odd")]
        perturb: String,
        /// Perturbation amplitude (discrete L2).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        sample_interval: Option<f64>,
    },
    /// Traveling kink and its spectral stability (block eigenproblem).
    Travel {
        #[command(flatten)]
        common: Common,
        /// Attempt alpha in (2,4) traveling solves (no paper-backed contracts).
        #[arg(long)]
        allow_super: bool,
    },
}

/// flag > config file > default.
struct Config {
    file: BTreeMap<String, String>,
}

impl Config {
    fn load(common: &Common) -> Result<Self, Error> {
        let file = match &common.config {
            Some(path) => io::read_config_file(path)?,
            None => BTreeMap::new(),
        };
        Ok(Config { file })
    }

    fn get_f64(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64, Error> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|e| Error::Config(format!("config {key}={s}: {e}"))),
            None => Ok(default),
        }
    }

    fn get_usize(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, Error> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|e| Error::Config(format!("config {key}={s}: {e}"))),
            None => Ok(default),
        }
    }
}

fn stamp(entries: &[(&str, String)]) -> u64 {
    let canonical: String = entries.iter().map(|(k, v)| format!("{k}={v};")).collect();
    io::config_hash(&canonical)
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::InvalidOrder(..)
        | Error::InvalidGrid(_)
        | Error::Config(_)
        | Error::GammaPole(_)
        | Error::GridMismatch(..) => EXIT_USAGE,
        Error::NoConvergence { .. }
        | Error::KrylovBreakdown(_)
        | Error::StepUnderflow { .. }
        | Error::EigenNoConvergence(_)
        | Error::DecompositionLost { .. } => EXIT_SOLVER,
        _ => EXIT_CONTRACT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Kink { common, figure1, figure3, fit_lo, fit_hi } => {
            cmd_kink(common, figure1, figure3, fit_lo, fit_hi)
        }
        Command::Kernel { common, m, x_max, r_star, no_far_field } => {
            cmd_kernel(common, m, x_max, r_star, no_far_field)
        }
        Command::Spectrum { common, k } => cmd_spectrum(common, k),
        Command::Sweep { common, alpha_from, alpha_to, step, k } => {
            cmd_sweep(common, alpha_from, alpha_to, step, k)
        }
        Command::Evolve { common, perturb, eps, t_final, dt, sample_interval } => {
            cmd_evolve(common, perturb, eps, t_final, dt, sample_interval)
        }
        Command::Travel { common, allow_super } => cmd_travel(common, allow_super),
    }
}

fn resolve_grid(
    cfg: &Config,
    common: &Common,
    default_l: f64,
    default_n: usize,
) -> Result<Grid, Error> {
    let l = cfg.get_f64(common.half_length, "L", default_l)?;
    let n = cfg.get_usize(common.n_points, "N", default_n)?;
    Grid::new(l, n)
}

fn cmd_kink(
    common: Common,
    figure1: bool,
    figure3: bool,
    fit_lo: Option<f64>,
    fit_hi: Option<f64>,
) -> Result<u8, Error> {
    let cfg = Config::load(&common)?;
    let (mut alpha_default, mut grid_l, mut grid_n) = (2.0, 50.0, 2048);
    if figure1 || figure3 {
        alpha_default = if figure1 { 1.5 } else { 2.5 };
        grid_l = 200.0;
        grid_n = 16384;
    }
    let alpha = cfg.get_f64(common.alpha, "alpha", alpha_default)?;
    let c = cfg.get_f64(common.c, "c", 0.0)?;
    let grid = resolve_grid(&cfg, &common, grid_l, grid_n)?;
    if !(1.0 < alpha && alpha < 4.0) {
        return Err(Error::InvalidOrder(alpha, "alpha in (1, 4)"));
    }

    let hash = stamp(&[
        ("cmd", "kink".into()),
        ("alpha", io::fmt_float(alpha)),
        ("c", io::fmt_float(c)),
        ("L", io::fmt_float(grid.half_length())),
        ("N", grid.len().to_string()),
    ]);

    let profile = solve_kink(grid, alpha, c, None)?;
    let out = common
        .out
        .unwrap_or_else(|| PathBuf::from(format!("kink_alpha{alpha}.csv")));
    io::write_profile_csv(&out, &profile, Some(hash))?;
    println!(
        "kink alpha={alpha} c={c}: residual {:.3e} after {} Newton steps -> {}",
        profile.residual_norm,
        profile.iterations,
        out.display()
    );

    let violations = profile.validate();
    let mut code = if violations.is_empty() {
        EXIT_OK
    } else {
        for v in &violations {
            eprintln!("contract violation: {v}");
        }
        EXIT_CONTRACT
    };

    let want_fit = figure1 || figure3 || fit_lo.is_some() || fit_hi.is_some();
    if want_fit && (alpha - 2.0).abs() > ENDPOINT_EXCLUSION {
        let window = match (fit_lo, fit_hi) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ if figure1 || figure3 => Some((20.0, 80.0)),
            _ => None,
        };
        let fit = fit_tail(&profile, TailQuantity::ProfileDefect, window)?;
        let tail_path = out.with_extension("tail.csv");
        io::write_string(&tail_path, &io::tailfit_to_csv(&fit, alpha, Some(hash)))?;
        println!(
            "tail fit on [{:.1}, {:.1}]: exponent {:.4} (target {:.1}), prefactor {:.5} \
             ({:.2}% off) -> {}",
            fit.window.0,
            fit.window.1,
            fit.fitted_exponent,
            -alpha,
            fit.fitted_prefactor,
            100.0 * fit.rel_prefactor_err,
            tail_path.display()
        );
        if fit.rel_exponent_err > 0.05 || fit.rel_prefactor_err > 0.10 {
            eprintln!("contract violation: tail fit outside tolerance");
            code = code.max(EXIT_CONTRACT);
        }
        let flux = flux_identity(&profile)?;
        println!("flux identity: {flux:.9} (target 4/3)");
    }
    Ok(code)
}

fn cmd_kernel(
    common: Common,
    m: Option<f64>,
    x_max: Option<f64>,
    r_star: Option<f64>,
    no_far_field: bool,
) -> Result<u8, Error> {
    let cfg = Config::load(&common)?;
    let alpha = cfg.get_f64(common.alpha, "alpha", 1.5)?;
    let c = cfg.get_f64(common.c, "c", 0.0)?;
    let m = cfg.get_f64(m, "m", 2.0)?;
    let x_max = cfg.get_f64(x_max, "x_max", 40.0)?;
    let r_star = cfg.get_f64(r_star, "r_star", 25.0)?;

    let mut spec = KernelTableSpec::new(alpha, m, x_max);
    if c != 0.0 {
        spec = spec.traveling(c);
    }
    spec.crossover_radius = r_star;
    let degenerate = (alpha - 2.0).abs() < ENDPOINT_EXCLUSION
        || (alpha - 4.0).abs() < ENDPOINT_EXCLUSION;
    spec.far_field = !no_far_field && !degenerate;
    let table = kernel_table(&spec)?;

    let hash = stamp(&[
        ("cmd", "kernel".into()),
        ("alpha", io::fmt_float(alpha)),
        ("m", io::fmt_float(m)),
        ("c", io::fmt_float(c)),
        ("x_max", io::fmt_float(x_max)),
    ]);
    let out = common
        .out
        .unwrap_or_else(|| PathBuf::from(format!("kernel_alpha{alpha}.csv")));
    io::write_string(&out, &io::kernel_to_csv(&table, Some(hash)))?;

    let mut code = EXIT_OK;
    if alpha < 2.0 {
        let min = table
            .k_quad
            .iter()
            .filter(|v| v.is_finite())
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            eprintln!("contract violation: sub-Laplacian kernel not positive (min {min:.3e})");
            code = EXIT_CONTRACT;
        }
    } else if alpha > 2.0 + ENDPOINT_EXCLUSION {
        match kernel_sign_scan(&table) {
            Ok(scan) => println!(
                "sign scan: K(0) = {:.6e}, {} crossing(s), negative beyond last: {}",
                scan.value_at_zero,
                scan.crossings.len(),
                scan.negative_beyond_last
            ),
            Err(e) => {
                eprintln!("contract violation: {e}");
                code = EXIT_CONTRACT;
            }
        }
    }
    if let Some(gap) = table.handoff_rel_gap {
        println!("handoff at R* = {r_star}: relative gap {gap:.3e}");
    }
    if spec.far_field && x_max >= 3000.0 {
        let m0 = kernel_moment0(&table)?;
        println!("moment: {m0:.9} (target {:.9})", 1.0 / m);
    }
    println!("kernel table -> {}", out.display());
    Ok(code)
}

fn cmd_spectrum(common: Common, k: usize) -> Result<u8, Error> {
    let cfg = Config::load(&common)?;
    let alpha = cfg.get_f64(common.alpha, "alpha", 1.5)?;
    let c = cfg.get_f64(common.c, "c", 0.0)?;
    let grid = resolve_grid(&cfg, &common, 50.0, 2048)?;
    let profile = solve_kink(grid, alpha, c, None)?;
    let op = assemble(&profile)?;
    let report = low_spectrum(&op, k)?;
    let uq = uniqueness_check(&report);

    let hash = stamp(&[
        ("cmd", "spectrum".into()),
        ("alpha", io::fmt_float(alpha)),
        ("c", io::fmt_float(c)),
        ("k", k.to_string()),
    ]);
    let rows = vec![io::SweepRow {
        alpha,
        eigenvalues: report.eigenvalues.clone(),
        ground_alignment: report.ground_alignment,
        verdict: uq.verdict,
    }];
    let out = common
        .out
        .unwrap_or_else(|| PathBuf::from(format!("spectrum_alpha{alpha}.csv")));
    io::write_string(&out, &io::sweep_to_csv(&rows, k, Some(hash)))?;
    println!(
        "spectrum alpha={alpha}: lambda_0 = {:.3e}, lambda_1 = {:.6}, alignment = {:.9}, \
         uniqueness: {} -> {}",
        report.eigenvalues[0],
        uq.lambda1,
        report.ground_alignment,
        uq.verdict,
        out.display()
    );
    if let Some(edge) = report.essential_edge_estimate {
        println!("essential edge estimate: {edge:.4}");
    }
    Ok(if uq.verdict { EXIT_OK } else { EXIT_CONTRACT })
}

fn cmd_sweep(
    common: Common,
    alpha_from: Option<f64>,
    alpha_to: Option<f64>,
    step: Option<f64>,
    k: usize,
) -> Result<u8, Error> {
    let cfg = Config::load(&common)?;
    let from = cfg.get_f64(alpha_from, "alpha_from", 1.1)?;
    let to = cfg.get_f64(alpha_to, "alpha_to", 2.4)?;
    let step = cfg.get_f64(step, "step", 0.1)?;
    if from > to || step <= 0.0 || step > 0.1 + 1e-12 {
        return Err(Error::Config(format!(
            "malformed sweep grid: from {from}, to {to}, step {step}"
        )));
    }
    let grid = resolve_grid(&cfg, &common, 50.0, 2048)?;

    let mut alphas = Vec::new();
    let mut a = from;
    while a <= to + 1e-9 {
        alphas.push((a * 1e9).round() / 1e9);
        a += step;
    }

    // continue outward from the exact anchor at alpha = 2
    let mut below: Vec<f64> = alphas.iter().cloned().filter(|&a| a <= 2.0).collect();
    below.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let mut above: Vec<f64> = alphas.iter().cloned().filter(|&a| a > 2.0).collect();
    above.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut all_good = true;
    let mut results: BTreeMap<u64, io::SweepRow> = BTreeMap::new();
    for list in [below, above] {
        let mut prev: Option<KinkProfile> = None;
        for a in list {
            let row = match solve_kink(grid, a, 0.0, prev.as_ref()).and_then(|p| {
                let op = assemble(&p)?;
                let report = low_spectrum(&op, k)?;
                let uq = uniqueness_check(&report);
                prev = Some(p);
                Ok(io::SweepRow {
                    alpha: a,
                    eigenvalues: report.eigenvalues,
                    ground_alignment: report.ground_alignment,
                    verdict: uq.verdict,
                })
            }) {
                Ok(row) => row,
                Err(e) => {
                    eprintln!("alpha = {a}: {e}");
                    io::SweepRow {
                        alpha: a,
                        eigenvalues: vec![],
                        ground_alignment: f64::NAN,
                        verdict: false,
                    }
                }
            };
            all_good &= row.verdict;
            results.insert((a * 1e9) as u64, row);
        }
    }
    let rows: Vec<io::SweepRow> = results.into_values().collect();

    let hash = stamp(&[
        ("cmd", "sweep".into()),
        ("from", io::fmt_float(from)),
        ("to", io::fmt_float(to)),
        ("step", io::fmt_float(step)),
    ]);
    let out = common
        .out
        .unwrap_or_else(|| PathBuf::from("spectrum_sweep.csv"));
    io::write_string(&out, &io::sweep_to_csv(&rows, k, Some(hash)))?;
    for row in &rows {
        println!(
            "alpha = {:>4}: lambda_1 = {:<10} verdict = {}",
            row.alpha,
            row.eigenvalues
                .get(1)
                .map(|l| format!("{l:.6}"))
                .unwrap_or_else(|| "failed".into()),
            row.verdict
        );
    }
    println!("sweep -> {}", out.display());
    Ok(if all_good { EXIT_OK } else { EXIT_CONTRACT })
}

fn cmd_evolve(
    common: Common,
    perturb: String,
    eps: Option<f64>,
    t_final: Option<f64>,
    dt: Option<f64>,
    sample_interval: Option<f64>,
) -> Result<u8, Error> {
    let cfg = Config::load(&common)?;
    let alpha = cfg.get_f64(common.alpha, "alpha", 1.5)?;
    let grid = resolve_grid(&cfg, &common, 50.0, 2048)?;
    let eps = cfg.get_f64(eps, "eps", 0.05)?;
    let t_final = cfg.get_f64(t_final, "t_final", 40.0)?;
    let dt = cfg.get_f64(dt, "dt", 0.1)?;
    let sample_interval = cfg.get_f64(sample_interval, "sample_interval", 0.5)?;
    let seed = common.seed.unwrap_or(1);

    let kind = match perturb.as_str() {
        "odd" => Perturbation::Odd,
        "even" => Perturbation::Even,
        "random" => Perturbation::Random,
        "none" => Perturbation::None,
        other => return Err(Error::Config(format!("unknown perturbation {other:?}"))),
    };
    let profile = solve_kink(grid, alpha, 0.0, None)?;
    let bump = evolve::perturbation(grid, kind, eps, seed);
    let u0 = profile.phi.add(&bump)?;
    let trace = evolve::run(&u0, &profile, t_final, dt, sample_interval)?;

    let hash = stamp(&[
        ("cmd", "evolve".into()),
        ("alpha", io::fmt_float(alpha)),
        ("perturb", perturb.clone()),
        ("eps", io::fmt_float(eps)),
        ("T", io::fmt_float(t_final)),
        ("dt", io::fmt_float(dt)),
        ("seed", seed.to_string()),
    ]);
    let out = common
        .out
        .unwrap_or_else(|| PathBuf::from(format!("evolve_alpha{alpha}_{perturb}.csv")));
    io::write_string(
        &out,
        &io::trace_to_csv(&trace, &format!("phi + {perturb} bump, eps = {eps}"), Some(hash)),
    )?;
    println!(
        "evolve alpha={alpha} perturb={perturb}: kappa_fit = {:.4} (R^2 = {:.5}), \
         sigma(T) = {:.3e} -> {}",
        trace.kappa_fit,
        trace.kappa_fit_r2,
        trace.shifts.last().unwrap(),
        out.display()
    );

    let monotone = trace.energies.windows(2).all(|w| w[1] <= w[0] + 1e-10);
    if !monotone {
        eprintln!("contract violation: energy not monotone");
        return Ok(EXIT_CONTRACT);
    }
    Ok(EXIT_OK)
}

fn cmd_travel(common: Common, allow_super: bool) -> Result<u8, Error> {
    let cfg = Config::load(&common)?;
    let alpha = cfg.get_f64(common.alpha, "alpha", 1.5)?;
    let c = cfg.get_f64(common.c, "c", 0.5)?;
    let grid = resolve_grid(&cfg, &common, 50.0, 1024)?;
    let opts = SolveOptions {
        allow_super_traveling: allow_super,
        ..Default::default()
    };
    let profile = solve_kink_opts(grid, alpha, c, None, &opts)?;
    let report = wave_stability(&profile)?;
    println!(
        "travel alpha={alpha} c={c}: max Re lambda = {:.3e} over {} eigenvalues",
        report.max_re,
        report.eigenvalues.len()
    );
    if let Some(out) = common.out {
        let mut s = String::new();
        s.push_str("re,im\n");
        for z in &report.eigenvalues {
            s.push_str(&format!("{},{}\n", io::fmt_float(z.re), io::fmt_float(z.im)));
        }
        io::write_string(&out, &s)?;
        println!("block spectrum -> {}", out.display());
    }
    if alpha > 2.0 {
        // outside the spectral-stability theorem's range: report only
        return Ok(EXIT_OK);
    }
    Ok(if report.max_re <= 1e-6 { EXIT_OK } else { EXIT_CONTRACT })
}
