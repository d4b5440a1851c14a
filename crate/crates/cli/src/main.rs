//! Command-line front end: single runs, condition-number sweeps, the
//! verification battery, and the reference ODE integrator.
//!
//! Exit codes: 0 success, 1 configuration error, 2 non-convergence or
//! insufficient data, 3 invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lie_momentum::diagnostics::MonitorSummary;
use lie_momentum::error::LieError;
use lie_momentum::experiment::{
    exact_max_ad_norm, run_single, InitMode, RunConfig, SweepConfig, SweepSummary,
};
use lie_momentum::io::{line_plot, palette_color, write_atomic, Series};
use lie_momentum::ode::{energy_identity_defect, integrate_ode};
use lie_momentum::optimizer::{Scheme, SchemeParams};
use lie_momentum::potential::{BrockettPotential, Potential, SpectrumSpec};
use lie_momentum::rng::{derive_rng, rand_unit_algebra};
use lie_momentum::verify::{run_battery, Fault};
use lie_momentum::AlgebraElement;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "lie-momentum",
    version,
    about = "Momentum optimizers on SO(n) with energy/Lyapunov instrumentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization trajectory and write its trace and summary.
    Run(RunArgs),
    /// Run the condition-number sweep and fit the log-log rate scaling.
    Sweep(SweepArgs),
    /// Run the built-in invariant battery.
    Verify(VerifyArgs),
    /// Integrate the damped reference dynamics with RK4.
    Ode(OdeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Step size override (rule-selected value when omitted).
    #[arg(long)]
    h: Option<f64>,
    /// Friction override (rule-selected value when omitted).
    #[arg(long)]
    gamma: Option<f64>,
    /// Curvature radius parameter for the NAG-SC step rule.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    /// Relative suboptimality convergence threshold.
    #[arg(long)]
    eps: Option<f64>,
    /// Initialization: near-min, near-max, or haar.
    #[arg(long)]
    init: Option<String>,
    /// Radius (factor of a/A for near-min) of the initial perturbation.
    #[arg(long)]
    init_radius: Option<f64>,
    /// Store every k-th trace row.
    #[arg(long)]
    trace_stride: Option<u64>,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated condition numbers.
    #[arg(long, value_delimiter = ',')]
    kappas: Option<Vec<f64>>,
    /// Comma-separated schemes.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds per (scheme, kappa) point; the median rate is reported.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Also write one suboptimality CSV per run.
    #[arg(long)]
    write_run_traces: bool,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to one group: lie-core, potentials, optimizers, diagnostics.
    #[arg(long)]
    only: Option<String>,
    /// Inject a deliberate defect (test fixture): hb-friction-sign.
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 100.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Friction; defaults to 2 sqrt(mu).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 5.0)]
    t_final: f64,
    /// Initial geodesic distance from the minimizer.
    #[arg(long, default_value_t = 0.0314)]
    init_radius: f64,
    /// Record every k-th step.
    #[arg(long, default_value_t = 10)]
    record_every: usize,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Ode(args) => cmd_ode(args),
    };
    match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(err: &LieError) -> u8 {
    match err {
        LieError::TailTooShort { .. } | LieError::InsufficientPoints { .. } => 2,
        _ => 1,
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, LieError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| LieError::InvalidParameter(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| LieError::InvalidParameter(format!("config {}: {e}", path.display())))
}

fn parse_init(name: &str, radius: Option<f64>) -> Result<InitMode, LieError> {
    match name {
        "near-min" => Ok(InitMode::NearMin {
            radius_factor: radius.unwrap_or(0.01),
        }),
        "near-max" => Ok(InitMode::NearMax {
            radius: radius.unwrap_or(0.01),
        }),
        "haar" => Ok(InitMode::Haar),
        other => Err(LieError::InvalidParameter(format!(
            "init mode '{other}' (expected near-min, near-max, haar)"
        ))),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), LieError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| LieError::InvalidParameter(format!("output-dir {}: {e}", dir.display())))
}

/// Everything a run summary embeds: resolved config, library version, and
/// the result minus the bulky trace (which goes to CSV).
#[derive(Serialize)]
struct RunSummary<'a> {
    version: &'a str,
    config: &'a RunConfig,
    params: SchemeParams,
    l: f64,
    mu: f64,
    theoretical_contraction: Option<f64>,
    converged: bool,
    iterations: u64,
    initial_subopt: f64,
    final_subopt: f64,
    relative_subopt: f64,
    min_value: f64,
    monitors: &'a MonitorSummary,
    final_g: &'a [f64],
    final_xi: &'a [f64],
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, LieError> {
    let mut cfg: RunConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => RunConfig::new(10, 1e3, 1, Scheme::NagSc),
    };
    if let Some(s) = args.scheme {
        cfg.scheme = s;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(k) = args.kappa {
        cfg.kappa = k;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.h.is_some() {
        cfg.h = args.h;
    }
    if args.gamma.is_some() {
        cfg.gamma = args.gamma;
    }
    if let Some(a) = args.a {
        cfg.a = a;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    if let Some(e) = args.eps {
        cfg.eps = e;
    }
    if let Some(init) = &args.init {
        cfg.init = parse_init(init, args.init_radius)?;
    } else if let Some(r) = args.init_radius {
        cfg.init = InitMode::NearMin { radius_factor: r };
    }
    if let Some(ts) = args.trace_stride {
        cfg.trace_stride = Some(ts);
    }

    ensure_dir(&args.output_dir)?;
    let out = run_single(&cfg)?;

    let csv = out.trace.to_csv();
    write_atomic(&args.output_dir.join("trace.csv"), csv.as_bytes())
        .map_err(|e| LieError::InvalidParameter(format!("writing trace.csv: {e}")))?;

    let summary = RunSummary {
        version: VERSION,
        config: &cfg,
        params: out.params,
        l: out.l,
        mu: out.mu,
        theoretical_contraction: out.theoretical_contraction,
        converged: out.converged,
        iterations: out.iterations,
        initial_subopt: out.initial_subopt,
        final_subopt: out.final_subopt,
        relative_subopt: out.final_subopt / out.initial_subopt.max(f64::MIN_POSITIVE),
        min_value: out.min_value,
        monitors: &out.monitors,
        final_g: &out.final_g,
        final_xi: &out.final_xi,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_atomic(&args.output_dir.join("run_summary.json"), json.as_bytes())
        .map_err(|e| LieError::InvalidParameter(format!("writing run_summary.json: {e}")))?;

    // Convergence plot: log10 suboptimality against iteration.
    let pts: Vec<(f64, f64)> = out
        .trace
        .rows
        .iter()
        .filter(|r| r.subopt > 0.0)
        .map(|r| (r.k as f64, r.subopt.log10()))
        .collect();
    if pts.len() >= 2 {
        let svg = line_plot(
            &format!("{} kappa={} seed={}", out.scheme.as_str(), cfg.kappa, cfg.seed),
            "iteration",
            "log10 (U - U*)",
            &[Series {
                label: out.scheme.as_str().to_string(),
                points: pts,
                color: palette_color(0),
                dashed: false,
            }],
        );
        write_atomic(&args.output_dir.join("convergence.svg"), svg.as_bytes())
            .map_err(|e| LieError::InvalidParameter(format!("writing convergence.svg: {e}")))?;
    }

    println!(
        "{} n={} kappa={} seed={}: {} after {} iterations, relative suboptimality {:.3e}",
        out.scheme.as_str(),
        cfg.n,
        cfg.kappa,
        cfg.seed,
        if out.converged { "converged" } else { "did NOT converge" },
        out.iterations,
        summary.relative_subopt
    );
    println!(
        "energy violations: {}, Lyapunov violations: {} (outputs in {})",
        out.monitors.energy_violations,
        out.monitors.lyapunov_violations,
        args.output_dir.display()
    );
    Ok(if out.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, LieError> {
    let mut cfg: SweepConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => SweepConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(k) = args.kappas {
        cfg.kappas = k;
    }
    if let Some(s) = args.schemes {
        cfg.schemes = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.seeds {
        cfg.seeds_per_point = s;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    if let Some(e) = args.eps {
        cfg.eps = e;
    }
    if let Some(a) = args.a {
        cfg.a = a;
    }

    ensure_dir(&args.output_dir)?;
    let summary = lie_momentum::experiment::sweep_and_fit(&cfg)?;

    #[derive(Serialize)]
    struct Versioned<'a> {
        version: &'a str,
        #[serde(flatten)]
        summary: &'a SweepSummary,
    }
    let json = serde_json::to_string_pretty(&Versioned {
        version: VERSION,
        summary: &summary,
    })
    .expect("summary serializes");
    write_atomic(&args.output_dir.join("sweep_summary.json"), json.as_bytes())
        .map_err(|e| LieError::InvalidParameter(format!("writing sweep_summary.json: {e}")))?;

    write_atomic(
        &args.output_dir.join("rates.svg"),
        rate_plot(&summary).as_bytes(),
    )
    .map_err(|e| LieError::InvalidParameter(format!("writing rates.svg: {e}")))?;

    if args.write_run_traces {
        for run in &summary.runs {
            let name = format!(
                "run_{}_kappa{:.0}_seed{}.csv",
                run.scheme.as_str(),
                run.kappa,
                run.seed_index
            );
            let mut csv = String::from("k,c_emp\n");
            csv.push_str(&format!(
                "{},{}\n",
                run.iterations,
                run.c_emp.map(|c| c.to_string()).unwrap_or_default()
            ));
            write_atomic(&args.output_dir.join(name), csv.as_bytes())
                .map_err(|e| LieError::InvalidParameter(format!("writing run csv: {e}")))?;
        }
    }

    for fit in &summary.fits {
        println!(
            "{}: slope {:.4}, intercept {:.4}, {} points",
            fit.scheme.as_str(),
            fit.slope,
            fit.intercept,
            fit.points.len()
        );
    }
    println!(
        "lyapunov violations: {}, energy violations: {} (outputs in {})",
        summary.total_lyapunov_violations,
        summary.total_energy_violations,
        args.output_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn rate_plot(summary: &SweepSummary) -> String {
    let mut series = Vec::new();
    for (i, fit) in summary.fits.iter().enumerate() {
        let pts: Vec<(f64, f64)> = fit
            .points
            .iter()
            .map(|p| (p.kappa.log10(), (1.0 - p.c_emp_median).log10()))
            .collect();
        let fitted: Vec<(f64, f64)> = pts
            .iter()
            .map(|&(x, _)| (x, fit.slope * x + fit.intercept))
            .collect();
        series.push(Series {
            label: format!("{} measured", fit.scheme.as_str()),
            points: pts,
            color: palette_color(i),
            dashed: false,
        });
        series.push(Series {
            label: format!("{} fit slope {:.2}", fit.scheme.as_str(), fit.slope),
            points: fitted,
            color: palette_color(i),
            dashed: true,
        });
    }
    line_plot(
        "Empirical rate scaling",
        "log10 kappa",
        "log10 (1 - c)",
        &series,
    )
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, LieError> {
    let fault = match &args.inject_fault {
        Some(name) => Some(name.parse::<Fault>()?),
        None => None,
    };
    if let Some(only) = &args.only {
        let known = ["lie-core", "potentials", "optimizers", "diagnostics"];
        if !known.contains(&only.as_str()) {
            return Err(LieError::InvalidParameter(format!(
                "unknown group '{only}' (expected one of {})",
                known.join(", ")
            )));
        }
    }
    let results = run_battery(args.only.as_deref(), fault);
    let mut first_fail: Option<String> = None;
    for r in &results {
        println!(
            "[{}] {:12} {:42} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.group,
            r.name,
            r.detail
        );
        if !r.passed && first_fail.is_none() {
            first_fail = Some(format!("{} :: {}", r.group, r.name));
        }
    }
    match first_fail {
        None => {
            println!("all {} checks passed", results.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(name) => {
            eprintln!("invariant violated: {name}");
            Ok(ExitCode::from(3))
        }
    }
}

fn cmd_ode(args: OdeArgs) -> Result<ExitCode, LieError> {
    let spec = SpectrumSpec::new(args.n, args.kappa)?;
    let pot = BrockettPotential::from_spectrum(&spec, args.seed)?;
    let est = pot.local_smoothness()?;
    let gamma = args.gamma.unwrap_or(2.0 * est.mu.sqrt());
    let g_star = pot.known_minimizer().expect("known minimizer");
    let mut rng = derive_rng(args.seed, 0x0de);
    let g0 = g_star.compose(
        &rand_unit_algebra(args.n, &mut rng)
            .scale(args.init_radius)
            .exp(),
    );
    ensure_dir(&args.output_dir)?;

    let trace = integrate_ode(
        &pot,
        &g0,
        &AlgebraElement::zeros(args.n),
        gamma,
        args.dt,
        args.t_final,
        Some(&g_star),
        args.record_every,
    );
    let defect = energy_identity_defect(&trace, gamma);

    // e^{ct} L(t) should be nonincreasing at the continuous-time rate.
    let c = lie_momentum::diagnostics::ode_rate(est.mu);
    let mut rate_violations = 0u64;
    let mut prev: Option<f64> = None;
    for s in &trace.samples {
        if let Some(l) = s.lyapunov {
            let v = (c * s.t).exp() * l;
            if let Some(p) = prev {
                if v > p * (1.0 + 1e-6) {
                    rate_violations += 1;
                }
            }
            prev = Some(v);
        }
    }

    let mut csv = String::from("t,u,subopt,xi_norm,energy,lyapunov\n");
    for s in &trace.samples {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.t,
            s.u,
            s.subopt.map(|v| v.to_string()).unwrap_or_default(),
            s.xi_norm,
            s.energy,
            s.lyapunov.map(|v| v.to_string()).unwrap_or_default()
        ));
    }
    write_atomic(&args.output_dir.join("ode_trace.csv"), csv.as_bytes())
        .map_err(|e| LieError::InvalidParameter(format!("writing ode_trace.csv: {e}")))?;

    #[derive(Serialize)]
    struct OdeSummary {
        version: &'static str,
        n: usize,
        kappa: f64,
        seed: u64,
        gamma: f64,
        dt: f64,
        t_final: f64,
        init_radius: f64,
        l: f64,
        mu: f64,
        rate: f64,
        energy_identity_defect: f64,
        rate_violations: u64,
        samples: usize,
        a_constant: f64,
    }
    let summary = OdeSummary {
        version: VERSION,
        n: args.n,
        kappa: args.kappa,
        seed: args.seed,
        gamma,
        dt: args.dt,
        t_final: args.t_final,
        init_radius: args.init_radius,
        l: est.l,
        mu: est.mu,
        rate: c,
        energy_identity_defect: defect,
        rate_violations,
        samples: trace.samples.len(),
        a_constant: exact_max_ad_norm(args.n),
    };
    write_atomic(
        &args.output_dir.join("ode_summary.json"),
        serde_json::to_string_pretty(&summary)
            .expect("summary serializes")
            .as_bytes(),
    )
    .map_err(|e| LieError::InvalidParameter(format!("writing ode_summary.json: {e}")))?;

    println!(
        "ode: energy identity defect {:.3e}, e^(ct) L violations: {} over {} samples",
        defect,
        rate_violations,
        trace.samples.len()
    );
    Ok(ExitCode::SUCCESS)
}
