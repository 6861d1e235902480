mod config;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spinpair::analytics::{kappa_r431, omega_nut12_r431, optimal_t_table};
use spinpair::experiments::{
    sweep, synth_spectrum, trajectory, validate::VALIDATION_SEED, validate_report, Acquisition, LinRange,
    Scheme, SpectrumSource, SweepSpec, TrajectoryScheme,
};
use spinpair::propagate::{dq_excitation_amplitude, dqf_amplitude_with_error, evolve_with_error};
use spinpair::sequences::{cslic_warning, m_optimal, n_j_optimal};
use spinpair::spincore::total_spin;
use spinpair::{Axis, SpinSystem};

use config::{ConfigFile, Format, Section};
use figures::Figure;
use output::Sink;

#[derive(Parser, Debug)]
#[command(name = "spinpair", version, about = "Double-quantum excitation in coupled spin pairs")]
struct Cli {
    /// Configuration file with [system], [scheme], [sweep], [output] and [acquisition] sections
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: [output] directory, else the current directory)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output file format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Assert that the run uses no unseeded randomness
    #[arg(long, global = true)]
    seed_free: bool,
    /// Leave timestamps out of metadata and file names
    #[arg(long, global = true)]
    deterministic_metadata: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One DQ-filtered run of a scheme
    Simulate {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Parameter sweep
    Sweep {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Excitation trajectory with average-Hamiltonian overlays
    Trajectory {
        #[arg(long, value_enum)]
        scheme: TrajectoryKind,
        /// Final time (default 36 τ_J for pulsepol, 40 τ_J for slic_a)
        #[arg(long)]
        t_max: Option<String>,
        #[arg(long, default_value_t = 721)]
        count: usize,
    },
    /// Figure presets
    Figures {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Closed-form constants and optimum durations
    Analytic,
    /// Acceptance report; exits with status 2 if any check fails
    Validate,
    /// Event list of a scheme's excitation and reconversion blocks
    DumpSeq {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Idealized spectrum after pulse-acquire or a DQ filter
    Spectrum {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Use a plain 90° pulse instead of the scheme's DQ filter
        #[arg(long)]
        pulse_acquire: bool,
        #[arg(long)]
        dwell: Option<String>,
        #[arg(long)]
        npoints: Option<String>,
        #[arg(long)]
        lb_hz: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TrajectoryKind {
    Pulsepol,
    SlicA,
}

/// Scheme keyword parameters; each overrides the same key in [scheme].
#[derive(Args, Debug, Default)]
struct SchemeArgs {
    /// inadequate, geodq, geodq_train, pulsepol, slic_a, slic_b or cslic
    #[arg(long)]
    scheme: Option<String>,
    /// INADEQUATE delay on each side of the refocusing pulse
    #[arg(long)]
    tau1: Option<String>,
    /// PulsePol full cycles
    #[arg(long)]
    m: Option<String>,
    /// PulsePol half cycles
    #[arg(long)]
    half_cycles: Option<String>,
    /// SLIC(a) pulse length
    #[arg(long)]
    t: Option<String>,
    /// SLIC(b)/cSLIC length in units of 1/J
    #[arg(long)]
    n_j: Option<String>,
    /// cSLIC compensating-pulse amplitude
    #[arg(long)]
    omega_strong: Option<String>,
    #[arg(long)]
    tau1g: Option<String>,
    #[arg(long)]
    tau2g: Option<String>,
    /// GeoDQ echo blocks
    #[arg(long)]
    n: Option<String>,
    /// Relative rf amplitude error
    #[arg(long)]
    eps_rf: Option<String>,
}

impl SchemeArgs {
    fn section(&self, base: &Section) -> Section {
        config::merge(
            base.clone(),
            [
                ("name", self.scheme.clone()),
                ("tau1", self.tau1.clone()),
                ("m", self.m.clone()),
                ("half_cycles", self.half_cycles.clone()),
                ("t", self.t.clone()),
                ("n_j", self.n_j.clone()),
                ("omega_strong", self.omega_strong.clone()),
                ("tau1g", self.tau1g.clone()),
                ("tau2g", self.tau2g.clone()),
                ("n", self.n.clone()),
                ("eps_rf", self.eps_rf.clone()),
            ],
        )
    }
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// T, eps_rf, offset, alpha or theta_tau1
    #[arg(long)]
    swept: Option<String>,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    count: Option<String>,
    /// Comma-separated subset of a_dq_numeric, a_dq_analytic, a_dqf_numeric, a_dqf_analytic
    #[arg(long)]
    observables: Option<String>,
    #[arg(long)]
    tau1_start: Option<String>,
    #[arg(long)]
    tau1_stop: Option<String>,
    #[arg(long)]
    tau1_count: Option<String>,
}

struct Run {
    file: ConfigFile,
    sys: SpinSystem,
    sink: Sink,
}

#[derive(Serialize)]
struct Simulation {
    scheme: String,
    duration_s: f64,
    eps_rf: f64,
    a_dq_numeric: [f64; 2],
    a_dqf_numeric: f64,
    a_dq_analytic: Option<[f64; 2]>,
    a_dqf_analytic: Option<f64>,
}

fn simulate(ctx: &Run, args: &SchemeArgs) -> Result<()> {
    let sec = args.section(&ctx.file.scheme);
    let scheme = config::scheme(&sec, &ctx.sys)?;
    let eps = config::eps_rf(&sec)?;
    if let Scheme::Cslic { omega_strong, .. } = scheme {
        if let Some(w) = cslic_warning(&ctx.sys, omega_strong) {
            eprintln!("warning: {w}");
        }
    }
    let s = scheme.sequences(&ctx.sys)?;
    let rho = evolve_with_error(&total_spin(Axis::Z), &s.exc, &ctx.sys, eps)?;
    let a = dq_excitation_amplitude(&rho);
    let f = dqf_amplitude_with_error(&s.exc, &s.rec, &s.cycle, &ctx.sys, eps)?;
    let analytic = scheme.analytic(&ctx.sys, eps).ok();
    let sim = Simulation {
        scheme: scheme.name().into(),
        duration_s: scheme.duration(&ctx.sys),
        eps_rf: eps,
        a_dq_numeric: [a.re, a.im],
        a_dqf_numeric: f.magnitude,
        a_dq_analytic: analytic.map(|c| [c.re, c.im]),
        a_dqf_analytic: analytic.map(|c| c.norm_sqr()),
    };
    println!("scheme: {}", sim.scheme);
    println!("T: {:.6} ms", 1e3 * sim.duration_s);
    println!("eps_rf: {}", sim.eps_rf);
    println!("a_dq_numeric: {:.6} {:+.6}i", a.re, a.im);
    println!("a_dqf_numeric: {:.6}", sim.a_dqf_numeric);
    match analytic {
        Some(c) => {
            println!("a_dq_analytic: {:.6} {:+.6}i", c.re, c.im);
            println!("a_dqf_analytic: {:.6}", c.norm_sqr());
        }
        None => println!("a_dq_analytic: none for these parameters"),
    }
    if let Scheme::Pulsepol { half_cycles } = scheme {
        if half_cycles % 2 == 1 {
            println!("note: odd half-cycle count, DQ sign is inverted");
        }
    }
    if ctx.sink.format.json() {
        ctx.sink.named(&format!("simulate_{}", sim.scheme), "json", &serde_json::to_string_pretty(&sim)?)?;
    }
    Ok(())
}

fn run_sweep(ctx: &Run, sargs: &SchemeArgs, wargs: &SweepArgs) -> Result<()> {
    let sec = sargs.section(&ctx.file.scheme);
    let scheme = config::scheme(&sec, &ctx.sys)?;
    let wsec = config::merge(
        ctx.file.sweep.clone(),
        [
            ("swept", wargs.swept.clone()),
            ("start", wargs.start.clone()),
            ("stop", wargs.stop.clone()),
            ("count", wargs.count.clone()),
            ("observables", wargs.observables.clone()),
            ("tau1_start", wargs.tau1_start.clone()),
            ("tau1_stop", wargs.tau1_stop.clone()),
            ("tau1_count", wargs.tau1_count.clone()),
        ],
    );
    let (swept, range, observables) = config::sweep_axes(&wsec)?;
    let mut spec = SweepSpec::new(scheme, swept, range);
    if let Some(obs) = observables {
        spec = spec.with_observables(&obs);
    }
    spec.eps_rf = config::eps_rf(&sec)?;
    ctx.sink.table("", sweep(&spec, &ctx.sys)?)?;
    Ok(())
}

fn run_trajectory(ctx: &Run, kind: TrajectoryKind, t_max: Option<&str>, count: usize) -> Result<()> {
    let (scheme, default_cycles) = match kind {
        TrajectoryKind::Pulsepol => (TrajectoryScheme::Pulsepol, 36.0),
        TrajectoryKind::SlicA => (TrajectoryScheme::SlicA, 40.0),
    };
    let t_max = match t_max {
        Some(s) => config::duration(s)?,
        None => default_cycles * ctx.sys.tau_j(),
    };
    let grid = LinRange::new(0.0, t_max, count)?.values();
    ctx.sink.table("", trajectory(scheme, &ctx.sys, &grid)?)?;
    Ok(())
}

#[derive(Serialize)]
struct AnalyticTable {
    j_hz: f64,
    delta_hz: f64,
    theta_st_deg: f64,
    kappa_r431: f64,
    omega_nut12_r431_hz: f64,
    m_optimal: usize,
    n_j_optimal: usize,
    t_opt_inadequate_ms: f64,
    t_opt_geodq_ms: f64,
    t_opt_pulsepol_ms: f64,
    t_opt_slic_ms: f64,
}

fn analytic(ctx: &Run) -> Result<()> {
    let sys = &ctx.sys;
    let t = optimal_t_table(sys)?;
    let table = AnalyticTable {
        j_hz: sys.j_hz,
        delta_hz: sys.delta_hz,
        theta_st_deg: sys.theta_st()?.to_degrees(),
        kappa_r431: kappa_r431(),
        omega_nut12_r431_hz: omega_nut12_r431(sys) / (2.0 * std::f64::consts::PI),
        m_optimal: m_optimal(sys)?,
        n_j_optimal: n_j_optimal(sys)?,
        t_opt_inadequate_ms: 1e3 * t.inadequate,
        t_opt_geodq_ms: 1e3 * t.geodq,
        t_opt_pulsepol_ms: 1e3 * t.pulsepol,
        t_opt_slic_ms: 1e3 * t.slic,
    };
    let json = serde_json::to_string_pretty(&table)?;
    if let serde_json::Value::Object(map) = serde_json::to_value(&table)? {
        for (k, v) in map {
            println!("{k}: {v}");
        }
    }
    if ctx.sink.format.json() {
        ctx.sink.named("analytic", "json", &json)?;
    }
    Ok(())
}

fn validate(ctx: &Run, out_given: bool) -> Result<bool> {
    let report = validate_report(&ctx.sys);
    print!("{}", report.to_text());
    if out_given {
        ctx.sink.named("validate", "txt", &report.to_text())?;
        ctx.sink.named("validate", "json", &report.to_json())?;
    }
    Ok(report.all_pass())
}

fn dump_seq(ctx: &Run, args: &SchemeArgs) -> Result<()> {
    let scheme = config::scheme(&args.section(&ctx.file.scheme), &ctx.sys)?;
    let s = scheme.sequences(&ctx.sys)?;
    println!("# {} excitation", scheme.name());
    print!("{}", s.exc.to_text());
    println!("# {} reconversion", scheme.name());
    print!("{}", s.rec.to_text());
    Ok(())
}

fn run_spectrum(ctx: &Run, args: &SchemeArgs, pulse_acquire: bool, acq_args: [Option<&String>; 3]) -> Result<()> {
    let a = config::merge(
        ctx.file.acquisition.clone(),
        [("dwell", acq_args[0].cloned()), ("npoints", acq_args[1].cloned()), ("lb_hz", acq_args[2].cloned())],
    );
    let def = Acquisition::default();
    let acq = Acquisition {
        dwell: a.get("dwell").map(|s| config::duration(s)).transpose()?.unwrap_or(def.dwell),
        npoints: a.get("npoints").map(|s| config::count(s)).transpose()?.unwrap_or(def.npoints),
        lb_hz: a.get("lb_hz").map(|s| config::frequency(s)).transpose()?.unwrap_or(def.lb_hz),
    };
    if !(acq.dwell > 0.0) || acq.npoints < 2 {
        bail!("acquisition needs dwell > 0 and npoints >= 2");
    }
    let source = if pulse_acquire {
        SpectrumSource::PulseAcquire
    } else {
        SpectrumSource::Dqf(config::scheme(&args.section(&ctx.file.scheme), &ctx.sys)?)
    };
    let spec = synth_spectrum(&source, &ctx.sys, &acq)?;
    ctx.sink.named(&format!("spectrum_{}", spec.label), "csv", &spec.to_csv_string()?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let sys = config::spin_system(&file.system).context("in [system]")?;
    let format = config::format(&file.output, cli.format)?;
    let dir = config::output_dir(&file.output, cli.out.as_ref());
    let out_given = cli.out.is_some() || file.output.contains_key("directory");
    let ctx = Run { sink: Sink::new(dir, format, cli.deterministic_metadata), file, sys };
    if cli.seed_free {
        // the only random numbers are the validation sequences, drawn from a fixed seed
        eprintln!("seed-free: no unseeded randomness; validation sequences use seed {VALIDATION_SEED:#x}");
    }
    match &cli.command {
        Command::Simulate { scheme } => simulate(&ctx, scheme)?,
        Command::Sweep { scheme, sweep } => run_sweep(&ctx, scheme, sweep)?,
        Command::Trajectory { scheme, t_max, count } => run_trajectory(&ctx, *scheme, t_max.as_deref(), *count)?,
        Command::Figures { figure } => figures::run(*figure, &ctx.sys, &ctx.sink)?,
        Command::Analytic => analytic(&ctx)?,
        Command::Validate => {
            if !validate(&ctx, out_given)? {
                return Ok(ExitCode::from(2));
            }
        }
        Command::DumpSeq { scheme } => dump_seq(&ctx, scheme)?,
        Command::Spectrum { scheme, pulse_acquire, dwell, npoints, lb_hz } => {
            run_spectrum(&ctx, scheme, *pulse_acquire, [dwell.as_ref(), npoints.as_ref(), lb_hz.as_ref()])?
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
