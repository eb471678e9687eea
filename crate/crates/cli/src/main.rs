use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zakharov_core::harness::{
    audit, collision_comparison, convergence_study, emit, emit_sweep, run_experiment, ExperimentConfig, Format,
    Horizon, RunReport,
};
use zakharov_core::schemes::SchemeKind;
use zakharov_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "zakharov", version, about = "Conservative finite-difference solvers for the Zakharov equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment to its horizon.
    Run(Common),
    /// Halve dt and dx together and report observed orders.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Number of halvings after the base run.
        #[arg(long, default_value_t = 2)]
        halvings: usize,
    },
    /// Two-soliton collision measured against a finer reference run.
    Collision {
        #[command(flatten)]
        common: Common,
        /// Reference time step; defaults to dt / 4.
        #[arg(long, allow_negative_numbers = true)]
        ref_dt: Option<f64>,
        /// Reference scheme.
        #[arg(long, default_value = "gn")]
        ref_scheme: SchemeKind,
    },
    /// Run a config and check the invariants its scheme promises.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<SchemeKind>,
    /// Soliton amplitude.
    #[arg(long, allow_negative_numbers = true)]
    emax: Option<f64>,
    /// Base period.
    #[arg(long = "L", allow_negative_numbers = true)]
    l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// Spatial step; dt when omitted.
    #[arg(long, allow_negative_numbers = true)]
    dx: Option<f64>,
    /// tl, t1, <k>tl or an explicit time.
    #[arg(long)]
    horizon: Option<Horizon>,
    /// Two counter-propagating solitons on an eight-period domain.
    #[arg(long)]
    collision: bool,
    /// Collision initial data: 0 smooth potential, 1 piecewise potential.
    #[arg(long)]
    variant: Option<u8>,
    #[arg(long, allow_negative_numbers = true)]
    newton_eps: Option<f64>,
    #[arg(long)]
    newton_max_iter: Option<usize>,
    /// Directory for summary and series files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::new(SchemeKind::Gn, 1.0, 0.1),
        };
        if let Some(s) = self.scheme {
            cfg.scheme = s;
        }
        if let Some(x) = self.emax {
            cfg.e_max = x;
        }
        if let Some(x) = self.l {
            cfg.l = x;
        }
        if let Some(x) = self.dt {
            cfg.dt = x;
        }
        if self.dx.is_some() {
            cfg.dx = self.dx;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if self.collision || self.variant.is_some() {
            cfg.collision = true;
        }
        if let Some(v) = self.variant {
            cfg.collision_variant = v;
        }
        if let Some(x) = self.newton_eps {
            cfg.newton_eps = x;
        }
        if let Some(x) = self.newton_max_iter {
            cfg.newton_max_iter = x;
        }
        cfg.resolve()?;
        Ok(cfg)
    }

    fn write(&self, report: &RunReport, stem: &str) -> Result<(), Error> {
        if let Some(dir) = &self.out {
            print_paths(&emit(report, self.format, dir, stem)?);
        }
        Ok(())
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn stem(cfg: &ExperimentConfig) -> String {
    let kind = if cfg.collision { "collision" } else { "single" };
    format!("{kind}_{}_emax{}_dt{}", cfg.scheme.label().to_ascii_lowercase(), cfg.e_max, cfg.dt)
}

fn summary_line(r: &RunReport) -> String {
    format!(
        "{:<4} dt={:<8} steps={:<6} E0={:.6} dE={:.3e} epsE={:.3e} epsN={:.3e} time={:.3}s",
        r.config.scheme.label(),
        r.config.dt,
        r.steps,
        r.e0_energy,
        r.d_energy,
        r.eps_e,
        r.eps_n,
        r.wall_time
    )
}

fn report_status(r: &RunReport) -> u8 {
    if let Some(jump) = r.seam_jump {
        println!("seam jump |E| = {jump:.3e}");
    }
    if let Some(f) = &r.failure {
        eprintln!("diverged: {f}");
        return EXIT_DIVERGED;
    }
    0
}

fn run(common: &Common) -> Result<u8, Error> {
    let cfg = common.config()?;
    let r = run_experiment(&cfg)?;
    println!("{}", summary_line(&r));
    common.write(&r, &stem(&cfg))?;
    Ok(report_status(&r))
}

fn sweep(common: &Common, halvings: usize) -> Result<u8, Error> {
    let cfg = common.config()?;
    let table = convergence_study(&cfg, halvings)?;
    println!("{:>10} {:>10} {:>12} {:>7} {:>12} {:>7} {:>11}", "dt", "dx", "epsE", "order", "epsN", "order", "dE");
    let fmt_order = |o: Option<f64>| o.map_or("-".to_string(), |o| format!("{o:.3}"));
    for row in &table.rows {
        println!(
            "{:>10} {:>10} {:>12.4e} {:>7} {:>12.4e} {:>7} {:>11.3e}",
            row.dt,
            row.dx,
            row.eps_e,
            fmt_order(row.order_e),
            row.eps_n,
            fmt_order(row.order_n),
            row.d_energy
        );
    }
    if let Some(dir) = &common.out {
        print_paths(&emit_sweep(&table.reports, common.format, dir, &format!("sweep_{}", stem(&cfg)))?);
    }
    Ok(table.reports.iter().map(report_status).max().unwrap_or(0))
}

fn collision(common: &Common, ref_dt: Option<f64>, ref_scheme: SchemeKind) -> Result<u8, Error> {
    let mut cfg = common.config()?;
    cfg.collision = true;
    let mut reference = cfg;
    reference.scheme = ref_scheme;
    reference.dt = ref_dt.unwrap_or(cfg.dt / 4.0);
    reference.dx = Some(cfg.dx() * reference.dt / cfg.dt);
    let c = collision_comparison(&cfg, &reference)?;
    println!("{}", summary_line(&c.report));
    println!(
        "reference {} dt={}: epsE~={:.4e} epsN~={:.4e}",
        ref_scheme.label(),
        reference.dt,
        c.eps_e,
        c.eps_n
    );
    common.write(&c.report, &stem(&cfg))?;
    Ok(report_status(&c.report))
}

fn validate(common: &Common) -> Result<u8, Error> {
    let cfg = common.config()?;
    let a = audit(&cfg)?;
    for c in &a.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(t) = &a.stepsize {
        println!(
            "step-size advisory (p = {}, r = {:.3}): eps1 = {:.3e}, eps2 = {:.3e}, satisfied = {}",
            t.p, t.r, t.eps1, t.eps2, t.satisfied
        );
    }
    common.write(&a.report, &stem(&cfg))?;
    if a.report.diverged() {
        return Ok(EXIT_DIVERGED);
    }
    Ok(if a.passed() { 0 } else { EXIT_FAILURE })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InfeasibleVelocity(_)
        | Error::InfeasibleAmplitude { .. }
        | Error::InvalidGrid(_)
        | Error::Domain(_) => EXIT_CONFIG,
        Error::Divergence { .. } | Error::Singular { .. } => EXIT_DIVERGED,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(c) => run(c),
        Command::Sweep { common, halvings } => sweep(common, *halvings),
        Command::Collision { common, ref_dt, ref_scheme } => collision(common, *ref_dt, *ref_scheme),
        Command::Validate(c) => validate(c),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
