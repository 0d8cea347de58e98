use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{ConfigError, Panel, RunConfig, SweepMetric};

#[derive(Parser, Debug)]
#[command(name = "qforge", version, about = "Spectra, coherence and gate infidelity of inductively shunted qubits")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; command-line flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for CSV and JSON outputs
    #[arg(long, global = true, value_name = "DIR", default_value = "qforge-out")]
    out: PathBuf,
    /// Worker threads for parallel sweeps
    #[arg(long, global = true, env = "QFORGE_THREADS", value_name = "N")]
    threads: Option<usize>,
    /// Withhold infidelities whose gate outlasts the dephasing envelope's domain
    #[arg(long, global = true)]
    strict_envelope: bool,
    /// Print the JSON summary on stdout
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Numerical and variational spectrum of one circuit
    Spectrum {
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Grid sweep over the design plane, or a T1 recipe
    Sweep(SweepArgs),
    /// Unimon, transmon and fluxonium comparison tables
    Compare(CompareArgs),
    /// Relaxation and dephasing of one circuit
    Coherence {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Average gate infidelity of one circuit at its sweet spot
    Fidelity {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Run the acceptance checks
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Default)]
struct CircuitArgs {
    /// Josephson energy E_J/h, GHz
    #[arg(long, allow_hyphen_values = true)]
    ej: Option<f64>,
    /// Inductive energy E_L/h, GHz
    #[arg(long, allow_hyphen_values = true)]
    el: Option<f64>,
    /// Charging energy E_C/h, GHz
    #[arg(long, allow_hyphen_values = true)]
    ec: Option<f64>,
    /// Bias phase, rad (pi is the sweet spot)
    #[arg(long, allow_hyphen_values = true)]
    phi_diff: Option<f64>,
    /// Number of levels to compute
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct NoiseArgs {
    /// 1/f flux-noise amplitude at 1 Hz, flux quanta
    #[arg(long, allow_hyphen_values = true)]
    a_phi: Option<f64>,
    /// Dielectric quality factor
    #[arg(long, allow_hyphen_values = true)]
    q_diel: Option<f64>,
    /// Bath temperature, K
    #[arg(long, allow_hyphen_values = true)]
    temperature: Option<f64>,
    /// Infrared cutoff of the flux noise, rad/s
    #[arg(long, allow_hyphen_values = true)]
    omega_ir: Option<f64>,
    /// Gate duration in units of 2 pi/|alpha|
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    metric: Option<SweepMetric>,
    /// Target qubit frequency, GHz
    #[arg(long, allow_hyphen_values = true)]
    f01: Option<f64>,
    #[arg(long)]
    n_ratio: Option<usize>,
    #[arg(long)]
    n_z: Option<usize>,
    /// Fixed E_J/E_L for the T1 recipes
    #[arg(long, allow_hyphen_values = true)]
    ratio: Option<f64>,
    /// Fixed impedance for the T1 recipes, ohm
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    #[arg(long)]
    n_f01: Option<usize>,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, value_enum)]
    panel: Option<Panel>,
    /// Restrict to one built-in qubit (repeatable)
    #[arg(long = "qubit")]
    qubits: Vec<String>,
    /// Offset charge of the transmon
    #[arg(long, allow_hyphen_values = true)]
    ng: Option<f64>,
    #[arg(long)]
    flux_points: Option<usize>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Comma-separated criterion numbers (default: all)
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
    /// Points per axis of the infidelity sweep
    #[arg(long, default_value_t = 41)]
    sweep_points: usize,
    /// Resistance quantum for the impedance check (sensitivity testing)
    #[arg(long, hide = true)]
    r_k: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl CircuitArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let c = &mut cfg.circuit;
        set(&mut c.e_j, self.ej);
        set(&mut c.e_l, self.el);
        set(&mut c.e_c, self.ec);
        set(&mut c.phi_diff, self.phi_diff);
        set(&mut c.levels, self.levels);
    }
}

impl NoiseArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let n = &mut cfg.noise;
        set(&mut n.a_phi, self.a_phi);
        set(&mut n.q_diel, self.q_diel);
        set(&mut n.temperature, self.temperature);
        set(&mut n.omega_ir, self.omega_ir);
        set(&mut n.nu, self.nu);
    }
}

fn resolve(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.threads, common.threads.map(Some));
    cfg.strict_envelope |= common.strict_envelope;
    cfg.check_schema()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = resolve(&cli.common)?;
    let out = commands::Output::new(cli.common.out.clone(), cli.common.json);
    let job = match cli.command {
        Command::Spectrum { circuit } => {
            circuit.apply(&mut cfg);
            commands::Job::Spectrum
        }
        Command::Sweep(a) => {
            let s = &mut cfg.sweep;
            set(&mut s.metric, a.metric);
            set(&mut s.f01, a.f01);
            set(&mut s.n_ratio, a.n_ratio);
            set(&mut s.n_z, a.n_z);
            set(&mut s.ratio, a.ratio);
            set(&mut s.z, a.z);
            set(&mut s.n_f01, a.n_f01);
            a.noise.apply(&mut cfg);
            commands::Job::Sweep
        }
        Command::Compare(a) => {
            let c = &mut cfg.compare;
            set(&mut c.panel, a.panel);
            if !a.qubits.is_empty() {
                c.qubits = a.qubits;
            }
            if a.ng.is_some() {
                c.n_g = a.ng;
            }
            set(&mut c.flux_points, a.flux_points);
            commands::Job::Compare
        }
        Command::Coherence { circuit, noise } => {
            circuit.apply(&mut cfg);
            noise.apply(&mut cfg);
            commands::Job::Coherence
        }
        Command::Fidelity { circuit, noise } => {
            circuit.apply(&mut cfg);
            noise.apply(&mut cfg);
            commands::Job::Fidelity
        }
        Command::Validate(a) => commands::Job::Validate {
            only: a.only,
            sweep_points: a.sweep_points,
            r_k: a.r_k,
        },
    };
    let threads = cfg.threads;
    qforge::exec::with_threads(threads, move || commands::execute(job, &cfg, &out))?
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<qforge::Error>() {
        Some(e) if e.is_validation() => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
