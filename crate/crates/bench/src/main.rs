use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use npqn_bench::{emit_outputs, run_experiment, ExperimentConfig};

/// Runs a seeded multi-trial optimization campaign and writes traces and a
/// summary. Flags override values from `--config`.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Cli {
    /// Flat `key = value` file; keys match the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// poisson | cp-synthetic | tucker-synthetic | tensor-file
    #[arg(long)]
    problem: Option<String>,
    /// als | hooi | cg | pcg | richardson | ncg | lbfgs | lbroyden
    #[arg(long)]
    method: Option<String>,
    /// none | lp | tp
    #[arg(long)]
    precond: Option<String>,
    /// f | fb
    #[arg(long)]
    sweep: Option<String>,
    /// Quasi-Newton window size.
    #[arg(long)]
    m: Option<String>,
    /// wolfe | modbt | exact-quadratic
    #[arg(long)]
    linesearch: Option<String>,
    /// pr | hs | hz, optionally suffixed -tilde or -hat
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    restart: Option<String>,
    /// damp | skip | off
    #[arg(long)]
    guard: Option<String>,
    /// one | match
    #[arg(long)]
    eta: Option<String>,
    /// parallel | projection
    #[arg(long)]
    transport: Option<String>,
    #[arg(long)]
    window_transport: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    max_fevals: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    intervals: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    extent: Option<String>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    rank: Option<String>,
    #[arg(long)]
    collinearity: Option<String>,
    #[arg(long)]
    l1: Option<String>,
    #[arg(long)]
    l2: Option<String>,
    /// Comma-separated, e.g. 60,60,60
    #[arg(long)]
    extents: Option<String>,
    #[arg(long)]
    true_ranks: Option<String>,
    #[arg(long)]
    ranks: Option<String>,
    #[arg(long)]
    path: Option<String>,
    /// dtns | csv | idx
    #[arg(long)]
    format: Option<String>,
    /// cp | tucker
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    uniform_noise: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("problem", &self.problem),
            ("method", &self.method),
            ("precond", &self.precond),
            ("sweep", &self.sweep),
            ("m", &self.m),
            ("linesearch", &self.linesearch),
            ("beta", &self.beta),
            ("restart", &self.restart),
            ("guard", &self.guard),
            ("eta", &self.eta),
            ("transport", &self.transport),
            ("window-transport", &self.window_transport),
            ("max-iters", &self.max_iters),
            ("max-fevals", &self.max_fevals),
            ("tol", &self.tol),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out-dir", &self.out_dir),
            ("label", &self.label),
            ("intervals", &self.intervals),
            ("omega", &self.omega),
            ("extent", &self.extent),
            ("order", &self.order),
            ("rank", &self.rank),
            ("collinearity", &self.collinearity),
            ("l1", &self.l1),
            ("l2", &self.l2),
            ("extents", &self.extents),
            ("true-ranks", &self.true_ranks),
            ("ranks", &self.ranks),
            ("path", &self.path),
            ("format", &self.format),
            ("model", &self.model),
            ("uniform-noise", &self.uniform_noise),
        ];
        all.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, npqn_bench::ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    for (k, v) in cli.overrides() {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bench: {e}");
            return ExitCode::from(1);
        }
    };
    let campaign = match run_experiment(&cfg) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bench: {e}");
            return ExitCode::from(1);
        }
    };
    let dir = match emit_outputs(&campaign) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("bench: {e}");
            return ExitCode::from(1);
        }
    };
    let s = &campaign.summary;
    for t in &campaign.trials {
        println!("trial {:>3}  {:<24} iters {:>5}  f {:.6e}  gnorm {:.3e}", t.trial, t.status, t.iterations, t.final_f, t.final_gnorm_scaled);
    }
    println!(
        "{}: {}/{} converged, mean iterations {:.1}{}  -> {}",
        cfg.run_label(),
        s.converged,
        s.trials,
        s.mean_iterations,
        if s.all_converged { "" } else { " *" },
        dir.display()
    );
    if s.all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
