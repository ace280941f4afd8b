use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bella::cli::{self, RunManifest, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "bella",
    version,
    about = "Bregman forward-backward envelope linesearch solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one manifest and write its trace.
    Run(RunArgs),
    /// Solve several manifests on one problem and print a summary.
    Compare(CompareArgs),
}

#[derive(Args, Default, Clone)]
struct ManifestFlags {
    /// Config file of `key = value` lines; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated coordinates or "random".
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// euclidean, quartic:a:b, shannon or burg.
    #[arg(long)]
    kernel: Option<String>,
    /// bfbs, zero, broyden or lbfgs:m.
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Backtracking cap; "unbounded" for none.
    #[arg(long)]
    imax: Option<String>,
    #[arg(long = "max-iters")]
    max_iters: Option<String>,
    #[arg(long)]
    adaptive: bool,
    #[arg(long = "initial-L")]
    initial_l: Option<String>,
    #[arg(long = "trace-out")]
    trace_out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Lipschitz modulus of the kernel gradient on the iterate region.
    #[arg(long = "region-lh")]
    region_lh: Option<String>,
    /// Strong convexity modulus of the kernel on the iterate region.
    #[arg(long = "region-sigma-h")]
    region_sigma_h: Option<String>,
}

impl ManifestFlags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        };
        push("problem", &self.problem);
        push("n", &self.n);
        push("seed", &self.seed);
        push("x0", &self.x0);
        push("kernel", &self.kernel);
        push("direction", &self.direction);
        push("gamma", &self.gamma);
        push("sigma", &self.sigma);
        push("eps", &self.eps);
        push("imax", &self.imax);
        push("max-iters", &self.max_iters);
        push("initial-L", &self.initial_l);
        push("trace-out", &self.trace_out);
        push("format", &self.format);
        push("region-lh", &self.region_lh);
        push("region-sigma-h", &self.region_sigma_h);
        if self.adaptive {
            out.push(("adaptive", "true".into()));
        }
        out
    }

    fn apply(&self, mut m: RunManifest) -> bella::Result<RunManifest> {
        for (k, v) in self.pairs() {
            m.set(k, &v)?;
        }
        Ok(m)
    }

    fn manifest(&self) -> bella::Result<RunManifest> {
        let base = match &self.config {
            Some(p) => RunManifest::load(p)?,
            None => RunManifest::default(),
        };
        self.apply(base)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: ManifestFlags,
}

#[derive(Args)]
struct CompareArgs {
    /// Manifest config files; shared flags override each of them.
    manifests: Vec<PathBuf>,
    /// Extra runs built from the shared flags, one per direction spec.
    #[arg(long, value_delimiter = ',')]
    directions: Vec<String>,
    #[command(flatten)]
    flags: ManifestFlags,
}

fn run(args: RunArgs) -> bella::Result<i32> {
    let manifest = args.flags.manifest()?;
    let (outcome, path) = cli::run(&manifest)?;
    let r = &outcome.result;
    println!(
        "{} after {} iterations, {} prox calls; trace: {}",
        r.status,
        r.iterations.len().saturating_sub(1),
        r.total_prox_calls,
        path.display()
    );
    if let Some(msg) = &r.message {
        eprintln!("{msg}");
    }
    Ok(outcome.exit_code())
}

fn compare(args: CompareArgs) -> bella::Result<i32> {
    let mut manifests = Vec::new();
    for p in &args.manifests {
        manifests.push(args.flags.apply(RunManifest::load(p)?)?);
    }
    if !args.directions.is_empty() {
        let base = args.flags.manifest()?;
        for d in &args.directions {
            manifests.push(RunManifest {
                direction: d.clone(),
                trace_out: None,
                ..base.clone()
            });
        }
    }
    let summary = cli::compare(&manifests)?;
    print!("{}", summary.render());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap's own usage-error code is 2, which is reserved for MaxIters here.
    let parsed = match Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match parsed.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
