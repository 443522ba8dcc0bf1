mod artifacts;
mod commands;

use artifacts::{cache_dir, cache_load, cache_store, sha256_hex, write_all, Artifacts, Manifest, CACHE_ENV};
use clap::{Parser, Subcommand};
use holeprob::config::RunConfig;
use holeprob::io::SCHEMA_VERSION;
use holeprob::ratelab::geometric_ladder;
use holeprob::Error;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "holeprob", version, about = "Equilibrium measures, Fekete points and hole probabilities of random zeros")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(short = 'c', long, global = true)]
    config: Option<PathBuf>,
    /// Path of the JSON report; companion files go next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Trials per degree; accepts forms like 1e7.
    #[arg(long, global = true, value_parser = parse_count)]
    trials: Option<u64>,
    /// Run degrees 1..=nmax.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Geometric ladder a:b:k.
    #[arg(long, global = true, value_parser = parse_radii)]
    radii: Option<Ladder>,
    /// Section degree (sample) or single-degree override.
    #[arg(short = 'n', long, global = true)]
    n: Option<usize>,
    /// Number of Fekete points.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Recompute even if a cached result exists.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Solve for the equilibrium measure of the hole.
    Equilibrium,
    /// Weighted Fekete points in the field of the equilibrium measure.
    Fekete,
    /// Sample random sections and dump their zeros.
    Sample,
    /// Monte-Carlo hole probabilities for the configured degrees.
    Holeprob,
    /// Decay rates against min I_D.
    Ratecheck,
    /// min I_r over a ladder of radii.
    Rsweep,
    /// Frostman certificate, support classification and regularity audit.
    Audit,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Fekete => "fekete",
            Command::Sample => "sample",
            Command::Holeprob => "holeprob",
            Command::Ratecheck => "ratecheck",
            Command::Rsweep => "rsweep",
            Command::Audit => "audit",
        }
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x < 1.0 || x.fract() != 0.0 || x > 9.0e15 {
        return Err(format!("'{s}' is not a positive integer"));
    }
    Ok(x as u64)
}

#[derive(Debug, Clone)]
struct Ladder(Vec<f64>);

fn parse_radii(s: &str) -> Result<Ladder, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected a:b:k".into());
    }
    let a: f64 = parts[0].parse().map_err(|_| "bad a".to_string())?;
    let b: f64 = parts[1].parse().map_err(|_| "bad b".to_string())?;
    let k: usize = parts[2].parse().map_err(|_| "bad k".to_string())?;
    geometric_ladder(a, b, k).map(Ladder).map_err(|e| e.to_string())
}

fn config_failure(path: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": "config", "path": path, "message": message }));
    ExitCode::from(2)
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config { path: "".into(), message: "--config is required".into() })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config { path: "".into(), message: format!("{}: {e}", path.display()) })?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(s) = cli.seed {
        cfg.ensemble.seed = s;
        cfg.fekete.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.solver.tol = t;
    }
    if let Some(t) = cli.trials {
        cfg.ensemble.trials = t;
    }
    if let Some(nmax) = cli.nmax {
        cfg.ensemble.n = (1..=nmax).collect();
    }
    if let Some(n) = cli.n {
        cfg.ensemble.n = vec![n];
    }
    if let Some(m) = cli.m {
        cfg.fekete.m = m;
    }
    if let Some(r) = &cli.radii {
        cfg.sweep.radii = r.0.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn now_unix() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let cfg = load_config(cli)?;
    let cmd = cli.command;
    let out = cli.out.clone().unwrap_or_else(|| Path::new(&cfg.output.directory).join(format!("{}.json", cmd.name())));
    let dir = out.parent().map(Path::to_path_buf).filter(|p| !p.as_os_str().is_empty()).unwrap_or_else(|| PathBuf::from("."));
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or(cmd.name()).to_string();
    let resolved = serde_json::to_value(&cfg)?;
    let key = sha256_hex(
        serde_json::to_string(&json!({
            "subcommand": cmd.name(),
            "stem": stem,
            "config": resolved,
            "version": env!("CARGO_PKG_VERSION"),
        }))?
        .as_bytes(),
    );
    let cdir = cache_dir(&dir);
    let cached = if cli.no_cache { None } else { cache_load(&cdir, &key) };
    let cache_hit = cached.is_some();
    let arts: Artifacts = match cached {
        Some(a) => a,
        None => {
            let a = match cmd {
                Command::Equilibrium => commands::equilibrium(&cfg, &stem)?,
                Command::Fekete => commands::fekete(&cfg, &stem)?,
                Command::Sample => commands::sample(&cfg, &stem)?,
                Command::Holeprob => commands::holeprob(&cfg, &stem)?,
                Command::Ratecheck => commands::ratecheck(&cfg, &stem)?,
                Command::Rsweep => commands::rsweep(&cfg, &stem)?,
                Command::Audit => commands::audit(&cfg, &stem)?,
            };
            if let Err(e) = cache_store(&cdir, &key, &a) {
                log::warn!("cache not written ({}): {e}; set {CACHE_ENV} to relocate it", cdir.display());
            }
            a
        }
    };
    // the report keeps the name given by --out
    let mut arts = arts;
    if let Some(first) = arts.files.first_mut() {
        first.0 = out.file_name().and_then(|s| s.to_str()).unwrap_or("report.json").to_string();
    }
    let files = write_all(&dir, &arts)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cmd.name().into(),
        cache_key: key,
        cache_hit,
        timestamp_unix: now_unix(),
        status: arts.status,
        config: resolved,
        files,
    };
    let mut mbytes = serde_json::to_vec_pretty(&manifest)?;
    mbytes.push(b'\n');
    std::fs::write(dir.join(format!("{stem}.manifest.json")), mbytes)?;
    Ok(ExitCode::from(arts.status.exit_code() as u8))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("cannot set thread count: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(Error::Config { path, message }) => config_failure(&path, &message),
        Err(e) => {
            eprintln!("{}", json!({ "error": "runtime", "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
