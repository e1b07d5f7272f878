use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcldpc::bundle::CodeBundle;
use qcldpc::f2::BitVec;
use qcldpc::harness::{
    build_code, params_report, run_sweep_on, write_outputs, BuiltCode, DecoderChoice, ExperimentConfig, FactorKind,
    SEED_ENV,
};
use qcldpc::product::{CssSide, ProductKind, Status};
use qcldpc::{Error, Result};

#[derive(Parser)]
#[command(name = "qcldpc", version, about = "Quasi-cyclic product codes and their decoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a code and write its bundle.
    Build {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output path; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Print budgets, radii, measured λ, and the oracle distance when feasible.
    Params {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Load the code from a bundle instead of building it.
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
    /// Decode one syndrome (a 0/1 string or a JSON list of indices).
    Decode {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "z")]
        side: SideArg,
        /// Syndrome file; `-` reads stdin.
        #[arg(long, default_value = "-")]
        syndrome: PathBuf,
    },
    /// Run the full sweep and write report files. Exits 2 if any gate fails.
    Bench {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Z,
    X,
}

impl From<SideArg> for CssSide {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Z => CssSide::Z,
            SideArg::X => CssSide::X,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hgp,
    Lp,
}

#[derive(Clone, Copy, ValueEnum)]
enum FactorArg {
    Tanner,
    Repetition,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Deterministic,
    Randomized,
    Weak,
    Amplified,
}

/// Every config key as an optional override. Precedence: defaults, config
/// file, environment seed, flags.
#[derive(Args)]
struct ConfigArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    factor: Option<FactorArg>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    lift: Option<usize>,
    #[arg(long)]
    v0: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    gamma_inner: Option<usize>,
    #[arg(long)]
    d_min: Option<usize>,
    #[arg(long)]
    lambda_target: Option<f64>,
    #[arg(long)]
    lift_retries: Option<usize>,
    #[arg(long)]
    inner_max_tries: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    failure_delta: Option<f64>,
    #[arg(long, value_enum)]
    decoder: Option<DecoderArg>,
    #[arg(long, value_delimiter = ',')]
    error_weights: Option<Vec<usize>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    sides: Option<Vec<SideArg>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long)]
    gate_coset: Option<bool>,
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl ConfigArgs {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        c.apply_env()?;
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Hgp => ProductKind::Hgp,
                ModeArg::Lp => ProductKind::Lp,
            };
        }
        if let Some(f) = self.factor {
            c.factor = match f {
                FactorArg::Tanner => FactorKind::Tanner,
                FactorArg::Repetition => FactorKind::Repetition,
            };
        }
        if let Some(d) = self.decoder {
            c.decoder = Some(match d {
                DecoderArg::Deterministic => DecoderChoice::Deterministic,
                DecoderArg::Randomized => DecoderChoice::Randomized,
                DecoderArg::Weak => DecoderChoice::Weak,
                DecoderArg::Amplified => DecoderChoice::Amplified,
            });
        }
        if let Some(s) = self.sides {
            c.sides = s.into_iter().map(CssSide::from).collect();
        }
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = self.$field { c.$field = v; })*};
        }
        macro_rules! set_some {
            ($($field:ident),*) => {$(if let Some(v) = self.$field { c.$field = Some(v); })*};
        }
        set!(
            ell,
            delta,
            gamma_inner,
            d_min,
            lambda_target,
            lift_retries,
            inner_max_tries,
            eps,
            failure_delta
        );
        set!(trials, seed, gate_coset, threads);
        set_some!(lift, v0, error_weights, replay, out_dir);
        Ok(c)
    }
}

/// A bundle fixes `mode`, `ell`, and `lift`; other keys still apply.
fn load_or_build(cfg: &ExperimentConfig, bundle: Option<&Path>) -> Result<BuiltCode> {
    match bundle {
        Some(p) => BuiltCode::from_bundle(CodeBundle::read(p)?),
        None => build_code(cfg),
    }
}

fn effective_config(mut cfg: ExperimentConfig, built: &BuiltCode) -> Result<ExperimentConfig> {
    cfg.mode = built.code.kind();
    cfg.ell = built.code.ell();
    cfg.lift = Some(built.code.tanner().ell());
    cfg.validate()?;
    Ok(cfg)
}

fn read_syndrome(path: &Path, len: usize) -> Result<BitVec> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path)?;
    }
    let s = if text.trim_start().starts_with('[') {
        let support: Vec<usize> = serde_json::from_str(&text)?;
        if let Some(&i) = support.iter().find(|&&i| i >= len) {
            return Err(Error::Format(format!(
                "syndrome index {i} out of range for length {len}"
            )));
        }
        BitVec::from_support(len, support)
    } else {
        BitVec::parse(&text)?
    };
    if s.len() != len {
        return Err(Error::DimensionMismatch {
            what: "syndrome length",
            expected: len,
            found: s.len(),
        });
    }
    Ok(s)
}

#[derive(Serialize)]
struct DecodeReport {
    side: CssSide,
    status: Status,
    weight: usize,
    estimate: Vec<usize>,
    runs: usize,
    seed: u64,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build { cfg, out } => {
            let cfg = cfg.resolve()?;
            let built = build_code(&cfg)?;
            match out {
                Some(p) => built.bundle.write(&p)?,
                None => writeln!(std::io::stdout().lock(), "{}", built.bundle.to_json()?)?,
            }
        }
        Command::Params { cfg, bundle } => {
            let cfg = cfg.resolve()?;
            let built = load_or_build(&cfg, bundle.as_deref())?;
            let cfg = effective_config(cfg, &built)?;
            print_json(&params_report(&cfg, &built)?)?;
        }
        Command::Decode {
            cfg,
            bundle,
            side,
            syndrome,
        } => {
            let cfg = cfg.resolve()?;
            let built = load_or_build(&cfg, bundle.as_deref())?;
            let cfg = effective_config(cfg, &built)?;
            let side = CssSide::from(side);
            let code = &built.code;
            let z = code.side(CssSide::Z);
            let len = match side {
                CssSide::Z => z.n0() * z.ell(),
                CssSide::X => z.n1() * z.ell(),
            };
            let s = read_syndrome(&syndrome, len)?;
            let out = code.decode(side, &s, cfg.method()?, cfg.seed)?;
            print_json(&DecodeReport {
                side,
                status: out.status,
                weight: out.weight,
                estimate: out.estimate.support(),
                runs: out.trace.len(),
                seed: cfg.seed,
            })?;
            if !out.is_ok() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bench { cfg, bundle } => {
            let cfg = cfg.resolve()?;
            let built = load_or_build(&cfg, bundle.as_deref())?;
            let cfg = effective_config(cfg, &built)?;
            let out = run_sweep_on(&cfg, &built)?;
            if let Some(dir) = &cfg.out_dir {
                write_outputs(dir, &built, &out)?;
            }
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for row in &out.summary {
                w.serialize(row)?;
            }
            w.flush()?;
            let failures = out.gate_failures();
            eprintln!("{} trials, {failures} gate failures", out.records.len());
            if failures > 0 {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
