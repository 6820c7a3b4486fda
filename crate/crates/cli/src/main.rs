use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gonal_core::abelianization::{abelian_invariants, decide_surjection};
use gonal_core::experiments::{sweep, SweepConfig};
use gonal_core::fa::{fa_verdict_with_budget, DEFAULT_BUDGET};
use gonal_core::freeness::{certify_free, FreenessOutcome};
use gonal_core::hypergraph::diagnostics;
use gonal_core::model::{sample, ModelParams};
use gonal_core::words::{enumerate_cyclically_reduced_capped, enumerate_positive, count_positive, DEFAULT_ENUMERATION_CAP};
use gonal_core::{Error, ModelKind, Presentation};

/// Monte Carlo laboratory for random l-gonal group presentations.
#[derive(Parser)]
#[command(name = "gonal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a presentation and write it in the text format.
    Sample(SampleArgs),
    /// Print hypergraph diagnostics of a presentation as JSON.
    Analyze { file: PathBuf },
    /// Print an elimination certificate, or the stuck report.
    CertifyFree { file: PathBuf },
    /// Print the Property FA report.
    CheckFa {
        file: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Node budget for each of the (L) and (SL) searches.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Print the abelian invariants and whether the group maps onto Z.
    Abelianize { file: PathBuf },
    /// Run a parameter sweep described by a TOML config and write CSV.
    Sweep(SweepArgs),
    /// Stream all cyclically reduced (or positive) words, one per line.
    Enumerate {
        #[arg(short, long)]
        m: u32,
        #[arg(short = 'l', long = "len")]
        len: u32,
        #[arg(long)]
        positive: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Binomial,
    Positive,
    UniformCount,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Binomial => ModelKind::Binomial,
            Model::Positive => ModelKind::Positive,
            Model::UniformCount => ModelKind::UniformCount,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(short, long)]
    m: u32,
    #[arg(short = 'l', long = "len")]
    len: u32,
    /// Inclusion probability of each word.
    #[arg(long, conflicts_with = "density", required_unless_present = "density")]
    p: Option<f64>,
    /// Density d, meaning p = m^(len (d - 1)), or (2m-1)^(len d) relators for
    /// the uniform-count model.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_enum, default_value = "binomial")]
    model: Model,
    #[arg(long, env = "GONAL_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV output; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-trial JSON lines.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long, env = "GONAL_SEED")]
    seed: Option<u64>,
}

/// An error with its exit code. Code 2 marks bad input, code 1 a failed
/// analysis, which is also reported as JSON on standard output.
struct Failure {
    code: u8,
    error: anyhow::Error,
    json: Option<serde_json::Value>,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let core = error.chain().find_map(|e| e.downcast_ref::<Error>());
        let code = match core {
            Some(Error::BudgetExceeded { .. } | Error::CapExceeded { .. }) => 1,
            Some(Error::NoCrossing { .. } | Error::NonMonotoneTrend { .. }) => 1,
            _ => 2,
        };
        let json = (code == 1).then(|| json!({ "error": error_kind(core), "message": format!("{error:#}") }));
        Failure { code, error, json }
    }
}

fn error_kind(e: Option<&Error>) -> &'static str {
    match e {
        Some(Error::BudgetExceeded { .. }) => "budget_exceeded",
        Some(Error::CapExceeded { .. }) => "cap_exceeded",
        _ => "analysis_failed",
    }
}

fn read_presentation(path: &Path) -> Result<Presentation> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Presentation::from_text(&text).with_context(|| format!("{}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let params = match (a.p, a.density) {
        (Some(p), _) => ModelParams::probability(a.m, a.len, p, a.seed),
        (None, Some(d)) => ModelParams::density(a.m, a.len, d, a.seed),
        (None, None) => unreachable!("clap requires one of --p, --density"),
    };
    params.validate()?;
    let pres = sample(a.model.into(), &params)?;
    let mut out = output(a.output.as_deref())?;
    out.write_all(pres.to_text().as_bytes())?;
    out.flush()?;
    eprintln!(
        "sampled {} relators (m = {}, len = {}, {})",
        pres.num_relators(),
        pres.m,
        pres.len,
        pres.tag
    );
    Ok(())
}

fn cmd_analyze(file: &Path) -> Result<()> {
    let pres = read_presentation(file)?;
    let report = diagnostics(&pres);
    eprintln!(
        "|R| = {}, chi = {}, {} components in H_len",
        pres.num_relators(),
        pres.euler_characteristic(),
        report.component_count
    );
    print_json(&json!({
        "m": pres.m,
        "len": pres.len,
        "model": pres.tag.to_string(),
        "num_relators": pres.num_relators(),
        "euler_characteristic": pres.euler_characteristic(),
        "unused_generators": pres.unused_generators(),
        "diagnostics": report,
    }))
}

fn cmd_certify_free(file: &Path) -> Result<()> {
    let pres = read_presentation(file)?;
    let outcome = certify_free(&pres);
    match &outcome {
        FreenessOutcome::Certified(c) => eprintln!("free of rank {} ({} deletions)", c.final_rank, c.steps.len()),
        FreenessOutcome::Stuck(s) => eprintln!(
            "stuck after {} deletions with {} relators left",
            s.steps_taken,
            s.remaining_relators.len()
        ),
    }
    print_json(&outcome)
}

fn cmd_check_fa(file: &Path, epsilon: f64, budget: u64) -> Result<(), Failure> {
    let pres = read_presentation(file)?;
    let report = fa_verdict_with_budget(&pres, epsilon, budget).map_err(anyhow::Error::from)?;
    eprintln!("verdict: {:?}", report.verdict);
    if report.budget_exceeded {
        return Err(Failure {
            code: 1,
            error: anyhow!("search budget of {budget} nodes exceeded"),
            json: Some(json!({ "error": "budget_exceeded", "budget": budget, "report": report })),
        });
    }
    print_json(&report)?;
    Ok(())
}

fn cmd_abelianize(file: &Path) -> Result<()> {
    let pres = read_presentation(file)?;
    let inv = abelian_invariants(&pres);
    let surj = decide_surjection(&pres);
    eprintln!("abelianization: {inv}");
    print_json(&json!({
        "betti": inv.betti,
        "torsion": inv.torsion.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "abelianization": inv.to_string(),
        "surjects_onto_z": surj.surjects,
        "rank_route": surj.route,
    }))
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config)
        .with_context(|| format!("cannot read {}", a.config.display()))?;
    let mut cfg = SweepConfig::from_toml(&text).with_context(|| format!("{}", a.config.display()))?;
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let result = sweep(&cfg)?;
    let mut out = output(a.output.as_deref())?;
    result.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &a.jsonl {
        let mut w = output(Some(path))?;
        result.write_jsonl(&mut w)?;
        w.flush()?;
    }
    eprintln!(
        "{} grid points x {} trials = {} trials",
        result.points.len(),
        cfg.trials,
        result.records.len()
    );
    Ok(())
}

fn cmd_enumerate(m: u32, len: u32, positive: bool, cap: u64) -> Result<()> {
    let mut out = BufWriter::new(io::stdout().lock());
    if positive {
        let n = count_positive(m, len).filter(|&n| n <= cap);
        if n.is_none() {
            return Err(Error::CapExceeded {
                count: format!("{m}^{len}"),
                cap,
            }
            .into());
        }
        for w in enumerate_positive(m, len) {
            writeln!(out, "{w}")?;
        }
    } else {
        for w in enumerate_cyclically_reduced_capped(m, len, cap)? {
            writeln!(out, "{w}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample(a) => cmd_sample(&a)?,
        Command::Analyze { file } => cmd_analyze(&file)?,
        Command::CertifyFree { file } => cmd_certify_free(&file)?,
        Command::CheckFa { file, epsilon, budget } => cmd_check_fa(&file, epsilon, budget)?,
        Command::Abelianize { file } => cmd_abelianize(&file)?,
        Command::Sweep(a) => cmd_sweep(&a)?,
        Command::Enumerate { m, len, positive, cap } => cmd_enumerate(m, len, positive, cap)?,
    }
    Ok(())
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if broken_pipe(&f.error) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            if let Some(j) = f.json {
                println!("{j}");
            }
            ExitCode::from(f.code)
        }
    }
}
