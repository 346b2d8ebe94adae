use std::fs;
use std::io::Write;

use serde::Serialize;
use tracenet_core::chain::{build_chain, empirical_validation, DEFAULT_VALIDATION_RUNS};
use tracenet_core::report::{
    analysis_report, chain_report, enumeration_report, firing_line, matrix_csv, step_records,
    Analysis, AnalysisOptions,
};
use tracenet_core::trace_monoid::DEFAULT_MAX_CLIQUES;
use tracenet_core::verify::{verify_net, VerifyOptions};
use tracenet_core::{parse_net, Error, PetriNet};

use crate::{Cli, Command, Format};

pub const MAX_CLIQUES_VAR: &str = "TRACENET_MAX_CLIQUES";
const DEFAULT_ENUMERATION_LENGTH: usize = 8;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotSafe { .. } => 3,
            Error::NotIrreducible => 4,
            Error::NoRootInRange
            | Error::RootNotIsolable
            | Error::IllDefinedAction { .. }
            | Error::DegenerateRoot
            | Error::KernelDimension { .. }
            | Error::NonPositiveKernel(_)
            | Error::Residual { .. }
            | Error::NegativeWeight { .. }
            | Error::ZeroContinuation { .. } => 5,
            Error::StateLimit(_) | Error::CliqueLimit(_) | Error::Cap { .. } => 6,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn max_cliques() -> Result<usize, Failure> {
    match std::env::var(MAX_CLIQUES_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{MAX_CLIQUES_VAR} must be a count, got `{v}`"))),
        Err(_) => Ok(DEFAULT_MAX_CLIQUES),
    }
}

fn options(cli: &Cli) -> Result<AnalysisOptions, Failure> {
    for (name, v) in [
        ("tolerance", cli.tolerance),
        ("probability-tolerance", cli.probability_tolerance),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Failure::usage(format!("--{name} must be positive")));
        }
    }
    Ok(AnalysisOptions {
        root_tolerance: cli.tolerance,
        probability_tolerance: cli.probability_tolerance,
        max_states: cli.max_states,
        max_cliques: max_cliques()?,
    })
}

fn timestamp(cli: &Cli) -> Option<String> {
    (!cli.no_timestamp)
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

fn load(cli: &Cli) -> Result<PetriNet, Failure> {
    let text = fs::read_to_string(&cli.net)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", cli.net.display())))?;
    Ok(parse_net(&text)?)
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::usage(format!("cannot write output: {e}"));
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(io),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(io),
    }
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn unsupported(cli: &Cli, format: Format) -> Failure {
    Failure::usage(
        format!("format {format:?} is not available for {:?}", cli.command).to_lowercase(),
    )
}

pub fn run(cli: &Cli) -> Outcome {
    match cli.command {
        Command::Analyze => analyze(cli),
        Command::Chain => chain(cli),
        Command::Sample => sample(cli),
        Command::Verify => verify(cli),
        Command::Enumerate => enumerate(cli),
    }
}

fn analyze(cli: &Cli) -> Outcome {
    let format = cli.format.unwrap_or(Format::Json);
    if format != Format::Json {
        return Err(unsupported(cli, format));
    }
    let opts = options(cli)?;
    let a = Analysis::run(load(cli)?, &opts)?;
    emit(cli, &json(&analysis_report(&a, timestamp(cli), &opts)?))?;
    Ok(0)
}

fn chain(cli: &Cli) -> Outcome {
    let format = cli.format.unwrap_or(Format::Json);
    let opts = options(cli)?;
    let a = Analysis::run(load(cli)?, &opts)?;
    let chain = build_chain(&a.measure, 0)?;
    let report = chain_report(&a, &chain, timestamp(cli), opts.probability_tolerance)?;
    match format {
        Format::Json => emit(cli, &json(&report))?,
        Format::Csv => emit(cli, &matrix_csv(&report.pairs, &report.matrix)?)?,
        f => return Err(unsupported(cli, f)),
    }
    Ok(0)
}

fn sample(cli: &Cli) -> Outcome {
    let opts = options(cli)?;
    let a = Analysis::run(load(cli)?, &opts)?;
    let chain = build_chain(&a.measure, 0)?;
    if cli.validate {
        let runs = cli.runs.unwrap_or(DEFAULT_VALIDATION_RUNS);
        let report = empirical_validation(&chain, &a.measure, runs, cli.steps, cli.seed)?;
        emit(cli, &json(&report))?;
        return Ok(if report.pass { 0 } else { 1 });
    }
    let runs = cli.runs.unwrap_or(1);
    if runs == 0 {
        return Err(Failure::usage("--runs must be at least 1"));
    }
    let samples = chain.sample_runs(runs, cli.steps, cli.seed)?;
    let mut out = String::new();
    match cli.format.unwrap_or(Format::Jsonl) {
        Format::Jsonl => {
            for s in &samples {
                for rec in step_records(&a, s) {
                    out.push_str(&serde_json::to_string(&rec).expect("records serialize"));
                    out.push('\n');
                }
            }
        }
        Format::Json => {
            let runs: Vec<_> = samples.iter().map(|s| step_records(&a, s)).collect();
            out = json(&runs);
        }
        Format::Firings => {
            for s in &samples {
                out.push_str(&firing_line(&a, s));
                out.push('\n');
            }
        }
        f => return Err(unsupported(cli, f)),
    }
    emit(cli, &out)?;
    Ok(0)
}

fn verify(cli: &Cli) -> Outcome {
    let format = cli.format.unwrap_or(Format::Json);
    if format != Format::Json {
        return Err(unsupported(cli, format));
    }
    let base = options(cli)?;
    let opts = VerifyOptions {
        order: cli.order,
        length: cli.length.unwrap_or(VerifyOptions::default().length),
        depth: cli.depth,
        root_tolerance: base.root_tolerance,
        probability_tolerance: base.probability_tolerance,
        max_states: base.max_states,
        max_cliques: base.max_cliques,
        corrupt_gamma: cli.corrupt_gamma,
        ..VerifyOptions::default()
    };
    for (what, n) in [("trace length", opts.length), ("depth", opts.depth)] {
        if n > cli.max_length {
            return Err(Error::Cap {
                what,
                requested: n,
                cap: cli.max_length,
            }
            .into());
        }
    }
    let report = verify_net(&load(cli)?, &opts)?;
    #[derive(Serialize)]
    struct Stamped<'a> {
        schema_version: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        timestamp: Option<String>,
        #[serde(flatten)]
        report: &'a tracenet_core::verify::VerifyReport,
    }
    emit(
        cli,
        &json(&Stamped {
            schema_version: tracenet_core::report::SCHEMA_VERSION,
            timestamp: timestamp(cli),
            report: &report,
        }),
    )?;
    Ok(if report.pass { 0 } else { 1 })
}

fn enumerate(cli: &Cli) -> Outcome {
    let opts = options(cli)?;
    let length = cli.length.unwrap_or(DEFAULT_ENUMERATION_LENGTH);
    let report = enumeration_report(&load(cli)?, length, &opts, cli.max_length, timestamp(cli))?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => emit(cli, &json(&report))?,
        Format::Csv => {
            let mut out = String::from("k,lambda_recurrence,lambda_brute_force\n");
            for (k, (r, b)) in report
                .lambda_recurrence
                .iter()
                .zip(&report.lambda_brute_force)
                .enumerate()
            {
                out.push_str(&format!("{k},{r},{b}\n"));
            }
            emit(cli, &out)?;
        }
        f => return Err(unsupported(cli, f)),
    }
    Ok(if report.consistent { 0 } else { 1 })
}
