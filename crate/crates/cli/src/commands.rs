use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use mps_core::{
    build_distance_matrix, monte_carlo, ni_score, pairwise_verdict, risk_verdict, run_mps,
    CandidateSet, DistanceMatrix, MpsConfig, MpsError, SyntheticScenario, TraceKind, TrialRecord,
};

use crate::args::{Cli, Command, InputArgs, OutputFlags, PairwiseArgs, RunArgs, SimulateArgs};
use crate::error::{CliError, Result};
use crate::matrix_io::read_matrix;
use crate::report::{
    to_json, AuditReport, FileDigest, InputDigest, PairwiseSummary, SimulationReport, Timings,
    Verdicts, SCHEMA_VERSION,
};
use crate::traces::load_bundle;

/// Runs one parsed command line and writes its report.
pub fn execute(cli: Cli) -> Result<()> {
    let out = match &cli.command {
        Command::Run(a) | Command::NiScore(a) => a.out.clone(),
        Command::Pairwise(a) => a.out.clone(),
        Command::Simulate(a) => a.out.clone(),
    };
    let json = with_threads(out.threads, || render(&cli.command))??;
    emit(&out, &json)
}

fn render(command: &Command) -> Result<String> {
    Ok(match command {
        Command::Run(a) => to_json(&cmd_run(a)?),
        Command::NiScore(a) => to_json(&cmd_ni_score(a)?),
        Command::Pairwise(a) => to_json(&cmd_pairwise(a)?),
        Command::Simulate(a) => to_json(&cmd_simulate(a)?),
    })
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn emit(out: &OutputFlags, json: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, json).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(json.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn elapsed(start: Instant) -> Timings {
    Timings {
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn checked_config(config: MpsConfig) -> Result<MpsConfig> {
    config.validate()?;
    Ok(config)
}

/// Builds the distance matrix from whichever input was given.
pub fn load_input(input: &InputArgs) -> Result<(DistanceMatrix, InputDigest)> {
    match (&input.matrix, &input.target_trace) {
        (Some(path), None) => {
            if input.distance.is_some() {
                return Err(CliError::Config(
                    "--distance only applies to trace inputs".into(),
                ));
            }
            let loaded = read_matrix(path)?;
            let digest = digest_for(
                &loaded.matrix,
                "matrix",
                None,
                vec![FileDigest::of("matrix", path)?],
            );
            Ok((loaded.matrix, digest))
        }
        (None, Some(target)) => {
            let (bundle, _) = load_bundle(target, &input.candidate_traces)?;
            if let Some(want) = input.distance {
                let want: TraceKind = want.into();
                if want != bundle.kind() {
                    return Err(MpsError::KindMismatch(format!(
                        "--distance expects {want:?} traces but the files hold {:?}",
                        bundle.kind()
                    ))
                    .into());
                }
            }
            let matrix = build_distance_matrix(&bundle)?;
            let mut files = vec![FileDigest::of("target", target)?];
            for p in &input.candidate_traces {
                files.push(FileDigest::of("candidate", p)?);
            }
            let distance = match bundle.kind() {
                TraceKind::Token => "token",
                TraceKind::Embedding => "semantic",
            };
            let digest = digest_for(&matrix, "traces", Some(distance), files);
            Ok((matrix, digest))
        }
        _ => Err(CliError::Config(
            "give exactly one of --matrix or --target-trace with --candidate-traces".into(),
        )),
    }
}

fn digest_for(
    matrix: &DistanceMatrix,
    source: &str,
    distance: Option<&str>,
    files: Vec<FileDigest>,
) -> InputDigest {
    InputDigest {
        source: source.to_string(),
        distance: distance.map(str::to_string),
        files,
        prompt_count: matrix.prompt_count(),
        model_count: matrix.model_count(),
        model_ids: matrix.model_ids().to_vec(),
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<AuditReport> {
    let start = Instant::now();
    let config = checked_config(args.test.config())?;
    let (matrix, input) = load_input(&args.input)?;
    let result = run_mps(&matrix, &CandidateSet::all(&matrix), &config)?;
    Ok(AuditReport {
        schema_version: SCHEMA_VERSION.into(),
        command: "run".into(),
        config,
        input,
        ni_score: result.ni_score,
        ni_testable: result.ni_testable,
        verdicts: Some(Verdicts {
            risk: risk_verdict(&result),
            pairwise: None,
        }),
        result: Some(result),
        timings: elapsed(start),
    })
}

pub fn cmd_ni_score(args: &RunArgs) -> Result<AuditReport> {
    let start = Instant::now();
    let config = checked_config(args.test.config())?;
    let (matrix, input) = load_input(&args.input)?;
    let score = ni_score(&matrix, &CandidateSet::all(&matrix), &config)?;
    Ok(AuditReport {
        schema_version: SCHEMA_VERSION.into(),
        command: "ni-score".into(),
        config,
        input,
        ni_score: score,
        ni_testable: true,
        result: None,
        verdicts: None,
        timings: elapsed(start),
    })
}

pub fn cmd_pairwise(args: &PairwiseArgs) -> Result<AuditReport> {
    let start = Instant::now();
    let config = checked_config(args.test.config())?;
    let (matrix, input) = load_input(&args.input)?;
    let v = pairwise_verdict(&matrix, &args.suspect, &args.controls, &config)?;
    let risk = risk_verdict(&v.underlying);
    Ok(AuditReport {
        schema_version: SCHEMA_VERSION.into(),
        command: "pairwise".into(),
        config,
        input,
        ni_score: v.underlying.ni_score,
        ni_testable: v.underlying.ni_testable,
        verdicts: Some(Verdicts {
            risk,
            pairwise: Some(PairwiseSummary {
                suspect_id: v.suspect_id,
                control_ids: args.controls.clone(),
                is_provenance: v.is_provenance,
                suspect_excluded_at: v.suspect_excluded_at,
                control_contamination: v.control_contamination,
            }),
        }),
        result: Some(v.underlying),
        timings: elapsed(start),
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulationReport> {
    let start = Instant::now();
    let config = checked_config(args.test.config())?;
    if args.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let (scenario, scenario_file) = match &args.scenario {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let spec: SyntheticScenario = serde_json::from_str(&text)
                .map_err(|e| CliError::parse(path, Some(e.line() as u64), e.to_string()))?;
            (spec, Some(FileDigest::of("scenario", path)?))
        }
        None => {
            let mut spec = SyntheticScenario::with_lineage(
                args.candidates,
                args.prompts,
                args.tam,
                args.model.into(),
            );
            if let Some(gap) = args.gap {
                spec = spec.with_gap(gap);
            }
            (spec, None)
        }
    };
    let scenario = scenario.with_seed(config.seed);
    scenario.validate()?;
    let evaluation = monte_carlo(&scenario, args.trials, &config)?;
    if let Some(path) = &args.per_trial_csv {
        write_trials(path, &evaluation.records)?;
    }
    Ok(SimulationReport {
        schema_version: SCHEMA_VERSION.into(),
        command: "simulate".into(),
        config,
        scenario,
        scenario_file,
        evaluation,
        timings: elapsed(start),
    })
}

fn write_trials(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io = |e: csv::Error| CliError::io(path, e.into());
    w.write_record([
        "trial",
        "seed",
        "truth",
        "predicted_set",
        "covered",
        "exact",
        "risky",
        "ni_score",
    ])
    .map_err(io)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.truth.join(";"),
            r.predicted_set.join(";"),
            r.covered.to_string(),
            r.exact.to_string(),
            r.risky.to_string(),
            r.ni_score.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
