use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfis_core::aggregate::{rank, AggregateOptions, MissingPolicy, WeightVector};
use cfis_core::batch::score_records;
use cfis_core::cascade::{build_profile, surface_grid, Binding, NodeSource, TestKind, TestProfile};
use cfis_core::fis::DEFAULT_RESOLUTION;
use cfis_core::io::{
    emit_report, emit_surface_csv, load_records, parse_profile, parse_profile_document, parse_score_matrix,
    parse_weights_csv, serialize_profile, summarize, Report, Strictness,
};

/// Cascaded fuzzy scoring of robot test trials.
#[derive(Parser, Debug)]
#[command(name = "cfis", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write built-in test profiles as JSON.
    Init(InitArgs),
    /// Check a profile for coverage gaps and unreachable rules.
    Validate(ValidateArgs),
    /// Score a CSV of trial records against a profile.
    Evaluate(EvaluateArgs),
    /// Rank platforms from a per-test score matrix.
    Aggregate(AggregateArgs),
    /// Sample one FIS over a grid of two inputs.
    Surface(SurfaceArgs),
}

#[derive(Args, Debug)]
struct InitArgs {
    /// Test kind to write, e.g. through_apertures.
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    kind: Option<String>,
    /// Write every built-in profile.
    #[arg(long)]
    all: bool,
    /// Output directory; files are named <kind>.profile.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Profile JSON file.
    profile: PathBuf,
    /// Report unknown keys as warnings instead of errors.
    #[arg(long)]
    lenient: bool,
    /// Grid points per input variable.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Profile JSON file.
    #[arg(long)]
    profile: PathBuf,
    /// Trial records CSV.
    #[arg(long)]
    records: PathBuf,
    /// Output directory for records.csv, summary.csv and report.json.
    #[arg(long)]
    out: PathBuf,
    /// Skip bad rows and unknown profile keys with a warning.
    #[arg(long)]
    lenient: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct AggregateArgs {
    /// Score matrix, CSV or JSON.
    #[arg(long)]
    matrix: PathBuf,
    /// Per-test weights CSV with columns test,weight; equal weights when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Output directory for ranking.csv and ranking.json.
    #[arg(long)]
    out: PathBuf,
    /// Accept zero scores; the platform's overall score becomes 0.
    #[arg(long)]
    allow_zero: bool,
    /// Fail on missing scores instead of renormalizing the weights.
    #[arg(long)]
    strict_missing: bool,
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    /// Profile JSON file.
    #[arg(long)]
    profile: PathBuf,
    /// FIS name or node name within the profile.
    #[arg(long)]
    fis: String,
    /// Input swept along x.
    #[arg(long)]
    x: String,
    /// Input swept along y.
    #[arg(long)]
    y: String,
    /// Value for a remaining input, as NAME=VALUE; repeatable.
    #[arg(long, value_name = "NAME=VALUE", value_parser = parse_assignment)]
    fixed: Vec<(String, f64)>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("{value:?} is not a number"))?;
    Ok((name.trim().to_string(), value))
}

enum Failure {
    /// Bad data or a failed validation.
    Data(String),
    /// Bad usage or an I/O problem.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn data(e: impl ToString) -> Failure {
    Failure::Data(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn out_dir(path: &Path) -> Outcome {
    fs::create_dir_all(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn strictness(lenient: bool) -> Strictness {
    if lenient {
        Strictness::Lenient
    } else {
        Strictness::Strict
    }
}

fn warn(messages: &[String]) {
    for m in messages {
        eprintln!("warning: {m}");
    }
}

fn load_profile(path: &Path, lenient: bool) -> Result<TestProfile, Failure> {
    let parsed = parse_profile(&read(path)?, strictness(lenient))
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    warn(&parsed.warnings);
    Ok(parsed.value)
}

fn init(args: InitArgs) -> Outcome {
    let kinds = match &args.kind {
        Some(kind) => vec![kind.parse::<TestKind>().map_err(|e| Failure::Usage(e.to_string()))?],
        None => TestKind::ALL.to_vec(),
    };
    out_dir(&args.out)?;
    for kind in kinds {
        let text = serialize_profile(&build_profile(kind)).map_err(data)?;
        let path = args.out.join(format!("{kind}.profile.json"));
        write(&path, &text)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Outcome {
    let text = read(&args.profile)?;
    let at = |e: &dyn std::fmt::Display| Failure::Data(format!("{}: {e}", args.profile.display()));
    let parsed = parse_profile_document(&text, strictness(args.lenient)).map_err(|e| at(&e))?;
    warn(&parsed.warnings);
    let profile = parsed.value.to_profile().map_err(|e| at(&e))?;
    let mut valid = true;
    for fis in profile.graph().fis_nodes() {
        let report = fis.validate(args.resolution);
        valid &= report.is_valid();
        print!("{report}");
    }
    if valid {
        Ok(())
    } else {
        Err(Failure::Data(format!("{}: validation failed", args.profile.display())))
    }
}

fn evaluate(args: EvaluateArgs) -> Outcome {
    let profile = load_profile(&args.profile, args.lenient)?;
    let text = read(&args.records)?;
    let set = load_records(&text, &profile, strictness(args.lenient))
        .map_err(|e| Failure::Data(format!("{}: {e}", args.records.display())))?;
    warn(&set.warnings);
    for e in &set.row_errors {
        eprintln!("warning: {}: skipped {e}", args.records.display());
    }
    let records = score_records(&profile, &set.records, args.jobs)
        .map_err(|(line, e)| Failure::Data(format!("{}: line {line}: {e}", args.records.display())))?;
    let report = Report {
        test_means: summarize(&records),
        records,
        ranking: None,
    };
    let docs = emit_report(&report);
    out_dir(&args.out)?;
    write(&args.out.join("records.csv"), &docs.records_csv)?;
    write(&args.out.join("summary.csv"), &docs.means_csv)?;
    write(&args.out.join("report.json"), &docs.json)
}

fn aggregate(args: AggregateArgs) -> Outcome {
    let matrix = parse_score_matrix(&read(&args.matrix)?)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.matrix.display())))?;
    warn(&matrix.warnings());
    let weights = match &args.weights {
        Some(path) => parse_weights_csv(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
        None => WeightVector::equal(matrix.tests()),
    };
    let options = AggregateOptions {
        missing: if args.strict_missing {
            MissingPolicy::Strict
        } else {
            MissingPolicy::Renormalize
        },
        allow_zero: args.allow_zero,
    };
    let ranking = rank(&matrix, &weights, options).map_err(data)?;
    let docs = emit_report(&Report {
        ranking: Some(ranking.clone()),
        ..Report::default()
    });
    out_dir(&args.out)?;
    write(
        &args.out.join("ranking.csv"),
        docs.ranking_csv.as_deref().unwrap_or_default(),
    )?;
    let mut json = serde_json::to_string_pretty(&ranking).expect("rankings serialize");
    json.push('\n');
    write(&args.out.join("ranking.json"), &json)
}

fn surface(args: SurfaceArgs) -> Outcome {
    let profile = load_profile(&args.profile, false)?;
    let graph = profile.graph();
    let node = graph
        .nodes()
        .iter()
        .find(|n| n.name == args.fis || n.as_fis().is_some_and(|f| f.name() == args.fis))
        .filter(|n| n.as_fis().is_some())
        .ok_or_else(|| Failure::Usage(format!("profile has no FIS named {:?}", args.fis)))?;
    let NodeSource::Fis { fis, bindings } = &node.source else {
        unreachable!("filtered to FIS nodes")
    };

    // Inputs fed by constant nodes default to that constant.
    let mut fixed = args.fixed.clone();
    for (var, binding) in fis.inputs().iter().zip(bindings) {
        let name = var.name();
        if name == args.x || name == args.y || fixed.iter().any(|(n, _)| n == name) {
            continue;
        }
        if let Binding::Node(source) = binding {
            if let Some(NodeSource::Constant(v)) = graph.node(source).map(|n| &n.source) {
                fixed.push((name.to_string(), *v));
            }
        }
    }
    let grid = surface_grid(
        fis,
        &args.x,
        &args.y,
        fixed.iter().map(|(n, v)| (n.as_str(), *v)),
        args.resolution,
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;
    write(&args.out, &emit_surface_csv(&grid))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Init(a) => init(a),
        Command::Validate(a) => validate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Aggregate(a) => aggregate(a),
        Command::Surface(a) => surface(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
