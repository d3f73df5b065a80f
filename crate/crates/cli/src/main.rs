use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multimirror::report::{witness_summary, CharacterSummary, GraphSummary, PairSummary, PartitionSummary};
use multimirror::{
    analyze, borisov_dual, coarsen, find_translations, roundtrip_check_w, AnalysisOptions, CharacterError,
    CharacterTable, GraphError, Input, MirrorPair, NefError, NefPartition, Side, WStructure,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "multimirror",
    version,
    about = "Multiple mirror nef-partitions and their superpotentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// `json` prints a one-line status on stderr, `summary` a readable digest.
    /// The JSON report always goes to stdout.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Summary,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the input describes a nef-partition (and a mirror pair, if translations are given).
    Validate { file: PathBuf },
    /// Borisov dual of the input partition.
    Dual { file: PathBuf },
    /// Search for multiple-mirror translations.
    Mirrors { file: PathBuf },
    /// Run the whole pipeline.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Build and verify the explicit point of both open sets.
    Witness {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Sample points and check that the two maps are mutually inverse.
    BiratCheck {
        file: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Restrict to these blocks first, e.g. `1,3` (counted from 1).
        #[arg(long)]
        blocks: Option<String>,
    },
    /// Merge parts of the pair, e.g. `--classes "1,2;3"`.
    Coarsen {
        file: PathBuf,
        #[arg(long)]
        classes: String,
    },
    /// Restrict the cell structure to a set of blocks.
    Fano {
        file: PathBuf,
        #[arg(long)]
        blocks: String,
    },
}

enum Failure {
    Input(String),
    Domain(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl From<NefError> for Failure {
    fn from(e: NefError) -> Self {
        match e {
            NefError::InvalidClasses(_) => Failure::Input(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<CharacterError> for Failure {
    fn from(e: CharacterError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::BlockSelection { .. } | GraphError::BlockOutOfRange { .. } => Failure::Input(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

struct Outcome {
    report: Value,
    ok: bool,
    summary: Vec<String>,
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn read_input(file: &PathBuf) -> Result<Input, Failure> {
    let text =
        std::fs::read_to_string(file).map_err(|e| Failure::Input(format!("cannot read {}: {e}", file.display())))?;
    Input::parse(&text).map_err(|e| Failure::Input(e.to_string()))
}

/// Numbers counted from 1, separated by commas.
fn parse_indices(text: &str, flag: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(Failure::Input(format!("--{flag}: `{s}` is not a positive index"))),
            }
        })
        .collect()
}

fn cells_of(mp: &MirrorPair) -> Result<WStructure, Failure> {
    let ct = CharacterTable::build_xi(mp)?;
    Ok(WStructure::build(&ct)?)
}

fn validate(input: &Input) -> Result<Outcome, Failure> {
    let mut report = json!({ "ok": true });
    let mut summary = Vec::new();
    if let Some(p) = input.nabla_partition() {
        let p = p?;
        summary.push(format!("nef-partition of rank {} with {} parts", p.rank(), p.len()));
        report["partition"] = to_value(&PartitionSummary::of(&p));
    }
    let has_pair = !matches!(input, Input::Nabla { translations: None, .. });
    if has_pair {
        let mp = input.mirror_pair()?;
        summary.push(format!(
            "mirror pair with translations {}",
            mp.translations()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        ));
        report["pair"] = to_value(&PairSummary::of(&mp, None));
    }
    Ok(Outcome {
        report,
        ok: true,
        summary,
    })
}

fn dual(input: &Input) -> Result<Outcome, Failure> {
    let (report, summary) = match input {
        Input::Nabla { .. } => {
            let p = input.nabla_partition().expect("nabla form")?;
            let d = borisov_dual(&p);
            let counts: Vec<usize> = d.parts().iter().map(|q| q.lattice_points().len()).collect();
            (
                json!({ "ok": true, "dual": to_value(&PartitionSummary::of(&d)) }),
                vec![format!("dual parts with {counts:?} lattice points")],
            )
        }
        Input::Deltas { delta1, delta2, .. } => {
            let d1 = NefPartition::validate(delta1.clone(), Side::Delta)?;
            let d2 = NefPartition::validate(delta2.clone(), Side::Delta)?;
            (
                json!({
                    "ok": true,
                    "nabla1": to_value(&PartitionSummary::of(&borisov_dual(&d1))),
                    "nabla2": to_value(&PartitionSummary::of(&borisov_dual(&d2))),
                }),
                vec!["duals of both delta partitions".to_string()],
            )
        }
    };
    Ok(Outcome {
        report,
        ok: true,
        summary,
    })
}

fn mirrors(input: &Input) -> Result<Outcome, Failure> {
    let p = match input.nabla_partition() {
        Some(p) => p?,
        None => input.mirror_pair()?.nabla1().clone(),
    };
    let found = find_translations(&p)?;
    let mut entries = Vec::new();
    let mut summary = vec![format!("{} translation tuples", found.len())];
    for t in &found {
        let mp = MirrorPair::new(p.clone(), t.clone())?;
        let cells = CharacterTable::build_xi(&mp)?.cell_sizes();
        summary.push(format!(
            "  {}  cells {cells:?}",
            t.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        ));
        entries.push(json!({
            "translations": to_value(t),
            "trivial": mp.is_trivial(),
            "delta2": to_value(&PartitionSummary::of(mp.delta2())),
            "cell_sizes": cells,
        }));
    }
    Ok(Outcome {
        report: json!({ "ok": true, "count": found.len(), "partition": to_value(&PartitionSummary::of(&p)), "mirrors": entries }),
        ok: true,
        summary,
    })
}

fn analyze_cmd(input: &Input, s: &Sampling) -> Outcome {
    let report = analyze(
        input,
        AnalysisOptions {
            samples: s.samples,
            tol: s.tol,
            seed: s.seed,
        },
    );
    let mut summary = Vec::new();
    if let Some(c) = report.characters.done() {
        summary.push(format!("{} characters, cells {:?}", c.count, c.cell_sizes));
    }
    if let Some(g) = report.graph.done() {
        summary.push(format!(
            "beta = {}, block sizes {:?}, strongly connected: {}",
            g.blocks.beta, g.blocks.block_sizes, g.connectivity.holds
        ));
    }
    if let Some(w) = report.witness.done() {
        summary.push(format!(
            "witness in both open sets: {}",
            w.first.passes && w.second.passes
        ));
    }
    if let Some(r) = report.roundtrip.done() {
        summary.push(format!("round trip {}/{} passed", r.passed, r.samples));
    }
    Outcome {
        ok: report.ok,
        report: to_value(&report),
        summary,
    }
}

fn witness(input: &Input, tol: f64) -> Result<Outcome, Failure> {
    let w = cells_of(&input.mirror_pair()?)?;
    let s = witness_summary(&w, tol).map_err(|e| Failure::Domain(e.to_string()))?;
    let ok = s.first.passes && s.second.passes;
    let summary = vec![
        format!("Perron roots {:?}", s.perron_values),
        format!(
            "rank {} (expected {}), residuals {:.1e} / {:.1e}",
            s.rank, s.first.expected_rank, s.first.max_residual, s.second.max_residual
        ),
    ];
    Ok(Outcome {
        report: json!({ "ok": ok, "witness": to_value(&s) }),
        ok,
        summary,
    })
}

fn birat_check(input: &Input, s: &Sampling, blocks: Option<&str>) -> Result<Outcome, Failure> {
    let mut w = cells_of(&input.mirror_pair()?)?;
    let selection = blocks.map(|b| parse_indices(b, "blocks")).transpose()?;
    if let Some(sel) = &selection {
        w = w.fano_restrict(sel)?;
    }
    let r = roundtrip_check_w(&w, s.samples, s.tol, s.seed);
    let worst = [
        r.max_membership1,
        r.max_membership2,
        r.max_phi_projection,
        r.max_psi_projection,
        r.max_psi_phi,
        r.max_phi_psi,
        r.max_torsor,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let summary = vec![
        format!("{}/{} samples passed, max residual {worst:.1e}", r.passed, r.samples),
        format!(
            "retry rate {:.3}, sampling failures {}, map failures {}",
            r.retry_rate, r.sampling_failures, r.map_failures
        ),
    ];
    Ok(Outcome {
        report: json!({
            "ok": r.all_passed,
            "blocks": selection.map(|s| s.iter().map(|k| k + 1).collect::<Vec<_>>()),
            "roundtrip": to_value(&r),
        }),
        ok: r.all_passed,
        summary,
    })
}

fn coarsen_cmd(input: &Input, classes: &str) -> Result<Outcome, Failure> {
    let mp = input.mirror_pair()?;
    let classes: Vec<Vec<usize>> = classes
        .split(';')
        .map(|c| parse_indices(c, "classes"))
        .collect::<Result<_, _>>()?;
    let coarse = coarsen(&mp, &classes)?;
    let pair = coarse.pair();
    let ct = CharacterTable::build_xi(pair)?;
    let mut report = json!({
        "ok": true,
        "trivial": coarse.is_trivial(),
        "pair": to_value(&PairSummary::of(pair, None)),
        "characters": to_value(&CharacterSummary::of(&ct)),
    });
    let mut summary = vec![format!(
        "{} parts, {}, cells {:?}",
        pair.len(),
        if coarse.is_trivial() {
            "trivial translations"
        } else {
            "still a mirror pair"
        },
        ct.cell_sizes()
    )];
    if let Ok(w) = WStructure::build(&ct) {
        let g = GraphSummary::of(&w);
        summary.push(format!("coarse graph loop-only: {}", w.graph().is_loop_only()));
        report["graph"] = to_value(&g);
    }
    Ok(Outcome {
        report,
        ok: true,
        summary,
    })
}

fn fano(input: &Input, blocks: &str) -> Result<Outcome, Failure> {
    let w = cells_of(&input.mirror_pair()?)?;
    let sel = parse_indices(blocks, "blocks")?;
    let restricted = w.fano_restrict(&sel)?;
    let g = GraphSummary::of(&restricted);
    let summary = vec![format!(
        "restricted to blocks {:?}: {} parts, cells {:?}",
        sel.iter().map(|k| k + 1).collect::<Vec<_>>(),
        restricted.size(),
        restricted.cell_sizes()
    )];
    Ok(Outcome {
        report: json!({
            "ok": true,
            "blocks": sel.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "labels": restricted.labels().iter().map(|k| k + 1).collect::<Vec<_>>(),
            "cell_sizes": restricted.cell_sizes(),
            "characters": restricted.characters().len(),
            "graph": to_value(&g),
        }),
        ok: true,
        summary,
    })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Validate { file } => validate(&read_input(file)?),
        Command::Dual { file } => dual(&read_input(file)?),
        Command::Mirrors { file } => mirrors(&read_input(file)?),
        Command::Analyze { file, sampling } => Ok(analyze_cmd(&read_input(file)?, sampling)),
        Command::Witness { file, tol } => witness(&read_input(file)?, *tol),
        Command::BiratCheck { file, sampling, blocks } => birat_check(&read_input(file)?, sampling, blocks.as_deref()),
        Command::Coarsen { file, classes } => coarsen_cmd(&read_input(file)?, classes),
        Command::Fano { file, blocks } => fano(&read_input(file)?, blocks),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, code, summary) = match run(&cli) {
        Ok(o) => (o.report, u8::from(!o.ok), o.summary),
        Err(f) => {
            let (kind, message) = match &f {
                Failure::Input(m) => ("input", m.clone()),
                Failure::Domain(m) => ("domain", m.clone()),
            };
            (
                json!({ "ok": false, "error": { "kind": kind, "message": message } }),
                f.code(),
                vec![format!("{kind} error: {message}")],
            )
        }
    };
    // A closed pipe downstream is not our failure.
    let _ = writeln!(
        std::io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(&report).expect("json")
    );
    let status = if code == 0 { "ok" } else { "FAILED" };
    match cli.format {
        Format::Json => eprintln!("{status}"),
        Format::Summary => {
            eprintln!("{status}");
            for line in summary {
                eprintln!("{line}");
            }
        }
    }
    ExitCode::from(code)
}
