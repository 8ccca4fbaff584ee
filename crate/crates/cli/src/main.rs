//! `tuplematch`: match reified n-ary tuples in an N-Triples knowledge base.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use tuplematch::config::ConfigDocument;
use tuplematch::kb::KnowledgeBase;
use tuplematch::links::{
    format_table, matrix_from_records, read_link_records, read_sources, sources_path, write_links,
    write_sources, write_stats_tsv,
};
use tuplematch::matcher::{match_all_with, Execution, SourceMatrix};
use tuplematch::rules::RelatednessLevel;
use tuplematch::testkit::{generate, GeneratorParams};
use tuplematch::tuples::extract_tuples;
use tuplematch::Error;

#[derive(Parser)]
#[command(name = "tuplematch", version, about = "Rule-based matching of reified n-ary tuples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match every pair of tuples and write alignment links.
    Match(MatchArgs),
    /// Check a configuration against a knowledge base without matching.
    Validate(InputArgs),
    /// Print per-source link counts for a links file.
    Stats(StatsArgs),
    /// Write a synthetic knowledge base and its configuration.
    Gen(GenArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Knowledge base in N-Triples.
    #[arg(long)]
    kb: PathBuf,
    /// Matching configuration (JSON).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Links output file (N-Triples). A `.sources.tsv` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Per-source link counts (TSV).
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Add links implied by transitivity of the first three rules.
    /// Overrides the configuration; on unless either disables it.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    transitive_closure: Option<bool>,
}

#[derive(Args)]
struct StatsArgs {
    /// Links file written by `match`.
    links: PathBuf,
    /// Provenance sidecar; defaults to `<links>.sources.tsv`.
    #[arg(long)]
    sources: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Output directory; receives `kb.nt` and `config.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    tuples: usize,
    #[arg(long, default_value_t = 60)]
    individuals: usize,
    #[arg(long, default_value_t = 12)]
    classes: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0.1)]
    link_density: f64,
    #[arg(long, default_value_t = 0.05)]
    sameas_density: f64,
    #[arg(long, default_value_t = 0.3)]
    unknown_rate: f64,
    #[arg(long, default_value_t = 3)]
    sources: usize,
}

/// A failure together with the process exit status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Failure::new(3, format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(e.exit_code() as u8, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Summary printed as JSON after a successful `match`.
#[derive(Debug, Serialize)]
struct RunReport {
    tuples: usize,
    pairs: u64,
    links: u64,
    induced_links: u64,
    links_per_rule: Vec<RuleCount>,
    wall_time_seconds: f64,
    workers: usize,
    transitive_closure: bool,
    config_sha256: String,
}

#[derive(Debug, Serialize)]
struct RuleCount {
    rule: u8,
    level: RelatednessLevel,
    predicate: &'static str,
    count: u64,
}

fn read_config(path: &Path) -> Result<(ConfigDocument, String), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Failure::new(2, format!("{}: not UTF-8", path.display())))?;
    let doc = ConfigDocument::from_json(&text).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    Ok((doc, digest))
}

fn load_kb(path: &Path, options: &tuplematch::kb::LoadOptions) -> Result<KnowledgeBase, Failure> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    let kb = KnowledgeBase::from_ntriples(BufReader::new(file), options).map_err(|e| match e {
        Error::Parse { .. } | Error::Io(_) => {
            let f = Failure::from(e);
            Failure::new(f.code, format!("{}: {}", path.display(), f.message))
        }
        other => other.into(),
    })?;
    for w in kb.warnings() {
        log::warn!("{w}");
    }
    Ok(kb)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> CmdResult {
    w.flush().map_err(|e| Failure::io(path, e))
}

fn cmd_match(args: &MatchArgs) -> CmdResult {
    let start = Instant::now();
    let (doc, digest) = read_config(&args.input.config)?;
    if let Some(first) = doc.structural_findings().into_iter().next() {
        return Err(Failure::new(2, first));
    }
    let kb = load_kb(&args.input.kb, &doc.load_options())?;
    let mut config = doc.resolve(&kb)?;
    if let Some(tc) = args.transitive_closure {
        config.emit_transitive_closure = tc;
    }
    let workers = match args.threads {
        Some(0) => return Err(Failure::new(2, "--threads must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let tuples = extract_tuples(&kb, &config)?;
    let result = match_all_with(&tuples, &config, &kb, Execution::Parallel { threads: Some(workers) })?;

    let mut out = create(&args.out)?;
    write_links(&mut out, &result.links, &kb).map_err(|e| Failure::io(&args.out, e))?;
    finish(&args.out, out)?;
    let sidecar = sources_path(&args.out);
    let mut side = create(&sidecar)?;
    write_sources(&mut side, &tuples, &kb).map_err(|e| Failure::io(&sidecar, e))?;
    finish(&sidecar, side)?;
    if let Some(path) = &args.stats {
        let mut w = create(path)?;
        write_stats_tsv(&mut w, &result.matrix).map_err(|e| Failure::io(path, e))?;
        finish(path, w)?;
    }

    let n = tuples.len() as u64;
    let report = RunReport {
        tuples: tuples.len(),
        pairs: n * n.saturating_sub(1) / 2,
        links: result.links.len() as u64,
        induced_links: result.links.iter().filter(|l| l.induced).count() as u64,
        links_per_rule: RelatednessLevel::ALL
            .into_iter()
            .map(|level| RuleCount {
                rule: level.rule(),
                level,
                predicate: level.predicate_iri(),
                count: result.matrix.total(level.rule()),
            })
            .collect(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        workers,
        transitive_closure: config.emit_transitive_closure,
        config_sha256: digest,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    Ok(())
}

fn cmd_validate(args: &InputArgs) -> CmdResult {
    let (doc, _) = read_config(&args.config)?;
    let mut findings = doc.structural_findings();
    match load_kb(&args.kb, &doc.data_load_options()) {
        Ok(kb) => {
            for w in doc.missing_vocabulary(&kb) {
                println!("warning: {w}");
            }
            if findings.is_empty() {
                let full = load_kb(&args.kb, &doc.load_options())?;
                if let Err(e) = doc.resolve(&full) {
                    findings.push(e.to_string());
                }
            }
        }
        Err(f) if f.code == 2 => findings.push(f.message),
        Err(f) => return Err(f),
    }
    if findings.is_empty() {
        println!("ok");
        return Ok(());
    }
    for f in &findings {
        println!("error: {f}");
    }
    Err(Failure::new(2, format!("{} problem(s) found", findings.len())))
}

fn cmd_stats(args: &StatsArgs) -> CmdResult {
    let unreadable = |path: &Path, e: String| Failure::new(1, format!("{}: {e}", path.display()));
    let file = File::open(&args.links).map_err(|e| unreadable(&args.links, e.to_string()))?;
    let records = read_link_records(BufReader::new(file)).map_err(|e| unreadable(&args.links, e.to_string()))?;
    let sidecar = args.sources.clone().unwrap_or_else(|| sources_path(&args.links));
    let sources = match File::open(&sidecar) {
        Ok(f) => read_sources(BufReader::new(f)).map_err(|e| unreadable(&sidecar, e.to_string()))?,
        Err(_) if records.is_empty() => Default::default(),
        Err(e) => return Err(unreadable(&sidecar, e.to_string())),
    };
    let matrix: SourceMatrix =
        matrix_from_records(&records, &sources).map_err(|e| unreadable(&sidecar, e.to_string()))?;
    print!("{}", format_table(&matrix));
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> CmdResult {
    let params = GeneratorParams {
        seed: args.seed,
        n_tuples: args.tuples,
        n_individuals: args.individuals,
        n_classes: args.classes,
        hierarchy_depth: args.depth,
        link_density: args.link_density,
        sameas_density: args.sameas_density,
        unknown_rate: args.unknown_rate,
        n_sources: args.sources,
    };
    params.validate().map_err(|e| Failure::new(2, e))?;
    let instance = generate(&params);
    instance.write_to_dir(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    println!(
        "wrote {} triples to {}",
        instance.triples.len(),
        args.out.join("kb.nt").display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Match(a) => cmd_match(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
