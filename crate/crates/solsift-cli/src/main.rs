//! solsift command line: analyze contracts, triage external findings,
//! benchmark against labels, or walk candidates interactively.
//!
//! Exit codes: 0 when nothing looks like a true positive, 1 when at least
//! one likely true positive (or user-confirmed finding) remains, 2 on
//! usage or I/O errors.

mod wizard;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use solsift::analyze::{analyze_paths, AnalysisOptions, AnalysisReport};
use solsift::detect::VulnClass;
use solsift::eval::{evaluate, load_labels, metrics};
use solsift::report::{
    analysis_json, analysis_text, bench_json, bench_text, triage_json, triage_text, BenchRow,
};
use solsift::triage::{ingest_report, triage, Judgement};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "solsift",
    version,
    about = "Finds URV/REE/TD candidate sites in Solidity contracts and sifts out false positives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Vulnerability classes to check, comma separated: urv,ree,td
    #[arg(long, value_delimiter = ',', default_values = ["urv", "ree", "td"])]
    vuln: Vec<String>,

    /// Seconds above which a timestamp interval check is considered safe
    #[arg(long = "interval-threshold", default_value_t = 20)]
    interval_threshold: u128,

    /// Output format
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,

    /// Extra diagnostics in the output
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze .sol files and print verdicts for every candidate
    Analyze {
        #[command(flatten)]
        common: CommonOpts,
        /// Input .sol files
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Judge findings from an external scanner report against our verdicts
    Triage {
        #[command(flatten)]
        common: CommonOpts,
        /// Findings file (JSON: {"tool": ..., "findings": [...]})
        #[arg(long)]
        report: PathBuf,
        /// The .sol files the findings refer to
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Score verdicts against ground-truth labels over a corpus directory
    Bench {
        #[command(flatten)]
        common: CommonOpts,
        /// Directory of .sol files
        corpus_dir: PathBuf,
        /// Ground-truth CSV: file,line,vuln,label
        #[arg(long)]
        labels: PathBuf,
    },
    /// Walk candidates one by one, accepting or overriding each verdict
    Wizard {
        #[command(flatten)]
        common: CommonOpts,
        /// Input .sol files
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

fn parse_classes(vuln: &[String]) -> Result<Vec<VulnClass>> {
    let mut out = Vec::new();
    for v in vuln {
        let class = VulnClass::parse(v)
            .with_context(|| format!("unknown vulnerability class `{v}` (use urv, ree, td)"))?;
        if !out.contains(&class) {
            out.push(class);
        }
    }
    anyhow::ensure!(!out.is_empty(), "at least one vulnerability class required");
    Ok(out)
}

fn analysis_options(common: &CommonOpts) -> Result<AnalysisOptions> {
    anyhow::ensure!(
        common.interval_threshold >= 1,
        "--interval-threshold must be at least 1 second"
    );
    let threads = match std::env::var("DETECT_THREADS") {
        Ok(v) => Some(
            v.parse::<usize>()
                .context("DETECT_THREADS must be a positive integer")?
                .max(1),
        ),
        Err(_) => None,
    };
    Ok(AnalysisOptions {
        classes: parse_classes(&common.vuln)?,
        interval_threshold: common.interval_threshold,
        threads,
    })
}

fn run_analysis(paths: &[PathBuf], common: &CommonOpts) -> Result<AnalysisReport> {
    let opts = analysis_options(common)?;
    let report = analyze_paths(paths, &opts);
    if report.all_unreadable() {
        anyhow::bail!("none of the input files could be read");
    }
    for f in &report.files {
        if let Some(e) = &f.read_error {
            eprintln!("warning: skipping {}: {e}", f.file);
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { common, paths } => {
            let report = run_analysis(&paths, &common)?;
            if common.format == "json" {
                println!("{}", serde_json::to_string_pretty(&analysis_json(&report))?);
            } else {
                print!("{}", analysis_text(&report, common.verbose));
            }
            Ok(exit_for(report.likely_tp_count()))
        }
        Command::Triage {
            common,
            report: report_path,
            paths,
        } => {
            let (findings, diags) =
                ingest_report(&report_path).context("failed to ingest findings report")?;
            let analysis = run_analysis(&paths, &common)?;
            for d in &diags {
                eprintln!("warning: {d}");
            }
            let verdicts: Vec<_> = analysis.verdicts().cloned().collect();
            let results = triage(&findings, &verdicts, &analysis.analyzed_files());
            if common.format == "json" {
                println!("{}", serde_json::to_string_pretty(&triage_json(&results))?);
            } else {
                print!("{}", triage_text(&results));
            }
            let confirmed = results
                .iter()
                .filter(|r| r.judgement == Judgement::ConfirmedSuspicious)
                .count();
            Ok(exit_for(confirmed))
        }
        Command::Bench {
            common,
            corpus_dir,
            labels,
        } => {
            let labels = load_labels(&labels).context("failed to load labels")?;
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&corpus_dir)
                .with_context(|| format!("cannot read corpus dir {}", corpus_dir.display()))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "sol"))
                .collect();
            paths.sort();

            // labels referencing files absent from the corpus are counted
            // as missed, with a diagnostic
            let present: Vec<String> = paths
                .iter()
                .map(|p| relative_name(&p.to_string_lossy(), &corpus_dir))
                .collect();
            let mut absent_records = Vec::new();
            for file in labels
                .iter()
                .map(|l| l.file.clone())
                .collect::<std::collections::BTreeSet<_>>()
            {
                if !present.contains(&file) {
                    eprintln!("warning: labels reference `{file}` which is not in the corpus");
                    absent_records.push(solsift::model::NotAnalyzedRecord {
                        file,
                        contract: String::new(),
                        function: String::new(),
                        span: solsift::span::Span::new(1, 1, u32::MAX, 1, 0, 0),
                        reason: "file-not-found".into(),
                    });
                }
            }

            // labels name files relative to the corpus dir
            let mut rows = Vec::new();
            let base_opts = analysis_options(&common)?;
            for class in &base_opts.classes {
                let mut opts = base_opts.clone();
                opts.classes = vec![*class];
                let start = Instant::now();
                let report = analyze_paths(&paths, &opts);
                let runtime = start.elapsed().as_secs_f64();
                let verdicts: Vec<_> = report
                    .verdicts()
                    .cloned()
                    .map(|mut v| {
                        v.candidate.span.file = relative_name(&v.candidate.span.file, &corpus_dir);
                        v
                    })
                    .collect();
                let mut not_analyzed: Vec<_> = report
                    .not_analyzed()
                    .cloned()
                    .map(|mut r| {
                        r.file = relative_name(&r.file, &corpus_dir);
                        r
                    })
                    .collect();
                not_analyzed.extend(absent_records.iter().cloned());
                let cm = evaluate(&verdicts, &not_analyzed, &labels, *class);
                rows.push(BenchRow {
                    vuln: *class,
                    matrix: cm,
                    metrics: metrics(&cm, runtime),
                });
            }
            if common.format == "json" {
                println!("{}", serde_json::to_string_pretty(&bench_json(&rows))?);
            } else {
                print!("{}", bench_text(&rows));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Wizard { common, paths } => {
            let report = run_analysis(&paths, &common)?;
            let suspicious = wizard::run(&report, &paths)?;
            Ok(exit_for(suspicious))
        }
    }
}

fn relative_name(file: &str, base: &Path) -> String {
    Path::new(file)
        .strip_prefix(base)
        .map(|r| r.to_string_lossy().to_string())
        .unwrap_or_else(|_| file.to_string())
}

fn exit_for(suspicious_count: usize) -> ExitCode {
    if suspicious_count > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
