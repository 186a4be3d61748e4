//! The end-to-end pipeline: read files, parse, build models, detect
//! candidates, classify them. Files are independent, so the batch runs
//! data-parallel under rayon (default `parallel` feature); the sequential
//! path is always available and produces identical output — results are
//! merged in deterministic file order either way.

use crate::ast::{Diagnostic, Severity};
use crate::detect::VulnClass;
use crate::model::{build_model, NotAnalyzedRecord};
use crate::parser::parse;
use crate::patterns::{classify_all, ClassifyOptions, Outcome, Verdict};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub classes: Vec<VulnClass>,
    /// TD interval threshold in seconds.
    pub interval_threshold: u128,
    /// Cap on worker threads (`None` lets rayon decide). `Some(1)` forces
    /// the sequential path.
    pub threads: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            classes: VulnClass::ALL.to_vec(),
            interval_threshold: 20,
            threads: None,
        }
    }
}

impl AnalysisOptions {
    fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            interval_threshold: self.interval_threshold,
        }
    }
}

/// Everything the pipeline produced for one input file.
#[derive(Debug, Clone)]
pub struct FileAnalysis {
    pub file: String,
    pub verdicts: Vec<Verdict>,
    pub not_analyzed: Vec<NotAnalyzedRecord>,
    pub diagnostics: Vec<Diagnostic>,
    /// Set when the file could not be read at all.
    pub read_error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisReport {
    /// Per-file results, sorted by file name.
    pub files: Vec<FileAnalysis>,
}

impl AnalysisReport {
    pub fn verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.files.iter().flat_map(|f| f.verdicts.iter())
    }

    pub fn not_analyzed(&self) -> impl Iterator<Item = &NotAnalyzedRecord> {
        self.files.iter().flat_map(|f| f.not_analyzed.iter())
    }

    /// Files that were actually analyzed (readable).
    pub fn analyzed_files(&self) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| f.read_error.is_none())
            .map(|f| f.file.clone())
            .collect()
    }

    pub fn likely_tp_count(&self) -> usize {
        self.verdicts()
            .filter(|v| v.outcome == Outcome::LikelyTP)
            .count()
    }

    pub fn all_unreadable(&self) -> bool {
        !self.files.is_empty() && self.files.iter().all(|f| f.read_error.is_some())
    }
}

/// Analyze one already-loaded source file.
pub fn analyze_source(file: &str, text: &str, opts: &AnalysisOptions) -> FileAnalysis {
    let unit = parse(text);
    let mut diagnostics = unit.diagnostics.clone();
    let mut verdicts = Vec::new();
    let mut not_analyzed = Vec::new();
    let copts = opts.classify_options();
    for model in build_model(&unit, file) {
        verdicts.extend(classify_all(&model, &opts.classes, &copts));
        not_analyzed.extend(model.not_analyzed.clone());
        diagnostics.extend(model.diagnostics.clone());
    }
    FileAnalysis {
        file: file.to_string(),
        verdicts,
        not_analyzed,
        diagnostics,
        read_error: None,
    }
}

fn analyze_one_path(path: &Path, opts: &AnalysisOptions) -> FileAnalysis {
    let file = path.to_string_lossy().to_string();
    match std::fs::read_to_string(path) {
        Ok(text) => analyze_source(&file, &text, opts),
        Err(e) => FileAnalysis {
            file: file.clone(),
            verdicts: Vec::new(),
            not_analyzed: Vec::new(),
            diagnostics: vec![Diagnostic {
                span: crate::span::Span::DUMMY,
                message: format!("cannot read {file}: {e}"),
                severity: Severity::Error,
            }],
            read_error: Some(e.to_string()),
        },
    }
}

fn finish_report(mut files: Vec<FileAnalysis>) -> AnalysisReport {
    files.sort_by(|a, b| a.file.cmp(&b.file));
    AnalysisReport { files }
}

/// Analyze a batch of paths.
pub fn analyze_paths(paths: &[PathBuf], opts: &AnalysisOptions) -> AnalysisReport {
    run_batch(paths, opts, analyze_one_path)
}

/// Analyze in-memory sources (used by benches and tests).
pub fn analyze_sources(sources: &[(String, String)], opts: &AnalysisOptions) -> AnalysisReport {
    let files = map_batch(sources, opts, |(name, text), opts| {
        analyze_source(name, text, opts)
    });
    finish_report(files)
}

/// Sequential twin of [`analyze_sources`]; compiled unconditionally so the
/// two paths can be compared (see the criterion bench).
pub fn analyze_sources_seq(sources: &[(String, String)], opts: &AnalysisOptions) -> AnalysisReport {
    let files = sources
        .iter()
        .map(|(name, text)| analyze_source(name, text, opts))
        .collect();
    finish_report(files)
}

fn run_batch(
    paths: &[PathBuf],
    opts: &AnalysisOptions,
    f: fn(&Path, &AnalysisOptions) -> FileAnalysis,
) -> AnalysisReport {
    let files = map_batch(paths, opts, |p, o| f(p, o));
    finish_report(files)
}

#[cfg(feature = "parallel")]
fn map_batch<T, F>(items: &[T], opts: &AnalysisOptions, f: F) -> Vec<FileAnalysis>
where
    T: Sync,
    F: Fn(&T, &AnalysisOptions) -> FileAnalysis + Sync,
{
    use rayon::prelude::*;
    match opts.threads {
        Some(1) => items.iter().map(|i| f(i, opts)).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(|| items.par_iter().map(|i| f(i, opts)).collect())
        }
        None => items.par_iter().map(|i| f(i, opts)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_batch<T, F>(items: &[T], opts: &AnalysisOptions, f: F) -> Vec<FileAnalysis>
where
    F: Fn(&T, &AnalysisOptions) -> FileAnalysis,
{
    items.iter().map(|i| f(i, opts)).collect()
}
