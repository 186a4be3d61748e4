//! solsift: static analysis for Solidity smart contracts that locates
//! candidate sites for three vulnerability classes — Unchecked Return Value
//! (URV), Reentrancy (REE), Timestamp Dependence (TD) — and then applies a
//! set of false-positive anti-pattern filters to each candidate, so the
//! warnings that remain are worth a human's time.
//!
//! The crate is organized as a pipeline:
//!
//! ```text
//! .sol text -> lexer/parser -> contract model -> detectors -> filters
//!                                   |                             |
//!                                   +--> taint, CFG, call graph   +--> verdicts
//! ```
//!
//! On top of the pipeline sit [`triage`] (judge findings from external
//! scanners against our verdicts) and [`eval`] (score verdicts against
//! ground-truth labels, confusion-matrix style).
//!
//! Analysis of multiple files runs in parallel with `rayon` when the
//! default `parallel` feature is enabled; a sequential path is always
//! available and produces identical output.

pub mod analyze;
pub mod ast;
pub mod detect;
pub mod eval;
pub mod lexer;
pub mod model;
pub mod parser;
pub mod patterns;
pub mod report;
pub mod span;
pub mod triage;

pub use analyze::{
    analyze_paths, analyze_source, analyze_sources, analyze_sources_seq, AnalysisOptions,
    AnalysisReport,
};
pub use detect::{detect_all, detect_ree, detect_td, detect_urv, CallKind, Candidate, VulnClass};
pub use eval::{evaluate, load_labels, metrics, ConfusionMatrix, GroundTruthLabel, Label, Metrics};
pub use model::{build_model, classify_address, AddressClass, ContractModel};
pub use parser::parse;
pub use patterns::{
    classify_all, classify_ree, classify_td, classify_urv, ClassifyOptions, Outcome, PatternId,
    Verdict,
};
pub use span::{SourceSpan, Span};
pub use triage::{ingest_report, triage, ExternalFinding, Judgement, TriageResult};
