//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! 1. golden verdicts on the five bundled contracts (exact match)
//! 2. full-dataset reproduction (skipped unless SOLSIFT_FULL_DATASET is set)
//! 3. runtime envelope: 20 contracts per class in under 60 s
//! 4. property suites: guard stripping, alpha-invariance, terminal-call
//!    oracle, taint closure oracle, parser fuzz
//! 5. metrics oracle and the worked precision/specificity ratios
//! 6. triage conservation, idempotence, and no-TP-suppression on fixtures

mod synth;

use solsift::analyze::{analyze_paths, AnalysisOptions};
use solsift::detect::{detect_all, CallKind, VulnClass};
use solsift::eval::{evaluate, load_labels, metrics, ConfusionMatrix, GroundTruthLabel, Label};
use solsift::model::{build_model, ContractModel, NotAnalyzedRecord};
use solsift::parser::parse;
use solsift::patterns::{classify_all, ClassifyOptions, Outcome, PatternId, Verdict};
use solsift::report::triage_json;
use solsift::span::{SourceSpan, Span};
use solsift::triage::{ingest_report, triage};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_file(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).expect(name)
}

fn verdicts_of(name: &str, classes: &[VulnClass]) -> Vec<Verdict> {
    let src = corpus_file(name);
    let mut out = Vec::new();
    for m in build_model(&parse(&src), name) {
        out.extend(classify_all(&m, classes, &ClassifyOptions::default()));
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 1: appendix golden suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_appendix_golden_suite() {
    let start = std::time::Instant::now();

    // Escrow: two URV candidates, both cleared, with the guard and
    // terminal patterns among the matches
    let v = verdicts_of("Escrow.sol", &[VulnClass::Urv]);
    assert_eq!(v.len(), 2, "Escrow URV candidates");
    for verdict in &v {
        assert_eq!(verdict.outcome, Outcome::FlaggedFP);
        assert!(verdict
            .matched_patterns
            .contains(&PatternId::Urv3GuardCondition));
        assert!(verdict
            .matched_patterns
            .contains(&PatternId::Urv5TerminalCall));
    }

    // EasyInvest10: exactly one likely TP at the owner.send line and one
    // flagged FP {URV4} at kashout.send
    let v = verdicts_of("EasyInvest10.sol", &[VulnClass::Urv]);
    assert_eq!(v.len(), 2, "EasyInvest10 URV candidates");
    assert_eq!(v[0].candidate.line(), 9);
    assert_eq!(v[0].outcome, Outcome::LikelyTP);
    assert!(v[0].matched_patterns.is_empty());
    assert_eq!(v[1].candidate.line(), 13);
    assert_eq!(v[1].outcome, Outcome::FlaggedFP);
    assert_eq!(
        v[1].matched_patterns,
        BTreeSet::from([PatternId::Urv4RecipientIsCaller])
    );

    // Decore: the drain call is cleared with REE2 among the patterns
    let v = verdicts_of("Decore.sol", &[VulnClass::Ree]);
    let drain: Vec<&Verdict> = v.iter().filter(|x| x.candidate.line() == 40).collect();
    assert_eq!(drain.len(), 1, "Decore REE candidate at the call line");
    assert_eq!(drain[0].outcome, Outcome::FlaggedFP);
    assert!(drain[0]
        .matched_patterns
        .contains(&PatternId::Ree2RestrictiveModifier));

    // FifteenPlus: the day-wide interval check is cleared as TD1
    let v = verdicts_of("FifteenPlus.sol", &[VulnClass::Td]);
    let interval: Vec<&Verdict> = v.iter().filter(|x| x.candidate.line() == 20).collect();
    assert_eq!(interval.len(), 1);
    assert_eq!(interval[0].outcome, Outcome::FlaggedFP);
    assert_eq!(
        interval[0].matched_patterns,
        BTreeSet::from([PatternId::Td1IntervalCheck])
    );

    // CollectMoney: the send in the private helper is unreachable or
    // modifier-guarded
    let v = verdicts_of("CollectMoney.sol", &[VulnClass::Urv]);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].candidate.line(), 18);
    assert_eq!(v[0].outcome, Outcome::FlaggedFP);
    assert!(
        v[0].matched_patterns.contains(&PatternId::Urv1Unreachable)
            || v[0]
                .matched_patterns
                .contains(&PatternId::Urv2RestrictiveModifier)
    );

    // baseline supremacy: every labelled line is covered by a candidate of
    // its class (none of the bundled corpus is in not-analyzed scope)
    let labels = load_labels(&corpus_dir().join("labels.csv")).unwrap();
    for label in &labels {
        let src = corpus_file(&label.file);
        let covered = build_model(&parse(&src), &label.file)
            .iter()
            .flat_map(|m| detect_all(m, &[label.vuln]))
            .any(|c| c.line() == label.line);
        assert!(
            covered,
            "label {}:{} {} not covered by any candidate",
            label.file, label.line, label.vuln
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1, "golden suite took {elapsed:?}");
    println!("[PASS] criterion 1: appendix golden suite exact-matched in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// Criterion 2: paper-dataset reproduction (optional)
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_full_dataset_reproduction() {
    let Ok(dataset) = std::env::var("SOLSIFT_FULL_DATASET") else {
        println!(
            "[SKIP] criterion 2: full labelled dataset not present \
             (set SOLSIFT_FULL_DATASET=<dir with contracts/ and labels.csv> to enable)"
        );
        return;
    };
    let root = PathBuf::from(dataset);
    let labels = load_labels(&root.join("labels.csv")).expect("dataset labels.csv");
    let contracts_dir = root.join("contracts");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&contracts_dir)
        .expect("dataset contracts dir")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "sol"))
        .collect();
    paths.sort();

    let report_matrix = |class: VulnClass| -> ConfusionMatrix {
        let opts = AnalysisOptions {
            classes: vec![class],
            ..Default::default()
        };
        let report = analyze_paths(&paths, &opts);
        let verdicts: Vec<Verdict> = report
            .verdicts()
            .cloned()
            .map(|mut v| {
                let file = Path::new(&v.candidate.span.file)
                    .strip_prefix(&contracts_dir)
                    .map(|p| p.to_string_lossy().to_string())
                    .unwrap_or_else(|_| v.candidate.span.file.clone());
                v.candidate.span.file = file;
                v
            })
            .collect();
        let na: Vec<NotAnalyzedRecord> = report
            .not_analyzed()
            .cloned()
            .map(|mut r| {
                r.file = Path::new(&r.file)
                    .strip_prefix(&contracts_dir)
                    .map(|p| p.to_string_lossy().to_string())
                    .unwrap_or(r.file);
                r
            })
            .collect();
        evaluate(&verdicts, &na, &labels, class)
    };

    // dataset marginals: URV 5 TP + 23 TN, REE 3 + 79, TD 5 + 67
    let count = |class: VulnClass, label: Label| {
        labels
            .iter()
            .filter(|l| l.vuln == class && l.label == label)
            .count()
    };
    assert_eq!(count(VulnClass::Urv, Label::TP), 5);
    assert_eq!(count(VulnClass::Urv, Label::FP), 23);
    assert_eq!(count(VulnClass::Ree, Label::TP), 3);
    assert_eq!(count(VulnClass::Ree, Label::FP), 79);
    assert_eq!(count(VulnClass::Td, Label::TP), 5);
    assert_eq!(count(VulnClass::Td, Label::FP), 67);

    let urv = metrics(&report_matrix(VulnClass::Urv), 0.0);
    assert_eq!(urv.precision, Some(1.0), "URV precision");
    assert_eq!(urv.specificity, Some(1.0), "URV specificity");

    let ree_cm = report_matrix(VulnClass::Ree);
    let ree = metrics(&ree_cm, 0.0);
    assert_eq!(ree.specificity, Some(1.0), "REE specificity");
    // REE true positives may land in `missed` (function-local limitation):
    // precision is then undefined or zero, and the criterion passes on
    // specificity alone
    if let Some(p) = ree.precision {
        assert!(p == 0.0 || p == 1.0, "REE precision {p}");
    }

    let td = metrics(&report_matrix(VulnClass::Td), 0.0);
    let td_p = td.precision.expect("TD precision defined");
    let td_s = td.specificity.expect("TD specificity defined");
    assert!((td_p - 0.80).abs() <= 0.05, "TD precision {td_p}");
    assert!((td_s - 0.98).abs() <= 0.02, "TD specificity {td_s}");

    println!("[PASS] criterion 2: full-dataset reproduction hit the target metrics");
}

// ---------------------------------------------------------------------------
// Criterion 3: runtime envelope
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_runtime_envelope() {
    let names = [
        "Escrow.sol",
        "EasyInvest10.sol",
        "CollectMoney.sol",
        "Decore.sol",
        "FifteenPlus.sol",
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for i in 0..20 {
        let name = names[i % names.len()];
        let path = dir.path().join(format!("c{i:02}_{name}"));
        std::fs::write(&path, corpus_file(name)).unwrap();
        paths.push(path);
    }

    let start = std::time::Instant::now();
    let mut total_verdicts = 0usize;
    for class in VulnClass::ALL {
        let opts = AnalysisOptions {
            classes: vec![class],
            ..Default::default()
        };
        let report = analyze_paths(&paths, &opts);
        total_verdicts += report.verdicts().count();
    }
    let elapsed = start.elapsed();
    assert!(total_verdicts > 0);
    assert!(
        elapsed.as_secs() < 60,
        "analyzing 20 contracts per class took {elapsed:?}"
    );
    println!("[PASS] criterion 3: 20 contracts x 3 classes analyzed in {elapsed:?} (limit 60s)");
}

// ---------------------------------------------------------------------------
// Criterion 4a: guard-removal monotonicity + alpha-invariance (+ the
// restriction-soundness and reachability-monotonicity invariants that ride
// on the same generator)
// ---------------------------------------------------------------------------

#[test]
fn criterion_4a_guard_strip_and_alpha_invariance() {
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};

    let mut runner = TestRunner::new(Config {
        cases: 200,
        ..Config::default()
    });
    runner
        .run(&synth::synth_contract_strategy(), |sc| {
            // guard stripping: no permission-control pattern may survive
            let stripped = sc.render(true, false);
            let models = build_model(&parse(&stripped), "synth.sol");
            prop_assert_eq!(models.len(), 1, "synth source must parse:\n{}", stripped);
            let model = &models[0];
            for f in &model.functions {
                prop_assert!(
                    !f.restriction.restricted,
                    "stripped function `{}` still restricted in:\n{}",
                    f.name(),
                    stripped
                );
            }
            let verdicts = classify_all(model, &VulnClass::ALL, &ClassifyOptions::default());
            let banned = [
                PatternId::Urv1Unreachable,
                PatternId::Urv2RestrictiveModifier,
                PatternId::Urv3GuardCondition,
                PatternId::Ree1Unreachable,
                PatternId::Ree2RestrictiveModifier,
                PatternId::Ree3GuardCondition,
            ];
            for v in &verdicts {
                for p in &banned {
                    prop_assert!(
                        !v.matched_patterns.contains(p),
                        "{p} on stripped contract at line {}:\n{}",
                        v.candidate.line(),
                        stripped
                    );
                }
            }

            // alpha-invariance: renaming locals and functions preserves the
            // multiset of (class, outcome, patterns)
            let original = sc.render(false, false);
            let renamed = sc.render(false, true);
            prop_assert_eq!(
                signature(&original),
                signature(&renamed),
                "alpha variance between:\n{}\nand:\n{}",
                original,
                renamed
            );

            // reachability monotonicity: adding a call edge from the public
            // root never shrinks the reachable set
            let with_edge = sc.render_with_extra_call(false);
            let base_model = &build_model(&parse(&original), "synth.sol")[0];
            let edge_model = &build_model(&parse(&with_edge), "synth.sol")[0];
            let base_reach = reach_names(base_model);
            let edge_reach = reach_names(edge_model);
            prop_assert!(
                base_reach.is_subset(&edge_reach),
                "reachable set shrank: {:?} vs {:?}\n{}",
                base_reach,
                edge_reach,
                with_edge
            );
            Ok(())
        })
        .unwrap();
    println!("[PASS] criterion 4a: guard-removal + alpha-invariance over 200 generated contracts");
}

fn signature(src: &str) -> Vec<(VulnClass, &'static str, BTreeSet<PatternId>)> {
    let mut sig = Vec::new();
    for m in build_model(&parse(src), "synth.sol") {
        for v in classify_all(&m, &VulnClass::ALL, &ClassifyOptions::default()) {
            let tag = match v.outcome {
                Outcome::LikelyTP => "tp",
                Outcome::FlaggedFP => "fp",
                Outcome::NotAnalyzed(_) => "na",
            };
            sig.push((v.candidate.vuln, tag, v.matched_patterns.clone()));
        }
    }
    sig.sort();
    sig
}

fn reach_names(model: &ContractModel) -> BTreeSet<String> {
    model
        .call_graph
        .reachable
        .iter()
        .map(|i| model.functions[*i].name().to_string())
        .collect()
}

// ---------------------------------------------------------------------------
// Criterion 4b: terminal-call / no-state-change-after oracle equivalence
// ---------------------------------------------------------------------------

/// Loop-bearing shapes the bundled corpus lacks; the oracle unrolls twice.
const LOOP_CASES: &str = r#"
contract Loops {
    uint total;
    address[] targets;
    event Paid(uint n);
    function sendInLoop(address a, uint n) public {
        for (uint i = 0; i < n; i++) {
            a.send(i);
            total += i;
        }
    }
    function writeThenLoop(address a, uint n) public {
        total = n;
        while (n > 0) {
            a.send(n);
            n = n - 1;
        }
    }
    function terminalAfterLoop(address a, uint n) public {
        while (n > 0) {
            n = n - 1;
        }
        a.send(n);
    }
    function emitOnlyLoop(address a, uint n) public {
        a.send(n);
        for (uint i = 0; i < n; i++) {
            emit Paid(i);
        }
    }
    function branchInLoop(address a, uint n) public {
        for (uint i = 0; i < n; i++) {
            if (i % 2 == 0) {
                a.send(i);
            } else {
                total = i;
            }
        }
    }
    function returnCutsLoop(address a, uint n) public {
        while (n > 0) {
            a.send(n);
            return;
        }
        total = 1;
    }
}
"#;

#[test]
fn criterion_4b_terminal_call_oracle() {
    let names = [
        "Escrow.sol",
        "EasyInvest10.sol",
        "CollectMoney.sol",
        "Decore.sol",
        "FifteenPlus.sol",
    ];
    let mut sources: Vec<(String, String)> = names
        .iter()
        .map(|n| (n.to_string(), corpus_file(n)))
        .collect();
    sources.push(("Loops.sol".to_string(), LOOP_CASES.to_string()));
    let mut functions_checked = 0usize;
    let mut sites_checked = 0usize;
    for (name, src) in &sources {
        for model in build_model(&parse(src), name) {
            for f in &model.functions {
                let Some(body) = &f.def.body else { continue };
                let Some(cfg) = &f.cfg else { continue };
                if solsift::model::cfg::countable_statements(body) > 8 {
                    continue;
                }
                if !synth::oracle_supported(body) {
                    continue;
                }
                functions_checked += 1;
                for site in synth::all_statement_spans(body) {
                    let after = solsift::model::cfg::statements_after(cfg, site)
                        .expect("site must exist in cfg");
                    let impl_urv5 = !solsift::model::cfg::writes_state_after(&after)
                        && !solsift::model::cfg::calls_out_after(&after);
                    let impl_ree5 = !solsift::model::cfg::writes_state_after(&after);
                    let (oracle_urv5, oracle_ree5) = synth::oracle_terminal(body, site, &model);
                    assert_eq!(
                        impl_urv5,
                        oracle_urv5,
                        "URV5 mismatch at {name} {}:{}",
                        f.name(),
                        site.line_start
                    );
                    assert_eq!(
                        impl_ree5,
                        oracle_ree5,
                        "REE5 mismatch at {name} {}:{}",
                        f.name(),
                        site.line_start
                    );
                    sites_checked += 1;
                }
            }
        }
    }
    assert!(
        functions_checked >= 20,
        "checked {functions_checked} functions"
    );
    println!(
        "[PASS] criterion 4b: terminal-call oracle agreed on {sites_checked} sites across {functions_checked} corpus functions"
    );
}

// ---------------------------------------------------------------------------
// Criterion 4c: taint fixpoint + transitive-closure oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_4c_taint_closure_oracle() {
    use proptest::test_runner::{Config, TestRunner};

    let mut runner = TestRunner::new(Config {
        cases: 100,
        ..Config::default()
    });
    runner
        .run(&synth::assignment_graph_strategy(), |graph| {
            use proptest::prelude::*;
            let src = graph.render();
            let models = build_model(&parse(&src), "graph.sol");
            prop_assert_eq!(models.len(), 1, "graph source must parse:\n{}", src);
            let f = models[0].function("f").expect("function f");
            let expected = graph.closure();
            let actual: BTreeSet<String> = f
                .taint
                .tainted
                .iter()
                .filter(|t| t.starts_with('v'))
                .cloned()
                .collect();
            prop_assert_eq!(&actual, &expected, "taint closure mismatch for:\n{}", src);
            // fixpoint stability: one more propagation round adds nothing
            let state_names: BTreeSet<String> = models[0].state_vars.keys().cloned().collect();
            let tainted_state: BTreeSet<String> = state_names
                .iter()
                .filter(|n| f.taint.tainted.contains(*n))
                .cloned()
                .collect();
            let (locals, introduced) =
                solsift::model::taint::propagate_once(f, &tainted_state, &state_names);
            prop_assert!(introduced.is_empty());
            let stable: BTreeSet<String> = locals
                .iter()
                .filter(|t| t.starts_with('v'))
                .cloned()
                .chain(tainted_state.iter().cloned())
                .collect();
            prop_assert_eq!(&stable, &expected);
            Ok(())
        })
        .unwrap();
    println!("[PASS] criterion 4c: taint closure matched brute force on 100 assignment graphs");
}

// ---------------------------------------------------------------------------
// Criterion 4d: parser fuzz
// ---------------------------------------------------------------------------

#[test]
fn criterion_4d_parser_fuzz() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0501_51f7);
    let bases: Vec<String> = [
        "Escrow.sol",
        "EasyInvest10.sol",
        "CollectMoney.sol",
        "Decore.sol",
        "FifteenPlus.sol",
    ]
    .iter()
    .map(|n| corpus_file(n))
    .collect();

    let mut diagnostics_seen = 0usize;
    for i in 0..10_000 {
        let base = &bases[i % bases.len()];
        let mut bytes = base.as_bytes().to_vec();
        let mutations = rng.gen_range(1..=4);
        for _ in 0..mutations {
            if bytes.is_empty() {
                break;
            }
            match rng.gen_range(0..5) {
                0 => {
                    // flip a byte
                    let at = rng.gen_range(0..bytes.len());
                    bytes[at] = rng.gen();
                }
                1 => {
                    // insert junk
                    let at = rng.gen_range(0..=bytes.len());
                    let junk: Vec<u8> = (0..rng.gen_range(1..8)).map(|_| rng.gen()).collect();
                    bytes.splice(at..at, junk);
                }
                2 => {
                    // delete a span
                    let at = rng.gen_range(0..bytes.len());
                    let len = rng.gen_range(1..=16.min(bytes.len() - at));
                    bytes.drain(at..at + len);
                }
                3 => {
                    // duplicate a span
                    let at = rng.gen_range(0..bytes.len());
                    let len = rng.gen_range(1..=32.min(bytes.len() - at));
                    let dup: Vec<u8> = bytes[at..at + len].to_vec();
                    bytes.splice(at..at, dup);
                }
                _ => {
                    // truncate
                    let keep = rng.gen_range(0..=bytes.len());
                    bytes.truncate(keep);
                }
            }
        }
        let text = String::from_utf8_lossy(&bytes).to_string();
        // token spans plus trivia gaps must reproduce the input exactly
        let tokens = solsift::lexer::tokenize(&text);
        let mut rebuilt = String::new();
        let mut pos = 0usize;
        for t in &tokens {
            rebuilt.push_str(&text[pos..t.span.byte_start]);
            rebuilt.push_str(&text[t.span.byte_start..t.span.byte_end]);
            pos = t.span.byte_end;
        }
        rebuilt.push_str(&text[pos..]);
        assert_eq!(rebuilt, text, "token-span coverage broke on mutation #{i}");
        // must terminate without panicking and produce span-valid diagnostics
        let unit = parse(&text);
        for d in &unit.diagnostics {
            assert!(
                d.span.is_valid_for(&text),
                "diagnostic span out of bounds on mutation #{i}"
            );
            diagnostics_seen += 1;
        }
        // models must also build without panicking
        let _ = build_model(&unit, "fuzz.sol");
    }
    assert!(diagnostics_seen > 0, "fuzz never produced a diagnostic");
    println!(
        "[PASS] criterion 4d: 10000 mutated inputs parsed without crashes ({diagnostics_seen} span-valid diagnostics)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: metrics oracle
// ---------------------------------------------------------------------------

fn synth_verdict(file: &str, line: u32, vuln: VulnClass, outcome: Outcome) -> Verdict {
    let span = Span::new(line, 1, line, 2, 0, 0);
    let matched = match (&outcome, vuln) {
        (Outcome::FlaggedFP, VulnClass::Urv) => BTreeSet::from([PatternId::Urv3GuardCondition]),
        (Outcome::FlaggedFP, VulnClass::Ree) => BTreeSet::from([PatternId::Ree5NoStateChangeAfter]),
        (Outcome::FlaggedFP, VulnClass::Td) => BTreeSet::from([PatternId::Td1IntervalCheck]),
        _ => BTreeSet::new(),
    };
    Verdict {
        candidate: solsift::detect::Candidate {
            vuln,
            span: SourceSpan::new(file, span),
            stmt_span: span,
            contract: "C".into(),
            function: "f".into(),
            call_kind: match vuln {
                VulnClass::Td => CallKind::TimestampUse,
                _ => CallKind::Send,
            },
            receiver: None,
            receiver_expr: None,
            value_arg: None,
            gas_stipend: false,
            analyzed: true,
            not_analyzed_reason: None,
        },
        outcome,
        matched_patterns: matched,
        justification: Vec::new(),
        stipend_suppressed: false,
    }
}

/// Independent matcher: per label, one linear scan applying the counting
/// rules directly.
fn brute_force_matrix(
    verdicts: &[Verdict],
    na: &[NotAnalyzedRecord],
    labels: &[GroundTruthLabel],
    vuln: VulnClass,
) -> (usize, usize, usize, usize, usize) {
    let (mut tp, mut fp, mut tn, mut fn_, mut missed) = (0, 0, 0, 0, 0);
    for l in labels {
        if l.vuln != vuln {
            continue;
        }
        let mut best: Option<u8> = None; // 0 = tp-verdict, 1 = fp-verdict, 2 = na-verdict
        for v in verdicts {
            if v.candidate.vuln != vuln
                || v.candidate.span.file != l.file
                || v.candidate.line() != l.line
            {
                continue;
            }
            let rank = match v.outcome {
                Outcome::LikelyTP => 0,
                Outcome::FlaggedFP => 1,
                Outcome::NotAnalyzed(_) => 2,
            };
            best = Some(best.map_or(rank, |b| b.min(rank)));
        }
        let in_scope = na
            .iter()
            .any(|r| r.file == l.file && r.span.line_start <= l.line && l.line <= r.span.line_end);
        match (best, in_scope) {
            (Some(0), _) => match l.label {
                Label::TP => tp += 1,
                Label::FP => fp += 1,
            },
            (Some(1), _) => match l.label {
                Label::TP => fn_ += 1,
                Label::FP => tn += 1,
            },
            (Some(2), _) | (None, true) => missed += 1,
            (None, false) => match l.label {
                Label::TP => fn_ += 1,
                Label::FP => tn += 1,
            },
            _ => unreachable!(),
        }
    }
    (tp, fp, tn, fn_, missed)
}

#[test]
fn criterion_5_metrics_oracle() {
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};

    // the worked ratios reproduce exactly from their confusion counts
    let coarse = ConfusionMatrix {
        tp: 5,
        fp: 21,
        tn: 2,
        ..Default::default()
    };
    let m = metrics(&coarse, 0.0);
    assert_eq!(m.precision, Some(5.0 / 26.0));
    assert_eq!(m.specificity, Some(2.0 / 23.0));
    let filtered = ConfusionMatrix {
        tp: 4,
        fp: 1,
        tn: 61,
        fn_: 1,
        ..Default::default()
    };
    let m = metrics(&filtered, 0.0);
    assert_eq!(m.precision, Some(0.80));
    assert_eq!(m.specificity, Some(61.0 / 62.0));

    // random synthetic verdict/label sets of size <= 20
    let entry = (1u32..=20, 0u8..3, proptest::bool::ANY);
    let strategy = (
        proptest::collection::vec(entry, 0..=20),
        proptest::collection::vec((1u32..=20, proptest::bool::ANY), 0..=20),
        proptest::collection::vec(1u32..=20, 0..=2),
    );
    let mut runner = TestRunner::new(Config {
        cases: 100,
        ..Config::default()
    });
    runner
        .run(&strategy, |(verdict_specs, label_specs, na_lines)| {
            let verdicts: Vec<Verdict> = verdict_specs
                .iter()
                .map(|(line, kind, _)| {
                    let outcome = match kind {
                        0 => Outcome::LikelyTP,
                        1 => Outcome::FlaggedFP,
                        _ => Outcome::NotAnalyzed("function-local-scope".into()),
                    };
                    synth_verdict("A.sol", *line, VulnClass::Urv, outcome)
                })
                .collect();
            let mut labels = Vec::new();
            let mut seen = BTreeSet::new();
            for (line, is_tp) in &label_specs {
                if !seen.insert(*line) {
                    continue; // labels are unique per (file, line, vuln)
                }
                labels.push(GroundTruthLabel {
                    file: "A.sol".into(),
                    line: *line,
                    vuln: VulnClass::Urv,
                    label: if *is_tp { Label::TP } else { Label::FP },
                });
            }
            let na: Vec<NotAnalyzedRecord> = na_lines
                .iter()
                .map(|l| NotAnalyzedRecord {
                    file: "A.sol".into(),
                    contract: "C".into(),
                    function: "g".into(),
                    span: Span::new(*l, 1, *l + 1, 1, 0, 0),
                    reason: "opaque-function-body".into(),
                })
                .collect();

            let cm = evaluate(&verdicts, &na, &labels, VulnClass::Urv);
            let (tp, fp, tn, fn_, missed) =
                brute_force_matrix(&verdicts, &na, &labels, VulnClass::Urv);
            prop_assert_eq!(cm.tp, tp);
            prop_assert_eq!(cm.fp, fp);
            prop_assert_eq!(cm.tn, tn);
            prop_assert_eq!(cm.fn_, fn_);
            prop_assert_eq!(cm.missed, missed);
            // count conservation
            prop_assert_eq!(cm.total(), labels.len());
            // metric bounds
            let m = metrics(&cm, 0.0);
            for r in [m.precision, m.specificity, m.sensitivity]
                .into_iter()
                .flatten()
            {
                prop_assert!((0.0..=1.0).contains(&r));
            }
            Ok(())
        })
        .unwrap();
    println!("[PASS] criterion 5: evaluate/metrics matched the brute-force matcher on 100 sets");
}

// ---------------------------------------------------------------------------
// Criterion 6: triage fixtures
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_triage_fixtures() {
    let corpus = corpus_dir();
    let names = [
        "Escrow.sol",
        "EasyInvest10.sol",
        "CollectMoney.sol",
        "Decore.sol",
        "FifteenPlus.sol",
    ];
    let mut verdicts: Vec<Verdict> = Vec::new();
    let mut analyzed: Vec<String> = Vec::new();
    for name in names {
        analyzed.push(name.to_string());
        let src = corpus_file(name);
        for m in build_model(&parse(&src), name) {
            verdicts.extend(classify_all(
                &m,
                &VulnClass::ALL,
                &ClassifyOptions::default(),
            ));
        }
    }
    let labels = load_labels(&corpus.join("labels.csv")).unwrap();

    let (findings, diags) = ingest_report(&corpus.join("reports/scanner_a.json")).unwrap();
    assert!(diags.is_empty(), "clean fixture must ingest cleanly");

    // conservation: one result per finding
    let results = triage(&findings, &verdicts, &analyzed);
    assert_eq!(results.len(), findings.len());

    // idempotence: a second run renders byte-identically
    let again = triage(&findings, &verdicts, &analyzed);
    let a = serde_json::to_string(&triage_json(&results)).unwrap();
    let b = serde_json::to_string(&triage_json(&again)).unwrap();
    assert_eq!(a, b);

    // every probable false alarm maps to a ground-truth FP label: no true
    // positive is ever suppressed
    let mut false_alarms = 0usize;
    for r in &results {
        if r.judgement == solsift::triage::Judgement::ProbableFalseAlarm {
            false_alarms += 1;
            let label = labels.iter().find(|l| {
                l.file == r.finding.file
                    && l.line == r.finding.line
                    && Some(l.vuln) == r.finding.vuln
            });
            assert_eq!(
                label.map(|l| l.label),
                Some(Label::FP),
                "false alarm at {}:{} lacks an FP ground-truth label",
                r.finding.file,
                r.finding.line
            );
            assert!(
                !r.patterns.is_empty(),
                "probable false alarm must cite at least one pattern"
            );
        }
    }
    assert!(false_alarms >= 5, "fixture should exercise several alarms");

    // edge-case fixture: malformed records are dropped with diagnostics,
    // never aborting the batch
    let (edge, edge_diags) = ingest_report(&corpus.join("reports/scanner_edge.json")).unwrap();
    assert!(!edge_diags.is_empty());
    let edge_results = triage(&edge, &verdicts, &analyzed);
    assert_eq!(edge_results.len(), edge.len());

    println!(
        "[PASS] criterion 6: triage conserved {} findings, idempotent, {} false alarms all on FP labels",
        results.len(),
        false_alarms
    );
}
