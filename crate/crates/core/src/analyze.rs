// SPDX-License-Identifier: Apache-2.0

//! The end-to-end pipeline: debug model + sources (+ trace) to a report.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::coverage::{
    coverage_ratio, describe_lines, knowledge_extend, line_availability_all, naive_byte_coverage,
    unshrunk_line_coverage, CoverageValue, VariableFacts, VariableIdentity,
};
use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::lines::{FileId, LineSet};
use crate::model::{load_binary, load_fixture, NeutralDebugModel, VariableEntry};
use crate::reachability::{apply_filter, load_trace, ExecutedLines};
pub use crate::report::Mode;
use crate::report::{
    CoverageReport, Decimal6, ExcludedRecord, InputId, LineRecord, MetricRecord, ReportMeta, VariableRecord,
    REPORT_TOOL,
};
use crate::source::{computational_lines, parse_source, variable_source_facts, ComputationalLineSet, VariableSourceFacts};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Binary(PathBuf),
    Fixture(PathBuf),
}

impl Input {
    pub fn path(&self) -> &Path {
        match self {
            Input::Binary(p) | Input::Fixture(p) => p,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Input::Binary(_) => "binary",
            Input::Fixture(_) => "fixture",
        }
    }
}

/// Metrics to compute. The accurate metric is always computed: it orders
/// the report and decides exclusion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricSet {
    pub unshrunk: bool,
    pub naive_bytes: bool,
}

impl MetricSet {
    pub const NAMES: [&'static str; 3] = ["accurate", "unshrunk", "naive-bytes"];

    pub fn parse<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut set = MetricSet::default();
        for n in names {
            match n.trim() {
                "accurate" => {}
                "unshrunk" => set.unshrunk = true,
                "naive-bytes" => set.naive_bytes = true,
                other => {
                    return Err(Error::Validation(format!(
                        "unknown metric `{other}` (expected one of {})",
                        Self::NAMES.join(", ")
                    )))
                }
            }
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<String> {
        let mut v = vec!["accurate".to_string()];
        if self.unshrunk {
            v.push("unshrunk".into());
        }
        if self.naive_bytes {
            v.push("naive-bytes".into());
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub input: Input,
    pub source_root: PathBuf,
    pub mode: Mode,
    pub metrics: MetricSet,
    pub trace: Option<PathBuf>,
    pub knowledge_extension: bool,
    /// Fail instead of warning when sources or trace files do not resolve.
    pub strict: bool,
    pub timestamp: Option<String>,
}

impl AnalysisOptions {
    pub fn new(input: Input, source_root: impl Into<PathBuf>) -> Self {
        AnalysisOptions {
            input,
            source_root: source_root.into(),
            mode: Mode::Variable,
            metrics: MetricSet::default(),
            trace: None,
            knowledge_extension: false,
            strict: false,
            timestamp: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: CoverageReport,
    /// Facts for every variable that made it into the report, after
    /// filtering and extension.
    pub facts: Vec<VariableFacts>,
    pub warnings: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn input_id(kind: &str, path: &Path) -> Result<InputId> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(InputId {
        kind: kind.into(),
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Finds `path` under `root`: the path itself joined to the root, then ever
/// shorter suffixes of it.
fn locate_source(root: &Path, path: &str) -> Option<PathBuf> {
    let direct = Path::new(path);
    if direct.is_absolute() && direct.starts_with(root) && direct.is_file() {
        return Some(direct.to_path_buf());
    }
    let parts: Vec<&str> = path.split('/').filter(|p| !p.is_empty() && *p != "..").collect();
    (0..parts.len())
        .map(|i| parts[i..].iter().fold(root.to_path_buf(), |acc, p| acc.join(p)))
        .find(|p| p.is_file())
}

struct SourceFile {
    comp: ComputationalLineSet,
    facts: Vec<VariableSourceFacts>,
}

/// A debug-side variable joined with its source facts.
struct Joined<'a> {
    facts: VariableFacts,
    kind: &'static str,
    file: Option<String>,
    decl_line: Option<u32>,
    naive: Option<CoverageValue>,
    entries: Vec<&'a VariableEntry>,
}

/// Runs the whole pipeline described by `opts`.
pub fn analyze(opts: &AnalysisOptions) -> Result<Analysis> {
    let model = match &opts.input {
        Input::Binary(p) => load_binary(p)?,
        Input::Fixture(p) => load_fixture(p)?,
    };
    let input = input_id(opts.input.kind(), opts.input.path())?;
    let (executed, trace_id) = match &opts.trace {
        Some(p) => {
            let trace = load_trace(p).map_err(|e| in_file(p, e))?;
            (Some(trace.resolve(model.files())), Some(input_id("trace", p)?))
        }
        None => (None, None),
    };
    let meta = ReportMeta {
        tool: REPORT_TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input,
        source_root: opts.source_root.display().to_string(),
        mode: opts.mode,
        reachability: if executed.is_some() { "trace" } else { "static" }.into(),
        trace: trace_id,
        knowledge_extension: opts.knowledge_extension,
        metrics: opts.metrics.names(),
        timestamp: opts.timestamp.clone(),
    };
    analyze_model(&model, opts, meta, executed.as_ref())
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        e @ (Error::Io { .. } | Error::InFile { .. }) => e,
        e => Error::InFile {
            path: path.to_path_buf(),
            source: Box::new(e),
        },
    }
}

/// The pipeline after loading: `meta` is copied into the report verbatim.
pub fn analyze_model(
    model: &NeutralDebugModel,
    opts: &AnalysisOptions,
    meta: ReportMeta,
    executed: Option<&ExecutedLines>,
) -> Result<Analysis> {
    let mut warnings = Vec::new();
    if let Some(ex) = executed {
        for p in &ex.unresolved {
            warnings.push(format!("trace path `{p}` matches no file in the debug info"));
        }
    }

    // Only files that declare a variable need a source baseline.
    let decl_files: BTreeSet<FileId> = model
        .functions()
        .iter()
        .flat_map(|f| &f.variables)
        .filter_map(|v| v.decl_line.map(|k| k.file))
        .collect();
    let mut sources: BTreeMap<FileId, SourceFile> = BTreeMap::new();
    let mut missing: BTreeSet<FileId> = BTreeSet::new();
    for id in decl_files {
        let path = model.files().path(id).expect("validated file id");
        match locate_source(&opts.source_root, path) {
            Some(found) => {
                let ast = parse_source(&found, id).map_err(|e| in_file(&found, e))?;
                sources.insert(
                    id,
                    SourceFile {
                        comp: computational_lines(&ast),
                        facts: variable_source_facts(&ast),
                    },
                );
            }
            None => {
                warnings.push(format!("source file `{path}` not found under {}", opts.source_root.display()));
                missing.insert(id);
            }
        }
    }
    if opts.strict && !warnings.is_empty() {
        return Err(Error::SourceMissing(warnings.join("; ")));
    }

    let path_of = |id: FileId| model.files().path(id).map(str::to_owned);
    let mut excluded = Vec::new();
    let mut joined: Vec<Joined<'_>> = Vec::new();
    let mut matched_source: BTreeSet<(FileId, usize)> = BTreeSet::new();

    for function in model.functions() {
        // All instances of one source variable, keyed by (name, decl).
        let mut groups: BTreeMap<(&str, Option<crate::lines::SourceLineKey>), Vec<&VariableEntry>> = BTreeMap::new();
        for v in &function.variables {
            groups.entry((v.name.as_str(), v.decl_line)).or_default().push(v);
        }
        for ((name, decl), entries) in groups {
            let exclude = |reason: &str| ExcludedRecord {
                function: function.name.clone(),
                name: name.to_owned(),
                file: decl.and_then(|d| path_of(d.file)),
                decl_line: decl.map(|d| d.line),
                reason: reason.into(),
            };
            let Some(decl) = decl else {
                excluded.push(exclude("no-source-match"));
                continue;
            };
            if missing.contains(&decl.file) {
                excluded.push(exclude("source-missing"));
                continue;
            }
            let src = &sources[&decl.file];
            let in_function = |f: &&VariableSourceFacts| f.function == function.name && f.name == name;
            let exact = src.facts.iter().position(|f| in_function(&f) && f.decl_line == decl);
            let by_name: Vec<usize> = src
                .facts
                .iter()
                .enumerate()
                .filter(|(_, f)| in_function(f))
                .map(|(i, _)| i)
                .collect();
            let idx = match (exact, by_name.as_slice()) {
                (Some(i), _) => i,
                (None, [only]) => *only,
                _ => {
                    excluded.push(exclude("no-source-match"));
                    continue;
                }
            };
            matched_source.insert((decl.file, idx));
            let sf = &src.facts[idx];
            let mut facts = build_facts(model, function, &entries, sf, decl);
            if let Some(ex) = executed {
                facts = apply_filter(&facts, ex);
            }
            if opts.knowledge_extension {
                facts.described = knowledge_extend(&facts.described, &facts.coverable());
                facts.scope_described = knowledge_extend(&facts.scope_described, &facts.scope);
            }
            let naive = opts.metrics.naive_bytes.then(|| {
                entries
                    .iter()
                    .map(|e| {
                        let scope = if e.scope_ranges.is_empty() {
                            function.instance_ranges(&e.instance_id)
                        } else {
                            &e.scope_ranges
                        };
                        naive_byte_coverage(e, scope)
                    })
                    .fold(CoverageValue::default(), |a, b| a + b)
            });
            joined.push(Joined {
                facts,
                kind: sf.kind.as_str(),
                file: path_of(decl.file),
                decl_line: Some(decl.line),
                naive,
                entries,
            });
        }
    }

    for (id, src) in &sources {
        for (i, sf) in src.facts.iter().enumerate() {
            if !matched_source.contains(&(*id, i)) {
                excluded.push(ExcludedRecord {
                    function: sf.function.clone(),
                    name: sf.name.clone(),
                    file: path_of(*id),
                    decl_line: Some(sf.decl_line.line),
                    reason: "not-in-debug-info".into(),
                });
            }
        }
    }

    let mut records = Vec::new();
    let mut kept = Vec::new();
    for j in joined {
        let accurate = coverage_ratio(&j.facts.described, &j.facts.scope, &j.facts.defined);
        if !accurate.is_defined() {
            excluded.push(ExcludedRecord {
                function: j.facts.identity.function.clone(),
                name: j.facts.identity.name.clone(),
                file: j.file,
                decl_line: j.decl_line,
                reason: "undefined-coverage".into(),
            });
            continue;
        }
        debug_assert!(!j.entries.is_empty());
        records.push(VariableRecord {
            function: j.facts.identity.function.clone(),
            name: j.facts.identity.name.clone(),
            file: j.file,
            decl_line: j.decl_line,
            kind: j.kind.into(),
            instance_count: j.facts.instance_count,
            numerator: accurate.numerator,
            denominator: accurate.denominator,
            ratio: Decimal6(accurate.ratio_f64().expect("defined")),
            unshrunk: opts
                .metrics
                .unshrunk
                .then(|| MetricRecord::from(unshrunk_line_coverage(&j.facts.scope_described, &j.facts.scope))),
            naive_bytes: j.naive.map(MetricRecord::from),
        });
        kept.push(j.facts);
    }

    let lines = match opts.mode {
        Mode::Variable => Vec::new(),
        Mode::Line => line_records(model, &sources, &kept, executed),
    };

    let report = CoverageReport::new(meta, records, lines, excluded);
    Ok(Analysis {
        report,
        facts: kept,
        warnings,
    })
}

fn build_facts(
    model: &NeutralDebugModel,
    function: &crate::model::Function,
    entries: &[&VariableEntry],
    sf: &VariableSourceFacts,
    decl: crate::lines::SourceLineKey,
) -> VariableFacts {
    let scope = sf.scope_lines.clone();
    let defined = sf.defined_lines.clone();
    let coverable: LineSet = scope.intersection(&defined).copied().collect();
    VariableFacts {
        identity: VariableIdentity {
            function: function.name.clone(),
            name: sf.name.clone(),
            decl: Some(decl),
        },
        described: describe_lines(model, function, entries, &coverable),
        scope_described: describe_lines(model, function, entries, &scope),
        scope,
        defined,
        instance_count: entries.len() as u32,
    }
}

/// Per-line availability over every computational line of the analysed
/// files (executed lines only, under a trace).
fn line_records(
    model: &NeutralDebugModel,
    sources: &BTreeMap<FileId, SourceFile>,
    facts: &[VariableFacts],
    executed: Option<&ExecutedLines>,
) -> Vec<LineRecord> {
    let avail = line_availability_all(facts);
    let mut all: BTreeSet<crate::lines::SourceLineKey> = avail.keys().copied().collect();
    for src in sources.values() {
        all.extend(
            src.comp
                .lines
                .iter()
                .filter(|k| executed.is_none_or(|ex| ex.lines.contains(k)))
                .copied(),
        );
    }
    all.into_iter()
        .map(|k| {
            let v = avail.get(&k).copied().unwrap_or_default();
            LineRecord {
                file: model.files().path(k.file).unwrap_or("?").to_owned(),
                line: k.line,
                numerator: v.numerator,
                denominator: v.denominator,
                ratio: v.ratio_f64().map(Decimal6),
            }
        })
        .collect()
}

/// Σ of the report's per-variable numerators.
pub fn variable_numerator_sum(report: &CoverageReport) -> Fraction {
    report.variables.iter().map(|v| v.numerator).sum()
}

/// Σ of the report's per-line numerators.
pub fn line_numerator_sum(report: &CoverageReport) -> Fraction {
    report.lines.iter().map(|l| l.numerator).sum()
}
