// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one line per criterion and fails if any fails.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use proptest::collection::{btree_map, btree_set, vec};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use varcov_core::{
    analyze, classify_lifecycle, coverage_ratio, knowledge_extend, line_availability_all, pearson,
    unshrunk_line_coverage, AnalysisOptions, CoverageReport, Error, FileId, Fraction, Implication, Input,
    LifecycleName, LineFractions, LineSet, MetricSet, SourceLineKey,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn varcov(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_varcov")).args(args).output().expect("run varcov")
}

fn analyze_cli(args: &[&str]) -> Result<CoverageReport, String> {
    let out = varcov(args);
    if !out.status.success() {
        return Err(format!("varcov exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    CoverageReport::from_json(&String::from_utf8_lossy(&out.stdout)).map_err(|e| e.to_string())
}

fn key(line: u32) -> SourceLineKey {
    SourceLineKey::new(FileId(0), line)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn annotated_example_golden() -> Outcome {
    let f = fixtures();
    let start = Instant::now();
    let report = analyze_cli(&[
        "analyze",
        "--fixture",
        f.join("annotated.dbgfx").to_str().unwrap(),
        "--source-root",
        f.to_str().unwrap(),
    ])?;
    let elapsed = start.elapsed();
    let mut got: Vec<(String, String)> = report
        .variables
        .iter()
        .map(|v| (v.name.clone(), format!("{}/{}", v.numerator, v.denominator)))
        .collect();
    got.sort();
    let want: Vec<(String, String)> = [("i", "2/2"), ("p", "5/6"), ("x", "4/4"), ("y", "4/5")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    check(got == want, || format!("got {got:?}"))?;
    check(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("p=5/6 x=4/4 y=4/5 i=2/2 in {} ms", elapsed.as_millis()))
}

fn line_mode_consistency() -> Outcome {
    let f = fixtures();
    let common = ["--fixture", f.join("annotated.dbgfx").to_str().unwrap(), "--source-root", f.to_str().unwrap()]
        .map(|s| s.to_string());
    let args = |extra: &[&str]| -> Vec<String> {
        let mut v = vec!["analyze".to_string()];
        v.extend(common.iter().cloned());
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let line_args = args(&["--mode", "line"]);
    let line = analyze_cli(&line_args.iter().map(String::as_str).collect::<Vec<_>>())?;
    let var_args = args(&[]);
    let var = analyze_cli(&var_args.iter().map(String::as_str).collect::<Vec<_>>())?;
    let at = |l: u32| {
        line.lines
            .iter()
            .find(|r| r.line == l)
            .map(|r| format!("{}/{}", r.numerator, r.denominator))
            .unwrap_or_default()
    };
    check(at(5) == "3/3", || format!("line 5: {}", at(5)))?;
    check(at(10) == "1/3", || format!("line 10: {}", at(10)))?;
    let line_sum: Fraction = line.lines.iter().map(|r| r.numerator).sum();
    let var_sum: Fraction = var.variables.iter().map(|r| r.numerator).sum();
    check(line_sum == var_sum, || format!("line sum {line_sum} != variable sum {var_sum}"))?;
    Ok(format!("line 5 = 3/3, line 10 = 1/3, numerator sums {line_sum} = {var_sum}"))
}

/// A straight-line function where `v` is declared at line 3 and first
/// assigned after `pre` statements.
fn register_vs_stack_case(dir: &Path, pre: usize, post: usize, holes: &BTreeSet<usize>) -> Result<(), String> {
    let mut src = String::from("int f(int a)\n{\n  int v;\n");
    for _ in 0..pre {
        src.push_str("  a = a + 1;\n");
    }
    src.push_str("  v = a;\n");
    for _ in 0..post {
        src.push_str("  a = v + a;\n");
    }
    src.push_str("  return a;\n}\n");
    // computational lines: 1, then 4.. through the return line
    let body: Vec<u32> = (4..4 + (pre + post + 2) as u32).collect();
    let def_line = 4 + pre as u32;
    let end = 4 * (body.len() as u64 + 2);
    let mut fx = format!("file 0 gen.c\nfunc f 0x0 {end:#x}\nrow 0x0 0 1 1\n");
    for (i, l) in body.iter().enumerate() {
        fx.push_str(&format!("row {:#x} 0 {l} 1\n", 4 * (i + 1)));
    }
    fx.push_str(&format!("row {:#x} 0 {} 1\n", end - 4, body.last().unwrap() + 1));
    fx.push_str("var f ool param a decl 0:1\nvar f ool local v decl 0:3\ndesc f ool a 0x0 0x4 reg\n");
    let write_desc = |from_line: u32| -> String {
        body.iter()
            .enumerate()
            .filter(|(i, l)| **l >= from_line && !holes.contains(i))
            .map(|(i, _)| format!("desc f ool v {:#x} {:#x} mem\n", 4 * (i + 1), 4 * (i + 2)))
            .collect()
    };
    std::fs::write(dir.join("gen.c"), &src).map_err(|e| e.to_string())?;
    let mut results = Vec::new();
    for (label, from) in [("stack", body[0]), ("register", def_line)] {
        let path = dir.join(format!("{label}.dbgfx"));
        std::fs::write(&path, format!("{fx}{}", write_desc(from))).map_err(|e| e.to_string())?;
        let mut opts = AnalysisOptions::new(Input::Fixture(path), dir);
        opts.metrics = MetricSet::parse(["unshrunk"]).unwrap();
        let a = analyze(&opts).map_err(|e| e.to_string())?;
        let v = a.report.variables.iter().find(|r| r.name == "v").ok_or("v missing")?;
        let u = v.unshrunk.clone().unwrap();
        results.push((v.exact_ratio(), u.numerator / u.denominator));
    }
    let d_count = (post + 2) as u128;
    let described_in_d = d_count - holes.iter().filter(|i| **i >= pre).count() as u128;
    let expected = Fraction::new(described_in_d, d_count);
    let (stack, register) = (results[0], results[1]);
    check(stack.0 == expected && register.0 == expected, || {
        format!("pre={pre} post={post} holes={holes:?}: accurate stack {} register {} expected {expected}", stack.0, register.0)
    })?;
    if pre > 0 {
        check(register.1 < stack.1, || {
            format!("pre={pre}: unshrunk register {} not below stack {}", register.1, stack.1)
        })?;
    } else {
        check(register.1 == stack.1, || format!("D = S but unshrunk differs: {} vs {}", register.1, stack.1))?;
    }
    Ok(())
}

fn register_vs_stack() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runner = TestRunner::new(Config {
        cases: 128,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (0usize..6, 0usize..8)
        .prop_flat_map(|(pre, post)| (Just(pre), Just(post), btree_set(pre..pre + post + 2, 0..3)));
    let strict = Cell::new(0);
    let total = Cell::new(0);
    let res = runner.run(&strategy, |(pre, post, holes)| {
        total.set(total.get() + 1);
        if pre > 0 {
            strict.set(strict.get() + 1);
        }
        register_vs_stack_case(dir.path(), pre, post, &holes).map_err(TestCaseError::fail)
    });
    res.map_err(|e| e.to_string())?;
    Ok(format!("{} generated fixtures, {} with D strictly inside S", total.get(), strict.get()))
}

fn line_set(lines: &BTreeSet<u32>) -> LineSet {
    lines.iter().map(|l| key(*l)).collect()
}

fn arb_facts() -> impl Strategy<Value = (LineSet, LineSet, LineFractions)> {
    (btree_set(1u32..60, 0..25), btree_set(1u32..60, 0..25), btree_map(1u32..80, (0u128..12, 1u128..6), 0..40))
        .prop_map(|(s, d, b)| {
            let b: LineFractions = b
                .into_iter()
                .filter(|(_, (n, _))| *n > 0)
                .map(|(l, (n, k))| (key(l), Fraction::new(n, k)))
                .collect();
            (line_set(&s), line_set(&d), b)
        })
}

/// Facts whose `B` is a random subset of `S ∩ D` with fractions in (0, 1].
fn arb_described() -> impl Strategy<Value = (LineSet, LineSet, LineFractions)> {
    (btree_set(1u32..40, 1..25), btree_set(1u32..40, 1..25), vec((any::<bool>(), 1u128..5, 0u128..5), 40)).prop_map(
        |(s, d, picks)| {
            let b = s
                .intersection(&d)
                .filter_map(|l| {
                    let (take, k, m) = picks[*l as usize - 1];
                    take.then(|| (key(*l), Fraction::new(m.min(k - 1) + 1, k)))
                })
                .collect();
            (line_set(&s), line_set(&d), b)
        },
    )
}

fn bounds_and_clipping() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    let over = Cell::new(0usize);
    runner
        .run(&arb_facts(), |(s, d, b)| {
            // B holds lines outside S ∩ D and fractions above one.
            if b.iter().any(|(l, f)| *f > Fraction::ONE || !(s.contains(l) && d.contains(l))) {
                over.set(over.get() + 1);
            }
            for v in [coverage_ratio(&b, &s, &d), unshrunk_line_coverage(&b, &s)] {
                prop_assert!(v.numerator <= v.denominator);
                if let Some(r) = v.ratio() {
                    prop_assert!(r <= Fraction::ONE);
                }
            }
            let facts = varcov_core::VariableFacts {
                identity: varcov_core::VariableIdentity {
                    function: "f".into(),
                    name: "v".into(),
                    decl: None,
                },
                scope: s.clone(),
                defined: d.clone(),
                described: b.clone(),
                scope_described: b.clone(),
                instance_count: 1,
            };
            for v in line_availability_all(&[facts.clone(), facts]).values() {
                prop_assert!(v.numerator <= v.denominator);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("2000 random fact sets ({} with adversarial B), all ratios in [0,1]", over.get()))
}

fn lifecycle_table() -> Outcome {
    use LifecycleName::*;
    let valid = [
        ((false, false, false, false), InScopeOnly),
        ((false, true, false, false), Unknowable),
        ((false, true, true, false), KnowablePDead),
        ((false, true, true, true), UnallocatedPLive),
        ((true, false, false, false), AllocatedUninit),
        ((true, true, false, false), AllocatedStale),
        ((true, true, true, false), AllocatedPDead),
        ((true, true, true, true), NormalPLive),
    ];
    let invalid = [
        ((false, false, false, true), Implication::LiveImpliesDefined),
        ((false, false, true, false), Implication::KnowableImpliesDefined),
        ((false, false, true, true), Implication::LiveImpliesDefined),
        ((false, true, false, true), Implication::LiveImpliesKnowable),
        ((true, false, false, true), Implication::LiveImpliesDefined),
        ((true, false, true, false), Implication::KnowableImpliesDefined),
        ((true, false, true, true), Implication::LiveImpliesDefined),
        ((true, true, false, true), Implication::AllocatedLiveImpliesKnowable),
    ];
    for ((a, d, k, l), name) in valid {
        let got = classify_lifecycle(a, d, k, l).map_err(|e| format!("{a}{d}{k}{l}: {e}"))?;
        check(got.name == name, || format!("{a}{d}{k}{l}: {:?} != {name:?}", got.name))?;
    }
    for ((a, d, k, l), imp) in invalid {
        match classify_lifecycle(a, d, k, l) {
            Err(Error::InvalidState(got)) if got == imp => {}
            other => return Err(format!("{a}{d}{k}{l}: expected {imp}, got {other:?}")),
        }
    }
    Ok("8 named rows accepted, 8 combinations rejected with the violated implication".into())
}

fn knowledge_extension() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let (equal, raised) = (Cell::new(0), Cell::new(0));
    runner
        .run(&arb_described(), |(s, d, b)| {
            let coverable: LineSet = s.intersection(&d).copied().collect();
            let ext = knowledge_extend(&b, &coverable);
            for (l, f) in &b {
                prop_assert!(ext.get(l).is_some_and(|e| e >= f));
            }
            let before = coverage_ratio(&b, &s, &d);
            let after = coverage_ratio(&ext, &s, &d);
            prop_assert!(after.numerator >= before.numerator);
            prop_assert_eq!(after.denominator, before.denominator);
            let reaches_end = b.is_empty() || coverable.last().is_some_and(|l| b.contains_key(l));
            prop_assert_eq!(after.numerator == before.numerator, reaches_end);
            if reaches_end {
                equal.set(equal.get() + 1);
            } else {
                raised.set(raised.get() + 1);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("1000 random fact sets: {} strictly raised, {} unchanged (B empty or reaching the last line)",
        raised.get(),
        equal.get()))
}

fn textbook_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

fn pearson_oracle() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let worst = Cell::new(0.0f64);
    let strategy = (3usize..60).prop_flat_map(|n| (vec(0.0f64..1.0, n), vec(0.0f64..1.0, n)));
    runner
        .run(&strategy, |(xs, ys)| {
            let got = pearson(&xs, &ys).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let want = textbook_pearson(&xs, &ys);
            worst.set(worst.get().max((got - want).abs()));
            prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let affine = Cell::new(0);
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (vec(-1000i32..1000, 2..40), -50i32..50, -1000i32..1000, 0u32..4);
    runner
        .run(&strategy, |(xs, a, b, shift)| {
            let scale = 2f64.powi(-(shift as i32));
            let xs: Vec<f64> = xs.iter().map(|x| *x as f64 * scale).collect();
            let ys: Vec<f64> = xs.iter().map(|x| a as f64 * x + b as f64).collect();
            if a == 0 || xs.iter().all(|x| *x == xs[0]) {
                return Ok(());
            }
            affine.set(affine.get() + 1);
            let got = pearson(&xs, &ys).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(got, a.signum() as f64);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "100 random vectors within {:.1e} of the oracle; {} affine cases exactly +/-1",
        worst.get(),
        affine.get()
    ))
}

fn replication_filtering() -> Outcome {
    let f = fixtures();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lines = [1u32, 4, 5, 6, 8, 10];
    let mut checked = 0;
    for mask in 0u32..(1 << lines.len()) - 1 {
        let trace: BTreeSet<u32> = lines.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| *l).collect();
        let path = dir.path().join("t.trace");
        let text: String = trace.iter().map(|l| format!("annotated.c:{l}\n")).collect();
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        for ke in [false, true] {
            for mode in [varcov_core::Mode::Variable, varcov_core::Mode::Line] {
                let mut opts = AnalysisOptions::new(Input::Fixture(f.join("annotated.dbgfx")), &f);
                opts.trace = Some(path.clone());
                opts.knowledge_extension = ke;
                opts.mode = mode;
                let a = analyze(&opts).map_err(|e| e.to_string())?;
                for facts in &a.facts {
                    let bad = facts.coverable().into_iter().chain(facts.described.keys().copied()).find(|k| !trace.contains(&k.line));
                    check(bad.is_none(), || format!("trace {trace:?} ke={ke}: {} keeps line {:?}", facts.identity, bad))?;
                    check(facts.coverable().len() as u128 == a.report.variables.iter().find(|r| r.name == facts.identity.name).unwrap().denominator.numer(), || "denominator mismatch".into())?;
                }
                for l in &a.report.lines {
                    check(trace.contains(&l.line), || format!("line record {} outside trace {trace:?}", l.line))?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} analyses over every strict subset of the executed lines"))
}

fn find_compiler() -> Option<PathBuf> {
    let candidates = ["cc", "gcc", "clang"];
    let path = std::env::var_os("PATH").unwrap_or_default();
    std::env::split_paths(&path)
        .chain([PathBuf::from("/usr/bin")])
        .flat_map(|d| candidates.iter().map(move |c| d.join(c)))
        .find(|p| p.is_file())
}

const SMOKE_SOURCE: &str = "\
int step(int v)
{
  int t = v * 3;
  t = t + 1;
  return t;
}

int main(int argc, char **argv)
{
  int acc = 0;
  int lim = argc + 10;
  for (int i = 0; i < lim; ++i)
  {
    int sq = step(i);
    acc += sq;
  }
  return acc & 0x7f;
}
";

/// Returns `Ok(None)` when no compiler is available.
fn compiler_smoke() -> Result<Option<String>, String> {
    let Some(cc) = find_compiler() else { return Ok(None) };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("smoke.c"), SMOKE_SOURCE).map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    for opt in ["-O0", "-O2"] {
        let exe = dir.path().join(format!("smoke{opt}"));
        let status = Command::new(&cc)
            .current_dir(dir.path())
            .args(["-g", opt, "smoke.c", "-o"])
            .arg(&exe)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Ok(None);
        }
        let report = analyze_cli(&["analyze", "--binary", exe.to_str().unwrap(), "--source-root", dir.path().to_str().unwrap()])?;
        check(!report.variables.is_empty(), || format!("{opt}: no variables measured"))?;
        let n = report.variables.len();
        let sum: Fraction = report.variables.iter().map(|v| v.exact_ratio()).sum();
        means.push((sum / Fraction::from(n), n));
    }
    check(means[0].0 >= means[1].0, || format!("O0 mean {} below O2 mean {}", means[0].0, means[1].0))?;
    Ok(Some(format!(
        "{}: O0 mean {:.6} over {} vars >= O2 mean {:.6} over {} vars",
        cc.display(),
        means[0].0.to_f64(),
        means[0].1,
        means[1].0.to_f64(),
        means[1].1
    )))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("annotated example golden", annotated_example_golden),
        ("line-mode consistency", line_mode_consistency),
        ("register vs stack divergence", register_vs_stack),
        ("bounds and clipping", bounds_and_clipping),
        ("lifecycle table", lifecycle_table),
        ("knowledge-extension monotonicity", knowledge_extension),
        ("pearson oracle", pearson_oracle),
        ("replication-mode filtering", replication_filtering),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    match compiler_smoke() {
        Ok(Some(detail)) => println!("criterion 9: PASS compiler smoke test: {detail}"),
        Ok(None) => println!("criterion 9: SKIP compiler smoke test: no working C compiler"),
        Err(why) => {
            failed += 1;
            println!("criterion 9: FAIL compiler smoke test: {why}");
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
