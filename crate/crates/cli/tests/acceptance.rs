//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion over all of them.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ppscert::cert::{check_inductive, k_induction_check};
use ppscert::eigen::{approx_eigenvec, DEFAULT_MAX_ITERS};
use ppscert::lower::{gauss_seidel_step, improve_until, kleene_step, IterState, UpdateKind};
use ppscert::ovi::guess;
use ppscert::ppda::{parse_ppda, return_pps};
use ppscert::pps::text::{parse_pps, serialize};
use ppscert::random::{random_ppda, random_rational_point, random_system, PpdaShape, SystemShape};
use ppscert::rational::{parse_rational, ratio};
use ppscert::{solve, verify_certificate, Certificate, OviParams, Rational, Scalar, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

// Windows and budgets, as stated by the criteria.
const SCFG_X: (f64, f64) = (0.6626, 0.6646);
const SCFG_Y: (f64, f64) = (0.7005, 0.7025);
const SCFG_BUDGET: Duration = Duration::from_secs(1);
const DELTA_BUDGET: Duration = Duration::from_secs(1);
const EPSILON: f64 = 1e-3;
const PROGRAM_BUDGET: Duration = Duration::from_secs(5);
const AND_OR_WINDOW: (f64, f64) = (0.5814, 0.5824);
const EIGEN_TOL: f64 = 1e-3;
const EIGEN_LFP_ACCURACY: f64 = 1e-9;
const JACOBIAN_REL_TOL: f64 = 1e-6;
const LARGE_VARS: usize = 1_000;
const LARGE_BUDGET: Duration = Duration::from_secs(60);
const SEQUENTIAL_BUDGET: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

struct Run {
    code: i32,
    report: Value,
    cert: Option<Certificate>,
    elapsed: Duration,
}

fn certify(input: &Path, extra: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.cert");
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_ppscert"))
        .args(["certify", input.to_str().unwrap(), "--report", "json", "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    let report = serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{}: {e}: {}", input.display(), String::from_utf8_lossy(&o.stderr)));
    let cert = std::fs::read_to_string(&out).ok().map(|t| Certificate::parse(&t).unwrap());
    Run {
        code: o.status.code().unwrap(),
        report,
        cert,
        elapsed,
    }
}

fn check(system: &Path, cert: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_ppscert"))
        .args(["check", system.to_str().unwrap(), cert.to_str().unwrap()])
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn outcome_upper(run: &Run, label: &str) -> f64 {
    run.report["outcomes"]
        .as_array()
        .and_then(|o| o.iter().find(|o| o["label"] == label))
        .and_then(|o| o["upper_f64"].as_f64())
        .unwrap_or(f64::NAN)
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    lo <= x && x <= hi
}

fn scfg() -> Outcome {
    let path = corpus("scfg.pps");
    let run = certify(&path, &["--epsilon", "1e-3"]);
    let cert = run.cert.as_ref().ok_or("no certificate")?;
    let sys = parse_pps(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let valid = verify_certificate(&sys, cert) == Verdict::Valid;
    let (x, y) = (cert.value("x").unwrap().to_f64(), cert.value("y").unwrap().to_f64());
    let detail = format!("u = ({x:.4}, {y:.4}), valid {valid}, {:?}", run.elapsed);
    if valid && within(x, SCFG_X) && within(y, SCFG_Y) && run.elapsed < SCFG_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn two_state() -> Outcome {
    let run = certify(&corpus("two-state.ppda"), &[]);
    let (uq, ur) = (outcome_upper(&run, "q"), outcome_upper(&run, "r"));
    let (eq, er) = (2.0 - 2f64.sqrt(), 2f64.sqrt() - 1.0);
    let brackets = uq >= eq && uq <= eq + EPSILON && ur >= er && ur <= er + EPSILON;
    let system = corpus("two-state.pps");
    let hand = check(&system, &corpus("two-state.cert"));
    let dir = tempfile::tempdir().unwrap();
    let mutated = dir.path().join("mutated.cert");
    let text = std::fs::read_to_string(corpus("two-state.cert")).unwrap();
    std::fs::write(&mutated, text.replace("<q,Z,q> 3/5", "<q,Z,q> 11/20")).unwrap();
    let mutant = check(&system, &mutated);
    let detail = format!(
        "u = ({uq:.5}, {ur:.5}), hand certificate exit {hand}, mutation exit {mutant}, {:?}",
        run.elapsed
    );
    if run.code == 0 && brackets && hand == 0 && mutant == 1 && run.elapsed < DELTA_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn guess_arithmetic() -> Outcome {
    let q = |s: &str| parse_rational(s).unwrap();
    let (eps, d) = (q("0.1"), q("0.5"));
    let first = guess(&[q("0.4"), q("0.3")], &[q("1.0"), q("0.8")], &eps, &d, 0);
    let second = guess(&[q("0.5"), q("0.4")], &[q("1.0"), q("0.9")], &eps, &d, 0);
    let detail = format!("{first:?} and {second:?}");
    if first == [q("0.5"), q("0.38")] && second == [q("0.6"), q("0.49")] {
        Ok("(1/2, 19/50) and (3/5, 49/100)".into())
    } else {
        Err(detail)
    }
}

fn singularity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, expected) in [
        ("singular.pps", "GuessBudgetExhausted"),
        ("rw-0.500.ppl", "GuessBudgetExhausted"),
        ("rw-0.499.ppl", "Certified"),
        ("rw-0.501.ppl", "Certified"),
    ] {
        let run = certify(&corpus(name), &["--max-guesses", "10"]);
        let got = run.report["outcome"].as_str().unwrap_or("?").to_string();
        ok &= got == expected;
        parts.push(format!("{name} {got}"));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn programs() -> Outcome {
    let golden = certify(&corpus("golden.ppl"), &[]);
    let g = outcome_upper(&golden, "()");
    let g_exact = (5f64.sqrt() - 1.0) / 2.0;
    let rw = certify(&corpus("rw-0.501.ppl"), &[]);
    let r = outcome_upper(&rw, "()");
    let r_exact = 0.499 / 0.501;
    let and_or = certify(&corpus("and-or.ppl"), &[]);
    let a = outcome_upper(&and_or, "true");
    let ok = g >= g_exact
        && g - g_exact <= EPSILON
        && r >= r_exact
        && r - r_exact <= EPSILON
        && within(a, AND_OR_WINDOW)
        && [&golden, &rw, &and_or].iter().all(|run| run.elapsed < PROGRAM_BUDGET);
    let detail = format!(
        "golden {g:.5} ({:?}), rw-0.501 {r:.5} ({:?}), and-or P(true) <= {a:.5} ({:?})",
        golden.elapsed, rw.elapsed, and_or.elapsed
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn eigenvector() -> Outcome {
    let sys = parse_pps("x = y + 0.1\ny = 0.2 x^2 + 0.8 x y + 0.1").unwrap();
    let mut state = IterState::zero(2);
    improve_until(&sys.view::<f64>(), &mut state, UpdateKind::GaussSeidel, 1e-13, 1_000_000)
        .map_err(|e| e.to_string())?;
    let residual = sys
        .evaluate(&state.current)
        .unwrap()
        .iter()
        .zip(&state.current)
        .map(|(f, x)| (f - x).abs())
        .fold(0.0, f64::max);
    if residual > EIGEN_LFP_ACCURACY {
        return Err(format!("lfp approximation residual {residual:e}"));
    }
    let j = sys.jacobian_at(&state.current).unwrap();
    let est = approx_eigenvec(&j, 1e-12, None, DEFAULT_MAX_ITERS);
    let v = &est.vector;
    let detail = format!("v = ({:.4}, {:.4}) after {} iterations", v[0], v[1], est.iterations);
    if est.converged && (v[0] - 1.0).abs() <= EIGEN_TOL && (v[1] - 0.557).abs() <= EIGEN_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// (a) all-ones is exactly inductive for random return systems.
fn all_ones_inductive() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    for _ in 0..100 {
        let shape = PpdaShape::new(rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = random_ppda(&mut rng, &shape);
        let (sys, _) = return_pps(&a);
        if !check_inductive(&sys, &sys.ones::<Rational>()) {
            failures += 1;
        }
    }
    match failures {
        0 => Ok(()),
        n => Err(format!("(a) all-ones not inductive for {n}/100 automata")),
    }
}

/// (b) every certificate the solver emits passes the independent checker.
fn certificates_reverify() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut emitted = 0;
    for _ in 0..60 {
        let mut shape = SystemShape::new(rng.gen_range(1..=12));
        shape.constant_prob = 0.5;
        shape.max_degree = rng.gen_range(1..=3);
        shape.mass = ratio(rng.gen_range(50..=99), 100);
        shape.strongly_connected = rng.gen_bool(0.5);
        let sys = random_system(&mut rng, &shape);
        if let Ok(solved) = solve(&sys, &OviParams::default()) {
            emitted += 1;
            if verify_certificate(&sys, &solved.certificate) != Verdict::Valid {
                return Err(format!("(b) emitted certificate rejected:\n{}", serialize(&sys)));
            }
        }
    }
    for name in ["golden.ppl", "and-or.ppl", "virus.ppl", "two-state.ppda"] {
        let text = std::fs::read_to_string(corpus(name)).unwrap();
        let a = match name.ends_with(".ppl") {
            true => ppl::translate(&ppl::parse_program(&text).unwrap(), &ppl::Config::default())
                .unwrap()
                .ppda,
            false => parse_ppda(&text).unwrap(),
        };
        let (sys, _) = return_pps(&a);
        let solved = solve(&sys, &OviParams::default()).map_err(|e| format!("(b) {name}: {e}"))?;
        emitted += 1;
        if verify_certificate(&sys, &solved.certificate) != Verdict::Valid {
            return Err(format!("(b) {name}: emitted certificate rejected"));
        }
    }
    if emitted < 40 {
        return Err(format!("(b) only {emitted} certificates emitted"));
    }
    Ok(())
}

/// (c) the two-variable swap example needs depth 2.
fn k_induction_depth_two() -> Result<(), String> {
    let sys = parse_pps("x = 0.5 y + 0.25\ny = 0.5 x + 0.25").unwrap();
    let u = [ratio(1, 2), ratio(3, 5)];
    match (k_induction_check(&sys, &u, 1).0, k_induction_check(&sys, &u, 2)) {
        (false, (true, 2)) => Ok(()),
        other => Err(format!("(c) k-induction gave {other:?}")),
    }
}

/// (d) Jacobian against exact central differences, which are exact for quadratics.
fn jacobian_vs_differences() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = ratio(1, 10_000);
    let two_h = &h + &h;
    for case in 0..50 {
        let mut shape = SystemShape::new(rng.gen_range(1..=8));
        shape.terms_per_eq = 3;
        let sys = random_system(&mut rng, &shape);
        let point = random_rational_point(&mut rng, sys.dim(), 2);
        let float: Vec<f64> = point.iter().map(Scalar::to_f64).collect();
        let j = sys.jacobian_at(&float).unwrap().to_dense();
        for k in 0..sys.dim() {
            let (mut plus, mut minus) = (point.clone(), point.clone());
            plus[k] += &h;
            minus[k] -= &h;
            let (fp, fm) = (sys.evaluate(&plus).unwrap(), sys.evaluate(&minus).unwrap());
            for i in 0..sys.dim() {
                let fd = ((&fp[i] - &fm[i]) / &two_h).to_f64();
                let err = (fd - j[i][k]).abs();
                if err > JACOBIAN_REL_TOL * fd.abs().max(j[i][k].abs()) + f64::MIN_POSITIVE {
                    return Err(format!("(d) case {case}: entry ({i},{k}) {} vs {fd}", j[i][k]));
                }
            }
        }
    }
    Ok(())
}

/// (e) Kleene and Gauss-Seidel iterates increase, and Gauss-Seidel dominates.
fn lower_bound_monotonicity() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..50 {
        let vars = rng.gen_range(1..=10);
        let mut shape = SystemShape::new(vars);
        shape.constant_prob = 0.6;
        let sys = random_system(&mut rng, &shape);
        let f = sys.view::<f64>();
        let (mut k, mut g) = (vec![0.0; vars], vec![0.0; vars]);
        for _ in 0..30 {
            let (nk, ng) = (kleene_step(&f, &k), gauss_seidel_step(&f, &g));
            // all-ones is inductive for these systems, so every iterate stays below it
            let ok = (0..vars).all(|i| nk[i] >= k[i] && ng[i] >= g[i] && ng[i] >= nk[i] && ng[i] <= 1.0);
            if !ok {
                return Err(format!("(e) case {case} violates monotonicity or dominance"));
            }
            k = nk;
            g = ng;
        }
    }
    Ok(())
}

fn property_suites() -> Outcome {
    let results = [
        all_ones_inductive(),
        certificates_reverify(),
        k_induction_depth_two(),
        jacobian_vs_differences(),
        lower_bound_monotonicity(),
    ];
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    if failures.is_empty() {
        Ok("(a) to (e) hold".into())
    } else {
        Err(failures.join("; "))
    }
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut shape = SystemShape::new(LARGE_VARS);
    shape.terms_per_eq = 2;
    shape.constant_prob = 0.1;
    shape.strongly_connected = true;
    let sys = random_system(&mut rng, &shape);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("large.pps");
    std::fs::write(&path, serialize(&sys)).unwrap();
    let large = certify(&path, &[]);
    let components = sys.dep_graph().sccs().len();
    let seq = certify(&corpus("sequential5.ppl"), &[]);
    let detail = format!(
        "{} variables, {} terms, {} component(s): {} in {:?}; sequential5 ({} variables): {} in {:?}",
        sys.dim(),
        sys.num_terms(),
        components,
        large.report["outcome"],
        large.elapsed,
        seq.report["variables"],
        seq.report["outcome"],
        seq.elapsed
    );
    let ok = components == 1
        && large.code == 0
        && large.elapsed < LARGE_BUDGET
        && seq.code == 0
        && seq.elapsed < SEQUENTIAL_BUDGET;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn strategy_comparison() -> Outcome {
    let mut names: Vec<String> = std::fs::read_dir(corpus(""))
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".ppl"))
        .collect();
    names.sort();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "# {:<20} {:>22} {:>22}", "program", "eigenvector", "relative");
    let mut subset = true;
    let (mut eig_ok, mut rel_ok) = (0, 0);
    for name in &names {
        let eig = certify(&corpus(name), &["--strategy", "eigenvector"]);
        let rel = certify(&corpus(name), &["--strategy", "relative"]);
        let show = |r: &Run| format!("{} G={}", if r.code == 0 { "cert" } else { "fail" }, r.report["totals"]["guesses"]);
        let _ = writeln!(out, "# {:<20} {:>22} {:>22}", name, show(&eig), show(&rel));
        eig_ok += usize::from(eig.code == 0);
        rel_ok += usize::from(rel.code == 0);
        subset &= rel.code != 0 || eig.code == 0;
    }
    let detail = format!(
        "eigenvector certifies {eig_ok}/{n}, relative {rel_ok}/{n}",
        n = names.len()
    );
    if subset {
        Ok(detail)
    } else {
        Err(format!("{detail}; relative succeeds where eigenvector fails"))
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("grammar system certifies inside the window", scfg),
        ("two-state bounds, hand certificate and mutation", two_state),
        ("guess arithmetic", guess_arithmetic),
        ("singular systems exhaust the guess budget", singularity),
        ("program oracles", programs),
        ("Perron-Frobenius vector of a two-variable Jacobian", eigenvector),
        ("property suites", property_suites),
        ("desk-scale performance", performance),
        ("strategy comparison", strategy_comparison),
    ];
    let mut failed = Vec::new();
    let _ = writeln!(std::io::stdout().lock());
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        // bypass the test harness capture so the lines always appear
        let _ = writeln!(
            std::io::stdout().lock(),
            "criterion {}: {tag}: {name}: {detail} [{:.1} s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        if result.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
