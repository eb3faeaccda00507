use std::path::PathBuf;

use num_traits::{One, ToPrimitive, Zero};
use ppl::{Config, PplError, StmtKind, Type, Value};
use ppscert::ppda::basic_certificate;
use ppscert::{OviParams, Rational};

fn corpus(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn translate(text: &str) -> ppl::Translation {
    ppl::translate(&ppl::parse_program(text).unwrap(), &Config::default()).unwrap()
}

/// Certified upper bound on the probability that the main block returns `v`.
fn upper(t: &ppl::Translation, v: Value) -> f64 {
    let (solved, index) = basic_certificate(&t.ppda, &OviParams::default()).unwrap();
    let (q0, z0) = t.ppda.init();
    let q = t.outcome_state(v).unwrap();
    solved.certificate.upper[index.var(q0, z0, q)].to_f64().unwrap()
}

#[test]
fn and_or_has_two_mutually_recursive_procedures() {
    let p = ppl::parse_program(&corpus("and-or.ppl")).unwrap();
    let names: Vec<&str> = p.procedures.iter().map(|q| q.name.as_str()).collect();
    assert_eq!(names, ["and", "or"]);
    assert!(p.procedures.iter().all(|q| q.ret == Type::Bool && q.params.is_empty()));
    assert_eq!(p.main_ret, Type::Bool);
    assert!(matches!(p.main[..], [ref s] if matches!(s.kind, StmtKind::Return(Some(_)))));
}

#[test]
fn every_corpus_program_parses_and_translates() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "ppl") {
            let text = std::fs::read_to_string(&path).unwrap();
            let t = translate(&text);
            assert_eq!(t.ppda.check_stochastic(), Ok(()), "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 10);
}

#[test]
fn golden_bound_brackets_the_golden_ratio() {
    let t = translate(&corpus("golden.ppl"));
    let exact = (5f64.sqrt() - 1.0) / 2.0;
    let u = upper(&t, Value::Unit);
    assert!(u >= exact && u <= exact + 1e-3, "{u}");
}

#[test]
fn random_walk_bounds() {
    // x = 0.499 + 0.501 x^2 has least root 499/501 (and 1 for p <= 1/2)
    let t = translate(&corpus("rw-0.501.ppl"));
    let u = upper(&t, Value::Unit);
    assert!(u >= 499.0 / 501.0 && u <= 499.0 / 501.0 + 1e-3, "{u}");
    let t = translate(&corpus("rw-0.499.ppl"));
    let u = upper(&t, Value::Unit);
    assert!((1.0..=1.0 + 1e-3).contains(&u), "{u}");
}

#[test]
fn empty_main_terminates_at_once() {
    let t = translate("{ }");
    assert_eq!(t.outcomes.len(), 1);
    let (q0, z0) = t.ppda.init();
    let rules: Vec<_> = t.ppda.rules_for(q0, z0).collect();
    assert_eq!(rules.len(), 1);
    assert!(rules[0].prob.is_one() && rules[0].push.is_empty());
    assert_eq!(rules[0].target, t.outcome_state(Value::Unit).unwrap());
}

#[test]
fn constant_main_has_a_single_outcome() {
    let t = translate("{ int x = 3; return x + 4; }");
    assert_eq!(t.outcomes, vec![(t.outcome_state(Value::Int(7)).unwrap(), Value::Int(7))]);
}

#[test]
fn integers_wrap() {
    let t = translate("{ int x = 0; return x - 1; }");
    assert!(t.outcome_state(Value::Int(255)).is_some());
    let config = Config { int_max: 7, ..Config::default() };
    let p = ppl::parse_program_with("{ int x = 5; return x + 4; }", &config).unwrap();
    let t = ppl::translate(&p, &config).unwrap();
    assert!(t.outcome_state(Value::Int(1)).is_some());
}

#[test]
fn weights_must_sum_to_one() {
    let err = ppl::parse_program("{ prob { 0.5: ; 0.4: ; } }").unwrap_err();
    match err {
        PplError::Type { line, message, .. } => {
            assert_eq!(line, 1);
            assert!(message.contains("not 1"), "{message}");
        }
        other => panic!("{other}"),
    }
}

#[test]
fn syntax_errors_report_positions() {
    let err = ppl::parse_program("void f() {\n  f()\n}\n{ f(); }").unwrap_err();
    assert!(matches!(err, PplError::Syntax { line: 3, column: 1, .. }), "{err}");
    let err = ppl::parse_program("{ int x = ; }").unwrap_err();
    assert!(matches!(err, PplError::Syntax { line: 1, column: 11, .. }), "{err}");
}

#[test]
fn type_errors() {
    for src in [
        "{ int x = true; }",
        "{ bool b = 1 < true; }",
        "int f() { return 1; }\n{ bool b = f(); }",
        "{ return flip(3//2); }",
        "{ return uniform(0); }",
        "{ return 256; }",
        "{ x = 1; }",
        "void main() { }\n{ }",
        "void f() { }\nvoid f() { }\n{ }",
    ] {
        assert!(matches!(ppl::parse_program(src), Err(PplError::Type { .. })), "{src}");
    }
}

#[test]
fn runtime_errors() {
    let p = ppl::parse_program("{ int x = 0; return 3 % x; }").unwrap();
    let err = ppl::translate(&p, &Config::default()).unwrap_err();
    assert!(matches!(err, PplError::Runtime { .. }), "{err}");
    let p = ppl::parse_program("int f(int n) { if n < 3 return n; }\n{ return f(5); }").unwrap();
    let err = ppl::translate(&p, &Config::default()).unwrap_err();
    assert!(matches!(err, PplError::Runtime { ref procedure, .. } if procedure == "f"), "{err}");
}

#[test]
fn state_space_cap() {
    let p = ppl::parse_program(&corpus("sequential5.ppl")).unwrap();
    let config = Config { symbol_cap: 20, ..Config::default() };
    assert_eq!(ppl::translate(&p, &config).unwrap_err(), PplError::StateSpace { cap: 20 });
}

#[test]
fn bool_outcomes_of_a_coin() {
    let t = translate("{ return flip(1//3); }");
    let (q0, z0) = t.ppda.init();
    let mut mass = Rational::zero();
    for rule in t.ppda.rules_for(q0, z0) {
        assert!(rule.push.is_empty());
        let expected = if rule.target == t.outcome_state(Value::Bool(true)).unwrap() {
            Rational::new(1.into(), 3.into())
        } else {
            Rational::new(2.into(), 3.into())
        };
        assert_eq!(rule.prob, expected);
        mass += &rule.prob;
    }
    assert!(mass.is_one());
}
