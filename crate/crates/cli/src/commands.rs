use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use ppscert::checker::InvalidReason;
use ppscert::lower::UpdateKind;
use ppscert::ppda::{
    bad_state_transform, normalize_unary, output_distribution_bounds, parse_ppda, return_pps, reward_pps,
    reward_var_name, Ppda, RewardModel,
};
use ppscert::pps::text::{parse_pps, serialize};
use ppscert::rational::{format_compact, parse_rational};
use ppscert::{verify_certificate, Certificate, OviParams, PolySystem, Scalar, Strategy, Verdict};

use crate::report::{Outcome, OutcomeReport, RewardBound, RewardReport, RunReport, SolveReport};
use crate::{CertifyArgs, ReportArg, StrategyArg, UpdateArg};

/// Input error, reported with exit code 2.
pub type Error = String;

enum Input {
    System(PolySystem),
    Automaton {
        ppda: Ppda,
        /// Value label per final state, for programs.
        labels: Vec<(usize, String)>,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn load(path: &Path, text: &str) -> Result<Input, Error> {
    let at = |e: &dyn std::fmt::Display| format!("{}: {e}", path.display());
    match extension(path) {
        "pps" => Ok(Input::System(parse_pps(text).map_err(|e| at(&e))?)),
        "ppda" => Ok(Input::Automaton {
            ppda: parse_ppda(text).map_err(|e| at(&e))?,
            labels: Vec::new(),
        }),
        "ppl" => {
            let program = ppl::parse_program(text).map_err(|e| at(&e))?;
            let t = ppl::translate(&program, &ppl::Config::default()).map_err(|e| at(&e))?;
            let labels = t.outcomes.iter().map(|(q, v)| (*q, v.to_string())).collect();
            Ok(Input::Automaton { ppda: t.ppda, labels })
        }
        other => Err(format!("{}: unknown input kind `.{other}`", path.display())),
    }
}

fn params(args: &CertifyArgs) -> Result<OviParams, Error> {
    let params = OviParams {
        epsilon: parse_rational(&args.epsilon).map_err(|e| e.to_string())?,
        c: args.c,
        d: args.d,
        max_guess_rounds: args.max_guesses,
        strategy: match args.strategy {
            StrategyArg::Eigenvector => Strategy::Eigenvector,
            StrategyArg::Relative => Strategy::Relative,
        },
        update: match args.update {
            UpdateArg::GaussSeidel => UpdateKind::GaussSeidel,
            UpdateArg::Kleene => UpdateKind::Kleene,
        },
        k_max: args.kmax,
        jobs: args.jobs,
        ..OviParams::default()
    };
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

fn default_cert_path(input: &str) -> PathBuf {
    let stem = match input {
        "-" => "stdin",
        path => Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or("out"),
    };
    PathBuf::from(format!("{stem}.cert"))
}

/// `foo.cert` becomes `foo.reward.cert`.
fn reward_cert_path(cert: &Path) -> PathBuf {
    let stem = cert.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    cert.with_file_name(format!("{stem}.reward.cert"))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Solves `sys`, writing the certificate to `path` on success.
fn solve_and_write(
    sys: &PolySystem,
    params: &OviParams,
    path: &Path,
) -> Result<(SolveReport, Option<Certificate>), Error> {
    match ppscert::solve(sys, params) {
        Ok(solved) => {
            write(path, &solved.certificate.to_text())?;
            let report = SolveReport::certified(&solved, Some(path.display().to_string()));
            Ok((report, Some(solved.certificate)))
        }
        Err(err) => match Outcome::from_failure(err.kind) {
            Some(outcome) => Ok((SolveReport::failed(outcome, &err), None)),
            None => Err(err.to_string()),
        },
    }
}

pub fn certify(args: &CertifyArgs) -> Result<u8, Error> {
    let params = params(args)?;
    let (display, input) = if args.input == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| format!("stdin: {e}"))?;
        let sys = parse_pps(&text).map_err(|e| format!("stdin: {e}"))?;
        ("-".to_string(), Input::System(sys))
    } else {
        let path = Path::new(&args.input);
        (args.input.clone(), load(path, &read(path)?)?)
    };
    let cert_path = args.out.clone().unwrap_or_else(|| default_cert_path(&args.input));

    let (sys, automaton) = match input {
        Input::System(sys) => {
            if args.bad_state.is_some() || args.reward.is_some() || args.assume_ast {
                return Err("--bad-state, --reward and --assume-ast need an automaton or program".into());
            }
            (sys, None)
        }
        Input::Automaton { mut ppda, labels } => {
            if let Some(bad) = &args.bad_state {
                ppda = bad_state_transform(&ppda, bad).map_err(|e| e.to_string())?;
            }
            if args.normalize_arity {
                ppda = normalize_unary(&ppda).map_err(|e| e.to_string())?;
            }
            let (sys, _) = return_pps(&ppda);
            (sys, Some((ppda, labels)))
        }
    };

    let (solve, cert) = solve_and_write(&sys, &params, &cert_path)?;
    let mut report = RunReport {
        input: display,
        format: match &automaton {
            None => "pps",
            Some(_) if extension(Path::new(&args.input)) == "ppl" => "ppl",
            Some(_) => "ppda",
        }
        .to_string(),
        variables: sys.dim(),
        terms: sys.num_terms(),
        epsilon: format_compact(&params.epsilon),
        strategy: params.strategy.name().to_string(),
        update: match params.update {
            UpdateKind::GaussSeidel => "gauss-seidel",
            UpdateKind::Kleene => "kleene",
        }
        .to_string(),
        solve,
        outcomes: Vec::new(),
        reward: None,
    };

    if let (Some((ppda, labels)), Some(cert)) = (&automaton, &cert) {
        let init = ppda.init();
        let bounds = output_distribution_bounds(ppda, init, cert, args.assume_ast).map_err(|e| e.to_string())?;
        for (r, b) in bounds.iter().enumerate() {
            let label = match labels.iter().find(|(q, _)| *q == r) {
                Some((_, v)) => v.clone(),
                None if labels.is_empty() => b.state.clone(),
                None => continue,
            };
            report.outcomes.push(OutcomeReport::new(label, &b.lower, &b.upper));
        }
        if let Some(reward_path) = &args.reward {
            let model = RewardModel::parse(ppda, &read(reward_path)?).map_err(|e| e.to_string())?;
            let (rsys, _) = reward_pps(ppda, &model, cert).map_err(|e| e.to_string())?;
            let (solve, rcert) = solve_and_write(&rsys, &params, &reward_cert_path(&cert_path))?;
            let (q0, z0) = init;
            let bounds = match &rcert {
                Some(rc) => (0..ppda.states().len())
                    .map(|r| {
                        let variable = reward_var_name(ppda, q0, z0, r);
                        let u = rc.value(&variable).expect("reward variable").clone();
                        RewardBound {
                            upper: format_compact(&u),
                            upper_f64: u.to_f64(),
                            variable,
                        }
                    })
                    .collect(),
                None => Vec::new(),
            };
            report.reward = Some(RewardReport { solve, bounds });
        }
    }

    match args.report {
        ReportArg::Json => println!("{}", report.to_json()),
        ReportArg::Text => print!("{}", report.to_text()),
    }
    Ok(report.exit_code() as u8)
}

fn system_of(path: &Path) -> Result<PolySystem, Error> {
    match load(path, &read(path)?)? {
        Input::System(sys) => Ok(sys),
        Input::Automaton { ppda, .. } => Ok(return_pps(&ppda).0),
    }
}

pub fn check(system: &Path, certificate: &Path) -> Result<u8, Error> {
    let sys = system_of(system)?;
    let cert = Certificate::parse(&read(certificate)?).map_err(|e| format!("{}: {e}", certificate.display()))?;
    match verify_certificate(&sys, &cert) {
        Verdict::Valid => {
            println!("valid");
            Ok(0)
        }
        Verdict::Invalid(reason) => {
            println!("invalid: {reason}");
            if let InvalidReason::Inductivity { var, index } = &reason {
                println!("coordinate {var} (k-induction step {index})");
            }
            Ok(1)
        }
    }
}

pub fn translate(program: &Path, out_dir: &Path) -> Result<u8, Error> {
    let Input::Automaton { ppda, .. } = load(program, &read(program)?)? else {
        return Err(format!("{}: expected a `.ppl` program or `.ppda` automaton", program.display()));
    };
    let stem = program.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let (sys, _) = return_pps(&ppda);
    fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    let ppda_path = out_dir.join(format!("{stem}.ppda"));
    let pps_path = out_dir.join(format!("{stem}.pps"));
    write(&ppda_path, &ppda.to_text())?;
    write(&pps_path, &serialize(&sys))?;
    let graph = sys.clean().system.dep_graph();
    println!(
        "{}: {} states, {} stack symbols, {} rules",
        ppda_path.display(),
        ppda.states().len(),
        ppda.stack().len(),
        ppda.rules().len()
    );
    println!(
        "{}: {} variables, {} nontrivial components after cleaning",
        pps_path.display(),
        sys.dim(),
        graph.num_nontrivial()
    );
    Ok(0)
}
