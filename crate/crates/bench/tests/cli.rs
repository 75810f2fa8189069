use std::process::Command;

use npqn_bench::files::save_dtns;
use npqn_bench::output::{parse_trace_csv, TRACE_HEADER};
use npqn_bench::{run_experiment, run_trials, ExperimentConfig};
use npqn_core::problems::{generate_collinear_cp, CpTestSpec};

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

fn cfg(pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    for (k, v) in pairs {
        c.set(k, v).unwrap();
    }
    c.validate().unwrap();
    c
}

const SMALL_CP: [(&str, &str); 5] = [("problem", "cp-synthetic"), ("extent", "12"), ("rank", "2"), ("collinearity", "0.5"), ("trials", "3")];

#[test]
fn config_file_and_flags_produce_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# small CP run\nproblem = cp-synthetic\nextent = 10\nrank = 2\ncollinearity = 0.5\nmethod = lbfgs\nprecond = lp\ntrials = 2\n").unwrap();
    let out = bench().arg("--config").arg(&conf).args(["--label", "demo", "--out-dir"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("demo");
    for f in ["trial_000.csv", "trial_001.csv", "summary.json", "residuals.dat", "config.txt"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["summary"]["converged"], 2);
    let trace = parse_trace_csv(&std::fs::read_to_string(run.join("trial_000.csv")).unwrap()).unwrap();
    assert!(!trace.is_empty());
    let back = ExperimentConfig::from_text(&std::fs::read_to_string(run.join("config.txt")).unwrap()).unwrap();
    assert_eq!(back.extent, 10);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = bench().args(["--method", "nonsense"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let inconsistent = bench().args(["--problem", "poisson", "--method", "als"]).output().unwrap();
    assert_eq!(inconsistent.status.code(), Some(1));
    let capped = bench()
        .args(["--problem", "cp-synthetic", "--extent", "10", "--rank", "2", "--method", "als", "--precond", "none", "--trials", "1", "--max-iters", "0", "--label", "zero", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("zero/trial_000.csv")).unwrap();
    assert_eq!(csv.trim(), TRACE_HEADER);
}

#[test]
fn zero_iteration_budget_gives_an_empty_trace_and_a_failure() {
    let c = run_experiment(&cfg(&[SMALL_CP.as_slice(), &[("max-iters", "0")]].concat())).unwrap();
    assert!(c.trials.iter().all(|t| t.trace.is_empty() && !t.converged && t.iterations == 0));
    assert!(!c.all_converged());
}

#[test]
fn trials_are_independent_of_each_other() {
    let c = cfg(&[SMALL_CP.as_slice(), &[("method", "lbroyden"), ("precond", "tp"), ("max-iters", "50")]].concat());
    let all = run_experiment(&c).unwrap();
    let one = run_trials(&c, &[2]).unwrap();
    assert_eq!(one.trials.len(), 1);
    assert_eq!(one.trials[0].trial, 2);
    assert_eq!(one.trials[0].trace, all.trials[2].trace);
    let pair = run_trials(&c, &[1, 0]).unwrap();
    assert_eq!(pair.trials.iter().find(|t| t.trial == 0).unwrap().trace, all.trials[0].trace);
}

#[test]
fn counters_are_monotone_and_sweeps_cost_one_apply() {
    let als = run_experiment(&cfg(&[SMALL_CP.as_slice(), &[("method", "als"), ("precond", "none"), ("max-iters", "30")]].concat())).unwrap();
    for t in &als.trials {
        for (i, r) in t.trace.iter().enumerate() {
            assert_eq!(r.k, i + 1);
            assert_eq!(r.q_applies, r.k);
        }
    }
    let lp = run_experiment(&cfg(&[SMALL_CP.as_slice(), &[("method", "lbfgs"), ("precond", "lp"), ("max-iters", "40")]].concat())).unwrap();
    for t in &lp.trials {
        for w in t.trace.windows(2) {
            assert!(w[1].k > w[0].k);
            assert_eq!(w[1].q_applies, w[0].q_applies + 1);
            assert!(w[1].f_evals > w[0].f_evals && w[1].g_evals > w[0].g_evals);
        }
        assert!(t.f_evals <= 10000);
    }
}

#[test]
fn function_evaluation_budget_is_respected() {
    let c = run_experiment(&cfg(&[SMALL_CP.as_slice(), &[("method", "lbfgs"), ("precond", "none"), ("max-fevals", "23"), ("max-iters", "1000")]].concat())).unwrap();
    for t in &c.trials {
        assert!(t.f_evals <= 23, "{}", t.f_evals);
    }
}

#[test]
fn tensor_files_feed_the_runner() {
    let dir = tempfile::tempdir().unwrap();
    let (_, x) = generate_collinear_cp(&CpTestSpec::cube(9, 2, 0.3, 1.0, 1.0, 3), 0).unwrap();
    let path = dir.path().join("x.dtns");
    save_dtns(&path, &x).unwrap();
    let c = cfg(&[("problem", "tensor-file"), ("path", path.to_str().unwrap()), ("format", "dtns"), ("model", "cp"), ("rank", "2"), ("method", "lbfgs"), ("trials", "2")]);
    let r = run_experiment(&c).unwrap();
    assert!(r.all_converged(), "{:?}", r.trials.iter().map(|t| &t.status).collect::<Vec<_>>());
}

#[test]
fn poisson_pcg_residuals_decrease() {
    let c = run_experiment(&cfg(&[("problem", "poisson"), ("intervals", "50"), ("method", "pcg"), ("precond", "none"), ("omega", "1.0"), ("trials", "1")])).unwrap();
    let t = &c.trials[0];
    assert!(t.converged);
    for w in t.trace.windows(2) {
        assert!(w[1].gnorm_scaled < w[0].gnorm_scaled, "iteration {}", w[1].k);
    }
}
