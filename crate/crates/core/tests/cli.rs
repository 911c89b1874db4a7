use std::process::{Command, Output};

fn metlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn every_subcommand_succeeds_on_defaults() {
    for args in [
        vec!["group-check", "--set", "samples=100"],
        vec!["geometry", "--set", "points=10", "--set", "diagonal_points=5", "--set", "fold_points=5"],
        vec!["counterexample", "--set", "n=1"],
        vec!["region"],
        vec!["lemma-check"],
        vec!["keys"],
    ] {
        let o = metlab(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        if args[0] != "keys" {
            assert!(stdout(&o).starts_with("# schema=1\n"), "{args:?}");
        }
    }
}

#[test]
fn usage_and_config_errors_exit_2() {
    for args in [
        vec!["no-such-command"],
        vec![],
        vec!["region", "--format", "png"],
        vec!["region", "--set", "bogus=1"],
        vec!["region", "--set", "n"],
        vec!["counterexample", "--set", "p=1/2"],
        vec!["counterexample", "--set", "family=moment"],
        vec!["counterexample", "--set", "family=knapp", "--set", "structure=quaternionic", "--set", "m=3"],
        vec!["counterexample", "--set", "family=stein"],
        vec!["counterexample", "--set", "n=1", "--set", "delta=0..5"],
        vec!["group-check", "--format", "svg"],
        vec!["group-check", "--seed", "minus-one"],
        vec!["geometry", "--config", "/nonexistent/metlab.conf"],
        vec!["region", "--set", "structure=quaternionic", "--set", "n=3"],
    ] {
        let o = metlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(metlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_assertions_exit_1() {
    // a slope tolerance of zero cannot be met by a quadrature estimate
    let o = metlab(&["counterexample", "--set", "n=1", "--set", "family=moment", "--set", "p=2", "--set", "q=2", "--set", "slope_tolerance=0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict=fail"));
    let o = metlab(&["lemma-check", "--set", "lemma.tolerance=0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# moment curve on the first Heisenberg group\nn = 1\nfamily = moment\np = 2\nq = 2\nslope_tolerance = 0\n").unwrap();
    let out = dir.path().join("ladder.csv");
    let conf_s = conf.to_str().unwrap();
    let out_s = out.to_str().unwrap();
    // the file alone fails the zero tolerance; the override restores it
    assert_eq!(metlab(&["counterexample", "--config", conf_s]).status.code(), Some(1));
    let o = metlab(&["counterexample", "--config", conf_s, "--set", "slope_tolerance=0.15", "--out", out_s]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("family,n,m,p,q,delta,ratio,predicted_exponent,region_mean"));
    assert_eq!(text.lines().filter(|l| l.starts_with("moment,1,1,2/1,2/1,")).count(), 5);
}

#[test]
fn outputs_are_reproducible() {
    for args in [
        vec!["group-check", "--seed", "5", "--set", "samples=50"],
        vec!["geometry", "--seed", "5", "--set", "points=8", "--set", "diagonal_points=4", "--set", "fold_points=4"],
        vec!["lemma-check", "--seed", "5"],
        vec!["counterexample", "--set", "n=1", "--set", "family=scaling", "--set", "p=2", "--set", "q=2"],
    ] {
        let a = metlab(&args);
        let b = metlab(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = metlab(&["lemma-check", "--seed", "5"]);
    let b = metlab(&["lemma-check", "--seed", "6"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn svg_outputs() {
    let o = metlab(&["region", "--format", "svg", "--set", "region=averaging", "--set", "n=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("<svg"));
    let o = metlab(&["counterexample", "--format", "svg", "--set", "n=1", "--set", "family=scaling", "--set", "p=2", "--set", "q=2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("<polyline"));
}

#[test]
fn stein_diagnostic_schema() {
    let o = metlab(&["counterexample", "--set", "n=1", "--set", "family=stein", "--set", "stein.levels=10..20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("j,eps,value,increment,norm"));
    assert_eq!(text.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 11);
}

#[test]
fn smallness_violation_is_a_warning() {
    let o = metlab(&["group-check", "--set", "samples=20", "--set", "lambda=2,0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let o = metlab(&["geometry", "--set", "lambda=2,0,0,0", "--set", "points=5", "--set", "diagonal_points=5", "--set", "fold_points=5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("status=uncertified"));
}
