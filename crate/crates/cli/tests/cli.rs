use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumdecomp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim_end().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn encode_decode_examples() {
    let out = run(&["encode", "--m", "2", "--set", "{0.25,0.75}"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1.0,0.625");

    let out = run(&["decode", "--m", "2", "--latent", "1.0,0.625"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "{0.25,0.75}");
}

#[test]
fn size_mismatch_is_a_domain_error() {
    let out = run(&["encode", "--m", "2", "--set", "{0.25}"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size mismatch"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["encode", "--m", "2", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(run(&["encode", "--set", "{0.1}"]).status.code(), Some(2));
    assert_eq!(run(&["encode", "--m", "1", "--set", "{x}"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["adversary", "--n", "1", "--m", "2", "--phi", "weird", "--x", "1,2"]).status.code(), Some(2));
}

#[test]
fn text_round_trip_in_both_frames() {
    let set = "{0.03,0.2,0.41,0.41,0.77,0.98}";
    for frame in ["unit", "centered"] {
        let z = stdout(&run(&["encode", "--m", "6", "--frame", frame, "--set", set]));
        let back = run(&["decode", "--m", "6", "--frame", frame, "--latent", &z]);
        assert_eq!(back.status.code(), Some(0));
        let got: Vec<f64> = stdout(&back)
            .trim_matches(|c| c == '{' || c == '}')
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        let want = [0.03, 0.2, 0.41, 0.41, 0.77, 0.98];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-6, "{frame}: {got:?}");
        }
    }
}

#[test]
fn variable_size_commands() {
    let out = run(&["encode-var", "--m", "3", "--k", "-1", "--set", "{0.5}"]);
    assert_eq!(stdout(&out), "1.5,-0.75,1.125");
    let out = run(&["decode-var", "--m", "3", "--k", "-1", "--latent", "1.5,-0.75,1.125"]);
    assert_eq!(stdout(&out), "{0.5}");
    let out = run(&["decode-var", "--m", "3", "--latent", "0,0,0"]);
    assert_eq!(stdout(&out), "{}");
    assert_eq!(run(&["encode-var", "--m", "3", "--k", "0.5", "--set", "{}"]).status.code(), Some(2));
}

#[test]
fn countable_commands() {
    assert_eq!(stdout(&run(&["countable", "encode", "--universe", "12", "--indices", "0,2"])), "17/16");
    assert_eq!(stdout(&run(&["countable", "decode", "--universe", "12", "--value", "17/16"])), "0,2");
    assert_eq!(
        run(&["countable", "decode", "--universe", "12", "--value", "1/2"]).status.code(),
        Some(1)
    );
    assert_eq!(stdout(&run(&["countable", "prime-encode", "--universe", "5", "--indices", "0,0,1"])), "12");
    assert_eq!(stdout(&run(&["countable", "prime-decode", "--universe", "5", "--value", "12"])), "0,0,1");
    assert_eq!(
        run(&["countable", "prime-decode", "--universe", "2", "--value", "7"]).status.code(),
        Some(1)
    );
}

#[test]
fn adversary_certificate() {
    let out = run(&["adversary", "--n", "1", "--m", "2", "--phi", "identity", "--x", "1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("x_tilde\t{2.0,2.0}"), "{text}");
    assert!(text.contains("sum\t3.0\t4.0"), "{text}");
    assert!(text.contains("maxima_equal=true\tsums_differ=true"));

    let a = stdout(&run(&["adversary", "--n", "2", "--m", "4", "--phi", "random:3", "--x", "0.1,0.4,0.6,0.8"]));
    let b = stdout(&run(&["adversary", "--n", "2", "--m", "4", "--phi", "random:3", "--x", "0.1,0.4,0.6,0.8"]));
    assert_eq!(a, b);
    assert!(a.contains("maxima_equal=true\tsums_differ=true"));

    assert_eq!(run(&["adversary", "--n", "2", "--m", "2", "--x", "0.1,0.4"]).status.code(), Some(1));
    assert_eq!(run(&["adversary", "--n", "1", "--m", "3", "--x", "0.1,0.4"]).status.code(), Some(1));
}

#[test]
fn check_decomp_reports() {
    let out = run(&["check-decomp", "--m", "4", "--f", "max", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("result\tpass"));
    let again = run(&["check-decomp", "--m", "4", "--f", "max", "--samples", "100"]);
    assert_eq!(stdout(&out), stdout(&again));
}

#[test]
fn psi_csv_and_svg() {
    let csv = scratch("psi.csv");
    let svg = scratch("psi.svg");
    let out = run(&[
        "psi",
        "--resolution",
        "11",
        "--tol",
        "1e-9",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,psi");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1], "0.0,0.0");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn experiment_and_critical_points() {
    let cfg = scratch("tiny.cfg");
    std::fs::write(&cfg, "batches=20\nbatch_size=8\nhidden_units=8\n").unwrap();
    let sweep = scratch("sweep.csv");
    let crit = scratch("crit.csv");
    let args = [
        "experiment",
        "--grid",
        "M=3,5;N=1..3",
        "--repeats",
        "2",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        sweep.to_str().unwrap(),
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    let first = std::fs::read_to_string(&sweep).unwrap();
    assert!(first.starts_with("M,N,seed,rmse_final\n"));
    assert_eq!(first.lines().count(), 1 + 2 * 3 * 2);
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&sweep).unwrap(), first, "seeded sweeps are bit-exact");

    let out = run(&["critical-points", "--in", sweep.to_str().unwrap(), "--out", crit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&crit).unwrap();
    assert!(text.starts_with("M,critical_N,min_rmse,threshold\n"));
    assert_eq!(text.lines().count(), 3);

    assert_eq!(
        run(&["experiment", "--grid", "M=4;N=1", "--config", "/nonexistent.cfg"]).status.code(),
        Some(2)
    );
}
