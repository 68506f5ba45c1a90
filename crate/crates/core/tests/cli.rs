//! CLI surface tests: artifact formats, determinism, exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_odemmse"))
}

fn run_in(dir: &Path, args: &[&str]) -> std::process::Output {
    bin()
        .args(args)
        .args(["--output", dir.to_str().unwrap()])
        .output()
        .expect("spawn odemmse")
}

fn tempdir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("odemmse-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn channel_gen_is_deterministic_and_round_trips() {
    let dir = tempdir("chan");
    let out1 = run_in(&dir, &["channel-gen", "--n", "4", "--m", "6", "--seed", "3"]);
    assert!(out1.status.success());
    let text1 = std::fs::read_to_string(dir.join("channel.txt")).unwrap();

    let out2 = run_in(&dir, &["channel-gen", "--n", "4", "--m", "6", "--seed", "3"]);
    assert!(out2.status.success());
    let text2 = std::fs::read_to_string(dir.join("channel.txt")).unwrap();
    assert_eq!(text1, text2);

    let header = text1.lines().next().unwrap();
    assert_eq!(header, "6 4");

    // a loaded channel must reproduce the generated curve exactly
    let a = run_in(
        &dir,
        &["analytical", "--n", "4", "--m", "6", "--seed", "3", "--t-max", "1"],
    );
    assert!(a.status.success());
    let direct = std::fs::read_to_string(dir.join("analytical_mse.csv")).unwrap();
    let channel_arg = dir.join("channel.txt");
    let b = run_in(
        &dir,
        &[
            "analytical",
            "--n",
            "4",
            "--m",
            "6",
            "--seed",
            "3",
            "--t-max",
            "1",
            "--channel",
            channel_arg.to_str().unwrap(),
        ],
    );
    assert!(b.status.success());
    let via_file = std::fs::read_to_string(dir.join("analytical_mse.csv")).unwrap();
    assert_eq!(direct, via_file);
}

#[test]
fn analytical_emits_expected_grid_and_provenance() {
    let dir = tempdir("analytical");
    let out = run_in(&dir, &["analytical", "--seed", "5"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("analytical_mse.csv")).unwrap();
    let data_rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    // header row + 3001 grid points (t = 0..3 step 1e-3)
    assert_eq!(data_rows, 3002);
    assert!(csv.lines().any(|l| l.starts_with("# channel_hash: ")));
    assert!(csv.contains("t,mse,provenance"));
    assert!(csv.contains("analytical-constant"));
}

#[test]
fn gridsearch_emits_four_row_table() {
    let dir = tempdir("grid");
    let out = run_in(&dir, &["gridsearch", "--seed", "5", "--dt", "4e-3"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("best alpha = "));
    let csv = std::fs::read_to_string(dir.join("gridsearch.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "alpha,F");
    assert_eq!(rows.len(), 5);
    for (row, alpha) in rows[1..].iter().zip(["1", "10", "50", "100"]) {
        assert!(row.starts_with(&format!("{alpha},")));
        let f: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(f.is_finite() && f > 0.0);
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempdir("config");
    let config = dir.join("run.toml");
    std::fs::write(&config, "n = 2\nm = 2\nseed = 9\nt_max = 0.5\ndt = 0.01\n").unwrap();
    let out = run_in(
        &dir,
        &[
            "analytical",
            "--config",
            config.to_str().unwrap(),
            "--t-max",
            "1.0",
        ],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("analytical_mse.csv")).unwrap();
    assert!(csv.contains("# n: 2"));
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("1,") || last.starts_with("1.0,"), "last row: {last}");
}

#[test]
fn exit_codes_distinguish_config_and_numerical_failures() {
    let dir = tempdir("codes");
    let bad_config = run_in(&dir, &["analytical", "--sigma2", "0"]);
    assert_eq!(bad_config.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&bad_config.stderr);
    assert!(stderr.starts_with("error: config:"), "stderr: {stderr}");

    let unstable = run_in(&dir, &["euler", "--dt", "5", "--t-max", "5", "--seed", "3"]);
    assert_eq!(unstable.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&unstable.stderr);
    assert!(stderr.starts_with("error: euler-instability:"), "stderr: {stderr}");

    let unknown = run_in(&dir, &["analytical", "--schedule", "bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn compare_aligns_analytical_and_empirical_on_one_grid() {
    let dir = tempdir("compare");
    let out = run_in(
        &dir,
        &[
            "compare", "--seed", "5", "--trials", "20", "--t-max", "0.5", "--dt", "5e-3",
            "--mc-step", "0.1",
        ],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("compare.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,analytical,empirical_mean,empirical_std_error,asymptote");
    assert_eq!(rows.len(), 1 + 6); // t = 0, 0.1, ..., 0.5
    for row in &rows[1..] {
        assert_eq!(row.split(',').count(), 5);
    }
}
