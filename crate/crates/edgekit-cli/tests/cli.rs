//! End-to-end tests that drive the compiled `edgekit` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn edgekit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgekit"))
        .args(args)
        .current_dir(cwd)
        .env_remove("EDGEKIT_JOBS")
        .output()
        .expect("failed to spawn edgekit")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Write a P2 PGM with a vertical step edge at `step_col`.
fn write_step_pgm(path: &Path, w: usize, h: usize, step_col: usize) {
    let mut body = format!("P2\n{w} {h}\n255\n");
    for _ in 0..h {
        for x in 0..w {
            let v = if x < step_col { 40 } else { 200 };
            body.push_str(&format!("{v} "));
        }
        body.push('\n');
    }
    fs::write(path, body).unwrap();
}

fn read_pgm_pixels(path: &Path) -> (usize, usize, Vec<u32>) {
    let text = fs::read(path).unwrap();
    // outputs are written as binary P5
    assert_eq!(&text[..2], b"P5");
    let header = String::from_utf8_lossy(&text[..32]);
    let mut nums = header
        .split_ascii_whitespace()
        .skip(1)
        .filter_map(|t| t.parse::<usize>().ok());
    let w = nums.next().unwrap();
    let h = nums.next().unwrap();
    let pixels = text[text.len() - w * h..]
        .iter()
        .map(|&b| u32::from(b))
        .collect();
    (w, h, pixels)
}

/// Build a tiny dataset: two step images with single-column ground truth.
fn write_dataset(root: &Path) {
    let images = root.join("images");
    let gt = root.join("groundtruth");
    fs::create_dir_all(&images).unwrap();
    for (name, col) in [("a", 10), ("b", 16)] {
        write_step_pgm(&images.join(format!("{name}.pgm")), 32, 24, col);
        let dir = gt.join(name);
        fs::create_dir_all(&dir).unwrap();
        let mut body = String::from("P2\n32 24\n255\n");
        for _ in 0..24 {
            for x in 0..32 {
                body.push_str(if x == col { "255 " } else { "0 " });
            }
            body.push('\n');
        }
        fs::write(dir.join("gt1.pgm"), body).unwrap();
    }
}

#[test]
fn detect_finds_a_vertical_step() {
    let dir = tempfile::tempdir().unwrap();
    write_step_pgm(&dir.path().join("in.pgm"), 40, 30, 20);
    let out = edgekit(
        &["detect", "--threshold", "128", "in.pgm", "out.pgm"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));

    let (w, h, px) = read_pgm_pixels(&dir.path().join("out.pgm"));
    assert_eq!((w, h), (40, 30));
    let on = px.iter().filter(|&&v| v == 255).count();
    assert!(on > 0, "no edge pixels detected");
    // every detection sits within two columns of the step
    for (i, &v) in px.iter().enumerate() {
        if v == 255 {
            let x = i % w;
            assert!((18..=21).contains(&x), "stray edge at column {x}");
        }
    }
    assert!(dir.path().join("out.pgm.manifest.json").exists());
}

#[test]
fn detect_missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgekit(
        &["detect", "--threshold", "128", "absent.pgm", "out.pgm"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
    assert!(
        !dir.path().join("out.pgm").exists(),
        "partial output left behind"
    );
}

#[test]
fn detect_even_kernel_size_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_step_pgm(&dir.path().join("in.pgm"), 16, 16, 8);
    let out = edgekit(
        &[
            "detect",
            "--size",
            "4",
            "--threshold",
            "128",
            "in.pgm",
            "out.pgm",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 1, "{}", stderr(&out));
    assert!(!dir.path().join("out.pgm").exists());
}

#[test]
fn canny_defaults_match_explicit_flags() {
    let dir = tempfile::tempdir().unwrap();
    write_step_pgm(&dir.path().join("in.pgm"), 32, 32, 16);
    let a = edgekit(&["canny", "in.pgm", "a.pgm"], dir.path());
    let b = edgekit(
        &[
            "canny",
            "--kernel",
            "sobel",
            "--size",
            "3",
            "--sigma",
            "1.4",
            "--ksize",
            "5",
            "--high-ratio",
            "0.7",
            "--low-ratio",
            "0.3",
            "--threshold-source",
            "gradient",
            "in.pgm",
            "b.pgm",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&a), 0, "{}", stderr(&a));
    assert_eq!(exit_code(&b), 0, "{}", stderr(&b));
    assert_eq!(
        fs::read(dir.path().join("a.pgm")).unwrap(),
        fs::read(dir.path().join("b.pgm")).unwrap()
    );
}

#[test]
fn canny_rejects_zero_high_ratio() {
    let dir = tempfile::tempdir().unwrap();
    write_step_pgm(&dir.path().join("in.pgm"), 16, 16, 8);
    let out = edgekit(
        &["canny", "--high-ratio", "0", "in.pgm", "out.pgm"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 1, "{}", stderr(&out));
    assert!(!dir.path().join("out.pgm").exists());
}

#[test]
fn bench_writes_csv_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let out = edgekit(
        &[
            "bench",
            "--dataset",
            ".",
            "--filters",
            "3,5",
            "--tolerance",
            "1",
            "--jobs",
            "2",
            "--out",
            "report",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));

    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# edgekit-report v1"));
    assert_eq!(lines[1], "filter,recall,precision,f1,best_threshold");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("3x3,"));
    assert!(lines[3].starts_with("5x5,"));
    // clean steps are recovered essentially perfectly
    let f1: f64 = lines[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!(f1 > 0.9, "unexpectedly poor f1 on a noiseless step: {f1}");

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["reports"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("report.manifest.json").exists());

    // the stdout summary repeats the CSV
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), csv.trim());
}

#[test]
fn bench_runs_are_reproducible_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let mut reports = Vec::new();
    for (jobs, prefix) in [("1", "r1"), ("4", "r4")] {
        let out = edgekit(
            &[
                "bench",
                "--dataset",
                ".",
                "--filters",
                "3,7,prewitt5",
                "--tolerance",
                "1",
                "--jobs",
                jobs,
                "--out",
                prefix,
            ],
            dir.path(),
        );
        assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
        reports.push(fs::read_to_string(dir.path().join(format!("{prefix}.csv"))).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn bench_empty_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("images")).unwrap();
    fs::create_dir_all(dir.path().join("groundtruth")).unwrap();
    let out = edgekit(&["bench", "--dataset", ".", "--out", "report"], dir.path());
    assert_eq!(exit_code(&out), 3, "{}", stderr(&out));
    assert!(!dir.path().join("report.csv").exists());
}

#[test]
fn kernels_prints_the_3x3_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgekit(&["kernels", "--size", "3", "--axis", "x"], dir.path());
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Vec<i64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows, vec![vec![1, 0, -1], vec![2, 0, -2], vec![1, 0, -1]]);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgekit(&["frobnicate"], dir.path());
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgekit(&["--help"], dir.path());
    assert_eq!(exit_code(&out), 0);
}
