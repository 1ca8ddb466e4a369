use std::process::{Command, Output};

fn dyadisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadisc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = dyadisc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_symmetrized_n1() {
    let text = stdout(&[
        "gen",
        "--n",
        "1",
        "--sigma",
        "identity",
        "--family",
        "symmetrized",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "num_x,num_y,den");
    assert_eq!(lines.len(), 9);
    let mut rows: Vec<&str> = lines[1..].to_vec();
    rows.sort_unstable();
    assert_eq!(
        rows,
        ["0,0,2", "0,2,2", "1,1,2", "1,1,2", "1,1,2", "1,1,2", "2,0,2", "2,2,2"]
    );
}

#[test]
fn verify_passes_up_to_eight() {
    let text = stdout(&["verify", "--n-max", "8"]);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.contains(",pass,")), "{text}");
}

#[test]
fn sweep_ratio_rows() {
    let text = stdout(&[
        "sweep",
        "--family",
        "symmetrized",
        "--r",
        "-0.3",
        "--p",
        "2",
        "--q",
        "2",
        "--n",
        "4",
        "--n-max",
        "14",
    ]);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let ratio_col = header.iter().position(|&h| h == "ratio").unwrap();
    let ratios: Vec<f64> = lines
        .map(|l| l.split(',').nth(ratio_col).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 11);
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    assert!(min > 0.0 && max / min <= 4.0, "{ratios:?}");
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "norm", "--n", "7", "--sigma", "random", "--seed", "3", "--p", "1,2,inf", "--q", "2,inf",
        "--r", "-0.2",
    ];
    let a = dyadisc(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_dyadisc"))
        .args(args)
        .env("DYADISC_THREADS", "1")
        .output()
        .unwrap();
    // (1, q, -0.2) is inadmissible, so the whole grid is refused
    assert_eq!(a.status.code(), Some(2));
    assert_eq!(a.stdout, b.stdout);

    let args = [
        "sweep", "--n", "3", "--n-max", "7", "--p", "2,inf", "--q", "2", "--r", "-0.4,0",
    ];
    let a = stdout(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_dyadisc"))
        .args(args)
        .env("DYADISC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.as_bytes(), b.stdout.as_slice());
}

#[test]
fn json_mirrors_csv() {
    let csv = stdout(&["qmc", "--family", "davenport", "--n", "1", "--n-max", "4"]);
    let json = stdout(&[
        "qmc",
        "--family",
        "davenport",
        "--n",
        "1",
        "--n-max",
        "4",
        "--format",
        "json",
    ]);
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(json.lines().count(), csv.lines().count() - 1);
    for line in json.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, header);
    }
    // Davenport error is exactly 2^-(n+2)
    assert!(csv.lines().nth(1).unwrap().contains(",1/8,"));
}

#[test]
fn inadmissible_parameters_are_rejected() {
    let out = dyadisc(&["norm", "--n", "3", "--p", "1", "--q", "2", "--r", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("admissible"), "{err}");
}

#[test]
fn classic_and_coeffs_columns() {
    let text = stdout(&["classic", "--n", "2", "--p", "2,3"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "quantity,p,numerator,denominator,mantissa,exponent,integral,norm,grid_log2"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("star,inf,"));

    let text = stdout(&["coeffs", "--n", "3", "--jmax", "1"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "j1,j2,m1,m2,mantissa,exponent,value");
    // boxes per axis over levels -1..=1: 1 + 1 + 2
    assert_eq!(lines.len(), 1 + 16);
    assert!(lines.contains(&"0,0,0,0,1,8,0.00390625"));
}

#[test]
fn writes_to_file() {
    let dir = std::env::temp_dir().join(format!("dyadisc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("points.csv");
    let p = path.to_str().unwrap();
    assert!(stdout(&["gen", "--n", "2", "--family", "davenport", "--out", p]).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
    std::fs::remove_dir_all(&dir).unwrap();
}
