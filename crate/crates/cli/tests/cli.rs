use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use qamshape::awgn_mi::DEFAULT_QUADRATURE_ORDER;
use qamshape::constellation::normalized;
use qamshape::{entropy, gauss_hermite, mb_pmf, mi_awgn_2d, square_qam, Pmf};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qamshape")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

type Row = HashMap<String, String>;

fn table(text: &str) -> Vec<Row> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn payload(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn num(row: &Row, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qamshape-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// One channel, 2¹³ symbols and 100 steps: enough for the estimators, quick to run.
fn small_config(extra: &str) -> PathBuf {
    let path = scratch(&format!("link-{}.cfg", extra.len()));
    let text = format!(
        "# small link\nchannels = 1\nsamples_per_symbol = 4\nsymbols_per_channel = 8192\nsteps = 100\n{extra}\n"
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn mi_curve_gain_at_1024qam() {
    let rows = table(&ok(&["mi-curve", "--order", "1024", "--snr-min", "18", "--snr-max", "18"]));
    assert_eq!(rows.len(), 3);
    let by: HashMap<&str, f64> = rows.iter().map(|r| (r["family"].as_str(), num(r, "mi_4d"))).collect();
    let gain = by["opt"] - by["mb"];
    assert!((gain - 0.1).abs() < 0.05, "{gain}");
    assert!(by["mb"] > by["uniform"]);
}

#[test]
fn uniform_without_penalty_is_awgn() {
    let text = ok(&["mi-curve", "--order", "64", "--families", "uniform", "--c", "0", "--snr-min", "5", "--snr-max", "15", "--snr-step", "5"]);
    let rows = table(&text);
    assert_eq!(rows.len(), 3);
    let c = square_qam(64).unwrap();
    let pmf = Pmf::uniform(64);
    let unit = normalized(&c, &pmf).unwrap();
    let rule = gauss_hermite(DEFAULT_QUADRATURE_ORDER).unwrap();
    for r in &rows {
        let snr = num(r, "snr_gauss_db");
        let want = 2.0 * mi_awgn_2d(&unit, &pmf, snr, &rule).unwrap();
        assert!((num(r, "mi_4d") - want).abs() < 1e-10 * want);
        assert_eq!(num(r, "effective_snr_db"), snr);
    }
}

#[test]
fn delta_column_is_offset_from_capacity() {
    let text = ok(&["mi-curve", "--order", "16", "--snr-min", "4", "--snr-max", "10", "--snr-step", "3", "--delta-mi"]);
    let rows = table(&text);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let snr = num(r, "snr_gauss_db");
        let want = num(r, "mi_4d") - 2.0 * (1.0 + 10f64.powf(snr / 10.0)).log2();
        assert!((num(r, "delta_mi_4d") - want).abs() < 1e-10);
    }
    let plain = table(&ok(&["mi-curve", "--order", "16", "--snr-min", "4", "--snr-max", "4"]));
    assert!(!plain[0].contains_key("delta_mi_4d"));
}

#[test]
fn rows_are_sorted_by_snr_then_family() {
    let rows = table(&ok(&["mi-curve", "--order", "16", "--snr-min", "6", "--snr-max", "8", "--snr-step", "1", "--families", "opt,uniform"]));
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r["snr_gauss_db"].clone(), r["family"].clone())).collect();
    let want: Vec<(String, String)> =
        ["6", "7", "8"].iter().flat_map(|s| ["uniform", "opt"].map(|f| (s.to_string(), f.to_string()))).collect();
    assert_eq!(keys, want);
}

#[test]
fn pmf_table_is_normalized_and_ring_constant() {
    let rows = table(&ok(&["pmf", "--order", "64", "--snr", "18", "--family", "opt"]));
    assert_eq!(rows.len(), 64);
    let total: f64 = rows.iter().map(|r| num(r, "probability")).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let mut by_ring: HashMap<String, Vec<f64>> = HashMap::new();
    for r in &rows {
        by_ring.entry(r["ring_sq_magnitude"].clone()).or_default().push(num(r, "probability"));
    }
    for probs in by_ring.values() {
        assert!(probs.iter().all(|p| p == &probs[0]));
    }
    let power: f64 = rows.iter().map(|r| num(r, "probability") * (num(r, "re").powi(2) + num(r, "im").powi(2))).sum();
    assert!((power - 1.0).abs() < 1e-9);
}

#[test]
fn tailored_pmf_moves_mass_to_the_shoulder() {
    let rows = table(&ok(&["pmf", "--order", "256", "--snr", "18", "--family", "opt"]));
    let probs: Vec<f64> = rows.iter().map(|r| num(r, "probability")).collect();
    let r2: Vec<f64> = rows.iter().map(|r| num(r, "ring_sq_magnitude")).collect();
    let sum: f64 = probs.iter().sum();
    let opt = Pmf::new(probs.iter().map(|p| p / sum).collect()).unwrap();
    let h = entropy(&opt);

    // MB reference of equal entropy, by bisection on lambda
    let c = square_qam(256).unwrap();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if entropy(&mb_pmf(&c, mid).unwrap()) > h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mb = mb_pmf(&c, lo).unwrap();
    assert!((entropy(&mb) - h).abs() < 0.01);

    let e0 = 170.0;
    let mass = |p: &Pmf, keep: &dyn Fn(f64) -> bool| -> f64 {
        p.probs().iter().zip(&r2).filter(|(_, r)| keep(**r)).map(|(q, _)| q).sum()
    };
    assert!(mass(&opt, &|r| r > e0 / 2.0) > mass(&mb, &|r| r > e0 / 2.0));
    assert!(mass(&opt, &|r| r >= 250.0) < mass(&mb, &|r| r >= 250.0));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["mi-curve", "--snr-min", "1"]).status.code(), Some(2));
    assert_eq!(run(&["mi-curve", "--order", "100", "--snr-min", "1", "--snr-max", "2"]).status.code(), Some(2));
    assert_eq!(run(&["mi-curve", "--order", "16", "--snr-min", "3", "--snr-max", "1"]).status.code(), Some(2));
    assert_eq!(run(&["mi-curve", "--order", "16", "--snr-min", "1", "--snr-max", "1", "--families", "qpsk"]).status.code(), Some(2));
    assert_eq!(run(&["pmf", "--order", "16", "--snr", "10", "--family", "x"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let out = run(&["mi-curve", "--order", "16", "--c", "3", "--snr-min", "-3", "--snr-max", "-3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("snr_gauss_db = -3"));
}

#[test]
fn out_flag_writes_the_same_payload() {
    let args = ["mi-curve", "--order", "16", "--snr-min", "10", "--snr-max", "11"];
    let stdout = ok(&args);
    let path = scratch("curve.csv");
    let mut with_out: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    assert!(ok(&with_out).is_empty());
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(payload(&file), payload(&stdout));
    assert!(file.lines().any(|l| l.starts_with("# optimizer.")));
    assert!(file.lines().any(|l| l.starts_with("# quadrature:")));
    assert!(file.lines().any(|l| l.starts_with("# timestamp_unix:")));
}

#[test]
fn numbers_carry_at_most_twelve_significant_digits() {
    let text = ok(&["mi-curve", "--order", "64", "--snr-min", "12", "--snr-max", "12", "--delta-mi"]);
    for row in table(&text) {
        for (k, v) in &row {
            if k == "family" || v.is_empty() {
                continue;
            }
            let x: f64 = v.parse().unwrap();
            let mantissa = v.split(['e', 'E']).next().unwrap();
            let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
            assert!(digits.trim_start_matches('0').len() <= 12, "{k} = {v}");
            assert_eq!(format!("{:.11e}", x), format!("{:.11e}", v.parse::<f64>().unwrap()));
        }
    }
}

#[test]
fn simulate_is_seeded_and_echoes_its_setup() {
    let cfg = small_config("");
    let c = cfg.to_str().unwrap();
    let args = ["simulate", "--desk", "--config", c, "--families", "gaussian,uniform:16", "--power-min", "2", "--power-max", "2", "--seed", "7"];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(payload(&a), payload(&b));
    let rows = table(&a);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["family"], "gaussian");
    assert_eq!(rows[1]["family"], "uniform:16");
    assert!((num(&rows[1], "kurtosis") + 0.68).abs() < 1e-9);
    for key in ["config.steps: 100", "config.rrc_rolloff:", "config.samples_per_symbol: 4", "config.seed: 7", "propagation:", "receiver:"] {
        assert!(a.lines().any(|l| l.starts_with(&format!("# {key}"))), "missing {key}");
    }
    let other = ok(&["simulate", "--desk", "--config", c, "--families", "gaussian,uniform:16", "--power-min", "2", "--power-max", "2", "--seed", "8"]);
    assert_ne!(payload(&a), payload(&other));
}

#[test]
fn config_errors_name_the_line() {
    let path = scratch("broken.cfg");
    std::fs::write(&path, "channels = 1\nsteps = many\n").unwrap();
    let out = run(&["simulate", "--config", path.to_str().unwrap(), "--power-min", "0", "--power-max", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn estimate_c_without_nonlinearity_fails_cleanly() {
    let cfg = small_config("gamma_per_w_km = 0");
    let out = run(&["estimate-c", "--desk", "--config", cfg.to_str().unwrap(), "--probe-power", "6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no measurable NLI"));
}
