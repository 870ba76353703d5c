//! CLI behavior: schema contracts, cache lifecycle, config validation, and
//! the fault-injection hook.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_klooster")
}

#[test]
fn verify_t12_schema_contract() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"experiment":"VerifyT12","primes":{"list":[1009]},"ell":8,"N_rule":"p"}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let status = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--output")
        .arg(&out)
        .arg("--cache-dir")
        .arg(dir.path().join("cache"))
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,s,N,ell,D0,lhs,rhs,ratio,pass,elapsed_s,status"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("1009,2,1009,8,"));
    assert!(row.ends_with(",ok"));
    assert!(row.contains(",true,"));

    // a manifest with per-cell wall times and the config echo sits next to it
    let manifest = std::fs::read_to_string(dir.path().join("out.manifest.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(parsed["cells"][0]["p"], 1009);
    assert_eq!(parsed["cells"][0]["status"], "ok");
    assert!(parsed["cells"][0]["elapsed_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn verify_t15_schema_contract() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"experiment":"VerifyT15","primes":{"list":[10007]},"N_rule":"p","y_rule":"log_power:3"}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let status = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--output")
        .arg(&out)
        .arg("--cache-dir")
        .arg(dir.path().join("cache"))
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "p,s,N,y,alpha,beta,gamma,Psi,L0,lhs,rhs,ratio,pass,elapsed_s,status"
    );
    assert!(text.lines().nth(1).unwrap().contains(",true,"));
}

#[test]
fn jcount_matches_brute_force_oracle() {
    // p=5, H=4, M = all residues {1,2,3,4}: 64 solutions by enumeration
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"experiment":"Jcount","primes":{"list":[5]},"j_params":{"h":4,"d":4,"r":1}}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let status = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0..6], ["5", "4", "4", "1", "4", "64"]);
}

#[test]
fn table_command_caches_and_rebuilds_after_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run_table = || {
        let out = Command::new(bin())
            .args(["table", "--p", "101", "--s", "2", "--cache-dir"])
            .arg(&cache)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let cold = run_table();
    assert!(cold.contains("cache_hit=false"));
    assert!(cold.contains("deligne_pass=true"));
    let warm = run_table();
    assert!(warm.contains("cache_hit=true"));

    // corrupt the cache file: the next run rebuilds instead of failing
    let cache_file = std::fs::read_dir(&cache)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "klsm"))
        .unwrap();
    std::fs::write(&cache_file, b"garbage").unwrap();
    let rebuilt = run_table();
    assert!(rebuilt.contains("cache_hit=false"));
    assert!(rebuilt.contains("deligne_pass=true"));

    // numbers identical to the cold run (determinism through the cache)
    let strip = |s: &str| {
        s.split_whitespace()
            .filter(|t| !t.starts_with("path=") && !t.starts_with("cache_hit="))
            .collect::<Vec<_>>()
            .join(" ")
    };
    assert_eq!(strip(&cold), strip(&rebuilt));

    // cache --clear removes it
    let out = Command::new(bin())
        .args(["cache", "--clear", "--cache-dir"])
        .arg(&cache)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("cleared 1"));
}

#[test]
fn out_of_window_config_aborts_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    // N = p^0.4 is below the p^(1/2+2/ell) window for every even ell
    std::fs::write(
        &config,
        r#"{"experiment":"VerifyT12","primes":{"list":[10007]},"N_rule":"p^0.4","ell":8}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert!(!result.status.success());
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    assert!(text.lines().count() <= 1, "no data rows may be computed");
}

#[test]
fn type_i_rows_reproducible_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"experiment":"TypeI","primes":{"list":[101,211]},"N_rule":"p","seed":99,"j_params":{"d":20,"r":-1}}"#,
    )
    .unwrap();
    let run_to = |name: &str, seed: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(bin());
        cmd.args(["run", "--config"])
            .arg(&config)
            .arg("--output")
            .arg(&out)
            .arg("--cache-dir")
            .arg(dir.path().join("cache"));
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.status().unwrap().success());
        std::fs::read(out).unwrap()
    };
    let a = run_to("a.csv", None);
    let b = run_to("b.csv", None);
    assert_eq!(a, b, "same seed, same bytes");
    let c = run_to("c.csv", Some("100"));
    assert_ne!(a, c, "different seed draws different weights");
}

#[test]
fn cache_env_var_overrides_default() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("env-cache");
    let out = Command::new(bin())
        .args(["table", "--p", "31", "--s", "2"])
        .env("KLOOSTER_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(cache.join("k_s2_p31_v1.klsm").exists());
}

#[test]
fn table_experiment_manifest_records_cache_hits() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"experiment":"Table","primes":{"list":[101]},"s_values":[2]}"#,
    )
    .unwrap();
    let run_once = |name: &str| {
        let out = dir.path().join(name);
        assert!(Command::new(bin())
            .args(["run", "--config"])
            .arg(&config)
            .arg("--output")
            .arg(&out)
            .arg("--cache-dir")
            .arg(dir.path().join("cache"))
            .status()
            .unwrap()
            .success());
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("{}.manifest.json", name.trim_end_matches(".csv")))).unwrap(),
        )
        .unwrap();
        manifest["cells"][0]["cache_hit"].as_bool().unwrap()
    };
    assert!(!run_once("cold.csv"));
    assert!(run_once("warm.csv"));
    assert!(dir.path().join("cache").join("k_s2_p101_v1.klsm").exists());
}

#[test]
fn cell_rerun_in_isolation_reproduces_sweep_row() {
    // seeded weight draws are keyed by the cell's (p, s), not its position,
    // so extracting one prime into its own config reproduces its row
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep.json");
    let single = dir.path().join("single.json");
    std::fs::write(
        &sweep,
        r#"{"experiment":"TypeI","primes":{"list":[101,211]},"N_rule":"p","seed":5,"j_params":{"d":10,"r":2}}"#,
    )
    .unwrap();
    std::fs::write(
        &single,
        r#"{"experiment":"TypeI","primes":{"list":[211]},"N_rule":"p","seed":5,"j_params":{"d":10,"r":2}}"#,
    )
    .unwrap();
    let run = |cfg: &std::path::Path, name: &str| {
        let out = dir.path().join(name);
        assert!(Command::new(bin())
            .args(["run", "--config"])
            .arg(cfg)
            .arg("--output")
            .arg(&out)
            .arg("--cache-dir")
            .arg(dir.path().join("cache"))
            .status()
            .unwrap()
            .success());
        std::fs::read_to_string(out).unwrap()
    };
    let sweep_rows = run(&sweep, "sweep.csv");
    let single_rows = run(&single, "single.csv");
    let row_211_sweep = sweep_rows.lines().find(|l| l.starts_with("211,")).unwrap();
    let row_211_single = single_rows.lines().find(|l| l.starts_with("211,")).unwrap();
    assert_eq!(row_211_sweep, row_211_single);
}

#[test]
fn json_format_emits_valid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"experiment":"Q","primes":{"list":[101]},"N_rule":"fixed:100","format":"json"}"#,
    )
    .unwrap();
    let out = dir.path().join("out.json");
    assert!(Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--output")
        .arg(&out)
        .arg("--cache-dir")
        .arg(dir.path().join("cache"))
        .status()
        .unwrap()
        .success());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed[0]["p"], 101);
    assert_eq!(parsed[0]["N"], 100);
    assert_eq!(parsed[0]["n_terms"], 61);
    assert_eq!(parsed[0]["status"], "ok");
}

#[test]
fn runtime_cell_failure_preserves_rows_and_exits_nonzero() {
    // N = 2*10^8 passes config validation but the sieve build exceeds its
    // memory budget at run time; the cell must surface as an error row
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"experiment":"Q","primes":{"list":[101]},"N_rule":"fixed:200000000"}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--output")
        .arg(&out)
        .arg("--cache-dir")
        .arg(dir.path().join("cache"))
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("101,"));
    assert!(row.contains("error:"), "status column carries the error: {row}");
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("\"error\""), "machine-readable record on stderr");
}

#[test]
fn selftest_fault_injection_flips_criterion_one() {
    let out = Command::new(bin())
        .args(["selftest", "--inject-deligne-fault"])
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let line1 = text
        .lines()
        .find(|l| l.contains("deligne-bound"))
        .expect("criterion 1 line present");
    assert!(line1.contains("FAIL"), "injected violation must fail: {line1}");
}
