use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flexhull(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexhull"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FLEXHULL_SEED")
        .env_remove("FLEXHULL_THREADS")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn scenario_aggregate_disaggregate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&flexhull(
        &[
            "scenario", "gen", "--n", "3", "--d", "4", "--seed", "5", "--out", "sc",
        ],
        p,
    ));
    for f in ["fleet.json", "demand.csv", "prices.csv"] {
        assert!(p.join("sc").join(f).exists(), "{f}");
    }
    let demand = fs::read_to_string(p.join("sc/demand.csv")).unwrap();
    assert!(demand.starts_with("t,q_1,q_2,q_3\n"));
    assert_eq!(demand.lines().count(), 5);

    ok(&flexhull(
        &["aggregate", "--spec", "sc/fleet.json", "--out", "v.json"],
        p,
    ));
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(p.join("v.json")).unwrap()).unwrap();
    assert_eq!(v["d"], 4);
    assert_eq!(v["sign_vectors"].as_array().unwrap().len(), 16);

    let cols = v["columns"].as_array().unwrap().len();
    let mut alpha = vec![0.0; 16];
    alpha[0] = 0.5;
    alpha[3] = 0.5;
    fs::write(
        p.join("w.json"),
        serde_json::json!({ "alpha": alpha }).to_string(),
    )
    .unwrap();
    ok(&flexhull(
        &[
            "disaggregate",
            "--vertices",
            "v.json",
            "--weights",
            "w.json",
            "--out",
            "s.csv",
        ],
        p,
    ));
    let sched = fs::read_to_string(p.join("s.csv")).unwrap();
    assert!(sched.starts_with("t,x_1,x_2,x_3,total\n"));
    assert_eq!(sched.lines().count(), 5);

    // Point input: the first column itself.
    let point = v["columns"][0].clone();
    fs::write(
        p.join("pt.json"),
        serde_json::json!({ "point": point }).to_string(),
    )
    .unwrap();
    ok(&flexhull(
        &[
            "disaggregate",
            "--vertices",
            "v.json",
            "--weights",
            "pt.json",
            "--out",
            "s2.csv",
        ],
        p,
    ));
    let rows: Vec<Vec<f64>> = fs::read_to_string(p.join("s2.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    for (t, row) in rows.iter().enumerate() {
        let want = point[t].as_f64().unwrap();
        assert!((row[4] - want).abs() < 1e-6);
    }
    assert!(cols >= 16);
}

#[test]
fn bench_run_writes_outputs_and_honours_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("b.toml"),
        "tuples = [[2, 4]]\ng = \"pow2\"\nout_dir = \"res\"\n",
    )
    .unwrap();
    ok(&flexhull(&["bench", "run", "--config", "b.toml"], p));
    let res = fs::read_to_string(p.join("res/results.csv")).unwrap();
    let mut lines = res.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,d,g,repetition,seed,objective,z_approx,z_exact,z_noflex,upr_percent,error"
    );
    assert_eq!(lines.count(), 2);
    for f in ["results.json", "summary.csv", "timings.csv"] {
        assert!(p.join("res").join(f).exists(), "{f}");
    }

    let seeded = Command::new(env!("CARGO_BIN_EXE_flexhull"))
        .args(["bench", "run", "--config", "b.toml", "--out", "res2"])
        .current_dir(p)
        .env("FLEXHULL_SEED", "99")
        .output()
        .unwrap();
    ok(&seeded);
    assert_ne!(res, fs::read_to_string(p.join("res2/results.csv")).unwrap());
}

#[test]
fn robustness_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("r.toml"), "tuples = [[2, 4]]\ng = 4\nredraws = 3\n").unwrap();
    ok(&flexhull(
        &["bench", "robustness", "--config", "r.toml", "--out", "rob"],
        p,
    ));
    let csv = fs::read_to_string(p.join("rob/robustness.csv")).unwrap();
    assert!(csv.starts_with("n,d,g,objective,redraws,upr_count,upr_min,upr_median,upr_max,error\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.toml"), "tuples = [[2, 4]]\nunknown = 1\n").unwrap();
    let out = flexhull(&["bench", "run", "--config", "bad.toml"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown"));

    let out = flexhull(
        &["aggregate", "--spec", "missing.json", "--out", "v.json"],
        p,
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    fs::write(p.join("d.csv"), "t,q_1\n1,0.5\n2,NaN\n").unwrap();
    fs::write(
        p.join("c.toml"),
        "tuples = [[2, 2]]\ndemand_csv = \"d.csv\"\nout_dir = \"o\"\n",
    )
    .unwrap();
    ok(&flexhull(&["bench", "run", "--config", "c.toml"], p));
    let res = fs::read_to_string(p.join("o/results.csv")).unwrap();
    assert!(res.contains("non-finite"), "{res}");
}
