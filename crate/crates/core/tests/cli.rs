use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use maplearn::graph::WorldFile;
use maplearn::map::LearnedMap;

fn maplearn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maplearn"))
        .args(args)
        .current_dir(dir)
        .env_remove("MAPLEARN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--kind", "grid", "--width", "5", "--height", "5", "--landmarks", "all", "--seed", "7"];
    for out in ["a.json", "b.json"] {
        let mut full = args.to_vec();
        full.extend(["-o", out]);
        assert!(maplearn(&full, dir.path()).status.success());
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let (g, p) = WorldFile::from_json(std::str::from_utf8(&a).unwrap()).unwrap().into_parts().unwrap();
    assert_eq!((g.vertex_count(), g.edge_count(), p.landmarks().len()), (25, 40, 25));
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_maplearn"))
            .args([
                "generate",
                "--kind",
                "random",
                "--vertices",
                "20",
                "--landmark-count",
                "5",
                "--target-r",
                "2",
                "-o",
                out,
            ])
            .current_dir(dir.path())
            .env("MAPLEARN_SEED", seed)
            .output()
            .unwrap()
            .status
    };
    assert!(run("1", "a.json").success());
    assert!(run("1", "b.json").success());
    assert!(run("2", "c.json").success());
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
}

#[test]
fn learn_then_query_on_an_all_landmark_world() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(maplearn(
        &["generate", "--kind", "grid", "--width", "3", "--height", "3", "--seed", "1", "-o", "w.json"],
        d
    )
    .status
    .success());
    let learn = ["learn", "-w", "w.json", "--delta", "0.1", "--alpha", "0.95", "--gamma", "0.9", "--seed", "7"];
    for out in ["m1.json", "m2.json"] {
        let mut full = learn.to_vec();
        full.extend(["-o", out]);
        let o = maplearn(&full, d);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let m1 = fs::read_to_string(d.join("m1.json")).unwrap();
    assert_eq!(m1, fs::read_to_string(d.join("m2.json")).unwrap());

    let (g, p) = WorldFile::from_json(&fs::read_to_string(d.join("w.json")).unwrap()).unwrap().into_parts().unwrap();
    let map = LearnedMap::from_json(&m1).unwrap();
    let (from, to) = (p.class_of(0), p.class_of(8));
    let o = maplearn(&["query", "-m", "m1.json", "--from", &from.to_string(), "--to", &to.to_string()], d);
    assert!(o.status.success());
    let text = stdout(&o);
    let oracle = g.bfs_distances(0)[8].unwrap();
    assert!(text.contains(&format!("length: {oracle}")), "{text}");
    assert!(text.starts_with(&format!("waypoints: {from} -> ")), "{text}");
    let answer = map.global_path_query(from, to).unwrap();
    let labels = answer.path().unwrap().labels.join(" ");
    assert!(text.contains(&format!("labels: {labels}")));
    assert_eq!(g.follow_names(0, &answer.path().unwrap().labels), Some(8));
}

#[test]
fn learn_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    maplearn(&["generate", "--kind", "grid", "--width", "2", "--height", "2", "-o", "w.json"], d);
    let o = maplearn(
        &[
            "learn",
            "-w",
            "w.json",
            "--delta",
            "0.2",
            "--alpha",
            "0.9",
            "--gamma",
            "0.9",
            "-o",
            "m.json",
            "--trace-dir",
            "t",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let identify = fs::read_to_string(d.join("t/identify.ndjson")).unwrap();
    let first: serde_json::Value = serde_json::from_str(identify.lines().next().unwrap()).unwrap();
    for key in ["step", "intended", "traversed_label", "arrived_class", "landmark", "entry_label"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    assert!(d.join("t/landmark_L0.ndjson").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(maplearn(&["generate", "--bogus"], d).status.code(), Some(2));
    assert_eq!(maplearn(&["frobnicate"], d).status.code(), Some(2));
    let o = maplearn(
        &["learn", "-w", "missing.json", "--delta", "0.1", "--alpha", "0.9", "--gamma", "0.9", "-o", "m.json"],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.json"));

    maplearn(&["generate", "--kind", "grid", "--width", "2", "--height", "2", "-o", "w.json"], d);
    let o = maplearn(&["learn", "-w", "w.json", "--alpha", "0.9", "--gamma", "0.9", "-o", "m.json"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("delta"), "{}", stderr(&o));

    fs::write(
        d.join("bad.json"),
        r#"{"generator": {"kind": "grid", "width": 2, "height": 2, "landmarks": "all", "seed": 0},
        "learn": {"delta_g": 0.2, "alpha": 0.9}, "trials": 1, "seed": 0}"#,
    )
    .unwrap();
    let o = maplearn(&["evaluate", "-c", "bad.json", "-o", "out"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));

    fs::write(
        d.join("broken_world.json"),
        r#"{"vertices": 2, "edges": [{"u": 0, "v": 0, "label_u": "a", "label_v": "b"}], "classes": [[0], [1]]}"#,
    )
    .unwrap();
    let o = maplearn(&["export", "-w", "broken_world.json"], d);
    assert_eq!(o.status.code(), Some(2));

    let o = maplearn(&["generate", "--kind", "grid", "--width", "1", "--height", "3", "-o", "x.json"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(maplearn(&["--help"], d).status.success());
}

#[test]
fn evaluate_exits_one_when_the_target_is_missed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // corners only (r = 2) but exploration cut to a single move: no route can be found
    fs::write(
        d.join("c.json"),
        r#"{"generator": {"kind": "grid", "width": 4, "height": 4, "landmarks": {"explicit": [0, 3, 12, 15]}, "seed": 0},
            "learn": {"delta_g": 0.2, "alpha": 0.95, "gamma": 0.9, "exploration_length": 1},
            "trials": 3, "seed": 1}"#,
    )
    .unwrap();
    let o = maplearn(&["evaluate", "-c", "c.json", "-o", "out"], d);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("REJECTED"));
    let csv = fs::read_to_string(d.join("out/stats.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("trial,queries,answered,valid,max_stretch,steps_identify,steps_select,steps_filter,pass")
    );
    assert!(lines.all(|l| l.starts_with(|c: char| c.is_ascii_digit()) && l.ends_with(",false")));
}

#[test]
fn export_and_suites() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    maplearn(&["generate", "--kind", "building", "-o", "b.json", "--dot", "b.dot"], d);
    let o = maplearn(&["export", "-w", "b.json"], d);
    assert!(o.status.success());
    assert_eq!(stdout(&o), fs::read_to_string(d.join("b.dot")).unwrap());
    assert!(stdout(&o).starts_with("graph"));

    fs::write(
        d.join("sep.json"),
        r#"{"alpha": 1.0, "lengths": [1, 2], "experiments": 10, "planted": 6, "seed": 3,
            "world": {"kind": "grid", "width": 3, "height": 3, "landmarks": "all", "seed": 0}}"#,
    )
    .unwrap();
    let o = maplearn(&["separation", "-c", "sep.json", "-o", "sep_report.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy 1.000 PASS"), "{}", stdout(&o));
    assert!(d.join("sep_report.json").exists());

    fs::write(
        d.join("bounds.json"),
        r#"{"seed": 1, "repetitions": 40, "plants": 4,
            "selection": [{"alpha": 1.0, "d": 2, "r": 2, "delta_s": 0.2}],
            "filter": [{"alpha": 1.0, "gamma": 0.9, "delta_fl": 0.2}]}"#,
    )
    .unwrap();
    let o = maplearn(&["bounds", "-c", "bounds.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
}
