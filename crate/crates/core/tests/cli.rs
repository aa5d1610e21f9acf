use std::path::Path;
use std::process::{Command, Output};

fn hoopsnet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoopsnet"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HOOPSNET_THREADS")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const GAMES: &str = "season,day,team_a,team_b,score_a,score_b\n\
2024,1,A,B,70,60\n2024,2,B,C,65,60\n2024,3,C,A,80,70\n2024,4,A,D,71,50\n";

#[test]
fn help_exits_zero_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let cmds: [&[&str]; 13] = [
        &[],
        &["network", "build"],
        &["centrality"],
        &["lkl"],
        &["quantiles"],
        &["embed"],
        &["experiment", "matchups"],
        &["experiment", "blocks"],
        &["experiment", "passes"],
        &["experiment", "pairs"],
        &["similarity-report"],
        &["synth"],
        &["network"],
    ];
    for cmd in cmds {
        let mut args = cmd.to_vec();
        args.push("--help");
        let out = hoopsnet(&args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["centrality"][..],
        &["no-such-command"],
        &["synth", "--nodes", "many"],
        &[
            "quantiles",
            "--games",
            "g.csv",
            "--season",
            "2024",
            "--quantiles",
            "0",
        ],
    ] {
        let out = hoopsnet(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn invalid_model_parameters_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = hoopsnet(&["synth", "--p-in", "0.1", "--p-out", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn duplicate_ranking_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.csv"), GAMES).unwrap();
    std::fs::write(
        dir.path().join("r.csv"),
        "season,team,rank\n2024,A,1\n2024,B,2\n2024,A,3\n",
    )
    .unwrap();
    let out = hoopsnet(
        &[
            "quantiles",
            "--games",
            "g.csv",
            "--rankings",
            "r.csv",
            "--season",
            "2024",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(
        msg.contains("r.csv") && msg.contains('4') && msg.contains("duplicate"),
        "{msg}"
    );
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hoopsnet(
        &[
            "centrality",
            "--games",
            "absent.csv",
            "--season",
            "2024",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(matches!(out.status.code(), Some(2 | 3)), "{}", stderr(&out));
    assert!(stderr(&out).contains("absent.csv"));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.csv"), GAMES).unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = hoopsnet(
        &[
            "centrality",
            "--games",
            "g.csv",
            "--season",
            "2024",
            "--out",
            "blocker/sub",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"dims": 8, "dimz": 9}"#).unwrap();
    let out = hoopsnet(&["--config", "c.json", "synth"], dir.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("dimz"), "{}", stderr(&out));
}

#[test]
fn config_file_and_flag_layering() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"synth": {"num_nodes": 9}, "seed": 3}"#,
    )
    .unwrap();
    let out = hoopsnet(&["--config", "c.json", "synth", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let edges = std::fs::read_to_string(dir.path().join("x/edges.csv")).unwrap();
    assert!(edges.contains("n8,,") && !edges.contains("n9"));

    let out = hoopsnet(
        &["--config", "c.json", "synth", "--nodes", "12", "--out", "y"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let edges = std::fs::read_to_string(dir.path().join("y/edges.csv")).unwrap();
    assert!(edges.contains("n11,,"));
}

#[test]
fn centrality_csv_lists_every_team() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.csv"), GAMES).unwrap();
    let out = hoopsnet(
        &[
            "centrality",
            "--games",
            "g.csv",
            "--season",
            "2024",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("o/centrality.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5, "{text}");
    for team in ["A", "B", "C", "D"] {
        assert!(
            rows.iter().any(|r| r.starts_with(&format!("{team},"))),
            "{text}"
        );
    }
}
