//! CLI contract tests: exit codes, file outputs, and preset content.

use std::process::Command;

fn run(args: &[&str]) -> (String, String, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_mmsfair"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code(),
    )
}

fn tmp(name: &str) -> String {
    let dir = std::env::temp_dir().join("mmsfair-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn preset_output_matches_library_generator() {
    let (stdout, _, code) = run(&["gen", "--preset", "greedy-bad", "--n", "5"]);
    assert_eq!(code, Some(0));
    let expected =
        mmsfair::serialize_instance(&mmsfair::counterexample::gen_greedy_bad(5).unwrap());
    assert_eq!(stdout, expected);
}

#[test]
fn solve_greedy_on_the_bad_family_reports_half_but_exits_zero() {
    let inst = tmp("greedy-bad-5.json");
    let (_, _, code) = run(&["gen", "--preset", "greedy-bad", "--n", "5", "--out", &inst]);
    assert_eq!(code, Some(0));
    let (stdout, _, code) = run(&["solve", &inst, "--algorithm", "greedy"]);
    // the promised bound is 1-out-of-3, which holds, so the exit code is 0
    // even though agent 2 sits at half her pairwise threshold
    assert_eq!(code, Some(0));
    let payload: serde_json::Value = serde_json::from_str(&stdout).expect("stdout is pure JSON");
    let agents = payload["report"]["agents"].as_array().unwrap();
    // agent 2 holds 4 half-weight edges (value 2) against mu^3 = 2 and a
    // pairwise threshold of 4
    assert_eq!(agents[1]["pmms_ratio"], "1/2");
    assert_eq!(agents[1]["mms_ratio"], "1");
    assert_eq!(agents[1]["value"], "2");
}

#[test]
fn solve_cut_choose_meets_both_guarantees() {
    let inst = tmp("greedy-bad-4.json");
    run(&["gen", "--preset", "greedy-bad", "--n", "4", "--out", &inst]);
    let (_, _, code) = run(&["solve", &inst, "--algorithm", "cut-choose"]);
    assert_eq!(code, Some(0));
}

#[test]
fn verify_requirement_failure_exits_one() {
    let inst = tmp("mnp.json");
    let alloc = tmp("mnp-alloc.json");
    let (_, _, code) = run(&[
        "gen", "--preset", "mms-not-pmms", "--m-weight", "10", "--out", &inst, "--alloc-out",
        &alloc,
    ]);
    assert_eq!(code, Some(0));
    // maximin requirement holds
    let (_, _, code) = run(&["verify", &inst, &alloc, "--d", "3", "--require-mms", "1"]);
    assert_eq!(code, Some(0));
    // pairwise requirement at 1 is violated (the ratio is exactly 1/10)
    let (_, err, code) = run(&["verify", &inst, &alloc, "--d", "3", "--require-pmms", "1"]);
    assert_eq!(code, Some(1));
    assert!(err.contains("agent 1"), "violating agent is printed: {err}");
}

#[test]
fn parse_error_exits_two() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (_, _, code) = run(&["solve", &bad, "--algorithm", "greedy"]);
    assert_eq!(code, Some(2));
}

#[test]
fn cap_exceeded_exits_three() {
    // 15 parallel edges exceed the oracle's default per-agent ground cap
    let inst = tmp("too-wide.json");
    let endpoints: Vec<(usize, usize)> = vec![(1, 2); 15];
    let graph = mmsfair::Multigraph::new(2, &endpoints).unwrap();
    let valuations = (1..=2)
        .map(|a| {
            mmsfair::Valuation::Additive(mmsfair::AdditiveValuation {
                owner: a,
                weights: (0..15).map(|e| (e, mmsfair::rational::qi(1))).collect(),
            })
        })
        .collect();
    let instance = mmsfair::Instance::new(graph, valuations).unwrap();
    std::fs::write(&inst, mmsfair::serialize_instance(&instance)).unwrap();
    let (_, _, code) = run(&["mms", &inst]);
    assert_eq!(code, Some(3));
}

#[test]
fn zero_trials_bench_is_header_only() {
    let (stdout, _, code) = run(&[
        "bench", "--family", "additive", "--trials", "0", "--seed", "1", "--n", "3", "--m", "4",
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(
        stdout,
        "trial,seed,algorithm,n,m,d,agent,mu,value,mms_ratio,pmms_ratio,frugal,orientation,micros\n"
    );
}

#[test]
fn bench_additive_ratios_stay_above_one_for_cut_choose() {
    let (stdout, _, code) = run(&[
        "bench", "--family", "additive", "--trials", "20", "--seed", "11", "--n", "4", "--m",
        "8",
    ]);
    assert_eq!(code, Some(0));
    for line in stdout.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 14);
        if cols[2] == "cut-choose" {
            let ratio = cols[9];
            let ok = ratio == "inf"
                || mmsfair::rational::parse_rational(ratio).unwrap()
                    >= mmsfair::rational::qi(1);
            assert!(ok, "cut-choose row below 1: {line}");
        }
    }
}

#[test]
fn its_find_reports_transversal_or_null() {
    let graph_path = tmp("fig.json");
    std::fs::write(
        &graph_path,
        mmsfair::counterexample::fig_4xos_conflict_graph().to_json(),
    )
    .unwrap();
    let (stdout, _, code) = run(&["its", &graph_path, "--size", "1"]);
    assert_eq!(code, Some(0));
    let payload: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(payload["transversal"].is_null());
    let (stdout, _, _) = run(&["its", &graph_path, "--metrics"]);
    let payload: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(payload["thickness"], 4);
    assert_eq!(payload["max_degree"], 4);
    assert_eq!(payload["max_block_average_degree"], "3");
}

#[test]
fn xos_pmms_preset_ships_its_companion_allocation() {
    let inst = tmp("pmms-upper.json");
    let alloc = tmp("pmms-upper-alloc.json");
    let (_, _, code) = run(&[
        "gen", "--preset", "xos-pmms-upper", "--out", &inst, "--alloc-out", &alloc,
    ]);
    assert_eq!(code, Some(0));
    let (_, _, code) = run(&["verify", &inst, &alloc, "--d", "2", "--require-pmms", "1"]);
    assert_eq!(code, Some(0), "the companion allocation is pairwise exact");
}

#[test]
fn exhaustive_solver_runs_and_exits_zero() {
    let inst = tmp("tiny.json");
    run(&["gen", "--random", "additive", "--n", "2", "--m", "4", "--seed", "3", "--out", &inst]);
    let (_, _, code) = run(&["solve", &inst, "--algorithm", "exhaustive", "--d", "2"]);
    assert_eq!(code, Some(0));
}

#[test]
fn xos_upper_preset_accepts_an_external_conflict_graph() {
    let graph_path = tmp("conflict.json");
    std::fs::write(
        &graph_path,
        mmsfair::counterexample::fig_4xos_conflict_graph().to_json(),
    )
    .unwrap();
    let (stdout, _, code) = run(&[
        "gen", "--preset", "xos-upper", "--conflict", &graph_path, "--b", "4",
    ]);
    assert_eq!(code, Some(0));
    let expected = mmsfair::serialize_instance(
        &mmsfair::counterexample::gen_xos_upper(
            &mmsfair::counterexample::fig_4xos_conflict_graph(),
            4,
        )
        .unwrap(),
    );
    assert_eq!(stdout, expected);
}
