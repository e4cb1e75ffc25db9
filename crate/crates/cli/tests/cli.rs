//! End-to-end tests that drive the compiled binary: flag parsing, human and
//! structured output, exit codes, config files, and determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twolocus"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal termination")
}

const REFERENCE_ARGS: [&str; 6] = ["--point", "0.4,0.2,0.1,0.3", "--a", "0.5", "--b", "0.5"];

#[test]
fn step_prints_the_hand_computed_successor() {
    let out = run(&[&["step"], &REFERENCE_ARGS[..]].concat());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "(0.35, 0.25, 0.15, 0.25)\n");
}

#[test]
fn limit_prints_the_rest_point_with_slice_data() {
    let out = run(&[&["limit"], &REFERENCE_ARGS[..]].concat());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "limit (0.3, 0.3, 0.2, 0.2)\nalpha 0.6\nlambda2 0.5\n"
    );
}

#[test]
fn invalid_inputs_exit_with_the_usage_code() {
    // Off-simplex point (sums to 2).
    let out = run(&[
        "step", "--point", "0.5,0.5,0.5,0.5", "--a", "0.5", "--b", "0.5",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("sum"), "stderr: {}", stderr(&out));

    // Parameter out of [0,1].
    let out = run(&[
        "step", "--point", "0.4,0.2,0.1,0.3", "--a", "1.5", "--b", "0.5",
    ]);
    assert_eq!(exit_code(&out), 2);

    // Unknown flag (handled by the argument parser itself).
    let out = run(&["step", "--bogus"]);
    assert_eq!(exit_code(&out), 2);

    // Missing mode.
    let out = run(&REFERENCE_ARGS);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("mode"), "stderr: {}", stderr(&out));

    // Grid flags are not valid in single-parameter modes.
    let out = run(&[
        "step", "--point", "0.4,0.2,0.1,0.3", "--a-grid", "0:1:5", "--a", "0.5", "--b", "0.5",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unwritable_output_paths_exit_with_the_io_code() {
    let out = run(&[
        &["step"][..],
        &REFERENCE_ARGS[..],
        &["--out", "/nonexistent-dir/x.csv"][..],
    ]
    .concat());
    assert_eq!(exit_code(&out), 4);
    assert!(!stderr(&out).is_empty());
}

#[test]
fn trajectory_rows_reparse_onto_the_simplex() {
    let out = run(&[&["trajectory"], &REFERENCE_ARGS[..]].concat());
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,x,y,u,v,D"));
    let mut expected_n = 0usize;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 6, "row: {line}");
        assert_eq!(cells[0].parse::<usize>().unwrap(), expected_n);
        let coords: Vec<f64> = cells[1..5]
            .iter()
            .map(|c| c.parse::<f64>().unwrap())
            .collect();
        let sum: f64 = coords.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12, "row {line} sum {sum}");
        assert!(coords.iter().all(|c| *c >= 0.0), "row {line}");
        let d = cells[5].parse::<f64>().unwrap();
        assert!((d - (coords[1] * coords[2] - coords[0] * coords[3])).abs() <= 1e-15);
        expected_n += 1;
    }
    // Coupling halves each step from -0.1; the run stops once successive
    // states agree to 1e-10, which takes 30 steps plus the initial row.
    assert_eq!(expected_n, 31);
}

#[test]
fn exhausted_step_budgets_exit_with_the_budget_code() {
    let out = run(&[
        &["trajectory"][..],
        &REFERENCE_ARGS[..],
        &["--max-steps", "3"][..],
    ]
    .concat());
    assert_eq!(exit_code(&out), 5);
    // The partial orbit is still emitted: header plus rows n = 0..=3.
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn rational_trajectories_are_exact_and_stop_at_the_frozen_step_count() {
    let out = run(&[
        "trajectory",
        "--point",
        "2/5,1/5,1/10,3/10",
        "--a",
        "1/2",
        "--b",
        "1/2",
        "--arithmetic",
        "rational",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,x,y,u,v,D");
    assert_eq!(lines[1], "0,2/5,1/5,1/10,3/10,-1/10");
    assert_eq!(lines[2], "1,7/20,1/4,3/20,1/4,-1/20");
    // Coupling is exactly -1/10 * (1/2)^n, and the successive max-distance
    // at step n is (1/2) * |D_(n-1)| = (1/10) * (1/2)^n, first <= 1e-10 at
    // n = 30; rows run n = 0..=30.
    assert_eq!(lines.len(), 32);
    assert!(lines[31].starts_with("30,"));
    assert!(
        lines[31].ends_with(",-1/10737418240"),
        "final coupling should be -1/(10*2^30): {}",
        lines[31]
    );
}

#[test]
fn sweep_grids_are_complete_ordered_and_include_the_identity_cell() {
    let args = [
        "sweep",
        "--a-grid",
        "0:1:11",
        "--b-grid",
        "0:1:11",
        "--point",
        "1/4,1/4,1/4,1/4",
    ];
    let out = run(&args);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "a,b,x0,y0,u0,v0,alpha,lambda2,steps,x_lim,y_lim,u_lim,v_lim,oracle_gap,d0"
    );
    assert_eq!(lines.len(), 1 + 121);

    // Identity cell is present, first, and reported with zero steps and
    // the input as its own limit.
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&first[..2], &["0", "0"]);
    assert_eq!(first[8], "0");
    assert_eq!(&first[9..13], &first[2..6]);

    // Rows are ordered by (a-index, b-index): the a column is
    // non-decreasing, and within each a-block the b column increases.
    let a_col: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse::<f64>().unwrap())
        .collect();
    assert!(a_col.windows(2).all(|w| w[0] <= w[1]));
    for block in 0..11 {
        let b_col: Vec<f64> = lines[1 + block * 11..1 + (block + 1) * 11]
            .iter()
            .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .collect();
        assert!(b_col.windows(2).all(|w| w[0] < w[1]), "a-block {block}");
    }
}

#[test]
fn repeated_runs_write_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("one.csv");
    let second = dir.path().join("two.csv");
    for path in [&first, &second] {
        let out = run(&[
            "sweep",
            "--a-grid",
            "0:1:6",
            "--b-grid",
            "0:1:6",
            "--point",
            "0.4,0.2,0.1,0.3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
        assert!(stdout(&out).is_empty(), "file output must not echo to stdout");
    }
    let one = std::fs::read(&first).unwrap();
    let two = std::fs::read(&second).unwrap();
    assert!(!one.is_empty());
    assert_eq!(one, two);
}

#[test]
fn rational_sweep_cells_freeze_the_exact_reference_run() {
    let out = run(&[
        "sweep",
        "--a",
        "1/2",
        "--b",
        "1/2",
        "--point",
        "2/5,1/5,1/10,3/10",
        "--arithmetic",
        "rational",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&cells[..2], &["1/2", "1/2"]);
    assert_eq!(cells[6], "3/5"); // alpha
    assert_eq!(cells[7], "1/2"); // lambda2
    assert_eq!(cells[8], "30"); // steps to reach successive difference <= 1e-10
    assert_eq!(cells[14], "-1/10"); // d0
}

#[test]
fn json_output_mirrors_the_record_field_names() {
    let out = run(&[
        "sweep",
        "--a",
        "0.5",
        "--b",
        "0.5",
        "--point",
        "0.4,0.2,0.1,0.3",
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let row = rows[0].as_object().unwrap();
    for key in [
        "a", "b", "x0", "y0", "u0", "v0", "alpha", "lambda2", "steps_taken", "x_lim", "y_lim",
        "u_lim", "v_lim", "oracle_gap", "d0",
    ] {
        assert!(row.contains_key(key), "missing key {key}");
    }
    assert_eq!(row["lambda2"].as_f64().unwrap(), 0.5);

    // Rational scalars appear as exact fraction strings.
    let out = run(&[
        "step",
        "--point",
        "2/5,1/5,1/10,3/10",
        "--a",
        "1/2",
        "--b",
        "1/2",
        "--arithmetic",
        "rational",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["x"].as_str().unwrap(), "7/20");

    // Trajectory rows carry the step index and the coupling column.
    let out = run(&[
        &["trajectory"][..],
        &REFERENCE_ARGS[..],
        &["--format", "json", "--max-steps", "2"][..],
    ]
    .concat());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows[0]["n"].as_u64().unwrap(), 0);
    assert!(rows[0].as_object().unwrap().contains_key("D"));
}

#[test]
fn config_files_supply_values_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(
        &path,
        "# reference single-step run\n\
         mode = step\n\
         point = 0.4,0.2,0.1,0.3\n\
         a = 0.25\n\
         b = 0.25\n",
    )
    .unwrap();

    // File alone: a quarter-strength pull toward the rest point.
    let out = run(&["--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "(0.375, 0.225, 0.125, 0.275)\n");

    // Flags override file values.
    let out = run(&["--config", path.to_str().unwrap(), "--a", "0.5", "--b", "0.5"]);
    assert_eq!(stdout(&out), "(0.35, 0.25, 0.15, 0.25)\n");

    // Unknown keys are a usage error.
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "mode = step\nwibble = 3\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);

    // Missing config files are an I/O error.
    let out = run(&["--config", dir.path().join("absent.conf").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 4);
}

#[test]
fn verify_mode_passes_on_a_parameter_grid_with_the_default_point() {
    let out = run(&["verify", "--a-grid", "0.1:0.9:3", "--b-grid", "0.1:0.9:3"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "a,b,x0,y0,u0,v0,alpha,lambda2,steps,converged,limit_check,decay_check,\
         alpha_check,fixed_point_check,limit_gap,decay_worst,alpha_drift,final_d_abs,all_pass"
    );
    assert_eq!(lines.len(), 1 + 9);
    for line in &lines[1..] {
        assert!(line.ends_with(",true"), "cell failed: {line}");
        // Default point: the grid actually exercises decay (nonzero steps).
        let steps: usize = line.split(',').nth(8).unwrap().parse().unwrap();
        assert!(steps > 1, "vacuous cell: {line}");
    }
}
