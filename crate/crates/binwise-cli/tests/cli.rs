//! End-to-end runs of the binwise binary: every subcommand, determinism,
//! and the no-partial-output contract.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn binwise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binwise"))
        .args(args)
        .env_remove("BINWISE_THREADS")
        .output()
        .expect("spawn binwise")
}

fn run_ok(args: &[&str]) -> String {
    let out = binwise(args);
    assert!(
        out.status.success(),
        "binwise {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

fn run_err(args: &[&str]) -> String {
    let out = binwise(args);
    assert!(!out.status.success(), "binwise {args:?} unexpectedly passed");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&run_ok(args)).expect("JSON output")
}

fn write(dir: &TempDir, name: &str, content: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

/// 26 passwords spread over 6 of the 16 length-2 bins.
fn toy_corpus(dir: &TempDir) -> String {
    let mut lines = String::new();
    for (signature_example, repeat) in [
        ("ab", 9u8),
        ("a1", 6),
        ("12", 4),
        ("Ab", 3),
        ("a!", 2),
        ("AB", 2),
    ] {
        for i in 0..repeat {
            // vary the second character within the same class to get
            // distinct passwords without leaving the bin
            let mut password = String::from(&signature_example[..1]);
            let last = signature_example.as_bytes()[1];
            password.push((last + i) as char);
            lines.push_str(&password);
            lines.push('\n');
        }
    }
    write(dir, "toy.raw", &lines)
}

#[test]
fn analyze_toy_corpus_reports_six_utilized_bins() {
    let dir = TempDir::new().unwrap();
    let corpus = toy_corpus(&dir);
    let report = json(&["analyze", &corpus, "--lmax", "2"]);
    assert_eq!(report["total"], 26);
    assert_eq!(report["total_utilized"], 6);
    assert_eq!(report["utilization"][1]["length"], 2);
    assert_eq!(report["utilization"][1]["available"], "16");
    assert_eq!(report["utilization"][1]["utilized"], 6);
    assert_eq!(report["top_by_count"].as_array().unwrap().len(), 6);
    assert_eq!(report["top_by_count"][0]["signature"], "LL");
    assert_eq!(report["top_by_count"][0]["count"], "9");
    // DD holds 4 of 26 passwords in a capacity-100 bin, the densest here
    assert_eq!(report["top_by_density"][0]["signature"], "DD");
    assert_eq!(report["top_by_density"][0]["density"]["exact"], "1/25");
}

#[test]
fn analyze_pattern_share_matches_constructed_mass() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "syn.freq", "6266\tPass1\n3734\tzzzz\n");
    let report = json(&["analyze", &corpus, "--corpus-format", "freq", "--lmax", "8"]);
    let shares = report["pattern_shares"].as_array().unwrap();
    assert_eq!(shares[3]["pattern"], "U1L+D+");
    assert_eq!(shares[3]["mass"], 6266);
    assert_eq!(shares[3]["share"], 0.6266);
    assert_eq!(shares[0]["pattern"], "L+");
    assert_eq!(shares[0]["share"], 0.3734);
}

#[test]
fn policy_reports_the_textbook_numbers() {
    let report = json(&[
        "policy", "--users", "2^25", "--budget", "2^56", "--tolerated", "2^10",
        "--alphabet", "95",
    ]);
    assert_eq!(report["min_length"], 11);
    assert_eq!(report["budget"]["log2"], 56.0);

    let report = json(&[
        "policy", "--users", "2^25", "--rate", "350e9", "--seconds", "216000",
        "--tolerated", "2^10",
    ]);
    assert_eq!(report["budget"]["exact"], "75600000000000000");
    assert_eq!(report["budget"]["log2"], 56.07);

    let report = json(&[
        "policy", "--users", "2^25", "--budget", "2^56", "--salted-users", "2^20",
        "--tolerated", "2^10",
    ]);
    assert_eq!(report["effective_budget"]["exact"], "68719476736");
    assert_eq!(report["effective_budget"]["log2"], 36.0);
    assert_eq!(report["budget"]["log2"], 56.0);
}

fn sixteen_bins(dir: &TempDir) -> String {
    let mut spec = String::new();
    for a in ["L", "U", "D", "S"] {
        for b in ["L", "U", "D", "S"] {
            spec.push_str(a);
            spec.push_str(b);
            spec.push('\n');
        }
    }
    write(dir, "universe.txt", &spec)
}

#[test]
fn assign_round_robin_spreads_exactly() {
    let dir = TempDir::new().unwrap();
    let universe = sixteen_bins(&dir);
    let csv = run_ok(&[
        "assign", "--universe", &universe, "--users", "32", "--seed", "7",
        "--strategy", "round_robin",
    ]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,users,bins,min_count,max_count,expected_density,max_density,stretch"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "round_robin");
    assert_eq!(row[1], "32");
    assert_eq!(row[2], "16");
    assert_eq!(row[3], "2", "min count");
    assert_eq!(row[4], "2", "max count");
}

#[test]
fn assign_all_compares_every_strategy() {
    let dir = TempDir::new().unwrap();
    let universe = sixteen_bins(&dir);
    let rows = json(&[
        "assign", "--universe", &universe, "--users", "160", "--seed", "3",
        "--strategy", "all", "--format", "json",
    ]);
    let names: Vec<&str> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["strategy"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["round_robin", "density_ordered", "random", "two_choices"]);
    for row in rows.as_array().unwrap() {
        assert_eq!(row["users"], 160);
        assert_eq!(row["bins"], 16);
    }
}

const TOY_GRAMMAR: &str = r#"{
  "preterminals": [
    {"template": "L6$1", "count": 5},
    {"template": "L5!", "count": 3},
    {"template": "$L412", "count": 2}
  ],
  "dictionaries": {
    "6": ["monkey", "donkey", "jaguar", "rabbit", "turtle", "python", "falcon", "parrot"],
    "5": ["tiger", "horse", "zebra", "sheep"],
    "4": ["lion", "deer"]
  }
}"#;

#[test]
fn grammar_toy_orders_both_ways() {
    let dir = TempDir::new().unwrap();
    let instance = write(&dir, "toy.json", TOY_GRAMMAR);
    let report = json(&["grammar", &instance]);
    assert_eq!(report["equivalent"], true);

    let probability = report["probability_order"].as_array().unwrap();
    assert_eq!(probability[0]["template"], "L6$1");
    assert_eq!(probability[0]["guesses"][0], "monkey$1");
    assert_eq!(probability[2]["guesses"][1], "$deer12");

    let density = report["density_order"].as_array().unwrap();
    let templates: Vec<&str> = density.iter().map(|b| b["template"].as_str().unwrap()).collect();
    assert_eq!(templates, ["$L412", "L5!", "L6$1"]);
    let exacts: Vec<&str> = density
        .iter()
        .map(|b| b["density"]["exact"].as_str().unwrap())
        .collect();
    assert_eq!(exacts, ["1", "3/4", "5/8"]);
    assert_eq!(density[0]["guesses"][0], "$lion12");
}

#[test]
fn longpass_counts_hand_share() {
    let dir = TempDir::new().unwrap();
    let corpus = write(
        &dir,
        "long.freq",
        "45\tthisismypasswordhere\n55\tcompletelyunrelatedz\n999\tpassword\n999\tMYPASSWORDISCAPITAL!\n",
    );
    let popular = write(&dir, "popular.txt", "password\nmonkey\n");
    let report = json(&[
        "longpass", &corpus, &popular, "--corpus-format", "freq", "--min-len", "12",
    ]);
    assert_eq!(report["qualifying_mass"], 100);
    assert_eq!(report["matching_mass"], 45);
    assert_eq!(report["share"], 0.45);
}

#[test]
fn utilization_emits_cumulative_rows() {
    let dir = TempDir::new().unwrap();
    let corpus = toy_corpus(&dir);
    let csv = run_ok(&["utilization", &corpus, "--lmax", "3"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "length,available,utilized,cumulative");
    assert_eq!(lines[1], "1,4,0,0");
    assert_eq!(lines[2], "2,16,6,6");
    assert_eq!(lines[3], "3,64,0,6");
    assert_eq!(lines.len(), 4);
}

#[test]
fn attack_reaches_full_coverage_at_the_space_size() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "singles.raw", "a\nb\nc\n");
    let csv = run_ok(&[
        "attack", "--train", &corpus, "--test", &corpus, "--lmax", "1",
        "--checkpoints", "2,7",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "log2_budget,budget,expected_cracked_exact,expected_cracked,fraction"
    );
    // budget 2^7 = 128 clamps to the 95-candidate space: everything cracked
    let last: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(last[1], "95");
    assert_eq!(last[2], "3");
    assert_eq!(last[4], "1");
}

#[test]
fn attack_density_order_dominates_probability_order() {
    let dir = TempDir::new().unwrap();
    // dense short digits vs popular long lowercase: the orders disagree
    let corpus = write(
        &dir,
        "mixed.freq",
        "40\t12\n35\t77\n80\tpassword\n60\tmonkeys\n30\tPass1\n",
    );
    let dense = run_ok(&[
        "attack", "--train", &corpus, "--test", &corpus, "--corpus-format", "freq",
        "--lmax", "8", "--order", "density", "--checkpoints", "2,6,10,20,30,40",
    ]);
    let popular = run_ok(&[
        "attack", "--train", &corpus, "--test", &corpus, "--corpus-format", "freq",
        "--lmax", "8", "--order", "probability", "--checkpoints", "2,6,10,20,30,40",
    ]);
    let fractions = |csv: &str| -> Vec<f64> {
        csv.lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    let dense = fractions(&dense);
    let popular = fractions(&popular);
    assert_eq!(dense.len(), 6);
    for (d, p) in dense.iter().zip(&popular) {
        assert!(d >= p, "density curve fell below probability curve: {d} < {p}");
    }
    assert!(dense.iter().zip(&popular).any(|(d, p)| d > p));
}

#[test]
fn hybrid_attack_cracks_popular_units_first() {
    let dir = TempDir::new().unwrap();
    // top-2 passwords carry 60 of 100 units of mass
    let corpus = write(
        &dir,
        "zipfish.freq",
        "35\tpassword\n25\tmonkey\n20\tdragon\n15\tshadow\n5\tletmein\n",
    );
    let report = json(&[
        "attack", "--train", &corpus, "--test", &corpus, "--corpus-format", "freq",
        "--lmax", "8", "-k", "2", "--checkpoints", "1", "--format", "json",
    ]);
    assert_eq!(report["points"][0]["budget"], "2");
    assert_eq!(report["points"][0]["expected_cracked"]["exact"], "60");
    assert_eq!(report["points"][0]["fraction"]["value"], 0.6);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let universe = sixteen_bins(&dir);
    let args = [
        "assign", "--universe", &universe, "--users", "500", "--seed", "11",
        "--strategy", "all",
    ];
    assert_eq!(run_ok(&args), run_ok(&args));

    let corpus = toy_corpus(&dir);
    let args = ["analyze", &corpus, "--lmax", "4"];
    assert_eq!(run_ok(&args), run_ok(&args));
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let out_str = out.to_str().unwrap();

    let err = run_err(&["analyze", "/nonexistent/corpus.raw", "--out", out_str]);
    assert!(err.contains("corpus"), "unhelpful error: {err}");
    assert!(!out.exists());

    // format rejection happens before any write, too
    let dir2 = TempDir::new().unwrap();
    let corpus = toy_corpus(&dir2);
    run_err(&["analyze", &corpus, "--format", "csv", "--out", out_str]);
    assert!(!out.exists());
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = TempDir::new().unwrap();
    let corpus = toy_corpus(&dir);
    let out = dir.path().join("util.csv");
    let stdout = run_ok(&["utilization", &corpus, "--lmax", "2"]);
    run_ok(&["utilization", &corpus, "--lmax", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(fs::read_to_string(&out).unwrap(), stdout);
}

#[test]
fn thread_cap_env_var_is_validated() {
    let dir = TempDir::new().unwrap();
    let corpus = toy_corpus(&dir);

    let out = Command::new(env!("CARGO_BIN_EXE_binwise"))
        .args(["analyze", &corpus, "--lmax", "2"])
        .env("BINWISE_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = Command::new(env!("CARGO_BIN_EXE_binwise"))
        .args(["analyze", &corpus, "--lmax", "2"])
        .env("BINWISE_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("BINWISE_THREADS"));
}

#[test]
fn seed_is_required_for_assign() {
    let dir = TempDir::new().unwrap();
    let universe = sixteen_bins(&dir);
    let err = run_err(&["assign", "--universe", &universe, "--users", "8"]);
    assert!(err.contains("--seed"), "missing-seed error should name the flag: {err}");
}
