use std::io::{BufRead, BufReader};
use std::process::{Child, Command, Output, Stdio};

fn lpirsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpirsi")).args(args).env_remove("LPIRSI_LOG").output().expect("binary runs")
}

/// Whitespace-separated arguments.
fn run(args: &str) -> Output {
    lpirsi(&args.split_whitespace().collect::<Vec<_>>())
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_two_server_pir() {
    let out = run("simulate --n 2 --k 2 --m 0 --epsilon 0 --variant w --trials 2000");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("exact cost    = 3/2"), "{text}");
    assert!(text.contains("within 4 standard errors: yes"), "{text}");
}

#[test]
fn simulate_is_deterministic() {
    let args = "simulate --n 3 --k 4 --t 1/2 --trials 500 --seed 11";
    assert_eq!(run(args).stdout, run(args).stdout);
}

#[test]
fn verify_certifies() {
    let out = run("verify --n 3 --k 3 --m 1 --t 1/2 --variant w --joint 2");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("max ratio = 2 = e^ε, certified"), "{text}");
    assert!(text.contains("matches"), "{text}");
}

#[test]
fn verify_perfect_privacy() {
    let out = run("verify --n 3 --k 3 --t 1");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("max ratio = 1 = e^ε, certified"));
}

#[test]
fn verify_with_decimal_epsilon_notes_rounding() {
    let out = run("verify --n 3 --k 3 --epsilon 0.3 --variant ws");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("note:"));
}

#[test]
fn ws_below_r_one_is_a_domain_error() {
    let out = run("verify --n 3 --k 3 --m 1 --t 1/4 --variant ws");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("requires r ≥ 1"), "{}", stderr(&out));
}

#[test]
fn bad_arguments_exit_two() {
    for args in [
        "verify --n 3 --k 3 --m 3",
        "verify --n 3 --k 3 --variant x",
        "verify --n 3 --k 3 --t 1/2 --epsilon 1",
        "simulate --n 3 --k 3 --q 256",
        "sweep --k 5:3",
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args}");
    }
}

#[test]
fn ws_needs_one_side_message() {
    let out = run("simulate --n 3 --k 3 --m 2 --variant ws");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("WS variant requires M=1"));
}

#[test]
fn oversized_enumeration_exits_three() {
    let out = run("verify --n 6 --k 9 --m 1");
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("exceeds the limit"));
}

#[test]
fn table_check_against_reference() {
    let out = run("table --n 3 --k 3 --m 1 --pi 0,1,2 --check");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("table1: all 10 rows match"), "{text}");
    assert!(text.contains("X1[1]+X2[1]"), "{text}");

    let out = run("table --n 3 --k 4 --m 1 --variant ws --check");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("62 realizations"));

    let out = run("table --n 4 --k 3 --m 1 --check");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("available"));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let path = path.to_str().unwrap();
    let out = lpirsi(&["sweep", "--k", "3:8", "--n", "3", "--m", "1", "--t", "1/2", "--variant", "w", "-o", path]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("n,k,m,t,epsilon,exact_cost"));
    assert!(lines[1].starts_with("3,3,1,1/2,0.69314718056,1.16666666667,"));
    assert!(lines[1..].iter().all(|l| l.contains(",true,")));
}

#[test]
fn sweep_records_failing_points() {
    let out = run("sweep --k 3,4 --n 3 --t 1/4 --variant ws");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains("requires r")));
}

struct Servers(Vec<Child>);

impl Drop for Servers {
    fn drop(&mut self) {
        for child in &mut self.0 {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

#[test]
fn serve_and_query() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("db.txt");
    let db = db.to_str().unwrap();
    let out = lpirsi(&["gendb", "--k", "3", "--l", "2", "--seed", "4", "-o", db]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let mut servers = Servers(Vec::new());
    let mut endpoints = Vec::new();
    for i in 0..3 {
        let cfg = dir.path().join(format!("s{i}.conf"));
        std::fs::write(&cfg, "host = 127.0.0.1\nport = 0\nq = 257\nK = 3\nL = 2\ndatabase = db.txt\n").unwrap();
        let mut child = Command::new(env!("CARGO_BIN_EXE_lpirsi"))
            .args(["serve", "--config", cfg.to_str().unwrap()])
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
        servers.0.push(child);
        endpoints.push(line.trim().strip_prefix("listening on ").expect("listening line").to_string());
    }
    let joined = endpoints.join(",");
    let args = ["query", "--servers", &joined, "--db", db, "--w", "2", "--s", "3", "--t", "1/2", "--seed", "1"];
    let out = lpirsi(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let stored = std::fs::read_to_string(db).unwrap();
    let expected: Vec<&str> = stored.lines().nth(5).unwrap().split_whitespace().collect();
    assert!(text.contains(&format!("message 2 = [{}]", expected.join(", "))), "{text}\n{stored}");
    assert_eq!(lpirsi(&args).stdout, out.stdout);

    drop(servers);
    let out = lpirsi(&args);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}
