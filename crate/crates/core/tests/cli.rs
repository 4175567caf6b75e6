use std::process::Command;

use phimod::cli::{main_with_args, run_check, CheckId, CheckSpec, Report, Status, WeightSel};
use phimod::localring::Case;

fn spec(id: CheckId, p: u32, case: Case) -> CheckSpec {
    let mut s = CheckSpec::new(id, vec![p]);
    s.cases = vec![case];
    s
}

#[test]
fn surjinj_ramified_p2_has_two_passing_points() {
    let r = run_check(&spec(CheckId::Surjinj, 2, Case::Ramified)).unwrap();
    assert_eq!(r.entries.len(), 2);
    for e in &r.entries {
        assert_eq!(e.status, Status::Pass, "{}", e.detail);
        assert_eq!(e.values.as_object().unwrap().len(), 9);
    }
}

#[test]
fn exem_calcul_dims_follow_binomials() {
    let mut s = CheckSpec::new(CheckId::ExemCalcul, vec![2]);
    s.q = Some(2);
    s.n_max = Some(6);
    let r = run_check(&s).unwrap();
    let e = &r.entries[0];
    assert_eq!(e.status, Status::Pass);
    let dims = &e.values["d2"]["dims"];
    for n in 0..=6u64 {
        assert_eq!(dims[n as usize], serde_json::json!([n + 1, 2 * (n + 1), n + 1]));
    }
}

#[test]
fn nonadm_single_weight_p3() {
    let mut s = spec(CheckId::Nonadm, 3, Case::Unramified);
    s.weights = WeightSel::List(vec![vec![1, 1]]);
    let r = run_check(&s).unwrap();
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.entries[0].status, Status::Pass);
    assert!(r.entries[0].values["h"][2].as_u64().unwrap() >= 1);
}

#[test]
fn report_is_identical_across_thread_counts() {
    let mut a = CheckSpec::new(CheckId::Nonadm, vec![2]);
    a.jobs = 1;
    let mut b = a.clone();
    b.jobs = 4;
    assert_eq!(run_check(&a).unwrap().to_json(), run_check(&b).unwrap().to_json());
}

#[test]
fn report_round_trips_through_json() {
    let r = run_check(&spec(CheckId::Gennr, 2, Case::Unramified)).unwrap();
    let back: Report = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back.to_json(), r.to_json());
    assert_eq!(back.entries, r.entries);
    assert_eq!(r.summary.pass, 4);
}

#[test]
fn json_report_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let code = main_with_args([
        "phimod",
        "check",
        "genram",
        "--p",
        "3",
        "--case",
        "ram",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r.entries.len(), 3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.conf");
    std::fs::write(&cfg, "# p=2 ramified grid\np=2\ncase=ram\nNmax=2\n").unwrap();
    // Nmax=2 in the file is invalid, the flag repairs it
    let path = dir.path().join("r.json");
    let args = |extra: &[&str]| {
        let mut v = vec!["phimod", "check", "nonadm", "--config", cfg.to_str().unwrap(), "--json", path.to_str().unwrap()];
        v.extend_from_slice(extra);
        v.into_iter().map(String::from).collect::<Vec<_>>()
    };
    assert_eq!(main_with_args(args(&[])), 2);
    assert_eq!(main_with_args(args(&["--Nmax", "6"])), 0);
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r.config.n_max, Some(6));
    assert_eq!(r.config.cases, vec![Case::Ramified]);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(main_with_args(["phimod", "check", "nosuch"]), 2);
    assert_eq!(main_with_args(["phimod", "check", "gennr", "--case", "sideways"]), 2);
    assert_eq!(main_with_args(["phimod", "check", "gennr", "--case", "ram"]), 2);
    assert_eq!(main_with_args(["phimod", "check", "gennr", "--p", "4"]), 2);
    assert_eq!(main_with_args(["phimod", "check", "gennr", "--weights", "0,5"]), 2);
}

#[test]
fn inconclusive_points_exit_with_one_unless_allowed() {
    // a window of three levels cannot certify the ramified p = 3 profile
    let base = ["phimod", "check", "nonadm", "--p", "3", "--case", "ram", "--weights", "1", "--Nmax", "3"];
    assert_eq!(main_with_args(base), 1);
    let mut allowed = base.to_vec();
    allowed.push("--allow-inconclusive");
    assert_eq!(main_with_args(allowed), 0);
    let mut s = spec(CheckId::Nonadm, 3, Case::Ramified);
    s.weights = WeightSel::List(vec![vec![1]]);
    s.n_max = Some(3);
    assert_eq!(run_check(&s).unwrap().entries[0].status, Status::Inconclusive);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_phimod");
    let ok = Command::new(exe).args(["check", "param-system", "--p", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let table = String::from_utf8(ok.stdout).unwrap();
    assert!(table.contains("param-system") && table.contains("2 pass, 0 fail, 0 inconclusive"));
    let bad = Command::new(exe).args(["check", "param-system", "--steps", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
