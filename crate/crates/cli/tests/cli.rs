use std::process::Command;

fn shortcuts(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_shortcuts")).args(args).output().unwrap()
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn build_sweep_writes_csv_and_is_reproducible() {
    let args = ["build", "--n", "512", "--d", "4", "--seeds", "0..3"];
    let a = shortcuts(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    assert!(text.starts_with("mode,n,D,seed,k_d,"));
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.contains(",ok,")));
    assert_eq!(stdout(&shortcuts(&args)), text);
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(shortcuts(&["build", "--n", "512", "--d", "4"]).status.code(), Some(2));
    assert_eq!(shortcuts(&["build", "--n", "512", "--d", "4", "--seeds", "0", "--c-cong", "-1"]).status.code(), Some(2));
    assert_eq!(shortcuts(&["build", "--config", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(shortcuts(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn failed_rows_exit_with_one() {
    // the walk study rejects odd diameters; the row is kept and marked
    let o = shortcuts(&["walk-study", "--n", "400", "--d", "3", "--seeds", "0", "--walk-trials", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",failed,"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = std::env::temp_dir().join(format!("shortcuts-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("sweep.cfg");
    let out = dir.join("out.csv");
    std::fs::write(&cfg, "n = 300\nd = 5\nseeds = 7\nc_p = 0.5\n").unwrap();
    let o = shortcuts(&[
        "mst",
        "--config",
        cfg.to_str().unwrap(),
        "--d",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("mst,300,4,7,"), "{row}");
    assert!(row.contains("phases="));
}

#[test]
fn fit_reads_a_report() {
    let dir = std::env::temp_dir().join(format!("shortcuts-fit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("report.csv");
    let mut text = String::from("mode,n,D,seed,k_d,congestion,dilation,quality,rounds,detail,wall_ms,status,reason,config_hash\n");
    for e in 10..15u32 {
        let n = 1u64 << e;
        let q = (n as f64).powf(0.25);
        text.push_str(&format!("build,{n},3,0,0,0,0,{q},,,,ok,,x\n"));
    }
    std::fs::write(&csv, text).unwrap();
    let o = shortcuts(&["fit", "--input", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "3");
    assert!((row[1].parse::<f64>().unwrap() - 0.25).abs() < 1e-6);
    assert_eq!(row[5], "5");
    let short = dir.join("short.csv");
    std::fs::write(&short, "n,D,quality\n16,3,2\n32,3,3\n").unwrap();
    assert_eq!(shortcuts(&["fit", "--input", short.to_str().unwrap()]).status.code(), Some(1));
}
