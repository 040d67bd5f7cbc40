use std::path::Path;
use std::process::{Command, Output};

fn ndcofdm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndcofdm"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .arg("--quiet")
        .env_remove("NDCOFDM_WORKERS")
        .output()
        .expect("spawn ndcofdm")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_SIM: &str = r#"
seed = 11

[[simulate]]
scheme = "ndc"
channel = "H3"
M = 16
n = 64
ebn0_db = [4.0, 8.0]
min_bits = 20000
min_errors = 20
max_frames = 2000

[[simulate]]
scheme = "dco-osm"
channel = "HPrac2"
M = 8
bias_db = 7.0
n = 64
ebn0_db = { start = 120.0, stop = 124.0, step = 2.0 }
min_bits = 20000
min_errors = 20
max_frames = 2000
"#;

#[test]
fn simulate_is_byte_identical_across_reruns_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL_SIM);
    let a_dir = dir.path().join("a");
    let b_dir = dir.path().join("b");
    let a = ndcofdm(&["simulate", "--config", &cfg, "--workers", "1"], &a_dir);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = ndcofdm(&["simulate", "--config", &cfg, "--workers", "3"], &b_dir);
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let ca = std::fs::read(a_dir.join("small.csv")).unwrap();
    let cb = std::fs::read(b_dir.join("small.csv")).unwrap();
    assert_eq!(ca, cb);

    let text = String::from_utf8(ca).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "source,scheme,channel,M,bias_db,reconstruction,ebn0_db,bits,errors,ber");
    assert_eq!(lines.len(), 1 + 2 + 3);
    assert!(lines[1].starts_with("montecarlo,ndc,H3,16,,sign-select,4,"));
    assert!(lines[3].starts_with("montecarlo,dco-osm,HPrac2,8,7,,120,"));
    let ber = lines[1].rsplit(',').next().unwrap();
    assert!(ber.contains('e'), "{ber}");

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a_dir.join("small.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["master_seed"], 11);
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);

    // A different seed changes the noise.
    let c_dir = dir.path().join("c");
    let c = ndcofdm(&["simulate", "--config", &cfg, "--seed", "12"], &c_dir);
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(
        std::fs::read(c_dir.join("small.csv")).unwrap(),
        std::fs::read(a_dir.join("small.csv")).unwrap()
    );
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[[simulate]]\nscheme = \"ndc\"\nchannel = \"H1\"\nM = 16\nebn0_db = []\n",
    );
    let o = ndcofdm(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ebn0_db must not be empty"), "{}", stderr(&o));
    assert!(!dir.path().join("bad.csv").exists());
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "typo.toml",
        "[[analyze]]\nchannel = \"H1\"\nebn0 = [1.0]\n",
    );
    let o = ndcofdm(&["analyze", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("ebn0"), "{err}");
}

#[test]
fn unknown_channel_id() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h9.toml",
        "[[simulate]]\nscheme = \"ndc\"\nchannel = \"H9\"\nM = 16\nebn0_db = [1.0]\n",
    );
    let o = ndcofdm(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown channel id `H9`"), "{}", stderr(&o));
}

#[test]
fn unknown_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let o = ndcofdm(&["run", "--recipe", "fig42"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn singular_channel_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sing.toml",
        "[[analyze]]\nchannel = [[1.0, 0.5], [2.0, 1.0]]\nebn0_db = [1.0]\n",
    );
    let o = ndcofdm(&["analyze", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn se_table_matches_golden_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = ndcofdm(&["se-table"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let got = std::fs::read_to_string(dir.path().join("se_table.csv")).unwrap();
    let want = include_str!("fixtures/se_table.csv");
    assert_eq!(got, want);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("131072"));

    let o = ndcofdm(&["run", "--recipe", "table1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let got = std::fs::read_to_string(dir.path().join("table1_se_table.csv")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn identity_channel_analytic_curve_is_monotone_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "id.toml",
        "[[analyze]]\nchannel = \"H1\"\nebn0_db = { start = 0.0, stop = 20.0, step = 2.0 }\n",
    );
    let o = ndcofdm(&["analyze", "--config", &cfg, "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("id.json")).unwrap()).unwrap();
    let curve = &v["curves"][0];
    assert_eq!(curve["source"], "analytic");
    assert_eq!(curve["M"], 16);
    assert_eq!(curve["model"], "paper");
    let bers: Vec<f64> = curve["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["ber"].as_f64().unwrap())
        .collect();
    assert_eq!(bers.len(), 11);
    assert!(bers.windows(2).all(|w| w[1] < w[0]), "{bers:?}");
}

#[test]
fn frame_cap_gives_exit_code_four_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cap.toml",
        "[[simulate]]\nscheme = \"ndc\"\nchannel = \"H1\"\nM = 4\nn = 64\nebn0_db = [30.0]\nmin_bits = 1000\nmax_frames = 5\n",
    );
    let o = ndcofdm(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let csv = std::fs::read_to_string(dir.path().join("cap.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",0,0.000000e0"), "{csv}");
}

const GEOMETRY: &str = r#"
[defaults]
semiangle = 60.0
detector_area = 1e-4
fov = 70.0
"#;

#[test]
fn channel_gain_single_link() {
    let dir = tempfile::tempdir().unwrap();
    let geo = write(
        dir.path(),
        "one.toml",
        &format!("{GEOMETRY}\n[[link]]\ntx = 1\nrx = 1\ndistance = 2.0\nradiant_angle = 0.0\nincident_angle = 0.0\n"),
    );
    let o = ndcofdm(&["channel-gain", "--config", &geo], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("one.txt")).unwrap();
    let h: f64 = text.trim().parse().unwrap();
    assert!((h - 7.96e-6).abs() < 1e-8, "{h}");
}

#[test]
fn channel_gain_symmetric_geometry_and_out_of_view() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = GEOMETRY.to_string();
    for (tx, rx, d, a) in [(1, 1, 2.0, 10.0), (2, 2, 2.0, 10.0), (1, 2, 2.3, 30.0), (2, 1, 2.3, 30.0)] {
        text.push_str(&format!(
            "\n[[link]]\ntx = {tx}\nrx = {rx}\ndistance = {d}\nradiant_angle = {a}\nincident_angle = {a}\n"
        ));
    }
    let geo = write(dir.path(), "sym.toml", &text);
    let o = ndcofdm(&["channel-gain", "--config", &geo], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let h = ndc_ofdm::channel::ChannelMatrix::parse(
        &std::fs::read_to_string(dir.path().join("sym.txt")).unwrap(),
    )
    .unwrap();
    let g = h.gains();
    assert_eq!(g[(0, 1)], g[(1, 0)]);
    assert_eq!(g[(0, 0)], g[(1, 1)]);
    assert!(g[(0, 0)] > g[(0, 1)] && g[(0, 1)] > 0.0);

    let far = write(
        dir.path(),
        "far.toml",
        &format!("{GEOMETRY}\n[[link]]\ntx = 1\nrx = 1\ndistance = 2.0\nradiant_angle = 0.0\nincident_angle = 80.0\n"),
    );
    let o = ndcofdm(&["channel-gain", "--config", &far], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("far.txt")).unwrap();
    assert_eq!(text.trim().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn fig3_recipe_runs_and_pairs_curves() {
    // Trimmed copy of the bundled recipe so the test stays quick.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "mini3.toml",
        "[[analyze]]\nchannel = [\"H1\", \"H2\"]\nM = 16\nsigma_n = 0.1\nebn0_db = [4.0, 6.0]\nwith_simulation = true\nn = 256\nmin_bits = 20000\n",
    );
    let o = ndcofdm(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("mini3.csv")).unwrap();
    let sources: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        sources,
        ["analytic", "analytic", "montecarlo", "montecarlo", "analytic", "analytic", "montecarlo", "montecarlo"]
    );
    for l in csv.lines().skip(1).filter(|l| l.starts_with("analytic")) {
        assert!(l.contains(",,"), "analytic rows leave bits/errors empty: {l}");
    }
}
