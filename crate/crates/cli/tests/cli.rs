use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clusterflip::oracle::exact_sw_kernel;
use clusterflip::{build_square_lattice, BoundarySpec, InverseTemperature};
use serde_json::Value;
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn clusterflip(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_clusterflip"));
    cmd.args(args).env_remove("CLUSTERFLIP_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn with_config(sub: &str, config: &Path) -> Output {
    clusterflip(&[sub, "--config", config.to_str().unwrap()], &[])
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SQUARE_SIDES: &str = "[lattice]\ntype = square\nn1 = 100\nn2 = 100\nbc = sides-pm\n";

fn run_config(lattice: &str, chain: &str, extra: &str) -> String {
    format!(
        "{lattice}\n[chain]\nbeta = 0.5\nseed = 1\n{chain}\n{extra}\n\
         [output]\ntrace_path = trace.csv\nsummary_path = summary.json\nsvg_path = avg.svg\n"
    )
}

#[test]
fn build_lattice_writes_graph_and_svg() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "lattice.conf",
        "[lattice]\ntype = square\nn1 = 20\nn2 = 20\nbc = sides-pm\n[output]\ngraph_path = g.txt\nsvg_path = g.svg\n",
    );
    let out = with_config("build-lattice", &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let graph = ws.read("g.txt");
    assert!(graph.starts_with("ising-graph v1 400 80\n"));
    assert_eq!(graph.lines().filter(|l| l.starts_with("i ")).count(), 400);
    let first = graph.clone();
    assert!(with_config("build-lattice", &cfg).status.success());
    assert_eq!(ws.read("g.txt"), first);
    assert!(ws.read("g.svg").contains("<circle"));
}

#[test]
fn build_lattice_rejects_bad_combination() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "bad.conf",
        "[lattice]\ntype = disk\nh = 0.1\nbc = sides-pm\n[output]\ngraph_path = g.txt\n",
    );
    let out = with_config("build-lattice", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("quadrant or arc"), "{}", stderr(&out));
    assert!(!ws.path("g.txt").exists());
}

#[test]
fn exact_flip_run_crosses_between_profiles() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "run.conf",
        &run_config(
            SQUARE_SIDES,
            "eta = 0.01\niterations = 10000\nflip_kind = exact",
            "[matching]\ninvolution = diagonal",
        ),
    );
    let out = with_config("run", &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = ws.json("summary.json");
    let transitions = summary["transitions"].as_u64().unwrap();
    assert!((60..=140).contains(&transitions), "{transitions}");
    assert_eq!(summary["flip_attempts"], summary["flip_accepts"]);
    for key in ["final_avg_spin", "seed", "wall_time_ms"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    let trace = ws.read("trace.csv");
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,avg_spin,move,accepted"));
    assert_eq!(lines.clone().count(), 10_000);
    assert!(lines.clone().any(|l| l.ends_with(",flip,true")));
    assert!(lines.all(|l| !l.ends_with(",false")));
    assert!(ws.read("avg.svg").contains("<polyline"));
}

#[test]
fn plain_sw_run_stays_in_one_profile() {
    let ws = Workspace::new();
    let cfg = ws.config("run.conf", &run_config(SQUARE_SIDES, "eta = 0\niterations = 10000", ""));
    let out = with_config("run", &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(ws.json("summary.json")["transitions"], 0);
    let trace = ws.read("trace.csv");
    for line in trace.lines().skip(1) {
        let avg: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(avg < 0.0, "{line}");
    }
}

#[test]
fn exact_flip_without_involution_is_a_config_error() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "run.conf",
        &run_config(SQUARE_SIDES, "eta = 0.01\niterations = 10000\nflip_kind = exact", ""),
    );
    let out = with_config("run", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("needs matching.involution"));
    assert!(!ws.path("summary.json").exists());
    assert!(!ws.path("trace.csv").exists());
}

#[test]
fn non_symmetric_exact_flip_is_refused() {
    let ws = Workspace::new();
    let lattice = "[lattice]\ntype = square\nn1 = 6\nn2 = 5\nbc = sides-pm\n";
    let cfg = ws.config(
        "run.conf",
        &run_config(lattice, "eta = 0.5\niterations = 10\nflip_kind = exact", "[matching]\ninvolution = diagonal"),
    );
    let out = with_config("run", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not an exact symmetry"), "{}", stderr(&out));
}

#[test]
fn replicas_write_one_trace_each_and_merge_summaries() {
    let ws = Workspace::new();
    let lattice = "[lattice]\ntype = square\nn1 = 12\nn2 = 11\nbc = sides-pm\n";
    let cfg = ws.config(
        "run.conf",
        &run_config(
            lattice,
            "eta = 0.3333\niterations = 500\nflip_kind = metropolized\ninitial = random",
            "[matching]\nnorm = l2\ninvolution = diagonal",
        ),
    );
    let args = ["run", "--config", cfg.to_str().unwrap(), "--replicas", "3"];
    let out = clusterflip(&args, &[("CLUSTERFLIP_THREADS", "2")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = ws.json("summary.json");
    let replicas = summary["replicas"].as_array().unwrap();
    assert_eq!(replicas.len(), 3);
    let total: u64 = replicas.iter().map(|r| r["flip_attempts"].as_u64().unwrap()).sum();
    assert_eq!(summary["flip_attempts"].as_u64().unwrap(), total);
    let traces: Vec<String> = (0..3).map(|k| ws.read(&format!("trace.r{k}.csv"))).collect();
    assert_ne!(traces[0], traces[1]);
    assert!(!ws.path("trace.csv").exists());

    let again = clusterflip(&args, &[("CLUSTERFLIP_THREADS", "1")]);
    assert!(again.status.success());
    for (k, trace) in traces.iter().enumerate() {
        assert_eq!(&ws.read(&format!("trace.r{k}.csv")), trace);
    }
}

#[test]
fn snapshots_are_written_on_request() {
    let ws = Workspace::new();
    let lattice = "[lattice]\ntype = square\nn1 = 3\nn2 = 3\nbc = sides-pm\n";
    let cfg = ws.config(
        "run.conf",
        &format!(
            "{}snapshot_interval = 4\nsnapshot_path = snaps.csv\n",
            run_config(lattice, "iterations = 10", "")
        ),
    );
    let out = with_config("run", &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let snaps = ws.read("snaps.csv");
    let rows: Vec<_> = snaps.lines().collect();
    assert_eq!(rows[0], "iter,spins");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("4,") && rows[2].starts_with("8,"));
    assert_eq!(rows[1].len(), "4,".len() + 9);
}

#[test]
fn bundled_oracle_suite_passes() {
    let out = clusterflip(&["oracle-check"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("P_SW detailed balance"));
    assert!(text.contains("all 57 checks passed"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn tampered_kernel_fails_with_witness() {
    let ws = Workspace::new();
    let g = build_square_lattice(1, 2, &BoundarySpec::SidesPm).unwrap();
    let k = exact_sw_kernel(&g, InverseTemperature::new(0.5).unwrap()).unwrap();
    let mut rows: Vec<Vec<f64>> = (0..4).map(|s| k.row(s).to_vec()).collect();
    let write = |rows: &[Vec<f64>], name: &str| {
        let text: String = rows
            .iter()
            .map(|r| r.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",") + "\n")
            .collect();
        fs::write(ws.path(name), text).unwrap();
    };
    write(&rows, "kernel.csv");
    let base = "[lattice]\ntype = square\nn1 = 1\nn2 = 2\nbc = sides-pm\n[chain]\nbeta = 0.5\niterations = 1\n";
    let cfg = ws.config("ok.conf", &format!("{base}[oracle]\nkernel_path = kernel.csv\n"));
    let out = with_config("oracle-check", &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // Move mass within row 0 so it stays stochastic but loses reversibility.
    let (big, &top) = rows[0].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let other = (big + 1) % 4;
    rows[0][big] -= 0.5 * top;
    rows[0][other] += 0.5 * top;
    write(&rows, "tampered.csv");
    let cfg = ws.config("bad.conf", &format!("{base}[oracle]\nkernel_path = tampered.csv\n"));
    let out = with_config("oracle-check", &cfg);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("detailed balance fails at s=0b"), "{err}");
}

#[test]
fn oracle_refuses_large_lattices() {
    let ws = Workspace::new();
    let cfg = ws.config("big.conf", "[lattice]\ntype = square\nn1 = 5\nn2 = 5\nbc = sides-pm\n");
    let out = with_config("oracle-check", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("refusing exact enumeration"));
}

fn displacements(csv: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("i,j,xi,yi,x_mu_i,y_mu_i,xj,yj,displacement"));
    lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn matching_reports() {
    let ws = Workspace::new();
    let cases = [
        ("[lattice]\ntype = square\nn1 = 10\nn2 = 10\nbc = sides-pm\n", "diagonal", 100, 0.0),
        ("[lattice]\ntype = square\nn1 = 100\nn2 = 99\nbc = sides-pm\n", "diagonal", 9900, 2.0),
        ("[lattice]\ntype = disk\nh = 0.1\nseed = 1\nbc = quadrant-pm\n", "x-axis", 0, 0.2),
    ];
    for (lattice, mu, count, bound) in cases {
        let cfg = ws.config(
            "m.conf",
            &format!("{lattice}[matching]\ninvolution = {mu}\n[output]\nmatching_path = m.csv\nsvg_path = m.svg\n"),
        );
        let out = with_config("matching-report", &cfg);
        assert!(out.status.success(), "{}", stderr(&out));
        let d = displacements(&ws.read("m.csv"));
        if count > 0 {
            assert_eq!(d.len(), count);
        }
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        assert!(mean <= bound, "{lattice}: mean {mean}");
        if bound == 0.0 {
            assert!(d.iter().all(|&x| x == 0.0));
        }
        assert!(ws.read("m.svg").contains("<path"));
    }
}

#[test]
fn quiet_and_environment_handling() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "l.conf",
        "[lattice]\ntype = square\nn1 = 3\nn2 = 3\nbc = sides-pm\n[output]\ngraph_path = g.txt\n",
    );
    let path = cfg.to_str().unwrap();
    let out = clusterflip(&["--quiet", "build-lattice", "--config", path], &[]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let out = clusterflip(&["build-lattice", "--config", path], &[("CLUSTERFLIP_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("CLUSTERFLIP_THREADS"));
}

#[test]
fn config_errors_exit_with_two() {
    let ws = Workspace::new();
    let cfg = ws.config("x.conf", "[lattice]\ntype = square\ncolour = blue\n");
    let out = with_config("build-lattice", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3: unknown key `colour`"));
    let out = clusterflip(&["run", "--config", ws.path("missing.conf").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = clusterflip(&["run", "--config", cfg.to_str().unwrap(), "--replicas", "0"], &[]);
    assert_eq!(out.status.code(), Some(2));
}
