use isoops::grid::{Boundary, GridField};
use isoops::io::{read_pgm, write_obj, write_pgm};
use isoops::mesh::icosphere;
use std::path::Path;
use std::process::{Command, Output};

fn isoops(args: &[&str]) -> Output {
    isoops_env(args, &[])
}

fn isoops_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_isoops"));
    cmd.args(args).env_remove("ISOOPS_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn bump_pgm(dir: &Path, name: &str) -> String {
    let n = 40;
    let f = GridField::from_fn(n, n, 1.0, (0.0, 0.0), Boundary::MirrorNeumann, |x, y| {
        let (dx, dy) = (x - 19.5, y - 17.0);
        (-(dx * dx + dy * dy) / 60.0).exp() + if x > 25.0 { 0.2 } else { 0.0 }
    })
    .unwrap();
    let path = dir.join(name);
    std::fs::write(&path, write_pgm(&f.with_values(f.values.iter().map(|v| v.min(1.0)).collect()), 255, true)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn weights_from_angles() {
    let o = isoops(&["weights", "--angles", "0,45,90,135"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!((r[2].parse::<f64>().unwrap() - 0.25).abs() < 1e-15);
    }
    assert!(stdout(&o).contains("# angles_deg=0,45,90,135"));
}

#[test]
fn weights_usage_and_numerical_errors() {
    let o = isoops(&["weights", "--angles", "0,4x5,90"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed"));
    assert_eq!(isoops(&["weights"]).status.code(), Some(2));
    assert_eq!(isoops(&["weights", "--angles", "0,10,20"]).status.code(), Some(1));
}

#[test]
fn weights_from_points_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("oct.csv");
    std::fs::write(&p, "# octahedron\n1,0,0\n-1,0,0\n0,1,0\n0,-1,0\n0,0,1\n0,0,-1\n").unwrap();
    let ps = p.to_str().unwrap();
    let o = isoops(&["weights", "--points", ps, "--dim", "2", "--degree", "2", "--kind", "full"]);
    assert_eq!(o.status.code(), Some(0));
    for r in data_rows(&stdout(&o)) {
        assert!((r[3].parse::<f64>().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }
    let o = isoops(&["weights", "--points", ps, "--dim", "2", "--degree", "2", "--kind", "harmonic"]);
    assert_eq!(o.status.code(), Some(0));
    let few = dir.path().join("few.csv");
    std::fs::write(&few, "1,0,0\n0.6,0.8,0\n0,0,1\n").unwrap();
    let o = isoops(&["weights", "--points", few.to_str().unwrap(), "--dim", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = isoops(&["weights", "--points", ps, "--dim", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let missing = dir.path().join("nope.csv");
    assert_eq!(isoops(&["weights", "--points", missing.to_str().unwrap(), "--dim", "2"]).status.code(), Some(3));
}

#[test]
fn basis_dump() {
    let o = isoops(&["basis", "--dim", "2", "--degree", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    let elements: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(elements.len(), 5);
}

#[test]
fn stencil_dump() {
    let o = isoops(&["stencil", "--op", "lap", "--w", "4", "--h", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!((rows[1][1] + 20.0 / 6.0).abs() < 1e-15);
    assert!((rows[0][1] - 4.0 / 6.0).abs() < 1e-15);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dy.csv");
    let o = isoops(&["stencil", "--op", "dy", "--w", "inf", "--h", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# op=dy"));
    assert_eq!(isoops(&["stencil", "--op", "lap", "--w", "-2"]).status.code(), Some(1));
    assert_eq!(isoops(&["stencil", "--op", "lap", "--w", "4", "--bogus"]).status.code(), Some(2));
    assert_eq!(isoops(&["stencil", "--op", "curl", "--w", "4"]).status.code(), Some(2));
}

#[test]
fn diffuse_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let input = bump_pgm(dir.path(), "in.pgm");
    let out = dir.path().join("out.pgm");
    let log = dir.path().join("mass.csv");
    let o = isoops(&[
        "diffuse", "--in", &input, "--out", out.to_str().unwrap(), "--lambda", "0.05", "--steps", "30",
        "--mass-log", log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let img = read_pgm(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!((img.field.width, img.field.height, img.maxval), (40, 40, 255));
    let text = std::fs::read_to_string(&log).unwrap();
    assert!(text.contains("# lambda=0.05"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 31);
    let m0: f64 = rows[0][1].parse().unwrap();
    for r in &rows {
        let m: f64 = r[1].parse().unwrap();
        assert!(((m - m0) / m0).abs() < 1e-12);
    }

    let zero = dir.path().join("zero.pgm");
    let o = isoops(&["diffuse", "--in", &input, "--out", zero.to_str().unwrap(), "--steps", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&zero).unwrap(), std::fs::read(&input).unwrap());
}

#[test]
fn diffuse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = bump_pgm(dir.path(), "in.pgm");
    let out = dir.path().join("out.pgm");
    let o = out.to_str().unwrap();
    assert_eq!(isoops(&["diffuse", "--in", &input, "--out", o, "--dt", "5"]).status.code(), Some(1));
    assert_eq!(isoops(&["diffuse", "--in", &input, "--out", o, "--alpha", "0.5"]).status.code(), Some(1));
    assert_eq!(isoops(&["diffuse", "--in", &input, "--out", o, "--lambda", "soft"]).status.code(), Some(2));
    let missing = dir.path().join("missing.pgm");
    assert_eq!(isoops(&["diffuse", "--in", missing.to_str().unwrap(), "--out", o]).status.code(), Some(3));
    let bad = dir.path().join("bad.pgm");
    std::fs::write(&bad, "P6\n1 1\n255\n\0\0\0").unwrap();
    assert_eq!(isoops(&["diffuse", "--in", bad.to_str().unwrap(), "--out", o]).status.code(), Some(3));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = bump_pgm(dir.path(), "in.pgm");
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}.pgm"));
        let log = dir.path().join(format!("log{threads}.csv"));
        let o = isoops_env(
            &[
                "diffuse", "--in", &input, "--out", out.to_str().unwrap(), "--steps", "10",
                "--mass-log", log.to_str().unwrap(),
            ],
            &[("ISOOPS_THREADS", threads)],
        );
        assert_eq!(o.status.code(), Some(0));
        let log: String = std::fs::read_to_string(&log)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# out="))
            .map(|l| format!("{l}\n"))
            .collect();
        outputs.push((std::fs::read(&out).unwrap(), log));
    }
    assert!(outputs[0] == outputs[1]);
    let o = isoops_env(&["stencil", "--op", "dx", "--w", "4"], &[("ISOOPS_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curvature_of_sphere_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("sphere.obj");
    std::fs::write(&mesh, write_obj(&icosphere(3))).unwrap();
    let csv = dir.path().join("curv.csv");
    let (hp, rp) = (dir.path().join("h.ppm"), dir.path().join("r.ppm"));
    let o = isoops(&[
        "curvature", "--in", mesh.to_str().unwrap(), "--out", csv.to_str().unwrap(),
        "--render-h", hp.to_str().unwrap(), "--render-r", rp.to_str().unwrap(), "--render-size", "64",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), icosphere(3).vertex_count());
    for r in &rows {
        assert_eq!(r[3], "1");
        assert!((r[1].parse::<f64>().unwrap() + 1.0).abs() < 0.05);
    }
    for p in [&hp, &rp] {
        let img = std::fs::read(p).unwrap();
        assert!(img.starts_with(b"P6\n64 64\n255\n"));
    }
    let o = isoops_env(
        &["curvature", "--in", mesh.to_str().unwrap(), "--out", csv.to_str().unwrap()],
        &[("ISOOPS_THREADS", "2")],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(data_rows(&std::fs::read_to_string(&csv).unwrap()) == rows);
}

#[test]
fn curvature_rejects_unsupported_obj() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("bad.obj");
    std::fs::write(&mesh, "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1 2 3\n").unwrap();
    let csv = dir.path().join("c.csv");
    let o = isoops(&["curvature", "--in", mesh.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn frequency_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("resp.csv");
    let o = isoops(&["freq", "--w", "4,10/3,2", "--omega-max", "2", "--samples", "201", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 3 * 201);
    let max_err = |w: &str| -> f64 {
        rows.iter().filter(|r| r[0] == w).map(|r| r[4].parse::<f64>().unwrap()).fold(0.0, f64::max)
    };
    assert!(max_err("3.3333333333333335") < max_err("4"));
    assert!(max_err("4") < max_err("2"));
    assert_eq!(isoops(&["freq", "--w", "4", "--samples", "1", "--out", out.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(isoops(&["freq", "--w", "four", "--out", out.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn laptest_reports_ordering_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aniso.csv");
    let o = isoops(&["laptest", "--w", "4,2,0,inf", "--h", "0.1,0.05", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&std::fs::read_to_string(&out).unwrap());
    let get = |q: &str, w: &str, h: &str| -> f64 {
        rows.iter()
            .find(|r| r[0] == q && r[1] == w && r[2] == h)
            .map(|r| r[3].parse().unwrap())
            .unwrap_or_else(|| panic!("missing {q} {w} {h}"))
    };
    let a = |w| get("anisotropy", w, "0.05");
    assert!(a("4") < a("2") && a("2") < a("0").min(a("inf")));
    assert!(get("lap4_minus_h2_over_12_slope", "4", "0.05") > 3.9);
    assert!(get("grad4_minus_h2_over_6_slope", "4", "0.05") > 3.9);
    assert_eq!(isoops(&["laptest", "--h", "0", "--out", out.to_str().unwrap()]).status.code(), Some(2));
}
