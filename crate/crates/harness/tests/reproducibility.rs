//! Re-running an experiment with the same config must be bit-reproducible:
//! per-lane parallel writes are disjoint and every reduction is a fixed
//! pairwise tree, so the schedule cannot leak into the output bytes.

use longwave_harness::{experiments, Config};
use std::path::Path;

const TINY_SWEEP: &str = "\
[experiment]
kind = kdv_sweep

[grid]
nx = 32
nv = 48

[profile]
family = cosine
amplitude = 0.1
wavenumber = 1

[sweep]
eps_list = 0.2, 0.1
theta0 = 1.0
t_end = 0.05
c_cfl = 0.05
law = linearized
stride = 2
dt_robustness = false
";

fn artifact_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let name = e.file_name().into_string().unwrap();
            (name, std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn identical_config_identical_bytes() {
    let cfg = Config::parse(TINY_SWEEP).unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let r1 = experiments::run(&cfg, d1.path()).unwrap();
    let r2 = experiments::run(&cfg, d2.path()).unwrap();
    assert_eq!(r1.render(), r2.render());

    let f1 = artifact_bytes(d1.path());
    let f2 = artifact_bytes(d2.path());
    assert_eq!(
        f1.iter().map(|f| &f.0).collect::<Vec<_>>(),
        f2.iter().map(|f| &f.0).collect::<Vec<_>>(),
        "same artifact set"
    );
    for ((name, b1), (_, b2)) in f1.iter().zip(&f2) {
        assert_eq!(b1, b2, "artifact {name} differs between identical runs");
    }
    assert!(
        f1.iter().any(|f| f.0 == "summary.csv"),
        "sweep emits summary.csv"
    );
}
