use std::fs;
use std::path::Path;
use std::process::Command;

use grabill::config::{Analysis, ExperimentConfig};
use grabill::manifest::{Manifest, MANIFEST_FILE};
use grabill::pipeline::{self, RunOptions};

fn config(out: &Path, target: usize, analyses: &str, windows: &str) -> ExperimentConfig {
    let text = format!(
        r#"
        analyses = {analyses}
        windows = {windows}
        output_dir = "{}"
        l_max = 10

        [seeds]
        realizations = 20

        [sector]
        n = 6
        target_size = {target}
        orientation = "zigzag"
        "#,
        out.display()
    );
    ExperimentConfig::parse(&text).unwrap()
}

fn read_manifest(dir: &Path) -> Manifest {
    serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

/// Every file on disk except the manifest and cache is listed, and every
/// listed file exists with the recorded checksum.
fn assert_manifest_complete(dir: &Path, cache: &Path) {
    let m = read_manifest(dir);
    assert!(m.verify(dir).is_empty(), "{:?}", m.verify(dir));
    let mut on_disk = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.starts_with(cache) {
                continue;
            }
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != MANIFEST_FILE {
                on_disk.push(p.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    on_disk.sort();
    let mut listed: Vec<String> = m.files.iter().map(|f| f.path.clone()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
}

#[test]
fn second_run_is_served_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cache = dir.path().join("cache");
    // large enough for the windowed solver
    let c = config(&out, 4000, r#"["nnsd", "delta3"]"#, "[[0.3, 1.2], [1.5, 2.5]]");
    let opts = RunOptions { cache_dir: Some(cache.clone()), svg: true };
    let first = pipeline::run(&c, &opts).unwrap();
    assert_eq!((first.computed, first.cache_hits), (2, 0));
    assert_manifest_complete(&out, &cache);
    assert!(out.join("w0/nnsd.svg").exists());
    let second = pipeline::run(&c, &opts).unwrap();
    assert_eq!((second.computed, second.cache_hits), (0, 2));
    assert_eq!(first.windows[1].levels, second.windows[1].levels);
    assert_eq!(first.manifest, second.manifest);
}

#[test]
fn corrupt_cache_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cache = dir.path().join("cache");
    let c = config(&out, 600, r#"["nnsd"]"#, "[[0.1, 2.9]]");
    let opts = RunOptions { cache_dir: Some(cache.clone()), svg: false };
    let first = pipeline::run(&c, &opts).unwrap();
    for e in fs::read_dir(&cache).unwrap() {
        let p = e.unwrap().path();
        let mut bytes = fs::read(&p).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        fs::write(&p, bytes).unwrap();
    }
    let second = pipeline::run(&c, &opts).unwrap();
    assert_eq!(second.computed, 1);
    assert_eq!(first.windows[0].levels, second.windows[0].levels);
}

#[test]
fn dense_and_windowed_paths_agree() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&dir.path().join("o"), 2000, r#"["nnsd"]"#, "[[0.2, 0.9]]");
    let exp = pipeline::Experiment::prepare(&c, &RunOptions { cache_dir: Some(dir.path().join("c")), svg: false }).unwrap();
    let dense = exp.window_spectrum(0.2, 0.9, false).unwrap();
    let windowed = grabill_core::spectra::eig_window(&exp.hamiltonian, 0.2, 0.9, false).unwrap();
    assert_eq!(dense.len(), windowed.len());
    for (a, b) in dense.eigenvalues.iter().zip(&windowed.eigenvalues) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn build_writes_lattice_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let c = config(&out, 800, r#"["nnsd"]"#, "[[0.1, 1.0]]");
    let m = pipeline::build(&c, &RunOptions::default()).unwrap();
    let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    for f in ["sites.csv", "bonds.csv", "hamiltonian.mtx", "config.json", "lattice.json"] {
        assert!(names.contains(&f), "{f}");
    }
    let mtx = fs::read_to_string(out.join("hamiltonian.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
}

#[test]
fn parity_and_lengths_analyses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut c = config(&out, 2400, r#"["parity", "lengths"]"#, "[[0.02, 0.9]]");
    c.sector.n = 3;
    c.sector.orientation = grabill::config::OrientationName::Armchair;
    let s = pipeline::run(&c, &RunOptions { cache_dir: Some(dir.path().join("c")), svg: true }).unwrap();
    let w = &s.windows[0];
    let (even, odd) = w.parity.as_ref().unwrap();
    assert_eq!(even.n_levels + odd.n_levels, w.levels.len());
    assert!(out.join("w0/parity_even/ks.json").exists());
    let (spec, _) = w.lengths.as_ref().unwrap();
    assert!(spec.l.len() > 10);
    assert!(out.join("w0/orbits.csv").exists() && out.join("w0/length.svg").exists());
    assert!(c.wants(Analysis::Parity));
}

#[test]
fn band_edge_window_matches_billiard() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let c = config(&out, 2400, r#"["qb_match"]"#, "[[2.95, 3.0]]");
    let s = pipeline::run(&c, &RunOptions { cache_dir: Some(dir.path().join("c")), svg: false }).unwrap();
    let m = s.windows[0].edge_matching.as_ref().unwrap();
    assert_eq!(m.pairs.len(), s.windows[0].levels.len());
    let csv = fs::read_to_string(out.join("w0/qb_match.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "energy,m,n,k,ratio");
}

#[test]
fn cli_rejects_empty_analyses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        "analyses = []\nwindows = [[0.02, 0.2]]\noutput_dir = \"o\"\n[sector]\nn = 12\ntarget_size = 1000\norientation = \"zigzag\"\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_grabill")).args(["run", "--config"]).arg(&path).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("analyses"), "{err}");

    fs::write(&path, "analyses = [\"nnsd\"]\nwindows = [[0.02, 0.2]]\nbogus = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_grabill")).args(["run", "--config"]).arg(&path).output().unwrap();
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(!o.status.success() && err.contains("line 3"), "{err}");
}

#[test]
fn cli_compare_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let c = config(&out, 1500, r#"["nnsd"]"#, "[[0.1, 2.9]]");
    pipeline::run(&c, &RunOptions { cache_dir: Some(dir.path().join("c")), svg: false }).unwrap();
    let ks = out.join("w0/ks.json");
    let o = Command::new(env!("CARGO_BIN_EXE_grabill")).arg("compare").arg(&ks).arg(&ks).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().filter(|l| l.contains("+0.0000")).count() >= 3, "{text}");
}
