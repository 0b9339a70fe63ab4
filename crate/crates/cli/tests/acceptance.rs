//! Determinism acceptance check: every subcommand, rerun with identical
//! flags and seeds, must produce byte-identical CSV/JSON/FMAT payloads,
//! including under different thread counts. The manifest is excluded (it
//! records wall time).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use hullscope::ingest::save_fmat;

const BIN: &str = env!("CARGO_BIN_EXE_hullscope");

fn run(args: &[&str]) -> Vec<u8> {
    let out = Command::new(BIN)
        .args(args)
        .output()
        .expect("spawn hullscope");
    assert!(
        out.status.success(),
        "hullscope {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

/// All files under a directory, keyed by relative path, manifests excluded.
fn collect(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(cur) = stack.pop() {
        for entry in fs::read_dir(&cur).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "manifest.json" {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn assert_identical(a: &Path, b: &Path, what: &str) {
    let (fa, fb) = (collect(a), collect(b));
    assert_eq!(
        fa.keys().collect::<Vec<_>>(),
        fb.keys().collect::<Vec<_>>(),
        "{what}: file sets differ"
    );
    for (name, bytes) in &fa {
        assert_eq!(bytes, &fb[name], "{what}: {name} differs between reruns");
    }
}

#[test]
fn criterion_11_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let train = root.join("train.fmat");
    let query = root.join("query.fmat");
    save_fmat(
        &hullscope::ingest::gen_random_points(120, 64, 0.0, 255.0, 7).unwrap(),
        &train,
    )
    .unwrap();
    save_fmat(
        &hullscope::ingest::gen_random_points(25, 64, 0.0, 255.0, 8).unwrap(),
        &query,
    )
    .unwrap();
    let t = train.to_str().unwrap();
    let q = query.to_str().unwrap();
    let p = |name: &str| root.join(name).to_str().unwrap().to_string();

    // hull-distance, across reruns and thread counts
    for (out, threads) in [("hd_a", "1"), ("hd_b", "1"), ("hd_c", "3")] {
        run(&["hull-distance", "--train", t, "--query", q, "--threads", threads, "--out", &p(out)]);
    }
    assert_identical(&root.join("hd_a"), &root.join("hd_b"), "hull-distance rerun");
    assert_identical(&root.join("hd_a"), &root.join("hd_c"), "hull-distance threads");

    // diameter reports on stdout
    let d1 = run(&["diameter", "--train", t, "--exact", "--threads", "1"]);
    let d2 = run(&["diameter", "--train", t, "--exact", "--threads", "3"]);
    assert_eq!(d1, d2, "diameter stdout differs across thread counts");
    let h1 = run(&["diameter", "--train", t, "--sweeps", "8", "--seed", "5"]);
    let h2 = run(&["diameter", "--train", t, "--sweeps", "8", "--seed", "5"]);
    assert_eq!(h1, h2, "heuristic diameter stdout differs between reruns");

    // wavelet with a fitted mask
    for out in ["w1", "w2"] {
        run(&[
            "wavelet", "--input", t, "--shape", "8x8x1", "--family", "db4",
            "--levels", "2", "--keep-top", "16", "--out", &p(out),
        ]);
    }
    assert_eq!(fs::read(p("w1")).unwrap(), fs::read(p("w2")).unwrap(), "wavelet fmat differs");
    assert_eq!(
        fs::read(p("w1") + ".mask.json").unwrap(),
        fs::read(p("w2") + ".mask.json").unwrap(),
        "wavelet mask sidecar differs"
    );

    // random-baseline and direction
    for out in ["r1", "r2"] {
        run(&["random-baseline", "--like", t, "--n", "30", "--seed", "9", "--out", &p(out)]);
    }
    assert_eq!(fs::read(p("r1")).unwrap(), fs::read(p("r2")).unwrap(), "baseline fmat differs");
    for out in ["v1", "v2"] {
        run(&["direction", "--train", t, "--query", q, "--index", "3", "--out", &p(out)]);
    }
    assert_eq!(fs::read(p("v1")).unwrap(), fs::read(p("v2")).unwrap(), "direction fmat differs");

    // the two demos (reduced sizes; determinism does not depend on them)
    for out in ["ld_a", "ld_b"] {
        run(&["legendre-demo", "--degrees", "1,2,8", "--out", &p(out)]);
    }
    assert_identical(&root.join("ld_a"), &root.join("ld_b"), "legendre-demo rerun");
    for (out, threads) in [("md_a", "1"), ("md_b", "2")] {
        run(&[
            "mlp-demo", "--seeds", "0,1", "--arch", "2,16,1", "--steps", "500",
            "--lr", "0.1", "--resolution", "31", "--threads", threads, "--out", &p(out),
        ]);
    }
    assert_identical(&root.join("md_a"), &root.join("md_b"), "mlp-demo threads");

    println!("criterion 11 byte-identical reruns across all subcommands: pass");
}
