//! Byte-for-byte comparison of the reduced LI run's outputs against the files
//! in `tests/golden`. Set `PLASMODIUM_BLESS=1` to regenerate them.

use std::path::{Path, PathBuf};

use plasmodium::emit::write_bundle;
use plasmodium::experiment::{preset_li, run};

const FILES: [&str; 4] = ["density.csv", "spacetime.pgm", "summary.json", "config.txt"];

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn reduced_li_bundle_matches_goldens() {
    let record = run(&preset_li().reduced()).unwrap();
    let out = tempfile::tempdir().unwrap();
    write_bundle(&record, out.path()).unwrap();

    let bless = std::env::var_os("PLASMODIUM_BLESS").is_some();
    for name in FILES {
        let produced = std::fs::read(out.path().join(name)).unwrap();
        let golden = golden_dir().join(name);
        if bless {
            std::fs::write(&golden, &produced).unwrap();
            continue;
        }
        let expected = std::fs::read(&golden)
            .unwrap_or_else(|e| panic!("{}: {e}; run with PLASMODIUM_BLESS=1", golden.display()));
        assert!(produced == expected, "{name} differs from its golden file");
    }
}

#[test]
fn golden_csv_layout() {
    let csv = std::fs::read_to_string(golden_dir().join("density.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let expected: Vec<String> = std::iter::once("step".to_string())
        .chain((0..60).map(|c| format!("c{c}")))
        .collect();
    assert_eq!(header, expected.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2000 / 10 + 1);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<u64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 61);
        assert_eq!(fields[0], i as u64 * 10);
        assert_eq!(fields[1..].iter().sum::<u64>(), 400);
    }
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
}

#[test]
fn golden_pgm_header_matches_payload() {
    let pgm = std::fs::read(golden_dir().join("spacetime.pgm")).unwrap();
    let header = b"P5\n60 201\n255\n";
    assert!(pgm.starts_with(header));
    assert_eq!(pgm.len(), header.len() + 60 * 201);
}

#[test]
fn golden_summary_schema() {
    let text = std::fs::read_to_string(golden_dir().join("summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "baseline_cv",
            "config_hash",
            "contrast_peak",
            "contrast_peak_step",
            "onset_columns",
            "recovery_step"
        ]
    );
    assert!(obj["onset_columns"].is_array());
    assert!(obj["config_hash"].as_str().unwrap().len() == 64);
}
