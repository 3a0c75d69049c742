use std::fs;
use std::path::Path;

use opsforge::indexer::{emit_yaml, index, scan, ScanOptions};
use opsforge::registry::{emit_descriptors, parse_descriptors, IoRole};
use opsforge::OpKind;

const COPY_JAVA: &str = r#"package ops.copy;

public class Copiers {
    /**
     * Copies one byte array into another of the same length.
     *
     * @implNote op names='copy.array' priority='100.0'
     * @input input ByteArray the source array
     * @container output ByteArray the preallocated destination
     */
    public static void copyArray(byte[] input, byte[] output) {
        System.arraycopy(input, 0, output, 0, input.length);
    }

    /** Plain doc, not an op. */
    public static void helper() {}
}
"#;

const ADD_RS: &str = r#"
/// Adds two integers.
///
/// @implNote op names='demo.add,demo.plus'
/// @input a Integer first term
/// @input b Integer second term
/// @output Integer the sum
pub fn add(a: i64, b: i64) -> i64 {
    a + b
}

/// @implNote op names='demo.scale' kind='inplace:0'
/// @mutable data RealArray values to scale
/// @input factor? Real multiplier
pub fn scale(data: &mut [f64], factor: f64) {}
"#;

fn write(root: &Path, rel: &str, text: &str) {
    let p = root.join(rel);
    fs::create_dir_all(p.parent().unwrap()).unwrap();
    fs::write(p, text).unwrap();
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "java/ops/copy/Copiers.java", COPY_JAVA);
    write(dir.path(), "src/deep/nested/add.rs", ADD_RS);
    write(dir.path(), "README.txt", "/// @implNote op names='ignored.txt'\n");
    dir
}

#[test]
fn copy_array_block_becomes_a_computer() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "Copiers.java", COPY_JAVA);
    let report = index(dir.path(), &ScanOptions::default()).unwrap();
    assert!(report.diagnostics.is_empty(), "{:?}", report.diagnostics);
    let infos = parse_descriptors(&report.yaml).unwrap();
    assert_eq!(infos.len(), 1);
    let info = &infos[0];
    assert_eq!(info.name(), "copy.array");
    assert_eq!(info.kind, OpKind::Computer);
    assert_eq!(info.params.len(), 2);
    assert_eq!(info.params[1].io, IoRole::Container);
    assert_eq!(info.priority, 100.0);
    assert_eq!(
        info.description,
        "Copies one byte array into another of the same length."
    );
}

#[test]
fn nested_directories_yield_all_blocks() {
    let dir = fixture();
    let out = scan(dir.path(), &ScanOptions::default()).unwrap();
    assert_eq!(out.blocks.len(), 3);
    assert!(out.diagnostics.is_empty());
    let report = index(dir.path(), &ScanOptions::default()).unwrap();
    let names: Vec<&str> = report.ops.iter().map(|o| o.names[0].as_str()).collect();
    assert_eq!(names, vec!["copy.array", "demo.add", "demo.scale"]);
    let scale = &report.ops[2];
    assert_eq!(scale.kind, Some(OpKind::Inplace(0)));
    assert!(scale.params[1].optional);
}

#[test]
fn empty_directory_yields_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let report = index(dir.path(), &ScanOptions::default()).unwrap();
    assert!(report.ops.is_empty());
    assert!(report.diagnostics.is_empty());
    assert_eq!(report.yaml, "ops: []\n");
}

#[test]
fn missing_root_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(index(&dir.path().join("absent"), &ScanOptions::default()).is_err());
}

#[test]
fn emitted_yaml_is_a_fixed_point() {
    let dir = fixture();
    let report = index(dir.path(), &ScanOptions::default()).unwrap();
    let reparsed = parse_descriptors(&report.yaml).unwrap();
    assert_eq!(emit_descriptors(&reparsed), report.yaml);
    let again = index(dir.path(), &ScanOptions::default()).unwrap();
    assert_eq!(again.yaml, report.yaml);
    assert_eq!(emit_yaml(&again.ops), report.yaml);
}

#[test]
fn include_globs_select_files() {
    let dir = fixture();
    let only_rs = ScanOptions::with_include(vec!["**/*.rs".into()]);
    assert_eq!(index(dir.path(), &only_rs).unwrap().ops.len(), 2);
    let txt = ScanOptions::with_include(vec!["*.txt".into()]);
    let report = index(dir.path(), &txt).unwrap();
    assert_eq!(report.ops.len(), 0);
    assert_eq!(report.diagnostics.len(), 1);
}

#[test]
fn malformed_blocks_are_diagnosed_and_skipped() {
    let dir = fixture();
    write(
        dir.path(),
        "bad.rs",
        "/// @implNote op names='bad.one' priority='high'\n/// @input a Integer x\n/// @output Integer y\nfn f() {}\n",
    );
    let report = index(dir.path(), &ScanOptions::default()).unwrap();
    assert_eq!(report.ops.len(), 3);
    assert_eq!(report.diagnostics.len(), 1);
    let d = report.diagnostics[0].to_string();
    assert!(d.starts_with("bad.rs:1:"), "{d}");
    assert!(d.contains("priority must be numeric"), "{d}");
}

#[test]
fn indexed_ops_load_into_an_environment() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    write(&src, "Copiers.java", COPY_JAVA);
    let report = index(&src, &ScanOptions::default()).unwrap();
    let yaml = dir.path().join("indexed.yaml");
    fs::write(&yaml, &report.yaml).unwrap();
    let env = opsforge::build_environment(
        &[yaml],
        opsforge::stdlib::bindings(),
        opsforge::EnvOptions {
            allow_unbound: true,
            ..Default::default()
        },
    )
    .unwrap();
    let help = env.help("copy.array");
    assert_eq!(help.lines().count(), 3, "{help}");
}
