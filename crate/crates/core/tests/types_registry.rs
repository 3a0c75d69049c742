use std::path::PathBuf;

use opsforge::registry::{emit_descriptors, parse_descriptors, reduce_optional, RegistryError};
use opsforge::stdlib::{self, BUILTIN_OPS_YAML, LEGACY_OPS_YAML};
use opsforge::types::{DescriptorTable, TypeHierarchy};
use opsforge::{build_environment, EnvOptions, OpKind, SemanticType};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn t(s: &str) -> SemanticType {
    SemanticType::parse(s).unwrap()
}

#[test]
fn parse_atomic_and_parameterized() {
    assert_eq!(t("Integer"), SemanticType::named("Integer"));
    assert_eq!(
        t("List<Integer>"),
        SemanticType::with_params("List", vec![SemanticType::named("Integer")])
    );
}

#[test]
fn parse_unclosed_reports_offset() {
    let err = SemanticType::parse("List<Integer").unwrap_err();
    assert_eq!(err.offset, 12);
}

#[test]
fn assignability_follows_declared_edges() {
    let h = stdlib::standard_hierarchy();
    assert!(h.is_assignable(&t("ImageU8"), &t("ImageU8")));
    assert!(h.is_assignable(&t("ImageU8"), &t("Image")));
    assert!(!h.is_assignable(&t("ImageU8"), &t("ImageF64")));
    assert!(!TypeHierarchy::new().is_assignable(&t("ImageU8"), &t("Image")));
}

#[test]
fn descriptions_collapse_image_types() {
    let d = stdlib::standard_descriptions();
    assert_eq!(d.describe(&t("ImageU8")), "image");
    assert_eq!(d.describe(&t("ImageF64")), "image");
    assert_eq!(d.describe(&t("UnmappedThing")), "UnmappedThing");
    assert_eq!(DescriptorTable::new().describe(&t("Integer")), "Integer");
}

#[test]
fn computer_entry_from_yaml() {
    let yaml = r#"
ops:
  - name: copy.array
    source: "builtin:copy/bytes"
    parameters:
      - { name: input, type: ByteArray, io: input }
      - { name: output, type: ByteArray, io: container }
"#;
    let infos = parse_descriptors(yaml).unwrap();
    assert_eq!(infos.len(), 1);
    assert_eq!(infos[0].kind, OpKind::Computer);
    assert_eq!(infos[0].params.len(), 2);
}

#[test]
fn contradictory_kind_is_rejected() {
    let yaml = r#"
ops:
  - name: copy.array
    kind: function
    source: "builtin:copy/bytes"
    parameters:
      - { name: input, type: ByteArray, io: input }
      - { name: output, type: ByteArray, io: container }
"#;
    let err = parse_descriptors(yaml).unwrap_err().to_string();
    assert!(err.starts_with("ops[0]"), "{err}");
}

#[test]
fn empty_document() {
    assert!(parse_descriptors("ops: []").unwrap().is_empty());
}

#[test]
fn fft_stub_reduces_to_three_variants() {
    let infos = parse_descriptors(BUILTIN_OPS_YAML).unwrap();
    let fft = infos.iter().find(|i| i.name() == "filter.fft").unwrap();
    let variants = reduce_optional(fft).unwrap();
    let arity: Vec<usize> = variants.iter().map(|v| v.inputs().count()).collect();
    assert_eq!(arity, vec![4, 3, 2]);

    let rescale = infos.iter().find(|i| i.name() == "transform.rescale2D").unwrap();
    assert_eq!(reduce_optional(rescale).unwrap().len(), 2);

    let add = infos.iter().find(|i| i.name() == "math.add").unwrap();
    let same = reduce_optional(add).unwrap();
    assert_eq!(same.len(), 1);
    assert_eq!(&same[0], add);
}

#[test]
fn non_trailing_optional_is_an_error() {
    let yaml = r#"
ops:
  - name: x.y
    source: "builtin:math/add_ints"
    parameters:
      - { name: a, type: Integer, io: input }
      - { name: b, type: Integer, io: input }
      - { name: r, type: Integer, io: output }
    optional: [a]
"#;
    let result = parse_descriptors(yaml).map(|v| reduce_optional(&v[0]));
    let msg = match result {
        Err(e) => e.to_string(),
        Ok(Err(e)) => e.to_string(),
        Ok(Ok(_)) => panic!("accepted a leading optional"),
    };
    assert!(msg.contains("optional parameters must be trailing"), "{msg}");
}

#[test]
fn stdlib_environment_size() {
    let env = stdlib::environment().unwrap();
    let entries =
        parse_descriptors(BUILTIN_OPS_YAML).unwrap().len() + parse_descriptors(LEGACY_OPS_YAML).unwrap().len();
    // fft adds two reduced variants, rescale one
    assert_eq!(env.infos().len(), entries + 3);
    assert!(env.infos().len() >= 25);
}

fn write_docs(dir: &std::path::Path, docs: &[(&str, &str)]) -> Vec<PathBuf> {
    docs.iter()
        .map(|(name, text)| {
            let p = dir.join(name);
            std::fs::write(&p, text).unwrap();
            p
        })
        .collect()
}

fn no_builtins() -> EnvOptions {
    EnvOptions {
        include_builtins: false,
        ..EnvOptions::default()
    }
}

#[test]
fn reversed_load_order_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_docs(dir.path(), &[("a.yaml", BUILTIN_OPS_YAML), ("b.yaml", LEGACY_OPS_YAML)]);
    let mut reversed = paths.clone();
    reversed.reverse();
    let e1 = build_environment(&paths, stdlib::bindings(), no_builtins()).unwrap();
    let e2 = build_environment(&reversed, stdlib::bindings(), no_builtins()).unwrap();
    let dump = |e: &opsforge::OpEnvironment| format!("{:?}", e.infos());
    assert_eq!(dump(&e1), dump(&e2));
    assert_eq!(e1.content_hash(), e2.content_hash());
}

#[test]
fn unknown_binding_names_the_uri() {
    let dir = tempfile::tempdir().unwrap();
    let yaml = r#"
ops:
  - name: ghost.op
    source: "builtin:nonexistent"
    parameters:
      - { name: a, type: Integer, io: input }
      - { name: r, type: Integer, io: output }
"#;
    let paths = write_docs(dir.path(), &[("ghost.yaml", yaml)]);
    let err = build_environment(&paths, stdlib::bindings(), EnvOptions::default()).unwrap_err();
    assert!(matches!(&err, RegistryError::Unbound { uri, .. } if uri == "builtin:nonexistent"));
    assert!(err.to_string().contains("builtin:nonexistent"));
}

#[test]
fn reduced_variant_runs_like_full_call() {
    let env = stdlib::environment().unwrap();
    let img = opsforge::Image::from_fn(4, 2, |x, y| (x + 10 * y) as f64);
    let short = env
        .op("transform.rescale2D")
        .input(img.clone())
        .input(8)
        .apply()
        .unwrap();
    let full = env
        .op("transform.rescale2D")
        .input(img)
        .input(8)
        .input(4)
        .apply()
        .unwrap();
    assert_eq!(short.as_image_f64(), full.as_image_f64());
    assert_eq!(short.as_image_f64().unwrap().dims(), (8, 4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn load_order_does_not_matter(seed in any::<u64>(), files in 1usize..6) {
        let mut infos = parse_descriptors(BUILTIN_OPS_YAML).unwrap();
        infos.extend(parse_descriptors(LEGACY_OPS_YAML).unwrap());
        let baseline = {
            let dir = tempfile::tempdir().unwrap();
            let paths = write_docs(dir.path(), &[("all.yaml", &emit_descriptors(&infos))]);
            build_environment(&paths, stdlib::bindings(), no_builtins()).unwrap()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        infos.shuffle(&mut rng);
        let chunk = infos.len().div_ceil(files);
        let dir = tempfile::tempdir().unwrap();
        let texts: Vec<(String, String)> = infos
            .chunks(chunk)
            .enumerate()
            .map(|(i, c)| (format!("{i}.yaml"), emit_descriptors(c)))
            .collect();
        let docs: Vec<(&str, &str)> = texts.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let mut paths = write_docs(dir.path(), &docs);
        paths.shuffle(&mut rng);
        let env = build_environment(&paths, stdlib::bindings(), no_builtins()).unwrap();
        prop_assert_eq!(format!("{:?}", env.infos()), format!("{:?}", baseline.infos()));
        prop_assert_eq!(env.content_hash(), baseline.content_hash());
    }
}
