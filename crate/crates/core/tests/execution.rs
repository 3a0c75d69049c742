use std::sync::{Arc, Mutex};

use opsforge::execution::history_for;
use opsforge::stdlib::filter::gauss_blur;
use opsforge::types::Payload;
use opsforge::{stdlib, EnvOptions, ExecError, Image, OpEnvironment, Value};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn env() -> OpEnvironment {
    stdlib::environment().unwrap()
}

fn random_image(seed: u64, w: usize, h: usize) -> Image<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0))
}

fn blur(env: &OpEnvironment, img: &Image<f64>, sigma: f64) -> Image<f64> {
    gauss_blur(img, sigma, &env.runtime().context()).unwrap()
}

#[test]
fn apply_adds_integers() {
    let env = env();
    let v = env.op("math.add").input(2).input(3).apply().unwrap();
    assert_eq!(v.as_integer(), Some(5));
}

#[test]
fn dog_apply_matches_manual_difference() {
    let env = env();
    let img = random_image(7, 8, 8);
    let out = env
        .op("filter.dog")
        .input(img.clone())
        .input(1.0)
        .input(2.0)
        .apply()
        .unwrap();
    let a = blur(&env, &img, 1.0);
    let b = blur(&env, &img, 2.0);
    let want: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect();
    assert_eq!(out.as_image_f64().unwrap().data(), &want[..]);
}

#[test]
fn copy_array_into_container() {
    let env = env();
    let src = Value::bytes(vec![7, 8]);
    let mut dst = Value::bytes(vec![0, 0]);
    env.op("copy.array").input(&src).container(&mut dst).compute().unwrap();
    assert_eq!(dst.as_bytes(), Some(&[7u8, 8][..]));
}

#[test]
fn gauss_compute_equals_apply() {
    let env = env();
    let img = random_image(3, 12, 9);
    let mut dst = Value::image_f64(Image::zeros(12, 9));
    env.op("filter.gauss")
        .input(img.clone())
        .input(1.5)
        .container(&mut dst)
        .compute()
        .unwrap();
    let f = env.op("filter.gauss").input(img).input(1.5).apply().unwrap();
    assert_eq!(dst.as_image_f64(), f.as_image_f64());
}

#[test]
fn wrong_container_is_left_unchanged() {
    let env = env();
    let src = Value::bytes(vec![1, 2, 3]);
    let mut dst = Value::bytes(vec![9, 9]);
    let err = env
        .op("copy.array")
        .input(&src)
        .container(&mut dst)
        .compute()
        .unwrap_err();
    assert!(
        err.to_string().contains("length") || err.to_string().contains("dimension"),
        "{err}"
    );
    assert_eq!(dst.as_bytes(), Some(&[9u8, 9][..]));

    let img = Value::image_f64(Image::zeros(3, 3));
    let mut small = Value::image_f64(Image::from_fn(2, 2, |x, y| (x + y) as f64));
    let before = small.as_image_f64().cloned();
    let err = env
        .op("filter.gauss")
        .input(&img)
        .input(1.0)
        .container(&mut small)
        .compute()
        .unwrap_err();
    assert!(matches!(
        err.op_error(),
        Some(opsforge::execution::OpError::Dimension(_))
    ));
    assert_eq!(small.as_image_f64().cloned(), before);
}

#[test]
fn increment_mutates_first_byte() {
    let env = env();
    let mut data = Value::bytes(vec![0, 5]);
    env.op("benchmark.increment").input(&mut data).mutate(0).unwrap();
    assert_eq!(data.as_bytes(), Some(&[1u8, 5][..]));

    let mut top = Value::bytes(vec![255]);
    env.op("benchmark.increment").input(&mut top).mutate(0).unwrap();
    assert_eq!(top.as_bytes(), Some(&[0u8][..]));

    let mut empty = Value::bytes(vec![]);
    let err = env.op("benchmark.increment").input(&mut empty).mutate(0).unwrap_err();
    assert!(err.to_string().contains("array must be non-empty"), "{err}");
}

proptest! {
    #[test]
    fn increment_wraps_modulo_256(first in any::<u8>(), rest in proptest::collection::vec(any::<u8>(), 0..4)) {
        let env = env();
        let mut bytes = vec![first];
        bytes.extend(&rest);
        let mut v = Value::bytes(bytes.clone());
        env.op("benchmark.increment").input(&mut v).mutate(0).unwrap();
        let got = v.as_bytes().unwrap();
        prop_assert_eq!(got[0] as u16, (first as u16 + 1) % 256);
        prop_assert_eq!(&got[1..], &rest[..]);
    }
}

#[test]
fn handle_is_reusable_and_matches_once() {
    let env = env();
    let add = env
        .op("math.add")
        .input_type(opsforge::SemanticType::named("Integer"))
        .input_type(opsforge::SemanticType::named("Integer"))
        .function()
        .unwrap();
    assert_eq!(
        add.apply(&[&Value::integer(2), &Value::integer(3)])
            .unwrap()
            .as_integer(),
        Some(5)
    );
    assert_eq!(
        add.apply(&[&Value::integer(4), &Value::integer(5)])
            .unwrap()
            .as_integer(),
        Some(9)
    );

    let before = env.match_count();
    for i in 0..1000 {
        let r = add.apply(&[&Value::integer(i), &Value::integer(1)]).unwrap();
        assert_eq!(r.as_integer(), Some(i + 1));
    }
    assert_eq!(env.match_count(), before);
}

#[test]
fn handle_outlives_environment() {
    let handle = {
        let env = env();
        env.op("math.mul").input(0).input(0).function().unwrap()
    };
    let r = handle.apply(&[&Value::integer(6), &Value::integer(7)]).unwrap();
    assert_eq!(r.as_integer(), Some(42));
}

#[test]
fn help_lists_math_namespace() {
    let env = env();
    let text = env.help("math");
    assert!(text.lines().any(|l| l == "math.add"));
    assert!(text.lines().any(|l| l == "math.sub"));
    let verbose = env.help_verbose("math.add");
    for field in ["kind:", "priority:", "source:", "parameters:"] {
        assert!(verbose.contains(field), "{verbose}");
    }
    let none = env.help("zzz");
    assert!(none.starts_with("No ops found"));
    assert!(!none.contains("Did you mean"));
}

#[test]
fn help_describes_types_simply() {
    let env = env();
    let text = env.help("filter.gauss");
    assert!(text.contains("image"));
    assert!(!text.contains("ImageF64"));
    assert_eq!(
        text.trim_end(),
        "filter.gauss(input: image, sigma: number, output: image)  [computer]"
    );
}

#[test]
fn history_records_producer() {
    let env = env();
    let img = random_image(1, 6, 6);
    let out = env.op("filter.dog").input(img).input(1.0).input(2.0).apply().unwrap();
    let handle = env
        .op("filter.dog")
        .input(&out)
        .input(1.0)
        .input(2.0)
        .function()
        .unwrap();
    let (sig, _) = history_for(env.history(), out.id()).unwrap();
    assert_eq!(&*sig, handle.signature());
    assert!(sig.contains("builtin:filter/dog_f64"));

    assert!(history_for(env.history(), Value::integer(1).id()).is_none());
}

#[test]
fn history_keeps_latest_and_all() {
    let env = env();
    let img = Value::image_f64(random_image(2, 4, 4));
    let mut dst = Value::image_f64(Image::zeros(4, 4));
    env.op("filter.gauss")
        .input(&img)
        .input(1.0)
        .container(&mut dst)
        .compute()
        .unwrap();
    env.op("filter.dog")
        .input(&img)
        .input(1.0)
        .input(2.0)
        .container(&mut dst)
        .compute()
        .unwrap();
    let records = env.history().records_for(dst.id());
    assert_eq!(records.len(), 2);
    assert!(records[0].signature.contains("gauss_f64|DIRECT"));
    let (latest, _) = history_for(env.history(), dst.id()).unwrap();
    assert!(latest.starts_with("builtin:filter/dog_f64"));
}

#[test]
fn functions_do_not_touch_inputs() {
    let env = env();
    let img = Value::image_f64(random_image(5, 5, 5));
    let before = img.as_image_f64().cloned();
    let _ = env.op("filter.gauss").input(&img).input(2.0).apply().unwrap();
    let _ = env.op("math.sub").input(&img).input(&img).apply().unwrap();
    assert_eq!(img.as_image_f64().cloned(), before);
}

#[test]
fn kinds_agree_on_element_ops() {
    let env = env();
    let a = Value::image_f64(random_image(8, 3, 3));
    let b = Value::image_f64(random_image(9, 3, 3));
    let f = env.op("math.sub").input(&a).input(&b).apply().unwrap();
    let mut c = Value::image_f64(Image::zeros(3, 3));
    env.op("math.sub")
        .input(&a)
        .input(&b)
        .container(&mut c)
        .compute()
        .unwrap();
    assert_eq!(f.as_image_f64(), c.as_image_f64());
    let want: Vec<f64> = a
        .as_image_f64()
        .unwrap()
        .data()
        .iter()
        .zip(b.as_image_f64().unwrap().data())
        .map(|(x, y)| x - y)
        .collect();
    assert_eq!(f.as_image_f64().unwrap().data(), &want[..]);
}

#[test]
fn gauss_progress_is_monotone_per_row() {
    let env = env();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let sink = seen.clone();
    env.progress()
        .add_listener(move |r| sink.lock().unwrap().push(r.clone()));
    let img = random_image(4, 7, 11);
    env.op("filter.gauss").input(img).input(1.0).apply().unwrap();
    let reports = seen.lock().unwrap();
    let fractions: Vec<f64> = reports.iter().map(|r| r.fraction).collect();
    assert_eq!(fractions.len(), 11);
    assert!(fractions.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*fractions.last().unwrap(), 1.0);
    assert!(reports.iter().all(|r| r.op_label == "filter.gauss"));
}

#[test]
fn parallel_blur_is_deterministic() {
    let img = random_image(11, 96, 80);
    let run = |p: usize| {
        let env = stdlib::environment_with(EnvOptions {
            pool_size: Some(p),
            ..EnvOptions::default()
        })
        .unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let sink = seen.clone();
        env.progress()
            .add_listener(move |r| sink.lock().unwrap().push(r.fraction));
        let out = env.op("filter.gauss").input(img.clone()).input(2.0).apply().unwrap();
        let fractions = seen.lock().unwrap().clone();
        (out.as_image_f64().unwrap().clone(), fractions)
    };
    let (one, f1) = run(1);
    let (four, f4) = run(4);
    assert_eq!(one, four);
    for f in [&f1, &f4] {
        assert_eq!(f.len(), 80);
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*f.last().unwrap(), 1.0);
    }
}

#[test]
fn failing_op_reports_signature() {
    let env = env();
    let img = Value::image_f64(Image::zeros(2, 2));
    let err = env.op("filter.fft").input(&img).input("forward").apply().unwrap_err();
    match &err {
        ExecError::Op { signature, .. } => assert!(signature.contains("fft_stub")),
        other => panic!("unexpected {other}"),
    }
    assert!(err.to_string().contains("not implemented"));
}

#[test]
fn computer_output_keeps_container_identity() {
    let env = env();
    let src = Value::reals(vec![1.0, 2.0]);
    let mut dst = Value::reals(vec![0.0, 0.0]);
    let id = dst.id();
    env.op("copy.array").input(&src).container(&mut dst).compute().unwrap();
    assert_eq!(dst.id(), id);
    assert!(matches!(dst.payload(), Payload::RealArray(v) if v == &[1.0, 2.0]));
}
