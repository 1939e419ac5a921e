use hs2s::completion::*;
use hs2s::hs2sae::*;
use hs2s::motiondata::SampleWindow;
use hs2s::ndmath::{Activation, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> ArchConfig {
    ArchConfig {
        frames: 6,
        block: 2,
        latent: 5,
        features: 3,
        sub_hidden: 4,
        dec_hidden: 4,
        activation: Activation::Tanh,
        variant: Variant::Hs2sae,
    }
}

fn setup(seed: u64) -> (ArchConfig, ModelParams, ChaCha8Rng) {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ModelParams::init(&c, &mut rng);
    (c, p, rng)
}

fn window(rng: &mut ChaCha8Rng, j: usize) -> SampleWindow {
    let data = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
    SampleWindow::from_full(Matrix::from_vec(6, 3, data).unwrap(), j, 2, 0).unwrap()
}

fn add(cv: CompletionVector) -> Completer {
    Completer::Add(cv)
}

fn pairs(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> PatternPairSet {
    PatternPairSet::new(1, CompletionMode::Completion, 2, 6, inputs, targets).unwrap()
}

#[test]
fn full_window_diff_is_zero() {
    let (c, p, mut rng) = setup(1);
    let w = window(&mut rng, 3);
    assert_eq!(latent_diff(&p, &c, &w, CompletionMode::Completion).unwrap(), vec![0.0; 5]);
    assert!(latent_diff(&p, &c, &w, CompletionMode::Matching).is_err());
}

#[test]
fn single_pair_vector_completes_exactly() {
    let (c, p, mut rng) = setup(2);
    let w = window(&mut rng, 1);
    let d = latent_diff(&p, &c, &w, CompletionMode::Completion).unwrap();
    let cv = compute_vj(&p, &c, std::slice::from_ref(&w), 1, CompletionMode::Completion).unwrap();
    assert_eq!(cv.v, d);
    assert_eq!(cv.sigma, vec![0.0; 5]);
    let z = p.encode_prefix(&c, &w.x).unwrap();
    let done = complete_add(&z, &cv).unwrap();
    let full = p.encode_prefix(&c, &w.full).unwrap();
    for (a, b) in done.z.iter().zip(&full.z) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(done.prefix_len, 6);
}

#[test]
fn opposite_diffs_average_to_zero() {
    let u = vec![0.5, -2.0, 1.25];
    let neg: Vec<f64> = u.iter().map(|v| -v).collect();
    let set = pairs(vec![vec![0.0; 3], vec![0.0; 3]], vec![u.clone(), neg]);
    let cv = CompletionVector::from_pairs(&set).unwrap();
    assert_eq!(cv.v, vec![0.0; 3]);
    assert_eq!(cv.sigma, vec![0.5, 2.0, 1.25]);
    assert_eq!(cv.sample_count, 2);
}

#[test]
fn matching_targets_differ_from_completion_targets() {
    let (c, p, mut rng) = setup(3);
    let ws: Vec<SampleWindow> = (0..4).map(|_| window(&mut rng, 1)).collect();
    let comp = pattern_pairs(&p, &c, &ws, CompletionMode::Completion).unwrap();
    let matc = pattern_pairs(&p, &c, &ws, CompletionMode::Matching).unwrap();
    assert_eq!(comp.inputs, matc.inputs);
    assert_eq!((comp.target_len, matc.target_len), (6, 4));
    let dist: f64 = comp
        .targets
        .iter()
        .zip(&matc.targets)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
        .sum();
    assert!(dist > 0.0);
}

#[test]
fn zero_vector_predicts_plain_autoencoding() {
    let (c, p, mut rng) = setup(4);
    let w = window(&mut rng, 2);
    let set = pairs(vec![vec![1.0; 5]], vec![vec![1.0; 5]]);
    let cv = CompletionVector { prefix_len: 4, ..CompletionVector::from_pairs(&set).unwrap() };
    let out = predict_full(&p, &c, &add(cv.clone()), &w.x).unwrap();
    let plain = p.decode(&c, &p.encode_prefix(&c, &w.x).unwrap()).unwrap();
    assert_eq!(out, plain);
    assert_eq!(out, predict_full(&p, &c, &add(cv.clone()), &w.x).unwrap());
    let suffix = predict_suffix(&p, &c, &add(cv), &w.x).unwrap();
    assert_eq!(suffix, plain.slice_rows(4, 6));
}

#[test]
fn matching_continuation_starts_at_frame_zero() {
    let decoded = Matrix::from_vec(6, 1, (0..6).map(f64::from).collect()).unwrap();
    let set = PatternPairSet::new(1, CompletionMode::Matching, 2, 4, vec![vec![0.0]], vec![vec![0.0]]).unwrap();
    let m = add(CompletionVector::from_pairs(&set).unwrap());
    assert_eq!(continuation(&decoded, &m).data(), &[0.0, 1.0, 2.0, 3.0]);
}

#[test]
fn noise_scale_continuity_and_reproducibility() {
    let (c, p, mut rng) = setup(5);
    let ws: Vec<SampleWindow> = (0..6).map(|_| window(&mut rng, 1)).collect();
    let comp = add(compute_vj(&p, &c, &ws, 1, CompletionMode::Completion).unwrap());
    let x = &ws[0].x;
    let base = predict_full(&p, &c, &comp, x).unwrap();
    let zero = generate_noisy(&p, &c, &comp, x, 0.0, &mut rng_for(1, 7)).unwrap();
    assert_eq!(zero, base);
    let tiny = generate_noisy(&p, &c, &comp, x, 1e-8, &mut rng_for(1, 7)).unwrap();
    assert!(tiny.max_abs_diff(&base).unwrap() <= 1e-5);
    let a = generate_noisy(&p, &c, &comp, x, 1.0, &mut rng_for(1, 7)).unwrap();
    let b = generate_noisy(&p, &c, &comp, x, 1.0, &mut rng_for(1, 7)).unwrap();
    let other = generate_noisy(&p, &c, &comp, x, 1.0, &mut rng_for(2, 7)).unwrap();
    assert_eq!(a, b);
    assert!(a != other && a.is_finite() && other.is_finite());
    assert!(generate_noisy(&p, &c, &comp, x, -1.0, &mut rng).is_err());
}

#[test]
fn interpolation_endpoints_are_exact() {
    let (c, p, mut rng) = setup(6);
    let za = p.encode_prefix(&c, &window(&mut rng, 3).full).unwrap();
    let zb = p.encode_prefix(&c, &window(&mut rng, 3).full).unwrap();
    let seqs = interpolate(&p, &c, &za, &zb, 8).unwrap();
    assert_eq!(seqs.len(), 9);
    assert_eq!(seqs[0], p.decode(&c, &za).unwrap());
    assert_eq!(seqs[8], p.decode(&c, &zb).unwrap());
    let same = interpolate(&p, &c, &za, &za, 3).unwrap();
    assert!(same.iter().all(|s| *s == same[0]));
    assert!(interpolate(&p, &c, &za, &zb, 0).is_err());
}

#[test]
fn label_readout() {
    let mut m = Matrix::zeros(4, 4);
    for t in 0..4 {
        m.set(t, 2, 1.0);
    }
    assert_eq!(read_label_probs(&m, 2).unwrap(), vec![1.0, 0.0]);
    assert_eq!(read_label_probs(&Matrix::zeros(4, 4), 2).unwrap(), vec![0.5, 0.5]);
    assert!(read_label_probs(&m, 5).is_err());
}

#[test]
fn fn_recovers_identity_and_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inputs: Vec<Vec<f64>> = (0..64).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let shift = [0.3, -0.2, 0.1, 0.05];
    let shifted: Vec<Vec<f64>> = inputs.iter().map(|p| p.iter().zip(shift).map(|(a, b)| a + b).collect()).collect();
    let fc = FnTrainConfig { epochs: 20, ..FnTrainConfig::default() };
    for targets in [inputs.clone(), shifted] {
        let set = PatternPairSet::new(1, CompletionMode::Completion, 2, 6, inputs.clone(), targets).unwrap();
        let f = fit_fn(&set, &fc).unwrap();
        assert!(fn_mae(&f, &set) < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn add_is_associative(
        z in prop::collection::vec(-5.0f64..5.0, 4),
        v1 in prop::collection::vec(-5.0f64..5.0, 4),
        v2 in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let vector = |v: &Vec<f64>, len: usize| CompletionVector {
            j: 1,
            mode: CompletionMode::Completion,
            prefix_len: len,
            target_len: len,
            v: v.clone(),
            sigma: vec![0.0; 4],
            sample_count: 1,
        };
        let code = LatentCode { z: z.clone(), prefix_len: 6 };
        let stepwise = complete_add(&complete_add(&code, &vector(&v1, 6)).unwrap(), &vector(&v2, 6)).unwrap();
        let sum: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a + b).collect();
        let once = complete_add(&code, &vector(&sum, 6)).unwrap();
        prop_assert_eq!(stepwise.z.len(), 4);
        for (a, b) in stepwise.z.iter().zip(&once.z) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let zero = complete_add(&code, &vector(&vec![0.0; 4], 6)).unwrap();
        prop_assert_eq!(zero.z, z);
        prop_assert!(complete_add(&code, &vector(&v1, 4)).is_err());
    }
}
