use hs2s::hs2sae::*;
use hs2s::ndmath::{mae_loss, Activation, Matrix, Parameters};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(frames: usize, block: usize) -> ArchConfig {
    ArchConfig {
        frames,
        block,
        latent: 6,
        features: 3,
        sub_hidden: 5,
        dec_hidden: 4,
        activation: Activation::Tanh,
        variant: Variant::Hs2sae,
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn full_prefix_code_is_final_higher_state() {
    let cfg = small(6, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = ModelParams::init(&cfg, &mut rng);
    let x = random_matrix(&mut rng, 6, 3);
    let all = p.encode_all_prefixes(&cfg, &x).unwrap();
    let z = p.encode_prefix(&cfg, &x).unwrap();
    assert_eq!(z.prefix_len, 6);
    assert_eq!(&z, all.last().unwrap());
}

#[test]
fn multi_loss_matches_per_prefix_mean() {
    let cfg = small(8, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = ModelParams::init(&cfg, &mut rng);
    let full = random_matrix(&mut rng, 8, 3);
    let targets = build_targets(&full, 2).unwrap();
    let terms: Vec<f64> = (1..=4)
        .map(|j| {
            let z = p.encode_prefix(&cfg, &full.slice_rows(0, 2 * j)).unwrap();
            mae_loss(&p.decode(&cfg, &z).unwrap(), &targets[j - 1]).unwrap()
        })
        .collect();
    let forward: f64 = terms.iter().sum::<f64>() / 4.0;
    let backward: f64 = terms.iter().rev().sum::<f64>() / 4.0;
    let loss = p.multi_loss(&cfg, &full).unwrap();
    assert!((loss - forward).abs() < 1e-12);
    assert!((loss - backward).abs() < 1e-12);
}

#[test]
fn basic_pad_sees_last_frame_padding() {
    let cfg = ArchConfig { variant: Variant::BasicPad, ..small(6, 2) };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p = ModelParams::init(&cfg, &mut rng);
    let x = random_matrix(&mut rng, 2, 3);
    let mut padded = x.clone();
    for _ in 0..4 {
        padded.push_row(x.row(1)).unwrap();
    }
    let z = p.encode_prefix(&cfg, &x).unwrap();
    let z_full = p.encode_prefix(&cfg, &padded).unwrap();
    assert_eq!(z.z, z_full.z);
    assert_eq!(z.prefix_len, 2);
}

#[test]
fn zero_epochs_return_initialization() {
    let cfg = small(4, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = vec![random_matrix(&mut rng, 12, 3)];
    let tc = TrainConfig { epochs: 0, seed: 3, ..TrainConfig::default() };
    let out = train_autoencoder(&data, &cfg, &tc).unwrap();
    assert!(out.history.step_loss.is_empty());
    assert_eq!(out.params, ModelParams::init(&cfg, &mut rng_for(3, 0)));
}

#[test]
fn short_data_is_rejected() {
    let cfg = small(8, 2);
    let data = vec![Matrix::zeros(7, 3)];
    let err = train_autoencoder(&data, &cfg, &TrainConfig::default()).unwrap_err();
    assert_eq!(err.kind(), "data");
}

#[test]
fn seeded_training_is_bit_identical() {
    let cfg = small(4, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<Matrix> = (0..3).map(|_| random_matrix(&mut rng, 10, 3)).collect();
    let tc = TrainConfig { epochs: 2, samples_per_epoch: 12, batch: 4, folds: 3, val_samples: 4, seed: 11, ..TrainConfig::default() };
    let a = train_autoencoder(&data, &cfg, &tc).unwrap();
    let b = train_autoencoder(&data, &cfg, &tc).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.params.flatten(), b.params.flatten());
    assert_eq!(a.history.step_loss.len(), 6);
}

#[test]
fn mask_thirds_keep_other_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let batch: Vec<Matrix> = (0..3).map(|_| random_matrix(&mut rng, 4, 5)).collect();
    let masked = mask_for_classification(&batch, 2, &mut rng_for(1, 0)).unwrap();
    let again = mask_for_classification(&batch, 2, &mut rng_for(1, 0)).unwrap();
    assert_eq!(masked, again);
    let mut kinds: Vec<_> = masked.iter().map(|(_, k)| format!("{k:?}")).collect();
    kinds.sort();
    assert_eq!(kinds, ["Label", "None", "Pose"]);
    for ((m, kind), orig) in masked.iter().zip(&batch) {
        for t in 0..4 {
            let (pose, label) = m.row(t).split_at(3);
            let (opose, olabel) = orig.row(t).split_at(3);
            match kind {
                MaskKind::Label => {
                    assert_eq!(pose, opose);
                    assert!(label.iter().all(|&v| v == 0.0));
                }
                MaskKind::Pose => {
                    assert_eq!(label, olabel);
                    assert!(pose.iter().all(|&v| v == 0.0));
                }
                MaskKind::None => assert_eq!(m.row(t), orig.row(t)),
            }
        }
    }
    assert!(mask_for_classification(&batch, 0, &mut rng).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn repeat_unit_places_blocks(blocks in 1usize..6, block in 1usize..5, cols in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_matrix(&mut rng, blocks, cols);
        let out = repeat_unit(&seq, block, blocks * block).unwrap();
        prop_assert_eq!(out.rows(), blocks * block);
        for t in 0..out.rows() {
            prop_assert_eq!(out.row(t), seq.row(t / block));
        }
    }

    #[test]
    fn targets_hold_last_prefix_frame(blocks in 1usize..5, block in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = blocks * block;
        let full = random_matrix(&mut rng, frames, 2);
        let targets = build_targets(&full, block).unwrap();
        prop_assert_eq!(targets.len(), blocks);
        for (i, tgt) in targets.iter().enumerate() {
            let split = (i + 1) * block;
            for t in 0..frames {
                prop_assert_eq!(tgt.row(t), full.row(t.min(split - 1)));
            }
        }
    }

    #[test]
    fn prefix_locality_and_decode_length(j in 1usize..=4, seed in any::<u64>()) {
        let cfg = small(8, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ModelParams::init(&cfg, &mut rng);
        let a = random_matrix(&mut rng, 8, 3);
        let mut b = random_matrix(&mut rng, 8, 3);
        for t in 0..2 * j {
            b.row_mut(t).copy_from_slice(a.row(t));
        }
        let za = p.encode_all_prefixes(&cfg, &a).unwrap();
        let zb = p.encode_all_prefixes(&cfg, &b).unwrap();
        prop_assert_eq!(&za[j - 1], &zb[j - 1]);
        prop_assert_eq!(za[j - 1].prefix_len, 2 * j);
        let out = p.decode(&cfg, &za[j - 1]).unwrap();
        prop_assert_eq!(out.shape(), (8, 3));
    }
}
