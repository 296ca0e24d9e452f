use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use romforge::gpr::GprConfig;
use romforge::io::encode_surrogate;
use romforge::linalg::SnapshotMatrix;
use romforge::nn::build_reference_cae;
use romforge::rom::*;
use romforge::RomError;

const NY: usize = 8;
const NX: usize = 8;

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

fn design(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| vec![rng.random_range(1.0..2.0), rng.random_range(1.0..2.0)])
        .collect()
}

/// Smooth two-channel fields on an 8x8 grid, nonlinear in the parameters.
fn field(mu: &[f64], channel: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(NY * NX);
    for r in 0..NY {
        for c in 0..NX {
            let y = r as f64 / (NY - 1) as f64;
            let x = c as f64 / (NX - 1) as f64;
            let v = if channel == 0 {
                (mu[0] * x * 2.0).sin() * (1.0 + mu[1] * y) + 0.3
            } else {
                (mu[1] * y * 1.5).cos() * mu[0] - x * 0.5
            };
            out.push(v);
        }
    }
    out
}

fn channels(params: &[Vec<f64>]) -> Vec<SnapshotMatrix> {
    (0..2)
        .map(|ch| {
            let cols: Vec<Vec<f64>> = params.iter().map(|mu| field(mu, ch)).collect();
            SnapshotMatrix::from_columns(&cols, params.to_vec()).unwrap()
        })
        .collect()
}

fn quick_cae() -> CaeTrainConfig {
    CaeTrainConfig {
        width_scale: 0.125,
        max_epochs: 40,
        patience: 10,
        batch_size: 8,
        learning_rate: 1e-3,
        leaky_slope: 0.25,
        scaling: ScalingMode::ChannelGlobal,
    }
}

#[test]
fn pod_gpr_constant_dataset_predicts_the_constant() {
    let x0: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).cos() + 2.0).collect();
    let params = design(6, 1);
    let s = SnapshotMatrix::from_columns(&vec![x0.clone(); 6], params).unwrap();
    let rom = pod_gpr_offline(&s, 1, &GprConfig::default(), 0).unwrap();
    for mu in design(5, 2) {
        assert!(rel(&rom.predict(&mu).unwrap(), &x0) <= 1e-8);
    }
}

#[test]
fn pod_gpr_reproduces_training_columns_of_a_two_dim_subspace() {
    let a: Vec<f64> = (0..30).map(|i| (i as f64 * 0.2).sin()).collect();
    let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.05).exp()).collect();
    let params = design(12, 3);
    let cols: Vec<Vec<f64>> = params
        .iter()
        .map(|mu| {
            a.iter()
                .zip(&b)
                .map(|(x, y)| mu[0] * x + mu[1] * mu[1] * y)
                .collect()
        })
        .collect();
    let s = SnapshotMatrix::from_columns(&cols, params.clone()).unwrap();
    let rom = pod_gpr_offline(&s, 2, &GprConfig::default(), 5).unwrap();
    for (mu, x) in params.iter().zip(&cols) {
        assert!(rel(&rom.predict(mu).unwrap(), x) <= 1e-6);
    }
}

#[test]
fn pod_gpr_bookkeeping_and_contracts() {
    let params = design(10, 4);
    let ch = channels(&params);
    let rom = pod_gpr_offline(&ch[0], 1, &GprConfig::default(), 0).unwrap();
    assert_eq!(rom.models().len(), 1);
    assert!(matches!(
        pod_gpr_offline(&ch[0], 11, &GprConfig::default(), 0),
        Err(RomError::Argument(_))
    ));
    assert!(matches!(rom.predict(&[1.0]), Err(RomError::Argument(_))));
}

#[test]
fn pod_gpr_online_matches_explicit_matvec_and_projection() {
    let params = design(15, 6);
    let ch = channels(&params);
    let rom = pod_gpr_offline(&ch[0], 4, &GprConfig::default(), 2).unwrap();
    let psi = rom.basis().vectors();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let mu = vec![rng.random_range(1.0..2.0), rng.random_range(1.0..2.0)];
        let a = rom.predict_coefficients(&mu).unwrap();
        let pred = rom.predict(&mu).unwrap();
        for i in 0..psi.nrows() {
            let oracle: f64 = (0..a.len()).map(|j| psi[(i, j)] * a[j]).sum();
            assert!((pred[i] - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        }
    }

    // At a training point the coefficients interpolate, so the prediction is
    // the projection and both errors agree.
    for (j, mu) in params.iter().enumerate() {
        let x = ch[0].column(j);
        let pred = rom.predict(mu).unwrap();
        let proj = rom.project(&x).unwrap();
        assert!(rel(&pred, &proj) <= 1e-6);
        let e_rom = rom_error(&x, &pred).unwrap();
        let e_proj = projection_error(&x, &proj).unwrap();
        assert!(e_rom >= 0.0);
        assert!((e_rom - e_proj).abs() <= 1e-6);
    }
}

#[test]
fn pod_projection_error_nonincreasing_in_k_on_a_fixed_split() {
    let params = design(20, 9);
    let ch = channels(&params);
    let train = ch[1].select(&(0..15).collect::<Vec<_>>()).unwrap();
    let rom = pod_gpr_offline(&train, 15, &GprConfig::default(), 0).unwrap();
    for j in 15..20 {
        let x = ch[1].column(j);
        let mut prev = f64::INFINITY;
        for k in 1..=15 {
            let e = projection_error(&x, &rom.truncated(k).unwrap().project(&x).unwrap()).unwrap();
            assert!(e <= prev + 1e-14, "k={k}: {e} > {prev}");
            prev = e;
        }
    }
}

#[test]
fn frozen_loss_stops_after_patience_plus_one_epochs() {
    let params = design(10, 10);
    let ch = channels(&params);
    let refs: Vec<&SnapshotMatrix> = ch.iter().collect();
    let mut cfg = quick_cae();
    cfg.learning_rate = 0.0;
    cfg.max_epochs = 100;
    cfg.patience = 7;
    let (model, hist) =
        cae_gpr_offline(&refs, &refs, NY, NX, 2, &cfg, &GprConfig::default(), 1).unwrap();
    assert_eq!(hist.epochs(), cfg.patience + 1);
    assert_eq!(hist.best_epoch, 1);
    assert!(hist.stopped_early);
    assert!(hist.val_loss.iter().all(|&v| v == hist.val_loss[0]));
    assert_eq!(model.epochs(), cfg.patience + 1);
}

#[test]
fn best_epoch_parameters_are_restored() {
    let params = design(16, 11);
    let ch = channels(&params);
    let train: Vec<SnapshotMatrix> = ch
        .iter()
        .map(|s| s.select(&(0..12).collect::<Vec<_>>()).unwrap())
        .collect();
    let val: Vec<SnapshotMatrix> = ch
        .iter()
        .map(|s| s.select(&[12, 13, 14, 15]).unwrap())
        .collect();
    let tr: Vec<&SnapshotMatrix> = train.iter().collect();
    let va: Vec<&SnapshotMatrix> = val.iter().collect();
    let mut cfg = quick_cae();
    cfg.learning_rate = 3e-2;
    let (model, hist) =
        cae_gpr_offline(&tr, &va, NY, NX, 2, &cfg, &GprConfig::default(), 4).unwrap();
    let best = hist.best_val_loss();
    assert!(hist.val_loss.iter().all(|&v| v >= best));

    // Recompute the validation loss of the restored network.
    let scaled: Vec<Vec<Vec<f64>>> = (0..4)
        .map(|j| {
            val.iter()
                .zip(model.scaling())
                .map(|(s, info)| info.transform(&s.column(j)).unwrap())
                .collect()
        })
        .collect();
    let refs: Vec<Vec<&[f64]>> = scaled
        .iter()
        .map(|p| p.iter().map(|v| v.as_slice()).collect())
        .collect();
    let t = reshape_batch(&refs, NY, NX).unwrap();
    assert_eq!(model.network().loss(&t).unwrap(), best);
}

#[test]
fn autoencoder_overfits_one_repeated_snapshot() {
    let mu = vec![1.3, 1.7];
    let x = field(&mu, 0);
    let cols = vec![x; 8];
    let s = SnapshotMatrix::from_columns(&cols, vec![mu; 8]).unwrap();
    let data = minmax_fit_transform(s.data(), ScalingMode::ChannelGlobal)
        .unwrap()
        .0;
    let one: Vec<f64> = data.column(0).iter().copied().collect();
    let batch = reshape_batch(&vec![vec![one.as_slice()]; 8], NY, NX).unwrap();

    let mut net = build_reference_cae(NY, NX, 1, 2, 0.125).unwrap();
    net.init(3);
    let cfg = CaeTrainConfig {
        max_epochs: 3000,
        patience: 3000,
        learning_rate: 1e-3,
        ..quick_cae()
    };
    let hist = train_autoencoder(&mut net, &batch, &batch, &cfg, 0).unwrap();
    assert!(
        hist.best_val_loss() <= 1e-4,
        "final mse {}",
        hist.best_val_loss()
    );
}

#[test]
fn cae_gpr_online_contracts() {
    let params = design(20, 12);
    let ch = channels(&params);
    let refs: Vec<&SnapshotMatrix> = ch.iter().collect();
    let (model, _) = cae_gpr_offline(
        &refs,
        &refs,
        NY,
        NX,
        3,
        &quick_cae(),
        &GprConfig::default(),
        7,
    )
    .unwrap();

    // Training point: GPR interpolates the encoder's code.
    for (j, mu) in params.iter().enumerate().take(5) {
        let x: Vec<Vec<f64>> = ch.iter().map(|s| s.column(j)).collect();
        let xr: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
        let (code, proj) = model.encode_and_project(&xr).unwrap();
        let coeffs = model.predict_coefficients(mu).unwrap();
        assert!(rel(&coeffs, &code) <= 1e-6);
        let pred = model.predict(mu).unwrap();
        for c in 0..2 {
            assert!(rel(&pred[c], &proj[c]) <= 1e-6);
        }
    }

    // Output shape and range: the sigmoid keeps every value inside the
    // training range of its channel.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let mu = vec![rng.random_range(1.0..2.0), rng.random_range(1.0..2.0)];
        let pred = model.predict(&mu).unwrap();
        assert_eq!(pred.len(), 2);
        for (c, p) in pred.iter().enumerate() {
            assert_eq!(p.len(), NY * NX);
            let lo = ch[c].data().min();
            let hi = ch[c].data().max();
            assert!(p.iter().all(|v| v.is_finite() && *v >= lo && *v <= hi));
        }
    }

    // Held-out state projects to a finite field of the right shape.
    let x: Vec<Vec<f64>> = (0..2).map(|c| field(&[1.95, 1.05], c)).collect();
    let xr: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
    let proj = model.project(&xr).unwrap();
    assert!(proj
        .iter()
        .all(|p| p.len() == NY * NX && p.iter().all(|v| v.is_finite())));
    assert!(matches!(
        model.predict(&[1.0, 2.0, 3.0]),
        Err(RomError::Argument(_))
    ));
    assert!(matches!(
        model.project(&xr[..1]),
        Err(RomError::Argument(_))
    ));
}

#[test]
fn cae_gpr_rejects_bad_inputs() {
    let params = design(10, 14);
    let ch = channels(&params);
    let refs: Vec<&SnapshotMatrix> = ch.iter().collect();
    let g = GprConfig::default();
    let c = quick_cae();
    assert!(matches!(
        cae_gpr_offline(&refs, &refs, NY, NX, 0, &c, &g, 0),
        Err(RomError::Argument(_))
    ));
    assert!(matches!(
        cae_gpr_offline(&refs, &refs, 0, 0, 2, &c, &g, 0),
        Err(RomError::Argument(_))
    ));
    assert!(matches!(
        cae_gpr_offline(&refs, &refs, 4, 8, 2, &c, &g, 0),
        Err(RomError::Argument(_))
    ));
    assert!(matches!(
        cae_gpr_offline(&refs, &refs[..1], NY, NX, 2, &c, &g, 0),
        Err(RomError::Argument(_))
    ));
}

#[test]
fn cae_gpr_is_deterministic_per_seed() {
    let params = design(10, 15);
    let ch = channels(&params);
    let refs: Vec<&SnapshotMatrix> = ch.iter().collect();
    let build = |seed| {
        let (m, h) = cae_gpr_offline(
            &refs,
            &refs,
            NY,
            NX,
            2,
            &quick_cae(),
            &GprConfig::default(),
            seed,
        )
        .unwrap();
        let prov = Provenance {
            seed,
            config_digest: [0; 32],
            wall_time_s: 0.0,
            epochs: h.epochs() as u64,
        };
        encode_surrogate(&RomSurrogate::new(RomModel::CaeGpr(m), NY, NX, prov).unwrap()).unwrap()
    };
    assert_eq!(build(21), build(21));
    assert_ne!(build(21), build(22));
}

fn small_cv() -> CvConfig {
    CvConfig {
        pod_ks: vec![1, 2, 4],
        cae_ks: vec![2],
        gpr: GprConfig {
            restarts: 2,
            ..GprConfig::default()
        },
        cae: CaeTrainConfig {
            max_epochs: 8,
            patience: 3,
            ..quick_cae()
        },
    }
}

fn names() -> Vec<String> {
    vec!["u".into(), "v".into()]
}

#[test]
fn cv_partitions_and_means() {
    let params = design(20, 16);
    let ch = channels(&params);
    let rep = five_fold_cv(&ch, &names(), (NY, NX), &small_cv(), 3).unwrap();
    assert_eq!(rep.splits.len(), 5);
    for s in &rep.splits {
        assert_eq!(s.train.len(), 16);
        assert_eq!(s.validation.len() + s.test.len(), 4);
    }
    for method in [Method::PodGpr, Method::CaeGpr] {
        let ks: &[usize] = if method == Method::PodGpr {
            &[1, 2, 4]
        } else {
            &[2]
        };
        for &k in ks {
            for name in ["u", "v"] {
                let per: Vec<&CvRow> = rep
                    .rows
                    .iter()
                    .filter(|r| {
                        r.fold.is_some() && r.method == method && r.k == k && r.channel == name
                    })
                    .collect();
                assert_eq!(per.len(), 5);
                let mean = rep.mean_row(method, k, name).unwrap();
                let avg = per.iter().map(|r| r.eps_rom).sum::<f64>() / 5.0;
                assert!((mean.eps_rom - avg).abs() <= 1e-15 * avg.max(1.0));
                assert!(per.iter().all(|r| r.eps_rom >= 0.0 && r.eps_proj >= 0.0));
            }
        }
    }
    let csv = rep.to_csv();
    assert!(csv.starts_with(CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + (3 + 1) * 2 * 6);
    assert_eq!(rep.timing_csv().lines().count(), 1 + 4 * 5);
}

#[test]
fn cv_is_invariant_to_sample_order() {
    let params = design(20, 17);
    let ch = channels(&params);
    let mut order: Vec<usize> = (0..20).collect();
    order.reverse();
    order.swap(3, 11);
    let shuffled: Vec<SnapshotMatrix> = ch.iter().map(|s| s.select(&order).unwrap()).collect();
    let a = five_fold_cv(&ch, &names(), (NY, NX), &small_cv(), 5).unwrap();
    let b = five_fold_cv(&shuffled, &names(), (NY, NX), &small_cv(), 5).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn cv_rejects_indivisible_counts() {
    let params = design(12, 18);
    let ch = channels(&params);
    assert!(matches!(
        five_fold_cv(&ch, &names(), (NY, NX), &small_cv(), 0),
        Err(RomError::Argument(_))
    ));
}
