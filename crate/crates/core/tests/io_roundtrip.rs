use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use romforge::gpr::{GprConfig, KernelFamily};
use romforge::io::*;
use romforge::linalg::SnapshotMatrix;
use romforge::rom::*;
use romforge::RomError;

fn random_set(n: usize, seed: u64) -> SnapshotSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let design: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            vec![
                rng.random_range(1.0..2.0),
                rng.random_range(1.0..2.0),
                rng.random_range(100.0..400.0),
            ]
        })
        .collect();
    let u = DMatrix::from_fn(64, n, |i, j| {
        ((i * 7 + j) as f64 * 0.13).sin() * design[j][0]
    });
    let v = DMatrix::from_fn(64, n, |i, j| {
        ((i + j * 3) as f64 * 0.29).cos() / design[j][1]
    });
    SnapshotSet::new(design, vec![u, v], 8, 8).unwrap()
}

fn surrogate_pair(set: &SnapshotSet) -> (RomSurrogate, RomSurrogate) {
    let mats = set.snapshot_matrices().unwrap();
    let gpr = GprConfig {
        restarts: 2,
        ..GprConfig::default()
    };
    let pods: Vec<PodGpr> = mats
        .iter()
        .map(|s| pod_gpr_offline(s, 3, &gpr, 1).unwrap())
        .collect();
    let prov = Provenance {
        seed: 1,
        config_digest: [7; 32],
        wall_time_s: 0.25,
        epochs: 0,
    };
    let pod = RomSurrogate::new(RomModel::PodGpr(pods), 8, 8, prov.clone()).unwrap();

    let refs: Vec<&SnapshotMatrix> = mats.iter().collect();
    let cfg = CaeTrainConfig {
        width_scale: 0.125,
        max_epochs: 5,
        patience: 5,
        scaling: ScalingMode::PerFeature,
        ..CaeTrainConfig::default()
    };
    let rbf = GprConfig {
        family: KernelFamily::Rbf,
        ..gpr
    };
    let (cae, h) = cae_gpr_offline(&refs, &refs, 8, 8, 2, &cfg, &rbf, 2).unwrap();
    let cae = RomSurrogate::new(
        RomModel::CaeGpr(cae),
        8,
        8,
        Provenance {
            epochs: h.epochs() as u64,
            ..prov
        },
    )
    .unwrap();
    (pod, cae)
}

#[test]
fn snapshot_file_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.snap");
    let set = random_set(6, 3);
    set.save(&path).unwrap();
    let back = SnapshotSet::load(&path).unwrap();
    assert_eq!(back, set);
    assert_eq!(back.to_bytes().unwrap(), std::fs::read(&path).unwrap());
}

#[test]
fn unstructured_snapshot_file_round_trips() {
    let set = SnapshotSet::new(
        vec![vec![0.5]; 3],
        vec![DMatrix::from_element(5, 3, -1.25)],
        0,
        0,
    )
    .unwrap();
    let bytes = set.to_bytes().unwrap();
    let back = SnapshotSet::from_bytes(&bytes).unwrap();
    assert!(!back.is_structured());
    assert_eq!(back.to_bytes().unwrap(), bytes);
}

#[test]
fn surrogate_files_round_trip_bitwise_with_identical_predictions() {
    let set = random_set(10, 4);
    let (pod, cae) = surrogate_pair(&set);
    let dir = tempfile::tempdir().unwrap();
    for (name, s) in [("pod", &pod), ("cae", &cae)] {
        let path = dir.path().join(format!("{name}.rom"));
        save_surrogate(&path, s).unwrap();
        let back = load_surrogate(&path).unwrap();
        assert_eq!(
            encode_surrogate(&back).unwrap(),
            std::fs::read(&path).unwrap()
        );
        assert_eq!(back.method(), s.method());
        assert_eq!(back.k(), s.k());
        assert_eq!(back.provenance(), s.provenance());
        for mu in [vec![1.2, 1.8, 250.0], vec![1.9, 1.1, 120.0]] {
            let a = s.predict(&mu).unwrap();
            let b = back.predict(&mu).unwrap();
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}

#[test]
fn corrupt_surrogate_is_a_format_error() {
    let set = random_set(10, 5);
    let (pod, cae) = surrogate_pair(&set);
    for s in [&pod, &cae] {
        let bytes = encode_surrogate(s).unwrap();
        assert!(matches!(
            decode_surrogate(&bytes[..bytes.len() - 3]),
            Err(RomError::Format(_))
        ));
        let mut long = bytes.clone();
        long.extend_from_slice(&[0, 0]);
        assert!(matches!(decode_surrogate(&long), Err(RomError::Format(_))));
        let mut kind = bytes.clone();
        kind[8] = 9;
        assert!(matches!(decode_surrogate(&kind), Err(RomError::Format(_))));
    }
    assert!(matches!(
        decode_surrogate(b"ROMSNAP1"),
        Err(RomError::Format(_))
    ));
}

#[test]
fn missing_file_reports_path() {
    let err =
        SnapshotSet::load(std::path::Path::new("/nonexistent/romforge/data.snap")).unwrap_err();
    match err {
        RomError::Io { path, .. } => assert!(path.ends_with("data.snap")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn atomic_write_replaces_contents() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.bin");
    write_atomic(&path, b"first").unwrap();
    write_atomic(&path, b"second").unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), b"second");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
