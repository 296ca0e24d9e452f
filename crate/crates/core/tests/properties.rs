use nalgebra::DMatrix;
use proptest::prelude::*;
use romforge::gpr::{GprConfig, GprModel, KernelFamily};
use romforge::io::SnapshotSet;
use romforge::linalg::{relative_information_content, PodBasis, SnapshotMatrix};
use romforge::rom::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn params(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|j| vec![j as f64]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn information_content_is_monotone_and_complete(sigma in prop::collection::vec(1e-6f64..100.0, 1..12)) {
        let mut s = sigma.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        let mut prev = 0.0;
        for k in 1..=s.len() {
            let e = relative_information_content(&s, k).unwrap();
            prop_assert!(e >= prev && e <= 1.0);
            prev = e;
        }
        prop_assert_eq!(relative_information_content(&s, s.len()).unwrap(), 1.0);
    }

    #[test]
    fn pod_projection_error_nonincreasing_in_k(m in matrix(15, 6), x in prop::collection::vec(-5.0f64..5.0, 15)) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let s = SnapshotMatrix::new(m, params(6)).unwrap();
        let Ok(basis) = PodBasis::from_snapshots(&s, 6) else { return Ok(()) };
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let e = projection_error(&x, &basis.truncated(k).unwrap().project(&x).unwrap()).unwrap();
            prop_assert!(e >= 0.0);
            prop_assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn minmax_round_trip(m in matrix(9, 5), feature in any::<bool>()) {
        let mode = if feature { ScalingMode::PerFeature } else { ScalingMode::ChannelGlobal };
        let (scaled, info) = minmax_fit_transform(&m, mode).unwrap();
        prop_assert!(scaled.iter().all(|v| (0.0..=1.0).contains(v)));
        for j in 0..m.ncols() {
            let col: Vec<f64> = scaled.column(j).iter().copied().collect();
            let back = minmax_inverse(&info, &col).unwrap();
            for (a, b) in back.iter().zip(m.column(j).iter()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn reshape_round_trip_is_bitwise(ny in 1usize..9, nx in 1usize..9, c in 1usize..4, seed in any::<u64>()) {
        let chans: Vec<Vec<f64>> = (0..c)
            .map(|ch| (0..ny * nx).map(|i| f64::from_bits(seed.wrapping_mul(i as u64 + 1) ^ ch as u64) % 1e6).collect())
            .collect();
        let refs: Vec<&[f64]> = chans.iter().map(|v| v.as_slice()).collect();
        let t = reshape_to_grid(&refs, ny, nx).unwrap();
        let back = inverse_reshape(&t, 0).unwrap();
        for (a, b) in back.iter().flatten().zip(chans.iter().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn folds_are_disjoint_and_covering(groups in 1usize..12, seed in any::<u64>()) {
        let n = groups * N_FOLDS;
        let p: Vec<Vec<f64>> = (0..n).map(|i| vec![((i * 37) % 11) as f64, i as f64 * 0.5]).collect();
        let splits = fold_splits(&p, seed).unwrap();
        let mut holdout = vec![0; n];
        for s in &splits {
            let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(s.test.len(), groups - groups / 2);
            for &i in s.validation.iter().chain(&s.test) {
                holdout[i] += 1;
            }
        }
        prop_assert!(holdout.iter().all(|&h| h == 1));
    }

    #[test]
    fn rom_error_is_nonnegative_and_zero_at_identity(x in prop::collection::vec(-3.0f64..3.0, 1..20), shift in -1.0f64..1.0) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
        let y: Vec<f64> = x.iter().map(|v| v + shift).collect();
        prop_assert!(rom_error(&x, &y).unwrap() >= 0.0);
        prop_assert_eq!(rom_error(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn snapshot_file_bytes_are_stable(n in 1usize..6, big_n in 1usize..10, seed in any::<u64>()) {
        let design: Vec<Vec<f64>> = (0..n).map(|j| vec![(seed % 97) as f64 + j as f64, -(j as f64)]).collect();
        let u = DMatrix::from_fn(big_n, n, |i, j| (seed.wrapping_add((i * n + j) as u64) % 1000) as f64 / 7.0);
        let set = SnapshotSet::new(design, vec![u.clone(), -u], 0, 0).unwrap();
        let bytes = set.to_bytes().unwrap();
        let back = SnapshotSet::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gpr_interpolates_training_points(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..12),
        rbf in any::<bool>(),
    ) {
        let inputs: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
        // Skip near-duplicate inputs, where interpolation is ill-posed.
        for i in 0..inputs.len() {
            for j in 0..i {
                let d = (inputs[i][0] - inputs[j][0]).hypot(inputs[i][1] - inputs[j][1]);
                prop_assume!(d > 0.05);
            }
        }
        let y: Vec<f64> = inputs.iter().map(|z| (3.0 * z[0]).sin() + z[1] * z[1]).collect();
        let config = GprConfig {
            family: if rbf { KernelFamily::Rbf } else { KernelFamily::Matern },
            restarts: 3,
            ..GprConfig::default()
        };
        let m = GprModel::fit(&inputs, &y, &config, 1).unwrap();
        for (z, t) in inputs.iter().zip(&y) {
            let p = m.predict_mean(z).unwrap();
            prop_assert!((p - t).abs() <= 1e-6 * t.abs().max(1.0), "{} vs {}", p, t);
        }
    }
}
