mod common;

use common::*;
use furnace_core::ad::{Graph, Tensor};
use furnace_core::dataio::{generate_plant, read_csv, write_csv, PlantConfig, SensorFrame};
use furnace_core::featsel::{fit_gb, GbConfig};
use furnace_core::models::{Checkpoint, Model, ModelKind};
use furnace_core::pci_opt::{composite_loss, optimize, write_policy, OptimConfig, OptimProblem};
use furnace_core::preprocess::{
    discretize, iqr_correct, make_samples, DiscretizedSeries, IqrBounds, MinMaxScaler, INPUT_STEPS,
};
use furnace_core::qsim::QuantumState;
use furnace_core::trainer::{mae, rmse};
use proptest::prelude::*;

fn vec_in(lo: f64, hi: f64, n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn backward_is_bitwise_deterministic(a in vec_in(-2.0, 2.0, 6..7), b in vec_in(-2.0, 2.0, 6..7)) {
        let run = || {
            let mut g = Graph::new();
            let x = g.param(Tensor::new(vec![2, 3], a.clone()).unwrap());
            let w = g.param(Tensor::new(vec![3, 2], b.clone()).unwrap());
            let y = g.matmul(x, w).unwrap();
            let y = g.tanh(y).unwrap();
            let s = g.sigmoid(y).unwrap();
            let l = g.sum(s).unwrap();
            let gr = g.backward(l).unwrap();
            (gr.get(x).unwrap().clone(), gr.get(w).unwrap().clone())
        };
        let (p, q) = (run(), run());
        prop_assert!(p.0.data().iter().zip(q.0.data()).all(|(u, v)| u.to_bits() == v.to_bits()));
        prop_assert!(p.1.data().iter().zip(q.1.data()).all(|(u, v)| u.to_bits() == v.to_bits()));
    }

    #[test]
    fn activations_finite_on_wide_range(x in vec_in(-50.0, 50.0, 1..20)) {
        let mut g = Graph::new();
        let v = g.param(Tensor::row_vector(x.clone()));
        let s = g.sigmoid(v).unwrap();
        let t = g.tanh(v).unwrap();
        let r = g.relu(v).unwrap();
        let st = g.add(s, t).unwrap();
        let all = g.add(st, r).unwrap();
        let l = g.sum(all).unwrap();
        let gr = g.backward(l).unwrap();
        prop_assert!(g.value(l).all_finite());
        prop_assert!(gr.get(v).unwrap().all_finite());
    }

    #[test]
    fn norm_preserved_by_gate_sequences(ops in prop::collection::vec((0u8..3, 0usize..6, 0usize..5, -10.0f64..10.0), 1..400)) {
        let mut s = QuantumState::zero(6);
        for (kind, q, d, th) in ops {
            match kind {
                0 => s.apply_rx(q, th).unwrap(),
                1 => s.apply_ry(q, th).unwrap(),
                _ => s.apply_cnot(q, (q + 1 + d) % 6).unwrap(),
            }
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gates_undo(q in 0usize..4, t in 0usize..3, th in -7.0f64..7.0, prep in vec_in(-3.0, 3.0, 4..5)) {
        let mut s = QuantumState::zero(4);
        for (k, a) in prep.iter().enumerate() {
            s.apply_ry(k, *a).unwrap();
            s.apply_rx(k, a * 0.7).unwrap();
        }
        let before = s.clone();
        s.apply_rx(q, th).unwrap();
        s.apply_ry(q, th).unwrap();
        let tgt = (q + 1 + t) % 4;
        s.apply_cnot(q, tgt).unwrap();
        s.apply_cnot(q, tgt).unwrap();
        s.apply_ry(q, -th).unwrap();
        s.apply_rx(q, -th).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn iqr_correct_idempotent_and_monotone(x in vec_in(-100.0, 100.0, 1..60), q1 in -20.0f64..0.0, w in 0.0f64..20.0, k in 0.5f64..6.0) {
        let b = IqrBounds::from_quartiles(q1, q1 + w, k).unwrap();
        let once = iqr_correct(&x, &b);
        prop_assert_eq!(iqr_correct(&once, &b), once.clone());
        for i in 0..x.len() {
            for j in 0..x.len() {
                if x[i] <= x[j] {
                    prop_assert!(once[i] <= once[j]);
                }
            }
            prop_assert!(once[i] >= b.lower() && once[i] <= b.upper());
        }
    }

    #[test]
    fn discretize_commutes_with_affine_maps(x in vec_in(-10.0, 10.0, 1..80), l in 1usize..9, a in -3.0f64..3.0, c in -5.0f64..5.0) {
        prop_assume!(x.len() >= l);
        let d = discretize(&x, l).unwrap();
        let y: Vec<f64> = x.iter().map(|v| a * v + c).collect();
        let dy = discretize(&y, l).unwrap();
        prop_assert_eq!(d.len(), x.len() / l);
        for (u, v) in d.iter().zip(&dy) {
            prop_assert!((a * u + c - v).abs() < 1e-12);
        }
    }

    #[test]
    fn scaler_roundtrip(cols in prop::collection::vec(vec_in(-50.0, 50.0, 2..20), 1..4), probe in -80.0f64..80.0) {
        let names: Vec<String> = (0..cols.len()).map(|i| format!("c{i}")).collect();
        let s = MinMaxScaler::fit(&names, &cols).unwrap();
        for i in 0..cols.len() {
            if s.range(i) > 1e-9 {
                let y = s.transform_value(i, probe).unwrap();
                prop_assert!((s.inverse_value(i, y).unwrap() - probe).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rmse_at_least_mae(y in vec_in(-10.0, 10.0, 1..50), shift in vec_in(-3.0, 3.0, 50..51)) {
        let p: Vec<f64> = y.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let r = rmse(&y, &p).unwrap();
        let m = mae(&y, &p).unwrap();
        prop_assert!(r + 1e-12 >= m);
    }

    #[test]
    fn metrics_scale_with_range(y in vec_in(0.0, 1.0, 1..40), e in vec_in(-0.2, 0.2, 40..41), lo in 1400.0f64..1500.0, range in 10.0f64..200.0) {
        let p: Vec<f64> = y.iter().zip(&e).map(|(a, b)| a + b).collect();
        let dy: Vec<f64> = y.iter().map(|v| lo + range * v).collect();
        let dp: Vec<f64> = p.iter().map(|v| lo + range * v).collect();
        prop_assert!((rmse(&dy, &dp).unwrap() - range * rmse(&y, &p).unwrap()).abs() < 1e-9);
        prop_assert!((mae(&dy, &dp).unwrap() - range * mae(&y, &p).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn composite_loss_zero_iff_on_target_and_in_box(t in vec_in(-1.0, 1.0, 5..6), p in vec_in(-0.5, 1.5, 5..6), target in -1.0f64..1.0) {
        let l = composite_loss(&t, &p, target, 1.0);
        prop_assert!(l >= 0.0);
        prop_assert_eq!(composite_loss(&[target; 5], &[0.0, 0.25, 0.5, 0.75, 1.0], target, 1.0), 0.0);
        let on_target = t.iter().all(|v| *v == target);
        let in_box = p.iter().all(|v| (0.0..=1.0).contains(v));
        prop_assert_eq!(l == 0.0, on_target && in_box);
    }

    #[test]
    fn policy_write_touches_only_future_pci(cells in vec_in(0.0, 1.0, 87..88), pol in vec_in(-1.0, 2.0, 5..6), pci in 0usize..3) {
        let stacked = Tensor::new(vec![29, 3], cells).unwrap();
        let w = write_policy(&stacked, &pol, pci).unwrap();
        for r in 0..29 {
            for c in 0..3 {
                if r >= 24 && c == pci {
                    prop_assert_eq!(w.get(r, c), pol[r - 24]);
                } else {
                    prop_assert_eq!(w.get(r, c), stacked.get(r, c));
                }
            }
        }
    }

    #[test]
    fn samples_never_overlap_targets(n in 29usize..80, gap in 0usize..80) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i * 2) as f64]).collect();
        let mut ts: Vec<i64> = (0..n as i64).map(|i| i * 10).collect();
        if gap < n {
            for t in ts.iter_mut().skip(gap) {
                *t += 1000;
            }
        }
        let s = DiscretizedSeries { l_window: 10, names: vec!["a".into(), "temperature".into()], timestamps: ts, rows };
        // Too short once split at the gap: nothing to check.
        let Ok(set) = make_samples(&s, 1) else { return Ok(()) };
        for i in 0..set.len() {
            let inp = set.input(i);
            let last_in = inp[(INPUT_STEPS - 1) * 2];
            let first_target = set.target_t(i)[0] / 2.0;
            prop_assert!(first_target > last_in);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn boosting_mse_never_increases(seed in 0u64..1000) {
        let mut r = rng(seed);
        let x = vec![
            (0..120).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect::<Vec<f64>>(),
            (0..120).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect::<Vec<f64>>(),
        ];
        let y: Vec<f64> = (0..120).map(|i| (3.0 * x[0][i]).sin() + x[1][i] * x[1][i]).collect();
        let m = fit_gb(&x, &y, &GbConfig { rounds: 30, ..GbConfig::default() }).unwrap();
        for w in m.train_mse.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn importance_invariant_to_affine_rescaling(seed in 0u64..1000, a in prop::collection::vec(0.1f64..10.0, 3), b in prop::collection::vec(-50.0f64..50.0, 3)) {
        let mut r = rng(seed);
        let x: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..100).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = (0..100).map(|i| 2.0 * x[0][i] - x[2][i] * x[1][i]).collect();
        let xs: Vec<Vec<f64>> = x.iter().enumerate().map(|(j, c)| c.iter().map(|v| a[j] * v + b[j]).collect()).collect();
        let cfg = GbConfig { rounds: 20, ..GbConfig::default() };
        let i1 = fit_gb(&x, &y, &cfg).unwrap().raw_importance();
        let i2 = fit_gb(&xs, &y, &cfg).unwrap().raw_importance();
        for (u, v) in i1.iter().zip(&i2) {
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }

    #[test]
    fn csv_roundtrip(seed in 0u64..1000, holes in prop::collection::vec((0usize..20, 0usize..6), 0..10)) {
        let mut r = rng(seed);
        let n = 20;
        let mut frame = SensorFrame {
            timestamps: (0..n as i64).map(|i| 27_000_000 + i).collect(),
            channel_names: vec!["pci".into(), "x".into()],
            channels: (0..2).map(|_| (0..n).map(|_| rand::Rng::random_range(&mut r, -1e3..1e3)).collect()).collect(),
            tap_temps: std::array::from_fn(|_| (0..n).map(|_| rand::Rng::random_range(&mut r, 1400.0..1600.0)).collect()),
        };
        for (row, col) in holes {
            if col < 2 { frame.channels[col][row] = f64::NAN; } else { frame.tap_temps[col - 2][row] = f64::NAN; }
        }
        let back = read_csv(write_csv(&frame).unwrap().as_slice()).unwrap();
        prop_assert_eq!(&back.timestamps, &frame.timestamps);
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits() || (u.is_nan() && v.is_nan()));
        for c in 0..2 { prop_assert!(same(&back.channels[c], &frame.channels[c])); }
        for k in 0..4 { prop_assert!(same(&back.tap_temps[k], &frame.tap_temps[k])); }
    }
}

fn small_mall(seed: u64) -> Checkpoint {
    let names: Vec<String> = ["a", "pci", "temperature"].iter().map(|s| s.to_string()).collect();
    Checkpoint {
        model: Model::new(ModelKind::MAll, 3, 6, seed).unwrap(),
        scaler: MinMaxScaler::from_parts(names, vec![0.0, 20.0, 1450.0], vec![10.0, 60.0, 1570.0]).unwrap(),
        l_window: 30,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn optimizer_best_so_far_and_frozen_model(seed in 0u64..1000, j in 0usize..15, extra in 1usize..15) {
        let ck = small_mall(seed);
        let before = ck.model.params.clone();
        let mut r = rng(seed);
        let hist = Tensor::new(vec![24, 3], (0..72).map(|_| rand::Rng::random_range(&mut r, 0.0..1.0)).collect()).unwrap();
        let p = OptimProblem::new(&ck, hist, ck.scaler.fingerprint(), 1510.0, 1.0).unwrap();
        let run = |iters| {
            let cfg = OptimConfig { iterations: iters, seed, ..OptimConfig::default() };
            let mut m = cfg.fresh_moptim(3);
            optimize(&p, &mut m, &cfg).unwrap()
        };
        let short = run(j);
        let long = run(j + extra);
        prop_assert!(long.loss <= short.loss);
        prop_assert_eq!(&short.trace[..], &long.trace[..=j]);
        for (a, b) in before.iter().zip(&ck.model.params) {
            prop_assert!(a.data().iter().zip(b.data()).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }
}

/// Lag in `0..max_lag` maximizing |cross-correlation| of `u` leading `t`.
fn peak_lag(u: &[f64], t: &[f64], max_lag: usize) -> usize {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mu, mt) = (mean(u), mean(t));
    let c = |lag: usize| {
        (0..u.len() - lag).map(|i| (u[i] - mu) * (t[i + lag] - mt)).sum::<f64>().abs()
            / (u.len() - lag) as f64
    };
    (0..max_lag).max_by(|&x, &y| c(x).total_cmp(&c(y))).unwrap()
}

#[test]
fn plant_is_deterministic_and_shows_its_delay() {
    for seed in 0u64..10 {
        let mut cfg = PlantConfig::from_seed(seed);
        cfg.noise_std = 1.0;
        let a = generate_plant(&cfg, 4 * 1440).unwrap();
        let b = generate_plant(&cfg, 4 * 1440).unwrap();
        assert_eq!(a, b);
        let u = a.channel("pci").unwrap();
        let t: Vec<f64> = (0..a.len()).map(|i| a.tap_temps.iter().map(|c| c[i]).sum::<f64>() / 4.0).collect();
        let diff = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).collect::<Vec<f64>>();
        // The PCI excitation is piecewise constant, so level correlation is
        // smeared by the hold times and the heat lag; changes line up with
        // the transport delay.
        let step = peak_lag(&diff(u), &diff(&t), 400) as i64;
        let d = cfg.pci_delay_minutes as i64;
        assert!((step - d).abs() <= 5, "seed {seed}: peak lag {step}, delay {d}");
        // Nothing moves before the delay has elapsed.
        assert!(peak_lag(u, &t, 400) as i64 >= d);
    }
}
