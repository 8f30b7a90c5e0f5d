use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::sim::RecordMeta;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn random_net(input: usize, hidden: &[usize], output: usize, seed: u64) -> LstmNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = LstmNetwork::init(input, hidden, output, &mut rng);
    // Nonzero biases everywhere so every term is exercised.
    for p in net.params_mut() {
        for v in p.iter_mut() {
            *v += rng.random_range(-0.3..0.3);
        }
    }
    net
}

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()
}

/// Time-major evaluator written independently of the layer-major forward pass.
fn reference_forward(net: &LstmNetwork, input: &[f64]) -> Vec<f64> {
    let ni = net.input_width();
    let steps = input.len() / ni;
    let mut h: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.hidden]).collect();
    let mut c = h.clone();
    let mut out = Vec::new();
    for t in 0..steps {
        let mut x: Vec<f64> = input[t * ni..(t + 1) * ni].to_vec();
        for (k, l) in net.layers.iter().enumerate() {
            let gate = |g: &Gate, r: usize| -> f64 {
                let mut s = g.b[r];
                for i in 0..l.input {
                    s += g.w[r * l.input + i] * x[i];
                }
                for j in 0..l.hidden {
                    s += g.u[r * l.hidden + j] * h[k][j];
                }
                s
            };
            let mut hn = vec![0.0; l.hidden];
            let mut cn = vec![0.0; l.hidden];
            for r in 0..l.hidden {
                let f1 = sig(gate(&l.forget, r));
                let f2 = sig(gate(&l.input_gate, r));
                let f3 = gate(&l.candidate, r).tanh();
                let f4 = sig(gate(&l.output, r));
                cn[r] = f1 * c[k][r] + f2 * f3;
                hn[r] = f4 * cn[r].tanh();
            }
            h[k] = hn.clone();
            c[k] = cn;
            x = hn;
        }
        let d = &net.dense;
        for o in 0..d.output {
            let mut s = d.b[o];
            for j in 0..d.input {
                s += d.w[o * d.input + j] * x[j];
            }
            out.push(s);
        }
    }
    out
}

#[test]
fn scalar_cell_matches_hand_evaluation() {
    let mut p = LstmLayerParams::zeros(1, 1);
    for g in p.gates_mut() {
        g.w[0] = 1.0;
        g.u[0] = 1.0;
    }
    let (h, c) = cell_forward(&p, &[1.0], &[0.0], &[0.0]).unwrap();
    assert!((c[0] - 0.55677).abs() < 5e-5, "c = {}", c[0]);
    // h = σ(1)·tanh(c) = 0.731059 × 0.505574.
    assert!((h[0] - 0.36961).abs() < 5e-5, "h = {}", h[0]);
}

#[test]
fn zero_cell_is_a_fixed_point() {
    let p = LstmLayerParams::zeros(3, 4);
    let (h, c) = cell_forward(&p, &[0.3, -2.0, 7.0], &[0.0; 4], &[0.0; 4]).unwrap();
    assert!(h.iter().chain(&c).all(|v| *v == 0.0));
}

#[test]
fn saturated_gates_retain_memory() {
    let mut p = LstmLayerParams::zeros(1, 1);
    p.forget.b[0] = 40.0;
    p.input_gate.b[0] = -40.0;
    let (_, c) = cell_forward(&p, &[0.7], &[0.2], &[5.0]).unwrap();
    assert!((c[0] - 5.0).abs() < 1e-12);
}

#[test]
fn cell_rejects_bad_shapes() {
    let p = LstmLayerParams::zeros(2, 3);
    assert!(matches!(
        cell_forward(&p, &[1.0], &[0.0; 3], &[0.0; 3]),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn zero_network_outputs_zero() {
    let net = LstmNetwork::zeros(6, &[5, 5, 5], 3);
    let y = network_forward(&net, &noise(6 * 20, 1)).unwrap();
    assert_eq!(y.len(), 60);
    assert!(y.iter().all(|v| *v == 0.0));
}

#[test]
fn forward_rejects_width_mismatch() {
    let net = LstmNetwork::zeros(6, &[4], 3);
    assert!(matches!(network_forward(&net, &[0.0; 7]), Err(Error::Dimension(_))));
}

#[test]
fn forward_matches_reference_evaluator() {
    let net = random_net(6, &[7, 5, 6], 3, 11);
    let x = noise(6 * 40, 12);
    let a = network_forward(&net, &x).unwrap();
    let b = reference_forward(&net, &x);
    let err = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "max deviation {err}");
}

#[test]
fn length_one_sequence_is_cell_chain_plus_dense() {
    let net = random_net(6, &[4, 3], 2, 5);
    let x = noise(6, 6);
    let (h1, _) = cell_forward(&net.layers[0], &x, &[0.0; 4], &[0.0; 4]).unwrap();
    let (h2, _) = cell_forward(&net.layers[1], &h1, &[0.0; 3], &[0.0; 3]).unwrap();
    let y = network_forward(&net, &x).unwrap();
    for o in 0..2 {
        let want = net.dense.b[o] + (0..3).map(|j| net.dense.w[o * 3 + j] * h2[j]).sum::<f64>();
        assert!((y[o] - want).abs() < 1e-14);
    }
}

#[test]
fn hidden_state_is_bounded_for_extreme_inputs() {
    let net = random_net(2, &[6], 1, 3);
    let mut states = net.zero_states();
    let x: Vec<f64> = (0..200).map(|i| if i % 3 == 0 { 1e6 } else { -1e8 }).collect();
    net.forward_from(&x, &mut states).unwrap();
    assert!(states[0].h.iter().all(|v| v.is_finite() && v.abs() <= 1.0));
    assert!(states[0].c.iter().all(|v| v.is_finite()));
}

#[test]
fn mse_examples() {
    assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(mse(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
    let a = noise(10, 1);
    let b = noise(10, 2);
    let a2: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
    let b2: Vec<f64> = b.iter().map(|v| 2.0 * v).collect();
    let r = mse(&a2, &b2).unwrap() / mse(&a, &b).unwrap();
    assert!((r - 4.0).abs() < 1e-12);
    assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn zero_network_has_zero_gradient_for_zero_target() {
    let net = LstmNetwork::zeros(3, &[4, 4], 2);
    let (loss, g) = bptt_gradients(&net, &noise(30, 4), &[0.0; 20]).unwrap();
    assert_eq!(loss, 0.0);
    assert_eq!(g.norm(), 0.0);
}

pub(super) fn max_fd_error(net: &LstmNetwork, x: &[f64], y: &[f64]) -> f64 {
    let (_, g) = bptt_gradients(net, x, y).unwrap();
    let eps = 1e-6;
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    let counts: Vec<usize> = net.params().iter().map(|p| p.len()).collect();
    let analytic: Vec<Vec<f64>> = g.params().iter().map(|p| p.to_vec()).collect();
    for (a, n) in counts.iter().enumerate() {
        for i in 0..*n {
            let orig = probe.params()[a][i];
            probe.params_mut()[a][i] = orig + eps;
            let lp = mse(&network_forward(&probe, x).unwrap(), y).unwrap();
            probe.params_mut()[a][i] = orig - eps;
            let lm = mse(&network_forward(&probe, x).unwrap(), y).unwrap();
            probe.params_mut()[a][i] = orig;
            let fd = (lp - lm) / (2.0 * eps);
            let an = analytic[a][i];
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn gradients_match_central_differences() {
    let net = random_net(3, &[4, 4, 4], 2, 21);
    let x = noise(3 * 10, 22);
    let y = noise(2 * 10, 23);
    let err = max_fd_error(&net, &x, &y);
    assert!(err < 1e-4, "max relative error {err}");
}

#[test]
fn dense_bias_gradient_is_mean_residual() {
    let net = random_net(2, &[3], 2, 8);
    let x = noise(2 * 15, 9);
    let y = noise(2 * 15, 10);
    let out = network_forward(&net, &x).unwrap();
    let (_, g) = bptt_gradients(&net, &x, &y).unwrap();
    for o in 0..2 {
        let want: f64 = (0..15).map(|t| 2.0 * (out[t * 2 + o] - y[t * 2 + o])).sum::<f64>() / 30.0;
        assert!((g.dense.b[o] - want).abs() < 1e-14);
    }
}

fn synthetic(n: usize, len: usize, seed: u64) -> Vec<Sequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let input: Vec<f64> = (0..len * 6).map(|_| rng.random_range(-1.7..1.7)).collect();
            let target = input
                .chunks_exact(6)
                .flat_map(|r| [0.5 * r[0], 0.5 * r[1], 0.5 * r[2]])
                .collect();
            Sequence { input, target }
        })
        .collect()
}

fn synthetic_config() -> TrainConfig {
    TrainConfig {
        epochs: 50,
        seq_len: 120,
        resolution_factor: 4,
        learning_rate: 1e-2,
        lr_decay: 0.95,
        batch_size: 2,
        seed: 3,
        hidden_size: 8,
        layers: 3,
        ..TrainConfig::default()
    }
}

fn synthetic_run() -> (LstmNetwork, TrainReport, Dataset) {
    let cfg = synthetic_config();
    let data = Dataset {
        train: synthetic(16, cfg.seq_len, 1),
        validation: synthetic(4, cfg.seq_len, 2),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = LstmNetwork::init(6, &cfg.hidden_sizes(), 3, &mut rng);
    let report = train(&mut net, &data, &cfg).unwrap();
    (net, report, data)
}

#[test]
fn synthetic_half_gain_task_trains() {
    let (net, report, _) = synthetic_run();
    assert_eq!(report.history.len(), 50);
    assert!(
        report.final_validation() < 0.1 * report.initial_validation,
        "validation {} vs initial {}",
        report.final_validation(),
        report.initial_validation
    );
    let train: Vec<f64> = report.history.iter().map(|e| e.train).collect();
    let smooth = moving_average(&train, 10);
    for w in smooth[10..].windows(2) {
        assert!(w[1] <= w[0], "smoothed training loss rose: {w:?}");
    }

    // The corrected record reproduces half the lofi motions.
    let n = 300;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut rec = MotionRecord::with_capacity(n, RecordMeta::default());
    for i in 0..n {
        rec.t.push(i as f64 * 0.1);
        for ch in [
            &mut rec.heave,
            &mut rec.roll,
            &mut rec.pitch,
            &mut rec.zeta,
            &mut rec.dzdx,
            &mut rec.dzdy,
        ] {
            ch.push(rng.random_range(-1.7..1.7));
        }
    }
    let ident = Standardizer {
        input_mean: vec![0.0; 6],
        input_std: vec![1.0; 6],
        target_mean: vec![0.0; 3],
        target_std: vec![1.0; 3],
    };
    let out = correct(&net, &ident, &rec).unwrap();
    for dof in 0..3 {
        let want: Vec<f64> = rec.motion(dof).iter().map(|v| 0.5 * v).collect();
        let err = mse(out.motion(dof), &want).unwrap().sqrt();
        let rms = (want.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        assert!(err < 0.05 * rms, "dof {dof}: rms error {err} vs {rms}");
    }
}

#[test]
fn zero_learning_rate_leaves_parameters() {
    let cfg = TrainConfig {
        learning_rate: 0.0,
        epochs: 3,
        ..synthetic_config()
    };
    let data = Dataset {
        train: synthetic(2, cfg.seq_len, 1),
        validation: synthetic(1, cfg.seq_len, 2),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut net = LstmNetwork::init(6, &[5], 3, &mut rng);
    let before = net.clone();
    let report = train(&mut net, &data, &cfg).unwrap();
    assert_eq!(net, before);
    for e in &report.history {
        assert_eq!(e.validation, report.initial_validation);
        assert_eq!(e.train, report.history[0].train);
    }
}

#[test]
fn training_is_deterministic() {
    let cfg = TrainConfig {
        epochs: 3,
        shuffle: false,
        ..synthetic_config()
    };
    let data = Dataset {
        train: synthetic(4, cfg.seq_len, 1),
        validation: synthetic(2, cfg.seq_len, 2),
    };
    let run = |cfg: &TrainConfig| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut net = LstmNetwork::init(6, &[6, 6], 3, &mut rng);
        let r = train(&mut net, &data, cfg).unwrap();
        (net, r)
    };
    let (a, ra) = run(&cfg);
    let (b, rb) = run(&cfg);
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    let shuffled = TrainConfig { shuffle: true, ..cfg.clone() };
    let (c, rc) = run(&shuffled);
    let (d, rd) = run(&shuffled);
    assert_eq!(c, d);
    assert_eq!(rc, rd);
}

#[test]
fn divergence_aborts_with_history() {
    let cfg = TrainConfig {
        epochs: 2,
        learning_rate: 0.0,
        ..synthetic_config()
    };
    let mut data = Dataset {
        train: synthetic(2, cfg.seq_len, 1),
        validation: synthetic(1, cfg.seq_len, 2),
    };
    data.train[0].target.iter_mut().for_each(|v| *v *= 1e4);
    let mut net = LstmNetwork::zeros(6, &[3], 3);
    net.dense.b = vec![0.0; 3];
    match train(&mut net, &data, &cfg) {
        Err(Error::Diverged { epoch, history, .. }) => {
            assert_eq!(epoch, 1);
            assert!(history.is_empty());
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn config_rejects_indivisible_length() {
    let cfg = TrainConfig {
        seq_len: 100,
        resolution_factor: 3,
        ..TrainConfig::default()
    };
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    assert!(TrainConfig::default().validate().is_ok());
}

#[test]
fn standardizer_round_trip_and_moments() {
    let a = noise(6 * 50, 1);
    let b: Vec<f64> = noise(6 * 70, 2).iter().map(|v| 3.0 * v + 1.0).collect();
    let ta = noise(3 * 50, 3);
    let tb = noise(3 * 70, 4);
    let st = Standardizer::fit(&[&a, &b], &[&ta, &tb], 6, 3).unwrap();
    for seqs in [[&a, &b]] {
        let z: Vec<f64> = seqs
            .iter()
            .flat_map(|s| st.apply_input(s).unwrap())
            .collect();
        for c in 0..6 {
            let col: Vec<f64> = z.iter().skip(c).step_by(6).copied().collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let s = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / col.len() as f64).sqrt();
            assert!(m.abs() < 1e-9 && (s - 1.0).abs() < 1e-9, "channel {c}: {m} {s}");
        }
    }
    let back = st.invert_input(&st.apply_input(&b).unwrap()).unwrap();
    assert!(back.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
    let back = st.invert_target(&st.apply_target(&tb).unwrap()).unwrap();
    assert!(back.iter().zip(&tb).all(|(p, q)| (p - q).abs() < 1e-12));
}

#[test]
fn standardizer_rejects_constant_channel() {
    let mut a = noise(6 * 20, 1);
    for row in a.chunks_exact_mut(6) {
        row[4] = 2.5;
    }
    let t = noise(3 * 20, 2);
    assert!(matches!(
        Standardizer::fit(&[&a], &[&t], 6, 3),
        Err(Error::Standardization(_))
    ));
}

#[test]
fn standardizer_uses_training_statistics_only() {
    let train_in = noise(6 * 100, 1);
    let val_in: Vec<f64> = noise(6 * 100, 2).iter().map(|v| v + 0.8).collect();
    let t = noise(3 * 100, 3);
    let st = Standardizer::fit(&[&train_in], &[&t], 6, 3).unwrap();
    let z = st.apply_input(&val_in).unwrap();
    let m0 = z.iter().step_by(6).sum::<f64>() / 100.0;
    assert!(m0.abs() > 0.1, "validation mean {m0}");
}

fn record(n: usize, seed: u64) -> MotionRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = RecordMeta {
        fidelity: Fidelity::Lofi,
        seed: Some(crate::rng::StreamKey::new(9, 4, 1)),
        ..RecordMeta::default()
    };
    let mut rec = MotionRecord::with_capacity(n, meta);
    for i in 0..n {
        rec.t.push(i as f64 * 0.1);
        rec.heave.push(rng.random_range(-1.0..1.0));
        rec.roll.push(rng.random_range(-5.0..5.0));
        rec.pitch.push(rng.random_range(-2.0..2.0));
        rec.zeta.push(rng.random_range(-1.0..1.0));
        rec.dzdx.push(rng.random_range(-0.1..0.1));
        rec.dzdy.push(rng.random_range(-0.1..0.1));
    }
    rec
}

#[test]
fn zero_network_corrects_to_target_means() {
    let rec = record(50, 1);
    let st = Standardizer {
        input_mean: vec![0.1; 6],
        input_std: vec![2.0; 6],
        target_mean: vec![0.3, -1.0, 2.0],
        target_std: vec![1.5; 3],
    };
    let out = correct(&LstmNetwork::zeros(6, &[4, 4, 4], 3), &st, &rec).unwrap();
    assert!(out.heave.iter().all(|v| *v == 0.3));
    assert!(out.roll.iter().all(|v| *v == -1.0));
    assert!(out.pitch.iter().all(|v| *v == 2.0));
    assert_eq!(out.zeta, rec.zeta);
    assert_eq!(out.t, rec.t);
    assert_eq!(out.meta.fidelity, Fidelity::LstmCorrected);
    assert_eq!(out.meta.fidelity.tag(), "lstm-corrected");
    assert_eq!(out.meta.seed, rec.meta.seed);
}

#[test]
fn correct_rejects_channel_mismatch() {
    let st = Standardizer {
        input_mean: vec![0.0; 6],
        input_std: vec![1.0; 6],
        target_mean: vec![0.0; 3],
        target_std: vec![1.0; 3],
    };
    let net = LstmNetwork::zeros(5, &[4], 3);
    assert!(matches!(correct(&net, &st, &record(10, 1)), Err(Error::Dimension(_))));
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let net = random_net(6, &[5, 5, 5], 3, 4);
    let a = noise(6 * 30, 1);
    let t = noise(3 * 30, 2);
    let st = Standardizer::fit(&[&a], &[&t], 6, 3).unwrap();
    let mut ck = Checkpoint::new(net, st, TrainConfig::default());
    ck.heading_deg = Some(30);
    let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
    assert_eq!(back, ck);

    let mut bad = ck.clone();
    bad.version = 99;
    assert!(matches!(
        Checkpoint::from_json(&bad.to_json().unwrap()),
        Err(Error::Format(_))
    ));
    let mut bad = ck;
    bad.network.layers[1].forget.w.pop();
    assert!(Checkpoint::from_json(&bad.to_json().unwrap()).is_err());
}
