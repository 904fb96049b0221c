use criterion::{criterion_group, criterion_main, Criterion};
use furnace_bench::{regression, sequence, wave};
use furnace_core::ad::{Graph, Tensor};
use furnace_core::featsel::{fit_gb, GbConfig};
use furnace_core::models::{Model, ModelKind};
use furnace_core::qsim::QdiCircuit;
use std::hint::black_box;

fn qdi(c: &mut Criterion) {
    let circuit = QdiCircuit::default();
    let n = circuit.slots();
    let inputs = wave(n, 0.1);
    let angles = wave(n, 2.0);
    let w = wave(circuit.n_qubits, 0.5);
    c.bench_function("qdi_forward", |b| b.iter(|| circuit.forward(black_box(&inputs), &angles).unwrap()));
    c.bench_function("qdi_vjp_adjoint", |b| b.iter(|| circuit.vjp(black_box(&inputs), &angles, &w).unwrap()));
    c.bench_function("qdi_parameter_shift", |b| {
        b.iter(|| circuit.gradients(black_box(&inputs), &angles).unwrap())
    });
}

fn lstm(c: &mut Criterion) {
    let (f, h, batch) = (27, 64, 32);
    let xs = sequence(24, batch, f);
    let model = Model::new(ModelKind::MtClassical, f, h, 0).unwrap();
    let target = Tensor::zeros(&[batch, 5]);
    c.bench_function("lstm_forward_h64_b32", |b| {
        b.iter(|| {
            let mut g = Graph::new();
            let p = model.bind_frozen(&mut g);
            let x: Vec<_> = xs.iter().map(|t| g.constant(t.clone())).collect();
            model.forward(&mut g, &p, &x).unwrap()
        })
    });
    c.bench_function("lstm_forward_backward_h64_b32", |b| {
        b.iter(|| {
            let mut g = Graph::new();
            let p = model.bind(&mut g);
            let x: Vec<_> = xs.iter().map(|t| g.constant(t.clone())).collect();
            let y = model.forward(&mut g, &p, &x).unwrap();
            let t = g.constant(target.clone());
            let l = g.l2_loss(y, t).unwrap();
            g.backward(l).unwrap()
        })
    });
}

fn boosting(c: &mut Criterion) {
    let (cols, y) = regression(1000, 40);
    let cfg = GbConfig { rounds: 20, ..GbConfig::default() };
    c.bench_function("gb_fit_1000x40_20_rounds", |b| b.iter(|| fit_gb(black_box(&cols), &y, &cfg).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = qdi, lstm, boosting
}
criterion_main!(benches);
