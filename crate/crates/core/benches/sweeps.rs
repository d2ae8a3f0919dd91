use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use ringsqueeze::fock::{evolve_fock, FockBasis, FockDensity, FockOptions};
use ringsqueeze::protocols::{stability_sweep, sweep_protocols};
use ringsqueeze::{Execution, ModeLabel, OperatorExpr, Order, ProtocolKind, ProtocolSpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn stability(c: &mut Criterion) {
    let ratios: Vec<f64> = (0..400).map(|i| i as f64 / 400.0).collect();
    let mut g = c.benchmark_group("stability_sweep");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| stability_sweep(2.0, black_box(&ratios), 1.0, exec).unwrap()));
    }
    g.finish();
}

fn protocols(c: &mut Criterion) {
    let specs: Vec<ProtocolSpec> = (1..=16)
        .map(|i| ProtocolSpec::new(ProtocolKind::FourMode, 0.04 * i as f64))
        .collect();
    let mut g = c.benchmark_group("protocol_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| sweep_protocols(black_box(&specs), exec)));
    }
    g.finish();
}

fn fock(c: &mut Criterion) {
    let c0 = ModeLabel::collective(1, Order::Zero);
    let h = OperatorExpr::new()
        .mixer(Complex64::new(2.0, 0.0), ModeLabel::CavityPlus, c0)
        .pair(Complex64::new(1.0, 0.0), ModeLabel::CavityPlus, c0);
    let mut g = c.benchmark_group("fock_evolution");
    g.sample_size(10);
    for cutoff in [12, 20] {
        let basis = FockBasis::uniform(vec![ModeLabel::CavityPlus, c0], cutoff).unwrap();
        let rho = FockDensity::vacuum(basis);
        for (name, exec) in MODES {
            let opts = FockOptions { exec, truncation_threshold: 1.0, ..FockOptions::default() };
            g.bench_with_input(BenchmarkId::new(name, cutoff), &rho, |b, rho| {
                b.iter(|| evolve_fock(rho, &h, &[ModeLabel::CavityPlus], 1.0, 0.2, &opts).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, stability, protocols, fock);
criterion_main!(benches);
