use std::hint::black_box;

use chanmatch::rng::stream;
use chanmatch::ssfm::{propagate_span, tx_waveform, FiberSystemParams, StepControl};
use chanmatch::Constellation;
use criterion::{criterion_group, criterion_main, Criterion};
use rand::Rng;

fn bench(c: &mut Criterion) {
    let constellation = Constellation::default();
    let mut group = c.benchmark_group("span");
    for channels in [1, 3] {
        let params = FiberSystemParams {
            n_channels: channels,
            n_symbols: 256,
            ..FiberSystemParams::desk_scale()
        };
        let symbols: Vec<Vec<_>> = (0..channels)
            .map(|ch| {
                let mut rng = stream(7, ch as u64);
                (0..params.n_symbols).map(|_| constellation.point(rng.random_range(0..16))).collect()
            })
            .collect();
        let w = tx_waveform(&symbols, &params, 2.0893e-4).unwrap();
        group.bench_function(format!("{channels}ch"), |b| {
            b.iter(|| propagate_span(black_box(&w), &params, &StepControl::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench
}
criterion_main!(benches);
