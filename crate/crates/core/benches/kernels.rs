use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use protomn::base::catalog;
use protomn::channel::ChannelParams;
use protomn::decoder::{epc_frame, BpDecoder, DecoderConfig};
use protomn::exec::{map_range, Exec};
use protomn::lift::lift_circulant_peg;
use protomn::matcher::DmConfig;
use protomn::rng::stream_rng;
use protomn::spectrum::{growth_row, grid_axis, GrowthOptions};

fn frames(c: &mut Criterion) {
    let code = lift_circulant_peg(&catalog::rate_half(), 300, 1).unwrap();
    let cfg = DmConfig::from_omega(code.h(), 0.5).unwrap();
    let params = ChannelParams::from_db(-1.5);
    let mut group = c.benchmark_group("bp_frames_64");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| {
                map_range(exec, 0..8, |chunk| {
                    let mut dec = BpDecoder::new(&code, DecoderConfig::default());
                    let mut rng = stream_rng(9, chunk as u64);
                    (0..8)
                        .filter(|_| epc_frame(&cfg, &mut dec, &params, &mut rng).unwrap().status.is_error())
                        .count()
                })
            })
        });
    }
    group.finish();
}

fn growth_grid(c: &mut Criterion) {
    let proto = catalog::rate_two_thirds_b().protograph();
    let axis = grid_axis(0.01, 1e-3);
    let opts = GrowthOptions::default();
    let mut group = c.benchmark_group("growth_grid_10x10");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| map_range(exec, 0..axis.len(), |i| growth_row(&proto, axis[i], &axis, &opts).len()))
        });
    }
    group.finish();
}

criterion_group!(benches, frames, growth_grid);
criterion_main!(benches);
