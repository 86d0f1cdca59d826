use criterion::{black_box, criterion_group, criterion_main, Criterion};

use muoam::estimation::spectrum::spectrum_2d;
use muoam::estimation::{estimate_positions, make_pilots, synth_uplink_training, PilotKind};
use muoam::rng::stream;
use muoam::scenario::ReferenceScenario;
use muoam::{assemble_channel, build_mode_transform, build_precoder, effective_oam_channel, ChannelMode};

fn pipeline(c: &mut Criterion) {
    let cfg = ReferenceScenario::default().build().unwrap();
    let truth = cfg.placements();
    let m = cfg.rx_elements();
    let users = cfg.user_count();

    c.bench_function("channel_assembly_exact", |b| {
        b.iter(|| assemble_channel(black_box(&cfg), &truth, ChannelMode::Exact).unwrap())
    });

    let h = assemble_channel(&cfg, &truth, ChannelMode::Farfield).unwrap();
    let t = build_mode_transform(&cfg.modes.data_modes, m, users, 1).unwrap();
    c.bench_function("effective_oam_channel", |b| b.iter(|| effective_oam_channel(black_box(&h), &t).unwrap()));

    let eff = effective_oam_channel(&h, &t).unwrap();
    c.bench_function("precoder_128_subcarriers", |b| b.iter(|| build_precoder(black_box(&eff)).unwrap()));

    let mut rng = stream(1, 0, 0);
    let pilots = make_pilots(PilotKind::Unit, cfg.modes.training_modes.len(), cfg.carriers.training_count, &mut rng);
    let obs = synth_uplink_training(&cfg, &truth, &pilots, Some(20.0), ChannelMode::Farfield, 0, &mut rng).unwrap();
    c.bench_function("fft_2d_pad16", |b| b.iter(|| spectrum_2d(black_box(&obs.combined), 16, 16)));

    let mut group = c.benchmark_group("estimation");
    group.sample_size(10);
    group.bench_function("three_users_20db", |b| b.iter(|| estimate_positions(black_box(&cfg), &obs).unwrap()));
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
