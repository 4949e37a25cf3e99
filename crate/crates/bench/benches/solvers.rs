use criterion::{black_box, criterion_group, criterion_main, Criterion};
use dipolar::{
    bell_state, char_roots, integrate_pseudomode, integrate_volterra, residue_coefficients,
    BellSign, IntegratorConfig, Model, SystemParams,
};

fn reference_model(k: f64) -> Model {
    Model::new(SystemParams::dimensionless(10.0, k, 3f64.sqrt() / 2.0)).unwrap()
}

fn roots(c: &mut Criterion) {
    let m = reference_model(7.0);
    c.bench_function("char_roots", |b| b.iter(|| char_roots(black_box(&m))));
}

fn closed_form(c: &mut Criterion) {
    let m = reference_model(7.0);
    let init = bell_state(BellSign::Minus);
    c.bench_function("closed_form_1000_samples", |b| {
        b.iter(|| {
            let sol = residue_coefficients(&m, &init).unwrap();
            (0..1000)
                .map(|i| sol.evolve(i as f64 * 0.01).0)
                .sum::<dipolar::Complex64>()
        })
    });
}

fn pseudomode(c: &mut Criterion) {
    let init = bell_state(BellSign::Plus);
    let mut group = c.benchmark_group("pseudomode_t10");
    for k in [0.0, 7.0, 20.0] {
        let m = reference_model(k);
        group.bench_function(format!("K={k}"), |b| {
            b.iter(|| integrate_pseudomode(&m, &init, 10.0, &IntegratorConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn volterra(c: &mut Criterion) {
    let m = reference_model(7.0);
    let init = bell_state(BellSign::Minus);
    let mut group = c.benchmark_group("volterra_t10");
    group.sample_size(10);
    for n in [2000, 20000] {
        group.bench_function(format!("n={n}"), |b| {
            b.iter(|| integrate_volterra(&m, &init, 10.0, n))
        });
    }
    group.finish();
}

criterion_group!(benches, roots, closed_form, pseudomode, volterra);
criterion_main!(benches);
