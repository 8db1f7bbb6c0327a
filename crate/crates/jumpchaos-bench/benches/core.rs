use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use jumpchaos::chaos::{chaos_expansion, product_integral, GridFunction};
use jumpchaos::graphs::{check_contraction_assumption, contract_graph, parse_fixture, PowerCounting};
use jumpchaos::kernels::{build_singular_kernel, renorm_constant_c1, Cutoff, TorusKernel};
use jumpchaos::model::{Engine, ModelGrid, ModelParams, ModelSymbol};
use jumpchaos::{sample_paths, LatticeSpec, MartingaleSpec};

fn noise(c: &mut Criterion) {
    let lattice = LatticeSpec::new(3, 0.125, 1.0).unwrap();
    let spec = MartingaleSpec::phi43(0.125);
    c.bench_function("sample_paths eps=1/8 T=1", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            black_box(sample_paths(&lattice, &spec, seed).unwrap())
        })
    });
}

fn chaos(c: &mut Criterion) {
    let lattice = LatticeSpec::new(1, 0.25, 1.0).unwrap();
    let spec = MartingaleSpec::symmetric(0.0, 1.0, 1.0, 1, 0.25);
    let path = sample_paths(&lattice, &spec, 3).unwrap();
    let f = GridFunction::new(3, |z| z.iter().map(|p| 1.0 + (p.t + p.site as f64).cos()).product());
    c.bench_function("product_integral n=3", |b| b.iter(|| product_integral(&f, &path, 3, 1.0, 1e-3).unwrap()));
    c.bench_function("chaos_expansion n=3", |b| b.iter(|| chaos_expansion(&f, &path, 3, 1.0, 1e-3).unwrap()));
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    g.bench_function("singular kernel + C1 eps=1/8", |b| {
        b.iter(|| {
            let (k, _) = build_singular_kernel(0.125, 0.25, Cutoff::Standard, 2).unwrap();
            renorm_constant_c1(&TorusKernel::from_kernel(&k, 8))
        })
    });
    g.finish();
}

fn model(c: &mut Criterion) {
    let grid = ModelGrid::new(ModelParams::new(0.125, 0.125f64.powf(0.75))).unwrap();
    let engine = Engine::new(&grid, &ModelSymbol::ALL, &[0.5, 0.25, 0.125]).unwrap();
    let mut g = c.benchmark_group("model");
    g.sample_size(10);
    g.bench_function("engine pair of replicas eps=1/8", |b| b.iter(|| engine.run(5, 0, 2).unwrap()));
    g.finish();
}

fn graphs(c: &mut Criterion) {
    let text = include_str!("../../../fixtures/psi2.graph");
    c.bench_function("graph-check psi2", |b| {
        b.iter(|| {
            let f = parse_fixture(text).unwrap();
            let cg = contract_graph(&f.graph, &f.contraction, &f.labeling).unwrap();
            check_contraction_assumption(&cg, &PowerCounting::PHI43).unwrap()
        })
    });
}

criterion_group!(benches, noise, chaos, kernels, model, graphs);
criterion_main!(benches);
