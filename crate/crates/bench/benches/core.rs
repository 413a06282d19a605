use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use twistor_bench::split_input;
use twistor_core::clifford::{CliffordRep, Signature};
use twistor_core::model_space::Model;
use twistor_core::normal_form::PolyMetric;
use twistor_core::random::rng;
use twistor_core::spinor_forms::{DiracFamily, InnerProduct};

fn representation(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_representation");
    for n in [4usize, 8, 10] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| CliffordRep::new(Signature::standard(n / 2, n - n / 2).unwrap()).unwrap())
        });
    }
    g.finish();
}

fn dirac_forms(c: &mut Criterion) {
    let mut g = c.benchmark_group("dirac_form_degree_m");
    for n in [4usize, 6, 8] {
        let (rep, v) = split_input(n, 1);
        let fam = DiracFamily::new(&rep).unwrap();
        let k = rep.sig.p;
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| fam.form(&rep, black_box(&v), k).unwrap()));
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernel_real");
    for n in [4usize, 6, 8] {
        let (rep, v) = split_input(n, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| rep.kernel_real(black_box(&v)).unwrap()));
    }
    g.finish();
}

fn inner_product(c: &mut Criterion) {
    let (rep, v) = split_input(8, 3);
    let ip = InnerProduct::new(&rep).unwrap();
    c.bench_function("bilinear_n8", |b| b.iter(|| ip.bilinear(black_box(&v), black_box(&v))));
}

fn model_space(c: &mut Criterion) {
    let model = Model::new(2, 2).unwrap();
    let mut r = rng(4);
    let v = model.random_spinor(&mut r);
    let x = model.random_point(&mut r);
    let w = x.project_tangent(&[0.3, -0.1, 0.7, 0.2, 0.5, -0.4]);
    c.bench_function("twistor_residual_2_2", |b| b.iter(|| model.twistor_residual(black_box(&v), &x, &w, 1e-4).unwrap()));
    c.bench_function("curvature_data_2_2", |b| b.iter(|| model.curvature_data_at(black_box(&x)).unwrap()));
}

fn normal_form(c: &mut Criterion) {
    let pm = PolyMetric::random_constrained(2, true, 2, &mut rng(5));
    let pt = [0.1, -0.2, 0.3, 0.4, -0.5];
    c.bench_function("ricci_formula_m2", |b| b.iter(|| pm.ricci_formula_at(black_box(&pt)).unwrap()));
    c.bench_function("ricci_oracle_m2", |b| b.iter(|| pm.ricci_numeric_oracle(black_box(&pt), 1e-3).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = representation, dirac_forms, kernels, inner_product, model_space, normal_form
}
criterion_main!(benches);
