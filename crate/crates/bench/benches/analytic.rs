use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use tiltnet_bench::{hetnet_params, params};
use tiltnet_core::laplace::{BlockageWeight, ExponentTerm, FieldGroup, LaplaceExponent};
use tiltnet_core::*;

fn serving_distance(c: &mut Criterion) {
    let p = params(1);
    let dist = ServingDistanceDist::for_params(&p).unwrap();
    c.bench_function("serving_pdf", |b| {
        b.iter(|| black_box(dist.pdf(black_box(120.0)).unwrap()))
    });
    c.bench_function("serving_dist_build", |b| {
        b.iter(|| black_box(ServingDistanceDist::for_params(&p).unwrap().mean()))
    });
}

fn laplace(c: &mut Criterion) {
    let p = params(5);
    let pl = &p.path_loss;
    let exponent =
        LaplaceExponent::new().with_term(ExponentTerm::Field(FieldGroup::from_gain_dist(
            p.lambda_m,
            &p.macro_gain,
            p.p_m * pl.c_los,
            pl.alpha_los,
            5,
            100.0,
            BlockageWeight::Los {
                beta: pl.beta_blockage,
            },
            Some(p.vertical),
        )));
    c.bench_function("laplace_value", |b| {
        b.iter(|| black_box(exponent.value(black_box(1e8), 6.0).unwrap()))
    });
    c.bench_function("laplace_derivs_m5", |b| {
        b.iter(|| black_box(exponent.transform_derivs(black_box(1e8), 4, 6.0).unwrap()))
    });
}

fn coverage(c: &mut Criterion) {
    for m in [1u32, 5] {
        let p = params(m);
        c.bench_function(&format!("coverage_homogeneous_m{m}"), |b| {
            b.iter(|| black_box(coverage_homogeneous(&p, black_box(1.0), 6.0).unwrap().value))
        });
    }
    let p = hetnet_params(1);
    c.bench_function("coverage_femto", |b| {
        b.iter(|| {
            black_box(
                coverage_femto(&p, black_box(10.0), 6.0, 40.0)
                    .unwrap()
                    .value,
            )
        })
    });
    c.bench_function("coverage_homogeneous_approx", |b| {
        let p = params(1);
        b.iter(|| {
            black_box(
                coverage_homogeneous_approx(&p, black_box(1.0), 6.0)
                    .unwrap()
                    .value,
            )
        })
    });
}

fn optimizer(c: &mut Criterion) {
    let mut p = params(1);
    p.lambda_m = 8e-4;
    c.bench_function("optimize_tilt_bisection", |b| {
        b.iter(|| {
            black_box(
                optimize_tilt_bisection(&p, 10.0, 0.1)
                    .unwrap()
                    .theta_opt_deg,
            )
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = serving_distance, laplace, coverage, optimizer
}
criterion_main!(benches);
