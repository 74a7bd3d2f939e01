use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use freenc::convergence::{rho_point, spectral_radius, CoeffRule};
use freenc::diffcalc::delta_r_higher;
use freenc::ncalg::{example63_eval, random_poly};
use freenc::ttseries::tt_expand;
use freenc::{sample, Complex, MatTuple, Matrix, NcExpr, NcFunction, Rational, Scalar};

type Q = Rational;

fn poly_eval(c: &mut Criterion) {
    let mut rng = sample::rng(1);
    let p = random_poly::<Q>(&mut rng, 2, 6, 20);
    let mut group = c.benchmark_group("poly_eval");
    for n in [2, 4, 8] {
        let x = sample::int_tuple::<Q>(&mut rng, 2, n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| p.eval(black_box(x)).unwrap()));
    }
    group.finish();
}

fn higher_differences(c: &mut Criterion) {
    let f = NcFunction::<Q>::from_expr(NcExpr::parse("x1*x2*x1 - inv(3 - x2*x1)", 2).unwrap());
    let mut rng = sample::rng(2);
    let mut group = c.benchmark_group("delta_r_higher");
    for l in [1, 2, 4] {
        let xs: Vec<_> = (0..=l).map(|_| sample::int_tuple::<Q>(&mut rng, 2, 2, 1)).collect();
        let zs: Vec<_> = (0..l).map(|_| sample::int_rect::<Q>(&mut rng, 2, 2, 2, 2)).collect();
        group.bench_function(BenchmarkId::from_parameter(l), |b| b.iter(|| delta_r_higher(&f, black_box(&xs), black_box(&zs)).unwrap()));
    }
    group.finish();
}

fn expansion(c: &mut Criterion) {
    let f = NcFunction::<Q>::from_expr(NcExpr::parse("x1*inv(2 + x2) + x2*x2*x1", 2).unwrap());
    let scalar = MatTuple::scalars(vec![Q::from_i64(1), Q::from_i64(0)]).unwrap();
    let matrix = sample::int_tuple::<Q>(&mut sample::rng(3), 2, 2, 1);
    c.bench_function("tt_expand/s1_deg4", |b| b.iter(|| tt_expand(&f, black_box(&scalar), 4).unwrap()));
    c.bench_function("tt_expand/s2_deg2", |b| b.iter(|| tt_expand(&f, black_box(&matrix), 2).unwrap()));
    let x = sample::int_tuple::<Q>(&mut sample::rng(4), 2, 4, 2);
    c.bench_function("example63_eval/4", |b| b.iter(|| example63_eval(black_box(&x)).unwrap()));
}

fn numerics(c: &mut Criterion) {
    let z = Matrix::from_fn(6, 6, |i, j| Complex::new(((i * 7 + j * 3) % 5) as f64 * 0.1 - 0.2, (i as f64 - j as f64) * 0.05));
    c.bench_function("spectral_radius/6", |b| b.iter(|| spectral_radius(black_box(&z), 1e-12)));
    let point = MatTuple::from_mats(vec![z.clone(), z.scale(&Complex::new(0.0, 0.5))]).unwrap();
    let rule = CoeffRule::geometric(2);
    c.bench_function("rho_point/geometric_l64", |b| b.iter(|| rho_point(&rule, black_box(&point), 64).unwrap()));
}

criterion_group!(benches, poly_eval, higher_differences, expansion, numerics);
criterion_main!(benches);
