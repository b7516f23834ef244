use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use eisenperiod::orbits_periods::{enumerate_all_orbits, period_pairing};
use eisenperiod::{
    eis, eisenstein_membership, CuspFormNumeric, CyclotomicNumber, Polynomial, Rational, Sign,
    TorsionPoint,
};

fn cyclotomic(c: &mut Criterion) {
    let a = CyclotomicNumber::zeta_power(60, 7)
        .try_add(&CyclotomicNumber::from_integer(60, 3))
        .unwrap();
    let b = CyclotomicNumber::zeta_power(60, 11).scale_int(-5);
    c.bench_function("cyclotomic mul N=60", |bch| {
        bch.iter(|| black_box(&a).try_mul(black_box(&b)).unwrap())
    });
    c.bench_function("cyclotomic inverse N=60", |bch| bch.iter(|| black_box(&a).inverse().unwrap()));
}

fn series(c: &mut Criterion) {
    let p = TorsionPoint::new(5, 1, 2);
    let q = TorsionPoint::new(5, 3, 1);
    c.bench_function("eisenstein expansion k=3 N=5 prec=60", |bch| {
        bch.iter(|| eis(3, black_box(p), 60).unwrap())
    });
    let a = eis(3, p, 60).unwrap();
    let b = eis(3, q, 60).unwrap();
    c.bench_function("series product N=5 prec=60", |bch| {
        bch.iter(|| black_box(&a).mul(black_box(&b)).unwrap())
    });
    let target = a.mul(&b).unwrap();
    c.bench_function("membership k=6 N=5", |bch| {
        bch.iter(|| eisenstein_membership(black_box(&target), 6, 5, 60).unwrap())
    });
}

fn orbits_and_periods(c: &mut Criterion) {
    let bound = Rational::from_integer(2.into());
    c.bench_function("orbit tables N=3 det<=2", |bch| {
        bch.iter(|| enumerate_all_orbits(3, black_box(&bound), Sign::Pos).unwrap())
    });
    let delta = CuspFormNumeric::delta(120);
    let p: Polynomial<Complex64> = Polynomial::monomial(4);
    c.bench_function("period pairing delta z^4", |bch| {
        bch.iter(|| period_pairing(&delta, black_box(&p), 1e-12).unwrap())
    });
}

criterion_group!(benches, cyclotomic, series, orbits_and_periods);
criterion_main!(benches);
