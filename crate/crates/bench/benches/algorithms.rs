use criterion::{black_box, criterion_group, criterion_main, Criterion};

use raag::complex::{rose, saturate};
use raag::{decide_stability, enumerate_cosets, normalize, star_length, DefiningGraph};

fn c5() -> DefiningGraph {
    DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap()
}

fn words(c: &mut Criterion) {
    let g = c5();
    let w = g
        .parse_word("a b c d e a^-1 c b^-1 d a e^-1 c a b c d e a^-1 c b^-1")
        .unwrap();
    c.bench_function("normalize/20", |b| {
        b.iter(|| normalize(&g, black_box(&w)).unwrap())
    });
    let s = g.parse_word("a c e b d a c e b d").unwrap();
    c.bench_function("star_length/10", |b| {
        b.iter(|| star_length(&g, black_box(&s)).unwrap())
    });
}

fn complexes(c: &mut Criterion) {
    let g = c5();
    let gens = vec![g.parse_word("a b c d").unwrap()];
    let r = rose(&g, &gens).unwrap();
    c.bench_function("saturate/abcd", |b| {
        b.iter(|| saturate(&g, black_box(&r), 100))
    });
}

fn cosets(c: &mut Criterion) {
    let g = DefiningGraph::complete(&["x", "y", "z"]).unwrap();
    let gens = vec![
        g.parse_word("x x x").unwrap(),
        g.parse_word("y y y y").unwrap(),
        g.parse_word("z z z z z").unwrap(),
    ];
    c.bench_function("cosets/index60", |b| {
        b.iter(|| enumerate_cosets(&g, black_box(&gens), 1_000_000).unwrap())
    });
}

fn deciders(c: &mut Criterion) {
    let g = c5();
    let gens = vec![g.parse_word("a c").unwrap(), g.parse_word("b d").unwrap()];
    c.bench_function("stability/not_stable", |b| {
        b.iter(|| decide_stability(&g, black_box(&gens), 1_000_000).unwrap())
    });
}

criterion_group!(benches, words, complexes, cosets, deciders);
criterion_main!(benches);
