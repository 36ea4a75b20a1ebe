use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use icsimp::oracle::{verify, Mode, Strategy, VerifyOptions};
use icsimp::simplify::simp;
use icsimp::syntax::{parse_schema, parse_update};

fn corpus(file: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(file);
    std::fs::read_to_string(p).unwrap()
}

fn strategies() -> Vec<(&'static str, Strategy)> {
    vec![
        ("sequential", Strategy::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Strategy::Parallel),
    ]
}

fn bench_verify(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify-cwp");
    g.sample_size(10);
    for stem in ["book", "ld98"] {
        let s = parse_schema(&corpus(&format!("{stem}.sch"))).unwrap();
        let u = parse_update(&corpus(&format!("{stem}.upd"))).unwrap();
        let out = simp(&s, &u, Default::default(), &Default::default()).unwrap();
        for (label, strategy) in strategies() {
            let mut o = VerifyOptions::new(Mode::Cwp, &["a", "b", "c"]);
            o.strategy = strategy;
            g.bench_with_input(BenchmarkId::new(label, stem), &o, |b, o| {
                b.iter(|| verify(&s, &u, &out.theory, o).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, bench_verify);
criterion_main!(benches);
