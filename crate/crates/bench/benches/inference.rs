use std::hint::black_box;

use abduce_core::mh::{read_logical_form, step};
use abduce_core::prior::log_prior_theory;
use abduce_core::qa::{answer_polar, parse_context, read_context, Settings};
use abduce_core::{Example, Label, Logic};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circuit() -> Example {
    let context = [
        "The switch is on.",
        "The circuit has the bell.",
        "If the circuit has the switch and the switch is on then the circuit is complete.",
        "If the circuit does not have the switch then the circuit is complete.",
        "If the circuit is complete and the circuit has the bell then the bell is ringing.",
    ];
    Example {
        id: "circuit".into(),
        context: context.iter().map(|s| s.to_string()).collect(),
        query: "The circuit is complete.".into(),
        label: Some(Label::Unknown),
        answers: None,
        section: None,
    }
}

fn inference(c: &mut Criterion) {
    let ex = circuit();
    let settings = Settings { logic: Logic::Classical, ..Settings::default() };
    let forms = parse_context(&ex.context).unwrap();
    let state = read_context(&forms, &settings, 0).unwrap();

    c.bench_function("log_prior_theory", |b| b.iter(|| log_prior_theory(black_box(&state.theory), &settings.prior)));
    c.bench_function("mh_step", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = state.clone();
        b.iter(|| s = step(s.clone(), &settings.weights, &settings.prior, &mut rng).0)
    });
    c.bench_function("read_sentence", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let last = forms.last().unwrap();
        let before = read_context(&forms[..forms.len() - 1], &settings, 0).unwrap();
        b.iter(|| read_logical_form(before.clone(), &last.formula, &settings.prior, &settings.weights, &mut rng, 0).unwrap())
    });
    let mut g = c.benchmark_group("answer_polar");
    g.sample_size(10);
    let short = Settings { iters: 100, ..settings.clone() };
    g.bench_function("100_iters", |b| b.iter(|| answer_polar(black_box(&ex), &short, 0).unwrap()));
    g.finish();
}

criterion_group!(benches, inference);
criterion_main!(benches);
