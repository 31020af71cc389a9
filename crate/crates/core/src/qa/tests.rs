use super::*;

pub(crate) fn circuit_example() -> Example {
    let context = [
        "The switch is on.",
        "The circuit has the bell.",
        "If the circuit has the switch and the switch is on then the circuit is complete.",
        "If the circuit does not have the switch then the circuit is complete.",
        "If the circuit is complete and the circuit has the light bulb then the light bulb is glowing.",
        "If the circuit is complete and the circuit has the bell then the bell is ringing.",
        "If the circuit is complete and the circuit has the radio then the radio is playing.",
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

fn example(context: &[&str], query: &str) -> Example {
    Example {
        id: "t".into(),
        context: context.iter().map(|s| s.to_string()).collect(),
        query: query.into(),
        label: Some(Label::Unknown),
        answers: None,
        section: None,
    }
}

#[test]
fn marginal_counts_distinct_samples_once() {
    let s = |key: &str, lj: f64| Sample { iteration: 0, key: key.into(), log_joint: lj };
    assert_eq!(estimate_log_marginal(&[]), f64::NEG_INFINITY);
    assert_eq!(estimate_log_marginal(&[s("a", -3.0)]), -3.0);
    assert_eq!(estimate_log_marginal(&[s("a", -3.0), s("a", -3.0)]), -3.0);
    let two = estimate_log_marginal(&[s("a", -3.0), s("b", -3.0), s("a", -3.0)]);
    assert!((two - (-3.0 + 2f64.ln())).abs() < 1e-12);
}

#[test]
fn threshold_rule() {
    assert_eq!(label_for(-10.0, -2010.0, 2000.0), Label::True);
    assert_eq!(label_for(-2010.0, -10.0, 2000.0), Label::False);
    assert_eq!(label_for(-10.0, -1000.0, 2000.0), Label::Unknown);
    assert_eq!(label_for(-10.0, f64::NEG_INFINITY, 2000.0), Label::True);
    assert_eq!(label_for(f64::NEG_INFINITY, f64::NEG_INFINITY, 2000.0), Label::Unknown);
}

#[test]
fn oracle_on_small_contexts() {
    let cats = example(&["Bob is a cat.", "Every cat is a mammal."], "Bob is a mammal.");
    let circuit = circuit_example();
    for logic in [Logic::Classical, Logic::Intuitionistic] {
        assert_eq!(oracle_label(&cats, logic).unwrap(), Label::True);
        assert_eq!(oracle_label(&example(&["Bob is a cat."], "Alice is a cat."), logic).unwrap(), Label::Unknown);
        assert_eq!(oracle_label(&example(&["Bob is not big."], "Is Bob big?"), logic).unwrap(), Label::False);
    }
    assert_eq!(oracle_label(&circuit, Logic::Intuitionistic).unwrap(), Label::Unknown);
    assert_eq!(oracle_label(&circuit, Logic::Classical).unwrap(), Label::True);
    let contra = example(&["If something is a cat then it is a mammal.", "Bob is not a mammal."], "Bob is a cat.");
    assert_eq!(oracle_label(&contra, Logic::Intuitionistic).unwrap(), Label::False);
    let rivers = example(&["River Elsuir is a river in Wulstershire."], "River Elsuir is a river.");
    assert_eq!(oracle_label(&rivers, Logic::Classical).unwrap(), Label::True);
    assert!(oracle_label(&example(&["The length of River Elsuir is 207 kilometers."], "Is River Elsuir a river?"), Logic::Classical).is_err());
}

#[test]
fn material_conditional_reading_is_true() {
    let ex = example(&["Bob is a cat.", "Every cat is a mammal."], "Bob is a mammal.");
    for logic in [Logic::Classical, Logic::Intuitionistic] {
        let settings = Settings { logic, iters: 100, ..Settings::default() };
        let v = answer_polar(&ex, &settings, 1).unwrap();
        assert_eq!(v.label, Label::True, "{logic}: {v:?}");
    }
}

#[test]
fn circuit_labels_depend_on_logic() {
    let ex = circuit_example();
    for (logic, want) in [(Logic::Intuitionistic, Label::Unknown), (Logic::Classical, Label::True)] {
        let settings = Settings { logic, ..Settings::default() };
        let v = answer_polar(&ex, &settings, 7).unwrap();
        assert_eq!(v.label, want, "{logic}: {v:?}");
    }
}

#[test]
fn negated_queries_mirror() {
    let ex = example(&["Bob is a cat.", "Every cat is a mammal."], "Bob is a mammal.");
    let neg = example(&["Bob is a cat.", "Every cat is a mammal."], "Bob is not a mammal.");
    let settings = Settings { iters: 50, ..Settings::default() };
    let a = answer_polar(&ex, &settings, 3).unwrap();
    let b = answer_polar(&neg, &settings, 3).unwrap();
    assert_eq!((a.log_m_true, a.log_m_false), (b.log_m_false, b.log_m_true));
    assert_eq!(a.label, Label::True);
    assert_eq!(b.label, Label::False);
}

#[test]
fn dataset_lines_report_errors() {
    let text = "{\"id\":\"a-1\",\"context\":[\"Bob is a cat.\"],\"query\":\"Bob is a cat.\",\"label\":\"true\"}\n\nnot json\n{\"id\":\"b\",\"context\":[],\"query\":\"x\",\"label\":\"true\"}\n";
    let lines = load_dataset(text);
    assert_eq!(lines.len(), 3);
    assert!(matches!(&lines[0], DatasetLine::Example(e) if e.section() == "a"));
    assert!(matches!(&lines[1], DatasetLine::Malformed { line: 3, .. }));
    assert!(matches!(&lines[2], DatasetLine::Malformed { line: 4, .. }));
    let r = evaluate(&[], &Settings::default(), 0, 1);
    assert_eq!(r.overall.examples, 0);
}

pub(crate) fn rivers_example() -> Example {
    let context = [
        "River Giffeleney is a river in Wulstershire.",
        "River Wulstershire is a river in the state of Wulstershire.",
        "River Elsuir is a river in Wulstershire.",
        "The length of River Giffeleney is 413 kilometers.",
        "The length of River Wulstershire is 830 kilometers.",
        "The length of River Elsuir is 207 kilometers.",
        "Every river that is shorter than 400 kilometers is not major.",
    ];
    Example {
        id: "rivers".into(),
        context: context.iter().map(|s| s.to_string()).collect(),
        query: "What rivers in Wulstershire are not major?".into(),
        label: None,
        answers: Some(vec!["River Elsuir".into()]),
        section: None,
    }
}

#[test]
fn rivers_wh_answer() {
    let got = answer_wh(&rivers_example(), &Settings::default(), 5).unwrap();
    assert_eq!(got, BTreeSet::from(["River Elsuir".to_string()]));
}
