use std::sync::OnceLock;

use hdamso::corpus::{coherent_words, ipom, omega_without_empty, EX1_CHAIN, GLUE_LEFT, GLUE_RESULT, GLUE_RIGHT};
use hdamso::format::{parse_ipom, write_ipom, FormatError};
use hdamso::ipomset::{
    glue, is_isomorphism, isomorphic, relaxations, subsumes, validate_ipomset, width, GlueError, IPomset, RelaxLimits,
    Violation,
};
use hdamso::steps::{compose_word, StepLetter};
use proptest::prelude::*;

fn words() -> &'static [Vec<StepLetter>] {
    static WORDS: OnceLock<Vec<Vec<StepLetter>>> = OnceLock::new();
    WORDS.get_or_init(|| coherent_words(&omega_without_empty(&["a", "b"], 2), 4))
}

fn violations(text: &str) -> Vec<Violation> {
    match parse_ipom(text) {
        Err(FormatError::InvalidIPomset(r)) => r.violations,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn glue_of_pictured_pair() {
    let glued = glue(&ipom(GLUE_LEFT), &ipom(GLUE_RIGHT)).unwrap();
    let expected = ipom(GLUE_RESULT);
    let f = isomorphic(&glued, &expected).expect("isomorphic");
    assert!(is_isomorphism(&glued, &expected, &f.mapping));
    assert_eq!(glued.canonical(), expected.canonical());
}

#[test]
fn glue_rejects_mismatched_interfaces() {
    let a = IPomset::identity(&["a"]);
    let b = IPomset::identity(&["b"]);
    assert!(matches!(glue(&a, &b), Err(GlueError::InterfaceMismatch { .. })));
    assert!(glue(&IPomset::word(&["a"]), &IPomset::word(&["b"])).is_ok());
}

#[test]
fn subsumption_chain() {
    let chain: Vec<IPomset> = EX1_CHAIN.iter().map(|t| ipom(t)).collect();
    assert!(subsumes(&chain[0], &chain[1]).is_some());
    assert!(subsumes(&chain[1], &chain[2]).is_some());
    assert!(subsumes(&chain[0], &chain[2]).is_some());
    assert!(subsumes(&chain[1], &chain[0]).is_none());
    assert!(subsumes(&chain[2], &chain[1]).is_none());
}

#[test]
fn relaxations_of_ab() {
    let r = relaxations(&IPomset::word(&["a", "b"]), RelaxLimits::default()).unwrap();
    assert_eq!(r.len(), 3);
    assert!(r.iter().any(|q| isomorphic(q, &IPomset::conclist(&["a", "b"])).is_some()));
    assert!(r.iter().any(|q| isomorphic(q, &IPomset::conclist(&["b", "a"])).is_some()));
}

#[test]
fn widths() {
    assert_eq!(width(&IPomset::empty()), 0);
    assert_eq!(width(&IPomset::word(&["a", "b", "a"])), 1);
    assert_eq!(width(&IPomset::conclist(&["a", "b", "a"])), 3);
    assert_eq!(width(&ipom(GLUE_RESULT)), 2);
}

#[test]
fn invalid_ipomsets_are_reported() {
    let v = violations("events: x:a, y:b\n");
    assert!(v.contains(&Violation::Unrelated("x".into(), "y".into())));

    let v = violations("events: x:a, y:b\nsources: y\nprec: x<y\n");
    assert!(matches!(&v[..], [Violation::SourceNotMinimal { .. }]));

    // 2+2
    let v = violations("events: a:a, b:a, c:a, d:a\nprec: a<b, c<d\nevord: a~>c, a~>d, c~>b, b~>d\n");
    assert!(v.iter().any(|v| matches!(v, Violation::NotInterval(_))));

    let v = violations("events: x:a, y:a, z:a\nevord: x~>y, y~>z, z~>x\n");
    assert!(v.iter().any(|v| matches!(v, Violation::EventOrderCycle(..))));
}

#[test]
fn validation_on_raw_structures() {
    let raw = IPomset::word(&["a", "b"]).to_raw();
    assert!(validate_ipomset(&raw).is_ok());
    let mut broken = raw.clone();
    broken.precedence.push((1, 0));
    assert!(!validate_ipomset(&broken).is_ok());
}

#[test]
fn write_then_parse() {
    for text in [GLUE_LEFT, GLUE_RIGHT, GLUE_RESULT, EX1_CHAIN[1]] {
        let p = ipom(text);
        let q = parse_ipom(&write_ipom(&p)).unwrap();
        assert_eq!(p, q);
    }
}

#[test]
fn syntax_errors_carry_lines() {
    let err = parse_ipom("events: x:a\nprec: x<q\n").unwrap_err();
    assert_eq!(err, FormatError::Syntax { line: 2, message: "unknown event 'q'".into() });
}

fn glued(w: &[StepLetter]) -> IPomset {
    compose_word(w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn glue_is_associative(i in 0usize..5350, cut in any::<prop::sample::Index>()) {
        let w = &words()[i % words().len()];
        prop_assume!(w.len() >= 3);
        let a = 1 + cut.index(w.len() - 2);
        let b = a + 1;
        let (p, q, r) = (glued(&w[..a]), glued(&w[a..b]), glued(&w[b..]));
        let left = glue(&glue(&p, &q).unwrap(), &r).unwrap();
        let right = glue(&p, &glue(&q, &r).unwrap()).unwrap();
        prop_assert!(isomorphic(&left, &right).is_some());
    }

    #[test]
    fn identities_are_neutral(i in 0usize..5350) {
        let w = &words()[i % words().len()];
        let p = glued(w);
        let src: Vec<&str> = p.sort_by_event_order(p.source_conclist()).into_iter().map(|e| p.label(e).as_str()).collect();
        let tgt: Vec<&str> = p.sort_by_event_order(p.target_conclist()).into_iter().map(|e| p.label(e).as_str()).collect();
        let left = glue(&IPomset::identity(&src), &p).unwrap();
        let right = glue(&p, &IPomset::identity(&tgt)).unwrap();
        prop_assert!(isomorphic(&left, &p).is_some());
        prop_assert!(isomorphic(&right, &p).is_some());
    }

    #[test]
    fn isomorphism_ignores_numbering(i in 0usize..5350, shuffled in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let p = glued(&words()[i % words().len()]);
        let perm: Vec<usize> = shuffled.into_iter().filter(|&e| e < p.len()).collect();
        let q = p.permuted(&perm);
        prop_assert!(is_isomorphism(&p, &q, &perm));
        prop_assert!(isomorphic(&p, &q).is_some());
        prop_assert_eq!(p.canonical(), q.canonical());
        prop_assert_eq!(width(&p), width(&q));
    }

    #[test]
    fn subsumption_is_reflexive_and_relaxations_subsume(i in 0usize..5350) {
        let p = glued(&words()[i % words().len()]);
        prop_assert!(subsumes(&p, &p).is_some());
        for q in relaxations(&p, RelaxLimits::default()).unwrap() {
            prop_assert!(subsumes(&p, &q).is_some());
            prop_assert!(width(&q) >= width(&p));
        }
    }
}
