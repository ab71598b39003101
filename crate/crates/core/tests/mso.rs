use std::sync::OnceLock;

use hdamso::corpus::{all_ipomsets, fig3_ipomset, fig3_w1, fig3_w2, sentence_corpus, w1_sentence, SENTENCES};
use hdamso::ipomset::{IPomset, Label};
use hdamso::mso::{
    concurrency_formula, eval_ipomset, eval_word, eval_word_over, parse_formula, CompiledFormula, EvalError,
    EvalOptions, Formula, ParseError, Signature, SortError, Valuation,
};
use hdamso::steps::{enumerate_omega, StepLetter};
use proptest::prelude::*;

fn models() -> &'static [IPomset] {
    static ALL: OnceLock<Vec<IPomset>> = OnceLock::new();
    ALL.get_or_init(|| all_ipomsets(&["a", "b"], 3))
}

fn holds(f: &Formula, p: &IPomset) -> bool {
    eval_ipomset(f, p, &Valuation::new()).unwrap()
}

#[test]
fn printed_sentences_parse_back() {
    for f in sentence_corpus() {
        let again = parse_formula(&f.to_string(), Signature::IPomset).unwrap();
        assert_eq!(again, f, "{f}");
    }
    let w = w1_sentence();
    assert_eq!(parse_formula(&w.to_string(), Signature::Word).unwrap(), w);
}

#[test]
fn signatures_are_enforced() {
    let err = parse_formula("exists x. a(x)", Signature::Word).unwrap_err();
    assert!(matches!(err, ParseError::Sort(SortError::WrongSignature { .. })));
    let err = parse_formula("exists x. L\"[a.]\"(x)", Signature::IPomset).unwrap_err();
    assert!(matches!(err, ParseError::Sort(SortError::WrongSignature { .. })));
    assert!(parse_formula("exists x. x in x", Signature::IPomset).is_err());
    assert!(parse_formula("exists x. exists x. a(x)", Signature::IPomset).is_err());
}

#[test]
fn syntax_errors_have_positions() {
    match parse_formula("exists x.\n  a(x) &", Signature::IPomset) {
        Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(parse_formula("exists . a(x)", Signature::IPomset).is_err());
}

#[test]
fn free_variables_need_values() {
    let f = parse_formula("a(x) & x in X", Signature::IPomset).unwrap();
    let p = IPomset::word(&["a", "b"]);
    assert_eq!(eval_ipomset(&f, &p, &Valuation::new()), Err(EvalError::Unbound("x".into())));
    let nu = Valuation::new().element("x", 0).set("X", [0]);
    assert_eq!(eval_ipomset(&f, &p, &nu), Ok(true));
    let nu = Valuation::new().element("x", 1).set("X", [1]);
    assert_eq!(eval_ipomset(&f, &p, &nu), Ok(false));
    let nu = Valuation::new().element("x", 7).set("X", [0]);
    assert!(matches!(eval_ipomset(&f, &p, &nu), Err(EvalError::OutOfRange(_))));
}

#[test]
fn concurrency_sentence() {
    let phi = concurrency_formula("a", "b");
    assert!(holds(&phi, &IPomset::conclist(&["a", "b"])));
    assert!(holds(&phi, &IPomset::conclist(&["b", "a"])));
    assert!(!holds(&phi, &IPomset::word(&["a", "b"])));
    assert!(!holds(&phi, &IPomset::word(&["b", "a"])));
    assert!(!holds(&phi, &IPomset::empty()));
}

#[test]
fn fig3_facts() {
    let p = fig3_ipomset();
    let e = |n: &str| p.event(n).unwrap();
    let f = parse_formula("s(x) & c(x) & x < y & a(y)", Signature::IPomset).unwrap();
    assert!(eval_ipomset(&f, &p, &Valuation::new().element("x", e("e3")).element("y", e("e2"))).unwrap());
    assert!(!eval_ipomset(&f, &p, &Valuation::new().element("x", e("e3")).element("y", e("e1"))).unwrap());
    let g = parse_formula("exists x, y. x ~> y & x < y", Signature::IPomset).unwrap();
    assert!(!holds(&g, &p));
}

#[test]
fn word_sentences() {
    let w = fig3_w1();
    let phi = w1_sentence();
    assert!(eval_word(&phi, w.letters(), &Valuation::new()).unwrap());
    assert!(!eval_word(&phi, fig3_w2().letters(), &Valuation::new()).unwrap());

    let first_starts = parse_formula("exists x. (forall y. x = y | x < y) & L\"[a. .c.]\"(x)", Signature::Word).unwrap();
    assert!(eval_word(&first_starts, w.letters(), &Valuation::new()).unwrap());
    let succ = parse_formula("exists x, y. x -> y & L\"[.a .d.]\"(x) & L\"[.d]\"(y)", Signature::Word).unwrap();
    assert!(eval_word(&succ, w.letters(), &Valuation::new()).unwrap());

    let abc: Vec<Label> = ["a", "c", "d"].iter().map(|l| Label::new(l)).collect();
    let alphabet = enumerate_omega(&abc, 1, false);
    assert!(matches!(
        eval_word_over(&phi, w.letters(), &alphabet, &Valuation::new()),
        Err(EvalError::LetterNotInAlphabet(_))
    ));
}

#[test]
fn second_order_evaluation() {
    // an even number of events
    let even = parse_formula(
        "exists X. forall x, y. (x -> y -> (x in X <-> !(y in X))) & ((forall z. z = x | z < x) -> x in X) & ((forall z. z = x | x < z) -> !(x in X))",
        Signature::IPomset,
    )
    .unwrap();
    for n in 1..=6 {
        let labels = vec!["a"; n];
        assert_eq!(holds(&even, &IPomset::word(&labels)), n % 2 == 0, "{n}");
    }
}

fn sentence() -> impl Strategy<Value = Formula> {
    (0..SENTENCES.len() + 1).prop_map(|i| sentence_corpus().swap_remove(i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boolean_connectives(f in sentence(), g in sentence(), i in 0usize..1000) {
        let p = &models()[i % models().len()];
        let (a, b) = (holds(&f, p), holds(&g, p));
        prop_assert_eq!(holds(&Formula::not(f.clone()), p), !a);
        prop_assert_eq!(holds(&Formula::and(f.clone(), g.clone()), p), a && b);
        prop_assert_eq!(holds(&Formula::or(f.clone(), g.clone()), p), a || b);
        prop_assert_eq!(holds(&Formula::implies(f.clone(), g.clone()), p), !a || b);
        prop_assert_eq!(holds(&Formula::iff(f, g), p), a == b);
    }

    #[test]
    fn renumbering_preserves_truth(
        f in sentence(),
        i in 0usize..1000,
        shuffled in Just((0..3).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let p = &models()[i % models().len()];
        let perm: Vec<usize> = shuffled.into_iter().filter(|&e| e < p.len()).collect();
        prop_assert_eq!(holds(&f, p), holds(&f, &p.permuted(&perm)));
    }

    #[test]
    fn sat_path_agrees_with_enumeration(f in sentence(), i in 0usize..1000) {
        let p = &models()[i % models().len()];
        let c = CompiledFormula::new(&f).unwrap();
        let nu = Valuation::new();
        let direct = c.eval_ipomset_with(p, &nu, EvalOptions { brute_force_bits: 64, ..EvalOptions::default() }).unwrap();
        let grounded = c.eval_ipomset_with(p, &nu, EvalOptions { brute_force_bits: 0, ..EvalOptions::default() }).unwrap();
        prop_assert_eq!(direct, grounded);
    }

    #[test]
    fn quantifier_duality(i in 0usize..1000) {
        let p = &models()[i % models().len()];
        let ex = parse_formula("exists x. a(x) & !t(x)", Signature::IPomset).unwrap();
        let all = parse_formula("forall x. !a(x) | t(x)", Signature::IPomset).unwrap();
        prop_assert_eq!(holds(&ex, p), !holds(&all, p));
        let exs = parse_formula("exists X. forall x. x in X -> a(x)", Signature::IPomset).unwrap();
        prop_assert!(holds(&exs, p));
    }
}

#[test]
fn letters_print_in_word_formulas() {
    let l: StepLetter = "[.a. d.]".parse().unwrap();
    let f = Formula::exists("x", Formula::letter(&l, "x"));
    assert_eq!(f.to_string(), "exists x. L\"[.a. d.]\"(x)");
}
