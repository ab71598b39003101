use std::sync::OnceLock;

use hdamso::compile::{
    eval_macro, hda_to_mso, in_defined_language, macro_oracle, omega_table, sat, sentence_automaton, translate,
    word_mso_to_nfa, CompileOptions, MacroPredicate, SatError, SatOptions, SatResult, StepNfa, TranslateError,
};
use hdamso::corpus::{
    all_ipomsets, coherent_words, fig3_ipomset, fig3_w1, hda_corpus, omega_without_empty, sentence_corpus, w1_sentence,
};
use hdamso::hda::membership;
use hdamso::ipomset::{width, IPomset, Label};
use hdamso::mso::{concurrency_formula, eval_ipomset, eval_word, parse_formula, Formula, Signature, Valuation};
use hdamso::steps::{compose_word, StepIndex, StepLetter};
use proptest::prelude::*;

fn ab() -> Vec<Label> {
    vec![Label::new("a"), Label::new("b")]
}

fn words() -> &'static [Vec<StepLetter>] {
    static WORDS: OnceLock<Vec<Vec<StepLetter>>> = OnceLock::new();
    WORDS.get_or_init(|| coherent_words(&omega_without_empty(&["a", "b"], 2), 3))
}

/// Each corpus sentence with its translation and automaton at k = 2.
fn compiled() -> &'static [(Formula, Formula, StepNfa)] {
    static ALL: OnceLock<Vec<(Formula, Formula, StepNfa)>> = OnceLock::new();
    ALL.get_or_init(|| {
        let table = omega_table(&ab(), 2).unwrap();
        sentence_corpus()
            .into_iter()
            .map(|phi| {
                let psi = translate(&phi, 2, &ab()).unwrap();
                let nfa = word_mso_to_nfa(&psi, table.letters(), CompileOptions::default()).unwrap();
                (phi, psi, nfa)
            })
            .collect()
    })
}

fn ipom(text: &str) -> Formula {
    parse_formula(text, Signature::IPomset).unwrap()
}

#[test]
fn alphabet_table() {
    let t = omega_table(&ab(), 2).unwrap();
    assert_eq!(t.letters().len(), 34);
    assert_eq!(t.k(), 2);
    for &(i, j) in t.composable_pairs() {
        assert!(hdamso::steps::composable(&t.letters()[i], &t.letters()[j]));
    }
}

#[test]
fn translation_rejects_open_formulas() {
    let f = ipom("a(x)");
    assert!(matches!(translate(&f, 2, &ab()), Err(TranslateError::NotASentence(_))));
    let w = w1_sentence();
    assert!(matches!(translate(&w, 2, &ab()), Err(TranslateError::Sort(_))));
}

#[test]
fn translation_matches_on_fig3() {
    let labels: Vec<Label> = ["a", "c", "d"].iter().map(|l| Label::new(l)).collect();
    let phi = ipom("exists x, y. s(x) & c(x) & x < y & a(y) & !t(y)");
    let psi = translate(&phi, 2, &labels).unwrap();
    assert!(eval_word(&psi, fig3_w1().letters(), &Valuation::new()).unwrap());
    assert!(eval_ipomset(&phi, &fig3_ipomset(), &Valuation::new()).unwrap());
    let incoherent: Vec<StepLetter> = vec!["[a.]".parse().unwrap(), "[.c]".parse().unwrap()];
    assert!(!eval_word(&psi, &incoherent, &Valuation::new()).unwrap());
}

#[test]
fn concurrency_needs_width_two() {
    let phi = concurrency_formula("a", "b");
    assert!(!sat(&phi, &SatOptions::new(1)).unwrap().is_sat());
    match sat(&phi, &SatOptions::new(2)).unwrap() {
        SatResult::Sat { model, word } => {
            assert!(eval_ipomset(&phi, &model, &Valuation::new()).unwrap());
            assert_eq!(width(&model), 2);
            assert!(!word.is_empty());
        }
        SatResult::Unsat => panic!("expected a model"),
    }
}

#[test]
fn sat_fixtures() {
    assert!(!sat(&Formula::False, &SatOptions::new(2)).unwrap().is_sat());
    assert!(!sat(&ipom("exists x. s(x) & !s(x)"), &SatOptions::new(2)).unwrap().is_sat());
    assert!(sat(&ipom("exists x, y, z. x < y & y < z & a(z)"), &SatOptions::new(1)).unwrap().is_sat());
    assert!(!sat(&ipom("exists x, y. x < y & y < x"), &SatOptions::new(2)).unwrap().is_sat());
    let tiny = SatOptions { compile: CompileOptions { max_states: 1 }, ..SatOptions::new(2) };
    assert!(matches!(sat(&concurrency_formula("a", "b"), &tiny), Err(SatError::Automaton(_))));
}

#[test]
fn closure_membership() {
    let phi = concurrency_formula("a", "b");
    let ab = IPomset::word(&["a", "b"]);
    assert!(!in_defined_language(&phi, 2, &ab, false).unwrap());
    assert!(in_defined_language(&phi, 2, &ab, true).unwrap());
    assert!(!in_defined_language(&phi, 1, &ab, true).unwrap());
}

#[test]
fn automaton_rendering() {
    let nfa = sentence_automaton(&ipom("exists x. a(x)"), &SatOptions::new(1)).unwrap();
    let word = nfa.shortest_word(|_| true, |_| true).unwrap();
    assert!(nfa.accepts(&word));
    assert!(compose_word(&word).is_ok());
    let lines = nfa.to_lines();
    assert!(lines.contains("initial:"));
    assert!(lines.contains("accepting:"));
    assert!(nfa.to_dot().starts_with("digraph nfa {"));
    let starts = nfa.shortest_word(|l| l.is_starter(), |l| l.is_terminator()).unwrap();
    assert!(starts[0].is_starter() && starts.last().unwrap().is_terminator());
}

#[test]
fn w1_automaton() {
    let letters: Vec<StepLetter> = {
        let mut v = fig3_w1().letters().to_vec();
        v.sort();
        v.dedup();
        v
    };
    let nfa = word_mso_to_nfa(&w1_sentence(), &letters, CompileOptions::default()).unwrap();
    assert!(nfa.accepts(fig3_w1().letters()));
    assert_eq!(nfa.shortest_word(|_| true, |_| true).unwrap(), fig3_w1().letters());
}

#[test]
fn fig3_macro_verdicts() {
    use MacroPredicate as M;
    let p = fig3_ipomset();
    let e = |n: &str| p.event(n).unwrap();
    for (pred, x, y, expected) in [
        (M::StLtSt, "e1", "e4", true),
        (M::StLtSt, "e3", "e1", true),
        (M::StLtSt, "e2", "e1", false),
        (M::TeLtSt, "e3", "e2", true),
        (M::TeLtSt, "e1", "e4", false),
        (M::StEqSt, "e4", "e4", true),
        (M::StEqSt, "e3", "e3", false),
        (M::TeEqTe, "e2", "e4", true),
        (M::MinSt, "e1", "e1", true),
        (M::MaxTe, "e2", "e2", true),
        (M::StSuccTe, "e3", "e4", true),
        (M::TeSuccSt, "e2", "e2", true),
        (M::TeSuccSt, "e4", "e4", false),
    ] {
        assert_eq!(eval_macro(&p, pred, e(x), e(y)).unwrap(), expected, "{pred} on {x}, {y}");
        assert_eq!(macro_oracle(&p, pred, e(x), e(y)), expected, "{pred} on {x}, {y}");
    }
    let idx = hdamso::steps::st_te_indices(&p);
    assert_eq!(idx.start[e("e4")], StepIndex::At(3));
}

#[test]
fn hda_sentences_on_small_ipomsets() {
    let candidates = all_ipomsets(&["a", "b"], 2);
    for (name, h) in hda_corpus().into_iter().filter(|(n, _)| *n != "fig2") {
        let bundle = hda_to_mso(&h);
        assert!(bundle.sentence.is_sentence());
        assert_eq!(bundle.upsteps, h.upsteps());
        for p in &candidates {
            let by_logic = eval_ipomset(&bundle.sentence, p, &Valuation::new()).unwrap();
            assert_eq!(by_logic, membership(&h, p).accepted, "{name}: {}", p.canonical());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn translation_agrees_with_composition(f in 0usize..25, i in 0usize..2000) {
        let (phi, psi, _) = &compiled()[f];
        let w = &words()[i % words().len()];
        let p = compose_word(w).unwrap();
        prop_assert_eq!(
            eval_word(psi, w, &Valuation::new()).unwrap(),
            eval_ipomset(phi, &p, &Valuation::new()).unwrap()
        );
    }

    #[test]
    fn automaton_agrees_with_word_semantics(f in 0usize..25, i in 0usize..2000) {
        let (_, psi, nfa) = &compiled()[f];
        let w = &words()[i % words().len()];
        prop_assert_eq!(nfa.accepts(w), eval_word(psi, w, &Valuation::new()).unwrap());
    }

    #[test]
    fn macros_match_their_oracle(i in 0usize..2000, x in 0usize..6, y in 0usize..6) {
        let p = compose_word(&words()[i % words().len()]).unwrap();
        let (x, y) = (x % p.len(), y % p.len());
        for pred in MacroPredicate::ALL {
            prop_assert_eq!(eval_macro(&p, pred, x, y).unwrap(), macro_oracle(&p, pred, x, y), "{}", pred);
        }
    }
}
