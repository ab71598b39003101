//! Worked fixtures and exhaustive generators used by the tests, the book
//! and the `corpus` CLI command.

use crate::format::{parse_hda, parse_ipom};
use crate::hda::Hda;
use crate::ipomset::{IPomset, Label};
use crate::mso::{concurrency_formula, parse_formula, Formula, Signature};
use crate::steps::{composable, enumerate_omega, full_mask, sequences, StepKind, StepLetter, StepWord};

/// The two-dimensional HDA with three squares.
pub const FIG2_HDA: &str = "\
cell v1:
cell v2:
cell v3:
cell v4:
cell v5:
cell v6:
cell v7:
cell v8:
cell t1: a
cell t2: a
cell t3: c
cell t4: c
cell t5: d
cell t6: a
cell t7: a
cell t8: d
cell t9: a
cell t10: d
cell q1: a c
cell q2: a d
cell q3: a d
d0 {a} t1 -> v1
d1 {a} t1 -> v3
d0 {a} t2 -> v2
d1 {a} t2 -> v4
d0 {c} t3 -> v1
d1 {c} t3 -> v2
d0 {c} t4 -> v3
d1 {c} t4 -> v4
d0 {d} t5 -> v2
d1 {d} t5 -> v5
d0 {a} t6 -> v5
d1 {a} t6 -> v7
d0 {a} t7 -> v4
d1 {a} t7 -> v6
d0 {d} t8 -> v4
d1 {d} t8 -> v7
d0 {a} t9 -> v7
d1 {a} t9 -> v8
d0 {d} t10 -> v6
d1 {d} t10 -> v8
d0 {a} q1 -> t3
d1 {a} q1 -> t4
d0 {c} q1 -> t1
d1 {c} q1 -> t2
d0 {a} q2 -> t5
d1 {a} q2 -> t8
d0 {d} q2 -> t2
d1 {d} q2 -> t6
d0 {a} q3 -> t8
d1 {a} q3 -> t10
d0 {d} q3 -> t7
d1 {d} q3 -> t9
start: t3
accept: v8
";

/// The accepting path read in the worked membership example.
pub const FIG2_PATH: &str = "t3 +{a} q1 -{c} t2 +{d} q2 -{a} t8 +{a} q3 -{a,d} v8";

/// The same run with the last downstep split in two.
pub const FIG2_PATH_SPLIT: &str = "t3 +{a} q1 -{c} t2 +{d} q2 -{a} t8 +{a} q3 -{a} t10 -{d} v8";

/// Two events labelled `a`, a source `c` and a `d`.
pub const FIG3_IPOM: &str = "\
events: e1:a, e2:a, e3:c, e4:d
sources: e3
targets:
prec: e1<e2, e3<e4, e3<e2
evord: e1~>e3, e1~>e4, e2~>e4
";

/// Sparse step decomposition of [`FIG3_IPOM`].
pub const FIG3_W2: &str = "[a. .c.][.a. .c][.a. d.][.a .d.][a. .d.][.a .d]";

/// A non-sparse coherent word for the same ipomset.
pub const FIG3_W1: &str = "[a. .c.][.a. .c][.a. d.][.a .d.][a. .d.][.a .d.][.d]";

pub const GLUE_LEFT: &str = "\
events: a:a, b:b, c:c
targets: c
prec: b<c
evord: c~>a, a~>b
";

pub const GLUE_RIGHT: &str = "\
events: d:d, c:c
sources: c
evord: d~>c
";

pub const GLUE_RESULT: &str = "\
events: a:a, b:b, c:c, d:d
prec: a<d, b<c, b<d
evord: d~>c, c~>a, a~>b
";

/// `•acb`, `[•a‖c]b` and `[•a<b‖c]`, each subsumed by the next.
pub const EX1_CHAIN: [&str; 3] = [
    "events: a:a, c:c, b:b\nsources: a\nprec: a<c, c<b, a<b\n",
    "events: a:a, c:c, b:b\nsources: a\nprec: a<b, c<b\nevord: a~>c\n",
    "events: a:a, b:b, c:c\nsources: a\nprec: a<b\nevord: a~>c, b~>c\n",
];

pub fn fig2_hda() -> Hda {
    parse_hda(FIG2_HDA).expect("fixture parses")
}

pub fn fig3_ipomset() -> IPomset {
    parse_ipom(FIG3_IPOM).expect("fixture parses")
}

pub fn fig3_w1() -> StepWord {
    FIG3_W1.parse().expect("fixture parses")
}

pub fn fig3_w2() -> StepWord {
    FIG3_W2.parse().expect("fixture parses")
}

pub fn ipom(text: &str) -> IPomset {
    parse_ipom(text).expect("fixture parses")
}

/// The seven-position sentence satisfied by exactly one word.
pub fn w1_sentence() -> Formula {
    let w = fig3_w1();
    let vars: Vec<String> = (1..=w.len()).map(|i| format!("y{i}")).collect();
    let mut parts: Vec<Formula> = w.letters().iter().zip(&vars).map(|(l, v)| Formula::letter(l, v)).collect();
    parts.extend(vars.windows(2).map(|p| Formula::succ(&p[0], &p[1])));
    parts.push(Formula::forall("y", Formula::or_all(vars.iter().map(|v| Formula::equal("y", v)))));
    Formula::exists_many(&vars, Formula::and_all(parts))
}

/// Sentences over labels `a` and `b` used by the translation and automaton
/// suites.
pub const SENTENCES: [&str; 24] = [
    "true",
    "false",
    "exists x. a(x)",
    "exists x. b(x) & s(x)",
    "forall x. a(x) | b(x)",
    "exists x. t(x)",
    "forall x. s(x) -> t(x)",
    "exists x, y. a(x) & b(y) & !(x < y) & !(y < x)",
    "exists x, y. x < y",
    "exists x, y. x ~> y & a(y)",
    "forall x, y. x < y -> a(x)",
    "exists x. !s(x) & !t(x)",
    "exists x, y. x -> y & b(y)",
    "forall x. exists y. x = y | x < y | y < x",
    "exists x, y, z. x < y & y < z",
    "!(exists x. true)",
    "exists x, y. x ~> y & !(x < y) & s(y) & !s(x)",
    "forall x. a(x) -> exists y. b(y) & x < y",
    "exists X. forall x. (x in X <-> a(x)) & (x in X -> !t(x))",
    "exists X. (exists x. x in X) & forall x, y. x in X & x < y -> y in X",
    "forall x, y. x ~> y -> !(y ~> x)",
    "exists x, y. s(x) & t(y) & x < y",
    "forall x. s(x) | exists y. y < x",
    "exists x. forall y. x = y | x ~> y",
];

pub fn sentence_corpus() -> Vec<Formula> {
    let mut out: Vec<Formula> =
        SENTENCES.iter().map(|s| parse_formula(s, Signature::IPomset).expect("corpus sentence parses")).collect();
    out.push(concurrency_formula("a", "b"));
    out
}

/// All coherent words of length `1..=max_len` over `alphabet`, in
/// length-lexicographic order of alphabet indices.
pub fn coherent_words(alphabet: &[StepLetter], max_len: usize) -> Vec<Vec<StepLetter>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = (0..alphabet.len()).map(|i| vec![i]).collect();
    for len in 1..=max_len {
        out.extend(layer.iter().map(|w| w.iter().map(|&i| alphabet[i].clone()).collect()));
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for w in &layer {
            let last = &alphabet[*w.last().unwrap()];
            for (j, l) in alphabet.iter().enumerate() {
                if composable(last, l) {
                    let mut v = w.clone();
                    v.push(j);
                    next.push(v);
                }
            }
        }
        layer = next;
    }
    out
}

/// `Ω≤k` over `labels` without `id_∅`.
pub fn omega_without_empty(labels: &[&str], k: usize) -> Vec<StepLetter> {
    let labels: Vec<Label> = labels.iter().map(|l| Label::new(l)).collect();
    enumerate_omega(&labels, k, true).into_iter().filter(|l| !l.carrier().is_empty()).collect()
}

/// Calls `f` on every alternating coherent word without identity letters
/// whose composition has between 1 and `max_events` events; each interval
/// ipomset that is not an identity arises from exactly one such word.
pub fn for_each_sparse_word(labels: &[Label], max_events: usize, f: &mut dyn FnMut(&[StepLetter], usize)) {
    fn rec(labels: &[Label], max: usize, word: &mut Vec<StepLetter>, events: usize, f: &mut dyn FnMut(&[StepLetter], usize)) {
        f(word, events);
        let last = word.last().unwrap().clone();
        if last.is_starter() {
            let u = last.carrier().to_vec();
            for b in 1..=full_mask(u.len()) {
                word.push(StepLetter::new(u.clone(), StepKind::Terminator, b));
                rec(labels, max, word, events, f);
                word.pop();
            }
        } else {
            let kept: Vec<Label> =
                last.carrier().iter().enumerate().filter(|(i, _)| last.delta() >> i & 1 == 0).map(|(_, l)| l.clone()).collect();
            for extra in 1..=max - events {
                for (carrier, delta) in interleavings(&kept, labels, extra) {
                    word.push(StepLetter::new(carrier, StepKind::Starter, delta));
                    rec(labels, max, word, events + extra, f);
                    word.pop();
                }
            }
        }
    }
    for m in 1..=max_events {
        for carrier in sequences(labels, m) {
            for delta in 1..=full_mask(m) {
                let mut word = vec![StepLetter::new(carrier.clone(), StepKind::Starter, delta)];
                rec(labels, max_events, &mut word, m, f);
                let mut word = vec![StepLetter::new(carrier.clone(), StepKind::Terminator, delta)];
                rec(labels, max_events, &mut word, m, f);
            }
        }
    }
}

/// Ways to insert `extra` new labelled rows into `kept`; the mask marks the
/// new rows.
fn interleavings(kept: &[Label], labels: &[Label], extra: usize) -> Vec<(Vec<Label>, u32)> {
    let total = kept.len() + extra;
    let mut out = Vec::new();
    for mask in 1..=full_mask(total) {
        if mask.count_ones() as usize != extra {
            continue;
        }
        for new in sequences(labels, extra) {
            let mut carrier = Vec::with_capacity(total);
            let (mut k, mut n) = (0, 0);
            for r in 0..total {
                if mask >> r & 1 == 1 {
                    carrier.push(new[n].clone());
                    n += 1;
                } else {
                    carrier.push(kept[k].clone());
                    k += 1;
                }
            }
            out.push((carrier, mask));
        }
    }
    out
}

/// Every interval ipomset with at most `max_events` events over `labels`,
/// one per isomorphism class, including `id_∅` and the other identities.
pub fn all_ipomsets(labels: &[&str], max_events: usize) -> Vec<IPomset> {
    let labels: Vec<Label> = labels.iter().map(|l| Label::new(l)).collect();
    let mut out = vec![IPomset::empty()];
    for m in 1..=max_events {
        for carrier in sequences(&labels, m) {
            out.push(StepLetter::identity(carrier).to_ipomset());
        }
    }
    for_each_sparse_word(&labels, max_events, &mut |w, _| {
        out.push(crate::steps::compose_word(w).expect("generated words are coherent"));
    });
    out
}

/// Small HDAs for the round-trip suite, with the three-square one last.
pub const HDAS: [(&str, &str); 13] = [
    ("point", "cell v:\nstart: v\naccept: v\n"),
    ("edge", "cell v0:\ncell v1:\ncell e: a\nd0 {a} e -> v0\nd1 {a} e -> v1\nstart: v0\naccept: v1\n"),
    ("loop", "cell v:\ncell e: a\nd0 {a} e -> v\nd1 {a} e -> v\nstart: v\naccept: v\n"),
    ("square", SQUARE),
    ("square-edges", "cell v00:\ncell v10:\ncell v01:\ncell v11:\ncell ta0: a\ncell ta1: a\ncell tb0: b\ncell tb1: b\ncell q: a b\n\
d0 {a} ta0 -> v00\nd1 {a} ta0 -> v10\nd0 {a} ta1 -> v01\nd1 {a} ta1 -> v11\n\
d0 {b} tb0 -> v00\nd1 {b} tb0 -> v01\nd0 {b} tb1 -> v10\nd1 {b} tb1 -> v11\n\
d0 {a} q -> tb0\nd1 {a} q -> tb1\nd0 {b} q -> ta0\nd1 {b} q -> ta1\nstart: tb0\naccept: ta1\n"),
    ("aa-loop", AA_LOOP),
    ("aa-loop-interfaces", "cell v:\ncell e: a\ncell q: a a\nd0 {a} e -> v\nd1 {a} e -> v\n\
d0 {#1} q -> e\nd1 {#1} q -> e\nd0 {#2} q -> e\nd1 {#2} q -> e\nstart: e\naccept: q\n"),
    ("identity-a", "cell v0:\ncell v1:\ncell e: a\nd0 {a} e -> v0\nd1 {a} e -> v1\nstart: e\naccept: e\n"),
    ("two-squares", "cell v00:\ncell v10:\ncell v01:\ncell v11:\ncell ta0: a\ncell ta1: a\ncell tb0: b\ncell tb1: b\ncell q: a b\n\
d0 {a} ta0 -> v00\nd1 {a} ta0 -> v10\nd0 {a} ta1 -> v01\nd1 {a} ta1 -> v11\n\
d0 {b} tb0 -> v00\nd1 {b} tb0 -> v01\nd0 {b} tb1 -> v10\nd1 {b} tb1 -> v11\n\
d0 {a} q -> tb0\nd1 {a} q -> tb1\nd0 {b} q -> ta0\nd1 {b} q -> ta1\n\
cell u00:\ncell u10:\ncell u01:\ncell u11:\ncell s0: a\ncell s1: a\ncell r0: a\ncell r1: a\ncell p: a a\n\
d0 {a} s0 -> u00\nd1 {a} s0 -> u10\nd0 {a} s1 -> u01\nd1 {a} s1 -> u11\n\
d0 {a} r0 -> u00\nd1 {a} r0 -> u01\nd0 {a} r1 -> u10\nd1 {a} r1 -> u11\n\
d0 {#1} p -> r0\nd1 {#1} p -> r1\nd0 {#2} p -> s0\nd1 {#2} p -> s1\nstart: v00, u00\naccept: v11, u11\n"),
    ("ab-cycle", "cell v0:\ncell v1:\ncell ea: a\ncell eb: b\nd0 {a} ea -> v0\nd1 {a} ea -> v1\n\
d0 {b} eb -> v1\nd1 {b} eb -> v0\nstart: v0\naccept: v0\n"),
    ("square-identity", "cell v00:\ncell v10:\ncell v01:\ncell v11:\ncell ta0: a\ncell ta1: a\ncell tb0: b\ncell tb1: b\ncell q: a b\n\
d0 {a} ta0 -> v00\nd1 {a} ta0 -> v10\nd0 {a} ta1 -> v01\nd1 {a} ta1 -> v11\n\
d0 {b} tb0 -> v00\nd1 {b} tb0 -> v01\nd0 {b} tb1 -> v10\nd1 {b} tb1 -> v11\n\
d0 {a} q -> tb0\nd1 {a} q -> tb1\nd0 {b} q -> ta0\nd1 {b} q -> ta1\nstart: q\naccept: q, v11\n"),
    ("torus", "cell v:\ncell ea: a\ncell eb: b\ncell q: a b\nd0 {a} ea -> v\nd1 {a} ea -> v\nd0 {b} eb -> v\nd1 {b} eb -> v\n\
d0 {a} q -> eb\nd1 {a} q -> eb\nd0 {b} q -> ea\nd1 {b} q -> ea\nstart: v\naccept: v\n"),
    ("fig2", FIG2_HDA),
];

/// The filled square `a‖b` from corner to corner.
pub const SQUARE: &str = "\
cell v00:
cell v10:
cell v01:
cell v11:
cell ta0: a
cell ta1: a
cell tb0: b
cell tb1: b
cell q: a b
d0 {a} ta0 -> v00
d1 {a} ta0 -> v10
d0 {a} ta1 -> v01
d1 {a} ta1 -> v11
d0 {b} tb0 -> v00
d1 {b} tb0 -> v01
d0 {b} tb1 -> v10
d1 {b} tb1 -> v11
d0 {a} q -> tb0
d1 {a} q -> tb1
d0 {b} q -> ta0
d1 {b} q -> ta1
start: v00
accept: v11
";

/// One vertex, an `a` loop and a square on it.
pub const AA_LOOP: &str = "\
cell v:
cell e: a
cell q: a a
d0 {a} e -> v
d1 {a} e -> v
d0 {#1} q -> e
d1 {#1} q -> e
d0 {#2} q -> e
d1 {#2} q -> e
start: v
accept: v
";

pub fn hda_corpus() -> Vec<(&'static str, Hda)> {
    HDAS.iter().map(|(name, text)| (*name, parse_hda(text).expect("fixture parses"))).collect()
}
