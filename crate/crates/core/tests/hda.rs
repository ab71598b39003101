use hdamso::corpus::{
    all_ipomsets, fig2_hda, fig3_ipomset, fig3_w2, hda_corpus, FIG2_HDA, FIG2_PATH, FIG2_PATH_SPLIT, SQUARE,
};
use hdamso::format::{parse_hda, parse_path, write_hda, FormatError};
use hdamso::hda::{
    check_run_labelling, enumerate_language, ev_of_path, find_run_labelling, hda_to_dot, is_accepting, is_empty,
    membership, normalize_path, path_ipomset, validate_path, HdaViolation, Path, PathError, Step,
};
use hdamso::ipomset::{isomorphic, IPomset};
use hdamso::steps::compose_word;
use proptest::prelude::*;

fn violations(text: &str) -> Vec<HdaViolation> {
    match parse_hda(text) {
        Err(FormatError::InvalidHda(r)) => r.violations,
        other => panic!("expected an HDA error, got {other:?}"),
    }
}

#[test]
fn fig2_reads_fig3() {
    let h = fig2_hda();
    assert_eq!(h.len(), 21);
    let path = parse_path(&h, FIG2_PATH).unwrap();
    assert!(validate_path(&h, &path).is_ok());
    assert!(is_accepting(&h, &path));
    assert_eq!(ev_of_path(&h, &path).unwrap(), fig3_w2());
    assert!(isomorphic(&path_ipomset(&h, &path).unwrap(), &fig3_ipomset()).is_some());

    let split = parse_path(&h, FIG2_PATH_SPLIT).unwrap();
    assert!(isomorphic(&path_ipomset(&h, &split).unwrap(), &fig3_ipomset()).is_some());
    assert_eq!(normalize_path(&h, &split).unwrap(), path);

    let m = membership(&h, &fig3_ipomset());
    assert!(m.accepted);
    let w = m.witness.unwrap();
    assert!(is_accepting(&h, &w));
    assert!(isomorphic(&path_ipomset(&h, &w).unwrap(), &fig3_ipomset()).is_some());
    assert!(!is_empty(&h));
}

#[test]
fn bad_paths() {
    let h = fig2_hda();
    let v1 = h.cell("v1").unwrap();
    let t1 = h.cell("t1").unwrap();
    let v2 = h.cell("v2").unwrap();
    assert!(validate_path(&h, &Path { start: v1, steps: vec![(Step::Up(1), t1)] }).is_ok());
    assert_eq!(
        validate_path(&h, &Path { start: v2, steps: vec![(Step::Up(1), t1)] }),
        Err(PathError::NotAFace { step: 1 })
    );
    assert_eq!(
        validate_path(&h, &Path { start: v1, steps: vec![(Step::Up(0), t1)] }),
        Err(PathError::EmptyStep { step: 1 })
    );
    assert!(parse_path(&h, "v1 +{b} t1").is_err());
}

#[test]
fn square_language() {
    let h = parse_hda(SQUARE).unwrap();
    let lang = enumerate_language(&h, 6);
    assert!(!lang.truncated);
    let expected: Vec<IPomset> = vec![IPomset::word(&["a", "b"]), IPomset::word(&["b", "a"]), IPomset::conclist(&["a", "b"])];
    assert_eq!(lang.members.len(), expected.len());
    for p in &expected {
        assert!(lang.members.contains(&p.canonical()));
        assert!(membership(&h, p).accepted);
    }
    assert!(!membership(&h, &IPomset::conclist(&["b", "a"])).accepted);
    assert!(!membership(&h, &IPomset::word(&["a"])).accepted);
}

#[test]
fn emptiness() {
    let unreachable = "cell v0:\ncell v1:\ncell e: a\nd0 {a} e -> v1\nd1 {a} e -> v0\nstart: v0\naccept: v1\n";
    assert!(is_empty(&parse_hda(unreachable).unwrap()));
    assert!(is_empty(&parse_hda("cell v:\nstart: v\naccept:\n").unwrap()));
    assert!(!is_empty(&parse_hda("cell v:\nstart: v\naccept: v\n").unwrap()));
}

#[test]
fn invalid_hdas_are_reported() {
    let v = violations("cell v:\ncell e: a\nd0 {a} e -> v\nstart: v\naccept: v\n");
    assert!(v.iter().any(|v| matches!(v, HdaViolation::MissingFace { upper: true, .. })));

    let v = violations("cell v:\ncell e: a\ncell f: b\nd0 {a} e -> f\nd1 {a} e -> v\nstart: v\naccept: v\n");
    assert!(v.iter().any(|v| matches!(v, HdaViolation::WrongFaceType { .. })));

    let v = violations("cell v:\ncell v:\nstart: v\naccept: v\n");
    assert!(v.contains(&HdaViolation::DuplicateCell("v".into())));

    // upper corner of the square reached two ways
    let broken = SQUARE.replace("d1 {b} tb1 -> v11", "d1 {b} tb1 -> v10");
    let v = violations(&broken);
    assert!(v.iter().any(|v| matches!(v, HdaViolation::NotCommuting { .. }) || matches!(v, HdaViolation::ConflictingFaces { .. })));
}

#[test]
fn write_then_parse() {
    for (name, h) in hda_corpus() {
        let again = parse_hda(&write_hda(&h)).unwrap();
        assert_eq!(again.to_raw(), h.to_raw(), "{name}");
    }
    assert_eq!(parse_hda(FIG2_HDA).unwrap().to_raw(), fig2_hda().to_raw());
}

#[test]
fn dot_output() {
    let dot = hda_to_dot(&fig2_hda());
    assert!(dot.starts_with("digraph hda {"));
    assert!(dot.trim_end().ends_with('}'));
    assert!(dot.contains("v8"));
    assert!(dot.contains("doublecircle"));
}

#[test]
fn runs_match_membership_on_small_ipomsets() {
    let candidates = all_ipomsets(&["a", "b"], 3);
    for (name, h) in hda_corpus().into_iter().filter(|(n, _)| *n != "fig2") {
        for p in candidates.iter().filter(|p| !p.is_identity()) {
            let accepted = membership(&h, p).accepted;
            let run = find_run_labelling(&h, p);
            assert_eq!(run.is_some(), accepted, "{name}: {}", p.canonical());
            if let Some(run) = run {
                assert!(check_run_labelling(&h, p, &run).is_empty(), "{name}");
            }
        }
    }
    let h = fig2_hda();
    let p = fig3_ipomset();
    let run = find_run_labelling(&h, &p).unwrap();
    assert!(check_run_labelling(&h, &p, &run).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerated_members_are_members(which in 0usize..13, steps in 1usize..6) {
        let (_, h) = hda_corpus().swap_remove(which);
        let lang = enumerate_language(&h, steps);
        for w in &lang.members {
            let p = compose_word(w.letters()).unwrap();
            let m = membership(&h, &p);
            prop_assert!(m.accepted);
            let path = m.witness.unwrap();
            prop_assert!(is_accepting(&h, &path));
            prop_assert!(isomorphic(&path_ipomset(&h, &path).unwrap(), &p).is_some());
        }
        prop_assert_eq!(lang.members.is_empty() && !lang.truncated, is_empty(&h));
    }
}
