use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn fixtures(test: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hdamso-cli-{}-{test}", std::process::id()));
    let out = hdamso(&dir, &["corpus", "write", dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn hdamso(dir: &Path, args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hdamso"))
        .args(args)
        .current_dir(if dir.exists() { dir } else { Path::new(".") })
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or_default()).unwrap();
    drop(input);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ipomset_commands() {
    let dir = fixtures("ipom");
    let out = hdamso(&dir, &["ipom", "decompose", "fig3.ipom"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), fs::read_to_string(dir.join("w2.stepw")).unwrap().trim());

    let out = hdamso(&dir, &["ipom", "decompose", "--indices", "fig3.ipom"], None);
    assert!(stdout(&out).contains("e3: St -inf Te 2"), "{}", stdout(&out));

    let glued = hdamso(&dir, &["ipom", "glue", "figure2_left.ipom", "figure2_right.ipom"], None);
    assert_eq!(glued.status.code(), Some(0));
    let iso = hdamso(&dir, &["ipom", "iso", "-", "figure2_glued.ipom"], Some(&glued.stdout));
    assert_eq!(iso.status.code(), Some(0));

    assert_eq!(hdamso(&dir, &["ipom", "subsumes", "chain1.ipom", "chain2.ipom"], None).status.code(), Some(0));
    assert_eq!(hdamso(&dir, &["ipom", "subsumes", "chain2.ipom", "chain1.ipom"], None).status.code(), Some(1));
    assert_eq!(stdout(&hdamso(&dir, &["ipom", "width", "conclist_ab.ipom"], None)).trim(), "2");
    assert_eq!(stdout(&hdamso(&dir, &["ipom", "relax", "ab.ipom"], None)).lines().count(), 3);
    fs::remove_dir_all(dir).ok();
}

#[test]
fn hda_commands() {
    let dir = fixtures("hda");
    let out = hdamso(&dir, &["hda", "member", "fig2.hda", "fig3.ipom"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("member\npath: "));
    assert_eq!(hdamso(&dir, &["hda", "member", "fig2.hda", "ab.ipom"], None).status.code(), Some(1));
    assert_eq!(hdamso(&dir, &["hda", "empty", "fig2.hda"], None).status.code(), Some(1));
    assert_eq!(hdamso(&dir, &["hda", "validate", "square.hda"], None).status.code(), Some(0));
    assert_eq!(stdout(&hdamso(&dir, &["hda", "lang", "square.hda"], None)).lines().count(), 3);
    assert!(stdout(&hdamso(&dir, &["hda", "dot", "fig2.hda"], None)).starts_with("digraph"));

    let sentence = hdamso(&dir, &["hda", "to-mso", "fig2.hda"], None);
    assert_eq!(sentence.status.code(), Some(0));
    let check = hdamso(&dir, &["mso", "check", "-", "fig3.ipom"], Some(&sentence.stdout));
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn logic_commands() {
    let dir = fixtures("mso");
    assert_eq!(hdamso(&dir, &["mso", "check", "phi_conc.mso", "conclist_ab.ipom"], None).status.code(), Some(0));
    assert_eq!(hdamso(&dir, &["mso", "check", "phi_conc.mso", "ab.ipom"], None).status.code(), Some(1));
    assert_eq!(hdamso(&dir, &["mso", "checkw", "w1.mso", "w1.stepw"], None).status.code(), Some(0));
    assert_eq!(hdamso(&dir, &["mso", "checkw", "w1.mso", "w2.stepw"], None).status.code(), Some(1));

    let out = hdamso(&dir, &["mso", "sat", "phi_conc.mso", "--k", "1"], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out).trim(), "unsat");
    let out = hdamso(&dir, &["mso", "sat", "phi_conc.mso", "--k", "2"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("sat\nword: "));

    assert_eq!(hdamso(&dir, &["mso", "member", "phi_conc.mso", "ab.ipom"], None).status.code(), Some(1));
    assert_eq!(hdamso(&dir, &["mso", "member", "--closed", "phi_conc.mso", "ab.ipom"], None).status.code(), Some(0));

    let out = hdamso(&dir, &["mso", "compile", "phi_conc.mso", "--k", "2"], None);
    assert!(stdout(&out).contains("accepting:"));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn translation_agrees_with_direct_check() {
    let dir = fixtures("translate");
    fs::write(dir.join("phi.mso"), "exists x, y. s(x) & c(x) & x < y & a(y)\n").unwrap();
    let direct = hdamso(&dir, &["mso", "check", "phi.mso", "fig3.ipom"], None);
    let psi = hdamso(&dir, &["mso", "translate", "phi.mso", "--k", "2", "--labels", "a,c,d"], None);
    assert_eq!(psi.status.code(), Some(0));
    for word in ["w1.stepw", "w2.stepw"] {
        let via_words = hdamso(&dir, &["mso", "checkw", "-", word], Some(&psi.stdout));
        assert_eq!(via_words.status.code(), direct.status.code(), "{word}");
    }
    assert_eq!(direct.status.code(), Some(0));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn errors_exit_with_two() {
    let dir = fixtures("errors");
    fs::write(dir.join("bad.ipom"), "events: x:a\nprec: x<q\n").unwrap();
    let out = hdamso(&dir, &["ipom", "validate", "bad.ipom"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown event 'q'"));
    assert_eq!(hdamso(&dir, &["ipom", "validate", "missing.ipom"], None).status.code(), Some(2));
    assert_eq!(hdamso(&dir, &["mso", "check", "-", "ab.ipom"], Some(b"exists x. a(x) &")).status.code(), Some(2));
    assert_eq!(hdamso(&dir, &["mso", "check", "-", "ab.ipom"], Some(b"a(x)")).status.code(), Some(2));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn corpus_round_trip() {
    let out = hdamso(Path::new("."), &["corpus", "check", "--max-events", "2"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 13);
}
