//! Text formats for ipomsets (`.ipom`), HDAs (`.hda`) and HDA paths.
//!
//! ```text
//! # .ipom
//! events: e1:a, e2:a, e3:c, e4:d
//! sources: e3
//! targets:
//! prec: e1<e2, e3<e4, e3<e2
//! evord: e1~>e3, e1~>e4, e2~>e4
//!
//! # .hda
//! cell v1:
//! cell q1: a c
//! d0 {a} q1 -> t3
//! start: t3
//! accept: v8
//! ```
//!
//! Face and step event sets name rows by label, or by `#i` (1-based) when
//! a label occurs twice in the cell.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::hda::{Hda, HdaReport, Path, RawCell, RawFace, RawHda, Step};
use crate::ipomset::{IPomset, Label, RawIPomset, ValidationReport};
use crate::steps::{is_label_byte, RowMask};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid ipomset: {0}")]
    InvalidIPomset(ValidationReport),
    #[error("invalid HDA: {0}")]
    InvalidHda(HdaReport),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = strip_comment(l).trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// `#` starts a comment except inside `{...}`, where it names a row.
fn strip_comment(l: &str) -> &str {
    let mut depth = 0;
    for (i, c) in l.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            '#' if depth <= 0 => return &l[..i],
            _ => {}
        }
    }
    l
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| is_label_byte(b) || b == b'\'')
}

fn list(body: &str) -> impl Iterator<Item = &str> {
    body.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_raw_ipom(text: &str) -> Result<RawIPomset, FormatError> {
    let mut raw = RawIPomset::default();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut deferred = Vec::new();
    let mut seen_events = false;
    for (line, l) in content_lines(text) {
        let Some((key, body)) = l.split_once(':') else {
            return Err(syntax(line, "expected 'key: ...'"));
        };
        match key.trim() {
            "events" => {
                if seen_events {
                    return Err(syntax(line, "duplicate events line"));
                }
                seen_events = true;
                for item in list(body) {
                    let Some((name, label)) = item.split_once(':') else {
                        return Err(syntax(line, format!("expected name:label, found '{item}'")));
                    };
                    let (name, label) = (name.trim(), label.trim());
                    if !is_name(name) || !is_name(label) {
                        return Err(syntax(line, format!("bad event '{item}'")));
                    }
                    index.entry(name.to_string()).or_insert(raw.events.len());
                    raw.events.push((name.to_string(), Label::new(label)));
                }
            }
            k @ ("sources" | "targets" | "prec" | "evord") => deferred.push((line, k.to_string(), body.to_string())),
            other => return Err(syntax(line, format!("unknown key '{other}'"))),
        }
    }
    let event = |line: usize, name: &str| {
        index.get(name.trim()).copied().ok_or_else(|| syntax(line, format!("unknown event '{}'", name.trim())))
    };
    for (line, key, body) in deferred {
        for item in list(&body) {
            match key.as_str() {
                "sources" => raw.sources.push(event(line, item)?),
                "targets" => raw.targets.push(event(line, item)?),
                "prec" => {
                    let Some((a, b)) = item.split_once('<') else {
                        return Err(syntax(line, format!("expected a<b, found '{item}'")));
                    };
                    raw.precedence.push((event(line, a)?, event(line, b)?));
                }
                _ => {
                    let Some((a, b)) = item.split_once("~>") else {
                        return Err(syntax(line, format!("expected a~>b, found '{item}'")));
                    };
                    raw.event_order.push((event(line, a)?, event(line, b)?));
                }
            }
        }
    }
    Ok(raw)
}

pub fn parse_ipom(text: &str) -> Result<IPomset, FormatError> {
    let raw = parse_raw_ipom(text)?;
    IPomset::from_raw(&raw).map_err(FormatError::InvalidIPomset)
}

/// Writes `p` in `.ipom` syntax, listing the order relations in event order.
pub fn write_ipom(p: &IPomset) -> String {
    let n = p.len();
    let mut out = String::new();
    let events: Vec<String> = (0..n).map(|e| format!("{}:{}", p.name(e), p.label(e))).collect();
    let _ = writeln!(out, "events: {}", events.join(", "));
    let names = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&e| f(e)).map(|e| p.name(e).to_string()).collect::<Vec<_>>().join(", ");
    let _ = writeln!(out, "sources: {}", names(&|e| p.is_source(e)));
    let _ = writeln!(out, "targets: {}", names(&|e| p.is_target(e)));
    let pairs = |rel: &dyn Fn(usize, usize) -> bool, op: &str| {
        let mut v = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if rel(a, b) {
                    v.push(format!("{}{op}{}", p.name(a), p.name(b)));
                }
            }
        }
        v.join(", ")
    };
    let _ = writeln!(out, "prec: {}", pairs(&|a, b| p.precedes(a, b), "<"));
    let _ = writeln!(out, "evord: {}", pairs(&|a, b| p.event_order(a, b), "~>"));
    out
}

/// Resolves `{a,c}` or `{#1,#2}` against `ev`.
fn parse_rows(line: usize, text: &str, ev: &[Label]) -> Result<RowMask, FormatError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| syntax(line, format!("expected {{...}}, found '{text}'")))?;
    let mut mask = 0;
    for item in list(inner) {
        let row = if let Some(num) = item.strip_prefix('#') {
            let i: usize = num.parse().map_err(|_| syntax(line, format!("bad row '{item}'")))?;
            if i == 0 || i > ev.len() {
                return Err(syntax(line, format!("row {i} out of range")));
            }
            i - 1
        } else {
            let rows: Vec<usize> = (0..ev.len()).filter(|&r| ev[r].as_str() == item).collect();
            match rows.as_slice() {
                [r] => *r,
                [] => return Err(syntax(line, format!("no event labelled '{item}'"))),
                _ => return Err(syntax(line, format!("label '{item}' is ambiguous, use #row"))),
            }
        };
        if mask >> row & 1 == 1 {
            return Err(syntax(line, format!("row {} listed twice", row + 1)));
        }
        mask |= 1 << row;
    }
    Ok(mask)
}

pub fn parse_raw_hda(text: &str) -> Result<RawHda, FormatError> {
    let mut raw = RawHda::default();
    let mut faces = Vec::new();
    for (line, l) in content_lines(text) {
        if let Some(rest) = l.strip_prefix("cell ") {
            let (name, ev) = rest.split_once(':').ok_or_else(|| syntax(line, "expected 'cell name: labels'"))?;
            let name = name.trim();
            if !is_name(name) {
                return Err(syntax(line, format!("bad cell name '{name}'")));
            }
            let mut labels = Vec::new();
            for l in ev.split_whitespace() {
                if !is_name(l) {
                    return Err(syntax(line, format!("bad label '{l}'")));
                }
                labels.push(Label::new(l));
            }
            raw.cells.push(RawCell { name: name.to_string(), ev: labels });
        } else if l.starts_with("d0 ") || l.starts_with("d1 ") {
            let upper = l.starts_with("d1");
            let rest = &l[3..];
            let close = rest.find('}').ok_or_else(|| syntax(line, "expected '{...}'"))?;
            let rows = &rest[..=close];
            let (cell, target) =
                rest[close + 1..].split_once("->").ok_or_else(|| syntax(line, "expected 'cell -> target'"))?;
            faces.push((line, upper, rows.to_string(), cell.trim().to_string(), target.trim().to_string()));
        } else if let Some((key, body)) = l.split_once(':') {
            let names = body.split([',', ' ']).map(str::trim).filter(|s| !s.is_empty()).map(String::from);
            match key.trim() {
                "start" => raw.start.extend(names),
                "accept" => raw.accept.extend(names),
                other => return Err(syntax(line, format!("unknown key '{other}'"))),
            }
        } else {
            return Err(syntax(line, "expected a cell, face, start or accept line"));
        }
    }
    let ev: HashMap<&str, &[Label]> = raw.cells.iter().map(|c| (c.name.as_str(), c.ev.as_slice())).collect();
    let mut resolved = Vec::new();
    for (line, upper, rows, cell, target) in faces {
        let cell_ev = ev.get(cell.as_str()).ok_or_else(|| syntax(line, format!("unknown cell '{cell}'")))?;
        let rows = parse_rows(line, &rows, cell_ev)?;
        resolved.push(RawFace { cell, upper, rows, target });
    }
    raw.faces = resolved;
    Ok(raw)
}

pub fn parse_hda(text: &str) -> Result<Hda, FormatError> {
    let raw = parse_raw_hda(text)?;
    Hda::from_raw(&raw).map_err(FormatError::InvalidHda)
}

fn rows_text(ev: &[Label], rows: RowMask) -> String {
    let items: Vec<String> = (0..ev.len())
        .filter(|r| rows >> r & 1 == 1)
        .map(|r| if ev.iter().filter(|l| **l == ev[r]).count() == 1 { ev[r].to_string() } else { format!("#{}", r + 1) })
        .collect();
    format!("{{{}}}", items.join(","))
}

/// Writes `h` in `.hda` syntax with singleton faces only.
pub fn write_hda(h: &Hda) -> String {
    let raw = h.to_raw();
    let mut out = String::new();
    for c in &raw.cells {
        let ev: Vec<&str> = c.ev.iter().map(|l| l.as_str()).collect();
        let _ = writeln!(out, "cell {}:{}{}", c.name, if ev.is_empty() { "" } else { " " }, ev.join(" "));
    }
    for f in &raw.faces {
        let q = h.cell(&f.cell).unwrap();
        let _ = writeln!(out, "d{} {} {} -> {}", f.upper as u8, rows_text(h.ev(q), f.rows), f.cell, f.target);
    }
    let _ = writeln!(out, "start: {}", raw.start.join(", "));
    let _ = writeln!(out, "accept: {}", raw.accept.join(", "));
    out
}

/// Parses `t3 +{a} q1 -{c} t2 ...`.
pub fn parse_path(h: &Hda, text: &str) -> Result<Path, FormatError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let cell = |name: &str| h.cell(name).ok_or_else(|| syntax(1, format!("unknown cell '{name}'")));
    let Some(first) = tokens.first() else {
        return Err(syntax(1, "empty path"));
    };
    let mut path = Path::single(cell(first)?);
    let mut cur = path.start;
    let mut i = 1;
    while i < tokens.len() {
        let step = tokens[i];
        let next = cell(tokens.get(i + 1).ok_or_else(|| syntax(1, "step without a target cell"))?)?;
        let s = if let Some(rows) = step.strip_prefix('+') {
            Step::Up(parse_rows(1, rows, h.ev(next))?)
        } else if let Some(rows) = step.strip_prefix('-') {
            Step::Down(parse_rows(1, rows, h.ev(cur))?)
        } else {
            return Err(syntax(1, format!("expected +{{..}} or -{{..}}, found '{step}'")));
        };
        path.steps.push((s, next));
        cur = next;
        i += 2;
    }
    Ok(path)
}
