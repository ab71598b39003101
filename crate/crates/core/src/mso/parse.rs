use thiserror::Error;

use super::{is_set_variable, Formula, Signature, SortError};
use crate::ipomset::Label;
use crate::steps::{is_label_byte, parse_letter_at};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { offset: usize, line: usize, column: usize, message: String },
    #[error(transparent)]
    Sort(#[from] SortError),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Letter(crate::steps::StepLetter),
    LParen,
    RParen,
    Dot,
    Comma,
    Bang,
    Amp,
    Bar,
    Arrow,
    DoubleArrow,
    Lt,
    Squiggle,
    Eq,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Letter(l) => format!("letter {l}"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Dot => "'.'".into(),
        Tok::Comma => "','".into(),
        Tok::Bang => "'!'".into(),
        Tok::Amp => "'&'".into(),
        Tok::Bar => "'|'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::DoubleArrow => "'<->'".into(),
        Tok::Lt => "'<'".into(),
        Tok::Squiggle => "'~>'".into(),
        Tok::Eq => "'='".into(),
        Tok::End => "end of input".into(),
    }
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn error_at(text: &str, offset: usize, message: impl Into<String>) -> ParseError {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    ParseError::Syntax { offset, line, column, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'.' => Tok::Dot,
            b',' => Tok::Comma,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Bar,
            b'=' => Tok::Eq,
            b'-' if b.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'~' if b.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Squiggle
            }
            b'<' if b.get(i + 1) == Some(&b'-') && b.get(i + 2) == Some(&b'>') => {
                i += 2;
                Tok::DoubleArrow
            }
            b'<' => Tok::Lt,
            b'L' if b.get(i + 1) == Some(&b'"') => {
                let (letter, end) = parse_letter_at(text, i + 2).map_err(|e| match e {
                    crate::steps::StepParseError::Syntax { offset, message } => error_at(text, offset, message),
                })?;
                if b.get(end) != Some(&b'"') {
                    return Err(error_at(text, end, "expected '\"' after letter"));
                }
                i = end;
                Tok::Letter(letter)
            }
            c if is_label_byte(c) => {
                while i + 1 < b.len() && is_label_byte(b[i + 1]) {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => return Err(error_at(text, i, format!("unexpected character {:?}", text[i..].chars().next().unwrap()))),
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

const KEYWORDS: [&str; 5] = ["exists", "forall", "in", "true", "false"];

/// Parses a formula and checks it against `signature`.
pub fn parse_formula(text: &str, signature: Signature) -> Result<Formula, ParseError> {
    let f = parse_any(text)?;
    f.check_signature(signature)?;
    Ok(f)
}

/// Parses a formula without fixing the signature.
pub(crate) fn parse_any(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { text, toks, pos: 0 };
    let f = p.formula()?;
    if p.peek() != &Tok::End {
        return Err(p.unexpected());
    }
    f.check_scopes()?;
    Ok(f)
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ParseError {
        error_at(self.text, self.offset(), format!("unexpected {}", describe(self.peek())))
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(error_at(self.text, self.offset(), format!("expected {}, found {}", describe(&t), describe(self.peek()))))
        }
    }

    fn variable(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && !s.starts_with(|c: char| c.is_ascii_digit()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(error_at(self.text, self.offset(), format!("expected a variable, found {}", describe(self.peek())))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.implication()?;
        if *self.peek() == Tok::DoubleArrow {
            self.bump();
            let right = self.implication()?;
            if *self.peek() == Tok::DoubleArrow {
                return Err(error_at(self.text, self.offset(), "'<->' is not associative; add parentheses"));
            }
            return Ok(Formula::iff(left, right));
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.implication()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(k) if k == "exists" || k == "forall" => {
                self.bump();
                let mut vars = vec![self.variable()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    vars.push(self.variable()?);
                }
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(vars.iter().rev().fold(body, |acc, v| {
                    match (k.as_str(), is_set_variable(v)) {
                        ("exists", false) => Formula::exists(v, acc),
                        ("exists", true) => Formula::exists_set(v, acc),
                        (_, false) => Formula::forall(v, acc),
                        (_, true) => Formula::forall_set(v, acc),
                    }
                }))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Letter(l) => {
                self.bump();
                let x = self.argument()?;
                Ok(Formula::Letter(l, x))
            }
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) if *self.peek2() == Tok::LParen => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.unexpected());
                }
                self.bump();
                let x = self.argument()?;
                Ok(match name.as_str() {
                    "s" => Formula::Source(x),
                    "t" => Formula::Target(x),
                    _ => Formula::Label(Label::new(&name), x),
                })
            }
            Tok::Ident(_) => {
                let x = self.variable()?;
                let op = self.bump();
                let f = match op {
                    Tok::Lt => Formula::Less(x, self.variable()?),
                    Tok::Squiggle => Formula::EventOrder(x, self.variable()?),
                    Tok::Eq => Formula::Equal(x, self.variable()?),
                    Tok::Arrow => Formula::Succ(x, self.variable()?),
                    Tok::Ident(k) if k == "in" => Formula::In(x, self.variable()?),
                    other => {
                        return Err(error_at(
                            self.text,
                            at,
                            format!("expected a relation after variable, found {}", describe(&other)),
                        ))
                    }
                };
                Ok(f)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn argument(&mut self) -> Result<String, ParseError> {
        self.expect(Tok::LParen)?;
        let x = self.variable()?;
        self.expect(Tok::RParen)?;
        Ok(x)
    }
}
