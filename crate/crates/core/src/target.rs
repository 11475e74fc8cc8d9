//! Target specifications for the CLI: `I`, a gate name from the instruction
//! set, `rx(expr)`/`ry(expr)`/`rz(expr)`, or the path of a matrix file in the
//! gate-set format (its first gate is the target).

use std::path::Path;

use crate::error::{Error, Result};
use crate::gates::{matrix_from_entries, GateSetFile, InstructionSet};
use crate::linalg::{project_su, rx, ry, rz, Unitary};

pub fn parse_target(spec: &str, set: &InstructionSet) -> Result<Unitary> {
    let spec = spec.trim();
    let dim = set.dim();
    if spec == "I" || spec.eq_ignore_ascii_case("id") || spec.eq_ignore_ascii_case("identity") {
        return Ok(Unitary::identity(dim));
    }
    if let Some(i) = set.index_of(spec) {
        return Ok(set.gate(i)?.unitary.clone());
    }
    let lower = spec.to_ascii_lowercase();
    for (prefix, rot) in [("rx(", rx as fn(f64) -> Unitary), ("ry(", ry), ("rz(", rz)] {
        if let Some(rest) = lower.strip_prefix(prefix) {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Target(format!("missing `)` in `{spec}`")))?;
            if dim != 2 {
                return Err(Error::Target(format!("`{spec}` is a qubit rotation but the set has dim {dim}")));
            }
            return Ok(rot(eval_angle(inner)?));
        }
    }
    if Path::new(spec).is_file() {
        return load_matrix_target(spec, dim);
    }
    Err(Error::Target(format!(
        "`{spec}` is not I, a gate name, rx/ry/rz(angle) or a matrix file"
    )))
}

fn load_matrix_target(path: &str, dim: usize) -> Result<Unitary> {
    let doc: GateSetFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if doc.dim != dim {
        return Err(Error::DimensionMismatch(doc.dim, dim));
    }
    let first = doc
        .gates
        .first()
        .ok_or_else(|| Error::Target(format!("`{path}` holds no matrix")))?;
    let u = Unitary::new(matrix_from_entries(dim, &first.matrix)?)?;
    project_su(&u)
}

/// Evaluates an arithmetic expression over numbers and `pi`.
pub fn eval_angle(expr: &str) -> Result<f64> {
    let tokens = tokenize(expr)?;
    let mut p = Parser { tokens, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Target(format!("trailing input in angle `{expr}`")));
    }
    if !v.is_finite() {
        return Err(Error::Target(format!("angle `{expr}` is not finite")));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Tok::Op(ch));
                i += 1;
            }
            '(' => {
                out.push(Tok::Open);
                i += 1;
            }
            ')' => {
                out.push(Tok::Close);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || ((chars[i] == '-' || chars[i] == '+') && chars[i - 1] == 'e'))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse()
                    .map_err(|_| Error::Target(format!("bad number `{text}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.as_str() {
                    "pi" => out.push(Tok::Num(std::f64::consts::PI)),
                    _ => return Err(Error::Target(format!("unknown name `{word}` in angle"))),
                }
            }
            _ => return Err(Error::Target(format!("unexpected `{ch}` in angle"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    v *= self.unary()?;
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    v /= self.unary()?;
                }
                // implicit product, e.g. `3pi`
                Some(Tok::Num(_)) | Some(Tok::Open) => v *= self.unary()?,
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<f64> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(Error::Target("unbalanced parentheses in angle".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(Error::Target("expected a number, `pi` or `(`".into())),
        }
    }
}
