//! Text form of FASTPs.
//!
//! Rational terms print as `N/D`; others as
//! `(P+(Q*sqrt(S)))/(R+(T*sqrt(S)))`. Inside each part, σ atoms are bare and
//! integers and compound terms are parenthesized. `sigma[i,j]` is accepted as
//! an ASCII spelling of `σ[i,j]`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::expr::{render, Expr, ExprRing, Node};
use super::{Fastp, Surd};
use crate::ring::Ring;

/// Terms whose expanded text would exceed this many nodes are only offered
/// in DAG form.
pub const TREE_RENDER_LIMIT: u64 = 200_000;

pub fn serialize_fastp(f: &Fastp) -> String {
    if f.is_rational() {
        return format!("{}/{}", render(&f.p), render(&f.r));
    }
    let s = render(&f.s);
    format!(
        "({}+({}*sqrt({s})))/({}+({}*sqrt({s})))",
        render(&f.p),
        render(&f.q),
        render(&f.r),
        render(&f.t)
    )
}

/// Expanded size of the rendered term (saturating).
pub fn rendered_size(f: &Fastp) -> u64 {
    let cap = TREE_RENDER_LIMIT + 1;
    f.components()
        .iter()
        .fold(0u64, |acc, e| acc.saturating_add(e.tree_size(cap)))
}

/// Straight-line program for the five components with shared nodes named
/// once: lines `eK = ...` followed by `p = eK` etc.
pub fn serialize_fastp_dag(f: &Fastp) -> Vec<String> {
    let mut names: HashMap<*const Node, String> = HashMap::new();
    let mut lines = Vec::new();
    let mut outputs = Vec::new();
    for (label, e) in ["p", "q", "r", "t", "s"].iter().zip(f.components()) {
        let name = dag_name(e, &mut names, &mut lines);
        outputs.push(format!("{label} = {name}"));
    }
    lines.extend(outputs);
    lines
}

fn dag_name(root: &Expr, names: &mut HashMap<*const Node, String>, lines: &mut Vec<String>) -> String {
    let mut stack = vec![(root.clone(), false)];
    while let Some((e, expanded)) = stack.pop() {
        let key = e.node() as *const Node;
        if names.contains_key(&key) {
            continue;
        }
        let kids: Vec<Expr> = match e.node() {
            Node::Sigma(..) | Node::Const(_) => vec![],
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => vec![a.clone(), b.clone()],
            Node::Neg(a) => vec![a.clone()],
        };
        if !expanded && !kids.is_empty() {
            stack.push((e.clone(), true));
            for k in kids {
                stack.push((k, false));
            }
            continue;
        }
        let text = match e.node() {
            Node::Sigma(..) | Node::Const(_) => {
                names.insert(key, render(&e));
                continue;
            }
            Node::Add(a, b) => format!("{}+{}", name_of(a, names), name_of(b, names)),
            Node::Sub(a, b) => format!("{}-{}", name_of(a, names), name_of(b, names)),
            Node::Mul(a, b) => format!("{}*{}", name_of(a, names), name_of(b, names)),
            Node::Neg(a) => format!("-{}", name_of(a, names)),
        };
        let name = format!("e{}", lines.len());
        let mut line = String::new();
        let _ = write!(line, "{name} = {text}");
        lines.push(line);
        names.insert(key, name);
    }
    name_of(root, names)
}

fn name_of(e: &Expr, names: &HashMap<*const Node, String>) -> String {
    names[&(e.node() as *const Node)].clone()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("FASTP syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Sigma(u32, u32),
    Int(i64),
    Sqrt,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let err = |pos: usize, msg: &str| ParseError {
        pos,
        msg: msg.to_string(),
    };
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        let pos = text.len() - rest.len();
        if c.is_whitespace() {
            rest = &rest[c.len_utf8()..];
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((pos, t));
            rest = &rest[1..];
            continue;
        }
        if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let v = rest[..len]
                .parse::<i64>()
                .map_err(|_| err(pos, "integer out of range"))?;
            out.push((pos, Tok::Int(v)));
            rest = &rest[len..];
            continue;
        }
        if let Some(r) = rest.strip_prefix("sqrt") {
            out.push((pos, Tok::Sqrt));
            rest = r;
            continue;
        }
        let after = rest
            .strip_prefix('σ')
            .or_else(|| rest.strip_prefix("sigma"))
            .ok_or_else(|| err(pos, "unexpected character"))?;
        let close = after.find(']').ok_or_else(|| err(pos, "unterminated σ[i,j]"))?;
        let inner = after
            .strip_prefix('[')
            .map(|s| &s[..close - 1])
            .ok_or_else(|| err(pos, "expected '[' after σ"))?;
        let (a, b) = inner.split_once(',').ok_or_else(|| err(pos, "expected σ[i,j]"))?;
        let parse = |s: &str| s.trim().parse::<u32>().map_err(|_| err(pos, "bad σ index"));
        let (a, b) = (parse(a)?, parse(b)?);
        out.push((pos, Tok::Sigma(a.min(b), a.max(b))));
        rest = &after[close + 1..];
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    radicand: Option<Expr>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            msg: msg.to_string(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(&format!("expected {t:?}"))
        }
    }

    fn sum(&mut self) -> Result<Surd, ParseError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Surd, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            let rhs = self.unary()?;
            acc = if acc.v.is_literal_zero() {
                rhs.scale(&acc.u)
            } else if rhs.v.is_literal_zero() {
                acc.scale(&rhs.u)
            } else {
                return self.fail("product of two square-root terms");
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Surd, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            if let Some(Tok::Int(v)) = self.peek() {
                let v = -*v;
                self.at += 1;
                return Ok(Surd::rational(Expr::constant(v)));
            }
            let inner = self.unary()?;
            let r = ExprRing;
            return Ok(Surd {
                u: r.neg(&inner.u),
                v: r.neg(&inner.v),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Surd, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Sigma(i, j)) => {
                self.at += 1;
                Ok(Surd::rational(Expr::sigma(i as usize, j as usize)))
            }
            Some(Tok::Int(v)) => {
                self.at += 1;
                Ok(Surd::rational(Expr::constant(v)))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Sqrt) => {
                self.at += 1;
                self.expect(Tok::LParen)?;
                let arg = self.sum()?;
                self.expect(Tok::RParen)?;
                if !arg.v.is_literal_zero() {
                    return self.fail("nested square root");
                }
                match &self.radicand {
                    Some(s) if !s.same(&arg.u) => return self.fail("second distinct square root"),
                    Some(_) => {}
                    None => self.radicand = Some(arg.u),
                }
                Ok(Surd {
                    u: Expr::zero(),
                    v: Expr::one(),
                })
            }
            _ => self.fail("expected a term"),
        }
    }
}

/// Parses the text form; any arrangement of `+ - * ( )` is accepted as long
/// as each side of the single top-level `/` is affine in one square root.
pub fn parse_fastp(text: &str) -> Result<Fastp, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
        radicand: None,
    };
    let num = p.sum()?;
    p.expect(Tok::Slash)?;
    let den = p.sum()?;
    if p.at != p.toks.len() {
        return p.fail("trailing input");
    }
    let s = p.radicand.unwrap_or_else(Expr::zero);
    let f = Fastp {
        p: num.u,
        q: num.v,
        r: den.u,
        t: den.v,
        s,
    };
    if f.is_rational() {
        return Ok(Fastp::rational_unchecked(f.p, f.r));
    }
    Ok(f)
}
