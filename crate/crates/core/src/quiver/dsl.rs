//! Textual path relations.
//!
//! ```text
//! expr := term (('+'|'-') term)* '=' '0'
//! term := [rational '*'] (arrow ('.' arrow)* | 'id@' vertex)
//! ```
//!
//! `a.b` applies `b` first. Names are `[A-Za-z_][A-Za-z0-9_^']*`, optionally
//! followed by one bracketed group such as `g[1<2->1,2]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{Quiver, Rep};
use crate::error::{Error, Result};
use crate::ratmat::{Field, Matrix};

/// A path word or an identity path.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// Arrow names, outermost (applied last) first.
    Path(Vec<String>),
    Identity(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Path(w) => write!(f, "{}", w.join(".")),
            Term::Identity(v) => write!(f, "id@{v}"),
        }
    }
}

/// A normalized linear combination of paths with common endpoints.
///
/// Terms are sorted by their printed word, merged, and zero coefficients are
/// dropped; structural equality is therefore equality of expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct PathExpr<F: Field> {
    terms: Vec<(Term, F)>,
    source: Option<String>,
    target: Option<String>,
}

impl<F: Field> PathExpr<F> {
    /// Validates composability and endpoints, then normalizes.
    pub fn new(quiver: &Quiver, raw: Vec<(Term, F)>) -> Result<Self> {
        let mut ends: Option<(String, String, String)> = None;
        for (term, _) in &raw {
            let (s, t) = endpoints(quiver, term)?;
            match &ends {
                None => ends = Some((s, t, term.to_string())),
                Some((s0, t0, first)) if *s0 != s || *t0 != t => {
                    return Err(Error::MixedEndpoints(format!(
                        "`{first}` runs {s0} -> {t0} but `{term}` runs {s} -> {t}"
                    )))
                }
                _ => {}
            }
        }
        let mut terms: Vec<(Term, F)> = Vec::new();
        let mut sorted = raw;
        sorted.sort_by_key(|(t, _)| t.to_string());
        for (t, c) in sorted {
            match terms.last_mut() {
                Some((last, acc)) if *last == t => *acc = acc.clone() + c,
                _ => terms.push((t, c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        let (source, target) = match ends {
            Some((s, t, _)) if !terms.is_empty() => (Some(s), Some(t)),
            _ => (None, None),
        };
        Ok(PathExpr { terms, source, target })
    }

    pub fn terms(&self) -> &[(Term, F)] {
        &self.terms
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn target(&self) -> Option<&str> {
        self.target.as_deref()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates on a representation; the zero expression evaluates to a 0x0 matrix.
    pub fn evaluate(&self, rep: &Rep<F>) -> Result<Matrix<F>> {
        let (Some(s), Some(t)) = (&self.source, &self.target) else {
            return Ok(Matrix::zeros(0, 0));
        };
        let q = rep.quiver();
        let dim = |v: &str| rep.dim(v).ok_or_else(|| Error::Unknown { kind: "vertex", name: v.to_string() });
        let mut acc = Matrix::zeros(dim(t)?, dim(s)?);
        for (term, c) in &self.terms {
            let m = match term {
                Term::Identity(v) => Matrix::identity(dim(v)?),
                Term::Path(word) => {
                    let mut m = Matrix::identity(dim(s)?);
                    for a in word.iter().rev() {
                        let i = q.arrow_index(a).ok_or_else(|| Error::Unknown { kind: "arrow", name: a.clone() })?;
                        m = rep.maps()[i].compose(&m).map_err(|e| Error::data(e.to_string()))?;
                    }
                    m
                }
            };
            acc = acc.add(&m.scale(c)).map_err(|e| Error::data(e.to_string()))?;
        }
        Ok(acc)
    }
}

fn endpoints(q: &Quiver, term: &Term) -> Result<(String, String)> {
    match term {
        Term::Identity(v) => {
            q.vertex_index(v).ok_or_else(|| Error::Unknown { kind: "vertex", name: v.clone() })?;
            Ok((v.clone(), v.clone()))
        }
        Term::Path(word) => {
            let arrows = word
                .iter()
                .map(|a| q.arrow(a).ok_or_else(|| Error::Unknown { kind: "arrow", name: a.clone() }))
                .collect::<Result<Vec<_>>>()?;
            for pair in arrows.windows(2) {
                let (outer, inner) = (pair[0], pair[1]);
                if inner.target != outer.source {
                    return Err(Error::Composability {
                        word: word.join("."),
                        msg: format!(
                            "`{}` ends at {} but `{}` starts at {}",
                            inner.name, inner.target, outer.name, outer.source
                        ),
                    });
                }
            }
            Ok((arrows.last().unwrap().source.clone(), arrows[0].target.clone()))
        }
    }
}

impl<F: Field> fmt::Display for PathExpr<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (term, c)) in self.terms.iter().enumerate() {
            let neg = c.to_string().starts_with('-');
            let mag = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "{term}")?;
        }
        Ok(())
    }
}

/// Canonical text of a relation `e = 0`.
pub fn print_relation<F: Field>(e: &PathExpr<F>) -> String {
    format!("{e} = 0")
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line, _src: src }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.pos + 1, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn name(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.chars.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() || *c == '_' => self.pos += 1,
            _ => return Err(self.err("expected a name")),
        }
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == '_' || c == '^' || c == '\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.chars.get(self.pos) == Some(&'[') {
            while let Some(&c) = self.chars.get(self.pos) {
                self.pos += 1;
                if c == ']' {
                    return Ok(self.chars[start..self.pos].iter().collect());
                }
            }
            return Err(self.err("unterminated `[`"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn rational<F: Field>(&mut self) -> Result<Option<F>> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit() || *c == '/') {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        F::from_str(&text).map(Some).map_err(|_| Error::parse(self.line, start + 1, format!("bad rational `{text}`")))
    }
}

fn parse_terms<F: Field>(lx: &mut Lexer<'_>) -> Result<Vec<(Term, F)>> {
    let mut terms = Vec::new();
    let mut sign = if lx.eat('-') {
        -F::one()
    } else {
        lx.eat('+');
        F::one()
    };
    loop {
        let coeff_pos = lx.pos;
        let coeff: Option<F> = lx.rational()?;
        let term = match coeff {
            Some(c) if !lx.eat('*') => {
                if c.is_zero() && terms.is_empty() && matches!(lx.peek(), Some('=') | None) {
                    return Ok(Vec::new());
                }
                return Err(Error::parse(lx.line, coeff_pos + 1, "a scalar needs `*` and a path"));
            }
            c => {
                let name = lx.name()?;
                let term = if name == "id" && lx.eat('@') {
                    Term::Identity(lx.name()?)
                } else {
                    let mut word = vec![name];
                    while lx.eat('.') {
                        word.push(lx.name()?);
                    }
                    Term::Path(word)
                };
                (term, sign.clone() * c.unwrap_or_else(F::one))
            }
        };
        terms.push(term);
        sign = if lx.eat('+') {
            F::one()
        } else if lx.eat('-') {
            -F::one()
        } else {
            break;
        };
    }
    Ok(terms)
}

/// Parses a bare expression without the `= 0` suffix.
pub fn parse_expr<F: Field>(text: &str, quiver: &Quiver) -> Result<PathExpr<F>> {
    let mut lx = Lexer::new(text, 1);
    let terms = parse_terms(&mut lx)?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input"));
    }
    PathExpr::new(quiver, terms)
}

/// Parses `expr = 0` on `quiver`.
pub fn parse_relation<F: Field>(text: &str, quiver: &Quiver) -> Result<PathExpr<F>> {
    parse_relation_at(text, quiver, 1)
}

pub(crate) fn parse_relation_at<F: Field>(text: &str, quiver: &Quiver, line: usize) -> Result<PathExpr<F>> {
    let mut lx = Lexer::new(text, line);
    let terms = parse_terms(&mut lx)?;
    lx.expect('=')?;
    lx.expect('0')?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input after `= 0`"));
    }
    PathExpr::new(quiver, terms)
}

/// Relations on a fixed quiver.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationSet<F: Field> {
    pub quiver: Arc<Quiver>,
    pub relations: Vec<PathExpr<F>>,
}

impl<F: Field> RelationSet<F> {
    pub fn new(quiver: Arc<Quiver>, relations: Vec<PathExpr<F>>) -> Self {
        RelationSet { quiver, relations }
    }

    /// Parses a list of relation strings.
    pub fn parse(quiver: Arc<Quiver>, lines: &[&str]) -> Result<Self> {
        let relations =
            lines.iter().enumerate().map(|(i, l)| parse_relation_at(l, &quiver, i + 1)).collect::<Result<_>>()?;
        Ok(RelationSet { quiver, relations })
    }
}

impl<F: Field> fmt::Display for RelationSet<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.quiver)?;
        for r in &self.relations {
            writeln!(f, "{}", print_relation(r))?;
        }
        Ok(())
    }
}

impl<F: Field> FromStr for RelationSet<F> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_relation_file(s)
    }
}

/// Strips a `#` comment and surrounding whitespace.
pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parses a quiver block `quiver / vertex .. / arrow name src tgt / end` that
/// starts at the first meaningful line. Returns the quiver and the index of
/// the line after `end`.
pub(crate) fn parse_quiver_block(lines: &[&str], start: usize) -> Result<(Quiver, usize)> {
    let mut i = start;
    while i < lines.len() && strip_comment(lines[i]).is_empty() {
        i += 1;
    }
    if i >= lines.len() || strip_comment(lines[i]) != "quiver" {
        return Err(Error::parse(i + 1, 1, "expected `quiver` block"));
    }
    i += 1;
    let mut vertices = Vec::new();
    let mut arrows = Vec::new();
    loop {
        if i >= lines.len() {
            return Err(Error::parse(i, 1, "missing `end` of quiver block"));
        }
        let l = strip_comment(lines[i]);
        let words: Vec<&str> = l.split_whitespace().collect();
        match words.first() {
            None => {}
            Some(&"end") => break,
            Some(&"vertex") => vertices.extend(words[1..].iter().map(|s| s.to_string())),
            Some(&"arrow") if words.len() == 4 => arrows.push(super::Arrow {
                name: words[1].to_string(),
                source: words[2].to_string(),
                target: words[3].to_string(),
            }),
            Some(_) => return Err(Error::parse(i + 1, 1, format!("unexpected `{l}` in quiver block"))),
        }
        i += 1;
    }
    let q = Quiver::new(vertices, arrows).map_err(|e| Error::parse(i + 1, 1, e.to_string()))?;
    Ok((q, i + 1))
}

/// Parses a relation config file: a quiver block, then one relation per line.
pub fn parse_relation_file<F: Field>(text: &str) -> Result<RelationSet<F>> {
    let lines: Vec<&str> = text.lines().collect();
    let (q, mut i) = parse_quiver_block(&lines, 0)?;
    let mut relations = Vec::new();
    while i < lines.len() {
        let l = strip_comment(lines[i]);
        if !l.is_empty() {
            relations.push(parse_relation_at(l, &q, i + 1)?);
        }
        i += 1;
    }
    Ok(RelationSet::new(Arc::new(q), relations))
}

/// Outcome of evaluating one relation.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationCheck<F: Field> {
    pub relation: String,
    pub passed: bool,
    pub value: Matrix<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport<F: Field> {
    pub checks: Vec<RelationCheck<F>>,
}

impl<F: Field> RelationReport<F> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationCheck<F>> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl<F: Field> fmt::Display for RelationReport<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            if c.passed {
                writeln!(f, "pass  {}", c.relation)?;
            } else {
                writeln!(f, "FAIL  {}  value {:?}", c.relation, c.value)?;
            }
        }
        Ok(())
    }
}

/// Evaluates every relation of `rs` on `rep`.
pub fn check_relations<F: Field>(rep: &Rep<F>, rs: &RelationSet<F>) -> Result<RelationReport<F>> {
    if **rep.quiver() != *rs.quiver {
        return Err(Error::invalid("representation is not over the relation set's quiver"));
    }
    let checks = rs
        .relations
        .iter()
        .map(|r| {
            let value = r.evaluate(rep)?;
            Ok(RelationCheck { relation: print_relation(r), passed: value.is_zero(), value })
        })
        .collect::<Result<_>>()?;
    Ok(RelationReport { checks })
}
