//! Text formats for sheaves and gluing data.
//!
//! ```text
//! hypsheaf n=2
//! space 1<2 1
//! space 1,2 1
//! gamma 1,2 -> 1<2
//! 1 1
//! 1
//! ```
//!
//! A matrix literal is a `rows cols` line followed by one line per row, with
//! entries as `p` or `p/q` tokens. A matrix with no columns has no row
//! lines. `#` starts a comment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::arrangement::Face;
use crate::cycles::CanVarConfig;
use crate::error::{Error, Result};
use crate::gluing::GluingDatum;
use crate::hypsheaf::{AxiomConfig, HyperbolicSheaf};
use crate::quiver::dsl::{parse_relation_file, strip_comment, RelationSet};
use crate::ratmat::{Field, Matrix};

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines =
            text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l))).filter(|(_, l)| !l.is_empty()).collect();
        Lines { lines, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.lines.get(self.pos).copied();
        self.pos += 1;
        l
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(1, |l| l.0)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let end = self.last_line();
        self.next().ok_or_else(|| Error::parse(end, 1, format!("unexpected end of input, expected {what}")))
    }

    fn matrix<F: Field>(&mut self, name: &str) -> Result<Matrix<F>> {
        let (ln, header) = self.expect(&format!("matrix header for {name}"))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |k: usize| {
            dims.get(k)
                .and_then(|x| x.parse::<usize>().ok())
                .ok_or_else(|| Error::parse(ln, 1, format!("expected `rows cols` for {name}, found `{header}`")))
        };
        if dims.len() != 2 {
            return Err(Error::parse(ln, 1, format!("expected `rows cols` for {name}, found `{header}`")));
        }
        let (r, c) = (parse_dim(0)?, parse_dim(1)?);
        let mut data = Vec::with_capacity(r * c);
        for _ in 0..if c == 0 { 0 } else { r } {
            let (ln, row) = self.expect(&format!("a row of {name}"))?;
            let toks: Vec<&str> = row.split_whitespace().collect();
            if toks.len() != c {
                return Err(Error::data(format!(
                    "{name}: line {ln} has {} entries but the matrix has {c} columns",
                    toks.len()
                )));
            }
            for t in toks {
                let col = row.find(t).unwrap_or(0) + 1;
                data.push(t.parse::<F>().map_err(|_| Error::parse(ln, col, format!("bad scalar `{t}`")))?);
            }
        }
        Matrix::from_vec(r, c, data)
    }
}

fn key_value<'a>(tok: &'a str, key: &str, ln: usize) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::parse(ln, 1, format!("expected `{key}=<value>`, found `{tok}`")))
}

fn parse_face(text: &str, ln: usize, col: usize) -> Result<Face> {
    text.parse::<Face>().map_err(|e| Error::parse(ln, col, e.to_string()))
}

fn push_matrix<F: Field>(out: &mut String, m: &Matrix<F>) {
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    if m.cols() > 0 {
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
}

pub fn format_sheaf<F: Field>(s: &HyperbolicSheaf<F>) -> String {
    let poset = s.poset();
    let mut out = format!("hypsheaf n={}\n", s.n());
    for (f, &d) in poset.faces().iter().zip(s.dims()) {
        if d > 0 {
            out.push_str(&format!("space {f} {d}\n"));
        }
    }
    for (k, (lo, hi)) in poset.cover_faces().enumerate() {
        let g = &s.gamma_maps()[k];
        if g.rows() * g.cols() > 0 {
            out.push_str(&format!("gamma {lo} -> {hi}\n"));
            push_matrix(&mut out, g);
        }
        let d = &s.delta_maps()[k];
        if d.rows() * d.cols() > 0 {
            out.push_str(&format!("delta {hi} -> {lo}\n"));
            push_matrix(&mut out, d);
        }
    }
    out
}

/// Parses a sheaf. Maps touching a zero space may be omitted; every other
/// covering map must be listed exactly once.
pub fn parse_sheaf<F: Field>(text: &str) -> Result<HyperbolicSheaf<F>> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.expect("`hypsheaf n=<n>`")?;
    let toks: Vec<&str> = head.split_whitespace().collect();
    if toks.len() != 2 || toks[0] != "hypsheaf" {
        return Err(Error::parse(ln, 1, format!("expected `hypsheaf n=<n>`, found `{head}`")));
    }
    let n: usize =
        key_value(toks[1], "n", ln)?.parse().map_err(|_| Error::parse(ln, 10, "n must be a positive integer"))?;
    let mut dims = BTreeMap::new();
    let mut gamma = BTreeMap::new();
    let mut delta = BTreeMap::new();
    while let Some((ln, line)) = lines.next() {
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let col = line.len() - rest.len() + 1;
        match kw {
            "space" => {
                let (face, dim) = rest
                    .trim()
                    .rsplit_once(char::is_whitespace)
                    .ok_or_else(|| Error::parse(ln, col, "expected `space <face> <dim>`"))?;
                let f = parse_face(face, ln, col)?;
                let d: usize = dim
                    .parse()
                    .map_err(|_| Error::parse(ln, col + face.len() + 1, format!("bad dimension `{dim}`")))?;
                if f.n() != n {
                    return Err(Error::parse(ln, col, format!("face `{f}` is not a face for n={n}")));
                }
                if dims.insert(f.clone(), d).is_some() {
                    return Err(Error::parse(ln, col, format!("space {f} listed twice")));
                }
            }
            "gamma" | "delta" => {
                let (a, b) = rest
                    .split_once("->")
                    .ok_or_else(|| Error::parse(ln, col, format!("expected `{kw} <face> -> <face>`")))?;
                let (fa, fb) = (parse_face(a, ln, col)?, parse_face(b, ln, col + a.len() + 2)?);
                let name = format!("{kw} {fa} -> {fb}");
                let m = lines.matrix::<F>(&name)?;
                let (map, key) = if kw == "gamma" { (&mut gamma, (fa, fb)) } else { (&mut delta, (fb, fa)) };
                if map.insert(key, m).is_some() {
                    return Err(Error::parse(ln, 1, format!("{name} listed twice")));
                }
            }
            other => return Err(Error::parse(ln, 1, format!("unknown key `{other}`"))),
        }
    }
    HyperbolicSheaf::new(n, &dims, &gamma, &delta)
}

pub fn format_datum<F: Field>(d: &GluingDatum<F>) -> String {
    let mut out = String::from("gluedatum n=2\n");
    out.push_str(&format!("EU dim={}\nM\n", d.psi_dim()));
    push_matrix(&mut out, d.t());
    out.push_str(&format!("EZ dim={}\nu\n", d.z_dim()));
    push_matrix(&mut out, d.u());
    out.push_str("v\n");
    push_matrix(&mut out, d.v());
    out
}

fn keyword_line<'a>(lines: &mut Lines<'a>, want: &str) -> Result<(usize, Vec<&'a str>)> {
    let (ln, l) = lines.expect(&format!("`{want}`"))?;
    let toks: Vec<&str> = l.split_whitespace().collect();
    if toks.first() != Some(&want) {
        return Err(Error::parse(ln, 1, format!("expected `{want}`, found `{l}`")));
    }
    Ok((ln, toks))
}

fn block_dim(lines: &mut Lines<'_>, block: &str) -> Result<usize> {
    let (ln, toks) = keyword_line(lines, block)?;
    if toks.len() != 2 {
        return Err(Error::parse(ln, 1, format!("expected `{block} dim=<d>`")));
    }
    key_value(toks[1], "dim", ln)?.parse().map_err(|_| Error::parse(ln, block.len() + 2, "bad dimension"))
}

fn named_matrix<F: Field>(lines: &mut Lines<'_>, name: &str, shape: (usize, usize)) -> Result<Matrix<F>> {
    keyword_line(lines, name)?;
    let m = lines.matrix::<F>(name)?;
    if m.shape() != shape {
        return Err(Error::data(format!("{name} is {}x{} but needs {}x{}", m.rows(), m.cols(), shape.0, shape.1)));
    }
    Ok(m)
}

pub fn parse_datum<F: Field>(text: &str) -> Result<GluingDatum<F>> {
    let mut lines = Lines::new(text);
    let (ln, head) = keyword_line(&mut lines, "gluedatum")?;
    if head.len() != 2 || key_value(head[1], "n", ln)? != "2" {
        return Err(Error::parse(ln, 1, "only `gluedatum n=2` is supported"));
    }
    let psi = block_dim(&mut lines, "EU")?;
    let t = named_matrix(&mut lines, "M", (psi, psi))?;
    let z = block_dim(&mut lines, "EZ")?;
    let u = named_matrix(&mut lines, "u", (z, psi))?;
    let v = named_matrix(&mut lines, "v", (psi, z))?;
    if let Some((l, extra)) = lines.next() {
        return Err(Error::parse(l, 1, format!("unknown key `{extra}`")));
    }
    GluingDatum::new(t, z, u, v)
}

/// Anything the command line can load from a file, told apart by the first
/// meaningful line.
#[derive(Clone, Debug)]
pub enum Loaded<F: Field> {
    Sheaf(HyperbolicSheaf<F>),
    Datum(GluingDatum<F>),
    Axioms(AxiomConfig),
    CanVar(CanVarConfig),
    Relations(RelationSet<F>),
}

impl<F: Field> Loaded<F> {
    pub fn kind(&self) -> &'static str {
        match self {
            Loaded::Sheaf(_) => "sheaf",
            Loaded::Datum(_) => "gluing datum",
            Loaded::Axioms(_) => "axiom config",
            Loaded::CanVar(_) => "can/var config",
            Loaded::Relations(_) => "relation set",
        }
    }
}

pub fn parse_any<F: Field>(text: &str) -> Result<Loaded<F>> {
    let first = Lines::new(text).peek().map(|(_, l)| l).unwrap_or("");
    match first.split_whitespace().next().unwrap_or("") {
        "hypsheaf" => parse_sheaf(text).map(Loaded::Sheaf),
        "gluedatum" => parse_datum(text).map(Loaded::Datum),
        "axioms" => AxiomConfig::parse(text).map(Loaded::Axioms),
        "canvar" => CanVarConfig::parse(text).map(Loaded::CanVar),
        "quiver" => parse_relation_file(text).map(Loaded::Relations),
        other => Err(Error::parse(1, 1, format!("unrecognised file type `{other}`"))),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load<F: Field>(path: &Path) -> Result<Loaded<F>> {
    parse_any(&read(path)?)
}

pub fn load_sheaf<F: Field>(path: &Path) -> Result<HyperbolicSheaf<F>> {
    parse_sheaf(&read(path)?)
}

pub fn load_datum<F: Field>(path: &Path) -> Result<GluingDatum<F>> {
    parse_datum(&read(path)?)
}

pub fn save_sheaf<F: Field>(s: &HyperbolicSheaf<F>, path: &Path) -> Result<()> {
    write(path, &format_sheaf(s))
}

pub fn save_datum<F: Field>(d: &GluingDatum<F>, path: &Path) -> Result<()> {
    write(path, &format_datum(d))
}
