//! Trees as base points, wall-crossing transport between them, and sections
//! over the resulting groupoid.
//!
//! Two kinds of generators act on fiber values:
//!
//! * `swap(i,j)` relabels by the transposition `(i j)`, moving from a tree
//!   `t` to `(i j)·t` and the sheaf `s` to its relabelling. In canonical
//!   stalk bases the induced map on fibers is the identity.
//! * `loop(i,j)` goes once around the innermost wall of the current tree,
//!   whose collision must be `{i, j}`. It acts by `1 + vu` on the all-`Ψ`
//!   component, by `1 + uv` on the component with a final `Φ` after `Ψ`s,
//!   and trivially on the rest.

use std::collections::BTreeMap;
use std::fmt;

use crate::arrangement::Permutation;
use crate::cycles::{assemble_can_var, CanVarConfig, Letter, SignPattern};
use crate::error::{Error, Result};
use crate::fiber::{enumerate_trees, omega_t, tree_to_collisions, LabelledTree};
use crate::hypsheaf::{permute_sheaf, validate, AxiomConfig, HyperbolicSheaf};
use crate::ratmat::{Field, Matrix};

/// The permutation carrying the collisions of `t1` onto those of `t2`
/// labelwise, if one exists.
pub fn sigma_perm(t1: &LabelledTree, t2: &LabelledTree) -> Option<Permutation> {
    let (s1, s2) = (tree_to_collisions(t1).ok()?, tree_to_collisions(t2).ok()?);
    if s1.n() != s2.n() {
        return None;
    }
    let n = s1.n();
    let mut img = vec![0usize; n + 1];
    let mut assign = |a: usize, b: usize| {
        if img[a] == 0 || img[a] == b {
            img[a] = b;
            true
        } else {
            false
        }
    };
    for (&(i1, j1), &(i2, j2)) in s1.steps().iter().zip(s2.steps()) {
        if !assign(i1, i2) || !assign(j1, j2) {
            return None;
        }
    }
    if n == 1 {
        return Some(Permutation::identity(1));
    }
    let sigma = Permutation::from_images(img[1..].to_vec()).ok()?;
    (s1.act(&sigma) == s2).then_some(sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Swap(usize, usize),
    Loop(usize, usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Swap(i, j) => write!(f, "swap({i},{j})"),
            Generator::Loop(i, j) => write!(f, "loop({i},{j})"),
        }
    }
}

/// A word of generators starting at a tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingPath {
    pub start: LabelledTree,
    pub word: Vec<Generator>,
}

impl CrossingPath {
    pub fn empty(start: LabelledTree) -> Self {
        CrossingPath { start, word: Vec::new() }
    }

    /// Parses `swap(1,2); loop(1,2)`; an empty string is the empty path.
    pub fn parse(start: LabelledTree, text: &str) -> Result<Self> {
        let mut word = Vec::new();
        for (k, part) in text.split(';').enumerate() {
            let p: String = part.chars().filter(|c| !c.is_whitespace()).collect();
            if p.is_empty() {
                if text.trim().is_empty() {
                    continue;
                }
                return Err(Error::parse(1, k + 1, "empty generator"));
            }
            let (name, rest) =
                p.split_once('(').ok_or_else(|| Error::parse(1, k + 1, format!("bad generator `{p}`")))?;
            let args = rest
                .strip_suffix(')')
                .and_then(|a| a.split_once(','))
                .ok_or_else(|| Error::parse(1, k + 1, format!("bad arguments in `{p}`")))?;
            let num = |x: &str| x.parse::<usize>().map_err(|_| Error::parse(1, k + 1, format!("bad label `{x}`")));
            let (i, j) = (num(args.0)?, num(args.1)?);
            word.push(match name {
                "swap" => Generator::Swap(i, j),
                "loop" => Generator::Loop(i, j),
                o => return Err(Error::parse(1, k + 1, format!("unknown generator `{o}`"))),
            });
        }
        Ok(CrossingPath { start, word })
    }

    /// The tree the word ends at, or a composability error.
    pub fn end(&self) -> Result<LabelledTree> {
        let mut t = self.start.clone();
        for g in &self.word {
            t = step_tree(&t, *g)?;
        }
        Ok(t)
    }
}

impl fmt::Display for CrossingPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.word.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", w.join("; "))
    }
}

fn step_tree(t: &LabelledTree, g: Generator) -> Result<LabelledTree> {
    let n = t.n();
    match g {
        Generator::Swap(i, j) => Ok(t.act(&Permutation::transposition(n, i, j)?)),
        Generator::Loop(i, j) => {
            let seq = tree_to_collisions(t)?;
            let inner = seq
                .steps()
                .first()
                .copied()
                .ok_or_else(|| Error::invalid("a single leaf has no wall to loop around"))?;
            if inner != (i, j) && inner != (j, i) {
                return Err(Error::invalid(format!(
                    "loop({i},{j}) is not at the innermost wall ({},{}) of {t}",
                    inner.0, inner.1
                )));
            }
            Ok(t.clone())
        }
    }
}

/// Result of transporting a sheaf along a path.
#[derive(Clone, Debug, PartialEq)]
pub struct Transport<F: Field> {
    pub sheaf: HyperbolicSheaf<F>,
    pub tree: LabelledTree,
    /// `ω_start(s) → ω_end(sheaf)` in canonical stalk bases.
    pub map: Matrix<F>,
}

/// Endomorphism of `ω_t(s)` for one loop around the innermost wall.
pub fn loop_operator<F: Field>(s: &HyperbolicSheaf<F>, t: &LabelledTree, canvar: &CanVarConfig) -> Result<Matrix<F>> {
    let fv = omega_t(s, t)?;
    let m = fv.seq.len();
    let mut op = Matrix::identity(fv.dim());
    if m == 0 {
        return Ok(op);
    }
    let cv = assemble_can_var(s, &fv.seq, canvar)?;
    let offsets = fv.offsets();
    let psi = SignPattern::all_psi(m);
    let mut phi = psi.clone();
    phi.0[m - 1] = Letter::Phi;
    let t_psi = Matrix::identity(cv.psi.dim()).add(&cv.v.compose(&cv.u)?)?;
    let t_phi = Matrix::identity(cv.phi.dim()).add(&cv.u.compose(&cv.v)?)?;
    op.paste(offsets[&psi], offsets[&psi], &t_psi);
    op.paste(offsets[&phi], offsets[&phi], &t_phi);
    Ok(op)
}

pub fn transport<F: Field>(s: &HyperbolicSheaf<F>, p: &CrossingPath, canvar: &CanVarConfig) -> Result<Transport<F>> {
    let mut sheaf = s.clone();
    let mut tree = p.start.clone();
    let mut map = Matrix::identity(omega_t(s, &tree)?.dim());
    for g in &p.word {
        let next = step_tree(&tree, *g)?;
        match g {
            Generator::Swap(i, j) => {
                sheaf = permute_sheaf(&Permutation::transposition(s.n(), *i, *j)?, &sheaf)?;
            }
            Generator::Loop(..) => {
                map = loop_operator(&sheaf, &tree, canvar)?.compose(&map)?;
            }
        }
        tree = next;
    }
    Ok(Transport { sheaf, tree, map })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnipotenceReport {
    /// Per loop: its text and whether `op - id` is nilpotent.
    pub loops: Vec<(String, bool)>,
}

impl UnipotenceReport {
    pub fn passed(&self) -> bool {
        self.loops.iter().all(|(_, ok)| *ok)
    }
}

pub fn check_unipotence<F: Field>(
    s: &HyperbolicSheaf<F>,
    loops: &[CrossingPath],
    canvar: &CanVarConfig,
) -> Result<UnipotenceReport> {
    let mut out = Vec::new();
    for p in loops {
        if p.end()? != p.start {
            return Err(Error::invalid(format!("path `{p}` from {} is not a loop", p.start)));
        }
        let tr = transport(s, p, canvar)?;
        let k = tr.map.rows();
        let ok = tr.map.sub(&Matrix::identity(k))?.is_nilpotent()?;
        out.push((format!("{} @ {}", p, p.start), ok));
    }
    Ok(UnipotenceReport { loops: out })
}

/// Generating loops at every tree: the innermost wall loop and each
/// `swap(i,j); swap(i,j)`.
pub fn generating_loops(n: usize) -> Result<Vec<CrossingPath>> {
    let mut out = Vec::new();
    for t in enumerate_trees(n)? {
        if n >= 2 {
            let (i, j) = tree_to_collisions(&t)?.steps()[0];
            out.push(CrossingPath { start: t.clone(), word: vec![Generator::Loop(i, j)] });
        }
        for i in 1..=n {
            for j in i + 1..=n {
                out.push(CrossingPath { start: t.clone(), word: vec![Generator::Swap(i, j), Generator::Swap(i, j)] });
            }
        }
    }
    Ok(out)
}

/// Objects at every tree with isomorphisms between every ordered pair.
///
/// `objects[t]` is `σ_{base,t}` applied to the base sheaf. The isomorphism
/// `a → b` is a list of per-face matrices, indexed by the faces of `a` in
/// poset order; face `F` of `a` goes to face `σ_{a,b} F` of `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionFamily<F: Field> {
    pub n: usize,
    pub trees: Vec<LabelledTree>,
    pub base: usize,
    pub objects: Vec<HyperbolicSheaf<F>>,
    pub isos: BTreeMap<(usize, usize), Vec<Matrix<F>>>,
}

impl<F: Field> SectionFamily<F> {
    pub fn index_of(&self, t: &LabelledTree) -> Option<usize> {
        self.trees.iter().position(|x| x == t)
    }

    pub fn object(&self, t: &LabelledTree) -> Option<&HyperbolicSheaf<F>> {
        self.index_of(t).map(|i| &self.objects[i])
    }

    /// The family relabelled by `σ`: `(σF)_{σt} = σ F_t`.
    pub fn relabel(&self, sigma: &Permutation) -> Result<Self> {
        let moved: Vec<LabelledTree> = self.trees.iter().map(|t| t.act(sigma)).collect();
        let pos = |t: &LabelledTree| self.trees.iter().position(|x| x == t).unwrap();
        let mut objects = self.objects.clone();
        for (i, t) in moved.iter().enumerate() {
            objects[pos(t)] = permute_sheaf(sigma, &self.objects[i])?;
        }
        let poset = self.objects[0].poset().clone();
        let faces = poset.faces();
        let mut isos = BTreeMap::new();
        for (&(a, b), maps) in &self.isos {
            let mut m = maps.clone();
            for (k, f) in faces.iter().enumerate() {
                m[poset.index_of(&f.act(sigma)).unwrap()] = maps[k].clone();
            }
            isos.insert((pos(&moved[a]), pos(&moved[b])), m);
        }
        Ok(SectionFamily { n: self.n, trees: self.trees.clone(), base: pos(&moved[self.base]), objects, isos })
    }
}

fn face_perm<F: Field>(s: &HyperbolicSheaf<F>, sigma: &Permutation) -> Vec<usize> {
    let poset = s.poset();
    poset.faces().iter().map(|f| poset.index_of(&f.act(sigma)).unwrap()).collect()
}

pub fn build_section<F: Field>(s: &HyperbolicSheaf<F>, axioms: &AxiomConfig) -> Result<SectionFamily<F>> {
    let base = enumerate_trees(s.n())?.remove(0);
    build_section_at(s, &base, axioms)
}

pub fn build_section_at<F: Field>(
    s: &HyperbolicSheaf<F>,
    base: &LabelledTree,
    axioms: &AxiomConfig,
) -> Result<SectionFamily<F>> {
    let report = validate(s, axioms)?;
    if !report.all_pass() {
        return Err(Error::Validation(report.to_string().trim_end().to_string()));
    }
    let trees = enumerate_trees(s.n())?;
    let b = trees
        .iter()
        .position(|t| t == base)
        .ok_or_else(|| Error::invalid(format!("{base} is not an enumerated tree")))?;
    let objects = trees
        .iter()
        .map(|t| {
            let sigma =
                sigma_perm(base, t).ok_or_else(|| Error::invalid(format!("no transport from {base} to {t}")))?;
            permute_sheaf(&sigma, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut isos = BTreeMap::new();
    for (a, obj) in objects.iter().enumerate() {
        for c in 0..trees.len() {
            let maps = obj.dims().iter().map(|&d| Matrix::identity(d)).collect();
            isos.insert((a, c), maps);
        }
    }
    Ok(SectionFamily { n: s.n(), trees, base: b, objects, isos })
}

/// Checks the family and returns the object at the base tree.
///
/// Every isomorphism must be invertible and intertwine `γ`, `δ` after
/// relabelling faces, and `g_{b→c} ∘ g_{a→b} = g_{a→c}` for all triples.
pub fn reconstruct<F: Field>(f: &SectionFamily<F>) -> Result<HyperbolicSheaf<F>> {
    let k = f.trees.len();
    let perm = |a: usize, b: usize| {
        sigma_perm(&f.trees[a], &f.trees[b])
            .ok_or_else(|| Error::Validation(format!("no transport between {} and {}", f.trees[a], f.trees[b])))
    };
    for a in 0..k {
        let expect = permute_sheaf(&perm(f.base, a)?, &f.objects[f.base])?;
        if expect.dims() != f.objects[a].dims() {
            return Err(Error::Validation(format!("object at {} has the wrong dimensions", f.trees[a])));
        }
    }
    let iso = |a: usize, b: usize| {
        f.isos
            .get(&(a, b))
            .ok_or_else(|| Error::Validation(format!("missing isomorphism {} -> {}", f.trees[a], f.trees[b])))
    };
    for a in 0..k {
        for b in 0..k {
            let g = iso(a, b)?;
            let sigma = perm(a, b)?;
            let (x, y) = (&f.objects[a], &f.objects[b]);
            let fp = face_perm(x, &sigma);
            let poset = x.poset();
            for (i, m) in g.iter().enumerate() {
                if m.shape() != (y.dims()[fp[i]], x.dims()[i]) || !m.is_invertible() {
                    return Err(Error::Validation(format!(
                        "map {} -> {} at face {} is not an isomorphism",
                        f.trees[a],
                        f.trees[b],
                        poset.faces()[i]
                    )));
                }
            }
            for (lo, hi) in poset.cover_faces() {
                let (l, h) = (poset.index_of(lo).unwrap(), poset.index_of(hi).unwrap());
                let (sl, sh) = (&poset.faces()[fp[l]], &poset.faces()[fp[h]]);
                let gamma_ok = y.gamma(sl, sh)?.compose(&g[l])? == g[h].compose(x.gamma(lo, hi)?)?;
                let delta_ok = y.delta(sh, sl)?.compose(&g[h])? == g[l].compose(x.delta(hi, lo)?)?;
                if !gamma_ok || !delta_ok {
                    return Err(Error::Validation(format!(
                        "map {} -> {} does not commute with the cover {lo} < {hi}",
                        f.trees[a], f.trees[b]
                    )));
                }
            }
        }
    }
    for a in 0..k {
        for b in 0..k {
            let fab = face_perm(&f.objects[a], &perm(a, b)?);
            for c in 0..k {
                let (gab, gbc, gac) = (iso(a, b)?, iso(b, c)?, iso(a, c)?);
                for i in 0..gab.len() {
                    if gbc[fab[i]].compose(&gab[i])? != gac[i] {
                        return Err(Error::Validation(format!(
                            "cocycle fails: g[{} -> {}] . g[{} -> {}] != g[{} -> {}]",
                            f.trees[b], f.trees[c], f.trees[a], f.trees[b], f.trees[a], f.trees[c]
                        )));
                    }
                }
            }
        }
    }
    Ok(f.objects[f.base].clone())
}
