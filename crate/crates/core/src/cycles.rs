//! Iterated nearby and vanishing stalks of a hyperbolic sheaf.
//!
//! A [`CollisionSeq`] lists coordinate differences `z_i - z_j` innermost
//! first. Stalks are computed by descending from the minimal face through
//! the collisions outermost first: a `Ψ` letter moves to the negative side
//! of the wall `x_i = x_j`, a `Φ` letter stays on the wall. The result is the
//! space at the final face, cut down by the kernel of `γ` into the negative
//! covers for the innermost `Φ` letter.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::arrangement::{Face, Permutation, Side};
use crate::error::{Error, Result};
use crate::hypsheaf::HyperbolicSheaf;
use crate::quiver::dsl::{parse_expr, strip_comment, PathExpr};
use crate::quiver::{Quiver, Rep};
use crate::ratmat::{Field, Matrix};

/// Largest `n` with stalk recipes.
pub const MAX_STALK_N: usize = 3;

/// Pairs `(i, j)` standing for `z_i - z_j`, innermost collision first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CollisionSeq {
    n: usize,
    steps: Vec<(usize, usize)>,
}

impl CollisionSeq {
    /// Each step must join two clusters that are still separate; after the
    /// last step everything is joined.
    pub fn new(n: usize, steps: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("collision sequence needs n >= 1"));
        }
        if steps.len() + 1 != n {
            return Err(Error::invalid(format!("n={n} needs {} collisions, got {}", n - 1, steps.len())));
        }
        let mut cluster: Vec<usize> = (0..=n).collect();
        for &(i, j) in &steps {
            if i == 0 || j == 0 || i > n || j > n || i == j {
                return Err(Error::invalid(format!("bad collision ({i},{j}) for n={n}")));
            }
            let (ci, cj) = (cluster[i], cluster[j]);
            if ci == cj {
                return Err(Error::invalid(format!("collision ({i},{j}) joins labels already merged")));
            }
            for c in cluster.iter_mut() {
                if *c == cj {
                    *c = ci;
                }
            }
        }
        Ok(CollisionSeq { n, steps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Innermost first.
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Labels joined to `label` by the first `k` steps.
    pub fn cluster_before(&self, k: usize, label: usize) -> Vec<usize> {
        let mut members = vec![label];
        let mut changed = true;
        while changed {
            changed = false;
            for &(i, j) in &self.steps[..k] {
                for (a, b) in [(i, j), (j, i)] {
                    if members.contains(&a) && !members.contains(&b) {
                        members.push(b);
                        changed = true;
                    }
                }
            }
        }
        members.sort_unstable();
        members
    }

    pub fn act(&self, sigma: &Permutation) -> CollisionSeq {
        CollisionSeq { n: self.n, steps: self.steps.iter().map(|&(i, j)| (sigma.apply(i), sigma.apply(j))).collect() }
    }
}

impl fmt::Display for CollisionSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|(i, j)| format!("({i},{j})")).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl CollisionSeq {
    /// Parses `(3,2),(1,2)`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut steps = Vec::new();
        if !cleaned.is_empty() {
            let inner = cleaned
                .strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .ok_or_else(|| Error::invalid(format!("bad collision sequence `{s}`")))?;
            for pair in inner.split("),(") {
                let (a, b) = pair.split_once(',').ok_or_else(|| Error::invalid(format!("bad collision `{pair}`")))?;
                let p = |x: &str| x.parse::<usize>().map_err(|_| Error::invalid(format!("bad label `{x}`")));
                steps.push((p(a)?, p(b)?));
            }
        }
        CollisionSeq::new(n, steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Psi,
    Phi,
}

/// Letters in descent order: the first letter goes with the outermost
/// collision, the last with the innermost.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignPattern(pub Vec<Letter>);

impl SignPattern {
    pub fn all(len: usize) -> Vec<SignPattern> {
        (0..1usize << len)
            .map(|bits| {
                SignPattern(
                    (0..len).map(|k| if bits >> (len - 1 - k) & 1 == 0 { Letter::Psi } else { Letter::Phi }).collect(),
                )
            })
            .collect()
    }

    pub fn all_psi(len: usize) -> SignPattern {
        SignPattern(vec![Letter::Psi; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if *self == Letter::Psi { "Psi" } else { "Phi" })
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for SignPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        if t.trim().is_empty() {
            return Ok(SignPattern(Vec::new()));
        }
        t.split(',')
            .map(|x| match x.trim() {
                "Psi" | "Ψ" | "psi" => Ok(Letter::Psi),
                "Phi" | "Φ" | "phi" => Ok(Letter::Phi),
                o => Err(Error::invalid(format!("unknown letter `{o}`"))),
            })
            .collect::<Result<_>>()
            .map(SignPattern)
    }
}

/// One step of a descent, in descent order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentStep {
    pub pair: (usize, usize),
    pub letter: Letter,
    pub from: Face,
    pub to: Face,
}

/// The faces visited while evaluating a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Descent {
    pub steps: Vec<DescentStep>,
    pub face: Face,
    /// Negative covers cut out by the innermost `Φ`, if any.
    pub kernel_targets: Vec<Face>,
}

/// Face-level descent; valid for every `n` the arrangement supports.
pub fn descent(seq: &CollisionSeq, pat: &SignPattern) -> Result<Descent> {
    let m = seq.len();
    if pat.len() != m {
        return Err(Error::invalid(format!(
            "pattern {pat} has {} letters but the sequence has {m} collisions",
            pat.len()
        )));
    }
    let mut face = Face::minimal(seq.n());
    let mut steps = Vec::new();
    let mut last_phi = None;
    for (d, &letter) in pat.0.iter().enumerate() {
        let k = m - 1 - d;
        let (i, j) = seq.steps[k];
        let from = face.clone();
        if letter == Letter::Psi {
            face = face.split_off(&seq.cluster_before(k, i), Side::Negative)?;
        } else {
            last_phi = Some((i, j));
        }
        steps.push(DescentStep { pair: (i, j), letter, from, to: face.clone() });
    }
    let kernel_targets = match last_phi {
        Some((i, j)) => face.covers_in_halfspace(i, j, Side::Negative)?,
        None => Vec::new(),
    };
    Ok(Descent { steps, face, kernel_targets })
}

/// A subspace of the space at one face.
#[derive(Clone, Debug, PartialEq)]
pub struct StalkResult<F: Field> {
    pub face: Face,
    /// Covers whose `γ` maps cut out the subspace; empty for pure `Ψ` stalks.
    pub kernel_of: Vec<Face>,
    /// Columns form the canonical basis of the subspace.
    pub inclusion: Matrix<F>,
}

impl<F: Field> StalkResult<F> {
    pub fn dim(&self) -> usize {
        self.inclusion.cols()
    }
}

fn check_n<F: Field>(s: &HyperbolicSheaf<F>, seq: &CollisionSeq) -> Result<()> {
    if s.n() > MAX_STALK_N {
        return Err(Error::UnsupportedDimension { n: s.n(), reason: "stalk recipes stop at n = 3" });
    }
    if seq.n() != s.n() {
        return Err(Error::invalid(format!("sequence for n={} applied to a sheaf with n={}", seq.n(), s.n())));
    }
    Ok(())
}

pub fn iterated_stalk<F: Field>(
    s: &HyperbolicSheaf<F>,
    seq: &CollisionSeq,
    pat: &SignPattern,
) -> Result<StalkResult<F>> {
    check_n(s, seq)?;
    let d = descent(seq, pat)?;
    let dim = s.dim(&d.face)?;
    let inclusion = if d.kernel_targets.is_empty() {
        Matrix::identity(dim)
    } else {
        let parts = d.kernel_targets.iter().map(|c| s.gamma(&d.face, c).cloned()).collect::<Result<Vec<_>>>()?;
        Matrix::vstack(dim, &parts)?.kernel_matrix()
    };
    Ok(StalkResult { face: d.face, kernel_of: d.kernel_targets, inclusion })
}

/// All `2^(n-1)` stalks, keyed by pattern.
pub fn all_stalks<F: Field>(
    s: &HyperbolicSheaf<F>,
    seq: &CollisionSeq,
) -> Result<BTreeMap<SignPattern, StalkResult<F>>> {
    SignPattern::all(seq.len()).into_iter().map(|p| Ok((p.clone(), iterated_stalk(s, seq, &p)?))).collect()
}

/// The map from the minimal face to one stalk, in the stalk's basis.
///
/// `Ψ` letters apply `γ` to the next face; `Φ` letters apply the projector
/// `∏ (1 - δ_C γ_C)` over the negative covers `C` of the current face.
pub fn component_map<F: Field>(s: &HyperbolicSheaf<F>, seq: &CollisionSeq, pat: &SignPattern) -> Result<Matrix<F>> {
    let stalk = iterated_stalk(s, seq, pat)?;
    let d = descent(seq, pat)?;
    let mut m = Matrix::identity(s.dim(&Face::minimal(s.n()))?);
    for st in &d.steps {
        match st.letter {
            Letter::Psi => m = s.gamma(&st.from, &st.to)?.compose(&m)?,
            Letter::Phi => {
                let dim = s.dim(&st.from)?;
                let mut p = Matrix::identity(dim);
                for c in st.from.covers_in_halfspace(st.pair.0, st.pair.1, Side::Negative)? {
                    let dg = s.delta(&c, &st.from)?.compose(s.gamma(&st.from, &c)?)?;
                    p = Matrix::identity(dim).sub(&dg)?.compose(&p)?;
                }
                m = p.compose(&m)?;
            }
        }
    }
    corestrict(&stalk.inclusion, &m, &format!("component {pat} at {}", stalk.face))
}

/// Coordinates of the columns of `m` in the basis `basis`.
pub(crate) fn corestrict<F: Field>(basis: &Matrix<F>, m: &Matrix<F>, what: &str) -> Result<Matrix<F>> {
    basis.solve_in_span(m).ok_or_else(|| Error::Corestriction {
        what: what.to_string(),
        witness: basis.first_column_outside_span(m).unwrap_or(0),
    })
}

/// Whether two sequences differ by swapping two adjacent disjoint
/// collisions; returns the swapped position.
fn disjoint_swap(a: &CollisionSeq, b: &CollisionSeq) -> Option<usize> {
    if a.n != b.n || a.len() != b.len() {
        return None;
    }
    let diff: Vec<usize> = (0..a.len()).filter(|&k| a.steps[k] != b.steps[k]).collect();
    match diff.as_slice() {
        [k, l] if *l == k + 1 => {
            let (p, q) = (a.steps[*k], a.steps[*l]);
            let disjoint = p.0 != q.0 && p.0 != q.1 && p.1 != q.0 && p.1 != q.1;
            (disjoint && b.steps[*k] == q && b.steps[*l] == p).then_some(*k)
        }
        _ => None,
    }
}

/// Swaps the pattern letters that belong to collisions `k` and `k + 1`.
fn swap_letters(pat: &SignPattern, k: usize) -> SignPattern {
    let m = pat.len();
    let mut p = pat.clone();
    p.0.swap(m - 1 - k, m - 2 - k);
    p
}

/// Compares the stalks of two orderings of simultaneous collisions.
///
/// Identical sequences agree trivially. For `n ≤ 3` any two collisions share
/// a label, so no disjoint swap exists and the statement holds vacuously.
pub fn commutation_check<F: Field>(
    s: &HyperbolicSheaf<F>,
    seq1: &CollisionSeq,
    seq2: &CollisionSeq,
    pat: &SignPattern,
) -> Result<bool> {
    if seq1 == seq2 {
        iterated_stalk(s, seq1, pat)?;
        return Ok(true);
    }
    match disjoint_swap(seq1, seq2) {
        Some(k) => {
            let a = iterated_stalk(s, seq1, pat)?;
            let b = iterated_stalk(s, seq2, &swap_letters(pat, k))?;
            Ok(a.face == b.face && a.inclusion == b.inclusion)
        }
        None if s.n() <= MAX_STALK_N => Ok(true),
        None => Err(Error::invalid(format!("{seq1} and {seq2} are not related by a disjoint swap"))),
    }
}

/// Face-level version of [`commutation_check`]: the final faces agree and the
/// `Φ` collisions are the same set.
pub fn commutation_dry_run(seq1: &CollisionSeq, seq2: &CollisionSeq, pat: &SignPattern) -> Result<bool> {
    if seq1 == seq2 {
        return Ok(true);
    }
    let k = disjoint_swap(seq1, seq2)
        .ok_or_else(|| Error::invalid(format!("{seq1} and {seq2} are not related by a disjoint swap")))?;
    let a = descent(seq1, pat)?;
    let b = descent(seq2, &swap_letters(pat, k))?;
    let phis = |d: &Descent| {
        let mut v: Vec<(usize, usize)> = d.steps.iter().filter(|s| s.letter == Letter::Phi).map(|s| s.pair).collect();
        v.sort_unstable();
        v
    };
    Ok(a.face == b.face && phis(&a) == phis(&b))
}

/// The faces around the innermost wall after `Ψ`-descending the outer
/// collisions: the wall face, its negative split and the opposite split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallContext {
    pub zero: Face,
    pub neg: Face,
    pub pos: Face,
}

pub fn wall_context(seq: &CollisionSeq) -> Result<WallContext> {
    if seq.is_empty() {
        return Err(Error::invalid("a sequence with no collisions has no wall"));
    }
    let mut prefix = SignPattern::all_psi(seq.len() - 1);
    prefix.0.push(Letter::Phi);
    let d = descent(seq, &prefix)?;
    let (i, _) = seq.steps[0];
    let part = seq.cluster_before(0, i);
    Ok(WallContext {
        neg: d.face.split_off(&part, Side::Negative)?,
        pos: d.face.split_off(&part, Side::Positive)?,
        zero: d.face,
    })
}

/// Local quiver at a wall: `Z` is the wall face, `Neg`/`Pos` the two sides.
/// `w = gp.dn` crosses from `Neg` to `Pos`; `winv` is its inverse.
pub fn wall_quiver() -> Quiver {
    Quiver::from_spec(
        &["Z", "Neg", "Pos"],
        &[
            ("gn", "Z", "Neg"),
            ("dn", "Neg", "Z"),
            ("gp", "Z", "Pos"),
            ("dp", "Pos", "Z"),
            ("w", "Neg", "Pos"),
            ("winv", "Pos", "Neg"),
        ],
    )
    .unwrap()
}

/// The sheaf around the innermost wall of `seq`, as a rep of [`wall_quiver`].
pub fn wall_rep<F: Field>(s: &HyperbolicSheaf<F>, seq: &CollisionSeq) -> Result<Rep<F>> {
    let ctx = wall_context(seq)?;
    let gn = s.gamma(&ctx.zero, &ctx.neg)?.clone();
    let dn = s.delta(&ctx.neg, &ctx.zero)?.clone();
    let gp = s.gamma(&ctx.zero, &ctx.pos)?.clone();
    let dp = s.delta(&ctx.pos, &ctx.zero)?.clone();
    let w = gp.compose(&dn)?;
    let winv = w
        .inverse()
        .ok_or_else(|| Error::Validation(format!("wall crossing {} -> {} is not invertible", ctx.neg, ctx.pos)))?;
    Rep::from_named(
        Arc::new(wall_quiver()),
        &[("Z", s.dim(&ctx.zero)?), ("Neg", s.dim(&ctx.neg)?), ("Pos", s.dim(&ctx.pos)?)],
        vec![("gn", gn), ("dn", dn), ("gp", gp), ("dp", dp), ("w", w), ("winv", winv)],
    )
}

/// Canonical and variation maps as path expressions on [`wall_quiver`],
/// keyed by `(n, step)` where `step` counts collisions in descent order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanVarConfig {
    entries: BTreeMap<(usize, usize), (String, String)>,
}

/// The shipped default can/var file.
pub const DEFAULT_CANVAR: &str = include_str!("../data/canvar.default");

impl Default for CanVarConfig {
    fn default() -> Self {
        CanVarConfig::parse(DEFAULT_CANVAR).expect("shipped can/var file parses")
    }
}

impl CanVarConfig {
    /// Parses `canvar` followed by `u n=<n> step=<k> := <expr>` and
    /// `v n=<n> step=<k> := <expr>` lines. Only the innermost wall
    /// (`step = n - 1`) is accepted.
    pub fn parse(text: &str) -> Result<Self> {
        let q = wall_quiver();
        let mut header = false;
        let mut u: BTreeMap<(usize, usize), String> = BTreeMap::new();
        let mut v: BTreeMap<(usize, usize), String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = strip_comment(raw);
            if l.is_empty() {
                continue;
            }
            if !header {
                if l != "canvar" {
                    return Err(Error::parse(line, 1, "expected `canvar` header"));
                }
                header = true;
                continue;
            }
            let (lhs, rhs) =
                l.split_once(":=").ok_or_else(|| Error::parse(line, 1, "expected `<u|v> n=<n> step=<k> := <expr>`"))?;
            let words: Vec<&str> = lhs.split_whitespace().collect();
            let (which, n, step) = match words.as_slice() {
                [w, n, s] => {
                    let num = |x: &str, key: &str| {
                        x.strip_prefix(key)
                            .and_then(|v| v.parse::<usize>().ok())
                            .ok_or_else(|| Error::parse(line, 1, format!("expected `{key}<number>`")))
                    };
                    (*w, num(n, "n=")?, num(s, "step=")?)
                }
                _ => return Err(Error::parse(line, 1, "expected `<u|v> n=<n> step=<k>`")),
            };
            if n < 2 || step + 1 != n {
                return Err(Error::parse(line, 1, format!("can/var only at the innermost wall, step={}", n - 1)));
            }
            let expr: PathExpr<crate::Rational> = parse_expr(rhs.trim(), &q).map_err(|e| match e {
                Error::Parse { col, msg, .. } => Error::parse(line, col, msg),
                other => other,
            })?;
            let (want_s, want_t, map) = match which {
                "u" => ("Neg", "Z", &mut u),
                "v" => ("Z", "Neg", &mut v),
                o => return Err(Error::parse(line, 1, format!("unknown map `{o}`"))),
            };
            if !expr.is_zero() && (expr.source() != Some(want_s) || expr.target() != Some(want_t)) {
                return Err(Error::parse(line, 1, format!("`{which}` must run {want_s} -> {want_t}")));
            }
            map.insert((n, step), rhs.trim().to_string());
        }
        if !header {
            return Err(Error::parse(1, 1, "expected `canvar` header"));
        }
        let mut entries = BTreeMap::new();
        for (k, ue) in u {
            let ve =
                v.remove(&k).ok_or_else(|| Error::invalid(format!("u given without v for n={} step={}", k.0, k.1)))?;
            entries.insert(k, (ue, ve));
        }
        if let Some(k) = v.keys().next() {
            return Err(Error::invalid(format!("v given without u for n={} step={}", k.0, k.1)));
        }
        Ok(CanVarConfig { entries })
    }

    pub fn get(&self, n: usize, step: usize) -> Option<(&str, &str)> {
        self.entries.get(&(n, step)).map(|(u, v)| (u.as_str(), v.as_str()))
    }
}

impl fmt::Display for CanVarConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "canvar")?;
        for ((n, step), (u, v)) in &self.entries {
            writeln!(f, "u n={n} step={step} := {u}")?;
            writeln!(f, "v n={n} step={step} := {v}")?;
        }
        Ok(())
    }
}

/// `u: Ψ → Φ` and `v: Φ → Ψ` at the innermost wall, in stalk bases.
#[derive(Clone, Debug, PartialEq)]
pub struct CanVar<F: Field> {
    pub psi: StalkResult<F>,
    pub phi: StalkResult<F>,
    pub u: Matrix<F>,
    pub v: Matrix<F>,
}

/// Evaluates the configured can/var expressions and restricts them to the
/// `(Ψ..Ψ,Ψ)` and `(Ψ..Ψ,Φ)` stalks.
pub fn assemble_can_var<F: Field>(s: &HyperbolicSheaf<F>, seq: &CollisionSeq, cfg: &CanVarConfig) -> Result<CanVar<F>> {
    check_n(s, seq)?;
    let n = s.n();
    if n < 2 {
        return Err(Error::invalid("can/var needs at least one collision"));
    }
    let (ue, ve) =
        cfg.get(n, n - 1).ok_or_else(|| Error::invalid(format!("no can/var entry for n={n} step={}", n - 1)))?;
    let rep = wall_rep(s, seq)?;
    let q = rep.quiver().clone();
    let u_ambient = parse_expr::<F>(ue, &q)?.evaluate(&rep)?;
    let v_ambient = parse_expr::<F>(ve, &q)?.evaluate(&rep)?;
    let mut pat = SignPattern::all_psi(n - 1);
    let psi = iterated_stalk(s, seq, &pat)?;
    pat.0[n - 2] = Letter::Phi;
    let phi = iterated_stalk(s, seq, &pat)?;
    let (dz, dn) = (rep.dim("Z").unwrap(), rep.dim("Neg").unwrap());
    let fit = |m: Matrix<F>, rows: usize, cols: usize| if m.shape() == (0, 0) { Matrix::zeros(rows, cols) } else { m };
    let u_ambient = fit(u_ambient, dz, dn);
    let v_ambient = fit(v_ambient, dn, dz);
    let u = corestrict(&phi.inclusion, &u_ambient.compose(&psi.inclusion)?, "u")?;
    let v_on_phi = v_ambient.compose(&phi.inclusion)?;
    let v = corestrict(&psi.inclusion, &v_on_phi, "v")?;
    Ok(CanVar { psi, phi, u, v })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monodromy<F: Field> {
    pub t: Matrix<F>,
    /// Nilpotency index of `v∘u`; `None` when `T` is not unipotent.
    pub index: Option<usize>,
}

impl<F: Field> Monodromy<F> {
    pub fn is_unipotent(&self) -> bool {
        self.index.is_some()
    }
}

/// `T = id + v∘u`.
pub fn monodromy<F: Field>(u: &Matrix<F>, v: &Matrix<F>) -> Result<Monodromy<F>> {
    let vu = v.compose(u)?;
    let index = vu.nilpotency_index()?;
    Ok(Monodromy { t: Matrix::identity(vu.rows()).add(&vu)?, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypsheaf::{constant_fixture, permute_sheaf, random_fixture_sum, skyscraper_fixture};
    use crate::Rational;
    use proptest::prelude::*;

    type S = HyperbolicSheaf<Rational>;
    type M = Matrix<Rational>;

    fn face(s: &str) -> Face {
        s.parse().unwrap()
    }

    fn paper_seq() -> CollisionSeq {
        CollisionSeq::new(3, vec![(3, 2), (1, 2)]).unwrap()
    }

    fn pat(s: &str) -> SignPattern {
        s.parse().unwrap()
    }

    #[test]
    fn seq_validation() {
        assert!(CollisionSeq::new(3, vec![(1, 2), (2, 1)]).is_err());
        assert!(CollisionSeq::new(3, vec![(1, 2)]).is_err());
        assert!(CollisionSeq::new(2, vec![(1, 3)]).is_err());
        let s = CollisionSeq::parse(3, "(3,2),(1,2)").unwrap();
        assert_eq!(s, paper_seq());
        assert_eq!(CollisionSeq::parse(3, &s.to_string()).unwrap(), s);
        assert_eq!(s.cluster_before(1, 2), vec![2, 3]);
        assert_eq!(s.cluster_before(0, 2), vec![2]);
    }

    #[test]
    fn pattern_enumeration() {
        let all = SignPattern::all(2);
        assert_eq!(all.len(), 4);
        assert_eq!(all[0], pat("Psi,Psi"));
        assert_eq!(all[1], pat("Psi,Phi"));
        assert_eq!(all[3], pat("Φ,Φ"));
        assert_eq!(pat(&all[2].to_string()), all[2]);
    }

    #[test]
    fn descent_faces_for_the_shear_tree() {
        let seq = paper_seq();
        let d = descent(&seq, &pat("Psi,Psi")).unwrap();
        assert_eq!(d.face, face("1<3<2"));
        assert!(d.kernel_targets.is_empty());
        let d = descent(&seq, &pat("Psi,Phi")).unwrap();
        assert_eq!((d.face.clone(), d.kernel_targets.clone()), (face("1<2,3"), vec![face("1<3<2")]));
        let d = descent(&seq, &pat("Phi,Psi")).unwrap();
        assert_eq!((d.face.clone(), d.kernel_targets.clone()), (face("3<1,2"), vec![face("3<1<2")]));
        let d = descent(&seq, &pat("Phi,Phi")).unwrap();
        assert_eq!(d.face, face("1,2,3"));
        let mut t = d.kernel_targets.clone();
        t.sort();
        assert_eq!(t, vec![face("1,3<2"), face("3<1,2")]);
    }

    #[test]
    fn fixture_stalks() {
        let seq = paper_seq();
        let c: S = constant_fixture(3).unwrap();
        let k: S = skyscraper_fixture(3).unwrap();
        let pp = iterated_stalk(&c, &seq, &pat("Psi,Psi")).unwrap();
        assert_eq!((pp.dim(), pp.face.clone()), (1, face("1<3<2")));
        assert_eq!(iterated_stalk(&c, &seq, &pat("Phi,Phi")).unwrap().dim(), 0);
        for p in SignPattern::all(2) {
            let want = usize::from(p == pat("Phi,Phi"));
            assert_eq!(iterated_stalk(&k, &seq, &p).unwrap().dim(), want, "{p}");
            let want = usize::from(p == pat("Psi,Psi"));
            assert_eq!(iterated_stalk(&c, &seq, &p).unwrap().dim(), want, "{p}");
        }
        assert!(iterated_stalk(
            &constant_fixture::<Rational>(4).unwrap(),
            &CollisionSeq::new(4, vec![(1, 2), (2, 3), (3, 4)]).unwrap(),
            &pat("Psi,Psi,Psi")
        )
        .is_err());
    }

    #[test]
    fn commutation() {
        let c: S = constant_fixture(2).unwrap();
        let s = CollisionSeq::new(2, vec![(1, 2)]).unwrap();
        assert!(commutation_check(&c, &s, &s, &pat("Phi")).unwrap());
        let c3: S = constant_fixture(3).unwrap();
        let other = CollisionSeq::new(3, vec![(1, 2), (3, 2)]).unwrap();
        assert!(commutation_check(&c3, &paper_seq(), &other, &pat("Psi,Phi")).unwrap());

        let a = CollisionSeq::new(4, vec![(1, 2), (3, 4), (2, 4)]).unwrap();
        let b = CollisionSeq::new(4, vec![(3, 4), (1, 2), (2, 4)]).unwrap();
        for p in SignPattern::all(3) {
            // Two inner Ψ splits under an outer Φ pull singletons out of the
            // full block, so their order shows in the final face.
            let want = p != pat("Phi,Psi,Psi");
            assert_eq!(commutation_dry_run(&a, &b, &p).unwrap(), want, "{p}");
        }
        let d = descent(&a, &pat("Psi,Psi,Psi")).unwrap();
        assert_eq!(d.face, face("1<2<3<4"));
        let not = CollisionSeq::new(4, vec![(1, 2), (2, 3), (3, 4)]).unwrap();
        assert!(commutation_dry_run(&a, &not, &pat("Psi,Psi,Psi")).is_err());
    }

    #[test]
    fn wall_contexts() {
        let w = wall_context(&paper_seq()).unwrap();
        assert_eq!((w.zero, w.neg, w.pos), (face("1<2,3"), face("1<3<2"), face("1<2<3")));
        let w = wall_context(&CollisionSeq::new(2, vec![(1, 2)]).unwrap()).unwrap();
        assert_eq!((w.zero, w.neg, w.pos), (face("1,2"), face("1<2"), face("2<1")));
    }

    #[test]
    fn can_var_on_fixtures() {
        let cfg = CanVarConfig::default();
        let seq = CollisionSeq::new(2, vec![(1, 2)]).unwrap();
        let c: S = constant_fixture(2).unwrap();
        let cv = assemble_can_var(&c, &seq, &cfg).unwrap();
        assert_eq!((cv.psi.dim(), cv.phi.dim()), (1, 0));
        assert_eq!(cv.u.shape(), (0, 1));
        let m = monodromy(&cv.u, &cv.v).unwrap();
        assert_eq!(m.t, M::identity(1));
        let k: S = skyscraper_fixture(2).unwrap();
        let cv = assemble_can_var(&k, &seq, &cfg).unwrap();
        assert_eq!((cv.psi.dim(), cv.phi.dim()), (0, 1));
        assert_eq!(cv.v.shape(), (0, 1));
        let c3: S = constant_fixture(3).unwrap();
        let cv = assemble_can_var(&c3, &paper_seq(), &cfg).unwrap();
        assert_eq!((cv.psi.dim(), cv.phi.dim()), (1, 0));
    }

    #[test]
    fn canvar_config_errors() {
        assert!(CanVarConfig::parse("canvar\nu n=2 step=1 := gn\n").is_err());
        assert!(CanVarConfig::parse("canvar\nu n=2 step=1 := dn\n").is_err());
        assert!(CanVarConfig::parse("canvar\nu n=3 step=1 := dn\nv n=3 step=1 := gn\n").is_err());
        let cfg = CanVarConfig::parse("canvar\nu n=2 step=1 := dn\nv n=2 step=1 := gn\n").unwrap();
        assert_eq!(CanVarConfig::parse(&cfg.to_string()).unwrap(), cfg);
        let c: S = constant_fixture(2).unwrap();
        let err = assemble_can_var(
            &c.direct_sum(&skyscraper_fixture(2).unwrap()).unwrap(),
            &CollisionSeq::new(2, vec![(1, 2)]).unwrap(),
            &cfg,
        );
        assert!(matches!(err, Err(Error::Corestriction { .. })), "{err:?}");
    }

    #[test]
    fn monodromy_examples() {
        let z = monodromy(&M::zeros(1, 2), &M::zeros(2, 1)).unwrap();
        assert_eq!(z.t, M::identity(2));
        assert!(z.is_unipotent());
        let u = M::from_ints(&[&[0, 1], &[0, 0]]);
        let m = monodromy(&u, &M::identity(2)).unwrap();
        assert_eq!(m.index, Some(2));
        let bad = monodromy(&M::identity(1), &M::identity(1)).unwrap();
        assert_eq!(bad.t, M::scalar(1, Rational::from_int(2)));
        assert!(!bad.is_unipotent());
        assert!(monodromy(&M::zeros(1, 2), &M::zeros(1, 1)).is_err());
    }

    /// A sheaf supported on the closed hyperplane `x_2 = x_3`. Its stalks over
    /// the shear tree add up to more than the space at the minimal face, so
    /// such sheaves are kept out of the random suite.
    #[test]
    fn hyperplane_supported_sheaf_over_counts() {
        let support = ["1,2,3", "1<2,3", "2,3<1"];
        let dims = support.iter().map(|f| (face(f), 1)).collect();
        let mut gamma = BTreeMap::new();
        let mut delta = BTreeMap::new();
        for top in ["1<2,3", "2,3<1"] {
            gamma.insert((face("1,2,3"), face(top)), M::identity(1));
            delta.insert((face("1,2,3"), face(top)), M::identity(1));
        }
        let s = S::new(3, &dims, &gamma, &delta).unwrap();
        let got: Vec<usize> =
            SignPattern::all(2).iter().map(|p| iterated_stalk(&s, &paper_seq(), p).unwrap().dim()).collect();
        assert_eq!(got, vec![0, 1, 0, 1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn stalks_are_additive(a in 0u64..500, b in 0u64..500) {
            let sa: S = random_fixture_sum(3, a).unwrap();
            let sb: S = random_fixture_sum(3, b).unwrap();
            let sum = sa.direct_sum(&sb).unwrap();
            for p in SignPattern::all(2) {
                let (x, y, z) = (
                    iterated_stalk(&sa, &paper_seq(), &p).unwrap().dim(),
                    iterated_stalk(&sb, &paper_seq(), &p).unwrap().dim(),
                    iterated_stalk(&sum, &paper_seq(), &p).unwrap().dim(),
                );
                prop_assert_eq!(x + y, z);
            }
        }

        #[test]
        fn stalks_are_equivariant(seed in 0u64..500, k in 0usize..6) {
            let s: S = random_fixture_sum(3, seed).unwrap();
            let sigma = &Permutation::all(3)[k];
            let moved = permute_sheaf(sigma, &s).unwrap();
            for p in SignPattern::all(2) {
                let a = iterated_stalk(&s, &paper_seq(), &p).unwrap();
                let b = iterated_stalk(&moved, &paper_seq().act(sigma), &p).unwrap();
                prop_assert_eq!(a.dim(), b.dim());
                prop_assert_eq!(b.face, a.face.act(sigma));
            }
        }

        #[test]
        fn default_monodromy_is_unipotent(seed in 0u64..500) {
            let cfg = CanVarConfig::default();
            let s: S = random_fixture_sum(2, seed).unwrap();
            let cv = assemble_can_var(&s, &CollisionSeq::new(2, vec![(1, 2)]).unwrap(), &cfg).unwrap();
            prop_assert!(monodromy(&cv.u, &cv.v).unwrap().is_unipotent());
            let s3: S = random_fixture_sum(3, seed).unwrap();
            let cv = assemble_can_var(&s3, &paper_seq(), &cfg).unwrap();
            prop_assert!(monodromy(&cv.u, &cv.v).unwrap().is_unipotent());
        }
    }
}
