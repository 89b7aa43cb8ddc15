//! Hyperbolic sheaves on the faces of the braid arrangement.
//!
//! A sheaf stores one space per face and a pair of maps `γ: E_f → E_g`,
//! `δ: E_g → E_f` for every covering pair `f < g`. Maps between
//! non-adjacent faces are composites along a covering chain.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrangement::{enumerate_faces, Face, FacePoset, Permutation};
use crate::error::{Error, Result};
use crate::quiver::dsl::{check_relations, parse_relation_at, strip_comment, RelationSet};
use crate::quiver::{random_invertible, Arrow, Quiver, Rep};
use crate::ratmat::{Field, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicSheaf<F: Field> {
    poset: Arc<FacePoset>,
    dims: Vec<usize>,
    /// Indexed like `poset.covers()`.
    gamma: Vec<Matrix<F>>,
    delta: Vec<Matrix<F>>,
}

impl<F: Field> HyperbolicSheaf<F> {
    /// Builds from per-face dimensions and per-cover maps.
    ///
    /// Faces missing from `dims` are zero. A missing map is only accepted
    /// when one of its spaces is zero, since the map is then forced.
    pub fn new(
        n: usize,
        dims: &BTreeMap<Face, usize>,
        gamma: &BTreeMap<(Face, Face), Matrix<F>>,
        delta: &BTreeMap<(Face, Face), Matrix<F>>,
    ) -> Result<Self> {
        let poset = Arc::new(enumerate_faces(n)?);
        let mut d = vec![0; poset.faces().len()];
        for (f, &k) in dims {
            let i = poset.index_of(f).ok_or_else(|| Error::data(format!("face `{f}` is not a face for n={n}")))?;
            d[i] = k;
        }
        for (which, maps) in [("gamma", gamma), ("delta", delta)] {
            for (f, g) in maps.keys() {
                if !poset.is_cover(f, g) {
                    return Err(Error::data(format!("{which} {f} -> {g} is not along a covering pair")));
                }
            }
        }
        let mut gs = Vec::new();
        let mut ds = Vec::new();
        for &(a, b) in poset.covers() {
            let (f, g) = (&poset.faces()[a], &poset.faces()[b]);
            let key = (f.clone(), g.clone());
            let forced = d[a] == 0 || d[b] == 0;
            let take =
                |name: &str, m: Option<&Matrix<F>>, rows: usize, cols: usize, arrow: String| -> Result<Matrix<F>> {
                    match m {
                        Some(m) if m.shape() == (rows, cols) => Ok(m.clone()),
                        Some(m) => Err(Error::data(format!(
                            "{name} {arrow} is {}x{} but needs {rows}x{cols}",
                            m.rows(),
                            m.cols()
                        ))),
                        None if forced => Ok(Matrix::zeros(rows, cols)),
                        None => Err(Error::data(format!("missing {name} {arrow}"))),
                    }
                };
            gs.push(take("gamma", gamma.get(&key), d[b], d[a], format!("{f} -> {g}"))?);
            ds.push(take("delta", delta.get(&key), d[a], d[b], format!("{g} -> {f}"))?);
        }
        Ok(HyperbolicSheaf { poset, dims: d, gamma: gs, delta: ds })
    }

    fn from_raw(poset: Arc<FacePoset>, dims: Vec<usize>, gamma: Vec<Matrix<F>>, delta: Vec<Matrix<F>>) -> Self {
        HyperbolicSheaf { poset, dims, gamma, delta }
    }

    pub fn n(&self) -> usize {
        self.poset.n()
    }

    pub fn poset(&self) -> &Arc<FacePoset> {
        &self.poset
    }

    fn idx(&self, f: &Face) -> Result<usize> {
        self.poset.index_of(f).ok_or_else(|| Error::data(format!("face `{f}` is not a face for n={}", self.n())))
    }

    fn cover_idx(&self, f: &Face, g: &Face) -> Result<usize> {
        let key = (self.idx(f)?, self.idx(g)?);
        self.poset.covers().binary_search(&key).map_err(|_| Error::data(format!("{f} -> {g} is not a covering pair")))
    }

    pub fn dim(&self, f: &Face) -> Result<usize> {
        Ok(self.dims[self.idx(f)?])
    }

    /// Dimensions in poset order.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `γ: E_f → E_g` along a cover.
    pub fn gamma(&self, f: &Face, g: &Face) -> Result<&Matrix<F>> {
        Ok(&self.gamma[self.cover_idx(f, g)?])
    }

    /// `δ: E_g → E_f` along a cover `f < g`.
    pub fn delta(&self, g: &Face, f: &Face) -> Result<&Matrix<F>> {
        Ok(&self.delta[self.cover_idx(f, g)?])
    }

    /// Cover maps in poset cover order.
    pub fn gamma_maps(&self) -> &[Matrix<F>] {
        &self.gamma
    }

    pub fn delta_maps(&self) -> &[Matrix<F>] {
        &self.delta
    }

    fn chain(&self, f: &Face, g: &Face) -> Result<Vec<Face>> {
        if !f.closure_leq(g)? {
            return Err(Error::invalid(format!("{f} is not in the closure of {g}")));
        }
        Ok(self.poset.chains(f, g).into_iter().next().unwrap())
    }

    fn gamma_along(&self, chain: &[Face]) -> Result<Matrix<F>> {
        let mut m = Matrix::identity(self.dim(&chain[0])?);
        for w in chain.windows(2) {
            m = self.gamma(&w[0], &w[1])?.compose(&m)?;
        }
        Ok(m)
    }

    fn delta_along(&self, chain: &[Face]) -> Result<Matrix<F>> {
        let mut m = Matrix::identity(self.dim(chain.last().unwrap())?);
        for w in chain.windows(2).rev() {
            m = self.delta(&w[1], &w[0])?.compose(&m)?;
        }
        Ok(m)
    }

    /// `γ: E_f → E_g` for any `f ≤ g`, composed along the first covering chain.
    pub fn gamma_between(&self, f: &Face, g: &Face) -> Result<Matrix<F>> {
        self.gamma_along(&self.chain(f, g)?)
    }

    /// `δ: E_g → E_f` for any `f ≤ g`.
    pub fn delta_between(&self, g: &Face, f: &Face) -> Result<Matrix<F>> {
        self.delta_along(&self.chain(f, g)?)
    }

    /// Facewise and mapwise direct sum.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::invalid(format!("direct sum of sheaves with n={} and n={}", self.n(), other.n())));
        }
        Ok(Self::from_raw(
            self.poset.clone(),
            self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect(),
            self.gamma.iter().zip(&other.gamma).map(|(a, b)| a.direct_sum(b)).collect(),
            self.delta.iter().zip(&other.delta).map(|(a, b)| a.direct_sum(b)).collect(),
        ))
    }

    /// Transports along per-face isomorphisms `g_F`, in poset order.
    pub fn base_change(&self, g: &[Matrix<F>]) -> Result<Self> {
        if g.len() != self.dims.len() {
            return Err(Error::invalid("base change needs one matrix per face"));
        }
        let inv = g
            .iter()
            .map(|m| m.inverse().ok_or_else(|| Error::invalid("base change is not invertible")))
            .collect::<Result<Vec<_>>>()?;
        let mut gs = Vec::new();
        let mut ds = Vec::new();
        for (k, &(a, b)) in self.poset.covers().iter().enumerate() {
            gs.push(g[b].compose(&self.gamma[k])?.compose(&inv[a])?);
            ds.push(g[a].compose(&self.delta[k])?.compose(&inv[b])?);
        }
        Ok(Self::from_raw(self.poset.clone(), self.dims.clone(), gs, ds))
    }

    /// The face quiver: a vertex `E[F]` per face, arrows `g[f->g]` and
    /// `d[g->f]` per cover.
    pub fn face_quiver(poset: &FacePoset) -> Quiver {
        let vertices = poset.faces().iter().map(|f| format!("E[{f}]")).collect();
        let mut arrows = Vec::new();
        for (f, g) in poset.cover_faces() {
            arrows.push(Arrow { name: format!("g[{f}->{g}]"), source: format!("E[{f}]"), target: format!("E[{g}]") });
            arrows.push(Arrow { name: format!("d[{g}->{f}]"), source: format!("E[{g}]"), target: format!("E[{f}]") });
        }
        Quiver::new(vertices, arrows).expect("face names are unique")
    }

    /// The sheaf as a representation of [`face_quiver`](Self::face_quiver).
    pub fn to_rep(&self) -> Rep<F> {
        let q = Arc::new(Self::face_quiver(&self.poset));
        let maps = self.gamma.iter().zip(&self.delta).flat_map(|(g, d)| [g.clone(), d.clone()]).collect();
        Rep::new(q, self.dims.clone(), maps).expect("shapes are checked on construction")
    }

    /// Inverse of [`to_rep`](Self::to_rep).
    pub fn from_rep(n: usize, rep: &Rep<F>) -> Result<Self> {
        let poset = Arc::new(enumerate_faces(n)?);
        if **rep.quiver() != Self::face_quiver(&poset) {
            return Err(Error::invalid("representation is not over the face quiver"));
        }
        let mut gs = Vec::new();
        let mut ds = Vec::new();
        for pair in rep.maps().chunks(2) {
            gs.push(pair[0].clone());
            ds.push(pair[1].clone());
        }
        Ok(Self::from_raw(poset, rep.dims().to_vec(), gs, ds))
    }
}

/// Every space `ℚ`, every map the identity.
pub fn constant_fixture<F: Field>(n: usize) -> Result<HyperbolicSheaf<F>> {
    let poset = Arc::new(enumerate_faces(n)?);
    let k = poset.covers().len();
    let len = poset.faces().len();
    Ok(HyperbolicSheaf::from_raw(poset, vec![1; len], vec![Matrix::identity(1); k], vec![Matrix::identity(1); k]))
}

/// `ℚ` on the minimal face, zero elsewhere.
pub fn skyscraper_fixture<F: Field>(n: usize) -> Result<HyperbolicSheaf<F>> {
    scaled_skyscraper(n, 1)
}

/// The skyscraper with a `d`-dimensional stalk; `d = 0` is the zero sheaf.
pub fn scaled_skyscraper<F: Field>(n: usize, d: usize) -> Result<HyperbolicSheaf<F>> {
    let poset = Arc::new(enumerate_faces(n)?);
    let mut dims = vec![0; poset.faces().len()];
    dims[0] = d;
    let (gamma, delta) =
        poset.covers().iter().map(|&(a, b)| (Matrix::zeros(dims[b], dims[a]), Matrix::zeros(dims[a], dims[b]))).unzip();
    Ok(HyperbolicSheaf::from_raw(poset, dims, gamma, delta))
}

pub fn zero_sheaf<F: Field>(n: usize) -> Result<HyperbolicSheaf<F>> {
    scaled_skyscraper(n, 0)
}

/// Relabels: `E'_{σF} = E_F` with the same matrices.
pub fn permute_sheaf<F: Field>(sigma: &Permutation, s: &HyperbolicSheaf<F>) -> Result<HyperbolicSheaf<F>> {
    if sigma.n() != s.n() {
        return Err(Error::invalid(format!("permutation on {} labels acting on a sheaf with n={}", sigma.n(), s.n())));
    }
    let poset = s.poset.clone();
    let faces = poset.faces();
    let mut dims = vec![0; faces.len()];
    for (i, f) in faces.iter().enumerate() {
        dims[poset.index_of(&f.act(sigma)).unwrap()] = s.dims[i];
    }
    let mut gamma = vec![Matrix::zeros(0, 0); poset.covers().len()];
    let mut delta = gamma.clone();
    for (k, &(a, b)) in poset.covers().iter().enumerate() {
        let key = (poset.index_of(&faces[a].act(sigma)).unwrap(), poset.index_of(&faces[b].act(sigma)).unwrap());
        let j = poset.covers().binary_search(&key).expect("σ preserves covers");
        gamma[j] = s.gamma[k].clone();
        delta[j] = s.delta[k].clone();
    }
    Ok(HyperbolicSheaf::from_raw(poset, dims, gamma, delta))
}

pub fn direct_sum_sheaf<F: Field>(a: &HyperbolicSheaf<F>, b: &HyperbolicSheaf<F>) -> Result<HyperbolicSheaf<F>> {
    a.direct_sum(b)
}

/// Random per-face base change of a sum of fixtures; valid by construction.
pub fn random_fixture_sum<F: Field>(n: usize, seed: u64) -> Result<HyperbolicSheaf<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.gen_range(0..=2);
    let k = rng.gen_range(0..=2);
    let mut s = zero_sheaf(n)?;
    for _ in 0..c {
        s = s.direct_sum(&constant_fixture(n)?)?;
    }
    s = s.direct_sum(&scaled_skyscraper(n, k)?)?;
    random_base_change(&s, &mut rng)
}

pub(crate) fn random_base_change<F: Field>(s: &HyperbolicSheaf<F>, rng: &mut impl Rng) -> Result<HyperbolicSheaf<F>> {
    let g: Vec<Matrix<F>> = s.dims.iter().map(|&d| random_invertible(rng, d)).collect();
    s.base_change(&g)
}

/// Which axioms to check, plus extra relations over the face quiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomConfig {
    pub transitive: bool,
    pub idempotent: bool,
    pub wall_invertible: bool,
    /// Relation lines in the path DSL over [`HyperbolicSheaf::face_quiver`].
    pub relations: Vec<String>,
}

/// The shipped default axiom file.
pub const DEFAULT_AXIOMS: &str = include_str!("../data/axioms.default");

impl Default for AxiomConfig {
    fn default() -> Self {
        AxiomConfig::parse(DEFAULT_AXIOMS).expect("shipped axiom file parses")
    }
}

impl AxiomConfig {
    pub fn none() -> Self {
        AxiomConfig { transitive: false, idempotent: false, wall_invertible: false, relations: Vec::new() }
    }

    /// Parses `axioms` / `require <name>` / relation lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = AxiomConfig::none();
        let mut header = false;
        for (i, raw) in text.lines().enumerate() {
            let l = strip_comment(raw);
            if l.is_empty() {
                continue;
            }
            if !header {
                if l != "axioms" {
                    return Err(Error::parse(i + 1, 1, "expected `axioms` header"));
                }
                header = true;
                continue;
            }
            if let Some(rest) = l.strip_prefix("require ") {
                match rest.trim() {
                    "transitive" => cfg.transitive = true,
                    "idempotent" => cfg.idempotent = true,
                    "wall_invertible" => cfg.wall_invertible = true,
                    other => return Err(Error::parse(i + 1, 9, format!("unknown axiom `{other}`"))),
                }
            } else if l.contains('=') {
                cfg.relations.push(l.to_string());
            } else {
                return Err(Error::parse(i + 1, 1, format!("unexpected `{l}`")));
            }
        }
        if !header {
            return Err(Error::parse(1, 1, "expected `axioms` header"));
        }
        Ok(cfg)
    }

    /// Parses the relation lines against the face quiver of `poset`.
    pub fn relation_set<F: Field>(&self, poset: &FacePoset) -> Result<RelationSet<F>> {
        let q = Arc::new(HyperbolicSheaf::<F>::face_quiver(poset));
        let relations =
            self.relations.iter().enumerate().map(|(i, l)| parse_relation_at(l, &q, i + 1)).collect::<Result<_>>()?;
        Ok(RelationSet::new(q, relations))
    }
}

impl fmt::Display for AxiomConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axioms")?;
        for (on, name) in [
            (self.transitive, "transitive"),
            (self.idempotent, "idempotent"),
            (self.wall_invertible, "wall_invertible"),
        ] {
            if on {
                writeln!(f, "require {name}")?;
            }
        }
        for r in &self.relations {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    /// Where the first failure was seen.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match (&c.witness, c.passed) {
                (_, true) => writeln!(f, "pass  {}", c.axiom)?,
                (Some(w), false) => writeln!(f, "FAIL  {}  at {w}", c.axiom)?,
                (None, false) => writeln!(f, "FAIL  {}", c.axiom)?,
            }
        }
        Ok(())
    }
}

/// Opposite covers of `c`: pairs of covers splitting the same block of `c`
/// into the same two parts in opposite orders, each pair listed once.
pub fn opposite_covers(c: &Face) -> Vec<(Face, Face)> {
    let mut out = Vec::new();
    for a in c.covers() {
        let Some(k) = (0..c.num_blocks()).find(|&k| !a.blocks().contains(&c.blocks()[k])) else {
            continue;
        };
        let mut blocks = a.blocks().to_vec();
        blocks.swap(k, k + 1);
        let b = Face::new(blocks).expect("swapping adjacent blocks gives a face");
        if a < b {
            out.push((a, b));
        }
    }
    out
}

/// `φ = γ_{C→P} δ_{N→C}: E_N → E_P` for opposite covers.
pub fn wall_crossing<F: Field>(s: &HyperbolicSheaf<F>, c: &Face, neg: &Face, pos: &Face) -> Result<Matrix<F>> {
    s.gamma(c, pos)?.compose(s.delta(neg, c)?)
}

/// Checks the configured axioms.
pub fn validate<F: Field>(s: &HyperbolicSheaf<F>, cfg: &AxiomConfig) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let faces = s.poset.faces();
    if cfg.transitive {
        for (name, use_gamma) in [("gamma-transitivity", true), ("delta-transitivity", false)] {
            let mut witness = None;
            'pairs: for f in faces {
                for g in faces {
                    if f.codim() < g.codim() + 2 || !f.closure_leq(g)? {
                        continue;
                    }
                    let chains = s.poset.chains(f, g);
                    let eval = |ch: &[Face]| if use_gamma { s.gamma_along(ch) } else { s.delta_along(ch) };
                    let first = eval(&chains[0])?;
                    for ch in &chains[1..] {
                        if eval(ch)? != first {
                            let show = |c: &[Face]| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" -> ");
                            witness = Some(format!("chains {} and {}", show(&chains[0]), show(ch)));
                            break 'pairs;
                        }
                    }
                }
            }
            checks.push(AxiomCheck { axiom: name.into(), passed: witness.is_none(), witness });
        }
    }
    if cfg.idempotent {
        let witness = s.poset.cover_faces().enumerate().find_map(|(k, (f, g))| {
            let gd = s.gamma[k].compose(&s.delta[k]).ok()?;
            (gd != Matrix::identity(s.dim(g).ok()?)).then(|| format!("cover {f} < {g}"))
        });
        checks.push(AxiomCheck { axiom: "gamma-delta-identity".into(), passed: witness.is_none(), witness });
    }
    if cfg.wall_invertible {
        let mut witness = None;
        'faces: for c in faces {
            for (neg, pos) in opposite_covers(c) {
                for (a, b) in [(&neg, &pos), (&pos, &neg)] {
                    if !wall_crossing(s, c, a, b)?.is_invertible() {
                        witness = Some(format!("{a} through {c} to {b}"));
                        break 'faces;
                    }
                }
            }
        }
        checks.push(AxiomCheck { axiom: "wall-invertibility".into(), passed: witness.is_none(), witness });
    }
    if !cfg.relations.is_empty() {
        let rs = cfg.relation_set::<F>(&s.poset)?;
        let report = check_relations(&s.to_rep(), &rs)?;
        for c in report.checks {
            checks.push(AxiomCheck {
                witness: (!c.passed).then(|| format!("{:?}", c.value)),
                axiom: c.relation,
                passed: c.passed,
            });
        }
    }
    Ok(ValidationReport { checks })
}

/// Rebuilds the cover maps of `s` with one `γ` replaced; used by mutation tests.
pub fn with_gamma<F: Field>(s: &HyperbolicSheaf<F>, f: &Face, g: &Face, m: Matrix<F>) -> Result<HyperbolicSheaf<F>> {
    let k = s.cover_idx(f, g)?;
    if m.shape() != s.gamma[k].shape() {
        return Err(Error::data(format!("gamma {f} -> {g} has the wrong shape")));
    }
    let mut out = s.clone();
    out.gamma[k] = m;
    Ok(out)
}

/// Same as [`with_gamma`] for `δ: E_g → E_f`.
pub fn with_delta<F: Field>(s: &HyperbolicSheaf<F>, g: &Face, f: &Face, m: Matrix<F>) -> Result<HyperbolicSheaf<F>> {
    let k = s.cover_idx(f, g)?;
    if m.shape() != s.delta[k].shape() {
        return Err(Error::data(format!("delta {g} -> {f} has the wrong shape")));
    }
    let mut out = s.clone();
    out.delta[k] = m;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    type S = HyperbolicSheaf<Rational>;
    type M = Matrix<Rational>;

    fn face(s: &str) -> Face {
        s.parse().unwrap()
    }

    #[test]
    fn fixtures_validate() {
        let cfg = AxiomConfig::default();
        for n in 1..=3 {
            let c: S = constant_fixture(n).unwrap();
            assert!(validate(&c, &cfg).unwrap().all_pass(), "constant n={n}");
            let k: S = skyscraper_fixture(n).unwrap();
            assert!(validate(&k, &cfg).unwrap().all_pass(), "skyscraper n={n}");
        }
        assert_eq!(constant_fixture::<Rational>(2).unwrap().dims(), &[1, 1, 1]);
        let k: S = skyscraper_fixture(3).unwrap();
        assert_eq!(k.dims().iter().filter(|&&d| d > 0).count(), 1);
        assert_eq!(k.dim(&face("1,2,3")).unwrap(), 1);
    }

    #[test]
    fn mutation_breaks_transitivity() {
        let c: S = constant_fixture(3).unwrap();
        let bad = with_gamma(&c, &face("1,2<3"), &face("1<2<3"), M::zeros(1, 1)).unwrap();
        let report = validate(&bad, &AxiomConfig::default()).unwrap();
        let t = report.check("gamma-transitivity").unwrap();
        assert!(!t.passed);
        assert!(t.witness.as_ref().unwrap().contains("1<2<3"), "{report}");
        assert!(report.check("delta-transitivity").unwrap().passed);
    }

    #[test]
    fn idempotence_and_wall_checks() {
        let c: S = constant_fixture(2).unwrap();
        let bad = with_delta(&c, &face("1<2"), &face("1,2"), M::from_ints(&[&[2]])).unwrap();
        let r = validate(&bad, &AxiomConfig::default()).unwrap();
        assert!(!r.check("gamma-delta-identity").unwrap().passed);
        assert!(r.check("wall-invertibility").unwrap().passed);
        let bad = with_delta(&c, &face("1<2"), &face("1,2"), M::zeros(1, 1)).unwrap();
        let r = validate(&bad, &AxiomConfig::default()).unwrap();
        assert!(!r.check("wall-invertibility").unwrap().passed);
    }

    #[test]
    fn opposite_cover_pairs() {
        let d = face("1,2,3");
        let pairs = opposite_covers(&d);
        assert_eq!(pairs.len(), 3);
        assert!(pairs.contains(&(face("1<2,3"), face("2,3<1"))));
        let w = face("1,2<3");
        assert_eq!(opposite_covers(&w), vec![(face("1<2<3"), face("2<1<3"))]);
        assert!(opposite_covers(&face("1<2<3")).is_empty());
    }

    #[test]
    fn direct_sum_examples() {
        let c: S = constant_fixture(2).unwrap();
        let k: S = skyscraper_fixture(2).unwrap();
        let ck = direct_sum_sheaf(&c, &k).unwrap();
        assert_eq!(ck.dim(&face("1<2")).unwrap(), 1);
        assert_eq!(ck.dim(&face("1,2")).unwrap(), 2);
        assert_eq!(ck.dim(&face("2<1")).unwrap(), 1);
        assert_eq!(c.direct_sum(&zero_sheaf(2).unwrap()).unwrap(), c);
        assert!(validate(&ck, &AxiomConfig::default()).unwrap().all_pass());
        assert!(c.direct_sum(&constant_fixture(3).unwrap()).is_err());
    }

    #[test]
    fn fixtures_are_symmetric() {
        for n in 1..=3 {
            let c: S = constant_fixture(n).unwrap();
            let k: S = skyscraper_fixture(n).unwrap();
            for sigma in Permutation::all(n) {
                assert_eq!(permute_sheaf(&sigma, &c).unwrap(), c);
                assert_eq!(permute_sheaf(&sigma, &k).unwrap(), k);
            }
        }
    }

    #[test]
    fn rep_roundtrip() {
        let s: S = random_fixture_sum(3, 4).unwrap();
        let r = s.to_rep();
        assert_eq!(S::from_rep(3, &r).unwrap(), s);
    }

    #[test]
    fn relation_axioms_over_face_quiver() {
        let cfg = AxiomConfig::parse("axioms\nd[1<2->1,2].g[1,2->1<2] - id@E[1,2] = 0\n").unwrap();
        let c: S = constant_fixture(2).unwrap();
        assert!(validate(&c, &cfg).unwrap().all_pass());
        let k: S = skyscraper_fixture(2).unwrap();
        let r = validate(&k, &cfg).unwrap();
        assert!(!r.all_pass());
        let bad = AxiomConfig::parse("axioms\ng[1,2->1<2] - id@E[1,2] = 0\n").unwrap();
        assert!(matches!(validate(&c, &bad), Err(Error::MixedEndpoints(_))));
    }

    #[test]
    fn default_config_text_roundtrip() {
        let cfg = AxiomConfig::default();
        assert!(cfg.transitive && cfg.idempotent && cfg.wall_invertible);
        assert_eq!(AxiomConfig::parse(&cfg.to_string()).unwrap(), cfg);
        assert!(AxiomConfig::parse("require transitive").is_err());
        assert!(AxiomConfig::parse("axioms\nrequire nonsense").is_err());
    }

    #[test]
    fn derived_maps_follow_chains() {
        let c: S = constant_fixture(3).unwrap();
        let g = c.gamma_between(&face("1,2,3"), &face("1<2<3")).unwrap();
        assert_eq!(g, M::identity(1));
        assert!(c.gamma_between(&face("1<2<3"), &face("1,2,3")).is_err());
        assert_eq!(c.delta_between(&face("1<2<3"), &face("1<2<3")).unwrap(), M::identity(1));
    }

    fn arb_sheaf(n: usize) -> impl Strategy<Value = S> {
        (0u64..1000).prop_map(move |seed| random_fixture_sum(n, seed).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn permutation_is_an_action(s in arb_sheaf(3), a in 0usize..6, b in 0usize..6) {
            let all = Permutation::all(3);
            let (sig, tau) = (&all[a], &all[b]);
            let lhs = permute_sheaf(&sig.after(tau), &s).unwrap();
            let rhs = permute_sheaf(sig, &permute_sheaf(tau, &s).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(permute_sheaf(&Permutation::identity(3), &s).unwrap(), s);
        }

        #[test]
        fn validity_is_relabelling_invariant(s in arb_sheaf(3), a in 0usize..6) {
            let sig = &Permutation::all(3)[a];
            let cfg = AxiomConfig::default();
            let v1 = validate(&s, &cfg).unwrap();
            let v2 = validate(&permute_sheaf(sig, &s).unwrap(), &cfg).unwrap();
            prop_assert!(v1.all_pass());
            prop_assert_eq!(v1.all_pass(), v2.all_pass());
        }

        #[test]
        fn sums_stay_valid(a in arb_sheaf(2), b in arb_sheaf(2)) {
            let cfg = AxiomConfig::default();
            let s = a.direct_sum(&b).unwrap();
            prop_assert!(validate(&s, &cfg).unwrap().all_pass());
            let d = face("1,2");
            prop_assert_eq!(s.dim(&d).unwrap(), a.dim(&d).unwrap() + b.dim(&d).unwrap());
        }
    }
}
