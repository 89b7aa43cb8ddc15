//! Tree-indexed fiber functors and their comparison with the stalk at the
//! minimal face.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::arrangement::{Face, Permutation};
use crate::cycles::{component_map, iterated_stalk, CollisionSeq, SignPattern, StalkResult, MAX_STALK_N};
use crate::error::{Error, Result};
use crate::hypsheaf::HyperbolicSheaf;
use crate::ratmat::{Field, Matrix};

/// Which child of a node is the minuend of its difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    /// `(L-R)`: left minus right.
    LeftMinusRight,
    /// `(L^R)`: right minus left.
    RightMinusLeft,
}

/// Planar rooted binary tree with labelled leaves.
///
/// Each node stands for the difference of the representatives of its two
/// children; the representative of a node is that of its subtrahend child.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelledTree {
    Leaf(usize),
    Node { left: Box<LabelledTree>, right: Box<LabelledTree>, orientation: Orientation },
}

impl LabelledTree {
    pub fn node(left: LabelledTree, right: LabelledTree, orientation: Orientation) -> Self {
        LabelledTree::Node { left: Box::new(left), right: Box::new(right), orientation }
    }

    /// Leaf labels in planar order.
    pub fn leaves(&self) -> Vec<usize> {
        match self {
            LabelledTree::Leaf(l) => vec![*l],
            LabelledTree::Node { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }

    pub fn n(&self) -> usize {
        self.leaves().len()
    }

    /// Checks that the leaves are exactly `1..=n`.
    pub fn validate(&self) -> Result<()> {
        let mut l = self.leaves();
        l.sort_unstable();
        if l != (1..=l.len()).collect::<Vec<_>>() {
            return Err(Error::invalid(format!("tree {self} must have leaves 1..={}", l.len())));
        }
        Ok(())
    }

    pub fn representative(&self) -> usize {
        match self {
            LabelledTree::Leaf(l) => *l,
            LabelledTree::Node { left, right, orientation } => match orientation {
                Orientation::LeftMinusRight => right.representative(),
                Orientation::RightMinusLeft => left.representative(),
            },
        }
    }

    fn pair(&self) -> Option<(usize, usize)> {
        match self {
            LabelledTree::Leaf(_) => None,
            LabelledTree::Node { left, right, orientation } => Some(match orientation {
                Orientation::LeftMinusRight => (left.representative(), right.representative()),
                Orientation::RightMinusLeft => (right.representative(), left.representative()),
            }),
        }
    }

    /// Relabels leaves.
    pub fn act(&self, sigma: &Permutation) -> LabelledTree {
        match self {
            LabelledTree::Leaf(l) => LabelledTree::Leaf(sigma.apply(*l)),
            LabelledTree::Node { left, right, orientation } => {
                LabelledTree::node(left.act(sigma), right.act(sigma), *orientation)
            }
        }
    }
}

impl fmt::Display for LabelledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelledTree::Leaf(l) => write!(f, "{l}"),
            LabelledTree::Node { left, right, orientation } => {
                let op = if *orientation == Orientation::LeftMinusRight { '-' } else { '^' };
                write!(f, "({left}{op}{right})")
            }
        }
    }
}

/// Grammar: `tree := label | '(' tree ('-' | '^') tree ')'`.
/// `(L-R)` is left minus right, `(L^R)` right minus left.
impl FromStr for LabelledTree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_tree(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::parse(1, pos + 1, "trailing input after tree"));
        }
        t.validate()?;
        Ok(t)
    }
}

fn parse_tree(c: &[char], pos: &mut usize) -> Result<LabelledTree> {
    match c.get(*pos) {
        Some('(') => {
            *pos += 1;
            let left = parse_tree(c, pos)?;
            let orientation = match c.get(*pos) {
                Some('-') => Orientation::LeftMinusRight,
                Some('^') => Orientation::RightMinusLeft,
                _ => return Err(Error::parse(1, *pos + 1, "expected `-` or `^`")),
            };
            *pos += 1;
            let right = parse_tree(c, pos)?;
            if c.get(*pos) != Some(&')') {
                return Err(Error::parse(1, *pos + 1, "expected `)`"));
            }
            *pos += 1;
            Ok(LabelledTree::node(left, right, orientation))
        }
        Some(d) if d.is_ascii_digit() => {
            let start = *pos;
            while c.get(*pos).is_some_and(|d| d.is_ascii_digit()) {
                *pos += 1;
            }
            let text: String = c[start..*pos].iter().collect();
            Ok(LabelledTree::Leaf(text.parse().map_err(|_| Error::parse(1, start + 1, "bad label"))?))
        }
        _ => Err(Error::parse(1, *pos + 1, "expected a label or `(`")),
    }
}

/// Internal nodes deepest first, ties in left-to-right planar order.
pub fn tree_to_collisions(t: &LabelledTree) -> Result<CollisionSeq> {
    fn walk(t: &LabelledTree, depth: usize, out: &mut Vec<(usize, (usize, usize))>) {
        if let LabelledTree::Node { left, right, .. } = t {
            walk(left, depth + 1, out);
            out.push((depth, t.pair().unwrap()));
            walk(right, depth + 1, out);
        }
    }
    t.validate()?;
    let mut nodes = Vec::new();
    walk(t, 0, &mut nodes);
    // Stable sort keeps in-order position among equal depths.
    nodes.sort_by_key(|n| std::cmp::Reverse(n.0));
    CollisionSeq::new(t.n(), nodes.into_iter().map(|(_, p)| p).collect())
}

/// The two trees for two points: `z_1 - z_2` and `z_2 - z_1`, drawn with
/// leaf 1 on the right and on the left.
pub fn tree_t1() -> LabelledTree {
    "(2^1)".parse().unwrap()
}

pub fn tree_t2() -> LabelledTree {
    "(1^2)".parse().unwrap()
}

/// `z_3 - z_2` inside, then `z_1 - z_2`.
pub fn shear_tree() -> LabelledTree {
    "((3-2)^1)".parse().unwrap()
}

/// All planar labelled binary trees with `n` leaves. Orientations follow one
/// fixed rule: a node whose children are both leaves reads left minus right;
/// any other node reads (the side with fewer leaves) minus (the other side),
/// with ties broken as left minus right.
pub fn enumerate_trees(n: usize) -> Result<Vec<LabelledTree>> {
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension { n, reason: "tree enumeration supports 1 ≤ n ≤ 4" });
    }
    fn shapes(labels: &[usize]) -> Vec<LabelledTree> {
        if labels.len() == 1 {
            return vec![LabelledTree::Leaf(labels[0])];
        }
        let mut out = Vec::new();
        for k in 1..labels.len() {
            for l in shapes(&labels[..k]) {
                for r in shapes(&labels[k..]) {
                    let orientation =
                        if k > labels.len() - k { Orientation::RightMinusLeft } else { Orientation::LeftMinusRight };
                    out.push(LabelledTree::node(l.clone(), r, orientation));
                }
            }
        }
        out
    }
    let mut out = Vec::new();
    for sigma in Permutation::all(n) {
        out.extend(shapes(sigma.images()));
    }
    out.sort();
    Ok(out)
}

/// All `2^(n-1)` stalks along a tree, in [`SignPattern::all`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberValue<F: Field> {
    pub seq: CollisionSeq,
    pub components: BTreeMap<SignPattern, StalkResult<F>>,
}

impl<F: Field> FiberValue<F> {
    pub fn dim(&self) -> usize {
        self.components.values().map(|c| c.dim()).sum()
    }

    pub fn component_dims(&self) -> Vec<(SignPattern, usize)> {
        self.components.iter().map(|(p, c)| (p.clone(), c.dim())).collect()
    }

    /// Offset of each component inside the total space.
    pub fn offsets(&self) -> BTreeMap<SignPattern, usize> {
        let mut acc = 0;
        self.components
            .iter()
            .map(|(p, c)| {
                let o = acc;
                acc += c.dim();
                (p.clone(), o)
            })
            .collect()
    }
}

fn check_fiber_n(n: usize) -> Result<()> {
    if n > MAX_STALK_N {
        return Err(Error::UnsupportedDimension { n, reason: "fiber functors along trees stop at n = 3" });
    }
    Ok(())
}

pub fn omega_t<F: Field>(s: &HyperbolicSheaf<F>, t: &LabelledTree) -> Result<FiberValue<F>> {
    check_fiber_n(s.n())?;
    if t.n() != s.n() {
        return Err(Error::invalid(format!("tree with {} leaves for a sheaf with n={}", t.n(), s.n())));
    }
    let seq = tree_to_collisions(t)?;
    let components = SignPattern::all(seq.len())
        .into_iter()
        .map(|p| Ok((p.clone(), iterated_stalk(s, &seq, &p)?)))
        .collect::<Result<_>>()?;
    Ok(FiberValue { seq, components })
}

/// The space at the minimal face, with its standard basis.
pub fn omega_b<F: Field>(s: &HyperbolicSheaf<F>) -> Result<Matrix<F>> {
    Ok(Matrix::identity(s.dim(&Face::minimal(s.n()))?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison<F: Field> {
    /// `ω^B(s) → ω_T(s)`, components stacked in pattern order.
    pub map: Matrix<F>,
    pub inverse: Option<Matrix<F>>,
}

impl<F: Field> Comparison<F> {
    pub fn is_invertible(&self) -> bool {
        self.inverse.is_some()
    }
}

/// Stacks [`component_map`] over all patterns.
pub fn comparison<F: Field>(s: &HyperbolicSheaf<F>, t: &LabelledTree) -> Result<Comparison<F>> {
    let fv = omega_t(s, t)?;
    let base = s.dim(&Face::minimal(s.n()))?;
    let parts = fv.components.keys().map(|p| component_map(s, &fv.seq, p)).collect::<Result<Vec<_>>>()?;
    let map = Matrix::vstack(base, &parts)?;
    let inverse = map.inverse();
    Ok(Comparison { map, inverse })
}

/// A functor to vector spaces, for exactness probes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Functor {
    OmegaT(LabelledTree),
    OmegaB,
}

impl Functor {
    pub fn dim<F: Field>(&self, s: &HyperbolicSheaf<F>) -> Result<usize> {
        match self {
            Functor::OmegaT(t) => Ok(omega_t(s, t)?.dim()),
            Functor::OmegaB => Ok(omega_b(s)?.cols()),
        }
    }
}

impl fmt::Display for Functor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functor::OmegaT(t) => write!(f, "omega_T[{t}]"),
            Functor::OmegaB => write!(f, "omega_B"),
        }
    }
}

/// `(sub, total, quotient)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactTriple<F: Field> {
    pub sub: HyperbolicSheaf<F>,
    pub total: HyperbolicSheaf<F>,
    pub quotient: HyperbolicSheaf<F>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    /// `(dim sub, dim total, dim quotient)` per triple.
    pub dims: Vec<(usize, usize, usize)>,
    pub additive: bool,
    pub faithful: bool,
}

/// Dimension additivity over each triple, and `F(s) = 0 ⇒ s = 0` over every
/// sheaf appearing in the suite.
pub fn exactness_probe<F: Field>(functor: &Functor, suite: &[ExactTriple<F>]) -> Result<ExactnessReport> {
    let mut dims = Vec::new();
    let mut faithful = true;
    for tr in suite {
        let n = tr.total.n();
        if tr.sub.n() != n || tr.quotient.n() != n {
            return Err(Error::invalid("triple mixes different n"));
        }
        let facewise = tr.sub.dims().iter().zip(tr.quotient.dims()).map(|(a, b)| a + b).collect::<Vec<_>>();
        if facewise != tr.total.dims() {
            return Err(Error::invalid("total is not an extension of quotient by sub facewise"));
        }
        let d = (functor.dim(&tr.sub)?, functor.dim(&tr.total)?, functor.dim(&tr.quotient)?);
        for (s, k) in [(&tr.sub, d.0), (&tr.total, d.1), (&tr.quotient, d.2)] {
            if k == 0 && s.total_dim() != 0 {
                faithful = false;
            }
        }
        dims.push(d);
    }
    let additive = dims.iter().all(|(a, b, c)| a + c == *b);
    Ok(ExactnessReport { dims, additive, faithful })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gluing::random_valid_sheaf;
    use crate::hypsheaf::{constant_fixture, permute_sheaf, skyscraper_fixture, zero_sheaf};
    use crate::Rational;

    type S = HyperbolicSheaf<Rational>;
    type M = Matrix<Rational>;

    #[test]
    fn tree_literals() {
        let t = shear_tree();
        assert_eq!(t.to_string(), "((3-2)^1)");
        assert_eq!(tree_to_collisions(&t).unwrap().steps(), &[(3, 2), (1, 2)]);
        assert_eq!(tree_to_collisions(&tree_t1()).unwrap().steps(), &[(1, 2)]);
        assert_eq!(tree_to_collisions(&tree_t2()).unwrap().steps(), &[(2, 1)]);
        assert!("(1-1)".parse::<LabelledTree>().is_err());
        assert!("(1-2".parse::<LabelledTree>().is_err());
        assert!("(1*2)".parse::<LabelledTree>().is_err());
        let lit = "((3-2)-1)".parse::<LabelledTree>().unwrap();
        assert_eq!(tree_to_collisions(&lit).unwrap().steps(), &[(3, 2), (2, 1)]);
    }

    #[test]
    fn ties_break_left_to_right() {
        let t: LabelledTree = "((1-2)-(3-4))".parse().unwrap();
        assert_eq!(tree_to_collisions(&t).unwrap().steps(), &[(1, 2), (3, 4), (2, 4)]);
    }

    #[test]
    fn tree_counts() {
        assert_eq!(enumerate_trees(1).unwrap().len(), 1);
        assert_eq!(enumerate_trees(2).unwrap().len(), 2);
        assert_eq!(enumerate_trees(3).unwrap().len(), 12);
        assert_eq!(enumerate_trees(4).unwrap().len(), 120);
        assert!(enumerate_trees(3).unwrap().contains(&shear_tree()));
        for t in enumerate_trees(4).unwrap() {
            tree_to_collisions(&t).unwrap();
        }
    }

    #[test]
    fn fixture_fibers() {
        let t = shear_tree();
        let c = omega_t(&constant_fixture::<Rational>(3).unwrap(), &t).unwrap();
        assert_eq!(c.dim(), 1);
        assert_eq!(c.components[&"Psi,Psi".parse().unwrap()].dim(), 1);
        let k = omega_t(&skyscraper_fixture::<Rational>(3).unwrap(), &t).unwrap();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.components[&"Phi,Phi".parse().unwrap()].dim(), 1);
        for n in 1..=3 {
            assert_eq!(omega_b(&constant_fixture::<Rational>(n).unwrap()).unwrap().cols(), 1);
        }
    }

    #[test]
    fn n2_comparison() {
        let c = comparison(&constant_fixture::<Rational>(2).unwrap(), &tree_t1()).unwrap();
        assert_eq!(c.map, M::identity(1));
        let k = comparison(&skyscraper_fixture::<Rational>(2).unwrap(), &tree_t1()).unwrap();
        assert_eq!(k.map, M::identity(1));
        let zero: crate::Face = "1,2".parse().unwrap();
        let neg: crate::Face = "1<2".parse().unwrap();
        for seed in 0..20 {
            let s: S = random_valid_sheaf(2, seed).unwrap();
            let cmp = comparison(&s, &tree_t1()).unwrap();
            let inv = cmp.inverse.clone().expect("invertible");
            let psi = s.dim(&neg).unwrap();
            let phi =
                crate::cycles::iterated_stalk(&s, &tree_to_collisions(&tree_t1()).unwrap(), &"Phi".parse().unwrap())
                    .unwrap();
            // (ψ, φ) ↦ δψ + φ
            let delta = s.delta(&neg, &zero).unwrap();
            let explicit = M::hstack(s.dim(&zero).unwrap(), &[delta.clone(), phi.inclusion.clone()]).unwrap();
            assert_eq!(explicit.cols(), psi + phi.dim());
            assert_eq!(inv, explicit);
        }
    }

    #[test]
    fn comparison_on_all_trees() {
        for n in 1..=3 {
            for seed in 0..6 {
                let s: S = random_valid_sheaf(n, seed).unwrap();
                for t in enumerate_trees(n).unwrap() {
                    let c = comparison(&s, &t).unwrap();
                    assert!(c.is_invertible(), "n={n} seed={seed} tree={t}");
                    for sigma in Permutation::all(n) {
                        let moved = comparison(&permute_sheaf(&sigma, &s).unwrap(), &t.act(&sigma)).unwrap();
                        assert!(moved.is_invertible());
                    }
                }
            }
        }
    }

    #[test]
    fn exactness() {
        let c: S = constant_fixture(2).unwrap();
        let k: S = skyscraper_fixture(2).unwrap();
        let z: S = zero_sheaf(2).unwrap();
        let suite = vec![
            ExactTriple { sub: k.clone(), total: k.direct_sum(&c).unwrap(), quotient: c.clone() },
            ExactTriple { sub: z.clone(), total: z.clone(), quotient: z.clone() },
        ];
        for f in [Functor::OmegaB, Functor::OmegaT(tree_t1()), Functor::OmegaT(tree_t2())] {
            let r = exactness_probe(&f, &suite).unwrap();
            assert!(r.additive && r.faithful, "{f}");
        }
        let bad = vec![ExactTriple { sub: k.clone(), total: k.clone(), quotient: c }];
        assert!(exactness_probe(&Functor::OmegaB, &bad).is_err());
    }
}
