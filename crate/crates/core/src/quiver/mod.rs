//! Quivers, their representations, and intertwiners between them.
//!
//! Relations between paths live in [`dsl`]: they are data parsed from text,
//! evaluated against a [`Rep`] by [`check_relations`].

pub mod dsl;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ratmat::{Field, Matrix};

pub use dsl::{
    check_relations, parse_expr, parse_relation, parse_relation_file, print_relation, PathExpr, RelationCheck,
    RelationReport, RelationSet, Term,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: String,
    pub target: String,
}

/// A finite quiver with named vertices and arrows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    vertex_index: BTreeMap<String, usize>,
    arrow_index: BTreeMap<String, usize>,
}

impl Quiver {
    pub fn new(vertices: Vec<String>, arrows: Vec<Arrow>) -> Result<Self> {
        let mut vertex_index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vertex `{v}`")));
            }
        }
        let mut arrow_index = BTreeMap::new();
        for (i, a) in arrows.iter().enumerate() {
            for end in [&a.source, &a.target] {
                if !vertex_index.contains_key(end) {
                    return Err(Error::Unknown { kind: "vertex", name: end.clone() });
                }
            }
            if vertex_index.contains_key(&a.name) || arrow_index.insert(a.name.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate name `{}`", a.name)));
            }
        }
        Ok(Quiver { vertices, arrows, vertex_index, arrow_index })
    }

    /// Builds from `(name, source, target)` triples.
    pub fn from_spec(vertices: &[&str], arrows: &[(&str, &str, &str)]) -> Result<Self> {
        Quiver::new(
            vertices.iter().map(|v| v.to_string()).collect(),
            arrows
                .iter()
                .map(|(n, s, t)| Arrow { name: n.to_string(), source: s.to_string(), target: t.to_string() })
                .collect(),
        )
    }

    /// `Psi ⇄ Phi` with `u: Psi → Phi` and `v: Phi → Psi`.
    pub fn double() -> Self {
        Quiver::from_spec(&["Psi", "Phi"], &[("u", "Psi", "Phi"), ("v", "Phi", "Psi")]).unwrap()
    }

    /// The double quiver with the monodromy loop `T` at `Psi`.
    pub fn gluing() -> Self {
        Quiver::from_spec(&["Psi", "Phi"], &[("u", "Psi", "Phi"), ("v", "Phi", "Psi"), ("T", "Psi", "Psi")]).unwrap()
    }

    /// The six-space diamond for three points: `V` on top, `V012` at the
    /// bottom, `u` arrows pointing down and `v` arrows up.
    pub fn diamond() -> Self {
        let mut arrows = Vec::new();
        for mid in ["01", "12", "02"] {
            arrows.push((format!("u{mid}"), "V".to_string(), format!("V{mid}")));
            arrows.push((format!("v{mid}"), format!("V{mid}"), "V".to_string()));
            arrows.push((format!("u^{mid}"), format!("V{mid}"), "V012".to_string()));
            arrows.push((format!("v^{mid}"), "V012".to_string(), format!("V{mid}")));
        }
        Quiver::new(
            ["V", "V01", "V12", "V02", "V012"].iter().map(|s| s.to_string()).collect(),
            arrows.into_iter().map(|(name, source, target)| Arrow { name, source, target }).collect(),
        )
        .unwrap()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertex_index.get(name).copied()
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arrow_index.get(name).copied()
    }

    pub fn arrow(&self, name: &str) -> Option<&Arrow> {
        self.arrow_index(name).map(|i| &self.arrows[i])
    }
}

impl fmt::Display for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "quiver")?;
        writeln!(f, "vertex {}", self.vertices.join(" "))?;
        for a in &self.arrows {
            writeln!(f, "arrow {} {} {}", a.name, a.source, a.target)?;
        }
        writeln!(f, "end")
    }
}

/// A representation: a space per vertex, a matrix per arrow.
#[derive(Clone, Debug, PartialEq)]
pub struct Rep<F: Field> {
    quiver: Arc<Quiver>,
    dims: Vec<usize>,
    maps: Vec<Matrix<F>>,
}

/// A family of vertex maps, one per vertex of the quiver.
pub type RepMorphism<F> = Vec<Matrix<F>>;

impl<F: Field> Rep<F> {
    pub fn new(quiver: Arc<Quiver>, dims: Vec<usize>, maps: Vec<Matrix<F>>) -> Result<Self> {
        if dims.len() != quiver.vertices.len() || maps.len() != quiver.arrows.len() {
            return Err(Error::data("representation does not match quiver size"));
        }
        for (a, m) in quiver.arrows.iter().zip(&maps) {
            let s = dims[quiver.vertex_index[&a.source]];
            let t = dims[quiver.vertex_index[&a.target]];
            if m.shape() != (t, s) {
                return Err(Error::data(format!(
                    "arrow `{}` carries a {}x{} matrix but {} -> {} needs {t}x{s}",
                    a.name,
                    m.rows(),
                    m.cols(),
                    a.source,
                    a.target
                )));
            }
        }
        Ok(Rep { quiver, dims, maps })
    }

    pub fn zero(quiver: Arc<Quiver>) -> Self {
        let dims = vec![0; quiver.vertices.len()];
        let maps = vec![Matrix::zeros(0, 0); quiver.arrows.len()];
        Rep { quiver, dims, maps }
    }

    /// Builds from named dimensions and named arrow matrices; unnamed
    /// vertices get dimension zero and unnamed arrows the zero map.
    pub fn from_named(quiver: Arc<Quiver>, dims: &[(&str, usize)], maps: Vec<(&str, Matrix<F>)>) -> Result<Self> {
        let mut d = vec![0; quiver.vertices.len()];
        for (v, k) in dims {
            let i = quiver.vertex_index(v).ok_or_else(|| Error::Unknown { kind: "vertex", name: v.to_string() })?;
            d[i] = *k;
        }
        let mut m: Vec<Matrix<F>> = quiver
            .arrows
            .iter()
            .map(|a| Matrix::zeros(d[quiver.vertex_index[&a.target]], d[quiver.vertex_index[&a.source]]))
            .collect();
        for (a, mat) in maps {
            let i = quiver.arrow_index(a).ok_or_else(|| Error::Unknown { kind: "arrow", name: a.to_string() })?;
            m[i] = mat;
        }
        Rep::new(quiver, d, m)
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, vertex: &str) -> Option<usize> {
        self.quiver.vertex_index(vertex).map(|i| self.dims[i])
    }

    pub fn maps(&self) -> &[Matrix<F>] {
        &self.maps
    }

    pub fn map(&self, arrow: &str) -> Option<&Matrix<F>> {
        self.quiver.arrow_index(arrow).map(|i| &self.maps[i])
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    fn same_quiver(&self, other: &Rep<F>) -> Result<()> {
        if self.quiver != other.quiver {
            return Err(Error::invalid("representations live on different quivers"));
        }
        Ok(())
    }

    /// Vertexwise and arrowwise direct sum.
    pub fn direct_sum(&self, other: &Rep<F>) -> Result<Rep<F>> {
        self.same_quiver(other)?;
        Ok(Rep {
            quiver: self.quiver.clone(),
            dims: self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect(),
            maps: self.maps.iter().zip(&other.maps).map(|(a, b)| a.direct_sum(b)).collect(),
        })
    }

    /// Transports along vertex isomorphisms: arrow `x → y` becomes `g_y A g_x⁻¹`.
    pub fn base_change(&self, g: &[Matrix<F>]) -> Result<Rep<F>> {
        let inv: Vec<Matrix<F>> = g
            .iter()
            .map(|m| m.inverse().ok_or_else(|| Error::invalid("base change is not invertible")))
            .collect::<Result<_>>()?;
        let maps = self
            .quiver
            .arrows
            .iter()
            .zip(&self.maps)
            .map(|(a, m)| {
                let s = self.quiver.vertex_index[&a.source];
                let t = self.quiver.vertex_index[&a.target];
                g[t].compose(m)?.compose(&inv[s])
            })
            .collect::<Result<_>>()?;
        Rep::new(self.quiver.clone(), self.dims.clone(), maps)
    }

    /// Whether `phi` intertwines `self` and `other`: `φ_y A = B φ_x` on every arrow.
    pub fn is_intertwiner(&self, other: &Rep<F>, phi: &[Matrix<F>]) -> Result<bool> {
        self.same_quiver(other)?;
        for (k, a) in self.quiver.arrows.iter().enumerate() {
            let s = self.quiver.vertex_index[&a.source];
            let t = self.quiver.vertex_index[&a.target];
            let lhs = phi[t].compose(&self.maps[k])?;
            let rhs = other.maps[k].compose(&phi[s])?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Basis of `Hom(a, b)`: solutions of `φ_y ∘ a(α) = b(α) ∘ φ_x` for every arrow `α: x → y`.
pub fn hom_space<F: Field>(a: &Rep<F>, b: &Rep<F>) -> Result<Vec<RepMorphism<F>>> {
    a.same_quiver(b)?;
    let q = &a.quiver;
    let mut offsets = Vec::with_capacity(q.vertices.len());
    let mut unknowns = 0;
    for (x, _) in q.vertices.iter().enumerate() {
        offsets.push(unknowns);
        unknowns += b.dims[x] * a.dims[x];
    }
    let var = |x: usize, r: usize, c: usize| offsets[x] + r * a.dims[x] + c;
    let mut rows: Vec<Vec<F>> = Vec::new();
    for (k, arrow) in q.arrows.iter().enumerate() {
        let x = q.vertex_index[&arrow.source];
        let y = q.vertex_index[&arrow.target];
        let (am, bm) = (&a.maps[k], &b.maps[k]);
        for r in 0..b.dims[y] {
            for c in 0..a.dims[x] {
                let mut row = vec![F::zero(); unknowns];
                for t in 0..a.dims[y] {
                    let v = am.get(t, c);
                    if !v.is_zero() {
                        let i = var(y, r, t);
                        row[i] = row[i].clone() + v.clone();
                    }
                }
                for t in 0..b.dims[x] {
                    let v = bm.get(r, t);
                    if !v.is_zero() {
                        let i = var(x, t, c);
                        row[i] = row[i].clone() - v.clone();
                    }
                }
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let system = Matrix::from_rows(unknowns, rows)?;
    Ok(system
        .kernel_basis()
        .into_iter()
        .map(|v| {
            q.vertices
                .iter()
                .enumerate()
                .map(|(x, _)| {
                    let (r, c) = (b.dims[x], a.dims[x]);
                    Matrix::from_vec(r, c, v[offsets[x]..offsets[x] + r * c].to_vec()).unwrap()
                })
                .collect()
        })
        .collect())
}

/// An invertible intertwiner `a → b`, if one is found among deterministic
/// combinations of a hom-space basis.
pub fn find_isomorphism<F: Field>(a: &Rep<F>, b: &Rep<F>) -> Result<Option<RepMorphism<F>>> {
    if a.dims != b.dims {
        return Ok(None);
    }
    let basis = hom_space(a, b)?;
    let invertible = |phi: &RepMorphism<F>| phi.iter().all(|m| m.is_invertible());
    if a.is_zero() {
        return Ok(Some(a.dims.iter().map(|_| Matrix::zeros(0, 0)).collect()));
    }
    if let Some(phi) = basis.iter().find(|phi| invertible(phi)) {
        return Ok(Some(phi.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x150);
    for _ in 0..32 {
        let coeffs: Vec<F> = basis.iter().map(|_| F::from_int(rng.gen_range(-4..=4))).collect();
        let phi: RepMorphism<F> = (0..a.dims.len())
            .map(|x| {
                basis
                    .iter()
                    .zip(&coeffs)
                    .fold(Matrix::zeros(b.dims[x], a.dims[x]), |acc, (m, c)| acc.add(&m[x].scale(c)).unwrap())
            })
            .collect();
        if invertible(&phi) {
            return Ok(Some(phi));
        }
    }
    Ok(None)
}

/// Small-integer random matrix.
pub(crate) fn random_matrix<F: Field>(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<F> {
    let data = (0..rows * cols).map(|_| F::from_int(rng.gen_range(-2..=2))).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Random unimodular matrix: a product of elementary row operations.
pub(crate) fn random_invertible<F: Field>(rng: &mut impl Rng, n: usize) -> Matrix<F> {
    let mut m = Matrix::identity(n);
    if n == 0 {
        return m;
    }
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let c = F::from_int(rng.gen_range(-2..=2));
        let mut e = Matrix::identity(n);
        e.set(i, j, c);
        m = e.compose(&m).unwrap();
    }
    if rng.gen_bool(0.5) {
        let mut p = Matrix::zeros(n, n);
        for i in 0..n {
            p.set((i + 1) % n, i, F::one());
        }
        m = p.compose(&m).unwrap();
    }
    m
}

/// Maximum regeneration attempts in [`random_rep`].
const RANDOM_REP_RETRIES: u64 = 16;

/// Deterministic random representation.
///
/// Every basis vector of every vertex gets a distinct level; arrows in
/// `nilpotent_arrows` only map to strictly lower levels, so any cycle made
/// of them is nilpotent. Each vertex is then conjugated by a random
/// invertible matrix. Other arrows receive unconstrained small integers.
pub fn random_rep<F: Field>(
    quiver: Arc<Quiver>,
    dims: &[usize],
    nilpotent_arrows: &[&str],
    seed: u64,
) -> Result<Rep<F>> {
    if dims.len() != quiver.vertices.len() {
        return Err(Error::invalid("dimension vector does not match quiver"));
    }
    for a in nilpotent_arrows {
        quiver.arrow_index(a).ok_or_else(|| Error::Unknown { kind: "arrow", name: a.to_string() })?;
    }
    for attempt in 0..RANDOM_REP_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(RANDOM_REP_RETRIES).wrapping_add(attempt));
        let total: usize = dims.iter().sum();
        let mut levels: Vec<usize> = (0..total).collect();
        for i in (1..total).rev() {
            levels.swap(i, rng.gen_range(0..=i));
        }
        let mut offsets = vec![0];
        for d in dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        let level = |x: usize, k: usize| levels[offsets[x] + k];
        let mut maps = Vec::new();
        for a in quiver.arrows.iter() {
            let s = quiver.vertex_index[&a.source];
            let t = quiver.vertex_index[&a.target];
            let mut m: Matrix<F> = random_matrix(&mut rng, dims[t], dims[s]);
            if nilpotent_arrows.contains(&a.name.as_str()) {
                for r in 0..dims[t] {
                    for c in 0..dims[s] {
                        if level(t, r) >= level(s, c) {
                            m.set(r, c, F::zero());
                        }
                    }
                }
            }
            maps.push(m);
        }
        let rep = Rep::new(quiver.clone(), dims.to_vec(), maps)?;
        let g: Vec<Matrix<F>> = dims.iter().map(|&d| random_invertible(&mut rng, d)).collect();
        let rep = rep.base_change(&g)?;
        if nilpotent_cycles_hold(&rep, nilpotent_arrows)? {
            return Ok(rep);
        }
    }
    Err(Error::data("random_rep exhausted its retries"))
}

/// Length-two loops made of designated arrows must be nilpotent; so must
/// designated self-loops.
fn nilpotent_cycles_hold<F: Field>(rep: &Rep<F>, arrows: &[&str]) -> Result<bool> {
    let q = &rep.quiver;
    for a in arrows {
        let aa = q.arrow(a).unwrap();
        if aa.source == aa.target && !rep.map(a).unwrap().is_nilpotent()? {
            return Ok(false);
        }
        for b in arrows {
            let bb = q.arrow(b).unwrap();
            if bb.target == aa.source && bb.source == aa.target {
                let loop_map = rep.map(a).unwrap().compose(rep.map(b).unwrap())?;
                if !loop_map.is_nilpotent()? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Number of paths of each length `0..=max_len`; length zero counts vertices.
pub fn path_coalgebra_dims(quiver: &Quiver, max_len: usize) -> Vec<u128> {
    let mut ending_at: Vec<u128> = vec![1; quiver.vertices.len()];
    let mut out = vec![ending_at.iter().sum()];
    for _ in 0..max_len {
        let mut next = vec![0u128; quiver.vertices.len()];
        for a in &quiver.arrows {
            next[quiver.vertex_index[&a.target]] += ending_at[quiver.vertex_index[&a.source]];
        }
        ending_at = next;
        out.push(ending_at.iter().sum());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    type M = Matrix<Rational>;

    fn one_dim(u: i64, v: i64) -> Rep<Rational> {
        Rep::from_named(
            Arc::new(Quiver::double()),
            &[("Psi", 1), ("Phi", 1)],
            vec![("u", M::from_ints(&[&[u]])), ("v", M::from_ints(&[&[v]]))],
        )
        .unwrap()
    }

    /// Brute-force path count by enumerating words.
    fn brute_paths(q: &Quiver, len: usize) -> usize {
        fn rec(q: &Quiver, at: &str, left: usize) -> usize {
            if left == 0 {
                return 1;
            }
            q.arrows().iter().filter(|a| a.source == at).map(|a| rec(q, &a.target, left - 1)).sum()
        }
        q.vertices().iter().map(|v| rec(q, v, len)).sum()
    }

    #[test]
    fn builtin_quivers() {
        let d = Quiver::diamond();
        assert_eq!(d.vertices().len(), 5);
        assert_eq!(d.arrows().len(), 12);
        assert_eq!(d.arrow("u^01").unwrap().target, "V012");
        assert!(Quiver::from_spec(&["a", "a"], &[]).is_err());
        assert!(Quiver::from_spec(&["a"], &[("x", "a", "b")]).is_err());
    }

    #[test]
    fn coalgebra_dims() {
        let d = Quiver::double();
        let dims = path_coalgebra_dims(&d, 3);
        assert_eq!(dims, vec![2, 2, 2, 2]);
        for len in 0..=6 {
            assert_eq!(dims.get(len).copied().unwrap_or(2), brute_paths(&d, len) as u128);
        }
        let empty = Quiver::from_spec(&["a", "b", "c"], &[]).unwrap();
        assert_eq!(path_coalgebra_dims(&empty, 3), vec![3, 0, 0, 0]);
        let lp = Quiver::from_spec(&["a"], &[("x", "a", "a")]).unwrap();
        assert_eq!(path_coalgebra_dims(&lp, 4), vec![1; 5]);
    }

    #[test]
    fn rep_shape_mismatch_names_arrow() {
        let err = Rep::from_named(Arc::new(Quiver::double()), &[("Psi", 1), ("Phi", 2)], vec![("u", M::zeros(1, 1))])
            .unwrap_err();
        assert!(err.to_string().contains("`u`"), "{err}");
    }

    #[test]
    fn direct_sum_of_reps() {
        let q = Arc::new(Quiver::double());
        let a = Rep::<Rational>::from_named(q.clone(), &[("Psi", 1)], vec![]).unwrap();
        let b = Rep::<Rational>::from_named(q.clone(), &[("Phi", 1)], vec![]).unwrap();
        assert_eq!(a.direct_sum(&b).unwrap().dims(), &[1, 1]);
        assert_eq!(a.direct_sum(&Rep::zero(q)).unwrap(), a);
        let other = Rep::<Rational>::zero(Arc::new(Quiver::gluing()));
        assert!(a.direct_sum(&other).is_err());
    }

    #[test]
    fn hom_space_examples() {
        let a = one_dim(1, 0);
        let b = one_dim(0, 1);
        assert_eq!(hom_space(&a, &b).unwrap().len(), 1);
        assert_eq!(hom_space(&b, &a).unwrap().len(), 1);
        assert!(find_isomorphism(&a, &b).unwrap().is_none());
        let homs = hom_space(&a, &a).unwrap();
        assert!(!homs.is_empty());
        assert!(homs.iter().all(|h| a.is_intertwiner(&a, h).unwrap()));
        let zero = Rep::zero(a.quiver().clone());
        assert_eq!(hom_space(&zero, &b).unwrap().len(), 0);
    }

    #[test]
    fn hom_space_invariant_under_base_change() {
        let q = Arc::new(Quiver::double());
        for seed in 0..20 {
            let a = random_rep::<Rational>(q.clone(), &[2, 1], &["u", "v"], seed).unwrap();
            let b = random_rep::<Rational>(q.clone(), &[2, 1], &["u", "v"], seed + 100).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ga: Vec<M> = a.dims().iter().map(|&d| random_invertible(&mut rng, d)).collect();
            let gb: Vec<M> = b.dims().iter().map(|&d| random_invertible(&mut rng, d)).collect();
            let a2 = a.base_change(&ga).unwrap();
            let b2 = b.base_change(&gb).unwrap();
            assert_eq!(hom_space(&a, &b).unwrap().len(), hom_space(&a2, &b2).unwrap().len());
            let iso = find_isomorphism(&a, &a2).unwrap().expect("base change is an isomorphism");
            assert!(a.is_intertwiner(&a2, &iso).unwrap());
        }
    }

    #[test]
    fn random_rep_is_deterministic_and_nilpotent() {
        let q = Arc::new(Quiver::double());
        let a = random_rep::<Rational>(q.clone(), &[3, 2], &["u", "v"], 7).unwrap();
        let b = random_rep::<Rational>(q.clone(), &[3, 2], &["u", "v"], 7).unwrap();
        assert_eq!(a, b);
        for seed in 0..50 {
            let r = random_rep::<Rational>(q.clone(), &[3, 2], &["u", "v"], seed).unwrap();
            let vu = r.map("v").unwrap().compose(r.map("u").unwrap()).unwrap();
            assert!(vu.is_nilpotent().unwrap());
        }
        let z = random_rep::<Rational>(q.clone(), &[0, 0], &[], 1).unwrap();
        assert!(z.is_zero());
        assert!(random_rep::<Rational>(q, &[1, 1], &["nope"], 1).is_err());
    }
}
