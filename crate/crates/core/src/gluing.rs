//! Gluing data `(Ψ, T, Φ, u, v)` for one divisor and the equivalence with
//! hyperbolic sheaves on the line (`n = 2`).

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrangement::Face;
use crate::cycles::{assemble_can_var, CanVarConfig, CollisionSeq};
use crate::error::{Error, Result};
use crate::hypsheaf::{random_base_change, random_fixture_sum, validate, AxiomConfig, HyperbolicSheaf};
use crate::quiver::dsl::{check_relations, parse_relation_file, RelationReport, RelationSet};
use crate::quiver::{find_isomorphism, hom_space, random_rep, Quiver, Rep, RepMorphism};
use crate::ratmat::{Field, Matrix};

/// The shipped gluing relation file.
pub const GLUING_RELATIONS: &str = include_str!("../data/gluing.rel");

/// The shipped, provisional diamond quiver file.
pub const DIAMOND_RELATIONS: &str = include_str!("../data/diamond.rel");

pub fn gluing_relations<F: Field>() -> RelationSet<F> {
    parse_relation_file(GLUING_RELATIONS).expect("shipped gluing relations parse")
}

/// A representation of [`Quiver::gluing`]: `Psi` with monodromy `T`, `Phi`,
/// and `u: Psi → Phi`, `v: Phi → Psi`.
#[derive(Clone, Debug, PartialEq)]
pub struct GluingDatum<F: Field> {
    rep: Rep<F>,
}

impl<F: Field> GluingDatum<F> {
    pub fn new(t: Matrix<F>, z_dim: usize, u: Matrix<F>, v: Matrix<F>) -> Result<Self> {
        let psi = t.rows();
        if !t.is_square() {
            return Err(Error::data("monodromy must be square"));
        }
        let rep = Rep::from_named(
            Arc::new(Quiver::gluing()),
            &[("Psi", psi), ("Phi", z_dim)],
            vec![("u", u), ("v", v), ("T", t)],
        )?;
        Ok(GluingDatum { rep })
    }

    /// `T := id + v∘u`.
    pub fn from_can_var(u: Matrix<F>, v: Matrix<F>) -> Result<Self> {
        let t = Matrix::identity(v.rows()).add(&v.compose(&u)?)?;
        GluingDatum::new(t, u.rows(), u, v)
    }

    pub fn from_rep(rep: Rep<F>) -> Result<Self> {
        if **rep.quiver() != Quiver::gluing() {
            return Err(Error::invalid("representation is not over the gluing quiver"));
        }
        Ok(GluingDatum { rep })
    }

    pub fn rep(&self) -> &Rep<F> {
        &self.rep
    }

    pub fn psi_dim(&self) -> usize {
        self.rep.dim("Psi").unwrap()
    }

    pub fn z_dim(&self) -> usize {
        self.rep.dim("Phi").unwrap()
    }

    pub fn t(&self) -> &Matrix<F> {
        self.rep.map("T").unwrap()
    }

    pub fn u(&self) -> &Matrix<F> {
        self.rep.map("u").unwrap()
    }

    pub fn v(&self) -> &Matrix<F> {
        self.rep.map("v").unwrap()
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        Ok(GluingDatum { rep: self.rep.direct_sum(&other.rep)? })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluingReport<F: Field> {
    pub relations: RelationReport<F>,
    pub unipotent: bool,
}

impl<F: Field> GluingReport<F> {
    pub fn passed(&self) -> bool {
        self.relations.all_pass() && self.unipotent
    }
}

/// `v∘u - T + id = 0` and `T - id` nilpotent.
pub fn verify_gluing_axiom<F: Field>(d: &GluingDatum<F>) -> Result<GluingReport<F>> {
    let relations = check_relations(&d.rep, &gluing_relations())?;
    let n = d.psi_dim();
    let unipotent = d.t().sub(&Matrix::identity(n))?.is_nilpotent()?;
    Ok(GluingReport { relations, unipotent })
}

/// The collision `z_1 - z_2`, whose negative side is the chamber `1<2`.
pub fn line_seq() -> CollisionSeq {
    CollisionSeq::new(2, vec![(1, 2)]).unwrap()
}

/// Nearby space, vanishing space and can/var of a valid `n = 2` sheaf.
pub fn glue_forward<F: Field>(
    s: &HyperbolicSheaf<F>,
    axioms: &AxiomConfig,
    canvar: &CanVarConfig,
) -> Result<GluingDatum<F>> {
    if s.n() != 2 {
        return Err(Error::UnsupportedDimension { n: s.n(), reason: "gluing equivalence is implemented for n = 2" });
    }
    let report = validate(s, axioms)?;
    if !report.all_pass() {
        return Err(Error::Validation(report.to_string().trim_end().to_string()));
    }
    let cv = assemble_can_var(s, &line_seq(), canvar)?;
    let d = GluingDatum::from_can_var(cv.u, cv.v)?;
    let check = verify_gluing_axiom(&d)?;
    if !check.passed() {
        return Err(Error::Validation(format!("glued datum fails the gluing axiom:\n{}", check.relations)));
    }
    Ok(d)
}

/// Rebuilds a sheaf from a gluing datum.
///
/// `E_{1<2} = Ψ`, `E_{1,2} = Ψ ⊕ Φ`, `E_{2<1} = Ψ`, with
///
/// ```text
/// γ_-  = [1 0]       δ_-  = [1; 0]
/// γ_+  = [1 v]       δ_+  = [1 + vu; -u]
/// ```
///
/// so `γδ = 1` on both sides, crossing `1<2 → 2<1` is the identity, and the
/// way back is `T = 1 + vu`. The kernel of `γ_-` is `0 ⊕ Φ` in its standard
/// basis, which makes `glue_forward ∘ glue_backward` the identity on the nose.
pub fn glue_backward<F: Field>(d: &GluingDatum<F>) -> Result<HyperbolicSheaf<F>> {
    let report = verify_gluing_axiom(d)?;
    if !report.passed() {
        let witness = d.v().compose(d.u())?.sub(d.t())?.add(&Matrix::identity(d.psi_dim()))?;
        return Err(Error::Validation(format!(
            "gluing datum violates the axiom; v.u - T + id = {witness:?}, unipotent = {}",
            report.unipotent
        )));
    }
    let (p, z) = (d.psi_dim(), d.z_dim());
    let id = Matrix::<F>::identity(p);
    let g_neg = Matrix::hstack(p, &[id.clone(), Matrix::zeros(p, z)])?;
    let d_neg = Matrix::vstack(p, &[id.clone(), Matrix::zeros(z, p)])?;
    let g_pos = Matrix::hstack(p, &[id.clone(), d.v().clone()])?;
    let d_pos = Matrix::vstack(p, &[d.t().clone(), d.u().scale(&-F::one())])?;
    let (zero, neg, pos): (Face, Face, Face) = ("1,2".parse()?, "1<2".parse()?, "2<1".parse()?);
    let dims = BTreeMap::from([(zero.clone(), p + z), (neg.clone(), p), (pos.clone(), p)]);
    let gamma = BTreeMap::from([((zero.clone(), neg.clone()), g_neg), ((zero.clone(), pos.clone()), g_pos)]);
    let delta = BTreeMap::from([((zero.clone(), neg), d_neg), ((zero, pos), d_pos)]);
    HyperbolicSheaf::new(2, &dims, &gamma, &delta)
}

/// Random datum with nilpotent `v∘u`; `dims = (dim Ψ, dim Φ)`.
pub fn random_datum<F: Field>(psi: usize, z: usize, seed: u64) -> Result<GluingDatum<F>> {
    let r = random_rep::<F>(Arc::new(Quiver::double()), &[psi, z], &["u", "v"], seed)?;
    GluingDatum::from_can_var(r.map("u").unwrap().clone(), r.map("v").unwrap().clone())
}

/// Deterministic random valid sheaf.
///
/// For `n = 2` this is a base-changed sum of a glued random datum and
/// fixtures; for other `n` a base-changed sum of fixtures.
pub fn random_valid_sheaf<F: Field>(n: usize, seed: u64) -> Result<HyperbolicSheaf<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let fixtures = random_fixture_sum(n, rng.gen())?;
    if n != 2 {
        return Ok(fixtures);
    }
    let d = random_datum(rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen())?;
    let s = glue_backward(&d)?.direct_sum(&fixtures)?;
    random_base_change(&s, &mut rng)
}

/// An invertible intertwiner between two sheaves viewed as face-quiver reps.
pub fn sheaf_isomorphism<F: Field>(a: &HyperbolicSheaf<F>, b: &HyperbolicSheaf<F>) -> Result<Option<RepMorphism<F>>> {
    if a.n() != b.n() {
        return Ok(None);
    }
    find_isomorphism(&a.to_rep(), &b.to_rep())
}

pub fn datum_isomorphism<F: Field>(a: &GluingDatum<F>, b: &GluingDatum<F>) -> Result<Option<RepMorphism<F>>> {
    find_isomorphism(&a.rep, &b.rep)
}

/// `(dim Hom(a, b), dim Hom(F a, F b))` for the gluing functor `F`.
pub fn hom_dims<F: Field>(
    a: &HyperbolicSheaf<F>,
    b: &HyperbolicSheaf<F>,
    axioms: &AxiomConfig,
    canvar: &CanVarConfig,
) -> Result<(usize, usize)> {
    let sheaves = hom_space(&a.to_rep(), &b.to_rep())?.len();
    let ga = glue_forward(a, axioms, canvar)?;
    let gb = glue_forward(b, axioms, canvar)?;
    Ok((sheaves, hom_space(&ga.rep, &gb.rep)?.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypsheaf::{constant_fixture, skyscraper_fixture};
    use crate::Rational;

    type S = HyperbolicSheaf<Rational>;
    type M = Matrix<Rational>;
    type D = GluingDatum<Rational>;

    fn forward(s: &S) -> D {
        glue_forward(s, &AxiomConfig::default(), &CanVarConfig::default()).unwrap()
    }

    #[test]
    fn fixtures_forward() {
        let c = forward(&constant_fixture(2).unwrap());
        assert_eq!((c.psi_dim(), c.z_dim()), (1, 0));
        assert_eq!(c.t(), &M::identity(1));
        let k = forward(&skyscraper_fixture(2).unwrap());
        assert_eq!((k.psi_dim(), k.z_dim()), (0, 1));
    }

    #[test]
    fn fixtures_backward() {
        let c = D::new(M::identity(1), 0, M::zeros(0, 1), M::zeros(1, 0)).unwrap();
        assert_eq!(glue_backward(&c).unwrap(), constant_fixture(2).unwrap());
        let k = D::new(M::zeros(0, 0), 1, M::zeros(1, 0), M::zeros(0, 1)).unwrap();
        assert_eq!(glue_backward(&k).unwrap(), skyscraper_fixture(2).unwrap());
    }

    #[test]
    fn axiom_examples() {
        let ok = D::from_can_var(M::zeros(1, 1), M::zeros(1, 1)).unwrap();
        assert!(verify_gluing_axiom(&ok).unwrap().passed());
        let nil = D::from_can_var(M::from_ints(&[&[0, 1], &[0, 0]]), M::identity(2)).unwrap();
        assert!(verify_gluing_axiom(&nil).unwrap().passed());
        let two = D::new(M::scalar(1, Rational::from_int(2)), 1, M::identity(1), M::identity(1)).unwrap();
        let r = verify_gluing_axiom(&two).unwrap();
        assert!(r.relations.all_pass() && !r.unipotent);
        assert!(glue_backward(&two).is_err());
        let broken = D::new(M::identity(1), 1, M::identity(1), M::identity(1)).unwrap();
        let err = glue_backward(&broken).unwrap_err();
        assert!(err.to_string().contains("Matrix1x1[1]"), "{err}");
    }

    #[test]
    fn roundtrips() {
        for seed in 0..30 {
            let d: D = random_datum(2, 2, seed).unwrap();
            let s = glue_backward(&d).unwrap();
            assert!(validate(&s, &AxiomConfig::default()).unwrap().all_pass());
            assert_eq!(forward(&s), d);

            let s: S = random_valid_sheaf(2, seed).unwrap();
            let back = glue_backward(&forward(&s)).unwrap();
            let iso = sheaf_isomorphism(&s, &back).unwrap().expect("isomorphic");
            assert!(s.to_rep().is_intertwiner(&back.to_rep(), &iso).unwrap());
        }
    }

    #[test]
    fn forward_is_additive() {
        for seed in 0..10 {
            let a: S = random_valid_sheaf(2, seed).unwrap();
            let b: S = random_valid_sheaf(2, seed + 50).unwrap();
            let sum = forward(&a.direct_sum(&b).unwrap());
            let parts = forward(&a).direct_sum(&forward(&b)).unwrap();
            assert!(datum_isomorphism(&sum, &parts).unwrap().is_some());
        }
    }

    #[test]
    fn hom_dims_preserved() {
        let ax = AxiomConfig::default();
        let cv = CanVarConfig::default();
        for seed in 0..10 {
            let a: S = random_valid_sheaf(2, seed).unwrap();
            let b: S = random_valid_sheaf(2, seed + 20).unwrap();
            let (x, y) = hom_dims(&a, &b, &ax, &cv).unwrap();
            assert_eq!(x, y, "seed {seed}");
        }
    }

    #[test]
    fn shipped_relation_files() {
        let rs: RelationSet<Rational> = gluing_relations();
        assert_eq!(*rs.quiver, Quiver::gluing());
        let diamond: RelationSet<Rational> = parse_relation_file(DIAMOND_RELATIONS).unwrap();
        assert_eq!(*diamond.quiver, Quiver::diamond());
        assert!(diamond.relations.is_empty());
    }

    #[test]
    fn forward_rejects_invalid() {
        let c: S = constant_fixture(2).unwrap();
        let bad =
            crate::hypsheaf::with_delta(&c, &"1<2".parse().unwrap(), &"1,2".parse().unwrap(), M::zeros(1, 1)).unwrap();
        assert!(matches!(
            glue_forward(&bad, &AxiomConfig::default(), &CanVarConfig::default()),
            Err(Error::Validation(_))
        ));
        assert!(glue_forward(
            &constant_fixture::<Rational>(3).unwrap(),
            &AxiomConfig::default(),
            &CanVarConfig::default()
        )
        .is_err());
    }

    #[test]
    fn wall_invertibility_is_needed_for_unipotence() {
        let (zero, neg, pos): (Face, Face, Face) =
            ("1,2".parse().unwrap(), "1<2".parse().unwrap(), "2<1".parse().unwrap());
        let dims = BTreeMap::from([(zero.clone(), 2), (neg.clone(), 1), (pos.clone(), 1)]);
        let gamma = BTreeMap::from([
            ((zero.clone(), neg.clone()), M::from_ints(&[&[1, 0]])),
            ((zero.clone(), pos.clone()), M::from_ints(&[&[0, 1]])),
        ]);
        let delta = BTreeMap::from([
            ((zero.clone(), neg), M::from_ints(&[&[1], &[0]])),
            ((zero, pos), M::from_ints(&[&[0], &[1]])),
        ]);
        let s: S = HyperbolicSheaf::new(2, &dims, &gamma, &delta).unwrap();
        let lax = AxiomConfig { wall_invertible: false, ..AxiomConfig::default() };
        assert!(validate(&s, &lax).unwrap().all_pass());
        assert!(!validate(&s, &AxiomConfig::default()).unwrap().all_pass());
        assert!(assemble_can_var(&s, &line_seq(), &CanVarConfig::default()).is_err());
        let (z, n, p) = ("1,2".parse().unwrap(), "1<2".parse().unwrap(), "2<1".parse().unwrap());
        let there = crate::hypsheaf::wall_crossing(&s, &z, &n, &p).unwrap();
        let back = crate::hypsheaf::wall_crossing(&s, &z, &p, &n).unwrap();
        let round = back.compose(&there).unwrap();
        assert!(!round.sub(&M::identity(1)).unwrap().is_nilpotent().unwrap());
    }
}
