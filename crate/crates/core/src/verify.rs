//! The verification suite run by `braidsheaf suite`.
//!
//! Each check covers one family of claims and yields a single report line.
//! Sheaves loaded from files are appended to the generated suite.

use std::fmt;

use crate::arrangement::{enumerate_faces, Face, Permutation};
use crate::cycles::{iterated_stalk, CanVarConfig, CollisionSeq, Letter, SignPattern, DEFAULT_CANVAR};
use crate::error::Result;
use crate::fiber::{comparison, enumerate_trees, omega_t, tree_to_collisions};
use crate::gluing::{
    datum_isomorphism, glue_backward, glue_forward, hom_dims, random_datum, random_valid_sheaf, sheaf_isomorphism,
    verify_gluing_axiom, GluingDatum, DIAMOND_RELATIONS, GLUING_RELATIONS,
};
use crate::groupoid::{build_section_at, check_unipotence, generating_loops, reconstruct};
use crate::hypsheaf::{
    constant_fixture, permute_sheaf, skyscraper_fixture, validate, AxiomConfig, HyperbolicSheaf, DEFAULT_AXIOMS,
};
use crate::io::{format_datum, format_sheaf, parse_datum, parse_sheaf};
use crate::quiver::dsl::parse_relation_file;
use crate::quiver::{path_coalgebra_dims, Quiver};
use crate::ratmat::Matrix;
use crate::Rational;

type S = HyperbolicSheaf<Rational>;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random instances per randomised check.
    pub random: usize,
    pub axioms: AxiomConfig,
    pub canvar: CanVarConfig,
    /// Extra sheaves, by display name.
    pub sheaves: Vec<(String, S)>,
    /// Extra gluing data, by display name.
    pub data: Vec<(String, GluingDatum<Rational>)>,
    /// Extra relation or config texts for the print/parse check.
    pub configs: Vec<(String, String)>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            random: 100,
            axioms: AxiomConfig::default(),
            canvar: CanVarConfig::default(),
            sheaves: Vec::new(),
            data: Vec::new(),
            configs: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub lines: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        let passed = self.lines.iter().filter(|l| l.passed).count();
        writeln!(f, "{passed}/{} checks passed", self.lines.len())
    }
}

fn line(id: usize, name: &'static str, failures: &[String], ok_detail: String) -> CheckLine {
    let detail = match failures.first() {
        None => ok_detail,
        Some(first) => format!("{} failure(s); first: {first}", failures.len()),
    };
    CheckLine { id, name, passed: failures.is_empty(), detail }
}

fn record<T>(failures: &mut Vec<String>, what: impl FnOnce() -> String, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            failures.push(format!("{}: {e}", what()));
            None
        }
    }
}

/// Fixtures and seeded random sheaves for `n`, plus the user's sheaves.
pub fn sheaf_suite(n: usize, cfg: &SuiteConfig, count: usize) -> Result<Vec<(String, S)>> {
    let mut out =
        vec![(format!("constant({n})"), constant_fixture(n)?), (format!("skyscraper({n})"), skyscraper_fixture(n)?)];
    for k in 0..count as u64 {
        let seed = cfg.seed.wrapping_add(k);
        out.push((format!("random(n={n}, seed={seed})"), random_valid_sheaf(n, seed)?));
    }
    out.extend(cfg.sheaves.iter().filter(|(_, s)| s.n() == n).cloned());
    Ok(out)
}

fn check_gluing_axiom(cfg: &SuiteConfig) -> Result<CheckLine> {
    let mut failures = Vec::new();
    let suite = sheaf_suite(2, cfg, cfg.random)?;
    for (name, s) in &suite {
        if let Some(d) = record(&mut failures, || name.clone(), glue_forward(s, &cfg.axioms, &cfg.canvar)) {
            match verify_gluing_axiom(&d) {
                Ok(r) if r.passed() => {}
                Ok(r) => failures.push(format!("{name}: unipotent={} relations:\n{}", r.unipotent, r.relations)),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    Ok(line(
        1,
        "gluing axiom",
        &failures,
        format!("{} n=2 sheaves, v.u = T - id exactly and T - id nilpotent (exact)", suite.len()),
    ))
}

fn check_equivalence(cfg: &SuiteConfig) -> Result<CheckLine> {
    let mut failures = Vec::new();
    let suite = sheaf_suite(2, cfg, cfg.random)?;
    for (name, s) in &suite {
        let back = glue_forward(s, &cfg.axioms, &cfg.canvar).and_then(|d| glue_backward(&d));
        if let Some(b) = record(&mut failures, || name.clone(), back) {
            match sheaf_isomorphism(&b, s) {
                Ok(Some(_)) => {}
                Ok(None) => failures.push(format!("{name}: backward(forward(s)) not isomorphic to s")),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    let mut data = 0;
    for k in 0..cfg.random as u64 {
        let seed = cfg.seed.wrapping_add(k);
        let d = random_datum::<Rational>((k % 4) as usize, ((k / 4) % 3) as usize, seed)?;
        data += 1;
        let round = glue_backward(&d).and_then(|s| glue_forward(&s, &cfg.axioms, &cfg.canvar));
        if let Some(r) = record(&mut failures, || format!("datum seed={seed}"), round) {
            match datum_isomorphism(&r, &d) {
                Ok(Some(_)) => {}
                Ok(None) => failures.push(format!("datum seed={seed}: forward(backward(d)) not isomorphic to d")),
                Err(e) => failures.push(format!("datum seed={seed}: {e}")),
            }
        }
    }
    let small: Vec<&(String, S)> = suite.iter().take(12).collect();
    let mut pairs = 0;
    for (na, a) in &small {
        for (nb, b) in &small {
            pairs += 1;
            match hom_dims(a, b, &cfg.axioms, &cfg.canvar) {
                Ok((x, y)) if x == y => {}
                Ok((x, y)) => failures.push(format!("hom({na}, {nb}) = {x} but glued hom = {y}")),
                Err(e) => failures.push(format!("hom({na}, {nb}): {e}")),
            }
        }
    }
    Ok(line(
        2,
        "gluing equivalence",
        &failures,
        format!(
            "{} sheaves and {data} data round-trip up to explicit isomorphism; hom dims preserved on {pairs} pairs (exact)",
            suite.len()
        ),
    ))
}

/// Faces `g` covering `f`, found by comparing block structure directly.
fn direct_covers(f: &Face) -> Result<Vec<Face>> {
    Ok(enumerate_faces(f.n())?
        .faces()
        .iter()
        .filter(|g| g.num_blocks() == f.num_blocks() + 1 && f.closure_leq(g).unwrap_or(false))
        .cloned()
        .collect())
}

fn position(f: &Face, label: usize) -> usize {
    f.block_of(label).unwrap()
}

/// The n = 3 components along `(a-b)` then `(c-…)`, computed from the
/// face conditions without the descent machinery.
fn explicit_component(s: &S, seq: &CollisionSeq, pat: &SignPattern) -> Result<Option<(Face, Matrix<Rational>)>> {
    let (i, j) = seq.steps()[0];
    let (k, l) = seq.steps()[1];
    let other = (1..=3).find(|x| *x != i && *x != j).unwrap();
    let faces = enumerate_faces(3)?;
    let outer_negative = |f: &Face| {
        let (lo, hi) = (position(f, i).min(position(f, j)), position(f, i).max(position(f, j)));
        if k == other {
            position(f, k) < lo
        } else {
            hi < position(f, l)
        }
    };
    let target = match (pat.0[0], pat.0[1]) {
        (Letter::Psi, Letter::Psi) => {
            faces.faces().iter().find(|f| f.is_chamber() && position(f, i) < position(f, j) && outer_negative(f))
        }
        (Letter::Psi, Letter::Phi) => {
            faces.faces().iter().find(|f| f.num_blocks() == 2 && position(f, i) == position(f, j) && outer_negative(f))
        }
        (Letter::Phi, Letter::Phi) => faces.faces().iter().find(|f| f.is_minimal()),
        _ => return Ok(None),
    };
    let f = target.expect("component face exists").clone();
    let d = s.dim(&f)?;
    if pat.0[1] == Letter::Psi {
        return Ok(Some((f, Matrix::identity(d))));
    }
    let walls: Vec<Face> = direct_covers(&f)?.into_iter().filter(|g| position(g, i) < position(g, j)).collect();
    let parts = walls.iter().map(|g| s.gamma(&f, g).cloned()).collect::<Result<Vec<_>>>()?;
    let stacked = Matrix::vstack(d, &parts)?;
    Ok(Some((f, stacked.kernel_matrix().column_echelon())))
}

fn check_explicit_formulas(cfg: &SuiteConfig) -> Result<CheckLine> {
    let mut failures = Vec::new();
    let suite = sheaf_suite(3, cfg, cfg.random / 4)?;
    let base = CollisionSeq::parse(3, "(3,2),(1,2)")?;
    let mut compared = 0;
    for (name, s) in &suite {
        for sigma in Permutation::all(3) {
            let seq = base.act(&sigma);
            for pat in SignPattern::all(2) {
                let Some((face, incl)) = explicit_component(s, &seq, &pat)? else { continue };
                let got = iterated_stalk(s, &seq, &pat)?;
                compared += 1;
                if got.face != face || got.inclusion.column_echelon() != incl {
                    failures.push(format!("{name} seq {seq} {pat}: face {} vs {face}", got.face));
                }
            }
        }
    }
    Ok(line(
        3,
        "explicit n=3 components",
        &failures,
        format!("{compared} (Psi,Psi)/(Psi,Phi)/(Phi,Phi) subspaces equal the direct kernels (exact)"),
    ))
}

fn check_comparison(cfg: &SuiteConfig) -> Result<CheckLine> {
    let mut failures = Vec::new();
    let mut count = 0;
    for n in 1..=3 {
        let trees = enumerate_trees(n)?;
        for (name, s) in sheaf_suite(n, cfg, cfg.random / 4)? {
            for t in &trees {
                count += 1;
                let base = s.dim(&Face::minimal(n))?;
                match (omega_t(&s, t), comparison(&s, t)) {
                    (Ok(fv), Ok(c)) if fv.dim() == base && c.is_invertible() => {}
                    (Ok(fv), Ok(_)) => failures.push(format!("{name} tree {t}: dims {} vs {base}", fv.dim())),
                    (Err(e), _) | (_, Err(e)) => failures.push(format!("{name} tree {t}: {e}")),
                }
            }
        }
    }
    Ok(line(
        4,
        "comparison isomorphism",
        &failures,
        format!("{count} (sheaf, tree) pairs for n <= 3, all trees, map invertible (exact)"),
    ))
}

fn ordered_bell(n: usize) -> u64 {
    let mut a = vec![1u64];
    for m in 1..=n {
        let mut c = 1u64;
        let mut s = 0u64;
        for k in 1..=m {
            c = c * (m - k + 1) as u64 / k as u64;
            s += c * a[m - k];
        }
        a.push(s);
    }
    a[n]
}

fn check_counts() -> Result<CheckLine> {
    let mut failures = Vec::new();
    let mut faces = Vec::new();
    for n in 1..=4 {
        let got = enumerate_faces(n)?.faces().len() as u64;
        faces.push(got.to_string());
        if got != ordered_bell(n) {
            failures.push(format!("n={n}: {got} faces, expected {}", ordered_bell(n)));
        }
    }
    let mut trees = Vec::new();
    for (n, want) in [(1, 1), (2, 2), (3, 12), (4, 120)] {
        let got = enumerate_trees(n)?.len();
        trees.push(got.to_string());
        if got != want {
            failures.push(format!("n={n}: {got} trees, expected {want}"));
        }
    }
    Ok(line(5, "counts", &failures, format!("faces {} and trees {} for n = 1..4", faces.join(","), trees.join(","))))
}

fn check_unipotent_loops(cfg: &SuiteConfig) -> Result<CheckLine> {
    let mut failures = Vec::new();
    let mut count = 0;
    for n in 1..=3 {
        let loops = generating_loops(n)?;
        for (name, s) in sheaf_suite(n, cfg, cfg.random / 4)? {
            count += loops.len();
            match check_unipotence(&s, &loops, &cfg.canvar) {
                Ok(r) => {
                    for (l, ok) in r.loops {
                        if !ok {
                            failures.push(format!("{name}: {l}"));
                        }
                    }
                }
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    Ok(line(6, "unipotent loops", &failures, format!("{count} loop operators, op - id nilpotent (exact)")))
}

fn check_descent(cfg: &SuiteConfig) -> Result<CheckLine> {
    let mut failures = Vec::new();
    let mut count = 0;
    for n in 1..=3 {
        let trees = enumerate_trees(n)?;
        for (name, s) in sheaf_suite(n, cfg, 3)? {
            let base = &trees[0];
            let Some(fam) = record(&mut failures, || name.clone(), build_section_at(&s, base, &cfg.axioms)) else {
                continue;
            };
            match reconstruct(&fam) {
                Ok(r) if r == s => {}
                Ok(_) => failures.push(format!("{name}: reconstruction differs")),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
            for sigma in Permutation::all(n) {
                count += 1;
                let moved =
                    permute_sheaf(&sigma, &s).and_then(|ps| build_section_at(&ps, &base.act(&sigma), &cfg.axioms));
                match (moved, fam.relabel(&sigma)) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Ok(_), Ok(_)) => failures.push(format!("{name}: not equivariant under {sigma}")),
                    (Err(e), _) | (_, Err(e)) => failures.push(format!("{name} {sigma}: {e}")),
                }
            }
        }
    }
    Ok(line(
        7,
        "descent",
        &failures,
        format!("sections reconstruct exactly; {count} equivariance checks over all of S_n, n <= 3"),
    ))
}

fn check_coalgebra() -> Result<CheckLine> {
    let got = path_coalgebra_dims(&Quiver::double(), 10);
    let failures: Vec<String> =
        got.iter().enumerate().filter(|(_, &d)| d != 2).map(|(k, d)| format!("degree {k}: {d}")).collect();
    let shown: Vec<String> = got.iter().map(|d| d.to_string()).collect();
    Ok(line(8, "coalgebra degrees", &failures, format!("double quiver degrees 0..10: {}", shown.join(","))))
}

fn check_fixtures() -> Result<CheckLine> {
    let mut failures = Vec::new();
    for n in 1..=3 {
        let c: S = constant_fixture(n)?;
        let k: S = skyscraper_fixture(n)?;
        for t in enumerate_trees(n)? {
            let len = tree_to_collisions(&t)?.len();
            for (p, d) in omega_t(&c, &t)?.component_dims() {
                let want = usize::from(p == SignPattern::all_psi(len));
                if d != want {
                    failures.push(format!("constant({n}) {t} {p}: {d}"));
                }
            }
            let all_phi = SignPattern(vec![Letter::Phi; len]);
            for (p, d) in omega_t(&k, &t)?.component_dims() {
                let want = usize::from(p == all_phi);
                if d != want {
                    failures.push(format!("skyscraper({n}) {t} {p}: {d}"));
                }
            }
        }
    }
    Ok(line(
        9,
        "fixture components",
        &failures,
        "constant: Phi-type components 0; skyscraper: only all-Phi, dim 1 (n <= 3, all trees)".into(),
    ))
}

/// Shipped configuration texts, by name.
pub fn shipped_configs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("gluing.rel", GLUING_RELATIONS),
        ("diamond.rel", DIAMOND_RELATIONS),
        ("axioms.default", DEFAULT_AXIOMS),
        ("canvar.default", DEFAULT_CANVAR),
    ]
}

/// Print/parse fixpoint for a relation file or config text.
pub fn config_fixpoint(name: &str, text: &str) -> std::result::Result<(), String> {
    let first = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty()).unwrap_or("");
    let printed = match first.split_whitespace().next().unwrap_or("") {
        "quiver" => parse_relation_file::<Rational>(text).map(|r| r.to_string()),
        "axioms" => AxiomConfig::parse(text).map(|c| c.to_string()),
        "canvar" => CanVarConfig::parse(text).map(|c| c.to_string()),
        other => return Err(format!("{name}: unknown config type `{other}`")),
    }
    .map_err(|e| format!("{name}: {e}"))?;
    let again = match first.split_whitespace().next().unwrap_or("") {
        "quiver" => parse_relation_file::<Rational>(&printed).map(|r| r.to_string()),
        "axioms" => AxiomConfig::parse(&printed).map(|c| c.to_string()),
        _ => CanVarConfig::parse(&printed).map(|c| c.to_string()),
    }
    .map_err(|e| format!("{name} (reprinted): {e}"))?;
    if again == printed {
        Ok(())
    } else {
        Err(format!("{name}: print/parse is not a fixpoint"))
    }
}

fn check_tooling(cfg: &SuiteConfig) -> Result<CheckLine> {
    let mut failures = Vec::new();
    let mut configs = 0;
    for (name, text) in shipped_configs() {
        configs += 1;
        if let Err(e) = config_fixpoint(name, text) {
            failures.push(e);
        }
    }
    for (name, text) in &cfg.configs {
        configs += 1;
        if let Err(e) = config_fixpoint(name, text) {
            failures.push(e);
        }
    }
    let mut saved = 0;
    for n in 1..=3 {
        for (name, s) in sheaf_suite(n, cfg, 8)? {
            saved += 1;
            let text = format_sheaf(&s);
            match parse_sheaf::<Rational>(&text) {
                Ok(b) if b == s && format_sheaf(&b) == text => {}
                Ok(_) => failures.push(format!("{name}: save/load differs")),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    for k in 0..8u64 {
        saved += 1;
        let d = random_datum::<Rational>((k % 3) as usize, (k % 2) as usize, cfg.seed.wrapping_add(k))?;
        let text = format_datum(&d);
        match parse_datum::<Rational>(&text) {
            Ok(b) if b == d => {}
            Ok(_) => failures.push(format!("datum {k}: save/load differs")),
            Err(e) => failures.push(format!("datum {k}: {e}")),
        }
    }
    Ok(line(
        10,
        "tooling",
        &failures,
        format!("{configs} configs at a print/parse fixpoint; {saved} objects save/load bit-exact"),
    ))
}

/// Validity of the user's sheaves and data.
fn check_inputs(cfg: &SuiteConfig) -> Result<Option<CheckLine>> {
    if cfg.sheaves.is_empty() && cfg.data.is_empty() {
        return Ok(None);
    }
    let mut failures = Vec::new();
    for (name, s) in &cfg.sheaves {
        match validate(s, &cfg.axioms) {
            Ok(r) if r.all_pass() => {}
            Ok(r) => failures.push(format!("{name}:\n{r}")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    for (name, d) in &cfg.data {
        let round = glue_backward(d).and_then(|s| glue_forward(&s, &cfg.axioms, &cfg.canvar));
        match round {
            Ok(r) if r == *d => {}
            Ok(_) => failures.push(format!("{name}: forward(backward(d)) differs from d")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    Ok(Some(line(
        0,
        "inputs valid",
        &failures,
        format!(
            "{} loaded sheaves pass the active axioms; {} loaded data glue back exactly",
            cfg.sheaves.len(),
            cfg.data.len()
        ),
    )))
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut lines = Vec::new();
    if let Some(l) = check_inputs(cfg)? {
        lines.push(l);
    }
    lines.push(check_gluing_axiom(cfg)?);
    lines.push(check_equivalence(cfg)?);
    lines.push(check_explicit_formulas(cfg)?);
    lines.push(check_comparison(cfg)?);
    lines.push(check_counts()?);
    lines.push(check_unipotent_loops(cfg)?);
    lines.push(check_descent(cfg)?);
    lines.push(check_coalgebra()?);
    lines.push(check_fixtures()?);
    lines.push(check_tooling(cfg)?);
    Ok(SuiteReport { lines })
}
