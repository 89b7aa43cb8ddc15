use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use braidsheaf::cycles::{CanVarConfig, SignPattern};
use braidsheaf::fiber::{comparison, enumerate_trees, omega_t, LabelledTree};
use braidsheaf::gluing::{glue_backward, glue_forward, random_valid_sheaf, verify_gluing_axiom};
use braidsheaf::groupoid::{build_section_at, check_unipotence, reconstruct, transport, CrossingPath};
use braidsheaf::hypsheaf::{
    constant_fixture, permute_sheaf, skyscraper_fixture, validate, AxiomConfig, HyperbolicSheaf,
};
use braidsheaf::io::{format_datum, format_sheaf, load, Loaded};
use braidsheaf::quiver::dsl::parse_relation_file;
use braidsheaf::quiver::{path_coalgebra_dims, Quiver};
use braidsheaf::verify::{config_fixpoint, run_suite, SuiteConfig};
use braidsheaf::{enumerate_faces, Error, Permutation, Rational, Result};

use crate::Command;

type S = HyperbolicSheaf<Rational>;

pub struct Context {
    pub axioms: AxiomConfig,
    pub canvar: CanVarConfig,
    pub seed: u64,
}

pub struct Output {
    pub text: String,
    pub passed: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, col, msg } => Error::Parse { line, col, msg: format!("{}: {msg}", path.display()) },
        other => other,
    }
}

impl Context {
    pub fn new(axioms: Option<&Path>, canvar: Option<&Path>, seed: u64) -> Result<Self> {
        let axioms = match axioms {
            Some(p) => AxiomConfig::parse(&read(p)?).map_err(|e| in_file(p, e))?,
            None => AxiomConfig::default(),
        };
        let canvar = match canvar {
            Some(p) => CanVarConfig::parse(&read(p)?).map_err(|e| in_file(p, e))?,
            None => CanVarConfig::default(),
        };
        Ok(Context { axioms, canvar, seed })
    }

    fn load(&self, path: &Path) -> Result<Loaded<Rational>> {
        load(path).map_err(|e| in_file(path, e))
    }

    fn sheaf(&self, path: &Path) -> Result<S> {
        match self.load(path)? {
            Loaded::Sheaf(s) => Ok(s),
            other => Err(Error::Invalid(format!("{} holds a {}, not a sheaf", path.display(), other.kind()))),
        }
    }
}

fn tree(text: &str) -> Result<LabelledTree> {
    text.parse()
}

fn emit(text: String, output: Option<&Path>, summary: &str) -> Result<String> {
    match output {
        Some(p) => {
            write(p, &text)?;
            Ok(format!("{summary} written to {}\n", p.display()))
        }
        None => Ok(text),
    }
}

/// Names of the components along a three-leaf tree.
fn pattern_label(p: &SignPattern) -> &'static str {
    match p.to_string().as_str() {
        "(Psi,Psi)" => "V",
        "(Psi,Phi)" => "V_01",
        "(Phi,Psi)" => "V_12+V_02",
        "(Phi,Phi)" => "V_012",
        "(Psi)" => "Psi",
        "(Phi)" => "Phi",
        _ => "",
    }
}

pub fn run(ctx: &Context, cmd: &Command) -> Result<Output> {
    let mut out = String::new();
    let mut passed = true;
    match cmd {
        Command::Faces { n } => {
            let poset = enumerate_faces(*n)?;
            let mut faces: Vec<_> = poset.faces().iter().collect();
            faces.sort_by_key(|f| (f.codim(), f.to_string()));
            for f in &faces {
                let _ = writeln!(out, "{:<12} codim {}", f.to_string(), f.codim());
            }
            let chambers = poset.chambers().count();
            let _ = writeln!(out, "{} faces, {chambers} chambers, {} covers", faces.len(), poset.covers().len());
        }
        Command::Validate { file } => match ctx.load(file)? {
            Loaded::Sheaf(s) => {
                let r = validate(&s, &ctx.axioms)?;
                passed = r.all_pass();
                let _ = write!(out, "{r}");
            }
            Loaded::Datum(d) => {
                let r = verify_gluing_axiom(&d)?;
                passed = r.passed();
                let _ = write!(out, "{}", r.relations);
                let _ = writeln!(out, "unipotent: {}", r.unipotent);
            }
            other => {
                let r = config_fixpoint(&file.display().to_string(), &read(file)?);
                passed = r.is_ok();
                let _ = writeln!(out, "{} parsed", other.kind());
                let _ = writeln!(out, "print/parse fixpoint: {}", r.err().unwrap_or_else(|| "ok".into()));
            }
        },
        Command::Fiber { sheaf, tree: t } => {
            let s = ctx.sheaf(sheaf)?;
            let t = tree(t)?;
            let fv = omega_t(&s, &t)?;
            let _ = writeln!(out, "tree {t}, collisions {}", fv.seq);
            for (p, c) in &fv.components {
                let _ = writeln!(
                    out,
                    "{:<10} {:<10} face {:<8} dim {}",
                    p.to_string(),
                    pattern_label(p),
                    c.face.to_string(),
                    c.dim()
                );
            }
            let _ = writeln!(out, "total {}", fv.dim());
        }
        Command::Glue { file, output } => match ctx.load(file)? {
            Loaded::Sheaf(s) => {
                let d = glue_forward(&s, &ctx.axioms, &ctx.canvar)?;
                out = emit(format_datum(&d), output.as_deref(), "gluing datum")?;
            }
            Loaded::Datum(d) => {
                let s = glue_backward(&d)?;
                out = emit(format_sheaf(&s), output.as_deref(), "sheaf")?;
            }
            other => return Err(Error::Invalid(format!("cannot glue a {}", other.kind()))),
        },
        Command::Compare { sheaf, tree: t } => {
            let s = ctx.sheaf(sheaf)?;
            let trees = match t {
                Some(t) => vec![tree(t)?],
                None => enumerate_trees(s.n())?,
            };
            for t in &trees {
                let c = comparison(&s, t)?;
                let ok = c.is_invertible();
                passed &= ok;
                let _ = writeln!(
                    out,
                    "{:<16} dim {} -> {} {}",
                    t.to_string(),
                    c.map.cols(),
                    c.map.rows(),
                    if ok { "invertible" } else { "NOT invertible" }
                );
            }
        }
        Command::Cross { sheaf, tree: t, path } => {
            let s = ctx.sheaf(sheaf)?;
            let p = CrossingPath::parse(tree(t)?, path)?;
            let tr = transport(&s, &p, &ctx.canvar)?;
            let _ = writeln!(out, "from {} to {}", p.start, tr.tree);
            let _ = write!(out, "map\n{}", tr.map);
            if tr.tree == p.start {
                let r = check_unipotence(&s, std::slice::from_ref(&p), &ctx.canvar)?;
                passed = r.passed();
                let _ = writeln!(out, "loop unipotent: {}", passed);
            }
        }
        Command::Sections { sheaf, base } => {
            let s = ctx.sheaf(sheaf)?;
            let base = match base {
                Some(b) => tree(b)?,
                None => enumerate_trees(s.n())?.remove(0),
            };
            let fam = build_section_at(&s, &base, &ctx.axioms)?;
            let back = reconstruct(&fam)?;
            let roundtrip = back == s;
            let _ = writeln!(out, "{} trees, base {}", fam.trees.len(), base);
            let _ = writeln!(out, "reconstruction equal: {roundtrip}");
            let mut equivariant = true;
            for sigma in Permutation::all(s.n()) {
                let moved = build_section_at(&permute_sheaf(&sigma, &s)?, &base.act(&sigma), &ctx.axioms)?;
                equivariant &= moved == fam.relabel(&sigma)?;
            }
            let _ =
                writeln!(out, "equivariant under all {} permutations: {equivariant}", Permutation::all(s.n()).len());
            passed = roundtrip && equivariant;
        }
        Command::Coalgebra { quiver, max } => {
            let q = match quiver.as_str() {
                "double" => Quiver::double(),
                "gluing" => Quiver::gluing(),
                "diamond" => Quiver::diamond(),
                path => {
                    let p = PathBuf::from(path);
                    let rs = parse_relation_file::<Rational>(&read(&p)?).map_err(|e| in_file(&p, e))?;
                    Arc::unwrap_or_clone(rs.quiver)
                }
            };
            for (k, d) in path_coalgebra_dims(&q, *max).iter().enumerate() {
                let _ = writeln!(out, "degree {k}: {d}");
            }
        }
        Command::Suite { inputs, random } => {
            let mut cfg = SuiteConfig {
                seed: ctx.seed,
                random: *random,
                axioms: ctx.axioms.clone(),
                canvar: ctx.canvar.clone(),
                ..SuiteConfig::default()
            };
            for path in expand(inputs)? {
                let name = path.display().to_string();
                match ctx.load(&path)? {
                    Loaded::Sheaf(s) => cfg.sheaves.push((name, s)),
                    Loaded::Datum(d) => cfg.data.push((name, d)),
                    _ => cfg.configs.push((name, read(&path)?)),
                }
            }
            let r = run_suite(&cfg)?;
            passed = r.all_pass();
            let _ = write!(out, "{r}");
        }
        Command::Fixture { kind, n, output } => {
            let s: S = if kind == "constant" { constant_fixture(*n)? } else { skyscraper_fixture(*n)? };
            out = emit(format_sheaf(&s), output.as_deref(), "sheaf")?;
        }
        Command::Random { n, output } => {
            let s: S = random_valid_sheaf(*n, ctx.seed)?;
            out = emit(format_sheaf(&s), output.as_deref(), "sheaf")?;
        }
    }
    Ok(Output { text: out, passed })
}

/// Files as given, directories replaced by their files in name order.
fn expand(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| e.is_file())
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}
