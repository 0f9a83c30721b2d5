use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abelian_cs::homology::{cohomology_closed, ComplexJson, SimplicialPair};
use abelian_cs::phase::CMatrix;
use abelian_cs::quantize::Level;
use abelian_cs::symplectic::{maslov_gram, maslov_index, sp_decompose, Lagrangian, LagrangianJson, SpElement};
use abelian_cs::tqft::{
    closed_invariant, closed_invariant_by_gluing, direct_closed_formula, framing_phase, lens_cs_table, lens_gauss_oracle,
    lens_word, mapping_torus_invariant, simplicial_closed_invariant, trace_operator, word_representation,
    ExtendedCobordism, SurgeryWord, WordToken,
};
use abelian_cs::triangulate::{lens_space, sphere3};
use abelian_cs::verify::{run_suite, Suite};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "abcs", version, about = "Level-k abelian Chern–Simons TQFT calculator")]
struct Cli {
    /// Level k (positive, even; default 2, or {2,4} for verify)
    #[arg(long, short = 'k', global = true)]
    level: Option<u64>,
    /// Agreement tolerance for cross-checks, in (0, 1e-3]
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Seed for randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write JSON here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maslov index τ(L1,L2,L3) of a Lagrangian triple file
    Maslov { file: PathBuf },
    /// Matrix of U(word) on H(Σ_g, span e)
    Rep(WordArgs),
    /// Closed-manifold invariants
    Invariant {
        #[command(subcommand)]
        kind: Invariant,
    },
    /// Run an executable verification suite
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Subcommand)]
enum Invariant {
    /// L(p,1) = S T^p S, against a Gauss-sum oracle and the direct formula
    Lens {
        #[arg(long, short)]
        p: i64,
    },
    /// Σ_g mapping torus of a word or matrix, by cylinder self-gluing
    MappingTorus(WordArgs),
    /// Heegaard gluing of two handlebodies along a word
    Heegaard(WordArgs),
    /// Triangulated closed 3-manifold (or Z_X for one with boundary)
    Simplicial { file: PathBuf },
}

#[derive(clap::Args)]
struct WordArgs {
    #[arg(long, short, default_value_t = 1)]
    genus: usize,
    /// Compact word, e.g. "S T^3 S" (S = γ, T^p = β(p·I)); empty for the identity
    #[arg(long, short, conflicts_with_all = ["file", "element"])]
    word: Option<String>,
    /// Surgery-word JSON file
    #[arg(long, short, conflicts_with = "element")]
    file: Option<PathBuf>,
    /// Symplectic matrix as JSON rows, decomposed into generators
    #[arg(long, short)]
    element: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Axioms,
    Cocycle,
    Torsion,
    All,
}

enum Fail {
    Validation(String),
    Verification(Value),
}

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail::Validation(e.to_string())
    }
}

type Out = Result<Value, Fail>;

fn c(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix(m: &CMatrix) -> Value {
    Value::Array((0..m.rows).map(|i| Value::Array((0..m.cols).map(|j| c(m.get(i, j))).collect())).collect())
}

fn read<T: for<'de> Deserialize<'de>>(p: &Path) -> Result<T, Fail> {
    let s = std::fs::read_to_string(p).map_err(|e| Fail::Validation(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&s).map_err(|e| Fail::Validation(format!("{}: {e}", p.display())))
}

fn level(k: u64) -> Result<Level, Fail> {
    Ok(Level::new(k)?)
}

impl WordArgs {
    fn word(&self) -> Result<SurgeryWord, Fail> {
        if let Some(f) = &self.file {
            return read(f);
        }
        if let Some(e) = &self.element {
            let rows: Vec<Vec<i64>> = serde_json::from_str(e)?;
            let h = SpElement::from_i64(&rows)?;
            let w = sp_decompose(&h);
            let word = w.tokens.iter().map(token_json).collect::<Result<_, _>>()?;
            return Ok(SurgeryWord { genus: h.genus(), word, framings: vec![] });
        }
        Ok(SurgeryWord::parse_compact(self.genus, self.word.as_deref().unwrap_or(""))?)
    }
}

fn token_json(t: &abelian_cs::symplectic::SpToken) -> Result<WordToken, Fail> {
    use abelian_cs::symplectic::SpToken;
    let rows = |m: &abelian_cs::zlattice::IntMatrix| m.to_i64().ok_or_else(|| Fail::Validation("entry overflows i64".into()));
    Ok(match t {
        SpToken::Gamma => WordToken::S,
        SpToken::Alpha(a) => WordToken::Alpha { a: rows(a)? },
        SpToken::Beta(b) => WordToken::Beta { b: rows(b)? },
    })
}

fn agreement(value: Complex64, other: Complex64, tol: f64, extra: Value) -> Out {
    let residual = (value - other).norm();
    let mut v = extra;
    v["residual"] = json!(residual);
    v["tolerance"] = json!(tol);
    if residual > tol {
        Err(Fail::Verification(v))
    } else {
        Ok(v)
    }
}

#[derive(Deserialize)]
struct TripleFile {
    lagrangians: Vec<LagrangianJson>,
}

fn cmd_maslov(file: &Path) -> Out {
    let t: TripleFile = read(file)?;
    if t.lagrangians.len() != 3 {
        return Err(Fail::Validation(format!("expected 3 Lagrangians, got {}", t.lagrangians.len())));
    }
    let ls = t
        .lagrangians
        .iter()
        .enumerate()
        .map(|(i, j)| Lagrangian::from_json(j).map_err(|e| Fail::Validation(format!("Lagrangian {}: {e}", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    let tau = maslov_index(&ls[0], &ls[1], &ls[2])?;
    let gram = maslov_gram(&ls[0], &ls[1], &ls[2])?;
    let gram: Vec<Vec<String>> = gram.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    Ok(json!({ "tau": tau, "gram": gram }))
}

fn cmd_rep(w: &WordArgs, k: u64) -> Out {
    let word = w.word()?;
    let (ext, mat) = word_representation(&word, level(k)?)?;
    Ok(json!({
        "genus": word.genus,
        "level": k,
        "framing": ext.m,
        "symplectic": ext.h.matrix().to_i64(),
        "matrix": matrix(&mat),
        "unitarity_residual": mat.unitarity_residual(),
    }))
}

fn cmd_lens(p: i64, k: u64, tol: f64) -> Out {
    if p < 1 {
        return Err(Fail::Validation("lens parameter p must be ≥ 1".into()));
    }
    let lv = level(k)?;
    let (v, n) = closed_invariant(&lens_word(p), lv)?;
    let oracle = lens_gauss_oracle(p, k);
    let x = if p == 1 { sphere3() } else { lens_space(p as usize, 1)? };
    let prof = cohomology_closed(&x);
    let (cs, offset) = lens_cs_table(p);
    let mass = (1.0 / prof.tors_order().to_f64().unwrap_or(f64::NAN)).sqrt();
    let direct = direct_closed_formula(&prof, &cs, mass, lv)? * framing_phase(offset);
    let magnitude_residual = (v.norm() - oracle.norm()).abs();
    let out = json!({
        "p": p, "level": k, "value": c(v), "framing": n,
        "gauss_oracle": c(oracle), "magnitude_residual": magnitude_residual,
        "direct": c(direct), "framing_offset": offset,
    });
    if magnitude_residual > tol {
        return Err(Fail::Verification(out));
    }
    agreement(v, direct, tol, out)
}

fn cmd_mapping_torus(w: &WordArgs, k: u64, tol: f64) -> Out {
    let word = w.word()?;
    let lv = level(k)?;
    let (ext, _) = word_representation(&word, lv)?;
    let (v, n) = mapping_torus_invariant(&ext.h, ext.m, lv)?;
    let tr = trace_operator(&ext.h, ext.m, lv)?;
    agreement(v, tr, tol, json!({ "genus": word.genus, "level": k, "value": c(v), "framing": n, "trace": c(tr) }))
}

fn cmd_heegaard(w: &WordArgs, k: u64, tol: f64) -> Out {
    let word = w.word()?;
    let lv = level(k)?;
    let (v, n) = closed_invariant(&word, lv)?;
    let (gl, n2) = closed_invariant_by_gluing(&word, lv)?;
    let out = json!({ "genus": word.genus, "level": k, "value": c(v), "framing": n, "gluing": c(gl), "gluing_framing": n2 });
    if n != n2 {
        return Err(Fail::Verification(out));
    }
    agreement(v, gl, tol, out)
}

fn cmd_simplicial(file: &Path, k: u64) -> Out {
    let j: ComplexJson = read(file)?;
    let p = match j.boundary {
        Some(_) => SimplicialPair::from_json(&j)?,
        None => SimplicialPair::with_boundary(abelian_cs::homology::SimplicialComplex::from_json(&j)?)?,
    };
    let lv = level(k)?;
    if p.a.facets().is_empty() {
        let v = simplicial_closed_invariant(&p, lv)?;
        return Ok(json!({ "level": k, "value": c(v), "framing": 0 }));
    }
    let x = ExtendedCobordism::from_simplicial(&p)?;
    let z = x.block_vector(lv)?;
    Ok(json!({
        "level": k,
        "boundary_genera": x.boundary.genera,
        "lagrangian": x.l_x.to_json(),
        "vector": z.amps.iter().map(|a| c(*a)).collect::<Vec<_>>(),
        "framing": 0,
    }))
}

fn cmd_verify(s: SuiteArg, cli: &Cli) -> Out {
    let suite = match s {
        SuiteArg::Axioms => Suite::Axioms,
        SuiteArg::Cocycle => Suite::Cocycle,
        SuiteArg::Torsion => Suite::Torsion,
        SuiteArg::All => Suite::All,
    };
    // the cocycle suite accepts any positive level: odd levels are expected to fail
    let levels = match cli.level {
        Some(0) => return Err(Fail::Validation("level must be positive".into())),
        Some(k) if matches!(suite, Suite::Cocycle) => vec![k],
        Some(k) => vec![level(k)?.get()],
        None => vec![2, 4],
    };
    let r = run_suite(suite, &levels, cli.seed, cli.tolerance);
    let v = serde_json::to_value(&r)?;
    if r.passed {
        Ok(v)
    } else {
        Err(Fail::Verification(v))
    }
}

fn run(cli: &Cli) -> Out {
    if let Some(t) = cli.tolerance {
        if !(t > 0.0 && t <= 1e-3) {
            return Err(Fail::Validation(format!("tolerance {t} outside (0, 1e-3]")));
        }
    }
    let tol = cli.tolerance.unwrap_or(1e-9);
    let k = cli.level.unwrap_or(2);
    match &cli.command {
        Command::Maslov { file } => cmd_maslov(file),
        Command::Rep(w) => cmd_rep(w, k),
        Command::Invariant { kind } => match kind {
            Invariant::Lens { p } => cmd_lens(*p, k, tol),
            Invariant::MappingTorus(w) => cmd_mapping_torus(w, k, tol),
            Invariant::Heegaard(w) => cmd_heegaard(w, k, tol),
            Invariant::Simplicial { file } => cmd_simplicial(file, k),
        },
        Command::Verify { suite } => cmd_verify(*suite, cli),
    }
}

/// JSON with every float printed to 17 significant digits.
struct Digits17(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn render(v: &Value) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(serde_json::ser::PrettyFormatter::new()));
    serde::Serialize::serialize(v, &mut ser).expect("in-memory JSON");
    buf.push(b'\n');
    buf
}

fn emit(v: &Value, out: &Option<PathBuf>) -> Result<(), String> {
    let bytes = render(v);
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (v, code) = match run(&cli) {
        Ok(v) => (v, 0),
        Err(Fail::Verification(v)) => (v, 3),
        Err(Fail::Validation(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&v, &cli.out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
