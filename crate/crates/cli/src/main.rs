use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use treespectra::charpoly::{charpoly, count_roots_with_multiplicity, distinct_real_roots, float_spectrum, scaled_charpoly};
use treespectra::diag::{diagonalize, locate, MatrixJson};
use treespectra::realization::{assemble, certify};
use treespectra::tree::{SeedId, UnfoldingSpec};
use treespectra::verifier::{
    check_exclusivity, defectiveness_probe, lemma31_sweep, lemma32_sweep, lemma41_suite, lemma42_suite, lemma43_suite,
    property_c_counterexample, random_corpus, rational_family_levels, EntryDistribution, ProbeTarget, SuiteReport,
    SweepReport, DEFAULT_CLUSTER_GAP,
};
use treespectra::{rational_of_string, Rational, ScalarBackend, WeightedTreeMatrix};

const SCHEMA: &str = "1";

const EXIT_USAGE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_CERTIFICATE: u8 = 4;
const EXIT_VERIFY: u8 = 5;

/// Spectral toolkit for weighted trees: eigenvalue location, exact
/// characteristic polynomials, realizations with few distinct eigenvalues.
///
/// Exit codes: 0 success, 2 bad input, 3 invalid matrix, 4 certification
/// failure, 5 verification failure.
#[derive(Parser, Debug)]
#[command(name = "treespectra", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lemma41,
    Lemma42,
    Lemma43,
    Lemma31,
    Lemma32,
    Exclusivity,
    PropertyC,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagonalize M - λI along the tree and report every pivot.
    Diag {
        /// Matrix JSON file.
        matrix: PathBuf,
        /// The value λ, as a fraction string.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, value_enum, default_value_t = Backend::Exact)]
        backend: Backend,
        /// Zero tolerance of the float backend.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Count eigenvalues below, at and above each λ.
    Locate {
        matrix: PathBuf,
        /// One or more values λ.
        #[arg(long, allow_hyphen_values = true, num_args = 1.., required_unless_present = "at_spectrum")]
        at: Vec<String>,
        /// Locate at every float eigenvalue (float backend only).
        #[arg(long)]
        at_spectrum: bool,
        #[arg(long, value_enum, default_value_t = Backend::Exact)]
        backend: Backend,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Exact characteristic polynomial and root counts.
    Charpoly {
        matrix: PathBuf,
        /// Count roots with multiplicity in the half-open interval (A, B].
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
        count_in: Option<Vec<String>>,
        /// Also print float eigenvalues.
        #[arg(long)]
        spectrum: bool,
    },
    /// Build the weighted realization of an unfolding and certify it.
    Realize {
        /// Seed name (S7-7, S7-8 or S7-9).
        #[arg(long)]
        seed: String,
        /// Unfolding spec JSON; defaults to the seed itself.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Coupling entry between the center and the second-type branches.
        #[arg(long, allow_hyphen_values = true)]
        coupling2: Option<String>,
        /// Also write the matrix JSON here.
        #[arg(long)]
        out_matrix: Option<PathBuf>,
        /// Also write the certificate JSON here.
        #[arg(long)]
        out_cert: Option<PathBuf>,
    },
    /// Run one of the built-in verification suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Number of random instances.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Zero tolerance for the float sweeps.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Count distinct eigenvalues of random matrices on a fixed tree.
    Probe {
        /// S7-7, S7-8, S7-9 or forest-T1T3.
        #[arg(long)]
        tree: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Relative clustering gap.
        #[arg(long, default_value_t = DEFAULT_CLUSTER_GAP)]
        tol: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
    detail: Option<Value>,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into(), detail: None }
    }
}

type CmdResult = Result<Output, Failure>;

/// A command's report, plus the exit code it asks for.
struct Output {
    body: Value,
    text: String,
    code: u8,
}

fn ok(body: Value, text: String) -> CmdResult {
    Ok(Output { body, text, code: 0 })
}

fn parse_q(s: &str) -> Result<Rational, Failure> {
    rational_of_string(s).map_err(|e| Failure::new(EXIT_USAGE, format!("bad rational {s:?}: {e}")))
}

fn backend_of(b: Backend, tol: f64) -> Result<ScalarBackend, Failure> {
    match b {
        Backend::Exact => Ok(ScalarBackend::Exact),
        Backend::Float => ScalarBackend::float(tol).map_err(|e| Failure::new(EXIT_USAGE, e.to_string())),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

/// The matrix together with the map from input vertex ids to internal ids.
struct Loaded {
    m: WeightedTreeMatrix,
    perm: Vec<usize>,
}

impl Loaded {
    fn read(path: &Path) -> Result<Loaded, Failure> {
        let json: MatrixJson = read_json(path)?;
        let (m, perm) = WeightedTreeMatrix::from_json(&json).map_err(|e| Failure::new(EXIT_INVARIANT, e.to_string()))?;
        Ok(Loaded { m, perm })
    }

    fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (old, &new) in self.perm.iter().enumerate() {
            inv[new] = old;
        }
        inv
    }
}

fn cmd_diag(path: &Path, at: &str, backend: Backend, tol: f64) -> CmdResult {
    let lm = Loaded::read(path)?;
    let lambda = parse_q(at)?;
    let be = backend_of(backend, tol)?;
    let inv = lm.inverse();
    let f = lm.m.forest();
    let (d, inertia, zeros, deleted, roots): (Vec<Value>, _, _, Vec<Value>, Vec<Value>) = match be {
        ScalarBackend::Exact => {
            let out = diagonalize(&lm.m, &-lambda.clone(), &be);
            let d = lm.perm.iter().map(|&v| json!(out.d[v].to_string())).collect();
            let roots = out.root_values.iter().map(|(r, v)| json!({"vertex": inv[*r], "d": v.to_string()})).collect();
            let del = out.deleted_edges.iter().map(|(c, p)| json!([inv[*c], inv[*p]])).collect();
            (d, out.inertia, out.zeros_by_level, del, roots)
        }
        ScalarBackend::Float { .. } => {
            let fm = lm.m.to_f64();
            let out = diagonalize(&fm, &-lambda.to_f64(), &be);
            let d = lm.perm.iter().map(|&v| json!(out.d[v])).collect();
            let roots = out.root_values.iter().map(|(r, v)| json!({"vertex": inv[*r], "d": v})).collect();
            let del = out.deleted_edges.iter().map(|(c, p)| json!([inv[*c], inv[*p]])).collect();
            (d, out.inertia, out.zeros_by_level, del, roots)
        }
    };
    let levels: Vec<usize> = lm.perm.iter().map(|&v| f.level(v)).collect();
    let text = format!(
        "lambda {lambda}\nd {}\ninertia +{} -{} 0:{}\nroots {}",
        d.iter().map(value_text).collect::<Vec<_>>().join(" "),
        inertia.positive,
        inertia.negative,
        inertia.zero,
        roots.iter().map(|r| format!("{}={}", r["vertex"], value_text(&r["d"]))).collect::<Vec<_>>().join(" "),
    );
    ok(
        json!({
            "lambda": lambda.to_string(),
            "x": (-lambda).to_string(),
            "backend": backend_name(&be),
            "d": d,
            "levels": levels,
            "inertia": inertia,
            "zeros_by_level": zeros,
            "deleted_edges": deleted,
            "root_values": roots,
        }),
        text,
    )
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn backend_name(b: &ScalarBackend) -> Value {
    match b {
        ScalarBackend::Exact => json!("exact"),
        ScalarBackend::Float { zero_tolerance } => json!({"float": {"zero_tolerance": zero_tolerance}}),
    }
}

fn cmd_locate(path: &Path, at: &[String], at_spectrum: bool, backend: Backend, tol: f64) -> CmdResult {
    let lm = Loaded::read(path)?;
    let be = backend_of(backend, tol)?;
    let mut rows = Vec::new();
    let mut text = Vec::new();
    if at_spectrum {
        if be.is_exact() {
            return Err(Failure::new(
                EXIT_USAGE,
                "--at-spectrum uses float eigenvalues and needs --backend float",
            ));
        }
        let fm = lm.m.to_f64();
        for lam in float_spectrum(&fm) {
            let loc = locate(&fm, &lam, &be);
            text.push(format!("{lam} below {} mult {} above {}", loc.below, loc.mult, loc.above));
            rows.push(json!({"lambda": lam, "below": loc.below, "mult": loc.mult, "above": loc.above}));
        }
    }
    for s in at {
        let lam = parse_q(s)?;
        let loc = if be.is_exact() { locate(&lm.m, &lam, &be) } else { locate(&lm.m.to_f64(), &lam.to_f64(), &be) };
        text.push(format!("{lam} below {} mult {} above {}", loc.below, loc.mult, loc.above));
        rows.push(json!({"lambda": lam.to_string(), "below": loc.below, "mult": loc.mult, "above": loc.above}));
    }
    ok(json!({"n": lm.m.n(), "backend": backend_name(&be), "locations": rows}), text.join("\n"))
}

fn cmd_charpoly(path: &Path, count_in: Option<&[String]>, spectrum: bool) -> CmdResult {
    let lm = Loaded::read(path)?;
    let p = charpoly(&lm.m);
    let scaled = scaled_charpoly(&lm.m);
    let distinct = distinct_real_roots(&p).map_err(|e| Failure::new(EXIT_INVARIANT, e.to_string()))?;
    let mut body = json!({
        "n": lm.m.n(),
        "coefficients": p,
        "display": p.to_string(),
        "integer_scale": scaled.scale.to_string(),
        "distinct_real_roots": distinct,
    });
    let mut text = format!("p(x) = {p}\ndistinct real roots {distinct}");
    if let Some([a, b]) = count_in {
        let (a, b) = (parse_q(a)?, parse_q(b)?);
        let c = count_roots_with_multiplicity(&p, &a, &b).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        body["count_in"] = json!({"a": a.to_string(), "b": b.to_string(), "count": c});
        text.push_str(&format!("\nroots in ({a}, {b}] {c}"));
    }
    if spectrum {
        let s = float_spectrum(&lm.m);
        text.push_str(&format!("\nspectrum {s:?}"));
        body["float_spectrum"] = json!(s);
    }
    ok(body, text)
}

fn cmd_realize(
    seed: &str,
    spec: Option<&Path>,
    coupling2: Option<&str>,
    out_matrix: Option<&Path>,
    out_cert: Option<&Path>,
) -> CmdResult {
    let seed = SeedId::parse(seed).ok_or_else(|| Failure::new(EXIT_USAGE, format!("unknown seed {seed:?}")))?;
    let spec: UnfoldingSpec = match spec {
        Some(p) => read_json(p)?,
        None => seed.seed_spec(),
    };
    if spec.seed != seed {
        return Err(Failure::new(EXIT_USAGE, format!("spec is for {}, not {}", spec.seed.name(), seed.name())));
    }
    spec.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let c2 = coupling2.map(parse_q).transpose()?;
    let m = assemble(&spec, c2.as_ref()).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let matrix = serde_json::to_value(m.to_json()).expect("serializable");
    write_if(out_matrix, &matrix)?;
    match certify(&m, &spec) {
        Ok(cert) => {
            let cert_json = serde_json::to_value(&cert).expect("serializable");
            write_if(out_cert, &cert_json)?;
            let total: usize = cert.rational_multiplicities.values().sum();
            let text = format!(
                "n {}\nmultiplicities {}\nsum {total}\nabove 3: {}  below -3: {}\ndistinct eigenvalues <= {}",
                cert.n,
                cert.rational_multiplicities.iter().map(|(l, k)| format!("{l}:{k}")).collect::<Vec<_>>().join(" "),
                cert.count_above_3,
                cert.count_below_neg3,
                cert.distinct_count_bound,
            );
            ok(json!({"matrix": matrix, "certificate": cert_json}), text)
        }
        Err(e) => Err(Failure {
            code: EXIT_CERTIFICATE,
            message: e.to_string(),
            detail: Some(json!({"matrix": matrix})),
        }),
    }
}

fn write_if(path: Option<&Path>, v: &Value) -> Result<(), Failure> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
        fs::write(p, text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn suite_output(reports: Vec<Value>, passed: bool, first_failure: Option<Value>, text: String) -> CmdResult {
    let mut body = json!({"passed": passed, "reports": reports});
    if let Some(f) = first_failure {
        body["first_failure"] = f;
    }
    Ok(Output { body, text, code: if passed { 0 } else { EXIT_VERIFY } })
}

fn suite_text(r: &SuiteReport) -> String {
    format!("{}: {} checks, {} failures", r.suite, r.checks, r.failures.len())
}

fn sweep_text(r: &SweepReport) -> String {
    format!(
        "{}: {} instances, {} unresolved at tolerance {}, {} failures",
        r.lemma,
        r.instances,
        r.unresolved.len(),
        r.zero_tolerance,
        r.failures.len()
    )
}

fn cmd_verify(suite: Suite, samples: Option<usize>, seed: u64, tol: f64) -> CmdResult {
    let ledgers = |rep: SuiteReport| {
        let first = rep.failures.first().map(|f| json!(f));
        let text = suite_text(&rep);
        suite_output(vec![json!(rep)], rep.passed, first, text)
    };
    match suite {
        Suite::Lemma41 => ledgers(lemma41_suite(samples.unwrap_or(50), seed)),
        Suite::Lemma42 => ledgers(lemma42_suite(samples.unwrap_or(50), seed)),
        Suite::Lemma43 => ledgers(lemma43_suite(samples.unwrap_or(50), seed)),
        Suite::Lemma31 | Suite::Lemma32 => {
            let be = backend_of(Backend::Float, tol)?;
            let corpus = random_corpus(samples.unwrap_or(200), 14, 4, seed);
            let sweep = if suite == Suite::Lemma31 { lemma31_sweep(&corpus, &be) } else { lemma32_sweep(&corpus, &be) };
            let exact = rational_family_levels(20, seed);
            let passed = sweep.passed && exact.passed;
            let first = sweep.failures.first().map(|f| json!(f)).or_else(|| exact.failures.first().map(|f| json!(f)));
            let text = format!("{}\n{}", sweep_text(&sweep), suite_text(&exact));
            suite_output(vec![json!(sweep), json!(exact)], passed, first, text)
        }
        Suite::Exclusivity => {
            let rep = check_exclusivity(samples.unwrap_or(10_000), seed);
            let text = format!(
                "forced: {} / {}; {} samples, {} satisfying the first identity",
                rep.forced_case_a, rep.forced_case_b, rep.samples, rep.samples_satisfying_t1
            );
            let (passed, first) = (rep.passed, (!rep.passed).then(|| json!(rep)));
            suite_output(vec![json!(rep)], passed, first, text)
        }
        Suite::PropertyC => {
            let rep = property_c_counterexample(samples.unwrap_or(10_000), seed);
            let text = format!(
                "probe min {} (floor 6), witnesses {:?}, union {}, exclusivity {}",
                min_text(rep.probe.min_distinct_found),
                rep.component_witness_distinct,
                rep.union_witness_distinct,
                rep.exclusivity.passed
            );
            let (passed, first) = (rep.passed, (!rep.passed).then(|| json!(rep)));
            suite_output(vec![json!(rep)], passed, first, text)
        }
    }
}

fn min_text(min: Option<usize>) -> String {
    min.map_or_else(|| "none".into(), |m| m.to_string())
}

fn cmd_probe(tree: &str, samples: usize, seed: u64, tol: f64) -> CmdResult {
    let target = ProbeTarget::parse(tree).ok_or_else(|| Failure::new(EXIT_USAGE, format!("unknown tree {tree:?}")))?;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::new(EXIT_USAGE, "--tol must be a finite non-negative number"));
    }
    let rep = defectiveness_probe(target, samples, seed, EntryDistribution::Eighths, tol);
    let text = format!(
        "{} n={} samples={} min distinct {} (floor {})\nhistogram {}",
        rep.tree_id,
        rep.n,
        rep.samples,
        min_text(rep.min_distinct_found),
        rep.expected_floor,
        rep.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" "),
    );
    let code = if rep.floor_respected { 0 } else { EXIT_VERIFY };
    Ok(Output { body: json!(rep), text, code })
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Diag { matrix, at, backend, tol } => cmd_diag(matrix, at, *backend, *tol),
        Command::Locate { matrix, at, at_spectrum, backend, tol } => cmd_locate(matrix, at, *at_spectrum, *backend, *tol),
        Command::Charpoly { matrix, count_in, spectrum } => cmd_charpoly(matrix, count_in.as_deref(), *spectrum),
        Command::Realize { seed, spec, coupling2, out_matrix, out_cert } => cmd_realize(
            seed,
            spec.as_deref(),
            coupling2.as_deref(),
            out_matrix.as_deref(),
            out_cert.as_deref(),
        ),
        Command::Verify { suite, samples, seed, tol } => cmd_verify(*suite, *samples, *seed, *tol),
        Command::Probe { tree, samples, seed, tol } => cmd_probe(tree, *samples, *seed, *tol),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Diag { .. } => "diag",
        Command::Locate { .. } => "locate",
        Command::Charpoly { .. } => "charpoly",
        Command::Realize { .. } => "realize",
        Command::Verify { .. } => "verify",
        Command::Probe { .. } => "probe",
    }
}

fn envelope(command: &str, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    Value::Object(map)
}

fn setup_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("TREESPECTRA_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::new(EXIT_USAGE, format!("TREESPECTRA_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let result = setup_threads().and_then(|_| run(&cli));
    match result {
        Ok(out) => {
            match cli.format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&envelope(name, out.body)).expect("serializable"))
                }
                Format::Text => println!("{}", out.text),
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            if cli.format == Format::Json {
                let mut body = json!({"error": {"code": f.code, "message": f.message}});
                if let Some(d) = f.detail {
                    body["error"]["detail"] = d;
                }
                println!("{}", serde_json::to_string_pretty(&envelope(name, body)).expect("serializable"));
            }
            ExitCode::from(f.code)
        }
    }
}
