//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS or FAIL line per criterion; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treespectra::charpoly::{charpoly, multiplicity_exact, RootCounter};
use treespectra::diag::locate;
use treespectra::realization::{assemble, build_t0_matrix, build_t1_matrix, build_t2_matrix, certify};
use treespectra::tree::random_spec;
use treespectra::verifier::{
    check_exclusivity, defectiveness_probe, lemma31_sweep, lemma32_sweep, lemma41_suite, lemma42_suite,
    random_corpus, rational_family_levels, root_value, EntryDistribution, ProbeTarget, DEFAULT_CLUSTER_GAP,
};
use treespectra::{Rational, RootedForest, ScalarBackend, SeedId, SeedPart, WeightedTreeMatrix};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

fn groups(rng: &mut impl Rng, p: u32, t: u32) -> Vec<u32> {
    (0..rng.gen_range(1..=p)).map(|_| rng.gen_range(1..=t)).collect()
}

fn exact_mult(m: &WeightedTreeMatrix, lam: i64) -> usize {
    multiplicity_exact(&charpoly(m), &Rational::from_int(lam))
}

fn pinned_values() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let t = groups(&mut rng, 5, 5);
        let m = build_t1_matrix(&t).unwrap();
        ensure(root_value(&m, &q(2, 1)) == q(10, 3), || format!("T1{t:?}: d(2) != 10/3"))?;
        let t0 = rng.gen_range(1..=5);
        let m = build_t2_matrix(t0, &t).unwrap();
        ensure(root_value(&m, &q(1, 1)) == q(-4, 1), || format!("T2({t0};{t:?}): d(1) != -4"))?;
    }
    for _ in 0..20 {
        let (s0, s) = (rng.gen_range(1..=5), groups(&mut rng, 5, 5));
        let p2 = build_t0_matrix(&SeedPart::P2 { s0 }).unwrap();
        let got: Vec<Rational> = [-3, 1, 2].iter().map(|&l| root_value(&p2, &q(l, 1))).collect();
        ensure(got == vec![q(4, 1), q(4, 1), q(3, 2)], || format!("P2 {s0}: {got:?}"))?;
        let p4 = build_t0_matrix(&SeedPart::P4 { s0, s: s.clone() }).unwrap();
        let got = (root_value(&p4, &q(1, 1)), root_value(&p4, &q(2, 1)));
        ensure(got == (q(7, 2), q(3, 5)), || format!("P4 {s0} {s:?}: {got:?}"))?;
        let p3 = build_t0_matrix(&SeedPart::P3 { s: s.clone() }).unwrap();
        let got = (root_value(&p3, &q(1, 1)), root_value(&p3, &q(2, 1)));
        ensure(got == (q(7, 1), q(12, 5)), || format!("P3 {s:?}: {got:?}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("all pinned values reproduced in {elapsed:?}"))
}

fn ledgers() -> Outcome {
    let r41 = lemma41_suite(50, 2);
    let r42 = lemma42_suite(50, 3);
    ensure(r41.passed, || format!("lemma41: {:?}", r41.failures.first()))?;
    ensure(r42.passed, || format!("lemma42: {:?}", r42.failures.first()))?;
    // the same ledgers read off the characteristic polynomial
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let t = groups(&mut rng, 5, 5);
        let p = t.len();
        let m = build_t1_matrix(&t).unwrap();
        let want = [(0, m.n() - 2 * p), (-1, p - 1), (1, p - 1), (-3, 1), (3, 1)];
        for (lam, k) in want {
            ensure(exact_mult(&m, lam) == k, || format!("T1{t:?}: m({lam}) != {k}"))?;
        }
        let t0 = rng.gen_range(1..=5);
        let m = build_t2_matrix(t0, &t).unwrap();
        let want = [(-1, p - 1 + t0 as usize), (2, p - 1), (-3, 1), (3, 1)];
        for (lam, k) in want {
            ensure(exact_mult(&m, lam) == k, || format!("T2({t0};{t:?}): m({lam}) != {k}"))?;
        }
    }
    Ok(format!("lemma41 {} checks, lemma42 {} checks, 100 parameter sets re-read from charpoly", r41.checks, r42.checks))
}

fn bound_at_scale() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut max_n = 0;
    let mut count = 0;
    for seed in SeedId::ALL {
        for _ in 0..100 {
            let spec = random_spec(seed, &mut rng, 6);
            let m = assemble(&spec, None).unwrap();
            let cert = certify(&m, &spec).map_err(|e| format!("{}: {e}", serde_json::to_string(&spec).unwrap()))?;
            let total: usize = cert.rational_multiplicities.values().sum();
            ensure(total == cert.n - 2, || format!("sum {total} for n {}", cert.n))?;
            ensure((cert.count_above_3, cert.count_below_neg3) == (1, 1), || "outer counts".into())?;
            ensure(cert.distinct_count_bound <= 8, || "more than 8".into())?;
            max_n = max_n.max(cert.n);
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{count} specs certified, max n = {max_n}, in {elapsed:?}"))
}

fn small_rational(rng: &mut impl Rng) -> Rational {
    q(rng.gen_range(-9..=9), rng.gen_range(1..=9))
}

fn random_matrix(rng: &mut impl Rng) -> WeightedTreeMatrix {
    let n = rng.gen_range(1..=12);
    let parents: Vec<Option<usize>> = (0..n).map(|v| (v > 0).then(|| rng.gen_range(0..v))).collect();
    let (t, _) = RootedForest::from_parents(&parents).unwrap();
    let diag = (0..n).map(|_| small_rational(rng)).collect();
    let sq = (0..n).map(|v| t.parent(v).map(|_| q(rng.gen_range(1..=9), rng.gen_range(1..=9)))).collect();
    WeightedTreeMatrix::new(t, diag, sq).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut hits = 0;
    for i in 0..1000 {
        let m = random_matrix(&mut rng);
        let p = charpoly(&m);
        let rc = RootCounter::of_rational(&p).unwrap();
        for j in 0..10 {
            let lam = if j < 7 { small_rational(&mut rng) } else { m.diag(rng.gen_range(0..m.n())).clone() };
            let loc = locate(&m, &lam, &ScalarBackend::Exact);
            let want = (rc.below(&lam), multiplicity_exact(&p, &lam), rc.above(&lam));
            ensure((loc.below, loc.mult, loc.above) == want, || format!("matrix {i} at {lam}"))?;
            hits += usize::from(want.1 > 0);
        }
    }
    Ok(format!("10000 locations agree, {hits} at eigenvalues"))
}

fn sweeps() -> Outcome {
    let backend = ScalarBackend::float(1e-7).unwrap();
    let corpus = random_corpus(200, 14, 4, 7);
    let r31 = lemma31_sweep(&corpus, &backend);
    let r32 = lemma32_sweep(&corpus, &backend);
    ensure(r31.failures.is_empty(), || format!("lemma31: {:?}", r31.failures.first()))?;
    ensure(r32.failures.is_empty(), || format!("lemma32: {:?}", r32.failures.first()))?;
    let unresolved = r31.unresolved.len().max(r32.unresolved.len());
    ensure(unresolved <= 10, || format!("{unresolved} of 200 instances unresolved"))?;
    let fam = rational_family_levels(20, 7);
    ensure(fam.passed, || format!("families: {:?}", fam.failures.first()))?;
    Ok(format!(
        "200 trees, 0 violations ({} / {} instances unresolved at 1e-7 and reported), {} exact family checks",
        r31.unresolved.len(),
        r32.unresolved.len(),
        fam.checks
    ))
}

fn exclusivity() -> Outcome {
    let rep = check_exclusivity(10_000, 8);
    ensure(rep.symbolic_ok, || "forced substitution".into())?;
    ensure(rep.passed, || format!("{rep:?}"))?;
    Ok(format!(
        "substitution forces {} / {}; in {} of {} samples satisfying the first identity both alternatives force those values",
        rep.forced_case_a,
        rep.forced_case_b,
        rep.excluded_case_a.min(rep.excluded_case_b),
        rep.samples_satisfying_t1
    ))
}

fn probes() -> Outcome {
    let targets = [
        ProbeTarget::Counterexample(SeedId::S7_7),
        ProbeTarget::Counterexample(SeedId::S7_8),
        ProbeTarget::Counterexample(SeedId::S7_9),
        ProbeTarget::ForestT1T3,
    ];
    let mut parts = Vec::new();
    for target in targets {
        let run = || defectiveness_probe(target, 10_000, 42, EntryDistribution::Eighths, DEFAULT_CLUSTER_GAP);
        let rep = run();
        let floor = target.expected_floor();
        let min = rep.min_distinct_found.ok_or("no samples")?;
        ensure(min >= floor, || format!("{}: min {min} < {floor}", rep.tree_id))?;
        let designed = rep.designed_sample.as_ref().unwrap();
        ensure(designed.distinct == floor && designed.distinct_at_zero_gap == floor, || {
            format!("{}: designed sample {designed:?}", rep.tree_id)
        })?;
        ensure(run() == rep, || format!("{}: second run differs", rep.tree_id))?;
        parts.push(format!("{} min {min} designed {}", rep.tree_id, designed.distinct));
    }
    Ok(parts.join(", "))
}

const BIN: &str = env!("CARGO_BIN_EXE_treespectra");

fn scratch() -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(BIN).args(args).env("TREESPECTRA_THREADS", threads).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} exited with {}", out.status))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = scratch();
    let matrix = dir.join("t2.json");
    let m = build_t2_matrix(2, &[1, 3]).unwrap();
    std::fs::write(&matrix, serde_json::to_string(&m.to_json()).unwrap()).unwrap();
    let spec = dir.join("spec.json");
    let s = random_spec(SeedId::S7_9, &mut ChaCha8Rng::seed_from_u64(9), 3);
    std::fs::write(&spec, serde_json::to_string(&s).unwrap()).unwrap();
    let mp = matrix.to_str().unwrap();
    let sp = spec.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["diag", mp, "--at", "1"],
        vec!["diag", mp, "--at", "-3/2", "--backend", "float"],
        vec!["locate", mp, "--at", "-1", "2", "7/3"],
        vec!["locate", mp, "--at-spectrum", "--backend", "float"],
        vec!["charpoly", mp, "--count-in", "-3", "3", "--spectrum"],
        vec!["realize", "--seed", "S7-9", "--spec", sp, "--coupling2", "3/7"],
        vec!["verify", "--suite", "lemma41", "--samples", "20"],
        vec!["verify", "--suite", "lemma42", "--samples", "20"],
        vec!["verify", "--suite", "lemma43", "--samples", "10"],
        vec!["verify", "--suite", "lemma31", "--samples", "40"],
        vec!["verify", "--suite", "lemma32", "--samples", "40"],
        vec!["verify", "--suite", "exclusivity", "--samples", "500"],
        vec!["verify", "--suite", "property-c", "--samples", "300"],
        vec!["probe", "--tree", "S7-8", "--samples", "300", "--seed", "3"],
        vec!["--format", "text", "probe", "--tree", "forest-T1T3", "--samples", "300"],
    ];
    for args in &commands {
        let first = run_cli(args, "1")?;
        ensure(!first.is_empty(), || format!("{args:?}: empty output"))?;
        ensure(run_cli(args, "1")? == first, || format!("{args:?}: two runs differ"))?;
        ensure(run_cli(args, "8")? == first, || format!("{args:?}: 1 and 8 threads differ"))?;
    }
    Ok(format!("{} command lines byte-identical across runs and thread counts 1, 8", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("pinned appendix values", pinned_values),
        ("multiplicity ledgers", ledgers),
        ("at most 8 distinct eigenvalues at scale", bound_at_scale),
        ("locate agrees with the Sturm oracle", oracle_equivalence),
        ("top-level zero sweeps", sweeps),
        ("trace-identity exclusivity", exclusivity),
        ("defectiveness probes", probes),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
