//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;

use f4sp::bench::{gen_cyclic, gen_katsura, gen_random_quadratic, System};
use f4sp::bulk::Exec;
use f4sp::fbsp::{
    compile_batch, select_rows, Admissibility, BatchSpec, Closure, CompileOptions, LayoutPlan, Target,
};
use f4sp::fp_arith::{fp_add, fp_mul, mont_convert, prev_prime, Direction};
use f4sp::groebner::{
    buchberger_reference, f4_run, format_basis, is_groebner, verify_kernel_syzygy, F4Config, F4Run,
    DEFAULT_MAX_STEPS,
};
use f4sp::monomial::{count_monomials, enumerate_monomials};
use f4sp::rng::{rng_from_seed, Rng};
use f4sp::sparse_linalg::{
    csr_from_plan, dense_gauss, left_kernel, left_kernel_with, psge_reduce, CsrMatrix, KernelEngine,
    WiedemannConfig,
};
use f4sp::{Backend, Error, FieldModulus, FpElem, Monomial, Poly, Ring, SoaPolySet, TermOrder};

type Outcome = std::result::Result<String, String>;

const ORDERS: [TermOrder; 3] = [TermOrder::Grevlex, TermOrder::Deglex, TermOrder::Lex];
const BACKENDS: [Backend; 3] = [Backend::Naive, Backend::Barrett, Backend::Montgomery];
const LANES: [usize; 4] = [1, 2, 4, 8];

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T>(r: f4sp::Result<T>, what: &str) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

// ---------------------------------------------------------------- oracles

/// Term order comparison straight from the definitions.
fn oracle_cmp(order: TermOrder, a: &[u16], b: &[u16]) -> Ordering {
    let deg = |x: &[u16]| x.iter().map(|&e| e as u32).sum::<u32>();
    match order {
        TermOrder::Lex => a.cmp(b),
        TermOrder::Deglex => deg(a).cmp(&deg(b)).then_with(|| a.cmp(b)),
        TermOrder::Grevlex => deg(a).cmp(&deg(b)).then_with(|| {
            for i in (0..a.len()).rev() {
                if a[i] != b[i] {
                    return b[i].cmp(&a[i]);
                }
            }
            Ordering::Equal
        }),
    }
}

/// Exact `shift * g` without the library's polynomial arithmetic.
fn shifted_terms(g: &Poly, shift: &Monomial) -> Vec<(Vec<u16>, u64)> {
    g.terms()
        .iter()
        .map(|t| {
            let e = t.mon.exponents().iter().zip(shift.exponents()).map(|(a, b)| a + b).collect();
            (e, t.coeff)
        })
        .collect()
}

fn count_by_loops(n: u32, d: u32) -> u64 {
    fn go(vars: u32, left: u32) -> u64 {
        if vars == 0 {
            return 1;
        }
        (0..=left).map(|e| go(vars - 1, left - e)).sum()
    }
    go(n, d)
}

fn random_poly(ring: &Ring, rng: &mut Rng, max_deg: u32, max_terms: usize) -> Poly {
    let n = ring.n_vars();
    loop {
        let k = rng.gen_range(1..=max_terms);
        let terms: Vec<(Monomial, u64)> = (0..k)
            .map(|_| {
                let mut e = vec![0u16; n];
                for _ in 0..rng.gen_range(0..=max_deg) {
                    e[rng.gen_range(0..n)] += 1;
                }
                (Monomial::from_exponents(e), rng.gen_range(1..ring.p()))
            })
            .collect();
        let f = Poly::normalize(terms, ring);
        if !f.is_zero() {
            return f;
        }
    }
}

// ----------------------------------------------------------------- corpus

struct Case {
    name: String,
    sys: System,
    run: f4sp::Result<F4Run>,
    reference: f4sp::Result<Vec<Poly>>,
}

fn corpus() -> Vec<Case> {
    let mut systems: Vec<(String, f4sp::Result<System>)> = Vec::new();
    for p in [7u64, 101, 65_537] {
        for n in 2..=4 {
            systems.push((format!("cyclic-{n}/F{p}"), gen_cyclic(n, p, TermOrder::Grevlex)));
        }
        for n in 1..=3 {
            systems.push((format!("katsura-{n}/F{p}"), gen_katsura(n, p, TermOrder::Grevlex)));
        }
        for s in 0..50u64 {
            let mut rng = rng_from_seed(1000 + s);
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=4);
            let density = [0.3, 0.6, 1.0][rng.gen_range(0..3)];
            let order = ORDERS[rng.gen_range(0..3)];
            systems.push((
                format!("random-{s}(n={n},m={m})/F{p}"),
                gen_random_quadratic(n, m, density, s, p, order),
            ));
        }
    }
    let cfg = F4Config {
        keep_traces: true,
        ..Default::default()
    };
    systems
        .into_iter()
        .map(|(name, sys)| {
            let sys = sys.unwrap_or_else(|e| panic!("{name}: {e}"));
            let run = f4_run(&sys.polys, &sys.ring, &cfg);
            let reference = buchberger_reference(&sys.polys, &sys.ring, DEFAULT_MAX_STEPS);
            Case {
                name,
                sys,
                run,
                reference,
            }
        })
        .collect()
}

/// A compiled batch together with what produced it.
struct Batch {
    ring: Ring,
    polys: Vec<Poly>,
    basis: SoaPolySet,
    rows: f4sp::fbsp::RowList,
    closure: Closure,
    reducers: Option<Vec<usize>>,
    plan: LayoutPlan,
}

fn random_batches(count: u64) -> std::result::Result<Vec<Batch>, String> {
    let mut out = Vec::new();
    for s in 0..count {
        let mut rng = rng_from_seed(77_000 + s);
        let n = rng.gen_range(2..=4);
        let p = [7u64, 101, 65_537, prev_prime(1 << 31)][rng.gen_range(0..4)];
        let order = ORDERS[rng.gen_range(0..3)];
        let backend = BACKENDS[rng.gen_range(0..3)];
        let ring = ok(Ring::with_n_vars(n, order, ok(FieldModulus::new(p, backend), "modulus")?), "ring")?;
        let polys: Vec<Poly> = (0..rng.gen_range(2..=6)).map(|_| random_poly(&ring, &mut rng, 4, 6)).collect();
        let basis = SoaPolySet::pack(&polys, &ring);
        let mut targets = Vec::new();
        for id in 0..rng.gen_range(1..=4u64) {
            let i = rng.gen_range(0..polys.len());
            let j = (i + rng.gen_range(1..polys.len())) % polys.len();
            let lcm = ok(polys[i].lm().unwrap().lcm(polys[j].lm().unwrap()), "lcm")?;
            targets.push(Target {
                lcm,
                pair_id: id,
                left: i.min(j),
                right: i.max(j),
            });
        }
        let spec = BatchSpec {
            targets,
            candidates: (0..polys.len()).collect(),
            adm: Admissibility::accept_all(),
        };
        let rows = ok(select_rows(&spec, &basis, &ring, &Exec::sequential()), "select_rows")?;
        let closure = if s % 2 == 0 { Closure::OneStepReduction } else { Closure::SupportOnly };
        let reducers = (s % 5 == 1).then(|| (0..polys.len()).filter(|k| k % 2 == 0).collect());
        let opts = CompileOptions {
            reducers: reducers.clone(),
            ..Default::default()
        };
        let plan = ok(compile_batch(&rows, &basis, &ring, closure, &opts), "compile_batch")?.plan;
        out.push(Batch {
            ring,
            polys,
            basis,
            rows,
            closure,
            reducers,
            plan,
        });
    }
    Ok(out)
}

fn trace_batches(cases: &[Case]) -> Vec<Batch> {
    let mut out = Vec::new();
    for c in cases {
        let Ok(run) = &c.run else { continue };
        for t in &run.state.traces {
            out.push(Batch {
                ring: c.sys.ring.clone(),
                polys: run.state.polys().to_vec(),
                basis: run.state.basis.clone(),
                rows: t.rows.clone(),
                closure: Closure::OneStepReduction,
                reducers: Some(t.reducers.clone()),
                plan: t.plan.clone(),
            });
        }
    }
    out
}

// ------------------------------------------------------------- criteria

fn c1_backend_agreement() -> Outcome {
    let mut checked = 0u64;
    let run = |p: u64, pairs: &mut dyn Iterator<Item = (u64, u64)>, checked: &mut u64| -> Outcome {
        let ms: Vec<FieldModulus> = BACKENDS
            .iter()
            .map(|&b| FieldModulus::new(p, b))
            .collect::<f4sp::Result<_>>()
            .map_err(|e| e.to_string())?;
        let mont = &ms[2];
        for (a, b) in pairs {
            let want_mul = ((a as u128 * b as u128) % p as u128) as u64;
            let want_add = (a + b) % p;
            for m in &ms[..2] {
                let (x, y) = (FpElem::standard(a), FpElem::standard(b));
                let got_mul = ok(fp_mul(x, y, m), "mul")?.value;
                let got_add = ok(fp_add(x, y, m), "add")?.value;
                ensure!(
                    got_mul == want_mul && got_add == want_add,
                    "{} p={p} a={a} b={b}: mul {got_mul} add {got_add}",
                    m.backend().name()
                );
            }
            let enter = |v| mont_convert(FpElem::standard(v), Direction::Enter, mont);
            let (x, y) = (ok(enter(a), "enter")?, ok(enter(b), "enter")?);
            let leave = |v| mont_convert(v, Direction::Leave, mont).map(|e| e.value);
            let got_mul = ok(leave(ok(fp_mul(x, y, mont), "mul")?), "leave")?;
            let got_add = ok(leave(ok(fp_add(x, y, mont), "add")?), "leave")?;
            ensure!(
                got_mul == want_mul && got_add == want_add,
                "montgomery p={p} a={a} b={b}: mul {got_mul} add {got_add}"
            );
            *checked += 1;
        }
        Ok(String::new())
    };
    let primes: Vec<u64> = (3..=251u64).filter(|&q| f4sp::fp_arith::is_prime(q)).collect();
    for &p in &primes {
        let mut all = (0..p).flat_map(move |a| (0..p).map(move |b| (a, b)));
        run(p, &mut all, &mut checked)?;
    }
    let big = prev_prime(1 << 31);
    let mut rng = rng_from_seed(1);
    let mut random = (0..1_000_000).map(|i| match i {
        0 => (big - 1, big - 1),
        1 => (0, big - 1),
        _ => (rng.gen_range(0..big), rng.gen_range(0..big)),
    });
    run(big, &mut random, &mut checked)?;
    Ok(format!(
        "{} primes exhaustively, 10^6 pairs at p={big}, {checked} pairs x 3 backends",
        primes.len()
    ))
}

fn c2_key_order() -> Outcome {
    let mut rng = rng_from_seed(2);
    let m = ok(FieldModulus::new(101, Backend::Barrett), "modulus")?;
    let mut compared = 0u64;
    for order in ORDERS {
        for n in 2..=8 {
            let ring = ok(Ring::with_n_vars(n, order, m.clone()), "ring")?;
            // total degree <= 30, with a few wide exponents mixed in
            let draw = |rng: &mut Rng| -> Vec<u16> {
                if rng.gen_bool(0.05) {
                    return (0..n).map(|_| rng.gen_range(0..=1000)).collect();
                }
                let mut e = vec![0u16; n];
                for _ in 0..rng.gen_range(0..=30) {
                    e[rng.gen_range(0..n)] += 1;
                }
                e
            };
            for _ in 0..100_000 {
                let a = draw(&mut rng);
                // near neighbours stress the tie-breaking lanes
                let b = if rng.gen_bool(0.3) {
                    let mut b = a.clone();
                    let i = rng.gen_range(0..n);
                    let j = rng.gen_range(0..n);
                    if b[i] > 0 {
                        b[i] -= 1;
                        b[j] += 1;
                    }
                    b
                } else {
                    draw(&mut rng)
                };
                let (u, v) = (Monomial::from_exponents(a.clone()), Monomial::from_exponents(b.clone()));
                let by_key = ok(ring.pack(&u), "pack")?.cmp(&ok(ring.pack(&v), "pack")?);
                let want = oracle_cmp(order, &a, &b);
                ensure!(by_key == want, "{} n={n}: {a:?} vs {b:?}: key {by_key:?}, order {want:?}", order.name());
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} pairs over 3 orders, n=2..8, zero mismatches"))
}

fn c3_determinism(random: &[Batch], traces: &[Batch]) -> Outcome {
    for (which, set) in [("random", random), ("f4 trace", traces)] {
        for (i, b) in set.iter().enumerate() {
            let want = b.plan.to_text(b.ring.key_words());
            for lanes in LANES {
                for variant in 0..3u64 {
                    let exec = match variant {
                        0 => Exec::with_lanes(lanes),
                        _ => Exec::with_lanes(lanes).jittered(variant * 31 + i as u64),
                    };
                    let opts = CompileOptions {
                        exec,
                        shuffle_seed: (variant > 0).then_some(variant + lanes as u64),
                        reducers: b.reducers.clone(),
                        ..Default::default()
                    };
                    let again = ok(compile_batch(&b.rows, &b.basis, &b.ring, b.closure, &opts), "compile")?.plan;
                    ensure!(
                        again == b.plan && again.to_text(b.ring.key_words()) == want,
                        "{which} batch {i}: lanes={lanes} variant={variant} differs"
                    );
                }
            }
        }
    }
    Ok(format!(
        "{} random + {} trace batches identical over lanes {{1,2,4,8}}, jitter and shuffle",
        random.len(),
        traces.len()
    ))
}

fn c4_partition(batches: &[&Batch]) -> Outcome {
    for (i, b) in batches.iter().enumerate() {
        let p = &b.plan;
        let r = p.row_meta.len();
        let m = p.col_ind.len();
        ensure!(p.row_ptr.len() == r + 1, "batch {i}: row_ptr has {} entries for {r} rows", p.row_ptr.len());
        ensure!(p.row_ptr[0] == 0 && p.row_ptr[r] == m, "batch {i}: segments do not span [0, {m})");
        ensure!(p.val.len() == m && p.counters.m == m, "batch {i}: value or counter length mismatch");
        let mut covered = vec![0u8; m];
        for k in 0..r {
            let (lo, hi) = (p.row_ptr[k], p.row_ptr[k + 1]);
            ensure!(lo <= hi, "batch {i}: row {k} has a negative segment");
            for c in &mut covered[lo..hi] {
                *c += 1;
            }
        }
        ensure!(covered.iter().all(|&c| c == 1), "batch {i}: segments overlap or leave gaps");
    }
    Ok(format!("{} plans, every position of [0, M) owned by exactly one row", batches.len()))
}

fn c5_dictionary(batches: &[&Batch]) -> Outcome {
    for (i, b) in batches.iter().enumerate() {
        let (ring, p) = (&b.ring, &b.plan);
        let mut support: BTreeSet<Vec<u16>> = BTreeSet::new();
        for (k, meta) in p.row_meta.iter().enumerate() {
            let want = shifted_terms(&b.polys[meta.basis_index], &meta.shift);
            let got: Vec<(Vec<u16>, u64)> = ok(p.decode_row(k, ring), "decode")?
                .terms()
                .iter()
                .map(|t| (t.mon.exponents().to_vec(), t.coeff))
                .collect();
            ensure!(got == want, "batch {i} row {k}: decode differs from t*g");
            support.extend(want.into_iter().map(|(e, _)| e));
        }
        let mut want: Vec<Vec<u16>> = support.into_iter().collect();
        want.sort_by(|a, b| oracle_cmp(ring.order(), b, a));
        let got: Vec<Vec<u16>> = p
            .dict_keys
            .iter()
            .map(|k| ring.unpack(k).map(|u| u.exponents().to_vec()))
            .collect::<f4sp::Result<_>>()
            .map_err(|e| e.to_string())?;
        ensure!(got == want, "batch {i}: dictionary is not the sorted support union");
    }
    Ok(format!("{} plans: dictionary = support union, every row = t*g", batches.len()))
}

/// Dictionary monomials divisible by an allowed leading monomial must lead
/// some row.
fn support_closed(b: &Batch) -> bool {
    let leads: BTreeSet<Vec<u16>> = (0..b.plan.n_rows())
        .map(|k| b.ring.unpack(&b.plan.dict_keys[b.plan.leading_column(k).unwrap() as usize]).unwrap())
        .map(|u| u.exponents().to_vec())
        .collect();
    let allowed: Vec<usize> = b.reducers.clone().unwrap_or_else(|| (0..b.polys.len()).collect());
    b.plan.dict_keys.iter().all(|key| {
        let u = b.ring.unpack(key).unwrap();
        let reducible = allowed.iter().any(|&k| b.polys[k].lm().unwrap().divides(&u));
        !reducible || leads.contains(u.exponents())
    })
}

fn c6_kernel_syzygy(traces: &[Batch]) -> Outcome {
    let mut vectors = [0usize; 2];
    let mut reported = Vec::new();
    for (i, b) in traces.iter().enumerate() {
        ensure!(support_closed(b), "trace batch {i} is not support-closed");
        let a = ok(csr_from_plan(&b.plan, b.ring.modulus()), "csr")?;
        for (e, engine) in [KernelEngine::Dense, KernelEngine::Wiedemann].into_iter().enumerate() {
            let k = match left_kernel(&a, a.n_rows(), 600 + i as u64, engine) {
                Ok(k) => k,
                Err(err @ Error::ProbabilisticFailure { .. }) => {
                    reported.push(format!("batch {i}: {err}"));
                    continue;
                }
                Err(err) => return Err(format!("batch {i} {engine:?}: {err}")),
            };
            let m = b.ring.modulus();
            for v in &k.vectors {
                let mut acc: Vec<(Monomial, u64)> = Vec::new();
                for (row, &c) in v.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let meta = &b.plan.row_meta[row];
                    for (e, coeff) in shifted_terms(&b.polys[meta.basis_index], &meta.shift) {
                        acc.push((Monomial::from_exponents(e), m.mul(coeff, c)));
                    }
                }
                ensure!(
                    Poly::normalize(acc, &b.ring).is_zero(),
                    "batch {i} {engine:?}: kernel vector does not recombine to zero"
                );
            }
            let rep = ok(verify_kernel_syzygy(&b.plan, &b.basis, &k, &b.ring), "syzygy")?;
            ensure!(rep.ok(), "batch {i} {engine:?}: library syzygy check failed on {:?}", rep.failures);
            vectors[e] += k.vectors.len();
        }
    }
    for r in &reported {
        println!("  reported: {r}");
    }
    Ok(format!(
        "{} support-closed batches, {} dense + {} wiedemann kernel vectors recombine to 0, {} probabilistic failures reported",
        traces.len(),
        vectors[0],
        vectors[1],
        reported.len()
    ))
}

fn c7_end_to_end(cases: &[Case]) -> Outcome {
    for c in cases {
        let run = c.run.as_ref().map_err(|e| format!("{}: f4: {e}", c.name))?;
        let reference = c.reference.as_ref().map_err(|e| format!("{}: reference: {e}", c.name))?;
        let (a, b) = (format_basis(&run.basis, &c.sys.ring), format_basis(reference, &c.sys.ring));
        ensure!(a == b, "{}: f4 and reference bases differ\n{a}---\n{b}", c.name);
        let check = ok(is_groebner(&run.basis, &c.sys.ring), "is_groebner")?;
        ensure!(check.ok, "{}: is_groebner failed", c.name);
    }
    Ok(format!("{} systems over p in {{7,101,65537}}: byte-equal bases, all Groebner", cases.len()))
}

fn random_sparse(rows: usize, cols: usize, density: f64, p: u64, rng: &mut Rng) -> Vec<Vec<u64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(density) { rng.gen_range(1..p) } else { 0 })
                .collect()
        })
        .collect()
}

fn c8_rank() -> Outcome {
    let m = ok(FieldModulus::new(65_521, Backend::Barrett), "modulus")?;
    let mut rng = rng_from_seed(8);
    let densities = [0.01, 0.05, 0.2];
    for t in 0..200 {
        let (r, c) = (rng.gen_range(1..=200), rng.gen_range(1..=200));
        let d = densities[t % 3];
        let dense = random_sparse(r, c, d, m.p(), &mut rng);
        let a = ok(CsrMatrix::from_dense(&dense, c, m.clone()), "csr")?;
        let pw = [1, 8, 64, 256][t % 4];
        let got = ok(psge_reduce(&a, pw), "psge")?.rank;
        let want = ok(dense_gauss(&dense, c, &m), "dense")?.rank;
        ensure!(got == want, "matrix {t} ({r}x{c}, density {d}): psge rank {got}, dense rank {want}");
    }

    let (mut trials, mut successes) = (0usize, 0usize);
    let mut log = Vec::new();
    for inst in 0..50 {
        let n = rng.gen_range(10..=120);
        let base = rng.gen_range(n / 3..n);
        let mut rows = random_sparse(base, n, 0.06, m.p(), &mut rng);
        while rows.len() < n {
            let mut combo = vec![0u64; n];
            for _ in 0..rng.gen_range(1..=3) {
                let (src, c) = (rng.gen_range(0..base), rng.gen_range(1..m.p()));
                for (x, &y) in combo.iter_mut().zip(&rows[src]) {
                    *x = m.add(*x, m.mul(c, y));
                }
            }
            rows.push(combo);
        }
        rows.shuffle(&mut rng);
        let a = ok(CsrMatrix::from_dense(&rows, n, m.clone()), "csr")?;
        let nullity = n - ok(dense_gauss(&rows, n, &m), "dense")?.rank;
        ensure!(nullity > 0, "instance {inst} is not singular");
        for s in 0..4u64 {
            trials += 1;
            let cfg = WiedemannConfig::new(inst as u64 * 100 + s);
            match left_kernel_with(&a, n, KernelEngine::Wiedemann, &cfg) {
                Ok(k) if k.dimension_found == nullity => successes += 1,
                Ok(k) => log.push(format!("instance {inst} seed {s}: found {} of {nullity}", k.dimension_found)),
                Err(e) => log.push(format!("instance {inst} seed {s}: {e}")),
            }
        }
    }
    for l in &log {
        println!("  wiedemann trial failure: {l}");
    }
    let rate = successes as f64 / trials as f64;
    ensure!(rate >= 0.99, "wiedemann nullity success {successes}/{trials} below 99%");
    Ok(format!(
        "200 psge/dense ranks equal; wiedemann nullity {successes}/{trials} trials on 50 singular matrices"
    ))
}

fn c9_counters(cases: &[Case]) -> Outcome {
    for n in 1..=4u32 {
        for d in 0..=6u32 {
            let formula = count_monomials(n, d);
            let listed = enumerate_monomials(n as usize, d).len() as u64;
            let loops = count_by_loops(n, d);
            ensure!(
                formula == loops.into() && listed == loops,
                "n={n} d={d}: formula {formula}, enumeration {listed}, loops {loops}"
            );
        }
    }
    let mut batches = 0;
    for c in cases {
        let Ok(run) = &c.run else { continue };
        for (t, rec) in run.state.traces.iter().zip(&run.state.stats) {
            let sum: usize = (0..t.plan.n_rows()).map(|k| t.plan.row_ptr[k + 1] - t.plan.row_ptr[k]).sum();
            ensure!(
                rec.m == sum && rec.keys_generated == sum,
                "{}: M={} sum={} keys_generated={}",
                c.name,
                rec.m,
                sum,
                rec.keys_generated
            );
            batches += 1;
        }
        if let Some(f) = &run.final_stats {
            ensure!(f.m == f.keys_generated, "{}: final batch M != keys_generated", c.name);
        }
    }
    Ok(format!("counts agree for n<=4, d<=6; M = sum of row lengths = keys generated on {batches} batches"))
}

fn c10_protocol() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_f4sp");
    let dir = std::env::temp_dir().join(format!("f4sp-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut digests = Vec::new();
    for workers in LANES {
        let report = dir.join(format!("report-{workers}.txt"));
        let out = Command::new(exe)
            .args(["bench", "--family", "cyclic", "--n", "4", "--p", "101", "--workers"])
            .arg(workers.to_string())
            .arg("--report")
            .arg(&report)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "bench exited with {:?}", out.status.code());
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        for section in ["[instance]", "[config]", "[env]", "[totals]", "[batches]", "[result]"] {
            ensure!(text.contains(section), "text report lacks {section}");
        }
        let flat = std::fs::read_to_string(report.with_extension("txt.kv")).map_err(|e| e.to_string())?;
        let get = |k: &str| {
            flat.lines()
                .find_map(|l| l.strip_prefix(k).and_then(|r| r.strip_prefix('=')))
                .map(str::to_string)
        };
        for key in [
            "instance.family",
            "instance.p",
            "config.engine",
            "config.numeric",
            "config.backend",
            "env.version",
            "env.workers",
            "totals.N_max",
            "totals.M",
            "totals.nnz",
            "totals.fill_generated",
            "totals.DictBuild_ns",
            "totals.RowAssemble_ns",
            "totals.NumericCore_ns",
            "batch.0.N",
            "batch.0.M",
            "batch.0.nnz",
            "batch.0.fill",
            "batch.0.DictBuild_ns",
            "batch.0.RowAssemble_ns",
            "batch.0.NumericCore_ns",
            "result.digest",
        ] {
            ensure!(get(key).is_some(), "flat report lacks {key}");
        }
        ensure!(get("env.workers").as_deref() == Some(&*workers.to_string()), "workers not recorded");
        let digest = get("result.digest").unwrap();
        ensure!(digest.len() == 64 && digest.bytes().all(|b| b.is_ascii_hexdigit()), "bad digest {digest}");
        digests.push(digest);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure!(digests.windows(2).all(|w| w[0] == w[1]), "digests differ across workers: {digests:?}");
    Ok(format!("all fields present; digest {}... stable for 1/2/4/8 workers", &digests[0][..16]))
}

// ------------------------------------------------------------------ main

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS criterion {id:>2} {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name} ({secs:.1}s): {why}");
            }
        }
    };

    let t0 = Instant::now();
    let cases = corpus();
    let traces = trace_batches(&cases);
    let random = random_batches(100);
    println!(
        "corpus: {} systems, {} trace batches, built in {:.1}s",
        cases.len(),
        traces.len(),
        t0.elapsed().as_secs_f64()
    );
    let random_ok = random.as_ref().map(|v| v.as_slice()).map_err(Clone::clone);
    let all = || -> std::result::Result<Vec<&Batch>, String> { Ok(random_ok.clone()?.iter().chain(&traces).collect()) };

    report(1, "backend agreement", &mut c1_backend_agreement);
    report(2, "key order refinement", &mut c2_key_order);
    report(3, "compile determinism", &mut || c3_determinism(random_ok.clone()?, &traces));
    report(4, "row segments partition", &mut || c4_partition(&all()?));
    report(5, "dictionary and rows", &mut || c5_dictionary(&all()?));
    report(6, "kernel syzygy", &mut || c6_kernel_syzygy(&traces));
    report(7, "f4 equals reference", &mut || c7_end_to_end(&cases));
    report(8, "rank agreement", &mut c8_rank);
    report(9, "counter fidelity", &mut || c9_counters(&cases));
    report(10, "bench protocol", &mut c10_protocol);

    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
