//! Benchmark families, system files, pipeline runs and reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;
use sha2::{Digest, Sha256};

use crate::bulk::{self, Exec, KeyStream};
use crate::fp_arith::{fma_accumulate, fma_finish, mont_convert, Backend, Direction, FieldModulus, FpElem};
use crate::groebner::{self, BatchRecord, F4Config, Numeric};
use crate::monomial::{enumerate_monomials, MonKey, Monomial, Ring, TermOrder};
use crate::poly::Poly;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Retries for a random polynomial that came out zero.
const REDRAW_LIMIT: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub ring: Ring,
    pub polys: Vec<Poly>,
}

impl System {
    /// The system-file text: `p`, `vars`, `order` header, then one
    /// polynomial per line.
    pub fn to_text(&self) -> String {
        let mut s = system_header(&self.ring);
        for f in &self.polys {
            s.push_str(&f.format(&self.ring));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str, backend: Backend) -> Result<System> {
        parse_system(text, backend)
    }
}

pub fn system_header(ring: &Ring) -> String {
    format!(
        "p {}\nvars {}\norder {}\n",
        ring.p(),
        ring.var_names().join(" "),
        ring.order().name()
    )
}

pub fn parse_system(text: &str, backend: Backend) -> Result<System> {
    let bad = |line: usize, msg: &str| Error::SystemFile {
        line,
        msg: msg.to_string(),
    };
    let mut lines = text.split('\n').enumerate().map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        (i + 1, l.trim_end_matches('\r'))
    });
    let mut header = |key: &str| -> Result<String> {
        let (no, line) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim().to_string()),
            _ => Err(bad(no, &format!("expected `{key} ...`"))),
        }
    };
    let p: u64 = header("p")?.parse().map_err(|_| bad(1, "bad prime"))?;
    let vars: Vec<String> = header("vars")?.split_whitespace().map(str::to_string).collect();
    let order = TermOrder::from_str(&header("order")?).map_err(|_| bad(3, "unknown order"))?;
    let modulus = FieldModulus::new(p, backend)?;
    let ring = Ring::new(vars, order, modulus)?;
    let mut polys = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f = Poly::parse(line, &ring).map_err(|e| match e {
            Error::Parse { pos, msg } => bad(no, &format!("byte {pos}: {msg}")),
            Error::UnknownVariable { name, pos } => {
                bad(no, &format!("byte {pos}: unknown variable `{name}`"))
            }
            other => other,
        })?;
        polys.push(f);
    }
    Ok(System { ring, polys })
}

fn var_names(n: usize) -> Vec<String> {
    if n <= 3 {
        ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

fn make_ring(names: Vec<String>, p: u64, order: TermOrder) -> Result<Ring> {
    Ring::new(names, order, FieldModulus::new(p, Backend::default())?)
}

/// Cyclic-n: `Σ_i x_i ⋯ x_{i+k-1}` for `k = 1..n-1` (indices mod n), then
/// `x_1 ⋯ x_n - 1`.
pub fn gen_cyclic(n: usize, p: u64, order: TermOrder) -> Result<System> {
    if n < 2 {
        return Err(Error::Precondition("cyclic needs n >= 2".into()));
    }
    let ring = make_ring(var_names(n), p, order)?;
    let mut polys = Vec::with_capacity(n);
    for k in 1..n {
        let terms = (0..n)
            .map(|i| {
                let mut e = vec![0u32; n];
                for j in 0..k {
                    e[(i + j) % n] += 1;
                }
                (Monomial::new(&e).unwrap(), 1)
            })
            .collect();
        polys.push(Poly::normalize(terms, &ring));
    }
    let all = Monomial::new(&vec![1; n])?;
    polys.push(Poly::normalize(vec![(all, 1), (ring.one(), p - 1)], &ring));
    Ok(System { ring, polys })
}

/// Katsura-n over `x_0..x_n`.
pub fn gen_katsura(n: usize, p: u64, order: TermOrder) -> Result<System> {
    if n < 1 {
        return Err(Error::Precondition("katsura needs n >= 1".into()));
    }
    let nv = n + 1;
    let ring = make_ring((0..nv).map(|i| format!("x{i}")).collect(), p, order)?;
    let m = *ring.modulus();
    let var = |i: usize| ring.var(i);
    let mut polys = Vec::with_capacity(nv);
    let mut lin = vec![(var(0), 1u64), (ring.one(), p - 1)];
    lin.extend((1..nv).map(|i| (var(i), 2 % p)));
    polys.push(Poly::normalize(lin, &ring));
    for k in 0..n as i64 {
        let mut terms = Vec::new();
        for i in -(n as i64)..=(n as i64) {
            let (a, b) = (i.unsigned_abs() as usize, (k - i).unsigned_abs() as usize);
            if b > n {
                continue;
            }
            terms.push((var(a).mul(&var(b))?, 1));
        }
        terms.push((var(k as usize), m.neg(1)));
        polys.push(Poly::normalize(terms, &ring));
    }
    Ok(System { ring, polys })
}

/// Random polynomials of degree at most 2: each monomial appears with
/// probability `density`, with a uniform nonzero coefficient.
pub fn gen_random_quadratic(
    n: usize,
    m: usize,
    density: f64,
    seed: u64,
    p: u64,
    order: TermOrder,
) -> Result<System> {
    if !(density > 0.0 && density <= 1.0) || n == 0 || m == 0 {
        return Err(Error::Precondition("need n, m >= 1 and density in (0, 1]".into()));
    }
    let ring = make_ring(var_names(n), p, order)?;
    let support = enumerate_monomials(n, 2);
    let mut polys = Vec::with_capacity(m);
    for j in 0..m as u64 {
        let mut f = Poly::zero();
        for attempt in 0..REDRAW_LIMIT {
            let mut rng = rng_from_seed(derive_seed(seed, j * REDRAW_LIMIT + attempt));
            let mut terms = Vec::new();
            for u in &support {
                if rng.gen_bool(density) {
                    terms.push((u.clone(), rng.gen_range(1..p)));
                }
            }
            f = Poly::normalize(terms, &ring);
            if !f.is_zero() {
                break;
            }
        }
        if f.is_zero() {
            return Err(Error::Precondition("random polynomial stayed zero".into()));
        }
        polys.push(f);
    }
    Ok(System { ring, polys })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    F4,
    Buchberger,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::F4 => "f4",
            Engine::Buchberger => "buchberger",
        }
    }
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f4" => Ok(Engine::F4),
            "buchberger" => Ok(Engine::Buchberger),
            _ => Err(Error::Precondition(format!("unknown engine `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub engine: Engine,
    pub numeric: Numeric,
    pub panel_width: usize,
    pub block_width: usize,
    pub backend: Backend,
    pub seed: u64,
    pub workers: usize,
    pub max_steps: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            engine: Engine::F4,
            numeric: Numeric::Psge,
            panel_width: crate::sparse_linalg::DEFAULT_PANEL_WIDTH,
            block_width: crate::sparse_linalg::DEFAULT_BLOCK_WIDTH,
            backend: Backend::default(),
            seed: 0,
            workers: 1,
            max_steps: groebner::DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub family: String,
    pub params: String,
    pub p: u64,
    pub order: TermOrder,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Totals {
    pub batches: usize,
    pub r: usize,
    pub m: usize,
    pub nnz: usize,
    pub max_n: usize,
    pub keys_generated: usize,
    pub fill_generated: usize,
    pub dict_build_ns: u64,
    pub row_assemble_ns: u64,
    pub numeric_core_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchReport {
    pub instance: Instance,
    pub engine: Engine,
    pub numeric: Numeric,
    pub backend: Backend,
    pub panel_width: usize,
    pub block_width: usize,
    /// Per batch, including the final interreduction batch for F4.
    pub batches: Vec<BatchRecord>,
    pub totals: Totals,
    pub version: String,
    pub workers: usize,
    pub basis_size: usize,
    /// SHA-256 of the reduced basis text.
    pub digest: String,
}

/// Every key of the flat report that must be present.
pub const REQUIRED_FIELDS: &[&str] = &[
    "instance.family",
    "instance.params",
    "instance.p",
    "instance.order",
    "instance.seed",
    "config.engine",
    "config.numeric",
    "config.backend",
    "env.version",
    "env.workers",
    "totals.batches",
    "totals.N_max",
    "totals.M",
    "totals.nnz",
    "totals.keys_generated",
    "totals.DictBuild_ns",
    "totals.RowAssemble_ns",
    "totals.NumericCore_ns",
    "result.basis_size",
    "result.digest",
];

const BATCH_COLUMNS: &[&str] = &[
    "degree",
    "pairs",
    "r",
    "N",
    "M",
    "nnz",
    "rank",
    "new",
    "zero",
    "fill",
    "DictBuild_ns",
    "RowAssemble_ns",
    "NumericCore_ns",
];

fn batch_values(b: &BatchRecord) -> [u64; 13] {
    [
        b.degree as u64,
        b.pairs as u64,
        b.r as u64,
        b.n as u64,
        b.m as u64,
        b.nnz as u64,
        b.rank as u64,
        b.new_polys as u64,
        b.zero_reductions as u64,
        b.fill_generated as u64,
        b.timings.dict_build_ns,
        b.timings.row_assemble_ns,
        b.timings.numeric_core_ns,
    ]
}

impl BenchReport {
    fn reports_fill(&self) -> bool {
        self.engine == Engine::F4 && self.numeric != Numeric::Dense
    }

    /// Flat `key=value` lines.
    pub fn to_flat(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("instance.family", &self.instance.family);
        kv("instance.params", &self.instance.params);
        kv("instance.p", &self.instance.p);
        kv("instance.order", &self.instance.order.name());
        kv("instance.seed", &self.instance.seed);
        kv("config.engine", &self.engine.name());
        kv("config.numeric", &self.numeric.name());
        kv("config.backend", &self.backend.name());
        kv("config.panel_width", &self.panel_width);
        kv("config.block_width", &self.block_width);
        kv("env.version", &self.version);
        kv("env.workers", &self.workers);
        let t = &self.totals;
        kv("totals.batches", &t.batches);
        kv("totals.r", &t.r);
        kv("totals.N_max", &t.max_n);
        kv("totals.M", &t.m);
        kv("totals.nnz", &t.nnz);
        kv("totals.keys_generated", &t.keys_generated);
        if self.reports_fill() {
            kv("totals.fill_generated", &t.fill_generated);
        }
        kv("totals.DictBuild_ns", &t.dict_build_ns);
        kv("totals.RowAssemble_ns", &t.row_assemble_ns);
        kv("totals.NumericCore_ns", &t.numeric_core_ns);
        for (i, b) in self.batches.iter().enumerate() {
            for (name, v) in BATCH_COLUMNS.iter().zip(batch_values(b)) {
                if *name == "fill" && !self.reports_fill() {
                    continue;
                }
                kv(&format!("batch.{i}.{name}"), &v);
            }
        }
        kv("result.basis_size", &self.basis_size);
        kv("result.digest", &self.digest);
        s
    }

    /// Sectioned text report with a batch table.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# f4sp bench report\n");
        let flat = self.to_flat();
        let mut section = "";
        for line in flat.lines().filter(|l| !l.starts_with("batch.")) {
            let (k, v) = line.split_once('=').unwrap();
            let (sec, key) = k.split_once('.').unwrap();
            if sec != section {
                if sec == "result" {
                    self.write_batch_table(&mut s);
                }
                let _ = writeln!(s, "\n[{sec}]");
                section = sec;
            }
            let _ = writeln!(s, "{key:<16} {v}");
        }
        s
    }

    fn write_batch_table(&self, s: &mut String) {
        let _ = writeln!(s, "\n[batches]");
        let cols: Vec<&str> = BATCH_COLUMNS
            .iter()
            .copied()
            .filter(|c| *c != "fill" || self.reports_fill())
            .collect();
        let _ = writeln!(s, "{:>5} {}", "batch", cols.iter().map(|c| format!("{c:>14}")).collect::<String>());
        for (i, b) in self.batches.iter().enumerate() {
            let vals: String = BATCH_COLUMNS
                .iter()
                .zip(batch_values(b))
                .filter(|(c, _)| **c != "fill" || self.reports_fill())
                .map(|(_, v)| format!("{v:>14}"))
                .collect();
            let _ = writeln!(s, "{i:>5} {vals}");
        }
    }
}

/// Parses the flat report back into key-value pairs.
pub fn parse_flat_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn digest_basis(basis_text: &str) -> String {
    hex::encode(Sha256::digest(basis_text.as_bytes()))
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: BenchReport,
    pub basis: Vec<Poly>,
    pub ring: Ring,
    /// Header plus one polynomial per line; parses as a system file.
    pub basis_file: String,
}

pub fn run_pipeline(system: &System, instance: Instance, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let ring = system
        .ring
        .with_modulus(FieldModulus::new(system.ring.p(), cfg.backend)?);
    let exec = Exec::with_lanes(cfg.workers.max(1));
    let (basis, batches) = match cfg.engine {
        Engine::F4 => {
            let f4 = F4Config {
                numeric: cfg.numeric,
                panel_width: cfg.panel_width,
                block_width: cfg.block_width,
                seed: cfg.seed,
                exec,
                max_steps: cfg.max_steps,
                keep_traces: false,
            };
            let run = groebner::f4_run(&system.polys, &ring, &f4)?;
            let mut batches = run.state.stats.clone();
            batches.extend(run.final_stats);
            (run.basis, batches)
        }
        Engine::Buchberger => (
            groebner::buchberger_reference(&system.polys, &ring, cfg.max_steps)?,
            Vec::new(),
        ),
    };
    let mut totals = Totals {
        batches: batches.len(),
        ..Default::default()
    };
    for b in &batches {
        totals.r += b.r;
        totals.m += b.m;
        totals.nnz += b.nnz;
        totals.max_n = totals.max_n.max(b.n);
        totals.keys_generated += b.keys_generated;
        totals.fill_generated += b.fill_generated;
        totals.dict_build_ns += b.timings.dict_build_ns;
        totals.row_assemble_ns += b.timings.row_assemble_ns;
        totals.numeric_core_ns += b.timings.numeric_core_ns;
    }
    let text = groebner::format_basis(&basis, &ring);
    let report = BenchReport {
        instance,
        engine: cfg.engine,
        numeric: cfg.numeric,
        backend: cfg.backend,
        panel_width: cfg.panel_width,
        block_width: cfg.block_width,
        batches,
        totals,
        version: env!("CARGO_PKG_VERSION").to_string(),
        workers: cfg.workers.max(1),
        basis_size: basis.len(),
        digest: digest_basis(&text),
    };
    Ok(PipelineOutput {
        basis_file: system_header(&ring) + &text,
        report,
        basis,
        ring,
    })
}

/// Process exit code for an error: 2 input, 3 caps and probabilistic
/// budgets, 4 anything internal.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::UnknownVariable { .. }
        | Error::SystemFile { .. }
        | Error::InvalidModulus(_)
        | Error::InvalidRing(_)
        | Error::ArityMismatch { .. }
        | Error::LaneOverflow
        | Error::ZeroPolynomial
        | Error::Io(_) => 2,
        Error::StepCap(_)
        | Error::DictionaryCap(_)
        | Error::DenseCap { .. }
        | Error::ProbabilisticFailure { .. } => 3,
        _ => 4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MicroKind {
    DictBuild,
    RowAssemble,
    ModFma,
}

impl FromStr for MicroKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dict_build" => Ok(MicroKind::DictBuild),
            "row_assemble" => Ok(MicroKind::RowAssemble),
            "mod_fma" => Ok(MicroKind::ModFma),
            _ => Err(Error::Precondition(format!("unknown microbenchmark `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroReport {
    pub kind: String,
    pub size: usize,
    pub items: usize,
    pub output_len: usize,
    pub radix_passes: usize,
    pub elapsed_ns: u64,
    /// Keys/s or updates/s.
    pub throughput: f64,
    /// Output matched the oracle.
    pub validated: bool,
}

impl MicroReport {
    pub fn to_flat(&self) -> String {
        format!(
            "kind={}\nsize={}\nitems={}\noutput_len={}\nradix_passes={}\nelapsed_ns={}\nthroughput={:.1}\nvalidated={}\n",
            self.kind,
            self.size,
            self.items,
            self.output_len,
            self.radix_passes,
            self.elapsed_ns,
            self.throughput,
            self.validated
        )
    }
}

const MICRO_VARS: usize = 8;

fn key_pool(distinct: usize, ring: &Ring, rng: &mut crate::rng::Rng) -> Vec<MonKey> {
    let mut seen = BTreeSet::new();
    while seen.len() < distinct {
        let e: Vec<u32> = (0..MICRO_VARS).map(|_| rng.gen_range(0..12)).collect();
        seen.insert(ring.pack(&Monomial::new(&e).unwrap()).unwrap());
    }
    seen.into_iter().collect()
}

fn rate(items: usize, ns: u64) -> f64 {
    items as f64 / (ns.max(1) as f64 * 1e-9)
}

/// Times one isolated kernel on synthetic input after checking its output.
/// `mod_fma` yields one report per backend.
pub fn microbench(
    kind: MicroKind,
    size: usize,
    duplicate_rate: f64,
    seed: u64,
    exec: &Exec,
) -> Result<Vec<MicroReport>> {
    if size == 0 || !(0.0..=1.0).contains(&duplicate_rate) {
        return Err(Error::Precondition("size >= 1 and duplicate rate in [0, 1]".into()));
    }
    let mut rng = rng_from_seed(seed);
    let ring = Ring::with_n_vars(MICRO_VARS, TermOrder::Grevlex, FieldModulus::new(65521, Backend::Barrett)?)?;
    let width = ring.key_words();
    let distinct = ((size as f64 * (1.0 - duplicate_rate)).round() as usize).clamp(1, size);
    match kind {
        MicroKind::DictBuild => {
            let pool = key_pool(distinct, &ring, &mut rng);
            let mut keys: Vec<MonKey> = pool.clone();
            keys.extend((distinct..size).map(|_| *pool.choose(&mut rng).unwrap()));
            keys.shuffle(&mut rng);
            let stream = KeyStream::new(width, keys);
            let t = Instant::now();
            let (sorted, stats) = bulk::radix_sort(&stream, exec);
            let (uniq, _) = bulk::unique_sorted(&sorted, exec)?;
            let ns = t.elapsed().as_nanos() as u64;
            let validated = uniq.keys == pool;
            Ok(vec![MicroReport {
                kind: "dict_build".into(),
                size,
                items: size,
                output_len: uniq.len(),
                radix_passes: stats.passes,
                elapsed_ns: ns,
                throughput: rate(size, ns),
                validated,
            }])
        }
        MicroKind::RowAssemble => {
            let dict = key_pool(distinct, &ring, &mut rng);
            let buckets = [4usize, 16, 64, 256];
            let mut rows: Vec<Vec<MonKey>> = Vec::new();
            let mut total = 0;
            while total < size {
                let len = buckets[rows.len() % buckets.len()].min(dict.len()).min(size - total);
                let mut r: Vec<MonKey> = dict.choose_multiple(&mut rng, len).copied().collect();
                r.sort_unstable();
                total += r.len();
                rows.push(r);
            }
            let t = Instant::now();
            let mut out = Vec::with_capacity(rows.len());
            for r in &rows {
                out.push(bulk::merge_join_index(r, &dict, exec)?);
            }
            let ns = t.elapsed().as_nanos() as u64;
            let validated = rows.iter().zip(&out).all(|(r, idx)| {
                r.iter().zip(idx).all(|(k, &i)| dict.binary_search(k) == Ok(i))
            });
            Ok(vec![MicroReport {
                kind: "row_assemble".into(),
                size,
                items: total,
                output_len: dict.len(),
                radix_passes: 0,
                elapsed_ns: ns,
                throughput: rate(total, ns),
                validated,
            }])
        }
        MicroKind::ModFma => {
            let p = crate::fp_arith::prev_prime(1 << 31);
            let a: Vec<u64> = (0..size).map(|_| rng.gen_range(0..p)).collect();
            let b: Vec<u64> = (0..size).map(|_| rng.gen_range(0..p)).collect();
            let naive = FieldModulus::new(p, Backend::Naive)?;
            let expect = a.iter().zip(&b).fold(0, |s, (&x, &y)| naive.add(s, naive.mul(x, y)));
            let mut reports = Vec::new();
            for backend in Backend::ALL {
                let m = FieldModulus::new(p, backend)?;
                let lift = |x: u64| -> Result<FpElem> {
                    let e = FpElem::standard(x);
                    match backend {
                        Backend::Montgomery => mont_convert(e, Direction::Enter, &m),
                        _ => Ok(e),
                    }
                };
                let av = a.iter().map(|&x| lift(x)).collect::<Result<Vec<_>>>()?;
                let bv = b.iter().map(|&x| lift(x)).collect::<Result<Vec<_>>>()?;
                let t = Instant::now();
                let (mut acc, mut count) = (0u64, 0u32);
                for (x, y) in av.iter().zip(&bv) {
                    (acc, count) = fma_accumulate(acc, *x, *y, count, &m)?;
                }
                let mut got = fma_finish(acc, &m);
                let ns = t.elapsed().as_nanos() as u64;
                if backend == Backend::Montgomery {
                    got = mont_convert(got, Direction::Leave, &m)?;
                }
                reports.push(MicroReport {
                    kind: format!("mod_fma.{}", backend.name()),
                    size,
                    items: size,
                    output_len: 1,
                    radix_passes: 0,
                    elapsed_ns: ns,
                    throughput: rate(size, ns),
                    validated: got.value == expect,
                });
            }
            Ok(reports)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, r: &Ring) -> Poly {
        Poly::parse(s, r).unwrap()
    }

    #[test]
    fn cyclic_instances() {
        let s = gen_cyclic(2, 101, TermOrder::Grevlex).unwrap();
        assert_eq!(s.polys, vec![p("x + y", &s.ring), p("x*y - 1", &s.ring)]);
        let s = gen_cyclic(3, 101, TermOrder::Grevlex).unwrap();
        let r = &s.ring;
        assert_eq!(s.polys, vec![p("x + y + z", r), p("x*y + y*z + z*x", r), p("x*y*z - 1", r)]);
        let s = gen_cyclic(5, 101, TermOrder::Grevlex).unwrap();
        let degs: Vec<u32> = s.polys.iter().map(|f| f.lm().unwrap().degree()).collect();
        assert_eq!(degs, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn katsura_one() {
        let s = gen_katsura(1, 101, TermOrder::Grevlex).unwrap();
        let r = &s.ring;
        assert_eq!(s.polys, vec![p("x0 + 2*x1 - 1", r), p("x0^2 + 2*x1^2 - x0", r)]);
        assert_eq!(gen_katsura(3, 101, TermOrder::Grevlex).unwrap().polys.len(), 4);
    }

    #[test]
    fn random_quadratic_density_and_seed() {
        let s = gen_random_quadratic(3, 2, 1.0, 5, 101, TermOrder::Grevlex).unwrap();
        assert!(s.polys.iter().all(|f| f.len() == 10));
        let again = gen_random_quadratic(3, 2, 1.0, 5, 101, TermOrder::Grevlex).unwrap();
        assert_eq!(s, again);
        let other = gen_random_quadratic(3, 2, 0.5, 6, 101, TermOrder::Grevlex).unwrap();
        let mine = gen_random_quadratic(3, 2, 0.5, 5, 101, TermOrder::Grevlex).unwrap();
        assert_ne!(digest_basis(&other.to_text()), digest_basis(&mine.to_text()));
    }

    #[test]
    fn system_file_round_trip_and_errors() {
        let s = gen_cyclic(3, 101, TermOrder::Grevlex).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("p 101\nvars x y z\norder grevlex\n"));
        assert_eq!(parse_system(&text, Backend::Barrett).unwrap(), s);
        let commented = text.replace("x*y*z", "# note\nx*y*z");
        assert_eq!(parse_system(&commented, Backend::Barrett).unwrap(), s);
        let bad = parse_system("p 101\nvars x y\norder grevlex\nx + w\n", Backend::Barrett).unwrap_err();
        assert_eq!(exit_code(&bad), 2);
        assert!(matches!(bad, Error::SystemFile { line: 4, .. }));
        assert_eq!(exit_code(&parse_system("p 100\nvars x\norder lex\n", Backend::Barrett).unwrap_err()), 2);
    }

    #[test]
    fn pipeline_report_fields() {
        let s = gen_cyclic(3, 101, TermOrder::Grevlex).unwrap();
        let inst = Instance {
            family: "cyclic".into(),
            params: "n=3".into(),
            p: 101,
            order: TermOrder::Grevlex,
            seed: 0,
        };
        let out = run_pipeline(&s, inst.clone(), &PipelineConfig::default()).unwrap();
        let flat = out.report.to_flat();
        let keys: BTreeSet<String> = parse_flat_report(&flat).into_iter().map(|(k, _)| k).collect();
        for f in REQUIRED_FIELDS {
            assert!(keys.contains(*f), "{f}");
        }
        assert!(keys.contains("totals.fill_generated"));
        let sum: usize = out.report.batches.iter().map(|b| b.m).sum();
        assert_eq!(out.report.totals.m, sum);
        assert_eq!(out.report.totals.keys_generated, sum);
        let reference = run_pipeline(
            &s,
            inst,
            &PipelineConfig {
                engine: Engine::Buchberger,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(reference.report.digest, out.report.digest);
        let text = out.report.to_text();
        assert!(text.contains("[batches]") && text.contains("DictBuild_ns"));
        let back = parse_system(&out.basis_file, Backend::Barrett).unwrap();
        assert_eq!(back.polys, out.basis);
    }

    #[test]
    fn microbench_examples() {
        let exec = Exec::sequential();
        let r = microbench(MicroKind::DictBuild, 1000, 1.0, 1, &exec).unwrap();
        assert_eq!(r[0].output_len, 1);
        assert!(r[0].validated);
        let r = microbench(MicroKind::RowAssemble, 2000, 0.5, 1, &exec).unwrap();
        assert!(r[0].validated);
        let r = microbench(MicroKind::ModFma, 5000, 0.0, 1, &exec).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|x| x.validated));
    }
}
