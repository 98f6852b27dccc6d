//! Symbolic preprocessing compiled to a static sparse layout.
//!
//! A batch of shifted reducers `(t_i, g_{k_i})` becomes a write-once plan:
//!
//! 1. **count**: `len[i] = |supp(g_{k_i})|`, then `row_ptr = scan(len)`;
//! 2. **fill**: each row writes the keys of `t_i * m` for the monomials `m`
//!    of `g_{k_i}`, plus the coefficients, into its own segment;
//! 3. **dictionary**: radix sort + unique over all row keys;
//! 4. **closure** (optional): rows `(m / LM(g), g)` are added for dictionary
//!    monomials divisible by a basis leading monomial, repeating 2-3 for the
//!    new rows until nothing changes;
//! 5. **join**: each row segment is merged against the dictionary to get its
//!    column indices.
//!
//! Column 0 is the greatest monomial. Every step writes disjoint, precomputed
//! ranges, so the plan is identical for any lane count or row processing
//! order.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;

use crate::bulk::{self, Exec, KeyStream};
use crate::monomial::{MonKey, Monomial, Ring, MAX_KEY_WORDS};
use crate::poly::{Poly, SoaPolySet, Term};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Abort closure once the dictionary grows past this many monomials.
pub const DEFAULT_DICT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowRole {
    SPolyHalf,
    Reducer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    /// Critical pair id.
    Pair(u64),
    /// Closure round (1-based).
    Closure(u32),
}

/// One shifted reducer `shift * g[basis_index]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowSpec {
    pub shift: Monomial,
    pub basis_index: usize,
    pub role: RowRole,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowList {
    pub rows: Vec<RowSpec>,
}

impl RowList {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A critical-pair target: the lcm of the leading monomials of
/// `basis[left]` and `basis[right]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub lcm: Monomial,
    pub pair_id: u64,
    pub left: usize,
    pub right: usize,
}

type AdmFn = dyn Fn(&Monomial, usize, &RowSpec) -> bool + Send + Sync;

/// Admissibility predicate over `(shift, basis index, row metadata)`.
#[derive(Clone)]
pub struct Admissibility(Option<Arc<AdmFn>>);

impl Admissibility {
    pub fn accept_all() -> Self {
        Admissibility(None)
    }

    pub fn new(f: impl Fn(&Monomial, usize, &RowSpec) -> bool + Send + Sync + 'static) -> Self {
        Admissibility(Some(Arc::new(f)))
    }

    pub fn admits(&self, row: &RowSpec) -> bool {
        match &self.0 {
            None => true,
            Some(f) => f(&row.shift, row.basis_index, row),
        }
    }
}

impl Default for Admissibility {
    fn default() -> Self {
        Admissibility::accept_all()
    }
}

impl std::fmt::Debug for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            None => write!(f, "Admissibility(accept-all)"),
            Some(_) => write!(f, "Admissibility(custom)"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BatchSpec {
    pub targets: Vec<Target>,
    pub candidates: Vec<usize>,
    pub adm: Admissibility,
}

/// Basis leading monomials ordered for reducer selection: smallest leading
/// monomial first, ties by lowest basis index.
#[derive(Debug, Clone)]
pub struct ReducerIndex {
    entries: Vec<(MonKey, usize, Monomial)>,
}

impl ReducerIndex {
    pub fn new(basis: &SoaPolySet, ring: &Ring) -> Result<Self> {
        Self::restricted(basis, ring, 0..basis.n_polys())
    }

    pub fn restricted(
        basis: &SoaPolySet,
        ring: &Ring,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for i in indices {
            if i >= basis.n_polys() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: basis.n_polys(),
                });
            }
            if let Some(k) = basis.leading_key(i) {
                entries.push((*k, i, ring.unpack(k)?));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(ReducerIndex { entries })
    }

    /// Reducer for `m`: `(basis index, leading monomial)`.
    pub fn find(&self, m: &Monomial) -> Option<(usize, &Monomial)> {
        self.entries
            .iter()
            .find(|(_, _, lm)| lm.divides(m))
            .map(|(_, i, lm)| (*i, lm))
    }
}

/// Emits the two S-polynomial halves per target, filters them through the
/// admissibility predicate and orders them deterministically by
/// `(role, provenance, key(shift), basis index)`. Identical `(shift, index)`
/// rows from different pairs are kept once.
pub fn select_rows(
    spec: &BatchSpec,
    basis: &SoaPolySet,
    ring: &Ring,
    exec: &Exec,
) -> Result<RowList> {
    let allowed: HashSet<usize> = spec.candidates.iter().copied().collect();
    let mut proposed = Vec::with_capacity(2 * spec.targets.len());
    let mut owner = Vec::with_capacity(2 * spec.targets.len());
    for (ti, t) in spec.targets.iter().enumerate() {
        for k in [t.left, t.right] {
            if k >= basis.n_polys() {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    len: basis.n_polys(),
                });
            }
            let lk = basis.leading_key(k).ok_or(Error::ZeroPolynomial)?;
            let lm = ring.unpack(lk)?;
            let shift = t.lcm.div(&lm)?;
            proposed.push(RowSpec {
                shift,
                basis_index: k,
                role: RowRole::SPolyHalf,
                provenance: Provenance::Pair(t.pair_id),
            });
            owner.push(ti);
        }
    }
    let keep: Vec<bool> = proposed
        .iter()
        .map(|r| allowed.contains(&r.basis_index) && spec.adm.admits(r))
        .collect();
    let survivors = bulk::stream_compact(&proposed, &keep, exec)?;
    let owners = bulk::stream_compact(&owner, &keep, exec)?;
    let covered: HashSet<usize> = owners.into_iter().collect();
    if let Some(ti) = (0..spec.targets.len()).find(|ti| !covered.contains(ti)) {
        return Err(Error::UncoverableTarget { target: ti });
    }
    let mut keyed: Vec<(MonKey, RowSpec)> = survivors
        .into_iter()
        .map(|r| (ring.pack_unchecked(&r.shift), r))
        .collect();
    keyed.sort_by(|(ka, a), (kb, b)| {
        (a.role, a.provenance, ka, a.basis_index).cmp(&(b.role, b.provenance, kb, b.basis_index))
    });
    let mut seen = HashSet::new();
    let rows = keyed
        .into_iter()
        .filter(|(k, r)| seen.insert((*k, r.basis_index)))
        .map(|(_, r)| r)
        .collect();
    Ok(RowList { rows })
}

/// One closure round. For every dictionary monomial not marked `done`, emits
/// `(m / LM(g), g)` with `g` chosen by [`ReducerIndex::find`]. Rows are
/// ordered by `(key(m), basis index)`.
pub fn closure_expand(
    dict_desc: &[MonKey],
    done: &[bool],
    reducers: &ReducerIndex,
    ring: &Ring,
    round: u32,
) -> Result<RowList> {
    if dict_desc.len() != done.len() {
        return Err(Error::Precondition("done mask length".into()));
    }
    let mut found: Vec<(MonKey, usize, Monomial)> = Vec::new();
    for (key, _) in dict_desc.iter().zip(done).filter(|(_, &d)| !d) {
        let m = ring.unpack(key)?;
        if let Some((k, lm)) = reducers.find(&m) {
            found.push((*key, k, m.div(lm)?));
        }
    }
    found.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(RowList {
        rows: found
            .into_iter()
            .map(|(_, k, shift)| RowSpec {
                shift,
                basis_index: k,
                role: RowRole::Reducer,
                provenance: Provenance::Closure(round),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// Dictionary = union of the row supports.
    #[default]
    SupportOnly,
    /// Iterate reducer rows to a fixed point.
    OneStepReduction,
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub exec: Exec,
    /// Process rows inside each chunk in a seeded random order.
    pub shuffle_seed: Option<u64>,
    pub dict_cap: usize,
    /// Basis indices usable as closure reducers; `None` means all.
    pub reducers: Option<Vec<usize>>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            exec: Exec::sequential(),
            shuffle_seed: None,
            dict_cap: DEFAULT_DICT_CAP,
            reducers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanCounters {
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    pub closure_rounds: usize,
}

/// The write-once sparse plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutPlan {
    pub row_ptr: Vec<usize>,
    pub col_ind: Vec<u32>,
    pub val: Vec<u64>,
    /// Strictly descending: column 0 is the greatest monomial.
    pub dict_keys: Vec<MonKey>,
    pub row_meta: Vec<RowSpec>,
    pub counters: PlanCounters,
}

/// Instrumentation gathered while compiling (not part of the plan).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompileStats {
    /// Keys emitted by all fill passes, closure rounds included.
    pub keys_generated: usize,
    pub radix_passes: usize,
    pub dict_build_ns: u64,
    pub row_assemble_ns: u64,
}

#[derive(Debug, Clone)]
pub struct CompiledBatch {
    pub plan: LayoutPlan,
    pub stats: CompileStats,
}

struct Materialized {
    row_ptr: Vec<usize>,
    keys: Vec<MonKey>,
    vals: Vec<u64>,
}

fn materialize(
    rows: &[RowSpec],
    basis: &SoaPolySet,
    ring: &Ring,
    opts: &CompileOptions,
    salt: u64,
) -> Result<Materialized> {
    // pass 1: count
    let mut lens = Vec::with_capacity(rows.len());
    for r in rows {
        if r.basis_index >= basis.n_polys() {
            return Err(Error::IndexOutOfRange {
                index: r.basis_index,
                len: basis.n_polys(),
            });
        }
        let l = basis.poly_len(r.basis_index);
        if l == 0 {
            return Err(Error::Defect(format!(
                "basis element {} is zero",
                r.basis_index
            )));
        }
        lens.push(l);
    }
    let row_ptr = bulk::exclusive_scan(&lens, &opts.exec)?;
    let total = row_ptr[rows.len()];

    // unpacked supports of every basis element in use
    let mut supports: BTreeMap<usize, Vec<Monomial>> = BTreeMap::new();
    for r in rows {
        if !supports.contains_key(&r.basis_index) {
            let mons = basis
                .keys(r.basis_index)
                .iter()
                .map(|k| ring.unpack(k))
                .collect::<Result<Vec<_>>>()?;
            supports.insert(r.basis_index, mons);
        }
    }

    // pass 2: fill disjoint segments
    let mut keys = vec![MonKey::default(); total];
    let mut vals = vec![0u64; total];
    let fill = |range: std::ops::Range<usize>, out: &mut [MonKey]| -> Result<()> {
        let base = row_ptr[range.start];
        let mut order: Vec<usize> = range.collect();
        if let Some(seed) = opts.shuffle_seed {
            let mut rng = rng_from_seed(derive_seed(seed, salt ^ order.first().copied().unwrap_or(0) as u64));
            order.shuffle(&mut rng);
        }
        for i in order {
            let row = &rows[i];
            let dst = &mut out[row_ptr[i] - base..row_ptr[i + 1] - base];
            for (slot, m) in dst.iter_mut().zip(&supports[&row.basis_index]) {
                *slot = ring.pack_unchecked(&m.mul(&row.shift)?);
            }
        }
        Ok(())
    };
    opts.exec.fill_segments(&mut keys, &row_ptr, fill)?;
    opts.exec.fill_segments(&mut vals, &row_ptr, |range, out| {
        let base = row_ptr[range.start];
        for i in range {
            let dst = &mut out[row_ptr[i] - base..row_ptr[i + 1] - base];
            dst.copy_from_slice(basis.coeffs(rows[i].basis_index));
        }
        Ok(())
    })?;
    Ok(Materialized {
        row_ptr,
        keys,
        vals,
    })
}

fn sorted_set(keys: &[MonKey], width: usize, exec: &Exec) -> Result<(Vec<MonKey>, usize)> {
    let (sorted, stats) = bulk::radix_sort(&KeyStream::new(width, keys.to_vec()), exec);
    let (uniq, _) = bulk::unique_sorted(&sorted, exec)?;
    Ok((uniq.keys, stats.passes))
}

fn union_sorted(a: &[MonKey], b: &[MonKey]) -> Vec<MonKey> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Compiles a row list into a [`LayoutPlan`].
pub fn compile_batch(
    rows: &RowList,
    basis: &SoaPolySet,
    ring: &Ring,
    closure: Closure,
    opts: &CompileOptions,
) -> Result<CompiledBatch> {
    let width = ring.key_words();
    let exec = &opts.exec;
    let t0 = Instant::now();
    let mut stats = CompileStats::default();

    let mut meta: Vec<RowSpec> = rows.rows.clone();
    let first = materialize(&meta, basis, ring, opts, 0)?;
    stats.keys_generated += first.keys.len();
    let mut row_ptr = first.row_ptr;
    let mut row_key = first.keys;
    let mut row_val = first.vals;
    let (mut dict_asc, passes) = sorted_set(&row_key, width, exec)?;
    stats.radix_passes += passes;

    let mut rounds = 0usize;
    if closure == Closure::OneStepReduction {
        let reducers = match &opts.reducers {
            Some(idx) => ReducerIndex::restricted(basis, ring, idx.iter().copied())?,
            None => ReducerIndex::new(basis, ring)?,
        };
        let mut done: HashSet<MonKey> = (0..meta.len())
            .filter(|&i| row_ptr[i] < row_ptr[i + 1])
            .map(|i| row_key[row_ptr[i]])
            .collect();
        loop {
            let dict_desc: Vec<MonKey> = dict_asc.iter().rev().copied().collect();
            let mask: Vec<bool> = dict_desc.iter().map(|k| done.contains(k)).collect();
            let fresh = closure_expand(&dict_desc, &mask, &reducers, ring, rounds as u32 + 1)?;
            done.extend(dict_desc.iter().copied());
            if fresh.is_empty() {
                break;
            }
            rounds += 1;
            let extra = materialize(&fresh.rows, basis, ring, opts, rounds as u64)?;
            stats.keys_generated += extra.keys.len();
            let base = *row_ptr.last().unwrap();
            row_ptr.extend(extra.row_ptr[1..].iter().map(|&o| o + base));
            row_key.extend_from_slice(&extra.keys);
            row_val.extend_from_slice(&extra.vals);
            let (new_keys, passes) = sorted_set(&extra.keys, width, exec)?;
            stats.radix_passes += passes;
            dict_asc = union_sorted(&dict_asc, &new_keys);
            meta.extend(fresh.rows);
            if dict_asc.len() > opts.dict_cap {
                return Err(Error::DictionaryCap(opts.dict_cap));
            }
        }
    }
    stats.dict_build_ns = t0.elapsed().as_nanos() as u64;

    // row assembly
    let t1 = Instant::now();
    let n = dict_asc.len();
    let m = row_key.len();
    let mut col_ind = vec![0u32; m];
    exec.fill_segments(&mut col_ind, &row_ptr, |range, out| {
        let base = row_ptr[range.start];
        let mut seg: Vec<MonKey> = Vec::new();
        for i in range {
            let (s, e) = (row_ptr[i], row_ptr[i + 1]);
            seg.clear();
            seg.extend(row_key[s..e].iter().rev());
            let lo = dict_asc.partition_point(|k| *k < seg[0]);
            let hi = dict_asc.partition_point(|k| *k <= seg[seg.len() - 1]);
            let pos = bulk::merge_join_index(&seg, &dict_asc[lo..hi], &Exec::sequential())
                .map_err(|e| Error::Defect(format!("row {i}: {e}")))?;
            for (slot, p) in out[s - base..e - base].iter_mut().zip(pos.iter().rev()) {
                *slot = (n - 1 - (lo + p)) as u32;
            }
        }
        Ok(())
    })?;
    stats.row_assemble_ns = t1.elapsed().as_nanos() as u64;

    dict_asc.reverse();
    let plan = LayoutPlan {
        counters: PlanCounters {
            r: meta.len(),
            n,
            m,
            nnz: m,
            closure_rounds: rounds,
        },
        row_ptr,
        col_ind,
        val: row_val,
        dict_keys: dict_asc,
        row_meta: meta,
    };
    Ok(CompiledBatch { plan, stats })
}

/// Row-length bucketing and padding statistics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanStats {
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    pub closure_rounds: usize,
    /// Power-of-two buckets: `(upper bound, row count)`.
    pub row_length_histogram: Vec<(usize, usize)>,
    /// Padding overhead when rows are packed in slices of
    /// [`SLICE_HEIGHT`] consecutive rows: `sum(slice max * slice rows) / M - 1`.
    pub slice_padding_ratio: f64,
}

pub const SLICE_HEIGHT: usize = 32;

impl LayoutPlan {
    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn row(&self, i: usize) -> (&[u32], &[u64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_ind[r.clone()], &self.val[r])
    }

    /// Leading (smallest) column of row `i`.
    pub fn leading_column(&self, i: usize) -> Option<u32> {
        self.row(i).0.first().copied()
    }

    /// Reconstructs row `i` as a polynomial over the dictionary.
    pub fn decode_row(&self, i: usize, ring: &Ring) -> Result<Poly> {
        if i >= self.n_rows() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n_rows(),
            });
        }
        let (cols, vals) = self.row(i);
        let terms = cols
            .iter()
            .zip(vals)
            .map(|(&c, &v)| {
                Ok(Term {
                    mon: ring.unpack(&self.dict_keys[c as usize])?,
                    coeff: v,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_sorted_terms(terms))
    }

    /// Structural checks: row segments partition `[0, M)`, columns strictly
    /// ascending and in range, values nonzero, counters consistent.
    pub fn check_invariants(&self, p: u64) -> Result<()> {
        let fail = |msg: String| Err(Error::PropertyViolation(msg));
        let c = &self.counters;
        if self.row_ptr.first() != Some(&0) || self.row_ptr.len() != c.r + 1 {
            return fail("row_ptr shape".into());
        }
        if self.row_meta.len() != c.r {
            return fail("row_meta length".into());
        }
        if self.row_ptr[c.r] != c.m || self.col_ind.len() != c.m || self.val.len() != c.m {
            return fail("M disagrees with buffers".into());
        }
        if c.nnz != c.m || self.dict_keys.len() != c.n {
            return fail("counter mismatch".into());
        }
        for i in 0..c.r {
            if self.row_ptr[i + 1] < self.row_ptr[i] {
                return fail(format!("row_ptr decreases at {i}"));
            }
            let (cols, vals) = self.row(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return fail(format!("row {i} columns not strictly ascending"));
            }
            if cols.iter().any(|&col| col as usize >= c.n) {
                return fail(format!("row {i} column out of range"));
            }
            if vals.iter().any(|&v| v == 0 || v >= p) {
                return fail(format!("row {i} value outside [1, p)"));
            }
        }
        if self.dict_keys.windows(2).any(|w| w[0] <= w[1]) {
            return fail("dictionary not strictly descending".into());
        }
        Ok(())
    }

    pub fn stats(&self) -> PlanStats {
        plan_stats(self)
    }

    /// Line-oriented text dump: a header line, a counters line, then one line
    /// per array with decimal values. Keys print their significant words
    /// joined by `:`; row metadata prints `index/role/provenance/exponents`.
    pub fn to_text(&self, key_words: usize) -> String {
        let mut s = String::from("fbsp-plan v1\n");
        let c = &self.counters;
        let _ = writeln!(
            s,
            "counters r={} N={} M={} nnz={} closure_rounds={}",
            c.r, c.n, c.m, c.nnz, c.closure_rounds
        );
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "row_ptr {}", join(&mut self.row_ptr.iter().map(|x| x.to_string())));
        let _ = writeln!(s, "col_ind {}", join(&mut self.col_ind.iter().map(|x| x.to_string())));
        let _ = writeln!(s, "val {}", join(&mut self.val.iter().map(|x| x.to_string())));
        let _ = writeln!(
            s,
            "dict_keys {}",
            join(&mut self.dict_keys.iter().map(|k| {
                k.0[..key_words]
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(":")
            }))
        );
        let _ = writeln!(
            s,
            "row_meta {}",
            join(&mut self.row_meta.iter().map(|r| {
                let role = match r.role {
                    RowRole::SPolyHalf => "s",
                    RowRole::Reducer => "r",
                };
                let prov = match r.provenance {
                    Provenance::Pair(id) => format!("p{id}"),
                    Provenance::Closure(round) => format!("c{round}"),
                };
                let exps = r
                    .shift
                    .exponents()
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(".");
                format!("{}/{role}/{prov}/{exps}", r.basis_index)
            }))
        );
        s
    }

    pub fn from_text(text: &str) -> Result<LayoutPlan> {
        let bad = |line: usize, msg: &str| Error::SystemFile {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines();
        if lines.next() != Some("fbsp-plan v1") {
            return Err(bad(1, "missing header"));
        }
        let counters_line = lines.next().ok_or_else(|| bad(2, "missing counters"))?;
        let mut fields = BTreeMap::new();
        for kv in counters_line.split_whitespace().skip(1) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(2, "bad counter"))?;
            fields.insert(k, v.parse::<usize>().map_err(|_| bad(2, "bad counter value"))?);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(2, "missing counter"));
        let counters = PlanCounters {
            r: get("r")?,
            n: get("N")?,
            m: get("M")?,
            nnz: get("nnz")?,
            closure_rounds: get("closure_rounds")?,
        };
        let mut array = |lineno: usize, name: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| bad(lineno, "missing array"))?;
            let mut parts = line.split(' ').filter(|s| !s.is_empty());
            if parts.next() != Some(name) {
                return Err(bad(lineno, &format!("expected `{name}`")));
            }
            Ok(parts.map(str::to_string).collect())
        };
        let num = |lineno: usize, v: &str| v.parse::<u64>().map_err(|_| bad(lineno, "bad number"));
        let row_ptr = array(3, "row_ptr")?
            .iter()
            .map(|v| num(3, v).map(|x| x as usize))
            .collect::<Result<Vec<_>>>()?;
        let col_ind = array(4, "col_ind")?
            .iter()
            .map(|v| num(4, v).map(|x| x as u32))
            .collect::<Result<Vec<_>>>()?;
        let val = array(5, "val")?
            .iter()
            .map(|v| num(5, v))
            .collect::<Result<Vec<_>>>()?;
        let dict_keys = array(6, "dict_keys")?
            .iter()
            .map(|k| {
                let mut key = MonKey::default();
                for (i, w) in k.split(':').enumerate() {
                    if i >= MAX_KEY_WORDS {
                        return Err(bad(6, "key too wide"));
                    }
                    key.0[i] = num(6, w)?;
                }
                Ok(key)
            })
            .collect::<Result<Vec<_>>>()?;
        let row_meta = array(7, "row_meta")?
            .iter()
            .map(|r| {
                let parts: Vec<&str> = r.split('/').collect();
                if parts.len() != 4 {
                    return Err(bad(7, "bad row record"));
                }
                let basis_index = num(7, parts[0])? as usize;
                let role = match parts[1] {
                    "s" => RowRole::SPolyHalf,
                    "r" => RowRole::Reducer,
                    _ => return Err(bad(7, "bad role")),
                };
                let provenance = match parts[2].split_at(1) {
                    ("p", id) => Provenance::Pair(num(7, id)?),
                    ("c", round) => Provenance::Closure(num(7, round)? as u32),
                    _ => return Err(bad(7, "bad provenance")),
                };
                let exps = parts[3]
                    .split('.')
                    .map(|e| num(7, e).map(|x| x as u32))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RowSpec {
                    shift: Monomial::new(&exps)?,
                    basis_index,
                    role,
                    provenance,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LayoutPlan {
            row_ptr,
            col_ind,
            val,
            dict_keys,
            row_meta,
            counters,
        })
    }
}

pub fn plan_stats(plan: &LayoutPlan) -> PlanStats {
    let r = plan.n_rows();
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..r {
        *hist.entry(plan.row_len(i).next_power_of_two()).or_default() += 1;
    }
    let m = plan.row_ptr[r];
    let padded: usize = (0..r)
        .collect::<Vec<_>>()
        .chunks(SLICE_HEIGHT)
        .map(|c| c.iter().map(|&i| plan.row_len(i)).max().unwrap_or(0) * c.len())
        .sum();
    PlanStats {
        r,
        n: plan.dict_keys.len(),
        m,
        nnz: plan.col_ind.len(),
        closure_rounds: plan.counters.closure_rounds,
        row_length_histogram: hist.into_iter().collect(),
        slice_padding_ratio: if m == 0 {
            0.0
        } else {
            padded as f64 / m as f64 - 1.0
        },
    }
}
