//! Gröbner bases: an F4-style driver over FBSP + sparse elimination, and an
//! independent Buchberger reference.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::time::Instant;

use crate::bulk::Exec;
use crate::fbsp::{self, Admissibility, BatchSpec, Closure, CompileOptions, LayoutPlan, RowList, Target};
use crate::monomial::{MonKey, Monomial, Ring};
use crate::poly::{Poly, SoaPolySet, Term};
use crate::sparse_linalg::{
    self, csr_from_plan, dense_gauss, psge_reduce, CsrMatrix, EchelonResult, KernelBasis, KernelEngine,
    SparseRow, WiedemannConfig,
};
use crate::{Error, Result};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// `(L / LT(f)) f - (L / LT(g)) g` with `L = lcm(LM(f), LM(g))`.
pub fn spoly(f: &Poly, g: &Poly, ring: &Ring) -> Result<Poly> {
    let (ft, gt) = match (f.leading_term(), g.leading_term()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::ZeroPolynomial),
    };
    let m = ring.modulus();
    let l = ft.mon.lcm(&gt.mon)?;
    let fs = f.mul_monomial(&l.div(&ft.mon)?)?.scale(m.inv(ft.coeff)?, ring);
    let gs = g.mul_monomial(&l.div(&gt.mon)?)?;
    Ok(fs.add_scaled(m.neg(m.inv(gt.coeff)?), &gs, ring))
}

/// Full reduction of `f` by `basis`. The reducer for a term is the basis
/// element with the smallest leading monomial dividing it, lowest index on
/// ties.
pub fn normal_form(f: &Poly, basis: &[Poly], ring: &Ring) -> Poly {
    let m = ring.modulus();
    let mut order: Vec<usize> = (0..basis.len()).filter(|&i| !basis[i].is_zero()).collect();
    order.sort_by(|&a, &b| ring.cmp(basis[a].lm().unwrap(), basis[b].lm().unwrap()).then(a.cmp(&b)));
    let inv_lc: Vec<u64> = basis.iter().map(|g| g.lc().map_or(0, |c| m.inv(c).unwrap())).collect();
    let mut p = f.clone();
    let mut rem: Vec<Term> = Vec::new();
    while let Some(lt) = p.leading_term().cloned() {
        let red = order.iter().find(|&&i| basis[i].lm().unwrap().divides(&lt.mon));
        match red {
            Some(&i) => {
                let g = &basis[i];
                let t = lt.mon.div(g.lm().unwrap()).expect("divides");
                let c = m.neg(m.mul(lt.coeff, inv_lc[i]));
                p = p.add_scaled(c, &g.mul_monomial(&t).expect("within lane range"), ring);
            }
            None => {
                rem.push(lt);
                p = Poly::from_sorted_terms(p.into_terms().split_off(1));
            }
        }
    }
    Poly::from_sorted_terms(rem)
}

/// Normal form against a packed basis.
pub fn normal_form_soa(f: &Poly, basis: &SoaPolySet, ring: &Ring) -> Result<Poly> {
    let polys = (0..basis.n_polys()).map(|i| basis.slice(i, ring)).collect::<Result<Vec<_>>>()?;
    Ok(normal_form(f, &polys, ring))
}

/// Monic, auto-reduced, sorted descending by leading monomial.
pub fn canonical_sort(basis: &mut [Poly], ring: &Ring) {
    basis.sort_by(|a, b| ring.cmp(b.lm().unwrap(), a.lm().unwrap()));
}

pub fn format_basis(basis: &[Poly], ring: &Ring) -> String {
    basis.iter().map(|g| g.format(ring) + "\n").collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub id: u64,
    pub i: usize,
    pub j: usize,
    pub lcm: Monomial,
    pub lcm_key: MonKey,
}

impl Pair {
    fn sort_key(&self) -> (u32, MonKey, usize, usize) {
        (self.lcm.degree(), self.lcm_key, self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Numeric {
    #[default]
    Psge,
    /// Wiedemann left kernel prunes dependent rows before PSGE.
    Wiedemann,
    Dense,
}

impl Numeric {
    pub fn name(self) -> &'static str {
        match self {
            Numeric::Psge => "psge",
            Numeric::Wiedemann => "wiedemann",
            Numeric::Dense => "dense",
        }
    }
}

impl FromStr for Numeric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psge" => Ok(Numeric::Psge),
            "wiedemann" => Ok(Numeric::Wiedemann),
            "dense" => Ok(Numeric::Dense),
            _ => Err(Error::Precondition(format!("unknown numeric engine `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct F4Config {
    pub numeric: Numeric,
    pub panel_width: usize,
    pub block_width: usize,
    pub seed: u64,
    pub exec: Exec,
    pub max_steps: usize,
    /// Keep each batch's row list and plan for later inspection.
    pub keep_traces: bool,
}

impl Default for F4Config {
    fn default() -> Self {
        F4Config {
            numeric: Numeric::Psge,
            panel_width: sparse_linalg::DEFAULT_PANEL_WIDTH,
            block_width: sparse_linalg::DEFAULT_BLOCK_WIDTH,
            seed: 0,
            exec: Exec::sequential(),
            max_steps: DEFAULT_MAX_STEPS,
            keep_traces: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageTimings {
    pub dict_build_ns: u64,
    pub row_assemble_ns: u64,
    pub numeric_core_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BatchRecord {
    pub degree: u32,
    pub pairs: usize,
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    pub rank: usize,
    pub new_polys: usize,
    pub zero_reductions: usize,
    /// Rows whose reduced leading column is an input leading column.
    pub known_leads: usize,
    pub closure_rounds: usize,
    pub keys_generated: usize,
    pub radix_passes: usize,
    pub fill_generated: usize,
    pub pruned_rows: usize,
    pub timings: StageTimings,
}

#[derive(Debug, Clone)]
pub struct BatchTrace {
    pub rows: RowList,
    pub plan: LayoutPlan,
    /// Basis indices the closure was allowed to use.
    pub reducers: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GroebnerState {
    pub ring: Ring,
    /// Every polynomial ever added, monic; indices are stable.
    pub basis: SoaPolySet,
    polys: Vec<Poly>,
    /// Members of the current Gebauer–Möller basis.
    pub active: Vec<bool>,
    pub pairs: Vec<Pair>,
    next_pair_id: u64,
    pub stats: Vec<BatchRecord>,
    pub traces: Vec<BatchTrace>,
    steps: usize,
}

impl GroebnerState {
    pub fn new(ring: Ring) -> Self {
        GroebnerState {
            ring,
            basis: SoaPolySet::default(),
            polys: Vec::new(),
            active: Vec::new(),
            pairs: Vec::new(),
            next_pair_id: 0,
            stats: Vec::new(),
            traces: Vec::new(),
            steps: 0,
        }
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn active_polys(&self) -> Vec<&Poly> {
        self.polys.iter().zip(&self.active).filter(|(_, &a)| a).map(|(p, _)| p).collect()
    }

    fn lm(&self, i: usize) -> &Monomial {
        self.polys[i].lm().expect("basis members are nonzero")
    }

    fn make_pair(&mut self, i: usize, j: usize) -> Pair {
        let lcm = self.lm(i).lcm(self.lm(j)).expect("lcm within lane range");
        let lcm_key = self.ring.pack(&lcm).expect("ring arity");
        let id = self.next_pair_id;
        self.next_pair_id += 1;
        Pair { id, i, j, lcm, lcm_key }
    }

    /// Adds `h` and updates the pair queue with the Gebauer–Möller criteria.
    pub fn update_pairs(&mut self, h: Poly) -> Result<usize> {
        if h.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let h = h.monic(&self.ring);
        let t = self.polys.len();
        self.basis.push(&h, &self.ring);
        self.polys.push(h);
        self.active.push(false);
        let lm_h = self.lm(t).clone();
        let old: Vec<usize> = (0..t).filter(|&g| self.active[g]).collect();

        let lcms: Vec<Monomial> = old.iter().map(|&g| self.lm(g).lcm(&lm_h).unwrap()).collect();
        let coprime: Vec<bool> = old.iter().map(|&g| self.lm(g).is_coprime(&lm_h)).collect();
        // chain criterion among the new pairs
        let mut in_c = vec![true; old.len()];
        let mut in_d = vec![false; old.len()];
        for a in 0..old.len() {
            in_c[a] = false;
            let dominated = (0..old.len())
                .filter(|&b| b != a && (in_c[b] || in_d[b]))
                .any(|b| lcms[b].divides(&lcms[a]));
            if coprime[a] || !dominated {
                in_d[a] = true;
            }
        }
        // old pairs made redundant by h
        let polys = &self.polys;
        let lm = |i: usize| polys[i].lm().unwrap();
        self.pairs.retain(|p| {
            !(lm_h.divides(&p.lcm)
                && lm(p.i).lcm(&lm_h).unwrap() != p.lcm
                && lm(p.j).lcm(&lm_h).unwrap() != p.lcm)
        });
        let mut added = 0;
        for a in 0..old.len() {
            if in_d[a] && !coprime[a] {
                let p = self.make_pair(old[a], t);
                self.pairs.push(p);
                added += 1;
            }
        }
        self.pairs.sort_by_key(|a| a.sort_key());
        for &g in &old {
            if lm_h.divides(self.lm(g)) {
                self.active[g] = false;
            }
        }
        self.active[t] = true;
        Ok(added)
    }

    /// Normal strategy: every pair of minimal lcm degree.
    pub fn select_batch(&mut self) -> Result<(BatchSpec, Vec<u64>)> {
        let d = self.pairs.first().ok_or(Error::EmptyQueue)?.lcm.degree();
        let split = self.pairs.partition_point(|p| p.lcm.degree() == d);
        let chosen: Vec<Pair> = self.pairs.drain(..split).collect();
        let spec = BatchSpec {
            targets: chosen
                .iter()
                .map(|p| Target {
                    lcm: p.lcm.clone(),
                    pair_id: p.id,
                    left: p.i,
                    right: p.j,
                })
                .collect(),
            candidates: (0..self.polys.len()).collect(),
            adm: Admissibility::accept_all(),
        };
        Ok((spec, chosen.iter().map(|p| p.id).collect()))
    }

    /// One batch: select, compile, eliminate, add the new polynomials.
    pub fn f4_step(&mut self, cfg: &F4Config) -> Result<BatchRecord> {
        if self.steps >= cfg.max_steps {
            return Err(Error::StepCap(cfg.max_steps));
        }
        self.steps += 1;
        let ring = self.ring.clone();
        let (spec, ids) = self.select_batch()?;
        let degree = spec.targets[0].lcm.degree();
        let rows = fbsp::select_rows(&spec, &self.basis, &ring, &cfg.exec)?;
        let reducers: Vec<usize> = (0..self.polys.len()).collect();
        let opts = CompileOptions {
            exec: cfg.exec.clone(),
            reducers: Some(reducers.clone()),
            ..Default::default()
        };
        let compiled = fbsp::compile_batch(&rows, &self.basis, &ring, Closure::OneStepReduction, &opts)?;
        let plan = compiled.plan;
        let t0 = Instant::now();
        let a = csr_from_plan(&plan, ring.modulus())?;
        let (ech, pruned) = eliminate(&a, cfg, self.stats.len() as u64)?;
        let numeric_core_ns = t0.elapsed().as_nanos() as u64;

        let mut record = BatchRecord {
            degree,
            pairs: ids.len(),
            r: plan.counters.r,
            n: plan.counters.n,
            m: plan.counters.m,
            nnz: plan.counters.nnz,
            rank: ech.rank,
            new_polys: ech.nonpivot_rows.len(),
            zero_reductions: ech.zero_row_count,
            known_leads: ech.pivot_rows.len(),
            closure_rounds: plan.counters.closure_rounds,
            keys_generated: compiled.stats.keys_generated,
            radix_passes: compiled.stats.radix_passes,
            fill_generated: ech.fill_generated,
            pruned_rows: pruned,
            timings: StageTimings {
                dict_build_ns: compiled.stats.dict_build_ns,
                row_assemble_ns: compiled.stats.row_assemble_ns,
                numeric_core_ns,
            },
        };
        if record.known_leads + record.new_polys + record.zero_reductions != record.r {
            return Err(Error::Defect("row accounting does not add up".into()));
        }
        for row in &ech.nonpivot_rows {
            let h = row_to_poly(row, &plan, &ring)?;
            self.update_pairs(h)?;
        }
        record.new_polys = ech.nonpivot_rows.len();
        if cfg.keep_traces {
            self.traces.push(BatchTrace { rows, plan, reducers });
        }
        self.stats.push(record.clone());
        Ok(record)
    }
}

/// Decodes a reduced row against the plan's dictionary.
pub fn row_to_poly(row: &SparseRow, plan: &LayoutPlan, ring: &Ring) -> Result<Poly> {
    let terms = row
        .cols
        .iter()
        .zip(&row.vals)
        .map(|(&c, &v)| {
            Ok(Term {
                mon: ring.unpack(&plan.dict_keys[c as usize])?,
                coeff: v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::from_sorted_terms(terms))
}

fn input_leads(a: &CsrMatrix) -> BTreeSet<u32> {
    (0..a.n_rows()).filter_map(|i| a.row(i).0.first().copied()).collect()
}

/// Moves rows between the pivot and non-pivot lists according to `leads`.
fn classify(rows: Vec<SparseRow>, leads: &BTreeSet<u32>, n_rows: usize, fill: usize) -> EchelonResult {
    let mut out = EchelonResult {
        rank: rows.len(),
        zero_row_count: n_rows - rows.len(),
        fill_generated: fill,
        ..Default::default()
    };
    for r in rows {
        let lead = r.cols[0];
        if leads.contains(&lead) {
            out.pivot_cols.push(lead);
            out.pivot_rows.push(r);
        } else {
            out.nonpivot_rows.push(r);
        }
    }
    out
}

fn eliminate(a: &CsrMatrix, cfg: &F4Config, batch: u64) -> Result<(EchelonResult, usize)> {
    let leads = input_leads(a);
    match cfg.numeric {
        Numeric::Psge => Ok((psge_reduce(a, cfg.panel_width)?, 0)),
        Numeric::Dense => {
            let de = dense_gauss(&a.to_dense(), a.n_cols(), a.modulus())?;
            let rows = de.rref[..de.rank]
                .iter()
                .map(|d| {
                    let mut r = SparseRow::default();
                    for (c, &v) in d.iter().enumerate() {
                        if v != 0 {
                            r.cols.push(c as u32);
                            r.vals.push(v);
                        }
                    }
                    r
                })
                .collect();
            Ok((classify(rows, &leads, a.n_rows(), 0), 0))
        }
        Numeric::Wiedemann => {
            let wcfg = WiedemannConfig {
                block_width: cfg.block_width,
                exec: cfg.exec.clone(),
                ..WiedemannConfig::new(crate::rng::derive_seed(cfg.seed, batch))
            };
            let kernel = if a.n_rows() == 0 {
                None
            } else {
                Some(sparse_linalg::left_kernel_with(a, a.n_rows(), KernelEngine::Wiedemann, &wcfg)?)
            };
            let drop = kernel.map_or_else(BTreeSet::new, |k| dependent_rows(&k, a.modulus()));
            let keep: Vec<SparseRow> =
                (0..a.n_rows()).filter(|i| !drop.contains(i)).map(|i| a.sparse_row(i)).collect();
            let pruned = CsrMatrix::from_sparse_rows(&keep, a.n_cols(), *a.modulus())?;
            let e = psge_reduce(&pruned, cfg.panel_width)?;
            let fill = e.fill_generated;
            let rows: Vec<SparseRow> = e.all_rows().into_iter().cloned().collect();
            Ok((classify(rows, &leads, a.n_rows(), fill), drop.len()))
        }
    }
}

/// Row indices that the kernel vectors express through the remaining rows:
/// each vector, echelonized from the last index, contributes its last
/// nonzero position.
fn dependent_rows(k: &KernelBasis, m: &crate::FieldModulus) -> BTreeSet<usize> {
    let mut rows: Vec<(usize, Vec<u64>)> = Vec::new();
    for v in &k.vectors {
        let mut x = v.clone();
        for (pc, r) in &rows {
            if x[*pc] != 0 {
                let f = m.neg(x[*pc]);
                for (xi, &ri) in x.iter_mut().zip(r) {
                    *xi = m.add(*xi, m.mul(f, ri));
                }
            }
        }
        if let Some(pc) = x.iter().rposition(|&v| v != 0) {
            let inv = m.inv(x[pc]).unwrap();
            x.iter_mut().for_each(|v| *v = m.mul(*v, inv));
            for (_, r) in rows.iter_mut() {
                if r[pc] != 0 {
                    let f = m.neg(r[pc]);
                    for (ri, &xi) in r.iter_mut().zip(&x) {
                        *ri = m.add(*ri, m.mul(f, xi));
                    }
                }
            }
            rows.push((pc, x));
        }
    }
    rows.into_iter().map(|(pc, _)| pc).collect()
}

/// Result of a full F4 run.
#[derive(Debug, Clone)]
pub struct F4Run {
    pub basis: Vec<Poly>,
    pub state: GroebnerState,
    pub final_stats: Option<BatchRecord>,
}

pub fn f4_groebner(system: &[Poly], ring: &Ring) -> Result<Vec<Poly>> {
    Ok(f4_run(system, ring, &F4Config::default())?.basis)
}

pub fn f4_run(system: &[Poly], ring: &Ring, cfg: &F4Config) -> Result<F4Run> {
    let mut state = GroebnerState::new(ring.clone());
    for f in system {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        state.update_pairs(f.clone())?;
    }
    while !state.pairs.is_empty() {
        state.f4_step(cfg)?;
    }
    let (basis, rec) = reduce_basis_matrix(&state, cfg)?;
    Ok(F4Run {
        basis,
        state,
        final_stats: rec,
    })
}

/// Interreduction by one closed batch: the minimal basis elements plus their
/// closure reducers, brought to reduced echelon form. The row led by each
/// minimal leading monomial is the reduced basis element.
fn reduce_basis_matrix(state: &GroebnerState, cfg: &F4Config) -> Result<(Vec<Poly>, Option<BatchRecord>)> {
    let ring = &state.ring;
    let act: Vec<usize> = (0..state.polys.len()).filter(|&i| state.active[i]).collect();
    let minimal: Vec<usize> = act
        .iter()
        .copied()
        .filter(|&i| {
            !act.iter().any(|&j| {
                j != i && state.lm(j).divides(state.lm(i)) && (state.lm(j) != state.lm(i) || j < i)
            })
        })
        .collect();
    if minimal.is_empty() {
        return Ok((Vec::new(), None));
    }
    let rows = RowList {
        rows: minimal
            .iter()
            .map(|&i| fbsp::RowSpec {
                shift: ring.one(),
                basis_index: i,
                role: fbsp::RowRole::SPolyHalf,
                provenance: fbsp::Provenance::Pair(u64::MAX),
            })
            .collect(),
    };
    let opts = CompileOptions {
        exec: cfg.exec.clone(),
        reducers: Some(minimal.clone()),
        ..Default::default()
    };
    let compiled = fbsp::compile_batch(&rows, &state.basis, ring, Closure::OneStepReduction, &opts)?;
    let plan = &compiled.plan;
    let t0 = Instant::now();
    let a = csr_from_plan(plan, ring.modulus())?;
    let e = psge_reduce(&a, cfg.panel_width)?;
    let numeric_core_ns = t0.elapsed().as_nanos() as u64;
    let targets: BTreeSet<u32> = (0..minimal.len()).map(|i| plan.leading_column(i).unwrap()).collect();
    let mut out = Vec::with_capacity(minimal.len());
    for r in e.all_rows() {
        if targets.contains(&r.cols[0]) {
            out.push(row_to_poly(r, plan, ring)?);
        }
    }
    if out.len() != minimal.len() {
        return Err(Error::Defect("interreduction lost a leading monomial".into()));
    }
    canonical_sort(&mut out, ring);
    let rec = BatchRecord {
        degree: 0,
        pairs: 0,
        r: plan.counters.r,
        n: plan.counters.n,
        m: plan.counters.m,
        nnz: plan.counters.nnz,
        rank: e.rank,
        new_polys: 0,
        zero_reductions: e.zero_row_count,
        known_leads: e.pivot_rows.len(),
        closure_rounds: plan.counters.closure_rounds,
        keys_generated: compiled.stats.keys_generated,
        radix_passes: compiled.stats.radix_passes,
        fill_generated: e.fill_generated,
        pruned_rows: 0,
        timings: StageTimings {
            dict_build_ns: compiled.stats.dict_build_ns,
            row_assemble_ns: compiled.stats.row_assemble_ns,
            numeric_core_ns,
        },
    };
    Ok((out, Some(rec)))
}

/// Textbook Buchberger: product criterion only, scalar reduction, final
/// interreduction.
pub fn buchberger_reference(system: &[Poly], ring: &Ring, max_steps: usize) -> Result<Vec<Poly>> {
    let mut g: Vec<Poly> = Vec::new();
    for f in system {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        g.push(f.monic(ring));
    }
    let mut queue: Vec<(usize, usize)> = Vec::new();
    let push_pairs = |g: &[Poly], queue: &mut Vec<(usize, usize)>, j: usize| {
        for i in 0..j {
            if !g[i].lm().unwrap().is_coprime(g[j].lm().unwrap()) {
                queue.push((i, j));
            }
        }
    };
    for j in 0..g.len() {
        push_pairs(&g, &mut queue, j);
    }
    let mut steps = 0;
    while !queue.is_empty() {
        steps += 1;
        if steps > max_steps {
            return Err(Error::StepCap(max_steps));
        }
        // smallest lcm first
        let best = (0..queue.len())
            .min_by(|&a, &b| {
                let la = g[queue[a].0].lm().unwrap().lcm(g[queue[a].1].lm().unwrap()).unwrap();
                let lb = g[queue[b].0].lm().unwrap().lcm(g[queue[b].1].lm().unwrap()).unwrap();
                ring.cmp(&la, &lb).then(queue[a].cmp(&queue[b]))
            })
            .unwrap();
        let (i, j) = queue.swap_remove(best);
        let h = normal_form(&spoly(&g[i], &g[j], ring)?, &g, ring);
        if !h.is_zero() {
            g.push(h.monic(ring));
            push_pairs(&g, &mut queue, g.len() - 1);
        }
    }
    Ok(interreduce(g, ring))
}

/// Minimal basis, then each element replaced by its normal form modulo the
/// others.
pub fn interreduce(g: Vec<Poly>, ring: &Ring) -> Vec<Poly> {
    let mut minimal: Vec<Poly> = Vec::new();
    for (i, f) in g.iter().enumerate() {
        let lm = f.lm().unwrap();
        let redundant = g.iter().enumerate().any(|(j, h)| {
            j != i && h.lm().unwrap().divides(lm) && (h.lm().unwrap() != lm || j < i)
        });
        if !redundant {
            minimal.push(f.clone());
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<Poly> =
            minimal.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.clone()).collect();
        out.push(normal_form(&minimal[i], &others, ring).monic(ring));
    }
    canonical_sort(&mut out, ring);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroebnerCheck {
    pub ok: bool,
    /// First pair whose S-polynomial does not reduce to zero, with its
    /// normal form.
    pub witness: Option<(usize, usize, Poly)>,
}

pub fn is_groebner(g: &[Poly], ring: &Ring) -> Result<GroebnerCheck> {
    for j in 0..g.len() {
        for i in 0..j {
            let h = normal_form(&spoly(&g[i], &g[j], ring)?, g, ring);
            if !h.is_zero() {
                return Ok(GroebnerCheck {
                    ok: false,
                    witness: Some((i, j, h)),
                });
            }
        }
    }
    Ok(GroebnerCheck { ok: true, witness: None })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyzygyReport {
    pub checked: usize,
    /// Indices of kernel vectors whose recombination is nonzero.
    pub failures: Vec<usize>,
}

impl SyzygyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recombines `Σ v_i t_i g_{k_i}` with exact polynomial arithmetic for every
/// left-kernel vector `v`.
pub fn verify_kernel_syzygy(
    plan: &LayoutPlan,
    basis: &SoaPolySet,
    kernel: &KernelBasis,
    ring: &Ring,
) -> Result<SyzygyReport> {
    let shifted = plan
        .row_meta
        .iter()
        .map(|r| basis.slice(r.basis_index, ring)?.mul_monomial(&r.shift))
        .collect::<Result<Vec<Poly>>>()?;
    let mut failures = Vec::new();
    for (idx, v) in kernel.vectors.iter().enumerate() {
        if v.len() != shifted.len() {
            return Err(Error::DimensionMismatch("kernel vector length".into()));
        }
        let mut acc = Poly::zero();
        for (c, f) in v.iter().zip(&shifted) {
            acc = acc.add_scaled(*c, f, ring);
        }
        if !acc.is_zero() {
            failures.push(idx);
        }
    }
    Ok(SyzygyReport {
        checked: kernel.vectors.len(),
        failures,
    })
}

/// Compares two bases as canonical text.
pub fn same_basis(a: &[Poly], b: &[Poly], ring: &Ring) -> bool {
    format_basis(a, ring) == format_basis(b, ring)
}
