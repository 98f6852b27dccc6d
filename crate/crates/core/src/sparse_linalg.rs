//! Sparse linear algebra over F_p.
//!
//! Matrices are CSR with standard-domain values; kernels that care about the
//! arithmetic backend convert at their boundaries. Row and column index 0 is
//! the leftmost column, which for batch matrices is the greatest monomial, so
//! a row's leading entry is its smallest column.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng as _;

use crate::bulk::{self, Exec};
use crate::fbsp::LayoutPlan;
use crate::fp_arith::{FieldModulus, Reducer};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::{with_reducer, Error, Result};

/// Largest dimension accepted by [`dense_gauss`].
pub const DENSE_CAP: usize = 512;
pub const DEFAULT_PANEL_WIDTH: usize = 256;
pub const DEFAULT_BLOCK_WIDTH: usize = 4;
pub const DEFAULT_RETRY_BUDGET: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_ind: Vec<u32>,
    val: Vec<u64>,
    modulus: FieldModulus,
}

impl CsrMatrix {
    /// Validates and wraps CSR buffers.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_ind: Vec<u32>,
        val: Vec<u64>,
        modulus: FieldModulus,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::MalformedMatrix(m));
        if row_ptr.len() != n_rows + 1 || row_ptr[0] != 0 {
            return bad("row_ptr shape".into());
        }
        if row_ptr[n_rows] != col_ind.len() || col_ind.len() != val.len() {
            return bad("buffer lengths disagree".into());
        }
        let p = modulus.p();
        for i in 0..n_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return bad(format!("row_ptr decreases at row {i}"));
            }
            let cols = &col_ind[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {i}: columns not strictly ascending"));
            }
            if cols.last().is_some_and(|&c| c as usize >= n_cols) {
                return bad(format!("row {i}: column out of range"));
            }
            if val[row_ptr[i]..row_ptr[i + 1]].iter().any(|&v| v == 0 || v >= p) {
                return bad(format!("row {i}: value outside [1, p)"));
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_ind,
            val,
            modulus,
        })
    }

    /// Builds from dense rows, dropping zeros.
    pub fn from_dense(rows: &[Vec<u64>], n_cols: usize, modulus: FieldModulus) -> Result<Self> {
        let mut row_ptr = vec![0];
        let (mut col_ind, mut val) = (Vec::new(), Vec::new());
        for r in rows {
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch("ragged dense rows".into()));
            }
            for (c, &v) in r.iter().enumerate() {
                let v = v % modulus.p();
                if v != 0 {
                    col_ind.push(c as u32);
                    val.push(v);
                }
            }
            row_ptr.push(col_ind.len());
        }
        CsrMatrix::new(rows.len(), n_cols, row_ptr, col_ind, val, modulus)
    }

    pub fn from_sparse_rows(rows: &[SparseRow], n_cols: usize, modulus: FieldModulus) -> Result<Self> {
        let mut row_ptr = vec![0];
        let (mut col_ind, mut val) = (Vec::new(), Vec::new());
        for r in rows {
            col_ind.extend_from_slice(&r.cols);
            val.extend_from_slice(&r.vals);
            row_ptr.push(col_ind.len());
        }
        CsrMatrix::new(rows.len(), n_cols, row_ptr, col_ind, val, modulus)
    }

    pub fn identity(n: usize, modulus: FieldModulus) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_ind: (0..n as u32).collect(),
            val: vec![1; n],
            modulus,
        }
    }

    pub fn zero(n_rows: usize, n_cols: usize, modulus: FieldModulus) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_ind: Vec::new(),
            val: Vec::new(),
            modulus,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_ind.len()
    }

    pub fn modulus(&self) -> &FieldModulus {
        &self.modulus
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_ind(&self) -> &[u32] {
        &self.col_ind
    }

    pub fn values(&self) -> &[u64] {
        &self.val
    }

    pub fn row(&self, i: usize) -> (&[u32], &[u64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_ind[r.clone()], &self.val[r])
    }

    pub fn sparse_row(&self, i: usize) -> SparseRow {
        let (c, v) = self.row(i);
        SparseRow {
            cols: c.to_vec(),
            vals: v.to_vec(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<u64>> {
        (0..self.n_rows)
            .map(|i| {
                let mut d = vec![0; self.n_cols];
                let (c, v) = self.row(i);
                for (&c, &v) in c.iter().zip(v) {
                    d[c as usize] = v;
                }
                d
            })
            .collect()
    }

    /// `%%MatrixMarket matrix coordinate integer general`, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate integer general\n");
        let _ = writeln!(s, "% modulus {}", self.modulus.p());
        let _ = writeln!(s, "{} {} {}", self.n_rows, self.n_cols, self.nnz());
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&c, &v) in c.iter().zip(v) {
                let _ = writeln!(s, "{} {} {}", i + 1, c + 1, v);
            }
        }
        s
    }

    pub fn from_matrix_market(text: &str, modulus: FieldModulus) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::SystemFile {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.starts_with("%%MatrixMarket matrix coordinate") => {}
            _ => return Err(bad(1, "missing MatrixMarket header")),
        }
        let mut body = lines.filter(|(_, l)| !l.starts_with('%') && !l.trim().is_empty());
        let (ln, size) = body.next().ok_or_else(|| bad(2, "missing size line"))?;
        let dims: Vec<usize> = size
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(ln + 1, "bad size")))
            .collect::<Result<_>>()?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(bad(ln + 1, "size line needs three fields"));
        };
        let mut dense_rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); rows];
        let mut count = 0;
        for (ln, l) in body {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(ln + 1, "entry needs three fields"));
            }
            let i: usize = f[0].parse().map_err(|_| bad(ln + 1, "bad row"))?;
            let j: usize = f[1].parse().map_err(|_| bad(ln + 1, "bad column"))?;
            let v: i64 = f[2].parse().map_err(|_| bad(ln + 1, "bad value"))?;
            if i == 0 || i > rows || j == 0 || j > cols {
                return Err(bad(ln + 1, "index out of range"));
            }
            let v = modulus.from_i64(v);
            if v != 0 {
                dense_rows[i - 1].push(((j - 1) as u32, v));
            }
            count += 1;
        }
        if count != nnz {
            return Err(bad(0, "entry count disagrees with size line"));
        }
        let rows_sparse: Vec<SparseRow> = dense_rows
            .into_iter()
            .map(|mut r| {
                r.sort_unstable();
                let (cols, vals) = r.into_iter().unzip();
                SparseRow { cols, vals }
            })
            .collect();
        CsrMatrix::from_sparse_rows(&rows_sparse, cols, modulus)
    }
}

/// A sparse row with strictly ascending columns and nonzero values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseRow {
    pub cols: Vec<u32>,
    pub vals: Vec<u64>,
}

impl SparseRow {
    pub fn lead(&self) -> Option<u32> {
        self.cols.first().copied()
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn to_dense(&self, n_cols: usize) -> Vec<u64> {
        let mut d = vec![0; n_cols];
        for (&c, &v) in self.cols.iter().zip(&self.vals) {
            d[c as usize] = v;
        }
        d
    }
}

pub fn csr_from_plan(plan: &LayoutPlan, m: &FieldModulus) -> Result<CsrMatrix> {
    CsrMatrix::new(
        plan.n_rows(),
        plan.dict_keys.len(),
        plan.row_ptr.clone(),
        plan.col_ind.clone(),
        plan.val.clone(),
        *m,
    )
}

/// Transpose by counting sort on columns.
pub fn csr_transpose(a: &CsrMatrix) -> CsrMatrix {
    let mut counts = vec![0usize; a.n_cols];
    for &c in &a.col_ind {
        counts[c as usize] += 1;
    }
    let row_ptr = bulk::exclusive_scan(&counts, &Exec::sequential())
        .expect("nnz fits in usize");
    let mut next = row_ptr.clone();
    let mut col_ind = vec![0u32; a.nnz()];
    let mut val = vec![0u64; a.nnz()];
    for i in 0..a.n_rows {
        let (c, v) = a.row(i);
        for (&c, &v) in c.iter().zip(v) {
            let slot = &mut next[c as usize];
            col_ind[*slot] = i as u32;
            val[*slot] = v;
            *slot += 1;
        }
    }
    CsrMatrix {
        n_rows: a.n_cols,
        n_cols: a.n_rows,
        row_ptr,
        col_ind,
        val,
        modulus: a.modulus,
    }
}

/// Dense row-major block of `rows × cols` standard-domain residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseBlock {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl DenseBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseBlock {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_columns(columns: &[Vec<u64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        let mut b = DenseBlock::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                b.data[i * cols + j] = v;
            }
        }
        b
    }

    pub fn random(rows: usize, cols: usize, p: u64, rng: &mut Rng) -> Self {
        DenseBlock {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.gen_range(0..p)).collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

/// `A · X` with lazy accumulation; `b = 1` is SpMV.
pub fn spmm(a: &CsrMatrix, x: &DenseBlock, exec: &Exec) -> Result<DenseBlock> {
    if x.rows != a.n_cols || x.cols == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.n_rows, a.n_cols, x.rows, x.cols
        )));
    }
    let m = a.modulus;
    let data = with_reducer!(m, rd => spmm_with(rd, a, x, exec));
    Ok(DenseBlock {
        rows: a.n_rows,
        cols: x.cols,
        data,
    })
}

fn spmm_with<R: Reducer>(rd: R, a: &CsrMatrix, x: &DenseBlock, exec: &Exec) -> Vec<u64> {
    let b = x.cols;
    let xd: Vec<u64> = x.data.iter().map(|&v| rd.enter(v)).collect();
    let w = rd.window();
    let parts = exec.map_chunks(a.n_rows, |_, range| {
        let mut out = Vec::with_capacity(range.len() * b);
        let mut acc = vec![0u64; b];
        for i in range {
            acc.iter_mut().for_each(|v| *v = 0);
            let (cols, vals) = a.row(i);
            let mut count = 0;
            for (&c, &v) in cols.iter().zip(vals) {
                if count == w {
                    acc.iter_mut().for_each(|s| *s = rd.to_acc(rd.reduce_acc(*s)));
                    count = 0;
                }
                let av = rd.enter(v);
                let xr = &xd[c as usize * b..(c as usize + 1) * b];
                for (s, &xv) in acc.iter_mut().zip(xr) {
                    *s += av * xv;
                }
                count += 1;
            }
            out.extend(acc.iter().map(|&s| rd.leave(rd.reduce_acc(s))));
        }
        out
    });
    parts.concat()
}

pub fn spmv(a: &CsrMatrix, x: &[u64]) -> Result<Vec<u64>> {
    let blk = DenseBlock {
        rows: x.len(),
        cols: 1,
        data: x.to_vec(),
    };
    Ok(spmm(a, &blk, &Exec::sequential())?.data)
}

/// Output of [`psge_reduce`].
///
/// Rows are fully reduced and monic. `pivot_rows` are the rows whose leading
/// column is the leading column of some input row (`pivot_cols` lists those
/// columns); `nonpivot_rows` are the rows whose leading column is new. Both
/// lists are ordered by leading column, and `rank` counts both.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EchelonResult {
    pub pivot_cols: Vec<u32>,
    pub pivot_rows: Vec<SparseRow>,
    pub nonpivot_rows: Vec<SparseRow>,
    pub zero_row_count: usize,
    pub rank: usize,
    pub fill_generated: usize,
}

impl EchelonResult {
    /// Every reduced row, ordered by leading column.
    pub fn all_rows(&self) -> Vec<&SparseRow> {
        let mut rows: Vec<&SparseRow> =
            self.pivot_rows.iter().chain(&self.nonpivot_rows).collect();
        rows.sort_by_key(|r| r.lead());
        rows
    }
}

/// Sparse accumulator over `n` columns in reducer-accumulator scale.
struct Spa<R: Reducer> {
    rd: R,
    acc: Vec<u64>,
    count: Vec<u32>,
    state: Vec<u8>, // 0 untouched, 1 from the loaded row, 2 fill
    touched: Vec<u32>,
}

impl<R: Reducer> Spa<R> {
    fn new(rd: R, n: usize) -> Self {
        Spa {
            rd,
            acc: vec![0; n],
            count: vec![0; n],
            state: vec![0; n],
            touched: Vec::new(),
        }
    }

    fn load(&mut self, cols: &[u32], vals: &[u64]) {
        for (&c, &v) in cols.iter().zip(vals) {
            let c = c as usize;
            self.acc[c] = self.rd.to_acc(v);
            self.state[c] = 1;
            self.touched.push(c as u32);
        }
    }

    /// `acc += f * row` with `f` already in the domain.
    fn axpy(&mut self, f: u64, cols: &[u32], vals: &[u64]) {
        let w = self.rd.window();
        for (&c, &v) in cols.iter().zip(vals) {
            let c = c as usize;
            if self.state[c] == 0 {
                self.state[c] = 2;
                self.acc[c] = 0;
                self.count[c] = 0;
                self.touched.push(c as u32);
            }
            if self.count[c] == w {
                self.acc[c] = self.rd.to_acc(self.rd.reduce_acc(self.acc[c]));
                self.count[c] = 0;
            }
            self.acc[c] += f * v;
            self.count[c] += 1;
        }
    }

    /// Drains into a sparse row; returns the row and its fill count.
    fn extract(&mut self) -> (SparseRow, usize) {
        self.touched.sort_unstable();
        let mut row = SparseRow::default();
        let mut fill = 0;
        for &c in &self.touched {
            let ci = c as usize;
            let v = self.rd.reduce_acc(self.acc[ci]);
            if v != 0 {
                row.cols.push(c);
                row.vals.push(v);
                fill += (self.state[ci] == 2) as usize;
            }
            self.state[ci] = 0;
            self.count[ci] = 0;
            self.acc[ci] = 0;
        }
        self.touched.clear();
        (row, fill)
    }
}

fn domain_inv<R: Reducer>(rd: &R, m: &FieldModulus, x: u64) -> u64 {
    rd.enter(m.inv(rd.leave(x)).expect("nonzero pivot"))
}

/// Panel-structured Gaussian elimination to reduced row echelon form.
///
/// Columns are processed in panels of `panel_width`. Inside a panel the
/// candidate rows are eliminated densely; the pivot is the candidate with the
/// fewest nonzeros (lowest index on ties). Updates to columns right of the
/// panel are deferred and applied once per row through a sparse accumulator,
/// after which the surviving rows are re-compressed and queued for later
/// panels.
pub fn psge_reduce(a: &CsrMatrix, panel_width: usize) -> Result<EchelonResult> {
    if panel_width == 0 {
        return Err(Error::Precondition("panel width must be positive".into()));
    }
    let m = a.modulus;
    Ok(with_reducer!(m, rd => psge_with(rd, &m, a, panel_width)))
}

struct PanelPivot {
    col: u32,
    slot: usize,
    scale: u64,
}

fn psge_with<R: Reducer>(rd: R, m: &FieldModulus, a: &CsrMatrix, w: usize) -> EchelonResult {
    let n = a.n_cols;
    let mut rows: Vec<SparseRow> = (0..a.n_rows)
        .map(|i| {
            let (c, v) = a.row(i);
            SparseRow {
                cols: c.to_vec(),
                vals: v.iter().map(|&x| rd.enter(x)).collect(),
            }
        })
        .collect();
    let input_leads: BTreeSet<u32> = rows.iter().filter_map(|r| r.lead()).collect();
    let mut pending: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].is_empty()).collect();
    let mut spa = Spa::new(rd, n);
    let mut pivots: Vec<SparseRow> = Vec::new();
    let mut fill = 0usize;

    while let Some(min_lead) = pending.iter().map(|&i| rows[i].cols[0]).min() {
        let c0 = min_lead as usize / w * w;
        let c1 = (c0 + w).min(n);
        let (active, rest): (Vec<usize>, Vec<usize>) = pending
            .iter()
            .partition(|&&i| (rows[i].cols[0] as usize) < c1);
        pending = rest;

        // dense panel part + sparse trailing part
        let mut dense: Vec<Vec<u64>> = Vec::with_capacity(active.len());
        let mut trail: Vec<SparseRow> = Vec::with_capacity(active.len());
        for &i in &active {
            let r = &rows[i];
            let split = r.cols.partition_point(|&c| (c as usize) < c1);
            let mut d = vec![0u64; c1 - c0];
            for (&c, &v) in r.cols[..split].iter().zip(&r.vals[..split]) {
                d[c as usize - c0] = v;
            }
            dense.push(d);
            trail.push(SparseRow {
                cols: r.cols[split..].to_vec(),
                vals: r.vals[split..].to_vec(),
            });
        }
        let nnz0: Vec<usize> = active.iter().map(|&i| rows[i].len()).collect();
        let mut is_pivot = vec![false; active.len()];
        let mut mult: Vec<Vec<(usize, u64)>> = vec![Vec::new(); active.len()];
        let mut panel_pivots: Vec<PanelPivot> = Vec::new();

        for c in c0..c1 {
            let lc = c - c0;
            let cands: Vec<usize> = (0..active.len())
                .filter(|&s| !is_pivot[s] && dense[s][lc] != 0)
                .collect();
            let Some(&ps) = cands
                .iter()
                .min_by_key(|&&s| (dense[s].iter().filter(|&&v| v != 0).count() + trail[s].len(), nnz0[s], s))
            else {
                continue;
            };
            let scale = domain_inv(&rd, m, dense[ps][lc]);
            for v in dense[ps][lc..].iter_mut() {
                *v = rd.mul(*v, scale);
            }
            is_pivot[ps] = true;
            let k = panel_pivots.len();
            panel_pivots.push(PanelPivot {
                col: c as u32,
                slot: ps,
                scale,
            });
            let prow = dense[ps].clone();
            for &s in cands.iter().filter(|&&s| s != ps) {
                let f = dense[s][lc];
                let nf = rd.neg(f);
                for (x, &pv) in dense[s][lc..].iter_mut().zip(&prow[lc..]) {
                    if pv != 0 {
                        *x = rd.add(*x, rd.mul(nf, pv));
                    }
                }
                mult[s].push((k, f));
            }
        }

        // deferred trailing updates, pivots first in pivot order
        let mut final_trail: Vec<SparseRow> = Vec::with_capacity(panel_pivots.len());
        for pp in &panel_pivots {
            let s = pp.slot;
            let t = if mult[s].is_empty() {
                std::mem::take(&mut trail[s])
            } else {
                spa.load(&trail[s].cols, &trail[s].vals);
                for &(k, f) in &mult[s] {
                    let tk = &final_trail[k];
                    spa.axpy(rd.neg(f), &tk.cols, &tk.vals);
                }
                let (row, f) = spa.extract();
                fill += f;
                row
            };
            let scaled = SparseRow {
                vals: t.vals.iter().map(|&v| rd.mul(v, pp.scale)).collect(),
                cols: t.cols,
            };
            final_trail.push(scaled);
        }
        for (k, pp) in panel_pivots.iter().enumerate() {
            let mut row = SparseRow::default();
            for (lc, &v) in dense[pp.slot].iter().enumerate() {
                if v != 0 {
                    row.cols.push((c0 + lc) as u32);
                    row.vals.push(v);
                }
            }
            row.cols.extend_from_slice(&final_trail[k].cols);
            row.vals.extend_from_slice(&final_trail[k].vals);
            debug_assert_eq!(row.lead(), Some(pp.col));
            pivots.push(row);
        }
        for s in (0..active.len()).filter(|&s| !is_pivot[s]) {
            debug_assert!(dense[s].iter().all(|&v| v == 0));
            let t = if mult[s].is_empty() {
                std::mem::take(&mut trail[s])
            } else {
                spa.load(&trail[s].cols, &trail[s].vals);
                for &(k, f) in &mult[s] {
                    let tk = &final_trail[k];
                    spa.axpy(rd.neg(f), &tk.cols, &tk.vals);
                }
                let (row, f) = spa.extract();
                fill += f;
                row
            };
            let i = active[s];
            rows[i] = t;
            if !rows[i].is_empty() {
                pending.push(i);
            }
        }
        pending.sort_unstable();
    }

    // back-substitution: clear every pivot column from the other rows
    pivots.sort_by_key(|r| r.cols[0]);
    let lead_pos: std::collections::HashMap<u32, usize> =
        pivots.iter().enumerate().map(|(k, r)| (r.cols[0], k)).collect();
    for k in (0..pivots.len()).rev() {
        let hits: Vec<(usize, u64)> = pivots[k]
            .cols
            .iter()
            .zip(&pivots[k].vals)
            .skip(1)
            .filter_map(|(c, &v)| lead_pos.get(c).map(|&j| (j, v)))
            .collect();
        if hits.is_empty() {
            continue;
        }
        spa.load(&pivots[k].cols, &pivots[k].vals);
        for (j, v) in hits {
            let pj = &pivots[j];
            spa.axpy(rd.neg(v), &pj.cols, &pj.vals);
        }
        pivots[k] = spa.extract().0;
    }

    let mut out = EchelonResult {
        rank: pivots.len(),
        zero_row_count: a.n_rows - pivots.len(),
        fill_generated: fill,
        ..Default::default()
    };
    for mut r in pivots {
        r.vals.iter_mut().for_each(|v| *v = rd.leave(*v));
        let lead = r.cols[0];
        if input_leads.contains(&lead) {
            out.pivot_cols.push(lead);
            out.pivot_rows.push(r);
        } else {
            out.nonpivot_rows.push(r);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseEchelon {
    pub rank: usize,
    /// Reduced row echelon form: the `rank` nonzero rows first.
    pub rref: Vec<Vec<u64>>,
    pub pivot_cols: Vec<usize>,
}

/// Exact reduced row echelon form of a dense matrix (dimensions at most
/// [`DENSE_CAP`]).
pub fn dense_gauss(rows: &[Vec<u64>], n_cols: usize, m: &FieldModulus) -> Result<DenseEchelon> {
    if rows.len() > DENSE_CAP || n_cols > DENSE_CAP {
        return Err(Error::DenseCap {
            rows: rows.len(),
            cols: n_cols,
        });
    }
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::DimensionMismatch("ragged dense rows".into()));
    }
    let p = m.p();
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v % p).collect())
        .collect();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for c in 0..n_cols {
        let Some(pr) = (rank..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, pr);
        let inv = m.inv(a[rank][c])?;
        for v in a[rank].iter_mut() {
            *v = m.mul(*v, inv);
        }
        let prow = a[rank].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = m.neg(row[c]);
                for (x, &pv) in row.iter_mut().zip(&prow) {
                    *x = m.add(*x, m.mul(f, pv));
                }
            }
        }
        pivot_cols.push(c);
        rank += 1;
    }
    Ok(DenseEchelon {
        rank,
        rref: a,
        pivot_cols,
    })
}

/// Basis of `{v : Mv = 0}` from the reduced echelon form.
pub fn dense_nullspace(rows: &[Vec<u64>], n_cols: usize, m: &FieldModulus) -> Result<Vec<Vec<u64>>> {
    let e = dense_gauss(rows, n_cols, m)?;
    let pivots: BTreeSet<usize> = e.pivot_cols.iter().copied().collect();
    Ok((0..n_cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0u64; n_cols];
            v[free] = 1;
            for (r, &pc) in e.pivot_cols.iter().enumerate() {
                v[pc] = m.neg(e.rref[r][free]);
            }
            v
        })
        .collect())
}

/// Minimal linear recurrence found by [`berlekamp_massey`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRecurrence {
    /// `C(x) = 1 + c_1 x + ... + c_L x^L`, low to high, with
    /// `s_k + c_1 s_{k-1} + ... + c_L s_{k-L} = 0` for `k >= L`.
    pub connection: Vec<u64>,
    pub length: usize,
}

impl LinearRecurrence {
    /// Monic generator `x^L C(1/x)`, low to high.
    pub fn generator(&self) -> Vec<u64> {
        let mut g = vec![0u64; self.length + 1];
        for (i, &c) in self.connection.iter().enumerate().take(self.length + 1) {
            g[self.length - i] = c;
        }
        g
    }

    pub fn annihilates(&self, seq: &[u64], m: &FieldModulus) -> bool {
        (self.length..seq.len()).all(|k| {
            let mut s = 0;
            for (i, &c) in self.connection.iter().enumerate() {
                if i <= k {
                    s = m.add(s, m.mul(c, seq[k - i]));
                }
            }
            s == 0
        })
    }
}

pub fn berlekamp_massey(seq: &[u64], m: &FieldModulus) -> LinearRecurrence {
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let (mut l, mut shift, mut bd) = (0usize, 1usize, 1u64);
    for k in 0..seq.len() {
        let mut d = seq[k] % m.p();
        for i in 1..=l.min(c.len() - 1) {
            d = m.add(d, m.mul(c[i], seq[k - i]));
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = m.mul(d, m.inv(bd).expect("nonzero discrepancy"));
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, 0);
        }
        for (i, &bv) in b.iter().enumerate() {
            c[i + shift] = m.sub(c[i + shift], m.mul(coef, bv));
        }
        if 2 * l <= k {
            l = k + 1 - l;
            b = prev;
            bd = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.resize(l + 1, 0);
    LinearRecurrence {
        connection: c,
        length: l,
    }
}

/// Dense polynomial helpers over F_p, low to high.
pub mod upoly {
    use crate::fp_arith::FieldModulus;

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn mul(a: &[u64], b: &[u64], m: &FieldModulus) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = m.add(out[i + j], m.mul(x, y));
            }
        }
        trim(out)
    }

    pub fn divrem(a: &[u64], b: &[u64], m: &FieldModulus) -> (Vec<u64>, Vec<u64>) {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        assert!(!b.is_empty(), "division by zero polynomial");
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let inv = m.inv(*b.last().unwrap()).expect("nonzero leading coefficient");
        let mut q = vec![0u64; r.len() - b.len() + 1];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let f = m.mul(*r.last().unwrap(), inv);
            q[shift] = f;
            for (i, &bv) in b.iter().enumerate() {
                r[i + shift] = m.sub(r[i + shift], m.mul(f, bv));
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn monic(a: &[u64], m: &FieldModulus) -> Vec<u64> {
        let a = trim(a.to_vec());
        match a.last() {
            None => a,
            Some(&lc) => {
                let inv = m.inv(lc).expect("nonzero");
                a.iter().map(|&v| m.mul(v, inv)).collect()
            }
        }
    }

    pub fn gcd(a: &[u64], b: &[u64], m: &FieldModulus) -> Vec<u64> {
        let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
        while !y.is_empty() {
            let r = divrem(&x, &y, m).1;
            x = y;
            y = r;
        }
        monic(&x, m)
    }

    pub fn lcm(a: &[u64], b: &[u64], m: &FieldModulus) -> Vec<u64> {
        let g = gcd(a, b, m);
        let (q, _) = divrem(a, &g, m);
        monic(&mul(&q, b, m), m)
    }
}

/// Black-box square operator.
trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DenseBlock) -> Result<DenseBlock>;
}

struct SquareOp<'a> {
    a: &'a CsrMatrix,
    exec: &'a Exec,
}

impl Operator for SquareOp<'_> {
    fn dim(&self) -> usize {
        self.a.n_rows
    }
    fn apply(&self, x: &DenseBlock) -> Result<DenseBlock> {
        spmm(self.a, x, self.exec)
    }
}

/// `Aᵀ D A` for a random nonzero diagonal `D`.
struct GramOp<'a> {
    a: &'a CsrMatrix,
    at: CsrMatrix,
    d: Vec<u64>,
    exec: &'a Exec,
}

impl Operator for GramOp<'_> {
    fn dim(&self) -> usize {
        self.a.n_cols
    }
    fn apply(&self, x: &DenseBlock) -> Result<DenseBlock> {
        let m = self.a.modulus;
        let mut y = spmm(self.a, x, self.exec)?;
        for i in 0..y.rows {
            for j in 0..y.cols {
                let v = &mut y.data[i * y.cols + j];
                *v = m.mul(*v, self.d[i]);
            }
        }
        spmm(&self.at, &y, self.exec)
    }
}

fn apply_vec(op: &dyn Operator, v: &[u64]) -> Result<Vec<u64>> {
    Ok(op
        .apply(&DenseBlock {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        })?
        .data)
}

/// `f(B) u` by Horner's rule.
fn poly_apply(op: &dyn Operator, f: &[u64], u: &[u64], m: &FieldModulus) -> Result<Vec<u64>> {
    let mut y = vec![0u64; u.len()];
    for &c in f.iter().rev() {
        y = apply_vec(op, &y)?;
        for (yi, &ui) in y.iter_mut().zip(u) {
            *yi = m.add(*yi, m.mul(c, ui));
        }
    }
    Ok(y)
}

/// Projected Krylov sequences `w_j · B^k u_j`, `k < len`, for every column.
fn krylov_sequences(
    op: &dyn Operator,
    u: &DenseBlock,
    w: &DenseBlock,
    len: usize,
    m: &FieldModulus,
) -> Result<Vec<Vec<u64>>> {
    let b = u.cols;
    let mut seqs = vec![Vec::with_capacity(len); b];
    let mut v = u.clone();
    for k in 0..len {
        for (j, seq) in seqs.iter_mut().enumerate() {
            let s = (0..v.rows).fold(0, |s, i| m.add(s, m.mul(v.get(i, j), w.get(i, j))));
            seq.push(s);
        }
        if k + 1 < len {
            v = op.apply(&v)?;
        }
    }
    Ok(seqs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WiedemannMode {
    Minpoly,
    RightKernel,
}

#[derive(Debug, Clone)]
pub struct WiedemannConfig {
    pub seed: u64,
    pub block_width: usize,
    /// Failed draws tolerated before giving up.
    pub retry_budget: u32,
    /// Consecutive draws that add nothing new before stopping.
    pub stall_rounds: u32,
    pub max_vectors: usize,
    pub exec: Exec,
}

impl WiedemannConfig {
    pub fn new(seed: u64) -> Self {
        WiedemannConfig {
            seed,
            block_width: DEFAULT_BLOCK_WIDTH,
            retry_budget: DEFAULT_RETRY_BUDGET,
            stall_rounds: 3,
            max_vectors: usize::MAX,
            exec: Exec::sequential(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelBasis {
    pub side: Side,
    pub vectors: Vec<Vec<u64>>,
    pub dimension_found: usize,
    /// Seeds of every randomized draw, for replay.
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WiedemannOutput {
    /// Monic, low to high; annihilates every probed start vector.
    Minpoly { poly: Vec<u64>, seeds: Vec<u64> },
    Kernel(KernelBasis),
}

/// Wiedemann driver. Minimal polynomials need a square `A`; right kernels of
/// rectangular `A` are sought through `Aᵀ D A` and every candidate is checked
/// against `A` itself.
pub fn wiedemann_solve(a: &CsrMatrix, mode: WiedemannMode, cfg: &WiedemannConfig) -> Result<WiedemannOutput> {
    if cfg.block_width == 0 {
        return Err(Error::Precondition("block width must be positive".into()));
    }
    match mode {
        WiedemannMode::Minpoly => {
            if a.n_rows != a.n_cols {
                return Err(Error::DimensionMismatch("minimal polynomial needs a square matrix".into()));
            }
            wiedemann_minpoly(&SquareOp { a, exec: &cfg.exec }, &a.modulus, cfg)
        }
        WiedemannMode::RightKernel => Ok(WiedemannOutput::Kernel(right_kernel_wiedemann(a, cfg)?)),
    }
}

fn wiedemann_minpoly(op: &dyn Operator, m: &FieldModulus, cfg: &WiedemannConfig) -> Result<WiedemannOutput> {
    let n = op.dim();
    let mut seeds = Vec::new();
    for attempt in 0..cfg.retry_budget {
        let seed = derive_seed(cfg.seed, attempt as u64);
        seeds.push(seed);
        let mut rng = rng_from_seed(seed);
        let u = DenseBlock::random(n, cfg.block_width, m.p(), &mut rng);
        let w = DenseBlock::random(n, cfg.block_width, m.p(), &mut rng);
        let seqs = krylov_sequences(op, &u, &w, 2 * n + 2, m)?;
        let mut f = vec![1u64];
        for s in &seqs {
            f = upoly::lcm(&f, &berlekamp_massey(s, m).generator(), m);
        }
        let ok = (0..u.cols).try_fold(true, |ok, j| {
            Ok::<_, Error>(ok && poly_apply(op, &f, &u.column(j), m)?.iter().all(|&v| v == 0))
        })?;
        if ok {
            return Ok(WiedemannOutput::Minpoly { poly: f, seeds });
        }
    }
    Err(Error::ProbabilisticFailure {
        attempts: cfg.retry_budget as usize,
        seeds,
    })
}

/// Incremental echelon basis used to test linear independence.
struct IndepSet {
    m: FieldModulus,
    rows: Vec<(usize, Vec<u64>)>,
}

impl IndepSet {
    fn insert(&mut self, v: &[u64]) -> bool {
        let mut x = v.to_vec();
        for (pc, r) in &self.rows {
            if x[*pc] != 0 {
                let f = self.m.neg(x[*pc]);
                for (xi, &ri) in x.iter_mut().zip(r) {
                    *xi = self.m.add(*xi, self.m.mul(f, ri));
                }
            }
        }
        let Some(pc) = x.iter().position(|&v| v != 0) else {
            return false;
        };
        let inv = self.m.inv(x[pc]).expect("nonzero");
        x.iter_mut().for_each(|v| *v = self.m.mul(*v, inv));
        self.rows.push((pc, x));
        true
    }
}

enum Insert {
    /// The image was independent and is now a pivot.
    Image,
    /// The image reduced to zero; the matching preimage combination.
    Kernel(Vec<u64>),
    /// Image and preimage both reduced to zero.
    Dependent,
}

/// Echelon form of images `A y` that carries each preimage `y` along, so a
/// vanishing image exposes an exact kernel vector.
struct ImageEchelon {
    m: FieldModulus,
    rows: Vec<(usize, Vec<u64>, Vec<u64>)>,
}

impl ImageEchelon {
    fn insert(&mut self, mut image: Vec<u64>, mut pre: Vec<u64>) -> Insert {
        let m = self.m;
        for (pc, r, rp) in &self.rows {
            if image[*pc] != 0 {
                let f = m.neg(image[*pc]);
                for (x, &v) in image.iter_mut().zip(r) {
                    *x = m.add(*x, m.mul(f, v));
                }
                for (x, &v) in pre.iter_mut().zip(rp) {
                    *x = m.add(*x, m.mul(f, v));
                }
            }
        }
        match image.iter().position(|&v| v != 0) {
            Some(pc) => {
                let inv = m.inv(image[pc]).expect("nonzero");
                image.iter_mut().for_each(|v| *v = m.mul(*v, inv));
                pre.iter_mut().for_each(|v| *v = m.mul(*v, inv));
                self.rows.push((pc, image, pre));
                Insert::Image
            }
            None if pre.iter().any(|&v| v != 0) => Insert::Kernel(pre),
            None => Insert::Dependent,
        }
    }
}

fn right_kernel_wiedemann(a: &CsrMatrix, cfg: &WiedemannConfig) -> Result<KernelBasis> {
    let m = a.modulus;
    let n = a.n_cols;
    let mut drng = rng_from_seed(derive_seed(cfg.seed, u64::MAX));
    let gram;
    let square;
    let op: &dyn Operator = if a.n_rows == a.n_cols {
        square = SquareOp { a, exec: &cfg.exec };
        &square
    } else {
        gram = GramOp {
            a,
            at: csr_transpose(a),
            d: (0..a.n_rows).map(|_| drng.gen_range(1..m.p())).collect(),
            exec: &cfg.exec,
        };
        &gram
    };
    let mut basis = KernelBasis {
        side: Side::Right,
        vectors: Vec::new(),
        dimension_found: 0,
        seeds: Vec::new(),
    };
    if n == 0 {
        return Ok(basis);
    }
    let mut indep = IndepSet { m, rows: Vec::new() };
    let mut images = ImageEchelon { m, rows: Vec::new() };
    let (mut stalled, mut failures) = (0u32, 0u32);
    let mut round = 0u64;
    while stalled < cfg.stall_rounds && basis.vectors.len() < cfg.max_vectors.min(n) {
        let seed = derive_seed(cfg.seed, round);
        round += 1;
        basis.seeds.push(seed);
        let mut rng = rng_from_seed(seed);
        let u = DenseBlock::random(n, cfg.block_width, m.p(), &mut rng);
        let w = DenseBlock::random(n, cfg.block_width, m.p(), &mut rng);
        let seqs = krylov_sequences(op, &u, &w, 2 * n + 2, &m)?;
        let (mut progress, mut degenerate) = (0, 0);
        for (j, s) in seqs.iter().enumerate() {
            let g = berlekamp_massey(s, &m).generator();
            let k = g.iter().position(|&c| c != 0).unwrap_or(0);
            if k == 0 {
                continue; // no kernel component seen from this start vector
            }
            // y = q(B) u with g = x^k q, so y lies in ker B^k when g is right
            let y = poly_apply(op, &g[k..], &u.column(j), &m)?;
            let mut t = y.clone();
            for _ in 0..k {
                t = apply_vec(op, &t)?;
            }
            if y.iter().all(|&v| v == 0) || t.iter().any(|&v| v != 0) {
                degenerate += 1;
                continue;
            }
            match images.insert(spmv(a, &y)?, y) {
                Insert::Image => progress += 1,
                Insert::Kernel(v) => {
                    if indep.insert(&v) {
                        basis.vectors.push(v);
                        progress += 1;
                        if basis.vectors.len() >= cfg.max_vectors {
                            break;
                        }
                    }
                }
                Insert::Dependent => {}
            }
        }
        if degenerate == seqs.len() {
            failures += 1;
            if failures > cfg.retry_budget {
                return Err(Error::ProbabilisticFailure {
                    attempts: failures as usize,
                    seeds: basis.seeds,
                });
            }
            continue;
        }
        stalled = if progress == 0 { stalled + 1 } else { 0 };
    }
    basis.dimension_found = basis.vectors.len();
    Ok(basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelEngine {
    /// Dense below [`DENSE_CAP`], Wiedemann above.
    #[default]
    Auto,
    Dense,
    Wiedemann,
}

/// Up to `count` independent `v` with `vᵀA = 0`, each checked by SpMV on `Aᵀ`.
pub fn left_kernel(a: &CsrMatrix, count: usize, seed: u64, engine: KernelEngine) -> Result<KernelBasis> {
    left_kernel_with(a, count, engine, &WiedemannConfig::new(seed))
}

pub fn left_kernel_with(
    a: &CsrMatrix,
    count: usize,
    engine: KernelEngine,
    cfg: &WiedemannConfig,
) -> Result<KernelBasis> {
    if count == 0 {
        return Err(Error::Precondition("count must be positive".into()));
    }
    let at = csr_transpose(a);
    let m = a.modulus;
    let dense = match engine {
        KernelEngine::Dense => true,
        KernelEngine::Wiedemann => false,
        KernelEngine::Auto => a.n_rows.max(a.n_cols) <= DENSE_CAP,
    };
    let mut basis = if dense {
        let mut vectors = dense_nullspace(&at.to_dense(), at.n_cols, &m)?;
        vectors.truncate(count);
        KernelBasis {
            side: Side::Left,
            dimension_found: vectors.len(),
            vectors,
            seeds: Vec::new(),
        }
    } else {
        let cfg = WiedemannConfig {
            max_vectors: count,
            ..cfg.clone()
        };
        let mut b = right_kernel_wiedemann(&at, &cfg)?;
        b.side = Side::Left;
        b
    };
    for v in &basis.vectors {
        if spmv(&at, v)?.iter().any(|&x| x != 0) {
            return Err(Error::PropertyViolation("left kernel vector fails vᵀA = 0".into()));
        }
    }
    basis.dimension_found = basis.vectors.len();
    Ok(basis)
}
