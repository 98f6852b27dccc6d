//! Deterministic data-parallel primitives.
//!
//! Every primitive splits its input into contiguous chunks according to an
//! [`Exec`] and combines per-chunk results in chunk order, so the output is
//! the same for any lane count and any chunk boundaries. Chunks run on scoped
//! threads once the input is large enough to pay for them.

use std::ops::Range;

use rand::Rng as _;

use crate::monomial::MonKey;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Merge-path partition size for joins.
pub const MERGE_GRAIN: usize = 4096;
const PAR_THRESHOLD: usize = 1 << 13;
const RADIX_BITS: usize = 8;
const RADIX: usize = 1 << RADIX_BITS;

/// Work partitioning: number of lanes and, optionally, a seed that places
/// chunk boundaries at random (possibly empty chunks) instead of evenly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exec {
    lanes: usize,
    jitter: Option<u64>,
}

impl Default for Exec {
    fn default() -> Self {
        Exec::sequential()
    }
}

impl Exec {
    pub fn sequential() -> Self {
        Exec {
            lanes: 1,
            jitter: None,
        }
    }

    pub fn with_lanes(lanes: usize) -> Self {
        Exec {
            lanes: lanes.max(1),
            jitter: None,
        }
    }

    pub fn jittered(self, seed: u64) -> Self {
        Exec {
            jitter: Some(seed),
            ..self
        }
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    /// Chunk boundaries over `0..n`: `lanes + 1` nondecreasing entries from 0
    /// to `n`.
    pub fn partition(&self, n: usize) -> Vec<usize> {
        let k = self.lanes;
        let mut cuts: Vec<usize> = match self.jitter {
            Some(seed) => {
                let mut rng = rng_from_seed(seed ^ n as u64);
                (1..k).map(|_| rng.gen_range(0..=n)).collect()
            }
            None => (1..k).map(|c| n * c / k).collect(),
        };
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(k + 1);
        out.push(0);
        out.extend(cuts);
        out.push(n);
        out
    }

    /// Applies `f` to each chunk of `0..n`, returning results in chunk order.
    pub fn map_chunks<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, Range<usize>) -> T + Sync,
    {
        let bounds = self.partition(n);
        let ranges: Vec<Range<usize>> = bounds.windows(2).map(|w| w[0]..w[1]).collect();
        if self.lanes == 1 || n < PAR_THRESHOLD {
            return ranges.into_iter().enumerate().map(|(c, r)| f(c, r)).collect();
        }
        let f = &f;
        std::thread::scope(|s| {
            let handles: Vec<_> = ranges
                .into_iter()
                .enumerate()
                .map(|(c, r)| s.spawn(move || f(c, r)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    }

    /// Fills disjoint chunks of `out` in place; `f` gets the chunk index, the
    /// chunk's global range and its mutable slice.
    pub fn fill_chunks<T, F>(&self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, Range<usize>, &mut [T]) + Sync,
    {
        let n = out.len();
        let bounds = self.partition(n);
        let mut pieces = Vec::with_capacity(self.lanes);
        let mut rest = out;
        for w in bounds.windows(2) {
            let (head, tail) = rest.split_at_mut(w[1] - w[0]);
            pieces.push((w[0]..w[1], head));
            rest = tail;
        }
        if self.lanes == 1 || n < PAR_THRESHOLD {
            for (c, (r, piece)) in pieces.into_iter().enumerate() {
                f(c, r, piece);
            }
            return;
        }
        let f = &f;
        std::thread::scope(|s| {
            for (c, (r, piece)) in pieces.into_iter().enumerate() {
                s.spawn(move || f(c, r, piece));
            }
        });
    }

    /// Fills variable-length segments: segment `i` is
    /// `out[offsets[i]..offsets[i + 1]]`. Segments are grouped into chunks by
    /// segment index; `f` gets the chunk's segment range and the slice
    /// starting at `offsets[range.start]`. Errors surface in chunk order.
    pub fn fill_segments<T, F>(&self, out: &mut [T], offsets: &[usize], f: F) -> Result<()>
    where
        T: Send,
        F: Fn(Range<usize>, &mut [T]) -> Result<()> + Sync,
    {
        let n_seg = offsets.len().saturating_sub(1);
        let bounds = self.partition(n_seg);
        let mut pieces = Vec::with_capacity(self.lanes);
        let mut rest = out;
        for w in bounds.windows(2) {
            let (head, tail) = rest.split_at_mut(offsets[w[1]] - offsets[w[0]]);
            pieces.push((w[0]..w[1], head));
            rest = tail;
        }
        let total = offsets.last().copied().unwrap_or(0);
        if self.lanes == 1 || total < PAR_THRESHOLD {
            return pieces.into_iter().try_for_each(|(r, piece)| f(r, piece));
        }
        let f = &f;
        let results: Vec<Result<()>> = std::thread::scope(|s| {
            let handles: Vec<_> = pieces
                .into_iter()
                .map(|(r, piece)| s.spawn(move || f(r, piece)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        results.into_iter().collect()
    }
}

/// Keys with an optional parallel payload column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyStream {
    /// Significant words per key.
    pub width: usize,
    pub keys: Vec<MonKey>,
    pub payload: Option<Vec<u64>>,
}

impl KeyStream {
    pub fn new(width: usize, keys: Vec<MonKey>) -> Self {
        KeyStream {
            width,
            keys,
            payload: None,
        }
    }

    pub fn with_payload(width: usize, keys: Vec<MonKey>, payload: Vec<u64>) -> Result<Self> {
        if keys.len() != payload.len() {
            return Err(Error::Precondition(format!(
                "{} keys but {} payload records",
                keys.len(),
                payload.len()
            )));
        }
        Ok(KeyStream {
            width,
            keys,
            payload: Some(payload),
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// `[0, l0, l0 + l1, ...]`, one entry longer than the input.
pub fn exclusive_scan(lengths: &[usize], exec: &Exec) -> Result<Vec<usize>> {
    let sums: Vec<Option<usize>> = exec.map_chunks(lengths.len(), |_, r| {
        lengths[r].iter().try_fold(0usize, |a, &b| a.checked_add(b))
    });
    let mut bases = Vec::with_capacity(sums.len());
    let mut total = 0usize;
    for s in sums {
        bases.push(total);
        total = s
            .and_then(|s| total.checked_add(s))
            .ok_or_else(|| Error::Overflow("prefix sum exceeds 64 bits".into()))?;
    }
    let mut out = vec![0usize; lengths.len() + 1];
    out[lengths.len()] = total;
    exec.fill_chunks(&mut out[..lengths.len()], |c, r, piece| {
        let mut acc = bases[c];
        for (slot, &l) in piece.iter_mut().zip(&lengths[r]) {
            *slot = acc;
            acc += l;
        }
    });
    Ok(out)
}

/// Radix-sort statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SortStats {
    /// Digit passes that moved data.
    pub passes: usize,
    /// Digit positions inspected (`8 * width`).
    pub digits: usize,
}

/// Stable LSD radix sort on 8-bit digits over the stream's significant words.
///
/// Digits whose histogram has a single bucket are skipped.
pub fn radix_sort(stream: &KeyStream, exec: &Exec) -> (KeyStream, SortStats) {
    let n = stream.len();
    let width = stream.width;
    let mut keys = stream.keys.clone();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let mut stats = SortStats {
        passes: 0,
        digits: width * 8,
    };
    let mut keys_tmp = keys.clone();
    let mut perm_tmp = perm.clone();
    for b in 0..width * 8 {
        let hists: Vec<[usize; RADIX]> = exec.map_chunks(n, |_, r| {
            let mut h = [0usize; RADIX];
            for k in &keys[r] {
                h[k.digit(width, b) as usize] += 1;
            }
            h
        });
        let mut totals = [0usize; RADIX];
        for h in &hists {
            for d in 0..RADIX {
                totals[d] += h[d];
            }
        }
        if totals.iter().any(|&t| t == n) {
            continue;
        }
        stats.passes += 1;
        // starts[c][d]: first output slot for digit d from chunk c
        let mut digit_base = [0usize; RADIX];
        let mut acc = 0;
        for d in 0..RADIX {
            digit_base[d] = acc;
            acc += totals[d];
        }
        let mut starts = vec![[0usize; RADIX]; hists.len()];
        let mut running = digit_base;
        for (c, h) in hists.iter().enumerate() {
            starts[c] = running;
            for d in 0..RADIX {
                running[d] += h[d];
            }
        }
        let dests: Vec<Vec<usize>> = exec.map_chunks(n, |c, r| {
            let mut next = starts[c];
            keys[r]
                .iter()
                .map(|k| {
                    let d = k.digit(width, b) as usize;
                    let slot = next[d];
                    next[d] += 1;
                    slot
                })
                .collect()
        });
        for (i, &dst) in dests.iter().flatten().enumerate() {
            keys_tmp[dst] = keys[i];
            perm_tmp[dst] = perm[i];
        }
        std::mem::swap(&mut keys, &mut keys_tmp);
        std::mem::swap(&mut perm, &mut perm_tmp);
    }
    let payload = stream
        .payload
        .as_ref()
        .map(|p| perm.iter().map(|&i| p[i as usize]).collect());
    (
        KeyStream {
            width,
            keys,
            payload,
        },
        stats,
    )
}

/// Collapses runs of equal keys in an ascending stream; `first_index[j]` is
/// the input position of the first occurrence of output key `j`.
pub fn unique_sorted(stream: &KeyStream, exec: &Exec) -> Result<(KeyStream, Vec<usize>)> {
    let keys = &stream.keys;
    if cfg!(debug_assertions) {
        if let Some(i) = keys.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Precondition(format!(
                "unique_sorted input descends at {}",
                i + 1
            )));
        }
    }
    let heads: Vec<bool> = {
        let mut v = vec![false; keys.len()];
        exec.fill_chunks(&mut v, |_, r, piece| {
            for (slot, i) in piece.iter_mut().zip(r) {
                *slot = i == 0 || keys[i] != keys[i - 1];
            }
        });
        v
    };
    let idx: Vec<usize> = (0..keys.len()).collect();
    let first_index = stream_compact(&idx, &heads, exec)?;
    let uniq = first_index.iter().map(|&i| keys[i]).collect();
    let payload = stream
        .payload
        .as_ref()
        .map(|p| first_index.iter().map(|&i| p[i]).collect());
    Ok((
        KeyStream {
            width: stream.width,
            keys: uniq,
            payload,
        },
        first_index,
    ))
}

/// Position of every `segment` key in the strictly ascending `dict`.
pub fn merge_join_index(segment: &[MonKey], dict: &[MonKey], exec: &Exec) -> Result<Vec<usize>> {
    merge_join_index_with_grain(segment, dict, exec, MERGE_GRAIN)
}

/// [`merge_join_index`] with an explicit merge-path grain.
pub fn merge_join_index_with_grain(
    segment: &[MonKey],
    dict: &[MonKey],
    exec: &Exec,
    grain: usize,
) -> Result<Vec<usize>> {
    let (ns, nd) = (segment.len(), dict.len());
    if ns == 0 {
        return Ok(Vec::new());
    }
    let total = ns + nd;
    let grain = grain.max(1);
    let n_parts = total.div_ceil(grain);
    // merge order: on equal keys the dictionary entry comes first
    let split = |d: usize| -> usize {
        let (mut lo, mut hi) = (d.saturating_sub(nd), d.min(ns));
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            let j = d - mid;
            if j >= nd || segment[mid - 1] < dict[j] {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };
    let pieces: Vec<Result<Vec<Vec<usize>>>> = exec.map_chunks(n_parts, |_, parts| {
        parts
            .map(|part| {
                let d0 = part * grain;
                let d1 = ((part + 1) * grain).min(total);
                let (i0, i1) = (split(d0), split(d1));
                let mut j = d0 - i0;
                let mut out = Vec::with_capacity(i1 - i0);
                for key in &segment[i0..i1] {
                    while j < nd && dict[j] <= *key {
                        j += 1;
                    }
                    if j == 0 || dict[j - 1] != *key {
                        return Err(Error::MissingKey(format!("{key:?}")));
                    }
                    out.push(j - 1);
                }
                Ok(out)
            })
            .collect()
    });
    let mut out = Vec::with_capacity(ns);
    for piece in pieces {
        for part in piece? {
            out.extend(part);
        }
    }
    Ok(out)
}

/// Kept items in their original relative order.
pub fn stream_compact<T: Clone + Send + Sync>(
    items: &[T],
    keep: &[bool],
    exec: &Exec,
) -> Result<Vec<T>> {
    if items.len() != keep.len() {
        return Err(Error::Precondition(format!(
            "{} items but {} mask entries",
            items.len(),
            keep.len()
        )));
    }
    let parts: Vec<Vec<T>> = exec.map_chunks(items.len(), |_, r| {
        items[r.clone()]
            .iter()
            .zip(&keep[r])
            .filter(|(_, &k)| k)
            .map(|(x, _)| x.clone())
            .collect()
    });
    let total = parts.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    for p in parts {
        out.extend(p);
    }
    Ok(out)
}
