//! Sparse polynomials over `F_p`.
//!
//! [`Poly`] is a term list sorted strictly descending in the ring's term
//! order, with every coefficient in `[1, p)`. The zero polynomial is the empty
//! list. [`SoaPolySet`] stores many polynomials as flat key and coefficient
//! streams with per-polynomial offsets, the layout symbolic preprocessing
//! streams from.
//!
//! Text grammar (no parentheses, no implicit multiplication):
//!
//! ```text
//! poly   := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := integer | name ['^' integer]
//! ```

use std::cmp::Ordering;

use crate::monomial::{MonKey, Monomial, Ring};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub mon: Monomial,
    pub coeff: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<Term>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    /// Single term; a zero coefficient gives the zero polynomial.
    pub fn monomial(mon: Monomial, coeff: u64) -> Self {
        if coeff == 0 {
            Poly::zero()
        } else {
            Poly {
                terms: vec![Term { mon, coeff }],
            }
        }
    }

    /// Wraps terms that already satisfy the ordering invariant.
    pub fn from_sorted_terms(terms: Vec<Term>) -> Self {
        Poly { terms }
    }

    /// Sorts descending, merges equal monomials mod `p` and drops zeros.
    pub fn normalize(mut terms: Vec<(Monomial, u64)>, ring: &Ring) -> Poly {
        let m = ring.modulus();
        terms.sort_by(|a, b| ring.cmp(&b.0, &a.0));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        let mut iter = terms.into_iter().peekable();
        while let Some((mon, c)) = iter.next() {
            let mut sum = c % m.p();
            while let Some((_, c)) = iter.next_if(|(next, _)| *next == mon) {
                sum = m.add(sum, c % m.p());
            }
            if sum != 0 {
                out.push(Term { mon, coeff: sum });
            }
        }
        Poly { terms: out }
    }

    #[inline]
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_term(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn lm(&self) -> Option<&Monomial> {
        self.terms.first().map(|t| &t.mon)
    }

    pub fn lc(&self) -> Option<u64> {
        self.terms.first().map(|t| t.coeff)
    }

    /// `t * self`; multiplication by a monomial preserves the term order.
    pub fn mul_monomial(&self, t: &Monomial) -> Result<Poly> {
        let terms = self
            .terms
            .iter()
            .map(|term| {
                Ok(Term {
                    mon: term.mon.mul(t)?,
                    coeff: term.coeff,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly { terms })
    }

    pub fn scale(&self, c: u64, ring: &Ring) -> Poly {
        let m = ring.modulus();
        let c = c % m.p();
        if c == 0 {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    mon: t.mon.clone(),
                    coeff: m.mul(t.coeff, c),
                })
                .collect(),
        }
    }

    /// `self + c * g` by a sorted merge.
    pub fn add_scaled(&self, c: u64, g: &Poly, ring: &Ring) -> Poly {
        let m = ring.modulus();
        let c = c % m.p();
        if c == 0 || g.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.len() + g.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < g.terms.len() {
            let a = &self.terms[i];
            let b = &g.terms[j];
            match ring.cmp(&a.mon, &b.mon) {
                Ordering::Greater => {
                    out.push(a.clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(Term {
                        mon: b.mon.clone(),
                        coeff: m.mul(b.coeff, c),
                    });
                    j += 1;
                }
                Ordering::Equal => {
                    let s = m.add(a.coeff, m.mul(b.coeff, c));
                    if s != 0 {
                        out.push(Term {
                            mon: a.mon.clone(),
                            coeff: s,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend(g.terms[j..].iter().map(|b| Term {
            mon: b.mon.clone(),
            coeff: m.mul(b.coeff, c),
        }));
        Poly { terms: out }
    }

    pub fn sub(&self, g: &Poly, ring: &Ring) -> Poly {
        self.add_scaled(ring.p() - 1, g, ring)
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self, ring: &Ring) -> Poly {
        match self.lc() {
            None | Some(1) => self.clone(),
            Some(lc) => self.scale(ring.modulus().inv(lc).expect("nonzero lc"), ring),
        }
    }

    pub fn check_invariants(&self, ring: &Ring) -> Result<()> {
        for t in &self.terms {
            if t.mon.n_vars() != ring.n_vars() {
                return Err(Error::ArityMismatch {
                    expected: ring.n_vars(),
                    found: t.mon.n_vars(),
                });
            }
            if t.coeff == 0 || t.coeff >= ring.p() {
                return Err(Error::PropertyViolation(format!(
                    "coefficient {} outside [1, p)",
                    t.coeff
                )));
            }
        }
        for w in self.terms.windows(2) {
            if ring.cmp(&w[0].mon, &w[1].mon) != Ordering::Greater {
                return Err(Error::PropertyViolation(
                    "terms not strictly descending".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str, ring: &Ring) -> Result<Poly> {
        Parser::new(text, ring).poly()
    }

    /// Text form; coefficients print as residues in `[0, p)`.
    pub fn format(&self, ring: &Ring) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(" + ");
            }
            if t.mon.is_one() {
                s.push_str(&t.coeff.to_string());
            } else if t.coeff == 1 {
                s.push_str(&ring.format_monomial(&t.mon));
            } else {
                s.push_str(&format!("{}*{}", t.coeff, ring.format_monomial(&t.mon)));
            }
        }
        s
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: &'a Ring,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, ring: &'a Ring) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            ring,
        }
    }

    fn err(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn poly(&mut self) -> Result<Poly> {
        let mut terms = Vec::new();
        let mut negative = false;
        match self.peek() {
            Some(b'-') => {
                negative = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            None => return Err(self.err(self.pos, "empty polynomial")),
            _ => {}
        }
        loop {
            let (mon, c) = self.term()?;
            let c = if negative { self.ring.modulus().neg(c) } else { c };
            terms.push((mon, c));
            match self.peek() {
                None => break,
                Some(b'+') => negative = false,
                Some(b'-') => negative = true,
                Some(other) => {
                    return Err(self.err(
                        self.pos,
                        format!("expected `+`, `-` or end, found `{}`", other as char),
                    ))
                }
            }
            self.pos += 1;
        }
        Ok(Poly::normalize(terms, self.ring))
    }

    fn term(&mut self) -> Result<(Monomial, u64)> {
        let m = *self.ring.modulus();
        let mut exps = vec![0u32; self.ring.n_vars()];
        let mut coeff = 1u64;
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let v = self.integer_mod(m.p())?;
                    coeff = m.mul(coeff, v);
                }
                Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                    let name_pos = self.pos;
                    let name = self.ident();
                    let var = self
                        .ring
                        .var_index(name)
                        .ok_or_else(|| Error::UnknownVariable {
                            name: name.to_string(),
                            pos: name_pos,
                        })?;
                    let mut e = 1u64;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.skip_ws();
                        let exp_pos = self.pos;
                        e = self.integer_exact(exp_pos)?;
                    }
                    let total = exps[var] as u64 + e;
                    if total > u16::MAX as u64 {
                        return Err(self.err(name_pos, "exponent overflow"));
                    }
                    exps[var] = total as u32;
                }
                Some(c) => {
                    return Err(self.err(
                        self.pos,
                        format!("expected coefficient or variable, found `{}`", c as char),
                    ))
                }
                None => return Err(self.err(self.pos.max(start), "unexpected end of input")),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let mon = Monomial::new(&exps).map_err(|_| self.err(start, "exponent overflow"))?;
        Ok((mon, coeff))
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii")
    }

    fn digits(&mut self) -> Result<&'a [u8]> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(start, "expected integer"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn integer_mod(&mut self, p: u64) -> Result<u64> {
        let mut v = 0u64;
        for &d in self.digits()? {
            v = (v * 10 + (d - b'0') as u64) % p;
        }
        Ok(v)
    }

    fn integer_exact(&mut self, pos: usize) -> Result<u64> {
        let mut v = 0u64;
        for &d in self.digits()? {
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((d - b'0') as u64))
                .filter(|&v| v <= u16::MAX as u64)
                .ok_or_else(|| self.err(pos, "exponent overflow"))?;
        }
        Ok(v)
    }
}

/// Many polynomials in structure-of-arrays form.
///
/// Segment `i` occupies `offset[i]..offset[i + 1]` of the flat streams, with
/// keys strictly descending. `offset` has one more entry than there are
/// polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoaPolySet {
    mon_key: Vec<MonKey>,
    coeff: Vec<u64>,
    offset: Vec<usize>,
    len: Vec<usize>,
}

impl Default for SoaPolySet {
    fn default() -> Self {
        SoaPolySet {
            mon_key: Vec::new(),
            coeff: Vec::new(),
            offset: vec![0],
            len: Vec::new(),
        }
    }
}

impl SoaPolySet {
    pub fn pack(polys: &[Poly], ring: &Ring) -> SoaPolySet {
        let mut set = SoaPolySet::default();
        for f in polys {
            set.push(f, ring);
        }
        set
    }

    pub fn push(&mut self, f: &Poly, ring: &Ring) {
        for t in f.terms() {
            self.mon_key.push(ring.pack_unchecked(&t.mon));
            self.coeff.push(t.coeff);
        }
        self.len.push(f.len());
        self.offset.push(self.mon_key.len());
    }

    pub fn slice(&self, i: usize, ring: &Ring) -> Result<Poly> {
        if i >= self.len.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len.len(),
            });
        }
        let terms = self
            .keys(i)
            .iter()
            .zip(self.coeffs(i))
            .map(|(k, &c)| {
                Ok(Term {
                    mon: ring.unpack(k)?,
                    coeff: c,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly { terms })
    }

    #[inline]
    pub fn n_polys(&self) -> usize {
        self.len.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len.is_empty()
    }

    #[inline]
    pub fn keys(&self, i: usize) -> &[MonKey] {
        &self.mon_key[self.offset[i]..self.offset[i + 1]]
    }

    #[inline]
    pub fn coeffs(&self, i: usize) -> &[u64] {
        &self.coeff[self.offset[i]..self.offset[i + 1]]
    }

    #[inline]
    pub fn poly_len(&self, i: usize) -> usize {
        self.len[i]
    }

    pub fn lens(&self) -> &[usize] {
        &self.len
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offset
    }

    pub fn all_keys(&self) -> &[MonKey] {
        &self.mon_key
    }

    pub fn all_coeffs(&self) -> &[u64] {
        &self.coeff
    }

    pub fn leading_key(&self, i: usize) -> Option<&MonKey> {
        self.keys(i).first()
    }

    pub fn check_invariants(&self, ring: &Ring) -> Result<()> {
        if self.offset.len() != self.len.len() + 1 || self.offset[0] != 0 {
            return Err(Error::PropertyViolation("offset table shape".into()));
        }
        for i in 0..self.len.len() {
            if self.offset[i + 1] != self.offset[i] + self.len[i] {
                return Err(Error::PropertyViolation(format!(
                    "offset {} is not a prefix sum",
                    i + 1
                )));
            }
            if self.keys(i).windows(2).any(|w| w[0] <= w[1]) {
                return Err(Error::PropertyViolation(format!(
                    "segment {i} keys not strictly descending"
                )));
            }
        }
        if *self.offset.last().unwrap() != self.mon_key.len() || self.coeff.len() != self.mon_key.len()
        {
            return Err(Error::PropertyViolation("stream lengths".into()));
        }
        if self.coeff.iter().any(|&c| c == 0 || c >= ring.p()) {
            return Err(Error::PropertyViolation("coefficient outside [1, p)".into()));
        }
        Ok(())
    }
}
