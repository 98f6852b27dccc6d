//! Monomials, term orders and packed order-refining keys.
//!
//! A [`MonKey`] is a fixed array of 64-bit words compared lexicographically,
//! most significant word first. Its layout is one 32-bit degree lane followed
//! by `n` 16-bit exponent lanes, packed big-endian:
//!
//! | order   | degree lane | lane `i` (0-based)            |
//! |---------|-------------|-------------------------------|
//! | grevlex | yes         | `0xFFFF - alpha[n - 1 - i]`   |
//! | deglex  | yes         | `alpha[i]`                    |
//! | lex     | no          | `alpha[i]`                    |
//!
//! With this layout, `u < v` in the term order iff `key(u) < key(v)`, and the
//! map is injective, so sorting keys as integers sorts monomials.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;

use crate::fp_arith::FieldModulus;
use crate::{Error, Result};

pub const MAX_VARS: usize = 32;
pub const MAX_KEY_WORDS: usize = 9;
const DEGREE_BITS: usize = 32;
const LANE_BITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermOrder {
    Grevlex,
    Deglex,
    Lex,
}

impl TermOrder {
    pub fn name(self) -> &'static str {
        match self {
            TermOrder::Grevlex => "grevlex",
            TermOrder::Deglex => "deglex",
            TermOrder::Lex => "lex",
        }
    }
}

impl std::str::FromStr for TermOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grevlex" => Ok(TermOrder::Grevlex),
            "deglex" => Ok(TermOrder::Deglex),
            "lex" => Ok(TermOrder::Lex),
            other => Err(Error::InvalidRing(format!("unknown term order `{other}`"))),
        }
    }
}

/// An exponent vector with cached total degree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u16>,
    degree: u32,
}

impl Monomial {
    pub fn new(exps: &[u32]) -> Result<Self> {
        let mut out = Vec::with_capacity(exps.len());
        for &e in exps {
            out.push(u16::try_from(e).map_err(|_| Error::LaneOverflow)?);
        }
        Ok(Self::from_exponents(out))
    }

    pub fn from_exponents(exps: Vec<u16>) -> Self {
        let degree = exps.iter().map(|&e| e as u32).sum();
        Monomial { exps, degree }
    }

    pub fn one(n_vars: usize) -> Self {
        Monomial {
            exps: vec![0; n_vars],
            degree: 0,
        }
    }

    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut exps = vec![0; n_vars];
        exps[i] = 1;
        Monomial { exps, degree: 1 }
    }

    #[inline]
    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    fn check_arity(&self, other: &Monomial) -> Result<()> {
        if self.exps.len() != other.exps.len() {
            return Err(Error::ArityMismatch {
                expected: self.exps.len(),
                found: other.exps.len(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial> {
        self.check_arity(other)?;
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(&a, &b)| a.checked_add(b).ok_or(Error::LaneOverflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(Monomial {
            exps,
            degree: self.degree + other.degree,
        })
    }

    pub fn lcm(&self, other: &Monomial) -> Result<Monomial> {
        self.check_arity(other)?;
        Ok(Monomial::from_exponents(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        ))
    }

    /// `self | other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.len() == other.exps.len()
            && self.degree <= other.degree
            && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `self / other`; fails unless `other | self`.
    pub fn div(&self, other: &Monomial) -> Result<Monomial> {
        self.check_arity(other)?;
        if !other.divides(self) {
            return Err(Error::NotDivisible);
        }
        Ok(Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a - b).collect(),
            degree: self.degree - other.degree,
        })
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps
            .iter()
            .zip(&other.exps)
            .all(|(&a, &b)| a == 0 || b == 0)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mon{:?}", self.exps)
    }
}

/// Packed monomial key. Unused trailing words are zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MonKey(pub [u64; MAX_KEY_WORDS]);

impl MonKey {
    #[inline]
    pub fn words(&self) -> &[u64; MAX_KEY_WORDS] {
        &self.0
    }

    /// Byte `b` counting from the least significant end of a `width`-word key.
    #[inline]
    pub fn digit(&self, width: usize, b: usize) -> u8 {
        let word = width - 1 - b / 8;
        (self.0[word] >> ((b % 8) * 8)) as u8
    }
}

impl fmt::Debug for MonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&w| w != 0).unwrap_or(0);
        write!(f, "Key[")?;
        for (i, w) in self.0[..=last].iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{w:016x}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for MonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `F_p[x_1, ..., x_n]` with a fixed term order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    var_names: Vec<String>,
    order: TermOrder,
    modulus: FieldModulus,
}

impl Ring {
    pub fn new<S: Into<String>>(
        var_names: impl IntoIterator<Item = S>,
        order: TermOrder,
        modulus: FieldModulus,
    ) -> Result<Self> {
        let var_names: Vec<String> = var_names.into_iter().map(Into::into).collect();
        if var_names.is_empty() || var_names.len() > MAX_VARS {
            return Err(Error::InvalidRing(format!(
                "need 1..={MAX_VARS} variables, got {}",
                var_names.len()
            )));
        }
        for (i, name) in var_names.iter().enumerate() {
            let mut chars = name.chars();
            let ok = chars
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(Error::InvalidRing(format!("bad variable name `{name}`")));
            }
            if var_names[..i].contains(name) {
                return Err(Error::InvalidRing(format!("duplicate variable `{name}`")));
            }
        }
        Ok(Ring {
            var_names,
            order,
            modulus,
        })
    }

    /// Variables named `x0, x1, ...`.
    pub fn with_n_vars(n: usize, order: TermOrder, modulus: FieldModulus) -> Result<Self> {
        Ring::new((0..n).map(|i| format!("x{i}")), order, modulus)
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn order(&self) -> TermOrder {
        self.order
    }

    pub fn modulus(&self) -> &FieldModulus {
        &self.modulus
    }

    pub fn p(&self) -> u64 {
        self.modulus.p()
    }

    /// Same variables and order over a different modulus or backend.
    pub fn with_modulus(&self, modulus: FieldModulus) -> Ring {
        Ring {
            modulus,
            ..self.clone()
        }
    }

    pub fn one(&self) -> Monomial {
        Monomial::one(self.n_vars())
    }

    pub fn var(&self, i: usize) -> Monomial {
        Monomial::var(self.n_vars(), i)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }

    /// Words per key: `ceil((32 + 16 n) / 64)`.
    pub fn key_words(&self) -> usize {
        (DEGREE_BITS + LANE_BITS * self.n_vars()).div_ceil(64)
    }

    /// Term-order comparison; arity is only debug-checked.
    pub fn cmp(&self, u: &Monomial, v: &Monomial) -> Ordering {
        debug_assert_eq!(u.n_vars(), v.n_vars());
        let (a, b) = (u.exponents(), v.exponents());
        match self.order {
            TermOrder::Grevlex => u.degree().cmp(&v.degree()).then_with(|| {
                for i in (0..a.len()).rev() {
                    if a[i] != b[i] {
                        return b[i].cmp(&a[i]);
                    }
                }
                Ordering::Equal
            }),
            TermOrder::Deglex => u.degree().cmp(&v.degree()).then_with(|| a.cmp(b)),
            TermOrder::Lex => a.cmp(b),
        }
    }

    pub fn compare(&self, u: &Monomial, v: &Monomial) -> Result<Ordering> {
        for m in [u, v] {
            if m.n_vars() != self.n_vars() {
                return Err(Error::ArityMismatch {
                    expected: self.n_vars(),
                    found: m.n_vars(),
                });
            }
        }
        Ok(self.cmp(u, v))
    }

    pub fn pack(&self, u: &Monomial) -> Result<MonKey> {
        if u.n_vars() != self.n_vars() {
            return Err(Error::ArityMismatch {
                expected: self.n_vars(),
                found: u.n_vars(),
            });
        }
        Ok(self.pack_unchecked(u))
    }

    pub(crate) fn pack_unchecked(&self, u: &Monomial) -> MonKey {
        let mut key = MonKey::default();
        let mut bit = 0usize;
        let mut put = |value: u64, width: usize| {
            let shift = 64 - (bit % 64) - width;
            key.0[bit / 64] |= value << shift;
            bit += width;
        };
        let exps = u.exponents();
        let n = exps.len();
        match self.order {
            TermOrder::Grevlex => {
                put(u.degree() as u64, DEGREE_BITS);
                for i in 0..n {
                    put(0xFFFF - exps[n - 1 - i] as u64, LANE_BITS);
                }
            }
            TermOrder::Deglex => {
                put(u.degree() as u64, DEGREE_BITS);
                for &e in exps {
                    put(e as u64, LANE_BITS);
                }
            }
            TermOrder::Lex => {
                for &e in exps {
                    put(e as u64, LANE_BITS);
                }
            }
        }
        key
    }

    pub fn unpack(&self, key: &MonKey) -> Result<Monomial> {
        let n = self.n_vars();
        let width = self.key_words();
        if key.0[width..].iter().any(|&w| w != 0) {
            return Err(Error::CorruptKey("nonzero word beyond key width".into()));
        }
        let mut bit = 0usize;
        let mut get = |w: usize| {
            let shift = 64 - (bit % 64) - w;
            let v = (key.0[bit / 64] >> shift) & ((1u64 << w) - 1);
            bit += w;
            v
        };
        let mut exps = vec![0u16; n];
        let degree_lane = match self.order {
            TermOrder::Grevlex => {
                let d = get(DEGREE_BITS);
                for i in 0..n {
                    exps[n - 1 - i] = (0xFFFF - get(LANE_BITS)) as u16;
                }
                Some(d)
            }
            TermOrder::Deglex => {
                let d = get(DEGREE_BITS);
                for e in exps.iter_mut() {
                    *e = get(LANE_BITS) as u16;
                }
                Some(d)
            }
            TermOrder::Lex => {
                for e in exps.iter_mut() {
                    *e = get(LANE_BITS) as u16;
                }
                None
            }
        };
        // lex keys leave the degree lane's worth of padding, possibly a whole word
        let used = bit;
        for w in used / 64..width {
            let mask = match (w == used / 64, used % 64) {
                (true, 0) | (false, _) => u64::MAX,
                (true, r) => (1u64 << (64 - r)) - 1,
            };
            if key.0[w] & mask != 0 {
                return Err(Error::CorruptKey("nonzero padding bits".into()));
            }
        }
        let mon = Monomial::from_exponents(exps);
        if let Some(d) = degree_lane {
            if d != mon.degree() as u64 {
                return Err(Error::CorruptKey(format!(
                    "degree lane {d} disagrees with exponent sum {}",
                    mon.degree()
                )));
            }
        }
        Ok(mon)
    }

    /// `x^2*y` style; the unit monomial prints as `1`.
    pub fn format_monomial(&self, u: &Monomial) -> String {
        let mut parts = Vec::new();
        for (name, &e) in self.var_names.iter().zip(u.exponents()) {
            match e {
                0 => {}
                1 => parts.push(name.clone()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// `binom(n + d, d)`: the number of monomials of degree at most `d` in `n`
/// variables.
pub fn count_monomials(n: u32, d: u32) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 1..=d {
        acc = acc * BigUint::from(n + i) / BigUint::from(i);
    }
    acc
}

/// All monomials of total degree at most `d`, ascending by degree then
/// reverse-lex on the exponent vector (not a term order; callers sort).
pub fn enumerate_monomials(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if i == cur.len() {
            out.push(Monomial::from_exponents(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[i] = e as u16;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}
