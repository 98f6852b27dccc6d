//! Arithmetic in `F_p` for odd primes `p < 2^31`.
//!
//! Residues live in `u64` words so that a product of two residues always fits
//! natively. Three reduction backends are provided:
//!
//! - **Naive**: hardware `%`.
//! - **Barrett**: multiply by `mu = floor(2^62 / p)`, shift, and apply at most
//!   two branch-free corrections.
//! - **Montgomery**: `R = 2^32`, `p' = -p^{-1} mod R`, one conditional
//!   subtraction per product. Elements must be in the Montgomery domain.
//!
//! Inner loops accumulate unreduced products and only reduce once every
//! [`FieldModulus::lazy_window`] updates (see [`fma_accumulate`]).
//!
//! Coefficients stored anywhere outside a kernel are plain residues in
//! `[0, p)` (the Standard domain). Kernels that run on the Montgomery backend
//! convert on entry and exit through the [`Reducer`] trait.

use crate::{Error, Result};

/// Barrett shift parameter.
pub const BARRETT_SHIFT: u32 = 62;
/// `log2(R)` for Montgomery arithmetic.
pub const MONT_R_BITS: u32 = 32;
/// Upper bound on the lazy accumulation window.
pub const MAX_LAZY_WINDOW: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    Naive,
    #[default]
    Barrett,
    Montgomery,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Naive, Backend::Barrett, Backend::Montgomery];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Naive => "naive",
            Backend::Barrett => "barrett",
            Backend::Montgomery => "montgomery",
        }
    }

    /// Domain that elements must be in for this backend's multiply.
    pub fn domain(self) -> Domain {
        match self {
            Backend::Montgomery => Domain::Montgomery,
            _ => Domain::Standard,
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Backend::Naive),
            "barrett" => Ok(Backend::Barrett),
            "montgomery" => Ok(Backend::Montgomery),
            other => Err(Error::Precondition(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Standard,
    Montgomery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Enter,
    Leave,
}

/// A residue tagged with its representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpElem {
    pub value: u64,
    pub domain: Domain,
}

impl FpElem {
    pub fn standard(value: u64) -> Self {
        FpElem {
            value,
            domain: Domain::Standard,
        }
    }

    pub fn montgomery(value: u64) -> Self {
        FpElem {
            value,
            domain: Domain::Montgomery,
        }
    }
}

/// An odd prime modulus together with its precomputed reduction constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldModulus {
    p: u64,
    backend: Backend,
    barrett_mu: u64,
    mont_pprime: u32,
    mont_r2: u64,
    lazy_window_k: u32,
}

impl FieldModulus {
    pub fn new(p: u64, backend: Backend) -> Result<Self> {
        if p <= 2 || p >= 1 << 31 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        let barrett_mu = (1u64 << BARRETT_SHIFT) / p;
        let mont_pprime = montgomery_pprime(p as u32);
        let r_mod_p = (1u64 << MONT_R_BITS) % p;
        let mont_r2 = r_mod_p * r_mod_p % p;
        let sq = (p - 1) * (p - 1);
        let window = match backend {
            // acc <= (p-1) + k (p-1)^2 must stay below 2^64
            Backend::Naive | Backend::Barrett => (u64::MAX - (p - 1)) / sq,
            // REDC needs its input below p * R
            Backend::Montgomery => ((p << MONT_R_BITS) - p) / sq,
        };
        Ok(FieldModulus {
            p,
            backend,
            barrett_mu,
            mont_pprime,
            mont_r2,
            lazy_window_k: window.clamp(1, MAX_LAZY_WINDOW as u64) as u32,
        })
    }

    /// Same prime, different reduction backend.
    pub fn with_backend(&self, backend: Backend) -> Self {
        FieldModulus::new(self.p, backend).expect("modulus already validated")
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn barrett_mu(&self) -> u64 {
        self.barrett_mu
    }

    pub fn mont_pprime(&self) -> u32 {
        self.mont_pprime
    }

    pub fn mont_r2(&self) -> u64 {
        self.mont_r2
    }

    pub fn lazy_window(&self) -> u32 {
        self.lazy_window_k
    }

    // Plain residue arithmetic on Standard-domain values in [0, p).

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        barrett_wide(x, self.p, self.barrett_mu)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        barrett_raw(a * b, self.p, self.barrett_mu, BARRETT_SHIFT).0
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.p;
        if a == 0 {
            return Err(Error::NotInvertible(0));
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(t0.rem_euclid(self.p as i64) as u64)
    }

    /// Maps a signed integer into `[0, p)`.
    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    pub fn naive_reducer(&self) -> NaiveReducer {
        NaiveReducer {
            p: self.p,
            window: self.lazy_window_k,
        }
    }

    pub fn barrett_reducer(&self) -> BarrettReducer {
        BarrettReducer {
            p: self.p,
            mu: self.barrett_mu,
            window: self.lazy_window_k,
        }
    }

    pub fn montgomery_reducer(&self) -> MontgomeryReducer {
        MontgomeryReducer {
            p: self.p,
            pprime: self.mont_pprime,
            r2: self.mont_r2,
            window: self.lazy_window_k,
        }
    }
}

/// Runs `$body` with `$r` bound to the concrete [`Reducer`] for `$m`'s backend.
#[macro_export]
macro_rules! with_reducer {
    ($m:expr, $r:ident => $body:expr) => {
        match $m.backend() {
            $crate::fp_arith::Backend::Naive => {
                let $r = $m.naive_reducer();
                $body
            }
            $crate::fp_arith::Backend::Barrett => {
                let $r = $m.barrett_reducer();
                $body
            }
            $crate::fp_arith::Backend::Montgomery => {
                let $r = $m.montgomery_reducer();
                $body
            }
        }
    };
}

/// Kernel-side arithmetic for one backend.
///
/// Elements are in the backend's domain. Accumulators hold a redundant sum of
/// raw products; `to_acc` lifts a reduced element to accumulator scale so that
/// it can seed or continue an accumulation.
pub trait Reducer: Copy + Send + Sync {
    fn modulus(&self) -> u64;
    fn window(&self) -> u32;
    fn enter(&self, x: u64) -> u64;
    fn leave(&self, x: u64) -> u64;
    fn mul(&self, a: u64, b: u64) -> u64;
    fn to_acc(&self, x: u64) -> u64;
    fn reduce_acc(&self, acc: u64) -> u64;

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus() {
            s - self.modulus()
        } else {
            s
        }
    }

    #[inline]
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus() - a
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NaiveReducer {
    p: u64,
    window: u32,
}

impl Reducer for NaiveReducer {
    #[inline]
    fn modulus(&self) -> u64 {
        self.p
    }
    #[inline]
    fn window(&self) -> u32 {
        self.window
    }
    #[inline]
    fn enter(&self, x: u64) -> u64 {
        x
    }
    #[inline]
    fn leave(&self, x: u64) -> u64 {
        x
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }
    #[inline]
    fn to_acc(&self, x: u64) -> u64 {
        x
    }
    #[inline]
    fn reduce_acc(&self, acc: u64) -> u64 {
        acc % self.p
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BarrettReducer {
    p: u64,
    mu: u64,
    window: u32,
}

impl Reducer for BarrettReducer {
    #[inline]
    fn modulus(&self) -> u64 {
        self.p
    }
    #[inline]
    fn window(&self) -> u32 {
        self.window
    }
    #[inline]
    fn enter(&self, x: u64) -> u64 {
        x
    }
    #[inline]
    fn leave(&self, x: u64) -> u64 {
        x
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        barrett_raw(a * b, self.p, self.mu, BARRETT_SHIFT).0
    }
    #[inline]
    fn to_acc(&self, x: u64) -> u64 {
        x
    }
    #[inline]
    fn reduce_acc(&self, acc: u64) -> u64 {
        barrett_wide(acc, self.p, self.mu)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MontgomeryReducer {
    p: u64,
    pprime: u32,
    r2: u64,
    window: u32,
}

impl Reducer for MontgomeryReducer {
    #[inline]
    fn modulus(&self) -> u64 {
        self.p
    }
    #[inline]
    fn window(&self) -> u32 {
        self.window
    }
    #[inline]
    fn enter(&self, x: u64) -> u64 {
        redc(x * self.r2, self.p, self.pprime)
    }
    #[inline]
    fn leave(&self, x: u64) -> u64 {
        redc(x, self.p, self.pprime)
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        redc(a * b, self.p, self.pprime)
    }
    #[inline]
    fn to_acc(&self, x: u64) -> u64 {
        // aR -> aR^2 (mod p), the scale of a raw product of two domain elements
        redc(x * self.r2, self.p, self.pprime)
    }
    #[inline]
    fn reduce_acc(&self, acc: u64) -> u64 {
        redc(acc, self.p, self.pprime)
    }
}

/// Barrett reduction with explicit parameters; returns `(x mod p, corrections)`.
///
/// Requires `x < 2^shift` and `mu = floor(2^shift / p)`.
#[inline]
pub fn barrett_raw(x: u64, p: u64, mu: u64, shift: u32) -> (u64, u32) {
    let q = ((x as u128 * mu as u128) >> shift) as u64;
    let r = x - q * p;
    // two predicated corrections
    let c1 = (r >= p) as u64;
    let r = r - c1 * p;
    let c2 = (r >= p) as u64;
    let r = r - c2 * p;
    (r, (c1 + c2) as u32)
}

/// Full 64-bit input: fold the top two bits through `2^62 mod p` first.
#[inline]
fn barrett_wide(x: u64, p: u64, mu: u64) -> u64 {
    let lo = x & ((1u64 << BARRETT_SHIFT) - 1);
    let hi = x >> BARRETT_SHIFT;
    let (r_lo, _) = barrett_raw(lo, p, mu, BARRETT_SHIFT);
    if hi == 0 {
        return r_lo;
    }
    let two62 = (1u64 << BARRETT_SHIFT) - mu * p;
    barrett_raw(r_lo + hi * two62, p, mu, BARRETT_SHIFT).0
}

/// Montgomery reduction with explicit parameters: `t * R^{-1} mod p` for
/// `R = 2^r_bits`, `t < p R`, `p * pprime = -1 (mod R)`.
pub fn redc_with(t: u64, p: u64, pprime: u64, r_bits: u32) -> u64 {
    let mask = (1u128 << r_bits) - 1;
    let m = ((t as u128 & mask) * pprime as u128) & mask;
    let u = ((t as u128 + m * p as u128) >> r_bits) as u64;
    if u >= p {
        u - p
    } else {
        u
    }
}

#[inline]
fn redc(t: u64, p: u64, pprime: u32) -> u64 {
    let m = (t as u32).wrapping_mul(pprime) as u64;
    // t < pR and m p < pR, so the sum stays below 2^64
    let u = (t + m * p) >> MONT_R_BITS;
    if u >= p {
        u - p
    } else {
        u
    }
}

/// `-p^{-1} mod 2^32` by Newton iteration.
fn montgomery_pprime(p: u32) -> u32 {
    let mut inv: u32 = p;
    for _ in 0..5 {
        inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
    }
    inv.wrapping_neg()
}

fn mulmod_u64(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

fn powmod_u64(mut b: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    b %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_u64(acc, b, n);
        }
        b = mulmod_u64(b, b, n);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest prime strictly below `bound` (for `bound > 3`).
pub fn prev_prime(bound: u64) -> u64 {
    let mut n = bound - 1;
    while !is_prime(n) {
        n -= 1;
    }
    n
}

fn check_value(a: FpElem, m: &FieldModulus) -> Result<()> {
    if a.value >= m.p {
        return Err(Error::Precondition(format!(
            "residue {} not reduced mod {}",
            a.value, m.p
        )));
    }
    Ok(())
}

fn same_domain(a: FpElem, b: FpElem) -> Result<Domain> {
    if a.domain != b.domain {
        return Err(Error::DomainMismatch {
            expected: a.domain,
            found: b.domain,
        });
    }
    Ok(a.domain)
}

fn expect_domain(a: FpElem, domain: Domain) -> Result<()> {
    if a.domain != domain {
        return Err(Error::DomainMismatch {
            expected: domain,
            found: a.domain,
        });
    }
    Ok(())
}

pub fn fp_add(a: FpElem, b: FpElem, m: &FieldModulus) -> Result<FpElem> {
    let domain = same_domain(a, b)?;
    check_value(a, m)?;
    check_value(b, m)?;
    Ok(FpElem {
        value: m.add(a.value, b.value),
        domain,
    })
}

/// Product through the configured backend. On the Montgomery backend the
/// result is `a b R^{-1}`, i.e. the Montgomery form of the product.
pub fn fp_mul(a: FpElem, b: FpElem, m: &FieldModulus) -> Result<FpElem> {
    let domain = m.backend.domain();
    expect_domain(a, domain)?;
    expect_domain(b, domain)?;
    check_value(a, m)?;
    check_value(b, m)?;
    let value = with_reducer!(m, r => r.mul(a.value, b.value));
    Ok(FpElem { value, domain })
}

/// `x mod p` for `x < 2^62`.
pub fn barrett_reduce(x: u64, m: &FieldModulus) -> Result<FpElem> {
    if x >= 1 << BARRETT_SHIFT {
        return Err(Error::Precondition(format!("barrett input {x} >= 2^62")));
    }
    Ok(FpElem::standard(
        barrett_raw(x, m.p, m.barrett_mu, BARRETT_SHIFT).0,
    ))
}

pub fn mont_mul(a: FpElem, b: FpElem, m: &FieldModulus) -> Result<FpElem> {
    expect_domain(a, Domain::Montgomery)?;
    expect_domain(b, Domain::Montgomery)?;
    check_value(a, m)?;
    check_value(b, m)?;
    Ok(FpElem::montgomery(redc(a.value * b.value, m.p, m.mont_pprime)))
}

pub fn mont_convert(a: FpElem, direction: Direction, m: &FieldModulus) -> Result<FpElem> {
    check_value(a, m)?;
    match direction {
        Direction::Enter => {
            expect_domain(a, Domain::Standard)?;
            Ok(FpElem::montgomery(redc(a.value * m.mont_r2, m.p, m.mont_pprime)))
        }
        Direction::Leave => {
            expect_domain(a, Domain::Montgomery)?;
            Ok(FpElem::standard(redc(a.value, m.p, m.mont_pprime)))
        }
    }
}

/// Multiplicative inverse, staying in the input's domain.
pub fn fp_inv(a: FpElem, m: &FieldModulus) -> Result<FpElem> {
    check_value(a, m)?;
    match a.domain {
        Domain::Standard => Ok(FpElem::standard(m.inv(a.value)?)),
        Domain::Montgomery => {
            let plain = redc(a.value, m.p, m.mont_pprime);
            let inv = m.inv(plain)?;
            Ok(FpElem::montgomery(redc(inv * m.mont_r2, m.p, m.mont_pprime)))
        }
    }
}

/// One lazy update `acc += b c`. A full reduction is forced whenever the
/// count reaches the window, after which the count restarts at zero.
///
/// `acc` is in accumulator scale for the backend: Standard for naive and
/// Barrett, `R^2`-scaled for Montgomery. Read the result with [`fma_finish`].
pub fn fma_accumulate(
    acc: u64,
    b: FpElem,
    c: FpElem,
    count: u32,
    m: &FieldModulus,
) -> Result<(u64, u32)> {
    let domain = m.backend.domain();
    expect_domain(b, domain)?;
    expect_domain(c, domain)?;
    check_value(b, m)?;
    check_value(c, m)?;
    if count >= m.lazy_window_k {
        return Err(Error::Precondition(format!(
            "lazy count {count} outside window {}",
            m.lazy_window_k
        )));
    }
    let acc = acc + b.value * c.value;
    let count = count + 1;
    if count == m.lazy_window_k {
        let reduced = with_reducer!(m, r => r.to_acc(r.reduce_acc(acc)));
        Ok((reduced, 0))
    } else {
        Ok((acc, count))
    }
}

/// Reduces a lazy accumulator to an element in the backend's domain.
pub fn fma_finish(acc: u64, m: &FieldModulus) -> FpElem {
    let value = with_reducer!(m, r => r.reduce_acc(acc));
    FpElem {
        value,
        domain: m.backend.domain(),
    }
}
