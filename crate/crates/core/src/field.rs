//! Arithmetic in GF(p^r).
//!
//! An element is stored as its coefficient vector in GF(p)[u]/(m(u)), where
//! `m` is the lexicographically smallest monic irreducible of degree `r`.
//! Every element has a canonical index `sum coeffs[i] * p^i` in `[0, q)`;
//! polynomial code downstream works on these indices directly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the field cardinality.
pub const DEFAULT_FIELD_BOUND: u64 = 1 << 20;

const MAX_DEGREE: usize = 20;

/// Immutable description of GF(p^r).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    p: u32,
    r: u32,
    q: u32,
    /// Monic modulus over GF(p), lowest coefficient first, length r + 1.
    modulus: Vec<u32>,
    pow_p: Vec<u32>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power `q` into `(p, r)`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut r = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p as u32, r))
}

impl FieldCtx {
    /// Builds GF(p^r) with the default cardinality bound.
    pub fn new(p: u64, r: u32) -> Result<Self> {
        Self::with_bound(p, r, DEFAULT_FIELD_BOUND)
    }

    pub fn with_bound(p: u64, r: u32, bound: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if r == 0 {
            return Err(Error::DegreeZero);
        }
        let size = (p as u128).checked_pow(r).unwrap_or(u128::MAX);
        if size > bound as u128 || size > u32::MAX as u128 || r as usize > MAX_DEGREE {
            return Err(Error::BoundExceeded { size, bound });
        }
        let p32 = p as u32;
        let modulus = smallest_irreducible(p32, r as usize);
        let pow_p = (0..r).map(|i| p32.pow(i)).collect();
        Ok(FieldCtx { p: p32, r, q: size as u32, modulus, pow_p })
    }

    /// Builds GF(q) from its cardinality.
    pub fn from_order(q: u64) -> Result<Self> {
        let (p, r) = prime_power(q).ok_or_else(|| {
            Error::InvalidArgument(format!("{q} is not a prime power"))
        })?;
        Self::new(p as u64, r)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_odd(&self) -> bool {
        self.p != 2
    }

    // ---- index-level arithmetic; indices are assumed to lie in [0, q) ----

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        let (mut a, mut b, mut out) = (a, b, 0);
        for &w in &self.pow_p {
            let s = (a % self.p + b % self.p) % self.p;
            out += s * w;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.r == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let (mut a, mut out) = (a, 0);
        for &w in &self.pow_p {
            let d = a % self.p;
            out += ((self.p - d) % self.p) * w;
            a /= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let r = self.r as usize;
        let p = self.p as u64;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..r {
            if da[i] == 0 {
                continue;
            }
            for j in 0..r {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        for i in (r..2 * r - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            // u^r = -(m_0 + ... + m_{r-1} u^{r-1})
            for j in 0..r {
                prod[i - r + j] = (prod[i - r + j] + (p - c) * self.modulus[j] as u64) % p;
            }
            prod[i] = 0;
        }
        let mut out = 0;
        for i in 0..r {
            out += prod[i] as u32 * self.pow_p[i];
        }
        out
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        if self.r == 1 {
            return Ok(inv_mod(a, self.p));
        }
        let p = self.p;
        let mut old_r = self.modulus.clone();
        let mut cur_r = trim(self.digits(a)[..self.r as usize].to_vec());
        let mut old_s: Vec<u32> = Vec::new();
        let mut cur_s: Vec<u32> = vec![1];
        while !cur_r.is_empty() {
            let (quot, rem) = gfp_divrem(&old_r, &cur_r, p);
            let next_s = gfp_sub(&old_s, &gfp_mul(&quot, &cur_s, p), p);
            old_r = std::mem::replace(&mut cur_r, rem);
            old_s = std::mem::replace(&mut cur_s, next_s);
        }
        // old_r is a nonzero constant since the modulus is irreducible
        let c = inv_mod(old_r[0], p);
        let mut out = 0;
        for (i, &s) in old_s.iter().enumerate() {
            out += ((s as u64 * c as u64) % p as u64) as u32 * self.pow_p[i];
        }
        Ok(out)
    }

    #[inline]
    fn digits(&self, mut a: u32) -> [u32; MAX_DEGREE] {
        let mut d = [0u32; MAX_DEGREE];
        for slot in d.iter_mut().take(self.r as usize) {
            *slot = a % self.p;
            a /= self.p;
        }
        d
    }

    /// Base-p digits of an index, i.e. the representation coefficients.
    pub fn coeffs_of(&self, index: u32) -> Vec<u32> {
        self.digits(index)[..self.r as usize].to_vec()
    }

    pub fn index_of(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().zip(&self.pow_p).map(|(&c, &w)| c * w).sum()
    }

    /// The element `c * 1` for an integer `c`, i.e. the image of `Z` in the field.
    pub fn from_int(&self, c: i64) -> u32 {
        c.rem_euclid(self.p as i64) as u32
    }

    pub fn element(self: &Arc<Self>, index: u64) -> Result<FieldElement> {
        FieldElement::from_index(self, index)
    }
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, a as i64);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    t.rem_euclid(p as i64) as u32
}

// ---- dense polynomials over GF(p), lowest coefficient first, trimmed ----

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn gfp_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn gfp_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

fn gfp_divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let mut rem = a.to_vec();
    if rem.len() < b.len() {
        return (Vec::new(), trim(rem));
    }
    let lead_inv = inv_mod(*b.last().unwrap(), p) as u64;
    let mut quot = vec![0u32; a.len() - b.len() + 1];
    for i in (0..quot.len()).rev() {
        let c = (rem[i + b.len() - 1] as u64 * lead_inv % p as u64) as u32;
        quot[i] = c;
        if c == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            let sub = (c as u64 * bj as u64 % p as u64) as u32;
            rem[i + j] = (rem[i + j] + p - sub) % p;
        }
    }
    (trim(quot), trim(rem))
}

fn gfp_is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..d {
                g.push((x % p as u64) as u32);
                x /= p as u64;
            }
            g.push(1);
            if gfp_divrem(f, &g, p).1.is_empty() {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree `r` over GF(p), scanning
/// `(c_0, ..., c_{r-1})` by the base-p integer `sum c_i p^i`.
fn smallest_irreducible(p: u32, r: usize) -> Vec<u32> {
    let count = (p as u64).pow(r as u32);
    for idx in 0..count {
        let mut f = Vec::with_capacity(r + 1);
        let mut x = idx;
        for _ in 0..r {
            f.push((x % p as u64) as u32);
            x /= p as u64;
        }
        f.push(1);
        if gfp_is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Field operations accepted by [`FieldElement::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Pow(u64),
}

/// An element of GF(p^r) bound to its field.
#[derive(Clone)]
pub struct FieldElement {
    ctx: Arc<FieldCtx>,
    index: u32,
}

impl FieldElement {
    pub fn from_index(ctx: &Arc<FieldCtx>, index: u64) -> Result<Self> {
        if index >= ctx.q as u64 {
            return Err(Error::IndexOutOfRange { index, size: ctx.q as u64 });
        }
        Ok(FieldElement { ctx: Arc::clone(ctx), index: index as u32 })
    }

    pub fn from_coeffs(ctx: &Arc<FieldCtx>, coeffs: &[u32]) -> Result<Self> {
        if coeffs.len() > ctx.r as usize || coeffs.iter().any(|&c| c >= ctx.p) {
            return Err(Error::InvalidArgument(format!(
                "coefficients {coeffs:?} do not describe an element of GF({})",
                ctx.q
            )));
        }
        Ok(FieldElement { ctx: Arc::clone(ctx), index: ctx.index_of(coeffs) })
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        FieldElement { ctx: Arc::clone(ctx), index: 0 }
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> Self {
        FieldElement { ctx: Arc::clone(ctx), index: 1 }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.ctx.coeffs_of(self.index)
    }

    pub fn is_zero(&self) -> bool {
        self.index == 0
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(Error::CtxMismatch)
        }
    }

    fn with(&self, index: u32) -> Self {
        FieldElement { ctx: Arc::clone(&self.ctx), index }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.with(self.ctx.add(self.index, other.index)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.with(self.ctx.sub(self.index, other.index)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.with(self.ctx.mul(self.index, other.index)))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.with(self.ctx.inv(self.index)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.with(self.ctx.pow(self.index, e))
    }

    /// Binary operations take `other`; unary ones (`Inv`, `Pow`) ignore it.
    pub fn apply(&self, op: FieldOp, other: &Self) -> Result<Self> {
        match op {
            FieldOp::Add => self.add(other),
            FieldOp::Sub => self.sub(other),
            FieldOp::Mul => self.mul(other),
            FieldOp::Inv => self.inv(),
            FieldOp::Pow(e) => Ok(self.pow(e)),
        }
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.same_field(other).is_ok()
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})#{}", self.ctx.q, self.index)
    }
}
