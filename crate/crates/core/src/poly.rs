//! Polynomials over GF(q): monic enumeration, reduction, irreducibility,
//! factorization and the unit group of `F_q[t]/Q`.
//!
//! Coefficients are field-element indices (see [`crate::field`]), lowest
//! degree first. A monic polynomial of degree `n` has canonical index
//! `sum_{i<n} c_i q^i`, and that index order is the iteration order used by
//! every enumeration in the crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldCtx;

/// A polynomial over GF(q) with no trailing zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly(Vec<u32>);

impl Poly {
    pub fn new(mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn one() -> Self {
        Poly(vec![1])
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> u32 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn into_monic(self) -> Result<MonicPoly> {
        MonicPoly::try_from(self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Parses the text format `[c0,c1,...]` (coefficient indices, lowest first).
impl FromStr for Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| Error::InvalidPoly(format!("expected [c0,c1,...], got {s:?}")))?;
        if body.trim().is_empty() {
            return Ok(Poly::zero());
        }
        let coeffs = body
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidPoly(format!("bad coefficient {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::new(coeffs))
    }
}

/// A monic polynomial (leading coefficient is the field's 1).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MonicPoly(Poly);

impl TryFrom<Poly> for MonicPoly {
    type Error = Error;

    fn try_from(p: Poly) -> Result<Self> {
        if p.is_monic() {
            Ok(MonicPoly(p))
        } else {
            Err(Error::InvalidPoly(format!("{p} is not monic")))
        }
    }
}

impl MonicPoly {
    pub fn one() -> Self {
        MonicPoly(Poly::one())
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        MonicPoly(Poly(vec![0, 1]))
    }

    pub fn degree(&self) -> usize {
        self.0 .0.len() - 1
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.0 .0
    }

    pub fn as_poly(&self) -> &Poly {
        &self.0
    }

    pub fn into_poly(self) -> Poly {
        self.0
    }

    /// Canonical index: the base-q integer of the non-leading coefficients.
    pub fn index(&self, q: u32) -> u64 {
        base_q_index(&self.coeffs()[..self.degree()], q)
    }
}

impl PartialOrd for MonicPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by degree, then by canonical index.
impl Ord for MonicPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            self.coeffs()
                .iter()
                .rev()
                .cmp(other.coeffs().iter().rev())
        })
    }
}

impl fmt::Display for MonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn base_q_index(coeffs: &[u32], q: u32) -> u64 {
    coeffs.iter().rev().fold(0u64, |acc, &c| acc * q as u64 + c as u64)
}

/// `F_q[t]` over a fixed field context.
#[derive(Clone, Debug)]
pub struct PolyRing {
    field: Arc<FieldCtx>,
}

impl PolyRing {
    pub fn new(field: Arc<FieldCtx>) -> Self {
        PolyRing { field }
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// `q^n` as a u64, or `None` on overflow.
    pub fn count(&self, n: usize) -> Option<u64> {
        (self.q() as u64).checked_pow(n as u32)
    }

    /// Checks that every coefficient is a valid element index.
    pub fn validate(&self, p: &Poly) -> Result<()> {
        match p.coeffs().iter().find(|&&c| c >= self.q()) {
            Some(c) => Err(Error::InvalidPoly(format!(
                "coefficient {c} of {p} is not an element of GF({})",
                self.q()
            ))),
            None => Ok(()),
        }
    }

    pub fn parse_monic(&self, s: &str) -> Result<MonicPoly> {
        let p: Poly = s.parse()?;
        self.validate(&p)?;
        p.into_monic()
    }

    /// The monic polynomial of degree `n` with canonical index `index`.
    pub fn monic_from_index(&self, n: usize, mut index: u64) -> MonicPoly {
        let q = self.q() as u64;
        let mut c = Vec::with_capacity(n + 1);
        for _ in 0..n {
            c.push((index % q) as u32);
            index /= q;
        }
        c.push(1);
        MonicPoly(Poly(c))
    }

    /// All monic polynomials of degree `n` in canonical-index order.
    pub fn monic_enumerate(&self, n: usize) -> MonicIter<'_> {
        let end = self.count(n).expect("q^n overflows u64");
        self.monic_range(n, 0, end)
    }

    /// The slice `[lo, hi)` of [`Self::monic_enumerate`], for partitioned consumers.
    pub fn monic_range(&self, n: usize, lo: u64, hi: u64) -> MonicIter<'_> {
        MonicIter { ring: self, n, next: lo, end: hi }
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let f = &self.field;
        let n = a.0.len().max(b.0.len());
        Poly::new(
            (0..n)
                .map(|i| f.add(a.0.get(i).copied().unwrap_or(0), b.0.get(i).copied().unwrap_or(0)))
                .collect(),
        )
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        let f = &self.field;
        let n = a.0.len().max(b.0.len());
        Poly::new(
            (0..n)
                .map(|i| f.sub(a.0.get(i).copied().unwrap_or(0), b.0.get(i).copied().unwrap_or(0)))
                .collect(),
        )
    }

    pub fn scale(&self, a: &Poly, c: u32) -> Poly {
        Poly::new(a.0.iter().map(|&x| self.field.mul(x, c)).collect())
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let f = &self.field;
        let mut out = vec![0u32; a.0.len() + b.0.len() - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        Poly::new(out)
    }

    pub fn mul_monic(&self, a: &MonicPoly, b: &MonicPoly) -> MonicPoly {
        MonicPoly(self.mul(&a.0, &b.0))
    }

    /// Long division by a nonzero divisor.
    pub fn divrem(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        let db = b.degree().ok_or(Error::DivisionByZero)?;
        let f = &self.field;
        let lead_inv = f.inv(b.leading())?;
        let mut rem = a.0.clone();
        if rem.len() <= db {
            return Ok((Poly::zero(), Poly::new(rem)));
        }
        let mut quot = vec![0u32; rem.len() - db];
        for i in (0..quot.len()).rev() {
            let c = f.mul(rem[i + db], lead_inv);
            quot[i] = c;
            if c == 0 {
                continue;
            }
            for (j, &bj) in b.0.iter().enumerate() {
                rem[i + j] = f.sub(rem[i + j], f.mul(c, bj));
            }
        }
        rem.truncate(db);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// `a mod m` for a monic modulus.
    pub fn rem(&self, a: &Poly, m: &MonicPoly) -> Poly {
        let f = &self.field;
        let dm = m.degree();
        let mut rem = a.0.clone();
        if rem.len() <= dm {
            return Poly::new(rem);
        }
        for i in (0..rem.len() - dm).rev() {
            let c = rem[i + dm];
            if c == 0 {
                continue;
            }
            for (j, &mj) in m.coeffs().iter().enumerate() {
                rem[i + j] = f.sub(rem[i + j], f.mul(c, mj));
            }
        }
        rem.truncate(dm);
        Poly::new(rem)
    }

    /// Reduction of `f` modulo `q` by long division; the result has degree < deg q.
    pub fn reduce_mod(&self, f: &MonicPoly, q: &MonicPoly) -> Poly {
        self.rem(f.as_poly(), q)
    }

    /// Exact quotient `a / b` if `b` divides `a`.
    pub fn divide_exact(&self, a: &MonicPoly, b: &MonicPoly) -> Option<MonicPoly> {
        let (quot, rem) = self.divrem(a.as_poly(), b.as_poly()).ok()?;
        rem.is_zero().then_some(MonicPoly(quot))
    }

    pub fn divides(&self, b: &MonicPoly, a: &Poly) -> bool {
        self.rem(a, b).is_zero()
    }

    pub fn make_monic(&self, a: &Poly) -> Option<MonicPoly> {
        if a.is_zero() {
            return None;
        }
        let inv = self.field.inv(a.leading()).ok()?;
        Some(MonicPoly(self.scale(a, inv)))
    }

    /// Monic gcd; `gcd(0, 0)` is `None`.
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Option<MonicPoly> {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = self.divrem(&x, &y).expect("nonzero divisor");
            x = std::mem::replace(&mut y, r);
        }
        self.make_monic(&x)
    }

    pub fn derivative(&self, a: &Poly) -> Poly {
        let f = &self.field;
        Poly::new(
            a.0.iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(f.from_int(i as i64), c))
                .collect(),
        )
    }

    pub fn is_squarefree(&self, a: &MonicPoly) -> bool {
        self.gcd(a.as_poly(), &self.derivative(a.as_poly()))
            .is_some_and(|g| g.degree() == 0)
    }

    pub fn pow_monic(&self, a: &MonicPoly, e: u32) -> MonicPoly {
        let mut acc = MonicPoly::one();
        for _ in 0..e {
            acc = self.mul_monic(&acc, a);
        }
        acc
    }

    /// Evaluates a polynomial with coefficients in this ring's field at `x`.
    pub fn eval(&self, a: &Poly, x: u32) -> u32 {
        let f = &self.field;
        a.0.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Index of a residue (degree < `width`) as a base-q integer.
    pub fn residue_index(&self, r: &Poly, width: usize) -> u64 {
        debug_assert!(r.0.len() <= width);
        base_q_index(r.coeffs(), self.q())
    }

    pub fn residue_from_index(&self, width: usize, mut index: u64) -> Poly {
        let q = self.q() as u64;
        let mut c = Vec::with_capacity(width);
        for _ in 0..width {
            c.push((index % q) as u32);
            index /= q;
        }
        Poly::new(c)
    }

    /// Irreducibility by trial division against every monic of degree
    /// `1..=deg/2`. Use [`PrimeSieve::is_irreducible`] for bulk queries.
    pub fn is_irreducible_naive(&self, f: &MonicPoly) -> bool {
        let n = f.degree();
        if n == 0 {
            return false;
        }
        (1..=n / 2).all(|d| self.monic_enumerate(d).all(|g| !self.divides(&g, f.as_poly())))
    }

    /// Smallest (by canonical index) monic irreducible of degree `d`.
    pub fn smallest_irreducible(&self, d: usize) -> MonicPoly {
        self.monic_enumerate(d)
            .find(|f| self.is_irreducible_naive(f))
            .expect("irreducibles exist in every degree")
    }
}

/// Iterator over a canonical-index range of monic polynomials of one degree.
pub struct MonicIter<'a> {
    ring: &'a PolyRing,
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for MonicIter<'_> {
    type Item = MonicPoly;

    fn next(&mut self) -> Option<MonicPoly> {
        if self.next >= self.end {
            return None;
        }
        let f = self.ring.monic_from_index(self.n, self.next);
        self.next += 1;
        Some(f)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for MonicIter<'_> {}

const NO_FACTOR: u32 = u32::MAX;

/// Sieve of monic irreducibles up to a maximum degree, with a
/// smallest-prime-factor table over canonical indices.
#[derive(Debug)]
pub struct PrimeSieve {
    ring: PolyRing,
    max_deg: usize,
    primes: Vec<MonicPoly>,
    /// `spf[d][i]`: id of the smallest prime factor of monic `(d, i)`.
    spf: Vec<Vec<u32>>,
}

impl PrimeSieve {
    pub fn new(ring: PolyRing, max_deg: usize) -> Self {
        let q = ring.q() as u64;
        let mut spf: Vec<Vec<u32>> = (0..=max_deg)
            .map(|d| vec![NO_FACTOR; q.pow(d as u32) as usize])
            .collect();
        let mut primes = Vec::new();
        for d in 1..=max_deg {
            let first_new = primes.len();
            for idx in 0..spf[d].len() {
                if spf[d][idx] == NO_FACTOR {
                    spf[d][idx] = primes.len() as u32;
                    primes.push(ring.monic_from_index(d, idx as u64));
                }
            }
            // Eratosthenes: strike multiples of the new primes. Primes are
            // processed in (degree, index) order so the first mark is the
            // smallest factor.
            for id in first_new..primes.len() {
                let pi = primes[id].clone();
                for e in 1..=max_deg - d {
                    for g in ring.monic_enumerate(e) {
                        let h = ring.mul_monic(&pi, &g);
                        let slot = &mut spf[d + e][h.index(q as u32) as usize];
                        if *slot == NO_FACTOR {
                            *slot = id as u32;
                        }
                    }
                }
            }
        }
        PrimeSieve { ring, max_deg, primes, spf }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }

    /// All primes of degree `<= max_deg`, sorted by (degree, index).
    pub fn primes(&self) -> &[MonicPoly] {
        &self.primes
    }

    pub fn prime(&self, id: u32) -> &MonicPoly {
        &self.primes[id as usize]
    }

    pub fn primes_of_degree(&self, d: usize) -> impl Iterator<Item = (u32, &MonicPoly)> {
        self.primes
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.degree() == d)
            .map(|(i, p)| (i as u32, p))
    }

    /// Id of a prime in the sieve.
    pub fn prime_id(&self, p: &MonicPoly) -> Option<u32> {
        let d = p.degree();
        if d == 0 || d > self.max_deg {
            return None;
        }
        let id = self.spf[d][p.index(self.ring.q()) as usize];
        (self.primes[id as usize] == *p).then_some(id)
    }

    pub fn is_irreducible(&self, f: &MonicPoly) -> bool {
        let d = f.degree();
        if d == 0 {
            return false;
        }
        if d <= self.max_deg {
            return self.prime_id(f).is_some();
        }
        assert!(2 * self.max_deg >= d, "sieve too small for degree {d}");
        self.primes
            .iter()
            .take_while(|p| 2 * p.degree() <= d)
            .all(|p| !self.ring.divides(p, f.as_poly()))
    }

    /// Complete factorization by trial division against the sieve primes.
    pub fn factorize(&self, f: &MonicPoly) -> Factorization {
        let ring = &self.ring;
        let mut rest = f.clone();
        let mut factors = Vec::new();
        for p in &self.primes {
            if 2 * p.degree() > rest.degree() {
                break;
            }
            let mut e = 0;
            while let Some(quot) = ring.divide_exact(&rest, p) {
                rest = quot;
                e += 1;
            }
            if e > 0 {
                factors.push((p.clone(), e));
            }
        }
        if rest.degree() > 0 {
            assert!(
                rest.degree() <= 2 * self.max_deg + 1,
                "sieve of degree {} cannot certify a cofactor of degree {}",
                self.max_deg,
                rest.degree()
            );
            factors.push((rest, 1));
            factors.sort();
        }
        Factorization { factors }
    }

    /// Factorization of monic `(deg, index)` as `(prime id, exponent)` pairs,
    /// read off the smallest-prime-factor table.
    pub fn factor_ids(&self, deg: usize, index: u64) -> Vec<(u32, u32)> {
        let q = self.ring.q();
        let mut out: Vec<(u32, u32)> = Vec::new();
        let mut f = self.ring.monic_from_index(deg, index);
        while f.degree() > 0 {
            let id = self.spf[f.degree()][f.index(q) as usize];
            if self.primes[id as usize] == f {
                push_factor(&mut out, id);
                break;
            }
            f = self
                .ring
                .divide_exact(&f, &self.primes[id as usize])
                .expect("spf entry divides");
            push_factor(&mut out, id);
        }
        out
    }
}

fn push_factor(out: &mut Vec<(u32, u32)>, id: u32) {
    match out.last_mut() {
        Some((last, e)) if *last == id => *e += 1,
        _ => out.push((id, 1)),
    }
}

/// Prime factorization sorted by (degree, index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(MonicPoly, u32)>,
}

impl Factorization {
    pub fn expand(&self, ring: &PolyRing) -> MonicPoly {
        self.factors
            .iter()
            .fold(MonicPoly::one(), |acc, (p, e)| ring.mul_monic(&acc, &ring.pow_monic(p, *e)))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// The unit group `(F_q[t]/Q)^*` for squarefree `Q`.
#[derive(Debug, Clone)]
pub struct ResidueSystem {
    modulus: MonicPoly,
    /// Residue indices (base-q, width deg Q) of the units, ascending.
    units: Vec<u64>,
    /// Maps a residue index to its position in `units`, or `u32::MAX`.
    position: Vec<u32>,
    prime_factors: Vec<MonicPoly>,
}

impl ResidueSystem {
    pub fn new(ring: &PolyRing, modulus: &MonicPoly) -> Result<Self> {
        if modulus.degree() == 0 {
            return Err(Error::InvalidArgument("modulus must have degree >= 1".into()));
        }
        if !ring.is_squarefree(modulus) {
            return Err(Error::NotSquarefree(modulus.to_string()));
        }
        let width = modulus.degree();
        let total = ring
            .count(width)
            .filter(|&n| n <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidArgument("modulus degree too large".into()))?;
        let mut units = Vec::new();
        let mut position = vec![u32::MAX; total as usize];
        for idx in 0..total {
            let a = ring.residue_from_index(width, idx);
            if ring.gcd(&a, modulus.as_poly()).is_some_and(|g| g.degree() == 0) {
                position[idx as usize] = units.len() as u32;
                units.push(idx);
            }
        }
        let sieve = PrimeSieve::new(ring.clone(), width.div_ceil(2).max(1));
        let prime_factors = sieve.factorize(modulus).factors.into_iter().map(|(p, _)| p).collect();
        Ok(ResidueSystem { modulus: modulus.clone(), units, position, prime_factors })
    }

    pub fn modulus(&self) -> &MonicPoly {
        &self.modulus
    }

    pub fn units(&self) -> &[u64] {
        &self.units
    }

    pub fn phi(&self) -> u64 {
        self.units.len() as u64
    }

    pub fn prime_factors(&self) -> &[MonicPoly] {
        &self.prime_factors
    }

    /// Position of residue index `idx` among the units, if it is a unit.
    pub fn unit_position(&self, idx: u64) -> Option<usize> {
        match self.position.get(idx as usize) {
            Some(&p) if p != u32::MAX => Some(p as usize),
            _ => None,
        }
    }

    /// `prod (q^{d_i} - 1)` over the prime factors of the modulus.
    pub fn phi_formula(&self, q: u32) -> u64 {
        self.prime_factors.iter().map(|p| (q as u64).pow(p.degree() as u32) - 1).product()
    }
}
