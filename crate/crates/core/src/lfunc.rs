//! L-function models over `F_q[t]` and their Dirichlet coefficients.
//!
//! A model is seen only through its local factors `L(T, pi) = sum b_j T^j`.
//! From those we get the prime-power coefficients `a_{pi^m}` (power sums of
//! the inverse roots), the multiplicative coefficients `a_f`, and the
//! generalized divisor function `d_k(f)`, the coefficient of `T^{deg f}` in
//! the k-th power of the partial L-function.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::poly::{MonicPoly, Poly, PolyRing, PrimeSieve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// The zeta function of the affine line: every good factor is `1 - T`.
    Trivial,
    /// The Legendre elliptic curve `y^2 = x(x-1)(x-t)`.
    Legendre,
    /// Local factors read from a file.
    Custom,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Trivial => "trivial",
            ModelKind::Legendre => "legendre",
            ModelKind::Custom => "custom",
        })
    }
}

/// `L(T, pi) = sum_j coeffs[j] T^j` with `coeffs[0] = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFactor {
    pub prime: MonicPoly,
    pub coeffs: Vec<i64>,
}

impl LocalFactor {
    /// `a_pi`, the negated linear coefficient.
    pub fn trace(&self) -> i64 {
        -self.coeffs.get(1).copied().unwrap_or(0)
    }
}

/// Local factors parsed from the custom-model text format.
#[derive(Debug, Clone)]
pub struct CustomFactors {
    dim: u32,
    weight: u32,
    r: u32,
    factors: HashMap<MonicPoly, Vec<i64>>,
}

impl CustomFactors {
    /// Parses
    ///
    /// ```text
    /// dim=<d> weight=<w> R=<R>
    /// pi=<poly> coeffs=<b0,b1,...>
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse(ring: &PolyRing, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::ConfigParse("empty custom model file".into()))?;
        let (mut dim, mut weight, mut r) = (None, None, None);
        for tok in header.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::ConfigParse(format!("bad header token {tok:?}")))?;
            let val: u32 = val
                .parse()
                .map_err(|_| Error::ConfigParse(format!("bad header value {tok:?}")))?;
            match key {
                "dim" => dim = Some(val),
                "weight" => weight = Some(val),
                "R" => r = Some(val),
                _ => return Err(Error::ConfigParse(format!("unknown header key {key:?}"))),
            }
        }
        let missing = |k: &str| Error::ConfigParse(format!("header lacks {k}="));
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let weight = weight.ok_or_else(|| missing("weight"))?;
        let r = r.ok_or_else(|| missing("R"))?;

        let mut factors = HashMap::new();
        for line in lines {
            let rest = line
                .strip_prefix("pi=")
                .ok_or_else(|| Error::ConfigParse(format!("expected pi=..., got {line:?}")))?;
            let (pi, coeffs) = rest
                .split_once("coeffs=")
                .ok_or_else(|| Error::ConfigParse(format!("missing coeffs= in {line:?}")))?;
            let pi = ring.parse_monic(pi.trim())?;
            if !ring.is_irreducible_naive(&pi) {
                return Err(Error::ConfigParse(format!("{pi} is not irreducible")));
            }
            let coeffs = coeffs
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::ConfigParse(format!("bad coefficient {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if coeffs.first() != Some(&1) {
                return Err(Error::ConfigParse(format!("local factor of {pi} must start with 1")));
            }
            if coeffs.len() > dim as usize + 1 {
                return Err(Error::ConfigParse(format!(
                    "local factor of {pi} has degree {} > dim {dim}",
                    coeffs.len() - 1
                )));
            }
            factors.insert(pi, coeffs);
        }
        Ok(CustomFactors { dim, weight, r, factors })
    }
}

/// Point counts of the Legendre curve over all residue fields of one degree,
/// keyed by the canonical index of the prime.
type DegreeCounts = Arc<HashMap<u64, u64>>;

/// How `a_{pi^m}` is obtained from the local factor `L(T, pi) = prod (1 - alpha_i T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrimePowerRule {
    /// `a_{pi^m} = sum alpha_i^m`, the trace of `Frob^m`.
    #[default]
    PowerSum,
    /// `a_{pi^m} = h_m(alpha)`, the `T^m` coefficient of `L(T, pi)^{-1}`, so that
    /// `sum a_f T^{deg f}` is the Euler product itself.
    EulerProduct,
}

impl PrimePowerRule {
    pub fn coeffs(self, lf: &LocalFactor, mmax: usize) -> Result<Vec<i128>> {
        match self {
            PrimePowerRule::PowerSum => prime_power_coeffs(lf, mmax),
            PrimePowerRule::EulerProduct => euler_factor_coeffs(lf, mmax),
        }
    }
}

/// An L-function model over a fixed `F_q[t]`.
pub struct LFunctionModel {
    kind: ModelKind,
    ring: PolyRing,
    weight: u32,
    dim: u32,
    custom: Option<CustomFactors>,
    rule: PrimePowerRule,
    legendre_counts: Mutex<HashMap<usize, DegreeCounts>>,
}

impl fmt::Debug for LFunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LFunctionModel")
            .field("kind", &self.kind)
            .field("q", &self.ring.q())
            .field("weight", &self.weight)
            .field("dim", &self.dim)
            .field("rule", &self.rule)
            .finish()
    }
}

impl LFunctionModel {
    pub fn trivial(ring: PolyRing) -> Self {
        Self::build(ModelKind::Trivial, ring, 0, 1, None)
    }

    pub fn legendre(ring: PolyRing) -> Result<Self> {
        if !ring.field().is_odd() {
            return Err(Error::EvenCharacteristic);
        }
        Ok(Self::build(ModelKind::Legendre, ring, 1, 2, None))
    }

    pub fn custom(ring: PolyRing, factors: CustomFactors) -> Self {
        let (w, dim) = (factors.weight, factors.dim);
        Self::build(ModelKind::Custom, ring, w, dim, Some(factors))
    }

    fn build(
        kind: ModelKind,
        ring: PolyRing,
        weight: u32,
        dim: u32,
        custom: Option<CustomFactors>,
    ) -> Self {
        LFunctionModel {
            kind,
            ring,
            weight,
            dim,
            custom,
            rule: PrimePowerRule::PowerSum,
            legendre_counts: Mutex::default(),
        }
    }

    pub fn with_rule(mut self, rule: PrimePowerRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn rule(&self) -> PrimePowerRule {
        self.rule
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Local factor at an irreducible `pi`.
    pub fn local_factor(&self, pi: &MonicPoly) -> Result<LocalFactor> {
        let coeffs = match self.kind {
            ModelKind::Trivial => vec![1, -1],
            ModelKind::Legendre => {
                let d = pi.degree();
                let qd = (self.ring.q() as i64).pow(d as u32);
                let count = self.legendre_count(pi)? as i64;
                if self.is_legendre_bad(pi) {
                    // drop the singular point; a = q^d - #nonsingular points
                    let a = qd - (count - 1);
                    vec![1, -a]
                } else {
                    let a = qd + 1 - count;
                    vec![1, -a, qd]
                }
            }
            ModelKind::Custom => self
                .custom
                .as_ref()
                .and_then(|c| c.factors.get(pi))
                .cloned()
                .ok_or_else(|| Error::MissingLocalFactor(pi.to_string()))?,
        };
        Ok(LocalFactor { prime: pi.clone(), coeffs })
    }

    /// Whether `pi` divides `t(t-1)`.
    fn is_legendre_bad(&self, pi: &MonicPoly) -> bool {
        let minus_one = self.ring.field().neg(1);
        pi.degree() == 1 && (pi.coeffs()[0] == 0 || pi.coeffs()[0] == minus_one)
    }

    fn legendre_count(&self, pi: &MonicPoly) -> Result<u64> {
        let d = pi.degree();
        let table = {
            let cache = self.legendre_counts.lock().expect("poisoned cache");
            cache.get(&d).cloned()
        };
        let table = match table {
            Some(t) => t,
            None => {
                let t = Arc::new(legendre_counts_for_degree(&self.ring, d)?);
                self.legendre_counts.lock().expect("poisoned cache").insert(d, Arc::clone(&t));
                t
            }
        };
        table
            .get(&pi.index(self.ring.q()))
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("{pi} is not irreducible")))
    }

    /// `R = deg L(T, rho x chi)` for characters mod `modulus`.
    /// `R` by the degree formula alone, without checking the hypotheses.
    pub fn nominal_degree_r(&self, modulus: &MonicPoly) -> u32 {
        let d = modulus.degree() as u32;
        match self.kind {
            ModelKind::Trivial => d.saturating_sub(1),
            ModelKind::Legendre => (2 * d).saturating_sub(1),
            ModelKind::Custom => self.custom.as_ref().map(|c| c.r).unwrap_or(0),
        }
    }

    pub fn degree_r(&self, modulus: &MonicPoly) -> Result<u32> {
        match self.kind {
            ModelKind::Trivial => {
                if modulus.degree() < 2 {
                    return Err(Error::HypothesisViolated(format!(
                        "trivial model needs deg Q >= 2, got {}",
                        modulus.degree()
                    )));
                }
                Ok(modulus.degree() as u32 - 1)
            }
            ModelKind::Legendre => {
                let minus_one = self.ring.field().neg(1);
                let t_tm1 = self.ring.mul(&Poly::new(vec![0, 1]), &Poly::new(vec![minus_one, 1]));
                let g = self.ring.gcd(modulus.as_poly(), &t_tm1).expect("nonzero");
                if g != MonicPoly::t() {
                    return Err(Error::HypothesisViolated(format!(
                        "gcd(Q, t(t-1)) = {g}, expected t"
                    )));
                }
                Ok(2 * modulus.degree() as u32 - 1)
            }
            ModelKind::Custom => Ok(self.custom.as_ref().map(|c| c.r).unwrap_or(0)),
        }
    }
}

/// Where the local factors come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Trivial,
    Legendre,
    /// Local factors read from this file.
    Custom(std::path::PathBuf),
}

/// A model choice that can be instantiated for any field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub source: ModelSource,
    pub rule: PrimePowerRule,
}

impl ModelSpec {
    pub fn trivial() -> Self {
        ModelSpec { source: ModelSource::Trivial, rule: PrimePowerRule::PowerSum }
    }

    pub fn legendre() -> Self {
        ModelSpec { source: ModelSource::Legendre, rule: PrimePowerRule::PowerSum }
    }

    pub fn build(&self, ring: PolyRing) -> Result<LFunctionModel> {
        let model = match &self.source {
            ModelSource::Trivial => LFunctionModel::trivial(ring),
            ModelSource::Legendre => LFunctionModel::legendre(ring)?,
            ModelSource::Custom(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let cf = CustomFactors::parse(&ring, &text)?;
                LFunctionModel::custom(ring, cf)
            }
        };
        Ok(model.with_rule(self.rule))
    }
}

impl std::str::FromStr for ModelSpec {
    type Err = Error;

    /// `trivial`, `legendre` or `custom:<path>`, optionally followed by
    /// `+euler` to select [`PrimePowerRule::EulerProduct`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (base, rule) = match s.strip_suffix("+euler") {
            Some(b) => (b, PrimePowerRule::EulerProduct),
            None => (s, PrimePowerRule::PowerSum),
        };
        let source = match base {
            "trivial" => ModelSource::Trivial,
            "legendre" => ModelSource::Legendre,
            other => match other.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => ModelSource::Custom(path.into()),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown model {s:?} (trivial, legendre, custom:<path>, each optionally +euler)"
                    )))
                }
            },
        };
        Ok(ModelSpec { source, rule })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            ModelSource::Trivial => f.write_str("trivial")?,
            ModelSource::Legendre => f.write_str("legendre")?,
            ModelSource::Custom(p) => write!(f, "custom:{}", p.display())?,
        }
        if self.rule == PrimePowerRule::EulerProduct {
            f.write_str("+euler")?;
        }
        Ok(())
    }
}

/// Number of projective points of `y^2 = x(x-1)(x-theta)` over the field of
/// `theta`, counting the singular point when the curve is singular.
pub fn legendre_point_count(theta: &FieldElement) -> Result<u64> {
    let f = theta.ctx();
    if !f.is_odd() {
        return Err(Error::EvenCharacteristic);
    }
    let half = (f.q() as u64 - 1) / 2;
    let minus_one = f.neg(1);
    let mut count = 1u64; // point at infinity
    for x in 0..f.q() {
        let v = f.mul(f.mul(x, f.add(x, minus_one)), f.sub(x, theta.index()));
        count += match v {
            0 => 1,
            _ if f.pow(v, half) == 1 => 2,
            _ => 0,
        };
    }
    Ok(count)
}

/// Counts for every prime of degree `d`, computed by walking the elements
/// `theta` of GF(q^d), reading off their minimal polynomials over GF(q),
/// and summing quadratic characters with precomputed tables.
fn legendre_counts_for_degree(ring: &PolyRing, d: usize) -> Result<HashMap<u64, u64>> {
    let small = ring.field();
    let big = FieldCtx::new(small.p() as u64, small.r() * d as u32)?;
    let big_q = big.q();

    // Embed GF(q) into GF(q^d): send u to the first root of the small modulus.
    let small_mod = Poly::new(small.modulus().to_vec());
    let beta = (0..big_q)
        .find(|&b| {
            small_mod
                .coeffs()
                .iter()
                .rev()
                .fold(0, |acc, &c| big.add(big.mul(acc, b), c))
                == 0
        })
        .expect("GF(q^d) contains GF(q)");
    let mut back = vec![u32::MAX; big_q as usize];
    for s in 0..small.q() {
        let image = small.coeffs_of(s).iter().rev().fold(0, |acc, &c| big.add(big.mul(acc, beta), c));
        back[image as usize] = s;
    }

    // chi[y]: quadratic character of y in GF(q^d)
    let mut chi = vec![-1i8; big_q as usize];
    chi[0] = 0;
    for y in 1..big_q {
        chi[big.mul(y, y) as usize] = 1;
    }
    let minus_one = big.neg(1);
    let chi_x_xm1: Vec<i8> = (0..big_q)
        .map(|x| chi[big.mul(x, big.add(x, minus_one)) as usize])
        .collect();

    // S(theta) = sum_x chi(x(x-1)) chi(x - theta) for every theta at once
    let f: Vec<f64> = chi_x_xm1.iter().map(|&v| v as f64).collect();
    let g: Vec<f64> = (0..big_q).map(|y| chi[big.neg(y) as usize] as f64).collect();
    let sums = additive_convolution(big.p() as usize, &f, &g);

    let q = small.q() as u64;
    let mut counts = HashMap::new();
    for theta in 0..big_q {
        // conjugates theta^(q^j)
        let mut conj = vec![theta];
        let mut cur = theta;
        for _ in 1..d {
            cur = big.pow(cur, q);
            if cur == theta {
                break;
            }
            conj.push(cur);
        }
        if conj.len() != d || big.pow(cur, q) != theta {
            continue;
        }
        // minimal polynomial prod (x - theta_j), monic, lowest first
        let mut minpoly = vec![1u32];
        for &c in &conj {
            let mut next = vec![0u32; minpoly.len() + 1];
            for (i, &m) in minpoly.iter().enumerate() {
                next[i + 1] = big.add(next[i + 1], m);
                next[i] = big.sub(next[i], big.mul(m, c));
            }
            minpoly = next;
        }
        let coeffs: Vec<u32> = minpoly.iter().map(|&c| back[c as usize]).collect();
        debug_assert!(coeffs.iter().all(|&c| c != u32::MAX));
        let pi = MonicPoly::try_from(Poly::new(coeffs)).expect("monic");
        counts
            .entry(pi.index(small.q()))
            .or_insert_with(|| (1 + big_q as i64 + sums[theta as usize]) as u64);
    }
    Ok(counts)
}

/// `(f * g)(z) = sum_x f(x) g(z - x)` on the additive group of a field of
/// characteristic `p`, whose element indices are base-`p` coordinate vectors.
/// The transform runs axis by axis, so the cost is `O(len * log len)`.
fn additive_convolution(p: usize, f: &[f64], g: &[f64]) -> Vec<i64> {
    use rustfft::{num_complex::Complex, FftPlanner};
    let len = f.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(p);
    let inverse = planner.plan_fft_inverse(p);
    let transform = |data: &mut [Complex<f64>], fft: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
        let mut line = vec![Complex::new(0.0, 0.0); p];
        let mut stride = 1;
        while stride < len {
            for block in (0..len).step_by(stride * p) {
                for offset in 0..stride {
                    let base = block + offset;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    fft.process(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
            stride *= p;
        }
    };
    let mut a: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut b: Vec<Complex<f64>> = g.iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform(&mut a, &forward);
    transform(&mut b, &forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    transform(&mut a, &inverse);
    a.iter().map(|v| (v.re / len as f64).round() as i64).collect()
}

/// Prime-power coefficients `a_{pi^m}`, `m = 1..=mmax`: the power sums of the
/// inverse roots of the local factor, via Newton's identities.
pub fn prime_power_coeffs(lf: &LocalFactor, mmax: usize) -> Result<Vec<i128>> {
    let b = |j: usize| lf.coeffs.get(j).copied().unwrap_or(0) as i128;
    let mut p: Vec<i128> = vec![0; mmax + 1];
    for m in 1..=mmax {
        let mut acc = (m as i128)
            .checked_mul(b(m))
            .and_then(i128::checked_neg)
            .ok_or(Error::Overflow("prime-power coefficient"))?;
        for j in 1..m {
            let term = b(j).checked_mul(p[m - j]).ok_or(Error::Overflow("prime-power coefficient"))?;
            acc = acc.checked_sub(term).ok_or(Error::Overflow("prime-power coefficient"))?;
        }
        p[m] = acc;
    }
    p.remove(0);
    Ok(p)
}

/// `h_1..h_mmax`, the coefficients of `1 / L(T, pi)`.
pub fn euler_factor_coeffs(lf: &LocalFactor, mmax: usize) -> Result<Vec<i128>> {
    let b = |j: usize| lf.coeffs.get(j).copied().unwrap_or(0) as i128;
    let mut h: Vec<i128> = vec![0; mmax + 1];
    h[0] = 1;
    for m in 1..=mmax {
        let mut acc = 0i128;
        for j in 1..=m {
            let term = b(j).checked_mul(h[m - j]).ok_or(Error::Overflow("prime-power coefficient"))?;
            acc = acc.checked_sub(term).ok_or(Error::Overflow("prime-power coefficient"))?;
        }
        h[m] = acc;
    }
    h.remove(0);
    Ok(h)
}

/// Coefficients of `(sum_m series[m] T^m)^k` up to `T^len-1`, with `series[0] = 1`.
fn series_power(series: &[i128], k: u32) -> Result<Vec<i128>> {
    let len = series.len();
    let mut acc = vec![0i128; len];
    acc[0] = 1;
    for _ in 0..k {
        let mut next = vec![0i128; len];
        for (i, &x) in acc.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in series.iter().enumerate().take(len - i) {
                let t = x.checked_mul(y).ok_or(Error::Overflow("divisor convolution"))?;
                next[i + j] = next[i + j].checked_add(t).ok_or(Error::Overflow("divisor convolution"))?;
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Evaluates a multiplicative function on every monic of degree `<= n_max`
/// from its prime-power values `pp[id][e]`.
fn multiplicative_table(sieve: &PrimeSieve, n_max: usize, pp: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    let ring = sieve.ring();
    (0..=n_max)
        .map(|n| {
            let count = ring.count(n).expect("table size") as usize;
            (0..count)
                .into_par_iter()
                .map(|idx| {
                    sieve.factor_ids(n, idx as u64).into_iter().try_fold(1i128, |acc, (id, e)| {
                        acc.checked_mul(pp[id as usize][e as usize])
                            .ok_or(Error::Overflow("multiplicative coefficient"))
                    })
                })
                .collect::<Result<Vec<i128>>>()
        })
        .collect()
}

/// `a_f` for all monic `f` of degree `<= n_max`.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    sieve: Arc<PrimeSieve>,
    n_max: usize,
    /// `prime_powers[id][m] = a_{pi^m}`, `m = 0..=n_max/deg pi`.
    prime_powers: Vec<Vec<i128>>,
    values: Vec<Vec<i128>>,
}

impl CoeffTable {
    pub fn build(model: &LFunctionModel, sieve: Arc<PrimeSieve>, n_max: usize) -> Result<Self> {
        assert!(sieve.max_deg() >= n_max, "sieve does not reach degree {n_max}");
        let prime_powers = sieve
            .primes()
            .iter()
            .take_while(|p| p.degree() <= n_max)
            .map(|p| {
                let lf = model.local_factor(p)?;
                let mut v = model.rule.coeffs(&lf, n_max / p.degree())?;
                v.insert(0, 1);
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let values = multiplicative_table(&sieve, n_max, &prime_powers)?;
        Ok(CoeffTable { sieve, n_max, prime_powers, values })
    }

    pub fn sieve(&self) -> &Arc<PrimeSieve> {
        &self.sieve
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn prime_powers(&self, id: u32) -> &[i128] {
        &self.prime_powers[id as usize]
    }

    pub fn degree_values(&self, n: usize) -> &[i128] {
        &self.values[n]
    }

    pub fn value(&self, f: &MonicPoly) -> i128 {
        self.values[f.degree()][f.index(self.sieve.ring().q()) as usize]
    }
}

/// `d_k(f)` for all monic `f` of degree `<= n_max`.
#[derive(Debug, Clone)]
pub struct DivisorTable {
    k: u32,
    sieve: Arc<PrimeSieve>,
    prime_powers: Vec<Vec<i128>>,
    values: Vec<Vec<i128>>,
}

impl DivisorTable {
    /// `d_k(pi^e)` is the `T^e` coefficient of `(1 + sum_m a_{pi^m} T^m)^k`;
    /// other values follow by multiplicativity.
    pub fn build(k: u32, table: &CoeffTable) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let prime_powers = table
            .prime_powers
            .iter()
            .map(|series| series_power(series, k))
            .collect::<Result<Vec<_>>>()?;
        let values = multiplicative_table(&table.sieve, table.n_max, &prime_powers)?;
        Ok(DivisorTable { k, sieve: Arc::clone(&table.sieve), prime_powers, values })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn prime_powers(&self, id: u32) -> &[i128] {
        &self.prime_powers[id as usize]
    }

    pub fn degree_values(&self, n: usize) -> &[i128] {
        &self.values[n]
    }

    pub fn value(&self, f: &MonicPoly) -> i128 {
        self.values[f.degree()][f.index(self.sieve.ring().q()) as usize]
    }
}
