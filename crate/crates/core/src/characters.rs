//! Dirichlet characters mod a squarefree `Q`, twisted coefficients
//! `c_{1,rho x chi,n}`, root-modulus classification of the twisted
//! L-polynomials, and the variance recomputed as a sum over characters.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lfunc::{CoeffTable, LFunctionModel};
use crate::poly::{MonicPoly, Poly, PolyRing, PrimeSieve, ResidueSystem};
use crate::variance::{bucket_sums, check_budget};

/// Relative size of a coefficient beyond `R` that still counts as zero.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;
/// Allowed `| |alpha| q^{(1+w)/2} - 1 |` for a good-like root.
pub const UNITARITY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone)]
struct PrimeData {
    prime: MonicPoly,
    /// `q^d - 1`.
    order: u64,
    generator: Poly,
    /// Discrete log of each residue index mod the prime; entry 0 unused.
    dlog: Vec<u64>,
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn pow_mod(ring: &PolyRing, base: &Poly, mut e: u64, m: &MonicPoly) -> Poly {
    let mut acc = Poly::one();
    let mut b = ring.rem(base, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = ring.rem(&ring.mul(&acc, &b), m);
        }
        b = ring.rem(&ring.mul(&b, &b), m);
        e >>= 1;
    }
    acc
}

impl PrimeData {
    fn new(ring: &PolyRing, prime: &MonicPoly) -> Self {
        let d = prime.degree();
        let size = ring.count(d).expect("residue field fits");
        let order = size - 1;
        let divisors = prime_divisors(order);
        let generator = (1..size)
            .map(|i| ring.residue_from_index(d, i))
            .find(|g| divisors.iter().all(|&l| pow_mod(ring, g, order / l, prime) != Poly::one()))
            .expect("the multiplicative group of a finite field is cyclic");
        let mut dlog = vec![0u64; size as usize];
        let mut x = Poly::one();
        for j in 0..order {
            dlog[ring.residue_index(&x, d) as usize] = j;
            x = ring.rem(&ring.mul(&x, &generator), prime);
        }
        PrimeData { prime: prime.clone(), order, generator, dlog }
    }
}

/// The group of Dirichlet characters mod `Q`.
///
/// Characters are numbered by their exponent tuples read as a mixed-radix
/// number with the first prime least significant, so index 0 is `chi_0`.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    ring: PolyRing,
    residues: ResidueSystem,
    primes: Vec<PrimeData>,
    /// `logs[unit position][i]` is the discrete log mod the i-th prime.
    logs: Vec<Vec<u64>>,
    /// `exp(2 pi i j / period)` where `period` is the lcm of the cyclic orders.
    roots: Vec<Complex64>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl CharacterGroup {
    pub fn new(ring: &PolyRing, modulus: &MonicPoly) -> Result<Self> {
        let residues = ResidueSystem::new(ring, modulus)?;
        let primes: Vec<PrimeData> =
            residues.prime_factors().iter().map(|p| PrimeData::new(ring, p)).collect();
        let width = modulus.degree();
        let logs = residues
            .units()
            .iter()
            .map(|&u| {
                let a = ring.residue_from_index(width, u);
                primes
                    .iter()
                    .map(|pd| {
                        let r = ring.rem(&a, &pd.prime);
                        pd.dlog[ring.residue_index(&r, pd.prime.degree()) as usize]
                    })
                    .collect()
            })
            .collect();
        let period = primes.iter().fold(1u64, |l, p| l / gcd(l, p.order) * p.order);
        let roots = (0..period).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / period as f64)).collect();
        Ok(CharacterGroup { ring: ring.clone(), residues, primes, logs, roots })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn modulus(&self) -> &MonicPoly {
        self.residues.modulus()
    }

    pub fn residues(&self) -> &ResidueSystem {
        &self.residues
    }

    /// Number of characters, equal to `phi(Q)`.
    pub fn len(&self) -> usize {
        self.primes.iter().map(|p| p.order as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(prime, generator)` for each prime factor of `Q`.
    pub fn generators(&self) -> Vec<(MonicPoly, Poly)> {
        self.primes.iter().map(|p| (p.prime.clone(), p.generator.clone())).collect()
    }

    pub fn exponents(&self, chi: usize) -> Vec<u64> {
        let mut rest = chi as u64;
        self.primes
            .iter()
            .map(|p| {
                let e = rest % p.order;
                rest /= p.order;
                e
            })
            .collect()
    }

    pub fn index_of(&self, exponents: &[u64]) -> Option<usize> {
        if exponents.len() != self.primes.len() {
            return None;
        }
        let mut idx = 0u64;
        for (p, &e) in self.primes.iter().zip(exponents).rev() {
            if e >= p.order {
                return None;
            }
            idx = idx * p.order + e;
        }
        Some(idx as usize)
    }

    /// Exponent of `chi` on each cyclic factor, rescaled to the common period.
    fn weights(&self, chi: usize) -> Vec<u64> {
        let period = self.roots.len() as u64;
        self.primes.iter().zip(self.exponents(chi)).map(|(p, e)| e * (period / p.order)).collect()
    }

    fn phase(&self, weights: &[u64], unit: usize) -> Complex64 {
        let period = self.roots.len() as u128;
        let j = weights.iter().zip(&self.logs[unit]).map(|(&w, &l)| w as u128 * l as u128 % period).sum::<u128>();
        self.roots[(j % period) as usize]
    }

    /// `chi(A)` for the unit at position `unit` of `residues().units()`.
    pub fn value(&self, chi: usize, unit: usize) -> Complex64 {
        self.phase(&self.weights(chi), unit)
    }

    /// `chi(A)` for every unit, in the order of `residues().units()`.
    pub fn values(&self, chi: usize) -> Vec<Complex64> {
        let w = self.weights(chi);
        (0..self.logs.len()).map(|u| self.phase(&w, u)).collect()
    }

    /// `chi(f)`, extended by zero to non-units.
    pub fn value_of(&self, chi: usize, f: &Poly) -> Complex64 {
        let m = self.modulus();
        let idx = self.ring.residue_index(&self.ring.rem(f, m), m.degree());
        match self.residues.unit_position(idx) {
            Some(pos) => self.value(chi, pos),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Trivial on the constants `F_q^*`.
    pub fn is_even(&self, chi: usize) -> bool {
        (1..self.ring.q()).all(|c| (self.value_of(chi, &Poly::new(vec![c])) - 1.0).norm() < 1e-9)
    }

    /// Whether `chi` is not induced from a proper divisor of `Q`, which for
    /// squarefree `Q` means every local exponent is nonzero.
    pub fn is_primitive(&self, chi: usize) -> bool {
        self.exponents(chi).iter().all(|&e| e != 0)
    }

    /// The full table `values[chi][unit]`.
    pub fn table(&self) -> Vec<Vec<Complex64>> {
        (0..self.len())
            .into_par_iter()
            .map(|chi| self.values(chi))
            .collect()
    }

    /// Largest deviation in the two orthogonality relations, summed over
    /// units and over characters respectively, each scaled by `1/phi`.
    pub fn orthogonality_residuals(&self) -> (f64, f64) {
        let t = self.table();
        let n = t.len();
        let inv = 1.0 / n as f64;
        let over_units = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut worst = 0.0f64;
                for b in 0..n {
                    let s: Complex64 = t[a].iter().zip(&t[b]).map(|(x, y)| x * y.conj()).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s * inv - target).norm());
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        let over_chars = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut worst = 0.0f64;
                for b in 0..n {
                    let s: Complex64 = t.iter().map(|row| row[a] * row[b].conj()).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s * inv - target).norm());
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        (over_units, over_chars)
    }
}

/// `c_{1,rho x chi,n}` for `n = 0..=n_max`.
#[derive(Debug, Clone, Serialize)]
pub struct TwistedCoeffs {
    pub chi: usize,
    pub exponents: Vec<u64>,
    pub coeffs: Vec<Complex64>,
}

/// Per-class sums `B_n(A) = sum_{f in M_n, f = A mod Q} a_f`, from which
/// every twisted coefficient is a short character sum.
#[derive(Debug, Clone)]
pub struct TwistTable {
    group: Arc<CharacterGroup>,
    q: u32,
    weight: u32,
    degree_r: u32,
    hypothesis: Option<String>,
    buckets: Vec<Vec<f64>>,
}

impl TwistTable {
    pub fn new(model: &LFunctionModel, group: Arc<CharacterGroup>, n_max: usize) -> Result<Self> {
        let ring = model.ring();
        check_budget(ring, n_max, false)?;
        let sieve = Arc::new(PrimeSieve::new(ring.clone(), n_max.max(1)));
        let coeffs = CoeffTable::build(model, sieve, n_max)?;
        Self::from_coeffs(model, group, &coeffs, n_max)
    }

    pub fn from_coeffs(
        model: &LFunctionModel,
        group: Arc<CharacterGroup>,
        coeffs: &CoeffTable,
        n_max: usize,
    ) -> Result<Self> {
        if n_max > coeffs.n_max() {
            return Err(Error::InvalidArgument(format!(
                "coefficient table stops at degree {}",
                coeffs.n_max()
            )));
        }
        let ring = model.ring();
        let buckets = (0..=n_max)
            .map(|n| {
                bucket_sums(ring, group.residues(), n, coeffs.degree_values(n))
                    .map(|b| b.into_iter().map(|v| v as f64).collect())
            })
            .collect::<Result<_>>()?;
        let (degree_r, hypothesis) = match model.degree_r(group.modulus()) {
            Ok(r) => (r, None),
            Err(Error::HypothesisViolated(why)) => (model.nominal_degree_r(group.modulus()), Some(why)),
            Err(e) => return Err(e),
        };
        Ok(TwistTable { group, q: ring.q(), weight: model.weight(), degree_r, hypothesis, buckets })
    }

    pub fn group(&self) -> &Arc<CharacterGroup> {
        &self.group
    }

    pub fn n_max(&self) -> usize {
        self.buckets.len() - 1
    }

    pub fn degree_r(&self) -> u32 {
        self.degree_r
    }

    /// Set when the modulus fails the model's hypothesis for `R`.
    pub fn hypothesis_violation(&self) -> Option<&str> {
        self.hypothesis.as_deref()
    }

    /// `q^{(1+w)/2}`, the inverse of the expected root modulus.
    pub fn unitary_scale(&self) -> f64 {
        (self.q as f64).powf((1 + self.weight) as f64 / 2.0)
    }

    pub fn coeffs(&self, chi: usize) -> TwistedCoeffs {
        let values = self.group.values(chi);
        let coeffs = self.buckets.iter().map(|b| values.iter().zip(b).map(|(x, &v)| x * v).sum()).collect();
        TwistedCoeffs { chi, exponents: self.group.exponents(chi), coeffs }
    }
}

/// Roots of `sum coeffs[i] x^i` by Aberth iteration. Leading coefficient
/// must be nonzero.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = coeffs[d];
    let a: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in a.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let radius = a[0].norm().powf(1.0 / d as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|j| Complex64::from_polar(radius, TAU * j as f64 / d as f64 + 0.4))
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 =
                (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharacterClass {
    GoodLike,
    BadLike,
    TruncationFailure,
}

impl std::fmt::Display for CharacterClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CharacterClass::GoodLike => "good-like",
            CharacterClass::BadLike => "bad-like",
            CharacterClass::TruncationFailure => "truncation-failure",
        })
    }
}

/// What the classifier saw for one character.
#[derive(Debug, Clone, Serialize)]
pub struct CharacterDiagnostics {
    pub chi: usize,
    pub exponents: Vec<u64>,
    pub degree_r: u32,
    /// `max |c_n| / q^{n(1+w)/2}` over `n = R+1..=R+3`.
    pub max_tail: f64,
    /// Degree after dropping negligible top coefficients.
    pub degree: usize,
    pub roots: Vec<Complex64>,
    /// `|alpha| q^{(1+w)/2}` for each root, ascending.
    pub root_moduli: Vec<f64>,
    pub class: CharacterClass,
}

/// Classifies `chi` by the root moduli of its degree-`R` twisted polynomial.
/// The table must reach degree `R + 3`.
pub fn diagnose_character(table: &TwistTable, chi: usize) -> Result<CharacterDiagnostics> {
    let r = table.degree_r as usize;
    if table.n_max() < r + 3 {
        return Err(Error::InvalidArgument(format!(
            "twist table must reach degree {}, has {}",
            r + 3,
            table.n_max()
        )));
    }
    let tc = table.coeffs(chi);
    let s = table.unitary_scale();
    let scaled = |n: usize| tc.coeffs[n].norm() / s.powi(n as i32);
    let max_tail = (r + 1..=r + 3).map(scaled).fold(0.0, f64::max);
    let mut degree = r;
    while degree > 0 && scaled(degree) <= TRUNCATION_TOLERANCE {
        degree -= 1;
    }
    let roots = polynomial_roots(&tc.coeffs[..=degree]);
    let mut root_moduli: Vec<f64> = roots.iter().map(|z| z.norm() * s).collect();
    root_moduli.sort_by(f64::total_cmp);
    let class = if max_tail > TRUNCATION_TOLERANCE {
        CharacterClass::TruncationFailure
    } else if root_moduli.iter().all(|m| (m - 1.0).abs() <= UNITARITY_TOLERANCE) {
        CharacterClass::GoodLike
    } else {
        CharacterClass::BadLike
    };
    Ok(CharacterDiagnostics {
        chi,
        exponents: tc.exponents,
        degree_r: table.degree_r,
        max_tail,
        degree,
        roots,
        root_moduli,
        class,
    })
}

/// Like [`diagnose_character`] but fails on a non-negligible tail.
pub fn classify_character(table: &TwistTable, chi: usize) -> Result<CharacterDiagnostics> {
    if chi == 0 {
        return Err(Error::InvalidArgument("the trivial character is not classified".into()));
    }
    let d = diagnose_character(table, chi)?;
    if d.class == CharacterClass::TruncationFailure {
        return Err(Error::TruncationFailure { r: d.degree_r as usize, max_tail: d.max_tail });
    }
    Ok(d)
}

/// Diagnostics for every nontrivial character, in index order.
pub fn twist_scan(table: &TwistTable) -> Result<Vec<CharacterDiagnostics>> {
    (1..table.group.len()).into_par_iter().map(|chi| diagnose_character(table, chi)).collect()
}

/// Coefficient of `T^n` in `(sum c_m T^m)^k`.
pub fn kth_power_coefficient(c: &[Complex64], k: u32, n: usize) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = vec![zero; n + 1];
    acc[0] = Complex64::new(1.0, 0.0);
    for _ in 0..k {
        let mut next = vec![zero; n + 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in c.iter().enumerate().take(n + 1 - i) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc[n]
}

/// `(1/phi^2) sum_{chi != chi_0} |c_{k,rho x chi,n}|^2`.
pub fn variance_via_characters(table: &TwistTable, k: u32, n: usize) -> Result<f64> {
    if n > table.n_max() {
        return Err(Error::InvalidArgument(format!("twist table stops at degree {}", table.n_max())));
    }
    let phi = table.group.len();
    let terms: Vec<f64> = (1..phi)
        .into_par_iter()
        .map(|chi| kth_power_coefficient(&table.coeffs(chi).coeffs[..=n], k, n).norm_sqr())
        .collect();
    Ok(terms.iter().sum::<f64>() / (phi as f64 * phi as f64))
}
