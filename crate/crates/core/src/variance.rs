//! Sums of `d_k` over arithmetic progressions mod `Q`, their exact mean and
//! variance over the unit residues, and the normalized variance next to the
//! matrix integral `I_k(n; R)` that predicts its large-`q` limit.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::lfunc::{CoeffTable, DivisorTable, LFunctionModel, ModelKind, ModelSpec};
use crate::poly::{MonicPoly, Poly, PolyRing, PrimeSieve, ResidueSystem};
use crate::rmt::lattice_count;

/// Largest `q^n` enumerated without an explicit override.
pub const ENUMERATION_BUDGET: u128 = 100_000_000;

const CHUNK: u64 = 1 << 14;

pub(crate) fn check_budget(ring: &PolyRing, n: usize, allow_large: bool) -> Result<()> {
    let size = (ring.q() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > ENUMERATION_BUDGET && !allow_large {
        return Err(Error::BudgetExceeded { size, budget: ENUMERATION_BUDGET });
    }
    if size > u32::MAX as u128 {
        return Err(Error::BudgetExceeded { size, budget: u32::MAX as u128 });
    }
    Ok(())
}

/// Buckets `sum_{f in M_n, f = A mod Q} values[index(f)]` for every unit `A`,
/// in the order of `residues.units()`. Non-unit classes are dropped.
///
/// The enumeration is split into fixed chunks that are summed in parallel
/// and merged in chunk order, so the result does not depend on scheduling.
pub fn bucket_sums(
    ring: &PolyRing,
    residues: &ResidueSystem,
    n: usize,
    values: &[i128],
) -> Result<Vec<i128>> {
    let modulus = residues.modulus();
    let width = modulus.degree();
    let q = ring.q() as u64;
    let field = ring.field();
    // t^i mod Q, padded to the residue width
    let basis: Vec<Vec<u32>> = (0..=n)
        .map(|i| {
            let mut c = vec![0u32; i + 1];
            c[i] = 1;
            let mut r = ring.rem(&Poly::new(c), modulus).coeffs().to_vec();
            r.resize(width, 0);
            r
        })
        .collect();
    let phi = residues.phi() as usize;
    let total = values.len() as u64;
    debug_assert_eq!(Some(total), ring.count(n));

    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<Vec<i128>> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<i128>> {
            let mut buckets = vec![0i128; phi];
            let mut digits = vec![0u32; n];
            let mut residue = vec![0u32; width];
            let lo = c * CHUNK;
            let hi = total.min(lo + CHUNK);
            for idx in lo..hi {
                let mut x = idx;
                for d in digits.iter_mut() {
                    *d = (x % q) as u32;
                    x /= q;
                }
                residue.copy_from_slice(&basis[n]);
                for (i, &ci) in digits.iter().enumerate() {
                    if ci == 0 {
                        continue;
                    }
                    for (slot, &b) in residue.iter_mut().zip(&basis[i]) {
                        *slot = field.add(*slot, field.mul(ci, b));
                    }
                }
                let ridx = residue.iter().rev().fold(0u64, |acc, &v| acc * q + v as u64);
                if let Some(pos) = residues.unit_position(ridx) {
                    buckets[pos] = buckets[pos]
                        .checked_add(values[idx as usize])
                        .ok_or(Error::Overflow("progression sum"))?;
                }
            }
            Ok(buckets)
        })
        .collect::<Result<_>>()?;
    partial.into_iter().try_fold(vec![0i128; phi], |mut acc, part| {
        for (a, b) in acc.iter_mut().zip(part) {
            *a = a.checked_add(b).ok_or(Error::Overflow("progression sum"))?;
        }
        Ok(acc)
    })
}

/// `S_{k,n,Q}(A)` for every unit residue `A`.
#[derive(Debug, Clone)]
pub struct ProgressionSums {
    pub model: ModelKind,
    pub q: u32,
    pub k: u32,
    pub n: usize,
    pub modulus: MonicPoly,
    /// Residue indices of the units, ascending.
    pub units: Vec<u64>,
    /// `sums[i]` belongs to `units[i]`.
    pub sums: Vec<BigInt>,
}

impl ProgressionSums {
    pub fn phi(&self) -> u64 {
        self.units.len() as u64
    }

    /// `S(A)` for a residue index, or `None` if it is not a unit.
    pub fn get(&self, residue_index: u64) -> Option<&BigInt> {
        self.units.binary_search(&residue_index).ok().map(|i| &self.sums[i])
    }
}

/// Computes `S_{k,n,Q}(A)` from a prebuilt divisor table.
pub fn progression_sums_from_table(
    model: &LFunctionModel,
    table: &DivisorTable,
    residues: &ResidueSystem,
    n: usize,
) -> Result<ProgressionSums> {
    if n > table.n_max() {
        return Err(Error::InvalidArgument(format!("divisor table stops at degree {}", table.n_max())));
    }
    let ring = model.ring();
    let buckets = bucket_sums(ring, residues, n, table.degree_values(n))?;
    Ok(ProgressionSums {
        model: model.kind(),
        q: ring.q(),
        k: table.k(),
        n,
        modulus: residues.modulus().clone(),
        units: residues.units().to_vec(),
        sums: buckets.into_iter().map(BigInt::from).collect(),
    })
}

/// Computes `S_{k,n,Q}(A)` from scratch.
pub fn progression_sums(
    model: &LFunctionModel,
    k: u32,
    n: usize,
    modulus: &MonicPoly,
    allow_large: bool,
) -> Result<ProgressionSums> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let ring = model.ring();
    check_budget(ring, n, allow_large)?;
    let residues = ResidueSystem::new(ring, modulus)?;
    let sieve = Arc::new(PrimeSieve::new(ring.clone(), n));
    let coeffs = CoeffTable::build(model, sieve, n)?;
    let table = DivisorTable::build(k, &coeffs)?;
    progression_sums_from_table(model, &table, &residues, n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "flag", content = "detail")]
pub enum ReportFlag {
    /// The modulus does not meet the hypothesis under which the limit is proved.
    HypothesisViolated(String),
    /// `n` lies outside `[1, kR]`; the predicted value is reported as 0.
    OutOfRange,
    /// Every progression sum is equal.
    ZeroVariance,
}

impl fmt::Display for ReportFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportFlag::HypothesisViolated(why) => write!(f, "hypothesis-violated({why})"),
            ReportFlag::OutOfRange => f.write_str("out-of-range"),
            ReportFlag::ZeroVariance => f.write_str("zero-variance"),
        }
    }
}

/// Exact statistics of one progression experiment.
#[derive(Debug, Clone)]
pub struct VarianceReport {
    pub q: u32,
    pub p: u32,
    pub r: u32,
    pub model: ModelKind,
    pub k: u32,
    pub n: usize,
    pub modulus: MonicPoly,
    pub phi: u64,
    pub weight: u32,
    /// Degree of the twisted L-functions.
    pub degree_r: u32,
    pub expectation: BigRational,
    pub variance: BigRational,
    /// `phi * Var / q^{n(1+w)}`.
    pub normalized: BigRational,
    /// `I_k(n; R)`, or 0 outside `n in [1, kR]`.
    pub predicted: BigUint,
    /// `|normalized - predicted| / predicted`, undefined when predicted is 0.
    pub deviation: Option<f64>,
    pub flags: Vec<ReportFlag>,
}

impl VarianceReport {
    pub fn has_flag(&self, flag: &ReportFlag) -> bool {
        self.flags.contains(flag)
    }

    pub fn hypothesis_violated(&self) -> bool {
        self.flags.iter().any(|f| matches!(f, ReportFlag::HypothesisViolated(_)))
    }
}

/// Mean of `S(A)` over the units.
pub fn expectation(sums: &[BigInt]) -> BigRational {
    let total: BigInt = sums.iter().sum();
    BigRational::new(total, BigInt::from(sums.len()))
}

/// `(1/phi) sum |S(A) - E|^2`, straight from the definition.
pub fn variance_by_definition(sums: &[BigInt]) -> BigRational {
    let e = expectation(sums);
    let phi = BigInt::from(sums.len());
    let acc = sums.iter().fold(BigRational::zero(), |acc, s| {
        let d = BigRational::from_integer(s.clone()) - &e;
        acc + &d * &d
    });
    acc / BigRational::from_integer(phi)
}

/// `(1/phi) sum S(A)^2 - E^2`.
pub fn variance_by_second_moment(sums: &[BigInt]) -> BigRational {
    let e = expectation(sums);
    let sq: BigInt = sums.iter().map(|s| s * s).sum();
    BigRational::new(sq, BigInt::from(sums.len())) - &e * &e
}

/// Builds the report for a set of progression sums.
pub fn variance_report(model: &LFunctionModel, ps: &ProgressionSums) -> VarianceReport {
    let field = model.ring().field();
    let mut flags = Vec::new();
    let degree_r = match model.degree_r(&ps.modulus) {
        Ok(r) => r,
        Err(Error::HypothesisViolated(why)) => {
            flags.push(ReportFlag::HypothesisViolated(why));
            model.nominal_degree_r(&ps.modulus)
        }
        Err(e) => unreachable!("degree_r only reports hypothesis violations: {e}"),
    };
    let expectation = expectation(&ps.sums);
    let variance = variance_by_definition(&ps.sums);
    if variance.is_zero() {
        flags.push(ReportFlag::ZeroVariance);
    }
    let w = model.weight();
    let scale = BigInt::from(ps.q).pow(ps.n as u32 * (1 + w));
    let normalized = &variance * BigRational::new(BigInt::from(ps.phi()), scale);

    let in_range = ps.n >= 1 && (ps.n as u64) <= ps.k as u64 * degree_r as u64;
    let predicted = if in_range {
        lattice_count(ps.k, ps.n as u64, degree_r)
    } else {
        flags.push(ReportFlag::OutOfRange);
        BigUint::zero()
    };
    let deviation = (!predicted.is_zero()).then(|| {
        let pred = BigRational::from_integer(BigInt::from(predicted.clone()));
        ((&normalized - &pred).abs() / pred).to_f64().unwrap_or(f64::NAN)
    });
    VarianceReport {
        q: ps.q,
        p: field.p(),
        r: field.r(),
        model: ps.model,
        k: ps.k,
        n: ps.n,
        modulus: ps.modulus.clone(),
        phi: ps.phi(),
        weight: w,
        degree_r,
        expectation,
        variance,
        normalized,
        predicted,
        deviation,
        flags,
    }
}

/// How the modulus is chosen for each `q` in a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModulusTemplate {
    /// Fixed coefficient indices (valid when every index is `< q`).
    Coeffs(Poly),
    /// The smallest monic irreducible of the given degree.
    Irreducible(usize),
}

impl ModulusTemplate {
    pub fn instantiate(&self, ring: &PolyRing) -> Result<MonicPoly> {
        match self {
            ModulusTemplate::Coeffs(p) => {
                ring.validate(p)?;
                p.clone().into_monic()
            }
            ModulusTemplate::Irreducible(d) => Ok(ring.smallest_irreducible(*d)),
        }
    }
}

impl FromStr for ModulusTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(d) = s.strip_prefix("irr") {
            let d: usize = d
                .parse()
                .map_err(|_| Error::InvalidPoly(format!("bad irreducible template {s:?}")))?;
            if d == 0 {
                return Err(Error::InvalidPoly("irreducible degree must be >= 1".into()));
            }
            return Ok(ModulusTemplate::Irreducible(d));
        }
        let p: Poly = s.parse()?;
        if !p.is_monic() {
            return Err(Error::InvalidPoly(format!("{p} is not monic")));
        }
        Ok(ModulusTemplate::Coeffs(p))
    }
}

impl fmt::Display for ModulusTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulusTemplate::Coeffs(p) => p.fmt(f),
            ModulusTemplate::Irreducible(d) => write!(f, "irr{d}"),
        }
    }
}

/// Reports for several `n` over one field, sharing the coefficient tables.
pub fn field_reports(
    spec: &ModelSpec,
    q: u64,
    k: u32,
    ns: &[usize],
    template: &ModulusTemplate,
    allow_large: bool,
) -> Result<Vec<VarianceReport>> {
    let ring = PolyRing::new(Arc::new(FieldCtx::from_order(q)?));
    let model = spec.build(ring.clone())?;
    let modulus = template.instantiate(&ring)?;
    let n_max = ns.iter().copied().max().unwrap_or(0);
    if ns.contains(&0) {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    check_budget(&ring, n_max, allow_large)?;
    let residues = ResidueSystem::new(&ring, &modulus)?;
    let sieve = Arc::new(PrimeSieve::new(ring.clone(), n_max.max(1)));
    let coeffs = CoeffTable::build(&model, sieve, n_max)?;
    let table = DivisorTable::build(k, &coeffs)?;
    ns.iter()
        .map(|&n| {
            let ps = progression_sums_from_table(&model, &table, &residues, n)?;
            Ok(variance_report(&model, &ps))
        })
        .collect()
}

/// Runs one experiment for field size `q`.
pub fn run_experiment(
    spec: &ModelSpec,
    q: u64,
    k: u32,
    n: usize,
    template: &ModulusTemplate,
    allow_large: bool,
) -> Result<VarianceReport> {
    Ok(field_reports(spec, q, k, &[n], template, allow_large)?.remove(0))
}

/// One row of a convergence sweep: the report, or the error for that `q`.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub q: u64,
    pub result: Result<VarianceReport>,
}

/// Reports at fixed `(k, n, deg Q)` over a list of field sizes. Errors are
/// recorded per `q` and the sweep continues.
pub fn convergence_sweep(
    spec: &ModelSpec,
    k: u32,
    n: usize,
    template: &ModulusTemplate,
    qs: &[u64],
    allow_large: bool,
) -> Vec<SweepEntry> {
    qs.iter()
        .map(|&q| SweepEntry { q, result: run_experiment(spec, q, k, n, template, allow_large) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(q: u64) -> PolyRing {
        PolyRing::new(Arc::new(FieldCtx::from_order(q).unwrap()))
    }

    #[test]
    fn trivial_k1_is_constant() {
        for q in [3u64, 5] {
            let r = ring(q);
            let model = LFunctionModel::trivial(r.clone());
            let modulus = r.parse_monic("[0,1,1]").unwrap();
            for n in 2..=4 {
                let ps = progression_sums(&model, 1, n, &modulus, false).unwrap();
                let expected = BigInt::from(q.pow(n as u32 - 2));
                assert!(ps.sums.iter().all(|s| *s == expected));
                let rep = variance_report(&model, &ps);
                assert!(rep.variance.is_zero());
                assert!(rep.has_flag(&ReportFlag::ZeroVariance));
            }
        }
    }

    #[test]
    fn legendre_degree_one_support() {
        // Q = t(t+1) over GF(3): t+2 is the only unit-class monic of degree 1
        let r = ring(3);
        let model = LFunctionModel::legendre(r.clone()).unwrap();
        let modulus = r.parse_monic("[0,1,1]").unwrap();
        let ps = progression_sums(&model, 2, 1, &modulus, false).unwrap();
        let sieve = Arc::new(PrimeSieve::new(r.clone(), 1));
        let a = CoeffTable::build(&model, sieve, 1).unwrap();
        let a_t2 = a.value(&r.parse_monic("[2,1]").unwrap());
        let nonzero: Vec<&BigInt> = ps.sums.iter().filter(|s| !s.is_zero()).collect();
        assert_eq!(ps.get(5), Some(&BigInt::from(2 * a_t2)));
        assert!(nonzero.len() <= 1);
    }

    #[test]
    fn both_variance_formulas_agree_and_are_integral() {
        for (q, kind) in [(5u64, "trivial"), (5, "legendre"), (7, "legendre"), (9, "trivial")] {
            let r = ring(q);
            let model = kind.parse::<ModelSpec>().unwrap().build(r.clone()).unwrap();
            let modulus = r.parse_monic("[0,1,1]").unwrap();
            for k in 1..=3 {
                for n in 1..=3 {
                    let ps = progression_sums(&model, k, n, &modulus, false).unwrap();
                    let def = variance_by_definition(&ps.sums);
                    assert_eq!(def, variance_by_second_moment(&ps.sums));
                    let phi = BigRational::from_integer(BigInt::from(ps.phi()));
                    assert!((expectation(&ps.sums) * &phi).is_integer());
                    assert!((def * &phi * &phi).is_integer());
                }
            }
        }
    }

    #[test]
    fn parallel_buckets_match_serial_pass() {
        let r = ring(7);
        let model = LFunctionModel::legendre(r.clone()).unwrap();
        let modulus = r.parse_monic("[0,1,1]").unwrap();
        let residues = ResidueSystem::new(&r, &modulus).unwrap();
        let sieve = Arc::new(PrimeSieve::new(r.clone(), 5));
        let a = CoeffTable::build(&model, sieve, 5).unwrap();
        let d = DivisorTable::build(2, &a).unwrap();
        let fast = bucket_sums(&r, &residues, 5, d.degree_values(5)).unwrap();
        let mut serial = vec![0i128; residues.phi() as usize];
        for f in r.monic_enumerate(5) {
            let res = r.reduce_mod(&f, &modulus);
            if let Some(pos) = residues.unit_position(r.residue_index(&res, 2)) {
                serial[pos] += d.value(&f);
            }
        }
        assert_eq!(fast, serial);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let one = pool.install(|| bucket_sums(&r, &residues, 5, d.degree_values(5)).unwrap());
        assert_eq!(one, fast);
    }

    #[test]
    fn range_and_hypothesis_flags() {
        let r = ring(5);
        let model = LFunctionModel::legendre(r.clone()).unwrap();
        // (t-1)(t+1): gcd with t(t-1) is t-1
        let bad = r.parse_monic("[4,0,1]").unwrap();
        let rep = variance_report(&model, &progression_sums(&model, 2, 2, &bad, false).unwrap());
        assert!(rep.hypothesis_violated());

        let good = r.parse_monic("[0,1,1]").unwrap();
        let rep = variance_report(&model, &progression_sums(&model, 2, 2, &good, false).unwrap());
        assert!(!rep.hypothesis_violated());
        assert_eq!(rep.degree_r, 3);
        assert_eq!(rep.predicted, BigUint::from(10u32));
        assert!(rep.deviation.is_some());

        let triv = LFunctionModel::trivial(r.clone());
        let rep = variance_report(&triv, &progression_sums(&triv, 1, 3, &good, false).unwrap());
        assert!(rep.has_flag(&ReportFlag::OutOfRange));
        assert_eq!(rep.deviation, None);
    }

    #[test]
    fn budget_guard() {
        let r = ring(17);
        let model = LFunctionModel::trivial(r.clone());
        let modulus = r.parse_monic("[0,1,1]").unwrap();
        assert!(matches!(
            progression_sums(&model, 2, 7, &modulus, false),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn templates() {
        assert_eq!("irr3".parse::<ModulusTemplate>().unwrap(), ModulusTemplate::Irreducible(3));
        let t: ModulusTemplate = "[0,1,1]".parse().unwrap();
        assert_eq!(t.to_string(), "[0,1,1]");
        assert!("[0,1,2]".parse::<ModulusTemplate>().is_err());
        let r = ring(5);
        assert_eq!(ModulusTemplate::Irreducible(2).instantiate(&r).unwrap().to_string(), "[2,0,1]");
        assert!(ModulusTemplate::Coeffs(Poly::new(vec![7, 1])).instantiate(&r).is_err());
    }

    #[test]
    fn sweep_records_errors_and_continues() {
        let spec: ModelSpec = "legendre".parse().unwrap();
        let t: ModulusTemplate = "[0,1,1]".parse().unwrap();
        let rows = convergence_sweep(&spec, 2, 1, &t, &[4, 3, 6, 5], false);
        assert!(matches!(rows[0].result, Err(Error::EvenCharacteristic)));
        assert!(rows[1].result.is_ok());
        assert!(rows[2].result.is_err());
        assert!(rows[3].result.is_ok());
    }
}
