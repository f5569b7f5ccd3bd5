//! Acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Criterion 11 asks every nontrivial character to be good-like, which is
//! false for characters trivial on the constants and for imprimitive ones.
//! It is run as stated and listed in `KNOWN_FAILURES`; any other failure
//! makes the run exit nonzero.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use ffvar::rmt::{gamma_from_lattice, gamma_mc, haar_mc_all, lattice_count, McEstimate};
use ffvar::{
    bucket_sums, field_reports, CharacterClass, progression_sums, twist_scan, variance_by_definition, variance_via_characters,
    CharacterGroup, CoeffTable, DivisorTable, FieldCtx, LFunctionModel, ModelSpec, ModulusTemplate, MonicPoly,
    PolyRing, PrimeSieve, ResidueSystem, TwistTable,
};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

const KNOWN_FAILURES: &[u32] = &[11];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn ring(q: u64) -> PolyRing {
    PolyRing::new(Arc::new(FieldCtx::from_order(q).unwrap()))
}

fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// The two strict ranges where the count is a single binomial.
fn closed_binomial(k: u32, n: u64, r: u32) -> Option<BigUint> {
    let (k, r) = (k as u64, r as u64);
    let dim = k * k - 1;
    if n < r {
        Some(binom(n + dim, dim))
    } else if (k - 1) * r < n && n < k * r {
        Some(binom(k * r - n + dim, dim))
    } else {
        None
    }
}

fn squarefree(ring: &PolyRing, d: usize) -> Vec<MonicPoly> {
    ring.monic_enumerate(d).filter(|m| ring.is_squarefree(m)).collect()
}

fn criterion_1() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, rs) in [(2u32, 2u32..=8), (3, 2..=5)] {
        for r in rs {
            for n in 0..=(k * r) as u64 {
                if let Some(expect) = closed_binomial(k, n, r) {
                    checked += 1;
                    if lattice_count(k, n, r) != expect {
                        bad.push(format!("(k={k},n={n},R={r})"));
                    }
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} triples on the strict ranges, mismatches: {bad:?}"))
}

fn criterion_2() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, rs) in [(2u32, 2u32..=8), (3, 2..=5)] {
        for r in rs {
            let kr = (k * r) as u64;
            for n in 0..=kr {
                checked += 1;
                if lattice_count(k, n, r) != lattice_count(k, kr - n, r) {
                    bad.push(format!("(k={k},n={n},R={r})"));
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} triples, asymmetric: {bad:?}"))
}

fn criterion_3() -> Verdict {
    let mut bad = Vec::new();
    for k in 1..=5u32 {
        for n in 0..=k as u64 {
            let b = binom(k as u64, n);
            if lattice_count(k, n, 1) != &b * &b {
                bad.push(format!("(k={k},n={n})"));
            }
        }
    }
    verdict(bad.is_empty(), format!("k=1..5, mismatches: {bad:?}"))
}

fn criterion_4() -> Verdict {
    let samples = 100_000;
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for k in 1..=3u32 {
        for r in 1..=5u32 {
            let est = haar_mc_all(k, r, samples, 1000 + (10 * k + r) as u64).unwrap();
            for (n, e) in est.iter().enumerate() {
                let exact = lattice_count(k, n as u64, r).to_f64().unwrap();
                checked += 1;
                if e.stderr > 0.0 {
                    worst = worst.max((e.estimate - exact).abs() / e.stderr);
                }
                if !e.agrees_with(exact, 3.0) {
                    bad.push(format!("(k={k},n={n},R={r}): {:.4} vs {exact}", e.estimate));
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} triples, worst {worst:.2} sigma, outside 3 sigma: {bad:?}"))
}

fn criterion_5() -> Verdict {
    let samples = 1_000_000;
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for i in 1..=9u32 {
        let c = i as f64 / 10.0;
        let est = gamma_mc(2, c, samples, 500 + i as u64).unwrap();
        let exact = c * c * c / 6.0;
        worst = worst.max((est.estimate - exact).abs() / est.stderr);
        if !est.agrees_with(exact, 3.0) {
            bad.push(format!("gamma_2({c}) = {:.6e} vs {exact:.6e}", est.estimate));
        }
    }
    let close = |a: &McEstimate, b: &McEstimate| {
        (a.estimate - b.estimate).abs() <= 3.0 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt()
    };
    for (k, cs) in [(2u32, vec![0.3, 0.6, 0.9]), (3, vec![0.5, 1.0, 1.25])] {
        for (j, c) in cs.into_iter().enumerate() {
            let a = gamma_mc(k, c, samples, 700 + j as u64).unwrap();
            let b = gamma_mc(k, k as f64 - c, samples, 800 + j as u64).unwrap();
            if !close(&a, &b) {
                bad.push(format!("k={k}: gamma({c}) = {:.6e}, gamma({}) = {:.6e}", a.estimate, k as f64 - c, b.estimate));
            }
        }
    }
    verdict(bad.is_empty(), format!("worst c^3/6 deviation {worst:.2} sigma, failures: {bad:?}"))
}

fn criterion_6() -> Verdict {
    let target = 1.0 / 48.0;
    let devs: Vec<(u32, f64)> = [50u32, 100, 200, 400]
        .iter()
        .map(|&r| {
            let g = gamma_from_lattice(2, 0.5, r).unwrap().to_f64().unwrap();
            (r, (g - target).abs() / target)
        })
        .collect();
    let monotone = devs.windows(2).all(|w| w[1].1 < w[0].1);
    let at_200 = devs[2].1;
    let table: Vec<String> = devs.iter().map(|(r, d)| format!("R={r}:{d:.4}")).collect();
    verdict(monotone && at_200 <= 0.07, format!("relative deviations {}", table.join(" ")))
}

fn criterion_7() -> Verdict {
    let qs = [5u64, 7, 11, 13, 17];
    let ns = [1usize, 2, 3, 4];
    let mut devs = vec![Vec::new(); ns.len()];
    for &q in &qs {
        let reports = field_reports(&ModelSpec::trivial(), q, 2, &ns, &ModulusTemplate::Irreducible(3), false).unwrap();
        for (i, rep) in reports.iter().enumerate() {
            devs[i].push(rep.deviation.unwrap());
        }
    }
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, d) in devs.iter().enumerate() {
        let last = *d.last().unwrap();
        ok &= last < d[0] && last <= 0.5;
        lines.push(format!("n={}: {}", ns[i], d.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",")));
    }
    verdict(ok, format!("deviation over q={qs:?}: {}", lines.join("; ")))
}

fn criterion_8() -> Verdict {
    let qs = [3u64, 5, 7, 9, 11, 13];
    let ns = [1usize, 2, 3];
    let predicted = [4u32, 10, 20];
    let template = ModulusTemplate::Coeffs(ffvar::Poly::new(vec![0, 1, 1]));
    let mut ok = true;
    let mut devs = vec![Vec::new(); ns.len()];
    println!("  legendre, k=2, Q=t(t+1): q, n, normalized, predicted, deviation");
    for &q in &qs {
        let reports = field_reports(&ModelSpec::legendre(), q, 2, &ns, &template, false).unwrap();
        for (i, rep) in reports.iter().enumerate() {
            ok &= !rep.hypothesis_violated();
            ok &= rep.degree_r == 3 && rep.predicted == BigUint::from(predicted[i]);
            let norm = rep.normalized.to_f64().unwrap();
            let dev = rep.deviation.unwrap();
            println!("  {q:>3} {:>2} {norm:>10.5} {:>4} {dev:>8.4}", ns[i], predicted[i]);
            devs[i].push(dev);
        }
    }
    // least-squares slope of deviation against q, per n
    let qf: Vec<f64> = qs.iter().map(|&q| q as f64).collect();
    let qbar = qf.iter().sum::<f64>() / qf.len() as f64;
    for d in &devs {
        let dbar = d.iter().sum::<f64>() / d.len() as f64;
        let slope: f64 = qf.iter().zip(d).map(|(q, y)| (q - qbar) * (y - dbar)).sum::<f64>()
            / qf.iter().map(|q| (q - qbar) * (q - qbar)).sum::<f64>();
        ok &= d.last().unwrap() < &d[0] && slope < 0.0;
    }
    verdict(ok, "deviations trend down over q for n=1,2,3; no hypothesis flag")
}

fn criterion_9() -> Verdict {
    let ring = ring(5);
    let modulus = ring.parse_monic("[0,1,1]").unwrap();
    let group = Arc::new(CharacterGroup::new(&ring, &modulus).unwrap());
    let mut worst = 0.0f64;
    let mut ok = true;
    for (model, n_max) in [
        (LFunctionModel::trivial(ring.clone()), 4usize),
        (LFunctionModel::legendre(ring.clone()).unwrap(), 3),
    ] {
        let table = TwistTable::new(&model, group.clone(), n_max).unwrap();
        for n in 1..=n_max {
            let ps = progression_sums(&model, 2, n, &modulus, false).unwrap();
            let exact = variance_by_definition(&ps.sums).to_f64().unwrap();
            let via = variance_via_characters(&table, 2, n).unwrap();
            // exact zeros (n > kR) get an absolute floor
            let diff = (via - exact).abs();
            worst = worst.max(if exact == 0.0 { diff } else { diff / exact.abs() });
            ok &= diff <= 1e-6 * exact.abs() + 1e-9;
        }
    }
    verdict(ok, format!("worst difference {worst:.3e} (relative, absolute where the variance is 0)"))
}

fn criterion_10() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let ring = ring(q);
        let model = LFunctionModel::trivial(ring.clone());
        let sieve = Arc::new(PrimeSieve::new(ring.clone(), 4));
        let table = DivisorTable::build(1, &CoeffTable::build(&model, sieve, 4).unwrap()).unwrap();
        for d in 1..=3usize {
            for m in squarefree(&ring, d) {
                let residues = ResidueSystem::new(&ring, &m).unwrap();
                for n in d..=d + 1 {
                    let sums: Vec<BigInt> = bucket_sums(&ring, &residues, n, table.degree_values(n))
                        .unwrap()
                        .into_iter()
                        .map(BigInt::from)
                        .collect();
                    checked += 1;
                    if !variance_by_definition(&sums).is_zero() {
                        bad.push(format!("q={q} Q={m} n={n}"));
                    }
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} (q, Q, n) cases, nonzero: {bad:?}"))
}

fn criterion_11() -> Verdict {
    let mut characters = 0usize;
    let mut failures = 0usize;
    let mut example = None;
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let ring = ring(q);
        let model = LFunctionModel::trivial(ring.clone());
        let target = (q as f64).powf(-0.5);
        let coeffs = CoeffTable::build(&model, Arc::new(PrimeSieve::new(ring.clone(), 5)), 5).unwrap();
        for d in 1..=3usize {
            for m in squarefree(&ring, d) {
                let group = Arc::new(CharacterGroup::new(&ring, &m).unwrap());
                // deg Q = 1 gives R = 0, so every twisted series must vanish past T^0
                let r = model.nominal_degree_r(&m) as usize;
                let table = TwistTable::from_coeffs(&model, group.clone(), &coeffs, r + 3).unwrap();
                for diag in twist_scan(&table).unwrap() {
                    characters += 1;
                    let unit = diag.roots.iter().all(|z| (z.norm() - target).abs() <= 1e-4);
                    if diag.class != CharacterClass::GoodLike || !unit {
                        failures += 1;
                        example.get_or_insert_with(|| {
                            format!(
                                "q={q} Q={m} chi={:?} even={} moduli={:?}",
                                diag.exponents,
                                group.is_even(diag.chi),
                                diag.roots.iter().map(|z| z.norm()).collect::<Vec<_>>()
                            )
                        });
                    }
                }
            }
        }
    }
    verdict(
        failures == 0,
        format!("{failures} of {characters} nontrivial characters not good-like; first: {}", example.unwrap_or_default()),
    )
}

/// Sum over ordered k-tuples of monics with product f of the product of a_{f_i}.
fn ordered_factorization_sum(
    ring: &PolyRing,
    a: &CoeffTable,
    k: u32,
    f: &MonicPoly,
    memo: &mut HashMap<(u32, MonicPoly), i128>,
) -> i128 {
    if k == 1 {
        return a.value(f);
    }
    if let Some(v) = memo.get(&(k, f.clone())) {
        return *v;
    }
    let mut total = 0i128;
    for d in 0..=f.degree() {
        for g in ring.monic_enumerate(d) {
            if let Some(rest) = ring.divide_exact(f, &g) {
                let ag = a.value(&g);
                if ag != 0 {
                    total += ag * ordered_factorization_sum(ring, a, k - 1, &rest, memo);
                }
            }
        }
    }
    memo.insert((k, f.clone()), total);
    total
}

fn criterion_12() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for q in [2u64, 3, 4, 5] {
        let ring = ring(q);
        let mut models = vec![LFunctionModel::trivial(ring.clone())];
        if q % 2 == 1 {
            models.push(LFunctionModel::legendre(ring.clone()).unwrap());
        }
        for model in &models {
            let sieve = Arc::new(PrimeSieve::new(ring.clone(), 4));
            let coeffs = CoeffTable::build(model, sieve, 4).unwrap();
            let mut memo = HashMap::new();
            for k in 1..=3u32 {
                let table = DivisorTable::build(k, &coeffs).unwrap();
                for d in 0..=4usize {
                    for f in ring.monic_enumerate(d) {
                        checked += 1;
                        let brute = ordered_factorization_sum(&ring, &coeffs, k, &f, &mut memo);
                        if table.value(&f) != brute {
                            bad.push(format!("q={q} {:?} k={k} f={f}", model.kind()));
                        }
                    }
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} (q, model, k, f) cases, mismatches: {:?}", &bad[..bad.len().min(5)]))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict); 12] = [
        (1, "closed-form agreement", criterion_1),
        (2, "functional-equation symmetry", criterion_2),
        (3, "U(1) reduction", criterion_3),
        (4, "Monte-Carlo vs exact lattice count", criterion_4),
        (5, "gamma_2 analytic check and c <-> k-c symmetry", criterion_5),
        (6, "gamma_2(1/2) asymptotic trend", criterion_6),
        (7, "trivial-model limit", criterion_7),
        (8, "Legendre limit", criterion_8),
        (9, "two-path variance identity", criterion_9),
        (10, "zero variance for k=1, n >= deg Q", criterion_10),
        (11, "good-like unitarity of trivial-model characters", criterion_11),
        (12, "divisor-function oracle", criterion_12),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let secs = start.elapsed().as_secs_f64();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} [{secs:.1}s] {name}: {}", v.detail);
        if !v.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no failures outside the known list {KNOWN_FAILURES:?}");
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}
