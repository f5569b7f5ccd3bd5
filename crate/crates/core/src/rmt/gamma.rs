//! The leading coefficient `gamma_k(c)` of `I_k(cR; R) ~ gamma_k(c) R^{k^2-1}`.
//!
//! `gamma_k(c) = 1/(k! G(1+k)^2) * int_{[0,1]^k} delta(w_1 + ... + w_k - c)
//! prod_{i<j} (w_i - w_j)^2 dw`, with the delta absorbed by solving for the
//! last coordinate.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::Rng;

use super::haar::{blocked_monte_carlo, McEstimate};
use super::lattice::lattice_count;
use crate::error::{Error, Result};

/// `G(1 + k) = 1! 2! ... (k-1)!`.
pub fn barnes_g_one_plus(k: u32) -> f64 {
    (1..k).map(|j| (1..=j).map(f64::from).product::<f64>()).product()
}

fn normalization(k: u32) -> f64 {
    let k_fact: f64 = (1..=k).map(f64::from).product();
    let g = barnes_g_one_plus(k);
    1.0 / (k_fact * g * g)
}

/// Monte-Carlo estimate of `gamma_k(c)`.
pub fn gamma_mc(k: u32, c: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if !(0.0..=k as f64).contains(&c) {
        return Err(Error::COutOfRange { c, k });
    }
    if samples < 10_000 {
        return Err(Error::InvalidArgument("need at least 10^4 samples".into()));
    }
    let ku = k as usize;
    let scale = normalization(k);
    let moments = blocked_monte_carlo(samples, seed, 1, |rng, count, m| {
        let mut w = vec![0.0f64; ku];
        for _ in 0..count {
            let mut partial = 0.0;
            for slot in w.iter_mut().take(ku - 1) {
                *slot = rng.random::<f64>();
                partial += *slot;
            }
            let last = c - partial;
            let v = if (0.0..=1.0).contains(&last) {
                w[ku - 1] = last;
                let mut prod = 1.0;
                for i in 0..ku {
                    for j in i + 1..ku {
                        let d = w[i] - w[j];
                        prod *= d * d;
                    }
                }
                prod * scale
            } else {
                0.0
            };
            m.sum[0] += v;
            m.sum_sq[0] += v * v;
            m.n += 1;
        }
    });
    Ok(moments.estimate(0, seed))
}

/// `lattice_count(k, round(cR), R) / R^{k^2 - 1}` as an exact rational.
pub fn gamma_from_lattice(k: u32, c: f64, r: u32) -> Result<BigRational> {
    if !(0.0..=k as f64).contains(&c) {
        return Err(Error::COutOfRange { c, k });
    }
    let n = (c * r as f64).round() as u64;
    let num = BigInt::from(lattice_count(k, n, r));
    let den = BigInt::from(BigUint::from(r).pow(k * k - 1));
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn barnes_values() {
        assert_eq!(barnes_g_one_plus(1), 1.0);
        assert_eq!(barnes_g_one_plus(2), 1.0);
        assert_eq!(barnes_g_one_plus(3), 2.0);
        assert_eq!(barnes_g_one_plus(4), 12.0);
    }

    #[test]
    fn k2_half() {
        let est = gamma_mc(2, 0.5, 200_000, 3).unwrap();
        assert!(est.agrees_with(0.125 / 6.0, 3.0), "{est:?}");
        assert_eq!(gamma_mc(2, 0.0, 10_000, 3).unwrap().estimate, 0.0);
    }

    #[test]
    fn k1_is_one() {
        let est = gamma_mc(1, 0.4, 10_000, 0).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(gamma_from_lattice(1, 0.4, 37).unwrap(), BigRational::from_integer(1.into()));
    }

    #[test]
    fn argument_checks() {
        assert!(matches!(gamma_mc(2, 2.5, 10_000, 0), Err(Error::COutOfRange { .. })));
        assert!(matches!(gamma_mc(2, -0.1, 10_000, 0), Err(Error::COutOfRange { .. })));
        assert!(gamma_mc(2, 0.5, 100, 0).is_err());
    }

    #[test]
    fn lattice_ratio_at_r200() {
        // n = 100 < R: binom(103, 3) / 200^3
        let g = gamma_from_lattice(2, 0.5, 200).unwrap().to_f64().unwrap();
        assert!((g - 176_851.0 / 8_000_000.0).abs() < 1e-12);
        assert!(((g - 1.0 / 48.0) / (1.0 / 48.0)).abs() <= 0.07);
    }
}
