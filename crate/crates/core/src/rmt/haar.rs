//! Haar-random unitaries and Monte-Carlo evaluation of `I_k(n; R)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Samples per independently seeded block. Blocks are the unit of parallel
/// work, so estimates do not depend on the number of worker threads.
pub const BLOCK_SIZE: u64 = 1024;

/// Largest matrix size accepted by the Monte-Carlo path; power sums lose
/// precision beyond this in double precision.
pub const MAX_MC_DIMENSION: u32 = 12;

/// An `R x R` complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSample {
    r: usize,
    data: Vec<Complex64>,
}

impl HaarSample {
    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.r + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `max |(U U^*) - I|` over all entries.
    pub fn unitarity_residual(&self) -> f64 {
        let r = self.r;
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..r {
                    acc += self.get(i, l) * self.get(j, l).conj();
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// `Tr(U^m)` for `m = 1..=count`.
    pub fn power_traces(&self, count: usize) -> Vec<Complex64> {
        let r = self.r;
        let mut out = Vec::with_capacity(count);
        let mut power = self.data.clone();
        for m in 1..=count {
            out.push((0..r).map(|i| power[i * r + i]).sum());
            if m < count {
                power = matmul(&power, &self.data, r);
            }
        }
        out
    }

    /// Coefficients `e_0..e_R` of `det(1 + T U)`, from power sums by
    /// Newton's identities.
    pub fn char_poly_coeffs(&self) -> Vec<Complex64> {
        elementary_from_power_sums(&self.power_traces(self.r))
    }
}

fn matmul(a: &[Complex64], b: &[Complex64], r: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); r * r];
    for i in 0..r {
        for l in 0..r {
            let x = a[i * r + l];
            for j in 0..r {
                out[i * r + j] += x * b[l * r + j];
            }
        }
    }
    out
}

/// `e_0..e_m` from power sums `p_1..p_m`: `j e_j = sum_{i=1}^{j} (-1)^{i-1} e_{j-i} p_i`.
pub fn elementary_from_power_sums(p: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for j in 1..=p.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=j {
            let term = e[j - i] * p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / j as f64);
    }
    e
}

fn gaussian_matrix(r: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..r * r)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect()
}

/// QR by modified Gram-Schmidt on the columns of `z`, followed by the phase
/// correction `Q diag(r_ii / |r_ii|)` that makes the result Haar distributed.
fn haar_from_gaussian(mut z: Vec<Complex64>, r: usize) -> Vec<Complex64> {
    let mut diag = vec![Complex64::new(0.0, 0.0); r];
    for j in 0..r {
        for i in 0..j {
            let mut dot = Complex64::new(0.0, 0.0);
            for row in 0..r {
                dot += z[row * r + i].conj() * z[row * r + j];
            }
            for row in 0..r {
                let qi = z[row * r + i];
                z[row * r + j] -= qi * dot;
            }
        }
        let norm = (0..r).map(|row| z[row * r + j].norm_sqr()).sum::<f64>().sqrt();
        diag[j] = Complex64::new(norm, 0.0);
        for row in 0..r {
            z[row * r + j] /= norm;
        }
    }
    for j in 0..r {
        let phase = diag[j] / diag[j].norm();
        for row in 0..r {
            z[row * r + j] *= phase;
        }
    }
    z
}

fn sample_with(r: usize, rng: &mut impl Rng) -> HaarSample {
    let z = gaussian_matrix(r, rng);
    HaarSample { r, data: haar_from_gaussian(z, r) }
}

/// One Haar-random `R x R` unitary, determined by `seed`.
pub fn haar_sample(r: u32, seed: u64) -> Result<HaarSample> {
    if r == 0 {
        return Err(Error::InvalidArgument("R must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(r as usize, &mut rng))
}

/// Mean and standard error of a Monte-Carlo average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Whether `exact` lies within `sigmas` standard errors, allowing a
    /// rounding floor for integrands that are constant up to round-off.
    pub fn agrees_with(&self, exact: f64, sigmas: f64) -> bool {
        let floor = 1e-9 * exact.abs().max(1.0);
        (self.estimate - exact).abs() <= sigmas * self.stderr + floor
    }
}

/// Running first and second moments, one slot per tracked quantity.
#[derive(Clone)]
pub(crate) struct Moments {
    pub(crate) n: u64,
    pub(crate) sum: Vec<f64>,
    pub(crate) sum_sq: Vec<f64>,
}

impl Moments {
    pub(crate) fn new(len: usize) -> Self {
        Moments { n: 0, sum: vec![0.0; len], sum_sq: vec![0.0; len] }
    }

    pub(crate) fn merge(mut self, other: &Moments) -> Self {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self
    }

    pub(crate) fn estimate(&self, slot: usize, seed: u64) -> McEstimate {
        let n = self.n as f64;
        let mean = self.sum[slot] / n;
        let var = ((self.sum_sq[slot] - n * mean * mean) / (n - 1.0)).max(0.0);
        McEstimate { estimate: mean, stderr: (var / n).sqrt(), samples: self.n, seed }
    }
}

/// Runs `per_block` over `samples` split into seeded blocks and merges the
/// block moments in block order.
pub(crate) fn blocked_monte_carlo<F>(samples: u64, seed: u64, len: usize, per_block: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, u64, &mut Moments) + Sync,
{
    let blocks = samples.div_ceil(BLOCK_SIZE);
    let partial: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK_SIZE.min(samples - b * BLOCK_SIZE);
            let mut m = Moments::new(len);
            per_block(&mut rng, count, &mut m);
            m
        })
        .collect();
    partial.iter().fold(Moments::new(len), |acc, m| acc.merge(m))
}

/// Monte-Carlo estimates of `I_k(n; R)` for every `n = 0..=kR`, sharing one
/// set of samples. The integrand is `|[T^n] det(1 + T U)^k|^2`.
pub fn haar_mc_all(k: u32, r: u32, samples: u64, seed: u64) -> Result<Vec<McEstimate>> {
    if k == 0 || r == 0 {
        return Err(Error::InvalidArgument("k and R must be >= 1".into()));
    }
    if r > MAX_MC_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "Monte-Carlo path is limited to R <= {MAX_MC_DIMENSION}"
        )));
    }
    if samples < 1000 {
        return Err(Error::InvalidArgument("need at least 1000 samples".into()));
    }
    let ru = r as usize;
    let len = k as usize * ru + 1;
    let moments = blocked_monte_carlo(samples, seed, len, |rng, count, m| {
        for _ in 0..count {
            let e = sample_with(ru, rng).char_poly_coeffs();
            let mut poly = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..k {
                let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + ru];
                for (i, a) in poly.iter().enumerate() {
                    for (j, b) in e.iter().enumerate() {
                        next[i + j] += a * b;
                    }
                }
                poly = next;
            }
            for (n, c) in poly.iter().enumerate() {
                let v = c.norm_sqr();
                m.sum[n] += v;
                m.sum_sq[n] += v * v;
            }
            m.n += 1;
        }
    });
    Ok((0..len).map(|n| moments.estimate(n, seed)).collect())
}

/// Monte-Carlo estimate of `I_k(n; R)`. Exactly zero for `n > kR`.
pub fn haar_mc_integral(k: u32, n: u64, r: u32, samples: u64, seed: u64) -> Result<McEstimate> {
    if n > k as u64 * r as u64 {
        if samples < 1000 {
            return Err(Error::InvalidArgument("need at least 1000 samples".into()));
        }
        return Ok(McEstimate { estimate: 0.0, stderr: 0.0, samples, seed });
    }
    Ok(haar_mc_all(k, r, samples, seed)?[n as usize])
}
