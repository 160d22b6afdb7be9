//! Seeded samplers and empirical Laplace transforms.
//!
//! Every batch is a pure function of `(spec, n, seed)`. Independent streams
//! are derived from the user seed by hashing it together with a stream label
//! (`"Y"`, `"X"`, `"Z"`, or `"D"` for a bare density) and then with a shard
//! index. Shards of [`SHARD_SIZE`] draws run in parallel and are concatenated
//! in shard order, so output never depends on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensitySpec;
use crate::error::{Error, Result};
use crate::types::{GammaSumSpec, GgcSpec};

/// Draws per shard.
pub const SHARD_SIZE: usize = 1 << 16;

/// Seed used for the single permitted re-run of a failed 3-sigma comparison.
pub const RETRY_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

const SUM_CHUNK: usize = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `label`: FNV-1a over the seed bytes and the label, then a
/// splitmix64 finalizer.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let h = seed
        .to_le_bytes()
        .iter()
        .chain(label.as_bytes())
        .fold(OFFSET, |h, &byte| (h ^ byte as u64).wrapping_mul(PRIME));
    splitmix64(h)
}

fn draw_stream<F>(n: usize, seed: u64, label: &str, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let stream = derive_seed(seed, label);
    let shards = n.div_ceil(SHARD_SIZE);
    let parts: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(stream, &format!("shard{i}")));
            let len = SHARD_SIZE.min(n - i * SHARD_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.concat()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    values: Vec<f64>,
    seed: u64,
    spec_fingerprint: String,
}

impl SampleBatch {
    /// Checks that every value is finite and nonnegative.
    pub fn new(values: Vec<f64>, seed: u64, spec_fingerprint: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Sampling("a batch needs at least one value".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::Sampling(format!(
                "draw {i} is {v}; samples must be finite and nonnegative"
            )));
        }
        Ok(SampleBatch {
            values,
            seed,
            spec_fingerprint: spec_fingerprint.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec_fingerprint(&self) -> &str {
        &self.spec_fingerprint
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        chunked_sum(&self.values, |v| v) / self.len() as f64
    }

    /// Sample standard error of the mean.
    pub fn std_error(&self) -> f64 {
        mean_and_std_error(&self.values, |v| v).1
    }
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Sampling("sample count must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn gamma_sum_fingerprint(y: &GammaSumSpec) -> String {
    let parts: Vec<String> = y
        .components()
        .iter()
        .map(|c| format!("{}/{}", c.shape(), c.rate()))
        .collect();
    format!("gamma_sum({})", parts.join("+"))
}

fn gamma_sum_values(y: &GammaSumSpec, n: usize, seed: u64, label: &str) -> Vec<f64> {
    let gammas: Vec<Gamma<f64>> = y
        .components()
        .iter()
        .map(|c| Gamma::new(c.shape(), 1.0 / c.rate()).expect("validated gamma parameters"))
        .collect();
    draw_stream(n, seed, label, |rng| {
        gammas.iter().map(|g| g.sample(rng)).sum()
    })
}

/// `n` draws of `Y_1 + ... + Y_m` (stream `"Y"`).
pub fn sample_gamma_sum(y: &GammaSumSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    require_n(n)?;
    SampleBatch::new(
        gamma_sum_values(y, n, seed, "Y"),
        seed,
        gamma_sum_fingerprint(y),
    )
}

/// `n` draws from a catalog density (stream `"D"`).
pub fn sample_density(f: &DensitySpec, n: usize, seed: u64) -> Result<SampleBatch> {
    require_n(n)?;
    let sampler = f.sampler();
    SampleBatch::new(
        draw_stream(n, seed, "D", |rng| sampler.sample(rng)),
        seed,
        f.ident(),
    )
}

/// `n` draws of `Y / X` with `Y` from stream `"Y"` and `X ~ f` from stream `"X"`.
pub fn sample_quotient(
    y: &GammaSumSpec,
    f: &DensitySpec,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    require_n(n)?;
    let ys = gamma_sum_values(y, n, seed, "Y");
    let sampler = f.sampler();
    let xs = draw_stream(n, seed, "X", |rng| sampler.sample(rng));
    let values = ys.iter().zip(&xs).map(|(y, x)| y / x).collect();
    SampleBatch::new(
        values,
        seed,
        format!("quotient({},{})", gamma_sum_fingerprint(y), f.ident()),
    )
}

/// `n` draws of `Y * X`, taken as the quotient against the law of `1/X`.
pub fn sample_product(
    y: &GammaSumSpec,
    f: &DensitySpec,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let batch = sample_quotient(y, &f.reciprocal(), n, seed)?;
    let fingerprint = format!("product({},{})", gamma_sum_fingerprint(y), f.ident());
    SampleBatch::new(batch.into_values(), seed, fingerprint)
}

/// `n` draws of `left_extremity + sum_j Gamma(u_j, rate t_j)` (stream `"Z"`).
pub fn sample_ggc_k(g: &GgcSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    require_n(n)?;
    let gammas: Vec<Gamma<f64>> = g
        .atoms()
        .iter()
        .map(|&(t, u)| Gamma::new(u, 1.0 / t).expect("validated Thorin atom"))
        .collect();
    let shift = g.left_extremity();
    let values = draw_stream(n, seed, "Z", |rng| {
        shift + gammas.iter().map(|d| d.sample(rng)).sum::<f64>()
    });
    let fingerprint = format!("ggc({})", serde_json::to_string(g)?);
    SampleBatch::new(values, seed, fingerprint)
}

/// Elementwise product of two equally long batches, e.g. `Z * (Y / X)`.
pub fn batch_product(lhs: &SampleBatch, rhs: &SampleBatch) -> Result<SampleBatch> {
    if lhs.len() != rhs.len() {
        return Err(Error::Sampling(format!(
            "batch lengths differ: {} and {}",
            lhs.len(),
            rhs.len()
        )));
    }
    let values = lhs
        .values
        .iter()
        .zip(&rhs.values)
        .map(|(a, b)| a * b)
        .collect();
    SampleBatch::new(
        values,
        lhs.seed,
        format!("{}*{}", lhs.spec_fingerprint, rhs.spec_fingerprint),
    )
}

/// Sum of `g(v)` in fixed chunks, combined in order: the result does not
/// depend on how rayon schedules the chunks.
fn chunked_sum<G>(values: &[f64], g: G) -> f64
where
    G: Fn(f64) -> f64 + Sync,
{
    let partials: Vec<f64> = values
        .par_chunks(SUM_CHUNK)
        .map(|chunk| chunk.iter().map(|&v| g(v)).sum())
        .collect();
    partials.iter().sum()
}

fn mean_and_std_error<G>(values: &[f64], g: G) -> (f64, f64)
where
    G: Fn(f64) -> f64 + Sync,
{
    let n = values.len() as f64;
    let mean = chunked_sum(values, &g) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = chunked_sum(values, |v| (g(v) - mean).powi(2));
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Mean of `exp(-s v)` over `values`.
pub fn empirical_mean_exp(values: &[f64], s: f64) -> f64 {
    chunked_sum(values, |v| (-s * v).exp()) / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLT {
    pub s: f64,
    pub estimate: f64,
    /// Sample standard deviation of `exp(-s X)` over `sqrt(n)`.
    pub std_error: f64,
    pub n: usize,
}

impl EmpiricalLT {
    /// `|estimate - reference| <= z * std_error`.
    pub fn within(&self, reference: f64, z: f64) -> bool {
        (self.estimate - reference).abs() <= z * self.std_error
    }
}

pub fn empirical_lt(batch: &SampleBatch, s_grid: &[f64]) -> Result<Vec<EmpiricalLT>> {
    s_grid
        .iter()
        .map(|&s| {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::domain(format!(
                    "s must be finite and nonnegative, got {s}"
                )));
            }
            let (estimate, std_error) = if s == 0.0 {
                (1.0, 0.0)
            } else {
                mean_and_std_error(&batch.values, |v| (-s * v).exp())
            };
            Ok(EmpiricalLT {
                s,
                estimate,
                std_error,
                n: batch.len(),
            })
        })
        .collect()
}

/// Runs a statistical comparison at `seed`, and once more at [`RETRY_SEED`]
/// if it fails. Returns the outcome and the seed that produced it.
pub fn with_one_retry<F>(seed: u64, mut compare: F) -> Result<(bool, u64)>
where
    F: FnMut(u64) -> Result<bool>,
{
    if compare(seed)? {
        return Ok((true, seed));
    }
    Ok((compare(RETRY_SEED)?, RETRY_SEED))
}
