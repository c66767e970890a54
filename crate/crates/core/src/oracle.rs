//! Exact ground truth from a smallest-prime-factor sieve.
//!
//! Real arguments follow one convention throughout: counts run over
//! `n <= floor(x)`, smoothness means every prime factor is `<= floor(y)`, and
//! divisor thresholds are strict (`d > z`). `P+(1) = 1` and `P-(1) = inf`, so
//! `n = 1` is both smooth and rough and has smooth part 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::estimators::{DsaParams, ScaledParams};
use crate::exec;
use crate::special::SpecialFunctions;
use crate::sum::{CompensatedProduct, NeumaierSum};

/// Largest sieve limit accepted unless a caller configures another ceiling.
pub const DEFAULT_SIEVE_CEILING: u64 = 1 << 31;

const SEGMENT: usize = 1 << 16;
const COUNT_CHUNK: u64 = 1 << 16;

/// Samples drawn from one ChaCha8 stream in [`eta_empirical`].
pub const SAMPLES_PER_STREAM: u64 = 1 << 14;

/// Smallest-prime-factor table for `0..=limit` and the primes up to `limit`.
#[derive(Debug, Clone)]
pub struct SieveTables {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

fn simple_primes(limit: u64) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl SieveTables {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_ceiling(limit, DEFAULT_SIEVE_CEILING)
    }

    /// Segmented construction: each block of the table is sieved independently
    /// by the base primes up to `sqrt(limit)`, so blocks can be filled in parallel.
    pub fn build_with_ceiling(limit: u64, ceiling: u64) -> Result<Self> {
        let ceiling = ceiling.min(u32::MAX as u64);
        if limit > ceiling {
            return Err(Error::Resource(format!(
                "sieve limit {limit} exceeds the configured ceiling {ceiling}"
            )));
        }
        let limit = limit.max(2);
        let base = simple_primes(isqrt(limit));
        let mut spf = vec![0u32; limit as usize + 1];
        exec::for_each_chunk_mut(&mut spf, SEGMENT, |offset, block| {
            let lo = offset as u64;
            let hi = lo + block.len() as u64;
            for &p in &base {
                let p = p as u64;
                if p * p >= hi {
                    break;
                }
                let first = (p * p).max(lo.div_ceil(p) * p);
                let mut m = first;
                while m < hi {
                    let slot = &mut block[(m - lo) as usize];
                    if *slot == 0 {
                        *slot = p as u32;
                    }
                    m += p;
                }
            }
            for (i, slot) in block.iter_mut().enumerate() {
                let n = lo + i as u64;
                if *slot == 0 && n >= 2 {
                    *slot = n as u32;
                }
            }
        });
        spf[1] = 1;
        let chunks: Vec<(usize, usize)> = (0..spf.len())
            .step_by(SEGMENT)
            .map(|s| (s, (s + SEGMENT).min(spf.len())))
            .collect();
        let primes = exec::map(&chunks, |&(s, e)| {
            (s.max(2)..e)
                .filter(|&n| spf[n] as usize == n)
                .map(|n| n as u32)
                .collect::<Vec<u32>>()
        })
        .concat();
        Ok(Self { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `<= y`.
    pub fn primes_up_to(&self, y: f64) -> &[u32] {
        let cut = self.primes.partition_point(|&p| (p as f64) <= y);
        &self.primes[..cut]
    }

    /// Least prime factor of `n >= 2`.
    #[inline]
    pub fn spf(&self, n: u64) -> u32 {
        self.spf[n as usize]
    }

    fn check_n(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if n > self.limit {
            return Err(Error::Range {
                what: "n",
                value: n as f64,
                ceiling: self.limit as f64,
            });
        }
        Ok(())
    }

    /// `P+(n)`, with `P+(1) = 1`.
    pub fn largest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check_n(n)?;
        Ok(self.largest_prime_factor_unchecked(n))
    }

    #[inline]
    fn largest_prime_factor_unchecked(&self, mut n: u64) -> u64 {
        let mut largest = 1;
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            largest = p;
            n /= p;
        }
        largest
    }

    #[inline]
    fn smooth_part_unchecked(&self, mut n: u64, y: f64) -> u64 {
        let mut part = 1;
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            if (p as f64) <= y {
                part *= p;
            }
        }
        part
    }

    fn floor_arg(&self, name: &'static str, x: f64) -> Result<u64> {
        ensure_finite(name, x)?;
        if x < 1.0 {
            return Ok(0);
        }
        let n = x.floor();
        if n > self.limit as f64 {
            return Err(Error::Range {
                what: name,
                value: x,
                ceiling: self.limit as f64,
            });
        }
        Ok(n as u64)
    }
}

/// `n_y`: the product of the prime powers `p^a || n` with `p <= y`.
pub fn smooth_part(n: u64, y: f64, t: &SieveTables) -> Result<u64> {
    ensure_finite("y", y)?;
    t.check_n(n)?;
    Ok(t.smooth_part_unchecked(n, y))
}

/// `Psi(x, y) = #{n <= x : P+(n) <= y}`.
pub fn psi_exact(x: f64, y: f64, t: &SieveTables) -> Result<u64> {
    ensure_finite("y", y)?;
    let n = t.floor_arg("x", x)?;
    Ok(exec::sum_over_chunks(1..n + 1, COUNT_CHUNK, |r| {
        r.filter(|&k| (t.largest_prime_factor_unchecked(k) as f64) <= y)
            .count() as u64
    }))
}

/// `Phi(x, y) = #{n <= x : P-(n) > y}`, counting `n = 1`.
pub fn phi_exact(x: f64, y: f64, t: &SieveTables) -> Result<u64> {
    ensure_finite("y", y)?;
    let n = t.floor_arg("x", x)?;
    Ok(exec::sum_over_chunks(1..n + 1, COUNT_CHUNK, |r| {
        r.filter(|&k| k == 1 || (t.spf(k) as f64) > y).count() as u64
    }))
}

/// `Theta(x, y, z) = #{n <= x : n_y > z}`.
pub fn theta_exact(x: f64, y: f64, z: f64, t: &SieveTables) -> Result<u64> {
    ensure_finite("y", y)?;
    ensure_finite("z", z)?;
    let n = t.floor_arg("x", x)?;
    Ok(exec::sum_over_chunks(1..n + 1, COUNT_CHUNK, |r| {
        r.filter(|&k| (t.smooth_part_unchecked(k, y) as f64) > z)
            .count() as u64
    }))
}

/// Calls `f` on every `d <= bound` whose prime factors all lie in `primes`
/// (ascending), including `d = 1`. Generation is depth-first over prime powers.
pub fn for_each_smooth<F: FnMut(u64)>(primes: &[u32], bound: u64, mut f: F) {
    fn walk<F: FnMut(u64)>(primes: &[u32], start: usize, value: u64, bound: u64, f: &mut F) {
        f(value);
        for (j, &p) in primes.iter().enumerate().skip(start) {
            let next = match value.checked_mul(p as u64) {
                Some(v) if v <= bound => v,
                _ => break,
            };
            walk(primes, j, next, bound, f);
        }
    }
    if bound >= 1 {
        walk(primes, 0, 1, bound, &mut f);
    }
}

/// `Theta` via the unique factorization `n = d e` with `P+(d) <= y < P-(e)`:
/// the sum over smooth `d > z` of `Phi(x/d, y)`.
pub fn theta_exact_decomposed(x: f64, y: f64, z: f64, t: &SieveTables) -> Result<u64> {
    ensure_finite("y", y)?;
    ensure_finite("z", z)?;
    let n = t.floor_arg("x", x)?;
    if n == 0 {
        return Ok(0);
    }
    let rough_prefix = rough_prefix_counts(n, y, t);
    let mut total = 0u64;
    for_each_smooth(t.primes_up_to(y), n, |d| {
        if (d as f64) > z {
            total += rough_prefix[(n / d) as usize] as u64;
        }
    });
    Ok(total)
}

/// `prefix[m] = Phi(m, y)` for `m <= n`.
pub fn rough_prefix_counts(n: u64, y: f64, t: &SieveTables) -> Vec<u32> {
    let mut prefix = Vec::with_capacity(n as usize + 1);
    prefix.push(0u32);
    let mut running = 0u32;
    for k in 1..=n {
        if k == 1 || (t.spf(k) as f64) > y {
            running += 1;
        }
        prefix.push(running);
    }
    prefix
}

fn zeta_product(primes: impl Iterator<Item = u64>) -> CompensatedProduct {
    let mut prod = CompensatedProduct::default();
    for p in primes {
        let pm1 = (p - 1) as f64;
        let p = p as f64;
        // p/(p-1) as an unevaluated sum q + r
        let q = p / pm1;
        let r = (-q).mul_add(pm1, p) / pm1;
        prod.mul(q, r);
    }
    prod
}

/// Largest `y` accepted by [`zeta_one_y`].
pub const ZETA_Y_CEILING: f64 = 4.0e9;

/// `zeta(1, y) = prod_{p <= y} (1 - 1/p)^{-1}`; the empty product is 1.
pub fn zeta_one_y(y: f64) -> Result<f64> {
    ensure_finite("y", y)?;
    if y > ZETA_Y_CEILING {
        return Err(Error::Resource(format!(
            "Euler product up to y = {y} exceeds the ceiling {ZETA_Y_CEILING}"
        )));
    }
    if y < 2.0 {
        return Ok(1.0);
    }
    let primes = simple_primes(y.floor() as u64);
    Ok(zeta_product(primes.iter().map(|&p| p as u64)).value())
}

fn check_smooth_bound(name: &'static str, bound: f64, t: &SieveTables) -> Result<()> {
    if bound > t.limit() as f64 {
        return Err(Error::Range {
            what: name,
            value: bound,
            ceiling: t.limit() as f64,
        });
    }
    Ok(())
}

/// `S(y, z) = sum_{d > z, P+(d) <= y} 1/d`, computed as `zeta(1, y)` minus
/// the finite sum over smooth `d <= z`.
pub fn s_exact(y: f64, z: f64, t: &SieveTables) -> Result<f64> {
    ensure_finite("y", y)?;
    ensure_finite("z", z)?;
    check_smooth_bound("y", y, t)?;
    check_smooth_bound("z", z, t)?;
    let primes = t.primes_up_to(y);
    let (hi, lo) = zeta_product(primes.iter().map(|&p| p as u64)).parts();
    let mut acc = NeumaierSum::new();
    acc += hi;
    acc += lo;
    if z >= 1.0 {
        for_each_smooth(primes, z.floor() as u64, |d| acc += -1.0 / d as f64);
    }
    Ok(acc.value())
}

/// `sum_{d <= z, P+(d) <= y} 1/d`.
pub fn smooth_reciprocal_sum(y: f64, z: f64, t: &SieveTables) -> Result<f64> {
    ensure_finite("y", y)?;
    ensure_finite("z", z)?;
    check_smooth_bound("y", y, t)?;
    let mut acc = NeumaierSum::new();
    if z >= 1.0 {
        for_each_smooth(t.primes_up_to(y), z.floor() as u64, |d| acc += 1.0 / d as f64);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    BuchstabOmega,
    DickmanRho,
}

fn weight_of(kind: WeightKind, sf: &SpecialFunctions) -> impl Fn(f64) -> f64 + '_ {
    move |t| match kind {
        WeightKind::BuchstabOmega => sf.omega(t).unwrap_or(0.0),
        WeightKind::DickmanRho => sf.rho(t).unwrap_or(0.0),
    }
}

fn divisor_range(p: &ScaledParams, t: &SieveTables) -> Result<Option<(u64, f64)>> {
    let top = p.x() / p.y();
    check_smooth_bound("x/y", top, t)?;
    check_smooth_bound("y", p.y(), t)?;
    if top < 1.0 || p.z() >= top.floor() {
        return Ok(None);
    }
    Ok(Some((top.floor() as u64, p.z())))
}

/// `sum_{z < d <= x/y, P+(d) <= y} w(u - u_d)/d`, in depth-first generation order.
pub fn weighted_smooth_sum(
    p: &ScaledParams,
    w: WeightKind,
    sf: &SpecialFunctions,
    t: &SieveTables,
) -> Result<f64> {
    let Some((top, z)) = divisor_range(p, t)? else {
        return Ok(0.0);
    };
    let weight = weight_of(w, sf);
    let u = p.u();
    let mut acc = NeumaierSum::new();
    for_each_smooth(t.primes_up_to(p.y()), top, |d| {
        if (d as f64) > z {
            acc += weight(u - p.u_of(d as f64)) / d as f64;
        }
    });
    Ok(acc.value())
}

/// Same sum as [`weighted_smooth_sum`], accumulated over the divisors sorted
/// by size instead of generation order.
pub fn weighted_smooth_sum_sorted(
    p: &ScaledParams,
    w: WeightKind,
    sf: &SpecialFunctions,
    t: &SieveTables,
) -> Result<f64> {
    let Some((top, z)) = divisor_range(p, t)? else {
        return Ok(0.0);
    };
    let mut ds = Vec::new();
    for_each_smooth(t.primes_up_to(p.y()), top, |d| {
        if (d as f64) > z {
            ds.push(d);
        }
    });
    ds.sort_unstable();
    let weight = weight_of(w, sf);
    let u = p.u();
    Ok(ds
        .iter()
        .rev()
        .map(|&d| weight(u - p.u_of(d as f64)) / d as f64)
        .collect::<NeumaierSum>()
        .value())
}

/// Monte Carlo estimate of `eta(k, l, m)` with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaSample {
    pub estimate: f64,
    pub std_err: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Exact divisibility by an odd prime via the inverse modulo `2^64`.
#[derive(Clone, Copy)]
struct OddDivisor {
    p: u64,
    inverse: u64,
    max_quotient: u64,
}

impl OddDivisor {
    fn new(p: u64) -> Self {
        let mut inv = p;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        Self {
            p,
            inverse: inv,
            max_quotient: u64::MAX / p,
        }
    }

    #[inline]
    fn divide(&self, n: u64) -> Option<u64> {
        let q = n.wrapping_mul(self.inverse);
        (q <= self.max_quotient).then_some(q)
    }
}

fn smooth_part_exceeds_u64(mut n: u64, divisors: &[OddDivisor], y: u64, threshold: u128) -> bool {
    let twos = n.trailing_zeros();
    n >>= twos;
    let mut part: u128 = if y >= 2 { 1u128 << twos } else { 1 };
    if part > threshold {
        return true;
    }
    for d in divisors {
        if d.p * d.p > n {
            break;
        }
        while let Some(q) = d.divide(n) {
            n = q;
            part *= d.p as u128;
        }
        if part > threshold {
            return true;
        }
    }
    // what is left is 1 or a prime
    if n > 1 && n <= y {
        part *= n as u128;
    }
    part > threshold
}

fn smooth_part_exceeds_u128(mut n: u128, primes: &[u32], y: u64, threshold: u128) -> bool {
    let mut part: u128 = 1;
    for &p in primes {
        let p = p as u128;
        if p * p > n {
            break;
        }
        while n.is_multiple_of(p) {
            n /= p;
            part = part.saturating_mul(p);
        }
        if part > threshold {
            return true;
        }
    }
    if n > 1 && n <= y as u128 {
        part = part.saturating_mul(n);
    }
    part > threshold
}

/// Draws `samples` integers uniformly from `[2^(k-1), 2^k)` and reports the
/// fraction whose `2^l`-smooth part exceeds `2^m`.
///
/// Randomness: ChaCha8 seeded with `seed`; sample `i` comes from stream
/// `i / SAMPLES_PER_STREAM`, so the result does not depend on thread count.
pub fn eta_empirical(d: &DsaParams, samples: u64, seed: u64, t: &SieveTables) -> Result<EtaSample> {
    if d.k == 0 || d.k > 127 {
        return Err(Error::Resource(format!(
            "k = {} outside the supported range 1..=127 bits",
            d.k
        )));
    }
    if d.l >= 63 || (1u64 << d.l) > t.limit() {
        return Err(Error::Resource(format!(
            "trial division up to 2^{} needs primes beyond the sieve limit {}",
            d.l,
            t.limit()
        )));
    }
    if samples == 0 {
        return Err(Error::domain("samples must be positive"));
    }
    let y = 1u64 << d.l;
    let primes = t.primes_up_to(y as f64);
    let threshold: u128 = if d.m >= 127 { u128::MAX } else { 1u128 << d.m };
    let odd: Vec<OddDivisor> = primes
        .iter()
        .filter(|&&p| p > 2)
        .map(|&p| OddDivisor::new(p as u64))
        .collect();
    let lo: u128 = 1u128 << (d.k - 1);
    let hi: u128 = 1u128 << d.k;
    let streams = samples.div_ceil(SAMPLES_PER_STREAM);
    let stream_ids: Vec<u64> = (0..streams).collect();
    let hits: u64 = exec::map(&stream_ids, |&s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s);
        let count = SAMPLES_PER_STREAM.min(samples - s * SAMPLES_PER_STREAM);
        let mut hits = 0u64;
        for _ in 0..count {
            let exceeds = if d.k <= 64 {
                let n = rng.random_range(lo as u64..=(hi - 1) as u64);
                smooth_part_exceeds_u64(n, &odd, y, threshold)
            } else {
                let n = rng.random_range(lo..hi);
                smooth_part_exceeds_u128(n, primes, y, threshold)
            };
            hits += exceeds as u64;
        }
        hits
    })
    .into_iter()
    .sum();
    let p = hits as f64 / samples as f64;
    Ok(EtaSample {
        estimate: p,
        std_err: (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
    })
}
