//! Sums of Kloosterman sums against a fixed table: the square-free sum Q and
//! its inclusion-exclusion decomposition, dyadic pieces S(D, N), smooth sums
//! R, prime sums P, multiplicatively weighted sums M, incomplete one- and
//! two-factor sums, bilinear type-I sums, and the congruence counter J(H, M).
//!
//! Arguments n >= p are reduced mod p before table lookup. Every sum runs in
//! a fixed ascending order through a compensated accumulator, so identical
//! inputs give bit-identical values.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::fields::mul_mod;
use crate::integers::SieveTables;
use crate::kahan::KahanComplex;
use crate::kloosterman::KloostermanTable;

/// One evaluated sum.
#[derive(Clone, Debug)]
pub struct SumResult {
    pub value: Complex64,
    /// Count of summands, weighted by multiplicity where the weight function
    /// is itself a divisor count (tau expands to one term per divisor pair).
    /// This makes |value| <= (s + err) * n_terms hold for every degree-1 sum.
    pub n_terms: u64,
    pub params: SumParams,
    /// Wall seconds; informational only, not part of the deterministic value.
    pub elapsed: f64,
}

impl SumResult {
    /// The Deligne-trivial bound for this sum: (s + err)^degree * n_terms.
    pub fn trivial_bound(&self, max_abs_error: f64) -> f64 {
        let per_term = self.params.s as f64 + max_abs_error;
        per_term.powi(self.params.factor_degree as i32) * self.n_terms as f64
    }
}

/// Parameter record carried with each sum.
#[derive(Clone, Debug, Default)]
pub struct SumParams {
    pub kind: &'static str,
    pub s: u32,
    pub p: u64,
    pub n_limit: Option<u64>,
    pub y: Option<f64>,
    pub l_limit: Option<u64>,
    pub d_range: Option<(u64, u64)>,
    pub d_max: Option<u64>,
    pub r: Option<i64>,
    pub twist: Option<(u64, Option<u64>)>,
    pub k_limit: Option<u64>,
    pub weight_seed: Option<u64>,
    /// How many Kloosterman factors each summand carries (1 or 2).
    pub factor_degree: u8,
}

impl SumParams {
    fn new(kind: &'static str, table: &KloostermanTable) -> Self {
        Self { kind, s: table.s, p: table.p, factor_degree: 1, ..Self::default() }
    }
}

/// Q_{s,p}(N): sum of K_{s,p}(n) over square-free n <= N.
pub fn sum_q(table: &KloostermanTable, sieves: &SieveTables, n_limit: u64) -> Result<SumResult> {
    check_range(n_limit, sieves)?;
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for n in 1..=n_limit {
        if sieves.mu(n) != 0 {
            acc.add(table.value(n));
            terms += 1;
        }
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: terms,
        params: SumParams { n_limit: Some(n_limit), ..SumParams::new("Q", table) },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Q_{s,p}(N) evaluated through inclusion-exclusion over square divisors:
/// sum over d <= sqrt(N) of mu(d) * sum over n <= N/d^2 of K(d^2 n).
/// Must agree with [`sum_q`] up to accumulated rounding.
pub fn sum_q_decomposed(
    table: &KloostermanTable,
    sieves: &SieveTables,
    n_limit: u64,
) -> Result<SumResult> {
    check_range(n_limit, sieves)?;
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    let mut d = 1u64;
    while d * d <= n_limit {
        let mu = sieves.mu(d);
        if mu != 0 {
            let inner = inner_square_sum(table, d, n_limit / (d * d));
            let signed = if mu > 0 { inner.0 } else { -inner.0 };
            acc.add(signed);
            terms += inner.1;
        }
        d += 1;
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: terms,
        params: SumParams { n_limit: Some(n_limit), ..SumParams::new("Q-decomposed", table) },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

fn inner_square_sum(table: &KloostermanTable, d: u64, limit: u64) -> (Complex64, u64) {
    let p = table.p;
    let d2 = mul_mod(d % p, d % p, p);
    let mut acc = KahanComplex::new();
    for n in 1..=limit {
        acc.add(table.value(mul_mod(d2, n % p, p)));
    }
    (acc.value(), limit)
}

/// One dyadic piece S(D, N) = sum over D <= d < 2D of mu(d) * (inner sum).
pub fn sum_s_dyadic(
    table: &KloostermanTable,
    sieves: &SieveTables,
    d_start: u64,
    n_limit: u64,
) -> Result<SumResult> {
    check_range(n_limit, sieves)?;
    if d_start < 1 || d_start * d_start > n_limit {
        return Err(Error::OutOfRange(format!(
            "dyadic start D = {d_start} outside [1, sqrt({n_limit})]"
        )));
    }
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for d in d_start..(2 * d_start) {
        if d * d > n_limit {
            break;
        }
        let mu = sieves.mu(d);
        if mu != 0 {
            let inner = inner_square_sum(table, d, n_limit / (d * d));
            acc.add(if mu > 0 { inner.0 } else { -inner.0 });
            terms += inner.1;
        }
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: terms,
        params: SumParams {
            n_limit: Some(n_limit),
            d_range: Some((d_start, 2 * d_start)),
            ..SumParams::new("S-dyadic", table)
        },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// R_{s,p}(N, y): sum of K_{s,p}(n) over a precomputed smooth set.
pub fn sum_r(
    table: &KloostermanTable,
    smooth: &[u64],
    n_limit: u64,
    y: f64,
) -> Result<SumResult> {
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    for &n in smooth {
        acc.add(table.value(n));
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: smooth.len() as u64,
        params: SumParams {
            n_limit: Some(n_limit),
            y: Some(y),
            ..SumParams::new("R", table)
        },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// P_{s,p}(L): sum of K_{s,p}(ell) over primes ell <= L.
pub fn sum_p(table: &KloostermanTable, sieves: &SieveTables, l_limit: u64) -> Result<SumResult> {
    check_range(l_limit, sieves)?;
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for n in 2..=l_limit.max(1) {
        if sieves.is_prime(n) {
            acc.add(table.value(n));
            terms += 1;
        }
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: terms,
        params: SumParams { l_limit: Some(l_limit), ..SumParams::new("P", table) },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Multiplicative weight for [`sum_m`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultWeight {
    Mobius,
    Tau,
}

/// M_{s,p}(f; N) = sum over n <= N of f(n) K_{s,p}(n), f = mu or tau.
pub fn sum_m(
    table: &KloostermanTable,
    sieves: &SieveTables,
    n_limit: u64,
    weight: MultWeight,
) -> Result<SumResult> {
    check_range(n_limit, sieves)?;
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for n in 1..=n_limit {
        match weight {
            MultWeight::Mobius => {
                let mu = sieves.mu(n);
                if mu != 0 {
                    let v = table.value(n);
                    acc.add(if mu > 0 { v } else { -v });
                    terms += 1;
                }
            }
            MultWeight::Tau => {
                let tau = sieves.tau(n);
                acc.add(table.value(n) * tau as f64);
                // tau(n) K(n) is one K-term per divisor pair of n
                terms += tau as u64;
            }
        }
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: terms,
        params: SumParams { n_limit: Some(n_limit), ..SumParams::new("M", table) },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Incomplete sum over an initial segment: sum over n <= K of K(dn), or of
/// the product K(dn) K(en) when a second twist is supplied.
pub fn sum_incomplete(
    table: &KloostermanTable,
    d: u64,
    e: Option<u64>,
    k_limit: u64,
) -> Result<SumResult> {
    let p = table.p;
    if k_limit > p {
        return Err(Error::RangeMismatch { limit: k_limit, available: p });
    }
    let d = d % p;
    if d == 0 {
        return Err(Error::DegenerateTwist("d = 0".into()));
    }
    let e = e.map(|e| e % p);
    if let Some(e) = e {
        // e/d in {0, 1} collapses the two factors
        if e == 0 {
            return Err(Error::DegenerateTwist("e = 0".into()));
        }
        if e == d {
            return Err(Error::DegenerateTwist("e/d = 1".into()));
        }
    }
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    for n in 1..=k_limit {
        let v = table.value(mul_mod(d, n % p, p));
        match e {
            None => acc.add(v),
            Some(e) => acc.add(v * table.value(mul_mod(e, n % p, p))),
        }
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: k_limit,
        params: SumParams {
            twist: Some((d, e)),
            k_limit: Some(k_limit),
            factor_degree: if e.is_some() { 2 } else { 1 },
            ..SumParams::new("incomplete", table)
        },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Bilinear type-I sum: sum over d <= D, n in N_d of alpha_d K(d^r n).
///
/// `weights[i]` is alpha_{i+1} and must lie in the closed unit disk;
/// `intervals[i] = (lo, hi)` is the inclusive range N_{i+1}. Negative r
/// twists by the modular inverse power.
pub fn sum_type_i(
    table: &KloostermanTable,
    weights: &[Complex64],
    intervals: &[(u64, u64)],
    r: i64,
) -> Result<SumResult> {
    if r == 0 {
        return Err(Error::ZeroExponent);
    }
    assert_eq!(weights.len(), intervals.len(), "one interval per weight");
    for (i, w) in weights.iter().enumerate() {
        if w.norm() > 1.0 + 1e-12 {
            return Err(Error::WeightExceedsUnit { index: i + 1, abs: w.norm() });
        }
    }
    let p = table.p;
    let start = Instant::now();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for (i, (&alpha, &(lo, hi))) in weights.iter().zip(intervals).enumerate() {
        let d = (i + 1) as u64;
        let dr = power_mod_signed(d, r, p)?;
        let mut inner = KahanComplex::new();
        for n in lo..=hi {
            inner.add(table.value(mul_mod(dr, n % p, p)));
            terms += 1;
        }
        acc.add(alpha * inner.value());
    }
    Ok(SumResult {
        value: acc.value(),
        n_terms: terms,
        params: SumParams {
            d_max: Some(weights.len() as u64),
            r: Some(r),
            ..SumParams::new("type-I", table)
        },
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// d^r mod p for signed r (inverse power when r < 0).
fn power_mod_signed(d: u64, r: i64, p: u64) -> Result<u64> {
    if r == 0 {
        return Err(Error::ZeroExponent);
    }
    let d = d % p;
    if d == 0 {
        return Err(Error::DegenerateTwist("d = 0 mod p".into()));
    }
    let base = if r < 0 { crate::fields::pow_mod(d, p - 2, p) } else { d };
    Ok(crate::fields::pow_mod(base, r.unsigned_abs(), p))
}

/// {d^r mod p : 1 <= d <= d_max}, deduplicated and sorted.
pub fn power_residue_set(p: u64, d_max: u64, r: i64) -> Result<Vec<u64>> {
    if r == 0 {
        return Err(Error::ZeroExponent);
    }
    if d_max >= p {
        return Err(Error::OutOfRange(format!("D = {d_max} must be < p = {p}")));
    }
    let mut set: Vec<u64> = (1..=d_max)
        .map(|d| power_mod_signed(d, r, p))
        .collect::<Result<_>>()?;
    set.sort_unstable();
    set.dedup();
    Ok(set)
}

/// Solution count of x k = y m (mod p) with x, y in [1, H] and k, m in M.
#[derive(Clone, Debug)]
pub struct CongruenceCount {
    pub p: u64,
    pub h: u64,
    pub m_set: Vec<u64>,
    pub count: u64,
}

/// Exact J(H, M) in O(H |M|): bucket the products x k mod p and sum the
/// squared bucket sizes.
pub fn count_j(p: u64, h: u64, m_set: &[u64]) -> CongruenceCount {
    let mut buckets = vec![0u64; p as usize];
    for x in 1..=h {
        let xr = x % p;
        for &k in m_set {
            buckets[mul_mod(xr, k % p, p) as usize] += 1;
        }
    }
    let count = buckets.iter().map(|&c| c * c).sum();
    CongruenceCount { p, h, m_set: m_set.to_vec(), count }
}

/// Weight arrays for type-I experiments.
pub fn ones_weights(d_max: u64) -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0); d_max as usize]
}

pub fn mobius_weights(sieves: &SieveTables, d_max: u64) -> Vec<Complex64> {
    (1..=d_max)
        .map(|d| Complex64::new(sieves.mu(d) as f64, 0.0))
        .collect()
}

/// Seeded weights uniform on the complex unit disk. The generator is
/// counter-based (ChaCha8) keyed by (seed, stream), so draws are stable and
/// cell-local.
pub fn unit_disk_weights(d_max: u64, seed: u64, stream: u64) -> Vec<Complex64> {
    let mut rng = chacha(seed, stream);
    (0..d_max)
        .map(|_| {
            let radius = unit_f64(&mut rng).sqrt();
            let theta = 2.0 * std::f64::consts::PI * unit_f64(&mut rng);
            Complex64::new(radius * theta.cos(), radius * theta.sin())
        })
        .collect()
}

/// Inclusive intervals [1, n_limit] for every d <= d_max.
pub fn full_intervals(d_max: u64, n_limit: u64) -> Vec<(u64, u64)> {
    vec![(1, n_limit); d_max as usize]
}

/// Seeded random subintervals of [1, n_limit], one per d.
pub fn random_subintervals(d_max: u64, n_limit: u64, seed: u64, stream: u64) -> Vec<(u64, u64)> {
    let mut rng = chacha(seed, stream);
    (0..d_max)
        .map(|_| {
            let a = 1 + rng.next_u64() % n_limit;
            let b = 1 + rng.next_u64() % n_limit;
            (a.min(b), a.max(b))
        })
        .collect()
}

/// A random twist draw for incomplete-sum scans: d != e, both nonzero,
/// and a segment length K <= p.
#[derive(Clone, Copy, Debug)]
pub struct TwistDraw {
    pub d: u64,
    pub e: u64,
    pub k_limit: u64,
}

pub fn seeded_twist_draws(p: u64, count: usize, seed: u64, stream: u64) -> Vec<TwistDraw> {
    let mut rng = chacha(seed, stream);
    (0..count)
        .map(|_| {
            let d = 1 + rng.next_u64() % (p - 1);
            let mut e = 1 + rng.next_u64() % (p - 1);
            while e == d {
                e = 1 + rng.next_u64() % (p - 1);
            }
            let k_limit = 1 + rng.next_u64() % p;
            TwistDraw { d, e, k_limit }
        })
        .collect()
}

fn chacha(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn check_range(limit: u64, sieves: &SieveTables) -> Result<()> {
    if limit > sieves.limit() {
        Err(Error::RangeMismatch { limit, available: sieves.limit() })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::PrimeFieldCtx;
    use crate::kloosterman::bulk;

    fn table(p: u64, s: u32) -> KloostermanTable {
        bulk(&PrimeFieldCtx::new(p).unwrap(), s).unwrap()
    }

    #[test]
    fn q_term_selection() {
        let t = table(7, 2);
        let s = SieveTables::build(10).unwrap();
        let q = sum_q(&t, &s, 4).unwrap();
        let expect = t.value(1) + t.value(2) + t.value(3); // mu(4) = 0
        assert!((q.value - expect).norm() < 1e-12);
        assert_eq!(q.n_terms, 3);
    }

    #[test]
    fn q_decomposition_identity() {
        let t = table(101, 2);
        let s = SieveTables::build(101).unwrap();
        let a = sum_q(&t, &s, 101).unwrap();
        let b = sum_q_decomposed(&t, &s, 101).unwrap();
        assert!((a.value - b.value).norm() <= 10.0 * 101.0 * t.max_abs_error);
    }

    #[test]
    fn dyadic_blocks_tile_q() {
        let t = table(101, 2);
        let s = SieveTables::build(101).unwrap();
        let q = sum_q(&t, &s, 101).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut d = 1u64;
        while d * d <= 101 {
            acc += sum_s_dyadic(&t, &s, d, 101).unwrap().value;
            d *= 2;
        }
        assert!((q.value - acc).norm() <= 10.0 * 101.0 * t.max_abs_error);
    }

    #[test]
    fn dyadic_single_block_is_plain_sum() {
        let t = table(101, 2);
        let s = SieveTables::build(101).unwrap();
        let one = sum_s_dyadic(&t, &s, 1, 10).unwrap();
        let mut expect = Complex64::new(0.0, 0.0);
        for n in 1..=10u64 {
            expect += t.value(n);
        }
        assert!((one.value - expect).norm() < 1e-12);
    }

    #[test]
    fn r_reduces_mod_p() {
        let t = table(7, 2);
        let sieves = SieveTables::build(10).unwrap();
        let smooth = sieves.smooth_set(10, 2.0).unwrap();
        let r = sum_r(&t, &smooth, 10, 2.0).unwrap();
        // {1, 2, 4, 8} with 8 = 1 mod 7
        let expect = t.value(1) + t.value(2) + t.value(4) + t.value(1);
        assert!((r.value - expect).norm() < 1e-12);
    }

    #[test]
    fn p_sum_term_selection() {
        let t = table(7, 2);
        let s = SieveTables::build(10).unwrap();
        let got = sum_p(&t, &s, 3).unwrap();
        let expect = t.value(2) + t.value(3);
        assert!((got.value - expect).norm() < 1e-12);
        let empty = sum_p(&t, &s, 1).unwrap();
        assert_eq!(empty.value, Complex64::new(0.0, 0.0));
        assert_eq!(empty.n_terms, 0);
    }

    #[test]
    fn m_weights() {
        let t = table(7, 2);
        let s = SieveTables::build(10).unwrap();
        let mmu = sum_m(&t, &s, 2, MultWeight::Mobius).unwrap();
        assert!((mmu.value - (t.value(1) - t.value(2))).norm() < 1e-12);
        let mtau = sum_m(&t, &s, 4, MultWeight::Tau).unwrap();
        let expect = t.value(1) + t.value(2) * 2.0 + t.value(3) * 2.0 + t.value(4) * 3.0;
        assert!((mtau.value - expect).norm() < 1e-12);
        assert_eq!(mtau.n_terms, 1 + 2 + 2 + 3);
    }

    #[test]
    fn incomplete_complete_segment_hits_identity() {
        let t = table(7, 2);
        let inc = sum_incomplete(&t, 1, None, 7).unwrap();
        // n = 7 contributes K(0) = 0, leaving the complete sum 7^{-1/2}
        assert!((inc.value.re - 7.0f64.powf(-0.5)).abs() < 1e-10);
        assert!(inc.value.im.abs() < 1e-10);
    }

    #[test]
    fn incomplete_degenerate_twists() {
        let t = table(7, 2);
        assert!(matches!(sum_incomplete(&t, 2, Some(2), 3), Err(Error::DegenerateTwist(_))));
        assert!(matches!(sum_incomplete(&t, 0, None, 3), Err(Error::DegenerateTwist(_))));
        assert!(matches!(sum_incomplete(&t, 3, Some(0), 3), Err(Error::DegenerateTwist(_))));
        assert!(matches!(sum_incomplete(&t, 1, None, 8), Err(Error::RangeMismatch { .. })));
    }

    #[test]
    fn type_i_single_d() {
        let t = table(101, 2);
        let got = sum_type_i(&t, &ones_weights(1), &full_intervals(1, 10), 2).unwrap();
        let mut expect = Complex64::new(0.0, 0.0);
        for n in 1..=10u64 {
            expect += t.value(n);
        }
        assert!((got.value - expect).norm() < 1e-12);
    }

    #[test]
    fn type_i_rejects_bad_inputs() {
        let t = table(101, 2);
        let mut w = ones_weights(3);
        w[1] = Complex64::new(2.0, 0.0);
        assert!(matches!(
            sum_type_i(&t, &w, &full_intervals(3, 10), 1),
            Err(Error::WeightExceedsUnit { index: 2, .. })
        ));
        assert!(matches!(
            sum_type_i(&t, &ones_weights(2), &full_intervals(2, 10), 0),
            Err(Error::ZeroExponent)
        ));
    }

    #[test]
    fn power_residue_examples() {
        assert_eq!(power_residue_set(7, 3, 2).unwrap(), vec![1, 2, 4]);
        assert_eq!(power_residue_set(7, 2, -1).unwrap(), vec![1, 4]);
        assert_eq!(power_residue_set(7, 1, 5).unwrap(), vec![1]);
        assert!(matches!(power_residue_set(7, 3, 0), Err(Error::ZeroExponent)));
    }

    #[test]
    fn count_j_small_cases() {
        assert_eq!(count_j(7, 2, &[1]).count, 2);
        assert_eq!(count_j(7, 1, &[1, 2, 4]).count, 3);
        // brute-forced: all 256 quadruples over x,y in [1,4], k,m in [1,4]
        assert_eq!(count_j(5, 4, &[1, 2, 3, 4]).count, 64);
    }

    #[test]
    fn count_j_diagonal_floor() {
        for p in [5u64, 11, 31] {
            let m = power_residue_set(p, p - 1, 1).unwrap();
            for h in [1u64, 2, p / 2, p] {
                let c = count_j(p, h, &m);
                assert!(c.count >= h * m.len() as u64);
            }
        }
    }

    #[test]
    fn mobius_weight_preset() {
        let sieves = SieveTables::build(12).unwrap();
        let w = mobius_weights(&sieves, 12);
        for (i, v) in w.iter().enumerate() {
            assert_eq!(v.re, sieves.mu(i as u64 + 1) as f64);
            assert_eq!(v.im, 0.0);
            assert!(v.norm() <= 1.0);
        }
    }

    #[test]
    fn random_subintervals_stay_in_range() {
        let a = random_subintervals(20, 100, 5, 1);
        let b = random_subintervals(20, 100, 5, 1);
        assert_eq!(a, b);
        for &(lo, hi) in &a {
            assert!(1 <= lo && lo <= hi && hi <= 100);
        }
    }

    #[test]
    fn weights_are_reproducible_and_bounded() {
        let a = unit_disk_weights(100, 42, 7);
        let b = unit_disk_weights(100, 42, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|w| w.norm() <= 1.0));
        let c = unit_disk_weights(100, 42, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn sums_are_pure() {
        let t = table(101, 3);
        let s = SieveTables::build(101).unwrap();
        let a = sum_q(&t, &s, 101).unwrap();
        let b = sum_q(&t, &s, 101).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.n_terms, b.n_terms);
        let w = unit_disk_weights(5, 9, 0);
        let x = sum_type_i(&t, &w, &full_intervals(5, 50), -2).unwrap();
        let y = sum_type_i(&t, &w, &full_intervals(5, 50), -2).unwrap();
        assert_eq!(x.value, y.value);
    }

    #[test]
    fn trivial_bound_holds() {
        let t = table(101, 2);
        let s = SieveTables::build(101).unwrap();
        for result in [
            sum_q(&t, &s, 101).unwrap(),
            sum_m(&t, &s, 101, MultWeight::Tau).unwrap(),
            sum_incomplete(&t, 3, Some(7), 50).unwrap(),
        ] {
            assert!(result.value.norm() <= result.trivial_bound(t.max_abs_error));
        }
    }
}
