//! Prime-field arithmetic and the precomputed tables every evaluator reads:
//! modular inverses, powers of the smallest primitive root, and discrete
//! logarithms. Contexts are immutable after construction and safe to share
//! across threads.

use crate::error::{Error, Result};

/// Default memory budget for context tables: 2^31 bytes.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 31;

/// Arena for arithmetic mod an odd prime `p`.
///
/// Tables are built eagerly: every downstream evaluator is table-bound, and
/// the experiments target `p` small enough that O(p) memory is cheap.
pub struct PrimeFieldCtx {
    p: u64,
    g: u64,
    inv: Vec<u32>,
    dlog: Vec<u32>,
    pow_g: Vec<u32>,
}

impl PrimeFieldCtx {
    /// Build a context for prime `p >= 3` under the default memory budget.
    ///
    /// The generator is the smallest positive primitive root, so contexts are
    /// identical across runs and platforms.
    pub fn new(p: u64) -> Result<Self> {
        Self::with_budget(p, DEFAULT_TABLE_BUDGET)
    }

    pub fn with_budget(p: u64, budget: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        // three u32 tables of length p
        let required = 12 * p;
        if required > budget || p >= u32::MAX as u64 {
            return Err(Error::TooLarge { required, budget });
        }

        let g = smallest_primitive_root(p);
        let pl = p as usize;

        let mut inv = vec![0u32; pl];
        inv[1] = 1;
        for n in 2..pl {
            // inv[n] = -(p/n) * inv[p mod n] mod p
            let q = p / n as u64;
            let r = (p % n as u64) as usize;
            inv[n] = ((p - (q * inv[r] as u64) % p) % p) as u32;
        }

        let mut pow_g = vec![0u32; pl - 1];
        let mut dlog = vec![0u32; pl];
        let mut acc = 1u64;
        for (k, slot) in pow_g.iter_mut().enumerate() {
            *slot = acc as u32;
            dlog[acc as usize] = k as u32;
            acc = acc * g % p;
        }
        debug_assert_eq!(acc, 1, "g must have order p-1");

        Ok(Self { p, g, inv, dlog, pow_g })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Smallest positive primitive root mod p.
    #[inline]
    pub fn g(&self) -> u64 {
        self.g
    }

    /// Modular inverse of `n`, for `1 <= n < p`.
    #[inline]
    pub fn inv(&self, n: u64) -> u64 {
        debug_assert!(n >= 1 && n < self.p);
        self.inv[n as usize] as u64
    }

    /// k with g^k = n (mod p), for `1 <= n < p`.
    #[inline]
    pub fn dlog(&self, n: u64) -> u64 {
        debug_assert!(n >= 1 && n < self.p);
        self.dlog[n as usize] as u64
    }

    /// g^k mod p for `0 <= k < p-1`.
    #[inline]
    pub fn pow_g(&self, k: u64) -> u64 {
        self.pow_g[k as usize] as u64
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    base %= p;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        r += 1;
    }
    // This witness set decides primality for every n below 3.3 * 10^24.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division (fine for the p-1 sizes here).
fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn smallest_primitive_root(p: u64) -> u64 {
    let exps: Vec<u64> = distinct_prime_factors(p - 1)
        .into_iter()
        .map(|q| (p - 1) / q)
        .collect();
    'cand: for g in 2..p {
        for &e in &exps {
            if pow_mod(g, e, p) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root");
}

/// First `count` primes `>= lo`.
pub fn primes_from(lo: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = lo.max(2);
    while out.len() < count {
        if is_prime(n) {
            out.push(n);
        }
        n += 1;
    }
    out
}

/// All primes in `[lo, hi]`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&n| is_prime(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_roots() {
        assert_eq!(PrimeFieldCtx::new(5).unwrap().g(), 2);
        assert_eq!(PrimeFieldCtx::new(7).unwrap().g(), 3);
    }

    #[test]
    fn composite_rejected() {
        assert!(matches!(PrimeFieldCtx::new(4), Err(Error::CompositeModulus(4))));
        assert!(matches!(PrimeFieldCtx::new(1), Err(Error::CompositeModulus(1))));
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(
            PrimeFieldCtx::with_budget(1009, 100),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn primality_small_cases() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(1_000_003));
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n={n}");
        }
    }

    #[test]
    fn inverse_table() {
        let ctx = PrimeFieldCtx::new(101).unwrap();
        for n in 1..101 {
            assert_eq!(ctx.mul(n, ctx.inv(n)), 1);
        }
    }

    #[test]
    fn dlog_pow_mutually_inverse_up_to_1e4() {
        for p in primes_in(3, 10_000) {
            let ctx = PrimeFieldCtx::new(p).unwrap();
            for n in 1..p {
                assert_eq!(ctx.pow_g(ctx.dlog(n)), n);
            }
            // pow_g is a bijection {0..p-2} -> {1..p-1}
            let mut seen = vec![false; p as usize];
            for k in 0..p - 1 {
                let v = ctx.pow_g(k) as usize;
                assert!(!seen[v]);
                seen[v] = true;
            }
        }
    }

    #[test]
    fn fermat_on_random_residues_up_to_1e4() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::from_seed([3; 32]);
        for p in primes_in(3, 10_000) {
            for _ in 0..100 {
                let n = 1 + rng.next_u64() % (p - 1);
                assert_eq!(pow_mod(n, p - 1, p), 1, "n={n} p={p}");
            }
        }
    }
}
