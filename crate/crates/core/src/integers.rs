//! Sieve infrastructure over [1, N] and smooth-number machinery: Mobius mu,
//! divisor counts, largest/smallest prime factors, the y-smooth sets S(N, y)
//! with Psi(N, y) = #S(N, y), the saddle point alpha(N, y), and the unique
//! ell*m splitting of an integer at a threshold L0.

use std::io::Write;

use crate::error::{Error, Result};

/// Default memory budget for sieve arrays (13 bytes per integer).
pub const DEFAULT_SIEVE_BUDGET: u64 = 1 << 31;

/// Smallest/largest prime factor of an integer, with p(1) = P(1) = +infinity.
///
/// The infinity sentinel is a dedicated variant rather than a large integer,
/// so comparisons against it can never pass by accident. Derived `Ord` puts
/// `Infinite` above every `Finite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FactorBound {
    Finite(u64),
    Infinite,
}

impl FactorBound {
    pub fn le_f64(self, y: f64) -> bool {
        match self {
            FactorBound::Finite(v) => v as f64 <= y,
            FactorBound::Infinite => false,
        }
    }
}

/// Per-N arrays: mu(n), smallest and largest prime factors, tau(n).
pub struct SieveTables {
    n: u64,
    mu: Vec<i8>,
    spf: Vec<u32>, // 0 encodes the infinity sentinel (only n = 1)
    lpf: Vec<u32>,
    tau: Vec<u32>,
}

impl SieveTables {
    /// Sieve everything up to `n` inclusive.
    pub fn build(n: u64) -> Result<Self> {
        Self::build_with_budget(n, DEFAULT_SIEVE_BUDGET)
    }

    pub fn build_with_budget(n: u64, budget: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::DomainError("sieve limit must be >= 1".into()));
        }
        let required = 13 * (n + 1);
        if required > budget || n >= u32::MAX as u64 {
            return Err(Error::TooLarge { required, budget });
        }
        let len = (n + 1) as usize;

        let mut spf = vec![0u32; len];
        for i in 2..len {
            if spf[i] == 0 {
                for j in (i..len).step_by(i) {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                }
            }
        }

        let mut mu = vec![0i8; len];
        let mut lpf = vec![0u32; len];
        let mut tau = vec![0u32; len];
        let mut cnt = vec![0u8; len]; // exponent of spf(i) in i
        if len > 1 {
            mu[1] = 1;
            tau[1] = 1;
        }
        for i in 2..len {
            let q = spf[i] as usize;
            let m = i / q;
            lpf[i] = if m == 1 { q as u32 } else { lpf[m] };
            if m.is_multiple_of(q) {
                mu[i] = 0;
                cnt[i] = cnt[m] + 1;
                tau[i] = tau[m] / (cnt[m] as u32 + 1) * (cnt[m] as u32 + 2);
            } else {
                mu[i] = -mu[m];
                cnt[i] = 1;
                tau[i] = tau[m] * 2;
            }
        }

        Ok(Self { n, mu, spf, lpf, tau })
    }

    #[inline]
    pub fn limit(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn mu(&self, n: u64) -> i8 {
        self.mu[n as usize]
    }

    #[inline]
    pub fn tau(&self, n: u64) -> u32 {
        self.tau[n as usize]
    }

    #[inline]
    pub fn spf(&self, n: u64) -> FactorBound {
        match self.spf[n as usize] {
            0 => FactorBound::Infinite,
            v => FactorBound::Finite(v as u64),
        }
    }

    #[inline]
    pub fn lpf(&self, n: u64) -> FactorBound {
        match self.lpf[n as usize] {
            0 => FactorBound::Infinite,
            v => FactorBound::Finite(v as u64),
        }
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    /// Number of square-free integers in [1, limit].
    pub fn squarefree_count(&self, limit: u64) -> Result<u64> {
        self.check_limit(limit)?;
        Ok((1..=limit).filter(|&n| self.mu[n as usize] != 0).count() as u64)
    }

    /// S(limit, y): the y-smooth n <= limit in increasing order. 1 is smooth
    /// for every y (empty product), despite P(1) = +infinity.
    pub fn smooth_set(&self, limit: u64, y: f64) -> Result<Vec<u64>> {
        self.check_limit(limit)?;
        if y < 2.0 {
            return Err(Error::DomainError(format!("smoothness bound y = {y} < 2")));
        }
        Ok((1..=limit)
            .filter(|&n| n == 1 || self.lpf(n).le_f64(y))
            .collect())
    }

    /// Psi(limit, y) without materializing the set.
    pub fn psi(&self, limit: u64, y: f64) -> Result<u64> {
        self.check_limit(limit)?;
        if y < 2.0 {
            return Err(Error::DomainError(format!("smoothness bound y = {y} < 2")));
        }
        Ok((1..=limit)
            .filter(|&n| n == 1 || self.lpf(n).le_f64(y))
            .count() as u64)
    }

    /// Split `n = ell * m` at threshold `l0`: writing n = p_1...p_k with
    /// primes ascending, ell = p_1...p_r for the smallest r with product
    /// exceeding l0. The result is the unique divisor pair with
    ///
    /// ```text
    /// ell > L0,   ell / P(ell) <= L0,   p(m) >= P(ell).
    /// ```
    pub fn factor_smooth(&self, n: u64, l0: f64) -> Result<SmoothFactorization> {
        self.check_limit(n)?;
        if n as f64 <= l0 {
            return Err(Error::OutOfRange(format!("n = {n} <= L0 = {l0}; no splitting exists")));
        }
        let mut ell = 1u64;
        let mut rest = n;
        // r is a positive count: always absorb at least one prime
        loop {
            let q = match self.spf(rest) {
                FactorBound::Finite(q) => q,
                FactorBound::Infinite => unreachable!("rest = 1 implies ell = n > L0 already"),
            };
            ell *= q;
            rest /= q;
            if ell as f64 > l0 {
                break;
            }
        }
        Ok(SmoothFactorization { n, ell, m: rest, l0 })
    }

    /// Columns: n, mu, spf, lpf, tau. Sentinels print as "inf".
    pub fn export_csv<W: Write>(&self, out: &mut W, limit: u64) -> Result<()> {
        self.check_limit(limit)?;
        writeln!(out, "n,mu,spf,lpf,tau")?;
        let fmt = |b: FactorBound| match b {
            FactorBound::Finite(v) => v.to_string(),
            FactorBound::Infinite => "inf".to_string(),
        };
        for n in 1..=limit {
            writeln!(
                out,
                "{n},{},{},{},{}",
                self.mu(n),
                fmt(self.spf(n)),
                fmt(self.lpf(n)),
                self.tau(n)
            )?;
        }
        Ok(())
    }

    fn check_limit(&self, limit: u64) -> Result<()> {
        if limit > self.n {
            Err(Error::RangeMismatch { limit, available: self.n })
        } else {
            Ok(())
        }
    }
}

/// The unique splitting n = ell * m at threshold L0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothFactorization {
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    pub l0: f64,
}

/// The saddle point alpha(N, y): the unique alpha > 0 with
///
/// ```text
/// sum over primes q <= y of log(q) / (q^alpha - 1)  =  log N,
/// ```
///
/// found by bisection on [1e-6, 4] to absolute tolerance 1e-9. The left side
/// is strictly decreasing in alpha, so bisection is safe.
pub fn saddle_point_alpha(n: u64, y: f64) -> Result<f64> {
    if y < 2.0 || n < 16 {
        return Err(Error::DomainError(format!("saddle point needs y >= 2 and N >= 16, got y={y}, N={n}")));
    }
    if y > n as f64 {
        return Err(Error::DomainError(format!("saddle point needs y <= N, got y={y}, N={n}")));
    }
    let log_n = (n as f64).ln();
    let log_primes: Vec<f64> = small_primes(y.floor() as u64)
        .into_iter()
        .map(|q| (q as f64).ln())
        .collect();
    let residual = |alpha: f64| -> f64 {
        let mut sum = 0.0;
        for &lq in &log_primes {
            sum += lq / ((alpha * lq).exp() - 1.0);
        }
        sum - log_n
    };
    let (mut lo, mut hi) = (1e-6f64, 4.0f64);
    for _ in 0..200 {
        if hi - lo <= 1e-9 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Residual of the saddle equation at `alpha`; used to bound solver error.
pub fn saddle_residual(n: u64, y: f64, alpha: f64) -> f64 {
    let mut sum = 0.0;
    for q in small_primes(y.floor() as u64) {
        let lq = (q as f64).ln();
        sum += lq / ((alpha * lq).exp() - 1.0);
    }
    sum - (n as f64).ln()
}

fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let len = (limit + 1) as usize;
    let mut composite = vec![false; len];
    let mut out = Vec::new();
    for i in 2..len {
        if !composite[i] {
            out.push(i as u64);
            for j in (i * i..len).step_by(i) {
                composite[j] = true;
            }
        }
    }
    out
}
