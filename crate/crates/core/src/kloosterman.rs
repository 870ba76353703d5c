//! Normalized hyper-Kloosterman sums
//!
//! ```text
//! K_{s,p}(n) = p^{-(s-1)/2} * sum over x_1..x_s in (F_p^*)^s,
//!              x_1*...*x_s = n (mod p), of e_p(x_1 + ... + x_s)
//! ```
//!
//! with `e_p(x) = exp(2 pi i x / p)`. Two evaluation routes are provided and
//! kept independent so they can check each other:
//!
//! * [`direct`] enumerates (s-1)-tuples and solves for the last coordinate,
//!   O(p^(s-1)) per value;
//! * [`bulk`] computes all p values at once as an s-fold cyclic convolution
//!   over the multiplicative group, O(s p log p) via a Bluestein transform
//!   of length p-1.
//!
//! `K_{s,p}(0) = 0` by the empty-sum convention. Deligne's bound gives
//! `|K_{s,p}(n)| <= s` for every n.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::bounds::{BoundReport, ReportParams};
use crate::error::{Error, Result};
use crate::fft::Bluestein;
use crate::fields::PrimeFieldCtx;
use crate::kahan::KahanComplex;
use crate::parallel::{for_each_chunk_mut, map_indexed, ExecMode};

/// Default cap on direct-enumeration work, in summands.
pub const DEFAULT_ENUM_BUDGET: u64 = 1_000_000_000;

/// Default memory budget for bulk evaluation scratch, in bytes.
pub const DEFAULT_BULK_BUDGET: u64 = 1 << 31;

const PAR_CHUNK: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    Bulk,
}

/// All values K_{s,p}(n) for n in 0..p at fixed (s, p), with provenance and
/// an a-priori bound on the numerical error of each entry.
pub struct KloostermanTable {
    pub s: u32,
    pub p: u64,
    pub values: Vec<Complex64>,
    pub method: Method,
    pub max_abs_error: f64,
}

impl KloostermanTable {
    /// Table lookup with the argument reduced mod p.
    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        self.values[(n % self.p) as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Kahan sum of all nonzero-argument entries, in ascending n.
    pub fn complete_sum(&self) -> Complex64 {
        let mut acc = KahanComplex::new();
        for v in &self.values[1..] {
            acc.add(*v);
        }
        acc.value()
    }

    /// The exact value of the complete sum: (-1)^s p^{-(s-1)/2}.
    pub fn complete_sum_target(&self) -> f64 {
        let sign = if self.s.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (self.p as f64).powf(-((self.s as f64 - 1.0) / 2.0))
    }

    /// Max over n of |conj(K(n)) - K((-1)^s n)|; zero in exact arithmetic.
    pub fn conjugation_defect(&self) -> f64 {
        let p = self.p as usize;
        let mut worst = 0.0f64;
        for n in 0..p {
            let partner = if self.s.is_multiple_of(2) { n } else { (p - n) % p };
            let d = (self.values[n].conj() - self.values[partner]).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Max |Im K(n)|; for even s the values are real up to rounding.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Check Deligne's bound |K_{s,p}(n)| <= s against the table, allowing
    /// the declared numerical error budget.
    pub fn verify_deligne(&self) -> BoundReport {
        let lhs = self.max_abs();
        let rhs = self.s as f64 + self.max_abs_error;
        BoundReport {
            lhs,
            rhs,
            ratio: lhs / rhs,
            pass: lhs <= rhs,
            params: ReportParams {
                s: Some(self.s),
                p: Some(self.p),
                c: Some(1.0),
                ..ReportParams::default()
            },
        }
    }
}

/// Error model for bulk tables: c * s * log2(p) * eps * sqrt(p) with c = 8,
/// validated against the direct route in the test suites.
pub fn bulk_error_budget(s: u32, p: u64) -> f64 {
    8.0 * s as f64 * (p as f64).log2() * f64::EPSILON * (p as f64).sqrt()
}

/// Error model for directly enumerated tables: the Kahan sum of p^(s-1)
/// unit-modulus terms carries at most O(eps) relative error each.
pub fn direct_error_budget(s: u32, p: u64) -> f64 {
    8.0 * s as f64 * f64::EPSILON * (p as f64).powf((s as f64 - 1.0) / 2.0)
}

/// e_p(t) for t in 0..p.
pub(crate) fn unit_roots(p: u64) -> Vec<Complex64> {
    (0..p)
        .map(|t| {
            let theta = 2.0 * PI * t as f64 / p as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// K_{s,p}(n) by direct enumeration, default budget and execution mode.
pub fn direct(ctx: &PrimeFieldCtx, s: u32, n: u64) -> Result<Complex64> {
    direct_with(ctx, s, n, ExecMode::default(), DEFAULT_ENUM_BUDGET)
}

pub fn direct_with(
    ctx: &PrimeFieldCtx,
    s: u32,
    n: u64,
    mode: ExecMode,
    budget: u64,
) -> Result<Complex64> {
    assert!(s >= 1, "dimension s must be >= 1");
    let p = ctx.p();
    let mut terms: u128 = 1;
    for _ in 1..s {
        terms = terms.saturating_mul((p - 1) as u128);
    }
    if terms > budget as u128 {
        return Err(Error::DimensionTooLarge { terms, budget });
    }
    let n = n % p;
    if n == 0 {
        // x_1*...*x_s with all x_i invertible never hits 0: empty sum
        return Ok(Complex64::new(0.0, 0.0));
    }
    let roots = unit_roots(p);
    if s == 1 {
        return Ok(roots[n as usize]);
    }
    // Partial sums are indexed by the leading coordinate and combined in
    // ascending order, so the reduction tree is fixed regardless of mode.
    let partials = map_indexed((p - 1) as usize, mode, |i| {
        direct_partial(ctx, &roots, s, n, i as u64 + 1)
    });
    let mut acc = KahanComplex::new();
    for v in partials {
        acc.add(v);
    }
    let norm = (p as f64).powf(-((s as f64 - 1.0) / 2.0));
    Ok(acc.value() * norm)
}

/// Unnormalized contribution of all tuples with first coordinate `x1`,
/// remaining free coordinates ascending.
fn direct_partial(
    ctx: &PrimeFieldCtx,
    roots: &[Complex64],
    s: u32,
    n: u64,
    x1: u64,
) -> Complex64 {
    let p = ctx.p();
    match s {
        2 => {
            let x2 = ctx.mul(n, ctx.inv(x1));
            roots[((x1 + x2) % p) as usize]
        }
        3 => {
            let w = ctx.mul(n, ctx.inv(x1));
            let mut acc = KahanComplex::new();
            for x2 in 1..p {
                let x3 = ctx.mul(w, ctx.inv(x2));
                acc.add(roots[((x1 + x2 + x3) % p) as usize]);
            }
            acc.value()
        }
        _ => {
            let mut acc = KahanComplex::new();
            enumerate_rest(ctx, roots, s - 2, x1 % p, x1, n, &mut acc);
            acc.value()
        }
    }
}

fn enumerate_rest(
    ctx: &PrimeFieldCtx,
    roots: &[Complex64],
    free: u32,
    coord_sum: u64,
    prod: u64,
    n: u64,
    acc: &mut KahanComplex,
) {
    let p = ctx.p();
    if free == 0 {
        let last = ctx.mul(n, ctx.inv(prod));
        acc.add(roots[((coord_sum + last) % p) as usize]);
        return;
    }
    for x in 1..p {
        enumerate_rest(ctx, roots, free - 1, (coord_sum + x) % p, ctx.mul(prod, x), n, acc);
    }
}

/// All of K_{s,p} at once, default execution mode and budget.
pub fn bulk(ctx: &PrimeFieldCtx, s: u32) -> Result<KloostermanTable> {
    bulk_with(ctx, s, ExecMode::default(), DEFAULT_BULK_BUDGET)
}

/// Bulk evaluation over the multiplicative group: with a(k) = e_p(g^k) the
/// unnormalized sum at n = g^m is the s-fold cyclic convolution (a * ... * a)
/// evaluated at m, i.e. the inverse transform of the pointwise s-th power of
/// the forward transform of a.
pub fn bulk_with(
    ctx: &PrimeFieldCtx,
    s: u32,
    mode: ExecMode,
    budget: u64,
) -> Result<KloostermanTable> {
    assert!(s >= 1, "dimension s must be >= 1");
    let p = ctx.p();
    let n = (p - 1) as usize;
    let m = (2 * n - 1).next_power_of_two() as u64;
    let required = 16 * (3 * m + 3 * p);
    if required > budget {
        return Err(Error::TooLarge { required, budget });
    }

    let roots = unit_roots(p);
    let plan = Bluestein::new(n, mode);
    let a: Vec<Complex64> = map_indexed(n, mode, |k| roots[ctx.pow_g(k as u64) as usize]);
    let mut f = plan.dft(&a, mode);
    for_each_chunk_mut(&mut f, PAR_CHUNK, mode, |_, chunk| {
        for v in chunk.iter_mut() {
            let base = *v;
            let mut acc = base;
            for _ in 1..s {
                acc *= base;
            }
            *v = acc;
        }
    });
    let conv = plan.idft(&f, mode);

    let norm = (p as f64).powf(-((s as f64 - 1.0) / 2.0));
    let values: Vec<Complex64> = map_indexed(p as usize, mode, |x| {
        if x == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            conv[ctx.dlog(x as u64) as usize] * norm
        }
    });

    Ok(KloostermanTable {
        s,
        p,
        values,
        method: Method::Bulk,
        max_abs_error: bulk_error_budget(s, p),
    })
}

/// Full table by the direct route. O(p^s); only sensible for small p.
pub fn direct_table(ctx: &PrimeFieldCtx, s: u32) -> Result<KloostermanTable> {
    let p = ctx.p();
    let values: Vec<Complex64> = (0..p)
        .map(|n| direct(ctx, s, n))
        .collect::<Result<_>>()?;
    Ok(KloostermanTable {
        s,
        p,
        values,
        method: Method::Direct,
        max_abs_error: direct_error_budget(s, p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument_is_empty_sum() {
        let ctx = PrimeFieldCtx::new(7).unwrap();
        for s in 1..=3 {
            assert_eq!(direct(&ctx, s, 0).unwrap(), Complex64::new(0.0, 0.0));
        }
        let t = bulk(&ctx, 2).unwrap();
        assert_eq!(t.values[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn s1_is_single_exponential() {
        let ctx = PrimeFieldCtx::new(7).unwrap();
        let t = bulk(&ctx, 1).unwrap();
        let roots = unit_roots(7);
        for n in 1..7u64 {
            assert!((t.value(n) - roots[n as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn bulk_matches_direct_entrywise() {
        for (p, s) in [(5u64, 2u32), (5, 3), (11, 2), (11, 3), (101, 2), (101, 3), (31, 4)] {
            let ctx = PrimeFieldCtx::new(p).unwrap();
            let t = bulk(&ctx, s).unwrap();
            for n in 0..p {
                let d = direct(&ctx, s, n).unwrap();
                assert!(
                    (t.value(n) - d).norm() < 1e-10,
                    "p={p} s={s} n={n} delta={}",
                    (t.value(n) - d).norm()
                );
            }
        }
    }

    #[test]
    fn complete_sum_identity() {
        for (p, s) in [(101u64, 2u32), (101, 3), (101, 4), (1009, 2)] {
            let ctx = PrimeFieldCtx::new(p).unwrap();
            let t = bulk(&ctx, s).unwrap();
            let sum = t.complete_sum();
            let target = t.complete_sum_target();
            assert!(
                (sum.re - target).abs() < p as f64 * t.max_abs_error && sum.im.abs() < p as f64 * t.max_abs_error,
                "p={p} s={s} sum={sum} target={target}"
            );
        }
    }

    #[test]
    fn conjugation_symmetry() {
        for (p, s) in [(101u64, 2u32), (101, 3), (1009, 2), (1009, 3)] {
            let ctx = PrimeFieldCtx::new(p).unwrap();
            let t = bulk(&ctx, s).unwrap();
            assert!(t.conjugation_defect() <= 2.0 * t.max_abs_error);
            if s % 2 == 0 {
                assert!(t.max_imag() <= 2.0 * t.max_abs_error);
            }
        }
    }

    #[test]
    fn deligne_fault_injection_fails() {
        let ctx = PrimeFieldCtx::new(11).unwrap();
        let mut t = bulk(&ctx, 2).unwrap();
        assert!(t.verify_deligne().pass);
        t.values[3] = Complex64::new(t.s as f64 + 1.0, 0.0);
        assert!(!t.verify_deligne().pass);
    }

    #[test]
    fn enumeration_budget_enforced() {
        let ctx = PrimeFieldCtx::new(101).unwrap();
        assert!(matches!(
            direct_with(&ctx, 6, 1, ExecMode::default(), 1_000_000),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn modes_bit_identical() {
        let ctx = PrimeFieldCtx::new(211).unwrap();
        for s in [1u32, 2, 3] {
            let a = bulk_with(&ctx, s, ExecMode::Sequential, DEFAULT_BULK_BUDGET).unwrap();
            let b = bulk_with(&ctx, s, ExecMode::default(), DEFAULT_BULK_BUDGET).unwrap();
            assert_eq!(a.values, b.values);
            let da = direct_with(&ctx, s, 5, ExecMode::Sequential, DEFAULT_ENUM_BUDGET).unwrap();
            let db = direct_with(&ctx, s, 5, ExecMode::default(), DEFAULT_ENUM_BUDGET).unwrap();
            assert_eq!(da, db);
        }
    }

    #[test]
    fn repeated_runs_bit_identical() {
        let ctx = PrimeFieldCtx::new(409).unwrap();
        let a = bulk(&ctx, 3).unwrap();
        let b = bulk(&ctx, 3).unwrap();
        assert_eq!(a.values, b.values);
    }
}
