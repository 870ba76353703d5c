//! Build one Kloosterman table in both execution modes and report wall
//! times plus a bit-identity check.
//!
//!     cargo run --release -p klooster --example table_timing -- 1000003 2

use klooster::fields::PrimeFieldCtx;
use klooster::kloosterman::{bulk_with, DEFAULT_BULK_BUDGET};
use klooster::ExecMode;
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let p: u64 = args.next().as_deref().unwrap_or("1000003").parse().expect("prime p");
    let s: u32 = args.next().as_deref().unwrap_or("2").parse().expect("dimension s");

    let ctx = PrimeFieldCtx::new(p).expect("prime context");
    let t0 = Instant::now();
    let seq = bulk_with(&ctx, s, ExecMode::Sequential, DEFAULT_BULK_BUDGET).unwrap();
    let seq_time = t0.elapsed();

    #[cfg(feature = "parallel")]
    {
        let t1 = Instant::now();
        let par = bulk_with(&ctx, s, ExecMode::Parallel, DEFAULT_BULK_BUDGET).unwrap();
        let par_time = t1.elapsed();
        println!(
            "p={p} s={s}: sequential {seq_time:?}, parallel {par_time:?}, bit-identical: {}",
            seq.values == par.values
        );
        return;
    }
    #[allow(unreachable_code)]
    {
        println!("p={p} s={s}: sequential {seq_time:?} (parallel feature disabled)");
    }
}
