//! Cell expansion, parallel execution, and deterministic output emission.
//!
//! A run is a cross product of primes and dimensions; each cell is an
//! independent task. Workers push finished cells over a channel and the
//! coordinator writes rows in canonical cell order, flushing as the prefix
//! completes, so an interrupt preserves every finished row and the bytes
//! written never depend on the worker count.
//!
//! The `elapsed_s` column is fixed at 0 in row output so files from equal
//! configs diff clean; real per-cell wall times live in the run manifest.

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::mpsc;
use std::time::Instant;

use klooster::bounds;
use klooster::cache;
use klooster::fields::PrimeFieldCtx;
use klooster::integers::{saddle_point_alpha, SieveTables};
use klooster::kloosterman::{self, KloostermanTable};
use klooster::sums;

use crate::config::{
    parse_n_rule, parse_y_rule, EllSpec, Experiment, ExperimentConfig, OutputFormat,
};

#[derive(Clone, Debug)]
pub struct Cell {
    pub index: usize,
    pub p: u64,
    pub s: u32,
    pub n: u64,
    pub y: Option<f64>,
    pub ell: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellManifest {
    pub index: usize,
    pub p: u64,
    pub s: u32,
    pub elapsed_s: f64,
    pub cache_hit: bool,
    pub status: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellManifest>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub rows: usize,
    pub failures: Vec<(usize, String)>,
    pub manifest: RunManifest,
}

struct CellOutcome {
    rows: Vec<Vec<String>>,
    meta: CellManifest,
}

pub fn header(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::Table => &[
            "p", "s", "method", "max_abs_error", "deligne_max", "deligne_pass", "elapsed_s",
            "status",
        ],
        Experiment::Q => &["p", "s", "N", "re", "im", "abs", "n_terms", "elapsed_s", "status"],
        Experiment::R => &[
            "p", "s", "N", "y", "alpha", "Psi", "re", "im", "abs", "n_terms", "elapsed_s",
            "status",
        ],
        Experiment::Pm => &[
            "p", "s", "kind", "limit", "re", "im", "abs", "n_terms", "elapsed_s", "status",
        ],
        Experiment::TypeI => &[
            "p", "s", "D", "N", "r", "weight_scheme", "re", "im", "abs", "n_terms", "elapsed_s",
            "status",
        ],
        Experiment::Incomplete => &[
            "p", "s", "draw", "d", "e", "K", "factors", "abs", "bound", "ratio", "elapsed_s",
            "status",
        ],
        Experiment::Jcount => &[
            "p", "H", "D", "r", "M_size", "count", "bound", "ratio", "pass", "elapsed_s",
            "status",
        ],
        Experiment::VerifyT12 => &[
            "p", "s", "N", "ell", "D0", "lhs", "rhs", "ratio", "pass", "elapsed_s", "status",
        ],
        Experiment::VerifyT15 => &[
            "p", "s", "N", "y", "alpha", "beta", "gamma", "Psi", "L0", "lhs", "rhs", "ratio",
            "pass", "elapsed_s", "status",
        ],
        Experiment::VerifyLemmas => &[
            "p", "s", "draws", "max_ratio", "bound", "pass", "elapsed_s", "status",
        ],
    }
}

/// Expand the run into cells, resolving every derived parameter and
/// validating each cell's preconditions. Nothing is computed yet: a bad rule
/// or out-of-window cell aborts the run before any work starts.
pub fn expand_cells(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Cell>> {
    let n_rule = parse_n_rule(&cfg.n_rule)?;
    let y_rule = cfg.y_rule.as_deref().map(parse_y_rule).transpose()?;
    let primes = cfg.primes();
    if primes.is_empty() {
        bail!("prime set is empty");
    }
    for &p in &primes {
        if !klooster::fields::is_prime(p) || p < 3 {
            bail!("p = {p} is not an odd prime");
        }
    }
    let mut cells = Vec::new();
    for &p in &primes {
        for &s in &cfg.s_values {
            let n = n_rule.apply(p).max(1);
            let y = y_rule.map(|r| r.apply(n));
            let ell = match cfg.ell {
                Some(EllSpec::Even(e)) => Some(e),
                Some(EllSpec::Auto(_)) => match cfg.experiment {
                    Experiment::VerifyT12 => Some(
                        bounds::optimal_ell(p, n as f64, 16)
                            .map_err(|e| anyhow!("cell (p={p}, s={s}): {e}"))?,
                    ),
                    _ => None,
                },
                None => None,
            };
            let cell = Cell { index: cells.len(), p, s, n, y, ell };
            validate_cell(cfg, &cell)?;
            cells.push(cell);
        }
    }
    Ok(cells)
}

fn validate_cell(cfg: &ExperimentConfig, cell: &Cell) -> anyhow::Result<()> {
    let fail = |msg: String| -> anyhow::Result<()> {
        bail!("cell (p={}, s={}) invalid before run: {msg}", cell.p, cell.s)
    };
    match cfg.experiment {
        Experiment::VerifyT12 => {
            let ell = match cell.ell {
                Some(e) => e,
                None => return fail("VerifyT12 requires ell (even integer or \"auto\")".into()),
            };
            if let Err(e) = bounds::square_free_q_bound(cell.p, cell.n as f64, ell) {
                return fail(e.to_string());
            }
        }
        Experiment::VerifyT15 => {
            let y = cell.y.expect("validated by config");
            let n = cell.n as f64;
            if n < (cell.p as f64).sqrt() {
                return fail(format!("N = {n} below p^(1/2)"));
            }
            if y < n.ln() {
                return fail(format!("y = {y} below log N"));
            }
            if y > n || y < 2.0 {
                return fail(format!("y = {y} outside [2, N] (saddle point domain)"));
            }
        }
        Experiment::R => {
            let y = cell.y.ok_or_else(|| anyhow!("R requires a y_rule"))?;
            if y < 2.0 {
                return fail(format!("y = {y} < 2"));
            }
        }
        Experiment::TypeI => {
            let ti = resolve_type_i(cfg, cell.p);
            if ti.r == 0 {
                return fail("type-I exponent r must be nonzero".into());
            }
            if ti.d >= cell.p {
                return fail(format!("type-I D = {} must be < p", ti.d));
            }
        }
        Experiment::Jcount => {
            let jp = resolve_jcount(cfg, cell.p);
            if jp.r == 0 {
                return fail("Jcount exponent r must be nonzero".into());
            }
            if jp.d >= cell.p {
                return fail(format!("Jcount D = {} must be < p", jp.d));
            }
            if jp.h == 0 {
                return fail("Jcount H must be >= 1".into());
            }
        }
        _ => {}
    }
    Ok(())
}

struct ResolvedJ {
    h: u64,
    d: u64,
    r: i64,
}

fn resolve_jcount(cfg: &ExperimentConfig, p: u64) -> ResolvedJ {
    let jp = cfg.j_params;
    let default_d = ((2.0 * p as f64).sqrt().ceil() as u64).min(p.saturating_sub(1)).max(1);
    ResolvedJ {
        h: jp.and_then(|j| j.h).unwrap_or(2 * default_d),
        d: jp.and_then(|j| j.d).unwrap_or(default_d),
        r: jp.and_then(|j| j.r).unwrap_or(2),
    }
}

struct ResolvedTypeI {
    d: u64,
    r: i64,
}

fn resolve_type_i(cfg: &ExperimentConfig, p: u64) -> ResolvedTypeI {
    let jp = cfg.j_params;
    ResolvedTypeI {
        d: jp.and_then(|j| j.d).unwrap_or_else(|| 50.min(p - 1)),
        r: jp.and_then(|j| j.r).unwrap_or(1),
    }
}

/// Run every cell and stream rows (CSV or JSON) to `out` in cell order.
pub fn execute_streaming(
    cfg: &ExperimentConfig,
    workers: usize,
    out: &mut dyn Write,
) -> anyhow::Result<RunSummary> {
    let cells = expand_cells(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;

    let cols = header(cfg.experiment);
    match cfg.format {
        OutputFormat::Csv => {
            writeln!(out, "{}", cols.join(","))?;
        }
        OutputFormat::Json => {
            writeln!(out, "[")?;
        }
    }

    let (tx, rx) = mpsc::channel::<(usize, CellOutcome)>();
    let mut outcomes: Vec<Option<CellManifest>> = (0..cells.len()).map(|_| None).collect();
    let mut failures = Vec::new();
    let mut rows_written = 0usize;
    let mut first_json_row = true;

    std::thread::scope(|scope| -> anyhow::Result<()> {
        let cells_ref = &cells;
        let cfg_ref = cfg;
        let pool_ref = &pool;
        let worker = scope.spawn(move || {
            pool_ref.install(|| {
                use rayon::prelude::*;
                cells_ref.par_iter().for_each_with(tx, |tx, cell| {
                    let outcome = compute_cell(cfg_ref, cell);
                    tx.send((cell.index, outcome)).ok();
                });
            });
        });

        let mut pending: BTreeMap<usize, CellOutcome> = BTreeMap::new();
        let mut next = 0usize;
        for (idx, outcome) in rx.iter() {
            pending.insert(idx, outcome);
            while let Some(o) = pending.remove(&next) {
                for row in &o.rows {
                    emit_row(out, cfg.format, cols, row, &mut first_json_row)?;
                    rows_written += 1;
                }
                out.flush()?;
                if o.meta.status != "ok" {
                    failures.push((next, o.meta.status.clone()));
                }
                outcomes[next] = Some(o.meta);
                next += 1;
            }
        }
        worker.join().map_err(|_| anyhow!("worker pool panicked"))?;
        Ok(())
    })?;

    if matches!(cfg.format, OutputFormat::Json) {
        writeln!(out, "\n]")?;
    }
    out.flush()?;

    Ok(RunSummary {
        rows: rows_written,
        failures,
        manifest: RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            cells: outcomes.into_iter().map(|o| o.expect("all cells drained")).collect(),
        },
    })
}

fn emit_row(
    out: &mut dyn Write,
    format: OutputFormat,
    cols: &[&str],
    row: &[String],
    first_json_row: &mut bool,
) -> std::io::Result<()> {
    debug_assert_eq!(cols.len(), row.len());
    match format {
        OutputFormat::Csv => writeln!(out, "{}", row.join(",")),
        OutputFormat::Json => {
            if !*first_json_row {
                writeln!(out, ",")?;
            }
            *first_json_row = false;
            let fields: Vec<String> = cols
                .iter()
                .zip(row)
                .map(|(c, v)| format!("\"{c}\": {}", json_value(v)))
                .collect();
            write!(out, "  {{{}}}", fields.join(", "))
        }
    }
}

fn json_value(v: &str) -> String {
    if v == "true" || v == "false" {
        return v.to_string();
    }
    if !v.is_empty() && v.parse::<f64>().is_ok_and(|x| x.is_finite()) {
        return v.to_string();
    }
    format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\""))
}

fn compute_cell(cfg: &ExperimentConfig, cell: &Cell) -> CellOutcome {
    let start = Instant::now();
    let mut cache_hit = false;
    let result = compute_rows(cfg, cell, &mut cache_hit);
    let (rows, status) = match result {
        Ok(rows) => (rows, "ok".to_string()),
        Err(e) => {
            let status = format!("error:{e}");
            let cols = header(cfg.experiment);
            let mut row = vec![String::new(); cols.len()];
            row[0] = cell.p.to_string();
            *row.last_mut().unwrap() = status.clone();
            (vec![row], status)
        }
    };
    CellOutcome {
        rows,
        meta: CellManifest {
            index: cell.index,
            p: cell.p,
            s: cell.s,
            elapsed_s: start.elapsed().as_secs_f64(),
            cache_hit,
            status,
        },
    }
}

fn table_for(
    cfg: &ExperimentConfig,
    cell: &Cell,
    cache_hit: &mut bool,
) -> anyhow::Result<KloostermanTable> {
    let ctx = PrimeFieldCtx::new(cell.p)?;
    match &cfg.cache_dir {
        Some(dir) => {
            let (t, hit) = cache::bulk_cached(&ctx, cell.s, dir)?;
            *cache_hit = hit;
            Ok(t)
        }
        None => Ok(kloosterman::bulk(&ctx, cell.s)?),
    }
}

fn f(v: f64) -> String {
    format!("{v}")
}

/// Cell-local RNG stream id. Derived from the cell's coordinates rather than
/// its position in the sweep, so a cell re-run in isolation draws the same
/// weights it drew inside the full sweep.
fn stream_of(cell: &Cell) -> u64 {
    (cell.p << 6) | cell.s as u64
}

fn compute_rows(
    cfg: &ExperimentConfig,
    cell: &Cell,
    cache_hit: &mut bool,
) -> anyhow::Result<Vec<Vec<String>>> {
    let zero = "0".to_string();
    let ok = "ok".to_string();
    match cfg.experiment {
        Experiment::Table => {
            let t = table_for(cfg, cell, cache_hit)?;
            let del = t.verify_deligne();
            Ok(vec![vec![
                cell.p.to_string(),
                cell.s.to_string(),
                "bulk".to_string(),
                f(t.max_abs_error),
                f(del.lhs),
                del.pass.to_string(),
                zero,
                ok,
            ]])
        }
        Experiment::Q => {
            let t = table_for(cfg, cell, cache_hit)?;
            let sieves = SieveTables::build(cell.n)?;
            let q = sums::sum_q(&t, &sieves, cell.n)?;
            Ok(vec![vec![
                cell.p.to_string(),
                cell.s.to_string(),
                cell.n.to_string(),
                f(q.value.re),
                f(q.value.im),
                f(q.value.norm()),
                q.n_terms.to_string(),
                zero,
                ok,
            ]])
        }
        Experiment::R => {
            let t = table_for(cfg, cell, cache_hit)?;
            let y = cell.y.expect("validated");
            let sieves = SieveTables::build(cell.n)?;
            let smooth = sieves.smooth_set(cell.n, y)?;
            // alpha is only defined for 2 <= y <= N, N >= 16; blank otherwise
            let alpha = saddle_point_alpha(cell.n, y).map(f).unwrap_or_default();
            let r = sums::sum_r(&t, &smooth, cell.n, y)?;
            Ok(vec![vec![
                cell.p.to_string(),
                cell.s.to_string(),
                cell.n.to_string(),
                f(y),
                alpha,
                smooth.len().to_string(),
                f(r.value.re),
                f(r.value.im),
                f(r.value.norm()),
                r.n_terms.to_string(),
                zero,
                ok,
            ]])
        }
        Experiment::Pm => {
            let t = table_for(cfg, cell, cache_hit)?;
            let sieves = SieveTables::build(cell.n)?;
            let p_sum = sums::sum_p(&t, &sieves, cell.n)?;
            let m_mu = sums::sum_m(&t, &sieves, cell.n, sums::MultWeight::Mobius)?;
            let m_tau = sums::sum_m(&t, &sieves, cell.n, sums::MultWeight::Tau)?;
            let row = |kind: &str, r: &sums::SumResult| {
                vec![
                    cell.p.to_string(),
                    cell.s.to_string(),
                    kind.to_string(),
                    cell.n.to_string(),
                    f(r.value.re),
                    f(r.value.im),
                    f(r.value.norm()),
                    r.n_terms.to_string(),
                    zero.clone(),
                    ok.clone(),
                ]
            };
            Ok(vec![row("P", &p_sum), row("M_mu", &m_mu), row("M_tau", &m_tau)])
        }
        Experiment::TypeI => {
            let t = table_for(cfg, cell, cache_hit)?;
            let ti = resolve_type_i(cfg, cell.p);
            let weights = sums::unit_disk_weights(ti.d, cfg.seed, stream_of(cell));
            let n = cell.n.min(cell.p);
            let intervals = sums::full_intervals(ti.d, n);
            let r = sums::sum_type_i(&t, &weights, &intervals, ti.r)?;
            Ok(vec![vec![
                cell.p.to_string(),
                cell.s.to_string(),
                ti.d.to_string(),
                n.to_string(),
                ti.r.to_string(),
                "unit-disk".to_string(),
                f(r.value.re),
                f(r.value.im),
                f(r.value.norm()),
                r.n_terms.to_string(),
                zero,
                ok,
            ]])
        }
        Experiment::Incomplete => {
            let t = table_for(cfg, cell, cache_hit)?;
            let bound = (cell.p as f64).sqrt() * (cell.p as f64).ln();
            let draws = sums::seeded_twist_draws(cell.p, cfg.draws, cfg.seed, stream_of(cell));
            let mut rows = Vec::new();
            for (i, draw) in draws.iter().enumerate() {
                for (factors, e) in [(1u32, None), (2, Some(draw.e))] {
                    let sum = sums::sum_incomplete(&t, draw.d, e, draw.k_limit)?;
                    let abs = sum.value.norm();
                    rows.push(vec![
                        cell.p.to_string(),
                        cell.s.to_string(),
                        i.to_string(),
                        draw.d.to_string(),
                        e.map(|v| v.to_string()).unwrap_or_default(),
                        draw.k_limit.to_string(),
                        factors.to_string(),
                        f(abs),
                        f(bound),
                        f(abs / bound),
                        zero.clone(),
                        ok.clone(),
                    ]);
                }
            }
            Ok(rows)
        }
        Experiment::Jcount => {
            let jp = resolve_jcount(cfg, cell.p);
            let m = sums::power_residue_set(cell.p, jp.d, jp.r)?;
            let count = sums::count_j(cell.p, jp.h, &m);
            let a = (jp.h as f64 / 2.0).max(1.0);
            let cap = 16.0
                * ((a * jp.d as f64 * cell.p as f64).ln().powi(2))
                * (a * a * (jp.d * jp.d) as f64)
                / cell.p as f64;
            let ratio = count.count as f64 / cap;
            Ok(vec![vec![
                cell.p.to_string(),
                jp.h.to_string(),
                jp.d.to_string(),
                jp.r.to_string(),
                m.len().to_string(),
                count.count.to_string(),
                f(cap),
                f(ratio),
                (ratio <= 1.0).to_string(),
                zero,
                ok,
            ]])
        }
        Experiment::VerifyT12 => {
            let ell = cell.ell.expect("validated");
            let t = table_for(cfg, cell, cache_hit)?;
            let sieves = SieveTables::build(cell.n)?;
            let q = sums::sum_q(&t, &sieves, cell.n)?;
            let rhs = bounds::square_free_q_bound(cell.p, cell.n as f64, ell)?;
            let d0 = bounds::balance_d0(cell.p, cell.n as f64, ell)?;
            let rep = bounds::report(&q, rhs, cfg.c)?;
            Ok(vec![vec![
                cell.p.to_string(),
                cell.s.to_string(),
                cell.n.to_string(),
                ell.to_string(),
                f(d0),
                f(rep.lhs),
                f(rep.rhs),
                f(rep.ratio),
                rep.pass.to_string(),
                zero,
                ok,
            ]])
        }
        Experiment::VerifyT15 => {
            let y = cell.y.expect("validated");
            let t = table_for(cfg, cell, cache_hit)?;
            let sieves = SieveTables::build(cell.n)?;
            let smooth = sieves.smooth_set(cell.n, y)?;
            let alpha = saddle_point_alpha(cell.n, y)?;
            let sb = bounds::smooth_r_bound(cell.p, cell.n as f64, y, alpha, smooth.len() as u64)?;
            let l0 = bounds::balance_l0(cell.p, cell.n as f64, alpha)?;
            let r = sums::sum_r(&t, &smooth, cell.n, y)?;
            let rep = bounds::report(&r, sb.rhs, cfg.c)?;
            Ok(vec![vec![
                cell.p.to_string(),
                cell.s.to_string(),
                cell.n.to_string(),
                f(y),
                f(alpha),
                f(sb.beta),
                f(sb.gamma),
                smooth.len().to_string(),
                f(l0),
                f(rep.lhs),
                f(rep.rhs),
                f(rep.ratio),
                rep.pass.to_string(),
                zero,
                ok,
            ]])
        }
        Experiment::VerifyLemmas => {
            let t = table_for(cfg, cell, cache_hit)?;
            let bound = (cell.p as f64).sqrt() * (cell.p as f64).ln();
            let draws = sums::seeded_twist_draws(cell.p, cfg.draws, cfg.seed, stream_of(cell));
            let mut worst = 0.0f64;
            for draw in &draws {
                let one = sums::sum_incomplete(&t, draw.d, None, draw.k_limit)?;
                let two = sums::sum_incomplete(&t, draw.d, Some(draw.e), draw.k_limit)?;
                worst = worst.max(one.value.norm() / bound).max(two.value.norm() / bound);
            }
            Ok(vec![vec![
                cell.p.to_string(),
                cell.s.to_string(),
                cfg.draws.to_string(),
                f(worst),
                f(bound),
                (worst <= cfg.c).to_string(),
                zero,
                ok,
            ]])
        }
    }
}
