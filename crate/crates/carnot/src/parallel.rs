//! Work splitting over fixed-size index chunks. Chunk boundaries never depend on
//! the number of worker threads and results merge in chunk order, so reports are
//! identical for any `--workers`.

use std::ops::Range;

use carnot_core::{
    control::{self, GeodesicOptions, GeodesicSolution, ScanEntry, SingularScanReport, V1Norm},
    heisenberg::{self, Condition62Report, ConvexDomain, Grid62},
    norms::{self, Ball, Gauge, VerificationReport, VerifyOptions},
    GradedGroup,
};
use rayon::prelude::*;

use crate::error::Result;

pub const CHUNK: u64 = 512;

pub fn chunks(n: u64, size: u64) -> Vec<Range<u64>> {
    let size = size.max(1);
    (0..n.div_ceil(size)).map(|c| c * size..((c + 1) * size).min(n)).collect()
}

/// Maps the chunks of `0..n` in parallel; output is in chunk order.
pub fn map_chunks<T: Send>(n: u64, size: u64, f: impl Fn(Range<u64>) -> T + Sync + Send) -> Vec<T> {
    chunks(n, size).into_par_iter().map(f).collect()
}

/// Runs `f` on a pool of `workers` threads, or on the global pool when `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

pub fn verify_ball<B: Ball + ?Sized>(group: &GradedGroup, ball: &B, opts: &VerifyOptions) -> Result<VerificationReport> {
    let parts = map_chunks(opts.n_samples, CHUNK, |r| norms::verify_ball_conditions_range(group, ball, opts, r));
    Ok(VerificationReport::merge(parts.into_iter().collect::<carnot_core::Result<_>>()?))
}

pub fn verify_norm_axioms<G: Gauge + ?Sized>(group: &GradedGroup, gauge: &G, n: u64, seed: u64, slack: f64) -> VerificationReport {
    VerificationReport::merge(map_chunks(n, CHUNK, |r| norms::verify_norm_axioms_range(group, gauge, seed, slack, r)))
}

/// Star-shape and vertical-segment checks, in that order.
pub fn star_and_vertical<B: Ball + ?Sized>(ball: &B, n: u64, seed: u64) -> Result<VerificationReport> {
    let parts = map_chunks(n, CHUNK, |r| -> carnot_core::Result<VerificationReport> {
        let mut a = heisenberg::star_shape_check_range(ball, seed, r.clone())?;
        a.checks.extend(heisenberg::vertical_segment_check_range(ball, seed, r)?.checks);
        Ok(VerificationReport::from_checks(a.checks))
    });
    Ok(VerificationReport::merge(parts.into_iter().collect::<carnot_core::Result<_>>()?))
}

/// Grid check of the planar condition, parallel by rows.
pub fn condition_62(f: &(impl Fn([f64; 2]) -> f64 + Sync), domain: &ConvexDomain, grid: Grid62) -> Condition62Report {
    let parts: Vec<Condition62Report> = chunks(grid.points as u64, 8)
        .into_par_iter()
        .map(|r| heisenberg::verify_condition_62_rows(f, domain, grid, r.start as usize..r.end as usize))
        .collect();
    Condition62Report::merge(parts)
}

pub fn singular_scan(group: &GradedGroup, directions: &[Vec<f64>], m: usize, norm: &V1Norm, tol: f64) -> Result<SingularScanReport> {
    let parts = map_chunks(directions.len() as u64, 4, |r| {
        control::singular_scan(group, &directions[r.start as usize..r.end as usize], m, norm, tol).map(|rep| rep.entries)
    });
    let entries: Vec<ScanEntry> = parts.into_iter().collect::<carnot_core::Result<Vec<_>>>()?.into_iter().flatten().collect();
    Ok(SingularScanReport::from_entries(m, tol, entries))
}

/// Restarts in parallel, then the deterministic selection.
pub fn geodesic_solve(group: &GradedGroup, norm: &V1Norm, target: &[f64], opts: &GeodesicOptions) -> Result<GeodesicSolution> {
    let sols = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|i| control::geodesic_restart(group, norm, target, opts, i))
        .collect::<carnot_core::Result<Vec<_>>>()?;
    Ok(control::select_best(sols).expect("at least one restart"))
}
