//! Size estimators over a sampled study.
//!
//! Given a study that observed `N*` of the true `N` vertices, the question is
//! how far to inflate `N*`. Four answers, in increasing order of effort:
//!
//! * [`naive`] — report `N*` itself (always an undercount).
//! * [`leave_one_out`] — treat each target as a held-out probe: a target seen
//!   *only* on routes to itself would have gone unobserved had it not been
//!   probed, and the fraction of such targets reveals what share of the graph
//!   the remaining probes miss. Exact bookkeeping comes from the study's
//!   cover map; no re-tracing is needed.
//! * [`leave_one_out_approx`] — a short-form of the same correction that only
//!   needs `N*` and the exclusive-target count.
//! * [`resampling`] — simulate the sampling process *inside* the sampled
//!   subgraph at a matched probe ratio and read the size off the observed
//!   shrinkage, solving a one-dimensional fixed point by bisection on the
//!   resampled target count.
//!
//! All estimators clamp their result below at `N*`: the graph cannot be
//! smaller than what was seen. [`ping`] is the unrelated classical baseline
//! of scaling an address space by a probe response rate, included for
//! comparison studies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{giant_component, Graph};
use crate::routing::{discovery_count, TraceStudy};
use crate::seed::{derive, stream};

/// Size of the IPv4 address space, the default probe universe for [`ping`].
pub const IPV4_ADDRESS_SPACE: u64 = 1 << 32;

// ---------------------------------------------------------------------------
// Leave-one-out
// ---------------------------------------------------------------------------

/// Per-target exclusivity statistics extracted from a study's cover map.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaveOneOutStats {
    /// For each target index `j`: was the target observed *only* en route to
    /// itself? (Removing its probe would have removed it from the sample.)
    pub target_exclusive: Vec<bool>,
    /// `X`: number of `true` entries in `target_exclusive`.
    pub num_exclusive_targets: usize,
    /// `u_j`: vertices observed exclusively en route to target `j`. Dropping
    /// target `j` shrinks the sample by exactly `u_j` vertices.
    pub exclusive_vertex_counts: Vec<usize>,
    /// Mean over `j` of `N* − u_j`, the sample size with target `j` held out.
    pub mean_reduced_size: f64,
}

/// The observed vertex count `N*` — the floor every other estimator respects.
pub fn naive(study: &TraceStudy) -> usize {
    study.num_sampled_vertices()
}

/// Computes the held-out-target statistics. Requires at least two targets;
/// with a single target every vertex is trivially exclusive and the
/// correction has nothing to work with.
pub fn leave_one_out_stats(study: &TraceStudy) -> Result<LeaveOneOutStats> {
    let n_targets = study.targets().len();
    if n_targets < 2 {
        return Err(Error::InvalidParameter(
            "leave-one-out statistics need at least two targets".into(),
        ));
    }

    let mut exclusive_vertex_counts = vec![0usize; n_targets];
    for tags in study.cover().values() {
        if let [only] = tags.as_slice() {
            exclusive_vertex_counts[*only as usize] += 1;
        }
    }
    let target_exclusive: Vec<bool> = study
        .targets()
        .iter()
        .enumerate()
        .map(|(j, &t)| study.cover_of(t) == [j as u32])
        .collect();
    let num_exclusive_targets = target_exclusive.iter().filter(|&&d| d).count();
    let dropped: usize = exclusive_vertex_counts.iter().sum();
    let mean_reduced_size =
        study.num_sampled_vertices() as f64 - dropped as f64 / n_targets as f64;

    Ok(LeaveOneOutStats {
        target_exclusive,
        num_exclusive_targets,
        exclusive_vertex_counts,
        mean_reduced_size,
    })
}

/// The correction formula, on plain numbers. `x` is the exclusive-target
/// count and `mean_reduced` the average held-out sample size. The denominator
/// `n_targets + 1 − x` is at least 1, so the value is always finite.
fn leave_one_out_formula(
    n_sources: usize,
    n_targets: usize,
    x: usize,
    mean_reduced: f64,
) -> f64 {
    let nt = n_targets as f64;
    let x = x as f64;
    let numerator = nt * mean_reduced - (n_sources as f64 + nt - 1.0) * x;
    ((nt + 1.0) / nt) * numerator / (nt + 1.0 - x)
}

/// Leave-one-out estimate of the true vertex count, clamped below at `N*`.
pub fn leave_one_out(study: &TraceStudy) -> Result<f64> {
    let stats = leave_one_out_stats(study)?;
    Ok(leave_one_out_from_stats(study, &stats))
}

fn leave_one_out_from_stats(study: &TraceStudy, stats: &LeaveOneOutStats) -> f64 {
    let raw = leave_one_out_formula(
        study.sources().len(),
        study.targets().len(),
        stats.num_exclusive_targets,
        stats.mean_reduced_size,
    );
    raw.max(study.num_sampled_vertices() as f64)
}

/// Closed-form shortcut: inflate the non-probe part of the sample by the
/// unseen-share odds `1 − X/(n_targets + 1)`. Clamped below at `N*`. Unlike
/// the exact version this is well-defined for a single target (though
/// saturated studies just clamp).
pub fn leave_one_out_approx(study: &TraceStudy) -> f64 {
    let n_sources = study.sources().len();
    let n_targets = study.targets().len();
    let n_star = study.num_sampled_vertices();
    let x = study
        .targets()
        .iter()
        .enumerate()
        .filter(|&(j, &t)| study.cover_of(t) == [j as u32])
        .count();

    let probes = (n_sources + n_targets) as f64;
    let unseen_share = x as f64 / (n_targets as f64 + 1.0);
    let raw = probes + (n_star as f64 - probes) / (1.0 - unseen_share);
    raw.max(n_star as f64)
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Tuning for the resampling fixed-point search.
#[derive(Debug, Clone)]
pub struct ResamplingOptions {
    /// Resampled studies per function evaluation while bracketing.
    pub initial_batch: usize,
    /// Batch ceiling once the search is close (see `refine_width`).
    pub max_batch: usize,
    /// Bracket width at which the batch starts doubling toward `max_batch`.
    pub refine_width: usize,
    /// Residual tolerance; `None` means `0.5 / n_targets`.
    pub tolerance: Option<f64>,
    pub max_iterations: usize,
    /// Root seed for all resampled studies.
    pub seed: u64,
}

impl Default for ResamplingOptions {
    fn default() -> Self {
        ResamplingOptions {
            initial_batch: 10,
            max_batch: 80,
            refine_width: 4,
            tolerance: None,
            max_iterations: 64,
            seed: 0,
        }
    }
}

/// Outcome of the resampling search.
#[derive(Debug, Clone, PartialEq)]
pub struct ResamplingReport {
    /// Fixed-point resampled target count `n*_T`.
    pub resampled_targets: usize,
    /// Mean resampled discovery `N̄**` at the fixed point.
    pub mean_resampled_size: f64,
    /// Batch size used at the final evaluation.
    pub batch_size: usize,
    /// Bisection iterations performed (midpoint evaluations).
    pub iterations: usize,
    /// Final bracket.
    pub bracket: (usize, usize),
    /// `N̄**/N*_base − n*_T/n_T` at the reported point.
    pub residual: f64,
    /// The balance function was already ≤ 0 at a single target, so the
    /// search never had a bracket; the report is the boundary point.
    pub degenerate: bool,
    /// The sampled subgraph was disconnected and its giant component was
    /// used for resampling (cannot happen for studies assembled by this
    /// crate, but tolerated defensively).
    pub used_giant_component: bool,
    /// Final size estimate, clamped below at `N*`.
    pub estimate: f64,
}

/// Resampling estimator: find the resampled target count `n*_T` at which the
/// within-sample discovery ratio `N̄**/N*` matches the probe ratio
/// `n*_T / n_targets`, then scale `N*` by the inverse discovery ratio.
///
/// `g_star` must be the study's sampled subgraph (see
/// [`TraceStudy::sampled_subgraph`]). Resampled studies keep the original
/// source count, draw fresh sources and targets inside `g_star`, and are
/// evaluated concurrently; batches grow once the bracket is tight, trading
/// noise for cost exactly where precision matters.
pub fn resampling(
    study: &TraceStudy,
    g_star: &Graph,
    opts: &ResamplingOptions,
) -> Result<ResamplingReport> {
    if opts.initial_batch < 1 || opts.max_batch < opts.initial_batch {
        return Err(Error::InvalidParameter(
            "resampling batch sizes must satisfy 1 <= initial_batch <= max_batch".into(),
        ));
    }
    let n_sources = study.sources().len();
    let n_targets = study.targets().len();
    let n_star = study.num_sampled_vertices();

    // Defensive connectivity guard: resampling routes within g_star, so a
    // disconnected input is reduced to its giant component and the discovery
    // ratio is measured against that base.
    let gc_storage;
    let (base, used_giant_component) = if g_star.is_connected() {
        (g_star, false)
    } else {
        let edges: Vec<_> = g_star.edges().collect();
        gc_storage = giant_component(&edges)?.graph;
        (&gc_storage, true)
    };
    let n_base = base.num_vertices();
    if n_base < n_sources + 2 {
        return Err(Error::SampledGraphTooSmall);
    }

    let tolerance = opts.tolerance.unwrap_or(0.5 / n_targets as f64);
    let mut counter = 0u64;
    let mut iterations = 0usize;
    let mut batch = opts.initial_batch;

    // Mean resampled discovery at `nt` targets, and the balance residual.
    let eval = |nt: usize, batch: usize, counter: &mut u64| -> Result<(f64, f64)> {
        let seeds: Vec<u64> = (0..batch)
            .map(|k| derive(opts.seed, stream::RESAMPLE, *counter + k as u64))
            .collect();
        *counter += batch as u64;
        let sizes: Vec<usize> = seeds
            .par_iter()
            .map(|&s| discovery_count(base, n_sources, nt, s))
            .collect::<Result<_>>()?;
        let total: u64 = sizes.iter().map(|&c| c as u64).sum();
        let mean = total as f64 / batch as f64;
        Ok((mean, mean / n_base as f64 - nt as f64 / n_targets as f64))
    };

    let finish = |nt: usize,
                  mean: f64,
                  residual: f64,
                  batch: usize,
                  iterations: usize,
                  bracket: (usize, usize),
                  degenerate: bool| {
        let raw = n_star as f64 * n_base as f64 / mean;
        ResamplingReport {
            resampled_targets: nt,
            mean_resampled_size: mean,
            batch_size: batch,
            iterations,
            bracket,
            residual,
            degenerate,
            used_giant_component,
            estimate: raw.max(n_star as f64),
        }
    };

    let hi_cap = n_targets.min(n_base - n_sources);
    let (mean_lo, f_lo) = eval(1, batch, &mut counter)?;
    if f_lo <= 0.0 {
        // Even a single probe rediscovers proportionally less than its share:
        // no bracket exists and the boundary is the answer.
        return Ok(finish(1, mean_lo, f_lo, batch, iterations, (1, 1), true));
    }
    if hi_cap <= 1 {
        return Ok(finish(1, mean_lo, f_lo, batch, iterations, (1, 1), false));
    }
    let (mean_hi, f_hi) = eval(hi_cap, batch, &mut counter)?;
    if f_hi > 0.0 {
        // Discovery saturates above the probe share even at the cap (only
        // reachable through the giant-component fallback); the cap is the
        // balance point.
        return Ok(finish(hi_cap, mean_hi, f_hi, batch, iterations, (hi_cap, hi_cap), false));
    }

    let (mut lo, mut hi) = (1usize, hi_cap);
    let (mut state_lo, mut state_hi) = ((mean_lo, f_lo), (mean_hi, f_hi));
    // Invariant: f(lo) > 0 >= f(hi).
    loop {
        if hi - lo <= 1 {
            // Integer bracket exhausted: report the better endpoint.
            let (nt, (mean, residual)) = if state_lo.1.abs() <= state_hi.1.abs() {
                (lo, state_lo)
            } else {
                (hi, state_hi)
            };
            return Ok(finish(nt, mean, residual, batch, iterations, (lo, hi), false));
        }
        if iterations >= opts.max_iterations {
            let (nt, (mean, residual)) = if state_lo.1.abs() <= state_hi.1.abs() {
                (lo, state_lo)
            } else {
                (hi, state_hi)
            };
            let best = finish(nt, mean, residual, batch, iterations, (lo, hi), false);
            return Err(Error::NonConvergence {
                max_iterations: opts.max_iterations,
                bracket_low: lo,
                bracket_high: hi,
                best: Box::new(best),
            });
        }
        if hi - lo <= opts.refine_width {
            batch = (batch * 2).min(opts.max_batch);
        }
        iterations += 1;
        let mid = lo + (hi - lo) / 2;
        let (mean_mid, f_mid) = eval(mid, batch, &mut counter)?;
        if f_mid.abs() <= tolerance {
            return Ok(finish(mid, mean_mid, f_mid, batch, iterations, (lo, hi), false));
        }
        if f_mid > 0.0 {
            lo = mid;
            state_lo = (mean_mid, f_mid);
        } else {
            hi = mid;
            state_hi = (mean_mid, f_mid);
        }
    }
}

// ---------------------------------------------------------------------------
// Ping baseline
// ---------------------------------------------------------------------------

/// Address-space scaling estimate over the IPv4 space: probe `n_probes`
/// random addresses, observe `n_responses`, scale.
pub fn ping(n_probes: u64, n_responses: u64) -> Result<f64> {
    ping_with_space(n_probes, n_responses, IPV4_ADDRESS_SPACE)
}

/// [`ping`] over an arbitrary address-space size.
pub fn ping_with_space(n_probes: u64, n_responses: u64, address_space: u64) -> Result<f64> {
    if n_probes == 0 {
        return Err(Error::InvalidParameter("ping needs at least one probe".into()));
    }
    if n_responses > n_probes {
        return Err(Error::InvalidParameter(format!(
            "{n_responses} responses from {n_probes} probes"
        )));
    }
    Ok(address_space as f64 * (n_responses as f64 / n_probes as f64))
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

/// Every study-based estimate in one place.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// `N*`.
    pub observed_vertices: usize,
    /// `M*`.
    pub observed_edges: usize,
    pub stats: LeaveOneOutStats,
    pub leave_one_out: f64,
    pub leave_one_out_approx: f64,
    /// Present when resampling was requested.
    pub resampling: Option<ResamplingReport>,
}

impl EstimateReport {
    /// Computes all estimators on `study`; pass resampling options to include
    /// the resampling search (the sampled subgraph is built internally).
    pub fn compute(
        study: &TraceStudy,
        resampling_opts: Option<&ResamplingOptions>,
    ) -> Result<EstimateReport> {
        let stats = leave_one_out_stats(study)?;
        let resampling_report = match resampling_opts {
            Some(opts) => Some(resampling(study, &study.sampled_subgraph(), opts)?),
            None => None,
        };
        Ok(EstimateReport {
            observed_vertices: study.num_sampled_vertices(),
            observed_edges: study.num_sampled_edges(),
            leave_one_out: leave_one_out_from_stats(study, &stats),
            leave_one_out_approx: leave_one_out_approx(study),
            stats,
            resampling: resampling_report,
        })
    }
}
