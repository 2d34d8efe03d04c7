//! Experiment orchestration: declarative sweep configs, deterministic
//! multi-trial runs, CSV emission, per-setting summaries, and the scaling
//! self-check behind the resampling estimator.
//!
//! A sweep is a cartesian product of source counts and a target axis (either
//! fractions of the true size or absolute counts). Every setting builds its
//! own graph from a seed derived off the master seed and the setting index,
//! then reuses that graph across trials while each trial draws fresh sources
//! and targets. Trials run concurrently; every random choice flows from
//! `master_seed`, so a rerun of the same config reproduces the output stream
//! byte for byte (leave `timing` off for that — wall-clock measurements are
//! honest and therefore unstable).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimators::{self, ResamplingOptions};
use crate::graph::{Graph, GraphSpec};
use crate::routing::{self, run_study};
use crate::seed::{derive, stream};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// A scalar or a list — lets configs write `sources = 5` and
/// `sources = [1, 5, 25]` interchangeably.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Copy> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }
}

/// Which estimators a sweep computes. The observed count `N*` and the
/// exclusivity statistics are bookkeeping the schema always carries; this
/// only gates the estimators with real cost attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// The observed count itself; always reported, listed for completeness.
    Naive,
    LeaveOneOut,
    LeaveOneOutApprox,
    Resampling,
}

/// Tuning knobs for the resampling search, as they appear in config files.
/// Defaults mirror [`ResamplingOptions`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct ResamplingConfig {
    pub initial_batch: usize,
    pub max_batch: usize,
    pub refine_width: usize,
    pub tolerance: Option<f64>,
    pub max_iterations: usize,
}

impl Default for ResamplingConfig {
    fn default() -> Self {
        let o = ResamplingOptions::default();
        ResamplingConfig {
            initial_batch: o.initial_batch,
            max_batch: o.max_batch,
            refine_width: o.refine_width,
            tolerance: o.tolerance,
            max_iterations: o.max_iterations,
        }
    }
}

impl ResamplingConfig {
    fn to_options(&self, seed: u64) -> ResamplingOptions {
        ResamplingOptions {
            initial_batch: self.initial_batch,
            max_batch: self.max_batch,
            refine_width: self.refine_width,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            seed,
        }
    }
}

/// The probe axes of a sweep: how many sources, and either target fractions
/// of the true size or absolute target counts (exactly one of the two).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ProbePlan {
    pub sources: OneOrMany<usize>,
    #[serde(default)]
    pub target_fractions: Option<OneOrMany<f64>>,
    #[serde(default)]
    pub target_counts: Option<OneOrMany<usize>>,
}

/// A full experiment description, loadable from a TOML file.
///
/// ```toml
/// trials = 20
/// master-seed = 42
///
/// [graph]
/// kind = "er"
/// n = 10000
/// avg-degree = 6.0
///
/// [probes]
/// sources = [1, 5]
/// target-fractions = [0.02, 0.05, 0.1]
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub probes: ProbePlan,
    pub trials: usize,
    pub master_seed: u64,
    /// Estimators to run; omitted means all of them.
    #[serde(default)]
    pub estimators: Option<Vec<EstimatorKind>>,
    #[serde(default)]
    pub resampling: ResamplingConfig,
    /// Where the CLI writes the CSV; the library itself never writes it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Record wall-clock milliseconds per trial. Leave off (the default)
    /// when byte-identical reruns matter.
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy)]
enum TargetAxis {
    Fraction(f64),
    Count(usize),
}

#[derive(Debug, Clone, Copy)]
struct Setting {
    n_sources: usize,
    axis: TargetAxis,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    fn wants(&self, kind: EstimatorKind) -> bool {
        self.estimators.as_ref().is_none_or(|set| set.contains(&kind))
    }

    /// Structural checks with field-named messages; graph parameters are
    /// validated by the builders themselves.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        let sources = self.probes.sources.to_vec();
        if sources.is_empty() {
            return fail("probes.sources must list at least one source count".into());
        }
        if let Some(&bad) = sources.iter().find(|&&s| s < 1) {
            return fail(format!("probes.sources entries must be >= 1, got {bad}"));
        }
        match (&self.probes.target_fractions, &self.probes.target_counts) {
            (Some(_), Some(_)) => {
                return fail(
                    "give exactly one of probes.target-fractions and probes.target-counts, not both"
                        .into(),
                )
            }
            (None, None) => {
                return fail(
                    "give exactly one of probes.target-fractions and probes.target-counts".into(),
                )
            }
            (Some(fr), None) => {
                let fr = fr.to_vec();
                if fr.is_empty() {
                    return fail("probes.target-fractions must be nonempty".into());
                }
                if let Some(&bad) = fr.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
                    return fail(format!(
                        "probes.target-fractions entries must lie in (0, 1), got {bad}"
                    ));
                }
            }
            (None, Some(ct)) => {
                let ct = ct.to_vec();
                if ct.is_empty() {
                    return fail("probes.target-counts must be nonempty".into());
                }
                if let Some(&bad) = ct.iter().find(|&&c| c < 2) {
                    return fail(format!("probes.target-counts entries must be >= 2, got {bad}"));
                }
            }
        }
        let rs = &self.resampling;
        if rs.initial_batch < 1 || rs.max_batch < rs.initial_batch {
            return fail("resampling batches must satisfy 1 <= initial-batch <= max-batch".into());
        }
        if rs.max_iterations < 1 {
            return fail("resampling.max-iterations must be at least 1".into());
        }
        Ok(())
    }

    /// Settings in row order: source counts outer, target axis inner.
    fn settings(&self) -> Vec<Setting> {
        let sources = self.probes.sources.to_vec();
        let axes: Vec<TargetAxis> = match (&self.probes.target_fractions, &self.probes.target_counts)
        {
            (Some(fr), _) => fr.to_vec().into_iter().map(TargetAxis::Fraction).collect(),
            (_, Some(ct)) => ct.to_vec().into_iter().map(TargetAxis::Count).collect(),
            (None, None) => vec![],
        };
        sources
            .into_iter()
            .flat_map(|n_sources| axes.iter().map(move |&axis| Setting { n_sources, axis }))
            .collect()
    }
}

/// Resolves a setting against a concrete graph: the target count, and the
/// fraction echoed into the `qT` column (only for fraction-axis settings).
fn resolve_targets(setting: Setting, n: usize) -> Result<(usize, Option<f64>)> {
    let (n_targets, fraction) = match setting.axis {
        TargetAxis::Fraction(q) => ((q * n as f64).round() as usize, Some(q)),
        TargetAxis::Count(c) => (c, None),
    };
    if n_targets < 2 {
        return Err(Error::Config(format!(
            "target fraction resolves to {n_targets} targets on a {n}-vertex graph; need at least 2"
        )));
    }
    if setting.n_sources + n_targets > n {
        return Err(Error::Config(format!(
            "{} sources + {n_targets} targets exceed the {n} vertices available",
            setting.n_sources
        )));
    }
    Ok((n_targets, fraction))
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One (setting, trial) outcome. Estimator cells are `None` when the config
/// did not request them; a requested estimator that failed on this trial
/// records `NaN` in its estimate cell (and the sweep carries on).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub topology: String,
    /// True vertex count of this setting's graph.
    pub n: usize,
    pub n_sources: usize,
    pub n_targets: usize,
    /// The configured fraction, when the sweep axis was fractions.
    pub target_fraction: Option<f64>,
    pub trial: usize,
    /// Seed the trial's study ran under, for standalone reproduction.
    pub seed: u64,
    pub observed_vertices: usize,
    pub observed_edges: usize,
    pub exclusive_targets: usize,
    pub mean_reduced_size: f64,
    pub leave_one_out: Option<f64>,
    pub leave_one_out_approx: Option<f64>,
    pub resampling: Option<f64>,
    pub resampled_targets: Option<usize>,
    pub iterations: Option<usize>,
    pub millis: Option<u128>,
}

#[derive(Clone, Copy)]
struct TrialJob {
    setting_index: usize,
    n_sources: usize,
    n_targets: usize,
    fraction: Option<f64>,
    trial: usize,
    seed: u64,
}

/// Runs the full sweep described by `config` and returns its rows in
/// deterministic (setting, trial) order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    config.validate()?;

    let mut graphs: Vec<Graph> = Vec::new();
    let mut jobs: Vec<TrialJob> = Vec::new();
    for (si, setting) in config.settings().into_iter().enumerate() {
        let graph_seed = derive(config.master_seed, stream::GRAPH, si as u64);
        let g = config.graph.build_seeded(graph_seed)?;
        let (n_targets, fraction) = resolve_targets(setting, g.num_vertices())?;
        graphs.push(g);
        let trial_base = derive(config.master_seed, stream::TRIAL, si as u64);
        for trial in 0..config.trials {
            jobs.push(TrialJob {
                setting_index: si,
                n_sources: setting.n_sources,
                n_targets,
                fraction,
                trial,
                seed: derive(trial_base, stream::TRIAL, trial as u64),
            });
        }
    }

    let wants_l1o = config.wants(EstimatorKind::LeaveOneOut);
    let wants_approx = config.wants(EstimatorKind::LeaveOneOutApprox);
    let wants_rs = config.wants(EstimatorKind::Resampling);

    jobs.par_iter()
        .map(|job| -> Result<TrialRow> {
            let g = &graphs[job.setting_index];
            let started = config.timing.then(Instant::now);
            let study = run_study(g, job.n_sources, job.n_targets, job.seed)?;
            // Validation pinned n_targets >= 2, so the statistics exist.
            let stats = estimators::leave_one_out_stats(&study)?;

            let leave_one_out = wants_l1o
                .then(|| estimators::leave_one_out(&study).unwrap_or(f64::NAN));
            let leave_one_out_approx =
                wants_approx.then(|| estimators::leave_one_out_approx(&study));
            let (resampling, resampled_targets, iterations) = if wants_rs {
                let opts = config.resampling.to_options(job.seed);
                match estimators::resampling(&study, &study.sampled_subgraph(), &opts) {
                    Ok(report) => (
                        Some(report.estimate),
                        Some(report.resampled_targets),
                        Some(report.iterations),
                    ),
                    // The failed-estimator marker; the trial's other columns
                    // stay useful.
                    Err(_) => (Some(f64::NAN), None, None),
                }
            } else {
                (None, None, None)
            };

            Ok(TrialRow {
                topology: config.graph.topology_label().to_string(),
                n: g.num_vertices(),
                n_sources: job.n_sources,
                n_targets: job.n_targets,
                target_fraction: job.fraction,
                trial: job.trial,
                seed: job.seed,
                observed_vertices: study.num_sampled_vertices(),
                observed_edges: study.num_sampled_edges(),
                exclusive_targets: stats.num_exclusive_targets,
                mean_reduced_size: stats.mean_reduced_size,
                leave_one_out,
                leave_one_out_approx,
                resampling,
                resampled_targets,
                iterations,
                millis: started.map(|s| s.elapsed().as_millis()),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// The pinned column set; never reordered.
pub const CSV_HEADER: &str =
    "topology,N,nS,nT,qT,trial,seed,Nstar,Mstar,X,NbarMinus,L1O,L1Oapprox,RS,nTstar,iters,ms";

fn push_cell<T: std::fmt::Display>(line: &mut String, value: Option<T>) {
    line.push(',');
    if let Some(v) = value {
        let _ = write!(line, "{v}");
    }
}

impl TrialRow {
    fn csv_line(&self) -> String {
        let mut line = format!(
            "{},{},{},{}",
            self.topology, self.n, self.n_sources, self.n_targets
        );
        push_cell(&mut line, self.target_fraction);
        let _ = write!(
            line,
            ",{},{},{},{},{},{}",
            self.trial,
            self.seed,
            self.observed_vertices,
            self.observed_edges,
            self.exclusive_targets,
            self.mean_reduced_size
        );
        push_cell(&mut line, self.leave_one_out);
        push_cell(&mut line, self.leave_one_out_approx);
        push_cell(&mut line, self.resampling);
        push_cell(&mut line, self.resampled_targets);
        push_cell(&mut line, self.iterations);
        push_cell(&mut line, self.millis);
        line
    }
}

/// Renders rows as a CSV document (header included, trailing newline).
pub fn csv_string(rows: &[TrialRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Writes [`csv_string`] to a file.
pub fn save_csv(rows: &[TrialRow], path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, csv_string(rows))?)
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

/// Per-setting mean and sample standard deviation of each estimate, as a
/// ratio to the true size.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub topology: String,
    pub n: usize,
    pub n_sources: usize,
    pub n_targets: usize,
    /// Trials aggregated; 1 flags that the deviations are degenerate zeros.
    pub trials: usize,
    /// `(mean, sd)` of `N*/N`.
    pub observed: (f64, f64),
    pub leave_one_out: Option<(f64, f64)>,
    pub leave_one_out_approx: Option<(f64, f64)>,
    pub resampling: Option<(f64, f64)>,
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for a single
/// value).
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups rows by (topology, N, n_sources, n_targets) in first-appearance
/// order and aggregates each estimator's ratio to the true size. Trials whose
/// estimator failed (NaN cells) are excluded from that estimator's
/// statistics.
pub fn summarize(rows: &[TrialRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("summarize needs at least one row".into()));
    }
    let mut order: Vec<(String, usize, usize, usize)> = Vec::new();
    let mut buckets: Vec<Vec<&TrialRow>> = Vec::new();
    for row in rows {
        let key = (row.topology.clone(), row.n, row.n_sources, row.n_targets);
        match order.iter().position(|k| *k == key) {
            Some(i) => buckets[i].push(row),
            None => {
                order.push(key);
                buckets.push(vec![row]);
            }
        }
    }

    let ratio_stats = |values: Vec<f64>| -> Option<(f64, f64)> {
        let finite: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
        (!finite.is_empty()).then(|| mean_sd(&finite))
    };

    Ok(order
        .into_iter()
        .zip(buckets)
        .map(|((topology, n, n_sources, n_targets), bucket)| {
            let scale = n as f64;
            let observed: Vec<f64> = bucket
                .iter()
                .map(|r| r.observed_vertices as f64 / scale)
                .collect();
            let pick = |f: fn(&TrialRow) -> Option<f64>| {
                ratio_stats(bucket.iter().filter_map(|r| f(r).map(|v| v / scale)).collect())
            };
            SummaryRow {
                topology,
                n,
                n_sources,
                n_targets,
                trials: bucket.len(),
                observed: mean_sd(&observed),
                leave_one_out: pick(|r| r.leave_one_out),
                leave_one_out_approx: pick(|r| r.leave_one_out_approx),
                resampling: pick(|r| r.resampling),
            }
        })
        .collect())
}

/// Renders summary rows as a gnuplot-friendly whitespace table.
pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "# topology N nS nT trials Nstar/N sd L1O/N sd L1Oapprox/N sd RS/N sd\n",
    );
    for r in rows {
        let _ = write!(
            out,
            "{} {} {} {} {} {} {}",
            r.topology, r.n, r.n_sources, r.n_targets, r.trials, r.observed.0, r.observed.1
        );
        for cell in [r.leave_one_out, r.leave_one_out_approx, r.resampling] {
            match cell {
                Some((mean, sd)) => {
                    let _ = write!(out, " {mean} {sd}");
                }
                None => out.push_str(" - -"),
            }
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Scaling validation
// ---------------------------------------------------------------------------

/// One setting of the scaling self-check: how closely the within-sample
/// discovery ratio tracks the true discovery ratio at a matched probe
/// fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    /// Effective target fraction (configured, or `n_targets / N`).
    pub target_fraction: f64,
    pub n_sources: usize,
    pub n_targets: usize,
    /// Mean `N*/N` across trials.
    pub observed_ratio: f64,
    /// Mean `N̄**/N*` across trials, resampling each trial's sample at the
    /// matched fraction.
    pub resampled_ratio: f64,
    /// `|observed − resampled| / observed`.
    pub relative_difference: f64,
}

/// Runs the resampling scaling check over the same settings, graphs, and
/// trial seeds as [`run_sweep`] would use. For each trial the sampled
/// subgraph is probed with the original source count and a target count
/// scaled down by the matched fraction, using `resampling.max-batch`
/// resamples per trial.
pub fn validate_scaling(config: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    config.validate()?;
    let batch = config.resampling.max_batch;

    let mut out = Vec::new();
    for (si, setting) in config.settings().into_iter().enumerate() {
        let graph_seed = derive(config.master_seed, stream::GRAPH, si as u64);
        let g = config.graph.build_seeded(graph_seed)?;
        let n = g.num_vertices();
        let (n_targets, fraction) = resolve_targets(setting, n)?;
        let q = fraction.unwrap_or(n_targets as f64 / n as f64);
        let trial_base = derive(config.master_seed, stream::TRIAL, si as u64);

        let ratios: Vec<(f64, f64)> = (0..config.trials)
            .into_par_iter()
            .map(|trial| -> Result<(f64, f64)> {
                let seed = derive(trial_base, stream::TRIAL, trial as u64);
                let study = run_study(&g, setting.n_sources, n_targets, seed)?;
                let n_star = study.num_sampled_vertices();
                let g_star = study.sampled_subgraph();

                let cap = n_targets.min(n_star - setting.n_sources);
                let inner_targets = ((q * n_star as f64).round() as usize).clamp(1, cap);
                let mut total: u64 = 0;
                for k in 0..batch {
                    let rs_seed = derive(seed, stream::RESAMPLE, k as u64);
                    total += routing::discovery_count(
                        &g_star,
                        setting.n_sources,
                        inner_targets,
                        rs_seed,
                    )? as u64;
                }
                let resampled = total as f64 / batch as f64 / n_star as f64;
                Ok((n_star as f64 / n as f64, resampled))
            })
            .collect::<Result<_>>()?;

        let observed_ratio = ratios.iter().map(|r| r.0).sum::<f64>() / ratios.len() as f64;
        let resampled_ratio = ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64;
        out.push(ScalingRow {
            target_fraction: q,
            n_sources: setting.n_sources,
            n_targets,
            observed_ratio,
            resampled_ratio,
            relative_difference: (observed_ratio - resampled_ratio).abs() / observed_ratio,
        });
    }
    Ok(out)
}

/// Renders scaling rows as a gnuplot-friendly whitespace table.
pub fn format_scaling(rows: &[ScalingRow]) -> String {
    let mut out = String::from("# qT nS nT Nstar/N resampled reldiff\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            r.target_fraction,
            r.n_sources,
            r.n_targets,
            r.observed_ratio,
            r.resampled_ratio,
            r.relative_difference
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn er_config(text_extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"
trials = 3
master-seed = 7
{text_extra}

[graph]
kind = "er"
n = 80
avg-degree = 4.0

[probes]
sources = 2
target-counts = [6, 10]
"#
        );
        ExperimentConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn parses_full_config_with_defaults() {
        let cfg = er_config("");
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.master_seed, 7);
        assert!(cfg.estimators.is_none());
        assert!(cfg.wants(EstimatorKind::Resampling));
        assert_eq!(cfg.resampling.initial_batch, 10);
        assert_eq!(cfg.resampling.max_batch, 80);
        assert!(!cfg.timing);
        assert!(cfg.output.is_none());
        assert_eq!(cfg.settings().len(), 2);
        cfg.validate().unwrap();

        let full = ExperimentConfig::from_toml_str(
            r#"
trials = 2
master-seed = 1
estimators = ["leave-one-out", "naive"]
output = "rows.csv"
timing = true

[graph]
kind = "ba"
n = 500
m = 3

[probes]
sources = [1, 5]
target-fractions = [0.05, 0.1]

[resampling]
initial-batch = 4
max-batch = 16
tolerance = 0.01
"#,
        )
        .unwrap();
        assert!(full.wants(EstimatorKind::LeaveOneOut));
        assert!(!full.wants(EstimatorKind::Resampling));
        assert!(full.timing);
        assert_eq!(full.resampling.tolerance, Some(0.01));
        assert_eq!(full.settings().len(), 4);
        full.validate().unwrap();
    }

    #[test]
    fn rejects_malformed_configs() {
        let expect_config_err = |text: &str, needle: &str| {
            let err = ExperimentConfig::from_toml_str(text)
                .and_then(|cfg| cfg.validate())
                .unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains(needle), "wanted {needle:?} in {msg:?}");
        };

        let base = |trials: &str, probes: &str| {
            format!(
                "trials = {trials}\nmaster-seed = 1\n\n[graph]\nkind = \"er\"\nn = 50\navg-degree = 4.0\n\n[probes]\n{probes}\n"
            )
        };

        expect_config_err(&base("0", "sources = 2\ntarget-counts = [5]"), "trials");
        expect_config_err(&base("2", "sources = 0\ntarget-counts = [5]"), "sources");
        expect_config_err(&base("2", "sources = 2"), "exactly one");
        expect_config_err(
            &base("2", "sources = 2\ntarget-counts = [5]\ntarget-fractions = [0.1]"),
            "exactly one",
        );
        expect_config_err(&base("2", "sources = 2\ntarget-fractions = [1.2]"), "target-fractions");
        expect_config_err(&base("2", "sources = 2\ntarget-fractions = [0.0]"), "target-fractions");
        expect_config_err(&base("2", "sources = 2\ntarget-counts = [1]"), "target-counts");
        expect_config_err(&base("2", "sources = 2\ntarget-counts = []"), "target-counts");
        // Unknown keys are caught at parse time.
        expect_config_err(&base("2", "sources = 2\ntarget-counts = [5]\nbogus = 1"), "bogus");
    }

    #[test]
    fn sweep_produces_ordered_rows_on_one_graph_per_setting() {
        let cfg = er_config("");
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 3);

        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.n_targets, if i < 3 { 6 } else { 10 });
            assert_eq!(row.trial, i % 3);
            assert_eq!(row.topology, "er");
            assert!(row.observed_vertices >= row.n_sources + row.n_targets);
            assert!(row.observed_vertices <= row.n);
            assert!(row.target_fraction.is_none());
            assert!(row.millis.is_none());
            let floor = row.observed_vertices as f64;
            assert!(row.leave_one_out.unwrap() >= floor);
            assert!(row.leave_one_out_approx.unwrap() >= floor);
            assert!(row.resampling.unwrap() >= floor);
        }
        // One graph per setting: every trial of a setting sees the same N.
        assert!(rows[..3].windows(2).all(|w| w[0].n == w[1].n));
        // Fresh probes per trial: the derived seeds are distinct.
        let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 6);
    }

    #[test]
    fn sweep_reruns_byte_identically() {
        let cfg = er_config("");
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(csv_string(&a), csv_string(&b));
    }

    #[test]
    fn estimator_subset_blanks_unrequested_columns() {
        let cfg = er_config("estimators = [\"leave-one-out\"]");
        let rows = run_sweep(&cfg).unwrap();
        for row in &rows {
            assert!(row.leave_one_out.is_some());
            assert!(row.leave_one_out_approx.is_none());
            assert!(row.resampling.is_none());
            assert!(row.resampled_targets.is_none());
            assert!(row.iterations.is_none());
        }
    }

    #[test]
    fn discovery_grows_with_the_target_fraction() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
trials = 8
master-seed = 3

[graph]
kind = "er"
n = 500
avg-degree = 6.0

[probes]
sources = 3
target-fractions = [0.02, 0.1, 0.25]
"#,
        )
        .unwrap();
        let rows = run_sweep(&cfg).unwrap();
        let summaries = summarize(&rows).unwrap();
        assert_eq!(summaries.len(), 3);
        let means: Vec<f64> = summaries.iter().map(|s| s.observed.0).collect();
        assert!(
            means.windows(2).all(|w| w[0] <= w[1]),
            "discovery should grow with target fraction: {means:?}"
        );
    }

    #[test]
    fn csv_rendering_is_pinned() {
        assert_eq!(
            CSV_HEADER,
            "topology,N,nS,nT,qT,trial,seed,Nstar,Mstar,X,NbarMinus,L1O,L1Oapprox,RS,nTstar,iters,ms"
        );
        let row = TrialRow {
            topology: "er".into(),
            n: 1000,
            n_sources: 5,
            n_targets: 100,
            target_fraction: Some(0.1),
            trial: 2,
            seed: 12345,
            observed_vertices: 420,
            observed_edges: 500,
            exclusive_targets: 17,
            mean_reduced_size: 415.5,
            leave_one_out: Some(900.25),
            leave_one_out_approx: Some(910.0),
            resampling: Some(f64::NAN),
            resampled_targets: None,
            iterations: None,
            millis: None,
        };
        let text = csv_string(&[row]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "er,1000,5,100,0.1,2,12345,420,500,17,415.5,900.25,910,NaN,,,"
        );
        assert_eq!(lines.next(), None);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn summaries_report_grouped_means_and_deviations() {
        let template = TrialRow {
            topology: "er".into(),
            n: 100,
            n_sources: 2,
            n_targets: 10,
            target_fraction: None,
            trial: 0,
            seed: 0,
            observed_vertices: 50,
            observed_edges: 60,
            exclusive_targets: 1,
            mean_reduced_size: 49.0,
            leave_one_out: Some(50.0),
            leave_one_out_approx: None,
            resampling: None,
            resampled_targets: None,
            iterations: None,
            millis: None,
        };
        let rows = vec![
            template.clone(),
            TrialRow { trial: 1, leave_one_out: Some(150.0), ..template.clone() },
            // Different source count: its own group, single trial.
            TrialRow { n_sources: 5, leave_one_out: Some(80.0), ..template.clone() },
        ];
        let summary = summarize(&rows).unwrap();
        assert_eq!(summary.len(), 2);

        let (mean, sd) = summary[0].leave_one_out.unwrap();
        assert_eq!(summary[0].trials, 2);
        assert!((mean - 1.0).abs() < 1e-12);
        assert!((sd - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(summary[0].leave_one_out_approx.is_none());

        assert_eq!(summary[1].trials, 1);
        assert_eq!(summary[1].leave_one_out.unwrap(), (0.8, 0.0));

        assert!(summarize(&[]).is_err());

        let table = format_summary(&summary);
        assert!(table.starts_with("# topology"));
        assert!(table.lines().count() == 3);
        assert!(table.contains(" - -"));
    }

    #[test]
    fn failed_resampling_marks_the_row_and_the_sweep_continues() {
        // max-iterations = 1 forces the search to give up on any setting that
        // actually needs to bisect; the rows must still be present.
        let cfg = ExperimentConfig::from_toml_str(
            r#"
trials = 2
master-seed = 11

[graph]
kind = "er"
n = 300
avg-degree = 5.0

[probes]
sources = 2
target-counts = [40]

[resampling]
max-iterations = 1
"#,
        )
        .unwrap();
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            // Either it converged within one bisection step or it was marked.
            let rs = row.resampling.unwrap();
            assert!(rs.is_nan() || rs >= row.observed_vertices as f64);
            if rs.is_nan() {
                assert!(row.resampled_targets.is_none());
                assert!(row.iterations.is_none());
                assert!(row.leave_one_out.unwrap().is_finite());
            }
        }
        // NaN cells are dropped from summaries rather than poisoning them.
        let summary = summarize(&rows).unwrap();
        if let Some((mean, _)) = summary[0].resampling {
            assert!(mean.is_finite());
        }
    }

    #[test]
    fn scaling_check_is_exact_on_the_saturated_complete_graph() {
        // K12 probed by 2 + 10 vertices: the sample is the whole graph and
        // the matched resample redraws every vertex, so both ratios are 1.
        let cfg = ExperimentConfig::from_toml_str(
            r#"
trials = 2
master-seed = 5

[graph]
kind = "er"
n = 12
avg-degree = 11.0

[probes]
sources = 2
target-counts = [10]
"#,
        )
        .unwrap();
        let rows = validate_scaling(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].observed_ratio, 1.0);
        assert_eq!(rows[0].resampled_ratio, 1.0);
        assert_eq!(rows[0].relative_difference, 0.0);
        assert!((rows[0].target_fraction - 10.0 / 12.0).abs() < 1e-12);

        assert_eq!(validate_scaling(&cfg).unwrap(), rows);
        let table = format_scaling(&rows);
        assert!(table.starts_with("# qT"));
        assert_eq!(table.lines().count(), 2);
    }

    #[test]
    fn scaling_check_tracks_discovery_on_sparse_graphs() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
trials = 5
master-seed = 19

[graph]
kind = "er"
n = 1500
avg-degree = 6.0

[probes]
sources = 5
target-fractions = [0.05, 0.2]
"#,
        )
        .unwrap();
        let rows = validate_scaling(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.observed_ratio > 0.0 && row.observed_ratio <= 1.0);
            assert!(row.resampled_ratio > 0.0 && row.resampled_ratio <= 1.0);
            assert!(
                row.relative_difference <= 0.25,
                "scaling mismatch at q = {}: {row:?}",
                row.target_fraction
            );
        }
    }
}
