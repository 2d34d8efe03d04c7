//! Fixed per-monitor routes and traceroute-style sampling studies.
//!
//! The sampling model: each monitor ("source") owns one shortest-path tree of
//! the ground-truth graph, built once with random tie-breaking — so routes are
//! stable per source and independent of which target is probed, like real
//! route tables. A study samples disjoint source and target sets, traces every
//! source→target path through the fixed trees, and merges the results into a
//! sampled subgraph `(V*, E*)` plus a per-vertex *cover* map recording which
//! target indices each vertex was seen on route to. Cover is what the
//! leave-one-target-out estimator consumes.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::seed::{derive, stream};

// ---------------------------------------------------------------------------
// Route tables
// ---------------------------------------------------------------------------

/// One monitor's fixed routes: a shortest-path tree rooted at `source`.
///
/// For every vertex `v` the parent is drawn uniformly at random among the
/// neighbors one step closer to the source, and the draw happens exactly once
/// — every later [`RouteTable::trace`] replays the same choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteTable {
    source: VertexId,
    /// `parent[v]` is the next hop from `v` toward the source;
    /// `parent[source] == source`.
    parent: Vec<VertexId>,
    /// Hop distance from the source.
    dist: Vec<u32>,
}

impl RouteTable {
    /// Builds the table by breadth-first search from `source`, then resolves
    /// each vertex's parent with the RNG seeded by `seed`. Fails when `source`
    /// is out of range or the graph is not connected.
    pub fn build(g: &Graph, source: VertexId, seed: u64) -> Result<Self> {
        let n = g.num_vertices();
        if source as usize >= n {
            return Err(Error::VertexOutOfRange(source));
        }

        let mut dist = vec![u32::MAX; n];
        let mut queue: Vec<VertexId> = Vec::with_capacity(n);
        dist[source as usize] = 0;
        queue.push(source);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            let du = dist[u as usize];
            for &v in g.neighbors(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    queue.push(v);
                }
            }
        }
        if queue.len() != n {
            return Err(Error::Disconnected);
        }

        // Parent resolution in fixed vertex order keeps the RNG consumption
        // sequence — and therefore the whole table — a pure function of seed.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut parent = vec![u32::MAX; n];
        parent[source as usize] = source;
        let mut eligible: Vec<VertexId> = Vec::new();
        for v in 0..n as u32 {
            if v == source {
                continue;
            }
            let dv = dist[v as usize];
            eligible.clear();
            eligible.extend(
                g.neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&u| dist[u as usize] + 1 == dv),
            );
            debug_assert!(!eligible.is_empty(), "BFS left vertex {v} without a parent");
            parent[v as usize] = if eligible.len() == 1 {
                eligible[0]
            } else {
                eligible[rng.random_range(0..eligible.len())]
            };
        }

        Ok(RouteTable { source, parent, dist })
    }

    #[inline]
    pub fn source(&self) -> VertexId {
        self.source
    }

    /// Hop distance from the source to `v`.
    #[inline]
    pub fn distance(&self, v: VertexId) -> u32 {
        self.dist[v as usize]
    }

    /// Next hop from `v` toward the source.
    #[inline]
    pub fn parent(&self, v: VertexId) -> VertexId {
        self.parent[v as usize]
    }

    /// The fixed source→target path, inclusive of both endpoints. Tracing the
    /// source itself yields the single-vertex path.
    pub fn trace(&self, target: VertexId) -> Result<Vec<VertexId>> {
        if target as usize >= self.parent.len() {
            return Err(Error::VertexOutOfRange(target));
        }
        let mut path = Vec::with_capacity(self.dist[target as usize] as usize + 1);
        let mut v = target;
        loop {
            path.push(v);
            if v == self.source {
                break;
            }
            v = self.parent[v as usize];
        }
        path.reverse();
        Ok(path)
    }
}

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

/// Knobs for study assembly beyond the baseline experiment.
#[derive(Debug, Clone, Copy, Default)]
pub struct StudyOptions {
    /// Retain every traced path verbatim (needed for trace dumps and for
    /// auditing cover against raw paths). Costs memory proportional to the
    /// sum of path lengths.
    pub keep_paths: bool,
    /// Additionally merge source→source paths into `V*`/`E*`. Off by default;
    /// such paths carry no target index, so they never contribute to cover
    /// and the leave-one-out statistics keep their meaning.
    pub include_source_paths: bool,
}

/// The merged outcome of tracing every source→target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStudy {
    sources: Vec<VertexId>,
    targets: Vec<VertexId>,
    /// `V*`, ascending.
    sampled_vertices: Vec<VertexId>,
    /// `E*` as `(u, v)` with `u < v`, lexicographically ascending.
    sampled_edges: Vec<(VertexId, VertexId)>,
    /// Vertex → ascending target indices it was observed en route to.
    cover: HashMap<VertexId, Vec<u32>>,
    /// `paths[i][j]` = the traced source_i→target_j path, when retained.
    paths: Option<Vec<Vec<Vec<VertexId>>>>,
}

impl TraceStudy {
    #[inline]
    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    #[inline]
    pub fn targets(&self) -> &[VertexId] {
        &self.targets
    }

    /// `N*`: number of distinct vertices observed.
    #[inline]
    pub fn num_sampled_vertices(&self) -> usize {
        self.sampled_vertices.len()
    }

    /// `M*`: number of distinct edges observed.
    #[inline]
    pub fn num_sampled_edges(&self) -> usize {
        self.sampled_edges.len()
    }

    #[inline]
    pub fn sampled_vertices(&self) -> &[VertexId] {
        &self.sampled_vertices
    }

    #[inline]
    pub fn sampled_edges(&self) -> &[(VertexId, VertexId)] {
        &self.sampled_edges
    }

    /// Target indices `v` was observed en route to (ascending; empty for
    /// vertices only discovered by source→source paths).
    pub fn cover_of(&self, v: VertexId) -> &[u32] {
        self.cover.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The full vertex → target-index map.
    pub fn cover(&self) -> &HashMap<VertexId, Vec<u32>> {
        &self.cover
    }

    /// The retained source_i→target_j path, if the study kept paths.
    pub fn path(&self, source_index: usize, target_index: usize) -> Result<&[VertexId]> {
        self.paths
            .as_ref()
            .map(|p| p[source_index][target_index].as_slice())
            .ok_or(Error::PathsNotRetained)
    }

    /// Builds `G* = (V*, E*)` as a standalone graph, with `V*` relabeled to
    /// `0..N*` in ascending original-id order.
    pub fn sampled_subgraph(&self) -> Graph {
        let relabel = |v: VertexId| {
            self.sampled_vertices
                .binary_search(&v)
                .expect("edge endpoint missing from V*") as u32
        };
        let edges: Vec<(u32, u32)> = self
            .sampled_edges
            .iter()
            .map(|&(u, v)| (relabel(u), relabel(v)))
            .collect();
        Graph::from_edges(self.sampled_vertices.len(), &edges)
            .expect("V*/E* form a valid simple graph")
    }

    /// Writes the study as text: a `S ...` line, a `T ...` line, then one
    /// space-separated vertex sequence per traced path in source-major order.
    /// Requires the study to have been built with
    /// [`StudyOptions::keep_paths`].
    pub fn write_trace_dump(&self, w: &mut impl Write) -> Result<()> {
        let paths = self.paths.as_ref().ok_or(Error::PathsNotRetained)?;
        let join = |ids: &[VertexId]| {
            ids.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(w, "S {}", join(&self.sources))?;
        writeln!(w, "T {}", join(&self.targets))?;
        for per_source in paths {
            for path in per_source {
                writeln!(w, "{}", join(path))?;
            }
        }
        Ok(())
    }
}

/// Uniform sample of `k` distinct values from `0..n`, in draw order (a
/// uniformly random k-prefix of a permutation). Partial Fisher–Yates with a
/// sparse override map, so the cost is O(k) regardless of `n`.
pub(crate) fn sample_distinct<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<VertexId> {
    debug_assert!(k <= n);
    let mut override_at: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let j = rng.random_range(i..n);
        let vj = *override_at.get(&j).unwrap_or(&j);
        let vi = *override_at.get(&i).unwrap_or(&i);
        out.push(vj as VertexId);
        override_at.insert(j, vi);
    }
    out
}

/// Runs a study with uniformly sampled monitors and targets: `n_sources`
/// vertices drawn without replacement from `V`, then `n_targets` drawn from
/// the remainder. Requires `n_sources >= 1`, `n_targets >= 2`, and
/// `n_sources + n_targets <= N`. Equal seeds reproduce the study exactly.
pub fn run_study(g: &Graph, n_sources: usize, n_targets: usize, seed: u64) -> Result<TraceStudy> {
    run_study_opts(g, n_sources, n_targets, seed, StudyOptions::default())
}

/// [`run_study`] with explicit [`StudyOptions`].
pub fn run_study_opts(
    g: &Graph,
    n_sources: usize,
    n_targets: usize,
    seed: u64,
    opts: StudyOptions,
) -> Result<TraceStudy> {
    let n = g.num_vertices();
    if n_sources < 1 {
        return Err(Error::InvalidParameter("need at least one source".into()));
    }
    if n_targets < 2 {
        return Err(Error::InvalidParameter(
            "need at least two targets for a sampled study".into(),
        ));
    }
    if n_sources + n_targets > n {
        return Err(Error::InvalidParameter(format!(
            "{n_sources} sources + {n_targets} targets exceed the {n} vertices available"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, stream::SAMPLING, 0));
    let draws = sample_distinct(&mut rng, n, n_sources + n_targets);
    let sources = draws[..n_sources].to_vec();
    let targets = draws[n_sources..].to_vec();
    assemble(g, sources, targets, seed, opts)
}

/// Runs a study over caller-chosen monitor and target sets. The sets must be
/// duplicate-free, mutually disjoint, and in range; a single target is
/// allowed here (the sampling entry point insists on two or more).
pub fn run_study_with(
    g: &Graph,
    sources: &[VertexId],
    targets: &[VertexId],
    seed: u64,
) -> Result<TraceStudy> {
    run_study_with_opts(g, sources, targets, seed, StudyOptions::default())
}

/// [`run_study_with`] with explicit [`StudyOptions`].
pub fn run_study_with_opts(
    g: &Graph,
    sources: &[VertexId],
    targets: &[VertexId],
    seed: u64,
    opts: StudyOptions,
) -> Result<TraceStudy> {
    let n = g.num_vertices();
    if sources.is_empty() || targets.is_empty() {
        return Err(Error::InvalidParameter(
            "sources and targets must be nonempty".into(),
        ));
    }
    for &v in sources.iter().chain(targets) {
        if v as usize >= n {
            return Err(Error::VertexOutOfRange(v));
        }
    }
    let mut seen = vec![false; n];
    for &v in sources.iter().chain(targets) {
        if std::mem::replace(&mut seen[v as usize], true) {
            return Err(Error::InvalidSelection);
        }
    }
    assemble(g, sources.to_vec(), targets.to_vec(), seed, opts)
}

/// Shared assembly: build per-source route tables (concurrently — they are
/// independent), then merge traces in deterministic source-major order.
fn assemble(
    g: &Graph,
    sources: Vec<VertexId>,
    targets: Vec<VertexId>,
    seed: u64,
    opts: StudyOptions,
) -> Result<TraceStudy> {
    let tables: Vec<RouteTable> = sources
        .par_iter()
        .enumerate()
        .map(|(i, &s)| RouteTable::build(g, s, derive(seed, stream::ROUTES, i as u64)))
        .collect::<Result<_>>()?;

    let mut cover: HashMap<VertexId, Vec<u32>> = HashMap::new();
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    let mut extra_vertices: Vec<VertexId> = Vec::new();
    let mut paths: Option<Vec<Vec<Vec<VertexId>>>> = opts.keep_paths.then(Vec::new);

    let mut walk: Vec<VertexId> = Vec::new();
    for table in &tables {
        let mut per_source: Option<Vec<Vec<VertexId>>> = opts.keep_paths.then(Vec::new);
        for (j, &t) in targets.iter().enumerate() {
            // Walk target→source along fixed parents; record the edge at each
            // hop and tag every path vertex with this target's index.
            walk.clear();
            let mut v = t;
            loop {
                walk.push(v);
                if v == table.source() {
                    break;
                }
                let p = table.parent(v);
                edges.push((v.min(p), v.max(p)));
                v = p;
            }
            for &pv in &walk {
                let tags = cover.entry(pv).or_default();
                // Within one source, pushes for a vertex arrive in ascending
                // target order, so checking the tail is enough here; the
                // cross-source dedup happens in the finalize pass below.
                if tags.last() != Some(&(j as u32)) {
                    tags.push(j as u32);
                }
            }
            if let Some(per_source) = per_source.as_mut() {
                let mut forward = walk.clone();
                forward.reverse();
                per_source.push(forward);
            }
        }
        if let (Some(paths), Some(per_source)) = (paths.as_mut(), per_source) {
            paths.push(per_source);
        }
    }

    if opts.include_source_paths {
        for (i, table) in tables.iter().enumerate() {
            for (k, &other) in sources.iter().enumerate() {
                if k == i {
                    continue;
                }
                let mut v = other;
                while v != table.source() {
                    let p = table.parent(v);
                    edges.push((v.min(p), v.max(p)));
                    extra_vertices.push(v);
                    v = p;
                }
                extra_vertices.push(v);
            }
        }
    }

    edges.sort_unstable();
    edges.dedup();
    for tags in cover.values_mut() {
        tags.sort_unstable();
        tags.dedup();
    }
    let mut sampled_vertices: Vec<VertexId> = cover.keys().copied().chain(extra_vertices).collect();
    sampled_vertices.sort_unstable();
    sampled_vertices.dedup();

    Ok(TraceStudy {
        sources,
        targets,
        sampled_vertices,
        sampled_edges: edges,
        cover,
        paths,
    })
}

/// Counts the distinct vertices a fresh sampled study would observe, without
/// building any of the study bookkeeping. This is the inner loop of the
/// resampling estimator, so it walks each source tree with an early stop:
/// once a walk rejoins a prefix already taken in the *same* tree, the rest is
/// known to be marked.
pub(crate) fn discovery_count(
    g: &Graph,
    n_sources: usize,
    n_targets: usize,
    seed: u64,
) -> Result<usize> {
    let n = g.num_vertices();
    debug_assert!(n_sources >= 1 && n_sources + n_targets <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, stream::SAMPLING, 0));
    let draws = sample_distinct(&mut rng, n, n_sources + n_targets);

    let mut discovered = vec![false; n];
    let mut count = 0usize;
    // Per-tree visit stamps; stamp = source position + 1 so the buffer never
    // needs clearing between sources.
    let mut tree_stamp = vec![0u32; n];
    for i in 0..n_sources {
        let table = RouteTable::build(g, draws[i], derive(seed, stream::ROUTES, i as u64))?;
        let stamp = i as u32 + 1;
        for &t in &draws[n_sources..] {
            let mut v = t;
            loop {
                if tree_stamp[v as usize] == stamp {
                    break;
                }
                tree_stamp[v as usize] = stamp;
                if !discovered[v as usize] {
                    discovered[v as usize] = true;
                    count += 1;
                }
                if v == table.source() {
                    break;
                }
                v = table.parent(v);
            }
        }
    }
    Ok(count)
}
