//! Ground-truth graphs: construction, random generators, and edge-list I/O.
//!
//! All graphs in this crate are simple, undirected, and stored in compressed
//! adjacency form with dense `u32` vertex ids. Experiment inputs are also
//! connected: the random generators and the edge-list loader all reduce their
//! raw draw to its largest connected component and relabel the survivors to
//! `0..N`, so downstream code never has to reason about unreachable vertices.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vertex identifier. Valid ids are always `0..graph.num_vertices()`.
pub type VertexId = u32;

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

/// A simple undirected graph in compressed sparse row form.
///
/// Construction validates simplicity (no self-loops, no duplicate edges) but
/// not connectivity; the generator and loader entry points in this module are
/// the ones that guarantee connected output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    /// `offsets[v]..offsets[v + 1]` indexes `neighbors` for vertex `v`.
    offsets: Vec<usize>,
    /// Concatenated, per-vertex sorted adjacency lists.
    neighbors: Vec<VertexId>,
    num_edges: usize,
}

impl Graph {
    /// Builds a graph with `num_vertices` vertices from an undirected edge
    /// list. Rejects out-of-range endpoints, self-loops, and duplicates
    /// (in either orientation).
    pub fn from_edges(num_vertices: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        if num_vertices > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "vertex count {num_vertices} exceeds the u32 id space"
            )));
        }
        let n = num_vertices;
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(Error::VertexOutOfRange(u));
            }
            if v as usize >= n {
                return Err(Error::VertexOutOfRange(v));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }

        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut neighbors = vec![0 as VertexId; offsets[n]];
        let mut cursor = offsets.clone();
        for &(u, v) in edges {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            let list = &mut neighbors[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge incident to vertex {v}"
                )));
            }
        }

        Ok(Graph {
            offsets,
            neighbors,
            num_edges: edges.len(),
        })
    }

    /// Number of vertices `N`.
    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges `M`.
    #[inline]
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Sorted adjacency list of `v`.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// Iterates every undirected edge exactly once, as `(u, v)` with `u < v`,
    /// in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.num_vertices() as u32)
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// True when every vertex is reachable from vertex 0 (vacuously true for
    /// the empty graph of a single vertex).
    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = Vec::with_capacity(n);
        seen[0] = true;
        queue.push(0 as VertexId);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push(v);
                }
            }
        }
        queue.len() == n
    }

    /// Writes the graph as a plain edge list, one `u v` pair per line.
    pub fn write_edge_list(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    /// Saves the edge list to `path` (see [`Graph::write_edge_list`]).
    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_edge_list(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Giant component extraction
// ---------------------------------------------------------------------------

/// Result of [`giant_component`]: the relabeled component plus the mapping
/// back to the ids used in the input edge set.
#[derive(Debug, Clone)]
pub struct GiantComponent {
    pub graph: Graph,
    /// `original_ids[new_id]` is the input id of relabeled vertex `new_id`.
    /// Ascending, because relabeling preserves the original id order.
    pub original_ids: Vec<VertexId>,
}

/// Extracts the largest connected component of a raw edge set.
///
/// The input may contain duplicate edges (either orientation) and self-loops;
/// both are discarded first. Ties between equally large components go to the
/// component containing the smallest original vertex id. Survivors are
/// relabeled to contiguous ids `0..N` in increasing original-id order.
///
/// Fails with [`Error::EmptyEdgeSet`] when no edges remain after cleaning and
/// with [`Error::ComponentTooSmall`] when the winner has fewer than 2 vertices
/// (impossible once at least one proper edge exists, but kept explicit).
pub fn giant_component(edges: &[(VertexId, VertexId)]) -> Result<GiantComponent> {
    // Compact the (possibly sparse) id space.
    let mut ids: Vec<VertexId> = edges
        .iter()
        .filter(|&&(u, v)| u != v)
        .flat_map(|&(u, v)| [u, v])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::EmptyEdgeSet);
    }
    let rank = |id: VertexId| ids.binary_search(&id).expect("endpoint was indexed") as u32;

    let mut clean: Vec<(u32, u32)> = edges
        .iter()
        .filter(|&&(u, v)| u != v)
        .map(|&(u, v)| {
            let (a, b) = (rank(u), rank(v));
            (a.min(b), a.max(b))
        })
        .collect();
    clean.sort_unstable();
    clean.dedup();

    // Union-find over compact ids. Roots are resolved to the smallest member
    // id afterwards by scanning in ascending order.
    let k = ids.len();
    let mut parent: Vec<u32> = (0..k as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for &(u, v) in &clean {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            // Root at the smaller id so every root is its component's minimum.
            let (lo, hi) = (ru.min(rv), ru.max(rv));
            parent[hi as usize] = lo;
        }
    }

    let mut size = vec![0usize; k];
    for v in 0..k as u32 {
        size[find(&mut parent, v) as usize] += 1;
    }
    // Scanning roots in ascending id order with strict `>` keeps, among
    // equally large components, the one whose minimum original id is smallest.
    let mut best_root = 0u32;
    let mut best_size = 0usize;
    for v in 0..k as u32 {
        if parent[v as usize] == v && size[v as usize] > best_size {
            best_root = v;
            best_size = size[v as usize];
        }
    }
    if best_size < 2 {
        return Err(Error::ComponentTooSmall);
    }

    let mut new_id = vec![u32::MAX; k];
    let mut original_ids = Vec::with_capacity(best_size);
    for v in 0..k as u32 {
        if find(&mut parent, v) == best_root {
            new_id[v as usize] = original_ids.len() as u32;
            original_ids.push(ids[v as usize]);
        }
    }
    let component_edges: Vec<(u32, u32)> = clean
        .iter()
        .filter(|&&(u, _)| new_id[u as usize] != u32::MAX)
        .map(|&(u, v)| (new_id[u as usize], new_id[v as usize]))
        .collect();

    Ok(GiantComponent {
        graph: Graph::from_edges(best_size, &component_edges)?,
        original_ids,
    })
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

/// Samples G(n, p) with `p = avg_degree / (n − 1)` and returns the largest
/// connected component, relabeled to `0..N`. Equal seeds give bit-identical
/// graphs.
///
/// `avg_degree` must lie in `(0, n − 1]`; the upper end (`p = 1`) produces the
/// complete graph. Fails with [`Error::ComponentTooSmall`] when the draw has
/// no usable component, which at very small `p` is a real possibility the
/// caller must handle.
pub fn erdos_renyi(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "erdos_renyi needs n >= 2, got {n}"
        )));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "erdos_renyi: n = {n} exceeds the u32 id space"
        )));
    }
    if !(avg_degree > 0.0 && avg_degree <= (n - 1) as f64) {
        return Err(Error::InvalidParameter(format!(
            "erdos_renyi needs 0 < avg_degree <= n - 1, got {avg_degree}"
        )));
    }
    let p = avg_degree / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edges: Vec<(u32, u32)> = Vec::with_capacity((avg_degree * n as f64 / 2.0) as usize + 16);
    if p >= 1.0 {
        for v in 1..n as u32 {
            for w in 0..v {
                edges.push((w, v));
            }
        }
    } else {
        // Geometric skipping over the strict lower triangle: the gap between
        // successive present pairs is Geometric(p), so the cost is O(M), not
        // O(n^2).
        let ln_q = (-p).ln_1p();
        let mut v: u64 = 1;
        let mut w: i64 = -1;
        let max_skip = (n as f64) * (n as f64); // beyond the last pair
        while v < n as u64 {
            let r: f64 = rng.random();
            let skip = ((-r).ln_1p() / ln_q).min(max_skip) as i64;
            w += 1 + skip;
            while w >= v as i64 && v < n as u64 {
                w -= v as i64;
                v += 1;
            }
            if v < n as u64 {
                edges.push((w as u32, v as u32));
            }
        }
    }

    if edges.is_empty() {
        return Err(Error::ComponentTooSmall);
    }
    Ok(giant_component(&edges)?.graph)
}

/// Grows a preferential-attachment graph: a complete seed on `m + 1` vertices,
/// then each new vertex attaches to `m` distinct existing vertices chosen with
/// probability proportional to their current degree. Always connected, so no
/// component extraction is needed. Equal seeds give bit-identical graphs.
///
/// Requires `1 <= m < n`. The edge count is exactly
/// `(m + 1) m / 2 + (n − m − 1) m`.
pub fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "barabasi_albert needs 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "barabasi_albert: n = {n} exceeds the u32 id space"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edges: Vec<(u32, u32)> =
        Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // One entry per unit of degree; sampling an index uniformly is sampling a
    // vertex proportionally to its degree.
    let mut degree_urn: Vec<u32> = Vec::with_capacity(2 * edges.capacity());

    for v in 0..=(m as u32) {
        for u in 0..v {
            edges.push((u, v));
        }
        degree_urn.extend(std::iter::repeat_n(v, m));
    }

    let mut chosen: Vec<u32> = Vec::with_capacity(m);
    for v in (m + 1) as u32..n as u32 {
        chosen.clear();
        // Attachment targets are drawn against the degrees as they stood
        // before this vertex arrived; duplicates are rejected so the m
        // neighbors are distinct.
        while chosen.len() < m {
            let pick = degree_urn[rng.random_range(0..degree_urn.len())];
            if !chosen.contains(&pick) {
                chosen.push(pick);
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            degree_urn.push(t);
        }
        degree_urn.extend(std::iter::repeat_n(v, m));
    }

    Graph::from_edges(n, &edges)
}

// ---------------------------------------------------------------------------
// Edge-list files
// ---------------------------------------------------------------------------

/// A graph loaded from disk, along with what the raw file contained before
/// cleaning and component extraction.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// Distinct vertex ids appearing anywhere in the file.
    pub raw_vertex_count: usize,
    /// Edge entries parsed, counting duplicates and self-loops.
    pub raw_edge_count: usize,
}

/// Loads a whitespace-separated edge list: one `u v` pair of non-negative
/// integer ids per line, `#`-prefixed comment lines and blank lines ignored.
/// Duplicate edges and self-loops are dropped, the largest connected component
/// is kept (ties to the smallest original id), and vertices are relabeled to
/// `0..N` preserving original id order.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);

    // Ids in the file may be arbitrary u64s; rank-compress them to u32 before
    // component extraction. Ranking is monotone, so the smallest-original-id
    // tie rule and the final relabeling order are unaffected.
    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<u64> {
            let tok = tok.ok_or_else(|| Error::MalformedEdgeList {
                path: display.clone(),
                line: line_no,
                reason: "expected two vertex ids".into(),
            })?;
            tok.parse::<u64>().map_err(|_| Error::MalformedEdgeList {
                path: display.clone(),
                line: line_no,
                reason: format!("not a non-negative integer: {tok:?}"),
            })
        };
        let u = parse(tokens.next())?;
        let v = parse(tokens.next())?;
        if tokens.next().is_some() {
            return Err(Error::MalformedEdgeList {
                path: display,
                line: line_no,
                reason: "expected exactly two vertex ids".into(),
            });
        }
        raw_edges.push((u, v));
    }
    if raw_edges.is_empty() {
        return Err(Error::EmptyEdgeSet);
    }

    let mut ids: Vec<u64> = raw_edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let raw_vertex_count = ids.len();
    if raw_vertex_count > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "{display}: {raw_vertex_count} distinct ids exceed the u32 id space"
        )));
    }
    let rank = |id: u64| ids.binary_search(&id).expect("endpoint was indexed") as u32;
    let compact: Vec<(u32, u32)> = raw_edges.iter().map(|&(u, v)| (rank(u), rank(v))).collect();

    Ok(LoadedGraph {
        graph: giant_component(&compact)?.graph,
        raw_vertex_count,
        raw_edge_count: raw_edges.len(),
    })
}

// ---------------------------------------------------------------------------
// Declarative graph descriptions (config files, CLI, experiment harness)
// ---------------------------------------------------------------------------

/// Where an experiment's ground-truth graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", rename_all_fields = "kebab-case")]
pub enum GraphSpec {
    /// `erdos_renyi(n, avg_degree, seed)`.
    Er {
        n: usize,
        avg_degree: f64,
        #[serde(default)]
        seed: u64,
    },
    /// `barabasi_albert(n, m, seed)`.
    Ba {
        n: usize,
        m: usize,
        #[serde(default)]
        seed: u64,
    },
    /// `load_edge_list(path)`.
    EdgeList { path: PathBuf },
}

impl GraphSpec {
    /// Short label used in output rows: `er`, `ba`, or `edge-list`.
    pub fn topology_label(&self) -> &'static str {
        match self {
            GraphSpec::Er { .. } => "er",
            GraphSpec::Ba { .. } => "ba",
            GraphSpec::EdgeList { .. } => "edge-list",
        }
    }

    /// Builds the graph with the seed recorded in the description itself.
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Er { seed, .. } | GraphSpec::Ba { seed, .. } => self.build_seeded(*seed),
            GraphSpec::EdgeList { .. } => self.build_seeded(0),
        }
    }

    /// Builds the graph under an externally derived seed. File-backed
    /// sources have no randomness, so the seed is ignored for them.
    pub fn build_seeded(&self, seed: u64) -> Result<Graph> {
        match self {
            GraphSpec::Er { n, avg_degree, .. } => erdos_renyi(*n, *avg_degree, seed),
            GraphSpec::Ba { n, m, .. } => barabasi_albert(*n, *m, seed),
            GraphSpec::EdgeList { path } => Ok(load_edge_list(path)?.graph),
        }
    }
}
