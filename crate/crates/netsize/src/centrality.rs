//! Betweenness centrality and the exact size identity it satisfies.
//!
//! Betweenness here counts **ordered** vertex pairs: for vertices `h ≠ j` and
//! `i ∉ {h, j}`, vertex `i` earns the fraction of shortest `h→j` paths that
//! pass through it, and `(h, j)` and `(j, h)` both contribute. Under this
//! convention, on a connected graph the betweenness total is tied to the mean
//! shortest-path distance `ℓ` by
//!
//! ```text
//! Σ_i b_i = N (N − 1) (ℓ − 1)
//! ```
//!
//! because both sides count the interior vertices of all shortest paths. So
//! when the full graph is observable, `N = 1 + mean(b) / (ℓ − 1)` — the
//! motivating exact baseline that sampling-based estimators approximate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Betweenness and distance statistics computed in one sweep.
#[derive(Debug, Clone)]
pub struct CentralityProfile {
    /// Per-vertex betweenness under the ordered-pair convention.
    pub betweenness: Vec<f64>,
    /// Mean shortest-path distance over ordered pairs of distinct vertices.
    pub avg_path_length: f64,
    /// `Σ_i betweenness[i]`.
    pub sum_betweenness: f64,
    /// Exact sum of shortest-path distances over ordered pairs.
    pub total_distance: u64,
}

/// Both sides of the size identity, evaluated on a concrete graph.
#[derive(Debug, Clone)]
pub struct SizeIdentity {
    pub num_vertices: usize,
    pub avg_path_length: f64,
    /// Left side: `Σ_i b_i`.
    pub sum_betweenness: f64,
    /// Right side: `N (N − 1) (ℓ − 1)`.
    pub identity_rhs: f64,
    /// `1 + mean(b) / (ℓ − 1)`; `None` when `ℓ = 1` (complete graph), where
    /// the inversion is undefined.
    pub n_from_identity: Option<f64>,
}

/// Number of source chunks for the parallel sweep. Fixed (rather than derived
/// from the thread count) so that floating-point accumulation order, and
/// therefore every output bit, is machine-independent.
const SWEEP_CHUNKS: usize = 64;

/// One chunk's contribution: partial betweenness (empty when not requested)
/// and the exact integer sum of distances from the chunk's sources.
fn sweep_chunk(
    g: &Graph,
    sources: std::ops::Range<usize>,
    want_betweenness: bool,
) -> Result<(Vec<f64>, u64)> {
    let n = g.num_vertices();
    let mut partial_b = if want_betweenness { vec![0.0f64; n] } else { Vec::new() };
    let mut dist_sum = 0u64;

    let mut dist = vec![u32::MAX; n];
    let mut sigma = vec![0.0f64; n];
    let mut delta = vec![0.0f64; n];
    let mut order: Vec<VertexId> = Vec::with_capacity(n);

    for s in sources {
        let s = s as VertexId;
        dist.fill(u32::MAX);
        sigma.fill(0.0);
        order.clear();

        dist[s as usize] = 0;
        sigma[s as usize] = 1.0;
        order.push(s);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            let du = dist[u as usize];
            dist_sum += u64::from(du);
            for &v in g.neighbors(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    order.push(v);
                }
                if dist[v as usize] == du + 1 {
                    sigma[v as usize] += sigma[u as usize];
                }
            }
        }
        if order.len() != n {
            return Err(Error::Disconnected);
        }

        if want_betweenness {
            delta.fill(0.0);
            // Farthest-first dependency accumulation; predecessors are
            // re-derived from the distance array instead of stored lists.
            for &w in order.iter().rev() {
                let dw = dist[w as usize];
                let coeff = (1.0 + delta[w as usize]) / sigma[w as usize];
                for &v in g.neighbors(w) {
                    if dist[v as usize] + 1 == dw {
                        delta[v as usize] += sigma[v as usize] * coeff;
                    }
                }
                if w != s {
                    partial_b[w as usize] += delta[w as usize];
                }
            }
        }
    }
    Ok((partial_b, dist_sum))
}

/// Runs the sweep over all sources, parallel across a fixed chunk grid, and
/// reduces the partials in deterministic chunk order.
fn sweep(g: &Graph, want_betweenness: bool) -> Result<(Vec<f64>, u64)> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "centrality needs at least 2 vertices".into(),
        ));
    }
    let chunks = SWEEP_CHUNKS.min(n);
    let per = n.div_ceil(chunks);
    let ranges: Vec<std::ops::Range<usize>> = (0..chunks)
        .map(|c| (c * per).min(n)..((c + 1) * per).min(n))
        .collect();

    let partials: Vec<(Vec<f64>, u64)> = ranges
        .into_par_iter()
        .map(|r| sweep_chunk(g, r, want_betweenness))
        .collect::<Result<_>>()?;

    let mut betweenness = if want_betweenness { vec![0.0f64; n] } else { Vec::new() };
    let mut dist_total = 0u64;
    for (pb, ds) in partials {
        dist_total += ds;
        for (acc, x) in betweenness.iter_mut().zip(&pb) {
            *acc += x;
        }
    }
    Ok((betweenness, dist_total))
}

/// Computes betweenness and the mean path length in a single pass.
/// Fails on graphs that are disconnected or have fewer than 2 vertices.
pub fn profile(g: &Graph) -> Result<CentralityProfile> {
    let n = g.num_vertices();
    let (betweenness, dist_total) = sweep(g, true)?;
    let pairs = (n as u64) * (n as u64 - 1);
    Ok(CentralityProfile {
        sum_betweenness: betweenness.iter().sum(),
        betweenness,
        avg_path_length: dist_total as f64 / pairs as f64,
        total_distance: dist_total,
    })
}

/// Per-vertex betweenness under the ordered-pair convention.
pub fn betweenness(g: &Graph) -> Result<Vec<f64>> {
    Ok(profile(g)?.betweenness)
}

/// Mean shortest-path distance over ordered pairs. The distance total is
/// accumulated in integers, so the only rounding is the final division.
pub fn avg_path_length(g: &Graph) -> Result<f64> {
    let n = g.num_vertices();
    let (_, dist_total) = sweep(g, false)?;
    let pairs = (n as u64) * (n as u64 - 1);
    Ok(dist_total as f64 / pairs as f64)
}

/// Evaluates both sides of `Σ b_i = N (N − 1)(ℓ − 1)` and the implied vertex
/// count. On complete graphs (`ℓ = 1`) the inversion is flagged as undefined
/// rather than returning an error: the identity itself still holds (0 = 0).
pub fn check_size_identity(g: &Graph) -> Result<SizeIdentity> {
    let p = profile(g)?;
    let n = g.num_vertices();
    // N(N−1)(ℓ−1) telescopes to (total distance) − (pair count), which the
    // sweep carries exactly in integers — no cancellation against a rounded ℓ.
    let pairs = (n as u64) * (n as u64 - 1);
    let excess = p.total_distance - pairs;
    let identity_rhs = excess as f64;
    let n_from_identity =
        (excess > 0).then(|| 1.0 + p.sum_betweenness * (n as f64 - 1.0) / excess as f64);
    Ok(SizeIdentity {
        num_vertices: n,
        avg_path_length: p.avg_path_length,
        sum_betweenness: p.sum_betweenness,
        identity_rhs,
        n_from_identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    /// Reference betweenness via all-pairs path counting — an intentionally
    /// different algorithm from the production sweep (no dependency
    /// accumulation; uses the σ(h,i)·σ(i,j) decomposition directly).
    fn betweenness_by_path_counting(g: &Graph) -> Vec<f64> {
        let n = g.num_vertices();
        let mut dist = vec![vec![u32::MAX; n]; n];
        let mut sigma = vec![vec![0.0f64; n]; n];
        for s in 0..n {
            dist[s][s] = 0;
            sigma[s][s] = 1.0;
            let mut queue = vec![s as u32];
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head] as usize;
                head += 1;
                for &v in g.neighbors(u as u32) {
                    let v = v as usize;
                    if dist[s][v] == u32::MAX {
                        dist[s][v] = dist[s][u] + 1;
                        queue.push(v as u32);
                    }
                    if dist[s][v] == dist[s][u] + 1 {
                        sigma[s][v] += sigma[s][u];
                    }
                }
            }
        }
        let mut b = vec![0.0f64; n];
        for h in 0..n {
            for j in 0..n {
                if h == j {
                    continue;
                }
                for i in 0..n {
                    if i == h || i == j {
                        continue;
                    }
                    if dist[h][i] != u32::MAX && dist[h][i] + dist[i][j] == dist[h][j] {
                        b[i] += sigma[h][i] * sigma[i][j] / sigma[h][j];
                    }
                }
            }
        }
        b
    }

    #[test]
    fn path_of_three_concentrates_on_the_middle() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = profile(&g).unwrap();
        assert_eq!(p.betweenness, vec![0.0, 2.0, 0.0]);
        assert_close(p.avg_path_length, 4.0 / 3.0, 1e-12, "ℓ on P3");
        let id = check_size_identity(&g).unwrap();
        assert_close(id.identity_rhs, 2.0, 1e-12, "rhs on P3");
        assert_close(id.sum_betweenness, 2.0, 1e-12, "lhs on P3");
        assert_close(id.n_from_identity.unwrap(), 3.0, 1e-12, "N from identity");
    }

    #[test]
    fn star_load_sits_on_the_center() {
        let edges: Vec<(u32, u32)> = (1..=6).map(|v| (0, v)).collect();
        let g = Graph::from_edges(7, &edges).unwrap();
        let p = profile(&g).unwrap();
        assert_close(p.betweenness[0], 30.0, 1e-12, "center of K_{1,6}");
        assert!(p.betweenness[1..].iter().all(|&b| b == 0.0));
        assert_close(p.avg_path_length, 12.0 / 7.0, 1e-12, "ℓ on K_{1,6}");
        let id = check_size_identity(&g).unwrap();
        assert_close(id.identity_rhs, 30.0, 1e-12, "rhs on K_{1,6}");
        assert_close(id.n_from_identity.unwrap(), 7.0, 1e-9, "N recovered");
    }

    #[test]
    fn four_cycle_splits_tied_pairs() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let p = profile(&g).unwrap();
        // Each vertex carries half of both orientations of one antipodal pair.
        assert_eq!(p.betweenness, vec![1.0, 1.0, 1.0, 1.0]);
        assert_close(p.avg_path_length, 4.0 / 3.0, 1e-12, "ℓ on C4");
    }

    #[test]
    fn complete_graph_flags_undefined_inversion() {
        let g = graph::erdos_renyi(5, 4.0, 0).unwrap(); // p = 1: K5
        let id = check_size_identity(&g).unwrap();
        assert_eq!(id.sum_betweenness, 0.0);
        assert_eq!(id.identity_rhs, 0.0);
        assert_close(id.avg_path_length, 1.0, 1e-12, "ℓ on K5");
        assert!(id.n_from_identity.is_none());
    }

    #[test]
    fn rejects_disconnected_and_trivial_graphs() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(profile(&g), Err(Error::Disconnected)));
        assert!(matches!(avg_path_length(&g), Err(Error::Disconnected)));
        let tiny = Graph::from_edges(1, &[]).unwrap();
        assert!(profile(&tiny).is_err());
    }

    #[test]
    fn sweep_agrees_with_path_counting_on_random_graphs() {
        let mut checked = 0;
        for seed in 0..40u64 {
            let Ok(g) = graph::erdos_renyi(7, 2.5, seed) else { continue };
            if !g.is_connected() || g.num_vertices() < 4 {
                continue;
            }
            let fast = betweenness(&g).unwrap();
            let slow = betweenness_by_path_counting(&g);
            for (a, b) in fast.iter().zip(&slow) {
                assert_close(*a, *b, 1e-9, "betweenness vs path counting");
            }
            checked += 1;
        }
        assert!(checked >= 15, "only {checked} graphs exercised");
    }

    /// On a tree, vertex i's betweenness is the number of ordered pairs of
    /// vertices lying in distinct branches around i — computable directly
    /// from component sizes, no path algorithms involved.
    #[test]
    fn tree_betweenness_matches_branch_products() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let n = rng.random_range(5..=50usize);
            // Random tree: each vertex v > 0 attaches to a uniform predecessor.
            let edges: Vec<(u32, u32)> = (1..n as u32)
                .map(|v| (rng.random_range(0..v), v))
                .collect();
            let g = Graph::from_edges(n, &edges).unwrap();
            let b = betweenness(&g).unwrap();
            for i in 0..n as u32 {
                // Sizes of the components of g − i.
                let mut seen = vec![false; n];
                seen[i as usize] = true;
                let mut sizes = Vec::new();
                for start in g.neighbors(i) {
                    if seen[*start as usize] {
                        continue;
                    }
                    let mut stack = vec![*start];
                    seen[*start as usize] = true;
                    let mut size = 0u64;
                    while let Some(u) = stack.pop() {
                        size += 1;
                        for &w in g.neighbors(u) {
                            if !seen[w as usize] {
                                seen[w as usize] = true;
                                stack.push(w);
                            }
                        }
                    }
                    sizes.push(size);
                }
                let total: u64 = sizes.iter().sum();
                let squares: u64 = sizes.iter().map(|s| s * s).sum();
                let expected = (total * total - squares) as f64;
                assert_close(b[i as usize], expected, 1e-9, "tree branch products");
            }
        }
    }

    #[test]
    fn identity_holds_tightly_on_a_random_graph() {
        let g = graph::erdos_renyi(500, 6.0, 42).unwrap();
        let id = check_size_identity(&g).unwrap();
        let rel = (id.sum_betweenness - id.identity_rhs).abs() / id.identity_rhs;
        assert!(rel <= 1e-9, "relative identity error {rel}");
        let n_hat = id.n_from_identity.unwrap();
        assert_close(n_hat, g.num_vertices() as f64, 1e-6, "N from identity");
    }
}
