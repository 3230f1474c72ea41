//! k-nearest-neighbor graphs and shortest-path (geodesic) distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kdtree::KdTree;
use crate::linalg::{distance, squared_distance, DataMatrix, Matrix};

/// Above this dimension a kd-tree prunes too little to beat a scan.
const KD_TREE_MAX_DIM: usize = 16;
const KD_TREE_MIN_N: usize = 64;

/// Undirected weighted graph built from k-nearest-neighbor lists.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    n: usize,
    k: usize,
    /// Directed k-nearest lists, nearest first.
    knn: Vec<Vec<usize>>,
    /// Symmetric adjacency, sorted by neighbor index.
    adjacency: Vec<Vec<(usize, f64)>>,
    bridges: Vec<(usize, usize)>,
}

impl KnnGraph {
    /// Builds a graph from explicit undirected edges. Duplicate edges keep
    /// the first length seen; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, len) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidInput(format!(
                    "invalid edge ({i}, {j}) for {n} nodes"
                )));
            }
            if !(len >= 0.0 && len.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) has length {len}"
                )));
            }
            if !adjacency[i].iter().any(|&(t, _)| t == j) {
                adjacency[i].push((j, len));
                adjacency[j].push((i, len));
            }
        }
        for a in &mut adjacency {
            a.sort_by_key(|&(t, _)| t);
        }
        Ok(KnnGraph {
            n,
            k: 0,
            knn: vec![Vec::new(); n],
            adjacency,
            bridges: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `k` nearest neighbors of `i`, nearest first (before symmetrization).
    pub fn knn(&self, i: usize) -> &[usize] {
        &self.knn[i]
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(t, _)| t)
            .is_ok()
    }

    /// Undirected edges `(i, j, length)` with `i < j`, lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &(j, len) in adj {
                if i < j {
                    out.push((i, j, len));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges added by [`ensure_connected`], in insertion order.
    pub fn bridges(&self) -> &[(usize, usize)] {
        &self.bridges
    }

    fn add_edge(&mut self, i: usize, j: usize, len: f64) {
        for (a, b) in [(i, j), (j, i)] {
            let adj = &mut self.adjacency[a];
            if let Err(pos) = adj.binary_search_by_key(&b, |&(t, _)| t) {
                adj.insert(pos, (b, len));
            }
        }
    }

    /// Connected component id per node, numbered by lowest member.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Debug export, one `i j length` line per undirected edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, j, len) in self.edges() {
            writeln!(out, "{i} {j} {len}")?;
        }
        Ok(())
    }
}

/// The `k` nearest rows to `i` by Euclidean distance, nearest first, ties
/// to the lower index. Brute force.
pub fn nearest_neighbors(x: &DataMatrix, i: usize, k: usize) -> Vec<usize> {
    let xi = x.row(i);
    let mut cand: Vec<(f64, usize)> = (0..x.rows())
        .filter(|&j| j != i)
        .map(|j| (squared_distance(xi, x.row(j)), j))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k, cmp);
        cand.truncate(k);
    }
    cand.sort_by(cmp);
    cand.into_iter().map(|(_, j)| j).collect()
}

/// Directed k-nearest lists for every point, union-symmetrized. Low
/// dimensional inputs are queried through a kd-tree with the same ordering
/// as [`nearest_neighbors`].
pub fn build_knn(x: &DataMatrix, k: usize) -> Result<KnnGraph> {
    let n = x.rows();
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    let knn: Vec<Vec<usize>> = if x.cols() <= KD_TREE_MAX_DIM && n > KD_TREE_MIN_N {
        let tree = KdTree::new(x);
        (0..n).into_par_iter().map(|i| tree.nearest(i, k)).collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| nearest_neighbors(x, i, k))
            .collect()
    };
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, list) in knn.iter().enumerate() {
        for &j in list {
            let len = distance(x.row(i), x.row(j));
            adjacency[i].push((j, len));
            adjacency[j].push((i, len));
        }
    }
    for a in &mut adjacency {
        a.sort_by_key(|p| p.0);
        a.dedup_by_key(|p| p.0);
    }
    Ok(KnnGraph {
        n,
        k,
        knn,
        adjacency,
        bridges: Vec::new(),
    })
}

/// Joins components greedily: while more than one remains, adds the
/// shortest Euclidean edge between any two distinct components (ties to
/// the lexicographically smallest node pair).
pub fn ensure_connected(g: &KnnGraph, x: &DataMatrix) -> Result<KnnGraph> {
    if x.rows() != g.n {
        return Err(Error::InvalidInput(format!(
            "graph has {} nodes but data has {} rows",
            g.n,
            x.rows()
        )));
    }
    let mut out = g.clone();
    loop {
        let comp = out.components();
        if comp.iter().all(|&c| c == 0) {
            return Ok(out);
        }
        let n = out.n;
        let best = (0..n)
            .into_par_iter()
            .filter_map(|i| {
                let mut best: Option<(f64, usize, usize)> = None;
                for j in (i + 1)..n {
                    if comp[i] == comp[j] {
                        continue;
                    }
                    let d = squared_distance(x.row(i), x.row(j));
                    if best.is_none_or(|b| d < b.0) {
                        best = Some((d, i, j));
                    }
                }
                best
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))))
            .expect("two components imply a cross pair");
        let (_, i, j) = best;
        out.add_edge(i, j, distance(x.row(i), x.row(j)));
        out.bridges.push((i, j));
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source Dijkstra. When `targets` is given the search stops once
/// all of them are settled; unsettled nodes stay at infinity.
pub fn dijkstra(g: &KnnGraph, source: usize, targets: Option<&[usize]>) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n];
    let mut done = vec![false; g.n];
    let mut remaining = targets.map(|t| {
        let mut want = vec![false; g.n];
        let mut count = 0;
        for &v in t {
            if !want[v] {
                want[v] = true;
                count += 1;
            }
        }
        (want, count)
    });
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if let Some((want, count)) = remaining.as_mut() {
            if want[u] {
                *count -= 1;
                if *count == 0 {
                    break;
                }
            }
        }
        for &(v, len) in &g.adjacency[u] {
            let nd = d + len;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry { dist: nd, node: v });
            }
        }
    }
    dist
}

/// All-pairs geodesic distances, one Dijkstra per source in parallel.
/// Errors on a disconnected graph.
pub fn geodesic_all_pairs(g: &KnnGraph) -> Result<Matrix> {
    let d = geodesic_all_pairs_partial(g);
    for s in 0..g.n {
        if let Some(t) = d.row(s).iter().position(|v| v.is_infinite()) {
            return Err(Error::Unreachable { from: s, target: t });
        }
    }
    Ok(d)
}

/// All-pairs geodesic distances with `inf` between components.
pub fn geodesic_all_pairs_partial(g: &KnnGraph) -> Matrix {
    let n = g.n;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| dijkstra(g, s, None))
        .collect();
    let mut d = Matrix::zeros(n, n);
    for (s, row) in rows.iter().enumerate() {
        d.row_mut(s).copy_from_slice(row);
    }
    // Dijkstra sums along different paths can differ in the last bit.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = d[(i, j)].min(d[(j, i)]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Geodesic distance for every graph edge, aligned with
/// [`KnnGraph::neighbors`]: entry `[i][t]` is `d_G(i, neighbors(i)[t].0)`.
/// Each search stops as soon as the source's neighbors are settled, so the
/// cost stays proportional to the local ball rather than the whole graph.
pub fn geodesic_on_edges(g: &KnnGraph) -> Result<Vec<Vec<f64>>> {
    let per: Vec<Vec<f64>> = (0..g.n)
        .into_par_iter()
        .map(|s| {
            let targets: Vec<usize> = g.adjacency[s].iter().map(|&(t, _)| t).collect();
            let dist = dijkstra(g, s, Some(&targets));
            targets.iter().map(|&t| dist[t]).collect()
        })
        .collect();
    let mut out = per;
    // symmetrize: take the smaller of the two directed searches
    for i in 0..g.n {
        for t in 0..g.adjacency[i].len() {
            let j = g.adjacency[i][t].0;
            if j < i {
                continue;
            }
            let back = g.adjacency[j]
                .binary_search_by_key(&i, |&(u, _)| u)
                .expect("adjacency is symmetric");
            let v = out[i][t].min(out[j][back]);
            out[i][t] = v;
            out[j][back] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Matrix {
        Matrix::from_rows(&xs.iter().map(|&v| [v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn collinear_k1_with_tie() {
        let x = line(&[0.0, 1.0, 2.0, 5.0]);
        let g = build_knn(&x, 1).unwrap();
        assert_eq!(g.knn(0), &[1]);
        assert_eq!(g.knn(1), &[0]);
        assert_eq!(g.knn(2), &[1]);
        assert_eq!(g.knn(3), &[2]);
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.0, e.1)).collect();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn k_equal_n_minus_one_is_complete() {
        let x = line(&[0.0, 0.3, 1.7, 2.2, 9.0]);
        let g = build_knn(&x, 4).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!(matches!(
            build_knn(&x, 5),
            Err(Error::InvalidK { k: 5, n: 5 })
        ));
        assert!(build_knn(&x, 0).is_err());
    }

    #[test]
    fn connected_graph_unchanged() {
        let x = line(&[0.0, 1.0, 2.0]);
        let g = build_knn(&x, 1).unwrap();
        let r = ensure_connected(&g, &x).unwrap();
        assert_eq!(r, g);
        assert!(r.bridges().is_empty());
    }

    #[test]
    fn singletons_bridged_greedily() {
        let x = line(&[0.0, 10.0, 21.0]);
        let g = KnnGraph::from_edges(3, &[]).unwrap();
        let r = ensure_connected(&g, &x).unwrap();
        assert_eq!(r.bridges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn path_sum_and_unreachable() {
        let g = KnnGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let d = geodesic_all_pairs(&g).unwrap();
        assert_eq!(d[(0, 2)], 3.0);
        assert_eq!(d[(2, 0)], 3.0);
        let g = KnnGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            geodesic_all_pairs(&g),
            Err(Error::Unreachable { .. })
        ));
    }

    #[test]
    fn edge_geodesics_match_all_pairs() {
        let x = line(&[0.0, 0.5, 0.7, 1.9, 2.0, 4.0, 4.1]);
        let g = ensure_connected(&build_knn(&x, 2).unwrap(), &x).unwrap();
        let full = geodesic_all_pairs(&g).unwrap();
        let local = geodesic_on_edges(&g).unwrap();
        for i in 0..g.n() {
            for (t, &(j, _)) in g.neighbors(i).iter().enumerate() {
                assert_eq!(local[i][t], full[(i, j)]);
            }
        }
    }

    #[test]
    fn edge_list_export() {
        let g = KnnGraph::from_edges(3, &[(2, 0, 1.5), (0, 1, 0.25)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 1 0.25\n0 2 1.5\n");
    }

    #[test]
    fn duplicate_points_give_zero_length_edges() {
        let x = line(&[1.0, 1.0, 3.0]);
        let g = build_knn(&x, 1).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 0.0), (2, 2.0)]);
        let d = geodesic_all_pairs(&ensure_connected(&g, &x).unwrap()).unwrap();
        assert_eq!(d[(0, 1)], 0.0);
    }
}
