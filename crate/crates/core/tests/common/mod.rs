#![allow(dead_code)]

use hypchrom::chromasolve::DistGraph;

/// Chromatic number by exhaustive search over set partitions: vertex `i`
/// joins one of the classes opened so far or opens a new one.
pub fn brute_force_chromatic(g: &DistGraph) -> u32 {
    let n = g.vertex_count();
    if n == 0 {
        return 0;
    }
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|u| (0..n).map(|v| g.has_edge(u, v)).collect())
        .collect();
    let mut class = vec![0usize; n];
    let mut best = n;
    fn go(i: usize, used: usize, class: &mut [usize], adj: &[Vec<bool>], best: &mut usize) {
        if used >= *best {
            return;
        }
        if i == class.len() {
            *best = used;
            return;
        }
        for c in 0..=used {
            if (0..i).any(|j| adj[i][j] && class[j] == c) {
                continue;
            }
            class[i] = c;
            go(i + 1, used.max(c + 1), class, adj, best);
        }
    }
    go(0, 0, &mut class, &adj, &mut best);
    best as u32
}

/// Largest clique by checking every vertex subset.
pub fn brute_force_clique(g: &DistGraph) -> usize {
    let n = g.vertex_count();
    assert!(n <= 20);
    (0u32..1 << n)
        .filter(|mask| {
            let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            vs.iter()
                .enumerate()
                .all(|(i, &a)| vs[i + 1..].iter().all(|&b| g.has_edge(a, b)))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Distances from `src` in a graph given by adjacency lists.
pub fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}
