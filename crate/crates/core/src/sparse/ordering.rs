use std::collections::BTreeSet;

/// Minimum-degree ordering of a symmetric pattern given as adjacency lists.
///
/// Plain (non-approximate) minimum degree on the explicit elimination graph.
/// Ties are broken by the smaller vertex index, so the result is
/// deterministic. Returns `perm` with `perm[new] = old`.
pub fn minimum_degree(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut graph: Vec<BTreeSet<usize>> = adjacency
        .iter()
        .enumerate()
        .map(|(i, a)| a.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (graph[i].len(), i)).collect();
    let mut eliminated = vec![false; n];
    let mut perm = Vec::with_capacity(n);

    while let Some(&(deg, v)) = queue.iter().next() {
        queue.remove(&(deg, v));
        eliminated[v] = true;
        perm.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut graph[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(graph[u].len(), u));
            graph[u].remove(&v);
        }
        // neighbours of v become a clique
        for (a, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[a + 1..] {
                graph[u].insert(w);
                graph[w].insert(u);
            }
        }
        for &u in &nbrs {
            debug_assert!(!eliminated[u]);
            queue.insert((graph[u].len(), u));
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_permutation(p: &[usize]) -> bool {
        let mut seen = vec![false; p.len()];
        p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
    }

    #[test]
    fn star_graph_eliminates_leaves_first() {
        // hub 0 connected to everyone: eliminating it first would fill the matrix
        let n = 6;
        let mut adj = vec![Vec::new(); n];
        for i in 1..n {
            adj[0].push(i);
            adj[i].push(0);
        }
        let p = minimum_degree(&adj);
        assert!(is_permutation(&p));
        assert_eq!(p[0], 1);
        assert!(p.iter().position(|&v| v == 0).unwrap() >= n - 2);
    }

    #[test]
    fn deterministic_and_complete_on_a_grid() {
        let side = 7;
        let n = side * side;
        let mut adj = vec![Vec::new(); n];
        for r in 0..side {
            for c in 0..side {
                let i = r * side + c;
                if c + 1 < side {
                    adj[i].push(i + 1);
                    adj[i + 1].push(i);
                }
                if r + 1 < side {
                    adj[i].push(i + side);
                    adj[i + side].push(i);
                }
            }
        }
        let a = minimum_degree(&adj);
        let b = minimum_degree(&adj);
        assert_eq!(a, b);
        assert!(is_permutation(&a));
    }
}
