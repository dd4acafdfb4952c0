//! Plain directed-graph algorithms over adjacency lists indexed by `usize`.

use std::collections::VecDeque;

/// Strongly connected components. `comp[v]` is the component of `v`;
/// components are numbered in reverse topological order (every edge goes from
/// a higher or equal component number to a lower or equal one).
#[derive(Debug, Clone)]
pub struct Sccs {
    pub comp: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl Sccs {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn same(&self, u: usize, v: usize) -> bool {
        self.comp[u] == self.comp[v]
    }
}

/// Tarjan's algorithm, iterative so deep graphs cannot overflow the stack.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Sccs {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![UNVISITED; n];
    let mut members = Vec::new();
    let mut counter = 0;
    // (node, next child position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for s in 0..n {
        if index[s] != UNVISITED {
            continue;
        }
        call.push((s, 0));
        index[s] = counter;
        low[s] = counter;
        counter += 1;
        stack.push(s);
        on_stack[s] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let id = members.len();
                    let mut group = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = id;
                        group.push(w);
                        if w == v {
                            break;
                        }
                    }
                    group.sort_unstable();
                    members.push(group);
                }
            }
        }
    }
    Sccs { comp, members }
}

/// Nodes reachable from `start`, as a boolean mask.
pub fn reachable(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    seen
}

/// Shortest path (fewest edges) from `from` to `to` using only nodes where
/// `allowed` holds, as the list of nodes visited after `from`. Neighbours are
/// explored in adjacency order, so the result is deterministic.
pub fn bfs_path<F: Fn(usize) -> bool>(
    adj: &[Vec<usize>],
    from: usize,
    to: usize,
    allowed: F,
) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut pred = vec![usize::MAX; adj.len()];
    pred[from] = from;
    let mut q = VecDeque::from([from]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if pred[v] == usize::MAX && allowed(v) {
                pred[v] = u;
                if v == to {
                    let mut path = vec![to];
                    let mut at = to;
                    while pred[at] != from {
                        at = pred[at];
                        path.push(at);
                    }
                    path.reverse();
                    return Some(path);
                }
                q.push_back(v);
            }
        }
    }
    None
}

pub const UNREACHABLE: u32 = u32::MAX;

/// All-pairs shortest paths with non-negative integer weights.
/// `next[u][v]` is the first hop on a shortest `u ⇝ v` path.
#[derive(Debug, Clone)]
pub struct AllPairs {
    n: usize,
    dist: Vec<u32>,
    next: Vec<u32>,
}

impl AllPairs {
    pub fn dist(&self, u: usize, v: usize) -> Option<u32> {
        let d = self.dist[u * self.n + v];
        (d != UNREACHABLE).then_some(d)
    }

    /// Node sequence of a shortest path, excluding `u`, including `v`.
    pub fn path(&self, u: usize, v: usize) -> Option<Vec<usize>> {
        self.dist(u, v)?;
        let mut out = Vec::new();
        let mut at = u;
        while at != v {
            at = self.next[at * self.n + v] as usize;
            out.push(at);
        }
        Some(out)
    }
}

/// Floyd-Warshall over weighted edges `(u, v, w)`; `Θ(n³)` time, `Θ(n²)`
/// memory. Among parallel edges the lightest counts.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, u32)]) -> AllPairs {
    let mut dist = vec![UNREACHABLE; n * n];
    let mut next = vec![u32::MAX; n * n];
    for v in 0..n {
        dist[v * n + v] = 0;
        next[v * n + v] = v as u32;
    }
    for &(u, v, w) in edges {
        if u != v && w < dist[u * n + v] {
            dist[u * n + v] = w;
            next[u * n + v] = v as u32;
        }
    }
    for k in 0..n {
        let row_k: Vec<u32> = dist[k * n..(k + 1) * n].to_vec();
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik == UNREACHABLE {
                continue;
            }
            let hop = next[i * n + k];
            let row_i = &mut dist[i * n..(i + 1) * n];
            let next_i = &mut next[i * n..(i + 1) * n];
            for j in 0..n {
                let dkj = row_k[j];
                if dkj != UNREACHABLE && dik + dkj < row_i[j] {
                    row_i[j] = dik + dkj;
                    next_i[j] = hop;
                }
            }
        }
    }
    AllPairs { n, dist, next }
}

/// Single-source shortest paths with weights in {0, 1}: Dijkstra with a
/// two-bucket queue (a deque). `adj[u]` holds `(v, w)`. Returns distances and
/// for each reached node the predecessor on a shortest path.
pub fn zero_one_bfs(adj: &[Vec<(usize, u8)>], source: usize) -> (Vec<u32>, Vec<usize>) {
    let n = adj.len();
    let mut dist = vec![UNREACHABLE; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut q = VecDeque::new();
    dist[source] = 0;
    pred[source] = source;
    q.push_back(source);
    while let Some(u) = q.pop_front() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in &adj[u] {
            let nd = dist[u] + w as u32;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                if w == 0 {
                    q.push_front(v);
                } else {
                    q.push_back(v);
                }
            }
        }
    }
    (dist, pred)
}

/// Transitive closure as bit rows (Warshall's algorithm). `reach[u]` has bit
/// `v` set iff there is a non-empty path from `u` to `v`.
pub fn transitive_closure(adj: &[Vec<usize>]) -> Vec<Vec<u64>> {
    let n = adj.len();
    let words = n.div_ceil(64);
    let mut reach = vec![vec![0u64; words]; n];
    for (u, succ) in adj.iter().enumerate() {
        for &v in succ {
            reach[u][v / 64] |= 1 << (v % 64);
        }
    }
    for k in 0..n {
        let row_k = reach[k].clone();
        for row in reach.iter_mut() {
            if row[k / 64] >> (k % 64) & 1 == 1 {
                for (a, b) in row.iter_mut().zip(&row_k) {
                    *a |= *b;
                }
            }
        }
    }
    reach
}

pub fn bit(row: &[u64], v: usize) -> bool {
    row[v / 64] >> (v % 64) & 1 == 1
}
