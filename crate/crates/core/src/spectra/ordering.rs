//! Fill-reducing ordering by recursive level-structure dissection.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Subgraphs at most this large are numbered directly.
const LEAF_SIZE: usize = 48;

/// Returns a permutation `perm` (new position -> old index) for the graph
/// with adjacency lists `adj`. Separators are numbered after the parts
/// they split.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut perm = Vec::with_capacity(n);
    let mut mark = vec![0u32; n];
    let mut stamp = 0u32;
    let mut visit = vec![0u32; n];
    let mut depth = vec![usize::MAX; n];
    // work items: vertex sets to order, processed so that separators land last
    enum Task {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split((0..n).collect())];
    while let Some(task) = stack.pop() {
        let set = match task {
            Task::Emit(v) => {
                perm.extend(v);
                continue;
            }
            Task::Split(v) => v,
        };
        if set.len() <= LEAF_SIZE {
            perm.extend(set);
            continue;
        }
        stamp += 1;
        for &u in &set {
            mark[u] = stamp;
        }
        let comps = components(adj, &set, &mark, stamp, &mut visit);
        if comps.len() > 1 {
            for c in comps.into_iter().rev() {
                stack.push(Task::Split(c));
            }
            continue;
        }
        let levels = level_structure(adj, &set, &mark, stamp, &mut depth);
        if levels.len() < 3 {
            perm.extend(set);
            continue;
        }
        let mid = pick_separator(&levels);
        let lower: Vec<usize> = levels[..mid].iter().flatten().copied().collect();
        let upper: Vec<usize> = levels[mid + 1..].iter().flatten().copied().collect();
        // popped in reverse: lower, upper, then the separator
        stack.push(Task::Emit(levels[mid].clone()));
        stack.push(Task::Split(upper));
        stack.push(Task::Split(lower));
    }
    perm
}

/// Level whose removal balances the two sides while keeping it small.
fn pick_separator(levels: &[Vec<usize>]) -> usize {
    let total: usize = levels.iter().map(Vec::len).sum();
    let mut below = 0usize;
    let mut best = (usize::MAX, 1usize);
    for m in 1..levels.len() - 1 {
        below += levels[m - 1].len();
        let above = total - below - levels[m].len();
        let imbalance = below.abs_diff(above);
        // favour short separators near the middle
        let score = levels[m].len() * 4 + imbalance / 8;
        if imbalance * 3 <= total * 2 && score < best.0 {
            best = (score, m);
        }
    }
    if best.0 == usize::MAX {
        levels.len() / 2
    } else {
        best.1
    }
}

fn components(adj: &[Vec<usize>], set: &[usize], mark: &[u32], stamp: u32, visit: &mut [u32]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for &s in set {
        if visit[s] == stamp {
            continue;
        }
        let mut comp = vec![s];
        visit[s] = stamp;
        let mut k = 0;
        while k < comp.len() {
            let u = comp[k];
            k += 1;
            for &v in &adj[u] {
                if mark[v] == stamp && visit[v] != stamp {
                    visit[v] = stamp;
                    comp.push(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn bfs_levels(adj: &[Vec<usize>], root: usize, mark: &[u32], stamp: u32, depth: &mut [usize]) -> Vec<Vec<usize>> {
    let mut levels: Vec<Vec<usize>> = vec![vec![root]];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if mark[v] == stamp && depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                if levels.len() <= depth[v] {
                    levels.push(Vec::new());
                }
                levels[depth[v]].push(v);
                queue.push_back(v);
            }
        }
    }
    levels
}

/// Rooted level structure from a pseudo-peripheral vertex of a connected set.
fn level_structure(adj: &[Vec<usize>], set: &[usize], mark: &[u32], stamp: u32, depth: &mut [usize]) -> Vec<Vec<usize>> {
    let reset = |depth: &mut [usize]| {
        for &u in set {
            depth[u] = usize::MAX;
        }
    };
    let mut root = set[0];
    let mut levels = bfs_levels(adj, root, mark, stamp, depth);
    for _ in 0..8 {
        let last = levels.last().expect("nonempty");
        let cand = *last.iter().min_by_key(|&&u| adj[u].iter().filter(|&&v| mark[v] == stamp).count()).expect("nonempty");
        reset(depth);
        let trial = bfs_levels(adj, cand, mark, stamp, depth);
        if trial.len() <= levels.len() {
            reset(depth);
            levels = bfs_levels(adj, root, mark, stamp, depth);
            break;
        }
        root = cand;
        levels = trial;
    }
    reset(depth);
    levels
}
