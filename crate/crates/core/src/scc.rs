//! Iterative Tarjan decomposition into strongly connected components.
//!
//! The graph is described by a successor function `succ(v, i)` returning the
//! `i`-th successor of `v`, or `None` past the last one. Components are
//! emitted in reverse topological order: a component is emitted only after
//! every component it can reach.

const UNVISITED: u32 = u32::MAX;

#[derive(Debug, Default, Clone)]
pub struct Tarjan {
    index: Vec<u32>,
    lowlink: Vec<u32>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    calls: Vec<(usize, usize)>,
}

impl Tarjan {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        self.index.clear();
        self.index.resize(n, UNVISITED);
        self.lowlink.clear();
        self.lowlink.resize(n, 0);
        self.on_stack.clear();
        self.on_stack.resize(n, false);
        self.stack.clear();
        self.calls.clear();
    }

    /// Decomposes the part of the graph reachable from `roots`, calling
    /// `emit` once per component.
    pub fn run<S, E>(&mut self, n: usize, roots: impl IntoIterator<Item = usize>, succ: S, mut emit: E)
    where
        S: Fn(usize, usize) -> Option<usize>,
        E: FnMut(&[usize]),
    {
        self.reset(n);
        let mut counter: u32 = 0;
        for root in roots {
            if self.index[root] != UNVISITED {
                continue;
            }
            self.visit(root, &mut counter);
            while let Some(&mut (v, ref mut next)) = self.calls.last_mut() {
                if let Some(w) = succ(v, *next) {
                    *next += 1;
                    if self.index[w] == UNVISITED {
                        self.visit(w, &mut counter);
                    } else if self.on_stack[w] {
                        self.lowlink[v] = self.lowlink[v].min(self.index[w]);
                    }
                    continue;
                }
                self.calls.pop();
                if self.lowlink[v] == self.index[v] {
                    let pos = self
                        .stack
                        .iter()
                        .rposition(|&x| x == v)
                        .expect("root is on the stack");
                    for &x in &self.stack[pos..] {
                        self.on_stack[x] = false;
                    }
                    emit(&self.stack[pos..]);
                    self.stack.truncate(pos);
                }
                if let Some(&(parent, _)) = self.calls.last() {
                    self.lowlink[parent] = self.lowlink[parent].min(self.lowlink[v]);
                }
            }
        }
    }

    fn visit(&mut self, v: usize, counter: &mut u32) {
        self.index[v] = *counter;
        self.lowlink[v] = *counter;
        *counter += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        self.calls.push((v, 0));
    }
}

/// All strongly connected components of a graph on `0..n`.
pub fn components<S>(n: usize, succ: S) -> Vec<Vec<usize>>
where
    S: Fn(usize, usize) -> Option<usize>,
{
    let mut out = Vec::new();
    Tarjan::new().run(n, 0..n, succ, |c| out.push(c.to_vec()));
    out
}

/// Bottom components: strongly connected, closed under successors and
/// containing at least one edge. Members are sorted; components are sorted by
/// their smallest member.
pub fn bottom_components<S>(n: usize, succ: S) -> Vec<Vec<usize>>
where
    S: Fn(usize, usize) -> Option<usize>,
{
    let mut comp_of = vec![usize::MAX; n];
    let comps = components(n, &succ);
    for (ci, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = ci;
        }
    }
    let mut out: Vec<Vec<usize>> = comps
        .into_iter()
        .enumerate()
        .filter(|(ci, c)| {
            let mut has_edge = false;
            for &v in c {
                let mut i = 0;
                while let Some(w) = succ(v, i) {
                    if comp_of[w] != *ci {
                        return false;
                    }
                    has_edge = true;
                    i += 1;
                }
            }
            has_edge
        })
        .map(|(_, mut c)| {
            c.sort_unstable();
            c
        })
        .collect();
    out.sort_unstable_by_key(|c| c[0]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn succ_of(adj: &[Vec<usize>]) -> impl Fn(usize, usize) -> Option<usize> + '_ {
        move |v, i| adj[v].get(i).copied()
    }

    fn normalized(mut comps: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        for c in &mut comps {
            c.sort_unstable();
        }
        comps.sort();
        comps
    }

    #[test]
    fn cycle_and_tail() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3
        let adj = vec![vec![1], vec![2], vec![1, 3], vec![]];
        let comps = normalized(components(4, succ_of(&adj)));
        assert_eq!(comps, vec![vec![0], vec![1, 2], vec![3]]);
        // 3 has no edges at all, so nothing is bottom
        assert!(bottom_components(4, succ_of(&adj)).is_empty());
    }

    #[test]
    fn emission_is_reverse_topological() {
        let adj = vec![vec![1], vec![2], vec![2]];
        let mut order = Vec::new();
        Tarjan::new().run(3, [0], succ_of(&adj), |c| order.push(c.to_vec()));
        assert_eq!(order, vec![vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn bottoms_need_an_edge() {
        let adj = vec![vec![0, 1], vec![2], vec![2], vec![1, 3]];
        assert_eq!(bottom_components(4, succ_of(&adj)), vec![vec![2]]);
    }

    #[test]
    fn long_chain_does_not_recurse() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        let comps = components(n, succ_of(&adj));
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), n);
    }
}
