use super::{PolySystem, VarId};

/// Dependency graph of a system: edge `(i, j)` iff `f_i` mentions `x_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepGraph {
    succ: Vec<Vec<VarId>>,
    /// SCCs in reverse topological order: dependencies come first.
    sccs: Vec<Vec<VarId>>,
    scc_of: Vec<usize>,
}

impl DepGraph {
    pub fn build(sys: &PolySystem) -> Self {
        let succ: Vec<Vec<VarId>> = sys
            .equations()
            .iter()
            .map(|poly| {
                let mut out: Vec<VarId> = poly.iter().flat_map(|m| m.vars()).collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        let sccs = tarjan(&succ);
        let mut scc_of = vec![0; succ.len()];
        for (k, scc) in sccs.iter().enumerate() {
            for &v in scc {
                scc_of[v] = k;
            }
        }
        DepGraph { succ, sccs, scc_of }
    }

    pub fn successors(&self, var: VarId) -> &[VarId] {
        &self.succ[var]
    }

    pub fn has_edge(&self, from: VarId, to: VarId) -> bool {
        self.succ[from].binary_search(&to).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, out)| out.iter().map(move |&j| (i, j)))
    }

    pub fn sccs(&self) -> &[Vec<VarId>] {
        &self.sccs
    }

    pub fn scc_of(&self, var: VarId) -> usize {
        self.scc_of[var]
    }

    /// A single variable without a self-loop.
    pub fn is_trivial(&self, scc: usize) -> bool {
        match self.sccs[scc].as_slice() {
            [v] => !self.has_edge(*v, *v),
            _ => false,
        }
    }

    pub fn num_nontrivial(&self) -> usize {
        (0..self.sccs.len()).filter(|&k| !self.is_trivial(k)).count()
    }

    /// SCC indices grouped so that every SCC only depends on SCCs in earlier
    /// groups. SCCs within one group are independent of each other.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let mut level = vec![0usize; self.sccs.len()];
        for (k, scc) in self.sccs.iter().enumerate() {
            let mut lvl = 0;
            for &v in scc {
                for &w in &self.succ[v] {
                    let other = self.scc_of[w];
                    if other != k {
                        lvl = lvl.max(level[other] + 1);
                    }
                }
            }
            level[k] = lvl;
        }
        let depth = level.iter().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); depth];
        for (k, &l) in level.iter().enumerate() {
            out[l].push(k);
        }
        out
    }
}

/// Iterative Tarjan. Components are emitted once everything reachable from
/// them has been emitted, which is exactly reverse topological order.
fn tarjan(succ: &[Vec<VarId>]) -> Vec<Vec<VarId>> {
    const UNVISITED: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut sccs = Vec::new();
    let mut next_index = 0;
    // (node, position of the next successor to visit)
    let mut call: Vec<(VarId, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut scc = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    scc.push(w);
                    if w == v {
                        break;
                    }
                }
                scc.sort_unstable();
                sccs.push(scc);
            }
        }
    }
    sccs
}
