use std::collections::BTreeSet;

use super::{Monomial, PolySystem, VarId};

/// Result of removing the variables whose least fixpoint component is zero.
#[derive(Debug, Clone)]
pub struct Cleaned {
    /// The clean system over the surviving variables.
    pub system: PolySystem,
    /// Variables (of the original system) with lfp component 0.
    pub zero_set: BTreeSet<VarId>,
    /// `kept[i]` is the original id of variable `i` of the clean system.
    pub kept: Vec<VarId>,
}

/// Positivity propagation: `x_i` is positive iff some monomial of `f_i` has
/// only positive variables. Linear in the size of the system.
pub(super) fn clean(sys: &PolySystem) -> Cleaned {
    let n = sys.dim();
    // For every (equation, monomial): number of distinct variables not yet known positive.
    let mut pending: Vec<Vec<usize>> = sys
        .equations()
        .iter()
        .map(|poly| poly.iter().map(|m| m.powers().len()).collect())
        .collect();
    let mut occurrences: Vec<Vec<(VarId, usize)>> = vec![Vec::new(); n];
    for (i, poly) in sys.equations().iter().enumerate() {
        for (k, m) in poly.iter().enumerate() {
            for v in m.vars() {
                occurrences[v].push((i, k));
            }
        }
    }
    let mut positive = vec![false; n];
    let mut queue: Vec<VarId> = Vec::new();
    for (i, counts) in pending.iter().enumerate() {
        if counts.contains(&0) {
            positive[i] = true;
            queue.push(i);
        }
    }
    while let Some(v) = queue.pop() {
        for &(i, k) in &occurrences[v] {
            pending[i][k] -= 1;
            if pending[i][k] == 0 && !positive[i] {
                positive[i] = true;
                queue.push(i);
            }
        }
    }

    let kept: Vec<VarId> = (0..n).filter(|&v| positive[v]).collect();
    let zero_set: BTreeSet<VarId> = (0..n).filter(|&v| !positive[v]).collect();
    let mut local = vec![usize::MAX; n];
    for (pos, &v) in kept.iter().enumerate() {
        local[v] = pos;
    }
    let equations = kept
        .iter()
        .map(|&v| {
            sys.equation(v)
                .iter()
                .filter(|m| m.vars().all(|w| positive[w]))
                .filter_map(|m| {
                    Monomial::new(
                        m.coeff().clone(),
                        m.powers().iter().map(|&(w, e)| (local[w], e)),
                    )
                })
                .collect()
        })
        .collect();
    let names = kept.iter().map(|&v| sys.name(v).to_string()).collect();
    let system = PolySystem::new(names, equations).expect("cleaned system stays valid");
    Cleaned {
        system,
        zero_set,
        kept,
    }
}
