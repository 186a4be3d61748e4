//! Intra-contract call graph and unrestricted-entry reachability. Edges
//! stay within one contract; reaching code through another contract is out
//! of scope for the function-local analysis this models.

use super::FnModel;
use crate::ast::{stmt_exprs, walk_stmts, ExprKind, Visibility};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, Default)]
pub struct CallGraph {
    /// Caller function index -> callee indices.
    pub edges: BTreeMap<usize, BTreeSet<usize>>,
    /// Public/external functions with no caller restriction.
    pub entry_points: BTreeSet<usize>,
    /// Entry points plus everything transitively callable from them.
    pub reachable: BTreeSet<usize>,
}

pub fn build_call_graph(functions: &[FnModel]) -> CallGraph {
    let index_by_name: BTreeMap<&str, usize> = functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name(), i))
        .collect();

    let mut edges: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, f) in functions.iter().enumerate() {
        let Some(body) = &f.def.body else { continue };
        let mut callees = BTreeSet::new();
        walk_stmts(body, &mut |s| {
            stmt_exprs(s, &mut |e| {
                if let ExprKind::Call { callee, .. } = &e.kind {
                    let name = match &callee.kind {
                        ExprKind::Ident(n) => Some(n.as_str()),
                        ExprKind::Member { base, name } if base.ident() == Some("this") => {
                            Some(name.as_str())
                        }
                        _ => None,
                    };
                    if let Some(n) = name {
                        if let Some(target) = index_by_name.get(n) {
                            callees.insert(*target);
                        }
                    }
                }
            });
        });
        if !callees.is_empty() {
            edges.insert(i, callees);
        }
    }

    let entry_points: BTreeSet<usize> = functions
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            f.def.body.is_some()
                && matches!(f.visibility, Visibility::Public | Visibility::External)
                && !f.restriction.restricted
        })
        .map(|(i, _)| i)
        .collect();

    let mut reachable = entry_points.clone();
    let mut queue: VecDeque<usize> = entry_points.iter().copied().collect();
    while let Some(i) = queue.pop_front() {
        for callee in edges.get(&i).into_iter().flatten() {
            if reachable.insert(*callee) {
                queue.push_back(*callee);
            }
        }
    }

    CallGraph {
        edges,
        entry_points,
        reachable,
    }
}

impl CallGraph {
    /// Is the function an unrestricted entry point, or callable from one?
    pub fn reachable_from_unrestricted(&self, fn_index: usize) -> bool {
        self.reachable.contains(&fn_index)
    }
}
