//! Independent check of DASW regions through qualitative MDP analysis.
//!
//! Fixing P2 to any randomized policy whose support is the permissive set turns
//! the hypergame into an MDP controlled by P1. Almost-sure reachability in an
//! MDP depends only on supports, so the winning set is the textbook
//!
//! ```text
//! νU. μR. target ∪ { v ∈ U | P1 owns v and some successor is in R }
//!                ∪ { v ∈ U | P2 owns v, every support successor is in U
//!                                       and some support successor is in R }
//! ```
//!
//! This module shares no fixed-point code with [`crate::dasw`] and uses plain
//! whole-set iteration on purpose.

use fixedbitset::FixedBitSet;

use crate::dasw::PermissiveTable;
use crate::game::Player;
use crate::hypergame::{Hypergame, VertexId};

/// Vertices from which P1 reaches a final vertex with probability one.
pub fn mdp_oracle(h: &Hypergame<'_>, perm: &PermissiveTable) -> FixedBitSet {
    let n = h.num_vertices();
    let target: Vec<bool> = (0..n).map(|i| h.is_final(VertexId(i as u32))).collect();
    let supports: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let v = VertexId(i as u32);
            match h.owner(v) {
                Player::P1 => h.succ(v).iter().map(|&(_, w)| w.index()).collect(),
                Player::P2 => {
                    let m = perm.support(h, v);
                    h.succ(v).iter().filter(|(b, _)| m.contains(*b)).map(|&(_, w)| w.index()).collect()
                }
            }
        })
        .collect();
    let p1: Vec<bool> = (0..n).map(|i| h.owner(VertexId(i as u32)) == Player::P1).collect();

    let mut u = vec![true; n];
    loop {
        let mut r = target.clone();
        loop {
            let mut grew = false;
            for v in 0..n {
                if r[v] || !u[v] {
                    continue;
                }
                let succ = &supports[v];
                let joins = if p1[v] {
                    succ.iter().any(|&w| r[w])
                } else {
                    succ.iter().all(|&w| u[w]) && succ.iter().any(|&w| r[w])
                };
                if joins {
                    r[v] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let next: Vec<bool> = (0..n).map(|v| u[v] && r[v]).collect();
        if next == u {
            break;
        }
        u = next;
    }
    let mut out = FixedBitSet::with_capacity(n);
    for (i, &b) in u.iter().enumerate() {
        out.set(i, b);
    }
    out
}
