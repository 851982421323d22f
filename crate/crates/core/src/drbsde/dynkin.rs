//! Exhaustive evaluation of the stopping game over every pair of stopping
//! times of the path tree.
//!
//! A stopping time on the subtree hanging from a history either stops at its
//! root or, failing that, is a tuple of stopping times on the child
//! subtrees. The subtree from a history only depends on the lattice node it
//! ends at, so stopping times are indexed per lattice node: index `0` stops
//! immediately and index `1 + m` continues with the mixed-radix digits of `m`
//! over the children (in transition order). Every pair of stopping times of
//! the whole path tree is evaluated, each value obtained by solving the
//! equation backward from the stopped payoff. The children's values for
//! every pair of sub-stopping times are shared through this indexing, which
//! keeps the enumeration affordable without pruning any pair.
//!
//! The same indexing covers predictable grid-valued controls: a control on a
//! subtree is the grid index used at its root followed by a control per
//! child subtree.

use rayon::prelude::*;

use super::{Barriers, PayoffSpec};
use crate::bsde::{check_contraction, implicit_step};
use crate::driver::Driver;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, NodeId};

/// Largest lattice accepted by [`dynkin_bruteforce`].
pub const MAX_DYNKIN_STEPS: usize = 4;
/// Cap on the number of game entries held at a single node.
pub const MAX_ENTRIES: u128 = 1 << 24;

/// How a stopping player is treated by [`stopping_game`].
#[derive(Debug, Clone, Copy)]
pub enum Player<'a> {
    /// Every stopping time of the path tree.
    Enumerate,
    /// A single rule: stop at the first node flagged `true` (node-indexed on
    /// the lattice). Maturity always stops.
    Rule(&'a [bool]),
}

/// Driver of the evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Control<'a> {
    Fixed(&'a Driver),
    /// Every predictable process valued in the given drivers.
    Enumerate(&'a [Driver]),
}

/// Game values at the root, laid out `[alpha][sigma][tau]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTensor {
    pub n_alpha: usize,
    pub n_sigma: usize,
    pub n_tau: usize,
    pub values: Vec<f64>,
}

impl GameTensor {
    #[inline]
    pub fn get(&self, a: usize, s: usize, t: usize) -> f64 {
        self.values[(a * self.n_sigma + s) * self.n_tau + t]
    }

    /// `max_τ` for each `(α, σ)`, with the lowest maximising `τ`.
    pub fn best_tau(&self) -> Vec<(f64, usize)> {
        self.values
            .chunks(self.n_tau)
            .map(|row| {
                let mut best = (row[0], 0);
                for (t, &v) in row.iter().enumerate().skip(1) {
                    if v > best.0 {
                        best = (v, t);
                    }
                }
                best
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Stop,
    Continue(usize),
}

struct Counts {
    tau: Vec<u128>,
    sigma: Vec<u128>,
    alpha: Vec<u128>,
}

fn player_counts(lattice: &Lattice, player: Player<'_>) -> Vec<u128> {
    let mut out = vec![1u128; lattice.len()];
    if let Player::Enumerate = player {
        for step in (0..lattice.n_steps()).rev() {
            for id in lattice.layer_ids(step) {
                let prod = lattice
                    .transitions(id)
                    .iter()
                    .fold(1u128, |acc, t| acc.saturating_mul(out[t.to.0]));
                out[id.0] = prod.saturating_add(1);
            }
        }
    }
    out
}

fn control_counts(lattice: &Lattice, control: Control<'_>) -> Vec<u128> {
    let mut out = vec![1u128; lattice.len()];
    if let Control::Enumerate(members) = control {
        for step in (0..lattice.n_steps()).rev() {
            for id in lattice.layer_ids(step) {
                let prod = lattice
                    .transitions(id)
                    .iter()
                    .fold(members.len() as u128, |acc, t| {
                        acc.saturating_mul(out[t.to.0])
                    });
                out[id.0] = prod;
            }
        }
    }
    out
}

fn decode_player(lattice: &Lattice, player: Player<'_>, id: NodeId, index: usize) -> Move {
    match player {
        Player::Enumerate => {
            if index == 0 {
                Move::Stop
            } else {
                Move::Continue(index - 1)
            }
        }
        Player::Rule(flags) => {
            if flags[id.0] || lattice.is_terminal(id) {
                Move::Stop
            } else {
                Move::Continue(0)
            }
        }
    }
}

/// Split a continuation index into per-child indices.
#[inline]
fn digits(mut m: usize, radices: impl Iterator<Item = usize>, out: &mut [usize]) {
    for (slot, r) in out.iter_mut().zip(radices) {
        *slot = m % r;
        m /= r;
    }
}

/// Evaluate the criterion `ξ_τ 1{τ<=σ} + ζ_σ 1{σ<τ}` for every
/// combination of control, cancellation time and exercise time.
pub fn stopping_game(
    lattice: &Lattice,
    control: Control<'_>,
    barriers: &Barriers,
    tau: Player<'_>,
    sigma: Player<'_>,
) -> Result<GameTensor> {
    let members: Vec<&Driver> = match control {
        Control::Fixed(d) => vec![d],
        Control::Enumerate(ds) => ds.iter().collect(),
    };
    if members.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for d in &members {
        check_contraction(lattice, d)?;
    }
    let counts = Counts {
        tau: player_counts(lattice, tau),
        sigma: player_counts(lattice, sigma),
        alpha: control_counts(lattice, control),
    };
    for id in lattice.ids() {
        let size = counts.tau[id.0]
            .saturating_mul(counts.sigma[id.0])
            .saturating_mul(counts.alpha[id.0]);
        if size > MAX_ENTRIES {
            return Err(Error::TooLarge(format!(
                "{size} game entries at node {} exceed the limit {MAX_ENTRIES}",
                id.0
            )));
        }
    }
    let enumerate_alpha = matches!(control, Control::Enumerate(_));
    let m = members.len();

    let mut tensors: Vec<Vec<f64>> = vec![Vec::new(); lattice.len()];
    for id in lattice.layer_ids(lattice.n_steps()) {
        tensors[id.0] = vec![barriers.xi[id.0]];
    }
    for step in (0..lattice.n_steps()).rev() {
        for id in lattice.layer_ids(step) {
            let i = id.0;
            let (na, ns, nt) = (
                counts.alpha[i] as usize,
                counts.sigma[i] as usize,
                counts.tau[i] as usize,
            );
            let ts = lattice.transitions(id);
            let ctx = lattice.context(id);
            let child_ids: Vec<usize> = ts.iter().map(|t| t.to.0).collect();
            let child_dims: Vec<(usize, usize, usize)> = child_ids
                .iter()
                .map(|&c| {
                    (
                        counts.alpha[c] as usize,
                        counts.sigma[c] as usize,
                        counts.tau[c] as usize,
                    )
                })
                .collect();
            let tensors_ref = &tensors;
            let values: Result<Vec<f64>> = (0..na * ns)
                .into_par_iter()
                .map(|as_idx| {
                    let a = as_idx / ns;
                    let s = as_idx % ns;
                    let nb = child_ids.len();
                    let mut ca = vec![0usize; nb];
                    let mut cs = vec![0usize; nb];
                    let mut ct = vec![0usize; nb];
                    let mut succ = vec![0.0; nb];
                    let (u, arest) = if enumerate_alpha {
                        (a % m, a / m)
                    } else {
                        (0, 0)
                    };
                    digits(arest, child_dims.iter().map(|d| d.0), &mut ca);
                    let smove = decode_player(lattice, sigma, id, s);
                    if let Move::Continue(r) = smove {
                        digits(r, child_dims.iter().map(|d| d.1), &mut cs);
                    }
                    let mut row = Vec::with_capacity(nt);
                    for t in 0..nt {
                        let v = match decode_player(lattice, tau, id, t) {
                            Move::Stop => barriers.xi[i],
                            Move::Continue(r) => match smove {
                                Move::Stop => barriers.zeta[i],
                                Move::Continue(_) => {
                                    digits(r, child_dims.iter().map(|d| d.2), &mut ct);
                                    for b in 0..nb {
                                        let (_, cns, cnt) = child_dims[b];
                                        let tensor = &tensors_ref[child_ids[b]];
                                        succ[b] = tensor[(ca[b] * cns + cs[b]) * cnt + ct[b]];
                                    }
                                    let reg = lattice.conditional_expectation(id, &succ);
                                    implicit_step(members[u], &ctx, reg.mean, reg.z, reg.k)?.0
                                }
                            },
                        };
                        row.push(v);
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<Vec<f64>>>>()
                .map(|rows| rows.concat());
            tensors[i] = values?;
        }
    }
    let root = lattice.root().0;
    Ok(GameTensor {
        n_alpha: counts.alpha[root] as usize,
        n_sigma: counts.sigma[root] as usize,
        n_tau: counts.tau[root] as usize,
        values: std::mem::take(&mut tensors[root]),
    })
}

/// Values of the stopping game by full enumeration.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DynkinResult {
    /// `sup_τ inf_σ`.
    pub sup_inf: f64,
    /// `inf_σ sup_τ`.
    pub inf_sup: f64,
    /// Index of a maximising exercise time (earliest on ties).
    pub tau_hat: usize,
    /// Index of a minimising cancellation time (earliest on ties).
    pub sigma_hat: usize,
    /// Number of stopping times of the path tree.
    pub n_stopping_times: usize,
}

pub fn dynkin_bruteforce(lattice: &Lattice, d: &Driver, p: &PayoffSpec) -> Result<DynkinResult> {
    if lattice.n_steps() > MAX_DYNKIN_STEPS {
        return Err(Error::TooLarge(format!(
            "brute force is limited to {MAX_DYNKIN_STEPS} steps, got {}",
            lattice.n_steps()
        )));
    }
    let b = p.barriers(lattice)?;
    let g = stopping_game(
        lattice,
        Control::Fixed(d),
        &b,
        Player::Enumerate,
        Player::Enumerate,
    )?;
    Ok(dynkin_from_tensor(&g))
}

fn dynkin_from_tensor(g: &GameTensor) -> DynkinResult {
    let (ns, nt) = (g.n_sigma, g.n_tau);
    let mut row_min = vec![f64::INFINITY; nt];
    let mut col_max = vec![f64::NEG_INFINITY; ns];
    for s in 0..ns {
        for t in 0..nt {
            let v = g.get(0, s, t);
            row_min[t] = row_min[t].min(v);
            col_max[s] = col_max[s].max(v);
        }
    }
    let mut tau_hat = 0;
    for t in 1..nt {
        if row_min[t] > row_min[tau_hat] {
            tau_hat = t;
        }
    }
    let mut sigma_hat = 0;
    for s in 1..ns {
        if col_max[s] < col_max[sigma_hat] {
            sigma_hat = s;
        }
    }
    DynkinResult {
        sup_inf: row_min[tau_hat],
        inf_sup: col_max[sigma_hat],
        tau_hat,
        sigma_hat,
        n_stopping_times: nt,
    }
}

/// Histories (branch indices from the root) at which the enumerated
/// stopping time with the given index stops.
pub fn stopping_histories(lattice: &Lattice, index: usize) -> Vec<Vec<usize>> {
    let counts = player_counts(lattice, Player::Enumerate);
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect(lattice, &counts, lattice.root(), index, &mut path, &mut out);
    out
}

fn collect(
    lattice: &Lattice,
    counts: &[u128],
    id: NodeId,
    index: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if index == 0 || lattice.is_terminal(id) {
        out.push(path.clone());
        return;
    }
    let ts = lattice.transitions(id);
    let mut digs = vec![0; ts.len()];
    digits(
        index - 1,
        ts.iter().map(|t| counts[t.to.0] as usize),
        &mut digs,
    );
    for (b, t) in ts.iter().enumerate() {
        path.push(b);
        collect(lattice, counts, t.to, digs[b], path, out);
        path.pop();
    }
}

/// Number of stopping times of the path tree.
pub fn count_stopping_times(lattice: &Lattice) -> u128 {
    player_counts(lattice, Player::Enumerate)[lattice.root().0]
}
