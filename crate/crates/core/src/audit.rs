//! Wiretap security of a concrete linear code.
//!
//! For a wiretap set `W` the eavesdropper sees `X_W = [A_W B_W] (M; N)`.
//! The observation is independent of `M` exactly when
//! `rank([A_W B_W]) = rank(B_W)`. [`audit_all`] applies that test to every
//! `z`-subset of base edges; [`entropy_oracle`] computes `I(M; X_W)` by
//! enumeration and is used to cross-check the rank test on small instances.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::GlobalEncoding;
use crate::field::{EchelonBasis, Matrix, PrimeField};
use crate::network::Network;

pub const DEFAULT_SUBSET_BUDGET: u128 = 10_000_000;
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("{subsets} wiretap subsets exceed the budget of {limit}")]
    SubsetBudget { subsets: u128, limit: u128 },
    #[error("{states} input states exceed the enumeration budget of {limit}")]
    EnumerationBudget { states: u128, limit: u128 },
    #[error("edge {0} appears twice in the wiretap set")]
    DuplicateEdge(usize),
    #[error("edge {edge} is not a wiretappable edge (there are {edges})")]
    EdgeOutOfRange { edge: usize, edges: usize },
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiretapMatrices {
    pub subset: Vec<usize>,
    /// `|W| × R`
    pub a_w: Matrix,
    /// `|W| × z`
    pub b_w: Matrix,
}

/// Rows of `[A_W | B_W]` for the edges of `subset`, in the order given.
/// Only the first `wiretappable` edges may be chosen; the star edges of `G*`
/// are not part of the network an eavesdropper can observe.
pub fn wiretap_matrices(
    enc: &GlobalEncoding,
    subset: &[usize],
    wiretappable: usize,
) -> Result<WiretapMatrices, AuditError> {
    let limit = wiretappable.min(enc.edge_count());
    let mut seen = vec![false; limit];
    for &e in subset {
        if e >= limit {
            return Err(AuditError::EdgeOutOfRange { edge: e, edges: limit });
        }
        if std::mem::replace(&mut seen[e], true) {
            return Err(AuditError::DuplicateEdge(e));
        }
    }
    let rows = enc.stack(subset);
    let r = enc.rate();
    Ok(WiretapMatrices {
        subset: subset.to_vec(),
        a_w: rows.column_block(0, r),
        b_w: rows.column_block(r, r + enc.keys()),
    })
}

/// `rank([A_W B_W]) == rank(B_W)`.
pub fn is_secure_subset(field: &PrimeField, wm: &WiretapMatrices) -> bool {
    let joint = wm.a_w.hstack(&wm.b_w).expect("same row count");
    field.rank(&joint) == field.rank(&wm.b_w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditOptions {
    /// refuse when `C(|E|, z)` exceeds this
    pub max_subsets: u128,
    /// keep going after the first violation and count them all
    pub exhaustive: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            max_subsets: DEFAULT_SUBSET_BUDGET,
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub subset: Vec<usize>,
    pub a_w: Matrix,
    pub b_w: Matrix,
    /// `rank([A_W B_W])`
    pub rank_joint: usize,
    /// `rank(B_W)`
    pub rank_key: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub secure: bool,
    pub wiretap: usize,
    pub subsets_checked: u128,
    /// number of insecure subsets found; at most 1 unless exhaustive
    pub violations: u128,
    pub first_violation: Option<Violation>,
}

/// Checks every wiretap set of `z` edges of `net` (the base network) in
/// lexicographic order.
///
/// When `z` exceeds the number of edges the eavesdropper sees everything and
/// the single full edge set is checked. Subsets are walked depth first with an
/// incremental echelon basis; since leakage can only grow as edges are added,
/// a leaking prefix settles every subset that extends it.
pub fn audit_all(
    enc: &GlobalEncoding,
    net: &Network,
    z: usize,
    opts: &AuditOptions,
) -> Result<SecurityReport, AuditError> {
    let universe = net.edge_count().min(enc.edge_count());
    let size = z.min(universe);
    let total = binomial(universe, size);
    if total > opts.max_subsets {
        return Err(AuditError::SubsetBudget {
            subsets: total,
            limit: opts.max_subsets,
        });
    }
    let width = enc.rate() + enc.keys();
    let mut walk = Walk {
        field: enc.field(),
        enc,
        universe,
        size,
        exhaustive: opts.exhaustive,
        joint: EchelonBasis::new(width),
        key: EchelonBasis::new(enc.keys()),
        subset: Vec::with_capacity(size),
        checked: 0,
        violations: 0,
        first: None,
    };
    walk.descend(0);
    let first_violation = walk.first.take().map(|subset| {
        let wm = wiretap_matrices(enc, &subset, universe).expect("subset is valid");
        let f = enc.field();
        Violation {
            rank_joint: f.rank(&wm.a_w.hstack(&wm.b_w).expect("same rows")),
            rank_key: f.rank(&wm.b_w),
            subset,
            a_w: wm.a_w,
            b_w: wm.b_w,
        }
    });
    Ok(SecurityReport {
        secure: first_violation.is_none(),
        wiretap: z,
        subsets_checked: walk.checked,
        violations: walk.violations,
        first_violation,
    })
}

struct Walk<'a> {
    field: PrimeField,
    enc: &'a GlobalEncoding,
    universe: usize,
    size: usize,
    exhaustive: bool,
    joint: EchelonBasis,
    key: EchelonBasis,
    subset: Vec<usize>,
    checked: u128,
    violations: u128,
    first: Option<Vec<usize>>,
}

impl Walk<'_> {
    fn leaking(&self) -> bool {
        self.joint.rank() > self.key.rank()
    }

    /// Returns true when the walk should stop.
    fn descend(&mut self, start: usize) -> bool {
        let depth = self.subset.len();
        if depth == self.size {
            self.checked += 1;
            if self.leaking() {
                self.violations += 1;
                self.first.get_or_insert_with(|| self.subset.clone());
                return !self.exhaustive;
            }
            return false;
        }
        let need = self.size - depth;
        for e in start..=self.universe - need {
            let (rj, rk) = (self.joint.rank(), self.key.rank());
            self.joint.insert(&self.field, self.enc.vector(e));
            self.key.insert(&self.field, self.enc.key_part(e));
            self.subset.push(e);
            let stop = if self.leaking() && need > 1 {
                // every completion leaks; the first one is prefix + e+1, e+2, ...
                let completions = binomial(self.universe - e - 1, need - 1);
                if self.first.is_none() {
                    let mut s = self.subset.clone();
                    s.extend(e + 1..e + need);
                    self.first = Some(s);
                }
                if self.exhaustive {
                    self.checked += completions;
                    self.violations += completions;
                    false
                } else {
                    self.checked += 1;
                    self.violations += 1;
                    true
                }
            } else {
                self.descend(e + 1)
            };
            self.subset.pop();
            self.joint.truncate(rj);
            self.key.truncate(rk);
            if stop {
                return true;
            }
        }
        false
    }
}

/// Exact leakage of a wiretap set, from the full joint distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leakage {
    /// the `(M, X_W)` count table factorises, i.e. `I(M; X_W) = 0` exactly
    pub independent: bool,
    /// `I(M; X_W)` in units of `log q`
    pub mutual_information: f64,
}

impl Leakage {
    pub fn is_zero(&self) -> bool {
        self.independent
    }
}

/// Enumerates every `(M, N)` in `F_q^(R+z)`, tabulates `(M, X_W)` and
/// computes `I(M; X_W) = H(M) + H(X_W) - H(M, X_W)`.
///
/// Independence is decided on integer counts:
/// `count(m, x) · total = count(m) · count(x)` for every `m` and `x`.
pub fn entropy_oracle(
    enc: &GlobalEncoding,
    subset: &[usize],
    max_states: u128,
) -> Result<Leakage, AuditError> {
    let f = enc.field();
    let q = f.q() as u128;
    let (r, width) = (enc.rate(), enc.rate() + enc.keys());
    let states = (0..width).try_fold(1u128, |acc, _| acc.checked_mul(q)).unwrap_or(u128::MAX);
    if states > max_states {
        return Err(AuditError::EnumerationBudget {
            states,
            limit: max_states,
        });
    }
    for &e in subset {
        if e >= enc.edge_count() {
            return Err(AuditError::EdgeOutOfRange {
                edge: e,
                edges: enc.edge_count(),
            });
        }
    }
    let rows = enc.stack(subset);
    let mut input = vec![0u64; width];
    let mut joint: HashMap<(Vec<u64>, Vec<u64>), u64> = HashMap::new();
    for _ in 0..states {
        let x: Vec<u64> = (0..rows.rows())
            .map(|i| {
                rows.row(i)
                    .iter()
                    .zip(&input)
                    .fold(0, |acc, (&g, &v)| f.add(acc, f.mul(g, v)))
            })
            .collect();
        *joint.entry((input[..r].to_vec(), x)).or_default() += 1;
        // next input, little-endian base q
        for v in input.iter_mut() {
            *v += 1;
            if *v < f.q() {
                break;
            }
            *v = 0;
        }
    }
    let mut by_message: HashMap<&[u64], u64> = HashMap::new();
    let mut by_observation: HashMap<&[u64], u64> = HashMap::new();
    for ((m, x), &c) in &joint {
        *by_message.entry(m).or_default() += c;
        *by_observation.entry(x).or_default() += c;
    }
    let total = states;
    let mut independent = joint.len() == by_message.len() * by_observation.len();
    if independent {
        for ((m, x), &c) in &joint {
            if c as u128 * total != by_message[m.as_slice()] as u128 * by_observation[x.as_slice()] as u128 {
                independent = false;
                break;
            }
        }
    }
    let ln_q = (f.q() as f64).ln();
    let n = total as f64;
    let mutual_information = if independent {
        0.0
    } else {
        joint
            .iter()
            .map(|((m, x), &c)| {
                let c = c as f64;
                let pm = by_message[m.as_slice()] as f64;
                let px = by_observation[x.as_slice()] as f64;
                (c / n) * (c * n / (pm * px)).ln() / ln_q
            })
            .sum()
    };
    Ok(Leakage {
        independent,
        mutual_information,
    })
}
