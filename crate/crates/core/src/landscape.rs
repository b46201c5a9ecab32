//! Exact analysis of the energy landscape on enumerable grids.
//!
//! The hard-core configurations are in one-to-one correspondence with the
//! independent sets of the grid, enumerated here by backtracking with
//! neighbor masks. On top of the enumerated index this module computes:
//!
//! - communication heights Φ(·,·) — minimax path energies — by a
//!   Kruskal-style union-find sweep over states in increasing energy: Φ(A,B)
//!   is the lowest level at which A and B join, and one sweep resolves
//!   Φ(σ, T) for every σ simultaneously;
//! - the structural report: the stable set, the pairwise barriers
//!   Φ(x,y) − H(x) = min{K,2L}+1, the depth bound
//!   Φ(σ,{a,b,c}) − H(σ) ≤ min{K,2L} outside the stable set, and the
//!   absence-of-deep-cycles conditions used by the hitting-time framework;
//! - exact expected hitting times and absorption probabilities from the
//!   linear system (I − P_restricted) t = 1 (dense LU for small spaces,
//!   conjugate gradients on the symmetrized operator above that);
//! - the spectral gap ρ_β = 1 − α₂ via deflated power iteration on the
//!   lazy symmetrized kernel, and the exact total-variation mixing time by
//!   matrix-power doubling plus binary lifting.
//!
//! Reversibility makes the symmetrization cheap: with D = diag(μ_β), the
//! conjugated kernel D^{1/2} P D^{−1/2} has constant off-diagonal
//! e^{−β/2}/N on every move edge, so all iterative kernels run on the move
//! adjacency alone.

use crate::config::{stable_configs, Configuration};
use crate::dynamics::derive_rng;
use crate::lattice::{Component, Grid};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Default ceiling on grid size for exact enumeration.
pub const DEFAULT_ENUM_LIMIT: usize = 30;

/// Default ceiling on state count for dense solves and matrix powers.
pub const DEFAULT_DENSE_LIMIT: usize = 1500;

#[derive(Debug, Error, PartialEq)]
pub enum LandscapeError {
    #[error(
        "grid has {n} sites, above the enumeration limit {limit}; \
         use the Monte Carlo mode (simulate/campaign) for grids this large"
    )]
    TooLarge { n: usize, limit: usize },
    #[error("communication height requires nonempty disjoint state sets")]
    BadSets,
    #[error("state id {0} out of range")]
    BadStateId(u32),
    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} iterations")]
    EigNotConverged { iterations: u64, residual: f64 },
    #[error("linear solve did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolveNotConverged { iterations: u64, residual: f64 },
    #[error("mixing-time iteration exceeded the step cap {0}")]
    MixingTruncated(u64),
    #[error("eps must lie strictly between 0 and 1, got {0}")]
    BadEps(f64),
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// The enumerated state space: states as site bitmasks, energies, and the
/// single-site move relation in CSR form. Immutable once built.
pub struct LandscapeIndex {
    grid: Grid,
    states: Vec<u64>,
    energy: Vec<i32>,
    move_off: Vec<u32>,
    move_to: Vec<u32>,
    id_of: HashMap<u64, u32>,
    stable: [u32; 3],
}

/// Enumerates all hard-core configurations with the default size limit.
pub fn enumerate(grid: &Grid) -> Result<LandscapeIndex, LandscapeError> {
    enumerate_with_limit(grid, DEFAULT_ENUM_LIMIT)
}

/// Enumerates all hard-core configurations of grids with at most `limit`
/// sites (limit ≤ 64: states are packed into u64 masks).
pub fn enumerate_with_limit(grid: &Grid, limit: usize) -> Result<LandscapeIndex, LandscapeError> {
    let n = grid.n_sites();
    if n > limit.min(64) {
        return Err(LandscapeError::TooLarge {
            n,
            limit: limit.min(64),
        });
    }

    let nbr: Vec<u64> = (0..n)
        .map(|v| grid.neighbor_mask(v).words()[0])
        .collect();

    // Depth-first over sites: either leave site v vacant or occupy it when
    // it is not blocked by an earlier particle.
    let mut states = Vec::new();
    let mut stack = vec![(0usize, 0u64, 0u64)];
    while let Some((v, cur, blocked)) = stack.pop() {
        if v == n {
            states.push(cur);
            continue;
        }
        if blocked >> v & 1 == 0 {
            stack.push((v + 1, cur | 1 << v, blocked | nbr[v]));
        }
        stack.push((v + 1, cur, blocked));
    }
    states.sort_unstable();

    let id_of: HashMap<u64, u32> = states
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i as u32))
        .collect();
    let energy: Vec<i32> = states.iter().map(|&s| -(s.count_ones() as i32)).collect();

    let mut move_off = Vec::with_capacity(states.len() + 1);
    let mut move_to = Vec::new();
    move_off.push(0u32);
    for &s in &states {
        for v in 0..n {
            let target = if s >> v & 1 == 1 {
                Some(s & !(1 << v))
            } else if s & nbr[v] == 0 {
                Some(s | 1 << v)
            } else {
                None
            };
            if let Some(t) = target {
                move_to.push(id_of[&t]);
            }
        }
        move_off.push(move_to.len() as u32);
    }

    let stable = stable_configs(grid).map(|c| id_of[&c.bits().words()[0]]);

    Ok(LandscapeIndex {
        grid: grid.clone(),
        states,
        energy,
        move_off,
        move_to,
        id_of,
        stable,
    })
}

impl LandscapeIndex {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn energy(&self, id: u32) -> i64 {
        self.energy[id as usize] as i64
    }

    pub fn moves(&self, id: u32) -> &[u32] {
        let (lo, hi) = (
            self.move_off[id as usize] as usize,
            self.move_off[id as usize + 1] as usize,
        );
        &self.move_to[lo..hi]
    }

    pub fn state_bits(&self, id: u32) -> u64 {
        self.states[id as usize]
    }

    pub fn configuration(&self, id: u32) -> Configuration {
        Configuration::from_bits(crate::bits::SiteSet::from_u64(
            self.grid.n_sites(),
            self.states[id as usize],
        ))
    }

    pub fn id_of(&self, cfg: &Configuration) -> Option<u32> {
        self.id_of.get(&cfg.bits().words()[0]).copied()
    }

    /// Ids of (a, b, c).
    pub fn stable_ids(&self) -> [u32; 3] {
        self.stable
    }

    pub fn stable_id(&self, c: Component) -> u32 {
        self.stable[c.index()]
    }

    /// Ids attaining the global energy minimum.
    pub fn minima(&self) -> Vec<u32> {
        let min = *self.energy.iter().min().expect("nonempty state space");
        (0..self.len() as u32)
            .filter(|&i| self.energy[i as usize] == min)
            .collect()
    }

    /// (energy, count) histogram, ascending in energy.
    pub fn energy_histogram(&self) -> Vec<(i64, usize)> {
        let mut hist: HashMap<i64, usize> = HashMap::new();
        for &e in &self.energy {
            *hist.entry(e as i64).or_default() += 1;
        }
        let mut out: Vec<_> = hist.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Unnormalized Gibbs weights e^{−β(H − H_min)} and their sum.
    fn gibbs_weights(&self, beta: f64) -> (Vec<f64>, f64) {
        let h_min = *self.energy.iter().min().unwrap() as f64;
        let w: Vec<f64> = self
            .energy
            .iter()
            .map(|&h| (-beta * (h as f64 - h_min)).exp())
            .collect();
        let z = w.iter().sum();
        (w, z)
    }

    /// Stationary distribution μ_β.
    pub fn stationary(&self, beta: f64) -> Vec<f64> {
        let (mut w, z) = self.gibbs_weights(beta);
        for x in &mut w {
            *x /= z;
        }
        w
    }
}

// ---------------------------------------------------------------------------
// Communication heights (minimax sweep)
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    has_target: Vec<bool>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        Self {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
            has_target: vec![false; len],
        }
    }

    fn find(&mut self, mut id: u32) -> u32 {
        let mut root = id;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[id as usize] != root {
            let next = self.parent[id as usize];
            self.parent[id as usize] = root;
            id = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.has_target[big as usize] =
            self.has_target[big as usize] || self.has_target[small as usize];
    }
}

/// Φ(σ, T) for every state σ in one sweep: states are activated level by
/// level in increasing energy (ties in one batch); Φ(σ, T) is the first
/// level at which σ's component contains a state of T. Φ(σ, T) = H(σ) for
/// σ ∈ T.
pub fn comm_heights_to_set(index: &LandscapeIndex, targets: &[u32]) -> Vec<i64> {
    let n = index.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by_key(|&i| index.energy[i as usize]);

    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t as usize] = true;
    }

    let mut uf = UnionFind::new(n);
    let mut active = vec![false; n];
    let mut phi = vec![i64::MAX; n];
    let mut pending: Vec<u32> = Vec::new();

    let mut pos = 0;
    while pos < n {
        let level = index.energy[order[pos] as usize];
        let mut end = pos;
        while end < n && index.energy[order[end] as usize] == level {
            end += 1;
        }
        // Activate the whole level, then wire it to the active sublevel.
        for &id in &order[pos..end] {
            active[id as usize] = true;
            if is_target[id as usize] {
                let r = uf.find(id);
                uf.has_target[r as usize] = true;
            }
            pending.push(id);
        }
        for &id in &order[pos..end] {
            for k in index.move_off[id as usize]..index.move_off[id as usize + 1] {
                let to = index.move_to[k as usize];
                if active[to as usize] {
                    uf.union(id, to);
                }
            }
        }
        pending.retain(|&id| {
            let r = uf.find(id);
            if uf.has_target[r as usize] {
                phi[id as usize] = level as i64;
                false
            } else {
                true
            }
        });
        pos = end;
    }
    debug_assert!(pending.is_empty(), "move graph must be connected");
    phi
}

/// Φ(A, B) = min over paths of the maximum energy; sets must be nonempty
/// and disjoint.
pub fn comm_height(
    index: &LandscapeIndex,
    a: &[u32],
    b: &[u32],
) -> Result<i64, LandscapeError> {
    if a.is_empty() || b.is_empty() || a.iter().any(|x| b.contains(x)) {
        return Err(LandscapeError::BadSets);
    }
    for &id in a.iter().chain(b) {
        if id as usize >= index.len() {
            return Err(LandscapeError::BadStateId(id));
        }
    }
    let phi = comm_heights_to_set(index, b);
    Ok(a.iter().map(|&s| phi[s as usize]).min().unwrap())
}

// ---------------------------------------------------------------------------
// Structural verification
// ---------------------------------------------------------------------------

/// Exhaustive landscape report: stable set, pairwise barriers, depth bound,
/// and the two sufficient conditions of the hitting-time framework for the
/// pairs (a,{b,c}) and (a,{b}).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureReport {
    pub schema_version: u32,
    pub k: usize,
    pub l: usize,
    pub n_states: usize,
    /// Expected barrier Γ = min{K,2L}+1.
    pub gamma: i64,
    pub stable_ids: Vec<u32>,
    /// Clause (i): the global minima are exactly {a,b,c}.
    pub stable_is_abc: bool,
    pub phi_gap_ab: i64,
    pub phi_gap_ac: i64,
    pub phi_gap_bc: i64,
    /// Clause (ii): all three pairwise gaps equal Γ.
    pub pairwise_gaps_equal_gamma: bool,
    /// max over σ ∉ {a,b,c} of Φ(σ,{a,b,c}) − H(σ).
    pub max_depth_outside: i64,
    /// Clause (iii): max_depth_outside ≤ Γ − 1.
    pub depth_bound_ok: bool,
    /// Absence of deep cycles for (a,{b,c}): the barrier of a towards
    /// {b,c} is maximal over the landscape.
    pub cond_pe_a_bc: bool,
    /// Absence of deep cycles for (a,{b}).
    pub cond_pe_a_b: bool,
    /// Faster-recurrence condition for (a,{b,c}).
    pub cond_ae_a_bc: bool,
    /// Faster-recurrence condition for (a,{b}); fails on every grid due to
    /// the deep cycle around c.
    pub cond_ae_a_b: bool,
    /// All clauses agree with the theory: (i)–(iii) and both PE conditions
    /// hold, AE holds for (a,{b,c}) and fails for (a,{b}).
    pub theory_consistent: bool,
}

fn max_gap_outside(index: &LandscapeIndex, phi: &[i64], exclude: &[u32]) -> i64 {
    (0..index.len() as u32)
        .filter(|id| !exclude.contains(id))
        .map(|id| phi[id as usize] - index.energy(id))
        .max()
        .expect("at least one state outside the excluded set")
}

/// Runs the full exhaustive verification on an enumerated index.
pub fn verify_structure(index: &LandscapeIndex) -> StructureReport {
    let spec = index.grid().spec();
    let gamma = spec.gamma();
    let [a, b, c] = index.stable_ids();
    let h_a = index.energy(a);

    let minima = index.minima();
    let mut sorted_abc = vec![a, b, c];
    sorted_abc.sort_unstable();
    let stable_is_abc = {
        let mut m = minima.clone();
        m.sort_unstable();
        m == sorted_abc
    };

    let phi_b = comm_heights_to_set(index, &[b]);
    let phi_bc = comm_heights_to_set(index, &[b, c]);
    let phi_abc = comm_heights_to_set(index, &[a, b, c]);
    let phi_ab_set = comm_heights_to_set(index, &[a, b]);
    let phi_c = comm_heights_to_set(index, &[c]);

    let phi_gap_ab = phi_b[a as usize] - h_a;
    let phi_gap_ac = phi_c[a as usize] - h_a;
    let phi_gap_bc = phi_c[b as usize] - index.energy(b);
    let pairwise_gaps_equal_gamma =
        phi_gap_ab == gamma && phi_gap_ac == gamma && phi_gap_bc == gamma;

    let max_depth_outside = max_gap_outside(index, &phi_abc, &[a, b, c]);
    let depth_bound_ok = max_depth_outside <= gamma - 1;

    // (3.1)-style: Φ(a,A) − H(a) = max over η ∉ A of Φ(η,A) − H(η).
    let cond_pe_a_bc = phi_bc[a as usize] - h_a == max_gap_outside(index, &phi_bc, &[b, c]);
    let cond_pe_a_b = phi_b[a as usize] - h_a == max_gap_outside(index, &phi_b, &[b]);

    // (3.2)-style: Φ(a,A) − H(a) > max over η ∉ A∪{a} of Φ(η,A∪{a}) − H(η).
    let cond_ae_a_bc = phi_bc[a as usize] - h_a > max_gap_outside(index, &phi_abc, &[a, b, c]);
    let cond_ae_a_b = phi_b[a as usize] - h_a > max_gap_outside(index, &phi_ab_set, &[a, b]);

    let theory_consistent = stable_is_abc
        && pairwise_gaps_equal_gamma
        && depth_bound_ok
        && cond_pe_a_bc
        && cond_pe_a_b
        && cond_ae_a_bc
        && !cond_ae_a_b;

    StructureReport {
        schema_version: 1,
        k: spec.k,
        l: spec.l,
        n_states: index.len(),
        gamma,
        stable_ids: sorted_abc,
        stable_is_abc,
        phi_gap_ab,
        phi_gap_ac,
        phi_gap_bc,
        pairwise_gaps_equal_gamma,
        max_depth_outside,
        depth_bound_ok,
        cond_pe_a_bc,
        cond_pe_a_b,
        cond_ae_a_bc,
        cond_ae_a_b,
        theory_consistent,
    }
}

// ---------------------------------------------------------------------------
// Transition matrix and exact hitting times
// ---------------------------------------------------------------------------

/// P_β in CSR form over the enumerated states (off-diagonal entries on
/// move edges plus an explicit diagonal).
pub struct TransitionMatrix {
    pub n: usize,
    pub row_off: Vec<u32>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
    pub diag: Vec<f64>,
}

pub fn transition_matrix(index: &LandscapeIndex, beta: f64) -> TransitionMatrix {
    let n = index.len();
    let inv_n = 1.0 / index.grid().n_sites() as f64;
    let e = (-beta).exp();
    let mut val = Vec::with_capacity(index.move_to.len());
    let mut diag = Vec::with_capacity(n);
    for i in 0..n as u32 {
        let mut out = 0.0;
        for &j in index.moves(i) {
            let p = if index.energy(j) > index.energy(i) {
                inv_n * e
            } else {
                inv_n
            };
            val.push(p);
            out += p;
        }
        diag.push(1.0 - out);
    }
    TransitionMatrix {
        n,
        row_off: index.move_off.clone(),
        col: index.move_to.clone(),
        val,
        diag,
    }
}

impl TransitionMatrix {
    /// Row-vector product x ↦ xP (distribution update).
    pub fn apply_left(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..self.n {
            out[j] = x[j] * self.diag[j];
        }
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for k in self.row_off[i] as usize..self.row_off[i + 1] as usize {
                out[self.col[k] as usize] += xi * self.val[k];
            }
        }
    }

    /// Dense row-major copy; caller is responsible for sizing.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            m[i * self.n + i] = self.diag[i];
            for k in self.row_off[i] as usize..self.row_off[i + 1] as usize {
                m[i * self.n + self.col[k] as usize] = self.val[k];
            }
        }
        m
    }
}

/// Dense LU solve with partial pivoting; `a` is row-major n×n and is
/// consumed. Panics on zero pivot, which irreducibility rules out here.
fn lu_solve(mut a: Vec<f64>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    debug_assert_eq!(a.len(), n * n);
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&i, &j| {
                a[i * n + k]
                    .abs()
                    .partial_cmp(&a[j * n + k].abs())
                    .unwrap()
            })
            .unwrap();
        if pivot_row != k {
            for c in 0..n {
                a.swap(k * n + c, pivot_row * n + c);
            }
            rhs.swap(k, pivot_row);
        }
        let pivot = a[k * n + k];
        assert!(pivot.abs() > 0.0, "singular system");
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            a[i * n + k] = 0.0;
            for c in k + 1..n {
                a[i * n + c] -= f * a[k * n + c];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for c in i + 1..n {
            s -= a[i * n + c] * rhs[c];
        }
        rhs[i] = s / a[i * n + i];
    }
    rhs
}

/// The symmetrized restricted operator y = (I − S_R) x, where S is the
/// conjugated kernel with constant off-diagonal e^{−β/2}/N on move edges
/// and R drops the target states.
struct RestrictedSym<'a> {
    index: &'a LandscapeIndex,
    keep: Vec<u32>,
    pos: Vec<i64>,
    diag: Vec<f64>,
    off: f64,
}

impl<'a> RestrictedSym<'a> {
    fn new(index: &'a LandscapeIndex, beta: f64, targets: &[u32]) -> Self {
        let n = index.len();
        let tm = transition_matrix(index, beta);
        let mut pos = vec![-1i64; n];
        let mut keep = Vec::new();
        for id in 0..n as u32 {
            if !targets.contains(&id) {
                pos[id as usize] = keep.len() as i64;
                keep.push(id);
            }
        }
        let diag = keep.iter().map(|&id| tm.diag[id as usize]).collect();
        RestrictedSym {
            index,
            keep,
            pos,
            diag,
            off: (-beta / 2.0).exp() / index.grid().n_sites() as f64,
        }
    }

    fn len(&self) -> usize {
        self.keep.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (r, &id) in self.keep.iter().enumerate() {
            let mut acc = (1.0 - self.diag[r]) * x[r];
            for &j in self.index.moves(id) {
                let p = self.pos[j as usize];
                if p >= 0 {
                    acc -= self.off * x[p as usize];
                }
            }
            out[r] = acc;
        }
    }
}

/// Conjugate gradients on the SPD system (I − S_R) y = rhs.
fn cg_solve(
    op: &RestrictedSym,
    rhs: &[f64],
    tol: f64,
    max_iter: u64,
) -> Result<Vec<f64>, LandscapeError> {
    let m = rhs.len();
    let mut x = vec![0.0; m];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; m];
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    for it in 0..max_iter {
        if rs.sqrt() <= tol * rhs_norm {
            return Ok(x);
        }
        op.apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rs / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
        if it == max_iter - 1 {
            break;
        }
    }
    Err(LandscapeError::SolveNotConverged {
        iterations: max_iter,
        residual: rs.sqrt() / rhs_norm,
    })
}

/// Expected hitting times E_σ τ_T for every non-target σ, as a full vector
/// indexed by state id (targets get 0). Dense LU below
/// [`DEFAULT_DENSE_LIMIT`] states, symmetrized CG above.
pub fn mean_hitting_times(
    index: &LandscapeIndex,
    beta: f64,
    targets: &[u32],
) -> Result<Vec<f64>, LandscapeError> {
    if targets.is_empty() {
        return Err(LandscapeError::BadSets);
    }
    let op = RestrictedSym::new(index, beta, targets);
    let m = op.len();
    let mut out = vec![0.0; index.len()];
    if m == 0 {
        return Ok(out);
    }

    if m <= DEFAULT_DENSE_LIMIT {
        // Unsymmetrized dense system (I − P_R) t = 1.
        let tm = transition_matrix(index, beta);
        let mut a = vec![0.0; m * m];
        for (r, &id) in op.keep.iter().enumerate() {
            a[r * m + r] = 1.0 - tm.diag[id as usize];
            for k in tm.row_off[id as usize] as usize..tm.row_off[id as usize + 1] as usize {
                let p = op.pos[tm.col[k] as usize];
                if p >= 0 {
                    a[r * m + p as usize] -= tm.val[k];
                }
            }
        }
        let t = lu_solve(a, vec![1.0; m]);
        for (r, &id) in op.keep.iter().enumerate() {
            out[id as usize] = t[r];
        }
    } else {
        // Symmetrized: (I − S_R)(w∘t) = w with w = e^{−βH/2} (shifted).
        let h_min = op
            .keep
            .iter()
            .map(|&id| index.energy(id))
            .min()
            .unwrap() as f64;
        let w: Vec<f64> = op
            .keep
            .iter()
            .map(|&id| (-beta * (index.energy(id) as f64 - h_min) / 2.0).exp())
            .collect();
        let y = cg_solve(&op, &w, 1e-13, 200_000)?;
        for (r, &id) in op.keep.iter().enumerate() {
            out[id as usize] = y[r] / w[r];
        }
    }
    Ok(out)
}

/// E_start τ_targets; solves the absorbing linear system exactly.
pub fn exact_mean_hitting(
    index: &LandscapeIndex,
    beta: f64,
    start: u32,
    targets: &[u32],
) -> Result<f64, LandscapeError> {
    if targets.contains(&start) {
        return Err(LandscapeError::BadSets);
    }
    Ok(mean_hitting_times(index, beta, targets)?[start as usize])
}

/// Absorption distribution: probability of entering `targets[k]` first,
/// for each k, starting from `start`.
pub fn hitting_distribution(
    index: &LandscapeIndex,
    beta: f64,
    start: u32,
    targets: &[u32],
) -> Result<Vec<f64>, LandscapeError> {
    if targets.is_empty() || targets.contains(&start) {
        return Err(LandscapeError::BadSets);
    }
    let op = RestrictedSym::new(index, beta, targets);
    let m = op.len();
    let tm = transition_matrix(index, beta);

    let rhs_for = |target: u32| -> Vec<f64> {
        let mut rhs = vec![0.0; m];
        for (r, &id) in op.keep.iter().enumerate() {
            for k in tm.row_off[id as usize] as usize..tm.row_off[id as usize + 1] as usize {
                if tm.col[k] == target {
                    rhs[r] += tm.val[k];
                }
            }
        }
        rhs
    };

    let mut result = Vec::with_capacity(targets.len());
    if m <= DEFAULT_DENSE_LIMIT {
        let mut a = vec![0.0; m * m];
        for (r, &id) in op.keep.iter().enumerate() {
            a[r * m + r] = 1.0 - tm.diag[id as usize];
            for k in tm.row_off[id as usize] as usize..tm.row_off[id as usize + 1] as usize {
                let p = op.pos[tm.col[k] as usize];
                if p >= 0 {
                    a[r * m + p as usize] -= tm.val[k];
                }
            }
        }
        for &t in targets {
            let h = lu_solve(a.clone(), rhs_for(t));
            result.push(h[op.pos[start as usize] as usize]);
        }
    } else {
        let h_min = op.keep.iter().map(|&id| index.energy(id)).min().unwrap() as f64;
        let w: Vec<f64> = op
            .keep
            .iter()
            .map(|&id| (-beta * (index.energy(id) as f64 - h_min) / 2.0).exp())
            .collect();
        for &t in targets {
            let rhs: Vec<f64> = rhs_for(t)
                .into_iter()
                .zip(&w)
                .map(|(r, wi)| r * wi)
                .collect();
            let y = cg_solve(&op, &rhs, 1e-13, 200_000)?;
            let p = op.pos[start as usize] as usize;
            result.push(y[p] / w[p]);
        }
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Spectral gap
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralGap {
    pub rho: f64,
    pub alpha2: f64,
    pub iterations: u64,
    pub residual: f64,
}

/// ρ_β = 1 − α₂ by deflated power iteration on the lazy symmetrized kernel
/// B = (I + S)/2 (the lazification keeps the ordering of eigenvalues while
/// making B positive semidefinite). The top eigenvector of S is known
/// exactly — D^{1/2}·1 — so only one deflation is needed.
pub fn spectral_gap(index: &LandscapeIndex, beta: f64) -> Result<SpectralGap, LandscapeError> {
    spectral_gap_with(index, beta, 1e-10, 20_000_000)
}

pub fn spectral_gap_with(
    index: &LandscapeIndex,
    beta: f64,
    tol: f64,
    max_iter: u64,
) -> Result<SpectralGap, LandscapeError> {
    let n = index.len();
    let tm = transition_matrix(index, beta);
    let off = (-beta / 2.0).exp() / index.grid().n_sites() as f64;

    let apply_b = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut acc = (1.0 + tm.diag[i]) * x[i];
            for k in tm.row_off[i] as usize..tm.row_off[i + 1] as usize {
                acc += off * x[tm.col[k] as usize];
            }
            out[i] = acc / 2.0;
        }
    };

    // Exact top eigenvector of S (and of B, eigenvalue 1).
    let h_min = *index.energy.iter().min().unwrap() as f64;
    let mut v1: Vec<f64> = index
        .energy
        .iter()
        .map(|&h| (-beta * (h as f64 - h_min) / 2.0).exp())
        .collect();
    let norm = v1.iter().map(|v| v * v).sum::<f64>().sqrt();
    v1.iter_mut().for_each(|v| *v /= norm);

    let mut rng = derive_rng(0x5eed_ba5e_0f1e_57a7, 17, 0);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| p * q).sum() };
    let proj = dot(&x, &v1);
    for i in 0..n {
        x[i] -= proj * v1[i];
    }
    let nx = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= nx);

    let mut y = vec![0.0; n];
    for it in 1..=max_iter {
        apply_b(&x, &mut y);
        let p1 = dot(&y, &v1);
        for i in 0..n {
            y[i] -= p1 * v1[i];
        }
        let theta = dot(&x, &y);
        let mut res = 0.0;
        for i in 0..n {
            let d = y[i] - theta * x[i];
            res += d * d;
        }
        let res = res.sqrt();
        if res <= tol {
            let alpha2 = 2.0 * theta - 1.0;
            return Ok(SpectralGap {
                rho: 1.0 - alpha2,
                alpha2,
                iterations: it,
                residual: res,
            });
        }
        let ny = dot(&y, &y).sqrt();
        for i in 0..n {
            x[i] = y[i] / ny;
        }
    }
    Err(LandscapeError::EigNotConverged {
        iterations: max_iter,
        residual: f64::NAN,
    })
}

// ---------------------------------------------------------------------------
// Mixing time
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixingMode {
    /// Worst case over every start state (exact definition).
    ExactAllStarts,
    /// Worst case over {a, b, c, empty} only; a lower bound on the true
    /// mixing time, used above the dense size limit.
    LowerBoundSubsetStarts,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MixingResult {
    pub n: u64,
    pub mode: MixingMode,
    pub max_tv_at_n: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MixingOptions {
    pub dense_limit: usize,
    pub cap: u64,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            dense_limit: DEFAULT_DENSE_LIMIT,
            cap: 1 << 42,
        }
    }
}

fn max_tv_rows(m: &[f64], mu: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|i| {
            0.5 * m[i * n..(i + 1) * n]
                .iter()
                .zip(mu)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row_b = &b[k * n..(k + 1) * n];
            let row_c = &mut c[i * n..(i + 1) * n];
            for (cv, bv) in row_c.iter_mut().zip(row_b) {
                *cv += aik * bv;
            }
        }
    }
    c
}

/// t_mix(ε): the first n with max_σ ‖P^n(σ,·) − μ‖_TV ≤ ε. Matrix-power
/// doubling finds the bracketing power of two, binary lifting then pins the
/// exact n. Above the dense limit, distribution vectors are iterated from
/// {a, b, c, empty} instead and the result is flagged as a lower bound.
pub fn mixing_time(
    index: &LandscapeIndex,
    beta: f64,
    eps: f64,
    opts: MixingOptions,
) -> Result<MixingResult, LandscapeError> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(LandscapeError::BadEps(eps));
    }
    let n = index.len();
    let mu = index.stationary(beta);
    let tm = transition_matrix(index, beta);

    if n <= opts.dense_limit {
        let p = tm.to_dense();
        let tv_at_zero = max_tv_rows(&identity(n), &mu, n);
        if tv_at_zero <= eps {
            return Ok(MixingResult {
                n: 0,
                mode: MixingMode::ExactAllStarts,
                max_tv_at_n: tv_at_zero,
            });
        }
        // Powers P^(2^k) until the TV target is met.
        let mut powers = vec![p];
        loop {
            let last = powers.last().unwrap();
            let tv = max_tv_rows(last, &mu, n);
            if tv <= eps {
                break;
            }
            if (1u64 << powers.len()) > opts.cap {
                return Err(LandscapeError::MixingTruncated(opts.cap));
            }
            let sq = mat_mul(last, last, n);
            powers.push(sq);
        }
        let k_top = powers.len() - 1;
        if k_top == 0 {
            // TV(P^1) ≤ eps already.
            return Ok(MixingResult {
                n: 1,
                mode: MixingMode::ExactAllStarts,
                max_tv_at_n: max_tv_rows(&powers[0], &mu, n),
            });
        }
        // Binary lifting: grow n while TV(P^n) > eps.
        let mut cur = powers[k_top - 1].clone();
        let mut steps: u64 = 1 << (k_top - 1);
        for k in (0..k_top - 1).rev() {
            let cand = mat_mul(&cur, &powers[k], n);
            if max_tv_rows(&cand, &mu, n) > eps {
                cur = cand;
                steps += 1 << k;
            }
        }
        let final_m = mat_mul(&cur, &powers[0], n);
        let tv = max_tv_rows(&final_m, &mu, n);
        debug_assert!(tv <= eps);
        Ok(MixingResult {
            n: steps + 1,
            mode: MixingMode::ExactAllStarts,
            max_tv_at_n: tv,
        })
    } else {
        // Vector iteration from the stable states and the empty state.
        let empty = index
            .id_of(&Configuration::empty(index.grid()))
            .expect("empty configuration is always hard-core");
        let mut starts = index.stable_ids().to_vec();
        starts.push(empty);
        let mut dists: Vec<Vec<f64>> = starts
            .iter()
            .map(|&s| {
                let mut v = vec![0.0; n];
                v[s as usize] = 1.0;
                v
            })
            .collect();
        let max_tv = |ds: &[Vec<f64>]| -> f64 {
            ds.iter()
                .map(|d| 0.5 * d.iter().zip(&mu).map(|(p, q)| (p - q).abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        checkpoint_scan(&tm, &mut dists, eps, opts.cap, max_tv)
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Exponential scan with a saved checkpoint, then a linear rescan from the
/// last checkpoint for the exact step count.
fn checkpoint_scan(
    tm: &TransitionMatrix,
    dists: &mut Vec<Vec<f64>>,
    eps: f64,
    cap: u64,
    max_tv: impl Fn(&[Vec<f64>]) -> f64,
) -> Result<MixingResult, LandscapeError> {
    let mut step: u64 = 0;
    let mut checkpoint = dists.clone();
    let mut checkpoint_step = 0u64;
    let mut next_check = 1u64;
    let mut buf = vec![0.0; tm.n];
    loop {
        if max_tv(dists) <= eps {
            break;
        }
        if step >= cap {
            return Err(LandscapeError::MixingTruncated(cap));
        }
        checkpoint = dists.clone();
        checkpoint_step = step;
        while step < next_check {
            for d in dists.iter_mut() {
                tm.apply_left(d, &mut buf);
                std::mem::swap(d, &mut buf);
            }
            step += 1;
        }
        next_check *= 2;
    }
    // Exact n lies in (checkpoint_step, step]; rescan linearly.
    *dists = checkpoint;
    let mut nstep = checkpoint_step;
    loop {
        let tv = max_tv(dists);
        if tv <= eps {
            return Ok(MixingResult {
                n: nstep,
                mode: MixingMode::LowerBoundSubsetStarts,
                max_tv_at_n: tv,
            });
        }
        for d in dists.iter_mut() {
            tm.apply_left(d, &mut buf);
            std::mem::swap(d, &mut buf);
        }
        nstep += 1;
    }
}

#[cfg(test)]
pub(crate) fn mean_hitting_times_cg(
    index: &LandscapeIndex,
    beta: f64,
    targets: &[u32],
) -> Result<Vec<f64>, LandscapeError> {
    let op = RestrictedSym::new(index, beta, targets);
    let h_min = op.keep.iter().map(|&id| index.energy(id)).min().unwrap() as f64;
    let w: Vec<f64> = op
        .keep
        .iter()
        .map(|&id| (-beta * (index.energy(id) as f64 - h_min) / 2.0).exp())
        .collect();
    let y = cg_solve(&op, &w, 1e-13, 200_000)?;
    let mut out = vec![0.0; index.len()];
    for (r, &id) in op.keep.iter().enumerate() {
        out[id as usize] = y[r] / w[r];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::SiteSet;
    use crate::config::is_hardcore;
    use crate::dynamics::{run_batch, DynamicsParams, DEFAULT_STEP_CAP};
    use crate::lattice::GridSpec;

    fn grid(k: usize, l: usize) -> Grid {
        Grid::new(GridSpec { k, l }).unwrap()
    }

    #[test]
    fn enumeration_matches_naive_filter_4x3() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let naive: Vec<u64> = (0u64..1 << g.n_sites())
            .filter(|&bits| {
                let c = Configuration::from_bits(SiteSet::from_u64(g.n_sites(), bits));
                is_hardcore(&g, &c)
            })
            .collect();
        assert_eq!(index.len(), naive.len());
        for id in 0..index.len() as u32 {
            assert!(is_hardcore(&g, &index.configuration(id)));
        }
        // Closed and symmetric move relation.
        for id in 0..index.len() as u32 {
            for &to in index.moves(id) {
                assert!(index.moves(to).contains(&id));
                let d = (index.state_bits(id) ^ index.state_bits(to)).count_ones();
                assert_eq!(d, 1);
            }
        }
    }

    #[test]
    fn enumeration_refuses_large_grids() {
        let g = grid(3, 2); // 36 sites
        match enumerate(&g) {
            Err(LandscapeError::TooLarge { n: 36, limit: 30 }) => {}
            other => panic!("expected TooLarge, got {:?}", other.map(|i| i.len())),
        }
        assert!(enumerate_with_limit(&g, 40).is_ok());
    }

    #[test]
    fn minima_are_exactly_the_three_stables() {
        for (k, l) in [(2, 1), (2, 2), (3, 1)] {
            let g = grid(k, l);
            let index = enumerate(&g).unwrap();
            let mut minima = index.minima();
            minima.sort_unstable();
            let mut stable = index.stable_ids().to_vec();
            stable.sort_unstable();
            assert_eq!(minima, stable, "stable set must be {{a,b,c}} on {k}x{l}");
            assert_eq!(index.energy(stable[0]), -2 * (k * l) as i64);
        }
    }

    #[test]
    fn comm_height_examples() {
        let g = grid(2, 2);
        let index = enumerate(&g).unwrap();
        let [a, b, c] = index.stable_ids();
        let h_a = index.energy(a);
        assert_eq!(comm_height(&index, &[a], &[b]).unwrap() - h_a, 3);
        // Pairwise symmetry of the three barriers.
        let ab = comm_height(&index, &[a], &[b]).unwrap();
        let ac = comm_height(&index, &[a], &[c]).unwrap();
        let bc = comm_height(&index, &[b], &[c]).unwrap();
        assert_eq!(ab, ac);
        assert_eq!(ab, bc);
        // Precondition: disjoint nonempty sets.
        assert_eq!(
            comm_height(&index, &[a], &[a]),
            Err(LandscapeError::BadSets)
        );
        assert_eq!(comm_height(&index, &[], &[a]), Err(LandscapeError::BadSets));
    }

    /// Independent oracle: Φ(s,t) = smallest h such that s reaches t by
    /// BFS inside the sublevel set {σ : H(σ) ≤ h}.
    fn bfs_phi(index: &LandscapeIndex, s: u32, t: u32) -> i64 {
        let lo = index.energy(s).max(index.energy(t));
        for h in lo..=0 {
            let mut seen = vec![false; index.len()];
            let mut queue = std::collections::VecDeque::new();
            if index.energy(s) <= h {
                seen[s as usize] = true;
                queue.push_back(s);
            }
            while let Some(v) = queue.pop_front() {
                if v == t {
                    return h;
                }
                for &u in index.moves(v) {
                    if !seen[u as usize] && index.energy(u) <= h {
                        seen[u as usize] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        unreachable!("state space is connected at level 0");
    }

    #[test]
    fn comm_height_matches_bfs_oracle() {
        use rand::Rng;
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let mut rng = derive_rng(2024, 0, 0);
        for _ in 0..50 {
            let s = rng.random_range(0..index.len() as u32);
            let mut t = rng.random_range(0..index.len() as u32);
            while t == s {
                t = rng.random_range(0..index.len() as u32);
            }
            let fast = comm_height(&index, &[s], &[t]).unwrap();
            assert_eq!(fast, bfs_phi(&index, s, t), "pair ({s},{t})");
        }
    }

    #[test]
    fn structure_reports() {
        for (k, l, gamma) in [(2usize, 1usize, 3i64), (2, 2, 3), (3, 1, 3)] {
            let g = grid(k, l);
            let index = enumerate(&g).unwrap();
            let r = verify_structure(&index);
            assert_eq!(r.gamma, gamma, "{k},{l}");
            assert!(r.stable_is_abc);
            assert!(r.pairwise_gaps_equal_gamma);
            assert!(r.depth_bound_ok);
            assert!(r.cond_pe_a_bc && r.cond_pe_a_b);
            assert!(r.cond_ae_a_bc);
            // The deep cycle around c always breaks the condition for (a,{b}).
            assert!(!r.cond_ae_a_b);
            assert!(r.theory_consistent);
            assert!(r.max_depth_outside <= gamma - 1);
        }
    }

    #[test]
    fn mean_hitting_beta0_single_step_escape() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let tm = transition_matrix(&index, 0.0);
        // Target everything except the start: expected time to leave is
        // geometric, 1/(1 - P(σ,σ)).
        for start in [index.stable_id(Component::A), 5, 17] {
            let targets: Vec<u32> = (0..index.len() as u32).filter(|&i| i != start).collect();
            let t = exact_mean_hitting(&index, 0.0, start, &targets).unwrap();
            let expected = 1.0 / (1.0 - tm.diag[start as usize]);
            assert!((t - expected).abs() < 1e-10, "{t} vs {expected}");
        }
    }

    #[test]
    fn tunneling_mean_factor_two_identity() {
        // E τ_a→b = 2 E τ_a→{b,c}, exactly, at every β.
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let [a, b, c] = index.stable_ids();
        for beta in [1.0, 2.0, 3.0] {
            let t_ab = exact_mean_hitting(&index, beta, a, &[b]).unwrap();
            let t_abc = exact_mean_hitting(&index, beta, a, &[b, c]).unwrap();
            let ratio = t_ab / t_abc;
            assert!(
                (ratio - 2.0).abs() < 1e-6,
                "beta={beta}: ratio {ratio} (t_ab={t_ab}, t_abc={t_abc})"
            );
        }
    }

    #[test]
    fn cg_route_matches_dense_lu() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let [a, b, c] = index.stable_ids();
        for beta in [0.5, 2.0] {
            let dense = mean_hitting_times(&index, beta, &[b, c]).unwrap();
            let cg = mean_hitting_times_cg(&index, beta, &[b, c]).unwrap();
            for id in 0..index.len() {
                let scale = dense[id].abs().max(1.0);
                assert!(
                    (dense[id] - cg[id]).abs() / scale < 1e-9,
                    "state {id} beta {beta}: {} vs {}",
                    dense[id],
                    cg[id]
                );
            }
            let _ = a;
        }
    }

    #[test]
    fn hitting_distribution_is_a_distribution() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let [a, b, c] = index.stable_ids();
        let h = hitting_distribution(&index, 1.5, a, &[b, c]).unwrap();
        assert_eq!(h.len(), 2);
        assert!((h[0] + h[1] - 1.0).abs() < 1e-12);
        assert!(h.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn monte_carlo_agrees_with_exact_mean() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let [a, b, c] = index.stable_ids();
        let beta = 2.0;
        let exact = exact_mean_hitting(&index, beta, a, &[b, c]).unwrap();
        let [ca, cb, cc] = stable_configs(&g);
        let n = 2000;
        let outcomes = run_batch(
            &g,
            &ca,
            &[cb, cc],
            DynamicsParams::new(beta, 777).unwrap(),
            0,
            n,
            DEFAULT_STEP_CAP,
        )
        .unwrap();
        let times: Vec<f64> = outcomes
            .iter()
            .map(|o| o.sample().unwrap().steps as f64)
            .collect();
        let mean = times.iter().sum::<f64>() / n as f64;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - exact).abs() < 3.0 * se,
            "MC mean {mean} vs exact {exact} (3se = {})",
            3.0 * se
        );
    }

    #[test]
    fn spectral_gap_positive_at_beta_zero() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let gap = spectral_gap(&index, 0.0).unwrap();
        assert!(gap.rho > 0.0);
        assert!(gap.rho < 1.5);
    }

    /// Dense symmetric eigensolver oracle for the iterative route.
    #[test]
    fn spectral_gap_matches_dense_eigen() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let n = index.len();
        for beta in [0.5, 1.0] {
            let tm = transition_matrix(&index, beta);
            let off = (-beta / 2.0).exp() / g.n_sites() as f64;
            let mut s = nalgebra::DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                s[(i, i)] = tm.diag[i];
                for &j in index.moves(i as u32) {
                    s[(i, j as usize)] = off;
                }
            }
            let mut eig = nalgebra::SymmetricEigen::new(s.clone()).eigenvalues;
            let mut ev: Vec<f64> = eig.iter().copied().collect();
            ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let rho_dense = 1.0 - ev[1];
            let rho_iter = spectral_gap(&index, beta).unwrap().rho;
            assert!(
                (rho_dense - rho_iter).abs() < 1e-9,
                "beta={beta}: dense {rho_dense} vs iterative {rho_iter}"
            );
            // Similarity identity: S = D^{1/2} P D^{-1/2} entrywise.
            let mu = index.stationary(beta);
            let p = tm.to_dense();
            for i in 0..n {
                for k in tm.row_off[i] as usize..tm.row_off[i + 1] as usize {
                    let j = tm.col[k] as usize;
                    let expect = (mu[i] / mu[j]).sqrt() * p[i * n + j];
                    assert!((s[(i, j)] - expect).abs() < 1e-14);
                }
            }
            eig = nalgebra::SymmetricEigen::new(s).eigenvalues;
            let _ = eig;
        }
    }

    /// P-route oracle: deflated power iteration on the lazy chain itself
    /// (right eigenvector 1, left eigenvector μ). Similar matrices share
    /// their spectrum, so both routes must give the same gap.
    #[test]
    fn spectral_gap_same_from_p_and_symmetrization() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let beta = 1.0;
        let n = index.len();
        let tm = transition_matrix(&index, beta);
        let p = tm.to_dense();
        let mu = index.stationary(beta);
        let mut x: Vec<f64> = {
            use rand::Rng;
            let mut rng = derive_rng(31, 0, 0);
            (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
        };
        let deflate = |x: &mut Vec<f64>| {
            let w: f64 = x.iter().zip(&mu).map(|(a, b)| a * b).sum();
            for v in x.iter_mut() {
                *v -= w;
            }
        };
        deflate(&mut x);
        let mut theta = 0.0;
        for _ in 0..20_000 {
            // Lazy chain: y = (x + Px)/2.
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += p[i * n + j] * x[j];
                }
                y[i] = (x[i] + acc) / 2.0;
            }
            deflate(&mut y);
            let nx: f64 = x.iter().map(|v| v * v).sum::<f64>();
            theta = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / nx;
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..n {
                x[i] = y[i] / ny;
            }
        }
        let rho_p = 2.0 * (1.0 - theta);
        let rho_s = spectral_gap(&index, beta).unwrap().rho;
        assert!(
            (rho_p - rho_s).abs() < 1e-9,
            "P route {rho_p} vs symmetrized route {rho_s}"
        );
    }

    #[test]
    fn mixing_time_beta0_regression_baseline() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let r = mixing_time(&index, 0.0, 0.25, MixingOptions::default()).unwrap();
        assert_eq!(r.mode, MixingMode::ExactAllStarts);
        println!("t_mix(0.25) at beta=0 on 4x3: {}", r.n);
        // Exact value frozen as a regression baseline.
        assert_eq!(r.n, 39);
    }

    #[test]
    fn mixing_eps_validation() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        assert!(mixing_time(&index, 1.0, 0.0, MixingOptions::default()).is_err());
        assert!(mixing_time(&index, 1.0, 1.0, MixingOptions::default()).is_err());
    }

    #[test]
    fn tv_is_monotone_in_n() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let beta = 1.0;
        let mu = index.stationary(beta);
        let tm = transition_matrix(&index, beta);
        let n = index.len();
        let p = tm.to_dense();
        let mut m = p.clone();
        let mut last = max_tv_rows(&m, &mu, n);
        for _ in 0..40 {
            m = mat_mul(&m, &p, n);
            let tv = max_tv_rows(&m, &mu, n);
            assert!(tv <= last + 1e-12, "TV must be non-increasing");
            last = tv;
        }
    }

    #[test]
    fn mixing_vector_mode_is_a_lower_bound() {
        let g = grid(2, 1);
        let index = enumerate(&g).unwrap();
        let beta = 1.0;
        let exact = mixing_time(&index, beta, 0.25, MixingOptions::default()).unwrap();
        let vector = mixing_time(
            &index,
            beta,
            0.25,
            MixingOptions {
                dense_limit: 1,
                cap: 1 << 30,
            },
        )
        .unwrap();
        assert_eq!(vector.mode, MixingMode::LowerBoundSubsetStarts);
        assert!(vector.n <= exact.n);
        // The worst start at low temperature is a deep state, so the
        // subset {a,b,c,empty} should in fact attain the exact value here.
        assert_eq!(vector.n, exact.n);
    }

    #[test]
    fn state_counts_for_reference() {
        for (k, l) in [(2, 1), (3, 1), (2, 2)] {
            let g = grid(k, l);
            let index = enumerate(&g).unwrap();
            println!("|X| on {}: {}", g.spec(), index.len());
        }
    }
}
