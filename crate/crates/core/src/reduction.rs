//! Constructive paths in the energy landscape.
//!
//! Two iterative procedures rebuild a configuration into a target stable
//! state while keeping the path height tightly above the starting energy:
//!
//! - **by rows**: 2K stages; stage i removes the non-target particles of
//!   row i+1 (one pair-site per step) and fills the target sites of row i,
//!   so every energy-raising removal is immediately followed by an
//!   insertion. Stage endpoints have non-increasing energy and the whole
//!   path stays within H(σ) + 1.
//! - **by columns**: 2L stages sweeping three columns at a time. A stage
//!   whose trailing column is a fully occupied vertical bridge must start
//!   with two consecutive removals (local height start + 2, case a);
//!   otherwise an empty site in that column anchors the alternating
//!   removal/insertion order (local height ≤ start + 1, case b). The path
//!   stays within H(σ) + 2, and within H(σ) + 1 when no bridge of the
//!   triggering color is present.
//!
//! On top of these, [`reference_path`] builds the minimax-optimal path
//! between two stable configurations (height gap exactly min{K,2L}+1):
//! empty one gray column (K removals) then reduce by columns when K ≤ 2L,
//! else empty one horizontal stripe (2L removals) then reduce by rows.
//! [`path_to_stable`] dispatches an arbitrary configuration to a stable
//! one within height H(σ) + min{K,2L}, choosing the branch from the
//! configuration's bridge structure.
//!
//! Targets other than b are handled by conjugating with the
//! component-swapping automorphisms rather than re-deriving coordinate
//! offsets; validity, heights, and endpoints are preserved exactly.

use crate::config::{
    delta_h_vertical, detect_bridges, is_hardcore, stable_config, Configuration,
};
use crate::lattice::{Automorphism, AxialKind, Component, Grid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("initial configuration violates the precondition for target {target}: occupied sites {offending:?}")]
    Precondition {
        target: Component,
        offending: Vec<usize>,
    },
    #[error("initial configuration is not hard-core")]
    NotHardcore,
    #[error("path endpoints must be distinct stable configurations")]
    SameEndpoints,
}

/// A sequence of configurations in which consecutive states differ in at
/// most one site (void moves permitted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub states: Vec<Configuration>,
}

impl Path {
    /// Φ_ω = max energy along the path.
    pub fn height(&self) -> i64 {
        self.states
            .iter()
            .map(|s| s.energy())
            .max()
            .expect("paths are nonempty")
    }

    pub fn energies(&self) -> Vec<i64> {
        self.states.iter().map(|s| s.energy()).collect()
    }

    pub fn first(&self) -> &Configuration {
        self.states.first().expect("paths are nonempty")
    }

    pub fn last(&self) -> &Configuration {
        self.states.last().expect("paths are nonempty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Maps every state through an induced automorphism action.
    pub fn permuted(&self, grid: &Grid, auto: &Automorphism) -> Path {
        Path {
            states: self.states.iter().map(|s| s.permuted(grid, auto)).collect(),
        }
    }

    /// Serialized form: configuration hex strings plus the energy profile.
    pub fn to_json(&self, grid: &Grid) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "states": self.states.iter().map(|s| s.to_hex(grid)).collect::<Vec<_>>(),
            "energies": self.energies(),
            "height": self.height(),
        })
    }
}

/// Which construction produced a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageCase {
    /// Initial strip/column emptying before a reduction run.
    Emptying,
    /// A row stage.
    Rows,
    /// Column stage in the bridge regime (two leading removals).
    ColumnsBridge,
    /// Column stage in the regular regime.
    ColumnsPlain,
}

/// A reduction output: the path plus per-stage structure for auditing.
#[derive(Debug, Clone)]
pub struct ReductionPath {
    pub path: Path,
    /// Index (into `path.states`) of each stage's final state.
    pub stage_ends: Vec<usize>,
    pub stage_cases: Vec<StageCase>,
}

impl ReductionPath {
    /// Energies at the stage boundaries, starting with the initial state.
    pub fn stage_energies(&self) -> Vec<i64> {
        std::iter::once(0usize)
            .chain(self.stage_ends.iter().copied())
            .map(|i| self.path.states[i].energy())
            .collect()
    }

    fn map_states(mut self, grid: &Grid, auto: &Automorphism) -> ReductionPath {
        self.path = self.path.permuted(grid, auto);
        self
    }

    fn concat_after(prefix: Vec<Configuration>, mut tail: ReductionPath) -> ReductionPath {
        debug_assert_eq!(prefix.last(), Some(tail.path.first()));
        let offset = prefix.len() - 1;
        let mut states = prefix;
        states.extend(tail.path.states.drain(1..));
        let mut stage_ends = vec![offset];
        stage_ends.extend(tail.stage_ends.iter().map(|e| e + offset));
        let mut stage_cases = vec![StageCase::Emptying];
        stage_cases.extend(tail.stage_cases);
        ReductionPath {
            path: Path { states },
            stage_ends,
            stage_cases,
        }
    }
}

/// Report from path validation; carries the first violation found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathReport {
    pub valid: bool,
    pub violation: Option<PathViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathViolation {
    pub index: usize,
    pub reason: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    EmptyPath,
    HardCore,
    MultiSiteJump,
}

/// Verifies the path invariants: nonempty, every state hard-core, and
/// consecutive states differing in at most one site.
pub fn validate_path(grid: &Grid, path: &Path) -> PathReport {
    if path.states.is_empty() {
        return PathReport {
            valid: false,
            violation: Some(PathViolation {
                index: 0,
                reason: ViolationKind::EmptyPath,
            }),
        };
    }
    for (i, s) in path.states.iter().enumerate() {
        if !is_hardcore(grid, s) {
            return PathReport {
                valid: false,
                violation: Some(PathViolation {
                    index: i,
                    reason: ViolationKind::HardCore,
                }),
            };
        }
    }
    for i in 1..path.states.len() {
        let diff = path.states[i - 1]
            .bits()
            .words()
            .iter()
            .zip(path.states[i].bits().words())
            .map(|(x, y)| (x ^ y).count_ones())
            .sum::<u32>();
        if diff > 1 {
            return PathReport {
                valid: false,
                violation: Some(PathViolation {
                    index: i,
                    reason: ViolationKind::MultiSiteJump,
                }),
            };
        }
    }
    PathReport {
        valid: true,
        violation: None,
    }
}

/// The conjugating automorphism (and its inverse) that turns a
/// target-`x` run into a target-b run: the induced action maps x to b,
/// and the listed inverse maps the produced path back.
fn conjugators(grid: &Grid, target: Component) -> (Automorphism, Automorphism) {
    match target {
        Component::B => {
            let id = grid.identity_automorphism();
            (id.clone(), id)
        }
        Component::A => {
            // Reflection: involution, self-inverse.
            let r = grid.axial_automorphism(AxialKind::AB);
            (r.clone(), r)
        }
        Component::C => {
            // Column translation by −2 (its induced action sends c to b);
            // the path is mapped back by the translation by +2.
            let into_b_frame = grid.translation(0, grid.n_cols() - 2).unwrap();
            let out_of_b_frame = grid.translation(0, 2).unwrap();
            (into_b_frame, out_of_b_frame)
        }
    }
}

fn site(grid: &Grid, row: isize, col: isize) -> usize {
    grid.site_index_wrapped(row, col)
}

/// Precondition for the row algorithm: no non-target particles in the
/// first horizontal stripe S_0.
fn rows_precondition_offenders(grid: &Grid, sigma: &Configuration, target: Component) -> Vec<usize> {
    let mut mask = grid.stripe_mask(crate::lattice::Stripe::Horizontal(0)).unwrap();
    mask.subtract(grid.component_mask(target));
    mask.intersect_with(sigma.bits());
    mask.iter().collect()
}

/// Precondition for the column algorithm: the two designated columns are
/// empty (c_2, c_3 for target b; c_1, c_2 for a; c_0, c_1 for c).
fn columns_precondition_offenders(
    grid: &Grid,
    sigma: &Configuration,
    target: Component,
) -> Vec<usize> {
    let (c0, c1) = match target {
        Component::B => (2, 3),
        Component::A => (1, 2),
        Component::C => (0, 1),
    };
    let mut mask = grid.col_mask(c0).clone();
    mask.union_with(grid.col_mask(c1));
    mask.intersect_with(sigma.bits());
    mask.iter().collect()
}

fn check_start(grid: &Grid, sigma: &Configuration) -> Result<(), ReductionError> {
    if !is_hardcore(grid, sigma) {
        return Err(ReductionError::NotHardcore);
    }
    Ok(())
}

/// Energy reduction by rows towards b; assumes the precondition holds.
fn rows_to_b(grid: &Grid, sigma: &Configuration) -> ReductionPath {
    let (k2, l2) = (2 * grid.spec().k as isize, 2 * grid.spec().l as isize);
    let mut cur = sigma.clone();
    let mut states = vec![cur.clone()];
    let mut stage_ends = Vec::new();
    let mut stage_cases = Vec::new();

    for i in 1..=k2 {
        for j in 1..=l2 {
            if j % 2 == 1 {
                // Remove the gray or white particle (at most one) from the
                // adjacent pair in row i+1.
                let (v, vp) = if i % 2 == 0 {
                    (
                        site(grid, i + 1, 3 * j),
                        site(grid, i + 1, 3 * j + 2),
                    )
                } else {
                    (
                        site(grid, i + 1, 3 * j - 3),
                        site(grid, i + 1, 3 * j - 1),
                    )
                };
                if cur.occupied(v) {
                    cur.remove(v);
                } else if cur.occupied(vp) {
                    cur.remove(vp);
                }
            } else {
                // Fill the black site of row i; its upper neighbors were
                // exactly the previous step's pair.
                let v = if i % 2 == 0 {
                    site(grid, i, 3 * j - 2)
                } else {
                    site(grid, i, 3 * j - 5)
                };
                if !cur.occupied(v) {
                    debug_assert!(cur.bits().is_disjoint(grid.neighbor_mask(v)));
                    cur.add(v);
                }
            }
            states.push(cur.clone());
        }
        stage_ends.push(states.len() - 1);
        stage_cases.push(StageCase::Rows);
    }
    debug_assert_eq!(&cur, &stable_config(grid, Component::B));
    ReductionPath {
        path: Path { states },
        stage_ends,
        stage_cases,
    }
}

/// Energy reduction by columns towards b; assumes the precondition holds.
fn columns_to_b(grid: &Grid, sigma: &Configuration) -> ReductionPath {
    let (k2, l2, cols) = (
        2 * grid.spec().k as isize,
        2 * grid.spec().l as isize,
        grid.n_cols() as isize,
    );
    let mut cur = sigma.clone();
    let mut states = vec![cur.clone()];
    let mut stage_ends = Vec::new();
    let mut stage_cases = Vec::new();

    for j in 1..=l2 {
        let black_col = 3 * j + 1;
        let bridge_col = ((3 * j + 2) % cols) as usize;
        let bridge_full = {
            let m = grid.col_mask(bridge_col);
            cur.particles_in(m) == m.len()
        };

        if bridge_full {
            // Case (a): break the bridge with two leading removals, then
            // alternate insertion below / removal ahead.
            let o = j % 2;
            cur.remove(site(grid, o, 3 * j + 2));
            states.push(cur.clone());
            cur.remove(site(grid, o + 2, 3 * j + 2));
            states.push(cur.clone());
            for i in 3..=k2 - 1 {
                if i % 2 == 1 {
                    let v = site(grid, o + i - 2, black_col);
                    debug_assert!(cur.bits().is_disjoint(grid.neighbor_mask(v)));
                    cur.add(v);
                } else {
                    cur.remove(site(grid, o + i, 3 * j + 2));
                }
                states.push(cur.clone());
            }
            // One black site is still vacant; fill it.
            let rest: Vec<usize> = grid
                .col_mask((black_col % cols) as usize)
                .iter()
                .filter(|&v| !cur.occupied(v))
                .collect();
            debug_assert_eq!(rest.len(), 1);
            cur.add(rest[0]);
            states.push(cur.clone());
            stage_cases.push(StageCase::ColumnsBridge);
        } else {
            // Case (b): anchor at an empty site of the trailing column.
            let s = grid
                .col_mask(bridge_col)
                .iter()
                .find(|&v| !cur.occupied(v))
                .map(|v| grid.site(v).row as isize)
                .expect("no bridge means the column has an empty site");
            for i in 1..=k2 {
                if i % 2 == 1 {
                    // The two sites are neighbors: at most one occupied.
                    let w1 = site(grid, s + i + 1, 3 * j + 2);
                    let w2 = site(grid, s + i, 3 * j + 3);
                    if cur.occupied(w1) {
                        cur.remove(w1);
                    } else if cur.occupied(w2) {
                        cur.remove(w2);
                    }
                } else {
                    let v = site(grid, s + i - 1, black_col);
                    if !cur.occupied(v) {
                        debug_assert!(cur.bits().is_disjoint(grid.neighbor_mask(v)));
                        cur.add(v);
                    }
                }
                states.push(cur.clone());
            }
            stage_cases.push(StageCase::ColumnsPlain);
        }
        stage_ends.push(states.len() - 1);
    }
    debug_assert_eq!(&cur, &stable_config(grid, Component::B));
    ReductionPath {
        path: Path { states },
        stage_ends,
        stage_cases,
    }
}

/// Energy reduction by rows. Requires σ to be hard-core with no
/// non-target particles in S_0; rejects otherwise, listing the offenders.
pub fn reduce_by_rows(
    grid: &Grid,
    sigma: &Configuration,
    target: Component,
) -> Result<ReductionPath, ReductionError> {
    check_start(grid, sigma)?;
    let offending = rows_precondition_offenders(grid, sigma, target);
    if !offending.is_empty() {
        return Err(ReductionError::Precondition { target, offending });
    }
    let target_auto = match target {
        Component::B => return Ok(rows_to_b(grid, sigma)),
        Component::A => grid.axial_automorphism(AxialKind::AB),
        Component::C => grid.axial_automorphism(AxialKind::BC),
    };
    // Reflections are involutions: the same map conjugates both ways.
    let eta = sigma.permuted(grid, &target_auto);
    Ok(rows_to_b(grid, &eta).map_states(grid, &target_auto))
}

/// Energy reduction by columns. Requires σ to be hard-core and empty on
/// the two designated columns of the target.
pub fn reduce_by_columns(
    grid: &Grid,
    sigma: &Configuration,
    target: Component,
) -> Result<ReductionPath, ReductionError> {
    check_start(grid, sigma)?;
    let offending = columns_precondition_offenders(grid, sigma, target);
    if !offending.is_empty() {
        return Err(ReductionError::Precondition { target, offending });
    }
    let (fwd, back) = conjugators(grid, target);
    if target == Component::B {
        return Ok(columns_to_b(grid, sigma));
    }
    let eta = sigma.permuted(grid, &fwd);
    Ok(columns_to_b(grid, &eta).map_states(grid, &back))
}

/// The base minimax-optimal path from a to b.
fn reference_path_a_to_b(grid: &Grid) -> ReductionPath {
    let spec = grid.spec();
    let a = stable_config(grid, Component::A);
    let mut cur = a.clone();
    let mut prefix = vec![cur.clone()];

    if spec.k <= 2 * spec.l {
        // Empty gray column c_3 top to bottom (K removals), then reduce by
        // columns; every stage runs the no-bridge regime since no white
        // column is ever full.
        for i in 1..=spec.k as isize {
            cur.remove(site(grid, 2 * i - 1, 3));
            prefix.push(cur.clone());
        }
        let tail = columns_to_b(grid, &cur);
        ReductionPath::concat_after(prefix, tail)
    } else {
        // Empty the first horizontal stripe (2L removals, row-major
        // order), then reduce by rows.
        let mask = grid
            .stripe_mask(crate::lattice::Stripe::Horizontal(0))
            .unwrap();
        let occupied: Vec<usize> = mask.iter().filter(|&v| cur.occupied(v)).collect();
        for v in occupied {
            cur.remove(v);
            prefix.push(cur.clone());
        }
        let tail = rows_to_b(grid, &cur);
        ReductionPath::concat_after(prefix, tail)
    }
}

fn relabel_candidates(grid: &Grid) -> [Automorphism; 6] {
    [
        grid.identity_automorphism(),
        grid.axial_automorphism(AxialKind::AB),
        grid.axial_automorphism(AxialKind::AC),
        grid.axial_automorphism(AxialKind::BC),
        grid.translation(0, 2).unwrap(),
        grid.translation(0, grid.n_cols() - 2).unwrap(),
    ]
}

/// The unique induced map sending (a, b) onto (`from`, `to`) among the
/// identity, the three axial reflections, and the two color rotations.
fn stable_relabel(grid: &Grid, from: Component, to: Component) -> Automorphism {
    let stables = crate::config::stable_configs(grid);
    for auto in relabel_candidates(grid) {
        let image_a = stables[Component::A.index()].permuted(grid, &auto);
        let image_b = stables[Component::B.index()].permuted(grid, &auto);
        if image_a == stables[from.index()] && image_b == stables[to.index()] {
            return auto;
        }
    }
    unreachable!("the six maps realize every ordered pair of stable states")
}

/// Some induced map sending the stable state of color `x` to that of `y`
/// (the identity when they coincide).
fn map_sending(grid: &Grid, x: Component, y: Component) -> Automorphism {
    let stables = crate::config::stable_configs(grid);
    relabel_candidates(grid)
        .into_iter()
        .find(|auto| stables[x.index()].permuted(grid, auto) == stables[y.index()])
        .expect("reflections and rotations realize every color assignment")
}

/// The reference path between two distinct stable configurations; its
/// height gap over the start is exactly min{K,2L}+1.
pub fn reference_path(
    grid: &Grid,
    from: Component,
    to: Component,
) -> Result<ReductionPath, ReductionError> {
    if from == to {
        return Err(ReductionError::SameEndpoints);
    }
    let base = reference_path_a_to_b(grid);
    if (from, to) == (Component::A, Component::B) {
        return Ok(base);
    }
    let relabel = stable_relabel(grid, from, to);
    Ok(base.map_states(grid, &relabel))
}

/// Dispatches an arbitrary non-stable configuration to a stable one with
/// path height at most H(σ) + min{K,2L}: with K ≤ 2L, a vertical bridge
/// routes to the matching stable state through the column algorithm and
/// otherwise a deficient vertical stripe is emptied first; with K > 2L, a
/// bridge-free horizontal stripe is emptied and the row algorithm
/// finishes. Stable inputs return a single-state path.
pub fn path_to_stable(
    grid: &Grid,
    sigma: &Configuration,
) -> Result<(ReductionPath, Component), ReductionError> {
    check_start(grid, sigma)?;
    let stables = crate::config::stable_configs(grid);
    for c in crate::lattice::COMPONENTS {
        if sigma == &stables[c.index()] {
            return Ok((
                ReductionPath {
                    path: Path {
                        states: vec![sigma.clone()],
                    },
                    stage_ends: vec![],
                    stage_cases: vec![],
                },
                c,
            ));
        }
    }
    let spec = grid.spec();

    if spec.k <= 2 * spec.l {
        let bridges = detect_bridges(grid, sigma);
        if let Some(&(_, color)) = bridges.full_columns.first() {
            // Recolor the bridge to black, slide it onto c_1, run the
            // column algorithm, then undo both maps. The inverse of an
            // induced map is induced by the inverse site map.
            let psi = map_sending(grid, color, Component::B);
            let psi_inv = psi.inverse();
            let eta = sigma.permuted(grid, &psi);
            let black_col = detect_bridges(grid, &eta)
                .full_columns
                .iter()
                .find(|&&(_, c)| c == Component::B)
                .map(|&(j, _)| j)
                .expect("recoloring sends the bridge to a black column");
            let delta = (black_col + grid.n_cols() - 1) % grid.n_cols();
            let fwd = grid.translation(delta % 2, delta).unwrap();
            let back = fwd.inverse();
            let shifted = eta.permuted(grid, &fwd);
            debug_assert!(columns_precondition_offenders(grid, &shifted, Component::B).is_empty());
            let run = columns_to_b(grid, &shifted);
            let mapped = run.map_states(grid, &back).map_states(grid, &psi_inv);
            return Ok((mapped, color));
        }
        // No vertical bridge: pick a vertical stripe with positive energy
        // difference from the family with white middle columns and slide
        // it onto C_1.
        let m = (0..2 * spec.l)
            .find(|&m| delta_h_vertical(grid, sigma, 3 * m + 1).unwrap() > 0)
            .expect("a non-stable configuration has a deficient stripe");
        let delta = 3 * m;
        let fwd = grid.translation(delta % 2, delta).unwrap();
        let back = fwd.inverse();
        let eta = sigma.permuted(grid, &fwd);
        let mut cur = eta.clone();
        let mut prefix = vec![cur.clone()];
        let mut to_clear = grid.col_mask(2).clone();
        to_clear.union_with(grid.col_mask(3));
        to_clear.intersect_with(cur.bits());
        for v in to_clear.iter() {
            cur.remove(v);
            prefix.push(cur.clone());
        }
        let tail = columns_to_b(grid, &cur);
        let combined = ReductionPath::concat_after(prefix, tail);
        Ok((combined.map_states(grid, &back), Component::B))
    } else {
        // K > 2L: a bridge-free horizontal stripe exists; slide it onto
        // S_0, empty it, and reduce by rows.
        let bridges = detect_bridges(grid, sigma);
        let m = (0..spec.k)
            .find(|&i| !bridges.horizontal.iter().any(|&(s, _)| s == i))
            .expect("a non-stable configuration has a bridge-free stripe");
        let fwd = grid.translation(2 * m, 0).unwrap();
        let back = fwd.inverse();
        let eta = sigma.permuted(grid, &fwd);
        let mut cur = eta.clone();
        let mut prefix = vec![cur.clone()];
        let mut to_clear = grid
            .stripe_mask(crate::lattice::Stripe::Horizontal(0))
            .unwrap();
        to_clear.intersect_with(cur.bits());
        for v in to_clear.iter() {
            cur.remove(v);
            prefix.push(cur.clone());
        }
        let tail = rows_to_b(grid, &cur);
        let combined = ReductionPath::concat_after(prefix, tail);
        Ok((combined.map_states(grid, &back), Component::B))
    }
}
