//! The 2K×3L triangular grid with periodic boundary conditions.
//!
//! # Geometry
//!
//! Sites live on 2K rows of 3L sites each (equivalently 6L columns of K
//! sites each), N = 6KL in total. We use row-first coordinates `(i, j)` with
//! `i ∈ [0, 2K)`, `j ∈ [0, 6L)`, and the parity rule that `(i, j)` is a site
//! iff `i ≡ j (mod 2)`; row 0 holds the even columns. Each site has the six
//! neighbors `(i, j±2)`, `(i−1, j±1)`, `(i+1, j±1)`, rows mod 2K and columns
//! mod 6L, which makes the graph 6-regular and loop-free for K ≥ 2, L ≥ 1.
//!
//! Columns are monochromatic under the natural tripartition
//! Λ = Λ_A ∪ Λ_B ∪ Λ_C with component = column index mod 3 (A/B/C for
//! 0/1/2), so each component is an independent set of 2KL sites.
//!
//! # Stripes and faces
//!
//! A horizontal stripe S_i is the row pair r_{2i} ∪ r_{2i+1} (K of them); a
//! vertical stripe C_j is the column triple c_j ∪ c_{j+1} ∪ c_{j+2} (6L of
//! them, indices mod 6L). Triangular faces are the 3-site cliques; there are
//! 2N of them and every face has one vertex in each component.

use crate::bits::SiteSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("grid dimensions require K >= 2 and L >= 1, got K={k}, L={l}")]
    BadDimensions { k: usize, l: usize },
    #[error("({row}, {col}) is not a site: row and column must have equal parity")]
    NotASite { row: usize, col: usize },
    #[error("translation offsets must have equal parity, got ({dr}, {dc})")]
    BadTranslation { dr: usize, dc: usize },
    #[error("stripe index {index} out of range ({kind} stripes: {count})")]
    StripeOutOfRange {
        kind: &'static str,
        index: usize,
        count: usize,
    },
}

/// Grid dimensions: 2K rows and 6L columns (3L sites per row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k: usize,
    pub l: usize,
}

impl GridSpec {
    pub fn new(k: usize, l: usize) -> Result<Self, LatticeError> {
        if k < 2 || l < 1 {
            return Err(LatticeError::BadDimensions { k, l });
        }
        Ok(Self { k, l })
    }

    /// Total number of sites, N = 6KL.
    pub fn n_sites(&self) -> usize {
        6 * self.k * self.l
    }

    /// Minimum energy barrier Γ(Λ) = min{K, 2L} + 1 between
    /// maximum-occupancy configurations.
    pub fn gamma(&self) -> i64 {
        self.k.min(2 * self.l) as i64 + 1
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", 2 * self.k, 3 * self.l)
    }
}

/// One of the three components of the tripartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    A,
    B,
    C,
}

pub const COMPONENTS: [Component; 3] = [Component::A, Component::B, Component::C];

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::A => 0,
            Component::B => 1,
            Component::C => 2,
        }
    }

    pub fn from_index(i: usize) -> Self {
        COMPONENTS[i % 3]
    }

    pub fn letter(self) -> char {
        match self {
            Component::A => 'A',
            Component::B => 'B',
            Component::C => 'C',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Component::A),
            'B' => Some(Component::B),
            'C' => Some(Component::C),
            _ => None,
        }
    }
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A lattice site in row-first coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

/// A horizontal stripe S_i (two adjacent rows) or a vertical stripe C_j
/// (three adjacent columns, indices mod 6L).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stripe {
    Horizontal(usize),
    Vertical(usize),
}

/// One of the three axial reflections swapping a pair of components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxialKind {
    /// Swaps Λ_A and Λ_B, fixes Λ_C setwise.
    AB,
    /// Swaps Λ_A and Λ_C, fixes Λ_B setwise.
    AC,
    /// Swaps Λ_B and Λ_C, fixes Λ_A setwise.
    BC,
}

/// A graph automorphism of the grid, stored as a site-index permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    pub name: String,
    perm: Vec<u32>,
}

impl Automorphism {
    /// Wraps an arbitrary site permutation. The caller vouches for it
    /// actually preserving adjacency; [`Self::preserves_adjacency`] checks.
    pub fn from_permutation(name: impl Into<String>, perm: Vec<u32>) -> Self {
        Self {
            name: name.into(),
            perm,
        }
    }

    /// Image of site index `i`.
    #[inline]
    pub fn map(&self, i: usize) -> usize {
        self.perm[i] as usize
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        let perm = other.perm.iter().map(|&i| self.perm[i as usize]).collect();
        Automorphism {
            name: format!("{}∘{}", self.name, other.name),
            perm,
        }
    }

    pub fn inverse(&self) -> Automorphism {
        let mut perm = vec![0u32; self.perm.len()];
        for (i, &img) in self.perm.iter().enumerate() {
            perm[img as usize] = i as u32;
        }
        Automorphism {
            name: format!("{}⁻¹", self.name),
            perm,
        }
    }

    /// True iff the permutation preserves the adjacency of `grid`.
    pub fn preserves_adjacency(&self, grid: &Grid) -> bool {
        (0..grid.n_sites()).all(|v| {
            let mut img: Vec<usize> = grid.neighbors(v).iter().map(|&u| self.map(u as usize)).collect();
            let mut expect: Vec<usize> = grid.neighbors(self.map(v)).iter().map(|&u| u as usize).collect();
            img.sort_unstable();
            expect.sort_unstable();
            img == expect
        })
    }
}

/// The triangular torus: sites, adjacency, tripartition, stripes, faces.
/// Immutable after construction; all query methods take `&self`.
#[derive(Debug, Clone)]
pub struct Grid {
    spec: GridSpec,
    n: usize,
    neighbors: Vec<[u32; 6]>,
    neighbor_mask: Vec<SiteSet>,
    component_mask: [SiteSet; 3],
    row_mask: Vec<SiteSet>,
    col_mask: Vec<SiteSet>,
    faces: Vec<[u32; 3]>,
}

impl Grid {
    /// Builds the grid; rejects K < 2 or L < 1.
    pub fn new(spec: GridSpec) -> Result<Self, LatticeError> {
        GridSpec::new(spec.k, spec.l)?;
        let (rows, cols) = (2 * spec.k, 6 * spec.l);
        let n = spec.n_sites();

        let mut neighbors = Vec::with_capacity(n);
        let mut neighbor_mask = Vec::with_capacity(n);
        let mut component_mask =
            [SiteSet::empty(n), SiteSet::empty(n), SiteSet::empty(n)];
        let mut row_mask = vec![SiteSet::empty(n); rows];
        let mut col_mask = vec![SiteSet::empty(n); cols];
        let mut faces = Vec::with_capacity(2 * n);

        let idx = |row: usize, col: usize| -> u32 {
            debug_assert_eq!(row % 2, col % 2);
            (row * 3 * spec.l + col / 2) as u32
        };
        let wrap = |row: isize, col: isize| -> (usize, usize) {
            (
                row.rem_euclid(rows as isize) as usize,
                col.rem_euclid(cols as isize) as usize,
            )
        };

        for row in 0..rows {
            for t in 0..3 * spec.l {
                let col = 2 * t + row % 2;
                let v = idx(row, col) as usize;
                let (r, c) = (row as isize, col as isize);
                let nbr: [u32; 6] = [
                    wrap(r, c + 2),
                    wrap(r, c - 2),
                    wrap(r - 1, c - 1),
                    wrap(r - 1, c + 1),
                    wrap(r + 1, c - 1),
                    wrap(r + 1, c + 1),
                ]
                .map(|(nr, nc)| idx(nr, nc));
                let mut mask = SiteSet::empty(n);
                for &u in &nbr {
                    mask.insert(u as usize);
                }
                neighbors.push(nbr);
                neighbor_mask.push(mask);
                component_mask[col % 3].insert(v);
                row_mask[row].insert(v);
                col_mask[col].insert(v);

                // The two faces whose leftmost column is this site's column.
                let up = wrap(r - 1, c + 1);
                let down = wrap(r + 1, c + 1);
                let right = wrap(r, c + 2);
                faces.push([v as u32, idx(right.0, right.1), idx(up.0, up.1)]);
                faces.push([v as u32, idx(right.0, right.1), idx(down.0, down.1)]);
            }
        }

        Ok(Self {
            spec,
            n,
            neighbors,
            neighbor_mask,
            component_mask,
            row_mask,
            col_mask,
            faces,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn n_rows(&self) -> usize {
        2 * self.spec.k
    }

    pub fn n_cols(&self) -> usize {
        6 * self.spec.l
    }

    /// Sites per row (3L).
    pub fn row_len(&self) -> usize {
        3 * self.spec.l
    }

    /// Site index for coordinates, or an error when the parity rule fails.
    pub fn site_index(&self, row: usize, col: usize) -> Result<usize, LatticeError> {
        if row >= self.n_rows() || col >= self.n_cols() || row % 2 != col % 2 {
            return Err(LatticeError::NotASite { row, col });
        }
        Ok(row * self.row_len() + col / 2)
    }

    /// Site index with wrap-around coordinates (periodic boundaries).
    /// The wrapped pair must still satisfy the parity rule.
    #[inline]
    pub fn site_index_wrapped(&self, row: isize, col: isize) -> usize {
        let r = row.rem_euclid(self.n_rows() as isize) as usize;
        let c = col.rem_euclid(self.n_cols() as isize) as usize;
        debug_assert_eq!(r % 2, c % 2, "wrapped ({r},{c}) violates the parity rule");
        r * self.row_len() + c / 2
    }

    #[inline]
    pub fn site(&self, index: usize) -> Site {
        let row = index / self.row_len();
        let t = index % self.row_len();
        Site {
            row,
            col: 2 * t + row % 2,
        }
    }

    #[inline]
    pub fn neighbors(&self, index: usize) -> &[u32; 6] {
        &self.neighbors[index]
    }

    #[inline]
    pub fn neighbor_mask(&self, index: usize) -> &SiteSet {
        &self.neighbor_mask[index]
    }

    #[inline]
    pub fn component(&self, index: usize) -> Component {
        Component::from_index(self.site(index).col % 3)
    }

    pub fn component_mask(&self, c: Component) -> &SiteSet {
        &self.component_mask[c.index()]
    }

    pub fn row_mask(&self, row: usize) -> &SiteSet {
        &self.row_mask[row]
    }

    pub fn col_mask(&self, col: usize) -> &SiteSet {
        &self.col_mask[col]
    }

    /// All faces (3-site cliques), each listed once; 2N in total.
    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn n_edges(&self) -> usize {
        3 * self.n
    }

    /// The K horizontal stripes S_i = r_{2i} ∪ r_{2i+1}.
    pub fn horizontal_stripes(&self) -> Vec<Stripe> {
        (0..self.spec.k).map(Stripe::Horizontal).collect()
    }

    /// The 6L vertical stripes C_j = c_j ∪ c_{j+1} ∪ c_{j+2}.
    pub fn vertical_stripes(&self) -> Vec<Stripe> {
        (0..self.n_cols()).map(Stripe::Vertical).collect()
    }

    /// Site mask of a stripe.
    pub fn stripe_mask(&self, stripe: Stripe) -> Result<SiteSet, LatticeError> {
        match stripe {
            Stripe::Horizontal(i) => {
                if i >= self.spec.k {
                    return Err(LatticeError::StripeOutOfRange {
                        kind: "horizontal",
                        index: i,
                        count: self.spec.k,
                    });
                }
                let mut m = self.row_mask[2 * i].clone();
                m.union_with(&self.row_mask[2 * i + 1]);
                Ok(m)
            }
            Stripe::Vertical(j) => {
                if j >= self.n_cols() {
                    return Err(LatticeError::StripeOutOfRange {
                        kind: "vertical",
                        index: j,
                        count: self.n_cols(),
                    });
                }
                let mut m = self.col_mask[j].clone();
                m.union_with(&self.col_mask[(j + 1) % self.n_cols()]);
                m.union_with(&self.col_mask[(j + 2) % self.n_cols()]);
                Ok(m)
            }
        }
    }

    /// Faces lying entirely inside a stripe: 6L for a horizontal stripe,
    /// 2K for a vertical one.
    pub fn stripe_faces(&self, stripe: Stripe) -> Result<Vec<[u32; 3]>, LatticeError> {
        let mask = self.stripe_mask(stripe)?;
        Ok(self
            .faces
            .iter()
            .filter(|f| f.iter().all(|&v| mask.contains(v as usize)))
            .copied()
            .collect())
    }

    fn perm_from(&self, f: impl Fn(Site) -> (isize, isize)) -> Vec<u32> {
        (0..self.n)
            .map(|v| {
                let (r, c) = f(self.site(v));
                self.site_index_wrapped(r, c) as u32
            })
            .collect()
    }

    /// The axial reflection of the given kind: column j ↦ (m − j) mod 6L
    /// with m ≡ 4, 2, 0 (mod 6) for AB, AC, BC respectively, rows fixed.
    pub fn axial_automorphism(&self, kind: AxialKind) -> Automorphism {
        let m: isize = match kind {
            AxialKind::AB => 4,
            AxialKind::AC => 2,
            AxialKind::BC => 0,
        };
        Automorphism {
            name: format!("xi_{:?}", kind).to_lowercase(),
            perm: self.perm_from(|s| (s.row as isize, m - s.col as isize)),
        }
    }

    /// The three axial reflections (ξ_ab, ξ_ac, ξ_bc).
    pub fn axial_automorphisms(&self) -> [Automorphism; 3] {
        [
            self.axial_automorphism(AxialKind::AB),
            self.axial_automorphism(AxialKind::AC),
            self.axial_automorphism(AxialKind::BC),
        ]
    }

    /// Torus translation by (dr, dc); offsets must have equal parity to be
    /// a site map.
    pub fn translation(&self, dr: usize, dc: usize) -> Result<Automorphism, LatticeError> {
        if dr % 2 != dc % 2 {
            return Err(LatticeError::BadTranslation { dr, dc });
        }
        Ok(Automorphism {
            name: format!("t[{dr},{dc}]"),
            perm: self.perm_from(|s| (s.row as isize + dr as isize, s.col as isize + dc as isize)),
        })
    }

    pub fn identity_automorphism(&self) -> Automorphism {
        Automorphism {
            name: "id".into(),
            perm: (0..self.n as u32).collect(),
        }
    }

    /// JSON debug dump: sites with coordinates and components, the edge
    /// list, and the component sizes.
    pub fn dump_json(&self) -> serde_json::Value {
        let sites: Vec<_> = (0..self.n)
            .map(|v| {
                let s = self.site(v);
                serde_json::json!({
                    "index": v,
                    "row": s.row,
                    "col": s.col,
                    "component": self.component(v).letter().to_string(),
                })
            })
            .collect();
        let mut edges = Vec::with_capacity(self.n_edges());
        for v in 0..self.n {
            for &u in self.neighbors(v) {
                if (u as usize) > v {
                    edges.push(serde_json::json!([v, u]));
                }
            }
        }
        serde_json::json!({
            "schema_version": 1,
            "K": self.spec.k,
            "L": self.spec.l,
            "n_sites": self.n,
            "n_edges": edges.len(),
            "n_faces": self.faces.len(),
            "sites": sites,
            "edges": edges,
        })
    }
}
