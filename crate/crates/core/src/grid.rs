//! Structured vertex-centred grids on an interval or an axis-aligned rectangle.
//!
//! Nodes sit on the boundary as well as in the interior. Every node owns a
//! dual cell (half cells on faces, quarter cells at corners) whose measure is
//! used as the quadrature weight of nodal sums. Gradients live on
//! [`GradTerm`]s: one per edge in 1D, and four corner gradients per cell in
//! 2D, each pairing one x-difference with one y-difference that meet at the
//! same corner.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Interval,
    Rectangle,
}

impl DomainKind {
    pub fn dimension(self) -> usize {
        match self {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }
}

/// Small serializable descriptor of a grid (`kind`, `extents`, `counts`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: DomainKind,
    /// `[a, b]` for an interval, `[a, b, c, d]` for `[a,b] x [c,d]`.
    pub extents: Vec<f64>,
    /// Node count per axis.
    pub counts: Vec<usize>,
}

/// One difference quotient `(w[b] - w[a]) / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Difference {
    pub from: usize,
    pub to: usize,
    pub inv_h: f64,
}

/// A gradient sample: one (1D) or two (2D) difference quotients with the
/// measure they represent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradTerm {
    pub components: [Difference; 2],
    pub len: usize,
    pub weight: f64,
}

impl GradTerm {
    pub fn components(&self) -> &[Difference] {
        &self.components[..self.len]
    }
}

#[derive(Clone)]
pub struct Grid {
    spec: GridSpec,
    spacing: Vec<f64>,
    coords: Vec<[f64; 2]>,
    boundary: Vec<bool>,
    corner: Vec<bool>,
    normals: Vec<Option<[f64; 2]>>,
    volumes: Vec<f64>,
    terms: Vec<GradTerm>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// Builds a grid; node ordering is lexicographic with x running fastest.
pub fn build_grid(kind: DomainKind, extents: &[f64], counts: &[usize]) -> Result<Arc<Grid>> {
    Grid::new(GridSpec {
        kind,
        extents: extents.to_vec(),
        counts: counts.to_vec(),
    })
    .map(Arc::new)
}

fn axis_coords(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let dim = spec.kind.dimension();
        if spec.extents.len() != 2 * dim || spec.counts.len() != dim {
            return Err(Error::Config(format!(
                "{:?} needs {} extents and {} node counts, got {} and {}",
                spec.kind,
                2 * dim,
                dim,
                spec.extents.len(),
                spec.counts.len()
            )));
        }
        for axis in 0..dim {
            let (a, b) = (spec.extents[2 * axis], spec.extents[2 * axis + 1]);
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::Config(format!(
                    "degenerate extent [{a}, {b}] on axis {axis}"
                )));
            }
            if spec.counts[axis] < 3 {
                return Err(Error::Config(format!(
                    "node count {} on axis {axis} is below 3",
                    spec.counts[axis]
                )));
            }
        }
        match spec.kind {
            DomainKind::Interval => Ok(Self::interval(spec)),
            DomainKind::Rectangle => Ok(Self::rectangle(spec)),
        }
    }

    fn interval(spec: GridSpec) -> Self {
        let (a, b) = (spec.extents[0], spec.extents[1]);
        let n = spec.counts[0];
        let h = (b - a) / (n - 1) as f64;
        let xs = axis_coords(a, b, n);
        let coords = xs.iter().map(|&x| [x, 0.0]).collect();
        let mut boundary = vec![false; n];
        boundary[0] = true;
        boundary[n - 1] = true;
        let mut normals = vec![None; n];
        normals[0] = Some([-1.0, 0.0]);
        normals[n - 1] = Some([1.0, 0.0]);
        let mut volumes = vec![h; n];
        volumes[0] = h / 2.0;
        volumes[n - 1] = h / 2.0;
        let idle = Difference { from: 0, to: 0, inv_h: 0.0 };
        let terms = (0..n - 1)
            .map(|e| GradTerm {
                components: [
                    Difference { from: e, to: e + 1, inv_h: 1.0 / h },
                    idle,
                ],
                len: 1,
                weight: h,
            })
            .collect();
        Self {
            spec,
            spacing: vec![h],
            coords,
            boundary,
            corner: vec![false; n],
            normals,
            volumes,
            terms,
        }
    }

    fn rectangle(spec: GridSpec) -> Self {
        let (nx, ny) = (spec.counts[0], spec.counts[1]);
        let e = &spec.extents;
        let hx = (e[1] - e[0]) / (nx - 1) as f64;
        let hy = (e[3] - e[2]) / (ny - 1) as f64;
        let xs = axis_coords(e[0], e[1], nx);
        let ys = axis_coords(e[2], e[3], ny);
        let n = nx * ny;
        let idx = |i: usize, j: usize| j * nx + i;

        let mut coords = Vec::with_capacity(n);
        let mut boundary = vec![false; n];
        let mut corner = vec![false; n];
        let mut normals = vec![None; n];
        let mut volumes = vec![0.0; n];
        for j in 0..ny {
            for i in 0..nx {
                let k = idx(i, j);
                coords.push([xs[i], ys[j]]);
                let mut normal = [0.0f64, 0.0];
                if i == 0 {
                    normal[0] = -1.0;
                } else if i == nx - 1 {
                    normal[0] = 1.0;
                }
                if j == 0 {
                    normal[1] = -1.0;
                } else if j == ny - 1 {
                    normal[1] = 1.0;
                }
                if normal != [0.0, 0.0] {
                    boundary[k] = true;
                    let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
                    corner[k] = normal[0] != 0.0 && normal[1] != 0.0;
                    normals[k] = Some([normal[0] / len, normal[1] / len]);
                }
            }
        }

        let quarter = hx * hy / 4.0;
        let mut terms = Vec::with_capacity(4 * (nx - 1) * (ny - 1));
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let (sw, se, nw, ne) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                for node in [sw, se, nw, ne] {
                    volumes[node] += quarter;
                }
                let south = Difference { from: sw, to: se, inv_h: 1.0 / hx };
                let north = Difference { from: nw, to: ne, inv_h: 1.0 / hx };
                let west = Difference { from: sw, to: nw, inv_h: 1.0 / hy };
                let east = Difference { from: se, to: ne, inv_h: 1.0 / hy };
                for (dx, dy) in [(south, west), (south, east), (north, west), (north, east)] {
                    terms.push(GradTerm {
                        components: [dx, dy],
                        len: 2,
                        weight: quarter,
                    });
                }
            }
        }

        Self {
            spec,
            spacing: vec![hx, hy],
            coords,
            boundary,
            corner,
            normals,
            volumes,
            terms,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn kind(&self) -> DomainKind {
        self.spec.kind
    }

    pub fn dimension(&self) -> usize {
        self.spec.kind.dimension()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn counts(&self) -> &[usize] {
        &self.spec.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    /// Coordinates of node `k` (one entry per axis).
    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k][..self.dimension()]
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.boundary[k]
    }

    pub fn is_corner(&self, k: usize) -> bool {
        self.corner[k]
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&k| self.boundary[k])
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&k| !self.boundary[k])
    }

    /// Outward unit normal at a boundary node; corners carry the normalized
    /// sum of the two face normals.
    pub fn normal(&self, k: usize) -> Option<[f64; 2]> {
        self.normals[k]
    }

    /// Measure of the dual cell of node `k`.
    pub fn volume(&self, k: usize) -> f64 {
        self.volumes[k]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn grad_terms(&self) -> &[GradTerm] {
        &self.terms
    }

    /// Half-bandwidth of any matrix assembled from the gradient terms.
    pub fn bandwidth(&self) -> usize {
        match self.spec.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => self.spec.counts[0] + 1,
        }
    }

    /// For a non-corner boundary node, the neighbour one step inward along
    /// the normal and the spacing to it.
    pub fn inward_neighbor(&self, k: usize) -> Option<(usize, f64)> {
        if !self.boundary[k] || self.corner[k] {
            return None;
        }
        let normal = self.normals[k]?;
        match self.spec.kind {
            DomainKind::Interval => {
                if normal[0] < 0.0 {
                    Some((k + 1, self.spacing[0]))
                } else {
                    Some((k - 1, self.spacing[0]))
                }
            }
            DomainKind::Rectangle => {
                let nx = self.spec.counts[0];
                if normal[0] < 0.0 {
                    Some((k + 1, self.spacing[0]))
                } else if normal[0] > 0.0 {
                    Some((k - 1, self.spacing[0]))
                } else if normal[1] < 0.0 {
                    Some((k + nx, self.spacing[1]))
                } else {
                    Some((k - nx, self.spacing[1]))
                }
            }
        }
    }

    /// Euclidean distance from an arbitrary point of the closed domain to the
    /// boundary.
    pub fn distance_to_boundary(&self, point: &[f64]) -> f64 {
        let e = &self.spec.extents;
        (0..self.dimension())
            .map(|axis| (point[axis] - e[2 * axis]).min(e[2 * axis + 1] - point[axis]))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Centres of the grid cells that touch node `k`.
    pub fn adjacent_cell_centers(&self, k: usize) -> Vec<[f64; 2]> {
        match self.spec.kind {
            DomainKind::Interval => {
                let n = self.spec.counts[0];
                let h = self.spacing[0];
                let x = self.coords[k][0];
                let mut out = Vec::with_capacity(2);
                if k > 0 {
                    out.push([x - h / 2.0, 0.0]);
                }
                if k + 1 < n {
                    out.push([x + h / 2.0, 0.0]);
                }
                out
            }
            DomainKind::Rectangle => {
                let (nx, ny) = (self.spec.counts[0], self.spec.counts[1]);
                let (i, j) = (k % nx, k / nx);
                let (hx, hy) = (self.spacing[0], self.spacing[1]);
                let [x, y] = self.coords[k];
                let mut out = Vec::with_capacity(4);
                for (di, dx) in [(i > 0, -hx / 2.0), (i + 1 < nx, hx / 2.0)] {
                    for (dj, dy) in [(j > 0, -hy / 2.0), (j + 1 < ny, hy / 2.0)] {
                        if di && dj {
                            out.push([x + dx, y + dy]);
                        }
                    }
                }
                out
            }
        }
    }

    /// Cells as lists of their corner nodes (2 in 1D, 4 in 2D), with centres.
    pub fn cells(&self) -> Vec<(Vec<usize>, [f64; 2])> {
        match self.spec.kind {
            DomainKind::Interval => (0..self.len() - 1)
                .map(|e| {
                    let c = 0.5 * (self.coords[e][0] + self.coords[e + 1][0]);
                    (vec![e, e + 1], [c, 0.0])
                })
                .collect(),
            DomainKind::Rectangle => {
                let (nx, ny) = (self.spec.counts[0], self.spec.counts[1]);
                let mut out = Vec::with_capacity((nx - 1) * (ny - 1));
                for j in 0..ny - 1 {
                    for i in 0..nx - 1 {
                        let k = j * nx + i;
                        let nodes = vec![k, k + 1, k + nx, k + nx + 1];
                        let c = [
                            0.5 * (self.coords[k][0] + self.coords[k + 1][0]),
                            0.5 * (self.coords[k][1] + self.coords[k + nx][1]),
                        ];
                        out.push((nodes, c));
                    }
                }
                out
            }
        }
    }

    /// Same domain with every cell split in two along each axis.
    pub fn refined(&self) -> Result<Arc<Grid>> {
        let counts: Vec<usize> = self.spec.counts.iter().map(|&n| 2 * (n - 1) + 1).collect();
        build_grid(self.spec.kind, &self.spec.extents, &counts)
    }

    /// Node index of the grid point nearest to the middle of the domain along
    /// the last axis, for cross-sections.
    pub fn midline_nodes(&self) -> Vec<usize> {
        match self.spec.kind {
            DomainKind::Interval => (0..self.len()).collect(),
            DomainKind::Rectangle => {
                let (nx, ny) = (self.spec.counts[0], self.spec.counts[1]);
                let j = ny / 2;
                (0..nx).map(|i| j * nx + i).collect()
            }
        }
    }
}

/// Exact distance `d(x)` from each node to the boundary.
pub fn distance_field(grid: &Arc<Grid>) -> ScalarField {
    let values = (0..grid.len())
        .map(|k| {
            if grid.is_boundary(k) {
                0.0
            } else {
                grid.distance_to_boundary(grid.point(k))
            }
        })
        .collect();
    ScalarField::from_values_unchecked(grid.clone(), values)
}
