//! Cubic cell complex on the thickened torus T²×I.
//!
//! The lattice is periodic in `x` and `z` and open in `y`, with boundary
//! planes at `y = 0` and `y = depth`. Cells are named by their lower corner:
//! an edge by its lower endpoint and direction, a face by its lower corner
//! and normal, a cube by its lower corner.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit(self) -> [i64; 3] {
        match self {
            Axis::X => [1, 0, 0],
            Axis::Y => [0, 1, 0],
            Axis::Z => [0, 0, 1],
        }
    }

    /// The two axes orthogonal to `self`, in x < y < z order.
    pub fn others(self) -> [Axis; 2] {
        match self {
            Axis::X => [Axis::Y, Axis::Z],
            Axis::Y => [Axis::X, Axis::Z],
            Axis::Z => [Axis::X, Axis::Y],
        }
    }

    /// The axis orthogonal to both `self` and `other`.
    pub fn third(self, other: Axis) -> Axis {
        debug_assert_ne!(self, other);
        Axis::ALL
            .into_iter()
            .find(|a| *a != self && *a != other)
            .unwrap()
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// Cell kind. Edges carry their direction, faces their normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Vertex,
    Edge(Axis),
    Face(Axis),
    Cube,
}

impl CellKind {
    pub fn dimension(self) -> usize {
        match self {
            CellKind::Vertex => 0,
            CellKind::Edge(_) => 1,
            CellKind::Face(_) => 2,
            CellKind::Cube => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub kind: CellKind,
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl CellId {
    pub fn vertex(x: i64, y: i64, z: i64) -> Self {
        CellId { kind: CellKind::Vertex, x, y, z }
    }

    pub fn edge(axis: Axis, x: i64, y: i64, z: i64) -> Self {
        CellId { kind: CellKind::Edge(axis), x, y, z }
    }

    pub fn face(normal: Axis, x: i64, y: i64, z: i64) -> Self {
        CellId { kind: CellKind::Face(normal), x, y, z }
    }

    pub fn cube(x: i64, y: i64, z: i64) -> Self {
        CellId { kind: CellKind::Cube, x, y, z }
    }

    pub fn coords(&self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }

    fn shifted(&self, d: [i64; 3], sign: i64) -> Self {
        CellId {
            kind: self.kind,
            x: self.x + sign * d[0],
            y: self.y + sign * d[1],
            z: self.z + sign * d[2],
        }
    }

    /// Cell center in doubled coordinates (so that all centers are integral).
    pub fn doubled_center(&self) -> [i64; 3] {
        let mut c = [2 * self.x, 2 * self.y, 2 * self.z];
        let mut bump = |a: Axis| c[a as usize] += 1;
        match self.kind {
            CellKind::Vertex => {}
            CellKind::Edge(a) => bump(a),
            CellKind::Face(n) => {
                let [a, b] = n.others();
                bump(a);
                bump(b);
            }
            CellKind::Cube => Axis::ALL.into_iter().for_each(bump),
        }
        c
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CellKind::Vertex => write!(f, "v({},{},{})", self.x, self.y, self.z),
            CellKind::Edge(a) => write!(f, "e{}({},{},{})", a.as_char(), self.x, self.y, self.z),
            CellKind::Face(n) => write!(f, "f{}({},{},{})", n.as_char(), self.x, self.y, self.z),
            CellKind::Cube => write!(f, "c({},{},{})", self.x, self.y, self.z),
        }
    }
}

/// Thickened torus of `lx × lz` unit cells and `depth` layers in `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub lx: usize,
    pub lz: usize,
    pub depth: usize,
}

pub fn build_lattice(lx: usize, lz: usize, depth: usize) -> Result<LatticeGeometry> {
    LatticeGeometry::new(lx, lz, depth)
}

impl LatticeGeometry {
    pub fn new(lx: usize, lz: usize, depth: usize) -> Result<Self> {
        if lx < 2 || lz < 2 || depth < 2 {
            return Err(Error::InvalidGeometry { lx, lz, depth });
        }
        Ok(LatticeGeometry { lx, lz, depth })
    }

    fn d(&self) -> i64 {
        self.depth as i64
    }

    /// Inclusive y-range of the lower corner of cells of this kind.
    fn y_range(&self, kind: CellKind) -> (i64, i64) {
        match kind {
            CellKind::Vertex | CellKind::Edge(Axis::X | Axis::Z) | CellKind::Face(Axis::Y) => {
                (0, self.d())
            }
            CellKind::Edge(Axis::Y) | CellKind::Face(Axis::X | Axis::Z) | CellKind::Cube => {
                (0, self.d() - 1)
            }
        }
    }

    /// Reduce `x`, `z` modulo the periodic extents. Returns `None` if `y` lies
    /// outside the open interval allowed for this kind of cell.
    pub fn canonical(&self, c: CellId) -> Option<CellId> {
        let (lo, hi) = self.y_range(c.kind);
        if c.y < lo || c.y > hi {
            return None;
        }
        Some(CellId {
            kind: c.kind,
            x: c.x.rem_euclid(self.lx as i64),
            y: c.y,
            z: c.z.rem_euclid(self.lz as i64),
        })
    }

    pub fn contains(&self, c: &CellId) -> bool {
        self.canonical(*c) == Some(*c)
    }

    fn check(&self, c: &CellId) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::InvalidCell(*c))
        }
    }

    fn cells_of(&self, kind: CellKind) -> impl Iterator<Item = CellId> + '_ {
        let (lo, hi) = self.y_range(kind);
        let (lx, lz) = (self.lx as i64, self.lz as i64);
        (lo..=hi).flat_map(move |y| {
            (0..lz).flat_map(move |z| (0..lx).map(move |x| CellId { kind, x, y, z }))
        })
    }

    /// Vertices ordered by (y, z, x).
    pub fn vertices(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells_of(CellKind::Vertex)
    }

    /// Edges grouped by direction (x, y, z), each group ordered by (y, z, x).
    pub fn edges(&self) -> impl Iterator<Item = CellId> + '_ {
        Axis::ALL.into_iter().flat_map(move |a| self.cells_of(CellKind::Edge(a)))
    }

    /// Faces grouped by normal (x, y, z), each group ordered by (y, z, x).
    pub fn faces(&self) -> impl Iterator<Item = CellId> + '_ {
        Axis::ALL.into_iter().flat_map(move |n| self.cells_of(CellKind::Face(n)))
    }

    pub fn cubes(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells_of(CellKind::Cube)
    }

    pub fn counts(&self) -> [usize; 4] {
        [
            self.vertices().count(),
            self.edges().count(),
            self.faces().count(),
            self.cubes().count(),
        ]
    }

    pub fn euler_characteristic(&self) -> i64 {
        let [v, e, f, c] = self.counts();
        v as i64 - e as i64 + f as i64 - c as i64
    }

    /// Cells in the boundary of `c` (∂). Vertices have empty boundary.
    pub fn boundary_cells(&self, c: &CellId) -> Result<Vec<CellId>> {
        self.check(c)?;
        let raw: Vec<CellId> = match c.kind {
            CellKind::Vertex => vec![],
            CellKind::Edge(a) => {
                let v = CellId::vertex(c.x, c.y, c.z);
                vec![v, v.shifted(a.unit(), 1)]
            }
            CellKind::Face(n) => {
                let [a, b] = n.others();
                let ea = CellId::edge(a, c.x, c.y, c.z);
                let eb = CellId::edge(b, c.x, c.y, c.z);
                vec![ea, ea.shifted(b.unit(), 1), eb, eb.shifted(a.unit(), 1)]
            }
            CellKind::Cube => Axis::ALL
                .into_iter()
                .flat_map(|n| {
                    let f = CellId::face(n, c.x, c.y, c.z);
                    [f, f.shifted(n.unit(), 1)]
                })
                .collect(),
        };
        raw.into_iter()
            .map(|r| self.canonical(r).ok_or(Error::InvalidCell(r)))
            .collect()
    }

    /// Cells whose boundary contains `c` (∂†), truncated at the open planes.
    pub fn coboundary_cells(&self, c: &CellId) -> Result<Vec<CellId>> {
        self.check(c)?;
        let raw: Vec<CellId> = match c.kind {
            CellKind::Vertex => Axis::ALL
                .into_iter()
                .flat_map(|a| {
                    let e = CellId::edge(a, c.x, c.y, c.z);
                    [e, e.shifted(a.unit(), -1)]
                })
                .collect(),
            CellKind::Edge(a) => a
                .others()
                .into_iter()
                .flat_map(|n| {
                    let b = a.third(n);
                    let f = CellId::face(n, c.x, c.y, c.z);
                    [f, f.shifted(b.unit(), -1)]
                })
                .collect(),
            CellKind::Face(n) => {
                let q = CellId::cube(c.x, c.y, c.z);
                vec![q, q.shifted(n.unit(), -1)]
            }
            CellKind::Cube => vec![],
        };
        Ok(raw.into_iter().filter_map(|r| self.canonical(r)).collect())
    }

    pub fn on_lower_plane(&self, c: &CellId) -> bool {
        self.in_plane(c, 0)
    }

    pub fn on_upper_plane(&self, c: &CellId) -> bool {
        self.in_plane(c, self.d())
    }

    /// True when the cell lies entirely inside the plane `y = level`.
    fn in_plane(&self, c: &CellId, level: i64) -> bool {
        c.y == level
            && matches!(
                c.kind,
                CellKind::Vertex | CellKind::Edge(Axis::X | Axis::Z) | CellKind::Face(Axis::Y)
            )
    }

    /// The y-directed edge leaving a vertex of the `y = 0` plane.
    pub fn perpendicular_edge(&self, v: &CellId) -> Result<CellId> {
        self.check(v)?;
        if v.kind != CellKind::Vertex || !self.on_lower_plane(v) {
            return Err(Error::NotOnBoundary(*v));
        }
        Ok(CellId::edge(Axis::Y, v.x, 0, v.z))
    }

    /// The face spanned by a `y = 0` plane edge and the +y direction.
    pub fn perpendicular_face(&self, e: &CellId) -> Result<CellId> {
        self.check(e)?;
        match e.kind {
            CellKind::Edge(a @ (Axis::X | Axis::Z)) if e.y == 0 => {
                Ok(CellId::face(a.third(Axis::Y), e.x, 0, e.z))
            }
            _ => Err(Error::NotOnBoundary(*e)),
        }
    }

    /// Periodic Chebyshev distance between cell centers, in doubled units.
    pub fn doubled_distance(&self, a: &CellId, b: &CellId) -> i64 {
        let (ca, cb) = (a.doubled_center(), b.doubled_center());
        let per = [2 * self.lx as i64, 0, 2 * self.lz as i64];
        (0..3)
            .map(|i| {
                let d = (ca[i] - cb[i]).abs();
                if per[i] > 0 {
                    d.min(per[i] - d)
                } else {
                    d
                }
            })
            .max()
            .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(build_lattice(1, 2, 2).is_err());
        assert!(build_lattice(2, 1, 2).is_err());
        assert!(build_lattice(2, 2, 1).is_err());
    }

    #[test]
    fn small_lattice_counts() {
        let g = build_lattice(2, 2, 2).unwrap();
        assert_eq!(g.vertices().count(), 12);
        assert_eq!(g.euler_characteristic(), 0);
    }

    #[test]
    fn closed_form_counts() {
        for lx in 2..=3 {
            for lz in 2..=3 {
                for d in 2..=3 {
                    let g = build_lattice(lx, lz, d).unwrap();
                    let a = lx * lz;
                    assert_eq!(
                        g.counts(),
                        [a * (d + 1), a * (3 * d + 2), a * (3 * d + 1), a * d]
                    );
                    assert_eq!(g.euler_characteristic(), 0);
                }
            }
        }
    }

    #[test]
    fn coordinate_ranges() {
        let g = build_lattice(3, 2, 4).unwrap();
        let ys: Vec<i64> = g.vertices().map(|v| v.y).collect();
        assert_eq!(*ys.iter().min().unwrap(), 0);
        assert_eq!(*ys.iter().max().unwrap(), 4);
        let mut xs: Vec<i64> = g.vertices().map(|v| v.x).collect();
        xs.sort();
        xs.dedup();
        assert_eq!(xs, vec![0, 1, 2]);
        assert_eq!(g.canonical(CellId::vertex(3, 0, -1)), Some(CellId::vertex(0, 0, 1)));
        assert_eq!(g.canonical(CellId::vertex(0, 5, 0)), None);
    }

    #[test]
    fn star_sizes() {
        let g = build_lattice(3, 3, 3).unwrap();
        let n = |c: CellId| g.coboundary_cells(&c).unwrap().len();
        assert_eq!(n(CellId::vertex(1, 1, 1)), 6);
        assert_eq!(n(CellId::vertex(1, 0, 1)), 5);
        assert_eq!(n(CellId::vertex(1, 3, 1)), 5);
        assert_eq!(n(CellId::edge(Axis::X, 0, 1, 0)), 4);
        assert_eq!(n(CellId::edge(Axis::Y, 0, 0, 0)), 4);
        assert_eq!(n(CellId::edge(Axis::X, 0, 0, 0)), 3);
        assert_eq!(g.boundary_cells(&CellId::edge(Axis::Z, 0, 0, 2)).unwrap().len(), 2);
        assert_eq!(g.boundary_cells(&CellId::face(Axis::Y, 2, 3, 2)).unwrap().len(), 4);
        assert_eq!(g.boundary_cells(&CellId::cube(2, 2, 2)).unwrap().len(), 6);
    }

    #[test]
    fn incidence_is_symmetric() {
        let g = build_lattice(2, 3, 2).unwrap();
        for kind in [0usize, 1, 2] {
            let lower: Vec<CellId> = match kind {
                0 => g.vertices().collect(),
                1 => g.edges().collect(),
                _ => g.faces().collect(),
            };
            for c in &lower {
                for up in g.coboundary_cells(c).unwrap() {
                    assert!(g.boundary_cells(&up).unwrap().contains(c));
                }
            }
        }
        for f in g.faces() {
            for e in g.boundary_cells(&f).unwrap() {
                assert!(g.coboundary_cells(&e).unwrap().contains(&f));
            }
        }
        for c in g.cubes() {
            for f in g.boundary_cells(&c).unwrap() {
                assert!(g.coboundary_cells(&f).unwrap().contains(&c));
            }
        }
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        for (lx, lz, d) in [(2, 2, 2), (3, 2, 3), (2, 3, 2)] {
            let g = build_lattice(lx, lz, d).unwrap();
            let cells: Vec<CellId> = g.cubes().chain(g.faces()).collect();
            for c in cells {
                let mut parity: HashMap<CellId, u32> = HashMap::new();
                for f in g.boundary_cells(&c).unwrap() {
                    for e in g.boundary_cells(&f).unwrap() {
                        *parity.entry(e).or_default() += 1;
                    }
                }
                assert!(parity.values().all(|p| p % 2 == 0), "{c}");
            }
        }
    }

    #[test]
    fn perpendicular_maps() {
        let g = build_lattice(2, 2, 2).unwrap();
        assert_eq!(
            g.perpendicular_edge(&CellId::vertex(1, 0, 1)).unwrap(),
            CellId::edge(Axis::Y, 1, 0, 1)
        );
        assert_eq!(
            g.perpendicular_edge(&CellId::vertex(0, 0, 0)).unwrap(),
            CellId::edge(Axis::Y, 0, 0, 0)
        );
        assert!(g.perpendicular_edge(&CellId::vertex(0, 1, 0)).is_err());

        let f = g.perpendicular_face(&CellId::edge(Axis::Z, 0, 0, 0)).unwrap();
        assert_eq!(f, CellId::face(Axis::X, 0, 0, 0));
        // The face spans y in [0,1] and z in [0,1].
        let mut bd = g.boundary_cells(&f).unwrap();
        bd.sort();
        assert!(bd.contains(&CellId::edge(Axis::Z, 0, 0, 0)));
        assert!(bd.contains(&CellId::edge(Axis::Z, 0, 1, 0)));
        assert!(bd.contains(&CellId::edge(Axis::Y, 0, 0, 1)));

        let f = g.perpendicular_face(&CellId::edge(Axis::X, 0, 0, 1)).unwrap();
        assert_eq!(f, CellId::face(Axis::Z, 0, 0, 1));
        assert!(g.perpendicular_face(&CellId::edge(Axis::X, 0, 1, 1)).is_err());
        assert!(g.perpendicular_face(&CellId::edge(Axis::Y, 0, 0, 1)).is_err());
    }

    #[test]
    fn deterministic_enumeration() {
        let a: Vec<CellId> = build_lattice(3, 2, 2).unwrap().faces().collect();
        let b: Vec<CellId> = build_lattice(3, 2, 2).unwrap().faces().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_cell_rejected() {
        let g = build_lattice(2, 2, 2).unwrap();
        assert!(g.boundary_cells(&CellId::cube(0, 2, 0)).is_err());
        assert!(g.coboundary_cells(&CellId::edge(Axis::Y, 0, 2, 0)).is_err());
    }
}
