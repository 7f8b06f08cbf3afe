//! Structured quadrilateral meshes with unique edge identification,
//! periodic pairing, boundary tags, and optional tanh grading of the
//! y-coordinate toward the domain midline.

use super::HdgError;

/// Element side, in the fixed traversal order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom = 0,
    Right = 1,
    Top = 2,
    Left = 3,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    /// Outward unit normal of this side on an axis-aligned element.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Side::Bottom => [0.0, -1.0],
            Side::Right => [1.0, 0.0],
            Side::Top => [0.0, 1.0],
            Side::Left => [-1.0, 0.0],
        }
    }

    /// Sign relating the side's counterclockwise tangent to the global edge
    /// tangent (+x for horizontal edges, +y for vertical ones).
    pub fn orientation(self) -> f64 {
        match self {
            Side::Bottom | Side::Right => 1.0,
            Side::Top | Side::Left => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Bottom,
    Top,
    Left,
    Right,
}

/// A unique mesh edge. Horizontal edges are parameterized by x, vertical
/// ones by y; the global tangent points along the increasing parameter.
#[derive(Debug, Clone)]
pub struct Edge {
    pub horizontal: bool,
    pub boundary: Option<BoundaryTag>,
    /// Start point (periodic edges use the geometric location on the
    /// low-coordinate side of the identification).
    pub start: [f64; 2],
    pub length: f64,
    /// Incident (element, side) pairs; one entry on non-periodic boundaries.
    pub sides: Vec<(usize, Side)>,
}

impl Edge {
    /// Global unit tangent.
    pub fn tangent(&self) -> [f64; 2] {
        if self.horizontal {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    }

    /// Physical coordinates of a point at reference coordinate `xi` in
    /// [-1, 1] along the edge.
    pub fn point(&self, xi: f64) -> [f64; 2] {
        let s = 0.5 * (xi + 1.0) * self.length;
        if self.horizontal {
            [self.start[0] + s, self.start[1]]
        } else {
            [self.start[0], self.start[1] + s]
        }
    }
}

/// Structured quadrilateral mesh of an axis-aligned rectangle.
#[derive(Debug, Clone)]
pub struct QuadMesh {
    pub nx: usize,
    pub ny: usize,
    pub x_coords: Vec<f64>,
    pub y_coords: Vec<f64>,
    pub periodic_x: bool,
    pub periodic_y: bool,
    pub edges: Vec<Edge>,
    /// Per element: edge ids for [bottom, right, top, left].
    pub elem_edges: Vec<[usize; 4]>,
}

impl QuadMesh {
    pub fn n_elems(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn elem_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Lower-left corner and extents of an element.
    pub fn elem_box(&self, el: usize) -> (f64, f64, f64, f64) {
        let ix = el % self.nx;
        let iy = el / self.nx;
        let x0 = self.x_coords[ix];
        let y0 = self.y_coords[iy];
        (
            x0,
            y0,
            self.x_coords[ix + 1] - x0,
            self.y_coords[iy + 1] - y0,
        )
    }

    /// Total domain area.
    pub fn area(&self) -> f64 {
        (self.x_coords[self.nx] - self.x_coords[0]) * (self.y_coords[self.ny] - self.y_coords[0])
    }
}

/// Builds an `nx` by `ny` structured mesh of `[x0,x1] x [y0,y1]`. Periodic
/// flags identify opposite edges; `grading > 0` clusters the y-coordinates
/// toward the domain midline with a tanh map.
pub fn build_mesh(
    nx: usize,
    ny: usize,
    bounds: (f64, f64, f64, f64),
    periodic_x: bool,
    periodic_y: bool,
    grading: Option<f64>,
) -> Result<QuadMesh, HdgError> {
    let (x0, x1, y0, y1) = bounds;
    if nx == 0 || ny == 0 {
        return Err(HdgError::InvalidMesh("nx and ny must be at least 1".into()));
    }
    if !(x1 > x0) || !(y1 > y0) {
        return Err(HdgError::InvalidMesh(format!(
            "degenerate bounds [{x0},{x1}] x [{y0},{y1}]"
        )));
    }
    let x_coords: Vec<f64> = (0..=nx)
        .map(|i| x0 + (x1 - x0) * i as f64 / nx as f64)
        .collect();
    let beta = grading.unwrap_or(0.0);
    let y_coords: Vec<f64> = (0..=ny)
        .map(|j| {
            let s = -1.0 + 2.0 * j as f64 / ny as f64;
            let t = if beta > 0.0 {
                (beta * s).tanh() / beta.tanh()
            } else {
                s
            };
            0.5 * (y0 + y1) + 0.5 * (y1 - y0) * t
        })
        .collect();

    // Horizontal edges sit at y-level j below element row j; level 0 wraps to
    // the top row under periodicity. Vertical edges sit at x-level i left of
    // element column i.
    let h_levels = if periodic_y { ny } else { ny + 1 };
    let v_levels = if periodic_x { nx } else { nx + 1 };
    let n_h = nx * h_levels;
    let h_id = |i: usize, j: usize| j * nx + i;
    let v_id = |i: usize, j: usize| n_h + i * ny + j;

    let mut edges: Vec<Edge> = Vec::with_capacity(n_h + v_levels * ny);
    for j in 0..h_levels {
        for i in 0..nx {
            let boundary = if periodic_y {
                None
            } else if j == 0 {
                Some(BoundaryTag::Bottom)
            } else if j == ny {
                Some(BoundaryTag::Top)
            } else {
                None
            };
            edges.push(Edge {
                horizontal: true,
                boundary,
                start: [x_coords[i], y_coords[j]],
                length: x_coords[i + 1] - x_coords[i],
                sides: Vec::new(),
            });
        }
    }
    for i in 0..v_levels {
        for j in 0..ny {
            let boundary = if periodic_x {
                None
            } else if i == 0 {
                Some(BoundaryTag::Left)
            } else if i == nx {
                Some(BoundaryTag::Right)
            } else {
                None
            };
            edges.push(Edge {
                horizontal: false,
                boundary,
                start: [x_coords[i], y_coords[j]],
                length: y_coords[j + 1] - y_coords[j],
                sides: Vec::new(),
            });
        }
    }

    let mut elem_edges = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let el = iy * nx + ix;
            let bottom = h_id(ix, iy);
            let top = h_id(ix, if periodic_y { (iy + 1) % ny } else { iy + 1 });
            let left = v_id(ix, iy);
            let right = v_id(if periodic_x { (ix + 1) % nx } else { ix + 1 }, iy);
            elem_edges.push([bottom, right, top, left]);
            edges[bottom].sides.push((el, Side::Bottom));
            edges[right].sides.push((el, Side::Right));
            edges[top].sides.push((el, Side::Top));
            edges[left].sides.push((el, Side::Left));
        }
    }
    for (id, e) in edges.iter().enumerate() {
        let expect = if e.boundary.is_some() { 1 } else { 2 };
        if e.sides.len() != expect {
            return Err(HdgError::InvalidMesh(format!(
                "edge {id} has {} incident sides, expected {expect}",
                e.sides.len()
            )));
        }
    }
    Ok(QuadMesh {
        nx,
        ny,
        x_coords,
        y_coords,
        periodic_x,
        periodic_y,
        edges,
        elem_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_counts() {
        let m = build_mesh(1, 1, (0.0, 1.0, 0.0, 1.0), false, false, None).unwrap();
        assert_eq!(m.n_elems(), 1);
        assert_eq!(m.n_edges(), 4);
    }

    #[test]
    fn four_by_four_counts() {
        let m = build_mesh(4, 4, (0.0, 1.0, 0.0, 1.0), false, false, None).unwrap();
        assert_eq!(m.n_elems(), 16);
        assert_eq!(m.n_edges(), 40);
        // Trace dof count at p=1: 40 edges * 4 fields * 2 nodes + 16 rho.
        let p = 1;
        assert_eq!(m.n_edges() * 4 * (p + 1) + m.n_elems(), 336);
    }

    #[test]
    fn fully_periodic_two_by_two() {
        let m = build_mesh(2, 2, (0.0, 1.0, 0.0, 1.0), true, true, None).unwrap();
        assert_eq!(m.n_edges(), 8);
        assert!(m.edges.iter().all(|e| e.boundary.is_none()));
        assert!(m.edges.iter().all(|e| e.sides.len() == 2));
    }

    #[test]
    fn interior_edges_have_two_sides_with_opposite_normals() {
        let m = build_mesh(3, 2, (0.0, 3.0, 0.0, 2.0), false, false, None).unwrap();
        for e in &m.edges {
            if e.boundary.is_none() {
                assert_eq!(e.sides.len(), 2);
                let n0 = e.sides[0].1.normal();
                let n1 = e.sides[1].1.normal();
                assert_eq!(n0[0], -n1[0]);
                assert_eq!(n0[1], -n1[1]);
            }
        }
    }

    #[test]
    fn grading_clusters_toward_midline() {
        let m = build_mesh(1, 8, (0.0, 1.0, -1.0, 1.0), false, false, Some(2.0)).unwrap();
        // Spacing near the midline must be smaller than near the walls.
        let mid = m.y_coords[5] - m.y_coords[4];
        let wall = m.y_coords[1] - m.y_coords[0];
        assert!(mid < wall);
        assert!((m.y_coords[0] + 1.0).abs() < 1e-14);
        assert!((m.y_coords[8] - 1.0).abs() < 1e-14);
        // Monotone coordinates.
        for w in m.y_coords.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(build_mesh(2, 2, (0.0, 0.0, 0.0, 1.0), false, false, None).is_err());
        assert!(build_mesh(0, 2, (0.0, 1.0, 0.0, 1.0), false, false, None).is_err());
    }

    #[test]
    fn edge_points_follow_parameter() {
        let m = build_mesh(2, 2, (0.0, 2.0, 0.0, 2.0), false, false, None).unwrap();
        let e = &m.edges[m.elem_edges[0][Side::Right as usize]];
        assert!(!e.horizontal);
        let p0 = e.point(-1.0);
        let p1 = e.point(1.0);
        assert!(p1[1] > p0[1]);
        assert_eq!(p0[0], p1[0]);
    }
}
