//! Computational domains and uniform Cartesian grids.
//!
//! A [`Grid`] covers the bounding box of its domain with a square lattice of
//! step `h`. Every lattice node is classified as interior, boundary or
//! exterior; the interior nodes are the unknowns of the discrete problem.
//! For the unit disk, interior nodes next to the circle carry Shortley–Weller
//! arm fractions: the distance to the boundary crossing in each axis
//! direction, as a fraction of `h`.

use rand::Rng;
use thiserror::Error;

/// Nodes closer than `BOUNDARY_SNAP * h` to the boundary are boundary nodes.
pub const BOUNDARY_SNAP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidSpec(String),
    #[error("invalid mesh step h = {h}: {reason}")]
    InvalidStep { h: f64, reason: String },
    #[error("grid with h = {h} has no interior nodes")]
    DegenerateGrid { h: f64 },
}

/// The domain Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    Rectangle {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// The open set x₁² + x₂² < 1.
    UnitDisk,
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        DomainSpec::Rectangle {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            DomainSpec::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                if ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
                    return Err(GeometryError::InvalidSpec(
                        "rectangle bounds must be finite".into(),
                    ));
                }
                if x_min >= x_max || y_min >= y_max {
                    return Err(GeometryError::InvalidSpec(format!(
                        "rectangle bounds inverted: x in [{x_min}, {x_max}], y in [{y_min}, {y_max}]"
                    )));
                }
                Ok(())
            }
            DomainSpec::UnitDisk => Ok(()),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => (x_max - x_min).hypot(y_max - y_min),
            DomainSpec::UnitDisk => 2.0,
        }
    }

    pub fn centroid(&self) -> [f64; 2] {
        match *self {
            DomainSpec::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => [0.5 * (x_min + x_max), 0.5 * (y_min + y_max)],
            DomainSpec::UnitDisk => [0.0, 0.0],
        }
    }

    /// Whether `x` lies in the closure Ω̄.
    pub fn contains_closed(&self, x: [f64; 2]) -> bool {
        match *self {
            DomainSpec::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => x[0] >= x_min && x[0] <= x_max && x[1] >= y_min && x[1] <= y_max,
            DomainSpec::UnitDisk => x[0] * x[0] + x[1] * x[1] <= 1.0,
        }
    }

    /// Uniform random point of Ω̄.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match *self {
            DomainSpec::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => [
                rng.random_range(x_min..=x_max),
                rng.random_range(y_min..=y_max),
            ],
            DomainSpec::UnitDisk => loop {
                let p = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
                if self.contains_closed(p) {
                    break p;
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    /// Lattice indices; `x = origin + (i, j) * h`.
    pub i: i64,
    pub j: i64,
    pub x: [f64; 2],
    pub kind: NodeKind,
}

/// Axis directions of the five-point stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    East,
    West,
    North,
    South,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::West,
        Direction::North,
        Direction::South,
    ];

    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
            Direction::North => (0, 1),
            Direction::South => (0, -1),
        }
    }
}

/// Arm lengths of an interior node as fractions of `h`, each in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arms {
    pub east: f64,
    pub west: f64,
    pub north: f64,
    pub south: f64,
}

impl Arms {
    pub const FULL: Arms = Arms {
        east: 1.0,
        west: 1.0,
        north: 1.0,
        south: 1.0,
    };

    pub fn get(&self, dir: Direction) -> f64 {
        match dir {
            Direction::East => self.east,
            Direction::West => self.west,
            Direction::North => self.north,
            Direction::South => self.south,
        }
    }

    fn set(&mut self, dir: Direction, v: f64) {
        match dir {
            Direction::East => self.east = v,
            Direction::West => self.west = v,
            Direction::North => self.north = v,
            Direction::South => self.south = v,
        }
    }
}

/// What lies one arm away from an interior node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbor {
    /// Another unknown, at distance `h`.
    Unknown(usize),
    /// The boundary, reached at distance `fraction * h`.
    Boundary { fraction: f64 },
}

#[derive(Debug, Clone)]
pub struct Grid {
    spec: DomainSpec,
    h: f64,
    origin: [f64; 2],
    /// Lattice extent: i in 0..ni, j in 0..nj (indices shifted to start at 0).
    ni: usize,
    nj: usize,
    index_shift: (i64, i64),
    nodes: Vec<Node>,
    /// Unknown index -> node index.
    interior: Vec<usize>,
    /// Node index -> unknown index.
    unknown_of: Vec<Option<usize>>,
    arms: Vec<Arms>,
}

/// Builds the lattice for `spec` with step `h`.
///
/// Nodes are enumerated row-major by `(j, i)`; unknowns inherit that order.
pub fn build_grid(spec: DomainSpec, h: f64) -> Result<Grid, GeometryError> {
    spec.validate()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(GeometryError::InvalidStep {
            h,
            reason: "must be positive and finite".into(),
        });
    }
    if h >= 0.5 * spec.diameter() {
        return Err(GeometryError::InvalidStep {
            h,
            reason: format!("must be smaller than half the diameter {}", spec.diameter()),
        });
    }

    let (origin, ni, nj, index_shift) = match spec {
        DomainSpec::Rectangle {
            x_min,
            x_max,
            y_min,
            y_max,
        } => {
            let cx = lattice_count(x_max - x_min, h)?;
            let cy = lattice_count(y_max - y_min, h)?;
            ([x_min, y_min], cx + 1, cy + 1, (0, 0))
        }
        DomainSpec::UnitDisk => {
            let half = (1.0 / h * (1.0 + 1e-12)).floor() as i64;
            let n = (2 * half + 1) as usize;
            ([0.0, 0.0], n, n, (-half, -half))
        }
    };

    let mut nodes = Vec::with_capacity(ni * nj);
    for jj in 0..nj {
        for ii in 0..ni {
            let (i, j) = (ii as i64 + index_shift.0, jj as i64 + index_shift.1);
            let x = [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
            let kind = match spec {
                DomainSpec::Rectangle { .. } => {
                    if ii == 0 || jj == 0 || ii == ni - 1 || jj == nj - 1 {
                        NodeKind::Boundary
                    } else {
                        NodeKind::Interior
                    }
                }
                DomainSpec::UnitDisk => {
                    let gap = 1.0 - x[0].hypot(x[1]);
                    if gap.abs() <= BOUNDARY_SNAP * h {
                        NodeKind::Boundary
                    } else if gap > 0.0 {
                        NodeKind::Interior
                    } else {
                        NodeKind::Exterior
                    }
                }
            };
            nodes.push(Node { i, j, x, kind });
        }
    }

    let mut interior = Vec::new();
    let mut unknown_of = vec![None; nodes.len()];
    for (k, node) in nodes.iter().enumerate() {
        if node.kind == NodeKind::Interior {
            unknown_of[k] = Some(interior.len());
            interior.push(k);
        }
    }
    if interior.is_empty() {
        return Err(GeometryError::DegenerateGrid { h });
    }

    let mut grid = Grid {
        spec,
        h,
        origin,
        ni,
        nj,
        index_shift,
        nodes,
        interior,
        unknown_of,
        arms: Vec::new(),
    };
    grid.arms = grid
        .interior
        .iter()
        .map(|&k| grid.compute_arms(&grid.nodes[k]))
        .collect();
    Ok(grid)
}

fn lattice_count(length: f64, h: f64) -> Result<usize, GeometryError> {
    let steps = length / h;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(GeometryError::InvalidStep {
            h,
            reason: format!("does not divide the rectangle side length {length}"),
        });
    }
    Ok(rounded as usize)
}

impl Grid {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// All lattice nodes, row-major by `(j, i)`.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    /// Node behind unknown `k`.
    pub fn interior_node(&self, k: usize) -> &Node {
        &self.nodes[self.interior[k]]
    }

    pub fn interior_nodes(&self) -> impl ExactSizeIterator<Item = &Node> + '_ {
        self.interior.iter().map(move |&k| &self.nodes[k])
    }

    pub fn arms(&self, k: usize) -> &Arms {
        &self.arms[k]
    }

    /// Lattice node at `(i, j)`, if it is part of the lattice.
    pub fn node_at(&self, i: i64, j: i64) -> Option<&Node> {
        self.lattice_index(i, j).map(|k| &self.nodes[k])
    }

    /// Unknown index at lattice position `(i, j)`, if that node is interior.
    pub fn unknown_at(&self, i: i64, j: i64) -> Option<usize> {
        self.lattice_index(i, j).and_then(|k| self.unknown_of[k])
    }

    pub fn neighbor(&self, k: usize, dir: Direction) -> Neighbor {
        let node = self.interior_node(k);
        let (di, dj) = dir.offset();
        match self.unknown_at(node.i + di, node.j + dj) {
            Some(u) => Neighbor::Unknown(u),
            None => Neighbor::Boundary {
                fraction: self.arms[k].get(dir),
            },
        }
    }

    /// Points of ∂Ω known to the grid: boundary lattice nodes plus, for the
    /// disk, the crossings of interior-node arms with the circle.
    pub fn boundary_points(&self) -> Vec<[f64; 2]> {
        let mut pts: Vec<[f64; 2]> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Boundary)
            .map(|n| n.x)
            .collect();
        if let DomainSpec::UnitDisk = self.spec {
            for (k, &node_idx) in self.interior.iter().enumerate() {
                let x = self.nodes[node_idx].x;
                for dir in Direction::ALL {
                    if let Neighbor::Boundary { fraction } = self.neighbor(k, dir) {
                        let (di, dj) = dir.offset();
                        let p = [
                            x[0] + di as f64 * fraction * self.h,
                            x[1] + dj as f64 * fraction * self.h,
                        ];
                        let on_lattice = (fraction - 1.0).abs() <= BOUNDARY_SNAP;
                        if !on_lattice {
                            pts.push(p);
                        }
                    }
                }
            }
        }
        pts
    }

    /// Points of Ω̄ used when a maximum over the closed domain is sampled.
    pub fn closure_points(&self) -> Vec<[f64; 2]> {
        let mut pts: Vec<[f64; 2]> = self.interior_nodes().map(|n| n.x).collect();
        pts.extend(self.boundary_points());
        pts
    }

    fn lattice_index(&self, i: i64, j: i64) -> Option<usize> {
        let ii = i - self.index_shift.0;
        let jj = j - self.index_shift.1;
        if ii < 0 || jj < 0 || ii as usize >= self.ni || jj as usize >= self.nj {
            return None;
        }
        Some(jj as usize * self.ni + ii as usize)
    }

    fn compute_arms(&self, node: &Node) -> Arms {
        let mut arms = Arms::FULL;
        if let DomainSpec::UnitDisk = self.spec {
            for dir in Direction::ALL {
                let (di, dj) = dir.offset();
                if self.unknown_at(node.i + di, node.j + dj).is_some() {
                    continue;
                }
                // Distance from the node to the circle along the ray.
                let (along, across) = match dir {
                    Direction::East => (node.x[0], node.x[1]),
                    Direction::West => (-node.x[0], node.x[1]),
                    Direction::North => (node.x[1], node.x[0]),
                    Direction::South => (-node.x[1], node.x[0]),
                };
                let dist = (1.0 - across * across).sqrt() - along;
                arms.set(dir, (dist / self.h).clamp(f64::MIN_POSITIVE, 1.0));
            }
        }
        arms
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }
}
