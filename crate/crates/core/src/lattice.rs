//! Open-boundary square lattice with gauge qubits on links.
//!
//! Vertices sit on an `ly × lx` grid (row 0 is the top row). Link indices are
//! row-major: for each row, its horizontal links come first (left to right),
//! followed by the vertical links hanging down from that row. Pinned extra
//! links are appended after all grid links in the order they were declared.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type LinkId = usize;
pub type VertexId = usize;
pub type PlaquetteId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    fn direction(self) -> Direction {
        match self {
            Side::Left => Direction::W,
            Side::Right => Direction::E,
            Side::Top => Direction::N,
            Side::Bottom => Direction::S,
        }
    }
}

/// Compass direction of a link as seen from a vertex or plaquette centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

/// An extra boundary link whose far end is an external, immobile vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraLink {
    pub side: Side,
    /// Attached grid vertex as `(row, col)`.
    pub vertex: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub lx: usize,
    pub ly: usize,
    #[serde(default)]
    pub pinned_links: Vec<ExtraLink>,
}

impl LatticeSpec {
    pub fn new(lx: usize, ly: usize) -> Self {
        Self {
            lx,
            ly,
            pinned_links: Vec::new(),
        }
    }

    pub fn with_pinned(mut self, side: Side, row: usize, col: usize) -> Self {
        self.pinned_links.push(ExtraLink {
            side,
            vertex: (row, col),
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Horizontal,
    Vertical,
    Pinned(Side),
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Horizontal => "horizontal",
            LinkKind::Vertical => "vertical",
            LinkKind::Pinned(Side::Left) => "pinned_left",
            LinkKind::Pinned(Side::Right) => "pinned_right",
            LinkKind::Pinned(Side::Top) => "pinned_top",
            LinkKind::Pinned(Side::Bottom) => "pinned_bottom",
        }
    }
}

/// A link qubit. For grid links `(row, col)` is the top/left endpoint; for
/// pinned links it is the attached grid vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub id: LinkId,
    pub kind: LinkKind,
    pub row: usize,
    pub col: usize,
}

impl Link {
    pub fn is_pinned(&self) -> bool {
        matches!(self.kind, LinkKind::Pinned(_))
    }
}

/// A node a string can end on: a grid vertex or the external vertex at the
/// far end of a pinned link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Vertex(VertexId),
    External(LinkId),
}

#[derive(Debug, Clone)]
pub struct Lattice {
    lx: usize,
    ly: usize,
    links: Vec<Link>,
    vertex_supports: Vec<Vec<LinkId>>,
    plaquette_supports: Vec<[LinkId; 4]>,
    link_vertices: Vec<Vec<VertexId>>,
    link_plaquettes: Vec<Vec<PlaquetteId>>,
}

impl Lattice {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        build_lattice(spec)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_grid_links(&self) -> usize {
        (self.lx - 1) * self.ly + self.lx * (self.ly - 1)
    }

    pub fn n_vertices(&self) -> usize {
        self.lx * self.ly
    }

    pub fn n_plaquettes(&self) -> usize {
        (self.lx - 1) * (self.ly - 1)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn pinned_links(&self) -> impl Iterator<Item = &Link> + '_ {
        self.links.iter().filter(|l| l.is_pinned())
    }

    pub fn pinned_link_ids(&self) -> BTreeSet<LinkId> {
        self.pinned_links().map(|l| l.id).collect()
    }

    pub fn vertex_id(&self, row: usize, col: usize) -> VertexId {
        debug_assert!(row < self.ly && col < self.lx);
        row * self.lx + col
    }

    pub fn vertex_coords(&self, v: VertexId) -> (usize, usize) {
        (v / self.lx, v % self.lx)
    }

    pub fn horizontal_link(&self, row: usize, col: usize) -> Option<LinkId> {
        (row < self.ly && col + 1 < self.lx).then(|| row * (2 * self.lx - 1) + col)
    }

    pub fn vertical_link(&self, row: usize, col: usize) -> Option<LinkId> {
        (row + 1 < self.ly && col < self.lx).then(|| row * (2 * self.lx - 1) + self.lx - 1 + col)
    }

    /// Support of the vertex operator, ascending link ids (includes pinned links).
    pub fn vertex_support(&self, v: VertexId) -> &[LinkId] {
        &self.vertex_supports[v]
    }

    pub fn vertex_supports(&self) -> &[Vec<LinkId>] {
        &self.vertex_supports
    }

    /// Support of the plaquette operator as `[top, bottom, left, right]`.
    pub fn plaquette_support(&self, p: PlaquetteId) -> &[LinkId; 4] {
        &self.plaquette_supports[p]
    }

    pub fn plaquette_supports(&self) -> &[[LinkId; 4]] {
        &self.plaquette_supports
    }

    pub fn plaquette_coords(&self, p: PlaquetteId) -> (usize, usize) {
        (p / (self.lx - 1), p % (self.lx - 1))
    }

    /// Grid vertices touched by a link (two for grid links, one for pinned).
    pub fn link_vertices(&self, l: LinkId) -> &[VertexId] {
        &self.link_vertices[l]
    }

    pub fn link_plaquettes(&self, l: LinkId) -> &[PlaquetteId] {
        &self.link_plaquettes[l]
    }

    /// Grid link in exactly one plaquette.
    pub fn is_boundary_link(&self, l: LinkId) -> bool {
        self.link_plaquettes[l].len() == 1
    }

    pub fn is_bulk_link(&self, l: LinkId) -> bool {
        self.link_plaquettes[l].len() == 2
    }

    /// Link attached to vertex `v` in direction `dir`, including pinned links.
    pub fn vertex_link(&self, v: VertexId, dir: Direction) -> Option<LinkId> {
        let (r, c) = self.vertex_coords(v);
        let grid = match dir {
            Direction::N => r.checked_sub(1).and_then(|r| self.vertical_link(r, c)),
            Direction::S => self.vertical_link(r, c),
            Direction::W => c.checked_sub(1).and_then(|c| self.horizontal_link(r, c)),
            Direction::E => self.horizontal_link(r, c),
        };
        grid.or_else(|| {
            self.pinned_links()
                .find(|l| {
                    (l.row, l.col) == (r, c)
                        && matches!(l.kind, LinkKind::Pinned(side) if side.direction() == dir)
                })
                .map(|l| l.id)
        })
    }

    pub fn plaquette_link(&self, p: PlaquetteId, dir: Direction) -> LinkId {
        let [top, bottom, left, right] = self.plaquette_supports[p];
        match dir {
            Direction::N => top,
            Direction::S => bottom,
            Direction::W => left,
            Direction::E => right,
        }
    }

    /// The grid link joining two vertices, if they are nearest neighbours.
    pub fn link_between(&self, a: VertexId, b: VertexId) -> Option<LinkId> {
        let (ra, ca) = self.vertex_coords(a);
        let (rb, cb) = self.vertex_coords(b);
        if ra == rb && ca.abs_diff(cb) == 1 {
            self.horizontal_link(ra, ca.min(cb))
        } else if ca == cb && ra.abs_diff(rb) == 1 {
            self.vertical_link(ra.min(rb), ca)
        } else {
            None
        }
    }

    pub fn manhattan_distance(&self, a: VertexId, b: VertexId) -> usize {
        let (ra, ca) = self.vertex_coords(a);
        let (rb, cb) = self.vertex_coords(b);
        ra.abs_diff(rb) + ca.abs_diff(cb)
    }

    /// Nodes joined by a link: two grid vertices, or a grid vertex and the
    /// external node of a pinned link.
    pub fn link_nodes(&self, l: LinkId) -> [Node; 2] {
        let vs = &self.link_vertices[l];
        if self.links[l].is_pinned() {
            [Node::Vertex(vs[0]), Node::External(l)]
        } else {
            [Node::Vertex(vs[0]), Node::Vertex(vs[1])]
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let links: Vec<_> = self
            .links
            .iter()
            .map(|l| {
                serde_json::json!({
                    "id": l.id,
                    "kind": l.kind.as_str(),
                    "row": l.row,
                    "col": l.col,
                    "pinned": l.is_pinned(),
                })
            })
            .collect();
        serde_json::json!({
            "lx": self.lx,
            "ly": self.ly,
            "links": links,
            "vertex_supports": self.vertex_supports,
            "plaquette_supports": self.plaquette_supports,
        })
    }
}

pub fn build_lattice(spec: &LatticeSpec) -> Result<Lattice> {
    let (lx, ly) = (spec.lx, spec.ly);
    if lx < 2 || ly < 2 {
        return Err(Error::InvalidLattice(format!(
            "need lx, ly >= 2, got {lx}x{ly}"
        )));
    }
    let mut links = Vec::with_capacity(2 * lx * ly);
    for r in 0..ly {
        for c in 0..lx - 1 {
            links.push(Link {
                id: links.len(),
                kind: LinkKind::Horizontal,
                row: r,
                col: c,
            });
        }
        if r + 1 < ly {
            for c in 0..lx {
                links.push(Link {
                    id: links.len(),
                    kind: LinkKind::Vertical,
                    row: r,
                    col: c,
                });
            }
        }
    }

    let mut seen = BTreeSet::new();
    for extra in &spec.pinned_links {
        let (r, c) = extra.vertex;
        if r >= ly || c >= lx {
            return Err(Error::InvalidLattice(format!(
                "pinned link vertex ({r},{c}) outside the {lx}x{ly} grid"
            )));
        }
        let on_side = match extra.side {
            Side::Left => c == 0,
            Side::Right => c == lx - 1,
            Side::Top => r == 0,
            Side::Bottom => r == ly - 1,
        };
        if !on_side {
            return Err(Error::InvalidLattice(format!(
                "pinned link on {:?} side needs a boundary vertex, got ({r},{c})",
                extra.side
            )));
        }
        if !seen.insert((extra.side, r, c)) {
            return Err(Error::InvalidLattice(format!(
                "duplicate pinned link at ({r},{c}) {:?}",
                extra.side
            )));
        }
        links.push(Link {
            id: links.len(),
            kind: LinkKind::Pinned(extra.side),
            row: r,
            col: c,
        });
    }

    let n_vertices = lx * ly;
    let mut link_vertices = vec![Vec::with_capacity(2); links.len()];
    let mut vertex_supports = vec![Vec::with_capacity(4); n_vertices];
    for link in &links {
        let (r, c) = (link.row, link.col);
        let ends = match link.kind {
            LinkKind::Horizontal => vec![r * lx + c, r * lx + c + 1],
            LinkKind::Vertical => vec![r * lx + c, (r + 1) * lx + c],
            LinkKind::Pinned(_) => vec![r * lx + c],
        };
        for &v in &ends {
            vertex_supports[v].push(link.id);
        }
        link_vertices[link.id] = ends;
    }
    for s in &mut vertex_supports {
        s.sort_unstable();
    }

    let stride = 2 * lx - 1;
    let mut plaquette_supports = Vec::with_capacity((lx - 1) * (ly - 1));
    let mut link_plaquettes = vec![Vec::new(); links.len()];
    for r in 0..ly - 1 {
        for c in 0..lx - 1 {
            let top = r * stride + c;
            let bottom = (r + 1) * stride + c;
            let left = r * stride + lx - 1 + c;
            let right = left + 1;
            let p = plaquette_supports.len();
            for l in [top, bottom, left, right] {
                link_plaquettes[l].push(p);
            }
            plaquette_supports.push([top, bottom, left, right]);
        }
    }

    Ok(Lattice {
        lx,
        ly,
        links,
        vertex_supports,
        plaquette_supports,
        link_vertices,
        link_plaquettes,
    })
}

/// Closed-form entangling-gate count of one gate-level Trotter cycle.
pub fn entangling_count_per_cycle(lx: usize, ly: usize) -> usize {
    16 * lx * ly + 8 - 12 * (lx + ly)
}

/// Mean Manhattan distance over all unordered pairs of distinct vertices.
///
/// This is the two-charge separation of the maximally mixed state: the
/// parity map from uniform link bitstrings onto even-weight charge patterns
/// is balanced, so every weight-two pattern is equally likely.
pub fn mixed_state_mean_separation(lx: usize, ly: usize) -> Ratio<u64> {
    assert!(lx * ly >= 2, "need at least two vertices");
    let coords: Vec<(usize, usize)> = (0..ly)
        .flat_map(|r| (0..lx).map(move |c| (r, c)))
        .collect();
    let mut total = 0u64;
    let mut pairs = 0u64;
    for (i, a) in coords.iter().enumerate() {
        for b in &coords[i + 1..] {
            total += (a.0.abs_diff(b.0) + a.1.abs_diff(b.1)) as u64;
            pairs += 1;
        }
    }
    Ratio::new(total, pairs)
}

/// Ordered links forming an open string between two nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSpec {
    links: Vec<LinkId>,
    endpoints: [Node; 2],
}

impl PathSpec {
    pub fn new(lattice: &Lattice, links: Vec<LinkId>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        let mut unique = BTreeSet::new();
        for &l in &links {
            if l >= lattice.n_links() {
                return Err(Error::InvalidPath(format!("unknown link {l}")));
            }
            if !unique.insert(l) {
                return Err(Error::InvalidPath(format!("link {l} repeated")));
            }
        }
        for pair in links.windows(2) {
            let a = lattice.link_nodes(pair[0]);
            let b = lattice.link_nodes(pair[1]);
            if !a.iter().any(|n| b.contains(n)) {
                return Err(Error::InvalidPath(format!(
                    "links {} and {} do not share a vertex",
                    pair[0], pair[1]
                )));
            }
        }
        let odd = odd_nodes(lattice, &links);
        if odd.len() != 2 {
            return Err(Error::InvalidPath(format!(
                "expected two endpoints, found {}",
                odd.len()
            )));
        }
        Ok(Self {
            links,
            endpoints: [odd[0], odd[1]],
        })
    }

    /// Path through a sequence of grid vertices, optionally starting and/or
    /// ending on pinned links.
    pub fn through_vertices(
        lattice: &Lattice,
        start_pinned: Option<LinkId>,
        vertices: &[(usize, usize)],
        end_pinned: Option<LinkId>,
    ) -> Result<Self> {
        let mut links = Vec::new();
        links.extend(start_pinned);
        for pair in vertices.windows(2) {
            let a = lattice.vertex_id(pair[0].0, pair[0].1);
            let b = lattice.vertex_id(pair[1].0, pair[1].1);
            let l = lattice.link_between(a, b).ok_or_else(|| {
                Error::InvalidPath(format!("{:?} and {:?} are not adjacent", pair[0], pair[1]))
            })?;
            links.push(l);
        }
        links.extend(end_pinned);
        Self::new(lattice, links)
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn endpoints(&self) -> [Node; 2] {
        self.endpoints
    }

    /// Bit mask of the path's links.
    pub fn mask(&self) -> u64 {
        self.links.iter().fold(0, |m, &l| m | 1 << l)
    }
}

fn odd_nodes(lattice: &Lattice, links: &[LinkId]) -> Vec<Node> {
    let mut odd = BTreeSet::new();
    for &l in links {
        for n in lattice.link_nodes(l) {
            if !odd.remove(&n) {
                odd.insert(n);
            }
        }
    }
    odd.into_iter().collect()
}
