//! Island lattice geometry, reflection planes and the induced Majorana involution.
//!
//! Islands sit on the odd sublattice `x + y` odd of the integer grid, octagons
//! on the even sublattice between them. `y` grows upwards: corners `a`, `b` are
//! the top-left and top-right Majoranas of an island, `c`, `d` the bottom-right
//! and bottom-left ones.
//!
//! Bonds: corner `b` of island `p` couples to corner `d` of `p + (1, 1)`, and
//! corner `c` of `p` to corner `a` of `p + (1, -1)`. The octagon centred at `q`
//! is bounded by the islands west, south, east and north of `q`; its eight
//! Majoranas, in circuit order, are
//! `west_c, south_a, south_b, east_d, east_a, north_c, north_d, west_b`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clifford::{MajoranaIndex, ReflectionMap};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(format!("unknown boundary '{other}' (expected open|periodic)")),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Corner {
    A,
    B,
    C,
    D,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::A, Corner::B, Corner::C, Corner::D];

    pub fn rank(self) -> u32 {
        self as u32
    }

    /// Offset of the corner from the island centre, in quarter units.
    fn offset(self) -> (i64, i64) {
        match self {
            Corner::A => (-1, 1),
            Corner::B => (1, 1),
            Corner::C => (1, -1),
            Corner::D => (-1, -1),
        }
    }

    fn mirror(self, axis: Axis) -> Corner {
        match (axis, self) {
            (Axis::Vertical, Corner::A) => Corner::B,
            (Axis::Vertical, Corner::B) => Corner::A,
            (Axis::Vertical, Corner::C) => Corner::D,
            (Axis::Vertical, Corner::D) => Corner::C,
            (Axis::Horizontal, Corner::A) => Corner::D,
            (Axis::Horizontal, Corner::D) => Corner::A,
            (Axis::Horizontal, Corner::B) => Corner::C,
            (Axis::Horizontal, Corner::C) => Corner::B,
        }
    }
}

/// Directed bond `from -> to`; its Hamiltonian term is `i c_from c_to`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub from: MajoranaIndex,
    pub to: MajoranaIndex,
}

/// An elementary vortex: the four islands around an even-sublattice point.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Octagon {
    pub center: (i64, i64),
    pub west: usize,
    pub south: usize,
    pub east: usize,
    pub north: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IslandLattice {
    lx: i64,
    ly: i64,
    boundary: Boundary,
    islands: Vec<(i64, i64)>,
    rank: BTreeMap<(i64, i64), usize>,
    bonds: Vec<Bond>,
    octagons: Vec<Octagon>,
}

/// Builds the island lattice on `0 <= x < lx`, `0 <= y < ly`.
pub fn build_lattice(lx: usize, ly: usize, boundary: Boundary) -> Result<IslandLattice> {
    if lx < 2 || ly < 2 {
        return Err(Error::InvalidLattice(format!(
            "region too small: {lx}x{ly} (need lx, ly >= 2)"
        )));
    }
    if boundary == Boundary::Periodic && (!lx.is_multiple_of(2) || !ly.is_multiple_of(2)) {
        return Err(Error::InvalidLattice(format!(
            "periodic lattices need even lx and ly, got {lx}x{ly}"
        )));
    }
    let (lx, ly) = (lx as i64, ly as i64);
    let islands: Vec<(i64, i64)> = (0..lx)
        .flat_map(|x| (0..ly).map(move |y| (x, y)))
        .filter(|(x, y)| (x + y) % 2 == 1)
        .collect();
    let rank: BTreeMap<_, _> = islands.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut lat = IslandLattice {
        lx,
        ly,
        boundary,
        islands,
        rank,
        bonds: Vec::new(),
        octagons: Vec::new(),
    };
    let mut bonds = Vec::new();
    for (r, &(x, y)) in lat.islands.iter().enumerate() {
        for (dx, dy, from, to) in [(1, 1, Corner::B, Corner::D), (1, -1, Corner::C, Corner::A)] {
            if let Some(q) = lat.island_at(x + dx, y + dy) {
                bonds.push(Bond {
                    from: lat.majorana(r, from),
                    to: lat.majorana(q, to),
                });
            }
        }
    }
    lat.bonds = bonds;
    lat.octagons = enumerate_octagons(&lat);
    Ok(lat)
}

/// Octagons whose four islands all exist, in lexicographic order of the centre.
pub fn enumerate_octagons(lat: &IslandLattice) -> Vec<Octagon> {
    let mut out = Vec::new();
    for x in 0..lat.lx {
        for y in 0..lat.ly {
            if (x + y) % 2 != 0 {
                continue;
            }
            let found = (
                lat.island_at(x - 1, y),
                lat.island_at(x, y - 1),
                lat.island_at(x + 1, y),
                lat.island_at(x, y + 1),
            );
            if let (Some(west), Some(south), Some(east), Some(north)) = found {
                out.push(Octagon {
                    center: (x, y),
                    west,
                    south,
                    east,
                    north,
                });
            }
        }
    }
    out
}

impl IslandLattice {
    pub fn lx(&self) -> usize {
        self.lx as usize
    }

    pub fn ly(&self) -> usize {
        self.ly as usize
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn islands(&self) -> &[(i64, i64)] {
        &self.islands
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn octagons(&self) -> &[Octagon] {
        &self.octagons
    }

    pub fn num_majoranas(&self) -> usize {
        4 * self.islands.len()
    }

    pub fn num_modes(&self) -> usize {
        2 * self.islands.len()
    }

    fn wrap(&self, x: i64, y: i64) -> Option<(i64, i64)> {
        match self.boundary {
            Boundary::Periodic => Some((x.rem_euclid(self.lx), y.rem_euclid(self.ly))),
            Boundary::Open => ((0..self.lx).contains(&x) && (0..self.ly).contains(&y)).then_some((x, y)),
        }
    }

    /// Rank of the island at `(x, y)`, wrapping coordinates on periodic lattices.
    pub fn island_at(&self, x: i64, y: i64) -> Option<usize> {
        self.wrap(x, y).and_then(|p| self.rank.get(&p).copied())
    }

    pub fn majorana(&self, island: usize, corner: Corner) -> MajoranaIndex {
        MajoranaIndex(4 * island as u32 + corner.rank())
    }

    pub fn corners(&self, island: usize) -> Result<[MajoranaIndex; 4]> {
        if island >= self.islands.len() {
            return Err(Error::UnknownIsland(island));
        }
        Ok(Corner::ALL.map(|c| self.majorana(island, c)))
    }

    /// Island rank and corner of a Majorana.
    pub fn locate(&self, m: MajoranaIndex) -> Option<(usize, Corner)> {
        let island = m.get() / 4;
        (island < self.islands.len()).then(|| (island, Corner::ALL[m.get() % 4]))
    }

    /// The eight Majoranas of an octagon in circuit order.
    pub fn octet(&self, o: &Octagon) -> [MajoranaIndex; 8] {
        let m = |i, c| self.majorana(i, c);
        [
            m(o.west, Corner::C),
            m(o.south, Corner::A),
            m(o.south, Corner::B),
            m(o.east, Corner::D),
            m(o.east, Corner::A),
            m(o.north, Corner::C),
            m(o.north, Corner::D),
            m(o.west, Corner::B),
        ]
    }

    pub fn has_bond(&self, from: MajoranaIndex, to: MajoranaIndex) -> bool {
        self.bonds.contains(&Bond { from, to })
    }

    /// Same islands and octagons with a replaced bond list (negative controls).
    pub fn with_bonds(&self, bonds: Vec<Bond>) -> IslandLattice {
        IslandLattice { bonds, ..self.clone() }
    }

    /// Export without reflection data.
    pub fn export(&self) -> LatticeExport {
        LatticeExport {
            lx: self.lx(),
            ly: self.ly(),
            boundary: self.boundary,
            majorana_count: self.num_majoranas(),
            islands: self
                .islands
                .iter()
                .enumerate()
                .map(|(rank, &(x, y))| IslandExport {
                    rank,
                    x,
                    y,
                    a: self.majorana(rank, Corner::A),
                    b: self.majorana(rank, Corner::B),
                    c: self.majorana(rank, Corner::C),
                    d: self.majorana(rank, Corner::D),
                })
                .collect(),
            bonds: self.bonds.iter().map(|b| [b.from, b.to]).collect(),
            octagons: self
                .octagons
                .iter()
                .map(|o| OctagonExport {
                    center: [o.center.0, o.center.1],
                    west: o.west,
                    south: o.south,
                    east: o.east,
                    north: o.north,
                    octet: self.octet(o),
                })
                .collect(),
            reflection: None,
        }
    }

    /// Content hash of the exported geometry (first 16 hex digits of SHA-256).
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(&self.export()).expect("lattice export serializes");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IslandExport {
    pub rank: usize,
    pub x: i64,
    pub y: i64,
    pub a: MajoranaIndex,
    pub b: MajoranaIndex,
    pub c: MajoranaIndex,
    pub d: MajoranaIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OctagonExport {
    pub center: [i64; 2],
    pub west: usize,
    pub south: usize,
    pub east: usize,
    pub north: usize,
    pub octet: [MajoranaIndex; 8],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionExport {
    pub axis: Axis,
    pub coordinate: i64,
    pub sigma: Vec<MajoranaIndex>,
    pub left_set: Vec<MajoranaIndex>,
}

/// JSON description of a lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeExport {
    pub lx: usize,
    pub ly: usize,
    pub boundary: Boundary,
    pub majorana_count: usize,
    pub islands: Vec<IslandExport>,
    pub bonds: Vec<[MajoranaIndex; 2]>,
    pub octagons: Vec<OctagonExport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reflection: Option<ReflectionExport>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// The line `x = coordinate`.
    Vertical,
    /// The line `y = coordinate`.
    Horizontal,
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "vertical" | "x" => Ok(Axis::Vertical),
            "horizontal" | "y" => Ok(Axis::Horizontal),
            other => Err(format!("unknown plane axis '{other}' (expected vertical|horizontal)")),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plane {
    pub axis: Axis,
    pub coordinate: i64,
}

impl Plane {
    /// A plane from a possibly fractional coordinate.
    ///
    /// A plane between two grid columns exchanges the island and octagon
    /// sublattices, so only integer coordinates are accepted.
    pub fn new(axis: Axis, coordinate: f64) -> Result<Plane> {
        if !coordinate.is_finite() {
            return Err(Error::InvalidPlane(format!("coordinate {coordinate} is not finite")));
        }
        if coordinate.fract() != 0.0 {
            let msg = if (2.0 * coordinate).fract() == 0.0 {
                format!("plane at {coordinate} lies between grid lines and maps islands onto octagon sites")
            } else {
                format!("coordinate {coordinate} is not on the grid")
            };
            return Err(Error::InvalidPlane(msg));
        }
        Ok(Plane {
            axis,
            coordinate: coordinate as i64,
        })
    }
}

/// Geometry of a reflection and its action on Majoranas.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionData {
    pub plane: Plane,
    pub island_map: Vec<usize>,
    pub map: ReflectionMap,
}

impl ReflectionData {
    pub fn export(&self) -> ReflectionExport {
        ReflectionExport {
            axis: self.plane.axis,
            coordinate: self.plane.coordinate,
            sigma: self.map.sigma().to_vec(),
            left_set: self.map.left_set(),
        }
    }

    pub fn is_left(&self, m: MajoranaIndex) -> bool {
        self.map.is_left(m)
    }
}

/// Builds `ϑ` for a reflection of `lat` in `plane`.
pub fn reflection_data(lat: &IslandLattice, plane: Plane) -> Result<ReflectionData> {
    let (extent, along) = match plane.axis {
        Axis::Vertical => (lat.lx, "x"),
        Axis::Horizontal => (lat.ly, "y"),
    };
    if !(0..extent).contains(&plane.coordinate) {
        return Err(Error::InvalidPlane(format!(
            "plane {along} = {} lies outside the region 0..{extent}",
            plane.coordinate
        )));
    }
    let c0 = plane.coordinate;
    let mut island_map = Vec::with_capacity(lat.islands.len());
    for &(x, y) in &lat.islands {
        let (rx, ry) = match plane.axis {
            Axis::Vertical => (2 * c0 - x, y),
            Axis::Horizontal => (x, 2 * c0 - y),
        };
        let image = lat.island_at(rx, ry).ok_or_else(|| {
            Error::InvalidPlane(format!(
                "plane {along} = {c0} maps island ({x}, {y}) outside the lattice"
            ))
        })?;
        island_map.push(image);
    }

    let n = lat.num_majoranas();
    let mut sigma = vec![MajoranaIndex(0); n];
    let mut left = Vec::new();
    for (island, &(x, y)) in lat.islands.iter().enumerate() {
        for corner in Corner::ALL {
            let m = lat.majorana(island, corner);
            sigma[m.get()] = lat.majorana(island_map[island], corner.mirror(plane.axis));
            // Positions in quarter units so corners never sit on the plane.
            let (ox, oy) = corner.offset();
            let (pos, period) = match plane.axis {
                Axis::Vertical => (4 * x + ox, 4 * lat.lx),
                Axis::Horizontal => (4 * y + oy, 4 * lat.ly),
            };
            let rel = pos - 4 * c0;
            let is_left = match lat.boundary {
                Boundary::Open => rel < 0,
                Boundary::Periodic => rel.rem_euclid(period) > period / 2,
            };
            if is_left {
                left.push(m);
            }
        }
    }
    let map = ReflectionMap::new(sigma, &left)?;
    let data = ReflectionData { plane, island_map, map };
    for b in &lat.bonds {
        let (u, v) = (data.map.image(b.from)?, data.map.image(b.to)?);
        if !lat.has_bond(v, u) && !lat.has_bond(u, v) {
            return Err(Error::InvalidPlane(format!(
                "bond ({}, {}) has no mirror image under plane {along} = {c0}",
                b.from.0, b.to.0
            )));
        }
    }
    Ok(data)
}

/// The vertical plane through the middle column, the default for reports.
pub fn default_plane(lat: &IslandLattice) -> Plane {
    default_plane_for(lat, Axis::Vertical)
}

/// The plane through the middle grid line along `axis`.
pub fn default_plane_for(lat: &IslandLattice, axis: Axis) -> Plane {
    let extent = match axis {
        Axis::Vertical => lat.lx,
        Axis::Horizontal => lat.ly,
    };
    let coordinate = match lat.boundary {
        Boundary::Open => (extent - 1) / 2,
        Boundary::Periodic => extent / 2,
    };
    Plane { axis, coordinate }
}
