//! The island Hamiltonian and its vortex-loop operators.
//!
//! ```text
//! H = sum_j (-c_{j_a} c_{j_b} c_{j_c} c_{j_d}) + lambda * sum_bonds i c_u c_v
//! ```

use serde::{Deserialize, Serialize};

use crate::clifford::{Coefficient, MajoranaIndex, MajoranaPolynomial};
use crate::error::{Error, Result};
use crate::lattice::{Bond, IslandLattice, Octagon, ReflectionData};

/// Coupling and temperature of one model instance.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub beta: f64,
}

/// `-c_a c_b c_c c_d` on one island.
pub fn island_term<C: Coefficient>(lat: &IslandLattice, island: usize) -> Result<MajoranaPolynomial<C>> {
    let corners = lat.corners(island)?;
    Ok(MajoranaPolynomial::monomial(&corners, -C::one()))
}

/// `i c_u c_v` for a bond stored as `u -> v`.
pub fn bond_term<C: Coefficient>(
    lat: &IslandLattice,
    from: MajoranaIndex,
    to: MajoranaIndex,
) -> Result<MajoranaPolynomial<C>> {
    if !lat.has_bond(from, to) {
        return Err(Error::NotABond(from.0, to.0));
    }
    Ok(MajoranaPolynomial::monomial(&[from, to], C::imag_unit()))
}

fn bond_poly<C: Coefficient>(b: &Bond) -> MajoranaPolynomial<C> {
    MajoranaPolynomial::monomial(&[b.from, b.to], C::imag_unit())
}

pub fn build_hamiltonian<C: Coefficient>(lat: &IslandLattice, lambda: C) -> MajoranaPolynomial<C> {
    let islands: MajoranaPolynomial<C> = (0..lat.islands().len())
        .map(|j| island_term(lat, j).expect("island rank in range"))
        .sum();
    let bonds: MajoranaPolynomial<C> = lat.bonds().iter().map(bond_poly).sum();
    &islands + &bonds.scale(&lambda)
}

/// Outcome of comparing `ϑ(H)` with `H`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    pub max_deviation: f64,
}

pub fn verify_reflection_symmetry<C: Coefficient>(
    h: &MajoranaPolynomial<C>,
    r: &ReflectionData,
) -> Result<SymmetryCheck> {
    let diff = &h.reflect(&r.map)? - h;
    Ok(SymmetryCheck {
        symmetric: diff.is_zero_within(1e-12),
        max_deviation: diff.max_abs_coefficient(),
    })
}

/// `i^l c_{s1} c_{s2} ... c_{s2l}` for an ordered loop of `2l` distinct sites.
pub fn loop_operator<C: Coefficient>(sites: &[MajoranaIndex]) -> Result<MajoranaPolynomial<C>> {
    if sites.is_empty() || !sites.len().is_multiple_of(2) {
        return Err(Error::InvalidLoop(format!(
            "loop length {} is not a positive even number",
            sites.len()
        )));
    }
    let mut sorted = sites.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidLoop("loop visits a site twice".into()));
    }
    let half = sites.len() / 2;
    let mut phase = C::one();
    for _ in 0..half % 4 {
        phase = phase * C::imag_unit();
    }
    Ok(MajoranaPolynomial::monomial(sites, phase))
}

/// A vortex loop `W(C)` and, when the plane bisects it, its factor `A` with `W = A ϑ(A)`.
#[derive(Clone, Debug)]
pub struct VortexLoop<C: Coefficient = num_complex::Complex64> {
    pub octagon: Octagon,
    pub sites: [MajoranaIndex; 8],
    pub half_length: usize,
    pub w: MajoranaPolynomial<C>,
    pub a_sites: Option<[MajoranaIndex; 4]>,
    pub a_factor: Option<MajoranaPolynomial<C>>,
}

/// Builds `W` for an octagon; with `r`, also the bisecting factor `A` and checks `A ϑ(A) = W`.
pub fn vortex_operator<C: Coefficient>(
    lat: &IslandLattice,
    octagon: &Octagon,
    r: Option<&ReflectionData>,
) -> Result<VortexLoop<C>> {
    for island in [octagon.west, octagon.south, octagon.east, octagon.north] {
        lat.corners(island)?;
    }
    let sites = lat.octet(octagon);
    let w = loop_operator::<C>(&sites)?;
    let (a_sites, a_factor) = match r {
        Some(r) => match bisecting_arc(&sites, r) {
            Some(arc) => {
                let (arc, a) = factorize(&w, arc, r)?;
                (Some(arc), Some(a))
            }
            None => (None, None),
        },
        None => (None, None),
    };
    Ok(VortexLoop {
        octagon: *octagon,
        sites,
        half_length: 4,
        w,
        a_sites,
        a_factor,
    })
}

/// The four left-half sites when they form a contiguous arc of the circuit.
///
/// For a vertical plane through the octagon centre this is
/// `north_d, west_b, west_c, south_a`.
fn bisecting_arc(sites: &[MajoranaIndex; 8], r: &ReflectionData) -> Option<[MajoranaIndex; 4]> {
    let left: Vec<bool> = sites.iter().map(|&m| r.is_left(m)).collect();
    if left.iter().filter(|&&l| l).count() != 4 {
        return None;
    }
    (0..8)
        .find(|&start| (0..4).all(|k| left[(start + k) % 8]) && !left[(start + 7) % 8])
        .map(|start| std::array::from_fn(|k| sites[(start + k) % 8]))
}

/// Returns `A` with `A ϑ(A) = W`, reordering `A` (never `W`) on a sign mismatch.
fn factorize<C: Coefficient>(
    w: &MajoranaPolynomial<C>,
    arc: [MajoranaIndex; 4],
    r: &ReflectionData,
) -> Result<([MajoranaIndex; 4], MajoranaPolynomial<C>)> {
    let mut swapped = arc;
    swapped.swap(0, 1);
    for candidate in [arc, swapped] {
        let a = MajoranaPolynomial::<C>::monomial(&candidate, C::one());
        let product = a.multiply(&a.reflect(&r.map)?);
        if &product == w {
            return Ok((candidate, a));
        }
    }
    Err(Error::Factorization(format!(
        "no ordering of {:?} satisfies A ϑ(A) = W",
        arc.map(|m| m.0)
    )))
}

/// JSON manifest of a model instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub lambda: f64,
    pub majorana_count: usize,
    pub terms: Vec<String>,
}

pub fn manifest<C: Coefficient>(lat: &IslandLattice, lambda: f64, h: &MajoranaPolynomial<C>) -> ModelManifest {
    ModelManifest {
        lambda,
        majorana_count: lat.num_majoranas(),
        terms: h.render_terms(),
    }
}
