//! Eigensolvers, ground-space projection and thermal functionals.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{Coefficient, MajoranaPolynomial, ReflectionMap};
use crate::error::{Error, Result};
use crate::fock::{inner, norm, LinearOperator, PauliAction, SparseOperator, StateVector, DENSE_CAP};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Full eigendecomposition, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Dense Hermitian eigendecomposition for `dim <= DENSE_CAP`.
pub fn dense_spectrum(op: &SparseOperator) -> Result<Spectrum> {
    let dim = op.dim();
    if dim > DENSE_CAP {
        return Err(Error::DenseCapExceeded { dim, cap: DENSE_CAP });
    }
    let deviation = op.hermiticity_deviation();
    if deviation > 1e-12 {
        return Err(Error::NotHermitian(deviation));
    }
    let eig = SymmetricEigen::new(op.to_dense()?);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: order
            .iter()
            .map(|&i| StateVector(eig.eigenvectors.column(i).iter().copied().collect()))
            .collect(),
    })
}

/// Default clustering tolerance `1e-8 * max(1, |E0|)`.
pub fn default_gap_tol(e0: f64) -> f64 {
    1e-8 * e0.abs().max(1.0)
}

/// The degenerate ground cluster `{E : E - E0 <= gap_tol}` and an orthonormal basis of it.
#[derive(Clone, Debug)]
pub struct GroundSpace {
    pub e0: f64,
    pub basis: Vec<StateVector>,
    pub gap_tol: f64,
    /// Distance from `E0` to the lowest eigenvalue found outside the cluster.
    pub gap: Option<f64>,
    /// Largest `||H v - E0 v||` over the basis.
    pub max_residual: f64,
}

impl GroundSpace {
    pub fn degeneracy(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    /// `P v = sum_mu Ω^μ <Ω^μ, v>`.
    pub fn project(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; v.len()];
        for b in &self.basis {
            let c = inner(&b.0, v);
            for (o, x) in out.iter_mut().zip(&b.0) {
                *o += c * x;
            }
        }
        out
    }

    /// Matrix `<Ω^μ, O Ω^ν>` of an operator restricted to the ground space.
    pub fn restricted(&self, op: &dyn LinearOperator) -> DMatrix<Complex64> {
        let n = self.degeneracy();
        let images: Vec<Vec<Complex64>> = self.basis.iter().map(|b| op.apply_vec(&b.0)).collect();
        DMatrix::from_fn(n, n, |mu, nu| inner(&self.basis[mu].0, &images[nu]))
    }
}

fn check_separation(offsets: impl Iterator<Item = f64>, gap_tol: f64) -> Result<()> {
    for offset in offsets {
        if offset > gap_tol / 10.0 && offset < 10.0 * gap_tol {
            return Err(Error::IllSeparated { offset, gap_tol });
        }
    }
    Ok(())
}

/// Deterministic basis of `span(vectors)`.
///
/// The basis depends only on the subspace: repeatedly take the lowest basis
/// index whose projected unit vector keeps at least half the largest remaining
/// weight, project that unit vector and normalize.
pub fn canonical_basis(vectors: &[StateVector]) -> Vec<StateVector> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let dim = vectors[0].len();
    let mut chosen: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    // weight[r] = || (P - sum chosen chosen^†) e_r ||^2 = <e_r| P_rest |e_r>
    let mut weight: Vec<f64> = (0..dim)
        .map(|r| vectors.iter().map(|v| v.0[r].norm_sqr()).sum())
        .collect();
    for _ in 0..n {
        let max = weight.iter().cloned().fold(0.0, f64::max);
        let pivot = weight.iter().position(|&w| w >= 0.5 * max).expect("nonempty");
        // P_rest e_pivot
        let mut v = vec![ZERO; dim];
        for b in vectors {
            let c = b.0[pivot].conj();
            for (o, x) in v.iter_mut().zip(&b.0) {
                *o += c * x;
            }
        }
        for q in &chosen {
            let c = q[pivot].conj();
            for (o, x) in v.iter_mut().zip(q) {
                *o -= c * x;
            }
        }
        // Re-orthogonalize once more for stability.
        for q in &chosen {
            let c = inner(q, &v);
            for (o, x) in v.iter_mut().zip(q) {
                *o -= c * x;
            }
        }
        let nv = norm(&v);
        for x in &mut v {
            *x /= nv;
        }
        for (w, x) in weight.iter_mut().zip(&v) {
            *w = (*w - x.norm_sqr()).max(0.0);
        }
        chosen.push(v);
    }
    chosen.into_iter().map(StateVector).collect()
}

fn residual_norm(op: &dyn LinearOperator, v: &[Complex64], e: f64) -> f64 {
    let hv = op.apply_vec(v);
    hv.iter()
        .zip(v)
        .map(|(h, x)| (h - x * e).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Ground cluster of a dense spectrum.
pub fn ground_space_from_spectrum(spectrum: &Spectrum, gap_tol: Option<f64>) -> Result<GroundSpace> {
    let e0 = spectrum.ground_energy();
    let tol = gap_tol.unwrap_or_else(|| default_gap_tol(e0));
    check_separation(spectrum.eigenvalues.iter().map(|e| e - e0), tol)?;
    let n = spectrum.eigenvalues.iter().take_while(|&&e| e - e0 <= tol).count();
    let basis = canonical_basis(&spectrum.eigenvectors[..n]);
    Ok(GroundSpace {
        e0,
        basis,
        gap_tol: tol,
        gap: spectrum.eigenvalues.get(n).map(|e| e - e0),
        max_residual: 0.0,
    })
}

/// Ground cluster by dense diagonalization, with residuals measured against `op`.
pub fn ground_space(op: &SparseOperator, gap_tol: Option<f64>) -> Result<GroundSpace> {
    let spectrum = dense_spectrum(op)?;
    let mut g = ground_space_from_spectrum(&spectrum, gap_tol)?;
    g.max_residual = g
        .basis
        .iter()
        .map(|b| residual_norm(op, &b.0, g.e0))
        .fold(0.0, f64::max);
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    /// Minimum number of eigenpairs; at least `N + 2` are always computed.
    pub k: usize,
    pub seed: u64,
    pub gap_tol: Option<f64>,
    /// Relative residual target for ground-cluster pairs.
    pub residual_tol: f64,
    /// Relative residual target for pairs outside the cluster.
    pub probe_tol: f64,
    /// Krylov basis size that triggers a thick restart.
    pub basis_size: usize,
    /// Ritz vectors retained across a restart.
    pub keep: usize,
    /// Budget of matrix-vector products per eigenpair.
    pub max_matvecs: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            k: 3,
            seed: 0,
            gap_tol: None,
            residual_tol: 1e-10,
            probe_tol: 1e-6,
            basis_size: 48,
            keep: 16,
            max_matvecs: 40_000,
        }
    }
}

/// Lanczos result with bookkeeping.
#[derive(Clone, Debug)]
pub struct LanczosOutcome {
    pub ground: GroundSpace,
    /// All converged eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub matvecs: usize,
}

struct RitzPair {
    value: f64,
    vector: Vec<Complex64>,
    residual: f64,
    matvecs: usize,
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Removes the components of `w` along `basis`; returns the coefficients.
fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut coeffs: Vec<Complex64> = basis.iter().map(|b| inner(b, w)).collect();
    for (b, c) in basis.iter().zip(&coeffs) {
        axpy(w, -c, b);
    }
    // Second classical Gram-Schmidt pass.
    for (b, c) in basis.iter().zip(coeffs.iter_mut()) {
        let d = inner(b, w);
        axpy(w, -d, b);
        *c += d;
    }
    coeffs
}

/// Lowest eigenpair of `op` on the orthogonal complement of `locked`.
///
/// Thick-restart Lanczos with full reorthogonalization against both the
/// Krylov basis and the locked vectors.
fn lowest_in_complement(
    op: &dyn LinearOperator,
    locked: &[Vec<Complex64>],
    mut start: Vec<Complex64>,
    rel_tol: f64,
    opts: &LanczosOptions,
) -> Result<RitzPair> {
    let dim = op.dim();
    let max_basis = opts.basis_size.clamp(2, dim.max(2));
    let keep = opts.keep.clamp(1, max_basis - 1);
    orthogonalize(&mut start, locked);
    let n0 = norm(&start);
    for x in &mut start {
        *x /= n0;
    }
    let mut basis: Vec<Vec<Complex64>> = vec![start];
    let mut t = DMatrix::<Complex64>::zeros(max_basis, max_basis);
    let mut matvecs = 0usize;
    let mut best_residual = f64::INFINITY;
    loop {
        let j = basis.len() - 1;
        let mut w = op.apply_vec(&basis[j]);
        matvecs += 1;
        orthogonalize(&mut w, locked);
        let h = orthogonalize(&mut w, &basis);
        for (i, hi) in h.iter().enumerate() {
            if i == j {
                t[(j, j)] = Complex64::new(hi.re, 0.0);
            } else {
                t[(i, j)] = *hi;
                t[(j, i)] = hi.conj();
            }
        }
        let beta = norm(&w);
        let n = basis.len();
        let exhausted = beta <= 1e-14 * (1.0 + t[(j, j)].norm()) || n + locked.len() >= dim;
        let full = n == max_basis;
        if full || exhausted || matvecs.is_multiple_of(8) {
            let eig = SymmetricEigen::new(t.view((0, 0), (n, n)).into_owned());
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let lowest = order[0];
            let theta = eig.eigenvalues[lowest];
            let residual = if exhausted {
                0.0
            } else {
                beta * eig.eigenvectors[(n - 1, lowest)].norm()
            };
            best_residual = best_residual.min(residual);
            let ritz_vector = |col: usize| {
                let mut y = vec![ZERO; dim];
                for (i, b) in basis.iter().enumerate() {
                    axpy(&mut y, eig.eigenvectors[(i, col)], b);
                }
                y
            };
            if residual <= rel_tol * theta.abs().max(1.0) {
                let mut y = ritz_vector(lowest);
                orthogonalize(&mut y, locked);
                let ny = norm(&y);
                for x in &mut y {
                    *x /= ny;
                }
                let explicit = residual_norm(op, &y, theta);
                matvecs += 1;
                return Ok(RitzPair {
                    value: theta,
                    vector: y,
                    residual: explicit,
                    matvecs,
                });
            }
            if matvecs >= opts.max_matvecs {
                return Err(Error::NoConvergence {
                    matvecs,
                    residual: best_residual,
                    target: rel_tol * theta.abs().max(1.0),
                });
            }
            if exhausted {
                // Invariant subspace without a converged pair cannot happen; guard anyway.
                return Err(Error::NoConvergence {
                    matvecs,
                    residual,
                    target: rel_tol * theta.abs().max(1.0),
                });
            }
            if full {
                let p = keep.min(n - 1);
                let mut next: Vec<Vec<Complex64>> = order[..p].iter().map(|&c| ritz_vector(c)).collect();
                t.fill(ZERO);
                for (i, &c) in order[..p].iter().enumerate() {
                    t[(i, i)] = Complex64::new(eig.eigenvalues[c], 0.0);
                }
                for x in &mut w {
                    *x /= beta;
                }
                next.push(w);
                basis = next;
                continue;
            }
        }
        for x in &mut w {
            *x /= beta;
        }
        basis.push(w);
    }
}

/// Lowest eigenpairs of a Hermitian operator by deflated thick-restart Lanczos.
///
/// Pairs are found one at a time, each from a fresh seeded random start in the
/// complement of the pairs already locked, until at least `k` pairs and at least
/// two pairs beyond the ground cluster are known.
pub fn lanczos_ground(op: &dyn LinearOperator, opts: &LanczosOptions) -> Result<LanczosOutcome> {
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<Complex64>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    let mut matvecs = 0;
    loop {
        let e0 = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = opts
            .gap_tol
            .unwrap_or_else(|| default_gap_tol(if e0.is_finite() { e0 } else { 0.0 }));
        let cluster = values.iter().filter(|&&e| e - e0 <= tol).count();
        if !values.is_empty() && values.len() >= opts.k.min(dim) && (values.len() >= cluster + 2 || values.len() == dim)
        {
            break;
        }
        // Until the cluster is closed every new pair may belong to it.
        let rel_tol = if values.len() > cluster && !values.is_empty() {
            opts.probe_tol
        } else {
            opts.residual_tol
        };
        let start = StateVector::random(dim, &mut rng).0;
        let pair = lowest_in_complement(op, &locked, start, rel_tol, opts)?;
        matvecs += pair.matvecs;
        if pair.value - e0 <= tol && rel_tol > opts.residual_tol {
            // A probe landed inside the cluster: refine it to ground accuracy.
            let refined = lowest_in_complement(op, &locked, pair.vector, opts.residual_tol, opts)?;
            matvecs += refined.matvecs;
            values.push(refined.value);
            residuals.push(refined.residual);
            locked.push(refined.vector);
        } else {
            values.push(pair.value);
            residuals.push(pair.residual);
            locked.push(pair.vector);
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let e0 = values[order[0]];
    let tol = opts.gap_tol.unwrap_or_else(|| default_gap_tol(e0));
    check_separation(values.iter().map(|e| e - e0), tol)?;
    let members: Vec<usize> = order.iter().copied().filter(|&i| values[i] - e0 <= tol).collect();
    let vectors: Vec<StateVector> = members.iter().map(|&i| StateVector(locked[i].clone())).collect();
    let basis = canonical_basis(&vectors);
    let max_residual = basis.iter().map(|b| residual_norm(op, &b.0, e0)).fold(0.0, f64::max);
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let gap = sorted.get(members.len()).map(|e| e - e0);
    let _ = residuals;
    Ok(LanczosOutcome {
        ground: GroundSpace {
            e0,
            basis,
            gap_tol: tol,
            gap,
            max_residual,
        },
        eigenvalues: sorted,
        matvecs,
    })
}

/// Operator shifted by a multiple of the identity.
pub struct Shifted<'a> {
    pub op: &'a dyn LinearOperator,
    pub shift: f64,
}

impl LinearOperator for Shifted<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.op.apply_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += xi * self.shift;
        }
    }
}

fn boltzmann_weights(spectrum: &Spectrum, beta: f64) -> Vec<f64> {
    let e0 = spectrum.ground_energy();
    let w: Vec<f64> = spectrum.eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// `Tr(O e^{-βH}) / Tr(e^{-βH})` from the full spectrum of `H`.
pub fn thermal_expectation(o: &dyn LinearOperator, spectrum: &Spectrum, beta: f64) -> Result<Complex64> {
    if spectrum.dim() > DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            dim: spectrum.dim(),
            cap: DENSE_CAP,
        });
    }
    if o.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            got: o.dim(),
        });
    }
    let weights = boltzmann_weights(spectrum, beta);
    Ok(spectrum
        .eigenvectors
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(v, &w)| inner(&v.0, &o.apply_vec(&v.0)) * w)
        .sum())
}

/// Normalized Gibbs density matrix `e^{-βH} / Tr e^{-βH}`.
#[derive(Clone, Debug)]
pub struct GibbsState {
    pub beta: f64,
    rho: DMatrix<Complex64>,
}

impl GibbsState {
    pub fn new(spectrum: &Spectrum, beta: f64) -> Result<Self> {
        let dim = spectrum.dim();
        if dim > DENSE_CAP {
            return Err(Error::DenseCapExceeded { dim, cap: DENSE_CAP });
        }
        let weights = boltzmann_weights(spectrum, beta);
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for (v, &w) in spectrum.eigenvectors.iter().zip(&weights) {
            if w < 1e-300 {
                continue;
            }
            let col = nalgebra::DVector::from_column_slice(&v.0);
            rho.gerc(Complex64::new(w, 0.0), &col, &col, Complex64::new(1.0, 0.0));
        }
        Ok(GibbsState { beta, rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// `Tr(p ρ)` for a polynomial, one signed permutation per term.
    pub fn expectation<C: Coefficient>(&self, p: &MajoranaPolynomial<C>) -> Result<Complex64> {
        let dim = self.dim();
        let limit = 2 * dim.trailing_zeros() as usize;
        let mut total = ZERO;
        for (k, c) in p.terms() {
            if let Some(&last) = k.last() {
                if last.get() >= limit {
                    return Err(Error::IndexOutOfRange { index: last.0, limit });
                }
            }
            if k.is_empty() {
                // ρ is normalized by construction.
                total += c.to_c64();
                continue;
            }
            let action = PauliAction::monomial(k);
            let mut s = ZERO;
            for r in 0..dim {
                let (col, v) = action.entry(r);
                s += v * self.rho[(col, r)];
            }
            total += c.to_c64() * s;
        }
        Ok(total)
    }
}

/// `Tr(A ϑ(A) e^{-βH}) / Tr(e^{-βH})` for `A` supported on the left half.
pub fn rp_functional<C: Coefficient>(
    a: &MajoranaPolynomial<C>,
    r: &ReflectionMap,
    gibbs: &GibbsState,
) -> Result<Complex64> {
    for (k, _) in a.terms() {
        if let Some(&bad) = k.iter().find(|&&m| !r.is_left(m)) {
            return Err(Error::SupportViolation(bad.0));
        }
    }
    let w_a = a.multiply(&a.reflect(r)?);
    gibbs.expectation(&w_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{MajoranaIndex, Polynomial};
    use crate::fock::to_matrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn island() -> Polynomial {
        let ix: Vec<MajoranaIndex> = (0..4).map(MajoranaIndex).collect();
        Polynomial::monomial(&ix, c(-1.0))
    }

    #[test]
    fn single_island_spectrum() {
        let op = to_matrix(&island(), 2).unwrap();
        let s = dense_spectrum(&op).unwrap();
        for (e, x) in s.eigenvalues.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((e - x).abs() < 1e-14);
        }
        let g = ground_space(&op, None).unwrap();
        assert_eq!(g.degeneracy(), 2);
        assert_eq!(g.gap, Some(2.0));
    }

    #[test]
    fn identity_spectrum() {
        let op = SparseOperator::identity(3).unwrap();
        let s = dense_spectrum(&op).unwrap();
        assert!(s.eigenvalues.iter().all(|&e| (e - 1.0).abs() < 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let p = Polynomial::monomial(&[MajoranaIndex(0), MajoranaIndex(1)], c(1.0));
        let op = to_matrix(&p, 1).unwrap();
        assert!(matches!(dense_spectrum(&op), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn ill_separated_cluster() {
        let p = &island() + &Polynomial::monomial(&[MajoranaIndex(0), MajoranaIndex(1)], Complex64::new(0.0, 1e-7));
        let op = to_matrix(&p, 2).unwrap();
        let s = dense_spectrum(&op).unwrap();
        assert!(matches!(
            ground_space_from_spectrum(&s, Some(1e-7)),
            Err(Error::IllSeparated { .. })
        ));
        assert_eq!(ground_space_from_spectrum(&s, Some(1e-10)).unwrap().degeneracy(), 1);
    }

    #[test]
    fn canonical_basis_is_gauge_invariant() {
        let op = to_matrix(&island(), 2).unwrap();
        let s = dense_spectrum(&op).unwrap();
        let g1 = canonical_basis(&s.eigenvectors[..2]);
        // Rotate the input basis by a unitary.
        let (a, b) = (&s.eigenvectors[0].0, &s.eigenvectors[1].0);
        let u = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let r0: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x * u[0] + y * u[1]).collect();
        let r1: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x * u[1].conj() - y * u[0]).collect();
        let g2 = canonical_basis(&[StateVector(r0), StateVector(r1)]);
        for (p, q) in g1.iter().zip(&g2) {
            for (x, y) in p.0.iter().zip(&q.0) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn thermal_limits() {
        let h = &island() + &Polynomial::monomial(&[MajoranaIndex(1), MajoranaIndex(2)], Complex64::new(0.0, 0.3));
        let op = to_matrix(&h, 2).unwrap();
        let s = dense_spectrum(&op).unwrap();
        let id = SparseOperator::identity(2).unwrap();
        for beta in [0.0, 1.0, 40.0] {
            assert!((thermal_expectation(&id, &s, beta).unwrap() - c(1.0)).norm() < 1e-12);
        }
        let o = to_matrix(
            &Polynomial::monomial(&[MajoranaIndex(0), MajoranaIndex(3)], Complex64::new(0.0, 1.0)),
            2,
        )
        .unwrap();
        let t0 = thermal_expectation(&o, &s, 0.0).unwrap();
        assert!((t0 - o.trace() / 4.0).norm() < 1e-12);
    }

    #[test]
    fn gibbs_expectation_matches_thermal() {
        let h = &island() + &Polynomial::monomial(&[MajoranaIndex(1), MajoranaIndex(2)], Complex64::new(0.0, 0.3));
        let op = to_matrix(&h, 2).unwrap();
        let s = dense_spectrum(&op).unwrap();
        let p = &Polynomial::monomial(&[MajoranaIndex(0), MajoranaIndex(3)], Complex64::new(0.0, 1.0))
            + &Polynomial::generator(1);
        let g = GibbsState::new(&s, 0.7).unwrap();
        let direct = thermal_expectation(&to_matrix(&p, 2).unwrap(), &s, 0.7).unwrap();
        assert!((g.expectation(&p).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn rp_support_violation() {
        let r = ReflectionMap::new(
            vec![MajoranaIndex(2), MajoranaIndex(3), MajoranaIndex(0), MajoranaIndex(1)],
            &[MajoranaIndex(0), MajoranaIndex(1)],
        )
        .unwrap();
        let op = to_matrix(&island(), 2).unwrap();
        let g = GibbsState::new(&dense_spectrum(&op).unwrap(), 1.0).unwrap();
        assert!(matches!(
            rp_functional(&Polynomial::generator(2), &r, &g),
            Err(Error::SupportViolation(2))
        ));
        let one = rp_functional(&Polynomial::identity(), &r, &g).unwrap();
        assert!((one - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn lanczos_matches_dense_small() {
        let h = &(&island() + &Polynomial::monomial(&[MajoranaIndex(1), MajoranaIndex(4)], Complex64::new(0.0, 0.2)))
            + &Polynomial::monomial(
                &[MajoranaIndex(4), MajoranaIndex(5), MajoranaIndex(6), MajoranaIndex(7)],
                c(-1.0),
            );
        let op = to_matrix(&h, 4).unwrap();
        let dense = ground_space(&op, None).unwrap();
        let out = lanczos_ground(
            &op,
            &LanczosOptions {
                basis_size: 10,
                keep: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((out.ground.e0 - dense.e0).abs() < 1e-10);
        assert_eq!(out.ground.degeneracy(), dense.degeneracy());
        assert!(out.ground.max_residual < 1e-9);
    }

    #[test]
    fn lanczos_shift() {
        let op = to_matrix(
            &(&island() + &Polynomial::monomial(&[MajoranaIndex(0), MajoranaIndex(2)], Complex64::new(0.0, 0.4))),
            2,
        )
        .unwrap();
        let base = lanczos_ground(&op, &LanczosOptions::default()).unwrap().ground.e0;
        let shifted = Shifted { op: &op, shift: 2.5 };
        let e = lanczos_ground(&shifted, &LanczosOptions::default()).unwrap().ground.e0;
        assert!((e - base - 2.5).abs() < 1e-12);
    }
}
