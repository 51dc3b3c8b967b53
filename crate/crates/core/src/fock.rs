//! Matrix representation of Majorana polynomials on Fock space.
//!
//! `M` fermionic modes carry `2M` Majoranas through the Jordan-Wigner encoding
//!
//! ```text
//! c_{2k}   = Z_0 ... Z_{k-1} X_k
//! c_{2k+1} = Z_0 ... Z_{k-1} Y_k
//! ```
//!
//! with mode `k` stored in bit `k` of the basis index. Every monomial is then a
//! signed permutation `i^p X^flip Z^zmask`, so its image is assembled directly
//! from bit masks in `O(dim)` and never by sparse-sparse products.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::clifford::{Coefficient, MajoranaIndex, MajoranaPolynomial};
use crate::error::{Error, Result};

/// Largest dimension for which dense matrices are formed.
pub const DENSE_CAP: usize = 4096;

/// Largest mode count with a matrix representation (dimension 2^30).
pub const MAX_MODES: usize = 30;

/// Version tag of the binary operator dump.
pub const DUMP_VERSION: u64 = 1;

const PARALLEL_MIN_DIM: usize = 1 << 14;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// The signed permutation `i^phase * X^flip * Z^zmask`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliAction {
    pub flip: u64,
    pub zmask: u64,
    pub phase: u8,
}

impl PauliAction {
    pub const IDENTITY: PauliAction = PauliAction {
        flip: 0,
        zmask: 0,
        phase: 0,
    };

    pub fn generator(i: MajoranaIndex) -> Self {
        let k = i.get() / 2;
        let low = (1u64 << k) - 1;
        if i.get().is_multiple_of(2) {
            PauliAction {
                flip: 1 << k,
                zmask: low,
                phase: 0,
            }
        } else {
            // Y = i X Z
            PauliAction {
                flip: 1 << k,
                zmask: low | (1 << k),
                phase: 1,
            }
        }
    }

    /// Operator product `self * rhs`.
    pub fn compose(self, rhs: PauliAction) -> PauliAction {
        let swap = (self.zmask & rhs.flip).count_ones() as u8 & 1;
        PauliAction {
            flip: self.flip ^ rhs.flip,
            zmask: self.zmask ^ rhs.zmask,
            phase: (self.phase + rhs.phase + 2 * swap) % 4,
        }
    }

    pub fn monomial(indices: &[MajoranaIndex]) -> Self {
        indices
            .iter()
            .fold(PauliAction::IDENTITY, |acc, &i| acc.compose(PauliAction::generator(i)))
    }

    /// Matrix element in row `row`: column `row ^ flip`, value `i^phase (-1)^{|zmask & col|}`.
    #[inline]
    pub fn entry(&self, row: usize) -> (usize, Complex64) {
        let col = row ^ self.flip as usize;
        let mut v = I_POWERS[self.phase as usize];
        if (self.zmask & col as u64).count_ones() % 2 == 1 {
            v = -v;
        }
        (col, v)
    }
}

fn check_modes(modes: usize) -> Result<usize> {
    if modes > MAX_MODES {
        return Err(Error::TooManyModes {
            modes,
            limit: MAX_MODES,
        });
    }
    Ok(1usize << modes)
}

fn check_indices<C: Coefficient>(p: &MajoranaPolynomial<C>, modes: usize) -> Result<()> {
    let limit = 2 * modes;
    for (k, _) in p.terms() {
        if let Some(&last) = k.last() {
            if last.get() >= limit {
                return Err(Error::IndexOutOfRange { index: last.0, limit });
            }
        }
    }
    Ok(())
}

/// Linear map on `C^dim` given by its action.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]);

    fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Matrix-free sum of signed permutations, grouped by flip mask.
#[derive(Clone, Debug)]
pub struct PauliSum {
    modes: usize,
    groups: Vec<(u64, Vec<(u64, Complex64)>)>,
    terms: usize,
}

impl PauliSum {
    pub fn from_polynomial<C: Coefficient>(p: &MajoranaPolynomial<C>, modes: usize) -> Result<Self> {
        check_modes(modes)?;
        check_indices(p, modes)?;
        let mut groups: Vec<(u64, Vec<(u64, Complex64)>)> = Vec::new();
        for (k, c) in p.terms() {
            let a = PauliAction::monomial(k);
            let coeff = c.to_c64() * I_POWERS[a.phase as usize];
            match groups.iter_mut().find(|(f, _)| *f == a.flip) {
                Some((_, entries)) => entries.push((a.zmask, coeff)),
                None => groups.push((a.flip, vec![(a.zmask, coeff)])),
            }
        }
        groups.sort_by_key(|(f, _)| *f);
        Ok(PauliSum {
            modes,
            groups,
            terms: p.len(),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn term_count(&self) -> usize {
        self.terms
    }

    #[inline]
    fn row_entries(&self, row: usize, mut emit: impl FnMut(usize, Complex64)) {
        for (flip, entries) in &self.groups {
            let col = row ^ *flip as usize;
            let mut v = Complex64::new(0.0, 0.0);
            for (z, c) in entries {
                if (z & col as u64).count_ones() % 2 == 1 {
                    v -= c;
                } else {
                    v += c;
                }
            }
            if v != Complex64::new(0.0, 0.0) {
                emit(col, v);
            }
        }
    }
}

impl LinearOperator for PauliSum {
    fn dim(&self) -> usize {
        1 << self.modes
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let row_value = |row: usize| {
            let mut acc = Complex64::new(0.0, 0.0);
            self.row_entries(row, |col, v| acc += v * x[col]);
            acc
        };
        if y.len() >= PARALLEL_MIN_DIM {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row_value(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, out)| *out = row_value(r));
        }
    }
}

/// Row-compressed complex matrix of dimension `2^modes`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    modes: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    pub fn identity(modes: usize) -> Result<Self> {
        to_matrix(&MajoranaPolynomial::<Complex64>::identity(), modes)
    }

    pub fn from_pauli_sum(sum: &PauliSum) -> Self {
        let dim = sum.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row_buf: Vec<(usize, Complex64)> = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            row_buf.clear();
            sum.row_entries(r, |c, v| row_buf.push((c, v)));
            row_buf.sort_by_key(|(c, _)| *c);
            for &(c, v) in &row_buf {
                cols.push(c as u32);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            modes: sum.modes,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r)
            .find(|&(col, _)| col == c)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|r| self.get(r, r)).sum()
    }

    /// Exact sparse matrix-vector product.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(StateVector(self.apply_vec(v.amplitudes())))
    }

    pub fn conjugate_transpose(&self) -> Self {
        let dim = self.dim();
        let mut rows: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); dim];
        for r in 0..dim {
            for (c, v) in self.row(r) {
                rows[c].push((r as u32, v.conj()));
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            modes: self.modes,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.dim();
        if dim > DENSE_CAP {
            return Err(Error::DenseCapExceeded { dim, cap: DENSE_CAP });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        Ok(m)
    }

    /// Writes the little-endian dump: `dim, nnz, version`, then `(row, col, re, im)` records.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        for h in [self.dim() as u64, self.nnz() as u64, DUMP_VERSION] {
            w.write_all(&h.to_le_bytes())?;
        }
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                w.write_all(&(r as u64).to_le_bytes())?;
                w.write_all(&(c as u64).to_le_bytes())?;
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut rd: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |rd: &mut R| -> Result<[u8; 8]> {
            rd.read_exact(&mut word)?;
            Ok(word)
        };
        let dim = u64::from_le_bytes(next(&mut rd)?) as usize;
        let nnz = u64::from_le_bytes(next(&mut rd)?) as usize;
        let version = u64::from_le_bytes(next(&mut rd)?);
        if version != DUMP_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        if !dim.is_power_of_two() || dim > 1 << MAX_MODES {
            return Err(Error::Format(format!(
                "dimension {dim} is not a supported power of two"
            )));
        }
        let modes = dim.trailing_zeros() as usize;
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        let mut last = (0usize, None::<usize>);
        for _ in 0..nnz {
            let r = u64::from_le_bytes(next(&mut rd)?) as usize;
            let c = u64::from_le_bytes(next(&mut rd)?) as usize;
            let re = f64::from_le_bytes(next(&mut rd)?);
            let im = f64::from_le_bytes(next(&mut rd)?);
            if r >= dim || c >= dim {
                return Err(Error::Format(format!("record ({r}, {c}) outside dimension {dim}")));
            }
            let ordered = r > last.0 || (r == last.0 && last.1.is_none_or(|lc| c > lc));
            if !ordered {
                return Err(Error::Format("records are not row-ordered".into()));
            }
            last = (r, Some(c));
            row_ptr[r + 1] += 1;
            cols.push(c as u32);
            vals.push(Complex64::new(re, im));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseOperator {
            modes,
            row_ptr,
            cols,
            vals,
        })
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        1 << self.modes
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let row_value = |r: usize| -> Complex64 {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, &v)| v * x[c as usize])
                .sum()
        };
        if y.len() >= PARALLEL_MIN_DIM {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row_value(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, out)| *out = row_value(r));
        }
    }
}

/// Matrix of the Majorana generator `c_i` on `modes` modes.
pub fn generator_matrix(i: MajoranaIndex, modes: usize) -> Result<SparseOperator> {
    if i.get() >= 2 * modes {
        return Err(Error::IndexOutOfRange {
            index: i.0,
            limit: 2 * modes,
        });
    }
    to_matrix(&MajoranaPolynomial::<Complex64>::generator(i), modes)
}

/// Matrix image of a polynomial on `modes` modes.
pub fn to_matrix<C: Coefficient>(p: &MajoranaPolynomial<C>, modes: usize) -> Result<SparseOperator> {
    Ok(SparseOperator::from_pauli_sum(&PauliSum::from_polynomial(p, modes)?))
}

/// A vector in Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(pub Vec<Complex64>);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Complex64::new(1.0, 0.0);
        v
    }

    /// Gaussian-distributed amplitudes, normalized.
    pub fn random<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let mut v = StateVector(
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        );
        v.normalize();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.0 {
                *a /= n;
            }
        }
        n
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.0, &other.0)
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
