//! Reference implementations for tests: Jordan-Wigner matrices built from
//! Kronecker products of 2x2 Pauli matrices, and the diamond geometry written
//! out by hand.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(name: char) -> M {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match name {
        'I' => M::from_row_slice(2, 2, &[l, o, o, l]),
        'X' => M::from_row_slice(2, 2, &[o, l, l, o]),
        'Y' => M::from_row_slice(2, 2, &[o, -i, i, o]),
        'Z' => M::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => unreachable!(),
    }
}

/// Majorana `c_i` on `modes` modes; mode 0 is the least significant factor.
pub fn majorana(i: usize, modes: usize) -> M {
    let k = i / 2;
    let mut out = M::identity(1, 1);
    for mode in (0..modes).rev() {
        let f = match mode.cmp(&k) {
            std::cmp::Ordering::Less => 'Z',
            std::cmp::Ordering::Equal => {
                if i.is_multiple_of(2) {
                    'X'
                } else {
                    'Y'
                }
            }
            std::cmp::Ordering::Greater => 'I',
        };
        out = out.kronecker(&pauli(f));
    }
    out
}

pub fn product(indices: &[usize], modes: usize) -> M {
    let dim = 1 << modes;
    indices
        .iter()
        .fold(M::identity(dim, dim), |acc, &i| acc * majorana(i, modes))
}

/// Diamond: islands at (0,1), (1,0), (1,2), (2,1) with corners 4*rank + (a,b,c,d).
pub const DIAMOND_ISLANDS: [[usize; 4]; 4] = [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9, 10, 11], [12, 13, 14, 15]];
/// b of (x,y) to d of (x+1,y+1); c of (x,y) to a of (x+1,y-1).
pub const DIAMOND_BONDS: [(usize, usize); 4] = [(1, 11), (2, 4), (5, 15), (10, 12)];
/// Octagon circuit: west c, south a, south b, east d, east a, north c, north d, west b.
pub const DIAMOND_OCTET: [usize; 8] = [2, 4, 5, 15, 12, 10, 11, 1];
/// Mirror x -> 2 - x: corners a<->b, c<->d, islands (0,1)<->(2,1).
pub const DIAMOND_SIGMA: [usize; 16] = [13, 12, 15, 14, 5, 4, 7, 6, 9, 8, 11, 10, 1, 0, 3, 2];

pub fn diamond_hamiltonian(lambda: f64) -> M {
    let modes = 8;
    let mut h = M::zeros(256, 256);
    for island in DIAMOND_ISLANDS {
        h -= product(&island, modes);
    }
    for (u, v) in DIAMOND_BONDS {
        h += product(&[u, v], modes) * c(0.0, lambda);
    }
    h
}

/// `W = i^4 c_1 ... c_8` along the octagon circuit.
pub fn diamond_loop() -> M {
    product(&DIAMOND_OCTET, 8)
}

pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: M,
}

pub fn eigh(h: &M) -> Eigen {
    let e = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vectors = M::from_fn(h.nrows(), h.nrows(), |r, col| e.eigenvectors[(r, order[col])]);
    Eigen {
        values: order.iter().map(|&i| e.eigenvalues[i]).collect(),
        vectors,
    }
}

/// Projector on eigenvalues within `tol` of the minimum.
pub fn ground_projector(e: &Eigen, tol: f64) -> (M, usize) {
    let n = e.values.iter().take_while(|&&x| x - e.values[0] <= tol).count();
    let v = e.vectors.columns(0, n).into_owned();
    (&v * v.adjoint(), n)
}

/// `|| P W P - alpha P ||_F` with `alpha = tr(PWP)/tr(P)`; independent of basis.
pub fn order_deviation(p: &M, w: &M) -> (f64, f64) {
    let pwp = p * w * p;
    let n = p.trace().re;
    let alpha = pwp.trace().re / n;
    ((pwp - p * c(alpha, 0.0)).norm(), alpha)
}

pub fn gibbs_average(h: &M, o: &M, beta: f64) -> Complex64 {
    let e = eigh(h);
    let e0 = e.values[0];
    let mut num = c(0.0, 0.0);
    let mut z = 0.0;
    for (k, &ek) in e.values.iter().enumerate() {
        let w = (-beta * (ek - e0)).exp();
        let v = e.vectors.column(k);
        num += (v.adjoint() * o * v)[(0, 0)] * w;
        z += w;
    }
    num / z
}

/// Reflected monomial `ϑ(coef * c_{i1}...c_{ik}) = conj(coef) c_{σ i1} ... c_{σ ik}` as a matrix.
pub fn reflected_monomial(coef: Complex64, indices: &[usize], sigma: &[usize], modes: usize) -> M {
    let mapped: Vec<usize> = indices.iter().map(|&i| sigma[i]).collect();
    product(&mapped, modes) * coef.conj()
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
