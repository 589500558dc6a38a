//! Seeded random matrices, states, and test fixtures.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::{gram_schmidt, ComplexMatrix};

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Random density operator `G G^dagger / Tr`.
pub fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    let rho = &g * &g.adjoint();
    let t = rho.trace().re;
    rho.scale(1.0 / t)
}

/// Haar-style random isometry: `rows >= cols` orthonormal columns from a
/// complex Gaussian matrix.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    loop {
        let g = random_matrix(rng, rows, cols);
        let columns: Vec<Vec<Complex64>> = (0..cols).map(|j| g.col_vec(j)).collect();
        let q = gram_schmidt(&columns, 1e-8);
        if q.len() == cols {
            return ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i]);
        }
    }
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_isometry(rng, n, n)
}

/// Random unit vector.
pub fn random_state(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    random_isometry(rng, n, 1).col_vec(0)
}
