use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::spectral::ScalingParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Squared linear sound speed at wavevector k: T_i + 1/(1 + eps|kbar|^2).
pub fn sound_speed_sq(k: &[f64; 3], p: &ScalingParams) -> f64 {
    p.ion_temperature() + 1.0 / (1.0 + p.epsilon() * p.kbar_sq(k))
}

/// L(k) with eps * d/dt (n, u) = L(k) (n, u) about the uniform state;
/// phi is eliminated through phi = n / (1 + eps|kbar|^2).
pub fn linearized_symbol(k: &[f64; 3], p: &ScalingParams) -> DMatrix<Complex64> {
    let d = p.dim();
    let v = p.wave_speed();
    let kb = p.kbar(k);
    let c2 = sound_speed_sq(k, p);
    let mut l = DMatrix::<Complex64>::zeros(d + 1, d + 1);
    let adv = I * (v * k[0]);
    for j in 0..=d {
        l[(j, j)] = adv;
    }
    for j in 0..d {
        l[(0, j + 1)] = -I * kb[j];
        l[(j + 1, 0)] = -I * (c2 * kb[j]);
    }
    if p.magnetic() {
        let g = Complex64::new(p.b() / p.epsilon().sqrt(), 0.0);
        // u x e1 = (0, u3, -u2)
        l[(2, 3)] = g;
        l[(3, 2)] = -g;
    }
    l
}

/// Unitary-similar diagonalisation L = T diag(i*lambda) T^{-1}.
#[derive(Clone, Debug)]
pub struct ModeDecomposition {
    /// Real frequencies lambda (eigenvalues of L are i*lambda).
    pub lambda: Vec<f64>,
    /// T = S Q, row-major (d+1)^2.
    pub t: Vec<Complex64>,
    /// T^{-1} = Q* S^{-1}, row-major (d+1)^2.
    pub t_inv: Vec<Complex64>,
}

/// With S = diag(1/c, 1, ..), S^{-1} L S = i H for a Hermitian H.
pub fn decompose_mode(k: &[f64; 3], p: &ScalingParams) -> ModeDecomposition {
    let d = p.dim();
    let m = d + 1;
    let v = p.wave_speed();
    let kb = p.kbar(k);
    let c = sound_speed_sq(k, p).sqrt();
    let mut h = DMatrix::<Complex64>::zeros(m, m);
    for j in 0..m {
        h[(j, j)] = Complex64::new(v * k[0], 0.0);
    }
    for j in 0..d {
        h[(0, j + 1)] = Complex64::new(-c * kb[j], 0.0);
        h[(j + 1, 0)] = Complex64::new(-c * kb[j], 0.0);
    }
    if p.magnetic() {
        let g = p.b() / p.epsilon().sqrt();
        h[(2, 3)] = Complex64::new(0.0, -g);
        h[(3, 2)] = Complex64::new(0.0, g);
    }
    let eig = SymmetricEigen::new(h);
    let q = eig.eigenvectors;
    let mut t = vec![Complex64::new(0.0, 0.0); m * m];
    let mut t_inv = vec![Complex64::new(0.0, 0.0); m * m];
    for r in 0..m {
        let s = if r == 0 { 1.0 / c } else { 1.0 };
        for col in 0..m {
            t[r * m + col] = q[(r, col)] * s;
            // (Q* S^{-1})[r][col] = conj(Q[col][r]) / s_col
            let s_col = if col == 0 { c } else { 1.0 };
            t_inv[r * m + col] = q[(col, r)].conj() * s_col;
        }
    }
    ModeDecomposition {
        lambda: eig.eigenvalues.iter().copied().collect(),
        t,
        t_inv,
    }
}
