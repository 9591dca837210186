//! ETDRK4 (Cox-Matthews) coefficients for diagonal linear parts.

use num_complex::Complex64;

const CONTOUR_POINTS: usize = 64;
const CONTOUR_RADIUS: f64 = 2.0;

fn phi_direct(z: Complex64) -> [Complex64; 3] {
    let ez = z.exp();
    let one = Complex64::new(1.0, 0.0);
    let p1 = (ez - one) / z;
    let p2 = (ez - one - z) / (z * z);
    let p3 = (ez - one - z - z * z * 0.5) / (z * z * z);
    [p1, p2, p3]
}

/// phi_1, phi_2, phi_3 of z; contour-averaged near the origin.
pub fn phi_functions(z: Complex64) -> [Complex64; 3] {
    if z.norm() >= 1.0 {
        return phi_direct(z);
    }
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for j in 0..CONTOUR_POINTS {
        let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
        let w = z + Complex64::from_polar(CONTOUR_RADIUS, theta);
        let p = phi_direct(w);
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    let scale = 1.0 / CONTOUR_POINTS as f64;
    // the functions are real on the real axis
    let mut out = acc.map(|a| a * scale);
    if z.im == 0.0 {
        out.iter_mut().for_each(|v| v.im = 0.0);
    }
    out
}

/// Per-entry ETDRK4 weights for the linear rates `lambda` and step `h`.
#[derive(Clone, Debug)]
pub struct EtdCoefficients {
    pub h: f64,
    pub e: Vec<Complex64>,
    pub e2: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub f1: Vec<Complex64>,
    pub f2: Vec<Complex64>,
    pub f3: Vec<Complex64>,
}

impl EtdCoefficients {
    pub fn new(lambda: &[Complex64], h: f64) -> EtdCoefficients {
        let n = lambda.len();
        let mut c = EtdCoefficients {
            h,
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &l in lambda {
            let z = l * h;
            let [a1, _, _] = phi_functions(z * 0.5);
            let [p1, p2, p3] = phi_functions(z);
            c.e.push(z.exp());
            c.e2.push((z * 0.5).exp());
            c.q.push(a1 * (0.5 * h));
            c.f1.push((p1 - p2 * 3.0 + p3 * 4.0) * h);
            c.f2.push((p2 - p3 * 2.0) * h);
            c.f3.push((p3 * 4.0 - p2) * h);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }
}

/// One ETDRK4 step on diagonal coordinates `u`. `nonlinear(v, t)` returns N in
/// the same coordinates.
pub fn etdrk4_step<F, E>(
    c: &EtdCoefficients,
    u: &[Complex64],
    t: f64,
    mut nonlinear: F,
) -> Result<Vec<Complex64>, E>
where
    F: FnMut(&[Complex64], f64) -> Result<Vec<Complex64>, E>,
{
    let h = c.h;
    let n = u.len();
    let nu = nonlinear(u, t)?;
    let a: Vec<Complex64> = (0..n).map(|i| c.e2[i] * u[i] + c.q[i] * nu[i]).collect();
    let na = nonlinear(&a, t + 0.5 * h)?;
    let b: Vec<Complex64> = (0..n).map(|i| c.e2[i] * u[i] + c.q[i] * na[i]).collect();
    let nb = nonlinear(&b, t + 0.5 * h)?;
    let cc: Vec<Complex64> = (0..n)
        .map(|i| c.e2[i] * a[i] + c.q[i] * (nb[i] * 2.0 - nu[i]))
        .collect();
    let nc = nonlinear(&cc, t + h)?;
    Ok((0..n)
        .map(|i| {
            c.e[i] * u[i] + c.f1[i] * nu[i] + c.f2[i] * (na[i] + nb[i]) * 2.0 + c.f3[i] * nc[i]
        })
        .collect())
}
