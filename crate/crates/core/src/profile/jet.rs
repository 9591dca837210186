use crate::spectral::{d, d1_inv, dealiased_product, forward_unchecked, inverse_transform, x1_mean, RealField};

/// A field with (optionally) its time derivative; operations apply the
/// product rule so profile formulas give their own time derivatives.
#[derive(Clone, Debug)]
pub(crate) struct Jet {
    pub value: RealField,
    pub dot: Option<RealField>,
}

fn lift2(a: &Option<RealField>, b: &Option<RealField>, f: impl Fn(&RealField, &RealField) -> RealField) -> Option<RealField> {
    match (a, b) {
        (Some(x), Some(y)) => Some(f(x, y)),
        _ => None,
    }
}

impl Jet {
    pub fn new(value: RealField, dot: Option<RealField>) -> Jet {
        Jet { value, dot }
    }

    pub fn zero_like(f: &RealField) -> Jet {
        let z = RealField::zeros(f.grid());
        Jet::new(z.clone(), Some(z))
    }

    fn map(&self, f: impl Fn(&RealField) -> RealField) -> Jet {
        Jet {
            value: f(&self.value),
            dot: self.dot.as_ref().map(f),
        }
    }

    pub fn d(&self, axis: usize, order: u32) -> Jet {
        self.map(|f| d(f, axis, order))
    }

    /// Laplacian over the given axes.
    pub fn lap(&self, axes: std::ops::Range<usize>) -> Jet {
        self.map(|f| {
            let mut out = RealField::zeros(f.grid());
            for a in axes.clone() {
                out += &d(f, a, 2);
            }
            out
        })
    }

    pub fn d1_inv(&self) -> Jet {
        self.map(d1_inv)
    }

    pub fn scale(&self, c: f64) -> Jet {
        self.map(|f| f * c)
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            value: &self.value + &o.value,
            dot: lift2(&self.dot, &o.dot, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.add(&o.scale(-1.0))
    }

    /// Dealiased product.
    pub fn mul(&self, o: &Jet) -> Jet {
        let dot = lift2(&self.dot, &o.dot, |ad, bd| {
            &dealiased_product(ad, &o.value) + &dealiased_product(&self.value, bd)
        });
        Jet {
            value: dealiased_product(&self.value, &o.value),
            dot,
        }
    }

    /// Average over x1 (a field constant in x1).
    pub fn x1_mean(&self) -> Jet {
        self.map(x1_mean)
    }

    /// Removes the k1 = 0 content.
    pub fn zero_x1_mean(&self) -> Jet {
        self.map(|f| {
            let mut s = forward_unchecked(f);
            let grid = s.grid().clone();
            for (c, k) in s.coeffs_mut().iter_mut().zip(grid.kvecs()) {
                if k[0] == 0.0 {
                    *c = num_complex::Complex64::new(0.0, 0.0);
                }
            }
            inverse_transform(&s)
        })
    }
}
