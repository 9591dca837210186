use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares line log(error) = order * log(eps) + intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub order: f64,
    pub intercept: f64,
    pub r2: f64,
    pub stderr: f64,
    /// 95% confidence interval of the order (Student t, n - 2 degrees of freedom).
    pub ci95: [f64; 2],
}

pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 3 {
        return Err(Error::UndefinedFit(format!("{} points, need at least 3", points.len())));
    }
    for &(e, err) in points {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::UndefinedFit(format!("epsilon {e} is not positive")));
        }
        if !(err > 0.0) || !err.is_finite() {
            return Err(Error::UndefinedFit(format!("error {err} at epsilon {e} is not positive")));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::UndefinedFit("all epsilons coincide".into()));
    }
    let order = sxy / sxx;
    let intercept = my - order * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - order * x - intercept).powi(2))
        .sum();
    let r2 = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let dof = n - 2.0;
    let stderr = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::UndefinedFit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(OrderFit {
        order,
        intercept,
        r2,
        stderr,
        ci95: [order - t * stderr, order + t * stderr],
    })
}
