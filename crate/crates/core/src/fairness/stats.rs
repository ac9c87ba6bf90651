//! Run-stability and trade-off statistics.

use crate::{Error, Result};

/// Sample standard deviation (n - 1) over `|mean|`.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::Domain("mean is zero".into()));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt() / mean.abs())
}

/// 2×2 sample covariance (n - 1) of `points`, row-major.
pub fn sample_covariance_2d(points: &[(f64, f64)]) -> [[f64; 2]; 2] {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let k = 1.0 / (n - 1.0);
    [[sxx * k, sxy * k], [sxy * k, syy * k]]
}

/// `sqrt(xᵀ S⁻¹ x)`: distance of `point` from the origin under covariance
/// `cov`.
pub fn mahalanobis_from_origin(point: (f64, f64), cov: [[f64; 2]; 2]) -> Result<f64> {
    let [[a, b], [c, d]] = cov;
    let det = a * d - b * c;
    // Relative to the scale of the matrix, so unit choice does not matter.
    let scale = (a.abs() + d.abs()).powi(2);
    if !(det.is_finite() && scale > 0.0 && det.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateGeometry(format!(
            "covariance {cov:?} is singular"
        )));
    }
    let (x, y) = point;
    let q = (d * x * x - (b + c) * x * y + a * y * y) / det;
    Ok(q.max(0.0).sqrt())
}

/// Distance of each point from the origin, using the sample covariance of the
/// whole point cloud as the metric. Lower is a better error/violation
/// trade-off.
pub fn mahalanobis_rank(points: &[(f64, f64)]) -> Result<Vec<f64>> {
    if points.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "need at least 3 points for a nonsingular covariance, got {}",
            points.len()
        )));
    }
    let cov = sample_covariance_2d(points);
    points
        .iter()
        .map(|&p| mahalanobis_from_origin(p, cov))
        .collect()
}
