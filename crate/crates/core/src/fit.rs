//! Ordinary least squares on straight lines, used for log-log slopes.

/// Result of fitting `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of a data point from the fitted line.
    pub max_residual: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Fits a single line. Returns `None` for fewer than two points or
/// degenerate abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    fit_shared_slope(&[(xs, ys)]).map(|(slope, intercepts, max_residual)| LineFit {
        slope,
        intercept: intercepts[0],
        max_residual,
    })
}

/// Fits several series with one common slope and one intercept each.
///
/// Returns `(slope, intercepts, max_residual)`; intercepts follow the order
/// of `series`. Up to four series are supported.
pub fn fit_shared_slope(series: &[(&[f64], &[f64])]) -> Option<(f64, [f64; 4], f64)> {
    if series.is_empty() || series.len() > 4 {
        return None;
    }
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut centers = [(0.0, 0.0); 4];
    for (k, (xs, ys)) in series.iter().enumerate() {
        if xs.len() != ys.len() || xs.len() < 2 {
            return None;
        }
        let (mx, my) = (mean(xs), mean(ys));
        centers[k] = (mx, my);
        for (x, y) in xs.iter().zip(ys.iter()) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let mut intercepts = [0.0; 4];
    let mut max_residual: f64 = 0.0;
    for (k, (xs, ys)) in series.iter().enumerate() {
        let (mx, my) = centers[k];
        intercepts[k] = my - slope * mx;
        for (x, y) in xs.iter().zip(ys.iter()) {
            max_residual = max_residual.max((y - intercepts[k] - slope * x).abs());
        }
    }
    Some((slope, intercepts, max_residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, -3.0, -5.0];
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!(f.max_residual < 1e-15);
    }

    #[test]
    fn shared_slope_separate_intercepts() {
        let xs = [0.0, 1.0, 2.0];
        let a = [0.0, 3.0, 6.0];
        let b = [5.0, 8.0, 11.0];
        let (s, c, r) = fit_shared_slope(&[(&xs, &a), (&xs, &b)]).unwrap();
        assert!((s - 3.0).abs() < 1e-15);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[1], 5.0);
        assert!(r < 1e-14);
    }

    #[test]
    fn degenerate_input() {
        assert!(fit_line(&[1.0], &[2.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }
}
