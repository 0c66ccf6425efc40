use serde::Serialize;

use crate::{Error, GrowthProfile, Result};

/// Least-squares fit of `ln value` against a regressor over a window of a
/// growth profile. The slope is a finite-radius surrogate for the growth
/// rate, not the rate itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the fit residuals.
    pub residual: f64,
    pub window: (f64, f64),
    pub points: usize,
}

fn window_points(profile: &GrowthProfile, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if !(lo <= hi) || lo < profile.radii()[0] || hi > profile.last_radius() {
        return Err(Error::input(format!(
            "window [{lo}, {hi}] is outside the tabulated radii [{}, {}]",
            profile.radii()[0],
            profile.last_radius()
        )));
    }
    let points = profile.window(lo, hi);
    if points.len() < 3 {
        return Err(Error::input(format!("window [{lo}, {hi}] holds {} radii; at least 3 are needed", points.len())));
    }
    if points.iter().any(|&(_, v)| v <= 0.0) {
        return Err(Error::input("profile values in the window must be positive"));
    }
    Ok(points)
}

fn least_squares(xs: &[f64], ys: &[f64], window: (f64, f64)) -> EntropyEstimate {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>().sqrt();
    EntropyEstimate { slope, intercept, residual, window, points: xs.len() }
}

/// Slope of `ln value` against radius over the tabulated radii in `window`.
pub fn entropy_estimate(profile: &GrowthProfile, window: (f64, f64)) -> Result<EntropyEstimate> {
    let points = window_points(profile, window)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(least_squares(&xs, &ys, window))
}

/// Slope of `ln value` against `ln radius`, i.e. the apparent polynomial
/// degree. The window must exclude radius 0.
pub fn polynomial_degree_estimate(profile: &GrowthProfile, window: (f64, f64)) -> Result<EntropyEstimate> {
    if window.0 <= 0.0 {
        return Err(Error::input("a log-log fit needs a window of positive radii"));
    }
    let points = window_points(profile, window)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(least_squares(&xs, &ys, window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmgraph::integer_radii;
    use crate::GrowthMode;

    fn closed_form(r_max: usize, f: impl Fn(f64) -> f64) -> GrowthProfile {
        GrowthProfile::from_fn(integer_radii(r_max), GrowthMode::Absolute, f).unwrap()
    }

    #[test]
    fn free_group_slope_approaches_ln3() {
        let p = closed_form(10, |r| 2.0 * 3f64.powf(r) - 1.0);
        let est = entropy_estimate(&p, (4.0, 8.0)).unwrap();
        assert!((est.slope - 3f64.ln()).abs() / 3f64.ln() < 0.02, "{est:?}");
        assert_eq!(est.points, 5);
        let err = |w| (entropy_estimate(&p, w).unwrap().slope - 3f64.ln()).abs();
        assert!(err((3.0, 6.0)) > err((4.0, 8.0)));
        assert!(err((4.0, 8.0)) > err((5.0, 9.0)));
    }

    #[test]
    fn flat_and_polynomial_profiles() {
        let flat = closed_form(10, |_| 7.0);
        let est = entropy_estimate(&flat, (0.0, 10.0)).unwrap();
        assert_eq!(est.slope, 0.0);
        assert!(est.residual < 1e-12);

        let quad = closed_form(30, |r| 2.0 * r * r + 2.0 * r + 1.0);
        assert!(entropy_estimate(&quad, (10.0, 30.0)).unwrap().slope <= 0.15);
        let deg = polynomial_degree_estimate(&quad, (10.0, 30.0)).unwrap().slope;
        assert!((deg - 2.0).abs() / 2.0 < 0.05, "{deg}");
    }

    #[test]
    fn window_validation() {
        let p = closed_form(5, |r| r + 1.0);
        assert!(entropy_estimate(&p, (3.0, 9.0)).is_err());
        assert!(entropy_estimate(&p, (3.0, 4.0)).is_err());
        assert!(entropy_estimate(&p, (4.0, 2.0)).is_err());
        assert!(polynomial_degree_estimate(&p, (0.0, 5.0)).is_err());
    }
}
