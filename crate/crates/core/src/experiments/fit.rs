use crate::error::{Error, Result};
use serde::Serialize;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    /// 95% Student-t half-width of the slope.
    pub half_width: f64,
    /// Indices into the input kept in the final fit.
    pub used: Vec<usize>,
    /// Non-positive values and floor-limited endpoints.
    pub excluded: Vec<usize>,
}

const T95: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

fn t95(df: usize) -> f64 {
    T95.get(df.wrapping_sub(1)).copied().unwrap_or(1.96)
}

fn line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let se = if x.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, se)
}

/// Fits `ln y = slope · ln x + c`. The endpoint at the low end of the trend is
/// dropped while its ratio to its neighbour misses the fitted trend
/// by more than 50%, as long as three points remain.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    assert_eq!(x.len(), y.len());
    let mut used: Vec<usize> = (0..x.len())
        .filter(|&i| x[i] > 0.0 && y[i] > 0.0 && y[i].is_finite())
        .collect();
    let mut excluded: Vec<usize> = (0..x.len()).filter(|i| !used.contains(i)).collect();
    used.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let fit_on = |idx: &[usize]| {
        let lx: Vec<f64> = idx.iter().map(|&i| x[i].ln()).collect();
        let ly: Vec<f64> = idx.iter().map(|&i| y[i].ln()).collect();
        line(&lx, &ly)
    };
    if used.len() < 3 {
        return Err(Error::FitDegenerate(used.len()));
    }
    loop {
        let (slope, intercept, se) = fit_on(&used);
        let k = used.len();
        // The floor shows at the end where the trend is smallest.
        let low = if slope >= 0.0 { 0 } else { k - 1 };
        let drop = if k > 3 {
            [(0, 1), (k - 1, k - 2)].into_iter().find(|&(e, nb)| {
                let (ie, inb) = (used[e], used[nb]);
                let predicted = (slope * (x[ie].ln() - x[inb].ln())).exp();
                e == low && ((y[ie] / y[inb]) / predicted - 1.0).abs() > 0.5
            })
        } else {
            None
        };
        match drop {
            Some((e, _)) => excluded.push(used.remove(e)),
            None => {
                excluded.sort_unstable();
                return Ok(SlopeFit {
                    slope,
                    intercept,
                    std_error: se,
                    half_width: t95(k - 2) * se,
                    used,
                    excluded,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let x = [8.0, 16.0, 32.0, 64.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-2.0)).collect();
        let f = fit_loglog(&x, &y).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!(f.std_error < 1e-12);
        assert_eq!(f.used, vec![0, 1, 2, 3]);
    }

    #[test]
    fn floor_endpoint_is_dropped() {
        let x = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1];
        let mut y: Vec<f64> = x.iter().map(|v: &f64| v.powi(4)).collect();
        y[0] = 3e-15;
        let f = fit_loglog(&x, &y).unwrap();
        assert_eq!(f.excluded, vec![0]);
        assert!((f.slope - 4.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            fit_loglog(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::FitDegenerate(2))
        ));
        assert!(matches!(
            fit_loglog(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]),
            Err(Error::FitDegenerate(2))
        ));
    }

    #[test]
    fn noisy_line_has_positive_error() {
        let x = [1.0, 2.0, 4.0, 8.0, 16.0];
        let y = [1.0, 2.2, 3.8, 8.4, 15.5];
        let f = fit_loglog(&x, &y).unwrap();
        assert!(f.std_error > 0.0 && f.half_width > f.std_error);
        assert!((f.slope - 1.0).abs() < 3.0 * f.std_error + 0.05);
    }

    proptest! {
        #[test]
        fn recovers_any_power(p in -6.0f64..6.0, c in 0.1f64..10.0) {
            let x = [2.0, 4.0, 8.0, 16.0, 32.0];
            let y: Vec<f64> = x.iter().map(|v: &f64| c * v.powf(p)).collect();
            let f = fit_loglog(&x, &y).unwrap();
            prop_assert!((f.slope - p).abs() < 1e-9);
            prop_assert!(f.excluded.is_empty());
        }
    }
}
