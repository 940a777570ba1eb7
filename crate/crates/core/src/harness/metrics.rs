use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cumulative regret `R(t) = sum_{s <= t} (u_ref(s) / delta - u(s))`.
///
/// `delta = None` is the plain regret against the reference.
pub fn regret_curve(policy: &[f64], reference: &[f64], delta: Option<f64>) -> Result<Vec<f64>> {
    if policy.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: policy.len(),
            right: reference.len(),
        });
    }
    let scale = match delta {
        Some(d) if d > 0.0 => 1.0 / d,
        Some(d) => return Err(Error::InvalidInput(format!("delta = {d} must be > 0"))),
        None => 1.0,
    };
    let mut acc = 0.0;
    Ok(policy
        .iter()
        .zip(reference)
        .map(|(u, r)| {
            acc += scale * r - u;
            acc
        })
        .collect())
}

/// Least-squares fit of `log R(t)` against `log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits the growth exponent of a series indexed from `t = 1` over its last
/// `window` fraction (0.5 keeps the second half).
pub fn sublinearity_fit(series: &[f64], window: f64) -> Result<ExponentFit> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "window = {window} must lie in (0, 1]"
        )));
    }
    let n = series.len();
    let start = n - ((n as f64 * window).round() as usize).clamp(2.min(n), n);
    fit_range(series, start, n)
}

/// Fit over the 1-based rounds `from..=to`.
pub fn sublinearity_fit_rounds(series: &[f64], from: u64, to: u64) -> Result<ExponentFit> {
    let to = (to as usize).min(series.len());
    let from = (from.max(1) as usize).min(to);
    fit_range(series, from - 1, to)
}

fn fit_range(series: &[f64], start: usize, end: usize) -> Result<ExponentFit> {
    if end < start + 2 {
        return Err(Error::InvalidInput(
            "need at least two points to fit".into(),
        ));
    }
    let mut xs = Vec::with_capacity(end - start);
    let mut ys = Vec::with_capacity(end - start);
    for (i, &v) in series.iter().enumerate().take(end).skip(start) {
        if !(v > 0.0) {
            return Err(Error::NonPositive { index: i, value: v });
        }
        xs.push(((i + 1) as f64).ln());
        ys.push(v.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(ExponentFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: xs.len(),
    })
}

/// Share of consecutive width-`width` blocks whose regret increment does not
/// exceed the previous block's increment, i.e. the second differences of
/// `R` sampled every `width` rounds that are `<= 0`.
pub fn concave_fraction(series: &[f64], width: usize) -> Result<f64> {
    if width == 0 {
        return Err(Error::InvalidInput("window width must be >= 1".into()));
    }
    let at = |t: usize| if t == 0 { 0.0 } else { series[t - 1] };
    let blocks = series.len() / width;
    if blocks < 2 {
        return Err(Error::InvalidInput("need at least two full windows".into()));
    }
    let inc: Vec<f64> = (1..=blocks)
        .map(|k| at(k * width) - at((k - 1) * width))
        .collect();
    let good = inc.windows(2).filter(|w| w[1] - w[0] <= 0.0).count();
    Ok(good as f64 / (inc.len() - 1) as f64)
}

/// Element-wise mean of equally long series.
pub fn mean_series(series: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = series.first() else {
        return Ok(Vec::new());
    };
    let mut out = vec![0.0; first.len()];
    for s in series {
        if s.len() != out.len() {
            return Err(Error::LengthMismatch {
                left: out.len(),
                right: s.len(),
            });
        }
        for (o, v) in out.iter_mut().zip(s) {
            *o += v;
        }
    }
    let k = series.len() as f64;
    out.iter_mut().for_each(|o| *o /= k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_logs_give_zero_regret() {
        let u = [0.3, 0.5, 0.9];
        assert_eq!(regret_curve(&u, &u, None).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn constant_gap_accumulates_linearly() {
        let r = regret_curve(&[0.5; 10], &[0.75; 10], None).unwrap();
        assert!((r[9] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn delta_regret_per_round() {
        let r = regret_curve(&[1.9], &[1.0], Some(0.5)).unwrap();
        assert!((r[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(regret_curve(&[1.0], &[1.0, 2.0], None).is_err());
    }

    #[test]
    fn fits_power_laws() {
        let lin: Vec<f64> = (1..=1000).map(|t| t as f64).collect();
        assert!((sublinearity_fit(&lin, 0.5).unwrap().slope - 1.0).abs() < 0.01);
        let root: Vec<f64> = (1..=1000).map(|t| (t as f64).sqrt()).collect();
        assert!((sublinearity_fit(&root, 0.5).unwrap().slope - 0.5).abs() < 0.01);
    }

    #[test]
    fn rejects_non_positive_window() {
        let s = vec![0.0, 0.0, 1.0, 2.0];
        assert!(matches!(
            sublinearity_fit(&s, 1.0),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn concavity_of_square_root() {
        let root: Vec<f64> = (1..=1000).map(|t| (t as f64).sqrt()).collect();
        assert_eq!(concave_fraction(&root, 100).unwrap(), 1.0);
        let convex: Vec<f64> = (1..=1000).map(|t| (t * t) as f64).collect();
        assert_eq!(concave_fraction(&convex, 100).unwrap(), 0.0);
    }
}
