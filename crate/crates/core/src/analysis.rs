//! Post-processing of sampled trajectories.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub is_max: bool,
    pub prominence: f64,
}

/// Strict local extrema of `x` whose topographic prominence is at least
/// `min_prominence`. Plateaus are not counted.
///
/// The prominence of a maximum is its height above the higher of the two
/// lowest points reached on either side before the signal climbs above the
/// peak (or the data ends); minima use the mirrored definition.
pub fn prominent_extrema(x: &[f64], min_prominence: f64) -> Vec<Extremum> {
    let mut out = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        let (before, after) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let is_max = before > 0.0 && after < 0.0;
        let is_min = before < 0.0 && after > 0.0;
        if !(is_max || is_min) {
            continue;
        }
        let sign = if is_max { 1.0 } else { -1.0 };
        let h = |k: usize| sign * x[k];
        let peak = h(i);
        let mut left = peak;
        for k in (0..i).rev() {
            if h(k) > peak {
                break;
            }
            left = left.min(h(k));
        }
        let mut right = peak;
        for k in i + 1..x.len() {
            if h(k) > peak {
                break;
            }
            right = right.min(h(k));
        }
        let prominence = peak - left.max(right);
        if prominence >= min_prominence {
            out.push(Extremum { index: i, is_max, prominence });
        }
    }
    out
}

/// Mean of `values` over the final quarter of the sampled window.
pub fn steady_value(times: &[f64], values: &[f64]) -> f64 {
    if times.is_empty() {
        return f64::NAN;
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let cut = t1 - 0.25 * (t1 - t0);
    let start = times.partition_point(|&t| t < cut);
    crate::deviation::time_average(&times[start..], &values[start..])
}

/// Time of the first local minimum with at least the given prominence.
pub fn first_minimum_time(times: &[f64], values: &[f64], min_prominence: f64) -> Option<f64> {
    prominent_extrema(values, min_prominence)
        .into_iter()
        .find(|e| !e.is_max)
        .map(|e| times[e.index])
}

/// Angular frequency of the largest peak in the power spectrum of
/// `values − mean`, scanned on `n_freq` points in `(0, omega_hi]`.
pub fn dominant_frequency(times: &[f64], values: &[f64], omega_hi: f64, n_freq: usize) -> f64 {
    let mean = crate::deviation::time_average(times, values);
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 1..=n_freq {
        let w = omega_hi * k as f64 / n_freq as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in times.iter().zip(values) {
            let (s, c) = (w * t).sin_cos();
            re += (v - mean) * c;
            im += (v - mean) * s;
        }
        let power = re * re + im * im;
        if power > best.1 {
            best = (w, power);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prominence_filters_small_wiggles() {
        let x: Vec<f64> = (0..2000)
            .map(|k| {
                let t = k as f64 * 0.01;
                (-t).exp() + 1e-5 * (40.0 * t).sin()
            })
            .collect();
        assert!(prominent_extrema(&x, 1e-3).is_empty());
        assert!(!prominent_extrema(&x, 1e-6).is_empty());
    }

    #[test]
    fn cosine_extrema() {
        let x: Vec<f64> = (0..=1000).map(|k| (k as f64 * 0.02).cos()).collect();
        let e = prominent_extrema(&x, 1e-3);
        // minima at π, 3π, 5π; maxima at 2π, 4π, 6π
        assert_eq!(e.len(), 6);
        assert!(!e[0].is_max);
        assert!((e[0].prominence - 2.0).abs() < 1e-3);
    }

    #[test]
    fn steady_value_of_constant_tail() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64).collect();
        let v: Vec<f64> = t.iter().map(|&t| if t < 75.0 { 5.0 } else { 1.0 }).collect();
        assert_eq!(steady_value(&t, &v), 1.0);
    }

    #[test]
    fn first_minimum_and_spectrum() {
        let t: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.05).collect();
        let v: Vec<f64> = t.iter().map(|t| (0.3 * t).cos()).collect();
        let tm = first_minimum_time(&t, &v, 1e-3).unwrap();
        assert!((tm - std::f64::consts::PI / 0.3).abs() < 0.05);
        let w = dominant_frequency(&t, &v, 1.0, 1000);
        assert!((w - 0.3).abs() < 2e-3);
    }
}
