//! Small statistical helpers shared by the simulators and analysis code.

/// Kahan–Babuška compensated summation. Reductions over per-trial results
/// always run in trial order, so sums are reproducible across thread counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated sum of a slice, in slice order.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Sample mean and standard error of the mean (unbiased variance, n−1).
/// Returns stderr 0 for fewer than two samples.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = kahan_sum(values) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut sq = KahanSum::new();
    for &v in values {
        let d = v - mean;
        sq.add(d * d);
    }
    let var = sq.value() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Sample variance (unbiased).
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 2, "variance needs at least two samples");
    let mean = kahan_sum(values) / n as f64;
    let mut sq = KahanSum::new();
    for &v in values {
        let d = v - mean;
        sq.add(d * d);
    }
    sq.value() / (n as f64 - 1.0)
}

/// Centered moving average with the given odd window; the window shrinks
/// symmetrically near the ends.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window % 2 == 1, "window must be odd");
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let k = half.min(i).min(values.len() - 1 - i);
            let slice = &values[i - k..=i + k];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Spearman rank correlation between `x` and `y`. Ties get averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN in rank input"));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kahan_beats_naive_on_adversarial_input() {
        let values: Vec<f64> = std::iter::once(1e16).chain(std::iter::repeat(1.0).take(10_000)).collect();
        assert_eq!(kahan_sum(&values), 1e16 + 10_000.0);
    }

    #[test]
    fn mean_stderr_matches_hand_computation() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(m, 2.5);
        // var = 5/3, se = sqrt(5/3/4)
        assert_relative_eq!(se, (5.0 / 3.0 / 4.0_f64).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn spearman_detects_monotone_trends() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert_relative_eq!(spearman(&x, &y), 1.0);
        let y_rev: Vec<f64> = x.iter().rev().cloned().collect();
        assert_relative_eq!(spearman(&x, &y_rev), -1.0);
    }

    #[test]
    fn moving_average_preserves_length_and_constants() {
        let v = vec![2.0; 11];
        let s = moving_average(&v, 5);
        assert_eq!(s.len(), 11);
        assert!(s.iter().all(|&x| x == 2.0));
    }
}
