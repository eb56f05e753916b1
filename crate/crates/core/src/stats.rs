//! Compensated accumulation and replication summaries.

/// Neumaier (improved Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of a slice in index order.
pub fn sum(xs: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(xs.iter().copied());
    acc.value()
}

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    sum(xs) / xs.len() as f64
}

/// Unbiased sample variance by the two-pass algorithm; `None` below two values.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let mut acc = CompensatedSum::new();
    acc.extend(xs.iter().map(|&x| (x - m) * (x - m)));
    Some(acc.value() / (xs.len() - 1) as f64)
}

/// Mean, sample standard deviation and standard error of a replication set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sample_stddev: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let sd = sample_variance(xs).map(libm::sqrt);
    Summary {
        mean: mean(xs),
        sample_stddev: sd,
        stderr: sd.map(|s| s / libm::sqrt(xs.len() as f64)),
        count: xs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = Vec::new();
        xs.push(1e16);
        xs.extend(core::iter::repeat(1.0).take(1000));
        xs.push(-1e16);
        assert_eq!(sum(&xs), 1000.0);
    }

    #[test]
    fn variance_of_short_inputs() {
        assert_eq!(sample_variance(&[]), None);
        assert_eq!(sample_variance(&[3.0]), None);
        assert_eq!(sample_variance(&[1.0, 3.0]), Some(2.0));
        let s = summarize(&[2.0]);
        assert_eq!(s.mean, 2.0);
        assert!(s.sample_stddev.is_none() && s.stderr.is_none());
    }

    #[test]
    fn two_pass_is_shift_stable() {
        let base = [1.0, 2.0, 3.0, 4.0];
        let shifted: Vec<f64> = base.iter().map(|x| x + 1e9).collect();
        let a = sample_variance(&base).unwrap();
        let b = sample_variance(&shifted).unwrap();
        assert!((a - b).abs() < 1e-6);
    }
}
