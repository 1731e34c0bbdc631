//! Compensated floating-point accumulation helpers.

/// Neumaier-compensated running sum.
///
/// Tracks the rounding error of every addition in a separate compensation
/// term, which keeps long accumulations (summed-area tables, global sums
/// over full-size scenes) accurate to a few ulp of the true result.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub(crate) fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Mean computed relative to the first element.
///
/// Summing the deltas `v - values[0]` instead of the raw values makes the
/// mean of a constant slice return that constant bit-exactly, which several
/// identities in this crate rely on (constant-band window statistics,
/// block means of replicated pixels).
pub(crate) fn anchored_mean(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let anchor = values[0];
    let deltas = sum(values.iter().map(|v| v - anchor));
    anchor + deltas / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchored_mean_of_constant_is_exact() {
        let data = vec![0.1; 1000];
        assert_eq!(anchored_mean(&data), 0.1);
    }

    #[test]
    fn neumaier_recovers_cancelling_terms() {
        let mut acc = NeumaierSum::new();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.total(), 2.0);
    }

    #[test]
    fn anchored_mean_matches_naive_on_ordinary_data() {
        let data: Vec<f64> = (0..97).map(|i| (i as f64) * 0.37 + 4.0).collect();
        let naive: f64 = data.iter().sum::<f64>() / data.len() as f64;
        assert!((anchored_mean(&data) - naive).abs() < 1e-12);
    }
}
