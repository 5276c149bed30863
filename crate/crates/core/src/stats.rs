//! Batch-means confidence intervals.

use alloc::vec::Vec;

/// Two-sided 97.5% Student-t quantiles for 1..=30 degrees of freedom.
const T975: [f64; 30] = [
    12.706_204_736,
    4.302_652_730,
    3.182_446_305,
    2.776_445_105,
    2.570_581_836,
    2.446_911_851,
    2.364_624_252,
    2.306_004_135,
    2.262_157_163,
    2.228_138_852,
    2.200_985_160,
    2.178_812_830,
    2.160_368_656,
    2.144_786_688,
    2.131_449_546,
    2.119_905_299,
    2.109_815_578,
    2.100_922_040,
    2.093_024_054,
    2.085_963_447,
    2.079_613_845,
    2.073_873_068,
    2.068_657_610,
    2.063_898_562,
    2.059_538_553,
    2.055_529_439,
    2.051_830_516,
    2.048_407_142,
    2.045_229_642,
    2.042_272_456,
];

const Z975: f64 = 1.959_963_984_540_054;

/// 0.975 quantile of Student's t with `df` degrees of freedom.
pub fn t975(df: usize) -> f64 {
    match df {
        0 => f64::INFINITY,
        1..=30 => T975[df - 1],
        _ => {
            // Cornish-Fisher expansion; error below 1e-5 for df > 30.
            let z = Z975;
            let n = df as f64;
            let z3 = z * z * z;
            let z5 = z3 * z * z;
            let z7 = z5 * z * z;
            z + (z3 + z) / (4.0 * n)
                + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * n * n)
                + (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * n * n * n)
        }
    }
}

/// Accumulates observations into a fixed number of equal-size batches.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    batch_size: u64,
    batches: usize,
    sums: Vec<f64>,
    count: u64,
}

impl BatchMeans {
    /// `total` observations split into `batches` batches; any remainder is
    /// folded into the last batch.
    pub fn new(total: u64, batches: usize) -> Self {
        let batches = batches.max(1);
        Self {
            batch_size: (total / batches as u64).max(1),
            batches,
            sums: alloc::vec![0.0; batches],
            count: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        let b = ((self.count / self.batch_size) as usize).min(self.batches - 1);
        self.sums[b] += x;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn batch_len(&self, b: usize) -> u64 {
        if b + 1 < self.batches {
            self.batch_size
                .min(self.count.saturating_sub(b as u64 * self.batch_size))
        } else {
            self.count.saturating_sub(b as u64 * self.batch_size)
        }
    }

    /// Grand mean and 95% half-width.
    pub fn estimate(&self) -> (f64, f64) {
        let total: f64 = self.sums.iter().sum();
        let mean = if self.count == 0 {
            f64::NAN
        } else {
            total / self.count as f64
        };
        let means: Vec<f64> = (0..self.batches)
            .filter_map(|b| {
                let n = self.batch_len(b);
                (n > 0).then(|| self.sums[b] / n as f64)
            })
            .collect();
        let k = means.len();
        if k < 2 {
            return (mean, f64::INFINITY);
        }
        let bm = means.iter().sum::<f64>() / k as f64;
        let var = means.iter().map(|m| (m - bm) * (m - bm)).sum::<f64>() / (k - 1) as f64;
        (mean, t975(k - 1) * libm::sqrt(var / k as f64))
    }
}
