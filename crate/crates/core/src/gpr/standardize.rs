use crate::error::{Result, RomError};

/// Per-dimension standard-score statistics of a training input set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Computes column means and population standard deviations. A constant
    /// column records a standard deviation of 1 so it maps to zeros.
    pub fn fit(raw: &[Vec<f64>]) -> Result<Self> {
        let n = raw.len();
        if n == 0 {
            return Err(RomError::arg("no inputs to standardize"));
        }
        let p = raw[0].len();
        if raw.iter().any(|r| r.len() != p) {
            return Err(RomError::arg("inputs have inconsistent dimension"));
        }
        let mut mean = vec![0.0; p];
        for row in raw {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut std = vec![0.0; p];
        for row in raw {
            for j in 0..p {
                let c = row[j] - mean[j];
                std[j] += c * c;
            }
        }
        for (j, s) in std.iter_mut().enumerate() {
            *s = (*s / n as f64).sqrt();
            // Relative threshold: spread at rounding level counts as constant.
            if *s == 0.0 || *s <= 1e-14 * mean[j].abs() {
                *s = 1.0;
            }
        }
        Ok(Standardizer { mean, std })
    }

    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(RomError::arg("mean and std lengths differ"));
        }
        if std.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(RomError::InvalidData(
                "standard deviations must be positive".into(),
            ));
        }
        Ok(Standardizer { mean, std })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(RomError::arg(format!(
                "input of dimension {} (expected {})",
                z.len(),
                self.dim()
            )));
        }
        Ok(z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }
}

/// Standardizes raw inputs, returning the scores and the fitted statistics.
pub fn standardize_inputs(raw: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Standardizer)> {
    let stats = Standardizer::fit(raw)?;
    let z = raw
        .iter()
        .map(|r| stats.transform(r))
        .collect::<Result<Vec<_>>>()?;
    Ok((z, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_column() {
        let (z, s) = standardize_inputs(&[vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(z, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(s.std(), &[1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let (z, s) = standardize_inputs(&[vec![2.0, 0.0], vec![2.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(z.iter().all(|r| r[0] == 0.0));
        assert_eq!(s.std()[0], 1.0);
    }

    #[test]
    fn idempotent_on_standardized_data() {
        let raw = vec![
            vec![0.3, 10.0],
            vec![-1.2, 12.0],
            vec![2.5, 7.0],
            vec![0.1, 9.5],
        ];
        let (z, _) = standardize_inputs(&raw).unwrap();
        let (zz, _) = standardize_inputs(&z).unwrap();
        for (a, b) in z.iter().flatten().zip(zz.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
        for j in 0..2 {
            let mean: f64 = z.iter().map(|r| r[j]).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn transform_checks_dimension() {
        let s = Standardizer::fit(&[vec![1.0, 2.0]]).unwrap();
        assert!(s.transform(&[1.0]).is_err());
    }
}
