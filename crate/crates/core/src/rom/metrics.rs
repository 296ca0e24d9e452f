use crate::error::{Result, RomError};

/// `||x - x_tilde||^2 / ||x||^2`.
pub fn rom_error(x: &[f64], x_tilde: &[f64]) -> Result<f64> {
    if x.len() != x_tilde.len() {
        return Err(RomError::arg(format!(
            "reference of length {} vs approximation of length {}",
            x.len(),
            x_tilde.len()
        )));
    }
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(RomError::InvalidData(
            "reference state has zero norm".into(),
        ));
    }
    let diff2: f64 = x.iter().zip(x_tilde).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(diff2 / norm2)
}

/// Same squared relative error, applied to a projected state.
pub fn projection_error(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    rom_error(x, x_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(rom_error(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(rom_error(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((rom_error(&[3.0, 4.0], &[3.0, 0.0]).unwrap() - 0.64).abs() < 1e-15);
        assert!(rom_error(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(projection_error(&[1.0], &[1.0, 2.0]).is_err());
    }
}
