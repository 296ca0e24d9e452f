use crate::error::{Result, RomError};

/// Covariance family of a stationary isotropic kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Matern,
    Rbf,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Matern => "matern",
            KernelFamily::Rbf => "rbf",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = RomError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matern" => Ok(KernelFamily::Matern),
            "rbf" => Ok(KernelFamily::Rbf),
            other => Err(RomError::arg(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// Kernel family, length scale and (Matérn only) smoothness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    length_scale: f64,
    nu: f64,
}

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT5: f64 = 2.236_067_977_499_79;

fn check_nu(nu: f64) -> Result<()> {
    if nu == 0.5 || nu == 1.5 || nu == 2.5 {
        Ok(())
    } else {
        Err(RomError::arg(format!(
            "Matérn smoothness {nu} unsupported (use 0.5, 1.5 or 2.5)"
        )))
    }
}

fn check_length(l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(RomError::arg(format!(
            "length scale must be positive, got {l}"
        )))
    }
}

impl KernelSpec {
    pub fn matern(length_scale: f64, nu: f64) -> Result<Self> {
        check_length(length_scale)?;
        check_nu(nu)?;
        Ok(KernelSpec {
            family: KernelFamily::Matern,
            length_scale,
            nu,
        })
    }

    pub fn rbf(length_scale: f64) -> Result<Self> {
        check_length(length_scale)?;
        Ok(KernelSpec {
            family: KernelFamily::Rbf,
            length_scale,
            nu: f64::INFINITY,
        })
    }

    pub fn new(family: KernelFamily, length_scale: f64, nu: f64) -> Result<Self> {
        match family {
            KernelFamily::Matern => Self::matern(length_scale, nu),
            KernelFamily::Rbf => Self::rbf(length_scale),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// Matérn smoothness; infinite for the RBF kernel.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn with_length_scale(&self, length_scale: f64) -> Result<Self> {
        check_length(length_scale)?;
        Ok(KernelSpec {
            length_scale,
            ..*self
        })
    }

    /// Covariance at Euclidean distance `d`.
    pub fn eval(&self, d: f64) -> f64 {
        let r = d / self.length_scale;
        match self.family {
            KernelFamily::Rbf => (-0.5 * r * r).exp(),
            KernelFamily::Matern => matern_unit(r, self.nu),
        }
    }

    /// Derivative of the covariance with respect to `ln l` at distance `d`.
    pub fn dlog_length(&self, d: f64) -> f64 {
        let r = d / self.length_scale;
        match self.family {
            KernelFamily::Rbf => r * r * (-0.5 * r * r).exp(),
            KernelFamily::Matern => {
                if self.nu == 0.5 {
                    r * (-r).exp()
                } else if self.nu == 1.5 {
                    3.0 * r * r * (-SQRT3 * r).exp()
                } else {
                    (5.0 / 3.0) * r * r * (1.0 + SQRT5 * r) * (-SQRT5 * r).exp()
                }
            }
        }
    }
}

fn matern_unit(r: f64, nu: f64) -> f64 {
    if nu == 0.5 {
        (-r).exp()
    } else if nu == 1.5 {
        (1.0 + SQRT3 * r) * (-SQRT3 * r).exp()
    } else {
        (1.0 + SQRT5 * r + 5.0 * r * r / 3.0) * (-SQRT5 * r).exp()
    }
}

/// Half-integer Matérn covariance at distance `d`.
pub fn matern_kernel(d: f64, length_scale: f64, nu: f64) -> Result<f64> {
    if d < 0.0 || !d.is_finite() {
        return Err(RomError::arg(format!(
            "distance must be finite and >= 0, got {d}"
        )));
    }
    Ok(KernelSpec::matern(length_scale, nu)?.eval(d))
}

/// Squared-exponential covariance `exp(-d^2 / (2 l^2))`.
pub fn rbf_kernel(d: f64, length_scale: f64) -> Result<f64> {
    if !d.is_finite() {
        return Err(RomError::arg("distance must be finite"));
    }
    Ok(KernelSpec::rbf(length_scale)?.eval(d))
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
