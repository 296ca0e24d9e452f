use nalgebra::DMatrix;

use crate::error::{Result, RomError};

/// Whether min-max scaling uses one range per channel or one per feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    ChannelGlobal,
    PerFeature,
}

impl ScalingMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalingMode::ChannelGlobal => "channel",
            ScalingMode::PerFeature => "feature",
        }
    }
}

impl std::str::FromStr for ScalingMode {
    type Err = RomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "channel" => Ok(ScalingMode::ChannelGlobal),
            "feature" => Ok(ScalingMode::PerFeature),
            other => Err(RomError::arg(format!(
                "unknown scaling mode '{other}' (channel or feature)"
            ))),
        }
    }
}

/// Affine map `x -> (x - min) / (max - min)` for one channel. In
/// channel-global mode `min` and `max` hold a single entry. A collapsed range
/// uses a denominator of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingInfo {
    mode: ScalingMode,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl ScalingInfo {
    pub fn from_parts(mode: ScalingMode, min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(RomError::Format(
                "scaling bounds have mismatched lengths".into(),
            ));
        }
        if mode == ScalingMode::ChannelGlobal && min.len() != 1 {
            return Err(RomError::Format(
                "channel-global scaling stores one range".into(),
            ));
        }
        if min.iter().zip(&max).any(|(lo, hi)| !(hi >= lo)) {
            return Err(RomError::Format("scaling max below min".into()));
        }
        Ok(ScalingInfo { mode, min, max })
    }

    pub fn mode(&self) -> ScalingMode {
        self.mode
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Number of features whose training range collapsed to a point.
    pub fn degenerate_count(&self) -> usize {
        self.min
            .iter()
            .zip(&self.max)
            .filter(|(lo, hi)| lo == hi)
            .count()
    }

    #[inline]
    fn range(&self, i: usize) -> (f64, f64) {
        let j = if self.mode == ScalingMode::ChannelGlobal {
            0
        } else {
            i
        };
        let lo = self.min[j];
        let span = self.max[j] - lo;
        (lo, if span == 0.0 { 1.0 } else { span })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.mode == ScalingMode::PerFeature && len != self.min.len() {
            return Err(RomError::arg(format!(
                "state of length {len} does not match {} scaled features",
                self.min.len()
            )));
        }
        Ok(())
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let (lo, span) = self.range(i);
                (v - lo) / span
            })
            .collect())
    }

    pub fn inverse(&self, scaled: &[f64]) -> Result<Vec<f64>> {
        self.check_len(scaled.len())?;
        Ok(scaled
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let (lo, span) = self.range(i);
                s * span + lo
            })
            .collect())
    }
}

/// Fits min-max scaling to the columns of `data` (`N x n`) and returns the
/// scaled copy.
pub fn minmax_fit_transform(
    data: &DMatrix<f64>,
    mode: ScalingMode,
) -> Result<(DMatrix<f64>, ScalingInfo)> {
    if data.is_empty() {
        return Err(RomError::arg("cannot scale an empty matrix"));
    }
    let (min, max) = match mode {
        ScalingMode::ChannelGlobal => (vec![data.min()], vec![data.max()]),
        ScalingMode::PerFeature => {
            let min = data.row_iter().map(|r| r.min()).collect();
            let max = data.row_iter().map(|r| r.max()).collect();
            (min, max)
        }
    };
    let info = ScalingInfo { mode, min, max };
    let mut scaled = data.clone();
    for mut col in scaled.column_iter_mut() {
        for (i, v) in col.iter_mut().enumerate() {
            let (lo, span) = info.range(i);
            *v = (*v - lo) / span;
        }
    }
    Ok((scaled, info))
}

/// Maps scaled values back to the original range.
pub fn minmax_inverse(info: &ScalingInfo, scaled: &[f64]) -> Result<Vec<f64>> {
    info.inverse(scaled)
}
