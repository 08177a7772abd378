//! Level-limited wavelet packet decomposition with frequency-ordered leaves.
//!
//! The full packet tree is built with an orthonormal filter pair and
//! periodic boundary extension, so the transform is orthogonal and energy is
//! preserved exactly (up to rounding). Leaves are emitted in frequency
//! (sequency) order: leaf `b` covers `[b, b+1) * fs / 2^(level+1)` Hz. The
//! natural (Paley) tree order interleaves bands because the high-pass branch
//! mirrors the spectrum after decimation; the frequency-ordered leaf `b`
//! is the natural leaf `b ^ (b >> 1)` (binary-reflected Gray code).

use super::FeatureError;

/// Orthonormal wavelet filter family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wavelet {
    /// 2-tap Haar.
    Haar,
    /// 4-tap Daubechies (two vanishing moments).
    Db4,
    /// 8-tap Daubechies (four vanishing moments).
    Db8,
}

impl Wavelet {
    /// Lowpass (scaling) decomposition filter, sum = sqrt(2).
    pub fn lowpass(self) -> Vec<f64> {
        match self {
            Wavelet::Haar => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![s, s]
            }
            Wavelet::Db4 => {
                let s3 = 3.0_f64.sqrt();
                let norm = 4.0 * std::f64::consts::SQRT_2;
                vec![
                    (1.0 + s3) / norm,
                    (3.0 + s3) / norm,
                    (3.0 - s3) / norm,
                    (1.0 - s3) / norm,
                ]
            }
            Wavelet::Db8 => vec![
                0.230_377_813_308_855_23,
                0.714_846_570_552_541_5,
                0.630_880_767_929_590_4,
                -0.027_983_769_416_983_85,
                -0.187_034_811_718_881_14,
                0.030_841_381_835_986_965,
                0.032_883_011_666_982_945,
                -0.010_597_401_784_997_278,
            ],
        }
    }

    /// Quadrature-mirror highpass filter: `g[k] = (-1)^k h[taps-1-k]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let taps = h.len();
        (0..taps)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * h[taps - 1 - k]
            })
            .collect()
    }

    pub fn taps(self) -> usize {
        match self {
            Wavelet::Haar => 2,
            Wavelet::Db4 => 4,
            Wavelet::Db8 => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Wavelet::Haar => "haar",
            Wavelet::Db4 => "db4",
            Wavelet::Db8 => "db8",
        }
    }
}

impl std::str::FromStr for Wavelet {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, FeatureError> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db2" => Ok(Wavelet::Haar),
            "db4" | "d4" => Ok(Wavelet::Db4),
            "db8" | "d8" => Ok(Wavelet::Db8),
            other => Err(FeatureError::BadConfig(format!(
                "unknown wavelet {other:?} (expected haar, db4 or db8)"
            ))),
        }
    }
}

/// Wavelet-packet configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct WpdConfig {
    /// Tree depth; the signal splits into 2^level equal-width bands.
    pub level: usize,
    pub wavelet: Wavelet,
    /// Only leaves whose band lies inside `[low, high]` Hz become features.
    pub keep_band_hz: (f64, f64),
    /// Emit leaves in frequency order (sequency); natural order otherwise.
    pub frequency_ordered: bool,
}

impl Default for WpdConfig {
    fn default() -> Self {
        Self {
            level: 3,
            wavelet: Wavelet::Db4,
            keep_band_hz: (0.0, 60.0),
            frequency_ordered: true,
        }
    }
}

impl WpdConfig {
    pub fn validate(&self, sample_rate_hz: f64) -> Result<(), FeatureError> {
        if self.level == 0 {
            return Err(FeatureError::BadConfig("level must be >= 1".into()));
        }
        if self.level > 20 {
            return Err(FeatureError::BadConfig("level unreasonably large".into()));
        }
        let nyquist = sample_rate_hz / 2.0;
        let (low, high) = self.keep_band_hz;
        if !(low.is_finite() && high.is_finite()) || low < 0.0 || low >= high || high > nyquist + 1e-9
        {
            return Err(FeatureError::BadConfig(format!(
                "keep band [{low}, {high}] must satisfy 0 <= low < high <= Nyquist ({nyquist})"
            )));
        }
        Ok(())
    }
}

/// One full decomposition: `2^level` leaf coefficient arrays.
#[derive(Debug, Clone)]
pub struct WpdLeaves {
    /// Leaf coefficient arrays, frequency-ordered when requested.
    pub leaves: Vec<Vec<f64>>,
    /// Zeros appended to reach a multiple of 2^level.
    pub pad_len: usize,
    pub sample_rate_hz: f64,
    pub level: usize,
    pub frequency_ordered: bool,
}

impl WpdLeaves {
    /// Frequency band `[low, high)` in Hz covered by leaf `index`.
    pub fn band_hz(&self, index: usize) -> (f64, f64) {
        let width = self.sample_rate_hz / (1u64 << (self.level + 1)) as f64;
        (index as f64 * width, (index + 1) as f64 * width)
    }
}

/// One analysis split with periodic extension:
/// `a[k] = sum_t h[t] x[(2k+t) mod n]`, `d[k] = sum_t g[t] x[(2k+t) mod n]`.
fn split(node: &[f64], lowpass: &[f64], highpass: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = node.len();
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (t, (&h, &g)) in lowpass.iter().zip(highpass).enumerate() {
            let x = node[(2 * k + t) % n];
            a += h * x;
            d += g * x;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

/// Full wavelet packet decomposition of one window.
///
/// The window is zero-padded to the next multiple of `2^level` (the pad
/// length is recorded in the output). Every tree node must stay at least as
/// long as the filter, otherwise the periodization is no longer orthogonal.
pub fn wpd_decompose(
    window: &[f64],
    sample_rate_hz: f64,
    cfg: &WpdConfig,
) -> Result<WpdLeaves, FeatureError> {
    cfg.validate(sample_rate_hz)?;
    let block = 1usize << cfg.level;
    if window.is_empty() {
        return Err(FeatureError::WindowTooShort {
            len: 0,
            required: cfg.wavelet.taps() * (block / 2),
        });
    }
    let padded_len = window.len().div_ceil(block) * block;
    // The deepest split operates on nodes of padded_len / 2^(level-1).
    let required = cfg.wavelet.taps() * (block / 2);
    if padded_len < required {
        return Err(FeatureError::WindowTooShort {
            len: window.len(),
            required,
        });
    }
    let pad_len = padded_len - window.len();
    let mut padded = window.to_vec();
    padded.resize(padded_len, 0.0);

    let lowpass = cfg.wavelet.lowpass();
    let highpass = cfg.wavelet.highpass();
    let mut nodes = vec![padded];
    for _ in 0..cfg.level {
        let mut next = Vec::with_capacity(nodes.len() * 2);
        for node in &nodes {
            let (approx, detail) = split(node, &lowpass, &highpass);
            next.push(approx);
            next.push(detail);
        }
        nodes = next;
    }

    let leaves = if cfg.frequency_ordered {
        // Frequency-ordered leaf b is natural leaf gray(b) = b ^ (b >> 1).
        (0..nodes.len())
            .map(|b| std::mem::take(&mut nodes[b ^ (b >> 1)]))
            .collect()
    } else {
        nodes
    };

    Ok(WpdLeaves {
        leaves,
        pad_len,
        sample_rate_hz,
        level: cfg.level,
        frequency_ordered: cfg.frequency_ordered,
    })
}

/// Population variance.
pub fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64
}

/// Variance features of the leaves whose band lies inside the keep band,
/// lowest band first.
pub fn band_variance_features(leaves: &WpdLeaves, cfg: &WpdConfig) -> Result<Vec<f64>, FeatureError> {
    if !leaves.frequency_ordered {
        return Err(FeatureError::BadConfig(
            "band selection needs frequency-ordered leaves".into(),
        ));
    }
    let (low, high) = cfg.keep_band_hz;
    let mut features = Vec::new();
    for (index, leaf) in leaves.leaves.iter().enumerate() {
        let (band_low, band_high) = leaves.band_hz(index);
        if band_low >= low - 1e-9 && band_high <= high + 1e-9 {
            features.push(population_variance(leaf));
        }
    }
    if features.is_empty() {
        return Err(FeatureError::BadConfig(format!(
            "keep band [{low}, {high}] Hz selects no leaves"
        )));
    }
    Ok(features)
}
