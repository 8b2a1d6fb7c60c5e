//! Training signals, Toeplitz convolution operators and the
//! primary → relay → cognitive-radio forward link.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::channel_model::{
    noise_variance_for, sample_awgn, ChannelImpulseResponse, NoiseLevel, NoiseSpec, ScalarField,
};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingScheme {
    /// `1, 2, ..., M`, scaled to unit mean power.
    Ramp,
    /// i.i.d. ±1 symbols.
    Bpsk,
    /// Caller-provided samples.
    Custom,
}

/// Known training burst `x(0..M)` sent by the primary transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSignal {
    samples: CVector,
    scheme: TrainingScheme,
}

impl TrainingSignal {
    pub fn custom(samples: CVector) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("training signal is empty".into()));
        }
        if samples
            .iter()
            .any(|s| !s.re.is_finite() || !s.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "training samples must be finite".into(),
            ));
        }
        if samples.iter().all(|s| s.norm_sqr() == 0.0) {
            return Err(Error::InvalidArgument(
                "training signal is identically zero".into(),
            ));
        }
        Ok(Self {
            samples,
            scheme: TrainingScheme::Custom,
        })
    }

    pub fn samples(&self) -> &CVector {
        &self.samples
    }

    pub fn scheme(&self) -> TrainingScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Builds a ramp or BPSK training burst. BPSK draws from `rng`, which is
/// then required; `Custom` goes through [`TrainingSignal::custom`].
pub fn make_training_signal(
    length: usize,
    scheme: TrainingScheme,
    rng: Option<&mut dyn RngCore>,
) -> Result<TrainingSignal> {
    if length == 0 {
        return Err(Error::InvalidArgument(
            "training length must be positive".into(),
        ));
    }
    let samples = match scheme {
        TrainingScheme::Ramp => {
            let ramp: Vec<f64> = (1..=length).map(|k| k as f64).collect();
            let power = ramp.iter().map(|v| v * v).sum::<f64>() / length as f64;
            let scale = power.sqrt();
            CVector::from_iterator(length, ramp.iter().map(|v| Complex64::new(v / scale, 0.0)))
        }
        TrainingScheme::Bpsk => {
            let rng = rng.ok_or_else(|| {
                Error::InvalidArgument("bpsk training needs a random stream".into())
            })?;
            CVector::from_iterator(
                length,
                (0..length)
                    .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)),
            )
        }
        TrainingScheme::Custom => {
            return Err(Error::InvalidArgument(
                "custom training signals are built with TrainingSignal::custom".into(),
            ))
        }
    };
    Ok(TrainingSignal { samples, scheme })
}

/// Row layout of a convolution matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMode {
    /// As many rows as the generator has samples.
    Truncated,
    /// `generator length + n_cols - 1` rows: the whole linear convolution.
    #[default]
    Full,
}

/// Modes of the training matrix `X` and the relay-channel matrix `H3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixModes {
    pub x: MatrixMode,
    pub h3: MatrixMode,
}

impl MatrixModes {
    /// Length of the relay observation `y` for training length `m` and `n` taps.
    pub fn relay_len(&self, m: usize, n: usize) -> usize {
        match self.x {
            MatrixMode::Truncated => m,
            MatrixMode::Full => m + n - 1,
        }
    }

    /// Length of the cognitive observation `z`.
    pub fn cognitive_len(&self, m: usize, n: usize) -> usize {
        let y = self.relay_len(m, n);
        match self.h3 {
            MatrixMode::Truncated => n,
            MatrixMode::Full => y + n - 1,
        }
    }
}

/// Toeplitz operator with entry `(i, j) = g(i - j)`, `g(k) = 0` outside the
/// generator. Applying it to `v` is the linear convolution `g * v`, keeping
/// the first `rows()` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionMatrix {
    generator: CVector,
    n_cols: usize,
    mode: MatrixMode,
}

pub fn build_convolution_matrix(
    generator: &CVector,
    n_cols: usize,
    mode: MatrixMode,
) -> Result<ConvolutionMatrix> {
    ConvolutionMatrix::new(generator.clone(), n_cols, mode)
}

impl ConvolutionMatrix {
    pub fn new(generator: CVector, n_cols: usize, mode: MatrixMode) -> Result<Self> {
        if generator.is_empty() {
            return Err(Error::InvalidArgument("generator is empty".into()));
        }
        if n_cols == 0 {
            return Err(Error::InvalidArgument("n_cols must be positive".into()));
        }
        Ok(Self {
            generator,
            n_cols,
            mode,
        })
    }

    pub fn generator(&self) -> &CVector {
        &self.generator
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    pub fn rows(&self) -> usize {
        match self.mode {
            MatrixMode::Truncated => self.generator.len(),
            MatrixMode::Full => self.generator.len() + self.n_cols - 1,
        }
    }

    pub fn cols(&self) -> usize {
        self.n_cols
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i >= j && i - j < self.generator.len() {
            self.generator[i - j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_fn(self.rows(), self.n_cols, |i, j| self.entry(i, j))
    }

    /// Matrix-vector product computed as a direct convolution.
    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.n_cols {
            return Err(Error::InvalidArgument(format!(
                "operand has {} entries, matrix has {} columns",
                v.len(),
                self.n_cols
            )));
        }
        let rows = self.rows();
        let mut out = CVector::zeros(rows);
        for (j, &vj) in v.iter().enumerate() {
            for (k, &g) in self.generator.iter().enumerate() {
                let i = j + k;
                if i >= rows {
                    break;
                }
                out[i] += g * vj;
            }
        }
        Ok(out)
    }

    /// Product with the conjugate transpose.
    pub fn adjoint_apply(&self, u: &CVector) -> Result<CVector> {
        let rows = self.rows();
        if u.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "operand has {} entries, matrix has {rows} rows",
                u.len()
            )));
        }
        Ok(CVector::from_fn(self.n_cols, |j, _| {
            self.generator
                .iter()
                .enumerate()
                .take_while(|(k, _)| j + k < rows)
                .map(|(k, g)| g.conj() * u[j + k])
                .sum()
        }))
    }

    /// `Aᴴ A`. In full mode this is the Hermitian Toeplitz matrix of the
    /// generator's autocorrelation.
    pub fn gram(&self) -> CMatrix {
        match self.mode {
            MatrixMode::Full => {
                let g = &self.generator;
                let len = g.len();
                // r[d] = sum_m conj(g[m]) g[m + d]
                let lags: Vec<Complex64> = (0..len.min(self.n_cols))
                    .map(|d| (0..len - d).map(|m| g[m].conj() * g[m + d]).sum())
                    .collect();
                CMatrix::from_fn(self.n_cols, self.n_cols, |j, k| {
                    let (d, conj) = if j >= k {
                        (j - k, false)
                    } else {
                        (k - j, true)
                    };
                    match lags.get(d) {
                        Some(r) if conj => r.conj(),
                        Some(r) => *r,
                        None => Complex64::new(0.0, 0.0),
                    }
                })
            }
            MatrixMode::Truncated => {
                let a = self.to_dense();
                a.adjoint() * a
            }
        }
    }
}

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn convolve(a: &CVector, b: &CVector) -> CVector {
    if a.is_empty() || b.is_empty() {
        return CVector::zeros(0);
    }
    let mut out = CVector::zeros(a.len() + b.len() - 1);
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Link parameters shared by every trial of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSetup {
    pub noise: NoiseSpec,
    pub relay_gain: f64,
    pub modes: MatrixModes,
    pub field: ScalarField,
}

impl Default for LinkSetup {
    fn default() -> Self {
        Self {
            noise: NoiseSpec::noiseless(),
            relay_gain: 1.0,
            modes: MatrixModes::default(),
            field: ScalarField::Real,
        }
    }
}

/// Everything the relay and the cognitive radio receive in one burst.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkObservation {
    /// Relay input `y = X h1 + n1`.
    pub y: CVector,
    /// Cognitive-radio input `z = H3 (g y) + n3`.
    pub z: CVector,
    /// Direct primary → cognitive path `x * h2 + n2`; never used for estimation.
    pub direct: Option<CVector>,
    pub n1: CVector,
    pub n2: Option<CVector>,
    pub n3: CVector,
    pub relay_gain: f64,
}

/// Runs the forward chain. Noise draws happen in the order n1, n3, n2, each
/// referenced to the power of the noiseless signal it is added to.
pub fn simulate_link<R: Rng + ?Sized>(
    x: &TrainingSignal,
    h1: &ChannelImpulseResponse,
    h2: Option<&ChannelImpulseResponse>,
    h3: &ChannelImpulseResponse,
    setup: &LinkSetup,
    rng: &mut R,
) -> Result<LinkObservation> {
    let n = h1.len();
    if h3.len() != n {
        return Err(Error::InvalidArgument(format!(
            "h1 has {n} taps but h3 has {}",
            h3.len()
        )));
    }
    if let Some(h2) = h2 {
        if h2.len() != n {
            return Err(Error::InvalidArgument(format!(
                "h1 has {n} taps but h2 has {}",
                h2.len()
            )));
        }
    }
    let gain = setup.relay_gain;
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "relay gain must be positive and finite, got {gain}"
        )));
    }

    let xmat = ConvolutionMatrix::new(x.samples().clone(), n, setup.modes.x)?;
    let clean_y = xmat.apply(h1.taps())?;
    let (y, n1) = add_noise(clean_y, setup.noise.ch1, setup.field, rng)?;

    let h3mat = ConvolutionMatrix::new(h3.taps().clone(), y.len(), setup.modes.h3)?;
    let clean_z = h3mat.apply(&y.scale(gain))?;
    let (z, n3) = add_noise(clean_z, setup.noise.ch3, setup.field, rng)?;

    let (direct, n2) = match h2 {
        Some(h2) => {
            let clean = xmat.apply(h2.taps())?;
            let (d, n2) = add_noise(clean, setup.noise.ch2, setup.field, rng)?;
            (Some(d), Some(n2))
        }
        None => (None, None),
    };

    Ok(LinkObservation {
        y,
        z,
        direct,
        n1,
        n2,
        n3,
        relay_gain: gain,
    })
}

/// What the cognitive radio receives back when it sounds the relay channel
/// with `probe`: the full convolution with `h3` plus AWGN.
pub fn simulate_probe<R: Rng + ?Sized>(
    probe: &TrainingSignal,
    h3: &ChannelImpulseResponse,
    level: NoiseLevel,
    field: ScalarField,
    rng: &mut R,
) -> Result<CVector> {
    let clean = convolve(probe.samples(), h3.taps());
    Ok(add_noise(clean, level, field, rng)?.0)
}

fn add_noise<R: Rng + ?Sized>(
    clean: CVector,
    level: NoiseLevel,
    field: ScalarField,
    rng: &mut R,
) -> Result<(CVector, CVector)> {
    let variance = noise_variance_for(&clean, level)?;
    let noise = sample_awgn(clean.len(), variance, field, rng)?;
    Ok((clean + &noise, noise))
}
