//! Multipath channel impulse responses and additive white Gaussian noise.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::{CVector, Complex64};

/// Smallest and largest magnitude of a nonzero sparse tap.
pub const SPARSE_TAP_MIN: f64 = 0.2;
pub const SPARSE_TAP_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Dense,
    Sparse,
}

/// Whether random draws are real-valued or circularly-symmetric complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarField {
    #[default]
    Real,
    Complex,
}

/// How a dense channel is scaled after its taps are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerNormalization {
    /// Divide by the realized energy so that `sum |h_i|^2 == 1` exactly.
    #[default]
    Realized,
    /// Divide by the profile sum so that `E sum |h_i|^2 == 1`; per-tap
    /// expectations follow the exponential profile without ratio bias.
    Expected,
}

/// A length-N tap vector together with its kind and (for sparse channels)
/// its support.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelImpulseResponse {
    taps: CVector,
    kind: ChannelKind,
    support: Vec<usize>,
}

impl ChannelImpulseResponse {
    /// Wraps arbitrary taps as a dense response.
    pub fn dense(taps: CVector) -> Result<Self> {
        check_taps(&taps)?;
        Ok(Self {
            taps,
            kind: ChannelKind::Dense,
            support: Vec::new(),
        })
    }

    /// Wraps taps as a sparse response; the support is taken from the
    /// nonzero entries.
    pub fn sparse(taps: CVector) -> Result<Self> {
        check_taps(&taps)?;
        let support = taps
            .iter()
            .enumerate()
            .filter(|(_, t)| **t != Complex64::new(0.0, 0.0))
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            taps,
            kind: ChannelKind::Sparse,
            support,
        })
    }

    pub fn taps(&self) -> &CVector {
        &self.taps
    }

    pub fn into_taps(self) -> CVector {
        self.taps
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// Nonzero indices for sparse responses, empty for dense ones.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

fn check_taps(taps: &CVector) -> Result<()> {
    if taps.is_empty() {
        return Err(Error::InvalidArgument(
            "impulse response needs at least one tap".into(),
        ));
    }
    if taps.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
        return Err(Error::InvalidArgument(
            "impulse response taps must be finite".into(),
        ));
    }
    Ok(())
}

/// Per-channel noise level. Infinite SNR is its own variant rather than a
/// magic number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    Noiseless,
    SnrDb(f64),
}

impl NoiseLevel {
    pub fn is_noiseless(&self) -> bool {
        matches!(self, NoiseLevel::Noiseless)
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        match self {
            NoiseLevel::SnrDb(db) if !db.is_finite() => Err(Error::config(
                &[key],
                format!("SNR must be finite dB or \"noiseless\", got {db}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseLevel::Noiseless => f.write_str("noiseless"),
            NoiseLevel::SnrDb(db) => write!(f, "{db} dB"),
        }
    }
}

// JSON form: a number of dB, or the string "noiseless".
impl Serialize for NoiseLevel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NoiseLevel::Noiseless => s.serialize_str("noiseless"),
            NoiseLevel::SnrDb(db) => s.serialize_f64(*db),
        }
    }
}

impl<'de> Deserialize<'de> for NoiseLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Db(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Db(db) if db.is_finite() => Ok(NoiseLevel::SnrDb(db)),
            Repr::Db(db) => Err(serde::de::Error::custom(format!(
                "SNR must be finite, got {db}"
            ))),
            Repr::Word(w) if w == "noiseless" => Ok(NoiseLevel::Noiseless),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a dB value or \"noiseless\", got {w:?}"
            ))),
        }
    }
}

/// SNR of each link: CH1 (primary to relay), CH2 (primary to cognitive
/// radio, direct path), CH3 (relay to cognitive radio).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub ch1: NoiseLevel,
    pub ch2: NoiseLevel,
    pub ch3: NoiseLevel,
}

impl NoiseSpec {
    pub fn uniform(level: NoiseLevel) -> Self {
        Self {
            ch1: level,
            ch2: level,
            ch3: level,
        }
    }

    pub fn noiseless() -> Self {
        Self::uniform(NoiseLevel::Noiseless)
    }
}

/// Draws a dense channel with real Gaussian taps, tap `i` having expected
/// power proportional to `exp(-decay_rate * i)`, scaled to unit energy.
pub fn generate_dense_channel<R: Rng + ?Sized>(
    n_taps: usize,
    decay_rate: f64,
    rng: &mut R,
) -> Result<ChannelImpulseResponse> {
    generate_dense_channel_with(
        n_taps,
        decay_rate,
        ScalarField::Real,
        PowerNormalization::Realized,
        rng,
    )
}

/// [`generate_dense_channel`] with explicit scalar field and normalization.
pub fn generate_dense_channel_with<R: Rng + ?Sized>(
    n_taps: usize,
    decay_rate: f64,
    field: ScalarField,
    normalization: PowerNormalization,
    rng: &mut R,
) -> Result<ChannelImpulseResponse> {
    if n_taps == 0 {
        return Err(Error::InvalidArgument("n_taps must be positive".into()));
    }
    // Zero decay is accepted and gives a flat profile.
    if !(decay_rate >= 0.0 && decay_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "decay_rate must be finite and non-negative, got {decay_rate}"
        )));
    }
    let profile: Vec<f64> = (0..n_taps)
        .map(|i| (-decay_rate * i as f64).exp())
        .collect();
    let mut taps = CVector::from_iterator(
        n_taps,
        profile
            .iter()
            .map(|&power| gaussian_sample(rng, field).scale(power.sqrt())),
    );
    let energy = match normalization {
        PowerNormalization::Realized => taps.iter().map(|t| t.norm_sqr()).sum::<f64>(),
        PowerNormalization::Expected => profile.iter().sum::<f64>(),
    };
    if energy <= 0.0 {
        return Err(Error::DegenerateInput(
            "dense channel drew zero energy".into(),
        ));
    }
    taps.unscale_mut(energy.sqrt());
    ChannelImpulseResponse::dense(taps)
}

/// Draws a sparse channel with `n_nonzero` taps: `head_count` of them in the
/// first `head_region` positions, the rest spread over the tail. Amplitudes
/// are uniform on `[-1, -0.2] ∪ [0.2, 1]`.
pub fn generate_sparse_channel<R: Rng + ?Sized>(
    n_taps: usize,
    n_nonzero: usize,
    head_region: usize,
    head_count: usize,
    rng: &mut R,
) -> Result<ChannelImpulseResponse> {
    if n_taps == 0 || n_nonzero == 0 {
        return Err(Error::InvalidArgument(
            "n_taps and n_nonzero must be positive".into(),
        ));
    }
    if n_nonzero > n_taps {
        return Err(Error::InvalidArgument(format!(
            "n_nonzero ({n_nonzero}) exceeds n_taps ({n_taps})"
        )));
    }
    if head_region > n_taps {
        return Err(Error::InvalidArgument(format!(
            "head_region ({head_region}) exceeds n_taps ({n_taps})"
        )));
    }
    if head_count > head_region || head_count > n_nonzero {
        return Err(Error::InvalidArgument(format!(
            "head_count ({head_count}) exceeds head_region ({head_region}) or n_nonzero ({n_nonzero})"
        )));
    }
    let tail_count = n_nonzero - head_count;
    if tail_count > n_taps - head_region {
        return Err(Error::InvalidArgument(format!(
            "{tail_count} tail taps do not fit in the {} positions after the head region",
            n_taps - head_region
        )));
    }

    let mut support: Vec<usize> = index::sample(rng, head_region, head_count).into_vec();
    support.extend(
        index::sample(rng, n_taps - head_region, tail_count)
            .into_iter()
            .map(|i| i + head_region),
    );
    support.sort_unstable();

    let magnitude =
        Uniform::new_inclusive(SPARSE_TAP_MIN, SPARSE_TAP_MAX).expect("constant bounds are valid");
    let mut taps = CVector::zeros(n_taps);
    for &i in &support {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        taps[i] = Complex64::new(sign * magnitude.sample(rng), 0.0);
    }
    Ok(ChannelImpulseResponse {
        taps,
        kind: ChannelKind::Sparse,
        support,
    })
}

/// Draws `length` i.i.d. zero-mean Gaussian samples of the given variance.
/// In the complex field the variance is split evenly between the parts.
pub fn sample_awgn<R: Rng + ?Sized>(
    length: usize,
    variance: f64,
    field: ScalarField,
    rng: &mut R,
) -> Result<CVector> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be finite and non-negative, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(CVector::zeros(length));
    }
    let sigma = variance.sqrt();
    Ok(CVector::from_iterator(
        length,
        (0..length).map(|_| gaussian_sample(rng, field).scale(sigma)),
    ))
}

/// Unit-variance Gaussian scalar.
fn gaussian_sample<R: Rng + ?Sized>(rng: &mut R, field: ScalarField) -> Complex64 {
    match field {
        ScalarField::Real => Complex64::new(StandardNormal.sample(rng), 0.0),
        ScalarField::Complex => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im).scale(std::f64::consts::FRAC_1_SQRT_2)
        }
    }
}

/// Mean per-sample power of `signal` divided by `10^(snr_db/10)`.
pub fn snr_to_noise_variance(signal: &CVector, snr_db: f64) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::InvalidArgument("signal is empty".into()));
    }
    let power = mean_power(signal);
    if power == 0.0 {
        return Err(Error::DegenerateInput(
            "cannot reference an SNR to an all-zero signal".into(),
        ));
    }
    Ok(power / 10f64.powf(snr_db / 10.0))
}

pub(crate) fn mean_power(v: &CVector) -> f64 {
    v.iter().map(|s| s.norm_sqr()).sum::<f64>() / v.len() as f64
}

/// Noise variance for `level` against `signal`; zero when noiseless.
pub(crate) fn noise_variance_for(signal: &CVector, level: NoiseLevel) -> Result<f64> {
    match level {
        NoiseLevel::Noiseless => Ok(0.0),
        NoiseLevel::SnrDb(db) => snr_to_noise_variance(signal, db),
    }
}
