//! Complex Gaussian MIMO transmission model: channel and signal sampling,
//! the regularized least-squares objective, and the channel file format.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// System dimensions and noise level shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Transmit dimension n.
    pub n: usize,
    /// Receive dimension m.
    pub m: usize,
    /// Noise variance.
    pub sigma2: f64,
    /// RNG seed.
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(n: usize, m: usize, sigma2: f64, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidConfig(format!(
                "dimensions must be positive (n={n}, m={m})"
            )));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise variance must be positive (sigma2={sigma2})"
            )));
        }
        Ok(Self { n, m, sigma2, seed })
    }
}

/// An m x n complex channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
}

impl ChannelMatrix {
    /// Wraps an explicit matrix, rejecting non-finite or all-zero input.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::ChannelParse("non-finite channel entry".into()));
        }
        if entries.iter().all(|z| *z == Complex64::ZERO) {
            return Err(Error::ChannelParse("all-zero channel matrix".into()));
        }
        Ok(Self { entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// H^H H, the n x n Gram matrix.
    pub fn gram(&self) -> DMatrix<Complex64> {
        self.entries.adjoint() * &self.entries
    }

    /// H^H y, the matched-filter output.
    pub fn matched_filter(&self, y: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        check_len("received vector", self.rows(), y.len())?;
        Ok(self.entries.adjoint() * y)
    }

    /// Serializes to the channel file format: a header line `m n`, then
    /// row-major entries as `re im` pairs with 17 fractional digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.rows(), self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.entries[(i, j)];
                let _ = writeln!(out, "{:.17e} {:.17e}", z.re, z.im);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let m: usize = tokens
            .next()
            .ok_or_else(|| Error::ChannelParse("empty channel file".into()))?
            .parse()
            .map_err(|e| Error::ChannelParse(format!("bad row count: {e}")))?;
        let n: usize = tokens
            .next()
            .ok_or_else(|| Error::ChannelParse("missing column count".into()))?
            .parse()
            .map_err(|e| Error::ChannelParse(format!("bad column count: {e}")))?;
        let mut entries = DMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let re: f64 = tokens
                    .next()
                    .ok_or_else(|| Error::ChannelParse(format!("truncated at entry ({i},{j})")))?
                    .parse()
                    .map_err(|e| Error::ChannelParse(format!("bad real part ({i},{j}): {e}")))?;
                let im: f64 = tokens
                    .next()
                    .ok_or_else(|| Error::ChannelParse(format!("truncated at entry ({i},{j})")))?
                    .parse()
                    .map_err(|e| Error::ChannelParse(format!("bad imag part ({i},{j}): {e}")))?;
                entries[(i, j)] = Complex64::new(re, im);
            }
        }
        if tokens.next().is_some() {
            return Err(Error::ChannelParse("trailing data after entries".into()));
        }
        ChannelMatrix::new(entries)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    /// SHA-256 of the canonical text serialization, for provenance headers.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_text().as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

/// One realization of the linear model y = Hs + w.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSample {
    pub s: DVector<Complex64>,
    pub w: DVector<Complex64>,
    pub y: DVector<Complex64>,
}

/// Deterministic per-purpose RNG stream derived from (seed, stream index).
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_standard_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    // Circularly symmetric: real and imaginary parts each carry half the variance.
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

/// Draws an m x n channel with i.i.d. CN(0,1) entries, resampling the
/// measure-zero all-zero outcome.
pub fn sample_channel<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ChannelMatrix {
    loop {
        let entries = DMatrix::from_fn(cfg.m, cfg.n, |_, _| complex_standard_normal(rng, 1.0));
        if let Ok(h) = ChannelMatrix::new(entries) {
            return h;
        }
    }
}

/// Draws s ~ CN(0, I_n), w ~ CN(0, sigma^2 I_m) and forms y = Hs + w.
pub fn sample_transmission<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<TransmissionSample> {
    check_len("channel rows", cfg.m, h.rows())?;
    check_len("channel cols", cfg.n, h.cols())?;
    let s = DVector::from_fn(cfg.n, |_, _| complex_standard_normal(rng, 1.0));
    let w = DVector::from_fn(cfg.m, |_, _| complex_standard_normal(rng, cfg.sigma2));
    let y = h.matrix() * &s + &w;
    Ok(TransmissionSample { s, w, y })
}

/// The detection objective ||y - Hx||^2 + eta ||x||^2.
pub fn objective_value(
    h: &ChannelMatrix,
    y: &DVector<Complex64>,
    eta: f64,
    x: &DVector<Complex64>,
) -> Result<f64> {
    check_len("received vector", h.rows(), y.len())?;
    check_len("estimate vector", h.cols(), x.len())?;
    if !(eta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "regularization parameter must be positive (eta={eta})"
        )));
    }
    let residual = y - h.matrix() * x;
    Ok(residual.norm_squared() + eta * x.norm_squared())
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}
