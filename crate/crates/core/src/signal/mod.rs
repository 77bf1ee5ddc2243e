//! Driving signals: independent fBm components and an optional time path.

mod fbm;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{ExponentMode, ExponentVector};

pub use fbm::{fbm_cov, fgn_autocov, FbmSampler, CHOLESKY_MAX, EIGEN_TOL};

/// Streams per path: component `j` of path `p` draws from stream
/// `p * STREAMS_PER_PATH + j`.
pub const STREAMS_PER_PATH: u64 = 1024;

/// RNG for component `j` (1-based) of replica `path_index`.
pub fn component_rng(seed: u64, path_index: u64, j: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index * STREAMS_PER_PATH + j as u64);
    rng
}

/// Single fBm path with `n_fine + 1` points on `[0, T]`.
pub fn sample_fbm(h: f64, n_fine: usize, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    let sampler = FbmSampler::new(h, n_fine, horizon)?;
    Ok(sampler.sample_path(&mut ChaCha8Rng::seed_from_u64(seed)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSignalSpec {
    m: usize,
    hurst: ExponentVector,
    #[serde(rename = "T")]
    horizon: f64,
    n_fine: usize,
    seed: u64,
    #[serde(default)]
    component_1_is_time: bool,
    #[serde(default)]
    path_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignalSpec", into = "RawSignalSpec")]
pub struct SignalSpec {
    pub m: usize,
    pub hurst: ExponentVector,
    pub horizon: f64,
    pub n_fine: usize,
    pub seed: u64,
    pub component_1_is_time: bool,
    /// Monte Carlo replica number; selects the RNG substreams.
    pub path_index: u64,
}

impl TryFrom<RawSignalSpec> for SignalSpec {
    type Error = Error;
    fn try_from(r: RawSignalSpec) -> Result<Self> {
        let s = SignalSpec {
            m: r.m,
            hurst: r.hurst,
            horizon: r.horizon,
            n_fine: r.n_fine,
            seed: r.seed,
            component_1_is_time: r.component_1_is_time,
            path_index: r.path_index,
        };
        s.validate()?;
        Ok(s)
    }
}

impl From<SignalSpec> for RawSignalSpec {
    fn from(s: SignalSpec) -> Self {
        RawSignalSpec {
            m: s.m,
            hurst: s.hurst,
            horizon: s.horizon,
            n_fine: s.n_fine,
            seed: s.seed,
            component_1_is_time: s.component_1_is_time,
            path_index: s.path_index,
        }
    }
}

impl SignalSpec {
    pub fn new(hurst: ExponentVector, horizon: f64, n_fine: usize, seed: u64, component_1_is_time: bool) -> Result<Self> {
        let s = SignalSpec {
            m: hurst.m(),
            hurst,
            horizon,
            n_fine,
            seed,
            component_1_is_time,
            path_index: 0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_path(&self, path_index: u64) -> Self {
        SignalSpec {
            path_index,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hurst.mode != ExponentMode::Hurst {
            return Err(Error::Signal("signal exponents must be Hurst parameters".into()));
        }
        if self.hurst.m() != self.m || self.m == 0 {
            return Err(Error::Signal(format!(
                "m = {} but {} Hurst values given",
                self.m,
                self.hurst.m()
            )));
        }
        if self.n_fine == 0 || !self.n_fine.is_power_of_two() {
            return Err(Error::Signal(format!("n_fine = {} is not a power of two", self.n_fine)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Signal(format!("horizon {} must be positive", self.horizon)));
        }
        for j in 1..=self.m {
            let h = self.hurst.value(j);
            let is_time = j == 1 && self.component_1_is_time;
            if is_time && h != 1.0 {
                return Err(Error::Signal(format!("time component must carry exponent 1, got {h}")));
            }
            if !is_time && !(h > 0.5 && h < 1.0) {
                return Err(Error::Signal(format!("component {j}: Hurst {h} outside (1/2, 1)")));
            }
        }
        Ok(())
    }
}

/// `m` sampled components on the grid `t_k = kT/n_fine`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingSignal {
    samples: Vec<Vec<f64>>,
    horizon: f64,
    spec: Option<SignalSpec>,
}

impl DrivingSignal {
    /// A signal from explicit samples; every component must start at 0.
    pub fn from_samples(samples: Vec<Vec<f64>>, horizon: f64) -> Result<Self> {
        let n1 = samples.first().map_or(0, Vec::len);
        if samples.is_empty() || n1 < 2 || samples.iter().any(|c| c.len() != n1) {
            return Err(Error::Signal("components must share a grid of at least 2 points".into()));
        }
        if samples.iter().any(|c| c[0] != 0.0 || c.iter().any(|v| !v.is_finite())) {
            return Err(Error::Signal("components must start at 0 and be finite".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::Signal(format!("horizon {horizon} must be positive")));
        }
        Ok(DrivingSignal {
            samples,
            horizon,
            spec: None,
        })
    }

    /// Sample `f_j(t_k) − f_j(0)` for smooth test paths.
    pub fn from_fn(m: usize, n_fine: usize, horizon: f64, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let samples = (1..=m)
            .map(|j| {
                let f0 = f(j, 0.0);
                (0..=n_fine)
                    .map(|k| f(j, horizon * k as f64 / n_fine as f64) - f0)
                    .collect()
            })
            .collect();
        Self::from_samples(samples, horizon)
    }

    pub fn spec(&self) -> Option<&SignalSpec> {
        self.spec.as_ref()
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn n_fine(&self) -> usize {
        self.samples[0].len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_fine() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.n_fine() as f64
    }

    /// Component `j` (1-based).
    pub fn component(&self, j: usize) -> &[f64] {
        &self.samples[j - 1]
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    /// `x^j_{t_b} − x^j_{t_a}` on fine indices.
    pub fn increment(&self, j: usize, a: usize, b: usize) -> f64 {
        self.samples[j - 1][b] - self.samples[j - 1][a]
    }

    /// Write header and column-major `f64` data.
    ///
    /// Layout: the bytes `RTPATH1\n`, a little-endian `u64` header length,
    /// the JSON header, then `m · (n_fine + 1)` little-endian `f64` values,
    /// component after component.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let header = PathHeader {
            spec: self.spec.clone(),
            horizon: self.horizon,
            rows: self.n_fine() + 1,
            cols: self.m(),
            dtype: "f64le".into(),
            order: "column-major".into(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(MAGIC)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        for c in &self.samples {
            for v in c {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Signal("not a path file".into()));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len) as usize;
        if len > 1 << 20 {
            return Err(Error::Signal(format!("path header of {len} bytes is implausible")));
        }
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let header: PathHeader = serde_json::from_slice(&json)?;
        if header.dtype != "f64le" || header.order != "column-major" {
            return Err(Error::Signal(format!("unsupported layout {}/{}", header.dtype, header.order)));
        }
        let mut samples = vec![vec![0.0; header.rows]; header.cols];
        let mut buf = [0u8; 8];
        for c in samples.iter_mut() {
            for v in c.iter_mut() {
                r.read_exact(&mut buf)?;
                *v = f64::from_le_bytes(buf);
            }
        }
        let mut sig = DrivingSignal::from_samples(samples, header.horizon)?;
        sig.spec = header.spec;
        Ok(sig)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

const MAGIC: &[u8; 8] = b"RTPATH1\n";

#[derive(Debug, Serialize, Deserialize)]
struct PathHeader {
    spec: Option<SignalSpec>,
    horizon: f64,
    rows: usize,
    cols: usize,
    dtype: String,
    order: String,
}

/// Builds many replicas of one [`SignalSpec`], sharing sampler set-up.
pub struct SignalGenerator {
    spec: SignalSpec,
    samplers: HashMap<u64, FbmSampler>,
}

impl SignalGenerator {
    pub fn new(spec: &SignalSpec) -> Result<Self> {
        spec.validate()?;
        let mut samplers = HashMap::new();
        for j in 1..=spec.m {
            if j == 1 && spec.component_1_is_time {
                continue;
            }
            let h = spec.hurst.value(j);
            if let std::collections::hash_map::Entry::Vacant(e) = samplers.entry(h.to_bits()) {
                e.insert(FbmSampler::new(h, spec.n_fine, spec.horizon)?);
            }
        }
        Ok(SignalGenerator {
            spec: spec.clone(),
            samplers,
        })
    }

    pub fn spec(&self) -> &SignalSpec {
        &self.spec
    }

    pub fn generate(&self, path_index: u64) -> DrivingSignal {
        let s = &self.spec;
        let n = s.n_fine;
        let samples = (1..=s.m)
            .map(|j| {
                if j == 1 && s.component_1_is_time {
                    (0..=n).map(|k| s.horizon * k as f64 / n as f64).collect()
                } else {
                    let sampler = &self.samplers[&s.hurst.value(j).to_bits()];
                    sampler.sample_path(&mut component_rng(s.seed, path_index, j))
                }
            })
            .collect();
        DrivingSignal {
            samples,
            horizon: s.horizon,
            spec: Some(s.with_path(path_index)),
        }
    }
}

/// All components of one replica, reproducible from `(seed, path_index)`.
pub fn build_signal(spec: &SignalSpec) -> Result<DrivingSignal> {
    Ok(SignalGenerator::new(spec)?.generate(spec.path_index))
}

/// Discrete Hölder seminorm `sup |z_v − z_u| / (v − u)^β` over coarse grid
/// pairs `a ≤ u < v ≤ b`. A lower bound for the continuous seminorm.
pub fn holder_seminorm(
    signal: &DrivingSignal,
    j: usize,
    beta: f64,
    a: f64,
    b: f64,
    coarse_n: usize,
) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent {beta} outside (0, 1]")));
    }
    if j == 0 || j > signal.m() {
        return Err(Error::InvalidArgument(format!("component {j} outside 1..={}", signal.m())));
    }
    let n = signal.n_fine();
    if coarse_n == 0 || n % coarse_n != 0 {
        return Err(Error::InvalidArgument(format!("coarse_n {coarse_n} must divide n_fine {n}")));
    }
    let h = signal.horizon() / coarse_n as f64;
    let to_index = |t: f64| -> Result<usize> {
        let k = (t / h).round();
        if (k * h - t).abs() > 1e-9 * signal.horizon() || k < 0.0 || k as usize > coarse_n {
            return Err(Error::InvalidArgument(format!("{t} is not a coarse grid point")));
        }
        Ok(k as usize)
    };
    let (ka, kb) = (to_index(a)?, to_index(b)?);
    if ka >= kb {
        return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
    }
    let stride = n / coarse_n;
    let z = signal.component(j);
    let mut best: f64 = 0.0;
    for u in ka..kb {
        for v in u + 1..=kb {
            let num = (z[v * stride] - z[u * stride]).abs();
            best = best.max(num / (h * (v - u) as f64).powf(beta));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(h: Vec<f64>, time: bool) -> SignalSpec {
        SignalSpec::new(ExponentVector::hurst(h).unwrap(), 1.0, 256, 42, time).unwrap()
    }

    #[test]
    fn time_component_is_a_line() {
        let s = build_signal(&spec(vec![1.0], true)).unwrap();
        for k in 0..=256 {
            assert_eq!(s.component(1)[k], k as f64 / 256.0);
        }
        assert_eq!(holder_seminorm(&s, 1, 1.0, 0.0, 1.0, 64).unwrap(), 1.0);
        assert!((holder_seminorm(&s, 1, 0.7, 0.0, 1.0, 64).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_distinct_streams() {
        let sp = spec(vec![1.0, 0.7, 0.7], true);
        let a = build_signal(&sp).unwrap();
        let b = build_signal(&sp).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.component(2), a.component(3));
        let c = build_signal(&sp.with_path(1)).unwrap();
        assert_ne!(a.component(2), c.component(2));
    }

    #[test]
    fn spec_validation() {
        let h = ExponentVector::hurst(vec![0.7]).unwrap();
        assert!(SignalSpec::new(h.clone(), 1.0, 100, 1, false).is_err());
        assert!(SignalSpec::new(h, 1.0, 128, 1, true).is_err());
        let bad = r#"{"m":1,"hurst":{"mode":"hurst","values":[1.2]},"T":1.0,"n_fine":64,"seed":1}"#;
        assert!(serde_json::from_str::<SignalSpec>(bad).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let s = build_signal(&spec(vec![1.0, 0.7], true)).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = DrivingSignal::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert!(DrivingSignal::read_from(&mut &b"garbage!garbage!"[..]).is_err());
    }
}
