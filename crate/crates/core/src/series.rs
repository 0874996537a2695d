//! Regularly sampled series and their on-disk formats.
//!
//! Sample `i` sits at physical time `origin + i * dt`. Two formats are
//! supported: a CSV with header `index,value`, and a raw little-endian
//! stream behind a 32-byte header (`GGBS`, version, length, dt, seed).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Magic bytes of the binary series format.
pub const MAGIC: [u8; 4] = *b"GGBS";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

/// Values observed on a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries {
    values: Vec<f64>,
    dt: f64,
    origin: f64,
    seed: u64,
}

impl SampledSeries {
    /// Builds a series starting at time 0. Values must be finite and
    /// non-empty, `dt` positive.
    pub fn new(values: Vec<f64>, dt: f64, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("values", "series must not be empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("non-finite value at index {i}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        Ok(SampledSeries {
            values,
            dt,
            origin: 0.0,
            seed,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Physical time covered, `len * dt`.
    pub fn span(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// Same values read on a grid of spacing `new_dt`. The origin is rescaled
    /// with the grid so that index `i` keeps its meaning.
    pub fn rescale(&self, new_dt: f64) -> Result<Self> {
        if !(new_dt > 0.0 && new_dt.is_finite()) {
            return Err(Error::param("new_dt", format!("must be positive, got {new_dt}")));
        }
        Ok(SampledSeries {
            values: self.values.clone(),
            dt: new_dt,
            origin: self.origin / self.dt * new_dt,
            seed: self.seed,
        })
    }

    /// Moves index 0 to physical time `origin`.
    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    /// The first `n` samples.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::param("n", format!("prefix length {n} outside 1..={}", self.len())));
        }
        Ok(SampledSeries {
            values: self.values[..n].to_vec(),
            ..*self
        })
    }

    /// Every `step`-th sample, spacing `step * dt`.
    pub fn subsample(&self, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::param("step", "must be at least 1"));
        }
        Ok(SampledSeries {
            values: self.values.iter().step_by(step).copied().collect(),
            dt: self.dt * step as f64,
            ..*self
        })
    }

    /// Writes `index,value` rows with round-trip exact decimal values.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["index", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads a CSV written by [`SampledSeries::write_csv`]. The format does
    /// not carry the spacing, so it is passed in.
    pub fn read_csv(path: impl AsRef<Path>, dt: f64) -> Result<Self> {
        let mut r = csv::Reader::from_path(path.as_ref())?;
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "index" || &headers[1] != "value" {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header `index,value`".into(),
            });
        }
        let mut values = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = k as u64 + 2;
            let bad = |msg: String| Error::Parse { line, msg };
            let idx: usize = rec
                .get(0)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| bad(format!("index: {e}")))?;
            if idx != k {
                return Err(bad(format!("expected index {k}, found {idx}")));
            }
            let v: f64 = rec
                .get(1)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| bad(format!("value: {e}")))?;
            values.push(v);
        }
        SampledSeries::new(values, dt, 0)
    }

    /// Writes the binary format: 32-byte header then little-endian `f64`s.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.encode(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&mut BufReader::new(file))
    }

    /// Encodes into any writer; see [`SampledSeries::write_binary`].
    pub fn encode<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[0..4].copy_from_slice(&MAGIC);
        header[4..8].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        header[8..16].copy_from_slice(&(self.len() as u64).to_le_bytes());
        header[16..24].copy_from_slice(&self.dt.to_le_bytes());
        header[24..32].copy_from_slice(&self.seed.to_le_bytes());
        w.write_all(&header)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn decode<R: Read>(r: &mut R) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            line: 0,
            msg: msg.to_string(),
        };
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
        if header[0..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |a: usize| -> [u8; 8] { header[a..a + 8].try_into().expect("8 bytes") };
        let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let len = u64::from_le_bytes(word(8)) as usize;
        let dt = f64::from_le_bytes(word(16));
        let seed = u64::from_le_bytes(word(24));
        let mut values = Vec::with_capacity(len.min(1 << 24));
        let mut buf = [0u8; 8];
        for _ in 0..len {
            r.read_exact(&mut buf).map_err(|_| bad("truncated payload"))?;
            values.push(f64::from_le_bytes(buf));
        }
        SampledSeries::new(values, dt, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> SampledSeries {
        SampledSeries::new(vec![0.1, -2.5, 1e-300, 3.0e17, 0.0], 0.25, 42).unwrap()
    }

    #[test]
    fn rescale_is_metadata_only() {
        let s = demo();
        let same = s.rescale(0.25).unwrap();
        assert_eq!(same, s);
        let half = s.rescale(0.125).unwrap();
        assert_eq!(half.values(), s.values());
        assert_eq!(half.span(), s.span() / 2.0);
        assert!(s.rescale(0.0).is_err());
    }

    #[test]
    fn span_of_rescaled_long_series() {
        let s = SampledSeries::new(vec![1.0; 10_000], 1.0, 0).unwrap();
        let d5 = 5f64.powf(-22.0 - 1.0 / 6.0);
        assert_eq!(s.rescale(d5).unwrap().span(), 10_000.0 * d5);
    }

    #[test]
    fn prefix_and_subsample() {
        let s = demo();
        assert_eq!(s.prefix(2).unwrap().values(), &[0.1, -2.5]);
        assert!(s.prefix(0).is_err());
        let sub = s.subsample(2).unwrap();
        assert_eq!(sub.values(), &[0.1, 1e-300, 0.0]);
        assert_eq!(sub.dt(), 0.5);
    }

    #[test]
    fn rejects_invalid() {
        assert!(SampledSeries::new(vec![], 1.0, 0).is_err());
        assert!(SampledSeries::new(vec![f64::NAN], 1.0, 0).is_err());
        assert!(SampledSeries::new(vec![1.0], -1.0, 0).is_err());
    }

    #[test]
    fn binary_round_trip_in_memory() {
        let s = demo();
        let mut buf = Vec::new();
        s.encode(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 8 * s.len());
        assert_eq!(&buf[..4], b"GGBS");
        let back = SampledSeries::decode(&mut buf.as_slice()).unwrap();
        assert_eq!(back, s);
        buf[0] = b'X';
        assert!(SampledSeries::decode(&mut buf.as_slice()).is_err());
    }
}
