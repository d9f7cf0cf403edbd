//! SNWF1 wavefunction files.
//!
//! A file is one line of JSON
//! `{"magic":"SNWF1","n":…,"h":…,"time":…,"units":…,"norm_target":…}`
//! terminated by `\n`, followed by n³ samples in row-major order, each stored
//! as two little-endian IEEE-754 doubles (re, im).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::UniformGrid;

pub const MAGIC: &str = "SNWF1";
const MAX_HEADER: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnwfHeader {
    pub magic: String,
    pub n: usize,
    pub h: f64,
    pub time: f64,
    pub units: String,
    pub norm_target: f64,
}

/// A field together with the metadata stored alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: ComplexField,
    pub time: f64,
    pub units: String,
    pub norm_target: f64,
}

impl Snapshot {
    pub fn new(field: ComplexField, time: f64) -> Self {
        Self {
            field,
            time,
            units: "dimensionless".into(),
            norm_target: 1.0,
        }
    }

    pub fn header(&self) -> SnwfHeader {
        SnwfHeader {
            magic: MAGIC.into(),
            n: self.field.grid().n(),
            h: self.field.grid().h(),
            time: self.time,
            units: self.units.clone(),
            norm_target: self.norm_target,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        if !self.time.is_finite() || !self.norm_target.is_finite() {
            return Err(Error::NonFinite("snapshot metadata".into()));
        }
        let header = serde_json::to_string(&self.header()).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(header.as_bytes())?;
        w.write_all(b"\n")?;
        let mut buf = Vec::with_capacity(16 * self.field.values().len());
        for v in self.field.values() {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut line = Vec::new();
        reader.by_ref().take(MAX_HEADER).read_until(b'\n', &mut line)?;
        if line.last() != Some(&b'\n') {
            return Err(Error::Format("missing or oversized SNWF1 header line".into()));
        }
        line.pop();
        let header: SnwfHeader = serde_json::from_slice(&line).map_err(|e| Error::Format(format!("bad header: {e}")))?;
        if header.magic != MAGIC {
            return Err(Error::Format(format!("unexpected magic {:?}", header.magic)));
        }
        let grid = UniformGrid::new(header.n, header.h)?;
        let mut bytes = Vec::with_capacity(16 * grid.len());
        reader.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * grid.len() {
            return Err(Error::Format(format!(
                "expected {} payload bytes for n = {}, found {}",
                16 * grid.len(),
                header.n,
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self {
            field: ComplexField::new(grid, values)?,
            time: header.time,
            units: header.units,
            norm_target: header.norm_target,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}
