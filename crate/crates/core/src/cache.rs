//! Content-addressed on-disk store of dense spectra.
//!
//! File layout, all little-endian:
//!
//! ```text
//! b"VCSPEC\0\0"  u64 version  u64 dim  u64 count
//! count x f64 eigenvalues
//! count x dim x (f64 re, f64 im) eigenvectors
//! ```

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::{StateVector, DUMP_VERSION};
use crate::lattice::IslandLattice;
use crate::spectral::Spectrum;

const MAGIC: &[u8; 8] = b"VCSPEC\0\0";

#[derive(Clone, Debug)]
pub struct SpectrumCache {
    dir: PathBuf,
}

/// Cache key of `(lattice JSON, lambda, representation version)`.
pub fn spectrum_key(lat: &IslandLattice, lambda: f64) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&lat.export()).expect("lattice export serializes"));
    h.update(lambda.to_bits().to_le_bytes());
    h.update(DUMP_VERSION.to_le_bytes());
    hex::encode(h.finalize())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SpectrumCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, lat: &IslandLattice, lambda: f64) -> PathBuf {
        self.dir.join(format!("{}.spec", spectrum_key(lat, lambda)))
    }

    pub fn load(&self, lat: &IslandLattice, lambda: f64) -> Result<Option<Spectrum>> {
        let path = self.path(lat, lambda);
        if !path.exists() {
            return Ok(None);
        }
        read_spectrum(BufReader::new(fs::File::open(path)?)).map(Some)
    }

    /// Writes through a temporary file and renames it into place.
    pub fn store(&self, lat: &IslandLattice, lambda: f64, spectrum: &Spectrum) -> Result<()> {
        let path = self.path(lat, lambda);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            write_spectrum(&mut w, spectrum)?;
            w.flush()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }
}

pub fn write_spectrum<W: Write>(w: &mut W, s: &Spectrum) -> Result<()> {
    w.write_all(MAGIC)?;
    for v in [DUMP_VERSION, s.dim() as u64, s.eigenvalues.len() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    for e in &s.eigenvalues {
        w.write_all(&e.to_le_bytes())?;
    }
    for v in &s.eigenvectors {
        for z in &v.0 {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_spectrum<R: Read>(mut r: R) -> Result<Spectrum> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a spectrum cache file".into()));
    }
    let version = read_u64(&mut r)?;
    if version != DUMP_VERSION {
        return Err(Error::Format(format!(
            "spectrum cache version {version}, expected {DUMP_VERSION}"
        )));
    }
    let dim = read_u64(&mut r)? as usize;
    let count = read_u64(&mut r)? as usize;
    if count > dim || dim > (1 << 20) {
        return Err(Error::Format(format!(
            "implausible spectrum header dim={dim} count={count}"
        )));
    }
    let eigenvalues = (0..count).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let eigenvectors = (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| Ok(Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?)))
                .collect::<Result<Vec<_>>>()
                .map(StateVector)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}
