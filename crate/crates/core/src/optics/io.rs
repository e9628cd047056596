//! Intensity raster dumps: little-endian `f32`, row-major, with a JSON
//! sidecar `{nx, ny, dx_m, dy_m, z_m}`. A carpet is one raster per slice
//! plus `index.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::carpet::TalbotCarpet;
use super::field::{GridSpec, IntensityMap};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterSidecar {
    pub nx: usize,
    pub ny: usize,
    pub dx_m: f64,
    pub dy_m: f64,
    pub z_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarpetIndexEntry {
    pub raster: String,
    pub sidecar: String,
    pub z_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarpetIndex {
    pub slices: Vec<CarpetIndexEntry>,
}

pub fn raster_bytes(map: &IntensityMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(map.values.len() * 4);
    for v in &map.values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

/// Writes `<stem>.f32` and `<stem>.json` into `dir`; returns both paths.
pub fn write_raster(dir: &Path, stem: &str, map: &IntensityMap) -> Result<(PathBuf, PathBuf)> {
    let raster = dir.join(format!("{stem}.f32"));
    let sidecar = dir.join(format!("{stem}.json"));
    fs::write(&raster, raster_bytes(map))?;
    let meta = RasterSidecar {
        nx: map.grid.nx,
        ny: map.grid.ny,
        dx_m: map.grid.dx,
        dy_m: map.grid.dy,
        z_m: map.z,
    };
    fs::write(&sidecar, serde_json::to_string_pretty(&meta)?)?;
    Ok((raster, sidecar))
}

pub fn read_raster(raster: &Path, sidecar: &Path) -> Result<IntensityMap> {
    let meta: RasterSidecar = serde_json::from_str(&fs::read_to_string(sidecar)?)?;
    let bytes = fs::read(raster)?;
    if bytes.len() != meta.nx * meta.ny * 4 {
        return Err(Error::Sampling(format!(
            "raster {} has {} bytes, sidecar expects {}",
            raster.display(),
            bytes.len(),
            meta.nx * meta.ny * 4
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    IntensityMap::new(GridSpec::new(meta.nx, meta.ny, meta.dx_m, meta.dy_m)?, meta.z_m, values)
}

/// Dumps every slice of `carpet` into `dir` and writes `index.json`.
/// Returns the written files in order, index last.
pub fn write_carpet(dir: &Path, carpet: &TalbotCarpet) -> Result<Vec<PathBuf>> {
    let mut w = CarpetWriter::new(dir)?;
    for slice in &carpet.slices {
        w.push(&slice.intensity())?;
    }
    w.finish()
}

/// Streams slices to disk one at a time, so a carpet never has to fit in
/// memory. Slices are numbered in push order.
#[derive(Debug)]
pub struct CarpetWriter {
    dir: PathBuf,
    files: Vec<PathBuf>,
    entries: Vec<CarpetIndexEntry>,
}

impl CarpetWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(CarpetWriter { dir: dir.to_path_buf(), files: Vec::new(), entries: Vec::new() })
    }

    pub fn push(&mut self, map: &IntensityMap) -> Result<()> {
        let stem = format!("slice_{:04}", self.entries.len());
        let (r, s) = write_raster(&self.dir, &stem, map)?;
        self.entries.push(CarpetIndexEntry { raster: format!("{stem}.f32"), sidecar: format!("{stem}.json"), z_m: map.z });
        self.files.push(r);
        self.files.push(s);
        Ok(())
    }

    /// Writes `index.json`; returns every file written, index last.
    pub fn finish(mut self) -> Result<Vec<PathBuf>> {
        let index = self.dir.join("index.json");
        fs::write(&index, serde_json::to_string_pretty(&CarpetIndex { slices: self.entries })?)?;
        self.files.push(index);
        Ok(self.files)
    }
}

pub fn read_carpet_index(dir: &Path) -> Result<CarpetIndex> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join("index.json"))?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_round_trip_through_f32() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(3, 2, 0.5e-6, 0.25e-6).unwrap();
        let map = IntensityMap::new(g, 12e-6, vec![0.0, 1.0, 0.5, 2.0, 0.125, 3.0]).unwrap();
        let (r, s) = write_raster(dir.path(), "a", &map).unwrap();
        assert_eq!(fs::read(&r).unwrap().len(), 24);
        assert_eq!(&fs::read(&r).unwrap()[4..8], &1.0f32.to_le_bytes());
        let back = read_raster(&r, &s).unwrap();
        assert_eq!(back, map);
        let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&s).unwrap()).unwrap();
        for key in ["nx", "ny", "dx_m", "dy_m", "z_m"] {
            assert!(meta.get(key).is_some(), "{key}");
        }
    }
}
