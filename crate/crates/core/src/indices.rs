//! Spectral water indices over masked chip pixel grids.
//!
//! # Chip file format
//!
//! A chip stack is a flat binary file of little-endian IEEE-754 `f32` values
//! plus a JSON sidecar at `<file>.json`:
//!
//! ```json
//! {
//!   "width": 64,
//!   "height": 64,
//!   "band_order": ["green", "red", "nir", "swir", "valid"],
//!   "wavelengths_nm": [665.0, 842.0, 1610.0],
//!   "chips": [{"plant_id": "A", "timestamp": "2024-03-15", "group_key": "S2_20240315_T40Q"}]
//! }
//! ```
//!
//! Layout is chip-major, then band in `band_order`, then row-major pixels
//! (`y * width + x`). The file therefore holds exactly
//! `chips.len() * band_order.len() * width * height * 4` bytes. In the
//! `valid` band any non-zero value marks a valid water pixel. `band_order`
//! may list the five bands in any order; `wavelengths_nm` (red, NIR, SWIR
//! centres) defaults to the Sentinel-2 B4/B8/B11 centres.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::parse_date;
use crate::stats;

/// Sentinel-2 B4 / B8 / B11 band centres in nm.
pub const S2_WAVELENGTHS: Wavelengths = Wavelengths {
    red: 665.0,
    nir: 842.0,
    swir: 1610.0,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavelengths {
    pub red: f64,
    pub nir: f64,
    pub swir: f64,
}

impl Default for Wavelengths {
    fn default() -> Self {
        S2_WAVELENGTHS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChipBands {
    pub width: usize,
    pub height: usize,
    pub green: Vec<f64>,
    pub red: Vec<f64>,
    pub nir: Vec<f64>,
    pub swir: Vec<f64>,
    pub valid_mask: Vec<bool>,
}

impl ChipBands {
    pub fn new(
        width: usize,
        height: usize,
        green: Vec<f64>,
        red: Vec<f64>,
        nir: Vec<f64>,
        swir: Vec<f64>,
        valid_mask: Vec<bool>,
    ) -> Result<Self> {
        let n = width * height;
        if [
            green.len(),
            red.len(),
            nir.len(),
            swir.len(),
            valid_mask.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return Err(Error::InvalidInput(format!(
                "chip bands must all hold {width}x{height} pixels"
            )));
        }
        Ok(ChipBands {
            width,
            height,
            green,
            red,
            nir,
            swir,
            valid_mask,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn pixel_ok(&self, i: usize) -> bool {
        self.valid_mask[i]
            && self.green[i].is_finite()
            && self.red[i].is_finite()
            && self.nir[i].is_finite()
            && self.swir[i].is_finite()
    }

    /// Per-pixel NDWI; `None` where masked or undefined.
    pub fn ndwi_field(&self) -> Vec<Option<f64>> {
        (0..self.len())
            .map(|i| {
                self.pixel_ok(i)
                    .then(|| ndwi(self.green[i], self.nir[i]))
                    .flatten()
            })
            .collect()
    }

    pub fn fai_field(&self, wl: Wavelengths) -> Result<Vec<Option<f64>>> {
        check_wavelengths(wl)?;
        Ok((0..self.len())
            .map(|i| {
                self.pixel_ok(i)
                    .then(|| fai_unchecked(self.red[i], self.nir[i], self.swir[i], wl))
            })
            .collect())
    }

    pub fn rednir_field(&self) -> Vec<Option<f64>> {
        (0..self.len())
            .map(|i| {
                self.pixel_ok(i)
                    .then(|| rednir_ratio(self.red[i], self.nir[i]))
                    .flatten()
            })
            .collect()
    }

    /// The three summaries of the training table.
    pub fn summarize(&self, wl: Wavelengths) -> Result<ChipSummary> {
        Ok(ChipSummary {
            fai: summarize_field(&self.fai_field(wl)?),
            ndwi: summarize_field(&self.ndwi_field()),
            rednir: summarize_field(&self.rednir_field()),
        })
    }
}

/// McFeeters NDWI, `(green - nir) / (green + nir)`. `None` for a zero denominator.
pub fn ndwi(green: f64, nir: f64) -> Option<f64> {
    let den = green + nir;
    if den == 0.0 || !den.is_finite() {
        None
    } else {
        Some((green - nir) / den)
    }
}

/// Floating-algae index: NIR height above the red–SWIR linear baseline.
pub fn fai(red: f64, nir: f64, swir: f64, wl: Wavelengths) -> Result<f64> {
    check_wavelengths(wl)?;
    Ok(fai_unchecked(red, nir, swir, wl))
}

fn fai_unchecked(red: f64, nir: f64, swir: f64, wl: Wavelengths) -> f64 {
    let baseline = red + (swir - red) * (wl.nir - wl.red) / (wl.swir - wl.red);
    nir - baseline
}

fn check_wavelengths(wl: Wavelengths) -> Result<()> {
    if wl.red < wl.nir && wl.nir < wl.swir {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "wavelengths must satisfy red < nir < swir, got {wl:?}"
        )))
    }
}

/// `red / nir`; `None` unless `nir > 0`.
pub fn rednir_ratio(red: f64, nir: f64) -> Option<f64> {
    (nir > 0.0).then(|| red / nir)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub mean: f64,
    pub sd: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

/// Summary over valid pixels; `stats` is absent when `n_valid == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub n_valid: usize,
    pub stats: Option<IndexStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChipSummary {
    pub fai: IndexSummary,
    pub ndwi: IndexSummary,
    pub rednir: IndexSummary,
}

/// Statistics of `values` over pixels where `mask` is true.
pub fn summarize_index(values: &[f64], mask: &[bool]) -> Result<IndexSummary> {
    if values.len() != mask.len() {
        return Err(Error::InvalidInput(
            "index grid and mask differ in size".into(),
        ));
    }
    let field: Vec<Option<f64>> = values
        .iter()
        .zip(mask)
        .map(|(&v, &m)| (m && v.is_finite()).then_some(v))
        .collect();
    Ok(summarize_field(&field))
}

fn summarize_field(field: &[Option<f64>]) -> IndexSummary {
    let valid = stats::sorted_finite(&field.iter().flatten().copied().collect::<Vec<_>>());
    let stats = (!valid.is_empty()).then(|| IndexStats {
        mean: stats::mean(&valid).unwrap(),
        sd: stats::sample_sd(&valid).unwrap(),
        q10: stats::quantile_linear(&valid, 0.1).unwrap(),
        q50: stats::quantile_linear(&valid, 0.5).unwrap(),
        q90: stats::quantile_linear(&valid, 0.9).unwrap(),
    });
    IndexSummary {
        n_valid: valid.len(),
        stats,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipMeta {
    pub plant_id: String,
    pub timestamp: String,
    pub group_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipSidecar {
    pub width: usize,
    pub height: usize,
    pub band_order: Vec<String>,
    #[serde(default)]
    pub wavelengths_nm: Option<[f64; 3]>,
    pub chips: Vec<ChipMeta>,
}

const BANDS: [&str; 5] = ["green", "red", "nir", "swir", "valid"];

impl ChipSidecar {
    pub fn wavelengths(&self) -> Wavelengths {
        match self.wavelengths_nm {
            Some([red, nir, swir]) => Wavelengths { red, nir, swir },
            None => S2_WAVELENGTHS,
        }
    }

    fn band_positions(&self) -> Result<[usize; 5]> {
        if self.band_order.len() != BANDS.len() {
            return Err(Error::InvalidInput(format!(
                "band_order must list exactly {BANDS:?}"
            )));
        }
        let mut pos = [0; 5];
        for (slot, name) in pos.iter_mut().zip(BANDS) {
            *slot = self
                .band_order
                .iter()
                .position(|b| b == name)
                .ok_or_else(|| Error::InvalidInput(format!("band_order lacks `{name}`")))?;
        }
        Ok(pos)
    }
}

/// Decodes a chip stack from raw bytes.
pub fn decode_chips(sidecar: &ChipSidecar, bytes: &[u8]) -> Result<Vec<(ChipMeta, ChipBands)>> {
    let pos = sidecar.band_positions()?;
    let npix = sidecar.width * sidecar.height;
    let per_chip = npix * BANDS.len();
    let expected = sidecar.chips.len() * per_chip * 4;
    if bytes.len() != expected {
        return Err(Error::InvalidInput(format!(
            "chip file holds {} bytes, sidecar implies {expected}",
            bytes.len()
        )));
    }
    let floats: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    sidecar
        .chips
        .iter()
        .enumerate()
        .map(|(k, meta)| {
            parse_date(&meta.timestamp)?;
            let chip = &floats[k * per_chip..(k + 1) * per_chip];
            let band = |b: usize| chip[pos[b] * npix..(pos[b] + 1) * npix].to_vec();
            let valid = band(4).into_iter().map(|v| v != 0.0).collect();
            let bands = ChipBands::new(
                sidecar.width,
                sidecar.height,
                band(0),
                band(1),
                band(2),
                band(3),
                valid,
            )?;
            Ok((meta.clone(), bands))
        })
        .collect()
}

/// Encodes chips in the canonical band order.
pub fn encode_chips(
    chips: &[(ChipMeta, ChipBands)],
    wl: Option<Wavelengths>,
) -> Result<(ChipSidecar, Vec<u8>)> {
    let (width, height) = chips
        .first()
        .map(|(_, c)| (c.width, c.height))
        .unwrap_or((0, 0));
    let mut bytes = Vec::new();
    for (_, c) in chips {
        if (c.width, c.height) != (width, height) {
            return Err(Error::InvalidInput(
                "all chips in a stack share one shape".into(),
            ));
        }
        let mask: Vec<f64> = c
            .valid_mask
            .iter()
            .map(|&m| if m { 1.0 } else { 0.0 })
            .collect();
        for band in [&c.green, &c.red, &c.nir, &c.swir, &mask] {
            for &v in band.iter() {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    let sidecar = ChipSidecar {
        width,
        height,
        band_order: BANDS.map(String::from).to_vec(),
        wavelengths_nm: wl.map(|w| [w.red, w.nir, w.swir]),
        chips: chips.iter().map(|(m, _)| m.clone()).collect(),
    };
    Ok((sidecar, bytes))
}

/// Sidecar path convention: `<chips file>.json`.
pub fn sidecar_path(chips: &Path) -> std::path::PathBuf {
    let mut s = chips.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Reads a chip file and its sidecar.
pub fn read_chip_file(path: &Path) -> Result<(ChipSidecar, Vec<(ChipMeta, ChipBands)>)> {
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: ChipSidecar = serde_json::from_str(&text)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let chips = decode_chips(&sidecar, &bytes)?;
    Ok((sidecar, chips))
}

pub fn write_chip_file(
    path: &Path,
    chips: &[(ChipMeta, ChipBands)],
    wl: Option<Wavelengths>,
) -> Result<()> {
    let (sidecar, bytes) = encode_chips(chips, wl)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_string_pretty(&sidecar)?)
        .map_err(|e| Error::io(&side, e))?;
    Ok(())
}

/// Header of the per-chip summaries table.
pub fn summary_header() -> Vec<String> {
    let mut h: Vec<String> = ["plant_id", "timestamp", "group_key"]
        .map(String::from)
        .to_vec();
    for idx in ["fai", "ndwi", "rednir"] {
        for stat in ["mean", "sd", "q10", "q50", "q90", "n_valid"] {
            h.push(format!("{idx}_{stat}"));
        }
    }
    h
}

pub fn summary_row(meta: &ChipMeta, s: &ChipSummary) -> Vec<String> {
    let mut row = vec![
        meta.plant_id.clone(),
        meta.timestamp.clone(),
        meta.group_key.clone(),
    ];
    for idx in [&s.fai, &s.ndwi, &s.rednir] {
        match idx.stats {
            Some(st) => row.extend([st.mean, st.sd, st.q10, st.q50, st.q90].map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row.push(idx.n_valid.to_string());
    }
    row
}
