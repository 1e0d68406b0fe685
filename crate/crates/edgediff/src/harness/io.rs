//! Image input and map emission: 8-bit sRGB rasters, portable float maps,
//! radiance RGBE input, and 16-bit grayscale map output with min/max
//! sidecars for de-quantization.

use crate::color::builtin;
use crate::error::{Error, Result};
use crate::image::{ChannelPlane, TristimulusImage};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// 8-bit sRGB-encoded raster (png, jpeg, ...).
    Srgb8,
    /// Portable float map (PF color / Pf grayscale).
    Pfm,
    /// Radiance RGBE (.hdr).
    Rgbe,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<ImageFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        Some(match ext.as_str() {
            "png" | "jpg" | "jpeg" | "bmp" | "tiff" | "tif" => ImageFormat::Srgb8,
            "pfm" => ImageFormat::Pfm,
            "hdr" | "pic" => ImageFormat::Rgbe,
            _ => return None,
        })
    }
}

/// The sRGB electro-optical transfer function (decoding).
#[inline]
pub fn srgb_eotf(encoded: f64) -> f64 {
    if encoded <= 0.04045 {
        encoded / 12.92
    } else {
        ((encoded + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_rgb_to_xyz(rgb: [f64; 3]) -> [f64; 3] {
    builtin("srgb_to_xyz").apply(rgb)
}

/// Loads an image as tristimulus values. 8-bit inputs are linearized with
/// the sRGB transfer function and converted to XYZ (D65); float formats are
/// taken as linear RGB. Stored Y is relative (diffuse white at 1 for sRGB
/// input); `luminance_scale` maps it to cd/m².
pub fn load_image(
    path: &Path,
    format: Option<ImageFormat>,
    luminance_scale: f64,
) -> Result<TristimulusImage> {
    let format = format
        .or_else(|| ImageFormat::from_path(path))
        .ok_or_else(|| Error::UnknownFormat(path.display().to_string()))?;
    match format {
        ImageFormat::Srgb8 => {
            let img = image::open(path)?.into_rgb8();
            let (w, h) = (img.width() as usize, img.height() as usize);
            let data = img
                .pixels()
                .map(|p| {
                    linear_rgb_to_xyz([
                        srgb_eotf(p.0[0] as f64 / 255.0),
                        srgb_eotf(p.0[1] as f64 / 255.0),
                        srgb_eotf(p.0[2] as f64 / 255.0),
                    ])
                })
                .collect();
            TristimulusImage::new(w, h, data, luminance_scale)
        }
        ImageFormat::Pfm => {
            let (w, h, channels) = read_pfm(path)?;
            let data = match channels {
                PfmData::Gray(g) => g
                    .iter()
                    .map(|&v| linear_rgb_to_xyz([v as f64, v as f64, v as f64]))
                    .collect(),
                PfmData::Rgb(px) => px
                    .iter()
                    .map(|p| linear_rgb_to_xyz([p[0] as f64, p[1] as f64, p[2] as f64]))
                    .collect(),
            };
            TristimulusImage::new(w, h, data, luminance_scale)
        }
        ImageFormat::Rgbe => {
            let file = BufReader::new(File::open(path)?);
            let decoder = image::codecs::hdr::HdrDecoder::new(file)?;
            let img = image::DynamicImage::from_decoder(decoder)?.into_rgb32f();
            let (w, h) = (img.width() as usize, img.height() as usize);
            let data = img
                .pixels()
                .map(|p| linear_rgb_to_xyz([p.0[0] as f64, p.0[1] as f64, p.0[2] as f64]))
                .collect();
            TristimulusImage::new(w, h, data, luminance_scale)
        }
    }
}

enum PfmData {
    Gray(Vec<f32>),
    Rgb(Vec<[f32; 3]>),
}

fn read_pfm_header(reader: &mut impl BufRead) -> Result<(bool, usize, usize, f32)> {
    let mut tokens = Vec::new();
    // Header: magic, width, height, scale; whitespace separated, with
    // possible comment lines starting with '#'.
    while tokens.len() < 4 {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::parse("pfm", "truncated header"));
        }
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        tokens.extend(trimmed.split_whitespace().map(str::to_string));
    }
    let color = match tokens[0].as_str() {
        "PF" => true,
        "Pf" => false,
        other => return Err(Error::parse("pfm", format!("bad magic {other:?}"))),
    };
    let w: usize = tokens[1]
        .parse()
        .map_err(|e| Error::parse("pfm", format!("bad width: {e}")))?;
    let h: usize = tokens[2]
        .parse()
        .map_err(|e| Error::parse("pfm", format!("bad height: {e}")))?;
    let scale: f32 = tokens[3]
        .parse()
        .map_err(|e| Error::parse("pfm", format!("bad scale: {e}")))?;
    if w == 0 || h == 0 {
        return Err(Error::parse("pfm", "zero dimension"));
    }
    Ok((color, w, h, scale))
}

fn read_pfm(path: &Path) -> Result<(usize, usize, PfmData)> {
    let mut reader = BufReader::new(File::open(path)?);
    let (color, w, h, scale) = read_pfm_header(&mut reader)?;
    let little_endian = scale < 0.0;
    let channels = if color { 3 } else { 1 };
    let mut raw = vec![0u8; w * h * channels * 4];
    reader.read_exact(&mut raw)?;
    let mut samples = Vec::with_capacity(w * h * channels);
    for chunk in raw.chunks_exact(4) {
        let bytes = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(bytes)
        } else {
            f32::from_be_bytes(bytes)
        };
        samples.push(v);
    }
    // PFM stores rows bottom-to-top; flip to raster order.
    let mut flipped = Vec::with_capacity(samples.len());
    for r in 0..h {
        let src_row = h - 1 - r;
        let start = src_row * w * channels;
        flipped.extend_from_slice(&samples[start..start + w * channels]);
    }
    let data = if color {
        PfmData::Rgb(
            flipped
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect(),
        )
    } else {
        PfmData::Gray(flipped)
    };
    Ok((w, h, data))
}

/// Writes a single-channel plane as a grayscale portable float map
/// (little-endian, scale -1.0). Values round-trip bit-exactly at f32
/// precision.
pub fn save_pfm(plane: &ChannelPlane, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "Pf\n{} {}\n-1.0\n", plane.width(), plane.height())?;
    // Bottom-to-top row order.
    for r in (0..plane.height()).rev() {
        for c in 0..plane.width() {
            w.write_all(&(plane.get(r, c) as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a grayscale portable float map as a plane.
pub fn load_pfm(path: &Path) -> Result<ChannelPlane> {
    let (w, h, data) = read_pfm(path)?;
    match data {
        PfmData::Gray(g) => ChannelPlane::new(w, h, g.iter().map(|&v| v as f64).collect()),
        PfmData::Rgb(_) => Err(Error::parse("pfm", "expected grayscale map, found color")),
    }
}

/// Saves a map as a 16-bit grayscale PNG plus a `<path>.minmax.txt` sidecar
/// recording the quantization range (`min max` on one line), so
/// `v = min + q/65535 * (max - min)` recovers values.
pub fn save_map(map: &ChannelPlane, path: &Path) -> Result<()> {
    let (lo, hi) = map.min_max();
    let range = hi - lo;
    let mut img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(
        map.width() as u32,
        map.height() as u32,
    );
    for (r, row) in img.rows_mut().enumerate() {
        for (c, px) in row.enumerate() {
            let v = map.get(r, c);
            let q = if range > 0.0 {
                ((v - lo) / range * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            *px = image::Luma([q]);
        }
    }
    img.save(path)?;
    let sidecar = sidecar_path(path);
    let mut f = BufWriter::new(File::create(sidecar)?);
    writeln!(f, "{lo:e} {hi:e}")?;
    f.flush()?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".minmax.txt");
    std::path::PathBuf::from(s)
}

/// Loads a 16-bit map saved by [`save_map`], de-quantizing with its sidecar.
pub fn load_map(path: &Path) -> Result<ChannelPlane> {
    let img = image::open(path)?.into_luma16();
    let sidecar = std::fs::read_to_string(sidecar_path(path))?;
    let mut parts = sidecar.split_whitespace();
    let lo: f64 = parts
        .next()
        .ok_or_else(|| Error::parse("minmax sidecar", "missing min"))?
        .parse()
        .map_err(|e| Error::parse("minmax sidecar", format!("bad min: {e}")))?;
    let hi: f64 = parts
        .next()
        .ok_or_else(|| Error::parse("minmax sidecar", "missing max"))?
        .parse()
        .map_err(|e| Error::parse("minmax sidecar", format!("bad max: {e}")))?;
    let range = hi - lo;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img
        .pixels()
        .map(|p| lo + p.0[0] as f64 / 65535.0 * range)
        .collect();
    ChannelPlane::new(w, h, data)
}
