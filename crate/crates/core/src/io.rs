//! Image files at exact bit depths.
//!
//! Supported: binary P6 PPM with maxval 65535 (big-endian samples), 16-bit
//! PNG, 8-bit PNG. 16-bit files are linear light, 8-bit files are sRGB and
//! go through [`crate::inverse::linearize`] on load.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Cursor, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::LinearImage;
use crate::inverse::{delinearize, linearize, InverseConfig, Srgb8Image};
use crate::pipeline::OutputEncoding;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm16,
    Png16,
    Png8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colorspace {
    Linear,
    Srgb,
}

impl ImageFormat {
    pub fn colorspace(self) -> Colorspace {
        match self {
            ImageFormat::Ppm16 | ImageFormat::Png16 => Colorspace::Linear,
            ImageFormat::Png8 => Colorspace::Srgb,
        }
    }

    pub fn encoding(self) -> OutputEncoding {
        match self.colorspace() {
            Colorspace::Linear => OutputEncoding::Linear16,
            Colorspace::Srgb => OutputEncoding::Srgb8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageFile {
    pub path: PathBuf,
    pub format: ImageFormat,
}

impl ImageFile {
    pub fn new(path: impl Into<PathBuf>, format: ImageFormat) -> Self {
        Self {
            path: path.into(),
            format,
        }
    }

    /// Format of an existing file: PPM by extension, PNG bit depth from
    /// the header.
    pub fn infer(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let format = match extension(&path).as_deref() {
            Some("ppm") => ImageFormat::Ppm16,
            Some("png") => {
                let reader = png::Decoder::new(BufReader::new(File::open(&path)?))
                    .read_info()
                    .map_err(|e| malformed(&path, e))?;
                match reader.info().bit_depth {
                    png::BitDepth::Sixteen => ImageFormat::Png16,
                    png::BitDepth::Eight => ImageFormat::Png8,
                    other => {
                        return Err(Error::UnsupportedFormat(format!(
                            "{}: PNG bit depth {other:?}",
                            path.display()
                        )))
                    }
                }
            }
            _ => return Err(unsupported_extension(&path)),
        };
        Ok(Self { path, format })
    }

    /// Output target for a path and encoding. 8-bit output must be PNG.
    pub fn for_output(path: impl Into<PathBuf>, encoding: OutputEncoding) -> Result<Self> {
        let path = path.into();
        let format = match (extension(&path).as_deref(), encoding) {
            (Some("ppm"), OutputEncoding::Linear16) => ImageFormat::Ppm16,
            (Some("png"), OutputEncoding::Linear16) => ImageFormat::Png16,
            (Some("png"), OutputEncoding::Srgb8) => ImageFormat::Png8,
            (Some("ppm"), OutputEncoding::Srgb8) => {
                return Err(Error::UnsupportedFormat(
                    "8-bit output is written as PNG; PPM output is 16-bit only".into(),
                ))
            }
            _ => return Err(unsupported_extension(&path)),
        };
        Ok(Self { path, format })
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn unsupported_extension(path: &Path) -> Error {
    Error::UnsupportedFormat(format!(
        "{}: expected a .ppm or .png file",
        path.display()
    ))
}

fn malformed(path: &Path, reason: impl ToString) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// A rendered image at its storage precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuantizedImage {
    Srgb8(Srgb8Image),
    Linear16 {
        width: usize,
        height: usize,
        samples: Vec<[u16; 3]>,
    },
}

impl QuantizedImage {
    pub fn encode(img: &LinearImage, encoding: OutputEncoding) -> Self {
        match encoding {
            OutputEncoding::Srgb8 => QuantizedImage::Srgb8(
                delinearize(img, &InverseConfig::default()).expect("default config is valid"),
            ),
            OutputEncoding::Linear16 => QuantizedImage::Linear16 {
                width: img.width(),
                height: img.height(),
                samples: img
                    .pixels()
                    .iter()
                    .map(|p| p.map(|v| (v * 65535.0).round() as u16))
                    .collect(),
            },
        }
    }

    pub fn width(&self) -> usize {
        match self {
            QuantizedImage::Srgb8(img) => img.width(),
            QuantizedImage::Linear16 { width, .. } => *width,
        }
    }

    pub fn height(&self) -> usize {
        match self {
            QuantizedImage::Srgb8(img) => img.height(),
            QuantizedImage::Linear16 { height, .. } => *height,
        }
    }

    pub fn encoding(&self) -> OutputEncoding {
        match self {
            QuantizedImage::Srgb8(_) => OutputEncoding::Srgb8,
            QuantizedImage::Linear16 { .. } => OutputEncoding::Linear16,
        }
    }

    /// Back to linear light at the stored precision.
    pub fn decode(&self) -> Result<LinearImage> {
        match self {
            QuantizedImage::Srgb8(img) => linearize(img, &InverseConfig::default()),
            QuantizedImage::Linear16 {
                width,
                height,
                samples,
            } => LinearImage::new(
                *width,
                *height,
                samples.iter().map(|p| p.map(|v| v as f64 / 65535.0)).collect(),
            ),
        }
    }
}

pub fn load_image(file: &ImageFile) -> Result<LinearImage> {
    match file.format {
        ImageFormat::Ppm16 => read_ppm16(&file.path)?.decode(),
        ImageFormat::Png16 | ImageFormat::Png8 => {
            let q = read_png(&fs::read(&file.path)?, &file.path)?;
            if q.encoding() != file.format.encoding() {
                return Err(malformed(
                    &file.path,
                    format!("declared {:?} but file holds {:?}", file.format, q.encoding()),
                ));
            }
            q.decode()
        }
    }
}

/// Reads an 8-bit PNG without linearizing it.
pub fn load_srgb8(path: &Path) -> Result<Srgb8Image> {
    match read_png(&fs::read(path)?, path)? {
        QuantizedImage::Srgb8(img) => Ok(img),
        QuantizedImage::Linear16 { .. } => Err(Error::UnsupportedFormat(format!(
            "{}: expected an 8-bit sRGB PNG, found 16-bit",
            path.display()
        ))),
    }
}

pub fn save_image(img: &LinearImage, file: &ImageFile) -> Result<()> {
    save_quantized(&QuantizedImage::encode(img, file.format.encoding()), file)
}

pub fn save_quantized(img: &QuantizedImage, file: &ImageFile) -> Result<()> {
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::InvalidImage("cannot save a zero-sized image".into()));
    }
    if img.encoding() != file.format.encoding() {
        return Err(Error::UnsupportedFormat(format!(
            "{:?} data cannot be stored as {:?}",
            img.encoding(),
            file.format
        )));
    }
    let bytes = match file.format {
        ImageFormat::Ppm16 => encode_ppm16(img)?,
        ImageFormat::Png16 | ImageFormat::Png8 => encode_png(img)?,
    };
    let mut out = BufWriter::new(File::create(&file.path)?);
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

pub fn encode_ppm16(img: &QuantizedImage) -> Result<Vec<u8>> {
    let QuantizedImage::Linear16 {
        width,
        height,
        samples,
    } = img
    else {
        return Err(Error::UnsupportedFormat("PPM output is 16-bit only".into()));
    };
    let mut out = format!("P6\n{width} {height}\n65535\n").into_bytes();
    out.reserve(samples.len() * 6);
    for p in samples {
        for v in p {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    Ok(out)
}

pub fn read_ppm16(path: &Path) -> Result<QuantizedImage> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_ppm16(&bytes).map_err(|reason| malformed(path, reason))
}

/// Parses a binary P6 with maxval in `256..=65535`; samples are rescaled to
/// the 16-bit range when maxval is below 65535.
pub fn decode_ppm16(bytes: &[u8]) -> std::result::Result<QuantizedImage, String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P6" {
        return Err("not a binary PPM (P6)".into());
    }
    let parse = |t: String, what: &str| -> std::result::Result<usize, String> {
        t.parse().map_err(|_| format!("invalid {what} `{t}`"))
    };
    let width = parse(token()?, "width")?;
    let height = parse(token()?, "height")?;
    let maxval = parse(token()?, "maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("zero dimension {width}x{height}"));
    }
    if !(256..=65535).contains(&maxval) {
        return Err(format!("maxval {maxval} is not a 16-bit PPM"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("truncated header".into());
    }
    pos += 1;
    let count = width
        .checked_mul(height)
        .filter(|n| n.checked_mul(6).is_some())
        .ok_or_else(|| format!("dimension overflow {width}x{height}"))?;
    let raster = &bytes[pos..];
    if raster.len() < count * 6 {
        return Err(format!(
            "truncated raster: expected {} bytes, found {}",
            count * 6,
            raster.len()
        ));
    }
    let samples = raster[..count * 6]
        .chunks_exact(6)
        .map(|c| {
            [0, 2, 4].map(|o| {
                let v = u16::from_be_bytes([c[o], c[o + 1]]) as u64;
                if maxval == 65535 {
                    v as u16
                } else {
                    ((v.min(maxval as u64) * 65535 + maxval as u64 / 2) / maxval as u64) as u16
                }
            })
        })
        .collect();
    Ok(QuantizedImage::Linear16 {
        width,
        height,
        samples,
    })
}

pub fn encode_png(img: &QuantizedImage) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut buf, img.width() as u32, img.height() as u32);
        encoder.set_color(png::ColorType::Rgb);
        let data: Vec<u8> = match img {
            QuantizedImage::Srgb8(s) => {
                encoder.set_depth(png::BitDepth::Eight);
                encoder.set_source_srgb(png::SrgbRenderingIntent::Perceptual);
                s.pixels().iter().flatten().copied().collect()
            }
            QuantizedImage::Linear16 { samples, .. } => {
                encoder.set_depth(png::BitDepth::Sixteen);
                encoder.set_source_gamma(png::ScaledFloat::new(1.0));
                samples.iter().flatten().flat_map(|v| v.to_be_bytes()).collect()
            }
        };
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::InvalidImage(e.to_string()))?;
        writer
            .write_image_data(&data)
            .map_err(|e| Error::InvalidImage(e.to_string()))?;
        writer.finish().map_err(|e| Error::InvalidImage(e.to_string()))?;
    }
    Ok(buf)
}

/// Decodes RGB, RGBA (alpha dropped), gray and gray-alpha PNGs at 8 or 16 bits.
pub fn read_png(bytes: &[u8], path: &Path) -> Result<QuantizedImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| malformed(path, e))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| malformed(path, "dimension overflow"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| malformed(path, e))?;
    let (width, height) = (info.width as usize, info.height as usize);
    let channels = match info.color_type {
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: PNG color type {other:?}",
                path.display()
            )))
        }
    };
    let rgb = |px: &[u16]| -> [u16; 3] {
        if channels < 3 {
            [px[0]; 3]
        } else {
            [px[0], px[1], px[2]]
        }
    };
    match info.bit_depth {
        png::BitDepth::Eight => {
            let pixels = buf[..info.line_size * height]
                .chunks_exact(info.line_size)
                .flat_map(|row| row[..width * channels].chunks_exact(channels))
                .map(|px| {
                    let wide: Vec<u16> = px.iter().map(|&v| v as u16).collect();
                    rgb(&wide).map(|v| v as u8)
                })
                .collect();
            Ok(QuantizedImage::Srgb8(Srgb8Image::new(width, height, pixels)?))
        }
        png::BitDepth::Sixteen => {
            let samples = buf[..info.line_size * height]
                .chunks_exact(info.line_size)
                .flat_map(|row| row[..width * channels * 2].chunks_exact(channels * 2))
                .map(|px| {
                    let wide: Vec<u16> = px
                        .chunks_exact(2)
                        .map(|b| u16::from_be_bytes([b[0], b[1]]))
                        .collect();
                    rgb(&wide)
                })
                .collect();
            Ok(QuantizedImage::Linear16 {
                width,
                height,
                samples,
            })
        }
        other => Err(Error::UnsupportedFormat(format!(
            "{}: PNG bit depth {other:?}",
            path.display()
        ))),
    }
}

/// Frame files (`.ppm`/`.png`) of a directory in lexicographic order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(extension(p).as_deref(), Some("ppm") | Some("png")))
        .collect();
    frames.sort();
    Ok(frames)
}
