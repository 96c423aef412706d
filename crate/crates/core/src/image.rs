//! Grayscale images as row-major `f64` in `[0, 1]`, with 8-bit file I/O.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn column(&self, x: usize) -> Vec<f64> {
        (0..self.height).map(|y| self.get(x, y)).collect()
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::DimensionMismatch("rows differ in length".into()));
        }
        Self::new(width, height, rows.concat())
    }

    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self> {
        let width = cols.len();
        let height = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != height) {
            return Err(Error::DimensionMismatch("columns differ in length".into()));
        }
        Ok(Self::from_fn(width, height, |x, y| cols[x][y]))
    }

    /// Rounds to the 8-bit grid and back, clamping to `[0, 1]`.
    pub fn quantized(&self) -> Self {
        Self {
            data: self.data.iter().map(|&v| to_u8(v) as f64 / 255.0).collect(),
            ..self.clone()
        }
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_u8(v)).collect()
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            bytes.iter().map(|&b| b as f64 / 255.0).collect(),
        )
    }
}

fn to_u8(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Reads and writes one image file format.
pub trait ImageCodec {
    fn decode(&self, bytes: &[u8]) -> Result<ImageBuffer>;
    fn encode(&self, img: &ImageBuffer) -> Result<Vec<u8>>;
}

/// Binary (P5) and ASCII (P2) graymaps. Writes P5.
#[derive(Clone, Copy, Debug, Default)]
pub struct PgmCodec;

impl ImageCodec for PgmCodec {
    fn decode(&self, bytes: &[u8]) -> Result<ImageBuffer> {
        let mut r = BufReader::new(bytes);
        let magic = next_token(&mut r)?;
        let binary = match magic.as_str() {
            "P5" => true,
            "P2" => false,
            other => return Err(Error::Parse(format!("unsupported PNM magic {other:?}"))),
        };
        let width = parse_header_field(&mut r, "width")?;
        let height = parse_header_field(&mut r, "height")?;
        let maxval = parse_header_field(&mut r, "maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Parse(format!("maxval {maxval} out of range")));
        }
        let n = width * height;
        let scale = maxval as f64;
        let data = if binary {
            let wide = maxval > 255;
            let mut raw = vec![0u8; if wide { 2 * n } else { n }];
            r.read_exact(&mut raw)
                .map_err(|_| Error::Parse("truncated pixel data".into()))?;
            if wide {
                raw.chunks(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
                    .collect()
            } else {
                raw.iter().map(|&b| b as f64 / scale).collect()
            }
        } else {
            (0..n)
                .map(|_| Ok(parse_header_field(&mut r, "pixel")? as f64 / scale))
                .collect::<Result<Vec<_>>>()?
        };
        ImageBuffer::new(width, height, data)
    }

    fn encode(&self, img: &ImageBuffer) -> Result<Vec<u8>> {
        let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
        out.extend(img.to_u8());
        Ok(out)
    }
}

fn next_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            break;
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut skip = Vec::new();
            r.read_until(b'\n', &mut skip)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(c as char);
    }
    if tok.is_empty() {
        return Err(Error::Parse("unexpected end of PNM header".into()));
    }
    Ok(tok)
}

fn parse_header_field<R: BufRead>(r: &mut R, what: &str) -> Result<usize> {
    let tok = next_token(r)?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad {what} {tok:?}")))
}

#[cfg(feature = "png")]
#[derive(Clone, Copy, Debug, Default)]
pub struct PngCodec;

#[cfg(feature = "png")]
impl ImageCodec for PngCodec {
    fn decode(&self, bytes: &[u8]) -> Result<ImageBuffer> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| Error::Parse(e.to_string()))?
            .into_luma8();
        ImageBuffer::from_u8(img.width() as usize, img.height() as usize, img.as_raw())
    }

    fn encode(&self, img: &ImageBuffer) -> Result<Vec<u8>> {
        let buf = image::GrayImage::from_raw(img.width as u32, img.height as u32, img.to_u8())
            .ok_or_else(|| Error::DimensionMismatch("pixel count".into()))?;
        let mut out = std::io::Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(out.into_inner())
    }
}

/// Picks a codec from the file extension.
pub fn codec_for(path: &Path) -> Result<Box<dyn ImageCodec>> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" | "pnm" => Ok(Box::new(PgmCodec)),
        #[cfg(feature = "png")]
        "png" => Ok(Box::new(PngCodec)),
        _ => Err(Error::InvalidArgument(format!(
            "unsupported image format: {}",
            path.display()
        ))),
    }
}

pub fn is_supported_image(path: &Path) -> bool {
    codec_for(path).is_ok()
}

pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let codec = codec_for(path)?;
    codec.decode(&std::fs::read(path)?)
}

pub fn write_image(path: &Path, img: &ImageBuffer) -> Result<()> {
    let codec = codec_for(path)?;
    let bytes = codec.encode(img)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}
