//! Owned 8-bit RGB rasters, PNG I/O, and the shared bilinear sampler.
//!
//! All transforms in this crate operate on [`Raster`]: row-major RGB triples,
//! 8 bits per channel, computed in floating point and rounded-to-nearest with
//! clamping on write-back. Samplers clamp to the edge unless a transform
//! specifies a fill color.
//!
//! PNG writing is a self-contained encoder (8-bit RGB, filter 0, stored
//! deflate blocks) so the write path shares no code with the read path; the
//! read path decodes through the `image` crate. Round-tripping therefore
//! crosses two independent implementations and is bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },
    #[error("image dimensions must be at least 1x1")]
    InvalidDimension,
    #[error("pixel buffer length {got} does not match {width}x{height}x3")]
    BufferSize { width: u32, height: u32, got: usize },
}

/// Owned RGB image buffer. Immutable in practice: transforms return new
/// rasters, so values are safe to share between threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Raster {
    /// Uniform raster of the given fill color.
    pub fn new(width: u32, height: u32, fill: [u8; 3]) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidDimension);
        }
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&fill);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidDimension);
        }
        if pixels.len() != width as usize * height as usize * 3 {
            return Err(RasterError::BufferSize {
                width,
                height,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Rec. 601 luma of the pixel at (x, y).
    #[inline]
    pub fn luma(&self, x: u32, y: u32) -> f32 {
        let [r, g, b] = self.get(x, y);
        0.299 * r as f32 + 0.587 * g as f32 + 0.114 * b as f32
    }

    /// Bilinear sample at a fractional position, clamped to the edge.
    /// Integer positions return the pixel exactly.
    pub fn sample_bilinear(&self, x: f32, y: f32) -> [f32; 3] {
        let xf = x.floor();
        let yf = y.floor();
        let fx = x - xf;
        let fy = y - yf;
        let x0 = clamp_coord(xf as i64, self.width);
        let x1 = clamp_coord(xf as i64 + 1, self.width);
        let y0 = clamp_coord(yf as i64, self.height);
        let y1 = clamp_coord(yf as i64 + 1, self.height);
        let p00 = self.get(x0, y0);
        let p10 = self.get(x1, y0);
        let p01 = self.get(x0, y1);
        let p11 = self.get(x1, y1);
        let mut out = [0.0f32; 3];
        for c in 0..3 {
            let top = (1.0 - fx) * p00[c] as f32 + fx * p10[c] as f32;
            let bot = (1.0 - fx) * p01[c] as f32 + fx * p11[c] as f32;
            out[c] = (1.0 - fy) * top + fy * bot;
        }
        out
    }

    /// Bilinear resize to exactly (new_w, new_h). Pixel centers are aligned,
    /// so a same-size resize is the identity and constant images stay
    /// constant at any size.
    pub fn resize_bilinear(&self, new_w: u32, new_h: u32) -> Result<Raster, RasterError> {
        if new_w == 0 || new_h == 0 {
            return Err(RasterError::InvalidDimension);
        }
        let sx = self.width as f32 / new_w as f32;
        let sy = self.height as f32 / new_h as f32;
        let mut out = Raster::new(new_w, new_h, [0, 0, 0])?;
        for y in 0..new_h {
            let src_y = (y as f32 + 0.5) * sy - 0.5;
            for x in 0..new_w {
                let src_x = (x as f32 + 0.5) * sx - 0.5;
                out.set(x, y, quantize(self.sample_bilinear(src_x, src_y)));
            }
        }
        Ok(out)
    }
}

#[inline]
fn clamp_coord(v: i64, size: u32) -> u32 {
    v.clamp(0, size as i64 - 1) as u32
}

/// Round-to-nearest with clamping: the single write-back rule for all
/// float-domain transforms.
#[inline]
pub fn quantize(rgb: [f32; 3]) -> [u8; 3] {
    [quantize1(rgb[0]), quantize1(rgb[1]), quantize1(rgb[2])]
}

#[inline]
pub fn quantize1(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Per-pixel sign coverage in [0, 255]; 0 means background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaMask {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl AlphaMask {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        Self {
            width,
            height,
            values: vec![fill; width as usize * height as usize],
        }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<u8>) -> Option<Self> {
        (values.len() == width as usize * height as usize).then_some(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.values[y as usize * self.width as usize + x as usize] = v;
    }

    /// Coverage at (x, y) as a fraction in [0, 1].
    #[inline]
    pub fn coverage(&self, x: u32, y: u32) -> f32 {
        self.get(x, y) as f32 / 255.0
    }

    /// Bilinear sample in the [0, 255] domain, clamped to the edge.
    pub fn sample_bilinear(&self, x: f32, y: f32) -> f32 {
        let xf = x.floor();
        let yf = y.floor();
        let fx = x - xf;
        let fy = y - yf;
        let x0 = clamp_coord(xf as i64, self.width);
        let x1 = clamp_coord(xf as i64 + 1, self.width);
        let y0 = clamp_coord(yf as i64, self.height);
        let y1 = clamp_coord(yf as i64 + 1, self.height);
        let top = (1.0 - fx) * self.get(x0, y0) as f32 + fx * self.get(x1, y0) as f32;
        let bot = (1.0 - fx) * self.get(x0, y1) as f32 + fx * self.get(x1, y1) as f32;
        (1.0 - fy) * top + fy * bot
    }
}

/// Loads an 8-bit PNG as an RGB raster. Grayscale is replicated to three
/// channels; alpha is composited over opaque white.
pub fn load_png(path: &Path) -> Result<Raster, RasterError> {
    load_png_with_mask(path).map(|(raster, _)| raster)
}

/// Like [`load_png`], additionally returning the source alpha channel (when
/// one exists) as a mask for background compositing.
pub fn load_png_with_mask(path: &Path) -> Result<(Raster, Option<AlphaMask>), RasterError> {
    let bytes = fs::read(path).map_err(|source| RasterError::Io {
        path: path.to_owned(),
        source,
    })?;
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).map_err(
        |e| RasterError::Decode {
            path: path.to_owned(),
            reason: e.to_string(),
        },
    )?;
    use image::ColorType;
    let has_alpha = match img.color() {
        ColorType::L8 | ColorType::Rgb8 => false,
        ColorType::La8 | ColorType::Rgba8 => true,
        other => {
            return Err(RasterError::Decode {
                path: path.to_owned(),
                reason: format!("unsupported bit depth / color type {other:?}"),
            })
        }
    };
    let rgba = img.to_rgba8();
    let (width, height) = rgba.dimensions();
    let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
    let mut alpha = has_alpha.then(|| Vec::with_capacity(width as usize * height as usize));
    for p in rgba.pixels() {
        let a = p.0[3] as u32;
        for c in 0..3 {
            // Rounded integer compositing over white: (c*a + 255*(255-a)) / 255.
            let v = (p.0[c] as u32 * a + 255 * (255 - a) + 127) / 255;
            pixels.push(v as u8);
        }
        if let Some(alpha) = alpha.as_mut() {
            alpha.push(p.0[3]);
        }
    }
    let raster = Raster::from_pixels(width, height, pixels)?;
    let mask = alpha.map(|values| AlphaMask {
        width,
        height,
        values,
    });
    Ok((raster, mask))
}

/// Writes a lossless 8-bit RGB PNG. Output bytes are a pure function of the
/// pixel data, so identical rasters always produce identical files.
pub fn save_png(raster: &Raster, path: &Path) -> Result<(), RasterError> {
    fs::write(path, encode_png(raster)).map_err(|source| RasterError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Minimal PNG encoder: 8-bit RGB, no interlace, filter type 0 on every
/// scanline, zlib stream with stored (uncompressed) deflate blocks.
pub fn encode_png(raster: &Raster) -> Vec<u8> {
    // Raw scanline stream: one filter byte per row.
    let w = raster.width as usize;
    let mut raw = Vec::with_capacity(raster.height as usize * (1 + w * 3));
    for y in 0..raster.height as usize {
        raw.push(0u8);
        raw.extend_from_slice(&raster.pixels[y * w * 3..(y + 1) * w * 3]);
    }

    // zlib wrapper: 32K-window deflate, lowest-effort flags (0x78 0x01).
    let mut zlib = vec![0x78u8, 0x01];
    let mut chunks = raw.chunks(0xFFFF).peekable();
    while let Some(block) = chunks.next() {
        let last = chunks.peek().is_none();
        zlib.push(if last { 0x01 } else { 0x00 });
        let len = block.len() as u16;
        zlib.extend_from_slice(&len.to_le_bytes());
        zlib.extend_from_slice(&(!len).to_le_bytes());
        zlib.extend_from_slice(block);
    }
    zlib.extend_from_slice(&adler32(&raw).to_be_bytes());

    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&raster.width.to_be_bytes());
    ihdr.extend_from_slice(&raster.height.to_be_bytes());
    // bit depth 8, color type 2 (RGB), compression 0, filter 0, interlace 0
    ihdr.extend_from_slice(&[8, 2, 0, 0, 0]);

    let mut out = Vec::with_capacity(zlib.len() + 128);
    out.extend_from_slice(&[137, 80, 78, 71, 13, 10, 26, 10]);
    write_chunk(&mut out, b"IHDR", &ihdr);
    write_chunk(&mut out, b"IDAT", &zlib);
    write_chunk(&mut out, b"IEND", &[]);
    out
}

fn write_chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    let mut crc = Crc32::new();
    crc.update(kind);
    crc.update(data);
    out.extend_from_slice(&crc.finish().to_be_bytes());
}

struct Crc32 {
    state: u32,
}

impl Crc32 {
    fn new() -> Self {
        Self { state: 0xFFFF_FFFF }
    }

    fn update(&mut self, data: &[u8]) {
        for &byte in data {
            let mut c = (self.state ^ byte as u32) & 0xFF;
            for _ in 0..8 {
                c = if c & 1 != 0 {
                    0xEDB8_8320 ^ (c >> 1)
                } else {
                    c >> 1
                };
            }
            self.state = c ^ (self.state >> 8);
        }
    }

    fn finish(self) -> u32 {
        self.state ^ 0xFFFF_FFFF
    }
}

fn adler32(data: &[u8]) -> u32 {
    const MOD: u32 = 65521;
    let mut a: u32 = 1;
    let mut b: u32 = 0;
    for chunk in data.chunks(5552) {
        for &byte in chunk {
            a += byte as u32;
            b += a;
        }
        a %= MOD;
        b %= MOD;
    }
    (b << 16) | a
}
