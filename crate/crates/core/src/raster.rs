//! 8-bit grayscale and binary rasters plus binary PGM (P5) I/O.
//!
//! Storage is row-major with the origin at the top-left corner: `x` is the
//! column index and `y` the row index.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RasterError {
    #[error("image dimensions must be non-zero (got {width}x{height})")]
    ZeroDimension { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values but {width}x{height} needs {expected}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("PGM parse error at byte {offset}: {kind}")]
pub struct PgmError {
    pub offset: usize,
    pub kind: PgmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmErrorKind {
    #[error("bad magic number, expected \"P5\"")]
    BadMagic,
    #[error("unexpected end of header")]
    TruncatedHeader,
    #[error("expected whitespace")]
    ExpectedWhitespace,
    #[error("expected a decimal number")]
    ExpectedNumber,
    #[error("header number out of range")]
    NumberOverflow,
    #[error("zero image dimension")]
    ZeroDimension,
    #[error("maxval {0} is outside 1..=255")]
    BadMaxval(u32),
    #[error("pixel data truncated: need {needed} bytes, found {found}")]
    TruncatedData { needed: usize, found: usize },
    #[error("pixel value {value} exceeds maxval {maxval}")]
    ValueAboveMaxval { value: u8, maxval: u8 },
    #[error("{0} trailing bytes after pixel data")]
    TrailingData(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(RasterError::ZeroDimension { width, height })?;
        if pixels.len() != expected {
            return Err(RasterError::BufferSize {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, RasterError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, RasterError> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with coordinates clamped into the image (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    /// Applies `f` to every intensity, keeping dimensions.
    pub fn map(&self, f: impl Fn(u8) -> u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension { width, height });
        }
        let expected = width * height;
        if bits.len() != expected {
            return Err(RasterError::BufferSize {
                width,
                height,
                expected,
                actual: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// All-background image.
    pub fn empty(width: usize, height: usize) -> Result<Self, RasterError> {
        Self::new(width, height, vec![false; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, RasterError> {
        let mut bits = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Off-image coordinates read as background.
    #[inline]
    pub fn get_or_background(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            false
        } else {
            self.get(x as usize, y as usize)
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Renders foreground as 255 and background as 0.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}

/// `bit = pixel >= t`.
pub fn threshold(img: &GrayImage, t: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&p| p >= t).collect(),
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn err(&self, kind: PgmErrorKind) -> PgmError {
        PgmError {
            offset: self.pos,
            kind,
        }
    }

    /// Skips at least one whitespace byte, along with `#` comments.
    fn skip_separator(&mut self) -> Result<(), PgmError> {
        let start = self.pos;
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(self.err(PgmErrorKind::TruncatedHeader)),
            }
        }
        if self.pos == start {
            return Err(self.err(PgmErrorKind::ExpectedWhitespace));
        }
        Ok(())
    }

    fn number(&mut self) -> Result<u32, PgmError> {
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u32::from(b - b'0')))
                .ok_or(PgmError {
                    offset: start,
                    kind: PgmErrorKind::NumberOverflow,
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(if self.pos >= self.bytes.len() {
                PgmErrorKind::TruncatedHeader
            } else {
                PgmErrorKind::ExpectedNumber
            }));
        }
        Ok(value)
    }
}

/// Decodes a binary PGM (`P5`, maxval at most 255).
///
/// Pixel values are returned as stored; they are not rescaled when maxval is
/// below 255.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    if bytes.len() < 2 {
        return Err(cur.err(PgmErrorKind::TruncatedHeader));
    }
    if &bytes[..2] != b"P5" {
        return Err(cur.err(PgmErrorKind::BadMagic));
    }
    cur.pos = 2;
    cur.skip_separator()?;
    let width_at = cur.pos;
    let width = cur.number()?;
    cur.skip_separator()?;
    let height = cur.number()?;
    if width == 0 || height == 0 {
        return Err(PgmError {
            offset: width_at,
            kind: PgmErrorKind::ZeroDimension,
        });
    }
    cur.skip_separator()?;
    let maxval_at = cur.pos;
    let maxval = cur.number()?;
    if !(1..=255).contains(&maxval) {
        return Err(PgmError {
            offset: maxval_at,
            kind: PgmErrorKind::BadMaxval(maxval),
        });
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(cur.err(PgmErrorKind::ExpectedWhitespace)),
        None => return Err(cur.err(PgmErrorKind::TruncatedHeader)),
    }

    let data_at = cur.pos;
    let needed = (width as usize)
        .checked_mul(height as usize)
        .ok_or(PgmError {
            offset: width_at,
            kind: PgmErrorKind::NumberOverflow,
        })?;
    let available = bytes.len() - data_at;
    if available < needed {
        return Err(PgmError {
            offset: bytes.len(),
            kind: PgmErrorKind::TruncatedData {
                needed,
                found: available,
            },
        });
    }
    if available > needed {
        return Err(PgmError {
            offset: data_at + needed,
            kind: PgmErrorKind::TrailingData(available - needed),
        });
    }
    let data = &bytes[data_at..];
    let maxval = maxval as u8;
    if let Some(i) = data.iter().position(|&v| v > maxval) {
        return Err(PgmError {
            offset: data_at + i,
            kind: PgmErrorKind::ValueAboveMaxval {
                value: data[i],
                maxval,
            },
        });
    }
    Ok(GrayImage {
        width: width as usize,
        height: height as usize,
        pixels: data.to_vec(),
    })
}

/// Encodes `img` as canonical binary PGM: `"P5\n<w> <h>\n255\n"` then raw rows.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}
