//! Image containers, netpbm I/O, and the numeric primitives the featurizers
//! build on: grayscale conversion, separable Gaussian smoothing, first- and
//! second-order gradients, bilinear resize, crop, and the 512-bin RGB
//! histogram.
//!
//! Only binary PPM (P6) and PGM (P5) with maxval 255 are read or written;
//! other formats are expected to be converted beforehand.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// 8-bit RGB image, pixels row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("image dimensions must be > 0".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }
}

/// Real-valued single-channel image, values row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("image dimensions must be > 0".into()));
        }
        if values.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "value count {} does not match {width}x{height}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidImage("image contains non-finite values".into()));
        }
        Ok(GrayImage {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            values,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Value at (x, y) with coordinates clamped into bounds, so callers can
    /// read one past any edge and get the edge pixel back.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.values[y * self.width + x]
    }
}

// ---------------------------------------------------------------------------
// netpbm I/O

/// Pulls the next whitespace-delimited header token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b' ' | b'\t' | b'\r' | b'\n' => *pos += 1,
            b'#' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    } else {
        None
    }
}

/// Parses magic/width/height/maxval and returns the payload offset (one
/// whitespace byte past maxval).
fn parse_netpbm_header(
    bytes: &[u8],
    path: &Path,
    expected_magic: &str,
) -> Result<(usize, usize, usize)> {
    let mut pos = 0;
    let bad = |msg: String| Error::parse(path, 0, msg);
    let magic = next_token(bytes, &mut pos).ok_or_else(|| bad("empty file".into()))?;
    if magic != expected_magic {
        return Err(bad(format!(
            "bad magic number `{magic}` (expected {expected_magic})"
        )));
    }
    let mut dim = |name: &str| -> Result<usize> {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| bad(format!("missing {name}")))?;
        let v: usize = tok
            .parse()
            .map_err(|_| bad(format!("invalid {name} `{tok}`")))?;
        if name != "maxval" && v == 0 {
            return Err(bad(format!("{name} must be > 0")));
        }
        Ok(v)
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let maxval = dim("maxval")?;
    if maxval != 255 {
        return Err(bad(format!("maxval must be 255, got {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad("missing whitespace after maxval".into()));
    }
    pos += 1;
    Ok((width, height, pos))
}

/// Reads a binary P6 PPM with maxval 255.
pub fn load_ppm(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (width, height, offset) = parse_netpbm_header(&bytes, path, "P6")?;
    let need = width * height * 3;
    let payload = &bytes[offset..];
    if payload.len() < need {
        return Err(Error::parse(
            path,
            0,
            format!(
                "truncated payload: need {need} bytes for {width}x{height}, found {}",
                payload.len()
            ),
        ));
    }
    let pixels = payload[..need]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    RgbImage::new(width, height, pixels)
}

/// Reads a binary P5 PGM with maxval 255; values arrive as integers 0..=255.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (width, height, offset) = parse_netpbm_header(&bytes, path, "P5")?;
    let need = width * height;
    let payload = &bytes[offset..];
    if payload.len() < need {
        return Err(Error::parse(
            path,
            0,
            format!(
                "truncated payload: need {need} bytes for {width}x{height}, found {}",
                payload.len()
            ),
        ));
    }
    let values = payload[..need].iter().map(|&b| b as f64).collect();
    GrayImage::new(width, height, values)
}

pub fn write_ppm(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    for p in &img.pixels {
        bytes.extend_from_slice(p);
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes a P5 PGM, rounding values and clamping into 0..=255.
pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    bytes.extend(img.values.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Numeric primitives

/// BT.601 luma: 0.299 R + 0.587 G + 0.114 B.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let values = img
        .pixels
        .iter()
        .map(|&[r, g, b]| 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        values,
    }
}

/// 1-D Gaussian taps exp(−t²/2σ²) for t in −r..=r, r = ⌈3σ⌉, scaled to sum 1.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= sum;
    }
    kernel
}

/// Separable Gaussian blur with clamp-to-edge borders; output size unchanged.
pub fn gaussian_convolve(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "sigma must be a positive finite real, got {sigma}"
        )));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (img.width, img.height);

    // Horizontal pass.
    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &weight) in kernel.iter().enumerate() {
                acc += weight * img.get_clamped(x as isize + k as isize - radius, y as isize);
            }
            horiz[y * w + x] = acc;
        }
    }
    let horiz = GrayImage {
        width: w,
        height: h,
        values: horiz,
    };

    // Vertical pass.
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &weight) in kernel.iter().enumerate() {
                acc += weight * horiz.get_clamped(x as isize, y as isize + k as isize - radius);
            }
            out[y * w + x] = acc;
        }
    }
    Ok(GrayImage {
        width: w,
        height: h,
        values: out,
    })
}

/// First- and second-order gradient maps of a grayscale image.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub ix: GrayImage,
    pub iy: GrayImage,
    pub ixx: GrayImage,
    pub iyy: GrayImage,
    pub ixy: GrayImage,
}

impl Gradients {
    pub fn maps(&self) -> [&GrayImage; 5] {
        [&self.ix, &self.iy, &self.ixx, &self.iyy, &self.ixy]
    }
}

/// Central differences with clamp-to-edge borders:
/// Ix = (I(x+1,y) − I(x−1,y))/2, Ixx = I(x+1,y) − 2I(x,y) + I(x−1,y),
/// the y-direction analogously, and Ixy as the y central difference of the
/// Ix map.
pub fn gradients(img: &GrayImage) -> Result<Gradients> {
    if img.width < 3 || img.height < 3 {
        return Err(Error::InvalidImage(format!(
            "gradients need at least 3x3, got {}x{}",
            img.width, img.height
        )));
    }
    let (w, h) = (img.width, img.height);
    let map = |f: &dyn Fn(isize, isize) -> f64| GrayImage {
        width: w,
        height: h,
        values: {
            let mut v = Vec::with_capacity(w * h);
            for y in 0..h as isize {
                for x in 0..w as isize {
                    v.push(f(x, y));
                }
            }
            v
        },
    };
    let ix = map(&|x, y| (img.get_clamped(x + 1, y) - img.get_clamped(x - 1, y)) / 2.0);
    let iy = map(&|x, y| (img.get_clamped(x, y + 1) - img.get_clamped(x, y - 1)) / 2.0);
    let ixx = map(&|x, y| {
        img.get_clamped(x + 1, y) - 2.0 * img.get_clamped(x, y) + img.get_clamped(x - 1, y)
    });
    let iyy = map(&|x, y| {
        img.get_clamped(x, y + 1) - 2.0 * img.get_clamped(x, y) + img.get_clamped(x, y - 1)
    });
    let ixy = map(&|x, y| (ix.get_clamped(x, y + 1) - ix.get_clamped(x, y - 1)) / 2.0);
    Ok(Gradients {
        ix,
        iy,
        ixx,
        iyy,
        ixy,
    })
}

/// Bilinear resize with pixel-center alignment: destination pixel d samples
/// the source at (d + 0.5)·(src/dst) − 0.5, clamped into bounds.
pub fn resize_bilinear(img: &GrayImage, new_w: usize, new_h: usize) -> Result<GrayImage> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::InvalidInput(format!(
            "resize target must be at least 1x1, got {new_w}x{new_h}"
        )));
    }
    let sx = img.width as f64 / new_w as f64;
    let sy = img.height as f64 / new_h as f64;
    let mut values = Vec::with_capacity(new_w * new_h);
    for dy in 0..new_h {
        let src_y = ((dy as f64 + 0.5) * sy - 0.5).clamp(0.0, img.height as f64 - 1.0);
        let y0 = src_y.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let fy = src_y - y0 as f64;
        for dx in 0..new_w {
            let src_x = ((dx as f64 + 0.5) * sx - 0.5).clamp(0.0, img.width as f64 - 1.0);
            let x0 = src_x.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let fx = src_x - x0 as f64;
            let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
            let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
            values.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    Ok(GrayImage {
        width: new_w,
        height: new_h,
        values,
    })
}

/// Integer pixel rectangle of `bbox` rounded outward and clipped to the
/// image; errors when the box misses the image entirely.
fn crop_bounds(
    bbox: &BBox,
    width: usize,
    height: usize,
) -> Result<(usize, usize, usize, usize)> {
    let x0 = (bbox.x_min().floor().max(0.0) as usize).min(width);
    let y0 = (bbox.y_min().floor().max(0.0) as usize).min(height);
    let x1 = (bbox.x_max().ceil() as usize).min(width);
    let y1 = (bbox.y_max().ceil() as usize).min(height);
    if x0 >= x1 || y0 >= y1 {
        return Err(Error::InvalidInput(format!(
            "crop box {:?} lies outside a {width}x{height} image",
            bbox.as_array()
        )));
    }
    Ok((x0, y0, x1, y1))
}

pub fn crop_gray(img: &GrayImage, bbox: &BBox) -> Result<GrayImage> {
    let (x0, y0, x1, y1) = crop_bounds(bbox, img.width, img.height)?;
    let mut values = Vec::with_capacity((x1 - x0) * (y1 - y0));
    for y in y0..y1 {
        values.extend_from_slice(&img.values[y * img.width + x0..y * img.width + x1]);
    }
    Ok(GrayImage {
        width: x1 - x0,
        height: y1 - y0,
        values,
    })
}

pub fn crop_rgb(img: &RgbImage, bbox: &BBox) -> Result<RgbImage> {
    let (x0, y0, x1, y1) = crop_bounds(bbox, img.width, img.height)?;
    let mut pixels = Vec::with_capacity((x1 - x0) * (y1 - y0));
    for y in y0..y1 {
        pixels.extend_from_slice(&img.pixels[y * img.width + x0..y * img.width + x1]);
    }
    Ok(RgbImage {
        width: x1 - x0,
        height: y1 - y0,
        pixels,
    })
}

/// Number of RGB histogram bins (8 levels per channel).
pub const COLOR_HISTOGRAM_BINS: usize = 512;

/// Bin index of one pixel: ⌊R/32⌋·64 + ⌊G/32⌋·8 + ⌊B/32⌋.
#[inline]
pub fn color_bin(pixel: [u8; 3]) -> usize {
    (pixel[0] as usize / 32) * 64 + (pixel[1] as usize / 32) * 8 + pixel[2] as usize / 32
}

/// Raw per-bin pixel counts.
pub fn color_histogram_counts(img: &RgbImage) -> Vec<f64> {
    let mut hist = vec![0.0; COLOR_HISTOGRAM_BINS];
    for &p in &img.pixels {
        hist[color_bin(p)] += 1.0;
    }
    hist
}

/// L1-normalized color histogram; entries sum to 1.
pub fn color_histogram(img: &RgbImage) -> Vec<f64> {
    let mut hist = color_histogram_counts(img);
    let total = (img.width * img.height) as f64;
    for v in &mut hist {
        *v /= total;
    }
    hist
}
