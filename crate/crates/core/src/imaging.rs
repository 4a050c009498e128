//! Grayscale raster input and the two image → point cloud conversions
//! (block-average resize and thresholded component centroids).

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pointcloud::{Point2, PointCloud, Source};

/// Downsampled pixels at or below this normalized value count as background.
pub const NONZERO_EPS: f64 = 1.0 / 512.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// Row-major grayscale image with intensities normalized to [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
    pub bit_depth_origin: BitDepth,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {width}x{height} image",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("intensity {v} outside [0, 1]")));
        }
        Ok(GrayImage {
            width,
            height,
            data,
            bit_depth_origin: BitDepth::Eight,
        })
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

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Quantizes to 8 bits and writes a binary (P5) PGM.
    pub fn write_pgm8(&self, path: &Path) -> Result<()> {
        let raw: Vec<u16> = self
            .data
            .iter()
            .map(|v| (v * 255.0).round() as u16)
            .collect();
        write_pgm(path, self.width, self.height, 255, &raw)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn from_bits(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {width}x{height} mask",
                data.len()
            )));
        }
        if data.iter().any(|&b| b > 1) {
            return Err(Error::invalid("mask values must be 0 or 1"));
        }
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn is_set(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col] == 1
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b == 1).count()
    }
}

/// Raw PGM contents before normalization.
#[derive(Clone, Debug)]
pub(crate) struct RawPgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub data: Vec<u16>,
}

pub(crate) fn read_pgm(path: &Path) -> Result<RawPgm> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|reason| Error::ImageDecode {
        path: path.to_path_buf(),
        reason,
    })
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<RawPgm, String> {
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> std::result::Result<String, String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
            *pos += 1;
        }
        if start == *pos {
            return Err("unexpected end of header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = next_token(&mut pos)?;
    let ascii = match magic.as_str() {
        "P2" => true,
        "P5" => false,
        "P3" | "P6" => return Err("multi-channel PNM is not supported".into()),
        other => return Err(format!("not a PGM file (magic {other:?})")),
    };
    let header_num = |pos: &mut usize, what: &str| -> std::result::Result<usize, String> {
        let tok = next_token(pos)?;
        tok.parse::<usize>()
            .map_err(|_| format!("bad {what} {tok:?}"))
    };
    let width = header_num(&mut pos, "width")?;
    let height = header_num(&mut pos, "height")?;
    let maxval = header_num(&mut pos, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let n = width * height;
    let mut data = Vec::with_capacity(n);
    if ascii {
        for _ in 0..n {
            let v = header_num(&mut pos, "pixel")?;
            if v > maxval {
                return Err(format!("pixel {v} above maxval {maxval}"));
            }
            data.push(v as u16);
        }
    } else {
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let wide = maxval > 255;
        let need = n * if wide { 2 } else { 1 };
        let raster = bytes
            .get(pos..pos + need)
            .ok_or_else(|| format!("raster truncated: need {need} bytes"))?;
        if wide {
            data.extend(raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
        } else {
            data.extend(raster.iter().map(|&b| b as u16));
        }
        if let Some(v) = data.iter().find(|&&v| v as usize > maxval) {
            return Err(format!("pixel {v} above maxval {maxval}"));
        }
    }
    Ok(RawPgm {
        width,
        height,
        maxval: maxval as u16,
        data,
    })
}

/// Writes a binary PGM; samples are big-endian 16-bit when `maxval > 255`.
pub(crate) fn write_pgm(
    path: &Path,
    width: usize,
    height: usize,
    maxval: u16,
    data: &[u16],
) -> Result<()> {
    let mut out = Vec::with_capacity(32 + data.len() * 2);
    let _ = write!(out, "P5\n{width} {height}\n{maxval}\n");
    if maxval > 255 {
        for v in data {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(data.iter().map(|&v| v as u8));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<GrayImage> {
    let unsupported = |reason: String| Error::UnsupportedImage {
        path: path.to_path_buf(),
        reason,
    };
    let decode_err = |e: png::DecodingError| Error::ImageDecode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(decode_err)?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale {
        return Err(unsupported(format!(
            "color type {:?}; only single-channel grayscale is accepted",
            info.color_type
        )));
    }
    let depth = match info.bit_depth {
        png::BitDepth::Eight => BitDepth::Eight,
        png::BitDepth::Sixteen => BitDepth::Sixteen,
        other => return Err(unsupported(format!("bit depth {other:?}"))),
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let frame = reader.next_frame(&mut buf).map_err(decode_err)?;
    let buf = &buf[..frame.buffer_size()];
    let data: Vec<f64> = match depth {
        BitDepth::Eight => buf.iter().map(|&b| b as f64 / 255.0).collect(),
        BitDepth::Sixteen => buf
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / 65535.0)
            .collect(),
    };
    let mut img = GrayImage::new(width, height, data)?;
    img.bit_depth_origin = depth;
    Ok(img)
}

/// Loads an 8- or 16-bit single-channel PNG or PGM, scaling intensities into [0, 1].
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"\x89PNG") {
        return decode_png(path, &bytes);
    }
    let raw = parse_pgm(&bytes).map_err(|reason| Error::ImageDecode {
        path: path.to_path_buf(),
        reason,
    })?;
    let scale = raw.maxval as f64;
    let data = raw.data.iter().map(|&v| v as f64 / scale).collect();
    let mut img = GrayImage::new(raw.width, raw.height, data)?;
    img.bit_depth_origin = if raw.maxval > 255 {
        BitDepth::Sixteen
    } else {
        BitDepth::Eight
    };
    Ok(img)
}

/// Marks every pixel at or above the intensity of the `ceil(fraction * N)`-th
/// brightest pixel. Ties with the cutoff value are all included.
pub fn threshold_top_fraction(img: &GrayImage, fraction: f64) -> Result<BinaryMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if img.is_empty() {
        return Err(Error::invalid("cannot threshold an empty image"));
    }
    let n = img.data.len();
    let mut sorted = img.data.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let keep = ((fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let cutoff = sorted[keep - 1];
    let data = img.data.iter().map(|&v| u8::from(v >= cutoff)).collect();
    Ok(BinaryMask {
        width: img.width,
        height: img.height,
        data,
    })
}

/// Block-average downsample to `grid × grid` and emit the centre of every cell
/// brighter than [`NONZERO_EPS`], in grid units. Remainder pixels fold into the
/// last row/column of blocks.
pub fn resize_pointcloud(img: &GrayImage, grid: usize) -> Result<PointCloud> {
    if grid == 0 {
        return Err(Error::invalid("grid must be positive"));
    }
    if grid > img.width.min(img.height) {
        return Err(Error::invalid(format!(
            "grid {grid} exceeds image size {}x{}",
            img.width, img.height
        )));
    }
    let (bw, bh) = (img.width / grid, img.height / grid);
    let span = |cell: usize, block: usize, total: usize| {
        let start = cell * block;
        let end = if cell + 1 == grid { total } else { start + block };
        start..end
    };
    let mut points = Vec::new();
    for row in 0..grid {
        let rows = span(row, bh, img.height);
        for col in 0..grid {
            let cols = span(col, bw, img.width);
            let mut sum = 0.0;
            for r in rows.clone() {
                sum += img.data[r * img.width + cols.start..r * img.width + cols.end]
                    .iter()
                    .sum::<f64>();
            }
            let mean = sum / (rows.len() * cols.len()) as f64;
            if mean > NONZERO_EPS {
                points.push(Point2::new(col as f64 + 0.5, row as f64 + 0.5));
            }
        }
    }
    Ok(PointCloud::from_points_unchecked(points, Source::Resize))
}

/// One labelled 8-connected component of a mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub area: usize,
    /// Mean (column, row) of member pixels.
    pub centroid: Point2,
}

/// 8-connected components in raster order of their first pixel, via two-pass
/// labelling with union-find.
pub fn connected_components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = (mask.width, mask.height);
    let mut labels = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0];
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for r in 0..h {
        for c in 0..w {
            if mask.data[r * w + c] == 0 {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut k = 0;
            if c > 0 {
                neighbours[k] = labels[r * w + c - 1];
                k += 1;
            }
            if r > 0 {
                for dc in [-1i64, 0, 1] {
                    let cc = c as i64 + dc;
                    if cc >= 0 && (cc as usize) < w {
                        neighbours[k] = labels[(r - 1) * w + cc as usize];
                        k += 1;
                    }
                }
            }
            let mut label = 0;
            for &n in neighbours[..k].iter().filter(|&&n| n != 0) {
                let root = find(&mut parent, n);
                if label == 0 {
                    label = root;
                } else if root != label {
                    let (lo, hi) = (label.min(root), label.max(root));
                    parent[hi as usize] = lo;
                    label = lo;
                }
            }
            if label == 0 {
                label = parent.len() as u32;
                parent.push(label);
            }
            labels[r * w + c] = label;
        }
    }

    // second pass: accumulate per root, ordered by first appearance
    let mut slot = vec![usize::MAX; parent.len()];
    let mut acc: Vec<(usize, f64, f64)> = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let l = labels[r * w + c];
            if l == 0 {
                continue;
            }
            let root = find(&mut parent, l) as usize;
            if slot[root] == usize::MAX {
                slot[root] = acc.len();
                acc.push((0, 0.0, 0.0));
            }
            let a = &mut acc[slot[root]];
            a.0 += 1;
            a.1 += c as f64;
            a.2 += r as f64;
        }
    }
    acc.into_iter()
        .map(|(area, sx, sy)| Component {
            area,
            centroid: Point2::new(sx / area as f64, sy / area as f64),
        })
        .collect()
}

/// One point per 8-connected component (of area ≥ `min_area`) of the mask.
pub fn mask_centroids(mask: &BinaryMask, min_area: usize) -> PointCloud {
    let points = connected_components(mask)
        .into_iter()
        .filter(|c| c.area >= min_area)
        .map(|c| c.centroid)
        .collect();
    PointCloud::from_points_unchecked(points, Source::Contour)
}

/// Thresholds the top `fraction` of pixels and returns component centroids in
/// pixel coordinates.
pub fn contour_pointcloud(img: &GrayImage, fraction: f64, min_area: usize) -> Result<PointCloud> {
    let mask = threshold_top_fraction(img, fraction)?;
    Ok(mask_centroids(&mask, min_area))
}
