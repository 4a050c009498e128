//! Image → point cloud → alpha diagram → silhouette or signature feature.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;

use crate::complex::{build_alpha, build_cech, build_rips, Convention};
use crate::error::{Error, Result};
use crate::imaging::{contour_pointcloud, load_gray, resize_pointcloud};
use crate::persistence::{diagram, PersistenceDiagram};
use crate::pointcloud::PointCloud;
use crate::signature::{signature_feature, FEATURE_K, FEATURE_LEN, FEATURE_LEVEL};
use crate::vectorize::{silhouette_feature, LANDSCAPE_RESOLUTION, SILHOUETTE_RESOLUTION};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudMethod {
    Resize,
    Contour,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Silhouette,
    Signature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformerConfig {
    pub cloud_method: CloudMethod,
    pub feature: FeatureKind,
    pub grid: usize,
    pub fraction: f64,
    /// Silhouette samples per dimension; signature features always use
    /// landscapes sampled at 100.
    pub resolution: usize,
    pub k_max: usize,
    pub max_level: usize,
    pub min_area: usize,
    pub seed: u64,
}

impl TransformerConfig {
    pub fn new(cloud_method: CloudMethod, feature: FeatureKind) -> Self {
        TransformerConfig {
            cloud_method,
            feature,
            grid: 64,
            fraction: 0.05,
            resolution: match feature {
                FeatureKind::Silhouette => SILHOUETTE_RESOLUTION,
                FeatureKind::Signature => LANDSCAPE_RESOLUTION,
            },
            k_max: FEATURE_K,
            max_level: FEATURE_LEVEL,
            min_area: 1,
            seed: 0,
        }
    }

    /// `(rows, columns)` of the feature.
    pub fn shape(&self) -> (usize, usize) {
        match self.feature {
            FeatureKind::Silhouette => (2, self.resolution),
            FeatureKind::Signature => (2, FEATURE_LEN),
        }
    }

    pub fn feature_len(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature == FeatureKind::Signature
            && (self.k_max != FEATURE_K || self.max_level != FEATURE_LEVEL || self.resolution != LANDSCAPE_RESOLUTION)
        {
            return Err(Error::invalid(
                "signature features are fixed at 5 landscapes, resolution 100, level 3",
            ));
        }
        if self.resolution < 2 {
            return Err(Error::invalid("resolution must be >= 2"));
        }
        if self.grid == 0 {
            return Err(Error::invalid("grid must be positive"));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::invalid(format!("fraction must be in (0, 1], got {}", self.fraction)));
        }
        Ok(())
    }
}

impl fmt::Display for TransformerConfig {
    /// Transformer name, e.g. `Resize_silhouette`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.cloud_method {
            CloudMethod::Resize => "Resize",
            CloudMethod::Contour => "Contour",
        };
        let k = match self.feature {
            FeatureKind::Silhouette => "silhouette",
            FeatureKind::Signature => "signature",
        };
        write!(f, "{m}_{k}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub id: String,
    pub label: Option<String>,
    pub values: Vec<f64>,
    pub shape: (usize, usize),
    /// The point cloud was too small or collinear; `values` are all zero.
    pub degenerate: bool,
}

pub fn image_to_cloud(img: &crate::imaging::GrayImage, cfg: &TransformerConfig) -> Result<PointCloud> {
    match cfg.cloud_method {
        CloudMethod::Resize => resize_pointcloud(img, cfg.grid),
        CloudMethod::Contour => contour_pointcloud(img, cfg.fraction, cfg.min_area),
    }
}

pub fn diagram_feature(d: &PersistenceDiagram, cfg: &TransformerConfig) -> Result<Vec<f64>> {
    match cfg.feature {
        FeatureKind::Silhouette => silhouette_feature(d, cfg.resolution),
        FeatureKind::Signature => signature_feature(d),
    }
}

/// Feature of a point cloud. Degenerate clouds give a zero vector and `true`.
pub fn cloud_feature(pc: &PointCloud, cfg: &TransformerConfig) -> Result<(Vec<f64>, bool)> {
    match build_alpha(pc) {
        Ok(fc) => Ok((diagram_feature(&diagram(&fc), cfg)?, false)),
        Err(Error::Collinear(_)) => Ok((vec![0.0; cfg.feature_len()], true)),
        Err(e) => Err(e),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

pub fn extract(img_path: &Path, cfg: &TransformerConfig) -> Result<FeatureRecord> {
    cfg.validate()?;
    let img = load_gray(img_path)?;
    let pc = image_to_cloud(&img, cfg)?;
    let (values, degenerate) = cloud_feature(&pc, cfg)?;
    if degenerate {
        warn!(
            "{}: {} point(s) do not span a triangle, writing a zero feature",
            img_path.display(),
            pc.len()
        );
    }
    Ok(FeatureRecord {
        id: stem(img_path),
        label: None,
        values,
        shape: cfg.shape(),
        degenerate,
    })
}

fn is_image(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "png"))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        v.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    v.sort();
    Ok(v)
}

/// Images directly in `dir` (unlabelled) and one level down (labelled by
/// subdirectory name), as `(path, label)`.
pub fn list_images(dir: &Path) -> Result<Vec<(PathBuf, Option<String>)>> {
    let mut out = Vec::new();
    for path in sorted_entries(dir)? {
        if path.is_dir() {
            let label = path.file_name().map(|s| s.to_string_lossy().into_owned());
            for inner in sorted_entries(&path)? {
                if is_image(&inner) {
                    out.push((inner, label.clone()));
                }
            }
        } else if is_image(&path) {
            out.push((path, None));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BatchSummary {
    pub processed: usize,
    pub degenerate: usize,
    pub failed: usize,
}

pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["id".to_string(), "label".to_string()];
    h.extend((0..n).map(|i| format!("f_{i}")));
    h
}

pub fn write_records(out: &Path, records: &[FeatureRecord], n: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(out).map_err(|e| Error::io(out, std::io::Error::other(e)))?;
    let io = |e: csv::Error| Error::io(out, std::io::Error::other(e));
    w.write_record(csv_header(n)).map_err(io)?;
    for r in records {
        let mut row = Vec::with_capacity(n + 2);
        row.push(r.id.clone());
        row.push(r.label.clone().unwrap_or_default());
        row.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(out, e))
}

/// Extracts every image under `dir` with `threads` workers and writes a CSV
/// sorted by `(id, label)`. Images that fail are logged and skipped.
pub fn extract_batch(dir: &Path, cfg: &TransformerConfig, out: &Path, threads: usize) -> Result<BatchSummary> {
    cfg.validate()?;
    let images = list_images(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(PathBuf, Result<FeatureRecord>)> = pool.install(|| {
        images
            .par_iter()
            .map(|(path, label)| {
                let rec = extract(path, cfg).map(|mut r| {
                    r.label = label.clone();
                    r
                });
                (path.clone(), rec)
            })
            .collect()
    });
    let mut summary = BatchSummary::default();
    let mut records = Vec::with_capacity(results.len());
    for (path, r) in results {
        match r {
            Ok(rec) => {
                summary.processed += 1;
                summary.degenerate += rec.degenerate as usize;
                records.push(rec);
            }
            Err(e) => {
                warn!("{}: {e}", path.display());
                summary.failed += 1;
            }
        }
    }
    records.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.label.cmp(&b.label)));
    write_records(out, &records, cfg.feature_len())?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexKind {
    Rips,
    Cech,
    Alpha,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramOptions {
    pub complex: ComplexKind,
    /// Report Čech values as squared radii, the alpha scale.
    pub squared: bool,
    pub max_dim: usize,
    pub max_value: f64,
    /// Grid for image inputs, which go through the resize method.
    pub grid: usize,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        DiagramOptions {
            complex: ComplexKind::Alpha,
            squared: false,
            max_dim: 2,
            max_value: f64::INFINITY,
            grid: 64,
        }
    }
}

/// Diagram of a point-cloud text file or (PGM/PNG) image.
pub fn diagram_cmd(input: &Path, opts: &DiagramOptions) -> Result<PersistenceDiagram> {
    let pc = if is_image(input) {
        resize_pointcloud(&load_gray(input)?, opts.grid)?
    } else {
        PointCloud::read(input)?
    };
    let fc = match opts.complex {
        ComplexKind::Rips => build_rips(&pc, opts.max_dim, opts.max_value)?,
        ComplexKind::Cech => build_cech(&pc, opts.max_dim.min(2), opts.max_value)?,
        ComplexKind::Alpha => build_alpha(&pc)?,
    };
    let d = diagram(&fc);
    if opts.squared && d.convention == Convention::CechRadius {
        d.rescaled(Convention::AlphaSquaredRadius)
    } else {
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayImage;
    use crate::pointcloud::sample_annulus;

    fn annulus_image(size: usize) -> GrayImage {
        let pc = sample_annulus(300, 0.5, 1.0, 42).unwrap();
        let mut data = vec![0.0; size * size];
        let half = size as f64 / 2.0;
        for p in pc.points() {
            let c = ((p.x * 0.9 + 1.0) * half) as usize;
            let r = ((p.y * 0.9 + 1.0) * half) as usize;
            data[r.min(size - 1) * size + c.min(size - 1)] = 1.0;
        }
        GrayImage::new(size, size, data).unwrap()
    }

    #[test]
    fn names_and_shapes() {
        let c = TransformerConfig::new(CloudMethod::Resize, FeatureKind::Silhouette);
        assert_eq!(c.to_string(), "Resize_silhouette");
        assert_eq!(c.feature_len(), 400);
        let c = TransformerConfig::new(CloudMethod::Contour, FeatureKind::Signature);
        assert_eq!(c.to_string(), "Contour_signature");
        assert_eq!(c.shape(), (2, 155));
        let mut bad = c.clone();
        bad.k_max = 4;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn annulus_image_has_a_loop() {
        let cfg = TransformerConfig::new(CloudMethod::Resize, FeatureKind::Silhouette);
        let pc = image_to_cloud(&annulus_image(128), &cfg).unwrap();
        let (values, degenerate) = cloud_feature(&pc, &cfg).unwrap();
        assert!(!degenerate);
        assert_eq!(values.len(), 400);
        assert!(values[200..].iter().any(|&v| v > 0.0));
    }

    #[test]
    fn blank_and_tiny_clouds_are_degenerate() {
        let cfg = TransformerConfig::new(CloudMethod::Contour, FeatureKind::Signature);
        let (v, deg) = cloud_feature(&PointCloud::from_xy(&[]).unwrap(), &cfg).unwrap();
        assert!(deg);
        assert_eq!(v, vec![0.0; 310]);
        let (_, deg) = cloud_feature(&PointCloud::from_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap(), &cfg).unwrap();
        assert!(deg);
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("f.csv");
        let rec = FeatureRecord {
            id: "a".into(),
            label: Some("x".into()),
            values: vec![0.1, 2.0],
            shape: (1, 2),
            degenerate: false,
        };
        write_records(&out, &[rec], 2).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), "id,label,f_0,f_1\na,x,0.1,2\n");
    }

    #[test]
    fn listing_uses_subdirectories_as_labels() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::new(2, 2, vec![0.0, 1.0, 0.5, 0.0]).unwrap();
        fs::create_dir(dir.path().join("b")).unwrap();
        img.write_pgm8(&dir.path().join("b/one.pgm")).unwrap();
        img.write_pgm8(&dir.path().join("top.pgm")).unwrap();
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let list = list_images(dir.path()).unwrap();
        assert_eq!(list.len(), 2);
        assert_eq!(list[0].1.as_deref(), Some("b"));
        assert_eq!(list[1].1, None);
    }

    #[test]
    fn diagram_cmd_on_point_files() {
        let dir = tempfile::tempdir().unwrap();
        let tri = dir.path().join("tri.txt");
        fs::write(&tri, "0 0\n1 2\n3 0\n").unwrap();
        let opts = DiagramOptions {
            complex: ComplexKind::Cech,
            squared: true,
            ..Default::default()
        };
        let d = diagram_cmd(&tri, &opts).unwrap();
        assert_eq!(d.len(), 4);
        let deaths: Vec<f64> = d.pairs.iter().map(|p| p.death).collect();
        assert!((deaths[0] - 1.25).abs() < 1e-9 && (deaths[1] - 2.0).abs() < 1e-9);
        assert!((d.pairs[3].birth - 2.25).abs() < 1e-9 && (d.pairs[3].death - 2.5).abs() < 1e-9);

        let two = dir.path().join("two.txt");
        fs::write(&two, "0 0\n3 4\n").unwrap();
        let opts = DiagramOptions {
            complex: ComplexKind::Rips,
            ..Default::default()
        };
        assert_eq!(diagram_cmd(&two, &opts).unwrap().to_text(), "0 0 5\n0 0 inf\n");
    }
}
