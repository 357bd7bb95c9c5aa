//! Persistence: model container (human-readable manifest + raw tensor blob),
//! dataset loading, and CSV emission helpers.
//!
//! The model container is a single file: a text manifest (diff-able layer
//! metadata, shortest-round-trip float formatting) followed by an `@@blob`
//! separator and one raw little-endian tensor blob whose SHA-256 is recorded
//! in the manifest. All multi-byte integers in the blob are little-endian.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lutcore::MultiplierConfig;
use crate::netsim::{Layer, MacKind, MacLayer, QuantModel};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "lutna-model";
const BLOB_SEPARATOR: &str = "@@blob";

// ---------------------------------------------------------------------------
// datasets

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_shape: Vec<usize>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Deterministic interleaved split: every `val_every`-th sample goes to
    /// the validation set.
    pub fn split(&self, val_every: usize) -> (Dataset, Dataset) {
        let mut train = Dataset {
            feature_shape: self.feature_shape.clone(),
            features: Vec::new(),
            labels: Vec::new(),
            n_classes: self.n_classes,
        };
        let mut val = train.clone();
        for (i, (f, &l)) in self.features.iter().zip(&self.labels).enumerate() {
            let side = if val_every > 0 && i % val_every == 0 {
                &mut val
            } else {
                &mut train
            };
            side.features.push(f.clone());
            side.labels.push(l);
        }
        (train, val)
    }
}

/// Where a dataset comes from. Synthetic kinds regenerate deterministically
/// from their seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    IdxImages { images: String, labels: String },
    CsvRows { path: String },
    Synthetic { generator: String, seed: u64, size: usize },
}

impl std::str::FromStr for DatasetSource {
    type Err = Error;

    /// `synthetic:<generator>:<seed>:<size>`, `csv:<path>`, or
    /// `idx:<images>:<labels>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: &str| Error::Format {
            what: "dataset spec".into(),
            detail: format!("{detail}: {s:?}"),
        };
        let mut parts = s.splitn(2, ':');
        let kind = parts.next().unwrap_or("");
        let rest = parts.next().ok_or_else(|| bad("missing arguments"))?;
        match kind {
            "synthetic" => {
                let mut it = rest.split(':');
                let generator = it.next().unwrap_or("").to_string();
                let seed = it
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad("bad seed"))?;
                let size = it
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad("bad size"))?;
                Ok(DatasetSource::Synthetic {
                    generator,
                    seed,
                    size,
                })
            }
            "csv" => Ok(DatasetSource::CsvRows {
                path: rest.to_string(),
            }),
            "idx" => {
                let (images, labels) = rest
                    .split_once(':')
                    .ok_or_else(|| bad("idx needs images:labels"))?;
                Ok(DatasetSource::IdxImages {
                    images: images.to_string(),
                    labels: labels.to_string(),
                })
            }
            _ => Err(bad("unknown dataset kind")),
        }
    }
}

pub fn load_dataset(source: &DatasetSource) -> Result<Dataset> {
    match source {
        DatasetSource::Synthetic {
            generator,
            seed,
            size,
        } => synthetic_dataset(generator, *seed, *size),
        DatasetSource::CsvRows { path } => load_csv_dataset(Path::new(path)),
        DatasetSource::IdxImages { images, labels } => {
            load_idx_dataset(Path::new(images), Path::new(labels))
        }
    }
}

pub fn synthetic_dataset(generator: &str, seed: u64, size: usize) -> Result<Dataset> {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_distr::StandardNormal;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |mean: f64, sd: f64| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        mean + sd * z
    };
    let (centers, sd): (Vec<(f64, f64)>, f64) = match generator {
        "two_gaussians" => (vec![(-1.5, -1.5), (1.5, 1.5)], 0.5),
        "blobs3" => (vec![(0.0, 2.0), (-2.0, -1.0), (2.0, -1.0)], 0.45),
        other => {
            return Err(Error::Format {
                what: "dataset spec".into(),
                detail: format!("unknown synthetic generator {other:?}"),
            })
        }
    };
    let n_classes = centers.len();
    let mut features = Vec::with_capacity(size);
    let mut labels = Vec::with_capacity(size);
    for i in 0..size {
        let class = i % n_classes;
        let (cx, cy) = centers[class];
        features.push(vec![normal(cx, sd), normal(cy, sd)]);
        labels.push(class);
    }
    Ok(Dataset {
        feature_shape: vec![2],
        features,
        labels,
        n_classes,
    })
}

/// Rows of `f1,f2,...,label` with no header; the label is the last column.
pub fn load_csv_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut features = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    let mut width = None;
    for (row, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() < 2 {
            return Err(Error::Format {
                what: "csv dataset".into(),
                detail: format!("row {}: need at least one feature and a label", row + 1),
            });
        }
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::Format {
                    what: "csv dataset".into(),
                    detail: format!("row {}: expected {} columns, got {}", row + 1, w, cells.len()),
                })
            }
            _ => {}
        }
        let mut feat = Vec::with_capacity(cells.len() - 1);
        for cell in &cells[..cells.len() - 1] {
            feat.push(cell.parse::<f64>().map_err(|_| Error::Format {
                what: "csv dataset".into(),
                detail: format!("row {}: non-numeric cell {cell:?}", row + 1),
            })?);
        }
        let label = cells[cells.len() - 1]
            .parse::<i64>()
            .map_err(|_| Error::Format {
                what: "csv dataset".into(),
                detail: format!("row {}: non-integer label {:?}", row + 1, cells[cells.len() - 1]),
            })?;
        features.push(feat);
        labels.push(label);
    }
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_classes = (labels.iter().copied().max().unwrap_or(0) + 1).max(1) as usize;
    let checked = labels
        .iter()
        .enumerate()
        .map(|(row, &l)| {
            if l < 0 {
                Err(Error::LabelOutOfRange {
                    label: l,
                    classes: n_classes,
                    row: row + 1,
                })
            } else {
                Ok(l as usize)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let width = features[0].len();
    Ok(Dataset {
        feature_shape: vec![width],
        features,
        labels: checked,
        n_classes,
    })
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// IDX image/label pair (the classic u8 image container; header integers are
/// big-endian per that format). Pixels are scaled to [0, 1].
pub fn load_idx_dataset(images: &Path, labels: &Path) -> Result<Dataset> {
    let img = std::fs::read(images)?;
    let lab = std::fs::read(labels)?;
    let be32 = |buf: &[u8], at: usize, what: &str| -> Result<u32> {
        buf.get(at..at + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| Error::Format {
                what: "idx dataset".into(),
                detail: format!("truncated {what} header"),
            })
    };
    if be32(&img, 0, "images")? != IDX_IMAGES_MAGIC {
        return Err(Error::Format {
            what: "idx dataset".into(),
            detail: "bad images magic number".into(),
        });
    }
    if be32(&lab, 0, "labels")? != IDX_LABELS_MAGIC {
        return Err(Error::Format {
            what: "idx dataset".into(),
            detail: "bad labels magic number".into(),
        });
    }
    let n = be32(&img, 4, "images")? as usize;
    let h = be32(&img, 8, "images")? as usize;
    let w = be32(&img, 12, "images")? as usize;
    if be32(&lab, 4, "labels")? as usize != n {
        return Err(Error::Format {
            what: "idx dataset".into(),
            detail: "image/label counts differ".into(),
        });
    }
    let pixels = &img[16..];
    if pixels.len() != n * h * w || lab.len() - 8 != n {
        return Err(Error::Format {
            what: "idx dataset".into(),
            detail: "payload size does not match header".into(),
        });
    }
    let mut features = Vec::with_capacity(n);
    let mut labels_out = Vec::with_capacity(n);
    let mut n_classes = 1usize;
    for i in 0..n {
        features.push(
            pixels[i * h * w..(i + 1) * h * w]
                .iter()
                .map(|&p| p as f64 / 255.0)
                .collect(),
        );
        let l = lab[8 + i] as usize;
        n_classes = n_classes.max(l + 1);
        labels_out.push(l);
    }
    Ok(Dataset {
        feature_shape: vec![1, h, w],
        features,
        labels: labels_out,
        n_classes,
    })
}

// ---------------------------------------------------------------------------
// model container

struct BlobWriter {
    bytes: Vec<u8>,
}

impl BlobWriter {
    fn new() -> Self {
        BlobWriter { bytes: Vec::new() }
    }

    fn put_f64s(&mut self, values: &[f64]) -> (usize, usize) {
        let off = self.bytes.len();
        for v in values {
            self.bytes.extend_from_slice(&v.to_le_bytes());
        }
        (off, values.len() * 8)
    }

    fn put_mask(&mut self, mask: &[bool]) -> (usize, usize) {
        let off = self.bytes.len();
        self.bytes.extend(mask.iter().map(|&b| b as u8));
        (off, mask.len())
    }
}

fn read_f64s(blob: &[u8], off: usize, len: usize) -> Result<Vec<f64>> {
    let end = off.checked_add(len).filter(|&e| e <= blob.len());
    let slice = end
        .map(|e| &blob[off..e])
        .filter(|s| s.len() % 8 == 0)
        .ok_or_else(|| Error::Format {
            what: "model blob".into(),
            detail: format!("tensor range {off}+{len} out of bounds"),
        })?;
    Ok(slice
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_mask(blob: &[u8], off: usize, len: usize) -> Result<Vec<bool>> {
    let end = off.checked_add(len).filter(|&e| e <= blob.len());
    let slice = end.map(|e| &blob[off..e]).ok_or_else(|| Error::Format {
        what: "model blob".into(),
        detail: format!("mask range {off}+{len} out of bounds"),
    })?;
    Ok(slice.iter().map(|&b| b != 0).collect())
}

pub fn save_model(model: &QuantModel, path: &Path) -> Result<()> {
    let mut blob = BlobWriter::new();
    let mut manifest = String::new();
    let _ = writeln!(manifest, "{MAGIC} v{FORMAT_VERSION}");
    let _ = writeln!(manifest, "act_bits = {}", model.act_bits);
    let _ = writeln!(manifest, "weight_bits = {}", model.weight_bits);
    let _ = writeln!(manifest, "input_maxabs = {}", model.input_maxabs);
    let _ = writeln!(manifest, "input_shape = {}", join_usizes(&model.input_shape));
    let _ = writeln!(manifest, "layers = {}", model.layers.len());
    let surviving: usize = model.mac_layers().iter().map(|m| m.surviving_weights()).sum();
    let total: usize = model.mac_layers().iter().map(|m| m.weight_count()).sum();
    let _ = writeln!(manifest, "surviving_weights = {surviving}/{total}");

    let mut layer_text = String::new();
    for (i, layer) in model.layers.iter().enumerate() {
        let _ = writeln!(layer_text, "\n[layer {i}]");
        match layer {
            Layer::Mac(m) => {
                match &m.kind {
                    MacKind::Dense {
                        in_features,
                        out_features,
                    } => {
                        let _ = writeln!(layer_text, "kind = dense");
                        let _ = writeln!(layer_text, "in = {in_features}");
                        let _ = writeln!(layer_text, "out = {out_features}");
                    }
                    MacKind::Conv2d {
                        in_ch,
                        out_ch,
                        kh,
                        kw,
                    } => {
                        let _ = writeln!(layer_text, "kind = conv2d");
                        let _ = writeln!(layer_text, "in_ch = {in_ch}");
                        let _ = writeln!(layer_text, "out_ch = {out_ch}");
                        let _ = writeln!(layer_text, "kh = {kh}");
                        let _ = writeln!(layer_text, "kw = {kw}");
                    }
                }
                let _ = writeln!(layer_text, "scheme = {}", m.scheme.id());
                let _ = writeln!(layer_text, "out_maxabs = {}", m.out_maxabs);
                let (off, len) = blob.put_f64s(&m.weights);
                let _ = writeln!(layer_text, "weights = {off}+{len}");
                let (off, len) = blob.put_f64s(&m.bias);
                let _ = writeln!(layer_text, "bias = {off}+{len}");
                let (off, len) = blob.put_mask(&m.mask);
                let _ = writeln!(layer_text, "mask = {off}+{len}");
            }
            Layer::Relu => {
                let _ = writeln!(layer_text, "kind = relu");
            }
            Layer::MaxPool { k } => {
                let _ = writeln!(layer_text, "kind = maxpool");
                let _ = writeln!(layer_text, "k = {k}");
            }
            Layer::AvgPool { k } => {
                let _ = writeln!(layer_text, "kind = avgpool");
                let _ = writeln!(layer_text, "k = {k}");
            }
            Layer::Flatten => {
                let _ = writeln!(layer_text, "kind = flatten");
            }
        }
    }

    let digest = Sha256::digest(&blob.bytes);
    let _ = writeln!(manifest, "blob_len = {}", blob.bytes.len());
    let _ = writeln!(manifest, "blob_sha256 = {}", hex(&digest));
    manifest.push_str(&layer_text);
    let _ = writeln!(manifest, "\n{BLOB_SEPARATOR}");

    let mut bytes = manifest.into_bytes();
    bytes.extend_from_slice(&blob.bytes);
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<QuantModel> {
    let bytes = std::fs::read(path)?;
    let sep = format!("\n{BLOB_SEPARATOR}\n");
    let sep_at = find_subsequence(&bytes, sep.as_bytes()).ok_or_else(|| Error::Format {
        what: "model file".into(),
        detail: "missing blob separator".into(),
    })?;
    let manifest = std::str::from_utf8(&bytes[..sep_at]).map_err(|_| Error::Format {
        what: "model file".into(),
        detail: "manifest is not valid utf-8".into(),
    })?;
    let blob = &bytes[sep_at + sep.len()..];

    let mut lines = manifest.lines();
    let header = lines.next().unwrap_or("");
    let version = header
        .strip_prefix(&format!("{MAGIC} v"))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| Error::Format {
            what: "model file".into(),
            detail: format!("bad header {header:?}"),
        })?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch(version));
    }

    // global keys, then [layer N] sections
    let mut globals = KvSection::default();
    let mut layer_sections: Vec<KvSection> = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("[layer ") {
            layer_sections.push(KvSection::default());
            continue;
        }
        let section = layer_sections.last_mut().unwrap_or(&mut globals);
        if let Some((k, v)) = line.split_once('=') {
            section.set(k.trim(), v.trim());
        }
    }

    let blob_len: usize = globals.parse("blob_len")?;
    if blob.len() != blob_len {
        return Err(Error::ChecksumMismatch);
    }
    let digest = hex(&Sha256::digest(blob));
    if digest != globals.get("blob_sha256")? {
        return Err(Error::ChecksumMismatch);
    }

    let act_bits: u8 = globals.parse("act_bits")?;
    let weight_bits: u8 = globals.parse("weight_bits")?;
    let input_maxabs: f64 = globals.parse("input_maxabs")?;
    let input_shape = parse_usizes(globals.get("input_shape")?)?;
    let layer_count: usize = globals.parse("layers")?;
    if layer_sections.len() != layer_count {
        return Err(Error::Format {
            what: "model file".into(),
            detail: format!(
                "manifest lists {layer_count} layers but has {} sections",
                layer_sections.len()
            ),
        });
    }

    let mut layers = Vec::with_capacity(layer_count);
    for section in &layer_sections {
        let kind = section.get("kind")?;
        let layer = match kind {
            "dense" | "conv2d" => {
                let mac_kind = if kind == "dense" {
                    MacKind::Dense {
                        in_features: section.parse("in")?,
                        out_features: section.parse("out")?,
                    }
                } else {
                    MacKind::Conv2d {
                        in_ch: section.parse("in_ch")?,
                        out_ch: section.parse("out_ch")?,
                        kh: section.parse("kh")?,
                        kw: section.parse("kw")?,
                    }
                };
                let scheme: MultiplierConfig = section.get("scheme")?.parse()?;
                let out_maxabs: f64 = section.parse("out_maxabs")?;
                let (woff, wlen) = parse_range(section.get("weights")?)?;
                let (boff, blen) = parse_range(section.get("bias")?)?;
                let (moff, mlen) = parse_range(section.get("mask")?)?;
                Layer::Mac(MacLayer {
                    kind: mac_kind,
                    weights: read_f64s(blob, woff, wlen)?,
                    bias: read_f64s(blob, boff, blen)?,
                    mask: read_mask(blob, moff, mlen)?,
                    out_maxabs,
                    scheme,
                })
            }
            "relu" => Layer::Relu,
            "maxpool" => Layer::MaxPool {
                k: section.parse("k")?,
            },
            "avgpool" => Layer::AvgPool {
                k: section.parse("k")?,
            },
            "flatten" => Layer::Flatten,
            other => {
                return Err(Error::Format {
                    what: "model file".into(),
                    detail: format!("unknown layer kind {other:?}"),
                })
            }
        };
        layers.push(layer);
    }
    QuantModel::new(input_shape, input_maxabs, act_bits, weight_bits, layers)
}

#[derive(Default)]
struct KvSection {
    entries: Vec<(String, String)>,
}

impl KvSection {
    fn set(&mut self, k: &str, v: &str) {
        self.entries.push((k.to_string(), v.to_string()));
    }

    fn get(&self, key: &str) -> Result<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Format {
                what: "model file".into(),
                detail: format!("missing key {key:?}"),
            })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.parse().map_err(|_| Error::Format {
            what: "model file".into(),
            detail: format!("bad value for key {key:?}"),
        })
    }
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    s.split_once('+')
        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
        .ok_or_else(|| Error::Format {
            what: "model file".into(),
            detail: format!("bad blob range {s:?}"),
        })
}

fn join_usizes(v: &[usize]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_usizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim().parse().map_err(|_| Error::Format {
                what: "model file".into(),
                detail: format!("bad shape element {p:?}"),
            })
        })
        .collect()
}

fn find_subsequence(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack
        .windows(needle.len())
        .position(|window| window == needle)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// `code,count` CSV for a histogram.
pub fn histogram_csv(counts: &[u64]) -> String {
    let mut out = String::from("code,count\n");
    for (code, &count) in counts.iter().enumerate() {
        let _ = writeln!(out, "{code},{count}");
    }
    out
}

/// `value,probability` CSV for a distribution.
pub fn distribution_csv(probs: &[f64]) -> String {
    let mut out = String::from("value,probability\n");
    for (value, &p) in probs.iter().enumerate() {
        let _ = writeln!(out, "{value},{p}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lutcore::{MultiplierConfig, Scheme};
    use crate::netsim::{dense_layer, Layer};

    fn toy_model() -> QuantModel {
        let cfg = MultiplierConfig::new(Scheme::DncExact, 8, 8).unwrap();
        let mut l1 = dense_layer(vec![vec![0.5, -0.25], vec![0.125, 1.0]], vec![0.1, -0.2], cfg);
        l1.mask[2] = false;
        l1.weights[2] = 0.0;
        l1.out_maxabs = 3.0;
        let mut l2 = dense_layer(vec![vec![1.0, -1.0]], vec![0.0], cfg);
        l2.out_maxabs = 2.5;
        QuantModel::new(
            vec![2],
            2.0,
            8,
            8,
            vec![Layer::Mac(l1), Layer::Relu, Layer::Mac(l2)],
        )
        .unwrap()
    }

    #[test]
    fn model_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.lutna");
        let model = toy_model();
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model);

        // identical forward outputs
        let input = [1.25, -0.75];
        assert_eq!(
            model.forward(&input, None).unwrap(),
            loaded.forward(&input, None).unwrap()
        );
    }

    #[test]
    fn corrupt_blob_byte_fails_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.lutna");
        save_model(&toy_model(), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n - 3] ^= 0x01; // inside the blob tail
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_model(&path), Err(Error::ChecksumMismatch)));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.lutna");
        save_model(&toy_model(), &path).unwrap();
        let text = std::fs::read(&path).unwrap();
        let patched = String::from_utf8_lossy(&text).replace("lutna-model v1", "lutna-model v9");
        std::fs::write(&path, patched).unwrap();
        assert!(matches!(load_model(&path), Err(Error::VersionMismatch(9))));
    }

    #[test]
    fn synthetic_datasets_are_reproducible() {
        let a = synthetic_dataset("two_gaussians", 7, 100).unwrap();
        let b = synthetic_dataset("two_gaussians", 7, 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert_eq!(a.n_classes, 2);

        let c = synthetic_dataset("two_gaussians", 8, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dataset_spec_parsing() {
        let s: DatasetSource = "synthetic:two_gaussians:7:100".parse().unwrap();
        assert_eq!(
            s,
            DatasetSource::Synthetic {
                generator: "two_gaussians".into(),
                seed: 7,
                size: 100
            }
        );
        let s: DatasetSource = "csv:data/things.csv".parse().unwrap();
        assert_eq!(
            s,
            DatasetSource::CsvRows {
                path: "data/things.csv".into()
            }
        );
        assert!("bogus:1".parse::<DatasetSource>().is_err());
    }

    #[test]
    fn csv_parse_errors_carry_row_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "1.0,2.0,0\n1.5,oops,1\n").unwrap();
        let err = load_csv_dataset(&path).unwrap_err();
        assert!(err.to_string().contains("row 2"));

        std::fs::write(&path, "1.0,2.0,0\n0.5,1.5,1\n").unwrap();
        let d = load_csv_dataset(&path).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.n_classes, 2);
    }

    #[test]
    fn idx_magic_mismatch_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("img.idx");
        let labels = dir.path().join("lab.idx");
        // wrong magic on purpose
        std::fs::write(&images, 0x0000_0901u32.to_be_bytes()).unwrap();
        std::fs::write(&labels, 0x0000_0801u32.to_be_bytes()).unwrap();
        assert!(load_idx_dataset(&images, &labels).is_err());
    }

    #[test]
    fn idx_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("img.idx");
        let labels = dir.path().join("lab.idx");
        let mut img = Vec::new();
        img.extend(IDX_IMAGES_MAGIC.to_be_bytes());
        img.extend(2u32.to_be_bytes());
        img.extend(2u32.to_be_bytes());
        img.extend(2u32.to_be_bytes());
        img.extend([0u8, 255, 128, 64, 10, 20, 30, 40]);
        std::fs::write(&images, &img).unwrap();
        let mut lab = Vec::new();
        lab.extend(IDX_LABELS_MAGIC.to_be_bytes());
        lab.extend(2u32.to_be_bytes());
        lab.extend([1u8, 0]);
        std::fs::write(&labels, &lab).unwrap();

        let d = load_idx_dataset(&images, &labels).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.feature_shape, vec![1, 2, 2]);
        assert_eq!(d.labels, vec![1, 0]);
        assert_eq!(d.features[0][1], 1.0);
    }

    #[test]
    fn split_is_deterministic_and_interleaved() {
        let d = synthetic_dataset("two_gaussians", 1, 10).unwrap();
        let (train, val) = d.split(5);
        assert_eq!(val.len(), 2);
        assert_eq!(train.len(), 8);
    }
}
