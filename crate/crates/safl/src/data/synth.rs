//! Seeded synthetic word-image generation.
//!
//! Words from a configurable list are laid out with the built-in stroke font,
//! distorted in vector space (curvature, rotation, perspective), rasterized
//! with anti-aliased strokes, and finished with color, noise, and blur. All
//! randomness flows from one explicit seed, so the same spec and seed always
//! produce the same bytes.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::{SMatrix, SVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::font::{self, FontStyle};
use crate::data::image::ImageTensor;
use crate::data::words::WORDS;
use crate::data::{save_manifest, DatasetManifest, ManifestRecord};
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

const LETTER_SPACING: f64 = 0.12; // em between glyphs
const MAX_CANVAS: usize = 2048;

/// Knobs of the synthetic generator. Ranges are inclusive `[lo, hi]` and are
/// sampled uniformly; set `lo == hi` to pin a value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisSpec {
    pub seed: u64,
    /// Number of images `generate_dataset` renders.
    pub count: usize,
    /// Word pool; empty means the built-in English list.
    pub words: Vec<String>,
    pub fonts: Vec<FontStyle>,
    /// Cap height in pixels.
    pub size_range: [f64; 2],
    /// Rotation in degrees (counterclockwise positive).
    pub rotation_range: [f64; 2],
    /// Vertical bow of the baseline in em units (positive lifts the center).
    pub curvature_range: [f64; 2],
    /// Corner jitter of a projective warp, as a fraction of the canvas size.
    pub perspective_range: [f64; 2],
    /// Standard deviation of additive pixel noise.
    pub noise_stddev: f64,
    /// Gaussian blur sigma in pixels.
    pub blur_sigma_range: [f64; 2],
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 100,
            words: Vec::new(),
            fonts: FontStyle::ALL.to_vec(),
            size_range: [28.0, 40.0],
            rotation_range: [-6.0, 6.0],
            curvature_range: [0.0, 0.18],
            perspective_range: [0.0, 0.05],
            noise_stddev: 0.02,
            blur_sigma_range: [0.0, 0.6],
        }
    }
}

impl SynthesisSpec {
    /// A spec with every distortion disabled (upright, straight, clean text).
    pub fn clean() -> Self {
        Self {
            rotation_range: [0.0, 0.0],
            curvature_range: [0.0, 0.0],
            perspective_range: [0.0, 0.0],
            noise_stddev: 0.0,
            blur_sigma_range: [0.0, 0.0],
            ..Self::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading synthesis spec {}", path.display()), e))?;
        let spec: Self = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("synthesis spec {}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let range_ok = |r: [f64; 2]| r[0] <= r[1] && r.iter().all(|v| v.is_finite());
        if self.count == 0 {
            return Err(Error::Config("synthesis count must be >= 1".into()));
        }
        if self.fonts.is_empty() {
            return Err(Error::Config("synthesis needs at least one font style".into()));
        }
        if !range_ok(self.size_range) || self.size_range[0] < 8.0 {
            return Err(Error::Config(format!(
                "invalid size_range {:?} (need 8 <= lo <= hi)",
                self.size_range
            )));
        }
        for (name, r) in [
            ("rotation_range", self.rotation_range),
            ("curvature_range", self.curvature_range),
            ("perspective_range", self.perspective_range),
            ("blur_sigma_range", self.blur_sigma_range),
        ] {
            if !range_ok(r) {
                return Err(Error::Config(format!("invalid {name} {r:?}")));
            }
        }
        if !(0.0..=0.5).contains(&self.noise_stddev) {
            return Err(Error::Config(format!(
                "noise_stddev {} outside [0, 0.5]",
                self.noise_stddev
            )));
        }
        Ok(())
    }

    /// The effective word pool.
    pub fn word_pool(&self) -> Vec<&str> {
        if self.words.is_empty() {
            WORDS.to_vec()
        } else {
            self.words.iter().map(|s| s.as_str()).collect()
        }
    }
}

fn sample_range(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Solve the homography sending `src` corners to `dst` corners.
fn homography(src: [(f64, f64); 4], dst: [(f64, f64); 4]) -> Option<[f64; 8]> {
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for k in 0..4 {
        let (x, y) = src[k];
        let (u, v) = dst[k];
        a.set_row(k * 2, &nalgebra::RowSVector::from([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]));
        a.set_row(
            k * 2 + 1,
            &nalgebra::RowSVector::from([0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]),
        );
        b[k * 2] = u;
        b[k * 2 + 1] = v;
    }
    let sol = a.lu().solve(&b)?;
    Some(sol.into())
}

fn apply_homography(h: &[f64; 8], (x, y): (f64, f64)) -> (f64, f64) {
    let w = h[6] * x + h[7] * y + 1.0;
    ((h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w)
}

/// Subdivide so consecutive points are at most `step` apart; keeps later
/// nonlinear warps smooth.
fn densify(stroke: &[(f64, f64)], step: f64) -> Vec<(f64, f64)> {
    let mut out = vec![stroke[0]];
    for pair in stroke.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        let dist = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
        let n = (dist / step).ceil().max(1.0) as usize;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            out.push((x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
        }
    }
    out
}

/// Draw a thick anti-aliased segment into a coverage mask (max blend).
fn draw_segment(ink: &mut Array2<f64>, a: (f64, f64), b: (f64, f64), half: f64) {
    let (h, w) = ink.dim();
    let pad = half + 1.5;
    let x_min = ((a.0.min(b.0) - pad).floor().max(0.0)) as usize;
    let x_max = ((a.0.max(b.0) + pad).ceil().min(w as f64 - 1.0)) as usize;
    let y_min = ((a.1.min(b.1) - pad).floor().max(0.0)) as usize;
    let y_max = ((a.1.max(b.1) + pad).ceil().min(h as f64 - 1.0)) as usize;
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    for py in y_min..=y_max {
        for px in x_min..=x_max {
            let (cx, cy) = (px as f64 + 0.5, py as f64 + 0.5);
            let t = if len2 > 0.0 {
                (((cx - a.0) * dx + (cy - a.1) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
            let d = ((cx - qx).powi(2) + (cy - qy).powi(2)).sqrt();
            let cov = (half + 0.5 - d).clamp(0.0, 1.0);
            if cov > ink[[py, px]] {
                ink[[py, px]] = cov;
            }
        }
    }
}

fn gaussian_blur(plane: &mut Array2<f64>, sigma: f64) {
    let radius = (2.5 * sigma).ceil() as isize;
    if radius < 1 {
        return;
    }
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let (h, w) = plane.dim();
    let mut tmp = Array2::<f64>::zeros((h, w));
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += kv * plane[[y, sx]];
            }
            tmp[[y, x]] = acc / norm;
        }
    }
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
                acc += kv * tmp[[sy, x]];
            }
            plane[[y, x]] = acc / norm;
        }
    }
}

/// Render one word. Sampling order is fixed, so one `(spec, seed)` pair is
/// bit-reproducible.
pub fn render_word(word: &str, spec: &SynthesisSpec, seed: u64) -> Result<(ImageTensor, String)> {
    spec.validate()?;
    if word.is_empty() {
        return Err(Error::EmptyTarget);
    }
    Vocabulary::standard().encode_text(word)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let style = spec.fonts[rng.gen_range(0..spec.fonts.len())];
    let size = sample_range(&mut rng, spec.size_range);
    let rotation = sample_range(&mut rng, spec.rotation_range).to_radians();
    let curvature = sample_range(&mut rng, spec.curvature_range);
    let perspective = sample_range(&mut rng, spec.perspective_range);
    let blur_sigma = sample_range(&mut rng, spec.blur_sigma_range);

    // Vector layout in pixel coordinates (y down).
    let shear = style.shear();
    let wscale = style.width_scale();
    let mut pen = 0.0;
    let mut strokes: Vec<Vec<(f64, f64)>> = Vec::new();
    for c in word.chars() {
        let glyph = font::lookup(c)?;
        for stroke in &glyph.strokes {
            let placed: Vec<(f64, f64)> = stroke
                .iter()
                .map(|&(x, y)| {
                    let xs = x * wscale + shear * y;
                    ((pen + xs) * size, (font::ASCENDER - y) * size)
                })
                .collect();
            strokes.push(densify(&placed, 2.0));
        }
        pen += glyph.advance * wscale + LETTER_SPACING;
    }

    // Distort in vector space: curvature, then rotation, then perspective.
    let (mut min_x, mut max_x, mut min_y, mut max_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in &strokes {
        for &(x, y) in s {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
    }
    let (cx, cy) = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);
    let half_w = ((max_x - min_x) / 2.0).max(1.0);
    let warp_h = if perspective > 0.0 {
        let corners = [(min_x, min_y), (max_x, min_y), (max_x, max_y), (min_x, max_y)];
        let span_x = max_x - min_x;
        let span_y = max_y - min_y;
        let jittered = corners.map(|(x, y)| {
            (
                x + rng.gen_range(-1.0..=1.0) * perspective * span_x,
                y + rng.gen_range(-1.0..=1.0) * perspective * span_y,
            )
        });
        homography(corners, jittered)
    } else {
        None
    };
    let (sin_r, cos_r) = rotation.sin_cos();
    for s in &mut strokes {
        for p in s.iter_mut() {
            let u = (p.0 - cx) / half_w;
            let mut x = p.0;
            let mut y = p.1 + curvature * size * (u * u - 0.5); // bow: edges down, center up
            let (rx, ry) = (x - cx, y - cy);
            x = cx + rx * cos_r + ry * sin_r;
            y = cy - rx * sin_r + ry * cos_r;
            if let Some(h) = &warp_h {
                (x, y) = apply_homography(h, (x, y));
            }
            *p = (x, y);
        }
    }

    // Fit canvas around the distorted strokes.
    let half_t = style.thickness() * size / 2.0;
    let pad = half_t + 5.0;
    let (mut min_x, mut max_x, mut min_y, mut max_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in &strokes {
        for &(x, y) in s {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
    }
    let canvas_w = (((max_x - min_x) + 2.0 * pad).ceil() as usize).clamp(8, MAX_CANVAS);
    let canvas_h = (((max_y - min_y) + 2.0 * pad).ceil() as usize).clamp(8, MAX_CANVAS);
    let mut ink = Array2::<f64>::zeros((canvas_h, canvas_w));
    for s in &strokes {
        for pair in s.windows(2) {
            let a = (pair[0].0 - min_x + pad, pair[0].1 - min_y + pad);
            let b = (pair[1].0 - min_x + pad, pair[1].1 - min_y + pad);
            draw_segment(&mut ink, a, b, half_t);
        }
    }

    // Colors: usually dark ink on a light ground, occasionally inverted.
    let bg_base = rng.gen_range(0.7..=0.95);
    let fg_base = rng.gen_range(0.05..=0.3);
    let bg: Vec<f64> = (0..3).map(|_| (bg_base + rng.gen_range(-0.06..=0.06)) as f64).collect();
    let fg: Vec<f64> = (0..3).map(|_| (fg_base + rng.gen_range(-0.05..=0.05)) as f64).collect();
    let invert = rng.gen::<f64>() < 0.15;
    let (bg, fg) = if invert { (fg, bg) } else { (bg, fg) };

    let mut channels = [
        Array2::<f64>::zeros((canvas_h, canvas_w)),
        Array2::<f64>::zeros((canvas_h, canvas_w)),
        Array2::<f64>::zeros((canvas_h, canvas_w)),
    ];
    for y in 0..canvas_h {
        for x in 0..canvas_w {
            let a = ink[[y, x]];
            let n = if spec.noise_stddev > 0.0 {
                normal(&mut rng) * spec.noise_stddev
            } else {
                0.0
            };
            for (c, plane) in channels.iter_mut().enumerate() {
                plane[[y, x]] = bg[c] + (fg[c] - bg[c]) * a + n;
            }
        }
    }
    if blur_sigma > 0.05 {
        for plane in &mut channels {
            gaussian_blur(plane, blur_sigma);
        }
    }
    let img = ImageTensor::from_fn(canvas_h, canvas_w, |y, x| {
        (
            channels[0][[y, x]].clamp(0.0, 1.0),
            channels[1][[y, x]].clamp(0.0, 1.0),
            channels[2][[y, x]].clamp(0.0, 1.0),
        )
    });
    Ok((img, word.to_string()))
}

/// Per-image seed for record `index` of a generation run.
pub fn item_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Render `spec.count` images into `out_dir/images/`, write
/// `out_dir/manifest.tsv`, and return the loaded manifest.
pub fn generate_dataset(spec: &SynthesisSpec, out_dir: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    let pool = spec.word_pool();
    if pool.is_empty() {
        return Err(Error::EmptyDataset("synthesis word pool is empty".into()));
    }
    let image_dir = out_dir.join("images");
    std::fs::create_dir_all(&image_dir)
        .map_err(|e| Error::io(format!("creating {}", image_dir.display()), e))?;
    let mut word_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5EED_000F_00D5_0000);
    let mut records = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let word = pool[word_rng.gen_range(0..pool.len())];
        let (img, transcript) = render_word(word, spec, item_seed(spec.seed, i))?;
        let rel = format!("images/{i:05}.png");
        img.save_png(&out_dir.join(&rel))?;
        records.push(ManifestRecord {
            image: rel.into(),
            transcript,
        });
    }
    let manifest_path = out_dir.join("manifest.tsv");
    save_manifest(&records, &manifest_path)?;
    DatasetManifest::load(&manifest_path)
}

/// Root-mean-square deviation of the per-column ink baseline (bottom-most
/// ink pixel) from its best-fit line, normalized by image height. Near zero
/// for straight horizontal text; grows with baseline curvature.
pub fn ink_straightness(img: &ImageTensor) -> f64 {
    let (h, w) = (img.height(), img.width());
    let mut lumas: Vec<f64> = (0..h * w).map(|i| img.luma(i / w, i % w)).collect();
    lumas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = lumas[lumas.len() / 2];
    let is_ink = |y: usize, x: usize| (img.luma(y, x) - median).abs() > 0.25;
    let mut cols: Vec<(f64, f64)> = Vec::new();
    for x in 0..w {
        let mass = (0..h).filter(|&y| is_ink(y, x)).count();
        if mass < 2 {
            continue; // skip gaps between glyphs and stray specks
        }
        let baseline = (0..h).rev().find(|&y| is_ink(y, x)).unwrap();
        cols.push((x as f64, baseline as f64 + 0.5));
    }
    if cols.len() < 3 {
        return 0.0;
    }
    let n = cols.len() as f64;
    let mean_x = cols.iter().map(|c| c.0).sum::<f64>() / n;
    let mean_y = cols.iter().map(|c| c.1).sum::<f64>() / n;
    let sxx: f64 = cols.iter().map(|c| (c.0 - mean_x).powi(2)).sum();
    let sxy: f64 = cols.iter().map(|c| (c.0 - mean_x) * (c.1 - mean_y)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss: f64 = cols
        .iter()
        .map(|c| {
            let fit = mean_y + slope * (c.0 - mean_x);
            (c.1 - fit).powi(2)
        })
        .sum();
    (ss / n).sqrt() / h as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pinned_spec() -> SynthesisSpec {
        SynthesisSpec {
            size_range: [34.0, 34.0],
            fonts: vec![FontStyle::Regular],
            ..SynthesisSpec::clean()
        }
    }

    #[test]
    fn same_seed_renders_identical_images() {
        let spec = SynthesisSpec::default();
        let (a, _) = render_word("puzzle", &spec, 1234).unwrap();
        let (b, _) = render_word("puzzle", &spec, 1234).unwrap();
        assert_eq!(a, b);
        let (c, _) = render_word("puzzle", &spec, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn transcript_echoes_the_word() {
        let (_, t) = render_word("Mix99", &SynthesisSpec::clean(), 7).unwrap();
        assert_eq!(t, "Mix99");
    }

    #[test]
    fn unencodable_word_is_rejected() {
        let err = render_word("naïve", &SynthesisSpec::clean(), 0).unwrap_err();
        assert!(matches!(err, Error::UnknownCharacters { .. }));
    }

    #[test]
    fn straight_text_has_low_centroid_residual() {
        let (img, _) = render_word("mountain", &pinned_spec(), 42).unwrap();
        let s = ink_straightness(&img);
        assert!(s < 0.02, "straight residual {s}");
    }

    #[test]
    fn curved_text_has_high_centroid_residual() {
        let mut spec = pinned_spec();
        spec.curvature_range = [0.35, 0.35];
        let (img, _) = render_word("mountain", &spec, 42).unwrap();
        let s = ink_straightness(&img);
        assert!(s > 0.04, "curved residual {s}");
    }

    #[test]
    fn spec_validation_rejects_bad_ranges() {
        let mut spec = SynthesisSpec::default();
        spec.size_range = [40.0, 20.0];
        assert!(spec.validate().is_err());
        let mut spec = SynthesisSpec::default();
        spec.fonts.clear();
        assert!(spec.validate().is_err());
    }
#[test]
fn probe_straightness_values() {
    use crate::data::synth::*;
    use crate::data::FontStyle;
    let base = SynthesisSpec {
        size_range: [34.0, 34.0],
        fonts: vec![FontStyle::Regular],
        ..SynthesisSpec::clean()
    };
    for word in ["mountain", "sensor", "morning", "common"] {
        for curve in [0.0, 0.2, 0.35] {
            let mut spec = base.clone();
            spec.curvature_range = [curve, curve];
            let (img, _) = render_word(word, &spec, 42).unwrap();
            eprintln!("{word} curve={curve}: {:.4} (h={})", ink_straightness(&img), img.height());
        }
    }
}

#[test]
fn probe_render_dump() {
    use crate::data::synth::*;
    use crate::data::FontStyle;
    let base = SynthesisSpec {
        size_range: [34.0, 34.0],
        fonts: vec![FontStyle::Regular],
        ..SynthesisSpec::clean()
    };
    let (img, _) = render_word("sensor", &base, 42).unwrap();
    img.save_png(std::path::Path::new("/tmp/sensor_straight.png")).unwrap();
    let mut spec = base.clone();
    spec.curvature_range = [0.35, 0.35];
    let (img, _) = render_word("mountain", &spec, 42).unwrap();
    img.save_png(std::path::Path::new("/tmp/mountain_curved.png")).unwrap();
    let spec2 = SynthesisSpec::default();
    let (img, _) = render_word("General7", &spec2, 99).unwrap();
    img.save_png(std::path::Path::new("/tmp/general_noisy.png")).unwrap();
}

}
