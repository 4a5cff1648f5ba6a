use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;

use super::Dataset;

/// Side of every generated glyph.
pub const GLYPH_SIZE: usize = 48;
/// Number of distinct classes the generator can produce.
pub const REPERTOIRE: usize = 100;

const MAX_SHIFT: f64 = 3.0;
const MAX_ROTATION_DEG: f64 = 10.0;
// Fixed so the class → pattern table never depends on the caller's seed.
const TABLE_SEED: u64 = 0x4843_5247;

type Segment = [(f64, f64); 2];

// Strokes on the 48 px canvas, (x, y) with y pointing down.
const STROKES: [Segment; 16] = [
    [(12.0, 14.0), (36.0, 14.0)],
    [(10.0, 24.0), (38.0, 24.0)],
    [(12.0, 34.0), (36.0, 34.0)],
    [(15.0, 10.0), (15.0, 38.0)],
    [(24.0, 8.0), (24.0, 40.0)],
    [(33.0, 10.0), (33.0, 38.0)],
    [(12.0, 12.0), (36.0, 36.0)],
    [(36.0, 12.0), (12.0, 36.0)],
    [(10.0, 18.0), (22.0, 18.0)],
    [(30.0, 28.0), (30.0, 40.0)],
    [(14.0, 30.0), (24.0, 40.0)],
    [(28.0, 10.0), (38.0, 20.0)],
    [(10.0, 40.0), (38.0, 40.0)],
    [(10.0, 8.0), (38.0, 8.0)],
    [(20.0, 20.0), (28.0, 28.0)],
    [(38.0, 10.0), (38.0, 38.0)],
];

struct Pattern {
    strokes: [usize; 2],
    radius: f64,
}

fn pattern_table() -> Vec<Pattern> {
    let mut pairs = Vec::new();
    for a in 0..STROKES.len() {
        for b in a + 1..STROKES.len() {
            pairs.push([a, b]);
        }
    }
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(TABLE_SEED));
    pairs
        .into_iter()
        .take(REPERTOIRE)
        .enumerate()
        .map(|(i, strokes)| Pattern {
            strokes,
            radius: 1.5 + 0.5 * (i % 3) as f64,
        })
        .collect()
}

fn segment_distance(p: (f64, f64), seg: &Segment) -> f64 {
    let [(ax, ay), (bx, by)] = *seg;
    let (dx, dy) = (bx - ax, by - ay);
    let t = (((p.0 - ax) * dx + (p.1 - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    let (ex, ey) = (p.0 - ax - t * dx, p.1 - ay - t * dy);
    libm::sqrt(ex * ex + ey * ey)
}

fn render(pattern: &Pattern, shift: (f64, f64), angle: f64) -> GrayImage {
    let c = GLYPH_SIZE as f64 / 2.0;
    let (sin, cos) = (libm::sin(angle), libm::cos(angle));
    GrayImage::from_fn(GLYPH_SIZE, GLYPH_SIZE, |y, x| {
        // Map the pixel centre back into the canonical frame.
        let px = x as f64 + 0.5 - shift.0 - c;
        let py = y as f64 + 0.5 - shift.1 - c;
        let q = (cos * px + sin * py + c, -sin * px + cos * py + c);
        let d = pattern
            .strokes
            .iter()
            .map(|&s| segment_distance(q, &STROKES[s]))
            .fold(f64::INFINITY, f64::min);
        let ink = (pattern.radius + 0.5 - d).clamp(0.0, 1.0);
        (1.0 - ink) as f32
    })
}

/// Deterministic two-stroke glyph classes on a white background.
///
/// Each sample is shifted by up to ±3 px, rotated by up to ±10° and, when
/// `noise > 0`, perturbed by uniform pixel noise of that amplitude before
/// clamping to [0, 1]. Classes are named `g00`, `g01`, ...
pub fn synth_glyphs(class_count: usize, samples_per_class: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if class_count == 0 || class_count > REPERTOIRE {
        return Err(Error::invalid(format!(
            "class count {} outside the generator repertoire 1..={}",
            class_count, REPERTOIRE
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid(format!("noise amplitude {} must be non-negative", noise)));
    }
    let table = pattern_table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = Dataset::with_classes((0..class_count).map(|c| format!("g{:02}", c)));
    for (c, pattern) in table.iter().take(class_count).enumerate() {
        let name = format!("g{:02}", c);
        for _ in 0..samples_per_class {
            let shift = (rng.gen_range(-MAX_SHIFT..=MAX_SHIFT), rng.gen_range(-MAX_SHIFT..=MAX_SHIFT));
            let angle = rng.gen_range(-MAX_ROTATION_DEG..=MAX_ROTATION_DEG).to_radians();
            let mut img = render(pattern, shift, angle);
            if noise > 0.0 {
                for v in img.data_mut() {
                    let n = rng.gen_range(-1.0..=1.0) * noise;
                    *v = (*v as f64 + n).clamp(0.0, 1.0) as f32;
                }
            }
            ds.push(img, &name);
        }
    }
    Ok(ds)
}
