//! Deterministic synthetic screen content.
//!
//! Three kinds of pictures stand in for text-and-graphics test sequences:
//! monospace text pages built from a procedurally drawn glyph set, flat UI
//! layouts with 2-8 colours and repeated icon tiles, and a mix of both with
//! a camera-like gradient region. Everything derives from the seed through
//! ChaCha8, so the same seed always yields the same picture.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::media_io::{ChromaFormat, ColorSpace, Frame, PlaneBuffer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusKind {
    Text,
    Ui,
    Mixed,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 3] = [CorpusKind::Text, CorpusKind::Ui, CorpusKind::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::Text => "text",
            CorpusKind::Ui => "ui",
            CorpusKind::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(CorpusKind::Text),
            "ui" => Ok(CorpusKind::Ui),
            "mixed" => Ok(CorpusKind::Mixed),
            other => Err(Error::Config(format!("unknown corpus kind '{other}'"))),
        }
    }
}

pub type Rgb = [u8; 3];

const CELL_W: usize = 8;
const CELL_H: usize = 16;

/// An RGB canvas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Canvas {
    pub fn new(width: usize, height: usize, bg: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![bg; width * height],
        }
    }

    pub fn fill_rect(&mut self, x: usize, y: usize, w: usize, h: usize, c: Rgb) {
        for yy in y..(y + h).min(self.height) {
            for xx in x..(x + w).min(self.width) {
                self.pixels[yy * self.width + xx] = c;
            }
        }
    }

    pub fn put(&mut self, x: usize, y: usize, c: Rgb) {
        if x < self.width && y < self.height {
            self.pixels[y * self.width + x] = c;
        }
    }

    /// Distinct colours in the canvas.
    pub fn color_count(&self) -> usize {
        let mut v = self.pixels.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

/// 6x11 glyph bitmaps drawn from stroke segments.
fn glyph_set(rng: &mut ChaCha8Rng, count: usize) -> Vec<[u16; 11]> {
    // segment endpoints on a 3x3 anchor lattice scaled to 5x10
    let anchors: Vec<(i32, i32)> = (0..3)
        .flat_map(|r| (0..3).map(move |c| (c * 5 / 2, r * 5)))
        .collect();
    (0..count)
        .map(|_| {
            let mut g = [0u16; 11];
            for _ in 0..rng.gen_range(2..=4) {
                let a = anchors[rng.gen_range(0..anchors.len())];
                let b = anchors[rng.gen_range(0..anchors.len())];
                let steps = (a.0 - b.0).abs().max((a.1 - b.1).abs()).max(1);
                for s in 0..=steps {
                    let x = a.0 + (b.0 - a.0) * s / steps;
                    let y = a.1 + (b.1 - a.1) * s / steps;
                    g[y as usize] |= 1 << x;
                }
            }
            g
        })
        .collect()
}

fn draw_glyph(c: &mut Canvas, g: &[u16; 11], x: usize, y: usize, fg: Rgb) {
    for (r, bits) in g.iter().enumerate() {
        for b in 0..6 {
            if bits >> b & 1 == 1 {
                c.put(x + 1 + b, y + 3 + r, fg);
            }
        }
    }
}

/// Word list over glyph indices.
fn vocabulary(rng: &mut ChaCha8Rng, glyphs: usize, words: usize) -> Vec<Vec<usize>> {
    (0..words)
        .map(|_| {
            (0..rng.gen_range(2..=8))
                .map(|_| rng.gen_range(0..glyphs))
                .collect()
        })
        .collect()
}

/// Lines of text in a `w` x `h` box on the monospace cell grid.
fn draw_text_block(
    c: &mut Canvas,
    rng: &mut ChaCha8Rng,
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
    inks: &[Rgb],
) {
    let glyphs = glyph_set(rng, 40);
    let vocab = vocabulary(rng, glyphs.len(), 60);
    let cols = w / CELL_W;
    for line in 0..h / CELL_H {
        let y = y0 + line * CELL_H;
        let indent = rng.gen_range(0..4) * 2;
        let mut col = indent;
        let ink = inks[rng.gen_range(0..inks.len())];
        let fill = rng.gen_range(cols / 3..=cols.max(1));
        while col < fill {
            let word = &vocab[rng.gen_range(0..vocab.len())];
            if col + word.len() > cols {
                break;
            }
            for &g in word {
                draw_glyph(c, &glyphs[g], x0 + col * CELL_W, y, ink);
                col += 1;
            }
            col += 1;
        }
    }
}

fn random_color(rng: &mut ChaCha8Rng) -> Rgb {
    [rng.gen(), rng.gen(), rng.gen()]
}

fn text_page(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Canvas {
    let bg: Rgb = if rng.gen_bool(0.7) {
        [250, 250, 248]
    } else {
        [30, 30, 36]
    };
    let mut c = Canvas::new(w, h, bg);
    let inks: Vec<Rgb> = (0..rng.gen_range(1..=3))
        .map(|_| random_color(rng))
        .collect();
    let margin = rng.gen_range(1..4) * 4;
    draw_text_block(
        &mut c,
        rng,
        margin,
        margin,
        w.saturating_sub(2 * margin),
        h.saturating_sub(margin),
        &inks,
    );
    c
}

fn icon(rng: &mut ChaCha8Rng, colors: &[Rgb]) -> Vec<Rgb> {
    // mirrored random pattern so icons look designed rather than noisy
    let mut t = vec![colors[0]; 256];
    for y in 0..16 {
        for x in 0..8 {
            let v = colors[rng.gen_range(0..colors.len())];
            if rng.gen_bool(0.5) {
                t[y * 16 + x] = v;
                t[y * 16 + 15 - x] = v;
            }
        }
    }
    t
}

fn ui_layout(
    rng: &mut ChaCha8Rng,
    c: &mut Canvas,
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
    colors: &[Rgb],
) {
    let pick = |rng: &mut ChaCha8Rng| colors[rng.gen_range(0..colors.len())];
    c.fill_rect(x0, y0, w, h, colors[0]);
    // title bar and toolbar of repeated icons
    let bar = colors[1 % colors.len()];
    c.fill_rect(x0, y0, w, 24, bar);
    let icons: Vec<Vec<Rgb>> = (0..4).map(|_| icon(rng, colors)).collect();
    let mut x = x0 + 4;
    while x + 16 <= x0 + w {
        let ic = &icons[rng.gen_range(0..icons.len())];
        for yy in 0..16 {
            for xx in 0..16 {
                c.put(x + xx, y0 + 28 + yy, ic[yy * 16 + xx]);
            }
        }
        x += 20;
    }
    // panels with borders, some holding buttons
    for _ in 0..rng.gen_range(3..8) {
        let pw = rng.gen_range(w / 6..=w / 2).max(8);
        let ph = rng.gen_range(h / 8..=h / 3).max(8);
        let px = x0 + rng.gen_range(0..w.saturating_sub(pw).max(1));
        let py = y0 + 48 + rng.gen_range(0..h.saturating_sub(ph + 48).max(1));
        let (fill, border) = (pick(rng), pick(rng));
        c.fill_rect(px, py, pw, ph, border);
        c.fill_rect(
            px + 1,
            py + 1,
            pw.saturating_sub(2),
            ph.saturating_sub(2),
            fill,
        );
        let mut bx = px + 6;
        while bx + 40 < px + pw && ph > 30 {
            let bc = pick(rng);
            c.fill_rect(bx, py + ph - 22, 36, 16, bc);
            bx += 44;
        }
    }
}

fn ui_page(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Canvas {
    let n = rng.gen_range(2..=8);
    let mut colors: Vec<Rgb> = Vec::with_capacity(n);
    while colors.len() < n {
        let c = random_color(rng);
        if !colors.contains(&c) {
            colors.push(c);
        }
    }
    let mut c = Canvas::new(w, h, colors[0]);
    ui_layout(rng, &mut c, 0, 0, w, h, &colors);
    // labels in palette colours keep the colour count unchanged
    let inks = [colors[rng.gen_range(0..n)]];
    let lines = (h / 4 / CELL_H).max(1) * CELL_H;
    draw_text_block(
        &mut c,
        rng,
        8,
        h.saturating_sub(lines + 8),
        w / 2,
        lines,
        &inks,
    );
    c
}

fn mixed_page(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Canvas {
    let mut c = ui_page(rng, w, h);
    // camera-like region: smooth gradient with mild noise
    let (rw, rh) = (w / 2, h / 3);
    let (rx, ry) = (w - rw, h / 3);
    let base = random_color(rng);
    for y in 0..rh {
        for x in 0..rw {
            let mut p = [0u8; 3];
            for k in 0..3 {
                let v = f64::from(base[k]) * 0.5
                    + 60.0 * ((x as f64 / 23.0 + k as f64).sin() + (y as f64 / 31.0).cos())
                    + rng.gen_range(-6.0..6.0);
                p[k] = v.clamp(0.0, 255.0) as u8;
            }
            c.put(rx + x, ry + y, p);
        }
    }
    let inks: Vec<Rgb> = vec![[0, 0, 0], [200, 30, 30]];
    draw_text_block(&mut c, rng, 0, h / 3 + 4, w / 2 - 8, h / 3, &inks);
    c
}

pub fn generate_canvas(kind: CorpusKind, seed: u64, width: usize, height: usize) -> Canvas {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind as u64) << 56);
    match kind {
        CorpusKind::Text => text_page(&mut rng, width, height),
        CorpusKind::Ui => ui_page(&mut rng, width, height),
        CorpusKind::Mixed => mixed_page(&mut rng, width, height),
    }
}

/// Full-range BT.601 integer conversion.
pub fn rgb_to_ycbcr(p: Rgb) -> [u8; 3] {
    let (r, g, b) = (i32::from(p[0]), i32::from(p[1]), i32::from(p[2]));
    let y = (77 * r + 150 * g + 29 * b + 128) >> 8;
    let cb = ((-43 * r - 85 * g + 128 * b + 128) >> 8) + 128;
    let cr = ((128 * r - 107 * g - 21 * b + 128) >> 8) + 128;
    [
        y.clamp(0, 255) as u8,
        cb.clamp(0, 255) as u8,
        cr.clamp(0, 255) as u8,
    ]
}

/// Converts a canvas to a frame; RGB output keeps planes in R, G, B order.
pub fn canvas_to_frame(
    c: &Canvas,
    chroma_format: ChromaFormat,
    color_space: ColorSpace,
) -> Result<Frame> {
    let (w, h) = (c.width, c.height);
    let conv: Vec<[u8; 3]> = match color_space {
        ColorSpace::Rgb if chroma_format == ChromaFormat::Yuv444 => c.pixels.clone(),
        ColorSpace::YCbCr => c.pixels.iter().map(|&p| rgb_to_ycbcr(p)).collect(),
        _ => {
            return Err(Error::Unsupported(format!(
                "{color_space:?} with {chroma_format:?} corpus output"
            )))
        }
    };
    let mut planes = Vec::with_capacity(3);
    for p in 0..chroma_format.num_planes() {
        let (pw, ph) = chroma_format.plane_dims(p, w, h);
        let samples: Vec<u16> = if p == 0 || chroma_format == ChromaFormat::Yuv444 {
            conv.iter().map(|s| u16::from(s[p])).collect()
        } else {
            let mut out = Vec::with_capacity(pw * ph);
            for y in 0..ph {
                for x in 0..pw {
                    let mut sum = 0u32;
                    for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let (sx, sy) = ((2 * x + dx).min(w - 1), (2 * y + dy).min(h - 1));
                        sum += u32::from(conv[sy * w + sx][p]);
                    }
                    out.push(((sum + 2) / 4) as u16);
                }
            }
            out
        };
        planes.push(PlaneBuffer::from_samples(pw, ph, 8, samples)?);
    }
    Frame::from_planes(planes, chroma_format, color_space)
}

pub fn generate_frame(
    kind: CorpusKind,
    seed: u64,
    width: usize,
    height: usize,
    chroma_format: ChromaFormat,
    color_space: ColorSpace,
) -> Result<Frame> {
    canvas_to_frame(
        &generate_canvas(kind, seed, width, height),
        chroma_format,
        color_space,
    )
}

/// `count` pictures of one kind with consecutive seeds.
pub fn generate_set(
    kind: CorpusKind,
    first_seed: u64,
    count: usize,
    size: (usize, usize),
    chroma_format: ChromaFormat,
    color_space: ColorSpace,
) -> Result<Vec<Frame>> {
    (0..count as u64)
        .map(|i| {
            generate_frame(
                kind,
                first_seed + i,
                size.0,
                size.1,
                chroma_format,
                color_space,
            )
        })
        .collect()
}

/// Shuffled mix of all kinds, for corpus-wide checks.
pub fn mixed_corpus(
    seed: u64,
    count: usize,
    size: usize,
    chroma_format: ChromaFormat,
    color_space: ColorSpace,
) -> Result<Vec<Frame>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kinds: Vec<CorpusKind> = (0..count).map(|i| CorpusKind::ALL[i % 3]).collect();
    kinds.shuffle(&mut rng);
    kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| generate_frame(k, seed + i as u64, size, size, chroma_format, color_space))
        .collect()
}
