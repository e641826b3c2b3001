use super::index_map::{index_map_decode, index_map_encode, IndexMap};
use super::{assemble_palette, derive_palette, PaletteColor, MAX_PALETTE_SIZE};
use crate::bitio::{BitReader, BitSink};
use crate::error::{Error, Result};
use crate::residual::QuantParams;

/// Context shared by palette syntax writing and parsing.
#[derive(Debug, Clone, Copy)]
pub struct PaletteSyntaxParams {
    pub width: usize,
    pub height: usize,
    /// 1 for luma-only palettes, 3 for joint triplets.
    pub components: usize,
    pub bit_depth: u8,
    pub quant: QuantParams,
}

/// Everything a palette CU carries in the bitstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaletteSyntax {
    pub reuse_flags: Vec<bool>,
    pub new_entries: Vec<PaletteColor>,
    pub escape_present: bool,
    pub map: IndexMap,
    /// Coded escape values in scan order (levels when lossy, samples when lossless).
    pub escapes: Vec<PaletteColor>,
    pub escape_levels: Vec<[i32; 3]>,
}

impl PaletteSyntax {
    /// Encoder side: derives the palette and escapes for `pixels` (raster order).
    pub fn from_pixels(
        pixels: &[PaletteColor],
        predictor: &[PaletteColor],
        p: &PaletteSyntaxParams,
    ) -> Self {
        let d = derive_palette(pixels, predictor);
        let esc = d.palette.len() as u8;
        let escape_present = d.indices.contains(&esc);
        let map = IndexMap::new(p.width, p.height, d.indices);
        let scan = super::traverse_scan(p.width, p.height);
        let mut escape_levels = Vec::new();
        for &(x, y) in &scan {
            if map.get(x, y) == esc {
                let px = pixels[y * p.width + x];
                let mut l = [0i32; 3];
                for c in 0..p.components {
                    l[c] = p.quant.quantize(px[c] as i32);
                }
                escape_levels.push(l);
            }
        }
        let mut s = Self {
            reuse_flags: d.reuse_flags,
            new_entries: d.new_entries,
            escape_present,
            map,
            escapes: Vec::new(),
            escape_levels,
        };
        s.escapes = s.escape_samples(p);
        s
    }

    pub fn palette(&self, predictor: &[PaletteColor]) -> Vec<PaletteColor> {
        assemble_palette(predictor, &self.reuse_flags, &self.new_entries)
    }

    fn escape_samples(&self, p: &PaletteSyntaxParams) -> Vec<PaletteColor> {
        let max = (1i32 << p.bit_depth) - 1;
        self.escape_levels
            .iter()
            .map(|l| {
                let mut c = [0u16; 3];
                for k in 0..p.components {
                    c[k] = p.quant.dequantize(l[k]).clamp(0, max) as u16;
                }
                c
            })
            .collect()
    }

    /// Reconstructed samples in raster order.
    pub fn reconstruct(&self, predictor: &[PaletteColor]) -> Vec<PaletteColor> {
        let palette = self.palette(predictor);
        let scan = super::traverse_scan(self.map.width, self.map.height);
        let mut out = vec![[0u16; 3]; self.map.indices.len()];
        let mut escapes = self.escapes.iter();
        for (x, y) in scan {
            let i = self.map.get(x, y) as usize;
            out[y * self.map.width + x] = match palette.get(i) {
                Some(&c) => c,
                None => *escapes.next().expect("escape count checked at parse"),
            };
        }
        out
    }

    pub fn write<S: BitSink>(&self, sink: &mut S, p: &PaletteSyntaxParams) {
        let reused: Vec<usize> = self
            .reuse_flags
            .iter()
            .enumerate()
            .filter(|(_, &r)| r)
            .map(|(i, _)| i)
            .collect();
        sink.put_ue(reused.len() as u32);
        let mut next = 0;
        for i in reused {
            sink.put_ue((i - next) as u32);
            next = i + 1;
        }
        sink.put_ue(self.new_entries.len() as u32);
        for e in &self.new_entries {
            for &v in &e[..p.components] {
                sink.put_bits(v as u64, p.bit_depth as u32);
            }
        }
        sink.put_flag(self.escape_present);
        let size = self.reuse_flags.iter().filter(|&&r| r).count() + self.new_entries.len();
        index_map_encode(sink, &self.map, size + self.escape_present as usize);
        for l in &self.escape_levels {
            for &v in &l[..p.components] {
                if p.quant.lossless {
                    sink.put_bits(v as u64, p.bit_depth as u32);
                } else {
                    sink.put_ue(v as u32);
                }
            }
        }
    }

    pub fn read(
        r: &mut BitReader<'_>,
        predictor_len: usize,
        p: &PaletteSyntaxParams,
    ) -> Result<Self> {
        let num_reused = r.read_ue()? as usize;
        if num_reused > predictor_len.min(MAX_PALETTE_SIZE) {
            return Err(Error::bitstream(
                "palette",
                format!("{num_reused} reused entries from a predictor of {predictor_len}"),
            ));
        }
        let mut reuse_flags = vec![false; predictor_len];
        let mut next = 0usize;
        for _ in 0..num_reused {
            let i = next + r.read_ue()? as usize;
            if i >= predictor_len {
                return Err(Error::bitstream(
                    "palette",
                    "reuse index past predictor end",
                ));
            }
            reuse_flags[i] = true;
            next = i + 1;
        }
        let num_new = r.read_ue()? as usize;
        let size = num_reused + num_new;
        if size == 0 || size > MAX_PALETTE_SIZE {
            return Err(Error::bitstream("palette", format!("palette size {size}")));
        }
        let mut new_entries = Vec::with_capacity(num_new);
        for _ in 0..num_new {
            let mut c = [0u16; 3];
            for v in c.iter_mut().take(p.components) {
                *v = r.read_bits(p.bit_depth as u32)? as u16;
            }
            new_entries.push(c);
        }
        let escape_present = r.read_flag()?;
        let map = index_map_decode(r, p.width, p.height, size + escape_present as usize)?;
        let n_esc = map.indices.iter().filter(|&&i| i as usize == size).count();
        if escape_present && n_esc == 0 {
            return Err(Error::bitstream(
                "palette",
                "escape flag set without escape samples",
            ));
        }
        let mut escape_levels = Vec::with_capacity(n_esc);
        for _ in 0..n_esc {
            let mut l = [0i32; 3];
            for v in l.iter_mut().take(p.components) {
                *v = if p.quant.lossless {
                    r.read_bits(p.bit_depth as u32)? as i32
                } else {
                    let u = r.read_ue()?;
                    if u > (1u32 << p.bit_depth) {
                        return Err(Error::bitstream("palette", "escape level out of range"));
                    }
                    u as i32
                };
            }
            escape_levels.push(l);
        }
        let mut s = Self {
            reuse_flags,
            new_entries,
            escape_present,
            map,
            escapes: Vec::new(),
            escape_levels,
        };
        s.escapes = s.escape_samples(p);
        Ok(s)
    }
}
