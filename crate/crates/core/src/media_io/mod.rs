//! Frame buffers and raw picture I/O.

mod metrics;
mod ppm;
mod y4m;

pub use metrics::{plane_sse, psnr, psnr_from_mse, Psnr};
pub use ppm::{emit_ppm, load_ppm};
pub use y4m::{emit_y4m, load_y4m, Y4mHeader, Y4mStream};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChromaFormat {
    Yuv400,
    Yuv420,
    Yuv444,
}

impl ChromaFormat {
    pub fn num_planes(self) -> usize {
        match self {
            ChromaFormat::Yuv400 => 1,
            _ => 3,
        }
    }

    /// Horizontal and vertical log2 subsampling of the chroma planes.
    pub fn chroma_shift(self) -> (u32, u32) {
        match self {
            ChromaFormat::Yuv420 => (1, 1),
            _ => (0, 0),
        }
    }

    pub fn plane_dims(self, plane: usize, width: usize, height: usize) -> (usize, usize) {
        if plane == 0 {
            return (width, height);
        }
        let (sx, sy) = self.chroma_shift();
        (width.div_ceil(1 << sx), height.div_ceil(1 << sy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    YCbCr,
    Rgb,
    YCoCg,
}

/// One colour plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneBuffer {
    width: usize,
    height: usize,
    bit_depth: u8,
    samples: Vec<u16>,
}

impl PlaneBuffer {
    pub fn new(width: usize, height: usize, bit_depth: u8) -> Self {
        Self::filled(width, height, bit_depth, 0)
    }

    pub fn filled(width: usize, height: usize, bit_depth: u8, value: u16) -> Self {
        Self {
            width,
            height,
            bit_depth,
            samples: vec![value; width * height],
        }
    }

    pub fn from_samples(
        width: usize,
        height: usize,
        bit_depth: u8,
        samples: Vec<u16>,
    ) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {width}x{height} plane",
                samples.len()
            )));
        }
        let max = (1u32 << bit_depth) - 1;
        if let Some(v) = samples.iter().find(|&&v| u32::from(v) > max) {
            return Err(Error::Format(format!(
                "sample {v} exceeds {bit_depth}-bit range"
            )));
        }
        Ok(Self {
            width,
            height,
            bit_depth,
            samples,
        })
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::from_samples(
            width,
            height,
            8,
            bytes.iter().map(|&b| u16::from(b)).collect(),
        )
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    #[inline]
    pub fn max_value(&self) -> u16 {
        ((1u32 << self.bit_depth) - 1) as u16
    }

    #[inline]
    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [u16] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u16) {
        debug_assert!(v <= self.max_value());
        self.samples[y * self.width + x] = v;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u16] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.samples.iter().map(|&v| v as u8).collect()
    }

    /// Copy with edge replication out to `width` x `height`.
    pub fn padded(&self, width: usize, height: usize) -> PlaneBuffer {
        let mut out = PlaneBuffer::new(width, height, self.bit_depth);
        for y in 0..height {
            let sy = y.min(self.height - 1);
            for x in 0..width {
                out.samples[y * width + x] = self.samples[sy * self.width + x.min(self.width - 1)];
            }
        }
        out
    }

    pub fn cropped(&self, width: usize, height: usize) -> PlaneBuffer {
        let mut out = PlaneBuffer::new(width, height, self.bit_depth);
        for y in 0..height {
            out.samples[y * width..(y + 1) * width].copy_from_slice(&self.row(y)[..width]);
        }
        out
    }
}

/// A picture: one (monochrome) or three planes sharing a bit depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub planes: Vec<PlaneBuffer>,
    pub chroma_format: ChromaFormat,
    pub color_space: ColorSpace,
}

impl Frame {
    pub fn new(
        width: usize,
        height: usize,
        chroma_format: ChromaFormat,
        color_space: ColorSpace,
    ) -> Self {
        let planes = (0..chroma_format.num_planes())
            .map(|p| {
                let (w, h) = chroma_format.plane_dims(p, width, height);
                PlaneBuffer::filled(
                    w,
                    h,
                    8,
                    if p == 0 || color_space == ColorSpace::Rgb {
                        0
                    } else {
                        128
                    },
                )
            })
            .collect();
        Self {
            planes,
            chroma_format,
            color_space,
        }
    }

    /// Validates plane count, chroma geometry and shared bit depth.
    pub fn from_planes(
        planes: Vec<PlaneBuffer>,
        chroma_format: ChromaFormat,
        color_space: ColorSpace,
    ) -> Result<Self> {
        if planes.len() != chroma_format.num_planes() {
            return Err(Error::DimensionMismatch(format!(
                "{} planes for {chroma_format:?}",
                planes.len()
            )));
        }
        let (w, h) = (planes[0].width, planes[0].height);
        for (i, p) in planes.iter().enumerate() {
            if p.bit_depth != planes[0].bit_depth {
                return Err(Error::DimensionMismatch(
                    "planes differ in bit depth".into(),
                ));
            }
            if (p.width, p.height) != chroma_format.plane_dims(i, w, h) {
                return Err(Error::DimensionMismatch(format!(
                    "plane {i} is {}x{}, expected {:?}",
                    p.width,
                    p.height,
                    chroma_format.plane_dims(i, w, h)
                )));
            }
        }
        Ok(Self {
            planes,
            chroma_format,
            color_space,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.planes[0].bit_depth
    }

    pub fn padded(&self, width: usize, height: usize) -> Frame {
        let planes = self
            .planes
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (w, h) = self.chroma_format.plane_dims(i, width, height);
                p.padded(w, h)
            })
            .collect();
        Frame {
            planes,
            chroma_format: self.chroma_format,
            color_space: self.color_space,
        }
    }

    pub fn cropped(&self, width: usize, height: usize) -> Frame {
        let planes = self
            .planes
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (w, h) = self.chroma_format.plane_dims(i, width, height);
                p.cropped(w, h)
            })
            .collect();
        Frame {
            planes,
            chroma_format: self.chroma_format,
            color_space: self.color_space,
        }
    }

    pub fn same_geometry(&self, other: &Frame) -> bool {
        self.chroma_format == other.chroma_format
            && self.bit_depth() == other.bit_depth()
            && self.width() == other.width()
            && self.height() == other.height()
    }
}
