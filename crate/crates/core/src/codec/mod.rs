//! Picture coding: CTU quadtree, CU syntax, RDO encoder and decoder.
//!
//! Pictures are coded in 128x128 CTUs whose four 64x64 quadrants are always
//! split; each quadrant carries a depth-first tree of split flags down to
//! the minimum CU size. The encoder and decoder reconstruct every CU through
//! the same code, so the encoder's reconstruction is the decoder output.

mod decoder;
mod encoder;
mod mode;
mod recon;
mod syntax;

pub use encoder::lambda;
pub use mode::PredMode;
pub use recon::{intra_pred, CuTrace};
pub use syntax::{CodingUnit, CuPayload, CuResidual, SyntaxCtx, MAX_CU_SIZE, MAX_TU_SIZE};

use crate::bitio::{read_container, write_container, BitstreamHeader, ToolFlags, FORMAT_VERSION};
use crate::bitio::{BitSink, BitWriter};
use crate::deblock::{deblock_frame, CuGrid, DeblockParams};
use crate::ibc::{CTU_SIZE, REGION_SIZE};
use crate::media_io::Frame;
use crate::{Error, Result};

/// Pictures are coded at a multiple of this size and cropped on output.
pub const PAD_ALIGN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderConfig {
    pub qp: u8,
    pub tools: ToolFlags,
    /// Frame-level workers; 0 picks the available parallelism.
    pub threads: usize,
}

impl EncoderConfig {
    pub fn new(qp: u8, tools: ToolFlags) -> Self {
        Self {
            qp,
            tools,
            threads: 0,
        }
    }

    pub fn lossless(&self) -> bool {
        self.tools.contains(ToolFlags::LOSSLESS)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qp > 51 {
            return Err(Error::Config(format!("qp {} out of range 0..=51", self.qp)));
        }
        self.tools.validate()
    }
}

/// Per-frame coding statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameStats {
    /// Payload size including padding, excluding the length prefix.
    pub bits: u64,
    /// Luma samples per mode, indexed like [`PredMode::ALL`].
    pub mode_area: [u64; 7],
    pub cu_count: usize,
}

impl FrameStats {
    fn from_cus(payload_len: usize, cus: &[CodingUnit]) -> Self {
        let mut mode_area = [0u64; 7];
        for cu in cus {
            let i = PredMode::ALL.iter().position(|&m| m == cu.mode).unwrap();
            mode_area[i] += (cu.size * cu.size) as u64;
        }
        Self {
            bits: payload_len as u64 * 8,
            mode_area,
            cu_count: cus.len(),
        }
    }

    /// Share of CU area per mode, in percent.
    pub fn mode_percent(&self) -> [f64; 7] {
        let total: u64 = self.mode_area.iter().sum();
        self.mode_area.map(|a| {
            if total == 0 {
                0.0
            } else {
                100.0 * a as f64 / total as f64
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct EncodedFrame {
    pub payload: Vec<u8>,
    /// Reconstruction (after deblocking), cropped to the source size.
    pub recon: Frame,
    pub cus: Vec<CodingUnit>,
    pub trace: Vec<CuTrace>,
    pub stats: FrameStats,
}

#[derive(Debug, Clone)]
pub struct DecodedFrame {
    pub frame: Frame,
    pub cus: Vec<CodingUnit>,
    pub trace: Vec<CuTrace>,
    pub stats: FrameStats,
}

#[derive(Debug, Clone)]
pub struct EncodedSequence {
    pub header: BitstreamHeader,
    pub bytes: Vec<u8>,
    pub frames: Vec<EncodedFrame>,
}

#[derive(Debug, Clone)]
pub struct DecodedSequence {
    pub header: BitstreamHeader,
    pub frames: Vec<DecodedFrame>,
}

impl DecodedSequence {
    pub fn pictures(&self) -> Vec<Frame> {
        self.frames.iter().map(|f| f.frame.clone()).collect()
    }
}

fn padded_dims(w: usize, h: usize) -> (usize, usize) {
    (
        w.div_ceil(PAD_ALIGN) * PAD_ALIGN,
        h.div_ceil(PAD_ALIGN) * PAD_ALIGN,
    )
}

fn syntax_ctx(h: &BitstreamHeader) -> Result<SyntaxCtx> {
    if h.ctu_size as usize != CTU_SIZE {
        return Err(Error::Unsupported(format!("CTU size {}", h.ctu_size)));
    }
    let (pw, ph) = padded_dims(usize::from(h.width), usize::from(h.height));
    Ok(SyntaxCtx::new(
        h.tool_flags,
        h.chroma_format,
        h.color_space,
        8,
        h.qp,
        pw,
        ph,
    ))
}

pub fn header_for(
    frame: &Frame,
    cfg: &EncoderConfig,
    frame_count: usize,
) -> Result<BitstreamHeader> {
    cfg.validate()?;
    if frame.bit_depth() != 8 {
        return Err(Error::Unsupported(format!(
            "{}-bit video",
            frame.bit_depth()
        )));
    }
    let dim = |v: usize| {
        u16::try_from(v).map_err(|_| Error::Unsupported(format!("picture dimension {v}")))
    };
    Ok(BitstreamHeader {
        version: FORMAT_VERSION,
        width: dim(frame.width())?,
        height: dim(frame.height())?,
        chroma_format: frame.chroma_format,
        color_space: frame.color_space,
        ctu_size: CTU_SIZE as u32,
        qp: cfg.qp,
        tool_flags: cfg.tools,
        frame_count: u32::try_from(frame_count)
            .map_err(|_| Error::Unsupported("frame count".into()))?,
    })
}

fn cu_grid(w: usize, h: usize, cus: &[CodingUnit]) -> CuGrid {
    let mut grid = CuGrid::new(w, h);
    for (i, cu) in cus.iter().enumerate() {
        grid.set(cu.x, cu.y, cu.size, i as u32, cu.mode);
    }
    grid
}

fn finish_picture(mut recon: Frame, header: &BitstreamHeader, cus: &[CodingUnit]) -> Frame {
    let tools = header.tool_flags;
    if tools.contains(ToolFlags::DBK) && !tools.contains(ToolFlags::LOSSLESS) {
        let grid = cu_grid(recon.width(), recon.height(), cus);
        deblock_frame(&mut recon, &grid, &DeblockParams::default());
    }
    recon.cropped(usize::from(header.width), usize::from(header.height))
}

/// Encodes one picture under `header`, which fixes format and tools.
pub fn encode_frame(frame: &Frame, header: &BitstreamHeader) -> Result<EncodedFrame> {
    if usize::from(header.width) != frame.width()
        || usize::from(header.height) != frame.height()
        || header.chroma_format != frame.chroma_format
        || header.color_space != frame.color_space
    {
        return Err(Error::DimensionMismatch(
            "frame does not match the stream header".into(),
        ));
    }
    let ctx = syntax_ctx(header)?;
    let src = frame.padded(ctx.width, ctx.height);
    let pic = encoder::PictureEncoder::new(&src, ctx).encode()?;
    let stats = FrameStats::from_cus(pic.payload.len(), &pic.cus);
    let recon = finish_picture(pic.state.recon, header, &pic.cus);
    Ok(EncodedFrame {
        payload: pic.payload,
        recon,
        cus: pic.cus,
        trace: pic.state.trace,
        stats,
    })
}

pub fn decode_frame(payload: &[u8], header: &BitstreamHeader) -> Result<DecodedFrame> {
    let ctx = syntax_ctx(header)?;
    let pic = decoder::decode_picture(payload, ctx)?;
    let stats = FrameStats::from_cus(payload.len(), &pic.cus);
    let frame = finish_picture(pic.state.recon, header, &pic.cus);
    Ok(DecodedFrame {
        frame,
        cus: pic.cus,
        trace: pic.state.trace,
        stats,
    })
}

/// Serializes a CU list (in decoding order) as a picture payload, deriving
/// the split flags from the CU geometry. Used to build streams that no
/// encoder decision would produce.
pub fn write_payload(header: &BitstreamHeader, cus: &[CodingUnit]) -> Result<Vec<u8>> {
    fn node(
        w: &mut BitWriter,
        ctx: &SyntaxCtx,
        cus: &mut std::iter::Peekable<std::slice::Iter<'_, CodingUnit>>,
        x: usize,
        y: usize,
        size: usize,
    ) -> Result<()> {
        if x >= ctx.width || y >= ctx.height {
            return Ok(());
        }
        let partial = x + size > ctx.width || y + size > ctx.height;
        let next = cus
            .peek()
            .ok_or_else(|| Error::Config(format!("no CU left for ({x}, {y})")))?;
        let leaf = !partial && (next.x, next.y, next.size) == (x, y, size);
        if !partial && size > ctx.min_cu() {
            w.put_flag(!leaf);
        }
        if leaf {
            syntax::write_cu(w, ctx, cus.next().expect("peeked"));
            return Ok(());
        }
        if partial || size > ctx.min_cu() {
            let half = size / 2;
            for (dx, dy) in [(0, 0), (half, 0), (0, half), (half, half)] {
                node(w, ctx, cus, x + dx, y + dy, half)?;
            }
            return Ok(());
        }
        Err(Error::Config(format!(
            "CU at ({}, {}) size {} does not fit the quadtree",
            next.x, next.y, next.size
        )))
    }

    let ctx = syntax_ctx(header)?;
    let mut w = BitWriter::new();
    let mut it = cus.iter().peekable();
    for cy in (0..ctx.height).step_by(CTU_SIZE) {
        for cx in (0..ctx.width).step_by(CTU_SIZE) {
            for r in 0..4 {
                node(
                    &mut w,
                    &ctx,
                    &mut it,
                    cx + (r % 2) * REGION_SIZE,
                    cy + (r / 2) * REGION_SIZE,
                    REGION_SIZE,
                )?;
            }
        }
    }
    if it.next().is_some() {
        return Err(Error::Config("CUs left over after the last CTU".into()));
    }
    Ok(w.finish())
}

fn worker_count(requested: usize, jobs: usize) -> usize {
    let n = if requested == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        requested
    };
    n.clamp(1, jobs.max(1))
}

/// Encodes all frames; frames are independent and spread over workers, the
/// output does not depend on the worker count.
pub fn encode_sequence(frames: &[Frame], cfg: &EncoderConfig) -> Result<EncodedSequence> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Config("no frames to encode".into()))?;
    if let Some(f) = frames.iter().find(|f| !f.same_geometry(first)) {
        return Err(Error::DimensionMismatch(format!(
            "frame {}x{} differs from the first frame {}x{}",
            f.width(),
            f.height(),
            first.width(),
            first.height()
        )));
    }
    let header = header_for(first, cfg, frames.len())?;
    let workers = worker_count(cfg.threads, frames.len());
    let mut results: Vec<Option<Result<EncodedFrame>>> = (0..frames.len()).map(|_| None).collect();
    if workers == 1 {
        for (slot, f) in results.iter_mut().zip(frames) {
            *slot = Some(encode_frame(f, &header));
        }
    } else {
        let chunk = frames.len().div_ceil(workers);
        std::thread::scope(|s| {
            for (slots, fs) in results.chunks_mut(chunk).zip(frames.chunks(chunk)) {
                let header = &header;
                s.spawn(move || {
                    for (slot, f) in slots.iter_mut().zip(fs) {
                        *slot = Some(encode_frame(f, header));
                    }
                });
            }
        });
    }
    let frames: Vec<EncodedFrame> = results
        .into_iter()
        .map(|r| r.expect("every frame encoded"))
        .collect::<Result<_>>()?;
    let payloads: Vec<Vec<u8>> = frames.iter().map(|f| f.payload.clone()).collect();
    let bytes = write_container(&header, &payloads)?;
    Ok(EncodedSequence {
        header,
        bytes,
        frames,
    })
}

pub fn decode_sequence(bytes: &[u8]) -> Result<DecodedSequence> {
    let (header, payloads) = read_container(bytes)?;
    let frames = payloads
        .iter()
        .enumerate()
        .map(|(i, p)| {
            decode_frame(p, &header).map_err(|e| match e {
                Error::Bitstream { context, message } => Error::Bitstream {
                    context: format!("frame {i}, {context}"),
                    message,
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DecodedSequence { header, frames })
}
