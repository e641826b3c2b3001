//! CU syntax records and their bitstream form.

use super::mode::PredMode;
use crate::bitio::{BitReader, BitSink, ToolFlags};
use crate::ibc::{
    cbvp_classify, Block, BlockVector, HistoryVectorTable, ReferenceSampleMemory, CBVP_CLASSES,
};
use crate::media_io::{ChromaFormat, ColorSpace};
use crate::palette::{PaletteColor, PaletteSyntax, PaletteSyntaxParams};
use crate::residual::{
    avs3_tsm_infer, tsr_decode, tsr_encode, BdpcmDir, QuantParams, ResidualMode,
};
use crate::string_copy::{read_strings, sv_code, StringRun};
use crate::{Error, Result};

/// Largest transform / residual block edge.
pub const MAX_TU_SIZE: usize = 32;
/// Largest CU edge.
pub const MAX_CU_SIZE: usize = 64;

/// Per-picture constants every syntax decision depends on.
#[derive(Debug, Clone)]
pub struct SyntaxCtx {
    pub tools: ToolFlags,
    pub chroma_format: ChromaFormat,
    pub color_space: ColorSpace,
    pub bit_depth: u8,
    pub quant: QuantParams,
    /// Coded picture size (padded to the CU grid).
    pub width: usize,
    pub height: usize,
    pub modes: Vec<PredMode>,
}

impl SyntaxCtx {
    pub fn new(
        tools: ToolFlags,
        chroma_format: ChromaFormat,
        color_space: ColorSpace,
        bit_depth: u8,
        qp: u8,
        width: usize,
        height: usize,
    ) -> Self {
        let quant = QuantParams::new(qp, tools.contains(ToolFlags::LOSSLESS));
        let mut modes = vec![PredMode::Dc];
        if tools.contains(ToolFlags::IBC) {
            modes.push(PredMode::Ibc);
        }
        if tools.contains(ToolFlags::PLT) {
            modes.push(PredMode::Palette);
        }
        modes.extend([PredMode::Horizontal, PredMode::Vertical]);
        if tools.contains(ToolFlags::ISC) {
            modes.push(PredMode::Isc);
        }
        modes.push(PredMode::Planar);
        Self {
            tools,
            chroma_format,
            color_space,
            bit_depth,
            quant,
            width,
            height,
            modes,
        }
    }

    pub fn lossless(&self) -> bool {
        self.quant.lossless
    }

    pub fn min_cu(&self) -> usize {
        if self.chroma_format == ChromaFormat::Yuv420 {
            8
        } else {
            4
        }
    }

    pub fn num_planes(&self) -> usize {
        self.chroma_format.num_planes()
    }

    pub fn plane_shift(&self, plane: usize) -> (u32, u32) {
        if plane == 0 {
            (0, 0)
        } else {
            self.chroma_format.chroma_shift()
        }
    }

    pub fn act_allowed(&self) -> bool {
        self.tools.contains(ToolFlags::ACT)
            && self.color_space == ColorSpace::Rgb
            && self.chroma_format == ChromaFormat::Yuv444
    }

    /// Transform skip is inferred from level parity.
    pub fn parity(&self) -> bool {
        self.tools.contains(ToolFlags::TSM_PARITY) && !self.lossless()
    }

    fn tsm_flag_present(&self) -> bool {
        self.tools.contains(ToolFlags::TSM) && !self.lossless() && !self.parity()
    }

    pub fn bdpcm(&self) -> bool {
        self.tools.contains(ToolFlags::BDPCM)
    }

    /// Residual modes the grammar can express.
    pub fn residual_modes(&self) -> Vec<ResidualMode> {
        let mut out = Vec::new();
        if !self.lossless() {
            out.push(ResidualMode::Transform);
        }
        if self.lossless() || self.tools.contains(ToolFlags::TSM) {
            out.push(ResidualMode::Tsm);
            if self.bdpcm() {
                out.push(ResidualMode::TsmBdpcm(BdpcmDir::Horizontal));
                out.push(ResidualMode::TsmBdpcm(BdpcmDir::Vertical));
            }
        }
        out
    }

    /// Luma-only palette with a separately coded chroma residual.
    pub fn palette_chroma_residual(&self) -> bool {
        self.chroma_format == ChromaFormat::Yuv420
    }

    pub fn palette_params(&self, size: usize) -> PaletteSyntaxParams {
        let components = if self.chroma_format == ChromaFormat::Yuv444 {
            3
        } else {
            1
        };
        PaletteSyntaxParams {
            width: size,
            height: size,
            components,
            bit_depth: self.bit_depth,
            quant: self.quant,
        }
    }

    /// TU edge and count per side for a plane of a CU.
    pub fn tu_layout(&self, plane: usize, size: usize) -> (usize, usize) {
        let ps = size >> self.plane_shift(plane).0;
        let tu = ps.min(MAX_TU_SIZE);
        (tu, ps / tu)
    }
}

/// Quantized residual of a CU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuResidual {
    pub act: bool,
    pub mode: ResidualMode,
    /// Per plane, TUs in raster order; `None` is an all-zero TU.
    pub tus: Vec<Vec<Option<Vec<i32>>>>,
}

impl CuResidual {
    pub fn is_zero(&self) -> bool {
        self.tus.iter().flatten().all(Option::is_none)
    }

    /// Luma levels of every TU, concatenated; parity inference runs on these.
    pub fn luma_levels(&self) -> Vec<i32> {
        self.tus[0].iter().flatten().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CuPayload {
    Intra {
        residual: CuResidual,
    },
    Ibc {
        bv: BlockVector,
        class: Option<u8>,
        residual: CuResidual,
    },
    Palette {
        syntax: Box<PaletteSyntax>,
        chroma: Option<CuResidual>,
    },
    Isc {
        runs: Vec<StringRun>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingUnit {
    pub x: usize,
    pub y: usize,
    pub size: usize,
    pub mode: PredMode,
    pub payload: CuPayload,
}

impl CodingUnit {
    pub fn block(&self) -> Block {
        Block::new(self.x, self.y, self.size, self.size)
    }

    pub fn residual(&self) -> Option<&CuResidual> {
        match &self.payload {
            CuPayload::Intra { residual } | CuPayload::Ibc { residual, .. } => Some(residual),
            CuPayload::Palette { chroma, .. } => chroma.as_ref(),
            CuPayload::Isc { .. } => None,
        }
    }
}

/// Decoder-side state the CU grammar reads from.
pub struct ParseState<'a> {
    pub history: &'a HistoryVectorTable,
    pub predictor: &'a [PaletteColor],
    pub rsm: &'a ReferenceSampleMemory,
}

fn write_tus<S: BitSink>(
    sink: &mut S,
    ctx: &SyntaxCtx,
    res: &CuResidual,
    size: usize,
    planes: std::ops::Range<usize>,
) {
    for p in planes {
        let (tu, _) = ctx.tu_layout(p, size);
        for t in &res.tus[p] {
            sink.put_flag(t.is_some());
            if let Some(levels) = t {
                tsr_encode(sink, levels, tu, tu);
            }
        }
    }
}

fn read_tus(
    r: &mut BitReader<'_>,
    ctx: &SyntaxCtx,
    size: usize,
    planes: std::ops::Range<usize>,
) -> Result<Vec<Vec<Option<Vec<i32>>>>> {
    let mut out = vec![Vec::new(); planes.start];
    for p in planes {
        let (tu, n) = ctx.tu_layout(p, size);
        let mut tus = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            tus.push(if r.read_flag()? {
                Some(tsr_decode(r, tu, tu)?)
            } else {
                None
            });
        }
        out.push(tus);
    }
    Ok(out)
}

fn write_bdpcm<S: BitSink>(sink: &mut S, mode: ResidualMode) {
    sink.put_flag(mode.bdpcm_dir().is_some());
    if let Some(d) = mode.bdpcm_dir() {
        sink.put_flag(d == BdpcmDir::Vertical);
    }
}

fn read_bdpcm(r: &mut BitReader<'_>) -> Result<ResidualMode> {
    Ok(if r.read_flag()? {
        ResidualMode::TsmBdpcm(if r.read_flag()? {
            BdpcmDir::Vertical
        } else {
            BdpcmDir::Horizontal
        })
    } else {
        ResidualMode::Tsm
    })
}

/// Residual mode a parity-coded CU decodes to.
pub fn parity_mode(res_tus: &[Vec<Option<Vec<i32>>>]) -> bool {
    let luma: Vec<i32> = res_tus[0].iter().flatten().flatten().copied().collect();
    avs3_tsm_infer(&luma)
}

pub fn write_residual<S: BitSink>(sink: &mut S, ctx: &SyntaxCtx, res: &CuResidual, size: usize) {
    if ctx.act_allowed() {
        sink.put_flag(res.act);
    }
    let all = 0..ctx.num_planes();
    if ctx.parity() {
        write_tus(sink, ctx, res, size, all);
        debug_assert_eq!(
            parity_mode(&res.tus),
            res.mode.is_tsm(),
            "residual mode disagrees with level parity"
        );
        if res.mode.is_tsm() && ctx.bdpcm() {
            write_bdpcm(sink, res.mode);
        }
        return;
    }
    if ctx.tsm_flag_present() {
        sink.put_flag(res.mode.is_tsm());
    }
    if res.mode.is_tsm() && ctx.bdpcm() {
        write_bdpcm(sink, res.mode);
    }
    write_tus(sink, ctx, res, size, all);
}

pub fn read_residual(r: &mut BitReader<'_>, ctx: &SyntaxCtx, size: usize) -> Result<CuResidual> {
    let act = ctx.act_allowed() && r.read_flag()?;
    let all = 0..ctx.num_planes();
    if ctx.parity() {
        let tus = read_tus(r, ctx, size, all)?;
        let mode = if parity_mode(&tus) {
            if ctx.bdpcm() {
                read_bdpcm(r)?
            } else {
                ResidualMode::Tsm
            }
        } else {
            ResidualMode::Transform
        };
        return Ok(CuResidual { act, mode, tus });
    }
    let tsm = if ctx.tsm_flag_present() {
        r.read_flag()?
    } else {
        ctx.lossless()
    };
    let mode = if tsm && ctx.bdpcm() {
        read_bdpcm(r)?
    } else if tsm {
        ResidualMode::Tsm
    } else {
        ResidualMode::Transform
    };
    let tus = read_tus(r, ctx, size, all)?;
    Ok(CuResidual { act, mode, tus })
}

pub fn write_cu<S: BitSink>(sink: &mut S, ctx: &SyntaxCtx, cu: &CodingUnit) {
    let idx = ctx
        .modes
        .iter()
        .position(|&m| m == cu.mode)
        .expect("mode enabled");
    sink.put_ue(idx as u32);
    match &cu.payload {
        CuPayload::Intra { residual } => write_residual(sink, ctx, residual, cu.size),
        CuPayload::Ibc {
            bv,
            class,
            residual,
        } => {
            sink.put_flag(class.is_some());
            match class {
                Some(c) => sink.put_bits(u64::from(*c), 3),
                None => {
                    sink.put_se(bv.x);
                    sink.put_se(bv.y);
                }
            }
            write_residual(sink, ctx, residual, cu.size);
        }
        CuPayload::Palette { syntax, chroma } => {
            syntax.write(sink, &ctx.palette_params(cu.size));
            if let Some(res) = chroma {
                write_tus(sink, ctx, res, cu.size, 1..ctx.num_planes());
            }
        }
        CuPayload::Isc { runs } => {
            for run in runs {
                sv_code(run, sink);
            }
        }
    }
}

pub fn read_cu(
    r: &mut BitReader<'_>,
    ctx: &SyntaxCtx,
    st: &ParseState<'_>,
    x: usize,
    y: usize,
    size: usize,
) -> Result<CodingUnit> {
    let at = || format!("CU ({x}, {y}) size {size}");
    let idx = r.read_ue()? as usize;
    let mode = *ctx.modes.get(idx).ok_or_else(|| {
        Error::bitstream(at(), format!("mode index {idx} of {}", ctx.modes.len()))
    })?;
    let block = Block::new(x, y, size, size);
    let payload = match mode {
        PredMode::Dc | PredMode::Planar | PredMode::Horizontal | PredMode::Vertical => {
            CuPayload::Intra {
                residual: read_residual(r, ctx, size)?,
            }
        }
        PredMode::Ibc => {
            let (bv, class) = if r.read_flag()? {
                let c = r.read_bits(3)? as usize;
                let cands = cbvp_classify(st.history, block);
                let v = cands.get(c).copied().flatten().ok_or_else(|| {
                    Error::bitstream(
                        at(),
                        format!("empty or invalid BV class {c} (of {CBVP_CLASSES})"),
                    )
                })?;
                (v, Some(c as u8))
            } else {
                (BlockVector::new(r.read_se()?, r.read_se()?), None)
            };
            if !crate::ibc::bv_valid(bv, block, st.rsm) {
                return Err(Error::bitstream(
                    at(),
                    format!("invalid block vector ({}, {})", bv.x, bv.y),
                ));
            }
            CuPayload::Ibc {
                bv,
                class,
                residual: read_residual(r, ctx, size)?,
            }
        }
        PredMode::Palette => {
            let syntax = PaletteSyntax::read(r, st.predictor.len(), &ctx.palette_params(size))?;
            let chroma = if ctx.palette_chroma_residual() {
                let tus = read_tus(r, ctx, size, 1..ctx.num_planes())?;
                Some(CuResidual {
                    act: false,
                    mode: ResidualMode::Tsm,
                    tus,
                })
            } else {
                None
            };
            CuPayload::Palette {
                syntax: Box::new(syntax),
                chroma,
            }
        }
        PredMode::Isc => {
            let mut h = st.history.clone();
            CuPayload::Isc {
                runs: read_strings(r, block, st.rsm, &mut h)?,
            }
        }
    };
    Ok(CodingUnit {
        x,
        y,
        size,
        mode,
        payload,
    })
}
