//! `SCCF` container: a fixed little-endian header followed by
//! length-prefixed frame payloads.
//!
//! ```text
//! magic        4  "SCCF"
//! version      1
//! width        2  u16 LE
//! height       2  u16 LE
//! chroma       1  bits 0-3: 0 = 4:0:0, 1 = 4:2:0, 2 = 4:4:4; bits 4-5: 0 = YCbCr, 1 = RGB
//! ctu_size     1  log2 of the CTU size (7 = 128)
//! qp           1
//! tool_flags   2  u16 LE, see ToolFlags
//! frame_count  4  u32 LE
//! then per frame: u32 LE payload length, payload bytes (MSB-first bits)
//! ```

use bitflags::bitflags;

use crate::media_io::{ChromaFormat, ColorSpace};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SCCF";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 18;

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct ToolFlags: u16 {
        const IBC = 1 << 0;
        const PLT = 1 << 1;
        const TSM = 1 << 2;
        const BDPCM = 1 << 3;
        const ISC = 1 << 4;
        const ACT = 1 << 5;
        const DBK = 1 << 6;
        const LOSSLESS = 1 << 7;
        /// Transform skip inferred from coefficient parity instead of a flag.
        const TSM_PARITY = 1 << 8;
    }
}

impl ToolFlags {
    /// Parses a comma separated list such as `"ibc,plt,tsm"`. The empty
    /// string yields no tools.
    pub fn parse_list(list: &str) -> Result<ToolFlags> {
        let mut flags = ToolFlags::empty();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            flags |= match name.to_ascii_lowercase().as_str() {
                "ibc" => ToolFlags::IBC,
                "plt" | "palette" => ToolFlags::PLT,
                "tsm" => ToolFlags::TSM,
                "bdpcm" => ToolFlags::BDPCM,
                "isc" => ToolFlags::ISC,
                "act" => ToolFlags::ACT,
                "dbk" => ToolFlags::DBK,
                "lossless" => ToolFlags::LOSSLESS,
                "parity" => ToolFlags::TSM_PARITY,
                other => return Err(Error::Config(format!("unknown tool '{other}'"))),
            };
        }
        Ok(flags)
    }

    pub fn validate(self) -> Result<()> {
        if self.contains(ToolFlags::BDPCM) && !self.contains(ToolFlags::TSM) {
            return Err(Error::Config("BDPCM requires TSM".into()));
        }
        if self.contains(ToolFlags::TSM_PARITY) && !self.contains(ToolFlags::TSM) {
            return Err(Error::Config("parity-inferred TSM requires TSM".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitstreamHeader {
    pub version: u8,
    pub width: u16,
    pub height: u16,
    pub chroma_format: ChromaFormat,
    pub color_space: ColorSpace,
    pub ctu_size: u32,
    pub qp: u8,
    pub tool_flags: ToolFlags,
    pub frame_count: u32,
}

impl BitstreamHeader {
    fn chroma_byte(&self) -> Result<u8> {
        let cf = match self.chroma_format {
            ChromaFormat::Yuv400 => 0,
            ChromaFormat::Yuv420 => 1,
            ChromaFormat::Yuv444 => 2,
        };
        let cs = match self.color_space {
            ColorSpace::YCbCr => 0,
            ColorSpace::Rgb => 1,
            ColorSpace::YCoCg => {
                return Err(Error::Unsupported("YCoCg pictures in the container".into()))
            }
        };
        Ok(cf | (cs << 4))
    }

    pub fn to_bytes(&self) -> Result<[u8; HEADER_LEN]> {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4] = self.version;
        b[5..7].copy_from_slice(&self.width.to_le_bytes());
        b[7..9].copy_from_slice(&self.height.to_le_bytes());
        b[9] = self.chroma_byte()?;
        b[10] = match self.ctu_size {
            64 => 6,
            128 => 7,
            s => return Err(Error::Unsupported(format!("CTU size {s}"))),
        };
        b[11] = self.qp;
        b[12..14].copy_from_slice(&self.tool_flags.bits().to_le_bytes());
        b[14..18].copy_from_slice(&self.frame_count.to_le_bytes());
        Ok(b)
    }

    pub fn parse(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN {
            return Err(Error::Format("container shorter than its header".into()));
        }
        if b[0..4] != MAGIC {
            return Err(Error::Format("bad magic, not an SCCF stream".into()));
        }
        let version = b[4];
        if version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!("container version {version}")));
        }
        let width = u16::from_le_bytes([b[5], b[6]]);
        let height = u16::from_le_bytes([b[7], b[8]]);
        if width == 0 || height == 0 {
            return Err(Error::Format("zero picture dimension".into()));
        }
        let chroma_format = match b[9] & 0x0f {
            0 => ChromaFormat::Yuv400,
            1 => ChromaFormat::Yuv420,
            2 => ChromaFormat::Yuv444,
            v => return Err(Error::Format(format!("bad chroma format {v}"))),
        };
        let color_space = match b[9] >> 4 {
            0 => ColorSpace::YCbCr,
            1 if chroma_format == ChromaFormat::Yuv444 => ColorSpace::Rgb,
            v => return Err(Error::Format(format!("bad colour space {v}"))),
        };
        let ctu_size = match b[10] {
            6 => 64,
            7 => 128,
            v => return Err(Error::Format(format!("bad CTU size code {v}"))),
        };
        let qp = b[11];
        if qp > 51 {
            return Err(Error::Format(format!("qp {qp} out of range")));
        }
        let raw = u16::from_le_bytes([b[12], b[13]]);
        let tool_flags = ToolFlags::from_bits(raw)
            .ok_or_else(|| Error::Format(format!("unknown tool bits {raw:#06x}")))?;
        tool_flags
            .validate()
            .map_err(|e| Error::Format(e.to_string()))?;
        let frame_count = u32::from_le_bytes([b[14], b[15], b[16], b[17]]);
        Ok(Self {
            version,
            width,
            height,
            chroma_format,
            color_space,
            ctu_size,
            qp,
            tool_flags,
            frame_count,
        })
    }
}

pub fn write_container(header: &BitstreamHeader, payloads: &[Vec<u8>]) -> Result<Vec<u8>> {
    if header.frame_count as usize != payloads.len() {
        return Err(Error::Config(
            "frame_count does not match the number of payloads".into(),
        ));
    }
    let mut out = header.to_bytes()?.to_vec();
    for p in payloads {
        let len =
            u32::try_from(p.len()).map_err(|_| Error::Unsupported("payload over 4 GiB".into()))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(p);
    }
    Ok(out)
}

/// Splits a container into its header and borrowed frame payloads.
pub fn read_container(data: &[u8]) -> Result<(BitstreamHeader, Vec<&[u8]>)> {
    let header = BitstreamHeader::parse(data)?;
    let mut pos = HEADER_LEN;
    let mut payloads = Vec::with_capacity(header.frame_count as usize);
    for i in 0..header.frame_count {
        let len_bytes = data
            .get(pos..pos + 4)
            .ok_or_else(|| Error::Format(format!("missing length of frame {i}")))?;
        let len = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
        pos += 4;
        let payload = data
            .get(pos..pos + len)
            .ok_or_else(|| Error::Format(format!("truncated payload of frame {i}")))?;
        payloads.push(payload);
        pos += len;
    }
    if pos != data.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after last frame",
            data.len() - pos
        )));
    }
    Ok((header, payloads))
}
