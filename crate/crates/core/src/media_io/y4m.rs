//! YUV4MPEG2 reader/writer.
//!
//! Header tokens are kept verbatim so that a conformant stream is re-emitted
//! byte-for-byte.

use std::io::{BufRead, Read, Write};

use super::{ChromaFormat, ColorSpace, Frame, PlaneBuffer};
use crate::{Error, Result};

const MAGIC: &str = "YUV4MPEG2";
const RGB_TAG: &str = "XCOLORSPACE=RGB";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub chroma_format: ChromaFormat,
    pub color_space: ColorSpace,
    /// Every token after the magic, in original order.
    pub tokens: Vec<String>,
}

impl Y4mHeader {
    pub fn new(
        width: usize,
        height: usize,
        chroma_format: ChromaFormat,
        color_space: ColorSpace,
    ) -> Self {
        let c = match chroma_format {
            ChromaFormat::Yuv420 => "C420jpeg",
            ChromaFormat::Yuv444 => "C444",
            ChromaFormat::Yuv400 => "Cmono",
        };
        let mut tokens = vec![
            format!("W{width}"),
            format!("H{height}"),
            "F30:1".to_string(),
            "Ip".to_string(),
            "A1:1".to_string(),
            c.to_string(),
        ];
        if color_space == ColorSpace::Rgb {
            tokens.push(RGB_TAG.to_string());
        }
        Self {
            width,
            height,
            chroma_format,
            color_space,
            tokens,
        }
    }

    fn parse(line: &str) -> Result<Self> {
        let mut parts = line.split(' ');
        if parts.next() != Some(MAGIC) {
            return Err(Error::Format("missing YUV4MPEG2 magic".into()));
        }
        let tokens: Vec<String> = parts.map(str::to_string).collect();
        let mut width = None;
        let mut height = None;
        let mut chroma_format = ChromaFormat::Yuv420;
        let mut color_space = ColorSpace::YCbCr;
        for tok in &tokens {
            let Some(tag) = tok.chars().next() else {
                return Err(Error::Format("empty header token".into()));
            };
            let val = &tok[1..];
            match tag {
                'W' => width = Some(parse_dim(val, "width")?),
                'H' => height = Some(parse_dim(val, "height")?),
                'C' => {
                    chroma_format = match val {
                        "420" | "420jpeg" | "420paldv" | "420mpeg2" => ChromaFormat::Yuv420,
                        "444" => ChromaFormat::Yuv444,
                        "mono" => ChromaFormat::Yuv400,
                        other => {
                            return Err(Error::Unsupported(format!("y4m colorspace C{other}")))
                        }
                    }
                }
                'X' if tok == RGB_TAG => color_space = ColorSpace::Rgb,
                _ => {}
            }
        }
        let (Some(width), Some(height)) = (width, height) else {
            return Err(Error::Format("y4m header lacks W or H".into()));
        };
        if color_space == ColorSpace::Rgb && chroma_format != ChromaFormat::Yuv444 {
            return Err(Error::Format("RGB y4m must be C444".into()));
        }
        Ok(Self {
            width,
            height,
            chroma_format,
            color_space,
            tokens,
        })
    }

    fn frame_bytes(&self) -> usize {
        (0..self.chroma_format.num_planes())
            .map(|p| {
                let (w, h) = self.chroma_format.plane_dims(p, self.width, self.height);
                w * h
            })
            .sum()
    }
}

fn parse_dim(v: &str, what: &str) -> Result<usize> {
    match v.parse::<usize>() {
        Ok(d) if d > 0 => Ok(d),
        _ => Err(Error::Format(format!("bad {what} '{v}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Y4mStream {
    pub header: Y4mHeader,
    pub frames: Vec<Frame>,
    /// Parameter text following each `FRAME` marker (usually empty).
    pub frame_params: Vec<String>,
}

impl Y4mStream {
    pub fn from_frames(frames: Vec<Frame>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Format("no frames".into()))?;
        let header = Y4mHeader::new(
            first.width(),
            first.height(),
            first.chroma_format,
            first.color_space,
        );
        if frames.iter().any(|f| !f.same_geometry(first)) {
            return Err(Error::DimensionMismatch("frames differ in geometry".into()));
        }
        let frame_params = vec![String::new(); frames.len()];
        Ok(Self {
            header,
            frames,
            frame_params,
        })
    }
}

fn read_line<R: BufRead>(r: &mut R, limit: usize) -> Result<Option<String>> {
    let mut buf = Vec::new();
    let n = r.by_ref().take(limit as u64).read_until(b'\n', &mut buf)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() != Some(&b'\n') {
        return Err(Error::Format("unterminated y4m header line".into()));
    }
    buf.pop();
    String::from_utf8(buf)
        .map(Some)
        .map_err(|_| Error::Format("non-ASCII y4m header".into()))
}

pub fn load_y4m<R: BufRead>(mut reader: R) -> Result<Y4mStream> {
    let line =
        read_line(&mut reader, 4096)?.ok_or_else(|| Error::Format("empty y4m stream".into()))?;
    let header = Y4mHeader::parse(&line)?;
    let frame_len = header.frame_bytes();
    let mut frames = Vec::new();
    let mut frame_params = Vec::new();
    let mut payload = vec![0u8; frame_len];
    while let Some(line) = read_line(&mut reader, 4096)? {
        let params = line
            .strip_prefix("FRAME")
            .ok_or_else(|| Error::Format(format!("expected FRAME marker, got '{line}'")))?;
        if !params.is_empty() && !params.starts_with(' ') {
            return Err(Error::Format(format!("bad FRAME marker '{line}'")));
        }
        reader
            .read_exact(&mut payload)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    Error::Format(format!("truncated payload in frame {}", frames.len()))
                }
                _ => Error::Io(e),
            })?;
        let mut off = 0;
        let mut planes = Vec::with_capacity(3);
        for p in 0..header.chroma_format.num_planes() {
            let (w, h) = header
                .chroma_format
                .plane_dims(p, header.width, header.height);
            planes.push(PlaneBuffer::from_bytes(w, h, &payload[off..off + w * h])?);
            off += w * h;
        }
        frames.push(Frame::from_planes(
            planes,
            header.chroma_format,
            header.color_space,
        )?);
        frame_params.push(params.to_string());
    }
    Ok(Y4mStream {
        header,
        frames,
        frame_params,
    })
}

pub fn emit_y4m<W: Write>(stream: &Y4mStream, mut w: W) -> Result<()> {
    write!(w, "{MAGIC}")?;
    for t in &stream.header.tokens {
        write!(w, " {t}")?;
    }
    writeln!(w)?;
    for (i, f) in stream.frames.iter().enumerate() {
        if f.width() != stream.header.width
            || f.height() != stream.header.height
            || f.chroma_format != stream.header.chroma_format
        {
            return Err(Error::DimensionMismatch(format!(
                "frame {i} does not match the y4m header"
            )));
        }
        if f.bit_depth() != 8 {
            return Err(Error::Unsupported("only 8-bit y4m output".into()));
        }
        let params = stream.frame_params.get(i).map(String::as_str).unwrap_or("");
        writeln!(w, "FRAME{params}")?;
        for p in &f.planes {
            w.write_all(&p.to_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}
