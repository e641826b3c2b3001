//! Binary PPM (P6) stills, stored as a three-plane RGB 4:4:4 frame.

use std::io::{BufRead, Write};

use super::{ChromaFormat, ColorSpace, Frame, PlaneBuffer};
use crate::{Error, Result};

fn next_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = Vec::new();
    loop {
        let mut b = [0u8];
        if r.read(&mut b)? == 0 {
            break;
        }
        match b[0] {
            b'#' if tok.is_empty() => {
                let mut skip = Vec::new();
                r.read_until(b'\n', &mut skip)?;
            }
            c if c.is_ascii_whitespace() => {
                if !tok.is_empty() {
                    break;
                }
            }
            c => tok.push(c),
        }
    }
    if tok.is_empty() {
        return Err(Error::Format("truncated PPM header".into()));
    }
    String::from_utf8(tok).map_err(|_| Error::Format("non-ASCII PPM header".into()))
}

pub fn load_ppm<R: BufRead>(mut r: R) -> Result<Frame> {
    if next_token(&mut r)? != "P6" {
        return Err(Error::Format("not a binary PPM (P6)".into()));
    }
    let mut num = |what: &str| -> Result<usize> {
        next_token(&mut r)?
            .parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PPM {what}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if maxval != 255 {
        return Err(Error::Unsupported(format!("PPM maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format("zero PPM dimension".into()));
    }
    let mut data = vec![0u8; width * height * 3];
    r.read_exact(&mut data)
        .map_err(|_| Error::Format("truncated PPM payload".into()))?;
    let planes = (0..3)
        .map(|c| {
            let bytes: Vec<u8> = data.iter().skip(c).step_by(3).copied().collect();
            PlaneBuffer::from_bytes(width, height, &bytes)
        })
        .collect::<Result<Vec<_>>>()?;
    Frame::from_planes(planes, ChromaFormat::Yuv444, ColorSpace::Rgb)
}

pub fn emit_ppm<W: Write>(frame: &Frame, mut w: W) -> Result<()> {
    if frame.chroma_format != ChromaFormat::Yuv444 || frame.color_space != ColorSpace::Rgb {
        return Err(Error::Unsupported(
            "PPM output needs an RGB 4:4:4 frame".into(),
        ));
    }
    write!(w, "P6\n{} {}\n255\n", frame.width(), frame.height())?;
    let n = frame.width() * frame.height();
    let mut data = Vec::with_capacity(n * 3);
    for i in 0..n {
        for p in &frame.planes {
            data.push(p.samples()[i] as u8);
        }
    }
    w.write_all(&data)?;
    Ok(())
}
