//! Fixtures shared by the criterion benches.

use scc_core::corpus::{generate_frame, CorpusKind};
use scc_core::{ChromaFormat, ColorSpace, Frame};

pub fn text_frame(size: usize) -> Frame {
    generate_frame(
        CorpusKind::Text,
        1,
        size,
        size,
        ChromaFormat::Yuv444,
        ColorSpace::Rgb,
    )
    .expect("corpus frame")
}

pub fn ui_frame(size: usize) -> Frame {
    generate_frame(
        CorpusKind::Ui,
        1,
        size,
        size,
        ChromaFormat::Yuv444,
        ColorSpace::Rgb,
    )
    .expect("corpus frame")
}
