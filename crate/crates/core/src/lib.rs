//! Intra-frame screen-content codec.
//!
//! The crate is organised bottom-up:
//!
//! * [`media_io`] – frame buffers, Y4M/PPM I/O and PSNR.
//! * [`bitio`] – MSB-first bit reader/writer, exp-Golomb codes and the
//!   `SCCF` container.
//! * [`color_transform`] – RGB <-> YCoCg (lossy matrix and lossless lifting).
//! * [`residual`] – quantizer, integer DCT-II, BDPCM, transform-skip residual
//!   syntax and parity-inferred transform skip.
//! * [`ibc`] – reference sample memory, block-vector validity, history-based
//!   vector prediction and hash search.
//! * [`palette`] – palette derivation, predictor update and index-map runs.
//! * [`string_copy`] – intra string copy.
//! * [`deblock`] – boundary-strength decision and edge filter.
//! * [`codec`] – CU quadtree, rate-distortion mode decision, frame
//!   encode/decode.
//! * [`bdrate`] and [`corpus`] – evaluation helpers used by the CLI.

pub mod bdrate;
pub mod bitio;
pub mod codec;
pub mod color_transform;
pub mod corpus;
pub mod deblock;
mod error;
pub mod ibc;
pub mod media_io;
pub mod palette;
pub mod residual;
pub mod string_copy;

pub use bitio::{BitstreamHeader, ToolFlags};
pub use codec::{
    decode_sequence, encode_sequence, CodingUnit, DecodedSequence, EncodedSequence, EncoderConfig,
    PredMode,
};
pub use error::{Error, Result};
pub use ibc::BlockVector;
pub use media_io::{ChromaFormat, ColorSpace, Frame, PlaneBuffer, Psnr};
