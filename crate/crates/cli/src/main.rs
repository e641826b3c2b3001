//! `scc` command-line tool: encode, decode, analyze, bdrate and gen-corpus.

mod analysis;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scc_core::corpus::{generate_frame, CorpusKind};
use scc_core::media_io::{emit_ppm, emit_y4m, load_ppm, load_y4m, Y4mStream};
use scc_core::{
    decode_sequence, encode_sequence, ChromaFormat, ColorSpace, EncoderConfig, Error, Frame,
    ToolFlags,
};

const DEFAULT_TOOLS: &str = "ibc,plt,tsm,bdpcm,isc,dbk";

#[derive(Parser)]
#[command(name = "scc", version, about = "Screen-content intra codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a Y4M sequence or PPM picture into an SCCF stream.
    Encode(EncodeArgs),
    /// Decode an SCCF stream to Y4M (or PPM for a single RGB picture).
    Decode(DecodeArgs),
    /// Per-frame bits, PSNR and CU mode shares as CSV.
    Analyze(AnalyzeArgs),
    /// Bjontegaard delta rate between two analyze CSVs, per class.
    Bdrate(BdrateArgs),
    /// Write deterministic synthetic screen-content pictures.
    GenCorpus(GenCorpusArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 27, value_parser = clap::value_parser!(u8).range(0..=51))]
    qp: u8,
    /// Comma separated tool list; "" disables every tool.
    #[arg(long, default_value = DEFAULT_TOOLS)]
    tools: String,
    #[arg(long)]
    lossless: bool,
    /// Adaptive colour transform (RGB 4:4:4 input only).
    #[arg(long)]
    act: bool,
    /// Infer transform skip from coefficient parity.
    #[arg(long)]
    parity: bool,
    /// Frame-level workers; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write the encoder reconstruction.
    #[arg(long)]
    recon: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Source pictures.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Reconstruction; decoded from --bits when omitted.
    #[arg(long)]
    rec: Option<PathBuf>,
    #[arg(long)]
    bits: PathBuf,
    /// Content class label written to every row.
    #[arg(long, default_value = "default")]
    class: String,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Append rows to --output instead of replacing it.
    #[arg(long, requires = "output")]
    append: bool,
}

#[derive(Args)]
struct BdrateArgs {
    #[arg(long)]
    anchor: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Text,
    Ui,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChromaArg {
    #[value(name = "444")]
    C444,
    #[value(name = "420")]
    C420,
    #[value(name = "400")]
    C400,
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Pictures to write, with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 512)]
    height: usize,
    #[arg(long, value_enum, default_value = "420")]
    chroma: ChromaArg,
    /// Keep RGB instead of converting to YCbCr (4:4:4 only).
    #[arg(long)]
    rgb: bool,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_BITSTREAM: u8 = 3;

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }

    /// Classifies a library error raised while handling `path`.
    pub fn from_core(path: &Path, e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Format(_) => EXIT_IO,
            Error::Exhausted(_) | Error::Bitstream { .. } => EXIT_BITSTREAM,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: format!("{}: {e}", path.display()),
        }
    }

    /// Any decoding problem in a stream file is a bitstream error, except
    /// failing to read the file at all.
    pub fn from_stream(path: &Path, e: Error) -> Self {
        let code = if matches!(e, Error::Io(_)) {
            EXIT_IO
        } else {
            EXIT_BITSTREAM
        };
        Self {
            code,
            message: format!("{}: {e}", path.display()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn is_ppm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ppm"))
}

pub fn read_pictures(path: &Path) -> CliResult<Vec<Frame>> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    let r = BufReader::new(file);
    if is_ppm(path) {
        load_ppm(r)
            .map(|f| vec![f])
            .map_err(|e| Failure::from_core(path, e))
    } else {
        load_y4m(r)
            .map(|s| s.frames)
            .map_err(|e| Failure::from_core(path, e))
    }
}

fn write_pictures(path: &Path, frames: Vec<Frame>) -> CliResult<()> {
    let file = File::create(path).map_err(|e| Failure::io(path, e))?;
    let mut w = BufWriter::new(file);
    if is_ppm(path) {
        if frames.len() != 1 {
            return Err(Failure::usage(format!(
                "{}: PPM holds one picture, got {}",
                path.display(),
                frames.len()
            )));
        }
        emit_ppm(&frames[0], &mut w).map_err(|e| Failure::from_core(path, e))?;
    } else {
        let stream = Y4mStream::from_frames(frames).map_err(|e| Failure::from_core(path, e))?;
        emit_y4m(&stream, &mut w).map_err(|e| Failure::from_core(path, e))?;
    }
    w.flush().map_err(|e| Failure::io(path, e))
}

fn read_stream(path: &Path) -> CliResult<scc_core::DecodedSequence> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    decode_sequence(&bytes).map_err(|e| Failure::from_stream(path, e))
}

fn encode(a: EncodeArgs) -> CliResult<()> {
    let mut tools = ToolFlags::parse_list(&a.tools).map_err(|e| Failure::usage(e.to_string()))?;
    tools.set(ToolFlags::LOSSLESS, a.lossless);
    tools.set(ToolFlags::ACT, a.act || tools.contains(ToolFlags::ACT));
    tools.set(
        ToolFlags::TSM_PARITY,
        a.parity || tools.contains(ToolFlags::TSM_PARITY),
    );
    let frames = read_pictures(&a.input)?;
    let cfg = EncoderConfig {
        qp: a.qp,
        tools,
        threads: a.threads,
    };
    let enc = encode_sequence(&frames, &cfg).map_err(|e| Failure::from_core(&a.input, e))?;
    std::fs::write(&a.output, &enc.bytes).map_err(|e| Failure::io(&a.output, e))?;
    if let Some(path) = &a.recon {
        write_pictures(path, enc.frames.into_iter().map(|f| f.recon).collect())?;
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> CliResult<()> {
    let dec = read_stream(&a.input)?;
    write_pictures(&a.output, dec.pictures())
}

fn gen_corpus(a: GenCorpusArgs) -> CliResult<()> {
    let kind = match a.kind {
        KindArg::Text => CorpusKind::Text,
        KindArg::Ui => CorpusKind::Ui,
        KindArg::Mixed => CorpusKind::Mixed,
    };
    let cf = match a.chroma {
        ChromaArg::C444 => ChromaFormat::Yuv444,
        ChromaArg::C420 => ChromaFormat::Yuv420,
        ChromaArg::C400 => ChromaFormat::Yuv400,
    };
    let cs = if a.rgb {
        ColorSpace::Rgb
    } else {
        ColorSpace::YCbCr
    };
    if a.width == 0 || a.height == 0 {
        return Err(Failure::usage("picture dimensions must be positive"));
    }
    std::fs::create_dir_all(&a.out).map_err(|e| Failure::io(&a.out, e))?;
    for seed in a.seed..a.seed + a.count {
        let frame = generate_frame(kind, seed, a.width, a.height, cf, cs)
            .map_err(|e| Failure::usage(e.to_string()))?;
        let path = a.out.join(format!("{}-{seed}.y4m", kind.name()));
        write_pictures(&path, vec![frame])?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Analyze(a) => analysis::analyze(a),
        Command::Bdrate(a) => analysis::bdrate(a),
        Command::GenCorpus(a) => gen_corpus(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "scc: error: {}",
                f.message.lines().next().unwrap_or_default()
            );
            ExitCode::from(f.code)
        }
    }
}
