//! CSV-producing analysis and BD-rate over analysis tables.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use scc_core::bdrate::{bd_rate, RdPoint};
use scc_core::media_io::psnr;
use scc_core::PredMode;

use crate::{read_pictures, read_stream, AnalyzeArgs, BdrateArgs, CliResult, Failure};

const PSNR_COLUMNS: [&str; 3] = ["psnr_y", "psnr_u", "psnr_v"];

pub fn header() -> Vec<String> {
    let mut h: Vec<String> = ["class", "qp", "frame", "bits"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(PSNR_COLUMNS.iter().map(|s| s.to_string()));
    h.extend(PredMode::ALL.iter().map(|m| format!("pct_{}", m.name())));
    h
}

pub fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let reference = read_pictures(&a.reference)?;
    let stream = read_stream(&a.bits)?;
    let rec = match &a.rec {
        Some(p) => read_pictures(p)?,
        None => stream.pictures(),
    };
    if reference.len() != rec.len() || rec.len() != stream.frames.len() {
        return Err(Failure::usage(format!(
            "frame counts differ: ref {}, rec {}, stream {}",
            reference.len(),
            rec.len(),
            stream.frames.len()
        )));
    }
    let mut rows = Vec::with_capacity(rec.len());
    for (i, ((r, d), f)) in reference.iter().zip(&rec).zip(&stream.frames).enumerate() {
        let p = psnr(r, d).map_err(|e| Failure::usage(format!("frame {i}: {e}")))?;
        let mut row = vec![
            a.class.clone(),
            stream.header.qp.to_string(),
            i.to_string(),
            f.stats.bits.to_string(),
        ];
        row.extend((0..3).map(|k| p.get(k).map_or(String::new(), |v| v.to_string())));
        row.extend(f.stats.mode_percent().iter().map(|v| format!("{v:.3}")));
        rows.push(row);
    }

    let out: Box<dyn Write> = match &a.output {
        Some(path) => {
            let exists = path.metadata().is_ok_and(|m| m.len() > 0);
            let file = OpenOptions::new()
                .create(true)
                .write(true)
                .append(a.append)
                .truncate(!a.append)
                .open(path)
                .map_err(|e| Failure::io(path, e))?;
            if a.append && exists {
                return write_rows(Box::new(file), None, &rows, path);
            }
            Box::new(file)
        }
        None => Box::new(std::io::stdout()),
    };
    write_rows(
        out,
        Some(header()),
        &rows,
        a.output.as_deref().unwrap_or(Path::new("<stdout>")),
    )
}

fn write_rows(
    out: Box<dyn Write>,
    header: Option<Vec<String>>,
    rows: &[Vec<String>],
    path: &Path,
) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Failure::io(path, e);
    if let Some(h) = header {
        w.write_record(&h).map_err(err)?;
    }
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush().map_err(|e| Failure::io(path, e))
}

/// Per class and QP: total bits and mean luma PSNR.
fn load_curves(path: &Path) -> CliResult<BTreeMap<String, Vec<RdPoint>>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Failure::io(path, e))?;
    let headers = rd.headers().map_err(|e| Failure::io(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::usage(format!("{}: no '{name}' column", path.display())))
    };
    let (c_class, c_qp, c_bits, c_psnr) = (col("class")?, col("qp")?, col("bits")?, col("psnr_y")?);
    let mut acc: BTreeMap<(String, u32), (f64, f64, usize)> = BTreeMap::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Failure::io(path, e))?;
        let bad =
            |what: &str| Failure::usage(format!("{} row {}: bad {what}", path.display(), line + 1));
        let field = |i: usize| rec.get(i).unwrap_or("");
        let qp: u32 = field(c_qp).parse().map_err(|_| bad("qp"))?;
        let bits: f64 = field(c_bits).parse().map_err(|_| bad("bits"))?;
        let q: f64 = match field(c_psnr) {
            "lossless" => return Err(bad("psnr_y (lossless rows have no finite PSNR)")),
            s => s.parse().map_err(|_| bad("psnr_y"))?,
        };
        let e = acc
            .entry((field(c_class).to_string(), qp))
            .or_insert((0.0, 0.0, 0));
        e.0 += bits;
        e.1 += q;
        e.2 += 1;
    }
    let mut curves: BTreeMap<String, Vec<RdPoint>> = BTreeMap::new();
    for ((class, _), (bits, q, n)) in acc {
        curves
            .entry(class)
            .or_default()
            .push(RdPoint::new(bits, q / n as f64));
    }
    Ok(curves)
}

pub fn bdrate(a: BdrateArgs) -> CliResult<()> {
    let anchor = load_curves(&a.anchor)?;
    let test = load_curves(&a.test)?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let out = |e: csv::Error| Failure::io(Path::new("<stdout>"), e);
    w.write_record(["class", "bd_rate_percent"]).map_err(out)?;
    let mut any = false;
    for (class, ta) in &anchor {
        let Some(tt) = test.get(class) else { continue };
        let v = bd_rate(ta, tt).map_err(|e| Failure::usage(format!("class {class}: {e}")))?;
        w.write_record([class.clone(), format!("{v:.2}")])
            .map_err(out)?;
        any = true;
    }
    if !any {
        return Err(Failure::usage("no class appears in both tables"));
    }
    w.flush().map_err(|e| Failure::io(Path::new("<stdout>"), e))
}
