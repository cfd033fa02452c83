//! CSV and JSON writers for the documented output schemas.
//!
//! | file            | columns                                              |
//! |-----------------|------------------------------------------------------|
//! | paths           | `path_index,t,r,y`                                   |
//! | explosions      | `path_index,exploded,tau_hat` (`inf` for survivors)  |
//! | trace           | `t,r,y`                                              |
//! | region          | `sigma,beta_max,delta2_star`                         |
//! | futures         | `T,delta,estimate,std_error,n_exploded,diverged`     |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::criteria::RegionCurve;
use crate::error::Result;
use crate::pricing::FuturesRow;
use crate::sde::{PathResult, Sample};

#[derive(Serialize)]
struct PathRow {
    path_index: u64,
    t: f64,
    r: f64,
    y: f64,
}

#[derive(Serialize)]
struct ExplosionRow {
    path_index: u64,
    exploded: bool,
    tau_hat: f64,
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(true).from_writer(w)
}

pub fn write_paths<W: Write>(w: W, paths: &[PathResult]) -> Result<()> {
    let mut out = csv_writer(w);
    for p in paths {
        for s in &p.samples {
            out.serialize(PathRow {
                path_index: p.path_index,
                t: s.t,
                r: s.r,
                y: s.y,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per path; `taus[i]` belongs to path `i`.
pub fn write_explosions<W: Write>(w: W, taus: &[f64]) -> Result<()> {
    let mut out = csv_writer(w);
    for (i, &tau) in taus.iter().enumerate() {
        out.serialize(ExplosionRow {
            path_index: i as u64,
            exploded: tau.is_finite(),
            tau_hat: tau,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(w: W, trace: &[Sample]) -> Result<()> {
    let mut out = csv_writer(w);
    for s in trace {
        out.serialize(s)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_region<W: Write>(w: W, curve: &RegionCurve) -> Result<()> {
    let mut out = csv_writer(w);
    for p in &curve.points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_futures<W: Write>(w: W, rows: &[FuturesRow]) -> Result<()> {
    let mut out = csv_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Any serializable rows, header taken from the field names.
pub fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut out = csv_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn to_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(BufWriter<File>) -> Result<()>,
{
    f(BufWriter::new(File::create(path)?))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
