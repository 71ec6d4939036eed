//! CSV serialization of profiles at full double precision.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::transform::{ChartKind, Origin, RadialProfile, TransformedProfile};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_columns<W: Write>(w: W, header: [&str; 5], cols: [&[f64]; 5]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for i in 0..cols[0].len() {
        wr.write_record(cols.iter().map(|c| fmt_f64(c[i])))?;
    }
    wr.flush()?;
    Ok(())
}

fn read_columns<R: Read>(r: R, header: [&str; 5]) -> Result<[Vec<f64>; 5]> {
    let mut rd = csv::Reader::from_reader(r);
    let got: Vec<String> = rd.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if got != header {
        return Err(Error::Profile(format!(
            "expected header {}, found {}",
            header.join(","),
            got.join(",")
        )));
    }
    let mut cols: [Vec<f64>; 5] = Default::default();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Profile(format!("row {} has {} fields", line + 2, rec.len())));
        }
        for (c, field) in cols.iter_mut().zip(rec.iter()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Profile(format!("row {}: bad number {field:?}", line + 2)))?;
            c.push(v);
        }
    }
    Ok(cols)
}

/// Writes `r,u,du,v,dv`.
pub fn write_profile_csv<W: Write>(profile: &RadialProfile, w: W) -> Result<()> {
    write_columns(
        w,
        ["r", "u", "du", "v", "dv"],
        [&profile.r, &profile.u, &profile.du, &profile.v, &profile.dv],
    )
}

pub fn read_profile_csv<R: Read>(r: R, params: ProblemParams, origin: Origin) -> Result<RadialProfile> {
    let [r, u, du, v, dv] = read_columns(r, ["r", "u", "du", "v", "dv"])?;
    RadialProfile::new(params, r, u, du, v, dv, origin)
}

/// Writes `t,w,dw,z,dz`.
pub fn write_transformed_csv<W: Write>(tp: &TransformedProfile, w: W) -> Result<()> {
    write_columns(
        w,
        ["t", "w", "dw", "z", "dz"],
        [&tp.t, &tp.w, &tp.dw, &tp.z, &tp.dz],
    )
}

pub fn read_transformed_csv<R: Read>(r: R, params: ProblemParams, chart: ChartKind) -> Result<TransformedProfile> {
    let [t, w, dw, z, dz] = read_columns(r, ["t", "w", "dw", "z", "dz"])?;
    TransformedProfile::new(params, chart, t, w, dw, z, dz)
}

/// Writes two columns `t,w`.
pub fn write_tw_csv<W: Write>(t: &[f64], w: &[f64], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["t", "w"])?;
    for (a, b) in t.iter().zip(w) {
        wr.write_record([fmt_f64(*a), fmt_f64(*b)])?;
    }
    wr.flush()?;
    Ok(())
}
