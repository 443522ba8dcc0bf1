//! CSV tables and JSON metadata. Floats in CSV carry 17 significant digits.

use crate::equilibrium::SupportTag;
use crate::error::Result;
use crate::measures::{AtomicConfiguration, GridMeasure};
use crate::surface::SurfaceId;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureMeta {
    pub schema_version: u32,
    pub surface: SurfaceId,
    pub resolution: usize,
    pub mass: f64,
    pub nodes: usize,
}

pub fn measure_meta(mu: &GridMeasure) -> MeasureMeta {
    MeasureMeta {
        schema_version: SCHEMA_VERSION,
        surface: mu.disc.model.id(),
        resolution: mu.disc.model.resolution,
        mass: mu.mass(),
        nodes: mu.weights.len(),
    }
}

/// node_index, coord_re, coord_im, weight
pub fn write_measure_csv<W: Write>(w: W, mu: &GridMeasure) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["node_index", "coord_re", "coord_im", "weight"])?;
    for (i, &x) in mu.weights.iter().enumerate() {
        let p = mu.disc.node_point(i);
        out.write_record([i.to_string(), fmt_f64(p.coord.re), fmt_f64(p.coord.im), fmt_f64(x)])?;
    }
    out.flush()?;
    Ok(())
}

fn tag_name(t: SupportTag) -> &'static str {
    match t {
        SupportTag::Hole => "hole",
        SupportTag::BoundaryLayer => "boundary_layer",
        SupportTag::Bulk => "bulk",
        SupportTag::Forbidden => "forbidden",
        SupportTag::Transition => "transition",
    }
}

/// node_index, coord_re, coord_im, tag
pub fn write_support_csv<W: Write>(w: W, mu: &GridMeasure, tags: &[SupportTag]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["node_index", "coord_re", "coord_im", "tag"])?;
    for (i, &t) in tags.iter().enumerate() {
        let p = mu.disc.node_point(i);
        out.write_record([i.to_string(), fmt_f64(p.coord.re), fmt_f64(p.coord.im), tag_name(t).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// index, coord_re, coord_im, at_infinity
pub fn write_points_csv<W: Write>(w: W, p: &AtomicConfiguration) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["index", "coord_re", "coord_im", "at_infinity"])?;
    for (i, x) in p.points.iter().enumerate() {
        out.write_record([i.to_string(), fmt_f64(x.coord.re), fmt_f64(x.coord.im), x.at_infinity.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// trial, index, coord_re, coord_im, at_infinity
pub fn write_zeros_csv<'a, W: Write>(w: W, samples: impl IntoIterator<Item = (u64, &'a AtomicConfiguration)>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["trial", "index", "coord_re", "coord_im", "at_infinity"])?;
    for (t, z) in samples {
        for (i, x) in z.points.iter().enumerate() {
            let (re, im) = if x.at_infinity { (f64::INFINITY, 0.0) } else { (x.coord.re, x.coord.im) };
            out.write_record([t.to_string(), i.to_string(), fmt_f64(re), fmt_f64(im), x.at_infinity.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub ylow: f64,
    pub yhigh: f64,
    pub series: String,
}

/// x, y, ylow, yhigh, series
pub fn write_plot_csv<W: Write>(w: W, rows: &[PlotRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["x", "y", "ylow", "yhigh", "series"])?;
    for r in rows {
        out.write_record([fmt_f64(r.x), fmt_f64(r.y), fmt_f64(r.ylow), fmt_f64(r.yhigh), r.series.clone()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn plot_csv_quotes_per_rfc4180() {
        let mut buf = vec![];
        let rows = [PlotRow { x: 1.0, y: 2.0, ylow: 1.5, yhigh: 2.5, series: "a,b".into() }];
        write_plot_csv(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,y,ylow,yhigh,series\r\n"));
        assert!(s.contains("\"a,b\""));
    }
}
