//! Plain-text geometry writers.

use std::io::{self, Write};

use crate::Vector;

/// Wavefront OBJ with 1-based face indices.
pub fn write_obj<W: Write, const D: usize>(out: &mut W, points: &[Vector<D>], triangles: &[[usize; 3]]) -> io::Result<()> {
    for p in points {
        let z = if D > 2 { p[2] } else { 0.0 };
        writeln!(out, "v {:.17e} {:.17e} {:.17e}", p[0], p[1], z)?;
    }
    for t in triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// Closed polyline as CSV; the first point is repeated at the end.
pub fn write_polyline_csv<W: Write, const D: usize>(out: &mut W, points: &[Vector<D>]) -> io::Result<()> {
    let header: Vec<String> = (0..D).map(|i| format!("x{i}")).collect();
    writeln!(out, "index,{}", header.join(","))?;
    for (k, p) in points.iter().chain(points.first()).enumerate() {
        let cols: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{k},{}", cols.join(","))?;
    }
    Ok(())
}
