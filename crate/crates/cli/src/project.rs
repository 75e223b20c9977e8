//! `export-projection`: cylinder records to radial coordinates.

use crate::config::{Format, ProjectionConfig};
use crate::manifest::OutputSet;
use crate::Failure;
use cylweb::geometry::{project_f, CylPoint};
use cylweb::lattice::path::rescale_point;
use cylweb::WindingFn64;
use serde_json::{Map, Value};
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader};

/// Input coordinate fields; every other field is kept as an identifier.
const COORDS: [&str; 4] = ["x", "t", "height", "angle"];

pub struct Projected {
    pub records: usize,
    pub skipped: usize,
}

fn coords(rec: &Map<String, Value>, lattice_n: Option<u32>) -> Option<(f64, f64)> {
    let num = |k: &str| rec.get(k).and_then(Value::as_f64);
    match lattice_n {
        Some(n) => {
            let (x, t) = rescale_point(rec.get("x")?.as_u64()? as u32, rec.get("height")?.as_i64()?, n);
            Some((x, t))
        }
        None => Some((num("x").or_else(|| num("angle"))?, num("t").or_else(|| num("height"))?)),
    }
}

pub fn run(c: &ProjectionConfig, out: &mut OutputSet) -> Result<Projected, Failure> {
    if c.inputs.is_empty() {
        return Err(Failure::Usage("no input files".into()));
    }
    let f = WindingFn64::by_name(c.winding.name()).expect("known winding");
    let mut rows: Vec<Map<String, Value>> = Vec::new();
    let mut skipped = 0;
    for (src, path) in c.inputs.iter().enumerate() {
        let file = std::fs::File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        for (line_no, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(Failure::io)?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Map<String, Value> = serde_json::from_str(&line).map_err(|e| Failure::Usage(format!("{}:{}: {e}", path.display(), line_no + 1)))?;
            let (x, t) = coords(&rec, c.lattice_n).ok_or_else(|| Failure::Usage(format!("{}:{}: record has no usable (x, t)", path.display(), line_no + 1)))?;
            let p = CylPoint::new(x, t).map_err(|e| Failure::Usage(e.to_string()))?;
            let Ok(q) = project_f(p, &f) else {
                skipped += 1;
                continue;
            };
            let (px, py) = q.cartesian();
            let mut row: Map<String, Value> = rec.into_iter().filter(|(k, _)| !COORDS.contains(&k.as_str())).collect();
            row.insert("source".into(), src.into());
            row.insert("height".into(), t.into());
            row.insert("theta".into(), q.theta.into());
            row.insert("r".into(), q.r.into());
            row.insert("x".into(), px.into());
            row.insert("y".into(), py.into());
            rows.push(row);
        }
    }
    let bytes = match c.format {
        Format::Ndjson => {
            let mut buf = Vec::new();
            for r in &rows {
                serde_json::to_writer(&mut buf, r).map_err(|e| Failure::Runtime(e.to_string()))?;
                buf.push(b'\n');
            }
            buf
        }
        Format::Csv => {
            // identifier columns first (sorted), then the projection
            let fixed = ["source", "height", "theta", "r", "x", "y"];
            let ids: BTreeSet<&str> = rows.iter().flat_map(|r| r.keys().map(String::as_str)).filter(|k| !fixed.contains(k)).collect();
            let header: Vec<&str> = ids.into_iter().chain(fixed).collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).map_err(|e| Failure::Runtime(e.to_string()))?;
            for r in &rows {
                let cells = header.iter().map(|k| match r.get(*k) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                });
                w.write_record(cells).map_err(|e| Failure::Runtime(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?
        }
    };
    out.write(&format!("projection.{}", c.format.ext()), &bytes).map_err(Failure::io)?;
    Ok(Projected { records: rows.len(), skipped })
}
