//! Record types for the CSV and NDJSON outputs, and writers for them.

use serde::{Deserialize, Serialize};
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub walker_id: usize,
    pub height: i64,
    pub x: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLawRow {
    pub path1: String,
    pub path2: String,
    pub nb: u32,
    pub prob_num: i64,
    pub prob_den: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleRecord {
    pub walker_id: usize,
    pub t: f64,
    pub x: f64,
    pub root_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub t: f64,
    pub survival: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestRecord {
    pub slice_k: usize,
    pub angle: f64,
    pub ancestor_slice: usize,
    pub ancestor_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "h_K")]
    pub h_k: f64,
    pub survival: f64,
    pub stderr: f64,
    pub normalized_stat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub k: usize,
    pub n_k: f64,
    pub sigma2_k: f64,
    #[serde(rename = "V_k")]
    pub v_k: f64,
}

pub fn write_ndjson<W: Write, T: Serialize>(mut w: W, records: &[T]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(io::Error::other)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// CSV with a header row; quoting follows RFC 4180.
pub fn write_csv<W: Write, T: Serialize>(w: W, records: &[T]) -> io::Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(true).from_writer(w);
    for r in records {
        wr.serialize(r).map_err(io::Error::other)?;
    }
    wr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_quoting() {
        let rows = vec![PairLawRow { path1: "0 1".into(), path2: "a,\"b\"".into(), nb: 1, prob_num: 1, prob_den: 8 }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "path1,path2,nb,prob_num,prob_den\n0 1,\"a,\"\"b\"\"\",1,1,8\n");
    }

    #[test]
    fn ndjson_one_line_each() {
        let recs = vec![PathRecord { walker_id: 0, height: 2, x: 3 }, PathRecord { walker_id: 1, height: 2, x: 1 }];
        let mut buf = Vec::new();
        write_ndjson(&mut buf, &recs).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 2);
        assert_eq!(s.lines().next().unwrap(), r#"{"walker_id":0,"height":2,"x":3}"#);
    }
}
