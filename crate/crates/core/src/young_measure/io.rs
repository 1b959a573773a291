//! Text measure file:
//!
//! ```text
//! # rdmv-measure 1
//! # d = 1
//! # k = 4
//! # dims = 128
//! # lengths = 1
//! # times = 0 0.01 ...
//! # provenance = member-0 member-1 ...
//! t_idx,x_idx,s,v0,D00,w
//! ...
//! ```

use std::io::{BufRead, BufReader, Read, Write};

use super::{DiscreteYoungMeasure, MeasureError, SpaceGrid};

const MAGIC: &str = "rdmv-measure 1";

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_measure<W: Write>(m: &DiscreteYoungMeasure, mut out: W) -> std::io::Result<()> {
    let d = m.dim();
    writeln!(out, "# {MAGIC}")?;
    writeln!(out, "# d = {d}")?;
    writeln!(out, "# k = {}", m.atoms_per_cell())?;
    writeln!(out, "# dims = {}", join(&m.space.dims))?;
    writeln!(out, "# lengths = {}", join(&m.space.lengths))?;
    writeln!(out, "# times = {}", join(&m.times))?;
    writeln!(out, "# provenance = {}", m.provenance.join(" "))?;
    let mut header = vec!["t_idx".to_string(), "x_idx".into(), "s".into()];
    header.extend((0..d).map(|i| format!("v{i}")));
    header.extend((0..d * d).map(|i| format!("D{}{}", i / d, i % d)));
    header.push("w".into());
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(&header)?;
    for t in 0..m.times.len() {
        for x in 0..m.n_space() {
            for atom in m.atoms(m.cell_index(t, x)) {
                let mut rec = vec![t.to_string(), x.to_string(), atom.s.to_string()];
                rec.extend(atom.v.iter().map(f64::to_string));
                rec.extend(atom.d.iter().map(f64::to_string));
                rec.push(atom.w.to_string());
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, MeasureError> {
    value
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| MeasureError::Invalid(format!("bad {key} entry {s:?}"))))
        .collect()
}

pub fn read_measure<R: Read>(input: R) -> Result<DiscreteYoungMeasure, MeasureError> {
    let bad = |msg: String| MeasureError::Invalid(msg);
    let mut reader = BufReader::new(input);
    let mut header = std::collections::HashMap::new();
    let mut magic = false;
    let mut line = String::new();
    let mut body = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(|e| bad(e.to_string()))? == 0 {
            break;
        }
        let Some(meta) = line.strip_prefix('#') else {
            body.push_str(&line);
            break;
        };
        let meta = meta.trim();
        if meta == MAGIC {
            magic = true;
        } else if let Some((k, v)) = meta.split_once('=') {
            header.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    if !magic {
        return Err(bad("missing measure file signature".into()));
    }
    reader.read_to_string(&mut body).map_err(|e| bad(e.to_string()))?;
    let get = |k: &str| header.get(k).cloned().ok_or_else(|| bad(format!("missing header {k}")));
    let d: usize = get("d")?.parse().map_err(|_| bad("bad d".into()))?;
    let k: usize = get("k")?.parse().map_err(|_| bad("bad k".into()))?;
    let dims: Vec<usize> = parse_list("dims", &get("dims")?)?;
    let lengths: Vec<f64> = parse_list("lengths", &get("lengths")?)?;
    let times: Vec<f64> = parse_list("times", &get("times")?)?;
    let provenance: Vec<String> = get("provenance")?.split_whitespace().map(String::from).collect();
    if dims.len() != d || lengths.len() != d {
        return Err(bad("grid header does not match d".into()));
    }
    let space = SpaceGrid { dims, lengths };
    let n = space.cells() * times.len() * k;
    let (mut s, mut v, mut dm, mut w) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n * d),
        Vec::with_capacity(n * d * d),
        Vec::with_capacity(n),
    );
    let mut rows = csv::Reader::from_reader(body.as_bytes());
    let width = 4 + d + d * d;
    for (line_no, rec) in rows.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != width {
            return Err(bad(format!("row {line_no} has {} fields, expected {width}", rec.len())));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(format!("row {line_no}: bad number {:?}", &rec[i])));
        s.push(num(2)?);
        for i in 0..d {
            v.push(num(3 + i)?);
        }
        for i in 0..d * d {
            dm.push(num(3 + d + i)?);
        }
        w.push(num(width - 1)?);
    }
    DiscreteYoungMeasure::from_columns(space, times, k, (s, v, dm, w), provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young_measure::PhaseAtom;

    #[test]
    fn round_trip_2d() {
        let space = SpaceGrid { dims: vec![2, 3], lengths: vec![1.0, 2.0] };
        let cells = (0..12)
            .map(|c| {
                (0..2)
                    .map(|a| PhaseAtom {
                        s: 1.0 + c as f64 * 0.1 + a as f64,
                        v: vec![0.3 * c as f64, -0.1],
                        d: vec![1.0 / 3.0, 0.2, 0.2, -1e-17],
                        w: 0.5,
                    })
                    .collect()
            })
            .collect();
        let m = DiscreteYoungMeasure::from_atoms(space, vec![0.0, 0.5], cells, vec!["a".into(), "b".into()]).unwrap();
        let mut buf = Vec::new();
        write_measure(&m, &mut buf).unwrap();
        assert_eq!(read_measure(&buf[..]).unwrap(), m);
    }

    #[test]
    fn missing_signature_rejected() {
        assert!(read_measure("t_idx,x_idx\n".as_bytes()).is_err());
    }
}
