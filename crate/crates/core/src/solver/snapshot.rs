//! Snapshot files: CSV (human-readable, exact round trip) and a compact
//! binary form with a JSON header.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::field::Snapshot;
use super::grid::Geometry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub t: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub components: usize,
    pub cells: Vec<usize>,
    pub h: f64,
}

impl SnapshotHeader {
    pub fn new(geo: &Geometry, t: f64) -> Self {
        Self {
            t,
            n: geo.n,
            components: geo.components,
            cells: geo.m[..geo.n].to_vec(),
            h: geo.h,
        }
    }

    fn len(&self) -> usize {
        self.cells.iter().product::<usize>() * self.components
    }
}

/// First line `t,n,N,cells,h`, second line its values (cells joined by `x`),
/// then `x,y,u0,u1,…` per cell.
pub fn write_snapshot_csv(w: &mut impl Write, geo: &Geometry, snap: &Snapshot) -> Result<()> {
    let cells: Vec<String> = geo.m[..geo.n].iter().map(|m| m.to_string()).collect();
    writeln!(w, "t,n,N,cells,h")?;
    writeln!(w, "{},{},{},{},{}", snap.t, geo.n, geo.components, cells.join("x"), geo.h)?;
    let comps: Vec<String> = (0..geo.components).map(|c| format!("u{c}")).collect();
    writeln!(w, "x,y,{}", comps.join(","))?;
    for cell in 0..geo.cell_count() {
        let x = geo.cell_center(cell);
        write!(w, "{},{}", x[0], x[1])?;
        for c in 0..geo.components {
            write!(w, ",{}", snap.u[cell * geo.components + c])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_snapshot_csv(r: impl BufRead) -> Result<(SnapshotHeader, Snapshot)> {
    let bad = |m: &str| Error::InvalidParameter(format!("snapshot csv: {m}"));
    let mut lines = r.lines();
    let mut next = || -> Result<String> { lines.next().ok_or_else(|| bad("truncated"))?.map_err(Error::from) };
    if next()?.trim() != "t,n,N,cells,h" {
        return Err(bad("missing header"));
    }
    let hv = next()?;
    let parts: Vec<&str> = hv.trim().split(',').collect();
    if parts.len() != 5 {
        return Err(bad("header needs 5 fields"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer"));
    let header = SnapshotHeader {
        t: num(parts[0])?,
        n: int(parts[1])?,
        components: int(parts[2])?,
        cells: parts[3].split('x').map(int).collect::<Result<_>>()?,
        h: num(parts[4])?,
    };
    next()?;
    let mut u = Vec::with_capacity(header.len());
    for _ in 0..header.len() / header.components {
        let line = next()?;
        let vals: Vec<&str> = line.trim().split(',').collect();
        if vals.len() != 2 + header.components {
            return Err(bad("row width"));
        }
        for v in &vals[2..] {
            u.push(num(v)?);
        }
    }
    Ok((header.clone(), Snapshot { t: header.t, u }))
}

/// `u32` header length, JSON header, then little-endian `f64` values.
pub fn write_snapshot_binary(w: &mut impl Write, geo: &Geometry, snap: &Snapshot) -> Result<()> {
    let header = serde_json::to_vec(&SnapshotHeader::new(geo, snap.t))?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    for x in &snap.u {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot_binary(r: &mut impl Read) -> Result<(SnapshotHeader, Snapshot)> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut hb = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut hb)?;
    let header: SnapshotHeader = serde_json::from_slice(&hb)?;
    let mut u = Vec::with_capacity(header.len());
    let mut buf = [0u8; 8];
    for _ in 0..header.len() {
        r.read_exact(&mut buf)?;
        u.push(f64::from_le_bytes(buf));
    }
    Ok((header.clone(), Snapshot { t: header.t, u }))
}
