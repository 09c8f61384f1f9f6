//! Sector files: CSV with header `id,apex_x,apex_y,direction_deg,angle_deg`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AngularSector, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorRecord {
    pub id: u64,
    pub apex_x: f64,
    pub apex_y: f64,
    pub direction_deg: f64,
    pub angle_deg: f64,
}

impl SectorRecord {
    pub fn sector(&self) -> Result<AngularSector> {
        AngularSector::from_pose(
            Point::new(self.apex_x, self.apex_y),
            self.direction_deg.to_radians(),
            self.angle_deg.to_radians(),
        )
    }

    fn check_finite(&self) -> std::result::Result<(), &'static str> {
        for (name, v) in [
            ("apex_x", self.apex_x),
            ("apex_y", self.apex_y),
            ("direction_deg", self.direction_deg),
            ("angle_deg", self.angle_deg),
        ] {
            if !v.is_finite() {
                return Err(name);
            }
        }
        Ok(())
    }
}

/// Sectors of every record, in order.
pub fn to_sectors(records: &[SectorRecord]) -> Result<Vec<AngularSector>> {
    records.iter().map(SectorRecord::sector).collect()
}

/// Parses and validates sector records. Rows are numbered from 0 after the
/// header; lines are 1-based file lines.
pub fn read_sectors<R: Read>(reader: R) -> Result<Vec<SectorRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut out = Vec::new();
    let mut raw = csv::StringRecord::new();
    let mut row = 0usize;
    loop {
        match rdr.read_record(&mut raw) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let line = raw.position().map_or(0, |p| p.line());
        let rec: SectorRecord = raw.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if let Err(field) = rec.check_finite() {
            return Err(Error::Range { line, field });
        }
        rec.sector().map_err(|e| Error::Row {
            row,
            line,
            source: Box::new(e),
        })?;
        out.push(rec);
        row += 1;
    }
    Ok(out)
}

pub fn load_sectors(path: &Path) -> Result<Vec<SectorRecord>> {
    read_sectors(File::open(path)?)
}

/// Writes records with the standard header, even when there are none.
pub fn write_sectors<W: Write>(writer: W, records: &[SectorRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(["id", "apex_x", "apex_y", "direction_deg", "angle_deg"])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_sectors(path: &Path, records: &[SectorRecord]) -> Result<()> {
    write_sectors(File::create(path)?, records)
}
