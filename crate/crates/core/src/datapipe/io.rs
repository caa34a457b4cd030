//! Feature CSV reader and writer.
//!
//! ```text
//! subject_id,segment_id,valence_raw,arousal_raw,modality:GSR,modality:GSR,modality:ECG
//! ,,,,gsr_1,gsr_2,ecg_1
//! s01,v01,7,3,0.12,-0.4,0.9
//! ```
//!
//! Columns of one modality are contiguous; their order defines the layout.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imstore::DatasetLayout;

use super::{FeatureRow, FeatureTable};

const META: [&str; 4] = ["subject_id", "segment_id", "valence_raw", "arousal_raw"];
const MODALITY_PREFIX: &str = "modality:";

pub fn load_features(path: impl AsRef<Path>, schema: Option<&DatasetLayout>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_features(file, path, schema)
}

fn parse_error(path: &Path, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn read_features<R: Read>(reader: R, path: &Path, schema: Option<&DatasetLayout>) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = records
        .next()
        .ok_or_else(|| parse_error(path, 1, 1, "missing modality header row"))??;
    for (i, want) in META.iter().enumerate() {
        let got = header.get(i).unwrap_or("");
        if got.trim() != *want {
            return Err(parse_error(
                path,
                1,
                i + 1,
                format!("expected {want:?}, found {got:?}"),
            ));
        }
    }
    let mut modalities: Vec<(String, usize)> = Vec::new();
    for (i, cell) in header.iter().enumerate().skip(META.len()) {
        let name = cell
            .trim()
            .strip_prefix(MODALITY_PREFIX)
            .filter(|n| !n.is_empty())
            .ok_or_else(|| {
                parse_error(path, 1, i + 1, format!("expected \"modality:<name>\", found {cell:?}"))
            })?;
        match modalities.last_mut() {
            Some((last, n)) if last == name => *n += 1,
            _ => {
                if modalities.iter().any(|(m, _)| m == name) {
                    return Err(parse_error(
                        path,
                        1,
                        i + 1,
                        format!("columns of modality {name:?} are not contiguous"),
                    ));
                }
                if let Some(schema) = schema {
                    if !schema.modalities().iter().any(|m| m.name == name) {
                        return Err(parse_error(path, 1, i + 1, format!("unknown modality {name:?}")));
                    }
                }
                modalities.push((name.to_string(), 1));
            }
        }
    }
    if modalities.is_empty() {
        return Err(parse_error(path, 1, META.len() + 1, "no feature columns"));
    }
    let layout = DatasetLayout::new(modalities)?;
    if let Some(schema) = schema {
        if *schema != layout {
            return Err(parse_error(
                path,
                1,
                1,
                format!("layout {:?} does not match the expected {:?}", layout.modalities(), schema.modalities()),
            ));
        }
    }
    let width = META.len() + layout.total_channels();

    let names = records
        .next()
        .ok_or_else(|| parse_error(path, 2, 1, "missing channel-name header row"))??;
    if names.len() != width {
        return Err(parse_error(
            path,
            2,
            names.len().min(width) + 1,
            format!("expected {width} columns, found {}", names.len()),
        ));
    }
    let channel_names: Vec<String> = names.iter().skip(META.len()).map(|s| s.trim().to_string()).collect();

    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() != width {
            return Err(parse_error(
                path,
                line,
                record.len().min(width) + 1,
                format!("expected {width} columns, found {}", record.len()),
            ));
        }
        let num = |col: usize| -> Result<f64> {
            let cell = record[col].trim();
            cell.parse::<f64>()
                .map_err(|_| parse_error(path, line, col + 1, format!("non-numeric cell {cell:?}")))
        };
        let values = (META.len()..width).map(num).collect::<Result<Vec<_>>>()?;
        rows.push(FeatureRow {
            subject: record[0].trim().to_string(),
            segment: record[1].trim().to_string(),
            valence_raw: num(2)?,
            arousal_raw: num(3)?,
            values,
        });
    }
    FeatureTable::new(layout, channel_names, rows)
}

/// Writes the table; floats use the shortest representation that parses
/// back to the same value.
pub fn save_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    let mut file = File::create(path)?;
    write_features(table, &mut file)?;
    file.flush()?;
    Ok(())
}

pub(crate) fn write_features<W: Write>(table: &FeatureTable, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let mut header: Vec<String> = META.iter().map(|s| s.to_string()).collect();
    for m in table.layout.modalities() {
        header.extend(std::iter::repeat_n(format!("{MODALITY_PREFIX}{}", m.name), m.channels));
    }
    w.write_record(&header)?;
    let mut names: Vec<String> = vec![String::new(); META.len()];
    names.extend(table.channel_names.iter().cloned());
    w.write_record(&names)?;
    for r in &table.rows {
        let mut rec = vec![
            r.subject.clone(),
            r.segment.clone(),
            r.valence_raw.to_string(),
            r.arousal_raw.to_string(),
        ];
        rec.extend(r.values.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
