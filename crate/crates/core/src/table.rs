//! Comma-separated trajectory tables with a `#`-prefixed header block.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::state::ObservableRecord;
use crate::{Error, Result};

pub const SCHEMA: &str = "spinboson-trajectory/1";
pub const COLUMNS: [&str; 9] = ["t", "p_z", "p_x", "p_y", "entropy", "sigma", "e_total", "e_bath", "norm"];

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Create `path` for writing, refusing to clobber unless `force`.
pub fn create(path: &Path, force: bool) -> Result<fs::File> {
    if path.exists() && !force {
        return Err(Error::WouldOverwrite(path.display().to_string()));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

pub fn render_trajectory(header: &[(String, String)], records: &[ObservableRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 220 + 512);
    out.push_str(&format!("# schema = {SCHEMA}\n"));
    for (k, v) in header {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in records {
        let row = [r.t, r.p_z, r.p_x, r.p_y, r.entropy, r.sigma, r.e_total, r.e_bath, r.norm];
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_trajectory(path: &Path, header: &[(String, String)], records: &[ObservableRecord], force: bool) -> Result<()> {
    let mut file = create(path, force)?;
    file.write_all(render_trajectory(header, records).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn parse_table(text: &str) -> Result<Table> {
    let mut table = Table::default();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                table.header.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if table.columns.is_empty() {
            table.columns = line.split(',').map(|c| c.trim().to_string()).collect();
            continue;
        }
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("bad table cell: {e}")))?;
        if row.len() != table.columns.len() {
            return Err(Error::Config(format!(
                "row has {} cells, header has {}",
                row.len(),
                table.columns.len()
            )));
        }
        table.rows.push(row);
    }
    Ok(table)
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text)
}

/// Rebuild trajectory records from a table written by [`write_trajectory`].
pub fn records_from_table(table: &Table) -> Result<Vec<ObservableRecord>> {
    let cols: Vec<Vec<f64>> = COLUMNS
        .iter()
        .map(|c| table.column(c).ok_or_else(|| Error::Config(format!("missing column `{c}`"))))
        .collect::<Result<_>>()?;
    Ok((0..table.rows.len())
        .map(|k| ObservableRecord {
            t: cols[0][k],
            p_z: cols[1][k],
            p_x: cols[2][k],
            p_y: cols[3][k],
            entropy: cols[4][k],
            sigma: cols[5][k],
            e_total: cols[6][k],
            e_bath: cols[7][k],
            norm: cols[8][k],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rows_round_trip(vals in proptest::collection::vec(-1e300f64..1e300, 9)) {
            let rec = ObservableRecord {
                t: vals[0], p_z: vals[1], p_x: vals[2], p_y: vals[3], entropy: vals[4],
                sigma: vals[5], e_total: vals[6], e_bath: vals[7], norm: vals[8],
            };
            let text = render_trajectory(&[("alpha".into(), "0.1".into())], &[rec]);
            let table = parse_table(&text).unwrap();
            prop_assert_eq!(table.header_value("schema"), Some(SCHEMA));
            prop_assert_eq!(records_from_table(&table).unwrap(), vec![rec]);
        }
    }

    #[test]
    fn nan_sigma_survives() {
        let rec = ObservableRecord {
            t: 0.0,
            p_x: 0.0,
            p_y: 0.0,
            p_z: 1.0,
            entropy: 0.0,
            sigma: f64::NAN,
            e_total: 0.0,
            e_bath: 0.0,
            norm: 1.0,
        };
        let back = records_from_table(&parse_table(&render_trajectory(&[], &[rec])).unwrap()).unwrap();
        assert!(back[0].sigma.is_nan());
    }

    #[test]
    fn refuses_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_trajectory(&p, &[], &[], false).unwrap();
        assert!(matches!(write_trajectory(&p, &[], &[], false), Err(Error::WouldOverwrite(_))));
        write_trajectory(&p, &[], &[], true).unwrap();
    }
}
