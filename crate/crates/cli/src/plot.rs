//! Plot-data emission: full fields plus a midline cross-section.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lane_emden::ScalarField;

use crate::error::{io_err, CliError};

/// Writes `<dir>/<field>.csv` and `<dir>/<field>.midline.csv` for `which`,
/// which is a field name or `all`. Returns the written paths.
pub fn emit_plot_data(
    fields: &BTreeMap<String, ScalarField>,
    dir: &Path,
    which: &str,
) -> Result<Vec<PathBuf>, CliError> {
    let names: Vec<&String> = if which == "all" {
        fields.keys().collect()
    } else {
        match fields.get_key_value(which) {
            Some((k, _)) => vec![k],
            None => {
                let available: Vec<&str> = fields.keys().map(String::as_str).collect();
                return Err(CliError::Usage(format!(
                    "unknown field {which:?}; available: {}",
                    if available.is_empty() { "none".to_string() } else { available.join(", ") }
                )));
            }
        }
    };
    let mut written = Vec::new();
    for name in names {
        let field = &fields[name];
        let full = dir.join(format!("{name}.csv"));
        fs::write(&full, field.to_csv_string()).map_err(io_err(&full))?;
        let mid = dir.join(format!("{name}.midline.csv"));
        fs::write(&mid, midline_csv(field)).map_err(io_err(&mid))?;
        written.push(full);
        written.push(mid);
    }
    Ok(written)
}

/// `x[,y],value` rows along the grid midline.
pub fn midline_csv(field: &ScalarField) -> String {
    let grid = field.grid();
    let mut s = String::from(if grid.dimension() == 1 { "x,value\n" } else { "x,y,value\n" });
    for k in grid.midline_nodes() {
        for c in grid.point(k) {
            s.push_str(&format!("{c:.16e},"));
        }
        s.push_str(&format!("{:.16e}\n", field.values()[k]));
    }
    s
}
