use std::fs::File;
use std::io::Read;
use std::path::Path;

use shapemix::density::models;
use shapemix::MixtureSpec;

use crate::Failure;

/// Reads the sample from a CSV file: the first column that is numeric in
/// the first data row. A first row with no numeric cell is a header; any
/// later non-numeric row is an error.
pub fn read_sample_csv(path: &Path) -> Result<Vec<f64>, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::input(format!("cannot open {}: {e}", path.display())))?;
    parse_sample_csv(file, &path.display().to_string())
}

pub fn parse_sample_csv<R: Read>(reader: R, name: &str) -> Result<Vec<f64>, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut column: Option<usize> = None;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::input(format!("{name}: {e}")))?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let col = match column {
            Some(c) => c,
            None => match rec.iter().position(|c| c.parse::<f64>().is_ok()) {
                Some(c) => *column.insert(c),
                None if i == 0 => continue, // header
                None => {
                    return Err(Failure::input(format!("{name}:{line}: no numeric column")));
                }
            },
        };
        let cell = rec.get(col).unwrap_or("");
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(Failure::input(format!("{name}:{line}: non-finite value {v}")));
            }
            Err(_) => {
                return Err(Failure::input(format!(
                    "{name}:{line}: expected a number in column {}, found {cell:?}",
                    col + 1
                )));
            }
        }
    }
    if values.is_empty() {
        return Err(Failure::input(format!("{name}: no numeric values")));
    }
    Ok(values)
}

/// A mixture from a JSON file, or one of the built-in reference models
/// (`s1`..`s5`, `m1`, `m2`, `l1`..`l5`, `normal`) by name.
pub fn read_model(arg: &str) -> Result<MixtureSpec, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {arg}: {e}")))?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::input(format!("{arg}: invalid model: {e}")));
    }
    models::by_name(arg).ok_or_else(|| {
        Failure::input(format!("{arg}: no such file and not a built-in model name"))
    })
}
