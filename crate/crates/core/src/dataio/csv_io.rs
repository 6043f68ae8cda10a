use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::hints::{ColumnHint, Hints, KindHint};
use super::metadata::{write_metadata, ScalingMetadata};
use super::{category_labels, infer_kind, parse_finite, Column, ColumnSpec, DatasetFrame, Kind};
use crate::error::{Error, Result};

pub fn read_csv(path: &Path, hints: Option<&Hints>, delimiter: u8) -> Result<DatasetFrame> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    read_csv_from(file, hints, delimiter)
}

/// Parses delimited text with a header row. Empty cells are missing.
/// Rows are numbered from 1 (the first data row) in errors.
pub fn read_csv_from<R: Read>(reader: R, hints: Option<&Hints>, delimiter: u8) -> Result<DatasetFrame> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(parse_error(0, name, "duplicate column name"));
        }
    }
    let empty = Hints::default();
    let hints = hints.unwrap_or(&empty);
    if let Some(unknown) = hints.columns.keys().find(|k| !seen.contains(k.as_str())) {
        return Err(parse_error(0, unknown, "hinted column is not in the header"));
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != header.len() {
            let column = header.get(record.len()).or(header.last()).cloned().unwrap_or_default();
            return Err(parse_error(
                row,
                &column,
                &format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push(field.trim().to_string());
        }
    }

    let columns = header
        .iter()
        .zip(cells)
        .map(|(name, tokens)| parse_column(name, &tokens, hints.get(name).copied().unwrap_or_default()))
        .collect::<Result<Vec<_>>>()?;
    DatasetFrame::new(columns)
}

fn parse_error(row: usize, column: &str, message: &str) -> Error {
    Error::Parse { row, column: column.to_string(), message: message.to_string() }
}

fn parse_column(name: &str, tokens: &[String], hint: ColumnHint) -> Result<Column> {
    let present: Vec<&str> = tokens.iter().map(String::as_str).filter(|t| !t.is_empty()).collect();
    let (kind, categories) = match hint.kind {
        Some(KindHint::Real) => (Kind::Real, Vec::new()),
        Some(KindHint::PositiveReal) => (Kind::PositiveReal, Vec::new()),
        Some(KindHint::Count) => (Kind::Count, Vec::new()),
        Some(KindHint::Binary) => (Kind::Binary, Vec::new()),
        Some(KindHint::Categorical(Some(k))) => {
            (Kind::Categorical(k), (0..k).map(|c| c.to_string()).collect())
        }
        Some(KindHint::Categorical(None)) => categorical(&present, name)?,
        None => match hint.family.map(Kind::of_family) {
            Some(Kind::Categorical(k)) => (Kind::Categorical(k), (0..k).map(|c| c.to_string()).collect()),
            Some(other) => (other, Vec::new()),
            None => match infer_kind(&present).map_err(|e| e.in_column(name))? {
                Kind::Categorical(_) => categorical(&present, name)?,
                other => (other, Vec::new()),
            },
        },
    };
    let family = hint.family.unwrap_or_else(|| kind.default_family());
    if !kind.admits(family) {
        return Err(Error::Invalid(format!("kind {kind} cannot be modeled as {family}")).in_column(name));
    }

    let index: HashMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut values = Vec::with_capacity(tokens.len());
    let mut mask = Vec::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        if token.is_empty() {
            values.push(f64::NAN);
            mask.push(false);
            continue;
        }
        let value = match kind {
            Kind::Categorical(_) => index.get(token.as_str()).map(|&c| c as f64),
            _ => parse_finite(token).filter(|&x| match kind {
                Kind::Real => true,
                Kind::PositiveReal => family.in_support(x),
                Kind::Count => x >= 0.0 && x.fract() == 0.0,
                Kind::Binary => x == 0.0 || x == 1.0,
                Kind::Categorical(_) => unreachable!(),
            }),
        };
        let Some(value) = value else {
            return Err(parse_error(i + 1, name, &format!("`{token}` is not a valid {kind} value")));
        };
        values.push(value);
        mask.push(true);
    }
    let mut spec = ColumnSpec::new(name, kind, family);
    spec.categories = categories;
    Ok(Column::new(spec, values, mask))
}

fn categorical(present: &[&str], name: &str) -> Result<(Kind, Vec<String>)> {
    let labels = category_labels(present);
    if labels.len() < 2 {
        return Err(Error::DegenerateColumn { statistic: "distinct categories", value: labels.len() as f64 }
            .in_column(name));
    }
    Ok((Kind::Categorical(labels.len()), labels))
}

/// Shortest text that parses back to the same double.
pub fn format_value(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn cell(column: &Column, row: usize) -> String {
    if !column.mask[row] {
        return String::new();
    }
    let x = column.values[row];
    if matches!(column.spec.kind, Kind::Categorical(_)) && !column.spec.categories.is_empty() {
        if let Some(label) = column.spec.categories.get(x as usize) {
            return label.clone();
        }
    }
    format_value(x)
}

pub fn write_csv<W: Write>(frame: &DatasetFrame, writer: W, delimiter: u8) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    wtr.write_record(frame.names())?;
    for row in 0..frame.n_rows {
        wtr.write_record(frame.columns.iter().map(|c| cell(c, row)))?;
    }
    wtr.flush().map_err(|source| Error::Io { path: "<csv output>".into(), source })?;
    Ok(())
}

/// Writes scaled data and its metadata sidecar.
pub fn write_scaled(
    frame: &DatasetFrame,
    metadata: &ScalingMetadata,
    out_data: &Path,
    out_meta: &Path,
    delimiter: u8,
) -> Result<()> {
    let io_err = |source| Error::Io { path: out_data.to_path_buf(), source };
    let file = File::create(out_data).map_err(io_err)?;
    let mut buf = BufWriter::new(file);
    write_csv(frame, &mut buf, delimiter).map_err(|e| match e {
        Error::Io { source, .. } => io_err(source),
        other => other,
    })?;
    buf.flush().map_err(io_err)?;
    write_metadata(metadata, out_meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfam::Family;

    fn read(text: &str, hints: Option<&str>) -> Result<DatasetFrame> {
        let hints = hints.map(|h| Hints::from_json_str(h).unwrap());
        read_csv_from(text.as_bytes(), hints.as_ref(), b',')
    }

    #[test]
    fn gap_is_masked() {
        let f = read("a,b\n1.5,-2\n,3.25\n4,5\n", None).unwrap();
        assert_eq!(f.n_rows, 3);
        let a = f.column("a").unwrap();
        assert_eq!(a.mask, vec![true, false, true]);
        assert!(a.values[1].is_nan());
        assert_eq!(f.column("b").unwrap().spec.kind, Kind::Real);
    }

    #[test]
    fn binary_hint_selects_bernoulli() {
        let f = read("flag\n0\n1\n1\n", Some(r#"{"flag": "binary"}"#)).unwrap();
        let spec = &f.columns[0].spec;
        assert_eq!(spec.kind, Kind::Binary);
        assert_eq!(spec.family, Family::Bernoulli);
    }

    #[test]
    fn hint_for_unknown_column_is_a_parse_error() {
        let err = read("a\n1\n2\n", Some(r#"{"zzz": "real"}"#)).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 0, ref column, .. } if column == "zzz"));
    }

    #[test]
    fn ragged_and_bad_cells_report_location() {
        let err = read("a,b\n1,2\n3\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
        let err = read("a\n1\n2\nx\n", Some(r#"{"a": "real"}"#)).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, ref column, .. } if column == "a"));
        let err = read("c\n0\n1\n5\n", Some(r#"{"c": "categorical(3)"}"#)).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }));
    }

    #[test]
    fn categorical_labels_become_codes() {
        // a lone empty field must be quoted: the reader skips blank lines
        let f = read("c\nred\nblue\n\"\"\nred\ngreen\n", None).unwrap();
        let c = &f.columns[0];
        assert_eq!(c.spec.kind, Kind::Categorical(3));
        assert_eq!(c.spec.categories, vec!["blue", "green", "red"]);
        assert_eq!(c.values[0], 2.0);
        assert!(!c.mask[2]);
    }

    #[test]
    fn family_hint_overrides_default() {
        let f = read("x\n1\n2\n3\n", Some(r#"{"x": {"family": "gamma"}}"#)).unwrap();
        assert_eq!(f.columns[0].spec.kind, Kind::PositiveReal);
        assert_eq!(f.columns[0].spec.family, Family::Gamma);
        assert!(read("x\n-1\n2\n", Some(r#"{"x": {"kind": "real", "family": "gamma"}}"#)).is_err());
    }

    #[test]
    fn writing_round_trips_present_values() {
        let text = "a,b,c\n0.1,3,x\n,7,\n1e-300,0,y\n";
        let f = read(text, Some(r#"{"b": "count"}"#)).unwrap();
        let mut out = Vec::new();
        write_csv(&f, &mut out, b',').unwrap();
        let back = read_csv_from(out.as_slice(), Some(&Hints::from_json_str(r#"{"b": "count"}"#).unwrap()), b',')
            .unwrap();
        for (x, y) in f.columns.iter().zip(&back.columns) {
            assert_eq!(x.mask, y.mask);
            for (a, b) in x.present().zip(y.present()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn format_is_shortest_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0, -7.5e-9, 6.02e23, 1e16, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(format_value(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(format_value(2.0), "2");
    }
}
