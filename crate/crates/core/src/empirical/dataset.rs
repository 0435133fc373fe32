use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::SyntheticLogistic;
use crate::rng::seeded_rng;

/// Numeric feature rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Fraction of positive labels.
    pub fn zeta_hat(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        self.labels.iter().map(|&y| f64::from(y)).sum::<f64>() / self.len() as f64
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label_column)
}

/// Parses a headed CSV. Every column other than `label_column` is a numeric
/// feature. Row numbers in errors count data rows from 0.
pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let mut values = Vec::with_capacity(feature_names.len());
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                labels.push(parse_label(row, cell)?);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::ParseError {
                row,
                column: headers[i].to_string(),
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        features.push(values);
    }
    Ok(Dataset {
        feature_names,
        features,
        labels,
    })
}

fn parse_label(row: usize, cell: &str) -> Result<u8> {
    match cell.parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(Error::NonBinaryLabel {
            row,
            value: cell.to_string(),
        }),
    }
}

pub fn write_csv<W: Write>(data: &Dataset, label_column: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = data.feature_names.clone();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    for (row, &y) in data.features.iter().zip(&data.labels) {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.push(y.to_string());
        w.write_record(&cells)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `n` draws of `x ~ U[−1, 1]`, `y ~ Bernoulli(η(x))` from the synthetic model.
pub fn generate_synthetic(model: &SyntheticLogistic, n: usize, seed: u64) -> Dataset {
    let mut rng = seeded_rng(seed);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random_range(-1.0..=1.0);
        let y = rng.random_bool(model.eta(x));
        features.push(vec![x]);
        labels.push(u8::from(y));
    }
    Dataset {
        feature_names: vec!["x".to_string()],
        features,
        labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_small_file() {
        let text = "a,b,label\n1,2,0\n3,4.5,1\n-1,0,1\n2,2,0\n";
        let data = read_csv(text.as_bytes(), "label").unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(data.feature_names, vec!["a", "b"]);
        assert_eq!(data.features[1], vec![3.0, 4.5]);
        assert_eq!(data.labels, vec![0, 1, 1, 0]);
    }

    #[test]
    fn label_column_can_be_anywhere() {
        let data = read_csv("y,x\n1,0.5\n0,-0.5\n".as_bytes(), "y").unwrap();
        assert_eq!(data.feature_names, vec!["x"]);
        assert_eq!(data.labels, vec![1, 0]);
    }

    #[test]
    fn rejects_bad_cells() {
        let err = read_csv("x,label\n1,0\n1,2\n".as_bytes(), "label").unwrap_err();
        assert!(matches!(err, Error::NonBinaryLabel { row: 1, .. }));
        let err = read_csv("x,label\n1,0\nfoo,1\n".as_bytes(), "label").unwrap_err();
        match err {
            Error::ParseError { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (1, "x", "foo"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = read_csv("x,y\n1,0\n".as_bytes(), "label").unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn(_)));
    }

    #[test]
    fn synthetic_round_trip() {
        let model = SyntheticLogistic::new(5.0).unwrap();
        let data = generate_synthetic(&model, 2000, 42);
        let zeta = data.zeta_hat();
        assert!((0.45..=0.55).contains(&zeta), "{zeta}");
        let mut buf = Vec::new();
        write_csv(&data, "label", &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), "label").unwrap();
        assert_eq!(back, data);
    }
}
