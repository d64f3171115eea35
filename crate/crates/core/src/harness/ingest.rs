//! CSV loading, the seeded train/test split and train-side standardization.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{LabeledExample, SensorSuite, Standardizer};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

/// Stream ids that keep the split and the validation hold-out independent
/// under a single root seed.
pub const SPLIT_STREAM: u64 = 1;
pub const VALIDATION_STREAM: u64 = 2;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Raw rows of a CSV file: numeric features and the 1-based label.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub feature_names: Option<Vec<String>>,
    pub examples: Vec<LabeledExample>,
}

/// Parses CSV text. `label_column` defaults to the last column. Rows and
/// columns in errors are 1-based and count the header line.
pub fn parse_csv(text: &str, header: bool, label_column: Option<usize>) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let names = if header {
        let h = reader.headers().map_err(|e| Error::Schema(e.to_string()))?;
        Some(h.iter().map(str::to_string).collect::<Vec<_>>())
    } else {
        None
    };
    let mut width = names.as_ref().map(Vec::len);
    let mut examples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1 + usize::from(header);
        let record = record.map_err(|e| Error::Schema(format!("row {row}: {e}")))?;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Schema(format!(
                "row {row} has {} fields, expected {w}",
                record.len()
            )));
        }
        let label_col = label_column.unwrap_or(w.saturating_sub(1));
        if label_col >= w || w < 2 {
            return Err(Error::Schema(format!(
                "label column {label_col} outside a {w}-column file"
            )));
        }
        let mut features = Vec::with_capacity(w - 1);
        let mut label = 0;
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                label = cell.parse::<usize>().map_err(|_| Error::Parse {
                    row,
                    column: c + 1,
                    message: format!("label '{cell}' is not a positive integer"),
                })?;
                if label == 0 {
                    return Err(Error::Schema(format!("row {row}: labels are 1-based, got 0")));
                }
            } else {
                let v = cell.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    column: c + 1,
                    message: format!("'{cell}' is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: c + 1,
                        message: format!("'{cell}' is not finite"),
                    });
                }
                features.push(v);
            }
        }
        examples.push(LabeledExample::new(features, label));
    }
    if examples.is_empty() {
        return Err(Error::Schema("no data rows".into()));
    }
    let feature_names = names.map(|mut n| {
        n.remove(label_column.unwrap_or(n.len() - 1));
        n
    });
    Ok(CsvTable {
        feature_names,
        examples,
    })
}

pub fn read_csv(path: &Path, header: bool, label_column: Option<usize>) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, header, label_column)
}

/// Shuffles indices with the seed and cuts the first `round(fraction·n)` off as training.
pub fn seeded_split(
    examples: Vec<LabeledExample>,
    fraction: f64,
    seed: u64,
    stream: u64,
) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let n = examples.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed, stream));
    let cut = ((n as f64) * fraction).round() as usize;
    let mut slots: Vec<Option<LabeledExample>> = examples.into_iter().map(Some).collect();
    let mut take = |idx: &[usize]| -> Vec<LabeledExample> {
        idx.iter().map(|&i| slots[i].take().expect("each index once")).collect()
    };
    let first = take(&order[..cut]);
    let second = take(&order[cut..]);
    (first, second)
}

/// Everything a sweep needs from the data files.
#[derive(Clone, Debug)]
pub struct Experiment {
    /// Standardized training split.
    pub train: Vec<LabeledExample>,
    /// Standardized test split.
    pub test: Vec<LabeledExample>,
    /// Test split as read from disk.
    pub raw_test: Vec<LabeledExample>,
    pub num_classes: usize,
    /// Sensors at their configured base costs.
    pub suite: SensorSuite,
    /// Fit on the raw training split; maps raw rows into model space.
    pub standardizer: Standardizer,
    pub feature_names: Option<Vec<String>>,
}

impl Experiment {
    pub fn num_columns(&self) -> usize {
        self.suite.num_columns()
    }
}

pub fn ingest(cfg: &ExperimentConfig) -> Result<Experiment> {
    let d = &cfg.data;
    let train_table = read_csv(&cfg.resolve(&d.train), d.header, d.label_column)?;
    let feature_names = train_table.feature_names;
    let (raw_train, raw_test) = match &d.test {
        Some(p) => {
            let t = read_csv(&cfg.resolve(p), d.header, d.label_column)?;
            (train_table.examples, t.examples)
        }
        None => seeded_split(train_table.examples, d.train_fraction, cfg.seed, SPLIT_STREAM),
    };
    let width = raw_train[0].features.len();
    if let Some(bad) = raw_test.iter().find(|e| e.features.len() != width) {
        return Err(Error::Schema(format!(
            "test rows have {} features, training rows {width}",
            bad.features.len()
        )));
    }
    let seen = raw_train.iter().chain(&raw_test).map(|e| e.label).max().unwrap_or(1);
    let num_classes = match d.num_classes {
        Some(l) => {
            if seen > l {
                return Err(Error::Schema(format!("label {seen} outside 1..={l}")));
            }
            l
        }
        None => seen,
    };
    let suite = cfg.sensor_suite(width)?;
    let standardizer = Standardizer::fit(&raw_train);
    let train = standardizer.transform_all(&raw_train)?;
    let test = standardizer.transform_all(&raw_test)?;
    Ok(Experiment {
        train,
        test,
        raw_test,
        num_classes,
        suite,
        standardizer,
        feature_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_label_position() {
        let t = parse_csv("a,y,b\n1.5,2,3\n-4,1,5e-1\n", true, Some(1)).unwrap();
        assert_eq!(t.feature_names, Some(vec!["a".into(), "b".into()]));
        assert_eq!(t.examples[0], LabeledExample::new(vec![1.5, 3.0], 2));
        assert_eq!(t.examples[1], LabeledExample::new(vec![-4.0, 0.5], 1));
    }

    #[test]
    fn bad_cell_reports_position() {
        let err = parse_csv("a,b,y\n1,2,1\n3,x,2\n", true, None).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, column: 2, .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
        let err = parse_csv("1,2,0\n", false, None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        let err = parse_csv("1,2,1\n1,2\n", false, None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn write_back_is_lossless() {
        let text = "0.1,-2.5e-7,3,1\n123456.789,0.30000000000000004,1e300,2\n";
        let t = parse_csv(text, false, None).unwrap();
        let mut out = String::new();
        for e in &t.examples {
            let cells: Vec<String> = e.features.iter().map(|v| v.to_string()).collect();
            out += &format!("{},{}\n", cells.join(","), e.label);
        }
        assert_eq!(parse_csv(&out, false, None).unwrap(), t);
    }

    #[test]
    fn split_is_seeded_partition() {
        let ex: Vec<_> = (0..100).map(|i| LabeledExample::new(vec![i as f64], 1)).collect();
        let (a, b) = seeded_split(ex.clone(), 0.75, 9, SPLIT_STREAM);
        let (a2, _) = seeded_split(ex.clone(), 0.75, 9, SPLIT_STREAM);
        let (a3, _) = seeded_split(ex, 0.75, 10, SPLIT_STREAM);
        assert_eq!((a.len(), b.len()), (75, 25));
        assert_eq!(a, a2);
        assert_ne!(a, a3);
        let mut all: Vec<f64> = a.iter().chain(&b).map(|e| e.features[0]).collect();
        all.sort_by(f64::total_cmp);
        assert!(all.iter().enumerate().all(|(i, v)| *v == i as f64));
    }
}
