use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::DataError;

/// Column mapping for CSV input, read from a `key = value` file:
///
/// ```text
/// channels = acc_x, acc_y, acc_z
/// label = activity
/// subject = subject
/// delimiter = ,
/// sample_rate_hz = 50
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub channels: Vec<String>,
    pub label: Option<String>,
    pub subject: Option<String>,
    pub delimiter: u8,
    pub sample_rate_hz: f64,
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, DataError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| DataError::Schema(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut channels = None;
        let mut label = None;
        let mut subject = None;
        let mut delimiter = b',';
        let mut sample_rate_hz = 1.0;
        for (k, v) in parse_key_values(text)? {
            match k.as_str() {
                "channels" => {
                    channels = Some(
                        v.split(',')
                            .map(|c| c.trim().to_string())
                            .filter(|c| !c.is_empty())
                            .collect::<Vec<_>>(),
                    )
                }
                "label" => label = Some(v),
                "subject" => subject = Some(v),
                "delimiter" => {
                    delimiter = match v.as_str() {
                        "tab" | "\\t" => b'\t',
                        s if s.len() == 1 => s.as_bytes()[0],
                        _ => return Err(DataError::Schema(format!("delimiter must be one byte, got {v:?}"))),
                    }
                }
                "sample_rate_hz" => {
                    sample_rate_hz = v
                        .parse::<f64>()
                        .ok()
                        .filter(|r| r.is_finite() && *r > 0.0)
                        .ok_or_else(|| DataError::Schema(format!("bad sample_rate_hz {v:?}")))?
                }
                other => return Err(DataError::Schema(format!("unknown schema key {other:?}"))),
            }
        }
        let channels = channels
            .filter(|c| !c.is_empty())
            .ok_or_else(|| DataError::Schema("schema lists no channels".into()))?;
        Ok(Schema {
            channels,
            label,
            subject,
            delimiter,
            sample_rate_hz,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        Schema::parse(&std::fs::read_to_string(path)?)
    }

    /// Inverse of [`Schema::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("channels = {}\n", self.channels.join(", "));
        if let Some(l) = &self.label {
            out.push_str(&format!("label = {l}\n"));
        }
        if let Some(s) = &self.subject {
            out.push_str(&format!("subject = {s}\n"));
        }
        let delim = match self.delimiter {
            b'\t' => "tab".to_string(),
            d => (d as char).to_string(),
        };
        out.push_str(&format!(
            "delimiter = {delim}\nsample_rate_hz = {}\n",
            self.sample_rate_hz
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub samples: Vec<f64>,
}

/// All samples of one subject, channels of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub channels: Vec<Channel>,
    pub sample_rate_hz: f64,
    /// Per-sample labels; empty strings when the input had no label column.
    pub labels: Vec<String>,
}

impl Recording {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Copy with every channel passed through [`moving_average`](super::moving_average).
    pub fn smoothed(&self, window_len: usize) -> Result<Recording, DataError> {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                Ok(Channel {
                    name: c.name.clone(),
                    samples: super::moving_average(&c.samples, window_len)?,
                })
            })
            .collect::<Result<Vec<_>, DataError>>()?;
        Ok(Recording {
            channels,
            ..self.clone()
        })
    }
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<Vec<Recording>, DataError> {
    let default_subject = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "subject".into());
    load_csv_reader(File::open(path)?, schema, &default_subject)
}

/// Reads CSV from any source; without a subject column everything belongs to
/// `default_subject`.
pub fn load_csv_reader<R: Read>(
    reader: R,
    schema: &Schema,
    default_subject: &str,
) -> Result<Vec<Recording>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::Schema(format!("column {name:?} not found in header")))
    };
    let channel_cols = schema
        .channels
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>, _>>()?;
    let label_col = schema.label.as_deref().map(column).transpose()?;
    let subject_col = schema.subject.as_deref().map(column).transpose()?;

    let mut recordings: Vec<Recording> = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let subject = match subject_col {
            Some(c) => row.get(c).unwrap_or_default().to_string(),
            None => default_subject.to_string(),
        };
        let idx = match recordings.iter().position(|r| r.subject_id == subject) {
            Some(i) => i,
            None => {
                recordings.push(Recording {
                    subject_id: subject,
                    channels: schema
                        .channels
                        .iter()
                        .map(|n| Channel {
                            name: n.clone(),
                            samples: Vec::new(),
                        })
                        .collect(),
                    sample_rate_hz: schema.sample_rate_hz,
                    labels: Vec::new(),
                });
                recordings.len() - 1
            }
        };
        let rec = &mut recordings[idx];
        for (ch, &col) in rec.channels.iter_mut().zip(&channel_cols) {
            let raw = row.get(col).unwrap_or_default();
            let value = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::Parse {
                    line,
                    column: ch.name.clone(),
                    value: raw.to_string(),
                })?;
            ch.samples.push(value);
        }
        rec.labels.push(
            label_col
                .map(|c| row.get(c).unwrap_or_default().to_string())
                .unwrap_or_default(),
        );
    }
    if recordings.is_empty() {
        return Err(DataError::EmptyInput);
    }
    Ok(recordings)
}
