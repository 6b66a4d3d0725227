use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// One command result in all three renderings.
pub struct Report {
    json: Value,
    text: String,
    csv: Option<String>,
}

impl Report {
    pub fn new(json: Value, text: String) -> Self {
        Self { json, text, csv: None }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn with_table(self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        for row in rows {
            w.write_record(&row).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        self.with_csv(String::from_utf8(bytes).expect("utf-8"))
    }

    /// Flat `field,value` CSV for results without a natural table.
    fn fallback_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["field", "value"]).expect("in-memory write");
        if let Value::Object(map) = &self.json {
            for (k, v) in map {
                let cell = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                w.write_record([k.as_str(), cell.as_str()]).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json renders") + "\n",
            Format::Csv => self.csv.clone().unwrap_or_else(|| self.fallback_csv()),
            Format::Text => format!("{}\n", self.text),
        }
    }

    pub fn emit(&self, format: Format, path: Option<&Path>) -> std::io::Result<()> {
        let body = self.render(format);
        match path {
            Some(p) => std::fs::write(p, body),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())?;
                out.flush()
            }
        }
    }
}
