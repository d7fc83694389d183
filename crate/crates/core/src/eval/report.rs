use std::io::{self, Write};
use std::time::Duration;

use super::ConfusionMatrix;

/// Outcome of one held-out fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    pub test_size: usize,
    /// PCA output dimension used in this fold, if PCA ran.
    pub components: Option<usize>,
    pub confusion: ConfusionMatrix,
}

/// Everything a cross-validation run produced, plus enough of its
/// configuration to rerun it.
///
/// The serialized form is deterministic: `wall_time` is kept for callers
/// that want to log it but is never written.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Caller-supplied `key=value` pairs written first, in order.
    pub echo: Vec<(String, String)>,
    /// Pipeline configuration, in serialization order.
    pub config: Vec<(String, String)>,
    pub folds: Vec<FoldSummary>,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub weighted_f_measure: f64,
    /// `None` when no class has both positives and negatives.
    pub roc_area: Option<f64>,
    pub prc_area: Option<f64>,
    pub wall_time: Duration,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| v.to_string())
}

impl EvalReport {
    /// Adds a caller-side configuration entry (input paths and the like).
    pub fn push_echo(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.echo.push((key.into(), value.into()));
    }

    /// Looks a key up in the echo and config sections.
    pub fn config_value(&self, key: &str) -> Option<&str> {
        self.echo
            .iter()
            .chain(&self.config)
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in self.echo.iter().chain(&self.config) {
            writeln!(out, "{k}={v}")?;
        }
        for (i, fold) in self.folds.iter().enumerate() {
            writeln!(out, "fold.{i}.test_size={}", fold.test_size)?;
            if let Some(m) = fold.components {
                writeln!(out, "fold.{i}.components={m}")?;
            }
            writeln!(out, "fold.{i}.correct={}", fold.confusion.correct())?;
        }
        writeln!(out, "accuracy={}", self.accuracy)?;
        writeln!(out, "weighted_f_measure={}", self.weighted_f_measure)?;
        writeln!(out, "roc_area={}", opt(self.roc_area))?;
        writeln!(out, "prc_area={}", opt(self.prc_area))?;
        writeln!(out, "[confusion_matrix]")?;
        write!(out, "true\\predicted")?;
        for name in self.confusion.class_names() {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (name, row) in self
            .confusion
            .class_names()
            .iter()
            .zip(self.confusion.counts().rows())
        {
            write!(out, "{name}")?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("report text is UTF-8")
    }
}
