use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use willmore_core::Result;

/// One line of a `quantity,value,error` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub quantity: String,
    pub value: f64,
    pub error: f64,
}

pub fn row(quantity: &str, value: f64, error: f64) -> SummaryRow {
    SummaryRow {
        quantity: quantity.to_string(),
        value,
        error,
    }
}

/// Files written by a command, in order.
#[derive(Debug, Default)]
pub struct Written(pub Vec<PathBuf>);

impl Written {
    pub fn csv<T: Serialize>(&mut self, path: PathBuf, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.0.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.0.push(path);
        Ok(())
    }

    pub fn text(&mut self, path: PathBuf, body: &str) -> Result<()> {
        fs::write(&path, body)?;
        self.0.push(path);
        Ok(())
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}
