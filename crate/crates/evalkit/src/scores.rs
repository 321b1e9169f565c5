//! Precision / recall / F1 arithmetic and report rendering.

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_from_pr(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Scores from raw counts. Zero conventions: P = 0 when tp+fp = 0,
/// R = 0 when tp+fn = 0, F1 = 0 when tp = 0.
pub fn prf1(tp: usize, fp: usize, fn_: usize) -> Result<Scores> {
    if tp + fp + fn_ == 0 {
        return Err(EvalError::AllZeroCounts);
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if tp == 0 {
        0.0
    } else {
        f1_from_pr(precision, recall)
    };
    Ok(Scores {
        precision,
        recall,
        f1,
    })
}

/// Arithmetic mean of each field independently. Per-task F1 is averaged
/// as-is; it is NOT recomputed from the averaged P and R.
pub fn macro_average(per_task: &[Scores]) -> Result<Scores> {
    if per_task.is_empty() {
        return Err(EvalError::EmptyList);
    }
    let n = per_task.len() as f64;
    Ok(Scores {
        precision: per_task.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: per_task.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: per_task.iter().map(|s| s.f1).sum::<f64>() / n,
    })
}

/// Report shape written by the eval-ops command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpsReport {
    pub per_task: Vec<TaskScores>,
    #[serde(rename = "macro")]
    pub macro_avg: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScores {
    pub label: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

impl OpsReport {
    pub fn new(per_task: Vec<TaskScores>) -> Result<Self> {
        let scores: Vec<Scores> = per_task.iter().map(|t| t.scores).collect();
        Ok(OpsReport {
            macro_avg: macro_average(&scores)?,
            per_task,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table in the Precision, Recall, F1-Score column order,
    /// rounded to two decimals at the rendering boundary only.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<16} {:>9} {:>9} {:>9}\n",
            "Approach", "Precision", "Recall", "F1-Score"
        ));
        for task in &self.per_task {
            out.push_str(&render_row(&task.label, &task.scores));
        }
        if self.per_task.len() > 1 {
            out.push_str(&render_row("macro", &self.macro_avg));
        }
        out
    }
}

fn render_row(label: &str, s: &Scores) -> String {
    format!(
        "{:<16} {:>9.2} {:>9.2} {:>9.2}\n",
        label, s.precision, s.recall, s.f1
    )
}
