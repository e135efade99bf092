use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::TaskKind;

/// A generation prompt: task plus rounded target, or the empty (unconditional) prompt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub task: Option<TaskKind>,
    pub target: f64,
}

impl Condition {
    /// Fidelity target rounded to 4 decimals.
    pub fn ghz(fidelity: f64) -> Self {
        Condition {
            task: Some(TaskKind::Ghz),
            target: round_to(fidelity, 4),
        }
    }

    /// Accuracy target rounded to 1 decimal.
    pub fn ml(accuracy: f64) -> Self {
        Condition {
            task: Some(TaskKind::Ml),
            target: round_to(accuracy, 1),
        }
    }

    pub fn new(task: TaskKind, value: f64) -> Self {
        match task {
            TaskKind::Ghz => Self::ghz(value),
            TaskKind::Ml => Self::ml(value),
        }
    }

    pub fn null() -> Self {
        Condition {
            task: None,
            target: 0.0,
        }
    }

    pub fn is_null(&self) -> bool {
        self.task.is_none()
    }

    /// The textual prompt this condition stands for.
    pub fn prompt(&self) -> String {
        match self.task {
            Some(TaskKind::Ghz) => format!("Generate GHZ fidelity: {:.4}", self.target),
            Some(TaskKind::Ml) => format!("Generate Accuracy: {:.1}", self.target),
            None => String::new(),
        }
    }

    /// Row of the task-embedding table used for token 0.
    pub(crate) fn task_index(&self) -> usize {
        match self.task {
            Some(TaskKind::Ghz) => 0,
            Some(TaskKind::Ml) => 1,
            None => 2,
        }
    }

    /// `sin`/`cos` of `2^k·π·target` for `k < count`, sines first.
    pub(crate) fn value_features(&self, count: usize) -> Vec<f64> {
        let mut f = vec![0.0; 2 * count];
        for k in 0..count {
            let arg = (1u64 << k) as f64 * std::f64::consts::PI * self.target;
            f[k] = arg.sin();
            f[count + k] = arg.cos();
        }
        f
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.prompt())
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}
