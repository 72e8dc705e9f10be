//! Named parameter sets used for regression runs and plot data.

use crate::ees::EesParams;
use crate::error::{Error, Result};
use crate::mahler4::theta_similar;

/// One named initial value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSet {
    pub name: &'static str,
    pub params: EesParams,
}

pub const FIGURE_NAMES: [&str; 8] = [
    "ees4-generic",
    "theta-similar-m0.95",
    "mahler4-m0.8-n0.1",
    "mahler4-m0.5-n-2",
    "mahler4-m0.5-n0.5",
    "mahler4-m0.95-n0.95",
    "mahler5-p0.2-n0.4-m0.7",
    "mahler5-p-2-n-1-m0.4",
];

pub fn figure_set(name: &str) -> Result<FigureSet> {
    let params = match name {
        "ees4-generic" => EesParams::new(vec![1.0, -1.0, 2.0, -0.5], vec![0.0, 1.0, 1.0, 1.0])?,
        "theta-similar-m0.95" => theta_similar(0.0, 0.95f64.sqrt())?.system(),
        "mahler4-m0.8-n0.1" => EesParams::mahler4(0.8, 0.1)?,
        "mahler4-m0.5-n-2" => EesParams::mahler4(0.5, -2.0)?,
        "mahler4-m0.5-n0.5" => EesParams::mahler4(0.5, 0.5)?,
        "mahler4-m0.95-n0.95" => EesParams::mahler4(0.95, 0.95)?,
        "mahler5-p0.2-n0.4-m0.7" => EesParams::mahler5(0.2, 0.4, 0.7)?,
        "mahler5-p-2-n-1-m0.4" => EesParams::mahler5(-2.0, -1.0, 0.4)?,
        other => {
            return Err(Error::domain(format!(
                "unknown figure set '{other}' (expected one of {})",
                FIGURE_NAMES.join(", ")
            )))
        }
    };
    let name = FIGURE_NAMES.iter().find(|n| **n == name).expect("listed name");
    Ok(FigureSet { name, params })
}

pub fn figure_sets() -> Vec<FigureSet> {
    FIGURE_NAMES.iter().map(|n| figure_set(n).expect("known set")).collect()
}
