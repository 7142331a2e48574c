//! CLI-facing gradient check: one architecture, one seed, full
//! finite-difference sweep at reduced widths.

use granum_core::gradcheck::{check_model, GradCheckReport};
use granum_core::models::ModelId;

use crate::error::Result;

pub struct GradCheckRun {
    pub model: ModelId,
    pub seed: u64,
    pub report: GradCheckReport,
    pub tolerance: f64,
}

impl GradCheckRun {
    pub fn passed(&self) -> bool {
        self.report.max_rel_error < self.tolerance
    }
}

pub fn run(model: ModelId, seed: u64, h: f64, tolerance: f64) -> Result<GradCheckRun> {
    let report = check_model(model, seed, h)?;
    Ok(GradCheckRun { model, seed, report, tolerance })
}

pub fn render(run: &GradCheckRun) -> String {
    format!(
        "model {}  seed {}  params checked {}  max rel error {:.3e}  (analytic {:.6e}, numeric {:.6e} at tensor {} elem {})  {}\n",
        run.model,
        run.seed,
        run.report.elements_checked,
        run.report.max_rel_error,
        run.report.analytic_at_worst,
        run.report.numeric_at_worst,
        run.report.worst.0,
        run.report.worst.1,
        if run.passed() { "PASS" } else { "FAIL" }
    )
}
