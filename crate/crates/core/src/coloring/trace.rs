use std::time::Instant;

use serde::Serialize;

/// One pipeline phase as it appears in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub phase: String,
    pub n_sub: usize,
    pub m_sub: usize,
    pub nnz: usize,
    /// `‖A_ℓ Λ_ℓ v'_ℓ‖_∞` for the sub-instance this phase colored.
    pub disc_contrib: f64,
    pub micros: u128,
    pub retries: u32,
}

/// Ordered phase records of one pipeline run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PipelineTrace {
    pub phases: Vec<PhaseRecord>,
}

impl PipelineTrace {
    pub fn push(&mut self, record: PhaseRecord) {
        self.phases.push(record);
    }

    /// Sum of per-phase contributions, an upper bound on the final discrepancy.
    pub fn total_contribution(&self) -> f64 {
        self.phases.iter().map(|p| p.disc_contrib).sum()
    }

    pub fn phases_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a PhaseRecord> + 'a {
        self.phases.iter().filter(move |p| p.phase == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,n_sub,m_sub,nnz,disc_contrib,micros,retries\n");
        for p in &self.phases {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.phase, p.n_sub, p.m_sub, p.nnz, p.disc_contrib, p.micros, p.retries
            ));
        }
        out
    }
}

/// Wall-clock stopwatch for a phase.
pub(crate) struct Timer(Instant);

impl Timer {
    pub(crate) fn start() -> Self {
        Self(Instant::now())
    }

    pub(crate) fn micros(&self) -> u128 {
        self.0.elapsed().as_micros()
    }
}
