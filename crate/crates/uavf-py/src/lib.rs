//! Python bindings: program parsing, concrete execution, BMC checks,
//! fuzzing campaigns, hybrid verification, and the GPS spoofing model.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use std::collections::HashSet;
use std::time::Duration;

/// A parsed and validated program.
#[pyclass]
struct Program {
    inner: uavf::mini_ir::Program,
}

#[pymethods]
impl Program {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        uavf::mini_ir::parse_program(source)
            .map(|inner| Program { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Pretty-printed canonical source.
    fn pretty(&self) -> String {
        uavf::mini_ir::pretty_print(&self.inner)
    }

    fn total_edges(&self) -> u32 {
        self.inner.total_edges
    }

    /// Runs the program on `input`, returning (status, path_id, edges,
    /// steps) where status is "completed:<ret>", "fault:<kind>@<loc>" or
    /// "budget-exhausted".
    #[pyo3(signature = (input, step_budget = 1_000_000))]
    fn run(&self, input: &[u8], step_budget: u64) -> (String, u64, Vec<u32>, u64) {
        let out = uavf::exec::run(&self.inner, input, step_budget);
        let status = match &out.status {
            uavf::exec::ExecStatus::Completed { ret } => format!("completed:{ret}"),
            uavf::exec::ExecStatus::Fault { kind, loc } => format!("fault:{kind}@{loc}"),
            uavf::exec::ExecStatus::BudgetExhausted => "budget-exhausted".into(),
        };
        (status, out.path.id(), out.edges.into_iter().collect(), out.steps)
    }

    /// Bounded model check; returns the BmcReport as a JSON string.
    #[pyo3(signature = (k = None, timeout_secs = 60.0))]
    fn bmc_check(&self, k: Option<u32>, timeout_secs: f64) -> PyResult<String> {
        let k = k.unwrap_or_else(|| uavf::bmc::default_k(&self.inner));
        let report = uavf::bmc::check(
            &self.inner,
            k,
            &HashSet::new(),
            Duration::from_secs_f64(timeout_secs),
        );
        serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Coverage-guided fuzzing campaign; returns a JSON summary with the
    /// stuck report and distinct fault locations.
    #[pyo3(signature = (budget = 100_000, rng_seed = 0, seeds = Vec::new()))]
    fn fuzz(&self, budget: u64, rng_seed: u64, seeds: Vec<Vec<u8>>) -> PyResult<String> {
        let seeds: Vec<uavf::fuzz::TestCase> =
            seeds.into_iter().map(uavf::fuzz::TestCase::seed).collect();
        let config = uavf::fuzz::CampaignConfig {
            budget,
            rng_seed,
            ..Default::default()
        };
        let (corpus, stuck) =
            uavf::fuzz::campaign(&self.inner, &seeds, &config, &uavf::fuzz::Mode::Mutational);
        let summary = serde_json::json!({
            "stuck": stuck,
            "crashes": corpus.crashes.len(),
            "fault_locations": corpus.fault_locations().len(),
            "edges_covered": corpus.coverage.len(),
        });
        Ok(summary.to_string())
    }

    /// Hybrid fuzz + BMC verification; returns the HybridReport as JSON.
    #[pyo3(signature = (budget = 100_000, rng_seed = 0, k = None, timeout_secs = 60.0))]
    fn verify(
        &self,
        budget: u64,
        rng_seed: u64,
        k: Option<u32>,
        timeout_secs: f64,
    ) -> PyResult<String> {
        let config = uavf::hybrid::HybridConfig {
            fuzz_budget: budget,
            rng_seed,
            k,
            solver_timeout_secs: timeout_secs,
            ..Default::default()
        };
        let report = uavf::hybrid::verify(&self.inner, &[], &config);
        serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Free-space received power in dBm.
#[pyfunction]
fn gps_received_power(tx_power_dbm: f64, distance_m: f64, freq_mhz: f64) -> PyResult<f64> {
    uavf::gps::received_power(tx_power_dbm, distance_m, freq_mhz)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Evaluates a SpoofScenario given as JSON; returns the SpoofResult as JSON.
#[pyfunction]
fn gps_evaluate(scenario_json: &str) -> PyResult<String> {
    let scenario: uavf::gps::SpoofScenario =
        serde_json::from_str(scenario_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let result = uavf::gps::evaluate(&scenario).map_err(|e| PyValueError::new_err(e.to_string()))?;
    serde_json::to_string(&result).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn uavf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_function(wrap_pyfunction!(gps_received_power, m)?)?;
    m.add_function(wrap_pyfunction!(gps_evaluate, m)?)?;
    Ok(())
}
