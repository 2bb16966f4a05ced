//! Serialisable report structures. The JSON report deliberately carries
//! no timing fields so seeded runs are byte-reproducible; wall time goes
//! to the human-readable summary only.

use serde::Serialize;

pub const PRICE_SCHEMA: &str = "quditop.price.v1";
pub const SWEEP_SCHEMA: &str = "quditop.sweep-dim.v1";

#[derive(Serialize)]
pub struct PriceReport {
    pub schema: &'static str,
    pub config: ConfigEcho,
    pub grid: GridInfo,
    pub strike_index: usize,
    pub analytic_expected_payoff: f64,
    pub truncated_quadrature_expected_payoff: f64,
    pub discretized_expected_payoff: f64,
    pub monte_carlo: MonteCarloInfo,
    pub statevector_p1: f64,
    pub mlae: MlaeInfo,
    pub fair_value: f64,
    pub shot_records: Vec<ShotRow>,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub s0: f64,
    pub drift: f64,
    pub rate: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub strike: f64,
    pub dim: usize,
    pub qudits: usize,
    pub scale_c: f64,
    pub trunc_sigmas: f64,
    pub shots: usize,
    pub levels: usize,
    pub seed: u64,
    pub variant: &'static str,
}

#[derive(Serialize)]
pub struct GridInfo {
    pub s_min: f64,
    pub s_max: f64,
    pub omega: f64,
    pub points: usize,
}

#[derive(Serialize)]
pub struct MonteCarloInfo {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Serialize)]
pub struct MlaeInfo {
    pub theta_hat: f64,
    pub p1_hat: f64,
    pub expected_payoff: f64,
    pub log_likelihood: f64,
    pub oracle_calls: u64,
}

#[derive(Serialize)]
pub struct ShotRow {
    pub ell: usize,
    pub m: u64,
    #[serde(rename = "N")]
    pub shots: usize,
    pub hits: usize,
}

#[derive(Serialize, Clone)]
pub struct SweepRow {
    pub d: usize,
    pub analytic: f64,
    pub classical_discretized: f64,
    pub quantum_mlae: f64,
    pub abs_gap_quantum_classical: f64,
    #[serde(rename = "M")]
    pub oracle_calls: u64,
    pub mlae_spread: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "d,analytic,classical_discretized,quantum_mlae,abs_gap_quantum_classical,M,mlae_spread\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.d,
            r.analytic,
            r.classical_discretized,
            r.quantum_mlae,
            r.abs_gap_quantum_classical,
            r.oracle_calls,
            r.mlae_spread
        ));
    }
    out
}

#[derive(Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub seeds: usize,
    pub rows: Vec<SweepRow>,
}
