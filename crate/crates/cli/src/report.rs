//! Exact reference values, printed by `chsh oracle`.

use chsh_core::oracle::{self, JointDistribution};
use chsh_core::{ChshTable, FillRule, NatureModel, SettingPair};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub chsh: f64,
    pub bound_violated: bool,
    pub feasibility_residual: f64,
    pub infeasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub nature: &'static str,
    pub kl_independence: f64,
    pub k_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub mu: f64,
    pub nu: f64,
    /// Keyed `"(s,t)"`.
    pub correlations: Vec<(String, f64)>,
    pub tsirelson: f64,
    pub witness: WitnessReport,
    /// Uniform setting choice under the forcing scientist.
    pub limits: Vec<LimitReport>,
    pub kl_quantum_uniform: f64,
    pub k_rate_independent_uniform: f64,
}

pub fn oracle_report() -> Result<OracleReport> {
    let table = ChshTable::default();
    let w = oracle::joint_witness(table.rows());
    let settings = [0.25; 4];
    let models = [
        (
            "quantum",
            NatureModel::Quantum {
                fill: FillRule::Uniform,
            },
        ),
        (
            "quantum_copy_partner",
            NatureModel::Quantum {
                fill: FillRule::CopyPartner,
            },
        ),
        (
            "independent_uniform",
            NatureModel::Independent {
                weights: *JointDistribution::uniform().weights(),
            },
        ),
        (
            "mixture_half",
            NatureModel::Mixture {
                quantum_weight: 0.5,
                fill: FillRule::Uniform,
                weights: *JointDistribution::uniform().weights(),
            },
        ),
    ];
    let mut limits = Vec::new();
    for (nature, model) in models {
        let r = oracle::limiting_kl(&model, &settings, &table)
            .map_err(|e| CliError::Config(e.to_string()))?;
        limits.push(LimitReport {
            nature,
            kl_independence: r.kl_independence,
            k_rate: r.k_rate,
        });
    }
    let find = |name: &str| {
        limits
            .iter()
            .find(|l| l.nature == name)
            .expect("listed above")
    };
    let kl_quantum_uniform = find("quantum").kl_independence;
    let k_rate_independent_uniform = find("independent_uniform").k_rate;
    Ok(OracleReport {
        mu: table.mu(),
        nu: table.nu(),
        correlations: SettingPair::ALL
            .iter()
            .map(|&u| (u.to_string(), table.correlation(u)))
            .collect(),
        tsirelson: oracle::table_tsirelson(&table),
        witness: WitnessReport {
            chsh: w.chsh,
            bound_violated: w.bound_violated,
            feasibility_residual: w.feasibility_residual,
            infeasible: w.infeasible,
        },
        limits,
        kl_quantum_uniform,
        k_rate_independent_uniform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_violates_both_certificates() {
        let r = oracle_report().unwrap();
        assert!((r.tsirelson + 8f64.sqrt()).abs() < 1e-12);
        assert!(r.witness.bound_violated && r.witness.infeasible);
        assert!((r.mu + r.nu - 0.5).abs() < 1e-15);
    }
}
