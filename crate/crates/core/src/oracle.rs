//! Ground truth computed independently of the game engines: the CHSH bound
//! over joint distributions on `Ω^4`, the table's Tsirelson value, a
//! feasibility certificate that no joint distribution reproduces the
//! table, and exact limiting growth rates for the Nature models.

use nalgebra::{DMatrix, DVector};

use crate::domain::{
    chsh_combination, ChshTable, HiddenVariable, OutcomePair, PairRows, SettingPair,
};
use crate::error::{GameError, Result};
use crate::num;
use crate::strategies::FillRule;

/// A probability distribution on `Ω^4`, indexed by [`HiddenVariable::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    weights: [f64; 16],
}

impl JointDistribution {
    pub fn new(weights: [f64; 16]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(GameError::InvalidDistribution(
                "joint weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GameError::InvalidDistribution(format!(
                "joint weights sum to {total}"
            )));
        }
        Ok(JointDistribution { weights })
    }

    pub fn uniform() -> Self {
        JointDistribution {
            weights: [1.0 / 16.0; 16],
        }
    }

    pub fn point_mass(lambda: HiddenVariable) -> Self {
        let mut weights = [0.0; 16];
        weights[lambda.index()] = 1.0;
        JointDistribution { weights }
    }

    pub fn weights(&self) -> &[f64; 16] {
        &self.weights
    }

    /// `alpha · self + (1 − alpha) · other`.
    pub fn mix(&self, alpha: f64, other: &JointDistribution) -> JointDistribution {
        let mut weights = [0.0; 16];
        for (i, w) in weights.iter_mut().enumerate() {
            *w = alpha * self.weights[i] + (1.0 - alpha) * other.weights[i];
        }
        JointDistribution { weights }
    }

    /// `E[X_s X_t]` for the coordinates of `u`.
    pub fn correlation(&self, u: SettingPair) -> f64 {
        HiddenVariable::all()
            .map(|tau| tau.reveal(u).product() * self.weights[tau.index()])
            .sum()
    }

    /// Pairwise marginals of `(X_s, X_t)` for every setting pair.
    pub fn pair_marginals(&self) -> PairRows {
        let mut rows = [[0.0; 4]; 4];
        for u in SettingPair::ALL {
            for tau in HiddenVariable::all() {
                rows[u.index()][tau.reveal(u).index()] += self.weights[tau.index()];
            }
        }
        rows
    }
}

/// `S = C(1,3) − C(1,4) + C(2,3) + C(2,4)` under a joint distribution.
pub fn chsh_value(d: &JointDistribution) -> f64 {
    chsh_combination(SettingPair::ALL.map(|u| d.correlation(u)))
}

fn row_correlations(rows: &PairRows) -> [f64; 4] {
    rows.map(|row| {
        OutcomePair::ALL
            .iter()
            .map(|p| p.product() * row[p.index()])
            .sum()
    })
}

/// CHSH combination of the table's four correlations.
pub fn table_tsirelson(table: &ChshTable) -> f64 {
    chsh_combination(row_correlations(table.rows()))
}

/// Both certificates that a set of pairwise rows has no joint realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointWitness {
    /// CHSH combination of the rows' correlations.
    pub chsh: f64,
    /// `|chsh| > 2 + 1e-9`.
    pub bound_violated: bool,
    /// Smallest `‖A d − b‖₂` over `d ≥ 0`, where `A d = b` encodes the 16
    /// pairwise marginal constraints plus normalisation.
    pub feasibility_residual: f64,
    /// Residual above `1e-6`.
    pub infeasible: bool,
    /// The minimiser found by the feasibility search.
    pub closest: [f64; 16],
}

const CHSH_SLACK: f64 = 1e-9;
const INFEASIBLE_RESIDUAL: f64 = 1e-6;

/// Run both certificates against `rows`.
pub fn joint_witness(rows: &PairRows) -> JointWitness {
    let chsh = chsh_combination(row_correlations(rows));
    let (closest, feasibility_residual) = marginal_feasibility(rows);
    JointWitness {
        chsh,
        bound_violated: chsh.abs() > 2.0 + CHSH_SLACK,
        feasibility_residual,
        infeasible: feasibility_residual > INFEASIBLE_RESIDUAL,
        closest,
    }
}

/// True iff the rows violate the CHSH bound, which certifies that no
/// joint distribution on `Ω^4` reproduces them as pairwise marginals.
pub fn no_joint_witness(rows: &PairRows) -> bool {
    joint_witness(rows).bound_violated
}

fn marginal_feasibility(rows: &PairRows) -> ([f64; 16], f64) {
    let mut a = DMatrix::<f64>::zeros(17, 16);
    let mut b = DVector::<f64>::zeros(17);
    for u in SettingPair::ALL {
        for pair in OutcomePair::ALL {
            let r = 4 * u.index() + pair.index();
            b[r] = rows[u.index()][pair.index()];
            for tau in HiddenVariable::all() {
                if tau.reveal(u) == pair {
                    a[(r, tau.index())] = 1.0;
                }
            }
        }
    }
    for tau in 0..16 {
        a[(16, tau)] = 1.0;
    }
    b[16] = 1.0;
    let x = nnls(&a, &b);
    let residual = (&a * &x - &b).norm();
    let mut closest = [0.0; 16];
    closest.copy_from_slice(x.as_slice());
    (closest, residual)
}

/// Lawson–Hanson active-set solver for `min ‖A x − b‖₂` subject to `x ≥ 0`.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let cols = a.ncols();
    let tol = 1e-12;
    let mut x = DVector::<f64>::zeros(cols);
    let mut passive = vec![false; cols];
    let max_iter = 10 * cols;

    for _ in 0..max_iter {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..cols)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let z = solve_on_passive(a, b, &passive);
            let blocked: Vec<usize> = (0..cols).filter(|&k| passive[k] && z[k] <= tol).collect();
            if blocked.is_empty() {
                x = z;
                break;
            }
            let alpha = blocked
                .iter()
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for k in 0..cols {
                if passive[k] && x[k] <= tol {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

fn solve_on_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&k| passive[k]).collect();
    let sub = a.select_columns(&idx);
    let sol = sub
        .svd(true, true)
        .solve(b, 1e-12)
        .expect("SVD was computed with both factors");
    let mut z = DVector::<f64>::zeros(passive.len());
    for (pos, &k) in idx.iter().enumerate() {
        z[k] = sol[pos];
    }
    z
}

/// The limiting conditional law of `λ` given `u` for a Nature model.
#[derive(Debug, Clone, PartialEq)]
pub enum NatureModel {
    /// Revealed pair drawn from the table row; unobserved coordinates
    /// filled by `fill`. Also the measurement-dependent LHV.
    Quantum {
        fill: FillRule,
    },
    /// `λ` drawn from a fixed law regardless of `u`.
    Independent {
        weights: [f64; 16],
    },
    Deterministic {
        lambda: HiddenVariable,
    },
    /// Per round, quantum with probability `quantum_weight`, otherwise
    /// independent with law `weights`.
    Mixture {
        quantum_weight: f64,
        fill: FillRule,
        weights: [f64; 16],
    },
}

/// Limits of `D(P̂ ‖ Q̂·R̂)` and of `ln K^AB_n / n` under the forcing scientist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingRates {
    pub kl_independence: f64,
    pub k_rate: f64,
}

fn quantum_conditional(
    table: &ChshTable,
    fill: FillRule,
    tau: HiddenVariable,
    u: SettingPair,
) -> f64 {
    let pair = tau.reveal(u);
    let base = table.odds(pair.a, pair.b, u);
    let other_a = tau.x_a(u.a.other());
    let other_b = tau.x_b(u.b.other());
    match fill {
        FillRule::Uniform => base * 0.25,
        FillRule::CopyPartner => {
            if other_a == pair.a && other_b == pair.b {
                base
            } else {
                0.0
            }
        }
    }
}

/// `P(τ | u)` as a 16 × 4 array.
pub fn conditional_law(model: &NatureModel, table: &ChshTable) -> Result<[[f64; 4]; 16]> {
    let mut law = [[0.0; 4]; 16];
    let check = |w: &[f64; 16]| JointDistribution::new(*w).map(|_| ());
    match model {
        NatureModel::Independent { weights } => check(weights)?,
        NatureModel::Mixture {
            quantum_weight,
            weights,
            ..
        } => {
            check(weights)?;
            if !(0.0..=1.0).contains(quantum_weight) {
                return Err(GameError::Unsupported(format!(
                    "mixture weight {quantum_weight} outside [0, 1]"
                )));
            }
        }
        _ => {}
    }
    for tau in HiddenVariable::all() {
        for u in SettingPair::ALL {
            law[tau.index()][u.index()] = match model {
                NatureModel::Quantum { fill } => quantum_conditional(table, *fill, tau, u),
                NatureModel::Independent { weights } => weights[tau.index()],
                NatureModel::Deterministic { lambda } => f64::from(u8::from(tau == *lambda)),
                NatureModel::Mixture {
                    quantum_weight,
                    fill,
                    weights,
                } => {
                    quantum_weight * quantum_conditional(table, *fill, tau, u)
                        + (1.0 - quantum_weight) * weights[tau.index()]
                }
            };
        }
    }
    Ok(law)
}

/// Exact limits for `model` played against a setting law with limiting
/// frequencies `settings`.
pub fn limiting_kl(
    model: &NatureModel,
    settings: &[f64; 4],
    table: &ChshTable,
) -> Result<LimitingRates> {
    let total: f64 = settings.iter().sum();
    if settings.iter().any(|r| r.is_nan() || *r <= 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(GameError::Unsupported(format!(
            "setting law {settings:?} must be strictly positive and sum to 1"
        )));
    }
    let law = conditional_law(model, table)?;

    let mut q = [0.0; 16];
    for (i, row) in law.iter().enumerate() {
        q[i] = row.iter().zip(settings).map(|(p, r)| p * r).sum();
    }
    let mut kl = 0.0;
    for (i, row) in law.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                // P(τ,u) / (Q(τ) R(u)) = P(τ|u) / Q(τ)
                kl += settings[j] * p * num::ln(p / q[i]);
            }
        }
    }

    let mut k_rate = 0.0;
    for u in SettingPair::ALL {
        let mut marginal = [0.0; 4];
        for tau in HiddenVariable::all() {
            marginal[tau.reveal(u).index()] += law[tau.index()][u.index()];
        }
        let row = table.row(u);
        let d: f64 = marginal
            .iter()
            .zip(row)
            .filter(|(m, _)| **m > 0.0)
            .map(|(m, p)| m * num::ln(m / p))
            .sum();
        k_rate += settings[u.index()] * d;
    }
    Ok(LimitingRates {
        kl_independence: kl.max(0.0),
        k_rate: k_rate.max(0.0),
    })
}
