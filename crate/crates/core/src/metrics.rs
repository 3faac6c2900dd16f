//! Closed-form cost and reliability figures.
//!
//! All logarithms are natural; Chernoff exponents are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{alpha_total_bounds, EpsilonGrid};
use crate::tanner::{dimension, TannerGraph};

/// Complexity `D_gamma` of a `gamma`-input majority gate, in elementary components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateCostModel {
    /// `D_gamma = slope*gamma + offset`.
    Affine { slope: i64, offset: i64 },
    /// `D_gamma = c` for every fan-in.
    Constant(u64),
}

impl Default for GateCostModel {
    fn default() -> Self {
        GateCostModel::Affine {
            slope: 2,
            offset: -1,
        }
    }
}

impl GateCostModel {
    pub fn majority_cost(&self, fan_in: usize) -> Result<u64> {
        let d = match *self {
            GateCostModel::Affine { slope, offset } => slope * fan_in as i64 + offset,
            GateCostModel::Constant(c) => c as i64,
        };
        if d < 1 {
            return Err(Error::Domain(format!(
                "majority-gate cost must be at least 1 (got {d} for fan-in {fan_in})"
            )));
        }
        Ok(d as u64)
    }
}

fn rate_bound(gamma: usize, rho: usize) -> Result<f64> {
    if rho <= gamma {
        return Err(Error::Domain(format!(
            "rate bound 1 - gamma/rho is not positive for gamma={gamma}, rho={rho}"
        )));
    }
    Ok(1.0 - gamma as f64 / rho as f64)
}

/// Per-variable component count `1 + D_gamma + gamma*(rho-2)`.
fn per_variable_components(gamma: usize, rho: usize, cost: &GateCostModel) -> Result<u64> {
    if rho < 2 {
        return Err(Error::Domain("rho must be at least 2".into()));
    }
    Ok(1 + cost.majority_cost(gamma)? + (gamma * (rho - 2)) as u64)
}

/// Complexity `S = n(1 + D_gamma + gamma(rho-2))` of the register+correcting circuit.
pub fn complexity(n: usize, gamma: usize, rho: usize, cost: &GateCostModel) -> Result<u64> {
    Ok(n as u64 * per_variable_components(gamma, rho, cost)?)
}

/// Upper bound on redundancy, `(1 + D_gamma + gamma(rho-2)) / (1 - gamma/rho)`.
pub fn redundancy(gamma: usize, rho: usize, cost: &GateCostModel) -> Result<f64> {
    let r = rate_bound(gamma, rho)?;
    Ok(per_variable_components(gamma, rho, cost)? as f64 / r)
}

/// Complexity of the bit-copy architecture, `(2 + D_{gamma-1} + (gamma-1)(rho-1)) gamma n`.
pub fn complexity_tk(n: usize, gamma: usize, rho: usize, cost: &GateCostModel) -> Result<u64> {
    let per_copy = 2 + cost.majority_cost(gamma - 1)? + ((gamma - 1) * (rho - 1)) as u64;
    Ok(per_copy * (gamma * n) as u64)
}

/// Upper bound on redundancy of the bit-copy architecture.
pub fn redundancy_tk(gamma: usize, rho: usize, cost: &GateCostModel) -> Result<f64> {
    let r = rate_bound(gamma, rho)?;
    Ok(complexity_tk(1, gamma, rho, cost)? as f64 / r)
}

/// Redundancy of a concrete graph using its realized dimension `k = n - rank(H)`.
pub fn realized_redundancy(g: &TannerGraph, cost: &GateCostModel) -> Result<f64> {
    let k = dimension(g);
    if k == 0 {
        return Err(Error::Domain("code has dimension 0".into()));
    }
    Ok(complexity(g.n(), g.gamma(), g.rho(), cost)? as f64 / k as f64)
}

/// The `rho` in `(gamma, rho_max]` minimising [`redundancy`]; ties go to the smaller `rho`.
pub fn optimal_rho(gamma: usize, cost: &GateCostModel, rho_max: usize) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for rho in gamma + 1..=rho_max {
        let r = redundancy(gamma, rho, cost)?;
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((rho, r));
        }
    }
    best.map(|(rho, _)| rho)
        .ok_or_else(|| Error::Domain(format!("empty search range ({gamma}, {rho_max}]")))
}

/// Binary KL divergence `D(x||y)` in nats, with `0 log 0 = 0`.
pub fn kl_divergence(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("y = {y} outside (0, 1)")));
    }
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    Ok(term(x, y) + term(1.0 - x, 1.0 - y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffTail {
    /// `exp(-D(p+delta || p) n)`
    pub exact_exp: f64,
    /// `exp(-2 delta^2 n)`
    pub loose: f64,
}

/// Bounds on `P(failures/n > p + delta)` for `n` independent components failing w.p. `p`.
pub fn chernoff_tail(p: f64, delta: f64, n: usize) -> Result<ChernoffTail> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    if !(delta > 0.0 && p + delta <= 1.0) {
        return Err(Error::Domain(format!(
            "delta = {delta} must be positive with p + delta <= 1"
        )));
    }
    let n = n as f64;
    Ok(ChernoffTail {
        exact_exp: (-kl_divergence(p + delta, p)? * n).exp(),
        loose: (-2.0 * delta * delta * n).exp(),
    })
}

/// `L (e^{-2 eps_m^2 n} + e^{-2 eps_xor^2 n} + e^{-2 eps_maj^2 n})`, without capping.
pub fn pf_bound_raw(cycles: u64, n: usize, eps_m: f64, eps_xor: f64, eps_maj: f64) -> Result<f64> {
    for (name, e) in [("eps_m", eps_m), ("eps_xor", eps_xor), ("eps_maj", eps_maj)] {
        if !(e > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive (got {e})")));
        }
    }
    let n = n as f64;
    let t = |e: f64| (-2.0 * e * e * n).exp();
    Ok(cycles as f64 * (t(eps_m) + t(eps_xor) + t(eps_maj)))
}

/// Memory-failure probability bound over `cycles` correction cycles, capped at 1.
pub fn pf_bound(cycles: u64, n: usize, eps_m: f64, eps_xor: f64, eps_maj: f64) -> Result<f64> {
    Ok(pf_bound_raw(cycles, n, eps_m, eps_xor, eps_maj)?.min(1.0))
}

/// One line of the redundancy / expansion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub gamma: usize,
    pub rho: usize,
    pub redundancy: f64,
    pub redundancy_tk: f64,
    pub alpha_total_lower: Option<f64>,
    pub alpha_total_upper: f64,
}

pub fn bounds_table(
    gammas: &[usize],
    rhos: &[usize],
    cost: &GateCostModel,
    grid: &EpsilonGrid,
) -> Result<Vec<BoundsRow>> {
    if gammas.is_empty() || rhos.is_empty() {
        return Err(Error::Domain("gamma and rho lists must be non-empty".into()));
    }
    let mut rows = Vec::new();
    for &gamma in gammas {
        for &rho in rhos.iter().filter(|&&r| r > gamma) {
            let bounds = alpha_total_bounds(gamma, rho, grid)?;
            rows.push(BoundsRow {
                gamma,
                rho,
                redundancy: redundancy(gamma, rho, cost)?,
                redundancy_tk: redundancy_tk(gamma, rho, cost)?,
                alpha_total_lower: bounds.lower,
                alpha_total_upper: bounds.upper,
            });
        }
    }
    Ok(rows)
}
