//! Upper bounds on spin-flip rates a stationary contact process could dominate.
//!
//! Domination of the spin-flip process with rate `alpha` would force the
//! all-zero probability of `B(n)` over `[0, T]` below `exp(-gamma alpha |B(n)| T)`,
//! while keeping `B(n)` empty initially and blocking every arrow into it gives
//! the lower bound `nu0^|B(n)| exp(-lambda d_max |B(n+1) \ B(n)| T)`. Hence
//! `alpha <= [|B(n)| (-log nu0) + lambda d_max |B(n+1) \ B(n)| T] / (gamma |B(n)| T)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stats::Estimate;
use crate::topology::{ball, GraphTopology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop11Row {
    pub n: usize,
    pub t: f64,
    pub ball: usize,
    pub shell: usize,
    pub alpha_max: f64,
    /// `alpha_max` at the ends of the interval for `nu0`.
    pub alpha_lo: f64,
    pub alpha_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop11Table {
    pub lambda: f64,
    pub gamma: f64,
    pub d_max: usize,
    pub nu0: Estimate<f64>,
    pub rows: Vec<Prop11Row>,
}

impl Prop11Table {
    pub fn get(&self, n: usize, t: f64) -> Option<&Prop11Row> {
        self.rows.iter().find(|r| r.n == n && r.t == t)
    }

    /// Strictly decreasing in `n` at fixed `T` and in `T` at fixed `n`.
    pub fn decreasing_in_both(&self) -> bool {
        self.rows.iter().all(|a| {
            self.rows.iter().all(|b| {
                let later_n = b.t == a.t && b.n > a.n;
                let later_t = b.n == a.n && b.t > a.t;
                !(later_n || later_t) || b.alpha_max < a.alpha_max
            })
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,T,ball,shell,alpha_max,alpha_lo,alpha_hi\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n, r.t, r.ball, r.shell, r.alpha_max, r.alpha_lo, r.alpha_hi
            );
        }
        out
    }
}

/// `[ball (-log nu0) + lambda d_max shell T] / (gamma ball T)`.
pub fn alpha_max(ball: usize, shell: usize, d_max: usize, lambda: f64, nu0: f64, t: f64, gamma: f64) -> f64 {
    let b = ball as f64;
    (b * -nu0.ln() + lambda * d_max as f64 * shell as f64 * t) / (gamma * b * t)
}

/// Table over `n_grid x t_grid` with `gamma = 1`; `nu0` estimates
/// `P(eta(o) = 0)` under the upper invariant law.
pub fn prop11_obstruction(
    topology: &GraphTopology,
    lambda: f64,
    nu0: Estimate<f64>,
    n_grid: &[usize],
    t_grid: &[f64],
) -> Result<Prop11Table> {
    if !(nu0.value > 0.0) || !(nu0.value <= 1.0) {
        return Err(Error::InsufficientStatistics {
            what: "zero marginal estimate is degenerate".into(),
            have: 0,
            need: 1,
        });
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("times must be positive"));
    }
    let gamma = 1.0;
    let d_max = topology.max_degree();
    let o = topology.origin();
    let lo_nu = nu0.ci_lo.max(f64::MIN_POSITIVE);
    let mut rows = Vec::new();
    for &n in n_grid {
        let inner = ball(topology, o, n)?.len();
        let outer = ball(topology, o, n + 1)?.len();
        let shell = outer - inner;
        for &t in t_grid {
            rows.push(Prop11Row {
                n,
                t,
                ball: inner,
                shell,
                alpha_max: alpha_max(inner, shell, d_max, lambda, nu0.value, t, gamma),
                alpha_lo: alpha_max(inner, shell, d_max, lambda, nu0.ci_hi, t, gamma),
                alpha_hi: alpha_max(inner, shell, d_max, lambda, lo_nu, t, gamma),
            });
        }
    }
    Ok(Prop11Table {
        lambda,
        gamma,
        d_max,
        nu0,
        rows,
    })
}
