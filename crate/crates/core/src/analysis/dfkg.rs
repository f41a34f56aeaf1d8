//! Covariances of coordinate pairs under zero-conditioning.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::domination::MIN_CONDITIONED;
use crate::error::{invalid, Result};
use crate::stats::covariance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfkgTriple {
    pub x: usize,
    pub y: usize,
    pub zeros: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfkgRow {
    pub triple: DfkgTriple,
    pub conditioned: usize,
    /// `None` when the conditioning event is too rare.
    pub covariance: Option<f64>,
    pub std_err: Option<f64>,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfkgReport {
    pub samples: usize,
    pub rows: Vec<DfkgRow>,
    pub starved: usize,
    pub violations: usize,
    pub pass: bool,
}

/// For each triple, `Cov(s[x], s[y] | s = 0 on zeros)` by rejection.
/// PASS iff no estimated covariance lies below `-3` standard errors.
pub fn dfkg_test(samples: &[Vec<bool>], triples: &[DfkgTriple]) -> Result<DfkgReport> {
    let width = samples.first().map_or(0, Vec::len);
    if samples.iter().any(|s| s.len() != width) {
        return Err(invalid("samples have different lengths"));
    }
    let mut rows = Vec::with_capacity(triples.len());
    for tr in triples {
        if tr.x >= width || tr.y >= width || tr.zeros.iter().any(|&i| i >= width) {
            return Err(invalid("index outside the sample"));
        }
        let kept: Vec<&Vec<bool>> = samples
            .iter()
            .filter(|s| tr.zeros.iter().all(|&i| !s[i]))
            .collect();
        let conditioned = kept.len();
        if conditioned < MIN_CONDITIONED {
            rows.push(DfkgRow {
                triple: tr.clone(),
                conditioned,
                covariance: None,
                std_err: None,
                violation: false,
            });
            continue;
        }
        let xs: Vec<bool> = kept.iter().map(|s| s[tr.x]).collect();
        let ys: Vec<bool> = kept.iter().map(|s| s[tr.y]).collect();
        let (cov, se): (f64, f64) = covariance(&xs, &ys);
        rows.push(DfkgRow {
            triple: tr.clone(),
            conditioned,
            covariance: Some(cov),
            std_err: Some(se),
            violation: cov < -3.0 * se,
        });
    }
    let starved = rows.iter().filter(|r| r.covariance.is_none()).count();
    let violations = rows.iter().filter(|r| r.violation).count();
    Ok(DfkgReport {
        samples: samples.len(),
        pass: violations == 0,
        rows,
        starved,
        violations,
    })
}

/// Random triples over `width` coordinates: distinct `x`, `y` and a zero set of
/// `zeros` further coordinates.
pub fn random_triples<R: Rng>(rng: &mut R, width: usize, count: usize, zeros: usize) -> Result<Vec<DfkgTriple>> {
    if width < zeros + 2 {
        return Err(invalid("not enough coordinates for the requested triples"));
    }
    Ok((0..count)
        .map(|_| {
            let picked = rand::seq::index::sample(rng, width, zeros + 2).into_vec();
            DfkgTriple {
                x: picked[0],
                y: picked[1],
                zeros: picked[2..].to_vec(),
            }
        })
        .collect())
}
