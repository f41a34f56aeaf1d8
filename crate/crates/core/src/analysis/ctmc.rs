//! Exact transient law of the contact process on very small graphs.
//!
//! States are bit masks (`bit v` set iff `v` is infected). The generator has
//! rate 1 for `v: 1 -> 0` and `lambda * #infected neighbours` for `v: 0 -> 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harris::Configuration;
use crate::scalar::Scalar;
use crate::topology::{BoundaryPolicy, GraphTopology, TopologyKind};

/// Largest vertex count the oracle accepts.
pub const MAX_ORACLE_VERTICES: usize = 12;
/// Up to this many states the primary method uses a dense matrix exponential.
const DENSE_STATES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution<S> {
    pub vertices: usize,
    pub lambda: S,
    pub t: S,
    /// `probs[mask]`
    pub probs: Vec<S>,
}

impl<S: Scalar> ExactDistribution<S> {
    pub fn prob(&self, mask: u64) -> S {
        self.probs[mask as usize]
    }

    /// `P(eta_t(v) = 1)`.
    pub fn marginal(&self, v: u32) -> S {
        self.probs
            .iter()
            .enumerate()
            .filter(|(m, _)| m >> v & 1 == 1)
            .map(|(_, &p)| p)
            .sum()
    }

    pub fn total(&self) -> S {
        self.probs.iter().copied().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(&a, &b)| (a - b).abs())
            .fold(S::zero(), S::max)
    }
}

/// Sparse generator: off-diagonal `(target, rate)` per state and total exit rates.
struct Generator<S> {
    rows: Vec<Vec<(usize, S)>>,
    exit: Vec<S>,
}

fn generator<S: Scalar>(topology: &GraphTopology, lambda: S) -> Generator<S> {
    let n = topology.len();
    let states = 1usize << n;
    let mut rows = Vec::with_capacity(states);
    let mut exit = Vec::with_capacity(states);
    for m in 0..states {
        let mut row = Vec::new();
        let mut total = S::zero();
        for v in 0..n {
            if m >> v & 1 == 1 {
                row.push((m ^ (1 << v), S::one()));
                total = total + S::one();
            } else {
                let k = topology
                    .neighbors(v as u32)
                    .iter()
                    .filter(|&&w| m >> w & 1 == 1)
                    .count();
                if k > 0 && lambda > S::zero() {
                    let r = lambda * S::of_usize(k);
                    row.push((m | (1 << v), r));
                    total = total + r;
                }
            }
        }
        rows.push(row);
        exit.push(total);
    }
    Generator { rows, exit }
}

fn check_inputs<S: Scalar>(
    topology: &GraphTopology,
    lambda: S,
    init: &Configuration,
    t: S,
) -> Result<()> {
    if topology.len() > MAX_ORACLE_VERTICES {
        return Err(Error::TooLarge {
            vertices: topology.len(),
            limit: MAX_ORACLE_VERTICES,
        });
    }
    if !(lambda >= S::zero()) || !lambda.is_finite() {
        return Err(invalid("infection rate must be >= 0"));
    }
    if !(t >= S::zero()) || !t.is_finite() {
        return Err(invalid("time must be >= 0"));
    }
    init.ensure_on(topology)
}

fn point_mass<S: Scalar>(states: usize, init: &Configuration) -> Vec<S> {
    let mut p = vec![S::zero(); states];
    p[init.to_mask() as usize] = S::one();
    p
}

/// `out = p Q` for the row vector `p`.
fn apply<S: Scalar>(g: &Generator<S>, p: &[S], out: &mut [S]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = -g.exit[j] * p[j];
    }
    for (i, row) in g.rows.iter().enumerate() {
        let pi = p[i];
        if pi != S::zero() {
            for &(j, r) in row {
                out[j] = out[j] + pi * r;
            }
        }
    }
}

fn mat_mul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut c = vec![S::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == S::zero() {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let out = &mut c[i * n..(i + 1) * n];
            for (o, &bkj) in out.iter_mut().zip(row) {
                *o = *o + aik * bkj;
            }
        }
    }
    c
}

/// Scaling and squaring with a Taylor core on the dense `Q t`.
fn dense_expm<S: Scalar>(g: &Generator<S>, t: S) -> Vec<S> {
    let n = g.exit.len();
    let mut a = vec![S::zero(); n * n];
    for (i, row) in g.rows.iter().enumerate() {
        a[i * n + i] = -g.exit[i] * t;
        for &(j, r) in row {
            a[i * n + j] = r * t;
        }
    }
    // infinity norm of Q t is twice the largest exit rate times t
    let norm = g.exit.iter().copied().fold(S::zero(), S::max) * t * S::of(2.0);
    let mut squarings = 0u32;
    let mut scale = S::one();
    while norm / scale > S::of(0.5) {
        scale = scale * S::of(2.0);
        squarings += 1;
    }
    for x in a.iter_mut() {
        *x = *x / scale;
    }
    let mut e = vec![S::zero(); n * n];
    let mut term = vec![S::zero(); n * n];
    for i in 0..n {
        e[i * n + i] = S::one();
        term[i * n + i] = S::one();
    }
    for k in 1..=30 {
        term = mat_mul(&term, &a, n);
        let kf = S::of_usize(k);
        let mut biggest = S::zero();
        for (x, ex) in term.iter_mut().zip(e.iter_mut()) {
            *x = *x / kf;
            *ex = *ex + *x;
            biggest = biggest.max(x.abs());
        }
        if biggest < S::of(1e-20) {
            break;
        }
    }
    for _ in 0..squarings {
        e = mat_mul(&e, &e, n);
    }
    e
}

/// Taylor series for `p exp(Q t)` applied to the vector in short sub-steps.
fn vector_expm<S: Scalar>(g: &Generator<S>, p0: Vec<S>, t: S) -> Vec<S> {
    let max_exit = g.exit.iter().copied().fold(S::zero(), S::max);
    let steps = ((max_exit * t / S::of(0.5)).ceil().to_f64_lossy() as usize).max(1);
    let h = t / S::of_usize(steps);
    let mut p = p0;
    let mut term = vec![S::zero(); p.len()];
    let mut next = vec![S::zero(); p.len()];
    for _ in 0..steps {
        term.copy_from_slice(&p);
        for k in 1..=40 {
            apply(g, &term, &mut next);
            let scale = h / S::of_usize(k);
            let mut biggest = S::zero();
            for (x, y) in term.iter_mut().zip(&next) {
                *x = *y * scale;
                biggest = biggest.max(x.abs());
            }
            for (pi, x) in p.iter_mut().zip(&term) {
                *pi = *pi + *x;
            }
            if biggest < S::of(1e-22) {
                break;
            }
        }
    }
    p
}

/// Exact law of `eta_t` started from `init`, by matrix exponential.
pub fn ctmc_oracle<S: Scalar>(
    topology: &GraphTopology,
    lambda: S,
    init: &Configuration,
    t: S,
) -> Result<ExactDistribution<S>> {
    check_inputs(topology, lambda, init, t)?;
    let g = generator(topology, lambda);
    let states = g.exit.len();
    let probs = if t == S::zero() {
        point_mass(states, init)
    } else if states <= DENSE_STATES {
        let e = dense_expm(&g, t);
        let row = init.to_mask() as usize;
        e[row * states..(row + 1) * states].to_vec()
    } else {
        vector_expm(&g, point_mass(states, init), t)
    };
    Ok(ExactDistribution {
        vertices: topology.len(),
        lambda,
        t,
        probs,
    })
}

/// Same law by uniformization: Poisson-weighted powers of the jump chain.
pub fn ctmc_uniformized<S: Scalar>(
    topology: &GraphTopology,
    lambda: S,
    init: &Configuration,
    t: S,
) -> Result<ExactDistribution<S>> {
    check_inputs(topology, lambda, init, t)?;
    let g = generator(topology, lambda);
    let states = g.exit.len();
    let rate = g.exit.iter().copied().fold(S::zero(), S::max);
    let mut p = point_mass(states, init);
    if rate > S::zero() && t > S::zero() {
        // keep each chunk's Poisson mean moderate so exp(-mean) does not underflow
        let chunks = ((rate * t / S::of(30.0)).ceil().to_f64_lossy() as usize).max(1);
        let h = t / S::of_usize(chunks);
        let mean = rate * h;
        let mut qp = vec![S::zero(); states];
        for _ in 0..chunks {
            let mut weight = (-mean).exp();
            let mut mass = weight;
            let mut power = p.clone();
            let mut acc: Vec<S> = power.iter().map(|&x| x * weight).collect();
            let mut k = 0usize;
            while S::one() - mass > S::of(1e-17) && k < 10_000 {
                k += 1;
                apply(&g, &power, &mut qp);
                for (x, q) in power.iter_mut().zip(&qp) {
                    *x = *x + *q / rate;
                }
                weight = weight * mean / S::of_usize(k);
                mass = mass + weight;
                for (a, x) in acc.iter_mut().zip(&power) {
                    *a = *a + *x * weight;
                }
            }
            p = acc;
        }
    }
    Ok(ExactDistribution {
        vertices: topology.len(),
        lambda,
        t,
        probs: p,
    })
}

/// Every connected simple graph on `1..=max_vertices` vertices, one per
/// isomorphism class, as edge-list topologies.
pub fn connected_graphs(max_vertices: usize) -> Result<Vec<GraphTopology>> {
    if max_vertices > 6 {
        return Err(invalid("graph enumeration is limited to 6 vertices"));
    }
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| (a + 1..n as u32).map(move |b| (a, b)))
            .collect();
        let perms = permutations(n);
        let mut seen = std::collections::BTreeSet::new();
        for mask in 0u64..(1 << pairs.len()) {
            let edges: Vec<(u32, u32)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            if !connected(n, &edges) {
                continue;
            }
            let canon = perms
                .iter()
                .map(|p| {
                    let mut e: Vec<(u32, u32)> = edges
                        .iter()
                        .map(|&(a, b)| {
                            let (x, y) = (p[a as usize], p[b as usize]);
                            (x.min(y), x.max(y))
                        })
                        .collect();
                    e.sort_unstable();
                    e
                })
                .min()
                .unwrap_or_default();
            if seen.insert(canon.clone()) {
                out.push(GraphTopology::build(
                    &TopologyKind::edge_list(n, canon),
                    &BoundaryPolicy::Free,
                )?);
            }
        }
    }
    Ok(out)
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, (n - 1) as u32);
            out.push(q);
        }
    }
    out
}

fn connected(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a as usize == v {
                b as usize
            } else if b as usize == v {
                a as usize
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
