//! Experiment configuration: one TOML file per run.

use std::path::PathBuf;

use contact_core::TopologyKind;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub replicas: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Monte Carlo configuration frequencies against the exact chain.
    OracleCheck {
        /// One graph; when absent, every connected graph up to `max_vertices`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        topology: Option<TopologyKind>,
        #[serde(default = "default_max_vertices")]
        max_vertices: usize,
        lambdas: Vec<f64>,
        times: Vec<f64>,
        /// Allowed deviation in standard errors.
        #[serde(default = "default_oracle_z")]
        z: f64,
    },
    /// Densities of the truncated upper invariant sample.
    UpperSample {
        /// Observed region; padding is added around it.
        topology: TopologyKind,
        lambda: f64,
        t_back: f64,
    },
    TreeDomination {
        d: usize,
        depth: usize,
        lambda: f64,
        t_back: f64,
        /// Zero-run lengths `s` for `[0, s]` at the root.
        runs: Vec<f64>,
    },
    SlabDomination {
        block: Block,
        lambda: f64,
        step: f64,
        n_max: usize,
        t_back: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conditioning: Option<Conditioning>,
    },
    SingleSiteSpinflip {
        alphas: Vec<f64>,
        sites: usize,
        times: usize,
        burn: f64,
        half_line: HalfLineCheck,
    },
    Renewal {
        lambda: f64,
        step: f64,
        n_max: usize,
        t_back: f64,
        #[serde(default = "default_r2")]
        r2_min: f64,
    },
    ConeMixing {
        dim: usize,
        lambda: f64,
        radius: usize,
        theta: f64,
        step: f64,
        s_points: usize,
        fit_range: (f64, f64),
        t_back: f64,
        /// Stationary samples behind the density of the initial product measure.
        density_samples: u64,
        #[serde(default = "default_cone_r2")]
        r2_min: f64,
    },
    Prop11 {
        lambda: f64,
        t_back: f64,
        n_grid: Vec<usize>,
        t_grid: Vec<f64>,
        /// Fixed zero marginals whose rows can be checked by hand.
        #[serde(default)]
        analytic_nu0: Vec<f64>,
    },
    Dfkg {
        lambda: f64,
        t_back: f64,
        /// Sites `-radius..=radius` of the line.
        radius: usize,
        step: f64,
        times: usize,
        triples: usize,
        zeros: usize,
    },
    SlabScan {
        dim: usize,
        lambda: f64,
        length: usize,
        horizon: f64,
        widths: Vec<usize>,
    },
}

/// Region maxed over for `Y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Block {
    /// Ball of the given radius around the origin of `Z^dim`, contact process.
    FiniteSet { dim: usize, radius: usize },
    /// Sites with `x_d = 0` in the origin slab of width `width`, slab process.
    Slab { dim: usize, width: usize },
}

/// `P(Y_target = 1 | Y_i = 0 for i in zeros)`, indices 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conditioning {
    pub zeros: Vec<usize>,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfLineCheck {
    pub length: usize,
    pub lambda: f64,
    pub horizon: f64,
    pub s0: f64,
    pub t_back: f64,
    /// Grid for `f(t, u)`.
    pub f_grid: Vec<f64>,
    /// Times `t` for `P(A_{0,t})`.
    pub decay_grid: Vec<f64>,
    #[serde(default = "default_r2")]
    pub r2_min: f64,
}

fn default_max_vertices() -> usize {
    4
}
fn default_oracle_z() -> f64 {
    4.0
}
fn default_r2() -> f64 {
    0.9
}
fn default_cone_r2() -> f64 {
    0.85
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::OracleCheck { .. } => "oracle-check",
            Self::UpperSample { .. } => "upper-sample",
            Self::TreeDomination { .. } => "tree-domination",
            Self::SlabDomination { .. } => "slab-domination",
            Self::SingleSiteSpinflip { .. } => "single-site-spinflip",
            Self::Renewal { .. } => "renewal",
            Self::ConeMixing { .. } => "cone-mixing",
            Self::Prop11 { .. } => "prop11",
            Self::Dfkg { .. } => "dfkg",
            Self::SlabScan { .. } => "slab-scan",
        }
    }
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

fn rate(name: &str, x: f64) -> LabResult<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite and >= 0, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> LabResult<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite and > 0, got {x}")))
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> LabResult<()> {
    if v.is_empty() {
        Err(bad(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.replicas == 0 {
            return Err(bad("replicas must be >= 1"));
        }
        match &self.experiment {
            Experiment::OracleCheck {
                topology,
                max_vertices,
                lambdas,
                times,
                z,
            } => {
                if topology.is_none() && !(1..=6).contains(max_vertices) {
                    return Err(bad("max_vertices must be in 1..=6"));
                }
                nonempty("lambdas", lambdas)?;
                nonempty("times", times)?;
                lambdas.iter().try_for_each(|&l| rate("lambda", l))?;
                times.iter().try_for_each(|&t| positive("t", t))?;
                positive("z", *z)?;
            }
            Experiment::UpperSample { topology, lambda, t_back } => {
                rate("lambda", *lambda)?;
                positive("t_back", *t_back)?;
                match topology {
                    TopologyKind::Lattice { radii } if !radii.is_empty() && radii.iter().all(|&r| r == radii[0]) => {}
                    TopologyKind::HalfLine { len } if *len > 0 => {}
                    TopologyKind::Slab { dim, width, .. } if *dim >= 2 && *width > 0 => {}
                    _ => return Err(bad("upper-sample needs a cubic lattice box, a half-line or a slab")),
                }
            }
            Experiment::TreeDomination { d, depth, lambda, t_back, runs } => {
                if *d < 2 || *depth == 0 || *depth > 10 {
                    return Err(bad("tree needs d >= 2 and depth in 1..=10"));
                }
                rate("lambda", *lambda)?;
                positive("t_back", *t_back)?;
                nonempty("runs", runs)?;
                runs.iter().try_for_each(|&s| positive("run length", s))?;
            }
            Experiment::SlabDomination {
                block,
                lambda,
                step,
                n_max,
                t_back,
                conditioning,
            } => {
                match block {
                    Block::FiniteSet { dim, .. } if *dim >= 1 => {}
                    Block::Slab { dim, width } if *dim >= 2 && *width >= 1 => {}
                    _ => return Err(bad("finite-set needs dim >= 1; slab needs dim >= 2 and width >= 1")),
                }
                rate("lambda", *lambda)?;
                positive("step", *step)?;
                positive("t_back", *t_back)?;
                if *n_max == 0 {
                    return Err(bad("n_max must be >= 1"));
                }
                if let Some(c) = conditioning {
                    let inside = |i: usize| (1..=*n_max).contains(&i);
                    if !inside(c.target) || !c.zeros.iter().all(|&i| inside(i)) || c.zeros.contains(&c.target) {
                        return Err(bad("conditioning indices must be distinct and in 1..=n_max"));
                    }
                }
            }
            Experiment::SingleSiteSpinflip {
                alphas,
                sites,
                times,
                burn,
                half_line,
            } => {
                nonempty("alphas", alphas)?;
                alphas.iter().try_for_each(|&a| positive("alpha", a))?;
                if *sites < 2 || *times == 0 {
                    return Err(bad("need sites >= 2 and times >= 1"));
                }
                rate("burn", *burn)?;
                let h = half_line;
                if h.length == 0 {
                    return Err(bad("half-line length must be >= 1"));
                }
                rate("lambda", h.lambda)?;
                positive("horizon", h.horizon)?;
                positive("s0", h.s0)?;
                positive("t_back", h.t_back)?;
                nonempty("f_grid", &h.f_grid)?;
                nonempty("decay_grid", &h.decay_grid)?;
                h.f_grid.iter().try_for_each(|&t| rate("f grid", t))?;
                h.decay_grid.iter().try_for_each(|&t| positive("decay grid", t))?;
                let need = h.f_grid.iter().cloned().fold(0.0, f64::max);
                if need > h.t_back {
                    return Err(bad("f grid reaches before the stationary window"));
                }
            }
            Experiment::Renewal {
                lambda,
                step,
                n_max,
                t_back,
                ..
            } => {
                rate("lambda", *lambda)?;
                positive("step", *step)?;
                positive("t_back", *t_back)?;
                if *n_max < 3 {
                    return Err(bad("n_max must be >= 3 for a fit"));
                }
            }
            Experiment::ConeMixing {
                dim,
                lambda,
                radius,
                theta,
                step,
                s_points,
                fit_range,
                t_back,
                density_samples,
                ..
            } => {
                if *dim == 0 || *radius == 0 || *s_points == 0 {
                    return Err(bad("need dim, radius and s_points >= 1"));
                }
                rate("lambda", *lambda)?;
                positive("step", *step)?;
                positive("t_back", *t_back)?;
                if !(*theta > 0.0 && *theta < std::f64::consts::FRAC_PI_2) {
                    return Err(bad("theta must lie in (0, pi/2)"));
                }
                if !(fit_range.0 < fit_range.1) {
                    return Err(bad("fit_range must be increasing"));
                }
                if *density_samples < contact_core::analysis::MIN_ALLZERO_SAMPLES as u64 {
                    return Err(bad("density_samples must be >= 1000"));
                }
            }
            Experiment::Prop11 {
                lambda,
                t_back,
                n_grid,
                t_grid,
                analytic_nu0,
            } => {
                rate("lambda", *lambda)?;
                positive("t_back", *t_back)?;
                nonempty("n_grid", n_grid)?;
                nonempty("t_grid", t_grid)?;
                t_grid.iter().try_for_each(|&t| positive("T", t))?;
                if analytic_nu0.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
                    return Err(bad("analytic_nu0 entries must lie in (0, 1]"));
                }
            }
            Experiment::Dfkg {
                lambda,
                t_back,
                step,
                times,
                triples,
                zeros,
                radius,
            } => {
                rate("lambda", *lambda)?;
                positive("t_back", *t_back)?;
                positive("step", *step)?;
                if *times == 0 || *triples == 0 || (2 * radius + 1) * times < zeros + 2 {
                    return Err(bad("space-time window too small for the requested triples"));
                }
            }
            Experiment::SlabScan {
                dim,
                lambda,
                length,
                horizon,
                widths,
            } => {
                if *dim < 2 || *length == 0 {
                    return Err(bad("slab scan needs dim >= 2 and length >= 1"));
                }
                rate("lambda", *lambda)?;
                positive("horizon", *horizon)?;
                nonempty("widths", widths)?;
                if widths.contains(&0) {
                    return Err(bad("slab widths must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

/// `lattice:DIM:R`, `tree:D:DEPTH`, `half-line:LEN`, `path:LEN`,
/// `slab:DIM:WIDTH:LEN` or `edges:N:a-b,c-d,...`.
pub fn parse_topology(spec: &str) -> LabResult<TopologyKind> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> LabResult<usize> {
        s.parse()
            .map_err(|_| bad(format!("bad number {s:?} in topology {spec:?}")))
    };
    let kind = match parts.as_slice() {
        ["lattice", dim, r] => TopologyKind::lattice(num(dim)?, num(r)?),
        ["tree", d, depth] => TopologyKind::tree(num(d)?, num(depth)?),
        ["half-line", len] => TopologyKind::half_line(num(len)?),
        ["path", len] => TopologyKind::path(num(len)?),
        ["slab", dim, w, len] => TopologyKind::slab(num(dim)?, num(w)?, num(len)?),
        ["edges", n, list] => {
            let mut edges = Vec::new();
            for pair in list.split(',').filter(|p| !p.is_empty()) {
                let (a, b) = pair
                    .split_once('-')
                    .ok_or_else(|| bad(format!("bad edge {pair:?}")))?;
                edges.push((num(a)? as u32, num(b)? as u32));
            }
            TopologyKind::edge_list(num(n)?, edges)
        }
        ["edges", n] => TopologyKind::edge_list(num(n)?, Vec::new()),
        _ => return Err(bad(format!("unrecognised topology {spec:?}"))),
    };
    Ok(kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset, PRESETS};

    #[test]
    fn presets_round_trip_exactly() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let text = cfg.to_toml();
            let back = ExperimentConfig::from_toml(&text).unwrap();
            assert_eq!(back, cfg, "{name}");
            assert_eq!(back.to_toml(), text);
        }
    }

    #[test]
    fn awkward_floats_survive() {
        let mut cfg = preset("lemma3.1-renewal").unwrap();
        if let Experiment::Renewal { lambda, .. } = &mut cfg.experiment {
            *lambda = 0.1 + 0.2;
        }
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = preset("lemma3.1-renewal").unwrap();
        if let Experiment::Renewal { lambda, .. } = &mut cfg.experiment {
            *lambda = -1.0;
        }
        assert!(cfg.validate().is_err());
        let text = "seed = 1\nreplicas = 5\n[experiment]\nkind = \"renewal\"\nlambda = 2.0\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
        let text = "seed = 1\nreplicas = 5\nbogus = 3\n[experiment]\nkind = \"slab-scan\"\ndim = 2\nlambda = 1.0\nlength = 5\nhorizon = 2.0\nwidths = [1]\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
    }

    #[test]
    fn topology_specs() {
        assert_eq!(parse_topology("lattice:2:5").unwrap(), TopologyKind::lattice(2, 5));
        assert_eq!(parse_topology("path:3").unwrap(), TopologyKind::half_line(3));
        assert_eq!(
            parse_topology("edges:3:0-1,1-2").unwrap(),
            TopologyKind::edge_list(3, vec![(0, 1), (1, 2)])
        );
        assert_eq!(parse_topology("edges:2").unwrap(), TopologyKind::edge_list(2, vec![]));
        assert!(parse_topology("torus:3").is_err());
        assert!(parse_topology("lattice:x:1").is_err());
    }
}
