//! Desk-scale configurations, one per headline result.

use crate::config::{Block, Conditioning, Experiment, ExperimentConfig, HalfLineCheck};
use crate::error::{LabError, LabResult};

pub const PRESETS: [&str; 9] = [
    "thm1.3-tree",
    "thm1.4-halfline",
    "thm1.5-finite-set",
    "thm1.6-slab",
    "cor1.7-conditional",
    "thm1.8-conemix",
    "prop1.1-obstruction",
    "lemma3.1-renewal",
    "lemma4.2-slab-scan",
];

const SEED: u64 = 20_240_601;

fn config(name: &str, replicas: u64, experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        seed: SEED,
        replicas,
        out: None,
        experiment,
    }
}

fn single_site(lambda: f64) -> Experiment {
    Experiment::SlabDomination {
        block: Block::FiniteSet { dim: 1, radius: 0 },
        lambda,
        step: 1.0,
        n_max: 10,
        t_back: 20.0,
        conditioning: None,
    }
}

pub fn preset(name: &str) -> LabResult<ExperimentConfig> {
    let cfg = match name {
        "thm1.3-tree" => config(
            name,
            2000,
            Experiment::TreeDomination {
                d: 2,
                depth: 8,
                lambda: 5.0,
                t_back: 5.0,
                runs: vec![0.25, 0.5, 1.0],
            },
        ),
        "thm1.4-halfline" => config(
            name,
            10_000,
            Experiment::SingleSiteSpinflip {
                alphas: vec![0.5, 1.0, 3.0],
                sites: 10_000,
                times: 10,
                burn: 10.0,
                half_line: HalfLineCheck {
                    length: 200,
                    lambda: 2.0,
                    horizon: 100.0,
                    s0: 2.0,
                    t_back: 20.0,
                    f_grid: (0..6).map(f64::from).collect(),
                    decay_grid: (1..=10).map(f64::from).collect(),
                    r2_min: 0.9,
                },
            },
        ),
        "thm1.5-finite-set" => config(name, 10_000, single_site(2.0)),
        "thm1.6-slab" => config(
            name,
            2000,
            Experiment::SlabDomination {
                block: Block::Slab { dim: 2, width: 2 },
                lambda: 2.0,
                step: 1.0,
                n_max: 10,
                t_back: 10.0,
                conditioning: None,
            },
        ),
        "cor1.7-conditional" => {
            let mut e = single_site(2.0);
            if let Experiment::SlabDomination { conditioning, .. } = &mut e {
                *conditioning = Some(Conditioning {
                    zeros: vec![1, 2, 3],
                    target: 4,
                });
            }
            config(name, 10_000, e)
        }
        "thm1.8-conemix" => config(
            name,
            5000,
            Experiment::ConeMixing {
                dim: 2,
                lambda: 0.7,
                radius: 40,
                theta: 0.5,
                step: 1.0,
                s_points: 12,
                fit_range: (2.0, 12.0),
                t_back: 20.0,
                density_samples: 2000,
                r2_min: 0.85,
            },
        ),
        "prop1.1-obstruction" => config(
            name,
            10_000,
            Experiment::Prop11 {
                lambda: 2.0,
                t_back: 20.0,
                n_grid: vec![5, 10, 20],
                t_grid: vec![1.0, 10.0, 100.0],
                analytic_nu0: vec![0.5],
            },
        ),
        "lemma3.1-renewal" => config(
            name,
            10_000,
            Experiment::Renewal {
                lambda: 2.0,
                step: 1.0,
                n_max: 12,
                t_back: 20.0,
                r2_min: 0.9,
            },
        ),
        "lemma4.2-slab-scan" => config(
            name,
            1000,
            Experiment::SlabScan {
                dim: 2,
                lambda: 1.0,
                length: 120,
                horizon: 40.0,
                widths: vec![1, 2, 3, 4],
            },
        ),
        _ => {
            return Err(LabError::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.to_vec(),
            })
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_lists_names() {
        let msg = preset("thm9.9").unwrap_err().to_string();
        for name in PRESETS {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn halfline_preset_shape() {
        let cfg = preset("thm1.4-halfline").unwrap();
        assert_eq!(cfg.replicas, 10_000);
        match cfg.experiment {
            Experiment::SingleSiteSpinflip { half_line, .. } => {
                assert_eq!((half_line.length, half_line.lambda), (200, 2.0));
            }
            other => panic!("{other:?}"),
        }
    }
}
