//! Monitor placement policies.
//!
//! Every policy scores the observed-but-unmonitored candidates and returns the
//! best one, breaking ties uniformly at random from its own stream.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::classifier::TrainedModel;
use crate::graph::NodeId;
use crate::observer::{FeatureVector, ObserverState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    SmartRandom,
    RedScore,
    MostRedSayRed,
    MostRedNeighbors,
    RedLearn,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::SmartRandom,
        StrategyKind::RedScore,
        StrategyKind::MostRedSayRed,
        StrategyKind::MostRedNeighbors,
        StrategyKind::RedLearn,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            StrategyKind::SmartRandom => "sr",
            StrategyKind::RedScore => "rs",
            StrategyKind::MostRedSayRed => "mrsr",
            StrategyKind::MostRedNeighbors => "mrn",
            StrategyKind::RedLearn => "redlearn",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.short_name() == s)
            .ok_or_else(|| format!("unknown strategy {s:?} (expected sr, rs, mrsr, mrn or redlearn)"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("no observed unmonitored node is left to monitor")]
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub chosen: NodeId,
    pub scores: BTreeMap<NodeId, f64>,
}

/// Picks the highest-scoring candidate, uniformly among ties.
fn argmax<R, F>(state: &ObserverState, rng: &mut R, mut score: F) -> Result<Decision, StrategyError>
where
    R: Rng + ?Sized,
    F: FnMut(NodeId) -> f64,
{
    if state.candidate_count() == 0 {
        return Err(StrategyError::Exhausted);
    }
    let scores: BTreeMap<NodeId, f64> = state.candidates().map(|v| (v, score(v))).collect();
    let best = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<NodeId> = scores
        .iter()
        .filter(|(_, &s)| s == best)
        .map(|(&v, _)| v)
        .collect();
    let chosen = tied[rng.random_range(0..tied.len())];
    Ok(Decision { chosen, scores })
}

fn features(state: &ObserverState, v: NodeId) -> FeatureVector {
    state.features(v).expect("candidates have features")
}

/// Uniform choice over the frontier.
pub fn pick_smart_random<R: Rng + ?Sized>(
    state: &ObserverState,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    argmax(state, rng, |_| 0.0)
}

/// Most statements calling the node red.
pub fn pick_red_score<R: Rng + ?Sized>(
    state: &ObserverState,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    argmax(state, rng, |v| {
        state
            .statements_about(v)
            .iter()
            .filter(|(_, said)| said.is_red())
            .count() as f64
    })
}

/// Most monitored red neighbors calling the node red.
pub fn pick_mrsr<R: Rng + ?Sized>(
    state: &ObserverState,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    argmax(state, rng, |v| {
        state
            .statements_about(v)
            .iter()
            .filter(|&&(speaker, said)| {
                said.is_red() && state.monitored_color(speaker).is_some_and(|c| c.is_red())
            })
            .count() as f64
    })
}

/// Most monitored red neighbors.
pub fn pick_mrn<R: Rng + ?Sized>(
    state: &ObserverState,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    argmax(state, rng, |v| {
        state
            .known_neighbors(v)
            .iter()
            .filter(|&&u| state.monitored_color(u).is_some_and(|c| c.is_red()))
            .count() as f64
    })
}

/// Highest predicted probability of being red. A fallback model defers to
/// [`pick_mrn`].
pub fn pick_redlearn<R: Rng + ?Sized>(
    state: &ObserverState,
    model: &TrainedModel,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    if model.fallback {
        return pick_mrn(state, rng);
    }
    argmax(state, rng, |v| {
        model
            .predict(&features(state, v))
            .expect("non-fallback model predicts")
    })
}

/// Dispatches to the pick function for `kind`. `model` is only consulted by
/// `RedLearn`; `None` behaves like a fallback model.
pub fn pick<R: Rng + ?Sized>(
    kind: StrategyKind,
    state: &ObserverState,
    model: Option<&TrainedModel>,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    match kind {
        StrategyKind::SmartRandom => pick_smart_random(state, rng),
        StrategyKind::RedScore => pick_red_score(state, rng),
        StrategyKind::MostRedSayRed => pick_mrsr(state, rng),
        StrategyKind::MostRedNeighbors => pick_mrn(state, rng),
        StrategyKind::RedLearn => match model {
            Some(m) => pick_redlearn(state, m, rng),
            None => pick_mrn(state, rng),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::model_from_weights;
    use crate::graph::Color::{self, Blue as B, Red as R};
    use crate::oracle::{MonitorReport, Statement};
    use crate::observer::FEATURE_COUNT;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn report(target: u32, color: Color, said: &[(u32, Color)]) -> MonitorReport {
        MonitorReport {
            target: NodeId(target),
            true_color: color,
            neighbors: said.iter().map(|&(u, _)| NodeId(u)).collect(),
            statements: said
                .iter()
                .map(|&(u, c)| Statement {
                    speaker: NodeId(target),
                    subject: NodeId(u),
                    said: c,
                })
                .collect(),
        }
    }

    fn state(reports: &[MonitorReport]) -> ObserverState {
        ObserverState::replay(20, reports).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn parses_cli_names() {
        for k in StrategyKind::ALL {
            assert_eq!(k.short_name().parse::<StrategyKind>(), Ok(k));
        }
        assert!("bfs".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn exhausted_frontier_is_signalled() {
        let s = state(&[report(0, R, &[])]);
        for k in StrategyKind::ALL {
            assert_eq!(pick(k, &s, None, &mut rng()), Err(StrategyError::Exhausted));
        }
    }

    #[test]
    fn single_candidate_is_chosen() {
        let s = state(&[report(0, R, &[(5, B)])]);
        assert_eq!(pick_smart_random(&s, &mut rng()).unwrap().chosen, NodeId(5));
    }

    #[test]
    fn smart_random_is_uniform() {
        let s = state(&[report(0, R, &[(1, B), (2, B), (3, B), (4, B)])]);
        let mut r = rng();
        let mut hits = [0usize; 5];
        for _ in 0..10_000 {
            hits[pick_smart_random(&s, &mut r).unwrap().chosen.index()] += 1;
        }
        for h in &hits[1..] {
            let f = *h as f64 / 10_000.0;
            assert!((f - 0.25).abs() < 0.015, "{f}");
        }
    }

    #[test]
    fn red_score_counts_red_claims() {
        // 5 called red by 0, 1 and 2; 6 by 0 only
        let s = state(&[
            report(0, B, &[(1, B), (2, B), (5, R), (6, R)]),
            report(1, B, &[(0, B), (5, R)]),
            report(2, B, &[(0, B), (5, R)]),
        ]);
        let d = pick_red_score(&s, &mut rng()).unwrap();
        assert_eq!(d.chosen, NodeId(5));
        assert_eq!(d.scores[&NodeId(5)], 3.0);
        assert_eq!(d.scores[&NodeId(6)], 1.0);
    }

    #[test]
    fn mrsr_ignores_blue_speakers() {
        let s = state(&[
            report(0, R, &[(1, R), (2, B), (5, R)]),
            report(1, R, &[(0, R), (5, R)]),
            report(2, B, &[(0, R), (5, R), (6, R)]),
        ]);
        let d = pick_mrsr(&s, &mut rng()).unwrap();
        assert_eq!(d.chosen, NodeId(5));
        assert_eq!(d.scores[&NodeId(5)], 2.0);
        assert_eq!(d.scores[&NodeId(6)], 0.0);
    }

    #[test]
    fn mrn_prefers_most_red_neighbors() {
        let s = state(&[
            report(0, R, &[(1, R), (2, R), (3, B), (7, B), (8, B)]),
            report(1, R, &[(0, R), (7, B), (9, B)]),
            report(2, R, &[(0, R), (7, B)]),
            report(3, B, &[(0, R), (8, B)]),
        ]);
        let d = pick_mrn(&s, &mut rng()).unwrap();
        assert_eq!(d.chosen, NodeId(7));
        assert_eq!(d.scores[&NodeId(7)], 3.0);
        assert_eq!(d.scores[&NodeId(8)], 1.0);
        assert_eq!(d.scores[&NodeId(9)], 1.0);
    }

    #[test]
    fn zero_model_ties_everything() {
        let s = state(&[report(0, R, &[(1, R), (2, B), (3, B)])]);
        let m = model_from_weights([0.0; FEATURE_COUNT], 0.0);
        let d = pick_redlearn(&s, &m, &mut rng()).unwrap();
        assert!(d.scores.values().all(|&p| p == 0.5));
    }

    #[test]
    fn heavy_red_neighbor_weight_ranks_like_mrn() {
        let s = state(&[
            report(0, R, &[(1, R), (2, R), (7, B), (8, B)]),
            report(1, R, &[(0, R), (7, B), (9, B)]),
            report(2, B, &[(0, R), (7, B)]),
        ]);
        let mut w = [0.0; FEATURE_COUNT];
        w[0] = 50.0;
        let m = model_from_weights(w, 0.0);
        let learned = pick_redlearn(&s, &m, &mut rng()).unwrap();
        let mrn = pick_mrn(&s, &mut rng()).unwrap();
        assert_eq!(learned.chosen, mrn.chosen);
        let order = |d: &Decision| {
            let mut v: Vec<_> = d.scores.iter().map(|(&k, &s)| (k, s)).collect();
            v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            v.into_iter().map(|(k, _)| k).collect::<Vec<_>>()
        };
        assert_eq!(order(&learned), order(&mrn));
    }

    #[test]
    fn fallback_model_behaves_as_mrn() {
        let s = state(&[
            report(0, R, &[(1, R), (7, B), (8, B)]),
            report(1, R, &[(0, R), (7, B)]),
        ]);
        let fallback = crate::classifier::TrainedModel::fallback();
        let a = pick_redlearn(&s, &fallback, &mut rng()).unwrap();
        let b = pick_mrn(&s, &mut rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn picks_are_pure() {
        let s = state(&[report(0, R, &[(1, R), (2, B), (3, B)])]);
        let before = s.clone();
        for k in StrategyKind::ALL {
            let m = model_from_weights([0.1; FEATURE_COUNT], 0.0);
            pick(k, &s, Some(&m), &mut rng()).unwrap();
        }
        assert_eq!(s, before);
    }
}
