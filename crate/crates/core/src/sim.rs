//! Synthetic bidder populations with known ground-truth valuations.
//!
//! The estimators need logs whose true values are known; these agents supply
//! them: noisy truthful bidders, Hedge and epsilon-greedy no-regret learners,
//! type-biased overbidders, and replay of an existing log. Sessions are
//! deterministic in the seed, with each agent drawing from its own derived
//! stream so adding an agent does not disturb the others' draws.

use alloc::vec::Vec;

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::auction::{counterfactual_utility, resolve, AuctionOutcome, CtrProfile, Mechanism};
use crate::error::Error;
use crate::grid::Grid;
use crate::sequence::BidSequence;

/// Bidding rule of one synthetic agent.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentKind {
    /// Bid `clamp(v + N(0, sigma), 0, max B)`.
    TruthfulNoisy { sigma: f64 },
    /// Exponential-weights learner over the bid grid with full-information
    /// counterfactual feedback. `None` uses the tuned rate
    /// `sqrt(ln|B| / T)`.
    Hedge { eta: Option<f64> },
    /// With probability epsilon bid uniformly on the grid, otherwise play the
    /// bid with the best cumulative counterfactual utility.
    EpsGreedy { epsilon: f64 },
    /// Bid `clamp(v * (1 + kappa * r) + N(0, sigma), 0, max B)` where
    /// `r = (modal realized rank so far - 1) / (n - 1)`, so persistently
    /// low-ranked agents overbid most. `r = 0` before any history.
    BiasedOverbidder { kappa: f64, sigma: f64 },
    /// Play back a recorded bid stream.
    Replay { bids: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub kind: AgentKind,
    /// True per-click valuation, coins.
    pub value: f64,
}

impl AgentSpec {
    fn validate(&self) -> Result<(), Error> {
        if !(self.value > 0.0) {
            return Err(Error::NonPositive("agent value"));
        }
        match &self.kind {
            AgentKind::TruthfulNoisy { sigma } | AgentKind::BiasedOverbidder { sigma, .. }
                if !(*sigma >= 0.0) =>
            {
                Err(Error::NonPositive("noise sigma"))
            }
            AgentKind::BiasedOverbidder { kappa, .. } if !(*kappa >= 0.0) => {
                Err(Error::NonPositive("overbid slope kappa"))
            }
            AgentKind::Hedge { eta: Some(eta) } if !(*eta > 0.0) => {
                Err(Error::NonPositive("hedge learning rate"))
            }
            AgentKind::EpsGreedy { epsilon } if !(0.0..=1.0).contains(epsilon) => {
                Err(Error::NonPositive("exploration probability"))
            }
            _ => Ok(()),
        }
    }
}

/// Full description of one simulated session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub mechanism: Mechanism,
    pub ctrs: CtrProfile,
    pub rounds: usize,
    pub agents: Vec<AgentSpec>,
    pub grid: Grid,
    pub seed: u64,
}

/// The experiment's value ladder for five bidders, coins.
pub const EXPERIMENT_VALUES: [f64; 5] = [21.0, 27.0, 33.0, 39.0, 45.0];

/// The experiment's session length.
pub const EXPERIMENT_ROUNDS: usize = 1500;

impl SessionConfig {
    /// Five agents of one kind with the experiment's values, CTRs, T = 1500,
    /// and the default grid.
    pub fn experiment(mechanism: Mechanism, kinds: [AgentKind; 5], seed: u64) -> Self {
        let agents = kinds
            .into_iter()
            .zip(EXPERIMENT_VALUES)
            .map(|(kind, value)| AgentSpec { kind, value })
            .collect();
        SessionConfig {
            mechanism,
            ctrs: CtrProfile::experiment_default(),
            rounds: EXPERIMENT_ROUNDS,
            agents,
            grid: Grid::default(),
            seed,
        }
    }

    /// The tuned Hedge learning rate `sqrt(ln|B| / T)` for this config.
    pub fn tuned_eta(&self) -> f64 {
        libm::sqrt(libm::log(self.grid.len() as f64) / self.rounds as f64)
    }
}

/// Result of a session: the bid log, the per-round outcomes, and the ground
/// truth values in bidder order.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub sequence: BidSequence,
    pub outcomes: Vec<AuctionOutcome>,
    pub values: Vec<f64>,
}

/// SplitMix64 step, the standard stateless u64 mixer.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-agent stream seed: mixing the session seed with the agent index keeps
/// each agent's draws independent of the roster around it.
fn derive_seed(seed: u64, agent: usize) -> u64 {
    splitmix64(seed ^ splitmix64(agent as u64 + 1))
}

enum AgentState {
    TruthfulNoisy { sigma: f64 },
    Hedge { eta: f64, cumulative: Vec<f64> },
    EpsGreedy { epsilon: f64, cumulative: Vec<f64> },
    BiasedOverbidder { kappa: f64, sigma: f64, rank_counts: Vec<usize> },
    Replay { bids: Vec<f64>, next: usize },
}

fn argmax_lowest(xs: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..xs.len() {
        if xs[k] > xs[best] {
            best = k;
        }
    }
    best
}

/// Run the deterministic round loop: every agent submits a bid from history
/// through round t-1, the auction resolves, and learners receive
/// full-information counterfactual feedback.
pub fn run_session(config: &SessionConfig) -> Result<SessionLog, Error> {
    let n = config.agents.len();
    if n != config.ctrs.slots() {
        return Err(Error::LengthMismatch { expected: config.ctrs.slots(), got: n });
    }
    if config.rounds == 0 {
        return Err(Error::Empty("session rounds"));
    }
    for spec in &config.agents {
        spec.validate()?;
    }

    let grid_points = config.grid.to_vec();
    let max_bid = config.grid.max_value();
    let values: Vec<f64> = config.agents.iter().map(|a| a.value).collect();

    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| ChaCha8Rng::seed_from_u64(derive_seed(config.seed, i)))
        .collect();
    let mut states: Vec<AgentState> = config
        .agents
        .iter()
        .map(|spec| match &spec.kind {
            AgentKind::TruthfulNoisy { sigma } => AgentState::TruthfulNoisy { sigma: *sigma },
            AgentKind::Hedge { eta } => AgentState::Hedge {
                eta: eta.unwrap_or_else(|| config.tuned_eta()),
                cumulative: alloc::vec![0.0; grid_points.len()],
            },
            AgentKind::EpsGreedy { epsilon } => AgentState::EpsGreedy {
                epsilon: *epsilon,
                cumulative: alloc::vec![0.0; grid_points.len()],
            },
            AgentKind::BiasedOverbidder { kappa, sigma } => AgentState::BiasedOverbidder {
                kappa: *kappa,
                sigma: *sigma,
                rank_counts: alloc::vec![0; n],
            },
            AgentKind::Replay { bids } => AgentState::Replay { bids: bids.clone(), next: 0 },
        })
        .collect();

    let mut profiles: Vec<Vec<f64>> = Vec::with_capacity(config.rounds);
    let mut outcomes: Vec<AuctionOutcome> = Vec::with_capacity(config.rounds);

    for t in 1..=config.rounds {
        let mut bids = alloc::vec![0.0; n];
        for i in 0..n {
            let value = values[i];
            let rng = &mut rngs[i];
            bids[i] = match &mut states[i] {
                AgentState::TruthfulNoisy { sigma } => {
                    let noise = Normal::new(0.0, *sigma).unwrap().sample(rng);
                    (value + noise).clamp(0.0, max_bid)
                }
                AgentState::Hedge { eta, cumulative } => {
                    // exponential weights, normalized by the running maximum
                    // so the exponentials stay bounded
                    let top = cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let weights: Vec<f64> =
                        cumulative.iter().map(|&s| libm::exp(*eta * (s - top))).collect();
                    let total: f64 = weights.iter().sum();
                    let mut ticket = rng.gen::<f64>() * total;
                    let mut pick = weights.len() - 1;
                    for (k, &w) in weights.iter().enumerate() {
                        ticket -= w;
                        if ticket <= 0.0 {
                            pick = k;
                            break;
                        }
                    }
                    grid_points[pick]
                }
                AgentState::EpsGreedy { epsilon, cumulative } => {
                    if rng.gen::<f64>() < *epsilon {
                        grid_points[rng.gen_range(0..grid_points.len())]
                    } else {
                        grid_points[argmax_lowest(cumulative)]
                    }
                }
                AgentState::BiasedOverbidder { kappa, sigma, rank_counts } => {
                    let r = if rank_counts.iter().all(|&c| c == 0) {
                        0.0
                    } else {
                        let modal = argmax_first(rank_counts);
                        modal as f64 / (n - 1) as f64
                    };
                    let noise = Normal::new(0.0, *sigma).unwrap().sample(rng);
                    (value * (1.0 + *kappa * r) + noise).clamp(0.0, max_bid)
                }
                AgentState::Replay { bids: source, next } => {
                    let b = *source
                        .get(*next)
                        .ok_or(Error::ReplayExhausted { bidder: i, round: t })?;
                    *next += 1;
                    b
                }
            };
        }

        let outcome = resolve(config.mechanism, &bids, &config.ctrs, &values)?;
        for i in 0..n {
            match &mut states[i] {
                AgentState::Hedge { cumulative, .. } | AgentState::EpsGreedy { cumulative, .. } => {
                    for (k, &b) in grid_points.iter().enumerate() {
                        cumulative[k] += counterfactual_utility(
                            config.mechanism,
                            &config.ctrs,
                            &bids,
                            i,
                            b,
                            values[i],
                        );
                    }
                }
                AgentState::BiasedOverbidder { rank_counts, .. } => {
                    rank_counts[outcome.positions[i] - 1] += 1;
                }
                _ => {}
            }
        }
        profiles.push(bids);
        outcomes.push(outcome);
    }

    Ok(SessionLog { sequence: BidSequence::from_profiles(profiles)?, outcomes, values })
}

/// Index of the largest count, first (best rank) on ties.
fn argmax_first(counts: &[usize]) -> usize {
    let mut best = 0;
    for k in 1..counts.len() {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regret::{actual_utility, optimal_fixed_utility, AuctionContext};
    use crate::sequence::Window;
    use alloc::vec;

    fn truthful(sigma: f64) -> [AgentKind; 5] {
        [(); 5].map(|_| AgentKind::TruthfulNoisy { sigma })
    }

    #[test]
    fn exact_truthful_vcg_log_is_constant_with_zero_regret() {
        let config = SessionConfig {
            rounds: 40,
            ..SessionConfig::experiment(Mechanism::Vcg, truthful(0.0), 7)
        };
        let log = run_session(&config).unwrap();
        for t in 1..=40 {
            assert_eq!(log.sequence.profile(t), &EXPERIMENT_VALUES);
        }
        let ctrs = CtrProfile::experiment_default();
        let ctx = AuctionContext { mechanism: Mechanism::Vcg, ctrs: &ctrs };
        let window = Window::full(40).unwrap();
        for i in 0..5 {
            let actual = actual_utility(&log.sequence, i, log.values[i], window, ctx).unwrap();
            let (opt, _) = optimal_fixed_utility(
                &log.sequence,
                i,
                log.values[i],
                window,
                &Grid::default(),
                ctx,
            )
            .unwrap();
            assert!((opt - actual).abs() < 1e-9, "bidder {i} has regret");
        }
    }

    #[test]
    fn same_seed_same_log_different_seed_differs() {
        let config = SessionConfig {
            rounds: 50,
            ..SessionConfig::experiment(Mechanism::Gsp, truthful(2.0), 42)
        };
        let a = run_session(&config).unwrap();
        let b = run_session(&config).unwrap();
        assert_eq!(a.sequence, b.sequence);
        let other = SessionConfig { seed: 43, ..config };
        let c = run_session(&other).unwrap();
        assert_ne!(a.sequence, c.sequence);
    }

    #[test]
    fn roster_insensitive_streams() {
        // replacing one agent's kind must not change the others' draws
        let base = SessionConfig {
            rounds: 30,
            ..SessionConfig::experiment(Mechanism::Gsp, truthful(2.0), 9)
        };
        let mut changed = base.clone();
        changed.agents[2].kind = AgentKind::Hedge { eta: None };
        let a = run_session(&base).unwrap();
        let b = run_session(&changed).unwrap();
        for t in 1..=30 {
            for i in [0usize, 1, 3, 4] {
                assert_eq!(a.sequence.bid(t, i), b.sequence.bid(t, i), "t={t} i={i}");
            }
        }
    }

    #[test]
    fn hedge_first_round_is_uniform() {
        // with zero cumulative utilities every weight is equal, so first-round
        // picks over many seeds should cover the grid roughly uniformly
        let mut counts = vec![0usize; 60];
        for seed in 0..600 {
            let config = SessionConfig {
                rounds: 1,
                ..SessionConfig::experiment(
                    Mechanism::Gsp,
                    [(); 5].map(|_| AgentKind::Hedge { eta: None }),
                    seed,
                )
            };
            let log = run_session(&config).unwrap();
            let b = log.sequence.bid(1, 0);
            counts[b as usize - 1] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0), "some grid bid never drawn: {counts:?}");
        assert!(*counts.iter().max().unwrap() <= 35, "first round draw badly nonuniform");
    }

    #[test]
    fn biased_overbidder_arithmetic() {
        // the perennial last-place bidder converges to r = 1:
        // bid = 21 * (1 + 0.4 * 1) = 29.4
        let mut kinds = truthful(0.0);
        kinds[0] = AgentKind::BiasedOverbidder { kappa: 0.4, sigma: 0.0 };
        let mut config = SessionConfig {
            rounds: 5,
            ..SessionConfig::experiment(Mechanism::Gsp, kinds, 1)
        };
        config.agents[0].value = 21.0;
        config.agents[1].value = 30.0;
        config.agents[2].value = 35.0;
        config.agents[3].value = 40.0;
        config.agents[4].value = 45.0;
        let log = run_session(&config).unwrap();
        // round 1: no history, r = 0, truthful 21 and ranked last
        assert_eq!(log.sequence.bid(1, 0), 21.0);
        // afterwards modal rank is 5 and stays there (29.4 < 30)
        assert_eq!(log.sequence.bid(2, 0), 29.4);
        assert_eq!(log.sequence.bid(5, 0), 29.4);
    }

    #[test]
    fn eps_greedy_zero_eps_is_deterministic_argmax() {
        let mut kinds = truthful(0.0);
        kinds[4] = AgentKind::EpsGreedy { epsilon: 0.0 };
        let config = SessionConfig {
            rounds: 10,
            ..SessionConfig::experiment(Mechanism::Gsp, kinds, 11)
        };
        let log = run_session(&config).unwrap();
        // round 1: zero cumulative utility everywhere, lowest bid wins the tie
        assert_eq!(log.sequence.bid(1, 4), 1.0);
        // later rounds: v=45 against constant (21,27,33,39): slot 3 at
        // 0.20*(45-27) = 3.6 beats slot 1's 0.38*(45-39) = 2.28, and bids
        // 28..=33 all reach it; greedy breaks the tie at the lowest bid
        assert_eq!(log.sequence.bid(10, 4), 28.0);
    }

    #[test]
    fn replay_agent_replays_and_exhausts() {
        let mut kinds = truthful(0.0);
        kinds[1] = AgentKind::Replay { bids: vec![5.0, 6.0, 7.0] };
        let config = SessionConfig {
            rounds: 3,
            ..SessionConfig::experiment(Mechanism::Gsp, kinds.clone(), 3)
        };
        let log = run_session(&config).unwrap();
        assert_eq!(log.sequence.bid(2, 1), 6.0);
        let too_long = SessionConfig { rounds: 4, ..config };
        assert!(matches!(
            run_session(&too_long),
            Err(Error::ReplayExhausted { bidder: 1, round: 4 })
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut config = SessionConfig {
            rounds: 2,
            ..SessionConfig::experiment(Mechanism::Gsp, truthful(0.0), 0)
        };
        config.agents[0].value = 0.0;
        assert!(run_session(&config).is_err());
        config.agents[0].value = 21.0;
        config.agents[1].kind = AgentKind::EpsGreedy { epsilon: 1.5 };
        assert!(run_session(&config).is_err());
        config.agents[1].kind = AgentKind::TruthfulNoisy { sigma: -1.0 };
        assert!(run_session(&config).is_err());
    }

    #[test]
    fn noisy_bids_stay_in_range() {
        let config = SessionConfig {
            rounds: 200,
            ..SessionConfig::experiment(Mechanism::Gsp, truthful(30.0), 5)
        };
        let log = run_session(&config).unwrap();
        for t in 1..=200 {
            for i in 0..5 {
                let b = log.sequence.bid(t, i);
                assert!((0.0..=60.0).contains(&b));
            }
        }
    }
}
