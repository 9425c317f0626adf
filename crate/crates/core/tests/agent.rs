use fogforge::agent::{
    argmax, td_targets, AgentConfig, Checkpoint, DdqlAgent, EpsilonSchedule, InferencePolicy,
    LossKind, ReplayBuffer, TargetDirection, Transition, CHECKPOINT_FORMAT_VERSION,
};
use fogforge::nn::{Dense, Mlp};
use fogforge::rng;
use fogforge::Error;
use ndarray::{arr1, arr2, Array2};
use proptest::prelude::*;
use rand::Rng;

fn small_config() -> AgentConfig {
    AgentConfig {
        hidden: vec![16, 16],
        batch_size: 8,
        buffer_capacity: 64,
        target_sync_period: 5,
        ..AgentConfig::default()
    }
}

fn transition(r: &mut rng::SimRng, n: usize, actions: usize) -> Transition {
    Transition {
        state: (0..n).map(|_| r.random_range(-1.0..1.0)).collect(),
        action: r.random_range(0..actions),
        reward: r.random_range(-2.0..2.0),
        next_state: (0..n).map(|_| r.random_range(-1.0..1.0)).collect(),
        truncated: false,
    }
}

#[test]
fn full_exploration_is_uniform() {
    let mut agent = DdqlAgent::new(AgentConfig::default(), 6, 4, 1).unwrap();
    agent.set_epsilon_schedule(EpsilonSchedule::Constant(1.0));
    let mut counts = [0usize; 4];
    let s = vec![0.3; 6];
    for _ in 0..40_000 {
        counts[agent.select_action(&s).unwrap()] += 1;
    }
    for c in counts {
        assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01, "{counts:?}");
    }
    assert_eq!(agent.decision_steps(), 40_000);
}

#[test]
fn zero_exploration_is_greedy() {
    let mut agent = DdqlAgent::new(AgentConfig::default(), 6, 4, 2).unwrap();
    agent.set_epsilon_schedule(EpsilonSchedule::Constant(0.0));
    let mut r = rng::seeded(3);
    for _ in 0..500 {
        let s: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
        assert_eq!(
            agent.select_action(&s).unwrap(),
            agent.greedy_action(&s).unwrap()
        );
    }
}

#[test]
fn epsilon_decays_linearly_then_holds() {
    let s = EpsilonSchedule::Linear {
        start: 1.0,
        end: 0.05,
        origin: 100,
        span: 60,
    };
    assert_eq!(s.value(0), 1.0);
    assert_eq!(s.value(100), 1.0);
    assert!((s.value(130) - 0.525).abs() < 1e-12);
    assert_eq!(s.value(160), 0.05);
    assert_eq!(s.value(10_000), 0.05);

    let mut agent = DdqlAgent::new(AgentConfig::default(), 3, 2, 0).unwrap();
    agent.begin_phase(1_000);
    assert_eq!(
        agent.epsilon_schedule(),
        EpsilonSchedule::Linear {
            start: 1.0,
            end: 0.05,
            origin: 0,
            span: 600
        }
    );
}

#[test]
fn argmax_prefers_lowest_index() {
    assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
    assert_eq!(argmax(&[0.0, 0.0]), 0);
}

/// One affine layer so `Q(s, a) = s · W[:, a] + b[a]`.
fn linear(w: Array2<f64>, b: Vec<f64>) -> Mlp {
    Mlp::from_layers(vec![Dense {
        weights: w,
        bias: arr1(&b),
    }])
    .unwrap()
}

#[test]
fn double_q_targets_match_a_table() {
    // three one-hot next states, two actions: tables are just the weight rows
    let online = linear(arr2(&[[1.0, 2.0], [5.0, 4.0], [0.0, 0.0]]), vec![0.0, 0.0]);
    let target = linear(
        arr2(&[[10.0, 20.0], [30.0, 40.0], [7.0, 9.0]]),
        vec![0.0, 0.0],
    );
    let next = arr2(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let rewards = [1.0, -1.0, 0.5];
    let g = 0.5;
    // online picks a = 1, 0, 0 (tie -> 0); target evaluates those
    let expected = [1.0 + g * 20.0, -1.0 + g * 30.0, 0.5 + g * 7.0];
    let y = td_targets(
        &rewards,
        next.view(),
        &online,
        &target,
        g,
        TargetDirection::OnlineSelects,
    )
    .unwrap();
    assert_eq!(y, expected);
    // target picks a = 1, 1, 1; online evaluates
    let swapped = [1.0 + g * 2.0, -1.0 + g * 4.0, 0.5 + g * 0.0];
    let y = td_targets(
        &rewards,
        next.view(),
        &online,
        &target,
        g,
        TargetDirection::TargetSelects,
    )
    .unwrap();
    assert_eq!(y, swapped);
    let y0 = td_targets(
        &rewards,
        next.view(),
        &online,
        &target,
        0.0,
        TargetDirection::OnlineSelects,
    )
    .unwrap();
    assert_eq!(y0, rewards);
}

#[test]
fn consistent_network_is_a_fixed_point() {
    let config = AgentConfig {
        hidden: vec![4],
        batch_size: 4,
        buffer_capacity: 8,
        ..AgentConfig::default()
    };
    let c = 3.0;
    let mut net = Mlp::zeros(&[5, 4, 2]).unwrap();
    net.layers_mut()[1].bias.fill(c);
    let mut agent = DdqlAgent::with_network(config.clone(), net.clone(), 0).unwrap();
    let mut r = rng::seeded(1);
    for _ in 0..8 {
        let mut t = transition(&mut r, 5, 2);
        t.reward = c * (1.0 - config.gamma);
        agent.remember(t).unwrap();
    }
    for _ in 0..10 {
        let loss = agent.train_step().unwrap().unwrap();
        assert!(loss.abs() < 1e-24);
    }
    assert_eq!(agent.q_net(), &net);
}

#[test]
fn fixed_batch_regression_loss_falls_monotonically() {
    let config = AgentConfig {
        hidden: vec![16],
        gamma: 0.0,
        batch_size: 16,
        buffer_capacity: 16,
        adam: fogforge::nn::AdamConfig {
            learning_rate: 1e-4,
            ..Default::default()
        },
        ..AgentConfig::default()
    };
    let mut agent = DdqlAgent::new(config, 5, 3, 4).unwrap();
    let mut r = rng::seeded(2);
    for _ in 0..16 {
        agent.remember(transition(&mut r, 5, 3)).unwrap();
    }
    let losses: Vec<f64> = (0..100)
        .map(|_| agent.train_step().unwrap().unwrap())
        .collect();
    for w in losses.windows(2) {
        assert!(w[1] < w[0], "{} then {}", w[0], w[1]);
    }
}

#[test]
fn greedy_action_ignores_positive_rescaling_of_outputs() {
    let mut agent = DdqlAgent::new(AgentConfig::default(), 8, 5, 6).unwrap();
    let mut r = rng::seeded(9);
    let states: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..8).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let before: Vec<usize> = states
        .iter()
        .map(|s| agent.greedy_action(s).unwrap())
        .collect();
    let last = agent.q_net_mut().layers_mut().last_mut().unwrap();
    last.weights.mapv_inplace(|w| w * 4.0);
    last.bias.mapv_inplace(|b| b * 4.0 + 2.5);
    let after: Vec<usize> = states
        .iter()
        .map(|s| agent.greedy_action(s).unwrap())
        .collect();
    assert_eq!(before, after);
}

#[test]
fn target_network_lags_until_sync() {
    let config = small_config();
    let mut agent = DdqlAgent::new(config.clone(), 4, 3, 5).unwrap();
    let initial = agent.target_net().clone();
    let mut r = rng::seeded(4);
    for _ in 0..config.batch_size {
        agent.remember(transition(&mut r, 4, 3)).unwrap();
    }
    for k in 1..config.target_sync_period {
        agent.train_step().unwrap();
        assert_eq!(agent.target_net(), &initial, "step {k}");
        assert_ne!(agent.q_net(), &initial);
    }
    agent.train_step().unwrap();
    assert_eq!(agent.target_net(), agent.q_net());
    assert_eq!(agent.last_sync(), config.target_sync_period);
}

#[test]
fn training_waits_for_a_full_batch() {
    let mut agent = DdqlAgent::new(small_config(), 4, 3, 5).unwrap();
    let net = agent.q_net().clone();
    let mut r = rng::seeded(4);
    for _ in 0..7 {
        agent.remember(transition(&mut r, 4, 3)).unwrap();
        assert_eq!(agent.train_step().unwrap(), None);
    }
    assert_eq!(agent.q_net(), &net);
    assert_eq!(agent.training_steps(), 0);
}

#[test]
fn long_training_stays_finite_and_is_deterministic() {
    let run = || {
        let mut agent = DdqlAgent::new(small_config(), 6, 3, 8).unwrap();
        let mut r = rng::seeded(8);
        for _ in 0..10_000 {
            agent.remember(transition(&mut r, 6, 3)).unwrap();
            agent.train_step().unwrap();
        }
        agent
    };
    let a = run();
    assert!(a.q_net().all_finite() && a.target_net().all_finite());
    assert_eq!(a.training_steps(), 10_000 - 7);
    assert_eq!(a.checkpoint(), run().checkpoint());
}

#[test]
fn huber_loss_trains() {
    let config = AgentConfig {
        loss: LossKind::Huber,
        ..small_config()
    };
    let mut agent = DdqlAgent::new(config, 4, 2, 1).unwrap();
    let mut r = rng::seeded(1);
    for _ in 0..200 {
        agent.remember(transition(&mut r, 4, 2)).unwrap();
        if let Some(l) = agent.train_step().unwrap() {
            assert!(l.is_finite() && l >= 0.0);
        }
    }
}

#[test]
fn rejects_bad_transitions() {
    let mut agent = DdqlAgent::new(small_config(), 4, 3, 0).unwrap();
    let mut t = transition(&mut rng::seeded(0), 4, 3);
    t.action = 3;
    assert!(matches!(
        agent.remember(t.clone()),
        Err(Error::IndexOutOfRange(_))
    ));
    t.action = 0;
    t.state.pop();
    assert!(matches!(
        agent.remember(t),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(agent.q_values(&[0.0; 5]).is_err());
}

proptest! {
    #[test]
    fn ring_buffer_keeps_the_latest(capacity in 1usize..20, pushes in 0usize..60) {
        let mut b = ReplayBuffer::new(capacity).unwrap();
        for i in 0..pushes {
            b.push(Transition {
                state: vec![i as f64],
                action: 0,
                reward: 0.0,
                next_state: vec![0.0],
                truncated: false,
            });
        }
        prop_assert_eq!(b.len(), pushes.min(capacity));
        prop_assert_eq!(b.pushes(), pushes as u64);
        let kept: Vec<f64> = b.iter().map(|t| t.state[0]).collect();
        let expected: Vec<f64> = (pushes.saturating_sub(capacity)..pushes).map(|i| i as f64).collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn samples_are_distinct_and_in_range(len in 1usize..40, n in 1usize..40, seed in any::<u64>()) {
        let mut b = ReplayBuffer::new(64).unwrap();
        for _ in 0..len {
            b.push(Transition { state: vec![], action: 0, reward: 0.0, next_state: vec![], truncated: false });
        }
        let got = b.sample_indices(&mut rng::seeded(seed), n);
        if n > len {
            prop_assert!(got.is_none());
        } else {
            let mut idx = got.unwrap();
            prop_assert_eq!(idx.len(), n);
            idx.sort_unstable();
            idx.dedup();
            prop_assert_eq!(idx.len(), n);
            prop_assert!(idx.iter().all(|&i| i < len));
        }
    }
}

fn trained_agent() -> DdqlAgent {
    let mut agent = DdqlAgent::new(small_config(), 4, 3, 11).unwrap();
    agent.begin_phase(100);
    let mut r = rng::seeded(11);
    for _ in 0..120 {
        let s: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let a = agent.select_action(&s).unwrap();
        let mut t = transition(&mut r, 4, 3);
        t.state = s;
        t.action = a;
        agent.remember(t).unwrap();
        if agent.train_due() {
            agent.train_step().unwrap();
        }
    }
    agent
}

#[test]
fn checkpoint_round_trips_exactly() {
    let agent = trained_agent();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    agent.checkpoint().save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    assert_eq!(loaded, agent.checkpoint());
    assert_eq!(loaded.format_version, CHECKPOINT_FORMAT_VERSION);
    let restored = DdqlAgent::from_checkpoint(loaded).unwrap();
    assert_eq!(restored.checkpoint(), agent.checkpoint());
}

#[test]
fn damaged_checkpoints_are_reported() {
    let agent = trained_agent();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    agent.checkpoint().save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();

    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(
        Checkpoint::load(&path),
        Err(Error::CorruptFile { .. })
    ));

    let bumped = text.replacen(
        &format!("\"format_version\":{CHECKPOINT_FORMAT_VERSION}"),
        &format!("\"format_version\":{}", CHECKPOINT_FORMAT_VERSION + 1),
        1,
    );
    std::fs::write(&path, bumped).unwrap();
    assert!(matches!(
        Checkpoint::load(&path),
        Err(Error::VersionMismatch { .. })
    ));

    assert!(matches!(
        Checkpoint::load(&dir.path().join("missing.json")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn inference_export_is_greedy_and_smaller() {
    let agent = trained_agent();
    let policy = agent.export_inference();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    policy.save(&path).unwrap();
    let loaded = InferencePolicy::load(&path).unwrap();
    assert_eq!(loaded, policy);
    let mut r = rng::seeded(12);
    for _ in 0..1_000 {
        let s: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        assert_eq!(loaded.act(&s).unwrap(), agent.greedy_action(&s).unwrap());
    }
    assert!(policy.encoded_len().unwrap() < agent.checkpoint().encoded_len().unwrap());
}
