use fogforge::repr::{encode_state, parl_reward, plrl_state, LoadDistribution, ReprDims};
use proptest::prelude::*;

proptest! {
    #[test]
    fn updates_preserve_the_sum_and_halve(
        dims in (1usize..4, 1usize..4, 2usize..5),
        picks in proptest::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..400),
    ) {
        let (c, w, a) = dims;
        let mut d = LoadDistribution::init(c, w, a).unwrap();
        prop_assert!((d.sum() - 1.0).abs() < 1e-12);
        for (ic, iw, ia) in picks {
            let (ci, wi, ai) = (ic.index(c), iw.index(w), ia.index(a));
            let before = d.as_slice().to_vec();
            d.update(ci, wi, ai).unwrap();
            let sel = (ci * w + wi) * a + ai;
            for (i, (&x, &y)) in before.iter().zip(d.as_slice()).enumerate() {
                let expected = if i == sel { (x + 1.0) / 2.0 } else { x / 2.0 };
                prop_assert_eq!(y, expected);
            }
            prop_assert!((d.sum() - 1.0).abs() < 1e-9);
            prop_assert!(d.get(ci, wi, ai).unwrap() >= 0.5);
        }
    }
}

#[test]
fn sum_survives_a_hundred_thousand_updates() {
    let mut d = LoadDistribution::init(20, 3, 9).unwrap();
    let mut k = 0usize;
    for _ in 0..100_000 {
        k = (k * 7 + 3) % 540;
        d.update(k / 27, (k / 9) % 3, k % 9).unwrap();
        assert!((d.sum() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn state_layout_is_one_hots_then_distribution() {
    let d = LoadDistribution::init(2, 3, 4).unwrap();
    let s = encode_state(1, 2, &d).unwrap();
    assert_eq!(s.len(), 2 + 3 + 24);
    assert_eq!(&s[..5], &[0.0, 1.0, 0.0, 0.0, 1.0]);
    assert_eq!(&s[5..], d.as_slice());
    assert!(encode_state(2, 0, &d).is_err());
}

#[test]
fn parl_rewards_telescope() {
    let queues = [0usize, 3, 5, 2, 2, 9, 1, 0, 4];
    let total: f64 = queues.windows(2).map(|w| parl_reward(w[0], w[1])).sum();
    assert_eq!(total, queues[0] as f64 - queues[queues.len() - 1] as f64);
}

#[test]
fn plrl_state_normalizes_queues() {
    let dims = ReprDims::new(2, 3, 4).unwrap();
    let s = plrl_state(0, 1, dims, &[1, 0, 3, 4]).unwrap();
    assert_eq!(&s[5..], &[0.125, 0.0, 0.375, 0.5]);
    let empty = plrl_state(0, 1, dims, &[0; 4]).unwrap();
    assert!(empty[5..].iter().all(|x| *x == 0.0));
}
