use custody_core::consensus::{select_proposer, Behavior};
use custody_core::experiment::{run_experiment, DescriptionDist, ExperimentConfig, WorkloadSpec};
use custody_core::{ChainParams, SimTime};
use proptest::prelude::*;

fn config(seed: u64, faulty: Option<(usize, Behavior)>, jitter_ms: u64, periods: u64) -> ExperimentConfig {
    ExperimentConfig {
        params: ChainParams { period: SimTime::from_secs(5), gas_limit: 600_000, ..ChainParams::default() },
        faults: faulty.into_iter().collect(),
        base_delay: SimTime::from_millis(1),
        jitter: SimTime::from_millis(jitter_ms),
        workload: WorkloadSpec::Rate {
            creates: 1,
            transfers: 3,
            removes: 1,
            description: DescriptionDist::Uniform { min: 0, max: 200 },
        },
        periods,
        seed,
        ..ExperimentConfig::default()
    }
}

fn behavior() -> impl Strategy<Value = Option<(usize, Behavior)>> {
    prop_oneof![
        Just(None),
        (0usize..4).prop_map(|v| Some((v, Behavior::Silent))),
        (0usize..4).prop_map(|v| Some((v, Behavior::Equivocator))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn agreement_integrity_and_growth(seed in any::<u64>(), faulty in behavior(), jitter in 0u64..400) {
        let periods = 40;
        let cfg = config(seed, faulty, jitter, periods);
        let r = run_experiment(&cfg).unwrap();
        prop_assert!(r.honest_agree(), "{:?}", r.tips);
        prop_assert!(r.height() as f64 >= 0.9 * periods as f64, "height {}", r.height());
        let t = cfg.params.period;
        for w in r.chain.windows(2) {
            prop_assert_eq!(w[1].parent(), w[0].digest());
            prop_assert_eq!(w[1].height(), w[0].height() + 1);
            if w[0].height() > 0 {
                prop_assert!(w[1].timestamp() >= w[0].timestamp() + t);
            }
            prop_assert!(w[1].gas_used() <= cfg.params.gas_limit);
        }
        for b in r.chain.iter().skip(1) {
            // the proposer is the elected one for some round, never a silent node
            prop_assert!((0..4).any(|round| select_proposer(b.height(), round, 4) == b.proposer()));
            if let Some((v, Behavior::Silent)) = faulty {
                prop_assert_ne!(b.proposer(), v);
            }
        }
    }
}

#[test]
fn larger_validator_set_with_faults() {
    let cfg = ExperimentConfig {
        validators: 7,
        faults: vec![(1, Behavior::Equivocator), (4, Behavior::Silent)],
        ..config(11, None, 50, 30)
    };
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.tips.len(), 5);
    assert!(r.honest_agree());
    assert!(r.height() >= 27);
}
