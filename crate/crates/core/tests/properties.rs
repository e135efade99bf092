use proptest::prelude::*;

use pqcd_core::circuit::{parse, serialize, Circuit, GateSet, GateSetId};
use pqcd_core::codec::{build_table, decode, encode};
use pqcd_core::dataset::sample_structure;
use pqcd_core::diffusion::ScheduleConfig;
use pqcd_core::qsim::simulate;
use pqcd_core::rng;

fn gateset() -> impl Strategy<Value = GateSet> {
    prop_oneof![Just(GateSetId::Gs1), Just(GateSetId::Gs2), Just(GateSetId::Ml)].prop_map(GateSet::new)
}

fn circuit(max_qubits: usize, max_gates: usize) -> impl Strategy<Value = (GateSet, Circuit)> {
    (gateset(), 2..=max_qubits, 0..=max_gates, any::<u64>()).prop_map(|(gs, n, count, seed)| {
        let c = sample_structure(&gs, n, count, &mut rng::seeded(seed));
        (gs, c)
    })
}

/// Whether some slot holds two two-qubit gates of the same kind.
fn repeats_two_qubit_kind(c: &Circuit) -> bool {
    c.slots().iter().any(|slot| {
        let kinds: Vec<_> = slot.iter().filter(|p| p.qubits.len() == 2).map(|p| p.kind).collect();
        kinds.iter().enumerate().any(|(i, k)| kinds[..i].contains(k))
    })
}

fn angles_close(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn text_roundtrip((gs, c) in circuit(5, 24)) {
        let text = serialize(&c);
        let back = parse(&text).unwrap();
        prop_assert!(back.approx_eq(&c, 1e-11));
        prop_assert_eq!(serialize(&back), text);
        prop_assert!(back.validate(&gs).is_ok());
    }

    #[test]
    fn json_roundtrip((_gs, c) in circuit(5, 24)) {
        let json = serde_json::to_string(&c).unwrap();
        let back: Circuit = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn codec_roundtrip((gs, c) in circuit(5, 24), seed in 0u64..4) {
        let table = build_table(&gs, 16, seed).unwrap();
        let tensor = encode(&c, &table, c.depth().max(1)).unwrap();
        let decoded = decode(&tensor, &table, &gs);
        if repeats_two_qubit_kind(&c) {
            // Role tokens alone cannot tell which qubits belong together.
            if let Ok(back) = decoded {
                prop_assert!(back.validate(&gs).is_ok());
            }
            return Ok(());
        }
        let back = decoded.unwrap();
        prop_assert_eq!(back.structural_key(), c.structural_key());
        for (a, b) in back.params().iter().zip(c.params()) {
            prop_assert!(angles_close(*a, b, 1e-9), "{} vs {}", a, b);
        }
    }

    #[test]
    fn simulation_preserves_norm((_gs, c) in circuit(5, 24)) {
        let state = simulate(&c).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn packing_is_valid((gs, c) in circuit(5, 24)) {
        let repacked = Circuit::pack(c.num_qubits(), c.placements().cloned().collect());
        prop_assert!(repacked.depth() <= c.depth());
        prop_assert_eq!(repacked.gate_count(), c.gate_count());
        prop_assert!(repacked.validate(&gs).is_ok());
    }

    #[test]
    fn forward_noise_inverts(x0 in prop::collection::vec(-3.0f64..3.0, 1..64), t in 0usize..1000, seed in any::<u64>()) {
        use rand::Rng;
        let s = ScheduleConfig::default().build().unwrap();
        let mut r = rng::seeded(seed);
        let eps: Vec<f64> = x0.iter().map(|_| r.sample(rand_distr::StandardNormal)).collect();
        let xt = s.forward_noise(&x0, t, &eps).unwrap();
        let back = s.recover_x0(&xt, t, &eps);
        for (a, b) in back.iter().zip(&x0) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decode_is_total(values in prop::collection::vec(-5.0f64..5.0, 17 * 3 * 4), nan_at in prop::option::of(0usize..17 * 3 * 4)) {
        let gs = GateSet::gs1();
        let table = build_table(&gs, 16, 1).unwrap();
        let mut values = values;
        if let Some(i) = nan_at {
            values[i] = f64::NAN;
        }
        let tensor = pqcd_core::codec::CircuitTensor::from_data(17, 3, 4, values).unwrap();
        if let Ok(c) = decode(&tensor, &table, &gs) {
            prop_assert!(c.validate(&gs).is_ok());
        }
    }
}

#[test]
fn gate_channels_tolerate_small_noise() {
    use rand::Rng;
    let gs = GateSet::gs1();
    let table = build_table(&gs, 16, 1).unwrap();
    let mut r = rng::seeded(77);
    let mut same = 0;
    for _ in 0..1000 {
        let count = r.gen_range(3..=16);
        let c = sample_structure(&gs, 3, count, &mut r);
        let mut t = encode(&c, &table, c.depth()).unwrap();
        for ch in 0..table.dim {
            for q in 0..3 {
                for s in 0..c.depth() {
                    let v = t.get(ch, q, s) + 0.05 * r.sample::<f64, _>(rand_distr::StandardNormal);
                    t.set(ch, q, s, v);
                }
            }
        }
        if decode(&t, &table, &gs).is_ok_and(|d| d.structural_key() == c.structural_key()) {
            same += 1;
        }
    }
    assert!(same >= 990, "{same} of 1000 decoded to the same structure");
}
