use proptest::prelude::*;

use polycode::polycode::{apply_tag, CodeWidth, PolycodeRegistry, RegistryCell, TagSet};
use polycode::recognizer::{classify, train_update, PredictionVector, TrainingPolicy};
use polycode::stimulus::{DirectionId, N_DIRECTIONS};

/// Bit-array model: XOR lane by lane, then move every bit one place up with
/// the top bit wrapping to bit 0.
fn reference(code: u64, tag: u64, bits: u32) -> u64 {
    let x: Vec<bool> = (0..bits).map(|i| ((code ^ tag) >> i) & 1 == 1).collect();
    (0..bits as usize).fold(0, |acc, i| {
        let from = (i + bits as usize - 1) % bits as usize;
        acc | (u64::from(x[from]) << i)
    })
}

fn width() -> impl Strategy<Value = CodeWidth> {
    (1u32..=64).prop_map(|b| CodeWidth::new(b).unwrap())
}

fn dir() -> impl Strategy<Value = DirectionId> {
    (0..N_DIRECTIONS).prop_map(|i| DirectionId::new(i).unwrap())
}

proptest! {
    #[test]
    fn apply_tag_matches_bit_model(w in width(), code: u64, tag: u64) {
        let (code, tag) = (code & w.mask(), tag & w.mask());
        prop_assert_eq!(apply_tag(code, tag, w), reference(code, tag, w.bits()));
    }

    #[test]
    fn apply_tag_stays_in_width(w in width(), code: u64, tag: u64) {
        prop_assert_eq!(apply_tag(code, tag, w) & !w.mask(), 0);
    }

    /// Two tags commute exactly when their XOR is fixed by the rotation.
    #[test]
    fn swapping_two_arrivals(w in width(), code: u64, a: u64, b: u64) {
        let (code, a, b) = (code & w.mask(), a & w.mask(), b & w.mask());
        let ab = apply_tag(apply_tag(code, a, w), b, w);
        let ba = apply_tag(apply_tag(code, b, w), a, w);
        let x = a ^ b;
        prop_assert_eq!(ab == ba, x == 0 || x == w.mask());
    }

    #[test]
    fn generated_tags_are_distinct_and_nonzero(n in 1usize..400, seed: u64, wide: bool) {
        let w = if wide { CodeWidth::W64 } else { CodeWidth::W32 };
        let tags = TagSet::generate(n, w, seed).unwrap();
        let mut seen = std::collections::HashSet::new();
        for &t in tags.as_slice() {
            prop_assert!(t != 0 && t & !w.mask() == 0);
            prop_assert!(seen.insert(t));
        }
        prop_assert_eq!(tags, TagSet::generate(n, w, seed).unwrap());
    }

    #[test]
    fn training_keeps_a_positive_count(labels in proptest::collection::vec(dir(), 1..60)) {
        let policy = TrainingPolicy::default();
        let mut cell = None;
        for &l in &labels {
            let prev: Option<RegistryCell> = cell;
            let next = train_update(prev, l, &policy);
            prop_assert!(next.repeats >= 1);
            match prev {
                Some(p) if p.label == l => prop_assert_eq!(next.repeats, p.repeats + 1),
                Some(p) if p.repeats > 1 => {
                    prop_assert_eq!(next.label, p.label);
                    prop_assert_eq!(next.repeats, p.repeats - 1);
                }
                _ => prop_assert_eq!(next, RegistryCell { label: l, repeats: 1 }),
            }
            cell = Some(next);
        }
    }

    #[test]
    fn argmax_follows_a_permutation(scores in proptest::array::uniform8(0.0f64..100.0), rot in 0usize..8) {
        let (best, tie) = PredictionVector(scores).argmax();
        prop_assume!(!tie);
        let mut moved = [0.0; N_DIRECTIONS];
        for (i, s) in scores.iter().enumerate() {
            moved[(i + rot) % N_DIRECTIONS] = *s;
        }
        let (b2, _) = PredictionVector(moved).argmax();
        prop_assert_eq!(b2.index(), (best.index() + rot) % N_DIRECTIONS);
    }

    #[test]
    fn extra_activation_only_raises_its_own_label(
        cells in proptest::collection::vec((any::<u64>(), dir(), 1u64..50), 1..30),
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..40),
        extra in any::<prop::sample::Index>(),
    ) {
        let mut reg = PolycodeRegistry::new();
        for &(code, label, repeats) in &cells {
            reg.insert(code, RegistryCell { label, repeats });
        }
        let codes: Vec<u64> = reg.iter().map(|(c, _)| c).collect();
        let mut acts: Vec<u64> = picks.iter().map(|i| codes[i.index(codes.len())]).collect();
        let policy = TrainingPolicy::default();
        let before = classify(&reg, &acts, &policy);
        let code = codes[extra.index(codes.len())];
        acts.push(code);
        let after = classify(&reg, &acts, &policy);
        let label = reg.get(code).unwrap().label.index();
        for d in 0..N_DIRECTIONS {
            if d == label {
                prop_assert!(after.scores.0[d] >= before.scores.0[d]);
            } else {
                prop_assert_eq!(after.scores.0[d], before.scores.0[d]);
            }
        }
    }

    #[test]
    fn activation_order_is_irrelevant(
        cells in proptest::collection::vec((any::<u64>(), dir(), 1u64..50), 1..30),
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..40),
        distinct: bool,
    ) {
        let mut reg = PolycodeRegistry::new();
        for &(code, label, repeats) in &cells {
            reg.insert(code, RegistryCell { label, repeats });
        }
        let codes: Vec<u64> = reg.iter().map(|(c, _)| c).collect();
        let acts: Vec<u64> = picks.iter().map(|i| codes[i.index(codes.len())]).collect();
        let mut rev = acts.clone();
        rev.reverse();
        let policy = TrainingPolicy { distinct_codes_only: distinct, ..Default::default() };
        let (a, b) = (classify(&reg, &acts, &policy), classify(&reg, &rev, &policy));
        for d in 0..N_DIRECTIONS {
            prop_assert!((a.scores.0[d] - b.scores.0[d]).abs() < 1e-9);
        }
    }

    #[test]
    fn registry_round_trips(cells in proptest::collection::vec((any::<u32>(), dir(), 1u64..1000), 0..50)) {
        let w = CodeWidth::W32;
        let mut reg = PolycodeRegistry::new();
        for &(code, label, repeats) in &cells {
            reg.insert(u64::from(code), RegistryCell { label, repeats });
        }
        let mut bin = Vec::new();
        reg.write_binary(w, &mut bin).unwrap();
        let (w2, back) = PolycodeRegistry::read_binary(bin.as_slice()).unwrap();
        prop_assert_eq!(w2, w);
        prop_assert_eq!(&back, &reg);
        let mut text = Vec::new();
        reg.write_csv(w, &mut text).unwrap();
        prop_assert_eq!(PolycodeRegistry::read_csv(w, text.as_slice()).unwrap(), reg);
    }
}
