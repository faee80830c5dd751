//! Output-value mutation: up to N distinct mutants per test, one scheme per
//! type, with seeded cross-platform determinism.
//!
//! Schemes: booleans flip; integers add or subtract a random value in
//! [1, 10]; strings replace one character or append one (printable ASCII);
//! arrays/sequences drop an element or insert a random value in [-10, 10]
//! at a random index.
//!
//! The generator is pinned rather than taken from a library so mutant
//! streams are byte-identical across platforms and releases: a splitmix64
//! stream whose state is keyed by FNV-1a over (seed, task id, test id,
//! attempt). No other source of randomness is used anywhere.

use crate::value::{tuples_equal, ConcreteValue, Comparator, ValueError};
use num_bigint::BigInt;
use std::fmt;
use thiserror::Error;

/// Deterministic 64-bit mixing generator (splitmix64 recurrence).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(key: u64) -> Self {
        SplitMix64 { state: key }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw in [0, n); n must be positive.
    pub fn next_below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// FNV-1a over the mutation key components, finalized through one splitmix
/// step; this is the documented key derivation for mutant streams.
pub fn mutation_key(seed: u64, task_id: &str, test_id: &str, attempt: u64) -> u64 {
    const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
    const FNV_PRIME: u64 = 0x1000_0000_01B3;
    let mut h = FNV_OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    eat(&seed.to_le_bytes());
    eat(task_id.as_bytes());
    eat(&[0xFF]);
    eat(test_id.as_bytes());
    eat(&[0xFE]);
    eat(&attempt.to_le_bytes());
    SplitMix64::new(h).next_u64()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutationDescriptor {
    BoolFlip,
    IntDelta(i64),
    StrReplace { index: usize, ch: char },
    StrAppend(char),
    ArrDrop(usize),
    ArrInsert { index: usize, value: BigInt },
    Curated,
}

impl fmt::Display for MutationDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationDescriptor::BoolFlip => write!(f, "bool_flip"),
            MutationDescriptor::IntDelta(d) => write!(f, "int_delta({d:+})"),
            MutationDescriptor::StrReplace { index, ch } => {
                write!(f, "str_replace[{index}]={ch:?}")
            }
            MutationDescriptor::StrAppend(ch) => write!(f, "str_append({ch:?})"),
            MutationDescriptor::ArrDrop(i) => write!(f, "arr_drop[{i}]"),
            MutationDescriptor::ArrInsert { index, value } => {
                write!(f, "arr_insert[{index}]={value}")
            }
            MutationDescriptor::Curated => write!(f, "curated"),
        }
    }
}

/// A mutated (i, o') pair: the parent test's inputs with one perturbed
/// output tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutantCase {
    pub id: String,
    pub parent_test_id: String,
    pub mutated_expected: Vec<ConcreteValue>,
    pub descriptor: MutationDescriptor,
    /// Which output component was mutated (round-robin for multi-output).
    pub output_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutationConfig {
    pub mutants_per_test: usize,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            mutants_per_test: 5,
            seed: 0,
            max_attempts: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("curated mutant {0} equals the expected output under the test comparator")]
    EqualToExpected(String),
    #[error("curated mutant arity {got} does not match {want} output(s)")]
    ArityMismatch { got: usize, want: usize },
    #[error("curated mutant type mismatch: {0}")]
    TypeMismatch(#[from] ValueError),
}

/// Replacement characters come from the 95 printable ASCII values.
fn printable_ascii(rng: &mut SplitMix64) -> char {
    (0x20u8 + rng.next_below(95) as u8) as char
}

/// Produces one mutant of a single value. The result always has the same
/// type and differs from the input under exact comparison.
pub fn mutate_value(v: &ConcreteValue, rng: &mut SplitMix64) -> (ConcreteValue, MutationDescriptor) {
    match v {
        ConcreteValue::Bool(b) => (ConcreteValue::Bool(!b), MutationDescriptor::BoolFlip),
        ConcreteValue::Int(n) => {
            let amount = 1 + rng.next_below(10) as i64;
            let delta = if rng.next_bool() { amount } else { -amount };
            (
                ConcreteValue::Int(n + BigInt::from(delta)),
                MutationDescriptor::IntDelta(delta),
            )
        }
        ConcreteValue::Str(s) => {
            let n_chars = s.chars().count();
            let replace = n_chars > 0 && rng.next_bool();
            if replace {
                let index = rng.next_below(n_chars as u64) as usize;
                let current = s.chars().nth(index).unwrap();
                let mut ch = printable_ascii(rng);
                let mut redraws = 0;
                while ch == current && redraws < 8 {
                    ch = printable_ascii(rng);
                    redraws += 1;
                }
                if ch == current {
                    // exhausted redraws; appending always changes the value
                    let ch = printable_ascii(rng);
                    let mut out = s.clone();
                    out.push(ch);
                    return (ConcreteValue::Str(out), MutationDescriptor::StrAppend(ch));
                }
                let out: String = s
                    .chars()
                    .enumerate()
                    .map(|(i, c)| if i == index { ch } else { c })
                    .collect();
                (
                    ConcreteValue::Str(out),
                    MutationDescriptor::StrReplace { index, ch },
                )
            } else {
                let ch = printable_ascii(rng);
                let mut out = s.clone();
                out.push(ch);
                (ConcreteValue::Str(out), MutationDescriptor::StrAppend(ch))
            }
        }
        ConcreteValue::ArrayInt(xs) | ConcreteValue::SeqInt(xs) => {
            let drop = !xs.is_empty() && rng.next_bool();
            let (out, descriptor) = if drop {
                let index = rng.next_below(xs.len() as u64) as usize;
                let mut out = xs.clone();
                out.remove(index);
                (out, MutationDescriptor::ArrDrop(index))
            } else {
                let index = rng.next_below(xs.len() as u64 + 1) as usize;
                let value = BigInt::from(rng.next_below(21) as i64 - 10);
                let mut out = xs.clone();
                out.insert(index, value.clone());
                (out, MutationDescriptor::ArrInsert { index, value })
            };
            let value = match v {
                ConcreteValue::ArrayInt(_) => ConcreteValue::ArrayInt(out),
                _ => ConcreteValue::SeqInt(out),
            };
            (value, descriptor)
        }
    }
}

/// Test shape the mutation engine needs (id, expected outputs, comparator).
pub trait MutationTarget {
    fn test_id(&self) -> &str;
    fn expected(&self) -> &[ConcreteValue];
    fn comparator(&self) -> Comparator;
}

/// Generates up to `cfg.mutants_per_test` pairwise-distinct mutants,
/// distinct from the expected output under the test's comparator.
/// Deterministic for a given (seed, task id, test id); a shortfall (e.g. a
/// boolean output admits exactly one mutant) shrinks the set rather than
/// padding it.
pub fn generate_mutants<T: MutationTarget>(
    task_id: &str,
    test: &T,
    cfg: &MutationConfig,
) -> Vec<MutantCase> {
    let expected = test.expected();
    let n_outputs = expected.len();
    let cmp = test.comparator();
    let mut accepted: Vec<MutantCase> = Vec::new();
    for attempt in 0..cfg.max_attempts {
        if accepted.len() >= cfg.mutants_per_test {
            break;
        }
        let target = accepted.len() % n_outputs;
        let key = mutation_key(cfg.seed, task_id, test.test_id(), attempt as u64);
        let mut rng = SplitMix64::new(key);
        let (mutated, descriptor) = mutate_value(&expected[target], &mut rng);
        let mut tuple = expected.to_vec();
        tuple[target] = mutated;
        if tuples_equal(&tuple, expected, cmp) {
            continue;
        }
        if accepted
            .iter()
            .any(|m| tuples_equal(&m.mutated_expected, &tuple, cmp))
        {
            continue;
        }
        accepted.push(MutantCase {
            id: format!("{}__m{}", test.test_id(), accepted.len()),
            parent_test_id: test.test_id().to_string(),
            mutated_expected: tuple,
            descriptor,
            output_index: target,
        });
    }
    accepted
}

/// Wraps explicitly supplied mutant output tuples (reproducible fixed sets).
/// Each tuple must differ from the expected output under the comparator.
/// Descriptors are inferred for single-output drop/insert shapes and tagged
/// curated otherwise.
pub fn curated_mutants<T: MutationTarget>(
    test: &T,
    values: &[Vec<ConcreteValue>],
) -> Result<Vec<MutantCase>, MutationError> {
    let expected = test.expected();
    let cmp = test.comparator();
    let mut out = Vec::with_capacity(values.len());
    for (k, tuple) in values.iter().enumerate() {
        if tuple.len() != expected.len() {
            return Err(MutationError::ArityMismatch {
                got: tuple.len(),
                want: expected.len(),
            });
        }
        for (v, e) in tuple.iter().zip(expected) {
            if v.value_type() != e.value_type() {
                return Err(MutationError::TypeMismatch(ValueError::TypeMismatch {
                    left: v.value_type(),
                    right: e.value_type(),
                }));
            }
        }
        if tuples_equal(tuple, expected, cmp) {
            return Err(MutationError::EqualToExpected(
                tuple
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            ));
        }
        let descriptor = infer_descriptor(expected, tuple);
        out.push(MutantCase {
            id: format!("{}__c{k}", test.test_id()),
            parent_test_id: test.test_id().to_string(),
            mutated_expected: tuple.clone(),
            descriptor,
            output_index: 0,
        });
    }
    Ok(out)
}

fn infer_descriptor(expected: &[ConcreteValue], tuple: &[ConcreteValue]) -> MutationDescriptor {
    if expected.len() != 1 {
        return MutationDescriptor::Curated;
    }
    let (Some(exp), Some(got)) = (expected[0].as_collection(), tuple[0].as_collection()) else {
        return MutationDescriptor::Curated;
    };
    if got.len() + 1 == exp.len() {
        for i in 0..exp.len() {
            let mut dropped = exp.to_vec();
            dropped.remove(i);
            if dropped == got {
                return MutationDescriptor::ArrDrop(i);
            }
        }
    }
    if got.len() == exp.len() + 1 {
        for i in 0..got.len() {
            let mut inserted = got.to_vec();
            let value = inserted.remove(i);
            if inserted == exp {
                return MutationDescriptor::ArrInsert { index: i, value };
            }
        }
    }
    MutationDescriptor::Curated
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Target {
        id: String,
        expected: Vec<ConcreteValue>,
        cmp: Comparator,
    }

    impl MutationTarget for Target {
        fn test_id(&self) -> &str {
            &self.id
        }
        fn expected(&self) -> &[ConcreteValue] {
            &self.expected
        }
        fn comparator(&self) -> Comparator {
            self.cmp
        }
    }

    fn target(expected: ConcreteValue, cmp: Comparator) -> Target {
        Target {
            id: "test_1".into(),
            expected: vec![expected],
            cmp,
        }
    }

    #[test]
    fn bool_admits_exactly_one_mutant() {
        let t = target(ConcreteValue::Bool(true), Comparator::Exact);
        let ms = generate_mutants("t", &t, &MutationConfig::default());
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].mutated_expected, vec![ConcreteValue::Bool(false)]);
        assert_eq!(ms[0].descriptor, MutationDescriptor::BoolFlip);
    }

    #[test]
    fn int_mutants_stay_within_delta_bound() {
        let t = target(ConcreteValue::int(125), Comparator::Exact);
        let ms = generate_mutants("t", &t, &MutationConfig::default());
        assert_eq!(ms.len(), 5);
        for m in &ms {
            let ConcreteValue::Int(v) = &m.mutated_expected[0] else {
                panic!("type changed")
            };
            let delta = (v - BigInt::from(125)).magnitude().clone();
            assert!(delta >= 1u32.into() && delta <= 10u32.into(), "delta {delta}");
        }
    }

    #[test]
    fn task2_style_mutants_are_distinct_and_differ_from_expected() {
        let t = target(ConcreteValue::seq_of(&[4, 5]), Comparator::Exact);
        let ms = generate_mutants("2", &t, &MutationConfig::default());
        assert_eq!(ms.len(), 5);
        for (i, m) in ms.iter().enumerate() {
            assert_ne!(m.mutated_expected[0], ConcreteValue::seq_of(&[4, 5]));
            let n = m.mutated_expected[0].as_collection().unwrap().len();
            assert!(n == 1 || n == 3, "length changed by one, got {n}");
            for other in &ms[i + 1..] {
                assert_ne!(m.mutated_expected, other.mutated_expected);
            }
        }
    }

    #[test]
    fn multiset_comparator_blocks_permutation_mutants() {
        let t = target(ConcreteValue::seq_of(&[4, 5]), Comparator::Multiset);
        let ms = generate_mutants("2", &t, &MutationConfig::default());
        for m in &ms {
            assert!(!tuples_equal(
                &m.mutated_expected,
                &[ConcreteValue::seq_of(&[5, 4])],
                Comparator::Multiset
            ));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let t = target(ConcreteValue::seq_of(&[1, 2, 3]), Comparator::Exact);
        let cfg = MutationConfig::default();
        let a = generate_mutants("task", &t, &cfg);
        let b = generate_mutants("task", &t, &cfg);
        assert_eq!(a, b);
        let other_seed = MutationConfig {
            seed: 1,
            ..MutationConfig::default()
        };
        let c = generate_mutants("task", &t, &other_seed);
        assert_ne!(a, c, "different seed should give a different stream");
    }

    #[test]
    fn empty_collection_only_inserts() {
        let t = target(ConcreteValue::SeqInt(vec![]), Comparator::Exact);
        let ms = generate_mutants("t", &t, &MutationConfig::default());
        assert!(!ms.is_empty());
        for m in &ms {
            assert_eq!(m.mutated_expected[0].as_collection().unwrap().len(), 1);
            assert!(matches!(
                m.descriptor,
                MutationDescriptor::ArrInsert { index: 0, .. }
            ));
        }
    }

    #[test]
    fn string_mutants_change_length_by_zero_or_one() {
        let t = target(ConcreteValue::Str("abc".into()), Comparator::Exact);
        let ms = generate_mutants("t", &t, &MutationConfig::default());
        assert_eq!(ms.len(), 5);
        for m in &ms {
            let ConcreteValue::Str(s) = &m.mutated_expected[0] else {
                panic!("type changed")
            };
            assert!(s.len() == 3 || s.len() == 4);
            assert_ne!(s, "abc");
        }
    }

    #[test]
    fn curated_wraps_and_infers_descriptors() {
        let t = target(ConcreteValue::seq_of(&[4, 5]), Comparator::Exact);
        let values = vec![
            vec![ConcreteValue::seq_of(&[4])],
            vec![ConcreteValue::seq_of(&[5])],
            vec![ConcreteValue::seq_of(&[4, 5, 7])],
            vec![ConcreteValue::seq_of(&[4, 4])],
            vec![ConcreteValue::seq_of(&[9])],
        ];
        let ms = curated_mutants(&t, &values).unwrap();
        assert_eq!(ms.len(), 5);
        assert_eq!(ms[0].descriptor, MutationDescriptor::ArrDrop(1));
        assert_eq!(ms[1].descriptor, MutationDescriptor::ArrDrop(0));
        assert!(matches!(
            ms[2].descriptor,
            MutationDescriptor::ArrInsert { index: 2, .. }
        ));
        assert_eq!(ms[3].descriptor, MutationDescriptor::Curated);
        assert_eq!(ms[4].descriptor, MutationDescriptor::Curated);
    }

    #[test]
    fn curated_rejects_value_equal_to_expected() {
        let t = target(ConcreteValue::seq_of(&[4, 5]), Comparator::Exact);
        let err = curated_mutants(&t, &[vec![ConcreteValue::seq_of(&[4, 5])]]).unwrap_err();
        assert!(matches!(err, MutationError::EqualToExpected(_)));
        // under a multiset comparator a permutation is equal too
        let t = target(ConcreteValue::seq_of(&[4, 5]), Comparator::Multiset);
        let err = curated_mutants(&t, &[vec![ConcreteValue::seq_of(&[5, 4])]]).unwrap_err();
        assert!(matches!(err, MutationError::EqualToExpected(_)));
    }

    #[test]
    fn curated_bool_flip() {
        let t = target(ConcreteValue::Bool(true), Comparator::Exact);
        let ms = curated_mutants(&t, &[vec![ConcreteValue::Bool(false)]]).unwrap();
        assert_eq!(ms.len(), 1);
    }
}
