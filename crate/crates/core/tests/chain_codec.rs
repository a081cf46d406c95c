mod common;

use innet::chain::{header_len, ChainHeader};
use innet::ensemble::{Classifier, MALICIOUS};
use innet::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Deserialize)]
struct Vectors {
    valid: Vec<Valid>,
    invalid: Vec<Invalid>,
}

#[derive(Deserialize)]
struct Valid {
    n: usize,
    ids: Vec<u16>,
    outputs: Vec<u8>,
    mask: Vec<u8>,
    hex: String,
}

#[derive(Deserialize)]
struct Invalid {
    n: usize,
    hex: String,
}

fn unhex(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

fn bools(v: &[u8]) -> Vec<bool> {
    v.iter().map(|&b| b == 1).collect()
}

#[test]
fn conformance_vectors() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/testdata/chain_header_vectors.json"
    ))
    .unwrap();
    let v: Vectors = serde_json::from_str(&text).unwrap();
    for case in &v.valid {
        let h = ChainHeader::from_parts(case.ids.clone(), bools(&case.outputs), bools(&case.mask)).unwrap();
        let bytes = unhex(&case.hex);
        assert_eq!(h.encode().unwrap(), bytes, "n={} hex={}", case.n, case.hex);
        assert_eq!(ChainHeader::decode(&bytes, case.n).unwrap(), h);
        assert_eq!(
            common::pack_bits(case.n, &case.ids, &bools(&case.outputs), &bools(&case.mask)),
            bytes
        );
    }
    for case in &v.invalid {
        assert!(
            ChainHeader::decode(&unhex(&case.hex), case.n).is_err(),
            "n={} hex={}",
            case.n,
            case.hex
        );
    }
}

#[test]
fn finalize_requires_every_slot() {
    let h = ChainHeader::empty(3).unwrap().append_result(1, MALICIOUS).unwrap();
    match h.finalize() {
        Err(Error::IncompleteChain(missing)) => assert_eq!(missing, vec![0, 2]),
        other => panic!("{other:?}"),
    }
    assert!(matches!(h.append_result(1, 0), Err(Error::DuplicateResult(1))));
}

fn header(n: usize) -> impl Strategy<Value = (usize, Vec<u16>, Vec<bool>, Vec<bool>)> {
    let width = if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    };
    let max_id = (1u32 << width) as u16;
    (
        prop::collection::vec(0..max_id, n),
        prop::collection::vec(any::<bool>(), n),
        prop::collection::vec(any::<bool>(), n),
    )
        .prop_map(move |(i, o, m)| (n, i, o, m))
}

proptest! {
    #[test]
    fn encode_matches_string_packer((n, ids, outputs, mask) in (1usize..=16).prop_flat_map(header)) {
        let h = ChainHeader::from_parts(ids.clone(), outputs.clone(), mask.clone()).unwrap();
        let bytes = h.encode().unwrap();
        prop_assert_eq!(bytes.len(), header_len(n));
        prop_assert_eq!(&bytes, &common::pack_bits(n, &ids, &outputs, &mask));
        prop_assert_eq!(ChainHeader::decode(&bytes, n).unwrap(), h);
    }

    #[test]
    fn chain_agrees_with_majority(seed in any::<u64>(), n in prop::sample::select(vec![1usize, 2, 3, 4, 5])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sl = common::random_ensemble(&mut rng, n, 72, 5);
        let x: Vec<f64> = (0..72).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let mut order: Vec<u16> = (0..n as u16).collect();
        order.shuffle(&mut rng);
        let mut bytes = ChainHeader::empty(n).unwrap().encode().unwrap();
        for id in order {
            let h = ChainHeader::decode(&bytes, n).unwrap();
            let vote = sl.learner(id).unwrap().vote(&x).unwrap();
            bytes = h.append_result(id, vote).unwrap().encode().unwrap();
        }
        let verdict = ChainHeader::decode(&bytes, n).unwrap().finalize().unwrap();
        prop_assert_eq!(verdict.class, sl.predict(&x).unwrap());
    }
}
