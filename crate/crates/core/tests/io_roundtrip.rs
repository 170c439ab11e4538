//! Save/load fidelity of every on-disk format over arbitrary floats.

use proptest::prelude::*;
use rise_core::cross_model::SpaceMap;
use rise_core::io::{
    binary, load_pairs, load_prototype, load_space_map, save_pairs, save_prototype, save_space_map, sha256_file,
};
use rise_core::{NormPolicy, Pair, Prototype, PrototypeMeta, RotorBackend, UnitVector};

/// Finite values across many binades, subnormals included.
fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1.0f64..1.0,
        (-300i32..3).prop_flat_map(|e| (-1.0f64..1.0).prop_map(move |m| m * 10f64.powi(e))),
        Just(f64::MIN_POSITIVE / 8.0),
        Just(-0.0),
    ]
}

fn unit(dim: usize) -> impl Strategy<Value = UnitVector> {
    prop::collection::vec(coord(), dim).prop_filter_map("zero vector", |v| {
        let mut v = v;
        v[0] += 0.5;
        UnitVector::new(&v).ok()
    })
}

fn pairs() -> impl Strategy<Value = Vec<Pair>> {
    (2usize..12).prop_flat_map(|d| {
        prop::collection::vec((unit(d), unit(d), "[a-z]{1,6}"), 0..6).prop_map(|items| {
            items
                .into_iter()
                .enumerate()
                .filter_map(|(i, (n, v, lang))| Pair::new(format!("p{i}"), lang, "neg\"ation\n", n, v).ok())
                .collect()
        })
    })
}

fn prototype() -> impl Strategy<Value = Prototype> {
    (prop::collection::vec(coord(), 1..16), 1usize..5000, 0usize..3).prop_filter_map(
        "not a valid prototype",
        |(tail, count, b)| {
            let mut vec = vec![0.0];
            vec.extend(tail);
            let meta = PrototypeMeta {
                phenomenon: "politeness".into(),
                language: "ja".into(),
                model_id: "m/ü".into(),
                source_magnitude: Some(vec.iter().map(|x| x * x).sum::<f64>().sqrt()),
                ..PrototypeMeta::default()
            };
            Prototype::new(vec, count, RotorBackend::ALL[b], meta).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_sets_round_trip(set in pairs()) {
        let dir = tempfile::tempdir().unwrap();
        let jsonl = dir.path().join("p.jsonl");
        save_pairs(&jsonl, &set).unwrap();
        let before = sha256_file(&jsonl).unwrap();
        let loaded = load_pairs(&jsonl, NormPolicy::Strict).unwrap();
        prop_assert_eq!(&loaded.pairs, &set);
        prop_assert!(loaded.diagnostics.is_empty());
        // Loading never touches the file.
        prop_assert_eq!(sha256_file(&jsonl).unwrap(), before);

        let bytes = binary::encode_pairs(&set).unwrap();
        prop_assert_eq!(binary::decode_pairs(&bytes).unwrap(), set);
    }

    #[test]
    fn prototypes_round_trip(p in prototype()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("proto.json");
        save_prototype(&path, &p).unwrap();
        let back = load_prototype(&path).unwrap();
        prop_assert!(back.as_slice().iter().zip(p.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back, p);
    }

    #[test]
    fn space_maps_round_trip(
        (d_src, d_tgt, matrix) in (2usize..6, 2usize..6).prop_flat_map(|(s, t)| {
            (Just(s), Just(t), prop::collection::vec(coord(), s * t))
        }),
        ridge in 0.0f64..1.0,
    ) {
        let map = SpaceMap {
            d_src,
            d_tgt,
            matrix,
            source_model_id: "a".into(),
            target_model_id: "b".into(),
            n_anchors: 17,
            pca_rank: Some(2),
            ridge,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.json");
        save_space_map(&path, &map).unwrap();
        prop_assert_eq!(load_space_map(&path).unwrap(), map);
    }
}
