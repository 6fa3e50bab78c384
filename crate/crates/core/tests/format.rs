mod common;

use cabs_core::fixtures;
use cabs_core::format::{AbstractionFile, FormatError, ModelFile};
use cabs_core::graph::NodeSet;
use cabs_core::random::{random_dag, random_instance, random_model, ModelShape};
use proptest::prelude::*;

#[test]
fn fixtures_round_trip() {
    for m in [
        fixtures::ab_model(),
        fixtures::confounded_model(),
        fixtures::voting().low,
    ] {
        let text = ModelFile::from_model(&m).to_json();
        let back = ModelFile::parse(&text).unwrap().to_model().unwrap();
        assert_eq!(back, m);
    }
    let v = fixtures::voting();
    let file = AbstractionFile::from_parts(&v.cluster_map, &v.tau, v.epsilon.as_ref()).unwrap();
    let back = AbstractionFile::parse(&file.to_json())
        .unwrap()
        .resolve(Some(&v.low), Some(&v.high))
        .unwrap();
    assert_eq!(back.cluster_map, v.cluster_map);
    assert_eq!(back.tau, v.tau);
    assert_eq!(back.epsilon, v.epsilon);
}

#[test]
fn parents_out_of_order_rejected() {
    let text = r#"{"format_version": 1,
        "nodes": [{"name": "A", "values": ["0","1"]}, {"name": "B", "values": ["0","1"]}, {"name": "C", "values": ["0"]}],
        "edges": [["A", "C"], ["B", "C"]],
        "kernels": [{"node": "A", "parents": [], "rows": [[0.5, 0.5]]},
                    {"node": "B", "parents": [], "rows": [[0.5, 0.5]]},
                    {"node": "C", "parents": ["B", "A"], "rows": [[1], [1], [1], [1]]}]}"#;
    match ModelFile::parse(text).unwrap().to_model().unwrap_err() {
        FormatError::Invalid { path, message } => {
            assert_eq!(path, "kernels[2].parents");
            assert!(message.contains("shape mismatch"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_field_located() {
    let err = ModelFile::parse("{\"format_version\": 1, \"nodes\": [], \"colour\": 1}").unwrap_err();
    assert!(matches!(err, FormatError::Syntax { line: 1, .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn models_round_trip(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = common::rng(seed);
        let g = random_dag(&mut rng, n, 0.4);
        let m = random_model(&mut rng, &g, &NodeSet::new(), ModelShape { max_domain: 3, zero_prob: 0.2 });
        let text = ModelFile::from_model(&m).to_json();
        let parsed = ModelFile::parse(&text).unwrap();
        prop_assert_eq!(parsed.to_json(), text.clone());
        prop_assert_eq!(parsed.to_model().unwrap(), m);
    }

    #[test]
    fn abstractions_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = random_instance(&mut rng, 5, ModelShape::default(), false);
        let file = AbstractionFile::from_parts(&inst.cm, &inst.tau, None).unwrap();
        let text = file.to_json();
        let parsed = AbstractionFile::parse(&text).unwrap();
        prop_assert_eq!(parsed.to_json(), text);
        let back = parsed.resolve(Some(&inst.low), Some(&inst.high)).unwrap();
        prop_assert_eq!(&back.cluster_map, inst.cm.map());
        prop_assert_eq!(back.tau, inst.tau);
    }
}
