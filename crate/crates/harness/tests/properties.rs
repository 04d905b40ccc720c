use std::fs;

use lgt_harness::bundle::{verify, Bundle};
use lgt_harness::catalog::CATALOG;
use lgt_harness::config::{ExperimentConfig, Grid, Resolved};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The echoed config resolves to the same run, for any valid grid.
    #[test]
    fn config_echo_is_a_fixed_point(
        idx in 0..CATALOG.len(),
        seed in any::<u64>(),
        h in prop::collection::btree_set(0u32..40, 1..5),
        lx in 2usize..5,
        ly in 2usize..5,
    ) {
        let mut c = ExperimentConfig::new(CATALOG[idx].name, seed);
        c.h_e = Some(Grid::Many(h.iter().map(|&x| f64::from(x) * 0.1).collect()));
        if !CATALOG[idx].defaults.string_lattice {
            c.lattice = Some(serde_json::from_value(serde_json::json!({"lx": lx, "ly": ly})).unwrap());
        }
        let r = Resolved::new(&c).unwrap();
        let echo = r.to_config();
        let text = serde_json::to_string(&echo).unwrap();
        let again = Resolved::new(&ExperimentConfig::from_json(&text).unwrap()).unwrap();
        prop_assert_eq!(again.to_config(), echo);
        prop_assert_eq!(again.h_e, r.h_e);
        prop_assert_eq!(again.seed, seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any single-byte edit to a data row is caught and located.
    #[test]
    fn any_data_edit_is_detected(pick in any::<prop::sample::Index>(), byte in b'0'..=b'9') {
        let tmp = tempfile::tempdir().unwrap();
        let c = ExperimentConfig::from_json(r#"{"scenario": "fig2_energy", "seed": 1, "lattice": {"lx": 2, "ly": 2}, "h_e": [0.5]}"#).unwrap();
        let m = lgt_harness::run(&Resolved::new(&c).unwrap(), tmp.path(), Some(1)).unwrap();
        let t = &m.tables[0];
        let path = tmp.path().join(&t.file);
        let mut bytes = fs::read(&path).unwrap();
        let header_end = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
        let body: Vec<usize> = (header_end..bytes.len()).filter(|&i| bytes[i].is_ascii_digit()).collect();
        let i = body[pick.index(body.len())];
        prop_assume!(bytes[i] != byte);
        bytes[i] = byte;
        fs::write(&path, &bytes).unwrap();
        let row = bytes[header_end..i].iter().filter(|&&b| b == b'\n').count() + 1;
        let problems = verify(tmp.path(), &Bundle::load(tmp.path()).unwrap().manifest).unwrap();
        prop_assert_eq!(problems.len(), 1);
        let expected = format!("data row {row} ");
        prop_assert!(problems[0].contains(&expected), "{}", problems[0]);
    }
}
