use degen_universal_web::{bounds_json, embed_json, params_json};
use serde_json::Value;

#[test]
fn params_report_levels() {
    let v: Value = serde_json::from_str(&params_json(1_000_000, 2, 0.0, -1.0).unwrap()).unwrap();
    assert_eq!(v["params"]["levels"], 3);
    assert!(params_json(8, 2, 0.0, -1.0).is_err());
}

#[test]
fn bounds_rows_are_log_spaced() {
    let v: Value = serde_json::from_str(&bounds_json(2, 10_000, 100_000_000, 5).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2]["n"], 1_000_000);
}

#[test]
fn demo_embedding_verifies() {
    let text = embed_json(2000, 2, 4.0, 0.6, "bounded_degree", 300, 2, 1).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["success"], v["verified"]);
    assert_eq!(v["guest_vertices"], 300);
    assert!(embed_json(2000, 2, 4.0, 0.6, "nope", 10, 2, 1).is_err());
    // default constants give a host far too large for the page
    assert!(embed_json(2000, 2, 0.0, -1.0, "star", 10, 1, 1).is_err());
}
