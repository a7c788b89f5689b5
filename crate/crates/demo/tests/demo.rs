use bizrec_demo::{alpha_curve, evaluate_json, DemoSession};
use serde_json::Value;

#[test]
fn alpha_curve_falls_to_the_floor() {
    let curve = alpha_curve(0.3, 14.0, 30);
    assert_eq!(curve.len(), 31);
    assert_eq!(curve[0], 1.0);
    assert!((curve[7] - 0.65).abs() < 1e-12);
    assert!(curve[14..].iter().all(|&a| (a - 0.3).abs() < 1e-12));
    assert!(curve.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn session_reranks_after_selection() {
    let mut session = DemoSession::create(30, 1).unwrap();
    let profiles: Vec<Value> = serde_json::from_str(&session.profiles()).unwrap();
    assert_eq!(profiles.len(), 30);
    session.choose_profile(3).unwrap();

    let first: Value = serde_json::from_str(&session.page_json(10).unwrap()).unwrap();
    assert_eq!(first["verbosity"], 0);
    assert_eq!(first["alpha"], 1.0);
    let top = first["items"][0]["element"].as_str().unwrap().to_string();

    assert!(session.select_element(&top).unwrap());
    assert!(!session.select_element(&top).unwrap());
    let next: Value = serde_json::from_str(&session.page_json(50).unwrap()).unwrap();
    assert_eq!(next["verbosity"], 1);
    assert!(next["alpha"].as_f64().unwrap() < 1.0);
    assert_eq!(next["selection"], serde_json::json!([top]));
    assert!(next["items"].as_array().unwrap().iter().all(|i| i["element"] != top.as_str()));
    assert!(session.select_element("no such element").is_err());
}

#[test]
fn small_evaluation_reports_every_level() {
    let report: Value = serde_json::from_str(&evaluate_json(12, 4, &[0, 5]).unwrap()).unwrap();
    assert_eq!(report["engines"], serde_json::json!(["cbr:2", "graph", "hybrid:0.3"]));
    let map = report["map"].as_array().unwrap();
    assert_eq!(map.len(), 2);
    assert!(map.iter().flat_map(|row| row.as_array().unwrap()).all(|v| v.as_f64().is_some_and(|x| (0.0..=1.0).contains(&x))));
}
