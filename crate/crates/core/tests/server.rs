use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::mpsc;

use chrono::NaiveDate;
use rednet::console::{serve, ConsoleApi};
use rednet::drift::DriftReport;
use rednet::output::{load_scored, read_json};
use rednet::pipeline::{run_pipeline, RunConfig};
use rednet::synth::SyntheticConfig;
use serde_json::Value;

fn request(addr: SocketAddr, method: &str, path: &str, body: Option<&str>) -> (u16, Value) {
    let mut s = TcpStream::connect(addr).unwrap();
    let body = body.unwrap_or("");
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).unwrap();
    let status: u16 = raw[9..12].parse().unwrap();
    let (_, payload) = raw.split_once("\r\n\r\n").unwrap();
    (status, serde_json::from_str(payload).unwrap_or(Value::Null))
}

#[test]
fn console_api_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: tmp.path().to_path_buf(),
        synthetic: SyntheticConfig {
            start: NaiveDate::from_ymd_opt(2022, 1, 1).unwrap(),
            ..SyntheticConfig::default()
        },
        k: 3,
        ..RunConfig::default()
    };
    run_pipeline(&cfg).unwrap();
    let api = ConsoleApi::load(tmp.path()).unwrap();

    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(serve(api, "127.0.0.1:0".parse().unwrap(), move |a| {
            tx.send(a).unwrap()
        }))
        .unwrap();
    });
    let addr = rx.recv().unwrap();

    let (st, plants) = request(addr, "GET", "/api/plants", None);
    assert_eq!(st, 200);
    assert_eq!(plants, serde_json::json!(["A", "B", "C", "D"]));

    let (st, series) = request(
        addr,
        "GET",
        "/api/risk?plant=A&from=2025-01-01&to=2025-12-31",
        None,
    );
    assert_eq!(st, 200);
    let expected: Vec<_> = load_scored(tmp.path().join("ops.csv"))
        .unwrap()
        .into_iter()
        .filter(|r| r.plant_id == "A" && r.timestamp.to_string().starts_with("2025"))
        .collect();
    let series = series.as_array().unwrap();
    assert_eq!(series.len(), expected.len());
    for (p, r) in series.iter().zip(&expected) {
        assert_eq!(p["t"], r.timestamp.to_string());
        assert_eq!(p["ops_risk"].as_f64(), r.ops_risk);
        assert_eq!(p["hab_prob"].as_f64(), r.hab_prob);
    }

    let (_, t) = request(addr, "GET", "/api/thresholds", None);
    let body = format!(
        r#"{{"tau_watch":{},"tau_action":{}}}"#,
        t["tau_watch"], t["tau_action"]
    );
    let (st, whatif) = request(addr, "POST", "/api/whatif", Some(&body));
    assert_eq!(st, 200);
    let drift: DriftReport = read_json(tmp.path().join("drift.json")).unwrap();
    assert_eq!(
        whatif["monthly_alert_rates"],
        serde_json::to_value(&drift.monthly_alert_rates).unwrap()
    );

    let (st, _) = request(
        addr,
        "POST",
        "/api/whatif",
        Some(r#"{"tau_watch":0.6,"tau_action":0.61}"#),
    );
    assert_eq!(st, 422);
    let (st, _) = request(addr, "POST", "/api/whatif", Some("not json"));
    assert!((400..500).contains(&st));

    let (st, d) = request(addr, "GET", "/api/drift?plant=B", None);
    assert_eq!(st, 200);
    assert!(d["shift"]["psi"].as_f64().unwrap() >= 0.0);
    let (st, _) = request(addr, "GET", "/api/drift?plant=Q", None);
    assert_eq!(st, 404);

    let (st, top) = request(addr, "GET", "/api/topk?plant=C&k=3", None);
    assert_eq!(st, 200);
    let top = top.as_array().unwrap();
    assert_eq!(top.len(), 3);
    assert!(top
        .windows(2)
        .all(|w| w[0]["ops_risk"].as_f64() >= w[1]["ops_risk"].as_f64()));

    let (st, ranges) = request(addr, "GET", "/api/ranges", None);
    assert_eq!(st, 200);
    assert!(ranges.get("sst").is_some());
}
