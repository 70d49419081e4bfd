mod common;

use std::sync::Arc;

use mixaug_core::humaneval::{build_session, router, Session, SessionStore};
use mixaug_core::Provenance;
use serde_json::{json, Value};

struct Fixture {
    base: String,
    session: Session,
    _dir: tempfile::TempDir,
}

fn fixture(static_dir: Option<std::path::PathBuf>) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let session = build_session(
        "es-en-pilot",
        &common::pool("nat", 20, Provenance::Natural),
        &common::pool("llm", 20, Provenance::SyntheticLlm),
        5,
        42,
        &["ann1".to_string(), "ann2".to_string()],
    )
    .unwrap();
    let store = SessionStore::open(dir.path().join("sessions")).unwrap();
    store.create(session.clone()).unwrap();
    let base = common::spawn(router(Arc::new(store), static_dir));
    Fixture {
        base,
        session,
        _dir: dir,
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

struct Reply {
    status: u16,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

fn get(url: &str, token: Option<&str>) -> Reply {
    let mut req = agent().get(url);
    if let Some(t) = token {
        req = req.header("Authorization", &format!("Bearer {t}"));
    }
    let mut resp = req.call().unwrap();
    Reply {
        status: resp.status().as_u16(),
        body: resp.body_mut().read_to_string().unwrap(),
    }
}

fn post(url: &str, token: &str, body: &Value) -> Reply {
    let mut resp = agent()
        .post(url)
        .header("Authorization", &format!("Bearer {token}"))
        .header("Content-Type", "application/json")
        .send(body.to_string())
        .unwrap();
    Reply {
        status: resp.status().as_u16(),
        body: resp.body_mut().read_to_string().unwrap(),
    }
}

fn judgment(item_id: &str, agree: &str, correction: Option<&str>) -> Value {
    let mut j = json!({
        "item_id": item_id,
        "naturalness": "strange",
        "label_agree": agree,
        "origin_guess": "human",
    });
    if let Some(c) = correction {
        j["correction"] = json!(c);
    }
    j
}

/// Fails if an annotator-facing body reveals where an item came from.
fn assert_blind(reply: &Reply, session: &Session) {
    fn walk(v: &Value, path: &str) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    assert!(k != "provenance" && k != "source_id", "{path}.{k} leaks provenance");
                    walk(child, &format!("{path}.{k}"));
                }
            }
            Value::Array(items) => items.iter().for_each(|c| walk(c, path)),
            _ => {}
        }
    }
    if let Ok(v) = serde_json::from_str::<Value>(&reply.body) {
        walk(&v, "$");
    }
    for needle in ["synthetic", "provenance", "source_id", "llm-", "nat-"] {
        assert!(!reply.body.contains(needle), "body contains {needle:?}: {}", reply.body);
    }
    for item in &session.items {
        assert!(!reply.body.contains(&item.source_id));
    }
}

#[test]
fn annotation_flow_and_error_codes() {
    let f = fixture(None);
    let s = &f.session;
    let ann1 = &s.annotators[0].token;
    let next_url = format!("{}/sessions/{}/next?annotator=ann1", f.base, s.id);
    let submit_url = format!("{}/sessions/{}/judgments", f.base, s.id);

    let first = get(&next_url, Some(ann1));
    assert_eq!(first.status, 200);
    let v = first.json();
    assert_eq!(v["status"], "item");
    assert_eq!(v["item"]["position"], 1);
    assert_eq!(v["progress"]["total"], 10);
    let item_id = v["item"]["item_id"].as_str().unwrap().to_string();

    let missing = post(&submit_url, ann1, &judgment(&item_id, "disagree", None));
    assert_eq!(missing.status, 422);
    assert_eq!(missing.json()["error"], "correction_required");

    let ok = post(&submit_url, ann1, &judgment(&item_id, "disagree", Some("negative")));
    assert_eq!(ok.status, 200, "{}", ok.body);
    assert_eq!(ok.json()["overwritten"], false);
    let again = post(&submit_url, ann1, &judgment(&item_id, "agree", None));
    assert_eq!(again.json()["overwritten"], true);
    assert_eq!(again.json()["progress"]["answered"], 1);

    let unknown = post(&submit_url, ann1, &judgment("item-9999", "agree", None));
    assert_eq!(unknown.status, 404);
    assert_eq!(unknown.json()["error"], "not_found");

    let malformed = post(&submit_url, ann1, &json!({"item_id": item_id}));
    assert_eq!(malformed.status, 400);

    assert_eq!(get(&next_url, None).status, 401);
    assert_eq!(get(&next_url, Some("wrong")).status, 401);
    let ann2 = &s.annotators[1].token;
    assert_eq!(get(&next_url, Some(ann2)).status, 401, "token of another annotator");
    assert_eq!(get(&format!("{}/sessions/none/next", f.base), Some(ann1)).status, 404);

    let second = get(&next_url, Some(ann1)).json();
    assert_eq!(second["item"]["position"], 2);
}

#[test]
fn report_requires_admin_token() {
    let f = fixture(None);
    let s = &f.session;
    let url = format!("{}/sessions/{}/report", f.base, s.id);
    assert_eq!(get(&url, Some(&s.annotators[0].token)).status, 401);
    let empty = get(&url, Some(&s.admin_token));
    assert_eq!(empty.status, 409);
    assert_eq!(empty.json()["error"], "empty_session");

    let submit_url = format!("{}/sessions/{}/judgments", f.base, s.id);
    post(
        &submit_url,
        &s.annotators[0].token,
        &judgment("item-0001", "agree", None),
    );
    let report = get(&url, Some(&s.admin_token));
    assert_eq!(report.status, 200);
    let v = report.json();
    assert_eq!(v["total_judgments"], 1);
    assert!(v["groups"].get("natural").is_some() || v["groups"].get("synthetic-llm").is_some());
}

#[test]
fn no_annotator_payload_reveals_provenance() {
    let f = fixture(None);
    let s = &f.session;
    let submit_url = format!("{}/sessions/{}/judgments", f.base, s.id);
    for annotator in &s.annotators {
        let next_url = format!("{}/sessions/{}/next?annotator={}", f.base, s.id, annotator.id);
        loop {
            let reply = get(&next_url, Some(&annotator.token));
            assert_eq!(reply.status, 200);
            assert_blind(&reply, s);
            let v = reply.json();
            if v["status"] == "complete" {
                assert_eq!(v["progress"]["answered"], 10);
                break;
            }
            let id = v["item"]["item_id"].as_str().unwrap();
            let bad = post(&submit_url, &annotator.token, &judgment(id, "disagree", None));
            assert_blind(&bad, s);
            let good = post(
                &submit_url,
                &annotator.token,
                &judgment(id, "disagree", Some("neutral")),
            );
            assert_eq!(good.status, 200);
            assert_blind(&good, s);
        }
    }
    for reply in [
        post(
            &submit_url,
            &s.annotators[0].token,
            &judgment("item-4242", "agree", None),
        ),
        post(&submit_url, "nope", &judgment("item-0001", "agree", None)),
        get(
            &format!("{}/sessions/{}/report", f.base, s.id),
            Some(&s.annotators[0].token),
        ),
    ] {
        assert!(reply.status >= 400);
        assert_blind(&reply, s);
    }
}

#[test]
fn static_assets_are_served() {
    let assets = tempfile::tempdir().unwrap();
    std::fs::write(assets.path().join("index.html"), "<html>annotate</html>").unwrap();
    std::fs::write(assets.path().join("app.js"), "console.log(1)").unwrap();
    let f = fixture(Some(assets.path().to_path_buf()));
    let index = get(&format!("{}/", f.base), None);
    assert_eq!(index.status, 200);
    assert!(index.body.contains("annotate"));
    assert_eq!(get(&format!("{}/app.js", f.base), None).body, "console.log(1)");
    assert_eq!(get(&format!("{}/missing.css", f.base), None).status, 404);
    assert_eq!(get(&format!("{}/healthz", f.base), None).body, "ok");
}
