#![allow(dead_code)]

use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde_json::Value;

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn request(name: &str) -> Value {
    let text = std::fs::read_to_string(repo_path(&format!("requests/{name}"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub struct Http {
    base: String,
    client: reqwest::Client,
}

impl Http {
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into(),
            client: reqwest::Client::new(),
        }
    }

    async fn finish(resp: reqwest::Response) -> (u16, Value) {
        let status = resp.status().as_u16();
        let body = resp.json().await.unwrap_or(Value::Null);
        (status, body)
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let resp = self.client.get(format!("{}{path}", self.base)).send().await.unwrap();
        Self::finish(resp).await
    }

    pub async fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        self.post_raw(path, body.to_string()).await
    }

    pub async fn post_raw(&self, path: &str, body: String) -> (u16, Value) {
        let resp = self
            .client
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .await
            .unwrap();
        Self::finish(resp).await
    }

    pub async fn submit(&self, body: &Value) -> String {
        let (status, resp) = self.post("/problems", body).await;
        assert_eq!(status, 202, "{resp}");
        resp["instance_id"].as_str().unwrap().to_string()
    }

    /// Polls until the instance leaves `running`; returns the final snapshot.
    pub async fn wait_done(&self, id: &str, limit: Duration) -> Value {
        let start = Instant::now();
        loop {
            let (status, snap) = self.get(&format!("/instances/{id}")).await;
            assert_eq!(status, 200, "{snap}");
            if snap["status"] != "running" {
                return snap;
            }
            assert!(start.elapsed() < limit, "instance {id} still running after {limit:?}");
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }
}
