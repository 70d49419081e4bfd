#![allow(dead_code)]

use std::net::SocketAddr;

use axum::Router;
use mixaug_core::{Provenance, SentenceRecord, Sentiment};

/// Serves `app` on an ephemeral local port from a background runtime.
pub fn spawn(app: Router) -> String {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr: SocketAddr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{addr}")
}

pub fn pool(prefix: &str, n: usize, provenance: Provenance) -> Vec<SentenceRecord> {
    (0..n)
        .map(|i| {
            let mut r = SentenceRecord::natural(
                format!("{prefix}-{i}"),
                format!("{prefix} sentence number {i} pues"),
                Sentiment::ALL[i % 3],
            );
            r.provenance = provenance;
            r
        })
        .collect()
}
