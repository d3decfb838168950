//! Talks to a classifier over the newline-delimited JSON protocol. A tiny
//! server is started on a background thread; point `RemoteClassifier` at
//! any process that speaks the same protocol.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use rou_falsify::mlcomp::wire::{Reply, Request};
use rou_falsify::mlcomp::{Classifier, FeatureVector, PlantedBox, RemoteClassifier, SyntheticClassifier};

fn serve(listener: TcpListener) {
    let model = SyntheticClassifier::new(3, 1, vec![PlantedBox::new(vec![0.4, 0.0, 0.15], vec![0.5, 1.0, 0.25])]);
    for stream in listener.incoming().flatten() {
        let mut out = stream.try_clone().unwrap();
        for line in BufReader::new(stream).lines().map_while(Result::ok) {
            let reply = match serde_json::from_str::<Request>(&line) {
                Ok(req) => match model.classify(&FeatureVector(req.features)) {
                    Ok(v) => Reply::Verdict { id: req.id, label: v.label, score: v.score },
                    Err(e) => Reply::Error { id: req.id, error: e.to_string() },
                },
                Err(e) => Reply::Error { id: 0, error: e.to_string() },
            };
            if out.write_all(reply.to_line().as_bytes()).is_err() {
                break;
            }
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let endpoint = listener.local_addr()?.to_string();
    thread::spawn(move || serve(listener));

    let remote = RemoteClassifier::new(endpoint.clone(), 3, Duration::from_secs(2));
    println!("classifier at {endpoint}");
    let xs: Vec<FeatureVector> =
        [[0.45, 0.5, 0.2], [0.9, 0.5, 0.5], [0.42, 0.1, 0.16]].into_iter().map(|x| FeatureVector(x.to_vec())).collect();
    for (x, v) in xs.iter().zip(remote.classify_batch(&xs)?) {
        println!("{:?} -> label {} (score {:.3})", x.0, v.label, v.score);
    }

    match remote.classify(&FeatureVector(vec![0.5, 0.5])) {
        Err(e) => println!("wrong arity is caught locally: {e}"),
        Ok(v) => println!("unexpected verdict {v:?}"),
    }
    Ok(())
}
