use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use calib_service::session::{AB_QUESTION, CALIBRATION_INSTRUCTION};
use calib_service::{router, AppState, Corpus};
use emotion_isp::io::{encode_png, read_png, QuantizedImage};
use emotion_isp::stats::records::{read_ab_records, read_calibration_records};
use emotion_isp::stats::ab_tally;
use emotion_isp::{
    preset_for_emotion, render, ControlVector, Emotion, LinearImage, OutputEncoding, PipelineConfig,
};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn gradient(w: usize, h: usize, tilt: f64) -> LinearImage {
    let mut px = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            px.push([
                0.05 + 0.8 * u,
                0.05 + 0.6 * v,
                (0.1 + tilt * (1.0 - u) * v).min(1.0),
            ]);
        }
    }
    LinearImage::new(w, h, px).unwrap()
}

fn corpus() -> Corpus {
    let mut c = Corpus::default();
    c.insert("alpha", gradient(48, 32, 0.7));
    c.insert("beta", gradient(40, 40, 0.3));
    c
}

fn labelled_corpus() -> Corpus {
    let mut c = Corpus::default();
    let labels = [
        ("happy1", 0.6, 0.7),
        ("happy2", 0.4, 0.2),
        ("angry1", -0.5, 0.8),
        ("sad1", -0.3, -0.6),
        ("sad2", -0.7, -0.2),
        ("calm1", 0.5, -0.5),
    ];
    for (i, (id, v, a)) in labels.iter().enumerate() {
        c.insert(*id, gradient(32 + i, 24, 0.1 * i as f64));
        c.labels.insert(
            id.to_string(),
            emotion_isp::VAVector {
                valence: *v,
                arousal: *a,
            },
        );
    }
    c
}

fn app(corpus: Corpus, dir: &Path) -> Router {
    router(Arc::new(AppState::new(corpus, PipelineConfig::default(), dir.to_path_buf())))
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let res = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn post(app: &Router, uri: &str, body: &str) -> (StatusCode, Vec<u8>) {
    let res = app
        .clone()
        .oneshot(
            Request::post(uri)
                .header("content-type", "application/json")
                .body(Body::from(body.to_string()))
                .unwrap(),
        )
        .await
        .unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get_json(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, b) = get(app, uri).await;
    (s, serde_json::from_slice(&b).unwrap())
}

fn png(img: &LinearImage) -> Vec<u8> {
    encode_png(&QuantizedImage::encode(img, OutputEncoding::Srgb8)).unwrap()
}

fn decode(bytes: &[u8]) -> QuantizedImage {
    read_png(bytes, Path::new("response.png")).unwrap()
}

#[tokio::test]
async fn calibration_session_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(corpus(), dir.path());
    let (s, state) = get_json(&app, "/session/new?subject=p01&seed=42").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(state["remaining"], 8);
    assert_eq!(state["completed"], 0);
    let sid = state["session_id"].as_str().unwrap().to_string();

    let mut seen = Vec::new();
    for i in 0..8 {
        let (s, t) = get_json(&app, &format!("/trial/next?session={sid}")).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(t["instruction"], CALIBRATION_INSTRUCTION);
        seen.push((t["image_id"].as_str().unwrap().to_string(), t["target_emotion"].as_str().unwrap().to_string()));
        let chosen = json!({"alpha_S": 0.1 * i as f64, "alpha_YB": 0.0, "alpha_RG": -0.05,
                            "alpha_LC": 0.2, "alpha_B": -0.1, "alpha_P": 0.3});
        let body = json!({"session_id": sid, "trial_id": t["trial_id"], "chosen": chosen}).to_string();
        let (s, _) = post(&app, "/calibration", &body).await;
        assert_eq!(s, StatusCode::CREATED);
        let (s, _) = post(&app, "/calibration", &body).await;
        assert_eq!(s, StatusCode::CONFLICT);
    }
    let (s, _) = get(&app, &format!("/trial/next?session={sid}")).await;
    assert_eq!(s, StatusCode::GONE);

    let mut pairs = seen.clone();
    pairs.sort();
    pairs.dedup();
    assert_eq!(pairs.len(), 8);

    let file = std::fs::File::open(dir.path().join("calibration.jsonl")).unwrap();
    let records = read_calibration_records(std::io::BufReader::new(file)).unwrap();
    assert_eq!(records.len(), 8);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.subject_id, "p01");
        assert_eq!(r.image_id, seen[i].0);
        assert_eq!(r.target_emotion.name(), seen[i].1);
        assert_eq!(r.chosen.saturation, 0.1 * i as f64);
        assert_eq!(r.session_id.as_deref(), Some(sid.as_str()));
    }
}

#[tokio::test]
async fn session_order_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(corpus(), dir.path());
    let mut orders = Vec::new();
    for seed in [5, 5, 6] {
        let (_, st) = get_json(&app, &format!("/session/new?subject=x&seed={seed}")).await;
        let sid = st["session_id"].as_str().unwrap().to_string();
        let mut order = Vec::new();
        for _ in 0..8 {
            let (_, t) = get_json(&app, &format!("/trial/next?session={sid}")).await;
            order.push((t["image_id"].clone(), t["target_emotion"].clone()));
        }
        orders.push(order);
    }
    assert_eq!(orders[0], orders[1]);
    assert_ne!(orders[0], orders[2]);
}

#[tokio::test]
async fn preview_matches_library_render() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(corpus(), dir.path());
    let uri = "/preview?image=alpha&alphas=0.3,0.1,0.05,0.2,0.1,0.4&quality=full";
    let (s, a) = get(&app, uri).await;
    assert_eq!(s, StatusCode::OK);
    let (_, b) = get(&app, uri).await;
    assert_eq!(a, b);
    let v = ControlVector::parse_list("0.3,0.1,0.05,0.2,0.1,0.4").unwrap();
    let expected = render(&gradient(48, 32, 0.7), &v, &PipelineConfig::default()).unwrap();
    assert_eq!(a, png(&expected));

    let (_, reference) = get(&app, "/images/beta").await;
    let neutral = render(&gradient(40, 40, 0.3), &ControlVector::NEUTRAL, &PipelineConfig::default()).unwrap();
    assert_eq!(reference, png(&neutral));
}

#[tokio::test]
async fn draft_preview_is_downscaled() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = Corpus::default();
    c.insert("wide", gradient(1600, 600, 0.5));
    let app = app(c, dir.path());
    let (s, draft) = get(&app, "/preview?image=wide&alphas=0,0,0,0,0,0&quality=draft").await;
    assert_eq!(s, StatusCode::OK);
    let q = decode(&draft);
    assert_eq!((q.width(), q.height()), (1024, 384));
    let (_, default) = get(&app, "/preview?image=wide&alphas=0,0,0,0,0,0").await;
    assert_eq!(default, draft);
    let (_, full) = get(&app, "/preview?image=wide&alphas=0,0,0,0,0,0&quality=full").await;
    let q = decode(&full);
    assert_eq!((q.width(), q.height()), (1600, 600));
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(corpus(), dir.path());
    let cases = [
        ("/preview?image=nope&alphas=0,0,0,0,0,0", StatusCode::NOT_FOUND),
        ("/preview?image=alpha&alphas=0,0,0,0,0", StatusCode::BAD_REQUEST),
        ("/preview?image=alpha&alphas=0,0,NaN,0,0,0", StatusCode::BAD_REQUEST),
        ("/preview?image=alpha&alphas=0,0,0,0,0,0&quality=ultra", StatusCode::BAD_REQUEST),
        ("/preview?image=alpha", StatusCode::BAD_REQUEST),
        ("/images/nope", StatusCode::NOT_FOUND),
        ("/trial/next?session=session-999", StatusCode::NOT_FOUND),
        ("/trial/next", StatusCode::BAD_REQUEST),
        ("/session/new?seed=1", StatusCode::BAD_REQUEST),
        ("/session/new?subject=a&seed=-1", StatusCode::BAD_REQUEST),
        ("/session/new?subject=a&mode=other", StatusCode::BAD_REQUEST),
        ("/session/new?subject=a&mode=ab", StatusCode::CONFLICT),
    ];
    for (uri, want) in cases {
        let (got, body) = get(&app, uri).await;
        assert_eq!(got, want, "{uri}");
        let v: Value = serde_json::from_slice(&body).unwrap();
        assert!(v["error"].is_string(), "{uri}");
    }

    let empty = self::app(Corpus::default(), dir.path());
    let (s, _) = get(&empty, "/session/new?subject=a&seed=1").await;
    assert_eq!(s, StatusCode::CONFLICT);

    let (_, st) = get_json(&app, "/session/new?subject=a&seed=1").await;
    let sid = st["session_id"].as_str().unwrap();
    let zero = json!({"alpha_S":0,"alpha_YB":0,"alpha_RG":0,"alpha_LC":0,"alpha_B":0,"alpha_P":0});
    let posts = [
        ("not json".to_string(), StatusCode::BAD_REQUEST),
        (json!({"session_id": sid, "trial_id": "t0000"}).to_string(), StatusCode::BAD_REQUEST),
        (json!({"session_id": "zzz", "trial_id": "t0000", "chosen": zero}).to_string(), StatusCode::NOT_FOUND),
        (json!({"session_id": sid, "trial_id": "t0000", "chosen": zero}).to_string(), StatusCode::NOT_FOUND),
    ];
    for (body, want) in posts {
        let (got, _) = post(&app, "/calibration", &body).await;
        assert_eq!(got, want, "{body}");
    }
    let (got, _) = post(
        &app,
        "/ab-choice",
        &json!({"session_id": sid, "trial_id": "t0000", "choice": "middle"}).to_string(),
    )
    .await;
    assert_eq!(got, StatusCode::BAD_REQUEST);
    assert!(!dir.path().join("calibration.jsonl").exists());
}

#[tokio::test]
async fn ab_session_records_and_tally() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(labelled_corpus(), dir.path());
    let (s, st) = get_json(&app, "/session/new?subject=p07&seed=3&mode=ab").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(st["mode"], "ab");
    // The calm clip is left out by default.
    assert_eq!(st["remaining"], 5);
    let sid = st["session_id"].as_str().unwrap().to_string();

    let source = labelled_corpus();
    let cfg = PipelineConfig::default();
    let mut emotion_sides = Vec::new();
    for _ in 0..5 {
        let (_, t) = get_json(&app, &format!("/trial/next?session={sid}")).await;
        assert_eq!(t["question"], AB_QUESTION);
        let clip = t["clip_id"].as_str().unwrap();
        let (sl, left) = get(&app, t["left"].as_str().unwrap()).await;
        let (sr, right) = get(&app, t["right"].as_str().unwrap()).await;
        assert_eq!((sl, sr), (StatusCode::OK, StatusCode::OK));
        let neutral = png(&render(&source.images[clip].full, &ControlVector::NEUTRAL, &cfg).unwrap());
        let emotion_side = match (left == neutral, right == neutral) {
            (false, true) => "left",
            (true, false) => "right",
            other => panic!("expected exactly one neutral side, got {other:?}"),
        };
        let shown = if emotion_side == "left" { &left } else { &right };
        let matches: Vec<Emotion> = Emotion::CALIBRATED
            .into_iter()
            .filter(|e| png(&render(&source.images[clip].full, &preset_for_emotion(*e), &cfg).unwrap()) == *shown)
            .collect();
        assert_eq!(matches.len(), 1);
        emotion_sides.push((clip.to_string(), emotion_side, matches[0]));

        let body = json!({"session_id": sid, "trial_id": t["trial_id"], "choice": emotion_side}).to_string();
        let (s, ack) = post(&app, "/ab-choice", &body).await;
        assert_eq!(s, StatusCode::CREATED);
        let ack: Value = serde_json::from_slice(&ack).unwrap();
        assert!(ack.get("emotion_side").is_none());
        let (s, _) = post(&app, "/ab-choice", &body).await;
        assert_eq!(s, StatusCode::CONFLICT);
    }

    let file = std::fs::File::open(dir.path().join("ab.jsonl")).unwrap();
    let records = read_ab_records(std::io::BufReader::new(file), false).unwrap();
    assert_eq!(records.len(), 5);
    for (r, (clip, side, shown)) in records.iter().zip(&emotion_sides) {
        assert_eq!(&r.clip_id, clip);
        assert_eq!(r.emotion_side.to_string(), *side);
        assert_eq!(r.shown_emotion, *shown);
        assert_eq!(r.choice, emotion_isp::stats::Choice::EmotionSide);
        let label = emotion_isp::quadrant_from_va(source.labels[clip]).unwrap();
        assert_eq!(r.is_correct_emotion, label == *shown);
    }
    let tally = ab_tally(&records).unwrap();
    assert_eq!(tally.correct.trials + tally.wrong.trials, 5);
    assert_eq!(tally.correct.prefer_neutral + tally.wrong.prefer_neutral, 0);
}

#[tokio::test]
async fn ab_image_requires_issued_trial() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(labelled_corpus(), dir.path());
    let (_, st) = get_json(&app, "/session/new?subject=p&seed=1&mode=ab").await;
    let sid = st["session_id"].as_str().unwrap();
    let (s, _) = get(&app, &format!("/ab/image?session={sid}&trial=t0000&side=left")).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    get(&app, &format!("/trial/next?session={sid}")).await;
    let (s, _) = get(&app, &format!("/ab/image?session={sid}&trial=t0000&side=up")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = get(&app, &format!("/ab/image?session={sid}&trial=t0000&side=right")).await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn presets_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(corpus(), dir.path());
    let (s, v) = get_json(&app, "/presets").await;
    assert_eq!(s, StatusCode::OK);
    for e in Emotion::CALIBRATED {
        let got: ControlVector = serde_json::from_value(v[e.name()].clone()).unwrap();
        assert_eq!(got, preset_for_emotion(e));
    }
}

#[test]
fn corpus_loads_directory_with_labels() {
    let dir = tempfile::tempdir().unwrap();
    let img = gradient(20, 10, 0.4);
    emotion_isp::io::save_image(&img, &emotion_isp::io::ImageFile::infer(dir.path().join("one.ppm")).unwrap()).unwrap();
    std::fs::write(dir.path().join("labels.jsonl"), "{\"image_id\":\"one\",\"valence\":0.5,\"arousal\":-0.2}\n").unwrap();
    let c = Corpus::load(dir.path()).unwrap();
    assert_eq!(c.images.len(), 1);
    assert_eq!(c.labels["one"].valence, 0.5);

    std::fs::write(dir.path().join("labels.jsonl"), "{\"image_id\":\"one\"}\n").unwrap();
    assert!(Corpus::load(dir.path()).is_err());
}
