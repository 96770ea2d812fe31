//! Trial planning and per-session bookkeeping. No I/O here.

use std::collections::{HashMap, HashSet, VecDeque};

use emotion_isp::pipeline::{assign_ab_trial, AbTrialDescriptor};
use emotion_isp::{quadrant_from_va, Emotion, VAVector};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const CALIBRATION_INSTRUCTION: &str =
    "Use the sliders to select a visual appearance for the image that best matches the target emotion.";

pub const AB_QUESTION: &str =
    "As a movie director or content creator, which video result would you prefer to use?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Calibration,
    Ab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAssignment {
    pub trial_id: String,
    pub image_id: String,
    pub target_emotion: Emotion,
    pub instruction: String,
}

/// What an A/B participant sees: two opaque image URLs and the question.
/// Which side carries the emotion rendering stays on the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbAssignment {
    pub trial_id: String,
    pub clip_id: String,
    pub left: String,
    pub right: String,
    pub question: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Planned {
    Calibration(TrialAssignment),
    Ab { trial_id: String, descriptor: AbTrialDescriptor },
}

impl Planned {
    pub fn trial_id(&self) -> &str {
        match self {
            Planned::Calibration(t) => &t.trial_id,
            Planned::Ab { trial_id, .. } => trial_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanError {
    EmptyCorpus,
    NoEligibleClips,
}

impl std::fmt::Display for PlanError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanError::EmptyCorpus => f.write_str("image corpus is empty"),
            PlanError::NoEligibleClips => f.write_str("no labelled clips are eligible for A/B trials"),
        }
    }
}

fn trial_id(i: usize) -> String {
    format!("t{i:04}")
}

/// Every (image, calibrated emotion) pair once, in a seeded random order.
pub fn calibration_plan(image_ids: &[String], seed: u64) -> Result<Vec<Planned>, PlanError> {
    if image_ids.is_empty() {
        return Err(PlanError::EmptyCorpus);
    }
    let mut pairs: Vec<(String, Emotion)> = image_ids
        .iter()
        .flat_map(|id| Emotion::CALIBRATED.into_iter().map(move |e| (id.clone(), e)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(i, (image_id, target_emotion))| {
            Planned::Calibration(TrialAssignment {
                trial_id: trial_id(i),
                image_id,
                target_emotion,
                instruction: CALIBRATION_INSTRUCTION.to_string(),
            })
        })
        .collect())
}

/// One trial per labelled clip: correct or wrong emotion against neutral,
/// sides randomized, then the clip order shuffled. Clips whose label is
/// excluded from the protocol are skipped.
pub fn ab_plan(labels: &[(String, VAVector)], seed: u64, include_calm: bool) -> Result<Vec<Planned>, PlanError> {
    let pool: Vec<Emotion> = Emotion::CALIBRATED
        .into_iter()
        .filter(|e| include_calm || *e != Emotion::Calm)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut descriptors = Vec::new();
    for (clip, va) in labels {
        let Ok(label) = quadrant_from_va(*va) else {
            continue;
        };
        if !pool.contains(&label) {
            continue;
        }
        let others: Vec<Emotion> = pool.iter().copied().filter(|e| *e != label).collect();
        let wrong = *others.choose(&mut rng).expect("pool has at least two emotions");
        descriptors.push(assign_ab_trial(&mut rng, clip, label, wrong).expect("valid emotions"));
    }
    if descriptors.is_empty() {
        return Err(PlanError::NoEligibleClips);
    }
    descriptors.shuffle(&mut rng);
    Ok(descriptors
        .into_iter()
        .enumerate()
        .map(|(i, descriptor)| Planned::Ab {
            trial_id: trial_id(i),
            descriptor,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub subject_id: String,
    pub seed: u64,
    pub mode: Mode,
    pub remaining: usize,
    pub completed: usize,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub subject_id: String,
    pub seed: u64,
    pub mode: Mode,
    queue: VecDeque<Planned>,
    issued: HashMap<String, Planned>,
    submitted: HashSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubmitError {
    UnknownTrial,
    Duplicate,
    WrongMode,
}

impl Session {
    pub fn new(id: String, subject_id: String, seed: u64, mode: Mode, plan: Vec<Planned>) -> Self {
        Self {
            id,
            subject_id,
            seed,
            mode,
            queue: plan.into(),
            issued: HashMap::new(),
            submitted: HashSet::new(),
        }
    }

    pub fn state(&self) -> SessionState {
        SessionState {
            session_id: self.id.clone(),
            subject_id: self.subject_id.clone(),
            seed: self.seed,
            mode: self.mode,
            remaining: self.queue.len(),
            completed: self.submitted.len(),
        }
    }

    /// Pops the next planned trial; `None` once the plan is exhausted.
    pub fn next(&mut self) -> Option<Planned> {
        let trial = self.queue.pop_front()?;
        self.issued.insert(trial.trial_id().to_string(), trial.clone());
        Some(trial)
    }

    pub fn issued(&self, trial_id: &str) -> Option<&Planned> {
        self.issued.get(trial_id)
    }

    /// Checks a submission against the issued trials without recording it.
    pub fn check_submit(&self, trial_id: &str) -> Result<&Planned, SubmitError> {
        if self.submitted.contains(trial_id) {
            return Err(SubmitError::Duplicate);
        }
        self.issued.get(trial_id).ok_or(SubmitError::UnknownTrial)
    }

    pub fn mark_submitted(&mut self, trial_id: &str) {
        self.submitted.insert(trial_id.to_string());
    }
}
