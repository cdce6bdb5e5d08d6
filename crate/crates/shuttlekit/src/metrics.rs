//! Tolerance-based scoring of shot predictions and detection F1.
//!
//! Scoring follows the challenge rules: a wrong shot count zeroes that
//! video's tasks outright; hit frames count as correct within +/-2 frames;
//! the categorical fields are exact-match fractions; locations count within
//! a configurable pixel tolerance (the official tolerance is not public, so
//! the configured value is flagged in every report).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::io::ShotRecord;
use crate::trajectory::TrajectoryPoint;
use crate::types::Point;

/// Hit-frame tolerance in frames: errors beyond this are incorrect.
pub const HIT_FRAME_TOLERANCE: u64 = 2;

/// The eleven scored tasks, in report order.
pub const TASK_NAMES: [&str; 11] = [
    "shot_count",
    "hit_frame",
    "hitter",
    "round_head",
    "backhand",
    "ball_height",
    "landing",
    "hitter_location",
    "defender_location",
    "ball_type",
    "winner",
];

/// Per-task scores for one video, each in [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskScores {
    pub shot_count: f64,
    pub hit_frame: f64,
    pub hitter: f64,
    pub round_head: f64,
    pub backhand: f64,
    pub ball_height: f64,
    pub landing: f64,
    pub hitter_location: f64,
    pub defender_location: f64,
    pub ball_type: f64,
    pub winner: f64,
}

impl TaskScores {
    pub fn zeros() -> TaskScores {
        TaskScores {
            shot_count: 0.0,
            hit_frame: 0.0,
            hitter: 0.0,
            round_head: 0.0,
            backhand: 0.0,
            ball_height: 0.0,
            landing: 0.0,
            hitter_location: 0.0,
            defender_location: 0.0,
            ball_type: 0.0,
            winner: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 11] {
        [
            self.shot_count,
            self.hit_frame,
            self.hitter,
            self.round_head,
            self.backhand,
            self.ball_height,
            self.landing,
            self.hitter_location,
            self.defender_location,
            self.ball_type,
            self.winner,
        ]
    }

    /// Weighted mean of the task scores. Weights must be non-negative and
    /// not all zero; equal weights give the plain mean.
    pub fn aggregate(&self, weights: &[f64; 11]) -> Result<f64> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || total <= 0.0 {
            return Err(Error::Config(
                "task weights must be non-negative and sum to a positive value".into(),
            ));
        }
        let dot: f64 = self
            .as_array()
            .iter()
            .zip(weights)
            .map(|(s, w)| s * w)
            .sum();
        Ok(dot / total)
    }
}

/// Euclidean distance between a predicted point and ground truth.
pub fn location_error(pred: Point, gt: Point) -> f64 {
    pred.distance(gt)
}

/// Score one video's predictions against ground truth.
///
/// Both lists are keyed by `shot_seq` (duplicates are an error, order does
/// not matter). If the shot counts differ, the shot-count task and every
/// paired task score 0: pairing is undefined under a count mismatch.
pub fn score_video(
    pred: &[ShotRecord],
    gt: &[ShotRecord],
    location_tolerance: f64,
) -> Result<TaskScores> {
    if location_tolerance <= 0.0 {
        return Err(Error::Config(format!(
            "location tolerance must be positive, got {location_tolerance}"
        )));
    }
    let mut pred: Vec<&ShotRecord> = pred.iter().collect();
    let mut gt: Vec<&ShotRecord> = gt.iter().collect();
    for shots in [&mut pred, &mut gt] {
        shots.sort_by_key(|s| s.shot_seq);
        for pair in shots.windows(2) {
            if pair[0].shot_seq == pair[1].shot_seq {
                return Err(Error::InvalidInput(format!(
                    "duplicate shot_seq {}",
                    pair[0].shot_seq
                )));
            }
        }
    }
    if pred.len() != gt.len() {
        return Ok(TaskScores::zeros());
    }
    if gt.is_empty() {
        // Zero shots predicted for a zero-shot video: vacuously perfect.
        return Ok(TaskScores {
            shot_count: 1.0,
            hit_frame: 1.0,
            hitter: 1.0,
            round_head: 1.0,
            backhand: 1.0,
            ball_height: 1.0,
            landing: 1.0,
            hitter_location: 1.0,
            defender_location: 1.0,
            ball_type: 1.0,
            winner: 1.0,
        });
    }

    let n = gt.len() as f64;
    let fraction = |f: &dyn Fn(&ShotRecord, &ShotRecord) -> bool| -> f64 {
        pred.iter()
            .zip(&gt)
            .filter(|(p, g)| f(p, g))
            .count() as f64
            / n
    };

    Ok(TaskScores {
        shot_count: 1.0,
        hit_frame: fraction(&|p, g| p.hit_frame.abs_diff(g.hit_frame) <= HIT_FRAME_TOLERANCE),
        hitter: fraction(&|p, g| p.hitter == g.hitter),
        round_head: fraction(&|p, g| p.round_head == g.round_head),
        backhand: fraction(&|p, g| p.backhand == g.backhand),
        ball_height: fraction(&|p, g| p.ball_height == g.ball_height),
        landing: fraction(&|p, g| location_error(p.landing, g.landing) <= location_tolerance),
        hitter_location: fraction(&|p, g| {
            location_error(p.hitter_location, g.hitter_location) <= location_tolerance
        }),
        defender_location: fraction(&|p, g| {
            location_error(p.defender_location, g.defender_location) <= location_tolerance
        }),
        ball_type: fraction(&|p, g| p.ball_type == g.ball_type),
        winner: fraction(&|p, g| p.winner == g.winner),
    })
}

/// Frame-level detection counts and derived precision / recall / F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Report {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Detection F1 against a ground-truth track, matched per frame.
///
/// A frame is a true positive when both tracks are present within
/// `dist_thresh` pixels; a present prediction with absent or too-distant
/// truth is a false positive; unmatched truth is a false negative. Frames
/// are aligned by `frame_index`, so the two tracks may cover different
/// frame ranges.
pub fn detection_f1(
    pred: &[TrajectoryPoint],
    gt: &[TrajectoryPoint],
    dist_thresh: f64,
) -> F1Report {
    let mut gt_by_frame: BTreeMap<u64, Point> = BTreeMap::new();
    for p in gt {
        if p.is_present() {
            gt_by_frame.insert(p.frame_index, p.position.unwrap());
        }
    }
    let mut pred_frames: BTreeMap<u64, Point> = BTreeMap::new();
    for p in pred {
        if p.is_present() {
            pred_frames.insert(p.frame_index, p.position.unwrap());
        }
    }

    let mut tp = 0u64;
    let mut fp = 0u64;
    for (frame, p) in &pred_frames {
        match gt_by_frame.get(frame) {
            Some(g) if p.distance(*g) <= dist_thresh => tp += 1,
            _ => fp += 1,
        }
    }
    let fn_ = gt_by_frame
        .iter()
        .filter(|(frame, g)| match pred_frames.get(frame) {
            Some(p) => p.distance(**g) > dist_thresh,
            None => true,
        })
        .count() as u64;

    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    F1Report {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
        f1,
    }
}

/// Scores for a set of videos plus their aggregate.
#[derive(Debug, Clone)]
pub struct ScoreReport {
    /// Per-video task scores, keyed by video name.
    pub per_video: BTreeMap<String, TaskScores>,
    /// Equal task weights unless configured otherwise.
    pub weights: [f64; 11],
    pub location_tolerance: f64,
    /// Mean over videos of each video's weighted task mean.
    pub aggregate: f64,
}

impl ScoreReport {
    pub fn new(
        per_video: BTreeMap<String, TaskScores>,
        weights: [f64; 11],
        location_tolerance: f64,
    ) -> Result<ScoreReport> {
        let mut sum = 0.0;
        for scores in per_video.values() {
            sum += scores.aggregate(&weights)?;
        }
        let aggregate = if per_video.is_empty() {
            0.0
        } else {
            sum / per_video.len() as f64
        };
        Ok(ScoreReport {
            per_video,
            weights,
            location_tolerance,
            aggregate,
        })
    }

    /// CSV form: one row per video plus an `ALL` aggregate row. The header
    /// comment flags the configured tolerance and weights, which are not
    /// fixed by the challenge definition.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# location_tolerance_px={} weights={:?}\n",
            self.location_tolerance, self.weights
        );
        out.push_str("video,");
        out.push_str(&TASK_NAMES.join(","));
        out.push_str(",aggregate\n");
        for (video, scores) in &self.per_video {
            out.push_str(video);
            for v in scores.as_array() {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(
                ",{}\n",
                scores.aggregate(&self.weights).unwrap_or(0.0)
            ));
        }
        out.push_str(&format!("ALL{},{}\n", ",".repeat(11), self.aggregate));
        out
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "score report ({} videos, location tolerance {} px — configured, not challenge-official)",
            self.per_video.len(),
            self.location_tolerance
        )?;
        writeln!(f, "{:<18} {:>8}", "task", "mean")?;
        let n = self.per_video.len().max(1) as f64;
        for (i, name) in TASK_NAMES.iter().enumerate() {
            let mean: f64 = self
                .per_video
                .values()
                .map(|s| s.as_array()[i])
                .sum::<f64>()
                / n;
            writeln!(f, "{name:<18} {mean:>8.4}")?;
        }
        writeln!(f, "{:<18} {:>8.4}", "aggregate", self.aggregate)
    }
}
