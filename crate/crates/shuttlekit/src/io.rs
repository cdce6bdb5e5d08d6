//! Parsing of detector / classifier output streams and the challenge
//! prediction CSV.
//!
//! Three file formats live here:
//!
//! - `<video>.detections.jsonl` — one JSON object per line, one line per
//!   frame that produced detections (sparse streams are fine):
//!   `{"frame":12,"shuttle":[{"x":640.0,"y":360.0,"conf":0.9}],"boxes":[...]}`
//! - `<video>.clips.csv` — headerless rows `clip_start,label[,p_none,p_a,p_b]`
//!   with label one of `N`, `A`, `B`.
//! - `<video>_predictions.csv` — the challenge submission shape, header plus
//!   one row per shot. Ground truth uses the identical columns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::ClipPrediction;
use crate::types::{BoundingBox, Player, Point};

/// Object classes emitted by the upstream detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Player,
    Court,
    Net,
    Racket,
}

/// One shuttlecock candidate in a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShuttleCandidate {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "conf")]
    pub confidence: f64,
}

/// One detected box in a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    pub class: ObjectClass,
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    #[serde(rename = "conf")]
    pub confidence: f64,
    #[serde(rename = "player", skip_serializing_if = "Option::is_none", default)]
    pub player_id: Option<Player>,
}

impl DetectionBox {
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox {
            x_min: self.x_min,
            y_min: self.y_min,
            x_max: self.x_max,
            y_max: self.y_max,
        }
    }
}

/// Everything the detector produced for one frame. A missing shuttlecock is
/// an empty candidate list, never a (0,0) point — (0,0) is a valid pixel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    #[serde(rename = "shuttle", default, skip_serializing_if = "Vec::is_empty")]
    pub shuttle_candidates: Vec<ShuttleCandidate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<DetectionBox>,
}

impl FrameDetections {
    /// The highest-confidence shuttle candidate, ties resolved to the first
    /// listed.
    pub fn best_shuttle(&self) -> Option<&ShuttleCandidate> {
        self.shuttle_candidates
            .iter()
            .max_by(|a, b| a.confidence.partial_cmp(&b.confidence).unwrap())
    }

    /// The first box of the given class, optionally restricted to a player id.
    pub fn find_box(&self, class: ObjectClass, player: Option<Player>) -> Option<&DetectionBox> {
        self.boxes
            .iter()
            .find(|b| b.class == class && (player.is_none() || b.player_id == player))
    }
}

fn check_unit_interval(value: f64, what: &str, line: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Parse {
            line,
            message: format!("{what} {value} outside [0,1]"),
        });
    }
    Ok(())
}

/// Parse a line-delimited JSON detection stream.
///
/// Records may arrive in any order and frames may be missing; the result is
/// sorted by frame index. Duplicate frame indices and invariant violations
/// (inverted boxes, confidences outside [0,1]) are errors carrying the
/// offending line number.
pub fn parse_detection_stream(text: &str) -> Result<Vec<FrameDetections>> {
    let mut frames: Vec<(usize, FrameDetections)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record: FrameDetections = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        for cand in &record.shuttle_candidates {
            check_unit_interval(cand.confidence, "shuttle confidence", line_no)?;
        }
        for b in &record.boxes {
            check_unit_interval(b.confidence, "box confidence", line_no)?;
            if b.x_min > b.x_max || b.y_min > b.y_max {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "inverted box ({},{})..({},{})",
                        b.x_min, b.y_min, b.x_max, b.y_max
                    ),
                });
            }
        }
        frames.push((line_no, record));
    }
    frames.sort_by_key(|(_, f)| f.frame_index);
    for pair in frames.windows(2) {
        if pair[0].1.frame_index == pair[1].1.frame_index {
            return Err(Error::Parse {
                line: pair[1].0,
                message: format!("duplicate frame index {}", pair[1].1.frame_index),
            });
        }
    }
    Ok(frames.into_iter().map(|(_, f)| f).collect())
}

/// Serialize frame detections as line-delimited JSON.
pub fn emit_detection_stream(frames: &[FrameDetections]) -> Result<String> {
    let mut out = String::new();
    for f in frames {
        let line = serde_json::to_string(f)
            .map_err(|e| Error::Internal(format!("serialize detections: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn parse_clip_label(s: &str, line: usize) -> Result<Option<Player>> {
    match s {
        "N" => Ok(None),
        "A" => Ok(Some(Player::A)),
        "B" => Ok(Some(Player::B)),
        other => Err(Error::Parse {
            line,
            message: format!("unknown clip label {other:?}, expected N, A or B"),
        }),
    }
}

/// Parse the per-clip classifier output.
///
/// Rows are `clip_start,label` or `clip_start,label,p_none,p_a,p_b`. The
/// result is sorted by clip start; starts must then be consecutive
/// (stride 1), and probability triples must sum to 1 within 1e-6.
pub fn parse_clip_predictions(text: &str) -> Result<Vec<ClipPrediction>> {
    let mut clips: Vec<(usize, ClipPrediction)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 2 && fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 or 5 fields, got {}", fields.len()),
            });
        }
        let clip_start: u64 = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad clip start {:?}", fields[0]),
        })?;
        let label = parse_clip_label(fields[1], line_no)?;
        let probs = if fields.len() == 5 {
            let mut p = [0.0f64; 3];
            for (slot, raw) in p.iter_mut().zip(&fields[2..5]) {
                *slot = raw.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad probability {raw:?}"),
                })?;
                check_unit_interval(*slot, "class probability", line_no)?;
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("class probabilities sum to {sum}, expected 1"),
                });
            }
            Some(p)
        } else {
            None
        };
        clips.push((
            line_no,
            ClipPrediction {
                clip_start,
                label,
                probs,
            },
        ));
    }
    clips.sort_by_key(|(_, c)| c.clip_start);
    for pair in clips.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.1.clip_start != a.1.clip_start + 1 {
            return Err(Error::Parse {
                line: b.0,
                message: format!(
                    "clip starts must be consecutive: {} follows {}",
                    b.1.clip_start, a.1.clip_start
                ),
            });
        }
    }
    Ok(clips.into_iter().map(|(_, c)| c).collect())
}

/// Serialize clip predictions in the headerless `clips.csv` shape.
pub fn emit_clip_predictions(clips: &[ClipPrediction]) -> String {
    let mut out = String::new();
    for c in clips {
        let label = match c.label {
            None => "N",
            Some(Player::A) => "A",
            Some(Player::B) => "B",
        };
        match c.probs {
            Some(p) => {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.clip_start, label, p[0], p[1], p[2]
                ));
            }
            None => out.push_str(&format!("{},{}\n", c.clip_start, label)),
        }
    }
    out
}

/// One shot's eleven challenge target fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    pub shot_seq: u32,
    pub hit_frame: u64,
    pub hitter: Player,
    /// Round-head shot or not, encoded 1 / 2.
    pub round_head: u8,
    /// Backhand or not, encoded 1 / 2.
    pub backhand: u8,
    /// Hitting-point altitude category, encoded 1 / 2.
    pub ball_height: u8,
    pub landing: Point,
    pub hitter_location: Point,
    pub defender_location: Point,
    /// Ball type, 1..=9.
    pub ball_type: u8,
    /// Winning player; set only on the final shot of a rally.
    pub winner: Option<Player>,
}

impl ShotRecord {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("RoundHead", self.round_head),
            ("Backhand", self.backhand),
            ("BallHeight", self.ball_height),
        ] {
            if !(1..=2).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be 1 or 2, got {v}"
                )));
            }
        }
        if !(1..=9).contains(&self.ball_type) {
            return Err(Error::InvalidInput(format!(
                "BallType must be in 1..=9, got {}",
                self.ball_type
            )));
        }
        Ok(())
    }
}

/// Row shape for the prediction / ground-truth CSV.
#[derive(Debug, Serialize, Deserialize)]
struct ShotRow {
    #[serde(rename = "VideoName")]
    video_name: String,
    #[serde(rename = "ShotSeq")]
    shot_seq: u32,
    #[serde(rename = "HitFrame")]
    hit_frame: u64,
    #[serde(rename = "Hitter")]
    hitter: Player,
    #[serde(rename = "RoundHead")]
    round_head: u8,
    #[serde(rename = "Backhand")]
    backhand: u8,
    #[serde(rename = "BallHeight")]
    ball_height: u8,
    #[serde(rename = "LandingX")]
    landing_x: f64,
    #[serde(rename = "LandingY")]
    landing_y: f64,
    #[serde(rename = "HitterLocationX")]
    hitter_location_x: f64,
    #[serde(rename = "HitterLocationY")]
    hitter_location_y: f64,
    #[serde(rename = "DefenderLocationX")]
    defender_location_x: f64,
    #[serde(rename = "DefenderLocationY")]
    defender_location_y: f64,
    #[serde(rename = "BallType")]
    ball_type: u8,
    #[serde(rename = "Winner")]
    winner: Option<Player>,
}

impl ShotRow {
    fn from_record(video_name: &str, r: &ShotRecord) -> ShotRow {
        ShotRow {
            video_name: video_name.to_string(),
            shot_seq: r.shot_seq,
            hit_frame: r.hit_frame,
            hitter: r.hitter,
            round_head: r.round_head,
            backhand: r.backhand,
            ball_height: r.ball_height,
            landing_x: r.landing.x,
            landing_y: r.landing.y,
            hitter_location_x: r.hitter_location.x,
            hitter_location_y: r.hitter_location.y,
            defender_location_x: r.defender_location.x,
            defender_location_y: r.defender_location.y,
            ball_type: r.ball_type,
            winner: r.winner,
        }
    }

    fn into_record(self) -> (String, ShotRecord) {
        (
            self.video_name,
            ShotRecord {
                shot_seq: self.shot_seq,
                hit_frame: self.hit_frame,
                hitter: self.hitter,
                round_head: self.round_head,
                backhand: self.backhand,
                ball_height: self.ball_height,
                landing: Point::new(self.landing_x, self.landing_y),
                hitter_location: Point::new(self.hitter_location_x, self.hitter_location_y),
                defender_location: Point::new(self.defender_location_x, self.defender_location_y),
                ball_type: self.ball_type,
                winner: self.winner,
            },
        )
    }
}

/// Check that `shot_seq` values run 1..=N in order and the winner is set
/// only on the final shot.
fn check_shot_list(shots: &[ShotRecord]) -> Result<()> {
    for (i, shot) in shots.iter().enumerate() {
        let expect = (i + 1) as u32;
        if shot.shot_seq != expect {
            return Err(Error::InvalidInput(format!(
                "shot_seq must be contiguous from 1: expected {expect}, got {}",
                shot.shot_seq
            )));
        }
        shot.validate()?;
        if shot.winner.is_some() && i + 1 != shots.len() {
            return Err(Error::InvalidInput(format!(
                "winner set on non-final shot {}",
                shot.shot_seq
            )));
        }
    }
    Ok(())
}

/// Emit the challenge-format prediction CSV for one video.
///
/// `parse_predictions(emit_predictions(name, shots))` is the identity.
pub fn emit_predictions(video_name: &str, shots: &[ShotRecord]) -> Result<String> {
    check_shot_list(shots)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    if shots.is_empty() {
        // serde-driven headers only appear with at least one record; write
        // them explicitly for the empty case.
        writer
            .write_record(PREDICTION_COLUMNS)
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    for shot in shots {
        writer
            .serialize(ShotRow::from_record(video_name, shot))
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

/// Column order of the prediction CSV.
pub const PREDICTION_COLUMNS: &[&str] = &[
    "VideoName",
    "ShotSeq",
    "HitFrame",
    "Hitter",
    "RoundHead",
    "Backhand",
    "BallHeight",
    "LandingX",
    "LandingY",
    "HitterLocationX",
    "HitterLocationY",
    "DefenderLocationX",
    "DefenderLocationY",
    "BallType",
    "Winner",
];

/// Parse a prediction or ground-truth CSV, grouping rows by video name.
///
/// Rows may arrive in any order; each video's shots are sorted by
/// `shot_seq` and must be contiguous from 1.
pub fn parse_predictions(text: &str) -> Result<BTreeMap<String, Vec<ShotRecord>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut by_video: BTreeMap<String, Vec<ShotRecord>> = BTreeMap::new();
    for (idx, row) in reader.deserialize::<ShotRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: idx + 2,
            message: e.to_string(),
        })?;
        let (video, record) = row.into_record();
        by_video.entry(video).or_default().push(record);
    }
    for (video, shots) in &mut by_video {
        shots.sort_by_key(|s| s.shot_seq);
        check_shot_list(shots)
            .map_err(|e| Error::InvalidInput(format!("video {video:?}: {e}")))?;
    }
    Ok(by_video)
}

/// Emit a multi-video prediction CSV (ground-truth shape).
pub fn emit_prediction_set(videos: &BTreeMap<String, Vec<ShotRecord>>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut any = false;
    for (video, shots) in videos {
        check_shot_list(shots).map_err(|e| Error::InvalidInput(format!("video {video:?}: {e}")))?;
        for shot in shots {
            any = true;
            writer
                .serialize(ShotRow::from_record(video, shot))
                .map_err(|e| Error::Internal(e.to_string()))?;
        }
    }
    if !any {
        writer
            .write_record(PREDICTION_COLUMNS)
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_shot(seq: u32) -> ShotRecord {
        ShotRecord {
            shot_seq: seq,
            hit_frame: 40 + 30 * seq as u64,
            hitter: if seq % 2 == 1 { Player::A } else { Player::B },
            round_head: 2,
            backhand: 1,
            ball_height: 2,
            landing: Point::new(512.5, 300.25),
            hitter_location: Point::new(600.0, 550.0),
            defender_location: Point::new(640.0, 250.0),
            ball_type: 3,
            winner: None,
        }
    }

    #[test]
    fn empty_detection_stream_parses_to_empty() {
        assert!(parse_detection_stream("").unwrap().is_empty());
    }

    #[test]
    fn single_record_round_trips() {
        let text = r#"{"frame":0,"shuttle":[{"x":640.0,"y":360.0,"conf":0.9}]}"#;
        let frames = parse_detection_stream(text).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].frame_index, 0);
        assert_eq!(frames[0].shuttle_candidates.len(), 1);
        assert_eq!(frames[0].shuttle_candidates[0].x, 640.0);

        let emitted = emit_detection_stream(&frames).unwrap();
        let reparsed = parse_detection_stream(&emitted).unwrap();
        assert_eq!(frames, reparsed);
    }

    #[test]
    fn inverted_box_is_an_error() {
        let text = r#"{"frame":0,"boxes":[{"class":"player","x_min":200.0,"y_min":0.0,"x_max":100.0,"y_max":50.0,"conf":0.9}]}"#;
        let err = parse_detection_stream(text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn duplicate_frame_is_an_error() {
        let text = "{\"frame\":3}\n{\"frame\":3}";
        let err = parse_detection_stream(text).unwrap_err();
        assert!(err.to_string().contains("duplicate frame index 3"));
    }

    #[test]
    fn detection_stream_sorts_by_frame() {
        let text = "{\"frame\":5}\n{\"frame\":1}\n{\"frame\":3}";
        let frames = parse_detection_stream(text).unwrap();
        let order: Vec<u64> = frames.iter().map(|f| f.frame_index).collect();
        assert_eq!(order, vec![1, 3, 5]);
    }

    #[test]
    fn clip_rows_parse_both_shapes() {
        let clips = parse_clip_predictions("0,N\n1,A,0.1,0.8,0.1\n").unwrap();
        assert_eq!(clips[0].clip_start, 0);
        assert_eq!(clips[0].label, None);
        assert_eq!(clips[0].probs, None);
        assert_eq!(clips[1].label, Some(Player::A));
        assert_eq!(clips[1].probs, Some([0.1, 0.8, 0.1]));
    }

    #[test]
    fn unknown_clip_label_is_an_error() {
        let err = parse_clip_predictions("0,N\n1,X\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn bad_probability_sum_is_an_error() {
        let err = parse_clip_predictions("0,A,0.5,0.4,0.2\n").unwrap_err();
        assert!(err.to_string().contains("sum"));
    }

    #[test]
    fn gapped_clip_starts_are_an_error() {
        let err = parse_clip_predictions("0,N\n2,N\n").unwrap_err();
        assert!(err.to_string().contains("consecutive"));
    }

    #[test]
    fn empty_shot_list_emits_header_only() {
        let csv = emit_predictions("match1", &[]).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("VideoName,ShotSeq,HitFrame"));
    }

    #[test]
    fn predictions_round_trip() {
        let mut last = sample_shot(3);
        last.winner = Some(Player::B);
        let shots = vec![sample_shot(1), sample_shot(2), last];
        let csv = emit_predictions("m", &shots).unwrap();
        let parsed = parse_predictions(&csv).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed["m"], shots);
    }

    #[test]
    fn non_contiguous_shot_seq_is_an_error() {
        let shots = vec![sample_shot(1), sample_shot(3)];
        assert!(emit_predictions("m", &shots).is_err());
    }

    #[test]
    fn winner_on_non_final_shot_is_an_error() {
        let mut first = sample_shot(1);
        first.winner = Some(Player::A);
        let shots = vec![first, sample_shot(2)];
        assert!(emit_predictions("m", &shots).is_err());
    }

    #[test]
    fn prediction_parse_is_order_insensitive() {
        let mut last = sample_shot(2);
        last.winner = Some(Player::A);
        let shots = vec![sample_shot(1), last];
        let csv = emit_predictions("m", &shots).unwrap();
        let mut lines: Vec<&str> = csv.lines().collect();
        lines.swap(1, 2);
        let shuffled = lines.join("\n");
        let parsed = parse_predictions(&shuffled).unwrap();
        assert_eq!(parsed["m"], shots);
    }
}
