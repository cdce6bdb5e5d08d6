//! Hit-event localization from per-clip classifications.
//!
//! A sliding window of `clip_len` consecutive frames moves over the video
//! with stride 1; a classifier labels each clip `None` / `A hits` /
//! `B hits`. [`label_windows`] reproduces the training-side labeling rule,
//! and [`detect_shots`] inverts it at inference time: smooth the label
//! sequence with a mode filter, extract maximal non-`None` runs, and map
//! each run back to a hit frame. With `clip_len = 5`, a hit at frame `h`
//! labels exactly the clips starting at `h-3`, `h-2`, `h-1`, so an ideal
//! run inverts to `floor(median(starts)) + clip_len - 3 == h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Player;

/// Classifier output for one sliding-window clip. `label` is `None` when
/// nothing happens in the clip, otherwise the hitting player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipPrediction {
    pub clip_start: u64,
    pub label: Option<Player>,
    /// Optional class probabilities (none, A, B); must sum to 1.
    pub probs: Option<[f64; 3]>,
}

impl ClipPrediction {
    pub fn new(clip_start: u64, label: Option<Player>) -> ClipPrediction {
        ClipPrediction {
            clip_start,
            label,
            probs: None,
        }
    }
}

/// One detected hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitEvent {
    pub hit_frame: u64,
    pub hitter: Player,
    /// Clip start of the first clip in the supporting run.
    pub run_start: u64,
    pub run_len: usize,
}

/// A maximal run of identical non-`None` labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelRun {
    pub hitter: Player,
    /// Clip start of the first clip in the run.
    pub start: u64,
    pub len: usize,
}

/// How a run maps to its hit frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitFrameMode {
    /// Invert the labeling rule: `floor(median(starts)) + clip_len - 3`.
    /// Recovers the true hit frame exactly on ideal runs.
    #[default]
    InverseLabel,
    /// Take the run's first clip start as the hit frame.
    RunStart,
}

/// Tunables for [`detect_shots`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    pub clip_len: usize,
    pub smooth_window: usize,
    /// Runs shorter than this are dropped as noise. Ideal runs have
    /// length `clip_len - 2`.
    pub min_run_len: usize,
    pub hit_frame_mode: HitFrameMode,
}

impl Default for EventParams {
    fn default() -> Self {
        EventParams {
            clip_len: 5,
            smooth_window: 3,
            min_run_len: 2,
            hit_frame_mode: HitFrameMode::InverseLabel,
        }
    }
}

/// Label every sliding-window clip for the given hit frames.
///
/// The clip `[s, s + clip_len - 1]` is labeled with a hit's player iff the
/// hit frame lies strictly inside the clip (`s < h < s + clip_len - 1`).
/// A clip overlapping two hits takes the earlier hit's label.
pub fn label_windows(
    hit_frames: &[(u64, Player)],
    num_frames: u64,
    clip_len: usize,
) -> Result<Vec<ClipPrediction>> {
    if clip_len < 3 {
        return Err(Error::InvalidInput(format!(
            "clip_len must be >= 3, got {clip_len}"
        )));
    }
    for pair in hit_frames.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::InvalidInput(format!(
                "hit frames must be strictly increasing: {} follows {}",
                pair[1].0, pair[0].0
            )));
        }
    }
    if let Some(&(last, _)) = hit_frames.last() {
        if last >= num_frames {
            return Err(Error::InvalidInput(format!(
                "hit frame {last} outside video of {num_frames} frames"
            )));
        }
    }
    let len = clip_len as u64;
    if num_frames < len {
        return Ok(Vec::new());
    }
    let mut clips = Vec::with_capacity((num_frames - len + 1) as usize);
    for s in 0..=(num_frames - len) {
        let label = hit_frames
            .iter()
            .find(|&&(h, _)| s < h && h < s + len - 1)
            .map(|&(_, p)| p);
        clips.push(ClipPrediction::new(s, label));
    }
    Ok(clips)
}

/// Tie-break preference for the mode filter: `None`, then A, then B.
fn preferred(label: Option<Player>) -> u8 {
    match label {
        None => 0,
        Some(Player::A) => 1,
        Some(Player::B) => 2,
    }
}

/// Replace every label by the most frequent label in its centered window.
///
/// Windows are truncated at the sequence edges. Ties prefer `None`, then
/// A, then B. Probabilities do not survive smoothing.
pub fn smooth_predictions(seq: &[ClipPrediction], window: usize) -> Result<Vec<ClipPrediction>> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "smoothing window must be odd and >= 3, got {window}"
        )));
    }
    let half = window / 2;
    let mut out = Vec::with_capacity(seq.len());
    for i in 0..seq.len() {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(seq.len());
        let mut counts = [0usize; 3];
        for clip in &seq[lo..hi] {
            counts[preferred(clip.label) as usize] += 1;
        }
        let best = [None, Some(Player::A), Some(Player::B)]
            .into_iter()
            .max_by_key(|&l| (counts[preferred(l) as usize], std::cmp::Reverse(preferred(l))))
            .unwrap();
        out.push(ClipPrediction::new(seq[i].clip_start, best));
    }
    Ok(out)
}

/// Extract maximal runs of identical non-`None` labels, in order.
pub fn extract_events(seq: &[ClipPrediction]) -> Vec<LabelRun> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        let Some(hitter) = seq[i].label else {
            i += 1;
            continue;
        };
        let start = i;
        while i < seq.len() && seq[i].label == Some(hitter) {
            i += 1;
        }
        runs.push(LabelRun {
            hitter,
            start: seq[start].clip_start,
            len: i - start,
        });
    }
    runs
}

/// Map a run to its hit frame under the given mode.
pub fn run_to_hit_frame(run: &LabelRun, clip_len: usize, mode: HitFrameMode) -> u64 {
    match mode {
        HitFrameMode::InverseLabel => {
            // floor of the median clip start, then undo the labeling rule.
            let median = run.start + (run.len as u64 - 1) / 2;
            median + clip_len as u64 - 3
        }
        HitFrameMode::RunStart => run.start,
    }
}

/// Full event detection: smooth, extract runs, drop runs shorter than
/// `min_run_len`, and map the survivors to hit events.
pub fn detect_shots(seq: &[ClipPrediction], params: &EventParams) -> Result<Vec<HitEvent>> {
    if params.clip_len < 3 {
        return Err(Error::InvalidInput(format!(
            "clip_len must be >= 3, got {}",
            params.clip_len
        )));
    }
    if params.min_run_len < 1 {
        return Err(Error::InvalidInput("min_run_len must be >= 1".into()));
    }
    let smoothed = smooth_predictions(seq, params.smooth_window)?;
    let events = extract_events(&smoothed)
        .into_iter()
        .filter(|run| run.len >= params.min_run_len)
        .map(|run| HitEvent {
            hit_frame: run_to_hit_frame(&run, params.clip_len, params.hit_frame_mode),
            hitter: run.hitter,
            run_start: run.start,
            run_len: run.len,
        })
        .collect();
    Ok(events)
}

/// Write the events dump: `hit_frame,hitter,run_start,run_len`.
pub fn write_events_csv(events: &[HitEvent]) -> String {
    let mut out = String::from("hit_frame,hitter,run_start,run_len\n");
    for e in events {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.hit_frame, e.hitter, e.run_start, e.run_len
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(labels: &[Option<Player>]) -> Vec<ClipPrediction> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| ClipPrediction::new(i as u64, l))
            .collect()
    }

    const A: Option<Player> = Some(Player::A);
    const B: Option<Player> = Some(Player::B);
    const N: Option<Player> = None;

    #[test]
    fn hit_at_frame_five_labels_starts_two_three_four() {
        let clips = label_windows(&[(5, Player::A)], 20, 5).unwrap();
        let positive: Vec<u64> = clips
            .iter()
            .filter(|c| c.label.is_some())
            .map(|c| c.clip_start)
            .collect();
        assert_eq!(positive, vec![2, 3, 4]);
        assert!(clips
            .iter()
            .all(|c| c.label.is_none() || c.label == Some(Player::A)));
    }

    #[test]
    fn no_hits_labels_everything_none() {
        let clips = label_windows(&[], 50, 5).unwrap();
        assert_eq!(clips.len(), 46);
        assert!(clips.iter().all(|c| c.label.is_none()));
    }

    #[test]
    fn hit_at_frame_one_labels_only_start_zero() {
        let clips = label_windows(&[(1, Player::B)], 20, 5).unwrap();
        let positive: Vec<u64> = clips
            .iter()
            .filter(|c| c.label.is_some())
            .map(|c| c.clip_start)
            .collect();
        assert_eq!(positive, vec![0]);
    }

    #[test]
    fn clip_overlapping_two_hits_takes_the_earlier() {
        // Hits at 5 (A) and 7 (B): clip starting 4 spans 4..=8 and contains
        // both strictly interior; it must take A's label.
        let clips = label_windows(&[(5, Player::A), (7, Player::B)], 20, 5).unwrap();
        assert_eq!(clips[4].label, Some(Player::A));
    }

    #[test]
    fn short_clip_len_is_an_error() {
        assert!(label_windows(&[], 10, 2).is_err());
    }

    #[test]
    fn unsorted_or_out_of_range_hits_are_errors() {
        assert!(label_windows(&[(5, Player::A), (5, Player::B)], 20, 5).is_err());
        assert!(label_windows(&[(25, Player::A)], 20, 5).is_err());
    }

    #[test]
    fn smoothing_fills_isolated_gap() {
        let out = smooth_predictions(&seq(&[A, N, A, A, N]), 3).unwrap();
        let labels: Vec<_> = out.iter().map(|c| c.label).collect();
        assert_eq!(labels, vec![A, A, A, A, N]);
    }

    #[test]
    fn smoothing_removes_isolated_flip() {
        let out = smooth_predictions(&seq(&[N, A, N]), 3).unwrap();
        let labels: Vec<_> = out.iter().map(|c| c.label).collect();
        assert_eq!(labels, vec![N, N, N]);
    }

    #[test]
    fn smoothing_keeps_constant_sequence() {
        let input = seq(&[A; 9]);
        let out = smooth_predictions(&input, 5).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn even_smoothing_window_is_an_error() {
        assert!(smooth_predictions(&seq(&[N, N]), 4).is_err());
    }

    #[test]
    fn smoothing_matches_mode_oracle_on_random_sequences() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let labels = [N, A, B];
        for case in 0..1000 {
            let len = 1 + (next() % 40) as usize;
            let window = [3, 5, 7][(next() % 3) as usize];
            let input = seq(&(0..len)
                .map(|_| labels[(next() % 3) as usize])
                .collect::<Vec<_>>());
            let out = smooth_predictions(&input, window).unwrap();
            // Independent mode computation per position.
            for i in 0..len {
                let half = window / 2;
                let lo = i.saturating_sub(half);
                let hi = (i + half + 1).min(len);
                let count = |l: Option<Player>| input[lo..hi].iter().filter(|c| c.label == l).count();
                let (cn, ca, cb) = (count(N), count(A), count(B));
                let expect = if cn >= ca && cn >= cb {
                    N
                } else if ca >= cb {
                    A
                } else {
                    B
                };
                assert_eq!(out[i].label, expect, "case {case}, position {i}");
            }
        }
    }

    #[test]
    fn paper_example_sequence_yields_single_run() {
        let runs = extract_events(&seq(&[N, N, A, A, A, N, N]));
        assert_eq!(
            runs,
            vec![LabelRun {
                hitter: Player::A,
                start: 2,
                len: 3
            }]
        );
    }

    #[test]
    fn all_none_yields_no_runs() {
        assert!(extract_events(&seq(&[N; 6])).is_empty());
    }

    #[test]
    fn adjacent_runs_split_on_label_change() {
        let runs = extract_events(&seq(&[A, A, B, B]));
        assert_eq!(
            runs,
            vec![
                LabelRun {
                    hitter: Player::A,
                    start: 0,
                    len: 2
                },
                LabelRun {
                    hitter: Player::B,
                    start: 2,
                    len: 2
                },
            ]
        );
    }

    #[test]
    fn run_maps_back_to_hit_frame() {
        let run = LabelRun {
            hitter: Player::A,
            start: 2,
            len: 3,
        };
        assert_eq!(run_to_hit_frame(&run, 5, HitFrameMode::InverseLabel), 5);
        assert_eq!(run_to_hit_frame(&run, 5, HitFrameMode::RunStart), 2);

        let single = LabelRun {
            hitter: Player::B,
            start: 9,
            len: 1,
        };
        assert_eq!(run_to_hit_frame(&single, 5, HitFrameMode::InverseLabel), 11);

        let even = LabelRun {
            hitter: Player::A,
            start: 10,
            len: 4,
        };
        // Median of {10,11,12,13} floors to 11.
        assert_eq!(run_to_hit_frame(&even, 5, HitFrameMode::InverseLabel), 13);
    }

    #[test]
    fn paper_example_detects_one_event() {
        let events = detect_shots(&seq(&[N, N, A, A, A, N, N]), &EventParams::default()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].hitter, Player::A);
        assert_eq!(events[0].run_start, 2);
        assert_eq!(events[0].run_len, 3);
        assert_eq!(events[0].hit_frame, 5);
    }

    #[test]
    fn empty_sequence_detects_nothing() {
        let events = detect_shots(&[], &EventParams::default()).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn well_separated_runs_detect_two_events() {
        let mut labels = vec![N; 30];
        labels[5] = A;
        labels[6] = A;
        labels[7] = A;
        labels[20] = B;
        labels[21] = B;
        labels[22] = B;
        let events = detect_shots(&seq(&labels), &EventParams::default()).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].hitter, Player::A);
        assert_eq!(events[1].hitter, Player::B);
        assert!(events[0].hit_frame < events[1].hit_frame);
    }

    #[test]
    fn single_clip_noise_is_dropped() {
        let mut labels = vec![N; 20];
        labels[4] = A;
        labels[5] = A;
        labels[6] = A;
        // Isolated single-clip B; the mode filter erases it, and even
        // unsmoothed it would fall below min_run_len.
        labels[14] = B;
        let events = detect_shots(&seq(&labels), &EventParams::default()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].hitter, Player::A);
    }

    #[test]
    fn round_trip_recovers_every_interior_hit_frame() {
        let num_frames = 1000u64;
        for h in 3..=(num_frames - 4) {
            for hitter in [Player::A, Player::B] {
                let clips = label_windows(&[(h, hitter)], num_frames, 5).unwrap();
                let events = detect_shots(&clips, &EventParams::default()).unwrap();
                assert_eq!(events.len(), 1, "hit frame {h}");
                assert_eq!(events[0].hit_frame, h, "hit frame {h}");
                assert_eq!(events[0].hitter, hitter);
            }
        }
    }

    #[test]
    fn events_csv_has_header_and_rows() {
        let events = vec![HitEvent {
            hit_frame: 45,
            hitter: Player::A,
            run_start: 42,
            run_len: 3,
        }];
        let csv = write_events_csv(&events);
        assert_eq!(csv, "hit_frame,hitter,run_start,run_len\n45,A,42,3\n");
    }
}
