//! Shuttlecock trajectory denoising and heatmap supervision targets.
//!
//! The denoising chain runs in three passes over a dense per-frame sequence:
//!
//! 1. [`remove_jumps`] — flag detections far from their local sliding median.
//! 2. [`trim_static_ends`] — drop the static pre-serve / post-rally padding.
//! 3. [`interpolate_gaps`] — linearly fill short gaps between detections.
//!
//! No pass ever moves a detected coordinate; denoising only changes
//! provenance and fills absent frames. [`render_heatmap`] produces the
//! Gaussian supervision target used to train the detector itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::FrameDetections;
use crate::types::Point;

/// How a trajectory point came to hold (or lack) its position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Reported by the detector.
    Detected,
    /// Filled by gap interpolation.
    Interpolated,
    /// Flagged by denoising; the original coordinates are kept for
    /// inspection but the point no longer counts as present.
    Removed,
    /// No detection and no fill.
    Missing,
}

/// Per-frame shuttlecock position, possibly absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub frame_index: u64,
    pub position: Option<Point>,
    pub confidence: f64,
    pub provenance: Provenance,
}

impl TrajectoryPoint {
    pub fn detected(frame_index: u64, position: Point, confidence: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            frame_index,
            position: Some(position),
            confidence,
            provenance: Provenance::Detected,
        }
    }

    pub fn missing(frame_index: u64) -> TrajectoryPoint {
        TrajectoryPoint {
            frame_index,
            position: None,
            confidence: 0.0,
            provenance: Provenance::Missing,
        }
    }

    /// Present means the point participates in the reconstructed track:
    /// detected or interpolated, with a position.
    pub fn is_present(&self) -> bool {
        matches!(
            self.provenance,
            Provenance::Detected | Provenance::Interpolated
        ) && self.position.is_some()
    }
}

/// Build a dense per-frame track from a sparse detection stream, taking the
/// highest-confidence shuttle candidate per frame. `num_frames` extends the
/// track past the last detection when the video is known to be longer.
pub fn track_from_detections(
    detections: &[FrameDetections],
    num_frames: Option<u64>,
) -> Vec<TrajectoryPoint> {
    let last = detections.last().map(|f| f.frame_index + 1).unwrap_or(0);
    let len = num_frames.unwrap_or(0).max(last);
    let mut track: Vec<TrajectoryPoint> =
        (0..len).map(TrajectoryPoint::missing).collect();
    for frame in detections {
        if let Some(best) = frame.best_shuttle() {
            track[frame.frame_index as usize] = TrajectoryPoint::detected(
                frame.frame_index,
                Point::new(best.x, best.y),
                best.confidence,
            );
        }
    }
    track
}

fn ensure_dense(points: &[TrajectoryPoint]) -> Result<()> {
    for pair in points.windows(2) {
        if pair[1].frame_index != pair[0].frame_index + 1 {
            return Err(Error::InvalidInput(format!(
                "trajectory must be dense: frame {} follows {}",
                pair[1].frame_index, pair[0].frame_index
            )));
        }
    }
    Ok(())
}

fn median_of(sorted: &mut Vec<f64>) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Flag detections that jump away from the local trajectory.
///
/// For every detected point, the componentwise median of the *other*
/// present points within the centered window is computed; a point whose
/// Euclidean distance from that median point exceeds `threshold` is marked
/// [`Provenance::Removed`]. All medians are taken against the input state,
/// so the outcome does not depend on scan order. Points with fewer than two
/// present neighbors in their window are kept. Coordinates are never
/// altered.
pub fn remove_jumps(
    points: &[TrajectoryPoint],
    window: usize,
    threshold: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "median window must be odd and >= 3, got {window}"
        )));
    }
    if threshold <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "jump threshold must be positive, got {threshold}"
        )));
    }
    ensure_dense(points)?;
    let half = window / 2;
    let mut out = points.to_vec();
    for (i, point) in points.iter().enumerate() {
        if point.provenance != Provenance::Detected {
            continue;
        }
        let Some(pos) = point.position else { continue };
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(points.len());
        let mut xs = Vec::with_capacity(window);
        let mut ys = Vec::with_capacity(window);
        for (j, neighbor) in points.iter().enumerate().take(hi).skip(lo) {
            if j == i || !neighbor.is_present() {
                continue;
            }
            let p = neighbor.position.unwrap();
            xs.push(p.x);
            ys.push(p.y);
        }
        if xs.len() < 2 {
            continue;
        }
        let median = Point::new(median_of(&mut xs), median_of(&mut ys));
        if pos.distance(median) > threshold {
            out[i].provenance = Provenance::Removed;
        }
    }
    Ok(out)
}

/// The frame interval kept by [`trim_static_ends`]: inclusive on both ends.
pub type FrameInterval = (u64, u64);

/// Remove the static shuttle padding at the start and end of a video.
///
/// A *static run* is a maximal sequence of present points whose consecutive
/// displacements are all at most `motion_eps`. If the run touching the
/// start (or end) of the sequence spans at least `min_run` frames it is
/// trimmed: its points are marked [`Provenance::Removed`]. Returns the
/// trimmed sequence and the kept interval; a fully static sequence keeps
/// nothing and yields `None`.
pub fn trim_static_ends(
    points: &[TrajectoryPoint],
    motion_eps: f64,
    min_run: u64,
) -> Result<(Vec<TrajectoryPoint>, Option<FrameInterval>)> {
    if motion_eps <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "motion_eps must be positive, got {motion_eps}"
        )));
    }
    if min_run < 1 {
        return Err(Error::InvalidInput("min_run must be >= 1".into()));
    }
    ensure_dense(points)?;
    let mut out = points.to_vec();
    let present: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_present())
        .map(|(i, _)| i)
        .collect();
    if points.is_empty() {
        return Ok((out, None));
    }
    let full = (points[0].frame_index, points[points.len() - 1].frame_index);
    if present.len() < 2 {
        // Nothing ever moves; treat as fully static.
        for idx in present {
            out[idx].provenance = Provenance::Removed;
        }
        return Ok((out, None));
    }

    let moved = |a: usize, b: usize| -> bool {
        let pa = points[a].position.unwrap();
        let pb = points[b].position.unwrap();
        pa.distance(pb) > motion_eps
    };

    // First and last adjacent present pair with displacement > motion_eps.
    let first_motion = (0..present.len() - 1).find(|&k| moved(present[k], present[k + 1]));
    let Some(first_motion) = first_motion else {
        // Fully static.
        for idx in present {
            out[idx].provenance = Provenance::Removed;
        }
        return Ok((out, None));
    };
    let last_motion = (0..present.len() - 1)
        .rev()
        .find(|&k| moved(present[k], present[k + 1]))
        .unwrap();

    // Prefix run covers the sequence start up to the last point before the
    // first motion; suffix run covers the first point after the last motion
    // through the sequence end.
    let mut start = full.0;
    let prefix_end = points[present[first_motion]].frame_index;
    if prefix_end - full.0 + 1 >= min_run {
        start = prefix_end + 1;
    }
    let mut end = full.1;
    let suffix_start = points[present[last_motion + 1]].frame_index;
    if full.1 - suffix_start + 1 >= min_run {
        end = suffix_start - 1;
    }
    if start > end {
        for idx in present {
            out[idx].provenance = Provenance::Removed;
        }
        return Ok((out, None));
    }
    for idx in present {
        let f = points[idx].frame_index;
        if f < start || f > end {
            out[idx].provenance = Provenance::Removed;
        }
    }
    Ok((out, Some((start, end))))
}

/// Linearly fill short absent runs strictly between two detections.
///
/// A maximal run of non-detected frames of length at most `max_gap`, with a
/// detected point immediately on both sides, is filled by linear
/// interpolation between those anchors and marked
/// [`Provenance::Interpolated`]. Longer runs and runs touching either end
/// of the sequence are left as they are. Detected points are never altered.
pub fn interpolate_gaps(points: &[TrajectoryPoint], max_gap: u64) -> Result<Vec<TrajectoryPoint>> {
    ensure_dense(points)?;
    let mut out = points.to_vec();
    let n = points.len();
    let mut i = 0;
    while i < n {
        if points[i].provenance == Provenance::Detected {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && points[i].provenance != Provenance::Detected {
            i += 1;
        }
        let run_end = i; // exclusive
        let touches_start = run_start == 0;
        let touches_end = run_end == n;
        let len = (run_end - run_start) as u64;
        if touches_start || touches_end || len > max_gap {
            continue;
        }
        let left = &points[run_start - 1];
        let right = &points[run_end];
        let (Some(lp), Some(rp)) = (left.position, right.position) else {
            continue;
        };
        let span = (right.frame_index - left.frame_index) as f64;
        for k in run_start..run_end {
            let t = (points[k].frame_index - left.frame_index) as f64 / span;
            out[k] = TrajectoryPoint {
                frame_index: points[k].frame_index,
                position: Some(Point::new(
                    lp.x + (rp.x - lp.x) * t,
                    lp.y + (rp.y - lp.y) * t,
                )),
                confidence: 0.0,
                provenance: Provenance::Interpolated,
            };
        }
    }
    Ok(out)
}

/// A 2D Gaussian supervision target.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: u32,
    pub height: u32,
    pub sigma: f64,
    values: Vec<f32>,
}

impl Heatmap {
    pub fn value(&self, x: u32, y: u32) -> f32 {
        self.values[(y * self.width + x) as usize]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Render the supervision heatmap for an optional target pixel:
/// `value(u,v) = exp(-((u-x)^2 + (v-y)^2) / (2 sigma^2))`, all zeros when
/// the target is absent. The peak value at the target pixel is exactly 1.
pub fn render_heatmap(
    target: Option<(u32, u32)>,
    sigma: f64,
    width: u32,
    height: u32,
) -> Result<Heatmap> {
    if sigma <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let mut values = vec![0.0f32; (width as usize) * (height as usize)];
    if let Some((tx, ty)) = target {
        if tx >= width || ty >= height {
            return Err(Error::InvalidInput(format!(
                "target ({tx},{ty}) outside {width}x{height} grid"
            )));
        }
        let denom = 2.0 * sigma * sigma;
        for v in 0..height {
            for u in 0..width {
                let du = u as f64 - tx as f64;
                let dv = v as f64 - ty as f64;
                values[(v * width + u) as usize] = (-(du * du + dv * dv) / denom).exp() as f32;
            }
        }
    }
    Ok(Heatmap {
        width,
        height,
        sigma,
        values,
    })
}

/// Write the per-frame debug dump: `frame,x,y,provenance` with empty
/// coordinates for absent frames.
pub fn write_track_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from("frame,x,y,provenance\n");
    for p in points {
        let prov = match p.provenance {
            Provenance::Detected => "detected",
            Provenance::Interpolated => "interpolated",
            Provenance::Removed => "removed",
            Provenance::Missing => "missing",
        };
        match p.position {
            Some(pos) => out.push_str(&format!("{},{},{},{}\n", p.frame_index, pos.x, pos.y, prov)),
            None => out.push_str(&format!("{},,,{}\n", p.frame_index, prov)),
        }
    }
    out
}
