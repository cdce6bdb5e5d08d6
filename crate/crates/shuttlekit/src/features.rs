//! Bounding-box geometry and encodings feeding the per-shot predictors.
//!
//! The location heads predict pixel offsets `(dx, dy)` anchored at the
//! CORNER — the lower corner of the hitter's box nearest the shuttlecock —
//! and read their input from the player box expanded by 1.8x horizontally
//! and 1.4x vertically about its center. The winner model reads five
//! regions: the net plus four court-boundary strips.

use crate::error::{Error, Result};
use crate::types::{BoundingBox, Player, Point};

/// Signed pixel offsets between the CORNER anchor and a target point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetPair {
    pub dx: f64,
    pub dy: f64,
}

/// Two-element player indicator conditioning the round-head model.
pub type HintVector = [f64; 2];

/// The lower corner of `bbox` closest to the shuttle; ties take the left
/// corner. The result always lies on the box's bottom edge.
pub fn nearest_lower_corner(bbox: &BoundingBox, shuttle: Point) -> Point {
    let left = Point::new(bbox.x_min, bbox.y_max);
    let right = Point::new(bbox.x_max, bbox.y_max);
    if shuttle.distance(left) <= shuttle.distance(right) {
        left
    } else {
        right
    }
}

/// Scale a box about its center by `(fw, fh)`, then clip to the frame.
/// Factors must be at least 1.
pub fn expand_box(
    bbox: &BoundingBox,
    fw: f64,
    fh: f64,
    frame_w: f64,
    frame_h: f64,
) -> Result<BoundingBox> {
    if fw < 1.0 || fh < 1.0 {
        return Err(Error::InvalidInput(format!(
            "expansion factors must be >= 1, got ({fw}, {fh})"
        )));
    }
    let center = bbox.center();
    let half_w = bbox.width() * fw / 2.0;
    let half_h = bbox.height() * fh / 2.0;
    let expanded = BoundingBox {
        x_min: center.x - half_w,
        y_min: center.y - half_h,
        x_max: center.x + half_w,
        y_max: center.y + half_h,
    };
    Ok(expanded.clip_to_frame(frame_w, frame_h))
}

/// Training-side offset label: `ground_truth - corner`.
pub fn offset_label(corner: Point, ground_truth: Point) -> OffsetPair {
    OffsetPair {
        dx: ground_truth.x - corner.x,
        dy: ground_truth.y - corner.y,
    }
}

/// Prediction-side inverse of [`offset_label`]: `corner + offset`, clamped
/// to the frame.
pub fn apply_offset(corner: Point, offset: OffsetPair, frame_w: f64, frame_h: f64) -> Point {
    Point::new(
        (corner.x + offset.dx).clamp(0.0, frame_w),
        (corner.y + offset.dy).clamp(0.0, frame_h),
    )
}

/// The five winner-model input regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnerRois {
    pub net: BoundingBox,
    pub left: BoundingBox,
    pub right: BoundingBox,
    pub top: BoundingBox,
    pub bottom: BoundingBox,
}

impl WinnerRois {
    /// Named regions in a fixed order, for export.
    pub fn named(&self) -> [(&'static str, BoundingBox); 5] {
        [
            ("net", self.net),
            ("left", self.left),
            ("right", self.right),
            ("top", self.top),
            ("bottom", self.bottom),
        ]
    }
}

/// Build the winner-model regions: the net box plus four court-boundary
/// strips of relative width `strip_frac`, all clipped to the frame.
pub fn winner_rois(
    court: &BoundingBox,
    net: &BoundingBox,
    strip_frac: f64,
    frame_w: f64,
    frame_h: f64,
) -> Result<WinnerRois> {
    if court.area() == 0.0 {
        return Err(Error::InvalidInput("degenerate court box".into()));
    }
    if !(0.0..0.5).contains(&strip_frac) || strip_frac == 0.0 {
        return Err(Error::InvalidInput(format!(
            "strip_frac must be in (0, 0.5), got {strip_frac}"
        )));
    }
    if net.x_max < court.x_min || net.x_min > court.x_max {
        return Err(Error::InvalidInput(
            "net does not overlap the court horizontally".into(),
        ));
    }
    let strip_w = court.width() * strip_frac;
    let strip_h = court.height() * strip_frac;
    let clip = |b: BoundingBox| b.clip_to_frame(frame_w, frame_h);
    Ok(WinnerRois {
        net: clip(*net),
        left: clip(BoundingBox {
            x_min: court.x_min,
            y_min: court.y_min,
            x_max: court.x_min + strip_w,
            y_max: court.y_max,
        }),
        right: clip(BoundingBox {
            x_min: court.x_max - strip_w,
            y_min: court.y_min,
            x_max: court.x_max,
            y_max: court.y_max,
        }),
        top: clip(BoundingBox {
            x_min: court.x_min,
            y_min: court.y_min,
            x_max: court.x_max,
            y_max: court.y_min + strip_h,
        }),
        bottom: clip(BoundingBox {
            x_min: court.x_min,
            y_min: court.y_max - strip_h,
            x_max: court.x_max,
            y_max: court.y_max,
        }),
    })
}

/// Player indicator: A is `[1,0]`, B is `[0,1]`.
pub fn encode_hint(player: Player) -> HintVector {
    match player {
        Player::A => [1.0, 0.0],
        Player::B => [0.0, 1.0],
    }
}

/// Pad a token sequence to `target_len` with sentinel-filled vectors.
///
/// Every token must have dimension `dim`; sequences longer than the target
/// are an error, never truncated. The sentinel default of -100 keeps
/// padded positions below any pixel-valued token, so shorter sequences
/// carry strictly smaller trailing values than longer ones.
pub fn pad_tokens(
    seq: &[Vec<f64>],
    target_len: usize,
    dim: usize,
    sentinel: f64,
) -> Result<Vec<Vec<f64>>> {
    if seq.len() > target_len {
        return Err(Error::InvalidInput(format!(
            "sequence of {} tokens exceeds target length {target_len}",
            seq.len()
        )));
    }
    for (i, token) in seq.iter().enumerate() {
        if token.len() != dim {
            return Err(Error::InvalidInput(format!(
                "token {i} has dimension {}, expected {dim}",
                token.len()
            )));
        }
    }
    let mut out = seq.to_vec();
    out.resize(target_len, vec![sentinel; dim]);
    Ok(out)
}

/// Default sentinel for absent tokens.
pub const TOKEN_SENTINEL: f64 = -100.0;

/// Serialize labeled rectangles: `name,x_min,y_min,x_max,y_max`.
pub fn write_rois_csv(rois: &[(&str, BoundingBox)]) -> String {
    let mut out = String::from("name,x_min,y_min,x_max,y_max\n");
    for (name, b) in rois {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            name, b.x_min, b.y_min, b.x_max, b.y_max
        ));
    }
    out
}
