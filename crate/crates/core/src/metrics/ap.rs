//! Average precision with greedy confidence-ordered matching.

use super::iou::iou3d;
use crate::error::{Error, Result};
use crate::geom::OrientedBox3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredBox {
    pub frame: usize,
    pub confidence: f64,
    pub bbox: OrientedBox3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub frame: usize,
    pub bbox: OrientedBox3,
}

/// Outcome of matching one detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedDetection {
    pub detection: usize,
    pub gt: Option<usize>,
    /// Best IoU against any unmatched ground truth of the same frame.
    pub iou: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    /// `(recall, precision)` after each detection, in confidence order.
    pub points: Vec<(f64, f64)>,
    pub ap: f64,
    pub matches: Vec<MatchedDetection>,
}

/// AP over 3D IoU at `iou_threshold`.
pub fn average_precision(dets: &[ScoredBox], gts: &[GroundTruth], iou_threshold: f64) -> Result<PRCurve> {
    average_precision_with(dets, gts, iou_threshold, iou3d)
}

/// AP with a caller-supplied overlap measure.
pub fn average_precision_with<F>(
    dets: &[ScoredBox],
    gts: &[GroundTruth],
    iou_threshold: f64,
    overlap: F,
) -> Result<PRCurve>
where
    F: Fn(&OrientedBox3, &OrientedBox3) -> f64,
{
    if gts.is_empty() {
        return Err(Error::UndefinedRecall);
    }
    if let Some(d) = dets.iter().find(|d| !d.confidence.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite confidence {} in frame {}",
            d.confidence, d.frame
        )));
    }

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&i, &j| dets[j].confidence.total_cmp(&dets[i].confidence));

    let mut taken = vec![false; gts.len()];
    let mut matches = Vec::with_capacity(dets.len());
    let mut points = Vec::with_capacity(dets.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for &di in &order {
        let det = &dets[di];
        let best = gts
            .iter()
            .enumerate()
            .filter(|(gi, g)| !taken[*gi] && g.frame == det.frame)
            .map(|(gi, g)| (gi, overlap(&det.bbox, &g.bbox)))
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        let (gt, iou) = match best {
            Some((gi, iou)) if iou >= iou_threshold => {
                taken[gi] = true;
                tp += 1;
                (Some(gi), iou)
            }
            Some((_, iou)) => {
                fp += 1;
                (None, iou)
            }
            None => {
                fp += 1;
                (None, 0.0)
            }
        };
        matches.push(MatchedDetection {
            detection: di,
            gt,
            iou,
            confidence: det.confidence,
        });
        points.push((tp as f64 / gts.len() as f64, tp as f64 / (tp + fp) as f64));
    }

    Ok(PRCurve {
        ap: area_under_envelope(&points),
        points,
        matches,
    })
}

/// All-point interpolated area: precision at recall r is the best precision at any recall ≥ r.
pub fn area_under_envelope(points: &[(f64, f64)]) -> f64 {
    let mut envelope: Vec<f64> = points.iter().map(|p| p.1).collect();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (k, (recall, _)) in points.iter().enumerate() {
        if *recall > prev_recall {
            ap += (recall - prev_recall) * envelope[k];
            prev_recall = *recall;
        }
    }
    ap
}
