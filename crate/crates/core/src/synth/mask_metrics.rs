//! Segmentation quality on binary masks: Dice overlap and the count of
//! false-positive connected components.

use crate::error::{Error, Result};
use crate::synth::image::Mask;

fn check_shapes(a: &Mask, b: &Mask) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch {
            a_h: a.height(),
            a_w: a.width(),
            b_h: b.height(),
            b_w: b.width(),
        });
    }
    Ok(())
}

/// Dice similarity coefficient, 2|A∩B| / (|A|+|B|). Two empty masks score
/// 1.0: predicting "no target" on a target-free image is correct.
pub fn dsc(pred: &Mask, gt: &Mask) -> Result<f64> {
    check_shapes(pred, gt)?;
    let mut intersection = 0usize;
    let mut size_pred = 0usize;
    let mut size_gt = 0usize;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        if p {
            size_pred += 1;
        }
        if g {
            size_gt += 1;
        }
        if p && g {
            intersection += 1;
        }
    }
    if size_pred + size_gt == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * intersection as f64 / (size_pred + size_gt) as f64)
}

/// Number of 8-connected components of `pred` with zero overlap with `gt`.
pub fn avg_fp(pred: &Mask, gt: &Mask) -> Result<usize> {
    check_shapes(pred, gt)?;
    let (h, w) = (pred.height(), pred.width());
    let mut visited = vec![false; h * w];
    let mut false_positives = 0usize;
    let mut stack = Vec::new();
    for start_y in 0..h {
        for start_x in 0..w {
            let start = start_y * w + start_x;
            if visited[start] || !pred.data()[start] {
                continue;
            }
            visited[start] = true;
            stack.push((start_y, start_x));
            let mut touches_gt = false;
            while let Some((y, x)) = stack.pop() {
                if gt.get(y, x) {
                    touches_gt = true;
                }
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dy == 0 && dx == 0 {
                            continue;
                        }
                        let ny = y as i64 + dy;
                        let nx = x as i64 + dx;
                        if ny < 0 || nx < 0 || ny >= h as i64 || nx >= w as i64 {
                            continue;
                        }
                        let (ny, nx) = (ny as usize, nx as usize);
                        let idx = ny * w + nx;
                        if !visited[idx] && pred.data()[idx] {
                            visited[idx] = true;
                            stack.push((ny, nx));
                        }
                    }
                }
            }
            if !touches_gt {
                false_positives += 1;
            }
        }
    }
    Ok(false_positives)
}
