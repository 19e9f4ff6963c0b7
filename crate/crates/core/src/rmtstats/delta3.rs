use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::unfold::UnfoldedSequence;

/// Least-squares deviation of the staircase from its best straight line
/// on `[x, x + l]`, evaluated in closed form.
///
/// `levels` must be sorted.
pub fn delta3_at(levels: &[f64], x: f64, l: f64) -> f64 {
    let start = levels.partition_point(|&e| e < x);
    let end = levels.partition_point(|&e| e <= x + l);
    // moments of n(u) = #{levels in [x, x+u]} on [0, l]
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (j, &e) in levels[start..end].iter().enumerate() {
        let u = e - x;
        s0 += l - u;
        s1 += 0.5 * (l * l - u * u);
        s2 += (2 * j + 1) as f64 * (l - u);
    }
    let s1c = s1 - 0.5 * l * s0;
    let v = (s2 - s0 * s0 / l - 12.0 * s1c * s1c / (l * l * l)) / l;
    v.max(0.0)
}

/// Window starts: every `l/4` across the sequence, or `n_positions`
/// evenly spaced starts when given.
pub fn window_starts(levels: &[f64], l: f64, n_positions: Option<usize>) -> Result<Vec<f64>> {
    let (Some(&first), Some(&last)) = (levels.first(), levels.last()) else {
        return Err(Error::NotEnoughData { what: "levels", have: 0, need: 2 });
    };
    let span = last - first;
    if !(l > 0.0) || span < 2.0 * l {
        return Err(Error::NotEnoughData { what: "sequence span in units of L", have: (span / l.max(1e-300)) as usize, need: 2 });
    }
    let room = span - l;
    Ok(match n_positions {
        Some(k) if k > 1 => (0..k).map(|i| first + room * i as f64 / (k - 1) as f64).collect(),
        Some(_) => alloc::vec![first + 0.5 * room],
        None => {
            let step = 0.25 * l;
            let count = (room / step) as usize + 1;
            (0..count).map(|i| first + step * i as f64).collect()
        }
    })
}

/// Spectral rigidity `Δ₃(L)` averaged over window positions.
pub fn delta3(seq: &UnfoldedSequence, l: f64, n_positions: Option<usize>) -> Result<f64> {
    let starts = window_starts(&seq.values, l, n_positions)?;
    Ok(starts.iter().map(|&x| delta3_at(&seq.values, x, l)).sum::<f64>() / starts.len() as f64)
}

/// `Δ₃` on several lengths; lengths too long for the sequence are skipped.
pub fn delta3_curve(seq: &UnfoldedSequence, lengths: &[f64], n_positions: Option<usize>) -> Vec<(f64, f64)> {
    lengths.iter().filter_map(|&l| delta3(seq, l, n_positions).ok().map(|v| (l, v))).collect()
}
