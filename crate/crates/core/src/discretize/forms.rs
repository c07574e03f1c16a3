use rayon::prelude::*;

use super::grid::{index_range, Interval, Profile, FAR};
use super::weights::KernelWeights;
use crate::error::Result;

/// Extended-index piece with a constant value (exterior) or window nodes.
#[derive(Debug, Clone, Copy)]
enum Piece {
    Window(usize, usize),
    Left(i64, i64),
    Right(i64, i64),
}

fn pieces(n: usize, lo: i64, hi: i64) -> Vec<Piece> {
    let n = n as i64;
    let mut out = Vec::new();
    if lo <= hi.min(-1) {
        out.push(Piece::Left(lo, hi.min(-1)));
    }
    let (a, b) = (lo.max(0), hi.min(n - 1));
    if a <= b {
        out.push(Piece::Window(a as usize, b as usize));
    }
    if lo.max(n) <= hi {
        out.push(Piece::Right(lo.max(n), hi));
    }
    out
}

/// `Σ_{j ∈ [a, b]} w_{|i - j|}` for a range entirely on one side of `i`.
fn range_weight(w: &KernelWeights, i: i64, a: i64, b: i64) -> f64 {
    if b < i {
        w.tail_sum(i - b) - w.tail_sum(i - a + 1)
    } else {
        w.tail_sum(a - i) - w.tail_sum(b - i + 1)
    }
}

/// `∬_{X×Y} (f(x) - f(y))(g(x) - g(y)) K(x - y)` with the paired weights.
pub(crate) fn pair_sum(
    w: &KernelWeights,
    f: &Profile,
    g: &Profile,
    x: &Interval,
    y: &Interval,
) -> f64 {
    let grid = f.grid;
    let n = grid.n;
    let h = grid.h;
    let (xl, xh) = index_range(&grid, x);
    let (yl, yh) = index_range(&grid, y);
    let xs = pieces(n, xl, xh);
    let ys = pieces(n, yl, yh);
    let ws = w.as_slice();
    let mut total = 0.0;
    for px in &xs {
        for py in &ys {
            total += match (*px, *py) {
                (Piece::Window(a, b), Piece::Window(c, d)) => (a..=b)
                    .into_par_iter()
                    .map(|i| {
                        let (fi, gi) = (f.values[i], g.values[i]);
                        let mut acc = 0.0;
                        for j in c..=d {
                            let k = i.abs_diff(j);
                            if k > 0 {
                                acc += ws[k] * (fi - f.values[j]) * (gi - g.values[j]);
                            }
                        }
                        acc
                    })
                    .collect::<Vec<f64>>()
                    .iter()
                    .sum::<f64>(),
                (Piece::Window(a, b), ext) | (ext, Piece::Window(a, b)) => {
                    let (lo, hi, cf, cg) = match ext {
                        Piece::Left(lo, hi) => (lo, hi, f.left, g.left),
                        Piece::Right(lo, hi) => (lo, hi, f.right, g.right),
                        Piece::Window(..) => unreachable!(),
                    };
                    (a..=b)
                        .map(|i| {
                            let df = f.values[i] - cf;
                            let dg = g.values[i] - cg;
                            if df == 0.0 || dg == 0.0 {
                                0.0
                            } else {
                                df * dg * range_weight(w, i as i64, lo, hi)
                            }
                        })
                        .sum::<f64>()
                }
                (Piece::Left(a, b), Piece::Right(c, d)) | (Piece::Right(c, d), Piece::Left(a, b)) => {
                    let df = f.left - f.right;
                    let dg = g.left - g.right;
                    if df == 0.0 || dg == 0.0 {
                        0.0
                    } else if a <= -FAR || d >= FAR {
                        f64::INFINITY
                    } else {
                        let s: f64 = (a..=b).map(|i| range_weight(w, i, c, d)).sum();
                        df * dg * s
                    }
                }
                _ => 0.0,
            };
        }
    }
    h * total
}

/// `[f]²_{K, X×Y}`.
pub fn seminorm_sq(w: &KernelWeights, f: &Profile, x: &Interval, y: &Interval) -> f64 {
    pair_sum(w, f, f, x, y)
}

/// `[f]_{K, X×Y}`.
pub fn seminorm(w: &KernelWeights, f: &Profile, x: &Interval, y: &Interval) -> f64 {
    seminorm_sq(w, f, x, y).sqrt()
}

/// `𝓑_{I,J}(f, g)`.
pub fn bilinear(
    w: &KernelWeights,
    f: &Profile,
    g: &Profile,
    i: &Interval,
    j: &Interval,
) -> Result<f64> {
    f.check_same_grid(g)?;
    Ok(pair_sum(w, f, g, i, j))
}
