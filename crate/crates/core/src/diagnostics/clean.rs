use serde::{Deserialize, Serialize};

use crate::discretize::{Interval, Profile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanInterval {
    pub lo: f64,
    pub hi: f64,
    /// First and last node of the run.
    pub nodes: (usize, usize),
    pub well: f64,
    pub sup_deviation: f64,
}

impl CleanInterval {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// Centers of all clean sub-intervals of minimal length `min_len`.
    pub fn clean_point_range(&self, min_len: f64) -> (f64, f64) {
        (self.lo + 0.5 * min_len, self.hi - 0.5 * min_len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanIntervalReport {
    pub rho: f64,
    pub min_len: f64,
    pub intervals: Vec<CleanInterval>,
    pub clean_points: Vec<f64>,
}

impl CleanIntervalReport {
    /// Clean points at which the profile lies within `ρ` of `well`.
    pub fn points_for(&self, well: f64) -> Vec<f64> {
        self.intervals
            .iter()
            .filter(|c| c.well == well)
            .map(CleanInterval::center)
            .collect()
    }
}

fn node_span(q: &Profile, search: &Interval) -> Result<(usize, usize)> {
    let g = q.grid;
    let tol = 1e-9 * g.h;
    if search.lo < -g.half_width - tol || search.hi > g.half_width + tol || !(search.lo < search.hi) {
        return Err(Error::Domain(format!(
            "search window [{}, {}] outside the grid [-{R}, {R}]",
            search.lo,
            search.hi,
            R = g.half_width
        )));
    }
    let first = (0..g.n).find(|&i| g.x(i) >= search.lo - tol);
    let last = (0..g.n).rev().find(|&i| g.x(i) <= search.hi + tol);
    match (first, last) {
        (Some(a), Some(b)) if a <= b => Ok((a, b)),
        _ => Err(Error::Domain("search window contains no node".into())),
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Precondition(format!("rho = {rho} outside (0, 1)")));
    }
    Ok(())
}

fn report(rho: f64, mut intervals: Vec<CleanInterval>) -> CleanIntervalReport {
    intervals.sort_by(|a, b| a.nodes.cmp(&b.nodes).then(a.well.total_cmp(&b.well)));
    let clean_points = intervals.iter().map(CleanInterval::center).collect();
    CleanIntervalReport {
        rho,
        min_len: rho.ln().abs(),
        intervals,
        clean_points,
    }
}

/// Maximal node runs within `ρ` of a well whose extent is at least `|ln ρ|`,
/// found by one pass per well.
pub fn find_clean_intervals(q: &Profile, rho: f64, search: &Interval, wells: &[f64]) -> Result<CleanIntervalReport> {
    check_rho(rho)?;
    let (a, b) = node_span(q, search)?;
    let g = q.grid;
    let min_len = rho.ln().abs();
    let mut out = Vec::new();
    for &z in wells {
        let mut i = a;
        while i <= b {
            if (q.values[i] - z).abs() > rho {
                i += 1;
                continue;
            }
            let start = i;
            let mut sup = 0.0f64;
            while i <= b && (q.values[i] - z).abs() <= rho {
                sup = sup.max((q.values[i] - z).abs());
                i += 1;
            }
            let end = i - 1;
            if g.x(end) - g.x(start) >= min_len {
                out.push(CleanInterval {
                    lo: g.x(start),
                    hi: g.x(end),
                    nodes: (start, end),
                    well: z,
                    sup_deviation: sup,
                });
            }
        }
    }
    Ok(report(rho, out))
}

/// Same report by examining every node pair.
pub fn find_clean_intervals_brute(
    q: &Profile,
    rho: f64,
    search: &Interval,
    wells: &[f64],
) -> Result<CleanIntervalReport> {
    check_rho(rho)?;
    let (a, b) = node_span(q, search)?;
    let g = q.grid;
    let min_len = rho.ln().abs();
    let close = |i: usize, z: f64| (q.values[i] - z).abs() <= rho;
    let mut out = Vec::new();
    for &z in wells {
        for i in a..=b {
            let mut sup = 0.0f64;
            for j in i..=b {
                if !close(j, z) {
                    break;
                }
                sup = sup.max((q.values[j] - z).abs());
                let maximal = (i == a || !close(i - 1, z)) && (j == b || !close(j + 1, z));
                if maximal && g.x(j) - g.x(i) >= min_len {
                    out.push(CleanInterval {
                        lo: g.x(i),
                        hi: g.x(j),
                        nodes: (i, j),
                        well: z,
                        sup_deviation: sup,
                    });
                }
            }
        }
    }
    Ok(report(rho, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Grid;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn layer_tail_is_clean_beyond_forty() {
        let g = Grid::with_spacing(200.0, 0.05).unwrap();
        let q = Profile::sample(g, |x| PI + 2.0 * x.atan(), 0.0, TAU);
        let rep = find_clean_intervals(&q, 0.05, &Interval::new(-200.0, 200.0), &[0.0, TAU]).unwrap();
        let right: Vec<_> = rep.intervals.iter().filter(|c| c.well == TAU).collect();
        assert_eq!(right.len(), 1);
        // 2 arctan(1/x) <= 0.05 from x = 1/tan(0.025)
        let edge = 1.0 / 0.025f64.tan();
        assert!((right[0].lo - edge).abs() <= g.h);
        assert!(rep.intervals.iter().all(|c| c.len() >= 0.05f64.ln().abs()));
    }

    #[test]
    fn constant_is_one_interval() {
        let g = Grid::new(10.0, 201).unwrap();
        let q = Profile::constant(g, 0.0);
        let rep = find_clean_intervals(&q, 0.1, &Interval::new(-10.0, 10.0), &[0.0, TAU]).unwrap();
        assert_eq!(rep.intervals.len(), 1);
        assert_eq!(rep.intervals[0].nodes, (0, 200));
        assert_eq!(rep.clean_points, vec![0.0]);
    }

    #[test]
    fn short_runs_are_filtered() {
        let g = Grid::new(2.0, 401).unwrap();
        let q = Profile::sample(g, |x| if x.abs() < 0.2 { PI } else { 0.0 }, 0.0, 0.0);
        let rep = find_clean_intervals(&q, 0.5, &Interval::new(-1.0, 1.0), &[0.0, TAU, PI]).unwrap();
        assert!(rep.intervals.iter().all(|c| c.well == 0.0));
        assert_eq!(rep.intervals.len(), 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Grid::new(2.0, 41).unwrap();
        let q = Profile::constant(g, 0.0);
        assert!(matches!(
            find_clean_intervals(&q, 0.1, &Interval::new(-3.0, 1.0), &[0.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            find_clean_intervals(&q, 1.5, &Interval::new(-1.0, 1.0), &[0.0]),
            Err(Error::Precondition(_))
        ));
    }
}
