use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{feasible_point, BranchId, SwitchId, TrainTrack};
use crate::error::{Result, TtError};

/// Nonnegative rational weights on branches.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TransverseMeasure {
    pub weights: BTreeMap<BranchId, BigRational>,
}

impl TransverseMeasure {
    pub fn from_integers(w: impl IntoIterator<Item = (BranchId, i64)>) -> Self {
        TransverseMeasure { weights: w.into_iter().map(|(b, x)| (b, BigRational::from_integer(BigInt::from(x)))).collect() }
    }

    pub fn zero(track: &TrainTrack) -> Self {
        TransverseMeasure { weights: track.branches().map(|b| (b, BigRational::zero())).collect() }
    }

    pub fn get(&self, b: BranchId) -> BigRational {
        self.weights.get(&b).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_positive(&self) -> bool {
        self.weights.values().all(|w| w.is_positive())
    }

    pub fn scale(&self, f: &BigRational) -> Self {
        TransverseMeasure { weights: self.weights.iter().map(|(b, w)| (*b, w * f)).collect() }
    }

    /// Smallest weight, if any.
    pub fn min_weight(&self) -> Option<BigRational> {
        self.weights.values().min().cloned()
    }
}

impl fmt::Display for TransverseMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, w) in &self.weights {
            writeln!(f, "w {} {}", b, w)?;
        }
        Ok(())
    }
}

/// Parses the format written by `Display`: one `w <branch> <weight>` line
/// per branch, weights as integers or fractions `p/q`, `#` comments allowed.
pub fn parse_measure(text: &str) -> Result<TransverseMeasure> {
    let mut weights = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| TtError::Parse { line: i + 1, msg };
        let t: Vec<&str> = line.split_whitespace().collect();
        let ["w", b, x] = t.as_slice() else {
            return Err(perr(format!("expected `w <branch> <weight>`, found {:?}", line)));
        };
        let b: BranchId = b.parse().map_err(|_| perr(format!("bad branch {:?}", b)))?;
        let x: BigRational = x.parse().map_err(|_| perr(format!("bad weight {:?}", x)))?;
        if x.is_negative() {
            return Err(perr(format!("negative weight on branch {}", b)));
        }
        if weights.insert(b, x).is_some() {
            return Err(perr(format!("branch {} weighted twice", b)));
        }
    }
    Ok(TransverseMeasure { weights })
}

/// Switches whose large-side weight differs from the small-side sum.
pub fn check_measure(track: &TrainTrack, mu: &TransverseMeasure) -> Result<Vec<SwitchId>> {
    for b in mu.weights.keys() {
        if !track.has_branch(*b) {
            return Err(TtError::UnknownBranch(*b));
        }
    }
    if let Some(b) = track.branches().find(|b| !mu.weights.contains_key(b)) {
        return Err(TtError::Invalid(format!("measure has no weight on branch {}", b)));
    }
    Ok(track
        .switches()
        .iter()
        .filter(|s| mu.get(s.large.branch) != mu.get(s.small_left.branch) + mu.get(s.small_right.branch))
        .map(|s| s.id)
        .collect())
}

/// A strictly positive transverse measure, normalized so the smallest
/// weight is 1, or `None` when the switch equations force a zero.
pub fn is_recurrent(track: &TrainTrack) -> Option<TransverseMeasure> {
    let ids: Vec<BranchId> = track.branches().collect();
    let col: BTreeMap<BranchId, usize> = ids.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let n = ids.len();
    // Substitute w = 1 + y with y >= 0.
    let mut a = Vec::new();
    let mut rhs = Vec::new();
    for s in track.switches() {
        let mut row = vec![BigRational::zero(); n];
        row[col[&s.large.branch]] += BigRational::one();
        row[col[&s.small_left.branch]] -= BigRational::one();
        row[col[&s.small_right.branch]] -= BigRational::one();
        let r: BigRational = -row.iter().fold(BigRational::zero(), |acc, x| acc + x);
        a.push(row);
        rhs.push(r);
    }
    let y = feasible_point(&a, &rhs)?;
    let w: Vec<BigRational> = y.into_iter().map(|v| v + BigRational::one()).collect();
    let min = w.iter().min().cloned().unwrap_or_else(BigRational::one);
    Some(TransverseMeasure { weights: ids.into_iter().zip(w.into_iter().map(|v| v / &min)).collect() })
}

/// Switch matrix: one row per switch, `+1` on the large branch and `-1` on
/// each small branch, columns in branch order.
pub fn switch_matrix(track: &TrainTrack) -> Vec<Vec<BigRational>> {
    let col: BTreeMap<BranchId, usize> = track.branches().enumerate().map(|(i, b)| (b, i)).collect();
    track
        .switches()
        .iter()
        .map(|s| {
            let mut row = vec![BigRational::zero(); col.len()];
            row[col[&s.large.branch]] += BigRational::one();
            row[col[&s.small_left.branch]] -= BigRational::one();
            row[col[&s.small_right.branch]] -= BigRational::one();
            row
        })
        .collect()
}

/// A basis of the solution space of the switch equations, as vectors in
/// branch order, computed by exact row reduction.
pub fn measure_space_basis(track: &TrainTrack) -> Vec<Vec<BigRational>> {
    let mut a = switch_matrix(track);
    let n = track.branch_count();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].clone();
        for v in a[r].iter_mut() {
            *v /= &inv;
        }
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[i][f].clone();
            }
            v
        })
        .collect()
}
