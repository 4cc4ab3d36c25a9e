//! Normalizing connectors, shift equivalence and the agreement loop.

use std::collections::{HashMap, VecDeque};

use super::{
    collapse_carried, cutting_connector, nu_profile, shift_carried, split_carried, transport_through_base_split,
    CarriedPosition,
};
use crate::error::{Result, TtError};
use crate::moves::{self, LaminationProxy, Move, SplitDirection, SplitMove};
use crate::orbit::orbit_certificate;
use crate::track_core::{check_measure, BranchId, BranchKind, TrainTrack};

/// Shifts the carried track until the connector over `e` is special: large
/// and small branches alternate, starting and ending large, and the turns
/// at interior switches alternate sides. Returns the shifts made.
pub fn normalize_over(pos: &CarriedPosition, e: BranchId) -> Result<(CarriedPosition, Vec<BranchId>)> {
    let mut cur = pos.clone();
    let mut shifts = Vec::new();
    let limit = 4 * cur.carried.branch_count() + 4;
    loop {
        let conn = cutting_connector(&cur, e)?.ok_or(TtError::CarriedBySplit(e))?;
        let m = conn.branches.len();
        let t = &conn.turns;
        let target = if m >= 2 && !t[0].outgoing {
            Some(0)
        } else if m >= 2 && t[m - 2].outgoing {
            Some(m - 1)
        } else {
            (0..t.len().saturating_sub(1)).find(|&i| t[i] == t[i + 1]).map(|i| i + 1)
        };
        let Some(i) = target else { return Ok((cur, shifts)) };
        if shifts.len() >= limit {
            return Err(TtError::NonTermination(format!("connector over {} does not normalize", e)));
        }
        let b = conn.branches[i].branch;
        cur = shift_carried(&cur, b)?;
        shifts.push(b);
    }
}

/// A shift word taking `a` to a relabeling of `b`, by breadth-first search
/// over the shift class of `a`.
pub fn shift_equivalent(a: &TrainTrack, b: &TrainTrack) -> Option<Vec<BranchId>> {
    if a.switch_count() != b.switch_count() || a.punctures().len() != b.punctures().len() {
        return None;
    }
    let goal = orbit_certificate(b);
    let mut seen: HashMap<TrainTrack, (Option<TrainTrack>, BranchId)> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(a.clone(), (None, 0));
    queue.push_back(a.clone());
    while let Some(t) = queue.pop_front() {
        if orbit_certificate(&t) == goal {
            let mut word = Vec::new();
            let mut at = t;
            while let Some((Some(prev), m)) = seen.get(&at).cloned() {
                word.push(m);
                at = prev;
            }
            word.reverse();
            return Some(word);
        }
        for m in t.branches_of_kind(BranchKind::Mixed) {
            let Ok(out) = moves::shift(&t, m) else { continue };
            if !seen.contains_key(&out.track) {
                seen.insert(out.track.clone(), (Some(t.clone()), m));
                queue.push_back(out.track);
            }
        }
    }
    None
}

/// Outcome of the agreement loop.
#[derive(Clone, Debug)]
pub struct Agreement {
    /// Splits of the base, all in the direction of the lamination.
    pub base_word: Vec<SplitMove>,
    /// Moves of the carried track.
    pub carried_word: Vec<Move>,
    /// Both words interleaved in execution order, one side per entry.
    pub log: Vec<(Option<SplitMove>, Option<Move>)>,
    pub position: CarriedPosition,
    /// Shifts taking the final base to a relabeling of the final carried track.
    pub certificate: Vec<BranchId>,
    pub phases: usize,
}

struct Run {
    pos: CarriedPosition,
    lam: LaminationProxy,
    out_base: Vec<SplitMove>,
    out_carried: Vec<Move>,
    log: Vec<(Option<SplitMove>, Option<Move>)>,
}

impl Run {
    fn carried_move(&mut self, m: Move) -> Result<()> {
        let sigma = self.pos.carried().clone();
        self.pos = match m {
            Move::Split(s) => split_carried(&self.pos, s.at, s.direction)?,
            Move::Shift(b) => shift_carried(&self.pos, b)?,
            Move::Collapse(d, dir) => collapse_carried(&self.pos, d, dir)?,
        };
        self.lam = match (&self.lam, m) {
            (LaminationProxy::Measure(mu), _) => {
                let mu = moves::measure_after(&sigma, mu, m)?;
                if !check_measure(self.pos.carried(), &mu)?.is_empty() || !mu.is_positive() {
                    return Err(TtError::NotCarried(format!("carried track after {} loses the lamination", m)));
                }
                LaminationProxy::Measure(mu)
            }
            (lam, Move::Split(s)) => lam.after_split(&sigma, s)?,
            (lam, _) => lam.clone(),
        };
        self.out_carried.push(m);
        self.log.push((None, Some(m)));
        Ok(())
    }

    fn base_split(&mut self, mv: SplitMove) -> Result<()> {
        self.pos = transport_through_base_split(&self.pos, mv)?;
        self.out_base.push(mv);
        self.log.push((Some(mv), None));
        Ok(())
    }

    /// Splits the base wherever a split still carries the carried track.
    fn carried_splits(&mut self) -> Result<()> {
        'outer: loop {
            for e in self.pos.base().large_branches() {
                for d in [SplitDirection::Right, SplitDirection::Left] {
                    if super::carried_by_split(&self.pos, e, d)? {
                        self.base_split(SplitMove::new(e, d))?;
                        continue 'outer;
                    }
                }
            }
            return Ok(());
        }
    }
}

/// Splits the base and moves the carried track until the two are shift
/// equivalent. `lam` must be carried by the carried track.
pub fn agree(pos: &CarriedPosition, lam: &LaminationProxy) -> Result<Agreement> {
    if let LaminationProxy::Carried(_) = lam {
        return Err(TtError::Invalid("agree needs a measure, word or uniform proxy".into()));
    }
    if let LaminationProxy::Measure(mu) = lam {
        if !check_measure(pos.carried(), mu)?.is_empty() || !mu.is_positive() {
            return Err(TtError::NotCarried("measure is not positive on the carried track".into()));
        }
    }
    let mut run = Run { pos: pos.clone(), lam: lam.clone(), out_base: Vec::new(), out_carried: Vec::new(), log: Vec::new() };
    let mut ones = nu_profile(&run.pos).ones();
    let mut phases = 0;
    let step_limit = 64 * (pos.carried().branch_count() + 1);
    let mut steps = 0;
    loop {
        run.carried_splits()?;
        let nu = nu_profile(&run.pos);
        let Some(e) = run.pos.base().large_branches().into_iter().find(|&e| nu.get(e) >= 2) else { break };
        phases += 1;
        loop {
            steps += 1;
            if steps > step_limit {
                return Err(TtError::NonTermination("too many carried moves".into()));
            }
            if cutting_connector(&run.pos, e)?.is_none() {
                // A collapse can leave the carried track carried by a split
                // at `e`; the base split then ends the phase.
                break;
            }
            let (p, shifts) = normalize_over(&run.pos, e)?;
            for b in shifts {
                run.carried_move(Move::Shift(b))?;
            }
            debug_assert_eq!(run.pos, p);
            let conn = cutting_connector(&run.pos, e)?.ok_or(TtError::CarriedBySplit(e))?;
            if conn.branches.len() == 1 {
                let ep = conn.branches[0].branch;
                let d = run.lam.direction(run.pos.carried(), ep)?;
                run.carried_move(Move::Split(SplitMove::new(ep, d)))?;
                run.base_split(SplitMove::new(e, d))?;
                break;
            }
            let d = if conn.turns[0].right { SplitDirection::Right } else { SplitDirection::Left };
            run.carried_move(Move::Collapse(conn.branches[1].branch, d))?;
            if nu_profile(&run.pos).get(e) == 1 {
                break;
            }
        }
        run.carried_splits()?;
        let now = nu_profile(&run.pos).ones();
        if now <= ones {
            return Err(TtError::NonTermination(format!("phase {} left {} branches crossed once, was {}", phases, now, ones)));
        }
        ones = now;
    }
    let certificate = shift_equivalent(run.pos.base(), run.pos.carried())
        .ok_or_else(|| TtError::NonTermination("final tracks are not shift equivalent".into()))?;
    Ok(Agreement {
        base_word: run.out_base,
        carried_word: run.out_carried,
        log: run.log,
        position: run.pos,
        certificate,
        phases,
    })
}
