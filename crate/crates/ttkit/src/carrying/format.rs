//! The line-based `.pos` format.
//!
//! ```text
//! pos v1
//! base
//! tt v1
//! sw 0 L=0.0 A=1.1 B=2.0
//! end
//! fiber 0
//! slice 0.1
//! fiber 1
//! slice 3.0
//! fork 4@0
//! slice 5.1 6.0
//! ```
//!
//! Strands are `branch.toward`, left to right. Each `fork`/`join` line
//! names the carried switch and its insertion index between the slices
//! around it. The carried track is derived from the strands on parse.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{CarriedPosition, Event, EventKind, Fiber, Strand};
use crate::error::{Result, TtError};
use crate::track_core::{parse_tt, write_tt, BranchId};

fn perr(line: usize, msg: impl Into<String>) -> TtError {
    TtError::Parse { line, msg: msg.into() }
}

fn parse_strand(line: usize, s: &str) -> Result<Strand> {
    let (b, t) = s.split_once('.').ok_or_else(|| perr(line, format!("strand {:?} lacks a direction", s)))?;
    let branch = b.parse().map_err(|_| perr(line, format!("bad branch id {:?}", b)))?;
    let toward = match t {
        "0" => 0,
        "1" => 1,
        _ => return Err(perr(line, format!("bad direction {:?}", t))),
    };
    Ok(Strand::new(branch, toward))
}

pub fn write_pos(pos: &CarriedPosition) -> String {
    let mut s = String::from("pos v1\nbase\n");
    s.push_str(&write_tt(pos.base()));
    s.push_str("end\n");
    for (b, f) in pos.fibers() {
        writeln!(s, "fiber {}", b).unwrap();
        for (k, slice) in f.slices.iter().enumerate() {
            let strands: Vec<String> = slice.iter().map(|x| format!("{}.{}", x.branch, x.toward)).collect();
            writeln!(s, "slice {}", strands.join(" ")).unwrap();
            if let Some(ev) = f.events.get(k) {
                let kind = match ev.kind {
                    EventKind::Fork => "fork",
                    EventKind::Join => "join",
                };
                writeln!(s, "{} {}@{}", kind, ev.switch, ev.at).unwrap();
            }
        }
    }
    s
}

pub fn parse_pos(text: &str) -> Result<CarriedPosition> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, "pos v1")) => {}
        Some((n, h)) => return Err(perr(n, format!("expected header `pos v1`, found {:?}", h))),
        None => return Err(perr(1, "empty document")),
    }
    match lines.next() {
        Some((_, "base")) => {}
        Some((n, _)) => return Err(perr(n, "expected `base`")),
        None => return Err(perr(1, "missing base block")),
    }
    let mut tt = String::new();
    let mut closed = false;
    for (_, l) in lines.by_ref() {
        if l == "end" {
            closed = true;
            break;
        }
        tt.push_str(l);
        tt.push('\n');
    }
    if !closed {
        return Err(perr(text.lines().count(), "base block is not closed by `end`"));
    }
    let base = parse_tt(&tt)?;
    let mut fibers: BTreeMap<BranchId, Fiber> = BTreeMap::new();
    let mut cur: Option<(BranchId, Fiber)> = None;
    for (n, l) in lines {
        let (head, rest) = l.split_once(' ').unwrap_or((l, ""));
        match head {
            "fiber" => {
                if let Some((b, f)) = cur.take() {
                    fibers.insert(b, f);
                }
                let b: BranchId = rest.trim().parse().map_err(|_| perr(n, "bad fiber branch"))?;
                if fibers.contains_key(&b) {
                    return Err(perr(n, format!("fiber {} given twice", b)));
                }
                cur = Some((b, Fiber { slices: Vec::new(), events: Vec::new() }));
            }
            "slice" => {
                let (_, f) = cur.as_mut().ok_or_else(|| perr(n, "slice outside a fiber"))?;
                if f.slices.len() != f.events.len() {
                    return Err(perr(n, "two slices without a switch between them"));
                }
                let slice = rest.split_whitespace().map(|t| parse_strand(n, t)).collect::<Result<Vec<_>>>()?;
                f.slices.push(slice);
            }
            "fork" | "join" => {
                let (_, f) = cur.as_mut().ok_or_else(|| perr(n, "switch outside a fiber"))?;
                if f.slices.len() != f.events.len() + 1 {
                    return Err(perr(n, "switch not preceded by a slice"));
                }
                let (id, at) = rest.trim().split_once('@').ok_or_else(|| perr(n, "expected <switch>@<index>"))?;
                let kind = if head == "fork" { EventKind::Fork } else { EventKind::Join };
                let switch = id.parse().map_err(|_| perr(n, "bad switch id"))?;
                let at = at.parse().map_err(|_| perr(n, "bad index"))?;
                f.events.push(Event { switch, kind, at });
            }
            _ => return Err(perr(n, format!("unrecognized line {:?}", l))),
        }
    }
    if let Some((b, f)) = cur {
        fibers.insert(b, f);
    }
    CarriedPosition::new(base, fibers)
}
