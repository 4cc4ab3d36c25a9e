//! The line-based `.tt` format.
//!
//! ```text
//! tt v1
//! surface g=0 k=5
//! sw 0 L=0.0 A=3.1 B=4.0
//! punct 3.1.L
//! ```

use std::fmt::Write as _;

use super::{HalfBranchRef, Side, SurfaceSignature, SwitchRecord, TrainTrack};
use crate::error::{Result, TtError};

fn perr(line: usize, msg: impl Into<String>) -> TtError {
    TtError::Parse { line, msg: msg.into() }
}

fn parse_ref(line: usize, s: &str) -> Result<HalfBranchRef> {
    let (b, e) = s.split_once('.').ok_or_else(|| perr(line, format!("half-branch {:?} lacks an end", s)))?;
    let branch = b.parse().map_err(|_| perr(line, format!("bad branch id {:?}", b)))?;
    let end = match e {
        "0" => 0,
        "1" => 1,
        _ => return Err(perr(line, format!("bad end {:?}", e))),
    };
    Ok(HalfBranchRef::new(branch, end))
}

fn parse_kv<'a>(line: usize, tok: &'a str, key: &str) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| perr(line, format!("expected {}=..., found {:?}", key, tok)))
}

/// Parses a `.tt` document. The advisory surface line is cross-checked
/// against the recomputed signature whenever the track is maximal.
pub fn parse_tt(text: &str) -> Result<TrainTrack> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, header) = lines.next().ok_or_else(|| perr(1, "empty document"))?;
    if header != "tt v1" {
        return Err(perr(n, format!("expected header `tt v1`, found {:?}", header)));
    }
    let mut declared: Option<SurfaceSignature> = None;
    let mut switches = Vec::new();
    let mut marks = Vec::new();
    for (n, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks[0] {
            "surface" if toks.len() == 3 => {
                let g = parse_kv(n, toks[1], "g")?.parse().map_err(|_| perr(n, "bad genus"))?;
                let k = parse_kv(n, toks[2], "k")?.parse().map_err(|_| perr(n, "bad puncture count"))?;
                declared = Some(SurfaceSignature { genus: g, punctures: k });
            }
            "sw" if toks.len() == 5 => {
                let id = toks[1].parse().map_err(|_| perr(n, "bad switch id"))?;
                let l = parse_ref(n, parse_kv(n, toks[2], "L")?)?;
                let a = parse_ref(n, parse_kv(n, toks[3], "A")?)?;
                let b = parse_ref(n, parse_kv(n, toks[4], "B")?)?;
                switches.push(SwitchRecord::new(id, l, a, b));
            }
            "punct" if toks.len() == 2 => {
                marks.push(toks[1].parse::<Side>().map_err(|m| perr(n, m))?);
            }
            _ => return Err(perr(n, format!("unrecognized line {:?}", l))),
        }
    }
    let track = TrainTrack::new(switches, marks)?;
    if let (Some(d), true) = (declared, track.validate().all_ok()) {
        let actual = track.surface_signature()?;
        if actual != d {
            return Err(TtError::SignatureMismatch(d.to_string(), actual.to_string()));
        }
    }
    Ok(track)
}

/// Serializes in canonical order: switches by id, punctures by key.
pub fn write_tt(track: &TrainTrack) -> String {
    let mut s = String::from("tt v1\n");
    match track.surface_signature() {
        Ok(sig) => writeln!(s, "surface {}", sig).unwrap(),
        Err(_) => writeln!(s, "# surface unknown: track is not maximal").unwrap(),
    }
    for sw in track.switches() {
        writeln!(s, "sw {} L={} A={} B={}", sw.id, sw.large, sw.small_left, sw.small_right).unwrap();
    }
    for p in track.punctures() {
        writeln!(s, "punct {}", p).unwrap();
    }
    s
}
