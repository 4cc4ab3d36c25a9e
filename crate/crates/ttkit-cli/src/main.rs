//! `ttkit` command-line front end.
//!
//! Exit codes: 0 on success, 1 when the library reports a domain error or
//! a predicate fails, 2 on a usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ttkit::ambient::{distortion, random_marking, tt_ball, twist_growth, AmbientOptions, MARKING_DEGREE};
use ttkit::carrying::{agree, parse_pos};
use ttkit::flat_cone::{cone_ball, FlatCone, LatticePoint};
use ttkit::generators::{catalog, pants_curves, PantsTrack};
use ttkit::moves::{apply_sequence, parse_word, LaminationProxy};
use ttkit::orbit::{orbit_certificate, same_orbit};
use ttkit::track_core::{is_recurrent, parse_measure, parse_tt, write_tt, TrainTrack, TransverseMeasure};
use ttkit::TtError;

#[derive(Parser)]
#[command(name = "ttkit", version, about = "Train-track calculus on punctured surfaces")]
struct Cli {
    /// Seed for the randomized steps (surface markings).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check slots, genericity, connectivity and maximality.
    Validate { track: PathBuf },
    /// List the complementary regions.
    Regions { track: PathBuf },
    /// Decide recurrence and print a positive measure.
    Recurrent { track: PathBuf },
    /// Replay a move word and print the resulting track.
    Apply { track: PathBuf, word: PathBuf },
    /// Enumerate a flat cone ball.
    Cone {
        track: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        radius: usize,
        #[arg(long, conflicts_with = "dot")]
        json: bool,
        #[arg(long)]
        dot: bool,
    },
    /// Distance between two vertices of an exported cone.
    Dist { cone: PathBuf, phi1: String, phi2: String },
    /// Print the hex orbit certificate.
    OrbitCert { track: PathBuf },
    /// Decide whether two tracks lie in one mapping class group orbit.
    SameOrbit { a: PathBuf, b: PathBuf },
    /// Run the agreement loop on a carried position.
    Agree {
        position: PathBuf,
        /// Measure on the carried track.
        #[arg(long)]
        measure: PathBuf,
    },
    /// Breadth-first ball in the ambient graph of marked tracks.
    TtBall {
        track: PathBuf,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        with_shifts: bool,
        /// Follow splits only.
        #[arg(long)]
        directed: bool,
    },
    /// Largest ratio of cone distance to ambient distance.
    Distortion {
        track: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        radius: usize,
    },
    /// Twist powers about a pants curve: word length against cone distance.
    TwistGrowth {
        track: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        curve: usize,
        /// Radius of the ambient ball searched for each power.
        #[arg(long, default_value_t = 2)]
        ambient_radius: usize,
    },
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl From<TtError> for Failure {
    fn from(e: TtError) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Out = Result<(String, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {}", path.display(), e)))
}

/// Reads a `.tt` file; `catalog:<name>` names a built-in track.
fn load_track(path: &Path) -> Result<TrainTrack, Failure> {
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("catalog:")) {
        return Ok(catalog(name)?);
    }
    Ok(parse_tt(&read(path)?)?)
}

fn load_measure(path: &Path) -> Result<TransverseMeasure, Failure> {
    Ok(parse_measure(&read(path)?)?)
}

fn validate(t: &TrainTrack) -> Out {
    let r = t.validate();
    let mut s = String::new();
    writeln!(s, "slot_consistent {}", r.slot_consistent).unwrap();
    writeln!(s, "generic {}", r.generic).unwrap();
    writeln!(s, "connected {}", r.connected).unwrap();
    writeln!(s, "maximal {}", r.maximal).unwrap();
    if let Ok(sig) = t.surface_signature() {
        writeln!(s, "surface {}", sig).unwrap();
    }
    for p in &r.problems {
        writeln!(s, "problem {}", p).unwrap();
    }
    Ok((s, r.all_ok()))
}

fn regions(t: &TrainTrack) -> Out {
    let mut s = String::new();
    for r in t.regions() {
        let sides: Vec<String> = r.sides.iter().map(|x| x.to_string()).collect();
        let lengths: Vec<String> = r.side_lengths().iter().map(|x| x.to_string()).collect();
        writeln!(
            s,
            "region {} cusps={} punctured={} sides=[{}] paths=[{}]",
            r.key,
            r.cusps,
            r.punctured,
            sides.join(" "),
            lengths.join(",")
        )
        .unwrap();
    }
    Ok((s, true))
}

fn recurrent(t: &TrainTrack) -> Out {
    Ok(match is_recurrent(t) {
        Some(mu) => (format!("recurrent true\n{}", mu), true),
        None => ("recurrent false\n".into(), false),
    })
}

fn apply(t: &TrainTrack, word: &Path) -> Out {
    let word = parse_word(&read(word)?).map_err(|e| Failure::Domain(format!("word: {}", e)))?;
    let out = apply_sequence(t, &word)?;
    Ok((write_tt(&out.track), true))
}

fn cone(t: &TrainTrack, mu: TransverseMeasure, radius: usize, as_json: bool, as_dot: bool) -> Out {
    let cone = cone_ball(t, &LaminationProxy::Measure(mu), radius)?;
    if as_json {
        let text = serde_json::to_string_pretty(&cone.to_json()).expect("json values serialize");
        return Ok((text + "\n", true));
    }
    if as_dot {
        return Ok((cone.to_dot(), true));
    }
    let mut s = String::new();
    writeln!(s, "vertices {}", cone.len()).unwrap();
    writeln!(s, "edges {}", cone.edges.len()).unwrap();
    let spheres: Vec<String> = (0..=radius).map(|k| cone.ball_size(k).to_string()).collect();
    writeln!(s, "ball_sizes {}", spheres.join(" ")).unwrap();
    writeln!(s, "collisions {}", cone.collisions).unwrap();
    writeln!(s, "collision_failures {}", cone.collision_failures.len()).unwrap();
    writeln!(s, "truncations {}", cone.truncations.len()).unwrap();
    Ok((s, cone.collision_failures.is_empty()))
}

fn dist(path: &Path, a: &str, b: &str) -> Out {
    let v: serde_json::Value =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Domain(format!("cone json: {}", e)))?;
    let (points, edges) = FlatCone::lattice_from_json(&v)?;
    let pa: LatticePoint = a.parse().map_err(Failure::Usage)?;
    let pb: LatticePoint = b.parse().map_err(Failure::Usage)?;
    let index = |p: &LatticePoint| points.iter().position(|x| x == p).ok_or(Failure::from(TtError::NotInCone));
    let (ia, ib) = (index(&pa)?, index(&pb)?);
    // Graph distance ignoring edge direction, as a check on the lattice one.
    let mut adj = vec![Vec::new(); points.len()];
    for (x, y) in &edges {
        let (i, j) = (index(x)?, index(y)?);
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut d = vec![None; points.len()];
    d[ia] = Some(0u32);
    let mut queue = std::collections::VecDeque::from([ia]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if d[u].is_none() {
                d[u] = Some(d[v].unwrap() + 1);
                queue.push_back(u);
            }
        }
    }
    let graph = d[ib].map_or("unreachable".to_string(), |x| x.to_string());
    Ok((format!("l1 {}\ngraph {}\n", pa.l1(&pb), graph), true))
}

fn agree_verb(pos: &Path, mu: TransverseMeasure) -> Out {
    let pos = parse_pos(&read(pos)?)?;
    let a = agree(&pos, &LaminationProxy::Measure(mu))?;
    let mut s = String::new();
    writeln!(s, "{:<16} {}", "base", "carried").unwrap();
    for (b, c) in &a.log {
        let b = b.map_or("-".to_string(), |m| format!("split {} {}", m.at, m.direction.letter()));
        let c = c.map_or("-".to_string(), |m| m.to_string());
        writeln!(s, "{:<16} {}", b, c).unwrap();
    }
    writeln!(s, "phases {}", a.phases).unwrap();
    writeln!(s, "base_length {}", a.base_word.len()).unwrap();
    writeln!(s, "carried_length {}", a.carried_word.len()).unwrap();
    let cert: Vec<String> = a.certificate.iter().map(|b| format!("shift {}", b)).collect();
    writeln!(s, "certificate [{}]", cert.join(", ")).unwrap();
    Ok((s, true))
}

fn tt_ball_verb(t: &TrainTrack, seed: u64, radius: usize, opts: AmbientOptions) -> Out {
    let m = random_marking(t, &mut ChaCha8Rng::seed_from_u64(seed), MARKING_DEGREE);
    let ball = tt_ball(&m, radius, opts);
    let spheres: Vec<String> = ball.sphere_sizes().iter().map(|x| x.to_string()).collect();
    let mut s = String::new();
    writeln!(s, "vertices {}", ball.len()).unwrap();
    writeln!(s, "edges {}", ball.edge_count() / 2).unwrap();
    writeln!(s, "spheres {}", spheres.join(" ")).unwrap();
    Ok((s, true))
}

fn distortion_verb(t: &TrainTrack, mu: TransverseMeasure, seed: u64, radius: usize) -> Out {
    let m = random_marking(t, &mut ChaCha8Rng::seed_from_u64(seed), MARKING_DEGREE);
    let r = distortion(&m, &LaminationProxy::Measure(mu), radius, AmbientOptions::default())?;
    let mut s = String::new();
    writeln!(s, "cone_vertices {}", r.cone_vertices).unwrap();
    writeln!(s, "ambient_vertices {}", r.ambient_vertices).unwrap();
    writeln!(s, "pairs {}", r.pairs).unwrap();
    writeln!(s, "identified {}", r.identified).unwrap();
    writeln!(s, "max_ratio {:.6}", r.max_ratio).unwrap();
    writeln!(s, "worst cone={} ambient={}", r.worst.0, r.worst.1).unwrap();
    Ok((s, true))
}

fn twist_verb(t: TrainTrack, seed: u64, n: usize, curve: usize, ambient_radius: usize) -> Out {
    let pt = PantsTrack { curve_paths: pants_curves(&t), track: t };
    if pt.curve_paths.is_empty() {
        return Err(Failure::Domain("track has no pants curves".into()));
    }
    let m = random_marking(&pt.track, &mut ChaCha8Rng::seed_from_u64(seed), MARKING_DEGREE);
    let rows = twist_growth(&pt, &m, curve, n, ambient_radius)?;
    let mut s = String::from("power word_length cone_distance ambient_distance marked_distinct\n");
    for r in rows {
        let amb = r.ambient.map_or(format!(">{}", ambient_radius), |d| d.to_string());
        writeln!(s, "{} {} {} {} {}", r.power, r.word_length, r.phi_norm, amb, r.marked_distinct).unwrap();
    }
    Ok((s, true))
}

fn run(cli: Cli) -> Out {
    let seed = cli.seed;
    match cli.verb {
        Verb::Validate { track } => validate(&load_track(&track)?),
        Verb::Regions { track } => regions(&load_track(&track)?),
        Verb::Recurrent { track } => recurrent(&load_track(&track)?),
        Verb::Apply { track, word } => apply(&load_track(&track)?, &word),
        Verb::Cone { track, measure, radius, json, dot } => {
            cone(&load_track(&track)?, load_measure(&measure)?, radius, json, dot)
        }
        Verb::Dist { cone, phi1, phi2 } => dist(&cone, &phi1, &phi2),
        Verb::OrbitCert { track } => Ok((orbit_certificate(&load_track(&track)?) + "\n", true)),
        Verb::SameOrbit { a, b } => {
            let same = same_orbit(&load_track(&a)?, &load_track(&b)?)?;
            Ok((format!("same_orbit {}\n", same), true))
        }
        Verb::Agree { position, measure } => agree_verb(&position, load_measure(&measure)?),
        Verb::TtBall { track, radius, with_shifts, directed } => {
            tt_ball_verb(&load_track(&track)?, seed, radius, AmbientOptions { with_shifts, directed })
        }
        Verb::Distortion { track, measure, radius } => {
            distortion_verb(&load_track(&track)?, load_measure(&measure)?, seed, radius)
        }
        Verb::TwistGrowth { track, n, curve, ambient_radius } => {
            twist_verb(load_track(&track)?, seed, n, curve, ambient_radius)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("TTKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok((text, ok)) => {
            print!("{}", text);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {}", msg);
            ExitCode::from(2)
        }
    }
}
