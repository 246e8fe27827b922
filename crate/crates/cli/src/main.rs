//! Command-line front end. Machine output is JSON on stdout; diagnostics go to
//! stderr. Exit status: 0 positive, 1 negative verdict, 2 bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use treelike::chordal::{is_chordal, tca_from_dependence, Chordality};
use treelike::control::solve::solve_control;
use treelike::control::{check_controller, verify_winning, CoverViolation, Plant, Verdict};
use treelike::distribute::{distribute, DistributedAutomaton};
use treelike::io::{read, to_json, AaDoc, AcceptanceDoc, ArchDoc, DfaDoc, GameDoc, GraphDoc, SolutionDoc};
use treelike::model::{Architecture, Letter};
use treelike::parity::{solve_parity_game, Owner};
use treelike::views::{check_invariants, InvariantKind};
use treelike::{Error, Result};

#[derive(Parser)]
#[command(name = "treelike", version, about = "Asynchronous automata over tree-like architectures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that an architecture document is tree-like.
    Validate {
        #[arg(long)]
        arch: PathBuf,
    },
    /// Distribute a diamond DFA over an architecture; emits the automaton.
    Distribute {
        #[arg(long)]
        dfa: PathBuf,
        #[arg(long)]
        arch: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Bound on explored global states.
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Run a word on the distributed automaton.
    Simulate {
        #[arg(long)]
        dfa: PathBuf,
        #[arg(long)]
        arch: PathBuf,
        /// Comma-separated letters; empty for the empty word.
        #[arg(long, default_value = "", value_delimiter = ',')]
        word: Vec<String>,
    },
    /// Compare the DFA and its distribution on every word up to a length.
    Equiv {
        #[arg(long)]
        dfa: PathBuf,
        #[arg(long)]
        arch: PathBuf,
        #[arg(long, default_value_t = 7)]
        maxlen: usize,
    },
    /// Check the run invariants on seeded random words.
    Invariants {
        #[arg(long)]
        dfa: PathBuf,
        #[arg(long)]
        arch: PathBuf,
        /// Number of words.
        #[arg(long, default_value_t = 1000)]
        words: usize,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a tree-like architecture from a chordal dependence graph.
    Chordal2tca {
        #[arg(long)]
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Synthesize a winning controller for a plant.
    Synthesize {
        #[arg(long)]
        plant: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a controller covers the plant and wins.
    Verify {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        controller: PathBuf,
    },
    /// Solve a parity game.
    SolveGame {
        game: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Writes the main document to `output`, or to stdout when absent.
fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::input(p.display().to_string(), e.to_string())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(v: &Value) {
    print!("{}", to_json(v));
}

fn load_arch(path: &Path) -> Result<Architecture> {
    read::<ArchDoc>(path)?.architecture()
}

fn load_pair(dfa: &Path, arch: &Path) -> Result<(treelike::dfa::Dfa, Architecture)> {
    let arch = load_arch(arch)?;
    let dfa = read::<DfaDoc>(dfa)?.dfa(&arch.alphabet)?;
    Ok((dfa, arch))
}

fn load_plant(path: &Path) -> Result<Plant> {
    read::<AaDoc>(path)?.plant()
}

fn names(arch: &Architecture, w: &[Letter]) -> Vec<String> {
    arch.alphabet.word_names(w)
}

fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Validate { arch } => {
            let r = load_arch(&arch)?.validate();
            let letters: Vec<Value> = r
                .letters
                .iter()
                .map(|(id, path)| json!({"id": id, "connected": path.is_none(), "path": path}))
                .collect();
            let edges: Vec<Value> = r.edges.iter().map(|((u, v), ok)| json!({"edge": [u, v], "covered": ok})).collect();
            report(&json!({"valid": r.is_valid(), "letters": letters, "edges": edges}));
            Ok(r.is_valid())
        }
        Cmd::Distribute { dfa, arch, output, cap } => {
            let (dfa, arch) = load_pair(&dfa, &arch)?;
            let da = distribute(&dfa, &arch)?;
            let m = da.materialize(cap)?;
            let mut doc = AaDoc::from_aa(&m.aa);
            doc.acceptance = Some(AcceptanceDoc { per_process: None, tdiam: Some(DfaDoc::from_dfa(&dfa)) });
            for p in arch.alphabet.processes() {
                log::info!("{}: {} reachable local states", arch.alphabet.process_name(p), m.aa.num_states(p));
            }
            emit(&output, &to_json(&doc))?;
            Ok(true)
        }
        Cmd::Simulate { dfa, arch, word } => {
            let (dfa, arch) = load_pair(&dfa, &arch)?;
            let da = distribute(&dfa, &arch)?;
            let letters: Vec<&str> = word.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
            let w = arch.alphabet.parse_word(&letters)?;
            use treelike::aa::Simulate;
            let (defined, states, accepted) = match da.run(&w) {
                Ok(g) => {
                    let states: serde_json::Map<String, Value> = arch
                        .alphabet
                        .processes()
                        .map(|p| (arch.alphabet.process_name(p).to_string(), json!(da.pair_name(g[p]))))
                        .collect();
                    (true, Value::Object(states), da.accepts_global(&g)?)
                }
                Err(_) => (false, Value::Null, false),
            };
            report(&json!({
                "word": names(&arch, &w),
                "defined": defined,
                "states": states,
                "accepted": accepted,
                "dfaAccepted": dfa.accepts(&w),
            }));
            Ok(accepted)
        }
        Cmd::Equiv { dfa, arch, maxlen } => {
            let (dfa, arch) = load_pair(&dfa, &arch)?;
            let da = distribute(&dfa, &arch)?;
            let (count, mismatch) = compare(&dfa, &da, maxlen)?;
            let ok = mismatch.is_none();
            report(&json!({
                "maxlen": maxlen,
                "words": count,
                "equivalent": mismatch.is_none(),
                "mismatch": mismatch.map(|w| names(&arch, &w)),
            }));
            Ok(ok)
        }
        Cmd::Invariants { dfa, arch, words, maxlen, seed } => {
            let (dfa, arch) = load_pair(&dfa, &arch)?;
            let da = distribute(&dfa, &arch)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = arch.alphabet.num_letters();
            let mut rows = vec![];
            for _ in 0..words {
                let len = rng.gen_range(0..=maxlen);
                let w: Vec<Letter> = (0..len).map(|_| rng.gen_range(0..k)).collect();
                if let Some(v) = check_invariants(&dfa, &arch, &da, &w) {
                    let kind = match v.kind {
                        InvariantKind::Def => "def",
                        InvariantKind::S => "s",
                        InvariantKind::T => "t",
                    };
                    rows.push(json!({
                        "word": names(&arch, &w),
                        "invariant": kind,
                        "prefix": v.prefix,
                        "process": v.process.map(|p| arch.alphabet.process_name(p).to_string()),
                    }));
                }
            }
            let ok = rows.is_empty();
            report(&json!({"seed": seed, "words": words, "violations": rows}));
            Ok(ok)
        }
        Cmd::Chordal2tca { graph, output } => {
            let g = read::<GraphDoc>(&graph)?.graph()?;
            if let Chordality::ChordlessCycle(c) = is_chordal(&g) {
                let cycle: Vec<&str> = c.iter().map(|&v| g.vertices[v].as_str()).collect();
                report(&json!({"chordal": false, "chordlessCycle": cycle}));
                return Ok(false);
            }
            let arch = tca_from_dependence(&g)?;
            emit(&output, &to_json(&ArchDoc::from_architecture(&arch)))?;
            Ok(true)
        }
        Cmd::Synthesize { plant, output } => {
            let plant = load_plant(&plant)?;
            let out = solve_control(&plant)?;
            log::info!("{:?}", out.stats);
            let s = &out.stats;
            let stats = json!({
                "leavesRemoved": s.leaves_removed,
                "lshortApplied": s.lshort_applied,
                "finalStates": s.final_states,
                "gamePositions": s.game_positions,
                "controllerStates": s.controller_states,
            });
            match out.controller {
                Some(c) => {
                    let text = to_json(&AaDoc::from_controller(&c, &plant));
                    match &output {
                        Some(_) => {
                            emit(&output, &text)?;
                            report(&json!({"verdict": "controllable", "stats": stats}));
                        }
                        None => emit(&None, &text)?,
                    }
                    Ok(true)
                }
                None => {
                    report(&json!({"verdict": "uncontrollable", "stats": stats}));
                    Ok(false)
                }
            }
        }
        Cmd::Verify { plant, controller } => {
            let plant = load_plant(&plant)?;
            let c = read::<AaDoc>(&controller)?.controller(&plant)?;
            let al = plant.alphabet();
            if let Some(v) = check_controller(&plant, &c)? {
                let detail = match v {
                    CoverViolation::Transition { letter, from } => json!({
                        "kind": "transition",
                        "letter": al.letter_name(letter),
                        "from": al.domain(letter).iter().zip(&from).map(|(&p, &x)| c.aa.states[p][x].clone()).collect::<Vec<_>>(),
                    }),
                    CoverViolation::Uncontrollable { letter, global } => json!({
                        "kind": "uncontrollable",
                        "letter": al.letter_name(letter),
                        "global": global.iter().enumerate().map(|(p, &x)| c.aa.states[p][x].clone()).collect::<Vec<_>>(),
                    }),
                    CoverViolation::Initial { process } => json!({
                        "kind": "initial",
                        "process": al.process_name(process),
                    }),
                };
                report(&json!({"covering": false, "winning": false, "violation": detail}));
                return Ok(false);
            }
            match verify_winning(&plant, &c)? {
                Verdict::Winning => {
                    report(&json!({"covering": true, "winning": true}));
                    Ok(true)
                }
                Verdict::Losing(cex) => {
                    report(&json!({
                        "covering": true,
                        "winning": false,
                        "counterexample": {
                            "stem": al.word_names(&cex.stem),
                            "cycle": al.word_names(&cex.cycle),
                            "reason": cex.reason,
                        },
                    }));
                    Ok(false)
                }
            }
        }
        Cmd::SolveGame { game, output } => {
            let g = read::<GameDoc>(&game)?.game()?;
            let sol = solve_parity_game(&g);
            emit(&output, &to_json(&SolutionDoc::from_solution(&g, &sol)))?;
            Ok(sol.winner[g.initial] == Owner::System)
        }
    }
}

/// Words up to `maxlen` examined, and the first one (in length-lexicographic
/// order) where the two automata disagree.
fn compare(dfa: &treelike::dfa::Dfa, da: &DistributedAutomaton, maxlen: usize) -> Result<(usize, Option<Vec<Letter>>)> {
    use treelike::aa::Simulate;
    let k = dfa.alphabet().num_letters();
    let mut layer: Vec<(Vec<Letter>, Option<usize>, Option<Vec<usize>>)> =
        vec![(vec![], Some(dfa.initial()), Some(da.initial_global()))];
    let mut count = 0;
    for len in 0..=maxlen {
        for (w, q, g) in &layer {
            count += 1;
            let a = q.is_some_and(|q| dfa.is_accepting(q));
            let b = match g {
                Some(g) => da.accepts_global(g)?,
                None => false,
            };
            if a != b {
                return Ok((count, Some(w.clone())));
            }
        }
        if len == maxlen {
            break;
        }
        let mut next = vec![];
        for (w, q, g) in &layer {
            for a in 0..k {
                let mut w2 = w.clone();
                w2.push(a);
                let q2 = q.and_then(|q| dfa.step(q, a));
                let g2 = g.as_ref().and_then(|g| da.step(g, a));
                next.push((w2, q2, g2));
            }
        }
        layer = next;
    }
    Ok((count, None))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TREELIKE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
