use std::fs;
use std::io::{self, Read};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use hdamso::compile::{
    hda_to_mso, in_defined_language, omega_table, sat, sentence_automaton, translate, word_mso_to_nfa, CompileOptions,
    SatOptions, SatResult, StepNfa,
};
use hdamso::corpus;
use hdamso::format::{parse_hda, parse_ipom, write_hda, write_ipom};
use hdamso::hda::{enumerate_language, ev_of_path, hda_to_dot, is_empty, membership, Hda};
use hdamso::ipomset::{glue, isomorphic, relaxations, subsumes, width, IPomset, Label, RelaxLimits};
use hdamso::mso::{concurrency_formula, eval_ipomset, eval_word, parse_formula, Formula, Signature, Valuation};
use hdamso::steps::{sparse_decompose, st_te_indices, StepWord};

#[derive(Parser)]
#[command(name = "hdamso", version, about = "Interval ipomsets, HDAs and MSO logic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operations on `.ipom` files.
    Ipom {
        #[command(subcommand)]
        cmd: IpomCmd,
    },
    /// Operations on `.hda` files.
    Hda {
        #[command(subcommand)]
        cmd: HdaCmd,
    },
    /// Evaluation, translation and decision procedures for `.mso` files.
    Mso {
        #[command(subcommand)]
        cmd: MsoCmd,
    },
    /// The built-in fixtures and the round-trip differential check.
    Corpus {
        #[command(subcommand)]
        cmd: CorpusCmd,
    },
}

#[derive(Subcommand)]
enum IpomCmd {
    /// Checks the ipomset invariants.
    Validate { file: PathBuf },
    /// Glues two ipomsets along the targets of the first.
    Glue { left: PathBuf, right: PathBuf },
    /// Prints the sparse step decomposition with St/Te per event.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        indices: bool,
    },
    Width { file: PathBuf },
    /// Exit 0 when the first ipomset is subsumed by the second.
    Subsumes { left: PathBuf, right: PathBuf },
    /// Exit 0 when the ipomsets are isomorphic.
    Iso { left: PathBuf, right: PathBuf },
    /// Lists every ipomset the input is subsumed by, one decomposition per line.
    Relax {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_pairs: usize,
    },
}

#[derive(Subcommand)]
enum HdaCmd {
    /// Checks the precubical identities and the cell invariants.
    Validate { file: PathBuf },
    /// Exit 0 when the HDA accepts the ipomset; prints a witness path.
    Member { hda: PathBuf, ipom: PathBuf },
    /// Exit 0 when the language is empty.
    Empty { hda: PathBuf },
    /// Writes an ipomset sentence with the same language.
    ToMso { hda: PathBuf },
    /// Lists accepted ipomsets reachable within a number of steps.
    Lang {
        hda: PathBuf,
        #[arg(long, default_value_t = 6)]
        steps: usize,
    },
    /// Writes the cells and faces as a DOT graph.
    Dot { hda: PathBuf },
}

#[derive(Subcommand)]
enum MsoCmd {
    /// Exit 0 when the ipomset satisfies the sentence.
    Check { formula: PathBuf, ipom: PathBuf },
    /// Exit 0 when the step word satisfies the word sentence.
    Checkw { formula: PathBuf, word: PathBuf },
    /// Writes the word sentence over Ω≤k equivalent to an ipomset sentence.
    Translate {
        formula: PathBuf,
        #[command(flatten)]
        alphabet: AlphabetArgs,
    },
    /// Compiles a sentence to a step automaton (`state letter state` lines).
    Compile {
        formula: PathBuf,
        #[command(flatten)]
        alphabet: AlphabetArgs,
        /// The input is a word sentence rather than an ipomset sentence.
        #[arg(long)]
        word: bool,
        #[arg(long)]
        dot: bool,
    },
    /// Prints a model of width at most k, or "unsat" (exit 1).
    Sat {
        formula: PathBuf,
        #[command(flatten)]
        alphabet: AlphabetArgs,
    },
    /// Membership in the language the sentence defines at width k.
    Member {
        formula: PathBuf,
        ipom: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Use the subsumption closure of the models.
        #[arg(long)]
        closed: bool,
    },
}

#[derive(clap::Args)]
struct AlphabetArgs {
    /// Width bound.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Extra labels, comma separated, besides those of the formula.
    #[arg(long, value_delimiter = ',')]
    labels: Vec<String>,
    /// Cap on automaton states.
    #[arg(long, env = "HDAMSO_MAX_STATES", default_value_t = 1_000_000)]
    max_states: usize,
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Writes the fixture files into a directory.
    Write { dir: PathBuf },
    /// Compares the generated sentence of every corpus HDA with membership
    /// on all ipomsets up to a size.
    Check {
        #[arg(long, default_value_t = 3)]
        max_events: usize,
    },
}

/// Exit status of a decision: 0 for yes, 1 for no.
fn verdict(yes: bool) -> u8 {
    !yes as u8
}

fn read(path: &FsPath) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_ipom(path: &FsPath) -> Result<IPomset> {
    parse_ipom(&read(path)?).with_context(|| path.display().to_string())
}

fn load_hda(path: &FsPath) -> Result<Hda> {
    parse_hda(&read(path)?).with_context(|| path.display().to_string())
}

fn load_formula(path: &FsPath, signature: Signature) -> Result<Formula> {
    let phi = parse_formula(&read(path)?, signature).with_context(|| path.display().to_string())?;
    if !phi.is_sentence() {
        bail!("{}: formula has free variables", path.display());
    }
    Ok(phi)
}

fn load_word(path: &FsPath) -> Result<StepWord> {
    let text = read(path)?;
    let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join(" ");
    body.trim().parse().map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn sat_options(a: &AlphabetArgs) -> SatOptions {
    let mut opts = SatOptions::new(a.k);
    opts.labels = a.labels.iter().map(|l| Label::new(l)).collect();
    opts.compile = CompileOptions { max_states: a.max_states };
    opts
}

fn print_nfa(nfa: &StepNfa, dot: bool) {
    if dot {
        print!("{}", nfa.to_dot());
    } else {
        print!("{}", nfa.to_lines());
    }
}

fn ipom(cmd: IpomCmd) -> Result<u8> {
    Ok(match cmd {
        IpomCmd::Validate { file } => {
            let p = load_ipom(&file)?;
            println!("valid: {} events, width {}", p.len(), width(&p));
            0
        }
        IpomCmd::Glue { left, right } => {
            let p = glue(&load_ipom(&left)?, &load_ipom(&right)?)?;
            print!("{}", write_ipom(&p));
            0
        }
        IpomCmd::Decompose { file, indices } => {
            let p = load_ipom(&file)?;
            println!("{}", sparse_decompose(&p));
            if indices {
                let idx = st_te_indices(&p);
                for e in 0..p.len() {
                    println!("{}: St {} Te {}", p.name(e), idx.start[e], idx.end[e]);
                }
            }
            0
        }
        IpomCmd::Width { file } => {
            println!("{}", width(&load_ipom(&file)?));
            0
        }
        IpomCmd::Subsumes { left, right } => {
            let yes = subsumes(&load_ipom(&left)?, &load_ipom(&right)?).is_some();
            println!("{yes}");
            verdict(yes)
        }
        IpomCmd::Iso { left, right } => {
            let yes = isomorphic(&load_ipom(&left)?, &load_ipom(&right)?).is_some();
            println!("{yes}");
            verdict(yes)
        }
        IpomCmd::Relax { file, max_pairs } => {
            let p = load_ipom(&file)?;
            let limits = RelaxLimits { max_precedence_pairs: max_pairs, ..RelaxLimits::default() };
            for q in relaxations(&p, limits)? {
                println!("{}", sparse_decompose(&q));
            }
            0
        }
    })
}

fn hda(cmd: HdaCmd) -> Result<u8> {
    Ok(match cmd {
        HdaCmd::Validate { file } => {
            let h = load_hda(&file)?;
            println!("valid: {} cells", h.len());
            0
        }
        HdaCmd::Member { hda, ipom } => {
            let h = load_hda(&hda)?;
            let m = membership(&h, &load_ipom(&ipom)?);
            match &m.witness {
                Some(path) => {
                    println!("member");
                    println!("path: {}", path.display(&h));
                    println!("word: {}", ev_of_path(&h, path)?);
                }
                None => println!("not a member"),
            }
            verdict(m.accepted)
        }
        HdaCmd::Empty { hda } => {
            let yes = is_empty(&load_hda(&hda)?);
            println!("{}", if yes { "empty" } else { "nonempty" });
            verdict(yes)
        }
        HdaCmd::ToMso { hda } => {
            println!("{}", hda_to_mso(&load_hda(&hda)?).sentence);
            0
        }
        HdaCmd::Lang { hda, steps } => {
            let sample = enumerate_language(&load_hda(&hda)?, steps);
            for w in &sample.members {
                println!("{}", if w.is_empty() { "id_empty".to_string() } else { w.to_string() });
            }
            if sample.truncated {
                eprintln!("more members need longer paths than {steps} steps");
            }
            0
        }
        HdaCmd::Dot { hda } => {
            print!("{}", hda_to_dot(&load_hda(&hda)?));
            0
        }
    })
}

fn mso(cmd: MsoCmd) -> Result<u8> {
    Ok(match cmd {
        MsoCmd::Check { formula, ipom } => {
            let yes = eval_ipomset(&load_formula(&formula, Signature::IPomset)?, &load_ipom(&ipom)?, &Valuation::new())?;
            println!("{yes}");
            verdict(yes)
        }
        MsoCmd::Checkw { formula, word } => {
            let yes = eval_word(&load_formula(&formula, Signature::Word)?, load_word(&word)?.letters(), &Valuation::new())?;
            println!("{yes}");
            verdict(yes)
        }
        MsoCmd::Translate { formula, alphabet } => {
            let phi = load_formula(&formula, Signature::IPomset)?;
            println!("{}", translate(&phi, alphabet.k, &sat_options(&alphabet).labels)?);
            0
        }
        MsoCmd::Compile { formula, alphabet, word, dot } => {
            let opts = sat_options(&alphabet);
            let nfa = if word {
                let psi = load_formula(&formula, Signature::Word)?;
                let mut labels: Vec<Label> = opts.labels.iter().cloned().chain(psi.labels()).collect();
                labels.sort();
                labels.dedup();
                word_mso_to_nfa(&psi, omega_table(&labels, opts.k)?.letters(), opts.compile)?
            } else {
                sentence_automaton(&load_formula(&formula, Signature::IPomset)?, &opts)?
            };
            print_nfa(&nfa, dot);
            0
        }
        MsoCmd::Sat { formula, alphabet } => {
            let phi = load_formula(&formula, Signature::IPomset)?;
            match sat(&phi, &sat_options(&alphabet))? {
                SatResult::Sat { model, word } => {
                    println!("sat");
                    println!("word: {}", if word.is_empty() { "id_empty".to_string() } else { word.to_string() });
                    print!("{}", write_ipom(&model));
                    0
                }
                SatResult::Unsat => {
                    println!("unsat");
                    1
                }
            }
        }
        MsoCmd::Member { formula, ipom, k, closed } => {
            let phi = load_formula(&formula, Signature::IPomset)?;
            let yes = in_defined_language(&phi, k, &load_ipom(&ipom)?, closed)?;
            println!("{yes}");
            verdict(yes)
        }
    })
}

fn write_fixtures(dir: &FsPath) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut files: Vec<(String, String)> = vec![
        ("fig2.hda".into(), corpus::FIG2_HDA.into()),
        ("fig2.path".into(), format!("{}\n", corpus::FIG2_PATH)),
        ("fig3.ipom".into(), corpus::FIG3_IPOM.into()),
        ("w1.stepw".into(), format!("{}\n", corpus::FIG3_W1)),
        ("w2.stepw".into(), format!("{}\n", corpus::FIG3_W2)),
        ("figure2_left.ipom".into(), corpus::GLUE_LEFT.into()),
        ("figure2_right.ipom".into(), corpus::GLUE_RIGHT.into()),
        ("figure2_glued.ipom".into(), corpus::GLUE_RESULT.into()),
        ("phi_conc.mso".into(), format!("{}\n", concurrency_formula("a", "b"))),
        ("w1.mso".into(), format!("{}\n", corpus::w1_sentence())),
        ("ab.ipom".into(), write_ipom(&IPomset::word(&["a", "b"]))),
        ("ba.ipom".into(), write_ipom(&IPomset::word(&["b", "a"]))),
        ("conclist_ab.ipom".into(), write_ipom(&IPomset::conclist(&["a", "b"]))),
    ];
    for (i, text) in corpus::EX1_CHAIN.iter().enumerate() {
        files.push((format!("chain{}.ipom", i + 1), text.to_string()));
    }
    for (name, h) in corpus::hda_corpus() {
        if name != "fig2" {
            files.push((format!("{name}.hda"), write_hda(&h)));
        }
    }
    for (name, text) in files {
        let path = dir.join(&name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn corpus_check(max_events: usize) -> Result<u8> {
    let mut mismatches = 0;
    for (name, h) in corpus::hda_corpus() {
        let phi = hdamso::mso::CompiledFormula::new(&hda_to_mso(&h).sentence)?;
        let own: Vec<String> = h.labels().iter().map(|l| l.to_string()).collect();
        let labels: Vec<&str> = if own.len() <= 2 { vec!["a", "b"] } else { own.iter().map(String::as_str).collect() };
        let (mut total, mut accepted, mut bad) = (0, 0, 0);
        for p in corpus::all_ipomsets(&labels, max_events) {
            let member = membership(&h, &p).accepted;
            total += 1;
            accepted += member as usize;
            if phi.eval_ipomset(&p, &Valuation::new())? != member {
                bad += 1;
                eprintln!("{name}: disagreement on {}", sparse_decompose(&p));
            }
        }
        println!("{name}: {total} ipomsets, {accepted} accepted, {bad} mismatches");
        mismatches += bad;
    }
    Ok(verdict(mismatches == 0))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Ipom { cmd } => ipom(cmd),
        Command::Hda { cmd } => hda(cmd),
        Command::Mso { cmd } => mso(cmd),
        Command::Corpus { cmd: CorpusCmd::Write { dir } } => write_fixtures(&dir).map(|_| 0),
        Command::Corpus { cmd: CorpusCmd::Check { max_events } } => corpus_check(max_events),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // formula evaluation recurses on the formula tree
    let worker = std::thread::Builder::new().stack_size(256 << 20).spawn(move || run(cli));
    let result = match worker {
        Ok(handle) => handle.join().unwrap_or_else(|_| Err(anyhow!("internal error"))),
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
