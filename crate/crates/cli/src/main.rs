use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exit status: 0 ok, 1 usage, 2 format, 3 semantic.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Format(String),
    Semantic(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Format(_) => 2,
            Failure::Semantic(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Format(m) | Failure::Semantic(m) => m,
        }
    }
}

impl From<treelin::Error> for Failure {
    fn from(e: treelin::Error) -> Self {
        if e.is_format() {
            Failure::Format(e.to_string())
        } else {
            Failure::Semantic(e.to_string())
        }
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Parser, Debug)]
#[command(name = "treelin", version, about = "Constituent tree linearization and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Treebank to linearized corpus (JSON Lines).
    Linearize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        tb: TreebankArgs,
        #[command(flatten)]
        par: ParArgs,
    },
    /// Predicted token sequences to a treebank.
    Delinearize {
        /// Corpus file whose records carry `tokens`.
        predictions: PathBuf,
        /// Corpus file whose records carry `words`; defaults to the predictions file.
        #[arg(long)]
        sentences: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Discbracket)]
        format: Format,
        #[command(flatten)]
        par: ParArgs,
    },
    /// Linearize and rebuild every tree, reporting exact matches.
    Roundtrip {
        input: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        tb: TreebankArgs,
        #[command(flatten)]
        par: ParArgs,
    },
    /// Bracket scores of predicted trees against gold trees.
    Eval {
        gold: PathBuf,
        pred: PathBuf,
        #[command(flatten)]
        tb: TreebankArgs,
        #[command(flatten)]
        score: ScoreArgs,
    },
    /// Score ceiling of an encoding on a gold treebank.
    Lossiness {
        gold: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        tb: TreebankArgs,
        #[command(flatten)]
        score: ScoreArgs,
    },
    /// F1 by span length, sentence length and label.
    Analyze {
        gold: PathBuf,
        pred: PathBuf,
        #[command(flatten)]
        tb: TreebankArgs,
        #[command(flatten)]
        score: ScoreArgs,
        /// Lower bounds of the span-length buckets.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5, 10, 20])]
        span_buckets: Vec<usize>,
        /// Lower bounds of the sentence-length buckets.
        #[arg(long, value_delimiter = ',', default_values_t = [0usize, 11, 21, 31, 41, 51])]
        sentence_buckets: Vec<usize>,
    },
    /// Seeded random treebank.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        min_words: usize,
        #[arg(long, default_value_t = 20)]
        max_words: usize,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        #[arg(long, default_value_t = 0.3)]
        rate: f64,
        #[arg(long, default_value_t = 2)]
        max_gap_degree: usize,
        #[arg(long, value_enum, default_value_t = Format::Discbracket)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Action-token frequencies of a linearized corpus.
    Vocab {
        corpus: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Mean and standard deviation of several JSON eval reports.
    MergeReports {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    #[arg(long, value_enum, default_value_t = System::Inorder)]
    system: System,
    #[arg(long, value_enum, default_value_t = Disc::None)]
    disc: Disc,
    #[arg(long)]
    lexicalized: bool,
}

#[derive(Args, Debug, Clone)]
struct TreebankArgs {
    #[arg(long, value_enum, default_value_t = Format::Discbracket)]
    format: Format,
    /// Keep a complete preterminal layer instead of removing it on input.
    #[arg(long)]
    keep_preterminals: bool,
}

#[derive(Args, Debug, Clone)]
struct ScoreArgs {
    /// `default`, `none` or `file:PATH` (whitespace-separated tokens).
    #[arg(long, default_value = "default")]
    punct: String,
    /// Score the root bracket too.
    #[arg(long)]
    keep_root: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
struct ParArgs {
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum System {
    Topdown,
    Bottomup,
    Inorder,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Disc {
    None,
    Swap,
    Swapk,
    Shiftk,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strict,
    Repair,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ptb,
    Discbracket,
    Export,
}

impl SpecArgs {
    fn to_spec(&self) -> treelin::LinearizationSpec {
        use treelin::{BaseSystem, DiscMechanism, SystemSpec};
        let base = match self.system {
            System::Topdown => BaseSystem::TopDown,
            System::Bottomup => BaseSystem::BottomUp,
            System::Inorder => BaseSystem::InOrder,
        };
        let disc = match self.disc {
            Disc::None => DiscMechanism::None,
            Disc::Swap => DiscMechanism::Swap,
            Disc::Swapk => DiscMechanism::SwapK,
            Disc::Shiftk => DiscMechanism::ShiftK,
        };
        treelin::LinearizationSpec::new(SystemSpec::new(base, disc), self.lexicalized)
    }
}

impl From<Mode> for treelin::ExecMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strict => treelin::ExecMode::Strict,
            Mode::Repair => treelin::ExecMode::Repair,
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or stdout when absent.
pub fn write_output(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Usage(format!("stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Linearize {
            input,
            output,
            spec,
            tb,
            par,
        } => commands::linearize(&input, output.as_deref(), spec.to_spec(), &tb, par.jobs),
        Command::Delinearize {
            predictions,
            sentences,
            output,
            spec,
            mode,
            format,
            par,
        } => commands::delinearize(
            &predictions,
            sentences.as_deref(),
            output.as_deref(),
            spec.to_spec(),
            mode.into(),
            format,
            par.jobs,
        ),
        Command::Roundtrip { input, spec, tb, par } => commands::roundtrip(&input, spec.to_spec(), &tb, par.jobs),
        Command::Eval { gold, pred, tb, score } => commands::eval(&gold, &pred, &tb, &score),
        Command::Lossiness { gold, spec, tb, score } => commands::lossiness(&gold, spec.to_spec(), &tb, &score),
        Command::Analyze {
            gold,
            pred,
            tb,
            score,
            span_buckets,
            sentence_buckets,
        } => commands::analyze(&gold, &pred, &tb, &score, span_buckets, sentence_buckets),
        Command::Synth {
            seed,
            count,
            min_words,
            max_words,
            max_arity,
            rate,
            max_gap_degree,
            format,
            output,
        } => {
            let params = treelin::treebank::SynthParams {
                n_words: min_words,
                max_arity,
                discontinuity_rate: rate,
                max_gap_degree,
            };
            commands::synth(seed, count, min_words, max_words, &params, format, output.as_deref())
        }
        Command::Vocab { corpus, spec, output } => commands::vocab(&corpus, spec.to_spec(), output.as_deref()),
        Command::MergeReports { reports, json } => commands::merge_reports(&reports, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
