use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use bitextforge::corpus::{read_corpus, CorpusFiles, TokenRule};
use bitextforge::langid::{
    bundled_profiles, detect_string, train_profile_with, LanguageProfile, DEFAULT_SMOOTHING,
};
use bitextforge::pipeline::{run_pipeline, PipelineConfig, Stage};
use bitextforge::Error;

#[derive(Parser)]
#[command(
    name = "bitextforge",
    version,
    about = "Build sentence-aligned parallel corpora from bilingual document collections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Stop after this stage and dump its intermediate output.
        #[arg(long)]
        stop_after: Option<Stage>,
    },
    /// Train or inspect language-identification profiles.
    Profiles {
        #[command(subcommand)]
        command: ProfilesCommand,
    },
    /// Detect the language of a string or a file.
    Detect {
        /// Read text from this file instead of the argument.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Profile files; the bundled English and Irish profiles if omitted.
        #[arg(long = "profile")]
        profiles: Vec<PathBuf>,
        text: Option<String>,
    },
    /// Line count and vocabulary size of a written corpus.
    Stats {
        /// Corpus prefix, e.g. `out/corpus` for `out/corpus.en` and `out/corpus.ga`.
        prefix: PathBuf,
        #[arg(long, default_value = "en")]
        src: String,
        #[arg(long, default_value = "ga")]
        tgt: String,
        #[arg(long)]
        case_fold: bool,
    },
}

#[derive(Subcommand)]
enum ProfilesCommand {
    Train {
        #[arg(long)]
        lang: String,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smoothing: f64,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    Inspect {
        profile: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoPairs | Error::NoDocuments(_) => 2,
        Error::Config(_) | Error::Parse { .. } => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> bitextforge::Result<()> {
    match cli.command {
        Command::Run { config, stop_after } => {
            let config = PipelineConfig::load(&config)?;
            let out = run_pipeline(&config, stop_after)?;
            if let Some(stats) = out.manifest.stats {
                println!("lines\t{}\nvocab\t{}", stats.line_count, stats.vocab_size);
            }
        }
        Command::Profiles { command } => match command {
            ProfilesCommand::Train {
                lang,
                output,
                smoothing,
                inputs,
            } => {
                let mut text = String::new();
                for p in &inputs {
                    text.push_str(&fs::read_to_string(p).map_err(|e| Error::Io {
                        path: p.clone(),
                        source: e,
                    })?);
                    text.push('\n');
                }
                train_profile_with(&lang, &text, smoothing)?.save(&output)?;
            }
            ProfilesCommand::Inspect { profile, top } => {
                let p = LanguageProfile::load(&profile)?;
                println!("language\t{}\nsmoothing\t{}", p.language(), p.smoothing());
                for n in 1..=bitextforge::langid::MAX_ORDER {
                    let mut grams: Vec<_> = p.counts(n).iter().collect();
                    grams.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
                    let shown: Vec<String> = grams
                        .iter()
                        .take(top)
                        .map(|(g, c)| format!("{g:?}:{c}"))
                        .collect();
                    println!(
                        "order {n}\t{} types\t{} tokens\t{}",
                        p.counts(n).len(),
                        p.total(n),
                        shown.join(" ")
                    );
                }
            }
        },
        Command::Detect {
            file,
            profiles,
            text,
        } => {
            let profiles = if profiles.is_empty() {
                bundled_profiles()
            } else {
                profiles
                    .iter()
                    .map(|p| LanguageProfile::load(p))
                    .collect::<bitextforge::Result<_>>()?
            };
            let text = match (file, text) {
                (Some(f), _) => {
                    fs::read_to_string(&f).map_err(|e| Error::Io { path: f, source: e })?
                }
                (None, Some(t)) => t,
                (None, None) => return Err(Error::Config("give either TEXT or --file".into())),
            };
            let pred = detect_string(&text, &profiles)?;
            println!("{}\t{:.6}", pred.language, pred.confidence);
        }
        Command::Stats {
            prefix,
            src,
            tgt,
            case_fold,
        } => {
            let dir = prefix.parent().map(PathBuf::from).unwrap_or_default();
            let name = prefix
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let files = CorpusFiles::new(&dir, &name, &src, &tgt);
            let corpus = read_corpus(&files, &TokenRule { case_fold })?;
            println!(
                "lines\t{}\nvocab\t{}",
                corpus.stats.line_count, corpus.stats.vocab_size
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
