use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use gkg::align::{align, parse_alignment_tsv, AlignStatus, AlignmentConfig, DEFAULT_AMBIGUITY_BAND};
use gkg::embedding::{FileEmbedder, HashEmbedder, TokenEmbedder, DEFAULT_DIM};
use gkg::eval::{run_eval_flat, run_eval_grounded};
use gkg::format::{parse_flat, parse_gkg, parse_gkg_unchecked, parse_rules, serialize_gkg, GkgDocument, GkgError};
use gkg::merge::{merge, MergePolicy};
use gkg::multilingual::{check_isomorphic, check_lang, render};

#[derive(Parser)]
#[command(name = "gkg", version, about = "Ontologically grounded, language-agnostic knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a GKG document against the relation signatures and type hierarchy
    Validate { graph: PathBuf },
    /// Reify flat triples into a grounded graph using a rule file
    Canonicalize {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        flat: PathBuf,
        /// Language tag for entity labels
        #[arg(long, default_value = "en")]
        lang: String,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Where to write the canonicalization report (default: stderr)
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Align the continuants of two graphs by signature similarity
    Align {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, default_value_t = gkg::align::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_AMBIGUITY_BAND)]
        ambiguity_band: f64,
        #[arg(long, default_value = "en")]
        pivot_lang: String,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Merge graph B into graph A along the MATCH rows of an alignment
    Merge {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        alignment: PathBuf,
        /// Resolve functional updates in favour of the lower revision
        #[arg(long)]
        prefer_older: bool,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Where to write the merge report (default: stderr)
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Render a graph as a labelled TSV view in one language
    Render {
        graph: PathBuf,
        #[arg(long, default_value = "en")]
        lang: String,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Check that two graphs have the same structure regardless of labels
    Isocheck {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "en")]
        lang: String,
    },
    /// Run the embedding experiments
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Flat triple embeddings: relation renaming versus fact change
    Flat {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DIM, value_parser = positive)]
        dim: usize,
        #[arg(long, default_value_t = 100, value_parser = positive)]
        trials: usize,
    },
    /// Grounded signatures of the worked example against three mutants
    Grounded {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DIM, value_parser = positive)]
        dim: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Provider {
    Hash,
    File,
}

#[derive(clap::Args)]
struct EmbedArgs {
    #[arg(long, value_enum, default_value = "hash")]
    provider: Provider,
    /// Word-vector file for the `file` provider
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_DIM, value_parser = positive)]
    dim: usize,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

enum Failure {
    /// Input well-formed but rejected on domain grounds.
    Domain(String),
    Parse(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Parse(m) | Failure::Io(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn emit_report(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(_) => emit(path, text),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn load_doc(path: &Path) -> Result<GkgDocument, Failure> {
    let text = read(path)?;
    parse_gkg(&text).map_err(|e| match e {
        GkgError::Syntax { .. } => Failure::Parse(format!("{}: {e}", path.display())),
        GkgError::ValidationFailed(r) => Failure::Domain(format!("{}: invalid graph\n{}", path.display(), r.to_tsv())),
    })
}

fn lang(tag: &str) -> Result<&str, Failure> {
    check_lang(tag).map_err(|e| Failure::Parse(e.to_string()))?;
    Ok(tag)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { graph } => {
            let text = read(&graph)?;
            let doc = parse_gkg_unchecked(&text).map_err(|e| Failure::Parse(format!("{}: {e}", graph.display())))?;
            let report = doc.validate();
            emit(None, &report.to_tsv())?;
            if report.is_empty() {
                Ok(())
            } else {
                Err(Failure::Domain(format!("{} violation(s)", report.len())))
            }
        }
        Command::Canonicalize { rules, flat, lang: tag, output, report } => {
            let tag = lang(&tag)?;
            let rules = parse_rules(&read(&rules)?).map_err(|e| Failure::Parse(format!("{}: {e}", rules.display())))?;
            let triples = parse_flat(&read(&flat)?).map_err(|e| Failure::Parse(format!("{}: {e}", flat.display())))?;
            let (doc, canon_report) = rules.canonicalize(&triples, tag);
            let violations = doc.validate();
            if !violations.is_empty() {
                return Err(Failure::Domain(format!("canonical graph is invalid\n{}", violations.to_tsv())));
            }
            emit(output.as_deref(), &serialize_gkg(&doc))?;
            emit_report(report.as_deref(), &canon_report.to_tsv())
        }
        Command::Align { a, b, embed, threshold, ambiguity_band, pivot_lang, output } => {
            let embedder: Arc<dyn TokenEmbedder + Send + Sync> = match embed.provider {
                Provider::Hash => Arc::new(HashEmbedder::new(embed.seed, embed.dim)),
                Provider::File => {
                    let path =
                        embed.vectors.ok_or_else(|| Failure::Parse("--provider file requires --vectors".into()))?;
                    let text = read(&path)?;
                    Arc::new(
                        FileEmbedder::from_text(&text, embed.seed)
                            .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?,
                    )
                }
            };
            let cfg = AlignmentConfig {
                threshold,
                ambiguity_band,
                pivot_lang: lang(&pivot_lang)?.to_string(),
                ..AlignmentConfig::new(embedder)
            };
            let (da, db) = (load_doc(&a)?, load_doc(&b)?);
            let result = align(&da, &db, &cfg).map_err(|e| Failure::Domain(e.to_string()))?;
            emit(output.as_deref(), &result.to_tsv())
        }
        Command::Merge { a, b, alignment, prefer_older, output, report } => {
            let (da, db) = (load_doc(&a)?, load_doc(&b)?);
            let rows = parse_alignment_tsv(&read(&alignment)?)
                .map_err(|e| Failure::Parse(format!("{}: {e}", alignment.display())))?;
            let pairs: Vec<_> =
                rows.into_iter().filter(|r| r.status == AlignStatus::Match).map(|r| (r.a, r.b)).collect();
            let mut policy = MergePolicy::from_schema(&da.schema.union(&db.schema));
            policy.prefer_newer = !prefer_older;
            let (merged, merge_report) =
                merge(&da, &db, &pairs, &policy).map_err(|e| Failure::Domain(e.to_string()))?;
            emit(output.as_deref(), &serialize_gkg(&merged))?;
            emit_report(report.as_deref(), &merge_report.to_tsv())
        }
        Command::Render { graph, lang: tag, output } => {
            let tag = lang(&tag)?;
            let doc = load_doc(&graph)?;
            let view = render(&doc.graph, &doc.labels, tag, &doc.labels);
            emit(output.as_deref(), &view.to_tsv())
        }
        Command::Isocheck { a, b, lang: tag } => {
            let tag = lang(&tag)?;
            let (da, db) = (load_doc(&a)?, load_doc(&b)?);
            let va = render(&da.graph, &da.labels, tag, &da.labels);
            let vb = render(&db.graph, &db.labels, tag, &db.labels);
            let check = check_isomorphic(&va, &vb);
            match check.witness {
                None => emit(None, "isomorphic\n"),
                Some(w) => {
                    emit(None, &format!("not-isomorphic\t{w}\n"))?;
                    Err(Failure::Domain("graphs differ structurally".into()))
                }
            }
        }
        Command::Eval(EvalCommand::Flat { seed, dim, trials }) => {
            emit(None, &run_eval_flat(seed, dim, trials).report())
        }
        Command::Eval(EvalCommand::Grounded { seed, dim }) => emit(None, &run_eval_grounded(seed, dim).report()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gkg: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
