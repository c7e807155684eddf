//! The `scikg` command line.
//!
//! Exit codes: 0 success, 1 usage error (including unreadable input paths),
//! 2 annotation/parse error, 3 PDF error, 4 graph service error. Warnings are
//! printed to stderr and never change the exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use scikg_core::model::is_absolute_uri;
use scikg_core::pdf::extract_metadata_with;
use scikg_core::xmp::{serialize_xmp_with, DEFAULT_TOOLKIT_NAMESPACE};
use scikg_core::{
    embed_metadata, parse_source, strip_annotations, validate, AnnotationDocument, EmbedMode,
    SourceDocument, XmpOptions,
};
use scikg_graph::kg::KgError;
use scikg_graph::{ingest, GraphClient, GraphStore, Overrides, UploadMode};

pub const DEFAULT_GRAPH_URL: &str = "http://127.0.0.1:8080";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PDF: i32 = 3;
pub const EXIT_SERVICE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "scikg", version, about = "Annotate, embed, extract and upload research contributions")]
struct Cli {
    /// Namespace URI for the mandatory properties and unprefixed custom ones.
    #[arg(long, global = true, default_value = DEFAULT_TOOLKIT_NAMESPACE, value_name = "URI")]
    namespace: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a source file and report missing mandatory properties.
    Check { tex: PathBuf },
    /// Print the source with annotations rendered or removed.
    Strip {
        tex: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the XMP packet for a source file (default: <tex>.xmp; "-" for stdout).
    Xmp {
        tex: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Embed the packet into a PDF by incremental update, plus a sidecar .xmp.
    Embed {
        tex: PathBuf,
        pdf: PathBuf,
        /// Store the packet under a custom catalog entry instead of /Metadata.
        #[arg(long)]
        pdfa: bool,
        /// Output PDF (default: <pdf stem>.scikg.pdf beside the input).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the toolkit packet embedded in a PDF.
    Extract {
        pdf: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract, resolve and upload a paper to the graph; prints a JSON report.
    Upload(UploadArgs),
    /// Run the in-memory mock graph service until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// JSON snapshot to start from.
        #[arg(long)]
        seed: Option<PathBuf>,
        /// Write the final store here on shutdown.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct UploadArgs {
    pdf: PathBuf,
    /// Replace the paper with the same title instead of adding a new one.
    #[arg(long)]
    update: bool,
    #[arg(long)]
    doi: Option<String>,
    /// Publication date, YYYY-MM-DD.
    #[arg(long)]
    date: Option<NaiveDate>,
    /// Venue the paper was published in.
    #[arg(long)]
    venue: Option<String>,
    #[arg(long, env = "SCIKG_GRAPH_URL", default_value = DEFAULT_GRAPH_URL, value_name = "URL")]
    graph_url: String,
}

/// Resolved settings shared by the subcommands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub toolkit_namespace: String,
    pub graph_base_url: String,
    pub embed_mode: EmbedMode,
    pub output: Option<PathBuf>,
}

impl CliConfig {
    fn xmp_options(&self) -> XmpOptions {
        XmpOptions {
            toolkit_namespace: self.toolkit_namespace.clone(),
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn note(&mut self, message: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{message}");
    }
}

fn read_text(path: &Path) -> Result<SourceDocument, Failure> {
    SourceDocument::read(path).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    std::fs::write(path, bytes).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))
}

fn emit(io: &mut Io<'_>, output: Option<&Path>, bytes: &[u8]) -> Outcome {
    match output {
        Some(path) if path != Path::new("-") => write_file(path, bytes),
        _ => io
            .out
            .write_all(bytes)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write output: {e}"))),
    }
}

/// Parses and prints warnings.
fn load_annotations(io: &mut Io<'_>, path: &Path) -> Result<(SourceDocument, AnnotationDocument), Failure> {
    let src = read_text(path)?;
    let doc = parse_source(&src).map_err(|e| {
        let at = match &e {
            scikg_core::ParseError::UnbalancedBraces { position }
            | scikg_core::ParseError::MalformedCommand { position, .. }
            | scikg_core::ParseError::DuplicateBibliographic { position, .. } => {
                let (line, col) = src.line_col(*position);
                format!("{}:{line}:{col}: ", src.origin)
            }
            _ => format!("{}: ", src.origin),
        };
        Failure::new(EXIT_PARSE, format!("{at}{e}"))
    })?;
    for warning in validate(&doc) {
        io.note(&warning.message);
    }
    Ok((src, doc))
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("xmp")
}

fn default_embed_output(pdf: &Path) -> PathBuf {
    let stem = pdf.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    pdf.with_file_name(format!("{stem}.scikg.pdf"))
}

fn packet_for(config: &CliConfig, doc: &AnnotationDocument) -> Result<scikg_core::XmpPacket, Failure> {
    serialize_xmp_with(doc, &config.xmp_options()).map_err(|e| Failure::new(EXIT_PARSE, e))
}

fn kg_failure(e: KgError) -> Failure {
    let code = match &e {
        KgError::EmptyRecord | KgError::MissingTitle | KgError::Xmp(_) => EXIT_PARSE,
        KgError::Pdf(_) | KgError::NoMetadata => EXIT_PDF,
        _ => EXIT_SERVICE,
    };
    Failure::new(code, e)
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::new(EXIT_SERVICE, format!("cannot start runtime: {e}")))
}

fn execute(cli: Cli, io: &mut Io<'_>) -> Outcome {
    if !is_absolute_uri(&cli.namespace) {
        return Err(Failure::new(EXIT_USAGE, format!("--namespace must be an absolute URI, got {:?}", cli.namespace)));
    }
    let mut config = CliConfig {
        toolkit_namespace: cli.namespace,
        graph_base_url: DEFAULT_GRAPH_URL.to_string(),
        embed_mode: EmbedMode::Standard,
        output: None,
    };

    match cli.command {
        Command::Check { tex } => {
            let (_, doc) = load_annotations(io, &tex)?;
            let groups = scikg_core::group_contributions(&doc);
            let _ = writeln!(
                io.out,
                "{}: {} annotation(s) in {} contribution(s)",
                tex.display(),
                doc.annotations.len(),
                groups.len()
            );
            Ok(())
        }
        Command::Strip { tex, output } => {
            let (src, doc) = load_annotations(io, &tex)?;
            let stripped = strip_annotations(&src, &doc).map_err(|e| Failure::new(EXIT_PARSE, e))?;
            emit(io, output.as_deref(), stripped.as_bytes())
        }
        Command::Xmp { tex, output } => {
            config.output = Some(output.unwrap_or_else(|| sidecar_path(&tex)));
            let (_, doc) = load_annotations(io, &tex)?;
            let packet = packet_for(&config, &doc)?;
            emit(io, config.output.as_deref(), packet.as_bytes())
        }
        Command::Embed { tex, pdf, pdfa, output } => {
            if pdfa {
                config.embed_mode = EmbedMode::PdfACompat;
            }
            let output = output.unwrap_or_else(|| default_embed_output(&pdf));
            let (_, doc) = load_annotations(io, &tex)?;
            let packet = packet_for(&config, &doc)?;
            let input = read_bytes(&pdf)?;
            let embedded = embed_metadata(&input, &packet, config.embed_mode)
                .map_err(|e| Failure::new(EXIT_PDF, format!("{}: {e}", pdf.display())))?;
            write_file(&output, &embedded)?;
            let sidecar = sidecar_path(&output);
            write_file(&sidecar, packet.as_bytes())?;
            let _ = writeln!(io.out, "wrote {} and {}", output.display(), sidecar.display());
            Ok(())
        }
        Command::Extract { pdf, output } => {
            let input = read_bytes(&pdf)?;
            match extract_metadata_with(&input, &config.xmp_options())
                .map_err(|e| Failure::new(EXIT_PDF, format!("{}: {e}", pdf.display())))?
            {
                Some(packet) => emit(io, output.as_deref(), packet.as_bytes()),
                None => {
                    io.note(format!("{}: no toolkit metadata", pdf.display()));
                    Ok(())
                }
            }
        }
        Command::Upload(args) => {
            config.graph_base_url = args.graph_url.clone();
            if !is_absolute_uri(&config.graph_base_url) {
                return Err(Failure::new(EXIT_USAGE, format!("graph URL must be absolute, got {:?}", config.graph_base_url)));
            }
            let input = read_bytes(&args.pdf)?;
            let overrides = Overrides {
                doi: args.doi,
                publication_date: args.date,
                published_in: args.venue,
            };
            let mode = if args.update { UploadMode::Update } else { UploadMode::Add };
            let client = GraphClient::new(&config.graph_base_url);
            let (report, resolved) = runtime()?
                .block_on(ingest(&input, &overrides, mode, &client, &config.xmp_options()))
                .map_err(kg_failure)?;
            for created in &resolved.unresolved_created {
                io.note(format!("created {:?} {} for {:?}", created.kind, created.id, created.label));
            }
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            let _ = writeln!(io.out, "{json}");
            Ok(())
        }
        Command::Serve { bind, seed, dump } => {
            let seed = match seed {
                Some(path) => Some(GraphStore::load(&path).map_err(|e| Failure::new(EXIT_USAGE, e))?),
                None => None,
            };
            let rt = runtime()?;
            let store = rt.block_on(async {
                let mock = scikg_graph::serve(&bind, seed).await.map_err(|e| Failure::new(EXIT_SERVICE, e))?;
                let _ = writeln!(io.out, "mock graph service listening on {}", mock.url());
                let _ = io.out.flush();
                let _ = tokio::signal::ctrl_c().await;
                Ok::<_, Failure>(mock.shutdown().await)
            })?;
            if let Some(path) = dump {
                write_file(&path, store.to_json().as_bytes())?;
            }
            Ok(())
        }
    }
}

/// Runs the command line with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let mut io = Io { out, err };
    match execute(cli, &mut io) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            io.note(format!("error: {}", failure.message));
            failure.code
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
