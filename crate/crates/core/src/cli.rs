//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::difftest::{check_refinement, CheckConfig, Status, Verdict};
use crate::exec::{allowed_outcomes_with_cap, OutcomeSet, DEFAULT_CANDIDATE_CAP};
use crate::litmus::{parse_litmus, render_litmus, Dialect, FinalCondition, LitmusTest, MemoryOrder};
use crate::lowering::{lower_test, LoweringOptions, Mapping};
use crate::model::{AArch64Options, Model};
use crate::testgen::{generate_mp_family, FlagMechanism, GenParams, Sampling, Variant, VariantTag};

/// Exit code for errors; 0 and 1 mean success and "bug found".
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mbct", version, about = "Model-based concurrency compiler testing")]
pub struct Cli {
    /// Maximum candidate executions per test.
    #[arg(long, global = true, env = "MBCT_MAX_CANDIDATES", default_value_t = DEFAULT_CANDIDATE_CAP)]
    pub max_candidates: usize,
    /// Treat zero-register swaps as reads for acquire and barrier ordering.
    #[arg(long, global = true)]
    pub legacy_zero_register: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the outcomes a model allows for a test.
    Simulate {
        file: PathBuf,
        /// `c11` or `aarch64`; defaults to the test's dialect.
        #[arg(long)]
        model: Option<Model>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Lower a C test to AArch64.
    Compile {
        file: PathBuf,
        /// Rewrite unused swap destinations to the zero register.
        #[arg(long)]
        dead_register: bool,
        /// Output file; stdout if absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Mapping sidecar; defaults to `<out>.mapping.json` when `--out` is given.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Check that a compiled test refines its source.
    Diff {
        source: PathBuf,
        #[arg(required_unless_present = "auto_compile")]
        compiled: Option<PathBuf>,
        /// Lower the source internally instead of reading a compiled test.
        #[arg(long, conflicts_with_all = ["compiled", "mapping"])]
        auto_compile: bool,
        /// Apply the dead-register pass when auto-compiling.
        #[arg(long, requires = "auto_compile")]
        dead_register: bool,
        /// Observable mapping; looked up next to the tests if absent.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write the message-passing corpus to a directory.
    Generate {
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        params: GenArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Comma-separated subset of historic, discard, observe.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub variants: Vec<VariantArg>,
    #[arg(long, value_enum, default_value_t = MechanismArg::Exchange)]
    pub mechanism: MechanismArg,
    /// Orders are given as rlx, acq, rel, acqrel or sc.
    #[arg(long, value_delimiter = ',', value_parser = parse_order)]
    pub data_store: Vec<MemoryOrder>,
    #[arg(long, value_delimiter = ',', value_parser = parse_order)]
    pub flag_store: Vec<MemoryOrder>,
    #[arg(long, value_delimiter = ',', value_parser = parse_order)]
    pub flag_op: Vec<MemoryOrder>,
    /// Fence orders, or `none`.
    #[arg(long, value_delimiter = ',', value_parser = parse_fence)]
    pub fence: Vec<Option<MemoryOrder>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_order)]
    pub data_load: Vec<MemoryOrder>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep a seeded random subset of this size.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Historic,
    Discard,
    Observe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    Load,
    Exchange,
}

fn parse_order(s: &str) -> Result<MemoryOrder, String> {
    MemoryOrder::ALL
        .into_iter()
        .find(|o| o.short_name() == s || o.c_name() == s)
        .ok_or_else(|| format!("unknown memory order `{s}`"))
}

fn parse_fence(s: &str) -> Result<Option<MemoryOrder>, String> {
    if s == "none" {
        Ok(None)
    } else {
        parse_order(s).map(Some)
    }
}

impl GenArgs {
    pub fn to_params(&self) -> GenParams {
        let d = GenParams::default();
        let or = |v: &Vec<MemoryOrder>, dflt: Vec<MemoryOrder>| if v.is_empty() { dflt } else { v.clone() };
        let mechanism = match self.mechanism {
            MechanismArg::Load => FlagMechanism::Load,
            MechanismArg::Exchange => FlagMechanism::Exchange,
        };
        let flag_op_default = match mechanism {
            FlagMechanism::Exchange => d.flag_op.clone(),
            FlagMechanism::Load => d.data_load.clone(),
        };
        GenParams {
            variants: if self.variants.is_empty() {
                d.variants.clone()
            } else {
                self.variants
                    .iter()
                    .map(|v| match v {
                        VariantArg::Historic => Variant::Historic,
                        VariantArg::Discard => Variant::Discard,
                        VariantArg::Observe => Variant::Observe,
                    })
                    .collect()
            },
            mechanism,
            data_store: or(&self.data_store, d.data_store.clone()),
            flag_store: or(&self.flag_store, d.flag_store.clone()),
            flag_op: or(&self.flag_op, flag_op_default),
            fence: if self.fence.is_empty() { d.fence.clone() } else { self.fence.clone() },
            data_load: or(&self.data_load, d.data_load.clone()),
            sampling: self.limit.map(|limit| Sampling { seed: self.seed, limit }),
        }
    }
}

/// herd-style listing: header, state count, one row per outcome (`*>` marks
/// rows satisfying `cond`), then `Ok` or `No`.
pub fn format_outcome_table(s: &OutcomeSet, cond: &FinalCondition) -> String {
    let mut out = format!("Test {} {}\nStates {}\n", s.test, s.model, s.len());
    let mut any = false;
    for o in &s.outcomes {
        let hit = o.satisfies(cond);
        any |= hit;
        out.push_str(if hit { "*> " } else { ":> " });
        out.push_str(&o.to_string());
        out.push('\n');
    }
    out.push_str(if any { "Ok\n" } else { "No\n" });
    out
}

/// Text form of a diff verdict.
pub fn format_verdict(v: &Verdict) -> String {
    let mut out = format!("Verdict {}\n", v.status);
    if let Some(e) = &v.error {
        out.push_str(&format!("Error {e}\n"));
        return out;
    }
    out.push_str(&format!("Source outcomes {}\nCompiled outcomes {}\n", v.source_outcomes, v.compiled_outcomes));
    for w in &v.witnesses {
        out.push_str(&format!("Witness {w}\n"));
    }
    out
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: String,
    tag: &'a VariantTag,
}

#[derive(Serialize)]
struct Manifest<'a> {
    count: usize,
    tests: Vec<ManifestEntry<'a>>,
}

/// Writes one `.litmus` file per test plus `manifest.json`.
pub fn write_corpus(dir: &Path, tests: &[(LitmusTest, VariantTag)]) -> Result<Vec<PathBuf>, String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut entries = Vec::with_capacity(tests.len());
    let mut paths = Vec::with_capacity(tests.len());
    for (t, tag) in tests {
        let file = format!("{}.litmus", tag.stem());
        let path = dir.join(&file);
        write_file(&path, &render_litmus(t))?;
        entries.push(ManifestEntry { file, tag });
        paths.push(path);
    }
    let manifest = Manifest { count: entries.len(), tests: entries };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(&dir.join("manifest.json"), &json)?;
    Ok(paths)
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_test(path: &Path) -> Result<LitmusTest, String> {
    parse_litmus(&read_file(path)?).map_err(|e| format!("{}:{e}", path.display()))
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("mapping.json")
}

/// Mapping next to the compiled test, else next to the source test.
fn find_mapping(source: &Path, compiled: &Path) -> Result<PathBuf, String> {
    [sidecar(compiled), sidecar(source)]
        .into_iter()
        .find(|p| p.is_file())
        .ok_or_else(|| format!("no mapping given and no sidecar found for {}", compiled.display()))
}

fn load_mapping(path: &Path) -> Result<Mapping, String> {
    Mapping::from_json(&read_file(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

struct Ctx<'a> {
    cap: usize,
    aarch64: AArch64Options,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn print(&mut self, text: &str) -> Result<(), String> {
        self.out.write_all(text.as_bytes()).map_err(|e| format!("write failed: {e}"))
    }
}

fn simulate(ctx: &mut Ctx<'_>, file: &Path, model: Option<Model>, format: Format) -> Result<i32, String> {
    let test = load_test(file)?;
    let model = match model.unwrap_or(Model::for_dialect(test.dialect(), ctx.aarch64)) {
        Model::AArch64(_) => Model::AArch64(ctx.aarch64),
        m => m,
    };
    let set = allowed_outcomes_with_cap(&test, model, ctx.cap).map_err(|e| e.to_string())?;
    let text = match format {
        Format::Table => format_outcome_table(&set, &test.final_condition),
        Format::Json => set.to_json() + "\n",
    };
    ctx.print(&text)?;
    Ok(0)
}

fn compile(
    ctx: &mut Ctx<'_>,
    file: &Path,
    dead_register: bool,
    out: Option<&Path>,
    mapping: Option<&Path>,
) -> Result<i32, String> {
    let test = load_test(file)?;
    let opts = LoweringOptions { dead_register_pass: dead_register, ..LoweringOptions::default() };
    let (asm, m) = lower_test(&test, &opts).map_err(|e| format!("{}: {e}", file.display()))?;
    let text = render_litmus(&asm);
    match out {
        Some(p) => write_file(p, &text)?,
        None => ctx.print(&text)?,
    }
    if let Some(p) = mapping.map(Path::to_path_buf).or_else(|| out.map(sidecar)) {
        write_file(&p, &(m.to_json() + "\n"))?;
    }
    Ok(0)
}

fn diff(
    ctx: &mut Ctx<'_>,
    source: &Path,
    compiled: Option<&Path>,
    dead_register: bool,
    mapping: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    let src = load_test(source)?;
    if src.dialect() != Dialect::Source {
        return Err(format!("{}: expected a C test", source.display()));
    }
    let (asm, m) = match compiled {
        None => {
            let opts = LoweringOptions { dead_register_pass: dead_register, ..LoweringOptions::default() };
            lower_test(&src, &opts).map_err(|e| format!("{}: {e}", source.display()))?
        }
        Some(c) => {
            let asm = load_test(c)?;
            let path = match mapping {
                Some(p) => p.to_path_buf(),
                None => find_mapping(source, c)?,
            };
            (asm, load_mapping(&path)?)
        }
    };
    let v = check_refinement(&src, &asm, &m, &CheckConfig { candidate_cap: ctx.cap, aarch64: ctx.aarch64 });
    if v.status == Status::Error {
        return Err(v.error.unwrap_or_default());
    }
    let text = match format {
        Format::Table => format_verdict(&v),
        Format::Json => v.to_json() + "\n",
    };
    ctx.print(&text)?;
    Ok(v.status.exit_code())
}

fn generate(ctx: &mut Ctx<'_>, out_dir: &Path, params: &GenArgs) -> Result<i32, String> {
    let tests = generate_mp_family(&params.to_params()).map_err(|e| e.to_string())?;
    let paths = write_corpus(out_dir, &tests)?;
    ctx.print(&format!("Wrote {} tests to {}\n", paths.len(), out_dir.display()))?;
    Ok(0)
}

/// Executes a parsed command; returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut ctx = Ctx {
        cap: cli.max_candidates,
        aarch64: AArch64Options { legacy_zero_register: cli.legacy_zero_register },
        out,
    };
    let result = match &cli.command {
        Command::Simulate { file, model, format } => simulate(&mut ctx, file, *model, *format),
        Command::Compile { file, dead_register, out, mapping } => {
            compile(&mut ctx, file, *dead_register, out.as_deref(), mapping.as_deref())
        }
        Command::Diff { source, compiled, auto_compile: _, dead_register, mapping, format } => {
            diff(&mut ctx, source, compiled.as_deref(), *dead_register, mapping.as_deref(), *format)
        }
        Command::Generate { out_dir, params } => generate(&mut ctx, out_dir, params),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Outcome;
    use crate::litmus::Observable;

    #[test]
    fn empty_table() {
        let s = OutcomeSet { test: "t".into(), model: "c11".into(), outcomes: Default::default() };
        let cond = FinalCondition::atom(Observable::memory("x"), 1);
        assert_eq!(format_outcome_table(&s, &cond), "Test t c11\nStates 0\nNo\n");
    }

    #[test]
    fn table_marks_witnesses() {
        let y = Observable::memory("y");
        let s = OutcomeSet {
            test: "t".into(),
            model: "aarch64".into(),
            outcomes: [1, 2].map(|v| Outcome::new([(y.clone(), v)])).into_iter().collect(),
        };
        let table = format_outcome_table(&s, &FinalCondition::atom(y, 2));
        assert_eq!(table, "Test t aarch64\nStates 2\n:> y=1;\n*> y=2;\nOk\n");
    }

    #[test]
    fn order_names() {
        assert_eq!(parse_order("acqrel"), Ok(MemoryOrder::AcqRel));
        assert_eq!(parse_order("memory_order_seq_cst"), Ok(MemoryOrder::SeqCst));
        assert_eq!(parse_fence("none"), Ok(None));
        assert!(parse_order("consume").is_err());
    }

    #[test]
    fn auto_compile_conflicts_with_mapping() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code =
            run_from_args(["mbct", "diff", "a.litmus", "--auto-compile", "--mapping", "m.json"], &mut out, &mut err);
        assert_eq!(code, EXIT_ERROR);
        assert!(String::from_utf8(err).unwrap().contains("cannot be used with"));
    }
}
