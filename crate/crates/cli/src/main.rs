//! `mapwalk`: realize Markov chains as random walks driven by IID mappings,
//! sample them exactly, and compare entropies.
//!
//! Exit codes: 0 ok, 1 unreadable or malformed input, 2 violated
//! precondition (not mixing, not synchronizing, verification failure),
//! 3 exhausted budget.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mapwalk_core::chain::{classify, stationary, Classification, DEFAULT_MAX_DEN};
use mapwalk_core::coloring::{SearchConfig, TieBreak};
use mapwalk_core::entropy::{
    chain_entropy, entropy_family, entropy_gap_floor, family_min_n, is_p_uniform, law_entropy,
    two_state_family, EntropyReport,
};
use mapwalk_core::format::{self, CertificateFile, ColoringFile, LawFile, SampleReport};
use mapwalk_core::law::{
    rational_mapping_law, synchronizing_mapping_law, verify_mapping_law, RealizeConfig,
};
use mapwalk_core::rational::{self, Rational};
use mapwalk_core::sampler::{chi_square, sample_many, tv_distance, CftpConfig, CoalescenceSummary};
use mapwalk_core::{Error, MappingLaw, StochasticMatrix};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "mapwalk",
    version,
    about = "Markov chains as random walks driven by IID random mappings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Args, Clone, Serialize)]
struct Options {
    /// Seed for every random choice (coloring search, sampling).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of exact samples drawn by `sample`.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    /// Largest denominator used when rationalizing float matrix entries.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEN)]
    maxden: u64,
    /// Coupling-from-the-past depth beyond which sampling fails.
    #[arg(long, global = true, default_value_t = CftpConfig::default().depth_cap)]
    depth_cap: usize,
    /// Candidate colorings tested before the coloring search gives up.
    #[arg(long, global = true, default_value_t = SearchConfig::default().budget)]
    search_budget: u64,
    /// Edge given the extra multiplicity when building the support graph.
    #[arg(long, global = true, value_enum, default_value_t = TieBreakArg::SmallestIndex)]
    tiebreak: TieBreakArg,
    /// Directory receiving the JSON output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TieBreakArg {
    SmallestIndex,
    LargestProbability,
}

impl Options {
    fn realize_config(&self) -> RealizeConfig {
        RealizeConfig {
            tiebreak: match self.tiebreak {
                TieBreakArg::SmallestIndex => TieBreak::SmallestIndex,
                TieBreakArg::LargestProbability => TieBreak::LargestProbability,
            },
            search: SearchConfig {
                seed: self.seed,
                budget: self.search_budget,
                ..SearchConfig::default()
            },
        }
    }
}

#[derive(Subcommand, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Build a mapping law with synchronizing support for a mixing chain.
    ///
    /// Writes law.json, coloring.json and certificate.json.
    Realize {
        /// Matrix file.
        matrix: PathBuf,
    },
    /// Draw exact stationary samples by coupling from the past.
    ///
    /// Writes sample_report.json.
    Sample {
        /// Mapping-law file.
        law: PathBuf,
    },
    /// Compare the entropy of a chain with that of a mapping law for it.
    ///
    /// Writes entropy_report.json, and family_law.json when --n is given.
    Entropy {
        /// Matrix file.
        matrix: PathBuf,
        /// Mapping-law file; by default the law built by `realize` is used.
        #[arg(long)]
        law: Option<PathBuf>,
        /// Index of the entropy-approximating family member to emit.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Check exactly that a law's one-step marginal is the given chain.
    Verify {
        /// Mapping-law file.
        law: PathBuf,
        /// Matrix file.
        matrix: PathBuf,
    },
}

/// Resolved configuration echoed into every output.
#[derive(Serialize)]
struct RunConfig<'a> {
    #[serde(flatten)]
    command: &'a Command,
    #[serde(flatten)]
    options: &'a Options,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Precondition(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Precondition(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Precondition(m) | Failure::Budget(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::WordBudget { .. } | Error::SearchBudget { .. } | Error::DepthCap { .. } => {
                Failure::Budget(msg)
            }
            Error::NotMixing(_)
            | Error::NotSynchronizing
            | Error::NotPUniform
            | Error::FamilyIndexTooSmall { .. }
            | Error::NoUniqueStationaryLaw
            | Error::AssumptionA(_)
            | Error::OutOfRange(_) => Failure::Precondition(msg),
            _ => Failure::Input(msg),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path, maxden: u64) -> Outcome<StochasticMatrix> {
    format::read_matrix(&read(path)?, maxden)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_law(path: &Path) -> Outcome<MappingLaw> {
    format::read_law(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, text: &str) -> Outcome<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    format::to_json(value)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = RunConfig {
        command: &cli.command,
        options: &cli.options,
    };
    let config_json = serde_json::to_value(&config).expect("serializable");
    println!("config: {config_json}");
    let outcome = match &cli.command {
        Command::Realize { matrix } => realize(matrix, &cli.options, &config_json),
        Command::Sample { law } => sample(law, &cli.options, &config_json),
        Command::Entropy { matrix, law, n } => {
            entropy(matrix, law.as_deref(), *n, &cli.options, &config_json)
        }
        Command::Verify { law, matrix } => verify(law, matrix, &cli.options),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn require_mixing(q: &StochasticMatrix) -> Outcome {
    match classify(q) {
        Classification::Mixing => Ok(()),
        class => Err(Error::NotMixing(class).into()),
    }
}

#[derive(Serialize)]
struct CertificateOutput {
    #[serde(flatten)]
    certificate: CertificateFile,
    epsilon: String,
    coloring_phase: mapwalk_core::coloring::SearchPhase,
    config: serde_json::Value,
}

fn realize(matrix: &Path, options: &Options, config: &serde_json::Value) -> Outcome {
    let q = read_matrix(matrix, options.maxden)?;
    require_mixing(&q)?;
    let m = q.size();
    let r = synchronizing_mapping_law(&q, &options.realize_config())?;
    let verified = verify_mapping_law(&r.law, &q);
    let certificate = CertificateFile::from_word(&r.certificate, m);
    let law_path = write(&options.out, "law.json", &format::write_law(&r.law))?;
    let coloring_path = write(
        &options.out,
        "coloring.json",
        &to_json(&ColoringFile::from_coloring(&r.coloring)),
    )?;
    let certificate_path = write(
        &options.out,
        "certificate.json",
        &to_json(&CertificateOutput {
            certificate: certificate.clone(),
            epsilon: rational::format(&r.epsilon),
            coloring_phase: r.coloring_phase,
            config: config.clone(),
        }),
    )?;

    println!("states: {m}, classification: {}", Classification::Mixing);
    println!(
        "road coloring: {} colors (found in {} phase), ε = {}",
        r.coloring.degree(),
        format!("{:?}", r.coloring_phase).to_lowercase(),
        rational::format(&r.epsilon)
    );
    println!("law support: {} maps", r.law.support_len());
    for (sigma, w) in r.law.iter() {
        println!("  {sigma}  {}", rational::format(w));
    }
    let word: Vec<String> = r
        .certificate
        .letters()
        .iter()
        .map(ToString::to_string)
        .collect();
    println!(
        "certificate: [{}] sends every state to {}",
        word.join(" "),
        certificate.image
    );
    println!("verification: {}", if verified { "PASS" } else { "FAIL" });
    println!(
        "wrote {}, {}, {}",
        law_path.display(),
        coloring_path.display(),
        certificate_path.display()
    );
    if verified {
        Ok(())
    } else {
        Err(Failure::Precondition(
            "constructed law does not realize the chain".into(),
        ))
    }
}

#[derive(Serialize)]
struct SampleOutput {
    #[serde(flatten)]
    report: SampleReport,
    config: serde_json::Value,
}

fn sample(law_path: &Path, options: &Options, config: &serde_json::Value) -> Outcome {
    let law = read_law(law_path)?;
    let m = law.size();
    let cftp = CftpConfig {
        depth_cap: options.depth_cap,
    };
    let draws = sample_many(&law, options.samples, options.seed, cftp)?;
    let summary = CoalescenceSummary::from_draws(&draws, m);
    let lambda = stationary(&law.induced_matrix())?;
    let report = SampleReport {
        samples: options.samples,
        empirical: (0..m).map(|x| (x + 1, summary.counts[x])).collect(),
        stationary: (0..m)
            .map(|x| (x + 1, rational::format(lambda.get(x))))
            .collect(),
        tv_distance: tv_distance(&summary.counts, &lambda),
        chi_square_p_value: chi_square(&summary.counts, &lambda).p_value,
        mean_depth: summary.mean_depth,
        max_depth: summary.max_depth,
        seed: options.seed,
    };
    let path = write(
        &options.out,
        "sample_report.json",
        &to_json(&SampleOutput {
            report: report.clone(),
            config: config.clone(),
        }),
    )?;

    println!("samples: {}, seed: {}", report.samples, report.seed);
    println!("state  count  stationary");
    for x in 1..=m {
        println!(
            "{x:>5}  {:>5}  {}",
            report.empirical[&x], report.stationary[&x]
        );
    }
    println!("TV distance: {:.6}", report.tv_distance);
    println!("chi-square p-value: {:.6}", report.chi_square_p_value);
    println!(
        "coalescence depth: mean {:.3}, max {}",
        report.mean_depth, report.max_depth
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct Witness {
    nu: Vec<String>,
    tau: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct GapRow {
    parameter: String,
    #[serde(rename = "hN")]
    h_law: f64,
    gap: f64,
}

#[derive(Serialize)]
struct FloorSummary {
    grid: f64,
    floor: f64,
    evaluated: usize,
}

#[derive(Serialize)]
struct EntropyOutput {
    #[serde(flatten)]
    report: EntropyReport,
    law_source: &'static str,
    witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    eps_table: Vec<GapRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    family_table: Vec<GapRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_floor: Option<FloorSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<GapRow>,
    config: serde_json::Value,
}

const EPS_GRID: [(i64, i64); 5] = [(3, 10), (1, 10), (1, 100), (1, 1000), (1, 10_000)];
const FAMILY_GRID: [u64; 4] = [10, 100, 1000, 10_000];
const FLOOR_GRID: f64 = 1e-3;

/// `p` when `q = ((p, 1-p), (1-p, p))`.
fn symmetric_two_state(q: &StochasticMatrix) -> Option<Rational> {
    (q.size() == 2 && q.get(0, 0) == q.get(1, 1)).then(|| q.get(0, 0).clone())
}

fn entropy(
    matrix: &Path,
    law_path: Option<&Path>,
    n: Option<u64>,
    options: &Options,
    config: &serde_json::Value,
) -> Outcome {
    let q = read_matrix(matrix, options.maxden)?;
    let realize = options.realize_config();
    let mixing = classify(&q) == Classification::Mixing;
    let (law, law_source) = match law_path {
        Some(path) => {
            let law = read_law(path)?;
            if !verify_mapping_law(&law, &q) {
                return Err(Failure::Precondition(format!(
                    "{} is not a mapping law for the chain",
                    path.display()
                )));
            }
            (law, "file")
        }
        None if mixing => (
            synchronizing_mapping_law(&q, &realize)?.law,
            "synchronizing",
        ),
        None => (rational_mapping_law(&q), "quantile"),
    };
    let lambda = stationary(&q)?;
    let h_chain = chain_entropy(&q, &lambda);
    let witness = is_p_uniform(&q);
    let n_min = match (&witness, mixing) {
        (Some(_), true) => Some(family_min_n(&q, &realize)?),
        _ => None,
    };
    let h_law = law_entropy(&law);
    let report = EntropyReport {
        h_chain,
        h_law,
        gap: h_law - h_chain,
        p_uniform: witness.is_some(),
        n_min,
        witness: witness.clone(),
    };

    let mut eps_table = Vec::new();
    if let Some(p) = symmetric_two_state(&q).filter(|_| mixing) {
        for (a, b) in EPS_GRID {
            let eps = rational::ratio(a, b);
            if let Ok(member) = two_state_family(&p, &eps) {
                eps_table.push(GapRow {
                    parameter: format!("ε = {}", rational::format(&eps)),
                    h_law: member.h_law,
                    gap: member.h_law - member.h_chain,
                });
            }
        }
    }
    let mut family_table = Vec::new();
    if let Some(n_min) = n_min {
        for k in FAMILY_GRID.into_iter().filter(|&k| k >= n_min) {
            let h = law_entropy(&entropy_family(&q, k, &realize)?.law);
            family_table.push(GapRow {
                parameter: format!("n = {k}"),
                h_law: h,
                gap: h - h_chain,
            });
        }
    }
    let gap_floor = if mixing && witness.is_none() && q.size() <= 3 {
        let f = entropy_gap_floor(&q, FLOOR_GRID, &realize)?;
        Some(FloorSummary {
            grid: FLOOR_GRID,
            floor: f.floor,
            evaluated: f.evaluated,
        })
    } else {
        None
    };
    let mut family = None;
    let mut family_path = None;
    if let Some(n) = n {
        if !mixing {
            return Err(Error::NotMixing(classify(&q)).into());
        }
        let member = entropy_family(&q, n, &realize)?;
        let h = law_entropy(&member.law);
        family_path = Some(write(
            &options.out,
            "family_law.json",
            &format::write_law(&member.law),
        )?);
        family = Some(GapRow {
            parameter: format!("n = {n}"),
            h_law: h,
            gap: h - h_chain,
        });
    }

    println!("classification: {}", classify(&q));
    println!("h(Y) = {h_chain:.9} nats");
    println!(
        "h(N) = {h_law:.9} nats ({law_source} law, {} maps)",
        law.support_len()
    );
    println!("gap  = {:.9} nats", report.gap);
    match (&witness, n_min) {
        (Some(_), Some(n_min)) => println!("p-uniform: yes (least family index {n_min})"),
        (Some(_), None) => println!("p-uniform: yes"),
        (None, _) => println!("p-uniform: no"),
    }
    for (title, rows) in [("ε", &eps_table), ("n", &family_table)] {
        if !rows.is_empty() {
            println!("{title:>10}  {:>12}  {:>12}", "h(N)", "gap");
            for row in rows.iter() {
                println!(
                    "{:>10}  {:>12.9}  {:>12.9}",
                    row.parameter.trim_start_matches(&format!("{title} = ")),
                    row.h_law,
                    row.gap
                );
            }
        }
    }
    if let Some(f) = &gap_floor {
        println!(
            "smallest gap over synchronizing laws (grid {}): {:.9} nats",
            f.grid, f.floor
        );
    }
    if let (Some(row), Some(path)) = (&family, &family_path) {
        println!(
            "family member {}: gap {:.9} nats, written to {}",
            row.parameter,
            row.gap,
            path.display()
        );
    }

    let output = EntropyOutput {
        report,
        law_source,
        witness: witness.map(|w| Witness {
            nu: w.nu.weights().iter().map(rational::format).collect(),
            tau: w
                .tau
                .iter()
                .map(|t| t.iter().map(|z| z + 1).collect())
                .collect(),
        }),
        eps_table,
        family_table,
        gap_floor,
        family,
        config: config.clone(),
    };
    let path = write(&options.out, "entropy_report.json", &to_json(&output))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn verify(law_path: &Path, matrix: &Path, options: &Options) -> Outcome {
    let law = read_law(law_path)?;
    let q = read_matrix(matrix, options.maxden)?;
    if law.size() != q.size() {
        println!("FAIL: law on {} states, chain on {}", law.size(), q.size());
        return Err(Failure::Precondition("verification failed".into()));
    }
    let induced = law.induced_matrix();
    let mismatches: BTreeMap<(usize, usize), (String, String)> = (0..q.size())
        .flat_map(|x| (0..q.size()).map(move |y| (x, y)))
        .filter(|&(x, y)| induced.get(x, y) != q.get(x, y))
        .map(|(x, y)| {
            (
                (x + 1, y + 1),
                (
                    rational::format(induced.get(x, y)),
                    rational::format(q.get(x, y)),
                ),
            )
        })
        .collect();
    if mismatches.is_empty() {
        let file = LawFile::from_law(&law);
        println!(
            "PASS: {} maps realize the {}-state chain exactly",
            file.support.len(),
            q.size()
        );
        Ok(())
    } else {
        println!("FAIL: {} entries differ", mismatches.len());
        for ((x, y), (got, want)) in &mismatches {
            println!("  ({x}, {y}): law gives {got}, chain has {want}");
        }
        Err(Failure::Precondition("verification failed".into()))
    }
}
