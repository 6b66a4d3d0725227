//! `orbitforge`: batch front end for orbit enumeration, spectra, region
//! certificates, searches, covers and circuit assembly.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orbitforge::asymptotics::{self, Family, SaddleParams};
use orbitforge::boolfn::{enumerate_orbits, orbit_size, sample_automorphism};
use orbitforge::cnf::compose;
use orbitforge::cover::{self, Strategy};
use orbitforge::regions::{self, RegionConfig, SamplingPolicy};
use orbitforge::search;
use orbitforge::spectrum::{coeff_fast, composition_spectrum};
use orbitforge::{BlockKind, Composition, OrbitKey};
use serde_json::json;

use output::{Format, Report};

const DEFAULT_SEED: u64 = 20_240_905;

#[derive(Parser)]
#[command(
    name = "orbitforge",
    version,
    about = "Depth-3 circuits for Inner Product, one orbit at a time"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "ORBITFORGE_THREADS")]
    threads: Option<usize>,
    /// Root seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct KeyArgs {
    /// Number of coordinates.
    #[arg(long)]
    n: usize,
    /// Coordinates with x = y = 1.
    #[arg(long)]
    p: usize,
    /// Coordinates with x != y.
    #[arg(long)]
    q: usize,
    /// Coordinates with x = y = 0 (defaults to n - p - q).
    #[arg(long)]
    r: Option<usize>,
}

impl KeyArgs {
    fn key(&self) -> Result<OrbitKey, CliError> {
        let r = match self.r {
            Some(r) => r,
            None => self
                .n
                .checked_sub(self.p + self.q)
                .ok_or_else(|| CliError::usage(format!("p + q = {} exceeds n = {}", self.p + self.q, self.n)))?,
        };
        let k = OrbitKey::new(self.p, self.q, r);
        if k.n() != self.n {
            return Err(CliError::usage(format!("p + q + r = {} but n = {}", k.n(), self.n)));
        }
        Ok(k)
    }
}

#[derive(Subcommand)]
enum Command {
    /// List every orbit of IP_n with its size.
    Orbits {
        #[arg(long)]
        n: usize,
    },
    /// Spectrum of a composition, or one coefficient of it.
    Spectrum {
        /// Block counts, e.g. "Matching:2,Nand:3".
        #[arg(long)]
        composition: String,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
    },
    /// Regions containing an orbit.
    Classify {
        #[command(flatten)]
        key: KeyArgs,
    },
    /// Region recipes for an orbit with exact capture ratios.
    Construct {
        #[command(flatten)]
        key: KeyArgs,
        /// Restrict to one region.
        #[arg(long)]
        region: Option<u8>,
    },
    /// Best construction for every sampled orbit, checked against log2(9/5) + slack.
    Certify {
        #[arg(long)]
        n: usize,
        /// Random orbits per region when sampling (used above n = 200).
        #[arg(long, default_value_t = 10)]
        per_region: usize,
        /// Check every orbit regardless of n.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 0.01)]
        slack: f64,
    },
    /// Building-block and composition searches.
    Search {
        #[command(subcommand)]
        what: SearchCommand,
    },
    /// Observed maximum of min(T1, T2) for region 3 or 4.
    Optimize {
        #[arg(long)]
        region: u8,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 200)]
        refine: usize,
    },
    /// Saddle-point estimates.
    Estimate {
        #[command(subcommand)]
        what: EstimateCommand,
    },
    /// Cover one orbit with random copies of a composition.
    Cover {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        composition: String,
        #[arg(long, default_value_t = 10)]
        rounds: usize,
    },
    /// Assemble a full circuit for IP_n.
    Assemble {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Regions)]
        strategy: StrategyArg,
        /// Compare against IP_n on all 4^n inputs.
        #[arg(long)]
        verify: bool,
        /// Also write the member CNFs as JSON here.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Export formulas.
    Export {
        #[command(subcommand)]
        what: ExportCommand,
    },
}

#[derive(Subcommand)]
enum SearchCommand {
    /// Pareto-optimal spectra over 1 or 2 coordinates.
    Blocks {
        #[arg(long, default_value_t = 2)]
        coords: usize,
        #[arg(long, default_value_t = 0)]
        parity: u8,
    },
    /// Exhaustive composition search producing c(n).
    Compose {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        parity: u8,
        /// Comma-separated block names (default: all six).
        #[arg(long)]
        blocks: Option<String>,
        #[arg(long, default_value_t = search::DEFAULT_SEARCH_CAP)]
        cap: usize,
        /// Include the per-orbit table.
        #[arg(long)]
        table: bool,
    },
    /// Exact mu and rho* by median-closed set enumeration (n <= 2).
    Mu {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        parity: u8,
    },
}

#[derive(Subcommand)]
enum EstimateCommand {
    /// Saddle-point estimate against the exact coefficient.
    Saddle {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[command(flatten)]
        key: KeyArgs,
        /// Recipe candidate for regions 3 and 4.
        #[arg(long, default_value_t = 1)]
        candidate: usize,
    },
}

#[derive(Subcommand)]
enum ExportCommand {
    /// DIMACS text of a composition, optionally permuted by a random automorphism.
    Dimacs {
        #[arg(long)]
        composition: String,
        /// Apply the automorphism drawn from this seed.
        #[arg(long)]
        permute: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Regions,
    Search,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    R1,
    R3,
    R4,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Verification(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<orbitforge::Error> for CliError {
    fn from(e: orbitforge::Error) -> Self {
        match e {
            orbitforge::Error::Verification(m) => CliError::Verification(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<(Report, bool), CliError>;

fn parse_composition(s: &str) -> Result<Composition, CliError> {
    Ok(Composition::parse(s)?)
}

fn run_orbits(n: usize) -> Outcome {
    if n == 0 {
        return Err(CliError::usage("n must be positive"));
    }
    let keys = enumerate_orbits(n);
    let rows: Vec<_> = keys
        .iter()
        .map(|k| {
            vec![
                n.to_string(),
                k.p.to_string(),
                k.q.to_string(),
                k.r.to_string(),
                orbit_size(*k).to_string(),
            ]
        })
        .collect();
    let json = json!({
        "n": n,
        "orbits": keys.iter().map(|k| json!({"p": k.p, "q": k.q, "r": k.r, "size": orbit_size(*k).to_string()})).collect::<Vec<_>>(),
    });
    let text = keys
        .iter()
        .map(|k| format!("{k} size={}", orbit_size(*k)))
        .collect::<Vec<_>>()
        .join("\n");
    Ok((
        Report::new(json, text).with_table(&["n", "p", "q", "r", "size"], rows),
        true,
    ))
}

fn run_spectrum(composition: &str, p: Option<usize>, q: Option<usize>, r: Option<usize>) -> Outcome {
    let c = parse_composition(composition)?;
    let n = c.n();
    match (p, q) {
        (Some(p), Some(q)) => {
            let r = r
                .or_else(|| n.checked_sub(p + q))
                .ok_or_else(|| CliError::usage("p + q exceeds n"))?;
            let k = OrbitKey::new(p, q, r);
            let v = coeff_fast(&c, &k)?;
            let json = json!({"composition": c, "key": k, "coefficient": v.to_string()});
            Ok((Report::new(json, format!("{c} at {k}: {v}")), true))
        }
        (None, None) => {
            if n > 64 {
                return Err(CliError::usage(format!(
                    "full spectrum of degree {n} is too large; pass --p and --q for one coefficient"
                )));
            }
            let s = composition_spectrum(&c);
            let rows: Vec<_> = s
                .terms()
                .map(|(k, v)| vec![k.p.to_string(), k.q.to_string(), k.r.to_string(), v.to_string()])
                .collect();
            let text = s
                .terms()
                .map(|(k, v)| format!("{k} {v}"))
                .collect::<Vec<_>>()
                .join("\n");
            let json = serde_json::to_value(&s).expect("spectrum serializes");
            Ok((Report::new(json, text).with_table(&["p", "q", "r", "c"], rows), true))
        }
        _ => Err(CliError::usage("pass both --p and --q, or neither")),
    }
}

fn run_classify(key: KeyArgs) -> Outcome {
    let k = key.key()?;
    let rs = regions::classify(&k);
    let json = json!({"key": k, "regions": rs});
    let text = format!(
        "{k}: {}",
        rs.iter().map(|r| format!("R{r}")).collect::<Vec<_>>().join(" ")
    );
    Ok((Report::new(json, text), true))
}

fn run_construct(key: KeyArgs, region: Option<u8>) -> Outcome {
    let k = key.key()?;
    let cfg = RegionConfig::default();
    let rids = match region {
        Some(r) => vec![r],
        None => regions::classify(&k),
    };
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for rid in rids {
        match regions::region_composition(rid, &k, &cfg) {
            Ok(cands) => {
                let mut rep = regions::ratio_best(&cands, &k)?;
                rep.region = rid;
                rep.route = "recipe".into();
                lines.push(format!(
                    "R{rid}: {} ratio={} exponent={:.7}",
                    rep.composition,
                    ratio_text(&rep),
                    rep.exponent
                ));
                entries.push(json!({"region": rid, "candidates": cands, "best": rep}));
            }
            Err(e) => {
                lines.push(format!("R{rid}: {e}"));
                entries.push(json!({"region": rid, "error": e.to_string()}));
            }
        }
    }
    let best = regions::certify_key(&k, &cfg)?;
    lines.push(format!(
        "best: R{} {} {} exponent={:.7}",
        best.region, best.route, best.composition, best.exponent
    ));
    let json = json!({"key": k, "recipes": entries, "best": best});
    Ok((Report::new(json, lines.join("\n")), true))
}

fn ratio_text(rep: &regions::RatioReport) -> String {
    match &rep.ratio {
        Some(r) if r.denom() == &1u32.into() => r.numer().to_string(),
        Some(r) => format!("{}/{}", r.numer(), r.denom()),
        None => "inf".into(),
    }
}

fn run_certify(n: usize, per_region: usize, all: bool, slack: f64, seed: u64) -> Outcome {
    let policy = if all {
        SamplingPolicy::All
    } else if n <= 200 {
        SamplingPolicy::auto(n, seed)
    } else {
        SamplingPolicy::Stratified { per_region, seed }
    };
    eprintln!("certify: n={n}, sampling {policy:?}");
    let cert = regions::certify(n, policy, &RegionConfig::default(), slack)?;
    eprintln!("certify: {} orbits checked", cert.reports.len());
    let csv = regions::reports_to_csv(&cert.reports)?;
    let text = format!(
        "n={} orbits={} max_exponent={:.7} worst={} threshold={:.7} {}",
        cert.n,
        cert.reports.len(),
        cert.max_exponent,
        cert.worst,
        cert.threshold,
        if cert.passed { "PASS" } else { "FAIL" }
    );
    let passed = cert.passed;
    let json = serde_json::to_value(&cert).expect("certification serializes");
    Ok((Report::new(json, text).with_csv(csv), passed))
}

fn parse_blocks(list: Option<&str>) -> Result<Vec<BlockKind>, CliError> {
    match list {
        None => Ok(BlockKind::ALL.to_vec()),
        Some(s) => s
            .split(',')
            .map(|b| b.trim().parse::<BlockKind>().map_err(CliError::from))
            .collect(),
    }
}

fn run_search(what: SearchCommand) -> Outcome {
    match what {
        SearchCommand::Blocks { coords, parity } => {
            let entries = search::pareto_blocks(coords, parity)?;
            let text = entries
                .iter()
                .map(|e| {
                    let terms = e.spectrum.terms().map(|(k, c)| format!("{c}*{k}")).collect::<Vec<_>>();
                    terms.join(" + ").to_string()
                })
                .collect::<Vec<_>>()
                .join("\n");
            let json = json!({"coords": coords, "parity": parity, "blocks": entries});
            Ok((Report::new(json, text), true))
        }
        SearchCommand::Compose {
            n,
            parity,
            blocks,
            cap,
            table,
        } => {
            let blocks = parse_blocks(blocks.as_deref())?;
            eprintln!("search: n={n}, parity={parity}");
            let res = search::compose_search(n, &blocks, parity, cap)?;
            let summary = format!(
                "n={} c={:.7} worst={} compositions={}",
                res.n, res.c, res.worst, res.compositions_examined
            );
            let csv = if table {
                search::search_to_csv(&res)?
            } else {
                format!("n,c\n{},{:.7}\n", res.n, res.c)
            };
            let mut json = serde_json::to_value(&res).expect("search result serializes");
            if !table {
                json.as_object_mut().expect("object").remove("entries");
            }
            Ok((Report::new(json, summary).with_csv(csv), true))
        }
        SearchCommand::Mu { n, parity } => {
            let rho = search::rho_star(n, parity)?;
            let text = rho
                .per_orbit
                .iter()
                .map(|m| format!("{} mu={} size={}", m.key, m.mu, m.orbit_size))
                .chain([format!("rho*={}", rho.rho)])
                .collect::<Vec<_>>()
                .join("\n");
            Ok((Report::new(serde_json::to_value(&rho).expect("serializes"), text), true))
        }
    }
}

fn run_optimize(region: u8, step: f64, refine: usize) -> Outcome {
    let rep = asymptotics::maximize_min_t(region, step, refine)?;
    let text = format!(
        "region {} observed max {:.7} at p̂={:.6} r̂={:.6} (reference bound {})",
        rep.region, rep.observed_max, rep.argmax.p_hat, rep.argmax.r_hat, rep.reference_bound
    );
    let passed = rep.observed_max <= rep.reference_bound;
    Ok((
        Report::new(serde_json::to_value(rep).expect("serializes"), text),
        passed,
    ))
}

fn run_saddle(family: FamilyArg, key: KeyArgs, candidate: usize) -> Outcome {
    let k = key.key()?;
    let n = k.n() as f64;
    let pick = |consts: [(f64, f64); 2]| {
        consts
            .get(candidate.wrapping_sub(1))
            .copied()
            .ok_or_else(|| CliError::usage("candidate must be 1 or 2"))
    };
    let (fam, params) = match family {
        FamilyArg::R1 => {
            let rounded = asymptotics::r1_params(k.n(), k.p as f64 / n, k.r as f64 / n);
            (Family::R1, rounded)
        }
        FamilyArg::R3 => {
            let (b, c) = pick(asymptotics::R3_CONSTS)?;
            (
                Family::R3,
                SaddleParams {
                    a: 0.0,
                    b: (b * n).round(),
                    c: (2.0 * c * n).round(),
                    p: k.p as f64,
                    q: k.q as f64,
                    r: k.r as f64,
                },
            )
        }
        FamilyArg::R4 => {
            let (a, c) = pick(asymptotics::R4_CONSTS)?;
            (
                Family::R4,
                SaddleParams {
                    a: (a * n).round(),
                    b: 0.0,
                    c: (2.0 * c * n).round(),
                    p: k.p as f64,
                    q: k.q as f64,
                    r: k.r as f64,
                },
            )
        }
    };
    if params.a.fract() != 0.0 || params.b.fract() != 0.0 || params.c < 0.0 || params.a < 0.0 || params.b < 0.0 {
        return Err(CliError::usage(format!(
            "recipe counts are not non-negative integers at {k}"
        )));
    }
    let sp = asymptotics::critical_point(fam, params)?;
    let rep = asymptotics::saddle_compare(&sp)?;
    let text = format!(
        "{} {} u0={:.6} v0={:.6} log2 estimate={:.6} log2 exact={:.6} relative error={:.3e}",
        rep.key, rep.composition, sp.u0, sp.v0, rep.log2_estimate, rep.log2_exact, rep.relative_error
    );
    Ok((Report::new(serde_json::to_value(&rep).expect("serializes"), text), true))
}

fn run_cover(key: KeyArgs, composition: &str, rounds: usize, seed: u64) -> Outcome {
    let k = key.key()?;
    let c = parse_composition(composition)?;
    let f = compose(&c, k.n())?;
    let mut rep = cover::cover_orbit(&f, &k, seed, rounds, cover::VERIFY_CAP)?;
    rep.base = c.to_string();
    let text = format!(
        "{} |S|={} captured={} t={} rounds={} covered={}",
        rep.key, rep.orbit_size, rep.captured, rep.t_target, rep.rounds, rep.covered
    );
    Ok((
        Report::new(serde_json::to_value(&rep).expect("serializes"), text),
        rep.covered,
    ))
}

fn run_assemble(n: usize, strategy: StrategyArg, verify: bool, export: Option<PathBuf>, seed: u64) -> Outcome {
    let strategy = match strategy {
        StrategyArg::Regions => Strategy::Regions,
        StrategyArg::Search => Strategy::Search,
    };
    eprintln!("assemble: n={n}, strategy={strategy:?}");
    let asm = cover::assemble_circuit(n, strategy, seed)?;
    let mut lines = vec![format!(
        "n={} members={} sum_t={} rho_hat={:.4} n*|orb|*rho_hat={:.1}",
        asm.n, asm.members, asm.t_total, asm.rho_hat, asm.bound_shape
    )];
    let mut json = serde_json::to_value(&asm).expect("assembly serializes");
    let mut passed = true;
    if verify {
        eprintln!("assemble: checking all {} inputs", 1u64 << (2 * n));
        let v = cover::verify_circuit(&asm.circuit)?;
        passed = v.passed();
        lines.push(format!("verified {}/{}", v.agreed, v.inputs));
        json["verification"] = serde_json::to_value(&v).expect("serializes");
    }
    if let Some(path) = export {
        let body = serde_json::to_string_pretty(&asm.circuit.to_json()).expect("circuit serializes");
        std::fs::write(&path, body + "\n").map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    Ok((Report::new(json, lines.join("\n")), passed))
}

fn run_export(what: ExportCommand) -> Outcome {
    let ExportCommand::Dimacs { composition, permute } = what;
    let c = parse_composition(&composition)?;
    let mut f = compose(&c, c.n())?;
    if let Some(s) = permute {
        f = f.permuted(&sample_automorphism(c.n(), s));
    }
    let text = f.to_dimacs();
    let json = json!({"composition": c, "dimacs": text});
    Ok((Report::new(json, text.trim_end().to_string()), true))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Orbits { n } => run_orbits(n),
        Command::Spectrum { composition, p, q, r } => run_spectrum(&composition, p, q, r),
        Command::Classify { key } => run_classify(key),
        Command::Construct { key, region } => run_construct(key, region),
        Command::Certify {
            n,
            per_region,
            all,
            slack,
        } => run_certify(n, per_region, all, slack, cli.seed),
        Command::Search { what } => run_search(what),
        Command::Optimize { region, step, refine } => run_optimize(region, step, refine),
        Command::Estimate {
            what: EstimateCommand::Saddle { family, key, candidate },
        } => run_saddle(family, key, candidate),
        Command::Cover {
            key,
            composition,
            rounds,
        } => run_cover(key, &composition, rounds, cli.seed),
        Command::Assemble {
            n,
            strategy,
            verify,
            export,
        } => run_assemble(n, strategy, verify, export, cli.seed),
        Command::Export { what } => run_export(what),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let format = cli.format;
    let out_path = cli.output.clone();
    match run(cli) {
        Ok((report, passed)) => {
            if let Err(e) = report.emit(format, out_path.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
    }
}
