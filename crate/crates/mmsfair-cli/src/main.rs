//! Command-line front end: instance generation, solving, verification, batch
//! benchmarking, and transversal utilities. Every code path is deterministic
//! given `--seed`; repeated invocations produce byte-identical output.
//!
//! Exit codes: 0 = the algorithm's advertised guarantee held (or nothing was
//! checked), 1 = guarantee violated, 2 = usage or parse error, 3 = an
//! enumeration cap was exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use mmsfair::additive::{cut_and_choose, greedy_max_edge};
use mmsfair::corpus::{random_additive, random_subadditive, random_xos};
use mmsfair::counterexample::{
    fig_4xos_conflict_graph, gen_complete_unit, gen_greedy_bad, gen_mms_not_pmms,
    gen_subadditive_upper, gen_xos_pmms_upper, gen_xos_upper,
};
use mmsfair::oracle::{best_minmax_ratio, compute_mms, verify, Objective, SearchSpace};
use mmsfair::rational::{format_rational, parse_rational, qf, qi, Q};
use mmsfair::subadditive::{subadditive_half_mms, subadditive_half_pmms};
use mmsfair::transversal::{
    block_metrics, degree_threshold, find_its, hall_matching, search_no_its, MatchingResult,
    MultipartiteGraph,
};
use mmsfair::xos::{
    construct_two_thirds, xos_half_out_of_two, xos_three_agents,
    xos_two_agents,
};
use mmsfair::{
    parse_allocation, parse_instance, serialize_allocation,
    serialize_instance, Allocation, Error, FairnessReport, Instance, OracleLimits,
};

#[derive(Parser)]
#[command(name = "mmsfair", about = "Maximin-share fair allocation on multigraphs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance (named preset or seeded random family).
    Gen(GenArgs),
    /// Run a solver on an instance and report the fairness it achieved.
    Solve(SolveArgs),
    /// Verify an allocation against an instance.
    Verify(VerifyArgs),
    /// Run seeded random trials and emit one CSV row per agent and algorithm.
    Bench(BenchArgs),
    /// Independent transversal utilities on multipartite graphs.
    Its(ItsArgs),
    /// Print the exact 1-out-of-d maximin table of an instance.
    Mms(MmsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    GreedyBad,
    CompleteUnit,
    MmsNotPmms,
    XosPmmsUpper,
    SubadditiveUpper,
    XosUpper,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Additive,
    Xos,
    Subadditive,
}

#[derive(Args)]
struct GenArgs {
    /// Named counterexample instance.
    #[arg(long, conflicts_with = "random")]
    preset: Option<Preset>,
    /// Random family (additive | xos | subadditive).
    #[arg(long)]
    random: Option<Family>,
    /// Agent count.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Edge count (random families).
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Largest integer weight drawn (random families).
    #[arg(long, default_value_t = 10)]
    max_weight: u32,
    /// Clauses per agent (random xos).
    #[arg(long, default_value_t = 2)]
    clauses: usize,
    /// Large-edge weight for the mms-not-pmms preset.
    #[arg(long, default_value_t = 10)]
    m_weight: i64,
    /// Isolated agents appended by the xos-pmms-upper preset.
    #[arg(long, default_value_t = 0)]
    pad: usize,
    /// Conflict graph JSON for the xos-upper preset (defaults to the built-in
    /// 4-part pattern with b = 4).
    #[arg(long)]
    conflict: Option<PathBuf>,
    /// Per-bundle item count for the xos-upper preset.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the preset's companion allocation, when it has one.
    #[arg(long)]
    alloc_out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// Pairwise cut-and-choose (additive: exact MMS and PMMS).
    CutChoose,
    /// Max-edge greedy (additive: 1-out-of-3).
    Greedy,
    /// Two XOS agents, (1 - 1/d)-out-of-d.
    Xos2,
    /// Three XOS agents, (1 - 1/d)-out-of-d.
    Xos3,
    /// Any number of XOS agents, 1/2-out-of-2.
    XosHalf2,
    /// Any number of XOS agents, 2/3-MMS.
    Xos23,
    /// Subadditive agents, 1/2-MMS.
    SubHalf,
    /// Subadditive agents, 1/2-PMMS.
    SubPmms,
    /// Exhaustive best min-ratio allocation search.
    Exhaustive,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    algorithm: Algorithm,
    /// Bundle count d where the algorithm takes one (defaults per algorithm).
    #[arg(long)]
    d: Option<usize>,
    /// Include the run trace in the JSON output.
    #[arg(long)]
    trace: bool,
    /// Write the allocation JSON here as well.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the fairness report JSON here as well.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    allocation: PathBuf,
    #[arg(long)]
    d: Option<usize>,
    /// Fail (exit 1) if some agent's 1-out-of-d ratio is below this rational.
    #[arg(long)]
    require_mms: Option<String>,
    /// Fail (exit 1) if some agent's pairwise ratio is below this rational.
    #[arg(long)]
    require_pmms: Option<String>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    max_weight: u32,
    #[arg(long, default_value_t = 2)]
    clauses: usize,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock microseconds per run (off by default so output is
    /// byte-identical across runs).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct ItsArgs {
    /// Multipartite graph JSON file.
    graph: Option<PathBuf>,
    /// Search the graph for an independent transversal of this size.
    #[arg(long)]
    size: Option<usize>,
    /// Print block metrics of the graph.
    #[arg(long)]
    metrics: bool,
    /// Maximum matching / Hall certificate (2-partite graphs).
    #[arg(long)]
    matching: bool,
    /// Search for a no-transversal graph: "parts,size,degree".
    #[arg(long)]
    search: Option<String>,
    /// Degree threshold for "agents,bundles".
    #[arg(long)]
    delta: Option<String>,
    #[arg(long, default_value_t = 2_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MmsArgs {
    instance: PathBuf,
    /// Bundle count (defaults to the agent count).
    #[arg(long)]
    d: Option<usize>,
    /// Also print the canonical partitions.
    #[arg(long)]
    partitions: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Its(args) => cmd_its(args),
        Command::Mms(args) => cmd_mms(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CapExceeded(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, Error> {
    let (inst, companion): (Instance, Option<Allocation>) = match (args.preset, args.random) {
        (Some(preset), None) => match preset {
            Preset::GreedyBad => (gen_greedy_bad(args.n)?, None),
            Preset::CompleteUnit => (gen_complete_unit(args.n)?, None),
            Preset::MmsNotPmms => {
                let (inst, alloc) = gen_mms_not_pmms(args.m_weight)?;
                (inst, Some(alloc))
            }
            Preset::XosPmmsUpper => {
                let (inst, alloc) = gen_xos_pmms_upper(args.pad)?;
                (inst, Some(alloc))
            }
            Preset::SubadditiveUpper => (gen_subadditive_upper(args.n)?.0, None),
            Preset::XosUpper => {
                let (graph, b) = match &args.conflict {
                    Some(path) => {
                        let text = fs::read_to_string(path)?;
                        let g = MultipartiteGraph::from_json(&text)?;
                        let b = args.b.unwrap_or(g.max_degree());
                        (g, b)
                    }
                    None => {
                        let g = fig_4xos_conflict_graph();
                        (g, args.b.unwrap_or(4))
                    }
                };
                (gen_xos_upper(&graph, b)?, None)
            }
        },
        (None, Some(family)) => {
            let seed = args.seed.unwrap_or(0);
            let inst = match family {
                Family::Additive => random_additive(args.n, args.m, args.max_weight, seed)?,
                Family::Xos => random_xos(args.n, args.m, args.clauses, args.max_weight, seed)?,
                Family::Subadditive => random_subadditive(args.n, args.m, seed)?,
            };
            (inst, None)
        }
        _ => {
            return Err(Error::Parse(
                "choose exactly one of --preset or --random".into(),
            ))
        }
    };
    emit(&args.out, &serialize_instance(&inst))?;
    if let Some(path) = &args.alloc_out {
        match companion {
            Some(alloc) => fs::write(path, serialize_allocation(&alloc))?,
            None => {
                return Err(Error::Parse(
                    "this preset has no companion allocation".into(),
                ))
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_instance(path: &PathBuf) -> Result<Instance, Error> {
    parse_instance(&fs::read_to_string(path)?)
}

struct SolveOutcome {
    alloc: Allocation,
    d: usize,
    trace: Option<serde_json::Value>,
    /// (mms threshold, pmms threshold) the run promises, as exact rationals.
    guarantee: (Option<Q>, Option<Q>),
}

fn run_algorithm(
    inst: &Instance,
    algorithm: Algorithm,
    d_flag: Option<usize>,
    limits: &OracleLimits,
) -> Result<SolveOutcome, Error> {
    let n = inst.n();
    Ok(match algorithm {
        Algorithm::CutChoose => {
            let (alloc, trace) = cut_and_choose(inst, limits)?;
            SolveOutcome {
                alloc,
                d: d_flag.unwrap_or(n),
                trace: Some(serde_json::to_value(&trace).expect("trace serializes")),
                guarantee: (Some(qi(1)), Some(qi(1))),
            }
        }
        Algorithm::Greedy => {
            let (alloc, trace) = greedy_max_edge(inst)?;
            SolveOutcome {
                alloc,
                d: d_flag.unwrap_or(3),
                trace: Some(serde_json::to_value(&trace).expect("trace serializes")),
                guarantee: (Some(qi(1)), None),
            }
        }
        Algorithm::Xos2 => {
            let d = d_flag.unwrap_or(2);
            let (alloc, _) = xos_two_agents(inst, d, limits)?;
            SolveOutcome {
                alloc,
                d,
                trace: None,
                guarantee: (Some(qi(1) - qf(1, d as i64)), None),
            }
        }
        Algorithm::Xos3 => {
            let d = d_flag.unwrap_or(3);
            let (alloc, _, _) = xos_three_agents(inst, d, limits)?;
            SolveOutcome {
                alloc,
                d,
                trace: None,
                guarantee: (Some(qi(1) - qf(1, d as i64)), None),
            }
        }
        Algorithm::XosHalf2 => {
            let (alloc, trace, _) = xos_half_out_of_two(inst, limits)?;
            SolveOutcome {
                alloc,
                d: 2,
                trace: Some(serde_json::to_value(&trace).expect("trace serializes")),
                guarantee: (Some(qf(1, 2)), None),
            }
        }
        Algorithm::Xos23 => {
            let (alloc, _, _) = construct_two_thirds(inst, limits)?;
            SolveOutcome { alloc, d: n, trace: None, guarantee: (Some(qf(2, 3)), None) }
        }
        Algorithm::SubHalf => {
            let (alloc, _) = subadditive_half_mms(inst, None, limits)?;
            SolveOutcome { alloc, d: n, trace: None, guarantee: (Some(qf(1, 2)), None) }
        }
        Algorithm::SubPmms => {
            let (alloc, trace) = subadditive_half_pmms(inst, limits)?;
            SolveOutcome {
                alloc,
                d: d_flag.unwrap_or(n),
                trace: Some(serde_json::to_value(&trace).expect("trace serializes")),
                guarantee: (None, Some(qf(1, 2))),
            }
        }
        Algorithm::Exhaustive => {
            let d = d_flag.unwrap_or(n);
            let (_, alloc) =
                best_minmax_ratio(inst, d, SearchSpace::Allocations, Objective::Mms, limits)?;
            SolveOutcome { alloc, d, trace: None, guarantee: (None, None) }
        }
    })
}

fn report_table(report: &FairnessReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "d={} partition={} orientation={} frugal={}\n",
        report.d, report.is_partition, report.is_orientation, report.is_frugal
    ));
    out.push_str("agent  mu  value  mms_ratio  pmms  pmms_ratio  frugal\n");
    for a in &report.agents {
        out.push_str(&format!(
            "{}  {}  {}  {}  {}  {}  {}\n",
            a.agent,
            format_rational(&a.mu),
            format_rational(&a.value),
            a.mms_ratio,
            format_rational(&a.pmms_threshold),
            a.pmms_ratio,
            a.frugal
        ));
    }
    out
}

fn guarantee_violation(report: &FairnessReport, guarantee: &(Option<Q>, Option<Q>)) -> Option<String> {
    if let Some(alpha) = &guarantee.0 {
        for a in &report.agents {
            if !a.mms_ratio.at_least(alpha) {
                return Some(format!(
                    "agent {} got {} of maximin {} (ratio {}, promised {})",
                    a.agent,
                    format_rational(&a.value),
                    format_rational(&a.mu),
                    a.mms_ratio,
                    format_rational(alpha)
                ));
            }
        }
    }
    if let Some(alpha) = &guarantee.1 {
        for a in &report.agents {
            if !a.pmms_ratio.at_least(alpha) {
                return Some(format!(
                    "agent {} got {} of pairwise threshold {} (ratio {}, promised {})",
                    a.agent,
                    format_rational(&a.value),
                    format_rational(&a.pmms_threshold),
                    a.pmms_ratio,
                    format_rational(alpha)
                ));
            }
        }
    }
    None
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let inst = read_instance(&args.instance)?;
    let limits = OracleLimits::default();
    let outcome = run_algorithm(&inst, args.algorithm, args.d, &limits)?;
    let report = verify(&inst, &outcome.alloc, outcome.d, None, &limits)?;
    let mut payload = serde_json::json!({
        "allocation": outcome.alloc,
        "report": report,
    });
    if args.trace {
        if let Some(trace) = &outcome.trace {
            payload["trace"] = trace.clone();
        }
    }
    println!("{}", serde_json::to_string_pretty(&payload).expect("payload serializes"));
    eprint!("{}", report_table(&report));
    if let Some(path) = &args.out {
        fs::write(path, serialize_allocation(&outcome.alloc))?;
    }
    if let Some(path) = &args.report {
        fs::write(path, serde_json::to_string_pretty(&report).expect("report serializes"))?;
    }
    match guarantee_violation(&report, &outcome.guarantee) {
        Some(msg) => {
            eprintln!("guarantee violated: {msg}");
            Ok(ExitCode::from(1))
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let inst = read_instance(&args.instance)?;
    let alloc = parse_allocation(&fs::read_to_string(&args.allocation)?)?;
    let limits = OracleLimits::default();
    let d = args.d.unwrap_or(inst.n());
    let report = verify(&inst, &alloc, d, None, &limits)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    eprint!("{}", report_table(&report));
    if let Some(path) = &args.report {
        fs::write(path, serde_json::to_string_pretty(&report).expect("report serializes"))?;
    }
    let guarantee = (
        args.require_mms.as_deref().map(parse_rational).transpose()?,
        args.require_pmms.as_deref().map(parse_rational).transpose()?,
    );
    match guarantee_violation(&report, &guarantee) {
        Some(msg) => {
            eprintln!("requirement violated: {msg}");
            Ok(ExitCode::from(1))
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

fn bench_algorithms(family: Family, n: usize) -> Vec<Algorithm> {
    match family {
        Family::Additive => vec![Algorithm::CutChoose, Algorithm::Greedy],
        Family::Xos => {
            let main = match n {
                0 | 1 => Algorithm::XosHalf2,
                2 => Algorithm::Xos2,
                3 => Algorithm::Xos3,
                _ => Algorithm::Xos23,
            };
            vec![Algorithm::XosHalf2, main]
        }
        Family::Subadditive => vec![Algorithm::SubHalf, Algorithm::SubPmms],
    }
}

fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::CutChoose => "cut-choose",
        Algorithm::Greedy => "greedy",
        Algorithm::Xos2 => "xos-2",
        Algorithm::Xos3 => "xos-3",
        Algorithm::XosHalf2 => "xos-half2",
        Algorithm::Xos23 => "xos-23",
        Algorithm::SubHalf => "sub-half",
        Algorithm::SubPmms => "sub-pmms",
        Algorithm::Exhaustive => "exhaustive",
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, Error> {
    let limits = OracleLimits::default();
    let rows: Vec<Result<Vec<String>, Error>> = (0..args.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = args.seed + trial;
            let inst = match args.family {
                Family::Additive => random_additive(args.n, args.m, args.max_weight, seed)?,
                Family::Xos => random_xos(args.n, args.m, args.clauses, args.max_weight, seed)?,
                Family::Subadditive => random_subadditive(args.n, args.m, seed)?,
            };
            let digest = fnv_digest(&serialize_instance(&inst));
            let mut lines = Vec::new();
            for algorithm in bench_algorithms(args.family, args.n) {
                let started = std::time::Instant::now();
                let outcome = run_algorithm(&inst, algorithm, None, &limits)?;
                let micros = if args.timings {
                    started.elapsed().as_micros() as u64
                } else {
                    0
                };
                let report = verify(&inst, &outcome.alloc, outcome.d, None, &limits)?;
                for a in &report.agents {
                    lines.push(format!(
                        "{trial},{seed},{},{},{},{},{},{},{},{},{},{},{},{micros}",
                        algorithm_name(algorithm),
                        args.n,
                        inst.m(),
                        outcome.d,
                        a.agent,
                        format_rational(&a.mu),
                        format_rational(&a.value),
                        a.mms_ratio,
                        a.pmms_ratio,
                        a.frugal,
                        report.is_orientation,
                    ));
                }
            }
            let _ = digest;
            Ok(lines)
        })
        .collect();
    let mut csv = String::from(
        "trial,seed,algorithm,n,m,d,agent,mu,value,mms_ratio,pmms_ratio,frugal,orientation,micros\n",
    );
    for row in rows {
        for line in row? {
            csv.push_str(&line);
            csv.push('\n');
        }
    }
    emit(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn fnv_digest(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

fn cmd_its(args: ItsArgs) -> Result<ExitCode, Error> {
    if let Some(spec) = &args.delta {
        let (n, d) = parse_pair(spec)?;
        let value = degree_threshold(n, d)?;
        let payload = serde_json::json!({ "n": n, "d": d, "degree_threshold": value });
        emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(spec) = &args.search {
        let (r, d, b) = parse_triple(spec)?;
        let found = search_no_its(r, d, b, args.budget, args.seed)?;
        let payload = match &found {
            Some(g) => serde_json::json!({
                "found": true,
                "parts": g.parts,
                "edges": g.edges,
                "max_degree": g.max_degree(),
            }),
            None => serde_json::json!({ "found": false }),
        };
        emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
        return Ok(ExitCode::SUCCESS);
    }
    let path = args
        .graph
        .as_ref()
        .ok_or_else(|| Error::Parse("a graph file is required".into()))?;
    let graph = MultipartiteGraph::from_json(&fs::read_to_string(path)?)?;
    if args.metrics {
        let m = block_metrics(&graph);
        let payload = serde_json::json!({
            "thickness": m.thickness,
            "max_degree": m.max_degree,
            "max_block_average_degree": format_rational(&m.max_block_average_degree),
            "part_average_degree": m
                .part_average_degree
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>(),
        });
        emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
        return Ok(ExitCode::SUCCESS);
    }
    if args.matching {
        let payload = match hall_matching(&graph)? {
            MatchingResult::Perfect(m) => serde_json::json!({ "matching": m, "deficient": false }),
            MatchingResult::Deficient { matching, side, violator } => serde_json::json!({
                "matching": matching,
                "deficient": true,
                "side": side,
                "violator": violator,
            }),
        };
        emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
        return Ok(ExitCode::SUCCESS);
    }
    let size = args.size.unwrap_or(1);
    let found = find_its(&graph, size, args.budget)?;
    let payload = match &found {
        Some(pick) => serde_json::json!({ "size": size, "transversal": pick }),
        None => serde_json::json!({ "size": size, "transversal": serde_json::Value::Null }),
    };
    emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_pair(spec: &str) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!("expected \"a,b\", got {spec:?}")));
    }
    Ok((
        parts[0].trim().parse().map_err(|_| Error::Parse(format!("bad number in {spec:?}")))?,
        parts[1].trim().parse().map_err(|_| Error::Parse(format!("bad number in {spec:?}")))?,
    ))
}

fn parse_triple(spec: &str) -> Result<(usize, usize, usize), Error> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected \"r,d,b\", got {spec:?}")));
    }
    let mut nums = parts.iter().map(|p| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad number in {spec:?}")))
    });
    Ok((
        nums.next().unwrap()?,
        nums.next().unwrap()?,
        nums.next().unwrap()?,
    ))
}

fn cmd_mms(args: MmsArgs) -> Result<ExitCode, Error> {
    let inst = read_instance(&args.instance)?;
    let limits = OracleLimits::default();
    let d = args.d.unwrap_or(inst.n());
    let mut agents = Vec::new();
    for agent in inst.graph.agents() {
        let res = compute_mms(&inst, agent, d, &limits)?;
        let mut entry = serde_json::json!({
            "agent": agent,
            "d": d,
            "mu": format_rational(&res.mu),
        });
        if args.partitions {
            entry["canonical"] = serde_json::json!(res
                .canonical
                .parts
                .iter()
                .map(|p| p.iter().copied().collect::<Vec<_>>())
                .collect::<Vec<_>>());
        }
        agents.push(entry);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "d": d, "agents": agents })).unwrap()
    );
    Ok(ExitCode::SUCCESS)
}
