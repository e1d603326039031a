mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sierpile::census::{self, ForestClass, FOREST_CLASSES};
use sierpile::expectations::{self, printed, Sink, SINKS};
use sierpile::gasket::{build_graph, contract_sinks, Corner, VertexAddr};
use sierpile::heights::{self, desc_to_height, DescDist};
use sierpile::oracle;
use sierpile::rat::{decimal, fmt_q, to_f64, Q};
use sierpile::sandpile::{self, SandpileConfig};
use sierpile::Error;

#[derive(Parser, Debug)]
#[command(
    name = "sierpile",
    version,
    about = "Abelian sandpiles and spanning forests on Sierpinski gasket graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Render probabilities as floating point numbers.
    #[arg(long, global = true)]
    float: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SampleKind {
    Sandpile,
    Lerw,
    Wilson,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Fast,
    Full,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExportKind {
    Graph,
    Heatmap,
    Census,
    Decomposition,
    Expectations,
    Tables,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Spanning tree and forest counts.
    Counts {
        #[arg(long)]
        level: u32,
    },
    /// Per-vertex descendant and height distributions.
    Heights {
        #[arg(long)]
        level: u32,
        #[arg(long, default_value = "tree")]
        class: String,
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Expected descendant and height counts.
    Expectations {
        #[arg(long)]
        level: u32,
        #[arg(long, default_value = "one")]
        sink: String,
    },
    /// Limit constants.
    Limits,
    /// Random samples.
    Sample {
        #[arg(value_enum)]
        kind: SampleKind,
        #[arg(long, default_value_t = 1)]
        level: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "one")]
        sink: String,
        #[arg(long, default_value = "tree")]
        class: String,
        #[arg(long)]
        vertex: Option<String>,
        /// Markov chain steps for `sandpile`.
        #[arg(long, default_value_t = 1000)]
        steps: u64,
    },
    /// Self-checks against the oracles.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::Fast)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Tables and heatmap data.
    Export {
        #[arg(value_enum)]
        what: ExportKind,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, default_value = "tree")]
        class: String,
    },
}

enum Failure {
    Domain(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Domain(e.to_string())
    }
}

type Out = Result<String, Failure>;

fn domain(msg: impl Into<String>) -> Failure {
    Failure::Domain(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|text| emit(&cli, &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verify(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| domain(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn json_only(cli: &Cli, v: Value) -> Out {
    match cli.format {
        Format::Json => Ok(pretty(&v)),
        Format::Csv => Err(domain("this output has no csv form; use --format json")),
    }
}

fn num(x: &Q, float: bool) -> Value {
    if float {
        json!(to_f64(x))
    } else {
        json!(fmt_q(x))
    }
}

fn exact_and_decimal(x: &Q) -> Value {
    json!({"exact": fmt_q(x), "decimal": decimal(x, 15)})
}

fn parse_class(s: &str) -> Result<ForestClass, Failure> {
    Ok(ForestClass::parse(s)?)
}

fn parse_sink(s: &str) -> Result<Sink, Failure> {
    Sink::parse(s).ok_or_else(|| domain(format!("unknown sink `{s}`; expected one, two or three")))
}

fn parse_vertex(s: &str) -> Result<VertexAddr, Failure> {
    s.parse::<VertexAddr>()
        .map_err(|e| domain(format!("bad vertex `{s}`: {e}")))
}

fn run(cli: &Cli) -> Out {
    match &cli.cmd {
        Cmd::Counts { level } => counts(cli, *level),
        Cmd::Heights {
            level,
            class,
            vertex,
        } => heights_cmd(cli, *level, parse_class(class)?, vertex.as_deref()),
        Cmd::Expectations { level, sink } => expectations_cmd(cli, *level, parse_sink(sink)?),
        Cmd::Limits => limits_cmd(cli),
        Cmd::Sample {
            kind,
            level,
            seed,
            sink,
            class,
            vertex,
            steps,
        } => sample_cmd(
            cli,
            *kind,
            *level,
            *seed,
            sink,
            class,
            vertex.as_deref(),
            *steps,
        ),
        Cmd::Verify { suite, seed } => {
            let report = verify::run(*suite == Suite::Full, *seed);
            let text = verify::render(&report);
            if report.iter().all(|c| c.pass) {
                Ok(text)
            } else {
                emit(cli, &text)?;
                Err(Failure::Verify("verification failed".into()))
            }
        }
        Cmd::Export { what, level, class } => export_cmd(cli, *what, *level, class),
    }
}

fn counts(cli: &Cli, level: u32) -> Out {
    let c = census::counts_recursive(level)?;
    match cli.format {
        Format::Json => Ok(pretty(
            &json!({"tau": c.tau.to_string(), "sigma": c.sigma.to_string(), "rho": c.rho.to_string()}),
        )),
        Format::Csv => Ok(format!(
            "level,tau,sigma,rho\n{level},{},{},{}\n",
            c.tau, c.sigma, c.rho
        )),
    }
}

fn dist_json(d: &DescDist, degree: usize, float: bool) -> Result<Value, Failure> {
    let h = desc_to_height(d, degree)?;
    Ok(json!({
        "degree": degree,
        "descendants": d.0.iter().map(|x| num(x, float)).collect::<Vec<_>>(),
        "heights": h.0.iter().map(|x| num(x, float)).collect::<Vec<_>>(),
    }))
}

fn heights_cmd(cli: &Cli, level: u32, class: ForestClass, vertex: Option<&str>) -> Out {
    let g = build_graph(level)?;
    if let Some(v) = vertex {
        let addr = parse_vertex(v)?;
        let i = g.index_of(&addr)?;
        let d = heights::vertex_dist(level, class, &addr)?;
        let mut out = dist_json(&d, g.degree(i), cli.float)?;
        out["level"] = json!(level);
        out["class"] = json!(class.name());
        out["vertex"] = json!(addr.to_string());
        return json_only(cli, out);
    }
    let m = heights::vertex_probs(level, class)?;
    match cli.format {
        Format::Csv => Ok(m.to_csv(!cli.float)),
        Format::Json => {
            let rows = m
                .table
                .iter()
                .map(|(a, d)| {
                    let mut r = dist_json(d, g.degree(g.index_of(a)?), cli.float)?;
                    r["vertex"] = json!(a.to_string());
                    Ok(r)
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            Ok(pretty(
                &json!({"level": level, "class": class.name(), "vertices": rows}),
            ))
        }
    }
}

fn expectations_cmd(cli: &Cli, level: u32, sink: Sink) -> Out {
    let h = expectations::expected_heights(level, sink)?;
    let state = expectations::expectation_state(level)?;
    let zeta = expectations::looping_constant(level)?;
    let pr = printed::expected_heights(level, sink)?;
    let out = json!({
        "level": level,
        "sink": sink.name(),
        "heights": h.to_json(),
        "descendants": state.to_json(),
        "looping_constant": exact_and_decimal(&zeta),
        "class_recursion": {
            "w": pr.iter().map(fmt_q).collect::<Vec<_>>(),
        },
    });
    json_only(cli, out)
}

fn limits_cmd(cli: &Cli) -> Out {
    let reports = SINKS
        .iter()
        .map(|&s| expectations::limits(s))
        .collect::<Result<Vec<_>, _>>()?;
    let first = &reports[0];
    let pr = printed::limits(Sink::One);
    let out = json!({
        "zeta": fmt_q(&first.zeta),
        "zeta_decimal": decimal(&first.zeta, 15),
        "mean_height": fmt_q(&first.wbar),
        "mean_height_decimal": decimal(&first.wbar, 15),
        "w": first.w.iter().map(exact_and_decimal).collect::<Vec<_>>(),
        "d": first.d.iter().map(exact_and_decimal).collect::<Vec<_>>(),
        "sinks": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        "class_recursion": {
            "zeta": fmt_q(&pr.zeta),
            "zeta_decimal": decimal(&pr.zeta, 15),
            "mean_height": fmt_q(&pr.wbar),
            "mean_height_decimal": decimal(&pr.wbar, 15),
            "w": pr.w.iter().map(exact_and_decimal).collect::<Vec<_>>(),
            "d": pr.d.iter().map(exact_and_decimal).collect::<Vec<_>>(),
        },
    });
    json_only(cli, out)
}

#[allow(clippy::too_many_arguments)]
fn sample_cmd(
    cli: &Cli,
    kind: SampleKind,
    level: u32,
    seed: u64,
    sink: &str,
    class: &str,
    vertex: Option<&str>,
    steps: u64,
) -> Out {
    let g = std::sync::Arc::new(build_graph(level)?);
    let mut rng = sandpile::rng(seed, 0);
    let addrs = |v: &[usize]| v.iter().map(|&i| g.addr(i).to_string()).collect::<Vec<_>>();
    let out = match kind {
        SampleKind::Sandpile => {
            let sink = parse_sink(sink)?;
            let cg = std::sync::Arc::new(contract_sinks(g.clone(), sink.spec()));
            let mut c = SandpileConfig::max_stable(cg);
            for _ in 0..steps {
                c = sandpile::markov_step(&c, &mut rng);
            }
            json!({"kind": "sandpile", "seed": seed, "steps": steps, "config": c.to_json()})
        }
        SampleKind::Lerw => {
            let start = match vertex {
                Some(v) => g.index_of(&parse_vertex(v)?)?,
                None => g.corner(Corner::Left),
            };
            let targets = [g.corner(Corner::Top), g.corner(Corner::Right)];
            let s = oracle::lerw(&g, start, &targets, &mut rng);
            json!({"kind": "lerw", "seed": seed, "level": level, "start": g.addr(start).to_string(), "path": addrs(&s.path)})
        }
        SampleKind::Wilson => {
            let class = parse_class(class)?;
            let roots: Vec<usize> = heights::class_roots(class)
                .iter()
                .map(|&c| g.corner(c))
                .collect();
            let f = oracle::wilson_sample(&g, &roots, &mut rng);
            let edges: Vec<_> = f
                .edges()
                .iter()
                .map(|&(a, b)| json!([g.addr(a).to_string(), g.addr(b).to_string()]))
                .collect();
            let parent: serde_json::Map<String, Value> = (0..g.len())
                .map(|v| {
                    (
                        g.addr(v).to_string(),
                        f.parent[v].map_or(Value::Null, |p| json!(g.addr(p).to_string())),
                    )
                })
                .collect();
            json!({"kind": "wilson", "seed": seed, "level": level, "roots": addrs(&roots), "edges": edges, "parent": parent})
        }
    };
    json_only(cli, out)
}

fn export_cmd(cli: &Cli, what: ExportKind, level: u32, class: &str) -> Out {
    match what {
        ExportKind::Graph => json_only(cli, build_graph(level)?.to_json()),
        ExportKind::Heatmap => {
            let m = heights::vertex_probs(level, parse_class(class)?)?;
            match cli.format {
                Format::Csv => Ok(m.to_csv(!cli.float)),
                Format::Json => Ok(pretty(&heights::heatmap_json(&m))),
            }
        }
        ExportKind::Census => {
            let rows = (0..=level)
                .map(census::counts_recursive)
                .collect::<Result<Vec<_>, _>>()?;
            match cli.format {
                Format::Json => Ok(pretty(&serde_json::to_value(&rows).expect("json"))),
                Format::Csv => {
                    let mut s = String::from("level,tau,sigma,rho\n");
                    for r in rows {
                        s += &format!("{},{},{},{}\n", r.n, r.tau, r.sigma, r.rho);
                    }
                    Ok(s)
                }
            }
        }
        ExportKind::Decomposition => {
            let t: serde_json::Map<String, Value> = FOREST_CLASSES
                .iter()
                .map(|&c| {
                    (
                        c.name().to_string(),
                        serde_json::to_value(census::decomposition_table(c)).expect("json"),
                    )
                })
                .collect();
            json_only(cli, Value::Object(t))
        }
        ExportKind::Expectations => {
            let rows = (1..=level)
                .map(expectations::expectation_state)
                .collect::<Result<Vec<_>, _>>()?;
            json_only(
                cli,
                json!(rows.iter().map(|s| s.to_json()).collect::<Vec<_>>()),
            )
        }
        ExportKind::Tables => {
            let table = |t: &printed::ClosedForm| {
                json!({
                    "basis": t.basis.iter().map(fmt_q).collect::<Vec<_>>(),
                    "rows": t.rows.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
                })
            };
            json_only(
                cli,
                json!({
                    "row_classes": ["tree", "s", "r"],
                    "d0": table(&printed::table_d0()),
                    "d1": table(&printed::table_d1_corrected()),
                    "d2": table(&printed::table_d2_corrected()),
                    "total": table(&printed::table_total()),
                }),
            )
        }
    }
}
