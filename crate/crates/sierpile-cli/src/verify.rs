use std::collections::HashMap;
use std::sync::Arc;

use sierpile::census::{self, ForestClass, RhoTerm, FOREST_CLASSES};
use sierpile::expectations::{self, printed, SINKS};
use sierpile::gasket::{build_graph, contract_sinks, Corner, SinkSpec, VertexAddr};
use sierpile::heights::{self, printed as hp};
use sierpile::oracle::{self, enumerate_forests};
use sierpile::rat::{q, to_f64, Q};
use sierpile::sandpile::{self, SandpileConfig};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Check {
    match f() {
        Ok(detail) => Check {
            name,
            pass: true,
            detail,
        },
        Err(detail) => Check {
            name,
            pass: false,
            detail,
        },
    }
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

pub fn render(checks: &[Check]) -> String {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        s += &format!(
            "{:<w$}  {}  {}\n",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    s += &format!("{} checks, {} failed\n", checks.len(), failed);
    s
}

fn contracted(level: u32, s: SinkSpec) -> Result<Arc<sierpile::gasket::ContractedGraph>, String> {
    Ok(Arc::new(contract_sinks(
        Arc::new(build_graph(level).map_err(e)?),
        s,
    )))
}

fn chain_chi_square(steps: u64, seed: u64) -> Result<oracle::ChiSquare, String> {
    let g = contracted(1, SinkSpec::top())?;
    let rec = sandpile::recurrent_configs(g.clone());
    let idx: HashMap<Vec<u64>, usize> = rec
        .iter()
        .enumerate()
        .map(|(i, c)| (c.chips().to_vec(), i))
        .collect();
    let mut r = sandpile::rng(seed, 0);
    let mut c = SandpileConfig::max_stable(g);
    for _ in 0..1000 {
        c = sandpile::markov_step(&c, &mut r);
    }
    let mut seen = vec![0u64; rec.len()];
    for _ in 0..steps {
        c = sandpile::markov_step(&c, &mut r);
        seen[*idx.get(c.chips()).ok_or("chain left the recurrent class")?] += 1;
    }
    Ok(oracle::chi_square_uniform(&seen))
}

pub fn run(full: bool, seed: u64) -> Vec<Check> {
    let mut out = vec![
        check("census known levels", || {
            let want = [(3u64, 1u64, 1u64), (54, 30, 50), (524880, 486000, 1350000)];
            for (n, w) in want.iter().enumerate() {
                let c = census::counts_recursive(n as u32).map_err(e)?;
                ensure(
                    (c.tau.clone(), c.sigma.clone(), c.rho.clone())
                        == (w.0.into(), w.1.into(), w.2.into()),
                    format!("level {n}"),
                )?;
            }
            Ok("n = 0, 1, 2".into())
        }),
        check("census recursion = closed form", || {
            for n in 0..=8 {
                ensure(
                    census::counts_recursive(n).map_err(e)?
                        == census::counts_closed(n).map_err(e)?,
                    format!("level {n}"),
                )?;
            }
            Ok("n <= 8".into())
        }),
        check("census rho variant rejected", || {
            let p = census::counts_recursive_with(2, RhoTerm::Printed).map_err(e)?;
            ensure(
                p.rho != census::counts_closed(2).map_err(e)?.rho,
                "variant unexpectedly agrees",
            )?;
            Ok(format!("rho_2 = {} under the variant", p.rho))
        }),
        check("oracle level 1 vs heights", || {
            let g = build_graph(1).map_err(e)?;
            for class in FOREST_CLASSES {
                let en = enumerate_forests(1, class).map_err(e)?;
                let m = heights::vertex_probs(1, class).map_err(e)?;
                for (v, d) in oracle::vertex_table(&en).map_err(e)? {
                    ensure(
                        m.get(g.addr(v)) == Some(&d),
                        format!("{} at {}", class.name(), g.addr(v)),
                    )?;
                }
            }
            Ok("all classes, all vertices".into())
        }),
        check("Kirchhoff tau_1, tau_2", || {
            let t1 = oracle::kirchhoff_count(&build_graph(1).map_err(e)?, &[]);
            let t2 = oracle::kirchhoff_count(&build_graph(2).map_err(e)?, &[]);
            ensure(
                t1 == 54.into() && t2 == 524880.into(),
                format!("{t1}, {t2}"),
            )?;
            Ok(format!("{t1}, {t2}"))
        }),
        check("burning bijection SG_1", || {
            let g = contracted(1, SinkSpec::top())?;
            let trees = oracle::contracted_trees(&g).map_err(e)?;
            let mut images = std::collections::HashSet::new();
            for t in &trees {
                let c = sandpile::tree_to_sandpile(t, g.clone()).map_err(e)?;
                ensure(sandpile::is_recurrent(&c), "image not recurrent")?;
                ensure(
                    &sandpile::sandpile_to_tree(&c).map_err(e)? == t,
                    "inverse fails",
                )?;
                images.insert(c.chips().to_vec());
            }
            let rec = sandpile::recurrent_configs(g);
            ensure(
                images.len() == trees.len() && rec.len() == trees.len(),
                "counts differ",
            )?;
            Ok(format!("{} trees", trees.len()))
        }),
        check("sink-edge addition replay", || {
            for s in [SinkSpec::top(), SinkSpec::top_right(), SinkSpec::all()] {
                let g = contracted(1, s)?;
                for c in sandpile::recurrent_configs(g.clone()) {
                    let mut x = c.clone();
                    for v in 0..g.len() {
                        x.add_at(v, g.multi_edges(v) as u64);
                    }
                    let (y, odo) = sandpile::stabilize(&x);
                    ensure(y == c && odo.counts.iter().all(|&k| k == 1), "replay fails")?;
                }
            }
            Ok("three sink choices".into())
        }),
        check("corner and 2x2 closed forms", || {
            for n in 0..=10 {
                ensure(
                    hp::matrix_power_2x2(n) == hp::matrix_power_2x2_closed(n),
                    format!("power {n}"),
                )?;
            }
            for n in 0..=8 {
                ensure(
                    hp::corner_probs(n) == hp::corner_probs_closed(n),
                    format!("corner {n}"),
                )?;
            }
            Ok("n <= 10, n <= 8".into())
        }),
        check("tabulated cut-point forms", || {
            for n in 1..=8 {
                for c in FOREST_CLASSES {
                    ensure(
                        hp::cutpoint_probs(n, c).map_err(e)?
                            == hp::cutpoint_closed(n, c).map_err(e)?,
                        format!("{} n = {n}", c.name()),
                    )?;
                }
            }
            Ok("n <= 8".into())
        }),
        check("class recursion matrix facts", || {
            ensure(printed::eigenpairs_hold(), "eigenpairs")?;
            ensure(
                printed::row_sums().iter().all(|x| *x == q(3, 1)),
                "row sums",
            )?;
            for n in 1..=8 {
                ensure(
                    printed::expected_desc(n, 1).map_err(e)?
                        == printed::expected_desc_telescoped(n, 1).map_err(e)?,
                    "telescoped sum",
                )?;
            }
            Ok("eigenpairs, row sums, telescoping".into())
        }),
        check("class recursion tabulated limits", || {
            let (d, w) = printed::table_limits();
            for s in SINKS {
                let l = printed::limits(s);
                ensure(l.d == d && l.w == w, "limits differ")?;
            }
            Ok("D, W, zeta, mean height".into())
        }),
        check("exact limit identities", || {
            let mut zetas = Vec::new();
            for s in SINKS {
                let l = expectations::limits(s).map_err(e)?;
                ensure(l.identities_hold(), format!("sink {}", s.name()))?;
                zetas.push(l.zeta);
            }
            ensure(zetas.windows(2).all(|w| w[0] == w[1]), "sinks disagree")?;
            Ok(format!("zeta = {}", zetas[0]))
        }),
        check("Monte Carlo zeta_2", || {
            let exact = to_f64(&expectations::looping_constant(2).map_err(e)?);
            let est = oracle::mc_looping_constant(2, 100_000, seed).map_err(e)?;
            let z = est.z(exact);
            ensure(z < 3.0, format!("z = {z:.2}"))?;
            Ok(format!(
                "{:.5} +- {:.5} vs {exact:.5}",
                est.mean, est.std_err
            ))
        }),
        check("sandpile chain uniformity", || {
            let c = chain_chi_square(if full { 1_000_000 } else { 100_000 }, seed)?;
            ensure(
                c.pass,
                format!("chi2 {:.1} > {:.1}", c.statistic, c.critical),
            )?;
            Ok(format!("chi2 {:.1} <= {:.1}", c.statistic, c.critical))
        }),
    ];
    if full {
        out.push(check("oracle level 2 vs heights", || {
            let g = build_graph(2).map_err(e)?;
            for class in FOREST_CLASSES {
                let en = enumerate_forests(2, class).map_err(e)?;
                let m = heights::vertex_probs(2, class).map_err(e)?;
                for (v, d) in oracle::vertex_table(&en).map_err(e)? {
                    ensure(
                        m.get(g.addr(v)) == Some(&d),
                        format!("{} at {}", class.name(), g.addr(v)),
                    )?;
                }
            }
            Ok("all classes, all vertices".into())
        }));
        out.push(check("Monte Carlo zeta_3", || {
            let exact = to_f64(&expectations::looping_constant(3).map_err(e)?);
            let est = oracle::mc_looping_constant(3, 1_000_000, seed).map_err(e)?;
            let z = est.z(exact);
            ensure(z < 3.0, format!("z = {z:.2}"))?;
            Ok(format!(
                "{:.6} +- {:.6} vs {exact:.6}",
                est.mean, est.std_err
            ))
        }));
        out.push(check("LERW zeta_v at SG_2 bottom cut point", || {
            let g = build_graph(2).map_err(e)?;
            let v = g
                .index_of(&VertexAddr::cut_point(2, Corner::Top))
                .map_err(e)?;
            let s2 = enumerate_forests(2, ForestClass::S2).map_err(e)?;
            let s3 = enumerate_forests(2, ForestClass::S3).map_err(e)?;
            let exact: Q = (s2.zeta_v(v) + s3.zeta_v(v)) * q(1, 2);
            let est = oracle::mc_zeta_vertex(2, v, 100_000, seed).map_err(e)?;
            let z = est.z(to_f64(&exact));
            ensure(z < 3.0, format!("z = {z:.2}"))?;
            Ok(format!("{:.5} +- {:.5} vs {exact}", est.mean, est.std_err))
        }));
        out.push(check("Wilson edge inclusion SG_1", || {
            let g = build_graph(1).map_err(e)?;
            let en = enumerate_forests(1, ForestClass::T).map_err(e)?;
            let edges: Vec<(usize, usize)> = g.edges().collect();
            let roots = [g.corner(Corner::Top)];
            let n = 1_000_000u64;
            let mut seen = vec![0u64; edges.len()];
            let mut r = sandpile::rng(seed, 0);
            for _ in 0..n {
                let f = oracle::wilson_sample(&g, &roots, &mut r);
                for (a, b) in f.edges() {
                    seen[edges
                        .iter()
                        .position(|&x| x == (a, b))
                        .ok_or("unknown edge")?] += 1;
                }
            }
            let mut worst: f64 = 0.0;
            for (i, &k) in seen.iter().enumerate() {
                let p = en.edge_counts[i] as f64 / en.count as f64;
                let sd = (p * (1.0 - p) / n as f64).sqrt();
                worst = worst.max(((k as f64 / n as f64) - p).abs() / sd);
            }
            ensure(worst < 4.0, format!("max deviation {worst:.2} sd"))?;
            Ok(format!("max deviation {worst:.2} sd"))
        }));
    }
    out
}
