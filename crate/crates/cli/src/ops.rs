//! Graph sources and operator selectors shared by the subcommands.

use ndarray::Array2;

use digh_core::error::{Error, Result};
use digh_core::graph::{
    gen_directed_cycle, gen_directed_torus, gen_directed_watts_strogatz, symmetrize, DirectedGraph,
};
use digh_core::walk::{
    from_graph, google_matrix, lazy, rank_one_walk, reversibilized, similar_operator_t, RandomWalk,
};

/// Where the graph comes from: an edge-list file or a generator spec
/// `cycle:N | torus:M,N | dws:N,K,BETA`.
pub fn load_graph(
    graph_path: Option<&str>,
    gen_spec: Option<&str>,
    seed: u64,
) -> Result<(DirectedGraph, bool)> {
    match (graph_path, gen_spec) {
        (Some(path), None) => Ok((DirectedGraph::from_edge_list_file(path)?, false)),
        (None, Some(spec)) => Ok((parse_generator(spec, seed)?, true)),
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "--graph and --gen are mutually exclusive".into(),
        )),
        (None, None) => Err(Error::InvalidArgument(
            "one of --graph FILE or --gen SPEC is required".into(),
        )),
    }
}

fn parse_generator(spec: &str, seed: u64) -> Result<DirectedGraph> {
    let bad = |msg: &str| Error::InvalidArgument(format!("generator spec `{spec}`: {msg}"));
    let (kind, params) = spec
        .split_once(':')
        .ok_or_else(|| bad("expected cycle:N, torus:M,N or dws:N,K,BETA"))?;
    let fields: Vec<&str> = params.split(',').collect();
    match kind {
        "cycle" => {
            let n = fields[0].parse().map_err(|_| bad("N must be an integer"))?;
            gen_directed_cycle(n)
        }
        "torus" => {
            if fields.len() != 2 {
                return Err(bad("torus takes M,N"));
            }
            let m = fields[0].parse().map_err(|_| bad("M must be an integer"))?;
            let n = fields[1].parse().map_err(|_| bad("N must be an integer"))?;
            gen_directed_torus(m, n)
        }
        "dws" => {
            if fields.len() != 3 {
                return Err(bad("dws takes N,K,BETA"));
            }
            let n = fields[0].parse().map_err(|_| bad("N must be an integer"))?;
            let k = fields[1].parse().map_err(|_| bad("K must be an integer"))?;
            let beta = fields[2]
                .parse()
                .map_err(|_| bad("BETA must be a number"))?;
            gen_directed_watts_strogatz(n, k, beta, seed)
        }
        _ => Err(bad("unknown generator; use cycle, torus or dws")),
    }
}

/// Ergodicization remedy for graphs that are not strongly connected:
/// `google:GAMMA` or `rank1:EPS`.
#[derive(Debug, Clone, Copy)]
pub enum Ergodicize {
    Google(f64),
    RankOne(f64),
}

pub fn parse_ergodicize(spec: &str) -> Result<Ergodicize> {
    let bad = || {
        Error::InvalidArgument(format!(
            "--ergodicize `{spec}`: expected google:GAMMA or rank1:EPS"
        ))
    };
    let (kind, value) = spec.split_once(':').ok_or_else(bad)?;
    let value: f64 = value.parse().map_err(|_| bad())?;
    match kind {
        "google" => Ok(Ergodicize::Google(value)),
        "rank1" => Ok(Ergodicize::RankOne(value)),
        _ => Err(bad()),
    }
}

/// Builds the base walk: directly when the graph supports it, otherwise
/// through the requested ergodicization.
pub fn resolve_walk(g: &DirectedGraph, remedy: Option<Ergodicize>) -> Result<RandomWalk> {
    match remedy {
        Some(Ergodicize::Google(gamma)) => google_matrix(g, gamma),
        Some(Ergodicize::RankOne(eps)) => rank_one_walk(g, eps),
        None => from_graph(g),
    }
}

/// A parsed operator selector: base name, optional `_sym` / `_eps` / `_g`
/// suffix and optional `:alpha=A`.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub name: String,
    base: String,
    sym: bool,
    forced_remedy: Option<&'static str>,
    alpha: Option<f64>,
}

/// Parses `NAME[:alpha=A]` with NAME one of
/// `w_norm | p | p_bar | t | t_bar` plus an optional `_sym`, `_eps` or `_g`
/// suffix (e.g. `p_sym`, `t_bar_g`, `p_bar_eps:alpha=0.3`).
pub fn parse_operator(spec: &str) -> Result<OperatorSpec> {
    let bad = |msg: &str| Error::InvalidArgument(format!("operator `{spec}`: {msg}"));
    let (name, alpha) = match spec.split_once(':') {
        Some((name, rest)) => {
            let alpha = rest
                .strip_prefix("alpha=")
                .ok_or_else(|| bad("only an alpha=A modifier is supported"))?
                .parse::<f64>()
                .map_err(|_| bad("alpha must be a number"))?;
            (name, Some(alpha))
        }
        None => (spec, None),
    };
    let (stem, sym, forced_remedy) = if let Some(stem) = name.strip_suffix("_sym") {
        (stem, true, None)
    } else if let Some(stem) = name.strip_suffix("_eps") {
        (stem, false, Some("rank1"))
    } else if let Some(stem) = name.strip_suffix("_g") {
        (stem, false, Some("google"))
    } else {
        (name, false, None)
    };
    match stem {
        "w_norm" | "p" | "p_bar" | "t" | "t_bar" => {}
        _ => return Err(bad("base must be one of w_norm, p, p_bar, t, t_bar")),
    }
    if alpha.is_some() && !stem.ends_with("bar") {
        return Err(bad("alpha only applies to p_bar and t_bar"));
    }
    Ok(OperatorSpec {
        name: spec.to_string(),
        base: stem.to_string(),
        sym,
        forced_remedy,
        alpha,
    })
}

/// The resolved operator together with the walk it came from (when one was
/// needed; `w_norm` has none).
pub struct ResolvedOperator {
    pub matrix: Array2<f64>,
    pub walk: Option<RandomWalk>,
}

/// Materializes an operator selector over a graph.
///
/// `lazy_gamma` applies a lazy step to walk-based operators; `remedy` is
/// the user-supplied ergodicization, overridden by `_eps` / `_g` suffixes
/// (with the defaults eps = 1e-4 and gamma = 0.85 when the flag does not
/// match the suffix).
pub fn resolve_operator(
    spec: &OperatorSpec,
    g: &DirectedGraph,
    lazy_gamma: Option<f64>,
    remedy: Option<Ergodicize>,
) -> Result<ResolvedOperator> {
    let graph = if spec.sym { symmetrize(g) } else { g.clone() };
    if spec.base == "w_norm" {
        return Ok(ResolvedOperator {
            matrix: digh_core::ssl::normalized_adjacency(&graph)?,
            walk: None,
        });
    }
    let effective_remedy = match spec.forced_remedy {
        Some("google") => Some(match remedy {
            Some(Ergodicize::Google(gamma)) => Ergodicize::Google(gamma),
            _ => Ergodicize::Google(0.85),
        }),
        Some("rank1") => Some(match remedy {
            Some(Ergodicize::RankOne(eps)) => Ergodicize::RankOne(eps),
            _ => Ergodicize::RankOne(1e-4),
        }),
        _ => remedy,
    };
    let mut walk = resolve_walk(&graph, effective_remedy)?;
    if let Some(gamma) = lazy_gamma {
        walk = lazy(&walk, gamma)?;
    }
    let matrix = match spec.base.as_str() {
        "p" => walk.transition().clone(),
        "p_bar" => {
            let alpha = spec.alpha.unwrap_or(0.5);
            reversibilized(&walk, alpha)?.transition().clone()
        }
        "t" => similar_operator_t(&walk)?,
        "t_bar" => {
            let alpha = spec.alpha.unwrap_or(0.5);
            similar_operator_t(&reversibilized(&walk, alpha)?)?
        }
        _ => unreachable!("validated in parse_operator"),
    };
    Ok(ResolvedOperator {
        matrix,
        walk: Some(walk),
    })
}
