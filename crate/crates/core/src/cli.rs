//! Command-line front end. [`run`] parses arguments, writes the report to
//! the given sink and returns the process exit code.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bounds::{self, BoundResult, IntervalBound};
use crate::checkerboard::{Sampler, Scheme};
use crate::chromasolve::{self, Decision, DistGraph, SolveStatus};
use crate::error::{invalid, Error, Result};
use crate::heptile;
use crate::output::{fmt_f64, to_json_string};
use crate::treegeom::{self, TreeBall, TreeColoring};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Directory for generated files when `--out` is not given.
pub const OUT_DIR_VAR: &str = "HYPCHROM_OUT_DIR";

const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "hypchrom",
    version,
    about = "Distance and interval chromatic bounds for the hyperbolic plane and regular trees"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Emit CSV instead of JSON where the payload is tabular.
    #[arg(long, global = true)]
    pub csv: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper bounds on the d-chromatic (or [d, cd]-chromatic) number of the plane.
    HypBound {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        c: Option<f64>,
        /// Log-grid size for the checkerboard optimizer.
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Samples distance-d pairs against the optimized checkerboard coloring.
    HypVerify {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Collapse the palette to 3 x 2 colors, which must produce violations.
        #[arg(long)]
        broken: bool,
    },
    /// Colorings, cliques and exact search on a ball of the q-regular tree.
    Tree {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_enum)]
        mode: TreeMode,
        /// Palette size for `chroma` (decision only) and `export-cnf`.
        #[arg(long)]
        k: Option<u32>,
        /// Search node budget.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heptagonal tiling patch: geometry, 8-coloring, same-color separation.
    Heptile {
        #[arg(long, default_value_t = 3)]
        depth: u32,
    },
    /// Exact chromatic number of a graph given as a `u v` edge list.
    Chroma {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TreeMode {
    Color,
    Verify,
    Clique,
    Spindle,
    Chroma,
    ExportCnf,
    Adjacency,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILED;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&cli, &mut buf));
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        eprintln!("error: {e}");
        return EXIT_FAILED;
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => EXIT_FAILED,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::HypBound { d, c, grid } => hyp_bound(cli, *d, *c, *grid, out),
        Command::HypVerify {
            d,
            c,
            samples,
            seed,
            broken,
        } => hyp_verify(*d, *c, *samples, *seed, *broken, out),
        Command::Tree {
            q,
            d,
            c,
            radius,
            mode,
            k,
            budget,
            out: path,
        } => {
            let args = TreeArgs {
                q: *q,
                d: *d,
                c: *c,
                radius: *radius,
                k: *k,
                budget: *budget,
                path: path.clone(),
            };
            tree(cli, &args, *mode, out)
        }
        Command::Heptile { depth } => heptile_cmd(cli, *depth, out),
        Command::Chroma { edges, k, budget } => chroma(edges, *k, *budget, out),
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let s = to_json_string(value).map_err(|e| Error::Construction(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn output_path(explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("."), PathBuf::from);
        dir.join(default_name)
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Best of the closed forms and the optimized checkerboard; closed forms
/// win ties.
fn best_bound(d: f64, grid: usize) -> Result<(BoundResult, Vec<BoundResult>, bounds::Optimized)> {
    let closed = bounds::closed_form_bounds(d)?;
    let opt = bounds::optimize_checkerboard(d, grid)?;
    let best = closed
        .iter()
        .copied()
        .chain(std::iter::once(opt.bound))
        .min_by_key(|b| b.value)
        .expect("optimizer always yields a bound");
    Ok((best, closed, opt))
}

fn hyp_bound(cli: &Cli, d: f64, c: Option<f64>, grid: usize, out: &mut dyn Write) -> Result<i32> {
    if let Some(c) = c {
        let interval = bounds::interval_upper_bound(d, c)?;
        if cli.csv {
            writeln!(out, "source,value,h,w,k,m")?;
            if let IntervalBound::Applicable { bound, .. } = &interval {
                write_bound_row(out, bound)?;
            }
        } else {
            let best = match &interval {
                IntervalBound::Applicable { bound, .. } => Some(bound.value),
                IntervalBound::Inapplicable { .. } => None,
            };
            emit(
                out,
                &json!({ "command": "hyp-bound", "d": d, "c": c, "best": best, "interval": interval }),
            )?;
        }
        return Ok(EXIT_OK);
    }
    let (best, closed, opt) = best_bound(d, grid)?;
    if cli.csv {
        writeln!(out, "source,value,h,w,k,m")?;
        for b in closed.iter().chain(std::iter::once(&opt.bound)) {
            write_bound_row(out, b)?;
        }
    } else {
        emit(
            out,
            &json!({
                "command": "hyp-bound",
                "d": d,
                "best": best.value,
                "bestSource": best.source,
                "closedForm": closed,
                "optimized": opt,
            }),
        )?;
    }
    Ok(EXIT_OK)
}

fn write_bound_row(out: &mut dyn Write, b: &BoundResult) -> Result<()> {
    let source = serde_json::to_value(b.source)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    match b.params {
        Some(p) => writeln!(
            out,
            "{source},{},{},{},{},{}",
            b.value,
            fmt_f64(p.h),
            fmt_f64(p.w),
            p.k,
            p.m
        )?,
        None => writeln!(out, "{source},{},,,,", b.value)?,
    }
    Ok(())
}

fn hyp_verify(
    d: f64,
    c: Option<f64>,
    samples: u64,
    seed: u64,
    broken: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let scheme: Scheme = match c {
        Some(c) => match bounds::interval_upper_bound(d, c)? {
            IntervalBound::Applicable { scheme, .. } => scheme,
            IntervalBound::Inapplicable { reason } => return Err(invalid(reason)),
        },
        None => bounds::optimize_checkerboard(d, 512)?.scheme,
    };
    let scheme = if broken {
        scheme.with_periods(2, 1)?
    } else {
        scheme
    };
    let report = Sampler::new(scheme)
        .allow_invalid(broken)
        .run(samples, seed)?;
    emit(
        out,
        &json!({ "command": "hyp-verify", "broken": broken, "report": report }),
    )?;
    Ok(if report.is_clean() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

struct TreeArgs {
    q: u32,
    d: u32,
    c: Option<f64>,
    radius: u32,
    k: Option<u32>,
    budget: u64,
    path: Option<PathBuf>,
}

impl TreeArgs {
    fn coloring(&self) -> Result<TreeColoring> {
        match self.c {
            Some(c) => TreeColoring::interval(self.d, c),
            None if self.d % 2 == 1 => Ok(TreeColoring::Odd),
            None => TreeColoring::even(self.d),
        }
    }

    fn forbidden(&self) -> Result<std::ops::RangeInclusive<u32>> {
        if self.d == 0 {
            return Err(invalid("d must be at least 1"));
        }
        Ok(match self.c {
            Some(c) if c > 1.0 && c.is_finite() => self.d..=(c * self.d as f64).floor() as u32,
            Some(c) => return Err(invalid(format!("interval factor c must exceed 1, got {c}"))),
            None => self.d..=self.d,
        })
    }

    /// Ball with enough spine above `x0` for every ancestor a coloring reads.
    fn ball(&self) -> Result<TreeBall> {
        let top = match self.c {
            Some(c) => (c * self.d as f64 / 2.0).floor() as u32 + 1,
            None => self.d / 2,
        };
        TreeBall::build(self.q, self.radius, self.radius + top + 1)
    }

    fn stem(&self) -> String {
        let c = self
            .c
            .map(|c| format!("_c{}", fmt_f64(c)))
            .unwrap_or_default();
        format!("tree_q{}_d{}{c}_r{}", self.q, self.d, self.radius)
    }
}

fn tree(cli: &Cli, a: &TreeArgs, mode: TreeMode, out: &mut dyn Write) -> Result<i32> {
    let range = a.forbidden()?;
    let ball = a.ball()?;
    let header = json!({ "command": "tree", "q": a.q, "d": a.d, "c": a.c, "radius": a.radius, "ballSize": ball.ball_size() });
    let with = |mut extra: serde_json::Value| {
        let mut v = header.clone();
        v.as_object_mut()
            .unwrap()
            .append(extra.as_object_mut().unwrap());
        v
    };
    match mode {
        TreeMode::Color => {
            let coloring = a.coloring()?;
            if let Some(path) = &a.path {
                treegeom::write_coloring_csv(&ball, &coloring, create(path)?)?;
            }
            if cli.csv {
                treegeom::write_coloring_csv(&ball, &coloring, &mut *out)?;
            } else {
                let colors: Vec<Option<u64>> = (0..ball.ball_size())
                    .map(|v| coloring.color_index(&ball, v))
                    .collect();
                let mut used: Vec<u64> = colors.iter().flatten().copied().collect();
                used.sort_unstable();
                used.dedup();
                emit(
                    out,
                    &with(json!({
                        "mode": "color",
                        "coloring": coloring,
                        "paletteSize": coloring.palette_size(a.q),
                        "colorsUsed": used.len(),
                        "colors": colors,
                    })),
                )?;
            }
            Ok(EXIT_OK)
        }
        TreeMode::Verify => {
            let coloring = a.coloring()?;
            let report =
                treegeom::verify_tree_coloring(&ball, |v| coloring.color_index(&ball, v), range);
            let passed = report.passed() && report.colored_vertices == ball.ball_size();
            emit(
                out,
                &with(json!({
                    "mode": "verify",
                    "coloring": coloring,
                    "paletteSize": coloring.palette_size(a.q),
                    "passed": passed,
                    "report": report,
                })),
            )?;
            Ok(if passed { EXIT_OK } else { EXIT_FAILED })
        }
        TreeMode::Clique => {
            let g = DistGraph::from_tree_ball(&ball, range)?;
            let res = chromasolve::max_clique(&g, a.budget);
            let constructed = match a.c {
                Some(c) => treegeom::interval_clique_tree(&ball, a.d, c).ok(),
                None => treegeom::clique_q(&ball, a.d).ok(),
            };
            emit(
                out,
                &with(json!({ "mode": "clique", "maxClique": res, "constructed": constructed })),
            )?;
            Ok(if res.exact { EXIT_OK } else { EXIT_BUDGET })
        }
        TreeMode::Spindle => {
            let s = treegeom::moser_spindle(&ball, a.d)?;
            let g = DistGraph::new(
                s.vertices.len(),
                s.pairs.iter().map(|&(i, j)| (i as u32, j as u32)),
                format!("spindle in T_{} at distance {}", a.q, a.d),
            )?;
            let res = chromasolve::chromatic_number(&g, a.budget);
            emit(
                out,
                &with(
                    json!({ "mode": "spindle", "spindle": s, "vertexCount": s.vertices.len(), "chromatic": res }),
                ),
            )?;
            Ok(status_code(res.status))
        }
        TreeMode::Chroma => {
            let g = DistGraph::from_tree_ball(&ball, range)?;
            solve_graph(
                &g,
                a.k,
                a.budget,
                with(json!({ "mode": "chroma", "edgeCount": g.edge_count() })),
                out,
            )
        }
        TreeMode::ExportCnf => {
            let k = a.k.ok_or_else(|| invalid("export-cnf needs --k"))?;
            if k == 0 {
                return Err(invalid("k must be at least 1"));
            }
            let g = DistGraph::from_tree_ball(&ball, range)?;
            let path = output_path(&a.path, &format!("{}_k{k}.cnf", a.stem()));
            let mut w = create(&path)?;
            chromasolve::write_dimacs_cnf(&g, k, &mut w)?;
            w.flush()?;
            emit(
                out,
                &with(json!({
                    "mode": "export-cnf",
                    "k": k,
                    "path": path.display().to_string(),
                    "variables": g.vertex_count() as u64 * k as u64,
                    "clauses": chromasolve::cnf_clause_count(&g, k),
                })),
            )?;
            Ok(EXIT_OK)
        }
        TreeMode::Adjacency => {
            if cli.csv || a.path.is_none() {
                ball.write_adjacency(&mut *out)?;
            } else {
                let path = output_path(&a.path, "");
                ball.write_adjacency(create(&path)?)?;
                emit(
                    out,
                    &with(json!({ "mode": "adjacency", "path": path.display().to_string() })),
                )?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn status_code(s: SolveStatus) -> i32 {
    match s {
        SolveStatus::Solved => EXIT_OK,
        SolveStatus::Bounded | SolveStatus::Timeout => EXIT_BUDGET,
    }
}

fn solve_graph(
    g: &DistGraph,
    k: Option<u32>,
    budget: u64,
    mut header: serde_json::Value,
    out: &mut dyn Write,
) -> Result<i32> {
    let fields = header.as_object_mut().unwrap();
    fields.insert("vertexCount".into(), json!(g.vertex_count()));
    fields.insert("provenance".into(), json!(g.provenance()));
    match k {
        Some(0) => Err(invalid("k must be at least 1")),
        Some(k) => {
            let res = chromasolve::k_colorable(g, k, budget);
            if let Decision::Sat { coloring } = &res.decision {
                if !g.is_proper_coloring(coloring) {
                    return Err(Error::InconsistentColoring(
                        "solver certificate is improper".into(),
                    ));
                }
            }
            let code = if matches!(res.decision, Decision::Timeout) {
                EXIT_BUDGET
            } else {
                EXIT_OK
            };
            fields.insert(
                "decision".into(),
                serde_json::to_value(&res).map_err(|e| Error::Construction(e.to_string()))?,
            );
            emit(out, &header)?;
            Ok(code)
        }
        None => {
            let res = chromasolve::chromatic_number(g, budget);
            let code = status_code(res.status);
            fields.insert(
                "chromatic".into(),
                serde_json::to_value(&res).map_err(|e| Error::Construction(e.to_string()))?,
            );
            emit(out, &header)?;
            Ok(code)
        }
    }
}

fn heptile_cmd(cli: &Cli, depth: u32, out: &mut dyn Write) -> Result<i32> {
    let geometry = heptile::heptagon_geometry();
    if depth > heptile::MAX_DEPTH {
        return Err(invalid(format!(
            "depth {depth} exceeds the cap of {}",
            heptile::MAX_DEPTH
        )));
    }
    if depth == 0 {
        emit(
            out,
            &json!({ "command": "heptile", "depth": 0, "geometry": geometry }),
        )?;
        return Ok(EXIT_OK);
    }
    let patch = heptile::color_patch(heptile::generate_patch(depth)?)?;
    if cli.csv {
        patch.write_csv(&mut *out)?;
        return Ok(EXIT_OK);
    }
    let separation = if depth >= 2 {
        Some(heptile::min_same_color_separation(&patch)?)
    } else {
        None
    };
    let (lo, hi) = bounds::FUNDDOM_WINDOW;
    emit(
        out,
        &json!({
            "command": "heptile",
            "depth": depth,
            "geometry": geometry,
            "tileCount": patch.len(),
            "layerSizes": patch.layer_sizes(),
            "coloredTiles": patch.tiles.iter().filter(|t| t.color_id.is_some()).count(),
            "adjacentSameColor": patch.adjacent_same_color().len(),
            "ruleViolations": heptile::rule_violations(&patch).len(),
            "separation": separation,
            "window": separation.map(|s| [geometry.diameter, s.distance]),
            "coversStatedWindow": separation.map(|s| geometry.diameter <= lo && s.distance >= hi),
        }),
    )?;
    Ok(EXIT_OK)
}

fn chroma(edges: &Path, k: Option<u32>, budget: u64, out: &mut dyn Write) -> Result<i32> {
    let g = DistGraph::read_edge_list(BufReader::new(File::open(edges)?))?;
    solve_graph(
        &g,
        k,
        budget,
        json!({ "command": "chroma", "edgeCount": g.edge_count() }),
        out,
    )
}
