//! `hsc`: command-line front end for the suspended-horseshoe toolkit.
//! One subcommand per library module; JSON in, CSV/JSON out. Exit codes:
//! 0 success, 1 user error (bad arguments or inputs), 2 internal failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hsc_core::census::{chord_census_count, growth_csv, growth_rate, orbit_census_count};
use hsc_core::error::Error;
use hsc_core::io::{linking_matrix_csv, orbit_csv, parse_word, MeasureSpec, RoofSpec};
use hsc_core::linking::linking_number;
use hsc_core::model::{
    build_model, intersection_pattern, periodic_orbit, spanning_entropy,
    spanning_entropy_extrapolated, verify_markov_type, AffineHorseshoeModel,
};
use hsc_core::select::{harvest_loops, verify_concatenations};
use hsc_core::shift::{
    canonical_necklace, count_necklaces, enumerate_loops, is_transitive, spectral_decomposition,
    GraphSpec, TransitionGraph,
};
use hsc_core::suspension::RoofFunction;
use hsc_core::thermo::{abramov_entropy, loop_pressure_sum, solve_weight_equation, MarkovMeasure};

#[derive(Parser)]
#[command(name = "hsc", version, about = "Suspended-horseshoe symbolic dynamics toolkit")]
struct Cli {
    /// Worker thread count (falls back to HSC_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized sampling; fixed seed gives byte-identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a transition graph: transitivity, period, loop/necklace counts.
    Shift(ShiftArgs),
    /// Entropy: weight equation for a roof, or spanning estimates for a model.
    Entropy(EntropyArgs),
    /// Harvest Birkhoff-typical loops and verify their concatenations.
    Loops(LoopsArgs),
    /// Periodic-orbit or chord census with growth-rate fit; emits CSV.
    Census(CensusArgs),
    /// Build an affine model, or emit a periodic orbit polyline.
    Model(ModelArgs),
    /// Pairwise linking numbers of periodic orbits of a model.
    Linking(LinkingArgs),
}

#[derive(Args)]
struct ShiftArgs {
    /// Graph JSON `{"alphabet_size": L, "edges": [[a,b],...]}`.
    #[arg(long, conflicts_with = "alphabet")]
    graph: Option<PathBuf>,
    /// Use the full shift on this many symbols instead of a graph file.
    #[arg(long)]
    alphabet: Option<usize>,
    /// Also count loops and necklaces of this length.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    /// Model JSON: compute spanning-set entropy estimates.
    #[arg(long, conflicts_with = "roof")]
    model: Option<PathBuf>,
    /// Roof JSON (depth 1): solve the weight equation.
    #[arg(long)]
    roof: Option<PathBuf>,
    /// Measure JSON: also report the Abramov entropy of the flow.
    #[arg(long, requires = "roof")]
    measure: Option<PathBuf>,
    /// Time horizon for spanning estimates.
    #[arg(long = "T", default_value_t = 20.0)]
    t: f64,
    /// Second horizon: adds a constant-cancelling extrapolated row.
    #[arg(long)]
    t2: Option<f64>,
    /// Comma-separated epsilon list for spanning estimates.
    #[arg(long, default_value = "0.1,0.05")]
    eps: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LoopsArgs {
    /// Graph JSON; defaults to the full shift on the measure's alphabet.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Measure JSON (Bernoulli or Markov).
    #[arg(long)]
    measure: PathBuf,
    /// Roof JSON; the potential used is `-scale * roof`.
    #[arg(long)]
    roof: PathBuf,
    /// Potential scale `h` in `phi = -h * r`.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Birkhoff window half-width.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Loop length.
    #[arg(long, default_value_t = 8)]
    length: usize,
    /// Concatenation check depth.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CensusArgs {
    /// Alphabet size of the full shift.
    #[arg(long)]
    alphabet: usize,
    /// Roof JSON giving return times.
    #[arg(long)]
    roof: PathBuf,
    /// Largest horizon in the grid.
    #[arg(long = "T")]
    t: f64,
    /// Smallest horizon in the grid.
    #[arg(long, default_value_t = 4.0)]
    t_min: f64,
    /// Grid step.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Census chords between these two tails instead of closed orbits.
    #[arg(long, requires = "future")]
    past: Option<String>,
    #[arg(long, requires = "past")]
    future: Option<String>,
    /// Where to write the `T,N,logN` CSV; the fit summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Number of horseshoe branches.
    #[arg(long)]
    alphabet: usize,
    /// Contraction rate, in (0, 1/(2L)).
    #[arg(long)]
    lambda: f64,
    /// Comma-separated per-branch roof values.
    #[arg(long)]
    roofs: String,
    /// Emit the orbit polyline of this cyclic word instead of the model JSON.
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LinkingArgs {
    /// Model JSON produced by `hsc model`.
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated cyclic words labelling the orbits.
    #[arg(long)]
    words: String,
    /// Minimum allowed distance between curves.
    #[arg(long, default_value_t = 1e-7)]
    resolution: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidGraph(_) => "InvalidGraph",
        Error::NotTransitive => "NotTransitive",
        Error::SymbolOutOfRange { .. } => "SymbolOutOfRange",
        Error::NotAdmissible(_) => "NotAdmissible",
        Error::Overflow(_) => "Overflow",
        Error::InvalidRoof(_) => "InvalidRoof",
        Error::DepthMismatch { .. } => "DepthMismatch",
        Error::InvalidMeasure(_) => "InvalidMeasure",
        Error::InvalidInput(_) => "InvalidInput",
        Error::LengthMismatch(_) => "LengthMismatch",
        Error::InvalidModel(_) => "InvalidModel",
        Error::CurvesTooClose { .. } => "CurvesTooClose",
        Error::DegenerateProjection { .. } => "DegenerateProjection",
        Error::TangentialIntersection { .. } => "TangentialIntersection",
        Error::GridTooCoarse { .. } => "GridTooCoarse",
        Error::LabelCollision(_) => "LabelCollision",
        Error::Io(_) => "Io",
        Error::Json(_) => "Json",
    }
}

/// User errors (bad files, bad parameters, failed validation) exit 1;
/// failures of the numerics themselves exit 2.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Overflow(_)
        | Error::CurvesTooClose { .. }
        | Error::DegenerateProjection { .. }
        | Error::TangentialIntersection { .. }
        | Error::GridTooCoarse { .. }
        | Error::LabelCollision(_) => 2,
        _ => 1,
    }
}

fn fail(e: Error) -> ExitCode {
    let body = serde_json::json!({ "error": ErrorBody {
        kind: error_kind(&e),
        message: e.to_string(),
    }});
    eprintln!("{body}");
    ExitCode::from(exit_code(&e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(Error::InvalidInput(e.to_string()));
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("HSC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        // ignore failure: the global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let result = match cli.command {
        Command::Shift(a) => run_shift(a),
        Command::Entropy(a) => run_entropy(a),
        Command::Loops(a) => run_loops(a),
        Command::Census(a) => run_census(a),
        Command::Model(a) => run_model(a),
        Command::Linking(a) => run_linking(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, content).map_err(Error::from),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number {p:?} in list {s:?}")))
        })
        .collect()
}

fn load_graph(path: &Option<PathBuf>, alphabet: Option<usize>) -> Result<TransitionGraph, Error> {
    match (path, alphabet) {
        (Some(p), _) => {
            let spec: GraphSpec = read_json(p)?;
            TransitionGraph::from_spec(&spec)
        }
        (None, Some(l)) if l >= 1 => Ok(TransitionGraph::full_shift(l)),
        _ => Err(Error::InvalidInput(
            "provide --graph FILE or --alphabet L".into(),
        )),
    }
}

fn load_roof(path: &Path) -> Result<RoofFunction<f64>, Error> {
    let spec: RoofSpec = read_json(path)?;
    spec.to_roof_f64()
}

/// Depth-1 roof values listed in symbol order.
fn roof_values_by_symbol(roof: &RoofFunction<f64>) -> Result<Vec<f64>, Error> {
    if roof.depth() != 1 {
        return Err(Error::DepthMismatch {
            expected: 1,
            got: roof.depth(),
        });
    }
    let map = roof.as_cylinder().values();
    let mut vals = vec![0.0; map.len()];
    for (w, &v) in map {
        vals[w.symbols()[0]] = v;
    }
    Ok(vals)
}

fn run_shift(a: ShiftArgs) -> Result<(), Error> {
    let g = load_graph(&a.graph, a.alphabet)?;
    let transitive = is_transitive(&g);
    let period = if transitive {
        Some(spectral_decomposition(&g)?.period)
    } else {
        None
    };
    let (necklaces, loops_at_0) = match a.length {
        Some(n) if n >= 1 => {
            let necklaces = count_necklaces(g.alphabet_size(), n)?;
            let loops = enumerate_loops(&g, 0, n).len() as u64;
            (Some(necklaces), Some(loops))
        }
        _ => (None, None),
    };
    let report = serde_json::json!({
        "alphabet_size": g.alphabet_size(),
        "edge_count": g.edges().len(),
        "transitive": transitive,
        "period": period,
        "necklaces": necklaces,
        "loops_at_0": loops_at_0,
    });
    emit(&a.out, &format!("{report:#}\n"))
}

fn run_entropy(a: EntropyArgs) -> Result<(), Error> {
    if let Some(model_path) = &a.model {
        let model: AffineHorseshoeModel = read_json(model_path)?;
        let eps = parse_f64_list(&a.eps)?;
        let rows = spanning_entropy(&model, a.t, &eps)?;
        let mut csv = String::from("epsilon,estimate\n");
        for (e, v) in rows {
            csv.push_str(&format!("{e},{v}\n"));
        }
        if let Some(t2) = a.t2 {
            let v = spanning_entropy_extrapolated(&model, a.t, t2, &eps)?;
            csv.push_str(&format!("extrapolated,{v}\n"));
        }
        return emit(&a.out, &csv);
    }
    let roof_path = a
        .roof
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("provide --model FILE or --roof FILE".into()))?;
    let roof = load_roof(roof_path)?;
    let values = roof_values_by_symbol(&roof)?;
    let sol = solve_weight_equation(&values)?;
    let abramov = match &a.measure {
        Some(mp) => {
            let spec: MeasureSpec = read_json(mp)?;
            Some(abramov_entropy(&spec.to_measure()?, &roof)?)
        }
        None => None,
    };
    let report = serde_json::json!({
        "flow_entropy": sol.h,
        "weights": sol.weights,
        "abramov_entropy": abramov,
    });
    emit(&a.out, &format!("{report:#}\n"))
}

fn run_loops(a: LoopsArgs) -> Result<(), Error> {
    let spec: MeasureSpec = read_json(&a.measure)?;
    let m: MarkovMeasure<f64> = spec.to_measure()?;
    let g = load_graph(&a.graph, Some(m.alphabet_size()))?;
    let roof = load_roof(&a.roof)?;
    let pot = roof.potential(a.scale);
    let harvest = harvest_loops(&g, &m, &pot, a.eps, a.length)?;
    let pressure_sum = loop_pressure_sum(&harvest.loops, &pot, a.length)?;
    let check = verify_concatenations(&harvest, &pot, a.depth)?;
    let report = serde_json::json!({
        "harvest": harvest.summary(),
        "pressure_sum": pressure_sum,
        "concatenations": check,
    });
    emit(&a.out, &format!("{report:#}\n"))
}

fn run_census(a: CensusArgs) -> Result<(), Error> {
    if !(a.t_min > 0.0 && a.step > 0.0 && a.t >= a.t_min) {
        return Err(Error::InvalidInput(
            "need 0 < t_min <= T and a positive step".into(),
        ));
    }
    let roof = load_roof(&a.roof)?;
    let mut grid = Vec::new();
    let mut t = a.t_min;
    while t <= a.t + 1e-9 {
        grid.push(t);
        t += a.step;
    }
    let l = a.alphabet;
    let chords = match (&a.past, &a.future) {
        (Some(p), Some(f)) => Some((
            canonical_necklace(&parse_word(p)?),
            canonical_necklace(&parse_word(f)?),
        )),
        _ => None,
    };
    let counts = |t: f64| match &chords {
        Some((p, f)) => chord_census_count(&roof, l, p, f, t),
        None => orbit_census_count(&roof, l, t),
    };
    let csv = growth_csv(&counts, &grid)?;
    let fit = growth_rate(&counts, &grid)?;
    if a.out.is_some() {
        emit(&a.out, &csv)?;
        let report = serde_json::json!({
            "slope": fit.slope,
            "log_correction": fit.log_correction,
            "residual": fit.residual,
            "window": fit.window,
        });
        println!("{report:#}");
        Ok(())
    } else {
        emit(&a.out, &csv)
    }
}

fn run_model(a: ModelArgs) -> Result<(), Error> {
    let roofs = parse_f64_list(&a.roofs)?;
    let model = build_model(a.alphabet, a.lambda, &roofs)?;
    if !verify_markov_type(&model) {
        return Err(Error::InvalidModel(
            "built model fails the Markov crossing conditions".into(),
        ));
    }
    match &a.word {
        Some(w) => {
            let necklace = canonical_necklace(&parse_word(w)?);
            let orbit = periodic_orbit(&model, &necklace)?;
            // sanity check: the realized orbit reads back its own label
            let (hits, pattern) = intersection_pattern(&model, &orbit)?;
            if hits != necklace.canonical().len()
                || canonical_necklace(&pattern) != necklace
            {
                return Err(Error::InvalidModel(format!(
                    "orbit {w} does not reproduce its itinerary"
                )));
            }
            emit(&a.out, &orbit_csv(&orbit))
        }
        None => {
            let json = serde_json::to_string_pretty(&model)?;
            emit(&a.out, &format!("{json}\n"))
        }
    }
}

fn run_linking(a: LinkingArgs) -> Result<(), Error> {
    let model: AffineHorseshoeModel = read_json(&a.model)?;
    let labels: Vec<String> = a
        .words
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if labels.len() < 2 {
        return Err(Error::InvalidInput("need at least two words".into()));
    }
    let mut orbits = Vec::new();
    for w in &labels {
        orbits.push(periodic_orbit(&model, &canonical_necklace(&parse_word(w)?))?);
    }
    let n = orbits.len();
    let mut matrix = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let lk = linking_number(&orbits[i].vertices, &orbits[j].vertices, a.resolution)?;
            matrix[i][j] = lk;
            matrix[j][i] = lk;
        }
    }
    emit(&a.out, &linking_matrix_csv(&labels, &matrix))
}
