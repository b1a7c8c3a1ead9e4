use mflab_core::conditionals::{strong_lumpability, SearchBudget};
use mflab_core::disintegration::{first_state_posterior, g_tilde, kappa, reversed_lumpability, tjur_probe};
use mflab_core::factor::MIXING_CAP;
use mflab_core::{Alphabet, FactorProcess, MixingVerdict};
use serde_json::{json, Map, Value};

use crate::model_file::{ModelFile, Process};
use crate::report::{double, matrix, num, sampled, vector, Cell, Report, Table};
use crate::{presets, Args, CliError, Command, IMAGE_CHECK_DEPTH};

pub struct Loaded {
    /// `{"preset": id}` or `{"model": path}`.
    pub source: (String, String),
    pub process: Process,
}

/// Reads the model or preset and rejects images that are not the
/// advertised one-step shift.
pub fn load(args: &Args) -> Result<Loaded, CliError> {
    let (source, process) = match (&args.preset, &args.model) {
        (Some(id), _) => (("preset".to_string(), id.clone()), Process::Exact(presets::load(id)?.process)),
        (None, Some(path)) => (("model".to_string(), path.display().to_string()), ModelFile::read(path)?.build()?),
        (None, None) => return Err(CliError::Input("one of --model or --preset is required".into())),
    };
    let check = process.system().verify_image_sft(IMAGE_CHECK_DEPTH);
    if let Some(w) = check.witness {
        return Err(CliError::NotSft { witness: process.system().image().alphabet().render(w.as_slice()) });
    }
    Ok(Loaded { source, process })
}

pub fn execute(args: &Args, loaded: &Loaded) -> Result<Report, CliError> {
    match &loaded.process {
        Process::Exact(fp) => analyse(args, loaded, fp),
        Process::Double(fp) => analyse(args, loaded, fp),
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Check => "check",
        Command::Lump => "lump",
        Command::Mix => "mix",
        Command::Gfun => "gfun",
        Command::Badconfig => "badconfig",
        Command::Gtilde => "gtilde",
        Command::Tjur => "tjur",
        Command::Simulate => "simulate",
        Command::Export => "export",
    }
}

fn analyse<S: Cell>(args: &Args, loaded: &Loaded, fp: &FactorProcess<S>) -> Result<Report, CliError> {
    let mut inputs = Map::new();
    inputs.insert(loaded.source.0.clone(), json!(loaded.source.1));
    inputs.insert("mode".into(), json!(loaded.process.mode().label()));
    inputs.insert("seed".into(), json!(args.seed));
    let mut r = Report::new(command_name(args.command), inputs);
    r.set("image_alphabet", json!(fp.image().alphabet().labels()));
    match args.command {
        Command::Check => check(args, fp, &mut r)?,
        Command::Lump => lump(args, fp, &mut r)?,
        Command::Mix => mix(args, fp, &mut r),
        Command::Gfun => gfun(args, fp, &mut r)?,
        Command::Badconfig => badconfig(args, fp, &mut r)?,
        Command::Gtilde => gtilde(args, fp, &mut r)?,
        Command::Tjur => tjur(args, fp, &mut r)?,
        Command::Simulate => simulate(args, fp, &mut r)?,
        Command::Export => unreachable!("handled before analysis"),
    }
    Ok(r)
}

fn budget(args: &Args) -> SearchBudget {
    SearchBudget { seed: args.seed, ..SearchBudget::default() }
}

/// The `--word` option, or the image of a stationary path of length `len`.
fn word<S: Cell>(args: &Args, fp: &FactorProcess<S>, len: usize, r: &mut Report) -> Result<Vec<usize>, CliError> {
    let y = match &args.word {
        Some(text) => fp.image().alphabet().parse_word(text)?,
        None => fp.map().apply(fp.model().sample_path(len, args.seed).as_slice()),
    };
    if y.is_empty() {
        return Err(CliError::Input("word must be nonempty".into()));
    }
    r.inputs.insert("word".into(), json!(fp.image().alphabet().render(&y)));
    Ok(y)
}

fn option(r: &mut Report, key: &str, value: Value) {
    r.inputs.insert(key.into(), value);
}

fn labelled<S: Cell>(alphabet: &Alphabet, states: &[usize], values: &[S]) -> Value {
    Value::Array(states.iter().zip(values).map(|(&a, v)| json!({ "state": alphabet.label(a), "p": num(v) })).collect())
}

fn check<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) -> Result<(), CliError> {
    let depth = args.depth.unwrap_or(IMAGE_CHECK_DEPTH);
    option(r, "depth", json!(depth));
    let shift = fp.model().shift();
    let states: Vec<usize> = (0..shift.size()).collect();
    r.set("irreducible", json!(shift.is_irreducible()));
    r.set("aperiodic", json!(shift.is_aperiodic()));
    r.set("primitive", json!(shift.is_primitive()));
    r.set("compatible", json!(fp.model().transition().check_compatible(shift)?));
    let ic = fp.system().verify_image_sft(depth);
    r.set(
        "image_sft",
        json!({
            "realized": ic.realized,
            "depth": ic.depth,
            "exhausted": ic.exhausted,
            "witness": ic.witness.map(|w| fp.image().alphabet().render(w.as_slice())),
        }),
    );
    r.set("stationary", labelled(shift.alphabet(), &states, fp.model().stationary()));
    r.set("topological_entropy", double(shift.topological_entropy()?));
    r.set("image_topological_entropy", double(fp.image().topological_entropy()?));
    r.set("entropy_rate", double(fp.model().entropy_rate()));
    Ok(())
}

fn lump<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) -> Result<(), CliError> {
    let depth = args.depth.unwrap_or(6);
    option(r, "depth", json!(depth));
    let (src, img) = (fp.model().shift().alphabet(), fp.image().alphabet());
    let strong = strong_lumpability(fp.model().transition(), fp.map());
    r.set(
        "strong",
        json!({
            "lumpable": strong.lumpable,
            "factor": strong.factor.as_ref().map(matrix),
            "violation": strong.violation.as_ref().map(|v| json!({
                "class": img.label(v.class),
                "target": img.label(v.target),
                "states": [src.label(v.states.0), src.label(v.states.1)],
                "sums": [num(&v.sums.0), num(&v.sums.1)],
            })),
        }),
    );
    let rev = reversed_lumpability(fp)?;
    r.set(
        "reversed",
        json!({
            "lumpable": rev.lumpable,
            "kernel": rev.kernel.as_ref().map(matrix),
            "violation": rev.violation.map(|(y0, y1, a, b)| json!({
                "class": img.label(y0),
                "target": img.label(y1),
                "states": [src.label(a), src.label(b)],
            })),
        }),
    );
    let probe = fp.markov_order_probe(depth)?;
    r.set(
        "order",
        json!({
            "depth": probe.depth,
            "order": probe.order,
            "violation": probe.violation.as_ref().map(|w| img.render(w)),
            "marginal": vector(&probe.marginal),
            "transition": matrix(&probe.transition),
        }),
    );
    Ok(())
}

fn mix<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) {
    let depth = args.depth.unwrap_or(6);
    option(r, "depth", json!(depth));
    let system = fp.system();
    let verdict = system.is_fibre_mixing(MIXING_CAP);
    r.set("verdict", json!(verdict.label()));
    match verdict {
        MixingVerdict::Mixing { index } => r.set("index", json!(index)),
        MixingVerdict::NotMixing { word, from, to } => {
            let prod = system.fibre_product(word.as_slice());
            let i = fp.map().preimage(word.symbols[0]).iter().position(|&a| a == from);
            let j = fp.map().preimage(*word.symbols.last().expect("nonempty")).iter().position(|&a| a == to);
            let verified = match (i, j) {
                (Some(i), Some(j)) => !prod.get(i, j) && !prod.row_is_zero(i) && !prod.col_is_zero(j),
                _ => false,
            };
            let src = fp.model().shift().alphabet();
            r.set(
                "witness",
                json!({
                    "word": fp.image().alphabet().render(word.as_slice()),
                    "from": src.label(from),
                    "to": src.label(to),
                    "verified": verified,
                }),
            );
        }
        MixingVerdict::Inconclusive { cap, explored } => r.set("search", json!({ "cap": cap, "explored": explored })),
    }
    r.set("sub_positivity_index", json!(system.sub_positivity_index(depth)));
}

fn gfun<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) -> Result<(), CliError> {
    let depth = args.depth.unwrap_or(8);
    let ext = args.ext.unwrap_or(6);
    option(r, "ext", json!(ext));
    let y = word(args, fp, depth + 1, r)?;
    if y.len() < 2 {
        return Err(CliError::Input("gfun needs a word of length at least 2".into()));
    }
    let table = fp.conditional_table(&y, ext, &budget(args))?;
    let img = fp.image().alphabet();
    let mut t = Table::new([
        ("n", "label"),
        ("word", "label"),
        ("g_n", S::PROVENANCE),
        ("var_lower", S::PROVENANCE),
        ("coverage", "label"),
        ("var_upper_heuristic", "double"),
    ]);
    for (k, (g, v)) in table.values.iter().zip(&table.variation).enumerate() {
        t.push(vec![
            json!(k + 1),
            json!(img.render(&y[..=k + 1])),
            num(g),
            num(&v.lower),
            json!(v.coverage.label()),
            double(v.heuristic_upper),
        ]);
    }
    r.table = Some(t);
    r.set("fit", fit(table.fit));
    r.set("contraction_coefficient", double(fp.contraction_coefficient()));
    Ok(())
}

fn fit(f: Option<mflab_core::conditionals::DecayFit>) -> Value {
    f.map_or(Value::Null, |f| {
        json!({ "rate": double(f.rate), "intercept": double(f.intercept), "r_squared": double(f.r_squared), "points": f.points })
    })
}

fn badconfig<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) -> Result<(), CliError> {
    let depth = args.depth.unwrap_or(6);
    let ext = args.ext.unwrap_or(40);
    let eps = args.eps.unwrap_or(0.05);
    option(r, "depth", json!(depth));
    option(r, "ext", json!(ext));
    option(r, "eps", json!(eps));
    let search = fp.find_bad_configuration(depth, ext, eps, &budget(args))?;
    let img = fp.image().alphabet();
    let mut t = Table::new([
        ("n", "label"),
        ("best_gap", "double"),
        ("center", "label"),
        ("high", "label"),
        ("low", "label"),
        ("gap", S::PROVENANCE),
    ]);
    for d in &search.depths {
        let w = d.witness.as_ref();
        t.push(vec![
            json!(d.n),
            double(d.best_gap),
            w.map_or(Value::Null, |w| json!(img.render(&w.center))),
            w.map_or(Value::Null, |w| json!(img.render(&w.high))),
            w.map_or(Value::Null, |w| json!(img.render(&w.low))),
            w.map_or(Value::Null, |w| num(&w.gap)),
        ]);
    }
    r.table = Some(t);
    r.set("found", json!(search.found()));
    r.set("nested", json!(search.nested));
    r.set(
        "witness",
        search.witness().map_or(Value::Null, |w| {
            json!({ "center": img.render(&w.center), "high": img.render(&w.high), "low": img.render(&w.low), "gap": num(&w.gap) })
        }),
    );
    Ok(())
}

fn gtilde<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) -> Result<(), CliError> {
    let depth = args.depth.unwrap_or(10);
    let y = word(args, fp, depth + 1, r)?;
    if y.len() < 2 {
        return Err(CliError::Input("gtilde needs a word of length at least 2".into()));
    }
    let gt = g_tilde(fp, &y)?;
    let k = kappa(fp);
    let src = fp.model().shift().alphabet();
    r.set("value", num(&gt.value));
    r.set("depth", json!(gt.depth));
    r.set("deltas", Value::Array(gt.deltas.iter().map(|d| double(*d)).collect()));
    r.set("converged", json!(gt.converged));
    r.set("g_n", num(&fp.g_n(&y)?));
    r.set("kappa", num(&k));
    r.set("at_least_kappa", json!(gt.value >= k));
    r.set("posterior", labelled(src, fp.map().preimage(y[1]), &first_state_posterior(fp, &y[1..])?));
    let mut t = Table::new([("depth", "label"), ("g_tilde", S::PROVENANCE)]);
    for n in 1..y.len() {
        t.push(vec![json!(n), num(&g_tilde(fp, &y[..=n])?.value)]);
    }
    r.table = Some(t);
    Ok(())
}

fn tjur<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) -> Result<(), CliError> {
    let depth = args.depth.unwrap_or(8);
    let eps = args.eps.unwrap_or(0.1);
    option(r, "eps", json!(eps));
    let target = word(args, fp, depth + 1, r)?;
    let depths: Vec<usize> = (1..target.len()).collect();
    if depths.is_empty() {
        return Err(CliError::Input("tjur needs a word of length at least 2".into()));
    }
    let (src, img) = (fp.model().shift().alphabet(), fp.image().alphabet());
    let cylinder = match &args.cylinder {
        Some(text) => src.parse_word(text)?,
        None => vec![fp.map().preimage(target[0])[0]],
    };
    let continuations: Vec<Vec<usize>> = if args.continuations.is_empty() {
        (0..fp.image_size())
            .map(|b| vec![b])
            .filter(|z| depths.iter().all(|&n| !fp.factor_cylinder_probability(&[&target[..=n], z.as_slice()].concat()).is_zero()))
            .collect()
    } else {
        args.continuations.iter().map(|c| img.parse_word(c)).collect::<Result<_, _>>()?
    };
    option(r, "cylinder", json!(src.render(&cylinder)));
    option(r, "continuations", json!(continuations.iter().map(|z| img.render(z)).collect::<Vec<_>>()));
    let probe = tjur_probe(fp, &target, &continuations, &cylinder, &depths, eps)?;
    let names: Vec<String> = continuations.iter().map(|z| format!("z={}", img.render(z))).collect();
    let mut columns = vec![("depth", "label")];
    columns.extend(names.iter().map(|n| (n.as_str(), S::PROVENANCE)));
    columns.push(("spread", S::PROVENANCE));
    let mut t = Table::new(columns);
    for row in &probe.rows {
        let mut cells = vec![json!(row.depth)];
        cells.extend(row.values.iter().map(num));
        cells.push(num(&row.spread));
        t.push(cells);
    }
    r.table = Some(t);
    r.set("discontinuity_certified", json!(probe.discontinuity_certified));
    r.set("fit", fit(probe.fit));
    Ok(())
}

fn simulate<S: Cell>(args: &Args, fp: &FactorProcess<S>, r: &mut Report) -> Result<(), CliError> {
    let depth = args.depth.unwrap_or(3);
    let y = word(args, fp, depth + 1, r)?;
    option(r, "samples", json!(args.samples));
    let exact = fp.g_n(&y)?;
    let est = fp.empirical_conditional(&y, args.samples, args.seed)?;
    let z = if est.stderr > 0.0 { (est.estimate - exact.to_f64()) / est.stderr } else { f64::NAN };
    r.set("exact", num(&exact));
    r.set("estimate", sampled(est.estimate));
    r.set("stderr", sampled(est.stderr));
    r.set("z", sampled(z));
    r.set("hits", json!(est.hits));
    r.set("flagged", json!(est.flagged));
    let mut t = Table::new([
        ("word", "label"),
        ("exact", S::PROVENANCE),
        ("estimate", "sampled"),
        ("stderr", "sampled"),
        ("hits", "label"),
        ("samples", "label"),
        ("seed", "label"),
    ]);
    t.push(vec![
        json!(fp.image().alphabet().render(&y)),
        num(&exact),
        sampled(est.estimate),
        sampled(est.stderr),
        json!(est.hits),
        json!(est.samples),
        json!(est.seed),
    ]);
    r.table = Some(t);
    Ok(())
}
