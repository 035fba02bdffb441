use std::fs;
use std::path::{Path, PathBuf};

use qarl_core::hamiltonian::{exact_diagonalize, manifest_text, HamiltonianFamily, JspInstance};
use qarl_core::sac::SacAgent;
use qarl_core::sim::{fidelity, preprocess_circuit, Circuit, StateVector};
use qarl_core::trainer::{
    asymmetric_spread, build_env, census_csv, census_row, circuit_census, cost_per_parameter,
    ensure_dir, grid_for, load_agent, moving_average, pec_statistics, predict_pec,
    read_episode_log, read_pec, read_reference, round_to, save_checkpoint, train as train_run,
    write_census, write_pec, EpisodeLog, Net, PecResult, RunConfig,
};
use qarl_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{CensusArgs, DiagonalizeArgs, JspArgs, PredictArgs, PreprocessArgs, StatsArgs, TrainArgs};

const GRID_EPS: f64 = 1e-9;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_optional_family(path: Option<&PathBuf>) -> Result<Option<HamiltonianFamily>> {
    path.map(|p| HamiltonianFamily::load_file(p)).transpose()
}

fn mean_error(pec: &PecResult) -> Option<f64> {
    let errs: Option<Vec<f64>> = pec
        .points
        .iter()
        .map(|p| p.exact.map(|e| (p.energy - e).abs()))
        .collect();
    errs.filter(|e| !e.is_empty())
        .map(|e| e.iter().sum::<f64>() / e.len() as f64)
}

fn describe(pec: &PecResult) -> String {
    match mean_error(pec) {
        Some(err) => format!("{} grid points, mean |error| {err:.6}", pec.points.len()),
        None => format!("{} grid points", pec.points.len()),
    }
}

/// Everything a single run needs, validated before any file is written.
struct Plan {
    cfg: RunConfig,
    family: HamiltonianFamily,
    eval_family: Option<HamiltonianFamily>,
    grid: Vec<f64>,
}

fn run_one(plan: &Plan, dir: &Path, seed: u64) -> Result<String> {
    ensure_dir(dir)?;
    let ckpt = dir.join("checkpoint");
    let every = plan.cfg.training.checkpoint_every;
    let mut log = EpisodeLog::create(&dir.join("episodes.csv"))?;
    let trainer = train_run(&plan.cfg, &plan.family, seed, |t, rec| {
        log.record(rec)?;
        if every > 0 && (rec.index + 1) % every == 0 {
            save_checkpoint(&ckpt, t)?;
        }
        Ok(())
    })?;
    save_checkpoint(&ckpt, &trainer)?;
    let mut env = build_env(&plan.cfg, &plan.family)?;
    let pec = predict_pec(
        trainer.agent(),
        &mut env,
        &plan.family,
        &plan.grid,
        plan.eval_family.as_ref(),
    )?;
    write_pec(dir, &pec)?;
    write_census(&dir.join("census.csv"), &circuit_census(&pec)?)?;
    Ok(format!(
        "{}: seed {seed}, {} episodes, {}",
        dir.display(),
        trainer.episodes_done(),
        describe(&pec)
    ))
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = a.runs {
        cfg.training.runs = runs;
    }
    if let Some(episodes) = a.episodes {
        cfg.training.episodes = episodes;
    }
    cfg.validate()?;
    let family = HamiltonianFamily::load_file(&cfg.system.family)?;
    let eval_family = load_optional_family(cfg.system.prediction_family.as_ref())?;
    let grid = grid_for(&family, cfg.system.prediction_step)?;
    build_env(&cfg, &family)?;

    ensure_dir(&a.out)?;
    write(&a.out.join("config.toml"), &cfg.to_toml())?;
    let runs = cfg.training.runs;
    let plan = Plan {
        cfg,
        family,
        eval_family,
        grid,
    };
    let jobs: Vec<(PathBuf, u64)> = (0..runs)
        .map(|i| (a.out.join(format!("run_{i:02}")), plan.cfg.seed + i as u64))
        .collect();
    let summaries: Vec<Result<String>> = if a.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs
                .iter()
                .map(|(dir, seed)| s.spawn(|| run_one(&plan, dir, *seed)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect()
        })
    } else {
        jobs.iter()
            .map(|(dir, seed)| {
                let out = run_one(&plan, dir, *seed);
                if let Ok(line) = &out {
                    println!("{line}");
                }
                out
            })
            .collect()
    };
    for s in summaries {
        let line = s?;
        if a.parallel {
            println!("{line}");
        }
    }
    Ok(())
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let family = HamiltonianFamily::load_file(&cfg.system.family)?;
    let eval_family = match &a.eval_family {
        Some(p) => Some(HamiltonianFamily::load_file(p)?),
        None => load_optional_family(cfg.system.prediction_family.as_ref())?,
    };
    let step = a.step.unwrap_or(cfg.system.prediction_step);
    if !(step >= 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!("prediction step {step} must be nonnegative")));
    }
    let grid = grid_for(&family, step)?;
    let mut env = build_env(&cfg, &family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut agent =
        SacAgent::<Net>::new(env.obs_size(), env.actions().len(), &cfg.sac_config(), &mut rng)?;
    load_agent(&a.checkpoint, &mut agent)?;
    let pec = predict_pec(&agent, &mut env, &family, &grid, eval_family.as_ref())?;
    ensure_dir(&a.out)?;
    write_pec(&a.out, &pec)?;
    write_census(&a.out.join("census.csv"), &circuit_census(&pec)?)?;
    println!("{}: {}", a.out.display(), describe(&pec));
    Ok(())
}

fn reference_for(a: &StatsArgs, grid: &[f64], exact: &[Option<f64>]) -> Result<Vec<f64>> {
    match &a.reference {
        Some(path) => {
            let rows = read_reference(path)?;
            grid.iter()
                .map(|r| {
                    rows.iter()
                        .find(|row| (row.r - r).abs() < GRID_EPS)
                        .map(|row| row.energy)
                        .ok_or_else(|| {
                            Error::Invalid(format!("{} has no entry for r = {r}", path.display()))
                        })
                })
                .collect()
        }
        None => exact
            .iter()
            .map(|e| {
                e.ok_or_else(|| {
                    Error::Invalid("prediction table lacks exact energies; pass --reference".into())
                })
            })
            .collect(),
    }
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let tables = a
        .runs
        .iter()
        .map(|d| read_pec(&d.join("pec.csv")))
        .collect::<Result<Vec<_>>>()?;
    let grid: Vec<f64> = tables[0].iter().map(|p| p.r).collect();
    for (dir, t) in a.runs.iter().zip(&tables) {
        let same = t.len() == grid.len()
            && t.iter().zip(&grid).all(|(p, r)| (p.r - r).abs() < GRID_EPS);
        if !same {
            return Err(Error::Invalid(format!(
                "{} uses a different grid than {}",
                dir.display(),
                a.runs[0].display()
            )));
        }
    }
    let exact: Vec<Option<f64>> = tables[0].iter().map(|p| p.exact).collect();
    let reference = reference_for(a, &grid, &exact)?;
    let energies: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| t.iter().map(|p| p.energy).collect())
        .collect();
    let summary = pec_statistics(&energies, &reference)?;

    for (dir, err) in a.runs.iter().zip(&summary.per_run) {
        let mut line = format!("{}: mean |error| {err:.6}", dir.display());
        let log_path = dir.join("episodes.csv");
        if log_path.exists() {
            let log = read_episode_log(&log_path)?;
            let mut rs: Vec<f64> = log.iter().map(|e| e.r).collect();
            rs.sort_by(f64::total_cmp);
            rs.dedup_by(|x, y| (*x - *y).abs() < GRID_EPS);
            let cost = cost_per_parameter(log.len(), rs.len())?;
            line.push_str(&format!(
                ", {} episodes, {:.1} per training value (~{})",
                log.len(),
                cost,
                round_to(cost, 10.0)
            ));
            let returns: Vec<f64> = log.iter().map(|e| e.ret).collect();
            if a.window <= returns.len() {
                let ma = moving_average(&returns, a.window)?;
                line.push_str(&format!(
                    ", final moving-average return {:.4}",
                    ma.last().expect("nonempty series")
                ));
            }
        }
        println!("{line}");
    }
    println!(
        "runs {}: mean {:.6}, sigma_minus {:.6}, sigma_plus {:.6}, best {:.6}",
        summary.per_run.len(),
        summary.runs.mean,
        summary.runs.minus,
        summary.runs.plus,
        summary.best
    );
    if let Some(out) = &a.out {
        let mut text = String::from("r,reference,mean,sigma_minus,sigma_plus,mean_abs_error\n");
        for (i, (r, s)) in grid.iter().zip(&summary.pointwise).enumerate() {
            let errs: Vec<f64> = energies.iter().map(|e| (e[i] - reference[i]).abs()).collect();
            let err = asymmetric_spread(&errs)?.mean;
            text.push_str(&format!(
                "{r:?},{:?},{:?},{:?},{:?},{err:?}\n",
                reference[i], s.mean, s.minus, s.plus
            ));
        }
        write(out, &text)?;
    }
    Ok(())
}

fn parse_length(s: &str) -> Result<u32> {
    s.trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("bad job length `{}`", s.trim())))
}

/// Splits `1,1,{1,2,3}` (or `1,1,1/2/3`) into the fixed lengths and the
/// alternatives for the last job.
pub fn parse_jobs(spec: &str) -> Result<(Vec<u32>, Vec<u32>)> {
    let mut items = Vec::new();
    let mut depth = 0;
    let mut current = String::new();
    for ch in spec.chars() {
        match ch {
            '{' => {
                depth += 1;
                current.push(ch);
            }
            '}' => {
                depth -= 1;
                current.push(ch);
            }
            ',' if depth == 0 => items.push(std::mem::take(&mut current)),
            _ => current.push(ch),
        }
    }
    items.push(current);
    if depth != 0 {
        return Err(Error::Invalid(format!("unbalanced braces in `{spec}`")));
    }
    let last = items.pop().unwrap_or_default();
    if items.iter().any(|s| s.contains(['{', '/'])) {
        return Err(Error::Invalid("only the last job may list alternatives".into()));
    }
    let fixed = items.iter().map(|s| parse_length(s)).collect::<Result<Vec<_>>>()?;
    let inner = last.trim().trim_start_matches('{').trim_end_matches('}');
    let options = inner
        .split([',', '/'])
        .map(parse_length)
        .collect::<Result<Vec<_>>>()?;
    Ok((fixed, options))
}

pub fn jsp_build(a: &JspArgs) -> Result<()> {
    let (fixed, options) = parse_jobs(&a.jobs)?;
    let mut built = Vec::new();
    for &last in &options {
        let mut lengths = fixed.clone();
        lengths.push(last);
        let inst = JspInstance {
            lengths,
            n_machines: a.machines,
            max_diff: a.max_diff,
            a_weight: a.a,
            b_weight: a.b,
        };
        inst.validate()?;
        let h = inst.hamiltonian()?;
        built.push((last, inst, h));
    }
    ensure_dir(&a.out)?;
    let mut entries = Vec::new();
    for (last, inst, h) in &built {
        let tag: Vec<String> = inst.lengths.iter().map(u32::to_string).collect();
        let name = format!("jsp_{}.txt", tag.join("_"));
        write(&a.out.join(&name), &h.to_text())?;
        println!("{} ({} qubits)", a.out.join(&name).display(), inst.n_qubits());
        entries.push((*last as f64, name));
    }
    if entries.len() > 1 {
        let lo = entries.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        let hi = entries.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
        let path = a.out.join("family.toml");
        write(&path, &manifest_text(lo, hi, &entries))?;
        println!("{}", path.display());
    }
    Ok(())
}

pub fn diagonalize(a: &DiagonalizeArgs) -> Result<()> {
    let is_manifest = a.hamiltonian.extension().is_some_and(|e| e == "toml");
    let family = HamiltonianFamily::load_file(&a.hamiltonian)?;
    if is_manifest {
        println!("r,ground_energy");
    }
    for (r, h) in family.samples() {
        let (e, _) = exact_diagonalize(h)?;
        if is_manifest {
            println!("{r:?},{e:.12}");
        } else {
            println!("{e:.12}");
        }
    }
    Ok(())
}

pub fn preprocess(a: &PreprocessArgs) -> Result<()> {
    let circuit = Circuit::parse(&read(&a.circuit)?)?;
    let start = match &a.start {
        Some(bits) => StateVector::from_bitstring(circuit.n, bits)?,
        None => StateVector::zero(circuit.n)?,
    };
    let reduced = preprocess_circuit(&circuit, &start);
    let fid = fidelity(&circuit.run(&start)?, &reduced.run(&start)?)?;
    write(&a.out, &reduced.to_text())?;
    let (before, after) = (circuit.gates.len(), reduced.gates.len());
    println!(
        "gates {before} -> {after} ({:+})",
        after as i64 - before as i64
    );
    println!("fidelity {fid:.6}");
    Ok(())
}

pub fn census(a: &CensusArgs) -> Result<()> {
    let base = a.pec.parent().unwrap_or(Path::new("."));
    let rows = read_pec(&a.pec)?
        .iter()
        .map(|row| census_row(row.r, &Circuit::parse(&read(&base.join(&row.circuit))?)?))
        .collect::<Result<Vec<_>>>()?;
    match &a.out {
        Some(path) => write_census(path, &rows),
        None => {
            print!("{}", census_csv(&rows));
            Ok(())
        }
    }
}
