use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use evoprep::baseline::exact_prepare;
use evoprep::evolution::{evolve, pareto_front};
use evoprep::experiment::{
    export_front_csv, gaussian_fit, histogram, parse_population_jsonl, population_to_jsonl, read_population_jsonl,
    run_experiment, theory_curves, theory_overlay, ComparisonReport, ExperimentConfig,
};
use evoprep::haar::{sample_haar_state, Domain, RngSeed};
use evoprep::sim::{circuit_fidelity, evaluate_noisy};
use evoprep::theory::{fit_lph, optimal_length, TheoryParams};
use evoprep::{Circuit, CouplingMap, NoiseModel, StateVector};

use crate::{Cli, Command, EvolveArgs, NoiseArgs, TheoryMode};

/// Runs one subcommand. `Ok(false)` means some experiment state did not
/// complete.
pub fn run(cli: Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring thread pool")?;
    }
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = RngSeed(seed);
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    match cli.command {
        Command::SampleStates { n, count } => sample_states(&config, n, count),
        Command::PrepareBaseline { target, coupling } => prepare_baseline(&config, &target, coupling),
        Command::Evolve(args) => evolve_one(&config, args),
        Command::Evaluate { target, circuit, population, noise } => {
            evaluate(&config, &target, circuit.as_deref(), population.as_deref(), &noise)
        }
        Command::Theory { mode } => theory(&config, cli.out.as_deref(), mode),
        Command::Run => {
            let report = run_experiment(&config).context("running experiment")?;
            print!("{}", report.to_table());
            Ok(report.all_completed())
        }
        Command::Report { dir, bins } => report(dir.as_deref().unwrap_or(&config.output_dir), bins),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_target(path: &Path) -> Result<StateVector> {
    read(path)?.parse().with_context(|| format!("parsing target {}", path.display()))
}

fn coupling_for(config: &ExperimentConfig, arg: Option<String>, n: usize) -> Result<CouplingMap> {
    let spec = arg.or_else(|| config.coupling.clone()).unwrap_or_else(|| format!("line-{n}"));
    let map = CouplingMap::load(&spec).with_context(|| format!("coupling {spec:?}"))?;
    if map.n_qubits() != n {
        bail!("coupling {spec:?} has {} qubits, the target has {n}", map.n_qubits());
    }
    Ok(map)
}

fn noise_for(config: &ExperimentConfig, args: &NoiseArgs) -> Result<NoiseModel> {
    Ok(NoiseModel::new(args.p1.unwrap_or(config.noise.p1), args.p2.unwrap_or(config.noise.p2))?)
}

fn sample_states(config: &ExperimentConfig, n: Option<usize>, count: Option<usize>) -> Result<bool> {
    let n = n.unwrap_or(config.n_qubits);
    let count = count.unwrap_or(config.state_count);
    create_dir(&config.output_dir)?;
    for i in 0..count {
        let target = sample_haar_state(n, &mut config.seed.stream(Domain::Targets, i as u64))?;
        write(&config.output_dir.join(format!("state_{i:03}.txt")), &target.to_text())?;
    }
    let manifest = format!("{{\n  \"n_qubits\": {n},\n  \"count\": {count},\n  \"seed\": {}\n}}\n", config.seed.0);
    write(&config.output_dir.join("manifest.json"), &manifest)?;
    println!("wrote {count} {n}-qubit states to {}", config.output_dir.display());
    Ok(true)
}

fn prepare_baseline(config: &ExperimentConfig, target: &Path, coupling: Option<String>) -> Result<bool> {
    let target = read_target(target)?;
    let map = coupling_for(config, coupling, target.n_qubits())?;
    let circuit = exact_prepare(&target, &map)?.clean();
    create_dir(&config.output_dir)?;
    let path = config.output_dir.join("baseline.txt");
    write(&path, &circuit.to_text())?;
    println!(
        "{}: {} CX, cost {}, fidelity {:.12}",
        path.display(),
        circuit.cnot_count(),
        circuit.cost(),
        circuit_fidelity(&circuit, &target)?
    );
    Ok(true)
}

fn evolve_one(config: &ExperimentConfig, args: EvolveArgs) -> Result<bool> {
    let target = read_target(&args.target)?;
    let map = coupling_for(config, args.coupling, target.n_qubits())?;
    let noise = noise_for(config, &args.noise)?;
    let mut ga = config.ga.clone();
    ga.seed = config.seed;
    ga.population_size = args.population.unwrap_or(ga.population_size);
    ga.generations = args.generations.unwrap_or(ga.generations);
    ga.emc = args.emc.unwrap_or(ga.emc);
    ga.cmw = args.cmw.unwrap_or(ga.cmw);
    ga.esl = args.esl.unwrap_or(ga.esl);
    ga.elite_fraction = args.elite_fraction.unwrap_or(ga.elite_fraction);
    ga.max_circuit_len = args.max_len.or(ga.max_circuit_len);

    let mut seeds = Vec::new();
    if !args.no_baseline {
        seeds.push(exact_prepare(&target, &map)?.clean());
    }
    for path in &args.seed_circuits {
        let c: Circuit = read(path)?.parse().with_context(|| format!("parsing circuit {}", path.display()))?;
        seeds.push(c);
    }
    let (pop, logbook) = evolve(&target, &seeds, &ga, &map, &noise)?;
    let front = pareto_front(&pop)?;
    let out = &config.output_dir;
    create_dir(out)?;
    write(&out.join("final_population.jsonl"), &population_to_jsonl(&pop)?)?;
    write(&out.join("logbook.csv"), &logbook.to_csv())?;
    write(&out.join("front.jsonl"), &population_to_jsonl(&front)?)?;
    let csv = export_front_csv(&front, &target, &noise)?;
    write(&out.join("front.csv"), &csv)?;
    print!("{csv}");
    Ok(true)
}

fn evaluate(
    config: &ExperimentConfig,
    target: &Path,
    circuit: Option<&Path>,
    population: Option<&Path>,
    noise: &NoiseArgs,
) -> Result<bool> {
    let target = read_target(target)?;
    let noise = noise_for(config, noise)?;
    if let Some(path) = circuit {
        let c: Circuit = read(path)?.parse().with_context(|| format!("parsing circuit {}", path.display()))?;
        println!("cnot_count,cost,noiseless_f,noisy_f");
        println!(
            "{},{},{},{}",
            c.cnot_count(),
            c.cost(),
            circuit_fidelity(&c, &target)?,
            evaluate_noisy(&c, &target, &noise)?
        );
    } else if let Some(path) = population {
        let mut pop = read_population_jsonl(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        for ind in &mut pop {
            ind.evaluate(&target)?;
            ind.noisy_fidelity = None;
        }
        print!("{}", export_front_csv(&pop, &target, &noise)?);
    }
    Ok(true)
}

fn theory(config: &ExperimentConfig, out: Option<&Path>, mode: TheoryMode) -> Result<bool> {
    match mode {
        TheoryMode::Curves { n, p, lph, max_l, front } => {
            let table = match &front {
                Some(path) => theory_overlay(&read(path)?, n, p, &lph)?,
                None => theory_curves(n, p, &lph, max_l)?,
            };
            let mut summary = String::new();
            for &l_ph in &lph {
                let opt = optimal_length(&TheoryParams::new(n, p, l_ph)?);
                let _ = writeln!(summary, "l_ph = {l_ph}: l* = {}, F_max = {:.6}", opt.l_star, opt.f_max);
            }
            match out {
                Some(dir) => {
                    create_dir(dir)?;
                    write(&dir.join("theory.csv"), &table)?;
                    print!("{summary}");
                }
                None => {
                    print!("{table}");
                    eprint!("{summary}");
                }
            }
        }
        TheoryMode::Fit { front, n } => {
            let records = parse_population_jsonl(&read(&front)?)?;
            let n = match (n, records.first()) {
                (Some(n), _) => n,
                (None, Some(r)) => r.circuit.parse::<Circuit>()?.n_qubits(),
                (None, None) => config.n_qubits,
            };
            let points: Vec<(f64, f64)> = records.iter().map(|r| (r.cnot_count as f64, r.fidelity)).collect();
            println!("l_ph = {}", fit_lph(&points, n)?);
        }
    }
    Ok(true)
}

fn report(dir: &Path, bins: usize) -> Result<bool> {
    let path: PathBuf = dir.join("report.json");
    let report = ComparisonReport::from_json(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
    print!("{}", report.to_table());
    let rows: Vec<_> = report.states.iter().filter_map(|s| s.result.as_ref()).collect();
    if !rows.is_empty() {
        let mut csv = String::from("quantity,bin_lo,bin_hi,count\n");
        for (name, values) in [
            ("abs_delta", rows.iter().map(|r| r.abs_delta).collect::<Vec<_>>()),
            ("rel_delta", rows.iter().map(|r| r.rel_delta).collect()),
            ("baseline_noisy", rows.iter().map(|r| r.baseline_noisy).collect()),
            ("ga_best_noisy", rows.iter().map(|r| r.ga_best_noisy).collect()),
        ] {
            let h = histogram(&values, bins)?;
            for (k, count) in h.counts.iter().enumerate() {
                let _ = writeln!(csv, "{name},{},{},{count}", h.edges[k], h.edges[k + 1]);
            }
            let (mean, sigma) = gaussian_fit(&values)?;
            println!("{name}: gaussian fit mean {mean:.6}, sigma {sigma:.6}");
        }
        write(&dir.join("histograms.csv"), &csv)?;
    }
    Ok(report.all_completed())
}
