use std::io::Write;

use disctree::metrics::{self, uniform_instance};
use disctree::{
    error_report, evaluate_direct, ChargeSystem, DiscKernel, EvalConfig, FieldResult, ImageSpec,
    Tree,
};
use serde::Serialize;

use crate::error::{Classify, CliError, CliResult};
use crate::io::{self, Cell, Table};
use crate::{
    AccuracyArgs, BenchArgs, Common, DepthScanArgs, EvaluateArgs, Format, Generator, Images,
    MethodArg, Source,
};

struct Setup {
    kernel: DiscKernel,
    config: EvalConfig,
}

fn setup(common: &Common) -> CliResult<Setup> {
    common.install_threads()?;
    let kernel = DiscKernel::new(common.rd).usage()?;
    let config = EvalConfig {
        p: common.p,
        theta: common.theta,
        leaf_capacity: common.leaf_capacity,
        adaptive: common.adaptive,
        tolerance: common.tol,
        ..Default::default()
    };
    config.validate().usage()?;
    Ok(Setup { kernel, config })
}

fn load(source: &Source, generator: &Generator, seed: u64) -> CliResult<Option<ChargeSystem>> {
    if let Some(path) = &source.particles {
        return io::read_particles(path).map(Some);
    }
    if let Some(path) = &source.density {
        let spec = io::read_density(path)?;
        return ChargeSystem::from_density(&spec)
            .map(Some)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())));
    }
    if let Some(n) = source.n {
        if !(generator.lo < generator.hi) || !generator.lo.is_finite() || !generator.hi.is_finite()
        {
            return Err(CliError::Usage("--lo must be below --hi".into()));
        }
        return Ok(Some(uniform_instance(n, generator.lo, generator.hi, seed)));
    }
    Ok(None)
}

fn run_method(
    method: MethodArg,
    s: &Setup,
    system: &ChargeSystem,
    targets: &[f64],
) -> CliResult<(FieldResult, usize)> {
    match method {
        MethodArg::Tree => {
            let tree = Tree::build(system, &s.config).internal()?;
            let field = tree
                .evaluate_all(&s.kernel, &s.config, system, targets)
                .data()?;
            Ok((field, tree.depth()))
        }
        MethodArg::Direct => Ok((evaluate_direct(system, &s.kernel, targets).data()?, 0)),
    }
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    targets: usize,
    method: disctree::Method,
    rd: f64,
    p: usize,
    theta: f64,
    leaf_capacity: usize,
    adaptive: bool,
    depth: usize,
    build_time: f64,
    eval_time: f64,
}

pub fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    let s = setup(&args.common)?;
    let mut system = load(&args.source, &args.generator, args.common.seed)?.ok_or_else(|| {
        CliError::Usage("one of --particles, --density or --n is required".into())
    })?;
    if let Some(which) = args.images {
        let spec = ImageSpec {
            gap_length: args.gap.expect("clap enforces --gap"),
            lower_electrode: args.electrode,
            reflect_lower: which != Images::Upper,
            reflect_upper: which != Images::Lower,
        };
        system = system.with_images(&spec).usage()?;
    }
    let targets = match &args.targets {
        Some(path) => io::read_targets(path)?,
        None => system.positions().to_vec(),
    };
    let (field, depth) = run_method(args.method, &s, &system, &targets)?;
    let summary = Summary {
        n: system.len(),
        targets: targets.len(),
        method: field.method,
        rd: s.kernel.radius(),
        p: s.config.p,
        theta: s.config.theta,
        leaf_capacity: s.config.leaf_capacity,
        adaptive: s.config.adaptive,
        depth,
        build_time: field.build_time,
        eval_time: field.eval_time,
    };
    let mut out = io::sink(args.common.out.as_deref())?;
    match args.common.format {
        Format::Csv => {
            io::write_field_csv(&mut out, &targets, &field.values).internal()?;
            let text = serde_json::to_string_pretty(&summary).internal()?;
            match &args.summary {
                Some(path) => std::fs::write(path, text + "\n")
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
                None => eprintln!("{text}"),
            }
        }
        Format::Json => io::write_field_json(&mut out, &summary, &targets, &field.values)?,
    }
    out.flush().internal()
}

fn emit(common: &Common, table: &Table) -> CliResult<()> {
    let mut out = io::sink(common.out.as_deref())?;
    match common.format {
        Format::Csv => table.write_csv(&mut out).internal()?,
        Format::Json => table.write_json(&mut out)?,
    }
    out.flush().internal()
}

fn error_row(s: &Setup, system: &ChargeSystem, seed: u64) -> CliResult<Vec<Cell>> {
    let targets = system.positions().to_vec();
    let (fast, depth) = run_method(MethodArg::Tree, s, system, &targets)?;
    let (slow, _) = run_method(MethodArg::Direct, s, system, &targets)?;
    let r = error_report(&fast.values, &slow.values).data()?;
    Ok(vec![
        Cell::Int(system.len() as u64),
        Cell::Int(s.config.p as u64),
        Cell::Int(seed),
        Cell::Int(depth as u64),
        Cell::Num(r.max_relative),
        Cell::Num(r.avg_relative),
        Cell::Int(r.excluded_targets as u64),
        Cell::Num(fast.build_time + fast.eval_time),
        Cell::Num(slow.eval_time),
    ])
}

const ERROR_HEADER: [&str; 9] = [
    "n",
    "p",
    "seed",
    "depth",
    "max_relative",
    "avg_relative",
    "excluded_targets",
    "tree_seconds",
    "direct_seconds",
];

pub fn accuracy(args: AccuracyArgs) -> CliResult<()> {
    let seed = args.common.seed;
    if args.table1 {
        let common = Common {
            p: 20,
            rd: 0.1,
            ..args.common.clone()
        };
        let s = setup(&common)?;
        let system = uniform_instance(10_000, -0.5, 0.5, seed);
        let paper = ["9.43e-5", "1.17e-6", "6.40e-8", "6.48e-10"];
        let rows =
            metrics::truncation_sweep(&system, &s.kernel, 0.0, 1.0, &[5, 10, 15, 20]).data()?;
        let table = Table {
            header: vec!["p", "relative_error", "paper"],
            rows: rows
                .iter()
                .zip(paper)
                .map(|(r, p)| {
                    vec![
                        Cell::Int(r.p as u64),
                        Cell::Num(r.relative_error),
                        Cell::Text(p.into()),
                    ]
                })
                .collect(),
        };
        return emit(&common, &table);
    }
    if args.table4 {
        let common = Common {
            p: 10,
            leaf_capacity: 40,
            rd: 0.1,
            ..args.common.clone()
        };
        let s = setup(&common)?;
        let rows = [10_000, 200_000]
            .into_iter()
            .map(|n| error_row(&s, &uniform_instance(n, 0.0, 1.0, seed), seed))
            .collect::<CliResult<Vec<_>>>()?;
        return emit(
            &common,
            &Table {
                header: ERROR_HEADER.to_vec(),
                rows,
            },
        );
    }
    let s = setup(&args.common)?;
    let system = load(&args.source, &args.generator, seed)?.ok_or_else(|| {
        CliError::Usage(
            "one of --particles, --density, --n, --table1 or --table4 is required".into(),
        )
    })?;
    let row = error_row(&s, &system, seed)?;
    emit(
        &args.common,
        &Table {
            header: ERROR_HEADER.to_vec(),
            rows: vec![row],
        },
    )
}

fn stats(t: &disctree::TimeStats) -> [Cell; 3] {
    [Cell::Num(t.average), Cell::Num(t.min), Cell::Num(t.max)]
}

pub fn bench(args: BenchArgs) -> CliResult<()> {
    let s = setup(&args.common)?;
    let (sizes, repeats, direct) = if args.table3 {
        (vec![10_000, 50_000, 100_000, 200_000], 3, true)
    } else {
        (args.sizes.clone(), args.repeats, !args.no_direct)
    };
    let records = metrics::bench(
        &sizes,
        repeats,
        &s.kernel,
        &s.config,
        args.common.seed,
        direct,
    )
    .usage()?;
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![
                Cell::Int(r.n as u64),
                Cell::Int(r.repeats as u64),
                Cell::Int(r.depth as u64),
                Cell::Num(r.mean_leaf_occupancy),
            ];
            row.extend(stats(&r.tree));
            row.push(Cell::Num(r.tree_build.average));
            row.push(Cell::Num(r.tree_eval.average));
            match &r.direct {
                Some(d) => row.extend(stats(d)),
                None => row.extend((0..3).map(|_| Cell::Text(String::new()))),
            }
            row
        })
        .collect();
    let header = vec![
        "n",
        "repeats",
        "depth",
        "mean_leaf_occupancy",
        "tree_avg_ms",
        "tree_min_ms",
        "tree_max_ms",
        "tree_build_avg_ms",
        "tree_eval_avg_ms",
        "direct_avg_ms",
        "direct_min_ms",
        "direct_max_ms",
    ];
    emit(&args.common, &Table { header, rows })
}

pub fn depth_scan(args: DepthScanArgs) -> CliResult<()> {
    let common = if args.table2 {
        Common {
            p: 10,
            ..args.common.clone()
        }
    } else {
        args.common.clone()
    };
    let s = setup(&common)?;
    let (n, depths, repeats) = if args.table2 {
        (200_000, (8..=15).collect(), 3)
    } else {
        (args.n, args.depths.clone(), args.repeats)
    };
    let records =
        metrics::depth_scan(n, &depths, repeats, &s.kernel, &s.config, common.seed).usage()?;
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![
                Cell::Int(r.n as u64),
                Cell::Int(r.max_depth as u64),
                Cell::Int(r.depth as u64),
                Cell::Num(r.mean_leaf_occupancy),
            ];
            row.extend(stats(&r.tree));
            row.push(Cell::Num(r.tree_build.average));
            row.push(Cell::Num(r.tree_eval.average));
            row
        })
        .collect();
    let header = vec![
        "n",
        "max_depth",
        "depth",
        "mean_leaf_occupancy",
        "tree_avg_ms",
        "tree_min_ms",
        "tree_max_ms",
        "tree_build_avg_ms",
        "tree_eval_avg_ms",
    ];
    emit(&common, &Table { header, rows })
}
