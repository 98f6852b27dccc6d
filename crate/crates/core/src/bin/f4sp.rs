use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use f4sp::bench::{self, Engine, Instance, MicroKind, PipelineConfig, System};
use f4sp::bulk::Exec;
use f4sp::fbsp::{self, Closure, CompileOptions};
use f4sp::groebner::{self, F4Config, Numeric};
use f4sp::sparse_linalg::{self, KernelEngine};
use f4sp::{Error, Result, TermOrder};

#[derive(Parser)]
#[command(name = "f4sp", version, about = "Groebner bases over prime fields via compiled symbolic preprocessing")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a benchmark system file.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the reduced Groebner basis of a system file.
    Gb {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a generated family or a system file and report stage statistics.
    Bench {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Time one isolated kernel.
    Microbench {
        #[arg(long, default_value = "dict_build")]
        kind: String,
        #[arg(long, default_value_t = 100_000)]
        size: usize,
        #[arg(long, default_value_t = 0.5)]
        duplicate_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Check the invariant suites on a system file.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[arg(long, default_value = "cyclic")]
    family: String,
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Number of polynomials (random family).
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 101)]
    p: u64,
    #[arg(long, default_value = "grevlex")]
    order: String,
    #[arg(long = "gen-seed", default_value_t = 0)]
    gen_seed: u64,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value = "f4")]
    engine: String,
    #[arg(long, default_value = "psge")]
    numeric: String,
    #[arg(long, default_value = "barrett")]
    backend: String,
    #[arg(long, default_value_t = sparse_linalg::DEFAULT_PANEL_WIDTH)]
    panel_width: usize,
    #[arg(long, default_value_t = sparse_linalg::DEFAULT_BLOCK_WIDTH)]
    block_width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = groebner::DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Text report; the flat key=value variant goes to `<path>.kv`.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    basis_out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            engine: self.engine.parse()?,
            numeric: self.numeric.parse()?,
            backend: self.backend.parse()?,
            panel_width: self.panel_width,
            block_width: self.block_width,
            seed: self.seed,
            workers: self.workers,
            max_steps: self.max_steps,
        })
    }
}

fn order(s: &str) -> Result<TermOrder> {
    s.parse().map_err(|_| Error::Precondition(format!("unknown order `{s}`")))
}

fn generate(f: &FamilyArgs) -> Result<(System, Instance)> {
    let ord = order(&f.order)?;
    let (sys, params) = match f.family.as_str() {
        "cyclic" => (bench::gen_cyclic(f.n, f.p, ord)?, format!("n={}", f.n)),
        "katsura" => (bench::gen_katsura(f.n, f.p, ord)?, format!("n={}", f.n)),
        "random" => (
            bench::gen_random_quadratic(f.n, f.m, f.density, f.gen_seed, f.p, ord)?,
            format!("n={},m={},density={}", f.n, f.m, f.density),
        ),
        other => return Err(Error::Precondition(format!("unknown family `{other}`"))),
    };
    let inst = Instance {
        family: f.family.clone(),
        params,
        p: f.p,
        order: ord,
        seed: f.gen_seed,
    };
    Ok((sys, inst))
}

fn load(path: &PathBuf, backend: &str) -> Result<(System, Instance)> {
    let text = fs::read_to_string(path)?;
    let sys = bench::parse_system(&text, backend.parse()?)?;
    let inst = Instance {
        family: "file".into(),
        params: path.display().to_string(),
        p: sys.ring.p(),
        order: sys.ring.order(),
        seed: 0,
    };
    Ok((sys, inst))
}

fn run(sys: &System, inst: Instance, args: &RunArgs, print_report: bool) -> Result<()> {
    let out = bench::run_pipeline(sys, inst, &args.config()?)?;
    match &args.basis_out {
        Some(p) => fs::write(p, &out.basis_file)?,
        None if !print_report => print!("{}", out.basis_file),
        None => {}
    }
    if let Some(p) = &args.report {
        fs::write(p, out.report.to_text())?;
        let mut kv = p.clone().into_os_string();
        kv.push(".kv");
        fs::write(kv, out.report.to_flat())?;
    }
    if print_report {
        print!("{}", out.report.to_text());
    }
    Ok(())
}

fn check(label: &str, ok: bool, failures: &mut usize) {
    println!("{} {label}", if ok { "PASS" } else { "FAIL" });
    *failures += !ok as usize;
}

fn verify(sys: &System, args: &RunArgs) -> Result<()> {
    let ring = &sys.ring;
    let mut failures = 0;
    let cfg = F4Config {
        panel_width: args.panel_width,
        block_width: args.block_width,
        seed: args.seed,
        max_steps: args.max_steps,
        numeric: args.numeric.parse::<Numeric>()?,
        keep_traces: true,
        ..Default::default()
    };
    let run = groebner::f4_run(&sys.polys, ring, &cfg)?;
    let reference = groebner::buchberger_reference(&sys.polys, ring, args.max_steps)?;
    check("f4 equals reference", groebner::same_basis(&run.basis, &reference, ring), &mut failures);
    check("buchberger criterion", groebner::is_groebner(&run.basis, ring)?.ok, &mut failures);

    let mut digests = Vec::new();
    for w in [1, 2, 4, 8] {
        let c = F4Config {
            exec: Exec::with_lanes(w),
            keep_traces: false,
            ..cfg.clone()
        };
        digests.push(groebner::format_basis(&groebner::f4_run(&sys.polys, ring, &c)?.basis, ring));
    }
    check("basis identical for 1/2/4/8 workers", digests.windows(2).all(|w| w[0] == w[1]), &mut failures);

    let (mut same, mut partition, mut syz) = (true, true, true);
    for (i, t) in run.state.traces.iter().enumerate() {
        partition &= t.plan.check_invariants(ring.p()).is_ok();
        for w in [1, 2, 4, 8] {
            let opts = CompileOptions {
                exec: Exec::with_lanes(w).jittered(i as u64),
                shuffle_seed: Some(w as u64),
                reducers: Some(t.reducers.clone()),
                ..Default::default()
            };
            let again = fbsp::compile_batch(&t.rows, &run.state.basis, ring, Closure::OneStepReduction, &opts)?;
            same &= again.plan == t.plan;
        }
        let a = sparse_linalg::csr_from_plan(&t.plan, ring.modulus())?;
        let k = sparse_linalg::left_kernel(&a, a.n_rows().max(1), args.seed, KernelEngine::Auto)?;
        syz &= groebner::verify_kernel_syzygy(&t.plan, &run.state.basis, &k, ring)?.ok();
    }
    check("plans identical across workers and orders", same, &mut failures);
    check("row segments partition [0, M)", partition, &mut failures);
    check("left kernel vectors are syzygies", syz, &mut failures);
    if failures > 0 {
        return Err(Error::PropertyViolation(format!("{failures} check(s) failed")));
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen { family, out } => {
            let (sys, _) = generate(&family)?;
            match out {
                Some(p) => fs::write(p, sys.to_text())?,
                None => print!("{}", sys.to_text()),
            }
            Ok(())
        }
        Cmd::Gb { input, run: args } => {
            let (sys, inst) = load(&input, &args.backend)?;
            run(&sys, inst, &args, false)
        }
        Cmd::Bench {
            input,
            family,
            run: args,
        } => {
            let (sys, inst) = match input {
                Some(p) => load(&p, &args.backend)?,
                None => generate(&family)?,
            };
            run(&sys, inst, &args, true)
        }
        Cmd::Microbench {
            kind,
            size,
            duplicate_rate,
            seed,
            workers,
        } => {
            let kind: MicroKind = kind.parse()?;
            let reports = bench::microbench(kind, size, duplicate_rate, seed, &Exec::with_lanes(workers))?;
            for r in &reports {
                print!("{}", r.to_flat());
                if !r.validated {
                    return Err(Error::PropertyViolation(format!("{} output failed its oracle", r.kind)));
                }
            }
            Ok(())
        }
        Cmd::Verify { input, run: args } => {
            let (sys, _) = load(&input, &args.backend)?;
            if args.engine.parse::<Engine>()? != Engine::F4 {
                return Err(Error::Precondition("verify runs the f4 engine".into()));
            }
            verify(&sys, &args)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(bench::exit_code(&e) as u8)
        }
    }
}
