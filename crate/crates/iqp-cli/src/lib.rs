//! Command dispatch for the `iqp` binary.
//!
//! Every command is deterministic given its flags: sampling commands take an
//! explicit `--seed`, and the `--threads` flag changes wall time but never
//! output (samples are drawn in fixed-size blocks with one derived RNG stream
//! per block, so block-to-worker assignment is invisible).
//!
//! Exit codes: `verify` encodes its verdict (0 accept, 1 reject,
//! 2 inconclusive); everything else exits 0 on success and 3 on any error,
//! including usage errors.

pub mod format;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use iqp::attack::{y_bias_exact, y_sample_block};
use iqp::codes::LinearCode;
use iqp::eigest::{
    cf_recover, decode, dlog_demo, error_budget, make_schedule, sample_bits_traced, DlogError,
    PermutationOracle, DEFAULT_ETA,
};
use iqp::f2la::{BitMatrix, BitVec};
use iqp::protocol::{self, gen_challenge, verify, Verdict};
use iqp::stab::{cnot_eval, dqc1_bias, dqc1_build, line_adjacency};
use iqp::xprog::SAMPLE_BLOCK;

#[derive(Debug, Parser)]
#[command(name = "iqp", version, about = "Challenge generation, proving, spoofing, and verification for X-program hypothesis tests", long_about = None)]
pub struct Cli {
    /// Worker threads for sample generation (never changes output).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a challenge/secret file pair from a quadratic-residue code.
    Gen {
        /// Code length; a prime with q ≡ ±1 (mod 8).
        #[arg(long)]
        q: u64,
        /// Random non-causal rows appended to the causal ones.
        #[arg(long)]
        extra: usize,
        /// RNG seed (hex, optional 0x prefix).
        #[arg(long, value_parser = parse_seed)]
        seed: u64,
        /// Output prefix; writes <out>.challenge and <out>.secret.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a challenge honestly (needs cols ≤ 26 for direct simulation).
    Prove {
        /// Challenge file to sample.
        #[arg(long)]
        challenge: PathBuf,
        /// Number of samples.
        #[arg(long)]
        n: usize,
        /// RNG seed (hex, optional 0x prefix).
        #[arg(long, value_parser = parse_seed)]
        seed: u64,
        /// Output sample file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Spoof a challenge with the classical second-derivative strategy.
    Attack {
        /// Challenge file to spoof.
        #[arg(long)]
        challenge: PathBuf,
        /// Number of samples.
        #[arg(long)]
        n: usize,
        /// RNG seed (hex, optional 0x prefix).
        #[arg(long, value_parser = parse_seed)]
        seed: u64,
        /// Output sample file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Test a sample file against a secret; exit code encodes the verdict.
    Verify {
        /// Challenge file the samples answer.
        #[arg(long)]
        challenge: PathBuf,
        /// Secret file produced alongside the challenge.
        #[arg(long)]
        secret: PathBuf,
        /// Sample file to judge.
        #[arg(long)]
        samples: PathBuf,
        /// Acceptance threshold on the orthogonal fraction.
        #[arg(long, default_value_t = protocol::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Fewest post-filter samples for a conclusive verdict.
        #[arg(long, default_value_t = protocol::DEFAULT_MIN_SAMPLES)]
        min_samples: usize,
    },
    /// Estimate the eigenphase of a random permutation without controlled ops.
    EigestDemo {
        /// Bits in the permutation domain (1..=20).
        #[arg(long)]
        n: usize,
        /// RNG seed (hex, optional 0x prefix).
        #[arg(long, value_parser = parse_seed)]
        seed: u64,
    },
    /// Recover a discrete logarithm in F₂ⁿ via two phase estimations.
    DlogDemo {
        /// Field bit-width (1..=16).
        #[arg(long)]
        n: u32,
        /// Generator of the unit group.
        #[arg(long)]
        g: u64,
        /// Target element; reports s with g^s = h.
        #[arg(long)]
        h: u64,
        /// RNG seed (hex, optional 0x prefix).
        #[arg(long, value_parser = parse_seed)]
        seed: u64,
    },
    /// Evaluate a CNOT circuit through the one-clean-qubit bias.
    Dqc1Demo {
        /// Circuit file: one `cnot <control> <target>` per line.
        #[arg(long)]
        circuit: PathBuf,
        /// Input bit string on the register wires.
        #[arg(long)]
        x: String,
    },
    /// Scan a line-graph clock for state reversal and full period.
    ClockCheck {
        /// Number of cells (1..=1024).
        #[arg(long)]
        cells: usize,
    },
    /// Report rank and both test rates for a quadratic-residue challenge.
    CodeInfo {
        /// Code length; a prime with q ≡ ±1 (mod 8).
        #[arg(long)]
        q: u64,
    },
}

fn parse_seed(text: &str) -> Result<u64, String> {
    let digits = text.strip_prefix("0x").unwrap_or(text);
    u64::from_str_radix(digits, 16).map_err(|e| format!("seed must be a hex u64: {e}"))
}

/// Prints one stdout line, going permanently quiet if the consumer closed
/// the pipe — the command still finishes and keeps its real exit code.
fn emit(args: std::fmt::Arguments<'_>) {
    use std::io::Write;
    static CLOSED: AtomicBool = AtomicBool::new(false);
    if CLOSED.load(Ordering::Relaxed) {
        return;
    }
    let mut stdout = std::io::stdout().lock();
    let written = stdout.write_fmt(args).and_then(|()| stdout.write_all(b"\n"));
    if written.is_err() {
        CLOSED.store(true, Ordering::Relaxed);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { crate::emit(core::format_args!($($arg)*)) };
}

/// Runs one parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Gen { q, extra, seed, out } => cmd_gen(*q, *extra, *seed, out),
        Command::Prove {
            challenge,
            n,
            seed,
            out,
        } => cmd_prove(challenge, *n, *seed, out, cli.threads),
        Command::Attack {
            challenge,
            n,
            seed,
            out,
        } => cmd_attack(challenge, *n, *seed, out, cli.threads),
        Command::Verify {
            challenge,
            secret,
            samples,
            threshold,
            min_samples,
        } => cmd_verify(challenge, secret, samples, *threshold, *min_samples),
        Command::EigestDemo { n, seed } => cmd_eigest_demo(*n, *seed),
        Command::DlogDemo { n, g, h, seed } => cmd_dlog_demo(*n, *g, *h, *seed),
        Command::Dqc1Demo { circuit, x } => cmd_dqc1_demo(circuit, x),
        Command::ClockCheck { cells } => cmd_clock_check(*cells),
        Command::CodeInfo { q } => cmd_code_info(*q),
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_os_string();
    os.push(suffix);
    PathBuf::from(os)
}

/// Drains `count` samples in [`SAMPLE_BLOCK`]-sized blocks, fanning blocks
/// out over `threads` workers round-robin and reassembling in block order,
/// so the output never depends on the thread count.
fn collect_blocks<F>(count: usize, threads: usize, draw: F) -> Vec<BitVec>
where
    F: Fn(u64, usize) -> Vec<BitVec> + Sync,
{
    let blocks = count.div_ceil(SAMPLE_BLOCK);
    let threads = threads.clamp(1, blocks.max(1));
    let block_len = |b: usize| SAMPLE_BLOCK.min(count - b * SAMPLE_BLOCK);
    if threads == 1 {
        return (0..blocks).flat_map(|b| draw(b as u64, block_len(b))).collect();
    }
    let mut per_worker: Vec<Vec<Vec<BitVec>>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let draw = &draw;
                scope.spawn(move || {
                    (w..blocks)
                        .step_by(threads)
                        .map(|b| draw(b as u64, block_len(b)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        per_worker = handles.into_iter().map(|h| h.join().unwrap()).collect();
    });
    let mut worker_blocks: Vec<_> = per_worker.into_iter().map(Vec::into_iter).collect();
    let mut out = Vec::with_capacity(count);
    for b in 0..blocks {
        out.extend(worker_blocks[b % threads].next().unwrap());
    }
    out
}

fn cmd_gen(q: u64, extra: usize, seed: u64, out: &Path) -> Result<i32> {
    let (challenge, secret) = gen_challenge(q, extra, seed)?;
    let challenge_path = with_suffix(out, ".challenge");
    let secret_path = with_suffix(out, ".secret");
    write_file(&challenge_path, &format::serialize_challenge(&challenge))?;
    write_file(&secret_path, &format::serialize_secret(&secret))?;
    let m = challenge.public_matrix();
    outln!(
        "wrote {} ({} rows, {} cols, q={q})",
        challenge_path.display(),
        m.rows(),
        m.cols()
    );
    outln!("wrote {}", secret_path.display());
    Ok(0)
}

fn cmd_prove(challenge: &Path, count: usize, seed: u64, out: &Path, threads: usize) -> Result<i32> {
    let challenge = format::parse_challenge(&read_file(challenge)?)?;
    let dist = challenge.program().distribution()?;
    let sampler = dist.sampler();
    let samples = collect_blocks(count, threads, |block, len| sampler.block(seed, block, len));
    write_file(out, &format::serialize_samples(&samples))?;
    outln!("wrote {} ({count} samples)", out.display());
    Ok(0)
}

fn cmd_attack(challenge: &Path, count: usize, seed: u64, out: &Path, threads: usize) -> Result<i32> {
    let challenge = format::parse_challenge(&read_file(challenge)?)?;
    let program = challenge.program();
    let samples = collect_blocks(count, threads, |block, len| {
        y_sample_block(&program, seed, block, len)
    });
    write_file(out, &format::serialize_samples(&samples))?;
    outln!("wrote {} ({count} samples)", out.display());
    Ok(0)
}

fn cmd_verify(
    challenge: &Path,
    secret: &Path,
    samples: &Path,
    threshold: f64,
    min_samples: usize,
) -> Result<i32> {
    let challenge = format::parse_challenge(&read_file(challenge)?)?;
    let secret = format::parse_secret(&read_file(secret)?)?;
    let samples = format::parse_samples(&read_file(samples)?)?;
    let n = challenge.public_matrix().cols();
    if secret.s().len() != n {
        bail!(
            "secret length {} does not match challenge cols {n}",
            secret.s().len()
        );
    }
    if secret.q() != challenge.q() {
        bail!(
            "secret q={} does not match challenge q={}",
            secret.q(),
            challenge.q()
        );
    }
    if let Some(bad) = samples.iter().find(|v| v.len() != n) {
        bail!("sample width {} does not match challenge cols {n}", bad.len());
    }
    let t = verify(&samples, &secret, threshold, min_samples);
    outln!("{}", t.verdict.to_string().to_uppercase());
    outln!("total samples      {}", t.total_samples);
    outln!("zero dropped       {}", t.zero_dropped);
    outln!("duplicates dropped {}", t.duplicates_dropped);
    outln!("tested             {}", t.samples.len());
    outln!("orthogonal         {}", t.orthogonal);
    outln!("fraction           {:.6}", t.fraction);
    outln!("threshold          {:.6}", t.threshold);
    outln!("min samples        {}", t.min_samples);
    outln!("p quantum          {:.3e}", t.p_quantum);
    outln!("p classical        {:.3e}", t.p_classical);
    Ok(match t.verdict {
        Verdict::Accept => 0,
        Verdict::Reject => 1,
        Verdict::Inconclusive => 2,
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn reduced(num: u64, den: u64) -> (u64, u64) {
    if num == 0 {
        (0, 1)
    } else {
        let g = gcd(num, den);
        (num / g, den / g)
    }
}

fn cmd_eigest_demo(n: usize, seed: u64) -> Result<i32> {
    if !(1..=20).contains(&n) {
        bail!("--n must lie in 1..=20, got {n}");
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut table: Vec<u32> = (0..1u64 << n).map(|i| i as u32).collect();
    table.shuffle(&mut rng);
    let oracle = PermutationOracle::table(table)?;
    let schedule = make_schedule(n, 0.05);
    let (wrong_way, missed_zoom) = error_budget(&schedule, DEFAULT_ETA);
    let (samples, trace) = sample_bits_traced(&oracle, &schedule, seed);
    let bits = decode(&samples, schedule.t(), schedule.d(), DEFAULT_ETA);
    let estimate = cf_recover(&bits, 1u64 << n);
    let folded = trace.kappa.min(trace.q - trace.kappa);
    let target = reduced(folded, trace.q);
    outln!(
        "schedule t={} d={} k={}",
        schedule.t(),
        schedule.d(),
        schedule.k()
    );
    outln!("error budget decisive={wrong_way:.3e} zoom={missed_zoom:.3e}");
    outln!(
        "orbit start={} length={} kappa={}",
        trace.start, trace.q, trace.kappa
    );
    outln!("bits {}", format::bits_to_string(&bits));
    outln!(
        "RESULT recovered={} estimate={}/{} target={}/{}",
        estimate == target,
        estimate.0,
        estimate.1,
        target.0,
        target.1
    );
    Ok(0)
}

fn cmd_dlog_demo(n: u32, g: u64, h: u64, seed: u64) -> Result<i32> {
    outln!("field gf(2^{n})");
    outln!("base g={g} target h={h}");
    match dlog_demo(n, g, h, seed) {
        Ok(report) => {
            outln!(
                "RESULT recovered=true s={} attempts={} gate_ops={}",
                report.s, report.attempts, report.gate_ops
            );
            Ok(0)
        }
        Err(DlogError::Exhausted { attempts }) => {
            outln!("RESULT recovered=false attempts={attempts}");
            Ok(0)
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_cnot_circuit(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("cnot"), Some(c), Some(t), None) => {
                let c = c
                    .parse()
                    .with_context(|| format!("line {}: bad control wire", idx + 1))?;
                let t = t
                    .parse()
                    .with_context(|| format!("line {}: bad target wire", idx + 1))?;
                gates.push((c, t));
            }
            _ => bail!("line {}: expected `cnot <control> <target>`", idx + 1),
        }
    }
    Ok(gates)
}

fn cmd_dqc1_demo(circuit: &Path, x: &str) -> Result<i32> {
    let gates = parse_cnot_circuit(&read_file(circuit)?)?;
    let x = format::parse_bits(x)?;
    let w_circuit = dqc1_build(&gates, &x)?;
    let bias = dqc1_bias(&w_circuit);
    let s2 = u8::from(cnot_eval(&gates, &x).get(0));
    outln!("register width {}", x.len());
    outln!("gates {}", gates.len());
    outln!("input {}", format::bits_to_string(&x));
    outln!("RESULT bias={bias} s2={s2}");
    Ok(0)
}

fn xor_mats(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    let mut out = a.clone();
    for r in 0..a.rows() {
        let mut row = out.row_vec(r);
        row.xor_assign(&b.row_vec(r));
        out.set_row(r, &row);
    }
    out
}

fn is_antidiagonal(m: &BitMatrix) -> bool {
    let n = m.rows();
    (0..n).all(|r| (0..n).all(|c| m.get(r, c) == (r + c == n - 1)))
}

fn cmd_clock_check(cells: usize) -> Result<i32> {
    if !(1..=1024).contains(&cells) {
        bail!("--cells must lie in 1..=1024, got {cells}");
    }
    let adjacency = line_adjacency(cells);
    // The clock generator is [[0, I], [I, A]]; its k-th power is
    // [[S_{k-2}, S_{k-1}], [S_{k-1}, S_k]] with S_k = A·S_{k-1} + S_{k-2},
    // so one block recurrence scans all powers. Identity means S_{k-1} = 0
    // and S_k = I; state reversal means S_{k-1} = 0 and S_k antidiagonal.
    let mut prev = BitMatrix::identity(cells);
    let mut cur = adjacency.clone();
    let mut reversal_at = None;
    let mut period = None;
    for k in 1..=2 * cells + 2 {
        if prev.is_zero() {
            if reversal_at.is_none() && is_antidiagonal(&cur) {
                reversal_at = Some(k);
            }
            if period.is_none() && cur.is_identity() {
                period = Some(k);
            }
        }
        let next = xor_mats(&adjacency.mul(&cur), &prev);
        prev = cur;
        cur = next;
    }
    outln!("cells {cells}");
    match reversal_at {
        Some(k) => outln!("reversal at step {k} (mirror step is {})", cells + 1),
        None => outln!("reversal none (mirror step is {})", cells + 1),
    }
    match period {
        Some(k) => outln!("identity at step {k}"),
        None => outln!("identity none within {} steps", 2 * cells + 2),
    }
    let reversal = reversal_at == Some(cells + 1);
    match period {
        Some(k) => outln!("RESULT reversal={reversal} period={k}"),
        None => outln!("RESULT reversal={reversal} period=none"),
    }
    Ok(0)
}

fn cmd_code_info(q: u64) -> Result<i32> {
    let code = LinearCode::quadratic_residue(q)?;
    let (challenge, secret) = gen_challenge(q, 0, 0)?;
    let program = challenge.program();
    let classical = y_bias_exact(&program, secret.s());
    let bias = match program.bias(secret.s()) {
        Ok(b) => b,
        Err(e) => {
            outln!("note bias from closed form ({e})");
            protocol::QUANTUM_RATE
        }
    };
    outln!("q {q}");
    outln!("code length {}", code.len());
    outln!("code rank {}", code.rank());
    outln!("challenge cols {}", challenge.public_matrix().cols());
    outln!("RESULT rank={} bias={bias:.6} classical={classical:.6}", code.rank());
    Ok(0)
}
