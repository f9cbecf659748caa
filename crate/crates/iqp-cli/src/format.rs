//! Bit-exact text formats for challenges, secrets, and sample sets.
//!
//! All three formats are ASCII, newline-terminated, and free of trailing
//! whitespace, so published artifacts stay diffable and endian-free. Parsers
//! are strict: anything a serializer would not emit is rejected.

use anyhow::{anyhow, bail, Context, Result};
use iqp::f2la::{BitMatrix, BitVec};
use iqp::protocol::{Challenge, Secret};

/// The only angle the challenge format carries.
pub const THETA_TOKEN: &str = "pi/8";

pub fn bits_to_string(v: &BitVec) -> String {
    (0..v.len()).map(|i| if v.get(i) { '1' } else { '0' }).collect()
}

pub fn parse_bits(text: &str) -> Result<BitVec> {
    let mut v = BitVec::zeros(text.len());
    for (i, ch) in text.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => v.set(i, true),
            _ => bail!("invalid bit character {ch:?}"),
        }
    }
    Ok(v)
}

/// Splits a newline-terminated file into lines, rejecting carriage returns,
/// trailing whitespace, and a missing final newline. An empty file is zero
/// lines.
fn strict_lines(text: &str) -> Result<Vec<&str>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if !text.ends_with('\n') {
        bail!("file must end with a newline");
    }
    let mut out = Vec::new();
    for (i, line) in text[..text.len() - 1].split('\n').enumerate() {
        if line.ends_with([' ', '\t', '\r']) {
            bail!("line {}: trailing whitespace", i + 1);
        }
        out.push(line);
    }
    Ok(out)
}

fn field<'a>(token: &'a str, key: &str) -> Result<&'a str> {
    token
        .strip_prefix(key)
        .ok_or_else(|| anyhow!("expected a {key}<value> field, found {token:?}"))
}

pub fn serialize_challenge(challenge: &Challenge) -> String {
    assert!(
        (challenge.theta() - core::f64::consts::FRAC_PI_8).abs() < 1e-15,
        "the challenge format only carries theta = pi/8"
    );
    let m = challenge.public_matrix();
    let mut out = format!(
        "IQP1 q={} theta={THETA_TOKEN} rows={} cols={}\n",
        challenge.q(),
        m.rows(),
        m.cols()
    );
    for r in 0..m.rows() {
        out.push_str(&bits_to_string(&m.row_vec(r)));
        out.push('\n');
    }
    out
}

pub fn parse_challenge(text: &str) -> Result<Challenge> {
    let lines = strict_lines(text)?;
    let (header, row_lines) = lines
        .split_first()
        .ok_or_else(|| anyhow!("empty challenge file"))?;
    let tokens: Vec<&str> = header.split(' ').collect();
    if tokens.len() != 5 || tokens[0] != "IQP1" {
        bail!("header must read \"IQP1 q=<q> theta={THETA_TOKEN} rows=<k> cols=<n>\"");
    }
    let q: u64 = field(tokens[1], "q=")?.parse().context("q field")?;
    let theta = field(tokens[2], "theta=")?;
    if theta != THETA_TOKEN {
        bail!("unsupported angle {theta:?} (expected {THETA_TOKEN})");
    }
    let rows: usize = field(tokens[3], "rows=")?.parse().context("rows field")?;
    let cols: usize = field(tokens[4], "cols=")?.parse().context("cols field")?;
    if row_lines.len() != rows {
        bail!("expected {rows} row lines, found {}", row_lines.len());
    }
    let mut matrix = BitMatrix::zeros(rows, cols);
    for (r, line) in row_lines.iter().enumerate() {
        if line.len() != cols {
            bail!("row {}: {} characters, expected {cols}", r + 1, line.len());
        }
        let bits = parse_bits(line).with_context(|| format!("row {}", r + 1))?;
        matrix.set_row(r, &bits);
    }
    let (canonical, _) = matrix.column_echelon();
    if canonical != matrix {
        bail!("challenge matrix is not in canonical column-echelon form");
    }
    Ok(Challenge::from_parts(
        matrix,
        q,
        core::f64::consts::FRAC_PI_8,
    ))
}

pub fn serialize_secret(secret: &Secret) -> String {
    let causal: Vec<String> = secret.causal_rows().iter().map(usize::to_string).collect();
    format!(
        "s={} q={} seed={:x} causal={}\n",
        bits_to_string(secret.s()),
        secret.q(),
        secret.seed(),
        causal.join(",")
    )
}

pub fn parse_secret(text: &str) -> Result<Secret> {
    let lines = strict_lines(text)?;
    if lines.len() != 1 {
        bail!("secret file must be a single line");
    }
    let tokens: Vec<&str> = lines[0].split(' ').collect();
    if tokens.len() != 4 {
        bail!("secret line must read \"s=<bits> q=<q> seed=<hex> causal=<rows>\"");
    }
    let s = parse_bits(field(tokens[0], "s=")?).context("s field")?;
    let q: u64 = field(tokens[1], "q=")?.parse().context("q field")?;
    let seed = u64::from_str_radix(field(tokens[2], "seed=")?, 16).context("seed field")?;
    let causal_text = field(tokens[3], "causal=")?;
    let causal = if causal_text.is_empty() {
        Vec::new()
    } else {
        causal_text
            .split(',')
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .context("causal field")?
    };
    Ok(Secret::from_parts(s, causal, seed, q))
}

pub fn serialize_samples(samples: &[BitVec]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&bits_to_string(s));
        out.push('\n');
    }
    out
}

pub fn parse_samples(text: &str) -> Result<Vec<BitVec>> {
    let lines = strict_lines(text)?;
    let mut out = Vec::with_capacity(lines.len());
    let mut width = None;
    for (i, line) in lines.iter().enumerate() {
        if line.is_empty() {
            bail!("line {}: empty sample line", i + 1);
        }
        match width {
            None => width = Some(line.len()),
            Some(w) if w != line.len() => {
                bail!("line {}: width {} differs from {w}", i + 1, line.len());
            }
            _ => {}
        }
        out.push(parse_bits(line).with_context(|| format!("line {}", i + 1))?);
    }
    Ok(out)
}
