use std::io::Write;

use super::{run_algo, Algo, CheckArgs, EXIT_MISMATCH};
use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use crate::oracle::{first_difference, naive_mul};
use crate::strassen::MulParams;
use crate::cubic;

/// Largest `m * l * n` for which the unpacked reference product is computed.
const NAIVE_LIMIT: u128 = 4_000_000_000;

fn variants(params: &MulParams) -> Vec<(String, Algo, MulParams)> {
    let mut v: Vec<(String, Algo, MulParams)> = [
        Algo::Cubic,
        Algo::M4rm,
        Algo::M4rmBlocked,
        Algo::M4rmTables(2),
        Algo::M4rmTables(8),
        Algo::Strassen,
    ]
    .into_iter()
    .map(|a| (a.to_string(), a, *params))
    .collect();
    // Low cutoff so that small shapes still recurse.
    v.push(("strassen-c64".into(), Algo::Strassen, MulParams { cutoff: 64, b_s: 32, ..*params }));
    v
}

pub(super) fn run(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let params = args.params.resolve()?;
    let mut failed = false;
    let w = |out: &mut dyn Write, s: String| {
        out.write_all(s.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
    };
    w(out, format!("{:<14} {:<14} {:<8} {:<8}\n", "dims", "algorithm", "naive", "cubic"))?;
    for (i, d) in args.dims.iter().enumerate() {
        let seed = args.seed.wrapping_add(2 * i as u64);
        let a = BitMatrix::random(d.m, d.l, seed);
        let b = BitMatrix::random(d.l, d.n, seed.wrapping_add(1));
        let naive = if (d.m as u128) * (d.l as u128) * (d.n as u128) <= NAIVE_LIMIT {
            Some(naive_mul(&a, &b))
        } else {
            None
        };
        let reference = cubic::mul_cubic(&a, &b)?;
        for (j, (name, algo, p)) in variants(&params).into_iter().enumerate() {
            let mut c = run_algo(algo, &a, &b, &p)?;
            if args.inject_fault && j == 0 && !c.is_empty() {
                c.flip_bit(0, 0);
            }
            let vs_naive = naive.as_ref().map(|nv| first_difference(&c, nv));
            let vs_cubic = first_difference(&c, &reference);
            let fmt = |r: Option<Option<(usize, usize)>>| match r {
                None => "skip".to_string(),
                Some(None) => "pass".to_string(),
                Some(Some(_)) => "FAIL".to_string(),
            };
            w(out, format!("{:<14} {:<14} {:<8} {:<8}\n", d.to_string(), name, fmt(vs_naive), fmt(Some(vs_cubic))))?;
            if let Some((r, c)) = vs_naive.flatten().or(vs_cubic) {
                failed = true;
                w(out, format!("  first difference at ({r}, {c})\n"))?;
            }
        }
    }
    w(out, if failed { "FAIL\n".into() } else { "PASS\n".into() })?;
    Ok(if failed { EXIT_MISMATCH } else { 0 })
}
