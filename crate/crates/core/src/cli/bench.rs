use std::fs::File;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{effective_params, run_algo, BenchArgs, EXIT_MISMATCH};
use crate::cubic;
use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use crate::oracle::first_difference;
use crate::stats;

/// One benchmark measurement. Times are seconds from a monotonic clock and
/// exclude the warm-up run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: String,
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub bs: usize,
    pub cutoff: usize,
    pub reps: usize,
    #[serde(serialize_with = "ser_time", deserialize_with = "de_time")]
    pub total_s: f64,
    #[serde(serialize_with = "ser_time", deserialize_with = "de_time")]
    pub mean_s: f64,
    #[serde(serialize_with = "ser_time", deserialize_with = "de_time")]
    pub min_s: f64,
    /// Peak bytes held by matrices, tables and temporaries, inputs included.
    pub peak_bytes: u64,
}

fn ser_time<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:.16e}"))
}

fn de_time<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

pub fn write_records<W: Write>(w: W, records: &[BenchRecord]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> csv::Result<Vec<BenchRecord>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

pub(super) fn run(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    if args.reps == 0 {
        return Err(Error::Parameter("--reps must be at least 1".into()));
    }
    let params = args.params.resolve()?;
    let mut records = Vec::new();
    let mut failed = false;
    for (i, d) in args.dims.iter().enumerate() {
        let seed = args.seed.wrapping_add(2 * i as u64);
        let a = BitMatrix::random(d.m, d.l, seed);
        let b = BitMatrix::random(d.l, d.n, seed.wrapping_add(1));
        let reference = if args.verify { Some(cubic::mul_cubic(&a, &b)?) } else { None };
        for &algo in &args.algos {
            drop(run_algo(algo, &a, &b, &params)?);
            stats::reset();
            let mut times = Vec::with_capacity(args.reps);
            let mut last = None;
            for _ in 0..args.reps {
                drop(last.take());
                let start = Instant::now();
                let c = run_algo(algo, &a, &b, &params)?;
                times.push(start.elapsed().as_secs_f64());
                last = Some(c);
            }
            let peak = stats::snapshot().peak_bytes;
            if let (Some(want), Some(got)) = (&reference, &last) {
                if let Some((r, c)) = first_difference(got, want) {
                    eprintln!("gf2mat: {algo} {d}: result differs at ({r}, {c})");
                    failed = true;
                }
            }
            let (k, t, bs, cutoff) = effective_params(algo, &params, d.n);
            let total: f64 = times.iter().sum();
            records.push(BenchRecord {
                algorithm: algo.to_string(),
                m: d.m,
                l: d.l,
                n: d.n,
                k,
                t,
                bs,
                cutoff,
                reps: args.reps,
                total_s: total,
                mean_s: total / args.reps as f64,
                min_s: times.iter().copied().fold(f64::INFINITY, f64::min),
                peak_bytes: peak,
            });
        }
    }
    let csv_err = |path: String| move |e: csv::Error| Error::Io { path: path.into(), source: e.into() };
    match &args.out {
        Some(path) => {
            let f = File::create(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            write_records(f, &records).map_err(csv_err(path.display().to_string()))?;
        }
        None => write_records(out, &records).map_err(csv_err("<stdout>".into()))?,
    }
    Ok(if failed { EXIT_MISMATCH } else { 0 })
}
