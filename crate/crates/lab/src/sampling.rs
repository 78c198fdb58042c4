//! Chunked, parallel Monte Carlo over a trial range.
//!
//! Each chunk draws its own slice of the counter-mode stream, so the result
//! is identical for any worker count or chunk size.

use epr_core::measurement::{JointSampler, MeasurementRecord};
use rayon::prelude::*;

pub const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairSample {
    /// Outcome tallies `[alice][bob]`, Up first.
    pub counts: [[u64; 2]; 2],
    pub records: Vec<MeasurementRecord>,
}

/// Samples trials `start..end` of a two-station sampler. Records are kept
/// only when `keep_records` is set.
pub fn sample_pair(
    sampler: &JointSampler,
    seed: u64,
    start: u64,
    end: u64,
    keep_records: bool,
) -> PairSample {
    assert_eq!(
        sampler.settings().len(),
        2,
        "pair sampling needs exactly two stations"
    );
    let chunks: Vec<(u64, u64)> = (start..end)
        .step_by(CHUNK as usize)
        .map(|lo| (lo, (lo + CHUNK).min(end)))
        .collect();
    let parts: Vec<PairSample> = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut part = PairSample::default();
            for cell in sampler.sample_cells(seed, lo, hi) {
                part.counts[cell >> 1][cell & 1] += 1;
            }
            if keep_records {
                part.records = sampler.records(seed, lo, hi);
            }
            part
        })
        .collect();
    let mut total = PairSample::default();
    for part in parts {
        for (t, p) in total
            .counts
            .iter_mut()
            .flatten()
            .zip(part.counts.iter().flatten())
        {
            *t += p;
        }
        total.records.extend(part.records);
    }
    total
}

/// Runs `f` on a pool with `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, rayon::ThreadPoolBuildError> {
    match workers {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use epr_core::measurement::StationSetting;
    use epr_core::quantum::make_singlet;
    use epr_core::{MeasurementAxis, ALPHA, BETA};

    #[test]
    fn parallel_matches_serial() {
        let settings = [
            StationSetting::new("alice", ALPHA, MeasurementAxis::z()),
            StationSetting::new("bob", BETA, MeasurementAxis::x()),
        ];
        let sampler = JointSampler::new(&make_singlet(), &settings).unwrap();
        let (start, end) = (1000, 1000 + 3 * CHUNK + 17);
        let serial = sampler.records(7, start, end);
        for workers in [1, 3, 8] {
            let s =
                with_workers(Some(workers), || sample_pair(&sampler, 7, start, end, true)).unwrap();
            assert_eq!(s.records, serial);
            assert_eq!(s.counts.iter().flatten().sum::<u64>(), end - start);
        }
        let counted = sample_pair(&sampler, 7, start, end, false);
        assert!(counted.records.is_empty());
        let mut counts = [[0u64; 2]; 2];
        for pair in serial.chunks(2) {
            counts[pair[0].outcome.index()][pair[1].outcome.index()] += 1;
        }
        assert_eq!(counted.counts, counts);
    }
}
