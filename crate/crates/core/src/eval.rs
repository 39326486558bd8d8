//! Self-evaluation against labeled recordings.
//!
//! Every labeled run of a recording is summarized by a few observed
//! parameters, simulated again with the same length, and compared sample
//! by sample. Squared errors are pooled per movement type.

use std::collections::BTreeMap;

use crate::distribution::BoundedDistribution;
use crate::error::{Error, Result};
use crate::generators::{argmax, fixation_samples, saccade_shape};
use crate::rng::RandomSource;
use crate::signal::{label_runs, MovementLabel, SampledSignal, VelocityProfile};

pub const DEFAULT_REPEATS: usize = 10;

/// Skewness range searched when fitting a saccade to its peak position.
pub const SKEWNESS_SEARCH: (f64, f64) = (0.02, 2.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservedParams {
    Fixation { mean: f64, std: f64 },
    Saccade { peak: f64, peak_index: usize },
    Pursuit { mean: f64, std: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentDescriptor {
    pub label: MovementLabel,
    /// First sample of the run in the source signal.
    pub start: usize,
    pub length: usize,
    pub params: ObservedParams,
}

impl SegmentDescriptor {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::param("segment.length", "must be at least 1"));
        }
        match self.params {
            ObservedParams::Saccade { peak, peak_index } => {
                if peak_index >= self.length {
                    return Err(Error::param("segment.peak_index", "must lie inside the segment"));
                }
                if !(peak >= 0.0 && peak.is_finite()) {
                    return Err(Error::param("segment.peak", "must be finite and >= 0"));
                }
            }
            ObservedParams::Fixation { mean, std } | ObservedParams::Pursuit { mean, std } => {
                if !(mean.is_finite() && std >= 0.0 && std.is_finite()) {
                    return Err(Error::param("segment.std", "mean must be finite and std >= 0"));
                }
            }
        }
        Ok(())
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// One descriptor per movement run; noise runs are skipped.
pub fn extract_descriptors(velocities: &[f64], labels: &[MovementLabel]) -> Result<Vec<SegmentDescriptor>> {
    if velocities.len() != labels.len() {
        return Err(Error::param("real_data", "velocity and label counts differ"));
    }
    Ok(label_runs(labels)
        .into_iter()
        .filter(|(l, _)| l.is_movement())
        .map(|(label, range)| {
            let v = &velocities[range.clone()];
            let params = match label {
                MovementLabel::Saccade => {
                    let peak_index = argmax(v).unwrap_or(0);
                    ObservedParams::Saccade { peak: v[peak_index], peak_index }
                }
                MovementLabel::Fixation => {
                    let (mean, std) = mean_std(v);
                    ObservedParams::Fixation { mean, std }
                }
                _ => {
                    let (mean, std) = mean_std(v);
                    ObservedParams::Pursuit { mean, std }
                }
            };
            SegmentDescriptor { label, start: range.start, length: range.len(), params }
        })
        .collect())
}

/// A simulated segment. `fit_exact` is false when a saccade's peak
/// position could not be reached and the nearest attainable one was used.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub velocities: Vec<f64>,
    pub fit_exact: bool,
}

/// Gamma profile of `n` samples with its maximum as close to `index` as
/// the skewness range allows.
pub fn fit_saccade_shape(n: usize, index: usize) -> Result<(Vec<f64>, bool)> {
    let (mut lo, mut hi) = SKEWNESS_SEARCH;
    let mut best = saccade_shape(n, lo)?;
    let mut best_gap = usize::MAX;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let shape = saccade_shape(n, mid)?;
        let at = argmax(&shape).unwrap_or(0);
        let gap = at.abs_diff(index);
        if gap < best_gap {
            best_gap = gap;
            best = shape;
        }
        if gap == 0 {
            break;
        }
        // larger skewness moves the peak earlier
        if at > index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for s in [SKEWNESS_SEARCH.0, SKEWNESS_SEARCH.1] {
        let shape = saccade_shape(n, s)?;
        let gap = argmax(&shape).unwrap_or(0).abs_diff(index);
        if gap < best_gap {
            best_gap = gap;
            best = shape;
        }
    }
    Ok((best, best_gap <= 1))
}

pub fn simulate_from_descriptor(d: &SegmentDescriptor, rng: &mut RandomSource) -> Result<Simulation> {
    d.validate()?;
    let jitter = |std: f64| {
        if std > 0.0 {
            BoundedDistribution::normal(-5.0 * std, 5.0 * std, std)
        } else {
            BoundedDistribution::constant(0.0)
        }
    };
    match d.params {
        ObservedParams::Fixation { mean, std } | ObservedParams::Pursuit { mean, std } => Ok(Simulation {
            velocities: fixation_samples(d.length, mean.max(0.0), &jitter(std), rng),
            fit_exact: true,
        }),
        ObservedParams::Saccade { peak, peak_index } => {
            let (shape, fit_exact) = fit_saccade_shape(d.length, peak_index)?;
            Ok(Simulation {
                velocities: shape.iter().map(|s| s * peak).collect(),
                fit_exact,
            })
        }
    }
}

/// Simulated segment as a profile at `base_rate`.
pub fn simulate_profile(d: &SegmentDescriptor, base_rate: f64, rng: &mut RandomSource) -> Result<VelocityProfile> {
    let sim = simulate_from_descriptor(d, rng)?;
    VelocityProfile::from_velocities(base_rate, sim.velocities, d.label)
}

pub fn squared_error(sim: &[f64], real: &[f64]) -> Result<Vec<f64>> {
    if sim.len() != real.len() {
        return Err(Error::param(
            "squared_error",
            format!("length mismatch ({} vs {})", sim.len(), real.len()),
        ));
    }
    Ok(sim.iter().zip(real).map(|(a, b)| (a - b).powi(2)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Smallest value at or above `q1 - 1.5 IQR`.
    pub whisker_low: f64,
    /// Largest value at or below `q3 + 1.5 IQR`.
    pub whisker_high: f64,
    pub min: f64,
    pub max: f64,
}

impl ErrorSummary {
    pub const STATS: [&'static str; 9] = [
        "count", "mean", "median", "q1", "q3", "whisker_low", "whisker_high", "min", "max",
    ];

    /// `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (v.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
        let iqr = q3 - q1;
        let whisker_low = *v.iter().find(|&&x| x >= q1 - 1.5 * iqr).unwrap_or(&v[0]);
        let whisker_high = *v.iter().rev().find(|&&x| x <= q3 + 1.5 * iqr).unwrap_or(&v[v.len() - 1]);
        Some(Self {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median,
            q1,
            q3,
            whisker_low,
            whisker_high,
            min: v[0],
            max: v[v.len() - 1],
        })
    }

    pub fn values(&self) -> [f64; 9] {
        [
            self.count as f64,
            self.mean,
            self.median,
            self.q1,
            self.q3,
            self.whisker_low,
            self.whisker_high,
            self.min,
            self.max,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evaluation {
    pub summaries: BTreeMap<MovementLabel, ErrorSummary>,
    /// Every per-sample squared error, grouped by movement type.
    pub pooled: BTreeMap<MovementLabel, Vec<f64>>,
    /// Start indices of saccades whose peak position was not reproduced.
    pub inexact_fits: Vec<usize>,
}

/// Simulates each run `repeats` times and pools the squared errors.
/// Each simulation draws from `rng.derive(&[segment, repeat])`.
pub fn evaluate_dataset(real: &SampledSignal, repeats: usize, rng: &RandomSource) -> Result<Evaluation> {
    if repeats == 0 {
        return Err(Error::param("eval.repeats", "must be at least 1"));
    }
    let velocities = real.velocities();
    let descriptors = extract_descriptors(&velocities, &real.labels())?;
    let mut out = Evaluation::default();
    for (seg, d) in descriptors.iter().enumerate() {
        let observed = &velocities[d.start..d.start + d.length];
        for rep in 0..repeats {
            let mut stream = rng.derive(&[seg as u64, rep as u64]);
            let sim = simulate_from_descriptor(d, &mut stream)?;
            if !sim.fit_exact && rep == 0 {
                out.inexact_fits.push(d.start);
            }
            out.pooled
                .entry(d.label)
                .or_default()
                .extend(squared_error(&sim.velocities, observed)?);
        }
    }
    for (label, values) in &out.pooled {
        if let Some(s) = ErrorSummary::from_values(values) {
            out.summaries.insert(*label, s);
        }
    }
    Ok(out)
}

/// The same recording with its velocities permuted across all samples.
pub fn shuffled_control(real: &SampledSignal, rng: &mut RandomSource) -> SampledSignal {
    let mut velocities = real.velocities();
    rng.shuffle(&mut velocities);
    let mut out = real.clone();
    for (s, v) in out.samples.iter_mut().zip(velocities) {
        s.velocity = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{assemble, GeneratorParams};
    use crate::sequence::{build_sequence, SequenceSpec};
    use proptest::prelude::*;

    const F: MovementLabel = MovementLabel::Fixation;
    const S: MovementLabel = MovementLabel::Saccade;
    const P: MovementLabel = MovementLabel::SmoothPursuit;

    fn one(v: &[f64], l: MovementLabel) -> SegmentDescriptor {
        extract_descriptors(v, &vec![l; v.len()]).unwrap()[0]
    }

    #[test]
    fn descriptor_examples() {
        assert_eq!(one(&[2.0, 2.0, 2.0], F).params, ObservedParams::Fixation { mean: 2.0, std: 0.0 });
        assert_eq!(
            one(&[0.0, 100.0, 300.0, 100.0, 0.0], S).params,
            ObservedParams::Saccade { peak: 300.0, peak_index: 2 }
        );
        match one(&[10.0, 20.0, 30.0], P).params {
            ObservedParams::Pursuit { mean, std } => {
                assert!((mean - 20.0).abs() < 1e-12);
                assert!((std - 10.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(one(&[4.0], F).params, ObservedParams::Fixation { mean: 4.0, std: 0.0 });
    }

    #[test]
    fn noise_runs_skipped() {
        let v = [1.0, 1.0, 900.0, 1.0];
        let l = [F, F, MovementLabel::Noise, F];
        let d = extract_descriptors(&v, &l).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!((d[1].start, d[1].length), (3, 1));
    }

    #[test]
    fn constant_fixation_reconstructs_exactly() {
        let d = SegmentDescriptor { label: F, start: 0, length: 5, params: ObservedParams::Fixation { mean: 2.0, std: 0.0 } };
        let sim = simulate_from_descriptor(&d, &mut RandomSource::new(0)).unwrap();
        assert_eq!(sim.velocities, vec![2.0; 5]);
    }

    #[test]
    fn saccade_peak_lands_on_index() {
        let d = SegmentDescriptor { label: S, start: 0, length: 5, params: ObservedParams::Saccade { peak: 300.0, peak_index: 2 } };
        let sim = simulate_from_descriptor(&d, &mut RandomSource::new(0)).unwrap();
        assert_eq!(argmax(&sim.velocities), Some(2));
        assert_eq!(sim.velocities[2], 300.0);
        assert!(sim.fit_exact);
    }

    #[test]
    fn unreachable_peak_is_flagged() {
        let d = SegmentDescriptor { label: S, start: 0, length: 40, params: ObservedParams::Saccade { peak: 300.0, peak_index: 39 } };
        let sim = simulate_from_descriptor(&d, &mut RandomSource::new(0)).unwrap();
        assert!(!sim.fit_exact);
        assert_eq!(sim.velocities.iter().cloned().fold(0.0, f64::max), 300.0);
    }

    #[test]
    fn round_trip_within_tolerance() {
        let mut rng = RandomSource::new(5);
        for (label, mean, std) in [(F, 1.5, 0.3), (P, 20.0, 2.0)] {
            let params = if label == F {
                ObservedParams::Fixation { mean, std }
            } else {
                ObservedParams::Pursuit { mean, std }
            };
            let d = SegmentDescriptor { label, start: 0, length: 4000, params };
            let sim = simulate_from_descriptor(&d, &mut rng).unwrap();
            let (m, s) = mean_std(&sim.velocities);
            assert!((m - mean).abs() <= 0.05 * mean);
            assert!((s - std).abs() <= 0.05 * std);
        }
        for (n, idx) in [(50usize, 10usize), (80, 30), (30, 5), (120, 60)] {
            let d = SegmentDescriptor { label: S, start: 0, length: n, params: ObservedParams::Saccade { peak: 420.0, peak_index: idx } };
            let sim = simulate_from_descriptor(&d, &mut rng).unwrap();
            match one(&sim.velocities, S).params {
                ObservedParams::Saccade { peak, peak_index } => {
                    assert_eq!(peak, 420.0);
                    assert!(peak_index.abs_diff(idx) <= 1);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn squared_error_examples() {
        assert_eq!(squared_error(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), vec![1.0, 4.0]);
        assert_eq!(squared_error(&[3.0, -1.0], &[3.0, -1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(squared_error(&[1.0], &[1.0, 2.0]), Err(Error::Parameter { .. })));
    }

    #[test]
    fn summary_quantiles_type7() {
        let s = ErrorSummary::from_values(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert_eq!((s.whisker_low, s.whisker_high), (1.0, 4.0));
        assert_eq!((s.min, s.max, s.count), (1.0, 100.0, 5));
        assert!((s.mean - 22.0).abs() < 1e-12);
        assert!(ErrorSummary::from_values(&[]).is_none());
    }

    fn generated(seed: u64, jitter: bool) -> SampledSignal {
        let mut rng = RandomSource::new(seed);
        let spec = SequenceSpec::with_counts(&[(F, 6), (S, 6), (P, 6)]);
        let seq = build_sequence(&spec, &mut rng).unwrap();
        let mut params = GeneratorParams::default();
        if !jitter {
            params.fixation.consistency = BoundedDistribution::constant(0.0);
        }
        SampledSignal::from_profile(&assemble(&seq, &params, 1000.0, &mut rng).unwrap())
    }

    #[test]
    fn zero_std_fixations_have_no_error() {
        let sig = generated(3, false);
        let e = evaluate_dataset(&sig, 1, &RandomSource::new(1)).unwrap();
        assert_eq!(e.summaries[&F].max, 0.0);
    }

    #[test]
    fn self_consistency_bound_and_control() {
        let sig = generated(4, true);
        let rng = RandomSource::new(2);
        let e = evaluate_dataset(&sig, DEFAULT_REPEATS, &rng).unwrap();
        // default fixation consistency amplitude is 1
        assert!(e.summaries[&F].median <= 4.0);
        let control = shuffled_control(&sig, &mut RandomSource::new(9));
        let c = evaluate_dataset(&control, DEFAULT_REPEATS, &rng).unwrap();
        for l in MovementLabel::MOVEMENTS {
            assert!(e.summaries[&l].median < c.summaries[&l].median, "{l:?}");
        }
        assert_eq!(e, evaluate_dataset(&sig, DEFAULT_REPEATS, &rng).unwrap());
    }

    #[test]
    fn absent_class_is_omitted() {
        let sig = SampledSignal::from_profile(&VelocityProfile::from_velocities(100.0, vec![1.0; 10], F).unwrap());
        let e = evaluate_dataset(&sig, 2, &RandomSource::new(0)).unwrap();
        assert_eq!(e.summaries.keys().copied().collect::<Vec<_>>(), vec![F]);
    }

    proptest! {
        #[test]
        fn squared_error_symmetric(a in proptest::collection::vec(-1e3f64..1e3, 0..40), seed in any::<u64>()) {
            let mut b = a.clone();
            RandomSource::new(seed).shuffle(&mut b);
            let e = squared_error(&a, &b).unwrap();
            prop_assert_eq!(&e, &squared_error(&b, &a).unwrap());
            prop_assert!(e.iter().all(|x| *x >= 0.0));
        }

        #[test]
        fn summary_ordering(v in proptest::collection::vec(0.0f64..1e4, 1..200)) {
            let s = ErrorSummary::from_values(&v).unwrap();
            prop_assert!(s.min <= s.whisker_low && s.whisker_low <= s.whisker_high);
            prop_assert!(s.q1 <= s.median && s.median <= s.q3);
            prop_assert!(s.whisker_high <= s.max && s.min >= 0.0);
        }
    }
}
