use super::*;
use crate::generators::{assemble, saccade_shape, GeneratorParams};
use crate::sequence::{build_sequence, SequenceSpec};
use crate::signal::{SignalSample, VelocityProfile};
use proptest::prelude::*;

fn pt(x: f64, y: f64, w: f64) -> Target {
    Target { x, y, weight: w }
}

fn static_set(w: usize, h: usize, pts: Vec<Target>) -> SceneTargets {
    SceneTargets::Static(TargetSet::new(w, h, pts).unwrap())
}

fn run_signal(label: MovementLabel, velocities: &[f64], rate: f64) -> SampledSignal {
    SampledSignal::from_profile(&VelocityProfile::from_velocities(rate, velocities.to_vec(), label).unwrap())
}

fn still() -> MappingParams {
    MappingParams {
        max_path_deviation: 0.0,
        fixation_dispersion: 0.0,
        ..MappingParams::default()
    }
}

fn generated(seed: u64, n_each: usize) -> SampledSignal {
    let mut rng = RandomSource::new(seed);
    let spec = SequenceSpec::with_counts(&[
        (MovementLabel::Fixation, n_each),
        (MovementLabel::Saccade, n_each),
        (MovementLabel::SmoothPursuit, n_each),
    ]);
    let seq = build_sequence(&spec, &mut rng).unwrap();
    let profile = assemble(&seq, &GeneratorParams::default(), 1000.0, &mut rng).unwrap();
    SampledSignal::from_profile(&profile)
}

#[test]
fn fixation_without_dispersion_sits_on_target() {
    let sig = run_signal(MovementLabel::Fixation, &[0.3; 40], 100.0);
    let targets = static_set(64, 48, vec![pt(12.0, 30.0, 1.0)]);
    let trace = map_to_gaze(&sig, &targets, &still(), &mut RandomSource::new(1)).unwrap();
    assert!(trace.samples.iter().all(|s| s.x == 12.0 && s.y == 30.0));
}

#[test]
fn straight_saccade_lands_exactly() {
    let mut samples = vec![SignalSample { time: 0.001, velocity: 0.0, label: MovementLabel::Fixation }];
    for i in 0..20 {
        samples.push(SignalSample {
            time: 0.002 + i as f64 * 0.001,
            velocity: 100.0 + i as f64,
            label: MovementLabel::Saccade,
        });
    }
    let sig = SampledSignal::new(samples).unwrap();
    let targets = static_set(128, 16, vec![pt(0.0, 0.0, 1.0), pt(100.0, 0.0, 1.0)]);
    for seed in 0..10 {
        let trace = map_to_gaze(&sig, &targets, &still(), &mut RandomSource::new(seed)).unwrap();
        let start = trace.samples[0].x;
        let end = trace.samples.last().unwrap();
        assert!(trace.samples.iter().all(|s| s.y == 0.0));
        assert_eq!(end.x, 100.0 - start);
    }
}

#[test]
fn path_follows_cumulative_velocity() {
    let shape = saccade_shape(50, 1.0).unwrap();
    let v: Vec<f64> = shape.iter().map(|s| s * 400.0).collect();
    let sig = run_signal(MovementLabel::Saccade, &v, 1000.0);
    let targets = static_set(200, 200, vec![pt(20.0, 40.0, 1.0), pt(180.0, 160.0, 1.0)]);
    let trace = map_to_gaze(&sig, &targets, &still(), &mut RandomSource::new(3)).unwrap();

    // independent oracle: running sums of v·dt, dt constant here
    let total: f64 = v.iter().sum();
    let mut acc = 0.0;
    let oracle: Vec<f64> = v.iter().map(|x| { acc += x; acc / total }).collect();

    let last = trace.samples.last().unwrap();
    let (start, goal): ((f64, f64), (f64, f64)) = if (last.x - 180.0).abs() < 1e-9 {
        ((20.0, 40.0), (180.0, 160.0))
    } else {
        ((180.0, 160.0), (20.0, 40.0))
    };
    let length = (goal.0 - start.0).hypot(goal.1 - start.1);
    for (s, o) in trace.samples.iter().zip(&oracle) {
        let prog = (s.x - start.0).hypot(s.y - start.1) / length;
        assert!((prog - o).abs() < 1e-9);
    }
    assert_eq!((last.x, last.y), goal);
}

#[test]
fn deviation_bounded_and_tapered() {
    let sig = run_signal(MovementLabel::SmoothPursuit, &[20.0; 200], 500.0);
    let targets = static_set(300, 300, vec![pt(50.0, 50.0, 1.0), pt(250.0, 250.0, 1.0)]);
    let p = MappingParams { max_path_deviation: 8.0, ..still() };
    for seed in 0..5 {
        let trace = map_to_gaze(&sig, &targets, &p, &mut RandomSource::new(seed)).unwrap();
        let last = trace.samples.last().unwrap();
        for s in &trace.samples {
            // distance from the diagonal y = x
            let d = (s.x - s.y).abs() / 2f64.sqrt();
            assert!(d <= 8.0 + 1e-9);
        }
        assert!(last.x == last.y);
    }
}

#[test]
fn noise_keeps_underlying_position() {
    let mut sig = run_signal(MovementLabel::Saccade, &[300.0; 30], 1000.0);
    let clean = sig.clone();
    for i in [3usize, 4, 5, 17] {
        sig.samples[i].label = MovementLabel::Noise;
        sig.samples[i].velocity = 5000.0;
    }
    let targets = static_set(100, 100, vec![pt(10.0, 10.0, 1.0), pt(90.0, 60.0, 1.0)]);
    let a = map_to_gaze(&clean, &targets, &still(), &mut RandomSource::new(8)).unwrap();
    let b = map_to_gaze(&sig, &targets, &still(), &mut RandomSource::new(8)).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    let tail = b.samples.last().unwrap();
    assert!(tail.x == 10.0 || tail.x == 90.0);
    for i in [3usize, 4, 5, 17] {
        assert_eq!(b.samples[i].label, MovementLabel::Noise);
        assert_eq!(b.samples[i].velocity, 5000.0);
        // a noisy sample sits where the preceding clean step would put it again
        assert!((b.samples[i].x - b.samples[i - 1].x).abs() < 10.0);
    }
}

#[test]
fn empty_target_set_reports_time() {
    let sig = run_signal(MovementLabel::Fixation, &[0.0; 5], 100.0);
    let targets = static_set(10, 10, vec![]);
    match map_to_gaze(&sig, &targets, &still(), &mut RandomSource::new(0)) {
        Err(Error::Mapping { time, .. }) => assert!((time - 0.01).abs() < 1e-12),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn target_outside_image_is_parameter_error() {
    let sig = run_signal(MovementLabel::Fixation, &[0.0; 5], 100.0);
    let targets = SceneTargets::Static(TargetSet { width: 10, height: 10, points: vec![pt(10.0, 3.0, 1.0)] });
    let err = map_to_gaze(&sig, &targets, &still(), &mut RandomSource::new(0)).unwrap_err();
    assert!(matches!(err, Error::Parameter { .. }));
}

#[test]
fn weighted_selection_frequencies() {
    let set = TargetSet::new(10, 10, vec![pt(1.0, 1.0, 1.0), pt(2.0, 2.0, 2.0), pt(3.0, 3.0, 3.0), pt(4.0, 4.0, 4.0)]).unwrap();
    let mut rng = RandomSource::new(77);
    let n = 10_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        let t = choose_target(&set, TargetSelection::Weighted, None, 0.0, &mut rng).unwrap();
        counts[t.x as usize - 1] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        let p = (k + 1) as f64 / 10.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - n as f64 * p).abs() <= 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn movement_avoids_current_point() {
    let set = TargetSet::new(10, 10, vec![pt(1.0, 1.0, 100.0), pt(5.0, 5.0, 0.001)]).unwrap();
    let mut rng = RandomSource::new(2);
    for _ in 0..100 {
        let t = choose_target(&set, TargetSelection::Weighted, Some((1.0, 1.0)), 0.0, &mut rng).unwrap();
        assert_eq!(t.x, 5.0);
    }
}

#[test]
fn nearest_frame_lookup() {
    let frames: Vec<TargetSet> = (0..5)
        .map(|i| TargetSet::new(20, 20, vec![pt(i as f64, 0.0, 1.0)]).unwrap())
        .collect();
    let scene = SceneTargets::from_frames(frames, 10.0).unwrap();
    assert_eq!(scene.at(-1.0).0, 0);
    assert_eq!(scene.at(0.14).0, 1);
    assert_eq!(scene.at(0.15).0, 1);
    assert_eq!(scene.at(0.16).0, 2);
    assert_eq!(scene.at(9.0).0, 4);
}

#[test]
fn dynamic_movements_use_frame_at_run_end() {
    let sig = generated(11, 4);
    let frames: Vec<TargetSet> = (0..40)
        .map(|i| {
            let pts = (0..3)
                .map(|k| pt((i * 7 + k * 40) as f64 % 300.0, (k * 50 + i) as f64 % 200.0, 1.0 + k as f64))
                .collect();
            TargetSet::new(300, 200, pts).unwrap()
        })
        .collect();
    let scene = SceneTargets::from_frames(frames, 4.0).unwrap();
    let mapped = map_to_gaze_logged(&sig, &scene, &MappingParams::default(), &mut RandomSource::new(4)).unwrap();
    let runs = label_runs(&sig.labels());
    let mut checked = 0;
    for c in &mapped.choices {
        let (label, range) = &runs[c.run];
        if label.is_movement() && *label != MovementLabel::Fixation && c.lookup_time == sig.samples[range.end - 1].time {
            let (frame, set) = scene.at(c.lookup_time);
            assert_eq!(frame, c.frame);
            assert!(set.points.contains(&c.target));
            let end = mapped.trace.samples[range.end - 1];
            assert!((end.x - c.target.x).abs() < 1e-6 && (end.y - c.target.y).abs() < 1e-6);
            checked += 1;
        }
    }
    let movement_runs = runs.iter().filter(|(l, _)| *l != MovementLabel::Fixation).count();
    assert!(movement_runs > 0);
    assert_eq!(checked, movement_runs);
}

#[test]
fn centroid_of_constant_fixation() {
    let samples = (0..10)
        .map(|i| GazeSample { time: i as f64 * 0.01, x: 50.0, y: 50.0, velocity: 0.0, label: MovementLabel::Fixation })
        .collect();
    let trace = GazeTrace { samples, width: 100, height: 100, pixels_per_degree: 30.0 };
    let c = fixation_centroids(&trace);
    assert_eq!(c.points, vec![pt(50.0, 50.0, 1.0)]);
}

#[test]
fn ramp_velocity_extraction() {
    let samples = (0..20)
        .map(|i| GazeSample { time: i as f64 / 100.0, x: 10.0 * i as f64, y: 5.0, velocity: 0.0, label: MovementLabel::Saccade })
        .collect();
    let trace = GazeTrace { samples, width: 400, height: 10, pixels_per_degree: 10.0 };
    let v = extract_velocities(&trace);
    for x in &v[1..19] {
        assert!((x - 100.0).abs() < 1e-9);
    }
}

fn real_trace(seed: u64) -> GazeTrace {
    let sig = generated(seed, 3);
    let targets = static_set(320, 240, vec![pt(40.0, 40.0, 1.0), pt(280.0, 60.0, 1.0), pt(160.0, 200.0, 1.0)]);
    map_to_gaze(&sig, &targets, &MappingParams::default(), &mut RandomSource::new(seed)).unwrap()
}

#[test]
fn remap_conserves_samples() {
    let real = real_trace(5);
    let out = remap_real(&real, &RemapMode::SameStimulus, &MappingParams::default(), &mut RandomSource::new(9)).unwrap();
    assert_eq!(out.samples.len(), real.samples.len());
    out.validate().unwrap();
    let count = |t: &GazeTrace, l| t.samples.iter().filter(|s| s.label == l).count();
    for l in MovementLabel::MOVEMENTS {
        assert_eq!(count(&out, l), count(&real, l));
    }
    let dur = |t: &GazeTrace| t.samples.last().unwrap().time - t.samples[0].time;
    assert!((dur(&out) - dur(&real)).abs() < 1e-9);
}

#[test]
fn remap_new_stimulus_lands_on_new_targets() {
    let real = real_trace(6);
    let scene = static_set(500, 500, vec![pt(400.0, 400.0, 1.0), pt(450.0, 100.0, 1.0)]);
    let out = remap_real(&real, &RemapMode::NewStimulus(scene), &MappingParams::default(), &mut RandomSource::new(9)).unwrap();
    assert_eq!((out.width, out.height), (500, 500));
    out.validate().unwrap();
}

#[test]
fn remap_rejects_unlabeled_and_fixationless() {
    let mut real = real_trace(7);
    let p = MappingParams::default();
    let mut noisy = real.clone();
    noisy.samples.iter_mut().for_each(|s| s.label = MovementLabel::Noise);
    assert!(matches!(remap_real(&noisy, &RemapMode::SameStimulus, &p, &mut RandomSource::new(0)), Err(Error::Parameter { .. })));
    real.samples.iter_mut().for_each(|s| {
        if s.label == MovementLabel::Fixation {
            s.label = MovementLabel::SmoothPursuit;
        }
    });
    assert!(matches!(remap_real(&real, &RemapMode::SameStimulus, &p, &mut RandomSource::new(0)), Err(Error::Mapping { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn mapped_traces_are_valid(seed in any::<u64>(), dev in 0.0f64..20.0, disp in 0.0f64..10.0) {
        let sig = generated(seed, 2);
        let targets = static_set(120, 90, vec![pt(0.0, 0.0, 1.0), pt(119.0, 89.0, 2.0), pt(60.0, 10.0, 0.5)]);
        let p = MappingParams { max_path_deviation: dev, fixation_dispersion: disp, ..MappingParams::default() };
        let mapped = map_to_gaze_logged(&sig, &targets, &p, &mut RandomSource::new(seed)).unwrap();
        prop_assert_eq!(mapped.trace.samples.len(), sig.len());
        prop_assert!(mapped.trace.validate().is_ok());
        let runs = label_runs(&sig.labels());
        let mut center = None;
        for (label, range) in runs {
            let run = &mapped.trace.samples[range.clone()];
            if label == MovementLabel::Fixation {
                let c = center.unwrap_or((run[0].x, run[0].y));
                if center.is_some() {
                    for s in run {
                        prop_assert!((s.x - c.0).hypot(s.y - c.1) <= disp + 1e-9);
                    }
                }
                center = None;
            } else {
                let end = run.last().unwrap();
                let hit = targets_hit(&targets, end.x, end.y);
                prop_assert!(hit);
                center = Some((end.x, end.y));
            }
        }
    }
}

fn targets_hit(scene: &SceneTargets, x: f64, y: f64) -> bool {
    let (_, set) = scene.at(0.0);
    set.points.iter().any(|t| (t.x - x).abs() < 1e-6 && (t.y - y).abs() < 1e-6)
}
