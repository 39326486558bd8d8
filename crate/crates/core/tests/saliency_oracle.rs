//! Saliency checked against a direct, unoptimized transcription of the
//! spectral-residual steps (naive DFT) and an exhaustive maxima scan.

use std::f64::consts::TAU;

use gazeforge::saliency::{local_maxima, spectral_residual, GrayImage, SaliencyMap};
use gazeforge::RandomSource;

#[derive(Clone, Copy)]
struct C(f64, f64);

fn dft2(input: &[C], w: usize, h: usize, sign: f64) -> Vec<C> {
    let mut out = vec![C(0.0, 0.0); w * h];
    for v in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = sign * TAU * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    let C(a, b) = input[y * w + x];
                    re += a * phase.cos() - b * phase.sin();
                    im += a * phase.sin() + b * phase.cos();
                }
            }
            out[v * w + u] = C(re, im);
        }
    }
    out
}

fn smooth(values: &[f64], w: usize, h: usize, k: &[[f64; 3]; 3]) -> Vec<f64> {
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        values[y * w + x]
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut s = 0.0;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    s += k[(dy + 1) as usize][(dx + 1) as usize] * at(x + dx, y + dy);
                }
            }
            out[y as usize * w + x as usize] = s;
        }
    }
    out
}

/// Oracle for 64-pixel-wide inputs, where no resizing happens.
fn oracle(pixels: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mean = pixels.iter().sum::<f64>() / pixels.len() as f64;
    let centered: Vec<C> = pixels.iter().map(|p| C(p - mean, 0.0)).collect();
    let f = dft2(&centered, w, h, -1.0);
    let amp: Vec<f64> = f.iter().map(|c| c.0.hypot(c.1)).collect();
    let floor = 1e-12 * amp.iter().cloned().fold(0.0, f64::max);
    let log_amp: Vec<f64> = amp.iter().map(|a| a.max(floor).ln()).collect();
    let avg = smooth(&log_amp, w, h, &[[1.0 / 9.0; 3]; 3]);
    let g: Vec<C> = (0..w * h)
        .map(|i| {
            if i == 0 || amp[i] <= floor {
                C(0.0, 0.0)
            } else {
                let scale = (log_amp[i] - avg[i]).exp() / amp[i];
                C(f[i].0 * scale, f[i].1 * scale)
            }
        })
        .collect();
    let back = dft2(&g, w, h, 1.0);
    let power: Vec<f64> = back.iter().map(|c| c.0 * c.0 + c.1 * c.1).collect();
    let gauss = [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]].map(|r| r.map(|v| v / 16.0));
    let s = smooth(&power, w, h, &gauss);
    let max = s.iter().cloned().fold(0.0, f64::max);
    s.iter().map(|v| v / max).collect()
}

#[test]
fn matches_naive_transcription() {
    let (w, h) = (64, 20);
    let mut rng = RandomSource::new(2024);
    for _ in 0..2 {
        let pixels: Vec<f64> = (0..w * h).map(|_| rng.unit_uniform()).collect();
        let ours = spectral_residual(&GrayImage::new(w, h, pixels.clone()).unwrap()).unwrap();
        let expected = oracle(&pixels, w, h);
        for (a, b) in ours.grid().data().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

fn global_max(map: &SaliencyMap) -> (usize, usize) {
    let mut best = (0, 0);
    for y in 0..map.height() {
        for x in 0..map.width() {
            if map.get(x, y) > map.get(best.0, best.1) {
                best = (x, y);
            }
        }
    }
    best
}

#[test]
fn impulse_is_localized() {
    for (w, h, px, py) in [(64usize, 64usize, 20usize, 30usize), (64, 64, 0, 63), (64, 64, 41, 7), (128, 128, 90, 17)] {
        let mut img = GrayImage::filled(w, h, 0.0);
        img.set(px, py, 1.0);
        let map = spectral_residual(&img).unwrap();
        let (bx, by) = global_max(&map);
        let d = (bx as f64 - px as f64).hypot(by as f64 - py as f64);
        assert!(d <= 3.0, "{w}x{h}: peak at ({bx}, {by}) vs ({px}, {py})");

        let pixels: Vec<f64> = img.data().to_vec();
        if w == 64 {
            let expected = oracle(&pixels, w, h);
            let i = expected.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert_eq!((i % w, i / w), (bx, by));
        }
    }
}

#[test]
fn twin_blobs_have_similar_maxima() {
    let mut img = GrayImage::filled(64, 64, 0.1);
    for (cx, cy) in [(16usize, 32usize), (48, 32)] {
        for y in cy - 2..=cy + 2 {
            for x in cx - 2..=cx + 2 {
                img.set(x, y, 0.9);
            }
        }
    }
    let map = spectral_residual(&img).unwrap();
    let near = |cx: f64| {
        local_maxima(&map, 0.0, 0.0)
            .points
            .into_iter()
            .filter(|p| (p.x - cx).abs() <= 6.0 && (p.y - 32.0).abs() <= 6.0)
            .map(|p| p.weight)
            .fold(0.0, f64::max)
    };
    let ratio = near(16.0) / near(48.0);
    assert!((0.8..=1.25).contains(&ratio), "{ratio}");
}

#[test]
fn intensity_scale_keeps_argmax() {
    let mut rng = RandomSource::new(9);
    let pixels: Vec<f64> = (0..80 * 60).map(|_| rng.unit_uniform()).collect();
    let img = GrayImage::new(80, 60, pixels.clone()).unwrap();
    let scaled = GrayImage::new(80, 60, pixels.iter().map(|p| p * 37.5).collect()).unwrap();
    assert_eq!(global_max(&spectral_residual(&img).unwrap()), global_max(&spectral_residual(&scaled).unwrap()));
}

fn exhaustive_maxima(map: &SaliencyMap, threshold: f64) -> Vec<(usize, usize)> {
    let (w, h) = (map.width() as isize, map.height() as isize);
    let mut found = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = map.get(x as usize, y as usize);
            if v < threshold {
                continue;
            }
            let mut strict = true;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) != (0, 0) && nx >= 0 && ny >= 0 && nx < w && ny < h && map.get(nx as usize, ny as usize) >= v {
                        strict = false;
                    }
                }
            }
            if strict {
                found.push((x as usize, y as usize));
            }
        }
    }
    found
}

#[test]
fn maxima_match_exhaustive_scan() {
    let mut rng = RandomSource::new(88);
    for trial in 0..100 {
        // coarse levels make ties common
        let levels = if trial % 2 == 0 { 6.0 } else { 1e6 };
        let data: Vec<f64> = (0..32 * 32).map(|_| (rng.unit_uniform() * levels).floor() / levels).collect();
        let map = SaliencyMap::from_precomputed(GrayImage::new(32, 32, data).unwrap()).unwrap();
        let threshold = if trial % 3 == 0 { 0.5 } else { 0.0 };
        let mut ours: Vec<(usize, usize)> = local_maxima(&map, 0.0, threshold)
            .points
            .iter()
            .map(|p| (p.x as usize, p.y as usize))
            .collect();
        ours.sort_by_key(|&(x, y)| (y, x));
        assert_eq!(ours, exhaustive_maxima(&map, threshold), "trial {trial}");
    }
}
