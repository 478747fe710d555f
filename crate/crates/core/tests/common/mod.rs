//! Procedural "desk" images shared by the integration tests: smooth
//! shading, a few hard-edged shapes and sensor-like noise.

#![allow(dead_code)]

use edgestego::RgbRaster;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn desk_image(seed: u64, width: usize, height: usize) -> RgbRaster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<[(f64, f64, f64, f64); 3]> = (0..3)
        .map(|_| {
            [(); 3].map(|_| {
                (
                    rng.gen_range(0.005..0.05),
                    rng.gen_range(0.005..0.05),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(10.0..50.0),
                )
            })
        })
        .collect();
    let base: [f64; 3] = [(); 3].map(|_| rng.gen_range(70.0..180.0));
    let shapes: Vec<(bool, f64, f64, f64, f64, [f64; 3])> = (0..rng.gen_range(2..6))
        .map(|_| {
            (
                rng.gen_bool(0.5),
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                rng.gen_range(5.0..width as f64 / 3.0),
                rng.gen_range(5.0..height as f64 / 3.0),
                [(); 3].map(|_| rng.gen_range(15.0..240.0)),
            )
        })
        .collect();
    let noise = rng.gen_range(1.0..10.0);

    RgbRaster::from_fn(width, height, |r, c| {
        let (x, y) = (c as f64, r as f64);
        let mut px = [0u8; 3];
        for ch in 0..3 {
            let mut v = base[ch];
            for &(fx, fy, phase, amp) in &waves[ch] {
                v += amp * (fx * x + fy * y + phase).sin();
            }
            for &(disk, cx, cy, rx, ry, colour) in &shapes {
                let inside = if disk {
                    ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0
                } else {
                    (x - cx).abs() <= rx && (y - cy).abs() <= ry
                };
                if inside {
                    v = colour[ch] + 0.3 * (v - base[ch]);
                }
            }
            v += rng.gen_range(-noise..=noise);
            px[ch] = v.round().clamp(0.0, 255.0) as u8;
        }
        px
    })
    .unwrap()
}

/// `n` images of assorted sizes, named `desk_XX`.
pub fn desk_corpus(n: usize, seed: u64) -> Vec<(String, RgbRaster)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let w = rng.gen_range(96..=192);
            let h = rng.gen_range(96..=192);
            (format!("desk_{i:02}"), desk_image(rng.gen(), w, h))
        })
        .collect()
}
