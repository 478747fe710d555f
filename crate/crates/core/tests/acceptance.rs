//! Exit criteria. Each test prints one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use edgestego::bench::{evaluate_corpus, summarize, BenchConfig};
use edgestego::edges::{canny, gaussian_smooth, sobel_gradient, CannyParams};
use edgestego::lsbmr::simulate_modification_rate;
use edgestego::metrics::{self, improvement_pct, Better};
use edgestego::pipeline::{self, EmbedOptions, Method};
use edgestego::raster::{save_image, ImageFormat};
use edgestego::region::{compute_threshold, deserialize_key, serialize_key};
use edgestego::{ChannelId, Execution, Grid, PairLocus, RegionKey, RgbRaster, StegoError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

const DESK_IMAGES: usize = 24;
const DESK_SEED: u64 = 0x5eed_de5c;
const PAYLOADS: [usize; 4] = [400, 600, 900, 1200];

#[test]
fn criterion_1_round_trip_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    let mut redraws = 0;
    for case in 0..1000 {
        let method = Method::ALL[case % 3];
        let channel = ChannelId::ALL[rng.gen_range(0..3)];
        let opts = EmbedOptions {
            channel,
            method,
            seed: rng.gen(),
            ..Default::default()
        };
        // draw covers until this method can carry at least one byte
        let (cover, capacity) = loop {
            let w = rng.gen_range(64..=256);
            let h = rng.gen_range(64..=256);
            let cover = common::desk_image(rng.gen(), w, h);
            let cap = pipeline::max_capacity(&cover.channel(channel), &opts).unwrap();
            if cap >= 8 {
                break (cover, cap);
            }
            redraws += 1;
        };
        let max_bytes = capacity.min(2000) / 8;
        let len = rng.gen_range(1..=max_bytes);
        let message: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let ok = pipeline::embed_message(&cover, &message, &opts)
            .and_then(|out| pipeline::extract_message(&out.stego, &out.key))
            .map(|got| got == message)
            .unwrap_or(false);
        if !ok {
            failures.push((case, method, len));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 60.0;
    report(
        1,
        pass,
        &format!(
            "1000 randomized round trips, {} failures, {redraws} cover redraws, {secs:.1}s",
            failures.len()
        ),
    );
    assert!(failures.is_empty(), "failed cases: {failures:?}");
    assert!(secs < 60.0, "took {secs:.1}s");
}

#[test]
fn criterion_2_modification_rate() {
    let stats = simulate_modification_rate(200_000, 2, Execution::default());
    let per_bit = stats.per_bit();
    let zero = stats.zero_change_rate();
    let pass = (per_bit - 0.375).abs() <= 0.01 && (zero - 0.25).abs() <= 0.01;
    report(
        2,
        pass,
        &format!(
            "{} pairs: {per_bit:.5} changes/bit (0.375 +- 0.01), zero-change {zero:.5} (0.25 +- 0.01)",
            stats.pairs
        ),
    );
    assert!(pass);
}

/// (payload, [sobel, canny, threshold] MSE, [sobel, canny, threshold] PSNR)
type TableRow = (usize, [f64; 3], [f64; 3]);

const TABLE_1: [TableRow; 4] = [
    (
        400,
        [0.000026, 0.000026, 0.000025],
        [93.968707, 93.968707, 94.111111],
    ),
    (
        600,
        [0.000031, 0.000031, 0.000028],
        [93.319299, 93.319299, 93.631876],
    ),
    (
        900,
        [0.000050, 0.000050, 0.000047],
        [91.210765, 91.210765, 91.439394],
    ),
    (
        1200,
        [0.000060, 0.000060, 0.000054],
        [90.400432, 90.400432, 90.820524],
    ),
];

const TABLE_3: [TableRow; 4] = [
    (
        400,
        [0.000028, 0.000028, 0.000024],
        [93.631876, 93.631876, 94.333875],
    ),
    (
        600,
        [0.000030, 0.000030, 0.000025],
        [93.441643, 93.441643, 94.184104],
    ),
    (
        900,
        [0.000048, 0.000048, 0.000047],
        [91.361839, 91.361839, 91.380765],
    ),
    (
        1200,
        [0.000064, 0.000060, 0.000059],
        [90.102854, 90.102854, 90.431343],
    ),
];

#[test]
fn criterion_3_table_consistency() {
    let columns = ["sobel", "canny", "threshold"];
    let mut bad = Vec::new();
    let mut checked = 0;
    for (table, rows) in [("table1", TABLE_1), ("table3", TABLE_3)] {
        for (payload, mses, psnrs) in rows {
            for k in 0..3 {
                // psnr is monotone in mse, so the rounding band maps onto an interval
                let hi = metrics::psnr(mses[k] - 5e-7).unwrap();
                let lo = metrics::psnr(mses[k] + 5e-7).unwrap();
                let ok = psnrs[k] >= lo - 0.001 && psnrs[k] <= hi + 0.001;
                checked += 1;
                if !ok {
                    bad.push(format!(
                        "{table}/{payload}/{}: mse {:.6} gives psnr in [{lo:.6}, {hi:.6}], reported {:.6}",
                        columns[k], mses[k], psnrs[k]
                    ));
                }
            }
        }
    }
    for line in &bad {
        println!("    inconsistent cell {line}");
    }
    report(
        3,
        bad.is_empty(),
        &format!(
            "{}/{checked} table cells consistent with 10*log10(65536/mse)",
            checked - bad.len()
        ),
    );
    assert!(bad.is_empty(), "{} inconsistent cells", bad.len());
}

#[test]
fn criterion_4_threshold_monotonicity() {
    let corpus = common::desk_corpus(DESK_IMAGES, DESK_SEED);
    let mut violations = Vec::new();
    let mut series = 0;
    for (id, img) in &corpus {
        for ch in ChannelId::ALL {
            let plane = img.channel(ch);
            let ts: Vec<u8> = PAYLOADS
                .iter()
                .map(|&p| compute_threshold(&plane, p).expect("desk images carry 1200 bits"))
                .collect();
            series += 1;
            if ts.windows(2).any(|w| w[1] > w[0]) {
                violations.push(format!("{id}/{ch}: {ts:?}"));
            }
        }
    }
    report(
        4,
        violations.is_empty(),
        &format!(
            "{series} threshold series over {DESK_IMAGES} images, {} violations",
            violations.len()
        ),
    );
    assert!(violations.is_empty(), "{violations:?}");
}

#[test]
fn criterion_5_comparative_trend() {
    let corpus = common::desk_corpus(DESK_IMAGES, DESK_SEED);
    let cfg = BenchConfig {
        payloads: PAYLOADS.to_vec(),
        ..BenchConfig::default()
    };
    let records = evaluate_corpus(&corpus, &cfg).unwrap();
    let summary = summarize(&records).unwrap();

    let mut cells: BTreeMap<(String, usize), BTreeMap<Method, f64>> = BTreeMap::new();
    for r in &records {
        cells
            .entry((r.image_id.clone(), r.payload_bits))
            .or_default()
            .insert(r.method, r.mse);
    }
    let complete: Vec<_> = cells.values().filter(|m| m.len() == 3).collect();
    let share = |baseline: Method| {
        let wins = complete
            .iter()
            .filter(|m| m[&Method::Threshold] <= m[&baseline])
            .count();
        wins as f64 / complete.len() as f64
    };
    let vs_sobel = share(Method::Sobel);
    let vs_canny = share(Method::Canny);
    println!(
        "    {} complete cells of {}; threshold MSE <= sobel in {:.1}%, <= canny in {:.1}%",
        complete.len(),
        cells.len(),
        100.0 * vs_sobel,
        100.0 * vs_canny
    );

    let mut psnr_ok = true;
    for p in PAYLOADS {
        let row = summary.row(p, Method::Threshold).expect("threshold row");
        let (s, c) = (row.psnr_vs_sobel, row.psnr_vs_canny);
        println!(
            "    payload {p}: mean PSNR improvement vs sobel {:?}%, vs canny {:?}%; MSE improvement vs sobel {:?}%, vs canny {:?}%",
            s, c, row.mse_vs_sobel, row.mse_vs_canny
        );
        psnr_ok &= s.is_some_and(|v| v >= 0.0) && c.is_some_and(|v| v >= 0.0);
    }

    let spot_mse = improvement_pct(0.000060, 0.000054, Better::Lower).unwrap();
    let spot_psnr = improvement_pct(90.400432, 90.820524, Better::Higher).unwrap();
    let spots_ok = (spot_mse - 10.0).abs() < 1e-9 && (spot_psnr - 0.4647).abs() < 5e-5;
    println!("    spot values: MSE {spot_mse:.4}%, PSNR {spot_psnr:.4}%");

    let pass = !complete.is_empty() && vs_sobel >= 0.7 && vs_canny >= 0.7 && psnr_ok && spots_ok;
    report(
        5,
        pass,
        &format!(
            "threshold MSE <= baseline in {:.1}% (sobel) / {:.1}% (canny) of cells (>= 70%), mean PSNR improvement >= 0 at every payload: {psnr_ok}",
            100.0 * vs_sobel,
            100.0 * vs_canny
        ),
    );
    assert!(spots_ok);
    assert!(pass);
}

fn sobel_brute_force(c: &Grid<u8>) -> (Grid<i32>, Grid<i32>) {
    let kx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
    let ky = [[1, 2, 1], [0, 0, 0], [-1, -2, -1]];
    let (w, h) = c.dims();
    let px = |r: isize, col: isize| -> i32 {
        let r = r.clamp(0, h as isize - 1) as usize;
        let col = col.clamp(0, w as isize - 1) as usize;
        *c.get(r, col) as i32
    };
    let apply = |k: [[i32; 3]; 3]| {
        Grid::from_fn(w, h, |r, col| {
            let mut acc = 0;
            for (i, krow) in k.iter().enumerate() {
                for (j, weight) in krow.iter().enumerate() {
                    acc += weight * px(r as isize + i as isize - 1, col as isize + j as isize - 1);
                }
            }
            acc
        })
    };
    (apply(kx), apply(ky))
}

fn gaussian_direct(c: &Grid<u8>, sigma: f64, ksize: usize) -> Vec<f64> {
    let half = (ksize / 2) as isize;
    let (w, h) = c.dims();
    let mut weights = Vec::new();
    for dy in -half..=half {
        for dx in -half..=half {
            weights.push((
                (dy, dx),
                (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp(),
            ));
        }
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h as isize {
        for col in 0..w as isize {
            let mut acc = 0.0;
            for ((dy, dx), wgt) in &weights {
                let rr = (r + dy).clamp(0, h as isize - 1) as usize;
                let cc = (col + dx).clamp(0, w as isize - 1) as usize;
                acc += wgt * *c.get(rr, cc) as f64;
            }
            out.push(acc / total);
        }
    }
    out
}

#[test]
fn criterion_6_convolution_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sobel_ok = true;
    let mut gauss_ok = true;
    for _ in 0..100 {
        let c = Grid::from_fn(16, 16, |_, _| rng.gen::<u8>());
        let f = sobel_gradient(&c);
        let (gx, gy) = sobel_brute_force(&c);
        sobel_ok &= f.gx == gx && f.gy == gy;

        let smooth = gaussian_smooth(&c, 1.4, 5).unwrap();
        let direct = gaussian_direct(&c, 1.4, 5);
        gauss_ok &= smooth
            .as_slice()
            .iter()
            .zip(&direct)
            .all(|(&s, &d)| (s as f64 - d).abs() <= 1.0);
    }

    let step = Grid::from_fn(16, 16, |_, c| if c < 8 { 0u8 } else { 255 });
    let map = canny(&step, &CannyParams::default()).unwrap();
    let columns: Vec<usize> = (0..16)
        .filter(|&c| (0..16).any(|r| *map.get(r, c)))
        .collect();
    let line_ok = columns.len() == 1 && (0..16).all(|r| *map.get(r, columns[0]));

    let flat = canny(&Grid::filled(16, 16, 90u8), &CannyParams::default()).unwrap();
    let flat_ok = flat.as_slice().iter().all(|&f| !f);

    let pass = sobel_ok && gauss_ok && line_ok && flat_ok;
    report(
        6,
        pass,
        &format!(
            "sobel exact on 100 channels: {sobel_ok}; gaussian within 1: {gauss_ok}; step -> one line {columns:?}: {line_ok}; constant -> empty: {flat_ok}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_metric_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut naive_ok = true;
    for _ in 0..200 {
        let (w, h) = (rng.gen_range(1..64), rng.gen_range(1..64));
        let a = Grid::from_fn(w, h, |_, _| rng.gen::<u8>());
        let b = Grid::from_fn(w, h, |_, _| rng.gen::<u8>());
        let mut acc = 0.0;
        for r in 0..h {
            for c in 0..w {
                let d = *a.get(r, c) as f64 - *b.get(r, c) as f64;
                acc += d * d;
            }
        }
        let naive = acc / (w * h) as f64;
        let got = metrics::mse(&a, &b).unwrap();
        naive_ok &= naive == 0.0 && got == 0.0 || ((got - naive) / naive).abs() <= 1e-12;
    }

    let mut count_ok = true;
    let mut checked = 0;
    for (i, (_, img)) in common::desk_corpus(6, 77).iter().enumerate() {
        for method in Method::ALL {
            let opts = EmbedOptions {
                method,
                channel: ChannelId::ALL[i % 3],
                seed: i as u64,
                ..Default::default()
            };
            let message: Vec<u8> = (0..40).map(|_| rng.gen()).collect();
            let out = match pipeline::embed_message(img, &message, &opts) {
                Ok(out) => out,
                Err(StegoError::Capacity { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let (before, after) = (img.channel(opts.channel), out.stego.channel(opts.channel));
            let mse = metrics::mse(&before, &after).unwrap();
            let modified = metrics::count_modified(&before, &after).unwrap();
            let scaled = mse * before.len() as f64;
            count_ok &= (scaled - modified as f64).abs() <= 1e-9 * scaled.max(1.0);
            checked += 1;
        }
    }

    let zero_db = metrics::psnr(65536.0).unwrap();
    let quarter = metrics::psnr(0.25).unwrap();
    let pass =
        naive_ok && count_ok && checked > 0 && zero_db == 0.0 && (quarter - 54.1854).abs() <= 1e-4;
    report(
        7,
        pass,
        &format!(
            "naive mse oracle: {naive_ok}; mse*m*n == modified on {checked} stegos: {count_ok}; psnr(65536) = {zero_db}; psnr(0.25) = {quarter:.6}"
        ),
    );
    assert!(pass);
}

fn random_key(rng: &mut ChaCha8Rng) -> RegionKey {
    let w: u32 = rng.gen_range(2..2000);
    let h: u32 = rng.gen_range(1..2000);
    let mut pairs = Vec::new();
    let mut row = 0usize;
    let mut col = 0usize;
    let n = rng.gen_range(0..64);
    while pairs.len() < n && row < h as usize {
        col += 2 * rng.gen_range(0..4);
        if col + 1 >= w as usize {
            row += rng.gen_range(1..4);
            col = 0;
            continue;
        }
        pairs.push(PairLocus::new(row, col));
        col += 2;
    }
    let pairs: Vec<PairLocus> = pairs.into_iter().filter(|p| p.row < h as usize).collect();
    RegionKey {
        channel: ChannelId::ALL[rng.gen_range(0..3)],
        threshold: rng.gen_range(1..=255),
        message_bit_length: rng.gen_range(0..=2 * pairs.len() as u64),
        image_width: w,
        image_height: h,
        pairs,
    }
}

#[test]
fn criterion_8_key_file_conformance() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut identity_ok = true;
    let mut corruption_ok = true;
    let mut corruptions = 0;
    for i in 0..1000 {
        let key = random_key(&mut rng);
        let bytes = serialize_key(&key);
        identity_ok &= deserialize_key(&bytes).map(|k| k == key).unwrap_or(false);
        // every position for the first keys, random positions afterwards
        let positions: Vec<usize> = if i < 20 {
            (0..bytes.len()).collect()
        } else {
            vec![rng.gen_range(0..bytes.len())]
        };
        for pos in positions {
            let mut bad = bytes.clone();
            bad[pos] ^= rng.gen_range(1..=255u8);
            corruptions += 1;
            corruption_ok &= matches!(deserialize_key(&bad), Err(StegoError::KeyChecksum { .. }));
        }
    }

    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden.key");
    let golden = std::fs::read(fixture).unwrap();
    let expected = RegionKey {
        channel: ChannelId::G,
        threshold: 70,
        message_bit_length: 4,
        image_width: 4,
        image_height: 1,
        pairs: vec![PairLocus::new(0, 0), PairLocus::new(0, 2)],
    };
    let golden_ok =
        serialize_key(&expected) == golden && deserialize_key(&golden).unwrap() == expected;

    let pass = identity_ok && corruption_ok && golden_ok;
    report(
        8,
        pass,
        &format!(
            "1000 key round trips: {identity_ok}; {corruptions} single-byte corruptions rejected by CRC: {corruption_ok}; golden fixture byte-stable: {golden_ok}"
        ),
    );
    assert!(pass);
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_edgestego"))
        .args(args)
        .output()
        .expect("run edgestego");
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn criterion_9_cli_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let mut round_trips = true;
    for (i, ext) in ["png", "bmp"].iter().enumerate() {
        let cover = common::desk_image(90 + i as u64, 120, 96);
        save_image(
            &cover,
            p(&format!("cover.{ext}")),
            if *ext == "png" {
                ImageFormat::Png
            } else {
                ImageFormat::Bmp
            },
        )
        .unwrap();
        for method in ["threshold", "sobel", "canny"] {
            let stego = p(&format!("stego_{method}.{ext}"));
            let key = p(&format!("{method}_{ext}.key"));
            let (code, _) = cli(&[
                "embed",
                "--cover",
                &p(&format!("cover.{ext}")),
                "--stego",
                &stego,
                "--key",
                &key,
                "--message",
                "meet at the usual place",
                "--method",
                method,
                "--channel",
                "g",
            ]);
            let (xcode, msg) = cli(&["extract", "--stego", &stego, "--key", &key]);
            round_trips &= code == 0 && xcode == 0 && msg == b"meet at the usual place";
        }
    }

    let gray = RgbRaster::from_fn(32, 32, |_, _| [128, 128, 128]).unwrap();
    save_image(&gray, p("gray.png"), ImageFormat::Png).unwrap();
    let (gray_code, _) = cli(&[
        "embed",
        "--cover",
        &p("gray.png"),
        "--stego",
        &p("gray_out.png"),
        "--key",
        &p("gray.key"),
        "--message",
        "x",
    ]);

    let mut reruns = true;
    for run in 0..2 {
        let (code, _) = cli(&[
            "embed",
            "--cover",
            &p("cover.png"),
            "--stego",
            &p(&format!("det{run}.png")),
            "--key",
            &p(&format!("det{run}.key")),
            "--message",
            "determinism",
            "--seed",
            "11",
        ]);
        reruns &= code == 0;
    }
    let same = |a: &str, b: &str| std::fs::read(p(a)).unwrap() == std::fs::read(p(b)).unwrap();
    reruns &= same("det0.png", "det1.png") && same("det0.key", "det1.key");

    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    for (id, img) in common::desk_corpus(3, 99) {
        save_image(&img, corpus.join(format!("{id}.png")), ImageFormat::Png).unwrap();
    }
    for run in 0..2 {
        let (code, _) = cli(&[
            "bench",
            "--corpus",
            &corpus.to_string_lossy(),
            "--out",
            &p(&format!("report{run}")),
            "--payloads",
            "400,1200",
        ]);
        reruns &= code == 0;
    }
    reruns &= same("report0/records.csv", "report1/records.csv")
        && same("report0/summary.csv", "report1/summary.csv");

    let pass = round_trips && gray_code == 2 && reruns;
    report(
        9,
        pass,
        &format!(
            "file round trips (png+bmp, 3 methods): {round_trips}; uniform cover exit code {gray_code}; byte-identical reruns: {reruns}"
        ),
    );
    assert!(pass);
}
