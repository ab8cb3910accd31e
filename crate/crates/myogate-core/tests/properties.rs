//! Property tests for the library's guaranteed invariants: windowing arithmetic,
//! feature equivariances, DTW against a brute-force path enumerator, the
//! threshold formula, LDA invariances, ROC/AUC identities, and format
//! round-trips.

use myogate_core::eval::{auc, confusion, roc, GroundTruth, RocPoint, ScorePolarity};
use myogate_core::features::*;
use myogate_core::gate::{GateEvent, GateEventKind};
use myogate_core::lda::{fit, PriorMode};
use myogate_core::session::{parse_session, render_session, Session, SessionHeader};
use myogate_core::signal::{windowize, EmgFrame, Window, WindowSpec};
use myogate_core::wake::{compute_threshold, dtw_distance, Template, VoteState};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn frames_from_rows(rows: &[Vec<f64>]) -> Vec<EmgFrame> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| EmgFrame::new(i as f64 / 200.0, r.clone()))
        .collect()
}

fn window_from_rows(rows: &[Vec<f64>]) -> Window {
    Window::from_frames(&frames_from_rows(rows))
}

fn rows_strategy(min_len: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=3).prop_flat_map(move |channels| {
        prop::collection::vec(
            prop::collection::vec(-10.0f64..10.0, channels..=channels),
            min_len..=16,
        )
    })
}

// --- windowing ---

proptest! {
    #[test]
    fn window_count_formula_holds(total in 0usize..400, length in 1usize..50, inc in 1usize..50) {
        prop_assume!(inc <= length);
        let spec = WindowSpec::new(length, inc).unwrap();
        let frames: Vec<EmgFrame> =
            (0..total).map(|i| EmgFrame::new(i as f64, vec![i as f64])).collect();
        let windows = windowize(&frames, &spec);
        let expected = if total < length { 0 } else { (total - length) / inc + 1 };
        prop_assert_eq!(windows.len(), expected);
        for (k, w) in windows.iter().enumerate() {
            prop_assert_eq!(w.row(0)[0], (k * inc) as f64);
            prop_assert_eq!(w.len(), length);
        }
    }

    #[test]
    fn adjacent_windows_reconstruct_prefix(total in 1usize..200, length in 1usize..20) {
        let spec = WindowSpec::new(length, length).unwrap();
        let frames: Vec<EmgFrame> =
            (0..total).map(|i| EmgFrame::new(i as f64, vec![i as f64 * 3.0])).collect();
        let windows = windowize(&frames, &spec);
        let mut rebuilt = Vec::new();
        for w in &windows {
            for i in 0..w.len() {
                rebuilt.push(w.row(i)[0]);
            }
        }
        let prefix: Vec<f64> =
            frames.iter().take(windows.len() * length).map(|f| f.samples[0]).collect();
        prop_assert_eq!(rebuilt, prefix);
    }
}

// --- features ---

proptest! {
    #[test]
    fn amplitude_features_scale_linearly(rows in rows_strategy(3), c in 0.1f64..50.0) {
        let w = window_from_rows(&rows);
        let scaled_rows: Vec<Vec<f64>> =
            rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        let ws = window_from_rows(&scaled_rows);
        for (a, b) in mav(&w).iter().zip(mav(&ws)) {
            prop_assert!((a * c - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        for (a, b) in rms(&w).iter().zip(rms(&ws)) {
            prop_assert!((a * c - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        for (a, b) in waveform_length(&w).iter().zip(waveform_length(&ws)) {
            prop_assert!((a * c - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        // counts with zero deadband are scale-invariant
        prop_assert_eq!(zero_crossings(&w, 0.0), zero_crossings(&ws, 0.0));
        prop_assert_eq!(slope_sign_changes(&w, 0.0), slope_sign_changes(&ws, 0.0));
    }

    #[test]
    fn features_invariant_under_time_reversal(rows in rows_strategy(3)) {
        let w = window_from_rows(&rows);
        let reversed: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
        let wr = window_from_rows(&reversed);
        // summation order flips, so the float features match to rounding only
        let close = |a: &[f64], b: Vec<f64>| {
            a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12 * (1.0 + x.abs()))
        };
        prop_assert!(close(&mav(&w), mav(&wr)));
        prop_assert!(close(&rms(&w), rms(&wr)));
        prop_assert!(close(&waveform_length(&w), waveform_length(&wr)));
        prop_assert_eq!(zero_crossings(&w, 0.0), zero_crossings(&wr, 0.0));
        prop_assert_eq!(slope_sign_changes(&w, 0.0), slope_sign_changes(&wr, 0.0));
    }

    #[test]
    fn feature_outputs_finite_and_counts_bounded(rows in rows_strategy(3), eps in 0.0f64..2.0) {
        let w = window_from_rows(&rows);
        let l = w.len();
        for v in hudgins_td(&w, eps) {
            prop_assert!(v.is_finite());
        }
        for zc in zero_crossings(&w, eps) {
            prop_assert!(zc < l);
        }
        for ssc in slope_sign_changes(&w, eps) {
            prop_assert!(ssc <= l - 2);
        }
    }
}

// --- DTW against brute-force path enumeration ---

fn frame_cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exhaustive minimum over every monotone warping path; independent of the
/// DP implementation.
fn brute_force_dtw(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn walk(a: &[Vec<f64>], b: &[Vec<f64>], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + frame_cost(&a[i], &b[j]);
        if acc >= *best {
            return; // admissible prune: costs are non-negative
        }
        if i == a.len() - 1 && j == b.len() - 1 {
            *best = acc;
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Two sequences over the same channel count (lengths may differ).
fn template_pair(max_len: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1usize..=3).prop_flat_map(move |channels| {
        let seq = move || {
            prop::collection::vec(
                prop::collection::vec(0.0f64..20.0, channels..=channels),
                1..=max_len,
            )
        };
        (seq(), seq())
    })
}

/// Two sequences of identical shape.
fn equal_shape_pair(max_len: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1usize..=3, 1usize..=max_len).prop_flat_map(move |(channels, len)| {
        let seq = move || {
            prop::collection::vec(
                prop::collection::vec(0.0f64..20.0, channels..=channels),
                len..=len,
            )
        };
        (seq(), seq())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dtw_matches_brute_force((a, b) in template_pair(6)) {
        let ta = Template::new(a.clone(), "a").unwrap();
        let tb = Template::new(b.clone(), "b").unwrap();
        let fast = dtw_distance(&ta, &tb).unwrap();
        let brute = brute_force_dtw(&a, &b);
        prop_assert!((fast - brute).abs() < 1e-9, "dp {fast} vs brute {brute}");
    }

    #[test]
    fn dtw_identity_symmetry_nonnegativity((a, b) in template_pair(8)) {
        let ta = Template::new(a, "a").unwrap();
        let tb = Template::new(b, "b").unwrap();
        prop_assert_eq!(dtw_distance(&ta, &ta).unwrap(), 0.0);
        let ab = dtw_distance(&ta, &tb).unwrap();
        let ba = dtw_distance(&tb, &ta).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-9);
    }

    #[test]
    fn dtw_bounded_by_diagonal_path((a, b) in equal_shape_pair(8)) {
        let diagonal: f64 = a.iter().zip(&b).map(|(x, y)| frame_cost(x, y)).sum();
        let ta = Template::new(a, "a").unwrap();
        let tb = Template::new(b, "b").unwrap();
        prop_assert!(dtw_distance(&ta, &tb).unwrap() <= diagonal + 1e-9);
    }

    #[test]
    fn dtw_appending_repeated_frame_bounded((a, b) in template_pair(5)) {
        let mut b_ext = b.clone();
        b_ext.push(b[b.len() - 1].clone());
        let base = brute_force_dtw(&a, &b);
        let extended = brute_force_dtw(&a, &b_ext);
        let step = frame_cost(&a[a.len() - 1], &b[b.len() - 1]);
        prop_assert!(extended <= base + step + 1e-9);
        // and the DP implementation agrees on the extended input
        let ta = Template::new(a, "a").unwrap();
        let tbe = Template::new(b_ext, "b").unwrap();
        prop_assert!((dtw_distance(&ta, &tbe).unwrap() - extended).abs() < 1e-9);
    }

    #[test]
    fn threshold_translation_covariance(
        d in prop::collection::vec(0.0f64..100.0, 2..40),
        s in -3.0f64..3.0,
        shift in -50.0f64..50.0,
    ) {
        let shifted: Vec<f64> = d.iter().map(|v| v + shift).collect();
        let a = compute_threshold(&d, s);
        let b = compute_threshold(&shifted, s);
        prop_assert!((b - (a + shift)).abs() < 1e-7, "{b} vs {}", a + shift);
    }
}

// --- vote semantics against a naive simulation ---

proptest! {
    #[test]
    fn vote_matches_naive_simulation(
        stream in prop::collection::vec(any::<bool>(), 0..60),
        length in 1usize..8,
        quorum in 1usize..8,
    ) {
        prop_assume!(quorum <= length);
        let mut vote = VoteState::new(length, quorum).unwrap();
        let mut naive_buf: Vec<bool> = Vec::new();
        for &b in &stream {
            let fired = vote.step(b);
            naive_buf.push(b);
            if naive_buf.len() > length {
                naive_buf.remove(0);
            }
            let expected = naive_buf.iter().filter(|&&x| x).count() >= quorum;
            prop_assert_eq!(fired, expected);
            if expected {
                naive_buf.clear();
            }
        }
    }
}

// --- LDA invariances ---

fn gaussian_two_class(seed: u64, d: usize, n: usize, sep: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for class in 0..2 {
        for _ in 0..n {
            x.push(
                (0..d)
                    .map(|j| {
                        let center = if class == 1 && j == 0 { sep } else { 0.0 };
                        center + rng.sample::<f64, _>(rand_distr::StandardNormal)
                    })
                    .collect(),
            );
            y.push(class);
        }
    }
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lda_predictions_invariant_under_affine_maps(
        seed in 0u64..1_000_000,
        a00 in -2.0f64..2.0, a01 in -2.0f64..2.0,
        a10 in -2.0f64..2.0, a11 in -2.0f64..2.0,
        b0 in -10.0f64..10.0, b1 in -10.0f64..10.0,
    ) {
        let det = a00 * a11 - a01 * a10;
        prop_assume!(det.abs() > 0.25);

        let (x, y) = gaussian_two_class(seed, 2, 25, 4.0);
        let apply = |p: &[f64]| vec![a00 * p[0] + a01 * p[1] + b0, a10 * p[0] + a11 * p[1] + b1];
        let x_mapped: Vec<Vec<f64>> = x.iter().map(|p| apply(p)).collect();

        let labels = ["A", "B"];
        let m1 = fit(&x, &y, &labels, 0.0, PriorMode::Empirical).unwrap();
        let m2 = fit(&x_mapped, &y, &labels, 0.0, PriorMode::Empirical).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdead);
        for _ in 0..30 {
            let p: Vec<f64> = (0..2)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal) * 4.0)
                .collect();
            let s1 = m1.discriminants(&p).unwrap();
            let s2 = m2.discriminants(&apply(&p)).unwrap();
            // skip effective ties: float error flips them legitimately
            let gap1 = (s1[0] - s1[1]).abs();
            let gap2 = (s2[0] - s2[1]).abs();
            let scale = s1.iter().chain(&s2).fold(1.0f64, |m, v| m.max(v.abs()));
            if gap1 < 1e-6 * scale || gap2 < 1e-6 * scale {
                continue;
            }
            prop_assert_eq!(m1.predict(&p).unwrap(), m2.predict(&apply(&p)).unwrap());
        }
    }

    #[test]
    fn posterior_monotone_along_mean_segment(seed in 0u64..1_000_000) {
        let (x, y) = gaussian_two_class(seed, 3, 30, 5.0);
        let model = fit(&x, &y, &["A", "B"], 0.0, PriorMode::Uniform).unwrap();
        let mu0 = model.means()[0].clone();
        let mu1 = model.means()[1].clone();
        let mut prev = -1.0;
        for step in 0..=50 {
            let t = step as f64 / 50.0;
            let p: Vec<f64> =
                mu0.iter().zip(&mu1).map(|(a, b)| a + t * (b - a)).collect();
            let posterior = model.posterior(&p).unwrap();
            prop_assert!((posterior.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(posterior[1] >= prev - 1e-12);
            prev = posterior[1];
        }
    }
}

// --- ROC / AUC identities ---

proptest! {
    #[test]
    fn auc_and_reflection_sum_to_one(
        scores in prop::collection::vec((0.0f64..10.0, any::<bool>()), 4..100),
    ) {
        let positives = scores.iter().filter(|(_, p)| *p).count();
        prop_assume!(positives > 0 && positives < scores.len());
        let points = roc(&scores, ScorePolarity::LowerIsPositive).unwrap();
        let area = auc(&points).unwrap();
        prop_assert!((0.0..=1.0).contains(&area));

        let mut reflected: Vec<RocPoint> =
            points.iter().map(|p| RocPoint { fpr: p.tpr, tpr: p.fpr }).collect();
        reflected.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
        let mirror = auc(&reflected).unwrap();
        prop_assert!((area + mirror - 1.0).abs() < 1e-9, "{area} + {mirror}");
    }

    #[test]
    fn confusion_is_order_invariant(
        times in prop::collection::vec(0.0f64..100.0, 0..12),
        seed in 0u64..1000,
    ) {
        let truth = GroundTruth::new(vec![10.0, 30.0, 50.0, 70.0], 1.0).unwrap();
        let events: Vec<GateEvent> = times
            .iter()
            .map(|&t| GateEvent { time: t, kind: GateEventKind::ToggledToInput { score: 0.0 } })
            .collect();
        let mut shuffled = events.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        shuffled.shuffle(&mut rng);
        let a = confusion(&events, &truth, 10_000).unwrap();
        let b = confusion(&shuffled, &truth, 10_000).unwrap();
        prop_assert_eq!(a, b);
    }
}

// --- session format round-trip ---

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_session_files_round_trip(
        rows in prop::collection::vec(prop::collection::vec(-128.0f64..127.0, 2..=2), 1..50),
    ) {
        let frames: Vec<EmgFrame> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| EmgFrame::new(i as f64 / 200.0, r.clone()))
            .collect();
        let session = Session {
            header: SessionHeader { channels: 2, sample_rate_hz: 200.0, units: "raw".into() },
            frames,
        };
        let text = render_session(&session);
        let parsed = parse_session(&text).unwrap();
        prop_assert_eq!(&parsed, &session);
        prop_assert_eq!(render_session(&parsed), text);
    }
}
