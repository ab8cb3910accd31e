//! Per-window feature extraction: the Hudgins time-domain set for the
//! classifier path, per-channel RMS for wake templates.
//!
//! All functions are pure and per-channel. Zero is treated as positive when
//! deciding signs for zero crossings; the `eps` deadband suppresses
//! crossings and slope changes smaller than the given amplitude.

use crate::signal::Window;

fn per_channel<F>(window: &Window, f: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    (0..window.channels())
        .map(|c| {
            let xs: Vec<f64> = window.channel(c).collect();
            f(&xs)
        })
        .collect()
}

/// Mean absolute value per channel.
pub fn mav(window: &Window) -> Vec<f64> {
    assert!(!window.is_empty(), "mav requires a non-empty window");
    per_channel(window, |xs| {
        xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64
    })
}

/// Mean of the per-channel MAVs; the effort proxy used for proportional speed.
pub fn mean_mav(window: &Window) -> f64 {
    let m = mav(window);
    m.iter().sum::<f64>() / m.len() as f64
}

fn sign_positive(x: f64) -> bool {
    x >= 0.0
}

/// Sign-change count per channel, with crossings of amplitude < eps ignored.
pub fn zero_crossings(window: &Window, eps: f64) -> Vec<usize> {
    assert!(eps >= 0.0, "deadband must be non-negative");
    assert!(
        !window.is_empty(),
        "zero_crossings requires a non-empty window"
    );
    (0..window.channels())
        .map(|c| {
            let xs: Vec<f64> = window.channel(c).collect();
            xs.windows(2)
                .filter(|p| {
                    sign_positive(p[0]) != sign_positive(p[1]) && (p[0] - p[1]).abs() >= eps
                })
                .count()
        })
        .collect()
}

/// Local-extremum count per channel, with slope pairs below eps ignored.
pub fn slope_sign_changes(window: &Window, eps: f64) -> Vec<usize> {
    assert!(eps >= 0.0, "deadband must be non-negative");
    assert!(
        window.len() >= 3,
        "slope_sign_changes requires at least 3 samples"
    );
    (0..window.channels())
        .map(|c| {
            let xs: Vec<f64> = window.channel(c).collect();
            (1..xs.len() - 1)
                .filter(|&i| {
                    let back = xs[i] - xs[i - 1];
                    let fwd = xs[i] - xs[i + 1];
                    back * fwd > 0.0 && back.abs().max(fwd.abs()) >= eps
                })
                .count()
        })
        .collect()
}

/// Cumulative absolute increment per channel.
pub fn waveform_length(window: &Window) -> Vec<f64> {
    assert!(
        window.len() >= 2,
        "waveform_length requires at least 2 samples"
    );
    per_channel(window, |xs| {
        xs.windows(2).map(|p| (p[1] - p[0]).abs()).sum()
    })
}

/// Root mean square per channel.
pub fn rms(window: &Window) -> Vec<f64> {
    assert!(!window.is_empty(), "rms requires a non-empty window");
    per_channel(window, |xs| {
        (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
    })
}

/// Hudgins time-domain feature vector: `[MAV | ZC | SSC | WL]`, channel-major
/// within each block. Length is 4 × channel count.
pub fn hudgins_td(window: &Window, eps: f64) -> Vec<f64> {
    assert!(window.len() >= 3, "hudgins_td requires at least 3 samples");
    let mut out = Vec::with_capacity(4 * window.channels());
    out.extend(mav(window));
    out.extend(zero_crossings(window, eps).into_iter().map(|n| n as f64));
    out.extend(
        slope_sign_changes(window, eps)
            .into_iter()
            .map(|n| n as f64),
    );
    out.extend(waveform_length(window));
    out
}
