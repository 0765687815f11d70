//! Brute-force fixed-step reference simulator.
//!
//! Walks the piecewise-linear log signal in 1 microsecond steps and fires
//! events by direct level comparison, with no crossing-time interpolation.
//! It is deliberately slow and structurally independent of
//! [`simulate_events`](super::simulate_events); the fast path is verified
//! against it: per-pixel counts and polarities must match exactly and
//! timestamps within 1 microsecond.

use super::{log_intensity, Event, EventStream, FrameSequence, Polarity, SimulatorConfig};

/// Per-pixel event list from the 1 us fixed-step walk.
pub fn fixed_step_pixel(
    timestamps: &[u64],
    levels: &[f64],
    cfg: &SimulatorConfig,
) -> Vec<(u64, Polarity)> {
    let mut out = Vec::new();
    if timestamps.len() < 2 {
        return out;
    }
    let mut l_ref = levels[0];
    let mut dead_until = timestamps[0];
    let mut seg = 0usize;
    let t_end = *timestamps.last().unwrap();
    let mut t = timestamps[0];
    while t <= t_end {
        while seg + 2 < timestamps.len() && t >= timestamps[seg + 1] {
            seg += 1;
        }
        // Exact sample values at segment endpoints; interpolate inside.
        let (ta, tb) = (timestamps[seg], timestamps[seg + 1]);
        let l = if t == ta {
            levels[seg]
        } else if t == tb {
            levels[seg + 1]
        } else {
            let frac = (t - ta) as f64 / (tb - ta) as f64;
            levels[seg] + (levels[seg + 1] - levels[seg]) * frac
        };
        if t >= dead_until {
            loop {
                if t < dead_until {
                    break;
                }
                if l >= l_ref + cfg.c_pos {
                    out.push((t, Polarity::Pos));
                    l_ref += cfg.c_pos;
                    dead_until = t + cfg.refractory_us;
                } else if l <= l_ref - cfg.c_neg {
                    out.push((t, Polarity::Neg));
                    l_ref -= cfg.c_neg;
                    dead_until = t + cfg.refractory_us;
                } else {
                    break;
                }
            }
        }
        t += 1;
    }
    out
}

/// Full-frame fixed-step simulation in canonical order.
pub fn fixed_step_events(
    seq: &FrameSequence,
    cfg: &SimulatorConfig,
) -> Result<EventStream, super::SimulateError> {
    let (h, w) = seq.geometry();
    let t_start = seq.timestamps()[0];
    let t_end = *seq.timestamps().last().unwrap();
    if seq.len() == 1 {
        return Ok(EventStream::new(Vec::new(), w as u32, h as u32, t_start, t_end).unwrap());
    }
    let logs: Vec<ndarray::Array2<f64>> = seq
        .frames()
        .iter()
        .map(|f| log_intensity(f, cfg.log_eps))
        .collect::<Result<_, _>>()?;
    let mut events = Vec::new();
    let mut levels = vec![0.0_f64; seq.len()];
    for y in 0..h {
        for x in 0..w {
            for (i, l) in logs.iter().enumerate() {
                levels[i] = l[(y, x)];
            }
            for (t, p) in fixed_step_pixel(seq.timestamps(), &levels, cfg) {
                events.push(Event {
                    x: x as u16,
                    y: y as u16,
                    t,
                    p,
                });
            }
        }
    }
    EventStream::from_unsorted(events, w as u32, h as u32, t_start, t_end)
        .map_err(super::SimulateError::from)
}

/// Compares a stream against the fixed-step reference on the same input.
///
/// Returns an error string naming the first disagreeing pixel. Counts and
/// polarity sequences must match exactly; paired timestamps may differ by at
/// most 1 us (the reference quantizes crossings up to the next step).
pub fn check_against_reference(
    seq: &FrameSequence,
    cfg: &SimulatorConfig,
    fast: &EventStream,
) -> Result<(), String> {
    let slow = fixed_step_events(seq, cfg).map_err(|e| e.to_string())?;
    let (h, w) = seq.geometry();
    let mut fast_px: Vec<Vec<(u64, Polarity)>> = vec![Vec::new(); h * w];
    let mut slow_px: Vec<Vec<(u64, Polarity)>> = vec![Vec::new(); h * w];
    for e in fast.events() {
        fast_px[e.y as usize * w + e.x as usize].push((e.t, e.p));
    }
    for e in slow.events() {
        slow_px[e.y as usize * w + e.x as usize].push((e.t, e.p));
    }
    // Match per pixel and per polarity: both lists are already time-ordered,
    // so pairing index-by-index compares the i-th crossing of each sign.
    let split = |px: &[(u64, Polarity)]| -> (Vec<u64>, Vec<u64>) {
        let pos = px.iter().filter(|e| e.1 == Polarity::Pos).map(|e| e.0);
        let neg = px.iter().filter(|e| e.1 == Polarity::Neg).map(|e| e.0);
        (pos.collect(), neg.collect())
    };
    for y in 0..h {
        for x in 0..w {
            let (fp, fnn) = split(&fast_px[y * w + x]);
            let (sp, sn) = split(&slow_px[y * w + x]);
            for (name, f, s) in [("+1", &fp, &sp), ("-1", &fnn, &sn)] {
                if f.len() != s.len() {
                    return Err(format!(
                        "pixel ({x}, {y}): {} {name} events vs reference {}",
                        f.len(),
                        s.len()
                    ));
                }
                for (i, (tf, ts)) in f.iter().zip(s.iter()).enumerate() {
                    if tf.abs_diff(*ts) > 1 {
                        return Err(format!(
                            "pixel ({x}, {y}) {name} event {i}: t={tf} vs reference t={ts} (>1 us apart)"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}
