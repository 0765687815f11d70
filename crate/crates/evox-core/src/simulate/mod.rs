//! Event-stream simulation from grayscale frame sequences.
//!
//! Pixels of an event camera respond to changes in log brightness: an event
//! fires whenever the per-pixel log intensity drifts a full contrast
//! threshold away from the pixel's reference level. This module models that
//! process on a piecewise-linear log signal reconstructed from frame samples,
//! emitting polarity-signed events at interpolated crossing times.

mod scene;
pub mod reference;

pub use scene::{scene_flow, synth_scene, SceneError, SceneKind, SceneSpec};

use ndarray::Array2;
use thiserror::Error;

/// Sign of a brightness change. Never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(i8)]
pub enum Polarity {
    /// Log brightness decreased past the negative threshold.
    Neg = -1,
    /// Log brightness increased past the positive threshold.
    Pos = 1,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        self as i8
    }

    pub fn from_i8(v: i8) -> Option<Polarity> {
        match v {
            -1 => Some(Polarity::Neg),
            1 => Some(Polarity::Pos),
            _ => None,
        }
    }
}

/// A single brightness-change record: pixel location, microsecond timestamp,
/// and polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    /// Timestamp in microseconds.
    pub t: u64,
    pub p: Polarity,
}

impl Event {
    /// Canonical sort key: (t, y, x, p) ascending, Neg before Pos.
    fn key(&self) -> (u64, u16, u16, i8) {
        (self.t, self.y, self.x, self.p.sign())
    }
}

/// A time-sorted event sequence with its sensor geometry and time span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    events: Vec<Event>,
    width: u32,
    height: u32,
    t_start: u64,
    t_end: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("event {index} at ({x}, {y}) is outside the {width}x{height} sensor")]
    CoordOutOfRange {
        index: usize,
        x: u16,
        y: u16,
        width: u32,
        height: u32,
    },
    #[error("event {index} at t={t} lies outside the stream span [{t_start}, {t_end}]")]
    TimestampOutOfSpan {
        index: usize,
        t: u64,
        t_start: u64,
        t_end: u64,
    },
    #[error("events {} and {} violate canonical (t, y, x, p) order", index - 1, index)]
    NotCanonical { index: usize },
    #[error("stream span is inverted: t_start={t_start} > t_end={t_end}")]
    InvertedSpan { t_start: u64, t_end: u64 },
}

impl EventStream {
    /// Builds a stream, validating geometry, span, and canonical order.
    pub fn new(
        events: Vec<Event>,
        width: u32,
        height: u32,
        t_start: u64,
        t_end: u64,
    ) -> Result<EventStream, StreamError> {
        if t_start > t_end {
            return Err(StreamError::InvertedSpan { t_start, t_end });
        }
        for (index, e) in events.iter().enumerate() {
            if u32::from(e.x) >= width || u32::from(e.y) >= height {
                return Err(StreamError::CoordOutOfRange {
                    index,
                    x: e.x,
                    y: e.y,
                    width,
                    height,
                });
            }
            if e.t < t_start || e.t > t_end {
                return Err(StreamError::TimestampOutOfSpan {
                    index,
                    t: e.t,
                    t_start,
                    t_end,
                });
            }
            if index > 0 && events[index - 1].key() > e.key() {
                return Err(StreamError::NotCanonical { index });
            }
        }
        Ok(EventStream {
            events,
            width,
            height,
            t_start,
            t_end,
        })
    }

    /// Like [`EventStream::new`] but sorts the events into canonical order
    /// first.
    pub fn from_unsorted(
        mut events: Vec<Event>,
        width: u32,
        height: u32,
        t_start: u64,
        t_end: u64,
    ) -> Result<EventStream, StreamError> {
        events.sort_unstable_by_key(Event::key);
        EventStream::new(events, width, height, t_start, t_end)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn t_start(&self) -> u64 {
        self.t_start
    }

    pub fn t_end(&self) -> u64 {
        self.t_end
    }

    /// Signed polarity sum over all events.
    pub fn polarity_sum(&self) -> i64 {
        self.events.iter().map(|e| i64::from(e.p.sign())).sum()
    }
}

/// Grayscale intensity frames with strictly increasing microsecond
/// timestamps. Intensities live in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Array2<f64>>,
    timestamps: Vec<u64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("frame sequence must contain at least one frame")]
    Empty,
    #[error("{frames} frames but {timestamps} timestamps")]
    LengthMismatch { frames: usize, timestamps: usize },
    #[error("timestamps not strictly increasing at index {index} ({prev} -> {next})")]
    NonMonotoneTimestamps { index: usize, prev: u64, next: u64 },
    #[error("frame {index} is {got_h}x{got_w}, expected {h}x{w}")]
    GeometryMismatch {
        index: usize,
        got_h: usize,
        got_w: usize,
        h: usize,
        w: usize,
    },
    #[error("frame {frame} pixel ({x}, {y}) holds non-finite value {value}")]
    NonFinitePixel {
        frame: usize,
        x: usize,
        y: usize,
        value: f64,
    },
    #[error("frame {frame} pixel ({x}, {y}) value {value} outside [0, 1]")]
    PixelOutOfRange {
        frame: usize,
        x: usize,
        y: usize,
        value: f64,
    },
}

impl FrameSequence {
    pub fn new(frames: Vec<Array2<f64>>, timestamps: Vec<u64>) -> Result<FrameSequence, FrameError> {
        if frames.is_empty() {
            return Err(FrameError::Empty);
        }
        if frames.len() != timestamps.len() {
            return Err(FrameError::LengthMismatch {
                frames: frames.len(),
                timestamps: timestamps.len(),
            });
        }
        let (h, w) = frames[0].dim();
        for (index, f) in frames.iter().enumerate() {
            let (got_h, got_w) = f.dim();
            if (got_h, got_w) != (h, w) {
                return Err(FrameError::GeometryMismatch {
                    index,
                    got_h,
                    got_w,
                    h,
                    w,
                });
            }
            for ((y, x), &v) in f.indexed_iter() {
                if !v.is_finite() {
                    return Err(FrameError::NonFinitePixel {
                        frame: index,
                        x,
                        y,
                        value: v,
                    });
                }
                if !(0.0..=1.0).contains(&v) {
                    return Err(FrameError::PixelOutOfRange {
                        frame: index,
                        x,
                        y,
                        value: v,
                    });
                }
            }
        }
        for index in 1..timestamps.len() {
            if timestamps[index] <= timestamps[index - 1] {
                return Err(FrameError::NonMonotoneTimestamps {
                    index,
                    prev: timestamps[index - 1],
                    next: timestamps[index],
                });
            }
        }
        Ok(FrameSequence { frames, timestamps })
    }

    pub fn frames(&self) -> &[Array2<f64>] {
        &self.frames
    }

    pub fn timestamps(&self) -> &[u64] {
        &self.timestamps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// (height, width) of every frame.
    pub fn geometry(&self) -> (usize, usize) {
        self.frames[0].dim()
    }
}

/// Contrast thresholds and timing knobs for the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatorConfig {
    /// Positive contrast threshold in log units. Must be > 0.
    pub c_pos: f64,
    /// Negative contrast threshold in log units (magnitude). Must be > 0.
    pub c_neg: f64,
    /// Per-pixel dead time after an event, in microseconds.
    pub refractory_us: u64,
    /// Additive floor applied before the log so black pixels stay finite.
    pub log_eps: f64,
    /// Cap on interpolated frames inserted per inter-frame gap.
    pub max_interp: u32,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        SimulatorConfig {
            c_pos: 0.15,
            c_neg: 0.15,
            refractory_us: 0,
            log_eps: 1e-3,
            max_interp: 16,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimulateError {
    #[error("pixel ({x}, {y}) holds non-finite value {value}")]
    NonFiniteInput { x: usize, y: usize, value: f64 },
    #[error("pixel ({x}, {y}) value {value} outside [0, 1]")]
    InputOutOfRange { x: usize, y: usize, value: f64 },
    #[error("invalid simulator config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Frames(#[from] FrameError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

fn check_config(cfg: &SimulatorConfig) -> Result<(), SimulateError> {
    if !(cfg.c_pos > 0.0 && cfg.c_pos.is_finite()) {
        return Err(SimulateError::BadConfig(format!(
            "c_pos must be a positive finite value, got {}",
            cfg.c_pos
        )));
    }
    if !(cfg.c_neg > 0.0 && cfg.c_neg.is_finite()) {
        return Err(SimulateError::BadConfig(format!(
            "c_neg must be a positive finite value, got {}",
            cfg.c_neg
        )));
    }
    if !(cfg.log_eps > 0.0 && cfg.log_eps.is_finite()) {
        return Err(SimulateError::BadConfig(format!(
            "log_eps must be a positive finite value, got {}",
            cfg.log_eps
        )));
    }
    Ok(())
}

/// Elementwise `ln(I + log_eps)` of an intensity frame.
///
/// Strictly monotone in the input, so threshold-crossing counts computed on
/// the output reflect intensity contrast ratios.
pub fn log_intensity(frame: &Array2<f64>, log_eps: f64) -> Result<Array2<f64>, SimulateError> {
    if !(log_eps > 0.0 && log_eps.is_finite()) {
        return Err(SimulateError::BadConfig(format!(
            "log_eps must be a positive finite value, got {log_eps}"
        )));
    }
    for ((y, x), &v) in frame.indexed_iter() {
        if !v.is_finite() {
            return Err(SimulateError::NonFiniteInput { x, y, value: v });
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(SimulateError::InputOutOfRange { x, y, value: v });
        }
    }
    Ok(frame.mapv(|v| (v + log_eps).ln()))
}

/// Inserts log-linearly interpolated frames between consecutive samples so
/// that no single gap spans more than one contrast threshold per step.
///
/// The insertion count per gap is
/// `min(max_interp, ceil(max_u |dL(u)| / min(c_pos, c_neg)) - 1)`, further
/// capped so inserted integer timestamps stay strictly increasing.
/// Interpolation is linear in log space and mapped back to intensity, which
/// leaves the piecewise-linear log signal (and hence every threshold
/// crossing) unchanged.
pub fn adaptive_upsample(
    seq: &FrameSequence,
    cfg: &SimulatorConfig,
) -> Result<FrameSequence, SimulateError> {
    check_config(cfg)?;
    if seq.len() < 2 {
        return Ok(seq.clone());
    }
    let c_min = cfg.c_pos.min(cfg.c_neg);
    let mut frames: Vec<Array2<f64>> = Vec::with_capacity(seq.len());
    let mut timestamps: Vec<u64> = Vec::with_capacity(seq.len());

    let logs: Vec<Array2<f64>> = seq
        .frames()
        .iter()
        .map(|f| log_intensity(f, cfg.log_eps))
        .collect::<Result<_, _>>()?;

    for i in 0..seq.len() - 1 {
        frames.push(seq.frames()[i].clone());
        timestamps.push(seq.timestamps()[i]);

        let max_dl = logs[i]
            .iter()
            .zip(logs[i + 1].iter())
            .map(|(a, b)| (b - a).abs())
            .fold(0.0_f64, f64::max);
        let wanted = ((max_dl / c_min).ceil() as i64 - 1).max(0) as u64;
        let gap = seq.timestamps()[i + 1] - seq.timestamps()[i];
        // gap - 1 keeps the interpolated integer timestamps distinct.
        let n = wanted.min(u64::from(cfg.max_interp)).min(gap.saturating_sub(1));

        for j in 1..=n {
            let alpha = j as f64 / (n + 1) as f64;
            let t = seq.timestamps()[i] as f64 + alpha * gap as f64;
            let interp = ndarray::Zip::from(&logs[i])
                .and(&logs[i + 1])
                .map_collect(|&a, &b| {
                    let l = a + alpha * (b - a);
                    (l.exp() - cfg.log_eps).clamp(0.0, 1.0)
                });
            frames.push(interp);
            timestamps.push(t.round() as u64);
        }
    }
    frames.push(seq.frames()[seq.len() - 1].clone());
    timestamps.push(seq.timestamps()[seq.len() - 1]);

    FrameSequence::new(frames, timestamps).map_err(SimulateError::from)
}

/// Per-pixel integrate-and-fire state shared by the analytic simulator.
struct PixelState {
    l_ref: f64,
    /// Pixel is sensitive at integer times t >= dead_until.
    dead_until: u64,
}

/// Generates the event stream for one pixel's piecewise-linear log signal.
///
/// Each crossing of `l_ref + c_pos` (resp. `l_ref - c_neg`) emits an event at
/// the interpolated crossing time (rounded half-up to integer microseconds),
/// jumps `l_ref` to the crossed level, and arms the refractory window from
/// the rounded emission time. Crossings that fall inside a dead window fire
/// at the window's end if the signal still sits past the threshold there.
fn pixel_events(
    timestamps: &[u64],
    levels: &[f64],
    cfg: &SimulatorConfig,
    out: &mut Vec<(u64, Polarity)>,
) {
    let mut st = PixelState {
        l_ref: levels[0],
        dead_until: timestamps[0],
    };
    for i in 0..timestamps.len() - 1 {
        let (ta, tb) = (timestamps[i], timestamps[i + 1]);
        let (la, lb) = (levels[i], levels[i + 1]);
        let span = (tb - ta) as f64;
        let slope_up = lb > la;
        loop {
            let t_live = st.dead_until.max(ta);
            if t_live > tb {
                break;
            }
            // Exact sample values at segment endpoints; interpolate inside.
            let l_live = if t_live == ta {
                la
            } else if t_live == tb {
                lb
            } else {
                la + (lb - la) * ((t_live - ta) as f64 / span)
            };
            // An event pending from a dead window fires the moment the pixel
            // becomes sensitive again, provided the signal still qualifies.
            if l_live >= st.l_ref + cfg.c_pos {
                out.push((t_live, Polarity::Pos));
                st.l_ref += cfg.c_pos;
                st.dead_until = t_live + cfg.refractory_us;
                continue;
            }
            if l_live <= st.l_ref - cfg.c_neg {
                out.push((t_live, Polarity::Neg));
                st.l_ref -= cfg.c_neg;
                st.dead_until = t_live + cfg.refractory_us;
                continue;
            }
            // Otherwise look for the next in-segment crossing in the slope
            // direction.
            let (threshold, p) = if slope_up {
                (st.l_ref + cfg.c_pos, Polarity::Pos)
            } else {
                (st.l_ref - cfg.c_neg, Polarity::Neg)
            };
            let reached = if slope_up {
                lb >= threshold
            } else {
                lb <= threshold
            };
            if !reached {
                break;
            }
            let frac = (threshold - la) / (lb - la);
            let t_cross = ta as f64 + frac.clamp(0.0, 1.0) * span;
            let te = t_cross.round() as u64;
            out.push((te, p));
            st.l_ref = threshold;
            st.dead_until = te + cfg.refractory_us;
        }
    }
}

/// Simulates an event stream from a frame sequence.
///
/// Per pixel, the log intensity is treated as piecewise linear between frame
/// samples; threshold crossings against a moving reference level become
/// events (see [`pixel_events`]). The result is in canonical (t, y, x, p)
/// order, with the stream span equal to the first/last frame timestamps.
pub fn simulate_events(
    seq: &FrameSequence,
    cfg: &SimulatorConfig,
) -> Result<EventStream, SimulateError> {
    check_config(cfg)?;
    let (h, w) = seq.geometry();
    let t_start = seq.timestamps()[0];
    let t_end = *seq.timestamps().last().unwrap();

    if seq.len() == 1 {
        return Ok(EventStream::new(Vec::new(), w as u32, h as u32, t_start, t_end).unwrap());
    }

    let logs: Vec<Array2<f64>> = seq
        .frames()
        .iter()
        .map(|f| log_intensity(f, cfg.log_eps))
        .collect::<Result<_, _>>()?;

    let mut events: Vec<Event> = Vec::new();
    let mut levels = vec![0.0_f64; seq.len()];
    let mut per_pixel: Vec<(u64, Polarity)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            for (i, l) in logs.iter().enumerate() {
                levels[i] = l[(y, x)];
            }
            per_pixel.clear();
            pixel_events(seq.timestamps(), &levels, cfg, &mut per_pixel);
            events.extend(per_pixel.iter().map(|&(t, p)| Event {
                x: x as u16,
                y: y as u16,
                t,
                p,
            }));
        }
    }
    EventStream::from_unsorted(events, w as u32, h as u32, t_start, t_end)
        .map_err(SimulateError::from)
}

#[cfg(test)]
mod tests;
