//! Moving-bar stimuli on a 16x16 grid, eight directions 45 degrees apart.
//!
//! A bar is the set of cells whose projection onto the motion direction
//! falls inside a `width`-cell window; the window advances `speed` cells per
//! frame and wraps around the grid. Diagonal bars are exact 45 degree lines
//! on the wrapped grid, so every direction lights the same number of pixels
//! (`16 * width`) in every frame and has a period of `16 / gcd(16, speed)`
//! frames.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Simulation;
use crate::polycode::{Detector, PolycodeDetector, RegistrationCounts};

pub const GRID: usize = 16;
pub const GRID_PIXELS: usize = GRID * GRID;
pub const N_DIRECTIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DirectionId(u8);

impl DirectionId {
    pub fn new(index: usize) -> Option<Self> {
        (index < N_DIRECTIONS).then_some(DirectionId(index as u8))
    }

    pub fn all() -> impl Iterator<Item = DirectionId> {
        (0..N_DIRECTIONS as u8).map(DirectionId)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn angle_deg(self) -> u32 {
        u32::from(self.0) * 45
    }

    pub fn opposite(self) -> Self {
        DirectionId((self.0 + 4) % N_DIRECTIONS as u8)
    }
}

impl fmt::Display for DirectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}deg", self.angle_deg())
    }
}

/// 16x16 intensities in `[0, 1]`, row-major, row 0 at the top.
#[derive(Clone, PartialEq)]
pub struct StimulusFrame {
    pixels: [f64; GRID_PIXELS],
}

impl fmt::Debug for StimulusFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "StimulusFrame")?;
        for r in 0..GRID {
            let line: String = (0..GRID)
                .map(|c| if self.get(r, c) > 0.5 { '#' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl StimulusFrame {
    pub fn blank() -> Self {
        StimulusFrame {
            pixels: [0.0; GRID_PIXELS],
        }
    }

    pub fn filled(value: f64) -> Result<Self> {
        let f = StimulusFrame {
            pixels: [value; GRID_PIXELS],
        };
        f.validate()?;
        Ok(f)
    }

    pub fn from_pixels(pixels: &[f64]) -> Result<Self> {
        let pixels: [f64; GRID_PIXELS] = pixels
            .try_into()
            .map_err(|_| Error::Input(format!("frame needs {GRID_PIXELS} pixels, got {}", pixels.len())))?;
        let f = StimulusFrame { pixels };
        f.validate()?;
        Ok(f)
    }

    pub fn pixels(&self) -> &[f64; GRID_PIXELS] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * GRID + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= GRID || col >= GRID {
            return Err(Error::Input(format!("pixel ({row}, {col}) outside the grid")));
        }
        check_pixel(value)?;
        self.pixels[row * GRID + col] = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.pixels.iter().try_for_each(|&p| check_pixel(p))
    }

    pub fn lit(&self) -> usize {
        self.pixels.iter().filter(|&&p| p > 0.0).count()
    }

    /// Reflection about the vertical axis (column `c` -> `15 - c`).
    pub fn mirror_columns(&self) -> Self {
        self.map_cells(|r, c| (r, GRID - 1 - c))
    }

    /// Reflection through the grid centre.
    pub fn point_reflect(&self) -> Self {
        self.map_cells(|r, c| (GRID - 1 - r, GRID - 1 - c))
    }

    fn map_cells(&self, f: impl Fn(usize, usize) -> (usize, usize)) -> Self {
        let mut out = StimulusFrame::blank();
        for r in 0..GRID {
            for c in 0..GRID {
                let (r2, c2) = f(r, c);
                out.pixels[r2 * GRID + c2] = self.get(r, c);
            }
        }
        out
    }

    /// Binary greyscale PGM (P5, maxval 255).
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P5\n{GRID} {GRID}\n255\n")?;
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| (p * 255.0).round() as u8)
            .collect();
        w.write_all(&bytes)?;
        Ok(())
    }
}

fn check_pixel(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Input(format!("pixel value {p} outside [0, 1]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarGeometry {
    /// Bar thickness in cells.
    pub width: usize,
    /// Cells advanced per frame.
    pub speed: usize,
}

impl Default for BarGeometry {
    fn default() -> Self {
        BarGeometry { width: 1, speed: 1 }
    }
}

impl BarGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > GRID {
            return Err(Error::config("bar_width", format!("must be in 1..={GRID}")));
        }
        Ok(())
    }

    /// Frames until the bar pattern repeats.
    pub fn period_frames(&self) -> usize {
        let speed = self.speed % GRID;
        if speed == 0 {
            1
        } else {
            GRID / gcd(GRID, speed)
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Projection of cell `(r, c)` onto the motion direction, shifted so that
/// phase 0 puts the bar at the trailing edge of the grid.
fn projection(direction: DirectionId, r: usize, c: usize) -> usize {
    let m = GRID - 1;
    match direction.index() {
        0 => c,
        1 => c + (m - r),
        2 => m - r,
        3 => (m - c) + (m - r),
        4 => m - c,
        5 => (m - c) + r,
        6 => r,
        7 => c + r,
        _ => unreachable!("direction index < 8"),
    }
}

pub fn render_frame(direction: DirectionId, phase: usize, geometry: &BarGeometry) -> StimulusFrame {
    let offset = (phase * geometry.speed) % GRID;
    let mut frame = StimulusFrame::blank();
    for r in 0..GRID {
        for c in 0..GRID {
            let q = (projection(direction, r, c) + GRID - offset) % GRID;
            if q < geometry.width {
                frame.pixels[r * GRID + c] = 1.0;
            }
        }
    }
    frame
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StimulusConfig {
    pub frame_hold_ms: u64,
    #[serde(flatten)]
    pub geometry: BarGeometry,
}

impl Default for StimulusConfig {
    fn default() -> Self {
        StimulusConfig {
            frame_hold_ms: 30,
            geometry: BarGeometry::default(),
        }
    }
}

impl StimulusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_hold_ms == 0 {
            return Err(Error::config("frame_hold_ms", "must be positive"));
        }
        self.geometry.validate()
    }

    /// One full traversal of the grid.
    pub fn cycle_ms(&self) -> u64 {
        self.geometry.period_frames() as u64 * self.frame_hold_ms
    }
}

/// One direction shown for `total_duration_ms`. A duration that is not a
/// whole number of frame holds ends with a shortened last frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresentationSchedule {
    pub direction: DirectionId,
    pub total_duration_ms: u64,
    pub stimulus: StimulusConfig,
}

impl PresentationSchedule {
    pub fn new(direction: DirectionId, total_duration_ms: u64, stimulus: StimulusConfig) -> Self {
        PresentationSchedule {
            direction,
            total_duration_ms,
            stimulus,
        }
    }

    /// Frame shown at local millisecond `t`.
    pub fn phase_at(&self, t: u64) -> usize {
        (t / self.stimulus.frame_hold_ms) as usize
    }
}

/// Injects the scheduled frames and steps the network once per millisecond.
/// `on_step` sees the local time and the detector after every step.
pub fn drive<D: Detector>(
    sim: &mut Simulation<'_>,
    detector: &mut D,
    schedule: &PresentationSchedule,
    mut on_step: impl FnMut(u64, &D),
) -> Result<()> {
    schedule.stimulus.validate()?;
    let period = schedule.stimulus.geometry.period_frames();
    let frames: Vec<StimulusFrame> = (0..period)
        .map(|p| render_frame(schedule.direction, p, &schedule.stimulus.geometry))
        .collect();
    for local in 0..schedule.total_duration_ms {
        let frame = &frames[schedule.phase_at(local) % period];
        sim.inject_input(frame)?;
        sim.step(detector)?;
        on_step(local, detector);
    }
    Ok(())
}

/// Registrations per simulated second of one presentation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PresentationStats {
    pub per_second: Vec<RegistrationCounts>,
    pub spikes: u64,
    pub steps: u64,
}

impl PresentationStats {
    pub fn totals(&self) -> RegistrationCounts {
        self.per_second
            .iter()
            .fold(RegistrationCounts::default(), |acc, c| RegistrationCounts {
                novel: acc.novel + c.novel,
                repeating: acc.repeating + c.repeating,
            })
    }
}

/// [`drive`] with per-second novel/repeating registration counts. A
/// trailing partial second gets its own bin.
pub fn run_presentation(
    sim: &mut Simulation<'_>,
    detector: &mut PolycodeDetector,
    schedule: &PresentationSchedule,
) -> Result<PresentationStats> {
    let mut stats = PresentationStats::default();
    let spikes_before = sim.total_spikes();
    let mut mark = detector.counts();
    let total = schedule.total_duration_ms;
    drive(sim, detector, schedule, |local, det| {
        if (local + 1) % 1000 == 0 || local + 1 == total {
            let now = det.counts();
            stats.per_second.push(now.since(mark));
            mark = now;
        }
    })?;
    stats.spikes = sim.total_spikes() - spikes_before;
    stats.steps = total;
    Ok(stats)
}
