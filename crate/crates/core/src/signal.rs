//! Force-plate preprocessing: zero forces outside foot contact, lowpass
//! with a Butterworth filter, and decimate to the marker rate.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::VERTICAL_AXIS;
use crate::error::{invalid, Result};

/// Three-axis force samples, newtons. Contact intervals are inclusive
/// `(start, end)` sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSeries {
    pub sample_rate: f64,
    pub samples: Vec<Vector3<f64>>,
    pub contact_intervals: Vec<(usize, usize)>,
}

impl ForceSeries {
    pub fn new(sample_rate: f64, samples: Vec<Vector3<f64>>) -> Self {
        Self { sample_rate, samples, contact_intervals: Vec::new() }
    }

    pub fn with_contacts(mut self, intervals: Vec<(usize, usize)>) -> Self {
        self.contact_intervals = intervals;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn axis(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[axis]).collect()
    }

    fn validate_intervals(&self) -> Result<()> {
        let mut prev_end: Option<usize> = None;
        for &(s, e) in &self.contact_intervals {
            if s > e || e >= self.samples.len() {
                return Err(invalid(format!(
                    "contact interval ({s}, {e}) is malformed for {} samples",
                    self.samples.len()
                )));
            }
            if prev_end.is_some_and(|p| s <= p) {
                return Err(invalid("contact intervals must be sorted and non-overlapping"));
            }
            prev_end = Some(e);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub order: usize,
    pub cutoff_hz: f64,
    /// Reflection length for zero-phase filtering; `None` uses
    /// `3·(2·order + 1)`.
    pub pad_len: Option<usize>,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self { order: 5, cutoff_hz: 20.0, pad_len: None }
    }
}

impl FilterSpec {
    pub fn pad_len(&self) -> usize {
        self.pad_len.unwrap_or(3 * (2 * self.order + 1))
    }
}

/// Samples outside every contact interval become exactly zero.
pub fn clamp_noncontact(series: &ForceSeries) -> Result<ForceSeries> {
    series.validate_intervals()?;
    let mut out = series.clone();
    let mut next = 0;
    for &(s, e) in &series.contact_intervals {
        out.samples[next..s].fill(Vector3::zeros());
        next = e + 1;
    }
    let n = out.samples.len();
    out.samples[next..n].fill(Vector3::zeros());
    Ok(out)
}

/// One biquad in transposed direct form II, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Section {
    b: [f64; 3],
    a: [f64; 2],
}

impl Section {
    /// State that holds a unit constant input at unit output.
    fn steady_state(&self) -> [f64; 2] {
        [1.0 - self.b[0], self.b[2] - self.a[1]]
    }

    fn run(&self, data: &mut [f64], init: f64) {
        let zi = self.steady_state();
        let (mut z1, mut z2) = (zi[0] * init, zi[1] * init);
        for x in data.iter_mut() {
            let input = *x;
            let y = self.b[0] * input + z1;
            z1 = self.b[1] * input - self.a[0] * y + z2;
            z2 = self.b[2] * input - self.a[1] * y;
            *x = y;
        }
    }
}

/// Digital Butterworth lowpass as cascaded second-order sections, designed
/// by the prewarped bilinear transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    sections: Vec<Section>,
}

impl Butterworth {
    pub fn lowpass(order: usize, cutoff_hz: f64, sample_rate: f64) -> Result<Self> {
        if order == 0 {
            return Err(invalid("filter order must be at least 1"));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        if !(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0) {
            return Err(invalid(format!(
                "cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({} Hz)",
                sample_rate / 2.0
            )));
        }
        let k = (PI * cutoff_hz / sample_rate).tan();
        let k2 = k * k;
        let mut sections = Vec::with_capacity(order.div_ceil(2));
        if order % 2 == 1 {
            let norm = 1.0 + k;
            sections.push(Section { b: [k / norm, k / norm, 0.0], a: [(k - 1.0) / norm, 0.0] });
        }
        for i in 0..order / 2 {
            // analog prototype s² + 2ζs + 1 for the i-th conjugate pole pair
            let zeta = (PI * (2 * i + 1) as f64 / (2 * order) as f64).sin();
            let norm = 1.0 + 2.0 * zeta * k + k2;
            sections.push(Section {
                b: [k2 / norm, 2.0 * k2 / norm, k2 / norm],
                a: [2.0 * (k2 - 1.0) / norm, (1.0 - 2.0 * zeta * k + k2) / norm],
            });
        }
        Ok(Self { sections })
    }

    /// Single causal pass. The filter starts in the steady state of the
    /// first sample so a constant input passes through unchanged.
    pub fn filter(&self, data: &[f64]) -> Vec<f64> {
        let mut out = data.to_vec();
        if let Some(&first) = data.first() {
            for s in &self.sections {
                s.run(&mut out, first);
            }
        }
        out
    }

    /// Forward-backward pass with odd reflection of `pad_len` samples at
    /// each end. Net phase is zero and the magnitude response is squared.
    pub fn filtfilt(&self, data: &[f64], pad_len: usize) -> Vec<f64> {
        let n = data.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = pad_len.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * data[0] - data[i]));
        ext.extend_from_slice(data);
        ext.extend((1..=pad).map(|i| 2.0 * data[n - 1] - data[n - 1 - i]));

        let mut fwd = self.filter(&ext);
        fwd.reverse();
        let mut back = self.filter(&fwd);
        back.reverse();
        back[pad..pad + n].to_vec()
    }

    /// Complex frequency response magnitude at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate;
        self.sections
            .iter()
            .map(|s| {
                let eval = |c0: f64, c1: f64, c2: f64| {
                    let re = c0 + c1 * w.cos() + c2 * (2.0 * w).cos();
                    let im = -(c1 * w.sin() + c2 * (2.0 * w).sin());
                    (re * re + im * im).sqrt()
                };
                eval(s.b[0], s.b[1], s.b[2]) / eval(1.0, s.a[0], s.a[1])
            })
            .product()
    }
}

/// Lowpass every axis independently.
pub fn butterworth_lowpass(series: &ForceSeries, spec: &FilterSpec, zero_phase: bool) -> Result<ForceSeries> {
    let filter = Butterworth::lowpass(spec.order, spec.cutoff_hz, series.sample_rate)?;
    let axes: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let x = series.axis(a);
            if zero_phase {
                filter.filtfilt(&x, spec.pad_len())
            } else {
                filter.filter(&x)
            }
        })
        .collect();
    let samples = (0..series.len())
        .map(|i| Vector3::new(axes[0][i], axes[1][i], axes[2][i]))
        .collect();
    Ok(ForceSeries { samples, ..series.clone() })
}

/// Keep every `factor`-th sample starting with the first. Contact intervals
/// are mapped to the samples they still cover.
pub fn downsample(series: &ForceSeries, factor: usize) -> Result<ForceSeries> {
    if factor < 1 {
        return Err(invalid("downsampling factor must be at least 1"));
    }
    let samples = series.samples.iter().step_by(factor).copied().collect();
    let contact_intervals = series
        .contact_intervals
        .iter()
        .filter_map(|&(s, e)| {
            let (s, e) = (s.div_ceil(factor), e / factor);
            (s <= e).then_some((s, e))
        })
        .collect();
    Ok(ForceSeries {
        sample_rate: series.sample_rate / factor as f64,
        samples,
        contact_intervals,
    })
}

/// Runs where the vertical force exceeds `rise_threshold` for at least
/// `hold_samples` consecutive samples.
pub fn detect_contact(series: &ForceSeries, rise_threshold: f64, hold_samples: usize) -> Vec<(usize, usize)> {
    let hold = hold_samples.max(1);
    let mut intervals = Vec::new();
    let mut run_start = None;
    for (i, s) in series.samples.iter().enumerate() {
        let above = s[VERTICAL_AXIS] > rise_threshold;
        match (above, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(start)) => {
                if i - start >= hold {
                    intervals.push((start, i - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run_start {
        if series.len() - start >= hold {
            intervals.push((start, series.len() - 1));
        }
    }
    intervals
}

/// clamp → lowpass → downsample. `filter = None` skips the lowpass stage.
pub fn preprocess(
    series: &ForceSeries,
    filter: Option<&FilterSpec>,
    zero_phase: bool,
    factor: usize,
) -> Result<ForceSeries> {
    let clamped = clamp_noncontact(series)?;
    let filtered = match filter {
        Some(spec) => butterworth_lowpass(&clamped, spec, zero_phase)?,
        None => clamped,
    };
    downsample(&filtered, factor)
}
