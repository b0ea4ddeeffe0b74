//! CSV export of waveforms, grids, pulses, PSD curves, surfaces, channels
//! and BER results. Formatting is shortest-roundtrip, so identical data
//! always serializes to identical bytes.

use std::fmt::Write as _;

use crate::channel::DdChannel;
use crate::detection::BerReport;
use crate::orthogonality::AmbiguitySurface;
use crate::params::{DdGrid, SampledWaveform};
use crate::pulse::ProtoPulse;
use crate::spectrum::PsdCurve;
use crate::Scalar;

fn f<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

pub fn waveform_csv<T: Scalar>(wf: &SampledWaveform<T>) -> String {
    let mut s = String::from("index,time_s,re,im\n");
    for (i, v) in wf.samples.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{}", i, f(wf.time_of(i)), f(v.re), f(v.im));
    }
    s
}

pub fn grid_csv<T: Scalar>(grid: &DdGrid<T>) -> String {
    let mut s = String::from("m,n,re,im\n");
    for m in 0..grid.m() {
        for n in 0..grid.n() {
            let v = grid.get(m, n);
            let _ = writeln!(s, "{},{},{},{}", m, n, f(v.re), f(v.im));
        }
    }
    s
}

pub fn pulse_csv<T: Scalar>(pulse: &ProtoPulse<T>) -> String {
    let mut s = String::from("index,time_s,value\n");
    for (i, &v) in pulse.taps.iter().enumerate() {
        let t = (i as f64 - pulse.center as f64) * f(pulse.dt);
        let _ = writeln!(s, "{},{},{}", i, t, f(v));
    }
    s
}

pub fn psd_csv<T: Scalar>(curve: &PsdCurve<T>) -> String {
    let reference = curve.max_power();
    let mut s = String::from("freq_hz,power_db\n");
    for i in 0..curve.freqs.len() {
        let _ = writeln!(s, "{},{}", f(curve.freqs[i]), f(curve.db_rel(i, reference)));
    }
    s
}

pub fn surface_csv<T: Scalar>(surface: &AmbiguitySurface<T>) -> String {
    let (me, ne) = surface.half_extent();
    let mut s = String::from("m_bar,n_bar,mag_db\n");
    for mbar in -me..=me {
        for nbar in -ne..=ne {
            let _ = writeln!(s, "{},{},{}", mbar, nbar, f(surface.mag_db(mbar, nbar)));
        }
    }
    s
}

pub fn channel_csv<T: Scalar>(ch: &DdChannel<T>) -> String {
    let mut s = String::from("tap,gain_re,gain_im,delay_s,doppler_hz\n");
    for (i, t) in ch.taps.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            i,
            f(t.gain.re),
            f(t.gain.im),
            f(t.delay_s),
            f(t.doppler_hz)
        );
    }
    s
}

pub struct BerRow {
    pub ebn0_db: f64,
    pub system: String,
    pub detector: String,
    pub report: BerReport,
}

pub fn ber_csv(rows: &[BerRow]) -> String {
    let mut s = String::from("ebn0_db,system,detector,ber,ci_lo,ci_hi,trials\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.ebn0_db, r.system, r.detector, r.report.rate, r.report.ci_lo, r.report.ci_hi, r.report.total
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn csv_shapes() {
        let wf = SampledWaveform::<f64> {
            samples: vec![Complex64::new(1.0, -2.0); 3],
            fs: 4.0,
            t0: -0.25,
        };
        let text = waveform_csv(&wf);
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("index,time_s,re,im"));
        assert!(text.contains("0,-0.25,1,-2"));

        let g = DdGrid::<f64>::delta(2, 2, 1, 0);
        let text = grid_csv(&g);
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("1,0,1,0"));
    }

    #[test]
    fn identical_data_identical_bytes() {
        let g = DdGrid::<f64>::delta(3, 2, 0, 1);
        assert_eq!(grid_csv(&g), grid_csv(&g.clone()));
    }
}
