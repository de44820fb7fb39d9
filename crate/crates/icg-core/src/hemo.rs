//! Per-beat hemodynamic parameters derived from the delineated points.
//!
//! Each parameter is computed only when the points it needs are present;
//! everything else stays `None` rather than guessing.

use crate::signal::BeatAnnotation;

/// Hemodynamic parameters of one beat, in physical units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HemoParams {
    /// C-to-next-C interval, ms. Absent for the last beat of a record.
    pub cc_time_ms: Option<f64>,
    /// Instantaneous heart rate, beats per minute (`60000 / cc_time_ms`).
    pub hr_bpm: Option<f64>,
    /// Left-ventricular ejection time: B to X, ms.
    pub lvet_ms: Option<f64>,
    /// Isovolumic relaxation time: X to O, ms.
    pub ivrt_ms: Option<f64>,
    /// B-to-C amplitude difference, in signal units.
    pub bc_ampl: Option<f64>,
}

/// Computes the per-beat parameters for a sequence of beats ordered by C
/// position. The C-C interval of beat `i` uses the C of beat `i + 1`.
pub fn compute_hemo(beats: &[BeatAnnotation], fs: f64) -> Vec<HemoParams> {
    let to_ms = |from: usize, to: usize| (to - from) as f64 * 1000.0 / fs;
    beats
        .iter()
        .enumerate()
        .map(|(i, beat)| {
            let next_c = beats.get(i + 1).and_then(|b| b.c);
            let cc_time_ms = match (beat.c, next_c) {
                (Some(c), Some(next)) if next > c => Some(to_ms(c, next)),
                _ => None,
            };
            let hr_bpm = cc_time_ms.map(|cc| 60_000.0 / cc);
            let lvet_ms = match (beat.b, beat.x) {
                (Some(b), Some(x)) if x > b => Some(to_ms(b, x)),
                _ => None,
            };
            let ivrt_ms = match (beat.x, beat.o) {
                (Some(x), Some(o)) if o > x => Some(to_ms(x, o)),
                _ => None,
            };
            let bc_ampl = match (beat.amp_b, beat.amp_c) {
                (Some(ab), Some(ac)) => Some(ac - ab),
                _ => None,
            };
            HemoParams { cc_time_ms, hr_bpm, lvet_ms, ivrt_ms, bc_ampl }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beat(b: usize, c: usize, x: usize, o: usize, amp_b: f64, amp_c: f64) -> BeatAnnotation {
        BeatAnnotation {
            b: Some(b),
            c: Some(c),
            x: Some(x),
            o: Some(o),
            amp_b: Some(amp_b),
            amp_c: Some(amp_c),
            ..Default::default()
        }
    }

    #[test]
    fn full_beats_yield_all_parameters() {
        // 250 Hz: B at 100, X at 180 -> LVET (80 samples) = 320 ms; one
        // second between the C peaks -> 60 bpm.
        let beats = vec![
            beat(100, 130, 180, 188, 0.1, 1.2),
            beat(350, 380, 430, 438, 0.1, 1.1),
        ];
        let hemo = compute_hemo(&beats, 250.0);
        assert_eq!(hemo.len(), 2);
        let first = &hemo[0];
        assert_eq!(first.cc_time_ms, Some(1000.0));
        assert_eq!(first.hr_bpm, Some(60.0));
        assert_eq!(first.lvet_ms, Some(320.0));
        assert_eq!(first.ivrt_ms, Some(32.0));
        assert!((first.bc_ampl.unwrap() - 1.1).abs() < 1e-12);
        // The record's last beat has no next C.
        assert_eq!(hemo[1].cc_time_ms, None);
        assert_eq!(hemo[1].hr_bpm, None);
        assert_eq!(hemo[1].lvet_ms, Some(320.0));
    }

    #[test]
    fn absent_points_leave_parameters_absent() {
        let mut incomplete = beat(100, 130, 180, 188, 0.1, 1.2);
        incomplete.x = None;
        let hemo = compute_hemo(&[incomplete], 250.0);
        assert_eq!(hemo[0].lvet_ms, None, "LVET needs X");
        assert_eq!(hemo[0].ivrt_ms, None, "IVRT needs X");
        assert!(hemo[0].bc_ampl.is_some(), "amplitudes are still present");

        let mut no_amp = beat(100, 130, 180, 188, 0.1, 1.2);
        no_amp.amp_b = None;
        let hemo = compute_hemo(&[no_amp], 250.0);
        assert_eq!(hemo[0].bc_ampl, None);
    }

    #[test]
    fn heart_rate_follows_the_cc_interval() {
        // 0.8 s between C peaks -> 75 bpm.
        let beats = vec![
            beat(100, 130, 180, 188, 0.0, 1.0),
            beat(300, 330, 380, 388, 0.0, 1.0),
        ];
        let hemo = compute_hemo(&beats, 250.0);
        assert_eq!(hemo[0].cc_time_ms, Some(800.0));
        assert_eq!(hemo[0].hr_bpm, Some(75.0));
    }
}
