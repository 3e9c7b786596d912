/// One cumulative share-count observation, `minute` measured (fractionally)
/// from the article's first visit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareSample {
    pub minute: f64,
    pub cumulative: f64,
}

/// Linearly interpolates the cumulative share curve and differences it into
/// per-minute deltas for minutes `0..len`.
///
/// The curve is flat at the first count before the first sample and at the
/// last count after the last sample. Increase observed before minute 0 is
/// folded into minute 0, so the deltas always sum to `last - first` whenever
/// `len` reaches past the last sample. Input must be sorted by time and
/// non-decreasing.
pub fn interpolate_shares(samples: &[ShareSample], len: usize) -> Vec<f64> {
    let mut deltas = vec![0.0; len];
    if samples.len() < 2 || len == 0 {
        return deltas;
    }
    let first = samples[0].cumulative;
    let mut prev_level = first;
    let mut seg = 0usize;
    for (m, delta) in deltas.iter_mut().enumerate() {
        let t = (m + 1) as f64;
        while seg + 1 < samples.len() && samples[seg + 1].minute <= t {
            seg += 1;
        }
        let level = if seg + 1 >= samples.len() || t < samples[0].minute {
            if t < samples[0].minute { first } else { samples[samples.len() - 1].cumulative }
        } else {
            let (a, b) = (samples[seg], samples[seg + 1]);
            let span = b.minute - a.minute;
            if span <= 0.0 {
                b.cumulative
            } else {
                a.cumulative + (b.cumulative - a.cumulative) * (t - a.minute) / span
            }
        };
        *delta = (level - prev_level).max(0.0);
        prev_level = level.max(prev_level);
    }
    deltas
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(minute: f64, cumulative: f64) -> ShareSample {
        ShareSample { minute, cumulative }
    }

    #[test]
    fn linear_ramp() {
        let d = interpolate_shares(&[s(0.0, 0.0), s(10.0, 10.0)], 15);
        for (m, v) in d.iter().enumerate() {
            let expected = if m < 10 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-12, "minute {m}: {v}");
        }
    }

    #[test]
    fn flat_between_equal_counts() {
        let d = interpolate_shares(&[s(0.0, 5.0), s(5.0, 5.0), s(10.0, 10.0)], 12);
        assert!(d[..5].iter().all(|&v| v == 0.0));
        assert!((d[5..10].iter().sum::<f64>() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn single_snapshot_has_no_deltas() {
        assert!(interpolate_shares(&[s(3.0, 40.0)], 10).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn increase_before_origin_lands_in_minute_zero() {
        let d = interpolate_shares(&[s(-10.0, 0.0), s(0.0, 10.0), s(10.0, 20.0)], 20);
        assert!((d[0] - 11.0).abs() < 1e-12);
        assert!((d.iter().sum::<f64>() - 20.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn conserves_total_and_never_negative(
            steps in proptest::collection::vec((0.1f64..30.0, 0u32..50), 2..40),
            start in -20.0f64..20.0,
        ) {
            let mut minute = start;
            let mut level = 0.0;
            let mut samples = Vec::new();
            for (dt, inc) in steps {
                samples.push(s(minute, level));
                minute += dt;
                level += inc as f64;
            }
            let last = samples.last().unwrap();
            let total = last.cumulative - samples[0].cumulative;
            let len = last.minute.ceil().max(1.0) as usize + 2;
            let d = interpolate_shares(&samples, len);
            prop_assert!(d.iter().all(|&v| v >= 0.0));
            let sum: f64 = d.iter().sum();
            prop_assert!((sum - total).abs() <= 1e-9 * total.max(1.0), "{} vs {}", sum, total);
        }
    }
}
