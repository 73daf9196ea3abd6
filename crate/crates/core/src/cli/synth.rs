use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::manifest::{write_recording, Manifest, SubjectRecord};
use crate::error::{Error, Result};
use crate::features::MONTAGE_10_20;
use crate::group::Group;
use crate::seed::{self, streams};
use crate::sigproc::TimeSeries;

/// Spectral signature of one diagnostic group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupProfile {
    /// Aperiodic exponent χ of the `1/f^χ` background.
    pub exponent: f64,
    /// Between-subject SD of χ.
    pub exponent_sd: f64,
    /// Alpha peak height relative to the background at the peak frequency.
    pub alpha_power: f64,
    /// Between-subject SD of log alpha height.
    pub alpha_log_sd: f64,
}

impl Default for GroupProfile {
    fn default() -> Self {
        Self {
            exponent: 2.0,
            exponent_sd: 0.1,
            alpha_power: 4.0,
            alpha_log_sd: 0.3,
        }
    }
}

/// Extra spectral peak on one channel of one group only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedPeak {
    pub channel: String,
    pub group: Group,
    pub peak_hz: f64,
    pub width_hz: f64,
    pub power: f64,
}

impl Default for PlantedPeak {
    fn default() -> Self {
        Self {
            channel: "Pz".into(),
            group: Group::Ad,
            peak_hz: 20.0,
            width_hz: 2.0,
            power: 8.0,
        }
    }
}

impl PlantedPeak {
    /// Feature column that carries the peak under the default layout.
    pub fn feature_name(&self) -> String {
        format!("relpow_beta_{}", self.channel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthProfile {
    pub fs: f64,
    pub duration_s: f64,
    pub channel_labels: Vec<String>,
    /// Share of variance drawn from a component common to all channels.
    pub coupling: f64,
    /// Per-channel SD after scaling.
    pub amplitude_uv: f64,
    /// SD of χ between channels of one subject.
    pub channel_exponent_sd: f64,
    pub alpha_peak_hz: f64,
    pub alpha_width_hz: f64,
    pub ad: GroupProfile,
    pub hc: GroupProfile,
    pub planted: Option<PlantedPeak>,
}

impl Default for SynthProfile {
    fn default() -> Self {
        Self {
            fs: 500.0,
            duration_s: 10.0,
            channel_labels: MONTAGE_10_20.iter().map(|s| s.to_string()).collect(),
            coupling: 0.2,
            amplitude_uv: 20.0,
            channel_exponent_sd: 0.05,
            alpha_peak_hz: 10.0,
            alpha_width_hz: 1.5,
            ad: GroupProfile {
                exponent: 1.4,
                alpha_power: 1.5,
                ..GroupProfile::default()
            },
            hc: GroupProfile::default(),
            planted: Some(PlantedPeak::default()),
        }
    }
}

impl SynthProfile {
    pub fn group(&self, g: Group) -> &GroupProfile {
        match g {
            Group::Ad => &self.ad,
            Group::Hc => &self.hc,
        }
    }

    pub fn n_samples(&self) -> usize {
        (self.fs * self.duration_s).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("synth profile: {m}")));
        if !(self.fs > 0.0) || self.n_samples() < 2 {
            return bad(format!(
                "fs {} / duration {} s give no samples",
                self.fs, self.duration_s
            ));
        }
        if self.channel_labels.is_empty() {
            return bad("no channels".into());
        }
        if !(0.0..=1.0).contains(&self.coupling) {
            return bad(format!("coupling {} outside [0, 1]", self.coupling));
        }
        if !(self.amplitude_uv > 0.0) || self.channel_exponent_sd < 0.0 {
            return bad("amplitude must be > 0 and channel_exponent_sd >= 0".into());
        }
        if !(self.alpha_peak_hz > 0.0 && self.alpha_peak_hz < self.fs / 2.0 && self.alpha_width_hz > 0.0) {
            return bad("alpha peak must lie in (0, fs/2) with positive width".into());
        }
        for (name, g) in [("ad", &self.ad), ("hc", &self.hc)] {
            if !(0.0..=4.0).contains(&g.exponent) || g.exponent_sd < 0.0 || g.alpha_power < 0.0 || g.alpha_log_sd < 0.0
            {
                return bad(format!("{name}: exponent must be in [0, 4], spreads and power >= 0"));
            }
        }
        if let Some(p) = &self.planted {
            if !self.channel_labels.contains(&p.channel) {
                return bad(format!("planted channel {:?} not in montage", p.channel));
            }
            if !(p.peak_hz > 0.0 && p.peak_hz < self.fs / 2.0 && p.width_hz > 0.0 && p.power >= 0.0) {
                return bad("planted peak must lie in (0, fs/2) with positive width".into());
            }
        }
        Ok(())
    }
}

/// Background spectra flatten below this frequency instead of diverging.
const F_KNEE_HZ: f64 = 0.5;

struct Shape {
    exponent: f64,
    /// `(centre, width, height relative to background)`.
    peaks: Vec<(f64, f64, f64)>,
}

impl Shape {
    fn amplitude(&self, f: f64) -> f64 {
        let bg = |f: f64| f.max(F_KNEE_HZ).powf(-self.exponent);
        let p: f64 = self
            .peaks
            .iter()
            .map(|&(c, w, h)| h * bg(c) * (-0.5 * ((f - c) / w).powi(2)).exp())
            .sum();
        (bg(f) + p).sqrt()
    }
}

/// Gaussian noise with power spectrum `|shape|^2`, unit SD.
fn shaped_noise<R: Rng>(shape: &Shape, n: usize, fs: f64, rng: &mut R) -> Vec<f64> {
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=(n - 1) / 2 {
        let a = shape.amplitude(k as f64 * fs / n as f64);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        spec[k] = Complex64::new(re, im) * a;
        spec[n - k] = spec[k].conj();
    }
    if n % 2 == 0 {
        let re: f64 = rng.sample(StandardNormal);
        spec[n / 2] = Complex64::new(re * shape.amplitude(fs / 2.0), 0.0);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let x: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let sd = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    x.iter().map(|v| v / sd).collect()
}

/// One subject's recording.
pub fn synth_subject(profile: &SynthProfile, group: Group, seed: u64) -> Result<TimeSeries> {
    profile.validate()?;
    let mut rng = seed::rng(seed);
    let gp = profile.group(group);
    let n = profile.n_samples();
    let chi_subject = gp.exponent + gp.exponent_sd * rng.sample::<f64, _>(StandardNormal);
    let alpha = gp.alpha_power * (gp.alpha_log_sd * rng.sample::<f64, _>(StandardNormal)).exp();
    let alpha_peak = (profile.alpha_peak_hz, profile.alpha_width_hz, alpha);
    let common = shaped_noise(
        &Shape {
            exponent: chi_subject,
            peaks: vec![alpha_peak],
        },
        n,
        profile.fs,
        &mut rng,
    );
    let (w_own, w_common) = ((1.0 - profile.coupling).sqrt(), profile.coupling.sqrt());
    let c = profile.channel_labels.len();
    let mut samples = Array2::zeros((c, n));
    for (ch, label) in profile.channel_labels.iter().enumerate() {
        let mut peaks = vec![alpha_peak];
        if let Some(p) = profile
            .planted
            .as_ref()
            .filter(|p| &p.channel == label && p.group == group)
        {
            peaks.push((p.peak_hz, p.width_hz, p.power));
        }
        let shape = Shape {
            exponent: chi_subject + profile.channel_exponent_sd * rng.sample::<f64, _>(StandardNormal),
            peaks,
        };
        let own = shaped_noise(&shape, n, profile.fs, &mut rng);
        let mixed: Vec<f64> = own.iter().zip(&common).map(|(o, m)| w_own * o + w_common * m).collect();
        let mean = mixed.iter().sum::<f64>() / n as f64;
        let sd = (mixed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        for (t, v) in mixed.iter().enumerate() {
            samples[[ch, t]] = profile.amplitude_uv * (v - mean) / sd;
        }
    }
    TimeSeries::new(samples, profile.fs)?.with_labels(profile.channel_labels.clone())
}

/// `n_per_group` AD subjects followed by `n_per_group` HC subjects.
pub fn synth_subjects(
    n_per_group: usize,
    profile: &SynthProfile,
    seed: u64,
) -> Result<Vec<(SubjectRecord, TimeSeries)>> {
    profile.validate()?;
    if n_per_group == 0 {
        return Err(Error::Config("n_per_group must be >= 1".into()));
    }
    [Group::Ad, Group::Hc]
        .iter()
        .flat_map(|&g| (0..n_per_group).map(move |i| (g, i)))
        .enumerate()
        .map(|(k, (g, _))| {
            let id = format!("sub-{:03}", k + 1);
            let ts = synth_subject(profile, g, seed::derive(seed, &[streams::SYNTH, k as u64]))?;
            let rec = SubjectRecord {
                subject_id: id.clone(),
                group: g,
                path: PathBuf::from("recordings").join(format!("{id}.csv")),
                fs: profile.fs,
                labels: profile.channel_labels.clone(),
            };
            Ok((rec, ts))
        })
        .collect()
}

/// Writes `recordings/<id>.csv` and `manifest.csv` under `dir`.
pub fn synth_eeg(n_per_group: usize, profile: &SynthProfile, seed: u64, dir: &Path) -> Result<Manifest> {
    let subjects = synth_subjects(n_per_group, profile, seed)?;
    std::fs::create_dir_all(dir.join("recordings"))?;
    for (rec, ts) in &subjects {
        write_recording(ts, &dir.join(&rec.path))?;
    }
    let m = Manifest {
        subjects: subjects.into_iter().map(|(r, _)| r).collect(),
        root: dir.to_path_buf(),
    };
    m.write(&dir.join("manifest.csv"))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{fit_aperiodic, plv};
    use crate::sigproc::{welch_1d, Band, BandName, WelchParams};

    fn quiet(exponent: f64, coupling: f64, duration_s: f64) -> SynthProfile {
        let g = GroupProfile {
            exponent,
            exponent_sd: 0.0,
            alpha_power: 4.0,
            alpha_log_sd: 0.0,
        };
        SynthProfile {
            duration_s,
            coupling,
            channel_exponent_sd: 0.0,
            ad: g,
            hc: g,
            planted: None,
            ..SynthProfile::default()
        }
    }

    #[test]
    fn exponent_recovered_per_channel() {
        let p = quiet(2.0, 0.2, 30.0);
        let ts = synth_subject(&p, Group::Hc, 11).unwrap();
        let params = WelchParams {
            nperseg: 1000,
            overlap_frac: 0.5,
            fmin: 0.5,
            fmax: 45.0,
        };
        for c in 0..ts.n_channels() {
            let s = welch_1d(&ts.channel(c).to_vec(), ts.fs(), params).unwrap();
            let fit = fit_aperiodic(&s, (1.0, 40.0)).unwrap();
            assert!((fit.exponent - 2.0).abs() <= 0.2, "channel {c}: {}", fit.exponent);
        }
    }

    #[test]
    fn zero_coupling_gives_low_plv() {
        let p = SynthProfile {
            channel_labels: vec!["A".into(), "B".into()],
            ..quiet(1.5, 0.0, 60.0)
        };
        let alpha = Band::canonical(BandName::Alpha);
        let trials = 100;
        let low = (0..trials)
            .filter(|&s| {
                let ts = synth_subject(&p, Group::Ad, s).unwrap();
                plv(&ts, &alpha).unwrap().values[[0, 1]] < 0.1
            })
            .count();
        assert!(low >= 95, "{low}/{trials} trials below 0.1");
    }

    #[test]
    fn coupling_raises_plv() {
        let p = SynthProfile {
            channel_labels: vec!["A".into(), "B".into()],
            ..quiet(1.5, 0.8, 10.0)
        };
        let ts = synth_subject(&p, Group::Ad, 3).unwrap();
        assert!(plv(&ts, &Band::canonical(BandName::Alpha)).unwrap().values[[0, 1]] > 0.5);
    }

    #[test]
    fn channels_scaled_to_amplitude() {
        let ts = synth_subject(&SynthProfile::default(), Group::Ad, 5).unwrap();
        for c in 0..ts.n_channels() {
            let x = ts.channel(c);
            let sd = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
            assert!((sd - 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let p = SynthProfile {
            duration_s: 2.0,
            ..SynthProfile::default()
        };
        let read_all = |dir: &Path| -> Vec<Vec<u8>> {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir.join("recordings"))
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            files.push(dir.join("manifest.csv"));
            files.iter().map(|f| std::fs::read(f).unwrap()).collect()
        };
        let (a, b, c) = (
            tempfile::tempdir().unwrap(),
            tempfile::tempdir().unwrap(),
            tempfile::tempdir().unwrap(),
        );
        synth_eeg(2, &p, 9, a.path()).unwrap();
        synth_eeg(2, &p, 9, b.path()).unwrap();
        synth_eeg(2, &p, 10, c.path()).unwrap();
        assert_eq!(read_all(a.path()), read_all(b.path()));
        assert_ne!(read_all(a.path()), read_all(c.path()));
    }

    #[test]
    fn invalid_profile_is_config_error() {
        for p in [
            SynthProfile {
                coupling: 1.5,
                ..SynthProfile::default()
            },
            SynthProfile {
                planted: Some(PlantedPeak {
                    channel: "X9".into(),
                    ..PlantedPeak::default()
                }),
                ..SynthProfile::default()
            },
            SynthProfile {
                fs: 0.0,
                ..SynthProfile::default()
            },
        ] {
            assert!(matches!(synth_subject(&p, Group::Ad, 0), Err(Error::Config(_))));
        }
    }
}
