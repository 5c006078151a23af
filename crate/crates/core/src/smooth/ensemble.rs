//! Seeded orbit ensembles and empirical histograms of Birkhoff averages.
//!
//! Expanding circle coordinates are iterated on exact base-`d` digit
//! expansions: a float orbit of `x ↦ 2x mod 1` collapses to 0 after 53
//! steps, while shifting a random digit stream samples Lebesgue measure
//! exactly for as long as needed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::smooth::{FullBranchMap, MPMap, Observable, TorusExpandingMap, VianaMap};

/// Iterates discarded before averaging.
pub const DEFAULT_TRANSIENT: usize = 100;
/// Smallest ensemble accepted by `empirical_spectrum`.
pub const MIN_ENSEMBLE: usize = 1000;

// slack when comparing fiber values with the candidate interval
const ESCAPE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum SmoothMap {
    Mp(MPMap),
    Torus(TorusExpandingMap),
    Viana(VianaMap),
}

impl SmoothMap {
    pub fn dimension(&self) -> usize {
        match self {
            SmoothMap::Mp(_) => 1,
            SmoothMap::Torus(t) => t.dimension(),
            SmoothMap::Viana(_) => 2,
        }
    }

    /// Range of coordinate `i` on the phase space.
    pub fn coordinate_domain(&self, i: usize) -> (f64, f64) {
        match self {
            SmoothMap::Viana(v) if i == 1 => v.candidate_interval(),
            _ => (0.0, 1.0),
        }
    }

    pub fn name(&self) -> String {
        match self {
            SmoothMap::Mp(m) => m.name(),
            SmoothMap::Torus(t) => format!("torus(d={:?})", t.multipliers()),
            SmoothMap::Viana(v) => format!("viana(d={}, a={}, alpha={})", v.d(), v.a(), v.alpha()),
        }
    }
}

/// Uniform random point of `[0, 1)` as a stream of base-`d` digits. The
/// window holds the next `P` digits with `d^P ≥ 2^53`, enough for a full
/// `f64` reading of the current point.
struct DigitStream {
    d: u128,
    window: u128,
    modulus: u128,
    scale: f64,
}

impl DigitStream {
    fn new(d: u32, rng: &mut ChaCha8Rng) -> Self {
        let d = d as u128;
        let mut modulus = 1u128;
        let mut places = 0;
        while modulus < (1u128 << 53) {
            modulus *= d;
            places += 1;
        }
        let mut window = 0u128;
        for _ in 0..places {
            window = window * d + rng.gen_range(0..d);
        }
        DigitStream {
            d,
            window,
            modulus: modulus / d,
            scale: modulus as f64,
        }
    }

    fn value(&self) -> f64 {
        // rounding can land on 1.0 when every digit is maximal
        (self.window as f64 / self.scale).min(1.0f64.next_down())
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) {
        self.window = (self.window % self.modulus) * self.d + rng.gen_range(0..self.d);
    }
}

/// First time a fiber coordinate left the candidate interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Escape {
    pub member: usize,
    pub step: usize,
    pub theta: f64,
    pub x: f64,
}

enum Member {
    Kept { start: Vec<f64>, average: f64 },
    Escaped { start: Vec<f64>, escape: Escape },
}

fn member_rng(seed: u64, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64);
    rng
}

fn simulate(
    map: &SmoothMap,
    obs: &Observable,
    coord: usize,
    n: usize,
    transient: usize,
    seed: u64,
    member: usize,
) -> Member {
    let mut rng = member_rng(seed, member);
    let total = transient + n;
    let mut sum = 0.0;
    match map {
        SmoothMap::Mp(m) => {
            let mut x: f64 = rng.gen();
            let start = vec![x];
            for i in 0..total {
                if i >= transient {
                    sum += obs.eval(x);
                }
                x = m.apply(x);
            }
            Member::Kept {
                start,
                average: sum / n as f64,
            }
        }
        SmoothMap::Torus(t) => {
            let mut streams: Vec<DigitStream> =
                t.multipliers().iter().map(|&d| DigitStream::new(d, &mut rng)).collect();
            let start = streams.iter().map(DigitStream::value).collect();
            // coordinates evolve independently; only the observed one is iterated
            let s = &mut streams[coord];
            for i in 0..total {
                if i >= transient {
                    sum += obs.eval(s.value());
                }
                s.step(&mut rng);
            }
            Member::Kept {
                start,
                average: sum / n as f64,
            }
        }
        SmoothMap::Viana(v) => {
            let mut theta = DigitStream::new(v.d(), &mut rng);
            let (lo, hi) = v.candidate_interval();
            let mut x = rng.gen_range(lo..=hi);
            let start = vec![theta.value(), x];
            for i in 0..total {
                let th = theta.value();
                if i >= transient {
                    sum += obs.eval(if coord == 0 { th } else { x });
                }
                x = v.fiber(th, x);
                theta.step(&mut rng);
                if !(x >= lo - ESCAPE_SLACK && x <= hi + ESCAPE_SLACK) {
                    return Member::Escaped {
                        start,
                        escape: Escape {
                            member,
                            step: i + 1,
                            theta: theta.value(),
                            x,
                        },
                    };
                }
            }
            Member::Kept {
                start,
                average: sum / n as f64,
            }
        }
    }
}

/// Birkhoff averages of one observable over a seeded ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitEnsemble {
    pub map: String,
    pub observable: Observable,
    pub coordinate: usize,
    pub seed: u64,
    pub n: usize,
    pub transient: usize,
    /// Initial point of every member, kept or not.
    pub starts: Vec<Vec<f64>>,
    /// Averages of the members that stayed in the phase space, in member order.
    pub averages: Vec<f64>,
    pub escapes: Vec<Escape>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub size: usize,
    pub n: usize,
    pub bins: usize,
    pub seed: u64,
    pub transient: usize,
    /// Coordinate the observable reads.
    pub coordinate: usize,
}

impl EnsembleConfig {
    pub fn new(size: usize, n: usize, bins: usize, seed: u64) -> Self {
        EnsembleConfig {
            size,
            n,
            bins,
            seed,
            transient: DEFAULT_TRANSIENT,
            coordinate: 0,
        }
    }
}

/// Runs the ensemble; members are simulated in parallel from per-member
/// streams of one seeded generator and collected in member order.
pub fn orbit_ensemble(map: &SmoothMap, obs: &Observable, cfg: &EnsembleConfig) -> Result<OrbitEnsemble> {
    if cfg.n == 0 {
        return Err(Error::InvalidArgument("orbit length must be positive".into()));
    }
    if cfg.coordinate >= map.dimension() {
        return Err(Error::InvalidArgument(format!(
            "coordinate {} out of range for a {}-dimensional map",
            cfg.coordinate,
            map.dimension()
        )));
    }
    let members: Vec<Member> = (0..cfg.size)
        .into_par_iter()
        .map(|i| simulate(map, obs, cfg.coordinate, cfg.n, cfg.transient, cfg.seed, i))
        .collect();
    let mut starts = Vec::with_capacity(cfg.size);
    let mut averages = Vec::with_capacity(cfg.size);
    let mut escapes = Vec::new();
    for m in members {
        match m {
            Member::Kept { start, average } => {
                starts.push(start);
                averages.push(average);
            }
            Member::Escaped { start, escape } => {
                starts.push(start);
                escapes.push(escape);
            }
        }
    }
    Ok(OrbitEnsemble {
        map: map.name(),
        observable: *obs,
        coordinate: cfg.coordinate,
        seed: cfg.seed,
        n: cfg.n,
        transient: cfg.transient,
        starts,
        averages,
        escapes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub fraction: f64,
    /// `−(1/n) log fraction`; absent for empty bins.
    pub raw_rate: Option<f64>,
    /// `raw_rate` minus its minimum over the bins, so the modal bin reads 0.
    pub rate: Option<f64>,
}

/// Histogram of `n`-step averages with a large-deviation rate read off each
/// bin. The rates are finite-`n` estimates and flagged as heuristic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalSpectrum {
    pub map: String,
    pub observable: Observable,
    pub seed: u64,
    pub n: usize,
    pub transient: usize,
    pub ensemble_size: usize,
    pub used: usize,
    pub escaped: usize,
    pub first_escape: Option<Escape>,
    pub mean: f64,
    /// Midpoint of the most populated bin.
    pub peak: f64,
    pub bins: Vec<HistogramBin>,
    pub heuristic: bool,
}

impl EmpiricalSpectrum {
    fn bin_of(&self, alpha: f64) -> Option<&HistogramBin> {
        let last = self.bins.len() - 1;
        let (lo, hi) = (self.bins[0].lo, self.bins[last].hi);
        if alpha < lo || alpha > hi {
            return None;
        }
        if lo == hi {
            return self.bins.first();
        }
        let w = (hi - lo) / self.bins.len() as f64;
        let i = (((alpha - lo) / w + 1e-9).floor() as usize).min(last);
        self.bins.get(i)
    }

    /// Normalized rate of the bin containing `alpha`.
    pub fn rate_at(&self, alpha: f64) -> Option<f64> {
        self.bin_of(alpha).and_then(|b| b.rate)
    }

    pub fn raw_rate_at(&self, alpha: f64) -> Option<f64> {
        self.bin_of(alpha).and_then(|b| b.raw_rate)
    }

    /// Total-variation distance between two histograms on the same bins.
    pub fn total_variation(&self, other: &EmpiricalSpectrum) -> Result<f64> {
        if self.bins.len() != other.bins.len() {
            return Err(Error::InvalidArgument("histograms have different bins".into()));
        }
        Ok(0.5
            * self
                .bins
                .iter()
                .zip(&other.bins)
                .map(|(a, b)| (a.fraction - b.fraction).abs())
                .sum::<f64>())
    }
}

/// Histogram of Birkhoff averages over a seeded ensemble of at least
/// `MIN_ENSEMBLE` uniformly drawn points, binned evenly over the range of
/// the observable.
pub fn empirical_spectrum(map: &SmoothMap, obs: &Observable, cfg: &EnsembleConfig) -> Result<EmpiricalSpectrum> {
    if cfg.size < MIN_ENSEMBLE {
        return Err(Error::InvalidArgument(format!(
            "ensemble of {} points is below the minimum {MIN_ENSEMBLE}",
            cfg.size
        )));
    }
    if cfg.bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let ens = orbit_ensemble(map, obs, cfg)?;
    if ens.averages.is_empty() {
        return Err(Error::EmptyEnsemble {
            members: cfg.size,
            escaped: ens.escapes.len(),
        });
    }
    let (lo, hi) = obs.range(map.coordinate_domain(cfg.coordinate));
    let bins = if lo == hi { 1 } else { cfg.bins };
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &a in &ens.averages {
        let i = if w > 0.0 {
            ((a - lo) / w + 1e-9).floor().max(0.0) as usize
        } else {
            0
        };
        counts[i.min(bins - 1)] += 1;
    }
    let used = ens.averages.len();
    let n = cfg.n as f64;
    let raw: Vec<Option<f64>> = counts
        .iter()
        .map(|&c| (c > 0).then(|| -(c as f64 / used as f64).ln() / n))
        .collect();
    let floor = raw.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let (peak_bin, _) = counts
        .iter()
        .enumerate()
        .fold((0, 0), |best, (i, &c)| if c > best.1 { (i, c) } else { best });
    let bins_out = (0..bins)
        .map(|i| HistogramBin {
            lo: lo + i as f64 * w,
            hi: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * w },
            count: counts[i],
            fraction: counts[i] as f64 / used as f64,
            raw_rate: raw[i],
            rate: raw[i].map(|r| r - floor),
        })
        .collect();
    Ok(EmpiricalSpectrum {
        map: ens.map,
        observable: *obs,
        seed: cfg.seed,
        n: cfg.n,
        transient: cfg.transient,
        ensemble_size: cfg.size,
        used,
        escaped: ens.escapes.len(),
        first_escape: ens.escapes.first().cloned(),
        mean: ens.averages.iter().sum::<f64>() / used as f64,
        peak: lo + (peak_bin as f64 + 0.5) * w,
        bins: bins_out,
        heuristic: true,
    })
}

/// Empirical check that Viana fibers stay in the candidate interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub interval: (f64, f64),
    /// Whether `a (1 + |α|) ≤ 2`, which makes the interval invariant.
    pub analytic: bool,
    pub samples: usize,
    pub steps: usize,
    pub violations: usize,
    pub first_violation: Option<Escape>,
}

pub fn viana_invariance(map: &VianaMap, samples: usize, steps: usize, seed: u64) -> Result<InvarianceReport> {
    let sm = SmoothMap::Viana(*map);
    let cfg = EnsembleConfig {
        size: samples,
        n: steps,
        bins: 1,
        seed,
        transient: 0,
        coordinate: 1,
    };
    let ens = orbit_ensemble(&sm, &Observable::Identity, &cfg)?;
    Ok(InvarianceReport {
        interval: map.candidate_interval(),
        analytic: map.interval_is_invariant(),
        samples,
        steps,
        violations: ens.escapes.len(),
        first_violation: ens.escapes.first().cloned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::binary_entropy;

    fn doubling() -> SmoothMap {
        SmoothMap::Torus(TorusExpandingMap::doubling())
    }

    const RIGHT_HALF: Observable = Observable::Indicator { lo: 0.5, hi: 1.0 };

    #[test]
    fn digit_stream_reads_its_digits() {
        let mut rng = member_rng(7, 0);
        let mut s = DigitStream::new(2, &mut rng);
        // doubling: the next reading is 2x mod 1 up to the appended digit
        for _ in 0..200 {
            let x = s.value();
            s.step(&mut rng);
            let y = s.value();
            assert!((y - (2.0 * x).fract()).abs() < 1e-15);
        }
        let s = DigitStream::new(16, &mut rng);
        assert!(s.scale >= 2f64.powi(53));
    }

    #[test]
    fn doubling_histogram_matches_binomial() {
        let cfg = EnsembleConfig::new(100_000, 20, 21, 11);
        let sp = empirical_spectrum(&doubling(), &RIGHT_HALF, &cfg).unwrap();
        assert_eq!(sp.used, 100_000);
        assert!((sp.peak - 0.5).abs() < 0.03);
        assert_eq!(sp.rate_at(0.5), Some(0.0));
        // exact bin probabilities C(20, k) / 2^20
        let mut c = 1.0f64;
        for k in 0..=20usize {
            let p = c / 2f64.powi(20);
            assert!(
                (sp.bins[k].fraction - p).abs() < 5.0 * (p / 1e5).sqrt() + 1e-4,
                "k = {k}"
            );
            c = c * (20 - k) as f64 / (k + 1) as f64;
        }
        let r = sp.rate_at(0.3).unwrap();
        let limit = 2f64.ln() - binary_entropy(0.3);
        assert!((r - limit).abs() < 0.03, "{r} vs {limit}");
        assert!(sp.heuristic);
    }

    #[test]
    fn constant_observable_has_one_bin() {
        let cfg = EnsembleConfig::new(1000, 10, 20, 1);
        let sp = empirical_spectrum(&doubling(), &Observable::Constant { value: 0.3 }, &cfg).unwrap();
        assert_eq!(sp.bins.len(), 1);
        assert_eq!(sp.bins[0].count, 1000);
        assert_eq!(sp.rate_at(0.3), Some(0.0));
        assert_eq!(sp.raw_rate_at(0.3), Some(0.0));
    }

    #[test]
    fn seeds_reproduce_and_histograms_are_stable() {
        let cfg = EnsembleConfig::new(2000, 20, 21, 5);
        let a = empirical_spectrum(&doubling(), &RIGHT_HALF, &cfg).unwrap();
        let b = empirical_spectrum(&doubling(), &RIGHT_HALF, &cfg).unwrap();
        assert_eq!(a, b);
        let other = EnsembleConfig { seed: 6, ..cfg };
        let c = empirical_spectrum(&doubling(), &RIGHT_HALF, &other).unwrap();
        assert_ne!(a, c);
        assert!(a.total_variation(&c).unwrap() < 0.1);
    }

    #[test]
    fn small_ensembles_are_refused() {
        let cfg = EnsembleConfig::new(999, 20, 21, 5);
        assert!(empirical_spectrum(&doubling(), &RIGHT_HALF, &cfg).is_err());
    }

    #[test]
    fn viana_escapes_are_reported() {
        let v = VianaMap::new(16, 2.0, 0.01).unwrap();
        let rep = viana_invariance(&v, 2000, 120, 3).unwrap();
        assert!(!rep.analytic);
        assert!(rep.violations > 0);
        let first = rep.first_violation.unwrap();
        assert!(first.x < rep.interval.0 || first.x > rep.interval.1);

        let tame = VianaMap::new(16, 1.9, 0.01).unwrap();
        let rep = viana_invariance(&tame, 2000, 120, 3).unwrap();
        assert!(rep.analytic);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn escaping_ensemble_is_an_error_only_when_empty() {
        let v = SmoothMap::Viana(VianaMap::new(16, 3.0, 0.01).unwrap());
        let cfg = EnsembleConfig::new(1000, 20, 10, 1);
        let e = empirical_spectrum(&v, &Observable::Identity, &cfg);
        assert!(matches!(e, Err(Error::EmptyEnsemble { .. })));
    }

    #[test]
    fn mp_ensemble_runs() {
        let m = SmoothMap::Mp(MPMap::new(0.5).unwrap());
        let cfg = EnsembleConfig::new(1000, 50, 10, 2);
        let sp = empirical_spectrum(&m, &RIGHT_HALF, &cfg).unwrap();
        assert_eq!(sp.used, 1000);
        assert!(sp.mean > 0.0 && sp.mean < 1.0);
    }
}
