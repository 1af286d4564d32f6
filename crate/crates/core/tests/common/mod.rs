#![allow(dead_code)]

use fdmo::ec::ChannelModel;
use fdmo::fd::{init_polyblock, PairSpec, SystemSpec, UserSpec};
use fdmo::quality::QualityModel;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub const VIDEOS: [&str; 5] = ["Akiyo", "Bus", "Coastguard", "Foreman", "News"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// μ = 0.1, P^max = 5, 20 dB floor.
pub fn user(theta: f64, weight: f64, video: &str) -> UserSpec {
    UserSpec::new(theta, 0.1, 5.0, weight, QualityModel::preset(video, 20.0).unwrap()).unwrap()
}

pub fn pair(u1: UserSpec, u2: UserSpec, gain: f64) -> PairSpec {
    PairSpec::new(u1, u2, ChannelModel::rayleigh(gain).unwrap())
}

pub fn spec(pairs: Vec<PairSpec>, bw: f64, eps: f64) -> SystemSpec {
    SystemSpec::new(pairs, bw, 1e-6, 1e-3).unwrap().with_eps(eps)
}

/// Bus sending to Coastguard over Z = 1 on 100 kHz.
pub fn bus_coastguard(theta1: f64, theta2: f64, w1: f64, eps: f64) -> SystemSpec {
    spec(vec![pair(user(theta1, w1, "Bus"), user(theta2, 1.0 - w1, "Coastguard"), 1.0)], 100e3, eps)
}

fn random_user(rng: &mut StdRng, weight: f64) -> UserSpec {
    let video = VIDEOS[rng.random_range(0..VIDEOS.len())];
    let q_min = rng.random_range(15.0..22.0);
    UserSpec::new(
        rng.random_range(0.01..0.1),
        rng.random_range(0.05..0.3),
        rng.random_range(2.0..8.0),
        weight,
        QualityModel::preset(video, q_min).unwrap(),
    )
    .unwrap()
}

/// A random feasible system with `k` pairs and roughly 100 kHz per pair.
pub fn random_spec(rng: &mut StdRng, k: usize, eps: f64) -> SystemSpec {
    loop {
        let raw: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let pairs = (0..k)
            .map(|i| {
                let u1 = random_user(rng, raw[2 * i] / total);
                let u2 = random_user(rng, raw[2 * i + 1] / total);
                pair(u1, u2, rng.random_range(0.5..3.0))
            })
            .collect();
        let s = spec(pairs, k as f64 * rng.random_range(60e3..140e3), eps);
        if s.validate().is_ok() && init_polyblock(&s).is_ok() {
            return s;
        }
    }
}
