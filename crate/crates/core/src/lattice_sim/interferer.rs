//! Interferer waveforms. Every model has zero mean and variance `p_j`.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::registry::{Named, Registry};

pub trait InterfererModel: Named + Send + Sync {
    fn sample(&self, rng: &mut ChaCha8Rng, p_j: f64) -> f64;
}

pub struct GaussianInterferer;
pub struct UniformInterferer;
/// Equiprobable `±√p_j`.
pub struct BpskInterferer;

impl Named for GaussianInterferer {
    fn name(&self) -> &'static str {
        "gaussian"
    }
}

impl Named for UniformInterferer {
    fn name(&self) -> &'static str {
        "uniform"
    }
}

impl Named for BpskInterferer {
    fn name(&self) -> &'static str {
        "bpsk"
    }
}

impl InterfererModel for GaussianInterferer {
    fn sample(&self, rng: &mut ChaCha8Rng, p_j: f64) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        z * p_j.sqrt()
    }
}

impl InterfererModel for UniformInterferer {
    fn sample(&self, rng: &mut ChaCha8Rng, p_j: f64) -> f64 {
        let half_width = (3.0 * p_j).sqrt();
        rng.random_range(-1.0..1.0) * half_width
    }
}

impl InterfererModel for BpskInterferer {
    fn sample(&self, rng: &mut ChaCha8Rng, p_j: f64) -> f64 {
        if rng.random::<bool>() {
            p_j.sqrt()
        } else {
            -p_j.sqrt()
        }
    }
}

pub fn default_interferers() -> Registry<dyn InterfererModel> {
    let mut reg: Registry<dyn InterfererModel> = Registry::new("interferer model");
    let models: [Arc<dyn InterfererModel>; 3] = [
        Arc::new(GaussianInterferer),
        Arc::new(UniformInterferer),
        Arc::new(BpskInterferer),
    ];
    for m in models {
        reg.register(m).expect("builtin names are distinct");
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_sim::rng::stream_rng;

    #[test]
    fn every_model_has_requested_power() {
        let reg = default_interferers();
        assert_eq!(reg.names(), vec!["gaussian", "uniform", "bpsk"]);
        for model in reg.iter() {
            let n = 200_000u64;
            let (mut s, mut s2) = (0.0, 0.0);
            for i in 0..n {
                let j = model.sample(&mut stream_rng(11, i), 4.0);
                s += j;
                s2 += j * j;
            }
            let mean = s / n as f64;
            let var = s2 / n as f64 - mean * mean;
            assert!(mean.abs() < 0.03, "{}: mean {mean}", model.name());
            assert!((var - 4.0).abs() < 0.06, "{}: var {var}", model.name());
        }
        assert!(reg.get("laplace").is_err());
    }
}
