#![allow(dead_code)]

use als_core::{DenseMatrix, LossDescriptor, RngStream};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian(n: usize, d: usize, seed: u64) -> DenseMatrix {
    let mut rng = RngStream::new(seed).rng();
    DenseMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
}

pub fn catalog() -> Vec<LossDescriptor> {
    vec![
        LossDescriptor::lp(0.5).unwrap(),
        LossDescriptor::lp(1.0).unwrap(),
        LossDescriptor::lp(1.5).unwrap(),
        LossDescriptor::lp(2.0).unwrap(),
        LossDescriptor::lp(3.0).unwrap(),
        LossDescriptor::huber(1.0).unwrap(),
        LossDescriptor::huber(0.25).unwrap(),
        LossDescriptor::tukey_lp(1.0, 2.0).unwrap(),
        LossDescriptor::tukey_lp(3.0, 1.0).unwrap(),
        LossDescriptor::tukey_smooth(1.5).unwrap(),
        LossDescriptor::l2lq(0.5).unwrap(),
        LossDescriptor::l2lq(1.5).unwrap(),
        LossDescriptor::gamma_p(1.0, 3.0).unwrap(),
        LossDescriptor::gamma_p(2.0, 4.0).unwrap(),
    ]
}
