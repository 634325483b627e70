//! Scaling of the trace-law residual across sizes: the median
//! residual/budget ratio over the spectral-domain grid must not grow with N.

use lclab_core::ensemble::h_spectrum;
use lclab_core::ensemble::SampleMeta;
use lclab_core::green::{m2n_of_h_sample, SpectralDomainGrid};
use lclab_core::mp_model::MpModel;
use lclab_core::sampling::{assemble_x, CalibrationCache, Sampler, SamplerSpec};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn median_trace_ratio_does_not_grow_with_n() {
    let cache = CalibrationCache::in_memory();
    let trials = 4;
    let mut medians = Vec::new();
    for n in [256usize, 512, 1024, 2048] {
        let m = n / 2;
        let model = MpModel::from_dims(m, n).unwrap();
        let grid = SpectralDomainGrid::standard(&model, n, 0.1, 12, 10).unwrap();
        let sampler = Sampler::prepare(SamplerSpec::gaussian(m), &cache).unwrap();
        let mut ratios = Vec::new();
        for t in 0..trials {
            let seed = 40_000 + n as u64 * 13 + t;
            let x = assemble_x(&sampler, n, seed).unwrap().x;
            let sample = h_spectrum(&x, SampleMeta::new(m, n, seed)).unwrap();
            for &z in &grid.points {
                let m2n = m2n_of_h_sample(&sample, z).unwrap();
                let m2 = model.stieltjes(z).unwrap().m2;
                let residual = (m2n - m2).norm();
                ratios.push(residual * n as f64 * z.im);
            }
        }
        medians.push((n, median(ratios)));
    }
    // allow measurement noise between consecutive sizes, but no growth trend
    for w in medians.windows(2) {
        assert!(
            w[1].1 <= 1.3 * w[0].1,
            "median ratio grew from {:?} to {:?}",
            w[0],
            w[1]
        );
    }
    let first = medians.first().unwrap().1;
    let last = medians.last().unwrap().1;
    assert!(last <= first, "no overall decay: {medians:?}");
}
