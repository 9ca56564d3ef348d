//! Synthetic 2-D multi-label data with sub-concepts and class overlap,
//! used by the directional benchmark tests and the criterion benches.

use ndarray::Array2;

use crate::dataset::MultiLabelDataset;
use crate::rng::RandomStream;

struct Disc {
    cx: f64,
    cy: f64,
    r: f64,
}

/// Points in the unit square carrying three labels, each positive inside a
/// pair of discs (two sub-concepts per label). Labels flip with probability
/// 0.35 inside a band around each disc boundary, producing class overlap.
/// Per-label positive rates sit near 12%, i.e. imbalance ratios well above 4.
pub fn clustered_overlap(n: usize, seed: u64) -> MultiLabelDataset {
    let regions: [&[Disc]; 3] = [
        &[
            Disc { cx: 0.25, cy: 0.25, r: 0.14 },
            Disc { cx: 0.78, cy: 0.78, r: 0.12 },
        ],
        &[
            Disc { cx: 0.75, cy: 0.22, r: 0.13 },
            Disc { cx: 0.2, cy: 0.72, r: 0.1 },
        ],
        &[
            Disc { cx: 0.5, cy: 0.52, r: 0.13 },
            Disc { cx: 0.12, cy: 0.9, r: 0.09 },
        ],
    ];
    let band = 0.06;
    let flip_probability = 0.35;

    let mut rng = RandomStream::new(seed);
    let mut features = Array2::zeros((n, 2));
    let mut labels = Array2::zeros((n, 3));
    for i in 0..n {
        let x = rng.uniform();
        let y = rng.uniform();
        features[(i, 0)] = x;
        features[(i, 1)] = y;
        for (j, discs) in regions.iter().enumerate() {
            let mut inside = false;
            let mut boundary_distance = f64::INFINITY;
            for disc in discs.iter() {
                let d = ((x - disc.cx).powi(2) + (y - disc.cy).powi(2)).sqrt();
                inside |= d <= disc.r;
                boundary_distance = boundary_distance.min((d - disc.r).abs());
            }
            let mut bit = u8::from(inside);
            if boundary_distance <= band && rng.uniform() < flip_probability {
                bit ^= 1;
            }
            labels[(i, j)] = bit;
        }
    }
    MultiLabelDataset::new(
        features,
        labels,
        vec!["x".into(), "y".into()],
        vec!["shape".into(), "border".into(), "color".into()],
    )
    .expect("generator produces a valid dataset")
}
