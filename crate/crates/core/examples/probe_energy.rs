use qls_core::energy::*;
use qls_core::grid::Grid;
use qls_core::potentials::{MSet, Potentials, RegionO};
use qls_core::transform::DualTransform;
use std::sync::Arc;

fn main() {
    let grid = Grid::radial_geometric(5, 1e-3, 2000.0, 300).unwrap();
    let pots = Potentials {
        v: Arc::new(|x: &[f64; 3]| 1.0 + 0.5 * (-(x[0] * x[0])).exp()),
        k: Arc::new(|x: &[f64; 3]| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            1.0 - 0.1 * (r2 / 400.0).min(1.0)
        }),
        m: 1.0, k0: 1.05, v0: 1.0,
        mset: MSet::Point { at: [0.0; 3] },
    };
    let pen = Penalization { tau: 1.0, region: RegionO::Ball { radius: 20.0 }, beta: 0.19, t0: 1.4 };
    let asm = Assembled::new(grid.clone(), pots, pen, 0.05, 0.1, DualTransform::standard(), 4.0).unwrap();
    let n = grid.len();
    let mut seed = 0x9e3779b97f4a7c15u64;
    let mut rnd = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for case in 0..3 {
        let (c1, c2, c3) = (rnd(), rnd(), rnd());
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let r = grid.node_radius(i);
                (c1 - 0.3) * (-(r - 100.0 * c2).powi(2) / 2000.0).exp()
                    + c3 * (-(r * r) / 8000.0).exp()
            })
            .collect();
        let parts = asm.energy_parts(&v);
        println!("case {case}: c=({c1:.3},{c2:.3},{c3:.3}) D={:.3e} mass={:.3e} src={:.3e} qm={:.3e} Q={:.3e} G={:.3e}",
            parts.dirichlet, parts.mass, parts.source, parts.q_mass, parts.q_eps, parts.gamma);
    }
}
