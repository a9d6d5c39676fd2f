//! Load-coupled cellular network: feasibility and bottleneck ranking.

use asymap::prelude::*;

fn main() -> Result<()> {
    let db = |v: f64| 10f64.powf(v / 10.0);
    let gains = [
        [-95.0, -100.0, -118.0, -121.0, -115.0, -124.0],
        [-117.0, -122.0, -97.0, -99.0, -119.0, -116.0],
        [-120.0, -114.0, -121.0, -118.0, -96.0, -101.0],
    ];
    let mut s = LoadScenario {
        assignment: vec![vec![0, 1], vec![2, 3], vec![4, 5]],
        gains: Matrix::from_fn(3, 6, |i, j| db(gains[i][j])),
        demands: vec![2e6, 1.5e6, 3e6, 1e6, 2.5e6, 2e6],
        resource_blocks: 50,
        rb_bandwidth: 1.8e5,
        noise: 10f64.powf((-154.0 - 30.0) / 10.0) * 1.8e5,
        powers: vec![0.2; 3],
        caps: None,
    };
    let cfg = SolverConfig::default();
    for scale in [1.0, 40.0, 200.0] {
        s.demands.iter_mut().for_each(|d| *d *= scale);
        let m = s.mapping()?;
        let v = feasibility_check(m.as_ref(), &exact_asymptotic_load(&s)?, false, &cfg)?;
        println!("demand x{scale}: rho = {:.4}, feasible = {}", v.rho, v.feasible);
        match bottleneck_ranking(&s, &cfg)? {
            BottleneckOutcome::Ranked(r) => {
                for e in &r.entries {
                    println!(
                        "  bs {} load {:.4}{}",
                        e.base_station,
                        e.load,
                        if e.overloaded { " (overloaded)" } else { "" }
                    );
                }
            }
            BottleneckOutcome::Unavailable(_) => println!("  no fixed point, nothing to rank"),
        }
        s.demands.iter_mut().for_each(|d| *d /= scale);
    }
    Ok(())
}
