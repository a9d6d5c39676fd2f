//! Utility and energy efficiency over the power budget, with the
//! low/high-power regimes and their tail slopes.

use asymap::prelude::*;

fn main() -> Result<()> {
    let t = AffineMapping::new(
        Matrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]),
        PositiveVector::new(vec![1.0, 1.0])?,
    )?;
    let rho = spectral_radius(&exact_asymptotic_affine(&t), &SpectralMethod::LinearPower, None)?.rho;
    let grid: Vec<f64> = (0..40).map(|k| 10f64.powf(-4.0 + 9.0 * k as f64 / 39.0)).collect();
    let norm = MonotoneNorm::max();
    let r = sweep(&t, rho, &norm, &norm, &grid, &SolverConfig::default())?;

    println!("transition point {:?}", r.transition_point);
    println!("{:>12} {:>12} {:>12} {:>10}", "p_bar", "utility", "ee", "regime");
    for row in r.rows.iter().step_by(4) {
        println!(
            "{:>12.4e} {:>12.6} {:>12.4e} {:>10}",
            row.p_bar,
            row.utility,
            row.ee,
            row.regime.name()
        );
    }
    let sc = scaling_diagnostics(&r)?;
    if let (Some(lo), Some(hi)) = (&sc.low, &sc.high) {
        println!("low-power slopes  U {:.4}, E {:.4}", lo.utility_slope, lo.ee_slope);
        println!("high-power slopes U {:.4}, E {:.4}", hi.utility_slope, hi.ee_slope);
    }
    Ok(())
}
