//! Spectral radius of `T_inf` by Collatz-Wielandt bracketing and by the
//! budget ladder `1/c*(p_bar)`.

use asymap::prelude::*;

fn main() -> Result<()> {
    let t = AffineMapping::new(
        Matrix::from_row_slice(3, 3, &[0.0, 0.3, 0.2, 0.1, 0.0, 0.5, 0.4, 0.2, 0.0]),
        PositiveVector::new(vec![1.0, 1.0, 1.0])?,
    )?;
    let a = exact_asymptotic_affine(&t);
    let cw = spectral_radius(&a, &SpectralMethod::LinearPower, None)?;
    println!(
        "collatz-wielandt: {:.10} in [{:.10}, {:.10}]",
        cw.rho, cw.lower, cw.upper
    );

    let ladder = spectral_radius(
        &a,
        &SpectralMethod::BudgetLadder(BudgetLadderConfig::default()),
        Some(&t),
    )?;
    println!(
        "budget ladder:    {:.10} (nonincreasing: {})",
        ladder.rho, ladder.ladder_monotone
    );
    for (p, l) in ladder.ladder.iter().step_by(3) {
        println!("  p_bar {p:>8.0e}: 1/c* = {l:.10}");
    }
    Ok(())
}
