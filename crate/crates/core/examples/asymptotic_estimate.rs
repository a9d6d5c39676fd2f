//! Numeric `T_inf` on a ladder of scales, next to the exact matrix.

use std::sync::Arc;

use asymap::prelude::*;

fn main() -> Result<()> {
    let t = AffineMapping::new(
        Matrix::from_row_slice(3, 3, &[0.0, 0.2, 0.1, 0.3, 0.0, 0.4, 0.1, 0.1, 0.0]),
        PositiveVector::new(vec![1.0, 2.0, 0.5])?,
    )?;
    let x = NonnegVector::new(vec![1.0, 0.5, 2.0])?;
    let est = estimate_asymptotic(&t, &x, &LadderConfig::default())?;
    let exact = exact_asymptotic_affine(&t).eval(&x)?;
    println!("estimate {:?} (accepted at h = {:e})", est.value.as_slice(), est.scale);
    println!("exact    {:?}", exact.as_slice());

    // sqrt(x) + 1 has a zero asymptotic mapping but converges slowly
    let sub = FnMapping::new(1, |x: &[f64]| vec![x[0].sqrt() + 1.0]);
    let one = NonnegVector::new(vec![1.0])?;
    match estimate_asymptotic(&sub, &one, &LadderConfig::default()) {
        Ok(e) => println!("sublinear: {:?}", e.value.as_slice()),
        Err(e) => println!("sublinear on the default ladder: {e}"),
    }
    let long = LadderConfig::decades(3, 22);
    println!(
        "sublinear on 1e3..1e22: {:?}",
        estimate_asymptotic(&sub, &one, &long)?.value.as_slice()
    );

    let numeric = AsymptoticMapping::numeric(Arc::new(t), LadderConfig::default())?;
    println!("numeric mapping at x: {:?}", numeric.eval(&x)?.as_slice());
    Ok(())
}
